#include "tagforge/distribution.hpp"

#include <fstream>
#include <sstream>

#include "tagforge/text.hpp"

namespace tagforge {

void EmpiricalDistribution::validate() const {
  if (values.empty()) throw Error("distribution of " + std::string(option_name(key)) + " has no values");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!option_in_range(key, values[i]))
      throw Error("value " + format_double(values[i]) + " at position " + std::to_string(i) + " is outside the range of " +
                  std::string(option_name(key)));
}

EmpiricalDistribution build_distribution(const Estimator& est, const std::vector<RgbImage>& images, std::string source) {
  if (images.empty()) throw Error("build_distribution: no images");
  EmpiricalDistribution d{est.key, {}, std::move(source)};
  d.values.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    try {
      d.values.push_back(predict(est, images[i]));
    } catch (const Error& e) {
      throw Error("image " + std::to_string(i) + ": " + e.what());
    }
  }
  return d;
}

double wasserstein1(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  if (a.key != b.key)
    throw Error("wasserstein1: option keys differ (" + std::string(option_name(a.key)) + " vs " +
                std::string(option_name(b.key)) + ")");
  return wasserstein1_cdf<double>(a.values, b.values);
}

double ks_uniform_statistic(std::vector<double> values, double lo, double hi) {
  if (values.empty() || !(hi > lo)) throw Error("ks_uniform_statistic: need values and hi > lo");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = std::clamp((values[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, (double(i) + 1.0) / n - f, f - double(i) / n});
  }
  return d;
}

std::string serialize_profile(const TargetProfile& p) {
  std::string out = "tagforge-profile v" + std::to_string(kProfileFormatVersion) + "\n";
  out += "meta seed=" + std::to_string(p.seed) + "\n";
  out += "meta created=" + p.created + "\n";
  out += "meta estimator_version=" + p.estimator_version + "\n";
  for (const auto& [key, dist] : p.entries) {
    out += "option " + std::string(option_name(key)) + "\n";
    out += "source " + dist.source + "\n";
    out += "count " + std::to_string(dist.values.size()) + "\n";
    for (const double v : dist.values) out += format_double(v) + "\n";
    out += "end\n";
  }
  return out;
}

namespace {

std::string one_line(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

}  // namespace

TargetProfile parse_profile(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto nl = text.find('\n', pos);
    lines.push_back(trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos)));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  std::size_t at = 0;
  auto line_no = [&] { return static_cast<int>(at); };
  auto skip_blank = [&] {
    while (at < lines.size() && lines[at].empty()) ++at;
  };
  auto word = [&](std::string_view keyword) -> std::string_view {
    skip_blank();
    if (at >= lines.size()) throw ParseError("unexpected end of profile, expected '" + std::string(keyword) + "'", int(at) + 1);
    const auto line = lines[at++];
    const auto sp = line.find(' ');
    if (line.substr(0, sp) != keyword) throw ParseError("expected '" + std::string(keyword) + "'", line_no());
    return sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp + 1));
  };

  TargetProfile p;
  skip_blank();
  const std::string header = "tagforge-profile v" + std::to_string(kProfileFormatVersion);
  if (at >= lines.size() || lines[at] != header) throw ParseError("expected header '" + header + "'", int(at) + 1);
  ++at;
  for (skip_blank(); at < lines.size() && lines[at].starts_with("meta "); skip_blank()) {
    const auto kv = trim(lines[at++].substr(5));
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw ParseError("malformed meta line", line_no());
    const auto k = trim(kv.substr(0, eq)), v = trim(kv.substr(eq + 1));
    if (k == "seed") {
      const auto s = parse_u64(v);
      if (!s) throw ParseError("malformed seed", line_no());
      p.seed = *s;
    } else if (k == "created") {
      p.created = std::string(v);
    } else if (k == "estimator_version") {
      p.estimator_version = std::string(v);
    } else {
      throw ParseError("unknown meta field '" + std::string(k) + "'", line_no());
    }
  }

  for (skip_blank(); at < lines.size(); skip_blank()) {
    const auto name = word("option");
    const auto key = find_option_key(name);
    if (!key) throw ParseError("unknown option key '" + std::string(name) + "'", line_no());
    if (p.entries.contains(*key)) throw ParseError("duplicate option '" + std::string(name) + "'", line_no());
    EmpiricalDistribution d{*key, {}, std::string(word("source"))};
    const auto count = parse_int(word("count"));
    if (!count || *count < 0) throw ParseError("malformed count", line_no());
    if (*count == 0) throw ParseError("option '" + std::string(name) + "' has an empty values list", line_no());
    for (long long i = 0; i < *count; ++i) {
      skip_blank();
      if (at >= lines.size() || lines[at] == "end")
        throw ParseError("expected " + std::to_string(*count) + " values for '" + std::string(name) + "'", int(at) + 1);
      const auto v = parse_double(lines[at++]);
      if (!v) throw ParseError("non-numeric value '" + std::string(lines[at - 1]) + "'", line_no());
      if (!option_in_range(*key, *v))
        throw ParseError("value " + format_double(*v) + " outside the range of " + std::string(name), line_no());
      d.values.push_back(*v);
    }
    (void)word("end");
    p.entries.emplace(*key, std::move(d));
  }
  if (p.entries.empty()) throw ParseError("profile has no options", int(at) + 1);
  return p;
}

void save_profile(const TargetProfile& profile, const std::string& path) {
  TargetProfile clean = profile;
  clean.created = one_line(clean.created);
  clean.estimator_version = one_line(clean.estimator_version);
  for (auto& [key, d] : clean.entries) {
    d.key = key;
    d.source = one_line(d.source);
    d.validate();
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write profile: " + path);
  out << serialize_profile(clean);
  if (!out) throw Error("cannot write profile: " + path);
}

TargetProfile load_profile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open profile: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_profile(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

Histogram histogram(std::span<const double> values, double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw Error("histogram: need bins >= 1 and hi > lo");
  Histogram h{lo, hi, std::vector<std::size_t>(static_cast<std::size_t>(bins), 0)};
  for (const double v : values) {
    const double t = (v - lo) / (hi - lo) * bins;
    const int b = std::clamp(static_cast<int>(std::floor(t)), 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

Histogram histogram(const EmpiricalDistribution& dist, int bins) {
  const auto& info = option_info(dist.key);
  return histogram(dist.values, info.lo, info.hi, bins);
}

std::string format_histogram(const Histogram& h, int bar_width) {
  const std::size_t peak = std::max<std::size_t>(1, *std::max_element(h.counts.begin(), h.counts.end()));
  const double step = (h.hi - h.lo) / static_cast<double>(h.counts.size());
  std::string out;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "[%9.3f, %9.3f) %6zu ", h.lo + step * double(i), h.lo + step * double(i + 1), h.counts[i]);
    out += buf;
    out += std::string(h.counts[i] * static_cast<std::size_t>(bar_width) / peak, '#');
    out += '\n';
  }
  return out;
}

}  // namespace tagforge
