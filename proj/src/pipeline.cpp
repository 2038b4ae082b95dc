#include "tagforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "tagforge/mesh.hpp"
#include "tagforge/renderer.hpp"
#include "tagforge/rng.hpp"
#include "tagforge/text.hpp"

namespace tagforge {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

std::string_view mode_name(OptionMode mode) {
  switch (mode) {
    case OptionMode::fixed: return "fixed";
    case OptionMode::uniform: return "uniform";
    case OptionMode::choice: return "choice";
    case OptionMode::profile: return "profile";
  }
  return "fixed";
}

std::string OptionSpec::to_string() const {
  std::string s(mode_name(mode));
  switch (mode) {
    case OptionMode::fixed: s += " " + format_double(value); break;
    case OptionMode::uniform: s += " " + format_double(lo) + " " + format_double(hi); break;
    case OptionMode::choice:
      for (const double c : choices) s += " " + format_double(c);
      break;
    case OptionMode::profile: break;
  }
  return s;
}

std::array<OptionSpec, kOptionKeyCount> GenerationConfig::default_option_specs() {
  std::array<OptionSpec, kOptionKeyCount> specs;
  const RenderOptions defaults;
  for (int i = 0; i < kOptionKeyCount; ++i) {
    specs[static_cast<std::size_t>(i)].mode = OptionMode::fixed;
    specs[static_cast<std::size_t>(i)].value = get_option(defaults, static_cast<OptionKey>(i));
  }
  return specs;
}

std::string GenerationConfig::resolve(const std::string& path) const {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

namespace {

bool is_whole(double v) { return std::floor(v) == v; }

void check_value(OptionKey key, double v, std::string_view what) {
  const auto& info = option_info(key);
  const bool ok = info.periodic ? (v >= info.lo && v <= info.hi) : option_in_range(key, v);
  if (!ok || (info.integral && !is_whole(v)))
    throw ConfigError("option " + std::string(info.name) + ": " + std::string(what) + " " + format_double(v) +
                      " is outside [" + format_double(info.lo) + ", " + format_double(info.hi) + "]");
}

}  // namespace

void GenerationConfig::validate() const {
  if (num_identities < 1) throw ConfigError("num_identities must be >= 1");
  if (images_per_identity < 1) throw ConfigError("images_per_identity must be >= 1");
  if (num_cameras < 1) throw ConfigError("num_cameras must be >= 1");
  if (!(beta >= 0.0 && beta <= 0.5)) throw ConfigError("beta must lie in [0, 0.5]");
  if (poses.empty() && bvh_frames.empty()) throw ConfigError("poses: no builtin poses and no bvh frames configured");
  for (const auto& p : poses)
    if (!find_builtin_pose(p)) throw ConfigError("poses: unknown pose '" + p + "'");
  if (!bvh_frames.empty() && bvh.empty()) throw ConfigError("bvh_frames given without a bvh file");
  if (!bvh.empty() && bvh_frames.empty()) throw ConfigError("bvh given without bvh_frames");
  if (bvh.find_first_of(",@") != std::string::npos) throw ConfigError("bvh: path must not contain ',' or '@'");
  for (const int f : bvh_frames)
    if (f < 0) throw ConfigError("bvh_frames: negative frame index");
  for (int i = 0; i < kOptionKeyCount; ++i) {
    const auto key = static_cast<OptionKey>(i);
    const auto& spec = options[static_cast<std::size_t>(i)];
    if (key == OptionKey::camera_id) {
      if (!(spec == default_option_specs()[static_cast<std::size_t>(i)]))
        throw ConfigError("option camera_id is drawn from num_cameras and cannot be configured");
      continue;
    }
    switch (spec.mode) {
      case OptionMode::fixed:
        check_value(key, spec.value, "value");
        if (option_info(key).periodic && spec.value == option_info(key).hi)
          throw ConfigError("option " + std::string(option_name(key)) + ": value must be below " +
                            format_double(option_info(key).hi));
        break;
      case OptionMode::uniform:
        check_value(key, spec.lo, "lower bound");
        check_value(key, spec.hi, "upper bound");
        if (spec.lo > spec.hi) throw ConfigError("option " + std::string(option_name(key)) + ": lower bound above upper bound");
        break;
      case OptionMode::choice:
        if (spec.choices.empty()) throw ConfigError("option " + std::string(option_name(key)) + ": empty choice list");
        for (const double c : spec.choices) check_value(key, c, "choice");
        break;
      case OptionMode::profile: break;
    }
  }
}

std::string GenerationConfig::canonical_text() const {
  std::string s;
  s += "seed=" + std::to_string(seed) + "\n";
  s += "num_identities=" + std::to_string(num_identities) + "\n";
  s += "images_per_identity=" + std::to_string(images_per_identity) + "\n";
  s += "num_cameras=" + std::to_string(num_cameras) + "\n";
  s += "backgrounds=" + backgrounds + "\n";
  s += "crop_manifest=" + crop_manifest + "\n";
  s += "beta=" + format_double(beta) + "\n";
  s += "poses=";
  for (const auto& p : poses) s += p + " ";
  s += "\nbvh=" + bvh + "\nbvh_frames=";
  for (const int f : bvh_frames) s += std::to_string(f) + " ";
  s += "\nbvh_joint_map=" + bvh_joint_map + "\n";
  for (int i = 0; i < kOptionKeyCount; ++i)
    s += "option " + std::string(option_name(static_cast<OptionKey>(i))) + "=" + options[static_cast<std::size_t>(i)].to_string() + "\n";
  return s;
}

std::uint64_t GenerationConfig::hash() const { return hash_text(canonical_text()); }

namespace {

[[noreturn]] void config_error(int line, const std::string& what) {
  throw ConfigError("line " + std::to_string(line) + ": " + what);
}

std::vector<double> parse_numbers(std::string_view text, int line, std::string_view what) {
  std::vector<double> out;
  for (const auto f : split_fields(text, " \t")) {
    const auto v = parse_double(f);
    if (!v) config_error(line, "malformed number '" + std::string(f) + "' in " + std::string(what));
    out.push_back(*v);
  }
  return out;
}

OptionSpec parse_mode(std::string_view value, int line, std::string_view key) {
  const auto fields = split_fields(value, " \t");
  if (fields.empty()) config_error(line, "option " + std::string(key) + ": empty mode");
  const auto mode = fields[0];
  const auto rest = trim(value.substr(value.find(mode) + mode.size()));
  const auto nums = parse_numbers(rest, line, key);
  OptionSpec spec;
  if (mode == "fixed") {
    if (nums.size() != 1) config_error(line, "option " + std::string(key) + ": fixed takes one value");
    spec.mode = OptionMode::fixed;
    spec.value = nums[0];
  } else if (mode == "uniform") {
    if (nums.size() != 2) config_error(line, "option " + std::string(key) + ": uniform takes lo and hi");
    spec.mode = OptionMode::uniform;
    spec.lo = nums[0];
    spec.hi = nums[1];
  } else if (mode == "choice") {
    if (nums.empty()) config_error(line, "option " + std::string(key) + ": choice needs at least one value");
    spec.mode = OptionMode::choice;
    spec.choices = nums;
  } else if (mode == "profile") {
    if (!nums.empty()) config_error(line, "option " + std::string(key) + ": profile takes no values");
    spec.mode = OptionMode::profile;
  } else {
    config_error(line, "option " + std::string(key) + ": unknown mode '" + std::string(mode) + "'");
  }
  return spec;
}

int parse_count(std::string_view v, int line, std::string_view key) {
  const auto n = parse_int(v);
  if (!n || *n < 0 || *n > 100000000) config_error(line, "malformed " + std::string(key) + " '" + std::string(v) + "'");
  return static_cast<int>(*n);
}

}  // namespace

GenerationConfig parse_config(std::string_view text, const std::string& base_dir) {
  GenerationConfig cfg;
  cfg.base_dir = base_dir;
  std::optional<OptionKey> block;
  std::array<bool, kOptionKeyCount> seen_block{};
  int line_no = 0;
  for (std::size_t pos = 0; pos <= text.size();) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') config_error(line_no, "malformed section header");
      const auto inner = split_fields(line.substr(1, line.size() - 2), " \t");
      if (inner.size() != 2 || inner[0] != "option") config_error(line_no, "expected [option <key>]");
      const auto key = find_option_key(inner[1]);
      if (!key) config_error(line_no, "unknown option key '" + std::string(inner[1]) + "'");
      if (*key == OptionKey::camera_id) config_error(line_no, "option camera_id is drawn from num_cameras");
      if (seen_block[static_cast<std::size_t>(*key)]) config_error(line_no, "duplicate block for " + std::string(inner[1]));
      seen_block[static_cast<std::size_t>(*key)] = true;
      block = key;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) config_error(line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));

    if (block) {
      if (key != "mode") config_error(line_no, "unknown option setting '" + std::string(key) + "'");
      cfg.option(*block) = parse_mode(value, line_no, option_name(*block));
      continue;
    }
    if (key == "seed") {
      const auto v = parse_u64(value);
      if (!v) config_error(line_no, "malformed seed '" + std::string(value) + "'");
      cfg.seed = *v;
    } else if (key == "num_identities") {
      cfg.num_identities = parse_count(value, line_no, key);
    } else if (key == "images_per_identity") {
      cfg.images_per_identity = parse_count(value, line_no, key);
    } else if (key == "num_cameras") {
      cfg.num_cameras = parse_count(value, line_no, key);
    } else if (key == "backgrounds") {
      cfg.backgrounds = value == "none" ? std::string{} : std::string(value);
    } else if (key == "crop_manifest") {
      cfg.crop_manifest = value == "none" ? std::string{} : std::string(value);
    } else if (key == "beta") {
      const auto v = parse_double(value);
      if (!v) config_error(line_no, "malformed beta '" + std::string(value) + "'");
      cfg.beta = *v;
    } else if (key == "poses") {
      cfg.poses.clear();
      for (const auto p : split_fields(value, " \t,")) {
        if (p == "none") continue;
        if (!find_builtin_pose(p)) config_error(line_no, "unknown pose '" + std::string(p) + "'");
        cfg.poses.emplace_back(p);
      }
    } else if (key == "bvh") {
      cfg.bvh = value == "none" ? std::string{} : std::string(value);
    } else if (key == "bvh_frames") {
      cfg.bvh_frames.clear();
      for (const auto f : split_fields(value, " \t,")) cfg.bvh_frames.push_back(parse_count(f, line_no, key));
    } else if (key == "bvh_joint_map") {
      cfg.bvh_joint_map = std::string(value);
    } else if (key == "output") {
      cfg.output = std::string(value);
    } else {
      config_error(line_no, "unknown setting '" + std::string(key) + "'");
    }
  }
  cfg.validate();
  return cfg;
}

GenerationConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto dir = fs::path(path).parent_path();
  try {
    return parse_config(ss.str(), dir.empty() ? "." : dir.string());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Context
// ---------------------------------------------------------------------------

namespace {

bvh::JointMap load_joint_map(const GenerationConfig& cfg) {
  if (cfg.bvh_joint_map == "cmu") return bvh::cmu_joint_map();
  const auto path = cfg.resolve(cfg.bvh_joint_map);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open bvh_joint_map file: " + path);
  bvh::JointMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(std::string_view(line).substr(0, line.find('#')), " \t\r");
    if (fields.empty()) continue;
    const auto joint = fields.size() == 2 ? find_joint(fields[1]) : std::nullopt;
    if (!joint) throw ConfigError(path + ": line " + std::to_string(line_no) + ": expected '<bvh joint> <humanoid joint>'");
    map[std::string(fields[0])] = *joint;
  }
  return map;
}

}  // namespace

GenerationContext GenerationContext::create(GenerationConfig config, std::optional<TargetProfile> profile) {
  config.validate();
  GenerationContext ctx;
  if (!config.backgrounds.empty())
    ctx.corpus = load_background_corpus(config.resolve(config.backgrounds), config.resolve(config.crop_manifest));

  for (const auto& name : config.poses) {
    PoseRef ref{name, -1};
    if (!ctx.pose_library.contains(name)) ctx.pose_set.push_back(ref);
    ctx.pose_library[name] = builtin_pose(name);
  }
  if (!config.bvh.empty()) {
    const auto doc = bvh::load(config.resolve(config.bvh));
    const auto map = load_joint_map(config);
    for (const int f : config.bvh_frames) {
      if (f >= doc.frame_count())
        throw ConfigError("bvh_frames: frame " + std::to_string(f) + " beyond the clip's " +
                          std::to_string(doc.frame_count()) + " frames");
      const PoseRef ref{config.bvh, f};
      if (!ctx.pose_library.contains(ref.to_string())) ctx.pose_set.push_back(ref);
      ctx.pose_library[ref.to_string()] = bvh::pose_from_frame(doc, f, map);
    }
  }

  for (int i = 0; i < kOptionKeyCount; ++i) {
    const auto key = static_cast<OptionKey>(i);
    if (config.option(key).mode != OptionMode::profile) continue;
    if (!profile) throw ConfigError("option " + std::string(option_name(key)) + " is in profile mode but no profile was given");
    const auto* d = profile->find(key);
    if (!d) throw ConfigError("option " + std::string(option_name(key)) + " is in profile mode but the profile has no such entry");
    d->validate();
  }
  ctx.config = std::move(config);
  ctx.profile = std::move(profile);
  return ctx;
}

const Pose& GenerationContext::pose(const PoseRef& ref) const {
  const auto it = pose_library.find(ref.to_string());
  if (it == pose_library.end()) throw Error("pose not in the configured pose set: " + ref.to_string());
  return it->second;
}

// ---------------------------------------------------------------------------
// Per-image options and rendering
// ---------------------------------------------------------------------------

std::uint64_t image_seed(std::uint64_t global_seed, int identity_id, int image_index) {
  return hash_words({global_seed, static_cast<std::uint64_t>(identity_id), static_cast<std::uint64_t>(image_index)});
}

namespace {

constexpr std::uint64_t kPoseStream = 100;
constexpr std::uint64_t kBackgroundStream = 101;

double draw(const GenerationContext& ctx, OptionKey key, Rng& rng) {
  const auto& spec = ctx.config.option(key);
  const auto& info = option_info(key);
  switch (spec.mode) {
    case OptionMode::fixed: return spec.value;
    case OptionMode::uniform:
      if (info.integral) {
        const auto lo = static_cast<std::uint64_t>(std::ceil(spec.lo)), hi = static_cast<std::uint64_t>(std::floor(spec.hi));
        return static_cast<double>(lo + rng.index(hi - lo + 1));
      }
      return clamp_to_range(key, rng.uniform(spec.lo, spec.hi));
    case OptionMode::choice: return spec.choices[rng.index(spec.choices.size())];
    case OptionMode::profile: return sample_option(*ctx.profile->find(key), rng);
  }
  return spec.value;
}

}  // namespace

RenderOptions resolve_options(const GenerationContext& ctx, int identity_id, int image_index) {
  const std::uint64_t s = image_seed(ctx.config.seed, identity_id, image_index);
  RenderOptions o;
  for (int i = 0; i < kOptionKeyCount; ++i) {
    const auto key = static_cast<OptionKey>(i);
    Rng rng(hash_words({s, static_cast<std::uint64_t>(i)}));
    if (key == OptionKey::camera_id) {
      o.camera_id = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(ctx.config.num_cameras)));
      continue;
    }
    set_option(o, key, draw(ctx, key, rng));
  }
  Rng pose_rng(hash_words({s, kPoseStream}));
  o.pose = ctx.pose_set[pose_rng.index(ctx.pose_set.size())];
  o.background_ref = choose_background(ctx.corpus, hash_words({s, kBackgroundStream}));
  return o;
}

RgbImage postprocess(const RgbImage& composited, const ColorBias& bias, double gamma, int working_height_px) {
  return degrade_resolution(apply_gamma(apply_color_bias(composited, bias), gamma), working_height_px, kOutputWidth,
                            kOutputHeight);
}

RgbImage render_labeled_image(const GenerationContext& ctx, const PersonSpec& spec, const RenderOptions& opts) {
  const Mesh mesh = build_mesh(spec, ctx.pose(opts.pose));
  const ImageBuffer fg = render(mesh, opts, kOutputWidth, kOutputHeight);
  const RgbImage bg = crop_background(ctx.corpus, opts.background_ref, kOutputWidth, kOutputHeight);
  const ColorBias bias = derive_color_bias(opts.camera_id, ctx.config.seed, ctx.config.beta);
  return postprocess(composite(fg, bg), bias, opts.gamma, opts.working_height_px);
}

std::string market_file_name(int identity_id, int camera_id, int image_index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d_c%d_%06d.png", identity_id, camera_id, image_index);
  return buf;
}

std::optional<MarketName> parse_market_name(std::string_view name) {
  if (!name.ends_with(".png") && !name.ends_with(".jpg")) return std::nullopt;
  name.remove_suffix(4);
  const auto u1 = name.find('_');
  if (u1 == std::string_view::npos || u1 + 2 > name.size() || name[u1 + 1] != 'c') return std::nullopt;
  const auto u2 = name.find('_', u1 + 2);
  if (u2 == std::string_view::npos) return std::nullopt;
  const auto id = parse_int(name.substr(0, u1));
  const auto cam = parse_int(name.substr(u1 + 2, u2 - u1 - 2));
  const auto idx = parse_int(name.substr(u2 + 1));
  if (!id || !cam || !idx || *id < 0 || *cam < 1 || *idx < 0) return std::nullopt;
  return MarketName{static_cast<int>(*id), static_cast<int>(*cam), static_cast<int>(*idx)};
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

std::vector<double> DatasetManifest::column(OptionKey key) const {
  std::vector<double> v;
  v.reserve(records.size());
  for (const auto& r : records) v.push_back(get_option(r.options, key));
  return v;
}

namespace {

constexpr std::string_view kManifestMagic = "#manifest v1";

std::string manifest_columns() {
  std::string s = "file,identity_id,image_index,pose,background_ref";
  for (const auto& info : kOptionTable) s += "," + std::string(info.name);
  return s;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string serialize_manifest(const DatasetManifest& m) {
  std::string out = std::string(kManifestMagic) + " seed=" + std::to_string(m.seed) + " config_hash=" + hex64(m.config_hash) + "\n";
  out += manifest_columns() + "\n";
  for (const auto& r : m.records) {
    out += r.file + "," + std::to_string(r.identity_id) + "," + std::to_string(r.image_index) + "," +
           r.options.pose.to_string() + "," + r.options.background_ref.to_string();
    for (const auto& info : kOptionTable) {
      const double v = get_option(r.options, info.key);
      out += "," + (info.integral ? std::to_string(std::llround(v)) : format_double(v));
    }
    out += "\n";
  }
  return out;
}

DatasetManifest parse_manifest(std::string_view text) {
  DatasetManifest m;
  int line_no = 0;
  bool header = false, columns = false;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto nl = text.find('\n', pos);
    const auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!header) {
      if (!line.starts_with(kManifestMagic)) throw ParseError("missing manifest header", line_no);
      for (const auto f : split_fields(line.substr(kManifestMagic.size()), " ")) {
        const auto eq = f.find('=');
        const auto k = f.substr(0, eq), v = eq == std::string_view::npos ? std::string_view{} : f.substr(eq + 1);
        if (k == "seed") {
          const auto s = parse_u64(v);
          if (!s) throw ParseError("malformed seed", line_no);
          m.seed = *s;
        } else if (k == "config_hash") {
          unsigned long long h = 0;
          if (v.size() != 16 || std::sscanf(std::string(v).c_str(), "%16llx", &h) != 1) throw ParseError("malformed config_hash", line_no);
          m.config_hash = h;
        }
      }
      header = true;
      continue;
    }
    if (!columns) {
      if (line != manifest_columns()) throw ParseError("unexpected manifest columns", line_no);
      columns = true;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    for (std::size_t a = 0;;) {
      const auto c = line.find(',', a);
      f.push_back(line.substr(a, c == std::string_view::npos ? std::string_view::npos : c - a));
      if (c == std::string_view::npos) break;
      a = c + 1;
    }
    if (f.size() != 5 + kOptionKeyCount)
      throw ParseError("record has " + std::to_string(f.size()) + " fields, expected " + std::to_string(5 + kOptionKeyCount), line_no);
    ManifestRecord r;
    r.file = std::string(f[0]);
    const auto id = parse_int(f[1]), idx = parse_int(f[2]);
    if (!id || !idx) throw ParseError("malformed identity or index", line_no);
    r.identity_id = static_cast<int>(*id);
    r.image_index = static_cast<int>(*idx);
    try {
      r.options.pose = PoseRef::parse(f[3]);
      r.options.background_ref = BackgroundRef::parse(f[4]);
      for (int i = 0; i < kOptionKeyCount; ++i) {
        const auto v = parse_double(f[static_cast<std::size_t>(5 + i)]);
        if (!v) throw ConfigError("malformed value for " + std::string(kOptionTable[static_cast<std::size_t>(i)].name));
        set_option(r.options, static_cast<OptionKey>(i), *v);
      }
      r.options.validate();
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), line_no);
    }
    m.records.push_back(std::move(r));
  }
  if (!columns) throw ParseError("truncated manifest", line_no);
  return m;
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open manifest: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

// ---------------------------------------------------------------------------
// Parallel generation
// ---------------------------------------------------------------------------

int default_workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

namespace {

/// Runs job(i) for i in [0, n) on `workers` threads. Rethrows the error of the lowest
/// failing index so the reported failure does not depend on scheduling.
template <typename Job>
void parallel_for(int n, int workers, Job job) {
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  int first_failure = n;
  std::exception_ptr error;
  auto run = [&] {
    for (int i = next++; i < n && !failed; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < first_failure) {
          first_failure = i;
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };
  const int threads = std::clamp(workers, 1, std::max(1, n));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

DatasetManifest generate_dataset(const GenerationContext& ctx, const std::string& out_dir, int workers) {
  const auto& cfg = ctx.config;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw GenerationError("cannot create output directory: " + out_dir);
  fs::remove(fs::path(out_dir) / kManifestFile, ec);

  const int per = cfg.images_per_identity;
  const int n = cfg.num_identities * per;
  DatasetManifest m{cfg.seed, cfg.hash(), std::vector<ManifestRecord>(static_cast<std::size_t>(n))};
  parallel_for(n, workers, [&](int j) {
    const int id = j / per + 1, idx = j % per;
    try {
      auto& r = m.records[static_cast<std::size_t>(j)];
      r.identity_id = id;
      r.image_index = idx;
      r.options = resolve_options(ctx, id, idx);
      r.file = market_file_name(id, r.options.camera_id, idx);
      const auto img = render_labeled_image(ctx, derive_person_spec(cfg.seed, static_cast<std::uint64_t>(id)), r.options);
      write_png((fs::path(out_dir) / r.file).string(), quantize(img));
    } catch (const std::exception& e) {
      throw GenerationError("identity " + std::to_string(id) + ", image " + std::to_string(idx) + ": " + e.what());
    }
  });

  const auto tmp = fs::path(out_dir) / (std::string(kManifestFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    out << serialize_manifest(m);
    if (!out) throw GenerationError("cannot write manifest in " + out_dir);
  }
  fs::rename(tmp, fs::path(out_dir) / kManifestFile);
  return m;
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

std::pair<double, double> default_sweep_range(OptionKey key) {
  if (key == OptionKey::gamma) return {0.5, 2.0};
  if (key == OptionKey::camera_depression_deg) return {0.0, 60.0};
  return {option_info(key).lo, option_info(key).hi};
}

std::vector<std::pair<RgbImage, double>> render_sweep(const GenerationContext& ctx, OptionKey key, int n, double lo,
                                                      double hi, int workers) {
  if (n < 1) throw Error("sweep needs at least one image");
  if (!(lo <= hi) || !option_in_range(key, lo) || !option_in_range(key, hi))
    throw ConfigError("sweep range [" + format_double(lo) + ", " + format_double(hi) + "] is outside the range of " +
                      std::string(option_name(key)));
  std::vector<std::pair<RgbImage, double>> out(static_cast<std::size_t>(n));
  parallel_for(n, workers, [&](int i) {
    const int id = i + 1;
    RenderOptions o = resolve_options(ctx, id, 0);
    set_option(o, key, n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    const auto img = render_labeled_image(ctx, derive_person_spec(ctx.config.seed, static_cast<std::uint64_t>(id)), o);
    // Through 8 bits, like any image read back from disk.
    out[static_cast<std::size_t>(i)] = {to_float(quantize(img)), get_option(o, key)};
  });
  return out;
}

namespace {

std::vector<fs::path> image_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && is_image_path(e.path().string())) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

std::vector<std::pair<std::string, RgbImage>> load_image_dir(const std::string& dir) {
  std::vector<std::pair<std::string, RgbImage>> out;
  for (const auto& f : image_files(dir)) {
    RgbImage img = to_float(read_image(f.string()));
    if (img.width() != kOutputWidth || img.height() != kOutputHeight) img = resize(img, kOutputWidth, kOutputHeight);
    out.emplace_back(f.filename().string(), std::move(img));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gamma variant
// ---------------------------------------------------------------------------

std::vector<GammaVariantEntry> make_gamma_variant(const std::string& in_dir, double lo, double hi, std::uint64_t seed,
                                                  const std::string& out_dir) {
  if (!(lo <= hi) || !option_in_range(OptionKey::gamma, lo) || !option_in_range(OptionKey::gamma, hi))
    throw ConfigError("gamma range must satisfy 0.4 <= lo <= hi <= 2.5");
  const auto files = image_files(in_dir);
  if (out_dir.empty() || (fs::exists(out_dir) && fs::equivalent(in_dir, out_dir)))
    throw ConfigError("output directory must differ from the input directory");
  fs::create_directories(out_dir);

  std::vector<GammaVariantEntry> entries;
  for (const auto& f : files) {
    const auto name = f.filename().string();
    GammaVariantEntry e{name, std::nullopt, "ok"};
    try {
      const auto img = to_float(read_image(f.string()));
      const double g = lo == hi ? lo : Rng(hash_words({seed, hash_text(name)})).uniform(lo, hi);
      write_png((fs::path(out_dir) / f.stem()).string() + ".png", quantize(apply_gamma(img, g)));
      e.gamma = g;
    } catch (const Error& err) {
      e.status = std::string("skipped: ") + err.what();
      std::replace(e.status.begin(), e.status.end(), ',', ';');
      std::replace(e.status.begin(), e.status.end(), '\n', ' ');
      std::fprintf(stderr, "warning: %s\n", e.status.c_str());
    }
    entries.push_back(std::move(e));
  }
  std::ofstream side(fs::path(out_dir) / kGammaSidecarFile, std::ios::binary);
  side << "file,gamma,status\n";
  for (const auto& e : entries) side << e.file << "," << (e.gamma ? format_double(*e.gamma) : "") << "," << e.status << "\n";
  if (!side) throw Error("cannot write " + std::string(kGammaSidecarFile));
  return entries;
}

}  // namespace tagforge
