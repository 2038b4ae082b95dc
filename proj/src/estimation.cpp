#include "tagforge/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tagforge/imageproc.hpp"
#include "tagforge/text.hpp"

namespace tagforge {

std::string_view feature_tag_name(FeatureTag tag) {
  return tag == FeatureTag::luminance_histogram_32 ? "luminance_histogram_32" : "thumbnail_16x8";
}

std::optional<FeatureTag> find_feature_tag(std::string_view name) {
  if (name == "luminance_histogram_32") return FeatureTag::luminance_histogram_32;
  if (name == "thumbnail_16x8") return FeatureTag::thumbnail_16x8;
  return std::nullopt;
}

int feature_length(FeatureTag tag) {
  return tag == FeatureTag::luminance_histogram_32 ? kHistogramBins : kThumbnailRows * kThumbnailCols;
}

Eigen::VectorXd extract_features(const RgbImage& img, FeatureTag tag) {
  if (img.width() != kOutputWidth || img.height() != kOutputHeight)
    throw Error("features need a " + std::to_string(kOutputWidth) + "x" + std::to_string(kOutputHeight) +
                " image, got " + std::to_string(img.width()) + "x" + std::to_string(img.height()));
  const Eigen::ArrayXd y = luma(img.pixels()).cast<double>().max(0.0).min(1.0);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(feature_length(tag));
  if (tag == FeatureTag::luminance_histogram_32) {
    for (const double v : y) f[std::min(kHistogramBins - 1, static_cast<int>(v * kHistogramBins))] += 1.0;
    return f / static_cast<double>(y.size());
  }
  const int cell_w = kOutputWidth / kThumbnailCols, cell_h = kOutputHeight / kThumbnailRows;
  const Eigen::Map<const Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> plane(
      y.data(), kOutputHeight, kOutputWidth);
  for (int r = 0; r < kThumbnailRows; ++r)
    for (int c = 0; c < kThumbnailCols; ++c)
      f[r * kThumbnailCols + c] = plane.block(r * cell_h, c * cell_w, cell_h, cell_w).mean();
  return f;
}

bool is_estimable(OptionKey key) {
  switch (key) {
    case OptionKey::gamma:
    case OptionKey::camera_depression_deg:
    case OptionKey::camera_distance_m:
    case OptionKey::light_intensity:
    case OptionKey::ambient:
    case OptionKey::working_height_px:
      return true;
    default:
      return false;
  }
}

FeatureTag default_feature_tag(OptionKey key) {
  switch (key) {
    case OptionKey::camera_depression_deg:
    case OptionKey::camera_distance_m:
      return FeatureTag::thumbnail_16x8;
    default:
      return FeatureTag::luminance_histogram_32;
  }
}

Estimator fit(OptionKey key, FeatureTag tag, int k, Eigen::MatrixXd features, Eigen::VectorXd labels) {
  if (labels.size() == 0) throw Error("fit: no labeled images");
  if (k < 1) throw Error("fit: k must be positive");
  if (labels.size() < k)
    throw Error("fit: need at least k=" + std::to_string(k) + " labeled images, got " + std::to_string(labels.size()));
  if (features.cols() != labels.size() || features.rows() != feature_length(tag))
    throw Error("fit: feature matrix does not match the extractor");
  if (!features.allFinite()) throw Error("fit: non-finite feature");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (!option_in_range(key, labels[i]) && !(option_info(key).integral && option_in_range(key, std::round(labels[i]))))
      throw Error("fit: label " + format_double(labels[i]) + " outside the range of " + std::string(option_name(key)));
  return Estimator{key, tag, k, std::move(features), std::move(labels)};
}

Estimator fit(OptionKey key, const std::vector<std::pair<RgbImage, double>>& labeled, FeatureTag tag, int k) {
  Eigen::MatrixXd features(feature_length(tag), static_cast<Eigen::Index>(labeled.size()));
  Eigen::VectorXd labels(static_cast<Eigen::Index>(labeled.size()));
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    features.col(static_cast<Eigen::Index>(i)) = extract_features(labeled[i].first, tag);
    labels[static_cast<Eigen::Index>(i)] = labeled[i].second;
  }
  return fit(key, tag, k, std::move(features), std::move(labels));
}

double predict_features(const Estimator& est, const Eigen::VectorXd& feature) {
  if (feature.size() != est.features.rows()) throw Error("predict: feature length mismatch");
  const Eigen::VectorXd dist = (est.features.colwise() - feature).colwise().squaredNorm().transpose();
  std::vector<int> order(static_cast<std::size_t>(dist.size()));
  std::iota(order.begin(), order.end(), 0);
  const auto k = static_cast<std::ptrdiff_t>(std::min<Eigen::Index>(est.k, dist.size()));
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](int a, int b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
  double sum = 0.0;
  for (std::ptrdiff_t i = 0; i < k; ++i) sum += est.labels[order[static_cast<std::size_t>(i)]];
  return clamp_to_range(est.key, sum / static_cast<double>(k));
}

double predict(const Estimator& est, const RgbImage& img) { return predict_features(est, extract_features(img, est.tag)); }

std::string serialize_estimator(const Estimator& est) {
  std::string out = "tagforge-estimator " + std::to_string(kEstimatorFormatVersion) + "\n";
  out += "option " + std::string(option_name(est.key)) + "\n";
  out += "extractor " + std::string(feature_tag_name(est.tag)) + "\n";
  out += "k " + std::to_string(est.k) + "\n";
  out += "count " + std::to_string(est.labels.size()) + "\n";
  out += "dims " + std::to_string(est.features.rows()) + "\n";
  for (Eigen::Index i = 0; i < est.labels.size(); ++i) {
    out += format_double(est.labels[i]);
    for (Eigen::Index d = 0; d < est.features.rows(); ++d) out += " " + format_double(est.features(d, i));
    out += "\n";
  }
  out += "end\n";
  return out;
}

void save_estimator(const Estimator& est, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write estimator file: " + path);
  out << serialize_estimator(est);
  if (!out) throw Error("cannot write estimator file: " + path);
}

Estimator parse_estimator(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto nl = text.find('\n', pos);
    lines.push_back(trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos)));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  std::size_t at = 0;
  auto next = [&](std::string_view keyword) -> std::string_view {
    if (at >= lines.size()) throw ParseError("truncated estimator file: missing '" + std::string(keyword) + "'", int(at) + 1);
    const auto line = lines[at++];
    const auto sp = line.find(' ');
    if (line.substr(0, sp) != keyword)
      throw ParseError("expected '" + std::string(keyword) + "'", static_cast<int>(at));
    return sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp + 1));
  };
  auto positive = [&](std::string_view keyword) {
    const auto v = parse_int(next(keyword));
    if (!v || *v < 1 || *v > (1 << 24)) throw ParseError("malformed " + std::string(keyword), static_cast<int>(at));
    return static_cast<int>(*v);
  };

  const auto version = next("tagforge-estimator");
  if (version != std::to_string(kEstimatorFormatVersion))
    throw ParseError("unsupported estimator version '" + std::string(version) + "'", 1);
  const auto key = find_option_key(next("option"));
  if (!key) throw ParseError("unknown option key", static_cast<int>(at));
  const auto tag = find_feature_tag(next("extractor"));
  if (!tag) throw ParseError("unknown extractor", static_cast<int>(at));
  const int k = positive("k");
  const int count = positive("count");
  const int dims = positive("dims");
  if (dims != feature_length(*tag)) throw ParseError("dims do not match the extractor", static_cast<int>(at));

  Eigen::MatrixXd features(dims, count);
  Eigen::VectorXd labels(count);
  for (int i = 0; i < count; ++i) {
    if (at >= lines.size() || lines[at] == "end") throw ParseError("truncated estimator file: expected " + std::to_string(count) + " rows", int(at) + 1);
    const auto fields = split_fields(lines[at++], " \t");
    if (static_cast<int>(fields.size()) != dims + 1)
      throw ParseError("row has " + std::to_string(fields.size()) + " values, expected " + std::to_string(dims + 1),
                       static_cast<int>(at));
    for (int d = 0; d <= dims; ++d) {
      const auto v = parse_double(fields[static_cast<std::size_t>(d)]);
      if (!v) throw ParseError("non-numeric value '" + std::string(fields[static_cast<std::size_t>(d)]) + "'", static_cast<int>(at));
      if (d == 0) labels[i] = *v;
      else features(d - 1, i) = *v;
    }
  }
  (void)next("end");
  while (at < lines.size())
    if (!lines[at++].empty()) throw ParseError("unexpected data after 'end'", static_cast<int>(at));
  try {
    return fit(*key, *tag, k, std::move(features), std::move(labels));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("invalid estimator: ") + e.what(), 0);
  }
}

Estimator load_estimator(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open estimator file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_estimator(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

}  // namespace tagforge
