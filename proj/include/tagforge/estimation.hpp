#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tagforge/image.hpp"
#include "tagforge/scene_model.hpp"

namespace tagforge {

enum class FeatureTag { luminance_histogram_32, thumbnail_16x8 };

[[nodiscard]] std::string_view feature_tag_name(FeatureTag tag);
[[nodiscard]] std::optional<FeatureTag> find_feature_tag(std::string_view name);
[[nodiscard]] int feature_length(FeatureTag tag);

inline constexpr int kThumbnailRows = 16;
inline constexpr int kThumbnailCols = 8;
inline constexpr int kHistogramBins = 32;

/// Rec. 709 luma.
template <typename Derived>
[[nodiscard]] auto luma(const Eigen::ArrayBase<Derived>& rgb) {
  return 0.2126f * rgb.col(0) + 0.7152f * rgb.col(1) + 0.0722f * rgb.col(2);
}

/// luminance_histogram_32: normalized 32-bin histogram of luma.
/// thumbnail_16x8: luma box-averaged to 16 rows x 8 columns, row-major.
/// Input must be 128x256 (WxH); throws Error otherwise.
[[nodiscard]] Eigen::VectorXd extract_features(const RgbImage& img, FeatureTag tag);

/// Options an Estimator can be fitted for: scalar, non-periodic, and with an image cue.
[[nodiscard]] bool is_estimable(OptionKey key);
[[nodiscard]] FeatureTag default_feature_tag(OptionKey key);

inline constexpr int kDefaultNeighbors = 5;

/// k-nearest-neighbor regressor over stored calibration features (one column each).
struct Estimator {
  OptionKey key = OptionKey::gamma;
  FeatureTag tag = FeatureTag::luminance_histogram_32;
  int k = kDefaultNeighbors;
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;

  [[nodiscard]] int size() const { return static_cast<int>(labels.size()); }
  friend bool operator==(const Estimator& a, const Estimator& b) {
    return a.key == b.key && a.tag == b.tag && a.k == b.k && a.features.rows() == b.features.rows() &&
           a.features.cols() == b.features.cols() && a.features == b.features && a.labels.size() == b.labels.size() &&
           a.labels == b.labels;
  }
};

/// Throws Error when there are fewer than k pairs, k < 1, a label is out of range,
/// or feature lengths disagree with the tag.
[[nodiscard]] Estimator fit(OptionKey key, FeatureTag tag, int k, Eigen::MatrixXd features, Eigen::VectorXd labels);
[[nodiscard]] Estimator fit(OptionKey key, const std::vector<std::pair<RgbImage, double>>& labeled, FeatureTag tag,
                            int k = kDefaultNeighbors);

/// Mean label of the k nearest calibration features (Euclidean; ties to the lower
/// index), clamped to the option range.
[[nodiscard]] double predict_features(const Estimator& est, const Eigen::VectorXd& feature);
[[nodiscard]] double predict(const Estimator& est, const RgbImage& img);

inline constexpr int kEstimatorFormatVersion = 1;

/// Text container:
///   tagforge-estimator 1
///   option <key> / extractor <tag> / k <k> / count <n> / dims <d>
///   n lines of "<label> <d feature values>"
///   end
void save_estimator(const Estimator& est, const std::string& path);
[[nodiscard]] std::string serialize_estimator(const Estimator& est);
/// Throws ParseError with the failing line.
[[nodiscard]] Estimator parse_estimator(std::string_view text);
[[nodiscard]] Estimator load_estimator(const std::string& path);

}  // namespace tagforge
