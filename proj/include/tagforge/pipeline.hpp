#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tagforge/bvh.hpp"
#include "tagforge/distribution.hpp"
#include "tagforge/error.hpp"
#include "tagforge/estimation.hpp"
#include "tagforge/image.hpp"
#include "tagforge/imageproc.hpp"
#include "tagforge/scene_model.hpp"

namespace tagforge {

/// A failure while producing images, as opposed to bad configuration.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class OptionMode { fixed, uniform, choice, profile };

[[nodiscard]] std::string_view mode_name(OptionMode mode);

struct OptionSpec {
  OptionMode mode = OptionMode::fixed;
  double value = 0.0;           // fixed
  double lo = 0.0, hi = 0.0;    // uniform
  std::vector<double> choices;  // choice

  [[nodiscard]] std::string to_string() const;  // "fixed 1", "uniform 0.8 1.2", ...
  friend bool operator==(const OptionSpec&, const OptionSpec&) = default;
};

/// Parsed generation config. Paths are stored as written and resolved against
/// `base_dir` (the config file's directory).
struct GenerationConfig {
  std::uint64_t seed = 1;
  int num_identities = 64;
  int images_per_identity = 8;
  int num_cameras = 6;
  std::string backgrounds;  // empty: plain gray
  std::string crop_manifest;
  double beta = kDefaultBeta;
  std::vector<std::string> poses{"stand", "walk_0", "walk_1", "walk_2", "walk_3"};
  std::string bvh;
  std::vector<int> bvh_frames;
  std::string bvh_joint_map = "cmu";
  std::string output = "out";
  /// Indexed by OptionKey. camera_id is always uniform over [1, num_cameras].
  std::array<OptionSpec, kOptionKeyCount> options = default_option_specs();
  std::string base_dir = ".";

  [[nodiscard]] OptionSpec& option(OptionKey k) { return options[static_cast<std::size_t>(k)]; }
  [[nodiscard]] const OptionSpec& option(OptionKey k) const { return options[static_cast<std::size_t>(k)]; }
  [[nodiscard]] std::string resolve(const std::string& path) const;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Every setting that affects image content, one per line (output dir excluded).
  [[nodiscard]] std::string canonical_text() const;
  [[nodiscard]] std::uint64_t hash() const;

  /// Fixed values equal to the RenderOptions defaults.
  static std::array<OptionSpec, kOptionKeyCount> default_option_specs();
};

/// Config text format:
///   key = value lines (seed, num_identities, images_per_identity, num_cameras,
///   backgrounds, crop_manifest, beta, poses, bvh, bvh_frames, bvh_joint_map, output)
///   followed by `[option <key>]` blocks holding `mode = fixed v | uniform lo hi |
///   choice v1 v2 ... | profile`. '#' starts a comment.
/// Throws ConfigError with the line number.
[[nodiscard]] GenerationConfig parse_config(std::string_view text, const std::string& base_dir = ".");
[[nodiscard]] GenerationConfig load_config(const std::string& path);

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Everything loaded once and shared read-only by workers.
struct GenerationContext {
  GenerationConfig config;
  BackgroundCorpus corpus;
  std::optional<TargetProfile> profile;
  std::vector<PoseRef> pose_set;
  std::map<std::string, Pose> pose_library;  // keyed by PoseRef::to_string()

  /// Loads corpus and BVH clip, checks that every profile-mode option has a profile
  /// entry. Throws ConfigError / Error.
  static GenerationContext create(GenerationConfig config, std::optional<TargetProfile> profile = std::nullopt);

  [[nodiscard]] const Pose& pose(const PoseRef& ref) const;
};

/// Per-image stream seed: hash(global seed, identity, index).
[[nodiscard]] std::uint64_t image_seed(std::uint64_t global_seed, int identity_id, int image_index);

/// Draws every option of one image from its own seeded sub-stream.
[[nodiscard]] RenderOptions resolve_options(const GenerationContext& ctx, int identity_id, int image_index);

/// composite -> color bias -> gamma -> resolution, in that order.
[[nodiscard]] RgbImage postprocess(const RgbImage& composited, const ColorBias& bias, double gamma, int working_height_px);

/// Full chain for one image at 128x256.
[[nodiscard]] RgbImage render_labeled_image(const GenerationContext& ctx, const PersonSpec& spec, const RenderOptions& opts);

[[nodiscard]] std::string market_file_name(int identity_id, int camera_id, int image_index);
struct MarketName {
  int identity_id = 0, camera_id = 0, image_index = 0;
  friend bool operator==(const MarketName&, const MarketName&) = default;
};
[[nodiscard]] std::optional<MarketName> parse_market_name(std::string_view file_name);

struct ManifestRecord {
  std::string file;
  int identity_id = 0;
  int image_index = 0;
  RenderOptions options;
  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::vector<ManifestRecord> records;

  [[nodiscard]] std::vector<double> column(OptionKey key) const;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

inline constexpr const char* kManifestFile = "manifest.csv";

/// Line 1: `#manifest v1 seed=<s> config_hash=<hex>`; line 2: column names
/// (file, identity_id, image_index, pose, background_ref, then every OptionKey);
/// then one record per line.
[[nodiscard]] std::string serialize_manifest(const DatasetManifest& m);
[[nodiscard]] DatasetManifest parse_manifest(std::string_view text);
[[nodiscard]] DatasetManifest load_manifest(const std::string& path);

[[nodiscard]] int default_workers();

/// Renders every (identity, image) pair into `out_dir` with `workers` threads and writes
/// the manifest last. Output is byte-identical for any worker count.
DatasetManifest generate_dataset(const GenerationContext& ctx, const std::string& out_dir, int workers);

// ---------------------------------------------------------------------------
// Calibration and target images
// ---------------------------------------------------------------------------

/// n renders with `key` swept linearly over [lo, hi] and every other option drawn from
/// the config; image i uses identity i + 1 under the config seed.
[[nodiscard]] std::vector<std::pair<RgbImage, double>> render_sweep(const GenerationContext& ctx, OptionKey key, int n,
                                                                    double lo, double hi, int workers);

/// Default sweep range: gamma [0.5, 2.0], depression [0, 60], otherwise the option range.
[[nodiscard]] std::pair<double, double> default_sweep_range(OptionKey key);

/// Sorted .png/.jpg/.jpeg files of a directory, converted to 128x256.
[[nodiscard]] std::vector<std::pair<std::string, RgbImage>> load_image_dir(const std::string& dir);

// ---------------------------------------------------------------------------
// Gamma variant
// ---------------------------------------------------------------------------

struct GammaVariantEntry {
  std::string file;
  std::optional<double> gamma;  // absent when skipped
  std::string status;           // "ok" or "skipped: <reason>"
};

inline constexpr const char* kGammaSidecarFile = "gamma_values.csv";

/// Re-encodes every image of `in_dir` as PNG in `out_dir` with a per-image gamma drawn
/// uniformly from [lo, hi]; unreadable images are skipped and recorded in the sidecar.
std::vector<GammaVariantEntry> make_gamma_variant(const std::string& in_dir, double lo, double hi, std::uint64_t seed,
                                                  const std::string& out_dir);

}  // namespace tagforge
