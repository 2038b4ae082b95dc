#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "tagforge/text.hpp"

namespace tagforge {

using Rgb = Eigen::Vector3f;

// ---------------------------------------------------------------------------
// Option keys
// ---------------------------------------------------------------------------

/// One key per scalar field of RenderOptions. Pose and background are not scalar
/// and have no key.
enum class OptionKey : int {
  camera_azimuth_deg = 0,
  camera_depression_deg,
  camera_distance_m,
  light_azimuth_deg,
  light_elevation_deg,
  light_intensity,
  ambient,
  camera_id,
  gamma,
  working_height_px,
};

inline constexpr int kOptionKeyCount = 10;

struct OptionInfo {
  OptionKey key;
  std::string_view name;
  double lo;
  double hi;
  bool integral;
  bool periodic;  // [lo, hi) wraps around, e.g. azimuths
};

inline constexpr std::array<OptionInfo, kOptionKeyCount> kOptionTable{{
    {OptionKey::camera_azimuth_deg, "camera_azimuth_deg", 0.0, 360.0, false, true},
    {OptionKey::camera_depression_deg, "camera_depression_deg", -10.0, 80.0, false, false},
    {OptionKey::camera_distance_m, "camera_distance_m", 2.0, 12.0, false, false},
    {OptionKey::light_azimuth_deg, "light_azimuth_deg", 0.0, 360.0, false, true},
    {OptionKey::light_elevation_deg, "light_elevation_deg", 0.0, 90.0, false, false},
    {OptionKey::light_intensity, "light_intensity", 0.3, 1.6, false, false},
    {OptionKey::ambient, "ambient", 0.1, 0.5, false, false},
    {OptionKey::camera_id, "camera_id", 1.0, 2147483647.0, true, false},
    {OptionKey::gamma, "gamma", 0.4, 2.5, false, false},
    {OptionKey::working_height_px, "working_height_px", 32.0, 256.0, true, false},
}};

namespace detail {
constexpr bool option_table_is_bijective() {
  for (int i = 0; i < kOptionKeyCount; ++i) {
    if (static_cast<int>(kOptionTable[i].key) != i) return false;
    for (int j = i + 1; j < kOptionKeyCount; ++j)
      if (kOptionTable[i].name == kOptionTable[j].name) return false;
  }
  return true;
}
}  // namespace detail
static_assert(detail::option_table_is_bijective(), "option table must list every key once, in enum order");

[[nodiscard]] constexpr const OptionInfo& option_info(OptionKey key) {
  return kOptionTable[static_cast<std::size_t>(key)];
}
[[nodiscard]] constexpr std::string_view option_name(OptionKey key) { return option_info(key).name; }

/// Throws ConfigError("unknown option key ...") for names outside the table.
[[nodiscard]] OptionKey parse_option_key(std::string_view name);
[[nodiscard]] std::optional<OptionKey> find_option_key(std::string_view name);

/// True when `value` lies in the declared range of `key` (half-open for periodic keys,
/// integer-valued for integral keys).
[[nodiscard]] bool option_in_range(OptionKey key, double value);

/// Clamps to the declared range; periodic keys are wrapped instead.
[[nodiscard]] double clamp_to_range(OptionKey key, double value);

// ---------------------------------------------------------------------------
// Pose
// ---------------------------------------------------------------------------

enum class Joint : int {
  pelvis = 0,
  spine,
  neck,
  head,
  l_shoulder,
  r_shoulder,
  l_elbow,
  r_elbow,
  l_hip,
  r_hip,
  l_knee,
  r_knee,
};

inline constexpr int kJointCount = 12;
inline constexpr std::array<std::string_view, kJointCount> kJointNames{
    "pelvis", "spine", "neck", "head", "l_shoulder", "r_shoulder",
    "l_elbow", "r_elbow", "l_hip", "r_hip", "l_knee", "r_knee"};

[[nodiscard]] constexpr std::string_view joint_name(Joint j) { return kJointNames[static_cast<std::size_t>(j)]; }
[[nodiscard]] std::optional<Joint> find_joint(std::string_view name);

/// Euler angles in degrees, applied as R = Rz * Rx * Ry.
struct EulerZXY {
  double z = 0.0;
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const EulerZXY&, const EulerZXY&) = default;
};

/// Joint rotations for the 12-joint humanoid, indexed by Joint. Complete by construction.
struct Pose {
  std::array<EulerZXY, kJointCount> rotations{};

  [[nodiscard]] EulerZXY& operator[](Joint j) { return rotations[static_cast<std::size_t>(j)]; }
  [[nodiscard]] const EulerZXY& operator[](Joint j) const { return rotations[static_cast<std::size_t>(j)]; }
  /// Finite and every magnitude <= 180 degrees.
  [[nodiscard]] bool valid() const;
  friend bool operator==(const Pose&, const Pose&) = default;
};

enum class BuiltinPose { t_pose, stand, walk_0, walk_1, walk_2, walk_3 };

inline constexpr std::array<std::string_view, 6> kBuiltinPoseNames{"t_pose", "stand", "walk_0",
                                                                   "walk_1", "walk_2", "walk_3"};

[[nodiscard]] Pose builtin_pose(BuiltinPose name);
/// Throws Error("unknown pose: <name>").
[[nodiscard]] Pose builtin_pose(std::string_view name);
[[nodiscard]] std::optional<BuiltinPose> find_builtin_pose(std::string_view name);

// ---------------------------------------------------------------------------
// Identity
// ---------------------------------------------------------------------------

enum class TorsoPattern { solid, stripes, checker };

[[nodiscard]] std::string_view pattern_name(TorsoPattern p);

struct PersonSpec {
  std::uint64_t identity_id = 0;
  std::uint64_t seed = 0;
  double stature_m = 1.75;
  double limb_scale = 1.0;
  double bulk_scale = 1.0;
  Rgb skin_rgb{0.80f, 0.62f, 0.50f};
  Rgb hair_rgb{0.15f, 0.10f, 0.07f};
  Rgb torso_rgb{0.20f, 0.35f, 0.70f};
  Rgb legs_rgb{0.25f, 0.25f, 0.30f};
  Rgb shoes_rgb{0.10f, 0.10f, 0.10f};
  TorsoPattern torso_pattern = TorsoPattern::solid;
  Rgb pattern_rgb{0.90f, 0.90f, 0.90f};
  double pattern_scale = 0.08;
  std::uint64_t texture_seed = 0;

  [[nodiscard]] bool valid() const;
  friend bool operator==(const PersonSpec&, const PersonSpec&) = default;
};

/// Pure map (seed, identity) -> appearance.
[[nodiscard]] PersonSpec derive_person_spec(std::uint64_t seed, std::uint64_t identity_id);

// ---------------------------------------------------------------------------
// Render options
// ---------------------------------------------------------------------------

/// A builtin pose name, or a frame of a BVH clip (`clip@frame`).
struct PoseRef {
  std::string source = "stand";
  int frame = -1;  // < 0 for builtin poses

  [[nodiscard]] bool is_builtin() const { return frame < 0; }
  [[nodiscard]] std::string to_string() const;
  static PoseRef parse(std::string_view text);
  friend bool operator==(const PoseRef&, const PoseRef&) = default;
};

/// Source image and crop rectangle of a background. An empty image id means a plain
/// gray background.
struct BackgroundRef {
  std::string image_id;
  int x = 0, y = 0, w = 0, h = 0;

  [[nodiscard]] bool is_plain() const { return image_id.empty(); }
  [[nodiscard]] std::string to_string() const;  // "id:x:y:w:h" or "none"
  static BackgroundRef parse(std::string_view text);
  friend bool operator==(const BackgroundRef&, const BackgroundRef&) = default;
};

struct RenderOptions {
  PoseRef pose;
  double camera_azimuth_deg = 0.0;
  double camera_depression_deg = 10.0;
  double camera_distance_m = 3.0;
  double light_azimuth_deg = 45.0;
  double light_elevation_deg = 45.0;
  double light_intensity = 1.0;
  double ambient = 0.3;
  BackgroundRef background_ref;
  int camera_id = 1;
  double gamma = 1.0;
  int working_height_px = 256;

  /// Throws ConfigError naming the first out-of-range field.
  void validate() const;
  friend bool operator==(const RenderOptions&, const RenderOptions&) = default;
};

[[nodiscard]] double get_option(const RenderOptions& opts, OptionKey key);
/// Integral keys are rounded to the nearest integer.
void set_option(RenderOptions& opts, OptionKey key, double value);

/// Key-value text form: one `key=value` per line, fields in declaration order.
[[nodiscard]] std::string to_text(const RenderOptions& opts);
[[nodiscard]] std::string to_text(const PersonSpec& spec);

/// Parses `key=value` pairs separated by newlines, ',' or ';'. Fields not mentioned
/// keep their value in `base`. Throws ConfigError naming an unknown or malformed field.
[[nodiscard]] RenderOptions parse_render_options(std::string_view text, RenderOptions base = {});
[[nodiscard]] PersonSpec parse_person_spec(std::string_view text);

}  // namespace tagforge
