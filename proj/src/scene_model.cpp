#include "tagforge/scene_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tagforge/error.hpp"
#include "tagforge/rng.hpp"

namespace tagforge {

// ---------------------------------------------------------------------------
// Option keys
// ---------------------------------------------------------------------------

std::optional<OptionKey> find_option_key(std::string_view name) {
  for (const auto& info : kOptionTable)
    if (info.name == name) return info.key;
  return std::nullopt;
}

OptionKey parse_option_key(std::string_view name) {
  if (const auto key = find_option_key(name)) return *key;
  throw ConfigError("unknown option key: " + std::string(name));
}

bool option_in_range(OptionKey key, double value) {
  const auto& info = option_info(key);
  if (!std::isfinite(value)) return false;
  if (info.integral && value != std::round(value)) return false;
  if (info.periodic) return value >= info.lo && value < info.hi;
  return value >= info.lo && value <= info.hi;
}

double clamp_to_range(OptionKey key, double value) {
  const auto& info = option_info(key);
  if (info.periodic) {
    const double span = info.hi - info.lo;
    double d = std::fmod(value - info.lo, span);
    if (d < 0) d += span;
    if (d >= span) d = 0;
    return info.lo + d;
  }
  return std::clamp(value, info.lo, info.hi);
}

// ---------------------------------------------------------------------------
// Pose
// ---------------------------------------------------------------------------

std::optional<Joint> find_joint(std::string_view name) {
  for (int i = 0; i < kJointCount; ++i)
    if (kJointNames[i] == name) return static_cast<Joint>(i);
  return std::nullopt;
}

bool Pose::valid() const {
  return std::all_of(rotations.begin(), rotations.end(), [](const EulerZXY& e) {
    for (const double a : {e.z, e.x, e.y})
      if (!std::isfinite(a) || std::abs(a) > 180.0) return false;
    return true;
  });
}

namespace {

// Arms hang along -y at zero rotation; +z rotation of the left shoulder raises the
// arm sideways, negative x rotation swings a limb forward (+z), positive knee x
// rotation flexes the shin backward.
Pose stand_pose() {
  Pose p;
  p[Joint::l_shoulder] = {6.0, 0.0, 0.0};
  p[Joint::r_shoulder] = {-6.0, 0.0, 0.0};
  p[Joint::l_elbow] = {0.0, -8.0, 0.0};
  p[Joint::r_elbow] = {0.0, -8.0, 0.0};
  return p;
}

// Contact phase: left leg leading. Arms swing against the legs.
Pose walk_contact(bool left_leads) {
  Pose p = stand_pose();
  const double s = left_leads ? 1.0 : -1.0;
  const Joint lead_hip = left_leads ? Joint::l_hip : Joint::r_hip;
  const Joint trail_hip = left_leads ? Joint::r_hip : Joint::l_hip;
  const Joint lead_knee = left_leads ? Joint::l_knee : Joint::r_knee;
  const Joint trail_knee = left_leads ? Joint::r_knee : Joint::l_knee;
  p[lead_hip].x = -24.0;
  p[trail_hip].x = 18.0;
  p[lead_knee].x = 4.0;
  p[trail_knee].x = 14.0;
  p[Joint::l_shoulder].x = 16.0 * s;
  p[Joint::r_shoulder].x = -16.0 * s;
  p[left_leads ? Joint::r_elbow : Joint::l_elbow].x = -22.0;
  p[Joint::pelvis].y = 5.0 * s;
  p[Joint::spine].y = -4.0 * s;
  return p;
}

// Passing phase: stance leg vertical, swing leg folded under the body.
Pose walk_passing(bool left_stance) {
  Pose p = stand_pose();
  const Joint stance_hip = left_stance ? Joint::l_hip : Joint::r_hip;
  const Joint swing_hip = left_stance ? Joint::r_hip : Joint::l_hip;
  const Joint swing_knee = left_stance ? Joint::r_knee : Joint::l_knee;
  p[stance_hip].x = 2.0;
  p[swing_hip].x = -12.0;
  p[swing_knee].x = 38.0;
  p[Joint::l_elbow].x = -12.0;
  p[Joint::r_elbow].x = -12.0;
  return p;
}

}  // namespace

Pose builtin_pose(BuiltinPose name) {
  switch (name) {
    case BuiltinPose::t_pose: {
      Pose p;
      p[Joint::l_shoulder].z = 90.0;
      p[Joint::r_shoulder].z = -90.0;
      return p;
    }
    case BuiltinPose::stand: return stand_pose();
    case BuiltinPose::walk_0: return walk_contact(true);
    case BuiltinPose::walk_1: return walk_passing(true);
    case BuiltinPose::walk_2: return walk_contact(false);
    case BuiltinPose::walk_3: return walk_passing(false);
  }
  throw Error("unknown pose");
}

std::optional<BuiltinPose> find_builtin_pose(std::string_view name) {
  for (std::size_t i = 0; i < kBuiltinPoseNames.size(); ++i)
    if (kBuiltinPoseNames[i] == name) return static_cast<BuiltinPose>(i);
  return std::nullopt;
}

Pose builtin_pose(std::string_view name) {
  if (const auto p = find_builtin_pose(name)) return builtin_pose(*p);
  throw Error("unknown pose: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Identity
// ---------------------------------------------------------------------------

std::string_view pattern_name(TorsoPattern p) {
  switch (p) {
    case TorsoPattern::solid: return "solid";
    case TorsoPattern::stripes: return "stripes";
    case TorsoPattern::checker: return "checker";
  }
  return "solid";
}

namespace {

bool rgb_in_unit_cube(const Rgb& c) {
  return c.allFinite() && (c.array() >= 0.0f).all() && (c.array() <= 1.0f).all();
}

Rgb random_rgb(Rng& rng, double lo, double hi) {
  Rgb c;
  for (int i = 0; i < 3; ++i) c[i] = static_cast<float>(rng.uniform(lo, hi));
  return c;
}

}  // namespace

bool PersonSpec::valid() const {
  return stature_m >= 1.45 && stature_m <= 1.95 && limb_scale >= 0.85 && limb_scale <= 1.15 &&
         bulk_scale >= 0.85 && bulk_scale <= 1.2 && rgb_in_unit_cube(skin_rgb) &&
         rgb_in_unit_cube(hair_rgb) && rgb_in_unit_cube(torso_rgb) && rgb_in_unit_cube(legs_rgb) &&
         rgb_in_unit_cube(shoes_rgb) && rgb_in_unit_cube(pattern_rgb) && pattern_scale > 0.0;
}

PersonSpec derive_person_spec(std::uint64_t seed, std::uint64_t identity_id) {
  Rng rng(hash_words({seed, identity_id, hash_text("person")}));
  PersonSpec s;
  s.identity_id = identity_id;
  s.seed = seed;
  s.stature_m = rng.uniform(1.50, 1.92);
  s.limb_scale = rng.uniform(0.90, 1.10);
  s.bulk_scale = rng.uniform(0.88, 1.16);

  const Rgb light_skin{0.95f, 0.80f, 0.68f};
  const Rgb dark_skin{0.36f, 0.23f, 0.16f};
  const float tone = static_cast<float>(rng.uniform01());
  s.skin_rgb = light_skin + tone * (dark_skin - light_skin);

  const Rgb hair_dark{0.05f, 0.04f, 0.03f};
  const Rgb hair_light{0.62f, 0.48f, 0.30f};
  const float shade = static_cast<float>(std::pow(rng.uniform01(), 2.0));
  s.hair_rgb = hair_dark + shade * (hair_light - hair_dark);

  s.torso_rgb = random_rgb(rng, 0.04, 0.96);
  s.legs_rgb = random_rgb(rng, 0.04, 0.96);
  s.shoes_rgb = random_rgb(rng, 0.02, 0.6);
  s.torso_pattern = static_cast<TorsoPattern>(rng.index(3));
  s.pattern_rgb = random_rgb(rng, 0.04, 0.96);
  s.pattern_scale = rng.uniform(0.05, 0.14);
  s.texture_seed = rng.next_u64();
  return s;
}

// ---------------------------------------------------------------------------
// Render options
// ---------------------------------------------------------------------------

std::string PoseRef::to_string() const {
  if (is_builtin()) return source;
  return source + "@" + std::to_string(frame);
}

PoseRef PoseRef::parse(std::string_view text) {
  text = trim(text);
  PoseRef ref;
  const auto at = text.rfind('@');
  if (at == std::string_view::npos) {
    if (text.empty()) throw ConfigError("empty pose reference");
    ref.source = std::string(text);
    ref.frame = -1;
    return ref;
  }
  const auto frame = parse_int(text.substr(at + 1));
  if (!frame || *frame < 0 || at == 0) throw ConfigError("malformed pose reference: " + std::string(text));
  ref.source = std::string(text.substr(0, at));
  ref.frame = static_cast<int>(*frame);
  return ref;
}

std::string BackgroundRef::to_string() const {
  if (is_plain()) return "none";
  return image_id + ":" + std::to_string(x) + ":" + std::to_string(y) + ":" + std::to_string(w) + ":" +
         std::to_string(h);
}

BackgroundRef BackgroundRef::parse(std::string_view text) {
  text = trim(text);
  if (text == "none") return {};
  BackgroundRef ref;
  std::array<int, 4> rect{};
  std::string_view rest = text;
  for (int i = 3; i >= 0; --i) {
    const auto colon = rest.rfind(':');
    if (colon == std::string_view::npos) throw ConfigError("malformed background reference: " + std::string(text));
    const auto v = parse_int(rest.substr(colon + 1));
    if (!v || *v < 0) throw ConfigError("malformed background reference: " + std::string(text));
    rect[static_cast<std::size_t>(i)] = static_cast<int>(*v);
    rest = rest.substr(0, colon);
  }
  if (rest.empty()) throw ConfigError("malformed background reference: " + std::string(text));
  ref.image_id = std::string(rest);
  ref.x = rect[0];
  ref.y = rect[1];
  ref.w = rect[2];
  ref.h = rect[3];
  return ref;
}

double get_option(const RenderOptions& o, OptionKey key) {
  switch (key) {
    case OptionKey::camera_azimuth_deg: return o.camera_azimuth_deg;
    case OptionKey::camera_depression_deg: return o.camera_depression_deg;
    case OptionKey::camera_distance_m: return o.camera_distance_m;
    case OptionKey::light_azimuth_deg: return o.light_azimuth_deg;
    case OptionKey::light_elevation_deg: return o.light_elevation_deg;
    case OptionKey::light_intensity: return o.light_intensity;
    case OptionKey::ambient: return o.ambient;
    case OptionKey::camera_id: return o.camera_id;
    case OptionKey::gamma: return o.gamma;
    case OptionKey::working_height_px: return o.working_height_px;
  }
  return 0.0;
}

void set_option(RenderOptions& o, OptionKey key, double v) {
  switch (key) {
    case OptionKey::camera_azimuth_deg: o.camera_azimuth_deg = v; return;
    case OptionKey::camera_depression_deg: o.camera_depression_deg = v; return;
    case OptionKey::camera_distance_m: o.camera_distance_m = v; return;
    case OptionKey::light_azimuth_deg: o.light_azimuth_deg = v; return;
    case OptionKey::light_elevation_deg: o.light_elevation_deg = v; return;
    case OptionKey::light_intensity: o.light_intensity = v; return;
    case OptionKey::ambient: o.ambient = v; return;
    case OptionKey::camera_id: o.camera_id = static_cast<int>(std::lround(v)); return;
    case OptionKey::gamma: o.gamma = v; return;
    case OptionKey::working_height_px: o.working_height_px = static_cast<int>(std::lround(v)); return;
  }
}

void RenderOptions::validate() const {
  for (const auto& info : kOptionTable) {
    const double v = get_option(*this, info.key);
    if (!option_in_range(info.key, v))
      throw ConfigError("option " + std::string(info.name) + " out of range: " + format_double(v));
  }
  if (pose.source.empty()) throw ConfigError("option pose is empty");
  if (!background_ref.is_plain() && (background_ref.w <= 0 || background_ref.h <= 0))
    throw ConfigError("option background_ref has an empty crop");
}

std::string to_text(const RenderOptions& o) {
  std::ostringstream out;
  out << "pose=" << o.pose.to_string() << '\n';
  for (const auto& info : kOptionTable) {
    if (info.key == OptionKey::camera_id) out << "background_ref=" << o.background_ref.to_string() << '\n';
    out << info.name << '=' << format_double(get_option(o, info.key)) << '\n';
  }
  return out.str();
}

RenderOptions parse_render_options(std::string_view text, RenderOptions base) {
  for (const auto field : split_fields(text, "\n,;")) {
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) throw ConfigError("malformed option field: " + std::string(field));
    const auto name = trim(field.substr(0, eq));
    const auto value = trim(field.substr(eq + 1));
    if (name == "pose") {
      base.pose = PoseRef::parse(value);
    } else if (name == "background_ref") {
      base.background_ref = BackgroundRef::parse(value);
    } else if (const auto key = find_option_key(name)) {
      const auto v = parse_double(value);
      if (!v) throw ConfigError("malformed value for option " + std::string(name) + ": " + std::string(value));
      set_option(base, *key, *v);
    } else {
      throw ConfigError("unknown option field: " + std::string(name));
    }
  }
  return base;
}

namespace {

std::string rgb_text(const Rgb& c) {
  return format_double(c[0]) + " " + format_double(c[1]) + " " + format_double(c[2]);
}

Rgb parse_rgb(std::string_view name, std::string_view value) {
  const auto parts = split_fields(value, " \t");
  Rgb c;
  if (parts.size() != 3) throw ConfigError("field " + std::string(name) + " needs three components");
  for (int i = 0; i < 3; ++i) {
    const auto v = parse_double(parts[static_cast<std::size_t>(i)]);
    if (!v) throw ConfigError("malformed value for field " + std::string(name));
    c[i] = static_cast<float>(*v);
  }
  return c;
}

}  // namespace

std::string to_text(const PersonSpec& s) {
  std::ostringstream out;
  out << "identity_id=" << s.identity_id << '\n'
      << "seed=" << s.seed << '\n'
      << "stature_m=" << format_double(s.stature_m) << '\n'
      << "limb_scale=" << format_double(s.limb_scale) << '\n'
      << "bulk_scale=" << format_double(s.bulk_scale) << '\n'
      << "skin_rgb=" << rgb_text(s.skin_rgb) << '\n'
      << "hair_rgb=" << rgb_text(s.hair_rgb) << '\n'
      << "torso_rgb=" << rgb_text(s.torso_rgb) << '\n'
      << "legs_rgb=" << rgb_text(s.legs_rgb) << '\n'
      << "shoes_rgb=" << rgb_text(s.shoes_rgb) << '\n'
      << "torso_pattern=" << pattern_name(s.torso_pattern) << '\n'
      << "pattern_rgb=" << rgb_text(s.pattern_rgb) << '\n'
      << "pattern_scale=" << format_double(s.pattern_scale) << '\n'
      << "texture_seed=" << s.texture_seed << '\n';
  return out.str();
}

PersonSpec parse_person_spec(std::string_view text) {
  PersonSpec s;
  for (const auto line : split_fields(text, "\n")) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("malformed person field: " + std::string(line));
    const auto name = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    auto real = [&] {
      const auto v = parse_double(value);
      if (!v) throw ConfigError("malformed value for field " + std::string(name));
      return *v;
    };
    auto u64 = [&] {
      const auto v = parse_u64(value);
      if (!v) throw ConfigError("malformed value for field " + std::string(name));
      return static_cast<std::uint64_t>(*v);
    };
    if (name == "identity_id") s.identity_id = u64();
    else if (name == "seed") s.seed = u64();
    else if (name == "stature_m") s.stature_m = real();
    else if (name == "limb_scale") s.limb_scale = real();
    else if (name == "bulk_scale") s.bulk_scale = real();
    else if (name == "skin_rgb") s.skin_rgb = parse_rgb(name, value);
    else if (name == "hair_rgb") s.hair_rgb = parse_rgb(name, value);
    else if (name == "torso_rgb") s.torso_rgb = parse_rgb(name, value);
    else if (name == "legs_rgb") s.legs_rgb = parse_rgb(name, value);
    else if (name == "shoes_rgb") s.shoes_rgb = parse_rgb(name, value);
    else if (name == "pattern_rgb") s.pattern_rgb = parse_rgb(name, value);
    else if (name == "pattern_scale") s.pattern_scale = real();
    else if (name == "texture_seed") s.texture_seed = u64();
    else if (name == "torso_pattern") {
      if (value == "solid") s.torso_pattern = TorsoPattern::solid;
      else if (value == "stripes") s.torso_pattern = TorsoPattern::stripes;
      else if (value == "checker") s.torso_pattern = TorsoPattern::checker;
      else throw ConfigError("unknown torso_pattern: " + std::string(value));
    } else {
      throw ConfigError("unknown person field: " + std::string(name));
    }
  }
  return s;
}

}  // namespace tagforge
