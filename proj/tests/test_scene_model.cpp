#include <cmath>
#include <set>

#include "doctest.h"
#include "tagforge/error.hpp"
#include "tagforge/rng.hpp"
#include "tagforge/scene_model.hpp"

using namespace tagforge;

namespace {

float max_color_delta(const PersonSpec& a, const PersonSpec& b) {
  float d = 0.0f;
  for (const auto& [x, y] : {std::pair{a.skin_rgb, b.skin_rgb}, {a.hair_rgb, b.hair_rgb}, {a.torso_rgb, b.torso_rgb},
                             {a.legs_rgb, b.legs_rgb}, {a.shoes_rgb, b.shoes_rgb}})
    d = std::max(d, (x - y).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace

TEST_CASE("derive_person_spec is deterministic and in range") {
  CHECK(derive_person_spec(42, 7) == derive_person_spec(42, 7));
  CHECK(to_text(derive_person_spec(42, 7)) == to_text(derive_person_spec(42, 7)));

  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const auto seed = rng.next_u64();
    const auto id = rng.index(1u << 20);
    const auto a = derive_person_spec(seed, id);
    CHECK(a == derive_person_spec(seed, id));
    REQUIRE(a.valid());
    CHECK(a.stature_m >= 1.45);
    CHECK(a.stature_m <= 1.95);
    CHECK(a.limb_scale >= 0.85);
    CHECK(a.limb_scale <= 1.15);
    CHECK(a.bulk_scale >= 0.85);
    CHECK(a.bulk_scale <= 1.2);
  }
}

TEST_CASE("distinct identities differ in color") {
  CHECK(max_color_delta(derive_person_spec(42, 7), derive_person_spec(42, 8)) > 0.05f);
  CHECK_FALSE(derive_person_spec(42, 7) == derive_person_spec(43, 7));
  int similar = 0, similar_seed = 0;
  for (std::uint64_t id = 0; id < 10000; ++id) {
    if (max_color_delta(derive_person_spec(42, id), derive_person_spec(42, id + 1)) <= 0.05f) ++similar;
    if (max_color_delta(derive_person_spec(42, id), derive_person_spec(43, id)) <= 0.05f) ++similar_seed;
  }
  CHECK(similar <= 10);
  CHECK(similar_seed <= 10);
}

TEST_CASE("option keys map one to one onto RenderOptions fields") {
  std::set<std::string_view> names;
  RenderOptions opts;
  for (int i = 0; i < kOptionKeyCount; ++i) {
    const auto key = static_cast<OptionKey>(i);
    CHECK(parse_option_key(option_name(key)) == key);
    names.insert(option_name(key));
    // Writing one field must not disturb any other.
    RenderOptions probe;
    const double v = option_info(key).integral ? option_info(key).lo + 1 : (option_info(key).lo + option_info(key).hi) / 2;
    set_option(probe, key, v);
    CHECK(get_option(probe, key) == doctest::Approx(v));
    for (int j = 0; j < kOptionKeyCount; ++j) {
      if (j == i) continue;
      CHECK(get_option(probe, static_cast<OptionKey>(j)) == get_option(opts, static_cast<OptionKey>(j)));
    }
  }
  CHECK(names.size() == static_cast<std::size_t>(kOptionKeyCount));
  CHECK_THROWS_AS((void)parse_option_key("background_ref"), ConfigError);
}

TEST_CASE("builtin poses") {
  const Pose t = builtin_pose("t_pose");
  for (int j = 0; j < kJointCount; ++j) {
    const auto joint = static_cast<Joint>(j);
    if (joint == Joint::l_shoulder || joint == Joint::r_shoulder) continue;
    CHECK(t[joint] == EulerZXY{});
  }
  CHECK(t[Joint::l_shoulder].z == 90.0);
  CHECK(t[Joint::r_shoulder].z == -90.0);

  const Pose stand = builtin_pose(BuiltinPose::stand);
  CHECK(std::abs(stand[Joint::l_shoulder].z) < 15.0);
  CHECK(std::abs(stand[Joint::r_shoulder].z) < 15.0);

  const Pose w0 = builtin_pose("walk_0"), w2 = builtin_pose("walk_2");
  CHECK(w0[Joint::l_hip].x * w2[Joint::l_hip].x < 0.0);
  CHECK(w0[Joint::r_hip].x * w2[Joint::r_hip].x < 0.0);

  for (const auto name : kBuiltinPoseNames) CHECK(builtin_pose(name).valid());
  CHECK_THROWS_WITH_AS((void)builtin_pose("moonwalk"), doctest::Contains("unknown pose"), Error);
}

TEST_CASE("RenderOptions text round trip") {
  RenderOptions o;
  o.pose = PoseRef::parse("walk.bvh@12");
  o.camera_azimuth_deg = 123.456789012345;
  o.camera_depression_deg = 33.3;
  o.gamma = 1.0 / 3.0 + 1.0;
  o.background_ref = BackgroundRef::parse("street:7.png:1:2:30:40");
  o.camera_id = 5;
  o.working_height_px = 77;
  const RenderOptions back = parse_render_options(to_text(o));
  CHECK(back == o);
  CHECK(back.background_ref.image_id == "street:7.png");
  CHECK(parse_render_options("gamma=2,camera_id=3").gamma == 2.0);
  CHECK_THROWS_WITH_AS((void)parse_render_options("gama=2"), doctest::Contains("gama"), ConfigError);
  CHECK_THROWS_WITH_AS((void)parse_render_options("gamma=abc"), doctest::Contains("gamma"), ConfigError);
}

TEST_CASE("RenderOptions validation names the field") {
  RenderOptions o;
  CHECK_NOTHROW(o.validate());
  o.camera_depression_deg = 85.0;
  CHECK_THROWS_WITH_AS(o.validate(), doctest::Contains("camera_depression_deg"), ConfigError);
}

TEST_CASE("PersonSpec text round trip") {
  const auto s = derive_person_spec(9, 11);
  CHECK(parse_person_spec(to_text(s)) == s);
}

TEST_CASE("option ranges") {
  CHECK(option_in_range(OptionKey::camera_azimuth_deg, 0.0));
  CHECK_FALSE(option_in_range(OptionKey::camera_azimuth_deg, 360.0));
  CHECK(clamp_to_range(OptionKey::camera_azimuth_deg, 370.0) == doctest::Approx(10.0));
  CHECK(clamp_to_range(OptionKey::gamma, 3.0) == 2.5);
  CHECK_FALSE(option_in_range(OptionKey::working_height_px, 40.5));
}
