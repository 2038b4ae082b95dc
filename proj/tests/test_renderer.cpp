#include <cmath>

#include "doctest.h"
#include "tagforge/error.hpp"
#include "tagforge/mesh.hpp"
#include "tagforge/renderer.hpp"

using namespace tagforge;

namespace {

constexpr int kW = 128, kH = 256;

struct AlphaBox {
  int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1;
  [[nodiscard]] int height() const { return y1 - y0 + 1; }
};

AlphaBox alpha_box(const ImageBuffer& img) {
  AlphaBox b;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (img.at(x, y, 3) > 0.0f) {
        b.x0 = std::min(b.x0, x);
        b.x1 = std::max(b.x1, x);
        b.y0 = std::min(b.y0, y);
        b.y1 = std::max(b.y1, y);
      }
  return b;
}

Mesh stand_mesh() { return build_mesh(PersonSpec{}, builtin_pose(BuiltinPose::stand)); }

}  // namespace

TEST_CASE("build_mesh geometry") {
  const PersonSpec spec;
  const Mesh stand = stand_mesh();
  REQUIRE(stand.valid());
  const auto box = stand.bounds();
  CHECK(box.min().y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(box.sizes().y() - spec.stature_m) <= 0.02 * spec.stature_m);
  CHECK(stand == stand_mesh());

  // Arms straight out: shoulder offset + upper arm + forearm + hand cap, per side.
  const Mesh t = build_mesh(spec, builtin_pose(BuiltinPose::t_pose));
  const double h = spec.stature_m;
  const double expected = 2.0 * (0.105 * h + 0.17 * h + 0.20 * h + 0.023 * h);
  CHECK(t.bounds().sizes().x() == doctest::Approx(expected).epsilon(1e-9));
  CHECK(t.bounds().sizes().x() > stand.bounds().sizes().x() * 2.0);

  for (const auto name : kBuiltinPoseNames) {
    const Mesh m = build_mesh(derive_person_spec(5, 3), builtin_pose(name));
    CHECK(m.valid());
    CHECK(m.bounds().min().y() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("level frontal render is vertically centered") {
  RenderOptions o;
  o.camera_depression_deg = 0.0;
  o.camera_azimuth_deg = 0.0;
  const auto img = render(stand_mesh(), o, kW, kH);
  const auto b = alpha_box(img);
  const double center = (b.y0 + b.y1 + 1) / 2.0;
  CHECK(std::abs(center - kH / 2.0) <= 0.05 * kH);
}

TEST_CASE("channels stay in range and alpha is binary") {
  RenderOptions o;
  o.light_intensity = 1.6;
  o.ambient = 0.5;
  const auto img = render(build_mesh(derive_person_spec(1, 2), builtin_pose(BuiltinPose::walk_1)), o, kW, kH);
  CHECK((img.pixels() >= 0.0f).all());
  CHECK((img.pixels() <= 1.0f).all());
  const auto alpha = img.pixels().col(3);
  CHECK(((alpha == 0.0f) || (alpha == 1.0f)).all());
}

TEST_CASE("mirrored azimuths give mirrored images") {
  const Mesh mesh = build_mesh(derive_person_spec(3, 4), builtin_pose(BuiltinPose::stand));
  for (const double phi : {20.0, 75.0, 130.0}) {
    RenderOptions a;
    a.light_elevation_deg = 90.0;
    a.camera_depression_deg = 15.0;
    a.camera_azimuth_deg = phi;
    RenderOptions b = a;
    b.camera_azimuth_deg = 360.0 - phi;
    const auto ia = render(mesh, a, kW, kH), ib = render(mesh, b, kW, kH);
    int mismatched = 0;
    for (int y = 0; y < kH; ++y)
      for (int x = 0; x < kW; ++x)
        if (!(ia.pixel(x, y) == ib.pixel(kW - 1 - x, y)).all()) ++mismatched;
    CHECK(mismatched == 0);
  }
}

TEST_CASE("ambient-only shading") {
  PersonSpec spec;
  const Rgb c{0.6f, 0.4f, 0.2f};
  spec.skin_rgb = spec.hair_rgb = spec.torso_rgb = spec.legs_rgb = spec.shoes_rgb = spec.pattern_rgb = c;
  RenderOptions o;
  o.ambient = 0.3;
  o.light_intensity = 0.0;
  const auto img = render(build_mesh(spec, builtin_pose(BuiltinPose::stand)), o, kW, kH);
  const Eigen::Vector3f want = (c.cast<double>() * 0.3).cast<float>();
  int covered = 0;
  for (int y = 0; y < kH; ++y)
    for (int x = 0; x < kW; ++x) {
      if (img.at(x, y, 3) == 0.0f) continue;
      ++covered;
      CHECK(img.at(x, y, 0) == want.x());
      CHECK(img.at(x, y, 1) == want.y());
      CHECK(img.at(x, y, 2) == want.z());
    }
  CHECK(covered > 500);
}

TEST_CASE("silhouette height shrinks as the camera looks further down") {
  const Mesh mesh = stand_mesh();
  int previous = 1 << 30;
  for (const double t : {0.0, 15.0, 30.0, 45.0, 60.0}) {
    RenderOptions o;
    o.camera_depression_deg = t;
    const int h = alpha_box(render(mesh, o, kW, kH)).height();
    CHECK(h <= previous);
    previous = h;
  }
}

TEST_CASE("silhouette height barely depends on azimuth") {
  const Mesh mesh = stand_mesh();
  RenderOptions a, b;
  b.camera_azimuth_deg = 90.0;
  const double ha = alpha_box(render(mesh, a, kW, kH)).height();
  const double hb = alpha_box(render(mesh, b, kW, kH)).height();
  CHECK(std::abs(ha - hb) / ha < 0.10);
}

TEST_CASE("render is deterministic") {
  const Mesh mesh = stand_mesh();
  RenderOptions o;
  o.camera_azimuth_deg = 33.0;
  CHECK(render(mesh, o, kW, kH) == render(mesh, o, kW, kH));
}

TEST_CASE("subject out of frame") {
  Mesh far;
  far.positions.resize(3, 6);
  far.positions << -100, -99, -100, 100, 99, 100,
                   0, 0, 1, 0, 0, 1,
                   0, 0, 0, 0, 0, 0;
  far.normals = Eigen::Matrix3Xd::Zero(3, 6);
  far.normals.row(2).setOnes();
  far.triangles.resize(3, 2);
  far.triangles << 0, 3, 1, 4, 2, 5;
  far.colors = Eigen::Matrix3Xf::Ones(3, 2);
  CHECK_THROWS_WITH_AS((void)render(far, RenderOptions{}, kW, kH), "subject out of frame", Error);
  CHECK_THROWS_AS((void)render(stand_mesh(), RenderOptions{}, 8, 8), Error);
}
