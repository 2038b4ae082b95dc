#include "tagforge/mesh.hpp"

#include <cmath>
#include <functional>
#include <vector>

#include "tagforge/angles.hpp"
#include "tagforge/rng.hpp"

namespace tagforge {

namespace {

using Vec3 = Eigen::Vector3d;

/// Body dimensions in meters derived from a PersonSpec. The head top always lands at
/// stature_m in an upright pose; limb_scale trades leg length against torso length.
struct Proportions {
  double thigh, shin, r_thigh, r_shin;
  double hip_half, hip_drop;
  double pelvis_y, spine_offset, torso_len;
  double neck_len, r_neck, r_head;
  double shoulder_half, shoulder_drop;
  double upper_arm, forearm, r_upper_arm, r_forearm;
  double torso_width, torso_depth, pelvis_width, pelvis_depth;

  explicit Proportions(const PersonSpec& s) {
    const double h = s.stature_m, b = s.bulk_scale, l = s.limb_scale;
    const double leg_scale = 1.0 + 0.5 * (l - 1.0);
    thigh = 0.245 * h * leg_scale;
    shin = 0.235 * h * leg_scale;
    r_thigh = 0.040 * h * b;
    r_shin = 0.026 * h * b;
    hip_half = 0.052 * h * b;
    hip_drop = 0.040 * h;
    pelvis_y = thigh + shin + r_shin + hip_drop;
    spine_offset = 0.020 * h;
    r_head = 0.062 * h;
    neck_len = 0.045 * h;
    r_neck = 0.022 * h;
    torso_len = (h - 2.0 * r_head - neck_len) - pelvis_y - spine_offset;
    shoulder_half = 0.105 * h * b;
    shoulder_drop = 0.035 * h;
    upper_arm = 0.170 * h * l;
    forearm = 0.200 * h * l;
    r_upper_arm = 0.028 * h * b;
    r_forearm = 0.023 * h * b;
    torso_width = 2.0 * shoulder_half * 0.92;
    torso_depth = 0.110 * h * b;
    pelvis_width = 2.0 * (hip_half + r_thigh) * 0.95;
    pelvis_depth = 0.100 * h * b;
  }
};

/// Geometry of one body part in its joint's local frame, before coloring.
struct Part {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  std::vector<Eigen::Vector3i> triangles;

  int add_vertex(const Vec3& p, const Vec3& n) {
    positions.push_back(p);
    normals.push_back(n);
    return static_cast<int>(positions.size()) - 1;
  }

  void add_triangle(int a, int b, int c) {
    const Vec3 e = (positions[static_cast<std::size_t>(b)] - positions[static_cast<std::size_t>(a)])
                       .cross(positions[static_cast<std::size_t>(c)] - positions[static_cast<std::size_t>(a)]);
    if (e.squaredNorm() > 1e-20) triangles.emplace_back(a, b, c);
  }

  /// Every triangle gains a twin reflected through x = 0, with the same vertex order.
  void append_mirror() {
    const auto n_tri = triangles.size();
    const auto base = static_cast<int>(positions.size());
    const auto n_vert = positions.size();
    for (std::size_t i = 0; i < n_vert; ++i) {
      const Vec3 p = positions[i], n = normals[i];
      add_vertex({-p.x(), p.y(), p.z()}, {-n.x(), n.y(), n.z()});
    }
    for (std::size_t t = 0; t < n_tri; ++t) {
      const auto tri = triangles[t];
      triangles.emplace_back(tri[0] + base, tri[1] + base, tri[2] + base);
    }
  }

  [[nodiscard]] Part mirrored() const {
    Part m = *this;
    for (auto& p : m.positions) p.x() = -p.x();
    for (auto& n : m.normals) n.x() = -n.x();
    return m;
  }
};

/// Unit-sphere direction at latitude/longitude in degrees; longitude 0 faces +z,
/// 90 faces +x.
Vec3 sphere_dir(double lat, double lon) {
  const double c = cos_deg(lat);
  return {c * sin_deg(lon), sin_deg(lat), c * cos_deg(lon)};
}

/// Lat/long sphere, `half` restricts to x >= 0 longitudes (mirror completes it).
Part sphere(const Vec3& center, double radius, int segments, int rings, bool half) {
  Part part;
  const int seg_end = half ? segments / 2 : segments;
  auto vertex = [&](int i, int j) {
    const Vec3 d = sphere_dir(-90.0 + 180.0 * i / rings, 360.0 * j / segments);
    return part.add_vertex(center + radius * d, d);
  };
  for (int i = 0; i < rings; ++i) {
    for (int j = 0; j < seg_end; ++j) {
      const int a = vertex(i, j), b = vertex(i + 1, j), c = vertex(i + 1, j + 1), d = vertex(i, j + 1);
      part.add_triangle(a, b, c);
      part.add_triangle(a, c, d);
    }
  }
  return part;
}

/// Capsule hanging from the local origin along -y: cylinder of `length` with
/// hemispherical caps of `radius` at both ends. `half` as for sphere().
Part capsule(double length, double radius, int segments, int cap_rings, bool half = false) {
  Part part;
  // Latitudes from the bottom pole to the top pole; the cylinder is the gap between
  // the two equators.
  struct Ring {
    double lat;
    double y_center;
  };
  std::vector<Ring> profile;
  for (int i = 0; i <= cap_rings; ++i) profile.push_back({-90.0 + 90.0 * i / cap_rings, -length});
  for (int i = 0; i <= cap_rings; ++i) profile.push_back({90.0 * i / cap_rings, 0.0});

  auto vertex = [&](const Ring& r, int j) {
    const Vec3 d = sphere_dir(r.lat, 360.0 * j / segments);
    return part.add_vertex(Vec3(0.0, r.y_center, 0.0) + radius * d, d);
  };
  const int seg_end = half ? segments / 2 : segments;
  for (std::size_t i = 0; i + 1 < profile.size(); ++i) {
    for (int j = 0; j < seg_end; ++j) {
      const int a = vertex(profile[i], j), b = vertex(profile[i + 1], j);
      const int c = vertex(profile[i + 1], j + 1), d = vertex(profile[i], j + 1);
      part.add_triangle(a, b, c);
      part.add_triangle(a, c, d);
    }
  }
  return part;
}

/// Subdivided box spanning x in [-w/2, w/2] (only x >= 0 when `half`), y in [y0, y1],
/// z in [-d/2, d/2].
Part box(double w, double y0, double y1, double d, double cell, bool half) {
  Part part;
  const double x0 = half ? 0.0 : -w / 2;
  const double x1 = w / 2;
  auto steps = [cell](double extent) { return std::max(1, static_cast<int>(std::ceil(extent / cell))); };

  // Face spanned by origin + u * du + v * dv, u, v in [0, 1].
  auto face = [&](const Vec3& origin, const Vec3& du, const Vec3& dv, const Vec3& normal) {
    const int nu = steps(du.norm()), nv = steps(dv.norm());
    const int base = static_cast<int>(part.positions.size());
    for (int j = 0; j <= nv; ++j)
      for (int i = 0; i <= nu; ++i) part.add_vertex(origin + du * (double(i) / nu) + dv * (double(j) / nv), normal);
    for (int j = 0; j < nv; ++j) {
      for (int i = 0; i < nu; ++i) {
        const int a = base + j * (nu + 1) + i;
        part.add_triangle(a, a + 1, a + nu + 2);
        part.add_triangle(a, a + nu + 2, a + nu + 1);
      }
    }
  };
  const double hz = d / 2;
  face({x0, y0, hz}, {x1 - x0, 0, 0}, {0, y1 - y0, 0}, {0, 0, 1});
  face({x0, y0, -hz}, {x1 - x0, 0, 0}, {0, y1 - y0, 0}, {0, 0, -1});
  face({x0, y1, -hz}, {x1 - x0, 0, 0}, {0, 0, d}, {0, 1, 0});
  face({x0, y0, -hz}, {x1 - x0, 0, 0}, {0, 0, d}, {0, -1, 0});
  face({x1, y0, -hz}, {0, y1 - y0, 0}, {0, 0, d}, {1, 0, 0});
  if (!half) face({x0, y0, -hz}, {0, y1 - y0, 0}, {0, 0, d}, {-1, 0, 0});
  return part;
}

using ColorFn = std::function<Rgb(const Vec3& local_centroid)>;

class MeshBuilder {
 public:
  void add(const Part& part, const Eigen::Isometry3d& frame, const ColorFn& color) {
    const int base = static_cast<int>(positions_.size());
    for (std::size_t i = 0; i < part.positions.size(); ++i) {
      positions_.push_back(frame * part.positions[i]);
      normals_.push_back(frame.linear() * part.normals[i]);
    }
    for (const auto& t : part.triangles) {
      triangles_.emplace_back(t[0] + base, t[1] + base, t[2] + base);
      const Vec3 centroid = (part.positions[static_cast<std::size_t>(t[0])] +
                             part.positions[static_cast<std::size_t>(t[1])] +
                             part.positions[static_cast<std::size_t>(t[2])]) /
                            3.0;
      colors_.push_back(color(centroid));
    }
  }

  Mesh finish() const {
    Mesh mesh;
    const auto nv = static_cast<Eigen::Index>(positions_.size());
    const auto nt = static_cast<Eigen::Index>(triangles_.size());
    mesh.positions.resize(3, nv);
    mesh.normals.resize(3, nv);
    mesh.triangles.resize(3, nt);
    mesh.colors.resize(3, nt);
    double min_y = std::numeric_limits<double>::infinity();
    for (const auto& p : positions_) min_y = std::min(min_y, p.y());
    for (Eigen::Index i = 0; i < nv; ++i) {
      mesh.positions.col(i) = positions_[static_cast<std::size_t>(i)] - Vec3(0.0, min_y, 0.0);
      mesh.normals.col(i) = normals_[static_cast<std::size_t>(i)];
    }
    for (Eigen::Index t = 0; t < nt; ++t) {
      mesh.triangles.col(t) = triangles_[static_cast<std::size_t>(t)];
      mesh.colors.col(t) = colors_[static_cast<std::size_t>(t)];
    }
    return mesh;
  }

 private:
  std::vector<Vec3> positions_;
  std::vector<Vec3> normals_;
  std::vector<Eigen::Vector3i> triangles_;
  std::vector<Rgb> colors_;
};

constexpr int kSphereSegments = 16;
constexpr int kSphereRings = 10;
constexpr int kCapsuleSegments = 12;
constexpr int kCapsuleCapRings = 3;

Eigen::Isometry3d joint_transform(const Vec3& offset, const EulerZXY& e) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.translation() = offset;
  t.linear() = rotation_zxy(e.z, e.x, e.y);
  return t;
}

ColorFn solid(const Rgb& c) {
  return [c](const Vec3&) { return c; };
}

ColorFn torso_color(const PersonSpec& s) {
  const double scale = s.pattern_scale;
  const double phase = Rng(s.texture_seed).uniform01() * scale;
  return [=](const Vec3& p) -> Rgb {
    switch (s.torso_pattern) {
      case TorsoPattern::solid: return s.torso_rgb;
      case TorsoPattern::stripes: {
        const auto band = static_cast<long>(std::floor((p.y() + phase) / scale));
        return band % 2 == 0 ? s.torso_rgb : s.pattern_rgb;
      }
      case TorsoPattern::checker: {
        const auto cell = static_cast<long>(std::floor((p.y() + phase) / scale)) +
                          static_cast<long>(std::floor(std::abs(p.x()) / scale)) +
                          static_cast<long>(std::floor((p.z() + 1.0) / scale));
        return cell % 2 == 0 ? s.torso_rgb : s.pattern_rgb;
      }
    }
    return s.torso_rgb;
  };
}

}  // namespace

Eigen::AlignedBox3d Mesh::bounds() const {
  Eigen::AlignedBox3d box;
  for (Eigen::Index i = 0; i < positions.cols(); ++i) box.extend(positions.col(i));
  return box;
}

bool Mesh::valid() const {
  if (triangles.cols() == 0 || normals.cols() != positions.cols() || colors.cols() != triangles.cols()) return false;
  if ((triangles.array() < 0).any() || (triangles.array() >= positions.cols()).any()) return false;
  if (!positions.allFinite()) return false;
  return ((normals.colwise().norm().array() - 1.0).abs() <= 1e-4).all();
}

Skeleton pose_skeleton(const PersonSpec& spec, const Pose& pose) {
  const Proportions p(spec);
  Skeleton sk;
  auto set = [&](Joint j, const Eigen::Isometry3d& parent, const Vec3& offset) {
    sk.frames[static_cast<std::size_t>(j)] = parent * joint_transform(offset, pose[j]);
  };
  set(Joint::pelvis, Eigen::Isometry3d::Identity(), {0.0, p.pelvis_y, 0.0});
  set(Joint::spine, sk[Joint::pelvis], {0.0, p.spine_offset, 0.0});
  set(Joint::neck, sk[Joint::spine], {0.0, p.torso_len, 0.0});
  set(Joint::head, sk[Joint::neck], {0.0, p.neck_len, 0.0});
  set(Joint::l_shoulder, sk[Joint::spine], {p.shoulder_half, p.torso_len - p.shoulder_drop, 0.0});
  set(Joint::r_shoulder, sk[Joint::spine], {-p.shoulder_half, p.torso_len - p.shoulder_drop, 0.0});
  set(Joint::l_elbow, sk[Joint::l_shoulder], {0.0, -p.upper_arm, 0.0});
  set(Joint::r_elbow, sk[Joint::r_shoulder], {0.0, -p.upper_arm, 0.0});
  set(Joint::l_hip, sk[Joint::pelvis], {p.hip_half, -p.hip_drop, 0.0});
  set(Joint::r_hip, sk[Joint::pelvis], {-p.hip_half, -p.hip_drop, 0.0});
  set(Joint::l_knee, sk[Joint::l_hip], {0.0, -p.thigh, 0.0});
  set(Joint::r_knee, sk[Joint::r_hip], {0.0, -p.thigh, 0.0});
  return sk;
}

Mesh build_mesh(const PersonSpec& spec, const Pose& pose) {
  const Proportions p(spec);
  const Skeleton sk = pose_skeleton(spec, pose);
  MeshBuilder mb;

  // Central parts are built as x >= 0 halves plus their exact reflections.
  Part head = sphere({0.0, p.r_head, 0.0}, p.r_head, kSphereSegments, kSphereRings, true);
  head.append_mirror();
  const double r_head = p.r_head;
  mb.add(head, sk[Joint::head], [&spec, r_head](const Vec3& c) {
    const double y = c.y() - r_head;
    const bool hair = y > 0.25 * r_head || (c.z() < -0.2 * r_head && y > -0.45 * r_head);
    return hair ? spec.hair_rgb : spec.skin_rgb;
  });

  Part neck = capsule(p.neck_len, p.r_neck, kCapsuleSegments, kCapsuleCapRings, true);
  neck.append_mirror();
  mb.add(neck, sk[Joint::head], solid(spec.skin_rgb));

  const double cell = 0.025 * spec.stature_m;
  Part torso = box(p.torso_width, -0.01 * spec.stature_m, p.torso_len + 0.01 * spec.stature_m, p.torso_depth, cell, true);
  torso.append_mirror();
  mb.add(torso, sk[Joint::spine], torso_color(spec));

  Part hips = box(p.pelvis_width, -p.hip_drop - 0.035 * spec.stature_m, p.spine_offset + 0.03 * spec.stature_m,
                  p.pelvis_depth, cell, true);
  hips.append_mirror();
  mb.add(hips, sk[Joint::pelvis], solid(spec.legs_rgb));

  // Right-side limbs use the generated geometry, left-side limbs its reflection.
  const Part upper_arm = capsule(p.upper_arm, p.r_upper_arm, kCapsuleSegments, kCapsuleCapRings);
  const Part forearm = capsule(p.forearm, p.r_forearm, kCapsuleSegments, kCapsuleCapRings);
  const Part thigh = capsule(p.thigh, p.r_thigh, kCapsuleSegments, kCapsuleCapRings);
  const Part shin = capsule(p.shin, p.r_shin, kCapsuleSegments, kCapsuleCapRings);
  const double shoe_top = -p.shin + 0.03 * spec.stature_m;
  const ColorFn shin_color = [&spec, shoe_top](const Vec3& c) { return c.y() < shoe_top ? spec.shoes_rgb : spec.legs_rgb; };

  for (const bool left : {false, true}) {
    auto side = [left](const Part& part) { return left ? part.mirrored() : part; };
    mb.add(side(upper_arm), sk[left ? Joint::l_shoulder : Joint::r_shoulder], torso_color(spec));
    mb.add(side(forearm), sk[left ? Joint::l_elbow : Joint::r_elbow], solid(spec.skin_rgb));
    mb.add(side(thigh), sk[left ? Joint::l_hip : Joint::r_hip], solid(spec.legs_rgb));
    mb.add(side(shin), sk[left ? Joint::l_knee : Joint::r_knee], shin_color);
  }
  return mb.finish();
}

}  // namespace tagforge
