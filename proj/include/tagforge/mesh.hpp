#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "tagforge/scene_model.hpp"

namespace tagforge {

/// Triangle soup with per-vertex normals and one material color per triangle.
/// World space, meters, y up, the person faces +z.
struct Mesh {
  Eigen::Matrix3Xd positions;
  Eigen::Matrix3Xd normals;
  Eigen::Matrix3Xi triangles;
  Eigen::Matrix3Xf colors;

  [[nodiscard]] Eigen::Index vertex_count() const { return positions.cols(); }
  [[nodiscard]] Eigen::Index triangle_count() const { return triangles.cols(); }
  [[nodiscard]] Eigen::AlignedBox3d bounds() const;
  /// Indices in range, unit normals (1e-4), at least one triangle.
  [[nodiscard]] bool valid() const;

  bool operator==(const Mesh& o) const {
    return positions.cols() == o.positions.cols() && triangles.cols() == o.triangles.cols() &&
           positions == o.positions && normals == o.normals && triangles == o.triangles && colors == o.colors;
  }
};

/// World-space joint frames produced by forward kinematics, indexed by Joint.
struct Skeleton {
  std::array<Eigen::Isometry3d, kJointCount> frames;

  [[nodiscard]] const Eigen::Isometry3d& operator[](Joint j) const { return frames[static_cast<std::size_t>(j)]; }
};

/// Forward kinematics for `spec`'s body proportions under `pose`, before grounding.
[[nodiscard]] Skeleton pose_skeleton(const PersonSpec& spec, const Pose& pose);

/// Articulated low-poly humanoid: sphere head, box torso and pelvis, capsule limbs and
/// neck. Translated vertically so the lowest vertex sits on y = 0.
[[nodiscard]] Mesh build_mesh(const PersonSpec& spec, const Pose& pose);

}  // namespace tagforge
