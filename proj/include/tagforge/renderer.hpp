#pragma once

#include <Eigen/Core>

#include "tagforge/image.hpp"
#include "tagforge/mesh.hpp"
#include "tagforge/scene_model.hpp"

namespace tagforge {

inline constexpr double kVerticalFovDeg = 45.0;
inline constexpr double kNearPlane = 0.05;

/// Pinhole camera orbiting an anchor point. Camera space: x right, y up, z forward.
struct Camera {
  Eigen::Vector3d position;
  Eigen::Vector3d right;
  Eigen::Vector3d up;
  Eigen::Vector3d forward;
  double focal_px = 0.0;
  int width = 0;
  int height = 0;

  [[nodiscard]] Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const {
    const Eigen::Vector3d q = world - position;
    return {right.dot(q), up.dot(q), forward.dot(q)};
  }
};

/// Center of the mesh bounding box: the point the camera orbits and looks at.
[[nodiscard]] Eigen::Vector3d render_anchor(const Mesh& mesh);

/// Camera at anchor + d * (cos t sin p, sin t, cos t cos p) with t the depression and p
/// the azimuth, looking at the anchor with no roll.
[[nodiscard]] Camera make_camera(const Mesh& mesh, const RenderOptions& opts, int width, int height);

/// Unit vector pointing toward the light.
[[nodiscard]] Eigen::Vector3d light_direction(double azimuth_deg, double elevation_deg);

/// Z-buffered flat-shaded rasterization. RGB = material * clamp(ambient + I * max(0, n.l)),
/// alpha 1 where the person covers the pixel center, 0 elsewhere.
/// Throws Error("subject out of frame") when nothing is covered.
[[nodiscard]] ImageBuffer render(const Mesh& mesh, const RenderOptions& opts, int width, int height);

}  // namespace tagforge
