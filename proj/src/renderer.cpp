#include "tagforge/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tagforge/angles.hpp"

namespace tagforge {

Eigen::Vector3d render_anchor(const Mesh& mesh) {
  const Eigen::Vector3d lo = mesh.positions.rowwise().minCoeff();
  const Eigen::Vector3d hi = mesh.positions.rowwise().maxCoeff();
  return (lo + hi) / 2.0;
}

Camera make_camera(const Mesh& mesh, const RenderOptions& opts, int width, int height) {
  const double t = opts.camera_depression_deg, p = opts.camera_azimuth_deg;
  const Eigen::Vector3d anchor = render_anchor(mesh);
  const Eigen::Vector3d dir(cos_deg(t) * sin_deg(p), sin_deg(t), cos_deg(t) * cos_deg(p));

  Camera cam;
  cam.position = anchor + opts.camera_distance_m * dir;
  cam.forward = -dir;
  cam.right = cam.forward.cross(Eigen::Vector3d::UnitY()).normalized();
  cam.up = cam.right.cross(cam.forward);
  cam.focal_px = (height / 2.0) / std::tan(kVerticalFovDeg / 2.0 * std::numbers::pi / 180.0);
  cam.width = width;
  cam.height = height;
  return cam;
}

Eigen::Vector3d light_direction(double azimuth_deg, double elevation_deg) {
  const double ce = cos_deg(elevation_deg);
  return {ce * sin_deg(azimuth_deg), sin_deg(elevation_deg), ce * cos_deg(azimuth_deg)};
}

namespace {

// 2D edge function: twice the signed area of (a, b, p).
double edge(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double px, double py) {
  return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
}

bool lex_greater(const Eigen::Vector3f& a, const Eigen::Vector3f& b) {
  return std::lexicographical_compare(b.data(), b.data() + 3, a.data(), a.data() + 3);
}

}  // namespace

ImageBuffer render(const Mesh& mesh, const RenderOptions& opts, int width, int height) {
  if (width < 16 || height < 16) throw Error("canvas must be at least 16x16");
  if (mesh.triangle_count() == 0) throw Error("mesh has no triangles");

  const Camera cam = make_camera(mesh, opts, width, height);
  const Eigen::Vector3d light = light_direction(opts.light_azimuth_deg, opts.light_elevation_deg);

  // Vertices in camera space, projected to image-centered pixel units (v up).
  const Eigen::Index nv = mesh.vertex_count();
  std::vector<Eigen::Vector2d> screen(static_cast<std::size_t>(nv));
  std::vector<double> depth(static_cast<std::size_t>(nv));
  for (Eigen::Index i = 0; i < nv; ++i) {
    const Eigen::Vector3d c = cam.to_camera(mesh.positions.col(i));
    depth[static_cast<std::size_t>(i)] = c.z();
    screen[static_cast<std::size_t>(i)] = {cam.focal_px * c.x() / c.z(), cam.focal_px * c.y() / c.z()};
  }

  ImageBuffer out(width, height);
  std::vector<double> inv_z(static_cast<std::size_t>(width) * height, 0.0);
  std::vector<Eigen::Vector3f> shade(static_cast<std::size_t>(width) * height, Eigen::Vector3f::Zero());
  const double half_w = width / 2.0, half_h = height / 2.0;
  bool any = false;

  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const auto tri = mesh.triangles.col(t);
    const auto i0 = static_cast<std::size_t>(tri[0]), i1 = static_cast<std::size_t>(tri[1]),
               i2 = static_cast<std::size_t>(tri[2]);
    if (depth[i0] < kNearPlane || depth[i1] < kNearPlane || depth[i2] < kNearPlane) continue;
    const Eigen::Vector2d &a = screen[i0], &b = screen[i1], &c = screen[i2];
    const double area = edge(a, b, c.x(), c.y());
    if (area == 0.0) continue;

    const Eigen::Vector3d n =
        (mesh.normals.col(tri[0]) + mesh.normals.col(tri[1]) + mesh.normals.col(tri[2])).normalized();
    const double lit = std::clamp(opts.ambient + opts.light_intensity * std::max(0.0, n.dot(light)), 0.0, 1.0);
    const Eigen::Vector3f color = (mesh.colors.col(t).cast<double>() * lit).cwiseMax(0.0).cwiseMin(1.0).cast<float>();

    const double umin = std::min({a.x(), b.x(), c.x()}), umax = std::max({a.x(), b.x(), c.x()});
    const double vmin = std::min({a.y(), b.y(), c.y()}), vmax = std::max({a.y(), b.y(), c.y()});
    const int x0 = std::max(0, static_cast<int>(std::floor(umin + half_w - 0.5)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(umax + half_w - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(half_h - 0.5 - vmax)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(half_h - 0.5 - vmin)));

    for (int py = y0; py <= y1; ++py) {
      const double v = half_h - (py + 0.5);
      for (int px = x0; px <= x1; ++px) {
        const double u = px + 0.5 - half_w;
        const double e0 = edge(b, c, u, v), e1 = edge(c, a, u, v), e2 = edge(a, b, u, v);
        // Either winding counts; points on an edge are inside.
        const bool inside = (e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0);
        if (!inside) continue;
        const double w0 = e0 / area, w1 = e1 / area, w2 = e2 / area;
        const double iz = w0 / depth[i0] + w1 / depth[i1] + w2 / depth[i2];
        const auto k = static_cast<std::size_t>(py) * width + px;
        // Exact depth ties go to the brighter color so the result does not depend on
        // triangle order.
        if (iz > inv_z[k] || (iz == inv_z[k] && lex_greater(color, shade[k]))) {
          inv_z[k] = iz;
          shade[k] = color;
          any = true;
        }
      }
    }
  }
  if (!any) throw Error("subject out of frame");

  for (int py = 0; py < height; ++py) {
    for (int px = 0; px < width; ++px) {
      const auto k = static_cast<std::size_t>(py) * width + px;
      if (inv_z[k] > 0.0) out.pixel(px, py) << shade[k].x(), shade[k].y(), shade[k].z(), 1.0f;
    }
  }
  return out;
}

}  // namespace tagforge
