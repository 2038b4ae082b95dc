#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tagforge/scene_model.hpp"

namespace tagforge::bvh {

enum class Channel { Xposition, Yposition, Zposition, Zrotation, Xrotation, Yrotation };

[[nodiscard]] std::string_view channel_name(Channel c);

struct Joint {
  std::string name;
  int parent = -1;  // index into Document::joints, -1 for the root
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  std::vector<Channel> channels;
  int first_channel = 0;  // column of channels[0] in a frame row
  std::vector<Eigen::Vector3d> end_sites;

  bool operator==(const Joint&) const = default;
};

/// Parsed BVH file. Joints are stored depth-first in file order, so a joint's
/// parent always precedes it.
struct Document {
  std::vector<Joint> joints;
  double frame_time_s = 0.0;
  /// frame_count x channel_count, row per frame.
  Eigen::MatrixXd frames;

  [[nodiscard]] int frame_count() const { return static_cast<int>(frames.rows()); }
  [[nodiscard]] int channel_count() const { return static_cast<int>(frames.cols()); }
  /// Index of the named joint, or -1.
  [[nodiscard]] int find(std::string_view name) const;

  bool operator==(const Document& other) const {
    return joints == other.joints && frame_time_s == other.frame_time_s && frames.rows() == other.frames.rows() &&
           frames.cols() == other.frames.cols() && frames == other.frames;
  }
};

/// Throws ParseError carrying the offending line number. Accepts only the channel sets
/// {X,Y,Z}position + {Z,X,Y}rotation and {Z,X,Y}rotation, in any order.
[[nodiscard]] Document parse(std::string_view text);
[[nodiscard]] Document load(const std::string& path);

/// BVH text that parses back to an equal Document.
[[nodiscard]] std::string serialize(const Document& doc);

using JointMap = std::map<std::string, tagforge::Joint>;

/// CMU motion-capture naming (Hips, LowerBack, LeftArm, ...).
[[nodiscard]] JointMap cmu_joint_map();

/// Pose at `frame_index`: mapped joints take the frame's rotation (converted to ZXY),
/// unmapped joints keep the `stand` values, root translation is ignored.
/// Throws Error for an out-of-range frame or map entries naming absent BVH joints.
[[nodiscard]] Pose pose_from_frame(const Document& doc, int frame_index, const JointMap& joint_map);

/// Decomposes a rotation matrix into R = Rz * Rx * Ry angles (degrees, each in (-180, 180]).
[[nodiscard]] EulerZXY euler_zxy_from_matrix(const Eigen::Matrix3d& r);

}  // namespace tagforge::bvh
