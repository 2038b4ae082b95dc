#include "tagforge/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tagforge/angles.hpp"
#include "tagforge/error.hpp"

namespace tagforge::bvh {

namespace {

constexpr int kMaxDepth = 256;
constexpr int kMaxChannelsPerJoint = 6;

struct Token {
  std::string_view text;
  int line = 0;
};

/// Whitespace tokenizer that remembers line numbers. Braces are always their own token.
class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    if (pos_ >= src_.size()) return {{}, line_};
    const std::size_t start = pos_;
    if (src_[pos_] == '{' || src_[pos_] == '}') {
      ++pos_;
      return {src_.substr(start, 1), line_};
    }
    while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '{' && src_[pos_] != '}') ++pos_;
    return {src_.substr(start, pos_ - start), line_};
  }

  Token peek() {
    const auto saved_pos = pos_;
    const auto saved_line = line_;
    const Token t = next();
    pos_ = saved_pos;
    line_ = saved_line;
    return t;
  }

  /// Rest of the current line (after the last token), consumed.
  std::string_view rest_of_line() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
    return src_.substr(start, pos_ - start);
  }

  /// Remaining input split into (line number, text) pairs.
  std::vector<std::pair<int, std::string_view>> remaining_lines() {
    std::vector<std::pair<int, std::string_view>> out;
    while (pos_ < src_.size()) {
      if (src_[pos_] == '\n') {
        ++line_;
        ++pos_;
        continue;
      }
      const std::size_t start = pos_;
      while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      out.emplace_back(line_, src_.substr(start, pos_ - start));
    }
    return out;
  }

  [[nodiscard]] int line() const { return line_; }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

  void skip_space() {
    while (pos_ < src_.size() && is_space(src_[pos_])) {
      if (src_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

std::optional<Channel> find_channel(std::string_view name) {
  static constexpr std::array<std::pair<std::string_view, Channel>, 6> kNames{{
      {"Xposition", Channel::Xposition},
      {"Yposition", Channel::Yposition},
      {"Zposition", Channel::Zposition},
      {"Zrotation", Channel::Zrotation},
      {"Xrotation", Channel::Xrotation},
      {"Yrotation", Channel::Yrotation},
  }};
  for (const auto& [n, c] : kNames)
    if (n == name) return c;
  return std::nullopt;
}

bool is_rotation(Channel c) { return c == Channel::Xrotation || c == Channel::Yrotation || c == Channel::Zrotation; }

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) {}

  Document run() {
    const Token first = lex_.next();
    if (first.text != "HIERARCHY") throw ParseError("missing HIERARCHY", first.text.empty() ? 0 : first.line);
    const Token root = lex_.next();
    if (root.text != "ROOT") throw ParseError("expected ROOT, got '" + std::string(root.text) + "'", root.line);
    parse_joint(-1, 0);

    const Token motion = lex_.next();
    if (motion.text != "MOTION") throw ParseError("missing MOTION", motion.line);
    parse_motion();
    return std::move(doc_);
  }

 private:
  Token expect(std::string_view word) {
    const Token t = lex_.next();
    if (t.text != word)
      throw ParseError("expected '" + std::string(word) + "', got '" + std::string(t.text) + "'", t.line);
    return t;
  }

  double number(std::string_view what) {
    const Token t = lex_.next();
    const auto v = parse_double(t.text);
    if (!v) throw ParseError("non-numeric " + std::string(what) + " '" + std::string(t.text) + "'", t.line);
    return *v;
  }

  Eigen::Vector3d offset() {
    expect("OFFSET");
    Eigen::Vector3d v;
    for (int i = 0; i < 3; ++i) v[i] = number("offset");
    return v;
  }

  void parse_joint(int parent, int depth) {
    if (depth > kMaxDepth) throw ParseError("hierarchy nested too deeply", lex_.line());
    const Token name = lex_.next();
    if (name.text.empty() || name.text == "{" || name.text == "}")
      throw ParseError("missing joint name", name.line);
    expect("{");

    Joint joint;
    joint.name = std::string(name.text);
    joint.parent = parent;
    joint.offset = offset();
    joint.first_channel = channel_total_;

    const Token ch = expect("CHANNELS");
    const Token count_tok = lex_.next();
    const auto count = parse_int(count_tok.text);
    if (!count || (*count != 3 && *count != kMaxChannelsPerJoint))
      throw ParseError("unsupported channel count '" + std::string(count_tok.text) + "'", count_tok.line);
    for (long long i = 0; i < *count; ++i) {
      const Token c = lex_.next();
      const auto channel = find_channel(c.text);
      if (!channel) throw ParseError("unsupported channel '" + std::string(c.text) + "'", c.line);
      if (std::find(joint.channels.begin(), joint.channels.end(), *channel) != joint.channels.end())
        throw ParseError("duplicate channel '" + std::string(c.text) + "'", c.line);
      joint.channels.push_back(*channel);
    }
    if (*count == 3 && !std::all_of(joint.channels.begin(), joint.channels.end(), is_rotation))
      throw ParseError("three-channel joints must list rotations only", ch.line);
    channel_total_ += static_cast<int>(*count);

    const int index = static_cast<int>(doc_.joints.size());
    doc_.joints.push_back(std::move(joint));

    for (;;) {
      const Token t = lex_.next();
      if (t.text == "}") return;
      if (t.text == "JOINT") {
        parse_joint(index, depth + 1);
      } else if (t.text == "End") {
        expect("Site");
        expect("{");
        doc_.joints[static_cast<std::size_t>(index)].end_sites.push_back(offset());
        expect("}");
      } else if (t.text.empty()) {
        throw ParseError("unexpected end of input in joint '" + doc_.joints[static_cast<std::size_t>(index)].name + "'",
                         t.line);
      } else {
        throw ParseError("unexpected token '" + std::string(t.text) + "'", t.line);
      }
    }
  }

  void parse_motion() {
    const Token frames_kw = expect("Frames:");
    const Token n_tok = lex_.next();
    const auto n = parse_int(n_tok.text);
    if (!n || *n < 1) throw ParseError("frame count must be a positive integer", n_tok.line);
    expect("Frame");
    const Token time_kw = expect("Time:");
    const auto time = parse_double(lex_.next().text);
    if (!time || *time < 0.0) throw ParseError("malformed frame time", time_kw.line);
    doc_.frame_time_s = *time;
    // Values may only start on the following line.
    if (!trim(lex_.rest_of_line()).empty()) throw ParseError("unexpected data after frame time", time_kw.line);

    const int cols = channel_total_;
    std::vector<double> values;
    long long rows = 0;
    for (const auto& [line_no, raw] : lex_.remaining_lines()) {
      const auto line = trim(raw);
      if (line.empty()) continue;
      if (rows >= *n) throw ParseError("more frame rows than the declared " + std::to_string(*n), line_no);
      const auto fields = split_fields(line, " \t\r\f\v");
      if (static_cast<int>(fields.size()) != cols)
        throw ParseError("frame row has " + std::to_string(fields.size()) + " values, expected " +
                             std::to_string(cols),
                         line_no);
      for (const auto f : fields) {
        const auto v = parse_double(f);
        if (!v) throw ParseError("non-numeric value '" + std::string(f) + "'", line_no);
        values.push_back(*v);
      }
      ++rows;
    }
    if (rows != *n)
      throw ParseError("declared " + std::to_string(*n) + " frames but found " + std::to_string(rows), frames_kw.line);
    doc_.frames = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), static_cast<Eigen::Index>(rows), cols);
  }

  Lexer lex_;
  Document doc_;
  int channel_total_ = 0;
};

void write_joint(std::ostringstream& out, const Document& doc, int index, int depth) {
  const auto& j = doc.joints[static_cast<std::size_t>(index)];
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  out << pad << (j.parent < 0 ? "ROOT " : "JOINT ") << j.name << '\n' << pad << "{\n";
  out << pad << "  OFFSET " << format_double(j.offset.x()) << ' ' << format_double(j.offset.y()) << ' '
      << format_double(j.offset.z()) << '\n';
  out << pad << "  CHANNELS " << j.channels.size();
  for (const auto c : j.channels) out << ' ' << channel_name(c);
  out << '\n';
  for (int child = index + 1; child < static_cast<int>(doc.joints.size()); ++child)
    if (doc.joints[static_cast<std::size_t>(child)].parent == index) write_joint(out, doc, child, depth + 1);
  for (const auto& site : j.end_sites) {
    out << pad << "  End Site\n" << pad << "  {\n";
    out << pad << "    OFFSET " << format_double(site.x()) << ' ' << format_double(site.y()) << ' '
        << format_double(site.z()) << '\n';
    out << pad << "  }\n";
  }
  out << pad << "}\n";
}

double wrap_signed(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d > 180.0) d -= 360.0;
  if (d <= -180.0) d += 360.0;
  return d;
}

}  // namespace

std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::Xposition: return "Xposition";
    case Channel::Yposition: return "Yposition";
    case Channel::Zposition: return "Zposition";
    case Channel::Zrotation: return "Zrotation";
    case Channel::Xrotation: return "Xrotation";
    case Channel::Yrotation: return "Yrotation";
  }
  return "";
}

int Document::find(std::string_view name) const {
  for (std::size_t i = 0; i < joints.size(); ++i)
    if (joints[i].name == name) return static_cast<int>(i);
  return -1;
}

Document parse(std::string_view text) { return Parser(text).run(); }

Document load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open BVH file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

std::string serialize(const Document& doc) {
  std::ostringstream out;
  out << "HIERARCHY\n";
  if (!doc.joints.empty()) write_joint(out, doc, 0, 0);
  out << "MOTION\n";
  out << "Frames: " << doc.frame_count() << '\n';
  out << "Frame Time: " << format_double(doc.frame_time_s) << '\n';
  for (Eigen::Index r = 0; r < doc.frames.rows(); ++r) {
    for (Eigen::Index c = 0; c < doc.frames.cols(); ++c) {
      if (c) out << ' ';
      out << format_double(doc.frames(r, c));
    }
    out << '\n';
  }
  return out.str();
}

JointMap cmu_joint_map() {
  using tagforge::Joint;
  return {
      {"Hips", Joint::pelvis},          {"LowerBack", Joint::spine},      {"Neck", Joint::neck},
      {"Head", Joint::head},            {"LeftArm", Joint::l_shoulder},   {"RightArm", Joint::r_shoulder},
      {"LeftForeArm", Joint::l_elbow},  {"RightForeArm", Joint::r_elbow}, {"LeftUpLeg", Joint::l_hip},
      {"RightUpLeg", Joint::r_hip},     {"LeftLeg", Joint::l_knee},       {"RightLeg", Joint::r_knee},
  };
}

EulerZXY euler_zxy_from_matrix(const Eigen::Matrix3d& r) {
  constexpr double to_deg = 180.0 / std::numbers::pi;
  const double sx = std::clamp(r(2, 1), -1.0, 1.0);
  EulerZXY e;
  e.x = std::asin(sx) * to_deg;
  if (std::abs(sx) < 1.0 - 1e-12) {
    e.z = std::atan2(-r(0, 1), r(1, 1)) * to_deg;
    e.y = std::atan2(-r(2, 0), r(2, 2)) * to_deg;
  } else {
    // Gimbal lock: only z + y (or z - y) is determined; put it all on z.
    e.y = 0.0;
    e.z = std::atan2(r(1, 0), r(0, 0)) * to_deg;
  }
  e.z = wrap_signed(e.z);
  e.y = wrap_signed(e.y);
  return e;
}

Pose pose_from_frame(const Document& doc, int frame_index, const JointMap& joint_map) {
  if (frame_index < 0 || frame_index >= doc.frame_count())
    throw Error("frame index " + std::to_string(frame_index) + " out of range [0, " +
                std::to_string(doc.frame_count()) + ")");
  std::string missing;
  for (const auto& [bvh_name, joint] : joint_map)
    if (doc.find(bvh_name) < 0) missing += (missing.empty() ? "" : ", ") + bvh_name;
  if (!missing.empty()) throw Error("joint map references joints absent from the BVH document: " + missing);

  Pose pose = builtin_pose(BuiltinPose::stand);
  const auto row = doc.frames.row(frame_index);
  for (const auto& [bvh_name, target] : joint_map) {
    const auto& j = doc.joints[static_cast<std::size_t>(doc.find(bvh_name))];
    std::vector<std::pair<Channel, double>> rotations;
    for (std::size_t c = 0; c < j.channels.size(); ++c)
      if (is_rotation(j.channels[c])) rotations.emplace_back(j.channels[c], row(j.first_channel + static_cast<int>(c)));

    const bool already_zxy = rotations.size() == 3 && rotations[0].first == Channel::Zrotation &&
                             rotations[1].first == Channel::Xrotation && rotations[2].first == Channel::Yrotation;
    if (already_zxy) {
      pose[target] = {wrap_signed(rotations[0].second), wrap_signed(rotations[1].second),
                      wrap_signed(rotations[2].second)};
      continue;
    }
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    for (const auto& [c, deg] : rotations) {
      if (c == Channel::Xrotation) r = r * rotation_x(deg);
      else if (c == Channel::Yrotation) r = r * rotation_y(deg);
      else r = r * rotation_z(deg);
    }
    pose[target] = euler_zxy_from_matrix(r);
  }
  return pose;
}

}  // namespace tagforge::bvh
