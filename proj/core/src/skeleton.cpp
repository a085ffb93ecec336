#include "slipstep/skeleton.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "slipstep/errors.hpp"

namespace slipstep::skeleton {

using nlohmann::json;

Skeleton::Skeleton(std::vector<Joint> joints, double height_m, double mass_kg, double ankle_height_m)
    : joints_(std::move(joints)), height_m_(height_m), mass_kg_(mass_kg), ankle_height_m_(ankle_height_m) {
  index();
}

void Skeleton::index() {
  if (joints_.empty()) throw ConfigError("skeleton: no joints");
  if (joints_[0].parent != -1) throw ConfigError("skeleton: first joint must be the root");
  std::set<std::string> names;
  dof_offsets_.clear();
  dof_joint_.clear();
  dof_count_ = 0;
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const Joint& j = joints_[i];
    if (!names.insert(j.name).second) throw ConfigError("skeleton: duplicate joint '" + j.name + "'");
    if (i > 0 && (j.parent < 0 || j.parent >= static_cast<int>(i))) {
      throw ConfigError("skeleton: joint '" + j.name + "' must follow its parent (tree order)");
    }
    if (i == 0 && !j.dofs.empty()) throw ConfigError("skeleton: root DOFs are implicit (6); list none");
    for (const auto& d : j.dofs) {
      if (!std::isfinite(d.min_rad) || !std::isfinite(d.max_rad) || d.min_rad > d.max_rad) {
        throw ConfigError("skeleton: bad limits on " + j.name + "." + d.name);
      }
      if (std::abs(d.axis.norm() - 1.0) > 1e-9) throw ConfigError("skeleton: non-unit axis on " + j.name + "." + d.name);
    }
    dof_offsets_.push_back(dof_count_);
    for (std::size_t k = 0; k < j.dofs.size(); ++k) dof_joint_.push_back(static_cast<int>(i));
    dof_count_ += static_cast<int>(j.dofs.size());
  }
}

int Skeleton::find(std::string_view name) const {
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    if (joints_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int Skeleton::require(std::string_view name) const {
  const int i = find(name);
  if (i < 0) throw ConfigError("skeleton: missing joint '" + std::string(name) + "'");
  return i;
}

int Skeleton::dof_index(std::string_view joint, std::string_view dof) const {
  const int j = require(joint);
  const auto& dofs = joints_[static_cast<std::size_t>(j)].dofs;
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    if (dofs[k].name == dof) return dof_offsets_[static_cast<std::size_t>(j)] + static_cast<int>(k);
  }
  throw ConfigError("skeleton: joint '" + std::string(joint) + "' has no DOF '" + std::string(dof) + "'");
}

const DofSpec& Skeleton::dof(int flat_index) const {
  const int j = dof_joint(flat_index);
  return joints_[static_cast<std::size_t>(j)].dofs[static_cast<std::size_t>(flat_index - dof_offset(j))];
}

std::string Skeleton::dof_label(int flat_index) const {
  return joints_[static_cast<std::size_t>(dof_joint(flat_index))].name + "." + dof(flat_index).name;
}

Pose Skeleton::neutral_pose() const {
  Pose p;
  p.root_position = Vec3(0.0, leg_length(), 0.0);
  p.joint_angles.assign(static_cast<std::size_t>(dof_count_), 0.0);
  clamp_to_limits(p, *this);
  return p;
}

double Skeleton::leg_length() const {
  const double thigh = joint(require("knee_l")).offset.norm();
  const double shank = joint(require("ankle_l")).offset.norm();
  return ankle_height_m_ + thigh + shank;
}

Skeleton Skeleton::with_leg_scale(double factor) const {
  if (!(factor > 0.0)) throw ConfigError("skeleton: leg scale must be > 0");
  std::vector<Joint> joints = joints_;
  for (auto& j : joints) {
    const bool thigh = j.name.rfind("hip_", 0) == 0;
    const bool shank = j.name.rfind("knee_", 0) == 0;
    const bool ankle = j.name.rfind("ankle_", 0) == 0;
    const bool toe = j.name.rfind("toe_", 0) == 0;
    if (shank || ankle) j.offset *= factor;
    if (thigh || shank) {
      j.segment.center *= factor;
      j.segment.box.y() *= factor;
    }
    if (toe) j.offset.y() *= factor;
  }
  return Skeleton(std::move(joints), height_m_, mass_kg_, ankle_height_m_ * factor);
}

namespace {

DofSpec make_dof(std::string name, Vec3 axis, double lo_deg, double hi_deg) {
  return {std::move(name), axis, deg2rad(lo_deg), deg2rad(hi_deg)};
}

}  // namespace

Skeleton Skeleton::humanoid(double H, double M) {
  // Segment proportions follow standard anthropometric fractions of stature/mass.
  const double ankle_h = 0.039 * H;
  const double thigh = 0.245 * H;
  const double shank = 0.246 * H;
  const double hip_half = 0.05 * H;
  const double spine_up = 0.06 * H;
  const double pelvis_h = ankle_h + thigh + shank;
  const double shoulder_h = 0.818 * H;
  const double neck_h = 0.870 * H;
  const double shoulder_half = 0.105 * H;
  const double upper_arm = 0.186 * H;
  const double forearm = 0.146 * H;
  const double head = H - neck_h;

  const Vec3 X = Vec3::UnitX(), Y = Vec3::UnitY(), Z = Vec3::UnitZ();
  std::vector<Joint> js;
  auto add = [&](std::string name, std::string_view parent, Vec3 offset, std::vector<DofSpec> dofs, Segment seg) {
    int p = -1;
    if (!parent.empty()) {
      for (std::size_t i = 0; i < js.size(); ++i) {
        if (js[i].name == parent) p = static_cast<int>(i);
      }
    }
    js.push_back({std::move(name), p, offset, std::move(dofs), seg});
  };

  add("pelvis", "", Vec3::Zero(), {}, {0.142 * M, {0.0, 0.05, 0.0}, {0.18, 0.18, 0.30}});
  add("spine", "pelvis", {0.0, spine_up, 0.0},
      {make_dof("twist", Y, -30, 30), make_dof("lateral", X, -30, 30), make_dof("flexion", Z, -30, 30)},
      {0.355 * M, {0.0, 0.5 * (neck_h - pelvis_h - spine_up), 0.0}, {0.20, neck_h - pelvis_h - spine_up, 0.34}});
  add("neck", "spine", {0.0, neck_h - pelvis_h - spine_up, 0.0},
      {make_dof("twist", Y, -45, 45), make_dof("lateral", X, -45, 45), make_dof("flexion", Z, -45, 45)},
      {0.081 * M, {0.0, 0.5 * head, 0.0}, {0.20, head, 0.18}});
  add("head", "neck", {0.0, head, 0.0}, {}, {});

  for (const char* sfx : {"_l", "_r"}) {
    const bool left = std::string_view(sfx) == "_l";
    const double lat = left ? -1.0 : 1.0;  // left is -z
    const double mir = left ? 1.0 : -1.0;
    const std::string s = sfx;
    add("shoulder" + s, "spine", {0.0, shoulder_h - pelvis_h - spine_up, lat * shoulder_half},
        {make_dof("rotation", mir * Y, -90, 90), make_dof("abduction", mir * X, -30, 180), make_dof("flexion", Z, -60, 180)},
        {0.028 * M, {0.0, -0.5 * upper_arm, 0.0}, {0.09, upper_arm, 0.09}});
    add("elbow" + s, "shoulder" + s, {0.0, -upper_arm, 0.0}, {make_dof("flexion", Z, 0, 150)},
        {0.016 * M, {0.0, -0.5 * forearm, 0.0}, {0.07, forearm, 0.07}});
    add("wrist" + s, "elbow" + s, {0.0, -forearm, 0.0}, {make_dof("flexion", Z, -70, 70)},
        {0.006 * M, {0.0, -0.05, 0.0}, {0.05, 0.10, 0.08}});
    add("hand" + s, "wrist" + s, {0.0, -0.1, 0.0}, {}, {});
  }
  for (const char* sfx : {"_l", "_r"}) {
    const bool left = std::string_view(sfx) == "_l";
    const double lat = left ? -1.0 : 1.0;
    const double mir = left ? 1.0 : -1.0;
    const std::string s = sfx;
    add("hip" + s, "pelvis", {0.0, 0.0, lat * hip_half},
        {make_dof("rotation", mir * Y, -45, 45), make_dof("abduction", mir * X, -30, 45), make_dof("flexion", Z, -30, 120)},
        {0.100 * M, {0.0, -0.5 * thigh, 0.0}, {0.14, thigh, 0.14}});
    add("knee" + s, "hip" + s, {0.0, -thigh, 0.0}, {make_dof("flexion", -Z, 0, 150)},
        {0.0465 * M, {0.0, -0.5 * shank, 0.0}, {0.10, shank, 0.10}});
    add("ankle" + s, "knee" + s, {0.0, -shank, 0.0}, {make_dof("pitch", Z, -45, 45), make_dof("roll", mir * X, -45, 45)},
        {0.0125 * M, {0.05, -0.5 * ankle_h, 0.0}, {0.20, ankle_h, 0.10}});
    add("toe" + s, "ankle" + s, {0.15, -0.7 * ankle_h, 0.0}, {make_dof("flexion", Z, -30, 60)},
        {0.002 * M, {0.03, 0.0, 0.0}, {0.06, 0.02, 0.10}});
  }
  return Skeleton(std::move(js), H, M, ankle_h);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 json_vec(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("skeleton: '" + what + "' must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

json Skeleton::to_json() const {
  json joints = json::array();
  for (const auto& j : joints_) {
    json dofs = json::array();
    for (const auto& d : j.dofs) {
      dofs.push_back({{"name", d.name}, {"axis", vec_json(d.axis)}, {"min_deg", rad2deg(d.min_rad)},
                      {"max_deg", rad2deg(d.max_rad)}});
    }
    joints.push_back({{"name", j.name},
                      {"parent", j.parent < 0 ? json(nullptr) : json(joints_[static_cast<std::size_t>(j.parent)].name)},
                      {"offset", vec_json(j.offset)},
                      {"dofs", dofs},
                      {"segment",
                       {{"mass_kg", j.segment.mass_kg}, {"center", vec_json(j.segment.center)}, {"box", vec_json(j.segment.box)}}}});
  }
  return {{"schema_version", kSchemaVersion}, {"height_m", height_m_}, {"mass_kg", mass_kg_},
          {"ankle_height_m", ankle_height_m_}, {"joints", joints}};
}

Skeleton Skeleton::from_json(const json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw VersionError("skeleton: schema_version " + std::to_string(version) + " unsupported (expected " +
                         std::to_string(kSchemaVersion) + ")");
    }
    std::vector<Joint> joints;
    for (const auto& jj : j.at("joints")) {
      Joint joint;
      joint.name = jj.at("name").get<std::string>();
      if (jj.at("parent").is_null()) {
        joint.parent = -1;
      } else {
        const std::string parent = jj.at("parent").get<std::string>();
        auto it = std::find_if(joints.begin(), joints.end(), [&](const Joint& x) { return x.name == parent; });
        if (it == joints.end()) throw ConfigError("skeleton: parent '" + parent + "' of '" + joint.name + "' not defined earlier");
        joint.parent = static_cast<int>(it - joints.begin());
      }
      joint.offset = json_vec(jj.at("offset"), joint.name + ".offset");
      for (const auto& d : jj.at("dofs")) {
        joint.dofs.push_back({d.at("name").get<std::string>(), json_vec(d.at("axis"), joint.name + ".axis"),
                              deg2rad(d.at("min_deg").get<double>()), deg2rad(d.at("max_deg").get<double>())});
      }
      if (jj.contains("segment")) {
        const auto& s = jj.at("segment");
        joint.segment.mass_kg = s.value("mass_kg", 0.0);
        if (s.contains("center")) joint.segment.center = json_vec(s.at("center"), joint.name + ".segment.center");
        if (s.contains("box")) joint.segment.box = json_vec(s.at("box"), joint.name + ".segment.box");
      }
      joints.push_back(std::move(joint));
    }
    return Skeleton(std::move(joints), j.at("height_m").get<double>(), j.at("mass_kg").get<double>(),
                    j.at("ankle_height_m").get<double>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("skeleton: ") + e.what());
  }
}

Skeleton Skeleton::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("skeleton: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("skeleton: '" + path + "': " + e.what());
  }
  return from_json(j);
}

// ---------------------------------------------------------------------------
// Kinematics

std::vector<JointTransform> forward_kinematics(const Pose& pose, const Skeleton& skel) {
  if (static_cast<int>(pose.joint_angles.size()) != skel.internal_dof_count()) {
    throw ConfigError("forward_kinematics: pose does not match skeleton DOF count");
  }
  const auto& joints = skel.joints();
  std::vector<JointTransform> out(joints.size());
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const Joint& j = joints[i];
    Vec3 pos;
    Mat3 rot;
    if (j.parent < 0) {
      pos = pose.root_position;
      rot = pose.root_orientation.toRotationMatrix();
    } else {
      const auto& p = out[static_cast<std::size_t>(j.parent)];
      pos = p.position + p.rotation * j.offset;
      rot = p.rotation;
    }
    const int base = skel.dof_offset(static_cast<int>(i));
    for (std::size_t k = 0; k < j.dofs.size(); ++k) {
      rot = rot * Eigen::AngleAxisd(pose.joint_angles[static_cast<std::size_t>(base) + k], j.dofs[k].axis).toRotationMatrix();
    }
    out[i] = {pos, rot};
  }
  return out;
}

Mat3 parent_frame_rotation(const std::vector<JointTransform>& fk, const Skeleton& skel, int joint) {
  const Joint& j = skel.joint(joint);
  if (j.parent < 0) return Mat3::Identity();
  return fk[static_cast<std::size_t>(j.parent)].rotation;
}

bool within_limits(const Pose& pose, const Skeleton& skel, double tol) {
  for (int i = 0; i < skel.internal_dof_count(); ++i) {
    const auto& d = skel.dof(i);
    const double a = pose.joint_angles[static_cast<std::size_t>(i)];
    if (a < d.min_rad - tol || a > d.max_rad + tol) return false;
  }
  return true;
}

void clamp_to_limits(Pose& pose, const Skeleton& skel) {
  for (int i = 0; i < skel.internal_dof_count(); ++i) {
    const auto& d = skel.dof(i);
    auto& a = pose.joint_angles[static_cast<std::size_t>(i)];
    a = std::clamp(a, d.min_rad, d.max_rad);
  }
}

}  // namespace slipstep::skeleton
