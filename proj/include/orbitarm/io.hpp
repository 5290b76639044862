#pragma once
// CSV artifacts with a provenance header, config hashing, and JSON
// (de)serialization of robot descriptions.

#include <orbitarm/robot_model.hpp>
#include <orbitarm/spatial.hpp>

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbitarm {

using json = nlohmann::json;

/// Raised for malformed or inconsistent configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string config_hash(const json& resolved) { return fnv1a_hex(resolved.dump()); }

/// CSV with leading '#' provenance lines:
///   # schema=<name>/<version>
///   # config_hash=<hex>
///   # seed=<n>
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& schema, const std::string& hash,
            std::uint64_t seed, const std::vector<std::string>& columns)
      : out_(path), columns_(columns.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out_ << "# schema=" << schema << "\n# config_hash=" << hash << "\n# seed=" << seed << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
    out_ << std::setprecision(std::numeric_limits<double>::max_digits10);
  }

  class Row {
   public:
    explicit Row(CsvWriter& w) : w_(w) {}
    template <typename T>
    Row& operator<<(const T& v) {
      if (n_++) w_.out_ << ",";
      w_.out_ << v;
      return *this;
    }
    ~Row() {
      if (n_ != w_.columns_) std::fprintf(stderr, "csv row has %zu fields, expected %zu\n", n_, w_.columns_);
      w_.out_ << "\n";
    }

   private:
    CsvWriter& w_;
    std::size_t n_ = 0;
  };

  Row row() { return Row(*this); }
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

// ---------------------------------------------------------------------------
// JSON helpers

/// Throws ConfigError if `j` has keys outside `allowed`.
inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <typename T>
void read_if(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <int N>
Eigen::Matrix<double, N, 1> vec_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(N))
    throw ConfigError(where + ": expected an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": expected numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

template <typename Derived>
json vec_to_json(const Eigen::MatrixBase<Derived>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v.derived()(i));
  return a;
}

inline json mat3_to_json(const Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r) a.push_back(vec_to_json(Vec3(m.row(r).transpose())));
  return a;
}

inline Mat3 mat3_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected a 3x3 array");
  Mat3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = vec_from_json<3>(j[r], where).transpose();
  return m;
}

/// {"position": [x,y,z], "quaternion": [w,x,y,z]} or {"position", "rpy"}.
inline json pose_to_json(const Pose& p) {
  const Eigen::Quaterniond q = p.orientation.quaternion();
  return json{{"position", vec_to_json(p.position)}, {"quaternion", {q.w(), q.x(), q.y(), q.z()}}};
}

inline Pose pose_from_json(const json& j, const std::string& where) {
  check_keys(j, {"position", "quaternion", "rpy"}, where);
  Pose p;
  if (j.contains("position")) p.position = vec_from_json<3>(j["position"], where + ".position");
  if (j.contains("quaternion") && j.contains("rpy"))
    throw ConfigError(where + ": give either quaternion or rpy, not both");
  if (j.contains("quaternion")) {
    const Eigen::Vector4d q = vec_from_json<4>(j["quaternion"], where + ".quaternion");
    if (std::abs(q.norm() - 1.0) > 1e-9) throw ConfigError(where + ".quaternion: not unit length");
    p.orientation = Rotation(Eigen::Quaterniond(q[0], q[1], q[2], q[3]));
  } else if (j.contains("rpy")) {
    p.orientation = Rotation::from_rpy(vec_from_json<3>(j["rpy"], where + ".rpy"));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Robot description

inline constexpr const char* kRobotSchema = "orbitarm.robot/1";

inline json robot_model_to_json(const RobotModel& m) {
  json base{{"mass", m.base.mass},
            {"size", vec_to_json(m.base.size)},
            {"com", vec_to_json(m.base.com)},
            {"inertia", mat3_to_json(m.base.inertia)}};
  json arms = json::array();
  for (const ArmModel& arm : m.arms) {
    json joints = json::array();
    for (int k = 0; k < kArmDof; ++k) {
      const Joint& jt = arm.joints[k];
      const LinkInertia& li = arm.links[k];
      joints.push_back({{"origin", pose_to_json(jt.origin)},
                        {"axis", vec_to_json(jt.axis)},
                        {"angle_limit", jt.angle_limit},
                        {"velocity_limit", jt.velocity_limit},
                        {"link", {{"mass", li.mass}, {"com", vec_to_json(li.com)},
                                  {"inertia", mat3_to_json(li.inertia)}}}});
    }
    arms.push_back({{"name", arm.name},
                    {"mount", pose_to_json(arm.mount)},
                    {"joints", joints},
                    {"tool", pose_to_json(arm.tool)}});
  }
  return json{{"schema", kRobotSchema}, {"base", base}, {"arms", arms}};
}

inline void validate_inertia(const Mat3& inertia, const std::string& where) {
  if (!inertia.isApprox(inertia.transpose(), 1e-12))
    throw ConfigError(where + ": inertia is not symmetric");
  const Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
  if (es.eigenvalues().minCoeff() < 0.0) throw ConfigError(where + ": inertia is not positive semi-definite");
}

inline RobotModel robot_model_from_json(const json& j) {
  check_keys(j, {"schema", "base", "arms"}, "robot");
  if (j.value("schema", std::string()) != kRobotSchema)
    throw ConfigError(std::string("robot: schema must be ") + kRobotSchema);
  RobotModel m;
  const json& b = j.at("base");
  check_keys(b, {"mass", "size", "com", "inertia"}, "robot.base");
  read_if(b, "mass", m.base.mass, "robot.base");
  if (!(m.base.mass > 0.0)) throw ConfigError("robot.base.mass must be positive");
  m.base.size = vec_from_json<3>(b.at("size"), "robot.base.size");
  m.base.com = vec_from_json<3>(b.at("com"), "robot.base.com");
  m.base.inertia = b.contains("inertia") ? mat3_from_json(b["inertia"], "robot.base.inertia")
                                         : box_inertia(m.base.mass, m.base.size);
  validate_inertia(m.base.inertia, "robot.base");

  const json& arms = j.at("arms");
  if (!arms.is_array() || arms.size() != kNumArms) throw ConfigError("robot.arms: expected two arms");
  for (int a = 0; a < kNumArms; ++a) {
    const std::string where = "robot.arms[" + std::to_string(a) + "]";
    const json& ja = arms[a];
    check_keys(ja, {"name", "mount", "joints", "tool"}, where);
    ArmModel& arm = m.arms[a];
    arm.name = ja.value("name", "arm" + std::to_string(a + 1));
    arm.mount = pose_from_json(ja.at("mount"), where + ".mount");
    arm.tool = pose_from_json(ja.at("tool"), where + ".tool");
    const json& js = ja.at("joints");
    if (!js.is_array() || js.size() != kArmDof) throw ConfigError(where + ".joints: expected six joints");
    for (int k = 0; k < kArmDof; ++k) {
      const std::string jw = where + ".joints[" + std::to_string(k) + "]";
      const json& jj = js[k];
      check_keys(jj, {"origin", "axis", "angle_limit", "velocity_limit", "link"}, jw);
      Joint& jt = arm.joints[k];
      jt.origin = pose_from_json(jj.at("origin"), jw + ".origin");
      jt.axis = vec_from_json<3>(jj.at("axis"), jw + ".axis");
      if (std::abs(jt.axis.norm() - 1.0) > 1e-9) throw ConfigError(jw + ".axis: not unit length");
      read_if(jj, "angle_limit", jt.angle_limit, jw);
      read_if(jj, "velocity_limit", jt.velocity_limit, jw);
      if (!(jt.angle_limit > 0.0) || !(jt.velocity_limit > 0.0))
        throw ConfigError(jw + ": limits must be positive");
      const json& jl = jj.at("link");
      check_keys(jl, {"mass", "com", "inertia"}, jw + ".link");
      LinkInertia& li = arm.links[k];
      read_if(jl, "mass", li.mass, jw + ".link");
      if (!(li.mass > 0.0)) throw ConfigError(jw + ".link.mass must be positive");
      li.com = vec_from_json<3>(jl.at("com"), jw + ".link.com");
      li.inertia = mat3_from_json(jl.at("inertia"), jw + ".link.inertia");
      validate_inertia(li.inertia, jw + ".link");
    }
  }
  return m;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline RobotModel load_robot_model(const std::filesystem::path& path) {
  try {
    return robot_model_from_json(read_json_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline void save_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
}

}  // namespace orbitarm
