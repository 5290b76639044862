#pragma once
// Serial 6-DoF arm kinematics (forward kinematics, geometric Jacobian,
// manipulability) and the dual-arm robot description with its UR5 defaults.

#include <orbitarm/spatial.hpp>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace orbitarm {

inline constexpr int kArmDof = 6;
inline constexpr int kNumArms = 2;
inline constexpr int kTotalDof = kArmDof * kNumArms;

using JointVec = Eigen::Matrix<double, kArmDof, 1>;
using Mat66 = Eigen::Matrix<double, 6, kArmDof>;

struct Joint {
  // Parent link frame -> joint frame (before the joint rotation).
  Pose origin;
  Vec3 axis = Vec3::UnitZ();
  double angle_limit = kTwoPi;
  double velocity_limit = kPi;
};

struct LinkInertia {
  double mass = 0.0;
  Vec3 com = Vec3::Zero();           // in the link frame
  Mat3 inertia = Mat3::Identity();   // about the com, link-frame axes
};

struct ArmModel {
  std::string name;
  Pose mount;  // base body frame -> arm base frame
  std::array<Joint, kArmDof> joints;
  std::array<LinkInertia, kArmDof> links;
  Pose tool;   // last link frame -> end-effector frame
};

struct BaseBody {
  double mass = 0.0;
  Vec3 size = Vec3::Zero();  // box edge lengths
  Vec3 com = Vec3::Zero();
  Mat3 inertia = Mat3::Identity();
};

struct RobotModel {
  BaseBody base;
  std::array<ArmModel, kNumArms> arms;

  double total_mass() const {
    double m = base.mass;
    for (const auto& arm : arms)
      for (const auto& l : arm.links) m += l.mass;
    return m;
  }
};

inline Mat3 box_inertia(double mass, const Vec3& size) {
  const double x2 = size.x() * size.x(), y2 = size.y() * size.y(), z2 = size.z() * size.z();
  return (mass / 12.0 * Vec3(y2 + z2, x2 + z2, x2 + y2)).asDiagonal();
}

/// Solid cylinder with its symmetry axis along local `axis` (0=x, 1=y, 2=z).
inline Mat3 cylinder_inertia(double mass, double radius, double length, int axis) {
  const double transverse = mass * (3.0 * radius * radius + length * length) / 12.0;
  Vec3 d = Vec3::Constant(transverse);
  d[axis] = 0.5 * mass * radius * radius;
  return d.asDiagonal();
}

/// Everything downstream needs from one FK pass over an arm.
struct ArmKinematics {
  std::array<Vec3, kArmDof> joint_origins;  // world
  std::array<Vec3, kArmDof> joint_axes;     // world, unit
  std::array<Pose, kArmDof> link_frames;    // world, after each joint rotation
  std::array<Vec3, kArmDof> link_coms;      // world
  Pose end_effector;
};

inline ArmKinematics forward_kinematics(const ArmModel& arm, const JointVec& q,
                                        const Pose& base_pose) {
  ArmKinematics out;
  Pose frame = base_pose * arm.mount;
  for (int j = 0; j < kArmDof; ++j) {
    frame = frame * arm.joints[j].origin;
    out.joint_origins[j] = frame.position;
    out.joint_axes[j] = frame.orientation.rotate(arm.joints[j].axis);
    frame = frame * Pose{Vec3::Zero(), Rotation::about_axis(arm.joints[j].axis, q[j])};
    out.link_frames[j] = frame;
    out.link_coms[j] = frame.transform_point(arm.links[j].com);
  }
  out.end_effector = frame * arm.tool;
  return out;
}

/// Geometric Jacobian of a world-frame point attached to link `last`, columns
/// for joints 0..last; [linear; angular] rows, base held fixed.
inline Mat66 point_jacobian(const ArmKinematics& fk, const Vec3& point, int last) {
  Mat66 j = Mat66::Zero();
  for (int c = 0; c <= last; ++c) {
    j.block<3, 1>(0, c) = fk.joint_axes[c].cross(point - fk.joint_origins[c]);
    j.block<3, 1>(3, c) = fk.joint_axes[c];
  }
  return j;
}

inline Mat66 arm_jacobian(const ArmKinematics& fk) {
  return point_jacobian(fk, fk.end_effector.position, kArmDof - 1);
}

/// End-effector geometric Jacobian in world frame with the base fixed.
inline Mat66 arm_jacobian(const ArmModel& arm, const JointVec& q, const Pose& base_pose) {
  return arm_jacobian(forward_kinematics(arm, q, base_pose));
}

/// sqrt(det(J J^T)), clamped at zero against round-off.
template <typename Derived>
double manipulability(const Eigen::MatrixBase<Derived>& jac) {
  const double det = (jac * jac.transpose()).determinant();
  return std::sqrt(std::max(det, 0.0));
}

// ---------------------------------------------------------------------------
// UR5 defaults

struct DhRow {
  double a, alpha, d;
};

// Manufacturer DH table, flange (tool0) frame.
inline constexpr std::array<DhRow, kArmDof> kUr5Dh = {{
    {0.0, kPi / 2.0, 0.089159},
    {-0.425, 0.0, 0.0},
    {-0.39225, 0.0, 0.0},
    {0.0, kPi / 2.0, 0.10915},
    {0.0, -kPi / 2.0, 0.09465},
    {0.0, 0.0, 0.0823},
}};

inline constexpr std::array<double, kArmDof> kUr5Mass = {3.7, 8.393, 2.275, 1.219, 1.219, 0.1879};

// Centers of mass expressed in the DH frame of each link.
inline const std::array<Vec3, kArmDof>& ur5_dh_coms() {
  static const std::array<Vec3, kArmDof> coms = {
      Vec3(0.0, -0.02561, 0.00193), Vec3(0.2125, 0.0, 0.11336), Vec3(0.15, 0.0, 0.0265),
      Vec3(0.0, -0.0018, 0.01634),  Vec3(0.0, 0.0018, 0.01634), Vec3(0.0, 0.0, -0.001159)};
  return coms;
}

inline Pose dh_fixed_part(const DhRow& row) {
  return Pose{Vec3(0.0, 0.0, row.d), Rotation()} *
         Pose{Vec3(row.a, 0.0, 0.0), Rotation::about_axis(Vec3::UnitX(), row.alpha)};
}

inline ArmModel make_ur5_arm(const std::string& name, const Pose& mount) {
  // Cylinder approximations (radius, length, axis in DH frame) for link inertia.
  struct Cyl {
    double r, len;
    int axis;
  };
  constexpr std::array<Cyl, kArmDof> cyl = {{{0.06, 0.15, 2},
                                             {0.06, 0.56, 0},
                                             {0.06, 0.50, 0},
                                             {0.06, 0.12, 2},
                                             {0.06, 0.12, 2},
                                             {0.0375, 0.0345, 2}}};
  ArmModel arm;
  arm.name = name;
  arm.mount = mount;
  Pose previous_fixed;
  for (int j = 0; j < kArmDof; ++j) {
    const Pose fixed = dh_fixed_part(kUr5Dh[j]);
    Joint joint;
    joint.origin = previous_fixed;
    joint.axis = Vec3::UnitZ();
    joint.angle_limit = (j == 2) ? 3.14159 : 6.28319;
    joint.velocity_limit = 3.14159;
    arm.joints[j] = joint;

    LinkInertia link;
    link.mass = kUr5Mass[j];
    link.com = fixed.transform_point(ur5_dh_coms()[j]);
    const Mat3 r = fixed.orientation.matrix();
    link.inertia = r * cylinder_inertia(link.mass, cyl[j].r, cyl[j].len, cyl[j].axis) * r.transpose();
    arm.links[j] = link;
    previous_fixed = fixed;
  }
  arm.tool = previous_fixed;
  return arm;
}

inline constexpr double kDefaultBaseMass = 419.8441;

inline RobotModel default_robot_model() {
  RobotModel model;
  model.base.mass = kDefaultBaseMass;
  model.base.size = Vec3(0.5326, 0.5326, 0.3);
  model.base.com = Vec3::Zero();
  model.base.inertia = box_inertia(model.base.mass, model.base.size);
  model.arms[0] = make_ur5_arm("arm1", Pose::translation(Vec3(0.37, 0.34, 0.3726)));
  model.arms[1] = make_ur5_arm("arm2", Pose::translation(Vec3(0.37, -0.34, 0.3726)));
  return model;
}

/// Scales base mass and inertia together (the mass-sweep knob).
inline RobotModel with_base_mass(RobotModel model, double mass) {
  if (!(mass > 0.0)) throw std::invalid_argument("base mass must be positive");
  model.base.inertia *= mass / model.base.mass;
  model.base.mass = mass;
  return model;
}

}  // namespace orbitarm
