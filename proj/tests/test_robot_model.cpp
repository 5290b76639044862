#include <orbitarm/robot_model.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace orbitarm;

namespace {

using Mat4 = Eigen::Matrix4d;

// Textbook DH chain with homogeneous matrices: Rz(theta) Tz(d) Tx(a) Rx(alpha).
Mat4 dh(double theta, double d, double a, double alpha) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  Mat4 t;
  t << ct, -st * ca, st * sa, a * ct,
       st, ct * ca, -ct * sa, a * st,
       0, sa, ca, d,
       0, 0, 0, 1;
  return t;
}

Mat4 dh_chain(const JointVec& q) {
  Mat4 t = Mat4::Identity();
  for (int j = 0; j < kArmDof; ++j) t *= dh(q[j], kUr5Dh[j].d, kUr5Dh[j].a, kUr5Dh[j].alpha);
  return t;
}

JointVec random_q(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-kPi, kPi);
  JointVec q;
  for (auto& x : q) x = d(rng);
  return q;
}

}  // namespace

TEST(Ur5, ZeroConfigurationFlange) {
  const ArmModel arm = make_ur5_arm("a", Pose::identity());
  const Vec3 p = forward_kinematics(arm, JointVec::Zero(), Pose::identity()).end_effector.position;
  EXPECT_NEAR(p.x(), -0.81725, 1e-12);
  EXPECT_NEAR(p.y(), -0.19145, 1e-12);
  EXPECT_NEAR(p.z(), -0.005491, 1e-12);
}

TEST(Ur5, ForwardKinematicsMatchesDhOracle) {
  const Pose mount{Vec3(0.37, 0.34, 0.3726), Rotation::from_rpy(0.1, -0.2, 0.3)};
  const Pose base{Vec3(0.5, -0.2, 0.1), Rotation::from_rpy(-0.3, 0.2, 1.0)};
  const ArmModel arm = make_ur5_arm("a", mount);
  Mat4 prefix = Mat4::Identity();
  const Pose bm = base * mount;
  prefix.topLeftCorner<3, 3>() = bm.orientation.matrix();
  prefix.topRightCorner<3, 1>() = bm.position;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const JointVec q = random_q(rng);
    const Mat4 expected = prefix * dh_chain(q);
    const Pose ee = forward_kinematics(arm, q, base).end_effector;
    EXPECT_LT((ee.position - expected.topRightCorner<3, 1>()).norm(), 1e-12);
    EXPECT_LT((ee.orientation.matrix() - expected.topLeftCorner<3, 3>()).norm(), 1e-12);
  }
}

TEST(Ur5, ReachWithinDhBound) {
  // Shoulder-to-flange distance cannot exceed the sum of link lengths and offsets.
  const ArmModel arm = make_ur5_arm("a", Pose::identity());
  double bound = 0.0;
  for (const auto& r : kUr5Dh) bound += std::abs(r.a) + std::abs(r.d);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p = forward_kinematics(arm, random_q(rng), Pose::identity()).end_effector.position;
    EXPECT_LE(p.norm(), bound);
  }
}

TEST(Jacobian, MatchesFiniteDifferences) {
  const RobotModel model = default_robot_model();
  const Pose base{Vec3(0.1, 0.2, -0.1), Rotation::from_rpy(0.2, 0.1, -0.4)};
  std::mt19937_64 rng(4);
  const double h = 1e-6;
  for (int i = 0; i < 50; ++i) {
    const JointVec q = random_q(rng);
    const ArmModel& arm = model.arms[i % 2];
    const Mat66 j = arm_jacobian(arm, q, base);
    for (int c = 0; c < kArmDof; ++c) {
      JointVec qp = q, qm = q;
      qp[c] += h;
      qm[c] -= h;
      const Pose a = forward_kinematics(arm, qp, base).end_effector;
      const Pose b = forward_kinematics(arm, qm, base).end_effector;
      const Vec3 v = (a.position - b.position) / (2 * h);
      const Vec3 w = (a.orientation * b.orientation.inverse()).log() / (2 * h);
      EXPECT_LT((j.block<3, 1>(0, c) - v).norm(), 1e-7);
      EXPECT_LT((j.block<3, 1>(3, c) - w).norm(), 1e-7);
    }
  }
}

TEST(Manipulability, EqualsProductOfSingularValues) {
  const ArmModel arm = make_ur5_arm("a", Pose::identity());
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    const Mat66 j = arm_jacobian(arm, random_q(rng), Pose::identity());
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
    const double prod = svd.singularValues().prod();
    EXPECT_NEAR(manipulability(j), prod, 1e-10 * std::max(1.0, prod));
  }
}

TEST(Manipulability, ZeroAtSingularity) {
  // Wrist joints 4 and 6 aligned (q5 = 0) is a singular configuration.
  const ArmModel arm = make_ur5_arm("a", Pose::identity());
  JointVec q;
  q << 0.3, -1.0, 1.2, 0.4, 0.0, 0.7;
  EXPECT_NEAR(manipulability(arm_jacobian(arm, q, Pose::identity())), 0.0, 1e-8);
}

TEST(Inertia, BoxAndCylinderFormulas) {
  const Mat3 b = box_inertia(12.0, Vec3(1, 2, 3));
  EXPECT_DOUBLE_EQ(b(0, 0), 13.0);
  EXPECT_DOUBLE_EQ(b(1, 1), 10.0);
  EXPECT_DOUBLE_EQ(b(2, 2), 5.0);
  const Mat3 c = cylinder_inertia(2.0, 0.5, 1.0, 2);
  EXPECT_DOUBLE_EQ(c(2, 2), 0.25);
  EXPECT_DOUBLE_EQ(c(0, 0), 2.0 * (0.75 + 1.0) / 12.0);
}

TEST(DefaultModel, MassesAndLayout) {
  const RobotModel m = default_robot_model();
  double arm_mass = 0.0;
  for (double x : kUr5Mass) arm_mass += x;
  EXPECT_NEAR(m.total_mass(), kDefaultBaseMass + 2 * arm_mass, 1e-9);
  EXPECT_EQ(m.arms[0].name, "arm1");
  EXPECT_GT(m.arms[0].mount.position.y(), 0.0);
  EXPECT_LT(m.arms[1].mount.position.y(), 0.0);
}

TEST(WithBaseMass, ScalesInertiaProportionally) {
  const RobotModel m = default_robot_model();
  const RobotModel d = with_base_mass(m, 2.0 * m.base.mass);
  EXPECT_DOUBLE_EQ(d.base.mass, 2.0 * m.base.mass);
  EXPECT_LT((d.base.inertia - 2.0 * m.base.inertia).norm(), 1e-12);
  EXPECT_THROW(with_base_mass(m, 0.0), std::invalid_argument);
  EXPECT_THROW(with_base_mass(m, -1.0), std::invalid_argument);
}
