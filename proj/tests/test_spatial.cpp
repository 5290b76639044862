#include <orbitarm/spatial.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace orbitarm;

namespace {

// Reference wrap using fmod, written independently of wrap_angle.
double wrap_oracle(double a) {
  double r = std::fmod(a + kPi, kTwoPi);
  if (r < 0) r += kTwoPi;
  r -= kPi;
  return r == -kPi ? kPi : r;
}

Mat3 rot_x(double a) {
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}
Mat3 rot_y(double a) {
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}
Mat3 rot_z(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

}  // namespace

TEST(WrapAngle, MatchesFmodReference) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-50.0, 50.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = d(rng);
    EXPECT_NEAR(wrap_angle(a), wrap_oracle(a), 1e-12) << a;
  }
}

TEST(WrapAngle, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
  EXPECT_NEAR(wrap_angle(3.0 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(kPi + 0.1), -kPi + 0.1, 1e-12);
}

TEST(Skew, CrossProduct) {
  const Vec3 a(0.3, -1.2, 2.0), b(-0.7, 0.4, 1.1);
  EXPECT_LT((skew(a) * b - a.cross(b)).norm(), 1e-15);
  EXPECT_LT((skew(a) + skew(a).transpose()).norm(), 1e-15);
}

TEST(Rotation, FromRpyMatchesZyxProduct) {
  const double r = 0.3, p = -0.4, y = 1.1;
  const Mat3 expected = rot_z(y) * rot_y(p) * rot_x(r);
  EXPECT_LT((Rotation::from_rpy(r, p, y).matrix() - expected).norm(), 1e-14);
}

TEST(Rotation, RpyRoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> pitch(-kPi / 2 + 1e-3, kPi / 2 - 1e-3);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 rpy(ang(rng), pitch(rng), ang(rng));
    const RpyResult back = rpy_of(Rotation::from_rpy(rpy));
    ASSERT_FALSE(back.gimbal_lock);
    EXPECT_LT(wrap_angles(back.rpy - rpy).norm(), 1e-9) << rpy.transpose();
  }
}

TEST(Rotation, QuaternionRoundTripThroughMatrix) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    const Rotation a(q);
    EXPECT_NEAR(a.quaternion().norm(), 1.0, 1e-14);
    EXPECT_GE(a.quaternion().w(), 0.0);
    const Rotation b(Eigen::Quaterniond(a.matrix()));
    EXPECT_LT((a.quaternion().coeffs() - b.quaternion().coeffs()).norm(), 1e-12);
  }
}

TEST(Rotation, ExpLogInverse) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Vec3 v(u(rng), u(rng), u(rng));
    v *= 3.0 / std::max(1.0, v.norm());  // angle below pi
    EXPECT_LT((Rotation::exp(v).log() - v).norm(), 1e-12);
  }
  EXPECT_EQ(Rotation::exp(Vec3::Zero()).log(), Vec3::Zero());
}

TEST(Rotation, ComposeAndInverse) {
  const Rotation a = Rotation::from_rpy(0.1, 0.2, 0.3);
  const Rotation b = Rotation::from_rpy(-0.5, 0.4, 2.0);
  EXPECT_LT(((a * b).matrix() - a.matrix() * b.matrix()).norm(), 1e-14);
  EXPECT_LT(((a * a.inverse()).matrix() - Mat3::Identity()).norm(), 1e-14);
}

TEST(Pose, TransformAndInverse) {
  const Pose p{Vec3(1, 2, 3), Rotation::from_rpy(0.4, -0.2, 1.0)};
  const Vec3 x(0.5, -0.1, 0.7);
  EXPECT_LT((p.inverse().transform_point(p.transform_point(x)) - x).norm(), 1e-14);
  const Pose q{Vec3(-1, 0, 0.2), Rotation::from_rpy(1.0, 0.0, -0.3)};
  EXPECT_LT(((p * q).transform_point(x) - p.transform_point(q.transform_point(x))).norm(), 1e-14);
}

TEST(RpyOf, GimbalLockFlaggedAndYawAbsorbsRoll) {
  for (double sign : {1.0, -1.0}) {
    const Rotation r = Rotation::from_rpy(0.3, sign * kPi / 2, 0.5);
    const RpyResult out = rpy_of(r);
    EXPECT_TRUE(out.gimbal_lock);
    EXPECT_EQ(out.rpy.x(), 0.0);
    // Reconstructed rotation must equal the original.
    EXPECT_LT((Rotation::from_rpy(out.rpy).matrix() - r.matrix()).norm(), 1e-6);
  }
}

TEST(OrientationError, PerAxisWrappedDifference) {
  const Rotation cur = Rotation::from_rpy(0.1, 0.2, 3.0);
  const Rotation tgt = Rotation::from_rpy(-0.1, 0.25, -3.0);
  const OrientationError e = orientation_error(cur, tgt);
  EXPECT_NEAR(e.value.x(), -0.2, 1e-9);
  EXPECT_NEAR(e.value.y(), 0.05, 1e-9);
  EXPECT_NEAR(e.value.z(), kTwoPi - 6.0, 1e-9);
  EXPECT_NEAR(e.max_abs(), kTwoPi - 6.0, 1e-9);
  EXPECT_FALSE(e.gimbal_lock);
  EXPECT_LT(orientation_error(cur, cur).value.norm(), 1e-12);
}
