#pragma once
// Reward family for dual-arm pose tracking: tanh position reward, the
// infinity-norm cosine orientation reward and its L1 / L2 / mean-cosine
// alternatives, manipulability reward and the success bonus.

#include <orbitarm/robot_model.hpp>
#include <orbitarm/spatial.hpp>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace orbitarm {

enum class OrientationVariant { kMaxCos, kL1, kL2, kMeanCos };

inline OrientationVariant parse_orientation_variant(std::string_view name) {
  if (name == "max_cos") return OrientationVariant::kMaxCos;
  if (name == "l1") return OrientationVariant::kL1;
  if (name == "l2") return OrientationVariant::kL2;
  if (name == "mean_cos") return OrientationVariant::kMeanCos;
  throw std::invalid_argument("unknown orientation reward variant: " + std::string(name));
}

inline std::string to_string(OrientationVariant v) {
  switch (v) {
    case OrientationVariant::kMaxCos: return "max_cos";
    case OrientationVariant::kL1: return "l1";
    case OrientationVariant::kL2: return "l2";
    case OrientationVariant::kMeanCos: return "mean_cos";
  }
  throw std::invalid_argument("unknown orientation reward variant");
}

struct RewardConfig {
  OrientationVariant orientation = OrientationVariant::kMaxCos;
  double w1 = 0.5;
  double w2 = 0.5;
  double success_bonus = 3.0;
  double position_threshold = 0.02;     // m
  double orientation_threshold = 0.05;  // rad, max-axis

  void validate() const {
    if (std::abs(w1 + w2 - 1.0) > 1e-12 || w1 < 0.0 || w2 < 0.0)
      throw std::invalid_argument("manipulability weights must be non-negative and sum to 1");
    if (!(position_threshold > 0.0) || !(orientation_threshold > 0.0))
      throw std::invalid_argument("success thresholds must be positive");
  }
};

/// (1 - tanh|d1|) + (1 - tanh|d2|), in (0, 2].
inline double position_reward(double d1, double d2) {
  return (1.0 - std::tanh(std::abs(d1))) + (1.0 - std::tanh(std::abs(d2)));
}

// Axis holding the largest |error|; ties go to the earlier axis (r, p, y).
inline int max_abs_axis(const Vec3& e) {
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(e[i]) > std::abs(e[k])) k = i;
  return k;
}

/// Single-arm orientation reward for the given variant.
inline double orientation_reward(const Vec3& e, OrientationVariant variant) {
  switch (variant) {
    case OrientationVariant::kMaxCos:
      return std::cos(e.cwiseAbs().maxCoeff());
    case OrientationVariant::kL1:
      return 1.0 - std::tanh(e.cwiseAbs().sum());
    case OrientationVariant::kL2:
      return 1.0 - std::tanh(e.norm());
    case OrientationVariant::kMeanCos:
      return (std::cos(e.x()) + std::cos(e.y()) + std::cos(e.z())) / 3.0;
  }
  throw std::invalid_argument("unknown orientation reward variant");
}

/// cos(max|e_o1|) + cos(max|e_o2|), in [-2, 2].
inline double orientation_reward_max(const Vec3& e1, const Vec3& e2) {
  return orientation_reward(e1, OrientationVariant::kMaxCos) +
         orientation_reward(e2, OrientationVariant::kMaxCos);
}

/// Analytic d r / d e for one arm. Kinks (argmax ties, |e_i| = 0 for L1,
/// e = 0 for L2) take the one-sided value with sign(0) = 0.
inline Vec3 orientation_reward_gradient(const Vec3& e, OrientationVariant variant) {
  Vec3 g = Vec3::Zero();
  switch (variant) {
    case OrientationVariant::kMaxCos: {
      const int k = max_abs_axis(e);
      g[k] = -std::sin(e[k]);
      return g;
    }
    case OrientationVariant::kL1: {
      const double t = std::tanh(e.cwiseAbs().sum());
      for (int i = 0; i < 3; ++i) {
        const double s = (e[i] > 0.0) - (e[i] < 0.0);
        g[i] = -(1.0 - t * t) * s;
      }
      return g;
    }
    case OrientationVariant::kL2: {
      const double n = e.norm();
      if (n == 0.0) return g;
      const double t = std::tanh(n);
      return -(1.0 - t * t) * e / n;
    }
    case OrientationVariant::kMeanCos:
      return -Vec3(std::sin(e.x()), std::sin(e.y()), std::sin(e.z())) / 3.0;
  }
  throw std::invalid_argument("unknown orientation reward variant");
}

template <typename D1, typename D2>
double manipulability_reward(const Eigen::MatrixBase<D1>& j1, const Eigen::MatrixBase<D2>& j2,
                             const RewardConfig& cfg) {
  return cfg.w1 * manipulability(j1) + cfg.w2 * manipulability(j2);
}

/// Both arms within the position and max-axis orientation thresholds (inclusive).
inline bool success(const std::array<double, kNumArms>& distance,
                    const std::array<Vec3, kNumArms>& orientation_error, const RewardConfig& cfg) {
  for (int i = 0; i < kNumArms; ++i) {
    if (!(std::abs(distance[i]) <= cfg.position_threshold)) return false;
    if (!(orientation_error[i].cwiseAbs().maxCoeff() <= cfg.orientation_threshold)) return false;
  }
  return true;
}

struct RewardInputs {
  std::array<double, kNumArms> distance{};
  std::array<Vec3, kNumArms> orientation_error{Vec3::Zero(), Vec3::Zero()};
  std::array<Mat66, kNumArms> jacobian{Mat66::Zero(), Mat66::Zero()};
};

struct RewardBreakdown {
  double position = 0.0;
  double orientation = 0.0;
  double manipulability = 0.0;
  double total = 0.0;
  bool success = false;
};

inline RewardBreakdown total_reward(const RewardInputs& in, const RewardConfig& cfg) {
  RewardBreakdown r;
  r.position = position_reward(in.distance[0], in.distance[1]);
  r.orientation = orientation_reward(in.orientation_error[0], cfg.orientation) +
                  orientation_reward(in.orientation_error[1], cfg.orientation);
  r.manipulability = manipulability_reward(in.jacobian[0], in.jacobian[1], cfg);
  r.success = success(in.distance, in.orientation_error, cfg);
  r.total = r.success ? cfg.success_bonus : r.position + r.orientation + r.manipulability;
  return r;
}

}  // namespace orbitarm
