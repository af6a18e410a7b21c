#pragma once

#include <optional>

#include "ftrack/refpath.hpp"

namespace ftrack {

struct CartesianState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // heading, (-pi, pi]
  double v = 0.0;      // speed, >= 0
  double a = 0.0;      // longitudinal acceleration along heading
  double kappa = 0.0;  // curvature of the vehicle's own motion
};

// Frenet state; derivatives are w.r.t. time (dot) or path arc length (prime).
struct FrenetState {
  double s = 0.0;
  double s_dot = 0.0;
  double s_ddot = 0.0;
  double l = 0.0;  // positive left of the path
  double l_dot = 0.0;
  double l_ddot = 0.0;
  double l_prime = 0.0;
  double l_dprime = 0.0;
};

// |1 - kappa_r * l| and |cos(dtheta)| below this are singular.
inline constexpr double kFrenetSingularity = 1e-6;

// Throws kSingularCurvature, kHeadingSingular, or kProjectionFailed.
FrenetState ToFrenet(const ReferencePath& path, const CartesianState& cart,
                     std::optional<double> hint_s = std::nullopt,
                     const ProjectOptions& options = {});

// Transform at an already-matched reference point; no projection.
FrenetState ToFrenetAt(const PathSample& ref, const CartesianState& cart);

// Throws kSingularCurvature or kOutOfRange.
CartesianState ToCartesian(const ReferencePath& path, const FrenetState& fr);

}  // namespace ftrack
