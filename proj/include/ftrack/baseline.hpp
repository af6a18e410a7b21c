#pragma once

#include "ftrack/refpath.hpp"
#include "ftrack/vehicle.hpp"

namespace ftrack {

struct PurePursuitConfig {
  double lookahead_base = 3.0;  // m
  double lookahead_gain = 0.5;  // s; lookahead = base + gain * v
};

// Classical pure pursuit: steer = atan(2 L sin(alpha) / d) toward the path
// point at s_r + lookahead, where alpha is its bearing in the vehicle frame
// and d its distance. Clamped to +-max_steer. Throws kProjectionFailed.
double PurePursuitSteer(const VehicleState& state, const ReferencePath& path,
                        const PurePursuitConfig& cfg, const VehicleParams& p,
                        std::optional<double> hint_s = std::nullopt);

}  // namespace ftrack
