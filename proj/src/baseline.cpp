#include "ftrack/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "ftrack/error.hpp"

namespace ftrack {

double PurePursuitSteer(const VehicleState& state, const ReferencePath& path,
                        const PurePursuitConfig& cfg, const VehicleParams& p,
                        std::optional<double> hint_s) {
  double s_r = 0.0;
  try {
    s_r = path.Project(state.x, state.y, hint_s);
  } catch (const Error& e) {
    throw Error(ErrorCode::kProjectionFailed, e.what());
  }
  const double lookahead = cfg.lookahead_base + cfg.lookahead_gain * state.v;
  const PathSample target =
      path.Sample(std::min(path.total_length(), s_r + lookahead));

  const double dx = target.x - state.x;
  const double dy = target.y - state.y;
  const double dist = std::hypot(dx, dy);
  if (dist < 1e-9) return 0.0;
  const double alpha = std::atan2(dy, dx) - state.theta;
  const double steer = std::atan(2.0 * p.wheelbase * std::sin(alpha) / dist);
  return std::clamp(steer, -p.max_steer, p.max_steer);
}

}  // namespace ftrack
