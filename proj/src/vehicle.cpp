#include "ftrack/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ftrack/angle.hpp"
#include "ftrack/error.hpp"

namespace ftrack {
namespace {

struct Rate {
  double x, y, theta, v;
};

Rate Derivative(double theta, double v, double tan_steer, double accel,
                double wheelbase) {
  return {v * std::cos(theta), v * std::sin(theta), v * tan_steer / wheelbase,
          accel};
}

}  // namespace

void Validate(const VehicleParams& p) {
  const bool ok = p.wheelbase > 0.0 && p.max_steer > 0.0 &&
                  p.max_steer < std::numbers::pi / 2.0 && p.max_accel > 0.0 &&
                  p.max_speed > 0.0 && p.dt > 0.0;
  if (!ok) throw Error(ErrorCode::kInvalidParams, "invalid vehicle parameters");
}

ControlInput ControlInput::Clamped(double steer, double accel,
                                   const VehicleParams& p) {
  return {std::clamp(steer, -p.max_steer, p.max_steer),
          std::clamp(accel, -p.max_accel, p.max_accel)};
}

VehicleState Step(const VehicleState& state, const ControlInput& u,
                  const VehicleParams& p) {
  const ControlInput c = ControlInput::Clamped(u.steer, u.accel, p);
  const double tan_steer = std::tan(c.steer);
  const double h = p.dt;

  const Rate k1 = Derivative(state.theta, state.v, tan_steer, c.accel, p.wheelbase);
  const Rate k2 = Derivative(state.theta + 0.5 * h * k1.theta,
                             state.v + 0.5 * h * k1.v, tan_steer, c.accel,
                             p.wheelbase);
  const Rate k3 = Derivative(state.theta + 0.5 * h * k2.theta,
                             state.v + 0.5 * h * k2.v, tan_steer, c.accel,
                             p.wheelbase);
  const Rate k4 = Derivative(state.theta + h * k3.theta, state.v + h * k3.v,
                             tan_steer, c.accel, p.wheelbase);

  VehicleState next;
  next.x = state.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  next.y = state.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
  next.theta = NormalizeAngle(
      state.theta + h / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta));
  next.v = std::clamp(state.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
                      0.0, p.max_speed);
  return next;
}

double MotionCurvature(const ControlInput& u, const VehicleParams& p) {
  return std::tan(u.steer) / p.wheelbase;
}

}  // namespace ftrack
