#pragma once

namespace ftrack {

struct VehicleParams {
  double wheelbase = 2.5;
  double max_steer = 0.5;
  double max_accel = 3.0;
  double max_speed = 15.0;
  double dt = 0.05;
};

// Throws kInvalidParams unless all fields are positive and max_steer < pi/2.
void Validate(const VehicleParams& p);

// Rear-axle pose and speed of the kinematic bicycle.
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
};

struct ControlInput {
  double steer = 0.0;  // front-wheel angle
  double accel = 0.0;

  // Saturates both channels to the vehicle limits.
  static ControlInput Clamped(double steer, double accel,
                              const VehicleParams& p);
};

// One RK4 step of x' = v cos(theta), y' = v sin(theta),
// theta' = v tan(steer) / L, v' = a over p.dt. Controls are clamped first;
// the resulting speed is clamped to [0, max_speed].
VehicleState Step(const VehicleState& state, const ControlInput& u,
                  const VehicleParams& p);

// tan(steer) / wheelbase.
double MotionCurvature(const ControlInput& u, const VehicleParams& p);

}  // namespace ftrack
