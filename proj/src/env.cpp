#include "ftrack/env.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ftrack/angle.hpp"
#include "ftrack/error.hpp"

namespace ftrack {

std::string ToString(ObsMode m) {
  return m == ObsMode::kFrenet ? "frenet" : "cartesian";
}

std::string ToString(ActionMode m) {
  return m == ActionMode::kSteerOnly ? "steer_only" : "steer_and_accel";
}

ObsMode ParseObsMode(const std::string& name) {
  if (name == "frenet") return ObsMode::kFrenet;
  if (name == "cartesian") return ObsMode::kCartesian;
  throw Error(ErrorCode::kConfigInvalid, "unknown obs_mode '" + name + "'");
}

ActionMode ParseActionMode(const std::string& name) {
  if (name == "steer_only") return ActionMode::kSteerOnly;
  if (name == "steer_and_accel") return ActionMode::kSteerAndAccel;
  throw Error(ErrorCode::kConfigInvalid, "unknown action_mode '" + name + "'");
}

std::string ToString(Termination t) {
  switch (t) {
    case Termination::kNone: return "none";
    case Termination::kOffTrack: return "off_track";
    case Termination::kHeadingSingular: return "heading_singular";
    case Termination::kEndOfPath: return "end_of_path";
    case Termination::kMaxSteps: return "max_steps";
  }
  return "none";
}

void Validate(const TaskConfig& cfg) {
  if (!cfg.path) throw Error(ErrorCode::kConfigInvalid, "task has no reference path");
  try {
    Validate(cfg.vehicle);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigInvalid, e.what());
  }
  const bool ok = cfg.v_ref > 0.0 && cfg.v_ref <= cfg.vehicle.max_speed &&
                  cfg.w_l >= 0.0 && cfg.w_ld >= 0.0 && cfg.w_ldd >= 0.0 &&
                  cfg.offtrack_limit > 0.0 && cfg.max_steps > 0 &&
                  cfg.init_lateral_range >= 0.0 && cfg.init_heading_range >= 0.0 &&
                  cfg.speed_gain >= 0.0 && std::isfinite(cfg.offtrack_penalty);
  if (!ok) throw Error(ErrorCode::kConfigInvalid, "invalid task configuration");
}

std::size_t ObservationDim(ObsMode mode) {
  return mode == ObsMode::kFrenet ? kFrenetObsDim : kCartesianObsDim;
}

std::size_t ActionDim(ActionMode mode) {
  return mode == ActionMode::kSteerOnly ? 1 : 2;
}

double TrackingLoss(const FrenetState& fr, const TaskConfig& cfg) {
  return cfg.w_l * std::abs(fr.l) + cfg.w_ld * std::abs(fr.l_dot) +
         cfg.w_ldd * std::abs(fr.l_ddot);
}

std::vector<double> Observe(const VehicleState& vehicle, const FrenetState& fr,
                            const TaskConfig& cfg) {
  const ReferencePath& path = *cfg.path;
  const double length = path.total_length();
  if (cfg.obs_mode == ObsMode::kFrenet) {
    const double k0 = path.Sample(fr.s).kappa;
    const double k1 = path.Sample(std::min(fr.s + kPreviewNear, length)).kappa;
    const double k2 = path.Sample(std::min(fr.s + kPreviewFar, length)).kappa;
    return {fr.l / cfg.offtrack_limit,
            fr.l_dot / cfg.v_ref,
            fr.l_prime,
            (fr.s_dot - cfg.v_ref) / cfg.v_ref,
            vehicle.v / cfg.vehicle.max_speed,
            k0 / kCurvatureScale,
            k1 / kCurvatureScale,
            k2 / kCurvatureScale};
  }
  const PathSample ref = path.Sample(fr.s);
  const Waypoint& goal = path.waypoints().back();
  return {(vehicle.x - ref.x) / cfg.offtrack_limit,
          (vehicle.y - ref.y) / cfg.offtrack_limit,
          std::cos(vehicle.theta),
          std::sin(vehicle.theta),
          vehicle.v / cfg.vehicle.max_speed,
          (goal.x - vehicle.x) / length,
          (goal.y - vehicle.y) / length};
}

std::vector<double> Observe(const VehicleState& vehicle, const TaskConfig& cfg,
                            std::optional<double> hint_s) {
  const CartesianState cart{vehicle.x, vehicle.y, vehicle.theta, vehicle.v, 0.0, 0.0};
  return Observe(vehicle, ToFrenet(*cfg.path, cart, hint_s), cfg);
}

Episode::Episode(const TaskConfig& cfg, const VehicleState& initial)
    : cfg_(cfg), vehicle_(initial) {
  Validate(cfg_);
  const CartesianState cart{vehicle_.x, vehicle_.y, vehicle_.theta, vehicle_.v,
                            cfg_.speed_gain * (cfg_.v_ref - vehicle_.v), 0.0};
  frenet_ = ToFrenet(*cfg_.path, cart);
  obs_ = Observe(vehicle_, frenet_, cfg_);
}

Episode Episode::Reset(const TaskConfig& cfg, const VehicleState& initial) {
  return Episode(cfg, initial);
}

Episode Episode::Reset(const TaskConfig& cfg, std::uint64_t seed) {
  if (!cfg.path) throw Error(ErrorCode::kConfigInvalid, "task has no reference path");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double offset = cfg.init_lateral_range * unit(rng);
  const double heading = cfg.init_heading_range * unit(rng);

  const PathSample start = cfg.path->Sample(0.0);
  VehicleState v;
  v.x = start.x - offset * std::sin(start.theta);
  v.y = start.y + offset * std::cos(start.theta);
  v.theta = NormalizeAngle(start.theta + heading);
  v.v = cfg.v_ref;
  return Episode(cfg, v);
}

StepResult Episode::Step(std::span<const double> action) {
  if (done_) throw Error(ErrorCode::kEpisodeFinished, "episode already terminated");
  if (action.size() != ActionDim(cfg_.action_mode)) {
    throw Error(ErrorCode::kDimensionMismatch, "action has wrong dimension");
  }
  const VehicleParams& p = cfg_.vehicle;
  const double steer = std::clamp(action[0], -1.0, 1.0) * p.max_steer;
  const double accel = cfg_.action_mode == ActionMode::kSteerAndAccel
                           ? std::clamp(action[1], -1.0, 1.0) * p.max_accel
                           : cfg_.speed_gain * (cfg_.v_ref - vehicle_.v);
  const ControlInput u = ControlInput::Clamped(steer, accel, p);
  vehicle_ = ftrack::Step(vehicle_, u, p);
  ++steps_;

  StepResult result;
  const CartesianState cart{vehicle_.x, vehicle_.y, vehicle_.theta, vehicle_.v,
                            u.accel, MotionCurvature(u, p)};
  try {
    frenet_ = ToFrenet(*cfg_.path, cart, frenet_.s);
  } catch (const Error&) {
    // Heading at or beyond 90 degrees to the path (or otherwise degenerate).
    done_ = true;
    result.obs = obs_;
    result.reward = cfg_.offtrack_penalty;
    result.done = true;
    result.termination = Termination::kHeadingSingular;
    result.info.progress = frenet_.s;
    result.info.lateral = frenet_.l;
    result.info.speed = vehicle_.v;
    return result;
  }

  const double loss = TrackingLoss(frenet_, cfg_);
  result.reward = -loss;
  result.info = {frenet_.l, frenet_.l_dot, frenet_.l_ddot, frenet_.s, vehicle_.v, loss};

  const double length = cfg_.path->total_length();
  if (std::abs(frenet_.l) > cfg_.offtrack_limit) {
    result.reward += cfg_.offtrack_penalty;
    result.termination = Termination::kOffTrack;
  } else if (frenet_.s + std::max(frenet_.s_dot, 0.0) * p.dt >= length) {
    result.termination = Termination::kEndOfPath;
  } else if (steps_ >= cfg_.max_steps) {
    result.termination = Termination::kMaxSteps;
  }
  result.done = result.termination != Termination::kNone;
  done_ = result.done;

  obs_ = Observe(vehicle_, frenet_, cfg_);
  result.obs = obs_;
  return result;
}

}  // namespace ftrack
