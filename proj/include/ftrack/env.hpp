#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ftrack/frenet.hpp"
#include "ftrack/refpath.hpp"
#include "ftrack/vehicle.hpp"

namespace ftrack {

enum class ObsMode { kFrenet, kCartesian };
enum class ActionMode { kSteerOnly, kSteerAndAccel };

std::string ToString(ObsMode m);
std::string ToString(ActionMode m);
// Throw kConfigInvalid on unknown names.
ObsMode ParseObsMode(const std::string& name);
ActionMode ParseActionMode(const std::string& name);

inline constexpr std::size_t kFrenetObsDim = 8;
inline constexpr std::size_t kCartesianObsDim = 7;

// Curvature normalization and preview distances for the Frenet observation.
inline constexpr double kCurvatureScale = 0.2;
inline constexpr double kPreviewNear = 5.0;
inline constexpr double kPreviewFar = 10.0;

struct TaskConfig {
  std::shared_ptr<const ReferencePath> path;
  VehicleParams vehicle;
  double v_ref = 8.0;
  ObsMode obs_mode = ObsMode::kFrenet;
  ActionMode action_mode = ActionMode::kSteerOnly;
  double w_l = 1.0;
  double w_ld = 0.2;
  double w_ldd = 0.05;
  double offtrack_limit = 3.0;
  double offtrack_penalty = -10.0;
  std::size_t max_steps = 1000;
  double init_lateral_range = 1.0;  // offset ~ U(-range, range)
  double init_heading_range = 0.2;  // heading error ~ U(-range, range)
  double speed_gain = 1.0;          // 1/s, speed hold in steer-only mode
};

// Throws kConfigInvalid.
void Validate(const TaskConfig& cfg);

std::size_t ObservationDim(ObsMode mode);
std::size_t ActionDim(ActionMode mode);

// Weighted tracking loss w_l|l| + w_ld|l_dot| + w_ldd|l_ddot|; the per-step
// reward is its negative.
double TrackingLoss(const FrenetState& fr, const TaskConfig& cfg);

// Observation vector for the configured mode. Throws kProjectionFailed.
std::vector<double> Observe(const VehicleState& vehicle, const TaskConfig& cfg,
                            std::optional<double> hint_s = std::nullopt);
// Same, reusing an already computed Frenet state of the vehicle.
std::vector<double> Observe(const VehicleState& vehicle, const FrenetState& fr,
                            const TaskConfig& cfg);

enum class Termination { kNone, kOffTrack, kHeadingSingular, kEndOfPath, kMaxSteps };
std::string ToString(Termination t);

struct StepInfo {
  double lateral = 0.0;
  double lateral_rate = 0.0;
  double lateral_acc = 0.0;
  double progress = 0.0;
  double speed = 0.0;
  double tracking_loss = 0.0;
};

struct StepResult {
  std::vector<double> obs;
  double reward = 0.0;
  bool done = false;
  Termination termination = Termination::kNone;
  StepInfo info;
};

// One rollout of the tracking task. Strictly sequential.
class Episode {
 public:
  // Vehicle at s = 0 with random lateral offset and heading error, v = v_ref.
  static Episode Reset(const TaskConfig& cfg, std::uint64_t seed);
  // Starts from an explicit vehicle state.
  static Episode Reset(const TaskConfig& cfg, const VehicleState& initial);

  const std::vector<double>& observation() const { return obs_; }

  // Applies a normalized action in [-1, 1]^n. Throws kEpisodeFinished after
  // termination and kDimensionMismatch on a wrong action size.
  StepResult Step(std::span<const double> action);

  bool done() const { return done_; }
  std::size_t steps() const { return steps_; }
  const VehicleState& vehicle() const { return vehicle_; }
  const FrenetState& frenet() const { return frenet_; }
  const TaskConfig& config() const { return cfg_; }

 private:
  Episode(const TaskConfig& cfg, const VehicleState& initial);

  TaskConfig cfg_;
  VehicleState vehicle_;
  FrenetState frenet_;
  std::vector<double> obs_;
  std::size_t steps_ = 0;
  bool done_ = false;
};

}  // namespace ftrack
