#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ftrack/ddpg.hpp"
#include "ftrack/env.hpp"
#include "ftrack/error.hpp"
#include "ftrack/run_config.hpp"

namespace ftrack {

// ---- gen-path -------------------------------------------------------------

enum class PathKind { kStraight, kCircle, kSine, kSlalom };
PathKind ParsePathKind(const std::string& name);  // throws kInvalidParams

struct PathParams {
  std::optional<double> length;  // straight: 100 m, sine/slalom: 200 m
  double radius = 10.0;
  std::size_t points = 72;  // circle
  double amplitude = 3.0;
  double wavelength = 50.0;
  double step = 1.0;  // sampling interval along x
};

// straight: (0,0)..(length,0). circle: `points` waypoints counter-clockwise on
// a circle through the origin centred at (0, radius), open. sine:
// y = A sin(2 pi x / wavelength). slalom: sine whose wavelength shrinks
// linearly to half by the end. Throws kInvalidParams.
std::vector<Waypoint> GeneratePath(PathKind kind, const PathParams& params);

// ---- seeds ------------------------------------------------------------------

enum class SeedStream : std::uint64_t { kTrainReset = 1, kEvalReset = 2 };
std::uint64_t DeriveSeed(std::uint64_t base, SeedStream stream, std::uint64_t index);

// ---- eval -------------------------------------------------------------------

enum class Controller { kDdpg, kPurePursuit };
Controller ParseController(const std::string& name);  // throws kConfigInvalid

struct TrajectoryRow {
  double t, x, y, theta, v, s, l, l_dot, reward;
};

struct EpisodeTrace {
  std::vector<TrajectoryRow> rows;
  double episode_return = 0.0;
  Termination termination = Termination::kNone;
};

struct EvalSummary {
  std::size_t episodes = 0;
  double mean_abs_lateral = 0.0;
  double rms_lateral = 0.0;
  double max_abs_lateral = 0.0;
  double mean_return = 0.0;
  double completion_rate = 0.0;
};

struct EvalResult {
  EvalSummary summary;
  std::vector<EpisodeTrace> traces;
};

// Rolls one episode to termination with the given greedy controller.
EpisodeTrace RunEpisode(Episode episode, Controller controller, const Agent* agent,
                        const PurePursuitConfig& pp);

// Greedy rollouts of `episodes` episodes, run concurrently on the frozen
// actor and merged by episode index. `agent` is required for kDdpg.
EvalResult Evaluate(const TaskConfig& task, Controller controller,
                    const Agent* agent, const PurePursuitConfig& pp,
                    std::size_t episodes, std::uint64_t seed);
EvalSummary Summarize(const std::vector<EpisodeTrace>& traces);

std::string TrajectoryCsv(const std::vector<EpisodeTrace>& traces);
nlohmann::json ToJson(const EvalSummary& s);

// Throws kCheckpointMismatch if the agent does not fit the task.
void CheckCompatible(const Agent& agent, const TaskConfig& task);

// Writes trajectory.csv and summary.json into out_dir.
EvalSummary RunEval(const RunConfig& cfg, Controller controller,
                    const std::optional<std::filesystem::path>& checkpoint,
                    std::size_t episodes, const std::filesystem::path& out_dir);

// ---- train ------------------------------------------------------------------

struct MetricsRow {
  std::size_t episode = 0;
  std::size_t steps = 0;
  double episode_return = 0.0;
  double critic_loss_mean = 0.0;  // 0 when no update ran
  double tracking_loss_mean = 0.0;  // CSV column eq6_loss_mean
  double rms_lateral = 0.0;
  double max_lateral = 0.0;
  double noise_sigma = 0.0;
  std::size_t updates = 0;
};

inline constexpr const char* kMetricsHeader =
    "episode,steps,return,critic_loss_mean,eq6_loss_mean,rms_lateral,"
    "max_lateral,noise_sigma,updates";
std::string ToCsvLine(const MetricsRow& row);
// Throws kMalformedCsv.
std::vector<MetricsRow> ParseMetricsCsv(std::string_view text);

struct TrainResult {
  std::vector<MetricsRow> metrics;
  std::filesystem::path metrics_file;
  std::filesystem::path final_checkpoint;
  std::filesystem::path best_checkpoint;
  double best_eval_return = 0.0;
};

// Writes metrics.csv, eval.csv, checkpoint_final.json and
// checkpoint_best.json into out_dir. Progress lines go to `log` if given.
TrainResult RunTrain(const RunConfig& cfg, const std::filesystem::path& out_dir,
                     std::ostream* log = nullptr);

// ---- transform --------------------------------------------------------------

inline constexpr const char* kTransformHeader =
    "s,s_dot,s_ddot,l,l_dot,l_ddot,l_prime,l_dprime,status";

// Converts each x,y,theta,v,a,kappa row; rows that fail carry empty numeric
// fields and the error name in `status`. Returns the number of failed rows.
std::size_t RunTransform(const std::filesystem::path& path_file,
                         const std::filesystem::path& input,
                         const std::filesystem::path& output);
std::string TransformCsv(const ReferencePath& path, std::string_view input_csv,
                         std::size_t* failures);

// Process exit code for an error: 2 for I/O, 1 otherwise.
int ExitCodeFor(ErrorCode code);

}  // namespace ftrack
