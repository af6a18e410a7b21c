#include "ftrack/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ftrack/baseline.hpp"
#include "ftrack/csv.hpp"
#include "ftrack/error.hpp"
#include "ftrack/kernels.hpp"

namespace ftrack {
namespace {

using json = nlohmann::json;

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void EnsureDirectory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIoError, "cannot create directory " + dir.string());
  }
}

RunConfig WithPath(const RunConfig& cfg) {
  RunConfig out = cfg;
  if (!out.task.path) LoadPath(out);
  out.task.vehicle = out.vehicle;
  return out;
}

std::size_t ParseCount(std::string_view field) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kMalformedCsv, "expected an integer, got '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::string> SplitHeader(std::string_view header) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = header.find(',', start);
    out.emplace_back(header.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> ControllerAction(const Episode& ep, Controller controller,
                                     const Agent* agent, const PurePursuitConfig& pp) {
  if (controller == Controller::kDdpg) return agent->Policy(ep.observation());
  const TaskConfig& task = ep.config();
  const VehicleParams& p = task.vehicle;
  const double steer =
      PurePursuitSteer(ep.vehicle(), *task.path, pp, p, ep.frenet().s) / p.max_steer;
  if (task.action_mode == ActionMode::kSteerOnly) return {steer};
  const double accel = task.speed_gain * (task.v_ref - ep.vehicle().v) / p.max_accel;
  return {steer, std::clamp(accel, -1.0, 1.0)};
}

std::string EvalCsvLine(std::size_t episode, const EvalSummary& s) {
  return std::to_string(episode) + ',' + FormatShort(s.mean_abs_lateral) + ',' +
         FormatShort(s.rms_lateral) + ',' + FormatShort(s.max_abs_lateral) + ',' +
         FormatShort(s.mean_return) + ',' + FormatShort(s.completion_rate) + '\n';
}

void WriteJson(const std::filesystem::path& file, const json& doc) {
  WriteTextFile(file, doc.dump(2) + "\n");
}

}  // namespace

PathKind ParsePathKind(const std::string& name) {
  if (name == "straight") return PathKind::kStraight;
  if (name == "circle") return PathKind::kCircle;
  if (name == "sine") return PathKind::kSine;
  if (name == "slalom") return PathKind::kSlalom;
  throw Error(ErrorCode::kInvalidParams, "unknown path kind '" + name + "'");
}

std::vector<Waypoint> GeneratePath(PathKind kind, const PathParams& params) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (kind == PathKind::kCircle) {
    if (!(params.radius > 0.0) || !std::isfinite(params.radius) || params.points < 3) {
      throw Error(ErrorCode::kInvalidParams, "circle needs radius > 0 and points >= 3");
    }
    std::vector<Waypoint> out(params.points);
    for (std::size_t i = 0; i < params.points; ++i) {
      const double phi = kTwoPi * static_cast<double>(i) / static_cast<double>(params.points);
      out[i] = {params.radius * std::sin(phi), params.radius - params.radius * std::cos(phi)};
    }
    return out;
  }

  const double length = params.length.value_or(kind == PathKind::kStraight ? 100.0 : 200.0);
  const bool ok = length > 0.0 && std::isfinite(length) && params.step > 0.0 &&
                  std::isfinite(params.step) && params.amplitude > 0.0 &&
                  std::isfinite(params.amplitude) && params.wavelength > 0.0 &&
                  std::isfinite(params.wavelength);
  if (!ok) throw Error(ErrorCode::kInvalidParams, "path parameters must be positive");
  const auto n = static_cast<std::size_t>(std::ceil(length / params.step - 1e-9));
  if (n < 2 || n > 10'000'000) {
    throw Error(ErrorCode::kInvalidParams, "length/step gives too few or too many points");
  }

  std::vector<Waypoint> out(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = std::min(static_cast<double>(i) * params.step, length);
    double y = 0.0;
    if (kind == PathKind::kSine) {
      y = params.amplitude * std::sin(kTwoPi * x / params.wavelength);
    } else if (kind == PathKind::kSlalom) {
      const double phase = x / params.wavelength + x * x / (2.0 * params.wavelength * length);
      y = params.amplitude * std::sin(kTwoPi * phase);
    }
    out[i] = {x, y};
  }
  return out;
}

std::uint64_t DeriveSeed(std::uint64_t base, SeedStream stream, std::uint64_t index) {
  return SplitMix(SplitMix(base ^ (static_cast<std::uint64_t>(stream) << 56)) + index);
}

Controller ParseController(const std::string& name) {
  if (name == "ddpg") return Controller::kDdpg;
  if (name == "pure-pursuit" || name == "pure_pursuit") return Controller::kPurePursuit;
  throw Error(ErrorCode::kConfigInvalid, "unknown controller '" + name + "'");
}

EpisodeTrace RunEpisode(Episode episode, Controller controller, const Agent* agent,
                        const PurePursuitConfig& pp) {
  if (controller == Controller::kDdpg && agent == nullptr) {
    throw Error(ErrorCode::kConfigInvalid, "ddpg controller needs an agent");
  }
  const double dt = episode.config().vehicle.dt;
  EpisodeTrace trace;
  while (!episode.done()) {
    const std::vector<double> action = ControllerAction(episode, controller, agent, pp);
    const StepResult r = episode.Step(action);
    const VehicleState& v = episode.vehicle();
    trace.rows.push_back({static_cast<double>(episode.steps()) * dt, v.x, v.y, v.theta, v.v,
                          r.info.progress, r.info.lateral, r.info.lateral_rate, r.reward});
    trace.episode_return += r.reward;
    trace.termination = r.termination;
  }
  return trace;
}

EvalResult Evaluate(const TaskConfig& task, Controller controller, const Agent* agent,
                    const PurePursuitConfig& pp, std::size_t episodes, std::uint64_t seed) {
  if (controller == Controller::kDdpg && agent == nullptr) {
    throw Error(ErrorCode::kConfigInvalid, "ddpg controller needs an agent");
  }
  Validate(task);
  EvalResult result;
  result.traces.resize(episodes);
  std::vector<std::exception_ptr> errors(episodes);
  const auto n = static_cast<long long>(episodes);

#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      Episode ep = Episode::Reset(task, DeriveSeed(seed, SeedStream::kEvalReset, idx));
      result.traces[idx] = RunEpisode(std::move(ep), controller, agent, pp);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  result.summary = Summarize(result.traces);
  return result;
}

EvalSummary Summarize(const std::vector<EpisodeTrace>& traces) {
  EvalSummary s;
  s.episodes = traces.size();
  if (traces.empty()) return s;
  double sum_abs = 0.0;
  double sum_sq = 0.0;
  double ret = 0.0;
  std::size_t rows = 0;
  std::size_t completed = 0;
  for (const EpisodeTrace& t : traces) {
    for (const TrajectoryRow& r : t.rows) {
      sum_abs += std::abs(r.l);
      sum_sq += r.l * r.l;
      s.max_abs_lateral = std::max(s.max_abs_lateral, std::abs(r.l));
    }
    rows += t.rows.size();
    ret += t.episode_return;
    if (t.termination == Termination::kEndOfPath) ++completed;
  }
  if (rows > 0) {
    s.mean_abs_lateral = sum_abs / static_cast<double>(rows);
    s.rms_lateral = std::sqrt(sum_sq / static_cast<double>(rows));
  }
  s.mean_return = ret / static_cast<double>(traces.size());
  s.completion_rate = static_cast<double>(completed) / static_cast<double>(traces.size());
  return s;
}

std::string TrajectoryCsv(const std::vector<EpisodeTrace>& traces) {
  std::string out = "t,x,y,theta,v,s,l,l_dot,reward\n";
  for (const EpisodeTrace& t : traces) {
    for (const TrajectoryRow& r : t.rows) {
      for (double v : {r.t, r.x, r.y, r.theta, r.v, r.s, r.l, r.l_dot}) {
        out += FormatExact(v);
        out += ',';
      }
      out += FormatExact(r.reward);
      out += '\n';
    }
  }
  return out;
}

json ToJson(const EvalSummary& s) {
  return {{"episodes", s.episodes},
          {"mean_abs_lateral", s.mean_abs_lateral},
          {"rms_lateral", s.rms_lateral},
          {"max_abs_lateral", s.max_abs_lateral},
          {"mean_return", s.mean_return},
          {"completion_rate", s.completion_rate}};
}

void CheckCompatible(const Agent& agent, const TaskConfig& task) {
  const std::size_t obs = ObservationDim(task.obs_mode);
  const std::size_t act = ActionDim(task.action_mode);
  if (agent.obs_dim() != obs || agent.action_dim() != act) {
    throw Error(ErrorCode::kCheckpointMismatch,
                "checkpoint expects obs/action dims " + std::to_string(agent.obs_dim()) + "/" +
                    std::to_string(agent.action_dim()) + ", task has " + std::to_string(obs) +
                    "/" + std::to_string(act));
  }
}

EvalSummary RunEval(const RunConfig& config, Controller controller,
                    const std::optional<std::filesystem::path>& checkpoint,
                    std::size_t episodes, const std::filesystem::path& out_dir) {
  const RunConfig cfg = WithPath(config);
  std::optional<Agent> agent;
  if (controller == Controller::kDdpg) {
    if (!checkpoint) throw Error(ErrorCode::kConfigInvalid, "ddpg evaluation needs --checkpoint");
    agent.emplace(DeserializeAgentText(ReadTextFile(*checkpoint)));
    CheckCompatible(*agent, cfg.task);
  }
  const EvalResult result = Evaluate(cfg.task, controller, agent ? &*agent : nullptr,
                                     cfg.pure_pursuit, episodes, cfg.train.seed);
  EnsureDirectory(out_dir);
  WriteTextFile(out_dir / "trajectory.csv", TrajectoryCsv(result.traces));
  WriteJson(out_dir / "summary.json", ToJson(result.summary));
  return result.summary;
}

std::string ToCsvLine(const MetricsRow& row) {
  return std::to_string(row.episode) + ',' + std::to_string(row.steps) + ',' +
         FormatShort(row.episode_return) + ',' + FormatShort(row.critic_loss_mean) + ',' +
         FormatShort(row.tracking_loss_mean) + ',' + FormatShort(row.rms_lateral) + ',' +
         FormatShort(row.max_lateral) + ',' + FormatShort(row.noise_sigma) + ',' +
         std::to_string(row.updates);
}

std::vector<MetricsRow> ParseMetricsCsv(std::string_view text) {
  const CsvTable table = ParseCsv(text, ErrorCode::kMalformedCsv);
  if (table.header != SplitHeader(kMetricsHeader)) {
    throw Error(ErrorCode::kMalformedCsv, "unexpected metrics header");
  }
  std::vector<MetricsRow> out;
  out.reserve(table.rows.size());
  for (const auto& f : table.rows) {
    MetricsRow r;
    r.episode = ParseCount(f[0]);
    r.steps = ParseCount(f[1]);
    r.episode_return = ParseDouble(f[2]);
    r.critic_loss_mean = ParseDouble(f[3]);
    r.tracking_loss_mean = ParseDouble(f[4]);
    r.rms_lateral = ParseDouble(f[5]);
    r.max_lateral = ParseDouble(f[6]);
    r.noise_sigma = ParseDouble(f[7]);
    r.updates = ParseCount(f[8]);
    out.push_back(r);
  }
  return out;
}

namespace {

std::ofstream OpenOutput(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + file.string());
  return out;
}

void WriteLine(std::ofstream& out, std::string_view line, const std::filesystem::path& file) {
  out << line;
  if (line.empty() || line.back() != '\n') out << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + file.string());
}

}  // namespace

TrainResult RunTrain(const RunConfig& config, const std::filesystem::path& out_dir,
                     std::ostream* log) {
  const RunConfig cfg = WithPath(config);
  const TaskConfig& task = cfg.task;
  Validate(task);
  EnsureDirectory(out_dir);

  Agent agent(ObservationDim(task.obs_mode), ActionDim(task.action_mode), cfg.agent);
  TrainResult result;
  result.metrics_file = out_dir / "metrics.csv";
  result.final_checkpoint = out_dir / "checkpoint_final.json";
  result.best_checkpoint = out_dir / "checkpoint_best.json";
  result.best_eval_return = -std::numeric_limits<double>::infinity();
  WriteJson(out_dir / "config.json", ToJson(cfg));

  // Rows are flushed as episodes finish so long runs can be followed.
  std::ofstream metrics = OpenOutput(result.metrics_file);
  std::ofstream evals = OpenOutput(out_dir / "eval.csv");
  WriteLine(metrics, kMetricsHeader, result.metrics_file);
  WriteLine(evals,
            "episode,mean_abs_lateral,rms_lateral,max_abs_lateral,mean_return,completion_rate",
            out_dir / "eval.csv");
  bool have_best = false;

  for (std::size_t e = 0; e < cfg.train.episodes; ++e) {
    Episode ep = Episode::Reset(task, DeriveSeed(cfg.train.seed, SeedStream::kTrainReset, e));
    MetricsRow row;
    row.episode = e;
    row.noise_sigma = agent.noise_sigma();
    double critic_sum = 0.0;
    double loss_sum = 0.0;
    double lat_sq = 0.0;
    while (!ep.done()) {
      std::vector<double> obs = ep.observation();
      std::vector<double> action = agent.Act(obs, true);
      StepResult r = ep.Step(action);
      row.episode_return += r.reward;
      loss_sum += r.info.tracking_loss;
      lat_sq += r.info.lateral * r.info.lateral;
      row.max_lateral = std::max(row.max_lateral, std::abs(r.info.lateral));
      // Truncation by the step limit is not a terminal state.
      const bool terminal = r.done && r.termination != Termination::kMaxSteps;
      const auto stats = agent.TrainStep(
          Transition{std::move(obs), std::move(action), r.reward, std::move(r.obs), terminal});
      if (stats) {
        critic_sum += stats->critic_loss;
        ++row.updates;
      }
    }
    row.steps = ep.steps();
    const double steps = static_cast<double>(row.steps);
    row.tracking_loss_mean = loss_sum / steps;
    row.rms_lateral = std::sqrt(lat_sq / steps);
    if (row.updates > 0) row.critic_loss_mean = critic_sum / static_cast<double>(row.updates);
    agent.EndEpisode();
    result.metrics.push_back(row);
    WriteLine(metrics, ToCsvLine(row), result.metrics_file);

    if (log) {
      *log << "episode " << e << " steps " << row.steps << " return "
           << FormatShort(row.episode_return) << " critic_loss "
           << FormatShort(row.critic_loss_mean) << " rms_lateral "
           << FormatShort(row.rms_lateral) << '\n';
    }

    if (cfg.train.eval_every > 0 && (e + 1) % cfg.train.eval_every == 0) {
      const EvalResult ev = Evaluate(task, Controller::kDdpg, &agent, cfg.pure_pursuit,
                                     cfg.train.eval_episodes, cfg.train.seed);
      WriteLine(evals, EvalCsvLine(e, ev.summary), out_dir / "eval.csv");
      if (!have_best || ev.summary.mean_return > result.best_eval_return) {
        have_best = true;
        result.best_eval_return = ev.summary.mean_return;
        WriteJson(result.best_checkpoint, SerializeAgent(agent));
      }
      if (log) {
        *log << "eval after episode " << e << " mean_return "
             << FormatShort(ev.summary.mean_return) << " mean_abs_lateral "
             << FormatShort(ev.summary.mean_abs_lateral) << '\n';
      }
    }
  }

  const json final_doc = SerializeAgent(agent);
  WriteJson(result.final_checkpoint, final_doc);
  if (!have_best) {
    WriteJson(result.best_checkpoint, final_doc);
    result.best_eval_return = 0.0;
  }
  return result;
}

std::string TransformCsv(const ReferencePath& path, std::string_view input_csv,
                         std::size_t* failures) {
  const CsvTable table = ParseCsv(input_csv, ErrorCode::kMalformedCsv);
  const std::vector<std::string> expected = {"x", "y", "theta", "v", "a", "kappa"};
  if (table.header != expected) {
    throw Error(ErrorCode::kMalformedCsv, "transform input needs columns x,y,theta,v,a,kappa");
  }
  std::vector<CartesianState> states;
  states.reserve(table.rows.size());
  for (const auto& f : table.rows) {
    states.push_back({ParseDouble(f[0]), ParseDouble(f[1]), ParseDouble(f[2]),
                      ParseDouble(f[3]), ParseDouble(f[4]), ParseDouble(f[5])});
  }
  const std::vector<kernels::FrenetResult> results = kernels::omp::ToFrenet(path, states);

  std::size_t failed = 0;
  std::string out = std::string(kTransformHeader) + "\n";
  for (const kernels::FrenetResult& r : results) {
    if (r.error) {
      ++failed;
      out += ",,,,,,,,";
      out += ToString(*r.error);
      out += '\n';
      continue;
    }
    const FrenetState& f = r.state;
    for (double v : {f.s, f.s_dot, f.s_ddot, f.l, f.l_dot, f.l_ddot, f.l_prime, f.l_dprime}) {
      out += FormatExact(v);
      out += ',';
    }
    out += "ok\n";
  }
  if (failures) *failures = failed;
  return out;
}

std::size_t RunTransform(const std::filesystem::path& path_file,
                         const std::filesystem::path& input,
                         const std::filesystem::path& output) {
  const std::vector<Waypoint> points = LoadWaypoints(path_file);
  std::optional<ReferencePath> path;
  try {
    path.emplace(points);
  } catch (const Error& e) {
    throw Error(ErrorCode::kPathLoadError, e.what());
  }
  const std::string text = ReadTextFile(input);
  std::size_t failures = 0;
  const std::string out = TransformCsv(*path, text, &failures);
  WriteTextFile(output, out);
  return failures;
}

int ExitCodeFor(ErrorCode code) {
  return code == ErrorCode::kIoError || code == ErrorCode::kPathLoadError ? 2 : 1;
}

}  // namespace ftrack
