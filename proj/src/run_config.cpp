#include "ftrack/run_config.hpp"

#include <string>

#include "ftrack/commands.hpp"
#include "ftrack/csv.hpp"
#include "ftrack/error.hpp"
#include "json_util.hpp"

namespace ftrack {
namespace {

using json = nlohmann::json;
using detail::ReadField;
using detail::RejectUnknownKeys;

void ParseVehicle(const json& j, VehicleParams& p) {
  RejectUnknownKeys(j, {"wheelbase", "max_steer", "max_accel", "max_speed", "dt"}, "vehicle");
  ReadField(j, "wheelbase", p.wheelbase);
  ReadField(j, "max_steer", p.max_steer);
  ReadField(j, "max_accel", p.max_accel);
  ReadField(j, "max_speed", p.max_speed);
  ReadField(j, "dt", p.dt);
}

void ParseTask(const json& j, TaskConfig& t) {
  RejectUnknownKeys(j,
                    {"v_ref", "obs_mode", "action_mode", "w_l", "w_ld", "w_ldd",
                     "offtrack_limit", "offtrack_penalty", "max_steps",
                     "init_lateral_range", "init_heading_range", "speed_gain"},
                    "task");
  ReadField(j, "v_ref", t.v_ref);
  std::string mode;
  ReadField(j, "obs_mode", mode);
  if (!mode.empty()) t.obs_mode = ParseObsMode(mode);
  mode.clear();
  ReadField(j, "action_mode", mode);
  if (!mode.empty()) t.action_mode = ParseActionMode(mode);
  ReadField(j, "w_l", t.w_l);
  ReadField(j, "w_ld", t.w_ld);
  ReadField(j, "w_ldd", t.w_ldd);
  ReadField(j, "offtrack_limit", t.offtrack_limit);
  ReadField(j, "offtrack_penalty", t.offtrack_penalty);
  ReadField(j, "max_steps", t.max_steps);
  ReadField(j, "init_lateral_range", t.init_lateral_range);
  ReadField(j, "init_heading_range", t.init_heading_range);
  ReadField(j, "speed_gain", t.speed_gain);
}

void ParseTrain(const json& j, TrainSettings& t) {
  RejectUnknownKeys(j, {"episodes", "eval_every", "eval_episodes", "seed"}, "train");
  ReadField(j, "episodes", t.episodes);
  ReadField(j, "eval_every", t.eval_every);
  ReadField(j, "eval_episodes", t.eval_episodes);
  ReadField(j, "seed", t.seed);
}

void ParsePurePursuit(const json& j, PurePursuitConfig& p) {
  RejectUnknownKeys(j, {"lookahead_base", "lookahead_gain"}, "pure_pursuit");
  ReadField(j, "lookahead_base", p.lookahead_base);
  ReadField(j, "lookahead_gain", p.lookahead_gain);
  if (!(p.lookahead_base > 0.0) || !(p.lookahead_gain >= 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "invalid pure_pursuit lookahead");
  }
}

}  // namespace

RunConfig ParseRunConfig(const json& doc, const std::filesystem::path& base_dir) {
  RejectUnknownKeys(doc, {"path_file", "vehicle", "task", "agent", "train", "pure_pursuit"},
                    "run configuration");
  RunConfig cfg;
  std::string path_file;
  ReadField(doc, "path_file", path_file);
  if (!path_file.empty()) {
    std::filesystem::path p(path_file);
    cfg.path_file = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  if (doc.contains("vehicle")) ParseVehicle(doc.at("vehicle"), cfg.vehicle);
  if (doc.contains("task")) ParseTask(doc.at("task"), cfg.task);
  if (doc.contains("train")) ParseTrain(doc.at("train"), cfg.train);
  if (doc.contains("pure_pursuit")) ParsePurePursuit(doc.at("pure_pursuit"), cfg.pure_pursuit);

  AgentConfig agent_base;
  agent_base.seed = cfg.train.seed;
  cfg.agent = doc.contains("agent") ? AgentConfigFromJson(doc.at("agent"), agent_base)
                                    : agent_base;

  try {
    Validate(cfg.vehicle);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigInvalid, e.what());
  }
  cfg.task.vehicle = cfg.vehicle;
  const TaskConfig& t = cfg.task;
  const bool task_ok = t.v_ref > 0.0 && t.v_ref <= cfg.vehicle.max_speed && t.w_l >= 0.0 &&
                       t.w_ld >= 0.0 && t.w_ldd >= 0.0 && t.offtrack_limit > 0.0 &&
                       t.max_steps > 0 && t.init_lateral_range >= 0.0 &&
                       t.init_heading_range >= 0.0 && t.speed_gain >= 0.0;
  if (!task_ok) throw Error(ErrorCode::kConfigInvalid, "invalid task section");
  if (cfg.train.eval_episodes == 0) {
    throw Error(ErrorCode::kConfigInvalid, "train.eval_episodes must be >= 1");
  }
  return cfg;
}

RunConfig LoadRunConfig(const std::filesystem::path& file) {
  const std::string text = ReadTextFile(file);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, file.string() + ": " + e.what());
  }
  return ParseRunConfig(doc, file.parent_path());
}

json ToJson(const RunConfig& cfg) {
  const TaskConfig& t = cfg.task;
  const VehicleParams& v = cfg.vehicle;
  json doc = {
      {"vehicle",
       {{"wheelbase", v.wheelbase},
        {"max_steer", v.max_steer},
        {"max_accel", v.max_accel},
        {"max_speed", v.max_speed},
        {"dt", v.dt}}},
      {"task",
       {{"v_ref", t.v_ref},
        {"obs_mode", ToString(t.obs_mode)},
        {"action_mode", ToString(t.action_mode)},
        {"w_l", t.w_l},
        {"w_ld", t.w_ld},
        {"w_ldd", t.w_ldd},
        {"offtrack_limit", t.offtrack_limit},
        {"offtrack_penalty", t.offtrack_penalty},
        {"max_steps", t.max_steps},
        {"init_lateral_range", t.init_lateral_range},
        {"init_heading_range", t.init_heading_range},
        {"speed_gain", t.speed_gain}}},
      {"agent", ToJson(cfg.agent)},
      {"train",
       {{"episodes", cfg.train.episodes},
        {"eval_every", cfg.train.eval_every},
        {"eval_episodes", cfg.train.eval_episodes},
        {"seed", cfg.train.seed}}},
      {"pure_pursuit",
       {{"lookahead_base", cfg.pure_pursuit.lookahead_base},
        {"lookahead_gain", cfg.pure_pursuit.lookahead_gain}}}};
  if (!cfg.path_file.empty()) doc["path_file"] = cfg.path_file.string();
  return doc;
}

void LoadPath(RunConfig& cfg) {
  std::vector<Waypoint> points;
  if (cfg.path_file.empty()) {
    points = GeneratePath(PathKind::kSine, PathParams{});
  } else {
    points = LoadWaypoints(cfg.path_file);
  }
  try {
    cfg.task.path = std::make_shared<const ReferencePath>(points);
  } catch (const Error& e) {
    throw Error(ErrorCode::kPathLoadError, e.what());
  }
  cfg.task.vehicle = cfg.vehicle;
}

}  // namespace ftrack
