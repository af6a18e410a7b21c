#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>

#include "ftrack/baseline.hpp"
#include "ftrack/ddpg.hpp"
#include "ftrack/env.hpp"
#include "ftrack/vehicle.hpp"
#include "json.hpp"

namespace ftrack {

struct TrainSettings {
  std::size_t episodes = 300;
  std::size_t eval_every = 25;
  std::size_t eval_episodes = 5;
  std::uint64_t seed = 0;
};

// One training/evaluation run. `task.path` is empty until LoadPath.
struct RunConfig {
  std::filesystem::path path_file;  // empty: built-in sine path
  VehicleParams vehicle;
  TaskConfig task;
  AgentConfig agent;
  TrainSettings train;
  PurePursuitConfig pure_pursuit;
};

// Every field is optional. Relative path_file entries resolve against
// base_dir. agent.seed defaults to train.seed. Throws kConfigInvalid.
RunConfig ParseRunConfig(const nlohmann::json& doc,
                         const std::filesystem::path& base_dir = {});
// Throws kIoError or kConfigInvalid.
RunConfig LoadRunConfig(const std::filesystem::path& file);

nlohmann::json ToJson(const RunConfig& cfg);

// Loads the reference path and stores it (with the vehicle params) into
// cfg.task. Throws kPathLoadError.
void LoadPath(RunConfig& cfg);

}  // namespace ftrack
