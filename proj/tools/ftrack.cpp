// Command-line front end: train, eval, transform, gen-path.
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ftrack/commands.hpp"
#include "ftrack/csv.hpp"
#include "ftrack/error.hpp"
#include "ftrack/run_config.hpp"

namespace {

int Fail(const ftrack::Error& e) {
  std::cerr << "error [" << ftrack::ToString(e.code()) << "]: " << e.what() << '\n';
  return ftrack::ExitCodeFor(e.code());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frenet-frame DDPG path tracking toolkit"};
  app.require_subcommand(1);

  std::string train_config;
  std::string train_out;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "train a DDPG agent");
  train->add_option("--config", train_config, "run configuration (JSON)")->required();
  train->add_option("--out", train_out, "output directory")->required();
  train->add_flag("--quiet", quiet, "suppress per-episode progress");

  std::string eval_checkpoint;
  std::string eval_config;
  std::string eval_controller = "ddpg";
  std::size_t eval_episodes = 5;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "evaluate a controller greedily");
  eval->add_option("--checkpoint", eval_checkpoint, "agent checkpoint (ddpg only)");
  eval->add_option("--config", eval_config, "run configuration (JSON)")->required();
  eval->add_option("--controller", eval_controller, "ddpg or pure-pursuit");
  eval->add_option("--episodes", eval_episodes, "number of episodes")
      ->check(CLI::PositiveNumber);
  eval->add_option("--out", eval_out, "output directory")->required();

  std::string tf_path;
  std::string tf_input;
  std::string tf_output;
  auto* transform = app.add_subcommand("transform", "Cartesian to Frenet batch conversion");
  transform->add_option("--path", tf_path, "reference path waypoints (x,y CSV)")->required();
  transform->add_option("--input", tf_input, "x,y,theta,v,a,kappa CSV")->required();
  transform->add_option("--output", tf_output, "output CSV")->required();

  std::string gp_kind;
  std::string gp_output;
  ftrack::PathParams gp;
  double gp_length = 0.0;
  auto* genpath = app.add_subcommand("gen-path", "write a built-in reference path");
  genpath->add_option("--kind", gp_kind, "straight, circle, sine or slalom")->required();
  auto* length_opt = genpath->add_option("--length", gp_length, "path length along x (m)");
  genpath->add_option("--radius", gp.radius, "circle radius (m)");
  genpath->add_option("--points", gp.points, "circle waypoint count");
  genpath->add_option("--amplitude", gp.amplitude, "sine/slalom amplitude (m)");
  genpath->add_option("--wavelength", gp.wavelength, "sine/slalom wavelength (m)");
  genpath->add_option("--step", gp.step, "sampling step along x (m)");
  genpath->add_option("--output", gp_output, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train) {
      ftrack::RunConfig cfg = ftrack::LoadRunConfig(train_config);
      ftrack::LoadPath(cfg);
      const auto result = ftrack::RunTrain(cfg, train_out, quiet ? nullptr : &std::cout);
      std::cout << "wrote " << result.metrics_file.string() << " and "
                << result.final_checkpoint.string() << '\n';
    } else if (*eval) {
      ftrack::RunConfig cfg = ftrack::LoadRunConfig(eval_config);
      ftrack::LoadPath(cfg);
      const ftrack::Controller controller = ftrack::ParseController(eval_controller);
      std::optional<std::filesystem::path> checkpoint;
      if (!eval_checkpoint.empty()) checkpoint = eval_checkpoint;
      const auto summary = ftrack::RunEval(cfg, controller, checkpoint, eval_episodes, eval_out);
      std::cout << ftrack::ToJson(summary).dump(2) << '\n';
    } else if (*transform) {
      const std::size_t failures = ftrack::RunTransform(tf_path, tf_input, tf_output);
      if (failures > 0) {
        std::cerr << failures << " row(s) could not be transformed\n";
        return 1;
      }
    } else if (*genpath) {
      if (length_opt->count() > 0) gp.length = gp_length;
      const auto points = ftrack::GeneratePath(ftrack::ParsePathKind(gp_kind), gp);
      ftrack::WriteTextFile(gp_output, ftrack::WaypointsToCsv(points));
    }
  } catch (const ftrack::Error& e) {
    return Fail(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
