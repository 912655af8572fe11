// Command-line front end. Every failure prints a single line
// "ERROR <CODE>: <message>" to stderr and exits with status 1.

#include "hypervae/app/commands.hpp"
#include "hypervae/error.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <iostream>
#include <map>

namespace {

using hypervae::app::RunConfig;

struct Subcommand {
  CLI::App* app = nullptr;
  std::string config_file;
  std::map<std::string, std::string> values;
};

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

void add_config_flags(Subcommand& sub) {
  sub.app->add_option("--config", sub.config_file, "JSON config file");
  for (const auto& key : hypervae::app::config_keys()) {
    sub.app->add_option(flag_name(key), sub.values[key], "RunConfig field '" + key + "'");
  }
}

RunConfig resolve(const Subcommand& sub) {
  std::map<std::string, std::string> overrides;
  for (const auto& [key, value] : sub.values) {
    if (sub.app->count(flag_name(key)) > 0) overrides.emplace(key, value);
  }
  std::optional<std::filesystem::path> file;
  if (!sub.config_file.empty()) file = sub.config_file;
  return hypervae::app::resolve_config(file, overrides);
}

int run(int argc, char** argv) {
  CLI::App cli{"Hyperspectral ocean-color inversion toolkit (VAE and MDN models)"};
  cli.require_subcommand(1);
  cli.set_version_flag("--version", hypervae::app::toolkit_version);

  auto make = [&](const char* name, const char* help) {
    Subcommand sub;
    sub.app = cli.add_subcommand(name, help);
    return sub;
  };
  Subcommand preprocess = make("preprocess", "QC, resample to the mission grid and split a dataset");
  Subcommand train = make("train", "Train a VAE or MDN and write checkpoint, history and record");
  Subcommand predict = make("predict", "Predict aphy spectra or chla from a checkpoint");
  Subcommand evaluate = make("evaluate", "Overall and 440/620/670 nm metrics of a predictions file");
  Subcommand sweep = make("sweep", "Per-band metric table of a predictions file");
  Subcommand synth = make("gen-synthetic", "Write a synthetic one-to-many or paired dataset");
  // std::map nodes are stable, so option bindings survive these moves.
  for (Subcommand* s : {&preprocess, &train, &predict, &evaluate, &sweep, &synth}) add_config_flags(*s);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ERROR USAGE: " << e.what() << "\n";
    return 2;
  }

  if (*preprocess.app) {
    const auto out = hypervae::app::cmd_preprocess(resolve(preprocess));
    std::cout << "wrote " << out.output.string() << " (" << out.kept << " rows: " << out.train
              << " train, " << out.test << " test; " << out.rejected << " rejected -> "
              << out.rejections.string() << ")\n";
  } else if (*train.app) {
    const auto out = hypervae::app::cmd_train(resolve(train));
    std::cout << "wrote " << out.checkpoint.string() << " after " << out.train_history.epochs()
              << " epochs; history " << out.history.string() << ", record "
              << out.experiment.string() << "\n";
  } else if (*predict.app) {
    const auto out = hypervae::app::cmd_predict(resolve(predict));
    std::cout << "wrote " << out.output.string() << " (" << out.samples << " samples, " << out.rows
              << " rows)\n";
  } else if (*evaluate.app) {
    const RunConfig config = resolve(evaluate);
    std::cout << hypervae::app::cmd_evaluate(config).to_json();
  } else if (*sweep.app) {
    const RunConfig config = resolve(sweep);
    const auto table = hypervae::app::cmd_sweep(config);
    std::cout << "wrote " << (config.output_dir / "sweep.csv").string() << " ("
              << table.band_centers.size() << " bands)\n";
  } else if (*synth.app) {
    std::cout << "wrote " << hypervae::app::cmd_gen_synthetic(resolve(synth)).string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hypervae::Error& e) {
    std::cerr << "ERROR " << hypervae::error_code_name(e.code()) << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "ERROR INTERNAL: " << e.what() << "\n";
  }
  return 1;
}
