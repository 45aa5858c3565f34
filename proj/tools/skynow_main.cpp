// skynow - batch CLI over the C API (the CLI links libskynow only).

#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "skynow.h"

namespace {

struct CliOptions {
  std::string config;
  std::string run_dir = ".";
  int threads = 1;
  std::string method = "C";
};

int run_command(const CliOptions& opt, const std::string& command) {
  skynow_run* run = nullptr;
  skynow_status st = skynow_run_open(opt.config.empty() ? nullptr : opt.config.c_str(),
                                     opt.run_dir.c_str(), opt.threads, &run);
  if (st != SKYNOW_OK) return static_cast<int>(st);

  if (command == "synth") st = skynow_cmd_synth(run);
  else if (command == "calibrate") st = skynow_cmd_calibrate(run);
  else if (command == "preprocess") st = skynow_cmd_preprocess(run);
  else if (command == "segment") st = skynow_cmd_segment(run);
  else if (command == "flow") st = skynow_cmd_flow(run);
  else if (command == "cbh") st = skynow_cmd_cbh(run);
  else if (command == "features") st = skynow_cmd_features(run);
  else if (command == "train") st = skynow_cmd_train(run, opt.method.c_str());
  else if (command == "predict") st = skynow_cmd_predict(run, opt.method.c_str());
  else if (command == "evaluate") st = skynow_cmd_evaluate(run);
  else if (command == "importance") st = skynow_cmd_importance(run);
  else if (command == "selftest") st = skynow_cmd_selftest(run, nullptr);

  if (st != SKYNOW_OK)
    std::fprintf(stderr, "skynow %s: %s\n", command.c_str(),
                 skynow_last_error(run));
  skynow_run_close(run);
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sky-image multi-horizon irradiance nowcasting pipeline"};
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("--config,-c", opt.config, "Path to the run config (TOML)");
  app.add_option("--run-dir,-d", opt.run_dir, "Run directory holding inputs and outputs");
  app.add_option("--threads,-t", opt.threads,
                 "Worker cap; 1 selects the bit-exact reference path");

  const struct {
    const char* name;
    const char* help;
    bool has_method;
  } commands[] = {
      {"synth", "Generate the synthetic benchmark suite", false},
      {"calibrate", "Fit lens deviation and azimuth corrections", false},
      {"preprocess", "Undistort and downsample raw frames", false},
      {"segment", "Cloud segmentation per frame", false},
      {"flow", "Dense optical flow and filtered CMV series", false},
      {"cbh", "Stereoscopic cloud base height maps", false},
      {"features", "Assemble the aggregated feature table", false},
      {"train", "Train a forecaster on the train/val split", true},
      {"predict", "Issue multi-horizon forecasts on the test split", true},
      {"evaluate", "Metric tables and figures vs smart persistence", false},
      {"importance", "Permutation feature importance for Method C", false},
      {"selftest", "Run the built-in oracle suite", false},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    if (c.has_method)
      sub->add_option("--method,-m", opt.method, "Forecast method: A, B or C")
          ->check(CLI::IsMember({"A", "B", "C"}));
  }

  CLI11_PARSE(app, argc, argv);
  return run_command(opt, app.get_subcommands().front()->get_name());
}
