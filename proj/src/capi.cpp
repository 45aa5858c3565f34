#include "skynow.h"

#include <iostream>
#include <memory>
#include <string>

#include "skynow/pipeline.hpp"

#if defined(_WIN32)
#define SKYNOW_EXPORT __declspec(dllexport)
#else
#define SKYNOW_EXPORT __attribute__((visibility("default")))
#endif

struct skynow_run {
  std::unique_ptr<skynow::Pipeline> pipeline;
  std::string last_error;
};

namespace {

skynow_status guard(skynow_run* run, const std::function<void()>& fn) {
  if (!run) return SKYNOW_ERROR_CONFIG;
  run->last_error.clear();
  try {
    fn();
    return SKYNOW_OK;
  } catch (const skynow::ConfigError& e) {
    run->last_error = e.what();
    return SKYNOW_ERROR_CONFIG;
  } catch (const skynow::DataError& e) {
    run->last_error = e.what();
    return SKYNOW_ERROR_DATA;
  } catch (const skynow::NumericError& e) {
    run->last_error = e.what();
    return SKYNOW_ERROR_NUMERIC;
  } catch (const std::exception& e) {
    run->last_error = e.what();
    return SKYNOW_ERROR;
  }
}

char parse_method(const char* method) {
  if (method && method[1] == '\0' &&
      (method[0] == 'A' || method[0] == 'B' || method[0] == 'C'))
    return method[0];
  throw skynow::ConfigError("method must be one of A, B, C");
}

}  // namespace

extern "C" {

SKYNOW_EXPORT skynow_status skynow_run_open(const char* config_path,
                                            const char* run_dir, int threads,
                                            skynow_run** out_run) {
  if (!out_run || !run_dir) return SKYNOW_ERROR_CONFIG;
  *out_run = nullptr;
  auto run = std::make_unique<skynow_run>();
  const skynow_status st = guard(run.get(), [&] {
    skynow::RunConfig cfg = config_path ? skynow::RunConfig::load(config_path)
                                        : skynow::RunConfig{};
    run->pipeline = std::make_unique<skynow::Pipeline>(
        run_dir, std::move(cfg), threads < 1 ? 1 : threads);
  });
  if (st == SKYNOW_OK) {
    *out_run = run.release();
  } else if (!run->last_error.empty()) {
    std::cerr << "skynow: " << run->last_error << "\n";
  }
  return st;
}

SKYNOW_EXPORT void skynow_run_close(skynow_run* run) { delete run; }

SKYNOW_EXPORT const char* skynow_last_error(const skynow_run* run) {
  return run ? run->last_error.c_str() : "";
}

SKYNOW_EXPORT const char* skynow_version(void) { return "1.0.0"; }

SKYNOW_EXPORT skynow_status skynow_cmd_synth(skynow_run* run) {
  return guard(run, [&] { run->pipeline->cmd_synth(); });
}
SKYNOW_EXPORT skynow_status skynow_cmd_calibrate(skynow_run* run) {
  return guard(run, [&] { run->pipeline->cmd_calibrate(); });
}
SKYNOW_EXPORT skynow_status skynow_cmd_preprocess(skynow_run* run) {
  return guard(run, [&] { run->pipeline->cmd_preprocess(); });
}
SKYNOW_EXPORT skynow_status skynow_cmd_segment(skynow_run* run) {
  return guard(run, [&] { run->pipeline->cmd_segment(); });
}
SKYNOW_EXPORT skynow_status skynow_cmd_flow(skynow_run* run) {
  return guard(run, [&] { run->pipeline->cmd_flow(); });
}
SKYNOW_EXPORT skynow_status skynow_cmd_cbh(skynow_run* run) {
  return guard(run, [&] { run->pipeline->cmd_cbh(); });
}
SKYNOW_EXPORT skynow_status skynow_cmd_features(skynow_run* run) {
  return guard(run, [&] { run->pipeline->cmd_features(); });
}
SKYNOW_EXPORT skynow_status skynow_cmd_train(skynow_run* run,
                                             const char* method) {
  return guard(run, [&] { run->pipeline->cmd_train(parse_method(method)); });
}
SKYNOW_EXPORT skynow_status skynow_cmd_predict(skynow_run* run,
                                               const char* method) {
  return guard(run, [&] { run->pipeline->cmd_predict(parse_method(method)); });
}
SKYNOW_EXPORT skynow_status skynow_cmd_evaluate(skynow_run* run) {
  return guard(run, [&] { run->pipeline->cmd_evaluate(); });
}
SKYNOW_EXPORT skynow_status skynow_cmd_importance(skynow_run* run) {
  return guard(run, [&] { run->pipeline->cmd_importance(); });
}
SKYNOW_EXPORT skynow_status skynow_cmd_selftest(skynow_run* run,
                                                int* fail_count) {
  int failures = 0;
  const skynow_status st =
      guard(run, [&] { failures = run->pipeline->cmd_selftest(std::cout); });
  if (fail_count) *fail_count = failures;
  if (st == SKYNOW_OK && failures > 0) return SKYNOW_ERROR_NUMERIC;
  return st;
}

}  // extern "C"
