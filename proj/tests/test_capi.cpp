// C API surface checks: the contract the CLI (and any other binding) uses.

#include <cassert>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "skynow.h"

namespace {

int failures = 0;

void check(bool ok, const char* what) {
  std::printf("%s %s\n", ok ? "[ok]  " : "[FAIL]", what);
  if (!ok) ++failures;
}

}  // namespace

int main() {
  check(std::strcmp(skynow_version(), "") != 0, "version string is non-empty");

  // invalid arguments are configuration errors, not crashes
  skynow_run* run = nullptr;
  check(skynow_run_open("/nonexistent/config.toml", "/tmp/skynow_capi_run", 1,
                        &run) == SKYNOW_ERROR_CONFIG,
        "missing config file reports SKYNOW_ERROR_CONFIG");
  check(run == nullptr, "failed open leaves the handle null");
  check(skynow_run_open(nullptr, nullptr, 1, &run) == SKYNOW_ERROR_CONFIG,
        "null run dir is rejected");

  // malformed config content
  const std::string bad_cfg = "/tmp/skynow_capi_bad.toml";
  {
    std::ofstream out(bad_cfg);
    out << "[solar]\nmystery_key = 1\n";
  }
  check(skynow_run_open(bad_cfg.c_str(), "/tmp/skynow_capi_run", 1, &run) ==
            SKYNOW_ERROR_CONFIG,
        "unknown config key reports SKYNOW_ERROR_CONFIG");
  std::remove(bad_cfg.c_str());

  // a healthy handle with defaults
  check(skynow_run_open(nullptr, "/tmp/skynow_capi_run", 1, &run) == SKYNOW_OK,
        "open with default config succeeds");
  check(run != nullptr, "handle is set");
  check(std::strcmp(skynow_last_error(run), "") == 0,
        "no error message after success");

  // data errors surface with a message and the right class
  check(skynow_cmd_preprocess(run) == SKYNOW_ERROR_DATA,
        "preprocess without inputs reports SKYNOW_ERROR_DATA");
  check(std::strlen(skynow_last_error(run)) > 0,
        "error message is available on the handle");
  check(skynow_cmd_train(run, "Q") == SKYNOW_ERROR_CONFIG,
        "invalid method string is a config error");
  check(skynow_cmd_train(run, nullptr) == SKYNOW_ERROR_CONFIG,
        "null method string is a config error");

  skynow_run_close(run);
  skynow_run_close(nullptr);  // must be safe

  std::filesystem::remove_all("/tmp/skynow_capi_run");
  std::printf(failures == 0 ? "C API checks passed\n"
                            : "C API checks FAILED (%d)\n",
              failures);
  return failures == 0 ? 0 : 1;
}
