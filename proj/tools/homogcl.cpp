// homogcl <stage> --config <path> [--out <dir>] [--threads N] [--no-auto]
//
// Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 I/O error,
// 1 anything else. Failures leave error.json in the output directory and the
// same record on stderr.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "homog/config.hpp"
#include "homog/errors.hpp"
#include "homog/output.hpp"
#include "homog/pipeline.hpp"

namespace {

struct Failure {
  int code;
  const char* kind;
};

Failure classify(const std::exception& e) {
  if (dynamic_cast<const homog::ConfigError*>(&e)) return {2, "config"};
  if (dynamic_cast<const homog::InvalidArgument*>(&e)) return {2, "invalid_argument"};
  if (dynamic_cast<const homog::GeometryError*>(&e)) return {2, "geometry"};
  if (dynamic_cast<const homog::SingularSystemError*>(&e)) return {3, "singular_system"};
  if (dynamic_cast<const homog::SolverError*>(&e)) return {3, "divergence"};
  if (dynamic_cast<const homog::IoError*>(&e)) return {4, "io"};
  return {1, "internal"};
}

int report(const std::exception& e, const std::string& stage, const std::filesystem::path& out) {
  const Failure f = classify(e);
  nlohmann::ordered_json j;
  j["error"] = f.kind;
  j["message"] = e.what();
  j["stage"] = stage;
  j["exit_code"] = f.code;
  if (auto* ce = dynamic_cast<const homog::ConfigError*>(&e); ce && ce->line() > 0) j["line"] = ce->line();
  if (auto* se = dynamic_cast<const homog::SingularSystemError*>(&e)) j["equation"] = se->equation();
  const std::string text = j.dump();
  std::cerr << text << "\n";
  if (!out.empty()) {
    try {
      homog::write_text_file(out / "error.json", text + "\n");
    } catch (const std::exception&) {
      // the record on stderr is all we can give
    }
  }
  return f.code;
}

int thread_count(int cli_value) {
  if (cli_value > 0) return cli_value;
  if (const char* env = std::getenv("HOMOGCL_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    throw homog::ConfigError(std::string("HOMOGCL_THREADS must be a positive integer, got ") + env);
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homogenized catalyst-layer transport toolkit"};
  std::string stage_name, config_path, out_dir;
  int threads = 0;
  bool no_auto = false;
  app.add_option("stage", stage_name, "cell | tensors | macro | tdl | channel-validate | micro-study")
      ->required()
      ->check(CLI::IsMember({"cell", "tensors", "macro", "tdl", "channel-validate", "micro-study"}));
  app.add_option("--config", config_path, "run configuration")->required();
  app.add_option("--out", out_dir, "output directory (default: output.dir of the config)");
  app.add_option("--threads", threads, "worker threads (default: HOMOGCL_THREADS or 1)")->check(CLI::PositiveNumber);
  app.add_flag("--no-auto", no_auto, "read upstream artifacts instead of recomputing them");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::filesystem::path out = out_dir;
  try {
    const homog::RunConfig cfg = homog::parse_config(config_path);
    if (out.empty()) out = cfg.output_dir;
    homog::RunOptions opts;
    opts.out_dir = out;
    opts.threads = thread_count(threads);
    opts.auto_upstream = !no_auto;
    const auto result = homog::run_pipeline(cfg, homog::parse_stage(stage_name), opts);
    std::cout << result.summary << "\n";
    for (const auto& a : result.artifacts) std::cout << "  wrote " << a.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    return report(e, stage_name, out);
  }
}
