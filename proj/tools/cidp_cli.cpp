// cidp: experiment runner and end-to-end update pipeline.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cidp/bench/calibrate.hpp"
#include "cidp/bench/config.hpp"
#include "cidp/bench/experiment.hpp"
#include "cidp/bench/pipeline.hpp"
#include "cidp/patchgen/firmware.hpp"
#include "cidp/protocol.hpp"
#include "cidp/simnet/topology.hpp"

namespace {

using namespace cidp;
using namespace cidp::bench;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitVerification = 4;

struct CommonFlags {
  std::string config_file;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::string out;
  bool nmax_floor = false;
  bool glossy = false;
  std::optional<unsigned> jobs;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config_file, "key = value config file");
  app->add_option("--preset", f.preset, "preset name (see `presets list`)");
  app->add_option("--seed", f.seed, "seed base");
  app->add_option("--runs", f.runs, "runs per sweep point");
  app->add_option("--out", f.out, "output directory");
  app->add_flag("--nmax-floor", f.nmax_floor, "N_max = floor(log2(N+1))");
  app->add_flag("--glossy-mode", f.glossy, "flood the patch unfragmented");
  app->add_option("--jobs", f.jobs, "worker threads");
}

// preset < config file < CIDP_SEED < command-line flags.
ExperimentConfig resolve_config(const CommonFlags& f, ExperimentConfig base) {
  if (!f.preset.empty()) base = find_preset(f.preset).config;
  if (!f.config_file.empty()) base = load_config(f.config_file, base);
  if (const char* env = std::getenv("CIDP_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      base.seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw BenchError(BenchErrc::config_error,
                       std::string("ConfigError: CIDP_SEED is not an integer: ") + env);
    }
  }
  if (f.seed) base.seed = *f.seed;
  if (f.runs) base.runs = *f.runs;
  if (!f.out.empty()) base.out_dir = f.out;
  if (f.nmax_floor) base.nmax_floor = true;
  if (f.glossy) base.modes = {Mode::glossy};
  if (f.jobs) base.jobs = *f.jobs;
  base.validate();
  return base;
}

int cmd_run(const CommonFlags& f) {
  auto config = resolve_config(f, ExperimentConfig{});
  auto result = run_experiment(config);
  auto files = write_outputs(config, result);
  for (std::size_t m = 0; m < result.modes.size(); ++m) {
    std::cout << "# " << to_string(result.modes[m]) << "\n"
              << aggregate_csv(result.points[m]);
  }
  std::cout << "wrote " << files.size() << " files to " << config.out_dir << "\n";
  return kExitOk;
}

struct PipelineFlags {
  std::string old_path, new_path;
  std::string topology = "line:3";
  std::optional<std::uint64_t> seed;
  double eps = 0;
  std::optional<int> n_max;
  bool nmax_floor = false;
  std::size_t payload = framing::kDefaultPayload;
  std::string store;
};

int cmd_pipeline(const PipelineFlags& f) {
  PipelineInput in;
  try {
    in.old_image = patchgen::load_image(f.old_path);
    in.new_image = patchgen::load_image(f.new_path);
  } catch (const patchgen::PatchError& e) {
    throw BenchError(BenchErrc::config_error, std::string("ConfigError: ") + e.what());
  }
  in.topology = f.topology;
  in.radio.eps_byte = f.eps;
  in.radio.validate();
  in.framing.payload_size = f.payload;
  in.n_max = f.n_max;
  in.nmax_floor = f.nmax_floor;
  in.seed = 1;
  if (const char* env = std::getenv("CIDP_SEED"); env && *env)
    in.seed = std::strtoull(env, nullptr, 10);
  if (f.seed) in.seed = *f.seed;
  in.store_dir = f.store;

  auto report = run_pipeline(in);
  std::cout << format_report(report);
  if (!report.ok()) {
    std::cerr << "VerificationFailure: " << report.delivered() - report.verified()
              << " delivered node(s) failed verification\n";
    return kExitVerification;
  }
  return kExitOk;
}

struct CalibrateFlags {
  CommonFlags common;
  double target = 0.9934;
  double lo = 0.0, hi = 0.02;
  double tolerance = 0.003;
  double resolution = 0.0001;
};

int cmd_calibrate(const CalibrateFlags& f) {
  CalibrationSpec spec;
  CommonFlags common = f.common;
  if (common.preset.empty()) common.preset = "fig8";
  spec.base = resolve_config(common, ExperimentConfig{});
  spec.target = f.target;
  spec.eps_lo = f.lo;
  spec.eps_hi = f.hi;
  spec.tolerance = f.tolerance;
  spec.resolution = f.resolution;
  auto result = calibrate(spec);
  auto record = format_calibration(spec, result);
  std::cout << record;
  if (!common.out.empty()) {
    std::filesystem::create_directories(common.out);
    std::ofstream(std::filesystem::path(common.out) / "calibration.ini") << record;
  }
  return kExitOk;
}

int cmd_presets() {
  for (const auto& p : presets())
    std::cout << p.name << "\t" << p.description << "\n";
  return kExitOk;
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const BenchError& e) {
    std::cerr << e.what() << "\n";
    switch (e.code()) {
      case BenchErrc::config_error: return kExitConfig;
      case BenchErrc::verification_failure: return kExitVerification;
      default: return kExitRuntime;
    }
  } catch (const simnet::SimError& e) {
    std::cerr << e.what() << "\n";
    return e.code() == simnet::SimErrc::invalid_topology ||
                   e.code() == simnet::SimErrc::invalid_params
               ? kExitConfig
               : kExitRuntime;
  } catch (const protocol::ProtocolError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "RuntimeError: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CIDP incremental update dissemination: experiments and pipeline", "cidp"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  auto* run = app.add_subcommand("run", "run a preset or configured experiment");
  add_common(run, run_flags);

  PipelineFlags pipe_flags;
  auto* pipe = app.add_subcommand("pipeline", "diff, disseminate, apply and verify");
  pipe->add_option("--old", pipe_flags.old_path, "old image")->required();
  pipe->add_option("--new", pipe_flags.new_path, "proposed new image")->required();
  pipe->add_option("--topology", pipe_flags.topology, "topology spec");
  pipe->add_option("--seed", pipe_flags.seed, "seed");
  pipe->add_option("--eps", pipe_flags.eps, "per-byte corruption probability");
  pipe->add_option("--nmax", pipe_flags.n_max, "N_max override");
  pipe->add_flag("--nmax-floor", pipe_flags.nmax_floor, "N_max = floor(log2(N+1))");
  pipe->add_option("--payload", pipe_flags.payload, "payload bytes per packet");
  pipe->add_option("--store", pipe_flags.store, "version store directory");

  CalibrateFlags cal_flags;
  auto* cal = app.add_subcommand("calibrate", "fit eps_byte to a Glossy-mode reliability");
  add_common(cal, cal_flags.common);
  cal->add_option("--target", cal_flags.target, "target reliability");
  cal->add_option("--lo", cal_flags.lo, "eps_byte lower bound");
  cal->add_option("--hi", cal_flags.hi, "eps_byte upper bound");
  cal->add_option("--tolerance", cal_flags.tolerance, "accepted |reliability - target|");
  cal->add_option("--resolution", cal_flags.resolution, "bracket width to stop at");

  auto* pre = app.add_subcommand("presets", "preset catalogue");
  pre->require_subcommand(1);
  auto* list = pre->add_subcommand("list", "list presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return guarded([&] { return cmd_run(run_flags); });
  if (*pipe) return guarded([&] { return cmd_pipeline(pipe_flags); });
  if (*cal) return guarded([&] { return cmd_calibrate(cal_flags); });
  if (*list) return guarded([] { return cmd_presets(); });
  return kExitConfig;
}
