#include "cidp/bench/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cidp/simnet/topology.hpp"

namespace cidp::bench {

const char* to_string(BenchErrc code) {
  switch (code) {
    case BenchErrc::config_error: return "ConfigError";
    case BenchErrc::runtime_error: return "RuntimeError";
    case BenchErrc::verification_failure: return "VerificationFailure";
    case BenchErrc::calibration_failed: return "CalibrationFailed";
  }
  return "?";
}

const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::none: return "none";
    case SweepVariable::n: return "N";
    case SweepVariable::l: return "L";
    case SweepVariable::n_max: return "N_max";
    case SweepVariable::eps_byte: return "eps_byte";
    case SweepVariable::sigma_jitter: return "sigma_jitter";
  }
  return "?";
}

const char* to_string(Mode m) { return m == Mode::cidp ? "cidp" : "glossy"; }

namespace {

[[noreturn]] void config_fail(const std::string& msg) {
  throw BenchError(BenchErrc::config_error, "ConfigError: " + msg);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    config_fail(std::string(key) + ": not a number: '" + std::string(v) + "'");
  return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    config_fail(std::string(key) + ": not an unsigned integer: '" +
                std::string(v) + "'");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  config_fail(std::string(key) + ": not a boolean: '" + std::string(v) + "'");
}

std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  while (!v.empty()) {
    auto comma = v.find(',');
    auto item = trim(v.substr(0, comma));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

SweepVariable parse_sweep_variable(std::string_view text) {
  if (text == "none" || text.empty()) return SweepVariable::none;
  if (text == "N") return SweepVariable::n;
  if (text == "L") return SweepVariable::l;
  if (text == "N_max") return SweepVariable::n_max;
  if (text == "eps_byte") return SweepVariable::eps_byte;
  if (text == "sigma_jitter") return SweepVariable::sigma_jitter;
  config_fail("unknown sweep variable '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
  if (runs < 1) config_fail("runs must be >= 1");
  if (jobs < 1) config_fail("jobs must be >= 1");
  if (modes.empty()) config_fail("no modes selected");
  if (framing.payload_size < 1) config_fail("payload_size must be >= 1");
  if (patch_file.empty() && patch_bytes < 1)
    config_fail("patch_bytes must be >= 1");
  if (!patch_file.empty() && !std::filesystem::exists(patch_file))
    config_fail("patch_file does not exist: " + patch_file);
  if (n_max && *n_max < 1) config_fail("n_max must be >= 1");
  if (round_period_us && !(*round_period_us > 0))
    config_fail("round_period_us must be > 0");
  try {
    radio.validate();
    simnet::parse_topology(topology);
  } catch (const simnet::SimError& e) {
    config_fail(e.what());
  }
  if (sweep.variable != SweepVariable::none && sweep.values.empty())
    config_fail("sweep has no values");
  for (double v : sweep.values) {
    switch (sweep.variable) {
      case SweepVariable::n:
      case SweepVariable::l:
      case SweepVariable::n_max:
        if (!(v >= 1) || v != static_cast<double>(static_cast<long long>(v)))
          config_fail(std::string(to_string(sweep.variable)) +
                      " values must be positive integers");
        break;
      case SweepVariable::eps_byte:
        if (!(v >= 0 && v <= 1)) config_fail("eps_byte values must lie in [0,1]");
        break;
      case SweepVariable::sigma_jitter:
        if (!(v >= 0)) config_fail("sigma_jitter values must be >= 0");
        break;
      case SweepVariable::none:
        break;
    }
  }
  if (sweep.variable == SweepVariable::n &&
      std::holds_alternative<simnet::GridSpec>(simnet::parse_topology(topology)))
    config_fail("N sweeps need a line or rgg topology");
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig c) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (auto cut = line.find_first_of("#;"); cut != std::string_view::npos)
      line = line.substr(0, cut);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      config_fail("line " + std::to_string(line_no) + ": expected key = value");
    auto key = trim(line.substr(0, eq));
    auto v = trim(line.substr(eq + 1));

    if (key == "name") c.name = std::string(v);
    else if (key == "topology") c.topology = std::string(v);
    else if (key == "density_scaling") c.density_scaling = to_bool(key, v);
    else if (key == "t_byte_us") c.radio.t_byte_us = to_double(key, v);
    else if (key == "t_proc_us") c.radio.t_proc_us = to_double(key, v);
    else if (key == "sigma_jitter_us") c.radio.sigma_jitter_us = to_double(key, v);
    else if (key == "eps_byte") c.radio.eps_byte = to_double(key, v);
    else if (key == "payload_size") c.framing.payload_size = to_uint(key, v);
    else if (key == "phy_overhead") c.framing.phy_overhead = to_uint(key, v);
    else if (key == "patch_bytes") c.patch_bytes = to_uint(key, v);
    else if (key == "patch_file") c.patch_file = std::string(v);
    else if (key == "n_max") {
      if (v == "auto") c.n_max.reset();
      else c.n_max = static_cast<int>(to_uint(key, v));
    }
    else if (key == "nmax_floor") c.nmax_floor = to_bool(key, v);
    else if (key == "round_period_us") {
      if (v == "auto") c.round_period_us.reset();
      else c.round_period_us = to_double(key, v);
    }
    else if (key == "initiator_retx") c.initiator_retx = to_bool(key, v);
    else if (key == "modes") {
      c.modes.clear();
      for (auto m : split_list(v)) {
        if (m == "cidp") c.modes.push_back(Mode::cidp);
        else if (m == "glossy") c.modes.push_back(Mode::glossy);
        else config_fail("unknown mode '" + std::string(m) + "'");
      }
    }
    else if (key == "glossy_mode") {
      if (to_bool(key, v)) c.modes = {Mode::glossy};
    }
    else if (key == "runs") c.runs = to_uint(key, v);
    else if (key == "seed") c.seed = to_uint(key, v);
    else if (key == "out") c.out_dir = std::string(v);
    else if (key == "jobs") c.jobs = static_cast<unsigned>(to_uint(key, v));
    else if (key == "sweep") c.sweep.variable = parse_sweep_variable(v);
    else if (key == "values") {
      c.sweep.values.clear();
      for (auto item : split_list(v)) c.sweep.values.push_back(to_double(key, item));
    }
    else config_fail("line " + std::to_string(line_no) + ": unknown key '" +
                     std::string(key) + "'");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) config_fail("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "name = " << c.name << '\n'
      << "topology = " << c.topology << '\n'
      << "density_scaling = " << (c.density_scaling ? "true" : "false") << '\n'
      << "t_byte_us = " << fmt_double(c.radio.t_byte_us) << '\n'
      << "t_proc_us = " << fmt_double(c.radio.t_proc_us) << '\n'
      << "sigma_jitter_us = " << fmt_double(c.radio.sigma_jitter_us) << '\n'
      << "eps_byte = " << fmt_double(c.radio.eps_byte) << '\n'
      << "payload_size = " << c.framing.payload_size << '\n'
      << "phy_overhead = " << c.framing.phy_overhead << '\n'
      << "patch_bytes = " << c.patch_bytes << '\n';
  if (!c.patch_file.empty()) out << "patch_file = " << c.patch_file << '\n';
  out << "n_max = " << (c.n_max ? std::to_string(*c.n_max) : "auto") << '\n'
      << "nmax_floor = " << (c.nmax_floor ? "true" : "false") << '\n'
      << "round_period_us = "
      << (c.round_period_us ? fmt_double(*c.round_period_us) : "auto") << '\n'
      << "initiator_retx = " << (c.initiator_retx ? "true" : "false") << '\n'
      << "modes = ";
  for (std::size_t i = 0; i < c.modes.size(); ++i)
    out << (i ? "," : "") << to_string(c.modes[i]);
  out << '\n'
      << "runs = " << c.runs << '\n'
      << "seed = " << c.seed << '\n'
      << "out = " << c.out_dir << '\n'
      << "jobs = " << c.jobs << '\n'
      << "sweep = " << to_string(c.sweep.variable) << '\n'
      << "values = ";
  for (std::size_t i = 0; i < c.sweep.values.size(); ++i)
    out << (i ? "," : "") << fmt_double(c.sweep.values[i]);
  out << '\n';
  return out.str();
}

namespace {

ExperimentConfig calibrated_base() {
  ExperimentConfig c;
  c.radio.eps_byte = kCalibratedEpsByte;
  return c;
}

std::vector<Preset> build_presets() {
  std::vector<Preset> out;
  {
    auto c = calibrated_base();
    c.name = "fig6";
    c.sweep = {SweepVariable::n, {20, 40, 60, 80, 100}};
    c.runs = 200;
    out.push_back({c.name,
                   "reprogramming time vs N, 128-byte patch, constant-density "
                   "RGG; emits latency CDFs",
                   c});
  }
  {
    auto c = calibrated_base();
    c.name = "fig6-m";
    c.topology = "rgg:60:30:80";
    c.sweep = {SweepVariable::l, {36, 72, 108, 144, 180}};
    c.runs = 200;
    out.push_back({c.name,
                   "reprogramming time vs patch length (M = 1..5) on a fixed "
                   "60-node RGG",
                   c});
  }
  {
    auto c = calibrated_base();
    c.name = "fig7";
    c.sweep = {SweepVariable::n, {20, 40, 60, 80, 100}};
    c.runs = 1100;
    out.push_back({c.name,
                   "complete-patch reliability vs N, 128-byte patch, "
                   ">= 2e4 node trials per point",
                   c});
  }
  {
    auto c = calibrated_base();
    c.name = "fig8";
    c.topology = "rgg:94:30:100";
    c.n_max = 6;
    c.modes = {Mode::cidp, Mode::glossy};
    c.sweep = {SweepVariable::l, {8, 36, 64, 128}};
    c.runs = 500;
    out.push_back({c.name,
                   "reliability vs patch length at N = 94, N_max = 6: CIDP "
                   "against unfragmented Glossy-mode floods",
                   c});
  }
  {
    auto c = calibrated_base();
    c.name = "paper-fast";
    c.radio.t_byte_us = 0.4;
    c.radio.t_proc_us = 3.0;
    c.runs = 200;
    out.push_back({c.name,
                   "calibration, not validation: a fast radio (0.4 us/byte, "
                   "3 us turnaround) under which a 128-byte patch reaches 94 "
                   "nodes in < 4 ms",
                   c});
  }
  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build_presets();
  return all;
}

const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  config_fail("unknown preset '" + std::string(name) + "'");
}

}  // namespace cidp::bench
