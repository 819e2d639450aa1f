#include "cidp/bench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "cidp/bench/svg.hpp"
#include "cidp/simnet/rng.hpp"

namespace cidp::bench {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw BenchError(BenchErrc::config_error,
                     "ConfigError: cannot read patch file " + path);
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out)
    throw BenchError(BenchErrc::runtime_error,
                     "RuntimeError: cannot write " + path.string());
}

simnet::TopologySpec with_node_count(simnet::TopologySpec spec,
                                     std::uint32_t n, bool density_scaling) {
  if (auto* line = std::get_if<simnet::LineSpec>(&spec)) {
    line->nodes = n;
  } else if (auto* rgg = std::get_if<simnet::RggSpec>(&spec)) {
    if (density_scaling)
      rgg->side *= std::sqrt(static_cast<double>(n) / rgg->nodes);
    rgg->nodes = n;
  }
  return spec;
}

}  // namespace

Bytes synthetic_object(std::size_t size) {
  Bytes out(size);
  std::uint64_t state = 0x5EED;
  for (auto& b : out) {
    state = simnet::mix_seed(state, 1);
    b = static_cast<std::uint8_t>(state >> 56);
  }
  return out;
}

std::string format_value(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15)
    return std::to_string(static_cast<long long>(v));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

PointSetup resolve_point(const ExperimentConfig& config, Mode mode,
                         std::optional<double> value) {
  PointSetup p;
  p.mode = mode;
  p.topology = simnet::parse_topology(config.topology);
  p.radio = config.radio;
  p.framing = config.framing;
  p.round_period_us = config.round_period_us;
  p.initiator_retx = config.initiator_retx;

  std::optional<std::size_t> length;
  std::optional<int> n_max = config.n_max;
  const auto var = config.sweep.variable;
  if (value) {
    switch (var) {
      case SweepVariable::n:
        p.topology = with_node_count(p.topology, static_cast<std::uint32_t>(*value),
                                     config.density_scaling);
        break;
      case SweepVariable::l: length = static_cast<std::size_t>(*value); break;
      case SweepVariable::n_max: n_max = static_cast<int>(*value); break;
      case SweepVariable::eps_byte: p.radio.eps_byte = *value; break;
      case SweepVariable::sigma_jitter: p.radio.sigma_jitter_us = *value; break;
      case SweepVariable::none: break;
    }
  }

  if (length) p.object = synthetic_object(*length);
  else if (!config.patch_file.empty()) p.object = read_file(config.patch_file);
  else p.object = synthetic_object(config.patch_bytes);
  if (p.object.empty())
    throw BenchError(BenchErrc::config_error, "ConfigError: empty patch");

  // Glossy-mode floods the whole object as a single packet.
  if (mode == Mode::glossy) p.framing.payload_size = p.object.size();

  const auto nodes = simnet::node_count(p.topology);
  p.n_max = n_max ? *n_max
                  : (config.nmax_floor ? protocol::compute_nmax_floor(nodes)
                                       : protocol::compute_nmax(nodes));

  if (value && var != SweepVariable::none) {
    p.variable = to_string(var);
    p.value = *value;
  } else {
    p.variable = "N";
    p.value = nodes;
  }
  return p;
}

PointResult run_point(const PointSetup& setup, std::size_t runs,
                      std::uint64_t seed, unsigned jobs,
                      const simnet::SimOptions& options) {
  const auto packets = framing::fragment(setup.object, setup.framing, 1);
  std::optional<simnet::Nanos> round_period;
  if (setup.round_period_us) round_period = simnet::from_us(*setup.round_period_us);

  PointResult result;
  result.setup = setup;
  result.runs.resize(runs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= runs) return;
      try {
        const std::uint64_t s = seed + i;
        auto topo = simnet::build_topology(setup.topology, s);
        auto proto = simnet::make_protocol_params(topo, setup.radio, setup.framing,
                                                  setup.n_max, round_period,
                                                  setup.initiator_retx);
        result.runs[i] = simnet::run_dissemination(topo, setup.radio, proto,
                                                   setup.framing, packets, s,
                                                   options);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = runs;
        return;
      }
    }
  };

  unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(runs)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  result.metrics = simnet::compute_metrics(result.runs);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult out;
  out.modes = config.modes;
  for (Mode mode : config.modes) {
    std::vector<PointResult> points;
    if (config.sweep.variable == SweepVariable::none) {
      points.push_back(run_point(resolve_point(config, mode, std::nullopt),
                                 config.runs, config.seed, config.jobs));
    } else {
      for (double v : config.sweep.values)
        points.push_back(run_point(resolve_point(config, mode, v), config.runs,
                                   config.seed, config.jobs));
    }
    out.points.push_back(std::move(points));
  }
  return out;
}

std::string raw_csv(const PointResult& point) {
  std::string out = simnet::csv_header(point.runs.empty() ? 0 : point.runs.front().packets);
  for (const auto& run : point.runs) out += simnet::csv_rows(run);
  return out;
}

std::string aggregate_csv(const std::vector<PointResult>& points) {
  std::string out = "variable,value,reliability,rel_stderr,mean_latency_us,p50,p90,p99\n";
  for (const auto& p : points) {
    const auto& m = p.metrics;
    out += p.setup.variable + ',' + format_value(p.setup.value) + ',' +
           fixed(m.reliability, 9) + ',' + fixed(m.reliability_stderr, 9) + ',';
    if (m.latency_us.empty()) {
      out += ",,,\n";
    } else {
      out += fixed(m.mean_latency_us, 3) + ',' + fixed(m.p50_us, 3) + ',' +
             fixed(m.p90_us, 3) + ',' + fixed(m.p99_us, 3) + '\n';
    }
  }
  return out;
}

std::string summary_csv(const std::vector<PointResult>& points) {
  std::string out =
      "variable,value,runs,node_trials,delivered,reliability,run_reliability,"
      "packet_reliability,packets,n_max,slot_us,round_period_us,"
      "mean_latency_us,latency_stderr_us,max_round_transmissions\n";
  for (const auto& p : points) {
    const auto& m = p.metrics;
    int max_tx = 0;
    for (const auto& r : p.runs) max_tx = std::max(max_tx, r.max_round_transmissions);
    const auto& first = p.runs.front();
    out += p.setup.variable + ',' + format_value(p.setup.value) + ',' +
           std::to_string(m.runs) + ',' + std::to_string(m.node_trials) + ',' +
           std::to_string(m.delivered) + ',' + fixed(m.reliability, 9) + ',' +
           fixed(m.run_reliability, 9) + ',' + fixed(m.packet_reliability, 9) +
           ',' + std::to_string(first.packets) + ',' +
           std::to_string(first.n_max) + ',' +
           fixed(simnet::to_us(first.slot), 3) + ',' +
           fixed(simnet::to_us(first.round_period), 3) + ',' +
           (m.latency_us.empty() ? "" : fixed(m.mean_latency_us, 3)) + ',' +
           (m.latency_us.empty() ? "" : fixed(m.latency_stderr_us, 3)) + ',' +
           std::to_string(max_tx) + '\n';
  }
  return out;
}

std::string latency_cdf_csv(const std::vector<PointResult>& points) {
  std::string out = "variable,value,scope,run,quantile,completion_us\n";
  for (const auto& p : points) {
    const auto prefix = p.setup.variable + ',' + format_value(p.setup.value) + ',';
    for (auto [q, t] : p.metrics.latency_cdf)
      out += prefix + "pooled,," + fixed(q, 2) + ',' + fixed(t, 3) + '\n';
    for (std::size_t r = 0; r < p.runs.size(); ++r) {
      std::vector<double> lat;
      for (std::size_t i = 1; i < p.runs[r].nodes.size(); ++i)
        if (const auto& c = p.runs[r].nodes[i].completion)
          lat.push_back(simnet::to_us(*c));
      if (lat.empty()) continue;
      std::sort(lat.begin(), lat.end());
      for (double q : simnet::kCdfQuantiles)
        out += prefix + "run," + std::to_string(p.runs[r].seed) + ',' +
               fixed(q, 2) + ',' + fixed(simnet::quantile(lat, q), 3) + '\n';
    }
  }
  return out;
}

std::string reliability_cdf_csv(const std::vector<PointResult>& points) {
  std::string out = "variable,value,fraction_of_runs,run_reliability\n";
  for (const auto& p : points) {
    const auto& rel = p.metrics.run_reliabilities;
    for (std::size_t i = 0; i < rel.size(); ++i) {
      // Emit only the last rank of each distinct value.
      if (i + 1 < rel.size() && rel[i + 1] == rel[i]) continue;
      out += p.setup.variable + ',' + format_value(p.setup.value) + ',' +
             fixed(static_cast<double>(i + 1) / rel.size(), 6) + ',' +
             fixed(rel[i], 6) + '\n';
    }
  }
  return out;
}

std::string latency_by_hops_csv(const std::vector<PointResult>& points) {
  std::string out =
      "variable,value,hops,node_trials,delivered,reliability,mean_completion_us\n";
  for (const auto& p : points) {
    struct Acc { std::size_t trials = 0, delivered = 0; double sum = 0; };
    std::map<int, Acc> by_hops;
    for (const auto& run : p.runs)
      for (std::size_t i = 1; i < run.nodes.size(); ++i) {
        auto& a = by_hops[run.nodes[i].hops];
        ++a.trials;
        if (run.nodes[i].completion) {
          ++a.delivered;
          a.sum += simnet::to_us(*run.nodes[i].completion);
        }
      }
    for (const auto& [h, a] : by_hops)
      out += p.setup.variable + ',' + format_value(p.setup.value) + ',' +
             std::to_string(h) + ',' + std::to_string(a.trials) + ',' +
             std::to_string(a.delivered) + ',' +
             fixed(static_cast<double>(a.delivered) / a.trials, 9) + ',' +
             (a.delivered ? fixed(a.sum / a.delivered, 3) : "") + '\n';
  }
  return out;
}

std::vector<std::string> write_outputs(const ExperimentConfig& config,
                                       const ExperimentResult& result) {
  fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw BenchError(BenchErrc::runtime_error,
                     "RuntimeError: cannot create " + dir.string() + ": " +
                         ec.message());

  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_file(dir / name, text);
    written.push_back((dir / name).string());
  };

  emit("config.ini", format_config(config));

  std::vector<Series> reliability, latency;
  std::vector<Series> cdfs;
  std::string x_label;
  for (std::size_t m = 0; m < result.modes.size(); ++m) {
    const std::string mode = to_string(result.modes[m]);
    const auto& points = result.points[m];
    for (const auto& p : points)
      emit("raw_" + mode + '_' + p.setup.variable + '_' +
               format_value(p.setup.value) + ".csv",
           raw_csv(p));
    emit("aggregate_" + mode + ".csv", aggregate_csv(points));
    emit("summary_" + mode + ".csv", summary_csv(points));
    emit("cdf_" + mode + ".csv", latency_cdf_csv(points));
    emit("reliability_cdf_" + mode + ".csv", reliability_cdf_csv(points));
    emit("latency_by_hops_" + mode + ".csv", latency_by_hops_csv(points));

    Series rel{mode, {}}, lat{mode, {}};
    for (const auto& p : points) {
      x_label = p.setup.variable;
      rel.points.emplace_back(p.setup.value, p.metrics.reliability);
      if (!p.metrics.latency_us.empty())
        lat.points.emplace_back(p.setup.value, p.metrics.mean_latency_us);
      Series cdf{mode + ' ' + p.setup.variable + '=' + format_value(p.setup.value), {}};
      const auto& l = p.metrics.latency_us;
      for (std::size_t i = 0; i < l.size(); ++i) {
        if (i + 1 < l.size() && l[i + 1] == l[i]) continue;
        cdf.points.emplace_back(l[i], static_cast<double>(i + 1) / l.size());
      }
      cdfs.push_back(std::move(cdf));
    }
    reliability.push_back(std::move(rel));
    latency.push_back(std::move(lat));
  }

  const std::string title = config.name;
  emit("reliability.svg",
       line_plot({title + ": dissemination reliability", x_label, "reliability"},
                 reliability));
  emit("latency.svg",
       line_plot({title + ": mean reprogramming time", x_label, "time (us)"},
                 latency));
  emit("latency_cdf.svg",
       line_plot({title + ": reprogramming time CDF", "time (us)", "fraction of nodes", true},
                 cdfs));
  return written;
}

}  // namespace cidp::bench
