#include "cidp/bench/pipeline.hpp"

#include <sstream>

#include "cidp/patchgen/patch.hpp"
#include "cidp/patchgen/version_store.hpp"
#include "cidp/simnet/simulator.hpp"

namespace cidp::bench {

std::size_t PipelineReport::delivered() const {
  std::size_t n = 0;
  for (const auto& v : nodes) n += v.delivered;
  return n;
}

std::size_t PipelineReport::verified() const {
  std::size_t n = 0;
  for (const auto& v : nodes) n += v.verified;
  return n;
}

PipelineReport run_pipeline(const PipelineInput& in) {
  using namespace patchgen;
  const FirmwareImage placed = reorganize(in.old_image, in.new_image);
  const Patch patch = diff(in.old_image, placed);
  const Bytes plain = serialize(patch);
  const Bytes wire = serialize_compressed(patch);

  if (!in.store_dir.empty())
    VersionStore(in.store_dir).store(in.old_image, placed, wire);

  const auto spec = simnet::parse_topology(in.topology);
  const auto topo = simnet::build_topology(spec, in.seed);
  const auto packets =
      framing::fragment(wire, in.framing, static_cast<std::uint16_t>(placed.version));
  const auto nodes = static_cast<std::uint32_t>(topo.size());
  const int n_max = in.n_max ? *in.n_max
                    : in.nmax_floor ? protocol::compute_nmax_floor(nodes)
                                    : protocol::compute_nmax(nodes);
  const auto proto = simnet::make_protocol_params(topo, in.radio, in.framing, n_max);
  simnet::SimOptions options;
  options.keep_objects = true;
  const auto run = simnet::run_dissemination(topo, in.radio, proto, in.framing,
                                             packets, in.seed, options);

  PipelineReport report;
  report.base_version = static_cast<std::uint16_t>(patch.base_version);
  report.target_version = static_cast<std::uint16_t>(patch.target_version);
  report.records = patch.records.size();
  report.patch_bytes = plain.size();
  report.compressed_bytes = wire.size();
  report.packets = packets.size();
  report.n_max = n_max;
  report.new_digest = image_digest(placed);

  const std::string expected = format_image(placed);
  for (std::uint32_t i = 1; i < run.nodes.size(); ++i) {
    const auto& n = run.nodes[i];
    NodeVerdict v;
    v.node = i;
    v.hops = n.hops;
    v.delivered = n.delivered;
    if (!n.delivered) {
      v.detail = "not delivered";
    } else {
      try {
        const FirmwareImage applied = apply(in.old_image, deserialize_any(n.object));
        v.verified = format_image(applied) == expected;
        v.detail = v.verified ? "verified" : "applied image differs";
      } catch (const std::exception& e) {
        v.detail = e.what();
      }
    }
    report.nodes.push_back(std::move(v));
  }
  return report;
}

std::string format_report(const PipelineReport& r) {
  std::ostringstream o;
  o << "patch v" << r.base_version << " -> v" << r.target_version << ": "
    << r.records << " records, " << r.patch_bytes << " bytes, "
    << r.compressed_bytes << " compressed\n"
    << "packets M = " << r.packets << ", N_max = " << r.n_max << "\n"
    << "new image sha256 " << r.new_digest << "\n";
  for (const auto& v : r.nodes)
    o << "node " << v.node << " hops " << v.hops << ": " << v.detail << "\n";
  o << "delivered " << r.delivered() << "/" << r.nodes.size() << ", verified "
    << r.verified() << "/" << r.delivered() << "\n";
  return o.str();
}

}  // namespace cidp::bench
