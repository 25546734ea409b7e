// Node/loop feature annotation and fixed-length encoding.
#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hlsqor/graph.hpp"
#include "hlsqor/ir.hpp"

namespace hlsqor {

struct OpCost {
  long cycles = 1;
  double delay_ns = 1.0;
  long lut = 0;
  long dsp = 0;
  long ff = 0;
};

// Per-optype latency/delay/resource library. Non-arithmetic entries carry zero
// resources; the defaults stand in for a microbenchmark-profiled library and
// are an input, not a claim.
struct OpLibrary {
  std::map<std::string, OpCost> entries;

  const OpCost& at(OpType t) const {
    auto it = entries.find(op_type_name(t));
    if (it == entries.end())
      throw std::runtime_error(std::string("op library has no entry for '") +
                               op_type_name(t) + "'");
    return it->second;
  }

  static OpLibrary defaults() {
    OpLibrary lib;
    lib.entries = {
        {"add", {1, 1.0, 32, 0, 32}},
        {"sub", {1, 1.0, 32, 0, 32}},
        {"mul", {3, 2.5, 60, 2, 96}},
        {"div", {8, 3.5, 600, 0, 250}},
        {"fadd", {4, 2.8, 200, 2, 150}},
        {"fsub", {4, 2.8, 200, 2, 150}},
        {"fmul", {3, 2.6, 90, 3, 120}},
        {"fdiv", {12, 4.0, 800, 0, 380}},
        {"icmp", {1, 0.9, 0, 0, 0}},
        {"fcmp", {2, 1.8, 0, 0, 0}},
        {"select", {1, 0.8, 0, 0, 0}},
        {"load", {2, 1.5, 0, 0, 0}},
        {"store", {2, 1.5, 0, 0, 0}},
        {"phi", {1, 0.5, 0, 0, 0}},
        {"br", {1, 0.5, 0, 0, 0}},
        {"memport", {1, 1.0, 0, 0, 0}},
    };
    return lib;
  }
};

inline json oplib_to_json(const OpLibrary& lib) {
  json j = json::object();
  for (auto& [name, c] : lib.entries)
    j[name] = {{"cycles", c.cycles}, {"delay_ns", c.delay_ns},
               {"lut", c.lut},       {"dsp", c.dsp},
               {"ff", c.ff}};
  return j;
}

inline OpLibrary oplib_from_json(const json& j) {
  OpLibrary lib;
  for (auto& [name, cj] : j.items()) {
    OpCost c;
    c.cycles = cj.value("cycles", 1L);
    c.delay_ns = cj.value("delay_ns", 1.0);
    c.lut = cj.value("lut", 0L);
    c.dsp = cj.value("dsp", 0L);
    c.ff = cj.value("ff", 0L);
    lib.entries[name] = c;
  }
  return lib;
}

namespace feat_detail {

// invocations = prod over enclosing loops of tripcount / unroll.
inline double invocations_of(const CdfgNode& n, const KernelSpec& spec,
                             const PragmaConfig& cfg) {
  double inv = 1;
  // A statement node's residues cover the whole enclosing chain including the
  // owning loop; control nodes cover strict ancestors, so count the owning
  // loop separately.
  std::set<std::string> counted;
  for (auto& [lid, r] : n.residues) {
    inv *= static_cast<double>(graph_detail::loop_tripcount(spec, lid)) /
           static_cast<double>(cfg.loop(lid).unroll);
    counted.insert(lid);
  }
  if (!n.loop_id.empty() && !counted.count(n.loop_id))
    inv *= static_cast<double>(graph_detail::loop_tripcount(spec, n.loop_id)) /
           static_cast<double>(cfg.loop(n.loop_id).unroll);
  return inv;
}

}  // namespace feat_detail

// Fills every node's NodeFeatures. Degrees come from the final edge set;
// cycles/delay/resources from the library. Supernode cost features are left
// untouched (owned by the hierarchy stage); their degrees are refreshed.
inline void annotate_features(Cdfg& g, const KernelSpec& spec, const PragmaConfig& cfg,
                              const OpLibrary& lib) {
  std::vector<int> indeg(g.nodes.size(), 0), outdeg(g.nodes.size(), 0);
  for (auto& e : g.edges) {
    ++outdeg[static_cast<size_t>(e.src)];
    ++indeg[static_cast<size_t>(e.dst)];
  }
  for (auto& n : g.nodes) {
    n.feat.in_degree = indeg[static_cast<size_t>(n.id)];
    n.feat.out_degree = outdeg[static_cast<size_t>(n.id)];
    if (n.kind == NodeKind::Super) continue;
    const OpCost& c = lib.at(n.optype);
    n.feat.cycles = static_cast<double>(c.cycles);
    n.feat.delay_ns = c.delay_ns;
    n.feat.lut = static_cast<double>(c.lut);
    n.feat.dsp = static_cast<double>(c.dsp);
    n.feat.ff = static_cast<double>(c.ff);
    n.feat.invocations =
        n.kind == NodeKind::MemPort ? 1.0 : feat_detail::invocations_of(n, spec, cfg);
  }
}

// ---------------------------------------------------------------------------
// Initiation interval: II_min = max(II_rec, II_res)
//   II_rec = max over declared dependences inside the region of
//            ceil(delay / distance)
//   II_res = max over arrays of ceil(accesses per iteration / ports)

inline long compute_ii_min(const InnerLoopSubgraph& sub,
                           const std::vector<DependenceSpec>& deps,
                           const KernelSpec& spec, const PragmaConfig& cfg) {
  long ii = 1;

  std::set<std::string> region_stmts;
  for (auto& n : sub.subgraph.nodes)
    if (!n.stmt_id.empty()) region_stmts.insert(n.stmt_id);

  for (auto& d : deps) {
    if (!region_stmts.count(d.src) || !region_stmts.count(d.dst)) continue;
    long bound = (d.delay + d.distance - 1) / d.distance;
    ii = std::max(ii, bound);
  }

  // Post-unroll accesses per pipeline iteration; ports = base * prod(factors).
  std::map<std::string, long> access_count;
  for (auto& n : sub.subgraph.nodes) {
    if (n.kind != NodeKind::Op || !is_memory_op(n.optype)) continue;
    // Find the accessed array through the statement.
    spec.for_each_loop([&](const LoopSpec& l, const LoopSpec*) {
      for (auto& st : l.body)
        if (st.id == n.stmt_id && st.access) ++access_count[st.access->array];
    });
  }
  for (auto& [array, accesses] : access_count) {
    auto* a = spec.find_array(array);
    auto dir = cfg.array(*a);
    long ports = a->base_ports;
    for (long f : dir.factors) ports *= f;
    ii = std::max(ii, (accesses + ports - 1) / ports);
  }
  return ii;
}

// Fills the loop-level features of an extracted region (tripcount and the
// pipelined flag come from extraction; II from the formula above).
inline void annotate_loop_features(InnerLoopSubgraph& sub, const KernelSpec& spec,
                                   const PragmaConfig& cfg) {
  sub.loop_features.ii =
      sub.loop_features.pipelined ? compute_ii_min(sub, spec.deps, spec, cfg) : 0;
}

// ---------------------------------------------------------------------------
// Encoding: one-hot optype (17) ++ z-scored numerics (8), fixed length 25.

struct NormStats {
  std::vector<double> mean;  // size 8
  std::vector<double> stdev;

  static NormStats identity() {
    NormStats s;
    s.mean.assign(kNumericFeatureCount, 0.0);
    s.stdev.assign(kNumericFeatureCount, 1.0);
    return s;
  }
};

inline constexpr int kEncodedLength = kOpTypeCount + kNumericFeatureCount;

inline std::vector<double> numeric_fields(const NodeFeatures& f) {
  return {f.invocations, f.in_degree, f.out_degree, f.cycles,
          f.delay_ns,    f.lut,       f.dsp,        f.ff};
}

// Numerics are z-scored in log1p space: the raw fields (invocation counts,
// cycles, resource costs) span several orders of magnitude, and log-scaling
// keeps encodings O(1) regardless of unroll factors.
inline NormStats compute_norm_stats(const std::vector<NodeFeatures>& feats) {
  NormStats s;
  s.mean.assign(kNumericFeatureCount, 0.0);
  s.stdev.assign(kNumericFeatureCount, 0.0);
  if (feats.empty()) return NormStats::identity();
  for (auto& f : feats) {
    auto v = numeric_fields(f);
    for (int k = 0; k < kNumericFeatureCount; ++k) s.mean[k] += std::log1p(v[k]);
  }
  for (auto& m : s.mean) m /= static_cast<double>(feats.size());
  for (auto& f : feats) {
    auto v = numeric_fields(f);
    for (int k = 0; k < kNumericFeatureCount; ++k) {
      double d = std::log1p(v[k]) - s.mean[k];
      s.stdev[k] += d * d;
    }
  }
  for (auto& d : s.stdev) d = std::max(std::sqrt(d / static_cast<double>(feats.size())), 1e-6);
  return s;
}

inline std::vector<double> encode(const NodeFeatures& f, OpType optype,
                                  const NormStats& norm) {
  std::vector<double> v(kEncodedLength, 0.0);
  int hot = static_cast<int>(optype);
  if (hot < 0 || hot >= kOpTypeCount) throw std::runtime_error("unknown optype in encode");
  v[static_cast<size_t>(hot)] = 1.0;
  auto num = numeric_fields(f);
  for (int k = 0; k < kNumericFeatureCount; ++k)
    v[static_cast<size_t>(kOpTypeCount + k)] =
        (std::log1p(num[static_cast<size_t>(k)]) - norm.mean[static_cast<size_t>(k)]) /
        norm.stdev[static_cast<size_t>(k)];
  return v;
}

inline json norm_to_json(const NormStats& s) {
  return {{"mean", s.mean}, {"stdev", s.stdev}};
}

inline NormStats norm_from_json(const json& j) {
  NormStats s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.stdev = j.at("stdev").get<std::vector<double>>();
  return s;
}

}  // namespace hlsqor
