// Deterministic analytical QoR reference model. Generates ground-truth labels
// in place of an FPGA toolchain: ASAP scheduling with memory-port contention,
// standard pipelined/sequential loop latency algebra, and a structural
// resource model (library costs + fan-in muxing + pipeline registers).
#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hlsqor/features.hpp"
#include "hlsqor/graph.hpp"
#include "hlsqor/ir.hpp"
#include "hlsqor/qor.hpp"

namespace hlsqor {

inline constexpr long kMuxLutPerExtraInput = 8;
inline constexpr long kPipelineFfPerStage = 16;
inline constexpr long kLoopIterOverhead = 1;   // per-iteration FSM overhead
inline constexpr long kLoopEntryOverhead = 1;  // loop entry/exit overhead

struct ScheduleResult {
  std::map<int, long> start;      // node id -> start cycle
  long iteration_latency = 0;     // max over nodes of start + cycles
  std::vector<int> critical_path; // node ids, source to sink
};

namespace oracle_detail {

inline std::map<std::string, std::string> stmt_array_map(const KernelSpec& spec) {
  std::map<std::string, std::string> m;
  spec.for_each_loop([&](const LoopSpec& l, const LoopSpec*) {
    for (auto& st : l.body)
      if (st.access) m[st.id] = st.access->array;
  });
  return m;
}

inline long array_port_capacity(const KernelSpec& spec, const PragmaConfig& cfg,
                                const std::string& array) {
  auto* a = spec.find_array(array);
  long ports = a->base_ports;
  for (long f : cfg.array(*a).factors) ports *= f;
  return ports;
}

}  // namespace oracle_detail

// ASAP schedule of one loop iteration: unlimited functional units, memory
// accesses limited to the array's total port count per cycle, ties broken by
// node id. Precedence comes from intra-iteration data edges.
inline ScheduleResult schedule_iteration(const Cdfg& sub, const KernelSpec& spec,
                                         const PragmaConfig& cfg, const OpLibrary& lib) {
  ScheduleResult res;
  size_t n = sub.nodes.size();
  std::vector<std::vector<int>> preds(n);
  std::vector<int> indeg_remaining(n, 0);
  for (auto& e : sub.edges) {
    if (e.kind != EdgeKind::Data) continue;
    preds[static_cast<size_t>(e.dst)].push_back(e.src);
    ++indeg_remaining[static_cast<size_t>(e.dst)];
  }

  auto stmt_array = oracle_detail::stmt_array_map(spec);
  std::map<std::string, std::map<long, long>> port_usage;  // array -> cycle -> count

  // Kahn order with node-id tie-break.
  std::set<int> ready;
  for (auto& nd : sub.nodes)
    if (nd.kind == NodeKind::Op && indeg_remaining[static_cast<size_t>(nd.id)] == 0)
      ready.insert(nd.id);

  std::vector<long> cycles(n, 0);
  for (auto& nd : sub.nodes)
    cycles[static_cast<size_t>(nd.id)] =
        nd.kind == NodeKind::Super ? static_cast<long>(nd.feat.cycles)
                                   : lib.at(nd.optype).cycles;

  std::vector<long> start(n, -1);
  std::vector<int> crit_pred(n, -1);
  size_t scheduled = 0, op_count = 0;
  for (auto& nd : sub.nodes)
    if (nd.kind != NodeKind::MemPort) ++op_count;

  while (!ready.empty()) {
    int id = *ready.begin();
    ready.erase(ready.begin());
    auto& nd = sub.nodes[static_cast<size_t>(id)];
    long t = 0;
    for (int p : preds[static_cast<size_t>(id)]) {
      if (sub.nodes[static_cast<size_t>(p)].kind == NodeKind::MemPort) continue;
      long fin = start[static_cast<size_t>(p)] + cycles[static_cast<size_t>(p)];
      if (fin > t) {
        t = fin;
        crit_pred[static_cast<size_t>(id)] = p;
      }
    }
    if (nd.kind == NodeKind::Op && is_memory_op(nd.optype)) {
      auto it = stmt_array.find(nd.stmt_id);
      if (it != stmt_array.end()) {
        long cap = oracle_detail::array_port_capacity(spec, cfg, it->second);
        auto& usage = port_usage[it->second];
        while (usage[t] >= cap) ++t;
        ++usage[t];
      }
    }
    start[static_cast<size_t>(id)] = t;
    ++scheduled;
    // Release successors.
    for (auto& e : sub.edges) {
      if (e.kind != EdgeKind::Data || e.src != id) continue;
      if (--indeg_remaining[static_cast<size_t>(e.dst)] == 0 &&
          sub.nodes[static_cast<size_t>(e.dst)].kind != NodeKind::MemPort)
        ready.insert(e.dst);
    }
  }
  if (scheduled != op_count)
    throw std::runtime_error("schedule_iteration: cycle in intra-iteration data edges");

  long il = 0;
  int sink = -1;
  for (auto& nd : sub.nodes) {
    if (nd.kind == NodeKind::MemPort) continue;
    long fin = start[static_cast<size_t>(nd.id)] + cycles[static_cast<size_t>(nd.id)];
    if (fin > il || (fin == il && (sink < 0 || nd.id < sink))) {
      il = fin;
      sink = nd.id;
    }
    res.start[nd.id] = start[static_cast<size_t>(nd.id)];
  }
  res.iteration_latency = il;
  for (int c = sink; c >= 0; c = crit_pred[static_cast<size_t>(c)])
    res.critical_path.insert(res.critical_path.begin(), c);
  return res;
}

// Closed-form loop latency. Pipelined: IL + II*(TC-1). Non-pipelined:
// TC*(IL + iter overhead) + entry overhead.
inline long loop_latency(bool pipelined, long il, long ii, long tripcount) {
  if (tripcount <= 0) return 0;
  if (pipelined) return il + ii * (tripcount - 1);
  return tripcount * (il + kLoopIterOverhead) + kLoopEntryOverhead;
}

inline long loop_latency(const InnerLoopSubgraph& sub, long il, const OpLibrary&) {
  return loop_latency(sub.loop_features.pipelined, il, sub.loop_features.ii,
                      sub.loop_features.tripcount);
}

namespace oracle_detail {

inline long mux_lut(const Cdfg& g) {
  std::vector<long> indeg(g.nodes.size(), 0);
  for (auto& e : g.edges) ++indeg[static_cast<size_t>(e.dst)];
  long lut = 0;
  for (auto& n : g.nodes)
    lut += kMuxLutPerExtraInput * std::max(0L, indeg[static_cast<size_t>(n.id)] - 1);
  return lut;
}

inline QoR sum_resources(const Cdfg& g, const OpLibrary& lib) {
  QoR q;
  for (auto& n : g.nodes) {
    if (n.kind != NodeKind::Op) continue;
    const OpCost& c = lib.at(n.optype);
    q.lut += c.lut;
    q.dsp += c.dsp;
    q.ff += c.ff;
  }
  q.lut += mux_lut(g);
  return q;
}

}  // namespace oracle_detail

struct RegionQoR {
  QoR qor;
  long il = 0;
};

// Ground-truth QoR of one inner-hierarchy region instance. Loop features
// (tripcount, pipelined, ii) must already be annotated.
inline RegionQoR region_qor(const InnerLoopSubgraph& sub, const KernelSpec& spec,
                            const PragmaConfig& cfg, const OpLibrary& lib) {
  RegionQoR out;
  auto sched = schedule_iteration(sub.subgraph, spec, cfg, lib);
  out.il = sched.iteration_latency;
  out.qor = oracle_detail::sum_resources(sub.subgraph, lib);
  out.qor.latency_cycles = loop_latency(sub, out.il, lib);
  if (sub.loop_features.pipelined) {
    long stages = (out.il + sub.loop_features.ii - 1) / std::max(1L, sub.loop_features.ii);
    out.qor.ff += kPipelineFfPerStage * stages;
  }
  return out;
}

namespace oracle_detail {

// Direct body ops of `loop` in the instance with all ancestor residues zero
// (own-unroll replicas included: they execute within one iteration).
inline Cdfg body_instance(const Cdfg& g, const KernelSpec& spec, const std::string& loop_id,
                          const std::vector<std::string>& ancestors) {
  std::vector<int> ids;
  for (auto& n : g.nodes) {
    if (n.kind != NodeKind::Op || n.loop_id != loop_id || n.stmt_id.empty()) continue;
    if (!graph_detail::residues_zero_on(n, ancestors)) continue;
    ids.push_back(n.id);
  }
  return graph_detail::induced_subgraph(g, ids);
}

}  // namespace oracle_detail

// Composes kernel latency hierarchically and sums the structural resource
// model over the full replicated graph.
inline QoR kernel_qor(const KernelSpec& spec, const PragmaConfig& cfg,
                      const OpLibrary& lib) {
  auto errs = validate_config(spec, cfg);
  if (!errs.empty()) throw std::runtime_error("invalid config: " + errs.front());

  Cdfg g = build_cdfg(spec, cfg);
  auto regions = extract_inner_subgraphs(g, spec, cfg);
  std::map<std::string, RegionQoR> region_result;  // keyed by top loop id
  std::map<std::string, const InnerLoopSubgraph*> region_of;
  for (auto& r : regions) {
    annotate_loop_features(r, spec, cfg);
    region_result[r.loop_id] = region_qor(r, spec, cfg, lib);
    region_of[r.loop_id] = &r;
  }

  std::function<long(const LoopSpec&, std::vector<std::string>&)> lat =
      [&](const LoopSpec& l, std::vector<std::string>& ancestors) -> long {
    auto rr = region_result.find(l.id);
    if (rr != region_result.end()) return rr->second.qor.latency_cycles;
    Cdfg body = oracle_detail::body_instance(g, spec, l.id, ancestors);
    long il = body.nodes.empty()
                  ? 0
                  : schedule_iteration(body, spec, cfg, lib).iteration_latency;
    long iter = il;
    ancestors.push_back(l.id);
    for (auto& c : l.children) iter += lat(c, ancestors);
    ancestors.pop_back();
    long tc = l.tripcount / cfg.loop(l.id).unroll;
    return tc * (iter + kLoopIterOverhead) + kLoopEntryOverhead;
  };

  QoR q = oracle_detail::sum_resources(g, lib);

  std::vector<std::string> ancestors;
  for (auto& l : spec.root_loops) q.latency_cycles += lat(l, ancestors);

  // Pipeline registers: per pipelined region instance, 16 per stage.
  for (auto& r : regions) {
    if (!r.loop_features.pipelined) continue;
    auto& rr = region_result[r.loop_id];
    long stages =
        (rr.il + r.loop_features.ii - 1) / std::max(1L, r.loop_features.ii);
    long instances = 1;
    for (auto& a : graph_detail::ancestors_of(spec, r.loop_id))
      instances *= cfg.loop(a).unroll;
    q.ff += kPipelineFfPerStage * stages * instances;
  }
  return q;
}

}  // namespace hlsqor
