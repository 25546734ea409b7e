// Pragma-transformed CDFG construction.
//
// Unrolled loop bodies are replicated explicitly; array partitioning adds one
// memory-port node per sub-bank and routes each load/store to the ports its
// index expression can reach; pipelining leaves the graph untouched (it is a
// loop-level feature only).
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hlsqor/ir.hpp"
#include "hlsqor/qor.hpp"

namespace hlsqor {

enum class EdgeKind { Data, Control, Mem };
enum class NodeKind { Op, MemPort, Super };

inline const char* edge_kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::Data: return "data";
    case EdgeKind::Control: return "control";
    case EdgeKind::Mem: return "mem";
  }
  return "?";
}

inline const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Op: return "op";
    case NodeKind::MemPort: return "memport";
    case NodeKind::Super: return "supernode";
  }
  return "?";
}

// Table-II node features. Reals throughout: supernode entries are filled with
// model predictions at inference time.
struct NodeFeatures {
  double invocations = 0;
  double in_degree = 0;
  double out_degree = 0;
  double cycles = 0;
  double delay_ns = 0;
  double lut = 0;
  double dsp = 0;
  double ff = 0;

  bool operator==(const NodeFeatures&) const = default;
};

inline constexpr int kNumericFeatureCount = 8;

struct CdfgNode {
  int id = 0;
  NodeKind kind = NodeKind::Op;
  OpType optype = OpType::Add;
  int replica_index = 0;
  std::string loop_id;   // owning loop; empty for memports
  std::string stmt_id;   // originating statement; empty for synthesized nodes
  std::string array_id;  // for memports
  int port_index = -1;   // for memports
  // Unroll residues along the enclosing loop chain (outermost first). For a
  // statement node this includes the owning loop's own residue.
  std::vector<std::pair<std::string, long>> residues;
  NodeFeatures feat;
};

struct CdfgEdge {
  int src = 0;
  int dst = 0;
  EdgeKind kind = EdgeKind::Data;

  bool operator==(const CdfgEdge&) const = default;
  auto operator<=>(const CdfgEdge&) const = default;
};

struct Cdfg {
  std::string kernel;
  uint64_t cfg_hash = 0;
  std::vector<CdfgNode> nodes;
  std::vector<CdfgEdge> edges;

  std::map<int, std::string> loop_map() const {
    std::map<int, std::string> m;
    for (auto& n : nodes)
      if (!n.loop_id.empty()) m[n.id] = n.loop_id;
    return m;
  }
};

struct LoopFeatures {
  long tripcount = 1;    // effective iteration count of the modeled region
  bool pipelined = false;
  long ii = 0;           // 0 when not pipelined
  double il_predicted = 0;
};

// Inner-hierarchy categories (leaf pipeline regions handled by GNN_p/GNN_np).
enum class InnerCategory {
  SingleLevel,           // a lone loop without sub-loops
  PipelinedOuter,        // pipelined loop whose sub-loops are fully unrolled
  FlattenedPerfectNest,  // perfect nest, innermost level pipelined
  FullyUnrolledNest,     // non-pipelined nest with all sub-loops fully unrolled
};

struct InnerLoopSubgraph {
  std::string loop_id;  // top loop of the region
  InnerCategory category = InnerCategory::SingleLevel;
  std::vector<std::string> covered_loops;
  Cdfg subgraph;        // instance with all enclosing residues zero
  LoopFeatures loop_features;
};

// ---------------------------------------------------------------------------
// Construction.

namespace graph_detail {

using ResidueVec = std::vector<std::pair<std::string, long>>;

struct Builder {
  const KernelSpec& spec;
  const PragmaConfig& cfg;
  Cdfg g;
  // stmt id -> node ids of all replicas
  std::map<std::string, std::vector<int>> stmt_nodes;
  // loop id -> phi/br node ids per instance
  std::map<std::string, std::vector<int>> phi_nodes;
  std::map<std::string, std::vector<int>> br_nodes;

  Builder(const KernelSpec& s, const PragmaConfig& c) : spec(s), cfg(c) {}

  int add_node(NodeKind kind, OpType op, const std::string& loop_id,
               const std::string& stmt_id, const ResidueVec& residues) {
    CdfgNode n;
    n.id = static_cast<int>(g.nodes.size());
    n.kind = kind;
    n.optype = op;
    n.loop_id = loop_id;
    n.stmt_id = stmt_id;
    n.residues = residues;
    long idx = 0;
    for (auto& [lid, r] : residues) idx = idx * cfg.loop(lid).unroll + r;
    n.replica_index = static_cast<int>(idx);
    g.nodes.push_back(std::move(n));
    return g.nodes.back().id;
  }

  void build_loop(const LoopSpec& l, const ResidueVec& prefix) {
    // Loop-control scaffolding, one instance per enclosing residue combo.
    int phi = add_node(NodeKind::Op, OpType::Phi, l.id, "", prefix);
    int icmp = add_node(NodeKind::Op, OpType::ICmp, l.id, "", prefix);
    int br = add_node(NodeKind::Op, OpType::Br, l.id, "", prefix);
    phi_nodes[l.id].push_back(phi);
    br_nodes[l.id].push_back(br);
    g.edges.push_back({phi, icmp, EdgeKind::Control});
    g.edges.push_back({icmp, br, EdgeKind::Control});

    long u = cfg.loop(l.id).unroll;
    for (auto& [is_loop, idx] : l.item_order) {
      for (long r = 0; r < u; ++r) {
        ResidueVec res = prefix;
        res.emplace_back(l.id, r);
        if (is_loop) {
          build_loop(l.children[idx], res);
        } else {
          auto& st = l.body[idx];
          int n = add_node(NodeKind::Op, st.optype, l.id, st.id, res);
          stmt_nodes[st.id].push_back(n);
        }
      }
    }
  }

  // Residue compatibility: agree on every loop both vectors mention.
  static bool compatible(const ResidueVec& a, const ResidueVec& b) {
    for (auto& [la, ra] : a)
      for (auto& [lb, rb] : b)
        if (la == lb && ra != rb) return false;
    return true;
  }

  void wire_data_and_control() {
    std::set<std::string> loop_ids;
    for (auto* l : all_loops(spec)) loop_ids.insert(l->id);

    for (auto& n : g.nodes) {
      if (n.kind != NodeKind::Op || n.stmt_id.empty()) continue;
      const Statement* st = find_stmt(n.stmt_id);
      for (auto& op : st->operands) {
        if (loop_ids.count(op)) {
          // Loop-variable use: induction value flows from the loop's phi.
          for (int pn : phi_nodes[op])
            if (compatible(g.nodes[pn].residues, n.residues))
              g.edges.push_back({pn, n.id, EdgeKind::Data});
        } else {
          for (int sn : stmt_nodes[op])
            if (sn != n.id && compatible(g.nodes[sn].residues, n.residues))
              g.edges.push_back({sn, n.id, EdgeKind::Data});
        }
      }
    }

    // br -> body statements and child-loop phis, matching residues.
    spec.for_each_loop([&](const LoopSpec& l, const LoopSpec*) {
      for (int bn : br_nodes[l.id]) {
        auto& br = g.nodes[bn];
        for (auto& st : l.body)
          for (int sn : stmt_nodes[st.id])
            if (compatible(br.residues, g.nodes[sn].residues))
              g.edges.push_back({bn, sn, EdgeKind::Control});
        for (auto& c : l.children)
          for (int pn : phi_nodes[c.id])
            if (compatible(br.residues, g.nodes[pn].residues))
              g.edges.push_back({bn, pn, EdgeKind::Control});
      }
    });
  }

  const Statement* find_stmt(const std::string& id) const {
    const Statement* out = nullptr;
    spec.for_each_loop([&](const LoopSpec& l, const LoopSpec*) {
      for (auto& st : l.body)
        if (st.id == id) out = &st;
    });
    return out;
  }
};

inline long loop_tripcount(const KernelSpec& spec, const std::string& id) {
  long tc = 1;
  spec.for_each_loop([&](const LoopSpec& l, const LoopSpec*) {
    if (l.id == id) tc = l.tripcount;
  });
  return tc;
}

// Flat port id for one concrete index vector (mixed radix over dimensions).
inline long port_of_index(const ArraySpec& a, const ArrayDirective& d,
                          const std::vector<long>& idx) {
  long flat = 0;
  for (size_t i = 0; i < a.dims.size(); ++i) {
    long dim = a.dims[i], f = d.factors[i];
    long x = ((idx[i] % dim) + dim) % dim;  // wrap out-of-bounds defensively
    long bank = d.type == PartitionType::Cyclic ? x % f : x / (dim / f);
    flat = flat * f + bank;
  }
  return flat;
}

// Ports an access can touch over the remaining iteration space, given the
// replica's unroll residues. Residue r of a loop unrolled by u covers
// iterations i = u*i' + r.
inline std::set<long> reachable_ports(const KernelSpec& spec, const PragmaConfig& cfg,
                                      const ArraySpec& a, const ArrayDirective& dir,
                                      const AccessExpr& acc, const ResidueVec& residues) {
  long total_ports = 1;
  for (long f : dir.factors) total_ports *= f;

  std::set<long> all;
  auto all_of_them = [&] {
    for (long p = 0; p < total_ports; ++p) all.insert(p);
    return all;
  };

  for (auto& ix : acc.indices)
    if (ix.dynamic) return all_of_them();

  // Referenced loop vars, in residue (outermost-first) order for determinism.
  std::vector<std::string> vars;
  for (auto& [lid, r] : residues) {
    bool used = false;
    for (auto& ix : acc.indices)
      if (ix.coeffs.count(lid) && ix.coeffs.at(lid) != 0) used = true;
    if (used) vars.push_back(lid);
  }

  std::vector<long> span;  // remaining iterations per var
  long space = 1;
  for (auto& v : vars) {
    long tc = loop_tripcount(spec, v);
    long u = cfg.loop(v).unroll;
    span.push_back(tc / u);
    space *= tc / u;
    if (space > (1L << 20)) return all_of_them();  // give up, conservative
  }

  std::map<std::string, long> residue_of;
  for (auto& [lid, r] : residues) residue_of[lid] = r;

  std::set<long> ports;
  std::vector<long> it(vars.size(), 0);
  for (;;) {
    std::map<std::string, long> value;
    for (size_t k = 0; k < vars.size(); ++k) {
      long u = cfg.loop(vars[k]).unroll;
      value[vars[k]] = u * it[k] + residue_of[vars[k]];
    }
    std::vector<long> idx;
    for (auto& ix : acc.indices) {
      long x = ix.constant;
      for (auto& [var, c] : ix.coeffs) {
        auto vit = value.find(var);
        if (vit != value.end()) x += c * vit->second;
      }
      idx.push_back(x);
    }
    ports.insert(port_of_index(a, dir, idx));
    size_t k = 0;
    for (; k < vars.size(); ++k) {
      if (++it[k] < span[k]) break;
      it[k] = 0;
    }
    if (k == vars.size() || vars.empty()) break;
  }
  return ports;
}

}  // namespace graph_detail

// Adds exactly prod(factors) memory-port nodes per array and routes each
// load/store replica to the ports its index residues can reach.
inline void add_memory_ports(Cdfg& g, const KernelSpec& spec, const PragmaConfig& cfg) {
  std::map<std::string, std::vector<int>> array_ports;
  for (auto& a : spec.arrays) {
    auto dir = cfg.array(a);
    long total = 1;
    for (long f : dir.factors) total *= f;
    for (long p = 0; p < total; ++p) {
      CdfgNode n;
      n.id = static_cast<int>(g.nodes.size());
      n.kind = NodeKind::MemPort;
      n.optype = OpType::MemPort;
      n.array_id = a.id;
      n.port_index = static_cast<int>(p);
      array_ports[a.id].push_back(n.id);
      g.nodes.push_back(std::move(n));
    }
  }

  std::map<std::string, const Statement*> stmts;
  spec.for_each_loop([&](const LoopSpec& l, const LoopSpec*) {
    for (auto& st : l.body) stmts[st.id] = &st;
  });

  for (auto& n : g.nodes) {
    if (n.kind != NodeKind::Op || n.stmt_id.empty()) continue;
    auto* st = stmts.at(n.stmt_id);
    if (!st->access) continue;
    auto* a = spec.find_array(st->access->array);
    auto dir = cfg.array(*a);
    auto ports =
        graph_detail::reachable_ports(spec, cfg, *a, dir, *st->access, n.residues);
    for (long p : ports) {
      int pn = array_ports[a->id][static_cast<size_t>(p)];
      if (st->optype == OpType::Load)
        g.edges.push_back({pn, n.id, EdgeKind::Mem});
      else
        g.edges.push_back({n.id, pn, EdgeKind::Mem});
    }
  }
}

inline Cdfg build_cdfg(const KernelSpec& spec, const PragmaConfig& cfg) {
  graph_detail::Builder b(spec, cfg);
  b.g.kernel = spec.name;
  b.g.cfg_hash = config_hash(cfg);
  for (auto& l : spec.root_loops) b.build_loop(l, {});
  b.wire_data_and_control();
  add_memory_ports(b.g, spec, cfg);
  std::sort(b.g.edges.begin(), b.g.edges.end());
  b.g.edges.erase(std::unique(b.g.edges.begin(), b.g.edges.end()), b.g.edges.end());
  return std::move(b.g);
}

// ---------------------------------------------------------------------------
// Inner-hierarchy extraction.

namespace graph_detail {

struct RegionPlan {
  const LoopSpec* top = nullptr;
  InnerCategory category = InnerCategory::SingleLevel;
  std::vector<const LoopSpec*> covered;
  bool pipelined = false;
  long tc_eff = 1;
};

inline void collect_subtree(const LoopSpec& l, std::vector<const LoopSpec*>& out) {
  out.push_back(&l);
  for (auto& c : l.children) collect_subtree(c, out);
}

// Maximal perfect chain from `l` down to a leaf; empty if the shape or the
// pragma assignment does not qualify for flattening.
inline std::vector<const LoopSpec*> flatten_chain(const LoopSpec& l,
                                                  const PragmaConfig& cfg) {
  std::vector<const LoopSpec*> chain;
  const LoopSpec* cur = &l;
  while (cur->perfect()) {
    // Flattening a nest whose upper level is replicated by unrolling would
    // split the pipeline; restrict to unroll 1 above the innermost level.
    if (cfg.loop(cur->id).unroll != 1 || cfg.loop(cur->id).pipeline) return {};
    chain.push_back(cur);
    cur = &cur->children[0];
  }
  if (!cur->children.empty()) return {};
  if (!cfg.loop(cur->id).pipeline) return {};
  chain.push_back(cur);
  return chain.size() >= 2 ? chain : std::vector<const LoopSpec*>{};
}

inline std::optional<RegionPlan> classify(const LoopSpec& l, const PragmaConfig& cfg) {
  RegionPlan plan;
  plan.top = &l;
  auto d = cfg.loop(l.id);
  if (l.children.empty()) {
    plan.category = InnerCategory::SingleLevel;
    plan.covered = {&l};
    plan.pipelined = d.pipeline;
    plan.tc_eff = l.tripcount / d.unroll;
    return plan;
  }
  if (d.pipeline) {
    plan.category = InnerCategory::PipelinedOuter;
    collect_subtree(l, plan.covered);
    plan.pipelined = true;
    plan.tc_eff = l.tripcount / d.unroll;
    return plan;
  }
  if (auto chain = flatten_chain(l, cfg); !chain.empty()) {
    plan.category = InnerCategory::FlattenedPerfectNest;
    plan.covered = chain;
    plan.pipelined = true;
    plan.tc_eff = 1;
    for (auto* c : chain) plan.tc_eff *= c->tripcount / cfg.loop(c->id).unroll;
    return plan;
  }
  if (detail::all_descendants_fully_unrolled(l, cfg)) {
    plan.category = InnerCategory::FullyUnrolledNest;
    collect_subtree(l, plan.covered);
    plan.pipelined = false;
    plan.tc_eff = l.tripcount / d.unroll;
    return plan;
  }
  return std::nullopt;
}

inline void plan_regions(const LoopSpec& l, const PragmaConfig& cfg,
                         std::vector<RegionPlan>& out) {
  if (auto plan = classify(l, cfg)) {
    out.push_back(std::move(*plan));
    return;
  }
  for (auto& c : l.children) plan_regions(c, cfg, out);
}

// Strict ancestors of a loop (outermost first).
inline std::vector<std::string> ancestors_of(const KernelSpec& spec,
                                             const std::string& loop_id) {
  std::vector<std::string> path, result;
  std::function<bool(const LoopSpec&)> walk = [&](const LoopSpec& l) -> bool {
    if (l.id == loop_id) {
      result = path;
      return true;
    }
    path.push_back(l.id);
    for (auto& c : l.children)
      if (walk(c)) return true;
    path.pop_back();
    return false;
  };
  for (auto& r : spec.root_loops)
    if (walk(r)) break;
  return result;
}

inline bool residues_zero_on(const CdfgNode& n, const std::vector<std::string>& loops) {
  for (auto& [lid, r] : n.residues)
    if (std::find(loops.begin(), loops.end(), lid) != loops.end() && r != 0) return false;
  return true;
}

// Induced subgraph over `node_ids` with densely renumbered ids.
inline Cdfg induced_subgraph(const Cdfg& g, const std::vector<int>& node_ids) {
  Cdfg sub;
  sub.kernel = g.kernel;
  sub.cfg_hash = g.cfg_hash;
  std::map<int, int> remap;
  for (int id : node_ids) {
    CdfgNode n = g.nodes[static_cast<size_t>(id)];
    remap[id] = static_cast<int>(sub.nodes.size());
    n.id = remap[id];
    sub.nodes.push_back(std::move(n));
  }
  for (auto& e : g.edges) {
    auto s = remap.find(e.src), d = remap.find(e.dst);
    if (s != remap.end() && d != remap.end())
      sub.edges.push_back({s->second, d->second, e.kind});
  }
  return sub;
}

}  // namespace graph_detail

inline std::vector<InnerLoopSubgraph> extract_inner_subgraphs(const Cdfg& g,
                                                              const KernelSpec& spec,
                                                              const PragmaConfig& cfg) {
  std::vector<graph_detail::RegionPlan> plans;
  for (auto& l : spec.root_loops) graph_detail::plan_regions(l, cfg, plans);

  std::vector<InnerLoopSubgraph> out;
  for (auto& plan : plans) {
    InnerLoopSubgraph sub;
    sub.loop_id = plan.top->id;
    sub.category = plan.category;
    for (auto* c : plan.covered) sub.covered_loops.push_back(c->id);

    auto ancestors = graph_detail::ancestors_of(spec, plan.top->id);
    std::vector<int> ids;
    std::set<int> id_set;
    for (auto& n : g.nodes) {
      if (n.loop_id.empty()) continue;
      if (std::find(sub.covered_loops.begin(), sub.covered_loops.end(), n.loop_id) ==
          sub.covered_loops.end())
        continue;
      if (!graph_detail::residues_zero_on(n, ancestors)) continue;
      ids.push_back(n.id);
      id_set.insert(n.id);
    }
    // Boundary memports touched by the region's loads/stores.
    std::set<int> ports;
    for (auto& e : g.edges) {
      if (e.kind != EdgeKind::Mem) continue;
      if (id_set.count(e.dst) && g.nodes[static_cast<size_t>(e.src)].kind == NodeKind::MemPort)
        ports.insert(e.src);
      if (id_set.count(e.src) && g.nodes[static_cast<size_t>(e.dst)].kind == NodeKind::MemPort)
        ports.insert(e.dst);
    }
    for (int p : ports) ids.push_back(p);
    std::sort(ids.begin(), ids.end());

    sub.subgraph = graph_detail::induced_subgraph(g, ids);
    sub.loop_features.tripcount = plan.tc_eff;
    sub.loop_features.pipelined = plan.pipelined;
    out.push_back(std::move(sub));
  }
  return out;
}

// Replaces every instance of the region with one supernode carrying `qor` as
// features; boundary memports stay in the outer graph. Node ids are densely
// renumbered, preserving relative order.
inline Cdfg condense_supernode(const Cdfg& g, const KernelSpec& spec,
                               const PragmaConfig& cfg, const InnerLoopSubgraph& sub,
                               const PredictedQoR& qor) {
  auto ancestors = graph_detail::ancestors_of(spec, sub.loop_id);

  // Group region nodes (memports excluded) by their ancestor residue combo.
  std::map<std::vector<long>, std::vector<int>> instances;
  for (auto& n : g.nodes) {
    if (n.kind != NodeKind::Op) continue;
    if (std::find(sub.covered_loops.begin(), sub.covered_loops.end(), n.loop_id) ==
        sub.covered_loops.end())
      continue;
    std::vector<long> combo;
    for (auto& a : ancestors) {
      long r = 0;
      for (auto& [lid, rv] : n.residues)
        if (lid == a) r = rv;
      combo.push_back(r);
    }
    instances[combo].push_back(n.id);
  }
  if (instances.empty()) throw std::runtime_error("condense: subgraph not found");

  long outer_invocations = 1;
  for (auto& a : ancestors) {
    long tc = graph_detail::loop_tripcount(spec, a);
    outer_invocations *= tc / cfg.loop(a).unroll;
  }

  // old node id -> instance key
  std::map<int, const std::vector<long>*> member;
  std::map<const std::vector<long>*, int> super_anchor;  // min old id per instance
  for (auto& [combo, ids] : instances) {
    for (int id : ids) member[id] = &combo;
    super_anchor[&combo] = *std::min_element(ids.begin(), ids.end());
  }

  Cdfg out;
  out.kernel = g.kernel;
  out.cfg_hash = g.cfg_hash;
  std::map<int, int> remap;                       // surviving old id -> new id
  std::map<const std::vector<long>*, int> super;  // instance -> new super id
  for (auto& n : g.nodes) {
    auto m = member.find(n.id);
    if (m == member.end()) {
      CdfgNode copy = n;
      copy.id = static_cast<int>(out.nodes.size());
      remap[n.id] = copy.id;
      out.nodes.push_back(std::move(copy));
      continue;
    }
    if (super_anchor[m->second] != n.id) continue;  // dropped, not the anchor
    CdfgNode s;
    s.id = static_cast<int>(out.nodes.size());
    s.kind = NodeKind::Super;
    s.optype = OpType::SuperNode;
    s.loop_id = sub.loop_id;
    for (size_t k = 0; k < ancestors.size(); ++k)
      s.residues.emplace_back(ancestors[k], (*m->second)[k]);
    long idx = 0;
    for (auto& [lid, r] : s.residues) idx = idx * cfg.loop(lid).unroll + r;
    s.replica_index = static_cast<int>(idx);
    s.feat.cycles = qor.latency_cycles;
    s.feat.lut = qor.lut;
    s.feat.dsp = qor.dsp;
    s.feat.ff = qor.ff;
    s.feat.delay_ns = 0;
    s.feat.invocations = static_cast<double>(outer_invocations);
    super[m->second] = s.id;
    out.nodes.push_back(std::move(s));
  }

  auto newid = [&](int old) -> int {
    auto m = member.find(old);
    if (m != member.end()) return super[m->second];
    return remap.at(old);
  };
  for (auto& e : g.edges) {
    int s = newid(e.src), d = newid(e.dst);
    if (s == d) continue;  // edge internal to the region
    out.edges.push_back({s, d, e.kind});
  }
  std::sort(out.edges.begin(), out.edges.end());
  out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
  return out;
}

// ---------------------------------------------------------------------------
// JSON dump (stable ordering by id).

inline json graph_to_json(const Cdfg& g) {
  json nodes = json::array();
  for (auto& n : g.nodes) {
    nodes.push_back({{"id", n.id},
                     {"kind", node_kind_name(n.kind)},
                     {"optype", op_type_name(n.optype)},
                     {"replica", n.replica_index},
                     {"loop", n.loop_id},
                     {"features",
                      {{"invocations", n.feat.invocations},
                       {"in_degree", n.feat.in_degree},
                       {"out_degree", n.feat.out_degree},
                       {"cycles", n.feat.cycles},
                       {"delay_ns", n.feat.delay_ns},
                       {"lut", n.feat.lut},
                       {"dsp", n.feat.dsp},
                       {"ff", n.feat.ff}}}});
  }
  json edges = json::array();
  for (auto& e : g.edges)
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"kind", edge_kind_name(e.kind)}});
  return {{"kernel", g.kernel},
          {"config_hash", g.cfg_hash},
          {"nodes", nodes},
          {"edges", edges}};
}

inline Cdfg graph_from_json(const json& j) {
  Cdfg g;
  g.kernel = j.value("kernel", std::string{});
  g.cfg_hash = j.value("config_hash", 0ull);
  for (auto& nj : j.at("nodes")) {
    CdfgNode n;
    n.id = nj.at("id").get<int>();
    std::string kind = nj.at("kind").get<std::string>();
    n.kind = kind == "memport" ? NodeKind::MemPort
             : kind == "supernode" ? NodeKind::Super
                                   : NodeKind::Op;
    n.optype = op_type_from_name(nj.at("optype").get<std::string>()).value();
    n.replica_index = nj.value("replica", 0);
    n.loop_id = nj.value("loop", std::string{});
    auto& f = nj.at("features");
    n.feat.invocations = f.value("invocations", 0.0);
    n.feat.in_degree = f.value("in_degree", 0.0);
    n.feat.out_degree = f.value("out_degree", 0.0);
    n.feat.cycles = f.value("cycles", 0.0);
    n.feat.delay_ns = f.value("delay_ns", 0.0);
    n.feat.lut = f.value("lut", 0.0);
    n.feat.dsp = f.value("dsp", 0.0);
    n.feat.ff = f.value("ff", 0.0);
    g.nodes.push_back(std::move(n));
  }
  for (auto& ej : j.at("edges")) {
    std::string kind = ej.at("kind").get<std::string>();
    g.edges.push_back({ej.at("src").get<int>(), ej.at("dst").get<int>(),
                       kind == "control" ? EdgeKind::Control
                       : kind == "mem"   ? EdgeKind::Mem
                                         : EdgeKind::Data});
  }
  return g;
}

inline uint64_t graph_structural_hash(const Cdfg& g) {
  json j = graph_to_json(g);
  j.erase("config_hash");
  return fnv1a(j.dump());
}

}  // namespace hlsqor
