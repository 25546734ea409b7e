// Kernel program model: loop nests, typed operations, affine array accesses,
// and per-design-point pragma configurations.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace hlsqor {

using json = nlohmann::json;

enum class OpType {
  Add, Sub, Mul, Div, FAdd, FSub, FMul, FDiv,
  ICmp, FCmp, Select, Load, Store, Phi, Br,
  MemPort, SuperNode,
};

// 15 DSL optypes + memport + supernode.
inline constexpr int kOpTypeCount = 17;

inline const char* op_type_name(OpType t) {
  switch (t) {
    case OpType::Add: return "add";
    case OpType::Sub: return "sub";
    case OpType::Mul: return "mul";
    case OpType::Div: return "div";
    case OpType::FAdd: return "fadd";
    case OpType::FSub: return "fsub";
    case OpType::FMul: return "fmul";
    case OpType::FDiv: return "fdiv";
    case OpType::ICmp: return "icmp";
    case OpType::FCmp: return "fcmp";
    case OpType::Select: return "select";
    case OpType::Load: return "load";
    case OpType::Store: return "store";
    case OpType::Phi: return "phi";
    case OpType::Br: return "br";
    case OpType::MemPort: return "memport";
    case OpType::SuperNode: return "supernode";
  }
  return "?";
}

inline std::optional<OpType> op_type_from_name(const std::string& s) {
  static const std::map<std::string, OpType> table = {
      {"add", OpType::Add},       {"sub", OpType::Sub},
      {"mul", OpType::Mul},       {"div", OpType::Div},
      {"fadd", OpType::FAdd},     {"fsub", OpType::FSub},
      {"fmul", OpType::FMul},     {"fdiv", OpType::FDiv},
      {"icmp", OpType::ICmp},     {"fcmp", OpType::FCmp},
      {"select", OpType::Select}, {"load", OpType::Load},
      {"store", OpType::Store},   {"phi", OpType::Phi},
      {"br", OpType::Br},         {"memport", OpType::MemPort},
      {"supernode", OpType::SuperNode},
  };
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

inline bool is_memory_op(OpType t) { return t == OpType::Load || t == OpType::Store; }

// Per-dimension index: affine combination of loop variables, or dynamic.
struct AffineIndex {
  std::map<std::string, long> coeffs;  // loop var -> coefficient
  long constant = 0;
  bool dynamic = false;

  bool operator==(const AffineIndex&) const = default;
};

struct AccessExpr {
  std::string array;
  std::vector<AffineIndex> indices;

  bool operator==(const AccessExpr&) const = default;
};

struct Statement {
  std::string id;
  OpType optype = OpType::Add;
  std::vector<std::string> operands;      // statement ids or loop vars
  std::optional<AccessExpr> access;       // exactly one for load/store

  bool operator==(const Statement&) const = default;
};

struct LoopSpec {
  std::string id;
  long tripcount = 1;
  std::vector<Statement> body;
  std::vector<LoopSpec> children;
  // Original interleaving of statements and child loops inside the braces:
  // (is_loop, index into body or children).
  std::vector<std::pair<bool, size_t>> item_order;

  bool perfect() const { return body.empty() && children.size() == 1; }
};

struct DependenceSpec {
  std::string src;
  std::string dst;
  long delay = 1;     // cycles between the dependent instructions
  long distance = 1;  // iteration distance
};

struct ArraySpec {
  std::string id;
  std::vector<long> dims;
  std::string element_type = "i32";  // i32 | f32
  long base_ports = 2;
};

struct KernelSpec {
  std::string name;
  std::vector<ArraySpec> arrays;
  std::vector<DependenceSpec> deps;
  std::vector<LoopSpec> root_loops;

  const ArraySpec* find_array(const std::string& id) const {
    for (auto& a : arrays)
      if (a.id == id) return &a;
    return nullptr;
  }

  template <typename Fn>
  void for_each_loop(Fn&& fn) const {
    for (auto& l : root_loops) walk(l, nullptr, fn);
  }

 private:
  template <typename Fn>
  static void walk(const LoopSpec& l, const LoopSpec* parent, Fn& fn) {
    fn(l, parent);
    for (auto& c : l.children) walk(c, &l, fn);
  }
};

enum class PartitionType { Cyclic, Block };

struct LoopDirective {
  bool pipeline = false;
  long unroll = 1;
  bool operator==(const LoopDirective&) const = default;
};

struct ArrayDirective {
  std::vector<long> factors;  // one per dimension
  PartitionType type = PartitionType::Cyclic;
  bool operator==(const ArrayDirective&) const = default;
};

struct PragmaConfig {
  std::map<std::string, LoopDirective> loops;
  std::map<std::string, ArrayDirective> arrays;

  LoopDirective loop(const std::string& id) const {
    auto it = loops.find(id);
    return it == loops.end() ? LoopDirective{} : it->second;
  }
  ArrayDirective array(const ArraySpec& a) const {
    auto it = arrays.find(a.id);
    if (it != arrays.end()) return it->second;
    ArrayDirective d;
    d.factors.assign(a.dims.size(), 1);
    return d;
  }
  bool operator==(const PragmaConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Config (de)serialization.

inline json config_to_json(const PragmaConfig& cfg) {
  json loops = json::object();
  for (auto& [id, d] : cfg.loops)
    loops[id] = {{"pipeline", d.pipeline}, {"unroll", d.unroll}};
  json arrays = json::object();
  for (auto& [id, d] : cfg.arrays)
    arrays[id] = {{"factors", d.factors},
                  {"type", d.type == PartitionType::Cyclic ? "cyclic" : "block"}};
  return {{"loops", loops}, {"arrays", arrays}};
}

inline PragmaConfig config_from_json(const json& j) {
  PragmaConfig cfg;
  if (j.contains("loops"))
    for (auto& [id, d] : j.at("loops").items()) {
      LoopDirective ld;
      ld.pipeline = d.value("pipeline", false);
      ld.unroll = d.value("unroll", 1L);
      cfg.loops[id] = ld;
    }
  if (j.contains("arrays"))
    for (auto& [id, d] : j.at("arrays").items()) {
      ArrayDirective ad;
      ad.factors = d.value("factors", std::vector<long>{});
      ad.type = d.value("type", std::string("cyclic")) == "block"
                    ? PartitionType::Block
                    : PartitionType::Cyclic;
      cfg.arrays[id] = ad;
    }
  return cfg;
}

// FNV-1a, stable across platforms; used for config/graph hashes.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 14695981039346656037ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline uint64_t fnv1a(const std::string& s, uint64_t h = 14695981039346656037ull) {
  return fnv1a(s.data(), s.size(), h);
}

inline uint64_t config_hash(const PragmaConfig& cfg) {
  return fnv1a(config_to_json(cfg).dump());
}

// ---------------------------------------------------------------------------
// Validation.

namespace detail {

inline void collect_loops(const LoopSpec& l, std::vector<const LoopSpec*>& out) {
  out.push_back(&l);
  for (auto& c : l.children) collect_loops(c, out);
}

inline bool all_descendants_fully_unrolled(const LoopSpec& l, const PragmaConfig& cfg) {
  for (auto& c : l.children) {
    if (cfg.loop(c.id).unroll != c.tripcount) return false;
    if (!all_descendants_fully_unrolled(c, cfg)) return false;
  }
  return true;
}

}  // namespace detail

inline std::vector<const LoopSpec*> all_loops(const KernelSpec& spec) {
  std::vector<const LoopSpec*> out;
  for (auto& l : spec.root_loops) detail::collect_loops(l, out);
  return out;
}

// Returns the list of violated invariants; empty means the config is valid.
inline std::vector<std::string> validate_config(const KernelSpec& spec,
                                                const PragmaConfig& cfg) {
  std::vector<std::string> errs;
  auto loops = all_loops(spec);
  std::set<std::string> loop_ids;
  for (auto* l : loops) loop_ids.insert(l->id);

  for (auto& [id, d] : cfg.loops) {
    if (!loop_ids.count(id)) {
      errs.push_back("unknown loop '" + id + "'");
      continue;
    }
    if (d.unroll < 1) errs.push_back("loop '" + id + "': unroll factor must be >= 1");
  }
  for (auto& [id, d] : cfg.arrays) {
    auto* a = spec.find_array(id);
    if (!a) {
      errs.push_back("unknown array '" + id + "'");
      continue;
    }
    if (d.factors.size() != a->dims.size()) {
      errs.push_back("array '" + id + "': factor count does not match dimensionality");
      continue;
    }
    for (size_t i = 0; i < d.factors.size(); ++i) {
      if (d.factors[i] < 1 || a->dims[i] % d.factors[i] != 0)
        errs.push_back("array '" + id + "': partition factor " +
                       std::to_string(d.factors[i]) + " does not divide dim " +
                       std::to_string(a->dims[i]));
    }
  }

  for (auto* l : loops) {
    auto d = cfg.loop(l->id);
    if (l->tripcount % d.unroll != 0)
      errs.push_back("loop '" + l->id + "': unroll factor " + std::to_string(d.unroll) +
                     " does not divide tripcount " + std::to_string(l->tripcount));
    if (d.pipeline) {
      // No pipelined descendants; every descendant must be fully unrolled.
      std::vector<const LoopSpec*> sub;
      for (auto& c : l->children) detail::collect_loops(c, sub);
      for (auto* s : sub) {
        if (cfg.loop(s->id).pipeline)
          errs.push_back("loop '" + s->id + "': pipelined under pipelined loop '" +
                         l->id + "'");
        if (cfg.loop(s->id).unroll != s->tripcount)
          errs.push_back("loop '" + s->id + "': must be fully unrolled under pipelined loop '" +
                         l->id + "' (unroll " + std::to_string(cfg.loop(s->id).unroll) +
                         " != tripcount " + std::to_string(s->tripcount) + ")");
      }
    }
  }
  return errs;
}

// ---------------------------------------------------------------------------
// Canonical printer (inverse of parse_kernel up to whitespace).

namespace detail {

inline std::string print_affine(const AffineIndex& ix) {
  if (ix.dynamic) return "dyn";
  std::string s;
  for (auto& [var, c] : ix.coeffs) {
    if (c == 0) continue;
    if (!s.empty()) s += "+";
    if (c == 1)
      s += var;
    else
      s += std::to_string(c) + "*" + var;
  }
  if (ix.constant != 0 || s.empty()) {
    if (!s.empty()) s += "+";
    s += std::to_string(ix.constant);
  }
  return s;
}

inline std::string print_operand(const Statement& st, size_t k, bool is_access) {
  if (is_access) {
    std::string s = st.access->array;
    for (auto& ix : st.access->indices) s += "[" + print_affine(ix) + "]";
    return s;
  }
  return st.operands[k];
}

inline void print_loop(const LoopSpec& l, std::ostringstream& os, int indent) {
  std::string pad(indent * 2, ' ');
  os << pad << "loop " << l.id << " in 0.." << l.tripcount << " {\n";
  for (auto& [is_loop, idx] : l.item_order) {
    if (is_loop) {
      print_loop(l.children[idx], os, indent + 1);
    } else {
      auto& st = l.body[idx];
      os << pad << "  " << st.id << " = " << op_type_name(st.optype);
      bool first = true;
      for (size_t k = 0; k < st.operands.size(); ++k) {
        os << (first ? " " : ", ") << st.operands[k];
        first = false;
      }
      if (st.access) {
        std::string a = st.access->array;
        for (auto& ix : st.access->indices) a += "[" + print_affine(ix) + "]";
        os << (first ? " " : ", ") << a;
      }
      os << ";\n";
    }
  }
  os << pad << "}\n";
}

}  // namespace detail

inline std::string print_kernel(const KernelSpec& spec) {
  std::ostringstream os;
  os << "kernel " << spec.name << " {\n";
  for (auto& a : spec.arrays) {
    os << "  array " << a.id;
    for (long d : a.dims) os << "[" << d << "]";
    os << " : " << a.element_type;
    if (a.base_ports != 2) os << " ports " << a.base_ports;
    os << ";\n";
  }
  for (auto& d : spec.deps)
    os << "  dep " << d.src << " -> " << d.dst << " delay " << d.delay
       << " distance " << d.distance << ";\n";
  for (auto& l : spec.root_loops) detail::print_loop(l, os, 1);
  os << "}\n";
  return os.str();
}

}  // namespace hlsqor
