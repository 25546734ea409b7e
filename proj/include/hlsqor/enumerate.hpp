// Design-space enumeration: per-loop {pipeline} x {valid unroll factors},
// array partition factors tied to the unroll factors of the indexing loops.
#pragma once

#include <algorithm>
#include <functional>
#include <set>
#include <vector>

#include "hlsqor/ir.hpp"

namespace hlsqor {

namespace detail {

// Unroll factor of the loop variable driving each array dimension, maximized
// over all accesses. Dimensions never indexed by a loop variable keep factor 1.
inline void derive_partition_factors(const KernelSpec& spec, PragmaConfig& cfg) {
  std::map<std::string, long> unroll_of;
  for (auto* l : all_loops(spec)) unroll_of[l->id] = cfg.loop(l->id).unroll;

  std::map<std::string, std::vector<long>> factors;
  for (auto& a : spec.arrays) factors[a.id].assign(a.dims.size(), 1);

  std::function<void(const LoopSpec&)> walk = [&](const LoopSpec& l) {
    for (auto& st : l.body) {
      if (!st.access) continue;
      auto& f = factors[st.access->array];
      for (size_t d = 0; d < st.access->indices.size(); ++d) {
        if (st.access->indices[d].dynamic) continue;
        for (auto& [var, c] : st.access->indices[d].coeffs) {
          if (c == 0) continue;
          auto it = unroll_of.find(var);
          if (it != unroll_of.end()) f[d] = std::max(f[d], it->second);
        }
      }
    }
    for (auto& c : l.children) walk(c);
  };
  for (auto& l : spec.root_loops) walk(l);

  for (auto& a : spec.arrays) {
    ArrayDirective d;
    d.factors = factors[a.id];
    d.type = PartitionType::Cyclic;
    cfg.arrays[a.id] = d;
  }
}

}  // namespace detail

// Deterministic enumeration over the Cartesian product of per-loop pragma
// choices; invalid combinations (nested pipelining, non-dividing partition
// factors) are filtered out.
inline std::vector<PragmaConfig> enumerate_configs(const KernelSpec& spec,
                                                   const std::set<long>& factors) {
  auto loops = all_loops(spec);
  std::vector<std::vector<LoopDirective>> options(loops.size());
  for (size_t i = 0; i < loops.size(); ++i) {
    for (bool pipe : {false, true})
      for (long f : factors)
        if (f >= 1 && loops[i]->tripcount % f == 0)
          options[i].push_back(LoopDirective{pipe, f});
  }

  std::vector<PragmaConfig> out;
  std::vector<size_t> cursor(loops.size(), 0);
  if (loops.empty()) return out;
  for (;;) {
    PragmaConfig cfg;
    for (size_t i = 0; i < loops.size(); ++i)
      cfg.loops[loops[i]->id] = options[i][cursor[i]];
    detail::derive_partition_factors(spec, cfg);
    if (validate_config(spec, cfg).empty()) out.push_back(std::move(cfg));
    // Odometer increment.
    size_t i = 0;
    for (; i < loops.size(); ++i) {
      if (++cursor[i] < options[i].size()) break;
      cursor[i] = 0;
    }
    if (i == loops.size()) break;
  }
  return out;
}

}  // namespace hlsqor
