// Design-space exploration: enumerate pragma configs, score them with the
// model or the oracle, compute Pareto frontiers, and measure approximation
// quality with ADRS.
#pragma once

#include <chrono>
#include <optional>

#include "hlsqor/hierarchy.hpp"

namespace hlsqor {

struct DesignPoint {
  PragmaConfig config;
  uint64_t cfg_hash = 0;
  PredictedQoR predicted;
  std::optional<QoR> actual;
};

// 2-D collapses resources into a single weighted cost; 4-D keeps them apart.
enum class ObjectiveMode { TwoD, FourD };

inline std::vector<double> objectives_of(const PredictedQoR& q, ObjectiveMode m) {
  if (m == ObjectiveMode::TwoD)
    return {q.latency_cycles, q.lut + 100.0 * q.dsp + q.ff};
  return {q.latency_cycles, q.lut, q.dsp, q.ff};
}

inline std::vector<double> objectives_of(const QoR& q, ObjectiveMode m) {
  PredictedQoR p;
  p.latency_cycles = double(q.latency_cycles);
  p.lut = double(q.lut);
  p.dsp = double(q.dsp);
  p.ff = double(q.ff);
  return objectives_of(p, m);
}

// a dominates b: component-wise <= with at least one strict < (minimization).
inline bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  bool strict = false;
  for (size_t d = 0; d < a.size(); ++d) {
    if (a[d] > b[d]) return false;
    if (a[d] < b[d]) strict = true;
  }
  return strict;
}

// Indices of the non-dominated subset; exact duplicates keep one
// representative. Stable order by (objectives, config hash).
inline std::vector<size_t> pareto_filter(const std::vector<std::vector<double>>& objs,
                                         const std::vector<uint64_t>& hashes) {
  if (objs.empty()) throw std::runtime_error("pareto_filter: no points");
  std::vector<size_t> order(objs.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (objs[a] != objs[b]) return objs[a] < objs[b];
    return hashes[a] < hashes[b];
  });
  std::vector<size_t> front;
  for (size_t i : order) {
    bool dominated = false;
    for (size_t j : front) {
      if (objs[j] == objs[i] || dominates(objs[j], objs[i])) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(i);
  }
  return front;
}

// Average distance from reference set: mean over exact points of the nearest
// approximate point under f = worst-dimension relative shortfall. Denominators
// are clamped at 1 so zero-valued reference objectives stay well-defined.
inline double adrs(const std::vector<std::vector<double>>& gamma,
                   const std::vector<std::vector<double>>& omega) {
  if (gamma.empty() || omega.empty()) throw std::runtime_error("adrs: empty set");
  double acc = 0;
  for (auto& g : gamma) {
    double best = std::numeric_limits<double>::infinity();
    for (auto& w : omega) {
      if (w.size() != g.size()) throw std::runtime_error("adrs: dimension mismatch");
      double f = 0;
      for (size_t d = 0; d < g.size(); ++d)
        f = std::max(f, std::max(0.0, (w[d] - g[d]) / std::max(g[d], 1.0)));
      best = std::min(best, f);
    }
    acc += best;
  }
  return acc / double(gamma.size());
}

struct DseReport {
  std::vector<DesignPoint> points;
  std::vector<size_t> predicted_front;  // indices into points (model frontier)
  std::vector<size_t> actual_front;     // oracle frontier (exact pass only)
  double adrs_value = -1;               // -1 when no exact pass
  double model_seconds = 0;
  double oracle_seconds = 0;
  ObjectiveMode mode = ObjectiveMode::TwoD;
};

namespace dse_detail {

template <typename Fn>
void parallel_for(size_t n, int jobs, Fn&& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::array<std::exception_ptr, 64> errs{};
  int workers = std::min<int>(jobs, 64);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (size_t i = size_t(w); i < n; i += size_t(workers)) fn(i);
      } catch (...) {
        errs[size_t(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace dse_detail

// Model pass over the whole enumerated space; optional oracle pass yields the
// exact frontier and ADRS. The approximate frontier is selected on predicted
// objectives; when oracle values exist, ADRS compares both frontiers in true
// objective space (selection quality, not value error).
inline DseReport explore(const KernelSpec& spec, const ModelBundle& bundle,
                         const OpLibrary& lib, const std::set<long>& factors,
                         bool exact, int jobs,
                         ObjectiveMode mode = ObjectiveMode::TwoD) {
  using clock = std::chrono::steady_clock;
  auto configs = enumerate_configs(spec, factors);
  if (configs.empty()) throw std::runtime_error("explore: empty design space");

  DseReport rep;
  rep.mode = mode;
  rep.points.resize(configs.size());
  for (size_t i = 0; i < configs.size(); ++i) {
    rep.points[i].config = configs[i];
    rep.points[i].cfg_hash = config_hash(configs[i]);
  }

  auto t0 = clock::now();
  dse_detail::parallel_for(configs.size(), jobs, [&](size_t i) {
    rep.points[i].predicted = predict_hierarchical(spec, configs[i], bundle, lib);
  });
  rep.model_seconds = std::chrono::duration<double>(clock::now() - t0).count();

  std::vector<std::vector<double>> pred_objs(configs.size());
  std::vector<uint64_t> hashes(configs.size());
  for (size_t i = 0; i < configs.size(); ++i) {
    pred_objs[i] = objectives_of(rep.points[i].predicted, mode);
    hashes[i] = rep.points[i].cfg_hash;
  }
  rep.predicted_front = pareto_filter(pred_objs, hashes);

  if (exact) {
    auto t1 = clock::now();
    dse_detail::parallel_for(configs.size(), jobs, [&](size_t i) {
      rep.points[i].actual = kernel_qor(spec, configs[i], lib);
    });
    rep.oracle_seconds = std::chrono::duration<double>(clock::now() - t1).count();

    std::vector<std::vector<double>> true_objs(configs.size());
    for (size_t i = 0; i < configs.size(); ++i)
      true_objs[i] = objectives_of(*rep.points[i].actual, mode);
    rep.actual_front = pareto_filter(true_objs, hashes);

    std::vector<std::vector<double>> gamma, omega;
    for (size_t i : rep.actual_front) gamma.push_back(true_objs[i]);
    for (size_t i : rep.predicted_front) omega.push_back(true_objs[i]);
    rep.adrs_value = adrs(gamma, omega);
  }
  return rep;
}

inline json dse_report_to_json(const DseReport& rep) {
  json j;
  j["objective_mode"] = rep.mode == ObjectiveMode::TwoD ? "2d" : "4d";
  j["model_seconds"] = rep.model_seconds;
  j["oracle_seconds"] = rep.oracle_seconds;
  if (rep.adrs_value >= 0) j["adrs"] = rep.adrs_value;
  json pts = json::array();
  for (auto& p : rep.points) {
    json pj;
    pj["config"] = config_to_json(p.config);
    pj["config_hash"] = p.cfg_hash;
    pj["predicted"] = qor_to_json(p.predicted);
    if (p.actual) pj["actual"] = qor_to_json(*p.actual);
    pts.push_back(std::move(pj));
  }
  j["points"] = std::move(pts);
  j["predicted_front"] = rep.predicted_front;
  if (!rep.actual_front.empty()) j["actual_front"] = rep.actual_front;
  return j;
}

}  // namespace hlsqor
