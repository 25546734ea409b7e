// Hierarchical pipeline: stage-1 models score inner-loop regions (pipelined
// and non-pipelined separately), their predictions become supernode features,
// and a global model scores the condensed whole-program graph.
#pragma once

#include <array>
#include <iostream>
#include <thread>

#include "hlsqor/dataset.hpp"
#include "hlsqor/nn.hpp"

namespace hlsqor {

enum class Target { Latency = 0, Lut = 1, Dsp = 2, Ff = 3 };
inline constexpr int kTargetCount = 4;

inline const char* target_name(Target t) {
  switch (t) {
    case Target::Latency: return "latency";
    case Target::Lut: return "lut";
    case Target::Dsp: return "dsp";
    case Target::Ff: return "ff";
  }
  return "?";
}

inline Target target_from_name(const std::string& s) {
  for (int i = 0; i < kTargetCount; ++i)
    if (s == target_name(Target(i))) return Target(i);
  throw std::runtime_error("unknown target: " + s);
}

inline double label_of(const QoR& q, Target t) {
  switch (t) {
    case Target::Latency: return double(q.latency_cycles);
    case Target::Lut: return double(q.lut);
    case Target::Dsp: return double(q.dsp);
    case Target::Ff: return double(q.ff);
  }
  return 0;
}

struct StageModels {
  std::array<ModelParams, kTargetCount> models;
  NormStats norm;
  bool trained = false;
};

struct ModelBundle {
  StageModels p, np, g;
  json manifest;
};

struct StageMetrics {
  std::array<double, kTargetCount> test_mape{};  // percent, by Target index
};

struct TrainReport {
  StageMetrics p, np, g;
  long counts[3] = {0, 0, 0};
};

enum class SupernodeLabels { Predicted, Oracle };

// ---------------------------------------------------------------------------
// Inference helpers.

namespace hier_detail {

inline GraphInput region_input(const Cdfg& g, const LoopFeatures& lf,
                               const NormStats& norm) {
  GraphInput in = make_graph_input(g, norm);
  in.tripcount = double(lf.tripcount);
  in.ii = double(lf.ii);
  in.pipelined = lf.pipelined ? 1.0 : 0.0;
  return in;
}

}  // namespace hier_detail

// Stage-1 QoR of one inner region: the latency model's refine head yields the
// loop latency; the plain head (exposed via il) yields iteration latency.
struct RegionPrediction {
  PredictedQoR qor;
  double il = 0;
};

inline RegionPrediction predict_region(const StageModels& sm, const Cdfg& g,
                                       const LoopFeatures& lf) {
  GraphInput in = hier_detail::region_input(g, lf, sm.norm);
  RegionPrediction out;
  ForwardCache c;
  auto lat = forward(in, sm.models[0], c);
  out.qor.latency_cycles = predict_value(lat, true);
  out.il = std::max(0.0, std::expm1(lat.head));
  for (int t = 1; t < kTargetCount; ++t) {
    ForwardCache ct;
    auto o = forward(in, sm.models[size_t(t)], ct);
    double v = predict_value(o, false);
    if (t == int(Target::Lut)) out.qor.lut = v;
    if (t == int(Target::Dsp)) out.qor.dsp = v;
    if (t == int(Target::Ff)) out.qor.ff = v;
  }
  return out;
}

inline PredictedQoR predict_global(const StageModels& sm, const Cdfg& condensed) {
  GraphInput in = make_graph_input(condensed, sm.norm);
  PredictedQoR q;
  for (int t = 0; t < kTargetCount; ++t) {
    ForwardCache c;
    double v = predict_value(forward(in, sm.models[size_t(t)], c), false);
    switch (Target(t)) {
      case Target::Latency: q.latency_cycles = v; break;
      case Target::Lut: q.lut = v; break;
      case Target::Dsp: q.dsp = v; break;
      case Target::Ff: q.ff = v; break;
    }
  }
  return q;
}

// Full cascade: inner regions scored by GNN_p/GNN_np (by pipelined flag),
// condensed with predicted supernode features, then the global model.
inline PredictedQoR predict_hierarchical(const KernelSpec& spec, const PragmaConfig& cfg,
                                         const ModelBundle& bundle,
                                         const OpLibrary& lib) {
  auto errs = validate_config(spec, cfg);
  if (!errs.empty()) throw std::runtime_error("invalid config: " + errs.front());

  Cdfg g = build_cdfg(spec, cfg);
  annotate_features(g, spec, cfg, lib);
  auto regions = extract_inner_subgraphs(g, spec, cfg);

  Cdfg condensed = g;
  for (auto& region : regions) {
    auto r = region;
    annotate_loop_features(r, spec, cfg);
    annotate_features(r.subgraph, spec, cfg, lib);
    const StageModels& sm = r.loop_features.pipelined ? bundle.p : bundle.np;
    if (!sm.trained)
      throw std::runtime_error("bundle is missing a trained stage for region " +
                               r.loop_id);
    auto pred = predict_region(sm, r.subgraph, r.loop_features);
    condensed = condense_supernode(condensed, spec, cfg, r, pred.qor);
  }
  annotate_features(condensed, spec, cfg, lib);
  return predict_global(bundle.g, condensed);
}

// ---------------------------------------------------------------------------
// Training.

namespace hier_detail {

inline NormStats stage_norm(const std::vector<Sample>& samples,
                            const std::vector<size_t>& train_idx) {
  std::vector<NodeFeatures> feats;
  for (size_t i : train_idx)
    for (auto& n : samples[i].graph.nodes) feats.push_back(n.feat);
  if (feats.empty()) return NormStats::identity();
  return compute_norm_stats(feats);
}

inline std::vector<GraphInput> stage_inputs(const std::vector<Sample>& samples,
                                            const std::vector<size_t>& idx,
                                            const NormStats& norm, Target t) {
  std::vector<GraphInput> out;
  out.reserve(idx.size());
  for (size_t i : idx) {
    const Sample& s = samples[i];
    GraphInput in = s.stage == "global" ? make_graph_input(s.graph, norm)
                                        : region_input(s.graph, s.lf, norm);
    in.label = label_of(s.labels, t);
    in.label_il = double(s.label_il);
    out.push_back(std::move(in));
  }
  return out;
}

// Trains the four per-target models of one stage; targets run on worker
// threads (each model is seeded independently, so results do not depend on
// the thread count).
inline StageModels train_stage(const std::vector<Sample>& samples,
                               const Split& split, const TrainConfig& base,
                               bool inner_stage, int jobs, StageMetrics& metrics) {
  StageModels sm;
  sm.norm = stage_norm(samples, split.train);

  std::array<std::exception_ptr, kTargetCount> errors{};
  auto run_target = [&](int t) {
    try {
      auto train = stage_inputs(samples, split.train, sm.norm, Target(t));
      auto val = stage_inputs(samples, split.val, sm.norm, Target(t));
      auto test = stage_inputs(samples, split.test, sm.norm, Target(t));
      if (val.empty()) val = train;
      if (test.empty()) test = val;
      bool refine = inner_stage && Target(t) == Target::Latency;
      TrainConfig cfg = base;
      cfg.seed = base.seed * 1000003 + uint64_t(t) + (inner_stage ? 17 : 0);
      auto res = train_model(train, val, refine, cfg);
      sm.models[size_t(t)] = res.params;

      std::vector<double> preds, labels;
      for (auto& g : test) {
        ForwardCache c;
        preds.push_back(predict_value(forward(g, res.params, c), refine));
        labels.push_back(g.label);
      }
      metrics.test_mape[size_t(t)] = mape_pct(preds, labels);
    } catch (...) {
      errors[size_t(t)] = std::current_exception();
    }
  };

  if (jobs > 1) {
    std::vector<std::thread> workers;
    for (int t = 0; t < kTargetCount; ++t) workers.emplace_back(run_target, t);
    for (auto& w : workers) w.join();
  } else {
    for (int t = 0; t < kTargetCount; ++t) run_target(t);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  sm.trained = true;
  return sm;
}

inline Split safe_split(const std::vector<Sample>& samples, uint64_t seed,
                        SplitMode mode) {
  if (samples.size() >= 10) return split_dataset(samples, seed, mode);
  // Degenerate stage: train on everything, validate in-sample.
  Split sp;
  for (size_t i = 0; i < samples.size(); ++i) sp.train.push_back(i);
  return sp;
}

// Replace supernode features in stored global graphs with frozen stage-1
// predictions of the embedded inner regions.
inline void apply_predicted_supernodes(std::vector<Sample>& global_samples,
                                       const ModelBundle& bundle) {
  for (auto& s : global_samples) {
    std::map<std::string, RegionPrediction> by_loop;
    for (auto& r : s.inner) {
      const StageModels& sm = r.lf.pipelined ? bundle.p : bundle.np;
      if (!sm.trained)
        throw std::runtime_error("missing stage-1 models for loop " + r.loop_id);
      by_loop[r.loop_id] = predict_region(sm, r.graph, r.lf);
    }
    for (auto& n : s.graph.nodes) {
      if (n.kind != NodeKind::Super) continue;
      auto it = by_loop.find(n.loop_id);
      if (it == by_loop.end())
        throw std::runtime_error("supernode without inner record: " + n.loop_id);
      n.feat.cycles = it->second.qor.latency_cycles;
      n.feat.lut = it->second.qor.lut;
      n.feat.dsp = it->second.qor.dsp;
      n.feat.ff = it->second.qor.ff;
    }
  }
}

}  // namespace hier_detail

inline std::pair<ModelBundle, TrainReport> train_hierarchical(
    const DatasetTriple& ds, const TrainConfig& base, uint64_t split_seed,
    SplitMode mode, SupernodeLabels snl, int jobs) {
  ModelBundle bundle;
  TrainReport report;
  report.counts[0] = long(ds.inner_p.size());
  report.counts[1] = long(ds.inner_np.size());
  report.counts[2] = long(ds.global_s.size());

  auto train_inner = [&](const std::vector<Sample>& samples, StageModels& sm,
                         StageMetrics& metrics, const char* tag) {
    if (samples.empty()) {
      std::cerr << "warning: stage " << tag << " has no samples; skipping\n";
      sm.norm = NormStats::identity();
      return;
    }
    auto split = hier_detail::safe_split(samples, split_seed, mode);
    sm = hier_detail::train_stage(samples, split, base, true, jobs, metrics);
    for (int t = 0; t < kTargetCount; ++t)
      if (metrics.test_mape[size_t(t)] > base.abort_mape)
        throw std::runtime_error(std::string("stage ") + tag + " " +
                                 target_name(Target(t)) + " MAPE above abort threshold");
  };
  train_inner(ds.inner_p, bundle.p, report.p, "gnn_p");
  train_inner(ds.inner_np, bundle.np, report.np, "gnn_np");

  if (ds.global_s.empty()) throw std::runtime_error("global stage has no samples");
  std::vector<Sample> global_samples = ds.global_s;
  if (snl == SupernodeLabels::Predicted)
    hier_detail::apply_predicted_supernodes(global_samples, bundle);
  auto split = hier_detail::safe_split(global_samples, split_seed, mode);
  bundle.g = hier_detail::train_stage(global_samples, split, base, false, jobs,
                                      report.g);

  bundle.manifest = {{"variant", variant_name(base.variant)},
                     {"hidden", base.hidden},
                     {"epochs", base.epochs},
                     {"seed", base.seed},
                     {"split_seed", split_seed},
                     {"supernode_labels",
                      snl == SupernodeLabels::Predicted ? "predicted" : "oracle"}};
  return {std::move(bundle), report};
}

// ---------------------------------------------------------------------------
// Bundle directory layout:
//   dir/{gnn_p,gnn_np,gnn_g}/{latency,lut,dsp,ff}.bin + norm.json + manifest.json

inline void save_bundle(const ModelBundle& bundle, const std::string& dir) {
  namespace fs = std::filesystem;
  const StageModels* stages[3] = {&bundle.p, &bundle.np, &bundle.g};
  const char* names[3] = {"gnn_p", "gnn_np", "gnn_g"};
  json norms;
  for (int s = 0; s < 3; ++s) {
    fs::create_directories(fs::path(dir) / names[s]);
    norms[names[s]] = norm_to_json(stages[s]->norm);
    norms[names[s]]["trained"] = stages[s]->trained;
    if (!stages[s]->trained) continue;
    for (int t = 0; t < kTargetCount; ++t)
      save_model(stages[s]->models[size_t(t)],
                 (fs::path(dir) / names[s] / (std::string(target_name(Target(t))) + ".bin"))
                     .string());
  }
  std::ofstream(fs::path(dir) / "norm.json", std::ios::binary) << norms.dump(2) << '\n';
  std::ofstream(fs::path(dir) / "manifest.json", std::ios::binary)
      << bundle.manifest.dump(2) << '\n';
}

inline ModelBundle load_bundle(const std::string& dir) {
  namespace fs = std::filesystem;
  ModelBundle bundle;
  std::ifstream nf(fs::path(dir) / "norm.json");
  if (!nf) throw std::runtime_error("cannot read bundle norm.json in " + dir);
  json norms = json::parse(nf);
  StageModels* stages[3] = {&bundle.p, &bundle.np, &bundle.g};
  const char* names[3] = {"gnn_p", "gnn_np", "gnn_g"};
  for (int s = 0; s < 3; ++s) {
    stages[s]->norm = norm_from_json(norms.at(names[s]));
    stages[s]->trained = norms.at(names[s]).value("trained", true);
    if (!stages[s]->trained) continue;
    for (int t = 0; t < kTargetCount; ++t)
      stages[s]->models[size_t(t)] = load_model(
          (fs::path(dir) / names[s] / (std::string(target_name(Target(t))) + ".bin"))
              .string());
  }
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (mf) bundle.manifest = json::parse(mf);
  return bundle;
}

}  // namespace hlsqor
