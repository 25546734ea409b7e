// Dataset generation for the three model stages. Every enumerated
// (kernel, config) pair contributes one sample per inner region plus one
// condensed whole-program sample, all labeled by the analytical oracle.
#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "hlsqor/enumerate.hpp"
#include "hlsqor/oracle.hpp"

namespace hlsqor {

// Inner-region record embedded in global samples so the hierarchical trainer
// can recompute supernode features from frozen stage-1 models.
struct InnerRecord {
  std::string loop_id;
  Cdfg graph;  // annotated region instance
  LoopFeatures lf;
  QoR labels;   // oracle region QoR
  long il = 0;  // oracle iteration latency
};

struct Sample {
  std::string kernel;
  PragmaConfig config;
  uint64_t config_hash = 0;
  std::string stage;  // "inner-p" | "inner-np" | "global"
  Cdfg graph;
  LoopFeatures lf;  // inner samples only
  QoR labels;
  long label_il = 0;               // inner samples only
  std::vector<InnerRecord> inner;  // global samples only
};

struct DatasetTriple {
  std::vector<Sample> inner_p, inner_np, global_s;
  long skipped = 0;  // configs the oracle rejected
  long deduped = 0;  // samples dropped as structural duplicates
};

// ---------------------------------------------------------------------------
// Serialization.

inline json sample_to_json(const Sample& s) {
  json j;
  j["kernel"] = s.kernel;
  j["config"] = config_to_json(s.config);
  j["config_hash"] = s.config_hash;
  j["stage"] = s.stage;
  j["graph"] = graph_to_json(s.graph);
  j["labels"] = qor_to_json(s.labels);
  if (s.stage != "global") {
    j["loop_features"] = {{"tripcount", s.lf.tripcount},
                          {"pipelined", s.lf.pipelined},
                          {"ii", s.lf.ii}};
    j["label_il"] = s.label_il;
  } else {
    json inner = json::array();
    for (auto& r : s.inner) {
      inner.push_back({{"loop_id", r.loop_id},
                       {"graph", graph_to_json(r.graph)},
                       {"loop_features",
                        {{"tripcount", r.lf.tripcount},
                         {"pipelined", r.lf.pipelined},
                         {"ii", r.lf.ii}}},
                       {"labels", qor_to_json(r.labels)},
                       {"il", r.il}});
    }
    j["inner"] = std::move(inner);
  }
  return j;
}

inline LoopFeatures loop_features_from_json(const json& j) {
  LoopFeatures lf;
  lf.tripcount = j.at("tripcount").get<long>();
  lf.pipelined = j.at("pipelined").get<bool>();
  lf.ii = j.at("ii").get<long>();
  return lf;
}

inline Sample sample_from_json(const json& j) {
  Sample s;
  s.kernel = j.at("kernel").get<std::string>();
  s.config = config_from_json(j.at("config"));
  s.config_hash = j.at("config_hash").get<uint64_t>();
  s.stage = j.at("stage").get<std::string>();
  s.graph = graph_from_json(j.at("graph"));
  s.labels = qor_from_json(j.at("labels"));
  if (s.stage != "global") {
    s.lf = loop_features_from_json(j.at("loop_features"));
    s.label_il = j.at("label_il").get<long>();
  } else {
    for (auto& rj : j.at("inner")) {
      InnerRecord r;
      r.loop_id = rj.at("loop_id").get<std::string>();
      r.graph = graph_from_json(rj.at("graph"));
      r.lf = loop_features_from_json(rj.at("loop_features"));
      r.labels = qor_from_json(rj.at("labels"));
      r.il = rj.at("il").get<long>();
      s.inner.push_back(std::move(r));
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Generation.

namespace ds_detail {

// Duplicate key: structure + labels; identical pairs add no information.
inline uint64_t dedup_key(const Sample& s) {
  uint64_t h = graph_structural_hash(s.graph);
  std::ostringstream os;
  os << s.labels.latency_cycles << ',' << s.labels.lut << ',' << s.labels.dsp << ','
     << s.labels.ff << ',' << s.label_il << ',' << s.lf.tripcount << ',' << s.lf.ii
     << ',' << s.lf.pipelined;
  return h ^ fnv1a(os.str());
}

}  // namespace ds_detail

inline DatasetTriple generate_dataset(const std::vector<KernelSpec>& corpus,
                                      const std::set<long>& factors,
                                      const OpLibrary& lib) {
  DatasetTriple out;
  std::set<uint64_t> seen_inner, seen_global;
  for (const auto& spec : corpus) {
    for (const auto& cfg : enumerate_configs(spec, factors)) {
      try {
        Cdfg g = build_cdfg(spec, cfg);
        annotate_features(g, spec, cfg, lib);
        auto regions = extract_inner_subgraphs(g, spec, cfg);

        Sample global;
        global.kernel = spec.name;
        global.config = cfg;
        global.config_hash = config_hash(cfg);
        global.stage = "global";
        global.labels = kernel_qor(spec, cfg, lib);

        Cdfg condensed = g;
        for (auto& region : regions) {
          auto r = region;
          annotate_loop_features(r, spec, cfg);
          annotate_features(r.subgraph, spec, cfg, lib);
          auto rq = region_qor(r, spec, cfg, lib);

          Sample inner;
          inner.kernel = spec.name;
          inner.config = cfg;
          inner.config_hash = global.config_hash;
          inner.stage = r.loop_features.pipelined ? "inner-p" : "inner-np";
          inner.graph = r.subgraph;
          inner.lf = r.loop_features;
          inner.labels = rq.qor;
          inner.label_il = rq.il;
          if (seen_inner.insert(ds_detail::dedup_key(inner)).second)
            (r.loop_features.pipelined ? out.inner_p : out.inner_np)
                .push_back(std::move(inner));
          else
            ++out.deduped;

          InnerRecord rec;
          rec.loop_id = r.loop_id;
          rec.graph = r.subgraph;
          rec.lf = r.loop_features;
          rec.labels = rq.qor;
          rec.il = rq.il;
          global.inner.push_back(std::move(rec));

          PredictedQoR teacher;
          teacher.latency_cycles = static_cast<double>(rq.qor.latency_cycles);
          teacher.lut = static_cast<double>(rq.qor.lut);
          teacher.dsp = static_cast<double>(rq.qor.dsp);
          teacher.ff = static_cast<double>(rq.qor.ff);
          condensed = condense_supernode(condensed, spec, cfg, r, teacher);
        }
        annotate_features(condensed, spec, cfg, lib);  // refresh degrees
        global.graph = std::move(condensed);
        if (seen_global.insert(ds_detail::dedup_key(global)).second)
          out.global_s.push_back(std::move(global));
        else
          ++out.deduped;
      } catch (const std::exception&) {
        ++out.skipped;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splits.

enum class SplitMode { Random, ByKernel };

struct Split {
  std::vector<size_t> train, val, test;
};

// 80/10/10, deterministic by seed. ByKernel keeps all samples of one kernel
// in a single fold (held-out-kernel evaluation).
inline Split split_dataset(const std::vector<Sample>& samples, uint64_t seed,
                           SplitMode mode) {
  size_t n = samples.size();
  if (n < 10) throw std::runtime_error("split: need at least 10 samples");
  Split sp;
  std::mt19937_64 rng(seed);
  if (mode == SplitMode::Random) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    size_t ntrain = n * 8 / 10, nval = n * 9 / 10 - ntrain;
    sp.train.assign(idx.begin(), idx.begin() + long(ntrain));
    sp.val.assign(idx.begin() + long(ntrain), idx.begin() + long(ntrain + nval));
    sp.test.assign(idx.begin() + long(ntrain + nval), idx.end());
  } else {
    std::map<std::string, std::vector<size_t>> by_kernel;
    for (size_t i = 0; i < n; ++i) by_kernel[samples[i].kernel].push_back(i);
    if (by_kernel.size() < 3)
      throw std::runtime_error("split: kernel-stratified mode needs >= 3 kernels");
    std::vector<std::string> names;
    for (auto& [k, v] : by_kernel) names.push_back(k);
    std::shuffle(names.begin(), names.end(), rng);
    // Greedy fill toward the 80/10/10 targets, largest deficit first.
    double target[3] = {0.8 * double(n), 0.1 * double(n), 0.1 * double(n)};
    double have[3] = {0, 0, 0};
    std::vector<size_t>* folds[3] = {&sp.train, &sp.val, &sp.test};
    for (auto& name : names) {
      int best = 0;
      double worst = -1e18;
      for (int f = 0; f < 3; ++f) {
        double deficit = target[f] - have[f];
        if (deficit > worst) {
          worst = deficit;
          best = f;
        }
      }
      for (size_t i : by_kernel[name]) folds[best]->push_back(i);
      have[best] += double(by_kernel[name].size());
    }
    if (sp.train.empty() || sp.val.empty() || sp.test.empty())
      throw std::runtime_error("split: a fold is empty; corpus too small");
  }
  std::sort(sp.train.begin(), sp.train.end());
  std::sort(sp.val.begin(), sp.val.end());
  std::sort(sp.test.begin(), sp.test.end());
  return sp;
}

// ---------------------------------------------------------------------------
// Directory I/O.

namespace ds_detail {

inline void write_jsonl(const std::filesystem::path& path,
                        const std::vector<Sample>& samples) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (auto& s : samples) os << sample_to_json(s).dump() << '\n';
}

inline std::vector<Sample> read_jsonl(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::vector<Sample> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(sample_from_json(json::parse(line)));
  }
  return out;
}

}  // namespace ds_detail

inline void save_dataset(const std::string& dir, const DatasetTriple& ds,
                         const json& manifest_extra = json::object()) {
  std::filesystem::create_directories(dir);
  std::filesystem::path d(dir);
  ds_detail::write_jsonl(d / "inner_p.jsonl", ds.inner_p);
  ds_detail::write_jsonl(d / "inner_np.jsonl", ds.inner_np);
  ds_detail::write_jsonl(d / "global.jsonl", ds.global_s);
  json m = manifest_extra;
  m["counts"] = {{"inner_p", ds.inner_p.size()},
                 {"inner_np", ds.inner_np.size()},
                 {"global", ds.global_s.size()}};
  m["skipped"] = ds.skipped;
  m["deduped"] = ds.deduped;
  std::ofstream os(d / "manifest.json", std::ios::binary);
  os << m.dump(2) << '\n';
}

inline DatasetTriple load_dataset(const std::string& dir) {
  std::filesystem::path d(dir);
  DatasetTriple ds;
  ds.inner_p = ds_detail::read_jsonl(d / "inner_p.jsonl");
  ds.inner_np = ds_detail::read_jsonl(d / "inner_np.jsonl");
  ds.global_s = ds_detail::read_jsonl(d / "global.jsonl");
  return ds;
}

}  // namespace hlsqor
