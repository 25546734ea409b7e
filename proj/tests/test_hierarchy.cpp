#include <doctest.h>

#include <filesystem>

#include "hlsqor/hierarchy.hpp"
#include "test_util.hpp"

using namespace hlsqor;

namespace {
const OpLibrary kLib = OpLibrary::defaults();

DatasetTriple corpus_dataset() {
  std::vector<KernelSpec> corpus{testutil::parse(testutil::kVecScale),
                                 testutil::parse(testutil::kNested),
                                 testutil::parse(testutil::kPerfect),
                                 testutil::parse(testutil::kRecurrence)};
  return generate_dataset(corpus, {1, 2, 4}, kLib);
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.epochs = 25;
  cfg.hidden = 8;
  cfg.seed = 3;
  return cfg;
}
}  // namespace

TEST_CASE("hierarchical training produces a usable bundle") {
  auto ds = corpus_dataset();
  auto [bundle, report] =
      train_hierarchical(ds, tiny_config(), 3, SplitMode::Random,
                         SupernodeLabels::Predicted, 2);
  CHECK(bundle.p.trained);
  CHECK(bundle.np.trained);
  CHECK(bundle.g.trained);
  for (int t = 0; t < kTargetCount; ++t) {
    CHECK(std::isfinite(report.g.test_mape[size_t(t)]));
    CHECK(report.g.test_mape[size_t(t)] >= 0);
  }

  auto spec = testutil::parse(testutil::kNested);
  PragmaConfig cfg;
  cfg.loops["j"] = {true, 1};
  auto q1 = predict_hierarchical(spec, cfg, bundle, kLib);
  auto q2 = predict_hierarchical(spec, cfg, bundle, kLib);
  CHECK(q1.latency_cycles == q2.latency_cycles);  // deterministic cascade
  CHECK(q1.lut == q2.lut);
  CHECK(q1.latency_cycles >= 0);
}

TEST_CASE("inner latency model exposes both IL and loop-latency heads") {
  auto ds = corpus_dataset();
  REQUIRE(!ds.inner_p.empty());
  auto [bundle, report] =
      train_hierarchical(ds, tiny_config(), 3, SplitMode::Random,
                         SupernodeLabels::Oracle, 1);
  const Sample& s = ds.inner_p.front();
  auto pred = predict_region(bundle.p, s.graph, s.lf);
  CHECK(pred.il >= 0);
  CHECK(pred.qor.latency_cycles >= 0);
  CHECK(bundle.p.models[0].has_refine);
  CHECK(!bundle.p.models[1].has_refine);
  CHECK(!bundle.g.models[0].has_refine);
}

TEST_CASE("frozen stage-1 weights give bit-identical supernode features") {
  auto ds = corpus_dataset();
  auto [bundle, report] =
      train_hierarchical(ds, tiny_config(), 3, SplitMode::Random,
                         SupernodeLabels::Predicted, 2);
  auto a = ds.global_s;
  auto b = ds.global_s;
  hier_detail::apply_predicted_supernodes(a, bundle);
  hier_detail::apply_predicted_supernodes(b, bundle);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t n = 0; n < a[i].graph.nodes.size(); ++n) {
      CHECK(a[i].graph.nodes[n].feat.cycles == b[i].graph.nodes[n].feat.cycles);
      CHECK(a[i].graph.nodes[n].feat.lut == b[i].graph.nodes[n].feat.lut);
    }
}

TEST_CASE("predicted supernode features come from the matching stage") {
  auto ds = corpus_dataset();
  auto [bundle, report] =
      train_hierarchical(ds, tiny_config(), 3, SplitMode::Random,
                         SupernodeLabels::Predicted, 2);
  auto samples = ds.global_s;
  hier_detail::apply_predicted_supernodes(samples, bundle);
  for (size_t i = 0; i < samples.size(); ++i) {
    std::map<std::string, const InnerRecord*> by_loop;
    for (auto& r : ds.global_s[i].inner) by_loop[r.loop_id] = &r;
    for (auto& n : samples[i].graph.nodes) {
      if (n.kind != NodeKind::Super) continue;
      auto* rec = by_loop.at(n.loop_id);
      auto pred = predict_region(rec->lf.pipelined ? bundle.p : bundle.np,
                                 rec->graph, rec->lf);
      CHECK(n.feat.cycles == pred.qor.latency_cycles);
      CHECK(n.feat.lut == pred.qor.lut);
      CHECK(n.feat.dsp == pred.qor.dsp);
      CHECK(n.feat.ff == pred.qor.ff);
    }
  }
}

TEST_CASE("thread count does not change training results") {
  auto ds = corpus_dataset();
  auto [b1, r1] = train_hierarchical(ds, tiny_config(), 3, SplitMode::Random,
                                     SupernodeLabels::Predicted, 1);
  auto [b2, r2] = train_hierarchical(ds, tiny_config(), 3, SplitMode::Random,
                                     SupernodeLabels::Predicted, 4);
  for (int t = 0; t < kTargetCount; ++t) {
    CHECK(r1.g.test_mape[size_t(t)] == r2.g.test_mape[size_t(t)]);
    CHECK(b1.g.models[size_t(t)].head_w2.d == b2.g.models[size_t(t)].head_w2.d);
  }
}

TEST_CASE("bundle directory round-trip") {
  namespace fs = std::filesystem;
  auto ds = corpus_dataset();
  auto [bundle, report] =
      train_hierarchical(ds, tiny_config(), 3, SplitMode::Random,
                         SupernodeLabels::Predicted, 2);
  fs::path dir = fs::temp_directory_path() / "hlsqor_bundle";
  save_bundle(bundle, dir.string());
  for (const char* s : {"gnn_p", "gnn_np", "gnn_g"})
    for (const char* t : {"latency.bin", "lut.bin", "dsp.bin", "ff.bin"})
      CHECK(fs::exists(dir / s / t));
  CHECK(fs::exists(dir / "norm.json"));
  CHECK(fs::exists(dir / "manifest.json"));

  auto loaded = load_bundle(dir.string());
  auto spec = testutil::parse(testutil::kPerfect);
  PragmaConfig cfg;
  cfg.loops["j"] = {true, 1};
  auto q1 = predict_hierarchical(spec, cfg, bundle, kLib);
  auto q2 = predict_hierarchical(spec, cfg, loaded, kLib);
  CHECK(q1.latency_cycles == q2.latency_cycles);
  CHECK(q1.lut == q2.lut);
  CHECK(q1.dsp == q2.dsp);
  CHECK(q1.ff == q2.ff);
  fs::remove_all(dir);
}

TEST_CASE("missing stage is reported when a region needs it") {
  auto ds = corpus_dataset();
  // Keep only pipelined-region samples so gnn_np never trains.
  DatasetTriple pruned;
  pruned.inner_p = ds.inner_p;
  for (auto& s : ds.global_s) {
    bool all_p = true;
    for (auto& r : s.inner) all_p = all_p && r.lf.pipelined;
    if (all_p) pruned.global_s.push_back(s);
  }
  REQUIRE(!pruned.global_s.empty());
  auto [bundle, report] =
      train_hierarchical(pruned, tiny_config(), 3, SplitMode::Random,
                         SupernodeLabels::Predicted, 2);
  CHECK(!bundle.np.trained);

  auto spec = testutil::parse(testutil::kVecScale);
  PragmaConfig unpipelined;  // region routes to the missing gnn_np
  CHECK_THROWS(predict_hierarchical(spec, unpipelined, bundle, kLib));
}

TEST_CASE("invalid config is rejected at prediction time") {
  auto ds = corpus_dataset();
  auto [bundle, report] =
      train_hierarchical(ds, tiny_config(), 3, SplitMode::Random,
                         SupernodeLabels::Predicted, 2);
  auto spec = testutil::parse(testutil::kVecScale);
  PragmaConfig bad;
  bad.loops["i"] = {false, 3};  // 3 does not divide 8
  CHECK_THROWS(predict_hierarchical(spec, bad, bundle, kLib));
}
