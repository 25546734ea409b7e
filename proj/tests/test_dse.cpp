#include <doctest.h>

#include <random>

#include "hlsqor/dse.hpp"
#include "test_util.hpp"

using namespace hlsqor;

namespace {
const OpLibrary kLib = OpLibrary::defaults();

std::vector<uint64_t> hashes_for(size_t n) {
  std::vector<uint64_t> h(n);
  for (size_t i = 0; i < n; ++i) h[i] = i;
  return h;
}

ModelBundle quick_bundle() {
  std::vector<KernelSpec> corpus{testutil::parse(testutil::kVecScale),
                                 testutil::parse(testutil::kNested),
                                 testutil::parse(testutil::kPerfect)};
  auto ds = generate_dataset(corpus, {1, 2}, kLib);
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.hidden = 8;
  cfg.seed = 2;
  return train_hierarchical(ds, cfg, 2, SplitMode::Random,
                            SupernodeLabels::Predicted, 2)
      .first;
}
}  // namespace

TEST_CASE("pareto_filter keeps exactly the non-dominated points") {
  std::vector<std::vector<double>> pts{{10, 100}, {20, 50}, {15, 120}};
  auto front = pareto_filter(pts, hashes_for(pts.size()));
  std::set<size_t> got(front.begin(), front.end());
  CHECK(got == std::set<size_t>{0, 1});
}

TEST_CASE("pareto_filter degenerate cases") {
  std::vector<std::vector<double>> equal{{5, 5}, {5, 5}, {5, 5}};
  CHECK(pareto_filter(equal, hashes_for(3)).size() == 1);
  std::vector<std::vector<double>> single{{1, 2}};
  CHECK(pareto_filter(single, hashes_for(1)) == std::vector<size_t>{0});
  CHECK_THROWS(pareto_filter({}, {}));
}

TEST_CASE("pareto front is an anti-chain (random property)") {
  std::mt19937_64 rng(7);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 200; ++i)
    pts.push_back({double(rng() % 100), double(rng() % 100), double(rng() % 100)});
  auto front = pareto_filter(pts, hashes_for(pts.size()));
  for (size_t a : front)
    for (size_t b : front)
      if (a != b) CHECK(!dominates(pts[a], pts[b]));
  // Every excluded point is dominated by or equal to some front point.
  std::set<size_t> in(front.begin(), front.end());
  for (size_t i = 0; i < pts.size(); ++i) {
    if (in.count(i)) continue;
    bool covered = false;
    for (size_t a : front)
      covered = covered || dominates(pts[a], pts[i]) || pts[a] == pts[i];
    CHECK(covered);
  }
}

TEST_CASE("adrs definition and properties") {
  std::vector<std::vector<double>> gamma{{10, 100}};
  CHECK(adrs(gamma, gamma) == doctest::Approx(0));
  CHECK(adrs(gamma, {{11, 100}}) == doctest::Approx(0.1));
  CHECK(adrs(gamma, {{9, 90}}) == doctest::Approx(0));  // better points cost nothing

  std::mt19937_64 rng(11);
  std::vector<std::vector<double>> g2, omega, superset;
  for (int i = 0; i < 20; ++i)
    g2.push_back({1 + double(rng() % 50), 1 + double(rng() % 50)});
  for (int i = 0; i < 10; ++i)
    omega.push_back({1 + double(rng() % 50), 1 + double(rng() % 50)});
  superset = omega;
  superset.push_back({1, 1});
  CHECK(adrs(g2, superset) <= adrs(g2, omega));  // superset monotonicity
  CHECK(adrs(g2, omega) >= 0);
  CHECK_THROWS(adrs({}, omega));
}

TEST_CASE("explore: exact pass frontier and perfect-predictor control") {
  auto spec = testutil::parse(testutil::kVecScale);
  auto bundle = quick_bundle();
  auto rep = explore(spec, bundle, kLib, {1, 2, 4}, /*exact=*/true, 2);
  CHECK(rep.points.size() == enumerate_configs(spec, {1, 2, 4}).size());
  CHECK(!rep.predicted_front.empty());
  CHECK(!rep.actual_front.empty());
  CHECK(rep.adrs_value >= 0);
  CHECK(rep.model_seconds > 0);
  CHECK(rep.oracle_seconds > 0);

  // Perfect predictor: frontier chosen on oracle values has ADRS exactly 0.
  std::vector<std::vector<double>> true_objs;
  std::vector<uint64_t> hashes;
  for (auto& p : rep.points) {
    true_objs.push_back(objectives_of(*p.actual, rep.mode));
    hashes.push_back(p.cfg_hash);
  }
  auto front = pareto_filter(true_objs, hashes);
  std::vector<std::vector<double>> gamma;
  for (size_t i : front) gamma.push_back(true_objs[i]);
  CHECK(adrs(gamma, gamma) == 0.0);
}

TEST_CASE("explore is deterministic and respects the jobs knob") {
  auto spec = testutil::parse(testutil::kNested);
  auto bundle = quick_bundle();
  auto a = explore(spec, bundle, kLib, {1, 2}, false, 1);
  auto b = explore(spec, bundle, kLib, {1, 2}, false, 4);
  REQUIRE(a.points.size() == b.points.size());
  for (size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].cfg_hash == b.points[i].cfg_hash);
    CHECK(a.points[i].predicted.latency_cycles == b.points[i].predicted.latency_cycles);
    CHECK(a.points[i].predicted.lut == b.points[i].predicted.lut);
  }
  CHECK(a.predicted_front == b.predicted_front);
}

TEST_CASE("report serialization carries the essentials") {
  auto spec = testutil::parse(testutil::kVecScale);
  auto bundle = quick_bundle();
  auto rep = explore(spec, bundle, kLib, {1, 2}, true, 1);
  auto j = dse_report_to_json(rep);
  CHECK(j.contains("adrs"));
  CHECK(j.at("points").size() == rep.points.size());
  CHECK(j.at("points").at(0).contains("predicted"));
  CHECK(j.at("points").at(0).contains("actual"));
  CHECK(j.at("objective_mode") == "2d");
}

TEST_CASE("4-d objectives change the frontier dimensionality") {
  QoR q{100, 200, 4, 300};
  CHECK(objectives_of(q, ObjectiveMode::TwoD) ==
        std::vector<double>{100, 200 + 400 + 300});
  CHECK(objectives_of(q, ObjectiveMode::FourD) ==
        std::vector<double>{100, 200, 4, 300});
}
