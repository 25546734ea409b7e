#include <doctest.h>

#include "hlsqor/oracle.hpp"
#include "test_util.hpp"

using namespace hlsqor;

namespace {

const OpLibrary kLib = OpLibrary::defaults();

// Independent reference: event-driven pipeline execution. Iteration k may
// start II cycles after iteration k-1 and completes IL cycles later.
long simulate_pipeline(long il, long ii, long tc) {
  long t = 0, finish = 0;
  for (long k = 0; k < tc; ++k) {
    finish = std::max(finish, t + il);
    t += ii;
  }
  return finish;
}

// Sequential execution with per-iteration FSM overhead and loop entry cost.
long simulate_sequential(long il, long tc) {
  long t = 0;
  for (long k = 0; k < tc; ++k) t += il + 1;
  return t + 1;
}

}  // namespace

TEST_CASE("ASAP chain: load -> fmul -> store is 7 cycles") {
  auto spec = testutil::parse(testutil::kVecScale);
  auto g = build_cdfg(spec, {});
  auto subs = extract_inner_subgraphs(g, spec, {});
  REQUIRE(subs.size() == 1);
  auto sched = schedule_iteration(subs[0].subgraph, spec, {}, kLib);
  CHECK(sched.iteration_latency == 7);
}

TEST_CASE("independent ops run in parallel") {
  const char* src = R"(
kernel par {
  array A[8] : f32;
  loop i in 0..8 {
    a = fmul i, i;
    b = fmul i, i;
  }
}
)";
  auto spec = parse_kernel(src);
  auto g = build_cdfg(spec, {});
  auto subs = extract_inner_subgraphs(g, spec, {});
  auto sched = schedule_iteration(subs[0].subgraph, spec, {}, kLib);
  // phi(1) -> fmul(3): both multiplies overlap.
  CHECK(sched.iteration_latency == 4);
}

TEST_CASE("port contention delays the second access") {
  const char* src = R"(
kernel contend {
  array A[8] : f32 ports 1;
  loop i in 0..8 {
    a = load A[i];
    b = load A[i+1];
    s = fadd a, b;
  }
}
)";
  auto spec = parse_kernel(src);
  auto g = build_cdfg(spec, {});
  auto subs = extract_inner_subgraphs(g, spec, {});
  auto sched = schedule_iteration(subs[0].subgraph, spec, {}, kLib);
  std::vector<long> load_starts;
  for (auto& n : subs[0].subgraph.nodes)
    if (n.optype == OpType::Load) load_starts.push_back(sched.start.at(n.id));
  REQUIRE(load_starts.size() == 2);
  CHECK(load_starts[0] == 0);
  CHECK(load_starts[1] == 1);
}

TEST_CASE("schedule respects every data precedence edge") {
  auto spec = testutil::parse(testutil::kNested);
  PragmaConfig cfg;
  cfg.loops["j"] = {false, 4};
  auto g = build_cdfg(spec, cfg);
  auto subs = extract_inner_subgraphs(g, spec, cfg);
  for (auto& sub : subs) {
    auto sched = schedule_iteration(sub.subgraph, spec, cfg, kLib);
    for (auto& e : sub.subgraph.edges) {
      if (e.kind != EdgeKind::Data) continue;
      auto& src = sub.subgraph.nodes[size_t(e.src)];
      if (src.kind == NodeKind::MemPort) continue;
      long fin = sched.start.at(e.src) + kLib.at(src.optype).cycles;
      CHECK(sched.start.at(e.dst) >= fin);
    }
  }
}

TEST_CASE("cycle in data edges is reported") {
  Cdfg g;
  for (int i = 0; i < 2; ++i) {
    CdfgNode n;
    n.id = i;
    n.optype = OpType::Add;
    n.loop_id = "x";
    g.nodes.push_back(n);
  }
  g.edges.push_back({0, 1, EdgeKind::Data});
  g.edges.push_back({1, 0, EdgeKind::Data});
  KernelSpec dummy;
  CHECK_THROWS(schedule_iteration(g, dummy, {}, kLib));
}

TEST_CASE("closed-form loop latency") {
  CHECK(loop_latency(true, 10, 2, 100) == 208);
  CHECK(loop_latency(true, 10, 2, 1) == 10);
  CHECK(loop_latency(false, 7, 0, 8) == 65);
}

TEST_CASE("closed form equals discrete-event simulation (exhaustive small cases)") {
  for (long tc = 1; tc <= 32; ++tc) {
    for (long il = 1; il <= 32; ++il) {
      CHECK(loop_latency(false, il, 0, tc) == simulate_sequential(il, tc));
      for (long ii = 1; ii <= 8; ++ii)
        CHECK(loop_latency(true, il, ii, tc) == simulate_pipeline(il, ii, tc));
    }
  }
}

TEST_CASE("single fmul kernel: DSP equals the library entry; unroll doubles it") {
  const char* src = R"(
kernel tiny {
  array A[2] : f32;
  loop i in 0..2 {
    y = fmul i, i;
  }
}
)";
  auto spec = parse_kernel(src);
  auto q1 = kernel_qor(spec, {}, kLib);
  CHECK(q1.dsp == 3);

  PragmaConfig cfg;
  cfg.loops["i"] = {false, 2};
  auto q2 = kernel_qor(spec, cfg, kLib);
  CHECK(q2.dsp == 6);
}

TEST_CASE("pipelining keeps DSP, strictly increases FF, reduces latency") {
  auto spec = testutil::parse(testutil::kVecScale);
  PragmaConfig off, on;
  on.loops["i"] = {true, 1};
  auto a = kernel_qor(spec, off, kLib);
  auto b = kernel_qor(spec, on, kLib);
  CHECK(a.dsp == b.dsp);
  CHECK(b.ff > a.ff);
  CHECK(b.latency_cycles < a.latency_cycles);
}

TEST_CASE("resource monotonicity in the unroll factor") {
  auto spec = testutil::parse(testutil::kVecScale);
  QoR prev;
  bool first = true;
  for (long u : {1, 2, 4, 8}) {
    PragmaConfig cfg;
    cfg.loops["i"] = {false, u};
    cfg.arrays["A"] = {{u}, PartitionType::Cyclic};
    cfg.arrays["B"] = {{u}, PartitionType::Cyclic};
    auto q = kernel_qor(spec, cfg, kLib);
    if (!first) {
      CHECK(q.lut >= prev.lut);
      CHECK(q.dsp >= prev.dsp);
      CHECK(q.ff >= prev.ff);
    }
    prev = q;
    first = false;
  }
}

TEST_CASE("oracle determinism") {
  auto spec = testutil::parse(testutil::kNested);
  PragmaConfig cfg;
  cfg.loops["i"] = {false, 2};
  cfg.loops["j"] = {true, 2};
  auto a = kernel_qor(spec, cfg, kLib);
  auto b = kernel_qor(spec, cfg, kLib);
  CHECK(a == b);
}

TEST_CASE("hierarchical latency composes inner regions") {
  // Outer loop i (TC 8) around a pipelined inner region.
  auto spec = testutil::parse(testutil::kNested);
  PragmaConfig cfg;
  cfg.loops["j"] = {true, 1};
  auto g = build_cdfg(spec, cfg);
  auto subs = extract_inner_subgraphs(g, spec, cfg);
  REQUIRE(subs.size() == 1);
  annotate_loop_features(subs[0], spec, cfg);
  auto rq = region_qor(subs[0], spec, cfg, kLib);

  // Outer body: acc = fadd (4 cycles after phi edge) so body IL is positive.
  auto q = kernel_qor(spec, cfg, kLib);
  // Latency must exceed TC_outer * inner region latency.
  CHECK(q.latency_cycles > 8 * rq.qor.latency_cycles);
}
