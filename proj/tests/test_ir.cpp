#include <doctest.h>

#include <set>

#include "hlsqor/enumerate.hpp"
#include "hlsqor/ir.hpp"
#include "hlsqor/parse.hpp"
#include "test_util.hpp"

using namespace hlsqor;

TEST_CASE("minimal kernel parses to expected structure") {
  auto spec = testutil::parse(testutil::kVecScale);
  REQUIRE(spec.root_loops.size() == 1);
  auto& l = spec.root_loops[0];
  CHECK(l.tripcount == 8);
  CHECK(l.body.size() == 3);
  CHECK(l.body[0].optype == OpType::Load);
  CHECK(l.body[1].optype == OpType::FMul);
  CHECK(l.body[2].optype == OpType::Store);
  CHECK(spec.arrays.size() == 2);
}

TEST_CASE("perfect nest flag derives from body shape") {
  auto spec = testutil::parse(testutil::kPerfect);
  CHECK(spec.root_loops[0].perfect());
  auto nested = testutil::parse(testutil::kNested);
  CHECK_FALSE(nested.root_loops[0].perfect());
}

TEST_CASE("dimension mismatch is rejected") {
  const char* src = R"(
kernel bad {
  array A[8] : f32;
  loop i in 0..8 {
    loop j in 0..8 {
      x = load A[i][j];
    }
  }
}
)";
  CHECK_THROWS_AS(parse_kernel(src), ParseError);
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_kernel("kernel k {\n  array A[8] f32;\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.column > 0);
  }
}

TEST_CASE("undeclared identifier and duplicate ids are rejected") {
  CHECK_THROWS(parse_kernel(R"(kernel k { loop i in 0..4 { x = fadd nope, nope; } })"));
  CHECK_THROWS(parse_kernel(R"(kernel k { loop i in 0..4 { x = fadd i, i; x = fadd i, i; } })"));
  CHECK_THROWS(parse_kernel(R"(kernel k { loop i in 0..4 { x = fadd i, i; } loop i in 0..4 { y = fadd i, i; } })"));
}

TEST_CASE("parse/print round-trips structurally") {
  for (const char* src : {testutil::kVecScale, testutil::kNested, testutil::kPerfect,
                          testutil::kRecurrence}) {
    auto spec = parse_kernel(src);
    auto again = parse_kernel(print_kernel(spec));
    CHECK(print_kernel(again) == print_kernel(spec));
    REQUIRE(again.root_loops.size() == spec.root_loops.size());
    CHECK(again.root_loops[0].body == spec.root_loops[0].body);
  }
}

TEST_CASE("validate_config enforces divisibility and nesting rules") {
  auto spec = testutil::parse(testutil::kNested);

  PragmaConfig ok;
  ok.loops["i"] = {true, 1};
  ok.loops["j"] = {false, 16};  // full unroll under pipelined parent
  CHECK(validate_config(spec, ok).empty());

  PragmaConfig bad_factor;
  bad_factor.loops["i"] = {false, 3};
  CHECK_FALSE(validate_config(spec, bad_factor).empty());

  PragmaConfig nested_pipe;
  nested_pipe.loops["i"] = {true, 1};
  nested_pipe.loops["j"] = {true, 16};
  CHECK_FALSE(validate_config(spec, nested_pipe).empty());

  PragmaConfig partial_under_pipe;
  partial_under_pipe.loops["i"] = {true, 1};
  partial_under_pipe.loops["j"] = {false, 4};
  CHECK_FALSE(validate_config(spec, partial_under_pipe).empty());

  PragmaConfig bad_partition;
  bad_partition.arrays["B"] = {{3}, PartitionType::Cyclic};
  CHECK_FALSE(validate_config(spec, bad_partition).empty());
}

TEST_CASE("enumerate_configs: single loop product count") {
  auto spec = testutil::parse(testutil::kVecScale);
  auto configs = enumerate_configs(spec, {1, 2, 4, 8});
  CHECK(configs.size() == 8);  // {pipeline, no-pipeline} x 4 factors
  for (auto& c : configs) CHECK(validate_config(spec, c).empty());
}

TEST_CASE("enumerate_configs: no duplicates, deterministic, all valid") {
  auto spec = testutil::parse(testutil::kNested);
  auto a = enumerate_configs(spec, {1, 2, 4});
  auto b = enumerate_configs(spec, {1, 2, 4});
  REQUIRE(a.size() == b.size());
  std::set<uint64_t> hashes;
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    CHECK(hashes.insert(config_hash(a[i])).second);
    CHECK(validate_config(spec, a[i]).empty());
  }
}

TEST_CASE("enumerate_configs filters partial unroll under pipeline") {
  auto spec = testutil::parse(testutil::kNested);
  auto configs = enumerate_configs(spec, {1, 2, 4, 8, 16});
  for (auto& c : configs) {
    if (c.loop("i").pipeline) CHECK(c.loop("j").unroll == 16);
  }
  // Pipelined-outer configs do exist.
  bool any = false;
  for (auto& c : configs) any = any || c.loop("i").pipeline;
  CHECK(any);
}

TEST_CASE("config JSON round-trip") {
  PragmaConfig cfg;
  cfg.loops["i"] = {true, 2};
  cfg.arrays["A"] = {{2, 4}, PartitionType::Block};
  auto j = config_to_json(cfg);
  CHECK(config_from_json(j) == cfg);
  CHECK(config_hash(config_from_json(j)) == config_hash(cfg));
}
