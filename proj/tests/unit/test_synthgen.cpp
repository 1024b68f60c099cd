#include <cmath>

#include <doctest.h>

#include "cade/diagnostics.hpp"
#include "cade/metrics.hpp"
#include "cade/synthgen.hpp"

using namespace cade;

TEST_CASE("spec validation") {
  synthgen::GeneratorSpec spec;
  CHECK_NOTHROW(spec.validate());

  spec.q_prior[Pillar::P1] = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
  spec = {};
  spec.logit_temperature = 0.0;
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
  spec = {};
  spec.ctx_fidelity = 1.5;
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
}

TEST_CASE("generated records are valid and deterministic") {
  synthgen::GeneratorSpec spec;
  spec.n_per_cell = 10;
  spec.seed = 99;
  auto a = synthgen::generate(spec);
  auto b = synthgen::generate(spec);
  // 3 pillars x 2 tasks x 5 tests x 10
  CHECK(a.size() == 300);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK_NOTHROW(a[i].validate());
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].logits.q == b[i].logits.q);
    CHECK(a[i].logits.full == b[i].logits.full);
    CHECK(a[i].truth_option == b[i].truth_option);
  }

  spec.seed = 100;
  auto c = synthgen::generate(spec);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].logits.q != c[i].logits.q) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("T5 records copy q logits into ctx") {
  synthgen::GeneratorSpec spec;
  spec.n_per_cell = 20;
  spec.seed = 3;
  for (const auto& r : synthgen::generate(spec))
    if (r.context_test == ContextTest::T5) CHECK(r.logits.ctx == r.logits.q);
}

TEST_CASE("regression records carry full completion maps") {
  synthgen::GeneratorSpec spec;
  spec.n_per_cell = 5;
  spec.include_mcq = false;
  for (const auto& r : synthgen::generate(spec)) {
    CHECK(r.completions.size() == 10);
    CHECK(r.view_values.size() == 4);
    // truth is consistent with its own completion digit
    std::string digit(1, static_cast<char>('0' + static_cast<int>(r.truth_value / 10.0)));
    CHECK(r.completions.at(digit) == doctest::Approx(r.truth_value));
  }
}

TEST_CASE("perfect evidence makes the Full view always right") {
  synthgen::GeneratorSpec spec;
  spec.n_per_cell = 30;
  spec.include_regression = false;
  spec.ctx_fidelity = 1.0;
  spec.img_fidelity = 1.0;
  spec.seed = 8;
  auto records = synthgen::generate(spec);
  auto acc = metrics::per_view_accuracy(records);
  CHECK(acc.at(ViewKind::FULL) == 1.0);
}

TEST_CASE("planted modality imbalance shows up in view accuracies") {
  synthgen::GeneratorSpec spec;
  spec.n_per_cell = 340;  // ~5,100 MCQ records
  spec.include_regression = false;
  spec.img_fidelity = 0.9;
  spec.ctx_fidelity = 0.4;
  spec.fusion_ctx_weight = 0.9;
  spec.seed = 21;
  auto records = synthgen::generate(spec);

  // T5 swaps the ctx view for the q prior, so measure on T1-T4
  std::vector<QuestionRecord> with_context;
  for (const auto& r : records)
    if (r.context_test != ContextTest::T5) with_context.push_back(r);

  auto acc = metrics::per_view_accuracy(with_context);
  CHECK(acc.at(ViewKind::IMG) == doctest::Approx(0.90).epsilon(0.025));
  CHECK(acc.at(ViewKind::CTX) == doctest::Approx(0.40).epsilon(0.06));
  CHECK(std::abs(acc.at(ViewKind::FULL) - acc.at(ViewKind::CTX)) < 0.05);

  for (const auto& [pillar, gap] : metrics::delta_acc(with_context)) CHECK(std::abs(gap) <= 0.06);
}

TEST_CASE("spec json round trip") {
  synthgen::GeneratorSpec spec;
  spec.n_per_cell = 7;
  spec.ctx_fidelity = 0.55;
  spec.seed = 12345;
  auto j = synthgen::spec_to_json(spec);
  auto back = synthgen::spec_from_json(j);
  CHECK(back.n_per_cell == 7);
  CHECK(back.ctx_fidelity == doctest::Approx(0.55));
  CHECK(back.seed == 12345);
  CHECK(back.q_prior.at(Pillar::P2) == spec.q_prior.at(Pillar::P2));

  CHECK_THROWS_AS(synthgen::spec_from_json({{"ctx_fidelity", "high"}}), ParseError);
}
