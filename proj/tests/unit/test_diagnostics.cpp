#include <cmath>
#include <vector>

#include <doctest.h>

#include "cade/diagnostics.hpp"
#include "cade/synthgen.hpp"
#include "support/gen.hpp"

using namespace cade;
using diagnostics::Direction;

namespace {

QuestionRecord index_record(const std::string& id, std::vector<double> q_logits) {
  QuestionRecord r;
  r.id = id;
  r.task = Task::Mcq;
  r.candidates = CandidateSet::mcq({"A", "B", "C"});
  r.truth_option = "A";
  r.logits.q = std::move(q_logits);
  r.logits.ctx = {0, 0, 0};
  r.logits.img = {0, 0, 0};
  r.logits.full = {0, 0, 0};
  return r;
}

}  // namespace

TEST_CASE("direction_of") {
  CHECK(diagnostics::direction_of(0, 3) == Direction::Pessimistic);
  CHECK(diagnostics::direction_of(1, 3) == Direction::Conservative);
  CHECK(diagnostics::direction_of(2, 3) == Direction::Optimistic);
  CHECK(diagnostics::direction_of(0, 2) == Direction::Pessimistic);
  CHECK(diagnostics::direction_of(1, 2) == Direction::Optimistic);
  CHECK_THROWS_AS(diagnostics::direction_of(3, 3), InvalidInput);
  CHECK_THROWS_AS(diagnostics::direction_of(0, 4), InvalidInput);
}

TEST_CASE("directional_distribution") {
  SUBCASE("constant middle predictor") {
    std::vector<QuestionRecord> records(5, index_record("m", {0, 9, 0}));
    auto dist = diagnostics::directional_distribution(records, ViewKind::Q, false);
    CHECK(dist.at(Pillar::P1).at(Direction::Conservative) == 1.0);
    CHECK(dist.at(Pillar::P1).at(Direction::Pessimistic) == 0.0);
  }

  SUBCASE("counting oracle") {
    std::vector<QuestionRecord> records = {
        index_record("a", {9, 0, 0}), index_record("b", {9, 0, 0}), index_record("c", {0, 0, 9}),
        index_record("d", {0, 9, 0})};
    auto dist = diagnostics::directional_distribution(records, ViewKind::Q, false);
    CHECK(dist.at(Pillar::P1).at(Direction::Pessimistic) == doctest::Approx(0.5));
    CHECK(dist.at(Pillar::P1).at(Direction::Conservative) == doctest::Approx(0.25));
    CHECK(dist.at(Pillar::P1).at(Direction::Optimistic) == doctest::Approx(0.25));
  }

  SUBCASE("fractions sum to one per slice") {
    auto records = testsupport::random_records(600, 5150, /*mcq_only=*/true);
    auto dist = diagnostics::directional_distribution(records, ViewKind::Q, true);
    for (const auto& [pillar, f] : dist) {
      double total = 0.0;
      for (const auto& [dir, v] : f) {
        CHECK(v >= 0.0);
        total += v;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("planted generator skew is recovered") {
    synthgen::GeneratorSpec spec;
    spec.n_per_cell = 2000;  // 10,000 per pillar across five context tests
    spec.include_regression = false;
    spec.q_prior[Pillar::P1] = {0.6, 0.2, 0.2};
    spec.seed = 31337;
    auto records = synthgen::generate(spec);
    auto dist = diagnostics::directional_distribution(records, ViewKind::Q, true);
    CHECK(dist.at(Pillar::P1).at(Direction::Pessimistic) == doctest::Approx(0.6).epsilon(0.034));
    CHECK(dist.at(Pillar::P1).at(Direction::Conservative) == doctest::Approx(0.2).epsilon(0.1));
    CHECK(dist.at(Pillar::P1).at(Direction::Optimistic) == doctest::Approx(0.2).epsilon(0.1));
  }

  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(diagnostics::directional_distribution({}, ViewKind::Q, false), InvalidInput);
  }
}

TEST_CASE("perturb_record order schemes") {
  auto r = index_record("p", {1, 2, 3});
  r.logits.ctx = {4, 5, 6};

  SUBCASE("reverse") {
    auto out = diagnostics::perturb_record(r, {diagnostics::PerturbationKind::ReverseOrder, 0});
    CHECK(out.record.candidates.labels == std::vector<std::string>{"C", "B", "A"});
    CHECK(out.record.logits.q == std::vector<double>{3, 2, 1});
    CHECK(out.record.logits.ctx == std::vector<double>{6, 5, 4});
    CHECK(out.inverse == std::vector<std::size_t>{2, 1, 0});
    CHECK(out.record.truth_option == "A");
  }

  SUBCASE("random order is seed-deterministic") {
    diagnostics::PerturbationScheme scheme{diagnostics::PerturbationKind::RandomOrder, 7};
    auto a = diagnostics::perturb_record(r, scheme);
    auto b = diagnostics::perturb_record(r, scheme);
    CHECK(a.inverse == b.inverse);
    CHECK(a.record.candidates.labels == b.record.candidates.labels);
  }

  SUBCASE("regression records are rejected") {
    QuestionRecord reg;
    reg.task = Task::Regression;
    reg.candidates = CandidateSet::digits();
    CHECK_THROWS_AS(
        diagnostics::perturb_record(reg, {diagnostics::PerturbationKind::ReverseOrder, 0}),
        InvalidInput);
  }
}

TEST_CASE("perturb_record token schemes relabel only") {
  auto r = index_record("t", {1, 2, 3});
  r.truth_option = "B";

  auto lower = diagnostics::perturb_record(r, {diagnostics::PerturbationKind::LowercaseToken, 0});
  CHECK(lower.record.candidates.labels == std::vector<std::string>{"a", "b", "c"});
  CHECK(lower.record.logits.q == r.logits.q);
  CHECK(lower.record.truth_option == "b");
  CHECK(lower.inverse == std::vector<std::size_t>{0, 1, 2});

  auto numeric = diagnostics::perturb_record(r, {diagnostics::PerturbationKind::NumericToken, 0});
  CHECK(numeric.record.candidates.labels == std::vector<std::string>{"1", "2", "3"});
  CHECK(numeric.record.logits.q == r.logits.q);
  CHECK(numeric.record.truth_option == "2");
}

TEST_CASE("inverse permutation recovers the original argmax") {
  auto records = testsupport::random_records(1000, 2024, /*mcq_only=*/true);
  SplitMix64 rng(2025);
  for (const auto& r : records) {
    std::size_t original = metrics::view_argmax(r, ViewKind::FULL);
    for (auto kind :
         {diagnostics::PerturbationKind::ReverseOrder, diagnostics::PerturbationKind::RandomOrder}) {
      auto out = diagnostics::perturb_record(r, {kind, rng.next_u64()});
      std::size_t perturbed = metrics::view_argmax(out.record, ViewKind::FULL);
      CHECK(out.inverse[perturbed] == original);
    }
  }
}

TEST_CASE("perturbation_report") {
  // index-based records: argmax is a property of position
  std::vector<QuestionRecord> records;
  for (int i = 0; i < 40; ++i)
    records.push_back(index_record("i" + std::to_string(i),
                                   i % 4 == 0 ? std::vector<double>{0, 0, 9}
                                   : i % 4 == 1 ? std::vector<double>{0, 9, 0}
                                                : std::vector<double>{9, 0, 0}));

  std::vector<diagnostics::PerturbationScheme> schemes = {
      {diagnostics::PerturbationKind::NumericToken, 0},
      {diagnostics::PerturbationKind::ReverseOrder, 0}};
  auto rows = diagnostics::perturbation_report(records, schemes, {}, {}, ViewKind::Q);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].scheme == "Original");

  // relabeling cannot change an index argmax
  CHECK(rows[1].fractions == rows[0].fractions);

  // reversal swaps the pessimistic and optimistic mass
  CHECK(rows[2].fractions.at(Direction::Pessimistic) ==
        doctest::Approx(rows[0].fractions.at(Direction::Optimistic)));
  CHECK(rows[2].fractions.at(Direction::Optimistic) ==
        doctest::Approx(rows[0].fractions.at(Direction::Pessimistic)));
  CHECK(rows[2].fractions.at(Direction::Conservative) ==
        doctest::Approx(rows[0].fractions.at(Direction::Conservative)));

  auto csv = diagnostics::to_csv(rows);
  CHECK(csv.find("scheme,Optimistic,Conservative,Pessimistic") == 0);
  CHECK(csv.find("Original") != std::string::npos);
  CHECK(csv.find("ReverseOrder") != std::string::npos);
}
