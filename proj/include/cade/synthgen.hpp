#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cade/error.hpp"
#include "cade/rng.hpp"
#include "cade/types.hpp"

namespace cade::synthgen {

inline const std::array<std::string, 6> kIndicators = {
    "under 5 mortality rate", "women bmi", "asset index",
    "sanitation index",       "water index", "women edu"};

/// Parametric biased-model generator. Plants two signatures: a pillar-
/// conditioned question-only directional skew (q_prior) and context-dominant
/// evidence fusion (fusion_ctx_weight pulling the FULL view toward CTX even
/// when the IMG view is far more accurate).
struct GeneratorSpec {
  std::size_t n_per_cell = 50;  // records per (pillar, task, context_test)
  bool include_mcq = true;
  bool include_regression = true;
  std::map<Pillar, std::array<double, 3>> q_prior = {
      {Pillar::P1, {0.45, 0.10, 0.45}},   // bimodal
      {Pillar::P2, {0.15, 0.20, 0.65}},   // optimistic-heavy
      {Pillar::P3, {0.20, 0.60, 0.20}}};  // conservative-heavy
  double ctx_fidelity = 0.4;        // P(CTX argmax == truth)
  double img_fidelity = 0.9;        // P(IMG argmax == truth)
  double fusion_ctx_weight = 0.9;   // FULL = w * CTX + (1-w) * IMG in logit space
  double logit_temperature = 0.5;   // peaked option gets logit 1/temperature
  std::map<Pillar, std::array<double, 3>> truth_distribution = {
      {Pillar::P1, {1.0 / 3, 1.0 / 3, 1.0 / 3}},
      {Pillar::P2, {1.0 / 3, 1.0 / 3, 1.0 / 3}},
      {Pillar::P3, {1.0 / 3, 1.0 / 3, 1.0 / 3}}};
  std::uint64_t seed = 0;

  void validate() const {
    auto check_triple = [](const std::array<double, 3>& t, const char* name) {
      double sum = 0.0;
      for (double x : t) {
        if (!(x >= 0.0)) throw InvalidInput(std::string(name) + ": negative probability");
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw InvalidInput(std::string(name) + ": probabilities must sum to 1");
    };
    for (Pillar p : {Pillar::P1, Pillar::P2, Pillar::P3}) {
      if (!q_prior.count(p) || !truth_distribution.count(p))
        throw InvalidInput("generator spec must cover all three pillars");
      check_triple(q_prior.at(p), "q_prior");
      check_triple(truth_distribution.at(p), "truth_distribution");
    }
    for (double f : {ctx_fidelity, img_fidelity, fusion_ctx_weight})
      if (!(f >= 0.0 && f <= 1.0)) throw InvalidInput("fidelities and fusion weight must lie in [0,1]");
    if (!(logit_temperature > 0.0)) throw InvalidInput("logit_temperature must be positive");
    if (n_per_cell == 0) throw InvalidInput("n_per_cell must be positive");
    if (!include_mcq && !include_regression) throw InvalidInput("at least one task must be enabled");
  }
};

namespace detail {

inline std::size_t draw_categorical(const std::array<double, 3>& probs, SplitMix64& rng) {
  double u = rng.next_double();
  double acc = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return 2;
}

inline std::vector<double> peaked_logits(std::size_t n, std::size_t peak, double temperature) {
  std::vector<double> z(n, 0.0);
  z[peak] = 1.0 / temperature;
  return z;
}

inline std::size_t noisy_peak(std::size_t truth, std::size_t n, double fidelity, SplitMix64& rng) {
  if (rng.next_double() < fidelity) return truth;
  std::size_t wrong = static_cast<std::size_t>(rng.next_below(n - 1));
  return wrong >= truth ? wrong + 1 : wrong;
}

/// Regression digit band for a direction: low {1,2,3}, middle {4,5,6},
/// high {7,8,9}.
inline std::size_t digit_for_direction(std::size_t direction, SplitMix64& rng) {
  return 1 + 3 * direction + static_cast<std::size_t>(rng.next_below(3));
}

inline std::string render_value(double v) {
  std::ostringstream os;
  os.precision(1);
  os << std::fixed << v;
  return os.str();
}

}  // namespace detail

/// Deterministic record stream: identical seeds produce identical sequences,
/// and each (pillar, task, context_test) cell draws from a derived sub-seed so
/// sharded generation matches the serial stream.
inline std::vector<QuestionRecord> generate(const GeneratorSpec& spec) {
  spec.validate();
  std::vector<QuestionRecord> out;
  SplitMix64 root(spec.seed);

  std::vector<Task> tasks;
  if (spec.include_mcq) tasks.push_back(Task::Mcq);
  if (spec.include_regression) tasks.push_back(Task::Regression);

  std::uint64_t cell_tag = 0;
  std::size_t serial = 0;
  for (Pillar pillar : {Pillar::P1, Pillar::P2, Pillar::P3}) {
    for (Task task : tasks) {
      for (ContextTest test : {ContextTest::T1, ContextTest::T2, ContextTest::T3, ContextTest::T4,
                               ContextTest::T5}) {
        SplitMix64 rng(root.derive(++cell_tag));
        for (std::size_t k = 0; k < spec.n_per_cell; ++k, ++serial) {
          QuestionRecord r;
          std::ostringstream id;
          id << "syn-" << to_string(pillar) << "-" << to_string(task) << "-" << to_string(test)
             << "-" << k;
          r.id = id.str();
          r.pillar = pillar;
          r.task = task;
          r.context_test = test;
          r.indicator = kIndicators[serial % kIndicators.size()];
          r.provenance = "synthgen";

          std::size_t n;
          std::size_t truth_idx;
          std::size_t q_peak;
          if (task == Task::Mcq) {
            r.candidates = CandidateSet::mcq({"A", "B", "C"});
            n = 3;
            truth_idx = detail::draw_categorical(spec.truth_distribution.at(pillar), rng);
            r.truth_option = r.candidates.labels[truth_idx];
            q_peak = detail::draw_categorical(spec.q_prior.at(pillar), rng);
          } else {
            r.candidates = CandidateSet::digits();
            n = 10;
            std::size_t truth_dir = detail::draw_categorical(spec.truth_distribution.at(pillar), rng);
            truth_idx = detail::digit_for_direction(truth_dir, rng);
            double frac = rng.next_double() * 10.0;
            r.truth_value = static_cast<double>(truth_idx) * 10.0 + frac;
            for (std::size_t d = 0; d < 10; ++d)
              r.completions[std::string(1, static_cast<char>('0' + d))] =
                  static_cast<double>(d) * 10.0 + frac;
            std::size_t q_dir = detail::draw_categorical(spec.q_prior.at(pillar), rng);
            q_peak = detail::digit_for_direction(q_dir, rng);
          }

          std::size_t ctx_peak = detail::noisy_peak(truth_idx, n, spec.ctx_fidelity, rng);
          std::size_t img_peak = detail::noisy_peak(truth_idx, n, spec.img_fidelity, rng);

          r.logits.q = detail::peaked_logits(n, q_peak, spec.logit_temperature);
          r.logits.ctx = detail::peaked_logits(n, ctx_peak, spec.logit_temperature);
          r.logits.img = detail::peaked_logits(n, img_peak, spec.logit_temperature);
          r.logits.full.resize(n);
          for (std::size_t i = 0; i < n; ++i)
            r.logits.full[i] = spec.fusion_ctx_weight * r.logits.ctx[i] +
                               (1.0 - spec.fusion_ctx_weight) * r.logits.img[i];
          if (test == ContextTest::T5) r.logits.ctx = r.logits.q;  // no context available

          if (task == Task::Regression) {
            for (ViewKind v : kAllViews) {
              std::size_t full_peak = static_cast<std::size_t>(
                  std::max_element(r.logits.full.begin(), r.logits.full.end()) -
                  r.logits.full.begin());
              std::size_t peak = v == ViewKind::Q     ? q_peak
                                 : v == ViewKind::CTX ? (test == ContextTest::T5 ? q_peak : ctx_peak)
                                 : v == ViewKind::IMG ? img_peak
                                                      : full_peak;
              r.view_values[v] =
                  detail::render_value(r.completions.at(std::string(1, static_cast<char>('0' + peak))));
            }
          }

          r.validate();
          out.push_back(std::move(r));
        }
      }
    }
  }
  return out;
}

inline Pillar pillar_from_string(const std::string& s) {
  if (s == "P1") return Pillar::P1;
  if (s == "P2") return Pillar::P2;
  if (s == "P3") return Pillar::P3;
  throw ParseError("unknown pillar: " + s);
}

inline nlohmann::json spec_to_json(const GeneratorSpec& spec) {
  nlohmann::json j;
  j["n_per_cell"] = spec.n_per_cell;
  j["include_mcq"] = spec.include_mcq;
  j["include_regression"] = spec.include_regression;
  for (const auto& [p, t] : spec.q_prior) j["q_prior"][to_string(p)] = t;
  j["ctx_fidelity"] = spec.ctx_fidelity;
  j["img_fidelity"] = spec.img_fidelity;
  j["fusion_ctx_weight"] = spec.fusion_ctx_weight;
  j["logit_temperature"] = spec.logit_temperature;
  for (const auto& [p, t] : spec.truth_distribution) j["truth_distribution"][to_string(p)] = t;
  j["seed"] = spec.seed;
  return j;
}

inline GeneratorSpec spec_from_json(const nlohmann::json& j) {
  GeneratorSpec spec;
  try {
    if (j.contains("n_per_cell")) spec.n_per_cell = j.at("n_per_cell").get<std::size_t>();
    if (j.contains("include_mcq")) spec.include_mcq = j.at("include_mcq").get<bool>();
    if (j.contains("include_regression"))
      spec.include_regression = j.at("include_regression").get<bool>();
    if (j.contains("q_prior"))
      for (const auto& [key, val] : j.at("q_prior").items())
        spec.q_prior[pillar_from_string(key)] = val.get<std::array<double, 3>>();
    if (j.contains("ctx_fidelity")) spec.ctx_fidelity = j.at("ctx_fidelity").get<double>();
    if (j.contains("img_fidelity")) spec.img_fidelity = j.at("img_fidelity").get<double>();
    if (j.contains("fusion_ctx_weight"))
      spec.fusion_ctx_weight = j.at("fusion_ctx_weight").get<double>();
    if (j.contains("logit_temperature"))
      spec.logit_temperature = j.at("logit_temperature").get<double>();
    if (j.contains("truth_distribution"))
      for (const auto& [key, val] : j.at("truth_distribution").items())
        spec.truth_distribution[pillar_from_string(key)] = val.get<std::array<double, 3>>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("generator spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace cade::synthgen
