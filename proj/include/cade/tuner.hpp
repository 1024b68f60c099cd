#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cade/engine.hpp"
#include "cade/error.hpp"
#include "cade/regression.hpp"
#include "cade/rng.hpp"
#include "cade/types.hpp"

namespace cade::tuner {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Closed sampling intervals per hyperparameter.
struct SearchRanges {
  Interval alpha, lambda_kl, beta, tau;
  Task task = Task::Mcq;

  static SearchRanges mcq() { return {{0.5, 2.0}, {0.0, 5.0}, {0.0, 1.5}, {0.65, 0.99}, Task::Mcq}; }

  static SearchRanges regression() {
    return {{0.0, 7.0}, {0.0, 7.0}, {0.0, 7.0}, {0.25, 0.99}, Task::Regression};
  }

  void validate() const {
    for (const Interval* iv : {&alpha, &lambda_kl, &beta, &tau})
      if (!(iv->lo <= iv->hi)) throw InvalidInput("search range low must not exceed high");
    if (!(tau.lo > 0.0 && tau.hi < 1.0)) throw InvalidInput("tau range must lie inside (0,1)");
    for (const Interval* iv : {&alpha, &lambda_kl, &beta})
      if (!(iv->lo >= 0.0)) throw InvalidInput("alpha, lambda_kl and beta ranges must be non-negative");
  }
};

enum class Objective { MaxAccuracy, MinMae };

struct Trial {
  HyperParams params;
  double subset_objective = 0.0;
};

struct TopEntry {
  std::size_t trial_index = 0;
  HyperParams params;
  double full_objective = 0.0;
};

struct SearchTrace {
  std::vector<Trial> trials;
  std::vector<TopEntry> top;  // ordered by subset objective, best first
  HyperParams best;
  std::size_t best_trial_index = 0;
  double best_full_objective = 0.0;
  std::uint64_t seed = 0;
};

/// One joint draw: all four parameters uniform and independent.
inline HyperParams sample_params(const SearchRanges& ranges, SplitMix64& rng) {
  ranges.validate();
  HyperParams hp;
  hp.alpha = rng.next_in(ranges.alpha.lo, ranges.alpha.hi);
  hp.lambda_kl = rng.next_in(ranges.lambda_kl.lo, ranges.lambda_kl.hi);
  hp.beta = rng.next_in(ranges.beta.lo, ranges.beta.hi);
  hp.tau = rng.next_in(ranges.tau.lo, ranges.tau.hi);
  return hp;
}

/// Objective over a record subset: MCQ accuracy or regression MAE.
inline double evaluate_objective(const std::vector<QuestionRecord>& records,
                                 const std::vector<std::size_t>& subset, const HyperParams& hp,
                                 const EngineConfig& cfg, Objective objective) {
  double acc = 0.0;
  for (std::size_t idx : subset) {
    const auto& r = records[idx];
    Decision d = engine::decide(r, hp, cfg);
    if (objective == Objective::MaxAccuracy) {
      if (d.chosen == r.truth_option) acc += 1.0;
    } else {
      acc += std::abs(regression::resolve_value(r, d).resolved_value - r.truth_value);
    }
  }
  return acc / static_cast<double>(subset.size());
}

inline bool better(Objective obj, double a, double b) {
  return obj == Objective::MaxAccuracy ? a > b : a < b;
}

/// Seeded random search: sample `samples` joint configurations, score each on
/// one fixed subset of ceil(fraction * N) records, re-score the top_k on the
/// full validation set and keep the best by full-set objective. Parameter
/// sampling is serial up front, so the sampled set is independent of any
/// evaluation parallelism and a shorter run is a prefix of a longer one.
inline SearchTrace random_search(const std::vector<QuestionRecord>& validation,
                                 const SearchRanges& ranges, std::size_t samples,
                                 double subset_fraction, std::size_t top_k, std::uint64_t seed,
                                 const EngineConfig& cfg, Objective objective,
                                 std::size_t workers = 0) {
  if (validation.empty()) throw InvalidInput("random_search: empty validation set");
  if (!(subset_fraction > 0.0 && subset_fraction <= 1.0))
    throw InvalidInput("random_search: subset_fraction must lie in (0, 1]");
  if (top_k > samples) throw InvalidInput("random_search: top_k must not exceed samples");
  if (samples == 0) throw InvalidInput("random_search: samples must be positive");
  ranges.validate();

  SearchTrace trace;
  trace.seed = seed;

  SplitMix64 param_rng(seed);
  trace.trials.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) trace.trials[i].params = sample_params(ranges, param_rng);

  // Subset drawn once from a derived sub-stream; trial objectives stay comparable.
  std::size_t subset_size =
      static_cast<std::size_t>(std::ceil(subset_fraction * static_cast<double>(validation.size())));
  SplitMix64 subset_rng(SplitMix64(seed).derive(0x5u));
  std::vector<std::size_t> order = shuffled_indices(validation.size(), subset_rng);
  std::vector<std::size_t> subset(order.begin(), order.begin() + static_cast<long>(subset_size));

  std::vector<std::size_t> full(validation.size());
  for (std::size_t i = 0; i < full.size(); ++i) full[i] = i;

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  auto eval_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      trace.trials[i].subset_objective =
          evaluate_objective(validation, subset, trace.trials[i].params, cfg, objective);
  };
  if (workers <= 1 || samples < 64) {
    eval_range(0, samples);
  } else {
    std::vector<std::future<void>> futures;
    std::size_t chunk = (samples + workers - 1) / workers;
    for (std::size_t lo = 0; lo < samples; lo += chunk)
      futures.push_back(std::async(std::launch::async, eval_range, lo, std::min(lo + chunk, samples)));
    for (auto& f : futures) f.get();
  }

  // Top-k by subset objective, ties broken by earlier trial index.
  std::vector<std::size_t> idx(samples);
  for (std::size_t i = 0; i < samples; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return better(objective, trace.trials[a].subset_objective, trace.trials[b].subset_objective);
  });
  idx.resize(std::min(top_k, samples));

  trace.top.reserve(idx.size());
  for (std::size_t i : idx) {
    TopEntry e;
    e.trial_index = i;
    e.params = trace.trials[i].params;
    e.full_objective = evaluate_objective(validation, full, e.params, cfg, objective);
    trace.top.push_back(e);
  }

  const TopEntry* best = &trace.top.front();
  for (const auto& e : trace.top) {
    if (better(objective, e.full_objective, best->full_objective) ||
        (e.full_objective == best->full_objective && e.trial_index < best->trial_index))
      best = &e;
  }
  trace.best = best->params;
  trace.best_trial_index = best->trial_index;
  trace.best_full_objective = best->full_objective;
  return trace;
}

inline nlohmann::json params_to_json(const HyperParams& hp) {
  return {{"alpha", hp.alpha}, {"beta", hp.beta}, {"lambda_kl", hp.lambda_kl}, {"tau", hp.tau}};
}

/// JSONL: one trial per line, then one "top" line per re-evaluated entry.
inline std::string trace_to_jsonl(const SearchTrace& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.trials.size(); ++i) {
    nlohmann::json j{{"trial", i},
                     {"params", params_to_json(trace.trials[i].params)},
                     {"subset_objective", trace.trials[i].subset_objective}};
    out += j.dump();
    out += "\n";
  }
  for (const auto& e : trace.top) {
    nlohmann::json j{{"top_trial", e.trial_index},
                     {"params", params_to_json(e.params)},
                     {"full_objective", e.full_objective}};
    out += j.dump();
    out += "\n";
  }
  return out;
}

inline nlohmann::json trace_summary(const SearchTrace& trace) {
  return {{"best", params_to_json(trace.best)},
          {"best_full_objective", trace.best_full_objective},
          {"best_trial_index", trace.best_trial_index},
          {"samples", trace.trials.size()},
          {"seed", trace.seed},
          {"top_k", trace.top.size()}};
}

}  // namespace cade::tuner
