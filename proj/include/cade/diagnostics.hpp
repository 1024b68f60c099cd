#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cade/engine.hpp"
#include "cade/error.hpp"
#include "cade/metrics.hpp"
#include "cade/rng.hpp"
#include "cade/types.hpp"

namespace cade::diagnostics {

/// Semantic direction of an ordinal choice: lowest-development, middle, or
/// highest-development option.
enum class Direction { Pessimistic, Conservative, Optimistic };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::Pessimistic: return "Pessimistic";
    case Direction::Conservative: return "Conservative";
    case Direction::Optimistic: return "Optimistic";
  }
  return "?";
}

inline Direction direction_of(std::size_t index, std::size_t set_size) {
  if (set_size != 2 && set_size != 3)
    throw InvalidInput("direction_of: set size must be 2 or 3");
  if (index >= set_size) throw InvalidInput("direction_of: index out of range");
  if (set_size == 2) return index == 0 ? Direction::Pessimistic : Direction::Optimistic;
  switch (index) {
    case 0: return Direction::Pessimistic;
    case 1: return Direction::Conservative;
    default: return Direction::Optimistic;
  }
}

using DirectionFractions = std::map<Direction, double>;

/// Fractions of the given view's argmax mapped to directions, optionally per
/// pillar. Two-option records contribute no Conservative mass but stay in the
/// slice counts.
inline std::map<Pillar, DirectionFractions> directional_distribution(
    const std::vector<QuestionRecord>& records, ViewKind view, bool pillar_slicing) {
  if (records.empty()) throw InvalidInput("directional_distribution: empty input");
  std::map<Pillar, std::map<Direction, std::size_t>> counts;
  std::map<Pillar, std::size_t> totals;
  for (const auto& r : records) {
    if (r.task != Task::Mcq)
      throw InvalidInput("directional_distribution: record " + r.id + " is not MCQ");
    Pillar slice = pillar_slicing ? r.pillar : Pillar::P1;
    std::size_t idx = metrics::view_argmax(r, view);
    ++counts[slice][direction_of(idx, r.candidates.size())];
    ++totals[slice];
  }
  std::map<Pillar, DirectionFractions> out;
  for (const auto& [slice, by_dir] : counts) {
    DirectionFractions f{{Direction::Pessimistic, 0.0},
                         {Direction::Conservative, 0.0},
                         {Direction::Optimistic, 0.0}};
    for (const auto& [dir, n] : by_dir)
      f[dir] = static_cast<double>(n) / static_cast<double>(totals[slice]);
    out[slice] = f;
  }
  return out;
}

enum class PerturbationKind { ReverseOrder, RandomOrder, LowercaseToken, NumericToken };

inline const char* to_string(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::ReverseOrder: return "ReverseOrder";
    case PerturbationKind::RandomOrder: return "RandomOrder";
    case PerturbationKind::LowercaseToken: return "LowercaseToken";
    case PerturbationKind::NumericToken: return "NumericToken";
  }
  return "?";
}

struct PerturbationScheme {
  PerturbationKind kind = PerturbationKind::ReverseOrder;
  std::uint64_t seed = 0;  // RandomOrder only
};

struct PerturbedRecord {
  QuestionRecord record;
  /// Maps a perturbed candidate index back to the original index; identity
  /// for the token-format schemes.
  std::vector<std::size_t> inverse;
};

/// Order schemes permute candidate labels and all four logit vectors
/// consistently; token schemes only relabel (A->a, A->1) and keep logits and
/// order untouched. The truth label follows its candidate.
inline PerturbedRecord perturb_record(const QuestionRecord& record,
                                      const PerturbationScheme& scheme) {
  if (record.task != Task::Mcq)
    throw InvalidInput("perturb_record: record " + record.id + " is not MCQ");
  std::size_t n = record.candidates.size();

  PerturbedRecord out;
  out.record = record;
  out.inverse.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.inverse[i] = i;

  switch (scheme.kind) {
    case PerturbationKind::ReverseOrder: {
      for (std::size_t i = 0; i < n; ++i) out.inverse[i] = n - 1 - i;
      break;
    }
    case PerturbationKind::RandomOrder: {
      SplitMix64 rng(scheme.seed);
      out.inverse = shuffled_indices(n, rng);
      break;
    }
    case PerturbationKind::LowercaseToken:
    case PerturbationKind::NumericToken: {
      std::map<std::string, std::string> relabel;
      for (std::size_t i = 0; i < n; ++i) {
        const std::string& old_label = record.candidates.labels[i];
        std::string fresh;
        if (scheme.kind == PerturbationKind::LowercaseToken) {
          fresh = old_label;
          for (char& c : fresh)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        } else {
          fresh = std::to_string(i + 1);
        }
        relabel[old_label] = fresh;
        out.record.candidates.labels[i] = fresh;
      }
      out.record.truth_option = relabel.at(record.truth_option);
      return out;
    }
  }

  // Order scheme: position i of the perturbed record holds original candidate
  // inverse[i], with its label and logits.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t src = out.inverse[i];
    out.record.candidates.labels[i] = record.candidates.labels[src];
    for (ViewKind v : kAllViews) out.record.logits.view(v)[i] = record.logits.view(v)[src];
  }
  return out;
}

struct PerturbationRow {
  std::string scheme;
  DirectionFractions fractions;
};

/// One row per scheme plus an "Original" row. Each row tabulates the view's
/// argmax position on the perturbed records, read as a direction on the
/// displayed ordering; order schemes therefore reveal position-dependent
/// tendencies while token relabelings leave the row unchanged.
inline std::vector<PerturbationRow> perturbation_report(
    const std::vector<QuestionRecord>& records, const std::vector<PerturbationScheme>& schemes,
    const HyperParams& hp, const EngineConfig& cfg, ViewKind view, bool use_cade = false) {
  if (records.empty()) throw InvalidInput("perturbation_report: empty input");

  auto tabulate = [&](const std::vector<QuestionRecord>& rs) {
    DirectionFractions f{{Direction::Pessimistic, 0.0},
                         {Direction::Conservative, 0.0},
                         {Direction::Optimistic, 0.0}};
    for (const auto& r : rs) {
      std::size_t idx = use_cade ? static_cast<std::size_t>(engine::decide(r, hp, cfg).chosen_index)
                                 : metrics::view_argmax(r, view, cfg.prob_floor);
      f[direction_of(idx, r.candidates.size())] += 1.0;
    }
    for (auto& [dir, v] : f) v /= static_cast<double>(rs.size());
    return f;
  };

  std::vector<PerturbationRow> rows;
  rows.push_back({"Original", tabulate(records)});
  for (const auto& scheme : schemes) {
    std::vector<QuestionRecord> perturbed;
    perturbed.reserve(records.size());
    for (const auto& r : records) perturbed.push_back(perturb_record(r, scheme).record);
    rows.push_back({to_string(scheme.kind), tabulate(perturbed)});
  }
  return rows;
}

/// CSV layout: scheme, Optimistic, Conservative, Pessimistic.
inline std::string to_csv(const std::vector<PerturbationRow>& rows) {
  std::ostringstream os;
  os << "scheme,Optimistic,Conservative,Pessimistic\n";
  for (const auto& row : rows) {
    DirectionFractions f = row.fractions;
    os << row.scheme << "," << f[Direction::Optimistic] << "," << f[Direction::Conservative] << ","
       << f[Direction::Pessimistic] << "\n";
  }
  return os.str();
}

/// CSV for directional_distribution output.
inline std::string to_csv(const std::map<Pillar, DirectionFractions>& dist, bool pillar_slicing) {
  std::ostringstream os;
  os << "pillar,Pessimistic,Conservative,Optimistic\n";
  for (const auto& [pillar, f] : dist) {
    DirectionFractions ff = f;
    os << (pillar_slicing ? to_string(pillar) : "all") << "," << ff[Direction::Pessimistic] << ","
       << ff[Direction::Conservative] << "," << ff[Direction::Optimistic] << "\n";
  }
  return os.str();
}

}  // namespace cade::diagnostics
