#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cade/error.hpp"

namespace cade {

/// The four input views. Iteration order is fixed: Q, CTX, IMG, FULL.
enum class ViewKind { Q, CTX, IMG, FULL };

inline constexpr std::array<ViewKind, 4> kAllViews = {ViewKind::Q, ViewKind::CTX, ViewKind::IMG,
                                                      ViewKind::FULL};

inline const char* to_string(ViewKind v) {
  switch (v) {
    case ViewKind::Q: return "q";
    case ViewKind::CTX: return "ctx";
    case ViewKind::IMG: return "img";
    case ViewKind::FULL: return "full";
  }
  return "?";
}

enum class CandidateKind { McqLetters, Digits };

/// Ordered candidate identifiers; list order encodes the ordinal development
/// axis, lowest index = lowest development.
struct CandidateSet {
  CandidateKind kind = CandidateKind::McqLetters;
  std::vector<std::string> labels;

  std::size_t size() const { return labels.size(); }

  int index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return static_cast<int>(i);
    return -1;
  }

  static CandidateSet mcq(std::vector<std::string> labels) {
    return CandidateSet{CandidateKind::McqLetters, std::move(labels)};
  }

  static CandidateSet digits() {
    CandidateSet s;
    s.kind = CandidateKind::Digits;
    for (char d = '0'; d <= '9'; ++d) s.labels.emplace_back(1, d);
    return s;
  }

  void validate() const {
    if (labels.empty() || labels.size() < 2 || labels.size() > 10)
      throw ValidationError("candidate set size must be in [2, 10]");
    for (std::size_t i = 0; i < labels.size(); ++i)
      for (std::size_t j = i + 1; j < labels.size(); ++j)
        if (labels[i] == labels[j]) throw ValidationError("duplicate candidate label: " + labels[i]);
    if (kind == CandidateKind::McqLetters) {
      if (labels.size() != 2 && labels.size() != 3)
        throw ValidationError("mcq candidate set size must be 2 or 3");
    } else {
      if (labels.size() != 10) throw ValidationError("digit candidate set must be exactly 0..9");
      for (int i = 0; i < 10; ++i)
        if (labels[i] != std::string(1, static_cast<char>('0' + i)))
          throw ValidationError("digit candidate set must be 0..9 ascending");
    }
  }
};

/// Per-view logit vectors, index-aligned with the record's CandidateSet.
struct ViewLogits {
  std::vector<double> q, ctx, img, full;

  const std::vector<double>& view(ViewKind v) const {
    switch (v) {
      case ViewKind::Q: return q;
      case ViewKind::CTX: return ctx;
      case ViewKind::IMG: return img;
      case ViewKind::FULL: return full;
    }
    return q;
  }

  std::vector<double>& view(ViewKind v) {
    return const_cast<std::vector<double>&>(static_cast<const ViewLogits*>(this)->view(v));
  }

  void validate(std::size_t n_candidates) const {
    for (ViewKind v : kAllViews) {
      const auto& z = view(v);
      if (z.size() != n_candidates)
        throw ValidationError(std::string("view ") + to_string(v) + " has " +
                              std::to_string(z.size()) + " logits, expected " +
                              std::to_string(n_candidates));
      for (double x : z)
        if (!std::isfinite(x))
          throw ValidationError(std::string("non-finite logit in view ") + to_string(v));
    }
  }
};

struct HyperParams {
  double tau = 0.9;        // confidence-gate threshold, in (0,1)
  double alpha = 0.7;      // base context-penalty strength
  double lambda_kl = 2.0;  // disagreement sensitivity
  double beta = 1.0;       // question-prior penalty strength

  void validate() const {
    if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("tau must lie strictly in (0,1)");
    for (double x : {alpha, lambda_kl, beta})
      if (!(x >= 0.0) || !std::isfinite(x))
        throw ValidationError("alpha, lambda_kl and beta must be non-negative and finite");
  }
};

enum class DivergenceKind { KL, JS };
enum class ImageStream { ImgOnly, FullOnly, FullPlusImg };
enum class TieBreak { LowestIndex };

struct EngineConfig {
  DivergenceKind divergence = DivergenceKind::KL;
  ImageStream image_stream = ImageStream::FullPlusImg;
  bool context_penalty = true;
  bool adaptive_disagreement = true;
  bool prior_penalty = true;
  bool confidence_gate = true;
  double prob_floor = 1e-12;
  TieBreak tie_break = TieBreak::LowestIndex;

  void validate() const {
    if (!(prob_floor > 0.0 && prob_floor <= 1e-6))
      throw ValidationError("prob_floor must lie in (0, 1e-6]");
  }
};

enum class Pillar { P1, P2, P3 };
enum class Task { Mcq, Regression };
enum class ContextTest { T1, T2, T3, T4, T5 };

inline const char* to_string(Pillar p) {
  switch (p) {
    case Pillar::P1: return "P1";
    case Pillar::P2: return "P2";
    case Pillar::P3: return "P3";
  }
  return "?";
}

inline const char* to_string(Task t) { return t == Task::Mcq ? "mcq" : "regression"; }

inline const char* to_string(ContextTest t) {
  switch (t) {
    case ContextTest::T1: return "T1";
    case ContextTest::T2: return "T2";
    case ContextTest::T3: return "T3";
    case ContextTest::T4: return "T4";
    case ContextTest::T5: return "T5";
  }
  return "?";
}

/// One benchmark item: candidates, four per-view logit vectors, truth and
/// slicing metadata. Raw modality payloads are never interpreted; only the
/// opaque provenance string survives.
struct QuestionRecord {
  std::string id;
  Pillar pillar = Pillar::P1;
  Task task = Task::Mcq;
  std::string indicator;
  ContextTest context_test = ContextTest::T1;
  CandidateSet candidates;
  ViewLogits logits;

  std::string truth_option;                // MCQ only
  double truth_value = 0.0;                // regression only
  std::map<ViewKind, std::string> view_values;       // regression: value each view would render
  std::map<std::string, double> completions;         // regression: digit -> completed value
  std::string provenance;

  void validate() const {
    candidates.validate();
    logits.validate(candidates.size());
    if (task == Task::Mcq) {
      if (candidates.index_of(truth_option) < 0)
        throw ValidationError("record " + id + ": truth option '" + truth_option +
                              "' not among candidates");
    } else {
      if (!std::isfinite(truth_value))
        throw ValidationError("record " + id + ": non-finite truth value");
    }
    for (const auto& [digit, value] : completions) {
      if (digit.size() != 1 || digit[0] < '0' || digit[0] > '9')
        throw ValidationError("record " + id + ": completion key '" + digit + "' is not a digit");
      if (!std::isfinite(value))
        throw ValidationError("record " + id + ": non-finite completion value");
    }
  }
};

/// Chosen candidate plus the full audit trail of the scoring pass.
/// Gated decisions carry divergence_d = 0 and an empty scores vector so the
/// audit log distinguishes gated from scored outcomes.
struct Decision {
  std::string chosen;
  int chosen_index = 0;
  bool gated = false;
  double confidence_m = 0.0;
  double divergence_d = 0.0;
  double alpha_i = 0.0;
  std::vector<double> scores;
};

}  // namespace cade
