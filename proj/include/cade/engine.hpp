#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cade/error.hpp"
#include "cade/types.hpp"

namespace cade::engine {

/// Numerically stable softmax: max-subtracted exponentials, then floored at
/// prob_floor and renormalized so every entry is safe under log and division.
inline std::vector<double> softmax(const std::vector<double>& logits, double prob_floor = 1e-12) {
  if (logits.empty()) throw InvalidInput("softmax: empty logit vector");
  for (double z : logits)
    if (!std::isfinite(z)) throw InvalidInput("softmax: non-finite logit");

  double zmax = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - zmax);
    sum += p[i];
  }
  double floored_sum = 0.0;
  for (double& x : p) {
    x = std::max(x / sum, prob_floor);
    floored_sum += x;
  }
  for (double& x : p) x /= floored_sum;
  return p;
}

/// Lowest index wins ties.
inline std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

struct Streams {
  std::vector<double> img;  // image-present reference
  std::vector<double> ctx;  // context stream
  std::vector<double> q;    // bias stream (intrinsic prior)
};

inline std::vector<double> renormalized(std::vector<double> p) {
  double sum = 0.0;
  for (double x : p) sum += x;
  for (double& x : p) x /= sum;
  return p;
}

/// Collapse the four view distributions into the three scoring streams.
inline Streams form_streams(const std::map<ViewKind, std::vector<double>>& probs,
                            ImageStream mode) {
  for (ViewKind v : kAllViews)
    if (!probs.count(v)) throw InvalidInput(std::string("form_streams: missing view ") + to_string(v));
  const auto& full = probs.at(ViewKind::FULL);
  const auto& img = probs.at(ViewKind::IMG);
  const auto& ctx = probs.at(ViewKind::CTX);
  const auto& q = probs.at(ViewKind::Q);
  for (const auto* v : {&img, &ctx, &q})
    if (v->size() != full.size()) throw InvalidInput("form_streams: view length mismatch");

  Streams s;
  switch (mode) {
    case ImageStream::ImgOnly: s.img = img; break;
    case ImageStream::FullOnly: s.img = full; break;
    case ImageStream::FullPlusImg: {
      s.img.resize(full.size());
      for (std::size_t i = 0; i < full.size(); ++i) s.img[i] = full[i] + img[i];
      break;
    }
  }
  s.img = renormalized(std::move(s.img));
  s.ctx = renormalized(ctx);
  s.q = renormalized(q);
  return s;
}

/// KL(p||q) = sum p ln(p/q); JS(p,q) = KL(p||m)/2 + KL(q||m)/2 with m the
/// midpoint. Inputs are assumed floored away from zero.
inline double divergence(const std::vector<double>& p, const std::vector<double>& q,
                         DivergenceKind kind) {
  if (p.size() != q.size()) throw InvalidInput("divergence: length mismatch");
  auto kl = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * std::log(a[i] / b[i]);
    return d;
  };
  if (kind == DivergenceKind::KL) return std::max(kl(p, q), 0.0);
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  return std::max(0.5 * kl(p, m) + 0.5 * kl(q, m), 0.0);
}

/// Instance-wise context-penalty coefficient alpha * (1 + lambda_kl * d).
inline double adaptive_alpha(double alpha, double lambda_kl, double d) {
  for (double x : {alpha, lambda_kl, d})
    if (!(x >= 0.0) || !std::isfinite(x))
      throw InvalidInput("adaptive_alpha: inputs must be non-negative and finite");
  return alpha * (1.0 + lambda_kl * d);
}

/// score_a = ln p_img[a] - alpha_i * ln p_ctx[a] - beta * ln p_q[a].
inline std::vector<double> cade_scores(const std::vector<double>& p_img,
                                       const std::vector<double>& p_ctx,
                                       const std::vector<double>& p_q, double alpha_i,
                                       double beta) {
  if (p_img.size() != p_ctx.size() || p_img.size() != p_q.size())
    throw InvalidInput("cade_scores: length mismatch");
  if (!(alpha_i >= 0.0) || !(beta >= 0.0))
    throw InvalidInput("cade_scores: alpha_i and beta must be non-negative");
  std::vector<double> scores(p_img.size());
  for (std::size_t i = 0; i < p_img.size(); ++i)
    scores[i] = std::log(p_img[i]) - alpha_i * std::log(p_ctx[i]) - beta * std::log(p_q[i]);
  return scores;
}

/// Full scoring pass over one record.
///
/// Softmax each view, gate on the Full-view confidence, otherwise form the
/// three streams, scale the context penalty by the image-context disagreement
/// and take the contrastive argmax. Ablation flags carve the pipeline down:
/// with all four off the decision is exactly the Full-view argmax.
inline Decision decide(const QuestionRecord& record, const HyperParams& hp,
                       const EngineConfig& cfg) {
  record.validate();
  hp.validate();
  cfg.validate();

  std::map<ViewKind, std::vector<double>> probs;
  for (ViewKind v : kAllViews) probs[v] = softmax(record.logits.view(v), cfg.prob_floor);

  const auto& full = probs.at(ViewKind::FULL);
  std::size_t base_idx = argmax(full);
  double m = full[base_idx];

  Decision d;
  d.confidence_m = m;

  if (cfg.confidence_gate && m >= hp.tau) {
    d.chosen_index = static_cast<int>(base_idx);
    d.chosen = record.candidates.labels[base_idx];
    d.gated = true;
    return d;
  }

  bool all_off = !cfg.confidence_gate && !cfg.context_penalty && !cfg.adaptive_disagreement &&
                 !cfg.prior_penalty;
  if (all_off) {
    d.chosen_index = static_cast<int>(base_idx);
    d.chosen = record.candidates.labels[base_idx];
    return d;
  }

  Streams streams = form_streams(probs, cfg.image_stream);
  d.divergence_d = divergence(streams.img, streams.ctx, cfg.divergence);

  double alpha_eff = 0.0;
  if (cfg.context_penalty)
    alpha_eff = cfg.adaptive_disagreement ? adaptive_alpha(hp.alpha, hp.lambda_kl, d.divergence_d)
                                          : hp.alpha;
  d.alpha_i = alpha_eff;

  double beta_eff = cfg.prior_penalty ? hp.beta : 0.0;
  d.scores = cade_scores(streams.img, streams.ctx, streams.q, alpha_eff, beta_eff);
  std::size_t idx = argmax(d.scores);
  d.chosen_index = static_cast<int>(idx);
  d.chosen = record.candidates.labels[idx];
  return d;
}

/// Order-preserving map of decide over a batch. Pure per record, so results
/// are identical regardless of any caller-side sharding.
inline std::vector<Decision> decide_batch(const std::vector<QuestionRecord>& records,
                                          const HyperParams& hp, const EngineConfig& cfg) {
  std::vector<Decision> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    try {
      out.push_back(decide(r, hp, cfg));
    } catch (const Error& e) {
      throw InvalidInput("record " + r.id + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cade::engine
