#pragma once

// Straight-line reference scorer, kept deliberately independent of the
// library implementation: plain loops, no calls into cade::engine.

#include <cmath>
#include <cstddef>
#include <vector>

#include "cade/types.hpp"

namespace testsupport {

struct OracleResult {
  std::size_t chosen = 0;
  bool gated = false;
  double m = 0.0;
  double d = 0.0;
  double alpha_i = 0.0;
  std::vector<double> scores;
};

inline std::vector<double> oracle_softmax(const std::vector<double>& z, double floor) {
  double zmax = z[0];
  for (double x : z)
    if (x > zmax) zmax = x;
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - zmax);
    sum += p[i];
  }
  double sum2 = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] /= sum;
    if (p[i] < floor) p[i] = floor;
    sum2 += p[i];
  }
  for (std::size_t i = 0; i < z.size(); ++i) p[i] /= sum2;
  return p;
}

inline std::size_t oracle_argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline OracleResult oracle_decide(const cade::QuestionRecord& record, const cade::HyperParams& hp,
                                  const cade::EngineConfig& cfg) {
  const double floor = cfg.prob_floor;
  std::vector<double> pq = oracle_softmax(record.logits.q, floor);
  std::vector<double> pctx = oracle_softmax(record.logits.ctx, floor);
  std::vector<double> pimg = oracle_softmax(record.logits.img, floor);
  std::vector<double> pfull = oracle_softmax(record.logits.full, floor);
  std::size_t n = pq.size();

  OracleResult out;
  std::size_t base = oracle_argmax(pfull);
  out.m = pfull[base];

  if (cfg.confidence_gate && out.m >= hp.tau) {
    out.chosen = base;
    out.gated = true;
    return out;
  }
  if (!cfg.confidence_gate && !cfg.context_penalty && !cfg.adaptive_disagreement &&
      !cfg.prior_penalty) {
    out.chosen = base;
    return out;
  }

  // streams
  std::vector<double> simg(n);
  if (cfg.image_stream == cade::ImageStream::ImgOnly)
    simg = pimg;
  else if (cfg.image_stream == cade::ImageStream::FullOnly)
    simg = pfull;
  else
    for (std::size_t i = 0; i < n; ++i) simg[i] = pfull[i] + pimg[i];
  double sum = 0.0;
  for (double x : simg) sum += x;
  for (double& x : simg) x /= sum;

  std::vector<double> sctx = pctx;
  sum = 0.0;
  for (double x : sctx) sum += x;
  for (double& x : sctx) x /= sum;
  std::vector<double> sq = pq;
  sum = 0.0;
  for (double x : sq) sum += x;
  for (double& x : sq) x /= sum;

  // divergence
  if (cfg.divergence == cade::DivergenceKind::KL) {
    for (std::size_t i = 0; i < n; ++i) out.d += simg[i] * std::log(simg[i] / sctx[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double mid = 0.5 * (simg[i] + sctx[i]);
      out.d += 0.5 * simg[i] * std::log(simg[i] / mid) + 0.5 * sctx[i] * std::log(sctx[i] / mid);
    }
  }
  if (out.d < 0.0) out.d = 0.0;

  double alpha_eff = 0.0;
  if (cfg.context_penalty)
    alpha_eff = cfg.adaptive_disagreement ? hp.alpha * (1.0 + hp.lambda_kl * out.d) : hp.alpha;
  out.alpha_i = alpha_eff;
  double beta_eff = cfg.prior_penalty ? hp.beta : 0.0;

  out.scores.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.scores[i] =
        std::log(simg[i]) - alpha_eff * std::log(sctx[i]) - beta_eff * std::log(sq[i]);
  out.chosen = oracle_argmax(out.scores);
  return out;
}

}  // namespace testsupport
