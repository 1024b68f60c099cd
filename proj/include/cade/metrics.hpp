#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cade/engine.hpp"
#include "cade/error.hpp"
#include "cade/regression.hpp"
#include "cade/types.hpp"

namespace cade::metrics {

/// Indicator names are matched case-insensitively after trimming.
inline std::string normalize_indicator(const std::string& name) {
  std::size_t b = name.find_first_not_of(" \t");
  std::size_t e = name.find_last_not_of(" \t");
  std::string s = (b == std::string::npos) ? "" : name.substr(b, e - b + 1);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

/// Per-indicator tolerance delta_k for interval accuracy.
class ToleranceTable {
 public:
  ToleranceTable() = default;

  static ToleranceTable defaults() {
    ToleranceTable t;
    t.set("under 5 mortality rate", 5.0);
    t.set("women bmi", 1.0);
    t.set("asset index", 0.75);
    t.set("sanitation index", 0.75);
    t.set("water index", 0.75);
    t.set("women edu", 1.5);
    return t;
  }

  void set(const std::string& indicator, double delta) {
    if (!(delta > 0.0)) throw InvalidInput("tolerance must be positive for " + indicator);
    table_[normalize_indicator(indicator)] = delta;
  }

  double lookup(const std::string& indicator) const {
    auto it = table_.find(normalize_indicator(indicator));
    if (it == table_.end()) throw UnknownIndicator(indicator);
    return it->second;
  }

  const std::map<std::string, double>& entries() const { return table_; }

 private:
  std::map<std::string, double> table_;
};

inline double accuracy(const std::vector<std::string>& predictions,
                       const std::vector<std::string>& truths) {
  if (predictions.empty()) throw InvalidInput("accuracy: empty input");
  if (predictions.size() != truths.size()) throw InvalidInput("accuracy: length mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == truths[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

/// Single-view argmax index after flooring softmax; ties by lowest index.
inline std::size_t view_argmax(const QuestionRecord& r, ViewKind v, double prob_floor = 1e-12) {
  return engine::argmax(engine::softmax(r.logits.view(v), prob_floor));
}

inline std::map<ViewKind, double> per_view_accuracy(const std::vector<QuestionRecord>& records) {
  if (records.empty()) throw InvalidInput("per_view_accuracy: empty input");
  std::map<ViewKind, double> out;
  for (ViewKind v : kAllViews) {
    std::size_t correct = 0;
    for (const auto& r : records) {
      if (r.task != Task::Mcq) throw InvalidInput("per_view_accuracy: record " + r.id + " is not MCQ");
      std::size_t idx = view_argmax(r, v);
      if (r.candidates.labels[idx] == r.truth_option) ++correct;
    }
    out[v] = static_cast<double>(correct) / static_cast<double>(records.size());
  }
  return out;
}

/// Full-view accuracy minus CTX-view accuracy, per pillar. Pillars with no
/// records are omitted rather than reported as zero.
inline std::map<Pillar, double> delta_acc(const std::vector<QuestionRecord>& records) {
  std::map<Pillar, std::size_t> total, full_correct, ctx_correct;
  for (const auto& r : records) {
    if (r.task != Task::Mcq) throw InvalidInput("delta_acc: record " + r.id + " is not MCQ");
    ++total[r.pillar];
    if (r.candidates.labels[view_argmax(r, ViewKind::FULL)] == r.truth_option)
      ++full_correct[r.pillar];
    if (r.candidates.labels[view_argmax(r, ViewKind::CTX)] == r.truth_option)
      ++ctx_correct[r.pillar];
  }
  std::map<Pillar, double> out;
  for (const auto& [pillar, n] : total)
    out[pillar] = (static_cast<double>(full_correct[pillar]) - static_cast<double>(ctx_correct[pillar])) /
                  static_cast<double>(n);
  return out;
}

inline double mae(const std::vector<double>& predictions, const std::vector<double>& truths) {
  if (predictions.empty()) throw InvalidInput("mae: empty input");
  if (predictions.size() != truths.size()) throw InvalidInput("mae: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) sum += std::abs(predictions[i] - truths[i]);
  return sum / static_cast<double>(predictions.size());
}

inline double interval_accuracy(const std::vector<double>& predictions,
                                const std::vector<double>& truths,
                                const std::vector<std::string>& indicators,
                                const ToleranceTable& table) {
  if (predictions.empty()) throw InvalidInput("interval_accuracy: empty input");
  if (predictions.size() != truths.size() || predictions.size() != indicators.size())
    throw InvalidInput("interval_accuracy: length mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (std::abs(predictions[i] - truths[i]) <= table.lookup(indicators[i])) ++correct;
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

/// Aggregated metrics over one run, sliced by pillar, context test and view.
struct RunReport {
  std::size_t total = 0;
  std::size_t mcq_count = 0;
  std::size_t regression_count = 0;
  std::optional<double> overall_accuracy;                  // MCQ decisions
  std::map<ViewKind, double> accuracy_by_view;             // single-view argmax (MCQ)
  std::map<ContextTest, double> accuracy_by_context_test;  // MCQ decisions
  std::map<Pillar, double> accuracy_by_pillar;             // MCQ decisions
  std::map<Pillar, double> delta_acc_by_pillar;
  std::optional<double> mae;
  std::optional<double> interval_accuracy;
  std::map<Pillar, std::size_t> counts_by_pillar;
  std::map<ContextTest, std::size_t> counts_by_context_test;
};

inline RunReport build_report(const std::vector<QuestionRecord>& records,
                              const std::vector<Decision>& decisions,
                              const ToleranceTable& table = ToleranceTable::defaults()) {
  if (records.empty()) throw InvalidInput("build_report: at least one record required");
  if (records.size() != decisions.size())
    throw InvalidInput("build_report: records and decisions are misaligned");

  RunReport rep;
  rep.total = records.size();

  std::vector<QuestionRecord> mcq;
  std::vector<std::string> mcq_pred, mcq_truth;
  std::vector<double> reg_pred, reg_truth;
  std::vector<std::string> reg_indicators;
  std::map<Pillar, std::pair<std::size_t, std::size_t>> pillar_acc;    // correct, total
  std::map<ContextTest, std::pair<std::size_t, std::size_t>> test_acc;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto& d = decisions[i];
    ++rep.counts_by_pillar[r.pillar];
    ++rep.counts_by_context_test[r.context_test];
    if (r.task == Task::Mcq) {
      mcq.push_back(r);
      mcq_pred.push_back(d.chosen);
      mcq_truth.push_back(r.truth_option);
      bool correct = d.chosen == r.truth_option;
      auto& pa = pillar_acc[r.pillar];
      auto& ta = test_acc[r.context_test];
      pa.first += correct ? 1 : 0;
      ++pa.second;
      ta.first += correct ? 1 : 0;
      ++ta.second;
    } else {
      reg_pred.push_back(regression::resolve_value(r, d).resolved_value);
      reg_truth.push_back(r.truth_value);
      reg_indicators.push_back(r.indicator);
    }
  }
  rep.mcq_count = mcq.size();
  rep.regression_count = reg_pred.size();

  if (!mcq.empty()) {
    rep.overall_accuracy = accuracy(mcq_pred, mcq_truth);
    rep.accuracy_by_view = per_view_accuracy(mcq);
    rep.delta_acc_by_pillar = delta_acc(mcq);
    for (const auto& [pillar, ct] : pillar_acc)
      rep.accuracy_by_pillar[pillar] =
          static_cast<double>(ct.first) / static_cast<double>(ct.second);
    for (const auto& [test, ct] : test_acc)
      rep.accuracy_by_context_test[test] =
          static_cast<double>(ct.first) / static_cast<double>(ct.second);
  }
  if (!reg_pred.empty()) {
    rep.mae = mae(reg_pred, reg_truth);
    rep.interval_accuracy = interval_accuracy(reg_pred, reg_truth, reg_indicators, table);
  }
  return rep;
}

/// Stable JSON document; nlohmann orders object keys alphabetically.
inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["total"] = r.total;
  j["mcq_count"] = r.mcq_count;
  j["regression_count"] = r.regression_count;
  if (r.overall_accuracy) j["overall_accuracy"] = *r.overall_accuracy;
  if (r.mae) j["mae"] = *r.mae;
  if (r.interval_accuracy) j["interval_accuracy"] = *r.interval_accuracy;
  for (const auto& [v, a] : r.accuracy_by_view) j["accuracy_by_view"][to_string(v)] = a;
  for (const auto& [t, a] : r.accuracy_by_context_test)
    j["accuracy_by_context_test"][to_string(t)] = a;
  for (const auto& [p, a] : r.accuracy_by_pillar) j["accuracy_by_pillar"][to_string(p)] = a;
  for (const auto& [p, a] : r.delta_acc_by_pillar) j["delta_acc_by_pillar"][to_string(p)] = a;
  for (const auto& [p, n] : r.counts_by_pillar) j["counts_by_pillar"][to_string(p)] = n;
  for (const auto& [t, n] : r.counts_by_context_test)
    j["counts_by_context_test"][to_string(t)] = n;
  return j;
}

/// Flat CSV, one row per slice, alphabetical within each slice family.
inline std::string to_csv(const RunReport& r) {
  std::ostringstream os;
  os << "slice,key,metric,value\n";
  auto row = [&os](const std::string& slice, const std::string& key, const std::string& metric,
                   double value) { os << slice << "," << key << "," << metric << "," << value << "\n"; };
  row("overall", "all", "count", static_cast<double>(r.total));
  if (r.overall_accuracy) row("overall", "all", "accuracy", *r.overall_accuracy);
  if (r.mae) row("overall", "all", "mae", *r.mae);
  if (r.interval_accuracy) row("overall", "all", "interval_accuracy", *r.interval_accuracy);
  for (const auto& [v, a] : r.accuracy_by_view) row("view", to_string(v), "accuracy", a);
  for (const auto& [t, a] : r.accuracy_by_context_test) row("context_test", to_string(t), "accuracy", a);
  for (const auto& [p, a] : r.accuracy_by_pillar) row("pillar", to_string(p), "accuracy", a);
  for (const auto& [p, a] : r.delta_acc_by_pillar) row("pillar", to_string(p), "delta_acc", a);
  for (const auto& [p, n] : r.counts_by_pillar)
    row("pillar", to_string(p), "count", static_cast<double>(n));
  for (const auto& [t, n] : r.counts_by_context_test)
    row("context_test", to_string(t), "count", static_cast<double>(n));
  return os.str();
}

}  // namespace cade::metrics
