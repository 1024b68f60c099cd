#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cade/error.hpp"
#include "cade/sha256.hpp"
#include "cade/types.hpp"

namespace cade::io {

inline constexpr const char* kToolVersion = "0.1.0";

inline ViewKind view_from_string(const std::string& s) {
  if (s == "q") return ViewKind::Q;
  if (s == "ctx") return ViewKind::CTX;
  if (s == "img") return ViewKind::IMG;
  if (s == "full") return ViewKind::FULL;
  throw ParseError("unknown view: " + s);
}

inline Pillar pillar_from_string(const std::string& s) {
  if (s == "P1") return Pillar::P1;
  if (s == "P2") return Pillar::P2;
  if (s == "P3") return Pillar::P3;
  throw ParseError("unknown pillar: " + s);
}

inline Task task_from_string(const std::string& s) {
  if (s == "mcq") return Task::Mcq;
  if (s == "regression") return Task::Regression;
  throw ParseError("unknown task: " + s);
}

inline ContextTest context_test_from_string(const std::string& s) {
  if (s == "T1") return ContextTest::T1;
  if (s == "T2") return ContextTest::T2;
  if (s == "T3") return ContextTest::T3;
  if (s == "T4") return ContextTest::T4;
  if (s == "T5") return ContextTest::T5;
  throw ParseError("unknown context test: " + s);
}

inline nlohmann::json record_to_json(const QuestionRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["pillar"] = to_string(r.pillar);
  j["task"] = to_string(r.task);
  j["indicator"] = r.indicator;
  j["context_test"] = to_string(r.context_test);
  j["candidates"] = {{"kind", r.candidates.kind == CandidateKind::McqLetters ? "mcq_letters" : "digits"},
                     {"labels", r.candidates.labels}};
  for (ViewKind v : kAllViews) j["logits"][to_string(v)] = r.logits.view(v);
  if (r.task == Task::Mcq)
    j["truth"] = {{"option", r.truth_option}};
  else
    j["truth"] = {{"value", r.truth_value}};
  if (!r.view_values.empty())
    for (const auto& [v, s] : r.view_values) j["view_values"][to_string(v)] = s;
  if (!r.completions.empty()) j["completions"] = r.completions;
  if (!r.provenance.empty()) j["provenance"] = r.provenance;
  return j;
}

inline QuestionRecord record_from_json(const nlohmann::json& j) {
  QuestionRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.pillar = pillar_from_string(j.at("pillar").get<std::string>());
    r.task = task_from_string(j.at("task").get<std::string>());
    r.indicator = j.value("indicator", std::string());
    r.context_test = context_test_from_string(j.at("context_test").get<std::string>());
    const auto& cand = j.at("candidates");
    std::string kind = cand.at("kind").get<std::string>();
    if (kind == "mcq_letters")
      r.candidates.kind = CandidateKind::McqLetters;
    else if (kind == "digits")
      r.candidates.kind = CandidateKind::Digits;
    else
      throw ParseError("unknown candidate kind: " + kind);
    r.candidates.labels = cand.at("labels").get<std::vector<std::string>>();
    const auto& logits = j.at("logits");
    for (ViewKind v : kAllViews) {
      if (!logits.contains(to_string(v)))
        throw ValidationError("record " + r.id + ": missing view " + to_string(v));
      r.logits.view(v) = logits.at(to_string(v)).get<std::vector<double>>();
    }
    const auto& truth = j.at("truth");
    if (r.task == Task::Mcq)
      r.truth_option = truth.at("option").get<std::string>();
    else
      r.truth_value = truth.at("value").get<double>();
    if (j.contains("view_values"))
      for (const auto& [key, val] : j.at("view_values").items())
        r.view_values[view_from_string(key)] = val.get<std::string>();
    if (j.contains("completions"))
      for (const auto& [key, val] : j.at("completions").items())
        r.completions[key] = val.get<double>();
    r.provenance = j.value("provenance", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("record: ") + e.what());
  }
  return r;
}

/// Streaming JSONL reader; validates every record and keeps input order.
/// T5 records must still carry a ctx vector; a warning is emitted when it
/// differs from the q vector.
inline std::vector<QuestionRecord> read_records(const std::string& path,
                                                std::ostream* warn = &std::cerr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<QuestionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    QuestionRecord r;
    try {
      r = record_from_json(j);
      r.validate();
    } catch (const Error& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (warn && r.context_test == ContextTest::T5 && r.logits.ctx != r.logits.q)
      *warn << "warning: " << path << ":" << line_no << ": T5 record " << r.id
            << " has ctx logits differing from q logits\n";
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_records(const std::string& path, const std::vector<QuestionRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& r : records) out << record_to_json(r).dump() << "\n";
  if (!out) throw IoError("write failed for " + path);
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Everything needed to reproduce a run: command, inputs and their SHA-256
/// digest, engine configuration, hyperparameters and seed.
struct RunManifest {
  std::string command;
  std::vector<std::string> input_paths;
  nlohmann::json engine_config;
  nlohmann::json hyper_params;
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  std::string input_digest;
  std::string timestamp;

  static std::string now_iso8601() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
  }

  void digest_inputs() {
    Sha256 h;
    for (const auto& p : input_paths) h.update(read_file_bytes(p));
    input_digest = h.hex_digest();
  }

  nlohmann::json to_json() const {
    return {{"command", command},
            {"engine_config", engine_config},
            {"hyper_params", hyper_params},
            {"input_digest", input_digest},
            {"input_paths", input_paths},
            {"seed", seed},
            {"timestamp", timestamp},
            {"tool_version", tool_version}};
  }
};

inline nlohmann::json config_to_json(const EngineConfig& cfg) {
  return {{"divergence", cfg.divergence == DivergenceKind::KL ? "kl" : "js"},
          {"image_stream", cfg.image_stream == ImageStream::ImgOnly    ? "img"
                           : cfg.image_stream == ImageStream::FullOnly ? "full"
                                                                       : "full+img"},
          {"context_penalty", cfg.context_penalty},
          {"adaptive_disagreement", cfg.adaptive_disagreement},
          {"prior_penalty", cfg.prior_penalty},
          {"confidence_gate", cfg.confidence_gate},
          {"prob_floor", cfg.prob_floor},
          {"tie_break", "lowest_index"}};
}

inline nlohmann::json decision_to_json(const std::string& record_id, const Decision& d) {
  return {{"id", record_id},         {"chosen", d.chosen},   {"chosen_index", d.chosen_index},
          {"gated", d.gated},        {"m", d.confidence_m},  {"d", d.divergence_d},
          {"alpha_i", d.alpha_i},    {"scores", d.scores}};
}

/// JSONL decisions plus `<path>.manifest.json`. Output bytes depend only on
/// the decisions themselves, never on the manifest timestamp.
inline void write_decisions(const std::string& path, const std::vector<std::string>& record_ids,
                            const std::vector<Decision>& decisions, const RunManifest& manifest) {
  if (record_ids.size() != decisions.size())
    throw InvalidInput("write_decisions: ids and decisions are misaligned");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (std::size_t i = 0; i < decisions.size(); ++i)
    out << decision_to_json(record_ids[i], decisions[i]).dump() << "\n";
  if (!out) throw IoError("write failed for " + path);

  std::ofstream mout(path + ".manifest.json", std::ios::binary);
  if (!mout) throw IoError("cannot write " + path + ".manifest.json");
  mout << manifest.to_json().dump(2) << "\n";
  if (!mout) throw IoError("write failed for " + path + ".manifest.json");
}

struct DecisionLine {
  std::string id;
  Decision decision;
};

inline std::vector<DecisionLine> read_decisions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<DecisionLine> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      DecisionLine d;
      d.id = j.at("id").get<std::string>();
      d.decision.chosen = j.at("chosen").get<std::string>();
      d.decision.chosen_index = j.at("chosen_index").get<int>();
      d.decision.gated = j.at("gated").get<bool>();
      d.decision.confidence_m = j.at("m").get<double>();
      d.decision.divergence_d = j.at("d").get<double>();
      d.decision.alpha_i = j.at("alpha_i").get<double>();
      d.decision.scores = j.at("scores").get<std::vector<double>>();
      out.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cade::io
