// CADE command-line harness: debias, evaluate, diagnose, perturb, tune,
// generate and report subcommands over JSONL record files.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cade/diagnostics.hpp"
#include "cade/engine.hpp"
#include "cade/error.hpp"
#include "cade/io.hpp"
#include "cade/metrics.hpp"
#include "cade/synthgen.hpp"
#include "cade/tuner.hpp"
#include "cade/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

cade::io::RunManifest make_manifest(const std::string& command,
                                    const std::vector<std::string>& inputs,
                                    const cade::EngineConfig& cfg, const cade::HyperParams& hp,
                                    std::uint64_t seed) {
  cade::io::RunManifest m;
  m.command = command;
  m.input_paths = inputs;
  m.engine_config = cade::io::config_to_json(cfg);
  m.hyper_params = cade::tuner::params_to_json(hp);
  m.seed = seed;
  m.timestamp = cade::io::RunManifest::now_iso8601();
  m.digest_inputs();
  return m;
}

void write_manifest(const std::string& out_path, const cade::io::RunManifest& m) {
  std::ofstream f(out_path + ".manifest.json", std::ios::binary);
  if (!f) throw cade::IoError("cannot write " + out_path + ".manifest.json");
  f << m.to_json().dump(2) << "\n";
}

// Directional diagnostics only apply to MCQ records; mixed files keep just
// that subset.
std::vector<cade::QuestionRecord> mcq_subset(std::vector<cade::QuestionRecord> records) {
  std::erase_if(records, [](const cade::QuestionRecord& r) { return r.task != cade::Task::Mcq; });
  if (records.empty()) throw cade::InvalidInput("no MCQ records in input");
  return records;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw cade::IoError("cannot write " + path);
  f << text;
  if (!f) throw cade::IoError("write failed for " + path);
}

cade::DivergenceKind parse_divergence(const std::string& s) {
  if (s == "kl") return cade::DivergenceKind::KL;
  if (s == "js") return cade::DivergenceKind::JS;
  throw cade::InvalidInput("unknown divergence: " + s);
}

cade::ImageStream parse_image_stream(const std::string& s) {
  if (s == "img") return cade::ImageStream::ImgOnly;
  if (s == "full") return cade::ImageStream::FullOnly;
  if (s == "full+img") return cade::ImageStream::FullPlusImg;
  throw cade::InvalidInput("unknown image stream: " + s);
}

struct CommonEngineOpts {
  std::string divergence = "kl";
  std::string image_stream = "full+img";
  bool disable_gate = false;
  bool disable_context_penalty = false;
  bool disable_adaptive = false;
  bool disable_prior_penalty = false;

  void attach(CLI::App* app) {
    app->add_option("--divergence", divergence, "Divergence kind: kl|js")
        ->check(CLI::IsMember({"kl", "js"}));
    app->add_option("--image-stream", image_stream, "Image stream: img|full|full+img")
        ->check(CLI::IsMember({"img", "full", "full+img"}));
    app->add_flag("--disable-gate", disable_gate, "Disable the confidence gate");
    app->add_flag("--disable-context-penalty", disable_context_penalty,
                  "Drop the context-penalty term");
    app->add_flag("--disable-adaptive", disable_adaptive,
                  "Use the base alpha without disagreement scaling");
    app->add_flag("--disable-prior-penalty", disable_prior_penalty,
                  "Drop the question-prior penalty term");
  }

  cade::EngineConfig config() const {
    cade::EngineConfig cfg;
    cfg.divergence = parse_divergence(divergence);
    cfg.image_stream = parse_image_stream(image_stream);
    cfg.confidence_gate = !disable_gate;
    cfg.context_penalty = !disable_context_penalty;
    cfg.adaptive_disagreement = !disable_adaptive;
    cfg.prior_penalty = !disable_prior_penalty;
    return cfg;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"CADE contrastive debiasing harness"};
  app.set_config("--config", "", "TOML config file with default flag values");
  app.require_subcommand(1);

  // debias
  auto* debias = app.add_subcommand("debias", "Score records and write decisions");
  std::string in_path, out_path;
  cade::HyperParams hp;
  CommonEngineOpts engine_opts;
  debias->add_option("--in", in_path, "Input records JSONL")->required();
  debias->add_option("--out", out_path, "Output decisions JSONL")->required();
  debias->add_option("--alpha", hp.alpha, "Base context-penalty strength");
  debias->add_option("--lambda-kl", hp.lambda_kl, "Disagreement sensitivity");
  debias->add_option("--beta", hp.beta, "Question-prior penalty strength");
  debias->add_option("--tau", hp.tau, "Confidence-gate threshold");
  engine_opts.attach(debias);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Compute metrics for a decision file");
  std::string eval_in, eval_decisions, eval_report, eval_csv;
  evaluate->add_option("--in", eval_in, "Input records JSONL")->required();
  evaluate->add_option("--decisions", eval_decisions, "Decisions JSONL")->required();
  evaluate->add_option("--report", eval_report, "Output report JSON")->required();
  evaluate->add_option("--csv", eval_csv, "Optional flat CSV report");

  // diagnose
  auto* diagnose = app.add_subcommand("diagnose", "Directional-default distribution of one view");
  std::string diag_in, diag_view = "q", diag_out;
  bool diag_by_pillar = false;
  diagnose->add_option("--in", diag_in, "Input records JSONL")->required();
  diagnose->add_option("--view", diag_view, "View: q|ctx|img|full")
      ->check(CLI::IsMember({"q", "ctx", "img", "full"}));
  diagnose->add_flag("--by-pillar", diag_by_pillar, "Slice by pillar");
  diagnose->add_option("--out", diag_out, "Output CSV")->required();

  // perturb
  auto* perturb = app.add_subcommand("perturb", "Option-perturbation control table");
  std::string pert_in, pert_scheme, pert_out, pert_view = "full";
  std::uint64_t pert_seed = 0;
  perturb->add_option("--in", pert_in, "Input records JSONL")->required();
  perturb->add_option("--scheme", pert_scheme, "Scheme: reverse|random|lowercase|numeric")
      ->required()
      ->check(CLI::IsMember({"reverse", "random", "lowercase", "numeric"}));
  perturb->add_option("--seed", pert_seed, "Seed for the random scheme");
  perturb->add_option("--view", pert_view, "View whose argmax is tabulated")
      ->check(CLI::IsMember({"q", "ctx", "img", "full"}));
  perturb->add_option("--out", pert_out, "Output CSV")->required();

  // tune
  auto* tune = app.add_subcommand("tune", "Random-search hyperparameter tuning");
  std::string tune_in, tune_task = "mcq", tune_out;
  std::size_t tune_samples = 10000, tune_top_k = 100;
  double tune_subset = 0.20;
  std::uint64_t tune_seed = 0;
  CommonEngineOpts tune_engine_opts;
  tune->add_option("--in", tune_in, "Validation records JSONL")->required();
  tune->add_option("--task", tune_task, "Task: mcq|regression")
      ->check(CLI::IsMember({"mcq", "regression"}));
  tune->add_option("--samples", tune_samples, "Number of sampled configurations");
  tune->add_option("--subset", tune_subset, "Subset fraction for first-pass scoring");
  tune->add_option("--top-k", tune_top_k, "Configurations re-evaluated on the full set");
  tune->add_option("--seed", tune_seed, "Search seed");
  tune->add_option("--out", tune_out, "Output trace JSONL")->required();
  tune_engine_opts.attach(tune);

  // generate
  auto* generate = app.add_subcommand("generate", "Generate synthetic biased records");
  std::string gen_spec, gen_out;
  std::uint64_t gen_seed = 0;
  bool gen_seed_set = false;
  generate->add_option("--spec", gen_spec, "Generator spec JSON")->required();
  generate->add_option("--out", gen_out, "Output records JSONL")->required();
  generate->add_option("--seed", gen_seed, "Override the spec's seed")
      ->each([&gen_seed_set](const std::string&) { gen_seed_set = true; });

  // report
  auto* report = app.add_subcommand("report", "Summarize report JSON files in a directory");
  std::string rep_runs, rep_out;
  report->add_option("--runs", rep_runs, "Directory of report JSON files")->required();
  report->add_option("--out", rep_out, "Output summary CSV")->required();

  CLI11_PARSE(app, argc, argv);

  if (debias->parsed()) {
    auto cfg = engine_opts.config();
    auto records = cade::io::read_records(in_path);
    auto decisions = cade::engine::decide_batch(records, hp, cfg);
    std::vector<std::string> ids;
    ids.reserve(records.size());
    for (const auto& r : records) ids.push_back(r.id);
    auto manifest = make_manifest("debias", {in_path}, cfg, hp, 0);
    cade::io::write_decisions(out_path, ids, decisions, manifest);
  } else if (evaluate->parsed()) {
    auto records = cade::io::read_records(eval_in);
    auto lines = cade::io::read_decisions(eval_decisions);
    if (lines.size() != records.size())
      throw cade::InvalidInput("decision count does not match record count");
    std::vector<cade::Decision> decisions;
    decisions.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].id != records[i].id)
        throw cade::InvalidInput("decision id " + lines[i].id + " does not match record id " +
                                 records[i].id);
      decisions.push_back(lines[i].decision);
    }
    auto rep = cade::metrics::build_report(records, decisions);
    write_text(eval_report, cade::metrics::to_json(rep).dump(2) + "\n");
    if (!eval_csv.empty()) write_text(eval_csv, cade::metrics::to_csv(rep));
    write_manifest(eval_report,
                   make_manifest("evaluate", {eval_in, eval_decisions}, {}, {}, 0));
  } else if (diagnose->parsed()) {
    auto records = mcq_subset(cade::io::read_records(diag_in));
    auto dist = cade::diagnostics::directional_distribution(
        records, cade::io::view_from_string(diag_view), diag_by_pillar);
    write_text(diag_out, cade::diagnostics::to_csv(dist, diag_by_pillar));
    write_manifest(diag_out, make_manifest("diagnose", {diag_in}, {}, {}, 0));
  } else if (perturb->parsed()) {
    auto records = mcq_subset(cade::io::read_records(pert_in));
    cade::diagnostics::PerturbationScheme scheme;
    if (pert_scheme == "reverse")
      scheme.kind = cade::diagnostics::PerturbationKind::ReverseOrder;
    else if (pert_scheme == "random")
      scheme.kind = cade::diagnostics::PerturbationKind::RandomOrder;
    else if (pert_scheme == "lowercase")
      scheme.kind = cade::diagnostics::PerturbationKind::LowercaseToken;
    else
      scheme.kind = cade::diagnostics::PerturbationKind::NumericToken;
    scheme.seed = pert_seed;
    auto rows = cade::diagnostics::perturbation_report(
        records, {scheme}, {}, {}, cade::io::view_from_string(pert_view));
    write_text(pert_out, cade::diagnostics::to_csv(rows));
    write_manifest(pert_out, make_manifest("perturb", {pert_in}, {}, {}, pert_seed));
  } else if (tune->parsed()) {
    auto cfg = tune_engine_opts.config();
    auto records = cade::io::read_records(tune_in);
    auto wanted = tune_task == "mcq" ? cade::Task::Mcq : cade::Task::Regression;
    std::erase_if(records, [&](const cade::QuestionRecord& r) { return r.task != wanted; });
    if (records.empty()) throw cade::InvalidInput("no " + tune_task + " records in input");
    auto ranges = tune_task == "mcq" ? cade::tuner::SearchRanges::mcq()
                                     : cade::tuner::SearchRanges::regression();
    auto objective = tune_task == "mcq" ? cade::tuner::Objective::MaxAccuracy
                                        : cade::tuner::Objective::MinMae;
    auto trace = cade::tuner::random_search(records, ranges, tune_samples, tune_subset, tune_top_k,
                                            tune_seed, cfg, objective);
    write_text(tune_out, cade::tuner::trace_to_jsonl(trace));
    write_text(tune_out + ".summary.json", cade::tuner::trace_summary(trace).dump(2) + "\n");
    write_manifest(tune_out, make_manifest("tune", {tune_in}, cfg, trace.best, tune_seed));
  } else if (generate->parsed()) {
    json spec_json;
    try {
      spec_json = json::parse(cade::io::read_file_bytes(gen_spec));
    } catch (const json::exception& e) {
      throw cade::ParseError(gen_spec + ": " + std::string(e.what()));
    }
    auto spec = cade::synthgen::spec_from_json(spec_json);
    if (gen_seed_set) spec.seed = gen_seed;
    auto records = cade::synthgen::generate(spec);
    cade::io::write_records(gen_out, records);
    write_manifest(gen_out, make_manifest("generate", {gen_spec}, {}, {}, spec.seed));
  } else if (report->parsed()) {
    std::vector<fs::path> files;
    if (!fs::is_directory(rep_runs)) throw cade::IoError(rep_runs + " is not a directory");
    for (const auto& entry : fs::directory_iterator(rep_runs))
      if (entry.is_regular_file() && entry.path().extension() == ".json" &&
          entry.path().string().find(".manifest.json") == std::string::npos)
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::ostringstream csv;
    csv << "run,total,mcq_count,regression_count,overall_accuracy,mae,interval_accuracy\n";
    for (const auto& f : files) {
      json j;
      try {
        j = json::parse(cade::io::read_file_bytes(f.string()));
      } catch (const json::exception&) {
        continue;  // not a report
      }
      if (!j.contains("total")) continue;
      auto field = [&j](const char* key) -> std::string {
        return j.contains(key) ? j[key].dump() : "";
      };
      csv << f.filename().string() << "," << field("total") << "," << field("mcq_count") << ","
          << field("regression_count") << "," << field("overall_accuracy") << "," << field("mae")
          << "," << field("interval_accuracy") << "\n";
    }
    write_text(rep_out, csv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const cade::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
