#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "battdiag/attribution.hpp"
#include "battdiag/error.hpp"
#include "battdiag/feature_table.hpp"
#include "battdiag/io.hpp"
#include "battdiag/knowledge.hpp"
#include "battdiag/parallel.hpp"
#include "battdiag/split.hpp"
#include "battdiag/synth.hpp"

namespace battdiag::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      fs::remove(tmp);
      throw ConfigError("write failed for '" + path.string() + "'");
    }
  }
  fs::rename(tmp, path);
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

namespace {

std::string read_text(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + std::string(what) + " '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::exists(path)) {
    throw ConfigError(std::string(what) + " not found: '" + path.string() + "'");
  }
}

// Records the active stage and the artifacts written so far.
struct RunContext {
  std::string stage = "setup";
  std::vector<fs::path> artifacts;
  std::vector<fs::path> directories;
  std::map<std::string, std::string> hashes;

  void write(const fs::path& path, const std::string& content) {
    write_file_atomic(path, content);
    artifacts.push_back(path);
    hashes[path.filename().string()] = sha256_hex(content);
  }

  void remove_partial() noexcept {
    std::error_code ec;
    for (const auto& p : artifacts) fs::remove(p, ec);
    for (const auto& d : directories) fs::remove_all(d, ec);
  }
};

std::string feature_csv(const std::vector<FeatureRow>& rows) {
  std::ostringstream out;
  write_feature_csv(out, rows);
  return out.str();
}

// ---- split -----------------------------------------------------------------

std::string split_to_json(const SplitAssignment& split, double fraction, std::uint64_t seed) {
  ordered_json doc;
  doc["seed"] = seed;
  doc["validation_fraction"] = fraction;
  doc["train"] = split.train_vehicles;
  doc["validation"] = split.validation_vehicles;
  return doc.dump(2) + '\n';
}

SplitAssignment split_from_json(const fs::path& path) {
  try {
    const json doc = json::parse(read_text(path, "split file"));
    SplitAssignment split;
    split.train_vehicles = doc.at("train").get<std::set<std::string>>();
    split.validation_vehicles = doc.at("validation").get<std::set<std::string>>();
    return split;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

SplitAssignment make_split(const std::map<std::string, Label>& labels, double fraction,
                           std::uint64_t seed) {
  FleetDataset labels_only;
  labels_only.vehicle_labels = labels;
  return partition_by_vehicle(labels_only, fraction, seed);
}

// ---- features / model helpers ---------------------------------------------

std::vector<FeatureRow> filter_rows(const std::vector<FeatureRow>& rows,
                                    const std::set<std::string>& vehicles) {
  std::vector<FeatureRow> out;
  for (const auto& r : rows) {
    if (vehicles.count(r.vehicle_id)) out.push_back(r);
  }
  return out;
}

TreeEnsemble fit(const std::vector<FeatureRow>& rows, const TrainConfig& config) {
  std::vector<LabeledFeatures> data;
  data.reserve(rows.size());
  for (const auto& r : rows) {
    if (!r.label) {
      throw ValidationError("training rows are labeled",
                            r.vehicle_id + "#" + std::to_string(r.segment_index));
    }
    data.push_back({r.x, *r.label});
  }
  return train(data, config);
}

std::vector<FeatureVector> background_of(const std::vector<FeatureRow>& rows) {
  std::vector<FeatureVector> xs;
  xs.reserve(rows.size());
  for (const auto& r : rows) xs.push_back(r.x);
  return subsample_background(xs);
}

std::string attributions_jsonl(const TreeEnsemble& model, const std::vector<FeatureRow>& rows,
                               const std::vector<FeatureVector>& background, std::size_t k,
                               unsigned jobs) {
  std::vector<std::string> lines(rows.size());
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    const Attribution a = select_top_k(tree_shap(model, rows[i].x, background), k);
    ordered_json top = ordered_json::array();
    for (const auto& c : a.top_k) {
      top.push_back({{"feature", std::string(symbol(c.feature))}, {"phi", c.phi}, {"weight", c.weight}});
    }
    ordered_json doc;
    doc["vehicle_id"] = rows[i].vehicle_id;
    doc["segment_index"] = rows[i].segment_index;
    doc["margin"] = predict_margin(model, rows[i].x);
    doc["base_value"] = a.base_value;
    doc["phi"] = a.phi;
    doc["weights"] = a.weights;
    doc["top_k"] = std::move(top);
    lines[i] = doc.dump();
  });
  std::string out;
  for (const auto& l : lines) out += l + '\n';
  return out;
}

std::unique_ptr<ReasoningProvider> make_provider(const PipelineConfig& cfg, const KnowledgeBase& kb) {
  if (cfg.provider == ProviderKind::Http) return std::make_unique<HttpProvider>(cfg.http);
  return std::make_unique<MockProvider>(kb, cfg.gate_margin, cfg.threshold);
}

KnowledgeBase knowledge_for(const PipelineConfig& cfg) {
  if (!cfg.kb_path) return default_knowledge_base();
  require_file(*cfg.kb_path, "knowledge base");
  return load_knowledge(*cfg.kb_path);
}

std::string reports_jsonl(const std::vector<DiagnosisReport>& reports) {
  std::string out;
  for (const auto& r : reports) out += report_to_json(r) + '\n';
  return out;
}

std::vector<DiagnosisReport> diagnose_rows(const TreeEnsemble& model,
                                           const std::vector<FeatureRow>& rows,
                                           const std::vector<FeatureVector>& background,
                                           const PipelineConfig& cfg) {
  const KnowledgeBase kb = knowledge_for(cfg);
  const auto provider = make_provider(cfg, kb);
  const DiagnoseConfig dcfg{cfg.gate_margin, cfg.gate_measure, cfg.threshold, cfg.top_k};
  std::vector<DiagnosisReport> reports(rows.size());
  // One provider request per worker: `jobs` bounds requests in flight.
  parallel_for(rows.size(), cfg.jobs, [&](std::size_t i) {
    DiagnosisReport r = diagnose(rows[i].x, model, background, kb, *provider, dcfg);
    r.vehicle_id = rows[i].vehicle_id;
    r.segment_index = rows[i].segment_index;
    reports[i] = std::move(r);
  });
  return reports;
}

std::vector<DiagnosisReport> read_reports(const fs::path& path) {
  std::istringstream in(read_text(path, "reports file"));
  std::vector<DiagnosisReport> reports;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) reports.push_back(report_from_json(line));
  }
  return reports;
}

ordered_json config_json(const PipelineConfig& c) {
  ordered_json doc;
  doc["gate_margin"] = c.gate_margin;
  doc["gate_measure"] = c.gate_measure == ConfidenceMeasure::BoundaryDistance ? "margin" : "tail";
  doc["top_k"] = c.top_k;
  doc["threshold"] = c.threshold;
  doc["validation_fraction"] = c.validation_fraction;
  doc["seed"] = c.seed;
  doc["provider"] = c.provider == ProviderKind::Mock ? "mock" : "http";
  if (c.provider == ProviderKind::Http) {
    doc["provider_url"] = c.http.url;
    doc["provider_model"] = c.http.model;
  }
  doc["voltage_eps"] = c.phase.voltage_eps;
  doc["current_drop"] = c.phase.current_drop;
  doc["train"] = {{"n_trees", c.train.n_trees},
                  {"learning_rate", c.train.learning_rate},
                  {"max_leaves", c.train.max_leaves},
                  {"min_samples_leaf", c.train.min_samples_leaf},
                  {"l2_leaf_penalty", c.train.l2_leaf_penalty},
                  {"max_depth", c.train.max_depth},
                  {"row_subsample", c.train.row_subsample}};
  doc["evaluate"] = {{"level", c.evaluate.level == EvaluationLevel::Vehicle ? "vehicle" : "segment"},
                     {"p", c.evaluate.cost.prevalence},
                     {"c_f", c.evaluate.cost.missed_fault_cost},
                     {"c_r", c.evaluate.cost.inspection_cost}};
  if (c.kb_path) doc["kb"] = c.kb_path->string();
  return doc;
}

// ---- option wiring ---------------------------------------------------------

void add_jobs(CLI::App* sub, PipelineConfig& cfg) {
  sub->add_option("--jobs", cfg.jobs, "Worker threads for parallel stages")
      ->capture_default_str()
      ->check(CLI::Range(1U, 1024U));
}

void add_phase_options(CLI::App* sub, PipelineConfig& cfg) {
  sub->add_option("--voltage-eps", cfg.phase.voltage_eps,
                  "CV detection: volts below the peak max-cell voltage")
      ->capture_default_str();
  sub->add_option("--current-drop", cfg.phase.current_drop,
                  "CV detection: fractional drop from the plateau current")
      ->capture_default_str();
}

void add_train_options(CLI::App* sub, PipelineConfig& cfg) {
  sub->add_option("--n-trees", cfg.train.n_trees, "Boosting rounds (library default)")
      ->capture_default_str();
  sub->add_option("--learning-rate", cfg.train.learning_rate, "Shrinkage (library default)")
      ->capture_default_str();
  sub->add_option("--max-leaves", cfg.train.max_leaves, "Leaves per tree (library default)")
      ->capture_default_str();
  sub->add_option("--min-samples-leaf", cfg.train.min_samples_leaf,
                  "Minimum rows per leaf (library default)")
      ->capture_default_str();
  sub->add_option("--l2", cfg.train.l2_leaf_penalty, "L2 leaf penalty (library default)")
      ->capture_default_str();
  sub->add_option("--max-depth", cfg.train.max_depth, "Maximum tree depth")->capture_default_str();
  sub->add_option("--row-subsample", cfg.train.row_subsample,
                  "Fraction of rows drawn per tree (1 = no bagging)")
      ->capture_default_str();
}

void add_reasoning_options(CLI::App* sub, PipelineConfig& cfg, std::string& provider,
                           std::string& measure, int& timeout_s) {
  sub->add_option("--provider", provider, "Reasoning provider: mock (offline rubric) or http")
      ->capture_default_str()
      ->check(CLI::IsMember({"mock", "http"}));
  sub->add_option("--provider-url", cfg.http.url, "HTTP completion endpoint")->capture_default_str();
  sub->add_option("--provider-model", cfg.http.model, "Model name sent to the endpoint")
      ->capture_default_str();
  sub->add_option("--provider-token-env", cfg.http.auth_token_env,
                  "Environment variable holding the bearer token")
      ->capture_default_str();
  sub->add_option("--provider-timeout", timeout_s, "Provider timeout in seconds")
      ->capture_default_str();
  sub->add_option("--kb", cfg.kb_path, "Knowledge base JSON overriding the bundled one");
  sub->add_option("--gate-margin", cfg.gate_margin,
                  "Refinement gate: escalate when |p - 0.5| is below this")
      ->capture_default_str();
  sub->add_option("--gate-measure", measure,
                  "Confidence measure: margin = |p - 0.5|, tail = min(p, 1 - p) >= gate")
      ->capture_default_str()
      ->check(CLI::IsMember({"margin", "tail"}));
  sub->add_option("--top-k", cfg.top_k, "Attributions passed to the reasoner")
      ->capture_default_str()
      ->check(CLI::Range(1, static_cast<int>(kNumFeatures)));
  sub->add_option("--threshold", cfg.threshold, "Decision threshold on P(Abnormal)")
      ->capture_default_str();
}

void add_cost_options(CLI::App* sub, PipelineConfig& cfg, bool& per_segment) {
  sub->add_option("--cost-p", cfg.evaluate.cost.prevalence,
                  "Fault prevalence p among vehicles")
      ->capture_default_str();
  sub->add_option("--cost-cf", cfg.evaluate.cost.missed_fault_cost,
                  "Cost of an undetected fault (CNY)")
      ->capture_default_str();
  sub->add_option("--cost-cr", cfg.evaluate.cost.inspection_cost,
                  "Inspection cost per flagged vehicle (CNY)")
      ->capture_default_str();
  sub->add_flag("--per-segment", per_segment,
                "Score segments individually instead of max-per-vehicle");
}

void finish_reasoning(PipelineConfig& cfg, const std::string& provider, const std::string& measure,
                      int timeout_s, bool per_segment) {
  cfg.provider = provider == "http" ? ProviderKind::Http : ProviderKind::Mock;
  cfg.gate_measure =
      measure == "tail" ? ConfidenceMeasure::TailMass : ConfidenceMeasure::BoundaryDistance;
  cfg.http.timeout = std::chrono::seconds(timeout_s);
  cfg.evaluate.level = per_segment ? EvaluationLevel::Segment : EvaluationLevel::Vehicle;
  cfg.evaluate.threshold = cfg.threshold;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"battdiag: physics-informed battery fault diagnosis pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "battdiag 0.1.0");

  PipelineConfig cfg;
  fs::path spec_path, in_dir, out_path, features_path, model_path, split_path, reports_path,
      truth_path;
  std::string provider = "mock", measure = "margin";
  int timeout_s = 60;
  bool per_segment = false;

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic labeled fleet");
  simulate->add_option("--spec", spec_path, "Fleet spec JSON")->required();
  simulate->add_option("--out", out_path, "Output directory for segment CSVs + manifest")->required();

  auto* features = app.add_subcommand("features", "Extract the ten mechanism features per segment");
  features->add_option("--in", in_dir, "Segment directory or manifest")->required();
  features->add_option("--out", out_path, "features.csv")->required();
  add_phase_options(features, cfg);
  add_jobs(features, cfg);

  auto* split = app.add_subcommand("split", "Stratified vehicle-level train/validation split");
  split->add_option("--truth", truth_path, "Manifest with vehicle labels")->required();
  split->add_option("--fraction", cfg.validation_fraction, "Validation fraction of vehicles")
      ->capture_default_str();
  split->add_option("--seed", cfg.seed, "Shuffle seed")->capture_default_str();
  split->add_option("--out", out_path, "split.json")->required();

  auto* train_cmd = app.add_subcommand("train", "Fit the gradient-boosted detector");
  train_cmd->add_option("--features", features_path, "features.csv")->required();
  train_cmd->add_option("--out", out_path, "model.json")->required();
  train_cmd->add_option("--split", split_path, "Train only on the split's training vehicles");
  train_cmd->add_option("--seed", cfg.train.seed, "Bagging seed")->capture_default_str();
  add_train_options(train_cmd, cfg);

  auto* attribute = app.add_subcommand("attribute", "Shapley attributions per segment");
  attribute->add_option("--model", model_path, "model.json")->required();
  attribute->add_option("--features", features_path, "features.csv")->required();
  attribute->add_option("--out", out_path, "attributions.jsonl")->required();
  attribute->add_option("--split", split_path,
                        "Background = training vehicles, explain validation vehicles");
  attribute->add_option("--top-k", cfg.top_k, "Top contributors kept")
      ->capture_default_str()
      ->check(CLI::Range(1, static_cast<int>(kNumFeatures)));
  add_jobs(attribute, cfg);

  auto* diagnose_cmd = app.add_subcommand("diagnose", "Diagnosis reports (JSON Lines)");
  diagnose_cmd->add_option("--model", model_path, "model.json")->required();
  diagnose_cmd->add_option("--features", features_path, "features.csv")->required();
  diagnose_cmd->add_option("--out", out_path, "reports.jsonl")->required();
  diagnose_cmd->add_option("--split", split_path,
                           "Background = training vehicles, diagnose validation vehicles");
  add_reasoning_options(diagnose_cmd, cfg, provider, measure, timeout_s);
  add_jobs(diagnose_cmd, cfg);

  auto* evaluate = app.add_subcommand("evaluate", "AUROC, average direct cost and outcome tallies");
  evaluate->add_option("--reports", reports_path, "reports.jsonl")->required();
  evaluate->add_option("--truth", truth_path, "Manifest with vehicle labels")->required();
  evaluate->add_option("--out", out_path, "Write the summary here as well as stdout");
  evaluate->add_option("--threshold", cfg.threshold, "Detector-only decision threshold")
      ->capture_default_str();
  add_cost_options(evaluate, cfg, per_segment);

  auto* run = app.add_subcommand("run", "simulate -> features -> split -> train -> attribute -> "
                                        "diagnose -> evaluate");
  run->add_option("--spec", spec_path, "Fleet spec JSON")->required();
  run->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
  run->add_option("--validation-fraction", cfg.validation_fraction,
                  "Validation fraction of vehicles")
      ->capture_default_str();
  run->add_option("--seed", cfg.seed, "Split and bagging seed")->capture_default_str();
  add_phase_options(run, cfg);
  add_train_options(run, cfg);
  add_reasoning_options(run, cfg, provider, measure, timeout_s);
  add_cost_options(run, cfg, per_segment);
  add_jobs(run, cfg);
  cfg.out_dir = "battdiag_run";

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }
  finish_reasoning(cfg, provider, measure, timeout_s, per_segment);

  RunContext ctx;
  try {
    if (*simulate) {
      ctx.stage = "simulate";
      const FleetSpec spec = fleet_spec_from_json(read_text(spec_path, "fleet spec"));
      const SyntheticFleet fleet = generate_fleet(spec);
      if (!fs::exists(out_path)) ctx.directories.push_back(out_path);
      write_fleet(out_path, fleet.dataset);
      json faults = json::object();
      for (const auto& [id, f] : fleet.injected) {
        faults[id] = f ? json(std::string(code(*f))) : json(nullptr);
      }
      write_file_atomic(out_path / "faults.json", faults.dump(2) + '\n');
    } else if (*features) {
      ctx.stage = "features";
      const FleetDataset data = load_segments(in_dir, cfg.jobs);
      write_file_atomic(out_path, feature_csv(extract_feature_rows(data, cfg.phase, cfg.jobs)));
    } else if (*split) {
      ctx.stage = "split";
      require_file(truth_path, "manifest");
      const auto s = make_split(load_manifest_labels(truth_path), cfg.validation_fraction, cfg.seed);
      write_file_atomic(out_path, split_to_json(s, cfg.validation_fraction, cfg.seed));
    } else if (*train_cmd) {
      ctx.stage = "train";
      require_file(features_path, "feature file");
      auto rows = read_feature_csv(features_path);
      if (!split_path.empty()) rows = filter_rows(rows, split_from_json(split_path).train_vehicles);
      save_model(out_path, fit(rows, cfg.train));
    } else if (*attribute || *diagnose_cmd) {
      ctx.stage = *attribute ? "attribute" : "diagnose";
      require_file(model_path, "model file");
      require_file(features_path, "feature file");
      const TreeEnsemble model = load_model(model_path);
      auto rows = read_feature_csv(features_path);
      auto background_rows = rows;
      if (!split_path.empty()) {
        const SplitAssignment s = split_from_json(split_path);
        background_rows = filter_rows(rows, s.train_vehicles);
        rows = filter_rows(rows, s.validation_vehicles);
      }
      const auto background = background_of(background_rows);
      if (*attribute) {
        write_file_atomic(out_path,
                          attributions_jsonl(model, rows, background, cfg.top_k, cfg.jobs));
      } else {
        write_file_atomic(out_path, reports_jsonl(diagnose_rows(model, rows, background, cfg)));
      }
    } else if (*evaluate) {
      ctx.stage = "evaluate";
      require_file(reports_path, "reports file");
      require_file(truth_path, "manifest");
      const auto summary =
          evaluate_reports(read_reports(reports_path), load_manifest_labels(truth_path), cfg.evaluate);
      const std::string text = summary_to_json(summary) + '\n';
      if (!out_path.empty()) write_file_atomic(out_path, text);
      std::cout << text;
    } else if (*run) {
      ctx.stage = "simulate";
      const FleetSpec spec = fleet_spec_from_json(read_text(spec_path, "fleet spec"));
      const fs::path data_dir = cfg.out_dir / "data";
      if (!fs::exists(cfg.out_dir)) ctx.directories.push_back(cfg.out_dir);
      if (!fs::exists(data_dir)) ctx.directories.push_back(data_dir);
      const SyntheticFleet fleet = generate_fleet(spec);
      write_fleet(data_dir, fleet.dataset);

      ctx.stage = "features";
      const FleetDataset data = load_segments(data_dir, cfg.jobs);
      const auto rows = extract_feature_rows(data, cfg.phase, cfg.jobs);
      ctx.write(cfg.out_dir / "features.csv", feature_csv(rows));

      ctx.stage = "split";
      const SplitAssignment s = make_split(data.vehicle_labels, cfg.validation_fraction, cfg.seed);
      ctx.write(cfg.out_dir / "split.json", split_to_json(s, cfg.validation_fraction, cfg.seed));
      const auto train_rows = filter_rows(rows, s.train_vehicles);
      const auto val_rows = filter_rows(rows, s.validation_vehicles);

      ctx.stage = "train";
      cfg.train.seed = cfg.seed;
      const TreeEnsemble model = fit(train_rows, cfg.train);
      ctx.write(cfg.out_dir / "model.json", model_to_json(model) + '\n');

      ctx.stage = "attribute";
      const auto background = background_of(train_rows);
      ctx.write(cfg.out_dir / "attributions.jsonl",
                attributions_jsonl(model, val_rows, background, cfg.top_k, cfg.jobs));

      ctx.stage = "diagnose";
      const auto reports = diagnose_rows(model, val_rows, background, cfg);
      ctx.write(cfg.out_dir / "reports.jsonl", reports_jsonl(reports));

      ctx.stage = "evaluate";
      const auto summary = evaluate_reports(reports, data.vehicle_labels, cfg.evaluate);
      ctx.write(cfg.out_dir / "summary.json", summary_to_json(summary) + '\n');

      ordered_json manifest;
      manifest["command"] = "run";
      manifest["fleet_spec"] = json::parse(fleet_spec_to_json(spec));
      manifest["seed"] = cfg.seed;
      manifest["config"] = config_json(cfg);
      manifest["artifacts"] = ctx.hashes;
      write_file_atomic(cfg.out_dir / "run_manifest.json", manifest.dump(2) + '\n');
      std::cout << summary_to_json(summary) << '\n';
    }
    return kOk;
  } catch (const ConfigError& e) {
    ctx.remove_partial();
    std::cerr << "battdiag: [" << ctx.stage << "] configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    ctx.remove_partial();
    std::cerr << "battdiag: [" << ctx.stage << "] data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    ctx.remove_partial();
    std::cerr << "battdiag: [" << ctx.stage << "] " << e.what() << '\n';
    return kStageFailure;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("battdiag");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace battdiag::cli
