#include "latdec/harness.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "latdec/bridge.hpp"
#include "latdec/builtin_models.hpp"
#include "latdec/error.hpp"
#include "latdec/lattice_io.hpp"
#include "latdec/paths.hpp"
#include "latdec/rng.hpp"

namespace latdec {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<MetricChoice> parse_metric_choice(std::string_view name) {
  if (name == "auto") return MetricChoice::automatic;
  if (name == "rouge") return MetricChoice::rouge;
  if (name == "bleu") return MetricChoice::bleu;
  if (name == "none") return MetricChoice::none;
  return std::nullopt;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

std::string padded(std::size_t index) {
  std::ostringstream os;
  os << std::setw(4) << std::setfill('0') << index;
  return os.str();
}

std::optional<MatchMetric> resolve_metric(const RunSpec& spec) {
  switch (spec.metric) {
    case MetricChoice::none: return std::nullopt;
    case MetricChoice::rouge: return MatchMetric::rouge;
    case MetricChoice::bleu: return MatchMetric::bleu;
    case MetricChoice::automatic:
      if (spec.refs_path.empty()) return std::nullopt;
      return spec.profile == TaskProfile::translation ? MatchMetric::bleu : MatchMetric::rouge;
  }
  return std::nullopt;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

// ---- models ------------------------------------------------------------------

ModelSource ModelSource::open(const ModelSpec& spec, std::size_t top_k) {
  ModelSource src;
  src.spec_ = spec;
  src.top_k_ = top_k;
  if (!spec.table_path.empty()) {
    src.primary_ = std::make_shared<TableModel>(TableModel::from_json(read_file(spec.table_path)));
  } else if (!spec.corpus_path.empty()) {
    std::ifstream in(spec.corpus_path);
    if (!in) throw ConfigError("cannot open corpus '" + spec.corpus_path + "'");
    src.primary_ = std::make_shared<MarkovModel>(MarkovModel::train(in, spec.order, spec.smoothing));
  } else if (!spec.bridge_cmd.empty()) {
    src.primary_ = BridgeModel::launch(spec.bridge_cmd, top_k);
  } else {
    throw ConfigError("no model given: use --model, --corpus or --bridge-cmd");
  }
  return src;
}

std::shared_ptr<const ScoringModel> ModelSource::acquire() const {
  if (spec_.bridge_cmd.empty()) return primary_;
  return BridgeModel::launch(spec_.bridge_cmd, top_k_);
}

// ---- run spec ------------------------------------------------------------------

void validate_run_spec(const RunSpec& spec) {
  const auto& m = spec.model;
  const int given = !m.table_path.empty() + !m.corpus_path.empty() + !m.bridge_cmd.empty();
  if (given != 1) throw ConfigError("give exactly one of --model, --corpus, --bridge-cmd");
  if (spec.input_path.empty()) throw ConfigError("no input file");
  if (!fs::exists(spec.input_path)) throw ConfigError("input file '" + spec.input_path + "' does not exist");
  if (spec.jobs == 0) throw ConfigError("jobs must be positive");
  if (!(spec.budget_multiplier > 0.0)) throw ConfigError("budget multiplier must be positive");

  const bool wants_refs = spec.metric == MetricChoice::rouge || spec.metric == MetricChoice::bleu;
  if (wants_refs && spec.refs_path.empty()) throw ConfigError("reference metrics requested but --refs not given");
  if (!spec.refs_path.empty() && spec.metric != MetricChoice::none) {
    if (!fs::exists(spec.refs_path)) throw ConfigError("reference file '" + spec.refs_path + "' does not exist");
    const auto inputs = read_lines(spec.input_path).size();
    const auto refs = read_lines(spec.refs_path).size();
    if (inputs != refs)
      throw ConfigError("reference file has " + std::to_string(refs) + " lines but input has " +
                        std::to_string(inputs));
  }

  // Check the algorithm-level settings once with a representative length.
  SearchConfig probe = resolve_search(spec, 1, 0);
  probe.validate();
}

SearchConfig resolve_search(const RunSpec& spec, std::size_t source_length, std::size_t example) {
  SearchConfig c = spec.search;
  if (c.max_len == 0) {
    // Translation-style runs decode up to twice the source length.
    c.max_len = spec.profile == TaskProfile::translation ? std::max<std::size_t>(1, 2 * source_length) : 32;
  }
  const auto eb = effective_budget(spec.profile, spec.search.beam_size, c.max_len, spec.budget_multiplier);
  if (c.algorithm != Algorithm::bfs) c.beam_size = eb.beam_size;
  if (c.budget == 0) c.budget = c.algorithm == Algorithm::bfs ? eb.budget : c.beam_size * c.max_len;
  c.seed = derive_seed(spec.seed, example, SeedPurpose::search);
  return c;
}

json run_spec_to_json(const RunSpec& spec) {
  const auto& s = spec.search;
  json model;
  if (!spec.model.table_path.empty()) model = {{"table", spec.model.table_path}};
  if (!spec.model.corpus_path.empty())
    model = {{"corpus", spec.model.corpus_path}, {"order", spec.model.order}, {"smoothing", spec.model.smoothing}};
  if (!spec.model.bridge_cmd.empty()) model = {{"bridge", spec.model.bridge_cmd}};
  static const char* metric_names[] = {"auto", "rouge", "bleu", "none"};
  return {{"model", model},
          {"input", spec.input_path},
          {"refs", spec.refs_path},
          {"algo", std::string(to_string(s.algorithm))},
          {"recomb", std::string(to_string(s.recomb.strategy))},
          {"suffix_n", s.recomb.suffix_n},
          {"alpha", s.recomb.alpha},
          {"k", s.beam_size},
          {"budget", s.budget},
          {"top_k", s.top_k},
          {"lambda", s.length_reward},
          {"p", s.nucleus_p},
          {"tau", s.temperature},
          {"groups", s.groups},
          {"div_strength", s.diversity_strength},
          {"max_len", s.max_len},
          {"profile", std::string(to_string(spec.profile))},
          {"budget_multiplier", spec.budget_multiplier},
          {"metric", metric_names[static_cast<int>(spec.metric)]},
          {"seed", spec.seed}};
}

std::string config_hash(const RunSpec& spec) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(run_spec_to_json(spec).dump());
  return os.str();
}

// ---- running ---------------------------------------------------------------------

RunOutcome run_examples(const RunSpec& spec) {
  validate_run_spec(spec);
  RunOutcome outcome;
  outcome.metric = resolve_metric(spec);
  outcome.config = run_spec_to_json(spec);
  outcome.config_hash = config_hash(spec);

  const auto inputs = read_lines(spec.input_path);
  std::vector<std::string> refs;
  if (outcome.metric) refs = read_lines(spec.refs_path);

  const ModelSource models = ModelSource::open(spec.model, spec.search.top_k);
  const Vocabulary& vocab = models.primary().vocabulary();
  outcome.examples.resize(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    outcome.examples[i].index = i;
    outcome.examples[i].source = vocab.encode(inputs[i]);
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&](std::size_t w) {
    std::shared_ptr<const ScoringModel> model;
    try {
      model = w == 0 ? std::shared_ptr<const ScoringModel>(std::shared_ptr<void>(), &models.primary())
                     : models.acquire();
    } catch (const std::exception& e) {
      spdlog::error("worker {}: {}", w, e.what());
      model = nullptr;
    }
    for (std::size_t i = next++; i < inputs.size(); i = next++) {
      auto& ex = outcome.examples[i];
      try {
        if (!model) throw ModelError("model unavailable for this worker", "");
        const SearchConfig config = resolve_search(spec, ex.source.size(), i);
        spdlog::debug("example {}: {} k={} budget={} T={}", i, to_string(config.algorithm), config.beam_size,
                      config.budget, config.max_len);
        ex.result = decode(*model, ex.source, config);
        ReportOptions ro;
        ro.root_seed = spec.seed;
        ro.example = i;
        std::vector<TokenId> reference;
        if (outcome.metric) {
          ro.metric = *outcome.metric;
          reference = vocab.encode(refs[i]);
          if (reference.empty()) throw ConfigError("reference line " + std::to_string(i + 1) + " is empty");
        }
        ex.report = make_report(*ex.result, reference, ro);
        spdlog::info("example {}: {} paths, {} expansions", i, ex.report->path_count, ex.report->expanded);
      } catch (const std::exception& e) {
        ex.error = e.what();
        spdlog::error("example {}: {}", i, e.what());
      }
    }
  };
  const std::size_t jobs = std::min(spec.jobs, std::max<std::size_t>(inputs.size(), 1));
  if (jobs <= 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
  }
  return outcome;
}

namespace {

std::vector<DecodeReport> collect_reports(const RunOutcome& outcome) {
  std::vector<DecodeReport> reports;
  for (const auto& ex : outcome.examples)
    if (ex.report) reports.push_back(*ex.report);
  return reports;
}

std::size_t failures(const RunOutcome& outcome) {
  std::size_t n = 0;
  for (const auto& ex : outcome.examples) n += !ex.error.empty();
  return n;
}

}  // namespace

int cmd_decode(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  RunOutcome outcome;
  try {
    outcome = run_examples(spec);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    std::optional<fs::path> dir;
    if (!spec.out_dir.empty()) {
      dir = fs::path(spec.out_dir);
      fs::create_directories(*dir);
    }
    std::vector<std::pair<std::string, json>> rows;
    json per_example = json::array();
    for (const auto& ex : outcome.examples) {
      const std::string stem = padded(ex.index);
      if (!ex.error.empty()) {
        err << "example " << ex.index << ": " << ex.error << '\n';
        per_example.push_back({{"index", ex.index}, {"error", ex.error}});
        continue;
      }
      const json report = report_to_json(*ex.report);
      rows.emplace_back(stem, report);
      per_example.push_back({{"index", ex.index}, {"report", report}});
      if (!dir) continue;
      write_file(*dir / (stem + ".lattice.json"), lattice_to_json(ex.result->lattice, 1) + "\n");
      write_file(*dir / (stem + ".dot"), lattice_to_dot(ex.result->lattice));
      write_file(*dir / (stem + ".report.json"), report.dump(1) + "\n");
      if (spec.search.recomb.enabled())
        write_file(*dir / (stem + ".merges.jsonl"), merge_events_to_jsonl(ex.result->merges));
    }
    const auto reports = collect_reports(outcome);
    const json aggregate = aggregate_reports(reports);
    rows.emplace_back("mean", aggregate);
    out << format_report_table(rows);
    if (dir) {
      const json summary = {{"config", outcome.config},
                            {"config_hash", outcome.config_hash},
                            {"aggregate", aggregate},
                            {"examples", per_example}};
      write_file(*dir / ("summary-" + outcome.config_hash + ".json"), summary.dump(1) + "\n");
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return failures(outcome) == 0 ? 0 : 1;
}

// ---- sweeps -------------------------------------------------------------------------

void apply_axis(RunSpec& spec, const std::string& axis, const std::string& value) {
  auto& s = spec.search;
  const auto as_size = [&]() -> std::size_t {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(value, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != value.size() || v < 0) throw ConfigError("axis '" + axis + "': bad integer '" + value + "'");
    return static_cast<std::size_t>(v);
  };
  const auto as_double = [&]() {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(value, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != value.size()) throw ConfigError("axis '" + axis + "': bad number '" + value + "'");
    return v;
  };
  if (axis == "k") s.beam_size = as_size();
  else if (axis == "budget") s.budget = as_size();
  else if (axis == "top-k") s.top_k = as_size();
  else if (axis == "lambda") s.length_reward = as_double();
  else if (axis == "p") s.nucleus_p = as_double();
  else if (axis == "tau") s.temperature = as_double();
  else if (axis == "groups") s.groups = as_size();
  else if (axis == "div-strength") s.diversity_strength = as_double();
  else if (axis == "max-len") s.max_len = as_size();
  else if (axis == "suffix-n") s.recomb.suffix_n = as_size();
  else if (axis == "alpha") s.recomb.alpha = as_size();
  else if (axis == "seed") spec.seed = as_size();
  else if (axis == "order") spec.model.order = static_cast<int>(as_size());
  else if (axis == "algo") {
    const auto a = parse_algorithm(value);
    if (!a) throw ConfigError("unknown algorithm '" + value + "'");
    s.algorithm = *a;
  } else if (axis == "recomb") {
    const auto r = parse_recomb_strategy(value);
    if (!r) throw ConfigError("unknown recombination '" + value + "'");
    s.recomb.strategy = *r;
  } else if (axis == "profile") {
    const auto p = parse_task_profile(value);
    if (!p) throw ConfigError("unknown profile '" + value + "'");
    spec.profile = *p;
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "'");
  }
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> report_columns(std::optional<MatchMetric> metric) {
  std::vector<std::string> cols = {"algorithm", "path_count", "novel_unigrams", "novel_bigrams", "self_bleu",
                                   "mean_edit_distance"};
  if (metric) {
    const std::vector<std::string> names =
        *metric == MatchMetric::bleu ? std::vector<std::string>{"bleu"}
                                     : std::vector<std::string>{"rouge1", "rouge2", "rougeL"};
    for (const auto& n : names) cols.push_back("oracle_match." + n);
    for (const auto& n : names) cols.push_back("sample_match." + n);
  }
  for (const char* c : {"expanded", "budget_spent", "pruned_ratio", "merges", "truncated"}) cols.emplace_back(c);
  return cols;
}

std::string json_cell(const json& j, const std::string& col) {
  const auto dot = col.find('.');
  const json* v = nullptr;
  if (dot == std::string::npos) {
    if (j.contains(col)) v = &j[col];
  } else {
    const auto outer = col.substr(0, dot), inner = col.substr(dot + 1);
    if (j.contains(outer) && j[outer].contains(inner)) v = &j[outer][inner];
  }
  if (!v || v->is_null()) return "";
  if (v->is_string()) return v->get<std::string>();
  return v->dump();
}

}  // namespace

int cmd_sweep(const SweepSpec& sweep, std::ostream& out, std::ostream& err) {
  if (sweep.values.empty()) {
    err << "error: sweep needs at least one value\n";
    return 2;
  }
  std::vector<RunSpec> specs;
  try {
    for (const auto& v : sweep.values) {
      RunSpec s = sweep.base;
      apply_axis(s, sweep.axis, v);
      specs.push_back(std::move(s));
    }
    validate_run_spec(specs.front());
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  const auto metric = resolve_metric(specs.front());
  const auto columns = report_columns(metric);
  std::ostringstream csv;
  csv << "axis,value,example,config_hash";
  for (const auto& c : columns) csv << ',' << c;
  csv << ",error\n";

  std::vector<std::pair<std::string, json>> rows;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const std::string& value = sweep.values[i];
    const std::string prefix = csv_escape(sweep.axis) + "," + csv_escape(value) + ",";
    RunOutcome outcome;
    try {
      outcome = run_examples(specs[i]);
    } catch (const Error& e) {
      ++failed;
      csv << prefix << "all," << config_hash(specs[i]);
      for (std::size_t c = 0; c < columns.size(); ++c) csv << ',';
      csv << ',' << csv_escape(e.what()) << '\n';
      err << sweep.axis << "=" << value << ": " << e.what() << '\n';
      continue;
    }
    for (const auto& ex : outcome.examples) {
      csv << prefix << ex.index << ',' << outcome.config_hash;
      const json j = ex.report ? report_to_json(*ex.report) : json::object();
      for (const auto& c : columns) csv << ',' << csv_escape(json_cell(j, c));
      csv << ',' << csv_escape(ex.error) << '\n';
      failed += !ex.error.empty();
    }
    const json agg = aggregate_reports(collect_reports(outcome));
    csv << prefix << "mean," << outcome.config_hash;
    for (const auto& c : columns) csv << ',' << csv_escape(json_cell(agg, c));
    csv << ",\n";
    rows.emplace_back(sweep.axis + "=" + value, agg);
  }

  if (sweep.base.out_dir.empty()) {
    out << csv.str();
  } else {
    try {
      fs::create_directories(sweep.base.out_dir);
      write_file(fs::path(sweep.base.out_dir) / "sweep.csv", csv.str());
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return 2;
    }
    out << format_report_table(rows);
  }
  return failed == 0 ? 0 : 1;
}

// ---- merge validation ------------------------------------------------------------------

int cmd_validate_merges(const RunSpec& spec, const std::vector<std::size_t>& horizons, std::ostream& out,
                        std::ostream& err) {
  if (horizons.empty()) {
    err << "error: no horizons given\n";
    return 2;
  }
  RunSpec quiet = spec;
  quiet.metric = MetricChoice::none;
  RunOutcome outcome;
  std::optional<ModelSource> models;
  try {
    outcome = run_examples(quiet);
    models = ModelSource::open(spec.model, spec.search.top_k);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  std::size_t events = 0;
  std::vector<double> matched(horizons.size(), 0.0);
  try {
    for (const auto& ex : outcome.examples) {
      if (!ex.result) continue;
      const auto accepted = static_cast<std::size_t>(std::count_if(
          ex.result->merges.begin(), ex.result->merges.end(), [](const MergeEvent& e) { return e.accepted; }));
      if (accepted == 0) continue;
      events += accepted;
      for (std::size_t h = 0; h < horizons.size(); ++h) {
        const auto em = validate_merges(models->primary(), ex.result->merges, horizons[h], ex.source);
        matched[h] += *em * static_cast<double>(accepted);
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  json table = json::array();
  out << std::left << std::setw(8) << "n" << std::setw(8) << "L" << std::setw(10) << "events" << "exact_match\n";
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    json row = {{"suffix_n", spec.search.recomb.suffix_n}, {"horizon", horizons[h]}, {"events", events}};
    out << std::left << std::setw(8) << spec.search.recomb.suffix_n << std::setw(8) << horizons[h] << std::setw(10)
        << events;
    if (events > 0) {
      const double em = matched[h] / static_cast<double>(events);
      row["exact_match"] = em;
      out << std::fixed << std::setprecision(4) << em << '\n';
    } else {
      row["exact_match"] = nullptr;
      out << "-\n";
    }
    table.push_back(row);
  }
  if (!spec.out_dir.empty()) {
    try {
      fs::create_directories(spec.out_dir);
      write_file(fs::path(spec.out_dir) / ("merge-validation-" + config_hash(spec) + ".json"),
                 json{{"config", run_spec_to_json(spec)}, {"rows", table}}.dump(1) + "\n");
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return 2;
    }
  }
  for (const auto& ex : outcome.examples)
    if (!ex.error.empty()) err << "example " << ex.index << ": " << ex.error << '\n';
  return failures(outcome) == 0 ? 0 : 1;
}

void init_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_logger_mt("latdec");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("LATTICE_LOG")) {
      const auto level = spdlog::level::from_str(env);
      if (level == spdlog::level::off && std::string_view(env) != "off")
        spdlog::warn("LATTICE_LOG='{}' is not a log level; keeping 'warn'", env);
      else
        spdlog::set_level(level);
    }
  });
}

}  // namespace latdec
