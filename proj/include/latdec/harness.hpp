#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "latdec/metrics.hpp"
#include "latdec/search.hpp"

namespace latdec {

// Exactly one of table / corpus / bridge command.
struct ModelSpec {
  std::string table_path;
  std::string corpus_path;
  int order = 2;
  double smoothing = 0.1;
  std::string bridge_cmd;
};

enum class MetricChoice { automatic, rouge, bleu, none };
std::optional<MetricChoice> parse_metric_choice(std::string_view name);

struct RunSpec {
  ModelSpec model;
  std::string input_path;
  std::string refs_path;  // optional, one reference per input line
  SearchConfig search;    // budget 0 = derive k*T; max_len 0 = derive from profile
  TaskProfile profile = TaskProfile::custom;
  double budget_multiplier = 1.0;
  MetricChoice metric = MetricChoice::automatic;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

// Builds the models for one run. Built-in models are shared by all workers;
// a bridge is launched once per worker.
class ModelSource {
 public:
  static ModelSource open(const ModelSpec& spec, std::size_t top_k);
  std::shared_ptr<const ScoringModel> acquire() const;
  const ScoringModel& primary() const { return *primary_; }

 private:
  ModelSpec spec_;
  std::size_t top_k_ = kDefaultTopK;
  std::shared_ptr<const ScoringModel> primary_;
};

struct ExampleOutcome {
  std::size_t index = 0;
  std::optional<SearchResult> result;
  std::optional<DecodeReport> report;
  std::vector<TokenId> source;
  std::string error;
};

struct RunOutcome {
  std::vector<ExampleOutcome> examples;
  std::optional<MatchMetric> metric;
  std::string config_hash;
  nlohmann::json config;
};

// Validation that must happen before any decoding: model spec, files,
// reference alignment, metric prerequisites. Throws ConfigError.
void validate_run_spec(const RunSpec& spec);

// The per-example search configuration after profile correction.
SearchConfig resolve_search(const RunSpec& spec, std::size_t source_length, std::size_t example);

nlohmann::json run_spec_to_json(const RunSpec& spec);
std::string config_hash(const RunSpec& spec);

// Decodes every input line in a worker pool and computes reports.
RunOutcome run_examples(const RunSpec& spec);

int cmd_decode(const RunSpec& spec, std::ostream& out, std::ostream& err);

struct SweepSpec {
  RunSpec base;
  std::string axis;  // a CLI flag name without dashes, e.g. "k", "budget", "algo"
  std::vector<std::string> values;
};

void apply_axis(RunSpec& spec, const std::string& axis, const std::string& value);
int cmd_sweep(const SweepSpec& sweep, std::ostream& out, std::ostream& err);

int cmd_validate_merges(const RunSpec& spec, const std::vector<std::size_t>& horizons, std::ostream& out,
                        std::ostream& err);

// Applies LATTICE_LOG (trace/debug/info/warn/error/critical/off); logs go to stderr.
void init_logging();

}  // namespace latdec
