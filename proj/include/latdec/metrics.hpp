#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "latdec/lattice.hpp"
#include "latdec/rng.hpp"
#include "latdec/search.hpp"

namespace latdec {

inline constexpr std::size_t kSelfBleuSamples = 5;
inline constexpr std::size_t kMatchSamples = 1000;
inline constexpr std::uint64_t kOracleExactCap = 10'000;

// ---- sequence metrics --------------------------------------------------------

// n-gram overlap F1 with clipped counts; 0 for an empty candidate.
double rouge_n(std::span<const TokenId> candidate, std::span<const TokenId> reference, std::size_t order);
// Longest-common-subsequence F1.
double rouge_l(std::span<const TokenId> candidate, std::span<const TokenId> reference);
std::size_t lcs_length(std::span<const TokenId> a, std::span<const TokenId> b);

// Sentence BLEU-4 on a 0-100 scale: clipped precisions, add-1 smoothing on
// orders 2-4, exponential brevity penalty. 0 for an empty candidate.
double bleu(std::span<const TokenId> candidate, std::span<const TokenId> reference);

std::size_t edit_distance(std::span<const TokenId> a, std::span<const TokenId> b);

// Absent when either side has zero variance or fewer than two points.
std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys);

// ---- reference-match scoring ---------------------------------------------------

enum class MatchMetric { rouge, bleu };
std::string_view to_string(MatchMetric m);

// Named scores: rouge1/rouge2/rougeL or bleu.
struct MatchScores {
  std::vector<std::pair<std::string, double>> values;
  double get(std::string_view name) const;
};

MatchScores match_scores(std::span<const TokenId> candidate, std::span<const TokenId> reference, MatchMetric metric);

// Headline value used for oracle ranking and correlation: ROUGE-2 or BLEU.
double headline(const MatchScores& s, MatchMetric metric);

// ---- lattice metrics -----------------------------------------------------------

// Generated tokens of a path without the trailing eos.
std::vector<TokenId> path_content(const Path& path, TokenId eos_token);

// Distinct tokens on live nodes (order 1) or distinct token pairs over all
// edges, MRG included (order 2). Start and end markers are not counted.
std::size_t novel_ngrams(const Lattice& lattice, std::size_t order);

double self_bleu(const Lattice& lattice, std::size_t m, Rng& rng);
double mean_edit_distance(const Lattice& lattice, std::size_t m, Rng& rng);

struct OracleMatch {
  MatchScores scores;  // each value maximized independently over the candidate set
  bool approximate = false;
  std::size_t candidates = 0;
};

// Exact over all complete paths up to kOracleExactCap of them; beyond that the
// maximum over the top-scoring kOracleExactCap paths plus kMatchSamples samples.
OracleMatch oracle_match(const Lattice& lattice, std::span<const TokenId> reference, MatchMetric metric, Rng& rng);

// Mean over `samples` uniform-random-walk paths.
MatchScores sample_match(const Lattice& lattice, std::span<const TokenId> reference, MatchMetric metric, Rng& rng,
                         std::size_t samples = kMatchSamples);

// Fraction of distinct expanded nodes on no returned complete path; absent
// without expansions.
std::optional<double> pruning_ratio(const SearchResult& result);

struct ScoredHypothesis {
  double model_score;
  double quality;
};

// Per example, the best-model-score hypothesis is compared with each other
// one; Pearson correlation of (score gap, quality gap) over all pairs.
// Absent with fewer than three pairs or zero variance.
std::optional<double> score_quality_correlation(std::span<const std::vector<ScoredHypothesis>> examples);

// ---- per-example report --------------------------------------------------------

struct QualityReport {
  MatchMetric metric = MatchMetric::rouge;
  MatchScores oracle;
  MatchScores sample;
  bool oracle_approximate = false;
};

struct DecodeReport {
  std::string algorithm;
  std::uint64_t path_count = 0;
  std::size_t novel_unigrams = 0;
  std::size_t novel_bigrams = 0;
  double self_bleu = 0.0;
  double mean_edit_distance = 0.0;
  std::optional<QualityReport> quality;
  std::size_t expanded = 0;
  std::size_t budget_spent = 0;
  std::optional<double> pruned_ratio;
  std::size_t merges = 0;
  std::size_t truncated = 0;
  std::vector<TokenId> best;  // highest-scoring complete path content
};

struct ReportOptions {
  std::uint64_t root_seed = 0;
  std::uint64_t example = 0;
  std::size_t self_bleu_samples = kSelfBleuSamples;
  MatchMetric metric = MatchMetric::rouge;
};

// `reference` empty means no quality metrics.
DecodeReport make_report(const SearchResult& result, std::span<const TokenId> reference, const ReportOptions& options);

nlohmann::json report_to_json(const DecodeReport& r);

// Column-wise mean over reports (optional columns averaged over present values).
nlohmann::json aggregate_reports(std::span<const DecodeReport> reports);

// Aligned text table with one row per labelled report JSON (per-example or
// aggregate); columns are the report fields, nested match scores flattened.
std::string format_report_table(std::span<const std::pair<std::string, nlohmann::json>> rows);

}  // namespace latdec
