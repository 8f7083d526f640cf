#include "latdec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <iomanip>

#include "latdec/error.hpp"
#include "latdec/paths.hpp"

namespace latdec {

using nlohmann::json;

namespace {

using Ngram = std::vector<TokenId>;

std::map<Ngram, std::size_t> ngram_counts(std::span<const TokenId> seq, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  if (n == 0 || seq.size() < n) return counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) ++counts[Ngram(seq.begin() + i, seq.begin() + i + n)];
  return counts;
}

std::size_t clipped_overlap(const std::map<Ngram, std::size_t>& cand, const std::map<Ngram, std::size_t>& ref) {
  std::size_t overlap = 0;
  for (const auto& [g, c] : cand) {
    const auto it = ref.find(g);
    if (it != ref.end()) overlap += std::min(c, it->second);
  }
  return overlap;
}

double f1(double matched, double cand_total, double ref_total) {
  if (matched <= 0.0 || cand_total <= 0.0 || ref_total <= 0.0) return 0.0;
  const double p = matched / cand_total;
  const double r = matched / ref_total;
  return 2.0 * p * r / (p + r);
}

// Running mean: exact when every value is identical.
struct Mean {
  double value = 0.0;
  std::size_t n = 0;
  void add(double x) { value += (x - value) / static_cast<double>(++n); }
};

std::vector<std::vector<TokenId>> sample_contents(const Lattice& lattice, std::size_t m, Rng& rng) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(path_content(sample_path(lattice, rng), lattice.eos_token()));
  return out;
}

}  // namespace

double rouge_n(std::span<const TokenId> candidate, std::span<const TokenId> reference, std::size_t order) {
  if (order < 1) throw ConfigError("ROUGE order must be at least 1");
  if (candidate.size() < order || reference.size() < order) return 0.0;
  const auto c = ngram_counts(candidate, order);
  const auto r = ngram_counts(reference, order);
  return f1(static_cast<double>(clipped_overlap(c, r)), static_cast<double>(candidate.size() - order + 1),
            static_cast<double>(reference.size() - order + 1));
}

std::size_t lcs_length(std::span<const TokenId> a, std::span<const TokenId> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::span<const TokenId> candidate, std::span<const TokenId> reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  return f1(static_cast<double>(lcs_length(candidate, reference)), static_cast<double>(candidate.size()),
            static_cast<double>(reference.size()));
}

double bleu(std::span<const TokenId> candidate, std::span<const TokenId> reference) {
  if (candidate.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto c = ngram_counts(candidate, n);
    const auto r = ngram_counts(reference, n);
    const double matched = static_cast<double>(clipped_overlap(c, r));
    const double total = candidate.size() >= n ? static_cast<double>(candidate.size() - n + 1) : 0.0;
    double p;
    if (n == 1) {
      if (matched == 0.0) return 0.0;
      p = matched / total;
    } else {
      p = (matched + 1.0) / (total + 1.0);
    }
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * bp * std::exp(log_sum / 4.0);
}

std::size_t edit_distance(std::span<const TokenId> a, std::span<const TokenId> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ConfigError("pearson needs equally long series");
  const std::size_t n = xs.size();
  if (n < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::string_view to_string(MatchMetric m) { return m == MatchMetric::bleu ? "bleu" : "rouge"; }

double MatchScores::get(std::string_view name) const {
  for (const auto& [k, v] : values)
    if (k == name) return v;
  throw ConfigError("no score named '" + std::string(name) + "'");
}

MatchScores match_scores(std::span<const TokenId> candidate, std::span<const TokenId> reference, MatchMetric metric) {
  MatchScores s;
  if (metric == MatchMetric::bleu) {
    s.values = {{"bleu", bleu(candidate, reference)}};
  } else {
    s.values = {{"rouge1", rouge_n(candidate, reference, 1)},
                {"rouge2", rouge_n(candidate, reference, 2)},
                {"rougeL", rouge_l(candidate, reference)}};
  }
  return s;
}

double headline(const MatchScores& s, MatchMetric metric) {
  return s.get(metric == MatchMetric::bleu ? "bleu" : "rouge2");
}

std::vector<TokenId> path_content(const Path& path, TokenId eos_token) {
  const auto gen = path.generated();
  std::vector<TokenId> out(gen.begin(), gen.end());
  if (!out.empty() && out.back() == eos_token) out.pop_back();
  return out;
}

std::size_t novel_ngrams(const Lattice& lattice, std::size_t order) {
  const auto marker = [&](NodeId id) {
    return id == lattice.sos() || lattice.node(id).token == lattice.eos_token();
  };
  const auto live = lattice.live_nodes();
  if (order == 1) {
    std::set<TokenId> seen;
    for (NodeId id : live)
      if (!marker(id)) seen.insert(lattice.node(id).token);
    return seen.size();
  }
  if (order == 2) {
    std::set<std::pair<TokenId, TokenId>> seen;
    for (NodeId id : live) {
      if (marker(id)) continue;
      for (const Edge& e : lattice.out_edges(id))
        if (!marker(e.dst)) seen.emplace(lattice.node(id).token, lattice.node(e.dst).token);
    }
    return seen.size();
  }
  throw ConfigError("novel n-gram order must be 1 or 2");
}

double self_bleu(const Lattice& lattice, std::size_t m, Rng& rng) {
  if (m < 2) throw ConfigError("self-BLEU needs at least two samples");
  const auto samples = sample_contents(lattice, m, rng);
  Mean mean;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) mean.add(bleu(samples[i], samples[j]));
  return mean.value;
}

double mean_edit_distance(const Lattice& lattice, std::size_t m, Rng& rng) {
  if (m < 2) throw ConfigError("edit distance needs at least two samples");
  const auto samples = sample_contents(lattice, m, rng);
  Mean mean;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) mean.add(static_cast<double>(edit_distance(samples[i], samples[j])));
  return mean.value;
}

OracleMatch oracle_match(const Lattice& lattice, std::span<const TokenId> reference, MatchMetric metric, Rng& rng) {
  OracleMatch out;
  std::vector<Path> candidates;
  if (count_paths(lattice, kOracleExactCap + 1).total <= kOracleExactCap) {
    candidates = enumerate_paths(lattice, kOracleExactCap);
  } else {
    out.approximate = true;
    candidates = k_best_paths(lattice, kOracleExactCap);
    for (std::size_t i = 0; i < kMatchSamples; ++i) candidates.push_back(sample_path(lattice, rng));
  }
  if (candidates.empty()) throw StructuralError("oracle match needs a complete path");
  out.candidates = candidates.size();
  for (const auto& p : candidates) {
    const auto s = match_scores(path_content(p, lattice.eos_token()), reference, metric);
    if (out.scores.values.empty()) {
      out.scores = s;
      continue;
    }
    for (std::size_t i = 0; i < s.values.size(); ++i)
      out.scores.values[i].second = std::max(out.scores.values[i].second, s.values[i].second);
  }
  return out;
}

MatchScores sample_match(const Lattice& lattice, std::span<const TokenId> reference, MatchMetric metric, Rng& rng,
                         std::size_t samples) {
  if (samples == 0) throw ConfigError("sample match needs at least one sample");
  MatchScores out;
  std::vector<Mean> means;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto s = match_scores(path_content(sample_path(lattice, rng), lattice.eos_token()), reference, metric);
    if (means.empty()) {
      out = s;
      means.resize(s.values.size());
    }
    for (std::size_t j = 0; j < s.values.size(); ++j) means[j].add(s.values[j].second);
  }
  for (std::size_t j = 0; j < means.size(); ++j) out.values[j].second = means[j].value;
  return out;
}

std::optional<double> pruning_ratio(const SearchResult& result) {
  if (result.expanded_nodes.empty()) return std::nullopt;
  return static_cast<double>(result.pruned) / static_cast<double>(result.expanded_nodes.size());
}

std::optional<double> score_quality_correlation(std::span<const std::vector<ScoredHypothesis>> examples) {
  std::vector<double> score_gaps, quality_gaps;
  for (const auto& hyps : examples) {
    if (hyps.size() < 2) continue;
    const auto best = std::max_element(hyps.begin(), hyps.end(), [](const auto& a, const auto& b) {
      return a.model_score < b.model_score;
    });
    for (auto it = hyps.begin(); it != hyps.end(); ++it) {
      if (it == best) continue;
      score_gaps.push_back(best->model_score - it->model_score);
      quality_gaps.push_back(best->quality - it->quality);
    }
  }
  if (score_gaps.size() < 3) return std::nullopt;
  return pearson(score_gaps, quality_gaps);
}

DecodeReport make_report(const SearchResult& result, std::span<const TokenId> reference, const ReportOptions& options) {
  const Lattice& lat = result.lattice;
  DecodeReport r;
  r.algorithm = result.algorithm;
  r.path_count = result.completed_paths;
  r.novel_unigrams = novel_ngrams(lat, 1);
  r.novel_bigrams = novel_ngrams(lat, 2);
  r.expanded = result.expanded;
  r.budget_spent = result.budget_spent;
  r.pruned_ratio = pruning_ratio(result);
  r.merges = static_cast<std::size_t>(std::count_if(result.merges.begin(), result.merges.end(),
                                                    [](const MergeEvent& e) { return e.accepted; }));
  r.truncated = result.truncated;
  if (r.path_count == 0) return r;

  const auto best = k_best_paths(lat, 1);
  if (!best.empty()) r.best = path_content(best.front(), lat.eos_token());
  auto rng_for = [&](SeedPurpose p) { return make_rng(derive_seed(options.root_seed, options.example, p)); };
  {
    auto rng = rng_for(SeedPurpose::self_bleu);
    r.self_bleu = self_bleu(lat, options.self_bleu_samples, rng);
  }
  {
    auto rng = rng_for(SeedPurpose::edit_distance);
    r.mean_edit_distance = mean_edit_distance(lat, options.self_bleu_samples, rng);
  }
  if (!reference.empty()) {
    QualityReport q;
    q.metric = options.metric;
    auto orng = rng_for(SeedPurpose::oracle);
    const auto oracle = oracle_match(lat, reference, options.metric, orng);
    q.oracle = oracle.scores;
    q.oracle_approximate = oracle.approximate;
    auto srng = rng_for(SeedPurpose::sample_match);
    q.sample = sample_match(lat, reference, options.metric, srng);
    r.quality = std::move(q);
  }
  return r;
}

namespace {

json scores_json(const MatchScores& s) {
  json j = json::object();
  for (const auto& [k, v] : s.values) j[k] = v;
  return j;
}

}  // namespace

json report_to_json(const DecodeReport& r) {
  json j;
  j["algorithm"] = r.algorithm;
  j["path_count"] = r.path_count;
  j["novel_unigrams"] = r.novel_unigrams;
  j["novel_bigrams"] = r.novel_bigrams;
  j["self_bleu"] = r.self_bleu;
  j["mean_edit_distance"] = r.mean_edit_distance;
  if (r.quality) {
    j["metric"] = std::string(to_string(r.quality->metric));
    j["oracle_match"] = scores_json(r.quality->oracle);
    j["sample_match"] = scores_json(r.quality->sample);
    j["oracle_approximate"] = r.quality->oracle_approximate;
  }
  j["expanded"] = r.expanded;
  j["budget_spent"] = r.budget_spent;
  j["pruned_ratio"] = r.pruned_ratio ? json(*r.pruned_ratio) : json(nullptr);
  j["merges"] = r.merges;
  j["truncated"] = r.truncated;
  j["best"] = r.best;
  return j;
}

json aggregate_reports(std::span<const DecodeReport> reports) {
  json out;
  out["examples"] = reports.size();
  if (reports.empty()) return out;
  out["algorithm"] = reports.front().algorithm;
  std::map<std::string, Mean> scalar;
  std::map<std::string, std::map<std::string, Mean>> nested;
  std::size_t approximate = 0;
  for (const auto& r : reports) {
    const json j = report_to_json(r);
    for (const auto& [k, v] : j.items()) {
      if (v.is_number()) scalar[k].add(v.get<double>());
      if (v.is_object())
        for (const auto& [sk, sv] : v.items()) nested[k][sk].add(sv.get<double>());
    }
    if (r.quality && r.quality->oracle_approximate) ++approximate;
  }
  for (const auto& [k, m] : scalar) out[k] = m.value;
  for (const auto& [k, sub] : nested)
    for (const auto& [sk, m] : sub) out[k][sk] = m.value;
  if (!reports.front().quality) return out;
  out["metric"] = std::string(to_string(reports.front().quality->metric));
  out["oracle_approximate"] = approximate;
  return out;
}

std::string format_report_table(std::span<const std::pair<std::string, json>> rows) {
  static const std::vector<std::string> order = {"algorithm",     "path_count",   "novel_unigrams",     "novel_bigrams",
                                                 "self_bleu",     "mean_edit_distance", "oracle_match", "sample_match",
                                                 "expanded",      "budget_spent", "pruned_ratio",       "merges",
                                                 "truncated"};
  std::vector<std::string> columns;
  for (const auto& key : order) {
    for (const auto& [label, j] : rows) {
      if (!j.contains(key)) continue;
      if (j[key].is_object()) {
        for (const auto& [sk, sv] : j[key].items()) {
          const std::string col = key + "." + sk;
          if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
        }
      } else if (std::find(columns.begin(), columns.end(), key) == columns.end()) {
        columns.push_back(key);
      }
    }
  }
  const auto cell = [](const json& j, const std::string& col) -> std::string {
    const auto dot = col.find('.');
    const json* v = nullptr;
    if (dot == std::string::npos) {
      if (j.contains(col)) v = &j[col];
    } else {
      const auto outer = col.substr(0, dot), inner = col.substr(dot + 1);
      if (j.contains(outer) && j[outer].contains(inner)) v = &j[outer][inner];
    }
    if (!v || v->is_null()) return "-";
    if (v->is_string()) return v->get<std::string>();
    if (v->is_number_integer() || v->is_number_unsigned()) return std::to_string(v->get<long long>());
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v->get<double>();
    return os.str();
  };

  std::vector<std::vector<std::string>> table;
  table.push_back({"example"});
  for (const auto& c : columns) table.back().push_back(c);
  for (const auto& [label, j] : rows) {
    table.push_back({label});
    for (const auto& c : columns) table.back().push_back(cell(j, c));
  }
  std::vector<std::size_t> width(columns.size() + 1, 0);
  for (const auto& row : table)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::ostringstream os;
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i == 0)
        os << std::left << std::setw(static_cast<int>(width[i])) << row[i];
      else
        os << "  " << std::right << std::setw(static_cast<int>(width[i])) << row[i];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace latdec
