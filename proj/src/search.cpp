#include "latdec/search.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "latdec/error.hpp"
#include "latdec/frontier.hpp"
#include "latdec/paths.hpp"
#include "latdec/rng.hpp"

namespace latdec {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::greedy: return "greedy";
    case Algorithm::beam: return "beam";
    case Algorithm::dbs: return "dbs";
    case Algorithm::nucleus: return "nucleus";
    case Algorithm::temperature: return "temp";
    case Algorithm::bfs: return "bfs";
  }
  return "bfs";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::greedy, Algorithm::beam, Algorithm::dbs, Algorithm::nucleus, Algorithm::temperature,
                 Algorithm::bfs})
    if (to_string(a) == name) return a;
  return std::nullopt;
}

void SearchConfig::validate() const {
  if (budget == 0) throw ConfigError("budget must be positive");
  if (beam_size == 0) throw ConfigError("k must be positive");
  if (top_k == 0) throw ConfigError("top-k must be positive");
  if (max_len == 0) throw ConfigError("max length must be positive");
  if (!(nucleus_p > 0.0 && nucleus_p <= 1.0)) throw ConfigError("nucleus p must lie in (0, 1]");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (!std::isfinite(length_reward)) throw ConfigError("length reward must be finite");
  if (algorithm == Algorithm::dbs) {
    if (beam_size % effective_groups() != 0) throw ConfigError("k must be divisible by the number of groups");
    if (diversity_strength < 0.0) throw ConfigError("diversity strength must be non-negative");
  }
  if (!recomb.enabled()) return;
  recomb.validate();
  const auto s = recomb.strategy;
  bool ok = false;
  switch (algorithm) {
    case Algorithm::greedy: ok = false; break;
    case Algorithm::beam:
    case Algorithm::dbs: ok = s == RecombStrategy::zbeam || s == RecombStrategy::rcb; break;
    case Algorithm::nucleus:
    case Algorithm::temperature: ok = s == RecombStrategy::rcb; break;
    case Algorithm::bfs: ok = s == RecombStrategy::rcb || s == RecombStrategy::zip; break;
  }
  if (!ok)
    throw ConfigError("recombination '" + std::string(to_string(s)) + "' is not available with '" +
                      std::string(to_string(algorithm)) + "'");
}

namespace {

// Shared bookkeeping for one search: the lattice under construction, the
// metered model, and expansion records.
class SearchRun {
 public:
  SearchRun(const ScoringModel& model, std::span<const TokenId> source, const SearchConfig& config)
      : model_(model),
        config_(config),
        lattice_(model.sos_id(), model.token_text(model.sos_id()), model.eos_id()),
        meter_(config.budget),
        scorer_(model, meter_, source, config.top_k) {
    config.validate();
  }
  SearchRun(const SearchRun&) = delete;
  SearchRun& operator=(const SearchRun&) = delete;

  Lattice& lattice() { return lattice_; }
  const SearchConfig& config() const { return config_; }
  BudgetMeter& meter() { return meter_; }
  std::size_t expanded() const { return expanded_; }
  TokenId eos() const { return model_.eos_id(); }

  TokenDistribution expand(NodeId id) {
    auto dist = scorer_.score(lattice_.canonical_tokens(id));
    ++expanded_;
    if (seen_.size() <= id.index()) seen_.resize(id.index() + 1, 0);
    if (!seen_[id.index()]) {
      seen_[id.index()] = 1;
      expanded_nodes_.push_back(id);
    }
    return dist;
  }

  NodeId child(NodeId parent, const TokenScore& e) {
    return lattice_.add_gen_child(parent, e.token, model_.token_text(e.token), e.log_prob);
  }

  // Marks a hypothesis complete; forced when it ends on a non-eos token.
  void terminate(NodeId id) {
    if (lattice_.node(id).token != eos()) ++truncated_;
    lattice_.set_eos(id, true);
  }
  void count_truncation() { ++truncated_; }

  void record(MergeEvent e) { merges_.push_back(std::move(e)); }

  SearchResult finish() {
    SearchResult r{std::move(lattice_), {}, 0, 0, 0, {}, 0, 0, 0, {}, false};
    r.algorithm = std::string(to_string(config_.algorithm));
    r.rejected_merges = r.lattice.rejected_merges();
    r.lattice.prune_to_complete();
    r.completed_paths = count_paths(r.lattice).total;
    r.expanded = expanded_;
    r.budget_spent = meter_.spent();
    r.budget_exhausted = meter_.exhausted();
    r.expanded_nodes = std::move(expanded_nodes_);
    for (NodeId id : r.expanded_nodes) {
      if (r.completed_paths == 0 || !r.lattice.is_live(r.lattice.resolve(id))) ++r.pruned;
    }
    r.truncated = truncated_;
    r.merges = std::move(merges_);
    r.lattice.seal();
    return r;
  }

 private:
  const ScoringModel& model_;
  const SearchConfig& config_;
  Lattice lattice_;
  BudgetMeter meter_;
  MeteredScorer scorer_;
  std::size_t expanded_ = 0;
  std::vector<NodeId> expanded_nodes_;
  std::vector<char> seen_;
  std::size_t truncated_ = 0;
  std::vector<MergeEvent> merges_;
};

// Beam search with optional Hamming-diversity groups. One group is plain
// beam search.
SearchResult grouped_beam(const ScoringModel& model, std::span<const TokenId> source, const SearchConfig& config,
                          std::size_t groups, double strength) {
  SearchRun run(model, source, config);
  Lattice& lat = run.lattice();
  const std::size_t per_group = config.beam_size / groups;
  const double lambda = config.length_reward;
  const auto& rc = config.recomb;
  MergeIndex index(rc.suffix_n);

  struct Hyp {
    NodeId node;
    double score;
    bool forced = false;
  };
  std::vector<std::vector<Hyp>> beams(groups, std::vector<Hyp>{{lat.sos(), 0.0}});
  std::vector<std::vector<Hyp>> finished(groups);
  std::vector<char> done(groups, 0);
  const auto by_score = [](const Hyp& a, const Hyp& b) { return a.score > b.score; };

  bool out_of_budget = false;
  std::size_t step = 0;
  for (; step < config.max_len && !out_of_budget; ++step) {
    if (std::all_of(done.begin(), done.end(), [](char d) { return d != 0; })) break;
    std::unordered_map<TokenId, std::size_t> chosen;
    for (std::size_t g = 0; g < groups; ++g) {
      if (done[g]) continue;
      struct Cand {
        std::size_t hyp;
        TokenScore entry;
        double base;
        double selection;
      };
      std::vector<Cand> cands;
      for (std::size_t i = 0; i < beams[g].size(); ++i) {
        if (run.meter().exhausted()) {
          out_of_budget = true;
          break;
        }
        const auto dist = run.expand(beams[g][i].node);
        for (const auto& e : dist.entries()) {
          const double base = beams[g][i].score + e.log_prob + lambda;
          const auto it = chosen.find(e.token);
          const double penalty = it == chosen.end() ? 0.0 : strength * static_cast<double>(it->second);
          cands.push_back({i, e, base, base - penalty});
        }
      }
      if (out_of_budget) break;
      std::stable_sort(cands.begin(), cands.end(),
                       [](const Cand& a, const Cand& b) { return a.selection > b.selection; });

      std::vector<Hyp> next;
      std::vector<NodeId> accepted;
      std::vector<NodeId> current;
      for (const auto& h : beams[g]) current.push_back(h.node);
      for (const auto& c : cands) {
        if (next.size() >= per_group) break;
        const NodeId parent = beams[g][c.hyp].node;
        const auto existing = lat.find_gen_child(parent, c.entry.token);
        const NodeId node = existing ? *existing : run.child(parent, c.entry);
        ++chosen[c.entry.token];
        if (c.entry.token == run.eos()) {
          finished[g].push_back({node, c.base});
          continue;
        }
        if (rc.enabled() && !existing) {
          std::optional<NodeId> target;
          if (rc.strategy == RecombStrategy::zbeam) {
            const auto mine = lat.canonical_path(node);
            for (NodeId cand : zbeam_candidates(lat, current, accepted, node)) {
              if (is_recomb(mine, lat.canonical_path(cand), rc)) {
                target = cand;
                break;
              }
            }
          } else {
            target = index.find_target(lat, node, rc);
          }
          if (target) {
            auto ev = do_recomb_rcb(lat, node, *target, run.expanded());
            ev.strategy = rc.strategy;
            const bool merged = ev.accepted;
            run.record(std::move(ev));
            if (merged) continue;
          }
          if (rc.strategy == RecombStrategy::rcb) index.insert(lat, node);
        }
        next.push_back({node, c.base});
        accepted.push_back(node);
      }
      beams[g] = std::move(next);
      if (beams[g].empty()) {
        done[g] = 1;
      } else if (finished[g].size() >= per_group) {
        std::stable_sort(finished[g].begin(), finished[g].end(), by_score);
        const double worst = finished[g][per_group - 1].score;
        double best_live = beams[g].front().score;
        for (const auto& h : beams[g]) best_live = std::max(best_live, h.score);
        const double remaining = static_cast<double>(config.max_len - (step + 1));
        if (best_live + std::max(0.0, lambda) * remaining <= worst) done[g] = 1;
      }
    }
  }

  // Hypotheses still alive at the length or budget limit are force-completed.
  for (std::size_t g = 0; g < groups; ++g) {
    if (done[g]) continue;
    for (const auto& h : beams[g]) {
      if (h.node == lat.sos()) continue;
      finished[g].push_back({h.node, h.score, true});
      run.count_truncation();
    }
  }
  for (std::size_t g = 0; g < groups; ++g) {
    std::stable_sort(finished[g].begin(), finished[g].end(), by_score);
    for (std::size_t i = 0; i < finished[g].size() && i < per_group; ++i) lat.set_eos(finished[g][i].node, true);
  }
  return run.finish();
}

}  // namespace

SearchResult decode_greedy(const ScoringModel& model, std::span<const TokenId> source, const SearchConfig& config) {
  SearchRun run(model, source, config);
  Lattice& lat = run.lattice();
  NodeId node = lat.sos();
  for (;;) {
    if (lat.node(node).depth >= config.max_len || run.meter().exhausted()) {
      if (node != lat.sos()) run.terminate(node);
      break;
    }
    const auto dist = run.expand(node);
    if (dist.empty()) {
      if (node != lat.sos()) run.terminate(node);
      break;
    }
    node = run.child(node, dist.best());
    if (dist.best().token == run.eos()) {
      run.terminate(node);
      break;
    }
  }
  return run.finish();
}

SearchResult decode_beam(const ScoringModel& model, std::span<const TokenId> source, const SearchConfig& config) {
  return grouped_beam(model, source, config, 1, 0.0);
}

SearchResult decode_diverse_beam(const ScoringModel& model, std::span<const TokenId> source,
                                 const SearchConfig& config) {
  config.validate();
  return grouped_beam(model, source, config, config.effective_groups(), config.diversity_strength);
}

std::vector<double> sampling_weights(const TokenDistribution& dist, double temperature, double nucleus_p) {
  std::vector<double> w(dist.size(), 0.0);
  if (dist.empty()) return w;
  const double top = dist.best().log_prob / temperature;
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    w[i] = std::exp(dist[i].log_prob / temperature - top);
    total += w[i];
  }
  for (auto& x : w) x /= total;
  // Entries are sorted best first and temperature keeps that order.
  double cumulative = 0.0;
  std::size_t keep = 0;
  while (keep < w.size()) {
    cumulative += w[keep++];
    if (cumulative >= nucleus_p - 1e-12) break;
  }
  double kept = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i >= keep) w[i] = 0.0;
    kept += w[i];
  }
  for (auto& x : w) x /= kept;
  return w;
}

SearchResult decode_sampling(const ScoringModel& model, std::span<const TokenId> source, const SearchConfig& config) {
  SearchRun run(model, source, config);
  Lattice& lat = run.lattice();
  const bool nucleus = config.algorithm == Algorithm::nucleus;
  const double p = nucleus ? config.nucleus_p : 1.0;
  const double tau = nucleus ? 1.0 : config.temperature;
  const bool recombine = config.recomb.strategy == RecombStrategy::rcb;
  MergeIndex index(config.recomb.suffix_n);
  Rng rng = make_rng(config.seed);

  for (std::size_t chain = 0; chain < config.beam_size; ++chain) {
    NodeId node = lat.sos();
    bool stop_all = false;
    for (;;) {
      if (lat.node(node).depth >= config.max_len) {
        run.terminate(node);
        break;
      }
      if (run.meter().exhausted()) {
        if (node != lat.sos()) run.terminate(node);
        stop_all = true;
        break;
      }
      const auto dist = run.expand(node);
      if (dist.empty()) {
        if (node != lat.sos()) run.terminate(node);
        break;
      }
      const auto weights = sampling_weights(dist, tau, p);
      const double u = uniform_unit(rng);
      std::size_t pick = 0;
      double acc = 0.0;
      for (; pick + 1 < weights.size(); ++pick) {
        acc += weights[pick];
        if (u < acc) break;
      }
      while (pick > 0 && weights[pick] == 0.0) --pick;
      const TokenScore e = dist[pick];

      const auto existing = lat.find_gen_child(node, e.token);
      const NodeId parent = node;
      node = existing ? *existing : run.child(parent, e);
      if (recombine && !existing) {
        if (const auto target = index.find_target(lat, node, config.recomb)) {
          auto ev = do_recomb_rcb(lat, node, *target, run.expanded());
          const bool merged = ev.accepted;
          run.record(std::move(ev));
          if (merged) break;
        }
        index.insert(lat, node);
      }
      if (e.token == run.eos()) {
        run.terminate(node);
        break;
      }
    }
    if (stop_all) break;
  }
  return run.finish();
}

SearchResult decode_bfs(const ScoringModel& model, std::span<const TokenId> source, const SearchConfig& config) {
  SearchRun run(model, source, config);
  Lattice& lat = run.lattice();
  const auto& rc = config.recomb;
  const double lambda = config.length_reward;
  MergeIndex index(rc.suffix_n);
  Frontier frontier;
  std::vector<double> score_of{0.0};  // s(node) = sum of log-probs + lambda * depth
  frontier.push_root();

  while (run.expanded() < config.budget && !frontier.empty()) {
    const FrontierEntry entry = frontier.pop();
    NodeId node = lat.sos();
    if (!entry.root) {
      // Successors of nodes folded away by a merge are dropped here.
      if (!lat.is_live(entry.parent)) continue;
      node = run.child(entry.parent, entry.child);
      score_of.resize(node.index() + 1, 0.0);
      score_of[node.index()] = score_of[entry.parent.index()] + entry.child.log_prob + lambda;
      if (rc.enabled()) {
        if (const auto target = index.find_target(lat, node, rc)) {
          MergeEvent ev = rc.strategy == RecombStrategy::zip
                              ? do_recomb_zip(lat, node, *target, rc, run.expanded(),
                                              [&frontier](NodeId id) { return frontier.pending(id); })
                              : do_recomb_rcb(lat, node, *target, run.expanded());
          const bool merged = ev.accepted;
          run.record(std::move(ev));
          if (merged) continue;
        }
        index.insert(lat, node);
      }
      if (entry.child.token == run.eos() || lat.node(node).depth >= config.max_len) {
        run.terminate(node);
        continue;
      }
    }
    const auto dist = run.expand(node);
    if (dist.empty()) {
      if (node != lat.sos()) run.terminate(node);
      continue;
    }
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const auto& e = dist[i];
      // The greedy successor jumps the queue: depth-first completion.
      frontier.push(i == 0 ? Priority::top() : Priority::of(score_of[node.index()] + e.log_prob + lambda), node, e);
    }
  }

  // The budget can run out mid-completion; close the open chain with its
  // already-scored greedy successor so no expanded node is left dangling.
  if (!frontier.empty() && frontier.top().priority.top_tier) {
    const FrontierEntry entry = frontier.pop();
    if (!entry.root && lat.is_live(entry.parent)) run.terminate(run.child(entry.parent, entry.child));
  }
  return run.finish();
}

SearchResult decode(const ScoringModel& model, std::span<const TokenId> source, const SearchConfig& config) {
  switch (config.algorithm) {
    case Algorithm::greedy: return decode_greedy(model, source, config);
    case Algorithm::beam: return decode_beam(model, source, config);
    case Algorithm::dbs: return decode_diverse_beam(model, source, config);
    case Algorithm::nucleus:
    case Algorithm::temperature: return decode_sampling(model, source, config);
    case Algorithm::bfs: return decode_bfs(model, source, config);
  }
  throw ConfigError("unknown algorithm");
}

std::string_view to_string(TaskProfile p) {
  switch (p) {
    case TaskProfile::translation: return "translation";
    case TaskProfile::summarization: return "summarization";
    case TaskProfile::custom: return "custom";
  }
  return "custom";
}

std::optional<TaskProfile> parse_task_profile(std::string_view name) {
  for (auto p : {TaskProfile::translation, TaskProfile::summarization, TaskProfile::custom})
    if (to_string(p) == name) return p;
  return std::nullopt;
}

EffectiveBudget effective_budget(TaskProfile profile, std::size_t k, std::size_t max_len, double multiplier) {
  double m = multiplier;
  if (profile == TaskProfile::translation) m = 1.5;
  if (profile == TaskProfile::summarization) m = 1.25;
  if (!(m > 0.0)) throw ConfigError("budget multiplier must be positive");
  const auto corrected = static_cast<std::size_t>(std::llround(static_cast<double>(k) * m));
  return {std::max<std::size_t>(corrected, 1), k * max_len};
}

}  // namespace latdec
