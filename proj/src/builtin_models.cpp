#include "latdec/builtin_models.hpp"

#include <cmath>
#include <numeric>

#include "json.hpp"
#include "latdec/error.hpp"

namespace latdec {

// ---- MarkovModel ----------------------------------------------------------

MarkovModel MarkovModel::train(std::istream& corpus, int order, double smoothing) {
  std::vector<std::vector<std::string>> sentences;
  std::string line;
  while (std::getline(corpus, line)) {
    auto words = split_whitespace(line);
    if (!words.empty()) sentences.push_back(std::move(words));
  }
  return train(sentences, order, smoothing);
}

MarkovModel MarkovModel::train(const std::vector<std::vector<std::string>>& sentences, int order, double smoothing) {
  if (order < 1) throw ConfigError("Markov order must be at least 1");
  if (smoothing < 0.0) throw ConfigError("smoothing must be non-negative");
  if (sentences.empty()) throw ConfigError("corpus is empty");

  MarkovModel m;
  m.order_ = order;
  m.smoothing_ = smoothing;
  m.vocab_.add(kSosText);
  m.vocab_.add(kEosText);
  for (const auto& s : sentences)
    for (const auto& w : s) m.vocab_.add(w);

  std::map<std::vector<TokenId>, std::vector<double>> counts;
  const std::size_t v = m.vocab_.size();
  for (const auto& s : sentences) {
    std::vector<TokenId> seq(static_cast<std::size_t>(order), m.sos_id());
    for (const auto& w : s) seq.push_back(m.vocab_.id_of(w));
    seq.push_back(m.eos_id());
    for (std::size_t i = static_cast<std::size_t>(order); i < seq.size(); ++i) {
      std::vector<TokenId> ctx(seq.begin() + static_cast<std::ptrdiff_t>(i - static_cast<std::size_t>(order)),
                               seq.begin() + static_cast<std::ptrdiff_t>(i));
      auto& row = counts[ctx];
      if (row.empty()) row.assign(v, 0.0);
      row[static_cast<std::size_t>(seq[i])] += 1.0;
    }
  }

  // The start token is never an outcome.
  const double outcomes = static_cast<double>(v - 1);
  for (auto& [ctx, row] : counts) {
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    const double denom = total + smoothing * outcomes;
    std::vector<TokenScore> scored;
    for (std::size_t t = 0; t < v; ++t) {
      if (static_cast<TokenId>(t) == m.sos_id()) continue;
      const double p = (row[t] + smoothing) / denom;
      if (p > 0.0) scored.push_back({static_cast<TokenId>(t), std::log(p)});
    }
    std::sort(scored.begin(), scored.end(), token_score_before);
    m.rows_.emplace(ctx, std::move(scored));
  }
  for (std::size_t t = 0; t < v; ++t)
    if (static_cast<TokenId>(t) != m.sos_id()) m.uniform_.push_back({static_cast<TokenId>(t), -std::log(outcomes)});
  return m;
}

std::vector<TokenId> MarkovModel::context_of(std::span<const TokenId> prefix) const {
  const auto r = static_cast<std::size_t>(order_);
  std::vector<TokenId> ctx(r, sos_id());
  const std::size_t take = std::min(r, prefix.size());
  std::copy(prefix.end() - static_cast<std::ptrdiff_t>(take), prefix.end(), ctx.end() - static_cast<std::ptrdiff_t>(take));
  return ctx;
}

const std::vector<TokenScore>& MarkovModel::row_for(std::span<const TokenId> prefix) const {
  const auto it = rows_.find(context_of(prefix));
  return it == rows_.end() ? uniform_ : it->second;
}

TokenDistribution MarkovModel::score(std::span<const TokenId> prefix, std::span<const TokenId>,
                                     std::size_t top_k) const {
  const auto& row = row_for(prefix);
  const std::size_t n = std::min(top_k, row.size());
  return TokenDistribution::from_entries(std::vector<TokenScore>(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(n)),
                                         top_k);
}

double MarkovModel::probability(std::span<const TokenId> prefix, TokenId next) const {
  for (const auto& e : row_for(prefix))
    if (e.token == next) return std::exp(e.log_prob);
  return 0.0;
}

// ---- TableModel -----------------------------------------------------------

TableModel::TableModel(Vocabulary vocab, TokenId sos, TokenId eos, std::vector<TokenScore> default_row)
    : vocab_(std::move(vocab)), sos_(sos), eos_(eos), default_row_(sorted_row(std::move(default_row))) {
  const auto in_vocab = [&](TokenId t) { return t >= 0 && static_cast<std::size_t>(t) < vocab_.size(); };
  if (!in_vocab(sos_) || !in_vocab(eos_)) throw ConfigError("table model: sos/eos ids outside the vocabulary");
}

TableModel TableModel::with_words(const std::vector<std::string>& words, std::vector<TokenScore> default_row) {
  Vocabulary v;
  v.add(kSosText);
  v.add(kEosText);
  for (const auto& w : words) v.add(w);
  return TableModel(std::move(v), 0, 1, std::move(default_row));
}

std::vector<TokenScore> TableModel::sorted_row(std::vector<TokenScore> row) {
  auto d = TokenDistribution::from_entries(std::move(row), std::numeric_limits<std::size_t>::max());
  return {d.entries().begin(), d.entries().end()};
}

void TableModel::set(std::vector<TokenId> prefix, std::vector<TokenScore> row) {
  if (prefix.empty() || prefix.front() != sos_) throw ConfigError("table model: prefix must start with sos");
  table_[std::move(prefix)] = sorted_row(std::move(row));
}

void TableModel::set_default(std::vector<TokenScore> row) { default_row_ = sorted_row(std::move(row)); }

TokenId TableModel::id(std::string_view word) const {
  const TokenId t = vocab_.id_of(word);
  if (t == kUnknownToken) throw ConfigError("table model: unknown word '" + std::string(word) + "'");
  return t;
}

TokenDistribution TableModel::score(std::span<const TokenId> prefix, std::span<const TokenId>,
                                    std::size_t top_k) const {
  const auto it = table_.find(std::vector<TokenId>(prefix.begin(), prefix.end()));
  const auto& row = it == table_.end() ? default_row_ : it->second;
  return TokenDistribution::from_entries(row, top_k);
}

namespace {

using nlohmann::json;

std::vector<TokenScore> row_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + " must be an array of [id, logprob] pairs", 0);
  std::vector<TokenScore> row;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number())
      throw ParseError(where + " entries must be [id, logprob]", 0);
    row.push_back({e[0].get<TokenId>(), e[1].get<double>()});
  }
  return row;
}

json row_to_json(const std::vector<TokenScore>& row) {
  json j = json::array();
  for (const auto& e : row) j.push_back({e.token, e.log_prob});
  return j;
}

}  // namespace

TableModel TableModel::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed table model: ") + e.what(), e.byte);
  }
  try {
    Vocabulary v(doc.at("vocab").get<std::vector<std::string>>());
    TableModel m(std::move(v), doc.value("sos", 0), doc.value("eos", 1),
                 doc.contains("default") ? row_from_json(doc["default"], "/default") : std::vector<TokenScore>{});
    if (doc.contains("entries")) {
      for (std::size_t i = 0; i < doc["entries"].size(); ++i) {
        const auto& e = doc["entries"][i];
        m.set(e.at("prefix").get<std::vector<TokenId>>(), row_from_json(e.at("dist"), "/entries/" + std::to_string(i) + "/dist"));
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid table model: ") + e.what(), 0);
  }
}

std::string TableModel::to_json() const {
  json entries = json::array();
  for (const auto& [prefix, row] : table_) entries.push_back({{"prefix", prefix}, {"dist", row_to_json(row)}});
  json doc = {{"vocab", vocab_.words()},
              {"sos", sos_},
              {"eos", eos_},
              {"default", row_to_json(default_row_)},
              {"entries", std::move(entries)}};
  return doc.dump();
}

}  // namespace latdec
