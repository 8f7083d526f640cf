#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "latdec/scoring.hpp"

namespace latdec {

// Child process with its stdin/stdout attached to pipes. Killed and reaped on
// destruction.
class Subprocess {
 public:
  // Runs `command` through /bin/sh -c.
  explicit Subprocess(const std::string& command);
  ~Subprocess();
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  void write_line(const std::string& line);
  // std::nullopt on timeout; throws ModelError on EOF.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  void close_stdin();
  // Waits up to `grace` for a voluntary exit, then kills. Returns exit status or -1.
  int finish(std::chrono::milliseconds grace);

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

namespace wire {

inline constexpr int kProtocolVersion = 1;

struct Hello {
  int version = 0;
  std::size_t vocab_size = 0;
  TokenId eos_id = 0;
  TokenId sos_id = 0;
  std::vector<std::string> vocab;  // optional in the response
};

nlohmann::json hello_request(std::size_t top_k);
nlohmann::json score_request(std::span<const TokenId> prefix, std::span<const TokenId> source);
nlohmann::json bye_request();

// Throw ModelError carrying the raw line on anything unexpected.
Hello parse_hello(const std::string& line);
TokenDistribution parse_score(const std::string& line, std::size_t top_k);

// Server side, used by the stub bridge and tests.
nlohmann::json hello_response(const ScoringModel& model);
nlohmann::json score_response(const TokenDistribution& dist);
nlohmann::json error_response(const std::string& message);

}  // namespace wire

// ScoringModel backed by an external process speaking newline-delimited JSON
// (ops hello / score / bye). One request line in, one response line out.
class BridgeModel final : public ScoringModel {
 public:
  static std::unique_ptr<BridgeModel> launch(const std::string& command, std::size_t top_k,
                                             std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~BridgeModel() override;

  TokenDistribution score(std::span<const TokenId> prefix, std::span<const TokenId> source,
                          std::size_t top_k) const override;
  const Vocabulary& vocabulary() const override { return vocab_; }
  TokenId sos_id() const override { return hello_.sos_id; }
  TokenId eos_id() const override { return hello_.eos_id; }

  std::size_t round_trips() const;

 private:
  BridgeModel(const std::string& command, std::chrono::milliseconds timeout);
  std::string exchange(const nlohmann::json& request) const;

  mutable std::mutex mutex_;
  mutable Subprocess process_;
  std::chrono::milliseconds timeout_;
  wire::Hello hello_;
  Vocabulary vocab_;
  mutable std::size_t round_trips_ = 0;
};

}  // namespace latdec
