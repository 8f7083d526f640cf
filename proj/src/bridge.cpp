#include "latdec/bridge.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "latdec/error.hpp"

namespace latdec {

using nlohmann::json;

// ---- Subprocess -------------------------------------------------------------

Subprocess::Subprocess(const std::string& command) {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) throw ModelError(std::string("pipe failed: ") + std::strerror(errno));
  if (pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw ModelError(std::string("pipe failed: ") + std::strerror(errno));
  }
  pid_ = fork();
  if (pid_ < 0) throw ModelError(std::string("fork failed: ") + std::strerror(errno));
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  fcntl(from_child_, F_SETFD, FD_CLOEXEC);
}

Subprocess::~Subprocess() { finish(std::chrono::milliseconds(200)); }

void Subprocess::write_line(const std::string& line) {
  if (to_child_ < 0) throw ModelError("bridge stdin already closed");
  std::string data = line + "\n";
  const char* p = data.data();
  std::size_t left = data.size();
  // A dead reader must surface as an error, not kill us.
  std::signal(SIGPIPE, SIG_IGN);
  while (left > 0) {
    const ssize_t n = ::write(to_child_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ModelError(std::string("write to bridge failed: ") + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

std::optional<std::string> Subprocess::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw ModelError(std::string("poll on bridge failed: ") + std::strerror(errno));
    }
    if (rc == 0) return std::nullopt;
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ModelError(std::string("read from bridge failed: ") + std::strerror(errno));
    }
    if (n == 0) throw ModelError("bridge closed its output", buffer_);
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void Subprocess::close_stdin() {
  if (to_child_ >= 0) {
    ::close(to_child_);
    to_child_ = -1;
  }
}

int Subprocess::finish(std::chrono::milliseconds grace) {
  close_stdin();
  int status = -1;
  if (pid_ > 0) {
    const auto deadline = std::chrono::steady_clock::now() + grace;
    int ws = 0;
    pid_t done = 0;
    while ((done = waitpid(pid_, &ws, WNOHANG)) == 0 && std::chrono::steady_clock::now() < deadline)
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    if (done == 0) {
      kill(pid_, SIGKILL);
      waitpid(pid_, &ws, 0);
    } else if (done == pid_ && WIFEXITED(ws)) {
      status = WEXITSTATUS(ws);
    }
    pid_ = -1;
  }
  if (from_child_ >= 0) {
    ::close(from_child_);
    from_child_ = -1;
  }
  return status;
}

// ---- wire format --------------------------------------------------------------

namespace wire {

json hello_request(std::size_t top_k) { return {{"op", "hello"}, {"k", top_k}, {"version", kProtocolVersion}}; }

json score_request(std::span<const TokenId> prefix, std::span<const TokenId> source) {
  return {{"op", "score"},
          {"prefix", std::vector<TokenId>(prefix.begin(), prefix.end())},
          {"source", std::vector<TokenId>(source.begin(), source.end())}};
}

json bye_request() { return {{"op", "bye"}}; }

namespace {

json parse_response(const std::string& line) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("malformed bridge response: ") + e.what(), line);
  }
  if (!doc.is_object()) throw ModelError("bridge response is not an object", line);
  if (doc.contains("ok") && doc["ok"].is_boolean() && !doc["ok"].get<bool>())
    throw ModelError("bridge reported an error: " + doc.value("error", std::string("unspecified")), line);
  return doc;
}

}  // namespace

Hello parse_hello(const std::string& line) {
  const json doc = parse_response(line);
  Hello h;
  try {
    h.version = doc.at("version").get<int>();
    if (h.version != kProtocolVersion)
      throw ModelError("bridge speaks protocol version " + std::to_string(h.version) + ", expected " +
                           std::to_string(kProtocolVersion),
                       line);
    h.vocab_size = doc.at("vocab_size").get<std::size_t>();
    h.eos_id = doc.at("eos_id").get<TokenId>();
    h.sos_id = doc.value("sos_id", TokenId{0});
    if (doc.contains("vocab")) h.vocab = doc["vocab"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ModelError(std::string("bad hello response: ") + e.what(), line);
  }
  if (!h.vocab.empty() && h.vocab.size() != h.vocab_size) throw ModelError("hello vocab list disagrees with vocab_size", line);
  return h;
}

TokenDistribution parse_score(const std::string& line, std::size_t top_k) {
  const json doc = parse_response(line);
  std::vector<TokenScore> entries;
  try {
    for (const auto& e : doc.at("dist")) {
      if (!e.is_array() || e.size() != 2) throw ModelError("score entries must be [id, logprob]", line);
      entries.push_back({e[0].get<TokenId>(), e[1].get<double>()});
    }
  } catch (const json::exception& e) {
    throw ModelError(std::string("bad score response: ") + e.what(), line);
  }
  try {
    return TokenDistribution::from_entries(std::move(entries), top_k);
  } catch (const ModelError& e) {
    throw ModelError(e.what(), line);
  }
}

json hello_response(const ScoringModel& model) {
  return {{"ok", true},
          {"version", kProtocolVersion},
          {"vocab_size", model.vocabulary().size()},
          {"eos_id", model.eos_id()},
          {"sos_id", model.sos_id()},
          {"vocab", model.vocabulary().words()}};
}

json score_response(const TokenDistribution& dist) {
  json d = json::array();
  for (const auto& e : dist.entries()) d.push_back({e.token, e.log_prob});
  return {{"ok", true}, {"dist", std::move(d)}};
}

json error_response(const std::string& message) { return {{"ok", false}, {"error", message}}; }

}  // namespace wire

// ---- BridgeModel ------------------------------------------------------------

BridgeModel::BridgeModel(const std::string& command, std::chrono::milliseconds timeout)
    : process_(command), timeout_(timeout) {}

std::unique_ptr<BridgeModel> BridgeModel::launch(const std::string& command, std::size_t top_k,
                                                 std::chrono::milliseconds timeout) {
  std::unique_ptr<BridgeModel> m(new BridgeModel(command, timeout));
  m->hello_ = wire::parse_hello(m->exchange(wire::hello_request(top_k)));
  if (m->hello_.vocab.empty()) {
    for (std::size_t i = 0; i < m->hello_.vocab_size; ++i) m->vocab_.add("<" + std::to_string(i) + ">");
  } else {
    for (const auto& w : m->hello_.vocab) m->vocab_.add(w);
  }
  return m;
}

BridgeModel::~BridgeModel() {
  try {
    std::lock_guard lock(mutex_);
    process_.write_line(wire::bye_request().dump());
    (void)process_.read_line(std::chrono::milliseconds(500));
  } catch (const std::exception&) {
    // Process already gone; nothing to shut down politely.
  }
  process_.finish(std::chrono::milliseconds(500));
}

std::string BridgeModel::exchange(const json& request) const {
  std::lock_guard lock(mutex_);
  process_.write_line(request.dump());
  auto line = process_.read_line(timeout_);
  if (!line) throw ModelError("bridge timed out after " + std::to_string(timeout_.count()) + " ms");
  ++round_trips_;
  return *line;
}

TokenDistribution BridgeModel::score(std::span<const TokenId> prefix, std::span<const TokenId> source,
                                     std::size_t top_k) const {
  return wire::parse_score(exchange(wire::score_request(prefix, source)), top_k);
}

std::size_t BridgeModel::round_trips() const {
  std::lock_guard lock(mutex_);
  return round_trips_;
}

}  // namespace latdec
