#pragma once

// Out-of-process predictor. Wire format over a byte stream: each frame is a
// 4-byte big-endian length followed by that many bytes. The request is one
// frame holding the observed grid as an 8-bit graymap whose header carries a
// comment "ensemble-size N"; the response is N frames, each a 16-bit
// probability graymap of the same dimensions.
//
// Endpoints: "exec:<shell command>" runs the command per request and talks
// over its stdin/stdout; "tcp:<host>:<port>" opens one connection per request.

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pathwise/graymap.hpp"
#include "pathwise/predictor.hpp"

namespace pathwise {

class PredictorTimeout : public Error {
 public:
  using Error::Error;
};

namespace wire {

using Clock = std::chrono::steady_clock;

inline constexpr std::string_view kSizeComment = " ensemble-size ";

inline std::string frame(std::string_view payload) {
  if (payload.size() > 0xffffffffu) throw Error("predictor wire: frame too large");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  out.push_back(static_cast<char>(n >> 24));
  out.push_back(static_cast<char>(n >> 16));
  out.push_back(static_cast<char>(n >> 8));
  out.push_back(static_cast<char>(n));
  out.append(payload);
  return out;
}

inline int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left <= 0 ? 0 : static_cast<int>(std::min<long long>(left, 1 << 30));
}

inline void wait_ready(int fd, short events, Clock::time_point deadline) {
  while (true) {
    pollfd p{fd, events, 0};
    const int r = ::poll(&p, 1, remaining_ms(deadline));
    if (r > 0) return;
    if (r == 0) throw PredictorTimeout("external predictor: timed out");
    if (errno != EINTR) throw Error(std::string("external predictor: poll failed: ") + std::strerror(errno));
  }
}

inline void write_all(int fd, std::string_view data, Clock::time_point deadline) {
  std::size_t off = 0;
  while (off < data.size()) {
    wait_ready(fd, POLLOUT, deadline);
    const ssize_t w = ::write(fd, data.data() + off, data.size() - off);
    if (w < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw Error(std::string("external predictor: write failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(w);
  }
}

/// Reads exactly n bytes; returns false on a clean end of stream before any
/// byte was read.
inline bool read_exact(int fd, char* buf, std::size_t n, Clock::time_point deadline) {
  std::size_t off = 0;
  while (off < n) {
    wait_ready(fd, POLLIN, deadline);
    const ssize_t r = ::read(fd, buf + off, n - off);
    if (r < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw Error(std::string("external predictor: read failed: ") + std::strerror(errno));
    }
    if (r == 0) {
      if (off == 0) return false;
      throw Error("external predictor: stream ended inside a frame");
    }
    off += static_cast<std::size_t>(r);
  }
  return true;
}

inline std::string read_frame(int fd, Clock::time_point deadline, std::size_t max_bytes = std::size_t{1} << 31) {
  unsigned char head[4];
  if (!read_exact(fd, reinterpret_cast<char*>(head), 4, deadline))
    throw Error("external predictor: stream ended before a frame");
  const std::size_t n = (std::size_t{head[0]} << 24) | (std::size_t{head[1]} << 16) | (std::size_t{head[2]} << 8) |
                        std::size_t{head[3]};
  if (n > max_bytes) throw Error("external predictor: frame too large");
  std::string payload(n, '\0');
  if (n > 0 && !read_exact(fd, payload.data(), n, deadline)) throw Error("external predictor: truncated frame");
  return payload;
}

inline std::string encode_request(const ObservedGrid& observed, int n) {
  Graymap g = to_graymap(observed);
  g.comments.push_back(std::string(kSizeComment) + std::to_string(n));
  return frame(encode_pgm(g));
}

/// Parses a request payload (without its length prefix).
inline std::pair<ObservedGrid, int> decode_request(std::string_view payload) {
  const Graymap g = decode_pgm(payload);
  int n = -1;
  for (const auto& c : g.comments)
    if (c.rfind(kSizeComment, 0) == 0) n = std::stoi(c.substr(kSizeComment.size()));
  if (n < 1) throw Error("external predictor: request lacks an ensemble size");
  return {observed_from_graymap(g), n};
}

struct FdGuard {
  int fd = -1;
  ~FdGuard() {
    if (fd >= 0) ::close(fd);
  }
};

}  // namespace wire

/// Decodes and validates response payloads into an ensemble. Observation
/// violations are clamped and counted in `clamped_cells`.
inline PredictionEnsemble ensemble_from_payloads(const std::vector<std::string>& payloads,
                                                 const ObservedGrid& observed) {
  std::vector<PredictedGrid> members;
  std::size_t clamped = 0;
  for (const auto& p : payloads) {
    const Graymap g = decode_pgm(p);
    if (g.width != observed.width() || g.height != observed.height())
      throw Error("external predictor: dimension mismatch (" + std::to_string(g.width) + "x" +
                  std::to_string(g.height) + " vs " + std::to_string(observed.width()) + "x" +
                  std::to_string(observed.height()) + ")");
    PredictedGrid m = predicted_from_graymap(g, observed.geometry().resolution);
    clamped += preserve_observations(m, observed);
    members.push_back(std::move(m));
  }
  PredictionEnsemble e = make_ensemble(std::move(members));
  e.clamped_cells = clamped;
  return e;
}

class ExternalPredictor final : public Predictor {
 public:
  /// `fallback`, if set, answers when the endpoint fails.
  explicit ExternalPredictor(std::string endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(30),
                             std::shared_ptr<const Predictor> fallback = nullptr)
      : endpoint_(std::move(endpoint)), timeout_(timeout), fallback_(std::move(fallback)) {
    if (endpoint_.rfind("exec:", 0) != 0 && endpoint_.rfind("tcp:", 0) != 0)
      throw Error("external predictor: endpoint must start with exec: or tcp:");
  }

  [[nodiscard]] std::string name() const override { return "external"; }

  [[nodiscard]] PredictedGrid predict_member(const ObservedGrid& observed, std::uint64_t seed,
                                             int index) const override {
    return std::move(predict(observed, index + 1, seed).members.back());
  }

  [[nodiscard]] PredictionEnsemble predict(const ObservedGrid& observed, int n, std::uint64_t seed) const override {
    if (n < 1) throw Error("prediction: ensemble size must be >= 1");
    try {
      return ensemble_from_payloads(exchange(wire::encode_request(observed, n), n), observed);
    } catch (const Error&) {
      if (!fallback_) throw;
      return fallback_->predict(observed, n, seed);
    }
  }

  /// Sends one request and collects `n` response payloads.
  [[nodiscard]] std::vector<std::string> exchange(const std::string& request, int n) const {
    const auto deadline = wire::Clock::now() + timeout_;
    if (endpoint_.rfind("tcp:", 0) == 0) return exchange_tcp(request, n, deadline);
    return exchange_exec(request, n, deadline);
  }

 private:
  std::vector<std::string> exchange_tcp(const std::string& request, int n, wire::Clock::time_point deadline) const {
    const std::string addr = endpoint_.substr(4);
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw Error("external predictor: tcp endpoint needs host:port");
    const std::string host = addr.substr(0, colon);
    const std::string port = addr.substr(colon + 1);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || !res)
      throw Error("external predictor: cannot resolve " + addr);
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);
    wire::FdGuard sock;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
      sock.fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
      if (sock.fd < 0) continue;
      if (::connect(sock.fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
      ::close(sock.fd);
      sock.fd = -1;
    }
    if (sock.fd < 0) throw Error("external predictor: cannot connect to " + addr);
    wire::write_all(sock.fd, request, deadline);
    ::shutdown(sock.fd, SHUT_WR);
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(wire::read_frame(sock.fd, deadline));
    return out;
  }

  std::vector<std::string> exchange_exec(const std::string& request, int n, wire::Clock::time_point deadline) const {
    const std::string cmd = endpoint_.substr(5);
    int to_child[2], from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) throw Error("external predictor: pipe failed");
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw Error("external predictor: pipe failed");
    }
    const pid_t pid = ::fork();
    if (pid < 0) throw Error("external predictor: fork failed");
    if (pid == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    wire::FdGuard in{to_child[1]};
    wire::FdGuard out_fd{from_child[0]};
    // a child that exits early must not kill us with SIGPIPE
    struct sigaction ignore {}, old {};
    ignore.sa_handler = SIG_IGN;
    ::sigaction(SIGPIPE, &ignore, &old);
    auto reap = [&](bool kill_first) {
      if (kill_first) ::kill(pid, SIGKILL);
      int status = 0;
      while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
      }
      ::sigaction(SIGPIPE, &old, nullptr);
      return status;
    };
    std::vector<std::string> frames;
    try {
      wire::write_all(in.fd, request, deadline);
      ::close(in.fd);
      in.fd = -1;
      for (int i = 0; i < n; ++i) frames.push_back(wire::read_frame(out_fd.fd, deadline));
    } catch (...) {
      reap(true);
      throw;
    }
    ::close(out_fd.fd);
    out_fd.fd = -1;
    reap(false);
    return frames;
  }

  std::string endpoint_;
  std::chrono::milliseconds timeout_;
  std::shared_ptr<const Predictor> fallback_;
};

}  // namespace pathwise
