// Test double for the external predictor protocol. Answers each request with
// the observed grid, unknown cells filled with a constant, once per requested
// member. Flags inject the failures the client must detect.
//
//   echo_predictor [--p0 0.5] [--violate K] [--wrong-size] [--frames M] [--delay-ms D]
//   echo_predictor --tcp --connections 2      (prints the bound port, then serves)

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <thread>

#include <CLI11.hpp>

#include "pathwise/external_predictor.hpp"

namespace {

using namespace pathwise;

struct Options {
  double p0 = 0.5;
  int violate = 0;
  bool wrong_size = false;
  int frames = -1;
  int delay_ms = 0;
};

std::string member_payload(const ObservedGrid& observed, const Options& o) {
  const int w = observed.width() + (o.wrong_size ? 1 : 0);
  PredictedGrid m(GridGeometry(w, observed.height(), observed.geometry().resolution), o.p0);
  int flipped = 0;
  for (int y = 0; y < observed.height(); ++y)
    for (int x = 0; x < observed.width(); ++x) {
      const CellState s = observed.at(x, y);
      if (s == CellState::Unknown) continue;
      double v = s == CellState::Occupied ? 1.0 : 0.0;
      if (flipped < o.violate) {
        v = 1.0 - v;
        ++flipped;
      }
      m.set(x, y, v);
    }
  return encode_pgm(to_graymap(m));
}

void serve(int in_fd, int out_fd, const Options& o) {
  const auto deadline = wire::Clock::now() + std::chrono::seconds(60);
  const auto [observed, n] = wire::decode_request(wire::read_frame(in_fd, deadline));
  if (o.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(o.delay_ms));
  const int count = o.frames >= 0 ? o.frames : n;
  const std::string payload = member_payload(observed, o);
  for (int i = 0; i < count; ++i) wire::write_all(out_fd, wire::frame(payload), deadline);
}

int serve_tcp(int connections, const Options& o) {
  const int s = ::socket(AF_INET, SOCK_STREAM, 0);
  if (s < 0) return 1;
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(s, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(s, 4) != 0) return 1;
  socklen_t len = sizeof addr;
  ::getsockname(s, reinterpret_cast<sockaddr*>(&addr), &len);
  std::printf("%d\n", ntohs(addr.sin_port));
  std::fflush(stdout);
  for (int i = 0; i < connections; ++i) {
    const int c = ::accept(s, nullptr, nullptr);
    if (c < 0) return 1;
    try {
      serve(c, c, o);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "echo_predictor: %s\n", e.what());
    }
    ::close(c);
  }
  ::close(s);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"echo predictor"};
  Options o;
  bool tcp = false;
  int connections = 1;
  app.add_option("--p0", o.p0, "value for unknown cells");
  app.add_option("--violate", o.violate, "observed cells to contradict");
  app.add_flag("--wrong-size", o.wrong_size, "answer with one extra column");
  app.add_option("--frames", o.frames, "number of frames to send (default: as requested)");
  app.add_option("--delay-ms", o.delay_ms, "wait before answering");
  app.add_flag("--tcp", tcp, "serve on a loopback port instead of stdin/stdout");
  app.add_option("--connections", connections, "connections to serve with --tcp");
  CLI11_PARSE(app, argc, argv);
  if (tcp) return serve_tcp(connections, o);
  try {
    serve(STDIN_FILENO, STDOUT_FILENO, o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "echo_predictor: %s\n", e.what());
    return 1;
  }
  return 0;
}
