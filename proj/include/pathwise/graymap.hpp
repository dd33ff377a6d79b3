#pragma once

// Binary portable graymap (P5) encode/decode, 8- and 16-bit.
//
// Observed grids: 0 = Occupied, 255 = Free, 205 = Unknown.
// Ground truth:   0 = Occupied, 255 = Free.
// Predicted:      16-bit, value = round(probability * 65535).
// Masks:          255 = set, 0 = clear.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pathwise/grid.hpp"
#include "pathwise/polygon.hpp"

namespace pathwise {

struct Graymap {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<std::uint16_t> pixels;  // row-major
  std::vector<std::string> comments;  // header comment lines without the leading '#'
};

inline constexpr std::uint8_t kPgmOccupied = 0;
inline constexpr std::uint8_t kPgmFree = 255;
inline constexpr std::uint8_t kPgmUnknown = 205;

inline std::string encode_pgm(const Graymap& g) {
  if (g.width < 1 || g.height < 1) throw Error("pgm: empty image");
  if (g.maxval < 1 || g.maxval > 65535) throw Error("pgm: maxval out of range");
  if (g.pixels.size() != static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height))
    throw Error("pgm: pixel count does not match dimensions");
  std::string out = "P5\n";
  for (const auto& c : g.comments) out += "#" + c + "\n";
  out += std::to_string(g.width) + " " + std::to_string(g.height) + "\n" + std::to_string(g.maxval) + "\n";
  const bool wide = g.maxval > 255;
  out.reserve(out.size() + g.pixels.size() * (wide ? 2 : 1));
  for (std::uint16_t v : g.pixels) {
    if (v > g.maxval) throw Error("pgm: pixel exceeds maxval");
    if (wide) out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xff));
  }
  return out;
}

inline Graymap decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  Graymap g;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        const std::size_t eol = bytes.find('\n', pos);
        g.comments.emplace_back(bytes.substr(pos + 1, (eol == std::string_view::npos ? bytes.size() : eol) - pos - 1));
        pos = eol == std::string_view::npos ? bytes.size() : eol + 1;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space_and_comments();
    long v = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000'000L) throw Error("pgm: header value too large");
      ++pos;
      ++digits;
    }
    if (digits == 0) throw Error("pgm: malformed header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw Error("pgm: missing P5 magic");
  pos = 2;
  const long w = read_int();
  const long h = read_int();
  const long maxval = read_int();
  if (w < 1 || h < 1) throw Error("pgm: empty image");
  if (maxval < 1 || maxval > 65535) throw Error("pgm: maxval out of range");
  if (pos >= bytes.size() || !(bytes[pos] == ' ' || bytes[pos] == '\n' || bytes[pos] == '\r' || bytes[pos] == '\t'))
    throw Error("pgm: malformed header");
  ++pos;
  g.width = static_cast<int>(w);
  g.height = static_cast<int>(h);
  g.maxval = static_cast<int>(maxval);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  if (bytes.size() - pos < n * bpp) throw Error("pgm: truncated pixel data");
  g.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint16_t v;
    if (bpp == 2) {
      v = static_cast<std::uint16_t>((static_cast<unsigned char>(bytes[pos]) << 8) |
                                     static_cast<unsigned char>(bytes[pos + 1]));
      pos += 2;
    } else {
      v = static_cast<unsigned char>(bytes[pos]);
      pos += 1;
    }
    if (v > maxval) throw Error("pgm: pixel exceeds maxval");
    g.pixels[i] = v;
  }
  return g;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

inline Graymap to_graymap(const ObservedGrid& observed) {
  Graymap g{observed.width(), observed.height(), 255, {}, {}};
  g.pixels.resize(observed.size());
  for (std::size_t i = 0; i < observed.size(); ++i) {
    switch (observed[i]) {
      case CellState::Occupied: g.pixels[i] = kPgmOccupied; break;
      case CellState::Free: g.pixels[i] = kPgmFree; break;
      case CellState::Unknown: g.pixels[i] = kPgmUnknown; break;
    }
  }
  return g;
}

inline Graymap to_graymap(const GroundTruthGrid& world) {
  Graymap g{world.width(), world.height(), 255, {}, {}};
  g.pixels.resize(world.size());
  for (std::size_t i = 0; i < world.size(); ++i)
    g.pixels[i] = world[i] == CellState::Occupied ? kPgmOccupied : kPgmFree;
  return g;
}

/// Debug dump: mask cells 255, background 0.
inline Graymap to_graymap(const VisibilityMask& mask) {
  Graymap g{mask.width(), mask.height(), 255, {}, {}};
  g.pixels.resize(mask.cells().size());
  for (std::size_t i = 0; i < g.pixels.size(); ++i) g.pixels[i] = mask[i] ? 255 : 0;
  return g;
}

inline std::uint16_t probability_to_u16(double p) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(p, 0.0, 1.0) * 65535.0));
}

inline Graymap to_graymap(const PredictedGrid& predicted) {
  Graymap g{predicted.width(), predicted.height(), 65535, {}, {}};
  g.pixels.resize(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) g.pixels[i] = probability_to_u16(predicted[i]);
  return g;
}

inline ObservedGrid observed_from_graymap(const Graymap& g, double resolution = 10.0) {
  if (g.maxval != 255) throw Error("observed graymap must be 8-bit");
  ObservedGrid out(GridGeometry(g.width, g.height, resolution), CellState::Unknown);
  for (std::size_t i = 0; i < g.pixels.size(); ++i) {
    switch (g.pixels[i]) {
      case kPgmOccupied: out[i] = CellState::Occupied; break;
      case kPgmFree: out[i] = CellState::Free; break;
      case kPgmUnknown: out[i] = CellState::Unknown; break;
      default: throw Error("observed graymap: illegal value " + std::to_string(g.pixels[i]));
    }
  }
  return out;
}

inline PredictedGrid predicted_from_graymap(const Graymap& g, double resolution = 10.0) {
  if (g.maxval != 65535) throw Error("predicted graymap must be 16-bit with maxval 65535");
  PredictedGrid out(GridGeometry(g.width, g.height, resolution), 0.0);
  for (std::size_t i = 0; i < g.pixels.size(); ++i) out[i] = g.pixels[i] / 65535.0;
  return out;
}

/// Ground-truth ingestion: 0 -> Occupied, 255 -> Free, border forced Occupied.
inline GroundTruthGrid load_graymap(std::string_view bytes, double resolution = 10.0) {
  const Graymap g = decode_pgm(bytes);
  if (g.maxval != 255) throw Error("ground-truth graymap must be 8-bit");
  GroundTruthGrid world(GridGeometry(g.width, g.height, resolution), CellState::Free);
  for (std::size_t i = 0; i < g.pixels.size(); ++i) {
    if (g.pixels[i] == kPgmOccupied) {
      world[i] = CellState::Occupied;
    } else if (g.pixels[i] != kPgmFree) {
      throw Error("ground-truth graymap: illegal value " + std::to_string(g.pixels[i]));
    }
  }
  close_border(world);
  return world;
}

}  // namespace pathwise
