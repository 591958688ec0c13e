#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "grid.hpp"
#include "version.hpp"

// File formats: CSV for grid functions (one node per row, coordinates then
// value, %.17g so round-trips are exact) and JSON for run summaries. Every
// artifact embeds the library version and an FNV-1a digest of the
// configuration text that produced it.

namespace perifrac {

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string digest_string(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv64:%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_grid_function_csv(const GridFunction& u, const std::string& path, const std::string& config_digest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const UniformGrid& g = u.grid;
  out << "# " << version_string << " config=" << config_digest << "\n";
  out << "# box";
  for (int a = 0; a < g.dim(); ++a) out << " " << format_g17(g.box.lo[a]) << " " << format_g17(g.box.hi[a]);
  out << " cells";
  for (int a = 0; a < g.dim(); ++a) out << " " << g.cells[a];
  out << "\n";
  for (int a = 0; a < g.dim(); ++a) out << "x" << a << ",";
  out << "value\n";
  MultiIndex mi(g.node_extents());
  for (long flat = 0; !mi.done; ++flat, mi.advance()) {
    for (int a = 0; a < g.dim(); ++a) out << format_g17(g.node_coord(a, mi.idx[a])) << ",";
    out << format_g17(u.values[flat]) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline GridFunction read_grid_function_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (!std::getline(in, line) || line.rfind("# box", 0) != 0) throw std::runtime_error(path + ": missing box header");
  std::istringstream hdr(line.substr(5));
  std::vector<double> lo, hi;
  std::string tok;
  while (hdr >> tok && tok != "cells") {
    const double a = std::strtod(tok.c_str(), nullptr);
    double b = 0.0;
    hdr >> b;
    lo.push_back(a);
    hi.push_back(b);
  }
  std::vector<long> cells;
  long c = 0;
  while (hdr >> c) cells.push_back(c);
  GridFunction u(UniformGrid(Box(lo, hi), cells));
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing column header");
  long row = 0;
  const long n = u.grid.node_count();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= n) throw std::runtime_error(path + ": more rows than grid nodes");
    const std::size_t last = line.find_last_of(',');
    if (last == std::string::npos) throw std::runtime_error(path + ": malformed row '" + line + "'");
    u.values[row] = std::strtod(line.c_str() + last + 1, nullptr);
    ++row;
  }
  if (row != n) throw std::runtime_error(path + ": expected " + std::to_string(n) + " rows, got " + std::to_string(row));
  return u;
}

inline nlohmann::ordered_json summary_base(const std::string& command, const std::string& config_digest) {
  nlohmann::ordered_json j;
  j["tool"] = version_string;
  j["command"] = command;
  j["config"] = config_digest;
  return j;
}

inline void write_json(const nlohmann::ordered_json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}
