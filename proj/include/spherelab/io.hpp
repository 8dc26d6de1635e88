#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "spherelab/errors.hpp"
#include "spherelab/lattice_counts.hpp"

namespace spherelab {

/// Writes content to a sibling temp file, then renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ParameterError("cannot open " + tmp.string() + " for writing");
    os << content;
    if (!os.flush()) throw ResourceError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ResourceError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

/// `lambda,count` rows with decimal counts.
inline void write_counts_csv(std::ostream& os, const RepCountTable& t) {
  os << "lambda,count\n";
  for (std::size_t i = 0; i < t.counts.size(); ++i) os << i << ',' << t.counts[i] << '\n';
}

/// `x1,...,xd` header and one row per point.
inline void write_shell_csv(std::ostream& os, const Shell& s) {
  for (int i = 0; i < s.spec.dim; ++i) os << (i ? ",x" : "x") << i + 1;
  os << '\n';
  for (const auto& p : s.points) os << p.to_string(',') << '\n';
}

/// Shortest round-tripping decimal for a double.
inline std::string format_double(double v) {
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace spherelab
