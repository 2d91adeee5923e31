#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "crowd/field.hpp"

namespace crowd {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// pop{ID}_step{N:06}
inline std::string snapshot_stem(int population, int step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "pop%d_step%06d", population, step);
  return buf;
}

/// m rows of m space-separated values, first row at the top of the domain (y = 1).
inline void write_matrix(std::ostream& os, const ScalarField& f) {
  const int m = f.size();
  for (int k = m - 1; k >= 0; --k) {
    for (int i = 0; i < m; ++i) {
      if (i) os << ' ';
      os << format_double(f(i, k));
    }
    os << '\n';
  }
}

inline void write_matrix(const std::filesystem::path& path, const ScalarField& f) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  write_matrix(os, f);
  if (!os) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

inline ScalarField read_matrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) row.push_back(std::strtod(tok.c_str(), nullptr));
    rows.push_back(std::move(row));
  }
  const int m = static_cast<int>(rows.size());
  ScalarField f(m);
  for (int r = 0; r < m; ++r) {
    if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != m)
      throw Error(ErrorCode::io_error, path.string() + ": matrix is not square");
    for (int i = 0; i < m; ++i) f(i, m - 1 - r) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
  }
  return f;
}

/// Binary 8-bit graymap, 0 maps to black and the field maximum to 255.
inline void write_graymap(const std::filesystem::path& path, const ScalarField& f) {
  const int m = f.size();
  double vmax = 0.0;
  for (double v : f.data()) vmax = std::max(vmax, v);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  os << "P5\n" << m << ' ' << m << "\n255\n";
  for (int k = m - 1; k >= 0; --k)
    for (int i = 0; i < m; ++i) {
      const double t = vmax > 0.0 ? std::clamp(f(i, k) / vmax, 0.0, 1.0) : 0.0;
      os.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
    }
  if (!os) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

struct MetricsRow {
  int step = 0;
  double time = 0.0;
  int population = 0;
  double mass = 0.0;
  double mass_exited_cum = 0.0;
  double mass_injected_cum = 0.0;
  double max_density = 0.0;
  double cfl_ratio = 0.0;
  std::size_t guarded_cells = 0;
};

class MetricsWriter {
 public:
  static constexpr const char* header =
      "step,time,pop,mass,mass_exited_cum,mass_injected_cum,max_density,cfl_ratio,guarded_cells";

  explicit MetricsWriter(std::ostream& os) : os_(os) { os_ << header << '\n'; }

  void write(const MetricsRow& r) {
    os_ << r.step << ',' << format_double(r.time) << ',' << r.population << ','
        << format_double(r.mass) << ',' << format_double(r.mass_exited_cum) << ','
        << format_double(r.mass_injected_cum) << ',' << format_double(r.max_density) << ','
        << format_double(r.cfl_ratio) << ',' << r.guarded_cells << '\n';
    if (!os_) throw Error(ErrorCode::io_error, "metrics write failed");
  }

  void truncate(int step, const std::string& reason) {
    os_ << "# truncated at step " << step << ": " << reason << '\n';
  }

 private:
  std::ostream& os_;
};

inline void write_metrics(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  MetricsWriter w(os);
  for (const auto& r : rows) w.write(r);
}

}  // namespace crowd
