#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crowd {

enum class ErrorCode {
  out_of_bounds,
  overlap_conflict,
  disconnected_domain,
  non_convergence,
  no_target,
  dimension_mismatch,
  cfl_violation,
  negative_density,
  zero_mass,
  parse_error,
  validation_error,
  io_error,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::out_of_bounds: return "OutOfBounds";
    case ErrorCode::overlap_conflict: return "OverlapConflict";
    case ErrorCode::disconnected_domain: return "DisconnectedDomain";
    case ErrorCode::non_convergence: return "NonConvergence";
    case ErrorCode::no_target: return "NoTarget";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::cfl_violation: return "CflViolation";
    case ErrorCode::negative_density: return "NegativeDensity";
    case ErrorCode::zero_mass: return "ZeroMass";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::validation_error: return "ValidationError";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

/// Cell address: `i` is the column (x direction), `k` the row (y direction).
struct CellIndex {
  int i = 0;
  int k = 0;

  friend bool operator==(CellIndex, CellIndex) = default;
  friend auto operator<=>(CellIndex, CellIndex) = default;
};

/// Dense m-by-m array over the grid cells, stored row-major with row k = y index.
template <typename T>
class Field {
 public:
  Field() = default;
  explicit Field(int m, T fill = T{}) : m_(m), data_(static_cast<std::size_t>(m) * m, fill) {}

  int size() const noexcept { return m_; }
  std::size_t cell_count() const noexcept { return data_.size(); }

  T& operator()(int i, int k) { return data_[offset(i, k)]; }
  const T& operator()(int i, int k) const { return data_[offset(i, k)]; }
  T& operator[](CellIndex c) { return (*this)(c.i, c.k); }
  const T& operator[](CellIndex c) const { return (*this)(c.i, c.k); }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool contains(int i, int k) const noexcept { return i >= 0 && k >= 0 && i < m_ && k < m_; }

  friend bool operator==(const Field&, const Field&) = default;

 private:
  std::size_t offset(int i, int k) const noexcept {
    return static_cast<std::size_t>(k) * static_cast<std::size_t>(m_) + static_cast<std::size_t>(i);
  }

  int m_ = 0;
  std::vector<T> data_;
};

using ScalarField = Field<double>;
using VectorField = Field<Vec2>;
using Mask = Field<std::uint8_t>;  // vector<bool> has no element references

}  // namespace crowd
