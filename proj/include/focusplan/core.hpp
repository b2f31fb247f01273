#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace focusplan {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Thrown when an input file cannot be parsed. Carries the offending
/// location so callers can point at the broken line.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        path_(path),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

/// Thrown when data violates a structural precondition (empty mesh,
/// mismatched list lengths, degenerate correspondences, ...).
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a file cannot be opened.
class FileError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Runs fn(i) for i in [0, n). Splits the range over worker threads when
// the machine has more than one core; falls back to a plain loop otherwise.
// fn must be safe to call concurrently on disjoint indices.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw <= 1 || n < 2048) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers = std::min<std::size_t>(hw, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

}  // namespace focusplan
