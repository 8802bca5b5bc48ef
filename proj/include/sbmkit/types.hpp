#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sbmkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// row-major for per-node row access in hot loops
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IntMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Soft assignment: n x K, rows nonnegative and summing to 1.
using SoftAssignment = RowMatrix;

// Hard node labeling. Labels are 0-based internally; file I/O is 1-based.
struct Labeling {
  std::vector<std::int32_t> labels;
  std::int32_t k = 0;

  std::int64_t n() const { return static_cast<std::int64_t>(labels.size()); }
  void validate() const;  // throws ConfigError on out-of-range entries
  std::vector<std::int64_t> class_counts() const;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
  int line_number;
  ParseError(const std::string& msg, int line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
};

struct EigNotConverged : std::runtime_error {
  double achieved_residual;
  int iterations;
  EigNotConverged(double resid, int iters)
      : std::runtime_error("eigensolver did not reach tolerance after " + std::to_string(iters) +
                           " iterations (residual " + std::to_string(resid) + ")"),
        achieved_residual(resid),
        iterations(iters) {}
};

}  // namespace sbmkit
