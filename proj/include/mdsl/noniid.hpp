#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mdsl/dataset.hpp"

namespace mdsl {

// Per-worker inputs to the non-i.i.d. degree.
struct HeterogeneityComponents {
  double wd = 0.0;           // Wasserstein distance to the global label distribution
  double label_ratio = 0.0;  // |L_i| / |L_g|
};

struct DegreeCoefficients {
  double beta1 = 0.286;  // weight on label diversity
  double beta2 = -0.07;  // weight on distribution difference
  double phi = 0.592;    // fitting residual
};

struct NonIIDDegreeVector {
  std::vector<double> eta;   // min-max normalized, one per worker
  std::vector<double> raw;   // pre-normalization scores
  std::vector<HeterogeneityComponents> components;
};

// Nonnegative L x L flow matrix whose row sums are p and column sums are q.
struct TransportPlan {
  int n = 0;
  std::vector<double> flow;  // row-major

  double at(int i, int j) const { return flow[static_cast<std::size_t>(i) * n + j]; }
  double& at(int i, int j) { return flow[static_cast<std::size_t>(i) * n + j]; }
  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
};

// Exact 1D optimal transport between two distributions over class indices
// with ground cost |i - j|: the sum of absolute CDF differences.
double wasserstein_1d(const std::vector<double>& p, const std::vector<double>& q);

// Exact discrete transport program for an arbitrary nonnegative cost matrix,
// solved by successive shortest paths. Returns the optimal cost and an
// achieving plan. Kept independent of wasserstein_1d so the two can check
// each other.
std::pair<double, TransportPlan> wasserstein_lp_oracle(const std::vector<double>& p,
                                                       const std::vector<double>& q,
                                                       const std::vector<double>& cost);

// raw_i = beta1 * |L_i|/|L_g| + beta2 * W_i + phi, min-max normalized across
// workers. When every raw score is equal the degenerate normalization yields
// 0.5 for all workers.
NonIIDDegreeVector noniid_degree(const std::vector<LabelHistogram>& workers,
                                 const LabelHistogram& global,
                                 const DegreeCoefficients& coeffs);

struct Observation {
  double label_ratio = 0.0;
  double wd = 0.0;
  double accuracy = 0.0;
};

struct FitResult {
  DegreeCoefficients coeffs;
  double r_squared = 0.0;
  int n_train = 0;
  int n_test = 0;
};

inline constexpr std::uint64_t kDefaultFitSeed = 1234;

// Ordinary least squares of accuracy on (label_ratio, wd, 1). Fits on a
// seeded 90% split and reports R^2 on the held-out 10%.
FitResult fit_coefficients(const std::vector<Observation>& observations,
                           std::uint64_t seed = kDefaultFitSeed);

// CSV with header `label_ratio,wd,accuracy`.
std::vector<Observation> read_observations_csv(const std::string& path);
void write_observations_csv(const std::string& path, const std::vector<Observation>& obs);

}  // namespace mdsl
