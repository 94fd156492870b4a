#include "mdsl/noniid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "mdsl/errors.hpp"
#include "mdsl/rng.hpp"

namespace mdsl {

namespace {

constexpr double kMassTol = 1e-9;

void validate_distribution(const std::vector<double>& p, const char* name) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw DomainError(std::string(name) + " has a negative entry");
    sum += x;
  }
  if (std::abs(sum - 1.0) > kMassTol)
    throw DomainError(std::string(name) + " sums to " + std::to_string(sum) + ", expected 1");
}

std::vector<double> normalized(const std::vector<double>& p) {
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] / sum;
  return out;
}

}  // namespace

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> s(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s[static_cast<std::size_t>(i)] += at(i, j);
  return s;
}

std::vector<double> TransportPlan::col_sums() const {
  std::vector<double> s(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s[static_cast<std::size_t>(j)] += at(i, j);
  return s;
}

double wasserstein_1d(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw DomainError("distribution length mismatch");
  if (p.empty()) throw DomainError("empty distributions");
  validate_distribution(p, "p");
  validate_distribution(q, "q");
  const std::vector<double> pn = normalized(p);
  const std::vector<double> qn = normalized(q);

  double cdf_p = 0.0, cdf_q = 0.0, dist = 0.0;
  for (std::size_t k = 0; k + 1 < pn.size(); ++k) {
    cdf_p += pn[k];
    cdf_q += qn[k];
    dist += std::abs(cdf_p - cdf_q);
  }
  return dist;
}

std::pair<double, TransportPlan> wasserstein_lp_oracle(const std::vector<double>& p,
                                                       const std::vector<double>& q,
                                                       const std::vector<double>& cost) {
  const int L = static_cast<int>(p.size());
  if (q.size() != p.size()) throw DomainError("distribution length mismatch");
  if (p.empty()) throw DomainError("empty distributions");
  if (cost.size() != static_cast<std::size_t>(L) * static_cast<std::size_t>(L))
    throw DomainError("cost matrix must be L x L");
  for (double c : cost)
    if (!(c >= 0.0)) throw DomainError("cost matrix has a negative entry");
  validate_distribution(p, "p");
  validate_distribution(q, "q");

  std::vector<double> supply = normalized(p);
  std::vector<double> demand = normalized(q);
  TransportPlan plan;
  plan.n = L;
  plan.flow.assign(static_cast<std::size_t>(L) * L, 0.0);

  const auto c = [&](int i, int j) { return cost[static_cast<std::size_t>(i) * L + j]; };
  constexpr double kEps = 1e-15;
  const double inf = std::numeric_limits<double>::infinity();

  // Successive shortest augmenting paths on the bipartite residual graph.
  // Each augmentation exhausts a supply or a demand, so at most 2L rounds.
  for (int guard = 0; guard < 4 * L + 16; ++guard) {
    double remaining = 0.0;
    for (double s : supply) remaining += s;
    if (remaining <= 1e-12) break;

    // Bellman-Ford from all live supplies. Nodes 0..L-1 are supplies,
    // L..2L-1 demands; residual back-edges carry negative cost.
    const int V = 2 * L;
    std::vector<double> dist(static_cast<std::size_t>(V), inf);
    std::vector<int> parent(static_cast<std::size_t>(V), -1);
    for (int i = 0; i < L; ++i)
      if (supply[static_cast<std::size_t>(i)] > kEps) dist[static_cast<std::size_t>(i)] = 0.0;

    for (int it = 0; it < V; ++it) {
      bool changed = false;
      for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
          if (dist[static_cast<std::size_t>(i)] < inf &&
              dist[static_cast<std::size_t>(i)] + c(i, j) <
                  dist[static_cast<std::size_t>(L + j)] - 1e-18) {
            dist[static_cast<std::size_t>(L + j)] = dist[static_cast<std::size_t>(i)] + c(i, j);
            parent[static_cast<std::size_t>(L + j)] = i;
            changed = true;
          }
          if (plan.at(i, j) > kEps && dist[static_cast<std::size_t>(L + j)] < inf &&
              dist[static_cast<std::size_t>(L + j)] - c(i, j) <
                  dist[static_cast<std::size_t>(i)] - 1e-18) {
            dist[static_cast<std::size_t>(i)] = dist[static_cast<std::size_t>(L + j)] - c(i, j);
            parent[static_cast<std::size_t>(i)] = L + j;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }

    int best_demand = -1;
    for (int j = 0; j < L; ++j) {
      if (demand[static_cast<std::size_t>(j)] <= kEps) continue;
      if (dist[static_cast<std::size_t>(L + j)] == inf) continue;
      if (best_demand < 0 ||
          dist[static_cast<std::size_t>(L + j)] < dist[static_cast<std::size_t>(L + best_demand)])
        best_demand = j;
    }
    if (best_demand < 0) throw DomainError("infeasible marginals in transport program");

    // Walk back to a live supply, collecting the bottleneck.
    std::vector<int> path;  // node ids, demand-end first
    int node = L + best_demand;
    double bottleneck = demand[static_cast<std::size_t>(best_demand)];
    while (true) {
      path.push_back(node);
      const int prev = parent[static_cast<std::size_t>(node)];
      if (prev < 0) break;
      if (node >= L) {
        // forward edge prev -> node: unlimited capacity
      } else {
        // backward edge (prev = demand) -> node (supply): capacity = flow
        bottleneck = std::min(bottleneck, plan.at(node, prev - L));
      }
      node = prev;
    }
    bottleneck = std::min(bottleneck, supply[static_cast<std::size_t>(node)]);

    // Apply the augmentation along the path (stored demand-first).
    int cur = L + best_demand;
    while (parent[static_cast<std::size_t>(cur)] >= 0) {
      const int prev = parent[static_cast<std::size_t>(cur)];
      if (cur >= L)
        plan.at(prev, cur - L) += bottleneck;
      else
        plan.at(cur, prev - L) -= bottleneck;
      cur = prev;
    }
    supply[static_cast<std::size_t>(cur)] -= bottleneck;
    demand[static_cast<std::size_t>(best_demand)] -= bottleneck;
    if (supply[static_cast<std::size_t>(cur)] < kEps) supply[static_cast<std::size_t>(cur)] = 0.0;
    if (demand[static_cast<std::size_t>(best_demand)] < kEps)
      demand[static_cast<std::size_t>(best_demand)] = 0.0;
  }

  double total = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) total += plan.at(i, j) * c(i, j);
  return {total, plan};
}

NonIIDDegreeVector noniid_degree(const std::vector<LabelHistogram>& workers,
                                 const LabelHistogram& global, const DegreeCoefficients& coeffs) {
  if (workers.empty()) throw DomainError("no worker histograms");
  if (global.total() <= 0) throw DomainError("global histogram is empty");
  const int global_support = global.support();
  const std::vector<double> global_p = global.proportions();

  NonIIDDegreeVector out;
  out.raw.reserve(workers.size());
  out.components.reserve(workers.size());
  for (const auto& h : workers) {
    if (h.total() <= 0) throw DomainError("empty worker histogram");
    if (h.counts.size() != global.counts.size())
      throw DomainError("worker histogram class count differs from global");
    HeterogeneityComponents comp;
    comp.wd = wasserstein_1d(h.proportions(), global_p);
    comp.label_ratio = static_cast<double>(h.support()) / global_support;
    out.components.push_back(comp);
    out.raw.push_back(coeffs.beta1 * comp.label_ratio + coeffs.beta2 * comp.wd + coeffs.phi);
  }

  const auto [lo_it, hi_it] = std::minmax_element(out.raw.begin(), out.raw.end());
  const double lo = *lo_it, hi = *hi_it;
  out.eta.resize(out.raw.size());
  if (hi - lo < 1e-15) {
    // All raw scores equal (or a single worker): min-max scaling is
    // undefined, so every worker sits at 0.5.
    std::fill(out.eta.begin(), out.eta.end(), 0.5);
  } else {
    for (std::size_t i = 0; i < out.raw.size(); ++i) out.eta[i] = (out.raw[i] - lo) / (hi - lo);
  }
  return out;
}

namespace {

// Householder QR least squares for the n x 3 design matrix.
std::array<double, 3> qr_solve_3(std::vector<std::array<double, 3>> a, std::vector<double> y) {
  const std::size_t n = a.size();
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) throw SingularityError("design matrix is zero");

  for (std::size_t k = 0; k < 3; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += a[i][k] * a[i][k];
    norm = std::sqrt(norm);
    if (norm <= 1e-12 * scale)
      throw SingularityError("design matrix rank-deficient at column " + std::to_string(k));
    const double alpha = a[k][k] >= 0.0 ? -norm : norm;
    std::vector<double> v(n - k);
    v[0] = a[k][k] - alpha;
    for (std::size_t i = k + 1; i < n; ++i) v[i - k] = a[i][k];
    double beta = 0.0;
    for (double x : v) beta += x * x;
    if (beta > 0.0) {
      for (std::size_t col = k; col < 3; ++col) {
        double dot = 0.0;
        for (std::size_t i = k; i < n; ++i) dot += v[i - k] * a[i][col];
        const double f = 2.0 * dot / beta;
        for (std::size_t i = k; i < n; ++i) a[i][col] -= f * v[i - k];
      }
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += v[i - k] * y[i];
      const double f = 2.0 * dot / beta;
      for (std::size_t i = k; i < n; ++i) y[i] -= f * v[i - k];
    }
    a[k][k] = alpha;
  }

  std::array<double, 3> x{};
  for (int k = 2; k >= 0; --k) {
    double rhs = y[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < 3; ++j) rhs -= a[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
    const double diag = a[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
    if (std::abs(diag) <= 1e-12 * scale)
      throw SingularityError("design matrix rank-deficient at column " + std::to_string(k));
    x[static_cast<std::size_t>(k)] = rhs / diag;
  }
  return x;
}

}  // namespace

FitResult fit_coefficients(const std::vector<Observation>& observations, std::uint64_t seed) {
  const std::size_t n = observations.size();
  if (n < 4) throw DomainError("need at least 4 observations to fit");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto eng = make_engine(seed, rng_tag::kFitSplit);
  std::shuffle(order.begin(), order.end(), eng);

  const std::size_t n_test =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n))));
  const std::size_t n_train = n - n_test;

  std::vector<std::array<double, 3>> x_train;
  std::vector<double> y_train;
  x_train.reserve(n_train);
  y_train.reserve(n_train);
  for (std::size_t k = 0; k < n_train; ++k) {
    const Observation& o = observations[order[k]];
    x_train.push_back({o.label_ratio, o.wd, 1.0});
    y_train.push_back(o.accuracy);
  }

  const std::array<double, 3> beta = qr_solve_3(std::move(x_train), std::move(y_train));

  double y_mean = 0.0;
  for (std::size_t k = n_train; k < n; ++k) y_mean += observations[order[k]].accuracy;
  y_mean /= static_cast<double>(n_test);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = n_train; k < n; ++k) {
    const Observation& o = observations[order[k]];
    const double pred = beta[0] * o.label_ratio + beta[1] * o.wd + beta[2];
    ss_res += (o.accuracy - pred) * (o.accuracy - pred);
    ss_tot += (o.accuracy - y_mean) * (o.accuracy - y_mean);
  }

  FitResult res;
  res.coeffs = DegreeCoefficients{beta[0], beta[1], beta[2]};
  res.n_train = static_cast<int>(n_train);
  res.n_test = static_cast<int>(n_test);
  if (ss_tot < 1e-15)
    res.r_squared = ss_res < 1e-12 ? 1.0 : 0.0;
  else
    res.r_squared = 1.0 - ss_res / ss_tot;
  return res;
}

std::vector<Observation> read_observations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty observations file: " + path);
  if (line != "label_ratio,wd,accuracy")
    throw FormatError("bad observations header in " + path + ": " + line);
  std::vector<Observation> obs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    Observation o;
    double* slots[3] = {&o.label_ratio, &o.wd, &o.accuracy};
    for (int f = 0; f < 3; ++f) {
      if (!std::getline(row, field, ','))
        throw FormatError(path + ":" + std::to_string(lineno) + ": expected 3 fields");
      try {
        *slots[f] = std::stod(field);
      } catch (const std::exception&) {
        throw FormatError(path + ":" + std::to_string(lineno) + ": bad number '" + field + "'");
      }
    }
    obs.push_back(o);
  }
  return obs;
}

void write_observations_csv(const std::string& path, const std::vector<Observation>& obs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "label_ratio,wd,accuracy\n";
  char buf[128];
  for (const auto& o : obs) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", o.label_ratio, o.wd, o.accuracy);
    out << buf;
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace mdsl
