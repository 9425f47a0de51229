#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>
#include <span>

#include <Eigen/Eigenvalues>

#include "modtune/graph.hpp"
#include "modtune/rng.hpp"

namespace modtune {

/// Matrix-free modularity matrix of one community C:
///   B^(C)_ij = B_ij - delta_ij * sum_{k in C} B_ik,   B_ij = A_ij - k_i k_j / 2m.
/// Rows and columns are indexed by position in `members`.
class CommunityOperator {
 public:
  CommunityOperator(const Graph& g, std::span<const int> members)
      : members_(members.begin(), members.end()), two_m_(2.0 * static_cast<double>(g.edge_count())) {
    if (members_.empty()) throw std::invalid_argument("community has no members");
    const int n = size();
    std::vector<int> local(g.node_count(), -1);
    for (int i = 0; i < n; ++i) local[members_[i]] = i;

    offsets_.assign(n + 1, 0);
    degree_.resize(n);
    internal_degree_.resize(n);
    for (int i = 0; i < n; ++i) {
      const int v = members_[i];
      degree_[i] = g.degree(v);
      degree_sum_ += degree_[i];
      for (int u : g.neighbors(v))
        if (local[u] >= 0) adj_.push_back(local[u]);
      internal_degree_[i] = static_cast<std::int64_t>(adj_.size()) - offsets_[i];
      offsets_[i + 1] = static_cast<std::int64_t>(adj_.size());
    }
    row_sum_.resize(n);
    for (int i = 0; i < n; ++i)
      row_sum_[i] = static_cast<double>(internal_degree_[i]) -
                    static_cast<double>(degree_[i]) * static_cast<double>(degree_sum_) / two_m_;
  }

  int size() const noexcept { return static_cast<int>(members_.size()); }
  std::span<const int> members() const noexcept { return members_; }
  std::int64_t edge_count() const noexcept { return static_cast<std::int64_t>(two_m_ / 2); }
  std::int64_t degree(int i) const noexcept { return degree_[i]; }
  /// Number of neighbours of member i inside the community.
  std::int64_t internal_degree(int i) const noexcept { return internal_degree_[i]; }
  std::int64_t degree_sum() const noexcept { return degree_sum_; }
  std::span<const int> local_neighbors(int i) const noexcept {
    return {adj_.data() + offsets_[i], static_cast<std::size_t>(offsets_[i + 1] - offsets_[i])};
  }

  /// y = (B^(C) + shift*I) x in O(m_C + |C|).
  void apply(std::span<const double> x, std::span<double> y, double shift = 0.0) const {
    const int n = size();
    double kx = 0.0;
    for (int i = 0; i < n; ++i) kx += static_cast<double>(degree_[i]) * x[i];
    const double scale = kx / two_m_;
    for (int i = 0; i < n; ++i) {
      double ax = 0.0;
      for (int j : local_neighbors(i)) ax += x[j];
      y[i] = ax - static_cast<double>(degree_[i]) * scale + (shift - row_sum_[i]) * x[i];
    }
  }

  std::vector<double> apply(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != size()) throw std::invalid_argument("vector size mismatch");
    std::vector<double> y(x.size());
    apply(x, y);
    return y;
  }

 private:
  std::vector<int> members_;
  double two_m_;
  std::vector<std::int64_t> offsets_;
  std::vector<int> adj_;
  std::vector<std::int64_t> degree_;
  std::vector<std::int64_t> internal_degree_;
  std::vector<double> row_sum_;
  std::int64_t degree_sum_ = 0;
};

inline std::vector<double> apply_bc(const Graph& g, std::span<const int> members,
                                    std::span<const double> x) {
  return CommunityOperator(g, members).apply(x);
}

struct EigenPair {
  std::vector<double> vector;  // unit norm
  double value = 0.0;
  double residual = 0.0;       // ||B^(C) U - value * U||_2
  int iterations = 0;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(double best_residual, int iterations)
      : std::runtime_error("eigensolver did not converge after " + std::to_string(iterations) +
                           " iterations (best residual " + format(best_residual) + ")"),
        best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  static std::string format(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
  }
  double best_residual_;
};

struct EigenOptions {
  double tol = 1e-10;           // relative eigenvalue change between checks
  double residual_tol = 1e-8;
  int max_iters = 0;            // operator applications; 0: max(1000, 100 * |C|)
  int krylov_dim = 80;          // Lanczos basis size before a restart
};

namespace detail {

inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void random_unit(std::vector<double>& x, Rng& rng) {
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  const double nrm = norm2(x);
  for (auto& v : x) v /= nrm;
}

// Largest eigenvalue of the k x k symmetric tridiagonal matrix (alpha, beta)
// and its unit eigenvector. Eigenvalues come from Eigen; the vector from
// inverse iteration with T - sigma I for sigma just above the top
// eigenvalue, which is negative definite, so plain LDL^T is stable.
inline double top_ritz(const std::vector<double>& alpha, const std::vector<double>& beta, int k,
                       std::vector<double>& s) {
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), k);
  Eigen::VectorXd off = Eigen::Map<const Eigen::VectorXd>(beta.data(), k - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  const double theta = es.eigenvalues()(k - 1);
  double scale = std::abs(theta);
  for (int i = 0; i < k; ++i) scale = std::max(scale, std::abs(alpha[i]));
  const double sigma = theta + 1e-10 * std::max(scale, 1.0);

  std::vector<double> d(k), l(std::max(k - 1, 0));
  d[0] = alpha[0] - sigma;
  for (int i = 1; i < k; ++i) {
    l[i - 1] = beta[i - 1] / d[i - 1];
    d[i] = alpha[i] - sigma - l[i - 1] * beta[i - 1];
  }
  s.assign(k, 1.0);
  for (int round = 0; round < 3; ++round) {
    for (int i = 1; i < k; ++i) s[i] -= l[i - 1] * s[i - 1];
    for (int i = 0; i < k; ++i) s[i] /= d[i];
    for (int i = k - 2; i >= 0; --i) s[i] -= l[i] * s[i + 1];
    double nrm = 0.0;
    for (double v : s) nrm += v * v;
    nrm = std::sqrt(nrm);
    for (double& v : s) v /= nrm;
  }
  return theta;
}

inline double residual_of(const CommunityOperator& op, std::span<const double> u, double value) {
  std::vector<double> y(u.size());
  op.apply(u, y);
  double r2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = y[i] - value * u[i];
    r2 += d * d;
  }
  return std::sqrt(r2);
}

}  // namespace detail

/// Eigenpair of the algebraically largest eigenvalue of B^(C).
///
/// Explicitly restarted Lanczos with full reorthogonalisation, started from a
/// random unit vector drawn from `rng`. Each cycle builds a Krylov basis of
/// up to opt.krylov_dim vectors, takes the top Ritz pair of the tridiagonal
/// projection and restarts from its Ritz vector. The Krylov space contains
/// every power-iteration iterate, so this finds the same eigenpair, but the
/// near-degenerate top of the spectrum typical of large sparse communities
/// costs tens of operator applications instead of thousands. The algebraic
/// ordering also removes the need for a spectral shift.
///
/// Converged when the explicit residual is below opt.residual_tol and the
/// Ritz value moved by less than opt.tol (relative) since the previous
/// check. Throws ConvergenceError after opt.max_iters operator applications.
inline EigenPair leading_eigenpair(const CommunityOperator& op, Rng& rng,
                                   const EigenOptions& opt = {}) {
  const int n = op.size();
  EigenPair out;
  if (n == 1) {
    out.vector = {1.0};
    out.value = 0.0;
    return out;
  }
  const int max_iters = opt.max_iters > 0 ? opt.max_iters : std::max(1000, 100 * n);
  const int kmax = std::max(2, std::min(n, opt.krylov_dim));

  std::vector<double> start(n);
  detail::random_unit(start, rng);
  std::vector<std::vector<double>> V(kmax + 1, std::vector<double>(n));
  std::vector<double> alpha, beta, w(n), ritz(n);
  double best_residual = INFINITY;
  double prev_value = NAN;
  int applied = 0;

  while (applied < max_iters) {
    V[0] = start;
    alpha.clear();
    beta.clear();
    int k = 0;
    bool invariant = false;
    std::vector<double> s;
    double theta = 0.0;
    while (k < kmax && applied < max_iters) {
      op.apply(V[k], w);
      ++applied;
      const double a = detail::dot(w, V[k]);
      alpha.push_back(a);
      // Two rounds of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j <= k; ++j) {
          const double c = detail::dot(w, V[j]);
          for (int i = 0; i < n; ++i) w[i] -= c * V[j][i];
        }
      const double b = detail::norm2(w);
      ++k;

      const bool check = k == kmax || k % 8 == 0 || b <= 1e-12 * std::max(1.0, std::abs(a));
      if (!check && applied < max_iters) {
        beta.push_back(b);
        for (int i = 0; i < n; ++i) V[k][i] = w[i] / b;
        continue;
      }
      theta = detail::top_ritz(alpha, beta, k, s);
      invariant = b <= 1e-12 * std::max(1.0, std::abs(theta));
      // Residual estimate of the Ritz pair: |b * last component|.
      if (invariant || std::abs(b * s[k - 1]) < 0.5 * opt.residual_tol || k == kmax ||
          applied >= max_iters)
        break;
      beta.push_back(b);
      for (int i = 0; i < n; ++i) V[k][i] = w[i] / b;
    }

    std::fill(ritz.begin(), ritz.end(), 0.0);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < n; ++i) ritz[i] += s[j] * V[j][i];
    const double nrm = detail::norm2(ritz);
    for (auto& v : ritz) v /= nrm;
    const double res = detail::residual_of(op, ritz, theta);
    best_residual = std::min(best_residual, res);
    const bool settled = invariant || (!std::isnan(prev_value) &&
                                       std::abs(theta - prev_value) <=
                                           opt.tol * std::max(std::abs(theta), 1.0)) ||
                         k == n;
    if (res < opt.residual_tol && (settled || res < 1e-3 * opt.residual_tol)) {
      out.vector = ritz;
      out.value = theta;
      out.residual = res;
      out.iterations = applied;
      return out;
    }
    prev_value = theta;
    start = ritz;
  }
  throw ConvergenceError(best_residual, applied);
}

inline EigenPair leading_eigenpair(const Graph& g, std::span<const int> members, double tol,
                                   int max_iters, std::uint64_t seed) {
  Rng rng(seed);
  EigenOptions opt;
  opt.tol = tol;
  opt.max_iters = max_iters;
  return leading_eigenpair(CommunityOperator(g, members), rng, opt);
}

/// Vertices of a regular simplex centred at the origin: q unit vectors in
/// q-1 dimensions with (q-1) P_i.P_j + 1 = q delta_ij.
struct SimplexSet {
  int q = 2;
  std::vector<std::vector<double>> vertices;

  double dot(int i, int j) const {
    return std::inner_product(vertices[i].begin(), vertices[i].end(), vertices[j].begin(), 0.0);
  }
};

namespace detail {

// Recursive construction: the first vertex is e_1, the rest sit at
// x_1 = -1/(q-1) on a scaled (q-1)-simplex in the remaining coordinates.
inline std::vector<std::vector<double>> simplex_raw(int q) {
  if (q == 2) return {{1.0}, {-1.0}};
  auto sub = simplex_raw(q - 1);
  const double head = -1.0 / (q - 1);
  const double scale = std::sqrt(1.0 - head * head);
  std::vector<std::vector<double>> out;
  std::vector<double> first(q - 1, 0.0);
  first[0] = 1.0;
  out.push_back(first);
  for (auto& s : sub) {
    std::vector<double> v{head};
    for (double c : s) v.push_back(scale * c);
    out.push_back(std::move(v));
  }
  return out;
}

inline int positive_components(const std::vector<double>& v) {
  return static_cast<int>(std::count_if(v.begin(), v.end(), [](double c) { return c > 1e-12; }));
}

}  // namespace detail

/// Simplex vertices ordered by increasing number of positive components
/// (ties: lexicographically ascending). q = 2 gives {-1, +1}; q = 3 gives
/// (-1/2,-sqrt3/2), (-1/2,sqrt3/2), (1,0).
inline SimplexSet simplex_vertices(int q) {
  if (q < 2) throw std::invalid_argument("simplex needs q >= 2");
  SimplexSet s;
  s.q = q;
  s.vertices = detail::simplex_raw(q);
  std::stable_sort(s.vertices.begin(), s.vertices.end(), [](const auto& a, const auto& b) {
    const int pa = detail::positive_components(a);
    const int pb = detail::positive_components(b);
    if (pa != pb) return pa < pb;
    return a < b;
  });
  return s;
}

/// Labels of one community's q-way split. labels[i] indexes the simplex
/// vertex (equivalently the sub-community) of the i-th member.
struct SplitState {
  int q = 2;
  std::vector<int> labels;

  bool uniform() const {
    return std::adjacent_find(labels.begin(), labels.end(), std::not_equal_to<>()) == labels.end();
  }
  friend bool operator==(const SplitState&, const SplitState&) = default;
};

/// Gaussian CDF with mean 0 and variance 1/n: the large-n limit of the
/// component distribution of a random unit vector in R^n.
inline double component_cdf(double x, int n) {
  return 0.5 * std::erfc(-x * std::sqrt(static_cast<double>(n)) / std::sqrt(2.0));
}

/// Initial q-section guess: component i goes to vertex j (0-based) when
/// j/q <= F(U_i) < (j+1)/q.
inline SplitState assignment_thresholds(std::span<const double> u, int q, int n_full) {
  if (q < 2) throw std::invalid_argument("q must be >= 2");
  SplitState s;
  s.q = q;
  s.labels.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double f = component_cdf(u[i], n_full);
    int j = std::clamp(static_cast<int>(std::floor(f * q)), 0, q - 1);
    // F(x) < 1/2 exactly when x < 0; keep that even where erfc rounds to 1.
    if (u[i] < 0.0) j = std::min(j, (q + 1) / 2 - 1);
    else j = std::max(j, q / 2);
    s.labels[i] = j;
  }
  return s;
}

}  // namespace modtune
