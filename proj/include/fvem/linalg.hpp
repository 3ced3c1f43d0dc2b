/**
 * @file linalg.hpp
 * @brief Compressed-row sparse matrices with a banded LU direct solver and a
 * Jacobi-preconditioned BiCGStab iteration for nonsymmetric systems.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace fvem::linalg {

using Vector = std::vector<double>;

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<std::size_t> cols, std::vector<double> vals)
      : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), vals_(std::move(vals)) {}

  std::size_t size() const { return n_; }
  std::size_t nonzeros() const { return vals_.size(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> cols() const { return cols_; }
  std::span<const double> values() const { return vals_; }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {vals_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }

  /// Stored value at (i, j), zero when absent.
  double at(std::size_t i, std::size_t j) const {
    const auto c = row_cols(i);
    const auto it = std::lower_bound(c.begin(), c.end(), j);
    if (it == c.end() || *it != j) return 0.0;
    return vals_[row_ptr_[i] + static_cast<std::size_t>(it - c.begin())];
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k] * x[cols_[k]];
      y[i] = s;
    }
  }

  Vector operator*(std::span<const double> x) const {
    Vector y(n_);
    multiply(x, y);
    return y;
  }

  /// (lower, upper) bandwidth.
  std::pair<std::size_t, std::size_t> bandwidth() const {
    std::size_t kl = 0, ku = 0;
    for (std::size_t i = 0; i < n_; ++i)
      for (const std::size_t j : row_cols(i)) {
        if (j < i) kl = std::max(kl, i - j);
        else ku = std::max(ku, j - i);
      }
    return {kl, ku};
  }

  Vector diagonal() const {
    Vector d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) d[i] = at(i, i);
    return d;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> vals_;
};

/// Builds an n x n matrix; duplicate (row, col) entries are summed.
inline SparseMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets) {
  for (const auto& t : triplets)
    if (t.row >= n || t.col >= n)
      throw std::out_of_range("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                              ") outside a matrix of size " + std::to_string(n));
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  cols.reserve(triplets.size());
  vals.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (!cols.empty() && k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      vals.back() += t.value;
      continue;
    }
    cols.push_back(t.col);
    vals.push_back(t.value);
    ++row_ptr[t.row + 1];
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return {n, std::move(row_ptr), std::move(cols), std::move(vals)};
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// ||b - A x|| / ||b||, or ||b - A x|| when b = 0.
inline double relative_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b) {
  Vector r = a * x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const double nb = norm2(b);
  const double nr = norm2(r);
  return nb > 0.0 ? nr / nb : nr;
}

// ---------------------------------------------------------------------------
// Banded LU with partial pivoting (column-major band storage as in LAPACK gbtrf).

class BandedLU {
 public:
  class SingularPivot : public std::runtime_error {
   public:
    explicit SingularPivot(std::size_t k)
        : std::runtime_error("banded LU: zero pivot in column " + std::to_string(k)), column(k) {}
    std::size_t column;
  };

  explicit BandedLU(const SparseMatrix& a) : n_(a.size()) {
    std::tie(kl_, ku_) = a.bandwidth();
    kv_ = kl_ + ku_;
    ld_ = 2 * kl_ + ku_ + 1;
    band_.assign(ld_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto c = a.row_cols(i);
      const auto v = a.row_values(i);
      for (std::size_t k = 0; k < c.size(); ++k) ref(i, c[k]) = v[k];
    }
    factor();
  }

  std::size_t lower() const { return kl_; }
  std::size_t upper() const { return ku_; }

  Vector solve(std::span<const double> b) const {
    Vector x(b.begin(), b.end());
    // L y = P b
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t p = piv_[k];
      if (p != k) std::swap(x[k], x[p]);
      const std::size_t km = std::min(kl_, n_ - 1 - k);
      for (std::size_t i = 1; i <= km; ++i) x[k + i] -= get(k + i, k) * x[k];
    }
    // U x = y
    for (std::size_t k = n_; k-- > 0;) {
      x[k] /= get(k, k);
      const std::size_t lo = k > kv_ ? k - kv_ : 0;
      for (std::size_t i = lo; i < k; ++i) x[i] -= get(i, k) * x[k];
    }
    return x;
  }

 private:
  double& ref(std::size_t i, std::size_t j) { return band_[j * ld_ + (kv_ + i - j)]; }
  double get(std::size_t i, std::size_t j) const { return band_[j * ld_ + (kv_ + i - j)]; }

  void factor() {
    piv_.resize(n_);
    std::size_t ju = 0;
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t km = std::min(kl_, n_ - 1 - k);
      std::size_t p = k;
      double best = std::abs(get(k, k));
      for (std::size_t i = 1; i <= km; ++i) {
        const double v = std::abs(get(k + i, k));
        if (v > best) {
          best = v;
          p = k + i;
        }
      }
      piv_[k] = p;
      if (best == 0.0) throw SingularPivot(k);
      ju = std::max(ju, std::min(p + ku_, n_ - 1));
      if (p != k)
        for (std::size_t j = k; j <= ju; ++j) std::swap(ref(k, j), ref(p, j));
      const double inv = 1.0 / get(k, k);
      for (std::size_t i = 1; i <= km; ++i) ref(k + i, k) *= inv;
      for (std::size_t j = k + 1; j <= ju; ++j) {
        const double akj = get(k, j);
        if (akj == 0.0) continue;
        double* col = &band_[j * ld_ + (kv_ + k - j)];
        const double* l = &band_[k * ld_ + kv_];
        for (std::size_t i = 1; i <= km; ++i) col[i] -= l[i] * akj;
      }
    }
  }

  std::size_t n_;
  std::size_t kl_ = 0, ku_ = 0, kv_ = 0, ld_ = 1;
  std::vector<double> band_;
  std::vector<std::size_t> piv_;
};

// ---------------------------------------------------------------------------

enum class Method { automatic, direct, bicgstab };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::automatic: return "auto";
    case Method::direct: return "direct";
    case Method::bicgstab: return "bicgstab";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "auto") return Method::automatic;
  if (s == "direct") return Method::direct;
  if (s == "bicgstab") return Method::bicgstab;
  throw std::invalid_argument("unknown solver '" + s + "' (expected auto, direct or bicgstab)");
}

struct SolveOptions {
  Method method = Method::automatic;
  double tol = 1e-12;
  std::size_t max_iterations = 0;     // 0 selects 10 n
  double direct_size_cap = 2.5e7;     // band storage entries allowed for the direct path
};

struct SolveReport {
  Method method = Method::automatic;  // the path actually taken
  std::size_t iterations = 0;
  double relative_residual = 0.0;     // recomputed from the returned x
  double seconds = 0.0;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double best_residual)
      : std::runtime_error(what + " (best relative residual " + std::to_string(best_residual) + ")"),
        best_residual(best_residual) {}
  double best_residual;
};

namespace detail {

// Right-preconditioned BiCGStab with M = diag(A); restarts from the true
// residual when the recurrence stalls. Returns the iteration count.
inline std::size_t bicgstab(const SparseMatrix& a, std::span<const double> b, Vector& x, double tol,
                            std::size_t max_iter) {
  const std::size_t n = a.size();
  Vector inv_diag = a.diagonal();
  for (double& d : inv_diag) d = d != 0.0 ? 1.0 / d : 1.0;
  const double nb = norm2(b) > 0.0 ? norm2(b) : 1.0;

  Vector r(n), r_hat(n), p(n), v(n), s(n), t(n), y(n), z(n);
  std::size_t it = 0;
  double best = std::numeric_limits<double>::infinity();
  Vector best_x = x;

  while (it < max_iter) {
    a.multiply(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double res = norm2(r) / nb;
    if (res < best) {
      best = res;
      best_x = x;
    }
    if (res <= tol) return it;
    r_hat = r;
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    bool restart = false;
    while (it < max_iter && !restart) {
      ++it;
      const double rho_new = dot(r_hat, r);
      if (std::abs(rho_new) < 1e-300 || omega == 0.0) {
        restart = true;
        break;
      }
      const double beta = (rho_new / rho) * (alpha / omega);
      rho = rho_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
      for (std::size_t i = 0; i < n; ++i) y[i] = inv_diag[i] * p[i];
      a.multiply(y, v);
      const double rv = dot(r_hat, v);
      if (rv == 0.0) {
        restart = true;
        break;
      }
      alpha = rho / rv;
      for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
      if (norm2(s) / nb <= 0.1 * tol) {
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha * y[i];
        restart = true;  // verify against the true residual
        break;
      }
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * s[i];
      a.multiply(z, t);
      const double tt = dot(t, t);
      omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * y[i] + omega * z[i];
        r[i] = s[i] - omega * t[i];
      }
      if (norm2(r) / nb <= 0.1 * tol) restart = true;
    }
  }
  a.multiply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  const double res = norm2(r) / nb;
  if (res <= tol) return it;
  if (best < res) x = best_x;
  throw SolverError("BiCGStab did not converge in " + std::to_string(max_iter) + " iterations", std::min(best, res));
}

}  // namespace detail

/// Solves A x = b to the requested relative residual.
inline std::pair<Vector, SolveReport> solve(const SparseMatrix& a, std::span<const double> b,
                                            const SolveOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = a.size();
  if (b.size() != n) throw std::invalid_argument("solve: right-hand side has the wrong length");
  SolveReport rep;
  Vector x(n, 0.0);

  Method m = opts.method;
  if (m == Method::automatic) {
    const auto [kl, ku] = a.bandwidth();
    const double storage = static_cast<double>(n) * static_cast<double>(2 * kl + ku + 1);
    m = storage <= opts.direct_size_cap ? Method::direct : Method::bicgstab;
  }
  rep.method = m;

  if (n > 0) {
    if (m == Method::direct) {
      const BandedLU lu(a);
      x = lu.solve(b);
      // one step of iterative refinement
      Vector r = a * x;
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
      const Vector dx = lu.solve(r);
      for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
    } else {
      const std::size_t max_iter = opts.max_iterations ? opts.max_iterations : 10 * n;
      rep.iterations = detail::bicgstab(a, b, x, opts.tol, max_iter);
    }
  }

  rep.relative_residual = relative_residual(a, x, b);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!(rep.relative_residual <= opts.tol))
    throw SolverError(std::string(to_string(m)) + " solve missed the residual tolerance", rep.relative_residual);
  return {std::move(x), rep};
}

}  // namespace fvem::linalg
