#include "rrf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rrf::linalg {

namespace {

// Householder reduction of the symmetric matrix stored in v to tridiagonal form.
// On return d holds the diagonal, e the subdiagonal (e[0] unused) and v the
// accumulated orthogonal transformation.
void tridiagonalize(DenseMatrix& v, Vector& d, Vector& e) {
  const Index n = v.rows();
  for (Index j = 0; j < n; ++j) d[j] = v(n - 1, j);

  for (Index i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (Index k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (Index j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (Index k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (Index j = 0; j < i; ++j) e[j] = 0.0;

      for (Index j = 0; j < i; ++j) {
        f = d[j];
        v(j, i) = f;
        g = e[j] + v(j, j) * f;
        for (Index k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d[k];
          e[k] += v(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (Index j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (Index j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (Index j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (Index k = j; k <= i - 1; ++k) v(k, j) -= (f * e[k] + g * d[k]);
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (Index i = 0; i < n - 1; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (Index k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
      for (Index j = 0; j <= i; ++j) {
        double g = 0.0;
        for (Index k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (Index k = 0; k <= i; ++k) v(k, j) -= g * d[k];
      }
    }
    for (Index k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (Index j = 0; j < n; ++j) {
    d[j] = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit QL iteration on the tridiagonal matrix (d, e), accumulating rotations into v.
void tridiagonal_ql(Vector& d, Vector& e, DenseMatrix& v, bool accumulate) {
  const Index n = d.size();
  for (Index i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  constexpr double eps = std::numeric_limits<double>::epsilon();
  const Index max_iterations = 60 * std::max<Index>(n, 1);
  Index total_iterations = 0;
  double f = 0.0;
  double tst1 = 0.0;

  for (Index l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    Index m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      do {
        if (++total_iterations > max_iterations) {
          throw ConvergenceError("symmetric eigensolver: no convergence after " +
                                 std::to_string(total_iterations) + " QL iterations");
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (Index i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (Index i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          if (accumulate) {
            for (Index k = 0; k < n; ++k) {
              h = v(k, i + 1);
              v(k, i + 1) = s * v(k, i) + c * h;
              v(k, i) = c * v(k, i) - s * h;
            }
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

EigenResult symmetric_eig(const Eigen::Ref<const DenseMatrix>& a, bool compute_vectors) {
  if (a.rows() != a.cols()) throw DimensionError("symmetric_eig: matrix not square");
  if (!all_finite(a)) throw DomainError("symmetric_eig: non-finite entries");
  const Index n = a.rows();
  EigenResult out;
  if (n == 0) return out;

  DenseMatrix v = 0.5 * (a + a.transpose());
  Vector d(n), e(n);
  tridiagonalize(v, d, e);
  tridiagonal_ql(d, e, v, compute_vectors);

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return d[i] > d[j]; });

  out.values.resize(n);
  if (compute_vectors) out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    out.values[k] = d[order[static_cast<std::size_t>(k)]];
    if (compute_vectors) out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

EigenResult generalized_symmetric_eig(const Eigen::Ref<const DenseMatrix>& a,
                                      const Eigen::Ref<const DenseMatrix>& m) {
  if (a.rows() != a.cols() || m.rows() != m.cols() || a.rows() != m.rows()) {
    throw DimensionError("generalized_symmetric_eig: incompatible dimensions");
  }
  if (!all_finite(a) || !all_finite(m)) throw DomainError("generalized_symmetric_eig: non-finite");

  const DenseMatrix msym = 0.5 * (m + m.transpose());
  Eigen::LLT<DenseMatrix> chol(msym);
  if (chol.info() != Eigen::Success) {
    throw DomainError("generalized_symmetric_eig: M is not positive definite");
  }
  // A~ = L^-1 A L^-T
  DenseMatrix tmp = chol.matrixL().solve(a);
  DenseMatrix reduced = chol.matrixL().solve(tmp.transpose()).transpose();

  EigenResult std_result = symmetric_eig(reduced, true);
  EigenResult out;
  out.values = std::move(std_result.values);
  out.vectors = chol.matrixU().solve(std_result.vectors);
  return out;
}

}  // namespace rrf::linalg
