#include "persist/lp.hpp"

#include <cmath>
#include <limits>

namespace persist {

namespace {

constexpr double kEps = 1e-11;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Tableau layout follows the classic compact formulation: m constraint rows, one objective row
// and one phase-one row; column n+1 holds the right-hand side.
class Simplex {
 public:
  Simplex(const std::vector<Vec>& A, const Vec& b, const Vec& c)
      : m_(static_cast<int>(b.size())), n_(static_cast<int>(c.size())), N_(n_ + 1), B_(m_),
        D_(m_ + 2, Vec(n_ + 2, 0.0)) {
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) D_[i][j] = A[i][j];
    for (int i = 0; i < m_; ++i) {
      B_[i] = n_ + i;
      D_[i][n_] = -1.0;
      D_[i][n_ + 1] = b[i];
    }
    for (int j = 0; j < n_; ++j) {
      N_[j] = j;
      D_[m_][j] = -c[j];
    }
    N_[n_] = -1;
    D_[m_ + 1][n_] = 1.0;
  }

  LpResult solve() {
    int r = 0;
    for (int i = 1; i < m_; ++i)
      if (D_[i][n_ + 1] < D_[r][n_ + 1]) r = i;
    if (m_ > 0 && D_[r][n_ + 1] < -kEps) {
      pivot(r, n_);
      if (!run(2) || D_[m_ + 1][n_ + 1] < -kEps) return {LpStatus::infeasible, -kInf, {}};
      for (int i = 0; i < m_; ++i)
        if (B_[i] == -1) {
          int s = 0;
          for (int j = 1; j <= n_; ++j)
            if (s == -1 || better(D_[i][j], N_[j], D_[i][s], N_[s])) s = j;
          pivot(i, s);
        }
    }
    const bool ok = run(1);
    LpResult res;
    res.x.assign(static_cast<std::size_t>(n_), 0.0);
    for (int i = 0; i < m_; ++i)
      if (B_[i] < n_ && B_[i] >= 0) res.x[B_[i]] = D_[i][n_ + 1];
    res.status = ok ? LpStatus::optimal : LpStatus::unbounded;
    res.value = ok ? D_[m_][n_ + 1] : kInf;
    return res;
  }

 private:
  static bool better(double v1, int id1, double v2, int id2) {
    return v1 < v2 || (v1 == v2 && id1 < id2);
  }

  void pivot(int r, int s) {
    const double inv = 1.0 / D_[r][s];
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == r || std::abs(D_[i][s]) <= kEps) continue;
      const double f = D_[i][s] * inv;
      for (int j = 0; j < n_ + 2; ++j) D_[i][j] -= D_[r][j] * f;
      D_[i][s] = D_[r][s] * f;
    }
    for (int j = 0; j < n_ + 2; ++j)
      if (j != s) D_[r][j] *= inv;
    for (int i = 0; i < m_ + 2; ++i)
      if (i != r) D_[i][s] *= -inv;
    D_[r][s] = inv;
    std::swap(B_[r], N_[s]);
  }

  bool run(int phase) {
    const int x = m_ + phase - 1;
    for (;;) {
      int s = -1;
      for (int j = 0; j <= n_; ++j)
        if (N_[j] != -phase && (s == -1 || better(D_[x][j], N_[j], D_[x][s], N_[s]))) s = j;
      if (D_[x][s] >= -kEps) return true;
      int r = -1;
      for (int i = 0; i < m_; ++i) {
        if (D_[i][s] <= kEps) continue;
        if (r == -1) {
          r = i;
          continue;
        }
        const double lhs = D_[i][n_ + 1] / D_[i][s], rhs = D_[r][n_ + 1] / D_[r][s];
        if (lhs < rhs || (lhs == rhs && B_[i] < B_[r])) r = i;
      }
      if (r == -1) return false;
      pivot(r, s);
    }
  }

  int m_, n_;
  std::vector<int> N_, B_;
  std::vector<Vec> D_;
};

}  // namespace

LpResult simplex_max(const std::vector<Vec>& A, const Vec& b, const Vec& c) {
  return Simplex(A, b, c).solve();
}

LpResult maximize_free(const std::vector<Vec>& A, const Vec& b, const Vec& c) {
  const std::size_t n = c.size();
  std::vector<Vec> A2;
  A2.reserve(A.size());
  for (const auto& row : A) {
    Vec r(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
      r[j] = row[j];
      r[n + j] = -row[j];
    }
    A2.push_back(std::move(r));
  }
  Vec c2(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    c2[j] = c[j];
    c2[n + j] = -c[j];
  }
  LpResult r = simplex_max(A2, b, c2);
  if (r.status == LpStatus::optimal) {
    Vec x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = r.x[j] - r.x[n + j];
    r.x = std::move(x);
  }
  return r;
}

}  // namespace persist
