#include "pkrect/simplex.hpp"

#include <cmath>
#include <limits>

#include "pkrect/error.hpp"

namespace pkrect::lp {

namespace {

constexpr double kEps = 1e-9;

class Tableau {
 public:
  Tableau(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
          const std::vector<double>& c)
      : m_(b.size()), n_(c.size()), basis_(m_), nonbasis_(n_ + 1),
        d_(m_ + 2, std::vector<double>(n_ + 2, 0.0)) {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) d_[i][j] = a[i][j];
      basis_[i] = static_cast<int>(n_ + i);
      d_[i][n_] = -1.0;
      d_[i][n_ + 1] = b[i];
    }
    for (std::size_t j = 0; j < n_; ++j) {
      nonbasis_[j] = static_cast<int>(j);
      d_[m_][j] = -c[j];
    }
    nonbasis_[n_] = -1;
    d_[m_ + 1][n_] = 1.0;
  }

  Result run() {
    Result res;
    std::size_t r = 0;
    for (std::size_t i = 1; i < m_; ++i)
      if (d_[i][n_ + 1] < d_[r][n_ + 1]) r = i;
    if (m_ > 0 && d_[r][n_ + 1] < -kEps) {
      pivot(r, n_);
      if (!simplex(true) || d_[m_ + 1][n_ + 1] < -kEps) {
        res.status = Status::infeasible;
        return res;
      }
      for (std::size_t i = 0; i < m_; ++i) {
        if (basis_[i] != -1) continue;
        std::size_t s = 0;
        for (std::size_t j = 1; j <= n_; ++j)
          if (d_[i][j] < d_[i][s] || (d_[i][j] == d_[i][s] && nonbasis_[j] < nonbasis_[s])) s = j;
        pivot(i, s);
      }
    }
    if (!simplex(false)) {
      res.status = Status::unbounded;
      return res;
    }
    res.status = Status::optimal;
    res.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] >= 0 && basis_[i] < static_cast<int>(n_)) res.x[basis_[i]] = d_[i][n_ + 1];
    res.value = d_[m_][n_ + 1];
    return res;
  }

 private:
  void pivot(std::size_t r, std::size_t s) {
    const double inv = 1.0 / d_[r][s];
    for (std::size_t i = 0; i < m_ + 2; ++i) {
      if (i == r || d_[i][s] == 0.0) continue;
      const double factor = d_[i][s] * inv;
      for (std::size_t j = 0; j < n_ + 2; ++j)
        if (j != s) d_[i][j] -= d_[r][j] * factor;
      d_[i][s] = -factor;
    }
    for (std::size_t j = 0; j < n_ + 2; ++j)
      if (j != s) d_[r][j] *= inv;
    d_[r][s] = inv;
    std::swap(basis_[r], nonbasis_[s]);
  }

  // Dantzig pricing; falls back to Bland's rule after many pivots to rule out cycling.
  bool simplex(bool phase_one) {
    const std::size_t obj = phase_one ? m_ + 1 : m_;
    const std::size_t bland_after = 20 * (m_ + n_ + 2);
    for (std::size_t iter = 0;; ++iter) {
      const bool bland = iter > bland_after;
      std::size_t s = n_ + 1;
      for (std::size_t j = 0; j <= n_; ++j) {
        if (!phase_one && nonbasis_[j] == -1) continue;
        if (d_[obj][j] >= -kEps) continue;
        if (s == n_ + 1) {
          s = j;
        } else if (bland ? nonbasis_[j] < nonbasis_[s]
                         : (d_[obj][j] < d_[obj][s] ||
                            (d_[obj][j] == d_[obj][s] && nonbasis_[j] < nonbasis_[s]))) {
          s = j;
        }
      }
      if (s == n_ + 1) return true;
      std::size_t r = m_;
      for (std::size_t i = 0; i < m_; ++i) {
        if (d_[i][s] < kEps) continue;
        if (r == m_) {
          r = i;
          continue;
        }
        const double lhs = d_[i][n_ + 1] / d_[i][s];
        const double rhs = d_[r][n_ + 1] / d_[r][s];
        if (lhs < rhs - 1e-12 || (std::abs(lhs - rhs) <= 1e-12 && basis_[i] < basis_[r])) r = i;
      }
      if (r == m_) return false;
      pivot(r, s);
    }
  }

  std::size_t m_, n_;
  std::vector<int> basis_, nonbasis_;
  std::vector<std::vector<double>> d_;
};

}  // namespace

void LinearProgram::set_objective(std::vector<double> c) {
  require(c.size() == num_vars_, "objective length does not match variable count");
  objective_ = std::move(c);
}

void LinearProgram::add_le(std::vector<double> coeffs, double rhs) {
  require(coeffs.size() == num_vars_, "constraint length does not match variable count");
  rows_.push_back(std::move(coeffs));
  rhs_.push_back(rhs);
}

void LinearProgram::add_ge(std::vector<double> coeffs, double rhs) {
  for (double& v : coeffs) v = -v;
  add_le(std::move(coeffs), -rhs);
}

void LinearProgram::add_eq(std::vector<double> coeffs, double rhs) {
  add_le(coeffs, rhs);
  add_ge(std::move(coeffs), rhs);
}

Result LinearProgram::maximize() const {
  Tableau t(rows_, rhs_, objective_);
  return t.run();
}

}  // namespace pkrect::lp
