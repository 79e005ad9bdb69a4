#pragma once

#include <cstddef>
#include <vector>

// Dense two-phase tableau simplex for small linear programs:
//   maximize c.x  subject to  rows (<=, >=, =),  x >= 0.

namespace pkrect::lp {

enum class Status { optimal, infeasible, unbounded };

struct Result {
  Status status = Status::infeasible;
  double value = 0.0;
  std::vector<double> x;
};

class LinearProgram {
 public:
  explicit LinearProgram(std::size_t num_vars) : num_vars_(num_vars), objective_(num_vars, 0.0) {}

  std::size_t num_vars() const { return num_vars_; }
  std::size_t num_rows() const { return rows_.size(); }

  void set_objective(std::vector<double> c);
  void add_le(std::vector<double> coeffs, double rhs);
  void add_ge(std::vector<double> coeffs, double rhs);
  void add_eq(std::vector<double> coeffs, double rhs);

  Result maximize() const;

 private:
  std::size_t num_vars_;
  std::vector<double> objective_;
  std::vector<std::vector<double>> rows_;  // all stored as <=
  std::vector<double> rhs_;
};

}  // namespace pkrect::lp
