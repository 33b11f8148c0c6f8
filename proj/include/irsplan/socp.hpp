// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <string>
#include <vector>

namespace irsplan::socp
{

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// ||A x + b||_2 <= c^T x + d. A with zero rows encodes the linear inequality 0 <= c^T x + d.
struct SocConstraint
{
    SpMat A;
    Eigen::VectorXd b;
    Eigen::SparseVector<double> c;
    double d = 0.0;

    int dim() const { return static_cast<int>(A.rows()) + 1; }
};

/// minimize objective^T x + objective_constant
/// subject to eq_A x = eq_b, every SOC constraint, lower <= x <= upper.
struct ConeProgram
{
    int n_vars = 0;
    Eigen::VectorXd objective;
    double objective_constant = 0.0;
    SpMat eq_A;
    Eigen::VectorXd eq_b;
    std::vector<SocConstraint> soc;
    Eigen::VectorXd lower; ///< empty or n_vars entries, -inf for none
    Eigen::VectorXd upper; ///< empty or n_vars entries, +inf for none

    explicit ConeProgram(int n = 0);

    /// sum_k coeffs[k].second * x[coeffs[k].first] == rhs
    void add_equality(const std::vector<std::pair<int, double>> &coeffs, double rhs);
    /// sum coeffs <= rhs, stored as a zero-row cone.
    void add_linear_le(const std::vector<std::pair<int, double>> &coeffs, double rhs);
    /// || rows_i(x) + b_i || <= sum(c) + d, with each row given as sparse coefficients.
    void add_soc(const std::vector<std::vector<std::pair<int, double>>> &rows, const Eigen::VectorXd &b,
                 const std::vector<std::pair<int, double>> &c, double d);
    void set_bounds(int var, double lo, double hi);

    /// Throws DomainError on inconsistent dimensions.
    void validate() const;

    /// Line-oriented text dump (see README, "Cone program dump").
    void dump(std::ostream &out) const;
};

enum class Status
{
    Optimal,
    Inaccurate, ///< stalled close to optimal (residuals below sqrt(tol))
    Infeasible,
    Unbounded,
    MaxIter,
};

const char *to_string(Status s);

struct SolveResult
{
    Status status = Status::MaxIter;
    Eigen::VectorXd x;
    Eigen::VectorXd y; ///< equality multipliers
    Eigen::VectorXd z; ///< cone multipliers (stacked, internal order)
    double objective_value = 0.0;
    int iterations = 0;
    double primal_residual = 0.0; ///< relative
    double dual_residual = 0.0;   ///< relative
    double gap = 0.0;             ///< s^T z
    double relative_gap = 0.0;
    double infeasibility_residual = 0.0; ///< certificate residual when Infeasible/Unbounded
};

struct SolveOptions
{
    double tol = 1e-8;
    int max_iter = 200;
};

/// Primal-dual interior point on the homogeneous self-dual embedding.
/// Deterministic: identical programs produce identical iterates.
SolveResult solve(const ConeProgram &p, const SolveOptions &opt = {});
SolveResult solve(const ConeProgram &p, double tol, int max_iter);

/// Largest violation of any constraint at x (0 when feasible).
double max_violation(const ConeProgram &p, const Eigen::VectorXd &x);

} // namespace irsplan::socp
