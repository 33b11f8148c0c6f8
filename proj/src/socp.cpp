// SPDX-License-Identifier: Apache-2.0
#include "irsplan/socp.hpp"

#include "irsplan/error.hpp"

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace irsplan::socp
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

// ---------------------------------------------------------------------------
// ConeProgram

ConeProgram::ConeProgram(int n)
    : n_vars(n), objective(Eigen::VectorXd::Zero(n)), eq_A(0, n), eq_b(0)
{
}

void ConeProgram::add_equality(const std::vector<std::pair<int, double>> &coeffs, double rhs)
{
    const auto r = eq_A.rows();
    eq_A.conservativeResize(r + 1, n_vars);
    for (const auto &[i, v] : coeffs)
    {
        eq_A.coeffRef(r, i) += v;
    }
    eq_b.conservativeResize(r + 1);
    eq_b[r] = rhs;
}

void ConeProgram::add_linear_le(const std::vector<std::pair<int, double>> &coeffs, double rhs)
{
    // 0 <= rhs - a^T x
    SocConstraint c;
    c.A.resize(0, n_vars);
    c.b.resize(0);
    c.c.resize(n_vars);
    for (const auto &[i, v] : coeffs)
    {
        c.c.coeffRef(i) -= v;
    }
    c.d = rhs;
    soc.push_back(std::move(c));
}

void ConeProgram::add_soc(const std::vector<std::vector<std::pair<int, double>>> &rows, const Eigen::VectorXd &b,
                          const std::vector<std::pair<int, double>> &c, double d)
{
    if (static_cast<Eigen::Index>(rows.size()) != b.size())
    {
        throw DomainError("cone rows and offset differ in length");
    }
    SocConstraint k;
    Triplets t;
    for (std::size_t r = 0; r < rows.size(); ++r)
    {
        for (const auto &[i, v] : rows[r])
        {
            t.emplace_back(static_cast<int>(r), i, v);
        }
    }
    k.A.resize(static_cast<Eigen::Index>(rows.size()), n_vars);
    k.A.setFromTriplets(t.begin(), t.end());
    k.b = b;
    k.c.resize(n_vars);
    for (const auto &[i, v] : c)
    {
        k.c.coeffRef(i) += v;
    }
    k.d = d;
    soc.push_back(std::move(k));
}

void ConeProgram::set_bounds(int var, double lo, double hi)
{
    if (var < 0 || var >= n_vars)
    {
        throw DomainError("bound on unknown variable");
    }
    if (lower.size() != n_vars)
    {
        lower = Eigen::VectorXd::Constant(n_vars, -kInf);
        upper = Eigen::VectorXd::Constant(n_vars, kInf);
    }
    lower[var] = lo;
    upper[var] = hi;
}

void ConeProgram::validate() const
{
    if (n_vars < 1)
    {
        throw DomainError("cone program needs at least one variable");
    }
    if (objective.size() != n_vars)
    {
        throw DomainError("objective length differs from n_vars");
    }
    if (eq_A.cols() != n_vars || eq_A.rows() != eq_b.size())
    {
        throw DomainError("equality block has inconsistent dimensions");
    }
    for (std::size_t k = 0; k < soc.size(); ++k)
    {
        const auto &c = soc[k];
        if (c.A.cols() != n_vars || c.A.rows() != c.b.size() || c.c.size() != n_vars)
        {
            throw DomainError("cone " + std::to_string(k) + " has inconsistent dimensions");
        }
    }
    if (lower.size() != 0 && lower.size() != n_vars)
    {
        throw DomainError("lower bounds have wrong length");
    }
    if (upper.size() != 0 && upper.size() != n_vars)
    {
        throw DomainError("upper bounds have wrong length");
    }
    if (!objective.allFinite() || !eq_b.allFinite())
    {
        throw DomainError("non-finite program data");
    }
}

void ConeProgram::dump(std::ostream &out) const
{
    const auto prec = out.precision(17);
    out << "cone-program 1\n";
    out << "vars " << n_vars << "\n";
    out << "constant " << objective_constant << "\n";
    for (int i = 0; i < n_vars; ++i)
    {
        if (objective[i] != 0.0)
        {
            out << "obj " << i << ' ' << objective[i] << "\n";
        }
    }
    for (Eigen::Index r = 0; r < eq_A.rows(); ++r)
    {
        out << "eq " << r << ' ' << eq_b[r];
        for (SpMat::InnerIterator it(eq_A, r); it; ++it)
        {
            out << ' ' << it.col() << ':' << it.value();
        }
        out << "\n";
    }
    for (std::size_t k = 0; k < soc.size(); ++k)
    {
        const auto &c = soc[k];
        out << "soc " << k << ' ' << c.A.rows() << ' ' << c.d;
        for (Eigen::SparseVector<double>::InnerIterator it(c.c); it; ++it)
        {
            out << ' ' << it.index() << ':' << it.value();
        }
        out << "\n";
        for (Eigen::Index r = 0; r < c.A.rows(); ++r)
        {
            out << "row " << k << ' ' << r << ' ' << c.b[r];
            for (SpMat::InnerIterator it(c.A, r); it; ++it)
            {
                out << ' ' << it.col() << ':' << it.value();
            }
            out << "\n";
        }
    }
    for (Eigen::Index i = 0; i < lower.size(); ++i)
    {
        if (std::isfinite(lower[i]) || std::isfinite(upper[i]))
        {
            out << "bound " << i << ' ' << lower[i] << ' ' << upper[i] << "\n";
        }
    }
    out.precision(prec);
}

const char *to_string(Status s)
{
    switch (s)
    {
    case Status::Optimal:
        return "optimal";
    case Status::Inaccurate:
        return "inaccurate";
    case Status::Infeasible:
        return "infeasible";
    case Status::Unbounded:
        return "unbounded";
    case Status::MaxIter:
        return "max_iter";
    }
    return "unknown";
}

double max_violation(const ConeProgram &p, const Eigen::VectorXd &x)
{
    double v = 0.0;
    if (p.eq_A.rows() > 0)
    {
        v = std::max(v, (p.eq_A * x - p.eq_b).cwiseAbs().maxCoeff());
    }
    for (const auto &c : p.soc)
    {
        const double lhs = c.A.rows() > 0 ? (c.A * x + c.b).norm() : 0.0;
        v = std::max(v, lhs - (c.c.dot(x) + c.d));
    }
    for (Eigen::Index i = 0; i < p.lower.size(); ++i)
    {
        v = std::max(v, p.lower[i] - x[i]);
        v = std::max(v, x[i] - p.upper[i]);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Interior point

namespace
{

using Vec = Eigen::VectorXd;
using ColMat = Eigen::SparseMatrix<double>;

/// Product cone: one nonnegative orthant block followed by second-order cones.
struct Cones
{
    int m_lp = 0;
    std::vector<int> start; ///< SOC block offsets
    std::vector<int> dim;
    int m = 0;

    int degree() const { return m_lp + static_cast<int>(start.size()); }

    Vec identity() const
    {
        Vec e = Vec::Zero(m);
        e.head(m_lp).setOnes();
        for (int s : start)
        {
            e[s] = 1.0;
        }
        return e;
    }

    /// u o v
    Vec product(const Vec &u, const Vec &v) const
    {
        Vec r(m);
        r.head(m_lp) = u.head(m_lp).cwiseProduct(v.head(m_lp));
        for (std::size_t k = 0; k < start.size(); ++k)
        {
            const int s = start[k], d = dim[k];
            r[s] = u.segment(s, d).dot(v.segment(s, d));
            r.segment(s + 1, d - 1) = u[s] * v.segment(s + 1, d - 1) + v[s] * u.segment(s + 1, d - 1);
        }
        return r;
    }

    /// x with lambda o x = w
    Vec divide(const Vec &lambda, const Vec &w) const
    {
        Vec r(m);
        r.head(m_lp) = w.head(m_lp).cwiseQuotient(lambda.head(m_lp));
        for (std::size_t k = 0; k < start.size(); ++k)
        {
            const int s = start[k], d = dim[k];
            const double l0 = lambda[s];
            const auto lb = lambda.segment(s + 1, d - 1);
            const double det = l0 * l0 - lb.squaredNorm();
            const double x0 = (l0 * w[s] - lb.dot(w.segment(s + 1, d - 1))) / det;
            r[s] = x0;
            r.segment(s + 1, d - 1) = (w.segment(s + 1, d - 1) - x0 * lb) / l0;
        }
        return r;
    }

    /// Largest alpha with x + alpha dx in the cone (inf when unbounded).
    double max_step(const Vec &x, const Vec &dx) const
    {
        double a = kInf;
        for (int i = 0; i < m_lp; ++i)
        {
            if (dx[i] < 0)
            {
                a = std::min(a, -x[i] / dx[i]);
            }
        }
        for (std::size_t k = 0; k < start.size(); ++k)
        {
            a = std::min(a, soc_step(x.segment(start[k], dim[k]), dx.segment(start[k], dim[k])));
        }
        return a;
    }

    static double soc_step(const Eigen::Ref<const Vec> &x, const Eigen::Ref<const Vec> &d)
    {
        const auto n = x.size() - 1;
        const double qa = d[0] * d[0] - d.tail(n).squaredNorm();
        const double qb = x[0] * d[0] - x.tail(n).dot(d.tail(n));
        const double qc = std::max(x[0] * x[0] - x.tail(n).squaredNorm(), 0.0);
        // q(alpha) = qa alpha^2 + 2 qb alpha + qc stays >= 0 on the positive sheet.
        double alpha = kInf;
        if (d[0] < 0)
        {
            alpha = -x[0] / d[0];
        }
        if (qa == 0.0)
        {
            if (qb < 0)
            {
                alpha = std::min(alpha, -qc / (2 * qb));
            }
            return alpha;
        }
        const double disc = qb * qb - qa * qc;
        if (qa > 0 && (qb >= 0 || disc < 0))
        {
            return alpha;
        }
        const double sq = std::sqrt(std::max(disc, 0.0));
        // Smallest positive root, computed without cancellation.
        const double q = -(qb + (qb >= 0 ? sq : -sq));
        double r1 = q != 0.0 ? q / qa : kInf;
        double r2 = q != 0.0 ? qc / q : kInf;
        double best = kInf;
        for (double r : {r1, r2})
        {
            if (r >= 0 && r < best)
            {
                best = r;
            }
        }
        return std::min(alpha, best);
    }

    /// Distance-like measure used to shift a point into the interior.
    double boundary_violation(const Vec &x) const
    {
        double a = -kInf;
        for (int i = 0; i < m_lp; ++i)
        {
            a = std::max(a, -x[i]);
        }
        for (std::size_t k = 0; k < start.size(); ++k)
        {
            const int s = start[k], d = dim[k];
            a = std::max(a, x.segment(s + 1, d - 1).norm() - x[s]);
        }
        return a;
    }
};

/// Nesterov-Todd scaling W with W z = W^-1 s = lambda.
struct Scaling
{
    Vec lp; ///< diagonal of the orthant block
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::MatrixXd> Winv;

    void compute(const Cones &k, const Vec &s, const Vec &z)
    {
        lp = (s.head(k.m_lp).array() / z.head(k.m_lp).array()).sqrt();
        W.resize(k.start.size());
        Winv.resize(k.start.size());
        for (std::size_t b = 0; b < k.start.size(); ++b)
        {
            const int st = k.start[b], d = k.dim[b];
            const Vec sb = s.segment(st, d);
            const Vec zb = z.segment(st, d);
            const double sn = std::sqrt(std::max(sb[0] * sb[0] - sb.tail(d - 1).squaredNorm(), 1e-300));
            const double zn = std::sqrt(std::max(zb[0] * zb[0] - zb.tail(d - 1).squaredNorm(), 1e-300));
            const Vec ss = sb / sn;
            const Vec zs = zb / zn;
            const double gamma = std::sqrt(std::max((1.0 + ss.dot(zs)) / 2.0, 1e-300));
            Vec w(d);
            w[0] = (ss[0] + zs[0]) / (2 * gamma);
            w.tail(d - 1) = (ss.tail(d - 1) - zs.tail(d - 1)) / (2 * gamma);
            const double beta = std::sqrt(sn / zn);
            Eigen::MatrixXd M(d, d);
            M(0, 0) = w[0];
            M.block(0, 1, 1, d - 1) = w.tail(d - 1).transpose();
            M.block(1, 0, d - 1, 1) = w.tail(d - 1);
            M.block(1, 1, d - 1, d - 1) = Eigen::MatrixXd::Identity(d - 1, d - 1) +
                                          w.tail(d - 1) * w.tail(d - 1).transpose() / (1.0 + w[0]);
            W[b] = beta * M;
            M.block(0, 1, 1, d - 1) *= -1.0;
            M.block(1, 0, d - 1, 1) *= -1.0;
            Winv[b] = M / beta;
        }
    }

    Vec apply(const Cones &k, const Vec &v, bool inverse) const
    {
        Vec r(k.m);
        if (inverse)
        {
            r.head(k.m_lp) = v.head(k.m_lp).cwiseQuotient(lp);
        }
        else
        {
            r.head(k.m_lp) = v.head(k.m_lp).cwiseProduct(lp);
        }
        for (std::size_t b = 0; b < k.start.size(); ++b)
        {
            const int st = k.start[b], d = k.dim[b];
            r.segment(st, d) = (inverse ? Winv[b] : W[b]) * v.segment(st, d);
        }
        return r;
    }
};

/// Standard form: min c^T x  s.t.  A x = b,  G x + s = h,  s in K.
struct Standard
{
    int n = 0;
    int p = 0;
    Cones cones;
    ColMat A;
    ColMat G;
    Vec b;
    Vec h;
    Vec c;
};

Standard lower_program(const ConeProgram &prog)
{
    Standard st;
    st.n = prog.n_vars;
    st.p = static_cast<int>(prog.eq_A.rows());
    st.c = prog.objective;
    st.A = ColMat(prog.eq_A);
    st.b = prog.eq_b;

    Triplets t;
    std::vector<double> h;
    int row = 0;
    auto push_c_row = [&](const Eigen::SparseVector<double> &c, double d) {
        for (Eigen::SparseVector<double>::InnerIterator it(c); it; ++it)
        {
            t.emplace_back(row, static_cast<int>(it.index()), -it.value());
        }
        h.push_back(d);
        ++row;
    };
    // Orthant rows: linear inequalities then box bounds.
    for (const auto &k : prog.soc)
    {
        if (k.A.rows() == 0)
        {
            push_c_row(k.c, k.d);
        }
    }
    for (Eigen::Index i = 0; i < prog.lower.size(); ++i)
    {
        if (std::isfinite(prog.lower[i]))
        {
            t.emplace_back(row++, static_cast<int>(i), -1.0);
            h.push_back(-prog.lower[i]);
        }
        if (std::isfinite(prog.upper[i]))
        {
            t.emplace_back(row++, static_cast<int>(i), 1.0);
            h.push_back(prog.upper[i]);
        }
    }
    st.cones.m_lp = row;
    for (const auto &k : prog.soc)
    {
        if (k.A.rows() == 0)
        {
            continue;
        }
        st.cones.start.push_back(row);
        st.cones.dim.push_back(k.dim());
        push_c_row(k.c, k.d);
        for (Eigen::Index r = 0; r < k.A.rows(); ++r)
        {
            for (SpMat::InnerIterator it(k.A, r); it; ++it)
            {
                t.emplace_back(row, static_cast<int>(it.col()), -it.value());
            }
            h.push_back(k.b[r]);
            ++row;
        }
    }
    st.cones.m = row;
    st.G.resize(row, st.n);
    st.G.setFromTriplets(t.begin(), t.end());
    st.h = Eigen::Map<Vec>(h.data(), static_cast<Eigen::Index>(h.size()));
    return st;
}

/// Sparse LDL^T for symmetric quasidefinite matrices. Pivots whose sign
/// disagrees with the expected block sign are replaced by a small value of the
/// right sign; the caller corrects the perturbation by iterative refinement.
class QuasidefiniteLdl
{
public:
    /// `upper` holds the upper triangle (CSC) of the matrix; `sign` is +1/-1 per row.
    void analyze(const ColMat &upper_pattern, const std::vector<int> &sign)
    {
        n_ = static_cast<int>(upper_pattern.rows());
        Eigen::AMDOrdering<int> amd;
        Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm;
        const ColMat full = ColMat(upper_pattern.selfadjointView<Eigen::Upper>());
        amd(full, perm); // perm maps new -> old
        pinv_ = perm.inverse();
        perm_ = perm;
        sign_.resize(n_);
        for (int k = 0; k < n_; ++k)
        {
            sign_[k] = sign[perm_.indices()[k]];
        }
        const ColMat c = permuted(upper_pattern);
        parent_.assign(n_, -1);
        lnz_.assign(n_, 0);
        std::vector<int> flag(n_);
        for (int k = 0; k < n_; ++k)
        {
            flag[k] = k;
            for (ColMat::InnerIterator it(c, k); it; ++it)
            {
                for (int i = static_cast<int>(it.row()); i < k && flag[i] != k; i = parent_[i])
                {
                    if (parent_[i] == -1)
                    {
                        parent_[i] = k;
                    }
                    ++lnz_[i];
                    flag[i] = k;
                }
            }
        }
        lp_.assign(n_ + 1, 0);
        for (int k = 0; k < n_; ++k)
        {
            lp_[k + 1] = lp_[k] + lnz_[k];
        }
        li_.assign(lp_[n_], 0);
        lx_.assign(lp_[n_], 0.0);
        d_.assign(n_, 0.0);
    }

    void factor(const ColMat &upper, double eps, double delta)
    {
        const ColMat c = permuted(upper);
        std::vector<double> y(n_, 0.0);
        std::vector<int> pattern(n_), flag(n_);
        std::fill(lnz_.begin(), lnz_.end(), 0);
        for (int k = 0; k < n_; ++k)
        {
            int top = n_;
            flag[k] = k;
            y[k] = 0.0;
            for (ColMat::InnerIterator it(c, k); it; ++it)
            {
                int i = static_cast<int>(it.row());
                y[i] += it.value();
                int len = 0;
                for (; flag[i] != k; i = parent_[i])
                {
                    pattern[len++] = i;
                    flag[i] = k;
                }
                while (len > 0)
                {
                    pattern[--top] = pattern[--len];
                }
            }
            double dk = y[k];
            y[k] = 0.0;
            for (; top < n_; ++top)
            {
                const int i = pattern[top];
                const double yi = y[i];
                y[i] = 0.0;
                const int p2 = lp_[i] + lnz_[i];
                for (int p = lp_[i]; p < p2; ++p)
                {
                    y[li_[p]] -= lx_[p] * yi;
                }
                const double lki = yi / d_[i];
                dk -= lki * yi;
                li_[p2] = k;
                lx_[p2] = lki;
                ++lnz_[i];
            }
            if (sign_[k] * dk <= eps)
            {
                dk = sign_[k] * delta;
            }
            d_[k] = dk;
        }
    }

    Vec solve(const Vec &b) const
    {
        Vec x = pinv_ * b;
        for (int j = 0; j < n_; ++j)
        {
            for (int p = lp_[j]; p < lp_[j + 1]; ++p)
            {
                x[li_[p]] -= lx_[p] * x[j];
            }
        }
        for (int j = 0; j < n_; ++j)
        {
            x[j] /= d_[j];
        }
        for (int j = n_ - 1; j >= 0; --j)
        {
            for (int p = lp_[j]; p < lp_[j + 1]; ++p)
            {
                x[j] -= lx_[p] * x[li_[p]];
            }
        }
        return perm_ * x;
    }

private:
    /// Upper triangle of P^T M P where M = upper + upper^T - diag.
    ColMat permuted(const ColMat &upper) const
    {
        ColMat out(n_, n_);
        out.selfadjointView<Eigen::Upper>() = upper.selfadjointView<Eigen::Upper>().twistedBy(pinv_);
        return out;
    }

    int n_ = 0;
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm_, pinv_;
    std::vector<int> sign_, parent_, lnz_, lp_, li_;
    std::vector<double> lx_, d_;
};

/// Regularized quasidefinite KKT system
///   [ 0  A^T  G^T ] [x]   [bx]
///   [ A   0    0  ] [y] = [by]
///   [ G   0  -W^2 ] [z]   [bz]
/// with iterative refinement against the exact operator.
class KktSolver
{
public:
    KktSolver(const Standard &st) : st_(st), size_(st.n + st.p + st.cones.m) {}

    /// `boost` multiplies both regularizations; refinement removes their effect.
    bool factor(const Scaling &w, double boost = 1.0)
    {
        w_ = &w;
        const double kStaticReg = kBaseStaticReg * boost;
        const int n = st_.n, p = st_.p;
        const int off = n + p;
        Triplets t;
        t.reserve(static_cast<std::size_t>(size_ + st_.A.nonZeros() + st_.G.nonZeros()) + 16 * st_.cones.m);
        for (int i = 0; i < n; ++i)
        {
            t.emplace_back(i, i, kStaticReg);
        }
        for (int j = 0; j < st_.A.outerSize(); ++j)
        {
            for (ColMat::InnerIterator it(st_.A, j); it; ++it)
            {
                t.emplace_back(j, n + static_cast<int>(it.row()), it.value());
            }
        }
        for (int r = 0; r < p; ++r)
        {
            t.emplace_back(n + r, n + r, -kStaticReg);
        }
        for (int j = 0; j < st_.G.outerSize(); ++j)
        {
            for (ColMat::InnerIterator it(st_.G, j); it; ++it)
            {
                t.emplace_back(j, off + static_cast<int>(it.row()), it.value());
            }
        }
        const auto &k = st_.cones;
        for (int i = 0; i < k.m_lp; ++i)
        {
            t.emplace_back(off + i, off + i, -w.lp[i] * w.lp[i] - kStaticReg);
        }
        for (std::size_t b = 0; b < k.start.size(); ++b)
        {
            const int s0 = k.start[b], d = k.dim[b];
            const Eigen::MatrixXd W2 = w.W[b] * w.W[b];
            for (int c = 0; c < d; ++c)
            {
                for (int r = 0; r <= c; ++r)
                {
                    t.emplace_back(off + s0 + r, off + s0 + c, -W2(r, c) - (r == c ? kStaticReg : 0.0));
                }
            }
        }
        ColMat K(size_, size_);
        K.setFromTriplets(t.begin(), t.end());
        if (!analyzed_)
        {
            std::vector<int> sign(size_, -1);
            std::fill(sign.begin(), sign.begin() + n, 1);
            ldl_.analyze(K, sign);
            analyzed_ = true;
        }
        ldl_.factor(K, 1e-13, 2e-7 * boost);
        return true;
    }

    /// Returns false when the refined solution is not finite.
    bool solve(const Vec &bx, const Vec &by, const Vec &bz, Vec &x, Vec &y, Vec &z) const
    {
        Vec rhs(size_);
        rhs << bx, by, bz;
        Vec sol = ldl_.solve(rhs);
        const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
        double last = kInf;
        for (int it = 0; it < 10; ++it)
        {
            const Vec r = rhs - multiply(sol);
            const double rn = r.lpNorm<Eigen::Infinity>();
            if (!(rn > 1e-14 * scale) || rn > 0.5 * last)
            {
                break;
            }
            last = rn;
            sol += ldl_.solve(r);
        }
        if (!sol.allFinite())
        {
            return false;
        }
        x = sol.head(st_.n);
        y = sol.segment(st_.n, st_.p);
        z = sol.tail(st_.cones.m);
        return true;
    }

private:
    static constexpr double kBaseStaticReg = 7e-8;

    Vec multiply(const Vec &v) const
    {
        const int n = st_.n, p = st_.p, m = st_.cones.m;
        const Vec x = v.head(n), y = v.segment(n, p), z = v.tail(m);
        Vec r(size_);
        r.head(n) = st_.A.transpose() * y + st_.G.transpose() * z;
        r.segment(n, p) = st_.A * x;
        r.tail(m) = st_.G * x - w_->apply(st_.cones, w_->apply(st_.cones, z, false), false);
        return r;
    }

    const Standard &st_;
    int size_;
    const Scaling *w_ = nullptr;
    bool analyzed_ = false;
    QuasidefiniteLdl ldl_;
};

struct Iterate
{
    Vec x, y, z, s;
    double tau = 1.0;
    double kappa = 1.0;
};

} // namespace

SolveResult solve(const ConeProgram &prog, double tol, int max_iter)
{
    SolveOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    return solve(prog, o);
}

SolveResult solve(const ConeProgram &prog, const SolveOptions &opt)
{
    prog.validate();
    if (!(opt.tol > 0.0 && opt.tol <= 1e-2) || opt.max_iter < 1)
    {
        throw DomainError("solver needs tol in (0, 1e-2] and max_iter >= 1");
    }
    const Standard st = lower_program(prog);
    const Cones &K = st.cones;
    const int n = st.n, p = st.p, m = K.m;
    const Vec e = K.identity();

    SolveResult res;
    KktSolver kkt(st);
    Scaling w;

    // Start point from the W = I system.
    w.lp = Vec::Ones(K.m_lp);
    w.W.assign(K.start.size(), {});
    w.Winv.assign(K.start.size(), {});
    for (std::size_t b = 0; b < K.start.size(); ++b)
    {
        w.W[b] = Eigen::MatrixXd::Identity(K.dim[b], K.dim[b]);
        w.Winv[b] = w.W[b];
    }
    Iterate it;
    {
        if (!kkt.factor(w))
        {
            throw DegenerateError("cannot factor the initial KKT system");
        }
        Vec x, y, z, x2, y2, z2;
        kkt.solve(Vec::Zero(n), st.b, st.h, x, y, z);
        kkt.solve(-st.c, Vec::Zero(p), Vec::Zero(m), x2, y2, z2);
        it.x = x;
        it.s = -z;
        it.y = y2;
        it.z = z2;
        const double as = K.boundary_violation(it.s);
        if (as >= -1e-8 * std::max(1.0, it.s.norm()))
        {
            it.s += (1.0 + std::max(as, 0.0)) * e;
        }
        const double az = K.boundary_violation(it.z);
        if (az >= -1e-8 * std::max(1.0, it.z.norm()))
        {
            it.z += (1.0 + std::max(az, 0.0)) * e;
        }
    }

    const double nb = std::max(1.0, st.b.norm());
    const double nh = std::max(1.0, st.h.norm());
    const double nc = std::max(1.0, st.c.norm());
    const double deg = K.degree() + 1.0;

    struct Metrics
    {
        double pres, dres, gap, relgap, pcost;
    };
    auto metrics = [&](const Iterate &v, Vec &F1, Vec &F2, Vec &F3, double &F4) {
        F1 = st.A.transpose() * v.y + st.G.transpose() * v.z + st.c * v.tau;
        F2 = st.A * v.x - st.b * v.tau;
        F3 = v.s + st.G * v.x - st.h * v.tau;
        F4 = v.kappa + st.c.dot(v.x) + st.b.dot(v.y) + st.h.dot(v.z);
        Metrics mt;
        mt.pres = std::max(F2.norm() / nb, F3.norm() / nh) / v.tau;
        mt.dres = F1.norm() / nc / v.tau;
        mt.gap = v.s.dot(v.z) / (v.tau * v.tau);
        mt.pcost = st.c.dot(v.x) / v.tau;
        mt.relgap = mt.gap / std::max(1.0, std::abs(mt.pcost));
        return mt;
    };

    auto finish = [&](Status status, const Iterate &v, const Metrics &mt) {
        res.status = status;
        const double scale = (status == Status::Infeasible || status == Status::Unbounded) ? 1.0 : v.tau;
        res.x = v.x / scale;
        res.y = v.y / scale;
        res.z = v.z / scale;
        res.objective_value = st.c.dot(res.x) + prog.objective_constant;
        res.primal_residual = mt.pres;
        res.dual_residual = mt.dres;
        res.gap = mt.gap;
        res.relative_gap = mt.relgap;
        return res;
    };

    Vec F1, F2, F3;
    double F4 = 0.0;
    int stalls = 0;
    for (int iter = 0;; ++iter)
    {
        res.iterations = iter;
        const Metrics mt = metrics(it, F1, F2, F3, F4);

        if (mt.pres <= opt.tol && mt.dres <= opt.tol && mt.relgap <= opt.tol)
        {
            return finish(Status::Optimal, it, mt);
        }
        // Certificates from the embedding.
        if (it.kappa > it.tau)
        {
            const double by_hz = st.b.dot(it.y) + st.h.dot(it.z);
            if (by_hz < 0)
            {
                const double r = (st.A.transpose() * it.y + st.G.transpose() * it.z).norm() / nc / -by_hz;
                if (r <= opt.tol)
                {
                    res.infeasibility_residual = r;
                    return finish(Status::Infeasible, it, mt);
                }
            }
            const double cx = st.c.dot(it.x);
            if (cx < 0)
            {
                const double r =
                    std::max((st.A * it.x).norm() / nb, (it.s + st.G * it.x).norm() / nh) / -cx;
                if (r <= opt.tol)
                {
                    res.infeasibility_residual = r;
                    return finish(Status::Unbounded, it, mt);
                }
            }
        }
        const double loose = std::sqrt(opt.tol);
        auto give_up = [&]() {
            const bool close = mt.pres <= loose && mt.dres <= loose && mt.relgap <= loose;
            return finish(close ? Status::Inaccurate : Status::MaxIter, it, mt);
        };
        if (iter >= opt.max_iter)
        {
            return give_up();
        }

        w.compute(K, it.s, it.z);
        const Vec lambda = w.apply(K, it.z, false);
        const double mu = (it.s.dot(it.z) + it.tau * it.kappa) / deg;
        Vec x1, y1, z1;
        bool solved = false;
        for (double boost = 1.0; boost <= 1e4 && !solved; boost *= 10.0)
        {
            solved = kkt.factor(w, boost) && kkt.solve(-st.c, st.b, st.h, x1, y1, z1);
        }
        if (!solved)
        {
            return give_up();
        }
        const double denom = -it.kappa / it.tau + st.c.dot(x1) + st.b.dot(y1) + st.h.dot(z1);

        struct Dir
        {
            Vec x, y, z, s;
            double tau, kappa;
        };
        const Vec ll = K.product(lambda, lambda);
        auto direction = [&](double sigma, const Vec &ds_rhs, double dk_rhs, Dir &d) {
            const Vec u = K.divide(lambda, ds_rhs);
            const double g = 1.0 - sigma;
            Vec x0, y0, z0;
            if (!kkt.solve(-g * F1, -g * F2, -g * F3 - w.apply(K, u, false), x0, y0, z0))
            {
                return false;
            }
            d.tau = (-g * F4 - dk_rhs / it.tau - st.c.dot(x0) - st.b.dot(y0) - st.h.dot(z0)) / denom;
            d.x = x0 + d.tau * x1;
            d.y = y0 + d.tau * y1;
            d.z = z0 + d.tau * z1;
            d.s = w.apply(K, u - w.apply(K, d.z, false), false);
            d.kappa = (dk_rhs - it.kappa * d.tau) / it.tau;
            return d.x.allFinite() && d.z.allFinite() && std::isfinite(d.tau);
        };
        auto step = [&](const Dir &d) {
            double a = std::min(K.max_step(it.s, d.s), K.max_step(it.z, d.z));
            if (d.tau < 0)
            {
                a = std::min(a, -it.tau / d.tau);
            }
            if (d.kappa < 0)
            {
                a = std::min(a, -it.kappa / d.kappa);
            }
            return a;
        };

        Dir aff;
        if (!direction(0.0, -ll, -it.tau * it.kappa, aff))
        {
            return give_up();
        }
        const double a_aff = std::min(1.0, step(aff));
        const double sigma = std::clamp(std::pow(1.0 - a_aff, 3), 1e-8, 1.0);

        const Vec corr = K.product(w.apply(K, aff.s, true), w.apply(K, aff.z, false));
        Dir cmb;
        if (!direction(sigma, -ll + sigma * mu * e - corr, -it.tau * it.kappa + sigma * mu - aff.tau * aff.kappa,
                       cmb))
        {
            return give_up();
        }
        const double alpha = std::min(1.0, 0.99 * step(cmb));
        if (!(alpha > 1e-10))
        {
            if (++stalls >= 3)
            {
                return give_up();
            }
        }
        it.x += alpha * cmb.x;
        it.y += alpha * cmb.y;
        it.z += alpha * cmb.z;
        it.s += alpha * cmb.s;
        it.tau += alpha * cmb.tau;
        it.kappa += alpha * cmb.kappa;
        if (!(it.tau > 0) || !(it.kappa > 0) || !it.x.allFinite())
        {
            return give_up();
        }
    }
}

} // namespace irsplan::socp
