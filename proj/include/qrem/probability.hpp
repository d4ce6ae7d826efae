#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qrem/bits.hpp"
#include "qrem/errors.hpp"

namespace qrem {

/// Validation tolerance for data that is constructed directly.
inline constexpr double kStrictTol = 1e-10;
/// Looser tolerance for quantities that went through floating arithmetic.
inline constexpr double kLooseTol = 1e-8;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Probability distribution: nonnegative entries summing to one.
class Distribution {
public:
    explicit Distribution(Vector p, double tol = kStrictTol);

    const Vector& vec() const { return p_; }
    Eigen::Index size() const { return p_.size(); }
    double operator[](Eigen::Index i) const { return p_(i); }

private:
    Vector p_;
};

/// Signed vector summing to one; what a noise inversion produces before
/// projection back onto the simplex.
class QuasiDistribution {
public:
    explicit QuasiDistribution(Vector q, double tol = kLooseTol);

    const Vector& vec() const { return q_; }
    Eigen::Index size() const { return q_.size(); }
    double operator[](Eigen::Index i) const { return q_(i); }

private:
    Vector q_;
};

/// Column-stochastic matrix: entries in [0,1], every column sums to one.
/// Columns are indexed by the prepared (input) state, rows by the
/// measured (output) state.
class StochasticMatrix {
public:
    explicit StochasticMatrix(Matrix m, double tol = kStrictTol);

    const Matrix& mat() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }
    double operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

    /// Action on a distribution: the noisy output distribution.
    Distribution apply(const Distribution& p) const;

private:
    Matrix m_;
};

/// Total variation distance (1/2)*sum_i |p_i - q_i|.
double tvd(const Vector& p, const Vector& q);
double tvd(const Distribution& p, const Distribution& q);

/// Induced 1->1 operator norm: maximum absolute column sum.
double norm_1to1(const Matrix& a);

/// Euclidean projection onto the probability simplex (sort-based
/// threshold shift).  Minimizes ||x - v||_2 over the simplex.
Distribution project_to_simplex(const Vector& v);

/// Sum a distribution over the qubits of `from` that are absent from
/// `keep`.  `p` has length 2^|from|; the result has length 2^|keep|.
/// Works on signed vectors as well, hence the raw types.
Vector marginalize(const Vector& p, const Subset& from, const Subset& keep);
Distribution marginalize(const Distribution& p, const Subset& from, const Subset& keep);

} // namespace qrem
