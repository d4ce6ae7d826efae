#include "qrem/probability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qrem {

Distribution::Distribution(Vector p, double tol) : p_(std::move(p)) {
    if (p_.size() == 0) throw ValidationError("Distribution: empty vector");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p_.size(); ++i) {
        if (p_(i) < -tol) throw ValidationError("Distribution: negative entry");
        sum += p_(i);
    }
    if (std::abs(sum - 1.0) > std::max(tol, 1e-12 * static_cast<double>(p_.size())))
        throw ValidationError("Distribution: entries do not sum to one");
}

QuasiDistribution::QuasiDistribution(Vector q, double tol) : q_(std::move(q)) {
    if (q_.size() == 0) throw ValidationError("QuasiDistribution: empty vector");
    double sum = q_.sum();
    if (std::abs(sum - 1.0) > tol)
        throw ValidationError("QuasiDistribution: entries do not sum to one");
}

StochasticMatrix::StochasticMatrix(Matrix m, double tol) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols())
        throw ValidationError("StochasticMatrix: must be square and nonempty");
    for (Eigen::Index c = 0; c < m_.cols(); ++c) {
        double sum = 0.0;
        for (Eigen::Index r = 0; r < m_.rows(); ++r) {
            double v = m_(r, c);
            if (v < -tol || v > 1.0 + tol)
                throw ValidationError("StochasticMatrix: entry outside [0,1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > std::max(tol, 1e-12 * static_cast<double>(m_.rows())))
            throw ValidationError("StochasticMatrix: column does not sum to one");
    }
}

Distribution StochasticMatrix::apply(const Distribution& p) const {
    if (p.size() != dim()) throw ValidationError("StochasticMatrix::apply: size mismatch");
    // The product of a stochastic matrix and a distribution is again a
    // distribution; allow for roundoff from the multiply.
    return Distribution(m_ * p.vec(), kLooseTol);
}

double tvd(const Vector& p, const Vector& q) {
    if (p.size() != q.size()) throw ValidationError("tvd: length mismatch");
    return 0.5 * (p - q).cwiseAbs().sum();
}

double tvd(const Distribution& p, const Distribution& q) { return tvd(p.vec(), q.vec()); }

double norm_1to1(const Matrix& a) {
    if (a.size() == 0) throw ValidationError("norm_1to1: empty matrix");
    double best = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c)
        best = std::max(best, a.col(c).cwiseAbs().sum());
    return best;
}

Distribution project_to_simplex(const Vector& v) {
    if (v.size() == 0) throw ValidationError("project_to_simplex: empty vector");
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0.0;
    double theta = 0.0;
    int rho = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        cumulative += u[static_cast<std::size_t>(j)];
        double t = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[static_cast<std::size_t>(j)] - t > 0.0) {
            rho = static_cast<int>(j + 1);
            theta = t;
        }
    }
    (void)rho;
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = std::max(v(i) - theta, 0.0);
    // Exact renormalization guards against accumulated roundoff in theta.
    double s = out.sum();
    if (s <= 0.0) throw ValidationError("project_to_simplex: degenerate input");
    out /= s;
    return Distribution(out, kLooseTol);
}

Vector marginalize(const Vector& p, const Subset& from, const Subset& keep) {
    if (!std::is_sorted(from.begin(), from.end()) || !std::is_sorted(keep.begin(), keep.end()))
        throw ValidationError("marginalize: subsets must be ascending");
    if (!subset_includes(from, keep))
        throw ValidationError("marginalize: kept qubits must be a subset of the source qubits");
    const int m = static_cast<int>(from.size());
    if (p.size() != (Eigen::Index{1} << m))
        throw ValidationError("marginalize: vector length does not match subset size");
    // Positions of the kept qubits inside `from`.
    Subset local;
    for (int q : keep) {
        int pos = static_cast<int>(std::lower_bound(from.begin(), from.end(), q) - from.begin());
        local.push_back(pos);
    }
    Vector out = Vector::Zero(Eigen::Index{1} << keep.size());
    for (std::size_t idx = 0; idx < static_cast<std::size_t>(p.size()); ++idx)
        out(static_cast<Eigen::Index>(gather_bits(idx, local, m))) += p(static_cast<Eigen::Index>(idx));
    return out;
}

Distribution marginalize(const Distribution& p, const Subset& from, const Subset& keep) {
    return Distribution(marginalize(p.vec(), from, keep), kLooseTol);
}

double log_binomial(int n, int k) {
    if (k < 0 || k > n) throw ValidationError("log_binomial: k out of range");
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

} // namespace qrem
