#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qrem/noise_model.hpp"
#include "qrem/probability.hpp"
#include "qrem/rng.hpp"

namespace qrem::testing {

inline Vector random_distribution(Rng& rng, Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform() + 1e-6;
    return v / v.sum();
}

/// Random column-stochastic matrix biased toward a dominant diagonal so
/// that it stays comfortably invertible (realistic readout noise).
inline Matrix random_stochastic(Rng& rng, Eigen::Index n, double off_scale = 0.2) {
    Matrix m(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = 0; r < n; ++r)
            m(r, c) = (r == c ? 1.0 : off_scale * rng.uniform() / static_cast<double>(n));
        m.col(c) /= m.col(c).sum();
    }
    return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Random factorized model: random partition into clusters of size up to
/// `max_cluster`, random disjoint neighborhoods of size up to `max_nb`.
inline NoiseModel random_model(Rng& rng, int n, int max_cluster = 2, int max_nb = 2,
                               double off_scale = 0.2) {
    // Partition a shuffled qubit list into runs of random length.
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) order[static_cast<std::size_t>(q)] = q;
    for (int i = n - 1; i > 0; --i)
        std::swap(order[static_cast<std::size_t>(i)],
                  order[static_cast<std::size_t>(rng.integer(static_cast<std::uint64_t>(i + 1)))]);
    CorrelationStructure s;
    s.n_qubits = n;
    std::size_t at = 0;
    while (at < order.size()) {
        std::size_t len = 1 + rng.integer(static_cast<std::uint64_t>(max_cluster));
        len = std::min(len, order.size() - at);
        Subset c(order.begin() + static_cast<std::ptrdiff_t>(at),
                 order.begin() + static_cast<std::ptrdiff_t>(at + len));
        std::sort(c.begin(), c.end());
        s.clusters.push_back(std::move(c));
        at += len;
    }
    for (const Subset& c : s.clusters) {
        Subset pool = subset_complement(c, n);
        Subset nb;
        std::size_t want = rng.integer(static_cast<std::uint64_t>(max_nb + 1));
        for (std::size_t t = 0; t < want && !pool.empty(); ++t) {
            std::size_t pick = rng.integer(pool.size());
            nb.push_back(pool[pick]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        std::sort(nb.begin(), nb.end());
        s.neighborhoods.push_back(std::move(nb));
    }
    std::vector<std::vector<StochasticMatrix>> mats;
    for (std::size_t chi = 0; chi < s.clusters.size(); ++chi) {
        const Eigen::Index dim = Eigen::Index{1} << s.clusters[chi].size();
        const std::size_t count = std::size_t{1} << s.neighborhoods[chi].size();
        std::vector<StochasticMatrix> family;
        for (std::size_t y = 0; y < count; ++y)
            family.emplace_back(random_stochastic(rng, dim, off_scale));
        mats.push_back(std::move(family));
    }
    return NoiseModel(std::move(s), std::move(mats));
}

/// The four-qubit worked structure: one two-qubit cluster {0,1} watched
/// by qubit 3, singleton {2} watched by qubit 3, singleton {3} watched
/// by qubit 1.
inline NoiseModel example_four_qubit_model(Rng& rng, double off_scale = 0.3) {
    CorrelationStructure s;
    s.n_qubits = 4;
    s.clusters = {{0, 1}, {2}, {3}};
    s.neighborhoods = {{3}, {3}, {1}};
    std::vector<std::vector<StochasticMatrix>> mats;
    mats.push_back({StochasticMatrix(random_stochastic(rng, 4, off_scale)),
                    StochasticMatrix(random_stochastic(rng, 4, off_scale))});
    mats.push_back({StochasticMatrix(random_stochastic(rng, 2, off_scale)),
                    StochasticMatrix(random_stochastic(rng, 2, off_scale))});
    mats.push_back({StochasticMatrix(random_stochastic(rng, 2, off_scale)),
                    StochasticMatrix(random_stochastic(rng, 2, off_scale))});
    return NoiseModel(std::move(s), std::move(mats));
}

} // namespace qrem::testing
