#include <doctest.h>

#include <cmath>
#include <map>

#include "qrem/mitigate.hpp"
#include "qrem/pipeline.hpp"

#include "helpers.hpp"

using namespace qrem;

namespace {

Subset full_set(int n) {
    Subset s(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) s[static_cast<std::size_t>(q)] = q;
    return s;
}

// Exact marginal of the globally noisy distribution on s.
Vector exact_noisy_marginal(const NoiseModel& model, const Vector& ideal, const Subset& s) {
    Vector noisy = model.global_matrix() * ideal;
    return marginalize(noisy, full_set(model.n_qubits()), s);
}

// The frozen single-qubit-with-one-neighbor model: qubit 0's response is
// clean when qubit 1 is prepared in 0 and symmetric-10% when in 1.
NoiseModel watched_qubit_model() {
    CorrelationStructure st;
    st.n_qubits = 2;
    st.clusters = {{0}, {1}};
    st.neighborhoods = {{1}, {}};
    Matrix clean = Matrix::Identity(2, 2);
    Matrix tilted(2, 2);
    tilted << 0.9, 0.1, 0.1, 0.9;
    std::vector<std::vector<StochasticMatrix>> mats;
    mats.push_back({StochasticMatrix(clean), StochasticMatrix(tilted)});
    mats.push_back({StochasticMatrix(clean)});
    return NoiseModel(std::move(st), std::move(mats));
}

// Cluster union assembled from a random nonempty choice of clusters.
Subset random_cluster_union(const CorrelationStructure& st, Rng& rng) {
    Subset s;
    for (const Subset& c : st.clusters)
        if (rng.bit()) s = subset_union(s, c);
    if (s.empty()) s = st.clusters[static_cast<std::size_t>(
        rng.integer(static_cast<std::uint64_t>(st.clusters.size())))];
    return s;
}

} // namespace

TEST_CASE("identity model leaves marginals alone") {
    Rng rng(11);
    std::vector<StochasticMatrix> singles(3, StochasticMatrix(Matrix::Identity(2, 2)));
    NoiseModel model = NoiseModel::uncorrelated(singles);
    Distribution p(testing::random_distribution(rng, 4));
    MitigatedMarginal mm = mitigate_marginal(p, model, {0, 2});
    CHECK((mm.corrected.vec() - p.vec()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((mm.quasi.vec() - p.vec()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("no neighbors means exact inversion") {
    Rng rng(12);
    CorrelationStructure st;
    st.n_qubits = 3;
    st.clusters = {{0, 1}, {2}};
    st.neighborhoods = {{}, {}};
    std::vector<std::vector<StochasticMatrix>> mats;
    mats.push_back({StochasticMatrix(testing::random_stochastic(rng, 4, 0.4))});
    mats.push_back({StochasticMatrix(testing::random_stochastic(rng, 2, 0.4))});
    NoiseModel model(std::move(st), std::move(mats));

    Vector ideal = testing::random_distribution(rng, 8);
    for (const Subset& s : {Subset{0, 1}, Subset{0, 1, 2}}) {
        Distribution noisy(exact_noisy_marginal(model, ideal, s), kLooseTol);
        MitigatedMarginal mm = mitigate_marginal(noisy, model, s);
        Vector want = marginalize(ideal, full_set(3), s);
        CHECK((mm.quasi.vec() - want).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((mm.corrected.vec() - want).cwiseAbs().maxCoeff() <= 1e-10);
    }
    CHECK(mitigation_error_bound(model, {0, 1}) == 0.0);
}

TEST_CASE("marginal length and cluster-cut rejections") {
    Rng rng(13);
    NoiseModel model = testing::example_four_qubit_model(rng);
    Distribution tiny(testing::random_distribution(rng, 2));
    CHECK_THROWS_AS(mitigate_marginal(tiny, model, {0, 1}), ValidationError);
    Distribution p(testing::random_distribution(rng, 2));
    CHECK_THROWS_AS(mitigate_marginal(p, model, {0}), ValidationError); // cuts cluster {0,1}
    CHECK_THROWS_AS(mitigation_error_bound(model, {1}), ValidationError);
}

TEST_CASE("singular averaged matrix is refused") {
    CorrelationStructure st;
    st.n_qubits = 1;
    st.clusters = {{0}};
    st.neighborhoods = {{}};
    Matrix flat(2, 2);
    flat << 0.5, 0.5, 0.5, 0.5;
    NoiseModel model(std::move(st), {{StochasticMatrix(flat)}});
    Rng rng(1);
    Distribution p(testing::random_distribution(rng, 2));
    CHECK_THROWS_AS(mitigation_error_bound(model, {0}), SingularModelError);
    CHECK_THROWS_AS(mitigate_marginal(p, model, {0}), SingularModelError);
}

TEST_CASE("worked two-qubit bound numbers") {
    NoiseModel model = watched_qubit_model();
    const double corr_norm = correction_matrix(average_noise_matrix(model, {0})).norm_1to1;
    CHECK(std::abs(corr_norm - 1.0 / 0.9) <= 1e-12);
    CHECK(std::abs(mitigation_error_bound(model, {0}) - 1.0 / 18.0) <= 1e-12);
    // the watcher itself is noiseless: zero bound on {1}
    CHECK(mitigation_error_bound(model, {1}) == 0.0);
}

TEST_CASE("bound dominates the worst exact deviation on a fixed model") {
    Rng rng(14);
    NoiseModel model = testing::random_model(rng, 5, 2, 2, 0.35);
    Subset s = model.structure().expand_to_clusters({0});
    const double bound = mitigation_error_bound(model, s);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        Vector ideal = testing::random_distribution(rng, 32);
        Distribution noisy(exact_noisy_marginal(model, ideal, s), kLooseTol);
        MitigatedMarginal mm = mitigate_marginal(noisy, model, s);
        worst = std::max(worst, tvd(mm.quasi.vec(), marginalize(ideal, full_set(5), s)));
    }
    CHECK(worst <= bound + 1e-12);
}

TEST_CASE("prop-1 bound never violated and is not vacuous") {
    Rng rng(15);
    int violations = 0;
    int tight = 0;
    for (int i = 0; i < 500; ++i) {
        const int n = 3 + i % 4;
        NoiseModel model = testing::random_model(rng, n, 2, 2, 0.35);
        const CorrelationStructure& st = model.structure();

        Subset s;
        Vector ideal;
        if (i % 4 == 0) {
            // adversarial: aim a point mass at the worst column of the
            // worst neighbor state, which provably lands within
            // ||C_av|| <= 2 of the bound
            int chosen = -1;
            for (std::size_t chi = 0; chi < st.clusters.size(); ++chi)
                if (!st.neighborhoods[chi].empty()) { chosen = static_cast<int>(chi); break; }
            if (chosen < 0) continue;
            s = st.clusters[static_cast<std::size_t>(chosen)];
            const StochasticMatrix avg = average_noise_matrix(model, s);
            const CorrectionMatrix corr = correction_matrix(avg);
            const Subset ext = external_neighborhood(st, s);
            double best = -1.0;
            std::size_t best_y = 0;
            Eigen::Index best_col = 0;
            for (std::size_t y = 0; y < (std::size_t{1} << ext.size()); ++y) {
                Matrix diff = corr.inverse * (fixed_neighbor_matrix(model, s, y).mat() - avg.mat());
                for (Eigen::Index c = 0; c < diff.cols(); ++c) {
                    const double colsum = diff.col(c).cwiseAbs().sum();
                    if (colsum > best) { best = colsum; best_y = y; best_col = c; }
                }
            }
            std::size_t x = scatter_bits(static_cast<std::size_t>(best_col), s, n) |
                            scatter_bits(best_y, ext, n);
            ideal = Vector::Zero(Eigen::Index{1} << n);
            ideal(static_cast<Eigen::Index>(x)) = 1.0;
        } else if (i % 4 == 1) {
            s = random_cluster_union(st, rng);
            ideal = Vector::Zero(Eigen::Index{1} << n);
            ideal(static_cast<Eigen::Index>(rng.integer(std::uint64_t{1} << n))) = 1.0;
        } else {
            s = random_cluster_union(st, rng);
            ideal = testing::random_distribution(rng, Eigen::Index{1} << n);
        }

        const double bound = mitigation_error_bound(model, s);
        Distribution noisy(exact_noisy_marginal(model, ideal, s), kLooseTol);
        MitigatedMarginal mm = mitigate_marginal(noisy, model, s);
        Vector want = marginalize(ideal, full_set(n), s);
        const double dev_quasi = tvd(mm.quasi.vec(), want);
        const double dev_proj = tvd(mm.corrected.vec(), want);
        if (dev_quasi > bound + 1e-12) ++violations;
        // projection can cost at most the clipped negative mass again
        if (dev_proj > 2.0 * bound + 1e-12) ++violations;
        if (bound > 1e-9 && dev_quasi >= 0.5 * bound) ++tight;
    }
    CHECK(violations == 0);
    CHECK(tight >= 50);
}

TEST_CASE("statistical epsilon closed form and guards") {
    CHECK(std::abs(statistical_epsilon(2, 10000, 0.05, 28) - 0.0187364) <= 1e-7);
    const double lone = std::sqrt((std::log(6.0) + std::log(10.0)) / 10000.0);
    CHECK(std::abs(statistical_epsilon(3, 5000, 0.1, 1) - lone) <= 1e-15);
    const double once = statistical_epsilon(4, 7777, 0.03, 5);
    const double twice = statistical_epsilon(4, 2 * 7777, 0.03, 5);
    CHECK(std::abs(twice - once / std::sqrt(2.0)) <= 1e-15);
    CHECK(statistical_epsilon(3, 100, 0.05, 1) > statistical_epsilon(2, 100, 0.05, 1));
    CHECK(statistical_epsilon(2, 100, 0.05, 9) > statistical_epsilon(2, 100, 0.05, 1));
    CHECK_THROWS_AS(statistical_epsilon(1, 100, 0.05, 1), ValidationError);
    CHECK_THROWS_AS(statistical_epsilon(2, 0, 0.05, 1), ValidationError);
    CHECK_THROWS_AS(statistical_epsilon(2, 100, 0.0, 1), ValidationError);
    CHECK_THROWS_AS(statistical_epsilon(2, 100, 1.0, 1), ValidationError);
    CHECK_THROWS_AS(statistical_epsilon(2, 100, 0.05, 0), ValidationError);
}

TEST_CASE("statistical epsilon covers empirical deviations") {
    const double eps = statistical_epsilon(2, 10000, 0.05, 1);
    Rng rng(16);
    for (const std::vector<double>& p : {std::vector<double>{0.25, 0.25, 0.25, 0.25},
                                         std::vector<double>{0.5, 0.5}}) {
        int over = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> freq(p.size(), 0.0);
            for (int shot = 0; shot < 10000; ++shot) {
                double u = rng.uniform();
                std::size_t idx = 0;
                while (idx + 1 < p.size() && u >= p[idx]) { u -= p[idx]; ++idx; }
                freq[idx] += 1.0;
            }
            double dev = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i)
                dev += std::abs(freq[i] / 10000.0 - p[i]);
            if (0.5 * dev > eps) ++over;
        }
        CHECK(over <= 50);
    }
}

TEST_CASE("combined bound composes the published pieces") {
    Rng rng(17);
    DiagonalHamiltonian h = random_max2sat(4, 3.0, 23);
    std::vector<StochasticMatrix> singles(4, StochasticMatrix(Matrix::Identity(2, 2)));
    NoiseModel identity = NoiseModel::uncorrelated(singles);
    double norm_sum = 0.0;
    std::uint64_t k = 0;
    int widest = 2;
    for (const HamiltonianTerm& t : h.terms) {
        norm_sum += t.norm();
        widest = std::max(widest, static_cast<int>(t.support.size()));
        ++k;
    }
    const double eps = statistical_epsilon(widest, 4096, 0.05, k);
    CHECK(std::abs(combined_energy_bound(h, identity, 4096, 0.05) - 2.0 * norm_sum * eps) <= 1e-12);

    // single term: matches the per-marginal operations verbatim
    NoiseModel device = example_device_model(4, 9);
    DiagonalHamiltonian one;
    one.n_qubits = 4;
    one.terms.push_back({{0, 2}, {0.7, -0.7, -0.7, 0.7}, "zz"});
    const Subset s = device.structure().expand_to_clusters({0, 2});
    const double corr_norm = correction_matrix(average_noise_matrix(device, s)).norm_1to1;
    const double delta = mitigation_error_bound(device, s);
    const double eps_one = statistical_epsilon(static_cast<int>(s.size()), 2048, 0.1, 1);
    CHECK(std::abs(combined_energy_bound(one, device, 2048, 0.1) -
                   2.0 * 0.7 * (eps_one * corr_norm + delta)) <= 1e-12);

    DiagonalHamiltonian wrong = random_max2sat(5, 2.0, 1);
    CHECK_THROWS_AS(combined_energy_bound(wrong, identity, 100, 0.05), ValidationError);
}

TEST_CASE("combined bound covers end-to-end sampled estimates") {
    NoiseModel model = example_device_model(6, 21);
    int covered = 0;
    int improved = 0;
    for (int trial = 0; trial < 200; ++trial) {
        DiagonalHamiltonian h = random_max2sat(6, 4.0, 100 + static_cast<std::uint64_t>(trial));
        auto [gs, true_e] = ground_state(h);
        Rng rng = Rng::substream(77, static_cast<std::uint64_t>(trial));
        std::map<std::string, std::uint64_t> counts;
        for (int shot = 0; shot < 8192; ++shot) ++counts[model.sample(gs, rng)];
        MitigationReport report = mitigate_energy(h, counts, model, 0.05);
        if (std::abs(report.mitigated_energy - true_e) <= report.combined_bound) ++covered;
        if (trial < 100 &&
            std::abs(report.mitigated_energy - true_e) < std::abs(report.raw_energy - true_e))
            ++improved;
        CHECK(std::abs(report.combined_bound -
                       combined_energy_bound(h, model, report.samples, 0.05)) <= 1e-12);
    }
    CHECK(covered >= 190);
    CHECK(improved >= 90);
}

TEST_CASE("chebyshev sample bound") {
    CHECK(std::abs(chebyshev_sample_bound(1.0, 1.0, 0.04) - 25.0) <= 1e-12);
    CHECK(chebyshev_sample_bound(0.0, 1.0, 0.1) == 0.0);
    const double base = chebyshev_sample_bound(3.0, 0.5, 0.05);
    CHECK(std::abs(chebyshev_sample_bound(3.0, 2.0, 0.05) - base / 16.0) <= 1e-12);
    CHECK_THROWS_AS(chebyshev_sample_bound(-1.0, 1.0, 0.1), ValidationError);
    CHECK_THROWS_AS(chebyshev_sample_bound(1.0, 0.0, 0.1), ValidationError);
    CHECK_THROWS_AS(chebyshev_sample_bound(1.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("graph variance bound formulas") {
    // dual evaluation of the q = 2 exponents
    const double x = std::abs(std::log(std::log(2.0)) / std::log(4.0));
    const double want_A = 0.5 * (2.0 + x) / (1.0 + x);
    const double want_a = 0.5 / (3.0 * (1.0 + x));
    GraphVarianceBound vb = random_graph_variance_bound(10000, 20000, 0, 1.0, 0.5);
    CHECK(std::abs(vb.var_exponent - want_A) <= 1e-12);
    CHECK(std::abs(vb.prob_exponent - want_a) <= 1e-12);
    CHECK(std::abs(vb.var_exponent - 0.8954505) <= 1e-6);
    CHECK_FALSE(vb.admissible); // 10^4 nodes is far from the asymptotic regime
    CHECK(vb.bound == 0.0);

    // exponents depend on n, k only through their ratio
    GraphVarianceBound scaled = random_graph_variance_bound(10, 20, 0, 1.0, 0.5);
    CHECK(std::abs(scaled.var_exponent - vb.var_exponent) <= 1e-15);

    // huge instances do admit shallow depths
    const std::int64_t big = 4000000000000000000;
    GraphVarianceBound ok = random_graph_variance_bound(big, 2 * big, 0, 1.0, 0.5);
    CHECK(ok.admissible);
    CHECK(std::abs(ok.bound - 2.0 * std::pow(static_cast<double>(big),
                                             ok.var_exponent + 1.0)) <=
          1e-9 * ok.bound);
    GraphVarianceBound deep = random_graph_variance_bound(big, 2 * big, 5, 1.0, 0.5);
    CHECK_FALSE(deep.admissible);
    CHECK(deep.bound == 0.0);

    // w = 1/2 keeps the variance sub-quadratic for any degree
    for (std::int64_t q : {1, 2, 4, 8, 100}) {
        GraphVarianceBound g = random_graph_variance_bound(1000, 1000 * q, 0, 1.0, 0.5);
        CHECK(g.var_exponent < 1.0);
        CHECK(g.var_exponent > 0.0);
        CHECK(g.prob_exponent > 0.0);
    }
    // and a careless w breaks it
    CHECK(random_graph_variance_bound(1000, 2000, 0, 1.0, 0.95).var_exponent > 1.0);

    // degenerate log base (q = 1/2) claims nothing
    GraphVarianceBound degen = random_graph_variance_bound(2, 1, 0, 1.0, 0.5);
    CHECK_FALSE(degen.admissible);
    CHECK(degen.var_exponent == 0.0);
    // sparse graphs fail the depth condition outright
    CHECK_FALSE(random_graph_variance_bound(10, 1, 0, 1.0, 0.5).admissible);

    CHECK_THROWS_AS(random_graph_variance_bound(10, 20, 0, 1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(random_graph_variance_bound(10, 20, 0, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(random_graph_variance_bound(10, 20, 0, 1.0, 1.2), ValidationError);
    CHECK_THROWS_AS(random_graph_variance_bound(0, 20, 0, 1.0, 0.5), ValidationError);
    CHECK_THROWS_AS(random_graph_variance_bound(10, 0, 0, 1.0, 0.5), ValidationError);
    CHECK_THROWS_AS(random_graph_variance_bound(10, 20, -1, 1.0, 0.5), ValidationError);
}

TEST_CASE("energy from marginals matches the global expectation") {
    Rng rng(18);

    DiagonalHamiltonian zz;
    zz.n_qubits = 2;
    zz.terms.push_back({{0, 1}, {0.4, -0.4, -0.4, 0.4}, "zz"});
    Vector point = Vector::Zero(4);
    point(0) = 1.0;
    std::map<Subset, Distribution> one;
    one.emplace(Subset{0, 1}, Distribution(point));
    CHECK(std::abs(energy_from_marginals(zz, one) - 0.4) <= 1e-15);

    DiagonalHamiltonian field;
    field.n_qubits = 1;
    field.terms.push_back({{0}, {0.9, -0.9}, "z"});
    std::map<Subset, Distribution> uniform;
    uniform.emplace(Subset{0}, Distribution(Vector::Constant(2, 0.5)));
    CHECK(std::abs(energy_from_marginals(field, uniform)) <= 1e-15);

    DiagonalHamiltonian h = random_fully_connected(6, 31);
    Vector p = testing::random_distribution(rng, 64);
    double want = 0.0;
    for (Eigen::Index x = 0; x < 64; ++x)
        want += p(x) * h.energy_of(static_cast<std::size_t>(x));

    std::map<Subset, Distribution> per_term;
    for (const HamiltonianTerm& t : h.terms)
        per_term.emplace(t.support, Distribution(marginalize(p, full_set(6), t.support), kLooseTol));
    CHECK(std::abs(energy_from_marginals(h, per_term) - want) <= 1e-10);

    // a single full-register marginal serves every term via the superset path
    std::map<Subset, Distribution> global;
    global.emplace(full_set(6), Distribution(p));
    CHECK(std::abs(energy_from_marginals(h, global) - want) <= 1e-10);

    std::map<Subset, Distribution> partial = per_term;
    partial.erase(h.terms[0].support);
    CHECK_THROWS_AS(energy_from_marginals(h, partial), ValidationError);

    std::map<Subset, Distribution> mislabeled;
    mislabeled.emplace(Subset{0}, Distribution(testing::random_distribution(rng, 4)));
    CHECK_THROWS_AS(energy_from_marginals(field, mislabeled), ValidationError);
}

TEST_CASE("mitigated exact marginals reproduce the ideal energy without neighbors") {
    Rng rng(19);
    CorrelationStructure st;
    st.n_qubits = 5;
    st.clusters = {{0, 1}, {2}, {3, 4}};
    st.neighborhoods = {{}, {}, {}};
    std::vector<std::vector<StochasticMatrix>> mats;
    mats.push_back({StochasticMatrix(testing::random_stochastic(rng, 4, 0.4))});
    mats.push_back({StochasticMatrix(testing::random_stochastic(rng, 2, 0.4))});
    mats.push_back({StochasticMatrix(testing::random_stochastic(rng, 4, 0.4))});
    NoiseModel model(std::move(st), std::move(mats));

    DiagonalHamiltonian h = random_fully_connected(5, 8);
    Vector ideal = testing::random_distribution(rng, 32);
    double want = 0.0;
    for (Eigen::Index x = 0; x < 32; ++x)
        want += ideal(x) * h.energy_of(static_cast<std::size_t>(x));

    std::map<Subset, Distribution> corrected;
    for (const HamiltonianTerm& t : h.terms) {
        const Subset s = model.structure().expand_to_clusters(t.support);
        if (corrected.count(s)) continue;
        Distribution noisy(exact_noisy_marginal(model, ideal, s), kLooseTol);
        corrected.emplace(s, mitigate_marginal(noisy, model, s).corrected);
    }
    CHECK(std::abs(energy_from_marginals(h, corrected) - want) <= 1e-8);
}

TEST_CASE("expanding to the whole cluster beats coarse-grained correction") {
    Rng rng(20);
    // qubit 0 and 1 read out jointly, each flip rate dragged up by the
    // partner's prepared one; qubit 2 clean
    CorrelationStructure st;
    st.n_qubits = 3;
    st.clusters = {{0, 1}, {2}};
    st.neighborhoods = {{}, {}};
    Matrix joint(4, 4);
    for (int y = 0; y < 4; ++y) {
        const int y0 = (y >> 1) & 1, y1 = y & 1;
        const double f0 = 0.02 + 0.30 * y1;
        const double f1 = 0.02 + 0.30 * y0;
        for (int xx = 0; xx < 4; ++xx) {
            const int x0 = (xx >> 1) & 1, x1 = xx & 1;
            joint(xx, y) = (x0 == y0 ? 1.0 - f0 : f0) * (x1 == y1 ? 1.0 - f1 : f1);
        }
    }
    std::vector<std::vector<StochasticMatrix>> mats;
    mats.push_back({StochasticMatrix(joint)});
    mats.push_back({StochasticMatrix(Matrix::Identity(2, 2))});
    NoiseModel model(std::move(st), std::move(mats));

    // coarse 2x2 response on qubit 0 averaged over every other preparation
    Matrix lam = model.global_matrix();
    Matrix coarse = Matrix::Zero(2, 2);
    for (Eigen::Index x = 0; x < 8; ++x)
        for (Eigen::Index y = 0; y < 8; ++y)
            coarse((y >> 2) & 1, (x >> 2) & 1) += lam(y, x) / 4.0;
    Matrix coarse_inv = coarse.inverse();

    double mean_expanded = 0.0, mean_coarse = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Vector ideal = testing::random_distribution(rng, 8);
        Vector want = marginalize(ideal, full_set(3), {0});

        Distribution wide(exact_noisy_marginal(model, ideal, {0, 1}), kLooseTol);
        Vector via_cluster =
            marginalize(mitigate_marginal(wide, model, {0, 1}).corrected.vec(), {0, 1}, {0});
        mean_expanded += tvd(via_cluster, want);

        Vector narrow = exact_noisy_marginal(model, ideal, {0});
        mean_coarse += tvd(project_to_simplex(coarse_inv * narrow).vec(), want);
    }
    mean_expanded /= 50.0;
    mean_coarse /= 50.0;
    CHECK(mean_expanded <= 1e-10);
    CHECK(mean_expanded < mean_coarse);
    CHECK(mean_coarse > 1e-4);
}

TEST_CASE("mitigation report bookkeeping") {
    std::vector<StochasticMatrix> singles(4, StochasticMatrix(Matrix::Identity(2, 2)));
    NoiseModel identity = NoiseModel::uncorrelated(singles);
    DiagonalHamiltonian h = random_max2sat(4, 3.0, 41);
    std::map<std::string, std::uint64_t> counts{{"0000", 700}, {"1010", 300}};

    MitigationReport report = mitigate_energy(h, counts, identity, 0.05);
    CHECK(report.samples == 1000);
    CHECK(std::abs(report.raw_energy - report.mitigated_energy) <= 1e-9);
    CHECK(report.combined_bound >= 0.0);
    CHECK(report.terms.size() == h.terms.size());
    CHECK(std::abs(report.combined_bound - combined_energy_bound(h, identity, 1000, 0.05)) <=
          1e-12);
    double manual = 0.0;
    for (const auto& [bits, c] : counts)
        manual += static_cast<double>(c) / 1000.0 * h.energy_of(bits);
    CHECK(std::abs(report.raw_energy - manual) <= 1e-10);

    nlohmann::json j = report.to_json();
    CHECK(j["schema"] == "qrem-mitigation-1");
    CHECK(j["terms"].size() == h.terms.size());
    CHECK(j["combined_bound"].get<double>() >= 0.0);
    for (const auto& jt : j["terms"]) {
        const std::size_t dim = std::size_t{1} << jt["expanded"].size();
        CHECK(jt["corrected"].size() == dim);
        CHECK(jt["quasi"].size() == dim);
        CHECK(jt["approx_bound"].get<double>() >= 0.0);
        CHECK(jt["correction_norm"].get<double>() >= 1.0 - 1e-12);
    }

    MitigationReport quasi = mitigate_energy(h, counts, identity, 0.05, true);
    CHECK(quasi.raw_quasi);
    CHECK(std::abs(quasi.mitigated_energy - report.mitigated_energy) <= 1e-9);

    CHECK_THROWS_AS(mitigate_energy(h, {}, identity, 0.05), ValidationError);
    std::map<std::string, std::uint64_t> bad{{"000", 5}};
    CHECK_THROWS_AS(mitigate_energy(h, bad, identity, 0.05), ValidationError);
    DiagonalHamiltonian wrong = random_max2sat(5, 2.0, 3);
    CHECK_THROWS_AS(mitigate_energy(wrong, counts, identity, 0.05), ValidationError);

    CorrelationStructure st;
    st.n_qubits = 1;
    st.clusters = {{0}};
    st.neighborhoods = {{}};
    Matrix flat(2, 2);
    flat << 0.5, 0.5, 0.5, 0.5;
    NoiseModel singular(std::move(st), {{StochasticMatrix(flat)}});
    DiagonalHamiltonian h1;
    h1.n_qubits = 1;
    h1.terms.push_back({{0}, {1.0, -1.0}, "z0"});
    std::map<std::string, std::uint64_t> c1{{"0", 10}};
    CHECK_THROWS_AS(mitigate_energy(h1, c1, singular, 0.05), SingularModelError);
}
