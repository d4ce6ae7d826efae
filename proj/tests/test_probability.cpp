#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <string>

#include "qrem/bits.hpp"
#include "qrem/probability.hpp"
#include "qrem/rng.hpp"

using namespace qrem;

namespace {

Vector random_distribution(Rng& rng, Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform() + 1e-6;
    return v / v.sum();
}

Matrix random_stochastic(Rng& rng, Eigen::Index n) {
    Matrix m(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = 0; r < n; ++r) m(r, c) = rng.uniform() + 1e-6;
        m.col(c) /= m.col(c).sum();
    }
    return m;
}

// Exhaustive quadratic-program oracle for the simplex projection: try
// every possible support set, solve the equality-constrained problem in
// closed form, keep the feasible solution (it is unique).
Vector simplex_projection_oracle(const Vector& v) {
    const int n = static_cast<int>(v.size());
    Vector best;
    double best_dist = 1e300;
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) { sum += v(i); ++count; }
        double theta = (sum - 1.0) / count;
        Vector x = Vector::Zero(n);
        bool feasible = true;
        for (int i = 0; i < n; ++i) {
            if (mask & (std::size_t{1} << i)) {
                x(i) = v(i) - theta;
                if (x(i) < -1e-12) feasible = false;
            }
        }
        if (!feasible) continue;
        // KKT: coordinates off the support must not want to re-enter.
        for (int i = 0; i < n; ++i)
            if (!(mask & (std::size_t{1} << i)) && v(i) - theta > 1e-12) feasible = false;
        if (!feasible) continue;
        double dist = (x - v).squaredNorm();
        if (dist < best_dist) { best_dist = dist; best = x; }
    }
    return best;
}

} // namespace

TEST_CASE("tvd basics") {
    Vector p(2), q(2);
    p << 0.7, 0.3;
    q << 0.6, 0.4;
    CHECK(tvd(p, p) == doctest::Approx(0.0));
    CHECK(tvd(p, q) == doctest::Approx(0.1));
    Vector r(3);
    r << 0.2, 0.3, 0.5;
    CHECK_THROWS_AS(tvd(p, r), ValidationError);
}

TEST_CASE("norm_1to1 is the maximum absolute column sum") {
    Matrix a(2, 2);
    a << 1.125, -0.125, -0.125, 1.125;
    CHECK(norm_1to1(a) == doctest::Approx(1.25));
    Matrix b(2, 3);
    b << 1.0, -2.0, 0.5, 0.25, 1.0, -0.5;
    CHECK(norm_1to1(b) == doctest::Approx(3.0));
}

TEST_CASE("norm_1to1 is submultiplicative on random pairs") {
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
        Matrix a(4, 4), b(4, 4);
        for (int i = 0; i < 16; ++i) {
            a(i / 4, i % 4) = 2.0 * rng.uniform() - 1.0;
            b(i / 4, i % 4) = 2.0 * rng.uniform() - 1.0;
        }
        CHECK(norm_1to1(a * b) <= norm_1to1(a) * norm_1to1(b) + 1e-12);
    }
}

TEST_CASE("distribution and stochastic matrix validation") {
    Vector bad(2);
    bad << -0.1, 1.1;
    CHECK_THROWS_AS(Distribution{bad}, ValidationError);
    Vector off(2);
    off << 0.6, 0.6;
    CHECK_THROWS_AS(Distribution{off}, ValidationError);
    Vector ok(2);
    ok << 0.25, 0.75;
    CHECK_NOTHROW(Distribution{ok});

    Matrix m(2, 2);
    m << 0.9, 0.2, 0.2, 0.8;  // first column sums to 1.1
    CHECK_THROWS_AS(StochasticMatrix{m}, ValidationError);
    m << 0.9, 0.2, 0.1, 0.8;
    CHECK_NOTHROW(StochasticMatrix{m});
}

TEST_CASE("applying a stochastic matrix yields a distribution and contracts tvd") {
    Rng rng(17);
    for (int t = 0; t < 40; ++t) {
        StochasticMatrix lam(random_stochastic(rng, 8));
        Distribution p(random_distribution(rng, 8));
        Distribution q(random_distribution(rng, 8));
        Distribution lp = lam.apply(p);
        Distribution lq = lam.apply(q);
        CHECK(tvd(lp, lq) <= tvd(p, q) + 1e-12);
    }
}

TEST_CASE("simplex projection matches the exhaustive oracle") {
    Vector v(2);
    v << 1.2, -0.2;
    Distribution p = project_to_simplex(v);
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p[1] == doctest::Approx(0.0).epsilon(1e-9));

    Rng rng(23);
    for (int t = 0; t < 200; ++t) {
        Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.integer(7));
        Vector u(n);
        for (Eigen::Index i = 0; i < n; ++i) u(i) = 3.0 * rng.uniform() - 1.0;
        Vector expect = simplex_projection_oracle(u);
        Distribution got = project_to_simplex(u);
        CHECK((got.vec() - expect).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("simplex projection leaves feasible points alone") {
    Rng rng(29);
    for (int t = 0; t < 30; ++t) {
        Vector p = random_distribution(rng, 6);
        Distribution proj = project_to_simplex(p);
        CHECK((proj.vec() - p).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("simplex projection never increases distance to feasible points") {
    Rng rng(31);
    for (int t = 0; t < 100; ++t) {
        Vector v(5);
        for (int i = 0; i < 5; ++i) v(i) = 4.0 * rng.uniform() - 2.0;
        Vector proj = project_to_simplex(v).vec();
        Vector y = random_distribution(rng, 5);
        CHECK((proj - y).norm() <= (v - y).norm() + 1e-12);
    }
}

TEST_CASE("marginalize sums out the dropped qubits") {
    Vector p(4);
    p << 0.1, 0.2, 0.3, 0.4;  // over qubits {0,1}
    Vector m = marginalize(p, {0, 1}, {1});
    CHECK(m(0) == doctest::Approx(0.4));
    CHECK(m(1) == doctest::Approx(0.6));
    Vector keep_all = marginalize(p, {0, 1}, {0, 1});
    CHECK((keep_all - p).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK_THROWS_AS(marginalize(p, {0, 1}, {2}), ValidationError);
}

TEST_CASE("marginalize agrees with a string-keyed oracle") {
    Rng rng(37);
    const Subset from = {1, 3, 4, 6};
    const Subset keep = {1, 4};
    for (int t = 0; t < 20; ++t) {
        Vector p = random_distribution(rng, 16);
        // Oracle: tabulate through explicit bitstrings on 7 qubits.
        std::map<std::string, double> acc;
        for (std::size_t idx = 0; idx < 16; ++idx) {
            std::string local = bits_of(idx, 4);
            std::string global(7, '0');
            for (int j = 0; j < 4; ++j)
                global[static_cast<std::size_t>(from[static_cast<std::size_t>(j)])] =
                    local[static_cast<std::size_t>(j)];
            std::string kept;
            for (int q : keep) kept.push_back(global[static_cast<std::size_t>(q)]);
            acc[kept] += p(static_cast<Eigen::Index>(idx));
        }
        Vector got = marginalize(p, from, keep);
        for (std::size_t idx = 0; idx < 4; ++idx)
            CHECK(got(static_cast<Eigen::Index>(idx)) ==
                  doctest::Approx(acc[bits_of(idx, 2)]).epsilon(1e-12));
    }
}

TEST_CASE("subset indexing follows the leftmost-is-qubit-zero convention") {
    CHECK(index_of("011", {0, 2}) == 1);
    CHECK(index_of("011") == 3);
    CHECK(index_of("100") == 4);
    CHECK(bits_of(4, 3) == "100");
    CHECK(gather_bits(index_of("0110"), {1, 2}, 4) == 3);
    CHECK(scatter_bits(3, {1, 2}, 4) == index_of("0110"));
    CHECK(bit_at(index_of("0100"), 1, 4) == 1);
    CHECK(bit_at(index_of("0100"), 0, 4) == 0);
}
