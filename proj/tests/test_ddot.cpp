#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "qrem/ddot.hpp"
#include "qrem/errors.hpp"
#include "qrem/io.hpp"
#include "qrem/rng.hpp"

using namespace qrem;

namespace {

// Independent perfection oracle: collect the distinct restrictions of
// every subset as strings and count them.
bool perfection_oracle(const DdotCollection& c, int k) {
    for (const Subset& s : combinations(c.n_qubits, k)) {
        std::set<std::string> seen;
        for (const std::string& circ : c.circuits) {
            std::string r;
            for (int q : s) r.push_back(circ[static_cast<std::size_t>(q)]);
            seen.insert(r);
        }
        if (seen.size() != (std::size_t{1} << k)) return false;
    }
    return true;
}

DdotCollection constants_only(int n) {
    DdotCollection c;
    c.n_qubits = n;
    c.circuits = {std::string(static_cast<std::size_t>(n), '0'),
                  std::string(static_cast<std::size_t>(n), '1')};
    return c;
}

} // namespace

TEST_CASE("hash circuits: worked example f=(0,0,1,1), k=2") {
    auto circuits = circuits_from_hash({0, 0, 1, 1}, 2);
    REQUIRE(circuits.size() == 2);
    CHECK(circuits[0] == "0011");
    CHECK(circuits[1] == "1100");
}

TEST_CASE("hash collection size is 2 + L(2^k - 2)") {
    for (int k = 2; k <= 4; ++k) {
        for (std::size_t L : {1u, 3u, 7u}) {
            DdotCollection c = generate_hash_circuits(10, k, L, 42);
            CHECK(c.circuits.size() == 2 + L * ((std::size_t{1} << k) - 2));
            CHECK(c.circuits[0] == std::string(10, '0'));
            CHECK(c.circuits[1] == std::string(10, '1'));
        }
    }
}

TEST_CASE("constant circuits are perfect for k=1 but not k=2") {
    DdotCollection c = constants_only(5);
    CHECK(is_perfect(c, 1).perfect);
    PerfectionReport r = is_perfect(c, 2);
    CHECK(!r.perfect);
    // every pair misses exactly the two mixed states 01 and 10
    CHECK(r.missing.size() == 2 * combinations(5, 2).size());
    for (const auto& [subset, state] : r.missing) CHECK((state == 1 || state == 2));
}

TEST_CASE("perfection check agrees with the set-based oracle") {
    Rng rng(211);
    for (int t = 0; t < 30; ++t) {
        int n = 4 + static_cast<int>(rng.integer(5));  // 4..8
        int k = 2 + static_cast<int>(rng.integer(2));  // 2..3
        std::size_t extra = rng.integer(30);
        DdotCollection c = generate_random_circuits(n, k, extra, 1000 + static_cast<std::uint64_t>(t));
        CHECK(is_perfect(c, k).perfect == perfection_oracle(c, k));
    }
}

TEST_CASE("random collections at the bound are almost always perfect (N=15, k=5)") {
    const int n = 15, k = 5;
    const auto s = static_cast<std::size_t>(
        std::ceil(circuits_bound(n, k, 0.05, BoundMethod::random)));
    int good = 0;
    for (int seed = 0; seed < 200; ++seed)
        if (is_perfect(generate_random_circuits(n, k, s, static_cast<std::uint64_t>(seed)), k)
                .perfect)
            ++good;
    CHECK(good >= 190);  // the bound promises >= 95% success
}

TEST_CASE("grow-until-perfect delivers a perfect collection") {
    DdotCollection c = generate_random_circuits(8, 2, 0, 7, /*grow_until_perfect=*/true);
    CHECK(is_perfect(c, 2).perfect);
    DdotCollection h = generate_hash_circuits(8, 3, 1, 7, /*grow_until_perfect=*/true);
    CHECK(is_perfect(h, 3).perfect);
}

TEST_CASE("frozen bound values and bound comparisons") {
    // 32 * (5*ln 30 + ln 20)
    CHECK(circuits_bound(15, 5, 0.05, BoundMethod::random) == doctest::Approx(640.055).epsilon(1e-4));
    // k=1 needs only the two constant circuits regardless of delta
    CHECK(circuits_bound(9, 1, 0.5, BoundMethod::hash) == doctest::Approx(2.0));
    // delta -> 1 limit of the random bound at n=1, k=1: 2*ln 2
    CHECK(circuits_bound(1, 1, 0.999999, BoundMethod::random) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-4));
    // hashing needs more circuits than random sampling once k >= 3
    for (int n : {8, 12, 16, 24}) {
        for (int k = 3; k <= 5; ++k) {
            for (double delta : {0.01, 0.05, 0.2}) {
                CHECK(circuits_bound(n, k, delta, BoundMethod::hash) >=
                      circuits_bound(n, k, delta, BoundMethod::random));
            }
        }
    }
    CHECK_THROWS_AS(circuits_bound(4, 5, 0.1, BoundMethod::random), ValidationError);
    CHECK_THROWS_AS(circuits_bound(4, 2, 0.0, BoundMethod::random), ValidationError);
    CHECK(balance_bound(15, 2, 0.05, 0.1) ==
          doctest::Approx((4.0 * std::log(2.0) + std::log(105.0) + std::log(20.0)) / 0.02)
              .epsilon(1e-9));
}

TEST_CASE("balance report on the constant pair") {
    DdotCollection c = constants_only(6);
    BalanceReport r = balance_report(c, 2);
    CHECK(r.n_circuits == 2);
    // each pair sees 00 and 11 once: tvd from uniform = 1/2
    CHECK(r.max_tvd_from_uniform == doctest::Approx(0.5));
    // counts per cell are {1,0,0,1}: mean 1/2, std 1/2
    CHECK(r.appearance_std == doctest::Approx(0.5));
    CHECK(r.missing_cells == 2 * combinations(6, 2).size());
}

TEST_CASE("balancing heuristic: deterministic tie-breaking") {
    // With only the two constant circuits on 4 qubits, the least-seen
    // cells all tie at zero.  Lowest subset {0,1} takes state 01, the
    // only remaining disjoint subset {2,3} also takes 01: circuit 0101.
    DdotCollection c = constants_only(4);
    DdotCollection out = heuristic_balance(c, 2, 1, 99);
    REQUIRE(out.circuits.size() == 3);
    CHECK(out.circuits.back() == "0101");
}

TEST_CASE("balancing heuristic repairs an imperfect collection") {
    DdotCollection c = constants_only(6);
    DdotCollection out = heuristic_balance(c, 2, 40, 5);
    CHECK(is_perfect(out, 2).perfect);
}

TEST_CASE("balancing heuristic flattens appearance counts") {
    int improved = 0;
    for (int seed = 0; seed < 20; ++seed) {
        DdotCollection c =
            generate_random_circuits(8, 2, 40, 3000 + static_cast<std::uint64_t>(seed));
        double before = balance_report(c, 2).appearance_std / static_cast<double>(c.circuits.size());
        DdotCollection out = heuristic_balance(c, 2, 50, static_cast<std::uint64_t>(seed));
        double after =
            balance_report(out, 2).appearance_std / static_cast<double>(out.circuits.size());
        if (after <= before) ++improved;
    }
    CHECK(improved >= 16);  // relative spread shrinks in at least 80% of trials
}

TEST_CASE("generation is deterministic in the seed") {
    DdotCollection a = generate_random_circuits(10, 3, 25, 77);
    DdotCollection b = generate_random_circuits(10, 3, 25, 77);
    DdotCollection c = generate_random_circuits(10, 3, 25, 78);
    CHECK(a.circuits == b.circuits);
    CHECK(a.circuits != c.circuits);
    DdotCollection h1 = generate_hash_circuits(10, 3, 4, 77);
    DdotCollection h2 = generate_hash_circuits(10, 3, 4, 77);
    CHECK(h1.circuits == h2.circuits);
}

TEST_CASE("collection text and json files round trip") {
    DdotCollection c = generate_random_circuits(6, 2, 10, 13);
    const std::string path = std::filesystem::temp_directory_path() / "qrem_test_collection.txt";
    save_collection(path, c, 2);
    auto [back, k] = load_collection(path);
    CHECK(k == 2);
    CHECK(back.n_qubits == 6);
    CHECK(back.circuits == c.circuits);
    // header is the documented one
    std::string text = read_text(path);
    CHECK(text.rfind("# ddot N=6 k=2\n", 0) == 0);
    std::filesystem::remove(path);

    const std::string jpath = std::filesystem::temp_directory_path() / "qrem_test_collection.json";
    save_collection_json(jpath, c, 2);
    auto j = read_json(jpath);
    CHECK(j.at("n_qubits") == 6);
    CHECK(j.at("k") == 2);
    CHECK(j.at("circuits").size() == c.circuits.size());
    std::filesystem::remove(jpath);
}
