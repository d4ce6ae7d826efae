#include "qrem/ddot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qrem/errors.hpp"
#include "qrem/io.hpp"
#include "qrem/probability.hpp"

namespace qrem {

namespace {

void require_locality(int n, int k) {
    if (n <= 0) throw ValidationError("ddot: n must be positive");
    if (k < 1 || k > n) throw ValidationError("ddot: locality k must satisfy 1 <= k <= n");
    if (k > 20) throw ValidationError("ddot: locality k too large to enumerate");
}

std::string random_circuit(int n, Rng& rng) {
    std::string s(static_cast<std::size_t>(n), '0');
    for (int q = 0; q < n; ++q)
        if (rng.bit()) s[static_cast<std::size_t>(q)] = '1';
    return s;
}

/// Appearance counts for every (subset, state) cell; subsets in
/// lexicographic order.
std::vector<std::vector<std::uint64_t>> tally(const DdotCollection& c, int k,
                                              const std::vector<Subset>& subsets) {
    std::vector<std::vector<std::uint64_t>> counts(
        subsets.size(), std::vector<std::uint64_t>(std::size_t{1} << k, 0));
    for (const std::string& circ : c.circuits)
        for (std::size_t i = 0; i < subsets.size(); ++i)
            ++counts[i][index_of(circ, subsets[i])];
    return counts;
}

} // namespace

void DdotCollection::validate() const {
    if (n_qubits <= 0) throw ValidationError("DdotCollection: n_qubits must be positive");
    for (const std::string& circ : circuits) {
        if (static_cast<int>(circ.size()) != n_qubits)
            throw ValidationError("DdotCollection: circuit length mismatch");
        for (char ch : circ)
            if (ch != '0' && ch != '1')
                throw ValidationError("DdotCollection: circuit contains non-binary character");
    }
}

DdotCollection generate_random_circuits(int n, int k, std::size_t extra, std::uint64_t seed,
                                        bool grow_until_perfect) {
    require_locality(n, k);
    DdotCollection c;
    c.n_qubits = n;
    c.circuits.push_back(std::string(static_cast<std::size_t>(n), '0'));
    c.circuits.push_back(std::string(static_cast<std::size_t>(n), '1'));
    Rng rng(seed);
    for (std::size_t t = 0; t < extra; ++t) c.circuits.push_back(random_circuit(n, rng));
    if (grow_until_perfect) {
        auto missing = is_perfect(c, k).missing;
        while (!missing.empty()) {
            std::string circ = random_circuit(n, rng);
            c.circuits.push_back(circ);
            std::erase_if(missing, [&](const auto& cell) {
                return index_of(circ, cell.first) == cell.second;
            });
        }
    }
    return c;
}

std::vector<std::string> circuits_from_hash(const std::vector<int>& f, int k) {
    if (k < 1 || k > 20) throw ValidationError("circuits_from_hash: bad locality");
    for (int v : f)
        if (v < 0 || v >= k) throw ValidationError("circuits_from_hash: hash value out of range");
    std::vector<std::string> out;
    const std::size_t top = std::size_t{1} << k;
    for (std::size_t x = 1; x + 1 < top; ++x) {  // skip the two constant patterns
        std::string pattern = bits_of(x, k);
        std::string circ(f.size(), '0');
        for (std::size_t j = 0; j < f.size(); ++j)
            circ[j] = pattern[static_cast<std::size_t>(f[j])];
        out.push_back(std::move(circ));
    }
    return out;
}

DdotCollection generate_hash_circuits(int n, int k, std::size_t n_hashes, std::uint64_t seed,
                                      bool grow_until_perfect) {
    require_locality(n, k);
    DdotCollection c;
    c.n_qubits = n;
    c.circuits.push_back(std::string(static_cast<std::size_t>(n), '0'));
    c.circuits.push_back(std::string(static_cast<std::size_t>(n), '1'));
    Rng rng(seed);
    auto add_batch = [&] {
        std::vector<int> f(static_cast<std::size_t>(n));
        for (int q = 0; q < n; ++q)
            f[static_cast<std::size_t>(q)] = static_cast<int>(rng.integer(static_cast<std::uint64_t>(k)));
        for (std::string& circ : circuits_from_hash(f, k)) c.circuits.push_back(std::move(circ));
    };
    for (std::size_t t = 0; t < n_hashes; ++t) add_batch();
    if (grow_until_perfect) {
        while (!is_perfect(c, k).perfect) add_batch();
    }
    return c;
}

PerfectionReport is_perfect(const DdotCollection& c, int k) {
    c.validate();
    require_locality(c.n_qubits, k);
    PerfectionReport report;
    report.perfect = true;
    const std::size_t states = std::size_t{1} << k;
    for (const Subset& s : combinations(c.n_qubits, k)) {
        std::vector<bool> seen(states, false);
        std::size_t found = 0;
        for (const std::string& circ : c.circuits) {
            std::size_t idx = index_of(circ, s);
            if (!seen[idx]) {
                seen[idx] = true;
                if (++found == states) break;
            }
        }
        if (found != states) {
            report.perfect = false;
            for (std::size_t x = 0; x < states; ++x)
                if (!seen[x]) report.missing.emplace_back(s, x);
        }
    }
    return report;
}

double circuits_bound(int n, int k, double delta, BoundMethod method) {
    require_locality(n, k);
    if (delta <= 0.0 || delta >= 1.0)
        throw ValidationError("circuits_bound: delta must be inside (0,1)");
    const double pow2k = std::ldexp(1.0, k);
    switch (method) {
        case BoundMethod::random:
            return pow2k * (k * std::log(2.0 * n) + std::log(1.0 / delta));
        case BoundMethod::hash: {
            if (k == 1) return 2.0;  // the two constant circuits already cover k=1
            // chance that one hash separates a fixed k-subset: k!/k^k
            double log_hit = std::lgamma(k + 1.0) - k * std::log(static_cast<double>(k));
            double log_miss = std::log1p(-std::exp(log_hit));
            double hashes = (log_binomial(n, k) + std::log(1.0 / delta)) / (-log_miss);
            return 2.0 + (pow2k - 2.0) * hashes;
        }
    }
    throw ValidationError("circuits_bound: unknown method");
}

double balance_bound(int n, int k, double delta, double eps) {
    require_locality(n, k);
    if (delta <= 0.0 || delta >= 1.0 || eps <= 0.0)
        throw ValidationError("balance_bound: need delta in (0,1) and eps > 0");
    const double pow2k = std::ldexp(1.0, k);
    return (pow2k * std::log(2.0) + log_binomial(n, k) + std::log(1.0 / delta)) /
           (2.0 * eps * eps);
}

BalanceReport balance_report(const DdotCollection& c, int k) {
    c.validate();
    require_locality(c.n_qubits, k);
    const auto subsets = combinations(c.n_qubits, k);
    const auto counts = tally(c, k, subsets);
    BalanceReport report;
    report.k = k;
    report.n_circuits = c.circuits.size();
    const double s = static_cast<double>(c.circuits.size());
    const double uniform = 1.0 / std::ldexp(1.0, k);
    double mean = 0.0;
    std::size_t cells = 0;
    for (const auto& sub : counts) {
        double dist = 0.0;
        for (std::uint64_t v : sub) {
            if (v == 0) ++report.missing_cells;
            if (s > 0) dist += std::abs(static_cast<double>(v) / s - uniform);
            mean += static_cast<double>(v);
            ++cells;
        }
        report.max_tvd_from_uniform = std::max(report.max_tvd_from_uniform, 0.5 * dist);
    }
    mean /= static_cast<double>(cells);
    double var = 0.0;
    for (const auto& sub : counts)
        for (std::uint64_t v : sub) var += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
    report.appearance_std = std::sqrt(var / static_cast<double>(cells));
    return report;
}

DdotCollection heuristic_balance(const DdotCollection& c, int k, std::size_t rounds,
                                 std::uint64_t seed) {
    c.validate();
    require_locality(c.n_qubits, k);
    const int n = c.n_qubits;
    const auto subsets = combinations(n, k);
    auto counts = tally(c, k, subsets);
    DdotCollection out = c;
    Rng rng(seed);

    struct Cell {
        std::uint64_t count;
        std::size_t subset;
        std::size_t state;
    };
    const std::size_t per_round = static_cast<std::size_t>(n / k);
    for (std::size_t round = 0; round < rounds; ++round) {
        std::vector<Cell> cells;
        cells.reserve(subsets.size() << k);
        for (std::size_t i = 0; i < subsets.size(); ++i)
            for (std::size_t x = 0; x < counts[i].size(); ++x)
                cells.push_back({counts[i][x], i, x});
        std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
            if (a.count != b.count) return a.count < b.count;
            if (a.subset != b.subset) return a.subset < b.subset;
            return a.state < b.state;
        });
        std::vector<bool> used(static_cast<std::size_t>(n), false);
        std::string circ(static_cast<std::size_t>(n), '?');
        std::size_t chosen = 0;
        for (const Cell& cell : cells) {
            if (chosen == per_round) break;
            const Subset& s = subsets[cell.subset];
            bool clash = false;
            for (int q : s)
                if (used[static_cast<std::size_t>(q)]) { clash = true; break; }
            if (clash) continue;
            for (int j = 0; j < k; ++j) {
                int bit = static_cast<int>((cell.state >> (k - 1 - j)) & 1u);
                circ[static_cast<std::size_t>(s[static_cast<std::size_t>(j)])] =
                    static_cast<char>('0' + bit);
                used[static_cast<std::size_t>(s[static_cast<std::size_t>(j)])] = true;
            }
            ++chosen;
        }
        for (int q = 0; q < n; ++q)
            if (circ[static_cast<std::size_t>(q)] == '?')
                circ[static_cast<std::size_t>(q)] = rng.bit() ? '1' : '0';
        out.circuits.push_back(circ);
        for (std::size_t i = 0; i < subsets.size(); ++i)
            ++counts[i][index_of(circ, subsets[i])];
    }
    return out;
}

void save_collection(const std::string& path, const DdotCollection& c, int k) {
    c.validate();
    std::ostringstream ss;
    ss << "# ddot N=" << c.n_qubits << " k=" << k << "\n";
    for (const std::string& circ : c.circuits) ss << circ << "\n";
    atomic_write_text(path, ss.str());
}

std::pair<DdotCollection, int> load_collection(const std::string& path) {
    std::istringstream in(read_text(path));
    std::string header;
    if (!std::getline(in, header)) throw ValidationError("collection file is empty: " + path);
    int n = 0, k = 0;
    if (std::sscanf(header.c_str(), "# ddot N=%d k=%d", &n, &k) != 2)
        throw ValidationError("collection file missing '# ddot N=<n> k=<k>' header: " + path);
    DdotCollection c;
    c.n_qubits = n;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        c.circuits.push_back(line);
    }
    c.validate();
    return {c, k};
}

void save_collection_json(const std::string& path, const DdotCollection& c, int k) {
    c.validate();
    nlohmann::json j;
    j["schema"] = "qrem-ddot-1";
    j["n_qubits"] = c.n_qubits;
    j["k"] = k;
    j["circuits"] = c.circuits;
    atomic_write_json(path, j);
}

} // namespace qrem
