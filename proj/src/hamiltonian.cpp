#include "qrem/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "qrem/rng.hpp"

namespace qrem {

double HamiltonianTerm::norm() const {
    double best = 0.0;
    for (double v : diagonal) best = std::max(best, std::abs(v));
    return best;
}

void DiagonalHamiltonian::validate() const {
    if (n_qubits <= 0) throw ValidationError("DiagonalHamiltonian: n_qubits must be positive");
    for (const HamiltonianTerm& t : terms) {
        require_subset(t.support, n_qubits, "hamiltonian term");
        if (t.diagonal.size() != (std::size_t{1} << t.support.size()))
            throw ValidationError("DiagonalHamiltonian: diagonal length must be 2^|support|");
    }
}

double DiagonalHamiltonian::energy_of(std::size_t basis_index) const {
    double e = 0.0;
    for (const HamiltonianTerm& t : terms)
        e += t.diagonal[gather_bits(basis_index, t.support, n_qubits)];
    return e;
}

double DiagonalHamiltonian::energy_of(const std::string& bits) const {
    if (static_cast<int>(bits.size()) != n_qubits)
        throw ValidationError("energy_of: bitstring length mismatch");
    return energy_of(index_of(bits));
}

std::vector<double> DiagonalHamiltonian::energy_table() const {
    if (n_qubits > 24) throw ValidationError("energy_table: exhaustive enumeration capped at 24 qubits");
    std::vector<double> table(std::size_t{1} << n_qubits, 0.0);
    for (const HamiltonianTerm& t : terms)
        for (std::size_t x = 0; x < table.size(); ++x)
            table[x] += t.diagonal[gather_bits(x, t.support, n_qubits)];
    return table;
}

nlohmann::json DiagonalHamiltonian::to_json() const {
    nlohmann::json j;
    j["schema"] = "qrem-hamiltonian-1";
    j["n_qubits"] = n_qubits;
    if (!label.empty()) j["label"] = label;
    j["terms"] = nlohmann::json::array();
    for (const HamiltonianTerm& t : terms)
        j["terms"].push_back({{"support", t.support}, {"diagonal", t.diagonal}, {"label", t.label}});
    return j;
}

DiagonalHamiltonian DiagonalHamiltonian::from_json(const nlohmann::json& j) {
    try {
        DiagonalHamiltonian h;
        h.n_qubits = j.at("n_qubits").get<int>();
        h.label = j.value("label", std::string{});
        for (const auto& jt : j.at("terms")) {
            HamiltonianTerm t;
            t.support = jt.at("support").get<Subset>();
            t.diagonal = jt.at("diagonal").get<std::vector<double>>();
            t.label = jt.value("label", std::string{});
            h.terms.push_back(std::move(t));
        }
        h.validate();
        return h;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("DiagonalHamiltonian: malformed file: ") + e.what());
    }
}

std::pair<std::string, double> ground_state(const DiagonalHamiltonian& h) {
    h.validate();
    std::vector<double> table = h.energy_table();
    std::size_t best = 0;
    for (std::size_t x = 1; x < table.size(); ++x)
        if (table[x] < table[best]) best = x;  // strict: first (smallest) index wins ties
    return {bits_of(best, h.n_qubits), table[best]};
}

std::vector<SatClause> random_max2sat_clauses(int n, double clause_density, std::uint64_t seed) {
    if (n < 2) throw ValidationError("random_max2sat: need at least two variables");
    if (clause_density <= 0) throw ValidationError("random_max2sat: density must be positive");
    const auto m = static_cast<std::size_t>(clause_density * n);
    Rng rng(seed);
    std::vector<SatClause> clauses;
    for (std::size_t c = 0; c < m; ++c) {
        SatClause cl;
        cl.var_i = static_cast<int>(rng.integer(static_cast<std::uint64_t>(n)));
        do {
            cl.var_j = static_cast<int>(rng.integer(static_cast<std::uint64_t>(n)));
        } while (cl.var_j == cl.var_i);
        if (cl.var_i > cl.var_j) std::swap(cl.var_i, cl.var_j);
        cl.neg_i = rng.bit();
        cl.neg_j = rng.bit();
        clauses.push_back(cl);
    }
    return clauses;
}

DiagonalHamiltonian max2sat_hamiltonian(int n, const std::vector<SatClause>& clauses) {
    // A clause is unsatisfied iff both literals are false; with
    // z = +1 for bit 0 and z_f the falsifying sign, the indicator is
    // (1 + z_f z)(1 + z_f' z')/4.  Summing over clauses gives fields,
    // couplings, and a constant m/4 that we fold into the affine label.
    std::vector<double> field(static_cast<std::size_t>(n), 0.0);
    std::map<std::pair<int, int>, double> coupling;
    for (const SatClause& cl : clauses) {
        double zi = cl.neg_i ? -1.0 : 1.0;  // z-value of the falsifying bit
        double zj = cl.neg_j ? -1.0 : 1.0;
        field[static_cast<std::size_t>(cl.var_i)] += 0.25 * zi;
        field[static_cast<std::size_t>(cl.var_j)] += 0.25 * zj;
        coupling[{cl.var_i, cl.var_j}] += 0.25 * zi * zj;
    }
    DiagonalHamiltonian h;
    h.n_qubits = n;
    char buf[64];
    std::snprintf(buf, sizeof buf, "max2sat clauses=%zu", clauses.size());
    h.label = buf;
    for (int q = 0; q < n; ++q) {
        double w = field[static_cast<std::size_t>(q)];
        if (w == 0.0) continue;
        h.terms.push_back({{q}, {w, -w}, "z" + std::to_string(q)});
    }
    for (const auto& [pair, w] : coupling) {
        if (w == 0.0) continue;
        h.terms.push_back({{pair.first, pair.second},
                           {w, -w, -w, w},
                           "z" + std::to_string(pair.first) + "z" + std::to_string(pair.second)});
    }
    return h;
}

DiagonalHamiltonian random_max2sat(int n, double clause_density, std::uint64_t seed) {
    return max2sat_hamiltonian(n, random_max2sat_clauses(n, clause_density, seed));
}

double max2sat_satisfied_from_energy(const DiagonalHamiltonian& h, double energy) {
    std::size_t m = 0;
    if (std::sscanf(h.label.c_str(), "max2sat clauses=%zu", &m) != 1)
        throw ValidationError("max2sat_satisfied_from_energy: hamiltonian lacks the clause label");
    return 0.75 * static_cast<double>(m) - energy;
}

DiagonalHamiltonian random_fully_connected(int n, std::uint64_t seed) {
    if (n < 2) throw ValidationError("random_fully_connected: need at least two qubits");
    Rng rng(seed);
    DiagonalHamiltonian h;
    h.n_qubits = n;
    h.label = "fully-connected";
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double w = 2.0 * rng.uniform() - 1.0;
            h.terms.push_back({{i, j},
                               {w, -w, -w, w},
                               "z" + std::to_string(i) + "z" + std::to_string(j)});
        }
    for (int q = 0; q < n; ++q) {
        double w = 2.0 * rng.uniform() - 1.0;
        h.terms.push_back({{q}, {w, -w}, "z" + std::to_string(q)});
    }
    return h;
}

DiagonalHamiltonian sk_lattice(int rows, int cols, std::uint64_t seed) {
    if (rows < 1 || cols < 1 || rows * cols < 2)
        throw ValidationError("sk_lattice: grid must contain at least two sites");
    Rng rng(seed);
    DiagonalHamiltonian h;
    h.n_qubits = rows * cols;
    h.label = "sk-2d";
    auto site = [cols](int r, int c) { return r * cols + c; };
    auto add_edge = [&](int a, int b) {
        double w = rng.normal();
        h.terms.push_back({{a, b}, {w, -w, -w, w},
                           "z" + std::to_string(a) + "z" + std::to_string(b)});
    };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) add_edge(site(r, c), site(r, c + 1));
            if (r + 1 < rows) add_edge(site(r, c), site(r + 1, c));
        }
    return h;
}

DiagonalHamiltonian sk_2d(int side, std::uint64_t seed) {
    if (side < 2) throw ValidationError("sk_2d: side must be at least 2");
    return sk_lattice(side, side, seed);
}

} // namespace qrem
