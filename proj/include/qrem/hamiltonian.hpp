#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "qrem/bits.hpp"
#include "qrem/probability.hpp"

namespace qrem {

/// One local diagonal term: a real diagonal over the computational basis
/// of `support`.  An empty support is a constant offset.
struct HamiltonianTerm {
    Subset support;
    std::vector<double> diagonal;
    std::string label;

    double norm() const;  ///< max absolute diagonal value
};

/// Sum of local diagonal terms on n qubits.
struct DiagonalHamiltonian {
    int n_qubits = 0;
    std::vector<HamiltonianTerm> terms;
    std::string label;

    void validate() const;

    double energy_of(std::size_t basis_index) const;
    double energy_of(const std::string& bits) const;

    /// Energies of every basis state; exhaustive, guarded to n <= 24.
    std::vector<double> energy_table() const;

    nlohmann::json to_json() const;
    static DiagonalHamiltonian from_json(const nlohmann::json& j);
};

/// Exhaustive minimizer.  Ties resolve to the lexicographically smallest
/// bitstring.  Guarded to n <= 24.
std::pair<std::string, double> ground_state(const DiagonalHamiltonian& h);

/// A 2-literal clause over variables var_i != var_j; a negated literal
/// is satisfied by bit value 0.
struct SatClause {
    int var_i = 0, var_j = 0;
    bool neg_i = false, neg_j = false;

    bool satisfied(const std::string& bits) const {
        bool li = (bits.at(static_cast<std::size_t>(var_i)) == '1') != neg_i;
        bool lj = (bits.at(static_cast<std::size_t>(var_j)) == '1') != neg_j;
        return li || lj;
    }
};

std::vector<SatClause> random_max2sat_clauses(int n, double clause_density, std::uint64_t seed);

/// Ising encoding of the clause list: single- and two-qubit z terms whose
/// energy counts unsatisfied clauses up to the affine shift recorded in
/// the label ("satisfied = 3m/4 - energy" with m clauses).
DiagonalHamiltonian max2sat_hamiltonian(int n, const std::vector<SatClause>& clauses);

DiagonalHamiltonian random_max2sat(int n, double clause_density, std::uint64_t seed);

/// Invert the affine relation stored by max2sat_hamiltonian.
double max2sat_satisfied_from_energy(const DiagonalHamiltonian& h, double energy);

/// All-pairs ZZ couplings plus per-qubit fields, uniform on [-1, 1].
DiagonalHamiltonian random_fully_connected(int n, std::uint64_t seed);

/// Standard-normal ZZ couplings on the nearest-neighbor edges of a
/// rows x cols grid (no wrap-around).
DiagonalHamiltonian sk_lattice(int rows, int cols, std::uint64_t seed);

/// Square grid version.
DiagonalHamiltonian sk_2d(int side, std::uint64_t seed);

} // namespace qrem
