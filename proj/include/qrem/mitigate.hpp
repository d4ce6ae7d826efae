#pragma once

#include <cstdint>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "qrem/hamiltonian.hpp"
#include "qrem/noise_model.hpp"

namespace qrem {

/// Simplex-projected corrected marginal together with the raw inversion
/// output it was projected from.  The certified bounds speak about the
/// raw vector; the projected one is what downstream consumers want.
struct MitigatedMarginal {
    Distribution corrected;
    QuasiDistribution quasi;
};

/// Apply the averaged correction matrix of the cluster-union `s` to a
/// noisy marginal, then project back onto the simplex.  `s` must be a
/// union of whole clusters (expand_to_clusters does that); anything that
/// cuts a cluster is rejected.
MitigatedMarginal mitigate_marginal(const Distribution& p_noisy, const NoiseModel& model,
                                    const Subset& s);

/// Worst-case TVD between the averaged-matrix correction and the ideal
/// marginal on the cluster-union `s`:
///   (1/2) ||C_av||_{1->1} * max_Y ||Lambda_av - Lambda^Y||_{1->1},
/// the maximum running exhaustively over the 2^|N(s)| neighbor states.
double mitigation_error_bound(const NoiseModel& model, const Subset& s);

/// Deviation eps* that `k` simultaneously estimated n-qubit marginals
/// stay within (in TVD) with probability at least 1 - p_err, given s
/// samples:  sqrt((ln(2^n - 2) + ln(1/p_err) + ln k) / (2s)).
double statistical_epsilon(int n, std::uint64_t s, double p_err, std::uint64_t k);

/// Certified deviation of the mitigated energy estimate:
///   2 sum_a ||H_a|| (eps* ||C_av^{S_a}|| + delta_a)
/// where S_a is the cluster expansion of the term's support, delta_a its
/// mitigation_error_bound, and eps* uses the largest |S_a| (floor 2) and
/// one union-bound slot per term.  Constant terms carry no noise and are
/// skipped.
double combined_energy_bound(const DiagonalHamiltonian& h, const NoiseModel& model,
                             std::uint64_t s, double p_err);

/// Samples needed so the energy estimator misses by more than delta_e
/// with probability at most p_f:  var_h / (delta_e^2 * p_f).
double chebyshev_sample_bound(double var_h, double delta_e, double p_f);

/// Variance bound for shallow QAOA on Erdos-Renyi instances with N nodes
/// and K edges (average degree q = K/N).  When the depth condition
///   p < w log(N) / (8 log(2q/ln 2)) - 1
/// holds, Var(H) <= f_h * q * N^(A+1) with probability 1 - exp(-N^(a/2)).
struct GraphVarianceBound {
    bool admissible = false;   ///< depth shallow enough for the claim
    double var_exponent = 0;   ///< A
    double prob_exponent = 0;  ///< a
    double bound = 0;          ///< f_h * q * N^(A+1); 0 when inadmissible
};

GraphVarianceBound random_graph_variance_bound(std::int64_t n, std::int64_t k, int p_layers,
                                               double f_h, double w);

/// Sum of per-term expectations, one marginal per term.  A term whose
/// support has no exact entry falls back to the first marginal keyed by
/// a superset and marginalizes it down.
double energy_from_marginals(const DiagonalHamiltonian& h,
                             const std::map<Subset, Distribution>& marginals);

/// Full record of one marginal-level mitigation run over measured counts.
struct MitigationReport {
    struct TermReport {
        std::string label;
        Subset support;            ///< the term's own qubits
        Subset expanded;           ///< cluster-union the correction acted on
        double correction_norm;    ///< ||C_av||_{1->1} on `expanded`
        double approx_bound;       ///< delta for `expanded`
        double raw_energy;         ///< from the uncorrected marginal
        double mitigated_energy;   ///< from the corrected marginal
        Distribution corrected;    ///< projected marginal on `expanded`
        QuasiDistribution quasi;   ///< pre-projection marginal on `expanded`
    };

    std::vector<TermReport> terms;
    std::uint64_t samples = 0;
    double p_err = 0;
    double statistical_eps = 0;   ///< eps* shared by all marginals
    double combined_bound = 0;    ///< 2 sum ||H_a||(eps*||C|| + delta)
    double raw_energy = 0;
    double mitigated_energy = 0;
    bool raw_quasi = false;       ///< energies read off pre-projection vectors

    nlohmann::json to_json() const;
};

/// Estimate the energy of `h` from measured counts, raw and with
/// marginal mitigation, and assemble the certified error bound.  With
/// `raw_quasi` the per-term energies are evaluated on the pre-projection
/// vectors instead of the projected ones.
MitigationReport mitigate_energy(const DiagonalHamiltonian& h,
                                 const std::map<std::string, std::uint64_t>& counts,
                                 const NoiseModel& model, double p_err = 0.05,
                                 bool raw_quasi = false);

} // namespace qrem
