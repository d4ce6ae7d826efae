#pragma once

#include <cstdint>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "qrem/ddot.hpp"
#include "qrem/noise_model.hpp"

namespace qrem {

/// Raw counts from preparing computational-basis states and reading the
/// device back out: prepared bitstring -> measured bitstring -> count.
struct MeasurementDataset {
    int n_qubits = 0;
    std::map<std::string, std::map<std::string, std::uint64_t>> results;

    void validate() const;

    std::uint64_t input_total(const std::string& input) const;
    std::uint64_t total_shots() const;

    /// The prepared bitstrings as a circuit collection, for perfection
    /// checks against the subset-coverage machinery.
    DdotCollection inputs() const;

    nlohmann::json to_json() const;
    static MeasurementDataset from_json(const nlohmann::json& j);
};

inline const std::string kPooled = "pooled";

/// Weighted outcome tallies on a subset: one table per conditioning
/// context (kPooled when nothing is conditioned on).  Rows are measured
/// states of the subset, columns prepared states.
struct ConditionalCounts {
    Subset subset;
    Subset condition_on;
    std::map<std::string, Matrix> tables;

    /// Column-normalize one context table.  Zero columns raise
    /// CoverageError naming the empty cells.
    StochasticMatrix normalized(const std::string& context) const;
};

/// Empirical response of subset `s`, restricted to circuits whose
/// prepared state on `condition_on` equals `condition_state` (kPooled
/// lifts the restriction).  Missing (prepared, condition) cells raise
/// CoverageError listing every one of them.
StochasticMatrix conditional_noise_matrix(const MeasurementDataset& ds, const Subset& s,
                                          const Subset& condition_on,
                                          const std::string& condition_state);

/// Pairwise influence coefficients: entry (i, j) is half the 1->1 norm
/// of the difference between qubit i's response with qubit j prepared in
/// 0 versus 1 -- the worst-case TVD shift that j's state can inflict on
/// i's readout.  Asymmetric in general.
struct CorrelationTable {
    Matrix c;

    int n_qubits() const { return static_cast<int>(c.rows()); }
    void validate() const;
};

/// Requires every qubit pair to have seen all four prepared states.
/// With `reweighted`, each distinct prepared circuit contributes its
/// normalized outcome distribution once instead of once per shot, which
/// suppresses false correlations from unbalanced collections.
CorrelationTable correlation_coefficients(const MeasurementDataset& ds, bool reweighted = false);

/// Marginal tallies on `s` where every circuit's contribution is scaled
/// by the reciprocal of its shot count, so repeated contexts stop
/// outvoting rare ones.
ConditionalCounts reweighted_marginals(const MeasurementDataset& ds, const Subset& s);

struct StructureInference {
    CorrelationStructure structure;
    std::vector<std::string> warnings;
};

/// Threshold pass over the coefficient table: pairs above delta_cluster
/// (in either direction) merge into clusters, transitively; remaining
/// directional entries above delta_neighbor become neighborhood links.
/// Neighbors are dropped smallest-coefficient-first whenever a cluster
/// plus its neighborhood would exceed max_joint_size; every drop is
/// recorded in the warning list.
StructureInference infer_structure(const CorrelationTable& table, double delta_cluster,
                                   double delta_neighbor, int max_joint_size);

/// Estimate the per-cluster conditional matrices for a known structure.
/// Uncovered (cluster state, neighborhood state) cells raise
/// CoverageError listing all of them.
NoiseModel fit_noise_model(const MeasurementDataset& ds, const CorrelationStructure& structure);

} // namespace qrem
