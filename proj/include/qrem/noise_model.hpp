#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "qrem/probability.hpp"
#include "qrem/rng.hpp"

namespace qrem {

/// Partition of the qubits into clusters, plus for every cluster the set
/// of outside qubits whose prepared state its noise depends on.
struct CorrelationStructure {
    int n_qubits = 0;
    std::vector<Subset> clusters;
    std::vector<Subset> neighborhoods;

    /// Throws ValidationError unless the clusters partition [0, n) and
    /// every neighborhood is disjoint from its own cluster.
    void validate() const;

    std::size_t n_clusters() const { return clusters.size(); }

    /// Index of the cluster containing `qubit`.
    int cluster_of(int qubit) const;

    /// Union of all whole clusters that intersect `s`, ascending.
    Subset expand_to_clusters(const Subset& s) const;

    /// Indices of the clusters fully contained in the cluster-union `s`.
    /// Throws if `s` cuts through a cluster.
    std::vector<int> clusters_within(const Subset& s) const;

    bool operator==(const CorrelationStructure& other) const = default;
};

/// Measurement noise model that factorizes over clusters: the global
/// response is the product, over clusters, of one stochastic matrix per
/// prepared state of the cluster's neighborhood.
class NoiseModel {
public:
    /// `matrices[chi]` holds 2^|N_chi| matrices of dimension 2^|C_chi|,
    /// indexed by the basis index of the neighborhood's prepared state.
    NoiseModel(CorrelationStructure structure,
               std::vector<std::vector<StochasticMatrix>> matrices);

    /// Tensor-product model: one single-qubit matrix per qubit, no
    /// cross-qubit dependence.
    static NoiseModel uncorrelated(const std::vector<StochasticMatrix>& single_qubit);

    const CorrelationStructure& structure() const { return structure_; }
    int n_qubits() const { return structure_.n_qubits; }

    const StochasticMatrix& cluster_matrix(int chi, std::size_t neighbor_state) const;

    /// Total number of stored matrix cells.
    std::size_t storage_cells() const;

    /// One element of the full 2^n x 2^n response matrix:
    /// P(measured | prepared).
    double global_element(const std::string& measured, const std::string& prepared) const;

    /// The full response matrix, assembled elementwise.  Exponential in
    /// n; guarded to n <= 12.
    Matrix global_matrix() const;

    /// Draw a measured bitstring for a prepared basis state.
    std::string sample(const std::string& prepared, Rng& rng) const;

    nlohmann::json to_json() const;
    static NoiseModel from_json(const nlohmann::json& j);

private:
    CorrelationStructure structure_;
    std::vector<std::vector<StochasticMatrix>> matrices_;
};

/// Precomputed sampler over basis indices; equivalent to
/// NoiseModel::sample but without any per-draw string handling, for hot
/// loops.  Consumes one uniform per cluster in cluster order, exactly
/// like NoiseModel::sample.
class NoiseSampler {
public:
    explicit NoiseSampler(const NoiseModel& model);

    /// Global basis index of the measured outcome for a prepared index.
    std::size_t sample(std::size_t prepared, Rng& rng) const;

    int n_qubits() const { return n_; }

private:
    struct ClusterPlan {
        Subset cluster;
        Subset neighborhood;
        int dim;                        // 2^|cluster|
        std::vector<double> cumulative; // [(nb_state * dim + input) * dim + output]
    };
    int n_ = 0;
    std::vector<ClusterPlan> plans_;
};

/// Qubits outside `s` that some cluster inside `s` depends on, ascending.
Subset external_neighborhood(const CorrelationStructure& structure, const Subset& s);

/// Response matrix on the cluster-union `s` when the prepared state of
/// the external neighborhood is pinned to `ext_state`.  Neighbors that
/// lie inside `s` keep their dependence on the input index.
StochasticMatrix fixed_neighbor_matrix(const NoiseModel& model, const Subset& s,
                                       std::size_t ext_state);

/// Response matrix on `s` for a known conditional distribution of the
/// external neighborhood given the prepared state of `s`.
/// `neighbor_conditional` has one column per prepared state of `s`; each
/// column is a distribution over the external neighborhood's states.
StochasticMatrix marginal_noise_matrix(const NoiseModel& model, const Subset& s,
                                       const Matrix& neighbor_conditional);

/// Response matrix on `s` averaged uniformly over the external
/// neighborhood's states.
StochasticMatrix average_noise_matrix(const NoiseModel& model, const Subset& s);

struct CorrectionMatrix {
    Matrix inverse;      ///< exact inverse of the response matrix
    double norm_1to1;    ///< induced 1->1 norm of the inverse
    double condition;    ///< 2-norm condition number of the response
};

/// Exact inverse with a conditioning gate: condition numbers above 1e8
/// raise SingularModelError rather than returning garbage.
CorrectionMatrix correction_matrix(const StochasticMatrix& m);

} // namespace qrem
