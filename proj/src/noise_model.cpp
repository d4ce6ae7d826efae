#include "qrem/noise_model.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace qrem {

void CorrelationStructure::validate() const {
    if (n_qubits <= 0) throw ValidationError("CorrelationStructure: n_qubits must be positive");
    if (clusters.size() != neighborhoods.size())
        throw ValidationError("CorrelationStructure: clusters and neighborhoods must pair up");
    std::vector<int> owner(static_cast<std::size_t>(n_qubits), -1);
    for (std::size_t chi = 0; chi < clusters.size(); ++chi) {
        const Subset& c = clusters[chi];
        if (c.empty()) throw ValidationError("CorrelationStructure: empty cluster");
        require_subset(c, n_qubits, "cluster");
        for (int q : c) {
            if (owner[static_cast<std::size_t>(q)] != -1)
                throw ValidationError("CorrelationStructure: qubit assigned to two clusters");
            owner[static_cast<std::size_t>(q)] = static_cast<int>(chi);
        }
    }
    for (int q = 0; q < n_qubits; ++q)
        if (owner[static_cast<std::size_t>(q)] == -1)
            throw ValidationError("CorrelationStructure: qubit missing from every cluster");
    for (std::size_t chi = 0; chi < neighborhoods.size(); ++chi) {
        const Subset& nb = neighborhoods[chi];
        require_subset(nb, n_qubits, "neighborhood");
        for (int q : nb)
            if (owner[static_cast<std::size_t>(q)] == static_cast<int>(chi))
                throw ValidationError("CorrelationStructure: neighborhood overlaps its own cluster");
    }
}

int CorrelationStructure::cluster_of(int qubit) const {
    for (std::size_t chi = 0; chi < clusters.size(); ++chi)
        if (subset_contains(clusters[chi], qubit)) return static_cast<int>(chi);
    throw ValidationError("CorrelationStructure: qubit not covered by any cluster");
}

Subset CorrelationStructure::expand_to_clusters(const Subset& s) const {
    require_subset(s, n_qubits, "expand_to_clusters");
    std::vector<bool> used(clusters.size(), false);
    for (int q : s) used[static_cast<std::size_t>(cluster_of(q))] = true;
    Subset out;
    for (std::size_t chi = 0; chi < clusters.size(); ++chi)
        if (used[chi]) out = subset_union(out, clusters[chi]);
    return out;
}

std::vector<int> CorrelationStructure::clusters_within(const Subset& s) const {
    std::vector<int> out;
    for (std::size_t chi = 0; chi < clusters.size(); ++chi) {
        bool any = false, all = true;
        for (int q : clusters[chi]) {
            if (subset_contains(s, q)) any = true; else all = false;
        }
        if (any && !all)
            throw ValidationError("subset cuts through a cluster; expand it to whole clusters first");
        if (any) out.push_back(static_cast<int>(chi));
    }
    // s must consist only of cluster qubits (always true for a partition).
    std::size_t covered = 0;
    for (int chi : out) covered += clusters[static_cast<std::size_t>(chi)].size();
    if (covered != s.size())
        throw ValidationError("subset is not a union of whole clusters");
    return out;
}

NoiseModel::NoiseModel(CorrelationStructure structure,
                       std::vector<std::vector<StochasticMatrix>> matrices)
    : structure_(std::move(structure)), matrices_(std::move(matrices)) {
    structure_.validate();
    if (matrices_.size() != structure_.clusters.size())
        throw ValidationError("NoiseModel: one matrix family required per cluster");
    for (std::size_t chi = 0; chi < matrices_.size(); ++chi) {
        const auto dim = Eigen::Index{1} << structure_.clusters[chi].size();
        const auto count = std::size_t{1} << structure_.neighborhoods[chi].size();
        if (matrices_[chi].size() != count)
            throw ValidationError("NoiseModel: need one matrix per neighborhood state");
        for (const auto& m : matrices_[chi])
            if (m.dim() != dim)
                throw ValidationError("NoiseModel: matrix dimension does not match cluster size");
    }
}

NoiseModel NoiseModel::uncorrelated(const std::vector<StochasticMatrix>& single_qubit) {
    CorrelationStructure s;
    s.n_qubits = static_cast<int>(single_qubit.size());
    std::vector<std::vector<StochasticMatrix>> mats;
    for (int q = 0; q < s.n_qubits; ++q) {
        if (single_qubit[static_cast<std::size_t>(q)].dim() != 2)
            throw ValidationError("uncorrelated: matrices must be 2x2");
        s.clusters.push_back({q});
        s.neighborhoods.push_back({});
        mats.push_back({single_qubit[static_cast<std::size_t>(q)]});
    }
    return NoiseModel(std::move(s), std::move(mats));
}

const StochasticMatrix& NoiseModel::cluster_matrix(int chi, std::size_t neighbor_state) const {
    return matrices_.at(static_cast<std::size_t>(chi)).at(neighbor_state);
}

std::size_t NoiseModel::storage_cells() const {
    std::size_t total = 0;
    for (std::size_t chi = 0; chi < matrices_.size(); ++chi) {
        std::size_t dim = std::size_t{1} << structure_.clusters[chi].size();
        total += matrices_[chi].size() * dim * dim;
    }
    return total;
}

double NoiseModel::global_element(const std::string& measured, const std::string& prepared) const {
    const auto n = static_cast<std::size_t>(structure_.n_qubits);
    if (measured.size() != n || prepared.size() != n)
        throw ValidationError("global_element: bitstring length mismatch");
    double value = 1.0;
    for (std::size_t chi = 0; chi < structure_.clusters.size(); ++chi) {
        std::size_t y_n = index_of(prepared, structure_.neighborhoods[chi]);
        std::size_t y_c = index_of(prepared, structure_.clusters[chi]);
        std::size_t x_c = index_of(measured, structure_.clusters[chi]);
        value *= matrices_[chi][y_n](static_cast<Eigen::Index>(x_c), static_cast<Eigen::Index>(y_c));
    }
    return value;
}

Matrix NoiseModel::global_matrix() const {
    const int n = structure_.n_qubits;
    if (n > 12) throw ValidationError("global_matrix: refusing to assemble beyond 12 qubits");
    const Eigen::Index dim = Eigen::Index{1} << n;
    Matrix out(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        std::string prepared = bits_of(static_cast<std::size_t>(col), n);
        for (Eigen::Index row = 0; row < dim; ++row)
            out(row, col) = global_element(bits_of(static_cast<std::size_t>(row), n), prepared);
    }
    return out;
}

std::string NoiseModel::sample(const std::string& prepared, Rng& rng) const {
    const auto n = static_cast<std::size_t>(structure_.n_qubits);
    if (prepared.size() != n) throw ValidationError("sample: bitstring length mismatch");
    std::string measured(n, '0');
    for (std::size_t chi = 0; chi < structure_.clusters.size(); ++chi) {
        std::size_t y_n = index_of(prepared, structure_.neighborhoods[chi]);
        std::size_t y_c = index_of(prepared, structure_.clusters[chi]);
        const Matrix& m = matrices_[chi][y_n].mat();
        double u = rng.uniform();
        double acc = 0.0;
        Eigen::Index drawn = m.rows() - 1;
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            acc += m(r, static_cast<Eigen::Index>(y_c));
            if (u < acc) { drawn = r; break; }
        }
        const Subset& c = structure_.clusters[chi];
        const int mbits = static_cast<int>(c.size());
        for (int j = 0; j < mbits; ++j) {
            int bit = static_cast<int>((static_cast<std::size_t>(drawn) >> (mbits - 1 - j)) & 1u);
            measured[static_cast<std::size_t>(c[static_cast<std::size_t>(j)])] =
                static_cast<char>('0' + bit);
        }
    }
    return measured;
}

nlohmann::json NoiseModel::to_json() const {
    nlohmann::json j;
    j["schema"] = "qrem-noise-model-1";
    j["n_qubits"] = structure_.n_qubits;
    j["clusters"] = structure_.clusters;
    j["neighborhoods"] = structure_.neighborhoods;
    nlohmann::json mats = nlohmann::json::object();
    for (std::size_t chi = 0; chi < matrices_.size(); ++chi) {
        nlohmann::json family = nlohmann::json::object();
        const int nb = static_cast<int>(structure_.neighborhoods[chi].size());
        for (std::size_t y = 0; y < matrices_[chi].size(); ++y) {
            const Matrix& m = matrices_[chi][y].mat();
            std::vector<std::vector<double>> rows;
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                std::vector<double> row;
                for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
                rows.push_back(std::move(row));
            }
            family[bits_of(y, nb)] = rows;
        }
        mats[std::to_string(chi)] = std::move(family);
    }
    j["matrices"] = std::move(mats);
    return j;
}

NoiseModel NoiseModel::from_json(const nlohmann::json& j) {
    try {
        CorrelationStructure s;
        s.n_qubits = j.at("n_qubits").get<int>();
        s.clusters = j.at("clusters").get<std::vector<Subset>>();
        s.neighborhoods = j.at("neighborhoods").get<std::vector<Subset>>();
        const auto& mats = j.at("matrices");
        std::vector<std::vector<StochasticMatrix>> families;
        for (std::size_t chi = 0; chi < s.clusters.size(); ++chi) {
            const auto& family = mats.at(std::to_string(chi));
            const int nb = static_cast<int>(s.neighborhoods[chi].size());
            const std::size_t count = std::size_t{1} << nb;
            std::vector<StochasticMatrix> out;
            for (std::size_t y = 0; y < count; ++y) {
                auto rows = family.at(bits_of(y, nb)).get<std::vector<std::vector<double>>>();
                const auto dim = static_cast<Eigen::Index>(rows.size());
                Matrix m(dim, dim);
                for (Eigen::Index r = 0; r < dim; ++r) {
                    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != dim)
                        throw ValidationError("NoiseModel: ragged matrix in file");
                    for (Eigen::Index c = 0; c < dim; ++c)
                        m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
                }
                out.emplace_back(std::move(m));
            }
            families.push_back(std::move(out));
        }
        return NoiseModel(std::move(s), std::move(families));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("NoiseModel: malformed file: ") + e.what());
    }
}

NoiseSampler::NoiseSampler(const NoiseModel& model) : n_(model.n_qubits()) {
    const CorrelationStructure& st = model.structure();
    for (std::size_t chi = 0; chi < st.clusters.size(); ++chi) {
        ClusterPlan plan;
        plan.cluster = st.clusters[chi];
        plan.neighborhood = st.neighborhoods[chi];
        plan.dim = 1 << plan.cluster.size();
        const std::size_t nb_states = std::size_t{1} << plan.neighborhood.size();
        const auto dim = static_cast<std::size_t>(plan.dim);
        plan.cumulative.resize(nb_states * dim * dim);
        for (std::size_t y_n = 0; y_n < nb_states; ++y_n) {
            const Matrix& m = model.cluster_matrix(static_cast<int>(chi), y_n).mat();
            for (std::size_t col = 0; col < dim; ++col) {
                double acc = 0.0;
                for (std::size_t row = 0; row < dim; ++row) {
                    acc += m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
                    plan.cumulative[(y_n * dim + col) * dim + row] = acc;
                }
            }
        }
        plans_.push_back(std::move(plan));
    }
}

std::size_t NoiseSampler::sample(std::size_t prepared, Rng& rng) const {
    std::size_t measured = 0;
    for (const ClusterPlan& plan : plans_) {
        std::size_t y_n = gather_bits(prepared, plan.neighborhood, n_);
        std::size_t y_c = gather_bits(prepared, plan.cluster, n_);
        const auto dim = static_cast<std::size_t>(plan.dim);
        const double* cum = &plan.cumulative[(y_n * dim + y_c) * dim];
        double u = rng.uniform();
        std::size_t drawn = dim - 1;
        for (std::size_t row = 0; row < dim; ++row)
            if (u < cum[row]) { drawn = row; break; }
        measured |= scatter_bits(drawn, plan.cluster, n_);
    }
    return measured;
}

Subset external_neighborhood(const CorrelationStructure& structure, const Subset& s) {
    Subset ext;
    for (int chi : structure.clusters_within(s))
        ext = subset_union(ext, subset_difference(structure.neighborhoods[static_cast<std::size_t>(chi)], s));
    return ext;
}

namespace {

/// Shared assembly: response matrix on `s` as a weighted sum over the
/// external neighborhood's states, with weights given per input column.
Matrix assemble_on_subset(const NoiseModel& model, const Subset& s, const Matrix& weights) {
    const CorrelationStructure& structure = model.structure();
    const std::vector<int> members = structure.clusters_within(s);
    const Subset ext = external_neighborhood(structure, s);
    const int ns = static_cast<int>(s.size());
    const Eigen::Index dim = Eigen::Index{1} << ns;
    const Eigen::Index n_ext = Eigen::Index{1} << ext.size();
    if (weights.rows() != n_ext || weights.cols() != dim)
        throw ValidationError("marginal_noise_matrix: conditional table has wrong shape");

    // Per cluster, the positions of its qubits inside s, and where each
    // neighborhood qubit lives (inside s or inside ext).
    struct ClusterView {
        Subset cluster_local;                 // positions within s
        std::vector<std::pair<bool, int>> nb; // (from_ext?, local position)
        int chi;
    };
    auto local_pos = [](const Subset& sub, int q) {
        return static_cast<int>(std::lower_bound(sub.begin(), sub.end(), q) - sub.begin());
    };
    std::vector<ClusterView> views;
    for (int chi : members) {
        ClusterView v;
        v.chi = chi;
        for (int q : structure.clusters[static_cast<std::size_t>(chi)])
            v.cluster_local.push_back(local_pos(s, q));
        for (int q : structure.neighborhoods[static_cast<std::size_t>(chi)]) {
            if (subset_contains(s, q)) v.nb.emplace_back(false, local_pos(s, q));
            else v.nb.emplace_back(true, local_pos(ext, q));
        }
        views.push_back(std::move(v));
    }

    Matrix out = Matrix::Zero(dim, dim);
    for (Eigen::Index y = 0; y < dim; ++y) {
        for (Eigen::Index e = 0; e < n_ext; ++e) {
            const double w = weights(e, y);
            if (w == 0.0) continue;
            // Pin each cluster's matrix and input column for this (y, e).
            std::vector<const Matrix*> mats;
            std::vector<std::size_t> cols;
            for (const ClusterView& v : views) {
                std::size_t y_n = 0;
                for (const auto& [from_ext, pos] : v.nb) {
                    std::size_t source = from_ext ? static_cast<std::size_t>(e)
                                                  : static_cast<std::size_t>(y);
                    int width = from_ext ? static_cast<int>(ext.size()) : ns;
                    y_n = (y_n << 1) | ((source >> (width - 1 - pos)) & 1u);
                }
                std::size_t y_c = gather_bits(static_cast<std::size_t>(y), v.cluster_local, ns);
                mats.push_back(&model.cluster_matrix(v.chi, y_n).mat());
                cols.push_back(y_c);
            }
            for (Eigen::Index x = 0; x < dim; ++x) {
                double value = w;
                for (std::size_t i = 0; i < views.size(); ++i) {
                    std::size_t x_c = gather_bits(static_cast<std::size_t>(x),
                                                  views[i].cluster_local, ns);
                    value *= (*mats[i])(static_cast<Eigen::Index>(x_c),
                                        static_cast<Eigen::Index>(cols[i]));
                    if (value == 0.0) break;
                }
                out(x, y) += value;
            }
        }
    }
    return out;
}

} // namespace

StochasticMatrix fixed_neighbor_matrix(const NoiseModel& model, const Subset& s,
                                       std::size_t ext_state) {
    const Subset ext = external_neighborhood(model.structure(), s);
    const Eigen::Index n_ext = Eigen::Index{1} << ext.size();
    if (ext_state >= static_cast<std::size_t>(n_ext))
        throw ValidationError("fixed_neighbor_matrix: neighbor state out of range");
    Matrix weights = Matrix::Zero(n_ext, Eigen::Index{1} << s.size());
    weights.row(static_cast<Eigen::Index>(ext_state)).setOnes();
    return StochasticMatrix(assemble_on_subset(model, s, weights), kLooseTol);
}

StochasticMatrix marginal_noise_matrix(const NoiseModel& model, const Subset& s,
                                       const Matrix& neighbor_conditional) {
    for (Eigen::Index c = 0; c < neighbor_conditional.cols(); ++c) {
        double sum = neighbor_conditional.col(c).sum();
        if (std::abs(sum - 1.0) > kLooseTol || neighbor_conditional.col(c).minCoeff() < -kLooseTol)
            throw ValidationError("marginal_noise_matrix: conditional columns must be distributions");
    }
    return StochasticMatrix(assemble_on_subset(model, s, neighbor_conditional), kLooseTol);
}

StochasticMatrix average_noise_matrix(const NoiseModel& model, const Subset& s) {
    const Subset ext = external_neighborhood(model.structure(), s);
    const Eigen::Index n_ext = Eigen::Index{1} << ext.size();
    Matrix weights = Matrix::Constant(n_ext, Eigen::Index{1} << s.size(),
                                      1.0 / static_cast<double>(n_ext));
    return StochasticMatrix(assemble_on_subset(model, s, weights), kLooseTol);
}

CorrectionMatrix correction_matrix(const StochasticMatrix& m) {
    const Matrix& a = m.mat();
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& sv = svd.singularValues();
    double smin = sv(sv.size() - 1);
    double smax = sv(0);
    if (smin <= 0.0 || smax / smin > 1e8)
        throw SingularModelError("correction_matrix: response matrix is numerically singular");
    CorrectionMatrix out;
    out.inverse = a.inverse();
    out.norm_1to1 = norm_1to1(out.inverse);
    out.condition = smax / smin;
    return out;
}

} // namespace qrem
