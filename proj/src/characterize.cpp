#include "qrem/characterize.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "qrem/errors.hpp"

namespace qrem {

namespace {

void require_bitstring(const std::string& s, int n, const char* what) {
    if (static_cast<int>(s.size()) != n)
        throw ValidationError(std::string(what) + ": bitstring '" + s + "' is not length " +
                              std::to_string(n));
    for (char ch : s)
        if (ch != '0' && ch != '1')
            throw ValidationError(std::string(what) + ": bitstring '" + s + "' has characters other than 0/1");
}

} // namespace

void MeasurementDataset::validate() const {
    if (n_qubits <= 0) throw ValidationError("MeasurementDataset: n_qubits must be positive");
    if (results.empty()) throw ValidationError("MeasurementDataset: no circuits recorded");
    for (const auto& [input, outcomes] : results) {
        require_bitstring(input, n_qubits, "MeasurementDataset input");
        std::uint64_t total = 0;
        for (const auto& [output, count] : outcomes) {
            require_bitstring(output, n_qubits, "MeasurementDataset output");
            total += count;
        }
        if (total == 0)
            throw ValidationError("MeasurementDataset: input '" + input + "' has zero shots");
    }
}

std::uint64_t MeasurementDataset::input_total(const std::string& input) const {
    auto it = results.find(input);
    if (it == results.end())
        throw ValidationError("MeasurementDataset: input '" + input + "' not present");
    std::uint64_t total = 0;
    for (const auto& [output, count] : it->second) total += count;
    return total;
}

std::uint64_t MeasurementDataset::total_shots() const {
    std::uint64_t total = 0;
    for (const auto& [input, outcomes] : results)
        for (const auto& [output, count] : outcomes) total += count;
    return total;
}

DdotCollection MeasurementDataset::inputs() const {
    DdotCollection c;
    c.n_qubits = n_qubits;
    for (const auto& [input, outcomes] : results) c.circuits.push_back(input);
    return c;
}

nlohmann::json MeasurementDataset::to_json() const {
    nlohmann::json j;
    j["schema"] = "qrem-dataset-1";
    j["n_qubits"] = n_qubits;
    j["results"] = nlohmann::json::object();
    for (const auto& [input, outcomes] : results) {
        nlohmann::json row = nlohmann::json::object();
        for (const auto& [output, count] : outcomes) row[output] = count;
        j["results"][input] = std::move(row);
    }
    return j;
}

MeasurementDataset MeasurementDataset::from_json(const nlohmann::json& j) {
    try {
        MeasurementDataset ds;
        ds.n_qubits = j.at("n_qubits").get<int>();
        for (const auto& [input, row] : j.at("results").items())
            for (const auto& [output, count] : row.items())
                ds.results[input][output] = count.get<std::uint64_t>();
        ds.validate();
        return ds;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("MeasurementDataset: malformed file: ") + e.what());
    }
}

namespace {

std::string cell_name(const std::string& prepared, const Subset& condition_on,
                      const std::string& condition_state) {
    std::string name = "prepared=" + prepared;
    if (!condition_on.empty() && condition_state != kPooled) {
        name += " given ";
        for (std::size_t i = 0; i < condition_on.size(); ++i)
            name += (i ? ",q" : "q") + std::to_string(condition_on[i]) + "=" +
                    condition_state[i];
    }
    return name;
}

std::string slice(const std::string& bits, const Subset& s) {
    std::string out(s.size(), '0');
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = bits[static_cast<std::size_t>(s[i])];
    return out;
}

/// Weighted tallies of measured X_S per prepared Y_S, restricted to
/// circuits matching `condition_state` on `condition_on` (kPooled = no
/// restriction).  Reweighting divides each circuit's counts by its
/// total, so every context enters with unit mass.
Matrix accumulate(const MeasurementDataset& ds, const Subset& s, const Subset& condition_on,
                  const std::string& condition_state, bool reweighted) {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << s.size());
    Matrix m = Matrix::Zero(dim, dim);
    for (const auto& [input, outcomes] : ds.results) {
        if (condition_state != kPooled && slice(input, condition_on) != condition_state)
            continue;
        const auto col = static_cast<Eigen::Index>(index_of(input, s));
        double w = 1.0;
        if (reweighted) {
            std::uint64_t total = 0;
            for (const auto& [output, count] : outcomes) total += count;
            w = 1.0 / static_cast<double>(total);
        }
        for (const auto& [output, count] : outcomes)
            m(static_cast<Eigen::Index>(index_of(output, s)), col) +=
                w * static_cast<double>(count);
    }
    return m;
}

StochasticMatrix normalize_columns(const Matrix& m, const Subset& s, const Subset& condition_on,
                                   const std::string& condition_state) {
    std::vector<std::string> missing;
    Matrix out = m;
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
        const double total = m.col(col).sum();
        if (total <= 0.0) {
            missing.push_back(cell_name(bits_of(static_cast<std::size_t>(col),
                                                static_cast<int>(s.size())),
                                        condition_on, condition_state));
            continue;
        }
        out.col(col) /= total;
    }
    if (!missing.empty()) {
        std::ostringstream msg;
        msg << "no data for " << missing.size() << " cell(s):";
        for (const std::string& cell : missing) msg << " [" << cell << "]";
        throw CoverageError(msg.str());
    }
    return StochasticMatrix(out, kLooseTol);
}

} // namespace

StochasticMatrix ConditionalCounts::normalized(const std::string& context) const {
    auto it = tables.find(context);
    if (it == tables.end())
        throw ValidationError("ConditionalCounts: no table for context '" + context + "'");
    return normalize_columns(it->second, subset, condition_on, context);
}

StochasticMatrix conditional_noise_matrix(const MeasurementDataset& ds, const Subset& s,
                                          const Subset& condition_on,
                                          const std::string& condition_state) {
    ds.validate();
    require_subset(s, ds.n_qubits, "conditional_noise_matrix subset");
    require_subset(condition_on, ds.n_qubits, "conditional_noise_matrix condition");
    for (int q : condition_on)
        if (subset_contains(s, q))
            throw ValidationError("conditional_noise_matrix: subset and condition overlap");
    if (condition_state != kPooled) {
        if (condition_state.size() != condition_on.size())
            throw ValidationError("conditional_noise_matrix: condition state length mismatch");
        require_bitstring(condition_state, static_cast<int>(condition_on.size()),
                          "conditional_noise_matrix condition state");
    }
    Matrix m = accumulate(ds, s, condition_on, condition_state, false);
    return normalize_columns(m, s, condition_on, condition_state);
}

void CorrelationTable::validate() const {
    if (c.rows() != c.cols() || c.rows() < 1)
        throw ValidationError("CorrelationTable: must be square and nonempty");
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
        if (c(i, i) != 0.0) throw ValidationError("CorrelationTable: diagonal must be zero");
        for (Eigen::Index j = 0; j < c.cols(); ++j)
            if (c(i, j) < 0.0 || c(i, j) > 1.0)
                throw ValidationError("CorrelationTable: entries must lie in [0, 1]");
    }
}

CorrelationTable correlation_coefficients(const MeasurementDataset& ds, bool reweighted) {
    ds.validate();
    const int n = ds.n_qubits;
    PerfectionReport report = is_perfect(ds.inputs(), std::min(2, n));
    if (!report.perfect) {
        std::ostringstream msg;
        msg << "correlation_coefficients: dataset misses " << report.missing.size()
            << " pair state(s), e.g.";
        for (std::size_t i = 0; i < std::min<std::size_t>(report.missing.size(), 4); ++i) {
            const auto& [subset, state] = report.missing[i];
            msg << " [qubits";
            for (int q : subset) msg << " " << q;
            msg << " state " << bits_of(state, static_cast<int>(subset.size())) << "]";
        }
        throw CoverageError(msg.str());
    }

    // one pass over the data per pair: joint 4x4 tallies, then both
    // directional single-qubit conditionals by summing out the partner
    CorrelationTable table;
    table.c = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Matrix joint = accumulate(ds, {i, j}, {}, kPooled, reweighted);
            // which = 0: response of i with j's prepared bit fixed;
            // which = 1: the other way around; partner's outcome summed out
            auto conditional = [&joint](int which, int fixed_bit) {
                Matrix m = Matrix::Zero(2, 2);
                for (int x = 0; x < 2; ++x)
                    for (int y = 0; y < 2; ++y)
                        for (int t = 0; t < 2; ++t) {
                            const int row = which == 0 ? x * 2 + t : t * 2 + x;
                            const int col = which == 0 ? y * 2 + fixed_bit : fixed_bit * 2 + y;
                            m(x, y) += joint(row, col);
                        }
                for (int y = 0; y < 2; ++y) {
                    const double total = m.col(y).sum();
                    if (total <= 0.0)
                        throw CoverageError("correlation_coefficients: empty column");
                    m.col(y) /= total;
                }
                return m;
            };
            // qubit i's response with j prepared in 0 versus 1
            Matrix i0 = conditional(0, 0), i1 = conditional(0, 1);
            table.c(i, j) = 0.5 * norm_1to1(i0 - i1);
            Matrix j0 = conditional(1, 0), j1 = conditional(1, 1);
            table.c(j, i) = 0.5 * norm_1to1(j0 - j1);
        }
    return table;
}

ConditionalCounts reweighted_marginals(const MeasurementDataset& ds, const Subset& s) {
    ds.validate();
    require_subset(s, ds.n_qubits, "reweighted_marginals subset");
    ConditionalCounts out;
    out.subset = s;
    out.tables[kPooled] = accumulate(ds, s, {}, kPooled, true);
    return out;
}

namespace {

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

std::string subset_text(const Subset& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i)
        out += (i ? "," : "") + std::to_string(s[i]);
    return out + "}";
}

} // namespace

StructureInference infer_structure(const CorrelationTable& table, double delta_cluster,
                                   double delta_neighbor, int max_joint_size) {
    table.validate();
    if (delta_neighbor < 0 || delta_cluster < delta_neighbor)
        throw ValidationError("infer_structure: need 0 <= delta_neighbor <= delta_cluster");
    if (max_joint_size < 1) throw ValidationError("infer_structure: max_joint_size must be positive");
    const int n = table.n_qubits();

    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::max(table.c(i, j), table.c(j, i)) > delta_cluster) uf.unite(i, j);

    std::vector<Subset> clusters;
    std::vector<int> cluster_index(static_cast<std::size_t>(n), -1);
    for (int q = 0; q < n; ++q) {
        const int root = uf.find(q);
        if (cluster_index[static_cast<std::size_t>(root)] < 0) {
            cluster_index[static_cast<std::size_t>(root)] = static_cast<int>(clusters.size());
            clusters.push_back({});
        }
        cluster_index[static_cast<std::size_t>(q)] = cluster_index[static_cast<std::size_t>(root)];
        clusters[static_cast<std::size_t>(cluster_index[static_cast<std::size_t>(q)])].push_back(q);
    }

    StructureInference result;
    result.structure.n_qubits = n;
    result.structure.clusters = clusters;
    result.structure.neighborhoods.resize(clusters.size());

    for (std::size_t chi = 0; chi < clusters.size(); ++chi) {
        const Subset& cluster = clusters[chi];
        if (static_cast<int>(cluster.size()) > max_joint_size)
            result.warnings.push_back("cluster " + subset_text(cluster) +
                                      " alone exceeds the joint-size cap of " +
                                      std::to_string(max_joint_size));
        // candidate neighbors with the strongest coefficient they exert
        std::vector<std::pair<double, int>> candidates;
        for (int j = 0; j < n; ++j) {
            if (cluster_index[static_cast<std::size_t>(j)] == static_cast<int>(chi)) continue;
            double strength = 0.0;
            for (int i : cluster) strength = std::max(strength, table.c(i, j));
            if (strength > delta_neighbor) candidates.push_back({strength, j});
        }
        // inside-cluster links above the neighbor threshold are already
        // absorbed by the merge; note the ones that were directional only
        for (int i : cluster)
            for (int j : cluster) {
                if (i == j || table.c(i, j) <= delta_neighbor) continue;
                if (std::max(table.c(i, j), table.c(j, i)) > delta_cluster) continue;
                result.warnings.push_back("cluster " + subset_text(cluster) + ": link " +
                                          std::to_string(j) + "->" + std::to_string(i) +
                                          " is internal, neighbor entry dropped");
            }
        const int room = max_joint_size - static_cast<int>(cluster.size());
        if (static_cast<int>(candidates.size()) > std::max(room, 0)) {
            // keep the strongest influences, shed the weakest
            std::sort(candidates.begin(), candidates.end(),
                      [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;
                      });
            for (std::size_t k = static_cast<std::size_t>(std::max(room, 0));
                 k < candidates.size(); ++k) {
                char buf[64];
                std::snprintf(buf, sizeof buf, " (c=%.6f)", candidates[k].first);
                result.warnings.push_back("cluster " + subset_text(cluster) +
                                          ": dropped neighbor " +
                                          std::to_string(candidates[k].second) + buf);
            }
            candidates.resize(static_cast<std::size_t>(std::max(room, 0)));
        }
        Subset nb;
        for (const auto& [strength, j] : candidates) nb.push_back(j);
        std::sort(nb.begin(), nb.end());
        result.structure.neighborhoods[chi] = nb;
    }
    result.structure.validate();
    return result;
}

NoiseModel fit_noise_model(const MeasurementDataset& ds, const CorrelationStructure& structure) {
    ds.validate();
    structure.validate();
    if (structure.n_qubits != ds.n_qubits)
        throw ValidationError("fit_noise_model: structure size does not match dataset");

    std::vector<std::vector<StochasticMatrix>> matrices;
    std::vector<std::string> missing;
    for (std::size_t chi = 0; chi < structure.clusters.size(); ++chi) {
        const Subset& cluster = structure.clusters[chi];
        const Subset& nb = structure.neighborhoods[chi];
        std::vector<StochasticMatrix> family;
        for (std::size_t y = 0; y < (std::size_t{1} << nb.size()); ++y) {
            const std::string state =
                nb.empty() ? kPooled : bits_of(y, static_cast<int>(nb.size()));
            try {
                family.push_back(conditional_noise_matrix(ds, cluster, nb, state));
            } catch (const CoverageError& e) {
                missing.push_back("cluster " + subset_text(cluster) + ": " + e.what());
            }
        }
        matrices.push_back(std::move(family));
    }
    if (!missing.empty()) {
        std::ostringstream msg;
        msg << "fit_noise_model: insufficient coverage;";
        for (const std::string& m : missing) msg << " " << m;
        throw CoverageError(msg.str());
    }
    return NoiseModel(structure, std::move(matrices));
}

} // namespace qrem
