#include "qrem/mitigate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace qrem {

namespace {

// ln(2^n - 2); switches to n*ln2 once the subtraction stops mattering.
double log_pow2_minus_2(int n) {
    if (n > 50) return static_cast<double>(n) * std::log(2.0);
    return std::log(std::exp2(static_cast<double>(n)) - 2.0);
}

} // namespace

MitigatedMarginal mitigate_marginal(const Distribution& p_noisy, const NoiseModel& model,
                                    const Subset& s) {
    model.structure().clusters_within(s); // rejects anything cutting a cluster
    const Eigen::Index dim = Eigen::Index{1} << s.size();
    if (p_noisy.size() != dim)
        throw ValidationError("mitigate_marginal: marginal length does not match the subset");
    const CorrectionMatrix corr = correction_matrix(average_noise_matrix(model, s));
    Vector q = corr.inverse * p_noisy.vec();
    return {project_to_simplex(q), QuasiDistribution(std::move(q))};
}

double mitigation_error_bound(const NoiseModel& model, const Subset& s) {
    const StochasticMatrix avg = average_noise_matrix(model, s);
    const CorrectionMatrix corr = correction_matrix(avg);
    const Subset ext = external_neighborhood(model.structure(), s);
    double worst = 0.0;
    for (std::size_t y = 0; y < (std::size_t{1} << ext.size()); ++y) {
        const StochasticMatrix fixed = fixed_neighbor_matrix(model, s, y);
        worst = std::max(worst, norm_1to1(avg.mat() - fixed.mat()));
    }
    return 0.5 * corr.norm_1to1 * worst;
}

double statistical_epsilon(int n, std::uint64_t s, double p_err, std::uint64_t k) {
    if (n < 2) throw ValidationError("statistical_epsilon: needs n >= 2");
    if (s < 1) throw ValidationError("statistical_epsilon: needs at least one sample");
    if (!(p_err > 0.0 && p_err < 1.0))
        throw ValidationError("statistical_epsilon: p_err must lie in (0, 1)");
    if (k < 1) throw ValidationError("statistical_epsilon: needs at least one marginal");
    const double numer = log_pow2_minus_2(n) + std::log(1.0 / p_err) +
                         std::log(static_cast<double>(k));
    return std::sqrt(numer / (2.0 * static_cast<double>(s)));
}

double combined_energy_bound(const DiagonalHamiltonian& h, const NoiseModel& model,
                             std::uint64_t s, double p_err) {
    h.validate();
    if (h.n_qubits != model.n_qubits())
        throw ValidationError("combined_energy_bound: hamiltonian and model disagree on n");
    // Per distinct cluster-union: correction norm and approximation bound.
    std::map<Subset, std::pair<double, double>> cache;
    int widest = 2;
    std::uint64_t n_terms = 0;
    for (const HamiltonianTerm& term : h.terms) {
        if (term.support.empty()) continue; // constants carry no noise
        const Subset ext = model.structure().expand_to_clusters(term.support);
        widest = std::max(widest, static_cast<int>(ext.size()));
        ++n_terms;
        if (!cache.count(ext)) {
            const CorrectionMatrix corr = correction_matrix(average_noise_matrix(model, ext));
            cache.emplace(ext, std::pair{corr.norm_1to1, mitigation_error_bound(model, ext)});
        }
    }
    if (n_terms == 0) return 0.0;
    const double eps = statistical_epsilon(widest, s, p_err, n_terms);
    double bound = 0.0;
    for (const HamiltonianTerm& term : h.terms) {
        if (term.support.empty()) continue;
        const auto& [corr_norm, delta] = cache.at(model.structure().expand_to_clusters(term.support));
        bound += 2.0 * term.norm() * (eps * corr_norm + delta);
    }
    return bound;
}

double chebyshev_sample_bound(double var_h, double delta_e, double p_f) {
    if (!(var_h >= 0.0)) throw ValidationError("chebyshev_sample_bound: variance must be >= 0");
    if (!(delta_e > 0.0)) throw ValidationError("chebyshev_sample_bound: delta_e must be > 0");
    if (!(p_f > 0.0)) throw ValidationError("chebyshev_sample_bound: p_f must be > 0");
    return var_h / (delta_e * delta_e * p_f);
}

GraphVarianceBound random_graph_variance_bound(std::int64_t n, std::int64_t k, int p_layers,
                                               double f_h, double w) {
    if (n < 1 || k < 1) throw ValidationError("random_graph_variance_bound: needs n, k >= 1");
    if (p_layers < 0) throw ValidationError("random_graph_variance_bound: negative depth");
    if (!(f_h >= 0.0)) throw ValidationError("random_graph_variance_bound: f_h must be >= 0");
    if (!(w > 0.0 && w < 1.0))
        throw ValidationError("random_graph_variance_bound: w must lie in (0, 1)");
    const double q = static_cast<double>(k) / static_cast<double>(n);
    const double ln_2q = std::log(2.0 * q);
    const double ln_base = std::log(2.0 * q / std::log(2.0));
    GraphVarianceBound out;
    if (ln_2q == 0.0) return out; // log base degenerates at q = 1/2; no claim
    const double x = std::abs(std::log(std::log(2.0)) / ln_2q);
    out.var_exponent = w * (2.0 + x) / (1.0 + x);
    out.prob_exponent = w / (3.0 * (1.0 + x));
    const bool shallow = ln_base > 0.0 &&
                         static_cast<double>(p_layers) <
                             w * std::log(static_cast<double>(n)) / (8.0 * ln_base) - 1.0;
    if (!shallow) return out;
    out.admissible = true;
    out.bound = f_h * q * std::pow(static_cast<double>(n), out.var_exponent + 1.0);
    return out;
}

double energy_from_marginals(const DiagonalHamiltonian& h,
                             const std::map<Subset, Distribution>& marginals) {
    h.validate();
    for (const auto& [key, dist] : marginals)
        if (dist.size() != Eigen::Index{1} << key.size())
            throw ValidationError("energy_from_marginals: marginal length does not match its key");
    double total = 0.0;
    for (const HamiltonianTerm& term : h.terms) {
        if (term.support.empty()) {
            total += term.diagonal[0];
            continue;
        }
        Vector p;
        auto it = marginals.find(term.support);
        if (it != marginals.end()) {
            p = it->second.vec();
        } else {
            bool found = false;
            for (const auto& [key, dist] : marginals) {
                if (!subset_includes(key, term.support)) continue;
                p = marginalize(dist.vec(), key, term.support);
                found = true;
                break;
            }
            if (!found)
                throw ValidationError("energy_from_marginals: no marginal covers term '" +
                                      term.label + "'");
        }
        for (Eigen::Index t = 0; t < p.size(); ++t)
            total += term.diagonal[static_cast<std::size_t>(t)] * p(t);
    }
    return total;
}

nlohmann::json MitigationReport::to_json() const {
    nlohmann::json jt = nlohmann::json::array();
    for (const TermReport& t : terms) {
        jt.push_back({{"label", t.label},
                      {"support", t.support},
                      {"expanded", t.expanded},
                      {"correction_norm", t.correction_norm},
                      {"approx_bound", t.approx_bound},
                      {"raw_energy", t.raw_energy},
                      {"mitigated_energy", t.mitigated_energy},
                      {"corrected", std::vector<double>(t.corrected.vec().begin(),
                                                        t.corrected.vec().end())},
                      {"quasi", std::vector<double>(t.quasi.vec().begin(), t.quasi.vec().end())}});
    }
    return {{"schema", "qrem-mitigation-1"},
            {"samples", samples},
            {"p_err", p_err},
            {"statistical_epsilon", statistical_eps},
            {"combined_bound", combined_bound},
            {"raw_energy", raw_energy},
            {"mitigated_energy", mitigated_energy},
            {"raw_quasi", raw_quasi},
            {"terms", std::move(jt)}};
}

MitigationReport mitigate_energy(const DiagonalHamiltonian& h,
                                 const std::map<std::string, std::uint64_t>& counts,
                                 const NoiseModel& model, double p_err, bool raw_quasi) {
    h.validate();
    if (h.n_qubits != model.n_qubits())
        throw ValidationError("mitigate_energy: hamiltonian and model disagree on n");
    if (counts.empty()) throw ValidationError("mitigate_energy: no counts");
    std::uint64_t total = 0;
    for (const auto& [bits, c] : counts) {
        if (static_cast<int>(bits.size()) != h.n_qubits)
            throw ValidationError("mitigate_energy: outcome '" + bits + "' has wrong length");
        total += c;
    }
    if (total == 0) throw ValidationError("mitigate_energy: zero total counts");

    // One empirical marginal + correction per distinct cluster-union.
    struct Cell {
        Distribution noisy;
        MitigatedMarginal fixed;
        double corr_norm;
        double delta;
    };
    std::map<Subset, Cell> cells;
    int widest = 2;
    std::uint64_t n_terms = 0;
    for (const HamiltonianTerm& term : h.terms) {
        if (term.support.empty()) continue;
        const Subset ext = model.structure().expand_to_clusters(term.support);
        widest = std::max(widest, static_cast<int>(ext.size()));
        ++n_terms;
        if (cells.count(ext)) continue;
        Vector tally = Vector::Zero(Eigen::Index{1} << ext.size());
        for (const auto& [bits, c] : counts)
            tally(static_cast<Eigen::Index>(index_of(bits, ext))) += static_cast<double>(c);
        Distribution noisy(tally / static_cast<double>(total), kLooseTol);
        MitigatedMarginal fixed = mitigate_marginal(noisy, model, ext);
        const double corr_norm = correction_matrix(average_noise_matrix(model, ext)).norm_1to1;
        const double delta = mitigation_error_bound(model, ext);
        cells.emplace(ext, Cell{std::move(noisy), std::move(fixed), corr_norm, delta});
    }

    MitigationReport report;
    report.samples = total;
    report.p_err = p_err;
    report.raw_quasi = raw_quasi;
    if (n_terms > 0) report.statistical_eps = statistical_epsilon(widest, total, p_err, n_terms);

    for (const HamiltonianTerm& term : h.terms) {
        if (term.support.empty()) {
            report.raw_energy += term.diagonal[0];
            report.mitigated_energy += term.diagonal[0];
            continue;
        }
        const Subset ext = model.structure().expand_to_clusters(term.support);
        const Cell& cell = cells.at(ext);
        const Vector& mit_source = raw_quasi ? cell.fixed.quasi.vec() : cell.fixed.corrected.vec();
        const Vector raw_p = marginalize(cell.noisy.vec(), ext, term.support);
        const Vector mit_p = marginalize(mit_source, ext, term.support);
        double raw_e = 0.0, mit_e = 0.0;
        for (Eigen::Index t = 0; t < raw_p.size(); ++t) {
            raw_e += term.diagonal[static_cast<std::size_t>(t)] * raw_p(t);
            mit_e += term.diagonal[static_cast<std::size_t>(t)] * mit_p(t);
        }
        report.raw_energy += raw_e;
        report.mitigated_energy += mit_e;
        report.combined_bound +=
            2.0 * term.norm() * (report.statistical_eps * cell.corr_norm + cell.delta);
        report.terms.push_back({term.label, term.support, ext, cell.corr_norm, cell.delta, raw_e,
                                mit_e, cell.fixed.corrected, cell.fixed.quasi});
    }
    return report;
}

} // namespace qrem
