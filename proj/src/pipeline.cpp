#include "qrem/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iterator>
#include <map>
#include <mutex>
#include <thread>

namespace qrem {

MeasurementDataset simulate_ddot(const NoiseModel& model, const DdotCollection& circuits,
                                 std::size_t shots_per_circuit, std::uint64_t seed) {
    circuits.validate();
    if (circuits.n_qubits != model.n_qubits())
        throw ValidationError("simulate_ddot: circuit and model sizes differ");
    if (shots_per_circuit == 0)
        throw ValidationError("simulate_ddot: shots_per_circuit must be positive");

    NoiseSampler sampler(model);
    MeasurementDataset ds;
    ds.n_qubits = model.n_qubits();
    const int n = model.n_qubits();
    for (std::size_t ci = 0; ci < circuits.circuits.size(); ++ci) {
        const std::string& input = circuits.circuits[ci];
        const std::size_t prepared = index_of(input);
        Rng rng(derive_seed(seed, ci));
        std::map<std::size_t, std::uint64_t> tally;
        for (std::size_t shot = 0; shot < shots_per_circuit; ++shot)
            ++tally[sampler.sample(prepared, rng)];
        auto& row = ds.results[input];
        for (const auto& [outcome, count] : tally) row[bits_of(outcome, n)] += count;
    }
    ds.validate();
    return ds;
}

NoiseModel example_device_model(int n_qubits, std::uint64_t seed) {
    if (n_qubits < 4)
        throw ValidationError("example_device_model: need at least four qubits");
    Rng rng(seed);
    auto base_rate = [&rng] { return 0.01 + 0.04 * rng.uniform(); };

    // dependence strengths, chosen to sit clearly on either side of the
    // 4% cluster / 1% neighbor thresholds
    const double intra = 0.08;   // cluster partner's prepared state
    const double nb = 0.025;     // neighbor's prepared state
    const double joint_mix = 0.01;  // correlated double-flip of the pair

    CorrelationStructure structure;
    structure.n_qubits = n_qubits;
    structure.clusters.push_back({0, 1});
    structure.neighborhoods.push_back({2});
    for (int q = 2; q < n_qubits; ++q) {
        structure.clusters.push_back({q});
        structure.neighborhoods.push_back(q == 2 ? Subset{3} : Subset{});
    }

    std::vector<std::vector<StochasticMatrix>> matrices;

    // pair cluster: rates shift with the partner's and neighbor's input
    const double a = base_rate(), b = base_rate();
    std::vector<StochasticMatrix> pair_family;
    for (int z = 0; z < 2; ++z) {
        Matrix m(4, 4);
        for (int y0 = 0; y0 < 2; ++y0)
            for (int y1 = 0; y1 < 2; ++y1) {
                const double ra = a + intra * y1 + nb * z;
                const double rb = b + intra * y0 + nb * z;
                Vector col(4);
                for (int x0 = 0; x0 < 2; ++x0)
                    for (int x1 = 0; x1 < 2; ++x1)
                        col(x0 * 2 + x1) = (x0 == y0 ? 1.0 - ra : ra) *
                                           (x1 == y1 ? 1.0 - rb : rb);
                // correlated error: both bits flip together now and then
                Vector mixed(4);
                for (int x = 0; x < 4; ++x)
                    mixed(x) = (1.0 - joint_mix) * col(x) + joint_mix * col(x ^ 3);
                m.col(y0 * 2 + y1) = mixed;
            }
        pair_family.emplace_back(m);
    }
    matrices.push_back(std::move(pair_family));

    // qubit 2 leans on qubit 3's input
    {
        const double r = base_rate();
        std::vector<StochasticMatrix> family;
        for (int z = 0; z < 2; ++z) {
            const double rz = r + nb * z;
            Matrix m(2, 2);
            m << 1.0 - rz, rz, rz, 1.0 - rz;
            family.emplace_back(m);
        }
        matrices.push_back(std::move(family));
    }

    for (int q = 3; q < n_qubits; ++q) {
        const double r = base_rate();
        Matrix m(2, 2);
        m << 1.0 - r, r, r, 1.0 - r;
        matrices.push_back({StochasticMatrix(m)});
    }

    return NoiseModel(std::move(structure), std::move(matrices));
}

int thread_budget(int requested) {
    if (requested > 0) return std::min(requested, 256);
    if (const char* env = std::getenv("QREM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 256L));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

// Run `body(i)` for i in [0, count) across the thread budget; the first
// exception wins and is rethrown after all workers drain.
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    const int workers = std::max(1, std::min(threads, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto drain = [&] {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(drain);
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace

std::vector<BenchmarkRow> run_benchmark(const NoiseModel& model, const BenchmarkConfig& cfg) {
    if (cfg.instances < 1) throw ValidationError("run_benchmark: needs at least one instance");
    if (cfg.shots == 0) throw ValidationError("run_benchmark: shots must be positive");
    if (cfg.family != "max2sat" && cfg.family != "fully-connected")
        throw ValidationError("run_benchmark: unknown instance family '" + cfg.family + "'");
    if (cfg.family == "max2sat" && !(cfg.clause_density > 0.0))
        throw ValidationError("run_benchmark: clause density must be positive");
    const int n = model.n_qubits();
    if (n < 2 || n > 20) throw ValidationError("run_benchmark: model size out of range");

    const NoiseSampler sampler(model);
    std::vector<BenchmarkRow> rows(static_cast<std::size_t>(cfg.instances));
    parallel_for(cfg.instances, thread_budget(cfg.threads), [&](int i) {
        const std::uint64_t gen_seed = derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(i));
        const std::uint64_t samp_seed =
            derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(i) + 1);
        const DiagonalHamiltonian h = cfg.family == "max2sat"
                                          ? random_max2sat(n, cfg.clause_density, gen_seed)
                                          : random_fully_connected(n, gen_seed);
        const auto [ground, true_energy] = ground_state(h);
        const std::size_t prepared = index_of(ground);
        Rng rng(samp_seed);
        std::map<std::size_t, std::uint64_t> tally;
        for (std::size_t shot = 0; shot < cfg.shots; ++shot)
            ++tally[sampler.sample(prepared, rng)];
        std::map<std::string, std::uint64_t> counts;
        for (const auto& [outcome, count] : tally) counts[bits_of(outcome, n)] = count;
        const MitigationReport report = mitigate_energy(h, counts, model, cfg.p_err);
        rows[static_cast<std::size_t>(i)] = {i, true_energy, report.raw_energy,
                                             report.mitigated_energy, report.combined_bound};
    });
    return rows;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
    std::string out = "instance_id,true_energy,raw_estimate,mitigated_estimate,bound\n";
    char line[192];
    for (const BenchmarkRow& r : rows) {
        std::snprintf(line, sizeof line, "%d,%.10g,%.10g,%.10g,%.10g\n", r.instance_id,
                      r.true_energy, r.raw_estimate, r.mitigated_estimate, r.bound);
        out += line;
    }
    return out;
}

namespace {

// Shared per-run machinery: energy table for raw estimates plus cached
// correction matrices per cluster-union for the mitigated path.  The
// mitigated value agrees with mitigate_energy on the same counts.
class EnergyEstimator {
public:
    EnergyEstimator(const DiagonalHamiltonian& h, const NoiseModel* model, bool mitigate)
        : h_(h), n_(h.n_qubits), mitigate_(mitigate) {
        table_ = h.energy_table();
        if (!mitigate) return;
        for (std::size_t ti = 0; ti < h.terms.size(); ++ti) {
            const HamiltonianTerm& term = h.terms[ti];
            if (term.support.empty()) {
                constant_ += term.diagonal[0];
                continue;
            }
            const Subset s = model->structure().expand_to_clusters(term.support);
            auto it = std::find_if(unions_.begin(), unions_.end(),
                                   [&](const UnionCell& u) { return u.s == s; });
            if (it == unions_.end()) {
                unions_.push_back({s, correction_matrix(average_noise_matrix(*model, s)).inverse,
                                   {}});
                it = std::prev(unions_.end());
            }
            it->term_indices.push_back(ti);
        }
    }

    double raw(const std::vector<std::uint64_t>& dense, std::size_t shots) const {
        double e = 0.0;
        for (std::size_t x = 0; x < dense.size(); ++x)
            if (dense[x] != 0) e += static_cast<double>(dense[x]) * table_[x];
        return e / static_cast<double>(shots);
    }

    double mitigated(const std::vector<std::uint64_t>& dense, std::size_t shots) const {
        double e = constant_;
        for (const UnionCell& u : unions_) {
            Vector marg = Vector::Zero(Eigen::Index{1} << u.s.size());
            for (std::size_t x = 0; x < dense.size(); ++x)
                if (dense[x] != 0)
                    marg(static_cast<Eigen::Index>(gather_bits(x, u.s, n_))) +=
                        static_cast<double>(dense[x]);
            marg /= static_cast<double>(shots);
            const Distribution fixed = project_to_simplex(u.inverse * marg);
            for (std::size_t ti : u.term_indices) {
                const HamiltonianTerm& term = h_.terms[ti];
                const Vector p = marginalize(fixed.vec(), u.s, term.support);
                for (Eigen::Index t = 0; t < p.size(); ++t)
                    e += term.diagonal[static_cast<std::size_t>(t)] * p(t);
            }
        }
        return e;
    }

    double estimate(const std::vector<std::uint64_t>& dense, std::size_t shots) const {
        return mitigate_ ? mitigated(dense, shots) : raw(dense, shots);
    }

    double exact(const Statevector& psi) const {
        const Vector p = psi.probabilities();
        double e = 0.0;
        for (Eigen::Index x = 0; x < p.size(); ++x)
            e += p(x) * table_[static_cast<std::size_t>(x)];
        return e;
    }

private:
    struct UnionCell {
        Subset s;
        Matrix inverse;
        std::vector<std::size_t> term_indices;
    };
    const DiagonalHamiltonian& h_;
    int n_;
    bool mitigate_;
    std::vector<double> table_;
    std::vector<UnionCell> unions_;
    double constant_ = 0.0;
};

std::vector<QaoaAngles> layers_from(const Vector& angles) {
    std::vector<QaoaAngles> layers(static_cast<std::size_t>(angles.size() / 2));
    for (std::size_t l = 0; l < layers.size(); ++l)
        layers[l] = {angles(static_cast<Eigen::Index>(2 * l)),
                     angles(static_cast<Eigen::Index>(2 * l + 1))};
    return layers;
}

} // namespace

QaoaOutcome run_qaoa(const DiagonalHamiltonian& h, const NoiseModel* noise, bool mitigate,
                     const QaoaConfig& cfg, std::uint64_t seed) {
    h.validate();
    if (h.n_qubits > 20) throw ValidationError("run_qaoa: register too large to simulate");
    if (cfg.layers < 1 || cfg.stage_layers < 1)
        throw ValidationError("run_qaoa: layer counts must be positive");
    if (cfg.evaluations_per_stage < 2)
        throw ValidationError("run_qaoa: need at least two evaluations per stage");
    if (cfg.restarts < 1) throw ValidationError("run_qaoa: need at least one restart");
    if (cfg.shots == 0) throw ValidationError("run_qaoa: shots must be positive");
    cfg.spsa.validate();
    if (mitigate && noise == nullptr)
        throw ValidationError("run_qaoa: mitigation needs a noise model");
    if (noise != nullptr && noise->n_qubits() != h.n_qubits)
        throw ValidationError("run_qaoa: noise model size does not match the hamiltonian");

    const EnergyEstimator estimator(h, noise, mitigate);
    std::optional<NoiseSampler> sampler;
    if (noise != nullptr) sampler.emplace(*noise);
    const NoiseSampler* sampler_ptr = sampler ? &*sampler : nullptr;
    const int stages = (cfg.layers + cfg.stage_layers - 1) / cfg.stage_layers;

    QaoaOutcome best;
    double best_score = 0.0;
    for (int restart = 0; restart < cfg.restarts; ++restart) {
        const std::uint64_t run_seed = derive_seed(seed, static_cast<std::uint64_t>(restart));
        // disjoint stream families: objective draws, SPSA directions,
        // and the deciding final evaluation must never share a seed
        const std::uint64_t eval_space = derive_seed(run_seed, 1);
        const std::uint64_t spsa_space = derive_seed(run_seed, 2);
        std::uint64_t eval_counter = 0;
        Vector angles = Vector::Zero(2 * cfg.layers);
        std::vector<double> trace;

        for (int stage = 0; stage < stages; ++stage) {
            const int first = stage * cfg.stage_layers;
            const int active = std::min(cfg.stage_layers, cfg.layers - first);
            auto objective = [&](const Vector& theta) {
                Vector full = angles;
                full.segment(2 * first, 2 * active) = theta;
                full.conservativeResize(2 * (first + active));
                const Statevector psi = qaoa_state(h, layers_from(full));
                Rng rng(derive_seed(eval_space, eval_counter++));
                const auto dense = sample_counts_dense(psi, cfg.shots, sampler_ptr, rng);
                return estimator.estimate(dense, cfg.shots);
            };
            const SpsaResult result = spsa_optimize(
                objective, Vector::Zero(2 * active), cfg.spsa.staged(stage),
                cfg.evaluations_per_stage, derive_seed(spsa_space, static_cast<std::uint64_t>(stage)));
            angles.segment(2 * first, 2 * active) = result.best_angles;
            trace.insert(trace.end(), result.trace.begin(), result.trace.end());
        }

        // fresh evaluation at the winning angles decides between restarts
        const Statevector psi = qaoa_state(h, layers_from(angles));
        Rng rng(derive_seed(run_seed, 3));
        const auto dense = sample_counts_dense(psi, cfg.shots, sampler_ptr, rng);
        const double score = estimator.estimate(dense, cfg.shots);
        if (restart == 0 || score < best_score) {
            best_score = score;
            best.angles = angles;
            best.estimate = score;
            best.exact = estimator.exact(psi);
            best.trace = std::move(trace);
        }
    }
    return best;
}

} // namespace qrem
