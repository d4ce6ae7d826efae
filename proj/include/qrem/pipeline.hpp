#pragma once

#include "qrem/characterize.hpp"
#include "qrem/mitigate.hpp"
#include "qrem/simulate.hpp"

namespace qrem {

/// Run every circuit of the collection through the noise model
/// `shots_per_circuit` times and tally outcomes.  Circuits get
/// independent substreams, so the result is invariant to ordering.
/// Repeated circuits pool into one entry with summed counts.
MeasurementDataset simulate_ddot(const NoiseModel& model, const DdotCollection& circuits,
                                 std::size_t shots_per_circuit, std::uint64_t seed);

/// Example model shaped like the superconducting devices this targets:
/// qubits 0 and 1 form one strongly correlated cluster whose noise also
/// shifts with the prepared state of qubit 2, and qubit 2's own noise
/// shifts with qubit 3.  Base flip rates land in [1%, 5%]; the two
/// neighbor dependences are mild (2.5%).  Needs at least four qubits.
NoiseModel example_device_model(int n_qubits, std::uint64_t seed);

/// Worker count for sweeps: an explicit positive request wins, then the
/// QREM_THREADS environment variable, then the hardware count; >= 1.
int thread_budget(int requested);

/// One instance of the ground-state estimation benchmark.
struct BenchmarkRow {
    int instance_id = 0;
    double true_energy = 0;
    double raw_estimate = 0;
    double mitigated_estimate = 0;
    double bound = 0;
};

struct BenchmarkConfig {
    int instances = 100;
    std::string family = "max2sat";  ///< "max2sat" or "fully-connected"
    double clause_density = 4.0;
    std::size_t shots = 40960;
    double p_err = 0.05;
    std::uint64_t seed = 1;
    int threads = 0;  ///< passed through thread_budget
};

/// Prepare the ground state of one random instance per row, measure it
/// through the model, and estimate the energy raw and mitigated.
/// Instances run on worker threads with isolated RNG substreams, so the
/// output is byte-identical for a fixed seed regardless of thread count.
std::vector<BenchmarkRow> run_benchmark(const NoiseModel& model, const BenchmarkConfig& cfg);

/// CSV with header instance_id,true_energy,raw_estimate,mitigated_estimate,bound.
std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);

/// Staged-SPSA QAOA driver configuration.  Angles are optimized
/// `stage_layers` layers at a time (six angles per default stage),
/// earlier stages frozen, later layers starting from zero; the whole
/// schedule restarts `restarts` times and the run with the best final
/// estimate wins.
struct QaoaConfig {
    int layers = 3;
    int stage_layers = 3;
    int evaluations_per_stage = 1600;
    int restarts = 2;
    std::size_t shots = 4096;  ///< per objective evaluation
    double p_err = 0.05;
    SpsaConfig spsa{};
};

struct QaoaOutcome {
    Vector angles;              ///< winning angles, beta/alpha per layer
    double estimate = 0;        ///< the mode's estimator at `angles`
    double exact = 0;           ///< exact <H> at `angles`
    std::vector<double> trace;  ///< SPSA pair averages, stages concatenated
};

/// Optimize `h` from |+>^n with the staged protocol.  `noise` null means
/// ideal sampling; with a model, `mitigate` switches the energy
/// estimator from raw counts to marginal-mitigated counts.
QaoaOutcome run_qaoa(const DiagonalHamiltonian& h, const NoiseModel* noise, bool mitigate,
                     const QaoaConfig& cfg, std::uint64_t seed);

} // namespace qrem
