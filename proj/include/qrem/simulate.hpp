#pragma once

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "qrem/hamiltonian.hpp"
#include "qrem/noise_model.hpp"
#include "qrem/rng.hpp"

namespace qrem {

using ComplexVector = Eigen::VectorXcd;

/// Pure state of an n-qubit register in the computational basis, indexed
/// by the usual big-endian convention (qubit 0 is the most significant
/// bit).
class Statevector {
public:
    explicit Statevector(ComplexVector amplitudes, double tol = kStrictTol);

    /// |+>^n.
    static Statevector plus_state(int n);

    /// Draw from the unitarily invariant distribution over pure states.
    static Statevector haar_random(int n, Rng& rng);

    const ComplexVector& amps() const { return a_; }
    int n_qubits() const { return n_; }
    Eigen::Index dim() const { return a_.size(); }

    /// Measurement probabilities |amplitude|^2.
    Vector probabilities() const;

private:
    ComplexVector a_;
    int n_ = 0;
};

/// One optimization layer: phase angle beta (objective) then mixing
/// angle alpha (transverse field).
struct QaoaAngles {
    double beta = 0.0;
    double alpha = 0.0;
};

/// Apply e^{-i alpha H_D} e^{-i beta H_O} for each layer to `start`,
/// where H_D is the transverse field sum_k x_k.  The phase is applied
/// elementwise via the energy table; each x-rotation is an in-place
/// cos/-i sin butterfly over amplitude pairs.
Statevector apply_qaoa_layers(const Statevector& start, const DiagonalHamiltonian& h,
                              const std::vector<QaoaAngles>& layers);

/// Full protocol from |+>^n.
Statevector qaoa_state(const DiagonalHamiltonian& h, const std::vector<QaoaAngles>& layers);

/// Sample computational-basis outcomes, optionally pushing every shot
/// through the readout-noise sampler.  Dense histogram over basis
/// indices.
std::vector<std::uint64_t> sample_counts_dense(const Statevector& psi, std::size_t shots,
                                               const NoiseSampler* noise, Rng& rng);

/// Same, keyed by bitstring.
std::map<std::string, std::uint64_t> sample_measurements(const Statevector& psi,
                                                         std::size_t shots,
                                                         const NoiseModel* noise, Rng& rng);

/// Exact <H_a H_b> - <H_a><H_b> over the measurement distribution.
double covariance(const DiagonalHamiltonian& h, const Statevector& psi, std::size_t term_a,
                  std::size_t term_b);

/// Exact variance of the total energy over the measurement distribution.
double hamiltonian_variance(const DiagonalHamiltonian& h, const Statevector& psi);

/// Stochastic-approximation hyperparameters.  Gains follow
/// a_k = a/(k+1+A)^alpha and c_k = c/(k+1)^gamma.
struct SpsaConfig {
    double alpha = 0.602;
    double gamma = 0.101;
    double big_a = 200.0;
    double a = 0.06;
    double c = 0.12;

    void validate() const;

    /// Per-stage schedule for the layer-staged protocol: a and c decay by
    /// 0.9 per stage while A grows by 1.1.
    SpsaConfig staged(int stage) const;
};

struct SpsaResult {
    Vector best_angles;        ///< center with the best observed pair average
    Vector final_angles;       ///< center after the last update
    double best_value = 0.0;   ///< pair average at best_angles
    std::vector<double> trace; ///< per-iteration pair average (f+ + f-)/2
};

/// Minimize a noisy objective with simultaneous-perturbation gradient
/// estimates (two evaluations per iteration, Bernoulli +-1 directions).
SpsaResult spsa_optimize(const std::function<double(const Vector&)>& objective,
                         const Vector& initial, const SpsaConfig& config, int evaluations,
                         std::uint64_t seed);

} // namespace qrem
