#include "qrem/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qrem {

Statevector::Statevector(ComplexVector amplitudes, double tol) : a_(std::move(amplitudes)) {
    if (a_.size() == 0 || (a_.size() & (a_.size() - 1)) != 0)
        throw ValidationError("Statevector: length must be a power of two");
    n_ = 0;
    while ((Eigen::Index{1} << n_) < a_.size()) ++n_;
    if (std::abs(a_.norm() - 1.0) > tol)
        throw ValidationError("Statevector: amplitudes must have unit norm");
}

Statevector Statevector::plus_state(int n) {
    if (n < 1 || n > 24) throw ValidationError("plus_state: n out of range");
    ComplexVector a = ComplexVector::Constant(Eigen::Index{1} << n,
                                              std::pow(2.0, -0.5 * n));
    return Statevector(std::move(a));
}

Statevector Statevector::haar_random(int n, Rng& rng) {
    if (n < 1 || n > 24) throw ValidationError("haar_random: n out of range");
    ComplexVector a(Eigen::Index{1} << n);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a(i) = std::complex<double>(rng.normal(), rng.normal());
    a /= a.norm();
    return Statevector(std::move(a));
}

Vector Statevector::probabilities() const {
    Vector p(a_.size());
    for (Eigen::Index i = 0; i < a_.size(); ++i) p(i) = std::norm(a_(i));
    return p;
}

Statevector apply_qaoa_layers(const Statevector& start, const DiagonalHamiltonian& h,
                              const std::vector<QaoaAngles>& layers) {
    h.validate();
    if (start.n_qubits() != h.n_qubits)
        throw ValidationError("apply_qaoa_layers: state and hamiltonian sizes differ");
    const int n = h.n_qubits;
    const std::size_t dim = std::size_t{1} << n;
    std::vector<double> energy = h.energy_table();
    ComplexVector psi = start.amps();
    const std::complex<double> mi(0.0, -1.0);
    for (const QaoaAngles& layer : layers) {
        // diagonal phase e^{-i beta E(x)}
        for (std::size_t x = 0; x < dim; ++x)
            psi(static_cast<Eigen::Index>(x)) *=
                std::exp(mi * layer.beta * energy[x]);
        // transverse field: independent single-qubit rotations
        const double co = std::cos(layer.alpha);
        const std::complex<double> si = mi * std::sin(layer.alpha);
        for (int q = 0; q < n; ++q) {
            const std::size_t mask = std::size_t{1} << (n - 1 - q);
            for (std::size_t x = 0; x < dim; ++x) {
                if (x & mask) continue;
                const auto i0 = static_cast<Eigen::Index>(x);
                const auto i1 = static_cast<Eigen::Index>(x | mask);
                const std::complex<double> a0 = psi(i0), a1 = psi(i1);
                psi(i0) = co * a0 + si * a1;
                psi(i1) = si * a0 + co * a1;
            }
        }
    }
    // The evolution is unitary; tolerate only tiny roundoff drift.
    return Statevector(std::move(psi), 1e-9);
}

Statevector qaoa_state(const DiagonalHamiltonian& h, const std::vector<QaoaAngles>& layers) {
    return apply_qaoa_layers(Statevector::plus_state(h.n_qubits), h, layers);
}

std::vector<std::uint64_t> sample_counts_dense(const Statevector& psi, std::size_t shots,
                                               const NoiseSampler* noise, Rng& rng) {
    if (shots == 0) throw ValidationError("sample_counts_dense: shots must be positive");
    if (noise && noise->n_qubits() != psi.n_qubits())
        throw ValidationError("sample_counts_dense: noise model size mismatch");
    const Vector p = psi.probabilities();
    Vector cumulative(p.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) { acc += p(i); cumulative(i) = acc; }
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(p.size()), 0);
    for (std::size_t t = 0; t < shots; ++t) {
        double u = rng.uniform() * acc;
        const double* begin = cumulative.data();
        const double* it = std::upper_bound(begin, begin + cumulative.size(), u);
        auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
            it - begin, cumulative.size() - 1));
        if (noise) idx = noise->sample(idx, rng);
        ++counts[idx];
    }
    return counts;
}

std::map<std::string, std::uint64_t> sample_measurements(const Statevector& psi,
                                                         std::size_t shots,
                                                         const NoiseModel* noise, Rng& rng) {
    std::optional<NoiseSampler> sampler;
    if (noise) sampler.emplace(*noise);
    std::vector<std::uint64_t> dense =
        sample_counts_dense(psi, shots, sampler ? &*sampler : nullptr, rng);
    std::map<std::string, std::uint64_t> out;
    for (std::size_t idx = 0; idx < dense.size(); ++idx)
        if (dense[idx] != 0) out[bits_of(idx, psi.n_qubits())] = dense[idx];
    return out;
}

namespace {

std::vector<double> term_energy_table(const DiagonalHamiltonian& h, std::size_t term,
                                      std::size_t dim) {
    const HamiltonianTerm& t = h.terms.at(term);
    std::vector<double> e(dim);
    for (std::size_t x = 0; x < dim; ++x)
        e[x] = t.diagonal[gather_bits(x, t.support, h.n_qubits)];
    return e;
}

} // namespace

double covariance(const DiagonalHamiltonian& h, const Statevector& psi, std::size_t term_a,
                  std::size_t term_b) {
    h.validate();
    if (psi.n_qubits() != h.n_qubits)
        throw ValidationError("covariance: state and hamiltonian sizes differ");
    const std::size_t dim = std::size_t{1} << h.n_qubits;
    const Vector p = psi.probabilities();
    std::vector<double> ea = term_energy_table(h, term_a, dim);
    std::vector<double> eb = term_energy_table(h, term_b, dim);
    double mab = 0.0, ma = 0.0, mb = 0.0;
    for (std::size_t x = 0; x < dim; ++x) {
        const double w = p(static_cast<Eigen::Index>(x));
        mab += w * ea[x] * eb[x];
        ma += w * ea[x];
        mb += w * eb[x];
    }
    return mab - ma * mb;
}

double hamiltonian_variance(const DiagonalHamiltonian& h, const Statevector& psi) {
    h.validate();
    if (psi.n_qubits() != h.n_qubits)
        throw ValidationError("hamiltonian_variance: state and hamiltonian sizes differ");
    const Vector p = psi.probabilities();
    std::vector<double> energy = h.energy_table();
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t x = 0; x < energy.size(); ++x) {
        const double w = p(static_cast<Eigen::Index>(x));
        m1 += w * energy[x];
        m2 += w * energy[x] * energy[x];
    }
    return m2 - m1 * m1;
}

void SpsaConfig::validate() const {
    if (alpha <= 0 || gamma <= 0 || big_a <= 0 || a <= 0 || c <= 0)
        throw ValidationError("SpsaConfig: all hyperparameters must be positive");
}

SpsaConfig SpsaConfig::staged(int stage) const {
    if (stage < 0) throw ValidationError("SpsaConfig::staged: stage must be nonnegative");
    SpsaConfig out = *this;
    out.a = a * std::pow(0.9, stage);
    out.c = c * std::pow(0.9, stage);
    out.big_a = big_a * std::pow(1.1, stage);
    return out;
}

SpsaResult spsa_optimize(const std::function<double(const Vector&)>& objective,
                         const Vector& initial, const SpsaConfig& config, int evaluations,
                         std::uint64_t seed) {
    config.validate();
    if (evaluations < 2) throw ValidationError("spsa_optimize: need at least two evaluations");
    if (initial.size() == 0) throw ValidationError("spsa_optimize: empty parameter vector");
    const int iterations = evaluations / 2;
    const Eigen::Index dim = initial.size();
    Rng rng(seed);

    SpsaResult result;
    Vector theta = initial;
    result.best_angles = theta;
    result.best_value = std::numeric_limits<double>::infinity();
    Vector delta(dim), plus(dim), minus(dim);
    for (int k = 0; k < iterations; ++k) {
        const double ak = config.a / std::pow(k + 1.0 + config.big_a, config.alpha);
        const double ck = config.c / std::pow(k + 1.0, config.gamma);
        for (Eigen::Index i = 0; i < dim; ++i) delta(i) = rng.pm_one();
        plus = theta + ck * delta;
        minus = theta - ck * delta;
        const double fp = objective(plus);
        const double fm = objective(minus);
        const double pair_average = 0.5 * (fp + fm);
        result.trace.push_back(pair_average);
        if (pair_average < result.best_value) {
            result.best_value = pair_average;
            result.best_angles = theta;
        }
        const double scale = (fp - fm) / (2.0 * ck);
        // delta entries are +-1, so dividing equals multiplying
        theta -= ak * scale * delta;
    }
    result.final_angles = theta;
    return result;
}

} // namespace qrem
