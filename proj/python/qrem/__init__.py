"""Correlated readout-noise characterization and mitigation."""

from ._qrem import (
    BalanceReport,
    BenchmarkConfig,
    BenchmarkRow,
    CorrelationStructure,
    CorrelationTable,
    CoverageError,
    DdotCollection,
    DiagonalHamiltonian,
    Error,
    GraphVarianceBound,
    HamiltonianTerm,
    MeasurementDataset,
    MitigationReport,
    NoiseModel,
    PerfectionReport,
    QaoaConfig,
    QaoaOutcome,
    SingularModelError,
    SpsaConfig,
    Statevector,
    StochasticMatrix,
    StructureInference,
    ValidationError,
    average_noise_matrix,
    balance_bound,
    balance_report,
    benchmark_csv,
    chebyshev_sample_bound,
    circuits_bound,
    combined_energy_bound,
    correlation_coefficients,
    covariance,
    example_device_model,
    fit_noise_model,
    generate_hash_circuits,
    generate_random_circuits,
    ground_state,
    hamiltonian_variance,
    heuristic_balance,
    infer_structure,
    is_perfect,
    marginalize,
    max2sat_satisfied_from_energy,
    mitigate_energy,
    mitigate_marginal,
    mitigation_error_bound,
    project_to_simplex,
    qaoa_state,
    random_fully_connected,
    random_graph_variance_bound,
    random_max2sat,
    run_benchmark,
    run_qaoa,
    sample_measurements,
    simulate_ddot,
    sk_2d,
    sk_lattice,
    statistical_epsilon,
    thread_budget,
    tvd,
)

__all__ = [name for name in dir() if not name.startswith("_")]
