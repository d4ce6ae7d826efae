#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qrem/pipeline.hpp"

namespace py = pybind11;
using namespace qrem;

namespace {

nlohmann::json parse_json(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
    }
}

std::vector<QaoaAngles> to_layers(const std::vector<std::pair<double, double>>& pairs) {
    std::vector<QaoaAngles> layers;
    layers.reserve(pairs.size());
    for (const auto& [beta, alpha] : pairs) layers.push_back({beta, alpha});
    return layers;
}

} // namespace

PYBIND11_MODULE(_qrem, m) {
    m.doc() = "correlated readout-noise characterization and mitigation";

    // later registrations are matched first, so the subclasses must
    // follow the base for their translators to win
    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<CoverageError>(m, "CoverageError", base.ptr());
    py::register_exception<SingularModelError>(m, "SingularModelError", base.ptr());

    py::class_<CorrelationStructure>(m, "CorrelationStructure")
        .def(py::init([](int n, std::vector<Subset> clusters, std::vector<Subset> neighborhoods) {
                 CorrelationStructure s{n, std::move(clusters), std::move(neighborhoods)};
                 s.validate();
                 return s;
             }),
             py::arg("n_qubits"), py::arg("clusters"), py::arg("neighborhoods"))
        .def_readonly("n_qubits", &CorrelationStructure::n_qubits)
        .def_readonly("clusters", &CorrelationStructure::clusters)
        .def_readonly("neighborhoods", &CorrelationStructure::neighborhoods)
        .def("expand_to_clusters", &CorrelationStructure::expand_to_clusters)
        .def("cluster_of", &CorrelationStructure::cluster_of)
        .def(py::self == py::self);

    py::class_<StochasticMatrix>(m, "StochasticMatrix")
        .def(py::init<Matrix>(), py::arg("matrix"))
        .def_property_readonly("matrix", [](const StochasticMatrix& s) { return s.mat(); });

    py::class_<NoiseModel>(m, "NoiseModel")
        .def(py::init([](CorrelationStructure s, std::vector<std::vector<Matrix>> families) {
                 std::vector<std::vector<StochasticMatrix>> wrapped;
                 for (auto& family : families) {
                     std::vector<StochasticMatrix> f;
                     for (auto& mat : family) f.emplace_back(std::move(mat));
                     wrapped.push_back(std::move(f));
                 }
                 return NoiseModel(std::move(s), std::move(wrapped));
             }),
             py::arg("structure"), py::arg("matrices"))
        .def_static("uncorrelated",
                    [](const std::vector<Matrix>& singles) {
                        std::vector<StochasticMatrix> wrapped;
                        for (const Matrix& mat : singles) wrapped.emplace_back(mat);
                        return NoiseModel::uncorrelated(wrapped);
                    },
                    py::arg("single_qubit_matrices"))
        .def_property_readonly("n_qubits", &NoiseModel::n_qubits)
        .def_property_readonly("structure", &NoiseModel::structure)
        .def("cluster_matrix",
             [](const NoiseModel& model, int chi, std::size_t y) {
                 return model.cluster_matrix(chi, y).mat();
             },
             py::arg("cluster"), py::arg("neighbor_state"))
        .def("global_matrix", &NoiseModel::global_matrix)
        .def("sample_counts",
             [](const NoiseModel& model, const std::string& prepared, std::size_t shots,
                std::uint64_t seed) {
                 Rng rng(seed);
                 std::map<std::string, std::uint64_t> counts;
                 for (std::size_t s = 0; s < shots; ++s) ++counts[model.sample(prepared, rng)];
                 return counts;
             },
             py::arg("prepared"), py::arg("shots"), py::arg("seed"))
        .def("to_json", [](const NoiseModel& model) { return model.to_json().dump(1); })
        .def_static("from_json",
                    [](const std::string& text) { return NoiseModel::from_json(parse_json(text)); });

    m.def("example_device_model", &example_device_model, py::arg("n_qubits"), py::arg("seed"));
    m.def("average_noise_matrix",
          [](const NoiseModel& model, const Subset& s) {
              return average_noise_matrix(model, s).mat();
          },
          py::arg("model"), py::arg("subset"));

    // collections
    py::class_<DdotCollection>(m, "DdotCollection")
        .def(py::init([](int n, std::vector<std::string> circuits) {
                 DdotCollection c{n, std::move(circuits)};
                 c.validate();
                 return c;
             }),
             py::arg("n_qubits"), py::arg("circuits"))
        .def_readonly("n_qubits", &DdotCollection::n_qubits)
        .def_readonly("circuits", &DdotCollection::circuits);

    py::class_<PerfectionReport>(m, "PerfectionReport")
        .def_readonly("perfect", &PerfectionReport::perfect)
        .def_readonly("missing", &PerfectionReport::missing);

    py::class_<BalanceReport>(m, "BalanceReport")
        .def_readonly("k", &BalanceReport::k)
        .def_readonly("n_circuits", &BalanceReport::n_circuits)
        .def_readonly("max_tvd_from_uniform", &BalanceReport::max_tvd_from_uniform)
        .def_readonly("appearance_std", &BalanceReport::appearance_std)
        .def_readonly("missing_cells", &BalanceReport::missing_cells);

    m.def("generate_random_circuits", &generate_random_circuits, py::arg("n"), py::arg("k"),
          py::arg("extra"), py::arg("seed"), py::arg("grow_until_perfect") = false);
    m.def("generate_hash_circuits", &generate_hash_circuits, py::arg("n"), py::arg("k"),
          py::arg("n_hashes"), py::arg("seed"), py::arg("grow_until_perfect") = false);
    m.def("is_perfect", &is_perfect, py::arg("collection"), py::arg("k"));
    m.def("balance_report", &balance_report, py::arg("collection"), py::arg("k"));
    m.def("heuristic_balance", &heuristic_balance, py::arg("collection"), py::arg("k"),
          py::arg("rounds"), py::arg("seed"));
    m.def("circuits_bound",
          [](int n, int k, double delta, const std::string& method) {
              if (method != "random" && method != "hash")
                  throw ValidationError("circuits_bound: method must be 'random' or 'hash'");
              return circuits_bound(n, k, delta,
                                    method == "hash" ? BoundMethod::hash : BoundMethod::random);
          },
          py::arg("n"), py::arg("k"), py::arg("delta"), py::arg("method") = "random");
    m.def("balance_bound", &balance_bound, py::arg("n"), py::arg("k"), py::arg("delta"),
          py::arg("eps"));

    // datasets and characterization
    py::class_<MeasurementDataset>(m, "MeasurementDataset")
        .def(py::init([](int n, std::map<std::string, std::map<std::string, std::uint64_t>> r) {
                 MeasurementDataset ds{n, std::move(r)};
                 ds.validate();
                 return ds;
             }),
             py::arg("n_qubits"), py::arg("results"))
        .def_readonly("n_qubits", &MeasurementDataset::n_qubits)
        .def_readonly("results", &MeasurementDataset::results)
        .def("to_json", [](const MeasurementDataset& ds) { return ds.to_json().dump(1); })
        .def_static("from_json", [](const std::string& text) {
            return MeasurementDataset::from_json(parse_json(text));
        });

    m.def("simulate_ddot", &simulate_ddot, py::arg("model"), py::arg("circuits"),
          py::arg("shots_per_circuit"), py::arg("seed"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<CorrelationTable>(m, "CorrelationTable")
        .def_readonly("c", &CorrelationTable::c);

    py::class_<StructureInference>(m, "StructureInference")
        .def_readonly("structure", &StructureInference::structure)
        .def_readonly("warnings", &StructureInference::warnings);

    m.def("correlation_coefficients", &correlation_coefficients, py::arg("dataset"),
          py::arg("reweighted") = false, py::call_guard<py::gil_scoped_release>());
    m.def("infer_structure", &infer_structure, py::arg("table"), py::arg("delta_cluster"),
          py::arg("delta_neighbor"), py::arg("max_joint_size"));
    m.def("fit_noise_model", &fit_noise_model, py::arg("dataset"), py::arg("structure"),
          py::call_guard<py::gil_scoped_release>());

    // mitigation
    m.def("mitigate_marginal",
          [](const Vector& noisy, const NoiseModel& model, const Subset& s) {
              const MitigatedMarginal out = mitigate_marginal(Distribution(noisy, kLooseTol),
                                                              model, s);
              return std::make_pair(out.corrected.vec(), out.quasi.vec());
          },
          py::arg("noisy"), py::arg("model"), py::arg("subset"),
          "returns (corrected, quasi) vectors");
    m.def("mitigation_error_bound", &mitigation_error_bound, py::arg("model"), py::arg("subset"));
    m.def("statistical_epsilon", &statistical_epsilon, py::arg("n"), py::arg("samples"),
          py::arg("p_err"), py::arg("k"));
    m.def("combined_energy_bound", &combined_energy_bound, py::arg("hamiltonian"),
          py::arg("model"), py::arg("samples"), py::arg("p_err"));
    m.def("chebyshev_sample_bound", &chebyshev_sample_bound, py::arg("var_h"),
          py::arg("delta_e"), py::arg("p_f"));

    py::class_<GraphVarianceBound>(m, "GraphVarianceBound")
        .def_readonly("admissible", &GraphVarianceBound::admissible)
        .def_readonly("var_exponent", &GraphVarianceBound::var_exponent)
        .def_readonly("prob_exponent", &GraphVarianceBound::prob_exponent)
        .def_readonly("bound", &GraphVarianceBound::bound);
    m.def("random_graph_variance_bound", &random_graph_variance_bound, py::arg("n"),
          py::arg("k"), py::arg("p_layers"), py::arg("f_h"), py::arg("w"));

    py::class_<MitigationReport>(m, "MitigationReport")
        .def_readonly("samples", &MitigationReport::samples)
        .def_readonly("p_err", &MitigationReport::p_err)
        .def_readonly("statistical_eps", &MitigationReport::statistical_eps)
        .def_readonly("combined_bound", &MitigationReport::combined_bound)
        .def_readonly("raw_energy", &MitigationReport::raw_energy)
        .def_readonly("mitigated_energy", &MitigationReport::mitigated_energy)
        .def("to_json", [](const MitigationReport& r) { return r.to_json().dump(1); });

    m.def("mitigate_energy", &mitigate_energy, py::arg("hamiltonian"), py::arg("counts"),
          py::arg("model"), py::arg("p_err") = 0.05, py::arg("raw_quasi") = false,
          py::call_guard<py::gil_scoped_release>());

    // hamiltonians
    py::class_<HamiltonianTerm>(m, "HamiltonianTerm")
        .def(py::init([](Subset support, std::vector<double> diagonal, std::string label) {
                 return HamiltonianTerm{std::move(support), std::move(diagonal), std::move(label)};
             }),
             py::arg("support"), py::arg("diagonal"), py::arg("label") = "")
        .def_readonly("support", &HamiltonianTerm::support)
        .def_readonly("diagonal", &HamiltonianTerm::diagonal)
        .def_readonly("label", &HamiltonianTerm::label)
        .def("norm", &HamiltonianTerm::norm);

    py::class_<DiagonalHamiltonian>(m, "DiagonalHamiltonian")
        .def(py::init([](int n, std::vector<HamiltonianTerm> terms, std::string label) {
                 DiagonalHamiltonian h{n, std::move(terms), std::move(label)};
                 h.validate();
                 return h;
             }),
             py::arg("n_qubits"), py::arg("terms"), py::arg("label") = "")
        .def_readonly("n_qubits", &DiagonalHamiltonian::n_qubits)
        .def_readonly("terms", &DiagonalHamiltonian::terms)
        .def_readonly("label", &DiagonalHamiltonian::label)
        .def("energy_of",
             py::overload_cast<const std::string&>(&DiagonalHamiltonian::energy_of, py::const_))
        .def("energy_table", &DiagonalHamiltonian::energy_table)
        .def("to_json", [](const DiagonalHamiltonian& h) { return h.to_json().dump(1); })
        .def_static("from_json", [](const std::string& text) {
            return DiagonalHamiltonian::from_json(parse_json(text));
        });

    m.def("ground_state", &ground_state, py::arg("hamiltonian"));
    m.def("random_max2sat", &random_max2sat, py::arg("n"), py::arg("clause_density"),
          py::arg("seed"));
    m.def("max2sat_satisfied_from_energy", &max2sat_satisfied_from_energy,
          py::arg("hamiltonian"), py::arg("energy"));
    m.def("random_fully_connected", &random_fully_connected, py::arg("n"), py::arg("seed"));
    m.def("sk_lattice", &sk_lattice, py::arg("rows"), py::arg("cols"), py::arg("seed"));
    m.def("sk_2d", &sk_2d, py::arg("side"), py::arg("seed"));

    // simulation
    py::class_<Statevector>(m, "Statevector")
        .def(py::init<ComplexVector>(), py::arg("amplitudes"))
        .def_static("plus_state", &Statevector::plus_state, py::arg("n"))
        .def_static("haar_random",
                    [](int n, std::uint64_t seed) {
                        Rng rng(seed);
                        return Statevector::haar_random(n, rng);
                    },
                    py::arg("n"), py::arg("seed"))
        .def_property_readonly("n_qubits", &Statevector::n_qubits)
        .def_property_readonly("amplitudes", &Statevector::amps)
        .def("probabilities", &Statevector::probabilities);

    m.def("qaoa_state",
          [](const DiagonalHamiltonian& h, const std::vector<std::pair<double, double>>& layers) {
              return qaoa_state(h, to_layers(layers));
          },
          py::arg("hamiltonian"), py::arg("layers"),
          "layers: list of (beta, alpha) pairs");
    m.def("sample_measurements",
          [](const Statevector& psi, std::size_t shots, const NoiseModel* noise,
             std::uint64_t seed) {
              Rng rng(seed);
              return sample_measurements(psi, shots, noise, rng);
          },
          py::arg("state"), py::arg("shots"), py::arg("noise") = nullptr, py::arg("seed") = 1,
          py::call_guard<py::gil_scoped_release>());
    m.def("covariance", &covariance, py::arg("hamiltonian"), py::arg("state"), py::arg("term_a"),
          py::arg("term_b"));
    m.def("hamiltonian_variance", &hamiltonian_variance, py::arg("hamiltonian"),
          py::arg("state"));

    py::class_<SpsaConfig>(m, "SpsaConfig")
        .def(py::init<>())
        .def_readwrite("alpha", &SpsaConfig::alpha)
        .def_readwrite("gamma", &SpsaConfig::gamma)
        .def_readwrite("big_a", &SpsaConfig::big_a)
        .def_readwrite("a", &SpsaConfig::a)
        .def_readwrite("c", &SpsaConfig::c);

    // pipeline
    py::class_<BenchmarkConfig>(m, "BenchmarkConfig")
        .def(py::init<>())
        .def_readwrite("instances", &BenchmarkConfig::instances)
        .def_readwrite("family", &BenchmarkConfig::family)
        .def_readwrite("clause_density", &BenchmarkConfig::clause_density)
        .def_readwrite("shots", &BenchmarkConfig::shots)
        .def_readwrite("p_err", &BenchmarkConfig::p_err)
        .def_readwrite("seed", &BenchmarkConfig::seed)
        .def_readwrite("threads", &BenchmarkConfig::threads);

    py::class_<BenchmarkRow>(m, "BenchmarkRow")
        .def_readonly("instance_id", &BenchmarkRow::instance_id)
        .def_readonly("true_energy", &BenchmarkRow::true_energy)
        .def_readonly("raw_estimate", &BenchmarkRow::raw_estimate)
        .def_readonly("mitigated_estimate", &BenchmarkRow::mitigated_estimate)
        .def_readonly("bound", &BenchmarkRow::bound);

    m.def("run_benchmark", &run_benchmark, py::arg("model"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("benchmark_csv", &benchmark_csv, py::arg("rows"));

    py::class_<QaoaConfig>(m, "QaoaConfig")
        .def(py::init<>())
        .def_readwrite("layers", &QaoaConfig::layers)
        .def_readwrite("stage_layers", &QaoaConfig::stage_layers)
        .def_readwrite("evaluations_per_stage", &QaoaConfig::evaluations_per_stage)
        .def_readwrite("restarts", &QaoaConfig::restarts)
        .def_readwrite("shots", &QaoaConfig::shots)
        .def_readwrite("p_err", &QaoaConfig::p_err)
        .def_readwrite("spsa", &QaoaConfig::spsa);

    py::class_<QaoaOutcome>(m, "QaoaOutcome")
        .def_readonly("angles", &QaoaOutcome::angles)
        .def_readonly("estimate", &QaoaOutcome::estimate)
        .def_readonly("exact", &QaoaOutcome::exact)
        .def_readonly("trace", &QaoaOutcome::trace);

    m.def("run_qaoa",
          [](const DiagonalHamiltonian& h, const NoiseModel* noise, bool mitigate,
             const QaoaConfig& cfg, std::uint64_t seed) {
              return run_qaoa(h, noise, mitigate, cfg, seed);
          },
          py::arg("hamiltonian"), py::arg("noise") = nullptr, py::arg("mitigate") = false,
          py::arg("config") = QaoaConfig{}, py::arg("seed") = 1,
          py::call_guard<py::gil_scoped_release>());

    // probability utilities
    m.def("tvd", py::overload_cast<const Vector&, const Vector&>(&tvd), py::arg("p"),
          py::arg("q"));
    m.def("project_to_simplex",
          [](const Vector& v) { return project_to_simplex(v).vec(); }, py::arg("v"));
    m.def("marginalize",
          py::overload_cast<const Vector&, const Subset&, const Subset&>(&marginalize),
          py::arg("p"), py::arg("from_subset"), py::arg("keep"));
    m.def("thread_budget", &thread_budget, py::arg("requested") = 0);
}
