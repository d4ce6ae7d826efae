#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qrem/characterize.hpp"
#include "qrem/io.hpp"
#include "qrem/mitigate.hpp"
#include "qrem/pipeline.hpp"

using namespace qrem;

namespace {

void emit(const nlohmann::json& j) { std::cout << j.dump() << "\n"; }

void warn(const std::string& message) { std::cerr << "warning: " << message << "\n"; }

// collection files come in two shapes: the plain-text header format and
// the JSON export; sniff the first meaningful byte
std::pair<DdotCollection, int> load_collection_any(const std::string& path) {
    const std::string text = read_text(path);
    const std::size_t at = text.find_first_not_of(" \t\r\n");
    if (at != std::string::npos && text[at] == '{') {
        const nlohmann::json j = nlohmann::json::parse(text);
        DdotCollection c;
        c.n_qubits = j.at("n_qubits").get<int>();
        c.circuits = j.at("circuits").get<std::vector<std::string>>();
        c.validate();
        return {c, j.at("k").get<int>()};
    }
    return load_collection(path);
}

std::map<std::string, std::uint64_t> load_counts(const std::string& path, int expect_n) {
    const nlohmann::json j = read_json(path);
    const std::string schema = j.value("schema", "");
    if (schema == "qrem-counts-1") {
        if (j.at("n_qubits").get<int>() != expect_n)
            throw ValidationError("counts file register size does not match the model");
        std::map<std::string, std::uint64_t> counts;
        for (const auto& [bits, c] : j.at("counts").items())
            counts[bits] = c.get<std::uint64_t>();
        return counts;
    }
    if (schema == "qrem-dataset-1" || j.contains("results")) {
        const MeasurementDataset ds = MeasurementDataset::from_json(j);
        if (ds.n_qubits != expect_n)
            throw ValidationError("dataset register size does not match the model");
        if (ds.results.size() != 1)
            throw ValidationError(
                "dataset has " + std::to_string(ds.results.size()) +
                " prepared inputs; mitigation expects counts from a single circuit");
        return ds.results.begin()->second;
    }
    throw ValidationError("unrecognized counts file: expected qrem-counts-1 or qrem-dataset-1");
}

nlohmann::json perfection_summary(const PerfectionReport& report, std::size_t limit = 32) {
    nlohmann::json missing = nlohmann::json::array();
    for (std::size_t i = 0; i < report.missing.size() && i < limit; ++i) {
        const auto& [subset, state] = report.missing[i];
        missing.push_back({{"subset", subset},
                           {"state", bits_of(state, static_cast<int>(subset.size()))}});
    }
    return {{"perfect", report.perfect},
            {"missing_count", report.missing.size()},
            {"missing", std::move(missing)}};
}

std::string heatmap_csv(const CorrelationTable& table) {
    std::ostringstream out;
    const int n = table.n_qubits();
    out << "qubit";
    for (int j = 0; j < n; ++j) out << ",q" << j;
    out << "\n";
    char cell[32];
    for (int i = 0; i < n; ++i) {
        out << "q" << i; // row i collects the influence *on* qubit i
        for (int j = 0; j < n; ++j) {
            std::snprintf(cell, sizeof cell, ",%.6g", table.c(i, j));
            out << cell;
        }
        out << "\n";
    }
    return out.str();
}

// smallest shot total backing any single-qubit prepared-state context;
// correlation entries cannot resolve effects below its sampling noise
std::uint64_t weakest_context_shots(const MeasurementDataset& ds) {
    std::uint64_t weakest = UINT64_MAX;
    for (int q = 0; q < ds.n_qubits; ++q)
        for (char y : {'0', '1'}) {
            std::uint64_t total = 0;
            for (const auto& [input, outcomes] : ds.results)
                if (input[static_cast<std::size_t>(q)] == y)
                    total += ds.input_total(input);
            weakest = std::min(weakest, total);
        }
    return weakest == UINT64_MAX ? 0 : weakest;
}

struct DdotGenerateOpts {
    int n = 0, k = 2;
    std::size_t s = 0;
    double delta = 0.0;
    std::uint64_t seed = 1;
    std::string method = "random";
    bool perfect = false;
    bool json = false;
    std::string out;
};

int cmd_ddot_generate(const DdotGenerateOpts& o) {
    if ((o.s == 0) == (o.delta == 0.0))
        throw ValidationError("ddot generate: pass exactly one of --s and --delta");
    const BoundMethod method =
        o.method == "hash" ? BoundMethod::hash : BoundMethod::random;
    std::size_t target = o.s;
    if (o.delta > 0.0)
        target = static_cast<std::size_t>(std::ceil(circuits_bound(o.n, o.k, o.delta, method)));
    target = std::max<std::size_t>(target, 2);

    DdotCollection c;
    if (method == BoundMethod::hash) {
        const std::size_t batch = (std::size_t{1} << o.k) - 2;
        const std::size_t hashes = std::max<std::size_t>(1, (target - 2 + batch - 1) / batch);
        c = generate_hash_circuits(o.n, o.k, hashes, o.seed, o.perfect);
    } else {
        c = generate_random_circuits(o.n, o.k, target - 2, o.seed, o.perfect);
    }
    const PerfectionReport report = is_perfect(c, o.k);
    if (o.json)
        save_collection_json(o.out, c, o.k);
    else
        save_collection(o.out, c, o.k);

    nlohmann::json summary = {{"schema", "qrem-ddot-run-1"},
                              {"n_qubits", o.n},
                              {"k", o.k},
                              {"n_circuits", c.circuits.size()},
                              {"target", target},
                              {"out", o.out}};
    summary.update(perfection_summary(report));
    emit(summary);
    // perfection was asked for (statistically or outright) but missed
    if ((o.delta > 0.0 || o.perfect) && !report.perfect) return 1;
    return 0;
}

struct DdotFileOpts {
    std::string in;
    int k = 0; // 0: take the file's header value
    std::size_t rounds = 64;
    std::uint64_t seed = 1;
    bool json = false;
    std::string out;
};

int cmd_ddot_check(const DdotFileOpts& o) {
    const auto [c, file_k] = load_collection_any(o.in);
    const int k = o.k > 0 ? o.k : file_k;
    const PerfectionReport report = is_perfect(c, k);
    const BalanceReport balance = balance_report(c, k);
    nlohmann::json summary = {{"schema", "qrem-balance-1"},
                              {"n_qubits", c.n_qubits},
                              {"k", k},
                              {"n_circuits", balance.n_circuits},
                              {"missing_cells", balance.missing_cells},
                              {"max_tvd_from_uniform", balance.max_tvd_from_uniform},
                              {"appearance_std", balance.appearance_std}};
    summary.update(perfection_summary(report));
    emit(summary);
    return report.perfect ? 0 : 1;
}

int cmd_ddot_balance(const DdotFileOpts& o) {
    const auto [c, file_k] = load_collection_any(o.in);
    const int k = o.k > 0 ? o.k : file_k;
    const BalanceReport before = balance_report(c, k);
    const DdotCollection balanced = heuristic_balance(c, k, o.rounds, o.seed);
    const BalanceReport after = balance_report(balanced, k);
    if (o.json)
        save_collection_json(o.out, balanced, k);
    else
        save_collection(o.out, balanced, k);
    emit({{"schema", "qrem-balance-run-1"},
          {"k", k},
          {"rounds", o.rounds},
          {"n_circuits", after.n_circuits},
          {"missing_cells_before", before.missing_cells},
          {"missing_cells_after", after.missing_cells},
          {"max_tvd_before", before.max_tvd_from_uniform},
          {"max_tvd_after", after.max_tvd_from_uniform},
          {"out", o.out}});
    return 0;
}

struct CharacterizeOpts {
    std::string data;
    double delta_cluster = 0.04;
    double delta_neighbor = 0.01;
    int max_joint = 4;
    bool no_reweight = false;
    std::string out;
    std::string heatmap;
};

int cmd_characterize(const CharacterizeOpts& o) {
    if (o.delta_cluster < 0.0 || o.delta_cluster > 1.0 || o.delta_neighbor < 0.0 ||
        o.delta_neighbor > 1.0)
        throw ValidationError("characterize: thresholds must lie in [0, 1]");
    if (o.delta_neighbor > o.delta_cluster)
        throw ValidationError("characterize: neighbor threshold must not exceed cluster threshold");
    const MeasurementDataset ds = MeasurementDataset::from_json(read_json(o.data));

    const CorrelationTable table = correlation_coefficients(ds, !o.no_reweight);
    if (!o.heatmap.empty()) atomic_write_text(o.heatmap, heatmap_csv(table));

    const std::uint64_t weakest = weakest_context_shots(ds);
    std::vector<std::string> warnings;
    if (weakest > 0) {
        // two-sided Hoeffding resolution of a single readout rate, and
        // coefficients subtract two such estimates
        const double floor = std::sqrt(std::log(2.0 / 0.05) / (2.0 * static_cast<double>(weakest)));
        if (o.delta_neighbor < 2.0 * floor) {
            std::ostringstream msg;
            msg << "neighbor threshold " << o.delta_neighbor
                << " is below the statistical resolution " << 2.0 * floor
                << " of this dataset (weakest prepared-state context has " << weakest
                << " shots); inferred neighbor links may be sampling noise";
            warnings.push_back(msg.str());
        }
    }

    StructureInference inferred =
        infer_structure(table, o.delta_cluster, o.delta_neighbor, o.max_joint);
    warnings.insert(warnings.end(), inferred.warnings.begin(), inferred.warnings.end());
    const NoiseModel model = fit_noise_model(ds, inferred.structure);
    atomic_write_json(o.out, model.to_json());
    for (const std::string& w : warnings) warn(w);

    emit({{"schema", "qrem-characterize-run-1"},
          {"n_qubits", model.n_qubits()},
          {"clusters", inferred.structure.clusters},
          {"neighborhoods", inferred.structure.neighborhoods},
          {"storage_cells", model.storage_cells()},
          {"warnings", warnings.size()},
          {"out", o.out},
          {"heatmap", o.heatmap}});
    return 0;
}

struct MitigateOpts {
    std::string hamiltonian;
    std::string model;
    std::string counts;
    double p_err = 0.05;
    bool raw_quasi = false;
    std::string out;
};

int cmd_mitigate(const MitigateOpts& o) {
    const DiagonalHamiltonian h = DiagonalHamiltonian::from_json(read_json(o.hamiltonian));
    const NoiseModel model = NoiseModel::from_json(read_json(o.model));
    const auto counts = load_counts(o.counts, model.n_qubits());
    const MitigationReport report = mitigate_energy(h, counts, model, o.p_err, o.raw_quasi);
    atomic_write_json(o.out, report.to_json());
    emit({{"schema", "qrem-mitigation-run-1"},
          {"raw_energy", report.raw_energy},
          {"mitigated_energy", report.mitigated_energy},
          {"combined_bound", report.combined_bound},
          {"statistical_eps", report.statistical_eps},
          {"samples", report.samples},
          {"out", o.out}});
    return 0;
}

struct BenchmarkOpts {
    std::string model;
    int n = 0; // 0: skip the consistency check
    BenchmarkConfig cfg;
    std::string out;
};

int cmd_benchmark(const BenchmarkOpts& o) {
    const NoiseModel model = NoiseModel::from_json(read_json(o.model));
    if (o.n > 0 && o.n != model.n_qubits())
        throw ValidationError("benchmark: --n disagrees with the model file");
    const auto rows = run_benchmark(model, o.cfg);
    atomic_write_text(o.out, benchmark_csv(rows));

    double raw_err = 0.0, mit_err = 0.0;
    for (const BenchmarkRow& r : rows) {
        raw_err += std::abs(r.raw_estimate - r.true_energy);
        mit_err += std::abs(r.mitigated_estimate - r.true_energy);
    }
    raw_err /= static_cast<double>(rows.size());
    mit_err /= static_cast<double>(rows.size());
    emit({{"schema", "qrem-benchmark-run-1"},
          {"instances", rows.size()},
          {"family", o.cfg.family},
          {"shots", o.cfg.shots},
          {"mean_raw_error", raw_err},
          {"mean_mitigated_error", mit_err},
          {"ratio", raw_err > 0.0 ? mit_err / raw_err : 0.0},
          {"out", o.out}});
    return 0;
}

struct QaoaOpts {
    std::string hamiltonian; // file path, or empty when --family is used
    std::string family;      // sk2d | max2sat
    int rows = 2, cols = 4;
    int n = 8;
    double density = 4.0;
    std::uint64_t instance_seed = 1;
    std::string layers = "3";
    QaoaConfig cfg;
    std::string model;
    std::vector<std::string> modes;
    std::uint64_t seed = 1;
    std::string out;
};

std::pair<int, int> parse_layer_range(const std::string& text) {
    const std::size_t dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            const int p = std::stoi(text);
            return {p, p};
        }
        return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
    } catch (const std::exception&) {
        throw ValidationError("qaoa: --layers expects P or LO..HI");
    }
}

int cmd_qaoa(const QaoaOpts& o) {
    DiagonalHamiltonian h;
    if (!o.hamiltonian.empty()) {
        h = DiagonalHamiltonian::from_json(read_json(o.hamiltonian));
    } else if (o.family == "sk2d") {
        h = sk_lattice(o.rows, o.cols, o.instance_seed);
    } else if (o.family == "max2sat") {
        h = random_max2sat(o.n, o.density, o.instance_seed);
    } else {
        throw ValidationError("qaoa: pass --hamiltonian FILE or --family sk2d|max2sat");
    }

    std::optional<NoiseModel> noise;
    if (!o.model.empty()) noise.emplace(NoiseModel::from_json(read_json(o.model)));

    std::vector<std::string> modes = o.modes;
    if (modes.empty())
        modes = noise ? std::vector<std::string>{"noiseless", "noisy", "mitigated"}
                      : std::vector<std::string>{"noiseless"};
    for (const std::string& mode : modes) {
        if (mode != "noiseless" && mode != "noisy" && mode != "mitigated")
            throw ValidationError("qaoa: unknown mode '" + mode + "'");
        if (mode != "noiseless" && !noise)
            throw ValidationError("qaoa: mode '" + mode + "' needs --model");
    }

    const auto [lo, hi] = parse_layer_range(o.layers);
    if (lo < 1 || hi < lo || hi > 60)
        throw ValidationError("qaoa: layer range must satisfy 1 <= LO <= HI <= 60");

    std::string csv = "layers,mode,estimate,exact\n";
    char line[160];
    for (int p = lo; p <= hi; ++p) {
        QaoaConfig cfg = o.cfg;
        cfg.layers = p;
        // one seed per depth, shared by the modes so their draws pair up
        const std::uint64_t run_seed = derive_seed(o.seed, static_cast<std::uint64_t>(p));
        for (const std::string& mode : modes) {
            const NoiseModel* noise_ptr = mode == "noiseless" ? nullptr : &*noise;
            const QaoaOutcome outcome =
                run_qaoa(h, noise_ptr, mode == "mitigated", cfg, run_seed);
            std::snprintf(line, sizeof line, "%d,%s,%.10g,%.10g\n", p, mode.c_str(),
                          outcome.estimate, outcome.exact);
            csv += line;
        }
    }
    atomic_write_text(o.out, csv);
    emit({{"schema", "qrem-qaoa-run-1"},
          {"layers_lo", lo},
          {"layers_hi", hi},
          {"modes", modes},
          {"out", o.out}});
    return 0;
}

struct SyntheticOpts {
    std::string model;
    std::string collection;
    std::size_t shots = 1000;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_synthetic_dataset(const SyntheticOpts& o) {
    const NoiseModel model = NoiseModel::from_json(read_json(o.model));
    const auto [circuits, k] = load_collection_any(o.collection);
    const MeasurementDataset ds = simulate_ddot(model, circuits, o.shots, o.seed);
    atomic_write_json(o.out, ds.to_json());
    emit({{"schema", "qrem-dataset-run-1"},
          {"n_qubits", ds.n_qubits},
          {"k", k},
          {"circuits", circuits.circuits.size()},
          {"shots_per_circuit", o.shots},
          {"out", o.out}});
    return 0;
}

struct ExampleModelOpts {
    int n = 6;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_example_model(const ExampleModelOpts& o) {
    const NoiseModel model = example_device_model(o.n, o.seed);
    atomic_write_json(o.out, model.to_json());
    emit({{"schema", "qrem-model-run-1"},
          {"n_qubits", model.n_qubits()},
          {"clusters", model.structure().clusters},
          {"out", o.out}});
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"correlated readout-noise characterization and mitigation"};
    app.require_subcommand(1);
    int verdict = 0;

    // ddot generate | check | balance
    auto* ddot = app.add_subcommand("ddot", "preparation-circuit collections");
    ddot->require_subcommand(1);

    DdotGenerateOpts gen;
    auto* ddot_gen = ddot->add_subcommand("generate", "create a circuit collection");
    ddot_gen->add_option("--n", gen.n, "register size")->required();
    ddot_gen->add_option("--k", gen.k, "locality to cover");
    ddot_gen->add_option("--s", gen.s, "total number of circuits");
    ddot_gen->add_option("--delta", gen.delta, "perfection failure probability (sizes the collection)");
    ddot_gen->add_option("--seed", gen.seed, "rng seed");
    ddot_gen->add_option("--method", gen.method, "random|hash")
        ->check(CLI::IsMember({"random", "hash"}));
    ddot_gen->add_flag("--perfect", gen.perfect, "grow until the collection is perfect");
    ddot_gen->add_flag("--json", gen.json, "write the JSON format");
    ddot_gen->add_option("-o,--out", gen.out, "output file")->required();
    ddot_gen->callback([&] { verdict = cmd_ddot_generate(gen); });

    DdotFileOpts chk;
    auto* ddot_chk = ddot->add_subcommand("check", "perfection and balance report");
    ddot_chk->add_option("--in", chk.in, "collection file")->required();
    ddot_chk->add_option("--k", chk.k, "locality (default: file header)");
    ddot_chk->callback([&] { verdict = cmd_ddot_check(chk); });

    DdotFileOpts bal;
    auto* ddot_bal = ddot->add_subcommand("balance", "repair coverage and flatten counts");
    ddot_bal->add_option("--in", bal.in, "collection file")->required();
    ddot_bal->add_option("--k", bal.k, "locality (default: file header)");
    ddot_bal->add_option("--rounds", bal.rounds, "circuits to append");
    ddot_bal->add_option("--seed", bal.seed, "rng seed");
    ddot_bal->add_flag("--json", bal.json, "write the JSON format");
    ddot_bal->add_option("-o,--out", bal.out, "output file")->required();
    ddot_bal->callback([&] { verdict = cmd_ddot_balance(bal); });

    CharacterizeOpts chr;
    auto* characterize = app.add_subcommand("characterize", "fit a noise model from a dataset");
    characterize->add_option("--data", chr.data, "measurement dataset JSON")->required();
    characterize->add_option("--delta-cluster", chr.delta_cluster, "cluster threshold");
    characterize->add_option("--delta-neighbor", chr.delta_neighbor, "neighbor threshold");
    characterize->add_option("--max-joint", chr.max_joint, "cluster+neighborhood size cap");
    characterize->add_flag("--no-reweight", chr.no_reweight,
                           "per-shot statistics instead of per-circuit reweighting");
    characterize->add_option("-o,--out", chr.out, "noise model output")->required();
    characterize->add_option("--heatmap", chr.heatmap, "correlation table CSV (row affected by column)");
    characterize->callback([&] { verdict = cmd_characterize(chr); });

    MitigateOpts mit;
    auto* mitigate = app.add_subcommand("mitigate", "correct an energy estimate from counts");
    mitigate->add_option("--hamiltonian", mit.hamiltonian, "hamiltonian JSON")->required();
    mitigate->add_option("--model", mit.model, "noise model JSON")->required();
    mitigate->add_option("--counts", mit.counts, "counts or single-circuit dataset JSON")->required();
    mitigate->add_option("--p-err", mit.p_err, "bound failure probability");
    mitigate->add_flag("--raw-quasi", mit.raw_quasi, "energies from pre-projection vectors");
    mitigate->add_option("-o,--out", mit.out, "mitigation report output")->required();
    mitigate->callback([&] { verdict = cmd_mitigate(mit); });

    BenchmarkOpts ben;
    auto* benchmark = app.add_subcommand("benchmark", "ground-state energy sweep");
    benchmark->add_option("--model", ben.model, "noise model JSON")->required();
    benchmark->add_option("--n", ben.n, "expected register size (consistency check)");
    benchmark->add_option("--instances", ben.cfg.instances, "number of random instances");
    benchmark->add_option("--family", ben.cfg.family, "max2sat|fully-connected")
        ->check(CLI::IsMember({"max2sat", "fully-connected"}));
    benchmark->add_option("--density", ben.cfg.clause_density, "clauses per variable");
    benchmark->add_option("--shots", ben.cfg.shots, "samples per instance");
    benchmark->add_option("--p-err", ben.cfg.p_err, "bound failure probability");
    benchmark->add_option("--seed", ben.cfg.seed, "rng seed");
    benchmark->add_option("--threads", ben.cfg.threads, "worker cap (0: QREM_THREADS or hardware)");
    benchmark->add_option("-o,--out", ben.out, "CSV output")->required();
    benchmark->callback([&] { verdict = cmd_benchmark(ben); });

    QaoaOpts qa;
    auto* qaoa = app.add_subcommand("qaoa", "optimize angles and trace energies per depth");
    qaoa->add_option("--hamiltonian", qa.hamiltonian, "hamiltonian JSON (overrides --family)");
    qaoa->add_option("--family", qa.family, "sk2d|max2sat instance generator");
    qaoa->add_option("--rows", qa.rows, "sk2d grid rows");
    qaoa->add_option("--cols", qa.cols, "sk2d grid cols");
    qaoa->add_option("--n", qa.n, "max2sat register size");
    qaoa->add_option("--density", qa.density, "max2sat clauses per variable");
    qaoa->add_option("--instance-seed", qa.instance_seed, "instance generator seed");
    qaoa->add_option("--layers", qa.layers, "depth P or range LO..HI");
    qaoa->add_option("--stage-layers", qa.cfg.stage_layers, "layers optimized per stage");
    qaoa->add_option("--evals", qa.cfg.evaluations_per_stage, "objective evaluations per stage");
    qaoa->add_option("--restarts", qa.cfg.restarts, "independent optimizer restarts");
    qaoa->add_option("--shots", qa.cfg.shots, "samples per evaluation");
    qaoa->add_option("--model", qa.model, "noise model JSON for noisy/mitigated modes");
    qaoa->add_option("--modes", qa.modes, "subset of noiseless,noisy,mitigated")->delimiter(',');
    qaoa->add_option("--seed", qa.seed, "rng seed");
    qaoa->add_option("-o,--out", qa.out, "CSV output")->required();
    qaoa->callback([&] { verdict = cmd_qaoa(qa); });

    SyntheticOpts syn;
    auto* synthetic = app.add_subcommand("synthetic-dataset", "simulate a collection through a model");
    synthetic->add_option("--model", syn.model, "noise model JSON")->required();
    synthetic->add_option("--collection", syn.collection, "circuit collection file")->required();
    synthetic->add_option("--shots", syn.shots, "shots per circuit");
    synthetic->add_option("--seed", syn.seed, "rng seed");
    synthetic->add_option("-o,--out", syn.out, "dataset JSON output")->required();
    synthetic->callback([&] { verdict = cmd_synthetic_dataset(syn); });

    ExampleModelOpts exm;
    auto* example = app.add_subcommand("example-model", "write the built-in correlated device model");
    example->add_option("--n", exm.n, "register size (>= 4)");
    example->add_option("--seed", exm.seed, "rate randomization seed");
    example->add_option("-o,--out", exm.out, "noise model JSON output")->required();
    example->callback([&] { verdict = cmd_example_model(exm); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // --help stays success; bad flags are validation
    } catch (const CoverageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SingularModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return verdict;
}
