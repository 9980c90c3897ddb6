#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qonn/runner.hpp"

namespace {

struct CommonOptions {
    int depth = 1;
    double phi_b = 0.0;
    std::string architecture = "nonlinear";
    bool no_corrections = false;
    int runs = 50;
    std::uint64_t seed = 0;
    std::size_t budget = 100000;
    int workers = 0;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--depth", opt.depth, "number of nonlinear layers D_NL");
    cmd->add_option("--phi-b", opt.phi_b, "static NMZI bias phase");
    cmd->add_option("--architecture", opt.architecture, "nonlinear | linear-optics")
        ->check(CLI::IsMember({"nonlinear", "linear-optics"}));
    cmd->add_flag("--no-corrections", opt.no_corrections,
                  "train the variational core without single-qubit corrections");
    cmd->add_option("--runs", opt.runs, "independent optimization runs");
    cmd->add_option("--seed", opt.seed, "master seed");
    cmd->add_option("--budget", opt.budget, "evaluation budget per stage per run");
    cmd->add_option("--workers", opt.workers, "worker threads (0 = QONN_WORKERS env or auto)");
    cmd->add_option("--out", opt.out_dir, "output directory for runs.jsonl/curves");
}

qonn::ExperimentConfig base_config(const CommonOptions& opt, qonn::TaskKind task, int qubits) {
    qonn::ExperimentConfig config;
    config.task = task;
    config.architecture = qonn::architecture_from_string(opt.architecture);
    config.qubits = qubits;
    config.depths = {opt.depth};
    config.phi_b = {opt.phi_b};
    config.corrections = !opt.no_corrections;
    config.optimizer.runs = opt.runs;
    config.optimizer.seed = opt.seed;
    config.optimizer.budget = opt.budget;
    config.optimizer.workers = opt.workers;
    config.output_dir = opt.out_dir;
    return config;
}

int report_sweep(const qonn::SweepResult& result) {
    bool failed = false;
    for (const auto& cell : result.cells) {
        if (cell.failed) {
            failed = true;
            std::cout << "cell depth=" << cell.depth << " phi_b=" << cell.phi_b
                      << " target=" << cell.target << " FAILED: " << cell.error << "\n";
            continue;
        }
        std::cout << "depth=" << cell.depth << " phi_b=" << cell.phi_b
                  << " target=" << cell.target << " P=" << cell.params;
        if (cell.d_lo > 0) std::cout << " D_LO=" << cell.d_lo;
        std::printf(" best_cost=%.12e runs=%zu\n", cell.best_cost, cell.records.size());
    }
    if (!result.config.output_dir.empty()) {
        qonn::emit_curves(result, "csv", result.config.output_dir);
        qonn::emit_curves(result, "json", result.config.output_dir);
    }
    return failed ? 1 : 0;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and training of quantum optical neural networks built from "
                 "programmable Kerr-like nonlinearities"};
    app.require_subcommand(1);

    // prepare
    CommonOptions prep_opt;
    double alpha = M_PI / 4;
    std::optional<std::uint64_t> haar_seed;
    std::string target_file;
    int prep_qubits = 3;
    auto* prepare = app.add_subcommand("prepare", "train state preparation");
    prepare->add_option("--qubits", prep_qubits, "qubit count N (M = 2N modes)");
    prepare->add_option("--alpha", alpha, "GHZ-family entanglement angle in [0, pi/4]");
    auto* hopt = prepare->add_option("--haar-seed", haar_seed, "Haar-random target seed");
    prepare->add_option("--target-file", target_file, "amplitude-dump JSON target");
    add_common(prepare, prep_opt);

    // discriminate
    CommonOptions disc_opt;
    int num_states = 4;
    auto* discriminate = app.add_subcommand("discriminate", "train a Bell-state analyzer");
    discriminate->add_option("--states", num_states, "4 or 6 input states")
        ->check(CLI::IsMember({4, 6}));
    add_common(discriminate, disc_opt);

    // vqe
    CommonOptions vqe_opt;
    int spins = 5;
    std::optional<std::uint64_t> model_seed;
    std::string model_file;
    auto* vqe = app.add_subcommand("vqe", "variational ground-state search");
    vqe->add_option("--spins", spins, "spin count of the Heisenberg model");
    vqe->add_option("--sample-seed", model_seed, "sample the 5-spin lattice fragment");
    vqe->add_option("--model", model_file, "Heisenberg model JSON file");
    add_common(vqe, vqe_opt);

    // sweep
    std::string sweep_config_path, sweep_out;
    auto* sweep = app.add_subcommand("sweep", "run a full (depth, phi_b, target) grid");
    sweep->add_option("--config", sweep_config_path, "experiment config JSON")->required();
    sweep->add_option("--out", sweep_out, "override the config's output directory");

    // verify
    std::string table = "III", results_dir;
    bool arithmetic_only = false;
    auto* verify = app.add_subcommand("verify", "check a summary table against formulas/results");
    verify->add_option("--table", table, "I, II, III or IV")
        ->check(CLI::IsMember({"I", "II", "III", "IV"}));
    verify->add_option("--results", results_dir, "sweep directory holding sweep.json");
    verify->add_flag("--arithmetic-only", arithmetic_only, "skip trained-depth comparison");

    // dump-amplitudes
    std::string bits, dump_out, in_file;
    int dump_qubits = 0;
    std::optional<double> dump_alpha;
    std::optional<std::uint64_t> dump_haar;
    auto* dump = app.add_subcommand("dump-amplitudes", "write a state as an amplitude dump");
    dump->add_option("--qubits", dump_qubits, "qubit count");
    dump->add_option("--bits", bits, "computational basis string, e.g. 010");
    dump->add_option("--ghz-alpha", dump_alpha, "GHZ-family target angle");
    dump->add_option("--haar-seed", dump_haar, "Haar-random target seed");
    dump->add_option("--in-file", in_file, "re-dump an existing amplitude file");
    dump->add_option("--out", dump_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (prepare->parsed()) {
            auto config = base_config(prep_opt, qonn::TaskKind::prepare, prep_qubits);
            if (!target_file.empty())
                config.targets.push_back(
                    qonn::TargetSpec::from_file(qonn::TaskKind::prepare, target_file));
            else if (haar_seed)
                config.targets.push_back(qonn::TargetSpec::haar(*haar_seed));
            else
                config.targets.push_back(qonn::TargetSpec::ghz(alpha));
            (void)hopt;
            return report_sweep(qonn::run_sweep(config));
        }
        if (discriminate->parsed()) {
            auto config = base_config(disc_opt, qonn::TaskKind::discriminate, 2);
            config.targets.push_back(qonn::TargetSpec::bell(num_states));
            return report_sweep(qonn::run_sweep(config));
        }
        if (vqe->parsed()) {
            auto config = base_config(vqe_opt, qonn::TaskKind::vqe, spins);
            if (!model_file.empty())
                config.targets.push_back(
                    qonn::TargetSpec::from_file(qonn::TaskKind::vqe, model_file));
            else
                config.targets.push_back(qonn::TargetSpec::hamiltonian(model_seed.value_or(0)));
            return report_sweep(qonn::run_sweep(config));
        }
        if (sweep->parsed()) {
            auto config = qonn::config_from_json(load_json(sweep_config_path));
            if (!sweep_out.empty()) config.output_dir = sweep_out;
            return report_sweep(qonn::run_sweep(config));
        }
        if (verify->parsed()) {
            std::optional<qonn::SweepResult> result;
            if (!arithmetic_only && !results_dir.empty()) {
                result = qonn::sweep_from_json(
                    load_json((std::filesystem::path(results_dir) / "sweep.json").string()));
            }
            const auto outcome = qonn::verify_table(table, result ? &*result : nullptr);
            std::cout << outcome.report;
            return outcome.arithmetic_ok && outcome.trained_ok ? 0 : 1;
        }
        if (dump->parsed()) {
            std::optional<qonn::StateVector> state;
            if (!in_file.empty()) {
                const auto j = load_json(in_file);
                int modes = 0;
                for (const auto& entry : j) {
                    modes = static_cast<int>(entry.at("occupation").size());
                    break;
                }
                int photons = 0;
                for (int v : j.at(0).at("occupation").get<std::vector<int>>()) photons += v;
                state = qonn::state_from_dump(j, qonn::FockBasis::create(modes, photons));
            } else if (!bits.empty()) {
                state = qonn::encode_dualrail(
                    bits, qonn::FockBasis::create(2 * static_cast<int>(bits.size()),
                                                  static_cast<int>(bits.size())));
            } else if (dump_alpha) {
                state = qonn::target_ghz(dump_qubits, *dump_alpha);
            } else if (dump_haar) {
                state = qonn::target_haar_random(dump_qubits, *dump_haar);
            } else {
                std::cerr << "dump-amplitudes: pass --bits, --ghz-alpha, --haar-seed or --in-file\n";
                return 2;
            }
            const auto j = qonn::amplitude_dump(*state);
            if (dump_out.empty()) {
                std::cout << j.dump(2) << "\n";
            } else {
                std::ofstream out(dump_out);
                out << j.dump(2) << "\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
