#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qonn/optimizer.hpp"
#include "qonn/tasks.hpp"

namespace qonn {

inline constexpr const char* kVersion = "0.1.0";

enum class TaskKind { prepare, discriminate, vqe };

std::string to_string(TaskKind task);
std::string to_string(Architecture arch);
TaskKind task_from_string(const std::string& s);
Architecture architecture_from_string(const std::string& s);

/// One point on the sweep's target axis. Exactly one source is set:
/// alpha (GHZ family), state seed (Haar), Hamiltonian seed, a file, or the
/// discrimination set size.
struct TargetSpec {
    std::string label;
    std::optional<double> alpha;
    std::optional<std::uint64_t> state_seed;
    std::optional<std::uint64_t> hamiltonian_seed;
    std::optional<std::string> file;
    std::optional<int> bell_states;

    static TargetSpec ghz(double alpha);
    static TargetSpec haar(std::uint64_t seed);
    static TargetSpec hamiltonian(std::uint64_t seed);
    static TargetSpec bell(int count);
    static TargetSpec from_file(TaskKind task, std::string path);
};

struct ExperimentConfig {
    TaskKind task = TaskKind::prepare;
    Architecture architecture = Architecture::nonlinear;
    int qubits = 3;
    std::vector<int> depths;
    std::vector<double> phi_b = {0.0};
    std::vector<TargetSpec> targets;
    bool corrections = true;
    OptimizerConfig optimizer;
    std::string output_dir;
};

void to_json(nlohmann::json& j, const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Trainable problem for one sweep cell, plus the paper-facing counts.
struct BuiltProblem {
    BoundedProblem problem;
    int params = 0;     // P_NL or P_LO (corrections excluded, as in the tables)
    int d_lo = 0;       // (M+1)(D_NL+1) for the linear-optics baseline, else 0
    int dimension = 0;  // Fock-space dimension
};

BuiltProblem build_problem(const ExperimentConfig& config, int depth, double phi_b,
                           const TargetSpec& target);

struct SweepCell {
    int depth = 0;
    double phi_b = 0.0;
    std::string target;
    std::uint64_t cell_seed = 0;
    int params = 0;
    int d_lo = 0;
    int dimension = 0;
    double best_cost = 0.0;
    std::vector<TrainRecord> records;
    bool failed = false;
    std::string error;
};

void to_json(nlohmann::json& j, const SweepCell& cell);

struct SweepResult {
    ExperimentConfig config;
    std::vector<SweepCell> cells;
};

void to_json(nlohmann::json& j, const SweepResult& result);
SweepResult sweep_from_json(const nlohmann::json& j);
bool sweep_equal(const SweepResult& a, const SweepResult& b);

/// Runs every (depth, phi_b, target) cell with multi-start training.
/// Deterministic under the config's master seed; per-cell failures are
/// recorded and the sweep continues. When the config names an output
/// directory, finished cells are persisted there and a re-run resumes from
/// them.
SweepResult run_sweep(const ExperimentConfig& config);

/// Writes curves.csv (header depth,phi_b,target,best_cost,params,runs) or
/// sweep.json plus params.json with the best trained parameters per cell.
std::vector<std::filesystem::path> emit_curves(const SweepResult& result,
                                               const std::string& format,
                                               const std::filesystem::path& dir);

struct VerifyOutcome {
    std::string report;
    bool arithmetic_ok = true;
    bool trained_ok = true;  // rows without matching sweep data do not fail this
};

/// Checks one of the paper's summary tables ("I".."IV"): the P and D_LO
/// columns against count_params/lo_depth (exact), and, when a sweep result is
/// supplied, the minimal depth reaching the success threshold.
VerifyOutcome verify_table(const std::string& table, const SweepResult* result);

}  // namespace qonn
