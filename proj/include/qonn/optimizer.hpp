#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace qonn {

/// Box-constrained derivative-free minimization problem. The objective must
/// be deterministic and safe to call from several threads at once.
struct BoundedProblem {
    std::vector<double> lower;
    std::vector<double> upper;
    std::function<double(std::span<const double>)> objective;
    std::size_t budget = 100000;  // evaluations per stage per run

    // Coordinates that implement single-qubit corrections, and the values
    // that pin them to identity; empty when the problem has none.
    std::vector<int> correction_coords;
    std::vector<double> correction_values;

    int dimension() const { return static_cast<int>(lower.size()); }
};

struct TracePoint {
    std::uint64_t evaluations = 0;
    double cost = 0.0;
};

struct TrainRecord {
    std::uint64_t seed = 0;
    std::uint32_t run_index = 0;
    std::vector<double> best_params;
    double best_cost = 0.0;
    std::uint64_t evaluations = 0;
    std::uint64_t stage1_evaluations = 0;
    std::uint64_t stage2_evaluations = 0;
    std::uint64_t stage1_iterations = 0;
    std::uint64_t stage2_iterations = 0;
    bool budget_exhausted = false;
    bool refine_failed = false;
    std::vector<TracePoint> trace;  // best-so-far cost per accepted improvement
};

void to_json(nlohmann::json& j, const TrainRecord& record);

struct OptimizerConfig {
    int runs = 50;
    std::size_t budget = 100000;  // per stage per run
    double tol_global = 1e-4;
    double tol_local = 1e-14;
    std::uint64_t seed = 0;
    int workers = 0;  // 0: QONN_WORKERS env or hardware concurrency
};

void to_json(nlohmann::json& j, const OptimizerConfig& config);
OptimizerConfig optimizer_config_from_json(const nlohmann::json& j);

/// Controlled random search (CRS2 with local mutation) over the bound box.
/// Starts from a random population of size 10(P+1) and stops when an accepted
/// improvement of the population best falls below tol_global, or on budget.
TrainRecord crs_global(const BoundedProblem& problem, std::uint64_t seed,
                       double tol_global = 1e-4);

/// Bound-clipped local refinement: per-coordinate quadratic fits from the
/// 2P+1 sample pattern give gradient and curvature, a BFGS-accumulated
/// quadratic surrogate picks the step, every evaluation stays inside the box.
/// Stops when the cost change over an iteration drops below tol_local.
TrainRecord local_refine(const BoundedProblem& problem, std::span<const double> start,
                         std::uint64_t seed, double tol_local = 1e-14);

struct TrainResult {
    std::vector<TrainRecord> records;
    int best_index = 0;

    const TrainRecord& best() const { return records[best_index]; }
};

/// Multi-start pipeline: per run, crs_global then local_refine, independent
/// per-run RNG streams derived from (seed, run index); runs execute on a
/// worker pool. The best record is the lowest cost, ties broken by the lowest
/// per-run seed.
TrainResult train(const BoundedProblem& problem, const OptimizerConfig& config);

/// Reduced problem with the correction coordinates clamped to their identity
/// values; the objective re-expands to the full vector internally.
BoundedProblem freeze_corrections(const BoundedProblem& problem);

int resolve_workers(int requested);

}  // namespace qonn
