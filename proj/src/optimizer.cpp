#include "qonn/optimizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "qonn/rng.hpp"

namespace qonn {

namespace {

void check_problem(const BoundedProblem& problem) {
    if (problem.lower.size() != problem.upper.size() || problem.lower.empty())
        throw std::invalid_argument("BoundedProblem: inconsistent bounds");
    for (std::size_t i = 0; i < problem.lower.size(); ++i) {
        if (!(problem.lower[i] < problem.upper[i]) || !std::isfinite(problem.lower[i]) ||
            !std::isfinite(problem.upper[i]))
            throw std::invalid_argument("BoundedProblem: bounds must be finite with lower < upper");
    }
    if (!problem.objective) throw std::invalid_argument("BoundedProblem: missing objective");
}

double clip(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

// Counts evaluations and records best-so-far improvements.
struct Tracker {
    const BoundedProblem& problem;
    TrainRecord& record;
    double best = std::numeric_limits<double>::infinity();

    double eval(std::span<const double> x) {
        const double f = problem.objective(x);
        ++record.evaluations;
        if (f < best) {
            best = f;
            record.trace.push_back({record.evaluations, f});
        }
        return f;
    }
    bool budget_left() const { return record.evaluations < budget_limit; }
    std::uint64_t budget_limit = 0;
};

}  // namespace

TrainRecord crs_global(const BoundedProblem& problem, std::uint64_t seed, double tol_global) {
    check_problem(problem);
    const int dim = problem.dimension();
    TrainRecord record;
    record.seed = seed;
    Tracker tracker{problem, record};
    tracker.budget_limit = problem.budget;
    Rng rng(seed);

    // the initial population is always evaluated in full, even when it
    // overshoots a small budget
    const int pop_size = 10 * (dim + 1);
    std::vector<std::vector<double>> points(pop_size, std::vector<double>(dim));
    std::vector<double> costs(pop_size);
    for (int p = 0; p < pop_size; ++p) {
        for (int i = 0; i < dim; ++i)
            points[p][i] = rng.uniform(problem.lower[i], problem.upper[i]);
        costs[p] = tracker.eval(points[p]);
    }

    const auto extremes = [&](int& best, int& worst) {
        best = worst = 0;
        for (int p = 1; p < pop_size; ++p) {
            if (costs[p] < costs[best]) best = p;
            if (costs[p] > costs[worst]) worst = p;
        }
    };

    std::vector<double> trial(dim), mutant(dim), centroid(dim);
    std::vector<int> picks(dim);
    int best_idx = 0, worst_idx = 0;
    extremes(best_idx, worst_idx);
    double last_best = costs[best_idx];

    while (tracker.budget_left()) {
        ++record.stage1_iterations;
        // simplex: best point plus dim random distinct others; reflect the
        // last pick through the centroid of the rest
        for (int k = 0; k < dim; ++k) {
            bool fresh;
            int candidate;
            do {
                candidate = static_cast<int>(rng.below(pop_size));
                fresh = candidate != best_idx;
                for (int j = 0; fresh && j < k; ++j) fresh = picks[j] != candidate;
            } while (!fresh);
            picks[k] = candidate;
        }
        for (int i = 0; i < dim; ++i) centroid[i] = points[best_idx][i];
        for (int k = 0; k + 1 < dim; ++k)
            for (int i = 0; i < dim; ++i) centroid[i] += points[picks[k]][i];
        const std::vector<double>& reflected = points[picks[dim - 1]];
        for (int i = 0; i < dim; ++i) {
            centroid[i] /= dim;
            trial[i] = clip(2.0 * centroid[i] - reflected[i], problem.lower[i], problem.upper[i]);
        }

        bool replaced = false;
        const double f_trial = tracker.eval(trial);
        if (f_trial < costs[worst_idx]) {
            points[worst_idx] = trial;
            costs[worst_idx] = f_trial;
            replaced = true;
        } else if (tracker.budget_left()) {
            // local mutation: coordinate-wise random reflection about the best
            for (int i = 0; i < dim; ++i) {
                const double w = rng.uniform();
                mutant[i] = clip((1.0 + w) * points[best_idx][i] - w * trial[i],
                                 problem.lower[i], problem.upper[i]);
            }
            const double f_mut = tracker.eval(mutant);
            if (f_mut < costs[worst_idx]) {
                points[worst_idx] = mutant;
                costs[worst_idx] = f_mut;
                replaced = true;
            }
        }
        if (replaced) {
            extremes(best_idx, worst_idx);
            const double improvement = last_best - costs[best_idx];
            if (improvement > 0.0 && improvement < tol_global) {
                last_best = costs[best_idx];
                break;
            }
            if (improvement > 0.0) last_best = costs[best_idx];
        }
    }
    record.budget_exhausted = !tracker.budget_left();
    record.stage1_evaluations = record.evaluations;
    record.best_params = points[best_idx];
    record.best_cost = costs[best_idx];
    return record;
}

TrainRecord local_refine(const BoundedProblem& problem, std::span<const double> start,
                         std::uint64_t seed, double tol_local) {
    check_problem(problem);
    const int dim = problem.dimension();
    if (static_cast<int>(start.size()) != dim)
        throw std::invalid_argument("local_refine: start dimension mismatch");

    TrainRecord record;
    record.seed = seed;
    Tracker tracker{problem, record};
    tracker.budget_limit = problem.budget;
    Rng rng(mix_seed(seed, 0x10caful));

    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x[i] = clip(start[i], problem.lower[i], problem.upper[i]);
    std::vector<double> probe(dim);
    const auto eval_at = [&](const Eigen::VectorXd& p) {
        for (int i = 0; i < dim; ++i) probe[i] = p[i];
        return tracker.eval(probe);
    };

    double fx = eval_at(x);
    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(dim, dim);
    Eigen::VectorXd grad(dim), prev_grad(dim), prev_x(dim);
    bool have_prev = false;
    double fd_scale = 1e-2;  // fraction of the box width used for the sample pattern
    const double fd_floor = 1e-7;
    int stalls = 0;

    while (tracker.budget_left()) {
        ++record.stage2_iterations;
        const double f_before = fx;

        // per-coordinate quadratic fits: gradient and curvature at x
        Eigen::VectorXd curvature(dim);
        bool degenerate = false;
        for (int i = 0; i < dim && tracker.budget_left(); ++i) {
            const double width = problem.upper[i] - problem.lower[i];
            const double h = std::max(fd_floor, fd_scale * width);
            const double up = std::min(h, problem.upper[i] - x[i]);
            const double down = std::min(h, x[i] - problem.lower[i]);
            Eigen::VectorXd p = x;
            double f_up = fx, f_down = fx;
            if (up > 0.0) {
                p[i] = x[i] + up;
                f_up = eval_at(p);
            }
            if (down > 0.0) {
                p[i] = x[i] - down;
                f_down = eval_at(p);
            }
            if (up > 0.0 && down > 0.0) {
                grad[i] = (f_up - f_down) / (up + down);
                curvature[i] =
                    2.0 * (down * f_up + up * f_down - (up + down) * fx) / (up * down * (up + down));
            } else if (up > 0.0) {
                grad[i] = (f_up - fx) / up;
                curvature[i] = 0.0;
            } else if (down > 0.0) {
                grad[i] = (fx - f_down) / down;
                curvature[i] = 0.0;
            } else {
                degenerate = true;
                grad[i] = 0.0;
                curvature[i] = 0.0;
            }
            if (!std::isfinite(grad[i]) || !std::isfinite(curvature[i])) degenerate = true;
        }
        if (!tracker.budget_left()) break;
        if (degenerate) {
            // restart the surrogate from a shrunk sample radius
            h_inv = Eigen::MatrixXd::Identity(dim, dim);
            have_prev = false;
            fd_scale = std::max(fd_floor, fd_scale * 0.1);
            if (++stalls >= 3) {
                record.refine_failed = true;
                break;
            }
            continue;
        }

        if (have_prev) {
            const Eigen::VectorXd s = x - prev_x;
            const Eigen::VectorXd y = grad - prev_grad;
            const double sy = s.dot(y);
            if (sy > 1e-12 * s.norm() * y.norm()) {
                const Eigen::VectorXd hy = h_inv * y;
                const double yhy = y.dot(hy);
                h_inv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
                         (hy * s.transpose() + s * hy.transpose()) / sy;
            }
        } else {
            // seed the surrogate with the fitted diagonal curvature
            for (int i = 0; i < dim; ++i) {
                const double width = problem.upper[i] - problem.lower[i];
                const double c = curvature[i];
                h_inv(i, i) = (c > 1e-12) ? 1.0 / c : width;
            }
        }
        prev_x = x;
        prev_grad = grad;
        have_prev = true;

        Eigen::VectorXd direction = -(h_inv * grad);
        if (!direction.allFinite() || direction.dot(grad) >= 0.0) {
            // fall back to steepest descent scaled by the fitted curvature
            for (int i = 0; i < dim; ++i) {
                const double c = std::max(curvature[i], 1e-12);
                direction[i] = -grad[i] / c;
            }
        }

        // backtracking line search, every candidate clipped into the box
        double step = 1.0;
        bool moved = false;
        for (int attempt = 0; attempt < 24 && tracker.budget_left(); ++attempt) {
            Eigen::VectorXd cand = x + step * direction;
            for (int i = 0; i < dim; ++i)
                cand[i] = clip(cand[i], problem.lower[i], problem.upper[i]);
            const double fc = eval_at(cand);
            if (fc < fx) {
                x = cand;
                fx = fc;
                moved = true;
                break;
            }
            step *= 0.5;
        }

        if (!moved) {
            h_inv = Eigen::MatrixXd::Identity(dim, dim);
            have_prev = false;
            fd_scale = std::max(fd_floor, fd_scale * 0.1);
            if (++stalls >= 3) break;
            continue;
        }
        stalls = 0;
        // tie the sample pattern to the step just taken, shrinking gradually
        double rel_step = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double width = problem.upper[i] - problem.lower[i];
            rel_step = std::max(rel_step, std::abs(x[i] - prev_x[i]) / width);
        }
        fd_scale = std::clamp(std::max(0.5 * rel_step, 0.1 * fd_scale), fd_floor, 1e-2);
        if (f_before - fx < tol_local) break;
    }

    record.budget_exhausted = !tracker.budget_left();
    record.stage2_evaluations = record.evaluations;
    record.best_params.assign(x.data(), x.data() + dim);
    record.best_cost = fx;
    return record;
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QONN_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

TrainResult train(const BoundedProblem& problem, const OptimizerConfig& config) {
    check_problem(problem);
    if (config.runs < 1) throw std::invalid_argument("train: runs must be >= 1");
    TrainResult result;
    result.records.resize(config.runs);

    BoundedProblem staged = problem;
    staged.budget = config.budget;

    const auto run_one = [&](int r) {
        const std::uint64_t run_seed = config.seed + static_cast<std::uint64_t>(r);
        TrainRecord global = crs_global(staged, mix_seed(run_seed, 1), config.tol_global);
        TrainRecord refined =
            local_refine(staged, global.best_params, mix_seed(run_seed, 2), config.tol_local);

        TrainRecord merged = global;
        merged.seed = run_seed;
        merged.run_index = static_cast<std::uint32_t>(r);
        merged.stage2_evaluations = refined.stage2_evaluations;
        merged.stage2_iterations = refined.stage2_iterations;
        merged.evaluations = global.evaluations + refined.evaluations;
        merged.budget_exhausted = global.budget_exhausted || refined.budget_exhausted;
        merged.refine_failed = refined.refine_failed;
        for (const auto& tp : refined.trace) {
            if (tp.cost < merged.best_cost)
                merged.trace.push_back({global.evaluations + tp.evaluations, tp.cost});
        }
        if (refined.best_cost <= global.best_cost) {
            merged.best_cost = refined.best_cost;
            merged.best_params = refined.best_params;
        }
        result.records[r] = std::move(merged);
    };

    const int workers = std::min(resolve_workers(config.workers), config.runs);
    if (workers <= 1) {
        for (int r = 0; r < config.runs; ++r) run_one(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int r = next.fetch_add(1); r < config.runs; r = next.fetch_add(1)) run_one(r);
            });
        }
        for (auto& t : pool) t.join();
    }

    result.best_index = 0;
    for (int r = 1; r < config.runs; ++r) {
        const auto& cand = result.records[r];
        const auto& best = result.records[result.best_index];
        if (cand.best_cost < best.best_cost ||
            (cand.best_cost == best.best_cost && cand.seed < best.seed))
            result.best_index = r;
    }
    return result;
}

BoundedProblem freeze_corrections(const BoundedProblem& problem) {
    check_problem(problem);
    if (problem.correction_coords.size() != problem.correction_values.size())
        throw std::invalid_argument("freeze_corrections: coords/values size mismatch");
    if (problem.correction_coords.empty())
        throw std::invalid_argument("freeze_corrections: problem has no correction coordinates");

    const int dim = problem.dimension();
    std::vector<bool> frozen(dim, false);
    std::vector<double> full_template(dim, 0.0);
    for (std::size_t k = 0; k < problem.correction_coords.size(); ++k) {
        const int c = problem.correction_coords[k];
        if (c < 0 || c >= dim) throw std::out_of_range("freeze_corrections: coordinate out of range");
        frozen[c] = true;
        full_template[c] = problem.correction_values[k];
    }
    std::vector<int> kept;
    for (int i = 0; i < dim; ++i)
        if (!frozen[i]) kept.push_back(i);

    BoundedProblem reduced;
    reduced.budget = problem.budget;
    for (int i : kept) {
        reduced.lower.push_back(problem.lower[i]);
        reduced.upper.push_back(problem.upper[i]);
    }
    auto base = problem.objective;
    reduced.objective = [base, kept, full_template](std::span<const double> x) {
        std::vector<double> full = full_template;
        for (std::size_t k = 0; k < kept.size(); ++k) full[kept[k]] = x[k];
        return base(full);
    };
    return reduced;
}

void to_json(nlohmann::json& j, const TrainRecord& record) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& tp : record.trace) trace.push_back({tp.evaluations, tp.cost});
    j = {{"seed", record.seed},
         {"run_index", record.run_index},
         {"best_params", record.best_params},
         {"best_cost", record.best_cost},
         {"evaluations", record.evaluations},
         {"stage1_evaluations", record.stage1_evaluations},
         {"stage2_evaluations", record.stage2_evaluations},
         {"stage1_iterations", record.stage1_iterations},
         {"stage2_iterations", record.stage2_iterations},
         {"budget_exhausted", record.budget_exhausted},
         {"refine_failed", record.refine_failed},
         {"trace", trace}};
}

void to_json(nlohmann::json& j, const OptimizerConfig& config) {
    j = {{"runs", config.runs},         {"budget", config.budget},
         {"tol_global", config.tol_global}, {"tol_local", config.tol_local},
         {"seed", config.seed},         {"workers", config.workers}};
}

OptimizerConfig optimizer_config_from_json(const nlohmann::json& j) {
    OptimizerConfig config;
    config.runs = j.value("runs", config.runs);
    config.budget = j.value("budget", config.budget);
    config.tol_global = j.value("tol_global", config.tol_global);
    config.tol_local = j.value("tol_local", config.tol_local);
    config.seed = j.value("seed", config.seed);
    config.workers = j.value("workers", config.workers);
    return config;
}

}  // namespace qonn
