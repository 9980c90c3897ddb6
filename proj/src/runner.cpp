#include "qonn/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qonn/rng.hpp"

namespace qonn {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

TrainRecord train_record_from_json(const nlohmann::json& j) {
    TrainRecord r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.run_index = j.at("run_index").get<std::uint32_t>();
    r.best_params = j.at("best_params").get<std::vector<double>>();
    r.best_cost = j.at("best_cost").get<double>();
    r.evaluations = j.at("evaluations").get<std::uint64_t>();
    r.stage1_evaluations = j.at("stage1_evaluations").get<std::uint64_t>();
    r.stage2_evaluations = j.at("stage2_evaluations").get<std::uint64_t>();
    r.stage1_iterations = j.at("stage1_iterations").get<std::uint64_t>();
    r.stage2_iterations = j.at("stage2_iterations").get<std::uint64_t>();
    r.budget_exhausted = j.at("budget_exhausted").get<bool>();
    r.refine_failed = j.at("refine_failed").get<bool>();
    for (const auto& tp : j.at("trace"))
        r.trace.push_back({tp.at(0).get<std::uint64_t>(), tp.at(1).get<double>()});
    return r;
}

}  // namespace

std::string to_string(TaskKind task) {
    switch (task) {
        case TaskKind::prepare: return "prepare";
        case TaskKind::discriminate: return "discriminate";
        case TaskKind::vqe: return "vqe";
    }
    return "?";
}

std::string to_string(Architecture arch) {
    return arch == Architecture::nonlinear ? "nonlinear" : "linear-optics";
}

TaskKind task_from_string(const std::string& s) {
    if (s == "prepare") return TaskKind::prepare;
    if (s == "discriminate") return TaskKind::discriminate;
    if (s == "vqe") return TaskKind::vqe;
    throw std::invalid_argument("unknown task: " + s);
}

Architecture architecture_from_string(const std::string& s) {
    if (s == "nonlinear") return Architecture::nonlinear;
    if (s == "linear-optics") return Architecture::linear_optics;
    throw std::invalid_argument("unknown architecture: " + s);
}

TargetSpec TargetSpec::ghz(double alpha) {
    TargetSpec t;
    t.alpha = alpha;
    t.label = "alpha=" + fmt_double(alpha);
    return t;
}

TargetSpec TargetSpec::haar(std::uint64_t seed) {
    TargetSpec t;
    t.state_seed = seed;
    t.label = "haar=" + std::to_string(seed);
    return t;
}

TargetSpec TargetSpec::hamiltonian(std::uint64_t seed) {
    TargetSpec t;
    t.hamiltonian_seed = seed;
    t.label = "ham=" + std::to_string(seed);
    return t;
}

TargetSpec TargetSpec::bell(int count) {
    TargetSpec t;
    t.bell_states = count;
    t.label = "bell" + std::to_string(count);
    return t;
}

TargetSpec TargetSpec::from_file(TaskKind task, std::string path) {
    TargetSpec t;
    t.file = path;
    t.label = (task == TaskKind::vqe ? "model:" : "file:") + path;
    return t;
}

void to_json(nlohmann::json& j, const ExperimentConfig& config) {
    nlohmann::json targets = nlohmann::json::array();
    for (const auto& t : config.targets) {
        nlohmann::json jt = {{"label", t.label}};
        if (t.alpha) jt["alpha"] = *t.alpha;
        if (t.state_seed) jt["state_seed"] = *t.state_seed;
        if (t.hamiltonian_seed) jt["hamiltonian_seed"] = *t.hamiltonian_seed;
        if (t.file) jt["file"] = *t.file;
        if (t.bell_states) jt["bell_states"] = *t.bell_states;
        targets.push_back(jt);
    }
    nlohmann::json opt;
    to_json(opt, config.optimizer);
    j = {{"task", to_string(config.task)},
         {"architecture", to_string(config.architecture)},
         {"qubits", config.qubits},
         {"depths", config.depths},
         {"phi_b", config.phi_b},
         {"targets", targets},
         {"corrections", config.corrections},
         {"optimizer", opt},
         {"output_dir", config.output_dir}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig config;
    config.task = task_from_string(j.at("task").get<std::string>());
    config.architecture = architecture_from_string(j.at("architecture").get<std::string>());
    config.qubits = j.at("qubits").get<int>();
    if (j.contains("depths")) {
        config.depths = j.at("depths").get<std::vector<int>>();
    } else if (j.contains("depth_range")) {
        const auto lo = j.at("depth_range").at(0).get<int>();
        const auto hi = j.at("depth_range").at(1).get<int>();
        for (int d = lo; d <= hi; ++d) config.depths.push_back(d);
    }
    if (j.contains("phi_b")) config.phi_b = j.at("phi_b").get<std::vector<double>>();
    config.corrections = j.value("corrections", true);
    if (j.contains("optimizer")) config.optimizer = optimizer_config_from_json(j.at("optimizer"));
    config.output_dir = j.value("output_dir", std::string());

    if (j.contains("targets")) {
        for (const auto& jt : j.at("targets")) {
            TargetSpec t;
            if (jt.contains("alpha"))
                t = TargetSpec::ghz(jt.at("alpha").get<double>());
            else if (jt.contains("state_seed"))
                t = TargetSpec::haar(jt.at("state_seed").get<std::uint64_t>());
            else if (jt.contains("hamiltonian_seed"))
                t = TargetSpec::hamiltonian(jt.at("hamiltonian_seed").get<std::uint64_t>());
            else if (jt.contains("file"))
                t = TargetSpec::from_file(config.task, jt.at("file").get<std::string>());
            else if (jt.contains("bell_states"))
                t = TargetSpec::bell(jt.at("bell_states").get<int>());
            else
                throw std::invalid_argument("target entry without a source");
            config.targets.push_back(t);
        }
    }
    // convenience spellings
    if (j.contains("alphas"))
        for (double a : j.at("alphas").get<std::vector<double>>())
            config.targets.push_back(TargetSpec::ghz(a));
    if (j.contains("state_seeds"))
        for (auto s : j.at("state_seeds").get<std::vector<std::uint64_t>>())
            config.targets.push_back(TargetSpec::haar(s));
    if (j.contains("hamiltonian_seeds"))
        for (auto s : j.at("hamiltonian_seeds").get<std::vector<std::uint64_t>>())
            config.targets.push_back(TargetSpec::hamiltonian(s));
    if (j.contains("num_states"))
        config.targets.push_back(TargetSpec::bell(j.at("num_states").get<int>()));
    return config;
}

namespace {

void validate_config(const ExperimentConfig& config) {
    if (config.depths.empty()) throw std::invalid_argument("config: empty depth range");
    for (int d : config.depths)
        if (d < 0) throw std::invalid_argument("config: negative depth");
    if (config.phi_b.empty()) throw std::invalid_argument("config: empty phi_b list");
    for (double p : config.phi_b)
        if (p < 0.0 || p >= 2 * M_PI)
            throw std::invalid_argument("config: phi_b must lie in [0, 2pi)");
    if (config.targets.empty()) throw std::invalid_argument("config: no targets");
    if (config.qubits < 1) throw std::invalid_argument("config: qubits must be >= 1");
    if (config.task == TaskKind::discriminate && config.qubits != 2)
        throw std::invalid_argument("config: discrimination is a 2-qubit (4-mode) task");
    for (const auto& t : config.targets) {
        const bool prepare_target = t.alpha || t.state_seed ||
                                    (t.file && config.task == TaskKind::prepare);
        const bool vqe_target =
            t.hamiltonian_seed || (t.file && config.task == TaskKind::vqe);
        switch (config.task) {
            case TaskKind::prepare:
                if (!prepare_target)
                    throw std::invalid_argument("config: target does not fit the prepare task");
                break;
            case TaskKind::discriminate:
                if (!t.bell_states)
                    throw std::invalid_argument("config: discrimination needs bell targets");
                break;
            case TaskKind::vqe:
                if (!vqe_target)
                    throw std::invalid_argument("config: target does not fit the vqe task");
                break;
        }
    }
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

thread_local Eigen::VectorXcd tl_work;

// Shared pieces of a trainable cell objective.
struct NlContext {
    std::shared_ptr<const FockBasis> basis;
    NmziMesh mesh;
    std::vector<int> codec_indices;  // 2^N dual-rail basis indices
    int qubits = 0;

    NlContext(int qubits_, int depth, double phi_b, bool corrections)
        : basis(FockBasis::create(2 * qubits_, qubits_)),
          mesh(NmziMesh::brickwall(2 * qubits_, depth, phi_b, corrections)),
          qubits(qubits_) {
        DualRailCodec codec(basis);
        codec_indices.assign(codec.dual_rail_indices().begin(), codec.dual_rail_indices().end());
    }

    // |0...0>_L through the input corrections, written into work
    void input_product_state(std::span<const double> theta_in, Eigen::VectorXcd& work) const {
        work.setZero(basis->size());
        std::vector<TwoModeUnitary> us(qubits);
        for (int q = 0; q < qubits; ++q) us[q] = mzi_matrix(theta_in[2 * q], theta_in[2 * q + 1]);
        const std::uint32_t count = 1u << qubits;
        for (std::uint32_t bits = 0; bits < count; ++bits) {
            cplx amp = 1.0;
            for (int q = 0; q < qubits; ++q) {
                const int bit = (bits >> (qubits - 1 - q)) & 1;
                amp *= us[q](bit, 0);
            }
            work[codec_indices[bits]] = amp;
        }
    }
};

BoundedProblem make_bounds(int chi_count, int theta_count) {
    BoundedProblem p;
    p.lower.assign(chi_count, 0.0);
    p.upper.assign(chi_count, M_PI);
    p.lower.insert(p.lower.end(), theta_count, 0.0);
    p.upper.insert(p.upper.end(), theta_count, 2 * M_PI);
    for (int i = 0; i < theta_count; ++i) {
        p.correction_coords.push_back(chi_count + i);
        p.correction_values.push_back(0.0);  // mzi_matrix(0, 0) is the identity
    }
    return p;
}

StateVector resolve_prepare_target(const ExperimentConfig& config, const TargetSpec& target,
                                   const std::shared_ptr<const FockBasis>& basis) {
    if (target.alpha) return target_ghz(config.qubits, *target.alpha);
    if (target.state_seed) return target_haar_random(config.qubits, *target.state_seed);
    if (target.file) return state_from_dump(load_json_file(*target.file), basis);
    throw std::invalid_argument("prepare: target has no source");
}

HeisenbergModel resolve_model(const TargetSpec& target) {
    if (target.hamiltonian_seed) return sample_lattice_model(*target.hamiltonian_seed);
    if (target.file) return model_from_json(load_json_file(*target.file));
    throw std::invalid_argument("vqe: target has no source");
}

}  // namespace

BuiltProblem build_problem(const ExperimentConfig& config, int depth, double phi_b,
                           const TargetSpec& target) {
    BuiltProblem built;
    const int qubits = config.qubits;
    const int modes = 2 * qubits;

    if (config.architecture == Architecture::nonlinear) {
        const bool corrections = config.corrections;
        auto ctx = std::make_shared<const NlContext>(qubits, depth, phi_b, corrections);
        built.params = ctx->mesh.param_count();
        built.dimension = ctx->basis->size();
        const int chi_count = ctx->mesh.param_count();
        const int theta_count = corrections ? 2 * modes : 0;
        built.problem = make_bounds(chi_count, theta_count);

        switch (config.task) {
            case TaskKind::prepare: {
                auto target_state =
                    std::make_shared<const StateVector>(resolve_prepare_target(config, target,
                                                                               ctx->basis));
                built.problem.objective = [ctx, target_state, chi_count, modes,
                                           corrections](std::span<const double> x) {
                    auto& work = tl_work;
                    if (corrections) {
                        ctx->input_product_state(x.subspan(chi_count, modes), work);
                    } else {
                        work.setZero(ctx->basis->size());
                        work[ctx->codec_indices[0]] = 1.0;
                    }
                    detail::apply_core_inplace(*ctx->basis, ctx->mesh, x.subspan(0, chi_count),
                                               work);
                    if (corrections)
                        detail::apply_corrections_inplace(*ctx->basis,
                                                          x.subspan(chi_count + modes, modes),
                                                          work);
                    return 1.0 - std::norm(target_state->amps().dot(work));
                };
                break;
            }
            case TaskKind::discriminate: {
                auto set = std::make_shared<const DiscriminationSet>(
                    DiscriminationSet::bell(target.bell_states.value()));
                built.problem.objective = [ctx, set, chi_count, modes,
                                           corrections](std::span<const double> x) {
                    auto& work = tl_work;
                    double cf = 0.0;
                    for (int j = 0; j < set->size(); ++j) {
                        work = set->inputs[j].amps();
                        if (corrections)
                            detail::apply_corrections_inplace(*ctx->basis,
                                                              x.subspan(chi_count, modes), work);
                        detail::apply_core_inplace(*ctx->basis, ctx->mesh,
                                                   x.subspan(0, chi_count), work);
                        if (corrections)
                            detail::apply_corrections_inplace(
                                *ctx->basis, x.subspan(chi_count + modes, modes), work);
                        cf += std::norm(work[set->target_indices[j]]);
                    }
                    return 1.0 - cf / set->size();
                };
                break;
            }
            case TaskKind::vqe: {
                const HeisenbergModel model = resolve_model(target);
                if (model.spins != qubits)
                    throw std::invalid_argument("vqe: model spins do not match config qubits");
                auto hamiltonian = std::make_shared<const Eigen::MatrixXcd>(
                    build_hamiltonian(model));
                built.problem.objective = [ctx, hamiltonian, chi_count, modes,
                                           corrections](std::span<const double> x) {
                    auto& work = tl_work;
                    if (corrections) {
                        ctx->input_product_state(x.subspan(chi_count, modes), work);
                    } else {
                        work.setZero(ctx->basis->size());
                        work[ctx->codec_indices[0]] = 1.0;
                    }
                    detail::apply_core_inplace(*ctx->basis, ctx->mesh, x.subspan(0, chi_count),
                                               work);
                    if (corrections)
                        detail::apply_corrections_inplace(*ctx->basis,
                                                          x.subspan(chi_count + modes, modes),
                                                          work);
                    Eigen::VectorXcd dr(static_cast<std::int64_t>(ctx->codec_indices.size()));
                    for (std::size_t b = 0; b < ctx->codec_indices.size(); ++b)
                        dr[b] = work[ctx->codec_indices[b]];
                    const double weight = dr.squaredNorm();
                    if (weight < 1e-14) return 1e9;  // degenerate projection
                    return dr.dot((*hamiltonian) * dr).real() / weight;
                };
                break;
            }
        }
    } else {
        LinOptQonn net{modes, depth};
        built.params = net.param_count();
        built.d_lo = lo_depth(modes, depth);
        auto basis = FockBasis::create(modes, qubits);
        built.dimension = basis->size();
        built.problem.lower.assign(net.param_count(), 0.0);
        built.problem.upper.assign(net.param_count(), 2 * M_PI);
        DualRailCodec codec(basis);
        std::vector<int> codec_indices(codec.dual_rail_indices().begin(),
                                       codec.dual_rail_indices().end());

        switch (config.task) {
            case TaskKind::prepare: {
                auto target_state = std::make_shared<const StateVector>(
                    resolve_prepare_target(config, target, basis));
                const int input_index = codec_indices[0];
                built.problem.objective = [basis, net, target_state,
                                           input_index](std::span<const double> x) {
                    auto& work = tl_work;
                    work.setZero(basis->size());
                    work[input_index] = 1.0;
                    detail::apply_lo_inplace(*basis, net, x, work);
                    return 1.0 - std::norm(target_state->amps().dot(work));
                };
                break;
            }
            case TaskKind::discriminate: {
                auto set = std::make_shared<const DiscriminationSet>(
                    DiscriminationSet::bell(target.bell_states.value()));
                built.problem.objective = [basis, net, set](std::span<const double> x) {
                    auto& work = tl_work;
                    double cf = 0.0;
                    for (int j = 0; j < set->size(); ++j) {
                        work = set->inputs[j].amps();
                        detail::apply_lo_inplace(*basis, net, x, work);
                        cf += std::norm(work[set->target_indices[j]]);
                    }
                    return 1.0 - cf / set->size();
                };
                break;
            }
            case TaskKind::vqe: {
                const HeisenbergModel model = resolve_model(target);
                if (model.spins != qubits)
                    throw std::invalid_argument("vqe: model spins do not match config qubits");
                auto hamiltonian =
                    std::make_shared<const Eigen::MatrixXcd>(build_hamiltonian(model));
                const int input_index = codec_indices[0];
                built.problem.objective = [basis, net, hamiltonian, codec_indices,
                                           input_index](std::span<const double> x) {
                    auto& work = tl_work;
                    work.setZero(basis->size());
                    work[input_index] = 1.0;
                    detail::apply_lo_inplace(*basis, net, x, work);
                    Eigen::VectorXcd dr(static_cast<std::int64_t>(codec_indices.size()));
                    for (std::size_t b = 0; b < codec_indices.size(); ++b)
                        dr[b] = work[codec_indices[b]];
                    const double weight = dr.squaredNorm();
                    if (weight < 1e-14) return 1e9;
                    return dr.dot((*hamiltonian) * dr).real() / weight;
                };
                break;
            }
        }
    }
    return built;
}

void to_json(nlohmann::json& j, const SweepCell& cell) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : cell.records) {
        nlohmann::json jr;
        to_json(jr, r);
        records.push_back(jr);
    }
    j = {{"depth", cell.depth},         {"phi_b", cell.phi_b},
         {"target", cell.target},       {"cell_seed", cell.cell_seed},
         {"params", cell.params},       {"d_lo", cell.d_lo},
         {"dimension", cell.dimension}, {"best_cost", cell.best_cost},
         {"records", records},          {"failed", cell.failed},
         {"error", cell.error}};
}

SweepCell cell_from_json(const nlohmann::json& j) {
    SweepCell cell;
    cell.depth = j.at("depth").get<int>();
    cell.phi_b = j.at("phi_b").get<double>();
    cell.target = j.at("target").get<std::string>();
    cell.cell_seed = j.at("cell_seed").get<std::uint64_t>();
    cell.params = j.at("params").get<int>();
    cell.d_lo = j.at("d_lo").get<int>();
    cell.dimension = j.at("dimension").get<int>();
    cell.best_cost = j.at("best_cost").get<double>();
    for (const auto& jr : j.at("records")) cell.records.push_back(train_record_from_json(jr));
    cell.failed = j.at("failed").get<bool>();
    cell.error = j.at("error").get<std::string>();
    return cell;
}

void to_json(nlohmann::json& j, const SweepResult& result) {
    nlohmann::json config;
    to_json(config, result.config);
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : result.cells) {
        nlohmann::json jc;
        to_json(jc, c);
        cells.push_back(jc);
    }
    j = {{"version", kVersion}, {"config", config}, {"cells", cells}};
}

SweepResult sweep_from_json(const nlohmann::json& j) {
    SweepResult result;
    result.config = config_from_json(j.at("config"));
    for (const auto& jc : j.at("cells")) result.cells.push_back(cell_from_json(jc));
    return result;
}

bool sweep_equal(const SweepResult& a, const SweepResult& b) {
    nlohmann::json ja, jb;
    to_json(ja, a);
    to_json(jb, b);
    return ja == jb;
}

SweepResult run_sweep(const ExperimentConfig& config) {
    validate_config(config);
    SweepResult result;
    result.config = config;

    const bool persist = !config.output_dir.empty();
    std::filesystem::path dir(config.output_dir);
    std::map<std::string, SweepCell> resumed;
    if (persist) {
        std::filesystem::create_directories(dir);
        const auto runs_path = dir / "runs.jsonl";
        if (std::filesystem::exists(runs_path)) {
            std::ifstream in(runs_path);
            std::string line;
            std::map<std::string, SweepCell> partial;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const nlohmann::json j = nlohmann::json::parse(line);
                const std::string key = j.at("cell_key").get<std::string>();
                auto& cell = partial[key];
                if (cell.records.empty()) {
                    cell.depth = j.at("depth").get<int>();
                    cell.phi_b = j.at("phi_b").get<double>();
                    cell.target = j.at("target").get<std::string>();
                    cell.cell_seed = j.at("cell_seed").get<std::uint64_t>();
                    cell.params = j.at("params").get<int>();
                    cell.d_lo = j.at("d_lo").get<int>();
                    cell.dimension = j.at("dimension").get<int>();
                }
                cell.records.push_back(train_record_from_json(j.at("record")));
            }
            for (auto& [key, cell] : partial) {
                if (static_cast<int>(cell.records.size()) == config.optimizer.runs)
                    resumed.emplace(key, std::move(cell));
            }
        }
        nlohmann::json jconfig;
        to_json(jconfig, config);
        nlohmann::json meta = {{"version", kVersion},
                               {"config_hash", std::hash<std::string>{}(jconfig.dump())},
                               {"config", jconfig}};
        std::ofstream out(dir / "config.json");
        out << meta.dump(2) << "\n";
    }

    for (std::size_t pi = 0; pi < config.phi_b.size(); ++pi) {
        for (std::size_t ti = 0; ti < config.targets.size(); ++ti) {
            for (std::size_t di = 0; di < config.depths.size(); ++di) {
                SweepCell cell;
                cell.depth = config.depths[di];
                cell.phi_b = config.phi_b[pi];
                cell.target = config.targets[ti].label;
                cell.cell_seed = mix_seed(mix_seed(mix_seed(config.optimizer.seed, pi + 1),
                                                   ti + 1),
                                          di + 1);
                const std::string key = std::to_string(cell.depth) + "|" +
                                        fmt_double(cell.phi_b) + "|" + cell.target;
                if (auto it = resumed.find(key); it != resumed.end()) {
                    cell = it->second;
                    cell.best_cost = cell.records[0].best_cost;
                    int best = 0;
                    for (std::size_t r = 1; r < cell.records.size(); ++r) {
                        if (cell.records[r].best_cost < cell.records[best].best_cost)
                            best = static_cast<int>(r);
                    }
                    cell.best_cost = cell.records[best].best_cost;
                    result.cells.push_back(std::move(cell));
                    continue;
                }
                try {
                    BuiltProblem built =
                        build_problem(config, cell.depth, cell.phi_b, config.targets[ti]);
                    cell.params = built.params;
                    cell.d_lo = built.d_lo;
                    cell.dimension = built.dimension;
                    OptimizerConfig opt = config.optimizer;
                    opt.seed = cell.cell_seed;
                    TrainResult trained = train(built.problem, opt);
                    cell.best_cost = trained.best().best_cost;
                    cell.records = std::move(trained.records);
                } catch (const std::exception& e) {
                    cell.failed = true;
                    cell.error = e.what();
                }
                result.cells.push_back(std::move(cell));
            }
        }
    }

    if (persist) {
        std::ofstream out(dir / "runs.jsonl", std::ios::trunc);
        for (const auto& cell : result.cells) {
            const std::string key =
                std::to_string(cell.depth) + "|" + fmt_double(cell.phi_b) + "|" + cell.target;
            for (const auto& record : cell.records) {
                nlohmann::json jr;
                to_json(jr, record);
                nlohmann::json line = {{"cell_key", key},
                                       {"depth", cell.depth},
                                       {"phi_b", cell.phi_b},
                                       {"target", cell.target},
                                       {"cell_seed", cell.cell_seed},
                                       {"params", cell.params},
                                       {"d_lo", cell.d_lo},
                                       {"dimension", cell.dimension},
                                       {"record", jr}};
                out << line.dump() << "\n";
            }
        }
    }
    return result;
}

namespace {

const TrainRecord* best_record(const SweepCell& cell) {
    if (cell.records.empty()) return nullptr;
    const TrainRecord* best = &cell.records[0];
    for (const auto& r : cell.records) {
        if (r.best_cost < best->best_cost ||
            (r.best_cost == best->best_cost && r.seed < best->seed))
            best = &r;
    }
    return best;
}

}  // namespace

std::vector<std::filesystem::path> emit_curves(const SweepResult& result,
                                               const std::string& format,
                                               const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;

    if (format == "csv") {
        const auto path = dir / "curves.csv";
        std::ofstream out(path, std::ios::trunc);
        out << "depth,phi_b,target,best_cost,params,runs\n";
        for (const auto& cell : result.cells) {
            out << cell.depth << "," << fmt_double(cell.phi_b) << "," << cell.target << ","
                << fmt_double(cell.best_cost) << "," << cell.params << "," << cell.records.size()
                << "\n";
        }
        written.push_back(path);
    } else if (format == "json") {
        const auto path = dir / "sweep.json";
        nlohmann::json j;
        to_json(j, result);
        std::ofstream out(path, std::ios::trunc);
        out << j.dump(2) << "\n";
        written.push_back(path);
    } else {
        throw std::invalid_argument("emit_curves: format must be csv or json");
    }

    // best trained parameters per cell, chi grouped by layer for the
    // nonlinear architecture
    nlohmann::json params = nlohmann::json::array();
    for (const auto& cell : result.cells) {
        const TrainRecord* best = best_record(cell);
        if (best == nullptr) continue;
        nlohmann::json entry = {{"depth", cell.depth},
                                {"phi_b", cell.phi_b},
                                {"target", cell.target},
                                {"best_cost", best->best_cost},
                                {"seed", best->seed}};
        if (result.config.architecture == Architecture::nonlinear) {
            const NmziMesh mesh = NmziMesh::brickwall(2 * result.config.qubits, cell.depth,
                                                      cell.phi_b, result.config.corrections);
            nlohmann::json layers = nlohmann::json::array();
            std::size_t k = 0;
            for (int l = 1; l <= mesh.layers(); ++l) {
                nlohmann::json layer = nlohmann::json::array();
                for (std::size_t b = 0; b < mesh.layer_blocks(l).size(); ++b) {
                    layer.push_back({best->best_params[k], best->best_params[k + 1]});
                    k += 2;
                }
                layers.push_back(layer);
            }
            entry["chi_layers"] = layers;
            if (result.config.corrections) {
                const int modes = 2 * result.config.qubits;
                entry["corrections_in"] = std::vector<double>(
                    best->best_params.begin() + k, best->best_params.begin() + k + modes);
                entry["corrections_out"] = std::vector<double>(
                    best->best_params.begin() + k + modes,
                    best->best_params.begin() + k + 2 * modes);
            }
        } else {
            entry["phases"] = best->best_params;
        }
        params.push_back(entry);
    }
    const auto params_path = dir / "params.json";
    std::ofstream pout(params_path, std::ios::trunc);
    pout << params.dump(2) << "\n";
    written.push_back(params_path);
    return written;
}

namespace {

struct TableRowSpec {
    const char* label;
    Architecture arch;
    double phi_b;
    bool corrections;
    TaskKind task;
    int qubits;
    const char* target_kind;  // ghz_max | haar_all | bell4 | bell6 | ham_all
    int depth;
    int params;
    int d_lo;
    double threshold;
};

std::vector<TableRowSpec> table_rows(const std::string& table) {
    const double pi = M_PI;
    if (table == "I")
        return {
            {"NL (phi_b=0), 3-qubit GHZ", Architecture::nonlinear, 0.0, true, TaskKind::prepare,
             3, "ghz_max", 1, 4, 0, 1e-7},
            {"NL (phi_b=pi), 3-qubit GHZ", Architecture::nonlinear, pi, true, TaskKind::prepare,
             3, "ghz_max", 5, 24, 0, 1e-7},
            {"NL (phi_b=pi), 4-qubit GHZ", Architecture::nonlinear, pi, true, TaskKind::prepare,
             4, "ghz_max", 9, 62, 0, 1e-7},
            {"LO, 3-qubit GHZ", Architecture::linear_optics, 0.0, false, TaskKind::prepare, 3,
             "ghz_max", 1, 60, 14, 1e-7},
            {"LO, 4-qubit GHZ", Architecture::linear_optics, 0.0, false, TaskKind::prepare, 4,
             "ghz_max", 2, 168, 27, 1e-7},
        };
    if (table == "II")
        return {
            {"NL (phi_b=pi), 3-qubit random", Architecture::nonlinear, pi, true,
             TaskKind::prepare, 3, "haar_all", 11, 54, 0, 1e-7},
            {"LO, 3-qubit random", Architecture::linear_optics, 0.0, false, TaskKind::prepare, 3,
             "haar_all", 4, 150, 35, 1e-7},
        };
    if (table == "III")
        return {
            {"NL (phi_b=0), 4-state", Architecture::nonlinear, 0.0, true, TaskKind::discriminate,
             2, "bell4", 1, 2, 0, 1e-7},
            {"NL (phi_b=0), 6-state", Architecture::nonlinear, 0.0, true, TaskKind::discriminate,
             2, "bell6", 5, 14, 0, 1e-7},
            {"NL (phi_b=pi), 4-state", Architecture::nonlinear, pi, true, TaskKind::discriminate,
             2, "bell4", 3, 8, 0, 1e-7},
            {"NL (phi_b=pi), 6-state", Architecture::nonlinear, pi, true, TaskKind::discriminate,
             2, "bell6", 11, 32, 0, 1e-7},
            {"NL (phi_b=pi, no MZIs), 4-state", Architecture::nonlinear, pi, false,
             TaskKind::discriminate, 2, "bell4", 19, 56, 0, 1e-7},
            {"NL (phi_b=pi, no MZIs), 6-state", Architecture::nonlinear, pi, false,
             TaskKind::discriminate, 2, "bell6", 23, 68, 0, 1e-7},
            {"LO, 4-state", Architecture::linear_optics, 0.0, false, TaskKind::discriminate, 2,
             "bell4", 1, 24, 10, 1e-7},
            {"LO, 6-state", Architecture::linear_optics, 0.0, false, TaskKind::discriminate, 2,
             "bell6", 3, 48, 20, 1e-7},
        };
    if (table == "IV")
        return {
            {"NL (phi_b=pi/2), 5-spin VQE", Architecture::nonlinear, pi / 2, true, TaskKind::vqe,
             5, "ham_all", 7, 62, 0, 1e-3},
            {"LO, 5-spin VQE", Architecture::linear_optics, 0.0, false, TaskKind::vqe, 5,
             "ham_all", 1, 180, 22, 1e-3},
        };
    throw std::invalid_argument("verify_table: table must be I, II, III or IV");
}

bool target_matches(const TableRowSpec& row, const std::string& label) {
    const std::string kind = row.target_kind;
    if (kind == "ghz_max") {
        if (label.rfind("alpha=", 0) != 0) return false;
        return std::abs(std::stod(label.substr(6)) - M_PI / 4) < 1e-9;
    }
    if (kind == "haar_all") return label.rfind("haar=", 0) == 0;
    if (kind == "ham_all") return label.rfind("ham=", 0) == 0;
    return label == kind;  // bell4 / bell6
}

}  // namespace

VerifyOutcome verify_table(const std::string& table, const SweepResult* result) {
    VerifyOutcome outcome;
    std::ostringstream report;
    report << "Table " << table << "\n";
    for (const auto& row : table_rows(table)) {
        const int modes = 2 * row.qubits;
        const int p = count_params(modes, row.depth, row.arch);
        const bool p_ok = (p == row.params);
        bool dlo_ok = true;
        report << "  " << row.label << ": P(" << row.depth << ") = " << p
               << (p_ok ? " [ok]" : " [MISMATCH, table says " + std::to_string(row.params) + "]");
        if (row.arch == Architecture::linear_optics) {
            const int dlo = lo_depth(modes, row.depth);
            dlo_ok = (dlo == row.d_lo);
            report << ", D_LO = " << dlo
                   << (dlo_ok ? " [ok]"
                              : " [MISMATCH, table says " + std::to_string(row.d_lo) + "]");
        }
        outcome.arithmetic_ok = outcome.arithmetic_ok && p_ok && dlo_ok;

        if (result != nullptr && result->config.task == row.task &&
            result->config.architecture == row.arch && result->config.qubits == row.qubits &&
            result->config.corrections == row.corrections &&
            (row.arch == Architecture::linear_optics ||
             std::any_of(result->config.phi_b.begin(), result->config.phi_b.end(),
                         [&](double p_) { return std::abs(p_ - row.phi_b) < 1e-12; }))) {
            // minimal depth at which every matching target beats the threshold
            std::map<int, std::pair<int, int>> per_depth;  // depth -> (passing, total)
            for (const auto& cell : result->cells) {
                if (cell.failed || !target_matches(row, cell.target)) continue;
                if (row.arch == Architecture::nonlinear &&
                    std::abs(cell.phi_b - row.phi_b) >= 1e-12)
                    continue;
                double error = cell.best_cost;
                if (row.task == TaskKind::vqe) {
                    if (cell.target.rfind("ham=", 0) != 0) continue;
                    const auto model = sample_lattice_model(
                        std::stoull(cell.target.substr(4)));
                    error = cell.best_cost - exact_ground_energy(build_hamiltonian(model));
                }
                auto& [passing, total] = per_depth[cell.depth];
                ++total;
                if (error <= row.threshold) ++passing;
            }
            int measured = -1;
            for (const auto& [depth, counts] : per_depth) {
                if (counts.first == counts.second && counts.second > 0) {
                    measured = depth;
                    break;
                }
            }
            if (per_depth.empty()) {
                report << ", trained: no matching cells";
            } else if (measured < 0) {
                report << ", trained: no depth reached the threshold [MISMATCH]";
                outcome.trained_ok = false;
            } else {
                const bool match = (measured == row.depth);
                report << ", trained minimal depth = " << measured
                       << (match ? " [matches table]"
                                 : " [table says " + std::to_string(row.depth) + "]");
                if (!match) outcome.trained_ok = false;
            }
        }
        report << "\n";
    }
    outcome.report = report.str();
    return outcome;
}

}  // namespace qonn
