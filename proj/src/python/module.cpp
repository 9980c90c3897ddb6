#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "qonn/runner.hpp"

namespace py = pybind11;
using namespace qonn;

namespace {

Architecture parse_arch(const std::string& kind) { return architecture_from_string(kind); }

std::vector<double> to_vec(py::sequence seq) {
    std::vector<double> v;
    v.reserve(py::len(seq));
    for (auto item : seq) v.push_back(item.cast<double>());
    return v;
}

py::dict record_to_dict(const TrainRecord& record) {
    py::dict d;
    d["seed"] = record.seed;
    d["run_index"] = record.run_index;
    d["best_params"] = record.best_params;
    d["best_cost"] = record.best_cost;
    d["evaluations"] = record.evaluations;
    d["stage1_evaluations"] = record.stage1_evaluations;
    d["stage2_evaluations"] = record.stage2_evaluations;
    d["budget_exhausted"] = record.budget_exhausted;
    py::list trace;
    for (const auto& tp : record.trace) trace.append(py::make_tuple(tp.evaluations, tp.cost));
    d["trace"] = trace;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fock-space simulation and training of quantum optical neural networks with "
              "programmable Kerr-like nonlinearities";

    py::classh<FockBasis>(m, "FockBasis")
        .def_property_readonly("modes", &FockBasis::modes)
        .def_property_readonly("photons", &FockBasis::photons)
        .def("__len__", &FockBasis::size)
        .def("occupation",
             [](const FockBasis& b, int i) {
                 const auto t = b.occupation(i);
                 return std::vector<int>(t.begin(), t.end());
             })
        .def("index_of", [](const FockBasis& b, const std::vector<int>& occ) {
            return b.index_of(occ);
        });

    m.def(
        "build_basis",
        [](int modes, int photons, std::size_t cap) { return FockBasis::create(modes, photons, cap); },
        py::arg("modes"), py::arg("photons"), py::arg("dim_cap") = FockBasis::kDefaultDimCap);

    py::class_<StateVector>(m, "StateVector")
        .def_property_readonly("basis", &StateVector::basis)
        .def_property_readonly("amps",
                               [](const StateVector& s) -> Eigen::VectorXcd { return s.amps(); })
        .def("norm", &StateVector::norm)
        .def_static("basis_state", &StateVector::basis_state);

    m.def("encode_dualrail", [](const std::string& bits) {
        const int n = static_cast<int>(bits.size());
        return encode_dualrail(bits, FockBasis::create(2 * n, n));
    });
    m.def("project_dualrail", [](const StateVector& s) {
        const auto proj = project_dualrail(s);
        return py::make_tuple(proj.qubit_amps, proj.weight);
    });
    m.def("overlap", &overlap);
    m.def("amplitude_dump", [](const StateVector& s) {
        return py::module_::import("json").attr("loads")(amplitude_dump(s).dump());
    });

    m.def("dc_matrix", []() -> Eigen::Matrix2cd { return dc_matrix(); });
    m.def("mzi_matrix",
          [](double t1, double t2) -> Eigen::Matrix2cd { return mzi_matrix(t1, t2); });
    m.def("apply_ns", [](const StateVector& s, double chi, int mode) {
        return apply_ns(s, {chi, mode});
    });
    m.def("apply_mode_phase", &apply_mode_phase);
    m.def("apply_two_mode", [](const StateVector& s, const Eigen::Matrix2cd& u, int first) {
        return apply_two_mode(s, u, first);
    });
    m.def("apply_multimode", &apply_multimode);
    m.def("permanent", &permanent);
    m.def("clements_mesh", [](const std::vector<double>& phases, int modes) {
        return clements_mesh(phases, modes);
    });

    py::class_<NmziMesh>(m, "NmziMesh")
        .def_static("brickwall", &NmziMesh::brickwall, py::arg("modes"), py::arg("layers"),
                    py::arg("phi_b"), py::arg("corrections") = true)
        .def_property_readonly("modes", &NmziMesh::modes)
        .def_property_readonly("layers", &NmziMesh::layers)
        .def_property_readonly("phi_b", &NmziMesh::phi_b)
        .def_property_readonly("param_count", &NmziMesh::param_count);

    m.def("apply_nmzi", [](const StateVector& s, double chi1, double chi2, double phi_b,
                           int first) { return apply_nmzi_closed(s, {chi1, chi2, phi_b}, first); });
    m.def("apply_core", [](const StateVector& s, const NmziMesh& mesh,
                           const std::vector<double>& chi) { return apply_core(s, mesh, chi); });
    m.def("apply_qonn",
          [](const StateVector& s, const NmziMesh& mesh, const std::vector<double>& chi,
             const std::vector<double>& theta) { return apply_qonn(s, mesh, chi, theta); });
    m.def("record_layer_amplitudes",
          [](const StateVector& s, const NmziMesh& mesh, const std::vector<double>& chi,
             const std::vector<double>& theta) {
              return record_layer_amplitudes(s, mesh, chi, theta);
          });

    py::class_<LinOptQonn>(m, "LinOptQonn")
        .def(py::init([](int modes, int depth) {
                 return LinOptQonn{modes, depth};
             }),
             py::arg("modes"), py::arg("depth"))
        .def_readonly("modes", &LinOptQonn::modes)
        .def_readonly("depth", &LinOptQonn::depth)
        .def_property_readonly("param_count", &LinOptQonn::param_count);

    m.def("apply_lo_qonn", [](const StateVector& s, const LinOptQonn& net,
                              const std::vector<double>& theta) {
        return apply_lo_qonn(s, net, theta);
    });

    m.def("count_params", [](int modes, int depth, const std::string& kind) {
        return count_params(modes, depth, parse_arch(kind));
    });
    m.def("lo_depth", &lo_depth);

    m.def("target_ghz", &target_ghz);
    m.def("target_haar_random", &target_haar_random);
    m.def("fidelity", &fidelity);
    m.def("fidelity_cost", &fidelity_cost);
    m.def("discrimination_cost",
          [](const NmziMesh& mesh, const std::vector<double>& chi,
             const std::vector<double>& theta, int states) {
              return discrimination_cost(mesh, chi, theta, DiscriminationSet::bell(states));
          });

    py::class_<HeisenbergModel>(m, "HeisenbergModel")
        .def(py::init([](int spins, const std::vector<std::tuple<int, int, double>>& edges,
                         const std::vector<double>& fields) {
                 HeisenbergModel model;
                 model.spins = spins;
                 for (const auto& [i, j, c] : edges) model.edges.push_back({i, j, c});
                 model.fields = fields;
                 return model;
             }),
             py::arg("spins"), py::arg("edges"), py::arg("fields"))
        .def_readonly("spins", &HeisenbergModel::spins)
        .def_property_readonly("edges",
                               [](const HeisenbergModel& mdl) {
                                   std::vector<std::tuple<int, int, double>> edges;
                                   for (const auto& e : mdl.edges)
                                       edges.emplace_back(e.i, e.j, e.coupling);
                                   return edges;
                               })
        .def_readonly("fields", &HeisenbergModel::fields);

    m.def("sample_lattice_model", &sample_lattice_model);
    m.def("build_hamiltonian", &build_hamiltonian);
    m.def("exact_ground_energy", &exact_ground_energy);
    m.def("vqe_cost", [](const NmziMesh& mesh, const std::vector<double>& chi,
                         const std::vector<double>& theta, const HeisenbergModel& model) {
        return vqe_cost(mesh, chi, theta, model);
    });

    // single-threaded two-stage minimization for python objectives
    m.def(
        "minimize",
        [](py::function objective, py::sequence lower, py::sequence upper, int runs,
           std::size_t budget, std::uint64_t seed, double tol_global, double tol_local) {
            BoundedProblem problem;
            problem.lower = to_vec(lower);
            problem.upper = to_vec(upper);
            problem.budget = budget;
            problem.objective = [objective](std::span<const double> x) {
                return objective(std::vector<double>(x.begin(), x.end())).cast<double>();
            };
            OptimizerConfig config;
            config.runs = runs;
            config.budget = budget;
            config.seed = seed;
            config.tol_global = tol_global;
            config.tol_local = tol_local;
            config.workers = 1;  // python callbacks hold the GIL
            const TrainResult result = train(problem, config);
            py::list records;
            for (const auto& r : result.records) records.append(record_to_dict(r));
            py::dict out;
            out["records"] = records;
            out["best"] = record_to_dict(result.best());
            return out;
        },
        py::arg("objective"), py::arg("lower"), py::arg("upper"), py::arg("runs") = 10,
        py::arg("budget") = 100000, py::arg("seed") = 0, py::arg("tol_global") = 1e-4,
        py::arg("tol_local") = 1e-14);

    m.def(
        "run_sweep",
        [](const std::string& config_json) {
            const auto config = config_from_json(nlohmann::json::parse(config_json));
            const SweepResult result = run_sweep(config);
            nlohmann::json j;
            to_json(j, result);
            return py::module_::import("json").attr("loads")(j.dump());
        },
        py::arg("config_json"),
        "Run a full sweep from an experiment-config JSON string; returns the sweep result "
        "as nested dicts.");

    m.def("verify_table", [](const std::string& table) {
        const auto outcome = verify_table(table, nullptr);
        return py::make_tuple(outcome.arithmetic_ok, outcome.report);
    });

    m.attr("__version__") = kVersion;
}
