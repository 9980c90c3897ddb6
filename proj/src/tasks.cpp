#include "qonn/tasks.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "qonn/rng.hpp"

namespace qonn {

StateVector target_ghz(int qubits, double alpha) {
    if (alpha < 0.0 || alpha > M_PI / 4 + 1e-12)
        throw std::invalid_argument("target_ghz: alpha must lie in [0, pi/4]");
    auto basis = FockBasis::create(2 * qubits, qubits);
    DualRailCodec codec(basis);
    StateVector st(basis);
    const std::uint32_t all_ones = (1u << qubits) - 1;
    st.amps()[codec.fock_index(0)] = std::cos(alpha);
    st.amps()[codec.fock_index(all_ones)] = std::sin(alpha);
    return st;
}

StateVector target_haar_random(int qubits, std::uint64_t seed) {
    auto basis = FockBasis::create(2 * qubits, qubits);
    DualRailCodec codec(basis);
    StateVector st(basis);
    Rng rng(mix_seed(seed, 0x9a4a7c15u));
    Eigen::VectorXcd amps(std::int64_t{1} << qubits);
    for (int i = 0; i < amps.size(); ++i) amps[i] = cplx(rng.gaussian(), rng.gaussian());
    amps /= amps.norm();
    for (std::uint32_t bits = 0; bits < amps.size(); ++bits)
        st.amps()[codec.fock_index(bits)] = amps[bits];
    return st;
}

double fidelity(const StateVector& out, const StateVector& target) {
    return std::norm(overlap(out, target));
}

double fidelity_cost(const StateVector& out, const StateVector& target) {
    return 1.0 - fidelity(out, target);
}

DiscriminationSet DiscriminationSet::bell(int count) {
    if (count != 4 && count != 6)
        throw std::invalid_argument("DiscriminationSet: count must be 4 or 6");
    DiscriminationSet set;
    set.basis = FockBasis::create(4, 2);
    const auto& basis = set.basis;
    const double r = 1.0 / std::sqrt(2.0);
    const auto superpose = [&](std::span<const int> a, std::span<const int> b, double sign) {
        StateVector st(basis);
        st.amps()[basis->index_of(a)] = r;
        st.amps()[basis->index_of(b)] = sign * r;
        return st;
    };
    const int occ_1010[] = {1, 0, 1, 0}, occ_0101[] = {0, 1, 0, 1};
    const int occ_1001[] = {1, 0, 0, 1}, occ_0110[] = {0, 1, 1, 0};
    const int occ_0011[] = {0, 0, 1, 1}, occ_1100[] = {1, 1, 0, 0};
    // Phi+- -> 1010 / 0101, Psi+- -> 1001 / 0110, Theta+- -> 0011 / 1100
    set.inputs.push_back(superpose(occ_1010, occ_0101, +1.0));
    set.target_indices.push_back(basis->index_of(occ_1010));
    set.inputs.push_back(superpose(occ_1010, occ_0101, -1.0));
    set.target_indices.push_back(basis->index_of(occ_0101));
    set.inputs.push_back(superpose(occ_1001, occ_0110, +1.0));
    set.target_indices.push_back(basis->index_of(occ_1001));
    set.inputs.push_back(superpose(occ_1001, occ_0110, -1.0));
    set.target_indices.push_back(basis->index_of(occ_0110));
    if (count == 6) {
        set.inputs.push_back(superpose(occ_0011, occ_1100, +1.0));
        set.target_indices.push_back(basis->index_of(occ_0011));
        set.inputs.push_back(superpose(occ_0011, occ_1100, -1.0));
        set.target_indices.push_back(basis->index_of(occ_1100));
    }
    return set;
}

double discrimination_cost(const NmziMesh& mesh, std::span<const double> chi,
                           std::span<const double> theta, const DiscriminationSet& set) {
    double cf = 0.0;
    for (int j = 0; j < set.size(); ++j) {
        const StateVector out = theta.empty() ? apply_core(set.inputs[j], mesh, chi)
                                              : apply_qonn(set.inputs[j], mesh, chi, theta);
        cf += std::norm(out.amps()[set.target_indices[j]]);
    }
    return 1.0 - cf / set.size();
}

double discrimination_cost(const LinOptQonn& net, std::span<const double> theta,
                           const DiscriminationSet& set) {
    double cf = 0.0;
    for (int j = 0; j < set.size(); ++j) {
        const StateVector out = apply_lo_qonn(set.inputs[j], net, theta);
        cf += std::norm(out.amps()[set.target_indices[j]]);
    }
    return 1.0 - cf / set.size();
}

void to_json(nlohmann::json& j, const HeisenbergModel& model) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : model.edges) edges.push_back({e.i, e.j, e.coupling});
    j = {{"spins", model.spins}, {"edges", edges}, {"fields", model.fields}};
}

HeisenbergModel model_from_json(const nlohmann::json& j) {
    HeisenbergModel model;
    model.spins = j.at("spins").get<int>();
    for (const auto& e : j.at("edges")) {
        model.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
    }
    model.fields = j.at("fields").get<std::vector<double>>();
    return model;
}

namespace {

void validate(const HeisenbergModel& model) {
    if (model.spins < 1 || model.spins > 10)
        throw std::invalid_argument("HeisenbergModel: spins must lie in 1..10");
    if (static_cast<int>(model.fields.size()) != model.spins)
        throw std::invalid_argument("HeisenbergModel: one field per spin required");
    for (const auto& e : model.edges) {
        if (e.i == e.j) throw std::invalid_argument("HeisenbergModel: self-loop edge");
        if (e.i < 0 || e.i >= model.spins || e.j < 0 || e.j >= model.spins)
            throw std::invalid_argument("HeisenbergModel: edge index out of range");
    }
}

}  // namespace

Eigen::MatrixXcd build_hamiltonian(const HeisenbergModel& model) {
    validate(model);
    const int n = model.spins;
    const std::int64_t dim = std::int64_t{1} << n;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    const auto bit = [n](std::int64_t state, int spin) { return (state >> (n - 1 - spin)) & 1; };
    const auto flip = [n](std::int64_t state, int spin) { return state ^ (std::int64_t{1} << (n - 1 - spin)); };
    for (std::int64_t s = 0; s < dim; ++s) {
        for (const auto& e : model.edges) {
            const int bi = static_cast<int>(bit(s, e.i)), bj = static_cast<int>(bit(s, e.j));
            // ZZ: diagonal, sign (+1 if aligned)
            h(s, s) += -e.coupling * ((bi == bj) ? 1.0 : -1.0);
            // XX: flips both spins, amplitude 1
            const std::int64_t sxx = flip(flip(s, e.i), e.j);
            h(sxx, s) += -e.coupling;
            // YY: flips both spins, amplitude -1 when spins aligned, +1 otherwise
            h(sxx, s) += -e.coupling * ((bi == bj) ? -1.0 : 1.0);
        }
        for (int i = 0; i < n; ++i) {
            if (model.fields[i] == 0.0) continue;
            h(flip(s, i), s) += -model.fields[i];
        }
    }
    return h;
}

double exact_ground_energy(const Eigen::MatrixXcd& hamiltonian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hamiltonian,
                                                           Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

double dual_rail_expectation(const StateVector& state, const Eigen::MatrixXcd& hamiltonian) {
    const DualRailProjection proj = project_dualrail(state);
    if (proj.qubit_amps.size() != hamiltonian.rows())
        throw std::invalid_argument("dual_rail_expectation: Hamiltonian dimension mismatch");
    const cplx e = proj.qubit_amps.dot(hamiltonian * proj.qubit_amps);
    return e.real();
}

double vqe_cost(const NmziMesh& mesh, std::span<const double> chi, std::span<const double> theta,
                const HeisenbergModel& model) {
    const Eigen::MatrixXcd h = build_hamiltonian(model);
    auto basis = FockBasis::create(mesh.modes(), mesh.modes() / 2);
    StateVector input = encode_dualrail(std::string(model.spins, '0'), basis);
    const StateVector out =
        theta.empty() ? apply_core(input, mesh, chi) : apply_qonn(input, mesh, chi, theta);
    return dual_rail_expectation(out, h);
}

HeisenbergModel sample_lattice_model(std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x71f09b1du));
    const double j1 = rng.uniform();
    const double j2 = rng.uniform();
    HeisenbergModel model;
    model.spins = 5;
    model.edges = {{0, 1, j1}, {1, 2, j1}, {3, 4, j1},
                   {0, 3, j2}, {1, 3, j2}, {1, 4, j2}, {2, 4, j2}};
    model.fields.resize(5);
    for (auto& h : model.fields) h = rng.uniform();
    return model;
}

}  // namespace qonn
