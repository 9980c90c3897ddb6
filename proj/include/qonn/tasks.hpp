#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qonn/fock.hpp"
#include "qonn/network.hpp"

namespace qonn {

/// cos(alpha)|10>^N + sin(alpha)|01>^N in the 2N-mode Fock basis.
StateVector target_ghz(int qubits, double alpha);

/// Haar-random N-qubit state embedded in dual-rail Fock space: complex
/// standard normals on the 2^N amplitudes, normalized.
StateVector target_haar_random(int qubits, std::uint64_t seed);

double fidelity(const StateVector& out, const StateVector& target);

/// 1 - |<out|target>|^2.
double fidelity_cost(const StateVector& out, const StateVector& target);

/// Input states and target output occupations of the Bell-state analyzer.
/// size 4: Phi+-, Psi+-; size 6 adds Theta+- (photon pairs bunched on one
/// qubit's rails, outside the dual-rail code space).
struct DiscriminationSet {
    std::vector<StateVector> inputs;
    std::vector<int> target_indices;  // Fock basis indices of the marker states
    std::shared_ptr<const FockBasis> basis;

    int size() const { return static_cast<int>(inputs.size()); }
    static DiscriminationSet bell(int count);  // count in {4, 6}
};

/// 1 - CF with CF = (1/S) sum_j |<target_j|out_j>|^2.
double discrimination_cost(const NmziMesh& mesh, std::span<const double> chi,
                           std::span<const double> theta, const DiscriminationSet& set);
double discrimination_cost(const LinOptQonn& net, std::span<const double> theta,
                           const DiscriminationSet& set);

struct HeisenbergEdge {
    int i = 0;
    int j = 0;
    double coupling = 0.0;
};

/// Heisenberg model with isotropic nearest-neighbour couplings and a
/// transverse field: H = -sum_edges J (XX + YY + ZZ) - sum_i h_i X_i.
struct HeisenbergModel {
    int spins = 0;
    std::vector<HeisenbergEdge> edges;
    std::vector<double> fields;
};

void to_json(nlohmann::json& j, const HeisenbergModel& model);
HeisenbergModel model_from_json(const nlohmann::json& j);

/// Dense 2^n x 2^n Hamiltonian; spin 0 is the most significant bit.
Eigen::MatrixXcd build_hamiltonian(const HeisenbergModel& model);

double exact_ground_energy(const Eigen::MatrixXcd& hamiltonian);

/// <psi_dr|H|psi_dr> over the renormalized dual-rail projection of the state.
double dual_rail_expectation(const StateVector& state, const Eigen::MatrixXcd& hamiltonian);

double vqe_cost(const NmziMesh& mesh, std::span<const double> chi, std::span<const double> theta,
                const HeisenbergModel& model);

/// 5-spin fragment of the triangular lattice: chains {0,1,2} and {3,4} with
/// intra-chain coupling J1 on (0,1),(1,2),(3,4) and inter-chain coupling J2
/// on (0,3),(1,3),(1,4),(2,4); J1, J2, h_i uniform in [0,1].
HeisenbergModel sample_lattice_model(std::uint64_t seed);

}  // namespace qonn
