#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "qonn/fock.hpp"

namespace qonn {

using TwoModeUnitary = Eigen::Matrix2cd;
using TransferMatrix = Eigen::MatrixXcd;

/// Balanced directional coupler, (1/sqrt(2)) [[1, 1], [1, -1]].
TwoModeUnitary dc_matrix();

/// Programmable linear MZI: U_DC diag(e^{i theta2}, 1) U_DC diag(e^{i theta1}, 1).
TwoModeUnitary mzi_matrix(double theta1, double theta2);

/// Kerr-like sign-shift gate on one mode: phase exp(i chi n(n-1)/2) on occupation n.
struct NsGate {
    double chi = 0.0;
    int mode = 0;
};

StateVector apply_ns(const StateVector& state, const NsGate& gate);

/// Linear phase e^{i phase n} on one mode.
StateVector apply_mode_phase(const StateVector& state, int mode, double phase);

/// Multiphoton lift of a 2x2 transfer matrix onto the adjacent pair
/// (first_mode, first_mode + 1).
StateVector apply_two_mode(const StateVector& state, const TwoModeUnitary& u, int first_mode);

/// Full multimode application through matrix permanents:
///   <t|Phi(V)|s> = perm(V_{t,s}) / sqrt(prod t_i! prod s_j!).
/// Throws std::invalid_argument when V deviates from unitarity by > 1e-8.
StateVector apply_multimode(const StateVector& state, const TransferMatrix& v);

/// Matrix permanent, Ryser's formula with Gray-code iteration; n <= 12.
cplx permanent(const Eigen::MatrixXcd& a);

/// Rectangular mesh of MZIs plus a diagonal output phase layer. The phase
/// table holds M(M-1)/2 (theta1, theta2) pairs in column-major circuit order
/// followed by M output phases — M^2 parameters in total. Even columns couple
/// (0,1),(2,3),...; odd columns couple (1,2),(3,4),...
TransferMatrix clements_mesh(std::span<const double> phases, int modes);

/// Number of (theta1, theta2) blocks per column of the rectangular mesh.
std::vector<int> clements_column_pairs(int modes, int column);

namespace detail {

/// Pair-occupation kernel of a 2x2 transfer matrix: out[p'] = K[p'][p] in[p]
/// for pair occupations (p, s-p) -> (p', s-p'), one (s+1)x(s+1) matrix.
Eigen::MatrixXcd two_mode_kernel(const TwoModeUnitary& u, int pair_total);

/// Applies pair-occupation kernels (index by pair total s) over the plan of
/// an adjacent pair, in place.
void apply_pair_kernels(const FockBasis& basis, int first_mode,
                        std::span<const Eigen::MatrixXcd> kernels_by_total,
                        Eigen::VectorXcd& amps);

/// In-place diagonal Kerr phase on one mode.
void apply_ns_inplace(const FockBasis& basis, int mode, double chi, Eigen::VectorXcd& amps);

double factorial(int n);
double binomial(int n, int k);

}  // namespace detail

}  // namespace qonn
