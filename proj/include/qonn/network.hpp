#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qonn/fock.hpp"
#include "qonn/optics.hpp"

namespace qonn {

/// One nonlinear Mach-Zehnder interferometer: two balanced DCs enclosing two
/// programmable NS gates (chi1 on the first arm, chi2 on the second) and a
/// static linear bias phi_b on the first arm.
struct NmziParams {
    double chi1 = 0.0;  // [0, pi]
    double chi2 = 0.0;  // [0, pi]
    double phi_b = 0.0;
};

struct NmziBlock {
    int layer = 0;       // 1-based layer index
    int first_mode = 0;  // 0-based, couples (first_mode, first_mode + 1)
    double phi_b = 0.0;
};

/// Brick-wall mesh of NMZIs. Odd layers hold floor(M/2)-1 blocks on offset
/// pairs (1,2),(3,4),...; even layers hold floor(M/2) blocks on aligned pairs
/// (0,1),(2,3),... (0-based firsts). Trainable nonlinearities are passed
/// separately as a chi vector, two per block, layer-major.
class NmziMesh {
public:
    static NmziMesh brickwall(int modes, int layers, double phi_b, bool corrections = true);

    int modes() const { return modes_; }
    int layers() const { return layers_; }
    double phi_b() const { return phi_b_; }
    bool corrections() const { return corrections_; }
    const std::vector<NmziBlock>& blocks() const { return blocks_; }
    std::span<const NmziBlock> layer_blocks(int layer_1based) const;

    /// Count of trainable nonlinearities (two per block) = P_NL.
    int param_count() const { return 2 * static_cast<int>(blocks_.size()); }
    /// Correction phase count when corrections are on: 4N = 2 * modes.
    int correction_count() const { return corrections_ ? 2 * modes_ : 0; }

private:
    int modes_ = 0;
    int layers_ = 0;
    double phi_b_ = 0.0;
    bool corrections_ = true;
    std::vector<NmziBlock> blocks_;
    std::vector<int> layer_offsets_;
};

void to_json(nlohmann::json& j, const NmziMesh& mesh);
NmziMesh mesh_from_json(const nlohmann::json& j);

/// Closed-form NMZI transform on the adjacent pair (first_mode, first_mode+1).
StateVector apply_nmzi_closed(const StateVector& state, const NmziParams& params, int first_mode);

/// Sequential layer application of the variational core; |chi| must equal
/// mesh.param_count().
StateVector apply_core(const StateVector& state, const NmziMesh& mesh, std::span<const double> chi);

/// Full QONN: per-qubit input MZI corrections, core, output MZI corrections.
/// theta layout: [in q0 (t1,t2), in q1, ..., out q0, out q1, ...], 4N values.
StateVector apply_qonn(const StateVector& state, const NmziMesh& mesh, std::span<const double> chi,
                       std::span<const double> theta);

/// |c_t| snapshots captured as the state enters the NS gates of each layer
/// (immediately after the layer's first DC column).
std::vector<Eigen::VectorXd> record_layer_amplitudes(const StateVector& state, const NmziMesh& mesh,
                                                     std::span<const double> chi,
                                                     std::span<const double> theta);

/// Baseline QONN trained by linear optics: D_NL + 1 universal rectangular
/// interferometers with static NS(pi) layers in between. Trainable phases are
/// the internal MZI phases of each interferometer, M(M-1) per block; the
/// diagonal output phases are fixed at zero.
struct LinOptQonn {
    int modes = 0;
    int depth = 0;  // number of static nonlinear layers D_NL

    int param_count() const { return (depth + 1) * modes * (modes - 1); }
};

void to_json(nlohmann::json& j, const LinOptQonn& net);

StateVector apply_lo_qonn(const StateVector& state, const LinOptQonn& net,
                          std::span<const double> theta);

/// |c_t| snapshots entering each static NS(pi) layer of the baseline.
std::vector<Eigen::VectorXd> record_lo_layer_amplitudes(const StateVector& state,
                                                        const LinOptQonn& net,
                                                        std::span<const double> theta);

enum class Architecture { nonlinear, linear_optics };

/// P_NL = D(M-2) + 2 floor(D/2)  or  P_LO = (D+1) M(M-1).
int count_params(int modes, int depth, Architecture kind);

/// Linear phase-shift layer depth of the baseline, D_LO = (M+1)(D_NL+1).
int lo_depth(int modes, int depth);

namespace detail {

/// NMZI pair-occupation kernels for totals s = 0..max_total.
void nmzi_kernels(int max_total, double chi1, double chi2, double phi_b,
                  std::vector<Eigen::MatrixXcd>& kernels);

/// In-place fast paths used by the training objectives.
void apply_core_inplace(const FockBasis& basis, const NmziMesh& mesh, std::span<const double> chi,
                        Eigen::VectorXcd& amps);
void apply_corrections_inplace(const FockBasis& basis, std::span<const double> theta_half,
                               Eigen::VectorXcd& amps);
void apply_lo_inplace(const FockBasis& basis, const LinOptQonn& net, std::span<const double> theta,
                      Eigen::VectorXcd& amps);
void apply_interferometer_inplace(const FockBasis& basis, std::span<const double> internal_phases,
                                  Eigen::VectorXcd& amps);

}  // namespace detail

}  // namespace qonn
