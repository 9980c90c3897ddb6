#include "qonn/network.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace qonn {

NmziMesh NmziMesh::brickwall(int modes, int layers, double phi_b, bool corrections) {
    if (modes < 2 || modes % 2 != 0)
        throw std::invalid_argument("NmziMesh: modes must be even and >= 2");
    if (layers < 0) throw std::invalid_argument("NmziMesh: layers must be >= 0");
    NmziMesh mesh;
    mesh.modes_ = modes;
    mesh.layers_ = layers;
    mesh.phi_b_ = phi_b;
    mesh.corrections_ = corrections;
    mesh.layer_offsets_.push_back(0);
    for (int l = 1; l <= layers; ++l) {
        const bool offset = (l % 2 == 1);
        const int first0 = offset ? 1 : 0;
        const int count = offset ? modes / 2 - 1 : modes / 2;
        for (int i = 0; i < count; ++i)
            mesh.blocks_.push_back({l, first0 + 2 * i, phi_b});
        mesh.layer_offsets_.push_back(static_cast<int>(mesh.blocks_.size()));
    }
    return mesh;
}

std::span<const NmziBlock> NmziMesh::layer_blocks(int layer_1based) const {
    if (layer_1based < 1 || layer_1based > layers_)
        throw std::out_of_range("layer_blocks: layer out of range");
    const int b = layer_offsets_[layer_1based - 1];
    const int e = layer_offsets_[layer_1based];
    return {blocks_.data() + b, static_cast<std::size_t>(e - b)};
}

void to_json(nlohmann::json& j, const NmziMesh& mesh) {
    nlohmann::json layout = nlohmann::json::array();
    for (int l = 1; l <= mesh.layers(); ++l) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& block : mesh.layer_blocks(l)) row.push_back(block.first_mode);
        layout.push_back(row);
    }
    j = {{"modes", mesh.modes()},
         {"depth", mesh.layers()},
         {"phi_b", mesh.phi_b()},
         {"layout", layout},
         {"corrections", mesh.corrections()}};
}

NmziMesh mesh_from_json(const nlohmann::json& j) {
    NmziMesh mesh = NmziMesh::brickwall(j.at("modes").get<int>(), j.at("depth").get<int>(),
                                        j.at("phi_b").get<double>(),
                                        j.value("corrections", true));
    if (j.contains("layout")) {
        nlohmann::json expect;
        to_json(expect, mesh);
        if (expect.at("layout") != j.at("layout"))
            throw std::invalid_argument("mesh_from_json: layout does not match brick-wall rule");
    }
    return mesh;
}

void to_json(nlohmann::json& j, const LinOptQonn& net) {
    j = {{"modes", net.modes}, {"depth", net.depth}, {"architecture", "linear-optics"}};
}

namespace detail {

void nmzi_kernels(int max_total, double chi1, double chi2, double phi_b,
                  std::vector<Eigen::MatrixXcd>& kernels) {
    kernels.resize(max_total + 1);
    for (int s = 0; s <= max_total; ++s) {
        Eigen::MatrixXcd& k = kernels[s];
        k.resize(s + 1, s + 1);
        const double scale = std::pow(0.5, s);
        for (int n = 0; n <= s; ++n) {
            const int m = s - n;
            // amplitudes after the first DC, with nonlinear and bias phases
            // attached to the arm occupations (p, q)
            for (int pt = 0; pt <= s; ++pt) {
                const int qt = s - pt;
                cplx acc = 0.0;
                for (int p = 0; p <= s; ++p) {
                    const int q = s - p;
                    double first = 0.0;
                    const int jlo = std::max(0, p - m), jhi = std::min(n, p);
                    for (int j = jlo; j <= jhi; ++j) {
                        const double term = binomial(n, j) * binomial(m, p - j);
                        first += ((m - p + j) % 2 == 0) ? term : -term;
                    }
                    if (first == 0.0) continue;
                    double second = 0.0;
                    const int klo = std::max(0, pt - q), khi = std::min(p, pt);
                    for (int kk = klo; kk <= khi; ++kk) {
                        const double term = binomial(p, kk) * binomial(q, pt - kk);
                        second += ((q - pt + kk) % 2 == 0) ? term : -term;
                    }
                    if (second == 0.0) continue;
                    const double phase = 0.5 * chi1 * p * (p - 1) + 0.5 * chi2 * q * (q - 1) +
                                         phi_b * p;
                    acc += first * second * std::polar(1.0, phase);
                }
                k(pt, n) = acc * scale *
                           std::sqrt(factorial(pt) * factorial(qt) / (factorial(n) * factorial(m)));
            }
        }
    }
}

void apply_core_inplace(const FockBasis& basis, const NmziMesh& mesh, std::span<const double> chi,
                        Eigen::VectorXcd& amps) {
    if (static_cast<int>(chi.size()) != mesh.param_count())
        throw std::invalid_argument("apply_core: expected " + std::to_string(mesh.param_count()) +
                                    " nonlinearities, got " + std::to_string(chi.size()));
    thread_local std::vector<Eigen::MatrixXcd> kernels;
    const int photons = basis.photons();
    std::size_t k = 0;
    for (const auto& block : mesh.blocks()) {
        nmzi_kernels(photons, chi[k], chi[k + 1], block.phi_b, kernels);
        k += 2;
        apply_pair_kernels(basis, block.first_mode, kernels, amps);
    }
}

void apply_corrections_inplace(const FockBasis& basis, std::span<const double> theta_half,
                               Eigen::VectorXcd& amps) {
    thread_local std::vector<Eigen::MatrixXcd> kernels;
    const int photons = basis.photons();
    const int qubits = basis.modes() / 2;
    for (int q = 0; q < qubits; ++q) {
        const TwoModeUnitary u = mzi_matrix(theta_half[2 * q], theta_half[2 * q + 1]);
        kernels.resize(photons + 1);
        for (int s = 0; s <= photons; ++s) kernels[s] = two_mode_kernel(u, s);
        apply_pair_kernels(basis, 2 * q, kernels, amps);
    }
}

void apply_interferometer_inplace(const FockBasis& basis, std::span<const double> internal_phases,
                                  Eigen::VectorXcd& amps) {
    thread_local std::vector<Eigen::MatrixXcd> kernels;
    const int modes = basis.modes();
    const int photons = basis.photons();
    std::size_t k = 0;
    for (int column = 0; column < modes; ++column) {
        for (int first : clements_column_pairs(modes, column)) {
            const TwoModeUnitary u = mzi_matrix(internal_phases[k], internal_phases[k + 1]);
            k += 2;
            kernels.resize(photons + 1);
            for (int s = 0; s <= photons; ++s) kernels[s] = two_mode_kernel(u, s);
            apply_pair_kernels(basis, first, kernels, amps);
        }
    }
}

void apply_lo_inplace(const FockBasis& basis, const LinOptQonn& net, std::span<const double> theta,
                      Eigen::VectorXcd& amps) {
    if (static_cast<int>(theta.size()) != net.param_count())
        throw std::invalid_argument("apply_lo_qonn: expected " +
                                    std::to_string(net.param_count()) + " phases, got " +
                                    std::to_string(theta.size()));
    const int per_block = net.modes * (net.modes - 1);
    for (int l = 0; l <= net.depth; ++l) {
        apply_interferometer_inplace(basis, theta.subspan(l * per_block, per_block), amps);
        if (l < net.depth) {
            for (int m = 0; m < net.modes; ++m) apply_ns_inplace(basis, m, M_PI, amps);
        }
    }
}

}  // namespace detail

StateVector apply_nmzi_closed(const StateVector& state, const NmziParams& params, int first_mode) {
    StateVector out = state;
    std::vector<Eigen::MatrixXcd> kernels;
    detail::nmzi_kernels(out.basis()->photons(), params.chi1, params.chi2, params.phi_b, kernels);
    detail::apply_pair_kernels(*out.basis(), first_mode, kernels, out.amps());
    return out;
}

StateVector apply_core(const StateVector& state, const NmziMesh& mesh,
                       std::span<const double> chi) {
    if (state.basis()->modes() != mesh.modes())
        throw std::invalid_argument("apply_core: mode count mismatch");
    StateVector out = state;
    detail::apply_core_inplace(*out.basis(), mesh, chi, out.amps());
    return out;
}

StateVector apply_qonn(const StateVector& state, const NmziMesh& mesh, std::span<const double> chi,
                       std::span<const double> theta) {
    const int modes = state.basis()->modes();
    if (modes != mesh.modes()) throw std::invalid_argument("apply_qonn: mode count mismatch");
    if (modes != 2 * state.basis()->photons())
        throw std::invalid_argument("apply_qonn: corrections need M = 2N");
    if (static_cast<int>(theta.size()) != 2 * modes)
        throw std::invalid_argument("apply_qonn: expected 4N correction phases");
    StateVector out = state;
    detail::apply_corrections_inplace(*out.basis(), theta.subspan(0, modes), out.amps());
    detail::apply_core_inplace(*out.basis(), mesh, chi, out.amps());
    detail::apply_corrections_inplace(*out.basis(), theta.subspan(modes, modes), out.amps());
    return out;
}

std::vector<Eigen::VectorXd> record_layer_amplitudes(const StateVector& state, const NmziMesh& mesh,
                                                     std::span<const double> chi,
                                                     std::span<const double> theta) {
    const int modes = mesh.modes();
    StateVector work = state;
    if (!theta.empty())
        detail::apply_corrections_inplace(*work.basis(), theta.subspan(0, modes), work.amps());
    std::vector<Eigen::VectorXd> snapshots;
    const TwoModeUnitary dc = dc_matrix();
    std::size_t k = 0;
    for (int l = 1; l <= mesh.layers(); ++l) {
        for (const auto& block : mesh.layer_blocks(l))
            work = apply_two_mode(work, dc, block.first_mode);
        snapshots.push_back(work.amps().cwiseAbs());
        for (const auto& block : mesh.layer_blocks(l)) {
            work = apply_ns(work, {chi[k], block.first_mode});
            work = apply_ns(work, {chi[k + 1], block.first_mode + 1});
            work = apply_mode_phase(work, block.first_mode, block.phi_b);
            k += 2;
            work = apply_two_mode(work, dc, block.first_mode);
        }
    }
    return snapshots;
}

StateVector apply_lo_qonn(const StateVector& state, const LinOptQonn& net,
                          std::span<const double> theta) {
    if (state.basis()->modes() != net.modes)
        throw std::invalid_argument("apply_lo_qonn: mode count mismatch");
    StateVector out = state;
    detail::apply_lo_inplace(*out.basis(), net, theta, out.amps());
    return out;
}

std::vector<Eigen::VectorXd> record_lo_layer_amplitudes(const StateVector& state,
                                                        const LinOptQonn& net,
                                                        std::span<const double> theta) {
    if (static_cast<int>(theta.size()) != net.param_count())
        throw std::invalid_argument("record_lo_layer_amplitudes: wrong parameter count");
    StateVector work = state;
    std::vector<Eigen::VectorXd> snapshots;
    const int per_block = net.modes * (net.modes - 1);
    for (int l = 0; l <= net.depth; ++l) {
        detail::apply_interferometer_inplace(*work.basis(), theta.subspan(l * per_block, per_block),
                                             work.amps());
        if (l < net.depth) {
            snapshots.push_back(work.amps().cwiseAbs());
            for (int m = 0; m < net.modes; ++m)
                detail::apply_ns_inplace(*work.basis(), m, M_PI, work.amps());
        }
    }
    return snapshots;
}

int count_params(int modes, int depth, Architecture kind) {
    if (depth < 0) throw std::invalid_argument("count_params: depth must be >= 0");
    if (kind == Architecture::nonlinear) {
        if (modes < 4 || modes % 2 != 0)
            throw std::invalid_argument("count_params: nonlinear needs even modes >= 4");
        return depth * (modes - 2) + 2 * (depth / 2);
    }
    return (depth + 1) * modes * (modes - 1);
}

int lo_depth(int modes, int depth) {
    if (modes < 2) throw std::invalid_argument("lo_depth: modes must be >= 2");
    return (modes + 1) * (depth + 1);
}

}  // namespace qonn
