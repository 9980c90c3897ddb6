#include "qonn/optics.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace qonn {

namespace detail {

double factorial(int n) {
    static const auto table = [] {
        std::array<double, 32> t{};
        t[0] = 1.0;
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<double>(i);
        return t;
    }();
    return table.at(static_cast<std::size_t>(n));
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return factorial(n) / (factorial(k) * factorial(n - k));
}

Eigen::MatrixXcd two_mode_kernel(const TwoModeUnitary& u, int pair_total) {
    const int s = pair_total;
    Eigen::MatrixXcd kernel = Eigen::MatrixXcd::Zero(s + 1, s + 1);
    // powers of the four entries up to s
    std::vector<cplx> p00(s + 1), p10(s + 1), p01(s + 1), p11(s + 1);
    p00[0] = p10[0] = p01[0] = p11[0] = 1.0;
    for (int k = 1; k <= s; ++k) {
        p00[k] = p00[k - 1] * u(0, 0);
        p10[k] = p10[k - 1] * u(1, 0);
        p01[k] = p01[k - 1] * u(0, 1);
        p11[k] = p11[k - 1] * u(1, 1);
    }
    // (a1+)^n (a2+)^m -> prod over photons of the two input columns
    for (int n = 0; n <= s; ++n) {
        const int m = s - n;
        for (int p = 0; p <= s; ++p) {
            const int q = s - p;
            cplx sum = 0.0;
            const int jlo = std::max(0, p - m), jhi = std::min(n, p);
            for (int j = jlo; j <= jhi; ++j) {
                sum += binomial(n, j) * binomial(m, p - j) * p00[j] * p10[n - j] * p01[p - j] *
                       p11[m - p + j];
            }
            kernel(p, n) = sum * std::sqrt(factorial(p) * factorial(q) /
                                           (factorial(n) * factorial(m)));
        }
    }
    return kernel;
}

void apply_pair_kernels(const FockBasis& basis, int first_mode,
                        std::span<const Eigen::MatrixXcd> kernels_by_total,
                        Eigen::VectorXcd& amps) {
    const PairPlan& plan = basis.pair_plan(first_mode);
    thread_local std::vector<cplx> buf;
    const int orbits = plan.orbit_count();
    for (int o = 0; o < orbits; ++o) {
        const std::int32_t begin = plan.orbit_offsets[o];
        const int s = plan.orbit_offsets[o + 1] - begin - 1;
        if (s == 0) continue;  // photon-conserving elements act trivially on an empty pair
        const Eigen::MatrixXcd& kernel = kernels_by_total[s];
        buf.resize(s + 1);
        const std::int32_t* members = plan.members.data() + begin;
        for (int p = 0; p <= s; ++p) buf[p] = amps[members[p]];
        for (int pp = 0; pp <= s; ++pp) {
            cplx acc = 0.0;
            for (int p = 0; p <= s; ++p) acc += kernel(pp, p) * buf[p];
            amps[members[pp]] = acc;
        }
    }
}

void apply_ns_inplace(const FockBasis& basis, int mode, double chi, Eigen::VectorXcd& amps) {
    const int dim = basis.size();
    for (int i = 0; i < dim; ++i) {
        const int n = basis.occupation(i)[mode];
        if (n >= 2) amps[i] *= std::polar(1.0, chi * 0.5 * n * (n - 1));
    }
}

}  // namespace detail

TwoModeUnitary dc_matrix() {
    TwoModeUnitary u;
    const double r = 1.0 / std::sqrt(2.0);
    u << r, r, r, -r;
    return u;
}

TwoModeUnitary mzi_matrix(double theta1, double theta2) {
    const TwoModeUnitary dc = dc_matrix();
    TwoModeUnitary shift1 = TwoModeUnitary::Identity();
    TwoModeUnitary shift2 = TwoModeUnitary::Identity();
    shift1(0, 0) = std::polar(1.0, theta1);
    shift2(0, 0) = std::polar(1.0, theta2);
    return dc * shift2 * dc * shift1;
}

StateVector apply_ns(const StateVector& state, const NsGate& gate) {
    if (gate.mode < 0 || gate.mode >= state.basis()->modes())
        throw std::out_of_range("apply_ns: mode out of range");
    StateVector out = state;
    detail::apply_ns_inplace(*out.basis(), gate.mode, gate.chi, out.amps());
    return out;
}

StateVector apply_mode_phase(const StateVector& state, int mode, double phase) {
    if (mode < 0 || mode >= state.basis()->modes())
        throw std::out_of_range("apply_mode_phase: mode out of range");
    StateVector out = state;
    const auto& basis = *out.basis();
    for (int i = 0; i < basis.size(); ++i) {
        const int n = basis.occupation(i)[mode];
        if (n != 0) out.amps()[i] *= std::polar(1.0, phase * n);
    }
    return out;
}

StateVector apply_two_mode(const StateVector& state, const TwoModeUnitary& u, int first_mode) {
    StateVector out = state;
    const int photons = out.basis()->photons();
    std::vector<Eigen::MatrixXcd> kernels(photons + 1);
    for (int s = 0; s <= photons; ++s) kernels[s] = detail::two_mode_kernel(u, s);
    detail::apply_pair_kernels(*out.basis(), first_mode, kernels, out.amps());
    return out;
}

cplx permanent(const Eigen::MatrixXcd& a) {
    const int n = static_cast<int>(a.rows());
    if (a.cols() != n) throw std::invalid_argument("permanent: matrix must be square");
    if (n > 12) throw std::invalid_argument("permanent: dimension > 12 rejected");
    if (n == 0) return 1.0;
    // Ryser with Gray-code updates of the running row sums:
    // perm(A) = sum_{S != 0} (-1)^{n-|S|} prod_r sum_{c in S} a_{rc}.
    std::vector<cplx> row_sums(n, 0.0);
    cplx total = 0.0;
    std::uint32_t gray = 0;
    const std::uint32_t count = 1u << n;
    for (std::uint32_t k = 1; k < count; ++k) {
        const std::uint32_t next = k ^ (k >> 1);
        const std::uint32_t changed = next ^ gray;
        const int col = std::countr_zero(changed);
        const double dir = (next & changed) ? 1.0 : -1.0;
        for (int r = 0; r < n; ++r) row_sums[r] += dir * a(r, col);
        gray = next;
        cplx prod = 1.0;
        for (int r = 0; r < n; ++r) prod *= row_sums[r];
        total += ((n - std::popcount(next)) % 2 == 0) ? prod : -prod;
    }
    return total;
}

StateVector apply_multimode(const StateVector& state, const TransferMatrix& v) {
    const int modes = state.basis()->modes();
    if (v.rows() != modes || v.cols() != modes)
        throw std::invalid_argument("apply_multimode: dimension mismatch");
    const double dev = (v * v.adjoint() - Eigen::MatrixXcd::Identity(modes, modes)).cwiseAbs().maxCoeff();
    if (dev > 1e-8) throw std::invalid_argument("apply_multimode: matrix is not unitary");

    const auto& basis = *state.basis();
    const int dim = basis.size();
    const int photons = basis.photons();
    StateVector out(state.basis());

    // Submatrix of V with rows repeated per output occupation and columns per
    // input occupation.
    Eigen::MatrixXcd sub(photons, photons);
    std::vector<int> in_cols(photons), out_rows(photons);
    for (int si = 0; si < dim; ++si) {
        if (state.amps()[si] == cplx(0.0)) continue;
        const auto s = basis.occupation(si);
        int c = 0;
        double s_fact = 1.0;
        for (int m = 0; m < modes; ++m) {
            s_fact *= detail::factorial(s[m]);
            for (int r = 0; r < s[m]; ++r) in_cols[c++] = m;
        }
        for (int ti = 0; ti < dim; ++ti) {
            const auto t = basis.occupation(ti);
            int r = 0;
            double t_fact = 1.0;
            for (int m = 0; m < modes; ++m) {
                t_fact *= detail::factorial(t[m]);
                for (int k = 0; k < t[m]; ++k) out_rows[r++] = m;
            }
            for (int i = 0; i < photons; ++i)
                for (int j = 0; j < photons; ++j) sub(i, j) = v(out_rows[i], in_cols[j]);
            const cplx amp = permanent(sub) / std::sqrt(t_fact * s_fact);
            out.amps()[ti] += amp * state.amps()[si];
        }
    }
    return out;
}

std::vector<int> clements_column_pairs(int modes, int column) {
    std::vector<int> firsts;
    for (int first = column % 2; first + 1 < modes; first += 2) firsts.push_back(first);
    return firsts;
}

TransferMatrix clements_mesh(std::span<const double> phases, int modes) {
    const std::size_t expected = static_cast<std::size_t>(modes) * modes;
    if (phases.size() != expected)
        throw std::invalid_argument("clements_mesh: expected M^2 = " + std::to_string(expected) +
                                    " phases, got " + std::to_string(phases.size()));
    TransferMatrix total = TransferMatrix::Identity(modes, modes);
    std::size_t k = 0;
    for (int column = 0; column < modes; ++column) {
        for (int first : clements_column_pairs(modes, column)) {
            const TwoModeUnitary u = mzi_matrix(phases[k], phases[k + 1]);
            k += 2;
            TransferMatrix stage = TransferMatrix::Identity(modes, modes);
            stage.block<2, 2>(first, first) = u;
            total = stage * total;
        }
    }
    for (int m = 0; m < modes; ++m) total.row(m) *= std::polar(1.0, phases[k + m]);
    return total;
}

}  // namespace qonn
