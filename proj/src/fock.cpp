#include "qonn/fock.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace qonn {

std::size_t fock_dimension(int modes, int photons) {
    // C(M+N-1, N) with overflow care; desk-scale sizes only.
    long double dim = 1.0L;
    for (int k = 1; k <= photons; ++k) {
        dim = dim * (modes - 1 + k) / k;
        if (dim > 1e18L) throw std::length_error("fock_dimension: overflow");
    }
    return static_cast<std::size_t>(std::llroundl(dim));
}

std::shared_ptr<const FockBasis> FockBasis::create(int modes, int photons, std::size_t dim_cap) {
    if (modes < 1) throw std::invalid_argument("FockBasis: modes must be >= 1");
    if (photons < 0) throw std::invalid_argument("FockBasis: photons must be >= 0");
    const std::size_t dim = fock_dimension(modes, photons);
    if (dim > dim_cap) {
        throw std::length_error("FockBasis: dimension " + std::to_string(dim) +
                                " exceeds cap " + std::to_string(dim_cap));
    }

    auto basis = std::shared_ptr<FockBasis>(new FockBasis());
    basis->modes_ = modes;
    basis->photons_ = photons;
    basis->occupations_.reserve(dim * modes);

    // Descending lexicographic enumeration: mode 0 takes N..0, recurse on the rest.
    std::vector<int> occ(modes, 0);
    const auto emit = [&](auto&& self, int mode, int remaining) -> void {
        if (mode == modes - 1) {
            occ[mode] = remaining;
            basis->occupations_.insert(basis->occupations_.end(), occ.begin(), occ.end());
            return;
        }
        for (int n = remaining; n >= 0; --n) {
            occ[mode] = n;
            self(self, mode + 1, remaining - n);
        }
    };
    emit(emit, 0, photons);

    basis->packable_ = modes <= 16 && photons <= 15;
    basis->packed_index_.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        basis->packed_index_.emplace_back(basis->pack(basis->occupation(static_cast<int>(i))),
                                          static_cast<std::int32_t>(i));
    }
    std::sort(basis->packed_index_.begin(), basis->packed_index_.end());

    // Pair plans for every adjacent pair. A state whose second pair mode is
    // empty is the representative of its orbit.
    basis->pair_plans_.resize(modes > 1 ? modes - 1 : 0);
    std::vector<int> probe(modes);
    for (int pair = 0; pair + 1 < modes; ++pair) {
        PairPlan& plan = basis->pair_plans_[pair];
        plan.orbit_offsets.push_back(0);
        plan.members.reserve(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            const auto t = basis->occupation(static_cast<int>(i));
            if (t[pair + 1] != 0) continue;
            const int total = t[pair];
            std::copy(t.begin(), t.end(), probe.begin());
            for (int p = 0; p <= total; ++p) {
                probe[pair] = p;
                probe[pair + 1] = total - p;
                plan.members.push_back(basis->index_of(probe));
            }
            plan.orbit_offsets.push_back(static_cast<std::int32_t>(plan.members.size()));
        }
    }
    return basis;
}

std::uint64_t FockBasis::pack(std::span<const int> occupation) const {
    std::uint64_t key = 0;
    for (int m = 0; m < modes_; ++m) key = (key << 4) | static_cast<std::uint64_t>(occupation[m]);
    return key;
}

int FockBasis::index_of(std::span<const int> occupation) const {
    if (static_cast<int>(occupation.size()) != modes_)
        throw std::invalid_argument("index_of: wrong mode count");
    if (packable_) {
        const std::uint64_t key = pack(occupation);
        auto it = std::lower_bound(packed_index_.begin(), packed_index_.end(),
                                   std::make_pair(key, std::int32_t{0}));
        if (it != packed_index_.end() && it->first == key) return it->second;
        throw std::out_of_range("index_of: occupation not in basis");
    }
    // unpackable sizes exceed the default cap anyway; linear scan as fallback
    const int dim = size();
    for (int i = 0; i < dim; ++i) {
        const auto t = this->occupation(i);
        if (std::equal(t.begin(), t.end(), occupation.begin())) return i;
    }
    throw std::out_of_range("index_of: occupation not in basis");
}

const PairPlan& FockBasis::pair_plan(int first_mode) const {
    if (first_mode < 0 || first_mode + 1 >= modes_)
        throw std::out_of_range("pair_plan: pair out of range");
    return pair_plans_[first_mode];
}

StateVector::StateVector(std::shared_ptr<const FockBasis> basis)
    : basis_(std::move(basis)), amps_(Eigen::VectorXcd::Zero(basis_->size())) {}

StateVector StateVector::basis_state(std::shared_ptr<const FockBasis> basis, int index) {
    StateVector st(std::move(basis));
    if (index < 0 || index >= st.basis()->size())
        throw std::out_of_range("basis_state: index out of range");
    st.amps()[index] = 1.0;
    return st;
}

cplx overlap(const StateVector& a, const StateVector& b) {
    if (a.basis() != b.basis()) throw std::invalid_argument("overlap: basis mismatch");
    return a.amps().dot(b.amps());  // Eigen dot conjugates the left argument
}

DualRailCodec::DualRailCodec(std::shared_ptr<const FockBasis> basis) : basis_(std::move(basis)) {
    const int modes = basis_->modes();
    if (modes % 2 != 0 || basis_->photons() != modes / 2)
        throw std::invalid_argument("DualRailCodec: basis must have M = 2N");
    qubits_ = modes / 2;
    dual_rail_indices_.resize(std::size_t{1} << qubits_);
    std::vector<int> occ(modes, 0);
    for (std::uint32_t bits = 0; bits < dual_rail_indices_.size(); ++bits) {
        for (int q = 0; q < qubits_; ++q) {
            const int bit = (bits >> (qubits_ - 1 - q)) & 1;
            occ[2 * q] = bit ? 0 : 1;
            occ[2 * q + 1] = bit ? 1 : 0;
        }
        dual_rail_indices_[bits] = basis_->index_of(occ);
    }
}

std::uint32_t DualRailCodec::bits_of(int fock_index) const {
    const auto t = basis_->occupation(fock_index);
    std::uint32_t bits = 0;
    for (int q = 0; q < qubits_; ++q) {
        const int a = t[2 * q], b = t[2 * q + 1];
        if (a + b != 1) throw std::out_of_range("bits_of: not a dual-rail state");
        bits = (bits << 1) | static_cast<std::uint32_t>(b);
    }
    return bits;
}

StateVector encode_dualrail(std::string_view bits, std::shared_ptr<const FockBasis> basis) {
    const int n = static_cast<int>(bits.size());
    if (basis->modes() != 2 * n || basis->photons() != n)
        throw std::invalid_argument("encode_dualrail: basis shape must be M = 2N for N = |bits|");
    std::uint32_t value = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') throw std::invalid_argument("encode_dualrail: bits must be 0/1");
        value = (value << 1) | static_cast<std::uint32_t>(c - '0');
    }
    DualRailCodec codec(basis);
    return StateVector::basis_state(std::move(basis), codec.fock_index(value));
}

DualRailProjection project_dualrail(const StateVector& state) {
    DualRailCodec codec(state.basis());
    DualRailProjection proj;
    proj.qubit_amps.resize(std::int64_t{1} << codec.qubits());
    for (std::uint32_t bits = 0; bits < proj.qubit_amps.size(); ++bits)
        proj.qubit_amps[bits] = state.amps()[codec.fock_index(bits)];
    proj.weight = proj.qubit_amps.squaredNorm();
    if (proj.weight < 1e-14)
        throw std::domain_error("project_dualrail: dual-rail weight below 1e-14");
    proj.qubit_amps /= std::sqrt(proj.weight);
    return proj;
}

nlohmann::json amplitude_dump(const StateVector& state) {
    nlohmann::json out = nlohmann::json::array();
    const auto& basis = *state.basis();
    for (int i = 0; i < basis.size(); ++i) {
        const auto t = basis.occupation(i);
        out.push_back({{"occupation", std::vector<int>(t.begin(), t.end())},
                       {"re", state.amps()[i].real()},
                       {"im", state.amps()[i].imag()}});
    }
    return out;
}

StateVector state_from_dump(const nlohmann::json& dump, std::shared_ptr<const FockBasis> basis) {
    StateVector st(basis);
    for (const auto& entry : dump) {
        const auto occ = entry.at("occupation").get<std::vector<int>>();
        const int idx = basis->index_of(occ);
        st.amps()[idx] = cplx(entry.at("re").get<double>(), entry.at("im").get<double>());
    }
    const double n = st.norm();
    if (n < 1e-9) throw std::invalid_argument("state_from_dump: near-zero norm");
    st.amps() /= n;
    return st;
}

}  // namespace qonn
