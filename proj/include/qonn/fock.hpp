#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace qonn {

using cplx = std::complex<double>;

/// Grouping of basis states into orbits of a fixed adjacent mode pair.
/// Within an orbit all modes outside the pair agree and the pair total
/// s = t_i + t_{i+1} is constant; members[offset(o) + p] is the basis index
/// of the state whose first pair mode holds p photons (p = 0..s).
struct PairPlan {
    std::vector<std::int32_t> orbit_offsets;  // size = orbit count + 1
    std::vector<std::int32_t> members;        // size = basis dimension

    int orbit_count() const { return static_cast<int>(orbit_offsets.size()) - 1; }
};

/// Enumeration of the N-photon M-mode Fock space in descending lexicographic
/// occupation order, with index lookup and per-pair application plans.
class FockBasis {
public:
    static constexpr std::size_t kDefaultDimCap = 200000;

    /// Enumerates the basis. Throws std::invalid_argument on bad shape and
    /// std::length_error when the dimension would exceed `dim_cap`.
    static std::shared_ptr<const FockBasis> create(int modes, int photons,
                                                   std::size_t dim_cap = kDefaultDimCap);

    int modes() const { return modes_; }
    int photons() const { return photons_; }
    int size() const { return static_cast<int>(occupations_.size()) / std::max(modes_, 1); }

    std::span<const int> occupation(int index) const {
        return {occupations_.data() + static_cast<std::size_t>(index) * modes_,
                static_cast<std::size_t>(modes_)};
    }

    /// Index of an occupation vector; throws std::out_of_range if absent.
    int index_of(std::span<const int> occupation) const;

    /// Plan for the adjacent pair (first_mode, first_mode + 1), 0-based.
    const PairPlan& pair_plan(int first_mode) const;

private:
    FockBasis() = default;

    int modes_ = 0;
    int photons_ = 0;
    std::vector<int> occupations_;          // dim x modes, row-major
    std::vector<PairPlan> pair_plans_;      // modes - 1 entries
    // lookup keyed by packed occupation (4 bits per mode when it fits)
    std::vector<std::pair<std::uint64_t, std::int32_t>> packed_index_;
    bool packable_ = false;
    std::uint64_t pack(std::span<const int> occupation) const;
};

std::size_t fock_dimension(int modes, int photons);

/// Complex amplitudes over a FockBasis.
class StateVector {
public:
    explicit StateVector(std::shared_ptr<const FockBasis> basis);
    static StateVector basis_state(std::shared_ptr<const FockBasis> basis, int index);

    const std::shared_ptr<const FockBasis>& basis() const { return basis_; }
    Eigen::VectorXcd& amps() { return amps_; }
    const Eigen::VectorXcd& amps() const { return amps_; }
    double norm() const { return amps_.norm(); }

private:
    std::shared_ptr<const FockBasis> basis_;
    Eigen::VectorXcd amps_;
};

/// <a|b>; throws std::invalid_argument on basis mismatch.
cplx overlap(const StateVector& a, const StateVector& b);

/// Dual-rail codec: qubit q lives on modes (2q, 2q+1); |0>_L puts the photon
/// in mode 2q. Bit strings are parsed most-significant qubit first.
class DualRailCodec {
public:
    explicit DualRailCodec(std::shared_ptr<const FockBasis> basis);

    int qubits() const { return qubits_; }
    const std::shared_ptr<const FockBasis>& basis() const { return basis_; }

    /// Basis index of bit pattern b (qubit 0 = most significant bit).
    int fock_index(std::uint32_t bits) const { return dual_rail_indices_[bits]; }
    /// Inverse of fock_index; throws std::out_of_range for non dual-rail states.
    std::uint32_t bits_of(int fock_index) const;

    std::span<const int> dual_rail_indices() const { return dual_rail_indices_; }

private:
    std::shared_ptr<const FockBasis> basis_;
    int qubits_ = 0;
    std::vector<int> dual_rail_indices_;  // 2^N entries
};

StateVector encode_dualrail(std::string_view bits, std::shared_ptr<const FockBasis> basis);

struct DualRailProjection {
    Eigen::VectorXcd qubit_amps;  // 2^N renormalized amplitudes
    double weight = 0.0;          // squared norm of the dual-rail component
};

/// Renormalized restriction to the dual-rail subspace. Throws
/// std::domain_error when the subspace weight is below 1e-14.
DualRailProjection project_dualrail(const StateVector& state);

/// JSON array of {occupation, re, im} in basis order.
nlohmann::json amplitude_dump(const StateVector& state);
StateVector state_from_dump(const nlohmann::json& dump, std::shared_ptr<const FockBasis> basis);

}  // namespace qonn
