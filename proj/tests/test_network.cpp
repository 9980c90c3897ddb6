#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include <nlohmann/json.hpp>

#include "qonn/network.hpp"
#include "qonn/rng.hpp"

using namespace qonn;

namespace {

// Compositional oracle for a single NMZI on an adjacent pair:
// DC, NS(chi1) and NS(chi2) in the arms, bias phase on the first arm, DC.
StateVector nmzi_composed(const StateVector& in, const NmziParams& p, int first) {
    StateVector st = apply_two_mode(in, dc_matrix(), first);
    st = apply_ns(st, {p.chi1, first});
    st = apply_ns(st, {p.chi2, first + 1});
    st = apply_mode_phase(st, first, p.phi_b);
    return apply_two_mode(st, dc_matrix(), first);
}

StateVector random_state(const std::shared_ptr<const FockBasis>& basis, Rng& rng) {
    StateVector st(basis);
    for (int i = 0; i < basis->size(); ++i) st.amps()[i] = cplx(rng.gaussian(), rng.gaussian());
    st.amps() /= st.norm();
    return st;
}

double max_dev(const StateVector& a, const StateVector& b) {
    return (a.amps() - b.amps()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("closed-form NMZI equals the compositional pipeline") {
    Rng rng(101);
    for (int total = 0; total <= 5; ++total) {
        auto basis = FockBasis::create(2, total);
        for (int trial = 0; trial < 40; ++trial) {
            const NmziParams p{rng.uniform(0, M_PI), rng.uniform(0, M_PI),
                               rng.uniform(0, 2 * M_PI)};
            for (int idx = 0; idx < basis->size(); ++idx) {
                const StateVector in = StateVector::basis_state(basis, idx);
                CHECK(max_dev(apply_nmzi_closed(in, p, 0), nmzi_composed(in, p, 0)) < 1e-12);
            }
        }
    }
}

TEST_CASE("NMZI with zero parameters is the identity") {
    auto basis = FockBasis::create(2, 3);
    for (int idx = 0; idx < basis->size(); ++idx) {
        const StateVector in = StateVector::basis_state(basis, idx);
        CHECK(max_dev(apply_nmzi_closed(in, {0.0, 0.0, 0.0}, 0), in) < 1e-14);
    }
}

TEST_CASE("NMZI at chi = pi, phi_b = 0 acts as CZ on the Fig.-2 wiring") {
    // modes ordered so that both logical |1> rails meet on the middle pair
    auto basis = FockBasis::create(4, 2);
    const std::vector<std::vector<int>> encodings = {
        {1, 0, 0, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}, {0, 1, 1, 0}};
    const double expected[] = {1.0, 1.0, 1.0, -1.0};
    for (int k = 0; k < 4; ++k) {
        const StateVector in = StateVector::basis_state(basis, basis->index_of(encodings[k]));
        const StateVector out = apply_nmzi_closed(in, {M_PI, M_PI, 0.0}, 1);
        CHECK(std::abs(out.amps()[basis->index_of(encodings[k])] - expected[k]) < 1e-12);
        CHECK(std::abs(out.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("random NMZI on a full two-mode register matches the oracle") {
    Rng rng(55);
    auto basis = FockBasis::create(2, 4);
    const StateVector st = random_state(basis, rng);
    for (int trial = 0; trial < 30; ++trial) {
        const NmziParams p{rng.uniform(0, M_PI), rng.uniform(0, M_PI), rng.uniform(0, 2 * M_PI)};
        CHECK(max_dev(apply_nmzi_closed(st, p, 0), nmzi_composed(st, p, 0)) < 1e-12);
    }
}

TEST_CASE("brick-wall layout") {
    SUBCASE("single layer on four modes holds one offset block") {
        const NmziMesh mesh = NmziMesh::brickwall(4, 1, 0.0);
        CHECK(mesh.param_count() == 2);
        REQUIRE(mesh.blocks().size() == 1);
        CHECK(mesh.blocks()[0].first_mode == 1);
    }

    SUBCASE("layer parity alternates offset and aligned") {
        const NmziMesh mesh = NmziMesh::brickwall(6, 4, 0.3);
        CHECK(mesh.layer_blocks(1).size() == 2);  // offset: (1,2), (3,4)
        CHECK(mesh.layer_blocks(2).size() == 3);  // aligned: (0,1), (2,3), (4,5)
        CHECK(mesh.layer_blocks(3).size() == 2);
        CHECK(mesh.layer_blocks(4).size() == 3);
        CHECK(mesh.layer_blocks(1)[0].first_mode == 1);
        CHECK(mesh.layer_blocks(2)[0].first_mode == 0);
    }

    SUBCASE("enumerated trainable slots match the closed formula") {
        for (int modes : {4, 6, 8, 10}) {
            for (int depth = 1; depth <= 12; ++depth) {
                const NmziMesh mesh = NmziMesh::brickwall(modes, depth, 0.0);
                CHECK(mesh.param_count() == count_params(modes, depth, Architecture::nonlinear));
            }
        }
    }
}

TEST_CASE("core application") {
    Rng rng(77);

    SUBCASE("zero nonlinearities and zero bias give the identity") {
        auto basis = FockBasis::create(6, 3);
        const NmziMesh mesh = NmziMesh::brickwall(6, 3, 0.0);
        const StateVector st = random_state(basis, rng);
        const std::vector<double> chi(mesh.param_count(), 0.0);
        CHECK(max_dev(apply_core(st, mesh, chi), st) < 1e-12);
    }

    SUBCASE("norm is conserved for random parameters") {
        auto basis = FockBasis::create(6, 3);
        const NmziMesh mesh = NmziMesh::brickwall(6, 4, 1.1);
        const StateVector st = random_state(basis, rng);
        std::vector<double> chi(mesh.param_count());
        for (auto& c : chi) c = rng.uniform(0, M_PI);
        CHECK(std::abs(apply_core(st, mesh, chi).norm() - 1.0) < 1e-12);
    }

    SUBCASE("parameter count is enforced") {
        auto basis = FockBasis::create(4, 2);
        const NmziMesh mesh = NmziMesh::brickwall(4, 2, 0.0);
        const StateVector st = StateVector::basis_state(basis, 0);
        CHECK_THROWS_AS(apply_core(st, mesh, std::vector<double>(3, 0.0)),
                        std::invalid_argument);
    }

    SUBCASE("chi = 0 with phi_b = pi is the linear mode-swap circuit") {
        auto basis = FockBasis::create(6, 2);
        const NmziMesh mesh = NmziMesh::brickwall(6, 3, M_PI);
        const StateVector st = random_state(basis, rng);
        const StateVector fast = apply_core(st, mesh, std::vector<double>(mesh.param_count(), 0.0));

        // equivalent transfer matrix: each NMZI reduces to DC diag(-1,1) DC
        TwoModeUnitary bias = TwoModeUnitary::Identity();
        bias(0, 0) = -1.0;
        const TwoModeUnitary linear = dc_matrix() * bias * dc_matrix();
        Eigen::MatrixXcd total = Eigen::MatrixXcd::Identity(6, 6);
        for (int l = 1; l <= mesh.layers(); ++l) {
            for (const auto& block : mesh.layer_blocks(l)) {
                Eigen::MatrixXcd stage = Eigen::MatrixXcd::Identity(6, 6);
                stage.block<2, 2>(block.first_mode, block.first_mode) = linear;
                total = stage * total;
            }
        }
        CHECK(max_dev(fast, apply_multimode(st, total)) < 1e-10);
    }
}

TEST_CASE("full QONN with corrections") {
    Rng rng(31);
    auto basis = FockBasis::create(4, 2);

    SUBCASE("identity corrections and zero core act as the identity") {
        const NmziMesh mesh = NmziMesh::brickwall(4, 1, 0.0);
        const StateVector st = random_state(basis, rng);
        const std::vector<double> chi(mesh.param_count(), 0.0);
        const std::vector<double> theta(8, 0.0);
        CHECK(max_dev(apply_qonn(st, mesh, chi, theta), st) < 1e-12);
    }

    SUBCASE("corrections alone never entangle a product input") {
        const NmziMesh mesh = NmziMesh::brickwall(4, 0, 0.0);
        DualRailCodec codec(basis);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::Vector2cd q0(cplx(rng.gaussian(), rng.gaussian()),
                                cplx(rng.gaussian(), rng.gaussian()));
            Eigen::Vector2cd q1(cplx(rng.gaussian(), rng.gaussian()),
                                cplx(rng.gaussian(), rng.gaussian()));
            q0.normalize();
            q1.normalize();
            StateVector in(basis);
            for (std::uint32_t bits = 0; bits < 4; ++bits)
                in.amps()[codec.fock_index(bits)] = q0[(bits >> 1) & 1] * q1[bits & 1];

            std::vector<double> theta(8);
            for (auto& t : theta) t = rng.uniform(0, 2 * M_PI);
            const StateVector out = apply_qonn(in, mesh, {}, theta);

            // predicted output: per-qubit 2x2 rotations of the pair amplitudes
            const TwoModeUnitary u0 = mzi_matrix(theta[4], theta[5]) * mzi_matrix(theta[0], theta[1]);
            const TwoModeUnitary u1 = mzi_matrix(theta[6], theta[7]) * mzi_matrix(theta[2], theta[3]);
            const Eigen::Vector2cd r0 = u0 * q0;
            const Eigen::Vector2cd r1 = u1 * q1;
            for (std::uint32_t bits = 0; bits < 4; ++bits) {
                const cplx expected = r0[(bits >> 1) & 1] * r1[bits & 1];
                CHECK(std::abs(out.amps()[codec.fock_index(bits)] - expected) < 1e-12);
            }
        }
    }

    SUBCASE("CZ core with equal-superposition corrections prepares an entangled state") {
        // qubit 1's rails are wired (3, 2), so the logical pair meets on (1, 2)
        const NmziMesh mesh = NmziMesh::brickwall(4, 1, 0.0);
        const std::vector<double> chi = {M_PI, M_PI};
        const double t1 = 1.5 * M_PI, t2 = 0.5 * M_PI;  // equal-split rotation
        const std::vector<double> theta = {t1, t2, t1, t2, 0.0, 0.0, 0.0, 0.0};

        // logical input |00>: photon on mode 0 (qubit 0) and mode 3 (qubit 1)
        const int occ_in[] = {1, 0, 0, 1};
        const StateVector in = StateVector::basis_state(basis, basis->index_of(occ_in));
        const StateVector out = apply_qonn(in, mesh, chi, theta);

        // explicit 2-qubit construction in the swapped-rail wiring
        const TwoModeUnitary r = mzi_matrix(t1, t2);
        Eigen::Vector4cd logical = Eigen::Vector4cd::Zero();
        for (int b0 = 0; b0 < 2; ++b0)
            for (int b1 = 0; b1 < 2; ++b1)
                logical[2 * b0 + b1] = r(b0, 0) * r(b1, 0) * ((b0 == 1 && b1 == 1) ? -1.0 : 1.0);

        const auto fock_of = [&](int b0, int b1) {
            std::vector<int> occ(4, 0);
            occ[b0 == 0 ? 0 : 1] = 1;
            occ[b1 == 0 ? 3 : 2] = 1;
            return basis->index_of(occ);
        };
        cplx ip = 0.0;
        for (int b0 = 0; b0 < 2; ++b0)
            for (int b1 = 0; b1 < 2; ++b1)
                ip += std::conj(logical[2 * b0 + b1]) * out.amps()[fock_of(b0, b1)];
        CHECK(std::norm(ip) == doctest::Approx(1.0).epsilon(1e-10));

        // the prepared state is maximally entangled: reduced purity 1/2
        Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
        for (int b0 = 0; b0 < 2; ++b0)
            for (int b0p = 0; b0p < 2; ++b0p)
                for (int b1 = 0; b1 < 2; ++b1)
                    rho(b0, b0p) += logical[2 * b0 + b1] * std::conj(logical[2 * b0p + b1]);
        CHECK(std::abs((rho * rho).trace().real() - 0.5) < 1e-12);
    }

    SUBCASE("theta size is enforced") {
        const NmziMesh mesh = NmziMesh::brickwall(4, 1, 0.0);
        const StateVector st = StateVector::basis_state(basis, 0);
        CHECK_THROWS_AS(apply_qonn(st, mesh, std::vector<double>{0.0, 0.0},
                                   std::vector<double>(7, 0.0)),
                        std::invalid_argument);
    }
}

TEST_CASE("record_layer_amplitudes") {
    auto basis = FockBasis::create(4, 2);

    SUBCASE("zero depth yields no snapshots") {
        const NmziMesh mesh = NmziMesh::brickwall(4, 0, 0.0);
        const StateVector in = encode_dualrail("00", basis);
        CHECK(record_layer_amplitudes(in, mesh, {}, std::vector<double>(8, 0.0)).empty());
    }

    SUBCASE("one snapshot per layer, each of full basis length") {
        const NmziMesh mesh = NmziMesh::brickwall(4, 3, 0.4);
        const StateVector in = encode_dualrail("01", basis);
        std::vector<double> chi(mesh.param_count(), 1.0);
        const auto snaps = record_layer_amplitudes(in, mesh, chi, std::vector<double>(8, 0.0));
        REQUIRE(snaps.size() == 3);
        for (const auto& s : snaps) CHECK(s.size() == basis->size());
    }

    SUBCASE("a dual-rail input develops multi-photon weight inside the first DC column") {
        const NmziMesh mesh = NmziMesh::brickwall(4, 1, 0.0);
        // |10>_L puts photons on modes 1 and 2, the pair the offset block couples
        const StateVector in = encode_dualrail("10", basis);
        const auto snaps =
            record_layer_amplitudes(in, mesh, std::vector<double>{0.0, 0.0}, std::vector<double>(8, 0.0));
        REQUIRE(snaps.size() == 1);
        const int bunched_a = basis->index_of(std::vector<int>{0, 2, 0, 0});
        const int bunched_b = basis->index_of(std::vector<int>{0, 0, 2, 0});
        CHECK(snaps[0][bunched_a] > 0.1);
        CHECK(snaps[0][bunched_b] > 0.1);
    }
}

TEST_CASE("linear-optics baseline") {
    Rng rng(91);
    auto basis = FockBasis::create(4, 2);

    SUBCASE("parameter counts") {
        CHECK(LinOptQonn{4, 1}.param_count() == 24);
        CHECK(LinOptQonn{6, 4}.param_count() == 150);
    }

    SUBCASE("depth zero matches the permanent oracle through the Clements matrix") {
        const LinOptQonn net{4, 0};
        std::vector<double> theta(net.param_count());
        for (auto& t : theta) t = rng.uniform(0, 2 * M_PI);
        const StateVector st = random_state(basis, rng);
        const StateVector fast = apply_lo_qonn(st, net, theta);

        std::vector<double> full(16, 0.0);
        std::copy(theta.begin(), theta.end(), full.begin());  // zero output phases
        const StateVector oracle = apply_multimode(st, clements_mesh(full, 4));
        CHECK(max_dev(fast, oracle) < 1e-10);
    }

    SUBCASE("NS(pi) layers sit between the interferometers") {
        const LinOptQonn net{4, 2};
        std::vector<double> theta(net.param_count());
        for (auto& t : theta) t = rng.uniform(0, 2 * M_PI);
        const StateVector in = encode_dualrail("00", basis);
        StateVector expect = in;
        for (int l = 0; l <= 2; ++l) {
            std::vector<double> full(16, 0.0);
            std::copy(theta.begin() + 12 * l, theta.begin() + 12 * (l + 1), full.begin());
            expect = apply_multimode(expect, clements_mesh(full, 4));
            if (l < 2)
                for (int m = 0; m < 4; ++m) expect = apply_ns(expect, {M_PI, m});
        }
        CHECK(max_dev(apply_lo_qonn(in, net, theta), expect) < 1e-10);
    }

    SUBCASE("deterministic regression snapshots") {
        const LinOptQonn net{4, 1};
        const StateVector in = encode_dualrail("00", basis);

        // at zero phases every MZI is DC*DC = identity and the NS(pi) layer
        // sees only single photons, so the circuit is the identity
        const StateVector zero = apply_lo_qonn(in, net, std::vector<double>(24, 0.0));
        CHECK(max_dev(zero, in) < 1e-12);

        // frozen amplitudes from the first permanent-validated build
        std::vector<double> theta(24);
        for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = 0.1 * static_cast<double>(k + 1);
        const StateVector out = apply_lo_qonn(in, net, theta);
        CHECK(std::abs(out.norm() - 1.0) < 1e-12);
        const std::vector<std::pair<std::vector<int>, cplx>> frozen = {
            {{2, 0, 0, 0}, {-3.64152864426237399e-01, -5.11713293739107303e-02}},
            {{1, 1, 0, 0}, {-2.30112213413375483e-01, 8.61449093916892283e-02}},
            {{1, 0, 1, 0}, {-1.48364092233981143e-01, -6.34738475082077036e-01}},
            {{1, 0, 0, 1}, {1.12587443886542807e-01, -1.60501724097111942e-01}},
            {{0, 2, 0, 0}, {1.81048726608383587e-01, -7.37285404266083827e-02}},
            {{0, 1, 1, 0}, {1.31298520807896252e-01, -6.01936473860899268e-02}},
            {{0, 1, 0, 1}, {7.10591809666214214e-02, 1.91850761371599454e-01}},
            {{0, 0, 2, 0}, {-3.27571863438183120e-01, 1.34150653052306279e-01}},
            {{0, 0, 1, 1}, {-6.06869905886162145e-02, 1.71264419398392681e-01}},
            {{0, 0, 0, 2}, {2.22464364663855552e-01, 1.79783958700833635e-01}},
        };
        for (const auto& [occ, amp] : frozen)
            CHECK(std::abs(out.amps()[basis->index_of(occ)] - amp) < 1e-13);
    }

    SUBCASE("wrong phase count is rejected") {
        const LinOptQonn net{4, 1};
        const StateVector st = StateVector::basis_state(basis, 0);
        CHECK_THROWS_AS(apply_lo_qonn(st, net, std::vector<double>(23, 0.0)),
                        std::invalid_argument);
    }

    SUBCASE("snapshots before each static nonlinear layer") {
        const LinOptQonn net{4, 2};
        std::vector<double> theta(net.param_count());
        for (auto& t : theta) t = rng.uniform(0, 2 * M_PI);
        const StateVector in = encode_dualrail("00", basis);
        const auto snaps = record_lo_layer_amplitudes(in, net, theta);
        CHECK(snaps.size() == 2);
    }
}

TEST_CASE("accounting formulas") {
    CHECK(count_params(8, 9, Architecture::nonlinear) == 62);
    CHECK(count_params(6, 4, Architecture::linear_optics) == 150);
    CHECK(count_params(10, 7, Architecture::nonlinear) == 62);
    CHECK(lo_depth(4, 1) == 10);
    CHECK(lo_depth(6, 4) == 35);
    CHECK(lo_depth(10, 1) == 22);
}

TEST_CASE("mesh serialization round-trips") {
    const NmziMesh mesh = NmziMesh::brickwall(6, 3, 0.25, true);
    nlohmann::json j;
    to_json(j, mesh);
    CHECK(j.at("modes") == 6);
    CHECK(j.at("depth") == 3);
    CHECK(j.at("corrections") == true);
    const NmziMesh back = mesh_from_json(j);
    CHECK(back.param_count() == mesh.param_count());
    CHECK(back.phi_b() == mesh.phi_b());
}
