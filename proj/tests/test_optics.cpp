#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qonn/optics.hpp"
#include "qonn/optimizer.hpp"
#include "qonn/rng.hpp"

using namespace qonn;

namespace {

Eigen::MatrixXcd random_unitary(int n, Rng& rng) {
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cplx(rng.gaussian(), rng.gaussian());
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
    return q;
}

// factorial-sum permanent oracle, O(n!)
cplx permanent_naive(const Eigen::MatrixXcd& a) {
    const int n = static_cast<int>(a.rows());
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    cplx total = 0.0;
    do {
        cplx prod = 1.0;
        for (int i = 0; i < n; ++i) prod *= a(i, perm[i]);
        total += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

StateVector two_photon_state(const std::shared_ptr<const FockBasis>& basis,
                             const std::vector<int>& occ) {
    return StateVector::basis_state(basis, basis->index_of(occ));
}

}  // namespace

TEST_CASE("directional coupler matrix") {
    const TwoModeUnitary dc = dc_matrix();
    const Eigen::Vector2cd out = dc * Eigen::Vector2cd(1.0, 0.0);
    CHECK(std::abs(out(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(out(1) - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(((dc * dc) - TwoModeUnitary::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("Hong-Ou-Mandel through both Fock lifts") {
    auto basis = FockBasis::create(2, 2);
    const StateVector in = two_photon_state(basis, {1, 1});

    const StateVector via_pair = apply_two_mode(in, dc_matrix(), 0);
    Eigen::MatrixXcd full = dc_matrix();
    const StateVector via_permanent = apply_multimode(in, full);

    const double r = 1.0 / std::sqrt(2.0);
    const int i20 = basis->index_of(std::vector<int>{2, 0});
    const int i02 = basis->index_of(std::vector<int>{0, 2});
    const int i11 = basis->index_of(std::vector<int>{1, 1});
    for (const StateVector* st : {&via_pair, &via_permanent}) {
        CHECK(std::abs(st->amps()[i20] - r) < 1e-12);
        CHECK(std::abs(st->amps()[i02] + r) < 1e-12);
        CHECK(std::abs(st->amps()[i11]) < 1e-12);
    }
}

TEST_CASE("mzi matrix special points") {
    CHECK((mzi_matrix(0.0, 0.0) - TwoModeUnitary::Identity()).cwiseAbs().maxCoeff() < 1e-15);

    TwoModeUnitary swapish;
    swapish << 0.0, -1.0, -1.0, 0.0;  // e^{i pi/2} [[0, i], [i, 0]]
    CHECK((mzi_matrix(0.0, M_PI) - swapish).cwiseAbs().maxCoeff() < 1e-12);

    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const TwoModeUnitary u = mzi_matrix(rng.uniform(0, 2 * M_PI), rng.uniform(0, 2 * M_PI));
        CHECK((u * u.adjoint() - TwoModeUnitary::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("ns gate") {
    auto basis = FockBasis::create(2, 2);

    SUBCASE("chi = 0 is the identity, single photons untouched at any chi") {
        auto single = FockBasis::create(4, 2);
        const StateVector in = StateVector::basis_state(single, single->index_of(std::vector<int>{1, 0, 1, 0}));
        const StateVector out = apply_ns(in, {2.1317, 0});
        CHECK((out.amps() - in.amps()).cwiseAbs().maxCoeff() == 0.0);
        const StateVector zero = apply_ns(two_photon_state(basis, {2, 0}), {0.0, 0});
        CHECK(zero.amps()[basis->index_of(std::vector<int>{2, 0})] == cplx(1.0));
    }

    SUBCASE("chi = pi flips the sign of a doubly occupied mode") {
        const StateVector out = apply_ns(two_photon_state(basis, {2, 0}), {M_PI, 0});
        CHECK(std::abs(out.amps()[basis->index_of(std::vector<int>{2, 0})] + 1.0) < 1e-15);
    }

    SUBCASE("ns gates on different modes commute") {
        Rng rng(5);
        StateVector st(basis);
        for (int i = 0; i < basis->size(); ++i) st.amps()[i] = cplx(rng.gaussian(), rng.gaussian());
        st.amps() /= st.norm();
        const StateVector ab = apply_ns(apply_ns(st, {0.7, 0}), {1.9, 1});
        const StateVector ba = apply_ns(apply_ns(st, {1.9, 1}), {0.7, 0});
        CHECK((ab.amps() - ba.amps()).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("two-mode lift agrees with the permanent lift") {
    Rng rng(42);
    for (int modes = 2; modes <= 6; ++modes) {
        for (int photons = 1; photons <= 4; ++photons) {
            if (modes > 4 && photons > 3) continue;
            auto basis = FockBasis::create(modes, photons);
            StateVector st(basis);
            for (int i = 0; i < basis->size(); ++i)
                st.amps()[i] = cplx(rng.gaussian(), rng.gaussian());
            st.amps() /= st.norm();

            const TwoModeUnitary u = random_unitary(2, rng);
            const int first = static_cast<int>(rng.below(modes - 1));
            const StateVector fast = apply_two_mode(st, u, first);

            Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(modes, modes);
            v.block<2, 2>(first, first) = u;
            const StateVector oracle = apply_multimode(st, v);

            CHECK((fast.amps() - oracle.amps()).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(std::abs(fast.norm() - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("identity lifts") {
    auto basis = FockBasis::create(3, 2);
    StateVector st(basis);
    st.amps()[0] = cplx(0.6, 0.0);
    st.amps()[2] = cplx(0.0, 0.8);
    CHECK((apply_two_mode(st, TwoModeUnitary::Identity(), 0).amps() - st.amps()).cwiseAbs().maxCoeff() <
          1e-15);
    CHECK((apply_multimode(st, Eigen::MatrixXcd::Identity(3, 3)).amps() - st.amps())
              .cwiseAbs()
              .maxCoeff() < 1e-15);
}

TEST_CASE("multimode application is a homomorphism") {
    Rng rng(7);
    auto basis = FockBasis::create(4, 2);
    StateVector st(basis);
    for (int i = 0; i < basis->size(); ++i) st.amps()[i] = cplx(rng.gaussian(), rng.gaussian());
    st.amps() /= st.norm();

    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXcd a = random_unitary(4, rng);
        const Eigen::MatrixXcd b = random_unitary(4, rng);
        const StateVector chained = apply_multimode(apply_multimode(st, b), a);
        const StateVector product = apply_multimode(st, Eigen::MatrixXcd(a * b));
        CHECK((chained.amps() - product.amps()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(product.norm() - 1.0) < 1e-10);
    }
}

TEST_CASE("multimode rejects non-unitary input") {
    auto basis = FockBasis::create(3, 1);
    const StateVector st = StateVector::basis_state(basis, 0);
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(3, 3);
    bad(0, 0) = 1.1;
    CHECK_THROWS_AS(apply_multimode(st, bad), std::invalid_argument);
}

TEST_CASE("permanent") {
    Eigen::MatrixXcd one(1, 1);
    one(0, 0) = cplx(2.5, -1.0);
    CHECK(permanent(one) == cplx(2.5, -1.0));

    Eigen::MatrixXcd ones = Eigen::MatrixXcd::Ones(2, 2);
    CHECK(std::abs(permanent(ones) - 2.0) < 1e-15);

    Rng rng(13);
    Eigen::MatrixXcd a(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = cplx(rng.gaussian(), rng.gaussian());
    CHECK(std::abs(permanent(a) - permanent_naive(a)) < 1e-12);

    Eigen::MatrixXcd big = Eigen::MatrixXcd::Identity(13, 13);
    CHECK_THROWS_AS(permanent(big), std::invalid_argument);
}

TEST_CASE("clements mesh structure") {
    std::vector<double> zero(4, 0.0);
    CHECK((clements_mesh(zero, 2) - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <
          1e-15);

    CHECK_THROWS_AS(clements_mesh(std::vector<double>(15, 0.0), 4), std::invalid_argument);
    CHECK_NOTHROW(clements_mesh(std::vector<double>(16, 0.0), 4));

    Rng rng(3);
    std::vector<double> phases(36);
    for (auto& p : phases) p = rng.uniform(0, 2 * M_PI);
    const Eigen::MatrixXcd mesh = clements_mesh(phases, 6);
    CHECK((mesh * mesh.adjoint() - Eigen::MatrixXcd::Identity(6, 6)).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("clements mesh is expressive enough for a random 3-mode unitary") {
    Rng rng(29);
    const Eigen::MatrixXcd target = random_unitary(3, rng);

    BoundedProblem problem;
    problem.lower.assign(9, 0.0);
    problem.upper.assign(9, 2 * M_PI);
    problem.budget = 40000;
    problem.objective = [&target](std::span<const double> phases) {
        const Eigen::MatrixXcd mesh = clements_mesh(phases, 3);
        return (mesh - target).squaredNorm();
    };
    OptimizerConfig config;
    config.runs = 8;
    config.budget = 40000;
    config.seed = 17;
    config.workers = 1;
    const TrainResult result = train(problem, config);
    CHECK(result.best().best_cost < 1e-12);  // squared Frobenius distance < (1e-6)^2
}
