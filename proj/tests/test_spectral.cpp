#include <doctest.h>

#include "qbench/krylov.hpp"
#include "qbench/rng.hpp"
#include "qbench/spectral.hpp"

using namespace qbench;

namespace {

QuantumState unity_filling(const Basis& basis) {
    Configuration z(basis.spec().length, 1);
    return QuantumState::basis_state(basis, *basis.index_of(z));
}

QuantumState haar_state(std::int64_t d, std::uint64_t seed) {
    Rng rng(seed);
    VectorXcd amps(d);
    for (std::int64_t i = 0; i < d; ++i) amps(i) = Complex(rng.normal(), rng.normal());
    amps /= amps.norm();
    return QuantumState{std::move(amps), 0.0, nullptr};
}

} // namespace

TEST_CASE("diagonalize reproduces the 3-level Bose-Hubbard oracle") {
    const auto basis = enumerate_basis(LatticeSpec::bose_hubbard_chain(2, 2));
    const auto sd = diagonalize(build_bose_hubbard(basis, 1.0, 0.0));
    CHECK(sd.eigenvalues()(0) == doctest::Approx(-2.0));
    CHECK(sd.eigenvalues()(1) == doctest::Approx(0.0));
    CHECK(sd.eigenvalues()(2) == doctest::Approx(2.0));
    // Orthonormality of the overlap table.
    const MatrixXd gram = sd.eigenvectors().transpose() * sd.eigenvectors();
    CHECK((gram - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("diagonal Hamiltonian: overlap table is a signed permutation") {
    const auto basis = enumerate_basis(LatticeSpec::spin_chain(4));
    std::vector<Eigen::Triplet<Complex>> t;
    for (std::int64_t i = 0; i < basis.dimension(); ++i)
        t.emplace_back(i, i, Complex(0.25 * double(i), 0.0));
    const SparseOperator h(basis.dimension(), t, true);
    const auto sd = diagonalize(h);
    for (std::int64_t c = 0; c < sd.dimension(); ++c) {
        int nonzero = 0;
        for (std::int64_t r = 0; r < sd.dimension(); ++r)
            if (std::abs(sd.eigenvectors()(r, c)) > 1e-12) ++nonzero;
        CHECK(nonzero == 1);
    }
}

TEST_CASE("diagonalize refuses above the dense threshold") {
    const auto basis = enumerate_basis(LatticeSpec::spin_chain(8));
    const auto h = build_trapped_ion(basis, 1.0, 0.7, 1.0);
    CHECK_THROWS_AS(diagonalize(h, 1e-9, 100), ComputeError);
}

TEST_CASE("PXP at zero detuning pairs E with -E in degeneracy-respecting fashion") {
    const auto basis = enumerate_basis(LatticeSpec::pxp_chain(8));
    const auto sd = diagonalize(build_pxp(basis, 1.0, 0.0));
    const auto d = sd.dimension();
    for (std::int64_t i = 0; i < d; ++i)
        CHECK(std::abs(sd.eigenvalues()(i) + sd.eigenvalues()(d - 1 - i)) < 1e-10);
}

TEST_CASE("evolve_exact basics") {
    const auto basis = enumerate_basis(LatticeSpec::bose_hubbard_chain(4, 4));
    const auto sd = diagonalize(build_bose_hubbard(basis, 1.0, 0.5));
    const auto psi0 = unity_filling(basis);

    const auto same = evolve_exact(sd, psi0, 0.0);
    CHECK((same.amplitudes - psi0.amplitudes).norm() < 1e-12);

    const auto later = evolve_exact(sd, psi0, 7.3);
    CHECK(std::abs(later.norm() - 1.0) < 1e-10);

    // Eigenstate input only picks up a global phase.
    VectorXcd eig(sd.dimension());
    eig.real() = sd.eigenvectors().col(2);
    eig.imag().setZero();
    const auto evolved = evolve_exact(sd, QuantumState{eig, 0.0, nullptr}, 3.1);
    CHECK((evolved.amplitudes.cwiseAbs() - eig.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-12);

    // Energy conservation.
    const MatrixXd hd = build_bose_hubbard(basis, 1.0, 0.5).to_dense_real();
    const double e0 = (psi0.amplitudes.adjoint() * (hd * psi0.amplitudes)).value().real();
    const double e1 = (later.amplitudes.adjoint() * (hd * later.amplitudes)).value().real();
    CHECK(std::abs(e0 - e1) < 1e-8);
}

TEST_CASE("krylov agrees with exact evolution") {
    const auto basis = enumerate_basis(LatticeSpec::bose_hubbard_chain(6, 6)); // D = 462
    const auto h = build_bose_hubbard(basis, 1.0, 0.5);
    const auto sd = diagonalize(h);
    const auto psi0 = unity_filling(basis);

    const auto exact = evolve_exact(sd, psi0, 10.0);
    const auto krylov = evolve_krylov(h, psi0, 10.0, 1e-9);
    CHECK((exact.amplitudes - krylov.amplitudes).norm() <= 1e-8);

    const auto identity = evolve_krylov(h, psi0, 0.0, 1e-9);
    CHECK((identity.amplitudes - psi0.amplitudes).norm() == 0.0);

    // Energy conservation over a long stretch.
    const auto far = evolve_krylov(h, psi0, 50.0, 1e-9);
    const MatrixXd hd = h.to_dense_real();
    const double e0 = (psi0.amplitudes.adjoint() * (hd * psi0.amplitudes)).value().real();
    const double e1 = (far.amplitudes.adjoint() * (hd * far.amplitudes)).value().real();
    CHECK(std::abs(e0 - e1) < 1e-8);
    CHECK(std::abs(far.norm() - 1.0) < 1e-9);
}

TEST_CASE("outcome distributions") {
    const auto basis = enumerate_basis(LatticeSpec::spin_chain(6));
    const auto psi = QuantumState::basis_state(basis, 11);
    const auto p = outcome_distribution(psi);
    CHECK(p.values(11) == doctest::Approx(1.0));
    CHECK(p.values.sum() == doctest::Approx(1.0));

    VectorXcd uniform = VectorXcd::Constant(64, Complex(1.0 / 8.0, 0.0));
    const auto pu = outcome_distribution(QuantumState{uniform, 0.0, nullptr});
    for (std::int64_t z = 0; z < 64; ++z) CHECK(pu.values(z) == doctest::Approx(1.0 / 64.0));

    const auto ph = outcome_distribution(haar_state(512, 3));
    CHECK(ph.values.sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("time-averaged distribution: frozen diagonal Hamiltonian") {
    const auto basis = enumerate_basis(LatticeSpec::spin_chain(5));
    std::vector<Eigen::Triplet<Complex>> t;
    for (std::int64_t i = 0; i < basis.dimension(); ++i)
        t.emplace_back(i, i, Complex(0.3 * double(i), 0.0));
    const SparseOperator h(basis.dimension(), t, true);
    const auto sd = diagonalize(h);
    const auto psi0 = haar_state(basis.dimension(), 5);
    const auto pavg = time_averaged_distribution(sd, psi0);
    const auto p0 = outcome_distribution(psi0);
    CHECK((pavg.values - p0.values).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(pavg.sum() == doctest::Approx(1.0).epsilon(1e-10));

    const auto finite = finite_time_average(sd, psi0, 37.0, 0.25);
    CHECK((finite.values - p0.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("finite-time average converges to the spectral average") {
    const auto basis = enumerate_basis(LatticeSpec::bose_hubbard_chain(6, 6));
    const auto sd = diagonalize(build_bose_hubbard(basis, 1.0, 0.5));
    const auto psi0 = unity_filling(basis);
    const auto pavg = time_averaged_distribution(sd, psi0);
    CHECK(pavg.sum() == doctest::Approx(1.0).epsilon(1e-10));

    double last = 1e9;
    for (const double window : {50.0, 200.0, 500.0}) {
        const auto finite = finite_time_average(sd, psi0, window, 0.1);
        const double gap = (finite.values - pavg.values).cwiseAbs().maxCoeff();
        CHECK(gap < last);
        last = gap;
        if (window == 500.0) CHECK(gap < 5e-3);
    }
}

TEST_CASE("degeneracy grouping changes p_avg for the Fermi-Hubbard model") {
    const auto basis = enumerate_basis(LatticeSpec::fermi_hubbard_chain(4, 2, 2));
    const auto sd = diagonalize(build_fermi_hubbard(basis, 1.0, 1.0));
    bool has_degeneracy = false;
    for (const auto& [b, e] : sd.degeneracy_groups())
        if (e - b > 1) has_degeneracy = true;
    REQUIRE(has_degeneracy);

    // Antiferromagnetic initial state.
    const auto i0 = *basis.index_of(Configuration{1, 0, 1, 0, 0, 1, 0, 1});
    const auto psi0 = QuantumState::basis_state(basis, i0);
    const auto pavg = time_averaged_distribution(sd, psi0);

    // Naive singleton formula ignores the projector structure.
    const VectorXcd b = sd.eigenbasis_overlaps(psi0.amplitudes);
    VectorXd naive = VectorXd::Zero(sd.dimension());
    for (std::int64_t e = 0; e < sd.dimension(); ++e)
        naive += sd.eigenvectors().col(e).cwiseAbs2() * std::norm(b(e));
    CHECK((pavg.values - naive).cwiseAbs().maxCoeff() > 0.0);
    CHECK(pavg.sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("rescale and the second-moment normalization") {
    const auto basis = enumerate_basis(LatticeSpec::bose_hubbard_chain(5, 5));
    const auto sd = diagonalize(build_bose_hubbard(basis, 1.0, 0.5));
    const auto psi0 = unity_filling(basis);
    const auto pavg = time_averaged_distribution(sd, psi0);

    SUBCASE("p = p_avg gives p_tilde = 1 and Z = 1") {
        const auto rd = rescale(pavg, pavg);
        CHECK((rd.p_tilde.values.array() - 1.0).abs().maxCoeff() < 1e-12);
        CHECK(rd.normalization == doctest::Approx(1.0));
    }

    SUBCASE("weighted mean of p_tilde is exactly 1") {
        const auto p = outcome_distribution(evolve_exact(sd, psi0, 13.0));
        const auto rd = rescale(p, pavg);
        CHECK(pavg.values.dot(rd.p_tilde.values) == doctest::Approx(1.0).epsilon(1e-10));
    }

    SUBCASE("Haar states against a uniform average give Z near 2") {
        const std::int64_t d = 1024;
        OutcomeDistribution uniform;
        uniform.values = VectorXd::Constant(d, 1.0 / double(d));
        uniform.kind = DistributionKind::time_averaged;
        double z_mean = 0.0;
        const int trials = 16;
        for (int k = 0; k < trials; ++k)
            z_mean += rescale(outcome_distribution(haar_state(d, 100 + k)), uniform).normalization;
        z_mean /= trials;
        CHECK(std::abs(z_mean - 2.0) < 0.1);
    }

    SUBCASE("support mismatch is an error") {
        OutcomeDistribution p, pavg2;
        p.values = VectorXd::Zero(4);
        p.values(2) = 1.0;
        pavg2.values = VectorXd::Zero(4);
        pavg2.values(0) = 1.0;
        CHECK_THROWS_AS(rescale(p, pavg2), ComputeError);
    }
}

TEST_CASE("diagonal ensemble purity") {
    const auto basis = enumerate_basis(LatticeSpec::bose_hubbard_chain(5, 5));
    const auto sd = diagonalize(build_bose_hubbard(basis, 1.0, 0.5));

    VectorXcd eig(sd.dimension());
    eig.real() = sd.eigenvectors().col(3);
    eig.imag().setZero();
    CHECK(diagonal_ensemble_purity(sd, QuantumState{eig, 0.0, nullptr}) ==
          doctest::Approx(1.0).epsilon(1e-10));

    // Uniform overlap with all levels -> 1/D.
    VectorXcd flat(sd.dimension());
    flat.real() = sd.eigenvectors() * VectorXd::Constant(sd.dimension(),
                                                         1.0 / std::sqrt(double(sd.dimension())));
    flat.imag().setZero();
    CHECK(diagonal_ensemble_purity(sd, QuantumState{flat, 0.0, nullptr}) ==
          doctest::Approx(1.0 / double(sd.dimension())).epsilon(1e-8));
}
