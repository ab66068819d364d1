#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "qbench/operators.hpp"

using namespace qbench;

namespace {

Eigen::VectorXd dense_spectrum(const SparseOperator& op) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(op.to_dense_real());
    return es.eigenvalues();
}

} // namespace

TEST_CASE("bose-hubbard 2 bosons on 2 sites, U=0: eigenvalues -2, 0, 2") {
    const auto basis = enumerate_basis(LatticeSpec::bose_hubbard_chain(2, 2));
    const auto h = build_bose_hubbard(basis, 1.0, 0.0);
    const auto e = dense_spectrum(h);
    REQUIRE(e.size() == 3);
    CHECK(e(0) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(e(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e(2) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("unity filling has zero interaction energy") {
    const auto basis = enumerate_basis(LatticeSpec::bose_hubbard_chain(5, 5));
    const auto h = build_bose_hubbard(basis, 0.37, 2.87);
    const auto i = *basis.index_of(Configuration{1, 1, 1, 1, 1});
    CHECK(std::abs(h.to_dense()(i, i)) < 1e-14);
}

TEST_CASE("fermi-hubbard single up fermion on 2 sites: eigenvalues -1, 1") {
    const auto basis = enumerate_basis(LatticeSpec::fermi_hubbard_chain(2, 1, 0));
    const auto h = build_fermi_hubbard(basis, 1.0, 3.3);
    const auto e = dense_spectrum(h);
    REQUIRE(e.size() == 2);
    CHECK(e(0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(e(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("anti-ferromagnetic state has no doublons") {
    const auto basis = enumerate_basis(LatticeSpec::fermi_hubbard_chain(4, 2, 2));
    const auto h = build_fermi_hubbard(basis, 1.0, 1.0);
    // |up, down, up, down>: ups at sites 0 and 2, downs at 1 and 3.
    const auto i = *basis.index_of(Configuration{1, 0, 1, 0, 0, 1, 0, 1});
    CHECK(std::abs(h.to_dense()(i, i)) < 1e-14);
}

TEST_CASE("trapped ion 2 qubits, h_z=0: sigma^x sigma^x spectrum") {
    const auto basis = enumerate_basis(LatticeSpec::spin_chain(2));
    const auto h = build_trapped_ion(basis, 1.0, 0.0, 1.0);
    const auto e = dense_spectrum(h);
    REQUIRE(e.size() == 4);
    CHECK(e(0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(e(1) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(e(2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e(3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero disorder reproduces the clean trapped-ion model") {
    const auto basis = enumerate_basis(LatticeSpec::spin_chain(5));
    const auto clean = build_trapped_ion(basis, 1.0, 0.7, 1.0);
    const std::vector<double> zeros(5, 0.0);
    const auto disordered = build_trapped_ion(basis, 1.0, 0.7, 1.0, &zeros);
    CHECK((clean.to_dense() - disordered.to_dense()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(build_trapped_ion(basis, 1.0, 0.7, -1.0), ValidationError);
}

TEST_CASE("trapped-ion field rescaling matches a hand evaluation") {
    // N=3, alpha=1: sum_{i>j} 1/|i-j| = 1 + 1 + 1/2 = 2.5, h_z = 0.7*2.5/3.
    CHECK(trapped_ion_field_from_rescaled(3, 0.7, 1.0) ==
          doctest::Approx(0.7 * 2.5 / 3.0).epsilon(1e-14));
}

TEST_CASE("two-site PXP: eigenvalues -sqrt(2), 0, sqrt(2)") {
    const auto basis = enumerate_basis(LatticeSpec::pxp_chain(2));
    REQUIRE(basis.dimension() == 3);
    const auto h = build_pxp(basis, 1.0, 0.0);
    const auto e = dense_spectrum(h);
    CHECK(e(0) == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
    CHECK(e(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e(2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("PXP at zero detuning has a particle-hole symmetric spectrum") {
    const auto basis = enumerate_basis(LatticeSpec::pxp_chain(10));
    const auto e = dense_spectrum(build_pxp(basis, 1.0, 0.0));
    const auto d = e.size();
    for (std::int64_t i = 0; i < d; ++i)
        CHECK(std::abs(e(i) + e(d - 1 - i)) < 1e-10);
}

TEST_CASE("hermiticity of every builder") {
    const auto bh = enumerate_basis(LatticeSpec::bose_hubbard_chain(4, 3));
    CHECK(build_bose_hubbard(bh, 1.0, 0.5).hermiticity_violation() <= 1e-12);
    const auto fh = enumerate_basis(LatticeSpec::fermi_hubbard_chain(4, 2, 1));
    CHECK(build_fermi_hubbard(fh, 1.0, 1.0).hermiticity_violation() <= 1e-12);
    const auto sc = enumerate_basis(LatticeSpec::spin_chain(6));
    CHECK(build_trapped_ion(sc, 1.0, 0.7, 1.0).hermiticity_violation() <= 1e-12);
    const auto px = enumerate_basis(LatticeSpec::pxp_grid(3, 3));
    CHECK(build_pxp(px, 1.0, 0.7).hermiticity_violation() <= 1e-12);
}

TEST_CASE("dense-oracle equivalence for a small Bose-Hubbard chain") {
    // Literal dense construction from operator definitions.
    const auto basis = enumerate_basis(LatticeSpec::bose_hubbard_chain(3, 2));
    const double omega = 0.8, u = 0.4;
    const std::int64_t d = basis.dimension();
    MatrixXd dense = MatrixXd::Zero(d, d);
    for (std::int64_t i = 0; i < d; ++i) {
        const auto& z = basis.configuration_of(i);
        for (int s = 0; s < 3; ++s) dense(i, i) += 0.5 * u * z[s] * (z[s] - 1.0);
        for (int s = 0; s + 1 < 3; ++s) {
            if (z[s + 1] > 0) { // b_s^dagger b_{s+1}
                Configuration w = z;
                w[s + 1] -= 1;
                w[s] += 1;
                dense(*basis.index_of(w), i) -=
                    omega * std::sqrt(double(z[s + 1]) * (z[s] + 1.0));
            }
            if (z[s] > 0) { // b_{s+1}^dagger b_s
                Configuration w = z;
                w[s] -= 1;
                w[s + 1] += 1;
                dense(*basis.index_of(w), i) -=
                    omega * std::sqrt(double(z[s]) * (z[s + 1] + 1.0));
            }
        }
    }
    const auto h = build_bose_hubbard(basis, omega, u);
    CHECK((h.to_dense_real() - dense).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("trapped-ion commutes with global spin parity") {
    const auto basis = enumerate_basis(LatticeSpec::spin_chain(6));
    const auto h = build_trapped_ion(basis, 1.0, 0.7, 1.0);
    VectorXd parity(basis.dimension());
    for (std::int64_t i = 0; i < basis.dimension(); ++i) {
        int ones = 0;
        for (auto b : basis.configuration_of(i)) ones += b;
        parity(i) = ones % 2 ? -1.0 : 1.0;
    }
    const MatrixXd hd = h.to_dense_real();
    const MatrixXd commutator =
        hd * parity.asDiagonal() - parity.asDiagonal() * hd;
    CHECK(commutator.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("jump operators") {
    const auto bh = enumerate_basis(LatticeSpec::bose_hubbard_chain(4, 4));
    const auto ops = build_jump_operators(bh, ErrorModel::site_occupation);
    REQUIRE(ops.size() == 4);
    const auto unity = *bh.index_of(Configuration{1, 1, 1, 1});
    for (const auto& op : ops) CHECK(op.to_dense()(unity, unity).real() == doctest::Approx(1.0));

    const auto sc = enumerate_basis(LatticeSpec::spin_chain(3));
    const auto spin_ops = build_jump_operators(sc, ErrorModel::spin_flip_dephasing);
    REQUIRE(spin_ops.size() == 6); // sigma^x then sigma^z per site
    // sigma^x_j permutes basis states: index of z maps to z with bit j flipped.
    for (int j = 0; j < 3; ++j) {
        for (std::int64_t i = 0; i < sc.dimension(); ++i) {
            Configuration z = sc.configuration_of(i);
            z[j] ^= 1;
            const auto target = *sc.index_of(z);
            CHECK(spin_ops[j].to_dense()(target, i).real() == doctest::Approx(1.0));
        }
    }

    const auto fh = enumerate_basis(LatticeSpec::fermi_hubbard_chain(3, 2, 2));
    const auto fh_ops = build_jump_operators(fh, ErrorModel::site_occupation);
    for (const auto& op : fh_ops) {
        const auto diag = op.to_dense().diagonal();
        for (std::int64_t i = 0; i < diag.size(); ++i) {
            CHECK(diag(i).real() >= 0.0);
            CHECK(diag(i).real() <= 2.0);
        }
    }

    CHECK_THROWS_AS(build_jump_operators(bh, ErrorModel::dephasing), ValidationError);
    CHECK_THROWS_AS(error_model_from_name("bogus"), ValidationError);
}

TEST_CASE("disordered hoppings follow the 0.2 m ensemble") {
    const auto omegas = disordered_hoppings(200, 11);
    for (const double w : omegas) {
        const double m = w / 0.2;
        CHECK(std::abs(m - std::round(m)) < 1e-12);
        CHECK(m >= 1.0);
        CHECK(m <= 10.0);
    }
}

TEST_CASE("builders reject mismatched bases") {
    const auto bh = enumerate_basis(LatticeSpec::bose_hubbard_chain(3, 2));
    CHECK_THROWS_AS(build_fermi_hubbard(bh, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(build_pxp(bh, 1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(build_trapped_ion(bh, 1.0, 0.7, 1.0), ValidationError);
}
