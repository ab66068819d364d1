#include <doctest.h>

#include <cmath>

#include "qbench/estimators.hpp"
#include "qbench/rng.hpp"
#include "qbench/trajectory.hpp"

using namespace qbench;

namespace {

struct NoiseFixture {
    Basis basis;
    SparseOperator h;
    SpectralData sd;
    QuantumState psi0;
    std::vector<SparseOperator> jumps;

    NoiseFixture(int sites, int bosons, double u)
        : basis(enumerate_basis(LatticeSpec::bose_hubbard_chain(sites, bosons))),
          h(build_bose_hubbard(basis, 1.0, u)),
          sd(diagonalize(h)),
          psi0(QuantumState::basis_state(basis, *basis.index_of(Configuration(sites, 1)))),
          jumps(build_jump_operators(basis, ErrorModel::site_occupation)) {}

    TrajectorySpec spec(double gamma, std::vector<double> times, std::uint64_t seed) const {
        TrajectorySpec s;
        s.jump_operators = &jumps;
        s.gamma = gamma;
        s.t_final = times.empty() ? 0.0 : times.back();
        s.sample_times = std::move(times);
        s.seed = seed;
        return s;
    }
};

} // namespace

TEST_CASE("gamma = 0 reproduces exact evolution on the same code path") {
    NoiseFixture fx(5, 5, 0.5);
    const auto spec = fx.spec(0.0, {3.0, 7.0, 11.0}, 1);
    const auto result = simulate_trajectory(&fx.sd, nullptr, fx.psi0, spec);
    REQUIRE(result.states.size() == 3);
    CHECK(result.jump_log.empty());
    for (std::size_t i = 0; i < 3; ++i) {
        const auto exact = evolve_exact(fx.sd, fx.psi0, spec.sample_times[i]);
        CHECK((result.states[i].amplitudes - exact.amplitudes).norm() < 1e-12);
        CHECK(result.ideal_overlap[i] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("diagonal jump on its eigenstate leaves the state unchanged") {
    NoiseFixture fx(4, 4, 0.5);
    // n_j |1,1,1,1> = |1,1,1,1> exactly.
    for (const auto& op : fx.jumps) {
        VectorXcd kicked = op.apply(fx.psi0.amplitudes);
        kicked /= kicked.norm();
        CHECK((kicked - fx.psi0.amplitudes).norm() < 1e-14);
    }
    // Trajectory variant: jumps packed into a vanishing window, so every
    // jump acts on a state still O(dt) from the eigenstate.
    TrajectorySpec spec = fx.spec(1e6, {1e-5}, 3);
    const auto result = simulate_trajectory(&fx.sd, nullptr, fx.psi0, spec);
    REQUIRE(!result.jump_log.empty());
    CHECK(result.ideal_overlap[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("jump times are deterministic given the seed") {
    NoiseFixture fx(4, 4, 0.5);
    const auto spec = fx.spec(0.3, {5.0, 10.0}, 99);
    const auto a = simulate_trajectory(&fx.sd, nullptr, fx.psi0, spec);
    const auto b = simulate_trajectory(&fx.sd, nullptr, fx.psi0, spec);
    REQUIRE(a.jump_log.size() == b.jump_log.size());
    for (std::size_t i = 0; i < a.jump_log.size(); ++i) {
        CHECK(a.jump_log[i].time == b.jump_log[i].time);
        CHECK(a.jump_log[i].operator_index == b.jump_log[i].operator_index);
    }
    for (std::size_t i = 0; i + 1 < a.jump_log.size(); ++i)
        CHECK(a.jump_log[i].time <= a.jump_log[i + 1].time);
}

TEST_CASE("normalisation of states and ensemble distributions") {
    NoiseFixture fx(5, 5, 0.5);
    std::vector<TrajectoryResult> results;
    for (int k = 0; k < 40; ++k) {
        auto spec = fx.spec(0.2, {4.0, 8.0}, Rng::substream(7, k));
        results.push_back(simulate_trajectory(&fx.sd, nullptr, fx.psi0, spec));
    }
    for (const auto& r : results)
        for (const auto& s : r.states) CHECK(std::abs(s.norm() - 1.0) < 1e-9);
    const auto q = ensemble_distribution(results, 1);
    CHECK(q.sum() == doctest::Approx(1.0).epsilon(1e-9));
    const auto f = ensemble_fidelity(results);
    for (const double v : f) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("zero-jump fraction follows the Poisson survival law") {
    NoiseFixture fx(4, 4, 0.5);
    const double gamma = 0.25, t = 6.0;
    auto spec = fx.spec(gamma, {t}, 0);
    const auto ensemble = run_trajectory_ensemble(fx.sd, fx.psi0, spec, 2000);
    const double expected = std::exp(-gamma * t);
    const double sigma = std::sqrt(expected * (1.0 - expected) / 2000.0);
    const double measured =
        double(ensemble.zero_jump_trajectories) / double(ensemble.n_trajectories);
    CHECK(std::abs(measured - expected) <= 3.0 * sigma);
}

TEST_CASE("ensemble fidelity stays above the survival bound at small rates") {
    NoiseFixture fx(5, 5, 0.5);
    const double gamma = 0.02;
    auto spec = fx.spec(gamma, {2.0, 5.0, 8.0}, 5);
    const auto ensemble = run_trajectory_ensemble(fx.sd, fx.psi0, spec, 500);
    for (std::size_t i = 0; i < spec.sample_times.size(); ++i)
        CHECK(ensemble.fidelity[i] >= 0.9 * std::exp(-gamma * spec.sample_times[i]));
}

TEST_CASE("ensemble q self-converges with trajectory count") {
    NoiseFixture fx(6, 6, 0.5);
    auto spec = fx.spec(0.05, {8.0}, 12);
    const auto small = run_trajectory_ensemble(fx.sd, fx.psi0, spec, 500);
    const auto large = run_trajectory_ensemble(fx.sd, fx.psi0, spec, 2000);
    const double gap = (small.q.col(0) - large.q.col(0)).cwiseAbs().maxCoeff();
    // Monte Carlo error scale ~ max(q)/sqrt(n): generous multiple.
    const double scale = large.q.col(0).maxCoeff() / std::sqrt(500.0);
    CHECK(gap < 5.0 * scale);
    CHECK(small.q.col(0).sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single error state") {
    NoiseFixture fx(5, 5, 0.5);
    const auto n2 = site_number_operator(fx.basis, 2);

    // Identity error keeps fidelity exactly one.
    std::vector<Eigen::Triplet<Complex>> t;
    for (std::int64_t i = 0; i < fx.basis.dimension(); ++i)
        t.emplace_back(i, i, Complex(1.0, 0.0));
    const SparseOperator identity(fx.basis.dimension(), t, true);
    const auto same = single_error_state(fx.sd, fx.psi0, identity, 3.0, 9.0);
    const auto ideal = evolve_exact(fx.sd, fx.psi0, 9.0);
    CHECK(std::norm((ideal.amplitudes.adjoint() * same.amplitudes).value()) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // Fidelity is constant after the error (unitarity).
    double first = -1.0;
    for (const double time : {6.0, 9.0, 14.0, 21.0}) {
        const auto err = single_error_state(fx.sd, fx.psi0, n2, 5.0, time);
        const auto ref = evolve_exact(fx.sd, fx.psi0, time);
        const double f = std::norm((ref.amplitudes.adjoint() * err.amplitudes).value());
        if (first < 0.0)
            first = f;
        else
            CHECK(f == doctest::Approx(first).epsilon(1e-10));
    }
    CHECK_THROWS_AS(single_error_state(fx.sd, fx.psi0, n2, 5.0, 3.0), ValidationError);
}

TEST_CASE("strong noise averages the speckle away") {
    NoiseFixture fx(6, 6, 0.5);
    const auto p_avg = time_averaged_distribution(fx.sd, fx.psi0);
    const double t = 12.0;
    auto spec = fx.spec(1.0, {t}, 21); // gamma t = 12 >> 1
    const auto ensemble = run_trajectory_ensemble(fx.sd, fx.psi0, spec, 400);
    OutcomeDistribution q;
    q.values = ensemble.q.col(0);
    q.time = t;
    const double mixed_moment = f_id_d(q, p_avg); // sum p_avg q~^2 - 1
    const auto pure = outcome_distribution(evolve_exact(fx.sd, fx.psi0, t));
    const double pure_moment = f_id_d(pure, p_avg);
    CHECK(std::abs(mixed_moment) < 0.35);
    CHECK(pure_moment > 0.7);
}

TEST_CASE("norm-weighted unraveling never needs redraws") {
    NoiseFixture fx(4, 4, 0.5);
    auto spec = fx.spec(0.5, {6.0}, 8);
    spec.unraveling = Unraveling::norm_weighted;
    const auto result = simulate_trajectory(&fx.sd, nullptr, fx.psi0, spec);
    for (const auto& e : result.jump_log) CHECK(e.redraws == 0);
    CHECK(std::abs(result.states[0].norm() - 1.0) < 1e-9);
}

TEST_CASE("krylov-backed trajectories match spectral-backed ones at gamma = 0") {
    NoiseFixture fx(4, 4, 0.5);
    auto spec = fx.spec(0.0, {2.0, 5.0}, 13);
    const auto spectral = simulate_trajectory(&fx.sd, nullptr, fx.psi0, spec);
    const auto krylov = simulate_trajectory(nullptr, &fx.h, fx.psi0, spec);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK((spectral.states[i].amplitudes - krylov.states[i].amplitudes).norm() < 1e-7);
}

TEST_CASE("trajectory spec validation") {
    NoiseFixture fx(4, 4, 0.5);
    auto bad = fx.spec(-0.1, {1.0}, 0);
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    auto unsorted = fx.spec(0.1, {2.0, 1.0}, 0);
    CHECK_THROWS_AS(unsorted.validate(), ValidationError);
    TrajectorySpec empty;
    CHECK_THROWS_AS(empty.validate(), ValidationError);
}
