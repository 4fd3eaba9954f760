#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "trsb/evolution.hpp"
#include "trsb/hopping.hpp"
#include "trsb/measurement.hpp"
#include "trsb/subspace.hpp"

using namespace trsb;
using namespace trsb::testing;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / double(n - 1));
    return out;
}

// time of the global occupation maximum of one site over a sampled grid
double peak_time(const Trajectory& traj, int site) {
    int best = 0;
    for (int i = 1; i < int(traj.times.size()); ++i)
        if (traj.site_occupations(i, site - 1) > traj.site_occupations(best, site - 1)) best = i;
    return traj.times[std::size_t(best)];
}

}  // namespace

TEST_CASE("static evolution at t=0 is the identity") {
    const Operator h = build_ab({3, 1.0, 0.7, 0.1});
    const auto psi0 = basis_state(3, "100");
    const auto psi = evolve_static(h, psi0, 0.0);
    CHECK((psi.amplitudes - psi0.amplitudes).norm() < 1e-14);
}

TEST_CASE("ring revival at quarter flux") {
    // equally spaced 1ES eigenvalues make the evolution periodic
    const double omega = 0.9;
    const Operator h = build_ab({3, omega, M_PI / 2, 0.0});
    const auto psi0 = basis_state(3, "100");
    const double period = 2.0 * M_PI / (std::sqrt(3.0) * omega);
    const auto psi = evolve_static(h, psi0, period);
    CHECK(std::norm(psi.amplitudes(int(parse_bitstring("100")))) == doctest::Approx(1.0));
}

TEST_CASE("ladder two-excitation oscillation with a third of the base period") {
    const double omega = 1.2;
    const Operator h = build_ladder({4, omega, M_PI / 2, LadderGauge::Staggered});
    const auto psi0 = basis_state(4, "1001");
    const double period = 2.0 * M_PI / (3.0 * omega);
    const auto back = evolve_static(h, psi0, period);
    CHECK(fidelity(psi0, back) == doctest::Approx(1.0).epsilon(1e-10));
    // and visibly not earlier
    const auto half = evolve_static(h, psi0, period / 2);
    CHECK(fidelity(psi0, half) < 0.999);
}

TEST_CASE("unitarity and energy conservation under random evolutions") {
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> tdist(0.0, 8.0);
    for (int trial = 0; trial < 15; ++trial) {
        const auto spec = random_hopping_spec(gen);
        const Operator h = build_general(spec, 0.0);
        const int m = 1 + int(gen() % std::max(1u, unsigned(spec.sites - 1)));
        const auto psi0 = random_block_state(spec.sites, m, gen);
        const Operator block = project(h, basis(spec.sites, m));
        const auto psi = evolve_static(block, psi0, tdist(gen));
        CHECK(std::abs(psi.amplitudes.norm() - 1.0) < 1e-10);
        const double e0 = psi0.amplitudes.dot(block.matrix * psi0.amplitudes).real();
        const double e1 = psi.amplitudes.dot(block.matrix * psi.amplitudes).real();
        CHECK(std::abs(e1 - e0) < 1e-9 * std::max(1.0, max_abs(block.matrix)));
    }
}

TEST_CASE("ramp with equal endpoints reduces to static evolution") {
    const Operator h = build_ab({3, -1.0, 1.1, 0.22});
    const auto psi0 = basis_state(3, "100");
    const RampSchedule schedule{4.0, h, h, 32, 1e-10};
    const auto ramped = evolve_ramp(schedule, psi0);
    // [1 - s^2] H + s^2 H = H at every instant, so this is exp(-i H T)
    const auto statics = evolve_static(h, psi0, 4.0);
    CHECK((ramped.amplitudes - statics.amplitudes).norm() < 1e-9);
}

TEST_CASE("ramp endpoints match the schedule definition") {
    const Operator h0 = build_h0(3, 1, 2.0);
    const Operator h1 = build_ab({3, -1.0, 0.3, 0.0});
    // instantaneous Hamiltonian at x = t/T
    auto at = [&](double x) { return Matrix((1 - x * x) * h0.matrix + x * x * h1.matrix); };
    CHECK(max_abs(at(0.0) - h0.matrix) == 0.0);
    CHECK(max_abs(at(1.0) - h1.matrix) == 0.0);
}

TEST_CASE("adiabatic preparation of the ring ground state") {
    // effective ring coupling is negative: unique ground state at zero flux
    const double omega = -2.0 * M_PI * 0.35;
    const double delta = 4.0 * std::abs(omega);
    const auto sub = basis(3, 1);

    auto ground_overlap = [&](double phi) {
        const Operator h = project(build_ab({3, omega, phi, 0.22}), sub);
        const Operator h0 = project(build_h0(3, 1, delta), sub);
        const auto psi0 = block_state(3, 1, "100");
        const auto psi = evolve_ramp({10.0, h0, h, 64, 1e-8}, psi0);
        return eigenstate_overlaps(h, psi).front().second;
    };

    const double at_quarter = ground_overlap(M_PI / 2);
    CHECK(at_quarter >= 0.97);
    // near-degenerate gap at the zone edge degrades the preparation
    const double at_edge = ground_overlap(M_PI * 15.0 / 16.0);
    CHECK(at_edge < at_quarter - 0.05);
}

TEST_CASE("quench chirality follows the flux sign") {
    const double omega = -1.0;  // effective ring coupling sign
    const auto psi0 = basis_state(3, "100");
    const auto times = linspace(0.0, 2.5, 600);

    const auto counter = quench_trajectory(build_ab({3, omega, M_PI / 2, 0.22}), psi0, times);
    CHECK(peak_time(counter, 2) < peak_time(counter, 3));

    const auto clockwise = quench_trajectory(build_ab({3, omega, -M_PI / 2, 0.22}), psi0, times);
    CHECK(peak_time(clockwise, 3) < peak_time(clockwise, 2));

    const auto symmetric = quench_trajectory(build_ab({3, omega, 0.0, 0.22}), psi0, times);
    for (int i = 0; i < int(times.size()); ++i)
        CHECK(std::abs(symmetric.site_occupations(i, 1) - symmetric.site_occupations(i, 2)) <
              1e-12);
}

TEST_CASE("trajectory bookkeeping invariants") {
    const Operator h = build_ladder({4, 1.0, M_PI / 2, LadderGauge::Staggered});
    const auto traj = quench_trajectory(h, basis_state(4, "0100"), linspace(0.0, 3.0, 40));
    for (int i = 0; i < 40; ++i) {
        CHECK(std::abs(traj.subspace_weights.row(i).sum() - 1.0) < 1e-10);
        CHECK(traj.subspace_weights(i, 1) == doctest::Approx(1.0));  // conserved sector
        CHECK(traj.site_occupations.row(i).minCoeff() >= -1e-12);
        CHECK(traj.site_occupations.row(i).maxCoeff() <= 1.0 + 1e-12);
    }
}

TEST_CASE("ladder single-excitation observables are periodic") {
    const double omega = 1.0;
    const Operator h = build_ladder({4, omega, M_PI / 2, LadderGauge::Staggered});
    const double period = 2.0 * M_PI / (std::sqrt(5.0) * omega);
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 4; ++trial) {
        const auto psi0 = embed_full(random_block_state(4, 1, gen));
        for (double t : {0.4, 1.1, 2.0}) {
            const auto a = site_occupations(evolve_static(h, psi0, t));
            const auto b = site_occupations(evolve_static(h, psi0, t + period));
            CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("two excitations on the ring map to a counter-rotating hole") {
    const double phi = M_PI / 2;
    const auto times = linspace(0.0, 3.0, 60);
    for (double omega : {1.0, -1.0}) {
        const auto two = quench_trajectory(build_ab({3, omega, phi, 0.0}),
                                           basis_state(3, "110"), times);
        // hole starts at site 3 and sees the opposite flux
        const auto hole = quench_trajectory(build_ab({3, omega, -phi, 0.0}),
                                            basis_state(3, "001"), times);
        for (int i = 0; i < int(times.size()); ++i)
            for (int k = 0; k < 3; ++k)
                CHECK(std::abs(two.site_occupations(i, k) -
                               (1.0 - hole.site_occupations(i, k))) < 1e-10);
    }
}

TEST_CASE("eigenstate overlaps") {
    const Operator h = project(build_ab({3, 1.0, 0.9, 0.0}), basis(3, 1));
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix);
    const StateVector eig{BasisId::block(3, 1), es.eigenvectors().col(1)};
    const auto overlaps = eigenstate_overlaps(h, eig);
    REQUIRE(overlaps.size() == 3);
    CHECK(overlaps[1].second == doctest::Approx(1.0));
    CHECK(overlaps[0].second + overlaps[2].second < 1e-12);
    double total = 0.0;
    for (const auto& [e, w] : overlaps) total += w;
    CHECK(total == doctest::Approx(1.0));

    // uniform superposition at zero flux is the symmetric eigenstate; the
    // degenerate pair below it merges into one reported subspace
    const Operator h0 = project(build_ab({3, 1.0, 0.0, 0.0}), basis(3, 1));
    Vector uniform = Vector::Constant(3, 1.0 / std::sqrt(3.0));
    const auto grouped = eigenstate_overlaps(h0, {BasisId::block(3, 1), uniform});
    REQUIRE(grouped.size() == 2);  // {-1, -1} merged, {+2}
    CHECK(grouped[0].second < 1e-12);
    CHECK(grouped[1].second == doctest::Approx(1.0));
    CHECK(grouped[1].first == doctest::Approx(2.0));
}

TEST_CASE("ramp refinement is self-consistent and reports failure") {
    const auto sub = basis(3, 1);
    const Operator h = project(build_ab({3, -1.0, M_PI / 2, 0.22}), sub);
    const Operator h0 = project(build_h0(3, 1, 4.0), sub);
    const auto psi0 = block_state(3, 1, "100");

    const auto coarse = evolve_ramp_fixed({6.0, h0, h}, psi0, 512);
    const auto fine = evolve_ramp_fixed({6.0, h0, h}, psi0, 1024);
    const auto converged = evolve_ramp({6.0, h0, h, 64, 1e-8}, psi0);
    CHECK((fine.amplitudes - coarse.amplitudes).norm() < 1e-4);
    CHECK((converged.amplitudes - fine.amplitudes).norm() < 1e-5);

    RampSchedule capped{6.0, h0, h, 2, 1e-14, 8};
    CHECK_THROWS_AS(evolve_ramp(capped, psi0), std::runtime_error);
}

TEST_CASE("dimension mismatches are rejected") {
    const Operator h = build_ab({3, 1.0, 0.0, 0.0});
    const auto psi = block_state(3, 1, "100");
    CHECK_THROWS_AS(evolve_static(h, psi, 1.0), std::invalid_argument);
}
