#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "test_util.hpp"
#include "trsb/inference.hpp"
#include "trsb/subspace.hpp"

using namespace trsb;
using namespace trsb::testing;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / double(n - 1));
    return out;
}

// single-excitation quench on the 4-site ladder
FitProblem ladder_problem() {
    FitProblem p;
    p.model = FitModel::Ladder;
    p.forward = ForwardKind::Quench;
    p.sites = 4;
    p.flux = M_PI / 2;
    p.coupling_sign = 1.0;
    p.fit_epsilon = false;
    p.post_select_m = 1;
    p.initial_state = block_state(4, 1, "0100");
    p.omega_box = {150.0, 350.0};
    return p;
}

// joint (omega, epsilon) ramp fit on the ring: a moderately adiabatic ramp
// whose mid-ramp points pin epsilon, plus hold points after the ramp whose
// residual oscillations pin omega
FitProblem ramp_problem() {
    FitProblem p;
    p.model = FitModel::AbRing;
    p.forward = ForwardKind::Ramp1es;
    p.sites = 3;
    p.flux = M_PI / 2;
    p.coupling_sign = -1.0;
    p.fit_epsilon = true;
    p.post_select_m = 1;
    p.initial_state = block_state(3, 1, "100");
    p.ramp_time = 2.0 * M_PI * 1.5 / 350.0;
    p.ramp_steps = 256;
    p.omega_box = {250.0, 450.0};
    p.epsilon_box = {0.0, 0.6};
    return p;
}

std::vector<double> ladder_times(double omega) {
    const double period = 2.0 * M_PI / (std::sqrt(5.0) * omega);
    return linspace(period / 10.0, 2.0 * period, 12);
}

std::vector<double> ramp_times(const FitProblem& p) {
    auto times = linspace(0.3 * p.ramp_time, p.ramp_time, 5);
    for (double t : linspace(1.15 * p.ramp_time, 3.0 * p.ramp_time, 7)) times.push_back(t);
    return times;
}

}  // namespace

TEST_CASE("problem validation") {
    auto p = ladder_problem();
    CHECK_THROWS_AS(fit(p), std::invalid_argument);  // no data
    p.data = synthesize_records(p, 245.0, 0.0, ladder_times(245.0), 100, 1);
    p.omega_box = {350.0, 150.0};
    CHECK_THROWS_AS(fit(p), std::invalid_argument);
    p = ladder_problem();
    p.data = synthesize_records(p, 245.0, 0.0, ladder_times(245.0), 100, 1);
    CHECK_THROWS_AS(loglik(p, -1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(loglik(p, 245.0, -0.2), std::invalid_argument);
}

TEST_CASE("loglik: truth beats perturbations in the large-shot regime") {
    auto p = ladder_problem();
    const double truth = 245.0;
    p.data = synthesize_records(p, truth, 0.0, ladder_times(truth), 200000, 2);
    const double at_truth = loglik(p, truth, 0.0);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> bump(0.02, 0.3);
    for (int trial = 0; trial < 10; ++trial) {
        const double other = truth * (1.0 + (trial % 2 ? 1 : -1) * bump(gen));
        CHECK(at_truth >= loglik(p, other, 0.0));
    }
}

TEST_CASE("loglik: zero-count categories contribute nothing") {
    auto p = ladder_problem();
    p.data = synthesize_records(p, 245.0, 0.0, ladder_times(245.0), 50, 3);
    // remove a category entirely; the value must stay finite and only lose
    // that category's contribution
    const double full = loglik(p, 245.0, 0.0);
    CHECK(std::isfinite(full));
    auto& counts = p.data[0].second.counts;
    for (auto it = counts.begin(); it != counts.end();) {
        if (it->second == 0) it = counts.erase(it);
        else ++it;
    }
    CHECK(loglik(p, 245.0, 0.0) == doctest::Approx(full));
}

TEST_CASE("loglik: doubling all counts doubles likelihood differences") {
    auto p = ladder_problem();
    p.data = synthesize_records(p, 245.0, 0.0, ladder_times(245.0), 400, 4);
    const double a1 = loglik(p, 245.0, 0.0), b1 = loglik(p, 260.0, 0.0);
    for (auto& [t, record] : p.data) {
        for (auto& [bits, count] : record.counts) count *= 2;
        record.shots *= 2;
    }
    const double a2 = loglik(p, 245.0, 0.0), b2 = loglik(p, 260.0, 0.0);
    CHECK(a2 - b2 == doctest::Approx(2.0 * (a1 - b1)).epsilon(1e-12));
}

TEST_CASE("estimates converge to the planted value with many shots") {
    auto p = ladder_problem();
    const double truth = 245.0;
    p.data = synthesize_records(p, truth, 0.0, linspace(0.0005, 0.023, 25), 1'000'000, 6);
    const auto result = fit(p);
    CHECK(result.converged);
    CHECK(std::abs(result.estimates.at("omega") - truth) < 0.001 * truth);
}

TEST_CASE("time-frequency rescaling leaves the likelihood surface unchanged") {
    auto p = ladder_problem();
    const double truth = 245.0;
    const auto times = ladder_times(truth);
    p.data = synthesize_records(p, truth, 0.0, times, 500, 7);

    const double c = 3.7;
    auto scaled = p;
    for (auto& [t, record] : scaled.data) t *= c;
    scaled.omega_box = {p.omega_box[0] / c, p.omega_box[1] / c};

    for (double omega : {200.0, 245.0, 300.0})
        CHECK(loglik(p, omega, 0.0) == doctest::Approx(loglik(scaled, omega / c, 0.0)).epsilon(1e-12));
}

TEST_CASE("quench fit recovers the planted coupling with a sane interval") {
    auto p = ladder_problem();
    p.cache = std::make_shared<ProbabilityCache>();
    const double truth = 245.0;
    int covered = 0;
    const int seeds = 24;
    for (int seed = 0; seed < seeds; ++seed) {
        p.data = synthesize_records(p, truth, 0.0, ladder_times(truth), 500, 100 + seed);
        const auto result = fit(p);
        CHECK(result.converged);
        const auto ci = result.ci95.at("omega");
        CHECK(ci.lo < ci.hi);
        if (ci.lo <= truth && truth <= ci.hi) ++covered;
    }
    CHECK(covered >= 19);  // loose smoke bound; the acceptance suite runs 200 seeds
}

TEST_CASE("ramp fit recovers omega and epsilon jointly") {
    auto p = ramp_problem();
    p.cache = std::make_shared<ProbabilityCache>();
    p.data = synthesize_records(p, 350.0, 0.22, ramp_times(p), 2000, 11);
    const auto result = fit(p);
    CHECK(result.converged);
    CHECK_FALSE(result.flat_direction);
    CHECK(result.estimates.at("omega") == doctest::Approx(350.0).epsilon(0.05));
    CHECK(result.estimates.at("epsilon") == doctest::Approx(0.22).epsilon(0.35));
    const auto ci_w = result.ci95.at("omega");
    CHECK(ci_w.lo <= 350.0);
    CHECK(350.0 <= ci_w.hi);
    const auto ci_e = result.ci95.at("epsilon");
    CHECK(ci_e.lo <= 0.22);
    CHECK(0.22 <= ci_e.hi);
}

TEST_CASE("fits from one- and two-excitation data agree") {
    const double truth = 245.5;
    auto p1 = ladder_problem();
    p1.data = synthesize_records(p1, truth, 0.0, ladder_times(truth), 800, 21);
    const auto r1 = fit(p1);

    auto p2 = ladder_problem();
    p2.post_select_m = 2;
    p2.initial_state = block_state(4, 2, "1100");
    p2.data = synthesize_records(p2, truth, 0.0, ladder_times(truth), 800, 22);
    const auto r2 = fit(p2);

    const auto a = r1.ci95.at("omega"), b = r2.ci95.at("omega");
    CHECK(a.lo <= b.hi);
    CHECK(b.lo <= a.hi);
}

TEST_CASE("report writer emits estimates, intervals and the surface") {
    auto p = ladder_problem();
    p.data = synthesize_records(p, 245.0, 0.0, ladder_times(245.0), 300, 31);
    const auto result = fit(p);
    std::ostringstream os;
    result.write_report(os);
    const std::string text = os.str();
    CHECK(text.find("omega=") != std::string::npos);
    CHECK(text.find("ci95=[") != std::string::npos);
    CHECK(text.find("loglik surface") != std::string::npos);
}
