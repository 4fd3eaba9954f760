#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "trsb/hopping.hpp"
#include "trsb/subspace.hpp"

using namespace trsb;
using namespace trsb::testing;

namespace {

Matrix total_sz(int sites) {
    const int dim = 1 << sites;
    Matrix m = Matrix::Zero(dim, dim);
    for (int s = 0; s < dim; ++s)
        m(s, s) = 2.0 * excitation_count(std::uint32_t(s)) - sites;
    return m;
}

}  // namespace

TEST_CASE("general builder: single bond definition") {
    const HoppingSpec spec{2, {{1, 0.7, 0.0, 0.0}}};
    const Operator h = build_general(spec, 0.0);
    // <01|H|10> = Omega (site 1 = MSB: |10> is index 2, |01> index 1)
    CHECK(h.matrix(1, 2).real() == doctest::Approx(0.7));
    CHECK(h.matrix(1, 2).imag() == doctest::Approx(0.0));
    for (int s = 0; s < 4; ++s) CHECK(std::abs(h.matrix(s, s)) == 0.0);
}

TEST_CASE("general builder: N=3 with ranges 1 and 2 gives the all-ones block") {
    const double omega = 1.3;
    const HoppingSpec spec{3, {{1, omega, 0.0, 0.0}, {2, omega, 0.0, 0.0}}};
    const Operator block = project(build_general(spec, 0.0), basis(3, 1));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double expected = i == j ? 0.0 : omega;
            CHECK(std::abs(block.matrix(i, j) - expected) < 1e-14);
        }
}

TEST_CASE("general builder: delta advances the phase linearly in time") {
    const double delta = 0.9, phi = 0.4;
    const HoppingSpec moving{4, {{1, 1.1, phi, delta}, {2, 0.5, -0.2, delta}}};
    const HoppingSpec shifted{4, {{1, 1.1, phi - M_PI, 0.0}, {2, 0.5, -0.2 - M_PI, 0.0}}};
    const Operator a = build_general(moving, M_PI / delta);
    const Operator b = build_general(shifted, 0.0);
    CHECK(max_abs(a.matrix - b.matrix) < 1e-12);
}

TEST_CASE("general builder: validation") {
    CHECK_THROWS_AS(build_general({1, {}}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_general({3, {{3, 1.0, 0.0, 0.0}}}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_general({3, {{1, -1.0, 0.0, 0.0}}}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_general({3, {{1, 1.0, 0.0, 0.0}, {1, 0.5, 0.0, 0.0}}}, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_general({3, {{1, 1.0, 0.0, 0.0}}}, std::nan("")), std::invalid_argument);
}

TEST_CASE("every builder conserves total excitation and hermiticity") {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 25; ++trial) {
        const auto spec = random_hopping_spec(gen);
        const Operator h = build_general(spec, 0.3 * trial);
        const Matrix sz = total_sz(spec.sites);
        CHECK(max_abs(h.matrix * sz - sz * h.matrix) < 1e-12 * std::max(1.0, max_abs(h.matrix)));
        CHECK(is_hermitian(h.matrix));
    }
    const Operator ring = build_ab({5, -0.7, 1.1, 0.22});
    const Matrix sz5 = total_sz(5);
    CHECK(max_abs(ring.matrix * sz5 - sz5 * ring.matrix) < 1e-12);
    const Operator ladder = build_ladder({5, 0.9, 0.8, LadderGauge::Staggered});
    CHECK(max_abs(ladder.matrix * sz5 - sz5 * ladder.matrix) < 1e-12);
}

TEST_CASE("ring matches the general builder with ranges 1 and N-1") {
    const int sites = 4;
    const double omega = 0.8, phi = 1.3;
    const Operator ring = build_ab({sites, omega, phi, 0.0});
    const HoppingSpec spec{
        sites, {{1, omega, phi / sites, 0.0}, {sites - 1, omega, -phi / sites, 0.0}}};
    const Operator general = build_general(spec, 0.0);
    CHECK(max_abs(ring.matrix - general.matrix) < 1e-13);
}

TEST_CASE("ring circulant spectrum oracle") {
    // zero flux, epsilon 0: {2, -1, -1} * Omega
    const auto e0 = block_spectrum(build_ab({3, 1.0, 0.0, 0.0}), 1);
    CHECK(e0(0) == doctest::Approx(-1.0));
    CHECK(e0(1) == doctest::Approx(-1.0));
    CHECK(e0(2) == doctest::Approx(2.0));

    // quarter flux: equally spaced {-sqrt3, 0, sqrt3} * Omega
    const auto eq = block_spectrum(build_ab({3, 1.0, M_PI / 2, 0.0}), 1);
    CHECK(eq(0) == doctest::Approx(-std::sqrt(3.0)));
    CHECK(eq(1) == doctest::Approx(0.0));
    CHECK(eq(2) == doctest::Approx(std::sqrt(3.0)));

    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> phi_dist(-M_PI, M_PI);
    for (int sites = 3; sites <= 8; ++sites) {
        const double phi = phi_dist(gen);
        const auto got = block_spectrum(build_ab({sites, 1.7, phi, 0.0}), 1);
        const auto expected = circulant_ring_eigenvalues(sites, 1.7, phi);
        for (int k = 0; k < sites; ++k)
            CHECK(std::abs(got(k) - expected[std::size_t(k)]) < 1e-10 * 1.7);
    }
}

TEST_CASE("ring with paper-scale parameters builds and is Hermitian") {
    const Operator h = build_ab({3, 350.0, M_PI / 2, 0.22});
    CHECK(is_hermitian(h.matrix));
    // the epsilon term adds a real hop of 0.22*Omega on every bond
    const Complex hop = h.matrix(int(parse_bitstring("010")), int(parse_bitstring("100")));
    CHECK(hop.real() == doctest::Approx(350.0 * (std::cos(M_PI / 6) + 0.22)));
    CHECK(hop.imag() == doctest::Approx(350.0 * std::sin(M_PI / 6)));
    CHECK_THROWS_AS(build_ab({2, 1.0, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_ab({3, 1.0, 0.0, -0.1}), std::invalid_argument);
}

TEST_CASE("ladder spectra: N=4 at quarter flux") {
    for (const auto gauge : {LadderGauge::Staggered, LadderGauge::Uniform}) {
        const Operator h = build_ladder({4, 1.0, M_PI / 2, gauge});
        const auto e1 = block_spectrum(h, 1);
        CHECK(e1(0) == doctest::Approx(-std::sqrt(5.0)));
        CHECK(std::abs(e1(1)) < 1e-12);
        CHECK(std::abs(e1(2)) < 1e-12);
        CHECK(e1(3) == doctest::Approx(std::sqrt(5.0)));

        const auto e2 = block_spectrum(h, 2);
        CHECK(e2(0) == doctest::Approx(-3.0));
        CHECK(e2(1) == doctest::Approx(-1.0));
        CHECK(std::abs(e2(2)) < 1e-12);
        CHECK(std::abs(e2(3)) < 1e-12);
        CHECK(e2(4) == doctest::Approx(1.0));
        CHECK(e2(5) == doctest::Approx(3.0));
    }
}

TEST_CASE("ladder gauges are isospectral") {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> phi_dist(-M_PI, M_PI);
    for (int sites = 3; sites <= 8; ++sites) {
        const double phi = phi_dist(gen);
        const Operator a = build_ladder({sites, 1.0, phi, LadderGauge::Uniform});
        const Operator b = build_ladder({sites, 1.0, phi, LadderGauge::Staggered});
        for (int m = 0; m <= sites; ++m) {
            const auto ea = block_spectrum(a, m);
            const auto eb = block_spectrum(b, m);
            CHECK((ea - eb).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("ladder at zero flux in the uniform gauge is real symmetric") {
    const Operator h = build_ladder({5, 1.0, 0.0, LadderGauge::Uniform});
    CHECK(max_abs(h.matrix - h.matrix.real().cast<Complex>()) < 1e-14);
    CHECK_THROWS_AS(build_ladder({2, 1.0, 0.0, LadderGauge::Uniform}), std::invalid_argument);
}

TEST_CASE("h0 lowers the chosen site") {
    const Operator h = build_h0(3, 1, 2.0);
    const Operator block = project(h, basis(3, 1));
    // block order: |100>, |010>, |001>
    CHECK(block.matrix(0, 0).real() == doctest::Approx(-2.0));
    CHECK(block.matrix(1, 1).real() == doctest::Approx(2.0));
    CHECK(block.matrix(2, 2).real() == doctest::Approx(2.0));

    const Operator zero = build_h0(3, 2, 0.0);
    CHECK(max_abs(zero.matrix) == 0.0);

    const Operator h4 = project(build_h0(4, 2, 1.0), basis(4, 1));
    int ground = 0;
    for (int i = 1; i < 4; ++i)
        if (h4.matrix(i, i).real() < h4.matrix(ground, ground).real()) ground = i;
    CHECK(basis(4, 1).states[std::size_t(ground)] == parse_bitstring("0100"));

    CHECK_THROWS_AS(build_h0(3, 0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_h0(3, 4, 1.0), std::invalid_argument);
}

TEST_CASE("current operator: zero at zero flux for real states, odd in flux") {
    const AbRingSpec zero_flux{3, 1.0, 0.0, 0.0};
    const Operator c0 = current_operator(zero_flux);
    CHECK(is_hermitian(c0.matrix));
    // C at zero flux is purely imaginary-antisymmetric, so real states give 0
    std::mt19937_64 gen(17);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector real_state(8);
    for (int i = 0; i < 8; ++i) real_state(i) = normal(gen);
    real_state.normalize();
    CHECK(std::abs(real_state.dot(c0.matrix * real_state)) < 1e-12);

    // ground state of the zero-flux ring is real, so <C> = 0
    const Operator h0 = project(build_ab({3, -1.0, 0.0, 0.22}), basis(3, 1));
    Eigen::SelfAdjointEigenSolver<Matrix> es(h0.matrix);
    const StateVector gs{BasisId::block(3, 1), es.eigenvectors().col(0)};
    const Operator c_block = project(c0, basis(3, 1));
    CHECK(std::abs(gs.amplitudes.dot(c_block.matrix * gs.amplitudes)) < 1e-12);

    // <C> in the ground state is odd in the flux
    auto ground_current = [](double phi) {
        const AbRingSpec spec{3, -1.0, phi, 0.22};
        const Operator h = project(build_ab(spec), basis(3, 1));
        Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix);
        const Operator c = project(current_operator(spec), basis(3, 1));
        const Vector v = solver.eigenvectors().col(0);
        return v.dot(c.matrix * v).real();
    };
    for (double phi : {0.3, 0.9, 1.7, 2.5})
        CHECK(std::abs(ground_current(phi) + ground_current(-phi)) < 1e-10);
}

TEST_CASE("N=4 ladder symmetry suite at quarter flux") {
    const Operator h = build_ladder({4, 1.0, M_PI / 2, LadderGauge::Staggered});
    const double scale = max_abs(h.matrix);

    const auto swap = symmetry_operator(SymmetryKind::Swap14, 4);
    CHECK_FALSE(swap.conjugate);
    CHECK(max_abs(swap.matrix * h.matrix - h.matrix * swap.matrix) < 1e-12 * scale);
    CHECK(max_abs(swap.matrix * swap.matrix - Matrix::Identity(16, 16)) < 1e-14);
    // U_{1,4} |1000> = |0001>
    Vector v = Vector::Zero(16);
    v(int(parse_bitstring("1000"))) = 1.0;
    const Vector swapped = swap.matrix * v;
    CHECK(std::abs(swapped(int(parse_bitstring("0001"))) - 1.0) < 1e-14);

    const auto anti = symmetry_operator(SymmetryKind::Antiunitary, 4);
    CHECK(anti.conjugate);
    // A H A^{-1} = U_{2,3} conj(H) U_{2,3}^+ = H, at any flux
    CHECK(max_abs(anti.matrix * h.matrix.conjugate() * anti.matrix.adjoint() - h.matrix) <
          1e-12 * scale);
    const Operator h_generic = build_ladder({4, 1.0, 0.77, LadderGauge::Staggered});
    CHECK(max_abs(anti.matrix * h_generic.matrix.conjugate() * anti.matrix.adjoint() -
                  h_generic.matrix) < 1e-12 * scale);

    for (double phi : {M_PI / 2, -M_PI / 2}) {
        const Operator hc = build_ladder({4, 1.0, phi, LadderGauge::Staggered});
        const auto chiral = symmetry_operator(SymmetryKind::Chiral, 4);
        CHECK(max_abs(chiral.matrix * hc.matrix + hc.matrix * chiral.matrix) < 1e-12 * scale);
    }

    CHECK_THROWS_AS(symmetry_operator(SymmetryKind::Swap14, 5), std::invalid_argument);
}

TEST_CASE("singlet on sites 1 and 4 decouples with zero energy") {
    const Operator h = build_ladder({4, 1.0, M_PI / 2, LadderGauge::Staggered});
    Vector singlet = Vector::Zero(16);
    singlet(int(parse_bitstring("1000"))) = 1.0 / std::sqrt(2.0);
    singlet(int(parse_bitstring("0001"))) = -1.0 / std::sqrt(2.0);
    CHECK((h.matrix * singlet).norm() < 1e-13);
}

TEST_CASE("supplemental eigenstate table of the 4-site ladder") {
    const Operator h = build_ladder({4, 1.0, M_PI / 2, LadderGauge::Staggered});
    const double scale = max_abs(h.matrix);

    auto make_state = [](std::initializer_list<std::pair<const char*, Complex>> amps) {
        Vector v = Vector::Zero(16);
        for (const auto& [bits, amp] : amps) v(int(parse_bitstring(bits))) = amp;
        v.normalize();
        return v;
    };
    const double s2 = 1.0 / std::sqrt(2.0);

    struct Row {
        Vector state;
        double energy;
    };
    const std::vector<Row> table = {
        {make_state({{"0000", 1.0}}), 0.0},
        {make_state({{"1111", 1.0}}), 0.0},
        {make_state({{"1000", s2}, {"0001", -s2}}), 0.0},
        {make_state({{"1110", s2}, {"0111", -s2}}), 0.0},
        // |S>_{1,4} (|10>_{2,3} - i |01>_{2,3})/sqrt2 -> energy +Omega
        {make_state({{"1100", 0.5}, {"1010", -0.5 * kI}, {"0101", -0.5}, {"0011", 0.5 * kI}}),
         1.0},
        {make_state({{"1100", 0.5}, {"1010", 0.5 * kI}, {"0101", -0.5}, {"0011", -0.5 * kI}}),
         -1.0},
        {make_state({{"1001", s2}, {"0110", -s2}}), 0.0},
    };
    for (const auto& row : table)
        CHECK((h.matrix * row.state - row.energy * row.state).cwiseAbs().maxCoeff() <
              1e-10 * std::max(1.0, scale));
}

TEST_CASE("bond terms sum to the ring Hamiltonian") {
    const AbRingSpec spec{3, -0.9, 1.1, 0.22};
    const Operator h = build_ab(spec);
    Matrix sum = Matrix::Zero(8, 8);
    for (const auto& term : ring_bond_terms(spec)) sum += bond_term_operator(term, 3).matrix;
    CHECK(max_abs(sum - h.matrix) < 1e-13);

    Matrix csum = Matrix::Zero(8, 8);
    for (const auto& term : current_bond_terms(spec)) csum += bond_term_operator(term, 3).matrix;
    CHECK(max_abs(csum - current_operator(spec).matrix) < 1e-13);
}
