#include "trsb/hopping.hpp"

#include <cmath>
#include <set>

namespace trsb {

namespace {

bool finite(double x) { return std::isfinite(x); }

// c * sigma^+_b sigma^-_a + H.c. accumulated into a full-space matrix.
void add_hop(Matrix& h, int sites, int a, int b, Complex c) {
    const std::uint32_t ma = site_mask(sites, a);
    const std::uint32_t mb = site_mask(sites, b);
    const int dim = 1 << sites;
    for (int s = 0; s < dim; ++s) {
        if ((s & ma) && !(s & mb)) {
            const int d = int((std::uint32_t(s) & ~ma) | mb);
            h(d, s) += c;
            h(s, d) += std::conj(c);
        }
    }
}

Operator make_hermitian_operator(int sites, Matrix m) {
    require_hermitian(m, "hamiltonian builder");
    return Operator{BasisId::full(sites), std::move(m), true};
}

}  // namespace

void HoppingSpec::validate() const {
    check_sites(sites);
    std::set<int> seen;
    for (const auto& term : terms) {
        if (term.range < 1 || term.range > sites - 1)
            throw std::invalid_argument("hopping range must be in [1, N-1], got " +
                                        std::to_string(term.range));
        if (!seen.insert(term.range).second)
            throw std::invalid_argument("duplicate hopping range " + std::to_string(term.range));
        if (!(term.omega >= 0.0) || !finite(term.omega))
            throw std::invalid_argument("omega_n must be finite and >= 0 (absorb the sign into phi_n)");
        if (!finite(term.phi) || !finite(term.delta))
            throw std::invalid_argument("phi_n and delta_n must be finite");
    }
}

void AbRingSpec::validate() const {
    check_sites(sites, 3);
    if (!finite(omega) || omega == 0.0)
        throw std::invalid_argument("ring coupling omega must be finite and nonzero");
    if (!finite(phi_ab)) throw std::invalid_argument("phi_ab must be finite");
    if (!(epsilon >= 0.0) || !finite(epsilon))
        throw std::invalid_argument("epsilon must be finite and >= 0");
}

void LadderSpec::validate() const {
    check_sites(sites, 3);
    if (!finite(omega)) throw std::invalid_argument("ladder coupling omega must be finite");
    if (!finite(phi_s)) throw std::invalid_argument("phi_s must be finite");
}

Operator build_general(const HoppingSpec& spec, double t) {
    spec.validate();
    if (!finite(t)) throw std::invalid_argument("time must be finite");
    const int dim = 1 << spec.sites;
    Matrix h = Matrix::Zero(dim, dim);
    for (const auto& term : spec.terms) {
        const Complex c = term.omega * std::exp(kI * (term.phi - term.delta * t));
        for (int k = 1; k + term.range <= spec.sites; ++k)
            add_hop(h, spec.sites, k, k + term.range, c);
    }
    return make_hermitian_operator(spec.sites, std::move(h));
}

Operator build_ab(const AbRingSpec& spec) {
    spec.validate();
    const int dim = 1 << spec.sites;
    Matrix h = Matrix::Zero(dim, dim);
    const Complex hop = spec.omega * (std::exp(kI * spec.phi_ab / double(spec.sites)) + spec.epsilon);
    for (int k = 1; k <= spec.sites; ++k)
        add_hop(h, spec.sites, k, k % spec.sites + 1, hop);
    return make_hermitian_operator(spec.sites, std::move(h));
}

Operator build_ladder(const LadderSpec& spec) {
    spec.validate();
    const int dim = 1 << spec.sites;
    Matrix h = Matrix::Zero(dim, dim);
    if (spec.gauge == LadderGauge::Uniform) {
        const Complex rung = spec.omega * std::exp(kI * spec.phi_s / 3.0);
        const Complex rail = spec.omega * std::exp(-kI * spec.phi_s / 3.0);
        for (int k = 1; k + 1 <= spec.sites; ++k) add_hop(h, spec.sites, k, k + 1, rung);
        for (int k = 1; k + 2 <= spec.sites; ++k) add_hop(h, spec.sites, k, k + 2, rail);
    } else {
        for (int k = 1; k + 1 <= spec.sites; ++k) {
            Complex rung = spec.omega;
            if (k % 2 == 0) rung *= std::exp(-kI * spec.phi_s);
            add_hop(h, spec.sites, k, k + 1, rung);
        }
        // rail term sigma^+_k sigma^-_{k+2}: forward hop k+2 -> k, no phase
        for (int k = 1; k + 2 <= spec.sites; ++k)
            add_hop(h, spec.sites, k + 2, k, Complex(spec.omega));
    }
    return make_hermitian_operator(spec.sites, std::move(h));
}

Operator build_h0(int sites, int site, double delta) {
    check_sites(sites);
    if (site < 1 || site > sites)
        throw std::invalid_argument("h0 site index out of range: " + std::to_string(site));
    if (!(delta >= 0.0) || !finite(delta))
        throw std::invalid_argument("h0 delta must be finite and >= 0");
    const int dim = 1 << sites;
    Matrix h = Matrix::Zero(dim, dim);
    for (int s = 0; s < dim; ++s)
        h(s, s) = site_occupied(std::uint32_t(s), sites, site) ? -delta : delta;
    return Operator{BasisId::full(sites), std::move(h), true};
}

Operator current_operator(const AbRingSpec& spec) {
    spec.validate();
    const int dim = 1 << spec.sites;
    Matrix h = Matrix::Zero(dim, dim);
    const Complex hop = kI * std::exp(kI * spec.phi_ab / double(spec.sites));
    for (int k = 1; k <= spec.sites; ++k)
        add_hop(h, spec.sites, k, k % spec.sites + 1, hop);
    return make_hermitian_operator(spec.sites, std::move(h));
}

SymmetryOperator symmetry_operator(SymmetryKind kind, int sites) {
    if (sites != 4)
        throw std::invalid_argument("ladder symmetry operators are defined for N=4 only");
    const int dim = 1 << sites;

    // U_{i,j} = (1 + sx_i sx_j + sy_i sy_j + sz_i sz_j)/2, the two-site swap.
    auto swap_unitary = [&](int i, int j) {
        Matrix u = Matrix::Zero(dim, dim);
        const std::uint32_t mi = site_mask(sites, i), mj = site_mask(sites, j);
        for (int s = 0; s < dim; ++s) {
            const bool bi = s & mi, bj = s & mj;
            std::uint32_t d = std::uint32_t(s) & ~(mi | mj);
            if (bi) d |= mj;
            if (bj) d |= mi;
            u(int(d), s) = 1.0;
        }
        return u;
    };

    switch (kind) {
        case SymmetryKind::Swap14:
            return {swap_unitary(1, 4), false};
        case SymmetryKind::Antiunitary:
            return {swap_unitary(2, 3), true};
        case SymmetryKind::Chiral: {
            // sz_1 sz_4 U_{2,3}: the swap leaves sites 1 and 4 untouched, so
            // the diagonal factor can be evaluated on the input state.
            Matrix u = swap_unitary(2, 3);
            const std::uint32_t m1 = site_mask(sites, 1), m4 = site_mask(sites, 4);
            for (int s = 0; s < dim; ++s) {
                const double z1 = (s & m1) ? 1.0 : -1.0;
                const double z4 = (s & m4) ? 1.0 : -1.0;
                u.col(s) *= z1 * z4;
            }
            return {std::move(u), false};
        }
    }
    throw std::logic_error("unreachable");
}

std::vector<BondTerm> ring_bond_terms(const AbRingSpec& spec) {
    spec.validate();
    const Complex hop = spec.omega * (std::exp(kI * spec.phi_ab / double(spec.sites)) + spec.epsilon);
    std::vector<BondTerm> terms;
    terms.reserve(spec.sites);
    for (int k = 1; k <= spec.sites; ++k)
        terms.push_back({k, k % spec.sites + 1, hop});
    return terms;
}

std::vector<BondTerm> current_bond_terms(const AbRingSpec& spec) {
    spec.validate();
    const Complex hop = kI * std::exp(kI * spec.phi_ab / double(spec.sites));
    std::vector<BondTerm> terms;
    terms.reserve(spec.sites);
    for (int k = 1; k <= spec.sites; ++k)
        terms.push_back({k, k % spec.sites + 1, hop});
    return terms;
}

Operator bond_term_operator(const BondTerm& term, int sites) {
    check_sites(sites);
    if (term.site_a < 1 || term.site_a > sites || term.site_b < 1 || term.site_b > sites ||
        term.site_a == term.site_b)
        throw std::invalid_argument("bond term sites out of range");
    const int dim = 1 << sites;
    Matrix h = Matrix::Zero(dim, dim);
    add_hop(h, sites, term.site_a, term.site_b, term.coupling);
    return Operator{BasisId::full(sites), std::move(h), true};
}

}  // namespace trsb
