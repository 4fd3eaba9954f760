#include "trsb/subspace.hpp"

#include <algorithm>
#include <cmath>

namespace trsb {

namespace {

// Mask of sites strictly between a and b (site 1 = MSB encoding).
std::uint32_t interior_mask(int sites, int a, int b) {
    if (a > b) std::swap(a, b);
    std::uint32_t m = 0;
    for (int k = a + 1; k < b; ++k) m |= site_mask(sites, k);
    return m;
}

// Mask of sites with index strictly below `site` (the modes a fermion
// operator at `site` anticommutes past).
std::uint32_t below_mask(int sites, int site) {
    std::uint32_t m = 0;
    for (int k = 1; k < site; ++k) m |= site_mask(sites, k);
    return m;
}

}  // namespace

int SubspaceBasis::index_of(std::uint32_t state) const {
    auto it = std::find(states.begin(), states.end(), state);
    return it == states.end() ? -1 : int(it - states.begin());
}

std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

SubspaceBasis basis(int sites, int excitation) {
    check_sites(sites, 1);
    if (excitation < 0 || excitation > sites)
        throw std::invalid_argument("excitation number must be in [0, N], got " +
                                    std::to_string(excitation));
    SubspaceBasis sub{sites, excitation, {}};
    sub.states.reserve(std::size_t(binomial(sites, excitation)));
    // Combinations of excited positions in ascending-tuple order, which is
    // descending integer order in the site-1 = MSB encoding.
    for (std::int64_t s = (1 << sites) - 1; s >= 0; --s)
        if (excitation_count(std::uint32_t(s)) == excitation)
            sub.states.push_back(std::uint32_t(s));
    return sub;
}

Operator project(const Operator& op, const SubspaceBasis& sub) {
    if (op.basis != BasisId::full(sub.sites))
        throw std::invalid_argument("project: operator must act on the full space of matching N");
    const int dim = 1 << sub.sites;
    const double scale = std::max(1.0, max_abs(op.matrix));
    double leakage = 0.0;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            if (excitation_count(std::uint32_t(i)) != excitation_count(std::uint32_t(j)))
                leakage = std::max(leakage, std::abs(op.matrix(i, j)));
    if (leakage > 1e-12 * scale)
        throw std::invalid_argument("project: operator does not conserve excitation number");

    const int d = sub.dimension();
    Matrix block(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            block(i, j) = op.matrix(int(sub.states[i]), int(sub.states[j]));
    return Operator{sub.id(), std::move(block), op.hermitian};
}

StateVector embed_full(const StateVector& psi) {
    if (!psi.basis.excitation) return psi;
    const auto sub = basis(psi.basis.sites, *psi.basis.excitation);
    if (psi.amplitudes.size() != sub.dimension())
        throw std::invalid_argument("embed_full: amplitude size does not match basis");
    Vector full = Vector::Zero(1 << psi.basis.sites);
    for (int i = 0; i < sub.dimension(); ++i) full(int(sub.states[i])) = psi.amplitudes(i);
    return StateVector{BasisId::full(psi.basis.sites), std::move(full)};
}

FermionOperatorSpec FermionOperatorSpec::without_parity_factors() const {
    FermionOperatorSpec out{sites, terms};
    for (auto& term : out.terms) term.interior = 0;
    return out;
}

FermionOperatorSpec jordan_wigner(const HoppingSpec& spec, double t) {
    spec.validate();
    if (!std::isfinite(t)) throw std::invalid_argument("time must be finite");
    FermionOperatorSpec out{spec.sites, {}};
    for (const auto& term : spec.terms) {
        const Complex c = term.omega * std::exp(kI * (term.phi - term.delta * t));
        for (int k = 1; k + term.range <= spec.sites; ++k) {
            const std::uint32_t interior = interior_mask(spec.sites, k, k + term.range);
            out.terms.push_back({c, k + term.range, k, interior});
            out.terms.push_back({std::conj(c), k, k + term.range, interior});
        }
    }
    return out;
}

Operator fermion_matrix(const FermionOperatorSpec& spec, int particles) {
    check_sites(spec.sites, 1);
    for (const auto& term : spec.terms) {
        if (term.create < 1 || term.create > spec.sites || term.annihilate < 1 ||
            term.annihilate > spec.sites)
            throw std::invalid_argument("fermion term site out of range");
    }
    const auto sub = basis(spec.sites, particles);
    const int d = sub.dimension();
    Matrix m = Matrix::Zero(d, d);
    for (int j = 0; j < d; ++j) {
        const std::uint32_t s = sub.states[j];
        for (const auto& term : spec.terms) {
            const std::uint32_t ma = site_mask(spec.sites, term.annihilate);
            const std::uint32_t mc = site_mask(spec.sites, term.create);
            if (!(s & ma)) continue;
            double sign = 1.0;
            // parity factors act first, on the original occupations
            if (excitation_count(s & term.interior) % 2 == 1) sign = -sign;
            if (excitation_count(s & below_mask(spec.sites, term.annihilate)) % 2 == 1)
                sign = -sign;
            const std::uint32_t mid = s & ~ma;
            if (term.create != term.annihilate && (mid & mc)) continue;
            if (excitation_count(mid & below_mask(spec.sites, term.create)) % 2 == 1)
                sign = -sign;
            const std::uint32_t dest = mid | mc;
            const int i = sub.index_of(dest);
            if (i < 0)
                throw std::invalid_argument("fermion operator does not conserve particle number");
            m(i, j) += sign * term.coeff;
        }
    }
    const bool herm = is_hermitian(m);
    return Operator{sub.id(), std::move(m), herm};
}

}  // namespace trsb
