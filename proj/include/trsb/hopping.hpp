#ifndef TRSB_HOPPING_HPP
#define TRSB_HOPPING_HPP

#include <vector>

#include "trsb/types.hpp"

// Hamiltonian builders for the hopping family
//
//     H(t) = sum_n Omega_n e^{i(phi_n - delta_n t)} sum_k sigma^+_{k+n} sigma^-_k + H.c.
//
// and its two named specializations: the flux-threaded ring (nearest-neighbour
// hops around a periodic ring, every bond carrying the factor
// omega * (e^{i phi_ab / N} + epsilon)) and the triangular ladder (rungs = range-1
// bonds, rails = range-2 bonds, staggered plaquette flux).
//
// Ladder gauges: Uniform puts phi_s/3 on every rung and -phi_s/3 on every rail.
// Staggered concentrates the flux on the even rungs (factor e^{-i phi_s} on the
// forward hop sigma^+_{k+1} sigma^-_k for even k); this is the gauge in which the
// swap, anti-unitary and chiral symmetries of the four-site ladder are manifest.
// The two gauges enclose the same flux per plaquette and are isospectral.

namespace trsb {

struct HoppingTerm {
    int range = 1;        // neighbour distance n, 1..N-1
    double omega = 0.0;   // coupling amplitude, angular frequency, >= 0
    double phi = 0.0;     // static phase, radians
    double delta = 0.0;   // phase velocity, angular frequency
};

struct HoppingSpec {
    int sites = 0;
    std::vector<HoppingTerm> terms;

    void validate() const;
};

struct AbRingSpec {
    int sites = 0;
    double omega = 0.0;    // signed coupling amplitude (sign fixes the spectrum orientation)
    double phi_ab = 0.0;   // total flux through the ring, radians
    double epsilon = 0.0;  // zero-flux contamination fraction, >= 0

    void validate() const;
};

enum class LadderGauge { Uniform, Staggered };

struct LadderSpec {
    int sites = 0;
    double omega = 0.0;
    double phi_s = 0.0;  // staggered plaquette flux, radians
    LadderGauge gauge = LadderGauge::Staggered;

    void validate() const;
};

Operator build_general(const HoppingSpec& spec, double t);
Operator build_ab(const AbRingSpec& spec);
Operator build_ladder(const LadderSpec& spec);

/// -delta * sigma_site^z. Within any fixed-excitation block the state with
/// the excitation on `site` is the unique ground state (for delta > 0).
Operator build_h0(int sites, int site, double delta);

/// Spin current C = i sum_n (sigma^+_{n+1} sigma^-_n e^{i phi_ab/N} - H.c.).
Operator current_operator(const AbRingSpec& spec);

enum class SymmetryKind { Swap14, Chiral, Antiunitary };

struct SymmetryOperator {
    Matrix matrix;
    bool conjugate = false;  // compose with complex conjugation (anti-unitary)
};

/// Symmetries of the minimal (N=4) ladder: the site-1/4 swap, the chiral
/// partner sigma_1^z sigma_4^z U_{2,3}, and the anti-unitary U_{2,3} K.
SymmetryOperator symmetry_operator(SymmetryKind kind, int sites);

/// H expressed as a sum of two-site bond terms c * sigma^+_b sigma^-_a + H.c.
/// Used by the sampled local-energy estimators.
struct BondTerm {
    int site_a = 0;
    int site_b = 0;
    Complex coupling;
};

std::vector<BondTerm> ring_bond_terms(const AbRingSpec& spec);
std::vector<BondTerm> current_bond_terms(const AbRingSpec& spec);
Operator bond_term_operator(const BondTerm& term, int sites);

}  // namespace trsb

#endif
