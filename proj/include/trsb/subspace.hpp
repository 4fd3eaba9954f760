#ifndef TRSB_SUBSPACE_HPP
#define TRSB_SUBSPACE_HPP

#include <cstdint>
#include <vector>

#include "trsb/hopping.hpp"
#include "trsb/types.hpp"

// Fixed-excitation blocks and the fermionic mirror of the hopping model.
//
// Subspace bases enumerate the C(N, m) bitstrings with m excitations, ordered
// by the ascending tuple of excited site indices: (3,1) -> |100>, |010>, |001>.
//
// Fermion conventions: modes are ordered by site index 1..N and an occupied
// set {s1 < s2 < ...} means psi^+_{s1} psi^+_{s2} ... |vac>. A spin hop of
// range n maps to psi^+_{k+n} psi_k times the parity factor (1 - 2 n_l) of
// every strictly interior site l; the conjugate hop carries the same interior
// factor. Range-1 hops carry no factor. Parity factors are evaluated exactly
// per basis state, never truncated.

namespace trsb {

struct SubspaceBasis {
    int sites = 0;
    int excitation = 0;
    std::vector<std::uint32_t> states;

    BasisId id() const { return BasisId::block(sites, excitation); }
    int dimension() const { return int(states.size()); }
    /// Position of a full-space state in this basis, or -1.
    int index_of(std::uint32_t state) const;
};

SubspaceBasis basis(int sites, int excitation);

std::int64_t binomial(int n, int k);

/// Extract the m-excitation block of a full-space operator. The operator must
/// conserve excitation number; matrix elements between different blocks above
/// 1e-12 (relative to the largest element) are rejected as leakage.
Operator project(const Operator& op, const SubspaceBasis& sub);

/// Embed a subspace state into the full 2^N space.
StateVector embed_full(const StateVector& psi);

// --- Jordan-Wigner mirror ---

struct FermionTerm {
    Complex coeff;
    int create = 0;               // site index 1..N
    int annihilate = 0;           // site index 1..N
    std::uint32_t interior = 0;   // mask of sites whose parity multiplies the hop
};

struct FermionOperatorSpec {
    int sites = 0;
    std::vector<FermionTerm> terms;  // Hermitian pairs stored explicitly

    /// The same operator with every parity factor dropped (the free-fermion
    /// truncation that removes the correlated-hop terms).
    FermionOperatorSpec without_parity_factors() const;
};

FermionOperatorSpec jordan_wigner(const HoppingSpec& spec, double t = 0.0);

/// Matrix of the fermionic operator in the m-particle occupation basis,
/// with signs from the fixed mode ordering.
Operator fermion_matrix(const FermionOperatorSpec& spec, int particles);

}  // namespace trsb

#endif
