#ifndef TRSB_CERTIFICATION_HPP
#define TRSB_CERTIFICATION_HPP

#include <string>
#include <vector>

#include "trsb/measurement.hpp"

// Energy-based ground-state certification. A candidate state is accepted when
// the (1 - alpha) lower confidence bound of the extremality fidelity bound
//
//     F >= 1 - (<H> - E0) / gap
//
// clears the threshold F_T. States with fidelity below F_T are rejected with
// probability at least 1 - alpha; states above F_T + delta are accepted with
// high probability; no guarantee is given inside the band (F_T, F_T + delta).
// The reported band delta = z_{1-alpha} * SE_max(E) / gap uses the a-priori
// (budget-determined) energy resolution, so it is deterministic and shrinks
// monotonically with the shot budget.

namespace trsb {

struct CertificationConfig {
    double f_threshold = 0.7;       // F_T in (0, 1)
    double alpha = 0.05;            // failure probability in (0, 1)
    double ground_energy = 0.0;     // known E0
    double gap = 0.0;               // known spectral gap > 0
    std::uint64_t shots_budget = 0; // total shots across all settings; 0 = exact energies

    void validate() const;
};

enum class Decision { Accept, Reject };

struct CertificationOutcome {
    Decision decision = Decision::Reject;
    double energy = 0.0;
    double energy_std_error = 0.0;
    double fidelity_lower_bound = 0.0;
    double delta_gap = 0.0;     // achieved fidelity band delta
    bool band_resolved = true;  // false when delta >= 1 - F_T (budget too small)

    std::string to_json() const;
};

/// Certify a candidate state against the Hamiltonian sum of `terms`.
/// The supplied ground_energy and gap are cross-checked against exact
/// diagonalization of the term sum restricted to the state's excitation
/// block when the dimension permits.
CertificationOutcome certify(const StateVector& psi, const std::vector<BondTerm>& terms,
                             const CertificationConfig& config, std::uint64_t seed);

}  // namespace trsb

#endif
