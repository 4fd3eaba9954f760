#include "trsb/certification.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include <json.hpp>

#include "trsb/stats.hpp"
#include "trsb/subspace.hpp"

namespace trsb {

void CertificationConfig::validate() const {
    if (!(f_threshold > 0.0 && f_threshold < 1.0))
        throw std::invalid_argument("certification threshold must be in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("certification alpha must be in (0, 1)");
    if (!(gap > 0.0) || !std::isfinite(gap))
        throw std::invalid_argument("certification needs a positive spectral gap");
    if (!std::isfinite(ground_energy))
        throw std::invalid_argument("certification ground energy must be finite");
}

namespace {

void cross_check_spectrum(const StateVector& psi, const std::vector<BondTerm>& terms,
                          const CertificationConfig& config) {
    const int sites = psi.basis.sites;
    if (sites > 12) return;  // skip the check when diagonalization is too large
    const int dim = 1 << sites;
    Matrix h = Matrix::Zero(dim, dim);
    for (const auto& term : terms) h += bond_term_operator(term, sites).matrix;
    Operator full{BasisId::full(sites), std::move(h), true};

    Eigen::VectorXd evals;
    if (psi.basis.excitation) {
        const Operator block = project(full, basis(sites, *psi.basis.excitation));
        evals = Eigen::SelfAdjointEigenSolver<Matrix>(block.matrix).eigenvalues();
    } else {
        evals = Eigen::SelfAdjointEigenSolver<Matrix>(full.matrix).eigenvalues();
    }
    const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
    if (std::abs(evals(0) - config.ground_energy) > 1e-6 * scale)
        throw std::invalid_argument("certification config: ground energy inconsistent with the terms");
    const double gap = evals(1) - evals(0);
    if (std::abs(gap - config.gap) > 1e-6 * scale)
        throw std::invalid_argument("certification config: spectral gap inconsistent with the terms");
}

}  // namespace

CertificationOutcome certify(const StateVector& psi, const std::vector<BondTerm>& terms,
                             const CertificationConfig& config, std::uint64_t seed) {
    config.validate();
    if (terms.empty()) throw std::invalid_argument("certify: no Hamiltonian terms");
    cross_check_spectrum(psi, terms, config);

    const double z = normal_quantile(1.0 - config.alpha);

    std::uint64_t shots_per_setting = 0;
    double delta = 0.0;
    if (config.shots_budget > 0) {
        shots_per_setting = config.shots_budget / (2 * terms.size());
        if (shots_per_setting < 1)
            throw std::invalid_argument("certify: shot budget below one shot per setting");
        // a-priori resolution: every +-1 correlator has variance at most 1/S
        double var_max = 0.0;
        for (const auto& term : terms) {
            const double mag = std::abs(term.coupling);
            var_max += 2.0 * mag * mag / 4.0 / double(shots_per_setting);
        }
        delta = z * std::sqrt(var_max) / config.gap;
    }

    const EnergyEstimate energy = local_energy_estimate(psi, terms, shots_per_setting, seed);
    const double upper_energy = energy.value + z * energy.std_error;
    const double f_lower = 1.0 - (upper_energy - config.ground_energy) / config.gap;

    CertificationOutcome outcome;
    outcome.energy = energy.value;
    outcome.energy_std_error = energy.std_error;
    outcome.fidelity_lower_bound = f_lower;
    outcome.delta_gap = delta;
    outcome.band_resolved = delta < 1.0 - config.f_threshold;
    outcome.decision = (outcome.band_resolved && f_lower >= config.f_threshold)
                           ? Decision::Accept
                           : Decision::Reject;
    return outcome;
}

std::string CertificationOutcome::to_json() const {
    nlohmann::json j;
    j["decision"] = decision == Decision::Accept ? "ACCEPT" : "REJECT";
    j["energy"] = energy;
    j["energy_std_error"] = energy_std_error;
    j["fidelity_lower_bound"] = fidelity_lower_bound;
    j["delta"] = delta_gap;
    j["band_resolved"] = band_resolved;
    return j.dump();
}

}  // namespace trsb
