#ifndef TRSB_MEASUREMENT_HPP
#define TRSB_MEASUREMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "trsb/hopping.hpp"
#include "trsb/stats.hpp"
#include "trsb/types.hpp"

// Projective readout with shot noise, post-selection, single-excitation
// tomography and sampled local-energy estimation.
//
// Rotation conventions (fixed once): U_x(theta) = exp(-i theta sx / 2),
// U_z(theta) = exp(-i theta sz / 2). The three tomography settings are
//   Occupancy   — no pre-rotation, measure in the z basis;
//   InPhase     — global U_x(pi/2) on all sites;
//   OutOfPhase  — U_z(pi/2) on site 2 and U_z(pi) on site 3, then the
//                 global U_x(pi/2).

namespace trsb {

enum class SettingKind { Occupancy, InPhase, OutOfPhase, Custom };

std::string to_string(SettingKind kind);
SettingKind setting_from_string(const std::string& name);

struct MeasurementSetting {
    SettingKind kind = SettingKind::Occupancy;
    int sites = 0;
    std::vector<Eigen::Matrix2cd> rotations;  // one per site, applied before readout

    static MeasurementSetting occupancy(int sites);
    static MeasurementSetting in_phase(int sites);
    static MeasurementSetting out_of_phase();  // N=3 tomography setting
    /// Per-site rotations supplied by the caller (local-energy settings).
    static MeasurementSetting custom(int sites, std::vector<Eigen::Matrix2cd> rotations);

    bool trivial() const;  // no pre-rotations
};

Eigen::Matrix2cd rotation_x(double theta);
Eigen::Matrix2cd rotation_y(double theta);
Eigen::Matrix2cd rotation_z(double theta);

struct ShotRecord {
    SettingKind setting = SettingKind::Occupancy;
    int sites = 0;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    std::map<std::string, std::uint64_t> counts;  // bitstring -> count

    void write(std::ostream& os) const;
    static ShotRecord read(std::istream& is);
    void save(const std::string& path) const;
    static ShotRecord load(const std::string& path);
};

/// Born probabilities of every bitstring after the setting's pre-rotations.
Eigen::VectorXd outcome_probabilities(const StateVector& psi, const MeasurementSetting& setting);

ShotRecord sample_shots(const StateVector& psi, const MeasurementSetting& setting,
                        std::uint64_t shots, std::uint64_t seed);

struct PostSelection {
    Eigen::VectorXd occupations;  // conditional <n_k> given m excitations
    double weight = 0.0;          // P(total excitation = m)
    std::uint64_t retained = 0;   // shots kept (sampled input only)
    std::vector<Interval> wilson95;  // per-site 95% score intervals (sampled input only)
};

PostSelection post_select(const ShotRecord& record, int m);
PostSelection post_select(const Eigen::VectorXd& probabilities, int sites, int m);

/// Dephasing channel: coherences between different excitation numbers are
/// zeroed; the single-excitation block is kept intact; every other block is
/// reduced to its diagonal. Trace-preserving, positive, idempotent.
Matrix dephase_subspaces(const StateVector& psi);
Matrix dephase_subspaces(const Matrix& rho, int sites);

struct TomographyEstimate {
    Eigen::VectorXd p;      // per-site probabilities, sum 1
    Eigen::VectorXd theta;  // per-site phases, theta(0) == 0
    double residual = 0.0;  // least-squares objective at the solution
    bool clamped = false;   // moment initialization hit an infeasible value

    StateVector state() const;  // the reconstructed single-excitation state
};

/// Reconstruct a single-excitation pure state from the three settings by
/// least-squares inversion of the exact simulated measurement map.
TomographyEstimate tomography_1es(const ShotRecord& occupancy, const ShotRecord& in_phase,
                                  const ShotRecord& out_of_phase);

double fidelity(const StateVector& a, const StateVector& b);

double current_expectation(const StateVector& psi, const AbRingSpec& spec);
double current_expectation(const Matrix& rho, const AbRingSpec& spec);

struct EnergyEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// <sum of bond terms> from sampled two-site correlators, one X-type and one
/// Y-type setting per bond (the bond coupling's phase is absorbed by a z
/// rotation first). shots_per_setting == 0 computes exact expectations.
/// Works for any Hermitian bond sum, including the current operator.
EnergyEstimate local_energy_estimate(const StateVector& psi, const std::vector<BondTerm>& terms,
                                     std::uint64_t shots_per_setting, std::uint64_t seed);

}  // namespace trsb

#endif
