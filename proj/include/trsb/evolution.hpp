#ifndef TRSB_EVOLUTION_HPP
#define TRSB_EVOLUTION_HPP

#include <Eigen/Eigenvalues>
#include <utility>
#include <vector>

#include "trsb/types.hpp"

// Exact unitary propagation. Static Hamiltonians are evolved through their
// eigendecomposition; the polynomial ramp
//
//     H(t) = [1 - (t/T)^2] H_start + (t/T)^2 H_target
//
// is integrated with piecewise-constant midpoint exponentials, doubling the
// step count until the final state moves by less than the tolerance.

namespace trsb {

/// Cached eigendecomposition of a Hermitian operator, for repeated
/// propagation of the same Hamiltonian to many times.
class Propagator {
public:
    explicit Propagator(const Operator& h);

    StateVector apply(const StateVector& psi0, double t) const;

    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    const Matrix& eigenvectors() const { return eigenvectors_; }
    const BasisId& basis() const { return basis_; }

private:
    BasisId basis_;
    Eigen::VectorXd eigenvalues_;
    Matrix eigenvectors_;
};

StateVector evolve_static(const Operator& h, const StateVector& psi0, double t);

struct RampSchedule {
    double total_time = 0.0;
    Operator h_start;
    Operator h_target;
    int steps = 64;            // initial step count; doubled until converged
    double tolerance = 1e-8;   // norm change under step doubling
    int max_steps = 1 << 20;

    void validate() const;
};

StateVector evolve_ramp(const RampSchedule& schedule, const StateVector& psi0);

/// Fixed-step variant used where a deterministic operation count matters
/// (likelihood evaluations); no refinement, no convergence check.
StateVector evolve_ramp_fixed(const RampSchedule& schedule, const StateVector& psi0, int steps);

struct Trajectory {
    std::vector<double> times;
    Eigen::MatrixXd site_occupations;   // times x N, <n_k> in [0, 1]
    Eigen::MatrixXd subspace_weights;   // times x (N+1), rows sum to 1
};

Trajectory quench_trajectory(const Operator& h, const StateVector& psi0,
                             const std::vector<double>& times);

/// |<psi_i|psi>|^2 per eigenvalue, with eigenvalues closer than
/// 1e-9 * ||H|| merged into one subspace (summed overlap).
std::vector<std::pair<double, double>> eigenstate_overlaps(const Operator& h,
                                                           const StateVector& psi);

Eigen::VectorXd site_occupations(const StateVector& psi);
Eigen::VectorXd subspace_weights(const StateVector& psi);

}  // namespace trsb

#endif
