#include "trsb/evolution.hpp"

#include <cmath>

#include "trsb/subspace.hpp"

namespace trsb {

namespace {

void check_compatible(const BasisId& a, const BasisId& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": basis mismatch");
}

void check_normalized(const StateVector& psi) {
    if (std::abs(psi.amplitudes.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("state vector is not normalized");
}

Vector propagate(const Eigen::VectorXd& evals, const Matrix& evecs, const Vector& psi, double t) {
    Vector coeffs = evecs.adjoint() * psi;
    for (int i = 0; i < coeffs.size(); ++i) coeffs(i) *= std::exp(-kI * evals(i) * t);
    return evecs * coeffs;
}

// One midpoint-exponential pass over the ramp with the given step count.
Vector ramp_pass(const RampSchedule& s, Vector psi, int steps) {
    const double dt = s.total_time / steps;
    for (int j = 0; j < steps; ++j) {
        const double x = (j + 0.5) * dt / s.total_time;
        const Matrix h = (1.0 - x * x) * s.h_start.matrix + (x * x) * s.h_target.matrix;
        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        psi = propagate(es.eigenvalues(), es.eigenvectors(), psi, dt);
    }
    return psi;
}

}  // namespace

Propagator::Propagator(const Operator& h) : basis_(h.basis) {
    if (!h.hermitian) require_hermitian(h.matrix, "Propagator");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    eigenvalues_ = es.eigenvalues();
    eigenvectors_ = es.eigenvectors();
}

StateVector Propagator::apply(const StateVector& psi0, double t) const {
    check_compatible(basis_, psi0.basis, "Propagator::apply");
    check_normalized(psi0);
    if (!std::isfinite(t)) throw std::invalid_argument("time must be finite");
    return StateVector{basis_, propagate(eigenvalues_, eigenvectors_, psi0.amplitudes, t)};
}

StateVector evolve_static(const Operator& h, const StateVector& psi0, double t) {
    return Propagator(h).apply(psi0, t);
}

void RampSchedule::validate() const {
    if (!(total_time > 0.0) || !std::isfinite(total_time))
        throw std::invalid_argument("ramp total_time must be positive and finite");
    if (!(h_start.basis == h_target.basis))
        throw std::invalid_argument("ramp endpoint Hamiltonians must share a basis");
    if (steps < 1) throw std::invalid_argument("ramp needs at least one step");
    if (!(tolerance > 0.0)) throw std::invalid_argument("ramp tolerance must be positive");
}

StateVector evolve_ramp_fixed(const RampSchedule& schedule, const StateVector& psi0, int steps) {
    schedule.validate();
    check_compatible(schedule.h_start.basis, psi0.basis, "evolve_ramp");
    check_normalized(psi0);
    return StateVector{psi0.basis, ramp_pass(schedule, psi0.amplitudes, steps)};
}

StateVector evolve_ramp(const RampSchedule& schedule, const StateVector& psi0) {
    schedule.validate();
    check_compatible(schedule.h_start.basis, psi0.basis, "evolve_ramp");
    check_normalized(psi0);

    int steps = schedule.steps;
    Vector coarse = ramp_pass(schedule, psi0.amplitudes, steps);
    while (true) {
        const int fine_steps = 2 * steps;
        Vector fine = ramp_pass(schedule, psi0.amplitudes, fine_steps);
        const double residual = (fine - coarse).norm();
        if (residual < schedule.tolerance) return StateVector{psi0.basis, std::move(fine)};
        if (fine_steps >= schedule.max_steps)
            throw std::runtime_error("ramp integration did not converge: residual " +
                                     std::to_string(residual) + " at " +
                                     std::to_string(fine_steps) + " steps");
        steps = fine_steps;
        coarse = std::move(fine);
    }
}

Eigen::VectorXd site_occupations(const StateVector& psi) {
    const int n = psi.basis.sites;
    Eigen::VectorXd occ = Eigen::VectorXd::Zero(n);
    auto add_state = [&](std::uint32_t state, double p) {
        for (int k = 1; k <= n; ++k)
            if (site_occupied(state, n, k)) occ(k - 1) += p;
    };
    if (psi.basis.excitation) {
        const auto sub = basis(n, *psi.basis.excitation);
        for (int i = 0; i < sub.dimension(); ++i)
            add_state(sub.states[i], std::norm(psi.amplitudes(i)));
    } else {
        for (int s = 0; s < psi.amplitudes.size(); ++s)
            add_state(std::uint32_t(s), std::norm(psi.amplitudes(s)));
    }
    return occ;
}

Eigen::VectorXd subspace_weights(const StateVector& psi) {
    const int n = psi.basis.sites;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n + 1);
    if (psi.basis.excitation) {
        w(*psi.basis.excitation) = psi.amplitudes.squaredNorm();
    } else {
        for (int s = 0; s < psi.amplitudes.size(); ++s)
            w(excitation_count(std::uint32_t(s))) += std::norm(psi.amplitudes(s));
    }
    return w;
}

Trajectory quench_trajectory(const Operator& h, const StateVector& psi0,
                             const std::vector<double>& times) {
    Propagator prop(h);
    Trajectory traj;
    traj.times = times;
    traj.site_occupations.resize(Eigen::Index(times.size()), psi0.basis.sites);
    traj.subspace_weights.resize(Eigen::Index(times.size()), psi0.basis.sites + 1);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const StateVector psi = prop.apply(psi0, times[i]);
        traj.site_occupations.row(Eigen::Index(i)) = site_occupations(psi).transpose();
        traj.subspace_weights.row(Eigen::Index(i)) = subspace_weights(psi).transpose();
    }
    return traj;
}

std::vector<std::pair<double, double>> eigenstate_overlaps(const Operator& h,
                                                           const StateVector& psi) {
    Propagator prop(h);
    check_compatible(prop.basis(), psi.basis, "eigenstate_overlaps");
    const auto& evals = prop.eigenvalues();
    const double scale = std::max(evals.cwiseAbs().maxCoeff(), 1e-300);
    const Vector coeffs = prop.eigenvectors().adjoint() * psi.amplitudes;

    std::vector<std::pair<double, double>> out;
    int i = 0;
    while (i < evals.size()) {
        int j = i;
        double weight = 0.0;
        while (j < evals.size() && evals(j) - evals(i) < 1e-9 * scale) {
            weight += std::norm(coeffs(j));
            ++j;
        }
        out.emplace_back(evals.segment(i, j - i).mean(), weight);
        i = j;
    }
    return out;
}

}  // namespace trsb
