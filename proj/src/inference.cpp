#include "trsb/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "trsb/evolution.hpp"
#include "trsb/stats.hpp"
#include "trsb/subspace.hpp"

namespace trsb {

namespace {

constexpr double kProfileDrop = 1.92;  // 95%, one parameter
constexpr double kNegInf = -1e300;

Operator block_hamiltonian(const FitProblem& p, double omega, double epsilon) {
    const double om = p.coupling_sign * omega;
    const auto sub = basis(p.sites, p.post_select_m);
    if (p.model == FitModel::AbRing) {
        return project(build_ab({p.sites, om, p.flux, epsilon}), sub);
    }
    return project(build_ladder({p.sites, om, p.flux, LadderGauge::Staggered}), sub);
}

std::vector<Eigen::VectorXd> forward_probabilities(const FitProblem& p, double omega,
                                                   double epsilon) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(p.data.size());
    const Operator h = block_hamiltonian(p, omega, epsilon);

    auto block_probs = [](const StateVector& psi) {
        Eigen::VectorXd probs(psi.amplitudes.size());
        for (int i = 0; i < probs.size(); ++i) probs(i) = std::norm(psi.amplitudes(i));
        const double total = probs.sum();
        return Eigen::VectorXd(probs / total);
    };

    if (p.forward == ForwardKind::Quench) {
        Propagator prop(h);
        for (const auto& [t, record] : p.data) out.push_back(block_probs(prop.apply(p.initial_state, t)));
        return out;
    }

    // Ramp1es: one pass through the ramp; in-ramp data times are recorded at
    // their nearest step edge (the discretization is part of the fit model).
    // Times past the ramp end continue exactly under the static target
    // Hamiltonian, matching readout at hold times after the preparation.
    const auto sub = basis(p.sites, p.post_select_m);
    const double delta = p.ramp_delta_factor * std::abs(omega);
    const Operator h0 = project(build_h0(p.sites, p.ramp_site, delta), sub);
    const double T = p.ramp_time;
    const double dt = T / p.ramp_steps;

    std::vector<int> edge(p.data.size());
    for (std::size_t i = 0; i < p.data.size(); ++i)
        edge[i] = int(std::clamp<long>(std::lround(p.data[i].first / dt), 0, p.ramp_steps));

    Vector psi = p.initial_state.amplitudes;
    std::size_t next = 0;
    std::vector<Eigen::VectorXd> by_index(p.data.size());
    for (int j = 0; j <= p.ramp_steps; ++j) {
        while (next < p.data.size() && p.data[next].first <= T && edge[next] == j) {
            by_index[next] = block_probs({sub.id(), psi});
            ++next;
        }
        if (j == p.ramp_steps) break;
        const double x = (j + 0.5) * dt / T;
        const Matrix hm = (1.0 - x * x) * h0.matrix + (x * x) * h.matrix;
        Eigen::SelfAdjointEigenSolver<Matrix> es(hm);
        Vector coeffs = es.eigenvectors().adjoint() * psi;
        for (int i = 0; i < coeffs.size(); ++i)
            coeffs(i) *= std::exp(-kI * es.eigenvalues()(i) * dt);
        psi = es.eigenvectors() * coeffs;
    }
    if (next < p.data.size()) {
        Propagator prop(h);
        const StateVector end{sub.id(), psi};
        for (; next < p.data.size(); ++next)
            by_index[next] =
                block_probs(prop.apply(end, p.data[next].first - T));
    }
    return by_index;
}

std::vector<std::uint64_t> block_counts(const ShotRecord& record, const SubspaceBasis& sub) {
    std::vector<std::uint64_t> counts(std::size_t(sub.dimension()), 0);
    for (const auto& [bits, count] : record.counts) {
        const int idx = sub.index_of(parse_bitstring(bits));
        if (idx >= 0) counts[std::size_t(idx)] += count;
    }
    return counts;
}

}  // namespace

std::pair<std::int64_t, std::int64_t> ProbabilityCache::key(double omega, double epsilon) {
    return {std::llround(omega * 1e9), std::llround(epsilon * 1e9)};
}

std::optional<std::vector<Eigen::VectorXd>> ProbabilityCache::find(double omega,
                                                                   double epsilon) const {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key(omega, epsilon));
    if (it == cache_.end()) return std::nullopt;
    return it->second;
}

void ProbabilityCache::store(double omega, double epsilon, std::vector<Eigen::VectorXd> probs) {
    std::lock_guard lock(mutex_);
    cache_.emplace(key(omega, epsilon), std::move(probs));
}

void FitProblem::validate() const {
    check_sites(sites, 3);
    if (data.size() < 2) throw std::invalid_argument("fit needs records at >= 2 distinct times");
    for (const auto& [t, record] : data) {
        if (record.sites != sites) throw std::invalid_argument("fit records must share N");
        if (record.setting != SettingKind::Occupancy)
            throw std::invalid_argument("fit uses OCCUPANCY records");
        if (!std::isfinite(t) || t < 0) throw std::invalid_argument("fit record time invalid");
    }
    for (std::size_t i = 1; i < data.size(); ++i)
        if (data[i].first <= data[i - 1].first)
            throw std::invalid_argument("fit record times must be strictly increasing");
    if (!(initial_state.basis == BasisId::block(sites, post_select_m)))
        throw std::invalid_argument("fit initial state must live in the post-selected block");
    if (!(omega_box[0] > 0) || !(omega_box[1] > omega_box[0]))
        throw std::invalid_argument("fit omega box must satisfy 0 < lo < hi");
    if (fit_epsilon && !(epsilon_box[0] >= 0 && epsilon_box[1] > epsilon_box[0]))
        throw std::invalid_argument("fit epsilon box must satisfy 0 <= lo < hi");
    if (forward == ForwardKind::Ramp1es) {
        if (!(ramp_time > 0)) throw std::invalid_argument("ramp fit needs ramp_time > 0");
        if (ramp_steps < 8) throw std::invalid_argument("ramp fit needs >= 8 steps");
    }
    if (model == FitModel::Ladder && fit_epsilon)
        throw std::invalid_argument("epsilon is a ring parameter; the ladder fit has none");
    if (grid_points < 3) throw std::invalid_argument("fit grid needs >= 3 points");
}

std::vector<Eigen::VectorXd> model_probabilities(const FitProblem& problem, double omega,
                                                 double epsilon) {
    if (problem.cache) {
        if (auto hit = problem.cache->find(omega, epsilon)) return *hit;
        auto probs = forward_probabilities(problem, omega, epsilon);
        problem.cache->store(omega, epsilon, probs);
        return probs;
    }
    return forward_probabilities(problem, omega, epsilon);
}

double loglik(const FitProblem& problem, double omega, double epsilon) {
    if (!(omega > 0) || !std::isfinite(omega))
        throw std::invalid_argument("loglik: omega must be positive");
    if (!(epsilon >= 0) || !std::isfinite(epsilon))
        throw std::invalid_argument("loglik: epsilon must be nonnegative");

    const auto sub = basis(problem.sites, problem.post_select_m);
    const auto probs = model_probabilities(problem, omega, epsilon);
    double ll = 0.0;
    for (std::size_t i = 0; i < problem.data.size(); ++i) {
        const auto counts = block_counts(problem.data[i].second, sub);
        for (std::size_t c = 0; c < counts.size(); ++c) {
            if (counts[c] == 0) continue;  // 0 * log(p) == 0 by convention
            const double p = probs[i](Eigen::Index(c));
            if (p <= 0.0) return kNegInf;
            ll += double(counts[c]) * std::log(p);
        }
    }
    return ll;
}

FitResult fit(const FitProblem& problem) {
    problem.validate();
    FitResult result;

    const int g = problem.grid_points;
    auto grid = [&](const std::array<double, 2>& box, int i) {
        return box[0] + (box[1] - box[0]) * double(i) / double(g - 1);
    };

    result.omega_grid.resize(std::size_t(g));
    for (int i = 0; i < g; ++i) result.omega_grid[std::size_t(i)] = grid(problem.omega_box, i);
    const int ge = problem.fit_epsilon ? g : 1;
    result.epsilon_grid.resize(std::size_t(ge));
    for (int j = 0; j < ge; ++j)
        result.epsilon_grid[std::size_t(j)] =
            problem.fit_epsilon ? grid(problem.epsilon_box, j) : problem.fixed_epsilon;

    auto objective = [&](double omega, double epsilon) { return loglik(problem, omega, epsilon); };

    // Coarse grid scan.
    result.surface.resize(g, ge);
    double best_omega = result.omega_grid[0], best_eps = result.epsilon_grid[0];
    double best = kNegInf;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < ge; ++j) {
            const double v = objective(result.omega_grid[std::size_t(i)],
                                       result.epsilon_grid[std::size_t(j)]);
            result.surface(i, j) = v;
            if (v > best) {
                best = v;
                best_omega = result.omega_grid[std::size_t(i)];
                best_eps = result.epsilon_grid[std::size_t(j)];
            }
        }

    // Coordinate-wise golden-section refinement around the grid optimum. The
    // bracket shrinks once the coordinate steps stagnate, so correlated
    // (omega, epsilon) valleys are followed instead of zigzagged across.
    double omega_span = (problem.omega_box[1] - problem.omega_box[0]) / double(g - 1);
    double eps_span =
        problem.fit_epsilon ? (problem.epsilon_box[1] - problem.epsilon_box[0]) / double(g - 1)
                            : 0.0;
    bool converged = false;
    const int max_rounds = 40;
    double current = best;
    for (int round = 0; round < max_rounds; ++round) {
        const double prev_omega = best_omega, prev_eps = best_eps;
        const double olo = std::max(problem.omega_box[0], best_omega - omega_span);
        const double ohi = std::min(problem.omega_box[1], best_omega + omega_span);
        best_omega = golden_section_minimize(
            [&](double w) { return -objective(w, best_eps); }, olo, ohi, 1e-8);
        if (problem.fit_epsilon) {
            const double elo = std::max(problem.epsilon_box[0], best_eps - eps_span);
            const double ehi = std::min(problem.epsilon_box[1], best_eps + eps_span);
            best_eps = golden_section_minimize(
                [&](double e) { return -objective(best_omega, e); }, elo, ehi, 1e-8);
        }
        const double improved = objective(best_omega, best_eps);
        const double gain = improved - current;
        current = improved;
        // shrink a bracket only once its coordinate stops moving across it
        if (std::abs(best_omega - prev_omega) < omega_span / 4)
            omega_span = std::max(omega_span / 2, 1e-7 * std::max(1.0, std::abs(best_omega)));
        if (problem.fit_epsilon && std::abs(best_eps - prev_eps) < eps_span / 4)
            eps_span = std::max(eps_span / 2, 1e-7);
        if (round >= 3 && gain < 1e-7) {
            converged = true;
            break;
        }
    }
    best = current;

    // Joint polish: coordinate descent crawls along the correlated
    // (omega, epsilon) valley, so finish with a simplex in scaled coordinates.
    if (problem.fit_epsilon) {
        const double sw = (problem.omega_box[1] - problem.omega_box[0]) / double(g - 1);
        const double se = (problem.epsilon_box[1] - problem.epsilon_box[0]) / double(g - 1);
        auto scaled = [&](const std::vector<double>& x) {
            const double w = x[0] * sw, e = x[1] * se;
            if (w < problem.omega_box[0] || w > problem.omega_box[1] ||
                e < problem.epsilon_box[0] || e > problem.epsilon_box[1])
                return 1e300;
            return -objective(w, e);
        };
        const auto polished =
            nelder_mead(scaled, {best_omega / sw, best_eps / se}, 0.5, 1e-12, 600);
        if (-polished.value > best) {
            best_omega = polished.x[0] * sw;
            best_eps = polished.x[1] * se;
            best = -polished.value;
            converged = converged || polished.converged;
        }
    }

    result.estimates["omega"] = best_omega;
    if (problem.fit_epsilon) result.estimates["epsilon"] = best_eps;
    result.loglik = best;
    result.converged = converged && std::isfinite(best);

    // Profile-likelihood confidence intervals. The nuisance maximization is
    // warm-started from the previous profile point so the correlated valley
    // is followed; a restart from the joint optimum guards against drifting
    // onto a secondary lobe.
    struct ProfileState {
        double warm;
    };
    auto profile = [&](bool over_omega, double value, ProfileState& state) -> double {
        if (over_omega && !problem.fit_epsilon) return objective(value, best_eps);
        const auto& box = over_omega ? problem.epsilon_box : problem.omega_box;
        const double span = (box[1] - box[0]) / double(g - 1);
        auto slice = [&](double nuisance) {
            return over_omega ? objective(value, nuisance) : objective(nuisance, value);
        };
        // one local search around the warm center, guarded by the value at the
        // joint optimum's nuisance coordinate
        const double guard_n = over_omega ? best_eps : best_omega;
        double center = state.warm;
        const double guard_v = slice(guard_n);
        double best_n = guard_n, best_v = guard_v;
        for (int pass = 0; pass < 2; ++pass) {
            const double lo = std::max(box[0], center - 2 * span);
            const double hi = std::min(box[1], center + 2 * span);
            const double n =
                golden_section_minimize([&](double x) { return -slice(x); }, lo, hi, 1e-7);
            const double v = slice(n);
            if (v > best_v) {
                best_v = v;
                best_n = n;
            }
            // if the guard point beats the warm-local search, search there too
            if (pass == 0 && guard_v > v && std::abs(guard_n - center) > span) center = guard_n;
            else break;
        }
        state.warm = best_n;
        return best_v;
    };

    auto crossing = [&](bool over_omega, double at_best, double nuisance_best, double box_lo,
                        double box_hi, bool upper) -> double {
        const double target = best - kProfileDrop;
        ProfileState state{nuisance_best};
        double inside = at_best;
        double outside = upper ? box_hi : box_lo;
        // march outward so the warm start tracks the valley continuously
        const int march = 8;
        double reached = inside;
        bool crossed = false;
        for (int k = 1; k <= march; ++k) {
            const double v = inside + (outside - inside) * double(k) / march;
            if (profile(over_omega, v, state) > target) {
                reached = v;
            } else {
                outside = v;
                crossed = true;
                break;
            }
        }
        if (!crossed) {
            result.flat_direction = true;  // no crossing inside the box
            return outside;
        }
        inside = reached;
        for (int it = 0; it < 30; ++it) {
            const double mid = 0.5 * (inside + outside);
            if (profile(over_omega, mid, state) > target) inside = mid;
            else outside = mid;
            if (std::abs(outside - inside) < 1e-4 * (std::abs(inside) + 1e-9)) break;
        }
        return 0.5 * (inside + outside);
    };

    result.ci95["omega"] = {
        crossing(true, best_omega, best_eps, problem.omega_box[0], problem.omega_box[1], false),
        crossing(true, best_omega, best_eps, problem.omega_box[0], problem.omega_box[1], true)};
    if (problem.fit_epsilon)
        result.ci95["epsilon"] = {crossing(false, best_eps, best_omega, problem.epsilon_box[0],
                                           problem.epsilon_box[1], false),
                                  crossing(false, best_eps, best_omega, problem.epsilon_box[0],
                                           problem.epsilon_box[1], true)};
    return result;
}

std::vector<std::pair<double, ShotRecord>> synthesize_records(const FitProblem& problem,
                                                              double omega, double epsilon,
                                                              const std::vector<double>& times,
                                                              std::uint64_t shots,
                                                              std::uint64_t seed) {
    FitProblem synth = problem;
    synth.data.clear();
    ShotRecord blank;
    blank.setting = SettingKind::Occupancy;
    blank.sites = problem.sites;
    blank.shots = 0;
    for (double t : times) synth.data.emplace_back(t, blank);

    const auto probs = forward_probabilities(synth, omega, epsilon);
    const auto sub = basis(problem.sites, problem.post_select_m);

    std::vector<std::pair<double, ShotRecord>> out;
    out.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::vector<double> cumulative(std::size_t(sub.dimension()));
        double acc = 0.0;
        for (int c = 0; c < sub.dimension(); ++c) {
            acc += probs[i](c);
            cumulative[std::size_t(c)] = acc;
        }
        Rng rng(mix_seed(seed, i));
        ShotRecord record{SettingKind::Occupancy, problem.sites, shots, seed, {}};
        for (std::uint64_t k = 0; k < shots; ++k) {
            const std::size_t c = rng.sample(cumulative);
            ++record.counts[bitstring(sub.states[c], problem.sites)];
        }
        out.emplace_back(times[i], std::move(record));
    }
    return out;
}

void FitResult::write_report(std::ostream& os) const {
    os << "converged=" << (converged ? 1 : 0) << "\n";
    os << "flat_direction=" << (flat_direction ? 1 : 0) << "\n";
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    os << "loglik=" << fmt(loglik) << "\n";
    for (const auto& [name, value] : estimates) {
        os << name << "=" << fmt(value);
        auto it = ci95.find(name);
        if (it != ci95.end())
            os << " ci95=[" << fmt(it->second.lo) << "," << fmt(it->second.hi) << "]";
        os << "\n";
    }
    os << "# loglik surface: rows omega, cols epsilon\n";
    os << "# omega_grid:";
    for (double w : omega_grid) os << " " << fmt(w);
    os << "\n# epsilon_grid:";
    for (double e : epsilon_grid) os << " " << fmt(e);
    os << "\n";
    for (Eigen::Index i = 0; i < surface.rows(); ++i) {
        for (Eigen::Index j = 0; j < surface.cols(); ++j)
            os << (j ? "," : "") << fmt(surface(i, j));
        os << "\n";
    }
}

}  // namespace trsb
