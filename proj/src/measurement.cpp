#include "trsb/measurement.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "trsb/stats.hpp"
#include "trsb/subspace.hpp"

namespace trsb {

namespace {

// In the site encoding |0> is index 0 and |1> (the excited state, sz = +1)
// is index 1, so sz = diag(-1, +1) here.

void apply_single_site(Vector& psi, int sites, int site, const Eigen::Matrix2cd& u) {
    const std::uint32_t mask = site_mask(sites, site);
    const int dim = int(psi.size());
    for (int s = 0; s < dim; ++s) {
        if (s & mask) continue;
        const int s1 = int(std::uint32_t(s) | mask);
        const Complex a0 = psi(s), a1 = psi(s1);
        psi(s) = u(0, 0) * a0 + u(0, 1) * a1;
        psi(s1) = u(1, 0) * a0 + u(1, 1) * a1;
    }
}

double zz_correlator(const Eigen::VectorXd& probs, int sites, int site_a, int site_b) {
    double r = 0.0;
    for (int s = 0; s < probs.size(); ++s) {
        const double za = site_occupied(std::uint32_t(s), sites, site_a) ? 1.0 : -1.0;
        const double zb = site_occupied(std::uint32_t(s), sites, site_b) ? 1.0 : -1.0;
        r += probs(s) * za * zb;
    }
    return r;
}

double zz_correlator(const ShotRecord& record, int site_a, int site_b) {
    double sum = 0.0;
    for (const auto& [bits, count] : record.counts) {
        const std::uint32_t s = parse_bitstring(bits);
        const double za = site_occupied(s, record.sites, site_a) ? 1.0 : -1.0;
        const double zb = site_occupied(s, record.sites, site_b) ? 1.0 : -1.0;
        sum += za * zb * double(count);
    }
    return sum / double(record.shots);
}

}  // namespace

std::string to_string(SettingKind kind) {
    switch (kind) {
        case SettingKind::Occupancy: return "OCCUPANCY";
        case SettingKind::InPhase: return "IN_PHASE";
        case SettingKind::OutOfPhase: return "OUT_OF_PHASE";
        case SettingKind::Custom: return "CUSTOM";
    }
    throw std::logic_error("unreachable");
}

SettingKind setting_from_string(const std::string& name) {
    if (name == "OCCUPANCY") return SettingKind::Occupancy;
    if (name == "IN_PHASE") return SettingKind::InPhase;
    if (name == "OUT_OF_PHASE") return SettingKind::OutOfPhase;
    if (name == "CUSTOM") return SettingKind::Custom;
    throw std::invalid_argument("unknown measurement setting: " + name);
}

Eigen::Matrix2cd rotation_x(double theta) {
    Eigen::Matrix2cd u;
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    u << c, -kI * s, -kI * s, c;
    return u;
}

Eigen::Matrix2cd rotation_y(double theta) {
    Eigen::Matrix2cd u;
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    u << c, s, -s, c;
    return u;
}

Eigen::Matrix2cd rotation_z(double theta) {
    Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
    u(0, 0) = std::exp(kI * theta / 2.0);
    u(1, 1) = std::exp(-kI * theta / 2.0);
    return u;
}

MeasurementSetting MeasurementSetting::occupancy(int sites) {
    check_sites(sites, 1);
    return {SettingKind::Occupancy, sites,
            std::vector<Eigen::Matrix2cd>(sites, Eigen::Matrix2cd::Identity())};
}

MeasurementSetting MeasurementSetting::in_phase(int sites) {
    check_sites(sites, 1);
    return {SettingKind::InPhase, sites,
            std::vector<Eigen::Matrix2cd>(sites, rotation_x(M_PI / 2))};
}

MeasurementSetting MeasurementSetting::out_of_phase() {
    const Eigen::Matrix2cd gx = rotation_x(M_PI / 2);
    std::vector<Eigen::Matrix2cd> rot{gx, gx * rotation_z(M_PI / 2), gx * rotation_z(M_PI)};
    return {SettingKind::OutOfPhase, 3, std::move(rot)};
}

MeasurementSetting MeasurementSetting::custom(int sites, std::vector<Eigen::Matrix2cd> rotations) {
    if (int(rotations.size()) != sites)
        throw std::invalid_argument("custom setting needs one rotation per site");
    return {SettingKind::Custom, sites, std::move(rotations)};
}

bool MeasurementSetting::trivial() const {
    for (const auto& u : rotations)
        if ((u - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 0) return false;
    return true;
}

Eigen::VectorXd outcome_probabilities(const StateVector& psi, const MeasurementSetting& setting) {
    if (psi.basis.sites != setting.sites)
        throw std::invalid_argument("measurement setting site count mismatch");
    StateVector full = embed_full(psi);
    if (!setting.trivial())
        for (int k = 1; k <= setting.sites; ++k)
            apply_single_site(full.amplitudes, setting.sites, k, setting.rotations[k - 1]);
    Eigen::VectorXd probs(full.amplitudes.size());
    for (int s = 0; s < probs.size(); ++s) probs(s) = std::norm(full.amplitudes(s));
    const double total = probs.sum();
    if (std::abs(total - 1.0) > 1e-9)
        throw std::runtime_error("outcome probabilities do not sum to 1 (state not normalized?)");
    return probs / total;
}

ShotRecord sample_shots(const StateVector& psi, const MeasurementSetting& setting,
                        std::uint64_t shots, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("sample_shots needs at least one shot");
    const Eigen::VectorXd probs = outcome_probabilities(psi, setting);
    std::vector<double> cumulative(std::size_t(probs.size()));
    double acc = 0.0;
    for (int s = 0; s < probs.size(); ++s) {
        acc += probs(s);
        cumulative[std::size_t(s)] = acc;
    }
    Rng rng(seed);
    ShotRecord record{setting.kind, setting.sites, shots, seed, {}};
    for (std::uint64_t i = 0; i < shots; ++i) {
        const std::size_t s = rng.sample(cumulative);
        ++record.counts[bitstring(std::uint32_t(s), setting.sites)];
    }
    return record;
}

PostSelection post_select(const ShotRecord& record, int m) {
    if (m < 0 || m > record.sites) throw std::invalid_argument("post_select: m out of range");
    std::uint64_t retained = 0;
    Eigen::VectorXd occ = Eigen::VectorXd::Zero(record.sites);
    for (const auto& [bits, count] : record.counts) {
        const std::uint32_t s = parse_bitstring(bits);
        if (excitation_count(s) != m) continue;
        retained += count;
        for (int k = 1; k <= record.sites; ++k)
            if (site_occupied(s, record.sites, k)) occ(k - 1) += double(count);
    }
    if (retained == 0)
        throw std::runtime_error("post_select: no shots in the requested excitation subspace");
    PostSelection out;
    out.weight = double(retained) / double(record.shots);
    out.retained = retained;
    out.wilson95.reserve(std::size_t(record.sites));
    for (int k = 0; k < record.sites; ++k)
        out.wilson95.push_back(wilson_interval(std::uint64_t(occ(k)), retained, 1.959964));
    out.occupations = occ / double(retained);
    return out;
}

PostSelection post_select(const Eigen::VectorXd& probabilities, int sites, int m) {
    if (m < 0 || m > sites) throw std::invalid_argument("post_select: m out of range");
    if (probabilities.size() != (1 << sites))
        throw std::invalid_argument("post_select: probability vector must cover the full space");
    double weight = 0.0;
    Eigen::VectorXd occ = Eigen::VectorXd::Zero(sites);
    for (int s = 0; s < probabilities.size(); ++s) {
        if (excitation_count(std::uint32_t(s)) != m) continue;
        weight += probabilities(s);
        for (int k = 1; k <= sites; ++k)
            if (site_occupied(std::uint32_t(s), sites, k)) occ(k - 1) += probabilities(s);
    }
    if (weight <= 0.0)
        throw std::runtime_error("post_select: requested excitation subspace has zero weight");
    occ /= weight;
    return {std::move(occ), weight, 0};
}

Matrix dephase_subspaces(const Matrix& rho, int sites) {
    if (rho.rows() != (1 << sites) || rho.cols() != (1 << sites))
        throw std::invalid_argument("dephase_subspaces: density matrix must act on the full space");
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (int i = 0; i < rho.rows(); ++i) {
        const int mi = excitation_count(std::uint32_t(i));
        for (int j = 0; j < rho.cols(); ++j) {
            const int mj = excitation_count(std::uint32_t(j));
            if (i == j || (mi == 1 && mj == 1)) out(i, j) = rho(i, j);
        }
    }
    return out;
}

Matrix dephase_subspaces(const StateVector& psi) {
    const StateVector full = embed_full(psi);
    const Matrix rho = full.amplitudes * full.amplitudes.adjoint();
    return dephase_subspaces(rho, psi.basis.sites);
}

StateVector TomographyEstimate::state() const {
    Vector amp(p.size());
    for (int i = 0; i < p.size(); ++i)
        amp(i) = std::sqrt(std::max(0.0, p(i))) * std::exp(kI * theta(i));
    amp.normalize();
    return StateVector{BasisId::block(int(p.size()), 1), std::move(amp)};
}

double fidelity(const StateVector& a, const StateVector& b) {
    const StateVector fa = embed_full(a), fb = embed_full(b);
    if (!(fa.basis == fb.basis)) throw std::invalid_argument("fidelity: basis mismatch");
    return std::norm(fa.amplitudes.dot(fb.amplitudes));
}

namespace {

Eigen::VectorXd empirical_frequencies(const ShotRecord& record) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(1 << record.sites);
    for (const auto& [bits, count] : record.counts)
        f(int(parse_bitstring(bits))) += double(count) / double(record.shots);
    return f;
}

struct TomographyParams {
    double a, b, theta2, theta3;

    Eigen::VectorXd probs() const {
        const double ca = std::cos(a), sa = std::sin(a);
        const double cb = std::cos(b), sb = std::sin(b);
        Eigen::VectorXd p(3);
        p << ca * ca, sa * sa * cb * cb, sa * sa * sb * sb;
        return p;
    }

    StateVector state() const {
        const Eigen::VectorXd p = probs();
        Vector amp(3);
        amp << std::sqrt(p(0)), std::sqrt(p(1)) * std::exp(kI * theta2),
            std::sqrt(p(2)) * std::exp(kI * theta3);
        return StateVector{BasisId::block(3, 1), std::move(amp)};
    }
};

}  // namespace

TomographyEstimate tomography_1es(const ShotRecord& occupancy, const ShotRecord& in_phase,
                                  const ShotRecord& out_of_phase) {
    if (occupancy.sites != 3 || in_phase.sites != 3 || out_of_phase.sites != 3)
        throw std::invalid_argument("tomography_1es is defined for N=3");
    if (occupancy.setting != SettingKind::Occupancy || in_phase.setting != SettingKind::InPhase ||
        out_of_phase.setting != SettingKind::OutOfPhase)
        throw std::invalid_argument("tomography_1es needs one record per setting, in order");

    const std::array<MeasurementSetting, 3> settings{MeasurementSetting::occupancy(3),
                                                     MeasurementSetting::in_phase(3),
                                                     MeasurementSetting::out_of_phase()};
    const std::array<Eigen::VectorXd, 3> freqs{empirical_frequencies(occupancy),
                                               empirical_frequencies(in_phase),
                                               empirical_frequencies(out_of_phase)};

    auto objective = [&](const std::vector<double>& x) {
        const TomographyParams params{x[0], x[1], x[2], x[3]};
        const StateVector psi = params.state();
        double sum = 0.0;
        for (int k = 0; k < 3; ++k) {
            const Eigen::VectorXd model = outcome_probabilities(psi, settings[k]);
            sum += (model - freqs[k]).squaredNorm();
        }
        return sum;
    };

    // Initial occupations from the post-selected occupancy record.
    Eigen::VectorXd p0 = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    try {
        p0 = post_select(occupancy, 1).occupations;
    } catch (const std::runtime_error&) {
        // no single-excitation counts; keep the uniform start
    }
    p0 = p0.cwiseMax(1e-4);
    p0 /= p0.sum();
    const double a0 = std::atan2(std::sqrt(p0(1) + p0(2)), std::sqrt(p0(0)));
    const double b0 = std::atan2(std::sqrt(p0(2)), std::sqrt(std::max(p0(1), 1e-12)));

    // Moment-based phase start from the pair correlators of the exact map:
    // in-phase ZZ -> 2 sqrt(p_j p_k) cos(theta_k - theta_j), out-of-phase
    // pairs (1,2) and (2,3) -> the matching sines.
    bool clamped = false;
    auto moment_angle = [&](int sa, int sb, double op_sign, double* angle) {
        const double denom = 2 * std::sqrt(p0(sa - 1) * p0(sb - 1));
        const double cosv = zz_correlator(in_phase, sa, sb);
        const double sinv = op_sign * zz_correlator(out_of_phase, sa, sb);
        if (std::hypot(cosv, sinv) > denom * (1 + 1e-9)) clamped = true;
        *angle = std::atan2(sinv, cosv);
    };
    double th2 = 0.0, d23 = 0.0;
    moment_angle(1, 2, +1.0, &th2);
    moment_angle(2, 3, +1.0, &d23);

    std::vector<std::vector<double>> starts;
    starts.push_back({a0, b0, th2, th2 + d23});
    const double half_pi = M_PI / 2;
    for (double t2 : {0.0, half_pi, M_PI, -half_pi})
        for (double t3 : {0.0, half_pi, M_PI, -half_pi}) starts.push_back({a0, b0, t2, t3});

    NelderMeadResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        auto r = nelder_mead(objective, s, 0.25, 1e-14, 1200);
        if (r.value < best.value) best = r;
    }
    best = nelder_mead(objective, best.x, 0.02, 1e-16, 2000);

    const TomographyParams params{best.x[0], best.x[1], best.x[2], best.x[3]};
    TomographyEstimate est;
    est.p = params.probs();
    est.theta = Eigen::VectorXd::Zero(3);
    est.theta(1) = std::remainder(params.theta2, 2 * M_PI);
    est.theta(2) = std::remainder(params.theta3, 2 * M_PI);
    est.residual = best.value;
    est.clamped = clamped;
    return est;
}

double current_expectation(const StateVector& psi, const AbRingSpec& spec) {
    const Operator c = current_operator(spec);
    const StateVector full = embed_full(psi);
    if (full.basis.sites != spec.sites) throw std::invalid_argument("current_expectation: N mismatch");
    const Complex v = full.amplitudes.dot(c.matrix * full.amplitudes);
    return v.real();
}

double current_expectation(const Matrix& rho, const AbRingSpec& spec) {
    const Operator c = current_operator(spec);
    if (rho.rows() != c.matrix.rows())
        throw std::invalid_argument("current_expectation: density matrix dimension mismatch");
    return (c.matrix * rho).trace().real();
}

EnergyEstimate local_energy_estimate(const StateVector& psi, const std::vector<BondTerm>& terms,
                                     std::uint64_t shots_per_setting, std::uint64_t seed) {
    const int sites = psi.basis.sites;
    const StateVector full = embed_full(psi);
    double value = 0.0;
    double variance = 0.0;

    for (std::size_t t = 0; t < terms.size(); ++t) {
        const auto& term = terms[t];
        if (term.site_a < 1 || term.site_a > sites || term.site_b < 1 || term.site_b > sites ||
            term.site_a == term.site_b)
            throw std::invalid_argument("local_energy_estimate: bond term must be two-local");
        const double mag = std::abs(term.coupling);
        if (mag == 0.0) continue;
        const double gamma = std::arg(term.coupling);

        // X-type and Y-type settings, phase absorbed on site_b.
        for (int which = 0; which < 2; ++which) {
            std::vector<Eigen::Matrix2cd> rot(sites, Eigen::Matrix2cd::Identity());
            const Eigen::Matrix2cd basis_rot =
                which == 0 ? rotation_y(-M_PI / 2) : rotation_x(M_PI / 2);
            rot[term.site_a - 1] = basis_rot;
            rot[term.site_b - 1] = basis_rot * rotation_z(gamma);
            const auto setting = MeasurementSetting::custom(sites, std::move(rot));

            double r;
            if (shots_per_setting == 0) {
                r = zz_correlator(outcome_probabilities(full, setting), sites, term.site_a,
                                  term.site_b);
            } else {
                const auto record = sample_shots(full, setting, shots_per_setting,
                                                 mix_seed(seed, 2 * t + which));
                r = zz_correlator(record, term.site_a, term.site_b);
                variance += mag * mag / 4.0 * (1.0 - r * r) / double(shots_per_setting);
            }
            value += mag * r / 2.0;
        }
    }
    return {value, std::sqrt(variance)};
}

// --- ShotRecord io ---

void ShotRecord::write(std::ostream& os) const {
    os << "setting=" << to_string(setting) << "\n";
    os << "sites=" << sites << "\n";
    os << "shots=" << shots << "\n";
    os << "seed=" << seed << "\n";
    for (const auto& [bits, count] : counts) os << bits << "," << count << "\n";
}

ShotRecord ShotRecord::read(std::istream& is) {
    ShotRecord record;
    std::string line;
    int header = 0;
    std::uint64_t total = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq != std::string::npos && header < 4) {
            const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
            if (key == "setting") record.setting = setting_from_string(value);
            else if (key == "sites") record.sites = std::stoi(value);
            else if (key == "shots") record.shots = std::stoull(value);
            else if (key == "seed") record.seed = std::stoull(value);
            else throw std::invalid_argument("shot record: unknown header key " + key);
            ++header;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("shot record: malformed count row: " + line);
        const std::string bits = line.substr(0, comma);
        if (int(bits.size()) != record.sites)
            throw std::invalid_argument("shot record: bitstring length mismatch: " + bits);
        parse_bitstring(bits);  // validates characters
        const std::uint64_t count = std::stoull(line.substr(comma + 1));
        record.counts[bits] += count;
        total += count;
    }
    if (header != 4) throw std::invalid_argument("shot record: incomplete header");
    if (total != record.shots)
        throw std::invalid_argument("shot record: counts do not sum to the declared shots");
    return record;
}

void ShotRecord::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write(os);
}

ShotRecord ShotRecord::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return read(is);
}

}  // namespace trsb
