#include "trsb/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "trsb/certification.hpp"
#include "trsb/evolution.hpp"
#include "trsb/hopping.hpp"
#include "trsb/inference.hpp"
#include "trsb/measurement.hpp"
#include "trsb/stats.hpp"
#include "trsb/subspace.hpp"

namespace trsb {

namespace fs = std::filesystem;

std::string format_sig(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

// ---------------------------------------------------------------------------
// ConfigFile
// ---------------------------------------------------------------------------

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& name) {
    ConfigFile cfg;
    cfg.name_ = name;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(name + ":" + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError(name + ":" + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(name + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(name + ":" + std::to_string(lineno) + ": empty key");
        const std::string full_key = section.empty() ? key : section + "." + key;
        if (cfg.entries_.count(full_key))
            throw ConfigError(name + ":" + std::to_string(lineno) + ": duplicate key " + full_key);
        cfg.entries_[full_key] = {value, lineno};
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << is.rdbuf();
    return parse_text(buffer.str(), path);
}

void ConfigFile::apply_override(const std::string& key_equals_value) {
    const auto eq = key_equals_value.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must be key=value, got: " + key_equals_value);
    entries_[key_equals_value.substr(0, eq)] = {key_equals_value.substr(eq + 1), 0};
}

bool ConfigFile::has(const std::string& key) const { return entries_.count(key) != 0; }

std::string ConfigFile::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(name_ + ": missing required key " + key);
    mark_consumed(key);
    resolved_[key] = it->second.value;
    return it->second.value;
}

std::string ConfigFile::get_or(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        resolved_[key] = fallback;
        return fallback;
    }
    mark_consumed(key);
    resolved_[key] = it->second.value;
    return it->second.value;
}

double ConfigFile::get_double(const std::string& key) const {
    const std::string v = get(key);
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        fail(key, "expected a number, got '" + v + "'");
    }
}

double ConfigFile::get_double_or(const std::string& key, double fallback) const {
    if (!has(key)) {
        resolved_[key] = format_sig(fallback);
        return fallback;
    }
    return get_double(key);
}

long ConfigFile::get_int(const std::string& key) const {
    const std::string v = get(key);
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        fail(key, "expected an integer, got '" + v + "'");
    }
}

long ConfigFile::get_int_or(const std::string& key, long fallback) const {
    if (!has(key)) {
        resolved_[key] = std::to_string(fallback);
        return fallback;
    }
    return get_int(key);
}

std::vector<std::pair<std::string, std::string>> ConfigFile::items() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, entry] : entries_) out.emplace_back(key, entry.value);
    return out;
}

std::vector<std::pair<std::string, std::string>> ConfigFile::resolved_items() const {
    return {resolved_.begin(), resolved_.end()};
}

void ConfigFile::fail(const std::string& key, const std::string& message) const {
    auto it = entries_.find(key);
    const std::string where =
        it == entries_.end()
            ? name_
            : name_ + ":" + (it->second.line ? std::to_string(it->second.line) : "<override>");
    throw ConfigError(where + ": key '" + key + "': " + message);
}

void ConfigFile::mark_consumed(const std::string& key) const { consumed_[key] = true; }

void ConfigFile::check_all_consumed() const {
    for (const auto& [key, entry] : entries_) {
        if (!consumed_.count(key)) {
            const std::string where =
                name_ + ":" + (entry.line ? std::to_string(entry.line) : "<override>");
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

// ---------------------------------------------------------------------------
// Shared experiment plumbing
// ---------------------------------------------------------------------------

namespace {

struct Context {
    const ConfigFile& cfg;
    std::string out_dir;
    std::uint64_t seed = 0;
    double units_factor = 1.0;  // couplings are multiplied by this on input
    std::vector<std::string> files_written;

    double coupling(const std::string& key) const { return cfg.get_double(key) * units_factor; }

    std::ofstream open(const std::string& filename, std::vector<std::string>* names) {
        const fs::path path = fs::path(out_dir) / filename;
        fs::create_directories(path.parent_path());
        std::ofstream os(path);
        if (!os) throw InvariantError("cannot open output file: " + path.string());
        names->push_back(path.string());
        return os;
    }
};

std::vector<double> parse_times(const ConfigFile& cfg, const std::string& section) {
    std::vector<double> times;
    if (cfg.has(section + ".list")) {
        const std::string list = cfg.get(section + ".list");
        std::istringstream is(list);
        std::string item;
        while (std::getline(is, item, ',')) {
            if (item.find_first_not_of(" \t") == std::string::npos) continue;
            times.push_back(std::stod(item));
        }
    } else if (cfg.has(section + ".start") || cfg.has(section + ".stop") ||
               cfg.has(section + ".count")) {
        const double start = cfg.get_double(section + ".start");
        const double stop = cfg.get_double(section + ".stop");
        const long count = cfg.get_int(section + ".count");
        if (count < 1) cfg.fail(section + ".count", "needs at least one point");
        if (count == 1) {
            times.push_back(start);
        } else {
            for (long i = 0; i < count; ++i)
                times.push_back(start + (stop - start) * double(i) / double(count - 1));
        }
    }
    if (times.empty())
        throw ConfigError("[" + section + "]: empty grid — provide list or start/stop/count");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1])
            throw ConfigError("[" + section + "]: grid must be strictly increasing");
    return times;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

StateVector full_state_from_bits(const std::string& bits, int sites) {
    if (int(bits.size()) != sites)
        throw ConfigError("initial state '" + bits + "' does not match sites=" +
                          std::to_string(sites));
    Vector amp = Vector::Zero(1 << sites);
    amp(int(parse_bitstring(bits))) = 1.0;
    return StateVector{BasisId::full(sites), std::move(amp)};
}

void write_resolved_config(Context& ctx) {
    auto os = ctx.open("resolved_config.txt", &ctx.files_written);
    os << "# resolved configuration (defaults included)\n";
    for (const auto& [key, value] : ctx.cfg.resolved_items()) os << key << " = " << value << "\n";
}

// ---------------------------------------------------------------------------
// Trajectory experiments: AB_DYNAMICS, LADDER_1ES, LADDER_2ES
// ---------------------------------------------------------------------------

void run_trajectory(Context& ctx, const std::string& experiment) {
    const auto& cfg = ctx.cfg;
    const int sites = int(cfg.get_int("model.sites"));
    Operator h{BasisId::full(0), {}, false};
    if (experiment == "AB_DYNAMICS") {
        AbRingSpec spec{sites, ctx.coupling("model.omega"), cfg.get_double("model.phi_ab"),
                        cfg.get_double_or("model.epsilon", 0.0)};
        h = build_ab(spec);
    } else {
        const std::string gauge_name = cfg.get_or("model.gauge", "staggered");
        if (gauge_name != "staggered" && gauge_name != "uniform")
            cfg.fail("model.gauge", "expected staggered or uniform");
        LadderSpec spec{sites, ctx.coupling("model.omega"), cfg.get_double("model.phi_s"),
                        gauge_name == "uniform" ? LadderGauge::Uniform : LadderGauge::Staggered};
        h = build_ladder(spec);
    }

    const std::string default_initial =
        experiment == "LADDER_2ES" ? "1100" : std::string("1") + std::string(sites - 1, '0');
    const StateVector psi0 = full_state_from_bits(cfg.get_or("initial.state", default_initial), sites);
    const std::vector<double> times = parse_times(cfg, "times");
    const std::uint64_t shots = std::uint64_t(cfg.get_int_or("measure.shots", 0));

    Eigen::MatrixXd occupations(times.size(), sites);
    Eigen::MatrixXd weights(times.size(), sites + 1);
    if (shots == 0) {
        const Trajectory traj = quench_trajectory(h, psi0, times);
        occupations = traj.site_occupations;
        weights = traj.subspace_weights;
    } else {
        const Propagator prop(h);
        const auto setting = MeasurementSetting::occupancy(sites);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const StateVector psi = prop.apply(psi0, times[i]);
            const ShotRecord record = sample_shots(psi, setting, shots, mix_seed(ctx.seed, i));
            Eigen::VectorXd occ = Eigen::VectorXd::Zero(sites);
            Eigen::VectorXd w = Eigen::VectorXd::Zero(sites + 1);
            for (const auto& [bits, count] : record.counts) {
                const std::uint32_t s = parse_bitstring(bits);
                const double f = double(count) / double(shots);
                w(excitation_count(s)) += f;
                for (int k = 1; k <= sites; ++k)
                    if (site_occupied(s, sites, k)) occ(k - 1) += f;
            }
            occupations.row(Eigen::Index(i)) = occ.transpose();
            weights.row(Eigen::Index(i)) = w.transpose();
        }
    }

    // invariant self-checks
    for (Eigen::Index i = 0; i < weights.rows(); ++i) {
        if (std::abs(weights.row(i).sum() - 1.0) > 1e-9)
            throw InvariantError("trajectory: subspace weights do not sum to 1");
        if (occupations.row(i).minCoeff() < -1e-12 || occupations.row(i).maxCoeff() > 1 + 1e-12)
            throw InvariantError("trajectory: occupation outside [0, 1]");
    }

    auto os = ctx.open("trajectory.csv", &ctx.files_written);
    os << "time";
    for (int k = 1; k <= sites; ++k) os << ",occ_site" << k;
    for (int m = 0; m <= sites; ++m) os << ",weight_m" << m;
    os << "\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        os << format_sig(times[i]);
        for (int k = 0; k < sites; ++k) os << "," << format_sig(occupations(Eigen::Index(i), k));
        for (int m = 0; m <= sites; ++m) os << "," << format_sig(weights(Eigen::Index(i), m));
        os << "\n";
    }
}

// ---------------------------------------------------------------------------
// AB_GROUND_STATE_SWEEP and CERTIFY_SWEEP
// ---------------------------------------------------------------------------

struct SweepPoint {
    double phi = 0.0;
    double energy = 0.0, energy_err = 0.0;
    double overlap_gs = 0.0;
    double current = 0.0, current_err = 0.0;
    Decision decision = Decision::Reject;
    double alpha = 0.0, delta = 0.0;
    double e0 = 0.0, gap = 0.0;
    double accept_rate = 0.0, mean_delta = 0.0;  // CERTIFY_SWEEP
    std::string certify_json;
};

struct SweepSettings {
    int sites = 3;
    double omega = 0.0;
    double epsilon = 0.0;
    double ramp_time = 10.0;
    double delta_factor = 4.0;
    int ramp_site = 1;
    int ramp_steps = 64;
    double ramp_tolerance = 1e-8;
    std::uint64_t shots = 0;
    double f_threshold = 0.7;
    double alpha = 0.05;
    std::uint64_t budget = 0;
    long trials = 1;
};

SweepSettings read_sweep_settings(Context& ctx) {
    const auto& cfg = ctx.cfg;
    SweepSettings s;
    s.sites = int(cfg.get_int("model.sites"));
    s.omega = ctx.coupling("model.omega");
    s.epsilon = cfg.get_double_or("model.epsilon", 0.0);
    s.ramp_time = cfg.get_double_or("ramp.total_time", 10.0);
    s.delta_factor = cfg.get_double_or("ramp.delta_factor", 4.0);
    s.ramp_site = int(cfg.get_int_or("ramp.site", 1));
    s.ramp_steps = int(cfg.get_int_or("ramp.steps", 64));
    s.ramp_tolerance = cfg.get_double_or("ramp.tolerance", 1e-8);
    s.shots = std::uint64_t(cfg.get_int_or("measure.shots", 0));
    s.f_threshold = cfg.get_double_or("certify.f_threshold", 0.7);
    s.alpha = cfg.get_double_or("certify.alpha", 0.05);
    s.budget = std::uint64_t(cfg.get_int_or("certify.budget", 0));
    s.trials = cfg.get_int_or("certify.trials", 50);
    return s;
}

// Ramp the single-excitation block to the ground state of H_eff at this flux.
struct RampOutput {
    StateVector state;
    Operator h_block;
    double e0 = 0.0, gap = 0.0, overlap_gs = 0.0, energy = 0.0;
};

RampOutput run_point_ramp(const SweepSettings& s, double phi) {
    const AbRingSpec spec{s.sites, s.omega, phi, s.epsilon};
    const auto sub = basis(s.sites, 1);
    const Operator h_block = project(build_ab(spec), sub);
    const Operator h0_block =
        project(build_h0(s.sites, s.ramp_site, s.delta_factor * std::abs(s.omega)), sub);

    Vector amp = Vector::Zero(sub.dimension());
    const int idx = sub.index_of(site_mask(s.sites, s.ramp_site));
    amp(idx) = 1.0;
    const StateVector psi0{sub.id(), std::move(amp)};

    RampSchedule schedule{s.ramp_time, h0_block, h_block, s.ramp_steps, s.ramp_tolerance};
    RampOutput out{evolve_ramp(schedule, psi0), h_block};

    Eigen::SelfAdjointEigenSolver<Matrix> es(h_block.matrix);
    out.e0 = es.eigenvalues()(0);
    out.gap = es.eigenvalues()(1) - es.eigenvalues()(0);
    out.energy =
        out.state.amplitudes.dot(h_block.matrix * out.state.amplitudes).real();
    const auto overlaps = eigenstate_overlaps(h_block, out.state);
    out.overlap_gs = overlaps.front().second;
    return out;
}

void run_ground_state_sweep(Context& ctx) {
    const SweepSettings s = read_sweep_settings(ctx);
    const std::vector<double> grid = parse_times(ctx.cfg, "sweep");

    std::vector<SweepPoint> points(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const double phi = grid[i];
        const RampOutput ramp = run_point_ramp(s, phi);
        SweepPoint& pt = points[i];
        pt.phi = phi;
        pt.overlap_gs = ramp.overlap_gs;
        pt.e0 = ramp.e0;
        pt.gap = ramp.gap;

        const AbRingSpec spec{s.sites, s.omega, phi, s.epsilon};
        const auto h_terms = ring_bond_terms(spec);
        const auto c_terms = current_bond_terms(spec);
        if (s.shots == 0) {
            pt.energy = ramp.energy;
            pt.current = current_expectation(ramp.state, spec);
        } else {
            const auto e = local_energy_estimate(ramp.state, h_terms, s.shots,
                                                 mix_seed(ctx.seed, 2 * i));
            const auto c = local_energy_estimate(ramp.state, c_terms, s.shots,
                                                 mix_seed(ctx.seed, 2 * i + 1));
            pt.energy = e.value;
            pt.energy_err = e.std_error;
            pt.current = c.value;
            pt.current_err = c.std_error;
        }

        CertificationConfig cert{s.f_threshold, s.alpha, ramp.e0, ramp.gap, s.budget};
        const auto outcome = certify(ramp.state, h_terms, cert, mix_seed(ctx.seed, 1000003 + i));
        pt.decision = outcome.decision;
        pt.alpha = s.alpha;
        pt.delta = outcome.delta_gap;
        pt.certify_json = outcome.to_json();
    });

    auto os = ctx.open("sweep.csv", &ctx.files_written);
    os << "phi,energy,energy_err,overlap_gs,current,current_err,certify_decision,alpha,delta\n";
    for (const auto& pt : points) {
        os << format_sig(pt.phi) << "," << format_sig(pt.energy) << "," << format_sig(pt.energy_err)
           << "," << format_sig(pt.overlap_gs) << "," << format_sig(pt.current) << ","
           << format_sig(pt.current_err) << ","
           << (pt.decision == Decision::Accept ? "ACCEPT" : "REJECT") << ","
           << format_sig(pt.alpha) << "," << format_sig(pt.delta) << "\n";
    }

    // one certification record per sweep point, in grid order
    auto js = ctx.open("certifications.jsonl", &ctx.files_written);
    for (const auto& pt : points) js << pt.certify_json << "\n";
}

void run_certify_sweep(Context& ctx) {
    const SweepSettings s = read_sweep_settings(ctx);
    if (s.budget == 0) throw ConfigError("CERTIFY_SWEEP needs certify.budget > 0");
    if (s.trials < 1) ctx.cfg.fail("certify.trials", "needs at least one trial");
    const std::vector<double> grid = parse_times(ctx.cfg, "sweep");

    std::vector<SweepPoint> points(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const double phi = grid[i];
        const RampOutput ramp = run_point_ramp(s, phi);
        SweepPoint& pt = points[i];
        pt.phi = phi;
        pt.e0 = ramp.e0;
        pt.gap = ramp.gap;
        pt.alpha = s.alpha;

        const auto h_terms = ring_bond_terms(AbRingSpec{s.sites, s.omega, phi, s.epsilon});
        const CertificationConfig cert{s.f_threshold, s.alpha, ramp.e0, ramp.gap, s.budget};
        long accepted = 0;
        double delta_sum = 0.0;
        for (long k = 0; k < s.trials; ++k) {
            const auto outcome =
                certify(ramp.state, h_terms, cert, mix_seed(ctx.seed, i * 100003 + k));
            if (outcome.decision == Decision::Accept) ++accepted;
            delta_sum += outcome.delta_gap;
        }
        pt.accept_rate = double(accepted) / double(s.trials);
        pt.mean_delta = delta_sum / double(s.trials);
    });

    auto os = ctx.open("certify_sweep.csv", &ctx.files_written);
    os << "phi,trials,accept_rate,mean_delta,alpha,e0,gap\n";
    for (const auto& pt : points) {
        os << format_sig(pt.phi) << "," << s.trials << "," << format_sig(pt.accept_rate) << ","
           << format_sig(pt.mean_delta) << "," << format_sig(pt.alpha) << "," << format_sig(pt.e0)
           << "," << format_sig(pt.gap) << "\n";
    }
}

// ---------------------------------------------------------------------------
// FIT
// ---------------------------------------------------------------------------

void run_fit(Context& ctx) {
    const auto& cfg = ctx.cfg;
    FitProblem problem;

    const std::string model = cfg.get("fit.model");
    if (model == "AB_RING") problem.model = FitModel::AbRing;
    else if (model == "LADDER") problem.model = FitModel::Ladder;
    else cfg.fail("fit.model", "expected AB_RING or LADDER");

    const std::string forward = cfg.get_or("fit.forward", "QUENCH");
    if (forward == "QUENCH") problem.forward = ForwardKind::Quench;
    else if (forward == "RAMP_1ES") problem.forward = ForwardKind::Ramp1es;
    else cfg.fail("fit.forward", "expected QUENCH or RAMP_1ES");

    problem.sites = int(cfg.get_int("model.sites"));
    problem.flux = cfg.get_double(problem.model == FitModel::AbRing ? "model.phi_ab" : "model.phi_s");
    problem.coupling_sign = cfg.get_double_or("fit.sign", 1.0);
    problem.fit_epsilon = cfg.get_int_or("fit.fit_epsilon", problem.model == FitModel::AbRing) != 0;
    problem.fixed_epsilon = cfg.get_double_or("model.epsilon", 0.0);
    problem.post_select_m = int(cfg.get_int_or("fit.post_select_m", 1));

    const auto sub = basis(problem.sites, problem.post_select_m);
    const std::string default_initial =
        std::string(problem.post_select_m, '1') +
        std::string(problem.sites - problem.post_select_m, '0');
    const std::string bits = cfg.get_or("initial.state", default_initial);
    if (int(bits.size()) != problem.sites) cfg.fail("initial.state", "length mismatch");
    const int idx = sub.index_of(parse_bitstring(bits));
    if (idx < 0) cfg.fail("initial.state", "state is not in the post-selected block");
    Vector amp = Vector::Zero(sub.dimension());
    amp(idx) = 1.0;
    problem.initial_state = {sub.id(), std::move(amp)};

    if (problem.forward == ForwardKind::Ramp1es) {
        problem.ramp_time = cfg.get_double("ramp.total_time");
        problem.ramp_delta_factor = cfg.get_double_or("ramp.delta_factor", 4.0);
        problem.ramp_site = int(cfg.get_int_or("ramp.site", 1));
        problem.ramp_steps = int(cfg.get_int_or("ramp.steps", 256));
    }

    problem.omega_box = {ctx.coupling("fit.omega_box_lo"), ctx.coupling("fit.omega_box_hi")};
    if (problem.fit_epsilon)
        problem.epsilon_box = {cfg.get_double_or("fit.epsilon_box_lo", 0.0),
                               cfg.get_double_or("fit.epsilon_box_hi", 1.0)};
    problem.grid_points = int(cfg.get_int_or("fit.grid", 21));

    const std::string mode = cfg.get_or("fit.mode", "synthetic");
    if (mode == "synthetic") {
        const std::vector<double> times = parse_times(cfg, "times");
        const double omega_true = ctx.coupling("fit.omega_true");
        const double epsilon_true = cfg.get_double_or("fit.epsilon_true", problem.fixed_epsilon);
        const std::uint64_t shots = std::uint64_t(cfg.get_int_or("fit.shots", 500));
        problem.data =
            synthesize_records(problem, omega_true, epsilon_true, times, shots, ctx.seed);

        auto manifest = ctx.open("records/manifest.csv", &ctx.files_written);
        manifest << "time,file\n";
        for (std::size_t i = 0; i < problem.data.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "record_%03zu.txt", i);
            auto rs = ctx.open(std::string("records/") + name, &ctx.files_written);
            problem.data[i].second.write(rs);
            manifest << format_sig(problem.data[i].first) << "," << name << "\n";
        }
    } else if (mode == "files") {
        const fs::path manifest_path = cfg.get("fit.manifest");
        std::ifstream is(manifest_path);
        if (!is) throw ConfigError("cannot open fit manifest: " + manifest_path.string());
        std::string line;
        std::getline(is, line);  // header
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos)
                throw ConfigError("fit manifest: malformed row: " + line);
            const double t = std::stod(line.substr(0, comma));
            const fs::path file = manifest_path.parent_path() / line.substr(comma + 1);
            problem.data.emplace_back(t, ShotRecord::load(file.string()));
        }
    } else {
        cfg.fail("fit.mode", "expected synthetic or files");
    }

    FitResult result = fit(problem);

    // Report estimates in the input units.
    if (ctx.units_factor != 1.0) {
        const double f = ctx.units_factor;
        if (result.estimates.count("omega")) result.estimates["omega"] /= f;
        if (result.ci95.count("omega")) {
            result.ci95["omega"].lo /= f;
            result.ci95["omega"].hi /= f;
        }
        for (auto& w : result.omega_grid) w /= f;
    }
    auto os = ctx.open("fit_report.txt", &ctx.files_written);
    result.write_report(os);
}

}  // namespace

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

std::vector<std::string> run_experiment(const ConfigFile& config_in, const RunOptions& options) {
    ConfigFile config = config_in;
    for (const auto& ov : options.overrides) config.apply_override(ov);
    if (!options.out_dir.empty()) config.apply_override("out=" + options.out_dir);
    if (!options.units.empty()) config.apply_override("units=" + options.units);
    if (options.has_seed) config.apply_override("seed=" + std::to_string(options.seed));

    Context ctx{config};
    const std::string units = config.get_or("units", "rad");
    if (units == "hz") ctx.units_factor = 2.0 * M_PI;
    else if (units != "rad") config.fail("units", "expected hz or rad");
    ctx.seed = std::uint64_t(config.get_int_or("seed", 0));
    ctx.out_dir = config.get_or("out", "out");

    const std::string experiment = config.get("experiment");
    try {
        if (experiment == "AB_DYNAMICS" || experiment == "LADDER_1ES" ||
            experiment == "LADDER_2ES") {
            run_trajectory(ctx, experiment);
        } else if (experiment == "AB_GROUND_STATE_SWEEP") {
            run_ground_state_sweep(ctx);
        } else if (experiment == "CERTIFY_SWEEP") {
            run_certify_sweep(ctx);
        } else if (experiment == "FIT") {
            run_fit(ctx);
        } else {
            config.fail("experiment", "unknown experiment " + experiment);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    config.check_all_consumed();
    write_resolved_config(ctx);
    return ctx.files_written;
}

}  // namespace trsb
