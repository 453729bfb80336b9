#include "rpqst/study.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <sstream>
#include <thread>

namespace rpqst {

namespace {

double vec_mean(const std::vector<double>& v) {
    if (v.empty()) return 0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double vec_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0;
    const double m = vec_mean(v);
    double acc = 0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// Deterministic parallel map: fn(i) writes into its own slot, chunks joined
// in index order, so scheduling cannot change any result.
template <typename Fn>
void parallel_for_index(std::size_t n, Fn&& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t chunk = std::max<std::size_t>(1, n / (hw * 4) + 1);
    std::vector<std::future<void>> futures;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        const std::size_t end = std::min(begin + chunk, n);
        futures.push_back(std::async(std::launch::async, [begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        }));
    }
    for (auto& f : futures) f.get();
}

}  // namespace

std::size_t StateSuite::total_measurements() const {
    std::size_t total = 0;
    for (int r : repetitions) total += static_cast<std::size_t>(r);
    return total;
}

void StateSuite::validate() const {
    if (states.empty() || states.size() != repetitions.size()) {
        throw ValidationError("StateSuite: states and repetitions must be non-empty and match");
    }
    for (int r : repetitions) {
        if (r < 2) throw ValidationError("StateSuite: every state must be tomographed >= 2 times");
    }
}

StateSuite default_state_suite() {
    StateSuite suite;
    const double thetas[4] = {15, 35, 55, 75};
    const std::vector<std::vector<double>> phis = {
        {55, 235}, {25, 145, 265}, {85, 205, 325}, {115, 295}};
    for (int t = 0; t < 4; ++t) {
        for (double phi : phis[static_cast<std::size_t>(t)]) {
            suite.states.push_back(state_from_degrees(thetas[t], phi));
            // the single-measurement example state gets the odd 21st run
            suite.repetitions.push_back(t == 0 && phi == 235.0 ? 3 : 2);
        }
    }
    suite.validate();
    return suite;
}

namespace {

ChannelBatchStats channel_stats(const std::vector<Reconstruction>& records, Channel channel,
                                int failures) {
    std::vector<double> f, dt, dp;
    std::vector<const Reconstruction*> mine;
    for (const Reconstruction& r : records) {
        if (r.channel != channel) continue;
        mine.push_back(&r);
        f.push_back(r.fidelity);
        dt.push_back(r.delta_theta);
        dp.push_back(r.delta_phi);
    }

    ChannelBatchStats s;
    s.measurements = static_cast<int>(mine.size());
    s.failures = failures;
    s.mean_fidelity = vec_mean(f);
    s.std_fidelity = vec_std(f);
    s.mean_delta_theta = vec_mean(dt);
    s.std_delta_theta = vec_std(dt);
    s.mean_delta_phi = vec_mean(dp);
    s.std_delta_phi = vec_std(dp);

    // optimized fidelity: remove the systematic offsets and re-evaluate
    std::vector<double> fopt;
    const double pi = detail::pi_v<double>;
    for (const Reconstruction* r : mine) {
        const double theta =
            std::min(std::max(r->state_exp.theta - s.mean_delta_theta, 0.0), pi);
        const PureStated corrected(theta, r->state_exp.phi - s.mean_delta_phi);
        fopt.push_back(fidelity(r->prepared, corrected));
    }
    s.optimized_mean_fidelity = vec_mean(fopt);
    s.optimized_std_fidelity = vec_std(fopt);
    return s;
}

}  // namespace

BatchResult batch_tomography(const StateSuite& suite, const SimConfig& config,
                             std::uint64_t master_seed) {
    suite.validate();
    config.validate();

    struct Slot {
        std::vector<Reconstruction> recs;
        int pl_failures{0};
        int pc_failures{0};
    };
    std::vector<std::pair<std::size_t, int>> jobs;  // (state index, repetition)
    for (std::size_t si = 0; si < suite.states.size(); ++si) {
        for (int rep = 0; rep < suite.repetitions[si]; ++rep) jobs.emplace_back(si, rep);
    }

    std::vector<Slot> slots(jobs.size());
    parallel_for_index(jobs.size(), [&](std::size_t i) {
        const auto [si, rep] = jobs[i];
        const std::uint64_t seed =
            derive_seed(master_seed, si, static_cast<std::uint64_t>(rep));
        try {
            TomographyResult t = tomograph(config, suite.states[si], seed);
            if (t.pl_ok) slots[i].recs.push_back(t.pl); else slots[i].pl_failures = 1;
            if (t.pc_ok) slots[i].recs.push_back(t.pc); else slots[i].pc_failures = 1;
        } catch (const NumericError&) {
            slots[i].pl_failures = 1;  // recorded, not fatal
            slots[i].pc_failures = 1;
        }
    });

    BatchResult out;
    out.master_seed = master_seed;
    int pl_failures = 0, pc_failures = 0;
    for (const Slot& s : slots) {
        pl_failures += s.pl_failures;
        pc_failures += s.pc_failures;
        out.records.insert(out.records.end(), s.recs.begin(), s.recs.end());
    }
    out.pl = channel_stats(out.records, Channel::PL, pl_failures);
    out.pc = channel_stats(out.records, Channel::PC, pc_failures);
    return out;
}

StudyResult alpha_perturbation_study(const Fig5Options& opts, std::uint64_t master_seed) {
    if (opts.trials < 100) throw ValidationError("alpha_perturbation_study: trials must be >= 100");
    for (double t : opts.theta_grid_deg) {
        if (!(t > 0 && t <= 90)) {
            throw ValidationError("alpha_perturbation_study: theta grid must lie in (0, 90] deg");
        }
    }

    std::vector<double> phi_sweep;
    if (opts.fixed_phi_deg) {
        phi_sweep = {*opts.fixed_phi_deg};
    } else {
        for (double p = 15; p < 360; p += 30) phi_sweep.push_back(p);
    }

    StudyResult result;
    result.master_seed = master_seed;
    result.trials_per_point = opts.trials;
    {
        std::ostringstream os;
        os << "alpha *= 1 + Normal(0, " << opts.error_fraction << "); beta "
           << (opts.perturb_beta ? "perturbed identically" : "exact") << "; amplitudes exact";
        result.error_model = os.str();
    }
    {
        std::ostringstream os;
        if (opts.fixed_phi_deg) {
            os << "fixed phi = " << *opts.fixed_phi_deg << " deg";
        } else {
            os << "sweep phi in {15, 45, ..., 345} deg";
        }
        result.phi_policy = os.str();
    }

    result.rows.resize(opts.theta_grid_deg.size());
    std::vector<std::vector<TrialRecord>> raw(opts.theta_grid_deg.size());

    parallel_for_index(opts.theta_grid_deg.size(), [&](std::size_t pi_idx) {
        const double theta_deg = opts.theta_grid_deg[pi_idx];
        std::vector<double> f, adt, adp;
        f.reserve(static_cast<std::size_t>(opts.trials));
        adt.reserve(static_cast<std::size_t>(opts.trials));
        adp.reserve(static_cast<std::size_t>(opts.trials));
        std::vector<TrialRecord> local;

        for (long trial = 0; trial < opts.trials; ++trial) {
            const double phi_deg =
                phi_sweep[static_cast<std::size_t>(trial) % phi_sweep.size()];
            const PureStated target = state_from_degrees(theta_deg, phi_deg);
            PhasePaird pp = forward_phases(target);

            std::mt19937_64 eng = make_engine(
                derive_seed(master_seed, pi_idx, static_cast<std::uint64_t>(trial)));
            std::normal_distribution<double> gauss(0.0, 1.0);
            pp.alpha = pp.alpha * (1.0 + opts.error_fraction * gauss(eng));
            if (opts.perturb_beta) {
                pp.beta = pp.beta * (1.0 + opts.error_fraction * gauss(eng));
            }

            const PureStated recon = reconstruct_from_phases(pp);
            const Reconstruction r = evaluate(recon, target, Channel::PC);
            f.push_back(r.fidelity);
            adt.push_back(std::abs(r.delta_theta));
            adp.push_back(std::abs(r.delta_phi));
            if (opts.keep_raw) {
                local.push_back({theta_deg, phi_deg, r.fidelity, r.delta_theta, r.delta_phi});
            }
        }

        StudyRow row;
        row.theta_deg = theta_deg;
        row.trials = opts.trials;
        row.fidelity_mean = vec_mean(f);
        row.fidelity_std = vec_std(f);
        row.abs_delta_theta_mean = vec_mean(adt);
        row.abs_delta_theta_std = vec_std(adt);
        row.abs_delta_phi_mean = vec_mean(adp);
        row.abs_delta_phi_std = vec_std(adp);
        result.rows[pi_idx] = row;
        raw[pi_idx] = std::move(local);
    });

    for (auto& block : raw) {
        result.raw.insert(result.raw.end(), block.begin(), block.end());
    }
    return result;
}

namespace {

double eval_mean_fidelity(Channel channel, const StateSuite& suite, const SimConfig& config,
                          std::uint64_t seed, int eval_repeats) {
    double acc = 0;
    for (int rep = 0; rep < eval_repeats; ++rep) {
        const BatchResult b =
            batch_tomography(suite, config, derive_seed(seed, 0xca11b, static_cast<std::uint64_t>(rep)));
        acc += channel == Channel::PC ? b.pc.mean_fidelity : b.pl.mean_fidelity;
    }
    return acc / eval_repeats;
}

}  // namespace

ChannelNoise calibrate_noise(Channel channel, double target_mean_fidelity,
                             const StateSuite& suite, const SimConfig& base, double bound_lo,
                             double bound_hi, std::uint64_t seed,
                             const CalibrationOptions& opts) {
    if (!(target_mean_fidelity > 0.9 && target_mean_fidelity <= 1.0)) {
        throw ValidationError("calibrate_noise: target must lie in (0.9, 1.0]");
    }
    if (!(bound_hi > bound_lo) || bound_lo < 0) {
        throw ValidationError("calibrate_noise: invalid search bounds");
    }

    // PL searches the count rate in log space (fidelity increases with rate);
    // PC searches the noise rms linearly (fidelity decreases with rms).
    const bool is_pl = channel == Channel::PL;

    auto with_knob = [&](double knob) {
        SimConfig c = base;
        if (is_pl) {
            c.noise_pl.pl_count_rate = knob;
        } else {
            c.noise_pc.pc_noise_rms = knob;
        }
        return c;
    };
    auto fidelity_at = [&](double knob) {
        return eval_mean_fidelity(channel, suite, with_knob(knob), seed, opts.eval_repeats);
    };
    auto result_noise = [&](double knob) {
        const SimConfig c = with_knob(knob);
        return is_pl ? c.noise_pl : c.noise_pc;
    };

    double lo = bound_lo, hi = bound_hi;
    const double f_lo = fidelity_at(lo);
    if (std::abs(f_lo - target_mean_fidelity) <= opts.tolerance) return result_noise(lo);
    const double f_hi = fidelity_at(hi);
    if (std::abs(f_hi - target_mean_fidelity) <= opts.tolerance) return result_noise(hi);

    const double f_min = std::min(f_lo, f_hi);
    const double f_max = std::max(f_lo, f_hi);
    if (target_mean_fidelity < f_min || target_mean_fidelity > f_max) {
        std::ostringstream os;
        os << "calibrate_noise[" << to_string(channel) << "]: target " << target_mean_fidelity
           << " not bracketed: F(" << lo << ") = " << f_lo << ", F(" << hi << ") = " << f_hi;
        throw NumericError(os.str());
    }

    const bool increasing = f_hi > f_lo;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        const double mid = (is_pl && lo > 0) ? std::sqrt(lo * hi)  // log-space midpoint
                                             : 0.5 * (lo + hi);
        const double f_mid = fidelity_at(mid);
        if (std::abs(f_mid - target_mean_fidelity) <= opts.tolerance) {
            return result_noise(mid);
        }
        if ((f_mid < target_mean_fidelity) == increasing) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    std::ostringstream os;
    os << "calibrate_noise[" << to_string(channel) << "]: tolerance " << opts.tolerance
       << " not reached within " << opts.max_iterations << " bisection steps; bracket ["
       << lo << ", " << hi << "]";
    throw NumericError(os.str());
}

SimConfig calibration_scenario() {
    SimConfig config;
    // Systematic preparation miscalibration: a small pulse-length offset and a
    // phase-reference offset between the preparation and probe pulses. These
    // produce the systematic component of (dtheta, dphi) that the optimized
    // fidelity removes.
    config.prep_error.theta_offset = deg_to_rad(-0.5);
    config.prep_error.phi_offset = deg_to_rad(9.0);
    return config;
}

}  // namespace rpqst
