#include "rpqst/tomography.hpp"

#include <cmath>

namespace rpqst {

std::string QualityFlags::to_string() const {
    std::string out;
    auto add = [&out](bool set, const char* name) {
        if (!set) return;
        if (!out.empty()) out += ';';
        out += name;
    };
    add(x_degenerate, "x_degenerate");
    add(y_degenerate, "y_degenerate");
    add(inconsistent_costheta, "inconsistent_costheta");
    add(near_pole, "near_pole");
    add(fit_unconverged, "fit_unconverged");
    return out;
}

namespace {

struct Quadratures {
    double qx, px, qy, py, ax, ay;
};

PureStated state_from_quadratures(const Quadratures& q, QualityFlags* flags,
                                  PhasePaird* used) {
    const double r = std::hypot(q.qx, q.qy);
    const double weight = q.ax + q.ay;
    if (!(weight > 0)) {
        throw NumericError("reconstruct: both Rabi amplitudes vanish, reconstruction impossible");
    }
    const double pbar = (q.ax * q.px + q.ay * q.py) / weight;
    const double scale = std::hypot(r, pbar);
    if (!(scale > 0)) {
        throw NumericError("reconstruct: zero signal scale, reconstruction impossible");
    }

    if (flags) {
        // the two cos(theta) estimates, compared on the common scale
        if (q.ax / scale >= kDegenerateAmplitude && q.ay / scale >= kDegenerateAmplitude &&
            std::abs(q.px - q.py) / scale > 0.05) {
            flags->inconsistent_costheta = true;
        }
        if (r / scale < 0.02) flags->near_pole = true;
    }
    if (used) {
        used->alpha = q.ax > 0 ? std::atan2(q.qx, q.px) : 0.0;
        used->beta = q.ay > 0 ? std::atan2(q.qy, q.py) : 0.0;
        used->amp_x = std::min(q.ax / scale, 1.0);
        used->amp_y = std::min(q.ay / scale, 1.0);
    }

    const double theta = std::atan2(r, pbar);
    const double phi = r > 0 ? std::atan2(q.qx, q.qy) : 0.0;
    return PureStated(theta, phi);
}

}  // namespace

PureStated reconstruct_from_phases(const PhasePaird& p) {
    Quadratures q{};
    q.ax = p.amp_x;
    q.ay = p.amp_y;
    q.qx = p.amp_x * std::sin(p.alpha);
    q.px = p.amp_x * std::cos(p.alpha);
    q.qy = p.amp_y * std::sin(p.beta);
    q.py = p.amp_y * std::cos(p.beta);
    return state_from_quadratures(q, nullptr, nullptr);
}

PhaseReconstruction reconstruct_state(const SinusoidFit& fit_x, const SinusoidFit& fit_y) {
    PhaseReconstruction out;
    out.flags.x_degenerate = fit_x.phase_unreliable;
    out.flags.y_degenerate = fit_y.phase_unreliable;
    out.flags.fit_unconverged = !fit_x.converged || !fit_y.converged;
    if (out.flags.x_degenerate && out.flags.y_degenerate) {
        throw NumericError("reconstruct_state: both Rabi fits degenerate, "
                           "reconstruction impossible");
    }

    // Pinned sign convention: the x-trace is A cos(w tau - alpha), the
    // y-trace A cos(w tau + beta).
    const double alpha = -fit_x.phase;
    const double beta = fit_y.phase;
    Quadratures q{};
    q.ax = fit_x.amplitude;
    q.ay = fit_y.amplitude;
    q.qx = q.ax * std::sin(alpha);
    q.px = q.ax * std::cos(alpha);
    q.qy = q.ay * std::sin(beta);
    q.py = q.ay * std::cos(beta);

    out.state = state_from_quadratures(q, &out.flags, &out.phases);
    return out;
}

Reconstruction evaluate(const PureStated& recon, const PureStated& prepared, Channel channel) {
    Reconstruction r;
    r.channel = channel;
    r.prepared = prepared;
    r.state_exp = recon;
    r.rho_exp = pure_to_density(recon);
    r.fidelity = fidelity(prepared, recon);
    r.delta_theta = recon.theta - prepared.theta;
    r.delta_phi = wrap_pm_pi(recon.phi - prepared.phi);
    return r;
}

void SimConfig::validate() const {
    model.validate();
    sequence.validate();
    noise_pl.validate();
    noise_pc.validate();
    if (noise_pl.channel != Channel::PL || noise_pc.channel != Channel::PC) {
        throw ValidationError("SimConfig: noise configs bound to the wrong channels");
    }
    if (tau_count < 8) throw ValidationError("SimConfig: tau_count must be >= 8");
    if (!(tau_periods > 0)) throw ValidationError("SimConfig: tau_periods must be > 0");
    if (sweep_repeats < 1) throw ValidationError("SimConfig: sweep_repeats must be >= 1");
    if (!(envelope_duration > 0)) {
        throw ValidationError("SimConfig: envelope_duration must be > 0");
    }
}

EnvelopePlan SimConfig::make_plan(const PureStated& prepared, RotationAxis axis) const {
    PulseSequence seq = sequence;
    seq.prep_duration = prepared.theta / model.rabi_frequency;
    seq.probe_phase = axis == RotationAxis::X ? 0.0 : detail::pi_v<double> / 2;
    return plan_envelopes(seq, envelope_duration, default_tau_grid(model, tau_count, tau_periods),
                          sweep_repeats);
}

namespace {

// A failed (flat/degenerate) fit enters the reconstruction as zero amplitude:
// it carries no quadrature information but keeps the other axis usable.
SinusoidFit degenerate_placeholder() {
    SinusoidFit f;
    f.amplitude = 0.0;
    f.phase = 0.0;
    f.converged = true;
    f.phase_unreliable = true;
    return f;
}

SinusoidFit fit_or_flag(const RabiTrace& trace) {
    try {
        return fit_trace(trace);
    } catch (const NumericError&) {
        return degenerate_placeholder();
    }
}

}  // namespace

TomographyResult tomograph(const SimConfig& config, const PureStated& prepared,
                           std::uint64_t seed) {
    config.validate();
    const PureStated actual = config.prep_error.apply(prepared);
    const EnvelopePlan plan_x = config.make_plan(prepared, RotationAxis::X);
    const EnvelopePlan plan_y = config.make_plan(prepared, RotationAxis::Y);

    ChannelNoise noise_pl = config.noise_pl;
    ChannelNoise noise_pc = config.noise_pc;
    noise_pl.rng_seed = seed;
    noise_pc.rng_seed = seed;

    TomographyResult result;
    result.traces = rpqst_trace_pair(config.model, actual, plan_x, plan_y, noise_pl, noise_pc);

    result.fit_pl_x = fit_or_flag(result.traces.pl_x);
    result.fit_pl_y = fit_or_flag(result.traces.pl_y);
    result.fit_pc_x = fit_or_flag(result.traces.pc_x);
    result.fit_pc_y = fit_or_flag(result.traces.pc_y);

    auto channel_recon = [&](const SinusoidFit& fx, const SinusoidFit& fy, Channel ch,
                             Reconstruction& out, bool& ok, std::string& error) {
        try {
            const PhaseReconstruction pr = reconstruct_state(fx, fy);
            out = evaluate(pr.state, prepared, ch);
            out.phase_inputs = pr.phases;
            out.flags = pr.flags;
            out.seed = seed;
        } catch (const NumericError& e) {
            ok = false;
            error = std::string("tomograph[") + to_string(ch) + "]: " + e.what();
        }
    };

    channel_recon(result.fit_pl_x, result.fit_pl_y, Channel::PL, result.pl, result.pl_ok,
                  result.pl_error);
    channel_recon(result.fit_pc_x, result.fit_pc_y, Channel::PC, result.pc, result.pc_ok,
                  result.pc_error);
    if (!result.pl_ok && !result.pc_ok) {
        throw NumericError(result.pl_error + "; " + result.pc_error);
    }
    return result;
}

}  // namespace rpqst
