#include "rpqst/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace rpqst {

void ChannelNoise::validate() const {
    if (pl_count_rate < 0) throw ValidationError("ChannelNoise: pl_count_rate must be >= 0");
    if (pc_mean_current < 0) throw ValidationError("ChannelNoise: pc_mean_current must be >= 0");
    if (pc_noise_rms < 0) throw ValidationError("ChannelNoise: pc_noise_rms must be >= 0");
    if (!(pc_band_min >= 0 && pc_band_max > pc_band_min)) {
        throw ValidationError("ChannelNoise: invalid plausibility band");
    }
    if (channel == Channel::PC &&
        (pc_mean_current < pc_band_min || pc_mean_current > pc_band_max)) {
        std::ostringstream os;
        os << "ChannelNoise: pc_mean_current " << pc_mean_current
           << " A outside plausibility band [" << pc_band_min << ", " << pc_band_max << "] A";
        throw ValidationError(os.str());
    }
}

void RabiTrace::validate() const {
    if (tau_values.size() != samples.size() || samples.size() < 8) {
        throw ValidationError("RabiTrace: samples and tau_values must have equal length >= 8");
    }
    for (double v : samples) {
        if (!std::isfinite(v)) throw ValidationError("RabiTrace: non-finite sample");
    }
}

std::vector<double> RabiTrace::analysis_signal() const {
    std::vector<double> y = samples;
    if (channel == Channel::PL && repetitions.size() == samples.size()) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] /= static_cast<double>(repetitions[i]);
        }
    }
    return y;
}

double RabiTrace::channel_baseline() const {
    if (channel == Channel::PL) {
        return meta.noise.pl_count_rate * meta.plan.sequence.laser_readout_duration;
    }
    return meta.noise.pc_mean_current;
}

EnvelopePlan plan_envelopes(const PulseSequence& seq, double envelope_duration,
                            std::vector<double> tau_values, int sweep_repeats) {
    seq.validate();
    if (tau_values.empty()) throw ValidationError("plan_envelopes: tau_values is empty");
    for (std::size_t i = 0; i + 1 < tau_values.size(); ++i) {
        if (!(tau_values[i] < tau_values[i + 1])) {
            throw ValidationError("plan_envelopes: tau_values must be strictly increasing");
        }
    }
    if (tau_values.front() < 0) throw ValidationError("plan_envelopes: tau must be >= 0");
    if (sweep_repeats < 1) throw ValidationError("plan_envelopes: sweep_repeats must be >= 1");

    EnvelopePlan plan;
    plan.sequence = seq;
    plan.envelope_duration = envelope_duration;
    plan.sweep_repeats = sweep_repeats;
    plan.repetitions.reserve(tau_values.size());
    for (double tau : tau_values) {
        const auto reps = static_cast<std::int64_t>(envelope_duration / seq.duration_at(tau));
        if (reps < 1) {
            std::ostringstream os;
            os << "plan_envelopes: envelope_duration " << envelope_duration
               << " s is shorter than one sequence (" << seq.duration_at(tau) << " s at tau = "
               << tau << " s)";
            throw ValidationError(os.str());
        }
        plan.repetitions.push_back(reps);
    }
    plan.tau_values = std::move(tau_values);
    return plan;
}

std::vector<double> default_tau_grid(const RabiModel& model, int count, double periods) {
    model.validate();
    if (count < 8) throw ValidationError("default_tau_grid: need at least 8 points");
    const double span = periods * model.rabi_period();
    std::vector<double> taus(count);
    for (int i = 0; i < count; ++i) {
        taus[i] = span * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return taus;
}

double photocurrent_amplitude(double cycle_rate) {
    if (cycle_rate < 0) throw ValidationError("photocurrent_amplitude: cycle_rate must be >= 0");
    return 2.0 * kElementaryCharge * cycle_rate;
}

namespace {

// Expected per-repetition PL counts / PC current for one envelope.
double envelope_mean(const RabiModel& model, const PureStated& s, RotationAxis axis, double tau,
                     const ChannelNoise& noise, const PulseSequence& seq) {
    const double z = z_projection(s, axis, model.rabi_frequency * tau);
    const double envelope =
        std::isinf(model.decay_time) ? 1.0 : std::exp(-tau / model.decay_time);
    const double modulation = 1.0 + model.contrast * envelope * z;
    if (noise.channel == Channel::PL) {
        return noise.pl_count_rate * seq.laser_readout_duration * modulation;
    }
    return noise.pc_mean_current * modulation;
}

}  // namespace

RabiTrace synthesize_trace(const RabiModel& model, const PureStated& s, RotationAxis axis,
                           const EnvelopePlan& plan, const ChannelNoise& noise) {
    model.validate();
    noise.validate();
    if (plan.tau_values.size() != plan.repetitions.size()) {
        throw ValidationError("synthesize_trace: plan repetitions missing");
    }

    const std::size_t n = plan.tau_values.size();
    std::vector<double> acc(n, 0.0);
    std::mt19937_64 eng = make_engine(noise.rng_seed);

    // Envelope visit order matches the instrument: 1..n, then the loop starts
    // again at envelope 1, sweep_repeats times.
    for (int sweep = 0; sweep < plan.sweep_repeats; ++sweep) {
        for (std::size_t k = 0; k < n; ++k) {
            const double per_rep =
                envelope_mean(model, s, axis, plan.tau_values[k], noise, plan.sequence);
            if (noise.channel == Channel::PL) {
                const double mean_counts = per_rep * static_cast<double>(plan.repetitions[k]);
                if (noise.noise_enabled) {
                    std::poisson_distribution<std::int64_t> poisson(mean_counts);
                    acc[k] += static_cast<double>(poisson(eng));
                } else {
                    acc[k] += mean_counts;
                }
            } else {
                if (noise.noise_enabled && noise.pc_noise_rms > 0) {
                    std::normal_distribution<double> gauss(per_rep, noise.pc_noise_rms);
                    acc[k] += gauss(eng);
                } else {
                    acc[k] += per_rep;
                }
            }
        }
    }

    RabiTrace trace;
    trace.axis = axis;
    trace.channel = noise.channel;
    trace.tau_values = plan.tau_values;
    trace.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        trace.samples[k] = acc[k] / plan.sweep_repeats;
    }
    trace.repetitions = plan.repetitions;
    trace.meta = TraceMeta{s, model, plan, noise};
    trace.validate();
    return trace;
}

TracePair rpqst_trace_pair(const RabiModel& model, const PureStated& s, const EnvelopePlan& plan_x,
                           const EnvelopePlan& plan_y, const ChannelNoise& noise_pl,
                           const ChannelNoise& noise_pc) {
    if (plan_x.tau_values != plan_y.tau_values) {
        throw ValidationError("rpqst_trace_pair: x and y plans must share the tau grid");
    }
    if (noise_pl.channel != Channel::PL || noise_pc.channel != Channel::PC) {
        throw ValidationError("rpqst_trace_pair: noise configs bound to the wrong channels");
    }

    auto with_stream = [](ChannelNoise noise, std::uint64_t channel_tag, std::uint64_t axis_tag) {
        noise.rng_seed = derive_seed(noise.rng_seed, channel_tag, axis_tag);
        return noise;
    };

    TracePair out;
    out.pl_x = synthesize_trace(model, s, RotationAxis::X, plan_x,
                                with_stream(noise_pl, stream::kChannelPl, stream::kAxisX));
    out.pl_y = synthesize_trace(model, s, RotationAxis::Y, plan_y,
                                with_stream(noise_pl, stream::kChannelPl, stream::kAxisY));
    out.pc_x = synthesize_trace(model, s, RotationAxis::X, plan_x,
                                with_stream(noise_pc, stream::kChannelPc, stream::kAxisX));
    out.pc_y = synthesize_trace(model, s, RotationAxis::Y, plan_y,
                                with_stream(noise_pc, stream::kChannelPc, stream::kAxisY));
    return out;
}

}  // namespace rpqst
