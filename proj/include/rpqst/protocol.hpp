#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rpqst/rabi.hpp"
#include "rpqst/rng.hpp"

// Envelope-based pulse protocols and synthesis of noisy PL/PC Rabi traces.
//
// The measurement is divided into fixed wall-clock envelopes; within one
// envelope the pulse sequence for a single tau repeats as many times as fits,
// and the slow detector records one aggregate sample per envelope. PL samples
// are total photon counts over the envelope (integers); PC samples are mean
// currents (reals). The per-repetition analysis signal divides PL counts by
// the envelope's repetition count so both channels follow the sinusoidal
// model offset + amplitude * cos(Omega tau + phase).

namespace rpqst {

inline constexpr double kElementaryCharge = 1.602176634e-19;  // C

enum class Channel { PL, PC };

inline const char* to_string(Channel c) { return c == Channel::PL ? "pl" : "pc"; }

// Timing of one pulse sequence: init laser, MW preparation pulse (duration
// T_theta), MW probe pulse (variable duration tau, fixed phase offset from
// the preparation pulse), readout laser, dead time.
struct PulseSequence {
    double prep_duration{0};          // T_theta, seconds
    double prep_phase{0};             // radians
    double probe_phase{0};            // radians; x-drive 0, y-drive pi/2
    double laser_init_duration{2e-6};
    double laser_readout_duration{3e-6};
    double dead_time{1e-6};

    void validate() const {
        if (prep_duration < 0 || laser_init_duration < 0 || laser_readout_duration < 0 ||
            dead_time < 0) {
            throw ValidationError("PulseSequence: durations must be >= 0");
        }
        if (!(duration_at(0.0) > 0)) {
            throw ValidationError("PulseSequence: total sequence duration must be > 0");
        }
    }

    double duration_at(double tau) const {
        return prep_duration + tau + laser_init_duration + laser_readout_duration + dead_time;
    }
};

// One envelope per tau value; repetition counts are derived per envelope from
// that envelope's sequence duration.
struct EnvelopePlan {
    PulseSequence sequence;
    double envelope_duration{0.5};       // seconds
    std::vector<double> tau_values;      // strictly increasing
    std::vector<std::int64_t> repetitions;  // one per envelope
    int sweep_repeats{1};

    std::size_t envelope_count() const { return tau_values.size(); }
    std::size_t total_envelope_visits() const {
        return tau_values.size() * static_cast<std::size_t>(sweep_repeats);
    }
};

EnvelopePlan plan_envelopes(const PulseSequence& seq, double envelope_duration,
                            std::vector<double> tau_values, int sweep_repeats = 1);

// Evenly spaced probe durations covering `periods` Rabi periods, tau = 0 first.
std::vector<double> default_tau_grid(const RabiModel& model, int count = 40, double periods = 2.0);

// Per-channel detector model. pl_count_rate applies during the readout
// window; pc noise is Gaussian with the given rms. The PC mean current must
// stay inside the plausibility band.
struct ChannelNoise {
    Channel channel{Channel::PC};
    double pl_count_rate{1.5e5};   // counts/s while the readout laser is on
    double pc_mean_current{1e-11}; // A
    double pc_noise_rms{5e-13};    // A
    double pc_band_min{1e-12};     // A
    double pc_band_max{1e-10};     // A
    std::uint64_t rng_seed{0};
    bool noise_enabled{true};      // false: Poisson/Gaussian replaced by mean

    void validate() const;
};

// Prepared state and full configuration snapshot carried with each trace.
struct TraceMeta {
    PureStated prepared;
    RabiModel model;
    EnvelopePlan plan;
    ChannelNoise noise;
};

// Sampled Rabi signal versus probe duration for one axis and one channel.
// PL samples are per-envelope total counts; PC samples are currents in A.
struct RabiTrace {
    RotationAxis axis{RotationAxis::X};
    Channel channel{Channel::PC};
    std::vector<double> tau_values;
    std::vector<double> samples;
    std::vector<std::int64_t> repetitions;  // empty for external traces
    TraceMeta meta;

    void validate() const;

    // Per-repetition signal the fit consumes: PL counts normalized by the
    // envelope's repetition count, PC currents as recorded.
    std::vector<double> analysis_signal() const;

    // Channel scale factor: analysis signal = scale * (1 + contrast * z).
    double channel_baseline() const;
};

// I = 2 e cycle_rate: every charge cycle produces two carriers (an electron
// during NV- ionization, a hole during NV- recovery).
double photocurrent_amplitude(double cycle_rate);

RabiTrace synthesize_trace(const RabiModel& model, const PureStated& s, RotationAxis axis,
                           const EnvelopePlan& plan, const ChannelNoise& noise);

// Simultaneous PL/PC readout of the two-pulse tomography sequence: x- and
// y-axis traces for both channels, RNG partitioned per channel/axis.
struct TracePair {
    RabiTrace pl_x, pl_y, pc_x, pc_y;
};

TracePair rpqst_trace_pair(const RabiModel& model, const PureStated& s, const EnvelopePlan& plan_x,
                           const EnvelopePlan& plan_y, const ChannelNoise& noise_pl,
                           const ChannelNoise& noise_pc);

}  // namespace rpqst
