#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>

#include "rpqst/sinefit.hpp"

// State reconstruction from fitted x- and y-Rabi phases.
//
// Inverse of the forward map: with quadratures q = A sin(phase), p = A cos(phase)
// of each fitted trace (alpha = -phase_x, beta = +phase_y under the pinned
// convention),
//   theta = atan2(hypot(q_x, q_y), pbar),  pbar = amplitude-weighted mean of
//   the two cos(theta) estimates, and phi = atan2(q_x, q_y).
// atan2 on signed quadratures resolves all four quadrants; tangent ratios
// would be ambiguous by pi.

namespace rpqst {

struct QualityFlags {
    bool x_degenerate{false};       // x-Rabi amplitude below the SNR guard
    bool y_degenerate{false};
    bool inconsistent_costheta{false};  // the two cos(theta) estimates disagree > 0.05
    bool near_pole{false};          // sin(theta) < 0.02, phi low-confidence
    bool fit_unconverged{false};

    bool any() const {
        return x_degenerate || y_degenerate || inconsistent_costheta || near_pole ||
               fit_unconverged;
    }
    std::string to_string() const;
};

struct PhaseReconstruction {
    PureStated state;
    PhasePaird phases;  // inputs actually used, amplitudes normalized to [0, 1]
    QualityFlags flags;
};

// Exact inverse of forward_phases on exact inputs.
PureStated reconstruct_from_phases(const PhasePaird& p);

PhaseReconstruction reconstruct_state(const SinusoidFit& fit_x, const SinusoidFit& fit_y);

struct Reconstruction {
    Channel channel{Channel::PC};
    PureStated prepared;
    PureStated state_exp;
    DensityMatrixd rho_exp;
    double fidelity{0};
    double delta_theta{0};  // theta_exp - theta_true, radians
    double delta_phi{0};    // wrapped to (-pi, pi]
    PhasePaird phase_inputs;
    QualityFlags flags;
    std::uint64_t seed{0};
};

Reconstruction evaluate(const PureStated& recon, const PureStated& prepared, Channel channel);

// Systematic preparation offsets (MW amplitude / phase-reference
// miscalibration). Zero by default; the calibrated scenario enables them.
struct PrepError {
    double theta_offset{0};  // radians
    double phi_offset{0};    // radians

    PureStated apply(const PureStated& nominal) const {
        const double pi = detail::pi_v<double>;
        const double theta =
            std::min(std::max(nominal.theta + theta_offset, 0.0), pi);
        return PureStated(theta, nominal.phi + phi_offset);
    }
};

// Full simulation scenario for one tomography measurement.
struct SimConfig {
    RabiModel model;
    PulseSequence sequence;  // prep_duration is derived per state as theta/Omega
    double envelope_duration{0.5};
    int tau_count{40};
    double tau_periods{2.0};
    int sweep_repeats{1};
    ChannelNoise noise_pl;
    ChannelNoise noise_pc;
    PrepError prep_error;

    SimConfig() {
        noise_pl.channel = Channel::PL;
        noise_pc.channel = Channel::PC;
    }

    void validate() const;
    EnvelopePlan make_plan(const PureStated& prepared, RotationAxis axis) const;
};

struct TomographyResult {
    Reconstruction pl;
    Reconstruction pc;
    bool pl_ok{true};        // false: that channel's reconstruction failed and
    bool pc_ok{true};        // its error is recorded below
    std::string pl_error;
    std::string pc_error;
    TracePair traces;
    SinusoidFit fit_pl_x, fit_pl_y, fit_pc_x, fit_pc_y;
};

// End to end: synthesize four traces, fit, reconstruct per channel.
// Deterministic given (config, prepared, seed). The channels are processed
// independently; a NumericError is thrown only when both fail.
TomographyResult tomograph(const SimConfig& config, const PureStated& prepared,
                           std::uint64_t seed);

}  // namespace rpqst
