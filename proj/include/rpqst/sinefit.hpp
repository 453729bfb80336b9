#pragma once

#include <Eigen/Dense>

#include <limits>
#include <vector>

#include "rpqst/protocol.hpp"

// Sinusoid parameter extraction from Rabi traces: periodogram initialization
// followed by damped Gauss-Newton (Levenberg-Marquardt) refinement of
//   m(tau) = offset + amplitude * exp(-tau/decay_time) * cos(2 pi f tau + phase).

namespace rpqst {

struct FitOptions {
    int max_iterations{200};
    double step_tolerance{1e-10};  // relative parameter step
    bool fix_frequency{false};     // keep the guess frequency (drive is nominally known)
    bool with_decay{false};        // fit the decay rate as a fifth parameter
    std::vector<double>* objective_trace{nullptr};  // records SSR of accepted iterates
};

struct SinusoidFit {
    double amplitude{0};   // channel units, >= 0 after canonicalization
    double frequency{0};   // Hz
    double phase{0};       // radians in (-pi, pi]
    double offset{0};      // channel units
    double decay_time{std::numeric_limits<double>::infinity()};  // seconds
    Eigen::MatrixXd covariance;  // over (amplitude, frequency, phase, offset[, decay_rate])
    double residual_rms{0};
    bool converged{false};
    int iterations{0};
    bool phase_unreliable{false};  // amplitude / residual_rms < 3

    double phase_sigma() const {
        return covariance.size() > 0 ? std::sqrt(covariance(2, 2)) : 0.0;
    }
};

double fit_model_value(const SinusoidFit& p, double tau);

// Analytic partial derivatives of the fit model at each tau. Columns are
// (amplitude, frequency, phase, offset) plus the decay rate 1/decay_time when
// with_decay is set.
Eigen::MatrixXd fit_jacobian(const SinusoidFit& p, const std::vector<double>& tau_values,
                             bool with_decay = false);

// Periodogram-based starting point: offset = sample mean, frequency = argmax
// of a dense-grid periodogram over [0.25, 4] x the nominal Rabi frequency
// (band derived from the grid when no nominal is known), amplitude and phase
// from the quadrature projections at that frequency. Covariance left empty.
SinusoidFit initial_guess(const RabiTrace& trace, double nominal_frequency_hz = 0.0);

SinusoidFit fit_sinusoid(const RabiTrace& trace, const SinusoidFit& guess,
                         const FitOptions& opts = {});

// Convenience: initial_guess + fit_sinusoid with the trace's nominal drive
// frequency when metadata is present.
SinusoidFit fit_trace(const RabiTrace& trace, const FitOptions& opts = {});

}  // namespace rpqst
