#pragma once

#include <cmath>
#include <limits>

#include "rpqst/qubit.hpp"

// Closed-form Rabi signal model for a prepared state driven about the x- or
// y-axis, and the forward map from (theta, phi) to the phase angles
// (alpha, beta). The sign convention is pinned by the SU(2) oracle tests:
//   z_x(w) = cos t cos w + sin t sin p sin w = amp_x cos(w - alpha)
//   z_y(w) = cos t cos w - sin t cos p sin w = amp_y cos(w + beta)
// with alpha = atan2(sin t sin p, cos t), beta = atan2(sin t cos p, cos t).

namespace rpqst {

enum class RotationAxis { X, Y };

inline const char* to_string(RotationAxis a) { return a == RotationAxis::X ? "x" : "y"; }

template <typename Scalar>
BlochVector<Scalar> axis_vector(RotationAxis a) {
    return a == RotationAxis::X ? BlochVector<Scalar>(1, 0, 0) : BlochVector<Scalar>(0, 1, 0);
}

// Rabi amplitude below which the phase is unidentifiable: the trace is flat
// because the state lies (anti)parallel to the rotation axis. Flag, do not
// silently fit.
inline constexpr double kDegenerateAmplitude = 0.02;

// Phase angles and amplitudes of the ideal x/y Rabi traces of one state.
template <typename Scalar>
struct PhasePair {
    Scalar alpha{0};  // x-Rabi phase, in (-pi, pi]
    Scalar beta{0};   // y-Rabi phase, in (-pi, pi]
    Scalar amp_x{0};  // dimensionless, in [0, 1]
    Scalar amp_y{0};

    bool x_degenerate() const { return amp_x < Scalar(kDegenerateAmplitude); }
    bool y_degenerate() const { return amp_y < Scalar(kDegenerateAmplitude); }
};

using PhasePaird = PhasePair<double>;

// Drive and channel-free signal parameters. decay_time may be infinite
// (the default; the observed fits are purely sinusoidal).
struct RabiModel {
    double rabi_frequency{2 * detail::pi_v<double> * 5e6};  // angular rate, rad/s
    double contrast{0.3};                                   // in (0, 1]
    double baseline{1.0};                                   // channel units
    double decay_time{std::numeric_limits<double>::infinity()};  // seconds

    void validate() const {
        if (!(rabi_frequency > 0)) throw ValidationError("RabiModel: rabi_frequency must be > 0");
        if (!(contrast > 0 && contrast <= 1)) {
            throw ValidationError("RabiModel: contrast must lie in (0, 1]");
        }
        if (!(baseline > 0)) throw ValidationError("RabiModel: baseline must be > 0");
        if (!(decay_time > 0)) throw ValidationError("RabiModel: decay_time must be > 0");
    }

    double rabi_period() const { return 2 * detail::pi_v<double> / rabi_frequency; }
    double frequency_hz() const { return rabi_frequency / (2 * detail::pi_v<double>); }
};

// z-component of the Bloch vector after rotating `s` about `axis` by `angle`.
// Closed form; the SU(2) unitary path is the independent oracle.
template <typename Scalar>
Scalar z_projection(const PureState<Scalar>& s, RotationAxis axis, Scalar angle) {
    const Scalar ct = std::cos(s.theta);
    const Scalar st = std::sin(s.theta);
    if (axis == RotationAxis::X) {
        return ct * std::cos(angle) + st * std::sin(s.phi) * std::sin(angle);
    }
    return ct * std::cos(angle) - st * std::cos(s.phi) * std::sin(angle);
}

template <typename Scalar>
PhasePair<Scalar> forward_phases(const PureState<Scalar>& s) {
    const Scalar ct = std::cos(s.theta);
    const Scalar st = std::sin(s.theta);
    PhasePair<Scalar> p;
    p.amp_x = std::hypot(ct, st * std::sin(s.phi));
    p.amp_y = std::hypot(ct, st * std::cos(s.phi));
    p.alpha = p.amp_x > Scalar(0) ? std::atan2(st * std::sin(s.phi), ct) : Scalar(0);
    p.beta = p.amp_y > Scalar(0) ? std::atan2(st * std::cos(s.phi), ct) : Scalar(0);
    return p;
}

// Rabi oscillation amplitude for a given rotation axis; equals the component
// of the Bloch vector perpendicular to the axis.
template <typename Scalar>
Scalar rabi_amplitude(const PureState<Scalar>& s, RotationAxis axis) {
    const PhasePair<Scalar> p = forward_phases(s);
    return axis == RotationAxis::X ? p.amp_x : p.amp_y;
}

// Noiseless channel signal at pulse duration tau:
//   baseline * (1 + contrast * exp(-tau/decay_time) * z(Omega tau)),
// maximal for z = +1 (the bright |0> state), monotone in z at fixed tau.
template <typename Scalar>
Scalar ideal_signal(const RabiModel& model, const PureState<Scalar>& s, RotationAxis axis,
                    Scalar tau) {
    const Scalar z = z_projection(s, axis, Scalar(model.rabi_frequency) * tau);
    const Scalar envelope =
        std::isinf(model.decay_time) ? Scalar(1) : std::exp(-tau / Scalar(model.decay_time));
    return Scalar(model.baseline) * (Scalar(1) + Scalar(model.contrast) * envelope * z);
}

}  // namespace rpqst
