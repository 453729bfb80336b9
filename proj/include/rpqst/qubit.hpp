#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "rpqst/errors.hpp"

// Two-level state representations and exact SU(2) dynamics.
//
// Conventions (locked by tests, not prose):
//   |psi> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>
//   Bloch vector v = (sin t cos p, sin t sin p, cos t), |0> at the north pole.
//   su2_rotate applies U = exp(-i angle (axis . sigma) / 2), which acts on the
//   Bloch vector as the right-handed rotation about `axis` by `angle`.
// Global phase is discarded everywhere; only Bloch data is observable.

namespace rpqst {

template <typename Scalar>
using BlochVector = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using DensityMatrix = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

template <typename Scalar>
using StateVector = Eigen::Matrix<std::complex<Scalar>, 2, 1>;

using BlochVectord = BlochVector<double>;
using DensityMatrixd = DensityMatrix<double>;

namespace detail {
template <typename Scalar>
constexpr Scalar pi_v = Scalar(3.14159265358979323846264338327950288L);
}

// Wraps an angle into [0, 2pi).
template <typename Scalar>
Scalar wrap_two_pi(Scalar a) {
    const Scalar two_pi = Scalar(2) * detail::pi_v<Scalar>;
    Scalar r = std::fmod(a, two_pi);
    if (r < Scalar(0)) r += two_pi;
    if (r >= two_pi) r = Scalar(0);
    return r;
}

// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_pm_pi(Scalar a) {
    const Scalar pi = detail::pi_v<Scalar>;
    Scalar r = std::fmod(a, Scalar(2) * pi);
    if (r > pi) r -= Scalar(2) * pi;
    if (r <= -pi) r += Scalar(2) * pi;
    return r;
}

// Point on the Bloch sphere: theta in [0, pi], phi in [0, 2pi).
// At the poles (sin theta < 1e-12) phi is canonicalized to 0 so round trips
// are well-posed.
template <typename Scalar>
struct PureState {
    Scalar theta{0};
    Scalar phi{0};

    PureState() = default;

    PureState(Scalar theta_in, Scalar phi_in) {
        const Scalar pi = detail::pi_v<Scalar>;
        const Scalar slack = Scalar(1e-9);
        if (!(theta_in >= -slack && theta_in <= pi + slack)) {
            throw ValidationError("PureState: theta must lie in [0, pi]");
        }
        theta = std::min(std::max(theta_in, Scalar(0)), pi);
        phi = wrap_two_pi(phi_in);
        if (std::sin(theta) < Scalar(1e-12)) phi = Scalar(0);
    }

    StateVector<Scalar> amplitudes() const {
        using C = std::complex<Scalar>;
        StateVector<Scalar> psi;
        psi << C(std::cos(theta / Scalar(2)), Scalar(0)),
            std::polar(std::sin(theta / Scalar(2)), phi);
        return psi;
    }
};

using PureStated = PureState<double>;

inline constexpr double kDegPerRad = 57.29577951308232087679815481410517;

template <typename Scalar>
Scalar deg_to_rad(Scalar deg) {
    return deg * detail::pi_v<Scalar> / Scalar(180);
}

template <typename Scalar>
Scalar rad_to_deg(Scalar rad) {
    return rad * Scalar(180) / detail::pi_v<Scalar>;
}

template <typename Scalar>
PureState<Scalar> state_from_degrees(Scalar theta_deg, Scalar phi_deg) {
    return PureState<Scalar>(deg_to_rad(theta_deg), deg_to_rad(phi_deg));
}

// Rank-1 projector |psi><psi|.
template <typename Scalar>
DensityMatrix<Scalar> pure_to_density(const PureState<Scalar>& s) {
    const StateVector<Scalar> psi = s.amplitudes();
    return psi * psi.adjoint();
}

template <typename Scalar>
BlochVector<Scalar> pure_to_bloch(const PureState<Scalar>& s) {
    return BlochVector<Scalar>(std::sin(s.theta) * std::cos(s.phi),
                               std::sin(s.theta) * std::sin(s.phi),
                               std::cos(s.theta));
}

// Inverse of pure_to_bloch. Rejects vectors whose norm deviates from 1 by
// more than 1e-9.
template <typename Scalar>
PureState<Scalar> bloch_to_pure(const BlochVector<Scalar>& v) {
    if (std::abs(v.norm() - Scalar(1)) > Scalar(1e-9)) {
        throw ValidationError("bloch_to_pure: vector is not unit norm");
    }
    const Scalar theta = std::atan2(std::hypot(v.x(), v.y()), v.z());
    const Scalar phi = std::atan2(v.y(), v.x());
    return PureState<Scalar>(theta, phi);
}

// Validates the DensityMatrix invariants: Hermitian, unit trace, PSD.
template <typename Scalar>
void validate_density(const DensityMatrix<Scalar>& rho, const char* name = "rho") {
    const Scalar tol = Scalar(1e-9);
    if (!rho.allFinite()) {
        throw ValidationError(std::string(name) + ": non-finite entries");
    }
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) {
        throw ValidationError(std::string(name) + ": not Hermitian");
    }
    if (std::abs(rho.trace().real() - Scalar(1)) > Scalar(1e-9) ||
        std::abs(rho.trace().imag()) > tol) {
        throw ValidationError(std::string(name) + ": trace is not 1");
    }
    Eigen::SelfAdjointEigenSolver<DensityMatrix<Scalar>> es(rho);
    if (es.eigenvalues().minCoeff() < Scalar(-1e-9)) {
        throw ValidationError(std::string(name) + ": not positive semidefinite");
    }
}

// Normalized Hilbert-Schmidt fidelity
//   F = Tr(rho_th rho_exp) / sqrt(Tr(rho_th^2) Tr(rho_exp^2)).
// For pure states this equals (1 + v_th . v_exp) / 2.
template <typename Scalar>
Scalar fidelity(const DensityMatrix<Scalar>& rho_th, const DensityMatrix<Scalar>& rho_exp) {
    validate_density(rho_th, "rho_th");
    validate_density(rho_exp, "rho_exp");
    const Scalar overlap = (rho_th * rho_exp).trace().real();
    const Scalar p_th = (rho_th * rho_th).trace().real();
    const Scalar p_exp = (rho_exp * rho_exp).trace().real();
    const Scalar f = overlap / std::sqrt(p_th * p_exp);
    return std::min(std::max(f, Scalar(0)), Scalar(1));
}

template <typename Scalar>
Scalar fidelity(const PureState<Scalar>& a, const PureState<Scalar>& b) {
    return fidelity(pure_to_density(a), pure_to_density(b));
}

// U = exp(-i angle (axis . sigma) / 2) = cos(angle/2) I - i sin(angle/2) (axis . sigma).
template <typename Scalar>
DensityMatrix<Scalar> su2_unitary(const BlochVector<Scalar>& axis, Scalar angle) {
    using C = std::complex<Scalar>;
    if (std::abs(axis.norm() - Scalar(1)) > Scalar(1e-9)) {
        throw ValidationError("su2_unitary: rotation axis is not unit norm");
    }
    const Scalar c = std::cos(angle / Scalar(2));
    const Scalar s = std::sin(angle / Scalar(2));
    DensityMatrix<Scalar> u;
    u << C(c, -s * axis.z()), C(-s * axis.y(), -s * axis.x()),
        C(s * axis.y(), -s * axis.x()), C(c, s * axis.z());
    return u;
}

template <typename Scalar>
PureState<Scalar> su2_rotate(const PureState<Scalar>& s, const BlochVector<Scalar>& axis,
                             Scalar angle) {
    const StateVector<Scalar> psi = su2_unitary(axis, angle) * s.amplitudes();
    const Scalar theta = Scalar(2) * std::atan2(std::abs(psi(1)), std::abs(psi(0)));
    const Scalar phi = std::arg(psi(1)) - std::arg(psi(0));
    return PureState<Scalar>(theta, phi);
}

// Uniform Haar-random pure state; shared by the property tests and studies.
template <typename Scalar, typename Engine>
PureState<Scalar> random_state(Engine& eng) {
    std::uniform_real_distribution<Scalar> unit(Scalar(0), Scalar(1));
    const Scalar z = Scalar(1) - Scalar(2) * unit(eng);
    const Scalar phi = Scalar(2) * detail::pi_v<Scalar> * unit(eng);
    return PureState<Scalar>(std::acos(z), phi);
}

}  // namespace rpqst
