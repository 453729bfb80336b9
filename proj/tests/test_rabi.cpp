#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rpqst/rabi.hpp"
#include "rpqst/tomography.hpp"

using namespace rpqst;

namespace {
constexpr double kPi = detail::pi_v<double>;
}

TEST_CASE("z_projection known values") {
    CHECK(z_projection(PureStated(0, 0), RotationAxis::X, kPi) == doctest::Approx(-1.0));

    // state on the rotation axis: flat trace
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> angle(0, 20);
    const PureStated on_axis(kPi / 2, 0);
    for (int i = 0; i < 50; ++i) {
        CHECK(std::abs(z_projection(on_axis, RotationAxis::X, angle(eng))) < 1e-12);
    }
}

TEST_CASE("z_projection for (45, 30) deg follows R cos(angle - alpha)") {
    const PureStated s = state_from_degrees(45.0, 30.0);
    const PhasePaird p = forward_phases(s);
    CHECK(rad_to_deg(p.alpha) == doctest::Approx(26.565051177).epsilon(1e-9));
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> angle(0, 4 * kPi);
    for (int i = 0; i < 100; ++i) {
        const double w = angle(eng);
        const double expected = p.amp_x * std::cos(w - p.alpha);
        CHECK(std::abs(z_projection(s, RotationAxis::X, w) - expected) < 1e-9);
    }
}

TEST_CASE("z_projection agrees with the SU(2) oracle") {
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> angle(-10, 10);
    for (int i = 0; i < 1000; ++i) {
        const PureStated s = random_state<double>(eng);
        const RotationAxis axis = (i % 2 == 0) ? RotationAxis::X : RotationAxis::Y;
        const double w = angle(eng);
        const Eigen::Vector2cd psi =
            oracles::su2_exponential(axis_vector<double>(axis), w) * s.amplitudes();
        CHECK(std::abs(z_projection(s, axis, w) - oracles::bloch_of(psi).z()) < 1e-12);
    }
}

TEST_CASE("forward_phases at the pole") {
    const PhasePaird p = forward_phases(PureStated(0, 0));
    CHECK(p.alpha == 0.0);
    CHECK(p.beta == 0.0);
    CHECK(p.amp_x == doctest::Approx(1.0));
    CHECK(p.amp_y == doctest::Approx(1.0));
}

TEST_CASE("forward_phases for (45, 30) deg") {
    const PhasePaird p = forward_phases(state_from_degrees(45.0, 30.0));
    CHECK(std::tan(p.alpha) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::tan(p.beta) == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-9));
    CHECK(rad_to_deg(p.beta) == doctest::Approx(40.893394649).epsilon(1e-6));

    // oracle consistency: both traces reproduce the unitary z projection
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> angle(0, 4 * kPi);
    const PureStated s = state_from_degrees(45.0, 30.0);
    for (int i = 0; i < 100; ++i) {
        const double w = angle(eng);
        const Eigen::Vector2cd px =
            oracles::su2_exponential(Eigen::Vector3d(1, 0, 0), w) * s.amplitudes();
        const Eigen::Vector2cd py =
            oracles::su2_exponential(Eigen::Vector3d(0, 1, 0), w) * s.amplitudes();
        CHECK(std::abs(p.amp_x * std::cos(w - p.alpha) - oracles::bloch_of(px).z()) < 1e-9);
        CHECK(std::abs(p.amp_y * std::cos(w + p.beta) - oracles::bloch_of(py).z()) < 1e-9);
    }
}

TEST_CASE("forward_phases degenerate state (90, 0) deg") {
    const PhasePaird p = forward_phases(state_from_degrees(90.0, 0.0));
    CHECK(p.amp_x < 1e-12);
    CHECK(p.x_degenerate());
    CHECK(p.amp_y == doctest::Approx(1.0));
    CHECK_FALSE(p.y_degenerate());
}

TEST_CASE("forward_phases amplitude identities") {
    std::mt19937_64 eng(13);
    for (int i = 0; i < 1000; ++i) {
        const PureStated s = random_state<double>(eng);
        const PhasePaird p = forward_phases(s);
        const double ct = std::cos(s.theta), st = std::sin(s.theta);
        CHECK(std::abs(p.amp_x * p.amp_x - (ct * ct + st * st * std::sin(s.phi) * std::sin(s.phi))) <
              1e-12);
        CHECK(std::abs(p.amp_y * p.amp_y - (ct * ct + st * st * std::cos(s.phi) * std::cos(s.phi))) <
              1e-12);
        CHECK(std::abs(p.alpha) <= kPi);
        CHECK(std::abs(p.beta) <= kPi);
    }
}

TEST_CASE("tan^2 alpha + tan^2 beta = tan^2 theta away from the equator") {
    std::mt19937_64 eng(17);
    for (int i = 0; i < 2000; ++i) {
        const PureStated s = random_state<double>(eng);
        if (std::abs(s.theta - kPi / 2) <= 1e-3) continue;
        const PhasePaird p = forward_phases(s);
        const double lhs = std::tan(p.alpha) * std::tan(p.alpha) +
                           std::tan(p.beta) * std::tan(p.beta);
        const double rhs = std::tan(s.theta) * std::tan(s.theta);
        CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, rhs));
    }
}

TEST_CASE("forward_phases round trip through the reconstruction") {
    std::mt19937_64 eng(19);
    int tested = 0;
    while (tested < 1000) {
        const PureStated s = random_state<double>(eng);
        const PhasePaird p = forward_phases(s);
        if (p.x_degenerate() || p.y_degenerate()) continue;
        ++tested;
        const PureStated back = reconstruct_from_phases(p);
        CHECK(std::abs(back.theta - s.theta) < 1e-9);
        CHECK(std::abs(wrap_pm_pi(back.phi - s.phi)) < 1e-9);
    }
}

TEST_CASE("degenerate amplitude iff Bloch vector near the rotation axis") {
    std::mt19937_64 eng(23);
    for (int i = 0; i < 2000; ++i) {
        const PureStated s = random_state<double>(eng);
        for (RotationAxis axis : {RotationAxis::X, RotationAxis::Y}) {
            const double amp = rabi_amplitude(s, axis);
            const BlochVectord v = pure_to_bloch(s);
            // angle between the Bloch vector and the (undirected) rotation axis
            const double along = std::min(1.0, std::abs(v.dot(axis_vector<double>(axis))));
            const double angle_to_axis = std::acos(along);
            const bool amp_degenerate = amp < kDegenerateAmplitude;
            const bool geometry_degenerate = angle_to_axis < std::asin(kDegenerateAmplitude);
            CHECK(amp_degenerate == geometry_degenerate);
        }
    }
}

TEST_CASE("ideal_signal values and periodicity") {
    RabiModel model;
    model.contrast = 0.1;
    model.baseline = 100.0;

    CHECK(ideal_signal(model, PureStated(0, 0), RotationAxis::X, 0.0) ==
          doctest::Approx(110.0).epsilon(1e-12));

    const double tau_pi = kPi / model.rabi_frequency;
    CHECK(ideal_signal(model, PureStated(0, 0), RotationAxis::X, tau_pi) ==
          doctest::Approx(90.0).epsilon(1e-9));

    std::mt19937_64 eng(29);
    std::uniform_real_distribution<double> tau(0, 3 * model.rabi_period());
    const PureStated s = random_state<double>(eng);
    for (int i = 0; i < 100; ++i) {
        const double t = tau(eng);
        const double a = ideal_signal(model, s, RotationAxis::Y, t);
        const double b = ideal_signal(model, s, RotationAxis::Y, t + model.rabi_period());
        CHECK(std::abs(a - b) < 1e-12 * std::abs(a));
    }
}

TEST_CASE("ideal_signal is monotone in z at fixed tau") {
    RabiModel model;
    // states with z = cos(theta) descending; probe at tau = 0 where z(0) = cos(theta)
    double prev = std::numeric_limits<double>::infinity();
    for (double theta_deg : {0.0, 30.0, 60.0, 90.0, 120.0, 180.0}) {
        const double sig =
            ideal_signal(model, state_from_degrees(theta_deg, 10.0), RotationAxis::X, 0.0);
        CHECK(sig < prev);
        prev = sig;
    }
}

TEST_CASE("ideal_signal decay envelope") {
    RabiModel model;
    model.decay_time = 2.0 / model.frequency_hz();  // a couple of periods
    const PureStated s = state_from_degrees(40.0, 70.0);
    const double tau = 1.3 * model.rabi_period();
    const double z = z_projection(s, RotationAxis::X, model.rabi_frequency * tau);
    const double expected =
        model.baseline * (1 + model.contrast * std::exp(-tau / model.decay_time) * z);
    CHECK(ideal_signal(model, s, RotationAxis::X, tau) == doctest::Approx(expected).epsilon(1e-12));
}
