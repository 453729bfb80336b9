#include "rpqst/sinefit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rpqst {

namespace {

constexpr double kTwoPi = 2 * detail::pi_v<double>;

// Internal parameter vector: (amplitude, frequency, phase, offset, decay_rate).
// The decay is fitted as a rate so "no decay" is the interior point 0.
struct Params {
    double amp, freq, phase, offset, rate;

    static Params from_fit(const SinusoidFit& f) {
        const double rate = std::isinf(f.decay_time) ? 0.0 : 1.0 / f.decay_time;
        return {f.amplitude, f.frequency, f.phase, f.offset, rate};
    }

    double value(double tau) const {
        return offset + amp * std::exp(-rate * tau) * std::cos(kTwoPi * freq * tau + phase);
    }
};

double sum_squared_residuals(const Params& p, const std::vector<double>& taus,
                             const std::vector<double>& y) {
    double ssr = 0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const double r = y[i] - p.value(taus[i]);
        ssr += r * r;
    }
    return ssr;
}

// Columns limited to the parameters being fitted, in the fixed order
// amp, freq, phase, offset, rate.
Eigen::MatrixXd jacobian_cols(const Params& p, const std::vector<double>& taus,
                              const std::vector<int>& cols) {
    const auto n = static_cast<Eigen::Index>(taus.size());
    Eigen::MatrixXd j(n, static_cast<Eigen::Index>(cols.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double tau = taus[static_cast<std::size_t>(i)];
        const double env = std::exp(-p.rate * tau);
        const double arg = kTwoPi * p.freq * tau + p.phase;
        const double c = std::cos(arg);
        const double s = std::sin(arg);
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(cols.size()); ++k) {
            switch (cols[static_cast<std::size_t>(k)]) {
                case 0: j(i, k) = env * c; break;
                case 1: j(i, k) = -p.amp * env * s * kTwoPi * tau; break;
                case 2: j(i, k) = -p.amp * env * s; break;
                case 3: j(i, k) = 1.0; break;
                case 4: j(i, k) = -tau * p.amp * env * c; break;
            }
        }
    }
    return j;
}

void canonicalize(SinusoidFit& f) {
    if (f.frequency < 0) {
        f.frequency = -f.frequency;
        f.phase = -f.phase;
    }
    if (f.amplitude < 0) {
        f.amplitude = -f.amplitude;
        f.phase += detail::pi_v<double>;
    }
    f.phase = wrap_pm_pi(f.phase);
}

}  // namespace

double fit_model_value(const SinusoidFit& p, double tau) {
    return Params::from_fit(p).value(tau);
}

Eigen::MatrixXd fit_jacobian(const SinusoidFit& p, const std::vector<double>& tau_values,
                             bool with_decay) {
    std::vector<int> cols{0, 1, 2, 3};
    if (with_decay) cols.push_back(4);
    return jacobian_cols(Params::from_fit(p), tau_values, cols);
}

SinusoidFit initial_guess(const RabiTrace& trace, double nominal_frequency_hz) {
    trace.validate();
    const std::vector<double> y = trace.analysis_signal();
    const std::vector<double>& taus = trace.tau_values;
    const std::size_t n = y.size();

    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double spread = 0, magnitude = 0;
    for (double v : y) {
        spread = std::max(spread, std::abs(v - mean));
        magnitude = std::max(magnitude, std::abs(v));
    }
    if (spread <= 1e-9 * magnitude) {
        throw NumericError("initial_guess: flat trace, no oscillation to fit");
    }

    const double span = taus.back() - taus.front();
    double f_lo, f_hi;
    if (nominal_frequency_hz > 0) {
        f_lo = 0.25 * nominal_frequency_hz;
        f_hi = 4.0 * nominal_frequency_hz;
        if (span * nominal_frequency_hz < 1.0) {
            throw ValidationError("initial_guess: trace spans less than one expected period");
        }
    } else {
        // No nominal drive known: search up to just below the mean Nyquist rate.
        f_lo = 0.5 / span;
        f_hi = 0.45 * static_cast<double>(n) / span;
    }

    // Dense-grid periodogram with a floating offset: at each candidate
    // frequency solve the linear least squares a cos + b sin + c, keep the
    // frequency with the smallest residual. Unlike raw quadrature power this
    // is immune to spectral leakage from short windows; ties keep the lowest
    // frequency.
    const int grid = 2000;
    double best_ssr = std::numeric_limits<double>::infinity();
    double best_f = f_lo;
    Eigen::Vector3d best_abc = Eigen::Vector3d::Zero();
    double sum_yy = 0;
    for (double v : y) sum_yy += v * v;

    for (int g = 0; g <= grid; ++g) {
        const double f = f_lo + (f_hi - f_lo) * static_cast<double>(g) / grid;
        Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
        Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double arg = kTwoPi * f * taus[i];
            const Eigen::Vector3d basis(std::cos(arg), std::sin(arg), 1.0);
            m += basis * basis.transpose();
            rhs += y[i] * basis;
        }
        m.diagonal().array() += 1e-12 * static_cast<double>(n);
        const Eigen::Vector3d abc = m.ldlt().solve(rhs);
        const double ssr = sum_yy - abc.dot(rhs);
        if (ssr < best_ssr - 1e-15 * sum_yy) {
            best_ssr = ssr;
            best_f = f;
            best_abc = abc;
        }
    }

    SinusoidFit guess;
    guess.offset = best_abc(2);
    guess.frequency = best_f;
    guess.amplitude = std::hypot(best_abc(0), best_abc(1));
    guess.phase = std::atan2(-best_abc(1), best_abc(0));
    canonicalize(guess);
    return guess;
}

SinusoidFit fit_sinusoid(const RabiTrace& trace, const SinusoidFit& guess,
                         const FitOptions& opts) {
    trace.validate();
    const std::vector<double> y = trace.analysis_signal();
    const std::vector<double>& taus = trace.tau_values;
    const auto n = static_cast<double>(y.size());

    std::vector<int> cols{0, 2, 3};
    if (!opts.fix_frequency) cols.insert(cols.begin() + 1, 1);
    if (opts.with_decay) cols.push_back(4);
    const auto k = static_cast<Eigen::Index>(cols.size());

    double scale = std::abs(guess.offset);
    for (double v : y) scale = std::max(scale, std::abs(v));
    if (std::abs(guess.amplitude) < 1e-9 * std::max(scale, 1e-300)) {
        throw NumericError("fit_sinusoid: degenerate fit, amplitude is indistinguishable from 0");
    }

    // Oscillation energy of the data; all convergence thresholds are
    // relative to this so channel units (pA vs counts) do not matter.
    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double data_scale = 0;
    for (double v : y) data_scale += (v - y_mean) * (v - y_mean);
    data_scale = std::max(std::sqrt(data_scale), 1e-300);

    Params p = Params::from_fit(guess);
    double ssr = sum_squared_residuals(p, taus, y);
    if (opts.objective_trace) opts.objective_trace->push_back(ssr);

    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;

    auto apply_step = [&cols, &opts](Params base, const Eigen::VectorXd& delta) {
        double* fields[5] = {&base.amp, &base.freq, &base.phase, &base.offset, &base.rate};
        for (Eigen::Index i = 0; i < delta.size(); ++i) {
            *fields[cols[static_cast<std::size_t>(i)]] += delta(i);
        }
        if (opts.with_decay) base.rate = std::max(base.rate, 0.0);
        return base;
    };

    for (iter = 0; iter < opts.max_iterations; ++iter) {
        const Eigen::MatrixXd j = jacobian_cols(p, taus, cols);
        Eigen::VectorXd r(static_cast<Eigen::Index>(y.size()));
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            r(i) = y[static_cast<std::size_t>(i)] - p.value(taus[static_cast<std::size_t>(i)]);
        }

        // An amplitude collapsing to zero leaves the phase (and frequency)
        // columns structurally null: the phase is unidentifiable.
        if (std::abs(p.amp) < 1e-9 * data_scale) {
            throw NumericError(
                "fit_sinusoid: degenerate fit, amplitude collapsed to zero"
                " (phase unidentifiable)");
        }

        // Jacobi column scaling keeps the normal equations well conditioned
        // across channel units spanning pA to tens of thousands of counts.
        Eigen::VectorXd col_norm = j.colwise().norm();
        const double max_norm = col_norm.maxCoeff();
        if (!(max_norm > 0)) {
            throw NumericError("fit_sinusoid: degenerate fit, singular normal matrix");
        }
        for (Eigen::Index c = 0; c < k; ++c) {
            col_norm(c) = std::max(col_norm(c), 1e-300);
        }
        const Eigen::VectorXd s = col_norm.cwiseInverse();
        const Eigen::MatrixXd js = j * s.asDiagonal();
        const Eigen::MatrixXd h = js.transpose() * js;
        const Eigen::VectorXd g = js.transpose() * r;

        // gradient-norm convergence criterion on the scaled problem
        if (g.lpNorm<Eigen::Infinity>() <= 1e-11 * (data_scale + r.norm())) {
            converged = true;
            break;
        }

        bool accepted = false;
        while (lambda < 1e14) {
            Eigen::MatrixXd damped = h;
            damped.diagonal().array() += lambda;
            const Eigen::VectorXd delta = s.asDiagonal() * (damped.ldlt().solve(g));
            const Params trial = apply_step(p, delta);
            const double trial_ssr = sum_squared_residuals(trial, taus, y);
            if (std::isfinite(trial_ssr) && trial_ssr <= ssr) {
                // step length in data units (scaled Jacobian has unit columns)
                const double step_len = delta.cwiseProduct(col_norm).norm();
                const bool stalled = (ssr - trial_ssr) <= 1e-14 * (ssr + 1e-300) ||
                                     step_len <= opts.step_tolerance * data_scale;
                p = trial;
                ssr = trial_ssr;
                if (opts.objective_trace) opts.objective_trace->push_back(ssr);
                lambda = std::max(lambda * 0.3, 1e-12);
                accepted = true;
                if (stalled) converged = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            // no improving step exists at any damping: stationary to rounding
            converged = true;
            break;
        }
        if (converged) break;
    }

    // canonicalize before the covariance so both describe the same parameters
    if (p.freq < 0) {
        p.freq = -p.freq;
        p.phase = -p.phase;
    }
    if (p.amp < 0) {
        p.amp = -p.amp;
        p.phase += detail::pi_v<double>;
    }
    p.phase = wrap_pm_pi(p.phase);

    SinusoidFit result;
    result.amplitude = p.amp;
    result.frequency = p.freq;
    result.phase = p.phase;
    result.offset = p.offset;
    result.decay_time =
        (opts.with_decay && p.rate > 1e-300) ? 1.0 / p.rate : guess.decay_time;
    if (opts.with_decay && p.rate <= 1e-300) {
        result.decay_time = std::numeric_limits<double>::infinity();
    }
    result.iterations = iter;
    result.converged = converged;
    result.residual_rms = std::sqrt(sum_squared_residuals(p, taus, y) / n);

    // covariance = residual variance x inverse Gauss-Newton normal matrix,
    // padded back to the full (amp, freq, phase, offset[, rate]) order.
    const Eigen::MatrixXd j = jacobian_cols(p, taus, cols);
    Eigen::VectorXd col_norm = j.colwise().norm();
    for (Eigen::Index c = 0; c < k; ++c) col_norm(c) = std::max(col_norm(c), 1e-300);
    const Eigen::VectorXd s = col_norm.cwiseInverse();
    const Eigen::MatrixXd js = j * s.asDiagonal();
    const Eigen::MatrixXd h = js.transpose() * js;
    const double dof = std::max(n - static_cast<double>(k), 1.0);
    const double sigma2 = sum_squared_residuals(p, taus, y) / dof;
    Eigen::MatrixXd cov_fitted =
        sigma2 * (s.asDiagonal() * h.ldlt().solve(Eigen::MatrixXd::Identity(k, k)) *
                  s.asDiagonal());
    cov_fitted = ((cov_fitted + cov_fitted.transpose()) / 2.0).eval();

    const Eigen::Index full = opts.with_decay ? 5 : 4;
    result.covariance = Eigen::MatrixXd::Zero(full, full);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
            result.covariance(cols[static_cast<std::size_t>(a)],
                              cols[static_cast<std::size_t>(b)]) = cov_fitted(a, b);
        }
    }

    result.phase_unreliable =
        result.residual_rms > 0 && result.amplitude / result.residual_rms < 3.0;
    return result;
}

SinusoidFit fit_trace(const RabiTrace& trace, const FitOptions& opts) {
    const double nominal =
        trace.meta.model.rabi_frequency > 0 ? trace.meta.model.frequency_hz() : 0.0;
    const SinusoidFit guess = initial_guess(trace, nominal);
    return fit_sinusoid(trace, guess, opts);
}

}  // namespace rpqst
