#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "rpqst/protocol.hpp"
#include "rpqst/trace_io.hpp"

using namespace rpqst;

namespace {

PulseSequence short_sequence() {
    PulseSequence seq;
    seq.prep_duration = 1e-6;
    seq.laser_init_duration = 3e-6;
    seq.laser_readout_duration = 3e-6;
    seq.dead_time = 3e-6;
    return seq;  // 10 us at tau = 0
}

std::vector<double> linear_taus(int count, double lo, double hi) {
    std::vector<double> taus(count);
    for (int i = 0; i < count; ++i) taus[i] = lo + (hi - lo) * i / (count - 1);
    return taus;
}

ChannelNoise pl_noise(std::uint64_t seed = 0, bool enabled = true) {
    ChannelNoise n;
    n.channel = Channel::PL;
    n.rng_seed = seed;
    n.noise_enabled = enabled;
    return n;
}

ChannelNoise pc_noise(std::uint64_t seed = 0, bool enabled = true) {
    ChannelNoise n;
    n.channel = Channel::PC;
    n.rng_seed = seed;
    n.noise_enabled = enabled;
    return n;
}

}  // namespace

TEST_CASE("plan_envelopes repetition counts") {
    // 10 us sequence in a 500 ms envelope -> 50,000 repetitions
    EnvelopePlan plan = plan_envelopes(short_sequence(), 0.5, {0.0});
    CHECK(plan.repetitions[0] == 50000);

    // sequence barely fits: one repetition
    PulseSequence seq;
    seq.prep_duration = 0.499;
    seq.laser_init_duration = 0;
    seq.laser_readout_duration = 0;
    seq.dead_time = 0;
    EnvelopePlan one = plan_envelopes(seq, 0.5, {0.0});
    CHECK(one.repetitions[0] == 1);

    // 40 taus, 3 sweeps -> 120 envelope visits in order 1..n, 1..n, 1..n
    EnvelopePlan sweep = plan_envelopes(short_sequence(), 0.5, linear_taus(40, 0, 4e-7), 3);
    CHECK(sweep.envelope_count() == 40);
    CHECK(sweep.total_envelope_visits() == 120);
}

TEST_CASE("plan_envelopes rejects an envelope shorter than one sequence") {
    CHECK_THROWS_AS(plan_envelopes(short_sequence(), 5e-6, {0.0}), ValidationError);
    CHECK_THROWS_AS(plan_envelopes(short_sequence(), 0.5, {1e-7, 1e-7}), ValidationError);
}

TEST_CASE("photocurrent_amplitude charge-cycle formula") {
    CHECK(photocurrent_amplitude(0.0) == 0.0);
    CHECK(std::abs(photocurrent_amplitude(3.121e7) - 1.000e-11) < 1e-14);
    // 1-100 pA range for a single center
    CHECK(photocurrent_amplitude(3.12e6) == doctest::Approx(1e-12).epsilon(0.01));
    CHECK(photocurrent_amplitude(3.12e8) == doctest::Approx(1e-10).epsilon(0.01));
    CHECK_THROWS_AS(photocurrent_amplitude(-1.0), ValidationError);
}

TEST_CASE("noiseless synthesis equals ideal_signal in per-repetition units") {
    RabiModel model;
    const PureStated s = state_from_degrees(40.0, 110.0);
    EnvelopePlan plan = plan_envelopes(short_sequence(), 0.5, default_tau_grid(model));

    for (const ChannelNoise& noise : {pl_noise(0, false), pc_noise(0, false)}) {
        const RabiTrace trace = synthesize_trace(model, s, RotationAxis::X, plan, noise);
        const std::vector<double> y = trace.analysis_signal();
        RabiModel scaled = model;
        scaled.baseline = trace.channel_baseline();
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double expected = ideal_signal(scaled, s, RotationAxis::X, plan.tau_values[i]);
            CHECK(std::abs(y[i] - expected) <= 1e-12 * std::abs(expected));
        }
    }
}

TEST_CASE("PL samples are non-negative integer counts, PC samples finite reals") {
    RabiModel model;
    const PureStated s = state_from_degrees(70.0, 20.0);
    EnvelopePlan plan = plan_envelopes(short_sequence(), 0.5, default_tau_grid(model));

    const RabiTrace pl = synthesize_trace(model, s, RotationAxis::Y, plan, pl_noise(99));
    for (double v : pl.samples) {
        CHECK(v >= 0.0);
        CHECK(v == std::floor(v));
    }
    const RabiTrace pc = synthesize_trace(model, s, RotationAxis::Y, plan, pc_noise(99));
    for (double v : pc.samples) CHECK(std::isfinite(v));
}

TEST_CASE("Poisson channel: sample variance matches the mean at 1e4 counts") {
    RabiModel model;
    // degenerate state on the x axis: z = 0 for every tau, constant mean
    const PureStated s = state_from_degrees(90.0, 0.0);
    // narrow tau window keeps the repetition count constant
    const std::vector<double> taus = linear_taus(10000, 1.0e-6, 1.0001e-6);
    EnvelopePlan plan = plan_envelopes(short_sequence(), 0.5, taus);
    const std::int64_t reps = plan.repetitions.front();
    CHECK(plan.repetitions.back() == reps);

    ChannelNoise noise = pl_noise(4242);
    noise.pl_count_rate = 1e4 / (short_sequence().laser_readout_duration * reps);

    const RabiTrace trace = synthesize_trace(model, s, RotationAxis::X, plan, noise);
    const double n = static_cast<double>(trace.samples.size());
    const double mean =
        std::accumulate(trace.samples.begin(), trace.samples.end(), 0.0) / n;
    double var = 0;
    for (double v : trace.samples) var += (v - mean) * (v - mean);
    var /= (n - 1);

    CHECK(mean == doctest::Approx(1e4).epsilon(0.02));
    CHECK(var == doctest::Approx(1e4).epsilon(0.05));
}

TEST_CASE("fixed seed gives bit-identical traces") {
    RabiModel model;
    const PureStated s = state_from_degrees(25.0, 300.0);
    EnvelopePlan plan = plan_envelopes(short_sequence(), 0.5, default_tau_grid(model));

    const RabiTrace a = synthesize_trace(model, s, RotationAxis::X, plan, pc_noise(42));
    const RabiTrace b = synthesize_trace(model, s, RotationAxis::X, plan, pc_noise(42));
    CHECK(trace_to_csv(a) == trace_to_csv(b));
    CHECK(a.samples == b.samples);

    const RabiTrace c = synthesize_trace(model, s, RotationAxis::X, plan, pc_noise(43));
    CHECK(a.samples != c.samples);
}

TEST_CASE("mean of seeded noisy traces converges to the noiseless trace") {
    RabiModel model;
    const PureStated s = state_from_degrees(55.0, 85.0);
    EnvelopePlan plan = plan_envelopes(short_sequence(), 0.5, default_tau_grid(model, 8));

    const RabiTrace noiseless = synthesize_trace(model, s, RotationAxis::X, plan, pc_noise(0, false));

    const int n_traces = 10000;
    std::vector<double> acc(plan.envelope_count(), 0.0);
    for (int k = 0; k < n_traces; ++k) {
        const RabiTrace t =
            synthesize_trace(model, s, RotationAxis::X, plan, pc_noise(derive_seed(7, k)));
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += t.samples[i];
    }
    const double sigma_of_mean = pc_noise().pc_noise_rms / std::sqrt(double(n_traces));
    for (std::size_t i = 0; i < acc.size(); ++i) {
        CHECK(std::abs(acc[i] / n_traces - noiseless.samples[i]) < 3 * sigma_of_mean);
    }
}

TEST_CASE("plausibility band violation is a configuration error") {
    RabiModel model;
    EnvelopePlan plan = plan_envelopes(short_sequence(), 0.5, default_tau_grid(model));
    ChannelNoise noise = pc_noise();
    noise.pc_mean_current = 5e-10;  // 500 pA, outside [1, 100] pA
    CHECK_THROWS_AS(
        synthesize_trace(model, state_from_degrees(10.0, 10.0), RotationAxis::X, plan, noise),
        ValidationError);
}

TEST_CASE("rpqst_trace_pair channel scaling and determinism") {
    RabiModel model;
    const PureStated s = state_from_degrees(15.0, 235.0);
    EnvelopePlan plan = plan_envelopes(short_sequence(), 0.5, default_tau_grid(model));

    const TracePair pair =
        rpqst_trace_pair(model, s, plan, plan, pl_noise(0, false), pc_noise(0, false));

    // noiseless: the four traces pairwise satisfy the PL/PC channel scaling
    const double pl_base = pair.pl_x.channel_baseline();
    const double pc_base = pair.pc_x.channel_baseline();
    const std::vector<double> plx = pair.pl_x.analysis_signal();
    const std::vector<double> ply = pair.pl_y.analysis_signal();
    for (std::size_t i = 0; i < plx.size(); ++i) {
        CHECK(std::abs(plx[i] / pl_base - pair.pc_x.samples[i] / pc_base) < 1e-12);
        CHECK(std::abs(ply[i] / pl_base - pair.pc_y.samples[i] / pc_base) < 1e-12);
    }

    const TracePair again =
        rpqst_trace_pair(model, s, plan, plan, pl_noise(1234), pc_noise(1234));
    const TracePair again2 =
        rpqst_trace_pair(model, s, plan, plan, pl_noise(1234), pc_noise(1234));
    CHECK(again.pl_x.samples == again2.pl_x.samples);
    CHECK(again.pc_y.samples == again2.pc_y.samples);
    // channel/axis streams differ
    CHECK(again.pc_x.samples != again.pc_y.samples);
}

TEST_CASE("rpqst_trace_pair x-trace of a degenerate state is flat within noise") {
    RabiModel model;
    const PureStated s = state_from_degrees(90.0, 0.0);  // Bloch vector on the x axis
    EnvelopePlan plan = plan_envelopes(short_sequence(), 0.5, default_tau_grid(model));

    const TracePair pair = rpqst_trace_pair(model, s, plan, plan, pl_noise(5), pc_noise(5));
    const double n = static_cast<double>(pair.pc_x.samples.size());
    double mean = std::accumulate(pair.pc_x.samples.begin(), pair.pc_x.samples.end(), 0.0) / n;
    double var = 0;
    for (double v : pair.pc_x.samples) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / (n - 1));
    CHECK(sd < 3 * pc_noise().pc_noise_rms);  // no oscillation beyond noise

    // while the y trace carries the full modulation
    double lo = 1e9, hi = -1e9;
    for (double v : pair.pc_y.samples) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi - lo > model.contrast * pc_noise().pc_mean_current);
}

TEST_CASE("rpqst_trace_pair rejects mismatched tau grids") {
    RabiModel model;
    EnvelopePlan plan_x = plan_envelopes(short_sequence(), 0.5, default_tau_grid(model, 40));
    EnvelopePlan plan_y = plan_envelopes(short_sequence(), 0.5, default_tau_grid(model, 41));
    CHECK_THROWS_AS(rpqst_trace_pair(model, state_from_degrees(10.0, 10.0), plan_x, plan_y,
                                     pl_noise(), pc_noise()),
                    ValidationError);
}

TEST_CASE("sweep averaging keeps the mean and reduces PC variance") {
    RabiModel model;
    const PureStated s = state_from_degrees(90.0, 0.0);  // flat trace isolates the noise
    const std::vector<double> taus = linear_taus(400, 1.0e-6, 1.0001e-6);
    EnvelopePlan plan1 = plan_envelopes(short_sequence(), 0.5, taus, 1);
    EnvelopePlan plan16 = plan_envelopes(short_sequence(), 0.5, taus, 16);

    auto spread = [](const RabiTrace& t) {
        const double n = static_cast<double>(t.samples.size());
        const double mean = std::accumulate(t.samples.begin(), t.samples.end(), 0.0) / n;
        double var = 0;
        for (double v : t.samples) var += (v - mean) * (v - mean);
        return std::sqrt(var / (n - 1));
    };
    const RabiTrace one = synthesize_trace(model, s, RotationAxis::X, plan1, pc_noise(31));
    const RabiTrace many = synthesize_trace(model, s, RotationAxis::X, plan16, pc_noise(31));
    CHECK(spread(many) < spread(one));  // averaging across sweeps
}
