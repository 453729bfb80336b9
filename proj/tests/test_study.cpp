#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rpqst/study.hpp"

using namespace rpqst;

namespace {

SimConfig noiseless_config() {
    SimConfig c;
    c.noise_pl.noise_enabled = false;
    c.noise_pc.noise_enabled = false;
    c.noise_pc.pc_noise_rms = 0.0;
    return c;
}

StudyRow row_for(const StudyResult& r, double theta_deg) {
    for (const StudyRow& row : r.rows) {
        if (row.theta_deg == theta_deg) return row;
    }
    REQUIRE(false);
    return {};
}

}  // namespace

TEST_CASE("default suite: ten states, 21 measurements, every state at least twice") {
    const StateSuite suite = default_state_suite();
    CHECK(suite.states.size() == 10);
    CHECK(suite.total_measurements() == 21);
    for (int r : suite.repetitions) CHECK(r >= 2);

    // contains the single-measurement example state
    bool found = false;
    for (const PureStated& s : suite.states) {
        if (std::abs(rad_to_deg(s.theta) - 15.0) < 1e-12 &&
            std::abs(rad_to_deg(s.phi) - 235.0) < 1e-12) {
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("suite validation") {
    StateSuite bad;
    bad.states = {state_from_degrees(10.0, 10.0)};
    bad.repetitions = {1};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("noiseless batch: unit fidelity, zero spread") {
    const BatchResult b = batch_tomography(default_state_suite(), noiseless_config(), 5);
    for (const ChannelBatchStats* s : {&b.pc, &b.pl}) {
        CHECK(s->measurements == 21);
        CHECK(s->failures == 0);
        CHECK(std::abs(s->mean_fidelity - 1.0) < 1e-9);
        CHECK(s->std_fidelity < 1e-9);
        CHECK(std::abs(s->optimized_mean_fidelity - 1.0) < 1e-9);
    }
}

TEST_CASE("batch is deterministic given the master seed") {
    SimConfig config;
    const BatchResult a = batch_tomography(default_state_suite(), config, 77);
    const BatchResult b = batch_tomography(default_state_suite(), config, 77);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].fidelity == b.records[i].fidelity);
        CHECK(a.records[i].state_exp.theta == b.records[i].state_exp.theta);
        CHECK(a.records[i].state_exp.phi == b.records[i].state_exp.phi);
    }
    CHECK(a.pc.mean_fidelity == b.pc.mean_fidelity);
}

TEST_CASE("subtracting systematic offsets never decreases the mean fidelity") {
    SimConfig config = calibration_scenario();  // systematic prep offsets enabled
    for (std::uint64_t seed : {11, 12, 13}) {
        const BatchResult b = batch_tomography(default_state_suite(), config, seed);
        CHECK(b.pc.optimized_mean_fidelity >= b.pc.mean_fidelity);
        CHECK(b.pl.optimized_mean_fidelity >= b.pl.mean_fidelity);
        // the systematic phi offset is visible in the mean
        CHECK(rad_to_deg(b.pc.mean_delta_phi) == doctest::Approx(9.0).epsilon(0.5));
    }
}

TEST_CASE("PC statistics do not depend on the PL configuration") {
    SimConfig a;
    SimConfig b;
    b.noise_pl.pl_count_rate = 17.0;  // starve the PL channel
    const BatchResult ra = batch_tomography(default_state_suite(), a, 21);
    const BatchResult rb = batch_tomography(default_state_suite(), b, 21);
    CHECK(ra.pc.mean_fidelity == rb.pc.mean_fidelity);
    CHECK(ra.pc.std_fidelity == rb.pc.std_fidelity);
}

TEST_CASE("alpha study with zero error reconstructs perfectly") {
    Fig5Options opts;
    opts.error_fraction = 0.0;
    opts.trials = 200;
    opts.theta_grid_deg = {5, 45, 90};
    const StudyResult r = alpha_perturbation_study(opts, 3);
    for (const StudyRow& row : r.rows) {
        CHECK(std::abs(row.fidelity_mean - 1.0) < 1e-12);
        CHECK(row.abs_delta_theta_mean < 1e-9);
        CHECK(row.fidelity_std < 1e-12);
    }
}

TEST_CASE("alpha study qualitative shape") {
    Fig5Options opts;
    opts.trials = 2000;
    opts.theta_grid_deg = {5, 45, 90};
    const StudyResult r = alpha_perturbation_study(opts, 4);

    const StudyRow low = row_for(r, 5);
    const StudyRow mid = row_for(r, 45);
    const StudyRow high = row_for(r, 90);
    CHECK(low.fidelity_mean > mid.fidelity_mean);
    CHECK(mid.fidelity_mean > high.fidelity_mean);
    CHECK(low.abs_delta_theta_mean < mid.abs_delta_theta_mean);
    CHECK(mid.abs_delta_theta_mean < high.abs_delta_theta_mean);

    // the error-model descriptor is recorded verbatim
    CHECK(r.error_model.find("0.1") != std::string::npos);
    CHECK(r.phi_policy.find("sweep") != std::string::npos);
}

TEST_CASE("alpha study determinism and raw records") {
    Fig5Options opts;
    opts.trials = 300;
    opts.theta_grid_deg = {35, 75};
    opts.keep_raw = true;
    const StudyResult a = alpha_perturbation_study(opts, 9);
    const StudyResult b = alpha_perturbation_study(opts, 9);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].fidelity_mean == b.rows[i].fidelity_mean);
        CHECK(a.rows[i].abs_delta_phi_std == b.rows[i].abs_delta_phi_std);
    }
    CHECK(a.raw.size() == 600);

    const StudyResult c = alpha_perturbation_study(opts, 10);
    CHECK(a.rows[0].fidelity_mean != c.rows[0].fidelity_mean);
}

TEST_CASE("standard error of the study mean scales as 1/sqrt(trials)") {
    Fig5Options base;
    base.theta_grid_deg = {45};
    auto spread_of_means = [&](long trials, std::uint64_t salt) {
        std::vector<double> means;
        for (int k = 0; k < 100; ++k) {
            Fig5Options o = base;
            o.trials = trials;
            means.push_back(
                alpha_perturbation_study(o, derive_seed(salt, k)).rows[0].fidelity_mean);
        }
        double m = 0;
        for (double v : means) m += v;
        m /= means.size();
        double var = 0;
        for (double v : means) var += (v - m) * (v - m);
        return std::sqrt(var / (means.size() - 1));
    };
    const double s1 = spread_of_means(300, 1);
    const double s2 = spread_of_means(600, 2);
    // expect ratio sqrt(2) ~ 1.41; 3 sigma of the ratio estimate is ~0.30
    CHECK(s1 / s2 > 1.1);
    CHECK(s1 / s2 < 1.8);
}

TEST_CASE("calibrate_noise returns the zero-noise endpoint for target 1.0") {
    const SimConfig config = noiseless_config();
    const ChannelNoise calibrated = calibrate_noise(Channel::PC, 1.0, default_state_suite(),
                                                    config, 0.0, 5e-12, 17);
    CHECK(calibrated.pc_noise_rms == 0.0);
}

TEST_CASE("calibrate_noise rejects an unreachable target with a bracket report") {
    SimConfig config;  // noise too small for F = 0.95 anywhere in bounds
    CHECK_THROWS_WITH_AS(calibrate_noise(Channel::PC, 0.95, default_state_suite(), config, 0.0,
                                         1e-16, 23),
                         doctest::Contains("not bracketed"), NumericError);
}

TEST_CASE("calibrate_noise PC hits the target on fresh seeds and responds monotonically") {
    SimConfig config = calibration_scenario();
    CalibrationOptions copts;
    copts.tolerance = 0.0015;
    copts.eval_repeats = 3;

    const ChannelNoise calibrated = calibrate_noise(Channel::PC, 0.995, default_state_suite(),
                                                    config, 0.0, 5e-12, 1001, copts);
    config.noise_pc = calibrated;

    // fresh seeds: average a few independent batches
    double acc = 0;
    const int fresh = 5;
    for (int k = 0; k < fresh; ++k) {
        acc += batch_tomography(default_state_suite(), config, derive_seed(777, k))
                   .pc.mean_fidelity;
    }
    CHECK(std::abs(acc / fresh - 0.995) < 0.004);

    // doubling the calibrated rms strictly lowers the mean fidelity
    SimConfig doubled = config;
    doubled.noise_pc.pc_noise_rms = 2 * calibrated.pc_noise_rms;
    double acc2 = 0;
    for (int k = 0; k < fresh; ++k) {
        acc2 += batch_tomography(default_state_suite(), doubled, derive_seed(777, k))
                    .pc.mean_fidelity;
    }
    CHECK(acc2 / fresh < acc / fresh);
}
