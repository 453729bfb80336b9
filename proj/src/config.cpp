#include "rpqst/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace rpqst {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& scope,
                  const std::set<std::string>& allowed) {
    if (!j.is_object()) {
        throw ValidationError("config: '" + scope + "' must be an object");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ValidationError("config: unknown key '" + scope + "." + it.key() + "'");
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(std::string("config: bad value for '") + key + "'");
    }
}

void read_model(const json& j, RabiModel& m) {
    require_keys(j, "model", {"rabi_frequency_hz", "contrast", "decay_time_s"});
    double hz = m.frequency_hz();
    read(j, "rabi_frequency_hz", hz);
    m.rabi_frequency = 2 * detail::pi_v<double> * hz;
    read(j, "contrast", m.contrast);
    if (j.contains("decay_time_s")) {
        if (j.at("decay_time_s").is_null()) {
            m.decay_time = std::numeric_limits<double>::infinity();
        } else {
            read(j, "decay_time_s", m.decay_time);
        }
    }
}

void read_sequence(const json& j, PulseSequence& s) {
    require_keys(j, "sequence", {"laser_init_s", "laser_readout_s", "dead_time_s"});
    read(j, "laser_init_s", s.laser_init_duration);
    read(j, "laser_readout_s", s.laser_readout_duration);
    read(j, "dead_time_s", s.dead_time);
}

void read_plan(const json& j, SimConfig& c) {
    require_keys(j, "plan", {"envelope_s", "tau_count", "tau_periods", "sweep_repeats"});
    read(j, "envelope_s", c.envelope_duration);
    read(j, "tau_count", c.tau_count);
    read(j, "tau_periods", c.tau_periods);
    read(j, "sweep_repeats", c.sweep_repeats);
}

void read_noise(const json& j, SimConfig& c) {
    require_keys(j, "noise", {"pl", "pc"});
    if (j.contains("pl")) {
        const json& pl = j.at("pl");
        require_keys(pl, "noise.pl", {"count_rate_hz", "enabled"});
        read(pl, "count_rate_hz", c.noise_pl.pl_count_rate);
        read(pl, "enabled", c.noise_pl.noise_enabled);
    }
    if (j.contains("pc")) {
        const json& pc = j.at("pc");
        require_keys(pc, "noise.pc",
                     {"mean_current_a", "noise_rms_a", "band_min_a", "band_max_a", "enabled"});
        read(pc, "mean_current_a", c.noise_pc.pc_mean_current);
        read(pc, "noise_rms_a", c.noise_pc.pc_noise_rms);
        read(pc, "band_min_a", c.noise_pc.pc_band_min);
        read(pc, "band_max_a", c.noise_pc.pc_band_max);
        read(pc, "enabled", c.noise_pc.noise_enabled);
    }
}

void read_prep_error(const json& j, PrepError& p) {
    require_keys(j, "prep_error", {"theta_offset_deg", "phi_offset_deg"});
    double theta_deg = rad_to_deg(p.theta_offset);
    double phi_deg = rad_to_deg(p.phi_offset);
    read(j, "theta_offset_deg", theta_deg);
    read(j, "phi_offset_deg", phi_deg);
    p.theta_offset = deg_to_rad(theta_deg);
    p.phi_offset = deg_to_rad(phi_deg);
}

void read_suite(const json& j, StateSuite& suite) {
    require_keys(j, "suite", {"states_deg", "repetitions"});
    if (j.contains("states_deg")) {
        suite.states.clear();
        for (const json& pair : j.at("states_deg")) {
            if (!pair.is_array() || pair.size() != 2) {
                throw ValidationError(
                    "config: suite.states_deg entries must be [theta_deg, phi_deg]");
            }
            suite.states.push_back(
                state_from_degrees(pair[0].get<double>(), pair[1].get<double>()));
        }
        suite.repetitions.assign(suite.states.size(), 2);
    }
    if (j.contains("repetitions")) {
        suite.repetitions.clear();
        for (const json& r : j.at("repetitions")) {
            suite.repetitions.push_back(r.get<int>());
        }
    }
}

void read_study(const json& j, Fig5Options& s) {
    require_keys(j, "study",
                 {"theta_grid_deg", "error_fraction", "trials", "fixed_phi_deg", "perturb_beta"});
    if (j.contains("theta_grid_deg")) {
        s.theta_grid_deg = j.at("theta_grid_deg").get<std::vector<double>>();
    }
    read(j, "error_fraction", s.error_fraction);
    read(j, "trials", s.trials);
    if (j.contains("fixed_phi_deg")) {
        if (j.at("fixed_phi_deg").is_null()) {
            s.fixed_phi_deg.reset();
        } else {
            s.fixed_phi_deg = j.at("fixed_phi_deg").get<double>();
        }
    }
    read(j, "perturb_beta", s.perturb_beta);
}

}  // namespace

void RunConfig::validate() const {
    sim.validate();
    suite.validate();
    if (!(study.error_fraction >= 0)) {
        throw ValidationError("config: study.error_fraction must be >= 0");
    }
    if (study.trials < 100) throw ValidationError("config: study.trials must be >= 100");
    for (double t : study.theta_grid_deg) {
        if (!(t > 0 && t <= 90)) {
            throw ValidationError("config: study.theta_grid_deg must lie in (0, 90]");
        }
    }
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    require_keys(j, "<root>",
                 {"model", "sequence", "plan", "noise", "prep_error", "suite", "study", "seed",
                  "output_dir"});
    RunConfig c;
    if (j.contains("model")) read_model(j.at("model"), c.sim.model);
    if (j.contains("sequence")) read_sequence(j.at("sequence"), c.sim.sequence);
    if (j.contains("plan")) read_plan(j.at("plan"), c.sim);
    if (j.contains("noise")) read_noise(j.at("noise"), c.sim);
    if (j.contains("prep_error")) read_prep_error(j.at("prep_error"), c.sim.prep_error);
    if (j.contains("suite")) read_suite(j.at("suite"), c.suite);
    if (j.contains("study")) read_study(j.at("study"), c.study);
    read(j, "seed", c.seed);
    read(j, "output_dir", c.output_dir);
    c.validate();
    return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config: invalid JSON in " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["model"]["rabi_frequency_hz"] = sim.model.frequency_hz();
    j["model"]["contrast"] = sim.model.contrast;
    j["model"]["decay_time_s"] =
        std::isinf(sim.model.decay_time) ? nlohmann::json(nullptr)
                                         : nlohmann::json(sim.model.decay_time);
    j["sequence"]["laser_init_s"] = sim.sequence.laser_init_duration;
    j["sequence"]["laser_readout_s"] = sim.sequence.laser_readout_duration;
    j["sequence"]["dead_time_s"] = sim.sequence.dead_time;
    j["plan"]["envelope_s"] = sim.envelope_duration;
    j["plan"]["tau_count"] = sim.tau_count;
    j["plan"]["tau_periods"] = sim.tau_periods;
    j["plan"]["sweep_repeats"] = sim.sweep_repeats;
    j["noise"]["pl"]["count_rate_hz"] = sim.noise_pl.pl_count_rate;
    j["noise"]["pl"]["enabled"] = sim.noise_pl.noise_enabled;
    j["noise"]["pc"]["mean_current_a"] = sim.noise_pc.pc_mean_current;
    j["noise"]["pc"]["noise_rms_a"] = sim.noise_pc.pc_noise_rms;
    j["noise"]["pc"]["band_min_a"] = sim.noise_pc.pc_band_min;
    j["noise"]["pc"]["band_max_a"] = sim.noise_pc.pc_band_max;
    j["noise"]["pc"]["enabled"] = sim.noise_pc.noise_enabled;
    j["prep_error"]["theta_offset_deg"] = rad_to_deg(sim.prep_error.theta_offset);
    j["prep_error"]["phi_offset_deg"] = rad_to_deg(sim.prep_error.phi_offset);
    nlohmann::json states = nlohmann::json::array();
    for (const PureStated& s : suite.states) {
        states.push_back({rad_to_deg(s.theta), rad_to_deg(s.phi)});
    }
    j["suite"]["states_deg"] = states;
    j["suite"]["repetitions"] = suite.repetitions;
    j["study"]["theta_grid_deg"] = study.theta_grid_deg;
    j["study"]["error_fraction"] = study.error_fraction;
    j["study"]["trials"] = study.trials;
    j["study"]["fixed_phi_deg"] = study.fixed_phi_deg
                                      ? nlohmann::json(*study.fixed_phi_deg)
                                      : nlohmann::json(nullptr);
    j["study"]["perturb_beta"] = study.perturb_beta;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    return j;
}

std::string RunConfig::config_hash() const {
    const std::string dump = to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

}  // namespace rpqst
