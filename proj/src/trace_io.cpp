#include "rpqst/trace_io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace rpqst {

namespace {

constexpr const char* kTraceHeader = "tau_s,signal,channel,axis,theta_deg,phi_deg,seed";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::string& origin, std::size_t line,
                    std::size_t column) {
    double v{};
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
        std::ostringstream os;
        os << origin << ":" << line << ":" << column << ": not a number: '" << s << "'";
        throw ValidationError(os.str());
    }
    return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& origin, std::size_t line,
                        std::size_t column) {
    std::uint64_t v{};
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
        std::ostringstream os;
        os << origin << ":" << line << ":" << column << ": not an unsigned integer: '" << s << "'";
        throw ValidationError(os.str());
    }
    return v;
}

}  // namespace

std::string format_full(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string trace_to_csv(const RabiTrace& trace) {
    const std::vector<double> signal = trace.analysis_signal();
    std::ostringstream os;
    os << kTraceHeader << "\n";
    const std::string theta = format_full(rad_to_deg(trace.meta.prepared.theta));
    const std::string phi = format_full(rad_to_deg(trace.meta.prepared.phi));
    for (std::size_t i = 0; i < trace.tau_values.size(); ++i) {
        os << format_full(trace.tau_values[i]) << ',' << format_full(signal[i]) << ','
           << to_string(trace.channel) << ',' << to_string(trace.axis) << ',' << theta << ','
           << phi << ',' << trace.meta.noise.rng_seed << "\n";
    }
    return os.str();
}

void write_trace_csv(const RabiTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << trace_to_csv(trace);
    if (!out) throw IoError("write failed: " + path.string());
}

RabiTrace parse_trace_csv(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError(origin + ":1: empty file, expected header '" +
                              std::string(kTraceHeader) + "'");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceHeader) {
        throw ValidationError(origin + ":1:1: malformed header, expected '" +
                              std::string(kTraceHeader) + "' but got '" + line + "'");
    }

    RabiTrace trace;
    bool first = true;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 7) {
            std::ostringstream os;
            os << origin << ":" << line_no << ":1: expected 7 fields, got " << f.size();
            throw ValidationError(os.str());
        }
        trace.tau_values.push_back(parse_double(f[0], origin, line_no, 1));
        trace.samples.push_back(parse_double(f[1], origin, line_no, 2));

        Channel channel;
        if (f[2] == "pl") channel = Channel::PL;
        else if (f[2] == "pc") channel = Channel::PC;
        else {
            std::ostringstream os;
            os << origin << ":" << line_no << ":3: unknown channel '" << f[2] << "'";
            throw ValidationError(os.str());
        }
        RotationAxis axis;
        if (f[3] == "x") axis = RotationAxis::X;
        else if (f[3] == "y") axis = RotationAxis::Y;
        else {
            std::ostringstream os;
            os << origin << ":" << line_no << ":4: unknown axis '" << f[3] << "'";
            throw ValidationError(os.str());
        }
        const double theta_deg = parse_double(f[4], origin, line_no, 5);
        const double phi_deg = parse_double(f[5], origin, line_no, 6);
        const std::uint64_t seed = parse_u64(f[6], origin, line_no, 7);

        if (first) {
            trace.channel = channel;
            trace.axis = axis;
            trace.meta.prepared = state_from_degrees(theta_deg, phi_deg);
            trace.meta.noise.channel = channel;
            trace.meta.noise.rng_seed = seed;
            trace.meta.model.rabi_frequency = 0;  // unknown for external files
            first = false;
        } else if (channel != trace.channel || axis != trace.axis) {
            std::ostringstream os;
            os << origin << ":" << line_no << ": mixed channel/axis within one trace file";
            throw ValidationError(os.str());
        }
    }
    trace.validate();
    return trace;
}

RabiTrace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    return parse_trace_csv(in, path.string());
}

std::string fit_to_json(const SinusoidFit& fit) {
    nlohmann::json j;
    j["amplitude"] = fit.amplitude;
    j["frequency"] = fit.frequency;
    j["phase"] = fit.phase;
    j["offset"] = fit.offset;
    if (std::isinf(fit.decay_time)) {
        j["decay_time"] = nullptr;
    } else {
        j["decay_time"] = fit.decay_time;
    }
    j["residual_rms"] = fit.residual_rms;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["phase_unreliable"] = fit.phase_unreliable;
    nlohmann::json cov = nlohmann::json::array();
    for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < fit.covariance.cols(); ++c) {
            row.push_back(fit.covariance(r, c));
        }
        cov.push_back(row);
    }
    j["covariance"] = cov;
    return j.dump(2) + "\n";
}

std::string reconstruction_csv_header() {
    return "channel,theta_true_deg,phi_true_deg,theta_exp_deg,phi_exp_deg,fidelity,"
           "delta_theta_deg,delta_phi_deg,flags,seed";
}

std::string reconstruction_to_csv_row(const Reconstruction& r) {
    std::ostringstream os;
    os << to_string(r.channel) << ',' << format_full(rad_to_deg(r.prepared.theta)) << ','
       << format_full(rad_to_deg(r.prepared.phi)) << ','
       << format_full(rad_to_deg(r.state_exp.theta)) << ','
       << format_full(rad_to_deg(r.state_exp.phi)) << ',' << format_full(r.fidelity) << ','
       << format_full(rad_to_deg(r.delta_theta)) << ',' << format_full(rad_to_deg(r.delta_phi))
       << ',' << r.flags.to_string() << ',' << r.seed;
    return os.str();
}

void write_reconstructions_csv(const std::vector<Reconstruction>& rows,
                               const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << reconstruction_csv_header() << "\n";
    for (const Reconstruction& r : rows) out << reconstruction_to_csv_row(r) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

namespace {

void write_panel(const std::filesystem::path& path, const StudyResult& result,
                 double StudyRow::*mean, double StudyRow::*std_dev, bool degrees) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "theta_T_deg,mean,std,trials\n";
    for (const StudyRow& row : result.rows) {
        const double m = degrees ? rad_to_deg(row.*mean) : row.*mean;
        const double s = degrees ? rad_to_deg(row.*std_dev) : row.*std_dev;
        out << format_full(row.theta_deg) << ',' << format_full(m) << ',' << format_full(s)
            << ',' << row.trials << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

nlohmann::json channel_stats_json(const ChannelBatchStats& s) {
    nlohmann::json j;
    j["measurements"] = s.measurements;
    j["failures"] = s.failures;
    j["mean_fidelity"] = s.mean_fidelity;
    j["std_fidelity"] = s.std_fidelity;
    j["mean_delta_theta_deg"] = rad_to_deg(s.mean_delta_theta);
    j["std_delta_theta_deg"] = rad_to_deg(s.std_delta_theta);
    j["mean_delta_phi_deg"] = rad_to_deg(s.mean_delta_phi);
    j["std_delta_phi_deg"] = rad_to_deg(s.std_delta_phi);
    j["optimized_mean_fidelity"] = s.optimized_mean_fidelity;
    j["optimized_std_fidelity"] = s.optimized_std_fidelity;
    return j;
}

}  // namespace

void write_study_outputs(const StudyResult& result, const std::filesystem::path& dir,
                         const std::string& config_hash) {
    std::filesystem::create_directories(dir);
    write_panel(dir / "fidelity.csv", result, &StudyRow::fidelity_mean, &StudyRow::fidelity_std,
                false);
    write_panel(dir / "delta_theta.csv", result, &StudyRow::abs_delta_theta_mean,
                &StudyRow::abs_delta_theta_std, true);
    write_panel(dir / "delta_phi.csv", result, &StudyRow::abs_delta_phi_mean,
                &StudyRow::abs_delta_phi_std, true);

    nlohmann::json meta;
    meta["seed"] = result.master_seed;
    meta["error_model"] = result.error_model;
    meta["phi_policy"] = result.phi_policy;
    meta["trials_per_point"] = result.trials_per_point;
    meta["config_hash"] = config_hash;
    std::ofstream out(dir / "metadata.json", std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + (dir / "metadata.json").string());
    out << meta.dump(2) << "\n";
}

nlohmann::json batch_summary_json(const BatchResult& batch, const std::string& config_hash) {
    nlohmann::json j;
    j["seed"] = batch.master_seed;
    j["config_hash"] = config_hash;
    j["channels"]["pl"] = channel_stats_json(batch.pl);
    j["channels"]["pc"] = channel_stats_json(batch.pc);
    return j;
}

void write_batch_outputs(const BatchResult& batch, const std::filesystem::path& dir,
                         const std::string& config_hash) {
    std::filesystem::create_directories(dir);
    write_reconstructions_csv(batch.records, dir / "reconstructions.csv");
    std::ofstream out(dir / "batch_summary.json", std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + (dir / "batch_summary.json").string());
    out << batch_summary_json(batch, config_hash).dump(2) << "\n";
}

}  // namespace rpqst
