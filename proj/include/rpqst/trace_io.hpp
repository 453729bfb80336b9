#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rpqst/study.hpp"

// File formats. Angles cross these boundaries in degrees; everything internal
// stays in radians. All floating point values are written with 17 significant
// digits so files round-trip doubles exactly. LF line endings, UTF-8.

namespace rpqst {

// Trace CSV, header: tau_s,signal,channel,axis,theta_deg,phi_deg,seed
// The signal column carries the analysis signal (PL counts normalized per
// repetition), which is what externally recorded files supply as well.
std::string trace_to_csv(const RabiTrace& trace);
void write_trace_csv(const RabiTrace& trace, const std::filesystem::path& path);
RabiTrace read_trace_csv(const std::filesystem::path& path);
RabiTrace parse_trace_csv(std::istream& in, const std::string& origin);

// Fit record, JSON; field names match SinusoidFit, covariance row-major.
std::string fit_to_json(const SinusoidFit& fit);

// Reconstruction CSV rows:
// channel,theta_true_deg,phi_true_deg,theta_exp_deg,phi_exp_deg,fidelity,
// delta_theta_deg,delta_phi_deg,flags,seed
std::string reconstruction_csv_header();
std::string reconstruction_to_csv_row(const Reconstruction& r);
void write_reconstructions_csv(const std::vector<Reconstruction>& rows,
                               const std::filesystem::path& path);

// Study outputs: one CSV per panel with columns theta_T_deg,mean,std,trials
// (fidelity.csv, delta_theta.csv, delta_phi.csv; angle panels in degrees)
// plus metadata.json recording seed, error model, phi policy, config hash.
void write_study_outputs(const StudyResult& result, const std::filesystem::path& dir,
                         const std::string& config_hash);

nlohmann::json batch_summary_json(const BatchResult& batch, const std::string& config_hash);
void write_batch_outputs(const BatchResult& batch, const std::filesystem::path& dir,
                         const std::string& config_hash);

std::string format_full(double v);  // 17 significant digits

}  // namespace rpqst
