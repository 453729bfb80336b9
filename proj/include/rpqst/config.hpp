#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

#include "rpqst/study.hpp"

// Run configuration: one nested JSON document covering the signal model,
// pulse timing, envelope plan, per-channel noise, preparation offsets, the
// state suite, and study parameters. Unknown keys are rejected; all values
// pass their owning types' validation before any run starts. Angles cross
// this boundary in degrees.

namespace rpqst {

struct RunConfig {
    SimConfig sim;
    StateSuite suite;
    Fig5Options study;
    std::uint64_t seed{12345};
    std::string output_dir{"out"};

    RunConfig() : suite(default_state_suite()) {}

    void validate() const;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig from_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    // FNV-1a 64 over the canonical serialized form, as a 16-digit hex string.
    std::string config_hash() const;
};

}  // namespace rpqst
