#pragma once

#include "gmwb/pricing.hpp"
#include "gmwb/risk.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmwb {

/// Malformed JSON; line and column are 1-based.
class ConfigParseError : public std::runtime_error {
public:
    ConfigParseError(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error(what), line_(line), column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Per-command settings that sit next to the simulation config.
struct CommandSettings {
    std::vector<double> m_list{0.0, 0.1, 0.2, 0.3};
    FairFeeOptions fair;
    std::vector<double> v0_grid{0.02, 0.04, 0.06, 0.08};
    std::vector<double> sweep_c_bar;  // empty: solve per m
    FeeMode fee_mode = FeeMode::Fair;
    Measure sweep_measure = Measure::Q;
    std::vector<double> c_bar_grid{0.005, 0.01, 0.015, 0.02, 0.025, 0.03, 0.035};
    double zeta = 0.9;
    bool write_samples = true;
    double euler_h = 1e-4;
    std::size_t validate_paths = 20000;
};

struct RunConfig {
    SimConfig sim;
    CommandSettings commands;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& doc);

/// Fully resolved document: every field, defaults included.
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const DerivedConstants& derived);

std::string to_string(Measure m);
std::string to_string(MemoryMode m);
std::string to_string(AbsorptionTiming t);
std::string to_string(FeeMode m);
std::string to_string(JumpFeeTerm t);

}  // namespace gmwb
