#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace pamfk::experiment {

// Configuration problems found before any computation starts (unknown
// fields, inconsistent dimensions, inadmissible models, ...). Mapped to CLI
// exit code 2; NumericError maps to exit code 3.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error("config field '" + field + "': " + message), field_(std::move(field))
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

// Valid commands: moment, derivative-moment, chaos, spde, validate.
// `input` is either a config object or a previously emitted record (detected
// by its embedded "config" field), so results can be reproduced from their
// own echo. Returns the result record.
nlohmann::json run_experiment(const nlohmann::json& input, const std::string& command,
                              const Overrides& overrides = {});

// Record serialization: "json" appends to a JSON array file, "csv" appends
// rows (header only when the file is new). CSV numbers use shortest
// round-trip formatting.
void write_record(const nlohmann::json& record, const std::string& path, const std::string& format);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

} // namespace pamfk::experiment
