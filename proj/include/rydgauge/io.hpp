#pragma once

#include "rydgauge/pairham.hpp"

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace rydgauge {

using json = nlohmann::json;

std::string version_string();

// Key-value text: "a.b = value" lines, optional [section] headers that prefix keys, '#' comments.
// Values are read as JSON literals when they parse (numbers, booleans, arrays, quoted strings)
// and as bare strings otherwise.
json parse_key_value(const std::string& text);
// JSON when the file is a JSON object, key-value text otherwise.
json load_config(const std::string& path);
json parse_config_text(const std::string& text);

// Typed lookup of a dotted path with a default; wrong types raise ConfigError.
class ConfigView {
public:
    explicit ConfigView(const json& root) : root_(root) {}
    bool has(const std::string& path) const;
    double number(const std::string& path, double fallback) const;
    double number(const std::string& path) const;
    long integer(const std::string& path, long fallback) const;
    bool boolean(const std::string& path, bool fallback) const;
    std::string text(const std::string& path, const std::string& fallback) const;
    std::vector<double> numbers(const std::string& path, const std::vector<double>& fallback) const;
    const json* find(const std::string& path) const;

private:
    const json& root_;
};

StarkScheme scheme_from_config(const ConfigView& cfg, double default_Delta);
Species species_from_config(const ConfigView& cfg, const std::string& default_name);
// Mass parameter: `mass` when given, otherwise from the species.
double mass_from_config(const ConfigView& cfg, const Species& species);
json scheme_to_json(const StarkScheme& s);
json units_block(const Species& species, double mass);

// CSV with '#' provenance lines (config, version, units) before the column header.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns, const json& config,
              const json& units);
    void row(const std::vector<double>& values);
    void close();

private:
    std::ofstream out_;
    size_t ncols_;
};

std::string provenance_header(const json& config, const json& units);
void write_json(const std::string& path, const json& payload, const json& config, const json& units);

}  // namespace rydgauge
