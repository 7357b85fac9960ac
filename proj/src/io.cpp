#include "rydgauge/io.hpp"

#include "rydgauge/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace rydgauge {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string p;
    while (std::getline(ss, p, '.')) {
        if (p.empty()) throw ConfigError("empty component in key '" + path + "'");
        parts.push_back(p);
    }
    if (parts.empty()) throw ConfigError("empty key");
    return parts;
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

}  // namespace

std::string version_string() { return "rydgauge 1.0.0"; }

json parse_key_value(const std::string& text) {
    json root = json::object();
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        const std::string raw = trim(line.substr(eq + 1));
        if (!section.empty()) key = section + "." + key;
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw;
        }
        json* node = &root;
        const auto parts = split_path(key);
        for (size_t i = 0; i + 1 < parts.size(); ++i) {
            json& next = (*node)[parts[i]];
            if (next.is_null()) next = json::object();
            if (!next.is_object()) throw ConfigError("line " + std::to_string(lineno) + ": '" + parts[i] + "' is not a table");
            node = &next;
        }
        if (node->contains(parts.back()))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        (*node)[parts.back()] = value;
    }
    return root;
}

json parse_config_text(const std::string& text) {
    const std::string t = trim(text);
    if (!t.empty() && t.front() == '{') {
        try {
            return json::parse(t);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("invalid JSON config: ") + e.what());
        }
    }
    return parse_key_value(text);
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

const json* ConfigView::find(const std::string& path) const {
    const json* node = &root_;
    for (const auto& p : split_path(path)) {
        if (!node->is_object() || !node->contains(p)) return nullptr;
        node = &(*node)[p];
    }
    return node;
}

bool ConfigView::has(const std::string& path) const { return find(path) != nullptr; }

double ConfigView::number(const std::string& path, double fallback) const {
    const json* v = find(path);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError("'" + path + "' must be a number");
    return v->get<double>();
}

double ConfigView::number(const std::string& path) const {
    if (!has(path)) throw ConfigError("missing required key '" + path + "'");
    return number(path, 0.0);
}

long ConfigView::integer(const std::string& path, long fallback) const {
    const json* v = find(path);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError("'" + path + "' must be an integer");
    return v->get<long>();
}

bool ConfigView::boolean(const std::string& path, bool fallback) const {
    const json* v = find(path);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError("'" + path + "' must be true or false");
    return v->get<bool>();
}

std::string ConfigView::text(const std::string& path, const std::string& fallback) const {
    const json* v = find(path);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError("'" + path + "' must be a string");
    return v->get<std::string>();
}

std::vector<double> ConfigView::numbers(const std::string& path, const std::vector<double>& fallback) const {
    const json* v = find(path);
    if (!v) return fallback;
    if (!v->is_array()) throw ConfigError("'" + path + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError("'" + path + "' must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

StarkScheme scheme_from_config(const ConfigView& cfg, double default_Delta) {
    const StarkKind kind = stark_kind_from_string(cfg.text("stark.kind", "inner"));
    if (kind == StarkKind::Custom) {
        const auto p = cfg.numbers("stark.p_shift", {});
        const auto s = cfg.numbers("stark.s_shift", {0.0, 0.0});
        if (p.size() != 4) throw ConfigError("stark.p_shift needs four entries (m = -3/2 .. +3/2)");
        if (s.size() != 2) throw ConfigError("stark.s_shift needs two entries (m = -1/2, +1/2)");
        return StarkScheme::custom({p[0], p[1], p[2], p[3]}, {s[0], s[1]});
    }
    const double d = cfg.number("stark.delta_bar", -1.0);
    const double D = cfg.number("stark.Delta_bar", default_Delta);
    return StarkScheme::make(kind, d, D);
}

Species species_from_config(const ConfigView& cfg, const std::string& default_name) {
    const std::string name = cfg.text("species.name", default_name);
    Species s;
    if (name == "Na23" || name == "Na" || name == "sodium")
        s = Species::sodium();
    else if (name == "K39" || name == "K" || name == "potassium")
        s = Species::potassium();
    else
        s.name = name;
    s.mass_amu = cfg.number("species.mass_amu", s.mass_amu);
    s.R0_m = cfg.number("species.R0_m", s.R0_m);
    s.delta_over_2pi_Hz = cfg.number("species.delta_over_2pi_Hz", s.delta_over_2pi_Hz);
    if (!(s.mass_amu > 0.0) || !(s.R0_m > 0.0) || !(s.delta_over_2pi_Hz > 0.0))
        throw ConfigError("species '" + name + "' needs positive mass_amu, R0_m and delta_over_2pi_Hz");
    return s;
}

double mass_from_config(const ConfigView& cfg, const Species& species) {
    if (cfg.has("mass")) {
        const double m = cfg.number("mass");
        if (!(m > 0.0)) throw ConfigError("mass must be positive");
        return m;
    }
    return mass_parameter(species);
}

json scheme_to_json(const StarkScheme& s) {
    return {{"kind", to_string(s.kind)},
            {"delta_bar", s.delta_bar},
            {"Delta_bar", s.Delta_bar},
            {"p_shift", s.p_shift},
            {"s_shift", s.s_shift}};
}

json units_block(const Species& species, double mass) {
    const double delta = 2.0 * M_PI * species.delta_over_2pi_Hz;
    return {{"length", "R0"},
            {"energy", "hbar |delta|"},
            {"time", "1/|delta|"},
            {"species", species.name},
            {"R0_m", species.R0_m},
            {"delta_over_2pi_Hz", species.delta_over_2pi_Hz},
            {"time_unit_s", 1.0 / delta},
            {"velocity_unit_m_per_s", species.R0_m * delta},
            {"mass_parameter", mass}};
}

std::string provenance_header(const json& config, const json& units) {
    return "# version: " + version_string() + "\n# config: " + config.dump() + "\n# units: " + units.dump() + "\n";
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns, const json& config,
                     const json& units)
    : out_(path), ncols_(columns.size()) {
    if (!out_) throw std::runtime_error("cannot write " + path);
    out_ << provenance_header(config, units);
    for (size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != ncols_) throw std::logic_error("CSV row width mismatch");
    for (size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
    out_ << '\n';
}

void CsvWriter::close() { out_.close(); }

void write_json(const std::string& path, const json& payload, const json& config, const json& units) {
    json doc = payload;
    doc["version"] = version_string();
    doc["config"] = config;
    doc["units"] = units;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << doc.dump(2) << '\n';
}

}  // namespace rydgauge
