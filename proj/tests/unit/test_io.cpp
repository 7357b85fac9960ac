#include "rydgauge/io.hpp"

#include "rydgauge/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace rydgauge;

TEST_CASE("key-value configs nest dotted keys and sections") {
    const json j = parse_key_value(R"(
# comment
stark.Delta_bar = -3   # trailing comment
species.name = K39
[deflect]
report_times = [238, 483]
with_lorentz = false
label = "a # b"
)");
    CHECK(j["stark"]["Delta_bar"] == -3);
    CHECK(j["species"]["name"] == "K39");
    CHECK(j["deflect"]["report_times"].size() == 2);
    CHECK(j["deflect"]["with_lorentz"] == false);
    CHECK(j["deflect"]["label"] == "a # b");
}

TEST_CASE("key-value parser errors") {
    CHECK_THROWS_AS(parse_key_value("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_key_value("novalue\n"), ConfigError);
    CHECK_THROWS_AS(parse_key_value("[open\n"), ConfigError);
    CHECK_THROWS_AS(parse_key_value("a = 1\na.b = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("{ \"a\": }"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.cfg"), ConfigError);
}

TEST_CASE("JSON and key-value encodings of the same config agree") {
    const json a = parse_config_text("{\"chern\": {\"radius\": 0.1, \"n_phi\": 120}}");
    const json b = parse_config_text("[chern]\nradius = 0.1\nn_phi = 120\n");
    CHECK(a == b);
}

TEST_CASE("typed lookups") {
    const json j = parse_key_value("x = 1.5\nn = 3\nflag = true\nname = abc\nlist = [1, 2]\n");
    const ConfigView v(j);
    CHECK(v.number("x", 0.0) == 1.5);
    CHECK(v.number("missing", 7.0) == 7.0);
    CHECK(v.integer("n", 0) == 3);
    CHECK(v.boolean("flag", false));
    CHECK(v.text("name", "") == "abc");
    CHECK(v.numbers("list", {}).size() == 2);
    CHECK_THROWS_AS(v.integer("x", 0), ConfigError);
    CHECK_THROWS_AS(v.number("name", 0.0), ConfigError);
    CHECK_THROWS_AS(v.number("missing"), ConfigError);
    CHECK_THROWS_AS(v.boolean("n", false), ConfigError);
}

TEST_CASE("scheme and species from config") {
    const json j = parse_key_value("stark.kind = stretched\nstark.Delta_bar = -1.5\nspecies.name = K\n");
    const ConfigView v(j);
    const StarkScheme s = scheme_from_config(v, -3.0);
    CHECK(s.kind == StarkKind::Stretched);
    CHECK(s.Delta_bar == -1.5);
    CHECK(species_from_config(v, "Na23").name == "K39");
    CHECK(mass_from_config(v, species_from_config(v, "Na23")) == doctest::Approx(mass_parameter(Species::potassium())));

    const json c = parse_key_value("stark.kind = custom\nstark.p_shift = [0, -1, -2, 0]\n");
    const StarkScheme cs = scheme_from_config(ConfigView(c), -3.0);
    CHECK(cs.p_shift[2] == -2.0);
    CHECK_THROWS_AS(scheme_from_config(ConfigView(parse_key_value("stark.kind = custom\n")), -3.0), ConfigError);
    CHECK_THROWS_AS(species_from_config(ConfigView(parse_key_value("species.name = Rb\n")), "Na23"), ConfigError);
    CHECK_THROWS_AS(mass_from_config(ConfigView(parse_key_value("mass = -1\n")), Species::sodium()), ConfigError);
}

TEST_CASE("CSV output carries the provenance header") {
    const auto path = std::filesystem::temp_directory_path() / "rydgauge_io_test.csv";
    const json cfg = {{"a", 1}};
    const json units = units_block(Species::sodium(), 24948.5);
    {
        CsvWriter w(path.string(), {"t", "y"}, cfg, units);
        w.row({0.5, 1.0 / 3.0});
        CHECK_THROWS(w.row({1.0}));
    }
    std::ifstream in(path);
    std::string l1, l2, l3, l4, l5;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    std::getline(in, l4);
    std::getline(in, l5);
    CHECK(l1 == "# version: " + version_string());
    CHECK(l2 == "# config: {\"a\":1}");
    CHECK(l3.rfind("# units: ", 0) == 0);
    CHECK(l4 == "t,y");
    CHECK(l5 == "0.5,0.333333333333333");
    CHECK(units["time_unit_s"].get<double>() == doctest::Approx(1.0 / (2.0 * M_PI * 39.0e6)));
}
