#include "rydgauge/commands.hpp"
#include "rydgauge/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace rydgauge;

namespace {

enum Exit { Ok = 0, ConfigFailure = 2, NumericalFailure = 3, SelftestFailure = 4 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gauge fields in Rydberg pair dynamics"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    int threads = 1;
    std::uint64_t seed = 0;
    bool oracle = false;
    std::vector<CLI::App*> subs;
    for (const char* name : {"potentials", "fields", "chern", "deflect", "beamsplit", "selftest"}) {
        CLI::App* s = app.add_subcommand(name);
        s->add_option("--config", config_path, "config file (key = value or JSON)");
        s->add_option("--out", out_dir, "output directory");
        s->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        s->add_option("--seed", seed, "random seed");
        subs.push_back(s);
    }
    subs[4]->add_flag("--oracle", oracle, "also run the full 16-component propagation");
    subs[0]->description("adiabatic potential cuts and surfaces");
    subs[1]->description("Berry curvature map and non-Abelian connection profiles");
    subs[2]->description("Chern numbers on spheres around the located degeneracies");
    subs[3]->description("mirrored deflection trajectories and optional thermal scan");
    subs[4]->description("two-band wavepacket beamsplitter");
    subs[5]->description("fast invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Ok : ConfigFailure;
    }

    try {
        CommandContext ctx;
        if (!config_path.empty()) ctx.config = load_config(config_path);
        ctx.out_dir = out_dir;
        ctx.threads = threads;
        if (app.got_subcommand("beamsplit") && oracle) ctx.config["beamsplit"]["oracle"] = true;
        for (auto* s : subs)
            if (s->parsed() && s->count("--seed")) ctx.seed = seed;

        json summary;
        if (app.got_subcommand("potentials"))
            summary = cmd_potentials(ctx);
        else if (app.got_subcommand("fields"))
            summary = cmd_fields(ctx);
        else if (app.got_subcommand("chern"))
            summary = cmd_chern(ctx);
        else if (app.got_subcommand("deflect"))
            summary = cmd_deflect(ctx);
        else if (app.got_subcommand("beamsplit"))
            summary = cmd_beamsplit(ctx);
        else {
            bool ok = false;
            summary = cmd_selftest(ctx, &ok);
            for (const auto& c : summary["checks"])
                std::cout << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << ": "
                          << c["detail"].get<std::string>() << '\n';
            return ok ? Ok : SelftestFailure;
        }
        std::cout << summary.dump(2) << '\n';
        return Ok;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ConfigFailure;
    } catch (const NumericalError& e) {
        std::cerr << "numerical contract violated: " << e.what() << '\n';
        return NumericalFailure;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ConfigFailure;
    }
}
