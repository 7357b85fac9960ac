#pragma once

#include "rydgauge/io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rydgauge {

struct CommandContext {
    json config = json::object();
    std::string out_dir = ".";
    int threads = 1;
    std::optional<std::uint64_t> seed;
};

// Each command writes its files into ctx.out_dir and returns the JSON summary it also writes.
json cmd_potentials(const CommandContext& ctx);
json cmd_fields(const CommandContext& ctx);
json cmd_chern(const CommandContext& ctx);
json cmd_deflect(const CommandContext& ctx);
json cmd_beamsplit(const CommandContext& ctx);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

std::vector<CheckResult> run_selftest(int threads = 1);
json cmd_selftest(const CommandContext& ctx, bool* all_passed);

}  // namespace rydgauge
