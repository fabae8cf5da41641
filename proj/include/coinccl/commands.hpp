#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "coinccl/config.hpp"

namespace coinccl {

/// input overrides for the analyze command
struct AnalyzeOptions {
  std::string electrons_file; // default <output_dir>/electrons.bin
  std::string photons_file;   // default <output_dir>/photons.bin
  std::string truth_file;     // default <output_dir>/truth.jsonl if present
  std::optional<std::uint64_t> eftem_count;
  bool strict = false; // promote an empty-signal result to exit code 1
};

int cmd_physics_map(const RunConfig& cfg);
int cmd_lad(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg, bool also_csv);
int cmd_analyze(const RunConfig& cfg, const AnalyzeOptions& opts);

/// argv entry point shared by the coinccl binary and the test suite
int cli_main(int argc, const char* const* argv);

} // namespace coinccl
