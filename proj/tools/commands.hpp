#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "config.hpp"

namespace berman::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitMath = 3;

struct RunContext {
  json config;
  std::string config_hash;
  std::optional<std::uint64_t> seed_override;
  unsigned workers = 0;  // 0 defers to $BERMAN_SCALE_WORKERS, then hardware
  std::filesystem::path out_dir = ".";
  bool plot = false;
};

/// Each command writes <out>/<name>.csv (plus extra CSVs and an SVG when
/// plotting) and returns kExitOk; failures propagate as exceptions.
int cmd_bound(const RunContext& ctx, std::ostream& log);
int cmd_delta(const RunContext& ctx, std::ostream& log);
int cmd_limit(const RunContext& ctx, std::ostream& log);
int cmd_theta(const RunContext& ctx, std::ostream& log);
int cmd_check_conditions(const RunContext& ctx, std::ostream& log);

/// Full command line including argv[0]. Maps ConfigError and usage errors to
/// 2 and mathematical-domain failures to 3.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace berman::cli
