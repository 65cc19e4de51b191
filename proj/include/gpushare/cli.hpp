// Command-line front end. Exit codes: 0 success, 2 invalid input (usage,
// parse or validation errors), 3 runtime failure.
#pragma once

#include <ostream>

#include "gpushare/core.hpp"
#include "gpushare/scheduler.hpp"

namespace gpushare {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitRuntime = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs one scheduling round from a snapshot document (GPU states, online
/// and offline workloads, optional tables and config).
Assignment schedule_snapshot(const Json& snapshot);

}  // namespace gpushare
