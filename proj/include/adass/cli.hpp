#pragma once

namespace adass {

inline constexpr const char* kVersion = "0.1.0";

/// Entry point of the `adass` command. Returns 0 on success, 1 on a
/// numerical or estimation failure, 2 on bad input or flags.
int run_cli(int argc, const char* const* argv);

}  // namespace adass
