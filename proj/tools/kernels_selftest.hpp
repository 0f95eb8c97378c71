#pragma once

#include <cstdint>

namespace party::tools {

/// Runs the kernel property suite, printing one pass/fail line per property.
/// Returns the number of failed properties.
int run_kernels_selftest(std::uint64_t seed);

} // namespace party::tools
