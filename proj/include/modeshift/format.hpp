#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace modeshift {

// Shortest round-trip decimal representation, locale independent. Keeps CSV
// output byte-stable across runs.
std::string format_double(double value);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace modeshift
