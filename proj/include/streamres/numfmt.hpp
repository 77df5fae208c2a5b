#pragma once

#include <array>
#include <charconv>
#include <string>

namespace streamres {

// Shortest text that parses back to the same double.
inline std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

// Shortest round-trip text in plain positional notation (no exponent).
inline std::string format_fixed(double value) {
    std::array<char, 400> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                   std::chars_format::fixed);
    return std::string(buf.data(), end);
}

}  // namespace streamres
