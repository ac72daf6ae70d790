#include "livediag/lang/number_format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace livediag {

std::string formatNumber(double value) {
    if (!std::isfinite(value)) {
        return "0";
    }
    // 309 integer digits + sign + point + 3 fraction digits
    std::array<char, 320> buffer{};
    auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value, std::chars_format::fixed, 3);
    if (ec != std::errc()) {
        return "0";
    }
    std::string text(buffer.data(), end);
    while (text.back() == '0') {
        text.pop_back();
    }
    if (text.back() == '.') {
        text.pop_back();
    }
    if (text == "-0") {
        text = "0";
    }
    return text;
}

double canonicalValue(double value) {
    std::string text = formatNumber(value);
    double result = 0;
    std::from_chars(text.data(), text.data() + text.size(), result);
    return result;
}

std::string formatLiteral(double value) {
    if (!std::isfinite(value) || canonicalValue(value) == value) {
        return formatNumber(value);
    }
    // shortest fixed text of the smallest subnormal has ~330 characters
    std::array<char, 1100> buffer{};
    auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value, std::chars_format::fixed);
    if (ec != std::errc()) {
        return formatNumber(value);
    }
    return std::string(buffer.data(), end);
}

}  // namespace livediag
