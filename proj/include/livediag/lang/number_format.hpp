#pragma once

#include <string>

namespace livediag {

/// Canonical number text used for generated source edits and SVG output:
/// fixed notation rounded to at most three fractional digits, trailing zeros
/// removed, and `-0` written as `0`.
std::string formatNumber(double value);

/// Value obtained by formatting and reading back, i.e. what a freshly parsed
/// literal produced by formatNumber would evaluate to.
double canonicalValue(double value);

/// Number literal text that parses back to exactly `value`: formatNumber when
/// that is exact, otherwise the shortest exact fixed notation.
std::string formatLiteral(double value);

}  // namespace livediag
