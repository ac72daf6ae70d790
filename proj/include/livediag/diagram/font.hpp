#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace livediag::diagram {

/// Advance-width table for one font family, in font units.
struct FontMetrics {
    std::string family;
    double unitsPerEm = 1000;
    double ascent = 800;
    double descent = -200;  // negative below the baseline
    double fallbackAdvance = 500;
    std::map<char32_t, double> advanceWidths;

    double advance(char32_t codepoint) const;
};

class UnknownFont : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FontFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kLineSpacing = 1.2;
inline constexpr int kFontMetricsFormatVersion = 1;

struct TextSize {
    double width = 0;
    double height = 0;
};

/// width = max over '\n'-separated lines of sum(advance) * size / unitsPerEm;
/// height = lines * (ascent - descent) * size / unitsPerEm * kLineSpacing.
TextSize measureText(std::string_view text, const FontMetrics& font, double fontSize);

/// Height of one line of text.
double lineHeight(const FontMetrics& font, double fontSize);

/// Parses the metrics JSON format:
/// {"version": 1, "family", "unitsPerEm", "ascent", "descent", "fallbackAdvance"?,
///  "advances": {"<decimal codepoint>": advance}}
FontMetrics parseFontMetrics(std::string_view json);

/// The bundled sans-serif family ("sans").
const FontMetrics& defaultFont();

/// Looks `family` up in `fonts`; falls back to the first entry when `family`
/// is unknown. Throws UnknownFont when `fonts` is empty.
const FontMetrics& selectFont(const std::vector<FontMetrics>& fonts, std::string_view family);

std::u32string decodeUtf8(std::string_view text);

}  // namespace livediag::diagram
