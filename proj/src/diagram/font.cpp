#include "livediag/diagram/font.hpp"

#include <algorithm>
#include <charconv>

#include "json.hpp"

namespace livediag::diagram {

namespace detail {
extern const std::string_view kBundledSansJson;
}

double FontMetrics::advance(char32_t codepoint) const {
    auto it = advanceWidths.find(codepoint);
    return it == advanceWidths.end() ? fallbackAdvance : it->second;
}

std::u32string decodeUtf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        auto byte = static_cast<unsigned char>(text[i]);
        char32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (byte < 0x80) {
            cp = byte;
        } else if ((byte & 0xE0) == 0xC0) {
            len = 2;
            cp = byte & 0x1F;
        } else if ((byte & 0xF0) == 0xE0) {
            len = 3;
            cp = byte & 0x0F;
        } else if ((byte & 0xF8) == 0xF0) {
            len = 4;
            cp = byte & 0x07;
        }
        if (len > 1) {
            if (i + len > text.size()) {
                out.push_back(0xFFFD);
                break;
            }
            for (std::size_t k = 1; k < len; ++k) {
                cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
            }
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

double lineHeight(const FontMetrics& font, double fontSize) {
    return (font.ascent - font.descent) * fontSize / font.unitsPerEm * kLineSpacing;
}

TextSize measureText(std::string_view text, const FontMetrics& font, double fontSize) {
    double widest = 0;
    double current = 0;
    int lines = 1;
    for (char32_t cp : decodeUtf8(text)) {
        if (cp == U'\n') {
            widest = std::max(widest, current);
            current = 0;
            ++lines;
            continue;
        }
        current += font.advance(cp);
    }
    widest = std::max(widest, current);
    return TextSize{widest * fontSize / font.unitsPerEm, lines * lineHeight(font, fontSize)};
}

FontMetrics parseFontMetrics(std::string_view json) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
        throw FontFormatError(std::string("font metrics are not valid JSON: ") + e.what());
    }
    try {
        if (doc.value("version", kFontMetricsFormatVersion) != kFontMetricsFormatVersion) {
            throw FontFormatError("unsupported font metrics version");
        }
        FontMetrics font;
        font.family = doc.at("family").get<std::string>();
        font.unitsPerEm = doc.at("unitsPerEm").get<double>();
        font.ascent = doc.at("ascent").get<double>();
        font.descent = doc.at("descent").get<double>();
        font.fallbackAdvance = doc.value("fallbackAdvance", font.unitsPerEm / 2);
        if (font.unitsPerEm <= 0) {
            throw FontFormatError("unitsPerEm must be positive");
        }
        for (const auto& [key, value] : doc.at("advances").items()) {
            unsigned long cp = 0;
            auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), cp);
            if (ec != std::errc() || ptr != key.data() + key.size() || cp > 0x10FFFF) {
                throw FontFormatError("invalid codepoint key '" + key + "'");
            }
            font.advanceWidths[static_cast<char32_t>(cp)] = value.get<double>();
        }
        return font;
    } catch (const nlohmann::json::exception& e) {
        throw FontFormatError(std::string("malformed font metrics: ") + e.what());
    }
}

const FontMetrics& defaultFont() {
    static const FontMetrics font = parseFontMetrics(detail::kBundledSansJson);
    return font;
}

const FontMetrics& selectFont(const std::vector<FontMetrics>& fonts, std::string_view family) {
    if (fonts.empty()) {
        throw UnknownFont("no font available for family '" + std::string(family) + "'");
    }
    for (const auto& font : fonts) {
        if (font.family == family) {
            return font;
        }
    }
    return fonts.front();
}

}  // namespace livediag::diagram
