#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

namespace livediag {

/// Half-open byte range [start, end) into a source text.
struct Span {
    std::size_t start = 0;
    std::size_t end = 0;

    constexpr std::size_t length() const { return end - start; }
    constexpr bool contains(std::size_t offset) const { return offset >= start && offset < end; }
    constexpr bool covers(const Span& other) const { return start <= other.start && other.end <= end; }

    friend constexpr bool operator==(const Span&, const Span&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Span& span) {
    return os << span.start << ".." << span.end;
}

enum class Severity { Error, Warning, Info };

inline const char* toString(Severity severity) {
    switch (severity) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Info: return "info";
    }
    return "error";
}

/// A message attached to a source range. `code` is a stable machine name
/// (e.g. "ParseError", "DuplicateName") that tests and clients can match on.
struct Diagnostic {
    Severity severity = Severity::Error;
    Span span;
    std::string code;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

using Diagnostics = std::vector<Diagnostic>;

inline bool hasErrors(const Diagnostics& diagnostics) {
    for (const auto& d : diagnostics) {
        if (d.severity == Severity::Error) {
            return true;
        }
    }
    return false;
}

}  // namespace livediag
