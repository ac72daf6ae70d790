#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "livediag/lang/span.hpp"

namespace livediag {

struct SourceDocument {
    std::string uri;
    std::string text;
    std::int64_t version = 0;

    friend bool operator==(const SourceDocument&, const SourceDocument&) = default;
};

struct TextEdit {
    Span span;
    std::string newText;

    friend bool operator==(const TextEdit&, const TextEdit&) = default;
};

class EditConflict : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Applies a batch of disjoint, ascending edits. The result carries
/// `doc.version + 1` even for an empty batch.
/// Throws EditConflict on overlap, misordering or out-of-bounds spans.
SourceDocument applyEdits(const SourceDocument& doc, const std::vector<TextEdit>& edits);

/// Text-only variant of applyEdits.
std::string applyEditsToText(const std::string& text, const std::vector<TextEdit>& edits);

}  // namespace livediag
