#include "livediag/lang/document.hpp"

namespace livediag {

std::string applyEditsToText(const std::string& text, const std::vector<TextEdit>& edits) {
    for (std::size_t i = 0; i < edits.size(); ++i) {
        const Span& span = edits[i].span;
        if (span.start > span.end || span.end > text.size()) {
            throw EditConflict("edit " + std::to_string(i) + " exceeds document bounds");
        }
        if (i > 0) {
            const Span& prev = edits[i - 1].span;
            // two insertions at the same offset are ambiguous, as is any overlap
            if (span.start < prev.end || (span.start == prev.start && prev.length() == 0 && span.length() == 0)) {
                throw EditConflict("edits " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                   " overlap or are not sorted");
            }
        }
    }
    std::string result = text;
    for (auto it = edits.rbegin(); it != edits.rend(); ++it) {
        result.replace(it->span.start, it->span.length(), it->newText);
    }
    return result;
}

SourceDocument applyEdits(const SourceDocument& doc, const std::vector<TextEdit>& edits) {
    SourceDocument result{doc.uri, applyEditsToText(doc.text, edits), doc.version + 1};
    return result;
}

}  // namespace livediag
