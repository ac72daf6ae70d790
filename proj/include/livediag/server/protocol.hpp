#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "livediag/edit/edit.hpp"
#include "livediag/lang/document.hpp"

namespace livediag::server {

using Json = nlohmann::json;

inline constexpr int kProtocolVersion = 1;

/// Error answered to a request: {"code": "<name>", "message": ..., "data"?}.
class ProtocolError : public std::runtime_error {
public:
    ProtocolError(std::string code, const std::string& message, Json data = nullptr)
        : std::runtime_error(message), code_(std::move(code)), data_(std::move(data)) {}

    const std::string& code() const { return code_; }
    const Json& data() const { return data_; }

private:
    std::string code_;
    Json data_;
};

Json toJson(const Span& span);
Json toJson(const Diagnostic& diagnostic);
Json toJson(const Diagnostics& diagnostics);
Json toJson(const TextEdit& edit);
Json toJson(const std::vector<TextEdit>& edits);
Json toJson(const edit::PredictionDelta& delta);

// Readers throw ProtocolError InvalidParams naming the offending field.
Span spanFromJson(const Json& json);
TextEdit textEditFromJson(const Json& json);
std::vector<TextEdit> textEditsFromJson(const Json& json);
edit::PredictionDelta deltaFromJson(const Json& json);
/// {"kind"?, "dx"?, "dy"?, "dWidth"?, "dHeight"?, "dParam"?}; missing numbers are 0.
edit::InteractionParams interactionParamsFromJson(const Json& json, edit::InteractionKind kind);

const Json& requireField(const Json& object, const char* name);
std::string requireString(const Json& object, const char* name);
std::int64_t requireInteger(const Json& object, const char* name);
std::optional<std::string> optionalString(const Json& object, const char* name);

Json makeResponse(const Json& id, Json result);
Json makeError(const Json& id, const std::string& code, const std::string& message, const Json& data = nullptr);
Json makeNotification(const std::string& method, Json params);

}  // namespace livediag::server
