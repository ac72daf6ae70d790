#include "livediag/server/protocol.hpp"

#include <cmath>
#include <limits>

#include "livediag/render/render.hpp"

namespace livediag::server {

namespace {

ProtocolError invalid(const std::string& message) {
    return ProtocolError("InvalidParams", message);
}

double numberField(const Json& object, const char* name) {
    auto it = object.find(name);
    if (it == object.end() || it->is_null()) {
        return 0;
    }
    if (!it->is_number()) {
        throw invalid(std::string("'") + name + "' must be a number");
    }
    double v = it->get<double>();
    if (!std::isfinite(v)) {
        throw invalid(std::string("'") + name + "' must be finite");
    }
    return v;
}

std::size_t offsetField(const Json& object, const char* name) {
    const Json& v = requireField(object, name);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw invalid(std::string("'") + name + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

}  // namespace

Json toJson(const Span& span) {
    return {{"start", span.start}, {"end", span.end}};
}

Json toJson(const Diagnostic& d) {
    return {{"severity", toString(d.severity)}, {"code", d.code}, {"message", d.message}, {"span", toJson(d.span)}};
}

Json toJson(const Diagnostics& diagnostics) {
    Json items = Json::array();
    for (const auto& d : diagnostics) {
        items.push_back(toJson(d));
    }
    return items;
}

Json toJson(const TextEdit& edit) {
    return {{"span", toJson(edit.span)}, {"newText", edit.newText}};
}

Json toJson(const std::vector<TextEdit>& edits) {
    Json items = Json::array();
    for (const auto& e : edits) {
        items.push_back(toJson(e));
    }
    return items;
}

Json toJson(const edit::PredictionDelta& delta) {
    Json moved = Json::array();
    for (const auto& m : delta.moved) {
        moved.push_back({{"id", m.id}, {"dx", m.dx}, {"dy", m.dy}, {"dWidth", m.dWidth}, {"dHeight", m.dHeight}});
    }
    Json rerouted = Json::array();
    for (const auto& r : delta.rerouted) {
        rerouted.push_back(render::toRenderModel(r));
    }
    return {{"moved", std::move(moved)}, {"rerouted", std::move(rerouted)}, {"structural", delta.structural}};
}

const Json& requireField(const Json& object, const char* name) {
    if (!object.is_object()) {
        throw invalid("params must be an object");
    }
    auto it = object.find(name);
    if (it == object.end()) {
        throw invalid(std::string("missing '") + name + "'");
    }
    return *it;
}

std::string requireString(const Json& object, const char* name) {
    const Json& v = requireField(object, name);
    if (!v.is_string()) {
        throw invalid(std::string("'") + name + "' must be a string");
    }
    return v.get<std::string>();
}

std::int64_t requireInteger(const Json& object, const char* name) {
    const Json& v = requireField(object, name);
    if (!v.is_number_integer()) {
        throw invalid(std::string("'") + name + "' must be an integer");
    }
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > std::uint64_t(std::numeric_limits<std::int64_t>::max())) {
        throw invalid(std::string("'") + name + "' is out of range");
    }
    return v.get<std::int64_t>();
}

std::optional<std::string> optionalString(const Json& object, const char* name) {
    if (!object.is_object() || !object.contains(name) || object[name].is_null()) {
        return std::nullopt;
    }
    return requireString(object, name);
}

Span spanFromJson(const Json& json) {
    if (!json.is_object()) {
        throw invalid("span must be an object {start, end}");
    }
    Span span{offsetField(json, "start"), offsetField(json, "end")};
    if (span.end < span.start) {
        throw invalid("span end lies before its start");
    }
    return span;
}

TextEdit textEditFromJson(const Json& json) {
    if (!json.is_object()) {
        throw invalid("edit must be an object {span, newText}");
    }
    return TextEdit{spanFromJson(requireField(json, "span")), requireString(json, "newText")};
}

std::vector<TextEdit> textEditsFromJson(const Json& json) {
    if (!json.is_array()) {
        throw invalid("'edits' must be an array");
    }
    std::vector<TextEdit> edits;
    for (const auto& e : json) {
        edits.push_back(textEditFromJson(e));
    }
    return edits;
}

edit::PredictionDelta deltaFromJson(const Json& json) {
    edit::PredictionDelta delta;
    if (!json.is_object()) {
        throw invalid("delta must be an object");
    }
    for (const auto& m : requireField(json, "moved")) {
        delta.moved.push_back(edit::ElementDelta{requireString(m, "id"), numberField(m, "dx"), numberField(m, "dy"),
                                                 numberField(m, "dWidth"), numberField(m, "dHeight")});
    }
    for (const auto& r : requireField(json, "rerouted")) {
        try {
            delta.rerouted.push_back(render::elementFromRenderModel(r));
        } catch (const render::RenderModelError& e) {
            throw invalid(e.what());
        }
    }
    const Json& structural = requireField(json, "structural");
    if (!structural.is_boolean()) {
        throw invalid("'structural' must be a boolean");
    }
    delta.structural = structural.get<bool>();
    return delta;
}

edit::InteractionParams interactionParamsFromJson(const Json& json, edit::InteractionKind kind) {
    if (!json.is_object()) {
        throw invalid("interaction params must be an object");
    }
    edit::InteractionParams params;
    params.kind = kind;
    if (auto name = optionalString(json, "kind")) {
        auto parsed = edit::interactionKindFromString(*name);
        if (!parsed) {
            throw invalid("unknown interaction kind '" + *name + "'");
        }
        params.kind = *parsed;
    }
    params.dx = numberField(json, "dx");
    params.dy = numberField(json, "dy");
    params.dWidth = numberField(json, "dWidth");
    params.dHeight = numberField(json, "dHeight");
    params.dParam = numberField(json, "dParam");
    return params;
}

Json makeResponse(const Json& id, Json result) {
    return {{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}};
}

Json makeError(const Json& id, const std::string& code, const std::string& message, const Json& data) {
    Json error = {{"code", code}, {"message", message}};
    if (!data.is_null()) {
        error["data"] = data;
    }
    return {{"jsonrpc", "2.0"}, {"id", id}, {"error", std::move(error)}};
}

Json makeNotification(const std::string& method, Json params) {
    return {{"jsonrpc", "2.0"}, {"method", method}, {"params", std::move(params)}};
}

}  // namespace livediag::server
