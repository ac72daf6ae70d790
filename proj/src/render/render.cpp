#include "livediag/render/render.hpp"

#include <cmath>
#include <set>

#include "livediag/lang/number_format.hpp"

namespace livediag::render {

using diagram::AttributeMap;
using diagram::AttrValue;
using diagram::ElementKind;
using diagram::RouteStep;
using layout::LayoutedDiagram;
using layout::LayoutedElement;
using layout::Point;
using nlohmann::json;

namespace {

constexpr double kMarkerWidth = 8;

std::string num(double v) { return formatNumber(v); }

std::string escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string attrString(const AttributeMap& attrs, const std::string& name, const std::string& fallback = "") {
    auto it = attrs.find(name);
    if (it == attrs.end()) {
        return fallback;
    }
    if (const auto* s = std::get_if<std::string>(&it->second)) {
        return *s;
    }
    if (const auto* d = std::get_if<double>(&it->second)) {
        return num(*d);
    }
    return std::get<bool>(it->second) ? "true" : "false";
}

std::string pointList(const std::vector<Point>& points) {
    std::string out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i) {
            out += ' ';
        }
        out += num(points[i].x) + "," + num(points[i].y);
    }
    return out;
}

std::string segmentPath(const LayoutedElement& seg) {
    const auto& p = seg.points;
    if (p.empty()) {
        return "";
    }
    std::string d = "M " + num(p[0].x) + " " + num(p[0].y);
    if (seg.segmentMode == RouteStep::Mode::Bezier && p.size() == 4) {
        d += " C " + num(p[1].x) + " " + num(p[1].y) + " " + num(p[2].x) + " " + num(p[2].y) + " " + num(p[3].x) +
             " " + num(p[3].y);
    } else {
        for (std::size_t i = 1; i < p.size(); ++i) {
            d += " L " + num(p[i].x) + " " + num(p[i].y);
        }
    }
    return d;
}

std::string strokeAttributes(const AttributeMap& attrs) {
    std::string out = " stroke=\"" + escape(attrString(attrs, "stroke", "#000000")) + "\"";
    out += " stroke-width=\"" + escape(attrString(attrs, "strokeWidth", "1")) + "\"";
    auto dash = attrString(attrs, "strokeDash");
    if (!dash.empty() && dash != "none") {
        out += " stroke-dasharray=\"" + escape(dash) + "\"";
    }
    return out;
}

// The bundled "sans" metrics are Helvetica's; name fonts with those metrics.
std::string svgFontFamily(const std::string& family) {
    return family == "sans" ? "Helvetica, Arial, sans-serif" : family;
}

class SvgWriter {
public:
    std::string out;

    void element(const LayoutedElement& e, const AttributeMap* connectionAttrs, int depth) {
        std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
        out += pad + "<g data-id=\"" + escape(e.id) + "\" data-kind=\"" + diagram::toString(e.kind) + "\"";
        if (auto it = e.attributes.find("opacity"); it != e.attributes.end()) {
            out += " opacity=\"" + escape(attrString(e.attributes, "opacity")) + "\"";
        }
        out += ">\n";
        std::string inner = pad + "  ";
        const auto& r = e.box;
        switch (e.kind) {
        case ElementKind::Rect:
            out += inner + "<rect x=\"" + num(r.x) + "\" y=\"" + num(r.y) + "\" width=\"" + num(r.width) +
                   "\" height=\"" + num(r.height) + "\" fill=\"" + escape(attrString(e.attributes, "fill", "none")) +
                   "\"" + strokeAttributes(e.attributes) + "/>\n";
            break;
        case ElementKind::Ellipse:
            out += inner + "<ellipse cx=\"" + num(r.x + r.width / 2) + "\" cy=\"" + num(r.y + r.height / 2) +
                   "\" rx=\"" + num(r.width / 2) + "\" ry=\"" + num(r.height / 2) + "\" fill=\"" +
                   escape(attrString(e.attributes, "fill", "none")) + "\"" + strokeAttributes(e.attributes) + "/>\n";
            break;
        case ElementKind::Path:
            out += inner + "<path d=\"M " + num(r.x) + " " + num(r.y) + " H " + num(r.right()) + " V " +
                   num(r.bottom()) + " H " + num(r.x) + " Z\" fill=\"" +
                   escape(attrString(e.attributes, "fill", "none")) + "\"" + strokeAttributes(e.attributes) + "/>\n";
            break;
        case ElementKind::Text:
            text(e, inner);
            break;
        case ElementKind::Canvas: {
            auto fill = attrString(e.attributes, "fill", "none");
            if (fill != "none") {
                out += inner + "<rect x=\"" + num(r.x) + "\" y=\"" + num(r.y) + "\" width=\"" + num(r.width) +
                       "\" height=\"" + num(r.height) + "\" fill=\"" + escape(fill) + "\"/>\n";
            }
            break;
        }
        case ElementKind::ConnectionSegment:
            out += inner + "<path d=\"" + segmentPath(e) + "\" fill=\"none\"" +
                   strokeAttributes(connectionAttrs ? *connectionAttrs : e.attributes) + "/>\n";
            break;
        default:
            break;
        }
        for (const auto& child : e.children) {
            element(child, e.kind == ElementKind::CanvasConnection ? &e.attributes : connectionAttrs, depth + 1);
        }
        if (e.kind == ElementKind::CanvasConnection) {
            markers(e, inner);
        }
        out += pad + "</g>\n";
    }

private:
    void text(const LayoutedElement& e, const std::string& pad) {
        std::string style = " font-family=\"" + escape(svgFontFamily(attrString(e.attributes, "fontFamily", "sans"))) +
                            "\" font-size=\"" + escape(attrString(e.attributes, "fontSize", "14")) + "\" fill=\"" +
                            escape(attrString(e.attributes, "color", "#000000")) + "\"";
        auto weight = attrString(e.attributes, "fontWeight", "normal");
        if (weight != "normal") {
            style += " font-weight=\"" + escape(weight) + "\"";
        }
        auto fontStyle = attrString(e.attributes, "fontStyle", "normal");
        if (fontStyle != "normal") {
            style += " font-style=\"" + escape(fontStyle) + "\"";
        }
        double x = e.box.x;
        double y = e.box.y + e.baseline;
        if (e.lines.size() <= 1) {
            out += pad + "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\"" + style + " xml:space=\"preserve\">" +
                   escape(e.lines.empty() ? "" : e.lines[0]) + "</text>\n";
            return;
        }
        out += pad + "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\"" + style + " xml:space=\"preserve\">";
        for (std::size_t i = 0; i < e.lines.size(); ++i) {
            out += "<tspan x=\"" + num(x) + "\" y=\"" + num(y + static_cast<double>(i) * e.lineHeight) + "\">" +
                   escape(e.lines[i]) + "</tspan>";
        }
        out += "</text>\n";
    }

    void markers(const LayoutedElement& connection, const std::string& pad) {
        std::vector<const LayoutedElement*> segments;
        for (const auto& child : connection.children) {
            if (child.kind == ElementKind::ConnectionSegment && child.points.size() >= 2) {
                segments.push_back(&child);
            }
        }
        if (segments.empty()) {
            return;
        }
        auto toSegment = [](const LayoutedElement& e) { return layout::RoutedSegment{e.segmentMode, e.points}; };
        auto draw = [&](const std::string& marker, Point tip, Point direction) {
            MarkerShape shape = markerShape(marker, tip, direction);
            std::string stroke = escape(attrString(connection.attributes, "stroke", "#000000"));
            std::string width = escape(attrString(connection.attributes, "strokeWidth", "1"));
            for (const auto& line : shape.strokes) {
                out += pad + "<polyline points=\"" + pointList(line) + "\" fill=\"none\" stroke=\"" + stroke +
                       "\" stroke-width=\"" + width + "\"/>\n";
            }
            if (!shape.polygon.empty()) {
                out += pad + "<polygon points=\"" + pointList(shape.polygon) + "\" fill=\"" +
                       (shape.filled ? stroke : std::string("#ffffff")) + "\" stroke=\"" + stroke +
                       "\" stroke-width=\"" + width + "\"/>\n";
            }
        };
        Point startTangent = layout::segmentTangent(toSegment(*segments.front()), 0);
        Point endTangent = layout::segmentTangent(toSegment(*segments.back()), 1);
        draw(attrString(connection.attributes, "markerStart", "none"), segments.front()->points.front(),
             {-startTangent.x, -startTangent.y});
        draw(attrString(connection.attributes, "markerEnd", "none"), segments.back()->points.back(), endTangent);
    }
};

// -- render model ----------------------------------------------------------

const char* modeName(RouteStep::Mode mode) { return diagram::toString(mode); }

std::optional<RouteStep::Mode> parseMode(const std::string& name) {
    for (auto mode : {RouteStep::Mode::Line, RouteStep::Mode::AxisAligned, RouteStep::Mode::Bezier}) {
        if (name == diagram::toString(mode)) {
            return mode;
        }
    }
    return std::nullopt;
}

json attrToJson(const AttrValue& v) {
    return std::visit([](const auto& x) { return json(x); }, v);
}

json pointsToJson(const std::vector<Point>& points) {
    json arr = json::array();
    for (Point p : points) {
        arr.push_back(json::array({p.x, p.y}));
    }
    return arr;
}

std::set<std::string> fieldsFor(ElementKind kind) {
    std::set<std::string> fields = {"id", "kind", "x", "y", "width", "height", "attributes", "originSpan", "children"};
    if (kind == ElementKind::Text) {
        fields.insert({"lines", "lineHeight", "baseline"});
    } else if (kind == ElementKind::ConnectionSegment) {
        fields.insert({"mode", "points"});
    } else if (kind == ElementKind::CanvasConnection) {
        fields.insert("points");
    }
    return fields;
}

bool isNumericAttribute(const std::string& name) {
    return name == "strokeWidth" || name == "fontSize" || name == "opacity";
}

void validateNode(const json& node, const std::string& path, std::optional<ElementKind> parent,
                  std::vector<std::string>& errors) {
    auto fail = [&](const std::string& message) { errors.push_back(path + ": " + message); };
    if (!node.is_object()) {
        fail("node is not an object");
        return;
    }
    if (!node.contains("kind") || !node["kind"].is_string()) {
        fail("missing kind");
        return;
    }
    auto kind = diagram::parseElementKind(node["kind"].get<std::string>());
    if (!kind || diagram::isLayoutOnly(*kind)) {
        fail("unexpected kind " + node["kind"].dump());
        return;
    }
    if (parent && !diagram::isLegalChild(*parent, *kind)) {
        fail(std::string(diagram::toString(*kind)) + " cannot appear inside " + diagram::toString(*parent));
    }
    auto fields = fieldsFor(*kind);
    for (const auto& [key, value] : node.items()) {
        if (!fields.count(key)) {
            fail("unexpected field " + key);
        }
    }
    for (const auto& key : fields) {
        if (!node.contains(key)) {
            fail("missing field " + key);
        }
    }
    if (node.contains("id") && !node["id"].is_string()) {
        fail("id must be a string");
    }
    for (const char* key : {"x", "y", "width", "height"}) {
        if (node.contains(key) && !node[key].is_number()) {
            fail(std::string(key) + " must be a number");
        }
    }
    if (node.contains("originSpan")) {
        const auto& span = node["originSpan"];
        if (!span.is_object() || span.size() != 2 || !span.contains("start") || !span.contains("end") ||
            !span["start"].is_number_unsigned() || !span["end"].is_number_unsigned()) {
            fail("originSpan must be {start, end} with non-negative integers");
        }
    }
    if (node.contains("attributes")) {
        const auto& attrs = node["attributes"];
        if (!attrs.is_object()) {
            fail("attributes must be an object");
        } else {
            const auto& allowed = layout::visualAttributes(*kind);
            for (const auto& [name, value] : attrs.items()) {
                if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
                    fail("attribute " + name + " is not allowed on " + diagram::toString(*kind));
                } else if (isNumericAttribute(name) ? !value.is_number() : !(value.is_string() || value.is_number())) {
                    fail("attribute " + name + " has the wrong type");
                }
            }
        }
    }
    auto checkPoints = [&](const json& points, std::optional<std::size_t> count) {
        if (!points.is_array()) {
            fail("points must be an array");
            return;
        }
        for (const auto& p : points) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                fail("each point must be [x, y]");
                return;
            }
        }
        if (count && points.size() != *count) {
            fail("expected " + std::to_string(*count) + " points");
        }
    };
    if (*kind == ElementKind::Text) {
        if (node.contains("lines")) {
            const auto& lines = node["lines"];
            if (!lines.is_array() || lines.empty()) {
                fail("lines must be a non-empty array");
            } else {
                for (const auto& l : lines) {
                    if (!l.is_string()) {
                        fail("lines must hold strings");
                    }
                }
            }
        }
        for (const char* key : {"lineHeight", "baseline"}) {
            if (node.contains(key) && !node[key].is_number()) {
                fail(std::string(key) + " must be a number");
            }
        }
    }
    if (*kind == ElementKind::ConnectionSegment && node.contains("mode") && node.contains("points")) {
        auto mode = node["mode"].is_string() ? parseMode(node["mode"].get<std::string>()) : std::nullopt;
        if (!mode) {
            fail("unknown segment mode");
        } else {
            checkPoints(node["points"], *mode == RouteStep::Mode::Line ? 2u : 4u);
        }
    }
    if (*kind == ElementKind::CanvasConnection && node.contains("points")) {
        checkPoints(node["points"], 2u);
    }
    if (node.contains("children")) {
        const auto& children = node["children"];
        if (!children.is_array()) {
            fail("children must be an array");
        } else {
            for (std::size_t i = 0; i < children.size(); ++i) {
                validateNode(children[i], path + "/" + std::to_string(i), *kind, errors);
            }
        }
    }
}

LayoutedElement nodeFromJson(const json& node) {
    LayoutedElement e;
    e.id = node["id"].get<std::string>();
    e.kind = *diagram::parseElementKind(node["kind"].get<std::string>());
    e.box = {node["x"].get<double>(), node["y"].get<double>(), node["width"].get<double>(),
             node["height"].get<double>()};
    e.originSpan = {node["originSpan"]["start"].get<std::size_t>(), node["originSpan"]["end"].get<std::size_t>()};
    for (const auto& [name, value] : node["attributes"].items()) {
        if (value.is_string()) {
            e.attributes[name] = value.get<std::string>();
        } else if (value.is_boolean()) {
            e.attributes[name] = value.get<bool>();
        } else {
            e.attributes[name] = value.get<double>();
        }
    }
    if (e.kind == ElementKind::Text) {
        e.lines = node["lines"].get<std::vector<std::string>>();
        e.lineHeight = node["lineHeight"].get<double>();
        e.baseline = node["baseline"].get<double>();
    }
    if (node.contains("mode")) {
        e.segmentMode = *parseMode(node["mode"].get<std::string>());
    }
    if (node.contains("points")) {
        for (const auto& p : node["points"]) {
            e.points.push_back({p[0].get<double>(), p[1].get<double>()});
        }
    }
    for (const auto& child : node["children"]) {
        e.children.push_back(nodeFromJson(child));
    }
    return e;
}

}  // namespace

MarkerShape markerShape(const std::string& marker, Point tip, Point d) {
    using layout::kMarkerSize;
    MarkerShape shape;
    Point n{-d.y, d.x};
    auto at = [&](double along, double across) {
        return Point{tip.x - d.x * along + n.x * across, tip.y - d.y * along + n.y * across};
    };
    double half = kMarkerWidth / 2;
    if (marker == "arrow") {
        shape.strokes.push_back({at(kMarkerSize, half), tip, at(kMarkerSize, -half)});
    } else if (marker == "triangle") {
        shape.polygon = {tip, at(kMarkerSize, half), at(kMarkerSize, -half)};
    } else if (marker == "diamond" || marker == "filledDiamond") {
        shape.polygon = {tip, at(kMarkerSize / 2, half), at(kMarkerSize, 0), at(kMarkerSize / 2, -half)};
        shape.filled = marker == "filledDiamond";
    } else if (marker == "cross") {
        double c = kMarkerSize * 2 / 3;
        shape.strokes.push_back({at(c - half, half), at(c + half, -half)});
        shape.strokes.push_back({at(c - half, -half), at(c + half, half)});
    }
    return shape;
}

std::string renderSvg(const LayoutedDiagram& layouted) {
    const auto& r = layouted.root.box;
    SvgWriter writer;
    writer.out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    writer.out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(r.width) +
                  "\" height=\"" + num(r.height) + "\" viewBox=\"" + num(r.x) + " " + num(r.y) + " " +
                  num(r.width) + " " + num(r.height) + "\">\n";
    writer.element(layouted.root, nullptr, 1);
    writer.out += "</svg>\n";
    return writer.out;
}

json toRenderModel(const LayoutedElement& e) {
    json attrs = json::object();
    for (const auto& [name, value] : e.attributes) {
        attrs[name] = attrToJson(value);
    }
    json node = {
        {"id", e.id},
        {"kind", diagram::toString(e.kind)},
        {"x", e.box.x},
        {"y", e.box.y},
        {"width", e.box.width},
        {"height", e.box.height},
        {"attributes", attrs},
        {"originSpan", {{"start", e.originSpan.start}, {"end", e.originSpan.end}}},
    };
    if (e.kind == ElementKind::Text) {
        node["lines"] = e.lines.empty() ? std::vector<std::string>{""} : e.lines;
        node["lineHeight"] = e.lineHeight;
        node["baseline"] = e.baseline;
    } else if (e.kind == ElementKind::ConnectionSegment) {
        node["mode"] = modeName(e.segmentMode);
        node["points"] = pointsToJson(e.points);
    } else if (e.kind == ElementKind::CanvasConnection) {
        node["points"] = pointsToJson(e.points);
    }
    json children = json::array();
    for (const auto& child : e.children) {
        children.push_back(toRenderModel(child));
    }
    node["children"] = std::move(children);
    return node;
}

json toRenderModel(const LayoutedDiagram& layouted) {
    const auto& r = layouted.root.box;
    return {
        {"schemaVersion", kRenderModelSchemaVersion},
        {"viewBox", {{"x", r.x}, {"y", r.y}, {"width", r.width}, {"height", r.height}}},
        {"root", toRenderModel(layouted.root)},
    };
}

std::vector<std::string> validateRenderModel(const json& model) {
    std::vector<std::string> errors;
    if (!model.is_object()) {
        return {"model is not an object"};
    }
    for (const auto& [key, value] : model.items()) {
        if (key != "schemaVersion" && key != "viewBox" && key != "root") {
            errors.push_back("unexpected top-level field " + key);
        }
    }
    if (!model.contains("schemaVersion") || model["schemaVersion"] != kRenderModelSchemaVersion) {
        errors.push_back("schemaVersion must be " + std::to_string(kRenderModelSchemaVersion));
    }
    if (!model.contains("viewBox") || !model["viewBox"].is_object() || model["viewBox"].size() != 4) {
        errors.push_back("viewBox must be {x, y, width, height}");
    } else {
        for (const char* key : {"x", "y", "width", "height"}) {
            if (!model["viewBox"].contains(key) || !model["viewBox"][key].is_number()) {
                errors.push_back(std::string("viewBox.") + key + " must be a number");
            }
        }
    }
    if (!model.contains("root")) {
        errors.push_back("missing root");
    } else {
        validateNode(model["root"], "root", std::nullopt, errors);
        if (errors.empty() && model["root"]["kind"] != "canvas") {
            errors.push_back("root must be a canvas");
        }
    }
    return errors;
}

LayoutedElement fromRenderModel(const json& model) {
    auto errors = validateRenderModel(model);
    if (!errors.empty()) {
        throw RenderModelError(errors.front());
    }
    return nodeFromJson(model["root"]);
}

LayoutedElement elementFromRenderModel(const json& node) {
    std::vector<std::string> errors;
    validateNode(node, "node", std::nullopt, errors);
    if (!errors.empty()) {
        throw RenderModelError(errors.front());
    }
    return nodeFromJson(node);
}

}  // namespace livediag::render
