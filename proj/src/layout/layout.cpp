#include "livediag/layout/layout.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace livediag::layout {

using diagram::AttributeMap;
using diagram::AttrValue;
using diagram::ElementKind;
using diagram::ElementNode;
using diagram::RouteStep;

Size Constraints::clamp(Size size) const {
    return {std::min(std::max(size.width, minWidth), maxWidth), std::min(std::max(size.height, minHeight), maxHeight)};
}

namespace {

double snapUp(double value) { return std::ceil(value / kGrid) * kGrid; }
double snap(double value) { return std::round(value / kGrid) * kGrid; }

std::optional<double> numberAttr(const AttributeMap& attrs, const std::string& name) {
    auto it = attrs.find(name);
    if (it == attrs.end()) {
        return std::nullopt;
    }
    if (const double* d = std::get_if<double>(&it->second)) {
        return *d;
    }
    return std::nullopt;
}

std::string stringAttr(const AttributeMap& attrs, const std::string& name, const std::string& fallback) {
    auto it = attrs.find(name);
    if (it == attrs.end()) {
        return fallback;
    }
    if (const auto* s = std::get_if<std::string>(&it->second)) {
        return *s;
    }
    return diagram::toString(it->second);
}

std::vector<std::string> splitLines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (true) {
        auto nl = text.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(start));
            return lines;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
}

bool isPadded(ElementKind kind) { return kind == ElementKind::Rect || kind == ElementKind::Ellipse; }

Point lerp(Point a, Point b, double u) { return {a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u}; }

double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

Point normalized(Point v) {
    double len = std::hypot(v.x, v.y);
    if (len == 0 || !std::isfinite(len)) {
        return {1, 0};
    }
    return {v.x / len, v.y / len};
}

struct Bounds {
    double minX = kUnbounded, minY = kUnbounded;
    double maxX = -kUnbounded, maxY = -kUnbounded;

    bool empty() const { return minX > maxX; }
    void add(Point p) {
        minX = std::min(minX, p.x);
        minY = std::min(minY, p.y);
        maxX = std::max(maxX, p.x);
        maxY = std::max(maxY, p.y);
    }
    void add(const Rect& r) {
        add(Point{r.x, r.y});
        add(Point{r.right(), r.bottom()});
    }
    Rect rect() const { return empty() ? Rect{} : Rect{minX, minY, maxX - minX, maxY - minY}; }
};

struct Placement {
    std::vector<std::pair<const ElementNode*, Point>> positions;  // canvas-local, in child order
    Bounds bounds;
    double margin = kCanvasMargin;
};

class Engine {
public:
    Engine(const diagram::Diagram& diagram, Diagnostics& diagnostics, bool keepLayoutOnly)
        : diagram_(diagram), styles_(diagram), diagnostics_(diagnostics), keepLayoutOnly_(keepLayoutOnly) {}

    Size measure(const ElementNode& node, const Constraints& c);
    void layoutNode(const ElementNode& node, const Rect& assigned, std::vector<LayoutedElement>& out);

    const Placement* placement(const ElementNode& canvas) const {
        auto it = placements_.find(&canvas);
        return it == placements_.end() ? nullptr : &it->second;
    }

private:
    const AttributeMap& attrs(const ElementNode& node) const { return styles_.resolved(node); }
    const diagram::FontMetrics& fontFor(const AttributeMap& attrs, const ElementNode& node);
    double padding(const ElementNode& node) const {
        return numberAttr(attrs(node), "padding").value_or(isPadded(node.kind) ? kDefaultPadding : 0);
    }

    Size measureText(const ElementNode& node);
    Size measureCanvas(const ElementNode& node, const Constraints& c);
    void layoutCanvas(const ElementNode& node, const Rect& assigned, LayoutedElement& element);
    void layoutConnection(const ElementNode& node, Point origin, std::vector<LayoutedElement>& out);
    LayoutedElement makeElement(const ElementNode& node, const Rect& box) const;
    void report(Span span, std::string code, std::string message, Severity severity = Severity::Error) {
        diagnostics_.push_back({severity, span, std::move(code), std::move(message)});
    }

    const diagram::Diagram& diagram_;
    diagram::StyleResolver styles_;
    Diagnostics& diagnostics_;
    bool keepLayoutOnly_;
    std::unordered_map<const ElementNode*, Size> measured_;
    std::unordered_map<const ElementNode*, Placement> placements_;
    std::unordered_map<const ElementNode*, Rect> boxes_;
    std::set<std::string> warnedFonts_;
};

const diagram::FontMetrics& Engine::fontFor(const AttributeMap& attributes, const ElementNode& node) {
    std::string family = stringAttr(attributes, "fontFamily", "sans");
    if (diagram_.fonts.empty()) {
        return diagram::defaultFont();
    }
    const auto& font = diagram::selectFont(diagram_.fonts, family);
    if (font.family != family && warnedFonts_.insert(family).second) {
        report(node.originSpan, "UnknownFont", "font family '" + family + "' is not available, using '" + font.family + "'",
               Severity::Warning);
    }
    return font;
}

Size Engine::measureText(const ElementNode& node) {
    const auto& attributes = attrs(node);
    const auto& font = fontFor(attributes, node);
    double size = numberAttr(attributes, "fontSize").value_or(14);
    auto measuredText = diagram::measureText(stringAttr(attributes, "text", ""), font, size);
    return {snapUp(measuredText.width), snapUp(measuredText.height)};
}

Size Engine::measure(const ElementNode& node, const Constraints& c) {
    Size result;
    switch (node.kind) {
    case ElementKind::Text:
        result = measureText(node);
        break;
    case ElementKind::VBox:
    case ElementKind::HBox: {
        bool vertical = node.kind == ElementKind::VBox;
        double remaining = vertical ? c.maxHeight : c.maxWidth;
        double cross = 0;
        double main = 0;
        for (const auto& child : node.children) {
            Constraints inner = vertical ? Constraints{0, c.maxWidth, 0, std::max(0.0, remaining)}
                                         : Constraints{0, std::max(0.0, remaining), 0, c.maxHeight};
            Size s = measure(*child, inner);
            double along = vertical ? s.height : s.width;
            cross = std::max(cross, vertical ? s.width : s.height);
            main += along;
            remaining -= along;
        }
        result = vertical ? Size{cross, main} : Size{main, cross};
        break;
    }
    case ElementKind::Canvas:
        result = measureCanvas(node, c);
        break;
    case ElementKind::CanvasConnection:
    case ElementKind::ConnectionSegment:
        result = {};
        break;
    default: {
        const auto& attributes = attrs(node);
        double p = padding(node);
        auto w = numberAttr(attributes, "width");
        auto h = numberAttr(attributes, "height");
        Constraints inner{0, std::max(0.0, (w ? *w : c.maxWidth) - 2 * p), 0,
                          std::max(0.0, (h ? *h : c.maxHeight) - 2 * p)};
        Size content;
        for (const auto& child : node.children) {
            Size s = measure(*child, inner);
            content.width = std::max(content.width, s.width);
            content.height = std::max(content.height, s.height);
        }
        result = {w ? *w : content.width + 2 * p, h ? *h : content.height + 2 * p};
        break;
    }
    }
    result = c.clamp(result);
    measured_[&node] = result;
    return result;
}

Size Engine::measureCanvas(const ElementNode& node, const Constraints& c) {
    Placement placement;
    placement.margin = numberAttr(attrs(node), "margin").value_or(kCanvasMargin);

    std::unordered_map<const ElementNode*, Size> sizes;
    std::vector<const ElementNode*> order;
    for (const auto& child : node.children) {
        if (child->kind == ElementKind::CanvasElement) {
            sizes[child.get()] = measure(*child, Constraints::unbounded());
            order.push_back(child.get());
        }
    }

    // 0 unresolved, 1 in progress, 2 placed, 3 failed
    std::unordered_map<const ElementNode*, int> state;
    std::unordered_map<const ElementNode*, Point> local;
    double cursor = 0;
    for (const ElementNode* child : order) {
        if (!child->pos) {
            local[child] = {0, cursor};
            state[child] = 2;
            cursor += sizes[child].height + kPlacementGap;
        } else if (child->pos->kind == diagram::PositionSpec::Kind::Absolute) {
            local[child] = {child->pos->x, child->pos->y};
            state[child] = 2;
        }
    }

    auto posSpan = [](const ElementNode& n) {
        auto it = n.sourceRefs.find("pos");
        return it == n.sourceRefs.end() ? n.originSpan : it->second;
    };
    std::function<bool(const ElementNode*)> resolve = [&](const ElementNode* child) -> bool {
        int& s = state[child];
        if (s == 2) {
            return true;
        }
        if (s == 3) {
            return false;
        }
        if (s == 1) {
            report(posSpan(*child), "CyclicReference", "relative positions form a cycle");
            s = 3;
            return false;
        }
        s = 1;
        auto target = child->pos->target.lock();
        if (!target || !sizes.count(target.get())) {
            report(posSpan(*child), "UnknownTarget", "relative position refers to an element that is not on this canvas");
            state[child] = 3;
            return false;
        }
        if (!resolve(target.get())) {
            if (state[child] != 3) {
                report(posSpan(*child), "CyclicReference", "relative position depends on an element that cannot be placed");
            }
            state[child] = 3;
            return false;
        }
        Point base = local[target.get()];
        local[child] = {base.x + child->pos->x, base.y + child->pos->y};
        state[child] = 2;
        return true;
    };

    for (const ElementNode* child : order) {
        if (resolve(child)) {
            Point p = local[child];
            placement.positions.emplace_back(child, p);
            Size s = sizes[child];
            placement.bounds.add(Rect{p.x, p.y, s.width, s.height});
        }
    }

    Size size;
    if (!placement.bounds.empty()) {
        Rect r = placement.bounds.rect();
        size = {r.width + 2 * placement.margin, r.height + 2 * placement.margin};
    }
    placements_[&node] = std::move(placement);
    return c.clamp(size);
}

LayoutedElement Engine::makeElement(const ElementNode& node, const Rect& box) const {
    LayoutedElement element;
    element.id = node.id;
    element.kind = node.kind;
    element.box = box;
    element.originSpan = node.originSpan;
    const auto& resolved = attrs(node);
    const auto& defaults = visualDefaults(node.kind);
    for (const auto& name : visualAttributes(node.kind)) {
        auto it = resolved.find(name);
        if (it != resolved.end()) {
            element.attributes[name] = it->second;
        } else if (auto d = defaults.find(name); d != defaults.end()) {
            element.attributes[name] = d->second;
        }
    }
    return element;
}

void Engine::layoutNode(const ElementNode& node, const Rect& assigned, std::vector<LayoutedElement>& out) {
    boxes_[&node] = assigned;
    switch (node.kind) {
    case ElementKind::VBox:
    case ElementKind::HBox: {
        bool vertical = node.kind == ElementKind::VBox;
        std::string align = stringAttr(attrs(node), "align", "start");
        std::vector<LayoutedElement> kept;
        std::vector<LayoutedElement>& target = keepLayoutOnly_ ? kept : out;
        double cursor = vertical ? assigned.y : assigned.x;
        double limit = vertical ? assigned.bottom() : assigned.right();
        double crossStart = vertical ? assigned.x : assigned.y;
        double crossSize = vertical ? assigned.width : assigned.height;
        for (const auto& child : node.children) {
            auto it = measured_.find(child.get());
            Size s = it == measured_.end() ? Size{} : it->second;
            double along = std::max(0.0, std::min(vertical ? s.height : s.width, limit - cursor));
            double cross = align == "stretch" ? crossSize : std::min(vertical ? s.width : s.height, crossSize);
            double offset = 0;
            if (align == "center") {
                offset = (crossSize - cross) / 2;
            } else if (align == "end") {
                offset = crossSize - cross;
            }
            Rect r = vertical ? Rect{crossStart + offset, cursor, cross, along}
                              : Rect{cursor, crossStart + offset, along, cross};
            layoutNode(*child, r, target);
            cursor += along;
        }
        if (keepLayoutOnly_) {
            LayoutedElement element = makeElement(node, assigned);
            element.children = std::move(kept);
            out.push_back(std::move(element));
        }
        return;
    }
    case ElementKind::Text: {
        LayoutedElement element = makeElement(node, assigned);
        const auto& attributes = attrs(node);
        const auto& font = fontFor(attributes, node);
        double size = numberAttr(attributes, "fontSize").value_or(14);
        element.lines = splitLines(stringAttr(attributes, "text", ""));
        element.lineHeight = snap(diagram::lineHeight(font, size));
        double glyphHeight = (font.ascent - font.descent) * size / font.unitsPerEm;
        element.baseline = snap((element.lineHeight - glyphHeight) / 2 + font.ascent * size / font.unitsPerEm);
        out.push_back(std::move(element));
        return;
    }
    case ElementKind::Canvas: {
        LayoutedElement element = makeElement(node, assigned);
        layoutCanvas(node, assigned, element);
        out.push_back(std::move(element));
        return;
    }
    case ElementKind::CanvasConnection:
    case ElementKind::ConnectionSegment:
        return;  // routed by the owning canvas
    default: {
        LayoutedElement element = makeElement(node, assigned);
        double p = padding(node);
        double px = std::min(p, assigned.width / 2);
        double py = std::min(p, assigned.height / 2);
        Rect inner{assigned.x + px, assigned.y + py, assigned.width - 2 * px, assigned.height - 2 * py};
        for (const auto& child : node.children) {
            layoutNode(*child, inner, element.children);
        }
        out.push_back(std::move(element));
        return;
    }
    }
}

void Engine::layoutCanvas(const ElementNode& node, const Rect& assigned, LayoutedElement& element) {
    if (!placements_.count(&node)) {
        measure(node, Constraints::unbounded());
    }
    const Placement& placement = placements_.at(&node);
    Point origin{assigned.x, assigned.y};
    if (!placement.bounds.empty()) {
        origin = {assigned.x - (placement.bounds.minX - placement.margin),
                  assigned.y - (placement.bounds.minY - placement.margin)};
    }
    for (const auto& [child, p] : placement.positions) {
        Size s = measured_.at(child);
        layoutNode(*child, Rect{origin.x + p.x, origin.y + p.y, s.width, s.height}, element.children);
    }
    for (const auto& child : node.children) {
        if (child->kind == ElementKind::CanvasConnection) {
            layoutConnection(*child, origin, element.children);
        }
    }
    element.box = placement.bounds.empty() ? Rect{origin.x, origin.y, 0, 0}
                                           : canvasBounds(element.children, origin, placement.margin);
}

void Engine::layoutConnection(const ElementNode& node, Point origin, std::vector<LayoutedElement>& out) {
    auto source = node.source.lock();
    auto target = node.target.lock();
    auto sourceBox = source ? boxes_.find(source.get()) : boxes_.end();
    auto targetBox = target ? boxes_.find(target.get()) : boxes_.end();
    if (sourceBox == boxes_.end() || targetBox == boxes_.end()) {
        report(node.originSpan, "MissingEndpoint", "connection endpoint was not placed");
        return;
    }
    BoxLookup lookup = [this](const ElementNode& n) -> std::optional<Rect> {
        auto it = boxes_.find(&n);
        if (it == boxes_.end()) {
            return std::nullopt;
        }
        return it->second;
    };
    RoutedConnection route;
    try {
        route = routeConnection(node, sourceBox->second, targetBox->second, lookup, origin);
    } catch (const std::exception& e) {
        report(node.originSpan, "InvalidRoute", e.what());
        return;
    }

    LayoutedElement element = makeElement(node, {});
    element.points = {route.start, route.end};
    std::size_t segmentIndex = 0;
    std::size_t labelIndex = 0;
    for (const auto& child : node.children) {
        if (child->kind == ElementKind::ConnectionSegment && segmentIndex < route.segments.size()) {
            const auto& segment = route.segments[segmentIndex++];
            Bounds b;
            for (Point p : segment.points) {
                b.add(p);
            }
            LayoutedElement seg = makeElement(*child, b.rect());
            seg.segmentMode = segment.mode;
            seg.points = segment.points;
            boxes_[child.get()] = seg.box;
            element.children.push_back(std::move(seg));
        } else if (child->kind == ElementKind::Label && labelIndex < route.labels.size()) {
            const auto& placement = route.labels[labelIndex++];
            Size s = measure(*child, Constraints::unbounded());
            // the box edge nearest to the route touches the offset point
            double extent = std::abs(placement.normal.x) * s.width / 2 + std::abs(placement.normal.y) * s.height / 2;
            Point center{placement.center.x + placement.normal.x * extent, placement.center.y + placement.normal.y * extent};
            Rect box{center.x - s.width / 2, center.y - s.height / 2, s.width, s.height};
            layoutNode(*child, box, element.children);
        }
    }
    // a connection without segment children still has its default route
    for (; segmentIndex < route.segments.size(); ++segmentIndex) {
        const auto& segment = route.segments[segmentIndex];
        Bounds b;
        for (Point p : segment.points) {
            b.add(p);
        }
        LayoutedElement seg;
        seg.id = node.id + "/connectionSegment" + std::to_string(segmentIndex);
        seg.kind = ElementKind::ConnectionSegment;
        seg.box = b.rect();
        seg.segmentMode = segment.mode;
        seg.points = segment.points;
        seg.originSpan = node.originSpan;
        element.children.push_back(std::move(seg));
    }
    element.box = connectionBounds(element);
    boxes_[&node] = element.box;
    out.push_back(std::move(element));
}

RoutedSegment buildSegment(const RouteStep& step, Point p0, Point p1) {
    RoutedSegment segment;
    segment.mode = step.mode;
    switch (step.mode) {
    case RouteStep::Mode::Line:
        segment.points = {p0, p1};
        break;
    case RouteStep::Mode::AxisAligned: {
        double x = p0.x + (p1.x - p0.x) * step.fraction;
        segment.points = {p0, {x, p0.y}, {x, p1.y}, p1};
        break;
    }
    case RouteStep::Mode::Bezier:
        segment.points = {p0, {p0.x + step.c1x, p0.y + step.c1y}, {p1.x + step.c2x, p1.y + step.c2y}, p1};
        break;
    }
    return segment;
}

// Piece of an axis-aligned polyline at arc-length fraction u: index of the
// piece start and the local parameter within it.
std::pair<std::size_t, double> polylinePiece(const std::vector<Point>& pts, double u) {
    double total = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        total += distance(pts[i], pts[i + 1]);
    }
    if (total == 0) {
        return {0, 0};
    }
    double wanted = std::clamp(u, 0.0, 1.0) * total;
    std::size_t last = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double len = distance(pts[i], pts[i + 1]);
        if (len == 0) {
            continue;
        }
        last = i;
        if (wanted <= len) {
            return {i, wanted / len};
        }
        wanted -= len;
    }
    return {last, 1};
}

}  // namespace

const std::vector<std::string>& visualAttributes(ElementKind kind) {
    static const std::vector<std::string> shape = {"fill", "stroke", "strokeWidth", "strokeDash", "opacity"};
    static const std::vector<std::string> text = {"color", "fontSize", "fontFamily", "fontWeight", "fontStyle",
                                                  "opacity"};
    static const std::vector<std::string> connection = {"stroke",  "strokeWidth", "strokeDash",
                                                        "opacity", "markerStart", "markerEnd"};
    static const std::vector<std::string> canvas = {"fill"};
    static const std::vector<std::string> none;
    switch (kind) {
    case ElementKind::Rect:
    case ElementKind::Ellipse:
    case ElementKind::Path:
        return shape;
    case ElementKind::Text:
        return text;
    case ElementKind::CanvasConnection:
        return connection;
    case ElementKind::Canvas:
        return canvas;
    default:
        return none;
    }
}

const AttributeMap& visualDefaults(ElementKind kind) {
    static const AttributeMap shape = {{"fill", std::string("none")}, {"strokeWidth", 1.0}};
    static const AttributeMap text = {{"fontWeight", std::string("normal")}, {"fontStyle", std::string("normal")}};
    static const AttributeMap connection = {
        {"strokeWidth", 1.0}, {"markerStart", std::string("none")}, {"markerEnd", std::string("none")}};
    static const AttributeMap canvas = {{"fill", std::string("none")}};
    static const AttributeMap none;
    switch (kind) {
    case ElementKind::Rect:
    case ElementKind::Ellipse:
    case ElementKind::Path:
        return shape;
    case ElementKind::Text:
        return text;
    case ElementKind::CanvasConnection:
        return connection;
    case ElementKind::Canvas:
        return canvas;
    default:
        return none;
    }
}

Point perimeterPoint(const Rect& r, double s) {
    double perimeter = 2 * (r.width + r.height);
    double d = s * perimeter;
    if (d < r.width) {
        return {r.x + d, r.y};
    }
    d -= r.width;
    if (d < r.height) {
        return {r.right(), r.y + d};
    }
    d -= r.height;
    if (d < r.width) {
        return {r.right() - d, r.bottom()};
    }
    d -= r.width;
    return {r.x, r.bottom() - std::min(d, r.height)};
}

Point borderIntersection(const Rect& r, Point toward) {
    Point c = r.center();
    double dx = toward.x - c.x;
    double dy = toward.y - c.y;
    if (dx == 0 && dy == 0) {
        return c;
    }
    double t = kUnbounded;
    if (dx != 0) {
        t = std::min(t, (r.width / 2) / std::abs(dx));
    }
    if (dy != 0) {
        t = std::min(t, (r.height / 2) / std::abs(dy));
    }
    return {c.x + dx * t, c.y + dy * t};
}

Point segmentPoint(const RoutedSegment& segment, double u) {
    const auto& p = segment.points;
    switch (segment.mode) {
    case RouteStep::Mode::Line:
        return lerp(p[0], p[1], u);
    case RouteStep::Mode::AxisAligned: {
        auto [i, local] = polylinePiece(p, u);
        return lerp(p[i], p[i + 1], local);
    }
    case RouteStep::Mode::Bezier: {
        Point a = lerp(p[0], p[1], u), b = lerp(p[1], p[2], u), c = lerp(p[2], p[3], u);
        Point d = lerp(a, b, u), e = lerp(b, c, u);
        return lerp(d, e, u);
    }
    }
    return p.front();
}

Point segmentTangent(const RoutedSegment& segment, double u) {
    const auto& p = segment.points;
    Point fallback{p.back().x - p.front().x, p.back().y - p.front().y};
    Point t = fallback;
    switch (segment.mode) {
    case RouteStep::Mode::Line:
        break;
    case RouteStep::Mode::AxisAligned: {
        auto [i, local] = polylinePiece(p, u);
        t = {p[i + 1].x - p[i].x, p[i + 1].y - p[i].y};
        break;
    }
    case RouteStep::Mode::Bezier: {
        double v = 1 - u;
        t = {3 * (v * v * (p[1].x - p[0].x) + 2 * v * u * (p[2].x - p[1].x) + u * u * (p[3].x - p[2].x)),
             3 * (v * v * (p[1].y - p[0].y) + 2 * v * u * (p[2].y - p[1].y) + u * u * (p[3].y - p[2].y))};
        break;
    }
    }
    if (t.x == 0 && t.y == 0) {
        t = fallback;
    }
    return normalized(t);
}

RoutedConnection routeConnection(const ElementNode& connection, const Rect& source, const Rect& target,
                                 const BoxLookup& boxes, Point canvasOrigin) {
    RoutedConnection route;
    route.start = connection.startParam ? perimeterPoint(source, *connection.startParam)
                                        : borderIntersection(source, target.center());
    route.end = connection.endParam ? perimeterPoint(target, *connection.endParam)
                                    : borderIntersection(target, source.center());
    if (auto m = connection.string("markerStart")) {
        route.markerStart = *m;
    }
    if (auto m = connection.string("markerEnd")) {
        route.markerEnd = *m;
    }

    auto resolve = [&](const diagram::PositionSpec& spec) -> Point {
        if (spec.kind == diagram::PositionSpec::Kind::Absolute) {
            return {canvasOrigin.x + spec.x, canvasOrigin.y + spec.y};
        }
        auto targetNode = spec.target.lock();
        std::optional<Rect> box = targetNode && boxes ? boxes(*targetNode) : std::nullopt;
        if (!box) {
            throw std::runtime_error("route waypoint refers to an element that is not placed");
        }
        return {box->x + spec.x, box->y + spec.y};
    };

    Point cursor = route.start;
    for (const auto& child : connection.children) {
        if (child->kind != ElementKind::ConnectionSegment) {
            continue;
        }
        RouteStep step = child->step.value_or(RouteStep{});
        Point next = step.target ? resolve(*step.target) : route.end;
        route.segments.push_back(buildSegment(step, cursor, next));
        cursor = next;
    }
    if (route.segments.empty()) {
        route.segments.push_back(buildSegment(RouteStep{}, route.start, route.end));
    }

    double n = static_cast<double>(route.segments.size());
    for (const auto& child : connection.children) {
        if (child->kind != ElementKind::Label) {
            continue;
        }
        LabelPlacement placement;
        placement.t = std::clamp(child->number("t").value_or(0.5), 0.0, 1.0);
        placement.distance = child->number("distance").value_or(kDefaultLabelDistance);
        double scaled = placement.t * n;
        std::size_t index = std::min(static_cast<std::size_t>(std::floor(scaled)), route.segments.size() - 1);
        double u = scaled - static_cast<double>(index);
        const auto& segment = route.segments[index];
        placement.onRoute = segmentPoint(segment, u);
        Point tangent = segmentTangent(segment, u);
        placement.normal = {tangent.y, -tangent.x};
        placement.center = {placement.onRoute.x + placement.normal.x * placement.distance,
                            placement.onRoute.y + placement.normal.y * placement.distance};
        route.labels.push_back(placement);
    }
    return route;
}

namespace {

// Shares the caller's tree when `element` belongs to it, otherwise treats
// `element` as the root of its own tree.
diagram::Diagram diagramFor(const diagram::Diagram& diagram, const ElementNode& element) {
    if (diagram.root && diagram::findElement(*diagram.root, element.id) == &element) {
        return diagram;
    }
    diagram::Diagram local = diagram;
    local.root = std::shared_ptr<const ElementNode>(std::shared_ptr<void>(), &element);
    return local;
}

}  // namespace

Size measure(const diagram::Diagram& diagram, const ElementNode& element, const Constraints& constraints) {
    auto d = diagramFor(diagram, element);
    Diagnostics ignored;
    Engine engine(d, ignored, false);
    return engine.measure(element, constraints);
}

LayoutedElement layout(const diagram::Diagram& diagram, const ElementNode& element, Point position,
                       Size assignedSize, Diagnostics* diagnostics) {
    auto d = diagramFor(diagram, element);
    Diagnostics local;
    Engine engine(d, diagnostics ? *diagnostics : local, false);
    engine.measure(element, Constraints::unbounded());
    std::vector<LayoutedElement> out;
    Rect assigned{0, 0, assignedSize.width, assignedSize.height};
    if (element.kind == ElementKind::Canvas) {
        const Placement* placement = engine.placement(element);
        if (placement && !placement->bounds.empty()) {
            assigned.x = placement->bounds.minX - placement->margin;
            assigned.y = placement->bounds.minY - placement->margin;
        }
    }
    engine.layoutNode(element, assigned, out);
    if (out.empty()) {
        return {};
    }
    LayoutedElement result = std::move(out.front());
    translate(result, position.x - assigned.x, position.y - assigned.y);
    return result;
}

LayoutedDiagram layoutDiagram(const diagram::Diagram& diagram, const LayoutOptions& options) {
    LayoutedDiagram result;
    result.root.kind = ElementKind::Canvas;
    if (!diagram.root) {
        result.root.id = "canvas";
        result.root.attributes = visualDefaults(ElementKind::Canvas);
        return result;
    }
    Engine engine(diagram, result.diagnostics, options.keepLayoutOnly);
    Size size = engine.measure(*diagram.root, Constraints::unbounded());
    Rect assigned{0, 0, size.width, size.height};
    if (const Placement* placement = engine.placement(*diagram.root);
        placement && !placement->bounds.empty()) {
        // puts the canvas origin exactly at (0, 0)
        assigned.x = placement->bounds.minX - placement->margin;
        assigned.y = placement->bounds.minY - placement->margin;
    }
    std::vector<LayoutedElement> out;
    engine.layoutNode(*diagram.root, assigned, out);
    if (!out.empty()) {
        result.root = std::move(out.front());
    }
    if (options.offset.x != 0 || options.offset.y != 0) {
        translate(result.root, options.offset.x, options.offset.y);
    }
    return result;
}

void translate(LayoutedElement& element, double dx, double dy) {
    if (dx == 0 && dy == 0) {
        return;
    }
    element.box.x += dx;
    element.box.y += dy;
    for (auto& p : element.points) {
        p.x += dx;
        p.y += dy;
    }
    for (auto& child : element.children) {
        translate(child, dx, dy);
    }
}

Rect connectionBounds(const LayoutedElement& connection) {
    Bounds b;
    for (Point p : connection.points) {
        b.add(p);
    }
    for (const auto& child : connection.children) {
        if (child.kind == ElementKind::ConnectionSegment) {
            for (Point p : child.points) {
                b.add(p);
            }
        } else {
            b.add(child.box);
        }
    }
    if (b.empty()) {
        return {};
    }
    double m = kMarkerSize / 2;
    return {b.minX - m, b.minY - m, b.maxX - b.minX + 2 * m, b.maxY - b.minY + 2 * m};
}

Rect canvasBounds(const std::vector<LayoutedElement>& children, Point origin, double margin) {
    Bounds b;
    for (const auto& child : children) {
        b.add(child.box);
    }
    if (b.empty()) {
        return {origin.x, origin.y, 0, 0};
    }
    return {b.minX - margin, b.minY - margin, b.maxX - b.minX + 2 * margin, b.maxY - b.minY + 2 * margin};
}

const LayoutedElement* findLayouted(const LayoutedElement& root, std::string_view id) {
    if (root.id == id) {
        return &root;
    }
    for (const auto& child : root.children) {
        if (const auto* found = findLayouted(child, id)) {
            return found;
        }
    }
    return nullptr;
}

LayoutedElement* findLayouted(LayoutedElement& root, std::string_view id) {
    return const_cast<LayoutedElement*>(findLayouted(static_cast<const LayoutedElement&>(root), id));
}

}  // namespace livediag::layout
