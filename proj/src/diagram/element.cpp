#include "livediag/diagram/element.hpp"

#include <unordered_map>

#include "livediag/lang/number_format.hpp"

namespace livediag::diagram {

namespace {

constexpr std::pair<ElementKind, std::string_view> kKindNames[] = {
    {ElementKind::Rect, "rect"},
    {ElementKind::Ellipse, "ellipse"},
    {ElementKind::Path, "path"},
    {ElementKind::Text, "text"},
    {ElementKind::VBox, "vbox"},
    {ElementKind::HBox, "hbox"},
    {ElementKind::Canvas, "canvas"},
    {ElementKind::CanvasElement, "canvasElement"},
    {ElementKind::CanvasConnection, "canvasConnection"},
    {ElementKind::ConnectionSegment, "connectionSegment"},
    {ElementKind::Label, "label"},
};

}  // namespace

const char* toString(ElementKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) {
            return name.data();
        }
    }
    return "?";
}

std::optional<ElementKind> parseElementKind(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) {
            return k;
        }
    }
    return std::nullopt;
}

const char* toString(RouteStep::Mode mode) {
    switch (mode) {
    case RouteStep::Mode::Line: return "line";
    case RouteStep::Mode::AxisAligned: return "axisAligned";
    case RouteStep::Mode::Bezier: return "bezier";
    }
    return "line";
}

std::string toString(const AttrValue& value) {
    if (const auto* d = std::get_if<double>(&value)) {
        return formatNumber(*d);
    }
    if (const auto* b = std::get_if<bool>(&value)) {
        return *b ? "true" : "false";
    }
    return std::get<std::string>(value);
}

std::optional<double> ElementNode::number(const std::string& name) const {
    auto it = localAttributes.find(name);
    if (it == localAttributes.end()) {
        return std::nullopt;
    }
    if (const auto* d = std::get_if<double>(&it->second)) {
        return *d;
    }
    return std::nullopt;
}

std::optional<std::string> ElementNode::string(const std::string& name) const {
    auto it = localAttributes.find(name);
    if (it == localAttributes.end()) {
        return std::nullopt;
    }
    if (const auto* s = std::get_if<std::string>(&it->second)) {
        return *s;
    }
    return std::nullopt;
}

bool isLegalChild(ElementKind parent, ElementKind child) {
    switch (child) {
    case ElementKind::CanvasElement:
    case ElementKind::CanvasConnection:
        return parent == ElementKind::Canvas;
    case ElementKind::ConnectionSegment:
        return parent == ElementKind::CanvasConnection;
    case ElementKind::Label:
        return parent == ElementKind::CanvasConnection;
    default:
        break;
    }
    switch (parent) {
    case ElementKind::Canvas:
    case ElementKind::CanvasConnection:
    case ElementKind::ConnectionSegment:
    case ElementKind::Text:
    case ElementKind::Path:
        return false;
    default:
        return true;
    }
}

void reassignIds(ElementNode& node) {
    std::map<ElementKind, int> counters;
    for (auto& child : node.children) {
        int index = counters[child->kind]++;
        child->id = node.id + "/" + toString(child->kind) + std::to_string(index);
        reassignIds(*child);
    }
}

ElementPtr createElement(ElementKind kind, AttributeMap attributes, std::set<std::string> classes,
                         std::vector<ElementPtr> children, Span originSpan) {
    auto node = std::make_shared<ElementNode>();
    node->kind = kind;
    node->id = toString(kind);
    node->localAttributes = std::move(attributes);
    node->classes = std::move(classes);
    node->originSpan = originSpan;
    for (auto& child : children) {
        appendChild(*node, std::move(child));
    }
    return node;
}

void appendChild(ElementNode& parent, ElementPtr child) {
    if (!isLegalChild(parent.kind, child->kind)) {
        throw IllegalChild(std::string(toString(child->kind)) + " cannot be a child of " + toString(parent.kind));
    }
    int index = 0;
    for (const auto& sibling : parent.children) {
        if (sibling->kind == child->kind) {
            ++index;
        }
    }
    child->id = parent.id + "/" + toString(child->kind) + std::to_string(index);
    reassignIds(*child);
    parent.children.push_back(std::move(child));
}

const ElementNode* findElement(const ElementNode& root, std::string_view id) {
    if (root.id == id) {
        return &root;
    }
    for (const auto& child : root.children) {
        // ids are path-shaped, so only descend into matching prefixes
        if (id.size() > child->id.size() && id.substr(0, child->id.size()) == child->id && id[child->id.size()] == '/') {
            return findElement(*child, id);
        }
        if (child->id == id) {
            return child.get();
        }
    }
    return nullptr;
}

namespace {

using CloneMap = std::unordered_map<const ElementNode*, ElementPtr>;

ElementPtr copyNodes(const ElementNode& node, CloneMap& map) {
    auto copy = std::make_shared<ElementNode>(node);
    map[&node] = copy;
    for (auto& child : copy->children) {
        child = copyNodes(*child, map);
    }
    return copy;
}

void remap(std::weak_ptr<const ElementNode>& ref, const CloneMap& map) {
    if (auto target = ref.lock()) {
        if (auto it = map.find(target.get()); it != map.end()) {
            ref = it->second;
        }
    }
}

void remap(std::optional<PositionSpec>& pos, const CloneMap& map) {
    if (pos) {
        remap(pos->target, map);
    }
}

}  // namespace

ElementPtr cloneTree(const ElementNode& root) {
    CloneMap map;
    ElementPtr copy = copyNodes(root, map);
    for (auto& [original, node] : map) {
        remap(node->pos, map);
        remap(node->source, map);
        remap(node->target, map);
        if (node->step) {
            remap(node->step->target, map);
        }
    }
    return copy;
}

}  // namespace livediag::diagram
