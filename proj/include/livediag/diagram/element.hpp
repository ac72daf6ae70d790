#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "livediag/lang/span.hpp"

namespace livediag::diagram {

enum class ElementKind {
    Rect,
    Ellipse,
    Path,
    Text,
    VBox,
    HBox,
    Canvas,
    CanvasElement,
    CanvasConnection,
    ConnectionSegment,
    Label,
};

const char* toString(ElementKind kind);
std::optional<ElementKind> parseElementKind(std::string_view name);

/// vbox and hbox only arrange their children; they vanish from layouted output.
inline bool isLayoutOnly(ElementKind kind) { return kind == ElementKind::VBox || kind == ElementKind::HBox; }

using AttrValue = std::variant<double, bool, std::string>;
using AttributeMap = std::map<std::string, AttrValue>;

std::string toString(const AttrValue& value);

struct ElementNode;
using ElementPtr = std::shared_ptr<ElementNode>;

/// `apos(x, y)` relative to the canvas origin, or `rpos(target, x, y)`
/// relative to the target's top-left corner.
struct PositionSpec {
    enum class Kind { Absolute, Relative };
    Kind kind = Kind::Absolute;
    double x = 0;
    double y = 0;
    std::weak_ptr<const ElementNode> target;
};

/// One step of a connection route. Unset `target` means the route end anchor.
struct RouteStep {
    enum class Mode { Line, AxisAligned, Bezier };
    Mode mode = Mode::Line;
    double fraction = 0.5;  // axisAligned: where the vertical run sits between the endpoints
    double c1x = 0, c1y = 0, c2x = 0, c2y = 0;  // bezier: c1 relative to segment start, c2 to segment end
    std::optional<PositionSpec> target;
};

const char* toString(RouteStep::Mode mode);

struct ElementNode {
    std::string id;
    ElementKind kind = ElementKind::Rect;
    AttributeMap localAttributes;
    std::set<std::string> classes;
    std::vector<ElementPtr> children;
    Span originSpan;

    // Layout inputs written by layout scope functions.
    std::optional<PositionSpec> pos;

    // canvasConnection: endpoints and optional perimeter parameters
    std::weak_ptr<const ElementNode> source;
    std::weak_ptr<const ElementNode> target;
    std::optional<double> startParam;
    std::optional<double> endParam;

    // connectionSegment
    std::optional<RouteStep> step;

    // Source locations of editable values, e.g. "pos", "width", "height",
    // "block", "layoutBlock", "start", "end", "t".
    std::map<std::string, Span> sourceRefs;

    std::optional<double> number(const std::string& name) const;
    std::optional<std::string> string(const std::string& name) const;
};

class IllegalChild : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Builds a detached node. Its id is the bare kind name until it is attached
/// with appendChild; children ids are derived from it.
ElementPtr createElement(ElementKind kind, AttributeMap attributes = {}, std::set<std::string> classes = {},
                         std::vector<ElementPtr> children = {}, Span originSpan = {});

/// Attaches `child` as the last child of `parent` and assigns the subtree ids
/// `parent.id + "/" + kind + n`, where n counts earlier siblings of the same
/// kind. Throws IllegalChild when the kind combination is not allowed.
void appendChild(ElementNode& parent, ElementPtr child);

bool isLegalChild(ElementKind parent, ElementKind child);

/// Recomputes ids below `node` from its current id.
void reassignIds(ElementNode& node);

/// Deep copy. References between nodes of the subtree (positions, connection
/// endpoints, route targets) point into the copy; outside references are kept.
ElementPtr cloneTree(const ElementNode& root);

/// Depth-first search by id.
const ElementNode* findElement(const ElementNode& root, std::string_view id);

template <typename Fn>
void forEachElement(const ElementNode& node, Fn&& fn) {
    fn(node);
    for (const auto& child : node.children) {
        forEachElement(*child, fn);
    }
}

}  // namespace livediag::diagram
