#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "livediag/diagram/style.hpp"

namespace livediag::layout {

inline constexpr double kDefaultPadding = 5;
inline constexpr double kCanvasMargin = 10;
inline constexpr double kMarkerSize = 12;
inline constexpr double kDefaultLabelDistance = 5;
inline constexpr double kPlacementGap = 20;
/// Text extents are rounded up to this grid so layout sums stay exact.
inline constexpr double kGrid = 1.0 / 1024;

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct Point {
    double x = 0;
    double y = 0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct Size {
    double width = 0;
    double height = 0;
    friend bool operator==(const Size&, const Size&) = default;
};

struct Rect {
    double x = 0;
    double y = 0;
    double width = 0;
    double height = 0;

    Point center() const { return {x + width / 2, y + height / 2}; }
    double right() const { return x + width; }
    double bottom() const { return y + height; }
    friend bool operator==(const Rect&, const Rect&) = default;
};

struct Constraints {
    double minWidth = 0;
    double maxWidth = kUnbounded;
    double minHeight = 0;
    double maxHeight = kUnbounded;

    static Constraints unbounded() { return {}; }
    static Constraints tight(Size size) { return {size.width, size.width, size.height, size.height}; }
    Size clamp(Size size) const;
};

struct RoutedSegment {
    diagram::RouteStep::Mode mode = diagram::RouteStep::Mode::Line;
    /// line: [p0, p1]; axisAligned: [p0, bend1, bend2, p1]; bezier: [p0, c1, c2, p1]
    std::vector<Point> points;
};

struct LabelPlacement {
    double t = 0.5;
    double distance = kDefaultLabelDistance;
    Point onRoute;  // route point at t
    Point normal;   // unit normal, left of the travel direction
    Point center;   // onRoute + normal * distance; the label box edge touches it
};

struct RoutedConnection {
    Point start;
    Point end;
    std::vector<RoutedSegment> segments;
    std::vector<LabelPlacement> labels;  // in label child order
    std::string markerStart = "none";
    std::string markerEnd = "none";
};

struct LayoutedElement {
    std::string id;
    diagram::ElementKind kind = diagram::ElementKind::Rect;
    Rect box;
    diagram::AttributeMap attributes;  // visual attributes relevant to the kind
    std::vector<LayoutedElement> children;
    Span originSpan;

    // text
    std::vector<std::string> lines;
    double lineHeight = 0;
    double baseline = 0;  // first baseline, relative to box.y

    // connectionSegment: geometry; canvasConnection: [start anchor, end anchor]
    diagram::RouteStep::Mode segmentMode = diagram::RouteStep::Mode::Line;
    std::vector<Point> points;

    friend bool operator==(const LayoutedElement&, const LayoutedElement&) = default;
};

struct LayoutedDiagram {
    LayoutedElement root;
    Diagnostics diagnostics;
};

struct LayoutOptions {
    Point offset;                 // translates the whole result
    bool keepLayoutOnly = false;  // keep vbox/hbox nodes (for inspection)
};

/// Visual attributes kept in layouted output for a kind.
const std::vector<std::string>& visualAttributes(diagram::ElementKind kind);
/// Values filled in for visual attributes that resolve to nothing.
const diagram::AttributeMap& visualDefaults(diagram::ElementKind kind);

/// Perimeter point at parameter s in [0, 1): clockwise from the top-left
/// corner, normalized by the perimeter length.
Point perimeterPoint(const Rect& rect, double s);

/// Where the segment from the rectangle's center toward `toward` leaves it.
Point borderIntersection(const Rect& rect, Point toward);

/// Point and unit tangent of a segment at local parameter u in [0, 1].
Point segmentPoint(const RoutedSegment& segment, double u);
Point segmentTangent(const RoutedSegment& segment, double u);

/// Resolves route waypoints given as rpos(...) to the target's box.
using BoxLookup = std::function<std::optional<Rect>(const diagram::ElementNode&)>;

/// Routes `connection` between two placed boxes. Waypoints are in canvas
/// coordinates (`canvasOrigin` added). Label children are placed by t.
RoutedConnection routeConnection(const diagram::ElementNode& connection, const Rect& source, const Rect& target,
                                 const BoxLookup& boxes, Point canvasOrigin = {});

/// Measures a single element subtree.
Size measure(const diagram::Diagram& diagram, const diagram::ElementNode& element, const Constraints& constraints);

/// Lays `element` out with its top-left corner at `position`. For a canvas
/// the position is where its bounding box (including margin) starts.
LayoutedElement layout(const diagram::Diagram& diagram, const diagram::ElementNode& element, Point position,
                       Size assignedSize, Diagnostics* diagnostics = nullptr);

/// resolve styles, measure, lay out the root canvas with its origin at
/// options.offset, route connections, flatten. Elements with errors are
/// dropped and reported.
LayoutedDiagram layoutDiagram(const diagram::Diagram& diagram, const LayoutOptions& options = {});

/// Shifts every coordinate of the subtree by (dx, dy).
void translate(LayoutedElement& element, double dx, double dy);

/// Bounding box of the connection's points, labels and marker allowance.
Rect connectionBounds(const LayoutedElement& connection);

/// Canvas box: union of child boxes plus margin, or a zero box at the origin
/// when there are no children.
Rect canvasBounds(const std::vector<LayoutedElement>& children, Point origin, double margin = kCanvasMargin);

/// Finds an element by id in a layouted tree.
const LayoutedElement* findLayouted(const LayoutedElement& root, std::string_view id);
LayoutedElement* findLayouted(LayoutedElement& root, std::string_view id);

}  // namespace livediag::layout
