#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "livediag/layout/layout.hpp"

namespace livediag::render {

inline constexpr int kRenderModelSchemaVersion = 1;

/// Standalone SVG 1.1 document. One <g data-id="..."> per layouted element in
/// tree order; numbers use formatNumber. Pure and byte-deterministic.
std::string renderSvg(const layout::LayoutedDiagram& layouted);

/// JSON tree mirroring the layouted elements, for the interactive view:
/// {"schemaVersion": 1, "viewBox": {...}, "root": node}
nlohmann::json toRenderModel(const layout::LayoutedDiagram& layouted);
nlohmann::json toRenderModel(const layout::LayoutedElement& element);

class RenderModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inverse of toRenderModel. Throws RenderModelError on schema violations.
layout::LayoutedElement fromRenderModel(const nlohmann::json& model);
/// Inverse of the node-level toRenderModel.
layout::LayoutedElement elementFromRenderModel(const nlohmann::json& node);

/// Schema violations of a render model, empty when valid.
std::vector<std::string> validateRenderModel(const nlohmann::json& model);

/// Polygon or polyline points of an end marker whose tip sits at `tip` and
/// which points along unit vector `direction`. Empty for "none".
struct MarkerShape {
    std::vector<std::vector<layout::Point>> strokes;  // open polylines
    std::vector<layout::Point> polygon;               // closed outline, may be empty
    bool filled = false;                              // polygon filled with the stroke color
};
MarkerShape markerShape(const std::string& marker, layout::Point tip, layout::Point direction);

}  // namespace livediag::render
