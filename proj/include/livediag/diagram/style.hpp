#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "livediag/diagram/element.hpp"
#include "livediag/diagram/font.hpp"

namespace livediag::diagram {

struct Selector {
    enum class Kind { Type, Class, Any };
    Kind kind = Kind::Any;
    std::string name;

    bool matches(const ElementNode& element) const;
};

struct Specificity {
    int classCount = 0;
    int typeCount = 0;
    std::size_t sourceIndex = 0;

    friend auto operator<=>(const Specificity&, const Specificity&) = default;
};

/// A rule whose selectors are joined by descendant combinators: the last
/// selector matches the element, earlier ones match ancestors in order.
/// Rules in a lower layer always lose to rules in a higher one; layer 0 holds
/// the built-in look of generated elements.
struct StyleRule {
    std::vector<Selector> selectorChain;
    AttributeMap attributes;
    std::size_t sourceIndex = 0;
    Span originSpan;
    int layer = 1;

    Specificity specificity() const;
    bool matches(const ElementNode& element, const std::vector<const ElementNode*>& ancestors) const;
};

/// Element tree, style rules in source order, and available fonts.
struct Diagram {
    std::shared_ptr<const ElementNode> root;
    std::vector<StyleRule> styleRules;
    std::vector<FontMetrics> fonts;
};

/// Copy whose element tree can be modified without touching the original.
Diagram cloneDiagram(const Diagram& diagram);

/// Attributes understood by layout and rendering.
bool isKnownAttribute(std::string_view name);
/// fontFamily, fontSize, stroke, and color flow from ancestors when unset.
bool isInheritedAttribute(std::string_view name);
/// Attributes consumed by layout and dropped from layouted output.
bool isLayoutAttribute(std::string_view name);
/// Root values for inherited attributes.
const AttributeMap& inheritedDefaults();

/// Resolved attributes of `element`: matching rules in ascending specificity,
/// then local attributes, then inherited values from the nearest ancestor for
/// inheritable attributes that are still unset. `ancestors` runs from the root
/// to the direct parent.
AttributeMap matchStyles(const Diagram& diagram, const ElementNode& element,
                         const std::vector<const ElementNode*>& ancestors);

/// Resolves a whole tree once, caching by node.
class StyleResolver {
public:
    explicit StyleResolver(const Diagram& diagram);

    const AttributeMap& resolved(const ElementNode& element) const;

private:
    void resolveSubtree(const ElementNode& node, std::vector<const ElementNode*>& ancestors,
                        const AttributeMap* parentResolved);

    const Diagram& diagram_;
    std::vector<const StyleRule*> orderedRules_;
    std::unordered_map<const ElementNode*, AttributeMap> resolved_;
};

}  // namespace livediag::diagram
