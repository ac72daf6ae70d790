#include "livediag/diagram/style.hpp"

#include <algorithm>
#include <array>

namespace livediag::diagram {

namespace {

constexpr std::array<std::string_view, 12> kVisualAttributes = {
    "fill",       "stroke",    "strokeWidth", "strokeDash", "fontSize",    "fontFamily",
    "fontWeight", "fontStyle", "color",       "opacity",    "markerStart", "markerEnd",
};

constexpr std::array<std::string_view, 7> kLayoutAttributes = {
    "width", "height", "padding", "align", "margin", "t", "distance",
};

constexpr std::array<std::string_view, 4> kInheritedAttributes = {"fontFamily", "fontSize", "stroke", "color"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& names, std::string_view name) {
    return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

bool isKnownAttribute(std::string_view name) {
    return contains(kVisualAttributes, name) || contains(kLayoutAttributes, name);
}

bool isInheritedAttribute(std::string_view name) { return contains(kInheritedAttributes, name); }

bool isLayoutAttribute(std::string_view name) { return contains(kLayoutAttributes, name); }

const AttributeMap& inheritedDefaults() {
    static const AttributeMap defaults = {
        {"color", std::string("#000000")},
        {"fontFamily", std::string("sans")},
        {"fontSize", 14.0},
        {"stroke", std::string("#000000")},
    };
    return defaults;
}

bool Selector::matches(const ElementNode& element) const {
    switch (kind) {
    case Kind::Any: return true;
    case Kind::Type: return name == toString(element.kind);
    case Kind::Class: return element.classes.count(name) > 0;
    }
    return false;
}

Specificity StyleRule::specificity() const {
    Specificity s;
    for (const auto& selector : selectorChain) {
        if (selector.kind == Selector::Kind::Class) {
            ++s.classCount;
        } else if (selector.kind == Selector::Kind::Type) {
            ++s.typeCount;
        }
    }
    s.sourceIndex = sourceIndex;
    return s;
}

bool StyleRule::matches(const ElementNode& element, const std::vector<const ElementNode*>& ancestors) const {
    if (selectorChain.empty() || !selectorChain.back().matches(element)) {
        return false;
    }
    // remaining selectors must match ancestors, nearest first, in order
    auto ancestor = ancestors.rbegin();
    for (auto selector = selectorChain.rbegin() + 1; selector != selectorChain.rend(); ++selector) {
        while (ancestor != ancestors.rend() && !selector->matches(**ancestor)) {
            ++ancestor;
        }
        if (ancestor == ancestors.rend()) {
            return false;
        }
        ++ancestor;
    }
    return true;
}

namespace {

std::vector<const StyleRule*> orderRules(const std::vector<StyleRule>& rules) {
    std::vector<const StyleRule*> ordered;
    ordered.reserve(rules.size());
    for (const auto& rule : rules) {
        ordered.push_back(&rule);
    }
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const StyleRule* a, const StyleRule* b) {
                         if (a->layer != b->layer) {
                             return a->layer < b->layer;
                         }
                         return a->specificity() < b->specificity();
                     });
    return ordered;
}

AttributeMap cascade(const std::vector<const StyleRule*>& orderedRules, const ElementNode& element,
                     const std::vector<const ElementNode*>& ancestors, const AttributeMap& parentResolved) {
    AttributeMap result;
    for (const StyleRule* rule : orderedRules) {
        if (rule->matches(element, ancestors)) {
            for (const auto& [name, value] : rule->attributes) {
                result[name] = value;
            }
        }
    }
    for (const auto& [name, value] : element.localAttributes) {
        result[name] = value;
    }
    for (const auto& [name, value] : parentResolved) {
        if (isInheritedAttribute(name) && !result.count(name)) {
            result[name] = value;
        }
    }
    return result;
}

}  // namespace

AttributeMap matchStyles(const Diagram& diagram, const ElementNode& element,
                         const std::vector<const ElementNode*>& ancestors) {
    auto ordered = orderRules(diagram.styleRules);
    AttributeMap inherited = inheritedDefaults();
    std::vector<const ElementNode*> prefix;
    for (const ElementNode* ancestor : ancestors) {
        inherited = cascade(ordered, *ancestor, prefix, inherited);
        prefix.push_back(ancestor);
    }
    return cascade(ordered, element, ancestors, inherited);
}

StyleResolver::StyleResolver(const Diagram& diagram) : diagram_(diagram), orderedRules_(orderRules(diagram.styleRules)) {
    if (diagram.root) {
        std::vector<const ElementNode*> ancestors;
        resolveSubtree(*diagram.root, ancestors, &inheritedDefaults());
    }
}

void StyleResolver::resolveSubtree(const ElementNode& node, std::vector<const ElementNode*>& ancestors,
                                   const AttributeMap* parentResolved) {
    auto [it, inserted] = resolved_.emplace(&node, cascade(orderedRules_, node, ancestors, *parentResolved));
    ancestors.push_back(&node);
    for (const auto& child : node.children) {
        resolveSubtree(*child, ancestors, &it->second);
    }
    ancestors.pop_back();
}

const AttributeMap& StyleResolver::resolved(const ElementNode& element) const {
    static const AttributeMap empty;
    auto it = resolved_.find(&element);
    return it == resolved_.end() ? empty : it->second;
}

Diagram cloneDiagram(const Diagram& diagram) {
    Diagram copy = diagram;
    if (diagram.root) {
        copy.root = cloneTree(*diagram.root);
    }
    return copy;
}

}  // namespace livediag::diagram
