#include "livediag/edit/edit.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "livediag/lang/number_format.hpp"

namespace livediag::edit {

using diagram::ElementKind;
using diagram::ElementNode;
using layout::LayoutedElement;
using layout::Point;
using layout::Rect;

const char* toString(InteractionKind kind) {
    switch (kind) {
    case InteractionKind::MoveElement: return "moveElement";
    case InteractionKind::ResizeElement: return "resizeElement";
    case InteractionKind::MoveConnectionAnchor: return "moveConnectionAnchor";
    case InteractionKind::MoveLabel: return "moveLabel";
    }
    return "moveElement";
}

std::optional<InteractionKind> interactionKindFromString(std::string_view name) {
    for (auto kind : {InteractionKind::MoveElement, InteractionKind::ResizeElement,
                      InteractionKind::MoveConnectionAnchor, InteractionKind::MoveLabel}) {
        if (name == toString(kind)) {
            return kind;
        }
    }
    return std::nullopt;
}

double Slot::evaluate(const InteractionParams& params) const {
    double delta = 0;
    switch (quantity) {
    case Quantity::X: delta = params.dx; break;
    case Quantity::Y: delta = params.dy; break;
    case Quantity::Width: delta = params.dWidth; break;
    case Quantity::Height: delta = params.dHeight; break;
    case Quantity::Param: delta = params.dParam; break;
    }
    if (delta == 0) {
        return base;
    }
    double v = base + delta;
    switch (domain) {
    case Domain::Any:
        return v;
    case Domain::NonNegative:
        return std::max(0.0, v);
    case Domain::UnitOpen: {
        v -= std::floor(v);
        return v >= 1 ? 0.0 : v;
    }
    case Domain::UnitClosed:
        return std::clamp(v, 0.0, 1.0);
    }
    return v;
}

bool PlanEdit::active(const InteractionParams& params) const {
    for (const auto& piece : pieces) {
        if (piece.slot && piece.slot->evaluate(params) != piece.slot->base) {
            return true;
        }
    }
    return false;
}

std::string PlanEdit::render(const InteractionParams& params) const {
    if (!active(params)) {
        return original;
    }
    std::string out;
    for (const auto& piece : pieces) {
        out += piece.slot ? formatLiteral(piece.slot->evaluate(params)) : piece.text;
    }
    return out;
}

bool EditPlan::unchanged(const InteractionParams& params) const {
    return std::none_of(edits.begin(), edits.end(), [&](const PlanEdit& e) { return e.active(params); });
}

// -- planning -------------------------------------------------------------------

namespace {

bool pathTo(const ElementNode& node, std::string_view id, std::vector<const ElementNode*>& path) {
    path.push_back(&node);
    if (node.id == id) {
        return true;
    }
    for (const auto& child : node.children) {
        if (pathTo(*child, id, path)) {
            return true;
        }
    }
    path.pop_back();
    return false;
}

std::string lineIndent(const std::string& text, std::size_t offset) {
    std::size_t start = text.rfind('\n', offset == 0 ? 0 : offset - 1);
    start = start == std::string::npos ? 0 : start + 1;
    std::size_t end = start;
    while (end < text.size() && (text[end] == ' ' || text[end] == '\t')) {
        ++end;
    }
    return text.substr(start, end - start);
}

class Planner {
public:
    Planner(const SourceDocument& document, const PipelineResult& basis, InteractionKind kind)
        : text_(document.text), basis_(basis) {
        plan_.kind = kind;
    }

    EditPlan build(std::string_view elementId, std::optional<AnchorEnd> anchorEnd) {
        if (!basis_.diagram.root) {
            throw EditError("UnknownElement", "the document has no diagram");
        }
        std::vector<const ElementNode*> path;
        if (!pathTo(*basis_.diagram.root, elementId, path)) {
            throw EditError("UnknownElement", "no element '" + std::string(elementId) + "'");
        }
        switch (plan_.kind) {
        case InteractionKind::MoveElement:
            planMove(path);
            break;
        case InteractionKind::ResizeElement:
            planResize(path);
            break;
        case InteractionKind::MoveConnectionAnchor:
            planAnchor(path, anchorEnd.value_or(AnchorEnd::Start));
            break;
        case InteractionKind::MoveLabel:
            planLabel(path);
            break;
        }
        std::sort(plan_.edits.begin(), plan_.edits.end(),
                  [](const PlanEdit& a, const PlanEdit& b) { return a.span.start < b.span.start; });
        for (std::size_t i = 1; i < plan_.edits.size(); ++i) {
            if (plan_.edits[i].span.start < plan_.edits[i - 1].span.end) {
                throw EditError("NotEditable", "the values to rewrite overlap in the source", plan_.edits[i].span);
            }
        }
        for (auto& e : plan_.edits) {
            e.original = text_.substr(e.span.start, e.span.length());
        }
        return std::move(plan_);
    }

private:
    using Pieces = std::vector<TemplatePiece>;

    [[noreturn]] void notEditable(const std::string& message, std::optional<Span> span) const {
        throw EditError("NotEditable", message, span);
    }

    static std::optional<Span> ref(const ElementNode& node, const std::string& name) {
        auto it = node.sourceRefs.find(name);
        if (it == node.sourceRefs.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    static const ElementNode* nearest(const std::vector<const ElementNode*>& path, ElementKind kind) {
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
            if ((*it)->kind == kind) {
                return *it;
            }
        }
        return nullptr;
    }

    const LayoutedElement& layouted(const ElementNode& node) const {
        const auto* found = layout::findLayouted(basis_.layouted.root, node.id);
        if (!found) {
            notEditable("'" + node.id + "' has no layout to start from", node.originSpan);
        }
        return *found;
    }

    Slot slot(Quantity quantity, double base, Domain domain) {
        Slot s{quantity, base, domain};
        plan_.values[quantity] = s;
        return s;
    }

    void replace(Span literal, Slot s) {
        plan_.edits.push_back(PlanEdit{literal, {TemplatePiece{"", s}}, false, {}});
    }

    void insert(std::size_t offset, Pieces pieces) {
        plan_.edits.push_back(PlanEdit{Span{offset, offset}, std::move(pieces), true, {}});
    }

    static Pieces wrap(std::string before, Pieces inner, std::string after) {
        Pieces out{TemplatePiece{std::move(before), {}}};
        out.insert(out.end(), inner.begin(), inner.end());
        out.push_back(TemplatePiece{std::move(after), {}});
        return out;
    }

    // Adds `statement` as the first statement of the block literal at `block`.
    void insertStatement(Span block, Pieces statement) {
        if (block.start >= text_.size() || text_[block.start] != '{') {
            notEditable("the block is not written out in the source", block);
        }
        std::size_t after = block.start + 1;
        std::size_t eol = text_.find('\n', after);
        std::size_t lineEnd = eol == std::string::npos ? text_.size() : eol;
        std::size_t first = text_.find_first_not_of(" \t\r", after);
        bool restBlank = first == std::string::npos || first >= lineEnd;
        if (restBlank && eol != std::string::npos) {
            std::string indent = lineIndent(text_, block.start) + "  ";
            std::size_t next = text_.find_first_not_of(" \t\r\n", eol);
            if (next != std::string::npos && text_[next] != '}') {
                indent = lineIndent(text_, next);
            }
            insert(eol, wrap("\n" + indent, std::move(statement), ""));
        } else if (first != std::string::npos && text_[first] == '}') {
            insert(after, wrap(" ", std::move(statement), text_[after] == ' ' ? "" : " "));
        } else {
            insert(after, wrap(" ", std::move(statement), ";"));
        }
    }

    // Puts `field` into the layout block of a class, creating what is missing.
    void insertLayoutField(const ElementNode& element, Pieces field) {
        if (auto layoutBlock = ref(element, "layoutBlock")) {
            insertStatement(*layoutBlock, std::move(field));
        } else if (auto block = ref(element, "block")) {
            insertStatement(*block, wrap("layout { ", std::move(field), " }"));
        } else if (auto call = ref(element, "call"); call && call->end > 0 && text_[call->end - 1] == ')') {
            insert(call->end, wrap(" { layout { ", std::move(field), " } }"));
        } else {
            notEditable("cannot find where to add a layout block for '" + element.id + "'", element.originSpan);
        }
    }

    const ElementNode& canvasElement(const std::vector<const ElementNode*>& path) const {
        const ElementNode* element = nearest(path, ElementKind::CanvasElement);
        if (!element) {
            notEditable("'" + path.back()->id + "' is not part of a movable element", path.back()->originSpan);
        }
        const ElementNode* parent = nullptr;
        for (std::size_t i = 1; i < path.size(); ++i) {
            if (path[i] == element) {
                parent = path[i - 1];
            }
        }
        if (parent != basis_.diagram.root.get()) {
            notEditable("only elements placed on the top-level canvas can be edited", element->originSpan);
        }
        return *element;
    }

    void planMove(const std::vector<const ElementNode*>& path) {
        const ElementNode& element = canvasElement(path);
        plan_.targetElementId = element.id;
        const LayoutedElement& placed = layouted(element);
        if (element.pos) {
            auto x = ref(element, "pos.x");
            auto y = ref(element, "pos.y");
            if (!x || !y) {
                notEditable("the position of '" + element.id + "' is computed; only number literals can be rewritten",
                            ref(element, "pos").value_or(element.originSpan));
            }
            plan_.relative = element.pos->kind == diagram::PositionSpec::Kind::Relative;
            replace(*x, slot(Quantity::X, element.pos->x, Domain::Any));
            replace(*y, slot(Quantity::Y, element.pos->y, Domain::Any));
            return;
        }
        // the top-level canvas origin is (0, 0), so the box is the apos value
        Slot x = slot(Quantity::X, placed.box.x, Domain::Any);
        Slot y = slot(Quantity::Y, placed.box.y, Domain::Any);
        insertLayoutField(element, {{"pos = apos(", {}}, {"", x}, {", ", {}}, {"", y}, {")", {}}});
    }

    void planResize(const std::vector<const ElementNode*>& path) {
        const ElementNode& element = canvasElement(path);
        plan_.targetElementId = element.id;
        if (element.children.size() != 1) {
            notEditable("'" + element.id + "' has no single box to resize", element.originSpan);
        }
        const ElementNode& box = *element.children.front();
        plan_.sizeElementId = box.id;
        const LayoutedElement& placed = layouted(element);
        Pieces missing;
        for (auto [name, quantity, current] : {std::tuple{"width", Quantity::Width, placed.box.width},
                                               std::tuple{"height", Quantity::Height, placed.box.height}}) {
            std::string field = name;
            if (auto literal = ref(element, field + ".lit")) {
                replace(*literal, slot(quantity, box.number(field).value_or(current), Domain::NonNegative));
            } else if (auto expression = ref(element, field)) {
                notEditable("the " + field + " of '" + element.id + "' is computed; only number literals can be rewritten",
                            expression);
            } else {
                if (!missing.empty()) {
                    missing.push_back({"; ", {}});
                }
                missing.push_back({field + " = ", {}});
                missing.push_back({"", slot(quantity, current, Domain::NonNegative)});
            }
        }
        if (!missing.empty()) {
            insertLayoutField(element, std::move(missing));
        }
    }

    void planAnchor(const std::vector<const ElementNode*>& path, AnchorEnd end) {
        const ElementNode* connection = nearest(path, ElementKind::CanvasConnection);
        if (!connection) {
            notEditable("'" + path.back()->id + "' is not part of a connection", path.back()->originSpan);
        }
        plan_.targetElementId = connection->id;
        plan_.anchorEnd = end;
        bool start = end == AnchorEnd::Start;
        std::string name = start ? "start" : "end";
        auto param = start ? connection->startParam : connection->endParam;
        if (param) {
            auto literal = ref(*connection, name + ".lit");
            if (!literal) {
                notEditable("the " + name + " anchor of '" + connection->id + "' is computed", ref(*connection, name));
            }
            replace(*literal, slot(Quantity::Param, *param, Domain::UnitOpen));
            return;
        }
        const LayoutedElement& routed = layouted(*connection);
        auto endpoint = (start ? connection->source : connection->target).lock();
        const LayoutedElement* box = endpoint ? layout::findLayouted(basis_.layouted.root, endpoint->id) : nullptr;
        if (!box || routed.points.size() != 2) {
            notEditable("the connection '" + connection->id + "' has no routed " + name, connection->originSpan);
        }
        Slot s = slot(Quantity::Param, perimeterParameter(box->box, routed.points[start ? 0 : 1]), Domain::UnitOpen);
        Pieces value{{"", s}};
        auto call = ref(*connection, name + ".call");
        if (call && call->end > 0 && text_[call->end - 1] == ')') {
            insert(call->end - 1, value);
        } else if (!start && ref(*connection, "over.open")) {
            insert(ref(*connection, "over.open")->end, wrap(".line(end(", value, "))"));
        } else if (ref(*connection, "over")) {
            notEditable("the route of '" + connection->id + "' has no end() to put the anchor into",
                        ref(*connection, "over"));
        } else {
            Pieces over = start ? wrap("over = start(", value, ")") : wrap("over = start().line(end(", value, "))");
            if (auto block = ref(*connection, "withBlock")) {
                insertStatement(*block, std::move(over));
            } else {
                insert(connection->originSpan.end, wrap(" with { ", std::move(over), " }"));
            }
        }
    }

    void planLabel(const std::vector<const ElementNode*>& path) {
        const ElementNode* label = nearest(path, ElementKind::Label);
        if (!label) {
            notEditable("'" + path.back()->id + "' is not part of a label", path.back()->originSpan);
        }
        plan_.targetElementId = label->id;
        Slot s = slot(Quantity::Param, label->number("t").value_or(0.5), Domain::UnitClosed);
        if (auto literal = ref(*label, "t.lit")) {
            replace(*literal, s);
        } else if (auto expression = ref(*label, "t")) {
            notEditable("the position of this label is computed; only number literals can be rewritten", expression);
        } else if (Span call = label->originSpan; call.end > 0 && text_[call.end - 1] == ')') {
            insert(call.end - 1, {{", t = ", {}}, {"", s}});
        } else {
            notEditable("cannot find the label call in the source", label->originSpan);
        }
    }

    const std::string& text_;
    const PipelineResult& basis_;
    EditPlan plan_;
};

}  // namespace

EditPlan planInteraction(const SourceDocument& document, const PipelineResult& basis, std::string_view elementId,
                         InteractionKind kind, std::optional<AnchorEnd> anchorEnd) {
    return Planner(document, basis, kind).build(elementId, anchorEnd);
}

std::string materialize(const EditPlan& plan, const std::string& startText, const InteractionParams& params) {
    std::vector<TextEdit> edits;
    for (const auto& e : plan.edits) {
        edits.push_back(TextEdit{e.span, e.render(params)});
    }
    return applyEditsToText(startText, edits);
}

std::vector<TextEdit> editsBetween(const EditPlan& plan, const InteractionParams& from, const InteractionParams& to) {
    std::vector<TextEdit> edits;
    std::ptrdiff_t shift = 0;
    for (const auto& e : plan.edits) {
        std::string before = e.render(from);
        std::string after = e.render(to);
        std::size_t start = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(e.span.start) + shift);
        if (before != after) {
            edits.push_back(TextEdit{Span{start, start + before.size()}, after});
        }
        shift += static_cast<std::ptrdiff_t>(before.size()) - static_cast<std::ptrdiff_t>(e.span.length());
    }
    return edits;
}

double perimeterParameter(const Rect& r, Point p) {
    double perimeter = 2 * (r.width + r.height);
    if (perimeter <= 0) {
        return 0;
    }
    double x = std::clamp(p.x, r.x, r.right());
    double y = std::clamp(p.y, r.y, r.bottom());
    // distance to each edge; ties go to the earlier edge in clockwise order
    double top = std::abs(y - r.y);
    double right = std::abs(r.right() - x);
    double bottom = std::abs(r.bottom() - y);
    double left = std::abs(x - r.x);
    double best = std::min({top, right, bottom, left});
    double d = 0;
    if (best == top) {
        d = x - r.x;
    } else if (best == right) {
        d = r.width + (y - r.y);
    } else if (best == bottom) {
        d = r.width + r.height + (r.right() - x);
    } else {
        d = 2 * r.width + r.height + (r.bottom() - y);
    }
    double s = d / perimeter;
    return s >= 1 ? 0.0 : s;
}

// -- prediction -----------------------------------------------------------------

namespace {

// Increment with from + d == to when some double achieves that.
double exactStep(double from, double to) {
    double d = to - from;
    for (int i = 0; i < 8 && from + d != to; ++i) {
        d = std::nextafter(d, from + d < to ? INFINITY : -INFINITY);
    }
    return d;
}

bool sameExceptGeometry(const LayoutedElement& a, const LayoutedElement& b) {
    return a.id == b.id && a.kind == b.kind && a.attributes == b.attributes && a.lines == b.lines &&
           a.lineHeight == b.lineHeight && a.baseline == b.baseline && a.segmentMode == b.segmentMode &&
           a.points == b.points && a.children.size() == b.children.size();
}

void diffInto(const LayoutedElement& from, const LayoutedElement& to, PredictionDelta& delta) {
    if (from.kind == ElementKind::CanvasConnection && from.id == to.id && to.kind == from.kind) {
        if (!(from == to)) {
            delta.rerouted.push_back(to);
        }
        return;
    }
    if (!sameExceptGeometry(from, to)) {
        delta.structural = true;
        return;
    }
    if (!(from.box == to.box)) {
        delta.moved.push_back(ElementDelta{to.id, exactStep(from.box.x, to.box.x), exactStep(from.box.y, to.box.y),
                                           exactStep(from.box.width, to.box.width),
                                           exactStep(from.box.height, to.box.height)});
    }
    for (std::size_t i = 0; i < from.children.size(); ++i) {
        diffInto(from.children[i], to.children[i], delta);
    }
}

void applyInto(LayoutedElement& element, const std::unordered_map<std::string, const ElementDelta*>& moved,
               const std::unordered_map<std::string, const LayoutedElement*>& rerouted) {
    if (auto it = rerouted.find(element.id); it != rerouted.end()) {
        element = *it->second;
        return;
    }
    if (auto it = moved.find(element.id); it != moved.end()) {
        element.box.x += it->second->dx;
        element.box.y += it->second->dy;
        element.box.width += it->second->dWidth;
        element.box.height += it->second->dHeight;
    }
    for (auto& child : element.children) {
        applyInto(child, moved, rerouted);
    }
}

ElementNode* findMutable(const diagram::ElementPtr& root, const std::string& id) {
    if (id.empty()) {
        return nullptr;
    }
    return const_cast<ElementNode*>(diagram::findElement(*root, id));
}

}  // namespace

PredictionDelta diffLayouts(const LayoutedElement& from, const LayoutedElement& to) {
    PredictionDelta delta;
    diffInto(from, to, delta);
    if (delta.structural) {
        delta.moved.clear();
        delta.rerouted.clear();
    }
    return delta;
}

bool applyDelta(LayoutedElement& root, const PredictionDelta& delta) {
    if (delta.structural) {
        return false;
    }
    std::unordered_map<std::string, const ElementDelta*> moved;
    for (const auto& m : delta.moved) {
        moved[m.id] = &m;
    }
    std::unordered_map<std::string, const LayoutedElement*> rerouted;
    for (const auto& r : delta.rerouted) {
        rerouted[r.id] = &r;
    }
    applyInto(root, moved, rerouted);
    return true;
}

Predictor::Predictor(std::shared_ptr<const PipelineResult> basis, const EditPlan& plan)
    : basis_(std::move(basis)), plan_(plan) {
    copy_ = diagram::cloneDiagram(basis_->diagram);
    if (!copy_.root) {
        return;
    }
    root_ = std::const_pointer_cast<ElementNode>(copy_.root);
    ElementNode* target = findMutable(root_, plan_.targetElementId);
    if (!target) {
        return;
    }
    // the size node sits at the same path below every twin
    bool sizeBelow = !plan_.sizeElementId.empty() && plan_.sizeElementId.rfind(target->id, 0) == 0;
    std::string sizeSuffix = sizeBelow ? plan_.sizeElementId.substr(target->id.size()) : "";
    auto add = [&](ElementNode* node) {
        Subject s{node, *node, nullptr, {}};
        if (plan_.kind == InteractionKind::ResizeElement) {
            s.sizeNode = node == target ? findMutable(root_, plan_.sizeElementId)
                         : sizeBelow      ? findMutable(root_, node->id + sizeSuffix)
                                          : nullptr;
            if (s.sizeNode) {
                s.sizeSnapshot = s.sizeNode->localAttributes;
            }
        }
        subjects_.push_back(std::move(s));
    };
    add(target);
    diagram::forEachElement(*root_, [&](const ElementNode& n) {
        if (&n != target && n.kind == target->kind && n.originSpan == target->originSpan &&
            n.sourceRefs == target->sourceRefs) {
            add(const_cast<ElementNode*>(&n));
        }
    });
}

layout::LayoutedDiagram Predictor::predict(const InteractionParams& params) {
    if (subjects_.empty()) {
        return basis_->layouted;
    }
    // the values the edited text would give: literals follow the slots, and
    // an inactive insertion leaves the field unset as in the start text
    auto value = [&](Quantity q) -> std::optional<double> {
        for (const auto& e : plan_.edits) {
            for (const auto& piece : e.pieces) {
                if (piece.slot && piece.slot->quantity == q) {
                    if (e.insertion && !e.active(params)) {
                        return std::nullopt;
                    }
                    return piece.slot->evaluate(params);
                }
            }
        }
        return std::nullopt;
    };
    for (auto& subject : subjects_) {
        ElementNode* node = subject.node;
        const ElementNode& snapshot = subject.snapshot;
        switch (plan_.kind) {
        case InteractionKind::MoveElement: {
            auto x = value(Quantity::X);
            auto y = value(Quantity::Y);
            node->pos = snapshot.pos;
            if (x && y) {
                diagram::PositionSpec pos;
                pos.kind =
                    plan_.relative ? diagram::PositionSpec::Kind::Relative : diagram::PositionSpec::Kind::Absolute;
                pos.x = *x;
                pos.y = *y;
                if (plan_.relative && snapshot.pos) {
                    pos.target = snapshot.pos->target;
                }
                node->pos = pos;
            } else if (plan_.edits.size() == 1 && plan_.edits.front().insertion) {
                node->pos.reset();
            }
            break;
        }
        case InteractionKind::ResizeElement:
            if (subject.sizeNode) {
                subject.sizeNode->localAttributes = subject.sizeSnapshot;
                for (auto [name, q] : {std::pair{"width", Quantity::Width}, std::pair{"height", Quantity::Height}}) {
                    if (auto v = value(q)) {
                        subject.sizeNode->localAttributes[name] = *v;
                    } else if (plan_.values.count(q)) {
                        subject.sizeNode->localAttributes.erase(name);
                    }
                }
            }
            break;
        case InteractionKind::MoveConnectionAnchor: {
            auto v = value(Quantity::Param);
            (plan_.anchorEnd == AnchorEnd::End ? node->endParam : node->startParam) = v;
            break;
        }
        case InteractionKind::MoveLabel:
            node->localAttributes = snapshot.localAttributes;
            node->localAttributes["t"] = value(Quantity::Param).value_or(plan_.values[Quantity::Param].base);
            break;
        }
    }
    return layout::layoutDiagram(copy_);
}

PredictionDelta Predictor::delta(const InteractionParams& params) {
    return diffLayouts(basis_->layouted.root, predict(params).root);
}

// -- interaction session --------------------------------------------------------

InteractionSession::InteractionSession(SourceDocument start, std::shared_ptr<const PipelineResult> basis, EditPlan plan)
    : start_(std::move(start)), document_(start_), plan_(std::move(plan)) {
    predictor_ = std::make_unique<Predictor>(std::move(basis), plan_);
    current_.kind = plan_.kind;
    lastRendered_ = current_;
}

InteractionSession InteractionSession::begin(const SourceDocument& document,
                                             std::shared_ptr<const PipelineResult> basis, std::string_view elementId,
                                             InteractionKind kind, std::optional<AnchorEnd> anchorEnd) {
    EditPlan plan = planInteraction(document, *basis, elementId, kind, anchorEnd);
    return InteractionSession(document, std::move(basis), std::move(plan));
}

ExecutionRequest InteractionSession::request(const InteractionParams& params) {
    inFlight_ = params;
    return ExecutionRequest{document_, params};
}

UpdateOutcome InteractionSession::update(const SourceDocument& current, const InteractionParams& params) {
    if (ended_) {
        throw EditError("NoActiveInteraction", "the interaction has already ended");
    }
    if (params.kind != plan_.kind) {
        throw EditError("InvalidParams", std::string("this interaction is a ") + toString(plan_.kind) + ", not a " +
                                             toString(params.kind));
    }
    for (double v : {params.dx, params.dy, params.dWidth, params.dHeight, params.dParam}) {
        if (!std::isfinite(v)) {
            throw EditError("InvalidParams", "interaction parameters must be finite numbers");
        }
    }
    if (current.version != document_.version || current.text != document_.text) {
        throw EditError("SessionStale", "the document changed outside of the interaction");
    }
    UpdateOutcome outcome;
    outcome.edits = editsBetween(plan_, current_, params);
    if (!outcome.edits.empty()) {
        document_ = applyEdits(document_, outcome.edits);
    }
    current_ = params;
    outcome.document = document_;
    outcome.prediction = predictor_->delta(params);
    if (!inFlight_) {
        outcome.execute = request(params);
    }
    return outcome;
}

RenderOutcome InteractionSession::onFullRenderComplete(const InteractionParams& rendered,
                                                       std::shared_ptr<const PipelineResult> result) {
    RenderOutcome outcome;
    lastRendered_ = rendered;
    predictor_ = std::make_unique<Predictor>(std::move(result), plan_);
    if (!(current_ == rendered)) {
        outcome.catchUp = predictor_->delta(current_);
        outcome.execute = request(current_);
    } else {
        inFlight_.reset();
    }
    outcome.finished = finished();
    return outcome;
}

EndOutcome InteractionSession::end() {
    EndOutcome outcome;
    if (ended_) {
        outcome.finished = finished();
        return outcome;
    }
    ended_ = true;
    if (!inFlight_) {
        outcome.execute = request(current_);
    }
    return outcome;
}

}  // namespace livediag::edit
