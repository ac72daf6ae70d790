#include "livediag/uml/class_diagram.hpp"

#include <cctype>
#include <map>
#include <set>

#include "livediag/diagram/font.hpp"
#include "livediag/lang/number_format.hpp"

namespace livediag::uml {

using diagram::AttrValue;
using diagram::ElementKind;
using diagram::ElementNode;
using diagram::PositionSpec;
using diagram::RouteStep;
using diagram::Selector;
using diagram::StyleRule;
using interp::CallContext;
using interp::ElementPtr;
using interp::Interpreter;
using interp::NativeFn;
using interp::ObjectPtr;
using interp::RuntimeError;
using interp::Value;
using interp::ValueKind;
using Bindings = std::vector<std::pair<std::string, Value>>;

const char* toString(Marker marker) {
    switch (marker) {
    case Marker::None: return "none";
    case Marker::Arrow: return "arrow";
    case Marker::Cross: return "cross";
    case Marker::Diamond: return "diamond";
    case Marker::FilledDiamond: return "filledDiamond";
    case Marker::Triangle: return "triangle";
    }
    return "none";
}

const std::vector<AssociationStyle>& associationTable() {
    static const std::vector<AssociationStyle> table = {
        {"--", Marker::None, Marker::None, false},
        {"-->", Marker::None, Marker::Arrow, false},
        {"<--", Marker::Arrow, Marker::None, false},
        {"<-->", Marker::Arrow, Marker::Arrow, false},
        {"!--", Marker::Cross, Marker::None, false},
        {"--!", Marker::None, Marker::Cross, false},
        {"<>--", Marker::Diamond, Marker::None, false},
        {"--<>", Marker::None, Marker::Diamond, false},
        {"*--", Marker::FilledDiamond, Marker::None, false},
        {"--*", Marker::None, Marker::FilledDiamond, false},
        {"extends", Marker::None, Marker::Triangle, false},
        {"implements", Marker::None, Marker::Triangle, true},
    };
    return table;
}

namespace {

struct ClassInfo {
    ElementPtr element;
    ElementPtr box;
    ElementPtr attributes;  // row container of the attribute (or literal) compartment
    ElementPtr methods;     // null for enums
};

struct RouteSpec {
    std::optional<double> startParam;
    std::optional<Span> startLiteral;
    Span startSpan;
    std::vector<RouteStep> steps;
    std::optional<double> endParam;
    std::optional<Span> endLiteral;
    Span endSpan;
    bool closed = false;
    bool endCall = false;  // closed by an end(...) marker
};

struct EndSpec {
    std::optional<double> param;
    std::optional<Span> literal;
    Span span;
};

struct State {
    ElementPtr canvas;  // set while a diagram block runs
    std::vector<StyleRule> rules;
    std::size_t nextRuleIndex = 0;
    int nextScope = 0;
    std::map<const ElementNode*, ClassInfo> classes;
    std::set<const ElementNode*> connections;
};

using StatePtr = std::shared_ptr<State>;

// -- small helpers ------------------------------------------------------------

Selector typeSelector(const std::string& name) { return Selector{Selector::Kind::Type, name}; }
Selector classSelector(const std::string& name) { return Selector{Selector::Kind::Class, name}; }

std::vector<StyleRule> builtinRules() {
    auto rule = [](std::vector<Selector> chain, diagram::AttributeMap attributes) {
        StyleRule r;
        r.selectorChain = std::move(chain);
        r.attributes = std::move(attributes);
        r.layer = 0;
        return r;
    };
    std::vector<StyleRule> rules = {
        rule({classSelector(classes::kBox)}, {{"fill", std::string("#ffffff")}, {"padding", 0.0}}),
        rule({classSelector(classes::kHeader)}, {{"fill", std::string("none")}}),
        rule({classSelector(classes::kAttributes)}, {{"fill", std::string("none")}}),
        rule({classSelector(classes::kMethods)}, {{"fill", std::string("none")}}),
        rule({classSelector(classes::kLiterals)}, {{"fill", std::string("none")}}),
        rule({classSelector(classes::kName)}, {{"fontWeight", std::string("bold")}}),
        rule({classSelector(classes::kAbstract), classSelector(classes::kName)}, {{"fontStyle", std::string("italic")}}),
        rule({classSelector(classes::kConnection)}, {{"fill", std::string("none")}}),
    };
    for (std::size_t i = 0; i < rules.size(); ++i) {
        rules[i].sourceIndex = i;
    }
    return rules;
}

bool isIdentifier(const std::string& name) {
    if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) {
        return false;
    }
    for (char c : name) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
            return false;
        }
    }
    return name != "true" && name != "false" && name != "null";
}

AttrValue toAttr(const Value& value, Span span, const std::string& name) {
    switch (value.kind()) {
    case ValueKind::Number: return value.asNumber();
    case ValueKind::Bool: return value.asBool();
    case ValueKind::Str: return value.asString();
    default:
        throw RuntimeError("TypeMismatch",
                           "attribute '" + name + "' must be a number, bool or string, got " + interp::toString(value.kind()),
                           span);
    }
}

ElementPtr makeText(const std::string& text, std::set<std::string> classNames, Span origin) {
    return diagram::createElement(ElementKind::Text, {{"text", text}}, std::move(classNames), {}, origin);
}

void requireDiagram(const State& state, const char* what) {
    if (!state.canvas) {
        throw RuntimeError("NotInDiagram", std::string(what) + " can only be used inside classDiagram");
    }
}

const ClassInfo& classArg(const State& state, const CallContext& ctx, const std::vector<Value>& args, std::size_t i) {
    if (i < args.size() && args[i].kind() == ValueKind::Element) {
        auto it = state.classes.find(args[i].asElement().get());
        if (it != state.classes.end()) {
            return it->second;
        }
    }
    std::string got = i < args.size() ? interp::display(args[i]) : "nothing";
    throw RuntimeError("TypeMismatch", "expected a class, got " + got, ctx.argSpan(i));
}

void checkUnit(double v, bool closedAtOne, Span span, const char* what) {
    bool ok = v >= 0 && (closedAtOne ? v <= 1 : v < 1);
    if (!ok) {
        throw RuntimeError("InvalidRoute",
                           std::string(what) + " must be in [0, 1" + (closedAtOne ? "]" : ")") + ", got " + formatNumber(v),
                           span);
    }
}

void setRef(ElementNode& element, const std::string& name, std::optional<Span> span) {
    if (span) {
        element.sourceRefs[name] = *span;
    } else {
        element.sourceRefs.erase(name);
    }
}

// -- points -------------------------------------------------------------------

Value apos(CallContext& ctx, std::vector<Value>& args) {
    interp::expectArgCount(ctx, args, 2, 2, "apos");
    auto point = interp::makeObject("point");
    point->set("x", interp::expectNumber(ctx, args, 0, "x"), ctx.argSpan(0), ctx.literalSpan(0));
    point->set("y", interp::expectNumber(ctx, args, 1, "y"), ctx.argSpan(1), ctx.literalSpan(1));
    return point;
}

NativeFn rposNative(StatePtr state) {
    return [state](CallContext& ctx, std::vector<Value>& args) -> Value {
        interp::expectArgCount(ctx, args, 3, 3, "rpos");
        const ClassInfo& target = classArg(*state, ctx, args, 0);
        auto point = interp::makeObject("rpos");
        point->set("target", target.element, ctx.argSpan(0));
        point->set("x", interp::expectNumber(ctx, args, 1, "dx"), ctx.argSpan(1), ctx.literalSpan(1));
        point->set("y", interp::expectNumber(ctx, args, 2, "dy"), ctx.argSpan(2), ctx.literalSpan(2));
        return point;
    };
}

std::optional<PositionSpec> toPosition(const Value& value) {
    if (value.kind() != ValueKind::Object) {
        return std::nullopt;
    }
    const auto& object = *value.asObject();
    PositionSpec pos;
    if (object.tag == "point") {
        pos.kind = PositionSpec::Kind::Absolute;
    } else if (object.tag == "rpos") {
        pos.kind = PositionSpec::Kind::Relative;
        pos.target = object.get("target").asElement();
    } else {
        return std::nullopt;
    }
    pos.x = object.get("x").asNumber();
    pos.y = object.get("y").asNumber();
    return pos;
}

Value fromPosition(const PositionSpec& pos) {
    if (pos.kind == PositionSpec::Kind::Absolute) {
        auto point = interp::makeObject("point");
        point->set("x", pos.x);
        point->set("y", pos.y);
        return point;
    }
    auto point = interp::makeObject("rpos");
    if (auto target = pos.target.lock()) {
        point->set("target", std::const_pointer_cast<ElementNode>(target));
    }
    point->set("x", pos.x);
    point->set("y", pos.y);
    return point;
}

// -- styles -------------------------------------------------------------------

void warnUnknownAttribute(Interpreter& interp, const std::string& name, Span span) {
    interp.report(Diagnostic{Severity::Warning, span, "UnknownAttribute", "unknown style attribute '" + name + "'"});
}

diagram::AttributeMap collectAttributes(Interpreter& interp, const interp::Object& target) {
    diagram::AttributeMap attributes;
    for (const auto& field : target.fields) {
        if (field.value.kind() == ValueKind::Function) {
            continue;
        }
        if (!diagram::isKnownAttribute(field.name)) {
            warnUnknownAttribute(interp, field.name, field.valueSpan);
        }
        attributes[field.name] = toAttr(field.value, field.valueSpan, field.name);
    }
    return attributes;
}

Bindings ruleBuilders(StatePtr state, std::vector<Selector> prefix);

NativeFn ruleNative(StatePtr state, std::vector<Selector> prefix, bool byType) {
    return [state, prefix, byType](CallContext& ctx, std::vector<Value>& args) -> Value {
        const char* name = byType ? "type" : "cls";
        interp::expectArgCount(ctx, args, 2, 2, name);
        const std::string& selectorName = interp::expectString(ctx, args, 0, byType ? "element kind" : "class name");
        if (byType && !diagram::parseElementKind(selectorName)) {
            throw RuntimeError("UnknownElementKind", "unknown element kind '" + selectorName + "'", ctx.argSpan(0));
        }
        auto chain = prefix;
        chain.push_back(byType ? typeSelector(selectorName) : classSelector(selectorName));
        StyleRule rule;
        rule.sourceIndex = state->nextRuleIndex++;
        rule.originSpan = ctx.callSpan;
        auto target = interp::makeObject();
        ctx.interpreter.evalBlockWithTarget(args[1], target, ruleBuilders(state, chain));
        rule.selectorChain = std::move(chain);
        rule.attributes = collectAttributes(ctx.interpreter, *target);
        state->rules.push_back(std::move(rule));
        return Value{};
    };
}

Bindings ruleBuilders(StatePtr state, std::vector<Selector> prefix) {
    return {
        {"cls", interp::makeNative("cls", ruleNative(state, prefix, false))},
        {"type", interp::makeNative("type", ruleNative(state, prefix, true))},
    };
}

// `styles { ... }` on `styled`; nested rules are scoped beneath it unless
// `scoped` is false (the diagram root).
NativeFn stylesNative(StatePtr state, ElementPtr styled, bool scoped) {
    return [state, styled, scoped](CallContext& ctx, std::vector<Value>& args) -> Value {
        interp::expectArgCount(ctx, args, 1, 1, "styles");
        std::vector<Selector> prefix;
        if (scoped) {
            std::string scopeClass = "scope" + std::to_string(state->nextScope++);
            styled->classes.insert(scopeClass);
            prefix.push_back(classSelector(scopeClass));
        }
        auto target = interp::makeObject();
        ctx.interpreter.evalBlockWithTarget(args[0], target, ruleBuilders(state, prefix));
        for (auto& [name, value] : collectAttributes(ctx.interpreter, *target)) {
            styled->localAttributes[name] = std::move(value);
        }
        return Value{};
    };
}

// -- layout -------------------------------------------------------------------

NativeFn layoutNative(ClassInfo info) {
    return [info](CallContext& ctx, std::vector<Value>& args) -> Value {
        interp::expectArgCount(ctx, args, 1, 1, "layout");
        auto target = interp::makeObject();
        ctx.interpreter.evalBlockWithTarget(args[0], target);
        ElementNode& element = *info.element;
        element.sourceRefs["layoutBlock"] = ctx.argSpan(0);
        for (const auto& field : target->fields) {
            if (field.name == "pos") {
                auto pos = toPosition(field.value);
                if (!pos) {
                    throw RuntimeError("TypeMismatch", "pos must be apos(x, y) or rpos(element, dx, dy), got " +
                                                           interp::display(field.value),
                                       field.valueSpan);
                }
                element.pos = pos;
                element.sourceRefs["pos"] = field.valueSpan;
                const auto& point = *field.value.asObject();
                setRef(element, "pos.x", point.find("x")->literalSpan);
                setRef(element, "pos.y", point.find("y")->literalSpan);
            } else if (field.name == "width" || field.name == "height") {
                if (!field.value.isNumber() || field.value.asNumber() < 0) {
                    throw RuntimeError("TypeMismatch", field.name + " must be a non-negative number", field.valueSpan);
                }
                info.box->localAttributes[field.name] = field.value.asNumber();
                element.sourceRefs[field.name] = field.valueSpan;
                setRef(element, field.name + ".lit", field.literalSpan);
            } else if (field.value.kind() != ValueKind::Function) {
                ctx.interpreter.report(Diagnostic{Severity::Warning, field.valueSpan, "UnknownAttribute",
                                                  "layout supports pos, width and height, not '" + field.name + "'"});
            }
        }
        return Value{};
    };
}

// -- classes ------------------------------------------------------------------

void bindName(CallContext& ctx, const std::string& name, const ElementPtr& element) {
    if (!isIdentifier(name)) {
        return;
    }
    for (const interp::Environment* e = ctx.callerEnv.get(); e != nullptr && !e->builtin; e = e->parent.get()) {
        if (e->bindings.count(name) > 0) {
            ctx.interpreter.report(Diagnostic{Severity::Error, ctx.callSpan, "DuplicateName",
                                              "'" + name + "' is already defined; the new class is not bound to it"});
            return;
        }
    }
    ctx.callerEnv->bindings[name] = element;
}

ClassInfo buildClassElement(const std::string& name, const std::optional<std::string>& stereotype, bool abstract,
                            bool isEnum, Span origin) {
    auto vbox = [origin](diagram::AttributeMap attributes = {}) {
        return diagram::createElement(ElementKind::VBox, std::move(attributes), {}, {}, origin);
    };
    auto compartment = [&](const char* cls, const ElementPtr& rows) {
        return diagram::createElement(ElementKind::Rect, {}, {cls}, {rows}, origin);
    };

    ClassInfo info;
    auto title = vbox({{"align", std::string("center")}});
    if (stereotype) {
        appendChild(*title, makeText("«" + *stereotype + "»", {classes::kStereotype}, origin));
    }
    appendChild(*title, makeText(name, {classes::kName}, origin));

    auto sections = vbox({{"align", std::string("stretch")}});
    appendChild(*sections, compartment(classes::kHeader, title));
    info.attributes = vbox();
    appendChild(*sections, compartment(isEnum ? classes::kLiterals : classes::kAttributes, info.attributes));
    if (!isEnum) {
        info.methods = vbox();
        appendChild(*sections, compartment(classes::kMethods, info.methods));
    }
    info.box = diagram::createElement(ElementKind::Rect, {}, {classes::kBox}, {sections}, origin);

    std::set<std::string> classNames{isEnum ? classes::kEnum : classes::kClass};
    if (abstract) {
        classNames.insert(classes::kAbstract);
    }
    info.element = diagram::createElement(ElementKind::CanvasElement, {}, std::move(classNames), {info.box}, origin);
    info.element->sourceRefs["call"] = origin;
    return info;
}

void addRow(Interpreter& interp, const ClassInfo& info, const std::string& prefix, const Value& value,
            const lang::AstNode& statement) {
    auto add = [&](const std::string& text) {
        const ElementPtr& rows = info.methods && text.find('(') != std::string::npos ? info.methods : info.attributes;
        appendChild(*rows, makeText(prefix + text, {classes::kMember}, statement.span));
    };
    if (statement.kind == lang::NodeKind::Assign || value.isNull()) {
        return;
    }
    if (value.isString()) {
        add(value.asString());
        return;
    }
    if (value.kind() == ValueKind::List) {
        bool allStrings = true;
        for (const auto& item : value.asList()->items) {
            allStrings = allStrings && item.isString();
        }
        if (allStrings) {
            for (const auto& item : value.asList()->items) {
                add(item.asString());
            }
            return;
        }
    }
    interp.report(Diagnostic{Severity::Error, statement.span, "NonStringEntry",
                             "class members must be strings, got " + interp::display(value)});
}

NativeFn sectionNative(ClassInfo info, std::string prefix) {
    return [info, prefix](CallContext& ctx, std::vector<Value>& args) -> Value {
        interp::expectArgCount(ctx, args, 1, 1, "member section");
        for (const auto& [value, statement] : ctx.interpreter.evalBlockStatements(args[0], interp::makeObject())) {
            addRow(ctx.interpreter, info, prefix, value, *statement);
        }
        return Value{};
    };
}

Bindings classBlockBindings(const StatePtr& state, const ClassInfo& info) {
    Bindings bindings = {
        {"layout", interp::makeNative("layout", layoutNative(info))},
        {"styles", interp::makeNative("styles", stylesNative(state, info.box, true))},
    };
    if (info.methods) {
        bindings.emplace_back("public", interp::makeNative("public", sectionNative(info, "+ ")));
        bindings.emplace_back("private", interp::makeNative("private", sectionNative(info, "- ")));
        bindings.emplace_back("protected", interp::makeNative("protected", sectionNative(info, "# ")));
        bindings.emplace_back("package", interp::makeNative("package", sectionNative(info, "~ ")));
    }
    return bindings;
}

NativeFn classNative(StatePtr state, bool isEnum) {
    return [state, isEnum](CallContext& ctx, std::vector<Value>& args) -> Value {
        const char* fn = isEnum ? "enum" : "class";
        requireDiagram(*state, fn);
        interp::expectArgCount(ctx, args, 1, 2, fn);
        const std::string& name = interp::expectString(ctx, args, 0, "class name");
        std::optional<std::string> stereotype;
        if (isEnum) {
            stereotype = "enumeration";
        }
        if (auto s = ctx.namedArg("stereotype")) {
            if (!s->isString()) {
                throw RuntimeError("TypeMismatch", "stereotype must be a string", ctx.named.at("stereotype").node->span);
            }
            stereotype = s->asString();
        }
        bool abstract = false;
        if (auto a = ctx.namedArg("abstract")) {
            if (a->kind() != ValueKind::Bool) {
                throw RuntimeError("TypeMismatch", "abstract must be a bool", ctx.named.at("abstract").node->span);
            }
            abstract = a->asBool();
        }
        for (const auto& [argName, arg] : ctx.named) {
            if (argName != "stereotype" && argName != "abstract") {
                ctx.interpreter.report(Diagnostic{Severity::Warning, arg.node->span, "UnknownArgument",
                                                  std::string(fn) + " has no argument '" + argName + "'"});
            }
        }

        ClassInfo info = buildClassElement(name, stereotype, abstract, isEnum, ctx.callSpan);
        appendChild(*state->canvas, info.element);
        state->classes.emplace(info.element.get(), info);
        bindName(ctx, name, info.element);

        if (args.size() == 2) {
            interp::expectFunction(ctx, args, 1, "class block");
            info.element->sourceRefs["block"] = ctx.argSpan(1);
            if (isEnum) {
                for (const auto& [value, statement] :
                     ctx.interpreter.evalBlockStatements(args[1], interp::makeObject(), classBlockBindings(state, info))) {
                    addRow(ctx.interpreter, info, "", value, *statement);
                }
            } else {
                ctx.interpreter.evalBlockWithTarget(args[1], interp::makeObject(), classBlockBindings(state, info), true);
            }
        }
        return info.element;
    };
}

// -- connections --------------------------------------------------------------

NativeFn associationNative(StatePtr state, AssociationStyle style) {
    return [state, style](CallContext& ctx, std::vector<Value>& args) -> Value {
        requireDiagram(*state, style.op.c_str());
        const ClassInfo& source = classArg(*state, ctx, args, 0);
        const ClassInfo& target = classArg(*state, ctx, args, 1);
        diagram::AttributeMap attributes = {
            {"markerStart", std::string(toString(style.start))},
            {"markerEnd", std::string(toString(style.end))},
        };
        if (style.dashed) {
            attributes["strokeDash"] = std::string(kDashPattern);
        }
        auto connection = diagram::createElement(ElementKind::CanvasConnection, std::move(attributes),
                                                 {classes::kConnection}, {}, ctx.callSpan);
        connection->source = source.element;
        connection->target = target.element;
        auto segment = diagram::createElement(ElementKind::ConnectionSegment, {}, {}, {}, ctx.callSpan);
        segment->step = RouteStep{};
        appendChild(*connection, segment);
        appendChild(*state->canvas, connection);
        state->connections.insert(connection.get());
        return connection;
    };
}

Value routeValue(std::shared_ptr<const RouteSpec> spec);

// Applies `target` (an end(...) marker, a point, or nothing) to the next step.
void addStep(RouteSpec& spec, RouteStep step, const CallContext& ctx, const std::vector<Value>& args, std::size_t i) {
    if (spec.closed) {
        throw RuntimeError("InvalidRoute", "the route already reached end()", ctx.callSpan);
    }
    if (i >= args.size() || args[i].isNull()) {
        spec.closed = true;
    } else if (args[i].kind() == ValueKind::Object && args[i].asObject()->tag == "end") {
        const auto& end = *std::static_pointer_cast<EndSpec>(args[i].asObject()->nativeData);
        spec.closed = true;
        spec.endParam = end.param;
        spec.endLiteral = end.literal;
        spec.endSpan = end.span;
        spec.endCall = true;
    } else if (auto pos = toPosition(args[i])) {
        step.target = pos;
    } else {
        throw RuntimeError("TypeMismatch", "route target must be end(...), apos(...) or rpos(...), got " +
                                               interp::display(args[i]),
                           ctx.argSpan(i));
    }
    spec.steps.push_back(step);
}

Value routeValue(std::shared_ptr<const RouteSpec> spec) {
    auto object = interp::makeObject("route");
    object->nativeData = std::const_pointer_cast<RouteSpec>(spec);
    object->set("line", interp::makeNative("line", [spec](CallContext& ctx, std::vector<Value>& args) -> Value {
                    interp::expectArgCount(ctx, args, 0, 1, "line");
                    auto next = std::make_shared<RouteSpec>(*spec);
                    addStep(*next, RouteStep{}, ctx, args, 0);
                    return routeValue(next);
                }));
    object->set("axisAligned",
                interp::makeNative("axisAligned", [spec](CallContext& ctx, std::vector<Value>& args) -> Value {
                    interp::expectArgCount(ctx, args, 1, 2, "axisAligned");
                    RouteStep step;
                    step.mode = RouteStep::Mode::AxisAligned;
                    step.fraction = interp::expectNumber(ctx, args, 0, "fraction");
                    checkUnit(step.fraction, true, ctx.argSpan(0), "axisAligned fraction");
                    auto next = std::make_shared<RouteSpec>(*spec);
                    addStep(*next, step, ctx, args, 1);
                    return routeValue(next);
                }));
    object->set("bezier", interp::makeNative("bezier", [spec](CallContext& ctx, std::vector<Value>& args) -> Value {
                    interp::expectArgCount(ctx, args, 4, 5, "bezier");
                    RouteStep step;
                    step.mode = RouteStep::Mode::Bezier;
                    step.c1x = interp::expectNumber(ctx, args, 0, "c1x");
                    step.c1y = interp::expectNumber(ctx, args, 1, "c1y");
                    step.c2x = interp::expectNumber(ctx, args, 2, "c2x");
                    step.c2y = interp::expectNumber(ctx, args, 3, "c2y");
                    auto next = std::make_shared<RouteSpec>(*spec);
                    addStep(*next, step, ctx, args, 4);
                    return routeValue(next);
                }));
    return object;
}

std::optional<double> anchorParam(CallContext& ctx, std::vector<Value>& args, const char* name) {
    interp::expectArgCount(ctx, args, 0, 1, name);
    if (args.empty()) {
        return std::nullopt;
    }
    double s = interp::expectNumber(ctx, args, 0, name);
    checkUnit(s, false, ctx.argSpan(0), name);
    return s;
}

// Positional or named numeric argument: value, span and literal span.
struct NumberArg {
    double value;
    std::optional<Span> span;
    std::optional<Span> literal;
};

NumberArg numberArg(CallContext& ctx, std::vector<Value>& args, std::size_t i, const std::string& name, double fallback) {
    auto named = ctx.named.find(name);
    if (named != ctx.named.end()) {
        if (i < args.size()) {
            throw RuntimeError("DuplicateArgument", "'" + name + "' is given both by position and by name",
                               named->second.node->span);
        }
        if (!named->second.value.isNumber()) {
            throw RuntimeError("TypeMismatch", name + " must be a number, got " + interp::display(named->second.value),
                               named->second.node->span);
        }
        const lang::AstNode* node = named->second.node;
        std::optional<Span> literal;
        if (node->kind == lang::NodeKind::NumberLit) {
            literal = node->span;
        }
        return {named->second.value.asNumber(), node->span, literal};
    }
    if (i < args.size()) {
        return {interp::expectNumber(ctx, args, i, name.c_str()), ctx.argSpan(i), ctx.literalSpan(i)};
    }
    return {fallback, std::nullopt, std::nullopt};
}

NativeFn labelNative(ElementPtr connection) {
    return [connection](CallContext& ctx, std::vector<Value>& args) -> Value {
        interp::expectArgCount(ctx, args, 1, 3, "label");
        for (const auto& [argName, arg] : ctx.named) {
            if (argName != "t" && argName != "distance") {
                ctx.interpreter.report(Diagnostic{Severity::Warning, arg.node->span, "UnknownArgument",
                                                  "label has no argument '" + argName + "'"});
            }
        }
        std::string text = interp::display(args[0]);
        NumberArg t = numberArg(ctx, args, 1, "t", kDefaultLabelT);
        checkUnit(t.value, true, t.span.value_or(ctx.callSpan), "label t");
        NumberArg distance = numberArg(ctx, args, 2, "distance", kDefaultLabelDistance);
        auto label = diagram::createElement(ElementKind::Label, {{"t", t.value}, {"distance", distance.value}}, {"label"},
                                            {makeText(text, {}, ctx.callSpan)}, ctx.callSpan);
        if (t.span) {
            label->sourceRefs["t"] = *t.span;
            setRef(*label, "t.lit", t.literal);
        }
        if (distance.span) {
            label->sourceRefs["distance"] = *distance.span;
            setRef(*label, "distance.lit", distance.literal);
        }
        appendChild(*connection, label);
        return label;
    };
}

void applyRoute(ElementNode& connection, const RouteSpec& spec) {
    std::vector<ElementPtr> kept;
    for (auto& child : connection.children) {
        if (child->kind != ElementKind::ConnectionSegment) {
            kept.push_back(child);
        }
    }
    std::vector<RouteStep> steps = spec.steps;
    if (!spec.closed) {
        steps.push_back(RouteStep{});
    }
    connection.children.clear();
    for (const auto& step : steps) {
        auto segment = diagram::createElement(ElementKind::ConnectionSegment, {}, {}, {}, connection.originSpan);
        segment->step = step;
        connection.children.push_back(segment);
    }
    for (auto& child : kept) {
        connection.children.push_back(child);
    }
    diagram::reassignIds(connection);

    connection.startParam = spec.startParam;
    connection.endParam = spec.endParam;
    connection.sourceRefs.erase("start");
    connection.sourceRefs.erase("end");
    if (spec.startParam) {
        connection.sourceRefs["start"] = spec.startSpan;
    }
    if (spec.endParam) {
        connection.sourceRefs["end"] = spec.endSpan;
    }
    setRef(connection, "start.lit", spec.startLiteral);
    setRef(connection, "end.lit", spec.endLiteral);
    // parameterless start()/end() calls, where a parameter can be inserted
    setRef(connection, "start.call", spec.startParam ? std::nullopt : std::optional<Span>(spec.startSpan));
    setRef(connection, "end.call",
           !spec.endParam && spec.endCall ? std::optional<Span>(spec.endSpan) : std::nullopt);
}

NativeFn withNative(StatePtr state, ElementPtr connection) {
    return [state, connection](CallContext& ctx, std::vector<Value>& args) -> Value {
        interp::expectArgCount(ctx, args, 1, 1, "with");
        Bindings bindings = {
            {"start", interp::makeNative("start", [](CallContext& c, std::vector<Value>& a) -> Value {
                 auto spec = std::make_shared<RouteSpec>();
                 spec->startParam = anchorParam(c, a, "start");
                 spec->startLiteral = c.literalSpan(0);
                 spec->startSpan = c.argSpan(0);
                 return routeValue(spec);
             })},
            {"end", interp::makeNative("end", [](CallContext& c, std::vector<Value>& a) -> Value {
                 auto end = std::make_shared<EndSpec>();
                 end->param = anchorParam(c, a, "end");
                 end->literal = c.literalSpan(0);
                 end->span = c.argSpan(0);
                 auto object = interp::makeObject("end");
                 object->nativeData = end;
                 return object;
             })},
            {"label", interp::makeNative("label", labelNative(connection))},
            {"styles", interp::makeNative("styles", stylesNative(state, connection, true))},
        };
        auto target = interp::makeObject();
        ctx.interpreter.evalBlockWithTarget(args[0], target, bindings, true);
        connection->sourceRefs["withBlock"] = ctx.argSpan(0);
        for (const auto& field : target->fields) {
            if (field.name == "over") {
                if (field.value.kind() != ValueKind::Object || field.value.asObject()->tag != "route") {
                    throw RuntimeError("TypeMismatch", "over must be a route built from start(...), got " +
                                                           interp::display(field.value),
                                       field.valueSpan);
                }
                const auto& spec = *std::static_pointer_cast<RouteSpec>(field.value.asObject()->nativeData);
                applyRoute(*connection, spec);
                connection->sourceRefs["over"] = field.valueSpan;
                setRef(*connection, "over.open", spec.closed ? std::nullopt : std::optional<Span>(field.valueSpan));
            } else if (field.value.kind() != ValueKind::Function) {
                ctx.interpreter.report(Diagnostic{Severity::Warning, field.valueSpan, "UnknownAttribute",
                                                  "with supports over, not '" + field.name + "'"});
            }
        }
        return connection;
    };
}

NativeFn withInfix(StatePtr state) {
    return [state](CallContext& ctx, std::vector<Value>& args) -> Value {
        if (args[0].kind() != ValueKind::Element || state->connections.count(args[0].asElement().get()) == 0) {
            throw RuntimeError("TypeMismatch", "with needs a connection on its left, got " + interp::display(args[0]),
                               ctx.argSpan(0));
        }
        std::vector<Value> rest{args[1]};
        CallContext inner{ctx.interpreter, ctx.callSpan, {ctx.argNodes.size() > 1 ? ctx.argNodes[1] : nullptr}, {},
                          ctx.callerEnv};
        return withNative(state, args[0].asElement())(inner, rest);
    };
}

// -- diagram ------------------------------------------------------------------

struct CanvasReset {
    explicit CanvasReset(State& state) : state(state) {}
    ~CanvasReset() { state.canvas.reset(); }
    State& state;
};

NativeFn classDiagramNative(StatePtr state) {
    return [state](CallContext& ctx, std::vector<Value>& args) -> Value {
        if (state->canvas) {
            throw RuntimeError("NestedDiagram", "nested diagram: classDiagram cannot be used inside another diagram");
        }
        if (ctx.interpreter.diagram()) {
            throw RuntimeError("MultipleDiagrams", "a document can contain only one classDiagram");
        }
        interp::expectArgCount(ctx, args, 1, 1, "classDiagram");
        interp::expectFunction(ctx, args, 0, "classDiagram block");
        state->canvas = diagram::createElement(ElementKind::Canvas, {}, {}, {}, ctx.callSpan);
        CanvasReset reset(*state);

        Bindings bindings = {
            {"class", interp::makeNative("class", classNative(state, false))},
            {"enum", interp::makeNative("enum", classNative(state, true))},
            {"styles", interp::makeNative("styles", stylesNative(state, state->canvas, false))},
        };
        for (const auto& style : associationTable()) {
            bindings.emplace_back(interp::operatorKey(style.op), interp::makeNative(style.op, associationNative(state, style)));
        }
        bindings.emplace_back(interp::operatorKey("with"), interp::makeNative("with", withInfix(state)));
        ctx.interpreter.evalBlockWithTarget(args[0], nullptr, bindings, true);

        diagram::Diagram result;
        result.root = state->canvas;
        result.styleRules = builtinRules();
        for (auto& rule : state->rules) {
            result.styleRules.push_back(rule);
        }
        result.fonts = {diagram::defaultFont()};
        ctx.interpreter.diagram() = std::move(result);
        return Value{};
    };
}

void install(Interpreter& interp, interp::Environment& root) {
    auto state = std::make_shared<State>();
    interp.moduleState("uml") = state;
    root.bindings["classDiagram"] = interp::makeNative("classDiagram", classDiagramNative(state));
    root.bindings["apos"] = interp::makeNative("apos", apos);
    root.bindings["rpos"] = interp::makeNative("rpos", rposNative(state));

    std::weak_ptr<State> weak = state;
    interp.addMemberResolver([weak](Interpreter&, const Value& receiver, const std::string& name) -> std::optional<Value> {
        auto state = weak.lock();
        if (!state) {
            return std::nullopt;
        }
        const ElementPtr& element = receiver.asElement();
        auto cls = state->classes.find(element.get());
        if (cls != state->classes.end()) {
            const ClassInfo& info = cls->second;
            if (name == "layout") {
                return Value(interp::makeNative("layout", layoutNative(info)));
            }
            if (name == "styles") {
                return Value(interp::makeNative("styles", stylesNative(state, info.box, true)));
            }
            if (name == "pos") {
                return element->pos ? fromPosition(*element->pos) : Value{};
            }
            return std::nullopt;
        }
        if (state->connections.count(element.get()) > 0) {
            if (name == "with") {
                return Value(interp::makeNative("with", withNative(state, element)));
            }
            if (name == "styles") {
                return Value(interp::makeNative("styles", stylesNative(state, element, true)));
            }
        }
        return std::nullopt;
    });
}

}  // namespace

interp::Module classDiagramModule() { return interp::Module{"uml", install}; }

}  // namespace livediag::uml
