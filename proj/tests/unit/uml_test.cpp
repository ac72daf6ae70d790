#include <gtest/gtest.h>

#include "livediag/lang/parser.hpp"
#include "livediag/uml/class_diagram.hpp"

using namespace livediag;
using namespace livediag::interp;
using diagram::ElementKind;
using diagram::ElementNode;

namespace {

struct Run {
    std::string text;
    ExecutionResult result;
    std::vector<Value> probes;

    bool has(const std::string& code) const {
        for (const auto& d : result.diagnostics) {
            if (d.code == code) {
                return true;
            }
        }
        return false;
    }

    const ElementNode& canvas() const { return *result.diagram->root; }

    std::string slice(Span span) const { return text.substr(span.start, span.length()); }
};

Run run(const std::string& text) {
    Run r;
    r.text = text;
    auto probes = std::make_shared<std::vector<Value>>();
    Module probe{"probe", [probes](Interpreter&, Environment& root) {
                     root.bindings["probe"] = makeNative("probe", [probes](CallContext&, std::vector<Value>& args) -> Value {
                         probes->push_back(args.empty() ? Value{} : args[0]);
                         return Value{};
                     });
                 }};
    auto parsed = lang::parse(text);
    EXPECT_TRUE(parsed.errors.empty()) << text;
    r.result = evaluateProgram(parsed.program, {uml::classDiagramModule(), probe});
    r.probes = *probes;
    return r;
}

std::vector<const ElementNode*> ofKind(const ElementNode& root, ElementKind kind) {
    std::vector<const ElementNode*> out;
    diagram::forEachElement(root, [&](const ElementNode& n) {
        if (n.kind == kind) {
            out.push_back(&n);
        }
    });
    return out;
}

std::vector<std::string> texts(const ElementNode& root) {
    std::vector<std::string> out;
    for (const auto* t : ofKind(root, ElementKind::Text)) {
        out.push_back(*t->string("text"));
    }
    return out;
}

const ElementNode* withClass(const ElementNode& root, const std::string& cls) {
    const ElementNode* found = nullptr;
    diagram::forEachElement(root, [&](const ElementNode& n) {
        if (!found && n.classes.count(cls)) {
            found = &n;
        }
    });
    return found;
}

}  // namespace

TEST(ClassDiagram, EmptyAndTwoClasses) {
    auto empty = run("classDiagram { }");
    ASSERT_TRUE(empty.result.diagram);
    EXPECT_EQ(empty.canvas().kind, ElementKind::Canvas);
    EXPECT_TRUE(empty.canvas().children.empty());
    EXPECT_TRUE(empty.result.diagnostics.empty());

    auto two = run("classDiagram {\n  class(\"A\")\n  class(\"B\")\n}");
    ASSERT_EQ(two.canvas().children.size(), 2u);
    EXPECT_EQ(two.canvas().children[0]->kind, ElementKind::CanvasElement);
    EXPECT_EQ(two.canvas().children[1]->id, "canvas/canvasElement1");
}

TEST(ClassDiagram, NestedDiagramIsAnError) {
    auto r = run("classDiagram {\n  classDiagram { }\n}");
    ASSERT_TRUE(r.has("NestedDiagram"));
    EXPECT_NE(r.result.diagnostics[0].message.find("nested diagram"), std::string::npos);
    ASSERT_TRUE(r.result.diagram);
    EXPECT_TRUE(r.has("NestedDiagram"));

    // diagram functions exist only inside the diagram block
    auto outside = run("class(\"A\")");
    EXPECT_TRUE(outside.has("UnknownName"));
    auto escaped = run("f = null\nclassDiagram { f = class }\nf(\"A\")");
    EXPECT_TRUE(escaped.has("NotInDiagram"));
}

TEST(ClassDiagram, ClassBindsItsName) {
    auto r = run("classDiagram {\n  class(\"Dish\")\n  probe(Dish)\n  x = class(\"A\")\n  probe(x == A)\n}");
    ASSERT_EQ(r.probes.size(), 2u);
    ASSERT_EQ(r.probes[0].kind(), ValueKind::Element);
    EXPECT_EQ(r.probes[0].asElement()->id, "canvas/canvasElement0");
    EXPECT_TRUE(r.probes[1].asBool());
    EXPECT_TRUE(r.result.diagnostics.empty());
}

TEST(ClassDiagram, DuplicateNameStillCreatesElement) {
    auto r = run("classDiagram {\n  class(\"A\")\n  class(\"A\")\n  probe(A)\n}");
    ASSERT_TRUE(r.has("DuplicateName"));
    EXPECT_EQ(r.canvas().children.size(), 2u);
    EXPECT_EQ(r.probes[0].asElement()->id, "canvas/canvasElement0");
    EXPECT_EQ(r.slice(r.result.diagnostics[0].span), "class(\"A\")");
}

TEST(ClassDiagram, SectionsProduceRows) {
    auto r = run(R"(classDiagram {
  class("Menu") {
    public { "count : int" }
    private { "render() : void" }
    protected {
      "items : List"
      x = 3
      ["a : int", "b() : int"]
    }
    package { "pkg : int" }
  }
})");
    EXPECT_TRUE(r.result.diagnostics.empty());
    const ElementNode* attributes = withClass(r.canvas(), uml::classes::kAttributes);
    const ElementNode* methods = withClass(r.canvas(), uml::classes::kMethods);
    ASSERT_TRUE(attributes && methods);
    EXPECT_EQ(texts(*attributes), (std::vector<std::string>{"+ count : int", "# items : List", "# a : int", "~ pkg : int"}));
    EXPECT_EQ(texts(*methods), (std::vector<std::string>{"- render() : void", "# b() : int"}));
}

TEST(ClassDiagram, NonStringEntry) {
    auto r = run("classDiagram {\n  class(\"A\") {\n    public { 42 }\n    public { \"ok\" }\n  }\n}");
    ASSERT_TRUE(r.has("NonStringEntry"));
    EXPECT_EQ(r.slice(r.result.diagnostics[0].span), "42");
    EXPECT_EQ(texts(*withClass(r.canvas(), uml::classes::kAttributes)), (std::vector<std::string>{"+ ok"}));
}

TEST(ClassDiagram, StereotypeAbstractAndEnum) {
    auto r = run(R"(classDiagram {
  class("Shape", abstract = true, stereotype = "entity")
  enum("Color") {
    "RED"
    "GREEN"
  }
})");
    EXPECT_TRUE(r.result.diagnostics.empty());
    const auto& shape = *r.canvas().children[0];
    EXPECT_TRUE(shape.classes.count(uml::classes::kAbstract));
    EXPECT_EQ(texts(shape), (std::vector<std::string>{"«entity»", "Shape"}));
    const auto& color = *r.canvas().children[1];
    EXPECT_TRUE(color.classes.count(uml::classes::kEnum));
    EXPECT_EQ(texts(color), (std::vector<std::string>{"«enumeration»", "Color", "RED", "GREEN"}));
    EXPECT_EQ(withClass(color, uml::classes::kMethods), nullptr);
}

// Every operator in the table yields exactly one connection with the listed
// marker configuration.
TEST(Associations, OperatorTableIsTotal) {
    ASSERT_EQ(uml::associationTable().size(), 12u);
    for (const auto& style : uml::associationTable()) {
        auto r = run("classDiagram {\n  class(\"A\")\n  class(\"B\")\n  probe(A " + style.op + " B)\n}");
        ASSERT_TRUE(r.result.diagnostics.empty()) << style.op << ": " << r.result.diagnostics[0].message;
        auto connections = ofKind(r.canvas(), ElementKind::CanvasConnection);
        ASSERT_EQ(connections.size(), 1u) << style.op;
        const auto& c = *connections[0];
        EXPECT_EQ(*c.string("markerStart"), uml::toString(style.start)) << style.op;
        EXPECT_EQ(*c.string("markerEnd"), uml::toString(style.end)) << style.op;
        EXPECT_EQ(c.string("strokeDash").has_value(), style.dashed) << style.op;
        EXPECT_EQ(c.source.lock().get(), r.canvas().children[0].get());
        EXPECT_EQ(c.target.lock().get(), r.canvas().children[1].get());
        EXPECT_EQ(r.probes[0].asElement().get(), &c);
        EXPECT_EQ(r.slice(c.originSpan), "A " + style.op + " B");
        ASSERT_EQ(c.children.size(), 1u);
        EXPECT_EQ(c.children[0]->kind, ElementKind::ConnectionSegment);
    }
}

TEST(Associations, SpecificMappings) {
    auto find = [](const std::string& op) {
        for (const auto& s : uml::associationTable()) {
            if (s.op == op) {
                return s;
            }
        }
        return uml::AssociationStyle{};
    };
    EXPECT_EQ(find("-->").end, uml::Marker::Arrow);
    EXPECT_EQ(find("-->").start, uml::Marker::None);
    EXPECT_EQ(find("extends").end, uml::Marker::Triangle);
    EXPECT_FALSE(find("extends").dashed);
    EXPECT_TRUE(find("implements").dashed);
}

TEST(Associations, NonClassOperandIsTypeMismatch) {
    auto r = run("classDiagram {\n  class(\"A\")\n  A --> 5\n}");
    ASSERT_TRUE(r.has("TypeMismatch"));
    EXPECT_EQ(r.slice(r.result.diagnostics[0].span), "5");
    EXPECT_TRUE(ofKind(r.canvas(), ElementKind::CanvasConnection).empty());
}

TEST(With, LabelsAndRoutes) {
    auto r = run(R"(classDiagram {
  class("A")
  class("B")
  A --> B with {
    label("1..*", 0.9, 8)
    label("owns")
    over = start(0.25).axisAligned(0.5, end(0.75))
  }
})");
    ASSERT_TRUE(r.result.diagnostics.empty()) << r.result.diagnostics[0].message;
    const auto& c = *ofKind(r.canvas(), ElementKind::CanvasConnection)[0];
    EXPECT_EQ(c.startParam, 0.25);
    EXPECT_EQ(c.endParam, 0.75);
    EXPECT_EQ(r.slice(c.sourceRefs.at("start.lit")), "0.25");
    EXPECT_EQ(r.slice(c.sourceRefs.at("end.lit")), "0.75");
    auto segments = ofKind(c, ElementKind::ConnectionSegment);
    ASSERT_EQ(segments.size(), 1u);
    EXPECT_EQ(segments[0]->step->mode, diagram::RouteStep::Mode::AxisAligned);
    EXPECT_EQ(segments[0]->step->fraction, 0.5);
    EXPECT_FALSE(segments[0]->step->target);
    auto labels = ofKind(c, ElementKind::Label);
    ASSERT_EQ(labels.size(), 2u);
    EXPECT_EQ(*labels[0]->number("t"), 0.9);
    EXPECT_EQ(*labels[0]->number("distance"), 8);
    EXPECT_EQ(*labels[1]->number("t"), 0.5);
    EXPECT_EQ(*labels[1]->number("distance"), 5);
    EXPECT_EQ(texts(*labels[0]), (std::vector<std::string>{"1..*"}));
    EXPECT_EQ(r.slice(labels[0]->originSpan), "label(\"1..*\", 0.9, 8)");
    EXPECT_EQ(r.slice(labels[0]->sourceRefs.at("t.lit")), "0.9");
}

TEST(With, WaypointsAndMemberForm) {
    auto r = run(R"(classDiagram {
  class("A")
  class("B")
  c = A -- B
  c.with {
    over = start().line(apos(50, 60)).bezier(10, 0, -10, 0, apos(80, 90))
  }
})");
    ASSERT_TRUE(r.result.diagnostics.empty()) << r.result.diagnostics[0].message;
    const auto& c = *ofKind(r.canvas(), ElementKind::CanvasConnection)[0];
    auto segments = ofKind(c, ElementKind::ConnectionSegment);
    ASSERT_EQ(segments.size(), 3u);  // trailing line to the end anchor is implied
    EXPECT_EQ(segments[0]->step->mode, diagram::RouteStep::Mode::Line);
    EXPECT_EQ(segments[0]->step->target->x, 50);
    EXPECT_EQ(segments[1]->step->mode, diagram::RouteStep::Mode::Bezier);
    EXPECT_EQ(segments[1]->step->c2x, -10);
    EXPECT_FALSE(segments[2]->step->target);
    EXPECT_FALSE(c.startParam);
    EXPECT_EQ(segments[2]->id, c.id + "/connectionSegment2");
}

TEST(With, NamedLabelArguments) {
    auto r = run(R"(classDiagram {
  class("A")
  class("B")
  A --> B with {
    label("x", t = 0.25, distance = 8)
    label("y", distance = 3)
    label("z", 0.5, glow = 1)
  }
})");
    const auto& c = *ofKind(r.canvas(), ElementKind::CanvasConnection)[0];
    auto labels = ofKind(c, ElementKind::Label);
    ASSERT_EQ(labels.size(), 3u);
    EXPECT_EQ(*labels[0]->number("t"), 0.25);
    EXPECT_EQ(*labels[0]->number("distance"), 8);
    EXPECT_EQ(r.slice(labels[0]->sourceRefs.at("t.lit")), "0.25");
    EXPECT_EQ(r.slice(labels[0]->sourceRefs.at("distance.lit")), "8");
    EXPECT_EQ(*labels[1]->number("t"), 0.5);
    EXPECT_EQ(*labels[1]->number("distance"), 3);
    EXPECT_FALSE(labels[1]->sourceRefs.count("t"));
    EXPECT_TRUE(r.has("UnknownArgument"));

    auto dup = run("classDiagram {\n  class(\"A\")\n  class(\"B\")\n  A --> B with { label(\"x\", 0.5, t = 0.2) }\n}");
    EXPECT_TRUE(dup.has("DuplicateArgument"));
}

TEST(With, EditableRouteLocations) {
    auto r = run(R"(classDiagram {
  class("A")
  class("B")
  class("C")
  A --> B with { over = start().line(end()) }
  B --> C with { over = start(0.5).line(apos(10, 10)) }
})");
    ASSERT_TRUE(r.result.diagnostics.empty()) << r.result.diagnostics[0].message;
    auto connections = ofKind(r.canvas(), ElementKind::CanvasConnection);
    const auto& closed = *connections[0];
    EXPECT_EQ(r.slice(closed.sourceRefs.at("start.call")), "start()");
    EXPECT_EQ(r.slice(closed.sourceRefs.at("end.call")), "end()");
    EXPECT_FALSE(closed.sourceRefs.count("over.open"));
    const auto& open = *connections[1];
    EXPECT_FALSE(open.sourceRefs.count("start.call"));
    EXPECT_FALSE(open.sourceRefs.count("end.call"));
    EXPECT_EQ(r.slice(open.sourceRefs.at("over.open")), "start(0.5).line(apos(10, 10))");
}

TEST(With, InvalidRoute) {
    for (std::string block : {"label(\"x\", 1.5)", "over = start(1)", "over = start(-0.1)", "over = start(0).axisAligned(2)",
                              "over = start(0).line(end(0)).line()"}) {
        auto r = run("classDiagram {\n  class(\"A\")\n  class(\"B\")\n  A --> B with { " + block + " }\n}");
        EXPECT_TRUE(r.has("InvalidRoute")) << block;
    }
}

TEST(Layout, PositionAndSize) {
    auto r = run(R"(classDiagram {
  class("A") {
    layout { pos = apos(100, 200); width = 180 }
  }
  class("B")
  B.layout { pos = rpos(A, 10, -5) }
  probe(A.pos)
})");
    ASSERT_TRUE(r.result.diagnostics.empty()) << r.result.diagnostics[0].message;
    const auto& a = *r.canvas().children[0];
    ASSERT_TRUE(a.pos);
    EXPECT_EQ(a.pos->kind, diagram::PositionSpec::Kind::Absolute);
    EXPECT_EQ(a.pos->x, 100);
    EXPECT_EQ(a.pos->y, 200);
    EXPECT_EQ(r.slice(a.sourceRefs.at("pos.x")), "100");
    EXPECT_EQ(r.slice(a.sourceRefs.at("pos.y")), "200");
    EXPECT_EQ(r.slice(a.sourceRefs.at("width.lit")), "180");
    EXPECT_EQ(*withClass(a, uml::classes::kBox)->number("width"), 180);
    const auto& b = *r.canvas().children[1];
    EXPECT_EQ(b.pos->kind, diagram::PositionSpec::Kind::Relative);
    EXPECT_EQ(b.pos->target.lock().get(), &a);
    EXPECT_EQ(b.pos->y, -5);
    EXPECT_EQ(r.slice(b.sourceRefs.at("pos.y")), "-5");
    ASSERT_EQ(r.probes.size(), 1u);
    EXPECT_EQ(r.probes[0].asObject()->get("x").asNumber(), 100);

    auto omitted = run("classDiagram {\n  class(\"A\")\n}");
    EXPECT_FALSE(omitted.canvas().children[0]->pos);

    auto computed = run("classDiagram {\n  class(\"A\") { layout { pos = apos(1 + 2, 4) } }\n}");
    const auto& c = *computed.canvas().children[0];
    EXPECT_EQ(c.pos->x, 3);
    EXPECT_EQ(c.sourceRefs.count("pos.x"), 0u);
    EXPECT_EQ(computed.slice(c.sourceRefs.at("pos")), "apos(1 + 2, 4)");

    auto bad = run("classDiagram {\n  class(\"A\") { layout { pos = 5 } }\n}");
    EXPECT_TRUE(bad.has("TypeMismatch"));
}

TEST(Styles, LocalAndDiagramRules) {
    auto r = run(R"(classDiagram {
  styles {
    type("text", { fontSize = 14 })
    cls("class-box", { stroke = "#333333" })
  }
  class("A") {
    styles { fill = "#eeeeee"; fontSize = 20 }
  }
  class("B")
})");
    ASSERT_TRUE(r.result.diagnostics.empty()) << r.result.diagnostics[0].message;
    const auto& diagram = *r.result.diagram;
    diagram::StyleResolver resolver(diagram);
    const auto* boxA = withClass(*r.canvas().children[0], uml::classes::kBox);
    const auto* boxB = withClass(*r.canvas().children[1], uml::classes::kBox);
    EXPECT_EQ(std::get<std::string>(resolver.resolved(*boxA).at("fill")), "#eeeeee");
    EXPECT_EQ(std::get<std::string>(resolver.resolved(*boxB).at("fill")), "#ffffff");
    EXPECT_EQ(std::get<std::string>(resolver.resolved(*boxB).at("stroke")), "#333333");
    // rule on text beats the inherited box value; here both say 14 for B
    auto textsB = ofKind(*r.canvas().children[1], ElementKind::Text);
    EXPECT_EQ(std::get<double>(resolver.resolved(*textsB[0]).at("fontSize")), 14);
    EXPECT_EQ(std::get<std::string>(resolver.resolved(*textsB[0]).at("fontWeight")), "bold");
}

TEST(Styles, LocalOverridesRule) {
    auto r = run(R"(classDiagram {
  styles { type("text", { fontSize = 14 }) }
  class("A") {
    styles { type("text", { fontSize = 30 }) }
  }
  class("B")
})");
    ASSERT_TRUE(r.result.diagnostics.empty()) << r.result.diagnostics[0].message;
    diagram::StyleResolver resolver(*r.result.diagram);
    auto textA = ofKind(*r.canvas().children[0], ElementKind::Text)[0];
    auto textB = ofKind(*r.canvas().children[1], ElementKind::Text)[0];
    EXPECT_EQ(std::get<double>(resolver.resolved(*textA).at("fontSize")), 30);
    EXPECT_EQ(std::get<double>(resolver.resolved(*textB).at("fontSize")), 14);
}

TEST(Styles, UnknownAttributeWarnsButIsStored) {
    auto r = run("classDiagram {\n  class(\"A\") { styles { glow = 3 } }\n}");
    ASSERT_TRUE(r.has("UnknownAttribute"));
    EXPECT_EQ(r.result.diagnostics[0].severity, Severity::Warning);
    EXPECT_EQ(*withClass(r.canvas(), uml::classes::kBox)->number("glow"), 3);
}

TEST(Origins, CoverEveryElement) {
    auto r = run(R"(classDiagram {
  class("A") { public { "x : int" } }
  class("B")
  A --> B with { label("l") }
})");
    std::size_t count = 0;
    diagram::forEachElement(r.canvas(), [&](const ElementNode& n) {
        ++count;
        EXPECT_EQ(r.result.elementOrigins.count(n.id), 1u) << n.id;
    });
    EXPECT_EQ(r.result.elementOrigins.size(), count);
    EXPECT_EQ(r.slice(r.result.elementOrigins.at("canvas/canvasElement0")).substr(0, 10), "class(\"A\")");
    EXPECT_EQ(r.slice(r.result.elementOrigins.at("canvas/canvasElement1")), "class(\"B\")");
    EXPECT_EQ(r.slice(r.result.elementOrigins.at("canvas/canvasConnection0")), "A --> B");
}

TEST(Errors, DroppedClassDoesNotCrashConnections) {
    auto r = run("classDiagram {\n  class(\"A\")\n  class(42)\n  A --> B\n}");
    EXPECT_TRUE(r.has("TypeMismatch"));
    EXPECT_TRUE(r.has("UnknownName"));
    ASSERT_TRUE(r.result.diagram);
    EXPECT_EQ(r.canvas().children.size(), 1u);
}
