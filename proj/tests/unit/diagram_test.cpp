#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "livediag/diagram/font.hpp"
#include "livediag/diagram/style.hpp"

using namespace livediag;
using namespace livediag::diagram;

TEST(CreateElement, ChildIds) {
    auto rect = createElement(ElementKind::Rect, {}, {},
                              {createElement(ElementKind::Text), createElement(ElementKind::Text)});
    ASSERT_EQ(rect->children.size(), 2u);
    EXPECT_EQ(rect->children[0]->id, "rect/text0");
    EXPECT_EQ(rect->children[1]->id, "rect/text1");

    auto canvas = createElement(ElementKind::Canvas);
    appendChild(*canvas, createElement(ElementKind::CanvasElement, {}, {}, {rect}));
    EXPECT_EQ(rect->id, "canvas/canvasElement0/rect0");
    EXPECT_EQ(rect->children[1]->id, "canvas/canvasElement0/rect0/text1");
}

TEST(CreateElement, IllegalChild) {
    auto vbox = createElement(ElementKind::VBox);
    EXPECT_THROW(appendChild(*vbox, createElement(ElementKind::ConnectionSegment)), IllegalChild);
    EXPECT_THROW(createElement(ElementKind::VBox, {}, {}, {createElement(ElementKind::CanvasElement)}), IllegalChild);
    auto canvas = createElement(ElementKind::Canvas);
    EXPECT_THROW(appendChild(*canvas, createElement(ElementKind::Text)), IllegalChild);
}

TEST(CreateElement, DeterministicAndStableIds) {
    auto build = [] {
        auto canvas = createElement(ElementKind::Canvas);
        for (int i = 0; i < 3; ++i) {
            appendChild(*canvas, createElement(ElementKind::CanvasElement, {}, {},
                                               {createElement(ElementKind::Rect, {}, {}, {createElement(ElementKind::Text)})}));
            appendChild(*canvas, createElement(ElementKind::CanvasConnection));
        }
        return canvas;
    };
    auto a = build();
    auto b = build();
    std::vector<std::string> idsA, idsB;
    forEachElement(*a, [&](const ElementNode& n) { idsA.push_back(n.id); });
    forEachElement(*b, [&](const ElementNode& n) { idsB.push_back(n.id); });
    EXPECT_EQ(idsA, idsB);

    std::vector<std::string> before;
    for (const auto& c : a->children) before.push_back(c->id);
    appendChild(*a, createElement(ElementKind::CanvasElement));
    for (std::size_t i = 0; i < before.size(); ++i) {
        EXPECT_EQ(a->children[i]->id, before[i]);
    }
    EXPECT_EQ(a->children.back()->id, "canvas/canvasElement3");
    EXPECT_EQ(findElement(*a, "canvas/canvasElement1/rect0/text0"), a->children[2]->children[0]->children[0].get());
}

namespace {

StyleRule rule(std::vector<Selector> chain, AttributeMap attrs, std::size_t index) {
    StyleRule r;
    r.selectorChain = std::move(chain);
    r.attributes = std::move(attrs);
    r.sourceIndex = index;
    return r;
}

Selector type(const char* name) { return Selector{Selector::Kind::Type, name}; }
Selector cls(const char* name) { return Selector{Selector::Kind::Class, name}; }

}  // namespace

TEST(MatchStyles, LocalWins) {
    Diagram d;
    auto rect = createElement(ElementKind::Rect, {{"fill", std::string("B")}});
    d.root = rect;
    d.styleRules.push_back(rule({type("rect")}, {{"fill", std::string("A")}}, 0));
    EXPECT_EQ(std::get<std::string>(matchStyles(d, *rect, {}).at("fill")), "B");
}

TEST(MatchStyles, ClassBeatsTypeRegardlessOfOrder) {
    Diagram d;
    auto rect = createElement(ElementKind::Rect, {}, {"box"});
    d.root = rect;
    d.styleRules.push_back(rule({cls("box")}, {{"fill", std::string("class")}}, 0));
    d.styleRules.push_back(rule({type("rect")}, {{"fill", std::string("type")}}, 1));
    EXPECT_EQ(std::get<std::string>(matchStyles(d, *rect, {}).at("fill")), "class");
}

TEST(MatchStyles, LaterSourceIndexBreaksTies) {
    Diagram d;
    auto rect = createElement(ElementKind::Rect);
    d.root = rect;
    d.styleRules.push_back(rule({type("rect")}, {{"fill", std::string("first")}}, 0));
    d.styleRules.push_back(rule({type("rect")}, {{"fill", std::string("second")}}, 1));
    EXPECT_EQ(std::get<std::string>(matchStyles(d, *rect, {}).at("fill")), "second");
}

TEST(MatchStyles, InheritanceAndDescendantChains) {
    Diagram d;
    auto text = createElement(ElementKind::Text);
    auto inner = createElement(ElementKind::Rect, {{"fill", std::string("#eee")}}, {"header"}, {text});
    auto outer = createElement(ElementKind::Rect, {{"fontSize", 20.0}}, {"class"}, {inner});
    d.root = outer;
    d.styleRules.push_back(rule({cls("class"), type("text")}, {{"color", std::string("red")}}, 0));
    d.styleRules.push_back(rule({cls("missing"), type("text")}, {{"color", std::string("blue")}}, 1));
    auto resolved = matchStyles(d, *text, {outer.get(), inner.get()});
    EXPECT_EQ(std::get<double>(resolved.at("fontSize")), 20.0);
    EXPECT_EQ(std::get<std::string>(resolved.at("color")), "red");
    EXPECT_EQ(resolved.count("fill"), 0u);  // fill does not inherit
    EXPECT_EQ(std::get<std::string>(resolved.at("fontFamily")), "sans");

    StyleResolver resolver(d);
    EXPECT_EQ(resolver.resolved(*text), resolved);
}

// Reordering rules of different specificity never changes the outcome and
// resolving twice gives the same map.
TEST(MatchStylesProperty, OrderIndependenceAndIdempotence) {
    std::mt19937 rng(5);
    const char* kinds[] = {"rect", "text", "vbox"};
    const char* classes[] = {"a", "b", "c"};
    for (int round = 0; round < 200; ++round) {
        auto leaf = createElement(ElementKind::Text, {}, {classes[rng() % 3]});
        auto mid = createElement(ElementKind::VBox, {}, {classes[rng() % 3]}, {leaf});
        auto top = createElement(ElementKind::Rect, {}, {classes[rng() % 3]}, {mid});
        Diagram d;
        d.root = top;
        // distinct specificities: classCount = i, typeCount = 1
        for (int i = 0; i < 3; ++i) {
            std::vector<Selector> chain;
            for (int k = 0; k < i; ++k) chain.push_back(cls(classes[rng() % 3]));
            chain.push_back(type(kinds[rng() % 3]));
            d.styleRules.push_back(rule(chain, {{"fill", std::string("r") + std::to_string(i)}}, static_cast<std::size_t>(i)));
        }
        auto expected = matchStyles(d, *leaf, {top.get(), mid.get()});
        EXPECT_EQ(matchStyles(d, *leaf, {top.get(), mid.get()}), expected);
        std::shuffle(d.styleRules.begin(), d.styleRules.end(), rng);
        EXPECT_EQ(matchStyles(d, *leaf, {top.get(), mid.get()}), expected);
    }
}

TEST(MeasureText, Basics) {
    const FontMetrics& font = defaultFont();
    EXPECT_EQ(measureText("", font, 14).width, 0.0);
    EXPECT_EQ(measureText("Menu", font, 28).width, 2 * measureText("Menu", font, 14).width);
    EXPECT_EQ(measureText("a\nbb", font, 10).height, 2 * lineHeight(font, 10));
    EXPECT_EQ(measureText("a\nbb", font, 10).width, measureText("bb", font, 10).width);
}

// Oracle: sum the advances straight from the bundled JSON file.
TEST(MeasureText, SumMatchesBundledTable) {
    std::ifstream in(std::string(LIVEDIAG_SOURCE_DIR) + "/data/fonts/sans.json");
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string json = buffer.str();
    auto advanceOf = [&](int cp) {
        std::string key = "\"" + std::to_string(cp) + "\": ";
        auto pos = json.find(key);
        return std::stod(json.substr(pos + key.size()));
    };
    double expected = (advanceOf('A') + advanceOf('B')) * 14 / 1000;
    const FontMetrics& font = defaultFont();
    EXPECT_EQ(measureText("AB", font, 14).width, expected);
    EXPECT_EQ(measureText("AB", font, 14).width, measureText("A", font, 14).width + measureText("B", font, 14).width);
}

TEST(FontMetrics, ParseErrorsAndFallback) {
    EXPECT_THROW(parseFontMetrics("{"), FontFormatError);
    EXPECT_THROW(parseFontMetrics(R"({"family":"x","unitsPerEm":1000,"ascent":1,"descent":0,"advances":{"q":1}})"),
                 FontFormatError);
    auto f = parseFontMetrics(R"({"family":"x","unitsPerEm":2048,"ascent":1,"descent":0,"advances":{"65":1000}})");
    EXPECT_EQ(f.advance(U'A'), 1000);
    EXPECT_EQ(f.advance(U'Z'), 1024);
    EXPECT_THROW(selectFont({}, "sans"), UnknownFont);
    std::vector<FontMetrics> fonts{defaultFont(), f};
    EXPECT_EQ(&selectFont(fonts, "nope"), &fonts[0]);
    EXPECT_EQ(&selectFont(fonts, "x"), &fonts[1]);
}
