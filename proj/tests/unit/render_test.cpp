#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <sstream>

#include "livediag/pipeline.hpp"
#include "livediag/render/render.hpp"

using namespace livediag;
using namespace livediag::layout;
using diagram::createElement;
using diagram::ElementKind;
using nlohmann::json;

namespace {

std::string readFile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::vector<std::filesystem::path> corpusFiles() {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(std::filesystem::path(LIVEDIAG_SOURCE_DIR) / "corpus")) {
        if (entry.path().extension() == ".diag") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

int count(const std::string& haystack, const std::string& needle) {
    int n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) {
        ++n;
    }
    return n;
}

void collect(const LayoutedElement& e, std::vector<const LayoutedElement*>& out) {
    out.push_back(&e);
    for (const auto& c : e.children) {
        collect(c, out);
    }
}

// Minimal well-formedness check: tags balance and attributes are quoted.
bool wellFormed(const std::string& xml, std::string& problem) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    while ((i = xml.find('<', i)) != std::string::npos) {
        auto close = xml.find('>', i);
        if (close == std::string::npos) {
            problem = "unterminated tag";
            return false;
        }
        std::string tag = xml.substr(i + 1, close - i - 1);
        i = close + 1;
        if (tag.empty() || tag[0] == '?' || tag[0] == '!') {
            continue;
        }
        if (count(tag, "\"") % 2 != 0) {
            problem = "unbalanced quotes in <" + tag + ">";
            return false;
        }
        if (tag[0] == '/') {
            if (stack.empty() || stack.back() != tag.substr(1)) {
                problem = "mismatched </" + tag.substr(1) + ">";
                return false;
            }
            stack.pop_back();
        } else if (tag.back() != '/') {
            stack.push_back(tag.substr(0, tag.find_first_of(" \n")));
        }
    }
    if (!stack.empty()) {
        problem = "unclosed <" + stack.back() + ">";
        return false;
    }
    return true;
}

// Per-kind field sets, written out independently of the renderer.
const std::map<std::string, std::set<std::string>>& expectedFields() {
    static const std::set<std::string> base = {"id", "kind", "x", "y", "width", "height", "attributes", "originSpan", "children"};
    static const std::map<std::string, std::set<std::string>> fields = [] {
        std::map<std::string, std::set<std::string>> f;
        for (const char* k : {"rect", "ellipse", "path", "canvas", "canvasElement", "label"}) {
            f[k] = base;
        }
        f["text"] = base;
        f["text"].insert({"lines", "lineHeight", "baseline"});
        f["connectionSegment"] = base;
        f["connectionSegment"].insert({"mode", "points"});
        f["canvasConnection"] = base;
        f["canvasConnection"].insert("points");
        return f;
    }();
    return fields;
}

void checkSchema(const json& node, int& problems) {
    auto kind = node.at("kind").get<std::string>();
    auto it = expectedFields().find(kind);
    if (it == expectedFields().end()) {
        ++problems;
        return;
    }
    std::set<std::string> keys;
    for (const auto& [k, v] : node.items()) {
        keys.insert(k);
    }
    if (keys != it->second) {
        ++problems;
    }
    for (const char* k : {"x", "y", "width", "height"}) {
        if (!node[k].is_number()) ++problems;
    }
    if (kind == "connectionSegment") {
        auto mode = node["mode"].get<std::string>();
        std::size_t expected = mode == "line" ? 2 : 4;
        if (node["points"].size() != expected) ++problems;
    }
    for (const auto& c : node["children"]) {
        checkSchema(c, problems);
    }
}

struct RandomProgram {
    std::mt19937 rng;
    explicit RandomProgram(unsigned seed) : rng(seed) {}
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

    std::string make() {
        static const char* ops[] = {"--", "-->", "<--", "<-->", "!--", "--!", "<>--", "--<>", "*--", "--*", "extends", "implements"};
        static const char* sections[] = {"public", "private", "protected", "package"};
        std::ostringstream s;
        s << "classDiagram {\n";
        int n = pick(1, 6);
        for (int i = 0; i < n; ++i) {
            s << "  class(\"C" << i << "\"" << (pick(0, 3) == 0 ? ", abstract = true" : "") << ") {\n";
            int rows = pick(0, 3);
            for (int r = 0; r < rows; ++r) {
                s << "    " << sections[pick(0, 3)] << " { \"m" << r << " : int\"; \"f" << r << "()\" }\n";
            }
            if (pick(0, 2) > 0) {
                s << "    layout { pos = apos(" << pick(-200, 600) << ", " << pick(-200, 600) << ") }\n";
            }
            s << "  }\n";
        }
        if (pick(0, 2) == 0) {
            s << "  enum(\"E\") { \"A\"; \"B\" }\n";
        }
        int m = pick(0, 6);
        for (int k = 0; k < m; ++k) {
            s << "  C" << pick(0, n - 1) << " " << ops[pick(0, 11)] << " C" << pick(0, n - 1);
            switch (pick(0, 3)) {
            case 0: s << " with { label(\"l\", t = 0." << pick(0, 9) << ") }"; break;
            case 1: s << " with { over = start(0." << pick(0, 9) << ").axisAligned(0.5) }"; break;
            case 2: s << " with { over = start().bezier(10, 40, -10, 40) }"; break;
            default: break;
            }
            s << "\n";
        }
        s << "}\n";
        return s.str();
    }
};

}  // namespace

TEST(Svg, EmptyDiagramHasZeroViewBoxAndNoShapes) {
    auto result = runPipeline("classDiagram {\n}\n");
    std::string svg = render::renderSvg(result.layouted);
    EXPECT_NE(svg.find("viewBox=\"0 0 0 0\""), std::string::npos);
    for (const char* shape : {"<rect", "<path", "<text", "<ellipse", "<polygon", "<polyline"}) {
        EXPECT_EQ(svg.find(shape), std::string::npos) << shape;
    }
    std::string problem;
    EXPECT_TRUE(wellFormed(svg, problem)) << problem;
}

TEST(Svg, NoScriptStillRendersEmptyCanvas) {
    auto result = runPipeline("x = 1\n");
    EXPECT_TRUE(result.diagnostics.empty());
    EXPECT_NE(render::renderSvg(result.layouted).find("viewBox=\"0 0 0 0\""), std::string::npos);
}

TEST(Svg, SingleRectAtPosition) {
    auto canvas = createElement(ElementKind::Canvas);
    auto ce = createElement(ElementKind::CanvasElement);
    ce->pos = diagram::PositionSpec{diagram::PositionSpec::Kind::Absolute, 10, 20, {}};
    appendChild(*ce, createElement(ElementKind::Rect, {{"width", 100.0}, {"height", 50.0}}));
    appendChild(*canvas, ce);
    diagram::Diagram d;
    d.root = canvas;
    std::string svg = render::renderSvg(layoutDiagram(d));
    EXPECT_EQ(count(svg, "<rect"), 1);
    EXPECT_NE(svg.find("<rect x=\"10\" y=\"20\" width=\"100\" height=\"50\""), std::string::npos);
    EXPECT_NE(svg.find("viewBox=\"0 10 120 70\""), std::string::npos);
}

TEST(Svg, TextIsEscaped) {
    auto result = runPipeline("classDiagram {\n  class(\"A<B>&\") { public { \"f(x : \\\"q\\\")\" } }\n}\n");
    std::string svg = render::renderSvg(result.layouted);
    EXPECT_NE(svg.find("A&lt;B&gt;&amp;"), std::string::npos);
    std::string problem;
    EXPECT_TRUE(wellFormed(svg, problem)) << problem;
}

TEST(Svg, DashedAndMarkedConnections) {
    auto result = runPipeline(R"DIAG(classDiagram {
  class("A") { layout { pos = apos(0, 0) } }
  class("B") { layout { pos = apos(200, 0) } }
  A implements B
})DIAG");
    std::string svg = render::renderSvg(result.layouted);
    EXPECT_NE(svg.find("stroke-dasharray=\"6 4\""), std::string::npos);
    EXPECT_EQ(count(svg, "<polygon"), 1);
}

TEST(Markers, ShapesPointAtTip) {
    Point tip{100, 50};
    Point d{1, 0};
    auto arrow = render::markerShape("arrow", tip, d);
    ASSERT_EQ(arrow.strokes.size(), 1u);
    EXPECT_EQ(arrow.strokes[0][1], tip);
    EXPECT_EQ(arrow.strokes[0][0].x, 100 - kMarkerSize);
    auto triangle = render::markerShape("triangle", tip, d);
    EXPECT_EQ(triangle.polygon.size(), 3u);
    EXPECT_FALSE(triangle.filled);
    auto filled = render::markerShape("filledDiamond", tip, d);
    EXPECT_EQ(filled.polygon.size(), 4u);
    EXPECT_TRUE(filled.filled);
    EXPECT_EQ(filled.polygon[2], (Point{100 - kMarkerSize, 50}));
    EXPECT_EQ(render::markerShape("cross", tip, d).strokes.size(), 2u);
    auto none = render::markerShape("none", tip, d);
    EXPECT_TRUE(none.strokes.empty() && none.polygon.empty());
}

TEST(Corpus, RendersDeterministicallyAndCompletely) {
    auto files = corpusFiles();
    ASSERT_GE(files.size(), 20u);
    for (const auto& file : files) {
        std::string text = readFile(file);
        auto first = runPipeline(text);
        auto second = runPipeline(text);
        EXPECT_FALSE(hasErrors(first.diagnostics)) << file;
        std::string svg = render::renderSvg(first.layouted);
        EXPECT_EQ(svg, render::renderSvg(second.layouted)) << file;
        std::string problem;
        EXPECT_TRUE(wellFormed(svg, problem)) << file << ": " << problem;

        std::vector<const LayoutedElement*> elements;
        collect(first.layouted.root, elements);
        std::set<std::string> ids;
        for (const auto* e : elements) {
            EXPECT_TRUE(ids.insert(e->id).second) << "duplicate id " << e->id;
            EXPECT_EQ(count(svg, "data-id=\"" + e->id + "\""), 1) << e->id;
        }
        EXPECT_EQ(count(svg, "data-id=\""), static_cast<int>(elements.size())) << file;
    }
}

// Three printed decimals bound the error by 5e-4; the slack covers decimal-to-binary parsing only.
constexpr double kReadBackTolerance = 5e-4 + 1e-9;

TEST(Corpus, SvgGeometryReadsBackWithinFormattingPrecision) {
    std::regex rect(R"re(<g data-id="([^"]+)" data-kind="rect">\s*<rect x="([-0-9.]+)" y="([-0-9.]+)" width="([-0-9.]+)" height="([-0-9.]+)")re");
    std::regex text(R"re(<g data-id="([^"]+)" data-kind="text">\s*<text x="([-0-9.]+)" y="([-0-9.]+)")re");
    for (const auto& file : corpusFiles()) {
        auto result = runPipeline(readFile(file));
        std::string svg = render::renderSvg(result.layouted);
        int checked = 0;
        for (auto it = std::sregex_iterator(svg.begin(), svg.end(), rect); it != std::sregex_iterator(); ++it) {
            const auto* e = findLayouted(result.layouted.root, (*it)[1].str());
            ASSERT_NE(e, nullptr);
            EXPECT_NEAR(std::stod((*it)[2]), e->box.x, kReadBackTolerance);
            EXPECT_NEAR(std::stod((*it)[3]), e->box.y, kReadBackTolerance);
            EXPECT_NEAR(std::stod((*it)[4]), e->box.width, kReadBackTolerance);
            EXPECT_NEAR(std::stod((*it)[5]), e->box.height, kReadBackTolerance);
            ++checked;
        }
        for (auto it = std::sregex_iterator(svg.begin(), svg.end(), text); it != std::sregex_iterator(); ++it) {
            const auto* e = findLayouted(result.layouted.root, (*it)[1].str());
            ASSERT_NE(e, nullptr);
            EXPECT_NEAR(std::stod((*it)[2]), e->box.x, kReadBackTolerance);
            EXPECT_NEAR(std::stod((*it)[3]), e->box.y + e->baseline, kReadBackTolerance);
            ++checked;
        }
        if (file.filename() != "23_empty.diag") {
            EXPECT_GT(checked, 0) << file;
        }
    }
}

TEST(RenderModel, RoundTripsThroughJsonText) {
    for (const auto& file : corpusFiles()) {
        auto result = runPipeline(readFile(file));
        json model = render::toRenderModel(result.layouted);
        json reparsed = json::parse(model.dump());
        EXPECT_EQ(reparsed, model);
        EXPECT_EQ(render::fromRenderModel(reparsed), result.layouted.root) << file;
    }
}

TEST(RenderModel, IdsMatchSvgGroups) {
    auto result = runPipeline(readFile(std::filesystem::path(LIVEDIAG_SOURCE_DIR) / "corpus" / "11_library.diag"));
    json model = render::toRenderModel(result.layouted);
    std::string svg = render::renderSvg(result.layouted);
    std::set<std::string> modelIds;
    std::function<void(const json&)> walk = [&](const json& n) {
        modelIds.insert(n["id"].get<std::string>());
        for (const auto& c : n["children"]) walk(c);
    };
    walk(model["root"]);
    std::set<std::string> svgIds;
    std::regex id(R"re(data-id="([^"]+)")re");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), id); it != std::sregex_iterator(); ++it) {
        svgIds.insert((*it)[1].str());
    }
    EXPECT_EQ(modelIds, svgIds);
}

TEST(RenderModel, RandomDiagramsPassSchemaChecks) {
    RandomProgram gen(2024);
    for (int i = 0; i < 200; ++i) {
        std::string program = gen.make();
        auto result = runPipeline(program);
        json model = render::toRenderModel(result.layouted);
        EXPECT_EQ(model["schemaVersion"], 1);
        int problems = 0;
        checkSchema(model["root"], problems);
        EXPECT_EQ(problems, 0) << program;
        EXPECT_TRUE(render::validateRenderModel(model).empty()) << program;
    }
}

TEST(RenderModel, ValidatorRejectsDamagedModels) {
    auto result = runPipeline(readFile(std::filesystem::path(LIVEDIAG_SOURCE_DIR) / "corpus" / "06_segment_modes.diag"));
    json good = render::toRenderModel(result.layouted);
    ASSERT_TRUE(render::validateRenderModel(good).empty());

    json wrongVersion = good;
    wrongVersion["schemaVersion"] = 2;
    EXPECT_FALSE(render::validateRenderModel(wrongVersion).empty());

    json extraField = good;
    extraField["root"]["children"][0]["extra"] = 1;
    EXPECT_FALSE(render::validateRenderModel(extraField).empty());

    json badAttr = good;
    badAttr["root"]["children"][0]["children"][0]["attributes"]["glow"] = 3;
    EXPECT_FALSE(render::validateRenderModel(badAttr).empty());

    json layoutKind = good;
    layoutKind["root"]["children"][0]["kind"] = "vbox";
    EXPECT_FALSE(render::validateRenderModel(layoutKind).empty());

    EXPECT_THROW(render::fromRenderModel(json::object()), render::RenderModelError);
}
