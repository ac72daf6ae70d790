#include "livediag/pipeline.hpp"

#include "livediag/uml/class_diagram.hpp"

namespace livediag {

std::vector<interp::Module> standardModules() { return {uml::classDiagramModule()}; }

PipelineResult runPipeline(std::string_view text, const PipelineOptions& options) {
    PipelineResult result;
    result.parsed = lang::parse(text);
    result.diagnostics = result.parsed.errors;

    result.execution = interp::evaluateProgram(result.parsed.program, standardModules(), options.interpreter);
    result.diagnostics.insert(result.diagnostics.end(), result.execution.diagnostics.begin(),
                              result.execution.diagnostics.end());

    if (result.execution.diagram) {
        result.diagram = *result.execution.diagram;
    } else {
        result.diagram.root = diagram::createElement(diagram::ElementKind::Canvas);
        result.diagram.fonts = {diagram::defaultFont()};
    }

    layout::LayoutOptions layoutOptions;
    layoutOptions.offset = options.offset;
    result.layouted = layout::layoutDiagram(result.diagram, layoutOptions);
    result.diagnostics.insert(result.diagnostics.end(), result.layouted.diagnostics.begin(),
                              result.layouted.diagnostics.end());
    return result;
}

}  // namespace livediag
