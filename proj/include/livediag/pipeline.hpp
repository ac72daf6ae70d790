#pragma once

#include <string_view>
#include <vector>

#include "livediag/interp/interpreter.hpp"
#include "livediag/layout/layout.hpp"
#include "livediag/lang/parser.hpp"

namespace livediag {

struct PipelineOptions {
    interp::InterpreterOptions interpreter;
    layout::Point offset;
};

struct PipelineResult {
    lang::ParseResult parsed;
    interp::ExecutionResult execution;
    diagram::Diagram diagram;  // an empty canvas when the script built none
    layout::LayoutedDiagram layouted;
    Diagnostics diagnostics;  // parse, then execution, then layout
};

/// Modules available to scripts: core builtins are always present, plus the
/// class diagram library.
std::vector<interp::Module> standardModules();

/// parse -> evaluate -> layout. Statements that fail are dropped and reported;
/// the rest is still laid out.
PipelineResult runPipeline(std::string_view text, const PipelineOptions& options = {});

}  // namespace livediag
