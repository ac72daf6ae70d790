#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "livediag/lang/document.hpp"
#include "livediag/layout/layout.hpp"
#include "livediag/pipeline.hpp"

namespace livediag::edit {

enum class InteractionKind { MoveElement, ResizeElement, MoveConnectionAnchor, MoveLabel };

const char* toString(InteractionKind kind);
std::optional<InteractionKind> interactionKindFromString(std::string_view name);

enum class AnchorEnd { Start, End };

/// Cumulative parameters relative to the start of the interaction.
struct InteractionParams {
    InteractionKind kind = InteractionKind::MoveElement;
    double dx = 0;
    double dy = 0;
    double dWidth = 0;
    double dHeight = 0;
    double dParam = 0;

    friend bool operator==(const InteractionParams&, const InteractionParams&) = default;
};

/// Failure with a stable code: UnknownElement, NotEditable, SessionStale,
/// InvalidParams or NoActiveInteraction.
class EditError : public std::runtime_error {
public:
    EditError(std::string code, const std::string& message, std::optional<Span> span = std::nullopt)
        : std::runtime_error(message), code_(std::move(code)), span_(span) {}

    const std::string& code() const { return code_; }
    std::optional<Span> span() const { return span_; }

private:
    std::string code_;
    std::optional<Span> span_;
};

enum class Quantity { X, Y, Width, Height, Param };

/// How a slot value is kept inside the range its function accepts.
enum class Domain {
    Any,
    NonNegative,
    UnitOpen,    // wrapped into [0, 1), perimeter parameters
    UnitClosed,  // clamped to [0, 1], label positions
};

/// A number in the document that follows the interaction: base + delta.
struct Slot {
    Quantity quantity = Quantity::X;
    double base = 0;
    Domain domain = Domain::Any;

    double evaluate(const InteractionParams& params) const;
};

struct TemplatePiece {
    std::string text;
    std::optional<Slot> slot;
};

/// Replaces `span` of the start document with the rendered pieces. An
/// insertion (empty span) is left out while all its slots keep their base.
struct PlanEdit {
    Span span;
    std::vector<TemplatePiece> pieces;
    bool insertion = false;
    std::string original;  // text of `span` in the start document

    /// False while every slot keeps its base; the original text stays then.
    bool active(const InteractionParams& params) const;
    std::string render(const InteractionParams& params) const;
};

/// How any parameter values of one interaction map onto the source text,
/// computed once at the start of the interaction.
struct EditPlan {
    InteractionKind kind = InteractionKind::MoveElement;
    std::string targetElementId;  // canvasElement, canvasConnection or label
    std::string sizeElementId;    // resize: the node holding width and height
    std::optional<AnchorEnd> anchorEnd;
    bool relative = false;        // move: the position is an rpos
    std::vector<PlanEdit> edits;  // ascending and disjoint
    std::map<Quantity, Slot> values;

    bool unchanged(const InteractionParams& params) const;
};

/// Builds the plan for interacting with `elementId` or its nearest suitable
/// ancestor. `basis` must be the pipeline run of `document`.
/// Throws EditError (UnknownElement, NotEditable).
EditPlan planInteraction(const SourceDocument& document, const PipelineResult& basis, std::string_view elementId,
                         InteractionKind kind, std::optional<AnchorEnd> anchorEnd = std::nullopt);

/// Start text with the plan applied at `params`.
std::string materialize(const EditPlan& plan, const std::string& startText, const InteractionParams& params);

/// Edits turning the text materialized at `from` into the one at `to`.
std::vector<TextEdit> editsBetween(const EditPlan& plan, const InteractionParams& from, const InteractionParams& to);

/// Perimeter parameter (clockwise from the top-left corner) of the border
/// point of `rect` nearest to `point`.
double perimeterParameter(const layout::Rect& rect, layout::Point point);

struct ElementDelta {
    std::string id;
    double dx = 0;
    double dy = 0;
    double dWidth = 0;
    double dHeight = 0;

    friend bool operator==(const ElementDelta&, const ElementDelta&) = default;
};

/// Change of a displayed diagram relative to the last full render. Boxes move
/// and resize by `moved`; connections whose route changed are replaced whole.
/// `structural` means the element set differs and only a full update helps.
struct PredictionDelta {
    std::vector<ElementDelta> moved;
    std::vector<layout::LayoutedElement> rerouted;
    bool structural = false;

    bool empty() const { return moved.empty() && rerouted.empty() && !structural; }
};

/// Delta that turns `from` into `to`. Translations are chosen so that
/// from + delta reproduces `to` bit for bit.
PredictionDelta diffLayouts(const layout::LayoutedElement& from, const layout::LayoutedElement& to);

/// Applies a delta in place. Returns false when it is structural.
bool applyDelta(layout::LayoutedElement& root, const PredictionDelta& delta);

/// Predicts the diagram for given parameters by substituting the planned
/// values into a copy of an executed element tree and laying it out again.
/// Elements made by the same source construct (a loop body or helper run
/// several times) share the edited literal and receive the value too.
/// The script is not re-run, so effects of script logic that reads the
/// changed values are missing until the next full render.
class Predictor {
public:
    Predictor(std::shared_ptr<const PipelineResult> basis, const EditPlan& plan);

    layout::LayoutedDiagram predict(const InteractionParams& params);
    PredictionDelta delta(const InteractionParams& params);
    const PipelineResult& basis() const { return *basis_; }

private:
    std::shared_ptr<const PipelineResult> basis_;
    EditPlan plan_;
    diagram::Diagram copy_;
    diagram::ElementPtr root_;  // mutable view of copy_.root
    struct Subject {
        diagram::ElementNode* node = nullptr;
        diagram::ElementNode snapshot;  // fields before substitution
        diagram::ElementNode* sizeNode = nullptr;
        diagram::AttributeMap sizeSnapshot;
    };
    std::vector<Subject> subjects_;  // the target first
};

struct ExecutionRequest {
    SourceDocument document;
    InteractionParams params;
};

struct UpdateOutcome {
    std::vector<TextEdit> edits;  // against the document passed to update
    SourceDocument document;      // after the edits
    PredictionDelta prediction;   // relative to the last full render
    std::optional<ExecutionRequest> execute;
};

struct RenderOutcome {
    std::optional<PredictionDelta> catchUp;  // current params are ahead of the render
    std::optional<ExecutionRequest> execute;
    bool finished = false;  // the interaction ended and nothing is running
};

struct EndOutcome {
    std::optional<ExecutionRequest> execute;
    bool finished = false;
};

/// One graphical interaction on one document. Text edits are cumulative
/// against the start snapshot; at most one full execution is in flight and
/// updates arriving meanwhile only replace the pending parameters.
class InteractionSession {
public:
    InteractionSession(SourceDocument start, std::shared_ptr<const PipelineResult> basis, EditPlan plan);

    static InteractionSession begin(const SourceDocument& document, std::shared_ptr<const PipelineResult> basis,
                                    std::string_view elementId, InteractionKind kind,
                                    std::optional<AnchorEnd> anchorEnd = std::nullopt);

    /// Throws EditError SessionStale when `current` is not the text this
    /// session produced last, InvalidParams when the kind differs.
    UpdateOutcome update(const SourceDocument& current, const InteractionParams& params);

    /// Called when the execution requested for `rendered` has finished.
    RenderOutcome onFullRenderComplete(const InteractionParams& rendered, std::shared_ptr<const PipelineResult> result);

    /// Stops accepting updates and requests the final full execution, right
    /// away or once the running one completes.
    EndOutcome end();

    const EditPlan& plan() const { return plan_; }
    const SourceDocument& startDocument() const { return start_; }
    const SourceDocument& document() const { return document_; }
    const InteractionParams& currentParams() const { return current_; }
    const InteractionParams& lastRenderedParams() const { return lastRendered_; }
    bool executionInFlight() const { return inFlight_.has_value(); }
    std::optional<InteractionParams> inFlightParams() const { return inFlight_; }
    bool ended() const { return ended_; }
    bool finished() const { return ended_ && !inFlight_; }

private:
    ExecutionRequest request(const InteractionParams& params);

    SourceDocument start_;
    SourceDocument document_;
    EditPlan plan_;
    std::unique_ptr<Predictor> predictor_;
    InteractionParams current_;
    InteractionParams lastRendered_;
    std::optional<InteractionParams> inFlight_;
    bool ended_ = false;
};

}  // namespace livediag::edit
