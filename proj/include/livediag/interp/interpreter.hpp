#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "livediag/diagram/style.hpp"
#include "livediag/interp/value.hpp"
#include "livediag/lang/ast.hpp"

namespace livediag::interp {

inline constexpr std::uint64_t kDefaultStepBudget = 5'000'000;
inline constexpr int kDefaultMaxCallDepth = 400;

/// Environments own their bindings; infix operators live in the same map
/// under operatorKey(name).
struct Environment {
    std::unordered_map<std::string, Value> bindings;
    EnvPtr parent;
    ObjectPtr assignTarget;
    bool builtin = false;   // the root holding natives installed by modules
    bool captured = false;  // referenced by a closure
};

std::string operatorKey(const std::string& name);

/// `if` without a matching branch yields an object with this tag so that a
/// following `else` can run; it reads as null everywhere else.
inline constexpr const char* kUnmatchedIfTag = "\x01unmatched-if";

struct ExecutionResult {
    Value value;
    Diagnostics diagnostics;
    std::map<std::string, Span> elementOrigins;
    std::optional<diagram::Diagram> diagram;
};

struct InterpreterOptions {
    std::uint64_t stepBudget = kDefaultStepBudget;
    int maxCallDepth = kDefaultMaxCallDepth;
};

/// Thrown when the step budget runs out; unlike RuntimeError it is never
/// recovered at statement level.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A named set of natives installed into the root environment before
/// execution.
struct Module {
    std::string name;
    std::function<void(Interpreter&, Environment& root)> install;
};

/// Resolves `receiver.name` for element values. Returns nullopt when the
/// member is not handled.
using MemberResolver = std::function<std::optional<Value>(Interpreter&, const Value& receiver, const std::string& name)>;

class Interpreter {
public:
    explicit Interpreter(InterpreterOptions options = {});
    ~Interpreter();
    Interpreter(const Interpreter&) = delete;
    Interpreter& operator=(const Interpreter&) = delete;

    EnvPtr newEnvironment(const EnvPtr& parent);

    const EnvPtr& rootEnv() const { return root_; }

    /// Evaluates every statement, recording RuntimeErrors as diagnostics and
    /// continuing with the next statement.
    Value runProgram(std::shared_ptr<const lang::AstNode> program);

    /// Calls `fn` with positional arguments. `callSpan` is used for errors.
    Value call(const Value& fn, std::vector<Value> args, Span callSpan);

    /// Runs a block in a child of its closure whose bare assignments become
    /// fields of `target` and which also sees `extraBindings`. With
    /// `recoverStatements`, a failing statement is reported and skipped;
    /// otherwise the error propagates.
    Value evalBlockWithTarget(const Value& block, const ObjectPtr& target,
                              const std::vector<std::pair<std::string, Value>>& extraBindings = {},
                              bool recoverStatements = false);

    struct StatementValue {
        Value value;
        const lang::AstNode* statement = nullptr;
    };

    /// Like evalBlockWithTarget with recovery, but returns the value of every
    /// statement that evaluated without error, in order.
    std::vector<StatementValue> evalBlockStatements(const Value& block, const ObjectPtr& target,
                                                    const std::vector<std::pair<std::string, Value>>& extraBindings = {});

    /// Binds an infix operator or identifier in `env`. Throws RuntimeError
    /// with code DuplicateOperator when `env` already binds it.
    void registerInfix(Environment& env, const std::string& name, Value impl, Span span = {});

    void addMemberResolver(MemberResolver resolver);

    void report(Diagnostic diagnostic);
    void report(const RuntimeError& error, Span fallback);
    const Diagnostics& diagnostics() const { return diagnostics_; }

    /// Slot for the diagram produced by a diagram module.
    std::optional<diagram::Diagram>& diagram() { return diagram_; }

    /// Module-private state keyed by module name.
    std::shared_ptr<void>& moduleState(const std::string& name) { return moduleState_[name]; }

    /// Charges `n` steps against the budget.
    void charge(std::uint64_t n = 1);
    std::uint64_t stepsUsed() const { return steps_; }

    /// Looks `name` up along the chain starting at `env`.
    std::optional<Value> lookup(const Environment& env, const std::string& name) const;

private:
    Value eval(const lang::AstNode& node, const EnvPtr& env);
    Value evalCall(const lang::AstNode& node, const EnvPtr& env);
    Value evalInfix(const lang::AstNode& node, const EnvPtr& env);
    Value evalFieldAccess(const Value& object, const std::string& name, Span span);
    Value evalAssign(const lang::AstNode& node, const EnvPtr& env);
    Value callFunction(const FunctionPtr& fn, std::vector<Value>& args, CallContext& ctx);
    Value makeClosure(const lang::AstNode& node, const EnvPtr& env);
    Value runStatements(const lang::AstNode& block, const EnvPtr& env, bool recover);

    InterpreterOptions options_;
    EnvPtr root_;
    std::shared_ptr<const lang::AstNode> program_;
    Diagnostics diagnostics_;
    std::optional<diagram::Diagram> diagram_;
    std::map<std::string, std::shared_ptr<void>> moduleState_;
    std::vector<MemberResolver> memberResolvers_;
    std::vector<std::weak_ptr<Environment>> environments_;
    std::uint64_t steps_ = 0;
    int callDepth_ = 0;
};

/// Core natives: arithmetic, comparison, logic, `range`, `forEach`, `map`,
/// `if`/`else`, `get`, `size`, `object`, `infix`, `str`, `min`, `max`, `abs`.
Module coreModule();

/// Runs `program` in a fresh interpreter with `modules` installed. The result
/// only depends on its inputs.
ExecutionResult evaluateProgram(const lang::AstNode& program, const std::vector<Module>& modules,
                                InterpreterOptions options = {});

}  // namespace livediag::interp
