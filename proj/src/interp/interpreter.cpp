#include "livediag/interp/interpreter.hpp"

#include <cmath>

namespace livediag::interp {

using lang::AstNode;
using lang::NodeKind;

std::string operatorKey(const std::string& name) { return "\x01" + name; }

namespace {

struct DepthGuard {
    DepthGuard(int& depth, int max, Span span) : depth(depth) {
        if (++depth > max) {
            --depth;
            throw RuntimeError("StackOverflow", "call depth limit of " + std::to_string(max) + " exceeded", span);
        }
    }
    ~DepthGuard() { --depth; }
    int& depth;
};

bool isUnmatched(const Value& v) {
    return v.kind() == ValueKind::Object && v.asObject()->tag == kUnmatchedIfTag;
}

Value normalize(Value v) { return isUnmatched(v) ? Value{} : v; }

}  // namespace

Interpreter::Interpreter(InterpreterOptions options) : options_(options), root_(std::make_shared<Environment>()) {
    root_->builtin = true;
}

Interpreter::~Interpreter() {
    // closures and their environments reference each other; break the cycles
    for (const auto& weak : environments_) {
        if (auto env = weak.lock()) {
            env->bindings.clear();
            env->parent.reset();
            env->assignTarget.reset();
        }
    }
    root_->bindings.clear();
}

EnvPtr Interpreter::newEnvironment(const EnvPtr& parent) {
    // separate control block, so a tracked weak_ptr does not pin the frame
    EnvPtr env(new Environment);
    env->parent = parent;
    return env;
}

void Interpreter::charge(std::uint64_t n) {
    steps_ += n;
    if (steps_ > options_.stepBudget) {
        throw BudgetExceeded("step budget of " + std::to_string(options_.stepBudget) + " exceeded");
    }
}

void Interpreter::report(Diagnostic diagnostic) { diagnostics_.push_back(std::move(diagnostic)); }

void Interpreter::report(const RuntimeError& error, Span fallback) {
    diagnostics_.push_back(Diagnostic{Severity::Error, error.span.value_or(fallback), error.code, error.what()});
}

void Interpreter::addMemberResolver(MemberResolver resolver) { memberResolvers_.push_back(std::move(resolver)); }

std::optional<Value> Interpreter::lookup(const Environment& env, const std::string& name) const {
    for (const Environment* e = &env; e != nullptr; e = e->parent.get()) {
        auto it = e->bindings.find(name);
        if (it != e->bindings.end()) {
            return it->second;
        }
        if (e->assignTarget) {
            if (const Field* f = e->assignTarget->find(name)) {
                return f->value;
            }
        }
    }
    return std::nullopt;
}

void Interpreter::registerInfix(Environment& env, const std::string& name, Value impl, Span span) {
    std::string key = operatorKey(name);
    if (env.bindings.count(key) > 0) {
        throw RuntimeError("DuplicateOperator", "operator '" + name + "' is already defined in this scope", span);
    }
    env.bindings.emplace(std::move(key), std::move(impl));
}

Value Interpreter::runProgram(std::shared_ptr<const AstNode> program) {
    program_ = std::move(program);
    auto env = newEnvironment(root_);
    Value last;
    for (const auto& statement : program_->children) {
        try {
            last = normalize(eval(statement, env));
        } catch (const RuntimeError& e) {
            report(e, statement.span);
            last = Value{};
        } catch (const BudgetExceeded& e) {
            report(Diagnostic{Severity::Error, statement.span, "BudgetExceeded", e.what()});
            return Value{};
        }
    }
    return last;
}

Value Interpreter::runStatements(const AstNode& block, const EnvPtr& env, bool recover) {
    Value last;
    for (const auto& statement : block.children) {
        if (!recover) {
            last = eval(statement, env);
            continue;
        }
        try {
            last = eval(statement, env);
        } catch (const RuntimeError& e) {
            report(e, statement.span);
            last = Value{};
        }
    }
    return normalize(last);
}

Value Interpreter::eval(const AstNode& node, const EnvPtr& env) {
    charge();
    switch (node.kind) {
    case NodeKind::NumberLit: return node.number;
    case NodeKind::StringLit: return node.text;
    case NodeKind::BoolLit: return node.boolean;
    case NodeKind::NullLit: return Value{};
    case NodeKind::Ident: {
        if (auto v = lookup(*env, node.text)) {
            return *v;
        }
        throw RuntimeError("UnknownName", "unknown name '" + node.text + "'", node.span);
    }
    case NodeKind::Assign: return evalAssign(node, env);
    case NodeKind::Call: return evalCall(node, env);
    case NodeKind::InfixCall: return evalInfix(node, env);
    case NodeKind::FunctionLit: return makeClosure(node, env);
    case NodeKind::ListLit: {
        auto list = makeList();
        for (const auto& item : node.children) {
            list->items.push_back(normalize(eval(item, env)));
        }
        return list;
    }
    case NodeKind::FieldAccess: {
        Value object = eval(node.children.front(), env);
        return evalFieldAccess(object, node.text, node.span);
    }
    case NodeKind::Program: return runStatements(node, env, true);
    }
    return Value{};
}

Value Interpreter::makeClosure(const AstNode& node, const EnvPtr& env) {
    auto fn = std::make_shared<Function>();
    fn->params = node.params;
    fn->explicitParams = node.explicitParams;
    fn->body = &node;
    fn->program = program_;
    fn->closure = env;
    if (!env->captured) {
        env->captured = true;
        environments_.push_back(env);
    }
    return fn;
}

Value Interpreter::evalAssign(const AstNode& node, const EnvPtr& env) {
    const AstNode& target = node.children[0];
    const AstNode& rhs = node.children[1];
    Value value = normalize(eval(rhs, env));
    std::optional<Span> literal;
    if (rhs.kind == NodeKind::NumberLit) {
        literal = rhs.span;
    }
    if (target.kind == NodeKind::FieldAccess) {
        Value object = eval(target.children.front(), env);
        if (object.kind() != ValueKind::Object) {
            throw RuntimeError("TypeMismatch", "cannot assign field '" + target.text + "' of a " +
                                                   toString(object.kind()),
                               target.span);
        }
        object.asObject()->set(target.text, value, rhs.span, literal);
        return value;
    }
    const std::string& name = target.text;
    for (Environment* e = env.get(); e != nullptr; e = e->parent.get()) {
        if (!e->builtin && e->bindings.count(name) > 0) {
            e->bindings[name] = value;
            return value;
        }
    }
    for (Environment* e = env.get(); e != nullptr; e = e->parent.get()) {
        if (e->assignTarget) {
            e->assignTarget->set(name, value, rhs.span, literal);
            return value;
        }
    }
    env->bindings[name] = value;
    return value;
}

Value Interpreter::evalFieldAccess(const Value& object, const std::string& name, Span span) {
    switch (object.kind()) {
    case ValueKind::Object: {
        for (const Object* o = object.asObject().get(); o != nullptr; o = o->prototype.get()) {
            if (const Field* f = o->find(name)) {
                return f->value;
            }
        }
        break;
    }
    case ValueKind::Element:
        for (const auto& resolver : memberResolvers_) {
            if (auto v = resolver(*this, object, name)) {
                return *v;
            }
        }
        break;
    case ValueKind::List:
        if (name == "size") {
            return static_cast<double>(object.asList()->items.size());
        }
        break;
    case ValueKind::Str:
        if (name == "length") {
            return static_cast<double>(object.asString().size());
        }
        break;
    default:
        throw RuntimeError("TypeMismatch", std::string("a ") + toString(object.kind()) + " has no field '" + name + "'",
                           span);
    }
    throw RuntimeError("UnknownField", std::string("no field '") + name + "' on " + display(object), span);
}

Value Interpreter::evalCall(const AstNode& node, const EnvPtr& env) {
    const AstNode& calleeNode = node.callee();
    Value callee = eval(calleeNode, env);
    CallContext ctx{*this, node.span, {}, {}, env};
    std::vector<Value> args;
    for (std::size_t i = 0; i < node.argCount(); ++i) {
        const AstNode& arg = node.arg(i);
        if (arg.kind == NodeKind::Assign && arg.children[0].kind == NodeKind::Ident) {
            const AstNode& valueNode = arg.children[1];
            ctx.named[arg.children[0].text] = NamedArg{normalize(eval(valueNode, env)), &valueNode};
            continue;
        }
        args.push_back(normalize(eval(arg, env)));
        ctx.argNodes.push_back(&arg);
    }
    if (callee.kind() != ValueKind::Function) {
        throw RuntimeError("NotCallable", display(callee) + " is not a function", calleeNode.span);
    }
    return callFunction(callee.asFunction(), args, ctx);
}

Value Interpreter::evalInfix(const AstNode& node, const EnvPtr& env) {
    const std::string& op = node.text;
    const AstNode& lhsNode = node.children[0];
    const AstNode& rhsNode = node.children[1];
    if (op == "&&" || op == "||") {
        Value lhs = eval(lhsNode, env);
        if (lhs.kind() != ValueKind::Bool) {
            throw RuntimeError("TypeMismatch", "'" + op + "' needs bool operands", lhsNode.span);
        }
        if (lhs.asBool() == (op == "||")) {
            return lhs;
        }
        Value rhs = eval(rhsNode, env);
        if (rhs.kind() != ValueKind::Bool) {
            throw RuntimeError("TypeMismatch", "'" + op + "' needs bool operands", rhsNode.span);
        }
        return rhs;
    }
    if (op == "else") {
        Value lhs = eval(lhsNode, env);
        if (!isUnmatched(lhs)) {
            return lhs;
        }
        Value rhs = eval(rhsNode, env);
        if (rhs.kind() == ValueKind::Function) {
            return call(rhs, {}, rhsNode.span);
        }
        return rhs;
    }
    auto impl = lookup(*env, operatorKey(op));
    if (!impl) {
        throw RuntimeError("UnknownOperator", "unknown operator '" + op + "'", node.span);
    }
    std::vector<Value> args{normalize(eval(lhsNode, env)), normalize(eval(rhsNode, env))};
    CallContext ctx{*this, node.span, {&lhsNode, &rhsNode}, {}, env};
    if (impl->kind() != ValueKind::Function) {
        throw RuntimeError("NotCallable", "operator '" + op + "' is not bound to a function", node.opSpan);
    }
    return callFunction(impl->asFunction(), args, ctx);
}

Value Interpreter::callFunction(const FunctionPtr& fn, std::vector<Value>& args, CallContext& ctx) {
    charge();
    DepthGuard guard(callDepth_, options_.maxCallDepth, ctx.callSpan);
    if (fn->isNative()) {
        try {
            return fn->native(ctx, args);
        } catch (RuntimeError& e) {
            if (!e.span) {
                e.span = ctx.callSpan;
            }
            throw;
        } catch (const diagram::IllegalChild& e) {
            throw RuntimeError("IllegalChild", e.what(), ctx.callSpan);
        }
    }
    auto env = newEnvironment(fn->closure);
    if (fn->explicitParams) {
        for (std::size_t i = 0; i < fn->params.size(); ++i) {
            env->bindings[fn->params[i]] = i < args.size() ? args[i] : Value{};
        }
        for (auto& [name, arg] : ctx.named) {
            env->bindings[name] = arg.value;
        }
    } else {
        env->bindings["it"] = args.empty() ? Value{} : args.front();
    }
    return runStatements(*fn->body, env, false);
}

Value Interpreter::call(const Value& fn, std::vector<Value> args, Span callSpan) {
    if (fn.kind() != ValueKind::Function) {
        throw RuntimeError("NotCallable", display(fn) + " is not a function", callSpan);
    }
    CallContext ctx{*this, callSpan, {}, {}, root_};
    return callFunction(fn.asFunction(), args, ctx);
}

Value Interpreter::evalBlockWithTarget(const Value& block, const ObjectPtr& target,
                                       const std::vector<std::pair<std::string, Value>>& extraBindings,
                                       bool recoverStatements) {
    if (block.kind() != ValueKind::Function || block.asFunction()->isNative()) {
        throw RuntimeError("TypeMismatch", "expected a block, got " + display(block));
    }
    const auto& fn = block.asFunction();
    charge();
    DepthGuard guard(callDepth_, options_.maxCallDepth, fn->body->span);
    auto env = newEnvironment(fn->closure);
    env->assignTarget = target;
    for (const auto& [name, value] : extraBindings) {
        env->bindings[name] = value;
    }
    return runStatements(*fn->body, env, recoverStatements);
}

std::vector<Interpreter::StatementValue> Interpreter::evalBlockStatements(
    const Value& block, const ObjectPtr& target, const std::vector<std::pair<std::string, Value>>& extraBindings) {
    if (block.kind() != ValueKind::Function || block.asFunction()->isNative()) {
        throw RuntimeError("TypeMismatch", "expected a block, got " + display(block));
    }
    const auto& fn = block.asFunction();
    charge();
    DepthGuard guard(callDepth_, options_.maxCallDepth, fn->body->span);
    auto env = newEnvironment(fn->closure);
    env->assignTarget = target;
    for (const auto& [name, value] : extraBindings) {
        env->bindings[name] = value;
    }
    std::vector<StatementValue> values;
    for (const auto& statement : fn->body->children) {
        try {
            values.push_back(StatementValue{normalize(eval(statement, env)), &statement});
        } catch (const RuntimeError& e) {
            report(e, statement.span);
        }
    }
    return values;
}

ExecutionResult evaluateProgram(const AstNode& program, const std::vector<Module>& modules,
                                InterpreterOptions options) {
    ExecutionResult result;
    {
        Interpreter interpreter(options);
        coreModule().install(interpreter, *interpreter.rootEnv());
        for (const auto& module : modules) {
            module.install(interpreter, *interpreter.rootEnv());
        }
        result.value = interpreter.runProgram(std::make_shared<const AstNode>(program));
        result.diagnostics = interpreter.diagnostics();
        result.diagram = std::move(interpreter.diagram());
    }
    if (result.diagram && result.diagram->root) {
        diagram::forEachElement(*result.diagram->root, [&](const diagram::ElementNode& node) {
            result.elementOrigins.emplace(node.id, node.originSpan);
        });
    }
    return result;
}

}  // namespace livediag::interp
