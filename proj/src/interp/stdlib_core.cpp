#include <algorithm>
#include <cmath>

#include "livediag/interp/interpreter.hpp"

namespace livediag::interp {

namespace {

Value checked(double result, const CallContext& ctx) {
    if (std::isnan(result)) {
        throw RuntimeError("NaN", "arithmetic produced NaN", ctx.callSpan);
    }
    if (!std::isfinite(result)) {
        throw RuntimeError("NumericOverflow", "arithmetic produced an infinite value", ctx.callSpan);
    }
    return result;
}

[[noreturn]] void operandMismatch(const CallContext& ctx, const char* op, const std::vector<Value>& args) {
    throw RuntimeError("TypeMismatch",
                       std::string("cannot apply '") + op + "' to " + toString(args[0].kind()) + " and " +
                           toString(args[1].kind()),
                       ctx.callSpan);
}

using BinaryNumeric = double (*)(double, double);

NativeFn numeric(const char* op, BinaryNumeric fn, bool checkZero) {
    return [op, fn, checkZero](CallContext& ctx, std::vector<Value>& args) -> Value {
        if (args.size() != 2 || !args[0].isNumber() || !args[1].isNumber()) {
            operandMismatch(ctx, op, args);
        }
        if (checkZero && args[1].asNumber() == 0) {
            throw RuntimeError("DivisionByZero", "division by zero", ctx.callSpan);
        }
        return checked(fn(args[0].asNumber(), args[1].asNumber()), ctx);
    };
}

Value add(CallContext& ctx, std::vector<Value>& args) {
    const Value& a = args[0];
    const Value& b = args[1];
    if (a.isNumber() && b.isNumber()) {
        return checked(a.asNumber() + b.asNumber(), ctx);
    }
    if (a.isString() || b.isString()) {
        if (a.kind() == ValueKind::Function || b.kind() == ValueKind::Function) {
            operandMismatch(ctx, "+", args);
        }
        return display(a) + display(b);
    }
    if (a.kind() == ValueKind::List && b.kind() == ValueKind::List) {
        auto list = makeList(a.asList()->items);
        ctx.interpreter.charge(b.asList()->items.size());
        list->items.insert(list->items.end(), b.asList()->items.begin(), b.asList()->items.end());
        return list;
    }
    operandMismatch(ctx, "+", args);
}

NativeFn ordering(const char* op, bool (*cmp)(int)) {
    return [op, cmp](CallContext& ctx, std::vector<Value>& args) -> Value {
        const Value& a = args[0];
        const Value& b = args[1];
        int order = 0;
        if (a.isNumber() && b.isNumber()) {
            order = a.asNumber() < b.asNumber() ? -1 : (a.asNumber() > b.asNumber() ? 1 : 0);
        } else if (a.isString() && b.isString()) {
            int c = a.asString().compare(b.asString());
            order = c < 0 ? -1 : (c > 0 ? 1 : 0);
        } else {
            operandMismatch(ctx, op, args);
        }
        return cmp(order);
    };
}

std::size_t expectIndex(const CallContext& ctx, const std::vector<Value>& args, std::size_t i, std::size_t size) {
    double index = expectNumber(ctx, args, i, "index");
    if (index < 0 || index != std::floor(index) || index >= static_cast<double>(size)) {
        throw RuntimeError("IndexOutOfRange",
                           "index " + display(args[i]) + " is outside 0.." + std::to_string(size), ctx.argSpan(i));
    }
    return static_cast<std::size_t>(index);
}

void install(Interpreter& interp, Environment& root) {
    auto define = [&root](const std::string& name, NativeFn fn) { root.bindings[name] = makeNative(name, std::move(fn)); };
    auto defineInfix = [&](const std::string& name, NativeFn fn) {
        interp.registerInfix(root, name, makeNative(name, std::move(fn)));
    };

    defineInfix("+", add);
    defineInfix("-", numeric("-", [](double a, double b) { return a - b; }, false));
    defineInfix("*", numeric("*", [](double a, double b) { return a * b; }, false));
    defineInfix("/", numeric("/", [](double a, double b) { return a / b; }, true));
    defineInfix("%", numeric("%", [](double a, double b) { return std::fmod(a, b); }, true));
    defineInfix("==", [](CallContext&, std::vector<Value>& args) -> Value { return args[0] == args[1]; });
    defineInfix("!=", [](CallContext&, std::vector<Value>& args) -> Value { return !(args[0] == args[1]); });
    defineInfix("<", ordering("<", [](int o) { return o < 0; }));
    defineInfix("<=", ordering("<=", [](int o) { return o <= 0; }));
    defineInfix(">", ordering(">", [](int o) { return o > 0; }));
    defineInfix(">=", ordering(">=", [](int o) { return o >= 0; }));

    define(std::string(lang::kPrefixOperatorPrefix) + "-", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        return -expectNumber(ctx, args, 0, "operand of '-'");
    });
    define(std::string(lang::kPrefixOperatorPrefix) + "!", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        if (args.size() != 1 || args[0].kind() != ValueKind::Bool) {
            throw RuntimeError("TypeMismatch", "operand of '!' must be a bool", ctx.argSpan(0));
        }
        return !args[0].asBool();
    });

    define("range", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        expectArgCount(ctx, args, 1, 2, "range");
        double from = 0;
        double to = expectNumber(ctx, args, 0, "range bound");
        if (args.size() == 2) {
            from = to;
            to = expectNumber(ctx, args, 1, "range bound");
        }
        if (from != std::floor(from) || to != std::floor(to)) {
            throw RuntimeError("TypeMismatch", "range bounds must be integers", ctx.callSpan);
        }
        auto list = makeList();
        if (to > from) {
            ctx.interpreter.charge(static_cast<std::uint64_t>(to - from));
            for (double v = from; v < to; ++v) {
                list->items.emplace_back(v);
            }
        }
        return list;
    });

    define("forEach", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        expectArgCount(ctx, args, 2, 2, "forEach");
        if (args[0].kind() != ValueKind::List) {
            throw RuntimeError("TypeMismatch", "forEach expects a list", ctx.argSpan(0));
        }
        auto fn = expectFunction(ctx, args, 1, "forEach body");
        // copy, so the body may append to the list without invalidating iteration
        std::vector<Value> items = args[0].asList()->items;
        for (std::size_t i = 0; i < items.size(); ++i) {
            ctx.interpreter.call(fn, {items[i], static_cast<double>(i)}, ctx.argSpan(1));
        }
        return Value{};
    });

    define("map", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        expectArgCount(ctx, args, 2, 2, "map");
        if (args[0].kind() != ValueKind::List) {
            throw RuntimeError("TypeMismatch", "map expects a list", ctx.argSpan(0));
        }
        auto fn = expectFunction(ctx, args, 1, "map body");
        std::vector<Value> items = args[0].asList()->items;
        auto out = makeList();
        for (std::size_t i = 0; i < items.size(); ++i) {
            out->items.push_back(ctx.interpreter.call(fn, {items[i], static_cast<double>(i)}, ctx.argSpan(1)));
        }
        return out;
    });

    define("if", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        expectArgCount(ctx, args, 2, 3, "if");
        if (args[0].kind() != ValueKind::Bool) {
            throw RuntimeError("TypeMismatch", "if condition must be a bool, got " + display(args[0]), ctx.argSpan(0));
        }
        expectFunction(ctx, args, 1, "if branch");
        if (args[0].asBool()) {
            return ctx.interpreter.call(args[1], {}, ctx.argSpan(1));
        }
        if (args.size() == 3) {
            expectFunction(ctx, args, 2, "else branch");
            return ctx.interpreter.call(args[2], {}, ctx.argSpan(2));
        }
        return makeObject(kUnmatchedIfTag);
    });

    define("get", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        expectArgCount(ctx, args, 2, 2, "get");
        if (args[0].kind() == ValueKind::List) {
            const auto& items = args[0].asList()->items;
            return items[expectIndex(ctx, args, 1, items.size())];
        }
        if (args[0].kind() == ValueKind::Str) {
            const auto& s = args[0].asString();
            return std::string(1, s[expectIndex(ctx, args, 1, s.size())]);
        }
        if (args[0].kind() == ValueKind::Object) {
            return args[0].asObject()->get(expectString(ctx, args, 1, "field name"));
        }
        throw RuntimeError("TypeMismatch", "get expects a list, string or object", ctx.argSpan(0));
    });

    define("size", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        expectArgCount(ctx, args, 1, 1, "size");
        if (args[0].kind() == ValueKind::List) {
            return static_cast<double>(args[0].asList()->items.size());
        }
        if (args[0].kind() == ValueKind::Str) {
            return static_cast<double>(args[0].asString().size());
        }
        throw RuntimeError("TypeMismatch", "size expects a list or string", ctx.argSpan(0));
    });

    define("append", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        expectArgCount(ctx, args, 2, 2, "append");
        if (args[0].kind() != ValueKind::List) {
            throw RuntimeError("TypeMismatch", "append expects a list", ctx.argSpan(0));
        }
        args[0].asList()->items.push_back(args[1]);
        return args[0];
    });

    define("object", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        expectArgCount(ctx, args, 0, 1, "object");
        auto object = makeObject();
        if (args.size() == 1) {
            ctx.interpreter.evalBlockWithTarget(args[0], object);
        }
        return object;
    });

    define("infix", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        expectArgCount(ctx, args, 2, 2, "infix");
        const std::string& name = expectString(ctx, args, 0, "operator name");
        expectFunction(ctx, args, 1, "operator implementation");
        ctx.interpreter.registerInfix(*ctx.callerEnv, name, args[1], ctx.callSpan);
        return Value{};
    });

    define("str", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        expectArgCount(ctx, args, 1, 1, "str");
        return display(args[0]);
    });

    define("min", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        expectArgCount(ctx, args, 2, 2, "min");
        return std::min(expectNumber(ctx, args, 0, "min argument"), expectNumber(ctx, args, 1, "min argument"));
    });
    define("max", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        expectArgCount(ctx, args, 2, 2, "max");
        return std::max(expectNumber(ctx, args, 0, "max argument"), expectNumber(ctx, args, 1, "max argument"));
    });
    define("abs", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        expectArgCount(ctx, args, 1, 1, "abs");
        return std::fabs(expectNumber(ctx, args, 0, "abs argument"));
    });
    define("floor", [](CallContext& ctx, std::vector<Value>& args) -> Value {
        expectArgCount(ctx, args, 1, 1, "floor");
        return std::floor(expectNumber(ctx, args, 0, "floor argument"));
    });
}

}  // namespace

Module coreModule() { return Module{"core", install}; }

}  // namespace livediag::interp
