#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "livediag/diagram/element.hpp"
#include "livediag/lang/ast.hpp"
#include "livediag/lang/span.hpp"

namespace livediag::interp {

struct Value;
struct List;
struct Object;
struct Function;
struct Environment;
class Interpreter;
struct CallContext;

using ListPtr = std::shared_ptr<List>;
using ObjectPtr = std::shared_ptr<Object>;
using FunctionPtr = std::shared_ptr<Function>;
using EnvPtr = std::shared_ptr<Environment>;
using ElementPtr = diagram::ElementPtr;

enum class ValueKind { Null, Number, Bool, Str, List, Object, Function, Element };

const char* toString(ValueKind kind);

struct Value {
    std::variant<std::monostate, double, bool, std::string, ListPtr, ObjectPtr, FunctionPtr, ElementPtr> data;

    Value() = default;
    Value(double d) : data(d) {}
    Value(int i) : data(static_cast<double>(i)) {}
    Value(bool b) : data(b) {}
    Value(std::string s) : data(std::move(s)) {}
    Value(const char* s) : data(std::string(s)) {}
    Value(ListPtr l) : data(std::move(l)) {}
    Value(ObjectPtr o) : data(std::move(o)) {}
    Value(FunctionPtr f) : data(std::move(f)) {}
    Value(ElementPtr e) : data(std::move(e)) {}

    ValueKind kind() const { return static_cast<ValueKind>(data.index()); }
    bool isNull() const { return kind() == ValueKind::Null; }
    bool isNumber() const { return kind() == ValueKind::Number; }
    bool isString() const { return kind() == ValueKind::Str; }

    double asNumber() const { return std::get<double>(data); }
    bool asBool() const { return std::get<bool>(data); }
    const std::string& asString() const { return std::get<std::string>(data); }
    const ListPtr& asList() const { return std::get<ListPtr>(data); }
    const ObjectPtr& asObject() const { return std::get<ObjectPtr>(data); }
    const FunctionPtr& asFunction() const { return std::get<FunctionPtr>(data); }
    const ElementPtr& asElement() const { return std::get<ElementPtr>(data); }
};

/// Primitives compare by value, everything else by identity.
bool operator==(const Value& a, const Value& b);

/// Text used by string concatenation and diagnostics.
std::string display(const Value& value);

struct List {
    std::vector<Value> items;
};

/// One object field. `valueSpan` is the expression that produced the value;
/// `literalSpan` is set when that expression was a plain number literal.
struct Field {
    std::string name;
    Value value;
    Span valueSpan;
    std::optional<Span> literalSpan;
};

/// String-keyed map that iterates in insertion order.
struct Object {
    std::vector<Field> fields;
    ObjectPtr prototype;
    std::string tag;                   // native marker such as "point"
    std::shared_ptr<void> nativeData;  // owned by the module that set `tag`

    Field* find(const std::string& name);
    const Field* find(const std::string& name) const;
    /// Own field, then the prototype chain; null when absent.
    Value get(const std::string& name) const;
    void set(const std::string& name, Value value, Span valueSpan = {}, std::optional<Span> literalSpan = {});
};

ObjectPtr makeObject(std::string tag = {});
ListPtr makeList(std::vector<Value> items = {});

class RuntimeError : public std::runtime_error {
public:
    RuntimeError(std::string code, const std::string& message, std::optional<Span> span = {})
        : std::runtime_error(message), code(std::move(code)), span(span) {}

    std::string code;
    std::optional<Span> span;
};

using NativeFn = std::function<Value(CallContext&, std::vector<Value>&)>;

struct Function {
    std::string name;
    // scripted
    std::vector<std::string> params;
    bool explicitParams = false;
    const lang::AstNode* body = nullptr;  // FunctionLit
    std::shared_ptr<const lang::AstNode> program;  // keeps `body` alive
    EnvPtr closure;
    // native
    NativeFn native;

    bool isNative() const { return static_cast<bool>(native); }
};

FunctionPtr makeNative(std::string name, NativeFn fn);

struct NamedArg {
    Value value;
    const lang::AstNode* node = nullptr;
};

/// What a native sees about its call site.
struct CallContext {
    Interpreter& interpreter;
    Span callSpan;
    std::vector<const lang::AstNode*> argNodes;  // positional, parallel to the value list; null for synthetic calls
    std::map<std::string, NamedArg> named;
    EnvPtr callerEnv;

    Span argSpan(std::size_t i) const;
    /// Span of argument i when it is a number literal (including a folded `-N`).
    std::optional<Span> literalSpan(std::size_t i) const;
    std::optional<Value> namedArg(const std::string& name) const;
};

/// Helpers for natives: throw TypeMismatch at the argument span on failure.
double expectNumber(const CallContext& ctx, const std::vector<Value>& args, std::size_t i, const char* what);
const std::string& expectString(const CallContext& ctx, const std::vector<Value>& args, std::size_t i, const char* what);
FunctionPtr expectFunction(const CallContext& ctx, const std::vector<Value>& args, std::size_t i, const char* what);
void expectArgCount(const CallContext& ctx, const std::vector<Value>& args, std::size_t min, std::size_t max,
                    const char* name);

}  // namespace livediag::interp
