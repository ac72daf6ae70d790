#include "livediag/interp/value.hpp"

#include "livediag/lang/number_format.hpp"

namespace livediag::interp {

const char* toString(ValueKind kind) {
    switch (kind) {
    case ValueKind::Null: return "null";
    case ValueKind::Number: return "number";
    case ValueKind::Bool: return "bool";
    case ValueKind::Str: return "string";
    case ValueKind::List: return "list";
    case ValueKind::Object: return "object";
    case ValueKind::Function: return "function";
    case ValueKind::Element: return "element";
    }
    return "?";
}

bool operator==(const Value& a, const Value& b) {
    if (a.kind() != b.kind()) {
        return false;
    }
    switch (a.kind()) {
    case ValueKind::Null: return true;
    case ValueKind::Number: return a.asNumber() == b.asNumber();
    case ValueKind::Bool: return a.asBool() == b.asBool();
    case ValueKind::Str: return a.asString() == b.asString();
    case ValueKind::List: return a.asList() == b.asList();
    case ValueKind::Object: return a.asObject() == b.asObject();
    case ValueKind::Function: return a.asFunction() == b.asFunction();
    case ValueKind::Element: return a.asElement() == b.asElement();
    }
    return false;
}

std::string display(const Value& value) {
    switch (value.kind()) {
    case ValueKind::Null: return "null";
    case ValueKind::Number: return formatNumber(value.asNumber());
    case ValueKind::Bool: return value.asBool() ? "true" : "false";
    case ValueKind::Str: return value.asString();
    case ValueKind::List: {
        std::string out = "[";
        const auto& items = value.asList()->items;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i > 0) {
                out += ", ";
            }
            out += display(items[i]);
        }
        return out + "]";
    }
    case ValueKind::Object: {
        const auto& object = *value.asObject();
        std::string out = object.tag.empty() ? "{" : object.tag + "{";
        for (std::size_t i = 0; i < object.fields.size(); ++i) {
            if (i > 0) {
                out += ", ";
            }
            out += object.fields[i].name + " = " + display(object.fields[i].value);
        }
        return out + "}";
    }
    case ValueKind::Function: {
        const auto& fn = *value.asFunction();
        return fn.name.empty() ? "<function>" : "<function " + fn.name + ">";
    }
    case ValueKind::Element: return "<" + value.asElement()->id + ">";
    }
    return "?";
}

Field* Object::find(const std::string& name) {
    for (auto& field : fields) {
        if (field.name == name) {
            return &field;
        }
    }
    return nullptr;
}

const Field* Object::find(const std::string& name) const {
    return const_cast<Object*>(this)->find(name);
}

Value Object::get(const std::string& name) const {
    for (const Object* o = this; o != nullptr; o = o->prototype.get()) {
        if (const Field* f = o->find(name)) {
            return f->value;
        }
    }
    return {};
}

void Object::set(const std::string& name, Value value, Span valueSpan, std::optional<Span> literalSpan) {
    if (Field* f = find(name)) {
        f->value = std::move(value);
        f->valueSpan = valueSpan;
        f->literalSpan = literalSpan;
        return;
    }
    fields.push_back(Field{name, std::move(value), valueSpan, literalSpan});
}

ObjectPtr makeObject(std::string tag) {
    auto object = std::make_shared<Object>();
    object->tag = std::move(tag);
    return object;
}

ListPtr makeList(std::vector<Value> items) {
    auto list = std::make_shared<List>();
    list->items = std::move(items);
    return list;
}

FunctionPtr makeNative(std::string name, NativeFn fn) {
    auto f = std::make_shared<Function>();
    f->name = std::move(name);
    f->native = std::move(fn);
    return f;
}

Span CallContext::argSpan(std::size_t i) const {
    if (i < argNodes.size() && argNodes[i] != nullptr) {
        return argNodes[i]->span;
    }
    return callSpan;
}

std::optional<Span> CallContext::literalSpan(std::size_t i) const {
    if (i < argNodes.size() && argNodes[i] != nullptr && argNodes[i]->kind == lang::NodeKind::NumberLit) {
        return argNodes[i]->span;
    }
    return std::nullopt;
}

std::optional<Value> CallContext::namedArg(const std::string& name) const {
    auto it = named.find(name);
    if (it == named.end()) {
        return std::nullopt;
    }
    return it->second.value;
}

namespace {

[[noreturn]] void mismatch(const CallContext& ctx, std::size_t i, const char* what, const char* expected,
                           const std::vector<Value>& args) {
    std::string got = i < args.size() ? toString(args[i].kind()) : "nothing";
    throw RuntimeError("TypeMismatch", std::string(what) + " must be a " + expected + ", got " + got,
                       ctx.argSpan(i));
}

}  // namespace

double expectNumber(const CallContext& ctx, const std::vector<Value>& args, std::size_t i, const char* what) {
    if (i >= args.size() || !args[i].isNumber()) {
        mismatch(ctx, i, what, "number", args);
    }
    return args[i].asNumber();
}

const std::string& expectString(const CallContext& ctx, const std::vector<Value>& args, std::size_t i,
                                const char* what) {
    if (i >= args.size() || !args[i].isString()) {
        mismatch(ctx, i, what, "string", args);
    }
    return args[i].asString();
}

FunctionPtr expectFunction(const CallContext& ctx, const std::vector<Value>& args, std::size_t i, const char* what) {
    if (i >= args.size() || args[i].kind() != ValueKind::Function) {
        mismatch(ctx, i, what, "function", args);
    }
    return args[i].asFunction();
}

void expectArgCount(const CallContext& ctx, const std::vector<Value>& args, std::size_t min, std::size_t max,
                    const char* name) {
    if (args.size() < min || args.size() > max) {
        std::string expected = min == max ? std::to_string(min) : std::to_string(min) + ".." + std::to_string(max);
        throw RuntimeError("ArityMismatch",
                           std::string(name) + " expects " + expected + " arguments, got " + std::to_string(args.size()),
                           ctx.callSpan);
    }
}

}  // namespace livediag::interp
