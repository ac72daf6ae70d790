#pragma once

#include <string>
#include <vector>

#include "livediag/interp/interpreter.hpp"

namespace livediag::uml {

enum class Marker { None, Arrow, Cross, Diamond, FilledDiamond, Triangle };

const char* toString(Marker marker);

/// How an association operator draws its ends.
struct AssociationStyle {
    std::string op;
    Marker start = Marker::None;
    Marker end = Marker::None;
    bool dashed = false;
};

/// `--`, `-->`, `<--`, `<-->`, `!--`, `--!`, `<>--`, `--<>`, `*--`, `--*`,
/// `extends`, `implements`.
const std::vector<AssociationStyle>& associationTable();

inline constexpr const char* kDashPattern = "6 4";
inline constexpr double kDefaultLabelDistance = 5;
inline constexpr double kDefaultLabelT = 0.5;

/// CSS-like class names put on generated elements, usable in `cls(...)`.
namespace classes {
inline constexpr const char* kClass = "class";
inline constexpr const char* kEnum = "enum";
inline constexpr const char* kAbstract = "abstract";
inline constexpr const char* kBox = "class-box";
inline constexpr const char* kHeader = "class-header";
inline constexpr const char* kName = "class-name";
inline constexpr const char* kStereotype = "stereotype";
inline constexpr const char* kAttributes = "attributes";
inline constexpr const char* kMethods = "methods";
inline constexpr const char* kLiterals = "literals";
inline constexpr const char* kMember = "member";
inline constexpr const char* kConnection = "connection";
}  // namespace classes

/// `classDiagram`, `apos`, `rpos`, and everything available inside a class
/// diagram block.
interp::Module classDiagramModule();

}  // namespace livediag::uml
