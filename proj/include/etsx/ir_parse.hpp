#pragma once

#include <string>

#include "etsx/ir.hpp"

namespace etsx::ir {

// Parses mini-IR text (header line "mir/1"). Throws ParseError with
// line/column on malformed input and Error on semantic violations
// (duplicate classes, dangling callees, bad successor lists).
Program parse_program(const std::string& text);

// Byte-stable canonical form; parse(serialize(p)) is structurally equal to p.
std::string serialize_program(const Program& program);

// Parses a condition written in the statement grammar ("a <= 0 && b > 1").
// Used by the ETS store reader.
CondExpr parse_cond_text(const std::string& text);

}  // namespace etsx::ir
