#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace etsx::llm {

// Variable reference inside a framework constraint:
//   <Parameter {index}: {type} {name}>  or  <Field {class}: {type} {name}>
// Both ASCII angle brackets and the U+27E8/27E9 glyphs are accepted.
struct ConstraintRef {
  enum class Kind { Parameter, Field };
  Kind kind = Kind::Parameter;
  int index = -1;     // Parameter
  std::string cls;    // Field
  std::string type;
  std::string name;

  std::string canonical() const;
  bool operator==(const ConstraintRef&) const = default;
};

struct RawClause {
  std::string ref_text;   // text between the angle brackets, unvalidated
  std::string relation;   // ==, !=, <, <=, >, >=
  std::string rhs;        // literal or free expression text
};

struct RawConstraint {
  std::string anchor;  // method sig the clauses speak about
  std::vector<RawClause> clauses;
};

struct Clause {
  ConstraintRef ref;
  std::string relation;
  std::string rhs;
};

struct FrameworkConstraint {
  std::string anchor;
  std::vector<Clause> clauses;
  std::string provenance;  // extracted | propagated | final | representative

  std::set<std::string> var_set() const;  // canonical ref strings
  std::string render() const;
};

// Scans completion text for "<ref> rel rhs" clauses. Returns nullopt when
// no clause-shaped content is present at all.
std::optional<RawConstraint> scan_constraint_text(const std::string& text,
                                                  const std::string& anchor);

// Format verifier: every ref must parse as Parameter/Field per the
// grammar; on success the parsed constraint is produced.
bool verify_format(const RawConstraint& raw, FrameworkConstraint* out, std::string* reason);

// The representative element of a family of variable sets: index t such
// that every other set is a subset of set t, if one exists.
std::optional<size_t> pick_representative(const std::vector<std::set<std::string>>& var_sets);

}  // namespace etsx::llm
