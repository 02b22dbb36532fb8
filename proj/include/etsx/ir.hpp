#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "etsx/common.hpp"

namespace etsx::ir {

enum class Partition { Framework, Application };

// Synthetic definition ids used by the def-use index. Parameter k is
// defined by kParamDefBase - k; fields with no reaching store in the
// method are defined by kFieldInitDef; `this` by kThisDef.
constexpr int kParamDefBase = -1;
constexpr int kThisDef = -1000;
constexpr int kFieldInitDef = -2000;
inline int param_def_id(int loc) { return kParamDefBase - loc; }
inline bool is_param_def(int id) { return id <= kParamDefBase && id > kThisDef; }
inline int param_loc_of_def(int id) { return kParamDefBase - id; }

struct Atom {
  enum class Kind { Var, Int, Str, Null };
  Kind kind = Kind::Var;
  std::string text;     // variable name or string payload
  long long value = 0;  // integer payload

  static Atom var(std::string name);
  static Atom int_lit(long long v);
  static Atom str_lit(std::string s);
  static Atom null_lit();
  bool is_var() const { return kind == Kind::Var; }
  std::string to_text() const;  // serialized form (strings quoted)
  bool operator==(const Atom&) const = default;
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
const char* cmp_symbol(CmpOp op);

// Boolean tree over comparisons. Leaves compare a variable against a
// variable or literal.
struct CondExpr {
  enum class Kind { Cmp, And, Or, Not };
  Kind kind = Kind::Cmp;
  CmpOp op = CmpOp::Eq;
  Atom lhs, rhs;
  std::vector<CondExpr> kids;

  static CondExpr cmp(Atom l, CmpOp o, Atom r);
  std::string to_text() const;
  void collect_vars(std::vector<std::string>& out) const;  // first-appearance order, deduped
  bool equal(const CondExpr& other) const;
  // Replaces variable leaves per the map (formal -> actual).
  CondExpr substitute(const std::map<std::string, Atom>& subst) const;
};

struct FieldRef {
  std::string cls, field;
  std::string qualified() const { return cls + "." + field; }
  bool operator==(const FieldRef&) const = default;
  bool operator<(const FieldRef& o) const {
    return cls != o.cls ? cls < o.cls : field < o.field;
  }
};

// Right-hand side of an assign: a single atom, a left-associative
// operator chain, or an object construction.
struct RhsExpr {
  enum class Kind { Atom1, Chain, New };
  Kind kind = Kind::Atom1;
  std::vector<Atom> parts;       // Atom1: 1 element; Chain: >= 2
  std::vector<std::string> ops;  // Chain: parts.size()-1 of "+","-","*","/"
  std::string new_type;          // New
  std::vector<Atom> new_args;    // New

  std::string to_text() const;
  void collect_vars(std::vector<std::string>& out) const;
};

enum class StmtKind {
  Assign, Call, If, Switch, Return, Throw, TryEnter, Catch, FieldStore, FieldLoad, Nop
};
const char* stmt_kind_name(StmtKind k);

struct Stmt {
  int id = -1;
  StmtKind kind = StmtKind::Nop;
  int line = 0;  // source line in the .mir text, for diagnostics
  std::vector<int> succs;

  std::string target;            // assign / call result / field-load target
  RhsExpr rhs;                   // assign
  std::string callee;            // call: qualified Class.method
  std::vector<Atom> args;        // call arguments
  CondExpr cond;                 // if / switch
  std::optional<Atom> ret_value; // return
  std::string thrown_var;        // throw
  std::vector<int> try_block;    // try-enter
  int handler = -1;              // try-enter: catch stmt id
  std::string caught_type;       // catch
  std::string bound_var;         // catch: optional bound exception var
  std::vector<int> catch_body;   // catch
  FieldRef field;                // field-store / field-load
  Atom stored;                   // field-store value

  bool is_cond_check() const { return kind == StmtKind::If || kind == StmtKind::Switch; }
  // Variables read by this statement, first-appearance order.
  std::vector<std::string> used_vars() const;
  // Variable defined by this statement, if any.
  std::optional<std::string> defined_var() const;
};

struct Param {
  std::string name, type;
  bool operator==(const Param&) const = default;
};

struct MethodDef {
  std::string name;
  std::string owner;  // class name
  std::vector<Param> params;
  bool is_public = true;
  bool is_entry = false;
  std::vector<std::string> declared_throws;
  std::vector<Stmt> body;
  std::string source;  // optional raw source text

  std::string sig() const { return owner + "." + name; }
  std::optional<int> param_loc(const std::string& name) const;
};

struct FieldDef {
  std::string name, type;
  bool is_final = false;
};

struct ClassDef {
  std::string name;
  std::string superclass;  // empty if none
  std::vector<FieldDef> fields;
  std::vector<MethodDef> methods;
};

struct ExternalDecl {
  std::string sig;
  std::vector<std::string> declared_throws;
};

struct Program {
  std::vector<ClassDef> classes;
  std::map<std::string, Partition> partition;  // class name -> partition
  std::optional<std::string> version;
  std::vector<ExternalDecl> externals;
  std::vector<std::string> app_packages;  // declared application package prefixes

  void build_index();  // called by the parser; validates references

  const ClassDef* find_class(const std::string& name) const;
  const MethodDef* find_method(const std::string& sig) const;  // exact owner match
  // Signature resolution with superclass lookup: "Sub.m" resolves to the
  // nearest definition of m on Sub's superclass chain.
  const MethodDef* resolve_method(const std::string& sig) const;
  const ExternalDecl* find_external(const std::string& sig) const;
  const FieldDef* find_field(const FieldRef& ref) const;  // walks the superclass chain

  std::optional<Partition> partition_of_class(const std::string& cls) const;
  std::optional<Partition> partition_of_sig(const std::string& sig) const;
  bool is_framework_method(const std::string& sig) const;
  bool is_application_method(const std::string& sig) const;

  // true if sub equals super or super appears on sub's superclass chain.
  bool is_subtype(const std::string& sub, const std::string& super) const;
  std::vector<std::string> superclass_chain(const std::string& cls) const;  // cls first
  std::vector<std::string> subclasses_of(const std::string& cls) const;     // transitive, sorted

  bool in_app_packages(const std::string& cls, int prefix_len) const;

private:
  std::map<std::string, size_t> class_index_;
  std::map<std::string, std::pair<size_t, size_t>> method_index_;  // sig -> (class, method)
  std::map<std::string, size_t> external_index_;
};

}  // namespace etsx::ir
