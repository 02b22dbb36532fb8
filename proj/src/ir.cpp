#include "etsx/ir.hpp"

#include <algorithm>

namespace etsx::ir {

Atom Atom::var(std::string name) {
  Atom a;
  a.kind = Kind::Var;
  a.text = std::move(name);
  return a;
}

Atom Atom::int_lit(long long v) {
  Atom a;
  a.kind = Kind::Int;
  a.value = v;
  return a;
}

Atom Atom::str_lit(std::string s) {
  Atom a;
  a.kind = Kind::Str;
  a.text = std::move(s);
  return a;
}

Atom Atom::null_lit() {
  Atom a;
  a.kind = Kind::Null;
  return a;
}

static std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') { out += "\\n"; continue; }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string Atom::to_text() const {
  switch (kind) {
    case Kind::Var: return text;
    case Kind::Int: return std::to_string(value);
    case Kind::Str: return quote(text);
    case Kind::Null: return "null";
  }
  return {};
}

const char* cmp_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

CondExpr CondExpr::cmp(Atom l, CmpOp o, Atom r) {
  CondExpr c;
  c.kind = Kind::Cmp;
  c.lhs = std::move(l);
  c.op = o;
  c.rhs = std::move(r);
  return c;
}

std::string CondExpr::to_text() const {
  switch (kind) {
    case Kind::Cmp:
      return lhs.to_text() + " " + cmp_symbol(op) + " " + rhs.to_text();
    case Kind::Not:
      return "!(" + kids[0].to_text() + ")";
    case Kind::And:
    case Kind::Or: {
      std::string sep = kind == Kind::And ? " && " : " || ";
      std::string out;
      for (size_t i = 0; i < kids.size(); ++i) {
        if (i) out += sep;
        bool paren = kids[i].kind == Kind::And || kids[i].kind == Kind::Or;
        out += paren ? "(" + kids[i].to_text() + ")" : kids[i].to_text();
      }
      return out;
    }
  }
  return {};
}

void CondExpr::collect_vars(std::vector<std::string>& out) const {
  auto add = [&out](const Atom& a) {
    if (a.is_var() && std::find(out.begin(), out.end(), a.text) == out.end())
      out.push_back(a.text);
  };
  if (kind == Kind::Cmp) {
    add(lhs);
    add(rhs);
  } else {
    for (const auto& k : kids) k.collect_vars(out);
  }
}

bool CondExpr::equal(const CondExpr& other) const {
  if (kind != other.kind) return false;
  if (kind == Kind::Cmp)
    return op == other.op && lhs == other.lhs && rhs == other.rhs;
  if (kids.size() != other.kids.size()) return false;
  for (size_t i = 0; i < kids.size(); ++i)
    if (!kids[i].equal(other.kids[i])) return false;
  return true;
}

CondExpr CondExpr::substitute(const std::map<std::string, Atom>& subst) const {
  CondExpr out = *this;
  if (kind == Kind::Cmp) {
    auto apply = [&subst](Atom& a) {
      if (!a.is_var()) return;
      auto it = subst.find(a.text);
      if (it != subst.end()) a = it->second;
    };
    apply(out.lhs);
    apply(out.rhs);
  } else {
    for (auto& k : out.kids) k = k.substitute(subst);
  }
  return out;
}

std::string RhsExpr::to_text() const {
  switch (kind) {
    case Kind::Atom1:
      return parts[0].to_text();
    case Kind::Chain: {
      std::string out = parts[0].to_text();
      for (size_t i = 1; i < parts.size(); ++i)
        out += " " + ops[i - 1] + " " + parts[i].to_text();
      return out;
    }
    case Kind::New: {
      std::string out = "new " + new_type + "(";
      for (size_t i = 0; i < new_args.size(); ++i) {
        if (i) out += ", ";
        out += new_args[i].to_text();
      }
      return out + ")";
    }
  }
  return {};
}

void RhsExpr::collect_vars(std::vector<std::string>& out) const {
  auto add = [&out](const Atom& a) {
    if (a.is_var() && std::find(out.begin(), out.end(), a.text) == out.end())
      out.push_back(a.text);
  };
  if (kind == Kind::New) {
    for (const auto& a : new_args) add(a);
  } else {
    for (const auto& a : parts) add(a);
  }
}

const char* stmt_kind_name(StmtKind k) {
  switch (k) {
    case StmtKind::Assign: return "assign";
    case StmtKind::Call: return "call";
    case StmtKind::If: return "if";
    case StmtKind::Switch: return "switch";
    case StmtKind::Return: return "return";
    case StmtKind::Throw: return "throw";
    case StmtKind::TryEnter: return "try-enter";
    case StmtKind::Catch: return "catch";
    case StmtKind::FieldStore: return "field-store";
    case StmtKind::FieldLoad: return "field-load";
    case StmtKind::Nop: return "nop";
  }
  return "?";
}

std::vector<std::string> Stmt::used_vars() const {
  std::vector<std::string> out;
  auto add = [&out](const Atom& a) {
    if (a.is_var() && std::find(out.begin(), out.end(), a.text) == out.end())
      out.push_back(a.text);
  };
  switch (kind) {
    case StmtKind::Assign: rhs.collect_vars(out); break;
    case StmtKind::Call:
      for (const auto& a : args) add(a);
      break;
    case StmtKind::If:
    case StmtKind::Switch: cond.collect_vars(out); break;
    case StmtKind::Return:
      if (ret_value) add(*ret_value);
      break;
    case StmtKind::Throw: out.push_back(thrown_var); break;
    case StmtKind::FieldStore: add(stored); break;
    default: break;
  }
  return out;
}

std::optional<std::string> Stmt::defined_var() const {
  switch (kind) {
    case StmtKind::Assign: return target;
    case StmtKind::Call:
      if (!target.empty()) return target;
      return std::nullopt;
    case StmtKind::FieldLoad: return target;
    case StmtKind::Catch:
      if (!bound_var.empty()) return bound_var;
      return std::nullopt;
    default: return std::nullopt;
  }
}

std::optional<int> MethodDef::param_loc(const std::string& pname) const {
  for (size_t i = 0; i < params.size(); ++i)
    if (params[i].name == pname) return static_cast<int>(i);
  return std::nullopt;
}

void Program::build_index() {
  class_index_.clear();
  method_index_.clear();
  external_index_.clear();
  for (size_t ci = 0; ci < classes.size(); ++ci) {
    const auto& c = classes[ci];
    if (!class_index_.emplace(c.name, ci).second)
      throw Error("duplicate class: " + c.name);
    for (size_t mi = 0; mi < c.methods.size(); ++mi) {
      const auto& m = c.methods[mi];
      if (!method_index_.emplace(m.sig(), std::make_pair(ci, mi)).second)
        throw Error("duplicate method: " + m.sig());
    }
  }
  for (size_t ei = 0; ei < externals.size(); ++ei)
    external_index_.emplace(externals[ei].sig, ei);

  // superclass chains must be acyclic and resolvable when declared
  for (const auto& c : classes) {
    std::set<std::string> seen{c.name};
    std::string cur = c.superclass;
    while (!cur.empty()) {
      if (!seen.insert(cur).second)
        throw Error("cyclic superclass chain at class " + c.name);
      const ClassDef* sc = find_class(cur);
      if (!sc) break;  // superclass outside the program is allowed (opaque)
      cur = sc->superclass;
    }
  }
}

const ClassDef* Program::find_class(const std::string& name) const {
  auto it = class_index_.find(name);
  return it == class_index_.end() ? nullptr : &classes[it->second];
}

const MethodDef* Program::find_method(const std::string& sig) const {
  auto it = method_index_.find(sig);
  if (it == method_index_.end()) return nullptr;
  return &classes[it->second.first].methods[it->second.second];
}

const MethodDef* Program::resolve_method(const std::string& sig) const {
  if (const MethodDef* m = find_method(sig)) return m;
  auto [cls, member] = split_member(sig);
  const ClassDef* c = find_class(cls);
  while (c && !c->superclass.empty()) {
    c = find_class(c->superclass);
    if (!c) break;
    if (const MethodDef* m = find_method(c->name + "." + member)) return m;
  }
  return nullptr;
}

const ExternalDecl* Program::find_external(const std::string& sig) const {
  auto it = external_index_.find(sig);
  return it == external_index_.end() ? nullptr : &externals[it->second];
}

const FieldDef* Program::find_field(const FieldRef& ref) const {
  const ClassDef* c = find_class(ref.cls);
  while (c) {
    for (const auto& f : c->fields)
      if (f.name == ref.field) return &f;
    c = c->superclass.empty() ? nullptr : find_class(c->superclass);
  }
  return nullptr;
}

std::optional<Partition> Program::partition_of_class(const std::string& cls) const {
  auto it = partition.find(cls);
  if (it == partition.end()) return std::nullopt;
  return it->second;
}

std::optional<Partition> Program::partition_of_sig(const std::string& sig) const {
  const MethodDef* m = resolve_method(sig);
  if (!m) return std::nullopt;
  return partition_of_class(m->owner);
}

bool Program::is_framework_method(const std::string& sig) const {
  auto p = partition_of_sig(sig);
  return p && *p == Partition::Framework;
}

bool Program::is_application_method(const std::string& sig) const {
  auto p = partition_of_sig(sig);
  return p && *p == Partition::Application;
}

bool Program::is_subtype(const std::string& sub, const std::string& super) const {
  if (sub == super) return true;
  const ClassDef* c = find_class(sub);
  while (c && !c->superclass.empty()) {
    if (c->superclass == super) return true;
    c = find_class(c->superclass);
  }
  return false;
}

std::vector<std::string> Program::superclass_chain(const std::string& cls) const {
  std::vector<std::string> out{cls};
  const ClassDef* c = find_class(cls);
  while (c && !c->superclass.empty()) {
    out.push_back(c->superclass);
    c = find_class(c->superclass);
  }
  return out;
}

std::vector<std::string> Program::subclasses_of(const std::string& cls) const {
  std::vector<std::string> out;
  for (const auto& c : classes)
    if (c.name != cls && is_subtype(c.name, cls)) out.push_back(c.name);
  std::sort(out.begin(), out.end());
  return out;
}

bool Program::in_app_packages(const std::string& cls, int prefix_len) const {
  if (app_packages.empty()) return true;  // nothing declared: no penalty anywhere
  std::string pfx = package_prefix(cls, prefix_len);
  for (const auto& p : app_packages) {
    if (cls == p || pfx == p || starts_with(cls, p + ".")) return true;
  }
  return false;
}

}  // namespace etsx::ir
