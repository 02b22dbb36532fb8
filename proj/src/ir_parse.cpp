#include "etsx/ir_parse.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace etsx::ir {

namespace {

struct Token {
  enum class Kind { Ident, Int, Str, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  long long value = 0;
  int col = 0;
};

// Tokenizer for one logical line. Identifiers may contain dots and '$'
// (qualified signatures are single tokens).
class LineLexer {
public:
  LineLexer(const std::string& line, int line_no) : line_(line), line_no_(line_no) { next(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    next();
    return t;
  }
  bool at_end() const { return tok_.kind == Token::Kind::End; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_no_, tok_.col + 1);
  }

  Token expect_ident(const std::string& what) {
    if (tok_.kind != Token::Kind::Ident) fail("expected " + what);
    return take();
  }
  void expect_punct(const std::string& p) {
    if (tok_.kind != Token::Kind::Punct || tok_.text != p) fail("expected '" + p + "'");
    take();
  }
  bool accept_punct(const std::string& p) {
    if (tok_.kind == Token::Kind::Punct && tok_.text == p) {
      take();
      return true;
    }
    return false;
  }
  bool accept_ident(const std::string& word) {
    if (tok_.kind == Token::Kind::Ident && tok_.text == word) {
      take();
      return true;
    }
    return false;
  }
  int line_no() const { return line_no_; }

private:
  void next() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
    tok_ = Token{};
    tok_.col = static_cast<int>(pos_);
    if (pos_ >= line_.size() || line_[pos_] == '#') {
      tok_.kind = Token::Kind::End;
      return;
    }
    char c = line_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      size_t b = pos_;
      while (pos_ < line_.size()) {
        char d = line_[pos_];
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '$' || d == '.')
          ++pos_;
        else
          break;
      }
      tok_.kind = Token::Kind::Ident;
      tok_.text = line_.substr(b, pos_ - b);
      // allow hyphenated statement keywords (try-enter, field-store, ...)
      while (pos_ + 1 < line_.size() && line_[pos_] == '-' &&
             (std::isalpha(static_cast<unsigned char>(line_[pos_ + 1])))) {
        size_t b2 = pos_;
        ++pos_;
        while (pos_ < line_.size() &&
               (std::isalnum(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '_'))
          ++pos_;
        tok_.text += line_.substr(b2, pos_ - b2);
      }
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < line_.size() &&
         std::isdigit(static_cast<unsigned char>(line_[pos_ + 1])))) {
      size_t b = pos_;
      if (c == '-') ++pos_;
      while (pos_ < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos_]))) ++pos_;
      tok_.kind = Token::Kind::Int;
      tok_.text = line_.substr(b, pos_ - b);
      tok_.value = std::stoll(tok_.text);
      return;
    }
    if (c == '"') {
      ++pos_;
      std::string s;
      while (pos_ < line_.size() && line_[pos_] != '"') {
        if (line_[pos_] == '\\' && pos_ + 1 < line_.size()) {
          ++pos_;
          char e = line_[pos_];
          s.push_back(e == 'n' ? '\n' : e);
        } else {
          s.push_back(line_[pos_]);
        }
        ++pos_;
      }
      if (pos_ >= line_.size()) throw ParseError("unterminated string", line_no_, tok_.col + 1);
      ++pos_;
      tok_.kind = Token::Kind::Str;
      tok_.text = s;
      return;
    }
    // multi-char puncts
    static const char* two[] = {"->", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>"};
    for (const char* t : two) {
      if (line_.compare(pos_, 2, t) == 0) {
        tok_.kind = Token::Kind::Punct;
        tok_.text = t;
        pos_ += 2;
        return;
      }
    }
    tok_.kind = Token::Kind::Punct;
    tok_.text = std::string(1, c);
    ++pos_;
  }

  const std::string& line_;
  int line_no_;
  size_t pos_ = 0;
  Token tok_;
};

Atom parse_atom(LineLexer& lx) {
  const Token& t = lx.peek();
  switch (t.kind) {
    case Token::Kind::Ident:
      if (t.text == "null") {
        lx.take();
        return Atom::null_lit();
      }
      return Atom::var(lx.take().text);
    case Token::Kind::Int: return Atom::int_lit(lx.take().value);
    case Token::Kind::Str: return Atom::str_lit(lx.take().text);
    default: lx.fail("expected variable, integer, or string");
  }
}

std::optional<CmpOp> cmp_from(const std::string& s) {
  if (s == "==") return CmpOp::Eq;
  if (s == "!=") return CmpOp::Ne;
  if (s == "<") return CmpOp::Lt;
  if (s == "<=") return CmpOp::Le;
  if (s == ">") return CmpOp::Gt;
  if (s == ">=") return CmpOp::Ge;
  return std::nullopt;
}

CondExpr parse_or(LineLexer& lx);

CondExpr parse_cmp(LineLexer& lx) {
  if (lx.accept_punct("!")) {
    CondExpr n;
    n.kind = CondExpr::Kind::Not;
    lx.expect_punct("(");
    n.kids.push_back(parse_or(lx));
    lx.expect_punct(")");
    return n;
  }
  if (lx.accept_punct("(")) {
    CondExpr inner = parse_or(lx);
    lx.expect_punct(")");
    return inner;
  }
  Atom lhs = parse_atom(lx);
  if (!lhs.is_var()) lx.fail("comparison left-hand side must be a variable");
  if (lx.peek().kind != Token::Kind::Punct) lx.fail("expected comparison operator");
  auto op = cmp_from(lx.peek().text);
  if (!op) lx.fail("expected comparison operator");
  lx.take();
  Atom rhs = parse_atom(lx);
  if (rhs.kind == Atom::Kind::Str && *op != CmpOp::Eq && *op != CmpOp::Ne)
    lx.fail("string operands support only == and !=");
  return CondExpr::cmp(std::move(lhs), *op, std::move(rhs));
}

CondExpr parse_and(LineLexer& lx) {
  CondExpr first = parse_cmp(lx);
  if (!(lx.peek().kind == Token::Kind::Punct && lx.peek().text == "&&")) return first;
  CondExpr node;
  node.kind = CondExpr::Kind::And;
  node.kids.push_back(std::move(first));
  while (lx.accept_punct("&&")) node.kids.push_back(parse_cmp(lx));
  return node;
}

CondExpr parse_or(LineLexer& lx) {
  CondExpr first = parse_and(lx);
  if (!(lx.peek().kind == Token::Kind::Punct && lx.peek().text == "||")) return first;
  CondExpr node;
  node.kind = CondExpr::Kind::Or;
  node.kids.push_back(std::move(first));
  while (lx.accept_punct("||")) node.kids.push_back(parse_and(lx));
  return node;
}

RhsExpr parse_rhs(LineLexer& lx) {
  RhsExpr rhs;
  if (lx.accept_ident("new")) {
    rhs.kind = RhsExpr::Kind::New;
    rhs.new_type = lx.expect_ident("exception type").text;
    lx.expect_punct("(");
    if (!lx.accept_punct(")")) {
      rhs.new_args.push_back(parse_atom(lx));
      while (lx.accept_punct(",")) rhs.new_args.push_back(parse_atom(lx));
      lx.expect_punct(")");
    }
    return rhs;
  }
  rhs.parts.push_back(parse_atom(lx));
  while (lx.peek().kind == Token::Kind::Punct &&
         (lx.peek().text == "+" || lx.peek().text == "-" || lx.peek().text == "*" ||
          lx.peek().text == "/")) {
    rhs.ops.push_back(lx.take().text);
    rhs.parts.push_back(parse_atom(lx));
  }
  rhs.kind = rhs.parts.size() == 1 ? RhsExpr::Kind::Atom1 : RhsExpr::Kind::Chain;
  return rhs;
}

std::vector<int> parse_id_list(LineLexer& lx) {
  std::vector<int> ids;
  while (lx.peek().kind == Token::Kind::Int) ids.push_back(static_cast<int>(lx.take().value));
  return ids;
}

FieldRef parse_field_ref(LineLexer& lx, const Token& tok) {
  auto [cls, fld] = split_member(tok.text);
  if (cls.empty()) lx.fail("field reference must be qualified as Class.field");
  return FieldRef{cls, fld};
}

struct Parser {
  explicit Parser(const std::string& text) {
    std::string cur;
    for (char c : text) {
      if (c == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) lines.push_back(cur);
  }

  std::vector<std::string> lines;
  size_t idx = 0;

  bool done() const { return idx >= lines.size(); }
  int line_no() const { return static_cast<int>(idx) + 1; }

  // Returns the next non-blank, non-comment line as a lexer, or nullopt.
  std::optional<LineLexer> next_line() {
    while (idx < lines.size()) {
      std::string t = trim(lines[idx]);
      if (t.empty() || t[0] == '#') {
        ++idx;
        continue;
      }
      return LineLexer(lines[idx], line_no());
    }
    return std::nullopt;
  }

  Program run() {
    Program prog;
    {
      auto lx = next_line();
      if (!lx) throw ParseError("empty input, expected header mir/1", 1, 1);
      Token t = lx->expect_ident("header mir/1");
      if (t.text != "mir") lx->fail("expected header mir/1");
      lx->expect_punct("/");
      if (lx->peek().kind != Token::Kind::Int || lx->peek().value != 1)
        lx->fail("unsupported mir version");
      lx->take();
      ++idx;
    }
    while (auto lx = next_line()) {
      Token kw = lx->expect_ident("declaration");
      if (kw.text == "version") {
        prog.version = lx->expect_ident("version label").text;
        ++idx;
      } else if (kw.text == "package") {
        prog.app_packages.push_back(lx->expect_ident("package prefix").text);
        ++idx;
      } else if (kw.text == "external") {
        ExternalDecl ext;
        ext.sig = lx->expect_ident("external signature").text;
        if (lx->accept_ident("throws")) {
          ext.declared_throws.push_back(lx->expect_ident("exception type").text);
          while (lx->accept_punct(",")) ext.declared_throws.push_back(lx->expect_ident("exception type").text);
        }
        prog.externals.push_back(std::move(ext));
        ++idx;
      } else if (kw.text == "class") {
        parse_class(prog, *lx);
      } else {
        lx->fail("unexpected top-level keyword '" + kw.text + "'");
      }
    }
    prog.build_index();
    validate(prog);
    return prog;
  }

  void parse_class(Program& prog, LineLexer& lx) {
    ClassDef cls;
    cls.name = lx.expect_ident("class name").text;
    if (lx.accept_ident("extends")) cls.superclass = lx.expect_ident("superclass name").text;
    Token part = lx.expect_ident("partition (framework|application)");
    if (part.text == "framework")
      prog.partition[cls.name] = Partition::Framework;
    else if (part.text == "application")
      prog.partition[cls.name] = Partition::Application;
    else
      lx.fail("partition must be framework or application");
    ++idx;
    while (auto body = next_line()) {
      Token kw = body->expect_ident("class member");
      if (kw.text == "end") {
        ++idx;
        prog.classes.push_back(std::move(cls));
        return;
      }
      if (kw.text == "field") {
        FieldDef f;
        f.name = body->expect_ident("field name").text;
        f.type = body->expect_ident("field type").text;
        if (body->accept_ident("final")) f.is_final = true;
        cls.fields.push_back(std::move(f));
        ++idx;
      } else if (kw.text == "method") {
        parse_method(cls, *body);
      } else {
        body->fail("unexpected keyword '" + kw.text + "' in class body");
      }
    }
    throw ParseError("class " + cls.name + " missing 'end'", line_no(), 1);
  }

  void parse_method(ClassDef& cls, LineLexer& lx) {
    MethodDef m;
    m.owner = cls.name;
    m.name = lx.expect_ident("method name").text;
    lx.expect_punct("(");
    if (!lx.accept_punct(")")) {
      do {
        Param p;
        p.name = lx.expect_ident("parameter name").text;
        lx.expect_punct(":");
        p.type = lx.expect_ident("parameter type").text;
        for (const auto& prev : m.params)
          if (prev.name == p.name) lx.fail("duplicate parameter name " + p.name);
        m.params.push_back(std::move(p));
      } while (lx.accept_punct(","));
      lx.expect_punct(")");
    }
    Token vis = lx.expect_ident("visibility (public|nonpublic)");
    if (vis.text == "public")
      m.is_public = true;
    else if (vis.text == "nonpublic")
      m.is_public = false;
    else
      lx.fail("visibility must be public or nonpublic");
    while (!lx.at_end()) {
      if (lx.accept_ident("entry")) {
        m.is_entry = true;
      } else if (lx.accept_ident("throws")) {
        m.declared_throws.push_back(lx.expect_ident("exception type").text);
        while (lx.accept_punct(",")) m.declared_throws.push_back(lx.expect_ident("exception type").text);
      } else {
        lx.fail("unexpected token after method header");
      }
    }
    ++idx;
    while (auto body = next_line()) {
      if (body->peek().kind == Token::Kind::Ident && body->peek().text == "end") {
        ++idx;
        finish_method(m);
        cls.methods.push_back(std::move(m));
        return;
      }
      if (body->peek().kind == Token::Kind::Ident && body->peek().text == "source") {
        body->take();
        body->expect_punct("<<");
        ++idx;
        std::string src;
        while (idx < lines.size() && trim(lines[idx]) != ">>") {
          src += lines[idx];
          src += "\n";
          ++idx;
        }
        if (idx >= lines.size())
          throw ParseError("unterminated source block in " + m.sig(), line_no(), 1);
        ++idx;  // skip ">>"
        m.source = std::move(src);
        continue;
      }
      parse_stmt(m, *body);
    }
    throw ParseError("method " + m.sig() + " missing 'end'", line_no(), 1);
  }

  void parse_stmt(MethodDef& m, LineLexer& lx) {
    Stmt st;
    st.line = lx.line_no();
    if (lx.peek().kind != Token::Kind::Int) lx.fail("expected statement id");
    st.id = static_cast<int>(lx.take().value);
    lx.expect_punct(":");
    Token kw = lx.expect_ident("statement kind");
    const std::string& k = kw.text;
    if (k == "assign") {
      st.kind = StmtKind::Assign;
      st.target = lx.expect_ident("target variable").text;
      lx.expect_punct("=");
      st.rhs = parse_rhs(lx);
    } else if (k == "call") {
      st.kind = StmtKind::Call;
      Token first = lx.expect_ident("call target or callee");
      if (lx.accept_punct("=")) {
        st.target = first.text;
        st.callee = lx.expect_ident("callee signature").text;
      } else {
        st.callee = first.text;
      }
      lx.expect_punct("(");
      if (!lx.accept_punct(")")) {
        st.args.push_back(parse_atom(lx));
        while (lx.accept_punct(",")) st.args.push_back(parse_atom(lx));
        lx.expect_punct(")");
      }
      if (st.callee.find('.') == std::string::npos)
        lx.fail("callee must be a qualified Class.method signature");
    } else if (k == "if" || k == "switch") {
      st.kind = k == "if" ? StmtKind::If : StmtKind::Switch;
      st.cond = parse_or(lx);
    } else if (k == "return") {
      st.kind = StmtKind::Return;
      if (!lx.at_end() && !(lx.peek().kind == Token::Kind::Punct && lx.peek().text == "->"))
        st.ret_value = parse_atom(lx);
    } else if (k == "throw") {
      st.kind = StmtKind::Throw;
      st.thrown_var = lx.expect_ident("thrown variable").text;
    } else if (k == "try-enter") {
      st.kind = StmtKind::TryEnter;
      if (!lx.accept_ident("block")) lx.fail("expected 'block'");
      st.try_block = parse_id_list(lx);
      if (!lx.accept_ident("handler")) lx.fail("expected 'handler'");
      if (lx.peek().kind != Token::Kind::Int) lx.fail("expected handler stmt id");
      st.handler = static_cast<int>(lx.take().value);
    } else if (k == "catch") {
      st.kind = StmtKind::Catch;
      st.caught_type = lx.expect_ident("caught exception type").text;
      if (lx.accept_ident("as")) st.bound_var = lx.expect_ident("bound variable").text;
      if (!lx.accept_ident("body")) lx.fail("expected 'body'");
      st.catch_body = parse_id_list(lx);
    } else if (k == "field-store") {
      st.kind = StmtKind::FieldStore;
      Token ref = lx.expect_ident("field reference");
      st.field = parse_field_ref(lx, ref);
      lx.expect_punct("=");
      st.stored = parse_atom(lx);
    } else if (k == "field-load") {
      st.kind = StmtKind::FieldLoad;
      st.target = lx.expect_ident("target variable").text;
      lx.expect_punct("=");
      Token ref = lx.expect_ident("field reference");
      st.field = parse_field_ref(lx, ref);
    } else if (k == "nop") {
      st.kind = StmtKind::Nop;
    } else {
      lx.fail("unknown statement kind '" + k + "'");
    }
    if (lx.accept_punct("->")) {
      st.succs = parse_id_list(lx);
      if (!lx.at_end()) lx.fail("malformed successor list");
    } else if (!lx.at_end()) {
      lx.fail("expected '->' successor list or end of line");
    }
    m.body.push_back(std::move(st));
    ++idx;
  }

  void finish_method(MethodDef& m) {
    // ids must be dense 0..n-1 in order
    for (size_t i = 0; i < m.body.size(); ++i) {
      if (m.body[i].id != static_cast<int>(i))
        throw ParseError("statement ids must be dense 0..n-1 in " + m.sig(),
                         m.body[i].line, 1);
    }
    for (const auto& st : m.body) {
      size_t n = st.succs.size();
      switch (st.kind) {
        case StmtKind::If:
        case StmtKind::Switch:
          if (n != 2)
            throw ParseError(std::string(stmt_kind_name(st.kind)) + " requires 2 successors",
                             st.line, 1);
          break;
        case StmtKind::Return:
        case StmtKind::Throw:
          if (n != 0)
            throw ParseError(std::string(stmt_kind_name(st.kind)) + " takes no successors",
                             st.line, 1);
          break;
        default:
          if (n < 1)
            throw ParseError(std::string(stmt_kind_name(st.kind)) + " requires a successor",
                             st.line, 1);
          break;
      }
      auto check_id = [&](int id, const char* what) {
        if (id < 0 || id >= static_cast<int>(m.body.size()))
          throw ParseError(std::string(what) + " id " + std::to_string(id) +
                               " out of range in " + m.sig(),
                           st.line, 1);
      };
      for (int s : st.succs) check_id(s, "successor");
      for (int s : st.try_block) check_id(s, "try block");
      for (int s : st.catch_body) check_id(s, "catch body");
      if (st.kind == StmtKind::TryEnter) {
        check_id(st.handler, "handler");
        if (m.body[st.handler].kind != StmtKind::Catch)
          throw ParseError("try-enter handler must be a catch statement", st.line, 1);
      }
    }
  }

  void validate(const Program& prog) {
    for (const auto& c : prog.classes) {
      std::set<std::string> fnames;
      for (const auto& f : c.fields)
        if (!fnames.insert(f.name).second)
          throw Error("duplicate field " + f.name + " in class " + c.name);
      for (const auto& m : c.methods) {
        for (const auto& st : m.body) {
          if (st.kind == StmtKind::Call) {
            if (!prog.resolve_method(st.callee) && !prog.find_external(st.callee))
              throw Error("dangling callee " + st.callee + " in " + m.sig() +
                          " (declare it external)");
          }
        }
      }
    }
  }
};

void serialize_cond(const CondExpr&, std::ostream&);

}  // namespace

Program parse_program(const std::string& text) { return Parser(text).run(); }

CondExpr parse_cond_text(const std::string& text) {
  LineLexer lx(text, 1);
  CondExpr c = parse_or(lx);
  if (!lx.at_end()) lx.fail("trailing tokens after condition");
  return c;
}

namespace {

void write_stmt(std::ostream& os, const Stmt& st) {
  os << "    " << st.id << ": ";
  switch (st.kind) {
    case StmtKind::Assign:
      os << "assign " << st.target << " = " << st.rhs.to_text();
      break;
    case StmtKind::Call:
      os << "call ";
      if (!st.target.empty()) os << st.target << " = ";
      os << st.callee << "(";
      for (size_t i = 0; i < st.args.size(); ++i) {
        if (i) os << ", ";
        os << st.args[i].to_text();
      }
      os << ")";
      break;
    case StmtKind::If: os << "if " << st.cond.to_text(); break;
    case StmtKind::Switch: os << "switch " << st.cond.to_text(); break;
    case StmtKind::Return:
      os << "return";
      if (st.ret_value) os << " " << st.ret_value->to_text();
      break;
    case StmtKind::Throw: os << "throw " << st.thrown_var; break;
    case StmtKind::TryEnter: {
      os << "try-enter block";
      for (int i : st.try_block) os << " " << i;
      os << " handler " << st.handler;
      break;
    }
    case StmtKind::Catch: {
      os << "catch " << st.caught_type;
      if (!st.bound_var.empty()) os << " as " << st.bound_var;
      os << " body";
      for (int i : st.catch_body) os << " " << i;
      break;
    }
    case StmtKind::FieldStore:
      os << "field-store " << st.field.qualified() << " = " << st.stored.to_text();
      break;
    case StmtKind::FieldLoad:
      os << "field-load " << st.target << " = " << st.field.qualified();
      break;
    case StmtKind::Nop: os << "nop"; break;
  }
  if (!st.succs.empty()) {
    os << " ->";
    for (int s : st.succs) os << " " << s;
  }
  os << "\n";
}

}  // namespace

std::string serialize_program(const Program& program) {
  std::ostringstream os;
  os << "mir/1\n";
  if (program.version) os << "version " << *program.version << "\n";
  for (const auto& p : program.app_packages) os << "package " << p << "\n";
  for (const auto& e : program.externals) {
    os << "external " << e.sig;
    if (!e.declared_throws.empty()) os << " throws " << join(e.declared_throws, ",");
    os << "\n";
  }
  for (const auto& c : program.classes) {
    os << "class " << c.name;
    if (!c.superclass.empty()) os << " extends " << c.superclass;
    os << " "
       << (program.partition.at(c.name) == Partition::Framework ? "framework" : "application")
       << "\n";
    for (const auto& f : c.fields) {
      os << "  field " << f.name << " " << f.type;
      if (f.is_final) os << " final";
      os << "\n";
    }
    for (const auto& m : c.methods) {
      os << "  method " << m.name << "(";
      for (size_t i = 0; i < m.params.size(); ++i) {
        if (i) os << ", ";
        os << m.params[i].name << ":" << m.params[i].type;
      }
      os << ") " << (m.is_public ? "public" : "nonpublic");
      if (m.is_entry) os << " entry";
      if (!m.declared_throws.empty()) os << " throws " << join(m.declared_throws, ",");
      os << "\n";
      if (!m.source.empty()) {
        os << "    source <<\n" << m.source;
        if (!ends_with(m.source, "\n")) os << "\n";
        os << "    >>\n";
      }
      for (const auto& st : m.body) write_stmt(os, st);
      os << "  end\n";
    }
    os << "end\n";
  }
  return os.str();
}

}  // namespace etsx::ir
