// Randomized cross-check for the external-variable worklist: a
// path-enumeration oracle recomputes the parameter/field origins from the
// raw statement lists, with no use of the def-use machinery under test.
#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "etsx/ets_extract.hpp"
#include "etsx/ir_parse.hpp"

using namespace etsx;
using namespace etsx::ets;

namespace {

struct GenMethod {
  std::string cls;
  std::string name;
  int arity;
};

// Random framework programs: <= 3 classes, <= 15 statements per method,
// straight-line bodies with one guarded throw.
std::string generate_program(std::mt19937& rng) {
  std::ostringstream os;
  os << "mir/1\n";
  int n_classes = 1 + static_cast<int>(rng() % 3);
  std::vector<GenMethod> methods;  // previously finished methods, callable
  struct GenField {
    std::string cls, name;
    bool is_final;
  };
  std::vector<GenField> fields;          // loadable (final ones exercise exclusion)
  std::vector<GenField> mutable_fields;  // storable
  std::vector<std::string> class_names;
  for (int c = 0; c < n_classes; ++c) class_names.push_back("GC" + std::to_string(c));

  for (int c = 0; c < n_classes; ++c) {
    const std::string& cls = class_names[c];
    os << "class " << cls << " framework\n";
    int n_fields = static_cast<int>(rng() % 3);
    for (int f = 0; f < n_fields; ++f) {
      bool is_final = rng() % 4 == 0;
      os << "  field f" << f << " int" << (is_final ? " final" : "") << "\n";
      fields.push_back(GenField{cls, "f" + std::to_string(f), is_final});
      if (!is_final) mutable_fields.push_back(fields.back());
    }
    int n_methods = 1 + static_cast<int>(rng() % 3);
    for (int m = 0; m < n_methods; ++m) {
      int arity = static_cast<int>(rng() % 4);
      os << "  method m" << m << "(";
      for (int p = 0; p < arity; ++p) {
        if (p) os << ", ";
        os << "p" << p << ":int";
      }
      os << ") " << (rng() % 3 == 0 ? "nonpublic" : "public") << "\n";

      std::vector<std::string> visible;
      for (int p = 0; p < arity; ++p) visible.push_back("p" + std::to_string(p));
      auto atom = [&]() {
        if (visible.empty() || rng() % 3 == 0) return std::to_string(rng() % 10);
        return visible[rng() % visible.size()];
      };
      int straight = static_cast<int>(rng() % 9);
      std::vector<std::string> lines;
      int next_local = 0;
      for (int s = 0; s < straight; ++s) {
        int kind = static_cast<int>(rng() % 4);
        if (kind == 0) {
          std::string target = "v" + std::to_string(next_local++);
          std::string text = "assign " + target + " = " + atom();
          if (rng() % 2) text += " + " + atom();
          lines.push_back(text);
          visible.push_back(target);
        } else if (kind == 1 && !fields.empty()) {
          const GenField& fld = fields[rng() % fields.size()];
          std::string target = "v" + std::to_string(next_local++);
          lines.push_back("field-load " + target + " = " + fld.cls + "." + fld.name);
          visible.push_back(target);
        } else if (kind == 2 && !mutable_fields.empty()) {
          const GenField& fld = mutable_fields[rng() % mutable_fields.size()];
          lines.push_back("field-store " + fld.cls + "." + fld.name + " = " + atom());
        } else if (kind == 3 && !methods.empty()) {
          const GenMethod& callee = methods[rng() % methods.size()];
          std::string text;
          if (rng() % 2) {
            std::string target = "v" + std::to_string(next_local++);
            text = "call " + target + " = " + callee.cls + "." + callee.name + "(";
            visible.push_back(target);
          } else {
            text = "call " + callee.cls + "." + callee.name + "(";
          }
          for (int a = 0; a < callee.arity; ++a) {
            if (a) text += ", ";
            text += atom();
          }
          text += ")";
          lines.push_back(text);
        } else {
          lines.push_back("nop");
        }
      }
      if (visible.empty()) {
        lines.push_back("assign v0 = 1");
        visible.push_back("v0");
      }
      std::string guard = visible[rng() % visible.size()];
      int base = static_cast<int>(lines.size());
      // base: if guard == 0 -> base+1 base+3; throw branch; return
      for (int i = 0; i < base; ++i)
        os << "    " << i << ": " << lines[static_cast<size_t>(i)] << " -> " << (i + 1) << "\n";
      os << "    " << base << ": if " << guard << " == 0 -> " << (base + 1) << " " << (base + 3)
         << "\n";
      os << "    " << (base + 1) << ": assign ex = new GenException(\"boom \", " << guard
         << ") -> " << (base + 2) << "\n";
      os << "    " << (base + 2) << ": throw ex\n";
      os << "    " << (base + 3) << ": return\n";
      os << "  end\n";
      methods.push_back(GenMethod{cls, "m" + std::to_string(m), arity});
    }
    os << "end\n";
  }
  return os.str();
}

// ---- independent path-enumeration oracle -------------------------------

struct Oracle {
  const ir::Program* program;
  const ir::MethodDef* method;
  std::vector<std::vector<int>> preds;
  std::vector<ExternalVar> out;
  std::string root;

  explicit Oracle(const ir::Program& p, const ir::MethodDef& m) : program(&p), method(&m) {
    preds.assign(m.body.size(), {});
    for (const auto& st : m.body)
      for (int s : st.succs) preds[static_cast<size_t>(s)].push_back(st.id);
  }

  static bool defines(const ir::Stmt& st, const std::string& var) {
    auto d = st.defined_var();
    return d && *d == var;
  }

  void emit_param(int loc) {
    ExternalVar ev;
    ev.kind = ExternalVar::Kind::Parameter;
    ev.mtd = method->sig();
    ev.loc = loc;
    ev.influenced = root;
    if (std::find(out.begin(), out.end(), ev) == out.end()) out.push_back(ev);
  }

  void emit_field(const ir::FieldRef& ref) {
    ExternalVar ev;
    ev.kind = ExternalVar::Kind::Field;
    ev.field = ref;
    ev.influenced = root;
    if (std::find(out.begin(), out.end(), ev) == out.end()) out.push_back(ev);
  }

  // first definition of `var` along every acyclic backward path from `at`
  void walk_var(const std::string& var, int at) {
    if (var == "this") return;
    if (preds[static_cast<size_t>(at)].empty()) {
      entry_hit(var);
      return;
    }
    for (int p : preds[static_cast<size_t>(at)]) {
      const ir::Stmt& st = method->body[static_cast<size_t>(p)];
      if (defines(st, var))
        handle_def(st, var);
      else
        walk_var(var, p);
    }
  }

  void walk_field(const ir::FieldRef& ref, int at) {
    if (preds[static_cast<size_t>(at)].empty()) return;  // entry value: outside origin
    for (int p : preds[static_cast<size_t>(at)]) {
      const ir::Stmt& st = method->body[static_cast<size_t>(p)];
      if (st.kind == ir::StmtKind::FieldStore && st.field == ref) {
        if (st.stored.is_var()) walk_var(st.stored.text, st.id);
      } else {
        walk_field(ref, p);
      }
    }
  }

  void handle_def(const ir::Stmt& st, const std::string& var) {
    switch (st.kind) {
      case ir::StmtKind::Assign: {
        std::vector<std::string> vars;
        st.rhs.collect_vars(vars);
        for (const auto& v : vars) walk_var(v, st.id);
        break;
      }
      case ir::StmtKind::Call: {
        if (program->resolve_method(st.callee)) {
          for (const auto& a : st.args)
            if (a.is_var()) walk_var(a.text, st.id);
        }
        break;
      }
      case ir::StmtKind::FieldLoad: {
        const ir::FieldDef* fd = program->find_field(st.field);
        if (!(fd && fd->is_final)) {
          emit_field(st.field);
          walk_field(st.field, st.id);
        }
        break;
      }
      default: break;
    }
    (void)var;
  }

  void entry_hit(const std::string& var) {
    if (auto loc = method->param_loc(var)) emit_param(*loc);
  }

  std::vector<ExternalVar> run(const std::vector<Seed>& seeds) {
    for (const auto& seed : seeds) {
      root = seed.var;
      // the seed statement itself may define the variable; reaching defs
      // are those before it, matching the index under test
      walk_var(seed.var, seed.stmt);
    }
    std::sort(out.begin(), out.end(), [](const ExternalVar& a, const ExternalVar& b) {
      if (a.kind != b.kind) return a.kind < b.kind;
      if (a.kind == ExternalVar::Kind::Parameter) {
        if (a.mtd != b.mtd) return a.mtd < b.mtd;
        if (a.loc != b.loc) return a.loc < b.loc;
      } else if (!(a.field == b.field)) {
        return a.field < b.field;
      }
      return a.influenced < b.influenced;
    });
    return out;
  }
};

}  // namespace

TEST_CASE("external-variable worklist matches the path-enumeration oracle over 200 programs") {
  int checked_sinks = 0;
  for (int seed = 0; seed < 200; ++seed) {
    std::mt19937 rng(static_cast<unsigned>(1000 + seed));
    std::string text = generate_program(rng);
    CAPTURE(seed);
    ir::Program program = ir::parse_program(text);
    AnalysisCache cache(program);
    ExtractConfig config;

    for (const auto& cls : program.classes) {
      for (const auto& m : cls.methods) {
        if (m.body.empty()) continue;
        const ir::Cfg& cfg = cache.cfg_of(m.sig());
        for (const auto& sink : find_sink_points(program, m, cache, config)) {
          Ets ets;
          ets.id.sink = SinkRef{m.sig(), sink.stmt};
          std::vector<Seed> seeds;
          key_conds_and_vars(ets, m, cfg, sink.stmt, CondTag::Basic, config, seeds);
          not_return_conds(ets, m, cfg, sink.stmt, config, seeds);
          try_catch_conds(ets, program, cache, m, sink.stmt, config, seeds);

          auto got = collect_external_vars(program, cache, m, seeds);
          auto expected = Oracle(program, m).run(seeds);
          CAPTURE(m.sig());
          CAPTURE(sink.stmt);
          REQUIRE(got == expected);
          ++checked_sinks;
        }
      }
    }
  }
  CHECK(checked_sinks >= 200);
}
