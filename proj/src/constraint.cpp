#include "etsx/constraint.hpp"

#include <algorithm>
#include <cctype>

#include "etsx/common.hpp"

namespace etsx::llm {

namespace {

constexpr const char* kLAngle = "\xe2\x9f\xa8";  // U+27E8
constexpr const char* kRAngle = "\xe2\x9f\xa9";  // U+27E9

// Normalizes unicode angle brackets and relations to ASCII.
std::string normalize(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (size_t i = 0; i < text.size();) {
    if (text.compare(i, 3, kLAngle) == 0) {
      out.push_back('<');
      i += 3;
    } else if (text.compare(i, 3, kRAngle) == 0) {
      out.push_back('>');
      i += 3;
    } else if (text.compare(i, 3, "\xe2\x89\xa0") == 0) {  // U+2260 not equal
      out += "!=";
      i += 3;
    } else if (text.compare(i, 3, "\xe2\x89\xa5") == 0) {  // U+2265 >=
      out += ">=";
      i += 3;
    } else if (text.compare(i, 3, "\xe2\x89\xa4") == 0) {  // U+2264 <=
      out += "<=";
      i += 3;
    } else {
      out.push_back(text[i]);
      ++i;
    }
  }
  return out;
}

bool is_ref_start(const std::string& s, size_t i) {
  // "<Parameter" or "<Field" opens a reference; a bare '<' is a relation
  return s[i] == '<' &&
         (s.compare(i + 1, 9, "Parameter") == 0 || s.compare(i + 1, 5, "Field") == 0 ||
          // tolerate arbitrary content before the first colon (bad formats
          // must still reach the format verifier, not vanish at the scanner)
          (i + 1 < s.size() && s.find('>', i + 1) != std::string::npos &&
           s.find(':', i + 1) != std::string::npos &&
           s.find(':', i + 1) < s.find('>', i + 1)));
}

}  // namespace

std::string ConstraintRef::canonical() const {
  if (kind == Kind::Parameter)
    return "Parameter " + std::to_string(index) + ": " + type + " " + name;
  return "Field " + cls + ": " + type + " " + name;
}

std::set<std::string> FrameworkConstraint::var_set() const {
  std::set<std::string> out;
  for (const auto& c : clauses) out.insert(c.ref.canonical());
  return out;
}

std::string FrameworkConstraint::render() const {
  std::string out;
  for (size_t i = 0; i < clauses.size(); ++i) {
    if (i) out += " && ";
    out += "\xe2\x9f\xa8" + clauses[i].ref.canonical() + "\xe2\x9f\xa9 " + clauses[i].relation +
           " " + clauses[i].rhs;
  }
  return out;
}

std::optional<RawConstraint> scan_constraint_text(const std::string& text,
                                                  const std::string& anchor) {
  std::string s = normalize(text);
  RawConstraint raw;
  raw.anchor = anchor;
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '<' || !is_ref_start(s, i)) {
      ++i;
      continue;
    }
    size_t close = s.find('>', i + 1);
    if (close == std::string::npos) break;
    RawClause clause;
    clause.ref_text = s.substr(i + 1, close - i - 1);
    size_t j = close + 1;
    while (j < s.size() && s[j] == ' ') ++j;
    static const char* rels[] = {"==", "!=", "<=", ">=", "<", ">"};
    std::string rel;
    for (const char* r : rels) {
      if (s.compare(j, std::string(r).size(), r) == 0) {
        rel = r;
        break;
      }
    }
    if (rel.empty()) {
      i = close + 1;
      continue;  // reference without a relation: not a clause
    }
    j += rel.size();
    size_t end = s.find('\n', j);
    if (end == std::string::npos) end = s.size();
    size_t semi = s.find(';', j);
    if (semi != std::string::npos && semi < end) end = semi;
    clause.relation = rel;
    clause.rhs = trim(s.substr(j, end - j));
    raw.clauses.push_back(std::move(clause));
    i = end;
  }
  if (raw.clauses.empty()) return std::nullopt;
  return raw;
}

bool verify_format(const RawConstraint& raw, FrameworkConstraint* out, std::string* reason) {
  FrameworkConstraint fc;
  fc.anchor = raw.anchor;
  if (raw.clauses.empty()) {
    if (reason) *reason = "empty clause list";
    return false;
  }
  for (const auto& rc : raw.clauses) {
    // "<Parameter {index}: {type} {name}>" or "<Field {class}: {type} {name}>"
    std::string t = trim(rc.ref_text);
    auto colon = t.find(':');
    if (colon == std::string::npos) {
      if (reason) *reason = "missing ':' in reference <" + t + ">";
      return false;
    }
    std::string head = trim(t.substr(0, colon));
    std::string tail = trim(t.substr(colon + 1));
    auto head_parts = split(head, ' ');
    head_parts.erase(std::remove(head_parts.begin(), head_parts.end(), std::string()),
                     head_parts.end());
    auto tail_parts = split(tail, ' ');
    tail_parts.erase(std::remove(tail_parts.begin(), tail_parts.end(), std::string()),
                     tail_parts.end());
    if (head_parts.size() != 2 || tail_parts.size() != 2) {
      if (reason) *reason = "reference must be <Parameter idx: type name> or <Field cls: type name>, got <" + t + ">";
      return false;
    }
    Clause clause;
    clause.relation = rc.relation;
    clause.rhs = rc.rhs;
    if (rc.rhs.empty()) {
      if (reason) *reason = "missing right-hand side";
      return false;
    }
    if (head_parts[0] == "Parameter") {
      bool numeric = !head_parts[1].empty() &&
                     std::all_of(head_parts[1].begin(), head_parts[1].end(),
                                 [](unsigned char c) { return std::isdigit(c); });
      if (!numeric) {
        if (reason) *reason = "parameter index must be numeric, got '" + head_parts[1] + "'";
        return false;
      }
      clause.ref.kind = ConstraintRef::Kind::Parameter;
      clause.ref.index = std::stoi(head_parts[1]);
    } else if (head_parts[0] == "Field") {
      clause.ref.kind = ConstraintRef::Kind::Field;
      clause.ref.cls = head_parts[1];
    } else {
      if (reason) *reason = "reference kind must be Parameter or Field, got '" + head_parts[0] + "'";
      return false;
    }
    clause.ref.type = tail_parts[0];
    clause.ref.name = tail_parts[1];
    fc.clauses.push_back(std::move(clause));
  }
  if (out) *out = std::move(fc);
  return true;
}

std::optional<size_t> pick_representative(const std::vector<std::set<std::string>>& var_sets) {
  for (size_t t = 0; t < var_sets.size(); ++t) {
    bool upper = true;
    for (size_t i = 0; i < var_sets.size() && upper; ++i) {
      if (i == t) continue;
      for (const auto& v : var_sets[i]) {
        if (!var_sets[t].count(v)) {
          upper = false;
          break;
        }
      }
    }
    if (upper) return t;
  }
  return std::nullopt;
}

}  // namespace etsx::llm
