// vmodels_io.cpp - .fm, .dm, .cdc and .dconfig text formats
#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>

#include "pprvari/diagnostic.hpp"
#include "pprvari/vmodels.hpp"

namespace pprvari::vm {

namespace {

using logic::Dialect;

struct Line {
  int number = 0;
  int indent = 0;
  std::string text;  // trimmed, comment stripped
};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Removes a trailing // comment that is not inside a string literal.
std::string strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && in_string) {
      ++i;
      continue;
    }
    if (s[i] == '"') in_string = !in_string;
    if (!in_string && s.substr(i, 2) == "//") return std::string(s.substr(0, i));
  }
  return std::string(s);
}

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> out;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    std::string_view raw = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++number;
    std::string body = strip_comment(raw);
    int indent = 0;
    for (char c : body) {
      if (c == ' ') indent += 1;
      else if (c == '\t') indent += 4;
      else break;
    }
    std::string t = trim(body);
    if (!t.empty()) out.push_back({number, indent, t});
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

bool is_ident(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; });
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

// Reads a quoted string starting at s[pos] == '"'; advances pos past it.
std::string read_quoted(std::string_view s, std::size_t& pos, int line, int col_base) {
  std::string out;
  ++pos;
  while (pos < s.size() && s[pos] != '"') {
    if (s[pos] == '\\' && pos + 1 < s.size()) {
      ++pos;
      out += s[pos] == 'n' ? '\n' : s[pos];
    } else {
      out += s[pos];
    }
    ++pos;
  }
  if (pos >= s.size()) throw SyntaxError(line, col_base + static_cast<int>(pos), "unterminated string");
  ++pos;
  return out;
}

logic::Formula parse_at(std::string_view text, Dialect d, int line, int col) {
  try {
    return logic::parse_expr(text, d);
  } catch (const SyntaxError& ex) {
    if (ex.line() == 1) throw SyntaxError(line, col + ex.column() - 1, ex.detail());
    throw SyntaxError(line + ex.line() - 1, ex.column(), ex.detail());
  }
}

std::pair<std::string, std::string> split_word(const std::string& text) {
  auto sp = text.find_first_of(" \t");
  if (sp == std::string::npos) return {text, ""};
  return {text.substr(0, sp), trim(std::string_view(text).substr(sp))};
}

// ---------------------------------------------------------------------------
// feature models

const char* group_word(Group g) { return g == Group::Or ? "or" : "alternative"; }

std::string feature_line(const Feature& f) {
  std::string out = f.id;
  std::vector<std::string> attrs;
  if (f.abstract) attrs.emplace_back("abstract");
  if (!f.name.empty()) attrs.push_back("name " + quote(f.name));
  for (const auto& [k, v] : f.attributes) attrs.push_back(k + " " + quote(v));
  if (attrs.empty()) return out;
  out += " {";
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (i) out += ", ";
    out += attrs[i];
  }
  return out + "}";
}

void write_feature(const FeatureModel& fm, const std::string& id, int depth, std::string& out) {
  const Feature& f = fm.features.at(id);
  std::string pad(static_cast<std::size_t>(depth) * 4, ' ');
  out += pad + feature_line(f) + "\n";
  auto kids = fm.children(id);
  if (kids.empty()) return;
  std::string kw_pad = pad + "    ";
  if (f.group != Group::None) {
    out += kw_pad + group_word(f.group) + "\n";
    for (const auto& k : kids) write_feature(fm, k, depth + 2, out);
    return;
  }
  std::optional<Variability> run;
  for (const auto& k : kids) {
    Variability v = fm.features.at(k).variability;
    if (!run || *run != v) {
      out += kw_pad + (v == Variability::Mandatory ? "mandatory" : "optional") + "\n";
      run = v;
    }
    write_feature(fm, k, depth + 2, out);
  }
}

struct Node {
  const Line* line = nullptr;
  std::vector<Node> kids;
};

// Builds an indentation tree from lines[begin, end).
std::vector<Node> nest(const std::vector<Line>& lines, std::size_t& i, std::size_t end, int parent_indent) {
  std::vector<Node> out;
  int level = -1;
  while (i < end && lines[i].indent > parent_indent) {
    const Line& l = lines[i];
    if (level < 0) level = l.indent;
    if (l.indent != level) throw SyntaxError(l.number, l.indent + 1, "inconsistent indentation");
    Node n{&l, {}};
    ++i;
    n.kids = nest(lines, i, end, l.indent);
    out.push_back(std::move(n));
  }
  return out;
}

Feature parse_feature_line(const Line& l) {
  Feature f;
  const std::string& t = l.text;
  std::size_t pos = 0;
  while (pos < t.size() && t[pos] != ' ' && t[pos] != '{' && t[pos] != '\t') ++pos;
  f.id = t.substr(0, pos);
  int base = l.indent + 1;
  if (!is_ident(f.id)) throw SyntaxError(l.number, base, "invalid feature id '" + f.id + "'");
  while (pos < t.size() && (t[pos] == ' ' || t[pos] == '\t')) ++pos;
  if (pos == t.size()) return f;
  if (t[pos] != '{') throw SyntaxError(l.number, base + static_cast<int>(pos), "expected '{' or end of line");
  ++pos;
  while (true) {
    while (pos < t.size() && (t[pos] == ' ' || t[pos] == '\t')) ++pos;
    if (pos < t.size() && t[pos] == '}') {
      ++pos;
      break;
    }
    std::size_t kstart = pos;
    while (pos < t.size() && (std::isalnum(static_cast<unsigned char>(t[pos])) != 0 || t[pos] == '_' || t[pos] == '-' || t[pos] == '.'))
      ++pos;
    std::string key = t.substr(kstart, pos - kstart);
    if (key.empty()) throw SyntaxError(l.number, base + static_cast<int>(pos), "expected attribute");
    while (pos < t.size() && (t[pos] == ' ' || t[pos] == '\t')) ++pos;
    if (pos < t.size() && t[pos] == '"') {
      std::string value = read_quoted(t, pos, l.number, base);
      if (key == "name") {
        f.name = value;
      } else if (!f.attributes.insert(key, value)) {
        throw SyntaxError(l.number, base + static_cast<int>(kstart), "duplicate attribute '" + key + "'");
      }
    } else if (key == "abstract") {
      f.abstract = true;
    } else {
      throw SyntaxError(l.number, base + static_cast<int>(kstart), "attribute '" + key + "' needs a quoted value");
    }
    while (pos < t.size() && (t[pos] == ' ' || t[pos] == '\t')) ++pos;
    if (pos < t.size() && t[pos] == ',') {
      ++pos;
      continue;
    }
    if (pos < t.size() && t[pos] == '}') {
      ++pos;
      break;
    }
    throw SyntaxError(l.number, base + static_cast<int>(pos), "expected ',' or '}'");
  }
  if (pos != t.size()) throw SyntaxError(l.number, base + static_cast<int>(pos), "trailing text after '}'");
  return f;
}

void read_feature(const Node& n, std::optional<std::string> parent, Variability v, FeatureModel& fm) {
  Feature f = parse_feature_line(*n.line);
  f.parent = std::move(parent);
  f.variability = v;
  std::string id = f.id;
  if (fm.features.contains(id)) throw SyntaxError(n.line->number, n.line->indent + 1, "duplicate feature '" + id + "'");
  fm.features.insert(id, f);
  Feature& self = fm.features.at(id);
  bool plain = false;
  for (const auto& kw : n.kids) {
    const std::string& word = kw.line->text;
    Group g = Group::None;
    Variability cv = Variability::Mandatory;
    if (word == "mandatory") {
      plain = true;
    } else if (word == "optional") {
      plain = true;
      cv = Variability::Optional;
    } else if (word == "or" || word == "alternative") {
      g = word == "or" ? Group::Or : Group::Alternative;
      cv = Variability::Optional;
      if (self.group != Group::None) throw SyntaxError(kw.line->number, kw.line->indent + 1, "feature '" + id + "' has two groups");
    } else {
      throw SyntaxError(kw.line->number, kw.line->indent + 1,
                        "expected mandatory, optional, or or alternative, found '" + word + "'");
    }
    if (g != Group::None) fm.features.at(id).group = g;
    if (plain && fm.features.at(id).group != Group::None)
      throw SyntaxError(kw.line->number, kw.line->indent + 1, "feature '" + id + "' mixes a group with plain children");
    for (const auto& child : kw.kids) read_feature(child, id, cv, fm);
  }
}

// ---------------------------------------------------------------------------
// cdc chunking

bool ends_open(const std::string& s) {
  static const char* kOps[] = {"=>", "||", "&&", "==", "&", "|", "=", "!", "("};
  for (const char* op : kOps) {
    std::string_view o(op);
    if (s.size() >= o.size() && s.compare(s.size() - o.size(), o.size(), o) == 0) return true;
  }
  return false;
}

bool starts_continuation(const std::string& s) {
  static const char* kOps[] = {"=>", "||", "&&", "==", "&", "|", "=", ")"};
  for (const char* op : kOps)
    if (s.rfind(op, 0) == 0) return true;
  return false;
}

int paren_balance(const std::string& s) {
  int b = 0;
  for (char c : s) b += c == '(' ? 1 : c == ')' ? -1 : 0;
  return b;
}

// Length of a leading "LABEL)" prefix, or 0.
std::size_t label_length(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) != 0 || s[i] == '_')) ++i;
  if (i > 0 && i < s.size() && s[i] == ')') return i + 1;
  return 0;
}

struct Chunk {
  std::string text;
  int line = 0;
  int column = 0;
};

}  // namespace

// ---------------------------------------------------------------------------

std::string fm_write(const FeatureModel& fm) {
  if (fm.model_id.empty() && fm.features.empty() && fm.constraints.empty()) return "";
  std::string out = "featuremodel " + fm.model_id + "\n";
  if (!fm.root.empty()) {
    out += "features\n";
    write_feature(fm, fm.root, 1, out);
  }
  if (!fm.constraints.empty()) {
    out += "constraints\n";
    for (const auto& c : fm.constraints) out += "    " + logic::to_string(c, Dialect::Dm) + "\n";
  }
  return out;
}

FeatureModel fm_read(std::string_view text) {
  FeatureModel fm;
  auto lines = split_lines(text);
  if (lines.empty()) return fm;
  std::size_t i = 0;
  auto [kw, id] = split_word(lines[0].text);
  if (kw != "featuremodel" || lines[0].indent != 0)
    throw SyntaxError(lines[0].number, 1, "expected 'featuremodel <id>'");
  fm.model_id = id;
  ++i;
  bool seen_features = false;
  bool seen_constraints = false;
  while (i < lines.size()) {
    const Line& l = lines[i];
    if (l.indent != 0) throw SyntaxError(l.number, l.indent + 1, "expected 'features' or 'constraints' section");
    if (l.text == "features" && !seen_features && !seen_constraints) {
      seen_features = true;
      ++i;
      std::size_t end = i;
      while (end < lines.size() && lines[end].indent > 0) ++end;
      auto roots = nest(lines, i, end, 0);
      if (roots.size() > 1) throw SyntaxError(roots[1].line->number, roots[1].line->indent + 1, "more than one root feature");
      if (!roots.empty()) {
        read_feature(roots[0], std::nullopt, Variability::Mandatory, fm);
        fm.root = fm.features.begin()->first;
      }
      i = end;
    } else if (l.text == "constraints" && !seen_constraints) {
      seen_constraints = true;
      ++i;
      while (i < lines.size() && lines[i].indent > 0) {
        fm.constraints.push_back(parse_at(lines[i].text, Dialect::Dm, lines[i].number, lines[i].indent + 1));
        ++i;
      }
    } else {
      throw SyntaxError(l.number, 1, "unexpected '" + l.text + "'");
    }
  }
  return fm;
}

std::string dm_write(const DecisionModel& dm) {
  if (dm.model_id.empty() && dm.decisions.empty()) return "";
  std::string out = "decisionmodel " + dm.model_id + "\n";
  for (const auto& [id, d] : dm.decisions) {
    out += "\ndecision " + id + " {\n";
    out += "    question: " + quote(d.question) + "\n";
    out += std::string("    type: ") + (d.kind == RangeKind::Boolean ? "boolean" : "enumeration") + "\n";
    if (d.kind == RangeKind::Enumeration) {
      out += "    range:";
      for (std::size_t i = 0; i < d.options.size(); ++i) out += (i ? " | " : " ") + d.options[i];
      out += "\n";
    }
    out += "    visible: " + logic::to_string(d.visibility, Dialect::Dm) + "\n";
    if (!d.rules.empty()) {
      out += "    rules: ";
      for (std::size_t i = 0; i < d.rules.size(); ++i) out += (i ? "; " : "") + logic::to_string(d.rules[i], Dialect::Dm);
      out += "\n";
    }
    out += "}\n";
  }
  return out;
}

DecisionModel dm_read(std::string_view text) {
  DecisionModel dm;
  auto lines = split_lines(text);
  if (lines.empty()) return dm;
  auto [kw, id] = split_word(lines[0].text);
  if (kw != "decisionmodel") throw SyntaxError(lines[0].number, lines[0].indent + 1, "expected 'decisionmodel <id>'");
  dm.model_id = id;
  std::size_t i = 1;
  while (i < lines.size()) {
    const Line& head = lines[i];
    auto [dkw, rest] = split_word(head.text);
    if (dkw != "decision" || rest.size() < 2 || rest.back() != '{')
      throw SyntaxError(head.number, head.indent + 1, "expected 'decision <id> {'");
    Decision d;
    d.id = trim(std::string_view(rest).substr(0, rest.size() - 1));
    if (!is_ident(d.id)) throw SyntaxError(head.number, head.indent + 10, "invalid decision id '" + d.id + "'");
    ++i;
    bool closed = false;
    bool have_type = false;
    std::set<std::string> keys;
    while (i < lines.size()) {
      const Line& l = lines[i++];
      if (l.text == "}") {
        closed = true;
        break;
      }
      auto colon = l.text.find(':');
      if (colon == std::string::npos) throw SyntaxError(l.number, l.indent + 1, "expected 'key: value'");
      std::string key = trim(std::string_view(l.text).substr(0, colon));
      std::string value = trim(std::string_view(l.text).substr(colon + 1));
      int vcol = l.indent + 1 + static_cast<int>(l.text.find_first_not_of(" \t", colon + 1));
      if (!keys.insert(key).second) throw SyntaxError(l.number, l.indent + 1, "duplicate key '" + key + "'");
      if (key == "question") {
        std::size_t pos = 0;
        if (value.empty() || value[0] != '"') throw SyntaxError(l.number, vcol, "question must be a quoted string");
        d.question = read_quoted(value, pos, l.number, vcol);
        if (pos != value.size()) throw SyntaxError(l.number, vcol + static_cast<int>(pos), "trailing text after question");
      } else if (key == "type") {
        have_type = true;
        if (value == "boolean") d.kind = RangeKind::Boolean;
        else if (value == "enumeration") d.kind = RangeKind::Enumeration;
        else throw SyntaxError(l.number, vcol, "unknown type '" + value + "'");
      } else if (key == "range") {
        std::size_t start = 0;
        std::vector<std::string> opts;
        while (true) {
          auto bar = value.find('|', start);
          std::string opt = trim(std::string_view(value).substr(start, bar == std::string::npos ? std::string::npos : bar - start));
          if (!is_ident(opt)) throw SyntaxError(l.number, vcol + static_cast<int>(start), "invalid option '" + opt + "'");
          if (std::find(opts.begin(), opts.end(), opt) != opts.end())
            throw SyntaxError(l.number, vcol + static_cast<int>(start), "duplicate option '" + opt + "'");
          opts.push_back(opt);
          if (bar == std::string::npos) break;
          start = bar + 1;
        }
        d.options = std::move(opts);
      } else if (key == "visible") {
        d.visibility = parse_at(value, Dialect::Dm, l.number, vcol);
      } else if (key == "rules") {
        std::size_t start = 0;
        while (start <= value.size()) {
          auto semi = value.find(';', start);
          std::string part = std::string(value.substr(start, semi == std::string::npos ? std::string::npos : semi - start));
          if (!trim(part).empty()) d.rules.push_back(parse_at(part, Dialect::Dm, l.number, vcol + static_cast<int>(start)));
          if (semi == std::string::npos) break;
          start = semi + 1;
        }
      } else {
        throw SyntaxError(l.number, l.indent + 1, "unknown key '" + key + "'");
      }
    }
    if (!closed) throw SyntaxError(head.number, head.indent + 1, "decision '" + d.id + "' is not closed");
    if (!have_type) throw SyntaxError(head.number, head.indent + 1, "decision '" + d.id + "' lacks a type");
    if (d.kind == RangeKind::Enumeration && d.options.empty())
      throw SyntaxError(head.number, head.indent + 1, "enumeration '" + d.id + "' lacks a range");
    if (d.kind == RangeKind::Boolean && !d.options.empty())
      throw SyntaxError(head.number, head.indent + 1, "boolean '" + d.id + "' must not declare a range");
    std::string did = d.id;
    if (!dm.decisions.insert(did, std::move(d))) throw SyntaxError(head.number, head.indent + 1, "duplicate decision '" + did + "'");
  }
  return dm;
}

std::string cdc_write(const std::vector<CdcRule>& cdcs) {
  std::string out;
  for (const auto& r : cdcs) {
    if (r.lhs.kind() == logic::Kind::True) {
      if (r.rhs.kind() == logic::Kind::Implies) out += "true => ";
      out += logic::to_string(r.rhs, Dialect::Cdc);
    } else {
      out += logic::to_string(logic::Formula::implies(r.lhs, r.rhs), Dialect::Cdc);
    }
    out += ";\n";
  }
  return out;
}

std::vector<CdcRule> cdc_read(std::string_view text) {
  std::vector<Chunk> chunks;
  Chunk cur;
  auto flush = [&]() {
    if (!trim(cur.text).empty()) chunks.push_back(cur);
    cur = Chunk{};
  };
  for (const auto& l : split_lines(text)) {
    std::string t = l.text;
    int col = l.indent + 1;
    std::size_t lab = label_length(t);
    if (lab > 0) {
      flush();
      std::string rest = trim(std::string_view(t).substr(lab));
      col += static_cast<int>(t.size() - rest.size());
      t = rest;
    } else if (!trim(cur.text).empty() && !ends_open(trim(cur.text)) && !starts_continuation(t) &&
               paren_balance(cur.text) <= 0) {
      flush();
    }
    std::size_t start = 0;
    while (start <= t.size()) {
      auto semi = t.find(';', start);
      std::string part = t.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
      if (cur.text.empty() || trim(cur.text).empty()) {
        cur.line = l.number;
        cur.column = col + static_cast<int>(start);
        cur.text = part;
      } else {
        cur.text += "\n" + part;
      }
      if (semi == std::string::npos) break;
      flush();
      start = semi + 1;
    }
  }
  flush();
  std::vector<CdcRule> out;
  for (const auto& c : chunks) {
    auto f = parse_at(c.text, Dialect::Cdc, c.line, c.column);
    if (f.kind() == logic::Kind::Implies) out.push_back({f.lhs(), f.rhs()});
    else out.push_back({logic::Formula::truth(), f});
  }
  return out;
}

std::string dconfig_write(const DmConfiguration& cfg) {
  if (cfg.model_id.empty() && cfg.product_digest.empty() && cfg.assignments.empty()) return "";
  std::string out = "dconfig " + cfg.model_id + "\n";
  if (!cfg.product_digest.empty()) out += "product-digest " + cfg.product_digest + "\n";
  for (const auto& a : cfg.assignments)
    out += std::to_string(a.seq) + " " + to_string(a.origin) + " " + a.decision + " = " + a.value + "\n";
  return out;
}

DmConfiguration dconfig_read(std::string_view text) {
  DmConfiguration cfg;
  auto lines = split_lines(text);
  if (lines.empty()) return cfg;
  auto [kw, id] = split_word(lines[0].text);
  if (kw != "dconfig") throw SyntaxError(lines[0].number, 1, "expected 'dconfig <model-id>'");
  cfg.model_id = id;
  std::size_t i = 1;
  if (i < lines.size() && lines[i].text.rfind("product-digest", 0) == 0) {
    cfg.product_digest = split_word(lines[i].text).second;
    ++i;
  }
  std::set<std::string> seen;
  for (; i < lines.size(); ++i) {
    const Line& l = lines[i];
    std::vector<std::string> words;
    std::size_t pos = 0;
    while (pos < l.text.size()) {
      auto sp = l.text.find_first_of(" \t", pos);
      std::string w = l.text.substr(pos, sp == std::string::npos ? std::string::npos : sp - pos);
      if (!w.empty()) words.push_back(w);
      if (sp == std::string::npos) break;
      pos = sp + 1;
    }
    if (words.size() != 5 || words[3] != "=")
      throw SyntaxError(l.number, l.indent + 1, "expected '<seq> <origin> <decision> = <value>'");
    DmAssignment a;
    auto [ptr, ec] = std::from_chars(words[0].data(), words[0].data() + words[0].size(), a.seq);
    if (ec != std::errc() || ptr != words[0].data() + words[0].size())
      throw SyntaxError(l.number, l.indent + 1, "invalid sequence number '" + words[0] + "'");
    auto origin = parse_origin(words[1]);
    if (!origin) throw SyntaxError(l.number, l.indent + 1, "unknown origin '" + words[1] + "'");
    a.origin = *origin;
    a.decision = words[2];
    a.value = words[4];
    if (!cfg.assignments.empty() && a.seq <= cfg.assignments.back().seq)
      throw SyntaxError(l.number, l.indent + 1, "sequence numbers must increase");
    if (!seen.insert(a.decision).second)
      throw SyntaxError(l.number, l.indent + 1, "decision '" + a.decision + "' assigned twice");
    cfg.assignments.push_back(std::move(a));
  }
  return cfg;
}

}  // namespace pprvari::vm
