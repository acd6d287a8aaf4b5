// ppr.cpp - PPR-DSL reader, writer and validator
#include "pprvari/ppr.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace pprvari::ppr {

const char* to_string(Category c) {
  switch (c) {
    case Category::Product: return "Product";
    case Category::Process: return "Process";
    case Category::Resource: return "Resource";
  }
  return "";
}

const char* to_string(ValueType t) {
  switch (t) {
    case ValueType::String: return "String";
    case ValueType::Number: return "Number";
    case ValueType::Boolean: return "Boolean";
  }
  return "";
}

bool operator==(const Unit& a, const Unit& b) {
  return a.id == b.id && a.name == b.name && a.is_abstract == b.is_abstract && a.is_optional == b.is_optional &&
         a.implements == b.implements && a.required == b.required && a.excluded == b.excluded &&
         a.children == b.children && a.inputs == b.inputs && a.outputs == b.outputs && a.resources == b.resources &&
         a.attributes == b.attributes;
}

bool operator==(const ConstraintDef& a, const ConstraintDef& b) {
  return a.id == b.id && a.scope == b.scope && a.expr == b.expr && a.attributes == b.attributes;
}

namespace {

// ---------------------------------------------------------------------------
// lexical layer

enum class Tok { String, Word, Colon, Comma, LBrace, RBrace, LBracket, RBracket, Semicolon, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  auto bump = [&]() {
    if (src[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };
  while (true) {
    while (i < src.size()) {
      if (std::isspace(static_cast<unsigned char>(src[i])) != 0) {
        bump();
      } else if (src.substr(i, 2) == "//") {
        while (i < src.size() && src[i] != '\n') bump();
      } else {
        break;
      }
    }
    Token t;
    t.line = line;
    t.column = col;
    if (i >= src.size()) {
      out.push_back(t);
      return out;
    }
    char c = src[i];
    switch (c) {
      case ':': t.kind = Tok::Colon; bump(); break;
      case ',': t.kind = Tok::Comma; bump(); break;
      case '{': t.kind = Tok::LBrace; bump(); break;
      case '}': t.kind = Tok::RBrace; bump(); break;
      case '[': t.kind = Tok::LBracket; bump(); break;
      case ']': t.kind = Tok::RBracket; bump(); break;
      case ';': t.kind = Tok::Semicolon; bump(); break;
      case '"': {
        t.kind = Tok::String;
        bump();
        bool closed = false;
        while (i < src.size()) {
          char d = src[i];
          if (d == '"') {
            bump();
            closed = true;
            break;
          }
          if (d == '\n') break;
          if (d == '\\' && i + 1 < src.size()) {
            bump();
            char e = src[i];
            t.text += e == 'n' ? '\n' : e == 't' ? '\t' : e;
            bump();
            continue;
          }
          t.text += d;
          bump();
        }
        if (!closed) throw SyntaxError(t.line, t.column, "unterminated string");
        break;
      }
      default: {
        auto word_char = [](char w) {
          return std::isalnum(static_cast<unsigned char>(w)) != 0 || w == '_' || w == '-' || w == '.' || w == '+';
        };
        if (!word_char(c)) throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
        t.kind = Tok::Word;
        while (i < src.size() && word_char(src[i])) {
          t.text += src[i];
          bump();
        }
        if (t.text.find_first_not_of('.') == std::string::npos)
          throw SyntaxError(t.line, t.column, "unexpected '" + t.text + "'");
      }
    }
    out.push_back(std::move(t));
  }
}

// ---------------------------------------------------------------------------
// generic value tree

struct Value {
  enum class Kind { String, Word, Array, Object } kind = Kind::String;
  std::string text;
  std::vector<Value> items;
  std::vector<std::pair<std::string, Value>> fields;
  std::vector<Token> keys;  // key tokens of fields, same order
  int line = 1;
  int column = 1;
};

class ValueParser {
 public:
  explicit ValueParser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    take();
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(peek().line, peek().column, msg); }
  void expect(Tok k, const char* what) {
    if (!accept(k)) fail(std::string("expected ") + what + ", found " + describe(peek()));
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::String: return "string \"" + t.text + "\"";
      case Tok::Word: return "'" + t.text + "'";
      case Tok::Colon: return "':'";
      case Tok::Comma: return "','";
      case Tok::LBrace: return "'{'";
      case Tok::RBrace: return "'}'";
      case Tok::LBracket: return "'['";
      case Tok::RBracket: return "']'";
      case Tok::Semicolon: return "';'";
      case Tok::End: return "end of input";
    }
    return "token";
  }

  Value value() {
    const Token& t = peek();
    Value v;
    v.line = t.line;
    v.column = t.column;
    switch (t.kind) {
      case Tok::String:
        v.kind = Value::Kind::String;
        v.text = take().text;
        return v;
      case Tok::Word:
        v.kind = Value::Kind::Word;
        v.text = take().text;
        return v;
      case Tok::LBracket:
        take();
        v.kind = Value::Kind::Array;
        while (peek().kind != Tok::RBracket) {
          v.items.push_back(value());
          if (!accept(Tok::Comma)) break;
        }
        expect(Tok::RBracket, "']'");
        return v;
      case Tok::LBrace:
        return object();
      default:
        fail("expected a value, found " + describe(t));
    }
  }

  Value object() {
    Value v;
    v.kind = Value::Kind::Object;
    v.line = peek().line;
    v.column = peek().column;
    expect(Tok::LBrace, "'{'");
    while (peek().kind != Tok::RBrace) {
      Token key = peek();
      if (key.kind != Tok::Word && key.kind != Tok::String) fail("expected a property key, found " + describe(key));
      take();
      expect(Tok::Colon, "':'");
      v.fields.emplace_back(key.text, value());
      v.keys.push_back(key);
      if (!accept(Tok::Comma)) break;
    }
    expect(Tok::RBrace, "'}'");
    return v;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

struct Entry {
  Token keyword;
  Token id;
  Value body;
};

// ---------------------------------------------------------------------------
// model building

class Builder {
 public:
  Builder(PprModel& model, std::vector<Diagnostic>& diags) : model_(model), diags_(diags) {}

  void declare_attributes(const std::vector<Entry>& entries) {
    for (const auto& e : entries)
      if (e.keyword.text == "Attribute") declared_.insert(e.id.text);
  }

  void add(const Entry& e) {
    const std::string& kw = e.keyword.text;
    if (kw == "Product") add_unit(e, Category::Product);
    else if (kw == "Process") add_unit(e, Category::Process);
    else if (kw == "Resource") add_unit(e, Category::Resource);
    else if (kw == "Constraint") add_constraint(e);
    else add_attribute(e);
  }

 private:
  void error(int line, int col, const std::string& unit, const std::string& rule, const std::string& msg) {
    diags_.push_back({Severity::Error, line, col, unit, rule, msg});
  }
  void warning(int line, int col, const std::string& unit, const std::string& rule, const std::string& msg) {
    diags_.push_back({Severity::Warning, line, col, unit, rule, msg});
  }

  bool expect_kind(const Value& v, Value::Kind k, const std::string& unit, const std::string& key, const char* what) {
    if (v.kind == k) return true;
    error(v.line, v.column, unit, "syntax", "property '" + key + "' expects " + what);
    return false;
  }

  std::optional<std::string> as_string(const Value& v, const std::string& unit, const std::string& key) {
    if (!expect_kind(v, Value::Kind::String, unit, key, "a string")) return std::nullopt;
    return v.text;
  }

  std::optional<bool> as_bool(const Value& v, const std::string& unit, const std::string& key) {
    if (v.kind == Value::Kind::Word && (v.text == "true" || v.text == "false")) return v.text == "true";
    error(v.line, v.column, unit, "syntax", "property '" + key + "' expects true or false");
    return std::nullopt;
  }

  // Array of strings or of single-field objects {field: "X"}.
  std::vector<std::string> id_list(const Value& v, const std::string& unit, const std::string& key,
                                   const char* field) {
    std::vector<std::string> out;
    if (!expect_kind(v, Value::Kind::Array, unit, key, "an array")) return out;
    for (const auto& item : v.items) {
      if (item.kind == Value::Kind::String) {
        out.push_back(item.text);
      } else if (field != nullptr && item.kind == Value::Kind::Object && item.fields.size() == 1 &&
                 item.fields[0].first == field && item.fields[0].second.kind == Value::Kind::String) {
        out.push_back(item.fields[0].second.text);
      } else {
        error(item.line, item.column, unit, "syntax",
              std::string("property '") + key + "' expects strings" + (field ? std::string(" or {") + field + ": \"..\"}" : ""));
      }
    }
    return out;
  }

  std::vector<Output> output_list(const Value& v, const std::string& unit) {
    std::vector<Output> out;
    if (!expect_kind(v, Value::Kind::Array, unit, "outputs", "an array")) return out;
    for (const auto& item : v.items) {
      if (item.kind == Value::Kind::String) {
        out.push_back({"", item.text});
        continue;
      }
      if (item.kind == Value::Kind::Object && item.fields.size() == 1) {
        const auto& [label, inner] = item.fields[0];
        if (inner.kind == Value::Kind::Object && inner.fields.size() == 1 && inner.fields[0].first == "productId" &&
            inner.fields[0].second.kind == Value::Kind::String) {
          out.push_back({label, inner.fields[0].second.text});
          continue;
        }
        if (label == "productId" && inner.kind == Value::Kind::String) {
          out.push_back({"", inner.text});
          continue;
        }
      }
      error(item.line, item.column, unit, "syntax", "property 'outputs' expects {LABEL: {productId: \"..\"}} entries");
    }
    return out;
  }

  void attribute(OrderedMap<std::string, std::string>& attrs, const std::string& unit, const Token& key,
                 const Value& v) {
    if (declared_.count(key.text) == 0)
      warning(key.line, key.column, unit, "unknown-property",
              "unknown property '" + key.text + "' kept as attribute");
    if (v.kind != Value::Kind::String && v.kind != Value::Kind::Word) {
      error(v.line, v.column, unit, "syntax", "attribute '" + key.text + "' expects a scalar value");
      return;
    }
    if (!attrs.insert(key.text, v.text)) error(key.line, key.column, unit, "duplicate-property", "duplicate property '" + key.text + "'");
  }

  void add_unit(const Entry& e, Category c) {
    Unit u;
    u.id = e.id.text;
    u.line = e.keyword.line;
    u.column = e.keyword.column;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < e.body.fields.size(); ++i) {
      const auto& [key, v] = e.body.fields[i];
      const Token& ktok = e.body.keys[i];
      if (!seen.insert(key).second) {
        error(ktok.line, ktok.column, u.id, "duplicate-property", "duplicate property '" + key + "'");
        continue;
      }
      if (key == "name") {
        if (auto s = as_string(v, u.id, key)) u.name = *s;
      } else if (key == "isAbstract") {
        if (auto b = as_bool(v, u.id, key)) u.is_abstract = *b;
      } else if (key == "isOptional") {
        if (auto b = as_bool(v, u.id, key)) u.is_optional = *b;
      } else if (key == "implements") {
        u.implements = id_list(v, u.id, key, nullptr);
      } else if (key == "requires") {
        u.required = id_list(v, u.id, key, nullptr);
      } else if (key == "excludes") {
        u.excluded = id_list(v, u.id, key, nullptr);
      } else if (key == "children") {
        u.children = id_list(v, u.id, key, "productId");
      } else if (key == "inputs") {
        u.inputs = id_list(v, u.id, key, "productId");
      } else if (key == "outputs") {
        u.outputs = output_list(v, u.id);
      } else if (key == "resources") {
        u.resources = id_list(v, u.id, key, "resourceId");
      } else {
        attribute(u.attributes, u.id, ktok, v);
      }
    }
    auto& target = units(model_, c);
    if (target.contains(u.id)) {
      error(e.id.line, e.id.column, u.id, "duplicate-id",
            std::string("duplicate ") + to_string(c) + " id '" + u.id + "'");
      return;
    }
    std::string id = u.id;
    target.insert(id, std::move(u));
  }

  void add_constraint(const Entry& e) {
    ConstraintDef cd;
    cd.id = e.id.text;
    cd.line = e.keyword.line;
    cd.column = e.keyword.column;
    bool have_def = false;
    for (std::size_t i = 0; i < e.body.fields.size(); ++i) {
      const auto& [key, v] = e.body.fields[i];
      const Token& ktok = e.body.keys[i];
      if (key != "definition") {
        attribute(cd.attributes, cd.id, ktok, v);
        continue;
      }
      auto text = as_string(v, cd.id, key);
      if (!text) continue;
      have_def = true;
      parse_definition(cd, *text, v);
    }
    if (!have_def) error(cd.line, cd.column, cd.id, "syntax", "constraint lacks a definition");
    if (model_.constraints.contains(cd.id)) {
      error(e.id.line, e.id.column, cd.id, "duplicate-id", "duplicate Constraint id '" + cd.id + "'");
      return;
    }
    std::string id = cd.id;
    model_.constraints.insert(id, std::move(cd));
  }

  void parse_definition(ConstraintDef& cd, const std::string& text, const Value& v) {
    std::string_view body = text;
    std::size_t offset = 0;
    auto arrow = body.find("->");
    bool explicit_scope = arrow != std::string_view::npos;
    if (explicit_scope) {
      std::string_view head = body.substr(0, arrow);
      std::size_t start = 0;
      while (start <= head.size()) {
        auto comma = head.find(',', start);
        std::string_view part = head.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        auto b = part.find_first_not_of(" \t");
        auto en = part.find_last_not_of(" \t");
        if (b == std::string_view::npos) {
          error(v.line, v.column, cd.id, "syntax", "empty id in constraint scope");
        } else {
          cd.scope.emplace_back(part.substr(b, en - b + 1));
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      offset = arrow + 2;
      body = body.substr(offset);
    }
    try {
      cd.expr = logic::parse_expr(body, logic::Dialect::Ppr);
    } catch (const SyntaxError& ex) {
      // position inside the string literal: opening quote plus offset
      int col = v.column + 1 + static_cast<int>(offset) + ex.column() - 1;
      error(v.line + ex.line() - 1, ex.line() == 1 ? col : ex.column(), cd.id, "syntax", ex.detail());
      return;
    }
    if (!explicit_scope) cd.scope = logic::names(cd.expr);
  }

  void add_attribute(const Entry& e) {
    AttributeDef ad;
    ad.id = e.id.text;
    for (std::size_t i = 0; i < e.body.fields.size(); ++i) {
      const auto& [key, v] = e.body.fields[i];
      const Token& ktok = e.body.keys[i];
      if (key == "description") {
        if (auto s = as_string(v, ad.id, key)) ad.description = *s;
      } else if (key == "defaultValue") {
        if (v.kind == Value::Kind::String || v.kind == Value::Kind::Word) ad.default_value = v.text;
        else error(v.line, v.column, ad.id, "syntax", "defaultValue expects a scalar");
      } else if (key == "type") {
        std::string t = v.text;
        if (t == "String") ad.value_type = ValueType::String;
        else if (t == "Number") ad.value_type = ValueType::Number;
        else if (t == "Boolean") ad.value_type = ValueType::Boolean;
        else error(v.line, v.column, ad.id, "syntax", "unknown attribute type '" + t + "'");
      } else {
        warning(ktok.line, ktok.column, ad.id, "unknown-property", "unknown attribute property '" + key + "' ignored");
      }
    }
    if (model_.attribute_defs.contains(ad.id)) {
      error(e.id.line, e.id.column, ad.id, "duplicate-id", "duplicate Attribute id '" + ad.id + "'");
      return;
    }
    std::string id = ad.id;
    model_.attribute_defs.insert(id, std::move(ad));
  }

  PprModel& model_;
  std::vector<Diagnostic>& diags_;
  std::unordered_set<std::string> declared_;
};

std::vector<Entry> read_entries(std::string_view text) {
  ValueParser p(lex(text));
  std::vector<Entry> entries;
  static const std::set<std::string> kKeywords{"Product", "Process", "Resource", "Constraint", "Attribute"};
  while (p.peek().kind != Tok::End) {
    if (p.accept(Tok::Semicolon) || p.accept(Tok::Comma)) continue;
    Entry e;
    e.keyword = p.peek();
    if (e.keyword.kind != Tok::Word || kKeywords.count(e.keyword.text) == 0)
      p.fail("unknown keyword " + ValueParser::describe(e.keyword));
    p.take();
    e.id = p.peek();
    if (!p.accept(Tok::String)) p.fail("expected a quoted id, found " + ValueParser::describe(e.id));
    if (e.id.text.empty()) throw SyntaxError(e.id.line, e.id.column, "empty id");
    p.expect(Tok::Colon, "':'");
    if (p.peek().kind != Tok::LBrace) p.fail("expected '{', found " + ValueParser::describe(p.peek()));
    e.body = p.object();
    entries.push_back(std::move(e));
  }
  return entries;
}

// ---------------------------------------------------------------------------
// writing

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else {
      out += c;
    }
  }
  out += '"';
  return out;
}

std::string id_array(const std::vector<std::string>& ids, const char* field) {
  std::string out = "[";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    if (field) out += std::string("{") + field + ": " + quote(ids[i]) + "}";
    else out += quote(ids[i]);
  }
  return out + "]";
}

bool bare_scalar(const std::string& value, const AttributeDef* def) {
  if (def == nullptr || value.empty()) return false;
  if (def->value_type == ValueType::Boolean) return value == "true" || value == "false";
  if (def->value_type == ValueType::Number)
    return std::all_of(value.begin(), value.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '.' || c == '+' || c == '_';
    });
  return false;
}

void write_attrs(std::vector<std::string>& props, const OrderedMap<std::string, std::string>& attrs,
                 const PprModel& m) {
  for (const auto& [k, v] : attrs) {
    const AttributeDef* def = m.attribute_defs.find(k);
    props.push_back(k + ": " + (bare_scalar(v, def) ? v : quote(v)));
  }
}

void write_block(std::string& out, const std::string& keyword, const std::string& id,
                 const std::vector<std::string>& props) {
  if (!out.empty()) out += '\n';
  out += keyword + " " + quote(id) + ": {";
  if (props.empty()) {
    out += " }\n";
    return;
  }
  out += '\n';
  for (std::size_t i = 0; i < props.size(); ++i) {
    out += "  " + props[i];
    out += i + 1 < props.size() ? ",\n" : "\n";
  }
  out += "}\n";
}

// ---------------------------------------------------------------------------
// validation helpers

void check_refs(const PprModel& m, const Unit& u, const std::vector<std::string>& ids, Category want,
                const char* relation, std::vector<Diagnostic>& out) {
  for (const auto& id : ids) {
    if (units(m, want).contains(id)) continue;
    auto actual = category_of(m, id);
    if (actual) {
      out.push_back({Severity::Error, u.line, u.column, u.id, "category-mismatch",
                     std::string(relation) + " '" + id + "' names a " + to_string(*actual) + ", expected a " +
                         to_string(want)});
    } else {
      out.push_back({Severity::Error, u.line, u.column, u.id, "unresolved-reference",
                     std::string("unresolved reference ") + id + " in " + relation});
    }
  }
}

// Reports each unit lying on a cycle of the edge relation once.
void find_cycles(const OrderedMap<std::string, Unit>& us,
                 const std::function<std::vector<std::string>(const Unit&)>& edges, const char* relation,
                 std::set<std::string>& reported, std::vector<Diagnostic>& out) {
  enum class Mark { None, Active, Done };
  std::unordered_map<std::string, Mark> mark;
  std::vector<std::string> stack;
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    mark[id] = Mark::Active;
    stack.push_back(id);
    const Unit* u = us.find(id);
    for (const auto& next : edges(*u)) {
      if (!us.contains(next)) continue;
      Mark mk = mark[next];
      if (mk == Mark::Active) {
        auto it = std::find(stack.begin(), stack.end(), next);
        std::string path;
        for (auto p = it; p != stack.end(); ++p) path += *p + " -> ";
        path += next;
        if (reported.insert(next).second) {
          const Unit* start = us.find(next);
          out.push_back({Severity::Error, start->line, start->column, next, "cycle",
                         std::string(relation) + " cycle: " + path});
        }
      } else if (mk == Mark::None) {
        visit(next);
      }
    }
    stack.pop_back();
    mark[id] = Mark::Done;
  };
  for (const auto& [id, u] : us)
    if (mark[id] == Mark::None) visit(id);
}

}  // namespace

// ---------------------------------------------------------------------------

ParseResult parse_ppr(std::string_view text, std::string name) {
  ParseResult result;
  std::vector<Entry> entries;
  try {
    entries = read_entries(text);
  } catch (const SyntaxError& ex) {
    result.diagnostics.push_back({Severity::Error, ex.line(), ex.column(), "", "syntax", ex.detail()});
    return result;
  }
  PprModel model;
  model.name = std::move(name);
  Builder builder(model, result.diagnostics);
  builder.declare_attributes(entries);
  for (const auto& e : entries) builder.add(e);
  if (!has_errors(result.diagnostics)) result.model = std::move(model);
  return result;
}

std::string write_ppr(const PprModel& m) {
  std::string out;
  for (const auto& [id, ad] : m.attribute_defs) {
    std::vector<std::string> props{"description: " + quote(ad.description), "defaultValue: " + quote(ad.default_value),
                                   std::string("type: ") + quote(to_string(ad.value_type))};
    write_block(out, "Attribute", id, props);
  }
  for (Category c : {Category::Product, Category::Process, Category::Resource}) {
    for (const auto& [id, u] : units(m, c)) {
      std::vector<std::string> props;
      if (!u.name.empty()) props.push_back("name: " + quote(u.name));
      if (u.is_abstract) props.emplace_back("isAbstract: true");
      if (u.is_optional) props.emplace_back("isOptional: true");
      if (!u.implements.empty()) props.push_back("implements: " + id_array(u.implements, nullptr));
      if (!u.children.empty()) props.push_back("children: " + id_array(u.children, nullptr));
      if (!u.required.empty()) props.push_back("requires: " + id_array(u.required, nullptr));
      if (!u.excluded.empty()) props.push_back("excludes: " + id_array(u.excluded, nullptr));
      if (!u.inputs.empty()) props.push_back("inputs: " + id_array(u.inputs, "productId"));
      if (!u.outputs.empty()) {
        std::string s = "outputs: [";
        for (std::size_t i = 0; i < u.outputs.size(); ++i) {
          if (i) s += ", ";
          const auto& o = u.outputs[i];
          if (o.label.empty()) s += quote(o.product);
          else s += "{" + o.label + ": {productId: " + quote(o.product) + "}}";
        }
        props.push_back(s + "]");
      }
      if (!u.resources.empty()) props.push_back("resources: " + id_array(u.resources, "resourceId"));
      write_attrs(props, u.attributes, m);
      write_block(out, to_string(c), id, props);
    }
  }
  for (const auto& [id, cd] : m.constraints) {
    std::string def;
    for (std::size_t i = 0; i < cd.scope.size(); ++i) {
      if (i) def += ",";
      def += cd.scope[i];
    }
    def += " -> " + logic::to_string(cd.expr, logic::Dialect::Ppr);
    std::vector<std::string> props{"definition: " + quote(def)};
    write_attrs(props, cd.attributes, m);
    write_block(out, "Constraint", id, props);
  }
  if (out.empty()) out = "\n";
  return out;
}

std::vector<Diagnostic> validate_model(const PprModel& m) {
  std::vector<Diagnostic> out;
  auto misplaced = [&](const Unit& u, bool present, const char* prop, const char* allowed) {
    if (present)
      out.push_back({Severity::Error, u.line, u.column, u.id, "misplaced-property",
                     std::string("property '") + prop + "' is only allowed on " + allowed});
  };
  for (Category c : {Category::Product, Category::Process, Category::Resource}) {
    for (const auto& [id, u] : units(m, c)) {
      check_refs(m, u, u.implements, c, "implements", out);
      check_refs(m, u, u.required, c, "requires", out);
      check_refs(m, u, u.excluded, c, "excludes", out);
      if (c == Category::Product) {
        check_refs(m, u, u.children, Category::Product, "children", out);
      } else {
        misplaced(u, !u.children.empty(), "children", "products");
        misplaced(u, u.is_optional, "isOptional", "products");
      }
      if (c == Category::Process) {
        check_refs(m, u, u.inputs, Category::Product, "inputs", out);
        std::vector<std::string> outs;
        for (const auto& o : u.outputs) outs.push_back(o.product);
        check_refs(m, u, outs, Category::Product, "outputs", out);
        check_refs(m, u, u.resources, Category::Resource, "resources", out);
        if (!u.is_abstract) {
          std::vector<std::string> io = u.inputs;
          io.insert(io.end(), outs.begin(), outs.end());
          for (const auto& pid : io) {
            const Unit* p = m.products.find(pid);
            if (p != nullptr && p->is_abstract)
              out.push_back({Severity::Error, u.line, u.column, u.id, "abstract-io",
                             "concrete process uses abstract product '" + pid + "' as input or output"});
          }
        }
      } else {
        misplaced(u, !u.inputs.empty(), "inputs", "processes");
        misplaced(u, !u.outputs.empty(), "outputs", "processes");
        misplaced(u, !u.resources.empty(), "resources", "processes");
      }
    }
    std::set<std::string> reported;
    std::size_t before = out.size();
    const auto& us = units(m, c);
    find_cycles(us, [](const Unit& u) { return u.implements; }, "implements", reported, out);
    if (c == Category::Product) {
      find_cycles(us, [](const Unit& u) { return u.children; }, "children", reported, out);
      if (out.size() == before) {
        // parent of a child listed in `children` is the listing product
        std::unordered_map<std::string, std::vector<std::string>> parents;
        for (const auto& [pid, p] : us)
          for (const auto& ch : p.children) parents[ch].push_back(pid);
        find_cycles(
            us,
            [&parents](const Unit& u) {
              std::vector<std::string> e = u.implements;
              auto it = parents.find(u.id);
              if (it != parents.end()) e.insert(e.end(), it->second.begin(), it->second.end());
              return e;
            },
            "hierarchy", reported, out);
      }
    }
  }
  for (const auto& [pid, p] : m.products) {
    if (m.processes.contains(pid) && !is_intermediate(m, pid))
      out.push_back({Severity::Error, p.line, p.column, pid, "dm-id-collision",
                     "product component '" + pid + "' shares its id with a process"});
  }
  for (const auto& [cid, cd] : m.constraints) {
    for (const auto& s : cd.scope)
      if (!category_of(m, s))
        out.push_back({Severity::Error, cd.line, cd.column, cid, "unresolved-reference",
                       "unresolved reference " + s + " in constraint scope"});
    for (const auto& v : logic::names(cd.expr))
      if (std::find(cd.scope.begin(), cd.scope.end(), v) == cd.scope.end())
        out.push_back({Severity::Error, cd.line, cd.column, cid, "constraint-scope",
                       "variable " + v + " is not listed in the constraint scope"});
  }
  return out;
}

PprModel normalize_model(PprModel model) {
  for (Category c : {Category::Product, Category::Process, Category::Resource}) {
    auto& us = units(model, c);
    std::vector<std::pair<std::string, std::string>> missing;
    for (const auto& [id, u] : us) {
      for (const auto& other : u.excluded) {
        const Unit* o = us.find(other);
        if (o != nullptr && std::find(o->excluded.begin(), o->excluded.end(), id) == o->excluded.end())
          missing.emplace_back(other, id);
      }
    }
    for (const auto& [target, id] : missing) {
      auto& ex = us.at(target).excluded;
      if (std::find(ex.begin(), ex.end(), id) == ex.end()) ex.push_back(id);
    }
  }
  return model;
}

bool eval_constraint(const ConstraintDef& c, const std::map<std::string, bool>& assignment) {
  for (const auto& s : c.scope)
    if (assignment.find(s) == assignment.end()) throw std::invalid_argument("unassigned scope variable '" + s + "'");
  return logic::eval(c.expr, assignment);
}

const OrderedMap<std::string, Unit>& units(const PprModel& model, Category c) {
  switch (c) {
    case Category::Product: return model.products;
    case Category::Process: return model.processes;
    default: return model.resources;
  }
}

OrderedMap<std::string, Unit>& units(PprModel& model, Category c) {
  switch (c) {
    case Category::Product: return model.products;
    case Category::Process: return model.processes;
    default: return model.resources;
  }
}

std::optional<Category> category_of(const PprModel& model, const std::string& id) {
  for (Category c : {Category::Product, Category::Process, Category::Resource})
    if (units(model, c).contains(id)) return c;
  return std::nullopt;
}

std::vector<std::string> concrete_members(const PprModel& model, const std::string& abstract_id) {
  auto c = category_of(model, abstract_id);
  if (!c) throw std::invalid_argument("unknown unit '" + abstract_id + "'");
  return concrete_members(model, *c, abstract_id);
}

std::vector<std::string> concrete_members(const PprModel& model, Category c, const std::string& abstract_id) {
  const auto& us = units(model, c);
  const Unit* a = us.find(abstract_id);
  if (a == nullptr) throw std::invalid_argument("unknown unit '" + abstract_id + "'");
  if (!a->is_abstract) throw std::invalid_argument("unit '" + abstract_id + "' is not abstract");
  std::vector<std::string> out;
  for (const auto& [id, u] : us) {
    if (u.is_abstract) continue;
    std::set<std::string> seen;
    std::vector<std::string> todo = u.implements;
    bool hit = false;
    while (!todo.empty() && !hit) {
      std::string cur = todo.back();
      todo.pop_back();
      if (!seen.insert(cur).second) continue;
      if (cur == abstract_id) hit = true;
      if (const Unit* p = us.find(cur)) todo.insert(todo.end(), p->implements.begin(), p->implements.end());
    }
    if (hit) out.push_back(id);
  }
  return out;
}

bool is_intermediate(const PprModel& model, const std::string& product_id) {
  for (const auto& [id, p] : model.processes) {
    bool outputs = std::any_of(p.outputs.begin(), p.outputs.end(), [&](const Output& o) { return o.product == product_id; });
    if (outputs && std::find(p.inputs.begin(), p.inputs.end(), product_id) == p.inputs.end()) return true;
  }
  return false;
}

std::vector<std::string> component_ids(const PprModel& model) {
  std::vector<std::string> out;
  for (const auto& [id, p] : model.products)
    if (!is_intermediate(model, id)) out.push_back(id);
  return out;
}

}  // namespace pprvari::ppr
