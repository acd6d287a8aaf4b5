// logic.cpp - formula construction, parsing, printing and evaluation
#include "pprvari/logic.hpp"

#include <cctype>
#include <stdexcept>
#include <unordered_set>

#include "pprvari/diagnostic.hpp"

namespace pprvari::logic {

struct Formula::Node {
  Kind kind = Kind::True;
  std::string name;
  std::string option;
  std::vector<Formula> kids;
};

namespace {

const std::string kEmpty;
const std::vector<Formula> kNoKids;

}  // namespace

Formula::Formula() : Formula(truth()) {}
Formula::Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Formula Formula::truth() {
  static const auto node = std::make_shared<const Node>(Node{Kind::True, {}, {}, {}});
  return Formula(node);
}

Formula Formula::falsity() {
  static const auto node = std::make_shared<const Node>(Node{Kind::False, {}, {}, {}});
  return Formula(node);
}

Formula Formula::var(std::string name) {
  if (name.empty()) throw std::invalid_argument("empty variable name");
  return Formula(std::make_shared<const Node>(Node{Kind::Var, std::move(name), {}, {}}));
}

Formula Formula::var_eq(std::string name, std::string option) {
  if (name.empty() || option.empty()) throw std::invalid_argument("empty enumeration test");
  return Formula(std::make_shared<const Node>(Node{Kind::VarEq, std::move(name), std::move(option), {}}));
}

Formula Formula::negate(Formula f) {
  return Formula(std::make_shared<const Node>(Node{Kind::Not, {}, {}, {std::move(f)}}));
}

Formula Formula::conj(std::vector<Formula> children) {
  if (children.empty()) return truth();
  if (children.size() == 1) return children.front();
  return Formula(std::make_shared<const Node>(Node{Kind::And, {}, {}, std::move(children)}));
}

Formula Formula::disj(std::vector<Formula> children) {
  if (children.empty()) return falsity();
  if (children.size() == 1) return children.front();
  return Formula(std::make_shared<const Node>(Node{Kind::Or, {}, {}, std::move(children)}));
}

Formula Formula::implies(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{Kind::Implies, {}, {}, {std::move(lhs), std::move(rhs)}}));
}

Kind Formula::kind() const { return node_->kind; }
const std::string& Formula::name() const { return node_ ? node_->name : kEmpty; }
const std::string& Formula::option() const { return node_ ? node_->option : kEmpty; }
const std::vector<Formula>& Formula::children() const { return node_ ? node_->kids : kNoKids; }

bool Formula::is_literal() const {
  switch (kind()) {
    case Kind::Var:
    case Kind::VarEq:
      return true;
    case Kind::Not: {
      Kind k = children()[0].kind();
      return k == Kind::Var || k == Kind::VarEq;
    }
    default:
      return false;
  }
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  return a.node_->kind == b.node_->kind && a.node_->name == b.node_->name && a.node_->option == b.node_->option &&
         a.node_->kids == b.node_->kids;
}

std::string option_key(std::string_view name, std::string_view option) {
  std::string out(name);
  out += '=';
  out += option;
  return out;
}

QualifiedRef split_ref(std::string_view text) {
  auto pos = text.find('#');
  if (pos == std::string_view::npos) return {"", std::string(text)};
  return {std::string(text.substr(0, pos)), std::string(text.substr(pos + 1))};
}

std::string join_ref(std::string_view model, std::string_view element) {
  if (model.empty()) return std::string(element);
  std::string out(model);
  out += '#';
  out += element;
  return out;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

enum class Tok { Ident, LParen, RParen, Not, And, Or, Implies, Eq, True, False, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

bool ident_char(char c, Dialect d) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || c == '_' || (d == Dialect::Cdc && c == '#');
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

class Lexer {
 public:
  Lexer(std::string_view text, Dialect d) : text_(text), dialect_(d) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      char c = text_[pos_];
      if (c == '(') {
        t.kind = Tok::LParen;
        advance(1);
      } else if (c == ')') {
        t.kind = Tok::RParen;
        advance(1);
      } else if (ident_char(c, dialect_)) {
        std::size_t start = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_], dialect_)) advance(1);
        t.text = std::string(text_.substr(start, pos_ - start));
        classify_word(t);
      } else if (dialect_ != Dialect::Ppr && symbol(t)) {
        // handled
      } else {
        throw SyntaxError(t.line, t.column, std::string("unexpected character '") + c + "'");
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) advance(1);
  }

  bool starts(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

  bool symbol(Token& t) {
    struct Sym {
      std::string_view text;
      Tok kind;
    };
    static constexpr Sym kSyms[] = {{"=>", Tok::Implies}, {"==", Tok::Eq},  {"&&", Tok::And}, {"||", Tok::Or},
                                    {"!", Tok::Not},      {"&", Tok::And},  {"|", Tok::Or},   {"=", Tok::Eq}};
    for (const auto& s : kSyms) {
      if (starts(s.text)) {
        t.kind = s.kind;
        t.text = std::string(s.text);
        advance(s.text.size());
        return true;
      }
    }
    return false;
  }

  void classify_word(Token& t) const {
    t.kind = Tok::Ident;
    if (dialect_ == Dialect::Ppr) {
      std::string w = lower(t.text);
      if (w == "not") t.kind = Tok::Not;
      else if (w == "and") t.kind = Tok::And;
      else if (w == "or") t.kind = Tok::Or;
      else if (w == "implies") t.kind = Tok::Implies;
      else if (w == "true") t.kind = Tok::True;
      else if (w == "false") t.kind = Tok::False;
    } else {
      if (t.text == "true") t.kind = Tok::True;
      else if (t.text == "false") t.kind = Tok::False;
    }
  }

  std::string_view text_;
  Dialect dialect_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, Dialect d) : toks_(std::move(toks)), dialect_(d) {}

  Formula run() {
    Formula f = implication();
    if (peek().kind != Tok::End) fail("unexpected '" + describe(peek()) + "'");
    return f;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    take();
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(peek().line, peek().column, msg); }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::End: return "end of input";
      case Tok::LParen: return "(";
      case Tok::RParen: return ")";
      default: return t.text;
    }
  }

  Formula implication() {
    Formula lhs = disjunction();
    if (accept(Tok::Implies)) return Formula::implies(std::move(lhs), implication());
    return lhs;
  }

  Formula disjunction() {
    std::vector<Formula> kids{conjunction()};
    while (accept(Tok::Or)) kids.push_back(conjunction());
    return Formula::disj(std::move(kids));
  }

  Formula conjunction() {
    std::vector<Formula> kids{unary()};
    while (accept(Tok::And)) kids.push_back(unary());
    return Formula::conj(std::move(kids));
  }

  Formula unary() {
    if (accept(Tok::Not)) return Formula::negate(unary());
    return primary();
  }

  Formula primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::LParen: {
        take();
        Formula inner = implication();
        if (!accept(Tok::RParen)) fail("expected ')'");
        return inner;
      }
      case Tok::True:
        take();
        return Formula::truth();
      case Tok::False:
        take();
        return Formula::falsity();
      case Tok::Ident: {
        std::string name = take().text;
        check_ident(name);
        if (dialect_ != Dialect::Ppr && accept(Tok::Eq)) {
          if (peek().kind != Tok::Ident) fail("expected option after '=='");
          std::string opt = take().text;
          return Formula::var_eq(std::move(name), std::move(opt));
        }
        return Formula::var(std::move(name));
      }
      default:
        fail("expected expression, found '" + describe(t) + "'");
    }
  }

  void check_ident(const std::string& name) const {
    if (dialect_ != Dialect::Cdc) return;
    auto pos = name.find('#');
    if (pos != std::string::npos && (pos == 0 || pos + 1 == name.size() || name.find('#', pos + 1) != std::string::npos))
      throw SyntaxError(toks_[pos_ - 1].line, toks_[pos_ - 1].column, "malformed qualified reference '" + name + "'");
  }

  std::vector<Token> toks_;
  Dialect dialect_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// printing

int precedence(Kind k) {
  switch (k) {
    case Kind::Implies: return 1;
    case Kind::Or: return 2;
    case Kind::And: return 3;
    case Kind::Not: return 4;
    default: return 5;
  }
}

struct Printer {
  Dialect dialect;
  std::string out;

  const char* op(Kind k) const {
    bool words = dialect == Dialect::Ppr;
    switch (k) {
      case Kind::Implies: return words ? " implies " : " => ";
      case Kind::Or: return words ? " OR " : " || ";
      case Kind::And: return words ? " AND " : " && ";
      case Kind::Not: return words ? "NOT " : "!";
      default: return "";
    }
  }

  void child(const Formula& f, int min_prec) {
    if (precedence(f.kind()) < min_prec) {
      out += '(';
      print(f);
      out += ')';
    } else {
      print(f);
    }
  }

  void print(const Formula& f) {
    switch (f.kind()) {
      case Kind::True: out += "true"; break;
      case Kind::False: out += "false"; break;
      case Kind::Var: out += f.name(); break;
      case Kind::VarEq:
        out += f.name();
        out += " == ";
        out += f.option();
        break;
      case Kind::Not:
        out += op(Kind::Not);
        child(f.children()[0], 4);
        break;
      case Kind::Implies:
        child(f.lhs(), 2);
        out += op(Kind::Implies);
        child(f.rhs(), 1);
        break;
      case Kind::And:
      case Kind::Or: {
        int need = precedence(f.kind()) + 1;
        bool first = true;
        for (const auto& c : f.children()) {
          if (!first) out += op(f.kind());
          first = false;
          child(c, need);
        }
        break;
      }
    }
  }
};

void collect(const Formula& f, std::vector<std::string>& out, std::unordered_set<std::string>& seen, bool keys) {
  switch (f.kind()) {
    case Kind::Var:
      if (seen.insert(f.name()).second) out.push_back(f.name());
      break;
    case Kind::VarEq: {
      std::string k = keys ? option_key(f.name(), f.option()) : f.name();
      if (seen.insert(k).second) out.push_back(std::move(k));
      break;
    }
    default:
      for (const auto& c : f.children()) collect(c, out, seen, keys);
  }
}

Tri lookup(const Assignment& a, const std::string& key) {
  auto it = a.find(key);
  if (it == a.end()) return Tri::Unknown;
  return it->second ? Tri::True : Tri::False;
}

Tri tri_not(Tri t) {
  if (t == Tri::Unknown) return t;
  return t == Tri::True ? Tri::False : Tri::True;
}

}  // namespace

Formula parse_expr(std::string_view text, Dialect dialect) {
  Lexer lexer(text, dialect);
  Parser parser(lexer.run(), dialect);
  return parser.run();
}

std::string to_string(const Formula& f, Dialect dialect) {
  Printer p{dialect, {}};
  p.print(f);
  return p.out;
}

std::vector<std::string> variables(const Formula& f) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  collect(f, out, seen, true);
  return out;
}

std::vector<std::string> names(const Formula& f) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  collect(f, out, seen, false);
  return out;
}

Tri eval_partial(const Formula& f, const Assignment& a) {
  switch (f.kind()) {
    case Kind::True: return Tri::True;
    case Kind::False: return Tri::False;
    case Kind::Var: return lookup(a, f.name());
    case Kind::VarEq: return lookup(a, option_key(f.name(), f.option()));
    case Kind::Not: return tri_not(eval_partial(f.children()[0], a));
    case Kind::And: {
      Tri acc = Tri::True;
      for (const auto& c : f.children()) {
        Tri v = eval_partial(c, a);
        if (v == Tri::False) return Tri::False;
        if (v == Tri::Unknown) acc = Tri::Unknown;
      }
      return acc;
    }
    case Kind::Or: {
      Tri acc = Tri::False;
      for (const auto& c : f.children()) {
        Tri v = eval_partial(c, a);
        if (v == Tri::True) return Tri::True;
        if (v == Tri::Unknown) acc = Tri::Unknown;
      }
      return acc;
    }
    case Kind::Implies: {
      Tri l = eval_partial(f.lhs(), a);
      Tri r = eval_partial(f.rhs(), a);
      if (l == Tri::False || r == Tri::True) return Tri::True;
      if (l == Tri::True && r == Tri::False) return Tri::False;
      return Tri::Unknown;
    }
  }
  return Tri::Unknown;
}

bool eval(const Formula& f, const Assignment& a) {
  for (const auto& v : variables(f))
    if (a.find(v) == a.end()) throw std::invalid_argument("unassigned variable '" + v + "'");
  return eval_partial(f, a) == Tri::True;
}

}  // namespace pprvari::logic
