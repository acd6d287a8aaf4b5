// deltagen.cpp - .fbn/.delta formats, delta application, artifact generation
#include "pprvari/deltagen.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "pprvari/diagnostic.hpp"
#include "pprvari/workspace.hpp"

namespace pprvari::delta {

std::string to_string(const EventConnection& c) {
  return c.src + "." + c.src_port + " -> " + c.dst + "." + c.dst_port;
}

namespace {

enum class Tok { Word, Tag, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '.' || c == '-' || c == '/';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const { throw SyntaxError(t.line, t.column, msg); }

  Token expect_word(const char* what) {
    if (tok_.kind != Tok::Word) fail(tok_, std::string("expected ") + what + ", found " + describe(tok_));
    return next();
  }

  void expect(const char* punct) {
    if (tok_.kind != Tok::Punct || tok_.text != punct)
      fail(tok_, std::string("expected '") + punct + "', found " + describe(tok_));
    advance();
  }

  void expect_keyword(const char* kw) {
    if (tok_.kind != Tok::Word || tok_.text != kw)
      fail(tok_, std::string("expected '") + kw + "', found " + describe(tok_));
    advance();
  }

  bool accept(const char* punct) {
    if (tok_.kind == Tok::Punct && tok_.text == punct) {
      advance();
      return true;
    }
    return false;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::End: return "end of input";
      case Tok::Tag: return "<" + t.text + ">";
      default: return "'" + t.text + "'";
    }
  }

 private:
  void bump() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void advance() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) != 0) {
        bump();
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') bump();
      } else {
        break;
      }
    }
    tok_ = Token{Tok::End, "", line_, col_};
    if (pos_ >= text_.size()) return;
    char c = text_[pos_];
    if (c == '<') {
      bump();
      std::string tag;
      while (pos_ < text_.size() && text_[pos_] != '>' && word_char(text_[pos_])) {
        tag += text_[pos_];
        bump();
      }
      if (pos_ >= text_.size() || text_[pos_] != '>') throw SyntaxError(tok_.line, tok_.column, "unterminated tag");
      bump();
      tok_.kind = Tok::Tag;
      tok_.text = tag;
      return;
    }
    if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
      bump();
      bump();
      tok_.kind = Tok::Punct;
      tok_.text = "->";
      return;
    }
    if (word_char(c)) {
      std::string w;
      while (pos_ < text_.size() && word_char(text_[pos_])) {
        if (text_[pos_] == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') break;
        w += text_[pos_];
        bump();
      }
      tok_.kind = Tok::Word;
      tok_.text = w;
      return;
    }
    if (c == '{' || c == '}' || c == ';' || c == ':' || c == '=') {
      bump();
      tok_.kind = Tok::Punct;
      tok_.text = std::string(1, c);
      return;
    }
    throw SyntaxError(line_, col_, std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

EventConnection parse_endpoints(Lexer& lx, const Token& src, const Token& dst) {
  auto split = [&](const Token& t) {
    auto dot = t.text.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == t.text.size())
      lx.fail(t, "expected block.port, found '" + t.text + "'");
    return std::pair{t.text.substr(0, dot), t.text.substr(dot + 1)};
  };
  auto [sb, sp] = split(src);
  auto [db, dp] = split(dst);
  return EventConnection{sb, sp, db, dp};
}

void check_endpoints(const FbNetwork& net, const EventConnection& c, const std::string& delta) {
  for (const auto* b : {&c.src, &c.dst})
    if (!net.blocks.count(*b)) throw DeltaError("connection " + to_string(c) + " references unknown block " + *b, delta);
}

}  // namespace

FbNetwork parse_fbn(std::string_view text) {
  Lexer lx(text);
  FbNetwork net;
  lx.expect_keyword("application");
  net.app_name = lx.expect_word("application name").text;
  lx.expect("{");
  std::vector<std::pair<Token, EventConnection>> pending;
  while (!lx.accept("}")) {
    Token kw = lx.expect_word("'fb', 'event' or '}'");
    if (kw.text == "fb") {
      Token name = lx.expect_word("block name");
      lx.expect(":");
      Token type = lx.expect_word("block type");
      lx.expect(";");
      if (!net.blocks.emplace(name.text, type.text).second)
        throw DeltaError(std::to_string(name.line) + ":" + std::to_string(name.column) + ": duplicate block " + name.text);
    } else if (kw.text == "event") {
      Token src = lx.expect_word("source endpoint");
      lx.expect("->");
      Token dst = lx.expect_word("destination endpoint");
      lx.expect(";");
      pending.emplace_back(src, parse_endpoints(lx, src, dst));
    } else {
      lx.fail(kw, "unknown declaration '" + kw.text + "'");
    }
  }
  if (lx.peek().kind != Tok::End) lx.fail(lx.peek(), "trailing input after application");
  for (const auto& [t, c] : pending) {
    for (const auto* b : {&c.src, &c.dst})
      if (!net.blocks.count(*b))
        throw DeltaError(std::to_string(t.line) + ":" + std::to_string(t.column) + ": connection " + to_string(c) +
                         " references undeclared block " + *b);
    net.connections.insert(c);
  }
  return net;
}

std::string write_fbn(const FbNetwork& net) {
  std::ostringstream out;
  out << "application " << net.app_name << " {\n";
  for (const auto& [name, type] : net.blocks) out << "  fb " << name << " : " << type << ";\n";
  for (const auto& c : net.connections) out << "  event " << to_string(c) << ";\n";
  out << "}\n";
  return out.str();
}

DeltaModel parse_delta(std::string_view text) {
  Lexer lx(text);
  DeltaModel d;
  lx.expect_keyword("delta");
  d.name = lx.expect_word("delta name").text;
  lx.expect(";");
  lx.expect_keyword("uses");
  d.uses = lx.expect_word("application name").text;
  lx.expect(";");
  lx.expect("{");
  auto name_clause = [&](const char* key) {
    Token k = lx.expect_word(key);
    if (k.text != key) lx.fail(k, std::string("expected ") + key + "=..., found '" + k.text + "'");
    lx.expect("=");
    return lx.expect_word("value").text;
  };
  while (!lx.accept("}")) {
    Token tag = lx.next();
    if (tag.kind != Tok::Tag || (tag.text != "Remove" && tag.text != "Add"))
      lx.fail(tag, "expected <Add>, <Remove> or '}', found " + Lexer::describe(tag));
    bool add = tag.text == "Add";
    Token what = lx.expect_word("element kind");
    DeltaOp op;
    if (what.text == "NetworkElement" && !add) {
      op.kind = OpKind::RemoveElement;
      op.name = name_clause("name");
    } else if (what.text == "FB" && add) {
      op.kind = OpKind::AddBlock;
      op.name = name_clause("name");
      op.type = name_clause("type");
    } else if (what.text == "EventConnection") {
      op.kind = add ? OpKind::AddEventConnection : OpKind::RemoveEventConnection;
      Token src = lx.expect_word("source endpoint");
      Token dst = lx.expect_word("destination endpoint");
      op.connection = parse_endpoints(lx, src, dst);
    } else {
      lx.fail(what, "unsupported operation <" + tag.text + "> " + what.text);
    }
    lx.expect(";");
    d.ops.push_back(std::move(op));
  }
  if (lx.peek().kind != Tok::End) lx.fail(lx.peek(), "trailing input after delta body");
  return d;
}

std::string write_delta(const DeltaModel& d) {
  std::ostringstream out;
  out << "delta " << d.name << ";\nuses " << d.uses << ";\n{\n";
  for (const auto& op : d.ops) {
    const auto& c = op.connection;
    switch (op.kind) {
      case OpKind::RemoveElement: out << "  <Remove> NetworkElement name=" << op.name << ";\n"; break;
      case OpKind::AddBlock: out << "  <Add> FB name=" << op.name << " type=" << op.type << ";\n"; break;
      case OpKind::AddEventConnection:
        out << "  <Add> EventConnection " << c.src << "." << c.src_port << " " << c.dst << "." << c.dst_port << ";\n";
        break;
      case OpKind::RemoveEventConnection:
        out << "  <Remove> EventConnection " << c.src << "." << c.src_port << " " << c.dst << "." << c.dst_port << ";\n";
        break;
    }
  }
  out << "}\n";
  return out.str();
}

FbNetwork apply_delta(const FbNetwork& net, const DeltaModel& d, std::vector<std::string>* warnings) {
  if (d.uses != net.app_name)
    throw DeltaError("delta " + d.name + " uses " + d.uses + " but the base application is " + net.app_name, d.name);
  FbNetwork out = net;
  for (const auto& op : d.ops) {
    switch (op.kind) {
      case OpKind::RemoveElement: {
        if (out.blocks.erase(op.name) == 0) throw DeltaError("delta " + d.name + ": no element " + op.name, d.name);
        for (auto it = out.connections.begin(); it != out.connections.end();) {
          if (it->src == op.name || it->dst == op.name) {
            if (warnings) warnings->push_back("delta " + d.name + ": dropped connection " + to_string(*it));
            it = out.connections.erase(it);
          } else {
            ++it;
          }
        }
        break;
      }
      case OpKind::AddBlock:
        if (!out.blocks.emplace(op.name, op.type).second)
          throw DeltaError("delta " + d.name + ": block " + op.name + " already exists", d.name);
        break;
      case OpKind::AddEventConnection:
        try {
          check_endpoints(out, op.connection, d.name);
        } catch (const DeltaError& ex) {
          throw DeltaError("delta " + d.name + ": " + ex.what(), d.name);
        }
        out.connections.insert(op.connection);
        break;
      case OpKind::RemoveEventConnection:
        if (out.connections.erase(op.connection) == 0)
          throw DeltaError("delta " + d.name + ": no connection " + to_string(op.connection), d.name);
        break;
    }
  }
  return out;
}

DeltaBinding parse_binding(const logic::QualifiedRef& element, const std::string& value) {
  DeltaBinding b;
  b.element = element;
  std::string v = value;
  if (!v.empty() && v[0] == '!') {
    b.negated = true;
    v.erase(0, 1);
  }
  auto slash = v.find_last_of('/');
  if (slash != std::string::npos) v = v.substr(slash + 1);
  const std::string ext = ".delta";
  if (v.size() > ext.size() && v.compare(v.size() - ext.size(), ext.size(), ext) == 0) v.resize(v.size() - ext.size());
  b.delta_name = v;
  return b;
}

std::vector<DeltaBinding> bindings(const engine::Workspace& ws) {
  std::vector<DeltaBinding> out;
  const auto& o = ws.out;
  auto scan = [&](const auto& units, const std::string& model) {
    for (const auto& [id, u] : units) {
      const std::string* v = u.attributes.find(kDeltaAttribute);
      if (v != nullptr && !v->empty()) out.push_back(parse_binding({model, id}, *v));
    }
  };
  scan(ws.model.processes, o.process_dm.model_id);
  scan(ws.model.resources, o.resource_fm.model_id);
  scan(ws.model.products, o.product_fm.model_id);
  // workspaces without a model copy still carry the feature attributes
  for (const auto* fm : {&o.resource_fm, &o.product_fm}) {
    for (const auto& [id, f] : fm->features) {
      const std::string* v = f.attributes.find(kDeltaAttribute);
      if (v == nullptr || v->empty()) continue;
      logic::QualifiedRef ref{fm->model_id, id};
      if (std::none_of(out.begin(), out.end(), [&](const DeltaBinding& b) { return b.element == ref; }))
        out.push_back(parse_binding(ref, *v));
    }
  }
  return out;
}

DeltaLoader directory_loader(const std::filesystem::path& dir) {
  return [dir](const std::string& name) {
    auto path = dir / (name + ".delta");
    if (!std::filesystem::exists(path)) throw DeltaError("delta file missing: " + path.string(), name);
    DeltaModel d;
    try {
      d = parse_delta(engine::read_file(path));
    } catch (const SyntaxError& ex) {
      throw DeltaError(path.string() + ":" + ex.what(), name);
    }
    if (d.name != name) throw DeltaError("delta file " + path.string() + " declares delta " + d.name, name);
    return d;
  };
}

std::vector<CollectedDelta> collect_deltas(const engine::StagedSession& session, const DeltaLoader& load,
                                           const std::string& app_name) {
  if (session.stage() != engine::Stage::Done) throw DeltaError("session is not complete");
  const auto& ws = session.workspace();
  const auto& o = ws.out;
  auto all = bindings(ws);

  auto selected = [&](const logic::QualifiedRef& r) {
    if (r.model == o.process_dm.model_id) {
      const auto* a = session.process_config().find(r.element);
      return a != nullptr && a->value == "true";
    }
    if (r.model == o.resource_fm.model_id) return session.resource_config().selected.count(r.element) != 0;
    return session.product_config().selected.count(r.element) != 0;
  };

  std::vector<logic::QualifiedRef> order;
  for (const auto& p : session.production_sequence()) order.push_back({o.process_dm.model_id, p});
  for (const auto& [id, p] : ws.model.processes)
    if (!selected({o.process_dm.model_id, id})) order.push_back({o.process_dm.model_id, id});
  for (const auto& [id, f] : o.resource_fm.features) order.push_back({o.resource_fm.model_id, id});
  for (const auto& [id, f] : o.product_fm.features) order.push_back({o.product_fm.model_id, id});

  std::vector<CollectedDelta> out;
  std::set<std::string> seen;
  for (const auto& ref : order) {
    for (const auto& b : all) {
      if (!(b.element == ref) || b.negated == selected(ref) || seen.count(b.delta_name)) continue;
      DeltaModel d = load(b.delta_name);
      if (d.uses != app_name)
        throw DeltaError("delta " + d.name + " uses " + d.uses + " but the base application is " + app_name, d.name);
      seen.insert(b.delta_name);
      out.push_back({b, std::move(d)});
    }
  }
  return out;
}

std::string report_text(const ConsistencyReport& r) {
  std::ostringstream out;
  out << "consistency " << (r.pass ? "PASS" : "FAIL") << "\n";
  for (const auto& a : r.applied) out << "applied " << a << "\n";
  for (const auto& [id, block] : r.present) out << "present " << id << " " << block << "\n";
  for (const auto& m : r.missing) out << "missing " << m << "\n";
  for (const auto& l : r.leftover) out << "leftover " << l << "\n";
  for (const auto& w : r.warnings) out << "warning " << w << "\n";
  return out.str();
}

Generation generate_artifact(const engine::StagedSession& session, const FbNetwork& base, const DeltaLoader& load) {
  Generation g;
  g.network = base;
  for (const auto& c : collect_deltas(session, load, base.app_name)) {
    g.network = apply_delta(g.network, c.model, &g.report.warnings);
    g.report.applied.push_back(c.model.name);
  }

  const auto& ws = session.workspace();
  auto find_block = [&](const std::string& id) -> std::string {
    if (g.network.blocks.count(id)) return id;
    for (const auto& [name, type] : g.network.blocks)
      if (type == id) return name;
    return {};
  };

  std::vector<std::string> required;
  for (const auto& p : session.production_sequence()) {
    const auto* u = ws.model.processes.find(p);
    if (u == nullptr || !u->is_abstract) required.push_back(p);
  }
  for (const auto& id : session.resource_config().selected) {
    const auto& f = ws.out.resource_fm.features.at(id);
    if (!f.abstract && id != ws.out.resource_fm.root) required.push_back(id);
  }
  for (const auto& id : required) {
    std::string b = find_block(id);
    if (b.empty()) g.report.missing.push_back(id);
    else g.report.present[id] = b;
  }

  engine::StagedSession probe = session;
  const auto& reachable = probe.sequence_space().reachable;
  for (const auto& [id, p] : ws.model.processes) {
    if (p.is_abstract || reachable.count(id)) continue;
    std::string b = find_block(id);
    if (!b.empty()) g.report.leftover.push_back(id + " (" + b + ")");
  }
  g.report.pass = g.report.missing.empty() && g.report.leftover.empty();
  return g;
}

}  // namespace pprvari::delta
