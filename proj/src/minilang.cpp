#include "stackres/minilang.hpp"

#include <cctype>

#include "stackres/error.hpp"

namespace stackres::minilang {

std::string module_name(std::string_view display_name) {
  if (auto slash = display_name.find_last_of('/'); slash != std::string_view::npos) {
    display_name.remove_prefix(slash + 1);
  }
  if (auto dot = display_name.find_last_of('.'); dot != std::string_view::npos && dot > 0) {
    display_name = display_name.substr(0, dot);
  }
  return std::string(display_name);
}

namespace {

enum class Tok { Name, Int, LParen, RParen, Dot, Colon, Equals, Star, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Span span;
};

bool is_keyword(std::string_view s) {
  return s == "from" || s == "import" || s == "class" || s == "pass" || s == "print";
}

[[noreturn]] void fail(std::uint32_t line, std::uint32_t column, const std::string& message) {
  throw Error(ErrorCode::SyntaxError, std::to_string(line + 1) + ":" + std::to_string(column + 1) + ": " + message);
}

// One logical line: its tokens (comment stripped) and indentation width.
struct Line {
  std::uint32_t number = 0;
  std::uint32_t indent = 0;
  std::vector<Token> tokens;
};

std::vector<Line> tokenize(std::string_view source) {
  std::vector<Line> lines;
  std::uint32_t offset = 0;
  std::uint32_t number = 0;
  while (offset <= source.size()) {
    auto nl = source.find('\n', offset);
    if (nl == std::string_view::npos) nl = source.size();
    std::string_view text = source.substr(offset, nl - offset);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);

    Line line;
    line.number = number;
    std::uint32_t col = 0;
    while (col < text.size() && (text[col] == ' ' || text[col] == '\t')) {
      if (text[col] == '\t') fail(number, col, "tabs are not allowed in indentation");
      ++col;
    }
    line.indent = col;
    while (col < text.size()) {
      const char c = text[col];
      if (c == ' ' || c == '\t') {
        ++col;
        continue;
      }
      if (c == '#') break;
      Token tok;
      const std::uint32_t begin = col;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (col < text.size() && (std::isalnum(static_cast<unsigned char>(text[col])) || text[col] == '_')) ++col;
        tok.kind = Tok::Name;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        while (col < text.size() && std::isdigit(static_cast<unsigned char>(text[col]))) ++col;
        tok.kind = Tok::Int;
      } else {
        switch (c) {
          case '(': tok.kind = Tok::LParen; break;
          case ')': tok.kind = Tok::RParen; break;
          case '.': tok.kind = Tok::Dot; break;
          case ':': tok.kind = Tok::Colon; break;
          case '=': tok.kind = Tok::Equals; break;
          case '*': tok.kind = Tok::Star; break;
          default: fail(number, col, std::string("unexpected character '") + c + "'");
        }
        ++col;
      }
      tok.text = std::string(text.substr(begin, col - begin));
      tok.span = Span{offset + begin, offset + col, number, begin, number, col};
      line.tokens.push_back(std::move(tok));
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    offset = static_cast<std::uint32_t>(nl) + 1;
    ++number;
  }
  return lines;
}

class LineParser {
 public:
  explicit LineParser(const Line& line) : line_(line) {}

  [[nodiscard]] bool at_end() const { return pos_ >= line_.tokens.size(); }
  [[nodiscard]] const Token* peek() const { return at_end() ? nullptr : &line_.tokens[pos_]; }
  [[nodiscard]] bool peek_is(Tok kind, std::string_view text = {}) const {
    const auto* t = peek();
    return t && t->kind == kind && (text.empty() || t->text == text);
  }

  const Token& expect(Tok kind, std::string_view what) {
    if (!peek_is(kind)) error("expected " + std::string(what));
    return line_.tokens[pos_++];
  }

  void expect_keyword(std::string_view kw) {
    if (!peek_is(Tok::Name, kw)) error("expected '" + std::string(kw) + "'");
    ++pos_;
  }

  Name name(std::string_view what) {
    const auto& t = expect(Tok::Name, what);
    if (is_keyword(t.text)) {
      --pos_;
      error("'" + t.text + "' is a keyword");
    }
    return Name{t.text, t.span};
  }

  void finish() {
    if (!at_end()) error("unexpected '" + peek()->text + "'");
  }

  [[noreturn]] void error(const std::string& message) const {
    if (const auto* t = peek()) fail(t->span.start_line, t->span.start_column, message);
    const auto& last = line_.tokens.back();
    fail(last.span.end_line, last.span.end_column, message + " at end of line");
  }

  Expr expression() {
    Expr e = primary();
    while (true) {
      if (peek_is(Tok::Dot)) {
        ++pos_;
        Expr attr;
        attr.kind = Expr::Kind::Attr;
        attr.name = name("attribute name");
        attr.inner = std::make_unique<Expr>(std::move(e));
        e = std::move(attr);
      } else if (peek_is(Tok::LParen)) {
        ++pos_;
        expect(Tok::RParen, "')' (calls take no arguments)");
        Expr call;
        call.kind = Expr::Kind::Call;
        call.inner = std::make_unique<Expr>(std::move(e));
        e = std::move(call);
      } else {
        return e;
      }
    }
  }

 private:
  Expr primary() {
    Expr e;
    if (peek_is(Tok::Int)) {
      e.kind = Expr::Kind::IntLit;
      e.literal = line_.tokens[pos_++].text;
    } else if (peek_is(Tok::Name, "print")) {
      ++pos_;
      expect(Tok::LParen, "'(' after print");
      e.kind = Expr::Kind::Print;
      e.inner = std::make_unique<Expr>(expression());
      expect(Tok::RParen, "')'");
    } else if (peek_is(Tok::LParen)) {
      ++pos_;
      e = expression();
      expect(Tok::RParen, "')'");
    } else if (peek_is(Tok::Name)) {
      e.kind = Expr::Kind::Name;
      e.name = name("name");
    } else {
      error("expected an expression");
    }
    return e;
  }

  const Line& line_;
  std::size_t pos_ = 0;
};

// `name = expr`, or nullopt for `pass`.
std::optional<Stmt> field_or_pass(LineParser& p) {
  if (p.peek_is(Tok::Name, "pass")) {
    p.expect_keyword("pass");
    p.finish();
    return std::nullopt;
  }
  Stmt s;
  s.kind = Stmt::Kind::Assign;
  s.name = p.name("field name");
  p.expect(Tok::Equals, "'=' (class bodies hold only field assignments)");
  s.value = p.expression();
  p.finish();
  return s;
}

}  // namespace

Module parse(std::string_view source, std::string_view display_name) {
  Module module;
  module.name = module_name(display_name);
  if (module.name.empty()) throw Error(ErrorCode::SyntaxError, "cannot derive a module name from '" +
                                                                   std::string(display_name) + "'");
  std::uint32_t last_line = 0;
  std::uint32_t last_col = 0;
  for (char c : source) {
    if (c == '\n') {
      ++last_line;
      last_col = 0;
    } else {
      ++last_col;
    }
  }
  module.extent = Span{0, static_cast<std::uint32_t>(source.size()), 0, 0, last_line, last_col};

  const auto lines = tokenize(source);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    LineParser p(line);
    if (line.indent != 0) fail(line.number, 0, "unexpected indent");

    if (p.peek_is(Tok::Name, "from")) {
      p.expect_keyword("from");
      Stmt s;
      s.kind = Stmt::Kind::ImportStar;
      s.name = p.name("module name");
      p.expect_keyword("import");
      p.expect(Tok::Star, "'*' (only star imports are supported)");
      p.finish();
      module.statements.push_back(std::move(s));
    } else if (p.peek_is(Tok::Name, "class")) {
      p.expect_keyword("class");
      Stmt s;
      s.kind = Stmt::Kind::ClassDef;
      s.name = p.name("class name");
      if (p.peek_is(Tok::LParen)) {
        p.expect(Tok::LParen, "'('");
        s.base = p.name("base class name");
        p.expect(Tok::RParen, "')'");
      }
      p.expect(Tok::Colon, "':'");
      p.finish();
      std::size_t body_lines = 0;
      while (i + 1 < lines.size() && lines[i + 1].indent > 0) {
        ++i;
        ++body_lines;
        LineParser body(lines[i]);
        if (body.peek_is(Tok::Name, "class")) body.error("nested classes are not supported");
        if (auto field = field_or_pass(body)) s.body.push_back(std::move(*field));
      }
      if (body_lines == 0) p.error("expected an indented block");
      module.statements.push_back(std::move(s));
    } else if (p.peek_is(Tok::Name, "pass")) {
      p.expect_keyword("pass");
      p.finish();
    } else if (p.peek_is(Tok::Name) && line.tokens.size() >= 2 && line.tokens[1].kind == Tok::Equals) {
      Stmt s;
      s.kind = Stmt::Kind::Assign;
      s.name = p.name("assignment target");
      p.expect(Tok::Equals, "'='");
      s.value = p.expression();
      p.finish();
      module.statements.push_back(std::move(s));
    } else {
      Stmt s;
      s.kind = Stmt::Kind::ExprStmt;
      s.value = p.expression();
      p.finish();
      module.statements.push_back(std::move(s));
    }
  }
  return module;
}

// ---------------------------------------------------------------------------
// Graph construction

namespace {

class Builder {
 public:
  Builder(StackGraph& graph, FileId file) : g_(graph), file_(file) {}

  NodeId scope() { return g_.add_node(file_, NodeSpec::scope()); }
  NodeId root() { return g_.add_node(file_, NodeSpec::root()); }
  NodeId push(const std::string& s) { return g_.add_node(file_, NodeSpec::push(s)); }
  NodeId pop(const std::string& s) { return g_.add_node(file_, NodeSpec::pop(s)); }
  NodeId reference(const Name& n) {
    return g_.add_node(file_, NodeSpec::push(n.id), NodeFlags{.is_reference = true}, n.span);
  }
  NodeId definition(const Name& n) {
    return g_.add_node(file_, NodeSpec::pop(n.id), NodeFlags{.is_definition = true}, n.span);
  }
  void edge(NodeId from, NodeId to) { g_.add_edge(from, to); }

  // Reference chain for `e`, innermost name resolved in `target`. Returns the
  // chain's entry node, or nullopt when `e` mentions no names.
  std::optional<NodeId> expression(const Expr& e, NodeId target) {
    switch (e.kind) {
      case Expr::Kind::Name: {
        const auto ref = reference(e.name);
        edge(ref, target);
        return ref;
      }
      case Expr::Kind::Attr: {
        const auto attr = reference(e.name);
        const auto dot = push(".");
        edge(attr, dot);
        if (auto base = expression(*e.inner, target)) edge(dot, *base);
        return attr;
      }
      case Expr::Kind::Call: {
        const auto call = push("()");
        if (auto callee = expression(*e.inner, target)) edge(call, *callee);
        return call;
      }
      case Expr::Kind::Print:
        return expression(*e.inner, target);
      case Expr::Kind::IntLit:
        return std::nullopt;
    }
    return std::nullopt;
  }

 private:
  StackGraph& g_;
  FileId file_;
};

bool mentions_name(const Expr& e) {
  if (e.kind == Expr::Kind::Name || e.kind == Expr::Kind::Attr) return true;
  return e.inner && mentions_name(*e.inner);
}

}  // namespace

void build_graph(const Module& module, StackGraph& graph, FileId file) {
  if (!graph.nodes(file).empty()) throw Error(ErrorCode::FileSealed, "build_graph needs an empty file subgraph");
  Builder b(graph, file);

  const auto root = b.root();
  const auto module_def = graph.add_node(file, NodeSpec::pop(module.name), NodeFlags{.is_definition = true},
                                         module.extent);
  const auto module_dot = b.pop(".");
  b.edge(root, module_def);
  b.edge(module_def, module_dot);

  std::optional<NodeId> previous;  // scope after the previous statement
  std::optional<NodeId> initial;   // scope before the first statement, made on demand
  auto scope_before = [&](NodeId current) {
    if (previous) return *previous;
    if (!initial) {
      initial = b.scope();
      b.edge(current, *initial);
    }
    return *initial;
  };

  for (const auto& stmt : module.statements) {
    const auto scope = b.scope();
    if (previous) b.edge(scope, *previous);

    switch (stmt.kind) {
      case Stmt::Kind::ImportStar: {
        const auto dot = b.push(".");
        const auto ref = b.reference(stmt.name);
        const auto import_root = b.root();
        b.edge(scope, dot);
        b.edge(dot, ref);
        b.edge(ref, import_root);
        break;
      }
      case Stmt::Kind::ClassDef: {
        const auto def = b.definition(stmt.name);
        b.edge(scope, def);
        const auto member_dot = b.pop(".");
        const auto members = b.scope();
        b.edge(def, member_dot);
        b.edge(member_dot, members);
        const auto call = b.pop("()");
        const auto instance_dot = b.pop(".");
        const auto instance = b.scope();
        b.edge(def, call);
        b.edge(call, instance_dot);
        b.edge(instance_dot, instance);
        b.edge(instance, members);
        if (stmt.base) {
          const auto before = scope_before(scope);
          const auto base_dot = b.push(".");
          const auto base = b.reference(*stmt.base);
          b.edge(members, base_dot);
          b.edge(base_dot, base);
          b.edge(base, before);
          const auto inst_dot = b.push(".");
          const auto inst_call = b.push("()");
          b.edge(instance, inst_dot);
          b.edge(inst_dot, inst_call);
          b.edge(inst_call, base);
        }
        for (const auto& field : stmt.body) {
          b.edge(members, b.definition(field.name));
          if (field.value && mentions_name(*field.value)) b.expression(*field.value, scope_before(scope));
        }
        break;
      }
      case Stmt::Kind::Assign:
        b.edge(scope, b.definition(stmt.name));
        if (stmt.value) b.expression(*stmt.value, scope);
        break;
      case Stmt::Kind::ExprStmt:
        if (stmt.value) b.expression(*stmt.value, scope);
        break;
    }
    previous = scope;
  }

  b.edge(module_dot, previous ? *previous : b.scope());
}

}  // namespace stackres::minilang
