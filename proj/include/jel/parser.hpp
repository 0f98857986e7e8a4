#pragma once

// Parsing and serialization of the JEL textual trace format: a sequence of
// `event(Id, Thread, Payload).` facts. Whitespace between tokens is
// insignificant; lines whose first non-blank character is `%` are comments.
// Atoms may be single-quoted (embedded quotes doubled) or bare
// [A-Za-z_][A-Za-z0-9_-]*; the two spellings are equivalent.

#include <charconv>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jel/model.hpp"

namespace jel {

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, std::size_t column, std::string expected,
             std::string found)
      : std::runtime_error("line " + std::to_string(line) + ", col " +
                           std::to_string(column) + ": expected " + expected +
                           ", found " + found),
        line_(line), column_(column), expected_(std::move(expected)),
        found_(std::move(found)) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& expected() const { return expected_; }
  const std::string& found() const { return found_; }

private:
  std::size_t line_;
  std::size_t column_;
  std::string expected_;
  std::string found_;
};

inline std::string quote_atom(std::string_view text);

namespace detail {

enum class Tok {
  Atom,
  Int,
  Var, // $name, used by the scenario language only
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Dot,
  Colon,
  Semi,
  End,
};

inline const char* tok_label(Tok t) {
  switch (t) {
  case Tok::Atom: return "atom";
  case Tok::Int: return "integer";
  case Tok::Var: return "variable";
  case Tok::LParen: return "'('";
  case Tok::RParen: return "')'";
  case Tok::LBracket: return "'['";
  case Tok::RBracket: return "']'";
  case Tok::Comma: return "','";
  case Tok::Dot: return "'.'";
  case Tok::Colon: return "':'";
  case Tok::Semi: return "';'";
  case Tok::End: return "end of input";
  }
  return "?";
}

struct Token {
  Tok tok = Tok::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;

  std::string describe() const {
    if (tok == Tok::Atom || tok == Tok::Int) return "'" + text + "'";
    return tok_label(tok);
  }
};

inline bool atom_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool atom_char(char c) {
  return atom_start(c) || (c >= '0' && c <= '9') || c == '-';
}
inline bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token next() {
    Token t = current_;
    advance();
    return t;
  }

  Token expect(Tok want, const char* what) {
    if (current_.tok != want) fail(what);
    return next();
  }

  std::string expect_atom(const char* what) {
    return expect(Tok::Atom, what).text;
  }

  // Accepts the given bare keyword atom if present.
  bool accept_keyword(std::string_view kw) {
    if (current_.tok == Tok::Atom && current_.text == kw) {
      advance();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError(current_.line, current_.column, expected,
                     current_.describe());
  }

private:
  void advance() {
    skip_blank();
    current_.line = line_;
    current_.column = column_;
    if (pos_ >= text_.size()) {
      current_.tok = Tok::End;
      current_.text.clear();
      return;
    }
    line_blank_ = false;
    char c = text_[pos_];
    switch (c) {
    case '(': single(Tok::LParen); return;
    case ')': single(Tok::RParen); return;
    case '[': single(Tok::LBracket); return;
    case ']': single(Tok::RBracket); return;
    case ',': single(Tok::Comma); return;
    case '.': single(Tok::Dot); return;
    case ':': single(Tok::Colon); return;
    case ';': single(Tok::Semi); return;
    case '\'': quoted_atom(); return;
    case '$': var(); return;
    default: break;
    }
    if (digit(c) || (c == '-' && pos_ + 1 < text_.size() && digit(text_[pos_ + 1]))) {
      integer();
      return;
    }
    if (atom_start(c)) {
      bare_atom();
      return;
    }
    throw ParseError(line_, column_, "a token",
                     "'" + std::string(1, c) + "'");
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        take();
      } else if (c == '%' && line_blank_) {
        while (pos_ < text_.size() && text_[pos_] != '\n') take();
      } else {
        break;
      }
    }
  }

  void single(Tok t) {
    current_.tok = t;
    current_.text.assign(1, text_[pos_]);
    take();
  }

  void bare_atom() {
    current_.tok = Tok::Atom;
    current_.text.clear();
    while (pos_ < text_.size() && atom_char(text_[pos_])) {
      current_.text.push_back(text_[pos_]);
      take();
    }
  }

  void integer() {
    current_.tok = Tok::Int;
    current_.text.clear();
    if (text_[pos_] == '-') {
      current_.text.push_back('-');
      take();
    }
    while (pos_ < text_.size() && digit(text_[pos_])) {
      current_.text.push_back(text_[pos_]);
      take();
    }
  }

  void quoted_atom() {
    std::size_t open_line = line_, open_col = column_;
    take(); // opening quote
    current_.tok = Tok::Atom;
    current_.text.clear();
    while (true) {
      if (pos_ >= text_.size())
        throw ParseError(open_line, open_col, "closing quote", "end of input");
      char c = text_[pos_];
      take();
      if (c == '\'') {
        if (pos_ < text_.size() && text_[pos_] == '\'') {
          current_.text.push_back('\'');
          take();
        } else {
          return;
        }
      } else {
        current_.text.push_back(c);
      }
    }
  }

  void var() {
    take(); // '$'
    if (pos_ >= text_.size() || !atom_start(text_[pos_]))
      throw ParseError(line_, column_, "variable name after '$'",
                       pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'"
                                           : "end of input");
    current_.tok = Tok::Var;
    current_.text.clear();
    while (pos_ < text_.size() && atom_char(text_[pos_])) {
      current_.text.push_back(text_[pos_]);
      take();
    }
  }

  void take() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
      line_blank_ = true;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
  bool line_blank_ = true;
  Token current_;
};

inline std::uint64_t parse_uint(Lexer& lx, const char* what) {
  Token t = lx.peek();
  if (t.tok != Tok::Int || t.text.starts_with('-')) lx.fail(what);
  lx.next();
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), out);
  if (ec != std::errc() || p != t.text.data() + t.text.size())
    throw ParseError(t.line, t.column, what, "'" + t.text + "'");
  return out;
}

inline Location parse_location(Lexer& lx) {
  Token f = lx.peek();
  if (f.tok != Tok::Atom || f.text != "l") lx.fail("location term l(File, Line)");
  lx.next();
  lx.expect(Tok::LParen, "'(' after l");
  std::string file = lx.expect_atom("file atom");
  lx.expect(Tok::Comma, "','");
  auto line = parse_uint(lx, "line number");
  Token close = lx.expect(Tok::RParen, "')'");
  if (line < 1)
    throw ParseError(close.line, close.column, "line number >= 1", "0");
  return Location{std::move(file), static_cast<std::uint32_t>(line)};
}

inline ObjectRef parse_object_ref(Lexer& lx) {
  Token f = lx.peek();
  if (f.tok != Tok::Atom || f.text != "o") lx.fail("object term o(Class, Id)");
  lx.next();
  lx.expect(Tok::LParen, "'(' after o");
  std::string cls = lx.expect_atom("class atom");
  lx.expect(Tok::Comma, "','");
  auto oid = parse_uint(lx, "object id");
  lx.expect(Tok::RParen, "')'");
  return ObjectRef{std::move(cls), oid};
}

inline Subject parse_subject(Lexer& lx) {
  Token f = lx.peek();
  if (f.tok == Tok::Atom && f.text == "o") return parse_object_ref(lx);
  if (f.tok == Tok::Atom && f.text == "c") {
    lx.next();
    lx.expect(Tok::LParen, "'(' after c");
    std::string cls = lx.expect_atom("class atom");
    lx.expect(Tok::RParen, "')'");
    return ClassRef{std::move(cls)};
  }
  lx.fail("subject term c(Class) or o(Class, Id)");
}

// value ::= null | void | integer | atom | o(Class, Id) | c(Class)
// A c(...) in value position has no variant of its own and folds into a
// Scalar holding the rendered term.
inline Value parse_value(Lexer& lx) {
  Token t = lx.peek();
  if (t.tok == Tok::Int) {
    lx.next();
    return Scalar{t.text};
  }
  if (t.tok != Tok::Atom) lx.fail("value");
  if (t.text == "o") return parse_object_ref(lx);
  if (t.text == "c") {
    lx.next();
    lx.expect(Tok::LParen, "'(' after c");
    std::string cls = lx.expect_atom("class atom");
    lx.expect(Tok::RParen, "')'");
    return Scalar{"c(" + quote_atom(cls) + ")"};
  }
  lx.next();
  if (t.text == "null") return Null{};
  if (t.text == "void") return Void{};
  return Scalar{std::move(t.text)};
}

inline std::vector<Value> parse_value_list(Lexer& lx) {
  std::vector<Value> out;
  lx.expect(Tok::LBracket, "'['");
  if (lx.peek().tok == Tok::RBracket) {
    lx.next();
    return out;
  }
  while (true) {
    out.push_back(parse_value(lx));
    if (lx.peek().tok == Tok::Comma) {
      lx.next();
      continue;
    }
    lx.expect(Tok::RBracket, "',' or ']'");
    return out;
  }
}

inline std::vector<LocalVar> parse_local_list(Lexer& lx) {
  std::vector<LocalVar> out;
  lx.expect(Tok::LBracket, "'['");
  if (lx.peek().tok == Tok::RBracket) {
    lx.next();
    return out;
  }
  while (true) {
    Token f = lx.peek();
    if (f.tok != Tok::Atom || f.text != "lv") lx.fail("local term lv(Name, Value)");
    lx.next();
    lx.expect(Tok::LParen, "'(' after lv");
    std::string name = lx.expect_atom("local variable name");
    lx.expect(Tok::Comma, "','");
    Value v = parse_value(lx);
    lx.expect(Tok::RParen, "')'");
    out.push_back(LocalVar{std::move(name), std::move(v)});
    if (lx.peek().tok == Tok::Comma) {
      lx.next();
      continue;
    }
    lx.expect(Tok::RBracket, "',' or ']'");
    return out;
  }
}

inline std::vector<FieldDecl> parse_field_decl_list(Lexer& lx) {
  std::vector<FieldDecl> out;
  lx.expect(Tok::LBracket, "'['");
  if (lx.peek().tok == Tok::RBracket) {
    lx.next();
    return out;
  }
  while (true) {
    Token f = lx.peek();
    if (f.tok != Tok::Atom || (f.text != "cf" && f.text != "of"))
      lx.fail("field term cf(Name) or of(Name)");
    lx.next();
    lx.expect(Tok::LParen, "'('");
    std::string name = lx.expect_atom("field name");
    lx.expect(Tok::RParen, "')'");
    out.push_back(FieldDecl{f.text == "cf" ? FieldKind::Class : FieldKind::Instance,
                            std::move(name)});
    if (lx.peek().tok == Tok::Comma) {
      lx.next();
      continue;
    }
    lx.expect(Tok::RBracket, "',' or ']'");
    return out;
  }
}

inline ExecutionEvent parse_payload(Lexer& lx) {
  Token f = lx.peek();
  if (f.tok != Tok::Atom) lx.fail("payload functor");
  const std::string& functor = f.text;

  if (functor == "methodcall") {
    lx.next();
    lx.expect(Tok::LParen, "'('");
    Location loc = parse_location(lx);
    lx.expect(Tok::Comma, "','");
    Subject subj = parse_subject(lx);
    lx.expect(Tok::Comma, "','");
    std::string name = lx.expect_atom("method name");
    lx.expect(Tok::Comma, "','");
    auto args = parse_value_list(lx);
    lx.expect(Tok::RParen, "')'");
    return MethodCall{std::move(loc), std::move(subj), std::move(name), std::move(args)};
  }
  if (functor == "methodexit") {
    lx.next();
    lx.expect(Tok::LParen, "'('");
    EventId call_id = parse_uint(lx, "call event id");
    lx.expect(Tok::Comma, "','");
    Location loc = parse_location(lx);
    lx.expect(Tok::Comma, "','");
    Subject subj = parse_subject(lx);
    lx.expect(Tok::Comma, "','");
    std::string name = lx.expect_atom("method name");
    lx.expect(Tok::Comma, "','");
    Value ret = parse_value(lx);
    lx.expect(Tok::RParen, "')'");
    return MethodExit{call_id, std::move(loc), std::move(subj), std::move(name),
                      std::move(ret)};
  }
  if (functor == "setfield") {
    lx.next();
    lx.expect(Tok::LParen, "'('");
    Location loc = parse_location(lx);
    lx.expect(Tok::Comma, "','");
    Subject subj = parse_subject(lx);
    lx.expect(Tok::Comma, "','");
    std::string name = lx.expect_atom("field name");
    lx.expect(Tok::Comma, "','");
    Value v = parse_value(lx);
    lx.expect(Tok::RParen, "')'");
    return SetField{std::move(loc), std::move(subj), std::move(name), std::move(v)};
  }
  if (functor == "datastructure") {
    lx.next();
    lx.expect(Tok::LParen, "'('");
    Location loc = parse_location(lx);
    lx.expect(Tok::Comma, "','");
    auto contents = parse_value_list(lx);
    lx.expect(Tok::RParen, "')'");
    return DataStructure{std::move(loc), std::move(contents)};
  }
  if (functor == "step") {
    lx.next();
    lx.expect(Tok::LParen, "'('");
    Location loc = parse_location(lx);
    lx.expect(Tok::Comma, "','");
    auto locals = parse_local_list(lx);
    lx.expect(Tok::RParen, "')'");
    return Step{std::move(loc), std::move(locals)};
  }
  if (functor == "exception") {
    lx.next();
    lx.expect(Tok::LParen, "'('");
    Location loc = parse_location(lx);
    lx.expect(Tok::Comma, "','");
    ObjectRef inst = parse_object_ref(lx);
    lx.expect(Tok::Comma, "','");
    Value msg = parse_value(lx);
    lx.expect(Tok::Comma, "','");
    std::optional<Location> catch_site;
    if (lx.peek().tok == Tok::Atom && lx.peek().text == "uncaught") {
      lx.next();
    } else {
      catch_site = parse_location(lx);
    }
    lx.expect(Tok::RParen, "')'");
    return Exception{std::move(loc), std::move(inst), std::move(msg),
                     std::move(catch_site)};
  }
  if (functor == "threadstart" || functor == "threaddeath") {
    lx.next();
    lx.expect(Tok::LParen, "'('");
    std::string group = lx.expect_atom("thread group atom");
    lx.expect(Tok::RParen, "')'");
    if (functor == "threadstart") return ThreadStart{std::move(group)};
    return ThreadDeath{std::move(group)};
  }
  if (functor == "memberfields") {
    lx.next();
    lx.expect(Tok::LParen, "'('");
    Token c = lx.peek();
    if (c.tok != Tok::Atom || c.text != "c") lx.fail("class term c(Class)");
    lx.next();
    lx.expect(Tok::LParen, "'('");
    std::string cls = lx.expect_atom("class atom");
    lx.expect(Tok::RParen, "')'");
    lx.expect(Tok::Comma, "','");
    auto fields = parse_field_decl_list(lx);
    lx.expect(Tok::RParen, "')'");
    return MemberFields{std::move(cls), std::move(fields)};
  }
  lx.fail("payload functor (methodcall, methodexit, setfield, datastructure, "
          "step, exception, threadstart, threaddeath or memberfields)");
}

} // namespace detail

inline std::vector<TraceEvent> parse_trace(std::string_view text) {
  detail::Lexer lx(text);
  std::vector<TraceEvent> out;
  while (lx.peek().tok != detail::Tok::End) {
    detail::Token f = lx.peek();
    if (f.tok != detail::Tok::Atom || f.text != "event") lx.fail("'event' fact");
    lx.next();
    lx.expect(detail::Tok::LParen, "'(' after event");
    EventId id = detail::parse_uint(lx, "event id");
    lx.expect(detail::Tok::Comma, "','");
    std::string thread = lx.expect_atom("thread atom");
    lx.expect(detail::Tok::Comma, "','");
    ExecutionEvent payload = detail::parse_payload(lx);
    lx.expect(detail::Tok::RParen, "')'");
    lx.expect(detail::Tok::Dot, "'.' terminating the fact");
    out.push_back(TraceEvent{id, std::move(thread), std::move(payload)});
  }
  return out;
}

// Convenience single-term entry points (CLI arguments, tests).
inline Value parse_value_text(std::string_view text) {
  detail::Lexer lx(text);
  Value v = detail::parse_value(lx);
  if (lx.peek().tok != detail::Tok::End) lx.fail("end of value");
  return v;
}
inline Subject parse_subject_text(std::string_view text) {
  detail::Lexer lx(text);
  Subject s = detail::parse_subject(lx);
  if (lx.peek().tok != detail::Tok::End) lx.fail("end of subject");
  return s;
}
inline Location parse_location_text(std::string_view text) {
  detail::Lexer lx(text);
  Location l = detail::parse_location(lx);
  if (lx.peek().tok != detail::Tok::End) lx.fail("end of location");
  return l;
}

// ---------------------------------------------------------------------------
// Canonical serialization: one fact per line, atoms quoted, a single space
// after each comma. parse(serialize(events)) is structurally equal to events.

namespace detail {
inline bool integer_text(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = s[0] == '-' ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!digit(s[i])) return false;
  return true;
}
} // namespace detail

inline std::string quote_atom(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 2);
  out.push_back('\'');
  for (char c : text) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

inline std::string render_location(const Location& l) {
  return "l(" + quote_atom(l.file) + ", " + std::to_string(l.line) + ")";
}

inline std::string render_subject(const Subject& s) {
  return std::visit(detail::overloaded{
                        [](const ClassRef& c) { return "c(" + quote_atom(c.class_name) + ")"; },
                        [](const ObjectRef& o) {
                          return "o(" + quote_atom(o.class_name) + ", " +
                                 std::to_string(o.object_id) + ")";
                        },
                    },
                    s);
}

inline std::string render_value(const Value& v) {
  return std::visit(
      detail::overloaded{
          [](const Null&) { return std::string("null"); },
          [](const Void&) { return std::string("void"); },
          [](const Scalar& s) {
            return detail::integer_text(s.text) ? s.text : quote_atom(s.text);
          },
          [](const ObjectRef& o) {
            return "o(" + quote_atom(o.class_name) + ", " +
                   std::to_string(o.object_id) + ")";
          },
      },
      v);
}

namespace detail {

inline std::string render_value_list(const std::vector<Value>& vs) {
  std::string out = "[";
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ", ";
    out += render_value(vs[i]);
  }
  return out + "]";
}

inline std::string render_payload(const ExecutionEvent& e) {
  return std::visit(
      overloaded{
          [](const MethodCall& c) {
            return "methodcall(" + render_location(c.location) + ", " +
                   render_subject(c.subject) + ", " + quote_atom(c.name) + ", " +
                   render_value_list(c.args) + ")";
          },
          [](const MethodExit& x) {
            return "methodexit(" + std::to_string(x.call_id) + ", " +
                   render_location(x.location) + ", " + render_subject(x.subject) +
                   ", " + quote_atom(x.name) + ", " + render_value(x.return_value) +
                   ")";
          },
          [](const SetField& s) {
            return "setfield(" + render_location(s.location) + ", " +
                   render_subject(s.subject) + ", " + quote_atom(s.field_name) +
                   ", " + render_value(s.value) + ")";
          },
          [](const DataStructure& d) {
            return "datastructure(" + render_location(d.location) + ", " +
                   render_value_list(d.contents) + ")";
          },
          [](const Step& s) {
            std::string out = "step(" + render_location(s.location) + ", [";
            for (std::size_t i = 0; i < s.locals.size(); ++i) {
              if (i) out += ", ";
              out += "lv(" + quote_atom(s.locals[i].name) + ", " +
                     render_value(s.locals[i].value) + ")";
            }
            return out + "])";
          },
          [](const Exception& x) {
            return "exception(" + render_location(x.location) + ", " +
                   render_value(Value{x.instance}) + ", " + render_value(x.message) +
                   ", " +
                   (x.catch_site ? render_location(*x.catch_site)
                                 : std::string("uncaught")) +
                   ")";
          },
          [](const ThreadStart& t) {
            return "threadstart(" + quote_atom(t.group) + ")";
          },
          [](const ThreadDeath& t) {
            return "threaddeath(" + quote_atom(t.group) + ")";
          },
          [](const MemberFields& m) {
            std::string out = "memberfields(c(" + quote_atom(m.class_name) + "), [";
            for (std::size_t i = 0; i < m.fields.size(); ++i) {
              if (i) out += ", ";
              out += m.fields[i].kind == FieldKind::Class ? "cf(" : "of(";
              out += quote_atom(m.fields[i].name) + ")";
            }
            return out + "])";
          },
      },
      e);
}

} // namespace detail

inline std::string serialize_event(const TraceEvent& e) {
  return "event(" + std::to_string(e.id) + ", " + quote_atom(e.thread) + ", " +
         detail::render_payload(e.event) + ").";
}

inline std::string serialize_trace(std::span<const TraceEvent> events) {
  std::string out;
  for (const TraceEvent& e : events) {
    out += serialize_event(e);
    out += '\n';
  }
  return out;
}

} // namespace jel
