// Copyright 2026 The tcfuzz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tcfuzz/dsl/parser.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace tcfuzz::dsl {

ParseError::ParseError(std::string message, size_t line, size_t column, std::string token,
                       SourceSpan span)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message +
                         (token.empty() ? std::string() : " near '" + token + "'")),
      detail_(std::move(message)),
      line_(line),
      column_(column),
      token_(std::move(token)),
      span_(span) {}

namespace {
const char* binding_kind_text(BindingError::Kind k) {
  switch (k) {
    case BindingError::Kind::Unbound: return "unbound variable";
    case BindingError::Kind::Duplicate: return "duplicate binding";
    case BindingError::Kind::Shadowing: return "quantifier variable shadows";
  }
  return "binding error";
}
}  // namespace

BindingError::BindingError(Kind kind, std::string name, SourceSpan span)
    : std::runtime_error(std::string(binding_kind_text(kind)) + " '" + name + "'"),
      kind_(kind),
      name_(std::move(name)),
      span_(span) {}

namespace {

// ============================================================================
// Lexer
// ============================================================================

enum class Tok {
  End,
  Ident,
  Number,
  String,
  LBrace,
  RBrace,
  LParen,
  RParen,
  LBrack,
  RBrack,
  Comma,
  Colon,
  Dot,
  Models,  // |=
  Bar,     // |
  Plus,
  Minus,
  Star,
  Slash,
  Eq,
  Ne,
  Gt,
  Lt,
  Ge,
  Le,
  KwAnd,
  KwOr,
  KwForall,
  KwExists,
  KwIn,
  KwIf,
  KwThen,
  KwElse,
  KwTrue,
  KwFalse,
  Error,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceSpan span;
  std::string value;  // decoded string literal
};

const std::pair<const char*, Tok> kUnicode[] = {
    {"\xE2\x8A\xA8", Tok::Models}, {"\xE2\x89\xA4", Tok::Le},     {"\xE2\x89\xA5", Tok::Ge},
    {"\xE2\x89\xA0", Tok::Ne},     {"\xC3\x97", Tok::Star},       {"\xE2\x88\xA7", Tok::KwAnd},
    {"\xE2\x88\xA8", Tok::KwOr},   {"\xE2\x88\x80", Tok::KwForall}, {"\xE2\x88\x83", Tok::KwExists},
    {"\xE2\x88\x88", Tok::KwIn},   {"\xE2\x8A\x8E", Tok::Bar},    {"\xE2\x88\x92", Tok::Minus},
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_ws();
    Token t;
    t.span.begin = pos_;
    if (pos_ >= src_.size()) {
      t.kind = Tok::End;
      t.span.end = pos_;
      return t;
    }
    unsigned char c = static_cast<unsigned char>(src_[pos_]);
    if (c >= 0x80) {
      for (const auto& [seq, kind] : kUnicode) {
        std::string_view s(seq);
        if (src_.substr(pos_, s.size()) == s) {
          pos_ += s.size();
          return finish(t, kind);
        }
      }
      size_t len = (c >= 0xF0) ? 4 : (c >= 0xE0) ? 3 : (c >= 0xC0) ? 2 : 1;
      pos_ = std::min(src_.size(), pos_ + len);
      return finish(t, Tok::Error);
    }
    if (std::isalpha(c) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      std::string_view word = src_.substr(t.span.begin, pos_ - t.span.begin);
      static const std::pair<const char*, Tok> kw[] = {
          {"and", Tok::KwAnd},   {"or", Tok::KwOr},     {"forall", Tok::KwForall},
          {"exists", Tok::KwExists}, {"in", Tok::KwIn}, {"if", Tok::KwIf},
          {"then", Tok::KwThen}, {"else", Tok::KwElse}, {"true", Tok::KwTrue},
          {"false", Tok::KwFalse}};
      for (const auto& [w, k] : kw) {
        if (word == w) return finish(t, k);
      }
      return finish(t, Tok::Ident);
    }
    if (std::isdigit(c)) {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
          std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
        ++pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        size_t save = pos_;
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        } else {
          pos_ = save;
        }
      }
      return finish(t, Tok::Number);
    }
    if (c == '"') {
      ++pos_;
      std::string value;
      while (pos_ < src_.size() && src_[pos_] != '"') {
        if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
          char e = src_[pos_ + 1];
          value += (e == 'n') ? '\n' : (e == 't') ? '\t' : e;
          pos_ += 2;
        } else {
          value += src_[pos_++];
        }
      }
      if (pos_ >= src_.size()) return finish(t, Tok::Error);
      ++pos_;
      t.value = std::move(value);
      return finish(t, Tok::String);
    }
    ++pos_;
    auto peek_is = [&](char ch) {
      if (pos_ < src_.size() && src_[pos_] == ch) {
        ++pos_;
        return true;
      }
      return false;
    };
    switch (c) {
      case '{': return finish(t, Tok::LBrace);
      case '}': return finish(t, Tok::RBrace);
      case '(': return finish(t, Tok::LParen);
      case ')': return finish(t, Tok::RParen);
      case '[': return finish(t, Tok::LBrack);
      case ']': return finish(t, Tok::RBrack);
      case ',': return finish(t, Tok::Comma);
      case ':': return finish(t, Tok::Colon);
      case '.': return finish(t, Tok::Dot);
      case '|': return finish(t, peek_is('=') ? Tok::Models : Tok::Bar);
      case '+': return finish(t, Tok::Plus);
      case '-': return finish(t, Tok::Minus);
      case '*': return finish(t, Tok::Star);
      case '/': return finish(t, Tok::Slash);
      case '=': peek_is('='); return finish(t, Tok::Eq);
      case '!': return finish(t, peek_is('=') ? Tok::Ne : Tok::Error);
      case '>': return finish(t, peek_is('=') ? Tok::Ge : Tok::Gt);
      case '<': return finish(t, peek_is('=') ? Tok::Le : Tok::Lt);
      default: return finish(t, Tok::Error);
    }
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  Token finish(Token& t, Tok kind) {
    t.kind = kind;
    t.span.end = pos_;
    t.text = std::string(src_.substr(t.span.begin, pos_ - t.span.begin));
    return t;
  }

  std::string_view src_;
  size_t pos_ = 0;
};

// ============================================================================
// Parser
// ============================================================================

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src), lex_(src) {
    cur_ = lex_.next();
    ahead_ = lex_.next();
  }

  Rule rule() {
    Rule r;
    expect(Tok::LBrace, "expected '{' to open bindings");
    std::set<std::string> seen;
    do {
      Token name = expect(Tok::Ident, "expected binding variable name");
      if (is_reserved(name.text)) fail("reserved word used as variable name", name);
      expect(Tok::Colon, "expected ':' after binding name");
      TypePtr t = type();
      if (!seen.insert(name.text).second)
        throw BindingError(BindingError::Kind::Duplicate, name.text, name.span);
      r.bindings.push_back(VarBinding{name.text, t, {name.span.begin, prev_end_}});
    } while (accept(Tok::Comma));
    expect(Tok::RBrace, "expected '}' to close bindings");
    expect(Tok::Models, "expected '|=' after bindings");
    for (const auto& b : r.bindings) scope_.push_back(b.name);
    params_ = scope_;
    r.body = expr();
    if (cur_.kind != Tok::End) fail("unexpected trailing input", cur_);
    return r;
  }

  TypePtr standalone_type() {
    TypePtr t = type();
    if (cur_.kind != Tok::End) fail("unexpected trailing input", cur_);
    return t;
  }

 private:
  static bool is_reserved(const std::string& s) {
    static const std::set<std::string> kReserved = {"ndim", "shape", "dtype_", "min", "max", "len",
                                                    "int", "float", "bool", "dtype", "str",
                                                    "tensor", "list", "tuple"};
    return kReserved.count(s) > 0;
  }

  [[noreturn]] void fail(const std::string& msg, const Token& at) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i < at.span.begin && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(src_[i]) & 0xC0) != 0x80) {
        ++col;
      }
    }
    std::string tok = at.kind == Tok::End ? "<end of input>" : at.text;
    throw ParseError(msg, line, col, tok, at.span);
  }

  void advance() {
    prev_end_ = cur_.span.end;
    cur_ = ahead_;
    ahead_ = lex_.next();
  }

  bool accept(Tok k) {
    if (cur_.kind == k) {
      advance();
      return true;
    }
    return false;
  }

  Token expect(Tok k, const char* msg) {
    if (cur_.kind != k) fail(msg, cur_);
    Token t = cur_;
    advance();
    return t;
  }

  TypePtr atype() {
    Token t = expect(Tok::Ident, "expected a type");
    if (t.text == "int") return TypeExpr::prim(TypeKind::Int);
    if (t.text == "float") return TypeExpr::prim(TypeKind::Float);
    if (t.text == "bool") return TypeExpr::prim(TypeKind::Bool);
    if (t.text == "dtype") return TypeExpr::prim(TypeKind::Dtype);
    if (t.text == "str") return TypeExpr::prim(TypeKind::Str);
    if (t.text == "tensor") return TypeExpr::prim(TypeKind::Tensor);
    if (t.text == "list" || t.text == "tuple") {
      expect(Tok::LParen, "expected '(' after list/tuple");
      TypePtr e = type();
      expect(Tok::RParen, "expected ')' closing element type");
      return t.text == "list" ? TypeExpr::list(e) : TypeExpr::tuple(e);
    }
    fail("unknown type name", t);
  }

  TypePtr type() {
    std::vector<TypePtr> arms{atype()};
    while (accept(Tok::Bar)) arms.push_back(atype());
    if (arms.size() == 1) return arms[0];
    return TypeExpr::union_of(std::move(arms));
  }

  // ------------------------------------------------------------------------
  // Expressions
  // ------------------------------------------------------------------------

  ExprPtr expr() { return or_expr(); }

  ExprPtr or_expr() {
    size_t begin = cur_.span.begin;
    ExprPtr lhs = and_expr();
    while (cur_.kind == Tok::KwOr) {
      advance();
      ExprPtr rhs = and_expr();
      lhs = make_expr(Logic{LogicOp::Or, lhs, rhs}, {begin, prev_end_});
    }
    return lhs;
  }

  ExprPtr and_expr() {
    size_t begin = cur_.span.begin;
    ExprPtr lhs = cmp_expr();
    while (cur_.kind == Tok::KwAnd) {
      advance();
      ExprPtr rhs = cmp_expr();
      lhs = make_expr(Logic{LogicOp::And, lhs, rhs}, {begin, prev_end_});
    }
    return lhs;
  }

  static bool cmp_token(Tok k, CmpOp& op) {
    switch (k) {
      case Tok::Eq: op = CmpOp::Eq; return true;
      case Tok::Ne: op = CmpOp::Ne; return true;
      case Tok::Gt: op = CmpOp::Gt; return true;
      case Tok::Lt: op = CmpOp::Lt; return true;
      case Tok::Ge: op = CmpOp::Ge; return true;
      case Tok::Le: op = CmpOp::Le; return true;
      default: return false;
    }
  }

  ExprPtr cmp_expr() {
    size_t begin = cur_.span.begin;
    ExprPtr lhs = add_expr();
    CmpOp op;
    if (cmp_token(cur_.kind, op)) {
      advance();
      ExprPtr rhs = add_expr();
      lhs = make_expr(Cmp{op, lhs, rhs}, {begin, prev_end_});
      if (cmp_token(cur_.kind, op)) fail("comparison operators do not chain; add parentheses", cur_);
    }
    return lhs;
  }

  ExprPtr add_expr() {
    size_t begin = cur_.span.begin;
    ExprPtr lhs = mul_expr();
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      ArithOp op = cur_.kind == Tok::Plus ? ArithOp::Add : ArithOp::Sub;
      advance();
      ExprPtr rhs = mul_expr();
      lhs = make_expr(Arith{op, lhs, rhs}, {begin, prev_end_});
    }
    return lhs;
  }

  ExprPtr mul_expr() {
    size_t begin = cur_.span.begin;
    ExprPtr lhs = primary();
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
      ArithOp op = cur_.kind == Tok::Star ? ArithOp::Mul : ArithOp::Div;
      advance();
      ExprPtr rhs = primary();
      lhs = make_expr(Arith{op, lhs, rhs}, {begin, prev_end_});
    }
    return lhs;
  }

  ExprPtr number_literal(bool negative, size_t begin) {
    Token t = cur_;
    advance();
    std::string text = (negative ? "-" : "") + t.text;
    auto n = Number::from_decimal(text);
    if (!n) fail("malformed number", t);
    bool is_float = t.text.find_first_of(".eE") != std::string::npos;
    return make_expr(Literal{*n, is_float}, {begin, prev_end_});
  }

  const std::string& resolve(const Token& name) {
    if (std::find(scope_.rbegin(), scope_.rend(), name.text) == scope_.rend())
      throw BindingError(BindingError::Kind::Unbound, name.text, name.span);
    return name.text;
  }

  ExprPtr primary() {
    size_t begin = cur_.span.begin;
    switch (cur_.kind) {
      case Tok::Number:
        return number_literal(false, begin);
      case Tok::Minus:
        if (ahead_.kind == Tok::Number && ahead_.span.begin == cur_.span.end) {
          advance();
          return number_literal(true, begin);
        }
        fail("unary minus applies only to numeric literals", cur_);
      case Tok::KwTrue:
        advance();
        return make_expr(Literal{true, false}, {begin, prev_end_});
      case Tok::KwFalse:
        advance();
        return make_expr(Literal{false, false}, {begin, prev_end_});
      case Tok::String: {
        std::string v = cur_.value;
        advance();
        return make_expr(Literal{v, false}, {begin, prev_end_});
      }
      case Tok::LParen: {
        advance();
        ExprPtr e = expr();
        expect(Tok::RParen, "expected ')'");
        return e;
      }
      case Tok::KwForall:
      case Tok::KwExists:
        return quantifier();
      case Tok::KwIf:
        return conditional();
      case Tok::Ident:
        return ident_expr();
      default:
        fail("expected an expression", cur_);
    }
  }

  ExprPtr quantifier() {
    size_t begin = cur_.span.begin;
    Quantifier q = cur_.kind == Tok::KwForall ? Quantifier::ForAll : Quantifier::Exists;
    advance();
    Token var = expect(Tok::Ident, "expected quantifier variable");
    if (is_reserved(var.text)) fail("reserved word used as variable name", var);
    if (std::find(scope_.begin(), scope_.end(), var.text) != scope_.end())
      throw BindingError(BindingError::Kind::Shadowing, var.text, var.span);
    expect(Tok::KwIn, "expected 'in' after quantifier variable");
    expect(Tok::LBrack, "expected '[' opening quantifier range");
    ExprPtr lo = expr();
    expect(Tok::Comma, "expected ',' in quantifier range");
    ExprPtr hi = expr();
    expect(Tok::RBrack, "expected ']' closing quantifier range");
    expect(Tok::Colon, "expected ':' before quantifier body");
    scope_.push_back(var.text);
    ExprPtr body = expr();
    scope_.pop_back();
    return make_expr(Quant{q, var.text, var.span, lo, hi, body}, {begin, prev_end_});
  }

  ExprPtr conditional() {
    size_t begin = cur_.span.begin;
    advance();
    ExprPtr c = expr();
    expect(Tok::KwThen, "expected 'then'");
    ExprPtr t = expr();
    ExprPtr e;
    if (accept(Tok::KwElse)) e = expr();
    return make_expr(IfThen{c, t, e}, {begin, prev_end_});
  }

  ExprPtr ident_expr() {
    Token id = cur_;
    size_t begin = id.span.begin;
    static const std::pair<const char*, TensorFn> kFns[] = {{"ndim", TensorFn::Ndim},
                                                            {"shape", TensorFn::Shape},
                                                            {"dtype_", TensorFn::Dtype},
                                                            {"min", TensorFn::Min},
                                                            {"max", TensorFn::Max}};
    for (const auto& [name, fn] : kFns) {
      if (id.text != name) continue;
      advance();
      expect(Tok::LParen, "expected '(' after tensor function");
      Token target = expect(Tok::Ident, "tensor function argument must be a variable");
      resolve(target);
      ExprPtr index;
      if (fn == TensorFn::Shape) {
        expect(Tok::Comma, "shape requires an index argument");
        index = expr();
      } else if (cur_.kind == Tok::Comma) {
        fail(std::string(name) + " takes exactly one argument", cur_);
      }
      expect(Tok::RParen, "expected ')' closing tensor function call");
      return make_expr(TensorCall{fn, target.text, target.span, index}, {begin, prev_end_});
    }
    if (is_reserved(id.text)) fail("reserved word used as an expression", id);
    advance();
    resolve(id);
    if (cur_.kind == Tok::LBrack) {
      advance();
      ExprPtr index = expr();
      expect(Tok::RBrack, "expected ']' closing index");
      return make_expr(TupleIndex{id.text, id.span, index}, {begin, prev_end_});
    }
    if (cur_.kind == Tok::Dot) {
      advance();
      Token len = expect(Tok::Ident, "expected 'len' after '.'");
      if (len.text != "len") fail("only '.len' is supported", len);
      return make_expr(TupleLen{id.text, id.span}, {begin, prev_end_});
    }
    return make_expr(VarRef{id.text}, {begin, prev_end_});
  }

  std::string_view src_;
  Lexer lex_;
  Token cur_, ahead_;
  size_t prev_end_ = 0;
  std::vector<std::string> scope_;
  std::vector<std::string> params_;
};

// ============================================================================
// Renderer
// ============================================================================

constexpr int kPrecOr = 1, kPrecAnd = 2, kPrecCmp = 3, kPrecAdd = 4, kPrecMul = 5, kPrecAtom = 6;

int precedence(const Expr& e) {
  if (auto* a = e.as<Arith>()) return (a->op == ArithOp::Add || a->op == ArithOp::Sub) ? kPrecAdd : kPrecMul;
  if (e.as<Cmp>()) return kPrecCmp;
  if (auto* l = e.as<Logic>()) return l->op == LogicOp::And ? kPrecAnd : kPrecOr;
  if (e.as<Quant>() || e.as<IfThen>()) return 0;
  return kPrecAtom;
}

std::string render_literal(const Literal& l) {
  if (auto* b = std::get_if<bool>(&l.value)) return *b ? "true" : "false";
  if (auto* s = std::get_if<std::string>(&l.value)) {
    std::string out = "\"";
    for (char c : *s) {
      if (c == '"' || c == '\\') out += '\\';
      if (c == '\n') {
        out += "\\n";
        continue;
      }
      out += c;
    }
    return out + "\"";
  }
  const Number& n = std::get<Number>(l.value);
  std::string s = n.to_string();
  if (l.float_syntax && s.find('.') == std::string::npos) s += ".0";
  return s;
}

void render(const ExprPtr& e, int min_prec, bool rightmost, std::string& out);

void render_child(const ExprPtr& e, int min_prec, bool rightmost, std::string& out) {
  int p = precedence(*e);
  bool parens = (p == 0) ? !rightmost : p < min_prec;
  if (parens) out += '(';
  render(e, min_prec, parens || rightmost, out);
  if (parens) out += ')';
}

void render(const ExprPtr& e, int, bool rightmost, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) {
          out += render_literal(n);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          out += n.name;
        } else if constexpr (std::is_same_v<T, TensorCall>) {
          out += tensor_fn_name(n.fn);
          out += '(';
          out += n.target;
          if (n.index) {
            out += ", ";
            render_child(n.index, 0, true, out);
          }
          out += ')';
        } else if constexpr (std::is_same_v<T, TupleIndex>) {
          out += n.target + "[";
          render_child(n.index, 0, true, out);
          out += ']';
        } else if constexpr (std::is_same_v<T, TupleLen>) {
          out += n.target + ".len";
        } else if constexpr (std::is_same_v<T, Arith>) {
          int p = precedence(*e);
          render_child(n.lhs, p, false, out);
          out += ' ';
          out += arith_op_text(n.op);
          out += ' ';
          render_child(n.rhs, p + 1, rightmost, out);
        } else if constexpr (std::is_same_v<T, Cmp>) {
          render_child(n.lhs, kPrecCmp + 1, false, out);
          out += ' ';
          out += cmp_op_text(n.op);
          out += ' ';
          render_child(n.rhs, kPrecCmp + 1, rightmost, out);
        } else if constexpr (std::is_same_v<T, Logic>) {
          int p = precedence(*e);
          render_child(n.lhs, p, false, out);
          out += n.op == LogicOp::And ? " and " : " or ";
          render_child(n.rhs, p + 1, rightmost, out);
        } else if constexpr (std::is_same_v<T, Quant>) {
          out += n.q == Quantifier::ForAll ? "forall " : "exists ";
          out += n.bound + " in [";
          render_child(n.lo, 0, true, out);
          out += ", ";
          render_child(n.hi, 0, true, out);
          out += "] : ";
          render_child(n.body, 0, true, out);
        } else if constexpr (std::is_same_v<T, IfThen>) {
          out += "if ";
          render_child(n.cond, 0, false, out);
          out += " then ";
          render_child(n.then_branch, 0, !n.else_branch, out);
          if (n.else_branch) {
            out += " else ";
            render_child(n.else_branch, 0, true, out);
          }
        }
      },
      e->node);
}

}  // namespace

Rule parse_rule(std::string_view text) {
  Parser p(text);
  return p.rule();
}

TypePtr parse_type(std::string_view text) {
  Parser p(text);
  return p.standalone_type();
}

std::string render_expr(const ExprPtr& e) {
  std::string out;
  render_child(e, 0, true, out);
  return out;
}

std::string render_rule(const Rule& rule) {
  std::string out = "{";
  for (size_t i = 0; i < rule.bindings.size(); ++i) {
    if (i) out += ", ";
    out += rule.bindings[i].name + ": " + rule.bindings[i].type->to_string();
  }
  out += "} |= ";
  out += render_expr(rule.body);
  return out;
}

}  // namespace tcfuzz::dsl
