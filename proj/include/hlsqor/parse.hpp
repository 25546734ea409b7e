// Recursive-descent parser for the kernel DSL.
//
//   kernel   := "kernel" IDENT "{" array* dep* loop+ "}"
//   array    := "array" IDENT ("[" INT "]")+ ":" ("i32"|"f32") ("ports" INT)? ";"
//   dep      := "dep" IDENT "->" IDENT "delay" INT "distance" INT ";"
//   loop     := "loop" IDENT "in" "0" ".." INT "{" (stmt|loop)+ "}"
//   stmt     := IDENT "=" OPTYPE operand ("," operand)* ";"
//   operand  := IDENT | IDENT ("[" index "]")+
//   index    := affine-expr | "dyn"
#pragma once

#include <cctype>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hlsqor/ir.hpp"

namespace hlsqor {

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(int line_, int col_, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                           std::to_string(col_) + ": " + msg),
        line(line_),
        column(col_) {}
};

namespace detail {

struct Token {
  enum Kind { Ident, Int, Punct, End } kind = End;
  std::string text;
  long value = 0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::End;
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        bump();
      tok_.kind = Token::Ident;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        bump();
      tok_.kind = Token::Int;
      tok_.text = src_.substr(start, pos_ - start);
      tok_.value = std::stol(tok_.text);
      return;
    }
    // Multi-char punctuation: "..", "->".
    if (c == '.' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '.') {
      tok_.kind = Token::Punct;
      tok_.text = "..";
      bump();
      bump();
      return;
    }
    if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
      tok_.kind = Token::Punct;
      tok_.text = "->";
      bump();
      bump();
      return;
    }
    tok_.kind = Token::Punct;
    tok_.text = std::string(1, c);
    bump();
  }

  void skip_ws() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
        bump();
      // Line comments: "#" or "//".
      if (pos_ < src_.size() &&
          (src_[pos_] == '#' ||
           (src_[pos_] == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/'))) {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
        continue;
      }
      break;
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  KernelSpec parse() {
    KernelSpec spec;
    expect_ident("kernel");
    spec.name = expect(Token::Ident).text;
    expect_punct("{");
    while (peek_ident("array")) parse_array(spec);
    while (peek_ident("dep")) parse_dep(spec);
    while (peek_ident("loop")) spec.root_loops.push_back(parse_loop());
    expect_punct("}");
    if (lex_.peek().kind != Token::End)
      fail("trailing input after kernel body");
    if (spec.root_loops.empty()) fail("kernel has no loops");
    validate(spec);
    return spec;
  }

 private:
  void parse_array(KernelSpec& spec) {
    expect_ident("array");
    ArraySpec a;
    auto t = expect(Token::Ident);
    a.id = t.text;
    if (spec.find_array(a.id)) fail_at(t, "duplicate array '" + a.id + "'");
    while (peek_punct("[")) {
      expect_punct("[");
      a.dims.push_back(expect(Token::Int).value);
      expect_punct("]");
    }
    if (a.dims.empty()) fail("array needs at least one dimension");
    for (long d : a.dims)
      if (d < 1) fail("array dimension must be >= 1");
    expect_punct(":");
    auto ty = expect(Token::Ident);
    if (ty.text != "i32" && ty.text != "f32")
      fail_at(ty, "element type must be i32 or f32");
    a.element_type = ty.text;
    if (peek_ident("ports")) {
      expect_ident("ports");
      a.base_ports = expect(Token::Int).value;
      if (a.base_ports < 1) fail("ports must be >= 1");
    }
    expect_punct(";");
    spec.arrays.push_back(std::move(a));
  }

  void parse_dep(KernelSpec& spec) {
    expect_ident("dep");
    DependenceSpec d;
    d.src = expect(Token::Ident).text;
    expect_punct("->");
    d.dst = expect(Token::Ident).text;
    expect_ident("delay");
    d.delay = expect(Token::Int).value;
    expect_ident("distance");
    d.distance = expect(Token::Int).value;
    if (d.delay < 1) fail("dependence delay must be >= 1");
    if (d.distance < 1) fail("dependence distance must be >= 1");
    expect_punct(";");
    spec.deps.push_back(std::move(d));
  }

  LoopSpec parse_loop() {
    expect_ident("loop");
    LoopSpec l;
    l.id = expect(Token::Ident).text;
    expect_ident("in");
    auto lo = expect(Token::Int);
    if (lo.value != 0) fail_at(lo, "loop lower bound must be 0");
    expect_punct("..");
    auto tc = expect(Token::Int);
    l.tripcount = tc.value;
    if (l.tripcount < 1) fail_at(tc, "tripcount must be >= 1");
    expect_punct("{");
    while (!peek_punct("}")) {
      if (peek_ident("loop")) {
        l.item_order.emplace_back(true, l.children.size());
        l.children.push_back(parse_loop());
      } else {
        l.item_order.emplace_back(false, l.body.size());
        l.body.push_back(parse_stmt());
      }
    }
    expect_punct("}");
    return l;
  }

  Statement parse_stmt() {
    Statement st;
    st.id = expect(Token::Ident).text;
    expect_punct("=");
    auto op = expect(Token::Ident);
    auto ot = op_type_from_name(op.text);
    if (!ot || *ot == OpType::MemPort || *ot == OpType::SuperNode ||
        *ot == OpType::Phi || *ot == OpType::Br)
      fail_at(op, "unknown optype '" + op.text + "'");
    st.optype = *ot;
    for (;;) {
      auto t = expect(Token::Ident);
      if (peek_punct("[")) {
        if (st.access) fail_at(t, "statement has more than one array access");
        AccessExpr acc;
        acc.array = t.text;
        while (peek_punct("[")) {
          expect_punct("[");
          acc.indices.push_back(parse_index());
          expect_punct("]");
        }
        st.access = std::move(acc);
      } else {
        st.operands.push_back(t.text);
      }
      if (!peek_punct(",")) break;
      expect_punct(",");
    }
    expect_punct(";");
    if (is_memory_op(st.optype) && !st.access)
      fail("load/store must carry an array access");
    if (!is_memory_op(st.optype) && st.access)
      fail("only load/store may carry an array access");
    return st;
  }

  // affine-expr := term ("+" term | "-" term)* ; term := INT | INT "*" IDENT | IDENT
  AffineIndex parse_index() {
    AffineIndex ix;
    if (peek_ident("dyn")) {
      expect_ident("dyn");
      ix.dynamic = true;
      return ix;
    }
    long sign = 1;
    for (;;) {
      if (lex_.peek().kind == Token::Int) {
        long v = expect(Token::Int).value;
        if (peek_punct("*")) {
          expect_punct("*");
          auto var = expect(Token::Ident);
          ix.coeffs[var.text] += sign * v;
        } else {
          ix.constant += sign * v;
        }
      } else {
        auto var = expect(Token::Ident);
        ix.coeffs[var.text] += sign;
      }
      if (peek_punct("+")) {
        expect_punct("+");
        sign = 1;
      } else if (peek_punct("-")) {
        expect_punct("-");
        sign = -1;
      } else {
        break;
      }
    }
    return ix;
  }

  // Semantic checks: unique ids, declared references, dimensionality,
  // definition-before-use (which keeps operand references acyclic).
  void validate(const KernelSpec& spec) {
    std::set<std::string> loop_ids, stmt_ids;
    std::set<std::string> defined;  // statement ids seen so far, program order
    for (auto& a : spec.arrays)
      if (loop_ids.count(a.id)) fail("duplicate id '" + a.id + "'");
    std::vector<std::string> scope;
    for (auto& l : spec.root_loops) validate_loop(spec, l, loop_ids, stmt_ids, defined, scope);
    for (auto& d : spec.deps) {
      if (!stmt_ids.count(d.src)) fail("dep references undeclared statement '" + d.src + "'");
      if (!stmt_ids.count(d.dst)) fail("dep references undeclared statement '" + d.dst + "'");
    }
  }

  void validate_loop(const KernelSpec& spec, const LoopSpec& l,
                     std::set<std::string>& loop_ids, std::set<std::string>& stmt_ids,
                     std::set<std::string>& defined, std::vector<std::string>& scope) {
    if (!loop_ids.insert(l.id).second) fail("duplicate loop id '" + l.id + "'");
    if (spec.find_array(l.id)) fail("loop id '" + l.id + "' collides with an array");
    scope.push_back(l.id);
    for (auto& [is_loop, idx] : l.item_order) {
      if (is_loop) {
        validate_loop(spec, l.children[idx], loop_ids, stmt_ids, defined, scope);
        continue;
      }
      auto& st = l.body[idx];
      if (!stmt_ids.insert(st.id).second) fail("duplicate statement id '" + st.id + "'");
      for (auto& op : st.operands) {
        bool is_loop_var = std::find(scope.begin(), scope.end(), op) != scope.end();
        if (!is_loop_var && !defined.count(op))
          fail("undeclared identifier '" + op + "' in statement '" + st.id + "'");
      }
      if (st.access) {
        auto* a = spec.find_array(st.access->array);
        if (!a) fail("access to undeclared array '" + st.access->array + "'");
        if (st.access->indices.size() != a->dims.size())
          fail("dimension mismatch: array '" + a->id + "' has " +
               std::to_string(a->dims.size()) + " dims, access has " +
               std::to_string(st.access->indices.size()));
        for (auto& ix : st.access->indices)
          for (auto& [var, c] : ix.coeffs)
            if (std::find(scope.begin(), scope.end(), var) == scope.end())
              fail("index references undeclared loop variable '" + var + "'");
      }
      defined.insert(st.id);
    }
    scope.pop_back();
  }

  Token expect(Token::Kind k) {
    auto t = lex_.next();
    if (t.kind != k) fail_at(t, "unexpected '" + describe(t) + "'");
    return t;
  }

  void expect_ident(const std::string& kw) {
    auto t = lex_.next();
    if (t.kind != Token::Ident || t.text != kw)
      fail_at(t, "expected '" + kw + "', got '" + describe(t) + "'");
  }

  void expect_punct(const std::string& p) {
    auto t = lex_.next();
    if (t.kind != Token::Punct || t.text != p)
      fail_at(t, "expected '" + p + "', got '" + describe(t) + "'");
  }

  bool peek_ident(const std::string& kw) const {
    return lex_.peek().kind == Token::Ident && lex_.peek().text == kw;
  }
  bool peek_punct(const std::string& p) const {
    return lex_.peek().kind == Token::Punct && lex_.peek().text == p;
  }

  static std::string describe(const Token& t) {
    return t.kind == Token::End ? "<eof>" : t.text;
  }

  [[noreturn]] void fail(const std::string& msg) { fail_at(lex_.peek(), msg); }
  [[noreturn]] static void fail_at(const Token& t, const std::string& msg) {
    throw ParseError(t.line, t.col, msg);
  }

  Lexer lex_;
};

}  // namespace detail

inline KernelSpec parse_kernel(const std::string& text) {
  return detail::Parser(text).parse();
}

}  // namespace hlsqor
