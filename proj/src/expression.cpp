#include "minlab/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

namespace minlab {

namespace {

enum class TokKind { number, ident, op, end };

struct Token {
  TokKind kind;
  double number = 0.0;
  std::string text;
  std::size_t pos = 0;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      const char* begin = s.c_str() + i;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) throw input_error("expression: bad number at position " + std::to_string(i));
      out.push_back({TokKind::number, v, s.substr(i, end - begin), i});
      i += static_cast<std::size_t>(end - begin);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
        ++j;
      out.push_back({TokKind::ident, 0.0, s.substr(i, j - i), i});
      i = j;
      continue;
    }
    if (std::string("+-*/^(),").find(c) != std::string::npos) {
      out.push_back({TokKind::op, 0.0, std::string(1, c), i});
      ++i;
      continue;
    }
    throw input_error(std::string("expression: unexpected character '") + c +
                      "' at position " + std::to_string(i));
  }
  out.push_back({TokKind::end, 0.0, "", s.size()});
  return out;
}

}  // namespace

struct Expression::Node {
  enum class Op { constant, var_u1, var_u2, add, sub, mul, div, pow, neg, call1, call2 };

  Op op = Op::constant;
  double number = 0.0;
  double (*fn1)(double) = nullptr;
  double (*fn2)(double, double) = nullptr;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;

  double eval(double u1, double u2) const {
    switch (op) {
      case Op::constant: return number;
      case Op::var_u1: return u1;
      case Op::var_u2: return u2;
      case Op::add: return a->eval(u1, u2) + b->eval(u1, u2);
      case Op::sub: return a->eval(u1, u2) - b->eval(u1, u2);
      case Op::mul: return a->eval(u1, u2) * b->eval(u1, u2);
      case Op::div: return a->eval(u1, u2) / b->eval(u1, u2);
      case Op::pow: return std::pow(a->eval(u1, u2), b->eval(u1, u2));
      case Op::neg: return -a->eval(u1, u2);
      case Op::call1: return fn1(a->eval(u1, u2));
      case Op::call2: return fn2(a->eval(u1, u2), b->eval(u1, u2));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

struct Fn1Entry {
  const char* name;
  double (*fn)(double);
};
struct Fn2Entry {
  const char* name;
  double (*fn)(double, double);
};

constexpr Fn1Entry kFn1[] = {
    {"sin", [](double x) { return std::sin(x); }},
    {"cos", [](double x) { return std::cos(x); }},
    {"tan", [](double x) { return std::tan(x); }},
    {"asin", [](double x) { return std::asin(x); }},
    {"acos", [](double x) { return std::acos(x); }},
    {"atan", [](double x) { return std::atan(x); }},
    {"sinh", [](double x) { return std::sinh(x); }},
    {"cosh", [](double x) { return std::cosh(x); }},
    {"tanh", [](double x) { return std::tanh(x); }},
    {"exp", [](double x) { return std::exp(x); }},
    {"log", [](double x) { return std::log(x); }},
    {"sqrt", [](double x) { return std::sqrt(x); }},
    {"abs", [](double x) { return std::fabs(x); }},
};
constexpr Fn2Entry kFn2[] = {
    {"pow", [](double x, double y) { return std::pow(x, y); }},
    {"atan2", [](double y, double x) { return std::atan2(y, x); }},
};

class Parser {
 public:
  explicit Parser(const std::string& text) : tokens_(tokenize(text)) {}

  NodePtr parse() {
    NodePtr e = expr();
    if (peek().kind != TokKind::end)
      throw input_error("expression: trailing input at position " +
                        std::to_string(peek().pos) + " near '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek() const { return tokens_[cursor_]; }
  Token take() { return tokens_[cursor_++]; }

  bool take_op(const char* t) {
    if (peek().kind == TokKind::op && peek().text == t) {
      ++cursor_;
      return true;
    }
    return false;
  }

  void expect_op(const char* t) {
    if (!take_op(t))
      throw input_error(std::string("expression: expected '") + t + "' at position " +
                        std::to_string(peek().pos));
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (take_op("+")) {
        Node n;
        n.op = Node::Op::add;
        n.a = lhs;
        n.b = term();
        lhs = make_node(std::move(n));
      } else if (take_op("-")) {
        Node n;
        n.op = Node::Op::sub;
        n.a = lhs;
        n.b = term();
        lhs = make_node(std::move(n));
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (take_op("*")) {
        Node n;
        n.op = Node::Op::mul;
        n.a = lhs;
        n.b = factor();
        lhs = make_node(std::move(n));
      } else if (take_op("/")) {
        Node n;
        n.op = Node::Op::div;
        n.a = lhs;
        n.b = factor();
        lhs = make_node(std::move(n));
      } else {
        return lhs;
      }
    }
  }

  NodePtr factor() {
    if (take_op("-")) {
      Node n;
      n.op = Node::Op::neg;
      n.a = factor();
      return make_node(std::move(n));
    }
    if (take_op("+")) return factor();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (take_op("^")) {
      Node n;
      n.op = Node::Op::pow;
      n.a = base;
      n.b = factor();
      return make_node(std::move(n));
    }
    return base;
  }

  NodePtr atom() {
    const Token& t = peek();
    if (t.kind == TokKind::number) {
      Node n;
      n.number = take().number;
      return make_node(std::move(n));
    }
    if (t.kind == TokKind::ident) {
      Token id = take();
      if (take_op("(")) return call(id);
      if (id.text == "pi") {
        Node n;
        n.number = kPi;
        return make_node(std::move(n));
      }
      if (id.text == "u1") {
        Node n;
        n.op = Node::Op::var_u1;
        return make_node(std::move(n));
      }
      if (id.text == "u2") {
        Node n;
        n.op = Node::Op::var_u2;
        return make_node(std::move(n));
      }
      throw input_error("expression: unknown identifier '" + id.text + "' at position " +
                        std::to_string(id.pos));
    }
    if (take_op("(")) {
      NodePtr e = expr();
      expect_op(")");
      return e;
    }
    throw input_error("expression: unexpected token '" + t.text + "' at position " +
                      std::to_string(t.pos));
  }

  NodePtr call(const Token& id) {
    std::vector<NodePtr> args;
    args.push_back(expr());
    while (take_op(",")) args.push_back(expr());
    expect_op(")");
    for (const auto& f : kFn1) {
      if (id.text == f.name) {
        if (args.size() != 1)
          throw input_error("expression: " + id.text + " takes one argument");
        Node n;
        n.op = Node::Op::call1;
        n.fn1 = f.fn;
        n.a = args[0];
        return make_node(std::move(n));
      }
    }
    for (const auto& f : kFn2) {
      if (id.text == f.name) {
        if (args.size() != 2)
          throw input_error("expression: " + id.text + " takes two arguments");
        Node n;
        n.op = Node::Op::call2;
        n.fn2 = f.fn;
        n.a = args[0];
        n.b = args[1];
        return make_node(std::move(n));
      }
    }
    throw input_error("expression: unknown function '" + id.text + "' at position " +
                      std::to_string(id.pos));
  }

  std::vector<Token> tokens_;
  std::size_t cursor_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.node_ = Parser(text).parse();
  e.text_ = text;
  return e;
}

double Expression::value(double u1, double u2) const {
  if (!node_) throw input_error("expression: evaluating an empty expression");
  return node_->eval(u1, u2);
}

}  // namespace minlab
