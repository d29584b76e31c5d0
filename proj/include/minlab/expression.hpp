#pragma once

#include <memory>
#include <string>

#include "minlab/common.hpp"

namespace minlab {

// Scalar closed-form expression in the periodic coordinates u1, u2.
// Grammar: + - * / ^ (right associative), unary minus, parentheses,
// numeric literals, pi, and the usual single/double argument functions.
class Expression {
 public:
  struct Node;

  Expression() = default;

  static Expression parse(const std::string& text);

  double value(double u1, double u2 = 0.0) const;
  const std::string& text() const { return text_; }
  bool empty() const { return node_ == nullptr; }

 private:
  std::shared_ptr<const Node> node_;
  std::string text_;
};

}  // namespace minlab
