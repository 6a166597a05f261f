#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hwml::cli {

// Arithmetic over named variables: + - * / ^, unary minus, parentheses,
// decimal literals with exponents. `^` binds tightest and is right
// associative.
class Expression {
 public:
  static Expression parse(std::string_view text);

  double evaluate(const std::map<std::string, double>& variables) const;
  std::vector<std::string> variables() const;
  const std::string& text() const noexcept { return text_; }

 private:
  enum class Op { Number, Variable, Neg, Add, Sub, Mul, Div, Pow };
  struct Node {
    Op op = Op::Number;
    double number = 0.0;
    std::string name;
    int lhs = -1;
    int rhs = -1;
  };
  friend class ExpressionParser;

  double eval(int node, const std::map<std::string, double>& variables) const;

  std::string text_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace hwml::cli
