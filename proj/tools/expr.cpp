#include "expr.hpp"

#include <cctype>
#include <cmath>
#include <set>

#include "hwml/error.hpp"
#include "hwml/kvtext.hpp"

namespace hwml::cli {

class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, Expression& out) : text_(text), out_(out) {}

  int parse() {
    const int root = sum();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return root;
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + std::string(text_) + "': " + what);
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int add(Expression::Node n) {
    out_.nodes_.push_back(std::move(n));
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int binary(Op op, int lhs, int rhs) { return add({op, 0.0, {}, lhs, rhs}); }

  int sum() {
    int lhs = product();
    while (true) {
      if (accept('+')) lhs = binary(Op::Add, lhs, product());
      else if (accept('-')) lhs = binary(Op::Sub, lhs, product());
      else return lhs;
    }
  }

  int product() {
    int lhs = unary();
    while (true) {
      if (accept('*')) lhs = binary(Op::Mul, lhs, unary());
      else if (accept('/')) lhs = binary(Op::Div, lhs, unary());
      else return lhs;
    }
  }

  int unary() {
    if (accept('-')) return add({Op::Neg, 0.0, {}, unary(), -1});
    if (accept('+')) return unary();
    return power();
  }

  int power() {
    const int base = atom();
    if (accept('^')) return binary(Op::Pow, base, unary());
    return base;
  }

  int atom() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end");
    if (accept('(')) {
      const int inner = sum();
      if (!accept(')')) fail("missing ')'");
      return inner;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
        ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
      try {
        return add({Op::Number, parse_double(text_.substr(start, pos_ - start)), {}, -1, -1});
      } catch (const ConfigError&) {
        fail("bad number '" + std::string(text_.substr(start, pos_ - start)) + "'");
      }
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      return add({Op::Variable, 0.0, std::string(text_.substr(start, pos_ - start)), -1, -1});
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  Expression& out_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.text_ = trim(text);
  if (e.text_.empty()) throw ConfigError("empty expression");
  ExpressionParser parser(e.text_, e);
  e.root_ = parser.parse();
  return e;
}

double Expression::evaluate(const std::map<std::string, double>& variables) const { return eval(root_, variables); }

double Expression::eval(int node, const std::map<std::string, double>& variables) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  switch (n.op) {
    case Op::Number: return n.number;
    case Op::Variable: {
      const auto it = variables.find(n.name);
      if (it == variables.end()) throw ConfigError("unknown variable '" + n.name + "' in '" + text_ + "'");
      return it->second;
    }
    case Op::Neg: return -eval(n.lhs, variables);
    case Op::Add: return eval(n.lhs, variables) + eval(n.rhs, variables);
    case Op::Sub: return eval(n.lhs, variables) - eval(n.rhs, variables);
    case Op::Mul: return eval(n.lhs, variables) * eval(n.rhs, variables);
    case Op::Div: return eval(n.lhs, variables) / eval(n.rhs, variables);
    case Op::Pow: return std::pow(eval(n.lhs, variables), eval(n.rhs, variables));
  }
  return 0.0;
}

std::vector<std::string> Expression::variables() const {
  std::set<std::string> names;
  for (const auto& n : nodes_)
    if (n.op == Op::Variable) names.insert(n.name);
  return {names.begin(), names.end()};
}

}  // namespace hwml::cli
