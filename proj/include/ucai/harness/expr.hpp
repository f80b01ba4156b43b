// Tiny expression language for the digit printer, e.g.
//   add(1/3, neg(1/5))   max(1/8, [+0-], avg(1, -1))   mul(0.5, abs(-3/4))
// Literals are rationals in [-1, 1] or bracketed signed digits [+0-].
#pragma once

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucai/exact_stream.hpp"
#include "ucai/harness/text.hpp"

namespace ucai::harness {

class ExprParser {
 public:
  explicit ExprParser(std::string text) : s_(std::move(text)) {}

  DigitStream parse() {
    DigitStream v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression: " + what + " at offset " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  DigitStream expr() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (s_[pos_] == '[') {
      const auto end = s_.find(']', pos_);
      if (end == std::string::npos) fail("unterminated digit list");
      const std::string digits = s_.substr(pos_ + 1, end - pos_ - 1);
      pos_ = end + 1;
      return from_signed_string(digits);
    }
    if (std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (!eat('(')) fail("expected '(' after " + name);
      std::vector<DigitStream> args{expr()};
      while (eat(',')) args.push_back(expr());
      if (!eat(')')) fail("expected ')'");
      return apply(name, args);
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '/' ||
                                s_[pos_] == '.' || s_[pos_] == '-' || s_[pos_] == '+'))
      ++pos_;
    if (start == pos_) fail("expected a literal");
    const Rational v = detail::parse_rational(s_.substr(start, pos_ - start));
    if (v > 1 || v < -1) fail("literal outside [-1, 1]");
    return from_rational(v);
  }

  DigitStream apply(const std::string& name, std::vector<DigitStream>& args) {
    auto arity = [&](std::size_t n) {
      if (args.size() != n) fail(name + " takes " + std::to_string(n) + " argument(s)");
    };
    if (name == "neg") return arity(1), negate(args[0]);
    if (name == "abs") return arity(1), abs(args[0]);
    if (name == "double") return arity(1), double_value(args[0]);
    if (name == "avg") return arity(2), average(args[0], args[1]);
    if (name == "add") return arity(2), add(args[0], args[1]);
    if (name == "mul") return arity(2), multiply(args[0], args[1]);
    if (name == "max") return max_set(args);
    fail("unknown operation '" + name + "'");
  }

  std::string s_;
  std::size_t pos_ = 0;
};

inline DigitStream parse_expression(const std::string& text) { return ExprParser(text).parse(); }

}  // namespace ucai::harness
