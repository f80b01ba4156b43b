// Small parsing and formatting helpers shared by the harness.
#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucai/env_model.hpp"

namespace ucai::harness {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back({});
  return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto& item : split(s, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline std::string rational_str(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

inline Rational parse_rational(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw std::invalid_argument("empty number");
  auto parse_int = [](const std::string& t) {
    if (t.empty() || t.find_first_not_of("+-0123456789") != std::string::npos || t.find_first_of("0123456789") == std::string::npos)
      throw std::invalid_argument("not a number: '" + t + "'");
    return BigInt(t[0] == '+' ? t.substr(1) : t);
  };
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    const BigInt den = parse_int(s.substr(slash + 1));
    if (den <= 0) throw std::invalid_argument("denominator must be positive");
    return Rational(parse_int(s.substr(0, slash)), den);
  }
  const auto dot = s.find('.');
  if (dot != std::string::npos) {
    const std::string frac = s.substr(dot + 1);
    std::string whole = s.substr(0, dot);
    const bool negative = !whole.empty() && whole[0] == '-';
    if (whole.empty() || whole == "-" || whole == "+") whole += "0";
    const BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
    const BigInt w = parse_int(whole);
    const BigInt f = frac.empty() ? BigInt(0) : parse_int(frac);
    return Rational(negative ? BigInt(w * scale - f) : BigInt(w * scale + f), scale);
  }
  return Rational(parse_int(s));
}

/// "2^-k", "p/2^k" or any rational whose denominator is a power of two.
inline Dyadic parse_dyadic(const std::string& text) {
  const std::string s = trim(text);
  if (s.rfind("2^-", 0) == 0) return {1, std::stoul(s.substr(3))};
  const auto pow_pos = s.find("/2^");
  if (pow_pos != std::string::npos) return {BigInt(s.substr(0, pow_pos)), std::stoul(s.substr(pow_pos + 3))};
  const Rational r = parse_rational(s);
  BigInt den = boost::multiprecision::denominator(r);
  std::size_t e = 0;
  while (den % 2 == 0) {
    den /= 2;
    ++e;
  }
  if (den != 1) throw std::invalid_argument("not a dyadic rational: '" + s + "'");
  return {boost::multiprecision::numerator(r), e};
}

inline std::uint64_t parse_u64(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("expected a non-negative integer, got '" + s + "'");
  std::size_t used = 0;
  const auto v = std::stoull(s, &used, 10);
  if (used != s.size()) throw std::invalid_argument("bad integer '" + s + "'");
  return v;
}

template <class T>
std::size_t index_of(const std::vector<T>& v, const T& x, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] == x) return i;
  throw std::invalid_argument(std::string("unknown ") + what);
}

inline std::size_t reward_index(const Alphabet& a, const std::string& text) {
  return index_of(a.rewards, parse_rational(text), "reward");
}

}  // namespace detail

}  // namespace ucai::harness
