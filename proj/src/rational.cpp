// SPDX-License-Identifier: Apache-2.0
#include "pbound/rational.hpp"

#include <cctype>

namespace pbound {

std::optional<Rat> parse_rat(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::string s = text;
  bool neg = false;
  size_t i = 0;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  std::string intpart, fracpart, denpart;
  std::string* cur = &intpart;
  bool slash = false, dot = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '/' && !slash && !dot) {
      slash = true;
      cur = &denpart;
    } else if (c == '.' && !slash && !dot) {
      dot = true;
      cur = &fracpart;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      cur->push_back(c);
    } else {
      return std::nullopt;
    }
  }
  if (intpart.empty() && fracpart.empty()) return std::nullopt;
  Rat r;
  if (slash) {
    if (denpart.empty() || intpart.empty()) return std::nullopt;
    Int num(intpart), den(denpart);
    if (den == 0) return std::nullopt;
    r = Rat(num) / Rat(den);
  } else if (dot) {
    Int num(intpart.empty() ? "0" : intpart);
    Int scale = 1;
    for (char c : fracpart) {
      num = num * 10 + (c - '0');
      scale *= 10;
    }
    r = Rat(num) / Rat(scale);
  } else {
    r = Rat(Int(intpart));
  }
  r.canonicalize();
  if (neg) r = -r;
  return r;
}

std::string rat_to_string(const Rat& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::string rat_to_decimal(const Rat& r, int sig) {
  if (r == 0) return "0";
  Rat a = abs(r);
  // Find exponent e with 10^(e-1) <= a < 10^e, then round a * 10^(sig-e).
  int e = 0;
  Rat t = a;
  while (t >= 1) {
    t /= 10;
    ++e;
  }
  while (t < Rat(1, 10)) {
    t *= 10;
    --e;
  }
  Int pow10 = 1;
  int shift = sig - e;
  Rat scaled = a;
  if (shift >= 0) {
    for (int i = 0; i < shift; ++i) pow10 *= 10;
    scaled = a * Rat(pow10);
  } else {
    for (int i = 0; i < -shift; ++i) pow10 *= 10;
    scaled = a / Rat(pow10);
  }
  // Round half away from zero.
  Int digits = (scaled.get_num() * 2 + scaled.get_den()) / (scaled.get_den() * 2);
  std::string d = digits.get_str();
  // Rounding may bump the digit count (e.g. 999995 -> 1000000).
  if ((int)d.size() > sig) {
    e += (int)d.size() - sig;
    d = d.substr(0, sig);
  }
  std::string out;
  if (e <= 0) {
    out = "0.";
    out.append(-e, '0');
    out += d;
  } else if (e >= (int)d.size()) {
    out = d;
    out.append(e - d.size(), '0');
  } else {
    out = d.substr(0, e) + "." + d.substr(e);
  }
  if (out.find('.') != std::string::npos) {
    while (out.back() == '0') out.pop_back();
    if (out.back() == '.') out.pop_back();
  }
  return (sgn(r) < 0 ? "-" : "") + out;
}

}  // namespace pbound
