#include "rqpd/qwhile_lex.hpp"

#include <cctype>

namespace rqpd::detail {

namespace {
bool ident_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum((unsigned char)c) || c == '_' || c == '\'' || c == '@';
}
}  // namespace

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto peek = [&](std::size_t k = 0) -> char {
    return (i + k < text.size()) ? text[i + k] : '\0';
  };
  auto advance = [&]() {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };
  auto scan_float = [&]() {
    std::string s;
    while (i < text.size() &&
           (std::isdigit((unsigned char)text[i]) || text[i] == '.' || text[i] == 'e' ||
            text[i] == 'E' ||
            ((text[i] == '+' || text[i] == '-') && i > 0 &&
             (text[i - 1] == 'e' || text[i - 1] == 'E')))) {
      s += text[i];
      advance();
    }
    return std::stod(s);
  };
  // after the real part, optionally absorb (+|-) float? 'i' into one token
  auto maybe_imag_tail = [&](double& re, double& im) {
    if (i < text.size() && text[i] == 'i') {
      advance();
      im = re;
      re = 0.0;
      return;
    }
    if (peek() != '+' && peek() != '-') return;
    std::size_t save_i = i;
    int save_line = line, save_col = col;
    char sign = text[i];
    advance();
    if (i < text.size() && (std::isdigit((unsigned char)text[i]) || text[i] == '.')) {
      double mag = scan_float();
      if (i < text.size() && text[i] == 'i') {
        advance();
        im = (sign == '-') ? -mag : mag;
        return;
      }
    } else if (i < text.size() && text[i] == 'i') {
      advance();
      im = (sign == '-') ? -1.0 : 1.0;
      return;
    }
    i = save_i;
    line = save_line;
    col = save_col;
  };

  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance();
      continue;
    }
    if (c == '#') {  // line comment
      while (i < text.size() && text[i] != '\n') advance();
      continue;
    }
    int tl = line, tc = col;
    if (ident_start(c)) {
      std::string s;
      while (i < text.size() && ident_char(text[i])) {
        s += text[i];
        advance();
      }
      out.push_back({TokKind::Ident, s, 0.0, 0.0, tl, tc});
      continue;
    }
    if (std::isdigit((unsigned char)c) || (c == '.' && std::isdigit((unsigned char)peek(1)))) {
      double re = scan_float(), im = 0.0;
      maybe_imag_tail(re, im);
      out.push_back({TokKind::Number, "", re, im, tl, tc});
      continue;
    }
    if (c == '-' && (std::isdigit((unsigned char)peek(1)) || peek(1) == '.' || peek(1) == 'i')) {
      // negative literal; the grammar has no binary minus so this is safe
      advance();
      double re, im = 0.0;
      if (text[i] == 'i') {
        advance();
        re = 0.0;
        im = -1.0;
      } else {
        re = -scan_float();
        maybe_imag_tail(re, im);
      }
      out.push_back({TokKind::Number, "", re, im, tl, tc});
      continue;
    }
    auto two = [&](char a, char b) { return c == a && peek(1) == b; };
    if (two(':', '=')) {
      advance();
      advance();
      out.push_back({TokKind::Assign, ":=", 0, 0, tl, tc});
      continue;
    }
    if (two('-', '>')) {
      advance();
      advance();
      out.push_back({TokKind::Arrow, "->", 0, 0, tl, tc});
      continue;
    }
    if (two('[', ']')) {
      advance();
      advance();
      out.push_back({TokKind::Box, "[]", 0, 0, tl, tc});
      continue;
    }
    if (two('|', '0') && peek(2) == '>') {
      advance();
      advance();
      advance();
      out.push_back({TokKind::KetZero, "|0>", 0, 0, tl, tc});
      continue;
    }
    TokKind k;
    switch (c) {
      case ';': k = TokKind::Semi; break;
      case ':': k = TokKind::Colon; break;
      case ',': k = TokKind::Comma; break;
      case '=': k = TokKind::Eq; break;
      case '[': k = TokKind::LBracket; break;
      case ']': k = TokKind::RBracket; break;
      case '{': k = TokKind::LBrace; break;
      case '}': k = TokKind::RBrace; break;
      case '(': k = TokKind::LParen; break;
      case ')': k = TokKind::RParen; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    advance();
    out.push_back({k, std::string(1, c), 0, 0, tl, tc});
  }
  out.push_back({TokKind::End, "", 0, 0, line, col});
  return out;
}

}  // namespace rqpd::detail
