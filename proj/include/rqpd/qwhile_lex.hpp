#ifndef RQPD_QWHILE_LEX_HPP
#define RQPD_QWHILE_LEX_HPP

#include <string>
#include <vector>

#include "rqpd/qwhile.hpp"

namespace rqpd::detail {

enum class TokKind {
  Ident,
  Number,  // complex literal a+bi, one token
  Assign,  // :=
  Arrow,   // ->
  Box,     // []
  KetZero, // |0>
  Semi,
  Colon,
  Comma,
  Eq,
  LBracket,
  RBracket,
  LBrace,
  RBrace,
  LParen,
  RParen,
  End,
};

struct Token {
  TokKind kind;
  std::string text;
  double re = 0.0, im = 0.0;
  int line = 0, col = 0;
};

std::vector<Token> lex(const std::string& text);

}  // namespace rqpd::detail

#endif
