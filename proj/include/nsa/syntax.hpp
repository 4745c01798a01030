#pragma once

#include <string>
#include <vector>

#include "nsa/kernel.hpp"

namespace nsa {

// Parenthesised prefix syntax shared by terms and formulas.
struct SExpr {
    bool atom = true;
    std::string text;
    std::vector<SExpr> items;
    int line = 1;
};

// ';' starts a comment; ':' is always a token of its own.
std::vector<SExpr> read_sexprs(const std::string& text);
std::string show_sexpr(const SExpr& e);

bool is_identifier(const std::string& s);

TypeP parse_type(const SExpr& e);
// `bound` lists the names of enclosing binders, innermost last.
TermP parse_term(const SExpr& e, std::vector<std::string>& bound);

TypeP parse_type(const std::string& text);
TermP parse_term(const std::string& text);

[[noreturn]] void parse_fail(const SExpr& at, const std::string& msg);

}  // namespace nsa
