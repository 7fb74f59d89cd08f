#pragma once

#include <cctype>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dtc/error.hpp"
#include "dtc/format.hpp"

namespace dtc {

// Parser and interpreter for the C subset produced by emit_c: one function
// of nested if/else blocks with linear conditions, constant assignments to
// result[k] and an optional integer return.
class CProgram {
public:
  struct Term {
    double coefficient = 1.0;
    bool has_coefficient = false;
    std::size_t index = 0;
  };
  struct Condition {
    std::vector<Term> terms;  // empty: constant 0.0
    double rhs = 0.0;
  };
  struct Block;
  struct If {
    Condition condition;
    std::unique_ptr<Block> then_block, else_block;
  };
  struct Assign {
    std::size_t index = 0;
    float value = 0.0f;
  };
  struct Return {
    int value = 0;
  };
  using Statement = std::variant<If, Assign, Return>;
  struct Block {
    std::vector<Statement> statements;
  };

  struct Outcome {
    std::vector<std::optional<float>> result;
    std::optional<int> returned;
  };

  static CProgram parse(std::string_view source) {
    CProgram p;
    Lexer lex{tokenize(source)};
    std::string ret = lex.take_word();
    if (ret != "void" && ret != "int") throw Error("C: expected return type");
    p.returns_count_ = ret == "int";
    for (const char* t : {"controller", "(", "const", "double", "*", "x", ",", "float", "*", "result", ")"}) lex.expect(t);
    p.body_ = parse_block(lex);
    if (!lex.done()) throw Error("C: trailing tokens after function body");
    return p;
  }

  bool returns_count() const { return returns_count_; }

  Outcome run(std::span<const double> x) const {
    Outcome out;
    const Block* block = &body_;
    while (block) {
      const Block* next = nullptr;
      for (const auto& st : block->statements) {
        if (auto* a = std::get_if<Assign>(&st)) {
          if (out.result.size() <= a->index) out.result.resize(a->index + 1);
          out.result[a->index] = a->value;
        } else if (auto* r = std::get_if<Return>(&st)) {
          out.returned = r->value;
          return out;
        } else {
          const auto& i = std::get<If>(st);
          next = holds(i.condition, x) ? i.then_block.get() : i.else_block.get();
          break;
        }
      }
      block = next;
    }
    return out;
  }

private:
  struct Lexer {
    std::vector<std::string> tokens;
    std::size_t pos = 0;

    bool done() const { return pos == tokens.size(); }
    const std::string& peek() const {
      if (done()) throw Error("C: unexpected end of input");
      return tokens[pos];
    }
    std::string take_word() {
      std::string t = peek();
      ++pos;
      return t;
    }
    void expect(std::string_view t) {
      if (peek() != t) throw Error("C: expected '" + std::string(t) + "', found '" + peek() + "'");
      ++pos;
    }
    double take_number(bool allow_float_suffix) {
      std::string t = take_word();
      if (allow_float_suffix && !t.empty() && t.back() == 'f') t.pop_back();
      auto v = parse_number(t);
      if (!v) throw Error("C: bad number '" + t + "'");
      return *v;
    }
    std::size_t take_index() {
      expect("[");
      std::size_t v = static_cast<std::size_t>(take_number(false));
      expect("]");
      return v;
    }
  };

  static std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    auto number_start = [&](std::size_t k) {
      return k < s.size() && (std::isdigit(static_cast<unsigned char>(s[k])) || s[k] == '.');
    };
    while (i < s.size()) {
      char c = s[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
        while (i < s.size() && s[i] != '\n') ++i;
      } else if (c == '<' && i + 1 < s.size() && s[i + 1] == '=') {
        out.emplace_back("<=");
        i += 2;
      } else if (number_start(i) || (c == '-' && number_start(i + 1))) {
        std::size_t j = i + 1;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '.' ||
                                ((s[j] == '-' || s[j] == '+') && (s[j - 1] == 'e' || s[j - 1] == 'E'))))
          ++j;
        out.emplace_back(s.substr(i, j - i));
        i = j;
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i + 1;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
        out.emplace_back(s.substr(i, j - i));
        i = j;
      } else {
        out.emplace_back(1, c);
        ++i;
      }
    }
    return out;
  }

  static Condition parse_condition(Lexer& lex) {
    Condition c;
    if (lex.peek() != "x") {
      double k = lex.take_number(false);
      if (lex.peek() == "<=") {
        if (k != 0.0) throw Error("C: constant condition must be 0.0");
        lex.expect("<=");
        c.rhs = lex.take_number(false);
        return c;
      }
      lex.pos -= 1;
    }
    while (true) {
      Term t;
      if (lex.peek() != "x") {
        t.coefficient = lex.take_number(false);
        t.has_coefficient = true;
        lex.expect("*");
      }
      lex.expect("x");
      t.index = lex.take_index();
      c.terms.push_back(t);
      if (lex.peek() != "+") break;
      lex.expect("+");
    }
    lex.expect("<=");
    c.rhs = lex.take_number(false);
    return c;
  }

  static Block parse_block(Lexer& lex) {
    Block b;
    lex.expect("{");
    while (lex.peek() != "}") {
      std::string w = lex.take_word();
      if (w == "if") {
        If st;
        lex.expect("(");
        st.condition = parse_condition(lex);
        lex.expect(")");
        st.then_block = std::make_unique<Block>(parse_block(lex));
        lex.expect("else");
        st.else_block = std::make_unique<Block>(parse_block(lex));
        b.statements.emplace_back(std::move(st));
      } else if (w == "result") {
        Assign a;
        a.index = lex.take_index();
        lex.expect("=");
        a.value = static_cast<float>(lex.take_number(true));
        lex.expect(";");
        b.statements.emplace_back(a);
      } else if (w == "return") {
        Return r{static_cast<int>(lex.take_number(false))};
        lex.expect(";");
        b.statements.emplace_back(r);
      } else {
        throw Error("C: unexpected token '" + w + "'");
      }
    }
    lex.expect("}");
    return b;
  }

  // Mirrors predicate evaluation: axis form compares directly, linear forms
  // accumulate left to right in double precision.
  static bool holds(const Condition& c, std::span<const double> x) {
    if (c.terms.size() == 1 && !c.terms[0].has_coefficient) return x[c.terms[0].index] <= c.rhs;
    double acc = 0.0;
    for (const auto& t : c.terms) acc += t.coefficient * x[t.index];
    return acc <= c.rhs;
  }

  bool returns_count_ = false;
  Block body_;
};

}  // namespace dtc
