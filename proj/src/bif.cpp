#include "bnexplain/bif.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "bnexplain/errors.hpp"

namespace bnexplain {

namespace {

struct Token {
  enum Kind { kWord, kQuoted, kPunct, kEnd } kind;
  std::string text;
  int line;
  int column;
};

bool is_punct(char c) {
  return c == '{' || c == '}' || c == '[' || c == ']' || c == '(' || c == ')' || c == ';' ||
         c == ',' || c == '|';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_space_and_comments();
    if (pos_ >= text_.size()) return {Token::kEnd, "", line_, column_};
    const int line = line_;
    const int column = column_;
    char c = text_[pos_];
    if (is_punct(c)) {
      advance();
      return {Token::kPunct, std::string(1, c), line, column};
    }
    if (c == '"') {
      advance();
      std::string out;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\n') break;
        out.push_back(text_[pos_]);
        advance();
      }
      if (pos_ >= text_.size() || text_[pos_] != '"') {
        throw ValidationError(where(line, column) + ": unterminated quoted name");
      }
      advance();
      return {Token::kQuoted, out, line, column};
    }
    std::string out;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           !is_punct(text_[pos_]) && text_[pos_] != '"') {
      out.push_back(text_[pos_]);
      advance();
    }
    return {Token::kWord, out, line, column};
  }

  static std::string where(int line, int column) {
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (text_.substr(pos_, 2) == "//") {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (text_.substr(pos_, 2) == "/*") {
        int line = line_, column = column_;
        advance();
        advance();
        while (pos_ < text_.size() && text_.substr(pos_, 2) != "*/") advance();
        if (pos_ >= text_.size()) throw ValidationError(where(line, column) + ": unterminated comment");
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

struct RawVariable {
  std::string name;
  std::vector<std::string> states;
};

struct RawRow {
  std::vector<std::string> parent_states;  // empty for `table` / `default`
  std::vector<double> values;
  int line;
};

struct RawProbability {
  std::string child;
  std::vector<std::string> parents;
  std::optional<std::vector<double>> table;
  std::optional<std::vector<double>> fallback;
  std::vector<RawRow> rows;
  int line;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { shift(); }

  void run() {
    while (current_.kind != Token::kEnd) {
      expect_word_token();
      const std::string keyword = current_.text;
      if (keyword == "network") {
        shift();
        network_name_ = take_name("network name");
        skip_block();
      } else if (keyword == "variable") {
        shift();
        parse_variable();
      } else if (keyword == "probability") {
        shift();
        parse_probability();
      } else {
        fail("unexpected '" + keyword + "'");
      }
    }
  }

  std::string network_name_;
  std::vector<RawVariable> variables_;
  std::vector<RawProbability> probabilities_;

 private:
  void shift() { current_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("BIF syntax error at " + Lexer::where(current_.line, current_.column) +
                          ": " + what);
  }

  void expect_word_token() {
    if (current_.kind != Token::kWord) fail("expected a keyword, found '" + current_.text + "'");
  }

  bool at_punct(char c) const {
    return current_.kind == Token::kPunct && current_.text[0] == c;
  }

  void expect(char c) {
    if (!at_punct(c)) {
      fail(std::string("expected '") + c + "', found '" +
           (current_.kind == Token::kEnd ? std::string("end of input") : current_.text) + "'");
    }
    shift();
  }

  std::string take_name(const char* what) {
    if (current_.kind != Token::kWord && current_.kind != Token::kQuoted) {
      fail(std::string("expected ") + what);
    }
    std::string out = current_.text;
    shift();
    return out;
  }

  double take_number() {
    if (current_.kind != Token::kWord) fail("expected a probability value");
    double value = 0.0;
    const std::string& t = current_.text;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size()) fail("'" + t + "' is not a number");
    shift();
    return value;
  }

  // Skips a `{ ... }` block, e.g. network properties.
  void skip_block() {
    expect('{');
    int depth = 1;
    while (depth > 0) {
      if (current_.kind == Token::kEnd) fail("unterminated block");
      if (at_punct('{')) ++depth;
      if (at_punct('}')) --depth;
      shift();
    }
  }

  void skip_statement() {
    while (!at_punct(';')) {
      if (current_.kind == Token::kEnd || at_punct('}')) fail("expected ';'");
      shift();
    }
    shift();
  }

  void parse_variable() {
    RawVariable var;
    var.name = take_name("variable name");
    expect('{');
    bool typed = false;
    while (!at_punct('}')) {
      expect_word_token();
      if (current_.text == "type") {
        shift();
        if (current_.kind != Token::kWord || current_.text != "discrete") {
          fail("only 'type discrete' variables are supported");
        }
        shift();
        expect('[');
        double declared = take_number();
        expect(']');
        expect('{');
        while (true) {
          var.states.push_back(take_name("state name"));
          if (at_punct(',')) {
            shift();
            continue;
          }
          break;
        }
        expect('}');
        expect(';');
        if (static_cast<double>(var.states.size()) != declared) {
          throw ValidationError("variable '" + var.name + "' declares " +
                                std::to_string(static_cast<long>(declared)) + " states but lists " +
                                std::to_string(var.states.size()));
        }
        typed = true;
      } else if (current_.text == "property") {
        skip_statement();
      } else {
        fail("unexpected '" + current_.text + "' in variable block");
      }
    }
    shift();
    if (!typed) throw ValidationError("variable '" + var.name + "' has no type declaration");
    variables_.push_back(std::move(var));
  }

  std::vector<double> take_values() {
    std::vector<double> values;
    while (true) {
      values.push_back(take_number());
      if (at_punct(',')) {
        shift();
        continue;
      }
      break;
    }
    expect(';');
    return values;
  }

  void parse_probability() {
    RawProbability prob;
    prob.line = current_.line;
    expect('(');
    prob.child = take_name("variable name");
    if (at_punct('|')) {
      shift();
      while (true) {
        prob.parents.push_back(take_name("parent name"));
        if (at_punct(',')) {
          shift();
          continue;
        }
        break;
      }
    }
    expect(')');
    expect('{');
    while (!at_punct('}')) {
      if (at_punct('(')) {
        RawRow row;
        row.line = current_.line;
        shift();
        while (true) {
          row.parent_states.push_back(take_name("parent state"));
          if (at_punct(',')) {
            shift();
            continue;
          }
          break;
        }
        expect(')');
        row.values = take_values();
        prob.rows.push_back(std::move(row));
        continue;
      }
      expect_word_token();
      if (current_.text == "table") {
        shift();
        prob.table = take_values();
      } else if (current_.text == "default") {
        shift();
        prob.fallback = take_values();
      } else if (current_.text == "property") {
        skip_statement();
      } else {
        fail("unexpected '" + current_.text + "' in probability block");
      }
    }
    shift();
    probabilities_.push_back(std::move(prob));
  }

  Lexer lexer_;
  Token current_;
};

Cpt build_cpt(const RawProbability& raw, const std::map<std::string, VariableRef>& vars) {
  const std::string block = "probability block '" + raw.child + "'";
  auto lookup = [&](const std::string& name) {
    auto it = vars.find(name);
    if (it == vars.end()) throw ValidationError(block + ": unknown variable '" + name + "'");
    return it->second;
  };
  Cpt cpt;
  cpt.child = lookup(raw.child);
  std::size_t rows = 1;
  for (const auto& p : raw.parents) {
    cpt.parents.push_back(lookup(p));
    rows *= cpt.parents.back()->cardinality();
  }
  const std::size_t card = cpt.child->cardinality();
  std::vector<std::optional<std::vector<double>>> filled(rows);

  if (raw.table) {
    if (raw.table->size() != rows * card) {
      throw ValidationError(block + ": table has " + std::to_string(raw.table->size()) +
                            " values, expected " + std::to_string(rows * card));
    }
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> row(card);
      for (std::size_t s = 0; s < card; ++s) row[s] = (*raw.table)[s * rows + r];
      filled[r] = std::move(row);
    }
  }
  for (const auto& row : raw.rows) {
    if (row.parent_states.size() != cpt.parents.size()) {
      throw ValidationError(block + " (line " + std::to_string(row.line) + "): row names " +
                            std::to_string(row.parent_states.size()) + " parent states, expected " +
                            std::to_string(cpt.parents.size()));
    }
    if (row.values.size() != card) {
      throw ValidationError(block + " (line " + std::to_string(row.line) + "): row has " +
                            std::to_string(row.values.size()) + " values, expected " +
                            std::to_string(card));
    }
    std::size_t index = 0;
    for (std::size_t k = 0; k < cpt.parents.size(); ++k) {
      auto s = cpt.parents[k]->state_index(row.parent_states[k]);
      if (!s) {
        throw ValidationError(block + ": parent '" + cpt.parents[k]->name + "' has no state '" +
                              row.parent_states[k] + "'");
      }
      index = index * cpt.parents[k]->cardinality() + *s;
    }
    filled[index] = row.values;
  }
  if (raw.fallback && raw.fallback->size() != card) {
    throw ValidationError(block + ": default row has wrong arity");
  }
  cpt.table.reserve(rows * card);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto* row = filled[r] ? &*filled[r] : (raw.fallback ? &*raw.fallback : nullptr);
    if (!row) throw ValidationError(block + ": missing row for a parent configuration");
    cpt.table.insert(cpt.table.end(), row->begin(), row->end());
  }
  return cpt;
}

bool needs_quotes(const std::string& name) {
  if (name.empty()) return true;
  for (char c : name) {
    if (std::isspace(static_cast<unsigned char>(c)) || is_punct(c) || c == '"') return true;
  }
  return false;
}

std::string quoted(const std::string& name) { return needs_quotes(name) ? '"' + name + '"' : name; }

std::string number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

BayesianNetwork parse_bif(std::string_view text, std::string fallback_name) {
  Parser parser(text);
  parser.run();

  std::map<std::string, VariableRef> vars;
  std::vector<VariableRef> ordered;
  for (auto& raw : parser.variables_) {
    if (vars.count(raw.name)) throw ValidationError("variable '" + raw.name + "' is declared twice");
    auto v = make_variable(raw.name, raw.states);
    vars.emplace(raw.name, v);
    ordered.push_back(v);
  }
  std::vector<Cpt> cpts;
  for (const auto& raw : parser.probabilities_) {
    try {
      cpts.push_back(build_cpt(raw, vars));
      // validates row sums with the block name attached
      factor_from_cpt(cpts.back());
    } catch (const ValidationError& e) {
      std::string msg = e.what();
      if (msg.find("probability block") == std::string::npos) {
        msg = "probability block '" + raw.child + "': " + msg;
      }
      throw ValidationError(msg);
    }
  }
  std::string name = parser.network_name_;
  if (name.empty() || name == "unknown") name = std::move(fallback_name);
  return BayesianNetwork(std::move(name), std::move(ordered), std::move(cpts));
}

BayesianNetwork load_bif_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read network file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_bif(buf.str(), path.stem().string());
}

std::string write_bif(const BayesianNetwork& bn) {
  std::ostringstream out;
  out << "network " << quoted(bn.name()) << " {\n}\n";
  for (const auto& v : bn.variables()) {
    out << "variable " << quoted(v->name) << " {\n  type discrete [ " << v->cardinality() << " ] { ";
    for (std::size_t s = 0; s < v->states.size(); ++s) {
      out << (s ? ", " : "") << quoted(v->states[s]);
    }
    out << " };\n}\n";
  }
  for (std::size_t i = 0; i < bn.size(); ++i) {
    const auto& child = bn.variable(i);
    const auto& parents = bn.parents(i);
    const Factor& f = bn.cpt(i);
    const std::size_t card = child->cardinality();
    out << "probability ( " << quoted(child->name);
    for (std::size_t k = 0; k < parents.size(); ++k) {
      out << (k ? ", " : " | ") << quoted(bn.variable(parents[k])->name);
    }
    out << " ) {\n";
    if (parents.empty()) {
      out << "  table ";
      for (std::size_t s = 0; s < card; ++s) out << (s ? ", " : "") << number(f[s]);
      out << ";\n";
    } else {
      const std::size_t rows = f.size() / card;
      for (std::size_t r = 0; r < rows; ++r) {
        out << "  (";
        std::size_t rest = r;
        std::vector<std::string> states(parents.size());
        for (std::size_t k = parents.size(); k-- > 0;) {
          const auto& p = bn.variable(parents[k]);
          states[k] = p->states[rest % p->cardinality()];
          rest /= p->cardinality();
        }
        for (std::size_t k = 0; k < states.size(); ++k) out << (k ? ", " : "") << quoted(states[k]);
        out << ") ";
        for (std::size_t s = 0; s < card; ++s) out << (s ? ", " : "") << number(f[r * card + s]);
        out << ";\n";
      }
    }
    out << "}\n";
  }
  return out.str();
}

}  // namespace bnexplain
