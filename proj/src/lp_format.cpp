#include "mirrorvlc/lp_format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace mirrorvlc {

namespace {

constexpr std::size_t kWrapColumn = 200;

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_terms(std::ostream& out, std::string& line, const lp::LinearModel& model,
                 const std::vector<lp::Term>& terms) {
  for (const lp::Term& t : terms) {
    std::string piece = std::signbit(t.coef) ? " - " : " + ";
    piece += number(std::abs(t.coef)) + " " + model.vars.at(t.var).name;
    if (line.size() + piece.size() > kWrapColumn) {
      out << line << '\n';
      line = "  ";
    }
    line += piece;
  }
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

enum class Section { None, Objective, Constraints, Bounds, Binaries, End };

bool header(const std::string& line, Section& section, lp::Sense& sense) {
  const std::string t = lower(trim(line));
  if (t == "maximize" || t == "maximise" || t == "maximum" || t == "max") {
    section = Section::Objective;
    sense = lp::Sense::Maximize;
  } else if (t == "minimize" || t == "minimise" || t == "minimum" || t == "min") {
    section = Section::Objective;
    sense = lp::Sense::Minimize;
  } else if (t == "subject to" || t == "such that" || t == "st" || t == "s.t.") {
    section = Section::Constraints;
  } else if (t == "bounds" || t == "bound") {
    section = Section::Bounds;
  } else if (t == "binaries" || t == "binary" || t == "bin") {
    section = Section::Binaries;
  } else if (t == "generals" || t == "general" || t == "gen" || t == "semi-continuous") {
    throw FormatError("unsupported LP section '" + trim(line) + "'");
  } else if (t == "end") {
    section = Section::End;
  } else {
    return false;
  }
  return true;
}

struct Token {
  std::string text;
  int line{};
};

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '[' ||
         c == ']' || c == '#' || c == '$' || c == '{' || c == '}';
}

void tokenize(const std::string& text, int line, std::vector<Token>& out) {
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == ':' || c == '+' || c == '-') {
      out.push_back({std::string(1, c), line});
      ++i;
    } else if (c == '<' || c == '>' || c == '=') {
      std::string op(1, c);
      if (i + 1 < text.size() && (text[i + 1] == '=' || text[i + 1] == '<' || text[i + 1] == '>')) {
        op += text[i + 1];
      }
      i += op.size();
      if (op == "=<" || op == "<") op = "<=";
      if (op == "=>" || op == ">") op = ">=";
      if (op != "<=" && op != ">=" && op != "=") {
        throw FormatError("line " + std::to_string(line) + ": bad operator '" + op + "'");
      }
      out.push_back({op, line});
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.')) ++j;
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          j = k;
          while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
      }
      out.push_back({text.substr(i, j - i), line});
      i = j;
    } else if (is_name_char(c)) {
      std::size_t j = i;
      while (j < text.size() && is_name_char(text[j])) ++j;
      out.push_back({text.substr(i, j - i), line});
      i = j;
    } else {
      throw FormatError("line " + std::to_string(line) + ": unexpected character '" +
                        std::string(1, c) + "'");
    }
  }
}

bool is_number(const std::string& s) {
  return !s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.');
}

bool is_infinity(const std::string& s) {
  const std::string t = lower(s);
  return t == "inf" || t == "infinity";
}

bool is_operator(const std::string& s) { return s == "<=" || s == ">=" || s == "="; }

double parse_number(const Token& tok) {
  if (is_infinity(tok.text)) return lp::kInf;
  double v = 0.0;
  const char* b = tok.text.data();
  const char* e = b + tok.text.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) {
    throw FormatError("line " + std::to_string(tok.line) + ": bad number '" + tok.text + "'");
  }
  return v;
}

class Parser {
 public:
  lp::LinearModel model;

  int var(const std::string& name) {
    auto [it, inserted] = index_.try_emplace(name, model.variable_count());
    if (inserted) {
      model.vars.push_back({name, 0.0, lp::kInf, false});
      bounded_.push_back(false);
    }
    return it->second;
  }

  // Parses an optional "name :" prefix and a linear expression. Stops at an
  // operator or at the end of the tokens.
  std::size_t expression(const std::vector<Token>& t, std::size_t i, std::string& name,
                         std::vector<lp::Term>& terms) {
    if (i + 1 < t.size() && t[i + 1].text == ":") {
      name = t[i].text;
      i += 2;
    }
    while (i < t.size() && !is_operator(t[i].text)) {
      double sign = 1.0;
      bool saw = false;
      while (i < t.size() && (t[i].text == "+" || t[i].text == "-")) {
        if (t[i].text == "-") sign = -sign;
        ++i;
        saw = true;
      }
      if (i >= t.size() || is_operator(t[i].text)) {
        if (saw) throw FormatError("line " + std::to_string(t[i - 1].line) + ": dangling sign");
        break;
      }
      double coef = 1.0;
      if (is_number(t[i].text)) {
        coef = parse_number(t[i]);
        ++i;
      }
      if (i >= t.size() || is_operator(t[i].text) || is_number(t[i].text) || t[i].text == ":") {
        throw FormatError("line " + std::to_string(t[i - 1].line) +
                          ": constant terms are not supported");
      }
      terms.push_back({var(t[i].text), sign * coef});
      ++i;
    }
    return i;
  }

  void objective(const std::vector<Token>& t) {
    std::string name = "obj";
    const std::size_t end = expression(t, 0, name, model.objective);
    if (end != t.size()) {
      throw FormatError("line " + std::to_string(t[end].line) + ": operator in objective");
    }
    model.objective_name = name;
  }

  void constraints(const std::vector<Token>& t) {
    std::size_t i = 0;
    while (i < t.size()) {
      std::string name = "R" + std::to_string(model.row_count() + 1);
      std::vector<lp::Term> terms;
      i = expression(t, i, name, terms);
      if (i >= t.size()) throw FormatError("constraint '" + name + "' lacks a right-hand side");
      const std::string op = t[i].text;
      ++i;
      double sign = 1.0;
      while (i < t.size() && (t[i].text == "+" || t[i].text == "-")) {
        if (t[i].text == "-") sign = -sign;
        ++i;
      }
      if (i >= t.size()) throw FormatError("constraint '" + name + "' lacks a right-hand side");
      const double rhs = sign * parse_number(t[i]);
      ++i;
      double lo = -lp::kInf;
      double hi = lp::kInf;
      if (op == "<=" || op == "=") hi = rhs;
      if (op == ">=" || op == "=") lo = rhs;
      model.rows.push_back({name, std::move(terms), lo, hi});
    }
  }

  double value(const std::vector<Token>& t, std::size_t& i) {
    double sign = 1.0;
    while (i < t.size() && (t[i].text == "+" || t[i].text == "-")) {
      if (t[i].text == "-") sign = -sign;
      ++i;
    }
    if (i >= t.size()) throw FormatError("incomplete bound");
    return sign * parse_number(t[i++]);
  }

  void bound(const std::vector<Token>& t) {
    if (t.empty()) return;
    const int line = t.front().line;
    auto fail = [&]() { throw FormatError("line " + std::to_string(line) + ": malformed bound"); };
    auto starts_with_value = [&]() {
      return is_number(t[0].text) || is_infinity(t[0].text) || t[0].text == "+" || t[0].text == "-";
    };
    if (starts_with_value()) {
      std::size_t i = 0;
      const double a = value(t, i);
      if (i + 1 >= t.size() || t[i].text != "<=") fail();
      const int j = var(t[i + 1].text);
      mark(j, line);
      model.vars[j].lower = a;
      i += 2;
      if (i < t.size()) {
        if (t[i].text != "<=") fail();
        ++i;
        model.vars[j].upper = value(t, i);
      }
      if (i != t.size()) fail();
      return;
    }
    const int j = var(t[0].text);
    mark(j, line);
    if (t.size() == 2 && lower(t[1].text) == "free") {
      model.vars[j].lower = -lp::kInf;
      model.vars[j].upper = lp::kInf;
      return;
    }
    if (t.size() < 3) fail();
    std::size_t i = 2;
    const double v = value(t, i);
    if (i != t.size()) fail();
    if (t[1].text == ">=") model.vars[j].lower = v;
    else if (t[1].text == "<=") model.vars[j].upper = v;
    else {
      model.vars[j].lower = v;
      model.vars[j].upper = v;
    }
  }

  void binaries(const std::vector<Token>& t) {
    for (const Token& tok : t) {
      const int j = var(tok.text);
      model.vars[j].binary = true;
      if (!bounded_[j]) {
        model.vars[j].lower = 0.0;
        model.vars[j].upper = 1.0;
      }
    }
  }

  // Variables named in Bounds come first, in their listed order.
  void finish() {
    std::vector<int> order = bound_order_;
    std::vector<bool> seen(model.variable_count(), false);
    for (int j : order) seen[j] = true;
    for (int j = 0; j < model.variable_count(); ++j) {
      if (!seen[j]) order.push_back(j);
    }
    std::vector<int> remap(model.variable_count());
    std::vector<lp::Variable> vars;
    for (std::size_t k = 0; k < order.size(); ++k) {
      remap[order[k]] = static_cast<int>(k);
      vars.push_back(model.vars[order[k]]);
    }
    model.vars = std::move(vars);
    for (auto& t : model.objective) t.var = remap[t.var];
    for (auto& row : model.rows) {
      for (auto& t : row.terms) t.var = remap[t.var];
    }
  }

 private:
  void mark(int j, int line) {
    if (bounded_[j]) {
      throw FormatError("line " + std::to_string(line) + ": bounds for '" + model.vars[j].name +
                        "' given twice");
    }
    bounded_[j] = true;
    bound_order_.push_back(j);
  }

  std::unordered_map<std::string, int> index_;
  std::vector<bool> bounded_;
  std::vector<int> bound_order_;
};

}  // namespace

void write_lp(const lp::LinearModel& model, std::ostream& out) {
  out << "\\ mirror placement model\n";
  out << (model.sense == lp::Sense::Maximize ? "Maximize\n" : "Minimize\n");
  std::string line = " " + model.objective_name + ":";
  write_terms(out, line, model, model.objective);
  out << line << '\n';

  out << "Subject To\n";
  for (const lp::Row& row : model.rows) {
    const bool lo = std::isfinite(row.lower);
    const bool hi = std::isfinite(row.upper);
    std::string op;
    double rhs = 0.0;
    if (lo && hi && row.lower == row.upper) {
      op = "=";
      rhs = row.lower;
    } else if (lo && hi) {
      throw std::invalid_argument("row '" + row.name + "' is ranged; split it before export");
    } else if (hi) {
      op = "<=";
      rhs = row.upper;
    } else if (lo) {
      op = ">=";
      rhs = row.lower;
    } else {
      throw std::invalid_argument("row '" + row.name + "' has no finite side");
    }
    line = " " + row.name + ":";
    write_terms(out, line, model, row.terms);
    out << line << ' ' << op << ' ' << number(rhs) << '\n';
  }

  out << "Bounds\n";
  for (const lp::Variable& v : model.vars) {
    const bool lo = std::isfinite(v.lower);
    const bool hi = std::isfinite(v.upper);
    if (lo && hi && v.lower == v.upper) out << ' ' << v.name << " = " << number(v.lower) << '\n';
    else if (!lo && !hi) out << ' ' << v.name << " free\n";
    else if (!hi) out << ' ' << v.name << " >= " << number(v.lower) << '\n';
    else out << ' ' << number(v.lower) << " <= " << v.name << " <= " << number(v.upper) << '\n';
  }

  bool any_binary = false;
  line.clear();
  for (const lp::Variable& v : model.vars) {
    if (!v.binary) continue;
    if (!any_binary) out << "Binaries\n";
    any_binary = true;
    if (line.size() + v.name.size() + 1 > kWrapColumn) {
      out << line << '\n';
      line.clear();
    }
    line += " " + v.name;
  }
  if (!line.empty()) out << line << '\n';
  out << "End\n";
}

lp::LinearModel read_lp(std::istream& in) {
  Parser parser;
  Section section = Section::None;
  lp::Sense sense = lp::Sense::Maximize;
  std::vector<Token> tokens;
  bool saw_objective = false;

  auto flush = [&]() {
    switch (section) {
      case Section::Objective:
        parser.objective(tokens);
        saw_objective = true;
        break;
      case Section::Constraints: parser.constraints(tokens); break;
      case Section::Binaries: parser.binaries(tokens); break;
      default: break;
    }
    tokens.clear();
  };

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto cut = raw.find('\\');
    const std::string text = cut == std::string::npos ? raw : raw.substr(0, cut);
    if (trim(text).empty()) continue;
    Section next = section;
    if (header(text, next, sense)) {
      flush();
      section = next;
      if (section == Section::End) break;
      continue;
    }
    if (section == Section::None) {
      throw FormatError("line " + std::to_string(line_no) + ": content before the objective");
    }
    std::vector<Token> line_tokens;
    tokenize(text, line_no, line_tokens);
    if (section == Section::Bounds) {
      parser.bound(line_tokens);
    } else {
      tokens.insert(tokens.end(), line_tokens.begin(), line_tokens.end());
    }
  }
  flush();
  if (section != Section::End) throw FormatError("LP file is missing its End marker");
  if (!saw_objective) throw FormatError("LP file has no objective section");
  parser.model.sense = sense;
  parser.finish();
  return std::move(parser.model);
}

void export_model(const DesignModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_lp(model.lp, out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::map<std::string, double> read_solution(std::istream& in) {
  std::map<std::string, double> values;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto cut = raw.find('#');
    std::string text = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (text.empty()) continue;
    std::replace(text.begin(), text.end(), '=', ' ');
    std::istringstream fields(text);
    std::string name;
    std::string value;
    std::string extra;
    fields >> name >> value;
    if (name.empty() || value.empty() || (fields >> extra)) {
      throw FormatError("line " + std::to_string(line_no) + ": expected name=value");
    }
    const double v = parse_number({value, line_no});
    if (!std::isfinite(v)) {
      throw FormatError("line " + std::to_string(line_no) + ": value must be finite");
    }
    if (!values.emplace(name, v).second) {
      throw FormatError("line " + std::to_string(line_no) + ": '" + name + "' given twice");
    }
  }
  return values;
}

MirrorDesign accept_solution(const DesignModel& model, const std::map<std::string, double>& values) {
  const auto index = model.lp.variable_index();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(model.lp.variable_count());
  for (const auto& [name, v] : values) {
    const auto it = index.find(name);
    if (it == index.end()) throw FormatError("unknown variable '" + name + "' in solution");
    x(it->second) = v;
  }

  const lp::FeasibilityReport report = lp::check_feasibility(model.lp, x, true);
  if (report.max_violation > 1e-6) {
    const std::string where = report.worst_row >= 0
                                  ? "row " + model.lp.rows[report.worst_row].name
                                  : "variable " + model.lp.vars[report.worst_variable].name;
    throw FormatError("solution violates " + where + " by " + number(report.max_violation));
  }

  MirrorDesign d;
  d.xi.assign(model.cell_count, 0);
  for (int z = 0; z < model.cell_count; ++z) d.xi[z] = x(model.xi_var(z)) > 0.5 ? 1 : 0;
  d.powers_prev.resize(model.led_count);
  for (int m = 0; m < model.led_count; ++m) d.powers_prev(m) = x(model.p_var(m));
  d.rho.resize(model.pair_count());
  for (int k = 0; k < model.pair_count(); ++k) {
    const double chi = std::round(x(model.chi_var(k)));
    d.rho(k) = x(model.rho_var(k));
    if (std::abs(d.rho(k) - chi * d.powers_prev(model.pairs[k].led)) > 1e-6) {
      throw FormatError("solution breaks rho = chi * P for " + model.lp.vars[model.rho_var(k)].name);
    }
  }
  d.objective_phi = x(model.phi_var());
  d.status = DesignStatus::Feasible;
  return d;
}

MirrorDesign import_solution(const DesignModel& model, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return accept_solution(model, read_solution(in));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace mirrorvlc
