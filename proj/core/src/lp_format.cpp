#include "evsched/csv.hpp"
#include "evsched/milp.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace evsched::milp {

namespace {

std::string fmt(double v) { return csv::format_double(v); }

std::vector<std::pair<int, double>> merged_terms(const MilpModel::Row& row) {
    std::map<int, double> acc;
    for (auto [j, a] : row.terms) acc[j] += a;
    std::vector<std::pair<int, double>> out;
    for (auto [j, a] : acc)
        if (a != 0.0) out.emplace_back(j, a);
    return out;
}

void emit_expr(std::ostringstream& os, const std::vector<std::pair<int, double>>& terms,
               const std::vector<std::string>& names) {
    bool first = true;
    for (auto [j, a] : terms) {
        if (first) {
            if (a < 0.0) os << " -";
            first = false;
        } else {
            os << (a < 0.0 ? " -" : " +");
        }
        os << ' ' << fmt(std::abs(a)) << ' ' << names[j];
    }
    if (first) os << " 0 " << names[0];
}

}  // namespace

std::string to_lp_string(const MilpModel& model) {
    model.validate();
    if (model.cols.empty()) throw std::invalid_argument("lp write: model has no columns");

    std::vector<std::string> col_names(model.cols.size());
    for (std::size_t j = 0; j < model.cols.size(); ++j) {
        col_names[j] =
            model.cols[j].name.empty() ? "x" + std::to_string(j) : model.cols[j].name;
    }

    std::ostringstream os;
    os << "\\ Problem: " << (model.name.empty() ? "model" : model.name) << '\n';
    os << (model.maximize ? "Maximize" : "Minimize") << '\n';
    os << " obj:";
    {
        std::vector<std::pair<int, double>> obj;
        for (std::size_t j = 0; j < model.cols.size(); ++j)
            if (model.cols[j].obj != 0.0) obj.emplace_back(static_cast<int>(j), model.cols[j].obj);
        emit_expr(os, obj, col_names);
    }
    os << "\nSubject To\n";
    for (std::size_t r = 0; r < model.rows.size(); ++r) {
        const auto& row = model.rows[r];
        auto terms = merged_terms(row);
        if (terms.empty()) {
            if ((std::isfinite(row.lo) && row.lo > 0.0) || (std::isfinite(row.hi) && row.hi < 0.0))
                throw std::invalid_argument("lp write: empty infeasible row '" + row.name + "'");
            continue;
        }
        std::string rn = row.name.empty() ? "r" + std::to_string(r) : row.name;
        bool lo_f = std::isfinite(row.lo), hi_f = std::isfinite(row.hi);
        if (!lo_f && !hi_f) continue;
        if (lo_f && hi_f && row.lo == row.hi) {
            os << ' ' << rn << ':';
            emit_expr(os, terms, col_names);
            os << " = " << fmt(row.lo) << '\n';
            continue;
        }
        if (lo_f) {
            os << ' ' << rn << (hi_f ? "__lo:" : ":");
            emit_expr(os, terms, col_names);
            os << " >= " << fmt(row.lo) << '\n';
        }
        if (hi_f) {
            os << ' ' << rn << (lo_f ? "__hi:" : ":");
            emit_expr(os, terms, col_names);
            os << " <= " << fmt(row.hi) << '\n';
        }
    }
    os << "Bounds\n";
    std::vector<int> binaries;
    for (std::size_t j = 0; j < model.cols.size(); ++j) {
        const auto& c = model.cols[j];
        if (c.binary) {
            binaries.push_back(static_cast<int>(j));
            if (c.lb == 0.0 && c.ub == 1.0) continue;
        }
        bool lo_f = std::isfinite(c.lb), hi_f = std::isfinite(c.ub);
        if (!lo_f && !hi_f) {
            os << ' ' << col_names[j] << " free\n";
        } else if (lo_f && hi_f && c.lb == c.ub) {
            os << ' ' << col_names[j] << " = " << fmt(c.lb) << '\n';
        } else if (lo_f && hi_f) {
            os << ' ' << fmt(c.lb) << " <= " << col_names[j] << " <= " << fmt(c.ub) << '\n';
        } else if (lo_f) {
            if (c.lb != 0.0) os << ' ' << col_names[j] << " >= " << fmt(c.lb) << '\n';
        } else {
            os << " -inf <= " << col_names[j] << " <= " << fmt(c.ub) << '\n';
        }
    }
    if (!binaries.empty()) {
        os << "Binaries\n";
        int on_line = 0;
        for (int j : binaries) {
            os << ' ' << col_names[j];
            if (++on_line == 8) {
                os << '\n';
                on_line = 0;
            }
        }
        if (on_line) os << '\n';
    }
    os << "End\n";
    return os.str();
}

void write_lp(std::ostream& os, const MilpModel& model) { os << to_lp_string(model); }

namespace {

struct Lexer {
    std::vector<std::string> toks;

    explicit Lexer(const std::string& text) {
        std::string cur;
        auto flush = [&] {
            if (!cur.empty()) {
                toks.push_back(cur);
                cur.clear();
            }
        };
        auto numericish = [&] {
            return !cur.empty() && (std::isdigit(static_cast<unsigned char>(cur[0])) || cur[0] == '.');
        };
        for (std::size_t i = 0; i < text.size(); ++i) {
            char ch = text[i];
            if (ch == '\\') {
                while (i < text.size() && text[i] != '\n') ++i;
                flush();
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(ch))) {
                flush();
                continue;
            }
            if (ch == ':') {
                flush();
                toks.emplace_back(":");
                continue;
            }
            if (ch == '<' || ch == '>') {
                flush();
                if (i + 1 < text.size() && text[i + 1] == '=') ++i;
                toks.emplace_back(ch == '<' ? "<=" : ">=");
                continue;
            }
            if (ch == '=') {
                flush();
                if (i + 1 < text.size() && (text[i + 1] == '<' || text[i + 1] == '>')) {
                    toks.emplace_back(text[i + 1] == '<' ? "<=" : ">=");
                    ++i;
                } else {
                    toks.emplace_back("=");
                }
                continue;
            }
            if (ch == '+' || ch == '-') {
                bool exponent_sign =
                    numericish() && (cur.back() == 'e' || cur.back() == 'E');
                if (exponent_sign) {
                    cur += ch;
                } else {
                    flush();
                    toks.emplace_back(1, ch);
                }
                continue;
            }
            cur += ch;
        }
        flush();
    }
};

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool as_number(const std::string& tok, double& out) {
    if (tok.empty()) return false;
    std::string t = lower(tok);
    if (t == "inf" || t == "infinity" || t == "1e30") {
        out = kInf;
        return true;
    }
    const char* begin = tok.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + tok.size()) return false;
    out = v;
    return true;
}

class Parser {
  public:
    explicit Parser(const std::string& text) : lex_(text) {}

    MilpModel run() {
        expect_sense();
        parse_objective();
        expect_rows_header();
        parse_rows();
        while (pos_ < lex_.toks.size()) {
            std::string kw = lower(peek());
            if (kw == "bounds" || kw == "bound") {
                ++pos_;
                parse_bounds();
            } else if (kw == "binaries" || kw == "binary" || kw == "bin") {
                ++pos_;
                parse_binaries();
            } else if (kw == "end") {
                ++pos_;
                break;
            } else if (kw == "general" || kw == "generals" || kw == "integers" ||
                       kw == "integer") {
                throw std::runtime_error("lp parse: general integers are not supported");
            } else {
                throw std::runtime_error("lp parse: unexpected token '" + peek() + "'");
            }
        }
        for (std::size_t j = 0; j < model_.cols.size(); ++j) {
            auto& c = model_.cols[j];
            if (c.binary) {
                if (!explicit_bounds_[j]) {
                    c.lb = 0.0;
                    c.ub = 1.0;
                } else {
                    c.lb = std::max(c.lb, 0.0);
                    c.ub = std::min(c.ub, 1.0);
                }
            }
        }
        model_.validate();
        return std::move(model_);
    }

  private:
    Lexer lex_;
    std::size_t pos_ = 0;
    MilpModel model_;
    std::vector<char> explicit_bounds_;

    const std::string& peek(std::size_t ahead = 0) const {
        static const std::string empty;
        return pos_ + ahead < lex_.toks.size() ? lex_.toks[pos_ + ahead] : empty;
    }

    bool at_section_keyword() const {
        std::string kw = lower(peek());
        return kw == "subject" || kw == "st" || kw == "s.t." || kw == "bounds" ||
               kw == "bound" || kw == "binaries" || kw == "binary" || kw == "bin" ||
               kw == "general" || kw == "generals" || kw == "integers" || kw == "integer" ||
               kw == "end";
    }

    int col_of(const std::string& name) {
        auto it = model_.col_index.find(name);
        if (it != model_.col_index.end()) return it->second;
        int id = model_.add_col(name, 0.0, kInf, 0.0, false);
        explicit_bounds_.push_back(0);
        return id;
    }

    void expect_sense() {
        std::string kw = lower(peek());
        if (kw == "maximize" || kw == "maximise" || kw == "max") {
            model_.maximize = true;
        } else if (kw == "minimize" || kw == "minimise" || kw == "min") {
            model_.maximize = false;
        } else {
            throw std::runtime_error("lp parse: expected objective sense, got '" + peek() + "'");
        }
        ++pos_;
    }

    void expect_rows_header() {
        std::string kw = lower(peek());
        if (kw == "subject") {
            ++pos_;
            if (lower(peek()) != "to") throw std::runtime_error("lp parse: expected 'to'");
            ++pos_;
        } else if (kw == "st" || kw == "s.t.") {
            ++pos_;
        } else {
            throw std::runtime_error("lp parse: expected constraint section, got '" + peek() + "'");
        }
    }

    // [sign] [coef] name ... accumulated into per-column coefficients
    std::map<int, double> parse_expr() {
        std::map<int, double> acc;
        double sign = 1.0;
        bool have_coef = false;
        double coef = 1.0;
        while (pos_ < lex_.toks.size()) {
            const std::string& tok = peek();
            if (tok == "<=" || tok == ">=" || tok == "=" || tok == ":") break;
            if (at_section_keyword()) break;
            if (tok == "+") {
                ++pos_;
                continue;
            }
            if (tok == "-") {
                sign = -sign;
                ++pos_;
                continue;
            }
            double v;
            if (as_number(tok, v)) {
                if (have_coef)
                    throw std::runtime_error("lp parse: dangling constant near '" + tok + "'");
                coef = v;
                have_coef = true;
                ++pos_;
                continue;
            }
            // a row label for the next constraint ends this expression
            if (peek(1) == ":" && !have_coef && sign == 1.0) break;
            acc[col_of(tok)] += sign * (have_coef ? coef : 1.0);
            sign = 1.0;
            have_coef = false;
            coef = 1.0;
            ++pos_;
        }
        if (have_coef) throw std::runtime_error("lp parse: constant term without column");
        return acc;
    }

    double parse_signed_number() {
        double sign = 1.0;
        while (peek() == "+" || peek() == "-") {
            if (peek() == "-") sign = -sign;
            ++pos_;
        }
        double v;
        if (!as_number(peek(), v))
            throw std::runtime_error("lp parse: expected number, got '" + peek() + "'");
        ++pos_;
        return sign * v;
    }

    void parse_objective() {
        std::string label;
        if (!peek().empty() && peek(1) == ":" && !at_section_keyword()) {
            label = peek();
            pos_ += 2;
        }
        auto expr = parse_expr();
        for (auto [j, a] : expr) model_.cols[j].obj += a;
    }

    void parse_rows() {
        while (pos_ < lex_.toks.size() && !at_section_keyword()) {
            std::string label;
            if (peek(1) == ":") {
                label = peek();
                pos_ += 2;
            }
            auto expr = parse_expr();
            const std::string op = peek();
            if (op != "<=" && op != ">=" && op != "=")
                throw std::runtime_error("lp parse: expected relation in row '" + label + "'");
            ++pos_;
            double rhs = parse_signed_number();
            std::vector<std::pair<int, double>> terms;
            for (auto [j, a] : expr)
                if (a != 0.0) terms.emplace_back(j, a);
            double lo = -kInf, hi = kInf;
            if (op == "<=") hi = rhs;
            else if (op == ">=") lo = rhs;
            else lo = hi = rhs;
            model_.add_row(label, lo, hi, std::move(terms));
        }
    }

    void parse_bounds() {
        while (pos_ < lex_.toks.size() && !at_section_keyword()) {
            double v;
            if (peek() == "-" || peek() == "+" || as_number(peek(), v)) {
                double lo = parse_signed_number();
                if (peek() != "<=")
                    throw std::runtime_error("lp parse: expected '<=' in bound");
                ++pos_;
                int j = col_of(peek());
                ++pos_;
                explicit_bounds_[j] = 1;
                model_.cols[j].lb = lo;
                if (peek() == "<=") {
                    ++pos_;
                    model_.cols[j].ub = parse_signed_number();
                }
                continue;
            }
            int j = col_of(peek());
            ++pos_;
            explicit_bounds_[j] = 1;
            std::string op = lower(peek());
            if (op == "free") {
                ++pos_;
                model_.cols[j].lb = -kInf;
                model_.cols[j].ub = kInf;
            } else if (op == "<=") {
                ++pos_;
                model_.cols[j].ub = parse_signed_number();
            } else if (op == ">=") {
                ++pos_;
                model_.cols[j].lb = parse_signed_number();
            } else if (op == "=") {
                ++pos_;
                double vv = parse_signed_number();
                model_.cols[j].lb = vv;
                model_.cols[j].ub = vv;
            } else {
                throw std::runtime_error("lp parse: bad bound near '" + peek() + "'");
            }
        }
    }

    void parse_binaries() {
        while (pos_ < lex_.toks.size() && !at_section_keyword()) {
            double v;
            if (as_number(peek(), v))
                throw std::runtime_error("lp parse: number in binaries section");
            int j = col_of(peek());
            ++pos_;
            model_.cols[j].binary = true;
        }
    }
};

}  // namespace

MilpModel parse_lp_string(const std::string& text) { return Parser(text).run(); }

MilpModel parse_lp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("lp parse: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    MilpModel m = parse_lp_string(buf.str());
    if (m.name.empty()) {
        auto slash = path.find_last_of('/');
        m.name = slash == std::string::npos ? path : path.substr(slash + 1);
    }
    return m;
}

}  // namespace evsched::milp
