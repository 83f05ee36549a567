#pragma once

// Sparse polynomials in up to two variables plus a small expression parser
// ("3*x^2*t - 0.5*(t + 1)^2"). Used for closed-form coefficients and data so
// that Steklov averages and Kirchhoff integrals can be taken exactly.

#include "stefan/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stefan {

class Polynomial {
public:
    using Exponents = std::pair<int, int>;

    Polynomial() = default;

    static Polynomial constant(double c) {
        Polynomial p;
        p.add_term(c, 0, 0);
        return p;
    }

    /// Dense univariate polynomial, coeffs[i] multiplies x^i.
    static Polynomial univariate(const std::vector<double>& coeffs) {
        Polynomial p;
        for (std::size_t i = 0; i < coeffs.size(); ++i) p.add_term(coeffs[i], static_cast<int>(i), 0);
        return p;
    }

    static Polynomial variable(int which) {
        Polynomial p;
        p.add_term(1.0, which == 0 ? 1 : 0, which == 1 ? 1 : 0);
        return p;
    }

    void add_term(double coef, int px, int py) {
        if (coef == 0.0) return;
        auto& c = terms_[{px, py}];
        c += coef;
        if (c == 0.0) terms_.erase({px, py});
    }

    const std::map<Exponents, double>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int degree(int var) const {
        int d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, var == 0 ? e.first : e.second);
        return d;
    }

    bool depends_on(int var) const { return degree(var) > 0; }

    bool is_constant() const { return degree(0) == 0 && degree(1) == 0; }

    double constant_term() const {
        auto it = terms_.find({0, 0});
        return it == terms_.end() ? 0.0 : it->second;
    }

    double operator()(double x, double y = 0.0) const {
        double s = 0.0;
        for (const auto& [e, c] : terms_) s += c * ipow(x, e.first) * ipow(y, e.second);
        return s;
    }

    /// Univariate coefficients in the first variable (requires no dependence on the second).
    std::vector<double> dense() const {
        std::vector<double> out(static_cast<std::size_t>(degree(0)) + 1, 0.0);
        for (const auto& [e, c] : terms_) {
            if (e.second != 0) throw PreconditionError("polynomial depends on a second variable");
            out[static_cast<std::size_t>(e.first)] += c;
        }
        return out;
    }

    Polynomial derivative(int var) const {
        Polynomial d;
        for (const auto& [e, c] : terms_) {
            int p = var == 0 ? e.first : e.second;
            if (p == 0) continue;
            if (var == 0) d.add_term(c * p, e.first - 1, e.second);
            else d.add_term(c * p, e.first, e.second - 1);
        }
        return d;
    }

    /// Antiderivative in `var` vanishing at zero.
    Polynomial antiderivative(int var) const {
        Polynomial a;
        for (const auto& [e, c] : terms_) {
            if (var == 0) a.add_term(c / (e.first + 1), e.first + 1, e.second);
            else a.add_term(c / (e.second + 1), e.first, e.second + 1);
        }
        return a;
    }

    /// Exact integral of a univariate polynomial over [a, b].
    double integrate(double a, double b) const {
        double s = 0.0;
        for (const auto& [e, c] : terms_) {
            if (e.second != 0) throw PreconditionError("polynomial depends on a second variable");
            int p = e.first + 1;
            s += c * (ipow(b, p) - ipow(a, p)) / p;
        }
        return s;
    }

    /// Exact integral over the rectangle [x0,x1] x [y0,y1].
    double integrate(double x0, double x1, double y0, double y1) const {
        double s = 0.0;
        for (const auto& [e, c] : terms_) {
            int px = e.first + 1;
            int py = e.second + 1;
            s += c * (ipow(x1, px) - ipow(x0, px)) / px * (ipow(y1, py) - ipow(y0, py)) / py;
        }
        return s;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) {
        for (const auto& [e, c] : b.terms_) a.add_term(c, e.first, e.second);
        return a;
    }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) {
        for (const auto& [e, c] : b.terms_) a.add_term(-c, e.first, e.second);
        return a;
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        Polynomial r;
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_)
                r.add_term(ca * cb, ea.first + eb.first, ea.second + eb.second);
        return r;
    }
    friend Polynomial operator*(double s, Polynomial a) {
        for (auto& [e, c] : a.terms_) c *= s;
        if (s == 0.0) a.terms_.clear();
        return a;
    }

    Polynomial pow(int k) const {
        Polynomial r = constant(1.0);
        for (int i = 0; i < k; ++i) r = r * *this;
        return r;
    }

    static double ipow(double x, int p) {
        double r = 1.0;
        double b = x;
        while (p > 0) {
            if (p & 1) r *= b;
            b *= b;
            p >>= 1;
        }
        return r;
    }

private:
    std::map<Exponents, double> terms_;
};

namespace detail {

class PolynomialParser {
public:
    PolynomialParser(std::string_view text, std::vector<std::string> vars)
        : text_(text), vars_(std::move(vars)) {}

    Polynomial parse() {
        Polynomial p = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
        return p;
    }

private:
    Polynomial expr() {
        Polynomial acc = term();
        for (;;) {
            skip_ws();
            if (eat('+')) acc = acc + term();
            else if (eat('-')) acc = acc - term();
            else return acc;
        }
    }

    Polynomial term() {
        Polynomial acc = unary();
        for (;;) {
            skip_ws();
            if (eat('*')) acc = acc * unary();
            else if (peek() == '/') {
                ++pos_;
                skip_ws();
                double d = number();
                if (d == 0.0) fail("division by zero");
                acc = (1.0 / d) * acc;
            } else return acc;
        }
    }

    Polynomial unary() {
        skip_ws();
        if (eat('-')) return -1.0 * unary();
        if (eat('+')) return unary();
        return power();
    }

    Polynomial power() {
        Polynomial base = primary();
        skip_ws();
        if (eat('^')) {
            skip_ws();
            double e = number();
            if (e < 0 || e != std::floor(e) || e > 64) fail("exponent must be a small non-negative integer");
            return base.pow(static_cast<int>(e));
        }
        return base;
    }

    Polynomial primary() {
        skip_ws();
        if (eat('(')) {
            Polynomial p = expr();
            skip_ws();
            if (!eat(')')) fail("expected ')'");
            return p;
        }
        char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return Polynomial::constant(number());
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string name(text_.substr(start, pos_ - start));
            for (std::size_t i = 0; i < vars_.size(); ++i)
                if (vars_[i] == name) return Polynomial::variable(static_cast<int>(i));
            pos_ = start;
            fail("unknown variable '" + name + "'");
        }
        fail("expected number, variable or '('");
    }

    double number() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                text_[pos_] == 'e' || text_[pos_] == 'E' ||
                ((text_[pos_] == '-' || text_[pos_] == '+') && pos_ > start &&
                 (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
            ++pos_;
        if (start == pos_) fail("expected number");
        std::string tok(text_.substr(start, pos_ - start));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            pos_ = start;
            fail("malformed number '" + tok + "'");
        }
        if (used != tok.size()) {
            pos_ = start;
            fail("malformed number '" + tok + "'");
        }
        return v;
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    bool eat(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("expression \"" + std::string(text_) + "\" at offset " + std::to_string(pos_) +
                          ": " + msg);
    }

    std::string_view text_;
    std::vector<std::string> vars_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Parses a polynomial expression; `vars` names the variables in order (at most two).
inline Polynomial parse_polynomial(std::string_view text, std::vector<std::string> vars) {
    if (vars.size() > 2) throw PreconditionError("at most two polynomial variables are supported");
    return detail::PolynomialParser(text, std::move(vars)).parse();
}

} // namespace stefan
