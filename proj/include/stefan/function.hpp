#pragma once

// Data functions of one variable (time or space) and of (x, t). Each is one of:
//   - a polynomial, integrated exactly;
//   - dense samples with linear interpolation, integrated exactly;
//   - an arbitrary callable, integrated adaptively to 1e-10 relative tolerance,
//     or exactly when an antiderivative is supplied.

#include "stefan/error.hpp"
#include "stefan/polynomial.hpp"
#include "stefan/quadrature.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stefan {

inline constexpr double kDataQuadratureTol = 1e-10;

/// Continuous piecewise-linear function through (knots[i], values[i]),
/// extended by constants outside the knot range.
struct PiecewiseLinear {
    std::vector<double> knots;
    std::vector<double> values;

    PiecewiseLinear() = default;
    PiecewiseLinear(std::vector<double> t, std::vector<double> v) : knots(std::move(t)), values(std::move(v)) {
        if (knots.size() != values.size() || knots.size() < 2)
            throw PreconditionError("piecewise-linear function needs >= 2 matching knots and values");
        for (std::size_t i = 1; i < knots.size(); ++i)
            if (!(knots[i] > knots[i - 1])) throw PreconditionError("piecewise-linear knots must increase");
    }

    double operator()(double t) const {
        if (t <= knots.front()) return values.front();
        if (t >= knots.back()) return values.back();
        auto it = std::upper_bound(knots.begin(), knots.end(), t);
        auto j = static_cast<std::size_t>(it - knots.begin());
        double w = (t - knots[j - 1]) / (knots[j] - knots[j - 1]);
        return values[j - 1] + w * (values[j] - values[j - 1]);
    }

    /// Exact integral over [a, b].
    double integrate(double a, double b) const {
        if (b < a) return -integrate(b, a);
        if (b == a) return 0.0;
        // Breakpoints inside (a, b) split the integral into linear pieces.
        std::vector<double> pts{a};
        for (double k : knots)
            if (k > a && k < b) pts.push_back(k);
        pts.push_back(b);
        double s = 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i)
            s += 0.5 * (pts[i] - pts[i - 1]) * ((*this)(pts[i - 1]) + (*this)(pts[i]));
        return s;
    }
};

class ScalarFunction {
public:
    enum class Kind { polynomial, samples, callable };

    ScalarFunction() : ScalarFunction(Polynomial{}) {}
    ScalarFunction(Polynomial p) : kind_(Kind::polynomial), poly_(std::move(p)) {  // NOLINT
        coeffs_ = poly_.dense();
    }
    ScalarFunction(PiecewiseLinear s) : kind_(Kind::samples), samples_(std::move(s)) {}  // NOLINT
    ScalarFunction(std::function<double(double)> f, std::string label = "callable")
        : kind_(Kind::callable), fn_(std::move(f)), label_(std::move(label)) {}
    ScalarFunction(std::function<double(double)> f, std::function<double(double)> antiderivative, std::string label)
        : kind_(Kind::callable), fn_(std::move(f)), primitive_(std::move(antiderivative)), label_(std::move(label)) {}

    static ScalarFunction constant(double c) { return ScalarFunction(Polynomial::constant(c)); }

    Kind kind() const { return kind_; }
    const Polynomial& polynomial() const { return poly_; }
    const PiecewiseLinear& samples() const { return samples_; }
    const std::string& label() const { return label_; }

    bool is_constant() const { return kind_ == Kind::polynomial && coeffs_.size() == 1; }
    /// Degree of a polynomial function, -1 otherwise.
    int polynomial_degree() const { return kind_ == Kind::polynomial ? static_cast<int>(coeffs_.size()) - 1 : -1; }
    const std::vector<double>& coefficients() const { return coeffs_; }

    double operator()(double t) const {
        switch (kind_) {
        case Kind::polynomial: {
            double s = 0.0;
            for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) s = s * t + *it;
            return s;
        }
        case Kind::samples:
            return samples_(t);
        case Kind::callable:
            return fn_(t);
        }
        return 0.0;
    }

    double integrate(double a, double b) const {
        switch (kind_) {
        case Kind::polynomial:
            return poly_.integrate(a, b);
        case Kind::samples:
            return samples_.integrate(a, b);
        case Kind::callable:
            if (primitive_) return primitive_(b) - primitive_(a);
            return adaptive_integrate(fn_, a, b, kDataQuadratureTol, label_);
        }
        return 0.0;
    }

    double average(double a, double b) const { return integrate(a, b) / (b - a); }

private:
    Kind kind_;
    Polynomial poly_;
    std::vector<double> coeffs_;
    PiecewiseLinear samples_;
    std::function<double(double)> fn_;
    std::function<double(double)> primitive_;
    std::string label_;
};

/// Function of (x, t).
class FieldFunction {
public:
    FieldFunction() : FieldFunction(Polynomial{}) {}
    FieldFunction(Polynomial p) : poly_(std::move(p)) {}  // NOLINT
    FieldFunction(std::function<double(double, double)> f, std::string label = "callable")
        : fn_(std::move(f)), label_(std::move(label)) {}

    static FieldFunction constant(double c) { return FieldFunction(Polynomial::constant(c)); }

    bool is_polynomial() const { return !fn_; }
    const Polynomial& polynomial() const { return poly_; }

    double operator()(double x, double t) const { return fn_ ? fn_(x, t) : poly_(x, t); }

    double integrate(double x0, double x1, double t0, double t1) const {
        if (!fn_) return poly_.integrate(x0, x1, t0, t1);
        return adaptive_integrate_2d(fn_, x0, x1, t0, t1, kDataQuadratureTol, label_);
    }

private:
    Polynomial poly_;
    std::function<double(double, double)> fn_;
    std::string label_;
};

} // namespace stefan
