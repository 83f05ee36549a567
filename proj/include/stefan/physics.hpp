#pragma once

// Transformed multiphase problem: the Kirchhoff map v = F(u), the enthalpy b(v)
// with prescribed jumps at the phase values v^j, and its mollification b_eps.

#include "stefan/error.hpp"
#include "stefan/function.hpp"
#include "stefan/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace stefan {

/// Physical coefficients of a material with J phase transitions.
///
/// Segment s (0-based) is (-inf, u^1] for s = 0, [u^s, u^{s+1}] in between and
/// [u^J, +inf) for s = J. With no transitions there is one segment and the
/// Kirchhoff map is anchored at `reference_temp`.
struct PhaseSpec {
    std::vector<double> critical_temps;
    std::vector<double> latent_heats;
    std::vector<ScalarFunction> alpha_pieces;
    std::vector<ScalarFunction> k_pieces;
    double reference_temp = 0.0;
    /// Analytic lower bound of b' if known; preferred over the sampled bound.
    std::optional<double> bbar;

    std::size_t transitions() const { return critical_temps.size(); }
    std::size_t segments() const { return critical_temps.size() + 1; }
    double anchor() const { return critical_temps.empty() ? reference_temp : critical_temps.front(); }

    /// Segment containing u (points on a boundary belong to the upper segment).
    std::size_t segment_of(double u) const {
        return static_cast<std::size_t>(std::upper_bound(critical_temps.begin(), critical_temps.end(), u) -
                                        critical_temps.begin());
    }

    double alpha(double u) const { return alpha_pieces[segment_of(u)](u); }
    double k(double u) const { return k_pieces[segment_of(u)](u); }

    /// Sample temperatures covering segment s, including far tails for the unbounded ones.
    std::vector<double> sample_segment(std::size_t s, int interior = 64) const {
        const double lo_t = critical_temps.empty() ? reference_temp : critical_temps.front();
        const double hi_t = critical_temps.empty() ? reference_temp : critical_temps.back();
        const double span = std::max(1.0, hi_t - lo_t);
        std::vector<double> pts;
        const bool has_lo = s > 0;
        const bool has_hi = s < critical_temps.size();
        const double lo = has_lo ? critical_temps[s - 1] : (has_hi ? critical_temps[s] : reference_temp) - span;
        const double hi = has_hi ? critical_temps[s] : (has_lo ? critical_temps[s - 1] : reference_temp) + span;
        for (int i = 0; i <= interior; ++i) pts.push_back(lo + (hi - lo) * i / interior);
        for (double mult : {1.0, 10.0, 100.0, 1e3, 1e4}) {
            if (!has_lo) pts.push_back(lo - mult * span);
            if (!has_hi) pts.push_back(hi + mult * span);
        }
        std::sort(pts.begin(), pts.end());
        return pts;
    }

    void validate() const {
        const std::size_t J = critical_temps.size();
        if (latent_heats.size() != J)
            throw ConfigError("phase spec: " + std::to_string(J) + " critical temperatures but " +
                              std::to_string(latent_heats.size()) + " latent heats");
        if (alpha_pieces.size() != J + 1 || k_pieces.size() != J + 1)
            throw ConfigError("phase spec: expected " + std::to_string(J + 1) +
                              " alpha and k pieces (one per segment)");
        for (std::size_t j = 0; j < J; ++j) {
            if (!std::isfinite(critical_temps[j])) throw ConfigError("phase spec: non-finite critical temperature");
            if (j > 0 && !(critical_temps[j] > critical_temps[j - 1]))
                throw ConfigError("phase spec: critical temperatures must be strictly increasing");
            if (!(latent_heats[j] > 0.0))
                throw ConfigError("phase spec: latent heat " + std::to_string(j + 1) + " must be positive");
        }
        for (std::size_t s = 0; s <= J; ++s) {
            for (double u : sample_segment(s)) {
                const double a = alpha_pieces[s](u);
                const double k = k_pieces[s](u);
                if (!(a > 0.0) || !(k > 0.0))
                    throw ConfigError("phase spec: alpha and k must be positive on segment " + std::to_string(s) +
                                      " (violated at u = " + std::to_string(u) + ")");
            }
        }
        // liminf alpha/k >= a_0 > 0 at +inf, checked on the sampled tail.
        const double hi = (J == 0 ? reference_temp : critical_temps.back());
        double tail_min = std::numeric_limits<double>::infinity();
        for (double mult : {10.0, 100.0, 1e3, 1e4, 1e5}) {
            const double u = hi + mult * std::max(1.0, std::abs(hi));
            tail_min = std::min(tail_min, alpha_pieces[J](u) / k_pieces[J](u));
        }
        if (!(tail_min > 1e-8))
            throw ConfigError("phase spec: alpha/k must stay bounded away from zero as u -> +inf");
        if (bbar && !(*bbar > 0.0)) throw ConfigError("phase spec: analytic bbar must be positive");
    }
};

namespace detail {

inline double integrate_piece(const ScalarFunction& f, double a, double b, const std::string& label) {
    if (f.kind() == ScalarFunction::Kind::callable)
        return adaptive_integrate([&](double y) { return f(y); }, a, b, 1e-12, label);
    return f.integrate(a, b);
}

} // namespace detail

/// The Kirchhoff transform F(u) = int_{u^1}^u k(y) dy and its inverse.
class KirchhoffMap {
public:
    explicit KirchhoffMap(PhaseSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        const std::size_t J = spec_.transitions();
        base_u_.resize(J + 1);
        base_v_.resize(J + 1);
        base_u_[0] = spec_.anchor();
        base_v_[0] = 0.0;
        for (std::size_t s = 1; s <= J; ++s) {
            base_u_[s] = spec_.critical_temps[s - 1];
            base_v_[s] = base_v_[s - 1] +
                         detail::integrate_piece(spec_.k_pieces[s - 1], base_u_[s - 1], base_u_[s],
                                                 "k segment " + std::to_string(s - 1));
        }
        phase_values_.assign(base_v_.begin() + 1, base_v_.end());
    }

    const PhaseSpec& spec() const { return spec_; }
    /// v^j = F(u^j); v^1 = 0.
    const std::vector<double>& phase_values() const { return phase_values_; }

    std::size_t segment_of_v(double v) const {
        return static_cast<std::size_t>(std::upper_bound(phase_values_.begin(), phase_values_.end(), v) -
                                        phase_values_.begin());
    }

    double operator()(double u) const { return in_segment(u, spec_.segment_of(u)); }

    /// F(u) evaluated with the coefficient of segment s.
    double in_segment(double u, std::size_t s) const {
        const auto& k = spec_.k_pieces[s];
        if (k.is_constant()) return base_v_[s] + k.coefficients()[0] * (u - base_u_[s]);
        return base_v_[s] + detail::integrate_piece(k, base_u_[s], u, "k segment " + std::to_string(s));
    }

    double inverse(double v) const { return inverse_in_segment(v, segment_of_v(v)); }

    double inverse_in_segment(double v, std::size_t s) const {
        const auto& k = spec_.k_pieces[s];
        const double rhs = v - base_v_[s];
        const double ub = base_u_[s];
        if (k.is_constant()) return ub + rhs / k.coefficients()[0];
        double guess = ub;
        if (k.polynomial_degree() == 1) {
            // k(u) = c0 + c1 u, shifted to the base point: k = a + c1 (u - ub).
            const double c1 = k.coefficients()[1];
            const double a = k(ub);
            const double disc = std::max(0.0, a * a + 2.0 * c1 * rhs);
            const double root = std::sqrt(disc);
            guess = ub + (a >= 0.0 ? 2.0 * rhs / (a + root) : (root - a) / c1);
        }
        return polish_inverse(v, s, guess);
    }

private:
    double polish_inverse(double v, std::size_t s, double guess) const {
        const auto& k = spec_.k_pieces[s];
        auto resid = [&](double u) { return in_segment(u, s) - v; };
        // k here is the segment-s branch, also used outside the segment while iterating.
        const double scale = std::max(1.0, std::abs(v));
        double r = resid(guess);
        if (std::abs(r) <= 1e-14 * scale) return guess;
        // Bracket: F is increasing, so walk away from the guess with doubling steps.
        double lo = guess;
        double hi = guess;
        double step = std::max(1e-3, 1e-3 * std::abs(guess));
        if (r > 0.0) {
            for (int i = 0; i < 200 && resid(lo) > 0.0; ++i, step *= 2.0) lo -= step;
        } else {
            for (int i = 0; i < 200 && resid(hi) < 0.0; ++i, step *= 2.0) hi += step;
        }
        double u = guess;
        for (int it = 0; it < 200; ++it) {
            r = resid(u);
            if (std::abs(r) <= 1e-14 * scale) return u;
            if (r > 0.0) hi = u;
            else lo = u;
            double next = u - r / k(u);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) return next;
            u = next;
        }
        return u;
    }

    PhaseSpec spec_;
    std::vector<double> base_u_;
    std::vector<double> base_v_;
    std::vector<double> phase_values_;
};

inline double kirchhoff_transform(double u, const PhaseSpec& spec) { return KirchhoffMap(spec)(u); }
inline double inverse_kirchhoff(double v, const PhaseSpec& spec) { return KirchhoffMap(spec).inverse(v); }

/// Monotone enthalpy b(v) = int_0^v beta + sum_{v^j < v} gamma_j with beta = alpha/k o F^{-1}.
/// Normalised so that b(0^-) = 0.
class EnthalpyFunction {
public:
    explicit EnthalpyFunction(PhaseSpec spec) : map_(std::move(spec)) {
        const auto& sp = map_.spec();
        const std::size_t S = sp.segments();
        base_b_.resize(S);
        affine_.resize(S);
        slope_.resize(S);
        base_b_[0] = 0.0;
        for (std::size_t s = 1; s < S; ++s) {
            const double u0 = s == 1 ? sp.anchor() : sp.critical_temps[s - 2];
            const double u1 = sp.critical_temps[s - 1];
            base_b_[s] = base_b_[s - 1] + sp.latent_heats[s - 1] +
                         detail::integrate_piece(sp.alpha_pieces[s - 1], u0, u1,
                                                 "alpha segment " + std::to_string(s - 1));
        }
        // Segment 0 is anchored at its upper end u^1 (or the reference temperature).
        for (std::size_t s = 0; s < S; ++s) {
            affine_[s] = sp.alpha_pieces[s].is_constant() && sp.k_pieces[s].is_constant();
            if (affine_[s]) slope_[s] = sp.alpha_pieces[s].coefficients()[0] / sp.k_pieces[s].coefficients()[0];
        }
        double sampled = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < S; ++s) {
            for (double u : sp.sample_segment(s, 256)) {
                const double beta = sp.alpha_pieces[s](u) / sp.k_pieces[s](u);
                if (!(beta > 0.0))
                    throw ConfigError("enthalpy: beta must be positive (segment " + std::to_string(s) + ")");
                sampled = std::min(sampled, beta);
            }
        }
        sampled_bbar_ = 0.99 * sampled;
        bbar_ = sp.bbar ? *sp.bbar : sampled_bbar_;
    }

    const PhaseSpec& spec() const { return map_.spec(); }
    const KirchhoffMap& kirchhoff() const { return map_; }
    const std::vector<double>& phase_values() const { return map_.phase_values(); }
    const std::vector<double>& jumps() const { return map_.spec().latent_heats; }
    double bbar() const { return bbar_; }
    double sampled_bbar() const { return sampled_bbar_; }

    /// Segment of v; a phase value itself belongs to the lower segment (left limit).
    std::size_t segment_of(double v) const {
        const auto& pv = phase_values();
        return static_cast<std::size_t>(std::lower_bound(pv.begin(), pv.end(), v) - pv.begin());
    }

    bool affine_segment(std::size_t s) const { return affine_[s]; }

    double operator()(double v) const { return in_segment(v, segment_of(v)); }
    double beta(double v) const { return beta_in_segment(v, segment_of(v)); }

    /// b evaluated with the smooth branch of segment s (one-sided limits at its ends).
    double in_segment(double v, std::size_t s) const {
        const double vb = s == 0 ? 0.0 : phase_values()[s - 1];
        if (affine_[s]) return base_b_[s] + slope_[s] * (v - vb);
        const auto& sp = map_.spec();
        const double ub = s == 0 ? sp.anchor() : sp.critical_temps[s - 1];
        const double u = map_.inverse_in_segment(v, s);
        return base_b_[s] + detail::integrate_piece(sp.alpha_pieces[s], ub, u, "alpha segment " + std::to_string(s));
    }

    double beta_in_segment(double v, std::size_t s) const {
        if (affine_[s]) return slope_[s];
        const auto& sp = map_.spec();
        const double u = map_.inverse_in_segment(v, s);
        return sp.alpha_pieces[s](u) / sp.k_pieces[s](u);
    }

private:
    KirchhoffMap map_;
    std::vector<double> base_b_;
    std::vector<char> affine_;
    std::vector<double> slope_;
    double bbar_ = 0.0;
    double sampled_bbar_ = 0.0;
};

inline EnthalpyFunction build_enthalpy(const PhaseSpec& spec) { return EnthalpyFunction(spec); }

/// Unnormalised bump exp(-1 / (1 - s^2)) on (-1, 1).
inline double bump(double s) {
    const double q = 1.0 - s * s;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

/// Normalisation constant C with int C exp(-1/(1-s^2)) ds = 1, by composite Gauss-Legendre.
inline double mollifier_constant() {
    static const double c = [] {
        const QuadratureRule rule = gauss_legendre(32);
        const int panels = 8;
        double total = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double a = -1.0 + 2.0 * p / panels;
            const double b = a + 2.0 / panels;
            for (std::size_t j = 0; j < rule.size(); ++j)
                total += 0.5 * (b - a) * rule.weights[j] * bump(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[j]);
        }
        return 1.0 / total;
    }();
    return c;
}

struct EnthalpyValue {
    double value;
    double derivative;
};

/// b_eps(v) = int b(y) omega_eps(v - y) dy with the standard bump kernel of radius eps.
class MollifiedEnthalpy {
public:
    static constexpr int kDefaultOrder = 64;

    MollifiedEnthalpy(std::shared_ptr<const EnthalpyFunction> base, double eps, int order = kDefaultOrder)
        : base_(std::move(base)), eps_(eps), rule_(gauss_legendre(order)) {
        if (!base_) throw PreconditionError("mollify: null enthalpy");
        if (!(eps > 0.0) || !std::isfinite(eps)) throw PreconditionError("mollify: epsilon must be positive");
        if (order < 32) throw PreconditionError("mollify: quadrature order must be >= 32");
        kernel_weights_.resize(rule_.size());
        double total = 0.0;
        for (std::size_t j = 0; j < rule_.size(); ++j) {
            kernel_weights_[j] = rule_.weights[j] * bump(rule_.nodes[j]);
            total += kernel_weights_[j];
        }
        for (double& w : kernel_weights_) w /= total;
    }

    const EnthalpyFunction& base() const { return *base_; }
    std::shared_ptr<const EnthalpyFunction> base_ptr() const { return base_; }
    double epsilon() const { return eps_; }
    double bbar() const { return base_->bbar(); }

    /// omega_eps(z)
    double kernel(double z) const { return mollifier_constant() / eps_ * bump(z / eps_); }

    EnthalpyValue evaluate(double v) const {
        const auto& b = *base_;
        const auto& pv = b.phase_values();
        // Jumps strictly inside the window (v - eps, v + eps).
        auto first = std::upper_bound(pv.begin(), pv.end(), v - eps_);
        auto last = std::lower_bound(pv.begin(), pv.end(), v + eps_);
        if (first == last) {
            const std::size_t s = b.segment_of(v);
            if (b.affine_segment(s)) return {b.in_segment(v, s), b.beta_in_segment(v, s)};
            double val = 0.0;
            double der = 0.0;
            for (std::size_t j = 0; j < rule_.size(); ++j) {
                const double y = v - eps_ * rule_.nodes[j];
                val += kernel_weights_[j] * b.in_segment(y, s);
                der += kernel_weights_[j] * b.beta_in_segment(y, s);
            }
            return {val, der};
        }
        // Split the window at each jump; integrate every smooth piece separately in s = (v - y)/eps.
        std::vector<double> cuts{-1.0};
        for (auto it = last; it != first;) {
            --it;
            cuts.push_back((v - *it) / eps_);
        }
        cuts.push_back(1.0);
        double val = 0.0;
        double der = 0.0;
        double mass = 0.0;
        for (std::size_t p = 1; p < cuts.size(); ++p) {
            const double sa = cuts[p - 1];
            const double sb = cuts[p];
            if (!(sb > sa)) continue;
            const double mid_y = v - eps_ * 0.5 * (sa + sb);
            const std::size_t seg = b.segment_of(mid_y);
            const double half = 0.5 * (sb - sa);
            for (std::size_t j = 0; j < rule_.size(); ++j) {
                const double s = 0.5 * (sa + sb) + half * rule_.nodes[j];
                const double w = half * rule_.weights[j] * bump(s);
                const double y = v - eps_ * s;
                mass += w;
                val += w * b.in_segment(y, seg);
                der += w * b.beta_in_segment(y, seg);
            }
        }
        val /= mass;
        der /= mass;
        for (auto it = first; it != last; ++it) {
            const auto j = static_cast<std::size_t>(it - pv.begin());
            der += b.jumps()[j] * kernel(v - *it);
        }
        return {val, der};
    }

    double operator()(double v) const { return evaluate(v).value; }
    double derivative(double v) const { return evaluate(v).derivative; }

private:
    std::shared_ptr<const EnthalpyFunction> base_;
    double eps_;
    QuadratureRule rule_;
    std::vector<double> kernel_weights_;
};

inline MollifiedEnthalpy mollify(std::shared_ptr<const EnthalpyFunction> b, double eps) {
    return MollifiedEnthalpy(std::move(b), eps);
}

inline MollifiedEnthalpy mollify(const EnthalpyFunction& b, double eps) {
    return MollifiedEnthalpy(std::make_shared<const EnthalpyFunction>(b), eps);
}

} // namespace stefan
