#include "wdst/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "wdst/errors.hpp"

namespace wdst {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double inf_norm(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), bisection when
// the interpolant is degenerate or lands too close to an endpoint.
double cubic_step(double a, double fa, double da, double b, double fb, double db) {
    const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - da * db;
    double t = 0.5 * (a + b);
    if (disc >= 0.0) {
        const double d2 = (b > a ? 1.0 : -1.0) * std::sqrt(disc);
        const double denom = db - da + 2.0 * d2;
        if (denom != 0.0) t = b - (b - a) * (db + d2 - d1) / denom;
    }
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double margin = 0.1 * (hi - lo);
    if (!std::isfinite(t) || t < lo + margin || t > hi - margin) t = 0.5 * (a + b);
    return t;
}

}  // namespace

LbfgsResult lbfgs_minimize(const LbfgsObjective& objective, std::vector<double> x0,
                           const LbfgsOptions& options) {
    if (x0.empty()) throw ContractError("lbfgs_minimize needs at least one variable");
    if (options.memory < 1 || options.max_iterations < 0)
        throw ContractError("lbfgs options out of range");

    const std::size_t n = x0.size();
    LbfgsResult result;
    std::vector<double> x = std::move(x0);
    std::vector<double> g(n);
    double f = objective(x, g);
    if (!std::isfinite(f)) throw ContractError("objective is not finite at the starting point");

    std::vector<double> best_x = x;
    double best_f = f;

    result.trace.push_back({0, f, inf_norm(g), 0.0, true});

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;

    std::vector<double> d(n), x_trial(n), g_trial(n);

    auto evaluate = [&](double alpha, double& f_out, double& dphi_out) {
        for (std::size_t i = 0; i < n; ++i) x_trial[i] = x[i] + alpha * d[i];
        f_out = objective(x_trial, g_trial);
        dphi_out = dot(g_trial, d);
        if (std::isfinite(f_out) && f_out < best_f) {
            best_f = f_out;
            best_x = x_trial;
        }
    };

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        if (inf_norm(g) < options.grad_tol) {
            result.converged = true;
            break;
        }

        // two-loop recursion for d = -H g
        d = g;
        std::vector<double> alpha_coef(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;) {
            alpha_coef[i] = rho_hist[i] * dot(s_hist[i], d);
            for (std::size_t k = 0; k < n; ++k) d[k] -= alpha_coef[i] * y_hist[i][k];
        }
        if (!s_hist.empty()) {
            const double gamma =
                dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
            for (auto& v : d) v *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * dot(y_hist[i], d);
            for (std::size_t k = 0; k < n; ++k) d[k] += (alpha_coef[i] - beta) * s_hist[i][k];
        }
        for (auto& v : d) v = -v;

        double dphi0 = dot(g, d);
        if (dphi0 >= 0.0) {
            // numerical breakdown of the curvature model: restart from steepest descent
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
            dphi0 = dot(g, d);
            if (dphi0 >= 0.0) {
                result.converged = true;  // gradient is numerically zero
                break;
            }
        }

        // strong Wolfe line search: bracket then zoom (cubic interpolation)
        const double phi0 = f;
        int evals = 0;
        double accepted_alpha = -1.0, accepted_f = 0.0;
        bool have_bracket = false;
        double alo = 0.0, flo = phi0, dlo = dphi0;
        double ahi = 0.0, fhi = 0.0, dhi = 0.0;

        double alpha = (iter == 1 && s_hist.empty()) ? std::min(1.0, 1.0 / inf_norm(g)) : 1.0;
        double alpha_prev = 0.0, f_prev = phi0, dphi_prev = dphi0;

        while (evals < options.max_line_search_evals) {
            double ft, dphit;
            evaluate(alpha, ft, dphit);
            ++evals;
            const bool armijo_fail =
                !std::isfinite(ft) || ft > phi0 + options.wolfe_c1 * alpha * dphi0 ||
                (evals > 1 && ft >= f_prev);
            if (armijo_fail) {
                alo = alpha_prev; flo = f_prev; dlo = dphi_prev;
                ahi = alpha; fhi = std::isfinite(ft) ? ft : std::numeric_limits<double>::max();
                dhi = dphit;
                have_bracket = true;
                break;
            }
            if (std::abs(dphit) <= -options.wolfe_c2 * dphi0) {
                accepted_alpha = alpha;
                accepted_f = ft;
                break;
            }
            if (dphit >= 0.0) {
                alo = alpha; flo = ft; dlo = dphit;
                ahi = alpha_prev; fhi = f_prev; dhi = dphi_prev;
                have_bracket = true;
                break;
            }
            alpha_prev = alpha; f_prev = ft; dphi_prev = dphit;
            alpha *= 2.0;
        }

        while (have_bracket && accepted_alpha < 0.0 && evals < options.max_line_search_evals) {
            const double aj = cubic_step(alo, flo, dlo, ahi, fhi, dhi);
            double fj, dphij;
            evaluate(aj, fj, dphij);
            ++evals;
            if (!std::isfinite(fj) || fj > phi0 + options.wolfe_c1 * aj * dphi0 || fj >= flo) {
                ahi = aj; fhi = std::isfinite(fj) ? fj : std::numeric_limits<double>::max();
                dhi = dphij;
            } else {
                if (std::abs(dphij) <= -options.wolfe_c2 * dphi0) {
                    accepted_alpha = aj;
                    accepted_f = fj;
                    break;
                }
                if (dphij * (ahi - alo) >= 0.0) {
                    ahi = alo; fhi = flo; dhi = dlo;
                }
                alo = aj; flo = fj; dlo = dphij;
            }
            if (std::abs(ahi - alo) < 1e-16 * std::max(1.0, std::abs(alo))) break;
        }

        if (accepted_alpha < 0.0) {
            result.line_search_failed = true;
            result.trace.push_back({iter, f, inf_norm(g), 0.0, false});
            break;
        }

        // accepted point: x_trial/g_trial hold the state at accepted_alpha
        for (std::size_t k = 0; k < n; ++k) x_trial[k] = x[k] + accepted_alpha * d[k];
        std::vector<double> s(n), y(n);
        for (std::size_t k = 0; k < n; ++k) {
            s[k] = x_trial[k] - x[k];
            y[k] = g_trial[k] - g[k];
        }
        const double sy = dot(s, y);
        if (sy > 1e-14 * std::sqrt(dot(s, s)) * std::sqrt(dot(y, y))) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > options.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x = x_trial;
        g = g_trial;
        f = accepted_f;
        result.iterations = iter;
        result.trace.push_back({iter, f, inf_norm(g), accepted_alpha, true});
    }

    if (!result.line_search_failed && inf_norm(g) < options.grad_tol) result.converged = true;

    if (result.line_search_failed && best_f < f) {
        result.x = best_x;
        result.f = best_f;
    } else {
        result.x = x;
        result.f = f;
    }
    return result;
}

}  // namespace wdst
