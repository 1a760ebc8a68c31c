#pragma once

#include <functional>
#include <vector>

namespace wdst {

struct LbfgsOptions {
    int memory = 10;
    int max_iterations = 100;
    double grad_tol = 1e-6;  // on the gradient infinity norm
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    int max_line_search_evals = 40;
};

struct LbfgsIteration {
    int iteration = 0;
    double f = 0.0;
    double grad_inf_norm = 0.0;
    double step = 0.0;
    bool line_search_ok = true;
};

struct LbfgsResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;           // grad_tol reached
    bool line_search_failed = false;  // stopped early, best-so-far returned
    std::vector<LbfgsIteration> trace;
};

/// Objective callback: writes the gradient into `grad` (resized by caller)
/// and returns the function value.
using LbfgsObjective = std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

/// Limited-memory BFGS with two-loop recursion and a strong-Wolfe line
/// search (bracket + zoom, cubic interpolation). Accepted steps never
/// increase the objective; on line-search failure the best evaluated point
/// is returned with line_search_failed set.
LbfgsResult lbfgs_minimize(const LbfgsObjective& objective, std::vector<double> x0,
                           const LbfgsOptions& options);

}  // namespace wdst
