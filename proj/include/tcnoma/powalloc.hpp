#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "freedist.hpp"

namespace tcnoma {

struct PowerSolution {
    double p1_star = 0.0;
    double p2_star = 0.0;
    double ratio = 0.0;
    double d_free_sq_at_opt = 0.0;
};

/// P1/P2 that equalises 4P1 with the diverge-merge distance:
/// ((2sqrt2 - sqrt(2 + sqrt2)) / 2)^2 ~= 0.2404.
inline double optimal_ratio_closed_form()
{
    const double x = (2.0 * std::sqrt(2.0) - std::sqrt(2.0 + std::sqrt(2.0))) / 2.0;
    return x * x;
}

/// Closed-form optimum; the whole budget is spent.
inline PowerSolution optimal_powers_closed_form(double budget)
{
    if (!(budget > 0.0))
        throw std::invalid_argument("optimal powers: budget must be positive");
    const double r = optimal_ratio_closed_form();
    const PowerPair pw = PowerPair::from_ratio(r, budget);
    return {pw.p1, pw.p2, r, d_free_sq(pw).d_free_sq};
}

using DistanceEvaluator = std::function<double(const PowerPair&)>;

enum class Evaluator { ClosedForm, SearchOracle };

inline DistanceEvaluator make_evaluator(Evaluator e, std::size_t max_len = 12)
{
    if (e == Evaluator::ClosedForm)
        return [](const PowerPair& pw) { return d_free_sq(pw).d_free_sq; };
    return [max_len](const PowerPair& pw) { return search_d_free_sq_4state(pw, max_len); };
}

/// Ratio grid k*step, k = 1, 2, ... while below 1.
inline std::vector<double> ratio_grid(double step)
{
    if (!(step > 0.0) || !(step < 1.0))
        throw std::invalid_argument("ratio grid: step must lie in (0, 1)");
    std::vector<double> g;
    for (std::size_t k = 1;; ++k) {
        const double r = double(k) * step;
        if (r >= 1.0 - 1e-12)
            break;
        g.push_back(r);
    }
    return g;
}

/// Grid argmax of d_free^2 over P1/P2 with P1 + P2 = budget; ties go to the
/// smaller ratio.
inline PowerSolution optimal_powers_grid(double budget, double step, const DistanceEvaluator& eval)
{
    if (!(budget > 0.0))
        throw std::invalid_argument("optimal powers: budget must be positive");
    PowerSolution best;
    best.d_free_sq_at_opt = -1.0;
    for (double r : ratio_grid(step)) {
        const PowerPair pw = PowerPair::from_ratio(r, budget);
        const double d = eval(pw);
        if (d > best.d_free_sq_at_opt)
            best = {pw.p1, pw.p2, r, d};
    }
    return best;
}

inline PowerSolution optimal_powers_grid(double budget, double step, Evaluator e)
{
    return optimal_powers_grid(budget, step, make_evaluator(e));
}

/// True when values rise (weakly) to a single peak and then fall (weakly).
inline bool is_unimodal(const std::vector<double>& v, double tol = 1e-12)
{
    std::size_t i = 1;
    while (i < v.size() && v[i] >= v[i - 1] - tol)
        ++i;
    while (i < v.size() && v[i] <= v[i - 1] + tol)
        ++i;
    return i >= v.size();
}

} // namespace tcnoma
