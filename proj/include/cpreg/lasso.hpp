#pragma once

#include "cpreg/gram.hpp"
#include "cpreg/types.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <optional>
#include <vector>

namespace cpreg
{

struct LassoConfig
{
    double lambda = 0.0;
    /// Bound on the largest coordinate move in a sweep, relative to 1 + |beta|_inf.
    double tol = 1e-8;
    int max_sweeps = 10000;
    std::optional<Vector> warm_start;
    /// Record the objective after every sweep in LassoFit::trace.
    bool record_trace = false;

    void validate() const
    {
        if (!(lambda >= 0.0) || !std::isfinite(lambda))
            throw ValidationError("lasso: lambda must be a finite nonnegative number");
        if (!(tol > 0.0))
            throw ValidationError("lasso: tol must be positive");
        if (max_sweeps < 1)
            throw ValidationError("lasso: max_sweeps must be at least 1");
    }
};

template <typename Scalar>
struct BasicLassoFit
{
    VectorX<Scalar> beta;
    /// sum_{t in I} (y_t - x_t^T beta)^2 + lambda * scale * |beta|_1
    Scalar objective{};
    /// Residual sum of squares alone; this is the segment loss.
    Scalar rss{};
    Scalar scale{};
    bool converged = false;
    int sweeps_used = 0;
    Scalar kkt_violation{};
    std::vector<Scalar> trace;
};

using LassoFit = BasicLassoFit<double>;

/// sqrt(max{|I|, log(max(n, p))}), natural log.
inline double penalty_scale(Index interval_len, Index n, Index p)
{
    return std::sqrt(std::max(static_cast<double>(interval_len), std::log(static_cast<double>(std::max(n, p)))));
}

namespace detail
{

template <typename Scalar>
Scalar soft_threshold(Scalar z, Scalar t)
{
    if (z > t)
        return z - t;
    if (z < -t)
        return z + t;
    return Scalar(0);
}

/// Largest violation of the subgradient conditions, given grad = X_I^T (y_I - X_I beta).
template <typename Scalar>
Scalar kkt_from_gradient(const VectorX<Scalar>& beta, const VectorX<Scalar>& grad, Scalar weight)
{
    Scalar worst = 0;
    for (Index j = 0; j < beta.size(); ++j)
    {
        const Scalar g2 = Scalar(2) * grad(j);
        Scalar v;
        if (beta(j) == Scalar(0))
            v = std::max<Scalar>(std::abs(g2) - weight, Scalar(0));
        else
            v = std::abs(g2 - weight * (beta(j) > 0 ? Scalar(1) : Scalar(-1)));
        worst = std::max(worst, v);
    }
    return worst;
}

template <typename Scalar>
struct CdState
{
    VectorX<Scalar> beta;
    VectorX<Scalar> grad;
    int sweeps = 0;
    bool converged = false;
    Scalar kkt{};
    std::vector<Scalar> trace;
};

/// Cyclic coordinate descent for min_v |y_I - X_I v|^2 + weight * |v|_1 on Gram moments.
template <typename Scalar, typename Gram>
CdState<Scalar> lasso_coordinate_descent(Gram& gram, Scalar weight, VectorX<Scalar> beta, double tol, int max_sweeps,
                                         bool record_trace)
{
    const Index p = gram.p();
    const auto& diag = gram.diag();
    CdState<Scalar> st;
    st.grad = gram.xty();
    for (Index j = 0; j < p; ++j)
    {
        if (beta(j) == Scalar(0))
            continue;
        if (diag(j) <= Scalar(0))
            beta(j) = 0;
        else
            st.grad.noalias() -= gram.column(j) * beta(j);
    }

    const Scalar half_weight = weight / Scalar(2);
    const Scalar kkt_bound = static_cast<Scalar>(tol) * (Scalar(1) + std::sqrt(diag.size() ? diag.maxCoeff() : Scalar(0)));
    auto objective = [&]() {
        return gram.yty() - beta.dot(gram.xty()) - beta.dot(st.grad) + weight * beta.template lpNorm<1>();
    };
    [[maybe_unused]] Scalar last = objective();

    while (st.sweeps < max_sweeps)
    {
        Scalar max_delta = 0;
        for (Index j = 0; j < p; ++j)
        {
            const Scalar d = diag(j);
            if (d <= Scalar(0))
                continue;
            const Scalar z = st.grad(j) + d * beta(j);
            const Scalar updated = soft_threshold(z, half_weight) / d;
            const Scalar delta = updated - beta(j);
            if (delta != Scalar(0))
            {
                st.grad.noalias() -= gram.column(j) * delta;
                beta(j) = updated;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        ++st.sweeps;
        if (record_trace)
            st.trace.push_back(objective());
#ifndef NDEBUG
        const Scalar now = objective();
        assert(now <= last + 1e-9 * (1 + std::abs(last)));
        last = now;
#endif
        const Scalar scale = Scalar(1) + (p ? beta.template lpNorm<Eigen::Infinity>() : Scalar(0));
        if (max_delta <= static_cast<Scalar>(tol) * scale)
        {
            st.kkt = kkt_from_gradient(beta, st.grad, weight);
            if (st.kkt <= kkt_bound)
            {
                st.converged = true;
                break;
            }
        }
    }
    if (!st.converged)
        st.kkt = kkt_from_gradient(beta, st.grad, weight);
    st.beta = std::move(beta);
    return st;
}

template <typename Scalar, typename Gram>
BasicLassoFit<Scalar> finish_fit(const BasicDataset<Scalar>& data, const IntegerInterval& I, CdState<Scalar>&& st,
                                 Scalar weight, Scalar scale)
{
    BasicLassoFit<Scalar> fit;
    fit.rss = segment_rss(data, I, st.beta);
    fit.objective = fit.rss + weight * st.beta.template lpNorm<1>();
    fit.scale = scale;
    fit.converged = st.converged;
    fit.sweeps_used = st.sweeps;
    fit.kkt_violation = st.kkt;
    fit.trace = std::move(st.trace);
    fit.beta = std::move(st.beta);
    return fit;
}

} // namespace detail

/// Lasso on I with the penalty weight lambda * scale supplied by the caller.
template <typename Scalar>
BasicLassoFit<Scalar> fit_lasso_with_scale(const BasicDataset<Scalar>& data, const IntegerInterval& I, double scale,
                                           const LassoConfig& cfg)
{
    cfg.validate();
    check_within(I, data.n());
    RowsGram<Scalar> gram(data, I);
    VectorX<Scalar> start = VectorX<Scalar>::Zero(data.p());
    if (cfg.warm_start)
    {
        if (cfg.warm_start->size() != data.p())
            throw ValidationError("lasso: warm start has wrong dimension");
        start = cfg.warm_start->template cast<Scalar>();
    }
    const auto weight = static_cast<Scalar>(cfg.lambda * scale);
    auto st = detail::lasso_coordinate_descent<Scalar>(gram, weight, std::move(start), cfg.tol, cfg.max_sweeps,
                                                      cfg.record_trace);
    return detail::finish_fit<Scalar, RowsGram<Scalar>>(data, I, std::move(st), weight, static_cast<Scalar>(scale));
}

/// argmin_v sum_{t in I} (y_t - x_t^T v)^2 + lambda * sqrt(max{|I|, log(n v p)}) |v|_1
template <typename Scalar>
BasicLassoFit<Scalar> fit_lasso(const BasicDataset<Scalar>& data, const IntegerInterval& I, const LassoConfig& cfg)
{
    return fit_lasso_with_scale(data, I, penalty_scale(I.length(), data.n(), data.p()), cfg);
}

/// Subgradient optimality residual of beta for the interval-scaled problem on I.
/// Zero at an exact minimizer.
template <typename Scalar>
Scalar kkt_residual(const BasicDataset<Scalar>& data, const IntegerInterval& I, const VectorX<Scalar>& beta,
                    double lambda)
{
    check_within(I, data.n());
    if (beta.size() != data.p())
        throw ValidationError("kkt_residual: beta has wrong dimension");
    const auto rows = data.X().middleRows(I.s(), I.length());
    const VectorX<Scalar> r = data.y().segment(I.s(), I.length()) - rows * beta;
    const VectorX<Scalar> grad = rows.transpose() * r;
    const auto weight = static_cast<Scalar>(lambda * penalty_scale(I.length(), data.n(), data.p()));
    return detail::kkt_from_gradient(beta, grad, weight);
}

} // namespace cpreg
