#pragma once

#include "cpreg/types.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace cpreg
{

// Two-segment regression on (s, e] split after `split`:
//
//   F(b1, b2) = sum_{t=s+1}^{split} (y_t - x_t^T b1)^2 + sum_{t=split+1}^{e} (y_t - x_t^T b2)^2
//             + zeta * sum_i sqrt((split - s) b1_i^2 + (e - split) b2_i^2)
//
// With u = sqrt(split - s) b1 and v = sqrt(e - split) b2 each coordinate pair (u_i, v_i)
// is a size-2 group and the penalty is zeta * sum_i |(u_i, v_i)|_2.

struct RefineConfig
{
    double zeta = 0.0;
    /// Bound on the largest (u, v) move in a block sweep, relative to 1 + max |(u, v)|.
    double group_tol = 1e-7;
    int max_block_sweeps = 5000;
    Index eta_stride = 1;
    unsigned threads = 1;
    bool record_trace = false;

    void validate() const
    {
        if (!(zeta >= 0.0) || !std::isfinite(zeta))
            throw ValidationError("refine: zeta must be a finite nonnegative number");
        if (!(group_tol > 0.0))
            throw ValidationError("refine: group_tol must be positive");
        if (max_block_sweeps < 1)
            throw ValidationError("refine: max_block_sweeps must be at least 1");
        if (eta_stride < 1)
            throw ValidationError("refine: eta_stride must be at least 1");
    }
};

template <typename Scalar>
struct BasicTwoSegmentFit
{
    VectorX<Scalar> beta1;
    VectorX<Scalar> beta2;
    Index s = 0;
    Index e = 0;
    /// Last index of the left segment; the implied change point is split + 1.
    Index split = 0;
    Scalar objective{};
    bool converged = false;
    int sweeps = 0;
    std::vector<Scalar> trace;

    Index change_point() const { return split + 1; }
};

using TwoSegmentFit = BasicTwoSegmentFit<double>;

namespace detail
{

inline void check_split(Index n, Index s, Index e, Index split)
{
    if (!(0 <= s && s < split && split < e && e <= n))
        throw ValidationError("two-segment: need 0 <= s < split < e <= n");
}

} // namespace detail

/// Gram moments of the two segments (s, split] and (split, e].
template <typename Scalar>
struct TwoSegmentMoments
{
    MatrixX<Scalar> gram_left, gram_right;
    VectorX<Scalar> xty_left, xty_right;
    Scalar yty_left{}, yty_right{};
    Index s = 0, e = 0, split = 0;

    TwoSegmentMoments(const BasicDataset<Scalar>& data, Index s_, Index e_, Index split_) : s(s_), e(e_), split(split_)
    {
        detail::check_split(data.n(), s, e, split);
        const auto L = data.X().middleRows(s, split - s);
        const auto R = data.X().middleRows(split, e - split);
        gram_left = L.transpose() * L;
        gram_right = R.transpose() * R;
        xty_left = L.transpose() * data.y().segment(s, split - s);
        xty_right = R.transpose() * data.y().segment(split, e - split);
        yty_left = data.y().segment(s, split - s).squaredNorm();
        yty_right = data.y().segment(split, e - split).squaredNorm();
    }

    Index n_left() const { return split - s; }
    Index n_right() const { return e - split; }

    /// Moves the split forward, transferring rows split+1 .. new_split from right to left.
    void advance(const BasicDataset<Scalar>& data, Index new_split)
    {
        detail::check_split(data.n(), s, e, new_split);
        assert(new_split > split);
        const auto rows = data.X().middleRows(split, new_split - split);
        const auto yr = data.y().segment(split, new_split - split);
        const MatrixX<Scalar> moved = rows.transpose() * rows;
        const VectorX<Scalar> moved_xty = rows.transpose() * yr;
        const Scalar moved_yy = yr.squaredNorm();
        gram_left += moved;
        gram_right -= moved;
        xty_left += moved_xty;
        xty_right -= moved_xty;
        yty_left += moved_yy;
        yty_right -= moved_yy;
        split = new_split;
    }
};

/// Exact minimizer over w in R^2 of d1 w1^2 + d2 w2^2 - 2 h^T w + 2 q |w|_2, with d >= 0, q > 0.
template <typename Scalar>
std::pair<Scalar, Scalar> group_block_minimizer(Scalar d1, Scalar d2, Scalar h1, Scalar h2, Scalar q)
{
    if (d1 <= Scalar(0))
        h1 = 0;
    if (d2 <= Scalar(0))
        h2 = 0;
    const Scalar hn = std::hypot(h1, h2);
    // A few ulps of slack so zeta exactly at the kill threshold gives exact zeros despite rounding.
    if (hn <= q * (Scalar(1) + 16 * std::numeric_limits<Scalar>::epsilon()))
        return {Scalar(0), Scalar(0)};

    // Root r = |w| of f(r) = h1^2/(d1 r + q)^2 + h2^2/(d2 r + q)^2 - 1, which is convex and
    // decreasing with f(0) > 0, so Newton from 0 increases monotonically to the root.
    Scalar dmin = std::numeric_limits<Scalar>::infinity();
    if (h1 != Scalar(0))
        dmin = std::min(dmin, d1);
    if (h2 != Scalar(0))
        dmin = std::min(dmin, d2);
    Scalar lo = 0, hi = hn / dmin;
    Scalar r = 0;
    for (int it = 0; it < 200; ++it)
    {
        const Scalar a1 = d1 * r + q, a2 = d2 * r + q;
        const Scalar f = h1 * h1 / (a1 * a1) + h2 * h2 / (a2 * a2) - Scalar(1);
        if (f > 0)
            lo = r;
        else
            hi = r;
        const Scalar df = Scalar(-2) * (h1 * h1 * d1 / (a1 * a1 * a1) + h2 * h2 * d2 / (a2 * a2 * a2));
        Scalar next = r - f / df;
        if (!(next > lo && next < hi))
            next = (lo + hi) / 2;
        if (std::abs(next - r) <= std::numeric_limits<Scalar>::epsilon() * 4 * std::max(Scalar(1), r))
        {
            r = next;
            break;
        }
        r = next;
    }
    return {h1 * r / (d1 * r + q), h2 * r / (d2 * r + q)};
}

namespace detail
{

template <typename Scalar>
struct GroupState
{
    VectorX<Scalar> beta1, beta2;
    int sweeps = 0;
    bool converged = false;
    std::vector<Scalar> trace;
};

/// Block coordinate descent in (u, v) on the moments of the two segments.
template <typename Scalar>
GroupState<Scalar> group_block_descent(const TwoSegmentMoments<Scalar>& mom, Scalar zeta, VectorX<Scalar> b1,
                                       VectorX<Scalar> b2, double tol, int max_sweeps, bool record_trace)
{
    const Index p = mom.gram_left.rows();
    const Scalar nl = static_cast<Scalar>(mom.n_left()), nr = static_cast<Scalar>(mom.n_right());
    const Scalar sl = std::sqrt(nl), sr = std::sqrt(nr);
    const Scalar q = zeta / Scalar(2);

    GroupState<Scalar> st;
    VectorX<Scalar> gl = mom.xty_left - mom.gram_left * b1;
    VectorX<Scalar> gr = mom.xty_right - mom.gram_right * b2;
    auto objective = [&]() {
        Scalar pen = 0;
        for (Index i = 0; i < p; ++i)
            pen += std::sqrt(nl * b1(i) * b1(i) + nr * b2(i) * b2(i));
        return mom.yty_left - b1.dot(mom.xty_left) - b1.dot(gl) + mom.yty_right - b2.dot(mom.xty_right) -
               b2.dot(gr) + zeta * pen;
    };
    [[maybe_unused]] Scalar last = objective();

    while (st.sweeps < max_sweeps)
    {
        Scalar max_delta = 0, max_w = 0;
        for (Index i = 0; i < p; ++i)
        {
            const Scalar a1 = mom.gram_left(i, i), a2 = mom.gram_right(i, i);
            const Scalar z1 = gl(i) + a1 * b1(i), z2 = gr(i) + a2 * b2(i);
            const auto [u, v] = group_block_minimizer<Scalar>(a1 / nl, a2 / nr, z1 / sl, z2 / sr, q);
            const Scalar d1 = u / sl - b1(i), d2 = v / sr - b2(i);
            if (d1 != Scalar(0))
            {
                gl.noalias() -= mom.gram_left.col(i) * d1;
                b1(i) += d1;
            }
            if (d2 != Scalar(0))
            {
                gr.noalias() -= mom.gram_right.col(i) * d2;
                b2(i) += d2;
            }
            max_delta = std::max({max_delta, std::abs(d1) * sl, std::abs(d2) * sr});
            max_w = std::max(max_w, std::hypot(u, v));
        }
        ++st.sweeps;
        if (record_trace)
            st.trace.push_back(objective());
#ifndef NDEBUG
        const Scalar now = objective();
        assert(now <= last + 1e-9 * (1 + std::abs(last)));
        last = now;
#endif
        if (max_delta <= static_cast<Scalar>(tol) * (Scalar(1) + max_w))
        {
            st.converged = true;
            break;
        }
    }
    st.beta1 = std::move(b1);
    st.beta2 = std::move(b2);
    return st;
}

} // namespace detail

/// Objective F(b1, b2) evaluated from the raw rows.
template <typename Scalar>
Scalar group_objective(const BasicDataset<Scalar>& data, Index s, Index e, Index split, const VectorX<Scalar>& b1,
                       const VectorX<Scalar>& b2, double zeta)
{
    detail::check_split(data.n(), s, e, split);
    const Scalar nl = static_cast<Scalar>(split - s), nr = static_cast<Scalar>(e - split);
    const Scalar rss_l = (data.y().segment(s, split - s) - data.X().middleRows(s, split - s) * b1).squaredNorm();
    const Scalar rss_r = (data.y().segment(split, e - split) - data.X().middleRows(split, e - split) * b2).squaredNorm();
    return rss_l + rss_r + static_cast<Scalar>(zeta) * (nl * b1.array().square() + nr * b2.array().square()).sqrt().sum();
}

/// Objective in the reparameterized coordinates u = sqrt(split - s) b1, v = sqrt(e - split) b2.
template <typename Scalar>
Scalar group_objective_uv(const BasicDataset<Scalar>& data, Index s, Index e, Index split, const VectorX<Scalar>& u,
                          const VectorX<Scalar>& v, double zeta)
{
    detail::check_split(data.n(), s, e, split);
    const Scalar sl = std::sqrt(static_cast<Scalar>(split - s)), sr = std::sqrt(static_cast<Scalar>(e - split));
    const Scalar rss_l = (data.y().segment(s, split - s) - data.X().middleRows(s, split - s) * u / sl).squaredNorm();
    const Scalar rss_r = (data.y().segment(split, e - split) - data.X().middleRows(split, e - split) * v / sr).squaredNorm();
    return rss_l + rss_r + static_cast<Scalar>(zeta) * (u.array().square() + v.array().square()).sqrt().sum();
}

/// Smallest zeta at which (0, 0) is optimal.
template <typename Scalar>
Scalar group_kill_threshold(const BasicDataset<Scalar>& data, Index s, Index e, Index split)
{
    detail::check_split(data.n(), s, e, split);
    const VectorX<Scalar> cl = data.X().middleRows(s, split - s).transpose() * data.y().segment(s, split - s);
    const VectorX<Scalar> cr = data.X().middleRows(split, e - split).transpose() * data.y().segment(split, e - split);
    const Scalar sl = std::sqrt(static_cast<Scalar>(split - s)), sr = std::sqrt(static_cast<Scalar>(e - split));
    return Scalar(2) * ((cl / sl).array().square() + (cr / sr).array().square()).sqrt().maxCoeff();
}

/// Solves the two-segment problem given precomputed moments. zeta = 0 returns the
/// minimum-norm least-squares fit of each segment.
template <typename Scalar>
BasicTwoSegmentFit<Scalar> solve_two_segment(const BasicDataset<Scalar>& data, const TwoSegmentMoments<Scalar>& mom,
                                             const RefineConfig& cfg,
                                             const std::optional<std::pair<VectorX<Scalar>, VectorX<Scalar>>>& warm = {})
{
    cfg.validate();
    BasicTwoSegmentFit<Scalar> fit;
    fit.s = mom.s;
    fit.e = mom.e;
    fit.split = mom.split;
    const Index p = data.p();
    if (cfg.zeta == 0.0)
    {
        const auto L = data.X().middleRows(mom.s, mom.n_left());
        const auto R = data.X().middleRows(mom.split, mom.n_right());
        fit.beta1 = MatrixX<Scalar>(L).completeOrthogonalDecomposition().solve(data.y().segment(mom.s, mom.n_left()));
        fit.beta2 = MatrixX<Scalar>(R).completeOrthogonalDecomposition().solve(data.y().segment(mom.split, mom.n_right()));
        fit.converged = true;
    }
    else
    {
        VectorX<Scalar> b1 = VectorX<Scalar>::Zero(p), b2 = VectorX<Scalar>::Zero(p);
        if (warm)
        {
            if (warm->first.size() != p || warm->second.size() != p)
                throw ValidationError("two-segment: warm start has wrong dimension");
            b1 = warm->first;
            b2 = warm->second;
        }
        auto st = detail::group_block_descent<Scalar>(mom, static_cast<Scalar>(cfg.zeta), std::move(b1), std::move(b2),
                                                      cfg.group_tol, cfg.max_block_sweeps, cfg.record_trace);
        fit.beta1 = std::move(st.beta1);
        fit.beta2 = std::move(st.beta2);
        fit.converged = st.converged;
        fit.sweeps = st.sweeps;
        fit.trace = std::move(st.trace);
    }
    fit.objective = group_objective(data, mom.s, mom.e, mom.split, fit.beta1, fit.beta2, cfg.zeta);
    return fit;
}

template <typename Scalar>
BasicTwoSegmentFit<Scalar> group_two_segment_solve(const BasicDataset<Scalar>& data, Index s, Index e, Index split,
                                                   const RefineConfig& cfg)
{
    const TwoSegmentMoments<Scalar> mom(data, s, e, split);
    return solve_two_segment(data, mom, cfg);
}

} // namespace cpreg
