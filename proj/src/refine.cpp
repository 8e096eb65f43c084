#include "cpreg/refine.hpp"

#include "cpreg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace cpreg
{

std::pair<Index, Index> shrink_interval(Index prev, Index cur, Index next)
{
    if (!(prev < cur && cur < next))
        throw ValidationError("shrink_interval: need prev < cur < next");
    if (prev < 0)
        throw ValidationError("shrink_interval: prev must be nonnegative");
    auto floor_div = [](Index a, Index b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
    const Index s = floor_div(2 * prev + cur, 3);
    const Index e = floor_div(cur + 2 * next + 2, 3);
    return {s, e};
}

namespace
{

struct WindowOutcome
{
    TwoSegmentFit best;
    RefineWindow window;
    bool found = false;
    std::size_t nonconverged = 0;
};

WindowOutcome refine_window(const Dataset& data, Index s, Index e, const RefineConfig& cfg)
{
    WindowOutcome out;
    out.window = {s, e, false};
    if (e - s < 2)
    {
        out.window.kept_preliminary = true;
        return out;
    }

    std::optional<TwoSegmentMoments<double>> mom;
    std::optional<std::pair<Vector, Vector>> warm;
    for (Index split = s + 1; split < e; split += cfg.eta_stride)
    {
        if (!mom)
            mom.emplace(data, s, e, split);
        else
            mom->advance(data, split);
        TwoSegmentFit fit = solve_two_segment(data, *mom, cfg, warm);
        if (!fit.converged)
            ++out.nonconverged;
        warm.emplace(fit.beta1, fit.beta2);
        const double tie = 1e-12 * std::max(1.0, std::abs(out.best.objective));
        if (!out.found || fit.objective < out.best.objective - tie)
        {
            out.best = std::move(fit);
            out.found = true;
        }
    }
    return out;
}

// Forces strictly increasing locations in [2, n] while preserving the count.
bool separate(std::vector<Index>& locs, Index n)
{
    const std::vector<Index> before = locs;
    std::sort(locs.begin(), locs.end());
    const auto K = static_cast<Index>(locs.size());
    for (Index k = 0; k < K; ++k)
    {
        const auto i = static_cast<std::size_t>(k);
        locs[i] = std::max(locs[i], k == 0 ? Index(2) : locs[i - 1] + 1);
    }
    for (Index k = K - 1; k >= 0; --k)
    {
        const auto i = static_cast<std::size_t>(k);
        locs[i] = std::min(locs[i], n - (K - 1 - k));
        if (k + 1 < K)
            locs[i] = std::min(locs[i], locs[i + 1] - 1);
    }
    return locs != before;
}

} // namespace

RefineResult local_refine(const Dataset& data, const ChangePointSet& prelim, const RefineConfig& cfg)
{
    cfg.validate();
    const Index n = data.n();
    const ChangePointSet checked(prelim.locations(), n);
    const std::size_t K = checked.locations().size();

    // Boundaries in (s, e] terms: a change point at eta ends the previous segment at eta - 1.
    std::vector<Index> bounds;
    bounds.reserve(K + 2);
    bounds.push_back(0);
    for (Index eta : checked.locations())
        bounds.push_back(eta - 1);
    bounds.push_back(n);

    std::vector<WindowOutcome> outcomes(K);
    parallel_for(K, cfg.threads, [&](std::size_t k) {
        const auto [s, e] = shrink_interval(bounds[k], bounds[k + 1], bounds[k + 2]);
        outcomes[k] = refine_window(data, s, e, cfg);
    });

    RefineResult result;
    std::vector<Index> locs;
    locs.reserve(K);
    for (std::size_t k = 0; k < K; ++k)
    {
        auto& o = outcomes[k];
        result.nonconverged_solves += o.nonconverged;
        result.windows.push_back(o.window);
        locs.push_back(o.found ? o.best.change_point() : checked[k]);
        result.fits.push_back(std::move(o.best));
    }
    result.reordered = separate(locs, n);
    result.refined = ChangePointSet(std::move(locs), n);
    return result;
}

} // namespace cpreg
