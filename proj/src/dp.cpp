#include "cpreg/dp.hpp"

#include "cpreg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <string>

namespace cpreg
{

void DpConfig::validate() const
{
    if (!(gamma >= 0.0))
        throw ValidationError("dp: gamma must be nonnegative");
    if (min_seg_len < 1)
        throw ValidationError("dp: min_seg_len must be at least 1");
    if (stride < 1)
        throw ValidationError("dp: stride must be at least 1");
    lasso.validate();
}

std::optional<SegmentEntry> LossCache::find(const IntegerInterval& I) const
{
    std::shared_lock lock(mutex_);
    auto it = map_.find(key(I));
    if (it == map_.end())
    {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    return it->second;
}

void LossCache::insert(const IntegerInterval& I, const SegmentEntry& entry)
{
    std::unique_lock lock(mutex_);
    map_.emplace(key(I), entry);
}

std::size_t LossCache::size() const
{
    std::shared_lock lock(mutex_);
    return map_.size();
}

void LossCache::check_lambda(double lambda) const
{
    if (lambda != lambda_)
        throw ValidationError("loss cache was built for lambda = " + std::to_string(lambda_) +
                              ", requested lambda = " + std::to_string(lambda));
}

double segment_loss(const Dataset& data, const IntegerInterval& I, const LassoConfig& cfg, LossCache& cache)
{
    cache.check_lambda(cfg.lambda);
    if (auto hit = cache.find(I))
        return hit->loss;
    const LassoFit fit = fit_lasso(data, I, cfg);
    cache.insert(I, {fit.rss, fit.converged, fit.sweeps_used, fit.kkt_violation});
    return fit.rss;
}

std::vector<Index> candidate_endpoints(Index n, Index stride)
{
    std::vector<Index> points;
    for (Index e = 0; e < n; e += stride)
        points.push_back(e);
    points.push_back(n);
    return points;
}

namespace
{

constexpr double inf = std::numeric_limits<double>::infinity();

struct ChainOutput
{
    std::vector<std::pair<IntegerInterval, SegmentEntry>> entries;
    std::size_t fits = 0;
};

bool admissible(const std::vector<Index>& E, std::size_t a, std::size_t b, Index min_seg_len)
{
    if (a == 0 && b + 1 == E.size())
        return true;
    return E[b] - E[a] >= min_seg_len;
}

// Lexicographic order on change point lists, with `tail` appended to `head`.
bool lex_less(const std::vector<Index>& head, std::optional<Index> tail, const std::vector<Index>& other)
{
    const std::size_t len = head.size() + (tail ? 1 : 0);
    for (std::size_t i = 0; i < std::min(len, other.size()); ++i)
    {
        const Index v = i < head.size() ? head[i] : *tail;
        if (v != other[i])
            return v < other[i];
    }
    return len < other.size();
}

} // namespace

DpResult dp_partition(const Dataset& data, const DpConfig& cfg, LossCache* cache)
{
    cfg.validate();
    const Index n = data.n();
    const std::vector<Index> E = candidate_endpoints(n, cfg.stride);
    const std::size_t m = E.size();

    std::unique_ptr<LossCache> own;
    if (!cache)
    {
        own = std::make_unique<LossCache>(cfg.lasso.lambda);
        cache = own.get();
    }
    cache->check_lambda(cfg.lasso.lambda);

    // loss[a][b] for admissible pairs; NaN marks "not yet known".
    std::vector<std::vector<double>> loss(m);
    std::vector<std::size_t> missing_chains;
    DpDiagnostics diag;
    for (std::size_t a = 0; a + 1 < m; ++a)
    {
        loss[a].assign(m, std::numeric_limits<double>::quiet_NaN());
        bool missing = false;
        for (std::size_t b = a + 1; b < m; ++b)
        {
            if (!admissible(E, a, b, cfg.min_seg_len))
                continue;
            if (auto hit = cache->find(IntegerInterval(E[a], E[b])))
            {
                loss[a][b] = hit->loss;
                ++diag.cache_hits;
            }
            else
                missing = true;
        }
        if (missing)
            missing_chains.push_back(a);
    }

    if (!missing_chains.empty())
    {
        const double footprint = PrefixMoments<double>::footprint_bytes(static_cast<Index>(m), data.p());
        std::unique_ptr<PrefixMoments<double>> moments;
        if (footprint <= cfg.moment_budget_bytes)
            moments = std::make_unique<PrefixMoments<double>>(data, E);
        diag.used_prefix_moments = static_cast<bool>(moments);

        std::vector<ChainOutput> outputs(missing_chains.size());
        parallel_for(missing_chains.size(), cfg.threads, [&](std::size_t c) {
            const std::size_t a = missing_chains[c];
            ChainOutput& out = outputs[c];
            std::optional<PrefixGram<double>> view;
            if (moments)
                view.emplace(*moments);
            Vector beta = Vector::Zero(data.p());
            for (std::size_t b = a + 1; b < m; ++b)
            {
                if (!admissible(E, a, b, cfg.min_seg_len) || !std::isnan(loss[a][b]))
                    continue;
                const IntegerInterval I(E[a], E[b]);
                const double scale = penalty_scale(I.length(), n, data.p());
                const double weight = cfg.lasso.lambda * scale;
                Vector start = cfg.warm_start ? beta : Vector::Zero(data.p());
                if (!cfg.warm_start && cfg.lasso.warm_start)
                    start = *cfg.lasso.warm_start;
                detail::CdState<double> st;
                if (view)
                {
                    view->rebind(static_cast<Index>(a), static_cast<Index>(b));
                    st = detail::lasso_coordinate_descent<double>(*view, weight, std::move(start), cfg.lasso.tol,
                                                                  cfg.lasso.max_sweeps, false);
                }
                else
                {
                    RowsGram<double> rows(data, I);
                    st = detail::lasso_coordinate_descent<double>(rows, weight, std::move(start), cfg.lasso.tol,
                                                                  cfg.lasso.max_sweeps, false);
                }
                const double rss = segment_rss(data, I, st.beta);
                loss[a][b] = rss;
                out.entries.push_back({I, {rss, st.converged, st.sweeps, st.kkt}});
                ++out.fits;
                beta = std::move(st.beta);
            }
        });

        for (const auto& out : outputs)
        {
            diag.fits_computed += out.fits;
            for (const auto& [I, entry] : out.entries)
            {
                cache->insert(I, entry);
                if (!entry.converged)
                {
                    ++diag.nonconverged_fits;
                    if (diag.nonconverged_sample.size() < 100)
                        diag.nonconverged_sample.push_back(I);
                }
            }
        }
    }

    // Bellman recursion: B(0) = -gamma, B(e) = min_s B(s) + L((s, e]) + gamma.
    // Ties go to fewer intervals, then to the lexicographically smaller change point list.
    std::vector<double> B(m, inf);
    std::vector<std::size_t> count(m, 0), from(m, 0);
    std::vector<std::vector<Index>> path(m);
    B[0] = -cfg.gamma;
    for (std::size_t b = 1; b < m; ++b)
    {
        for (std::size_t a = 0; a < b; ++a)
        {
            if (B[a] == inf || !admissible(E, a, b, cfg.min_seg_len))
                continue;
            const double value = B[a] + loss[a][b] + cfg.gamma;
            const std::size_t cnt = count[a] + 1;
            const std::optional<Index> tail = a > 0 ? std::optional<Index>(E[a] + 1) : std::nullopt;
            bool take = false;
            if (B[b] == inf)
                take = true;
            else
            {
                const double tie = 1e-10 * std::max(1.0, std::abs(B[b]));
                if (value < B[b] - tie)
                    take = true;
                else if (value <= B[b] + tie)
                    take = cnt < count[b] || (cnt == count[b] && lex_less(path[a], tail, path[b]));
            }
            if (take)
            {
                B[b] = value;
                count[b] = cnt;
                from[b] = a;
                path[b] = path[a];
                if (tail)
                    path[b].push_back(*tail);
            }
        }
    }

    std::vector<IntegerInterval> intervals;
    for (std::size_t b = m - 1; b > 0; b = from[b])
        intervals.emplace_back(E[from[b]], E[b]);
    std::reverse(intervals.begin(), intervals.end());

    // B(n) counts gamma once per interval beyond the first; the objective counts every interval.
    const double objective = B[m - 1] + cfg.gamma;
    return DpResult{Partition(std::move(intervals), n), objective, E, std::move(B), std::move(diag)};
}

ChangePointSet detect(const Dataset& data, const DpConfig& cfg)
{
    return partition_to_changepoints(dp_partition(data, cfg).partition);
}

} // namespace cpreg
