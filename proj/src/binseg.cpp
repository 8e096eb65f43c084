#include "cpreg/binseg.hpp"

#include <algorithm>
#include <limits>
#include <memory>

namespace cpreg
{

void BinsegConfig::validate() const
{
    if (!(gamma >= 0.0))
        throw ValidationError("binseg: gamma must be nonnegative");
    if (min_seg_len < 1 || stride < 1)
        throw ValidationError("binseg: min_seg_len and stride must be at least 1");
    if (max_depth < 0)
        throw ValidationError("binseg: max_depth must be nonnegative");
    lasso.validate();
}

namespace
{

void split_recursive(const Dataset& data, const BinsegConfig& cfg, LossCache& cache, Index s, Index e, int depth,
                     std::vector<Index>& out)
{
    if (depth >= cfg.max_depth || e - s < 2 * cfg.min_seg_len)
        return;
    const double whole = segment_loss(data, IntegerInterval(s, e), cfg.lasso, cache);
    double best = std::numeric_limits<double>::infinity();
    Index best_split = -1;
    const Index first = ((s + cfg.min_seg_len + cfg.stride - 1) / cfg.stride) * cfg.stride;
    for (Index m = first; m <= e - cfg.min_seg_len; m += cfg.stride)
    {
        const double v = segment_loss(data, IntegerInterval(s, m), cfg.lasso, cache) +
                         segment_loss(data, IntegerInterval(m, e), cfg.lasso, cache);
        if (v < best)
        {
            best = v;
            best_split = m;
        }
    }
    if (best_split < 0 || !(whole - best > cfg.gamma))
        return;
    split_recursive(data, cfg, cache, s, best_split, depth + 1, out);
    out.push_back(best_split + 1);
    split_recursive(data, cfg, cache, best_split, e, depth + 1, out);
}

} // namespace

ChangePointSet binseg_baseline(const Dataset& data, const BinsegConfig& cfg, LossCache* cache)
{
    cfg.validate();
    std::unique_ptr<LossCache> own;
    if (!cache)
    {
        own = std::make_unique<LossCache>(cfg.lasso.lambda);
        cache = own.get();
    }
    std::vector<Index> out;
    split_recursive(data, cfg, *cache, 0, data.n(), 0, out);
    return ChangePointSet(std::move(out), data.n());
}

} // namespace cpreg
