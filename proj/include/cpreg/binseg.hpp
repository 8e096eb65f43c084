#pragma once

#include "cpreg/dp.hpp"

namespace cpreg
{

/// Greedy binary segmentation on the Lasso segment loss. Used as a benchmark comparator.
struct BinsegConfig
{
    double gamma = 0.0;
    LassoConfig lasso;
    Index min_seg_len = 2;
    /// Split boundaries are restricted to multiples of stride.
    Index stride = 1;
    int max_depth = 16;

    void validate() const;
};

/// Recursively takes the split minimizing L(left) + L(right) while the loss reduction exceeds gamma.
ChangePointSet binseg_baseline(const Dataset& data, const BinsegConfig& cfg, LossCache* cache = nullptr);

} // namespace cpreg
