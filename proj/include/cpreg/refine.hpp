#pragma once

#include "cpreg/group_lasso.hpp"
#include "cpreg/types.hpp"

#include <utility>
#include <vector>

namespace cpreg
{

/// Shrinks (prev, next) around cur to (floor(2 prev/3 + cur/3), ceil(cur/3 + 2 next/3)).
/// Arguments are interval boundaries in the (s, e] sense; requires prev < cur < next.
std::pair<Index, Index> shrink_interval(Index prev, Index cur, Index next);

struct RefineWindow
{
    Index s = 0;
    Index e = 0;
    /// No interior split candidate existed; the preliminary location was kept.
    bool kept_preliminary = false;
};

struct RefineResult
{
    ChangePointSet refined;
    /// Best two-segment fit per preliminary change point (empty fit when kept_preliminary).
    std::vector<TwoSegmentFit> fits;
    std::vector<RefineWindow> windows;
    /// Set when refined locations collided and had to be separated to stay strictly increasing.
    bool reordered = false;
    std::size_t nonconverged_solves = 0;
};

/// For each preliminary change point, scans the split over its shrunken window and keeps the
/// split with the smallest two-segment group-penalized objective (smallest split on ties).
/// The number of change points is never changed.
RefineResult local_refine(const Dataset& data, const ChangePointSet& prelim, const RefineConfig& cfg);

} // namespace cpreg
