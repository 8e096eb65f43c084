#pragma once

#include "cpreg/binseg.hpp"
#include "cpreg/dp.hpp"
#include "cpreg/refine.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace cpreg
{

enum class Method
{
    dp,
    dp_lr,
    binseg,
};

std::string_view method_name(Method m);
/// Accepts "dp", "dp-lr" and "binseg".
Method parse_method(std::string_view name);

/// Tuning parameters of one method run. zeta is required for dp-lr only.
struct MethodParams
{
    double lambda = 0.0;
    double gamma = 0.0;
    std::optional<double> zeta;
};

/// Knobs shared by every method that are not tuned.
struct DetectionOptions
{
    Index min_seg_len = 2;
    Index stride = 1;
    double lasso_tol = 1e-8;
    int max_sweeps = 10000;
    double group_tol = 1e-7;
    int max_block_sweeps = 5000;
    Index eta_stride = 1;
    int binseg_max_depth = 16;
    unsigned threads = 1;

    DpConfig dp_config(double lambda, double gamma) const;
    RefineConfig refine_config(double zeta) const;
    BinsegConfig binseg_config(double lambda, double gamma) const;
};

struct Detection
{
    ChangePointSet changepoints;
    /// DP output before refinement (dp-lr only).
    std::optional<ChangePointSet> preliminary;
    std::size_t fits_computed = 0;
    std::size_t cache_hits = 0;
    std::size_t nonconverged_fits = 0;
    std::size_t nonconverged_refine_solves = 0;
};

/// Runs one method with fixed parameters. `cache` (optional) must match data and lambda.
Detection run_method(const Dataset& data, Method method, const MethodParams& params, const DetectionOptions& opts,
                     LossCache* cache = nullptr);

} // namespace cpreg
