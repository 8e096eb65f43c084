#include "cpreg/methods.hpp"

namespace cpreg
{

std::string_view method_name(Method m)
{
    switch (m)
    {
    case Method::dp:
        return "dp";
    case Method::dp_lr:
        return "dp-lr";
    case Method::binseg:
        return "binseg";
    }
    return "unknown";
}

Method parse_method(std::string_view name)
{
    if (name == "dp")
        return Method::dp;
    if (name == "dp-lr" || name == "dp_lr")
        return Method::dp_lr;
    if (name == "binseg")
        return Method::binseg;
    throw ValidationError("unknown method '" + std::string(name) + "' (expected dp, dp-lr or binseg)");
}

DpConfig DetectionOptions::dp_config(double lambda, double gamma) const
{
    DpConfig cfg;
    cfg.gamma = gamma;
    cfg.lasso.lambda = lambda;
    cfg.lasso.tol = lasso_tol;
    cfg.lasso.max_sweeps = max_sweeps;
    cfg.min_seg_len = min_seg_len;
    cfg.stride = stride;
    cfg.threads = threads;
    return cfg;
}

RefineConfig DetectionOptions::refine_config(double zeta) const
{
    RefineConfig cfg;
    cfg.zeta = zeta;
    cfg.group_tol = group_tol;
    cfg.max_block_sweeps = max_block_sweeps;
    cfg.eta_stride = eta_stride;
    cfg.threads = threads;
    return cfg;
}

BinsegConfig DetectionOptions::binseg_config(double lambda, double gamma) const
{
    BinsegConfig cfg;
    cfg.gamma = gamma;
    cfg.lasso.lambda = lambda;
    cfg.lasso.tol = lasso_tol;
    cfg.lasso.max_sweeps = max_sweeps;
    cfg.min_seg_len = min_seg_len;
    cfg.stride = stride;
    cfg.max_depth = binseg_max_depth;
    return cfg;
}

Detection run_method(const Dataset& data, Method method, const MethodParams& params, const DetectionOptions& opts,
                     LossCache* cache)
{
    Detection out;
    if (method == Method::binseg)
    {
        out.changepoints = binseg_baseline(data, opts.binseg_config(params.lambda, params.gamma), cache);
        return out;
    }
    if (method == Method::dp_lr && !params.zeta)
        throw ValidationError("dp-lr requires zeta");

    const DpResult dp = dp_partition(data, opts.dp_config(params.lambda, params.gamma), cache);
    out.fits_computed = dp.diagnostics.fits_computed;
    out.cache_hits = dp.diagnostics.cache_hits;
    out.nonconverged_fits = dp.diagnostics.nonconverged_fits;
    out.changepoints = partition_to_changepoints(dp.partition);
    if (method == Method::dp_lr)
    {
        out.preliminary = out.changepoints;
        const RefineResult refined = local_refine(data, out.changepoints, opts.refine_config(*params.zeta));
        out.changepoints = refined.refined;
        out.nonconverged_refine_solves = refined.nonconverged_solves;
    }
    return out;
}

} // namespace cpreg
