#include "cpreg/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace cpreg
{

void RunSpec::validate() const
{
    if (response.empty())
        throw CpregError(ErrorCode::usage, "a response column is required");
    if (tuning == TuningMode::fixed)
    {
        if (!lambda || !gamma)
            throw CpregError(ErrorCode::usage, "fixed tuning needs --lambda and --gamma (or use --cv)");
        if (method == Method::dp_lr && !zeta)
            throw CpregError(ErrorCode::usage, "method dp-lr with fixed tuning needs --zeta");
    }
}

nlohmann::json error_report(ErrorCode code, const std::string& message)
{
    return {{"error", {{"code", error_code_name(code)}, {"exit_status", static_cast<int>(code)}, {"message", message}}}};
}

namespace
{

// Ten significant digits keep reports stable across platforms.
double rounded(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return std::strtod(buf, nullptr);
}

nlohmann::json point_json(const TuningPoint& pt)
{
    nlohmann::json j{{"lambda", rounded(pt.lambda)}, {"gamma", rounded(pt.gamma)}};
    if (pt.zeta)
        j["zeta"] = rounded(*pt.zeta);
    return j;
}

} // namespace

nlohmann::json run_pipeline(const RunSpec& spec)
{
    spec.validate();
    const LoadedData loaded = load_csv(spec.input, {spec.response, spec.covariates, spec.index_column});
    return run_pipeline(spec, loaded);
}

nlohmann::json run_pipeline(const RunSpec& spec, const LoadedData& loaded)
{
    spec.validate();
    const auto start = std::chrono::steady_clock::now();

    Dataset data = loaded.data;
    double scale_factor = 1.0;
    if (spec.standardize_response)
        std::tie(data, scale_factor) = standardize_response(data);
    if (spec.standardize_covariates)
        data = standardize_covariates(data);

    nlohmann::json report;
    report["method"] = std::string(method_name(spec.method));
    report["n"] = data.n();
    report["p"] = data.p();
    report["dropped_rows"] = loaded.dropped_rows;
    report["response"] = spec.response;
    report["covariates"] = loaded.covariate_names;
    report["standardization"] = {{"response", spec.standardize_response},
                                 {"response_scale_factor", rounded(scale_factor)},
                                 {"covariates", spec.standardize_covariates}};
    if (spec.standardize_covariates)
        report["standardization"]["note"] =
            "covariates were z-scored; coefficients refer to standardized covariates";

    TuningPoint chosen;
    if (spec.tuning == TuningMode::cv)
    {
        TuningGrid grid =
            spec.grid ? *spec.grid : TuningGrid::defaults(data.n(), data.p(), spec.method == Method::dp_lr);
        if (spec.method == Method::dp_lr && !grid.zetas)
            grid.zetas = TuningGrid::defaults(data.n(), data.p(), true).zetas;
        const CvResult cv = cross_validate(data, spec.method, grid, spec.options, spec.cv_strategy);
        chosen = cv.full;
        nlohmann::json table = nlohmann::json::array();
        for (const auto& e : cv.table)
        {
            nlohmann::json row = point_json(e.point);
            row["validation_loss"] = rounded(e.validation_loss);
            row["k_hat"] = e.k_hat;
            table.push_back(std::move(row));
        }
        report["tuning"] = {{"mode", "cv"},
                            {"strategy", spec.cv_strategy == CvStrategy::staged ? "staged" : "joint"},
                            {"selected", point_json(cv.best)},
                            {"selected_validation_loss", rounded(cv.best_loss)},
                            {"train_change_points", cv.train_changepoints.locations()},
                            {"table", std::move(table)}};
    }
    else
    {
        chosen = {*spec.lambda, *spec.gamma, spec.method == Method::dp_lr ? spec.zeta : std::nullopt};
        report["tuning"] = {{"mode", "fixed"}};
    }
    report["parameters"] = point_json(chosen);

    const Detection det = run_method(data, spec.method, chosen.params(), spec.options);
    report["change_points"] = det.changepoints.locations();
    report["k_hat"] = det.changepoints.k_hat();
    if (!loaded.labels.empty())
    {
        std::vector<std::string> labels;
        for (Index eta : det.changepoints.locations())
            labels.push_back(loaded.labels[static_cast<std::size_t>(eta - 1)]);
        report["change_point_labels"] = labels;
    }
    if (det.preliminary)
        report["preliminary_change_points"] = det.preliminary->locations();

    // Segment coefficients: interval-scaled Lasso at lambda, or zeta sqrt(|I|) for dp-lr.
    const Partition part = changepoints_to_partition(det.changepoints, data.n());
    nlohmann::json segments = nlohmann::json::array();
    std::size_t refit_nonconverged = 0;
    for (const auto& I : part.intervals())
    {
        LassoConfig cfg;
        cfg.tol = spec.options.lasso_tol;
        cfg.max_sweeps = spec.options.max_sweeps;
        LassoFit fit;
        if (spec.method == Method::dp_lr)
        {
            cfg.lambda = *chosen.zeta;
            fit = fit_lasso_with_scale(data, I, std::sqrt(static_cast<double>(I.length())), cfg);
        }
        else
        {
            cfg.lambda = chosen.lambda;
            fit = fit_lasso(data, I, cfg);
        }
        if (!fit.converged)
            ++refit_nonconverged;
        nlohmann::json coefs = nlohmann::json::object();
        std::vector<std::string> support;
        for (Index j = 0; j < data.p(); ++j)
            if (fit.beta(j) != 0.0)
            {
                const auto& name = loaded.covariate_names[static_cast<std::size_t>(j)];
                support.push_back(name);
                coefs[name] = rounded(fit.beta(j));
            }
        nlohmann::json seg{{"start", I.s() + 1}, {"end", I.e()}, {"support", support}, {"coefficients", coefs}};
        if (!loaded.labels.empty())
        {
            seg["start_label"] = loaded.labels[static_cast<std::size_t>(I.s())];
            seg["end_label"] = loaded.labels[static_cast<std::size_t>(I.e() - 1)];
        }
        segments.push_back(std::move(seg));
    }
    report["segments"] = std::move(segments);

    nlohmann::json diag{{"fits_computed", det.fits_computed},
                        {"cache_hits", det.cache_hits},
                        {"nonconverged_fits", det.nonconverged_fits},
                        {"nonconverged_refine_solves", det.nonconverged_refine_solves},
                        {"nonconverged_segment_refits", refit_nonconverged}};
    if (spec.timing)
        diag["wall_time_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report["diagnostics"] = std::move(diag);
    report["seed"] = spec.seed;
    return report;
}

} // namespace cpreg
