#include "cpreg/evaluation.hpp"

#include "cpreg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace cpreg
{

namespace
{

Index directed(const std::vector<Index>& from, const std::vector<Index>& to)
{
    Index worst = 0;
    for (Index a : from)
    {
        // `to` is sorted; the nearest element is one of the neighbours of the insertion point.
        auto it = std::lower_bound(to.begin(), to.end(), a);
        Index best = std::numeric_limits<Index>::max();
        if (it != to.end())
            best = std::min(best, *it - a);
        if (it != to.begin())
            best = std::min(best, a - *std::prev(it));
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace

EvalResult hausdorff_scaled(const ChangePointSet& est, const ChangePointSet& truth, Index n)
{
    if (n < 1)
        throw ValidationError("hausdorff: n must be positive");
    EvalResult r;
    r.k_hat = est.k_hat();
    r.k_true = truth.k_hat();
    Index D = 0;
    if (est.empty() != truth.empty())
        D = n;
    else if (!est.empty())
        D = std::max(directed(est.locations(), truth.locations()), directed(truth.locations(), est.locations()));
    r.hausdorff_raw = static_cast<double>(D);
    r.hausdorff_scaled = static_cast<double>(D) / static_cast<double>(n);
    if (r.k_hat == r.k_true)
        for (std::size_t k = 0; k < est.locations().size(); ++k)
            r.per_point_errors.push_back(std::abs(est[k] - truth[k]));
    return r;
}

ReplicateRecord run_replicate(const SimulatedData& sim, const BenchmarkMethod& bm)
{
    ReplicateRecord rec;
    rec.method = bm.label;
    const Dataset& data = sim.data;
    MethodParams params;
    if (bm.fixed)
        params = *bm.fixed;
    else
    {
        TuningGrid grid = bm.grid ? *bm.grid : TuningGrid::defaults(data.n(), data.p(), bm.method == Method::dp_lr);
        if (bm.method == Method::dp_lr && !grid.zetas)
            grid.zetas = TuningGrid::defaults(data.n(), data.p(), true).zetas;
        if (bm.center_lambda)
        {
            const auto curve = oracle_lambda_curve(data, sim.truth, sim.true_betas, grid.lambdas);
            const auto best = std::min_element(curve.begin(), curve.end(),
                                               [](const auto& a, const auto& b) { return a.second < b.second; });
            grid.lambdas.clear();
            for (double m : bm.center_multipliers)
                grid.lambdas.push_back(m * best->first);
        }
        const CvResult cv = cross_validate(data, bm.method, grid, bm.options, bm.cv_strategy);
        rec.chosen = cv.full;
        params = cv.full.params();
    }
    const Detection det = run_method(data, bm.method, params, bm.options);
    rec.estimate = det.changepoints;
    rec.eval = hausdorff_scaled(det.changepoints, sim.truth, data.n());
    return rec;
}

namespace
{

std::pair<double, double> mean_sd(const std::vector<double>& v)
{
    if (v.empty())
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    double mean = 0.0;
    for (double x : v)
        mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2)
        return {mean, 0.0};
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

} // namespace

BenchmarkTable run_benchmark(const std::vector<BenchmarkSetting>& settings, const std::vector<BenchmarkMethod>& methods,
                             int reps, std::uint64_t base_seed, unsigned threads)
{
    if (reps < 1)
        throw ValidationError("benchmark: reps must be at least 1");
    const std::size_t per_setting = static_cast<std::size_t>(reps) * methods.size();
    std::vector<ReplicateRecord> records(settings.size() * per_setting);

    // One job per (setting, replicate); methods inside a job share the generated data.
    const std::size_t jobs = settings.size() * static_cast<std::size_t>(reps);
    std::vector<BenchmarkMethod> inner = methods;
    if (threads > 1)
        for (auto& m : inner)
            m.options.threads = 1;
    parallel_for(jobs, threads, [&](std::size_t job) {
        const std::size_t si = job / static_cast<std::size_t>(reps);
        const int r = static_cast<int>(job % static_cast<std::size_t>(reps));
        SimulationConfig cfg = settings[si].config;
        cfg.seed = base_seed + static_cast<std::uint64_t>(r);
        std::optional<SimulatedData> sim;
        std::string gen_error;
        try
        {
            sim = generate_simulation(cfg);
        }
        catch (const std::exception& e)
        {
            gen_error = e.what();
        }
        for (std::size_t mi = 0; mi < inner.size(); ++mi)
        {
            ReplicateRecord rec;
            if (sim)
            {
                try
                {
                    rec = run_replicate(*sim, inner[mi]);
                }
                catch (const std::exception& e)
                {
                    rec.failed = true;
                    rec.error = e.what();
                }
            }
            else
            {
                rec.failed = true;
                rec.error = gen_error;
            }
            rec.setting = settings[si].name;
            rec.method = inner[mi].label;
            rec.rep = r;
            rec.seed = cfg.seed;
            records[si * per_setting + mi * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)] =
                std::move(rec);
        }
    });

    BenchmarkTable table;
    for (std::size_t si = 0; si < settings.size(); ++si)
        for (std::size_t mi = 0; mi < methods.size(); ++mi)
        {
            BenchmarkRow row;
            row.setting = settings[si].name;
            row.method = methods[mi].label;
            std::vector<double> all, kk;
            for (int r = 0; r < reps; ++r)
            {
                const auto& rec = records[si * per_setting + mi * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)];
                ++row.n_reps;
                if (rec.failed)
                {
                    ++row.n_failed;
                    continue;
                }
                all.push_back(rec.eval.hausdorff_scaled);
                if (rec.eval.k_hat == rec.eval.k_true)
                    kk.push_back(rec.eval.hausdorff_scaled);
            }
            std::tie(row.mean, row.sd) = mean_sd(all);
            std::tie(row.mean_k_correct, row.sd_k_correct) = mean_sd(kk);
            row.n_k_correct = kk.size();
            row.frac_k_correct = all.empty() ? 0.0 : static_cast<double>(kk.size()) / static_cast<double>(all.size());
            table.rows.push_back(row);
        }
    table.replicates = std::move(records);
    return table;
}

std::string to_tsv(const BenchmarkTable& table)
{
    std::ostringstream os;
    os << "setting\tmethod\tmean\tsd\tn_reps\tn_failed\tmean_khat_eq_k\tsd_khat_eq_k\tn_khat_eq_k\tfrac_khat_eq_k\n";
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.6f", x);
        return std::string(buf);
    };
    for (const auto& r : table.rows)
        os << r.setting << '\t' << r.method << '\t' << num(r.mean) << '\t' << num(r.sd) << '\t' << r.n_reps << '\t'
           << r.n_failed << '\t' << num(r.mean_k_correct) << '\t' << num(r.sd_k_correct) << '\t' << r.n_k_correct
           << '\t' << num(r.frac_k_correct) << '\n';
    return os.str();
}

nlohmann::json to_json(const BenchmarkTable& table)
{
    auto num = [](double x) -> nlohmann::json {
        if (std::isnan(x))
            return nullptr;
        return x;
    };
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table.rows)
        rows.push_back({{"setting", r.setting},
                        {"method", r.method},
                        {"mean", num(r.mean)},
                        {"sd", num(r.sd)},
                        {"n_reps", r.n_reps},
                        {"n_failed", r.n_failed},
                        {"fraction_khat_eq_k", r.frac_k_correct},
                        {"khat_eq_k", {{"mean", num(r.mean_k_correct)}, {"sd", num(r.sd_k_correct)}, {"n", r.n_k_correct}}}});
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& rec : table.replicates)
    {
        nlohmann::json j{{"setting", rec.setting}, {"method", rec.method}, {"rep", rec.rep}, {"seed", rec.seed},
                         {"failed", rec.failed}};
        if (rec.failed)
            j["error"] = rec.error;
        else
        {
            j["hausdorff_scaled"] = rec.eval.hausdorff_scaled;
            j["k_hat"] = rec.eval.k_hat;
            j["change_points"] = rec.estimate.locations();
            if (rec.chosen)
            {
                j["lambda"] = rec.chosen->lambda;
                j["gamma"] = rec.chosen->gamma;
                if (rec.chosen->zeta)
                    j["zeta"] = *rec.chosen->zeta;
            }
        }
        reps.push_back(std::move(j));
    }
    return {{"summary", rows}, {"replicates", reps}};
}

} // namespace cpreg
