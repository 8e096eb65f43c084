#include "cpreg/tuning.hpp"

#include "cpreg/parallel.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>

namespace cpreg
{

void TuningGrid::validate(bool need_zetas) const
{
    auto check = [](const std::vector<double>& v, const char* what) {
        if (v.empty())
            throw ValidationError(std::string("tuning grid: no ") + what + " values");
        for (double x : v)
            if (!(x >= 0.0) || !std::isfinite(x))
                throw ValidationError(std::string("tuning grid: ") + what + " values must be finite and nonnegative");
    };
    check(lambdas, "lambda");
    check(gammas, "gamma");
    if (zetas)
        check(*zetas, "zeta");
    else if (need_zetas)
        throw ValidationError("tuning grid: dp-lr needs zeta values");
}

TuningGrid TuningGrid::defaults(Index n, Index p, bool with_zetas)
{
    const double L = std::log(static_cast<double>(std::max(n, p)));
    TuningGrid g;
    for (double c : {0.5, 1.0, 2.0, 4.0, 8.0})
        g.lambdas.push_back(c * std::sqrt(L));
    for (double c : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0})
        g.gammas.push_back(c * L);
    if (with_zetas)
    {
        g.zetas.emplace();
        for (double c : {0.5, 1.0, 2.0, 4.0})
            g.zetas->push_back(c * std::sqrt(L));
    }
    return g;
}

namespace
{

Subsequence take_rows(const Dataset& data, Index first)
{
    const Index m = (data.n() - first + 1) / 2;
    Matrix X(m, data.p());
    Vector y(m);
    std::vector<Index> full(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j)
    {
        const Index row = first + 2 * j;
        X.row(j) = data.X().row(row);
        y(j) = data.y()(row);
        full[static_cast<std::size_t>(j)] = row + 1;
    }
    return {Dataset(std::move(X), std::move(y)), std::move(full)};
}

} // namespace

OddEvenSplit split_odd_even(const Dataset& data)
{
    if (data.n() < 4)
        throw ValidationError("odd/even split needs n >= 4");
    return {take_rows(data, 0), take_rows(data, 1), data.n()};
}

double validation_loss(const Subsequence& valid, std::span<const SegmentCoefficients> segments)
{
    double total = 0.0;
    const Index m = valid.data.n();
    for (Index j = 0; j < m; ++j)
    {
        const Index t = valid.full_index[static_cast<std::size_t>(j)];
        const SegmentCoefficients* seg = nullptr;
        for (const auto& s : segments)
            if (s.interval.contains(t))
            {
                seg = &s;
                break;
            }
        if (!seg)
            throw ValidationError("validation_loss: row " + std::to_string(t) + " is not covered by any segment");
        const double r = valid.data.X().row(j).dot(seg->beta) - valid.data.y()(j);
        total += r * r;
    }
    return total / static_cast<double>(m);
}

Partition train_partition_to_full(const Partition& train, Index n_full)
{
    std::vector<IntegerInterval> out;
    out.reserve(train.size());
    for (std::size_t k = 0; k < train.size(); ++k)
    {
        const auto& I = train.intervals()[k];
        const Index e = k + 1 == train.size() ? n_full : 2 * I.e();
        out.emplace_back(2 * I.s(), e);
    }
    return Partition(std::move(out), n_full);
}

ChangePointSet train_changepoints_to_full(const ChangePointSet& train, Index n_full)
{
    std::vector<Index> out;
    out.reserve(train.locations().size());
    for (Index j : train.locations())
        out.push_back(OddEvenSplit::train_to_full(j));
    return ChangePointSet(std::move(out), n_full);
}

DetectionOptions training_options(const DetectionOptions& full)
{
    DetectionOptions t = full;
    t.stride = std::max<Index>(1, (full.stride + 1) / 2);
    t.min_seg_len = std::max<Index>(1, (full.min_seg_len + 1) / 2);
    t.eta_stride = std::max<Index>(1, (full.eta_stride + 1) / 2);
    return t;
}

namespace
{

struct PointScore
{
    CvEntry entry;
    ChangePointSet train_cps;
};

// Scores the change points `cps` (training timeline) by refitting each training segment and
// predicting the validation rows. `refit` maps a training interval to its coefficient vector.
template <typename Refit>
double score(const OddEvenSplit& split, const ChangePointSet& cps, Refit&& refit)
{
    const Partition train_part = changepoints_to_partition(cps, split.train.data.n());
    const Partition full_part = train_partition_to_full(train_part, split.n_full);
    std::vector<SegmentCoefficients> segs;
    segs.reserve(train_part.size());
    for (std::size_t k = 0; k < train_part.size(); ++k)
        segs.push_back({full_part.intervals()[k], refit(train_part.intervals()[k])});
    return validation_loss(split.valid, segs);
}

using IntervalKey = std::pair<Index, Index>;

std::vector<PointScore> scores_for_lambda(const OddEvenSplit& split, Method method, double lambda,
                                          const TuningGrid& grid, const DetectionOptions& train_opts)
{
    const Dataset& train = split.train.data;
    LossCache cache(lambda);
    LassoConfig refit_cfg;
    refit_cfg.lambda = lambda;
    refit_cfg.tol = train_opts.lasso_tol;
    refit_cfg.max_sweeps = train_opts.max_sweeps;

    std::map<IntervalKey, Vector> lasso_memo;
    auto lasso_refit = [&](const IntegerInterval& I) -> Vector {
        auto [it, fresh] = lasso_memo.try_emplace({I.s(), I.e()});
        if (fresh)
            it->second = fit_lasso(train, I, refit_cfg).beta;
        return it->second;
    };
    std::map<std::pair<IntervalKey, double>, Vector> zeta_memo;
    auto zeta_refit = [&](const IntegerInterval& I, double zeta) -> Vector {
        auto [it, fresh] = zeta_memo.try_emplace({{I.s(), I.e()}, zeta});
        if (fresh)
        {
            LassoConfig cfg = refit_cfg;
            cfg.lambda = zeta;
            it->second = fit_lasso_with_scale(train, I, std::sqrt(static_cast<double>(I.length())), cfg).beta;
        }
        return it->second;
    };
    std::map<std::pair<std::vector<Index>, double>, std::pair<ChangePointSet, std::size_t>> refine_memo;

    std::vector<PointScore> out;
    for (double gamma : grid.gammas)
    {
        Detection det = run_method(train, method == Method::binseg ? Method::binseg : Method::dp,
                                   {lambda, gamma, std::nullopt}, train_opts, &cache);
        if (method != Method::dp_lr)
        {
            CvEntry e{{lambda, gamma, std::nullopt}, score(split, det.changepoints, lasso_refit),
                      det.changepoints.k_hat(), det.nonconverged_fits};
            out.push_back({e, det.changepoints});
            continue;
        }
        for (double zeta : *grid.zetas)
        {
            auto key = std::make_pair(det.changepoints.locations(), zeta);
            auto it = refine_memo.find(key);
            if (it == refine_memo.end())
            {
                const RefineResult r = local_refine(train, det.changepoints, train_opts.refine_config(zeta));
                it = refine_memo.emplace(std::move(key), std::make_pair(r.refined, r.nonconverged_solves)).first;
            }
            const ChangePointSet& refined = it->second.first;
            const double loss =
                score(split, refined, [&](const IntegerInterval& I) { return zeta_refit(I, zeta); });
            CvEntry e{{lambda, gamma, zeta}, loss, refined.k_hat(), det.nonconverged_fits + it->second.second};
            out.push_back({e, refined});
        }
    }
    return out;
}

} // namespace

CvResult cross_validate(const Dataset& data, Method method, const TuningGrid& grid, const DetectionOptions& opts,
                        CvStrategy strategy)
{
    grid.validate(method == Method::dp_lr);
    if (method == Method::dp_lr && strategy == CvStrategy::staged)
    {
        CvResult first = cross_validate(data, Method::dp, {grid.lambdas, grid.gammas, std::nullopt}, opts);
        const TuningGrid second_grid{{first.best.lambda}, {first.best.gamma}, grid.zetas};
        CvResult second = cross_validate(data, Method::dp_lr, second_grid, opts, CvStrategy::joint);
        first.table.insert(first.table.end(), second.table.begin(), second.table.end());
        second.table = std::move(first.table);
        return second;
    }
    const OddEvenSplit split = split_odd_even(data);
    DetectionOptions train_opts = training_options(opts);

    // Parallelism goes to the lambda loop; each lambda runs its pipeline single-threaded.
    const unsigned outer = std::min<unsigned>(opts.threads, static_cast<unsigned>(grid.lambdas.size()));
    if (outer > 1)
        train_opts.threads = 1;
    std::vector<std::vector<PointScore>> per_lambda(grid.lambdas.size());
    parallel_for(grid.lambdas.size(), outer, [&](std::size_t i) {
        per_lambda[i] = scores_for_lambda(split, method, grid.lambdas[i], grid, train_opts);
    });

    CvResult result;
    const PointScore* best = nullptr;
    for (const auto& scores : per_lambda)
        for (const auto& ps : scores)
        {
            result.table.push_back(ps.entry);
            if (!best)
            {
                best = &ps;
                continue;
            }
            const double a = ps.entry.validation_loss, b = best->entry.validation_loss;
            const double tie = 1e-12 * std::max(1.0, std::abs(b));
            if (a < b - tie || (a <= b + tie && best->entry.point < ps.entry.point))
                best = &ps;
        }
    result.best = best->entry.point;
    result.full = result.best;
    result.full.gamma *= static_cast<double>(data.n()) / static_cast<double>(split.train.data.n());
    result.best_loss = best->entry.validation_loss;
    result.train_changepoints = train_changepoints_to_full(best->train_cps, data.n());
    return result;
}

CvResult cross_validate_dp(const Dataset& data, const TuningGrid& grid, const DetectionOptions& opts)
{
    return cross_validate(data, Method::dp, grid, opts);
}

CvResult cross_validate_refined(const Dataset& data, const TuningGrid& grid, const DetectionOptions& opts,
                                CvStrategy strategy)
{
    return cross_validate(data, Method::dp_lr, grid, opts, strategy);
}

std::vector<std::pair<double, double>> oracle_lambda_curve(const Dataset& data, const ChangePointSet& truth,
                                                           const Matrix& true_betas, std::span<const double> lambdas)
{
    if (true_betas.rows() != data.n() || true_betas.cols() != data.p())
        throw ValidationError("oracle_lambda_curve: true_betas must be n x p");
    const OddEvenSplit split = split_odd_even(data);
    const Index m = split.train.data.n();

    // A full change point eta starts the training segment at the first odd index >= eta.
    std::vector<Index> train_cps;
    for (Index eta : truth.locations())
    {
        const Index j = OddEvenSplit::full_to_train(eta % 2 == 1 ? eta : eta + 1);
        if (j >= 2 && j <= m && (train_cps.empty() || j > train_cps.back()))
            train_cps.push_back(j);
    }
    const Partition part = changepoints_to_partition(ChangePointSet(train_cps, m), m);

    std::vector<std::pair<double, double>> curve;
    for (double lambda : lambdas)
    {
        LassoConfig cfg;
        cfg.lambda = lambda;
        double sq = 0.0;
        for (const auto& I : part.intervals())
        {
            const Vector beta = fit_lasso(split.train.data, I, cfg).beta;
            for (Index j = I.s(); j < I.e(); ++j)
            {
                const Index full_row = split.train.full_index[static_cast<std::size_t>(j)] - 1;
                sq += (beta - true_betas.row(full_row).transpose()).squaredNorm();
            }
        }
        curve.emplace_back(lambda, sq / static_cast<double>(m));
    }
    return curve;
}

} // namespace cpreg
