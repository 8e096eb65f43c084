#include "cpreg/refine.hpp"
#include "cpreg/simulation.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace cpreg;

namespace
{

RefineConfig refine_config(double zeta)
{
    RefineConfig cfg;
    cfg.zeta = zeta;
    cfg.group_tol = 1e-10;
    cfg.max_block_sweeps = 100000;
    return cfg;
}

} // namespace

TEST_CASE("shrink interval")
{
    CHECK(shrink_interval(0, 121, 221) == std::pair<Index, Index>{40, 188});
    CHECK(shrink_interval(0, 100, 200) == std::pair<Index, Index>{33, 167});
    CHECK(shrink_interval(0, 1, 2) == std::pair<Index, Index>{0, 2});
    CHECK_THROWS_AS(shrink_interval(5, 5, 9), ValidationError);
    CHECK_THROWS_AS(shrink_interval(0, 600, 600), ValidationError);
    for (Index prev = 0; prev < 30; ++prev)
        for (Index cur = prev + 1; cur < 40; ++cur)
            for (Index next = cur + 1; next < 50; ++next)
            {
                const auto [s, e] = shrink_interval(prev, cur, next);
                CHECK(s < cur);
                CHECK(cur <= e);
                CHECK(e - s >= 2);
                CHECK(s == static_cast<Index>(std::floor(2.0 * prev / 3.0 + cur / 3.0 + 1e-12)));
                CHECK(e == static_cast<Index>(std::ceil(cur / 3.0 + 2.0 * next / 3.0 - 1e-12)));
            }
}

TEST_CASE("block minimizer matches a dense search")
{
    std::mt19937_64 rng(30);
    std::uniform_real_distribution<double> U(-3, 3), D(0.1, 4);
    for (int trial = 0; trial < 30; ++trial)
    {
        const double d1 = D(rng), d2 = D(rng), h1 = U(rng), h2 = U(rng), q = D(rng) / 2;
        const auto [w1, w2] = group_block_minimizer(d1, d2, h1, h2, q);
        auto f = [&](double a, double b) {
            return d1 * a * a + d2 * b * b - 2 * (h1 * a + h2 * b) + 2 * q * std::hypot(a, b);
        };
        const double at = f(w1, w2);
        double best = f(0, 0);
        for (double a = -3; a <= 3; a += 0.01)
            for (double b = -3; b <= 3; b += 0.01)
                best = std::min(best, f(a, b));
        CHECK(at <= best + 1e-12);
        // Stationarity away from the origin.
        const double r = std::hypot(w1, w2);
        if (r > 0)
        {
            CHECK(std::abs(d1 * w1 - h1 + q * w1 / r) < 1e-9);
            CHECK(std::abs(d2 * w2 - h2 + q * w2 / r) < 1e-9);
        }
        else
            CHECK(std::hypot(h1, h2) <= q);
    }
}

TEST_CASE("zeta zero gives segment least squares")
{
    std::mt19937_64 rng(31);
    const Dataset d = oracle::random_dataset(rng, 20, 3);
    const TwoSegmentFit fit = group_two_segment_solve(d, 2, 18, 9, refine_config(0.0));
    const Vector l = d.X().middleRows(2, 7).colPivHouseholderQr().solve(d.y().segment(2, 7));
    const Vector r = d.X().middleRows(9, 9).colPivHouseholderQr().solve(d.y().segment(9, 9));
    CHECK((fit.beta1 - l).norm() < 1e-10);
    CHECK((fit.beta2 - r).norm() < 1e-10);
    CHECK(fit.change_point() == 10);

    // Rank-deficient left segment: minimum-norm solution.
    const TwoSegmentFit thin = group_two_segment_solve(d, 0, 10, 2, refine_config(0.0));
    const Matrix L = d.X().topRows(2);
    const Vector pinv = L.transpose() * (L * L.transpose()).inverse() * d.y().head(2);
    CHECK((thin.beta1 - pinv).norm() < 1e-10);
}

TEST_CASE("kill threshold zeroes both segments")
{
    std::mt19937_64 rng(32);
    const Dataset d = oracle::random_dataset(rng, 16, 3);
    const double kill = group_kill_threshold(d, 1, 15, 7);
    const TwoSegmentFit at = group_two_segment_solve(d, 1, 15, 7, refine_config(kill));
    CHECK(at.beta1.isZero(0.0));
    CHECK(at.beta2.isZero(0.0));
    CHECK(at.objective == doctest::Approx(d.y().segment(1, 14).squaredNorm()));
    const TwoSegmentFit below = group_two_segment_solve(d, 1, 15, 7, refine_config(0.99 * kill));
    CHECK_FALSE((below.beta1.isZero(0.0) && below.beta2.isZero(0.0)));
}

TEST_CASE("group solver matches the FISTA oracle")
{
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 20; ++trial)
    {
        const Index p = 1 + static_cast<Index>(rng() % 3);
        const Index len = 2 + static_cast<Index>(rng() % 7);
        const Dataset d = oracle::random_dataset(rng, len + 3, p);
        const Index s = 1, e = 1 + len;
        const Index split = s + 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(len - 1));
        const double zeta = 0.2 + 2.0 * std::uniform_real_distribution<double>(0, 1)(rng);
        const TwoSegmentFit fit = group_two_segment_solve(d, s, e, split, refine_config(zeta));
        const auto [b1, b2] = oracle::group_fista(d, s, e, split, zeta);
        const double ref = oracle::group_objective(d, s, e, split, b1, b2, zeta);
        CAPTURE(trial);
        CHECK(fit.converged);
        CHECK(std::abs(fit.objective - ref) <= 1e-4);
        CHECK(fit.objective <= ref + 1e-9);
        CHECK(fit.objective == doctest::Approx(oracle::group_objective(d, s, e, split, fit.beta1, fit.beta2, zeta)));
    }
}

TEST_CASE("reparameterized objective is identical")
{
    std::mt19937_64 rng(34);
    const Dataset d = oracle::random_dataset(rng, 30, 4);
    Vector b1 = Vector::Random(4), b2 = Vector::Random(4);
    const double f = group_objective(d, 3, 27, 12, b1, b2, 1.3);
    const Vector u = std::sqrt(9.0) * b1, v = std::sqrt(15.0) * b2;
    CHECK(group_objective_uv(d, 3, 27, 12, u, v, 1.3) == doctest::Approx(f).epsilon(1e-12));
}

TEST_CASE("incremental moments match direct moments")
{
    std::mt19937_64 rng(35);
    const Dataset d = oracle::random_dataset(rng, 40, 5);
    TwoSegmentMoments<double> mom(d, 4, 36, 6);
    mom.advance(d, 17);
    const TwoSegmentMoments<double> direct(d, 4, 36, 17);
    CHECK((mom.gram_left - direct.gram_left).norm() < 1e-10);
    CHECK((mom.gram_right - direct.gram_right).norm() < 1e-10);
    CHECK((mom.xty_left - direct.xty_left).norm() < 1e-10);
    CHECK(mom.yty_right == doctest::Approx(direct.yty_right));
}

TEST_CASE("warm and cold two-segment solves agree")
{
    std::mt19937_64 rng(36);
    const Dataset d = oracle::random_dataset(rng, 50, 8);
    const RefineConfig cfg = refine_config(1.0);
    const TwoSegmentMoments<double> mom(d, 0, 50, 22);
    const TwoSegmentFit cold = solve_two_segment(d, mom, cfg);
    const TwoSegmentFit warm =
        solve_two_segment(d, mom, cfg, std::make_optional(std::make_pair(Vector(Vector::Ones(8)), Vector(-Vector::Ones(8)))));
    CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-8));
    RefineConfig traced = cfg;
    traced.record_trace = true;
    const TwoSegmentFit t = solve_two_segment(d, mom, traced);
    for (std::size_t k = 1; k < t.trace.size(); ++k)
        CHECK(t.trace[k] <= t.trace[k - 1] + 1e-10 * std::abs(t.trace[k - 1]));
}

TEST_CASE("noiseless truth is a fixed point")
{
    SimulationConfig cfg;
    cfg.n = 200;
    cfg.p = 20;
    cfg.d0 = 4;
    cfg.kappa = 6;
    cfg.change_points = {61, 131};
    cfg.sigma_eps = 0.0;
    cfg.seed = 5;
    const SimulatedData sim = generate_simulation(cfg);
    const RefineResult res = local_refine(sim.data, sim.truth, refine_config(0.05));
    CHECK(res.refined == sim.truth);
    CHECK(res.refined.k_hat() == 2);
}

TEST_CASE("flat objective picks the smallest split")
{
    const Dataset d(Matrix::Random(60, 3), Vector::Zero(60));
    const RefineResult res = local_refine(d, ChangePointSet({21, 41}), refine_config(1.0));
    // Boundaries 0, 20, 40, 60: windows (6, 34] and (26, 54].
    REQUIRE(res.windows.size() == 2);
    CHECK(res.windows[0].s == 6);
    CHECK(res.windows[1].s == 26);
    CHECK(res.refined.locations() == std::vector<Index>{8, 28});
}

TEST_CASE("count is preserved and windows contain the truth")
{
    std::mt19937_64 rng(37);
    SimulationConfig cfg;
    cfg.n = 300;
    cfg.p = 30;
    cfg.kappa = 5;
    cfg.change_points = {61, 111, 176, 226};
    for (int trial = 0; trial < 5; ++trial)
    {
        cfg.seed = 100 + static_cast<std::uint64_t>(trial);
        const SimulatedData sim = generate_simulation(cfg);
        // Spacing is at least 50, so errors up to 50 / 7 keep each true change point in its own window.
        std::vector<Index> prelim;
        for (Index eta : cfg.change_points)
            prelim.push_back(eta + static_cast<Index>(rng() % 15) - 7);
        const RefineResult res = local_refine(sim.data, ChangePointSet(prelim), refine_config(2.0));
        CHECK(res.refined.k_hat() == 4);
        for (std::size_t k = 0; k < 4; ++k)
        {
            const auto& w = res.windows[k];
            const Index truth_split = cfg.change_points[k] - 1;
            CHECK(w.s < truth_split);
            CHECK(truth_split < w.e);
            for (std::size_t j = 0; j < 4; ++j)
                if (j != k)
                    CHECK_FALSE((w.s < cfg.change_points[j] - 1 && cfg.change_points[j] - 1 < w.e));
        }
    }

    // Adjacent preliminary points: refined locations stay strictly increasing, count unchanged.
    const SimulatedData sim = generate_simulation(cfg);
    const RefineResult tight = local_refine(sim.data, ChangePointSet({100, 101, 102}), refine_config(1.0));
    CHECK(tight.refined.k_hat() == 3);
}

TEST_CASE("empty preliminary set")
{
    const Dataset d(Matrix::Random(20, 2), Vector::Random(20));
    CHECK(local_refine(d, ChangePointSet(), refine_config(1.0)).refined.empty());
}
