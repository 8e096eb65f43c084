#include "cpreg/evaluation.hpp"
#include "cpreg/simulation.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace cpreg;

namespace
{

std::vector<Index> change_rows(const Matrix& betas)
{
    std::vector<Index> out;
    for (Index t = 1; t < betas.rows(); ++t)
        if (betas.row(t) != betas.row(t - 1))
            out.push_back(t + 1);
    return out;
}

} // namespace

TEST_CASE("base coefficients")
{
    const Vector b = base_coefficients(200, 10, 4.0);
    CHECK(b(0) == doctest::Approx(0.6325).epsilon(1e-4));
    CHECK(b(9) == b(0));
    CHECK(b(10) == 0.0);
    CHECK((2 * b).norm() == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("generator invariants")
{
    SimulationConfig cfg;
    cfg.kappa = 6;
    const SimulatedData sim = generate_simulation(cfg);
    CHECK(sim.data.n() == 600);
    CHECK(sim.data.p() == 200);
    CHECK(change_rows(sim.true_betas) == std::vector<Index>{121, 221, 351, 451});
    CHECK(sim.truth.locations() == std::vector<Index>{121, 221, 351, 451});
    for (Index eta : cfg.change_points)
        CHECK((sim.true_betas.row(eta - 1) - sim.true_betas.row(eta - 2)).norm() == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(cfg.min_spacing() == 100);

    const SimulatedData again = generate_simulation(cfg);
    CHECK(again.data.X() == sim.data.X());
    CHECK(again.data.y() == sim.data.y());
    cfg.seed = 2;
    CHECK_FALSE(generate_simulation(cfg).data.y() == sim.data.y());
}

TEST_CASE("random sign pattern")
{
    SimulationConfig cfg;
    cfg.n = 200;
    cfg.p = 30;
    cfg.change_points = {51, 101, 151};
    cfg.pattern = BetaPattern::random_sign;
    const SimulatedData sim = generate_simulation(cfg);
    CHECK(change_rows(sim.true_betas) == cfg.change_points);
    for (Index t = 0; t < 200; ++t)
        CHECK(sim.true_betas.row(t).cwiseAbs().isApprox(base_coefficients(30, 10, 4.0).transpose()));
}

TEST_CASE("config validation")
{
    SimulationConfig cfg;
    cfg.change_points = {121, 121};
    CHECK_THROWS_AS(generate_simulation(cfg), ValidationError);
    cfg.change_points = {1};
    CHECK_THROWS_AS(generate_simulation(cfg), ValidationError);
    cfg.change_points = {700};
    CHECK_THROWS_AS(generate_simulation(cfg), ValidationError);
    cfg = SimulationConfig{};
    cfg.d0 = 201;
    CHECK_THROWS_AS(generate_simulation(cfg), ValidationError);
    cfg = SimulationConfig{};
    cfg.kappa = 0;
    CHECK_THROWS_AS(generate_simulation(cfg), ValidationError);
    cfg = SimulationConfig{};
    cfg.p = 2;
    cfg.d0 = 1;
    Matrix bad(2, 2);
    bad << 1, 2, 2, 1;
    cfg.sigma = CovarianceSpec::full(bad);
    CHECK_THROWS_AS(generate_simulation(cfg), ValidationError);
}

TEST_CASE("sample covariance matches sigma")
{
    Matrix S(5, 5);
    for (Index i = 0; i < 5; ++i)
        for (Index j = 0; j < 5; ++j)
            S(i, j) = std::pow(0.5, std::abs(i - j));
    SimulationConfig cfg;
    cfg.n = 10000;
    cfg.p = 5;
    cfg.d0 = 2;
    cfg.change_points = {5001};
    cfg.sigma = CovarianceSpec::full(S);
    const SimulatedData sim = generate_simulation(cfg);
    const Matrix C = sim.data.X().transpose() * sim.data.X() / 10000.0;
    CHECK((C - S).cwiseAbs().maxCoeff() < 0.1);

    cfg.sigma = CovarianceSpec::diagonal(Vector::LinSpaced(5, 1.0, 3.0));
    const SimulatedData dg = generate_simulation(cfg);
    const Matrix Cd = dg.data.X().transpose() * dg.data.X() / 10000.0;
    CHECK((Cd - Matrix(Vector::LinSpaced(5, 1.0, 3.0).asDiagonal())).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("custom innovations")
{
    SimulationConfig cfg;
    cfg.n = 50;
    cfg.p = 3;
    cfg.d0 = 1;
    cfg.change_points = {26};
    cfg.innovation = [](std::mt19937_64&) { return 1.0; };
    const SimulatedData sim = generate_simulation(cfg);
    CHECK(sim.data.X().isOnes());
}

TEST_CASE("hausdorff examples")
{
    const ChangePointSet truth({121, 221, 351, 451});
    CHECK(hausdorff_scaled(truth, truth, 600).hausdorff_raw == 0.0);
    CHECK(hausdorff_scaled(truth, truth, 600).hausdorff_scaled == 0.0);

    const EvalResult r = hausdorff_scaled(ChangePointSet({120, 230}), ChangePointSet({121, 221}), 600);
    CHECK(r.hausdorff_raw == 9.0);
    CHECK(r.hausdorff_scaled == 9.0 / 600.0);
    CHECK(r.hausdorff_scaled == doctest::Approx(0.015));
    CHECK(r.per_point_errors == std::vector<Index>{1, 9});

    CHECK(hausdorff_scaled(ChangePointSet(), ChangePointSet({121}), 600).hausdorff_scaled == 1.0);
    CHECK(hausdorff_scaled(ChangePointSet({121}), ChangePointSet(), 600).hausdorff_scaled == 1.0);
    CHECK(hausdorff_scaled(ChangePointSet(), ChangePointSet(), 600).hausdorff_scaled == 0.0);

    const EvalResult asym = hausdorff_scaled(ChangePointSet({100}), truth, 600);
    CHECK(asym.hausdorff_raw == 351.0);
    CHECK(asym.k_hat == 1);
    CHECK(asym.k_true == 4);
    CHECK(asym.per_point_errors.empty());
}

TEST_CASE("hausdorff agrees with the literal definition")
{
    std::mt19937_64 rng(50);
    for (int trial = 0; trial < 300; ++trial)
    {
        std::vector<Index> a, b;
        for (Index t = 2; t <= 100; ++t)
        {
            if (rng() % 17 == 0)
                a.push_back(t);
            if (rng() % 23 == 0)
                b.push_back(t);
        }
        const EvalResult r = hausdorff_scaled(ChangePointSet(a), ChangePointSet(b), 100);
        CHECK(r.hausdorff_raw == oracle::hausdorff(a, b, 100));
        CHECK(hausdorff_scaled(ChangePointSet(b), ChangePointSet(a), 100).hausdorff_raw == r.hausdorff_raw);
        CHECK((r.hausdorff_scaled >= 0.0 && r.hausdorff_scaled <= 1.0));
    }
}

TEST_CASE("benchmark harness")
{
    SimulationConfig cfg;
    cfg.n = 120;
    cfg.p = 10;
    cfg.d0 = 3;
    cfg.kappa = 6;
    cfg.change_points = {41, 81};
    BenchmarkMethod fixed;
    fixed.label = "dp-fixed";
    fixed.fixed = MethodParams{0.5, 8.0, std::nullopt};
    fixed.options.min_seg_len = 5;
    fixed.options.stride = 2;
    BenchmarkMethod tuned;
    tuned.label = "dp-lr-cv";
    tuned.method = Method::dp_lr;
    tuned.grid = TuningGrid{{0.5, 1.0}, {4.0, 16.0}, std::vector<double>{1.0, 2.0}};
    tuned.center_lambda = true;
    tuned.options = fixed.options;
    BenchmarkMethod broken = fixed;
    broken.label = "broken";
    broken.fixed = MethodParams{-1.0, 8.0, std::nullopt};

    const BenchmarkTable a = run_benchmark({{"small", cfg}}, {fixed, tuned, broken}, 3, 10);
    const BenchmarkTable b = run_benchmark({{"small", cfg}}, {fixed, tuned, broken}, 3, 10, 2);
    REQUIRE(a.rows.size() == 3);
    CHECK(a.replicates.size() == 9);
    for (std::size_t i = 0; i < a.replicates.size(); ++i)
    {
        CHECK(a.replicates[i].seed == b.replicates[i].seed);
        CHECK(a.replicates[i].estimate == b.replicates[i].estimate);
    }
    CHECK(a.replicates[0].seed == 10);
    CHECK(a.rows[0].n_reps == 3);
    CHECK(a.rows[2].n_failed == 3);
    CHECK(a.rows[0].mean == b.rows[0].mean);
    CHECK(a.rows[1].mean == b.rows[1].mean);

    // Summary statistics recomputed from the replicate records.
    std::vector<double> h;
    for (const auto& r : a.replicates)
        if (r.method == "dp-fixed")
            h.push_back(r.eval.hausdorff_scaled);
    const double mean = (h[0] + h[1] + h[2]) / 3.0;
    double ss = 0;
    for (double x : h)
        ss += (x - mean) * (x - mean);
    CHECK(a.rows[0].mean == doctest::Approx(mean));
    CHECK(a.rows[0].sd == doctest::Approx(std::sqrt(ss / 2.0)));

    const std::string tsv = to_tsv(a);
    CHECK(tsv.find("dp-lr-cv") != std::string::npos);
    const auto j = to_json(a);
    CHECK(j["replicates"].size() == 9);
}
