// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            all criteria, including the full-scale Monte Carlo run
//   acceptance --quick    skips the full-scale run (the reduced smoke variant still runs)
//   acceptance --update-golden   rewrites the golden CLI report, then checks as usual

#include "cpreg/dp.hpp"
#include "cpreg/evaluation.hpp"
#include "cpreg/io.hpp"
#include "cpreg/refine.hpp"
#include "cpreg/simulation.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace cpreg;
namespace fs = std::filesystem;

namespace
{

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail)
{
    std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass)
        ++failures;
}

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- criterion 1

struct McSpec
{
    std::string label;
    Index n, p;
    std::vector<Index> change_points;
    Index stride, min_seg_len;
    int reps;
    double dp_limit, dplr_limit, time_limit;
};

void criterion_monte_carlo(const McSpec& s)
{
    const auto t0 = std::chrono::steady_clock::now();
    SimulationConfig cfg;
    cfg.n = s.n;
    cfg.p = s.p;
    cfg.change_points = s.change_points;
    cfg.kappa = 6;
    cfg.d0 = 10;
    cfg.sigma_eps = 1;
    std::vector<BenchmarkMethod> methods(2);
    methods[0].label = "DP";
    methods[0].method = Method::dp;
    methods[1].label = "DP.LR";
    methods[1].method = Method::dp_lr;
    for (auto& m : methods)
    {
        m.options.stride = s.stride;
        m.options.min_seg_len = s.min_seg_len;
    }
    const BenchmarkTable table = run_benchmark({{"kappa=6,d0=10", cfg}}, methods, s.reps, 1);
    const double elapsed = seconds_since(t0);
    const BenchmarkRow& dp = table.rows[0];
    const BenchmarkRow& lr = table.rows[1];
    const bool ok = dp.n_failed == 0 && lr.n_failed == 0 && dp.mean <= s.dp_limit && lr.mean <= s.dplr_limit &&
                    dp.frac_k_correct >= 0.8 && lr.frac_k_correct >= 0.8 && elapsed <= s.time_limit;
    std::ostringstream d;
    d << "n=" << s.n << " p=" << s.p << " reps=" << s.reps << "; DP mean " << fmt("%.4f", dp.mean) << " (sd "
      << fmt("%.4f", dp.sd) << ", K=K " << fmt("%.2f", dp.frac_k_correct) << ") limit " << s.dp_limit << "; DP.LR mean "
      << fmt("%.4f", lr.mean) << " (sd " << fmt("%.4f", lr.sd) << ", K=K " << fmt("%.2f", lr.frac_k_correct)
      << ") limit " << s.dplr_limit << "; " << fmt("%.0f", elapsed) << " s (limit " << s.time_limit << " s)";
    report("1 " + s.label, ok, d.str());
}

// ---------------------------------------------------------------- criterion 2

void criterion_refinement()
{
    int improved = 0;
    const int reps = 20;
    const double zeta = std::sqrt(std::log(600.0));
    for (int r = 0; r < reps; ++r)
    {
        SimulationConfig cfg;
        cfg.kappa = 6;
        cfg.d0 = 10;
        cfg.seed = 1000 + static_cast<std::uint64_t>(r);
        const SimulatedData sim = generate_simulation(cfg);
        std::vector<Index> shifted;
        for (Index eta : cfg.change_points)
            shifted.push_back(eta + 15);
        RefineConfig rc;
        rc.zeta = zeta;
        const RefineResult res = local_refine(sim.data, ChangePointSet(shifted), rc);
        const double before = hausdorff_scaled(ChangePointSet(shifted), sim.truth, cfg.n).hausdorff_scaled;
        const double after = hausdorff_scaled(res.refined, sim.truth, cfg.n).hausdorff_scaled;
        if (after < before)
            ++improved;
    }
    const double frac = static_cast<double>(improved) / reps;
    report("2 refinement improves", frac >= 0.9,
           std::to_string(improved) + "/" + std::to_string(reps) + " replicates improved (need >= 90%)");
}

// ---------------------------------------------------------------- criterion 3

void criterion_dp_exact()
{
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial)
    {
        const Index n = 2 + static_cast<Index>(rng() % 9);
        const Index p = 1 + static_cast<Index>(rng() % 3);
        const cpreg::Dataset d = oracle::random_dataset(rng, n, p);
        const double lambda = std::uniform_real_distribution<double>(0.05, 1.5)(rng);
        const double gamma = std::uniform_real_distribution<double>(0.1, 4.0)(rng);
        DpConfig cfg;
        cfg.gamma = gamma;
        cfg.lasso.lambda = lambda;
        cfg.lasso.tol = 1e-12;
        cfg.lasso.max_sweeps = 100000;
        cfg.min_seg_len = 1;
        cfg.stride = 1;
        const DpResult res = dp_partition(d, cfg);
        worst = std::max(worst, std::abs(res.objective - oracle::best_partition(d, lambda, gamma).objective));
    }
    report("3 dp exactness", worst <= 1e-6, "100 instances, max |dp - enumeration| = " + fmt("%.2e", worst));
}

// ---------------------------------------------------------------- criterion 4

void criterion_lasso_oracle()
{
    std::mt19937_64 rng(4040);
    double worst_obj = 0.0, worst_kkt = 0.0;
    int converged = 0;
    for (int trial = 0; trial < 50; ++trial)
    {
        const Index p = 1 + static_cast<Index>(rng() % 4);
        const Index len = 1 + static_cast<Index>(rng() % 10);
        const Index n = len + 1 + static_cast<Index>(rng() % 5);
        const cpreg::Dataset d = oracle::random_dataset(rng, n, p);
        const Index s = static_cast<Index>(rng() % static_cast<std::uint64_t>(n - len + 1));
        const IntegerInterval I(s, s + len);
        LassoConfig cfg;
        cfg.lambda = std::uniform_real_distribution<double>(0.02, 2.0)(rng);
        const LassoFit fit = fit_lasso(d, I, cfg);
        const auto [b, f] = oracle::lasso(d.X().middleRows(s, len), d.y().segment(s, len),
                                          cfg.lambda * oracle::scale(len, n, p));
        worst_obj = std::max(worst_obj, std::abs(fit.objective - f));
        if (fit.converged)
        {
            ++converged;
            worst_kkt = std::max(worst_kkt, kkt_residual(d, I, fit.beta, cfg.lambda));
        }
    }
    report("4 lasso oracle", worst_obj <= 1e-5 && worst_kkt <= 1e-5,
           "50 instances (" + std::to_string(converged) + " converged), max objective gap " + fmt("%.2e", worst_obj) +
               ", max kkt " + fmt("%.2e", worst_kkt));
}

// ---------------------------------------------------------------- criterion 5

void criterion_group_oracle()
{
    std::mt19937_64 rng(5050);
    double worst = 0.0;
    bool trivial_ok = true;
    for (int trial = 0; trial < 30; ++trial)
    {
        const Index p = 1 + static_cast<Index>(rng() % 3);
        const Index len = 2 + static_cast<Index>(rng() % 7);
        const cpreg::Dataset d = oracle::random_dataset(rng, len + 2, p);
        const Index s = 1, e = 1 + len;
        const Index split = s + 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(len - 1));
        RefineConfig rc;
        rc.zeta = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
        rc.group_tol = 1e-10;
        rc.max_block_sweeps = 100000;
        const TwoSegmentFit fit = group_two_segment_solve(d, s, e, split, rc);
        const auto [b1, b2] = oracle::group_fista(d, s, e, split, rc.zeta);
        worst = std::max(worst, std::abs(fit.objective - oracle::group_objective(d, s, e, split, b1, b2, rc.zeta)));

        // Kill condition: zeta at the threshold gives exactly zero.
        RefineConfig kill = rc;
        kill.zeta = group_kill_threshold(d, s, e, split);
        const TwoSegmentFit zero = group_two_segment_solve(d, s, e, split, kill);
        trivial_ok = trivial_ok && zero.beta1.isZero(0.0) && zero.beta2.isZero(0.0);

        // zeta = 0: segment-wise minimum-norm least squares.
        RefineConfig off = rc;
        off.zeta = 0.0;
        const TwoSegmentFit ls = group_two_segment_solve(d, s, e, split, off);
        const Matrix L = d.X().middleRows(s, split - s), R = d.X().middleRows(split, e - split);
        const Vector l = L.completeOrthogonalDecomposition().pseudoInverse() * d.y().segment(s, split - s);
        const Vector r = R.completeOrthogonalDecomposition().pseudoInverse() * d.y().segment(split, e - split);
        trivial_ok = trivial_ok && (ls.beta1 - l).norm() <= 1e-9 * (1 + l.norm()) &&
                     (ls.beta2 - r).norm() <= 1e-9 * (1 + r.norm());
    }
    report("5 group solver oracle", worst <= 1e-4 && trivial_ok,
           "30 instances, max objective gap " + fmt("%.2e", worst) + ", kill and zeta=0 cases " +
               (trivial_ok ? "exact" : "WRONG"));
}

// ---------------------------------------------------------------- criterion 6

void criterion_generator()
{
    bool ok = true;
    int configs = 0;
    for (double kappa : {4.0, 5.0, 6.0, 0.5, 12.5})
        for (Index d0 : {1, 10, 15, 20})
            for (auto cps : {std::vector<Index>{121, 221, 351, 451}, std::vector<Index>{2}, std::vector<Index>{300, 600}})
            {
                SimulationConfig cfg;
                cfg.kappa = kappa;
                cfg.d0 = d0;
                cfg.change_points = cps;
                cfg.seed = static_cast<std::uint64_t>(++configs);
                const SimulatedData a = generate_simulation(cfg);
                const SimulatedData b = generate_simulation(cfg);
                std::vector<Index> changes;
                for (Index t = 1; t < cfg.n; ++t)
                    if (a.true_betas.row(t) != a.true_betas.row(t - 1))
                    {
                        changes.push_back(t + 1);
                        const double jump = (a.true_betas.row(t) - a.true_betas.row(t - 1)).norm();
                        ok = ok && std::abs(jump - kappa) <= 1e-12 * kappa;
                    }
                ok = ok && changes == cps && a.data.X() == b.data.X() && a.data.y() == b.data.y() &&
                     a.true_betas == b.true_betas;
            }
    report("6 generator invariants", ok,
           std::to_string(configs) + " configs: jump norms = kappa, change indices exact, seeds bitwise deterministic");
}

// ---------------------------------------------------------------- criterion 7

void criterion_metric()
{
    bool ok = true;
    const ChangePointSet truth({121, 221, 351, 451});
    ok = ok && hausdorff_scaled(truth, truth, 600).hausdorff_scaled == 0.0;
    const EvalResult r = hausdorff_scaled(ChangePointSet({120, 230}), ChangePointSet({121, 221}), 600);
    ok = ok && r.hausdorff_raw == 9.0 && r.hausdorff_scaled == 9.0 / 600.0;
    ok = ok && hausdorff_scaled(ChangePointSet(), ChangePointSet({121}), 600).hausdorff_scaled == 1.0;
    ok = ok && hausdorff_scaled(ChangePointSet({121}), ChangePointSet(), 600).hausdorff_scaled == 1.0;
    ok = ok && hausdorff_scaled(ChangePointSet(), ChangePointSet(), 600).hausdorff_scaled == 0.0;
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 500 && ok; ++trial)
    {
        std::vector<Index> a, b;
        for (Index t = 2; t <= 200; ++t)
        {
            if (rng() % 31 == 0)
                a.push_back(t);
            if (rng() % 29 == 0)
                b.push_back(t);
        }
        ok = hausdorff_scaled(ChangePointSet(a), ChangePointSet(b), 200).hausdorff_raw == oracle::hausdorff(a, b, 200);
    }
    report("7 hausdorff metric", ok, "worked examples, empty-set convention, 500 random sets against the definition");
}

// ---------------------------------------------------------------- criterion 8

int run(const std::string& args)
{
    const std::string cmd = std::string(CPREG_CLI) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_cli(bool update_golden)
{
    const fs::path dir = fs::temp_directory_path() / "cpreg_acceptance";
    fs::create_directories(dir);
    const fs::path csv = dir / "golden.csv", scaled = dir / "scaled.csv";
    const fs::path out1 = dir / "run1.json", out2 = dir / "run2.json", out3 = dir / "scaled.json";
    const fs::path golden = fs::path(CPREG_GOLDEN_DIR) / "detect_dp_lr_cv.json";

    bool ok = run("simulate --n 200 --p 20 --change-points 71,141 --kappa 5 --d0 5 --seed 42 --output " +
                  csv.string()) == 0;
    const std::string detect = "detect --response y --method dp-lr --cv --stride 2 --min-seg-len 8 --seed 42 ";
    ok = ok && run(detect + "--input " + csv.string() + " --output " + out1.string()) == 0;
    ok = ok && run(detect + "--input " + csv.string() + " --output " + out2.string()) == 0;
    const std::string r1 = slurp(out1);
    const bool stable = ok && r1 == slurp(out2);

    if (update_golden)
    {
        fs::create_directories(golden.parent_path());
        std::ofstream(golden, std::ios::binary) << r1;
    }
    const bool matches_golden = fs::exists(golden) && slurp(golden) == r1;

    // Rescale the response by 3.7 and rerun.
    const LoadedData loaded = load_csv(csv, {"y", {}, std::nullopt});
    std::vector<std::string> names = loaded.covariate_names;
    {
        std::ofstream os(scaled);
        write_csv(os, cpreg::Dataset(loaded.data.X(), 3.7 * loaded.data.y()), names, "y");
    }
    ok = ok && run(detect + "--input " + scaled.string() + " --output " + out3.string()) == 0;
    bool invariant = false;
    std::string cps;
    if (ok)
    {
        const auto a = nlohmann::json::parse(r1), b = nlohmann::json::parse(slurp(out3));
        invariant = a["change_points"] == b["change_points"];
        cps = a["change_points"].dump();
    }
    report("8 cli golden run", ok && stable && matches_golden && invariant,
           std::string("byte-stable ") + (stable ? "yes" : "no") + ", matches golden " +
               (matches_golden ? "yes" : "no") + ", change points " + cps + " invariant under y -> 3.7 y " +
               (invariant ? "yes" : "no"));
}

} // namespace

int main(int argc, char** argv)
{
    bool quick = false, update_golden = false;
    for (int i = 1; i < argc; ++i)
    {
        const std::string a = argv[i];
        if (a == "--quick")
            quick = true;
        else if (a == "--update-golden")
            update_golden = true;
        else
        {
            std::cerr << "usage: acceptance [--quick] [--update-golden]\n";
            return 2;
        }
    }

    criterion_monte_carlo({"monte carlo smoke", 300, 100, {61, 111, 176, 226}, 3, 5, 5, 0.06, 0.04, 900.0});
    if (!quick)
        criterion_monte_carlo({"monte carlo full", 600, 200, {121, 221, 351, 451}, 5, 10, 20, 0.03, 0.02, 4.0 * 3600});
    criterion_refinement();
    criterion_dp_exact();
    criterion_lasso_oracle();
    criterion_group_oracle();
    criterion_generator();
    criterion_metric();
    criterion_cli(update_golden);

    std::printf("%s: %d criterion line(s) failed\n", failures ? "FAILED" : "ALL PASSED", failures);
    return failures ? 1 : 0;
}
