#pragma once

#include "cpreg/methods.hpp"
#include "cpreg/simulation.hpp"
#include "cpreg/tuning.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cpreg
{

struct EvalResult
{
    double hausdorff_raw = 0.0;
    double hausdorff_scaled = 0.0;
    Index k_hat = 0;
    Index k_true = 0;
    /// |est_k - truth_k| in sorted order; filled only when k_hat == k_true.
    std::vector<Index> per_point_errors;
};

/// D = max(max_est min_truth |a - b|, max_truth min_est |a - b|), scaled = D / n.
/// If exactly one set is empty D = n; if both are empty D = 0.
EvalResult hausdorff_scaled(const ChangePointSet& est, const ChangePointSet& truth, Index n);

/// One method row of a benchmark. Without fixed parameters the method is tuned by odd/even
/// cross-validation on every replicate and then run on the full replicate.
struct BenchmarkMethod
{
    std::string label;
    Method method = Method::dp;
    std::optional<MethodParams> fixed;
    /// Defaults to TuningGrid::defaults when absent.
    std::optional<TuningGrid> grid;
    /// Simulation-only: recentre the lambda grid on the oracle-segment lambda of each replicate.
    bool center_lambda = false;
    std::vector<double> center_multipliers{0.5, 0.75, 1.0, 1.5, 2.0};
    CvStrategy cv_strategy = CvStrategy::staged;
    DetectionOptions options;
};

struct BenchmarkSetting
{
    std::string name;
    SimulationConfig config;
};

struct ReplicateRecord
{
    std::string setting;
    std::string method;
    int rep = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    EvalResult eval;
    ChangePointSet estimate;
    std::optional<TuningPoint> chosen;
};

struct BenchmarkRow
{
    std::string setting;
    std::string method;
    std::size_t n_reps = 0;
    std::size_t n_failed = 0;
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n_k_correct = 0;
    double mean_k_correct = 0.0;
    double sd_k_correct = 0.0;
    double frac_k_correct = 0.0;
};

struct BenchmarkTable
{
    std::vector<BenchmarkRow> rows;
    std::vector<ReplicateRecord> replicates;
};

/// Replicate r of every setting uses seed base_seed + r; all methods see the same replicate data.
/// A failing replicate is recorded and excluded from the summary statistics.
BenchmarkTable run_benchmark(const std::vector<BenchmarkSetting>& settings, const std::vector<BenchmarkMethod>& methods,
                             int reps, std::uint64_t base_seed, unsigned threads = 1);

/// Runs one method on one simulated replicate and scores it against the truth.
ReplicateRecord run_replicate(const SimulatedData& sim, const BenchmarkMethod& method);

/// Tab-separated summary, one line per (setting, method).
std::string to_tsv(const BenchmarkTable& table);
nlohmann::json to_json(const BenchmarkTable& table);

} // namespace cpreg
