#pragma once

#include "cpreg/methods.hpp"

#include <compare>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cpreg
{

struct TuningPoint
{
    double lambda = 0.0;
    double gamma = 0.0;
    std::optional<double> zeta;

    friend bool operator==(const TuningPoint&, const TuningPoint&) = default;
    friend std::partial_ordering operator<=>(const TuningPoint&, const TuningPoint&) = default;

    MethodParams params() const { return {lambda, gamma, zeta}; }
};

struct TuningGrid
{
    std::vector<double> lambdas;
    std::vector<double> gammas;
    std::optional<std::vector<double>> zetas;

    void validate(bool need_zetas) const;

    /// lambda in {0.5,1,2,4,8} sqrt(L), gamma in {0.5,...,16} L, zeta in {0.5,1,2,4} sqrt(L),
    /// with L = log(max(n, p)).
    static TuningGrid defaults(Index n, Index p, bool with_zetas);
};

/// Rows of a dataset taken at a subset of times, with each row's 1-based full-timeline index.
struct Subsequence
{
    Dataset data;
    std::vector<Index> full_index;
};

/// Odd 1-based rows train, even rows validate.
/// Train row j (1-based) is full row 2j - 1; validation row j is full row 2j.
struct OddEvenSplit
{
    Subsequence train;
    Subsequence valid;
    Index n_full = 0;

    static Index train_to_full(Index j) { return 2 * j - 1; }
    static Index valid_to_full(Index j) { return 2 * j; }
    static Index full_to_train(Index t) { return (t + 1) / 2; }
    static Index full_to_valid(Index t) { return t / 2; }
};

OddEvenSplit split_odd_even(const Dataset& data);

/// A coefficient vector attached to a full-timeline interval.
struct SegmentCoefficients
{
    IntegerInterval interval;
    Vector beta;
};

/// Mean of (x_t^T beta_seg(t) - y_t)^2 over the validation rows; the segments must cover them all.
double validation_loss(const Subsequence& valid, std::span<const SegmentCoefficients> segments);

/// Maps a training-timeline partition to the full timeline: (a, b] -> (2a, 2b], last end -> n_full.
Partition train_partition_to_full(const Partition& train, Index n_full);

/// Training change point j -> full change point 2j - 1.
ChangePointSet train_changepoints_to_full(const ChangePointSet& train, Index n_full);

/// Options for the training subsequence: stride and min_seg_len halved (rounded up) so the
/// candidate geometry matches the full timeline.
DetectionOptions training_options(const DetectionOptions& full);

struct CvEntry
{
    TuningPoint point;
    double validation_loss = 0.0;
    Index k_hat = 0;
    std::size_t nonconverged_fits = 0;
};

struct CvResult
{
    /// Minimizer of the validation loss; exact ties go to the larger (lambda, gamma, zeta).
    TuningPoint best;
    /// best carried to the full series: gamma prices one interval against a residual sum over
    /// twice as many rows, so it is scaled by n / n_train. lambda and zeta are length-scaled already.
    TuningPoint full;
    double best_loss = 0.0;
    std::vector<CvEntry> table;
    /// Training change points of the best tuple, in full-timeline indices.
    ChangePointSet train_changepoints;
};

/// How dp-lr searches its three parameters.
enum class CvStrategy
{
    /// (lambda, gamma) by the dp search, then zeta with (lambda, gamma) fixed.
    staged,
    /// Every (lambda, gamma, zeta) triple scored by the refined pipeline.
    joint,
};

/// Odd/even grid search for any method. dp-lr requires grid.zetas and refits the scoring
/// coefficients with the penalty zeta sqrt(|I|) |v|_1; the other methods refit with the
/// interval-scaled Lasso at lambda. The strategy only affects dp-lr; with the staged strategy
/// the table holds the dp rows (no zeta) followed by the zeta rows.
CvResult cross_validate(const Dataset& data, Method method, const TuningGrid& grid, const DetectionOptions& opts,
                        CvStrategy strategy = CvStrategy::staged);

CvResult cross_validate_dp(const Dataset& data, const TuningGrid& grid, const DetectionOptions& opts);
CvResult cross_validate_refined(const Dataset& data, const TuningGrid& grid, const DetectionOptions& opts,
                                CvStrategy strategy = CvStrategy::staged);

/// Simulation-only grid centering. Partitions the odd rows by the true change points, fits each
/// true segment at every lambda and returns (lambda, mean squared coefficient error) pairs.
/// Needs the truth, so it has no place in a real-data run.
std::vector<std::pair<double, double>> oracle_lambda_curve(const Dataset& data, const ChangePointSet& truth,
                                                           const Matrix& true_betas, std::span<const double> lambdas);

} // namespace cpreg
