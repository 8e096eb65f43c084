#pragma once

#include "cpreg/lasso.hpp"
#include "cpreg/types.hpp"

#include <atomic>
#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

namespace cpreg
{

struct DpConfig
{
    double gamma = 0.0;
    LassoConfig lasso;
    /// Shortest interval the recursion may use. The whole timeline is always admissible.
    Index min_seg_len = 2;
    /// Interval endpoints are restricted to multiples of stride, plus n.
    Index stride = 1;
    unsigned threads = 1;
    /// Warm-start the fit on (s, e] from the fit on (s, e'] for the previous endpoint e'.
    bool warm_start = true;
    /// Prefix moments are used only while they fit in this many bytes.
    double moment_budget_bytes = 1024.0 * 1024.0 * 1024.0;

    void validate() const;
};

/// Cached segment loss together with the certificate of the fit that produced it.
struct SegmentEntry
{
    double loss = 0.0;
    bool converged = true;
    int sweeps = 0;
    double kkt = 0.0;
};

/// Interval -> segment loss, for one dataset and one lambda. Safe for concurrent use.
class LossCache
{
public:
    explicit LossCache(double lambda) : lambda_(lambda) {}

    LossCache(const LossCache&) = delete;
    LossCache& operator=(const LossCache&) = delete;

    double lambda() const { return lambda_; }

    std::optional<SegmentEntry> find(const IntegerInterval& I) const;
    /// First insertion wins; later inserts for the same interval are ignored.
    void insert(const IntegerInterval& I, const SegmentEntry& entry);

    std::size_t size() const;
    std::uint64_t hits() const { return hits_.load(); }
    std::uint64_t misses() const { return misses_.load(); }

    void check_lambda(double lambda) const;

private:
    static std::uint64_t key(const IntegerInterval& I)
    {
        return (static_cast<std::uint64_t>(I.s()) << 32) | static_cast<std::uint64_t>(I.e());
    }

    double lambda_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::uint64_t, SegmentEntry> map_;
    mutable std::atomic<std::uint64_t> hits_{0};
    mutable std::atomic<std::uint64_t> misses_{0};
};

/// L(I): residual sum of squares at the interval-scaled Lasso fit, penalty excluded.
double segment_loss(const Dataset& data, const IntegerInterval& I, const LassoConfig& cfg, LossCache& cache);

struct DpDiagnostics
{
    std::size_t fits_computed = 0;
    std::size_t cache_hits = 0;
    std::size_t nonconverged_fits = 0;
    /// Up to the first 100 intervals whose inner fit did not converge.
    std::vector<IntegerInterval> nonconverged_sample;
    bool used_prefix_moments = false;
};

struct DpResult
{
    Partition partition;
    /// sum_{I in P} L(I) + gamma |P|
    double objective = 0.0;
    /// Candidate endpoints and the Bellman value B(e) at each (infinity when unreachable).
    std::vector<Index> endpoints;
    std::vector<double> bellman;
    DpDiagnostics diagnostics;
};

/// Candidate endpoints {0, stride, 2 stride, ...} union {n}.
std::vector<Index> candidate_endpoints(Index n, Index stride);

/// Penalized minimal partition by Bellman recursion. When `cache` is given it is read
/// and extended; it must belong to this dataset and to cfg.lasso.lambda.
DpResult dp_partition(const Dataset& data, const DpConfig& cfg, LossCache* cache = nullptr);

ChangePointSet detect(const Dataset& data, const DpConfig& cfg);

} // namespace cpreg
