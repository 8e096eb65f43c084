#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cpreg
{

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

/// Thrown whenever a value object is built from inconsistent input.
class ValidationError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Observed pairs (x_t, y_t), t = 1..n. Row t-1 of X holds x_t.
template <typename Scalar>
class BasicDataset
{
public:
    BasicDataset(MatrixX<Scalar> X, VectorX<Scalar> y)
        : X_(std::move(X)), y_(std::move(y))
    {
        if (X_.rows() != y_.size())
            throw ValidationError("dataset: X has " + std::to_string(X_.rows()) + " rows but y has " +
                                  std::to_string(y_.size()) + " entries");
        if (X_.rows() < 2)
            throw ValidationError("dataset: need at least 2 observations");
        if (X_.cols() < 1)
            throw ValidationError("dataset: need at least 1 covariate");
        if (!X_.allFinite() || !y_.allFinite())
            throw ValidationError("dataset: non-finite entry");
    }

    Index n() const { return X_.rows(); }
    Index p() const { return X_.cols(); }
    const MatrixX<Scalar>& X() const { return X_; }
    const VectorX<Scalar>& y() const { return y_; }

private:
    MatrixX<Scalar> X_;
    VectorX<Scalar> y_;
};

using Dataset = BasicDataset<double>;

/// The integer interval (s, e] = {s+1, ..., e}, with 0-based exclusive left end.
/// In 0-based row terms it covers rows s .. e-1.
class IntegerInterval
{
public:
    IntegerInterval(Index s, Index e) : s_(s), e_(e)
    {
        if (s < 0 || e <= s)
            throw ValidationError("interval: need 0 <= s < e, got (" + std::to_string(s) + ", " +
                                  std::to_string(e) + "]");
    }

    Index s() const { return s_; }
    Index e() const { return e_; }
    Index length() const { return e_ - s_; }
    /// t is a 1-based time index.
    bool contains(Index t) const { return t > s_ && t <= e_; }

    friend bool operator==(const IntegerInterval&, const IntegerInterval&) = default;
    friend auto operator<=>(const IntegerInterval&, const IntegerInterval&) = default;

private:
    Index s_;
    Index e_;
};

inline void check_within(const IntegerInterval& I, Index n)
{
    if (I.e() > n)
        throw ValidationError("interval: (" + std::to_string(I.s()) + ", " + std::to_string(I.e()) +
                              "] exceeds n = " + std::to_string(n));
}

/// Change point locations. Each location is the first 1-based index of a new regime.
class ChangePointSet
{
public:
    ChangePointSet() = default;

    explicit ChangePointSet(std::vector<Index> locations) : locations_(std::move(locations))
    {
        for (std::size_t k = 0; k < locations_.size(); ++k)
        {
            if (locations_[k] < 2)
                throw ValidationError("change points: location " + std::to_string(locations_[k]) +
                                      " is below 2");
            if (k > 0 && locations_[k] <= locations_[k - 1])
                throw ValidationError("change points: locations must be strictly increasing");
        }
    }

    ChangePointSet(std::vector<Index> locations, Index n) : ChangePointSet(std::move(locations))
    {
        if (!locations_.empty() && locations_.back() > n)
            throw ValidationError("change points: location " + std::to_string(locations_.back()) +
                                  " exceeds n = " + std::to_string(n));
    }

    const std::vector<Index>& locations() const { return locations_; }
    Index k_hat() const { return static_cast<Index>(locations_.size()); }
    bool empty() const { return locations_.empty(); }
    Index operator[](std::size_t k) const { return locations_[k]; }

    friend bool operator==(const ChangePointSet&, const ChangePointSet&) = default;

private:
    std::vector<Index> locations_;
};

/// Ordered contiguous cover of (0, n] by integer intervals.
class Partition
{
public:
    Partition(std::vector<IntegerInterval> intervals, Index n) : intervals_(std::move(intervals)), n_(n)
    {
        if (intervals_.empty())
            throw ValidationError("partition: no intervals");
        if (intervals_.front().s() != 0)
            throw ValidationError("partition: first interval must start at 0");
        if (intervals_.back().e() != n)
            throw ValidationError("partition: last interval must end at n = " + std::to_string(n));
        for (std::size_t k = 1; k < intervals_.size(); ++k)
            if (intervals_[k].s() != intervals_[k - 1].e())
                throw ValidationError("partition: intervals are not contiguous");
    }

    /// The single-segment partition {(0, n]}.
    static Partition whole(Index n) { return Partition({IntegerInterval(0, n)}, n); }

    const std::vector<IntegerInterval>& intervals() const { return intervals_; }
    std::size_t size() const { return intervals_.size(); }
    Index n() const { return n_; }

    /// Position of the interval containing the 1-based index t.
    std::size_t segment_of(Index t) const
    {
        std::size_t lo = 0, hi = intervals_.size() - 1;
        while (lo < hi)
        {
            const std::size_t mid = (lo + hi) / 2;
            if (intervals_[mid].e() < t)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo;
    }

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<IntegerInterval> intervals_;
    Index n_;
};

inline ChangePointSet partition_to_changepoints(const Partition& part)
{
    std::vector<Index> locs;
    locs.reserve(part.size() - 1);
    for (std::size_t k = 1; k < part.size(); ++k)
        locs.push_back(part.intervals()[k].s() + 1);
    return ChangePointSet(std::move(locs));
}

inline Partition changepoints_to_partition(const ChangePointSet& cps, Index n)
{
    const ChangePointSet checked(cps.locations(), n);
    std::vector<IntegerInterval> intervals;
    intervals.reserve(checked.locations().size() + 1);
    Index s = 0;
    for (Index eta : checked.locations())
    {
        intervals.emplace_back(s, eta - 1);
        s = eta - 1;
    }
    intervals.emplace_back(s, n);
    return Partition(std::move(intervals), n);
}

} // namespace cpreg
