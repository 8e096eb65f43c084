#pragma once

#include "cpreg/types.hpp"

#include <cassert>
#include <vector>

namespace cpreg
{

// Second-moment views of one segment, consumed by the coordinate-descent solvers.
// A view exposes p(), diag() = column squared norms, xty(), yty(), and column(j)
// of the segment Gram matrix X_I^T X_I. Columns are materialized on first use,
// so a sparse solve only pays for the coordinates it actually moves.

/// Lazy Gram view computed from the raw rows of a segment.
template <typename Scalar>
class RowsGram
{
public:
    RowsGram(const BasicDataset<Scalar>& data, const IntegerInterval& I)
        : rows_(data.X().middleRows(I.s(), I.length())),
          y_(data.y().segment(I.s(), I.length())),
          cols_(static_cast<std::size_t>(data.p()))
    {
        check_within(I, data.n());
        diag_ = rows_.colwise().squaredNorm().transpose();
        xty_ = rows_.transpose() * y_;
        yty_ = y_.squaredNorm();
    }

    Index p() const { return rows_.cols(); }
    const VectorX<Scalar>& diag() const { return diag_; }
    const VectorX<Scalar>& xty() const { return xty_; }
    Scalar yty() const { return yty_; }

    const VectorX<Scalar>& column(Index j)
    {
        auto& col = cols_[static_cast<std::size_t>(j)];
        if (col.size() == 0)
            col = rows_.transpose() * rows_.col(j);
        return col;
    }

private:
    Eigen::Ref<const MatrixX<Scalar>> rows_;
    Eigen::Ref<const VectorX<Scalar>> y_;
    VectorX<Scalar> diag_;
    VectorX<Scalar> xty_;
    Scalar yty_{};
    std::vector<VectorX<Scalar>> cols_;
};

/// Cumulative second moments of a dataset at a fixed set of endpoints.
/// Segment (endpoints[a], endpoints[b]] is obtained by differencing in O(p) per column.
template <typename Scalar>
class PrefixMoments
{
public:
    /// endpoints must be strictly increasing and within [0, n].
    PrefixMoments(const BasicDataset<Scalar>& data, std::vector<Index> endpoints)
        : data_(&data), endpoints_(std::move(endpoints))
    {
        const Index p = data.p();
        const auto m = static_cast<Index>(endpoints_.size());
        gram_.resize(p, p * m);
        xty_.resize(p, m);
        yty_.resize(m);

        MatrixX<Scalar> G = MatrixX<Scalar>::Zero(p, p);
        VectorX<Scalar> c = VectorX<Scalar>::Zero(p);
        Scalar yy = 0;
        Index row = 0;
        for (Index k = 0; k < m; ++k)
        {
            const Index upto = endpoints_[static_cast<std::size_t>(k)];
            assert(upto >= row && upto <= data.n());
            if (upto > row)
            {
                const auto block = data.X().middleRows(row, upto - row);
                const auto yb = data.y().segment(row, upto - row);
                G.template selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
                c.noalias() += block.transpose() * yb;
                yy += yb.squaredNorm();
                row = upto;
            }
            gram_.middleCols(k * p, p) = G.template selfadjointView<Eigen::Lower>();
            xty_.col(k) = c;
            yty_(k) = yy;
        }
    }

    /// Bytes needed to hold moments for m endpoints in dimension p.
    static double footprint_bytes(Index m, Index p)
    {
        return static_cast<double>(m) * static_cast<double>(p) * static_cast<double>(p + 2) * sizeof(Scalar);
    }

    const BasicDataset<Scalar>& data() const { return *data_; }
    const std::vector<Index>& endpoints() const { return endpoints_; }
    Index p() const { return data_->p(); }

    auto gram_block(Index k) const { return gram_.middleCols(k * p(), p()); }
    auto xty(Index k) const { return xty_.col(k); }
    Scalar yty(Index k) const { return yty_(k); }

private:
    const BasicDataset<Scalar>* data_;
    std::vector<Index> endpoints_;
    MatrixX<Scalar> gram_;
    MatrixX<Scalar> xty_;
    VectorX<Scalar> yty_;
};

/// Reusable lazy Gram view over a PrefixMoments segment; rebind() moves it to another segment.
template <typename Scalar>
class PrefixGram
{
public:
    explicit PrefixGram(const PrefixMoments<Scalar>& moments)
        : moments_(&moments), cols_(static_cast<std::size_t>(moments.p()))
    {
    }

    /// Views the segment (endpoints[a], endpoints[b]].
    void rebind(Index a, Index b)
    {
        a_ = a;
        b_ = b;
        for (Index j : touched_)
            cols_[static_cast<std::size_t>(j)].resize(0);
        touched_.clear();
        const Index p = moments_->p();
        diag_ = moments_->gram_block(b).diagonal() - moments_->gram_block(a).diagonal();
        for (Index j = 0; j < p; ++j)
            diag_(j) = std::max<Scalar>(diag_(j), Scalar(0));
        xty_ = moments_->xty(b) - moments_->xty(a);
        yty_ = moments_->yty(b) - moments_->yty(a);
    }

    IntegerInterval interval() const
    {
        return IntegerInterval(moments_->endpoints()[static_cast<std::size_t>(a_)],
                               moments_->endpoints()[static_cast<std::size_t>(b_)]);
    }

    Index p() const { return moments_->p(); }
    const VectorX<Scalar>& diag() const { return diag_; }
    const VectorX<Scalar>& xty() const { return xty_; }
    Scalar yty() const { return yty_; }

    const VectorX<Scalar>& column(Index j)
    {
        auto& col = cols_[static_cast<std::size_t>(j)];
        if (col.size() == 0)
        {
            col = moments_->gram_block(b_).col(j) - moments_->gram_block(a_).col(j);
            touched_.push_back(j);
        }
        return col;
    }

private:
    const PrefixMoments<Scalar>* moments_;
    Index a_ = 0;
    Index b_ = 0;
    VectorX<Scalar> diag_;
    VectorX<Scalar> xty_;
    Scalar yty_{};
    std::vector<VectorX<Scalar>> cols_;
    std::vector<Index> touched_;
};

/// Residual sum of squares of beta on the rows of I, touching only its nonzero coordinates.
template <typename Scalar>
Scalar segment_rss(const BasicDataset<Scalar>& data, const IntegerInterval& I, const VectorX<Scalar>& beta)
{
    VectorX<Scalar> r = data.y().segment(I.s(), I.length());
    for (Index j = 0; j < beta.size(); ++j)
        if (beta(j) != Scalar(0))
            r.noalias() -= beta(j) * data.X().col(j).segment(I.s(), I.length());
    return r.squaredNorm();
}

} // namespace cpreg
