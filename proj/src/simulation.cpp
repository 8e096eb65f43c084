#include "cpreg/simulation.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>

namespace cpreg
{

Matrix CovarianceSpec::materialize(Index p) const
{
    switch (kind_)
    {
    case Kind::identity:
        return Matrix::Identity(p, p);
    case Kind::diagonal:
        if (diag_.size() != p)
            throw ValidationError("covariance: diagonal has wrong length");
        return diag_.asDiagonal();
    case Kind::full:
        if (full_.rows() != p || full_.cols() != p)
            throw ValidationError("covariance: matrix must be p x p");
        return full_;
    }
    return {};
}

Matrix CovarianceSpec::cholesky(Index p) const
{
    if (kind_ == Kind::identity)
        return Matrix::Identity(p, p);
    const Matrix S = materialize(p);
    if (!S.isApprox(S.transpose()))
        throw ValidationError("covariance: matrix is not symmetric");
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success)
        throw ValidationError("covariance: matrix is not positive definite");
    return llt.matrixL();
}

void SimulationConfig::validate() const
{
    if (n < 2 || p < 1)
        throw ValidationError("simulation: need n >= 2 and p >= 1");
    const ChangePointSet cps(change_points, n);
    (void)cps;
    if (!(kappa > 0.0))
        throw ValidationError("simulation: kappa must be positive");
    if (d0 < 1 || d0 > p)
        throw ValidationError("simulation: need 1 <= d0 <= p");
    if (!(sigma_eps >= 0.0))
        throw ValidationError("simulation: sigma_eps must be nonnegative");
}

Index SimulationConfig::min_spacing() const
{
    Index prev = 1, spacing = n - 1;
    for (Index eta : change_points)
    {
        spacing = std::min(spacing, eta - prev);
        prev = eta;
    }
    return std::min(spacing, n - prev);
}

Vector base_coefficients(Index p, Index d0, double kappa)
{
    Vector beta = Vector::Zero(p);
    beta.head(d0).setConstant(kappa / (2.0 * std::sqrt(static_cast<double>(d0))));
    return beta;
}

SimulatedData generate_simulation(const SimulationConfig& cfg)
{
    cfg.validate();
    const Matrix L = cfg.sigma.cholesky(cfg.p);
    std::mt19937_64 rng(cfg.seed);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&]() { return cfg.innovation ? cfg.innovation(rng) : normal(rng); };

    const Vector beta0 = base_coefficients(cfg.p, cfg.d0, cfg.kappa);
    const std::size_t segments = cfg.change_points.size() + 1;
    std::vector<Vector> seg_beta;
    seg_beta.reserve(segments);
    if (cfg.pattern == BetaPattern::alternating_sign)
    {
        for (std::size_t k = 0; k < segments; ++k)
            seg_beta.push_back(k % 2 == 0 ? beta0 : Vector(-beta0));
    }
    else
    {
        seg_beta.push_back(beta0);
        for (std::size_t k = 1; k < segments; ++k)
        {
            Vector b = beta0;
            do
            {
                for (Index i = 0; i < cfg.d0; ++i)
                    b(i) = (rng() & 1u) ? beta0(i) : -beta0(i);
            } while (b == seg_beta.back());
            seg_beta.push_back(std::move(b));
        }
    }

    Matrix true_betas(cfg.n, cfg.p);
    std::size_t seg = 0;
    for (Index t = 1; t <= cfg.n; ++t)
    {
        while (seg < cfg.change_points.size() && t >= cfg.change_points[seg])
            ++seg;
        true_betas.row(t - 1) = seg_beta[seg].transpose();
    }

    Matrix Z(cfg.n, cfg.p);
    for (Index t = 0; t < cfg.n; ++t)
        for (Index j = 0; j < cfg.p; ++j)
            Z(t, j) = draw();
    Matrix X = cfg.sigma.kind() == CovarianceSpec::Kind::identity ? Z : Matrix(Z * L.transpose());

    Vector y(cfg.n);
    for (Index t = 0; t < cfg.n; ++t)
        y(t) = X.row(t).dot(true_betas.row(t)) + cfg.sigma_eps * draw();

    return {Dataset(std::move(X), std::move(y)), std::move(true_betas), ChangePointSet(cfg.change_points, cfg.n)};
}

} // namespace cpreg
