#pragma once

#include "cpreg/types.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace cpreg
{

/// Covariance of the covariates: identity, diagonal, or an explicit positive definite matrix.
class CovarianceSpec
{
public:
    enum class Kind
    {
        identity,
        diagonal,
        full,
    };

    static CovarianceSpec identity() { return CovarianceSpec(Kind::identity, {}, {}); }
    static CovarianceSpec diagonal(Vector variances) { return CovarianceSpec(Kind::diagonal, std::move(variances), {}); }
    static CovarianceSpec full(Matrix sigma) { return CovarianceSpec(Kind::full, {}, std::move(sigma)); }

    Kind kind() const { return kind_; }
    Matrix materialize(Index p) const;
    /// Lower Cholesky factor; throws ValidationError when not positive definite.
    Matrix cholesky(Index p) const;

private:
    CovarianceSpec(Kind k, Vector d, Matrix m) : kind_(k), diag_(std::move(d)), full_(std::move(m)) {}

    Kind kind_;
    Vector diag_;
    Matrix full_;
};

enum class BetaPattern
{
    /// +beta0, -beta0, +beta0, ... across segments; every jump has l2 norm kappa.
    alternating_sign,
    /// Each segment uses beta0 with fresh random signs on the support (redrawn until it differs
    /// from the previous segment). Jump norms are kappa * sqrt(flips / d0), not kappa.
    random_sign,
};

/// Draws one standardized innovation. Used for covariates and noise alike.
using InnovationSampler = std::function<double(std::mt19937_64&)>;

struct SimulationConfig
{
    Index n = 600;
    Index p = 200;
    std::vector<Index> change_points{121, 221, 351, 451};
    double kappa = 4.0;
    Index d0 = 10;
    double sigma_eps = 1.0;
    CovarianceSpec sigma = CovarianceSpec::identity();
    std::uint64_t seed = 1;
    BetaPattern pattern = BetaPattern::alternating_sign;
    /// Empty means standard normal.
    InnovationSampler innovation;

    void validate() const;
    /// Smallest gap between consecutive change points, counting 1 and n as boundaries.
    Index min_spacing() const;
};

struct SimulatedData
{
    Dataset data;
    /// Row t-1 holds beta*_t.
    Matrix true_betas;
    ChangePointSet truth;
};

/// beta0_i = kappa / (2 sqrt(d0)) on the first d0 coordinates, zero elsewhere.
Vector base_coefficients(Index p, Index d0, double kappa);

/// y_t = x_t^T beta*_t + eps_t with x_t ~ N(0, Sigma), eps_t ~ N(0, sigma_eps^2).
/// Draw order from one mt19937_64 stream seeded with cfg.seed: segment signs (random_sign only),
/// then X row by row, then the noise.
SimulatedData generate_simulation(const SimulationConfig& cfg);

} // namespace cpreg
