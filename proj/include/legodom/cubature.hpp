/**
 * @file cubature.hpp
 * @brief Generic cubature Kalman filter primitives (third-degree spherical-radial
 * rule, 2n equally weighted points).
 */

#pragma once

#include <legodom/common.hpp>

#include <Eigen/Cholesky>

#include <array>

namespace legodom
{

template <int N>
struct GaussianEstimate
{
    using Vector = Eigen::Matrix<double, N, 1>;
    using Matrix = Eigen::Matrix<double, N, N>;

    Vector mean{Vector::Zero()};
    Matrix cov{Matrix::Identity()};
};

template <int N>
using CubaturePoints = std::array<Eigen::Matrix<double, N, 1>, 2 * N>;

/**
 * mean +/- sqrt(n) * S e_j with P = S S^T. Throws CholeskyFailure when the
 * covariance is not positive definite.
 */
template <int N>
CubaturePoints<N> cubaturePoints(const GaussianEstimate<N>& est)
{
    Eigen::LLT<Eigen::Matrix<double, N, N>> llt(est.cov);
    if (llt.info() != Eigen::Success)
    {
        throw CholeskyFailure("covariance is not positive definite");
    }
    const Eigen::Matrix<double, N, N> S = llt.matrixL();
    const double scale = std::sqrt(static_cast<double>(N));

    CubaturePoints<N> pts;
    for (int j = 0; j < N; ++j)
    {
        pts[j] = est.mean + scale * S.col(j);
        pts[j + N] = est.mean - scale * S.col(j);
    }
    return pts;
}

template <int N>
GaussianEstimate<N> cubatureMoments(const CubaturePoints<N>& pts)
{
    constexpr double w = 1.0 / (2.0 * N);
    GaussianEstimate<N> out;
    out.mean.setZero();
    for (const auto& p : pts)
    {
        out.mean += w * p;
    }
    out.cov.setZero();
    for (const auto& p : pts)
    {
        const auto d = p - out.mean;
        out.cov += w * d * d.transpose();
    }
    return out;
}

/// Propagates the estimate through @p f and adds the process covariance @p Q.
template <int N, typename Process>
GaussianEstimate<N> cubaturePredict(const GaussianEstimate<N>& prior,
                                    Process&& f,
                                    const Eigen::Matrix<double, N, N>& Q)
{
    CubaturePoints<N> pts = cubaturePoints(prior);
    for (auto& p : pts)
    {
        p = f(p);
    }
    GaussianEstimate<N> pred = cubatureMoments(pts);
    pred.cov += Q;
    return pred;
}

/**
 * Measurement update from cubature points drawn on @p pred and their images
 * @p zpts under the measurement function.
 */
template <int N, int M>
GaussianEstimate<N> cubatureUpdateFromPoints(const GaussianEstimate<N>& pred,
                                             const CubaturePoints<N>& xpts,
                                             const std::array<Eigen::Matrix<double, M, 1>, 2 * N>& zpts,
                                             const Eigen::Matrix<double, M, 1>& z,
                                             const Eigen::Matrix<double, M, M>& R)
{
    constexpr double w = 1.0 / (2.0 * N);

    Eigen::Matrix<double, M, 1> zbar = Eigen::Matrix<double, M, 1>::Zero();
    for (const auto& zp : zpts)
    {
        zbar += w * zp;
    }

    Eigen::Matrix<double, M, M> Pzz = R;
    Eigen::Matrix<double, N, M> Pxz = Eigen::Matrix<double, N, M>::Zero();
    for (std::size_t m = 0; m < zpts.size(); ++m)
    {
        const Eigen::Matrix<double, M, 1> dz = zpts[m] - zbar;
        Pzz += w * dz * dz.transpose();
        Pxz += w * (xpts[m] - pred.mean) * dz.transpose();
    }

    Eigen::LLT<Eigen::Matrix<double, M, M>> llt(Pzz);
    if (llt.info() != Eigen::Success)
    {
        throw CholeskyFailure("innovation covariance is not positive definite");
    }
    // K = Pxz Pzz^-1, computed as (Pzz^-1 Pxz^T)^T since Pzz is symmetric.
    const Eigen::Matrix<double, N, M> K = llt.solve(Pxz.transpose()).transpose();

    GaussianEstimate<N> post;
    post.mean = pred.mean + K * (z - zbar);
    post.cov = pred.cov - K * Pzz * K.transpose();
    post.cov = 0.5 * (post.cov + post.cov.transpose());
    return post;
}

template <int N, int M, typename Measurement>
GaussianEstimate<N> cubatureUpdate(const GaussianEstimate<N>& pred,
                                   Measurement&& h,
                                   const Eigen::Matrix<double, M, 1>& z,
                                   const Eigen::Matrix<double, M, M>& R)
{
    const CubaturePoints<N> xpts = cubaturePoints(pred);
    std::array<Eigen::Matrix<double, M, 1>, 2 * N> zpts;
    for (std::size_t m = 0; m < xpts.size(); ++m)
    {
        zpts[m] = h(xpts[m]);
    }
    return cubatureUpdateFromPoints<N, M>(pred, xpts, zpts, z, R);
}

} // namespace legodom
