// linalg.hpp -- dense complex matrix primitives shared across the library.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "qms/errors.hpp"

namespace qms {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

inline Mat kron(const Mat& a, const Mat& b) {
    Mat c(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            c.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return c;
}

inline Mat identity(Eigen::Index n) { return Mat::Identity(n, n); }

inline double hermiticity_defect(const Mat& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Mat& a, double tol = 1e-12) {
    return a.rows() == a.cols() && hermiticity_defect(a) <= tol * std::max(1.0, a.cwiseAbs().maxCoeff());
}

// e^{i t H} for Hermitian H, via eigendecomposition (unitary up to roundoff).
inline Mat expi_hermitian(const Mat& h, double t) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    if (es.info() != Eigen::Success) throw Error("expi_hermitian: eigendecomposition failed");
    Vec phases(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k)
        phases(k) = std::exp(kI * t * es.eigenvalues()(k));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Principal square root of a positive semidefinite Hermitian matrix.
inline Mat sqrt_psd(const Mat& a, double clip = 0.0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    if (es.info() != Eigen::Success) throw Error("sqrt_psd: eigendecomposition failed");
    RVec v = es.eigenvalues();
    Vec d(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k)
        d(k) = std::sqrt(std::max(v(k), clip));
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

inline double spectral_radius(const Mat& a) {
    Eigen::ComplexEigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline double operator_norm(const Mat& a) {
    return a.jacobiSvd().singularValues()(0);
}

// --------------------------- seeded RNG ---------------------------
//
// Counter-based generator (splitmix64 finalizer over a Weyl sequence).
// Streams for trajectory ensembles are derived by hashing (seed, index),
// so sampling is reproducible independently of scheduling.

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double normal() {
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
};

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    g.next();
    return g.next();
}

inline Mat random_hermitian(SplitMix64& rng, Eigen::Index n, double scale = 1.0) {
    Mat a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            a(i, j) = cplx(rng.normal(), rng.normal());
    a = 0.5 * (a + Mat(a.adjoint()));
    return scale * a;
}

// Gauss-Legendre nodes/weights on [-1, 1], by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

} // namespace qms
