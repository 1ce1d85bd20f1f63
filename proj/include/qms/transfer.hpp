// transfer.hpp -- reduced dynamics (transfer) operators on the doubled
// scatterer space and their spectral analysis: gap, ergodicity verdict,
// Riesz and ergodic projections, eventually-probabilities, asymptotic states.

#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "qms/linalg.hpp"
#include "qms/standard_rep.hpp"

namespace qms {

struct MeasurementOperator {
    Mat m;                            // Hermitian, on H_P
    std::vector<double> eigenvalues;  // distinct outcomes m_1 < ... < m_mu
    std::vector<Mat> projections;     // spectral projections E_{m_j}

    std::size_t n_outcomes() const { return eigenvalues.size(); }

    Mat projection_for(const std::vector<std::size_t>& subset) const {
        Mat e = Mat::Zero(m.rows(), m.cols());
        for (std::size_t j : subset) e += projections.at(j);
        return e;
    }

    // exp(alpha M), exactly from the spectral decomposition
    Mat exp_alpha(double alpha) const {
        Mat out = Mat::Zero(m.rows(), m.cols());
        for (std::size_t j = 0; j < eigenvalues.size(); ++j)
            out += std::exp(alpha * eigenvalues[j]) * projections[j];
        return out;
    }
};

inline MeasurementOperator make_measurement(const Mat& m, double cluster_gap = 1e-9) {
    if (hermiticity_defect(m) > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw Error("make_measurement: M not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    MeasurementOperator out;
    out.m = m;
    Eigen::Index k = 0;
    while (k < m.rows()) {
        double val = es.eigenvalues()(k);
        Mat proj = Mat::Zero(m.rows(), m.cols());
        double acc = 0.0;
        Eigen::Index cnt = 0;
        while (k < m.rows() && es.eigenvalues()(k) - val <= cluster_gap) {
            proj += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
            acc += es.eigenvalues()(k);
            ++k;
            ++cnt;
        }
        out.eigenvalues.push_back(acc / cnt);
        out.projections.push_back(proj);
    }
    return out;
}

struct TransferFamily {
    Eigen::Index dim_s{0}, dim_p{0};
    Vec psi_s;                        // scatterer reference vector, dim_s^2
    Mat t_full;                       // T = T_{spec(M)}
    std::vector<double> outcome_values;
    std::vector<Mat> t_outcome;       // T_{m_j}
    Mat compress_left;                // G = W^dagger B*B e^{i tau K}
    Mat lift_right;                   // W : C^{dS^2} -> doubled(S(x)P), a |-> e_a (x) psi_P

    // T_X for an arbitrary probe observable X
    Mat t_for_observable(const Mat& x) const {
        return compress_left * embed_probe(x) * lift_right;
    }

    Mat embed_probe(const Mat& x) const {
        return kron(identity(dim_s * dim_s), kron(x, identity(dim_p)));
    }

    Mat t_subset(const std::vector<std::size_t>& subset) const {
        Mat t = Mat::Zero(t_full.rows(), t_full.cols());
        for (std::size_t j : subset) t += t_outcome.at(j);
        return t;
    }
};

inline TransferFamily build_transfer_family(const StandardForm& sf_s, const StandardForm& sf_p,
                                            const Mat& k, const IncomingState& incoming,
                                            const MeasurementOperator& meas, double tau) {
    const Eigen::Index ds = sf_s.base.dim, dp = sf_p.base.dim;
    const Eigen::Index big = ds * ds * dp * dp;
    if (k.rows() != big) throw DimensionMismatch("build_transfer_family: K dimension mismatch");
    if (meas.m.rows() != dp) throw DimensionMismatch("build_transfer_family: M dimension mismatch");

    TransferFamily tf;
    tf.dim_s = ds;
    tf.dim_p = dp;
    tf.psi_s = sf_s.psi;

    Mat w = Mat::Zero(big, ds * ds);
    for (Eigen::Index a = 0; a < ds * ds; ++a)
        for (Eigen::Index q = 0; q < dp * dp; ++q)
            w(a * dp * dp + q, a) = sf_p.psi(q);
    tf.lift_right = w;

    Mat bstar_b = kron(identity(ds * ds), Mat(incoming.b_operator.adjoint() * incoming.b_operator));
    tf.compress_left = w.adjoint() * bstar_b * expi_hermitian(k, tau);

    tf.t_full = Mat::Zero(ds * ds, ds * ds);
    for (std::size_t j = 0; j < meas.n_outcomes(); ++j) {
        Mat tm = tf.t_for_observable(meas.projections[j]);
        tf.outcome_values.push_back(meas.eigenvalues[j]);
        tf.t_outcome.push_back(tm);
        tf.t_full += tm;
    }
    return tf;
}

// --------------------------- Schur machinery ---------------------------
//
// Riesz projections are computed from a reordered complex Schur form: the
// eigenvalue cluster is moved to the leading block and the projector is
// recovered from a triangular Sylvester solve. This handles defective
// clusters (eigen-nilpotents) exactly, which an eigenvector-matrix inverse
// would not.

namespace detail {

// Swap the diagonal entries at positions (i, i+1) of a triangular Schur
// factor by a unitary similarity, updating u and q.
inline void schur_swap(Mat& u, Mat& q, Eigen::Index i) {
    cplx l1 = u(i, i), l2 = u(i + 1, i + 1), t = u(i, i + 1);
    if (std::abs(l1 - l2) == 0.0) return;
    // eigenvector of [[l1, t], [0, l2]] for l2
    cplx x1 = t, x2 = l2 - l1;
    double nrm = std::sqrt(std::norm(x1) + std::norm(x2));
    x1 /= nrm;
    x2 /= nrm;
    Mat z(2, 2);
    z << x1, -std::conj(x2), x2, std::conj(x1);
    u.middleCols(i, 2) = u.middleCols(i, 2) * z;
    u.middleRows(i, 2) = z.adjoint() * u.middleRows(i, 2);
    q.middleCols(i, 2) = q.middleCols(i, 2) * z;
    u(i + 1, i) = 0.0;
}

// Reorder so that the selected eigenvalues occupy the leading block.
// Returns the number of selected eigenvalues.
inline Eigen::Index schur_reorder(Mat& u, Mat& q, const std::function<bool(cplx)>& select) {
    const Eigen::Index n = u.rows();
    std::vector<bool> sel(n);
    for (Eigen::Index i = 0; i < n; ++i) sel[i] = select(u(i, i));
    for (bool moved = true; moved;) {
        moved = false;
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            if (!sel[i] && sel[i + 1]) {
                schur_swap(u, q, i);
                std::swap(sel[i], sel[i + 1]);
                moved = true;
            }
        }
    }
    return static_cast<Eigen::Index>(std::count(sel.begin(), sel.end(), true));
}

// Solve U11 Y - Y U22 = U12 for triangular U11 (k x k) and U22.
inline Mat sylvester_triangular(const Mat& u11, const Mat& u22, const Mat& u12) {
    const Eigen::Index k = u11.rows(), l = u22.rows();
    Mat y = Mat::Zero(k, l);
    for (Eigen::Index j = 0; j < l; ++j) {
        Vec rhs = u12.col(j);
        for (Eigen::Index i = 0; i < j; ++i) rhs += y.col(i) * u22(i, j);
        Mat a = u11 - u22(j, j) * identity(k);
        y.col(j) = a.triangularView<Eigen::Upper>().solve(rhs);
    }
    return y;
}

inline Mat riesz_select(const Mat& op, const std::function<bool(cplx)>& select) {
    Eigen::ComplexSchur<Mat> schur(op);
    if (schur.info() != Eigen::Success) throw Error("riesz_select: Schur decomposition failed");
    Mat u = schur.matrixT(), q = schur.matrixU();
    Eigen::Index k = schur_reorder(u, q, select);
    const Eigen::Index n = op.rows();
    if (k == 0) return Mat::Zero(n, n);
    if (k == n) return identity(n);
    Mat y = sylvester_triangular(u.topLeftCorner(k, k), u.bottomRightCorner(n - k, n - k),
                                 u.topRightCorner(k, n - k));
    Mat p = Mat::Zero(n, n);
    p.topLeftCorner(k, k) = identity(k);
    p.topRightCorner(k, n - k) = y;
    return q * p * q.adjoint();
}

} // namespace detail

// Spectral projector for the eigenvalue cluster within isolation_radius of
// center; zero if no eigenvalue lies in the disk.
inline Mat riesz_projection(const Mat& op, cplx center, double isolation_radius,
                            double margin = 1e-8) {
    Eigen::ComplexEigenSolver<Mat> es(op, false);
    double r_in = 0.0, r_out = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < op.rows(); ++i) {
        double d = std::abs(es.eigenvalues()(i) - center);
        if (d <= isolation_radius)
            r_in = std::max(r_in, d);
        else
            r_out = std::min(r_out, d);
    }
    if (r_out - r_in < margin)
        throw ClusterNotIsolated("riesz_projection: eigenvalue cluster not isolated");
    return detail::riesz_select(op, [&](cplx z) { return std::abs(z - center) <= isolation_radius; });
}

// Cesaro mean (1/N) sum_{n=1..N} op^n; converges to the Riesz projection at 1
// at rate O(1/N) when the eigenvalue 1 is semisimple.
inline Mat ergodic_projection(const Mat& op, long n_terms) {
    Mat power = identity(op.rows());
    Mat acc = Mat::Zero(op.rows(), op.cols());
    for (long n = 1; n <= n_terms; ++n) {
        power = power * op;
        acc += power;
    }
    return acc / static_cast<double>(n_terms);
}

struct SpectralData {
    std::vector<cplx> eigenvalues;
    double gap{0.0};
    bool condition_a{false};
    Vec psi_star;           // left fixed vector, <psi_star, psi_S> = 1
    Mat riesz;              // Riesz projection of T at 1
    double nilpotent_norm{0.0};
};

inline constexpr double kUnitCircleTol = 1e-8;   // modulus tolerance at the unit circle
inline constexpr double kClusterTol = 1e-9;      // relative eigenvalue clustering
inline constexpr double kFixedPointTol = 1e-7;   // |z - 1| for the fixed eigenvalue

inline SpectralData spectral_analysis(const TransferFamily& tf) {
    const Mat& t = tf.t_full;
    Eigen::ComplexEigenSolver<Mat> es(t, false);

    SpectralData sd;
    for (Eigen::Index i = 0; i < t.rows(); ++i) sd.eigenvalues.push_back(es.eigenvalues()(i));

    bool has_fixed = false;
    for (cplx z : sd.eigenvalues)
        if (std::abs(z - 1.0) <= kFixedPointTol) has_fixed = true;
    if (!has_fixed)
        throw NoFixedPoint("spectral_analysis: no eigenvalue near 1 (upstream construction bug)");

    // eigenvalues on (or numerically at) the unit circle
    std::vector<cplx> top;
    double below = 0.0;
    for (cplx z : sd.eigenvalues) {
        if (std::abs(z) > 1.0 - kUnitCircleTol)
            top.push_back(z);
        else
            below = std::max(below, std::abs(z));
    }
    // degenerate either way: multiplicity > 1 at z = 1, or extra circle spectrum
    sd.condition_a = top.size() == 1 && std::abs(top[0] - 1.0) <= kFixedPointTol;
    sd.gap = sd.condition_a ? 1.0 - below
                            : 1.0 - [&] {
                                  double second = 0.0;
                                  for (cplx z : sd.eigenvalues)
                                      if (std::abs(z - 1.0) > kFixedPointTol)
                                          second = std::max(second, std::abs(z));
                                  return second;
                              }();

    sd.riesz = riesz_projection(t, 1.0, kFixedPointTol, kUnitCircleTol * 0.1);
    sd.nilpotent_norm = operator_norm(Mat((t - identity(t.rows())) * sd.riesz));

    // left fixed vector, from the adjoint
    Eigen::ComplexEigenSolver<Mat> esa(Mat(t.adjoint()), true);
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
        double d = std::abs(esa.eigenvalues()(i) - 1.0);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    Vec u = esa.eigenvectors().col(best);
    cplx overlap = u.dot(tf.psi_s);
    if (std::abs(overlap) < 1e-12)
        throw ZeroOverlap("spectral_analysis: left fixed vector orthogonal to psi_S");
    sd.psi_star = u / std::conj(overlap);
    return sd;
}

// P(X_n in S eventually) = <psi_S, Pi Pi_S psi_S>
inline double eventually_probability(const TransferFamily& tf, const std::vector<std::size_t>& subset) {
    Mat pi = riesz_projection(tf.t_full, 1.0, kFixedPointTol, kUnitCircleTol * 0.1);
    Mat pi_s = riesz_projection(tf.t_subset(subset), 1.0, kFixedPointTol, kUnitCircleTol * 0.1);
    cplx val = tf.psi_s.dot(pi * pi_s * tf.psi_s);
    double p = val.real();
    if (std::abs(val.imag()) > 1e-8 || p < -1e-8 || p > 1.0 + 1e-8)
        throw NotAProbability("eventually_probability: value outside [0,1]");
    return std::clamp(p, 0.0, 1.0);
}

// Asymptotic conditional state of the scatterer given X_n in S eventually:
// omega_inf(A) = <psi*, embed(A) psi_S> / <psi*, psi_S> with Pi_S = |psi><psi*|.
inline cplx asymptotic_state(const TransferFamily& tf, const std::vector<std::size_t>& subset,
                             const Mat& observable) {
    Mat ts = tf.t_subset(subset);
    Eigen::ComplexEigenSolver<Mat> es(ts, false);
    int mult = 0;
    for (Eigen::Index i = 0; i < ts.rows(); ++i)
        if (std::abs(es.eigenvalues()(i) - 1.0) <= kFixedPointTol) ++mult;
    if (mult == 0) throw NoFixedPoint("asymptotic_state: 1 is not an eigenvalue of T_S");
    if (mult > 1)
        throw NonSimpleEigenvalue("asymptotic_state: eigenvalue 1 of T_S is not simple; the limit depends on the whole path");

    Eigen::ComplexEigenSolver<Mat> esa(Mat(ts.adjoint()), true);
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ts.rows(); ++i) {
        double d = std::abs(esa.eigenvalues()(i) - 1.0);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    Vec psi_star = esa.eigenvectors().col(best);
    cplx denom = psi_star.dot(tf.psi_s);
    if (std::abs(denom) <= 1e-10)
        throw ZeroOverlap("asymptotic_state: <psi*, psi_S> vanishes");
    Mat a_emb = kron(observable, identity(tf.dim_s));
    return psi_star.dot(a_emb * tf.psi_s) / denom;
}

} // namespace qms
