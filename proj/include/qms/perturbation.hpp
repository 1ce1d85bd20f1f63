// perturbation.hpp -- asymptotic frequencies and means, their first-order
// flux expansions in the coupling, time-averaged measurement operators, and
// the Dyson series residual check for e^{i tau K}.

#pragma once

#include <vector>

#include "qms/linalg.hpp"
#include "qms/standard_rep.hpp"
#include "qms/transfer.hpp"

namespace qms {

struct FluxReport {
    std::size_t outcome{0};
    double m_value{0.0};
    double f_exact{0.0};   // F_m at the given coupling
    double f_zero{0.0};    // omega_in(E_m)
    double f_prime{0.0};   // first-order flux
    double residual{0.0};  // |f_exact - f_zero - lambda f_prime|
};

// (1/tau) int_0^tau e^{isH} A e^{-isH} ds, exactly in the H eigenbasis:
// entry (i,j) of A picks up phi(tau (e_i - e_j)), phi(x) = (e^{ix}-1)/(ix).
inline Mat time_averaged_operator(const Mat& a, const Mat& h_p, double tau) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h_p);
    Mat a_eig = es.eigenvectors().adjoint() * a * es.eigenvectors();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            double x = tau * (es.eigenvalues()(i) - es.eigenvalues()(j));
            cplx phi = std::abs(x) < 1e-12 ? cplx(1.0) : (std::exp(kI * x) - 1.0) / (kI * x);
            a_eig(i, j) *= phi;
        }
    return es.eigenvectors() * a_eig * es.eigenvectors().adjoint();
}

// F_m = Re <psi_S, Pi T_m psi_S>
inline double asymptotic_frequency(const TransferFamily& tf, const SpectralData& spectral,
                                   std::size_t outcome) {
    if (!spectral.condition_a)
        throw ConditionAViolated("asymptotic_frequency: Condition A does not hold");
    cplx val = tf.psi_s.dot(spectral.riesz * tf.t_outcome.at(outcome) * tf.psi_s);
    if (std::abs(val.imag()) > 1e-10)
        throw NotAProbability("asymptotic_frequency: imaginary part beyond tolerance");
    return val.real();
}

// f'_m = omega_S (x) omega_in ( i tau [V, 1 (x) E_avg] )
inline double first_order_flux(const Interaction& inter, const Mat& e_avg, const Mat& omega_s,
                               const Mat& omega_in, double tau) {
    const Eigen::Index ds = omega_s.rows(), dp = omega_in.rows();
    if (inter.v.rows() != ds * dp) throw DimensionMismatch("first_order_flux: dims");
    Mat e_full = kron(identity(ds), e_avg);
    Mat comm = inter.v * e_full - e_full * inter.v;
    Mat state = kron(omega_s, omega_in);
    return (state * (kI * tau * comm)).trace().real();
}

// mu_inf = <psi_S, Pi P B*B e^{i tau K} M P psi_S>, cross-checked against
// sum_m m F_m.
inline double asymptotic_mean(const TransferFamily& tf, const SpectralData& spectral,
                              const MeasurementOperator& meas) {
    if (!spectral.condition_a)
        throw ConditionAViolated("asymptotic_mean: Condition A does not hold");
    Mat t_m = tf.t_for_observable(meas.m);
    double direct = tf.psi_s.dot(spectral.riesz * t_m * tf.psi_s).real();
    double summed = 0.0;
    for (std::size_t m = 0; m < tf.t_outcome.size(); ++m)
        summed += tf.outcome_values[m] * asymptotic_frequency(tf, spectral, m);
    if (std::abs(direct - summed) > 1e-10)
        throw Error("asymptotic_mean: direct and summed routes disagree");
    return direct;
}

// mu'_inf: same flux formula with the averaged measurement operator.
inline double flux_of_mean(const Interaction& inter, const Mat& m_avg, const Mat& omega_s,
                           const Mat& omega_in, double tau) {
    return first_order_flux(inter, m_avg, omega_s, omega_in, tau);
}

inline std::vector<FluxReport> flux_table(const TransferFamily& tf, const SpectralData& spectral,
                                          const MeasurementOperator& meas, const Interaction& inter,
                                          const Mat& h_p, const Mat& omega_s, const Mat& omega_in) {
    std::vector<FluxReport> out;
    for (std::size_t m = 0; m < meas.n_outcomes(); ++m) {
        FluxReport r;
        r.outcome = m;
        r.m_value = meas.eigenvalues[m];
        r.f_exact = asymptotic_frequency(tf, spectral, m);
        r.f_zero = (omega_in * meas.projections[m]).trace().real();
        Mat e_avg = time_averaged_operator(meas.projections[m], h_p, inter.tau);
        r.f_prime = first_order_flux(inter, e_avg, omega_s, omega_in, inter.tau);
        r.residual = std::abs(r.f_exact - r.f_zero - inter.coupling * r.f_prime);
        out.push_back(r);
    }
    return out;
}

// ------------------------- Dyson series residual -------------------------

namespace detail {

// Barycentric weights for interpolation nodes.
inline std::vector<double> barycentric_weights(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> w(n, 1.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
            if (k != j) w[j] /= (x[j] - x[k]);
    double scale = 0.0;
    for (double v : w) scale = std::max(scale, std::abs(v));
    for (double& v : w) v /= scale;
    return w;
}

inline Mat barycentric_eval(const std::vector<double>& x, const std::vector<double>& w,
                            const std::vector<Mat>& f, double t) {
    for (std::size_t j = 0; j < x.size(); ++j)
        if (std::abs(t - x[j]) < 1e-14) return f[j];
    Mat num = Mat::Zero(f[0].rows(), f[0].cols());
    double den = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        double c = w[j] / (t - x[j]);
        num += c * f[j];
        den += c;
    }
    return num / den;
}

} // namespace detail

// || e^{i tau K} - truncated Dyson series ||, with the iterated integrals
// evaluated by nested Gauss-Legendre quadrature (32 nodes per level).
inline double dyson_expansion_check(const Mat& k0, const Mat& i_op, double lambda, double tau,
                                    int order) {
    if (order > 6) throw Error("dyson_expansion_check: order > 6 unsupported");
    const int nq = 32;
    std::vector<double> xi, wq;
    gauss_legendre(nq, xi, wq);
    std::vector<double> nodes(nq);
    for (int j = 0; j < nq; ++j) nodes[j] = 0.5 * tau * (xi[j] + 1.0);

    Eigen::SelfAdjointEigenSolver<Mat> es(k0);
    auto i_at = [&](double s) {
        Vec ph(k0.rows());
        for (Eigen::Index r = 0; r < k0.rows(); ++r) ph(r) = std::exp(-kI * s * es.eigenvalues()(r));
        Mat u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
        return Mat(u * i_op * u.adjoint());
    };
    std::vector<Mat> i_nodes(nq);
    for (int j = 0; j < nq; ++j) i_nodes[j] = i_at(nodes[j]);

    const Eigen::Index d = k0.rows();
    std::vector<double> bw = detail::barycentric_weights(nodes);

    // S_n at the outer nodes and at tau; S_n(t) = int_0^t I(s) S_{n-1}(s) ds
    std::vector<Mat> s_prev(nq, identity(d));
    Mat s_prev_tau = identity(d);
    Mat series = identity(d);
    cplx coeff = 1.0;
    for (int n = 1; n <= order; ++n) {
        std::vector<Mat> s_cur(nq);
        for (int j = 0; j < nq; ++j) {
            Mat acc = Mat::Zero(d, d);
            for (int q = 0; q < nq; ++q) {
                double s = 0.5 * nodes[j] * (xi[q] + 1.0);
                Mat sval = (n == 1) ? identity(d) : detail::barycentric_eval(nodes, bw, s_prev, s);
                acc += wq[q] * (i_at(s) * sval);
            }
            s_cur[j] = 0.5 * nodes[j] * acc;
        }
        Mat acc_tau = Mat::Zero(d, d);
        for (int q = 0; q < nq; ++q) acc_tau += wq[q] * (i_nodes[q] * s_prev[q]);
        s_prev_tau = 0.5 * tau * acc_tau;
        s_prev = std::move(s_cur);
        coeff *= kI * lambda;
        series += coeff * s_prev_tau;
    }

    Mat exact = expi_hermitian(Mat(k0 + lambda * i_op), tau);
    Mat truncated = expi_hermitian(k0, tau) * series;
    return operator_norm(Mat(exact - truncated));
}

inline double dyson_remainder_bound(double lambda, double norm_i, double tau, int order) {
    double x = std::abs(lambda) * norm_i * tau;
    double fact = 1.0;
    for (int j = 2; j <= order + 1; ++j) fact *= j;
    return std::pow(x, order + 1) / fact * std::exp(x);
}

} // namespace qms
