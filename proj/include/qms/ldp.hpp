// ldp.hpp -- large deviations of the empirical mean of the outcome process:
// deformed transfer operators, the limiting scaled cumulant generating
// function, its Legendre transform (rate function), and exposed-point
// intervals for the large-deviation upper/lower bounds.

#pragma once

#include <vector>

#include "qms/linalg.hpp"
#include "qms/transfer.hpp"

namespace qms {

struct LdpPoint {
    double alpha{0.0};
    double lambda_value{0.0};   // scaled cumulant generating function at alpha
    double leading_modulus{0.0};
    double gap{0.0};
};

struct RatePoint {
    double x{0.0};
    double alpha_star{0.0};
    double rate{0.0};
    bool exposed{false};
};

// R(alpha) = sum_m e^{alpha m} T_m / omega_in(e^{alpha M}); the normalization
// keeps the leading eigenvalue O(1) across alpha.
inline Mat deformed_operator(const TransferFamily& tf, const MeasurementOperator& meas,
                             const Mat& omega_in, double alpha) {
    double norm = (omega_in * meas.exp_alpha(alpha)).trace().real();
    Mat r = Mat::Zero(tf.t_full.rows(), tf.t_full.cols());
    for (std::size_t m = 0; m < tf.t_outcome.size(); ++m)
        r += std::exp(alpha * tf.outcome_values[m]) * tf.t_outcome[m];
    return r / norm;
}

// Lambda(alpha) = log omega_in(e^{alpha M}) + log |rho_+(alpha)| where
// rho_+(alpha) is the leading eigenvalue of the normalized deformation.
// Requires the leading eigenvalue to be simple in modulus (margin 1e-8) and
// psi_S to have nonvanishing overlap with its eigenvector pair.
inline LdpPoint lmgf(const TransferFamily& tf, const MeasurementOperator& meas,
                     const Mat& omega_in, double alpha) {
    Mat r = deformed_operator(tf, meas, omega_in, alpha);
    Eigen::ComplexEigenSolver<Mat> es(r);
    if (es.info() != Eigen::Success) throw Error("lmgf: eigensolver failed");

    Eigen::Index lead = 0;
    double top = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) > top) {
            top = std::abs(es.eigenvalues()(i));
            lead = i;
        }
    double second = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (i == lead) continue;
        second = std::max(second, std::abs(es.eigenvalues()(i)));
    }
    if (top - second < 1e-8)
        throw NonUniqueLeadingEigenvalue("lmgf: leading eigenvalue not isolated in modulus");

    Vec right = es.eigenvectors().col(lead);
    Eigen::ComplexEigenSolver<Mat> esa(Mat(r.adjoint()));
    Eigen::Index lead_a = 0;
    double best = 0.0;
    for (Eigen::Index i = 0; i < esa.eigenvalues().size(); ++i) {
        double d = std::abs(esa.eigenvalues()(i) - std::conj(es.eigenvalues()(lead)));
        if (i == 0 || d < best) {
            best = d;
            lead_a = i;
        }
    }
    Vec left = esa.eigenvectors().col(lead_a);
    if (std::abs(left.dot(tf.psi_s)) < 1e-10 || std::abs(tf.psi_s.dot(right)) < 1e-10)
        throw ZeroOverlap("lmgf: reference vector has no weight on the leading eigenvector");

    double norm = (omega_in * meas.exp_alpha(alpha)).trace().real();
    LdpPoint pt;
    pt.alpha = alpha;
    pt.leading_modulus = top;
    pt.gap = top - second;
    pt.lambda_value = std::log(norm) + std::log(top);
    return pt;
}

inline std::vector<LdpPoint> lmgf_curve(const TransferFamily& tf, const MeasurementOperator& meas,
                                        const Mat& omega_in, double alpha_min, double alpha_max,
                                        int n_points) {
    std::vector<LdpPoint> out;
    out.reserve(n_points);
    for (int i = 0; i < n_points; ++i) {
        double a = alpha_min + (alpha_max - alpha_min) * i / double(n_points - 1);
        out.push_back(lmgf(tf, meas, omega_in, a));
    }
    return out;
}

namespace detail {

inline double lmgf_derivative(const TransferFamily& tf, const MeasurementOperator& meas,
                              const Mat& omega_in, double alpha, double h = 1e-6) {
    return (lmgf(tf, meas, omega_in, alpha + h).lambda_value -
            lmgf(tf, meas, omega_in, alpha - h).lambda_value) /
           (2.0 * h);
}

} // namespace detail

// Legendre transform Lambda*(x) = alpha* x - Lambda(alpha*) where alpha*
// solves Lambda'(alpha) = x by bisection over [-40, 40]. A point is exposed
// when the stationarity equation has an interior solution (Lambda is smooth
// and strictly convex on the bracket).
inline RatePoint rate_function(const TransferFamily& tf, const MeasurementOperator& meas,
                               const Mat& omega_in, double x, double alpha_lo = -40.0,
                               double alpha_hi = 40.0) {
    double flo = detail::lmgf_derivative(tf, meas, omega_in, alpha_lo) - x;
    double fhi = detail::lmgf_derivative(tf, meas, omega_in, alpha_hi) - x;
    RatePoint pt;
    pt.x = x;
    if (flo * fhi > 0.0) {
        // x outside the range of Lambda'; not an exposed point of this bracket
        pt.exposed = false;
        double a = std::abs(flo) < std::abs(fhi) ? alpha_lo : alpha_hi;
        pt.alpha_star = a;
        pt.rate = a * x - lmgf(tf, meas, omega_in, a).lambda_value;
        return pt;
    }
    double lo = alpha_lo, hi = alpha_hi;
    for (int it = 0; it < 200 && hi - lo > 1e-11; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = detail::lmgf_derivative(tf, meas, omega_in, mid) - x;
        if (flo * fm <= 0.0)
            hi = mid;
        else {
            lo = mid;
            flo = fm;
        }
    }
    pt.alpha_star = 0.5 * (lo + hi);
    pt.rate = std::max(0.0, pt.alpha_star * x - lmgf(tf, meas, omega_in, pt.alpha_star).lambda_value);
    pt.exposed = true;
    return pt;
}

struct GartnerEllisBounds {
    double lower_rate{0.0};   // inf of the rate over the exposed interior points
    double upper_rate{0.0};   // inf of the rate over the closed set
};

// Deviation bounds for the set G = (-eps', -eps) u (eps, eps') shifted by
// mu_inf: the upper bound is the infimum of the rate over the closure of G,
// the lower bound the infimum over the exposed points of its interior.
inline GartnerEllisBounds gartner_ellis_interval(const TransferFamily& tf,
                                                 const MeasurementOperator& meas,
                                                 const Mat& omega_in, double mu_inf, double eps,
                                                 double eps_prime, int n_grid = 21) {
    if (!(0.0 < eps && eps < eps_prime)) throw Error("gartner_ellis_interval: need 0 < eps < eps'");
    GartnerEllisBounds out;
    out.lower_rate = out.upper_rate = std::numeric_limits<double>::infinity();
    bool exposed_found = false;
    for (int side = -1; side <= 1; side += 2) {
        for (int i = 0; i < n_grid; ++i) {
            double off = eps + (eps_prime - eps) * i / double(n_grid - 1);
            RatePoint pt = rate_function(tf, meas, omega_in, mu_inf + side * off);
            out.upper_rate = std::min(out.upper_rate, pt.rate);
            bool interior = i > 0 && i < n_grid - 1;
            if (interior && pt.exposed) {
                out.lower_rate = std::min(out.lower_rate, pt.rate);
                exposed_found = true;
            }
        }
    }
    if (!exposed_found)
        throw EmptyExposedSet("gartner_ellis_interval: no exposed points in the interval");
    return out;
}

} // namespace qms
