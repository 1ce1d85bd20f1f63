// process.hpp -- the measurement-outcome process {X_n}: exact finite
// dimensional distributions, seeded trajectory sampling via the transfer
// operator filter, empirical statistics, and exact correlation functions.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qms/linalg.hpp"
#include "qms/transfer.hpp"

namespace qms {

struct Trajectory {
    std::uint64_t seed{0};
    std::vector<std::size_t> outcomes;   // indices into spec(M)
    std::vector<double> values;          // the eigenvalues m_{X_k}
    double log_weight{0.0};              // log P(history), diagnostics
};

// P(X_1 in S_1, ..., X_n in S_n) = Re <psi_S, T_{S_1} ... T_{S_n} psi_S>
inline double joint_probability(const TransferFamily& tf,
                                const std::vector<std::vector<std::size_t>>& subsets) {
    Vec v = tf.psi_s;
    for (auto it = subsets.rbegin(); it != subsets.rend(); ++it)
        v = tf.t_subset(*it) * v;
    cplx val = tf.psi_s.dot(v);
    if (std::abs(val.imag()) > 1e-10)
        throw NotAProbability("joint_probability: imaginary part beyond tolerance");
    double p = val.real();
    if (p < -1e-10 || p > 1.0 + 1e-10)
        throw NotAProbability("joint_probability: value outside [0,1]");
    return std::clamp(p, 0.0, 1.0);
}

// Marginal P(X_j = m), j >= 1 (prefix of j-1 unmeasured steps).
inline double marginal_probability(const TransferFamily& tf, long position, std::size_t outcome) {
    Vec v = tf.t_outcome.at(outcome) * tf.psi_s;
    for (long j = 1; j < position; ++j) v = tf.t_full * v;
    return std::clamp(tf.psi_s.dot(v).real(), 0.0, 1.0);
}

// Sequential sampling from the exact conditional laws: the running vector
// l = (T_{X_1} ... T_{X_k})^dagger psi_S gives p(m) = Re<l, T_m psi_S> /
// Re<l, psi_S>. Deterministic given (seed, n).
inline Trajectory sample_trajectory(const TransferFamily& tf, long n, std::uint64_t seed) {
    const std::size_t mu = tf.t_outcome.size();
    std::vector<Vec> tm_psi(mu);
    std::vector<Mat> tm_adj(mu);
    for (std::size_t m = 0; m < mu; ++m) {
        tm_psi[m] = tf.t_outcome[m] * tf.psi_s;
        tm_adj[m] = tf.t_outcome[m].adjoint();
    }

    Trajectory traj;
    traj.seed = seed;
    traj.outcomes.reserve(n);
    traj.values.reserve(n);
    SplitMix64 rng(seed);
    Vec ell = tf.psi_s;
    std::vector<double> p(mu);
    for (long k = 0; k < n; ++k) {
        double denom = ell.dot(tf.psi_s).real();
        if (denom < 1e-300) {
            // probability underflow: renormalize the filter and continue
            ell /= ell.norm();
            denom = ell.dot(tf.psi_s).real();
        }
        double total = 0.0;
        for (std::size_t m = 0; m < mu; ++m) {
            double pm = ell.dot(tm_psi[m]).real() / denom;
            if (pm < 0.0) {
                if (pm < -1e-10)
                    throw NotAProbability("sample_trajectory: conditional probability below tolerance");
                pm = 0.0;
            }
            p[m] = pm;
            total += pm;
        }
        double u = rng.uniform() * total;
        std::size_t pick = mu - 1;
        double acc = 0.0;
        for (std::size_t m = 0; m < mu; ++m) {
            acc += p[m];
            if (u < acc) {
                pick = m;
                break;
            }
        }
        traj.outcomes.push_back(pick);
        traj.values.push_back(tf.outcome_values[pick]);
        traj.log_weight += std::log(p[pick] / total);
        ell = tm_adj[pick] * ell;
    }
    return traj;
}

inline double empirical_frequency(const Trajectory& traj, std::size_t outcome) {
    if (traj.outcomes.empty()) throw Error("empirical_frequency: empty trajectory");
    long count = 0;
    for (std::size_t o : traj.outcomes)
        if (o == outcome) ++count;
    return static_cast<double>(count) / static_cast<double>(traj.outcomes.size());
}

inline double empirical_mean(const Trajectory& traj) {
    if (traj.values.empty()) throw Error("empirical_mean: empty trajectory");
    double s = 0.0;
    for (double v : traj.values) s += v;
    return s / static_cast<double>(traj.values.size());
}

struct CorrelationRecord {
    long lag{0};
    double value{0.0};   // |P(A cap B) - P(A) P(B)|
    std::string events;
};

// Exact two-point correlation: A = {X_1 = a}, B = {X_{k+1} = b}.
inline CorrelationRecord exact_two_point(const TransferFamily& tf, std::size_t a, std::size_t b,
                                         long lag) {
    if (lag < 1) throw Error("exact_two_point: lag must be >= 1");
    Vec v = tf.t_outcome.at(b) * tf.psi_s;
    for (long j = 1; j < lag; ++j) v = tf.t_full * v;
    double joint = tf.psi_s.dot(tf.t_outcome.at(a) * v).real();
    double pa = tf.psi_s.dot(tf.t_outcome.at(a) * tf.psi_s).real();
    double pb = marginal_probability(tf, lag + 1, b);
    CorrelationRecord rec;
    rec.lag = lag;
    rec.value = std::abs(joint - pa * pb);
    rec.events = "X_1=" + std::to_string(a) + ", X_" + std::to_string(lag + 1) + "=" + std::to_string(b);
    return rec;
}

// Least-squares exponential rate of a correlation table: slope of
// -log(value) against lag, over lags where value > floor.
inline double fit_decay_rate(const std::vector<CorrelationRecord>& table, double floor = 1e-13) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long n = 0;
    for (const auto& r : table) {
        if (r.value <= floor) continue;
        double x = static_cast<double>(r.lag), y = std::log(r.value);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::infinity();
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -slope;
}

// sup over tuples and start positions of |joint - product of marginals| for a
// window of k+1 consecutive single-outcome measurements.
inline double dependence_deviation(const TransferFamily& tf, long window_k, long n_scan) {
    const std::size_t mu = tf.t_outcome.size();
    std::vector<std::size_t> tuple(window_k + 1, 0);
    double worst = 0.0;
    for (long n = 1; n <= n_scan; ++n) {
        std::fill(tuple.begin(), tuple.end(), 0);
        while (true) {
            Vec v = tf.psi_s;
            for (auto it = tuple.rbegin(); it != tuple.rend(); ++it)
                v = tf.t_outcome[*it] * v;
            for (long j = 1; j < n; ++j) v = tf.t_full * v;
            double joint = tf.psi_s.dot(v).real();
            double prod = 1.0;
            for (long j = 0; j <= window_k; ++j)
                prod *= marginal_probability(tf, n + j, tuple[j]);
            worst = std::max(worst, std::abs(joint - prod));
            // next tuple
            std::size_t pos = 0;
            while (pos < tuple.size() && ++tuple[pos] == mu) tuple[pos++] = 0;
            if (pos == tuple.size()) break;
        }
    }
    return worst;
}

// Sweep of dependence_deviation over a coupling grid, for a model family
// parameterized by the coupling constant.
inline std::vector<std::pair<double, double>> dependence_bound_scan(
    const std::function<TransferFamily(double)>& build_at, const std::vector<double>& lambdas,
    long window_k, long n_scan) {
    std::vector<std::pair<double, double>> out;
    for (double lam : lambdas)
        out.emplace_back(lam, dependence_deviation(build_at(lam), window_k, n_scan));
    return out;
}

} // namespace qms
