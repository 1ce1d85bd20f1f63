// oracle.hpp -- brute-force validation of the transfer-operator formalism by
// direct simulation of n probes in the density-matrix picture. No doubled
// spaces, no modular machinery; only matrix primitives are shared with the
// main pipeline.

#pragma once

#include <vector>

#include "qms/linalg.hpp"
#include "qms/standard_rep.hpp"
#include "qms/transfer.hpp"

namespace qms {

namespace detail {

// Operator acting as A on H_S and slot `slot` of the n-probe chain
// H_S (x) H_P^{(x)n}; A lives on H_S (x) H_P.
inline Mat chain_embed_sp(const Mat& a, Eigen::Index ds, Eigen::Index dp, int n, int slot) {
    Eigen::Index dim = ds;
    for (int j = 0; j < n; ++j) dim *= dp;
    Mat out = Mat::Zero(dim, dim);
    // index = ((s * dp + p_1) * dp + p_2) ... ; slot j has stride dp^{n-1-j}
    auto decompose = [&](Eigen::Index idx, Eigen::Index& s, std::vector<Eigen::Index>& p) {
        for (int j = n - 1; j >= 0; --j) {
            p[j] = idx % dp;
            idx /= dp;
        }
        s = idx;
    };
    auto compose = [&](Eigen::Index s, const std::vector<Eigen::Index>& p) {
        Eigen::Index idx = s;
        for (int j = 0; j < n; ++j) idx = idx * dp + p[j];
        return idx;
    };
    std::vector<Eigen::Index> pr(n), pc(n);
    Eigen::Index sr, sc;
    for (Eigen::Index row = 0; row < dim; ++row) {
        decompose(row, sr, pr);
        for (Eigen::Index s2 = 0; s2 < ds; ++s2)
            for (Eigen::Index q2 = 0; q2 < dp; ++q2) {
                cplx val = a(sr * dp + pr[slot], s2 * dp + q2);
                if (val == cplx(0.0, 0.0)) continue;
                pc = pr;
                pc[slot] = q2;
                out(row, compose(s2, pc)) = val;
            }
    }
    return out;
}

// Operator acting as A on slot `slot` only.
inline Mat chain_embed_p(const Mat& a, Eigen::Index ds, Eigen::Index dp, int n, int slot) {
    Mat a_sp = kron(identity(ds), a);
    return chain_embed_sp(a_sp, ds, dp, n, slot);
}

} // namespace detail

struct ChainState {
    Mat rho;
    int n_probes{0};
    double tau{0.0}, lambda{0.0};
};

inline void check_probe_budget(Eigen::Index ds, Eigen::Index dp, int n) {
    if (n > 6) throw TooManyProbes("oracle: n_probes > 6");
    double dim = static_cast<double>(ds);
    for (int j = 0; j < n; ++j) dim *= static_cast<double>(dp);
    if (dim > 4096) throw TooManyProbes("oracle: chain dimension exceeds budget");
}

// Sequentially evolved and projected chain state for the outcome subsets
// S_1..S_n; trace of the result is the joint probability (Born rule applied
// stepwise in the Schroedinger picture, rho -> e^{-i tau H} rho e^{i tau H}).
inline ChainState brute_force_chain(const QuantumSystem& sys_s, const QuantumSystem& sys_p,
                                    const Interaction& inter, const MeasurementOperator& meas,
                                    const Mat& rho_in,
                                    const std::vector<std::vector<std::size_t>>& subsets) {
    const Eigen::Index ds = sys_s.dim, dp = sys_p.dim;
    const int n = static_cast<int>(subsets.size());
    check_probe_budget(ds, dp, n);

    ChainState st;
    st.n_probes = n;
    st.tau = inter.tau;
    st.lambda = inter.coupling;
    st.rho = sys_s.reference_state;
    for (int j = 0; j < n; ++j) st.rho = kron(st.rho, rho_in);

    Mat h_pair = kron(sys_s.hamiltonian, identity(dp)) + kron(identity(ds), sys_p.hamiltonian) +
                 inter.coupling * inter.v;
    Mat u_pair = expi_hermitian(h_pair, -inter.tau);

    for (int k = 0; k < n; ++k) {
        Mat u = detail::chain_embed_sp(u_pair, ds, dp, n, k);
        // the free Hamiltonians of the other probes commute with everything
        // applied here and drop out of all traces; they are omitted
        st.rho = u * st.rho * u.adjoint();
        Mat e_s = Mat::Zero(dp, dp);
        for (std::size_t m : subsets[k]) e_s += meas.projections.at(m);
        Mat proj = detail::chain_embed_p(e_s, ds, dp, n, k);
        st.rho = proj * st.rho * proj;
    }
    return st;
}

inline double brute_force_joint(const QuantumSystem& sys_s, const QuantumSystem& sys_p,
                                const Interaction& inter, const MeasurementOperator& meas,
                                const Mat& rho_in,
                                const std::vector<std::vector<std::size_t>>& subsets) {
    return brute_force_chain(sys_s, sys_p, inter, meas, rho_in, subsets).rho.trace().real();
}

// Partial trace over all probe slots.
inline Mat reduce_to_scatterer(const Mat& rho, Eigen::Index ds, int n, Eigen::Index dp) {
    Eigen::Index chain = 1;
    for (int j = 0; j < n; ++j) chain *= dp;
    Mat out = Mat::Zero(ds, ds);
    for (Eigen::Index i = 0; i < ds; ++i)
        for (Eigen::Index j = 0; j < ds; ++j)
            for (Eigen::Index q = 0; q < chain; ++q)
                out(i, j) += rho(i * chain + q, j * chain + q);
    return out;
}

inline Mat brute_force_post_state(const QuantumSystem& sys_s, const QuantumSystem& sys_p,
                                  const Interaction& inter, const MeasurementOperator& meas,
                                  const Mat& rho_in,
                                  const std::vector<std::vector<std::size_t>>& subsets) {
    ChainState st = brute_force_chain(sys_s, sys_p, inter, meas, rho_in, subsets);
    double p = st.rho.trace().real();
    if (p <= 1e-12) throw ZeroProbabilityBranch("brute_force_post_state: branch probability ~ 0");
    return reduce_to_scatterer(st.rho, sys_s.dim, st.n_probes, sys_p.dim) / p;
}

} // namespace qms
