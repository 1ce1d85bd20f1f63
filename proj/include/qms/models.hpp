// models.hpp -- built-in model constructors: the truncated Jaynes-Cummings
// model, its closed-form transfer matrix, resonance classification, the
// spin-angle measurement family, and random models for property testing.

#pragma once

#include <cmath>
#include <string>

#include "qms/linalg.hpp"
#include "qms/standard_rep.hpp"
#include "qms/transfer.hpp"

namespace qms {

struct ModelDef {
    QuantumSystem sys_s;
    QuantumSystem sys_p;
    Interaction inter;
    Mat rho_in;
};

// Everything needed downstream, assembled from a model definition.
struct Pipeline {
    StandardForm sf_s;
    StandardForm sf_p;
    IncomingState incoming;
    Mat k;
    TransferFamily transfer;
};

inline Pipeline build_pipeline(const ModelDef& def, const MeasurementOperator& meas) {
    Pipeline p;
    p.sf_s = build_standard_form(def.sys_s);
    p.sf_p = build_standard_form(def.sys_p);
    p.incoming = build_incoming_state(def.sys_p, def.rho_in);
    p.k = build_k(p.sf_s, p.sf_p, def.inter);
    p.transfer = build_transfer_family(p.sf_s, p.sf_p, p.k, p.incoming, meas, def.inter.tau);
    return p;
}

// ------------------------- Jaynes-Cummings -------------------------
//
// Two-level scatterer and probes, H_S = H_P = diag(1, -1) with the excited
// level first, V = a*_S (x) a_P + a_S (x) a*_P, trace reference states, and
// incoming probe population p on the excited level.

struct JaynesCummings {
    double tau{1.0};
    double lambda{1.0};
    double p{1.0};
};

inline ModelDef build_jc(const JaynesCummings& jc) {
    if (jc.p < 0.0 || jc.p > 1.0) throw Error("build_jc: p outside [0,1]");
    Mat h(2, 2), a(2, 2), astar(2, 2);
    h << 1, 0, 0, -1;
    a << 0, 0, 1, 0;
    astar << 0, 1, 0, 0;

    ModelDef def;
    def.sys_s = {2, h, 0.5 * identity(2), {"up", "down"}};
    def.sys_p = def.sys_s;
    def.inter.v = kron(astar, a) + kron(a, astar);
    def.inter.coupling = jc.lambda;
    def.inter.tau = jc.tau;
    def.rho_in = Mat::Zero(2, 2);
    def.rho_in(0, 0) = jc.p;
    def.rho_in(1, 1) = 1.0 - jc.p;
    return def;
}

inline bool is_resonant(double lambda, double tau) {
    return std::abs(std::sin(lambda * tau)) < 1e-12;
}

// Closed form of P B*B e^{i tau K} X P in the basis {phi_11, phi_12, phi_21,
// phi_22} for an arbitrary probe observable X.
inline Mat explicit_jc_transfer(const JaynesCummings& jc, const Mat& x) {
    const double lt = jc.lambda * jc.tau;
    const double p = jc.p;
    const cplx a = cplx(-std::sin(lt) * std::sin(lt), 0.0);
    const cplx b = -kI * std::sin(lt) * std::cos(lt);
    const cplx is = kI * std::sin(lt);
    const cplx e2 = std::exp(2.0 * kI * jc.tau);
    const cplx em2 = std::exp(-2.0 * kI * jc.tau);
    const cplx x11 = x(0, 0), x12 = x(0, 1), x21 = x(1, 0), x22 = x(1, 1);
    const cplx w = p * x11 + (1.0 - p) * x22;   // omega_in(X)
    const double c = std::cos(lt);

    Mat t(4, 4);
    t << (1.0 - p) * x22 * a, (1.0 - p) * x21 * b, -(1.0 - p) * x12 * b, -(1.0 - p) * x11 * a,
        -p * x12 * e2 * is, e2 * (c - 1.0) * w, cplx(0.0), (1.0 - p) * x12 * e2 * is,
        p * x21 * em2 * is, cplx(0.0), em2 * (c - 1.0) * w, -(1.0 - p) * x21 * em2 * is,
        -p * x22 * a, -p * x21 * b, p * x12 * b, p * x11 * a;

    Vec l_s(4);
    l_s << 1.0, std::exp(2.0 * kI * jc.tau), std::exp(-2.0 * kI * jc.tau), 1.0;
    t += w * Mat(l_s.asDiagonal());
    return t;
}

// Spin measurement in direction (theta, phi): eigenvalues +1 / -1 with
// eigenvectors chi_+ / chi_-.
inline MeasurementOperator spin_direction_measurement(double theta, double phi) {
    Mat m(2, 2);
    m << std::cos(theta), std::exp(-kI * phi) * std::sin(theta),
        std::exp(kI * phi) * std::sin(theta), -std::cos(theta);
    Vec chi_plus(2), chi_minus(2);
    chi_plus << std::exp(-kI * phi / 2.0) * std::cos(theta / 2.0),
        std::exp(kI * phi / 2.0) * std::sin(theta / 2.0);
    chi_minus << -std::exp(-kI * phi / 2.0) * std::sin(theta / 2.0),
        std::exp(kI * phi / 2.0) * std::cos(theta / 2.0);

    MeasurementOperator out;
    out.m = m;
    out.eigenvalues = {1.0, -1.0};
    out.projections = {chi_plus * chi_plus.adjoint(), chi_minus * chi_minus.adjoint()};
    return out;
}

// ------------------------- random model battery -------------------------

// Random model with H-commuting faithful references and a stationary
// incoming state, for property tests and validation sweeps.
inline ModelDef random_model(std::uint64_t seed, Eigen::Index dim_s, Eigen::Index dim_p,
                             double lambda, double tau) {
    SplitMix64 rng(derive_stream(seed, 0x6d6f64656cULL));

    auto random_system = [&](Eigen::Index d) {
        QuantumSystem sys;
        sys.dim = d;
        sys.hamiltonian = random_hermitian(rng, d);
        Eigen::SelfAdjointEigenSolver<Mat> es(sys.hamiltonian);
        // faithful reference, diagonal in the H eigenbasis
        Vec w(d);
        double total = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            w(i) = 0.2 + rng.uniform();
            total += w(i).real();
        }
        sys.reference_state = es.eigenvectors() * Mat((w / total).asDiagonal()) * es.eigenvectors().adjoint();
        return sys;
    };

    ModelDef def;
    def.sys_s = random_system(dim_s);
    def.sys_p = random_system(dim_p);
    def.inter.v = random_hermitian(rng, dim_s * dim_p);
    def.inter.coupling = lambda;
    def.inter.tau = tau;

    Eigen::SelfAdjointEigenSolver<Mat> es(def.sys_p.hamiltonian);
    Vec w(dim_p);
    double total = 0.0;
    for (Eigen::Index i = 0; i < dim_p; ++i) {
        w(i) = 0.1 + rng.uniform();
        total += w(i).real();
    }
    def.rho_in = es.eigenvectors() * Mat((w / total).asDiagonal()) * es.eigenvectors().adjoint();
    return def;
}

inline MeasurementOperator random_measurement(std::uint64_t seed, Eigen::Index dim_p) {
    SplitMix64 rng(derive_stream(seed, 0x6d656173ULL));
    return make_measurement(random_hermitian(rng, dim_p));
}

} // namespace qms
