// standard_rep.hpp -- doubled (GNS) representation of a finite quantum system:
// reference vector, standard Liouvillean, modular data, commutant embedding of
// the incoming probe state, and the zero-reference generator K.
//
// Index conventions. A system of dimension d is doubled to dimension d^2 with
// basis |i> (x) |jbar>, flattened as i*d + j. A vector v on the doubled space
// is the vectorization of a matrix X via v(i*d+j) = X(i,j), so that
//   embed(A) v        = vec(A X)          (observables act on the left factor)
//   (1 (x) conj(A)) v = vec(X A^dagger)   (commutant acts on the right factor)
// and the reference vector is psi = vec(rho^{1/2}).
//
// The joint scatterer+probe doubled space is ordered (S, Sbar, P, Pbar),
// flattened as ((s*dS + sbar)*dP + p)*dP + pbar, so the doubled scatterer
// space is the leading contiguous factor.

#pragma once

#include <string>
#include <vector>

#include "qms/linalg.hpp"

namespace qms {

struct QuantumSystem {
    Eigen::Index dim{0};
    Mat hamiltonian;
    Mat reference_state;
    std::vector<std::string> basis_labels;

    void validate() const {
        if (hamiltonian.rows() != dim || reference_state.rows() != dim)
            throw DimensionMismatch("QuantumSystem: matrix dims disagree with dim");
        if (hermiticity_defect(hamiltonian) > 1e-12 * std::max(1.0, hamiltonian.cwiseAbs().maxCoeff()))
            throw Error("QuantumSystem: hamiltonian not Hermitian");
        if (hermiticity_defect(reference_state) > 1e-12)
            throw Error("QuantumSystem: reference state not Hermitian");
        Eigen::SelfAdjointEigenSolver<Mat> es(reference_state);
        if (es.eigenvalues().minCoeff() <= 1e-12)
            throw NonFaithfulState("QuantumSystem: reference state is not faithful");
        if (std::abs(reference_state.trace().real() - 1.0) > 1e-12)
            throw Error("QuantumSystem: reference state trace != 1");
        Mat comm = hamiltonian * reference_state - reference_state * hamiltonian;
        if (comm.cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, hamiltonian.cwiseAbs().maxCoeff()))
            throw NonCommuting("QuantumSystem: [H, rho] != 0");
    }
};

// Anti-linear modular conjugation, stored structurally: J v = perm(conj(v)).
struct ModularConjugation {
    std::vector<Eigen::Index> perm;

    Vec apply(const Vec& v) const {
        Vec out(v.size());
        for (Eigen::Index k = 0; k < v.size(); ++k) out(perm[k]) = std::conj(v(k));
        return out;
    }

    // The linear matrix J M J (two anti-linear factors cancel the conjugation
    // of the argument): (JMJ)(i,j) = conj(M(perm^{-1} i, perm^{-1} j)); the
    // swap permutation is an involution, so perm^{-1} = perm.
    Mat sandwich(const Mat& m) const {
        Mat out(m.rows(), m.cols());
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                out(perm[i], perm[j]) = std::conj(m(i, j));
        return out;
    }
};

struct StandardForm {
    QuantumSystem base;
    Eigen::Index doubled_dim{0};
    Vec psi;
    Mat liouvillean;
    Mat delta_half;
    Mat delta_minus_half;
    ModularConjugation modular_conjugation;

    Mat embed_observable(const Mat& a) const {
        return kron(a, identity(base.dim));
    }
};

inline StandardForm build_standard_form(const QuantumSystem& sys) {
    sys.validate();
    const Eigen::Index d = sys.dim;
    StandardForm sf;
    sf.base = sys;
    sf.doubled_dim = d * d;

    Mat rho_half = sqrt_psd(sys.reference_state);
    sf.psi = Vec(d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            sf.psi(i * d + j) = rho_half(i, j);

    sf.liouvillean = kron(sys.hamiltonian, identity(d)) - kron(identity(d), sys.hamiltonian.conjugate());

    Eigen::SelfAdjointEigenSolver<Mat> es(sys.reference_state);
    Vec dh(d), dmh(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        double s = std::sqrt(es.eigenvalues()(k));
        dh(k) = s;
        dmh(k) = 1.0 / s;
    }
    Mat rh = es.eigenvectors() * dh.asDiagonal() * es.eigenvectors().adjoint();
    Mat rmh = es.eigenvectors() * dmh.asDiagonal() * es.eigenvectors().adjoint();
    sf.delta_half = kron(rh, rmh.conjugate());
    sf.delta_minus_half = kron(rmh, rh.conjugate());

    sf.modular_conjugation.perm.resize(d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            sf.modular_conjugation.perm[i * d + j] = j * d + i;
    return sf;
}

struct Interaction {
    Mat v;           // Hermitian, on H_S (x) H_P
    double coupling{0.0};
    double tau{1.0};

    void validate() const {
        if (hermiticity_defect(v) > 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff()))
            throw Error("Interaction: V not Hermitian");
        if (tau <= 0.0) throw Error("Interaction: tau must be positive");
    }
};

struct IncomingState {
    Mat density;      // on H_P
    Mat x_commutant;  // X with B = 1 (x) conj(X) on the doubled probe space
    Mat b_operator;   // B itself, on the doubled probe space
};

inline IncomingState build_incoming_state(const QuantumSystem& probe, const Mat& density) {
    probe.validate();
    const Eigen::Index d = probe.dim;
    if (density.rows() != d || density.cols() != d)
        throw DimensionMismatch("build_incoming_state: density dimension mismatch");
    if (hermiticity_defect(density) > 1e-12)
        throw Error("build_incoming_state: density not Hermitian");
    Mat comm = density * probe.hamiltonian - probe.hamiltonian * density;
    if (comm.cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, probe.hamiltonian.cwiseAbs().maxCoeff()))
        throw NonStationary("build_incoming_state: [density, H_P] != 0");

    Eigen::SelfAdjointEigenSolver<Mat> es(probe.reference_state);
    if (es.eigenvalues().minCoeff() <= 1e-12)
        throw NonFaithfulReference("build_incoming_state: probe reference not faithful");
    Vec dmh(d);
    for (Eigen::Index k = 0; k < d; ++k) dmh(k) = 1.0 / std::sqrt(es.eigenvalues()(k));
    Mat qmh = es.eigenvectors() * dmh.asDiagonal() * es.eigenvectors().adjoint();

    IncomingState in;
    in.density = density;
    // Unique positive commutant representative: X = (q^{-1/2} rho_in q^{-1/2})^{1/2}
    // gives <B psi_P, embed(A) B psi_P> = tr(rho_in A).
    in.x_commutant = sqrt_psd(Mat(qmh * density * qmh), 0.0);
    in.b_operator = kron(identity(d), in.x_commutant.conjugate());
    return in;
}

// Embedding of an operator on H_S (x) H_P into the (S, Sbar, P, Pbar) space.
inline Mat embed_sp(const Mat& a, Eigen::Index ds, Eigen::Index dp) {
    const Eigen::Index dim = ds * ds * dp * dp;
    Mat out = Mat::Zero(dim, dim);
    for (Eigen::Index s = 0; s < ds; ++s)
        for (Eigen::Index sp = 0; sp < ds; ++sp)
            for (Eigen::Index p = 0; p < dp; ++p)
                for (Eigen::Index pp = 0; pp < dp; ++pp) {
                    cplx val = a(s * dp + p, sp * dp + pp);
                    if (val == cplx(0.0, 0.0)) continue;
                    for (Eigen::Index sb = 0; sb < ds; ++sb)
                        for (Eigen::Index pb = 0; pb < dp; ++pb) {
                            Eigen::Index row = ((s * ds + sb) * dp + p) * dp + pb;
                            Eigen::Index col = ((sp * ds + sb) * dp + pp) * dp + pb;
                            out(row, col) = val;
                        }
                }
    return out;
}

// Modular conjugation of the product reference vector psi_S (x) psi_P in the
// (S, Sbar, P, Pbar) ordering: swap S<->Sbar and P<->Pbar, conjugate entries.
inline ModularConjugation product_conjugation(Eigen::Index ds, Eigen::Index dp) {
    ModularConjugation j;
    j.perm.resize(ds * ds * dp * dp);
    for (Eigen::Index s = 0; s < ds; ++s)
        for (Eigen::Index sb = 0; sb < ds; ++sb)
            for (Eigen::Index p = 0; p < dp; ++p)
                for (Eigen::Index pb = 0; pb < dp; ++pb)
                    j.perm[((s * ds + sb) * dp + p) * dp + pb] =
                        ((sb * ds + s) * dp + pb) * dp + p;
    return j;
}

// K = L_S + L_P + lambda V - lambda J Delta^{1/2} V Delta^{-1/2} J (on the
// doubled S (x) P space); K (psi_S (x) psi_P) = 0 by construction.
inline Mat build_k(const StandardForm& sf_s, const StandardForm& sf_p, const Interaction& inter) {
    inter.validate();
    const Eigen::Index ds = sf_s.base.dim, dp = sf_p.base.dim;
    if (inter.v.rows() != ds * dp)
        throw DimensionMismatch("build_k: V dimension mismatch");

    Mat l0 = kron(sf_s.liouvillean, identity(dp * dp)) + kron(identity(ds * ds), sf_p.liouvillean);
    if (inter.coupling == 0.0) return l0;

    Mat v_e = embed_sp(inter.v, ds, dp);
    Mat delta_half = kron(sf_s.delta_half, sf_p.delta_half);
    Mat delta_minus_half = kron(sf_s.delta_minus_half, sf_p.delta_minus_half);
    ModularConjugation j = product_conjugation(ds, dp);
    Mat v_prime = j.sandwich(Mat(delta_half * v_e * delta_minus_half));
    return l0 + inter.coupling * (v_e - v_prime);
}

} // namespace qms
