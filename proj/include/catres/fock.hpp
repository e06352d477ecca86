// fock.hpp: truncated Fock space of the cavity mode: ladder operators,
// coherent and multi-component superposition states, Kerr evolution.
//
// All types are templated on the real scalar; the double instantiations
// (FieldOperator, PureFieldState, FieldState) are what the rest of the
// library uses.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <catres/errors.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

namespace catres {

template <typename Real>
using ComplexMatrixT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using ComplexVectorT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using ComplexMatrix = ComplexMatrixT<double>;
using ComplexVector = ComplexVectorT<double>;
using cplx = std::complex<double>;

struct HilbertConfig {
    // Largest photon number kept; the field dimension is n_max + 1.
    int n_max = 59;

    HilbertConfig() = default;
    explicit HilbertConfig(int n) : n_max(n) {
        if (n_max < 1) throw std::invalid_argument("HilbertConfig: n_max must be >= 1");
    }
    Eigen::Index dim() const { return n_max + 1; }
    // First level counted by the truncation guard (top 10% of the ladder).
    Eigen::Index guard_level() const {
        return static_cast<Eigen::Index>(std::ceil(0.9 * n_max));
    }
    bool operator==(const HilbertConfig&) const = default;
};

struct KerrParams {
    double phi0 = 0.0;  // gamma_K t_K = zeta_K t_K
};

// --------------------------- Ladder operators -------------------------------

template <typename Real = double>
struct Ladder {
    ComplexMatrixT<Real> a, a_dagger, N;
};

// a(n-1, n) = sqrt(n); N = diag(0..n_max).
template <typename Real = double>
Ladder<Real> make_ladder(const HilbertConfig& cfg) {
    const Eigen::Index d = cfg.dim();
    Ladder<Real> L;
    L.a = ComplexMatrixT<Real>::Zero(d, d);
    L.N = ComplexMatrixT<Real>::Zero(d, d);
    for (Eigen::Index n = 1; n < d; ++n) L.a(n - 1, n) = std::sqrt(static_cast<Real>(n));
    for (Eigen::Index n = 0; n < d; ++n) L.N(n, n) = static_cast<Real>(n);
    L.a_dagger = L.a.adjoint();
    return L;
}

// Diagonal of the truncated a a† (n+1 below the edge, 0 on the top level).
template <typename Real = double>
Eigen::Matrix<Real, Eigen::Dynamic, 1> truncated_aadag_diag(const HilbertConfig& cfg) {
    const Eigen::Index d = cfg.dim();
    Eigen::Matrix<Real, Eigen::Dynamic, 1> out(d);
    for (Eigen::Index n = 0; n < d; ++n) out(n) = (n + 1 < d) ? static_cast<Real>(n + 1) : Real(0);
    return out;
}

// --------------------------- States -----------------------------------------

template <typename Real = double>
class BasicPureFieldState {
public:
    explicit BasicPureFieldState(ComplexVectorT<Real> amplitudes) : amps_(std::move(amplitudes)) {
        const Real nrm = amps_.norm();
        if (std::abs(nrm - Real(1)) > Real(1e-10)) {
            std::ostringstream os;
            os << "PureFieldState: norm " << nrm << " differs from 1";
            throw InvariantError(os.str());
        }
    }

    const ComplexVectorT<Real>& amplitudes() const { return amps_; }
    Eigen::Index dim() const { return amps_.size(); }
    ComplexMatrixT<Real> projector() const { return amps_ * amps_.adjoint(); }

private:
    ComplexVectorT<Real> amps_;
};

// Checks the density-matrix invariants; throws InvariantError on violation.
template <typename Real>
void check_density_matrix(const ComplexMatrixT<Real>& rho, Real herm_tol = Real(1e-10),
                          Real trace_tol = Real(1e-8), Real psd_tol = Real(1e-8)) {
    if (rho.rows() != rho.cols() || rho.rows() == 0)
        throw InvariantError("density matrix must be square and non-empty");
    const Real herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (!(herm <= herm_tol)) {
        std::ostringstream os;
        os << "density matrix not Hermitian (deviation " << herm << ")";
        throw InvariantError(os.str());
    }
    const Real tr_err = std::abs(rho.trace() - std::complex<Real>(1));
    if (!(tr_err <= trace_tol)) {
        std::ostringstream os;
        os << "density matrix trace error " << tr_err;
        throw InvariantError(os.str());
    }
    const ComplexMatrixT<Real> h = (rho + rho.adjoint()) * Real(0.5);
    Eigen::SelfAdjointEigenSolver<ComplexMatrixT<Real>> es(h, Eigen::EigenvaluesOnly);
    const Real lmin = es.eigenvalues().minCoeff();
    if (!(lmin >= -psd_tol)) {
        std::ostringstream os;
        os << "density matrix not positive (smallest eigenvalue " << lmin << ")";
        throw InvariantError(os.str());
    }
}

template <typename Real = double>
class BasicFieldState {
public:
    explicit BasicFieldState(ComplexMatrixT<Real> rho, bool validate = true) : rho_(std::move(rho)) {
        if (validate) check_density_matrix<Real>(rho_);
    }
    explicit BasicFieldState(const BasicPureFieldState<Real>& psi) : rho_(psi.projector()) {}

    static BasicFieldState fock(const HilbertConfig& cfg, Eigen::Index n) {
        if (n < 0 || n >= cfg.dim()) throw std::out_of_range("FieldState::fock: level outside cutoff");
        ComplexMatrixT<Real> r = ComplexMatrixT<Real>::Zero(cfg.dim(), cfg.dim());
        r(n, n) = 1;
        return BasicFieldState(std::move(r), false);
    }
    static BasicFieldState vacuum(const HilbertConfig& cfg) { return fock(cfg, 0); }

    const ComplexMatrixT<Real>& matrix() const { return rho_; }
    Eigen::Index dim() const { return rho_.rows(); }

private:
    ComplexMatrixT<Real> rho_;
};

using PureFieldState = BasicPureFieldState<double>;
using FieldState = BasicFieldState<double>;
using FieldOperator = ComplexMatrix;

// Fixes the global phase: first amplitude with |c| > eps made real positive.
template <typename Real>
void fix_global_phase(ComplexVectorT<Real>& v) {
    const Real eps = Real(1e-14) * std::max(Real(1), v.cwiseAbs().maxCoeff());
    for (Eigen::Index n = 0; n < v.size(); ++n) {
        if (std::abs(v(n)) > eps) {
            v *= std::conj(v(n)) / std::abs(v(n));
            v(n) = std::abs(v(n));
            return;
        }
    }
}

// Un-normalized amplitudes e^{-|α|²/2} α^n / sqrt(n!) of the exact coherent state,
// evaluated in log space.
template <typename Real>
ComplexVectorT<Real> coherent_amplitudes(std::complex<Real> alpha, Eigen::Index dim) {
    ComplexVectorT<Real> c = ComplexVectorT<Real>::Zero(dim);
    const Real r = std::abs(alpha);
    if (r == Real(0)) {
        c(0) = 1;
        return c;
    }
    const Real phase = std::arg(alpha);
    const Real logr = std::log(r);
    for (Eigen::Index n = 0; n < dim; ++n) {
        const Real lg = -Real(0.5) * r * r + static_cast<Real>(n) * logr -
                        Real(0.5) * std::lgamma(static_cast<Real>(n) + 1);
        c(n) = std::polar(std::exp(lg), static_cast<Real>(n) * phase);
    }
    return c;
}

template <typename Real>
void check_amplitude_guard(std::complex<Real> alpha, const HilbertConfig& cfg, const char* who) {
    if (std::norm(alpha) > Real(0.6) * cfg.n_max) {
        std::ostringstream os;
        os << who << ": |alpha|^2 = " << std::norm(alpha) << " exceeds 0.6*n_max = " << 0.6 * cfg.n_max;
        throw TruncationError(os.str());
    }
}

// Coherent state |α⟩ on the truncated basis. The weight discarded by the
// cutoff must stay below 1e-6.
template <typename Real = double>
BasicPureFieldState<Real> coherent_state(std::complex<Real> alpha, const HilbertConfig& cfg) {
    check_amplitude_guard(alpha, cfg, "coherent_state");
    ComplexVectorT<Real> c = coherent_amplitudes(alpha, cfg.dim());
    const Real nrm = c.norm();
    if (Real(1) - nrm * nrm > Real(1e-6)) {
        std::ostringstream os;
        os << "coherent_state: cutoff discards weight " << 1 - nrm * nrm;
        throw TruncationError(os.str());
    }
    c /= nrm;
    fix_global_phase(c);
    return BasicPureFieldState<Real>(std::move(c));
}

// Exact overlap ⟨β|γ⟩ of two coherent states.
template <typename Real>
std::complex<Real> coherent_overlap(std::complex<Real> beta, std::complex<Real> gamma) {
    return std::exp(-Real(0.5) * std::norm(beta) - Real(0.5) * std::norm(gamma) + std::conj(beta) * gamma);
}

// Diagonal unitary e^{-i φ0 n(n+1)}.
template <typename Real = double>
ComplexMatrixT<Real> kerr_propagator(const KerrParams& params, const HilbertConfig& cfg) {
    const Eigen::Index d = cfg.dim();
    ComplexMatrixT<Real> U = ComplexMatrixT<Real>::Zero(d, d);
    for (Eigen::Index n = 0; n < d; ++n) {
        const Real nn1 = static_cast<Real>(n) * static_cast<Real>(n + 1);
        U(n, n) = std::polar(Real(1), -static_cast<Real>(params.phi0) * nn1);
    }
    return U;
}

template <typename Real = double>
BasicPureFieldState<Real> apply(const ComplexMatrixT<Real>& op, const BasicPureFieldState<Real>& psi) {
    ComplexVectorT<Real> v = op * psi.amplitudes();
    v /= v.norm();
    return BasicPureFieldState<Real>(std::move(v));
}

// Normalized Σ_j e^{iθ_j} |α e^{2πij/k}⟩ with θ_0 = 0. Normalization uses
// the exact Gram matrix of the coherent components.
template <typename Real = double>
BasicPureFieldState<Real> ideal_mfss(std::complex<Real> alpha, int k, std::span<const Real> rel_phases,
                                     const HilbertConfig& cfg) {
    if (k < 1) throw std::invalid_argument("ideal_mfss: k must be >= 1");
    if (static_cast<int>(rel_phases.size()) != k - 1)
        throw std::invalid_argument("ideal_mfss: need k-1 relative phases");
    check_amplitude_guard(alpha, cfg, "ideal_mfss");

    std::vector<std::complex<Real>> comps(k), weights(k);
    for (int j = 0; j < k; ++j) {
        const Real ang = Real(2) * std::numbers::pi_v<Real> * j / k;
        comps[j] = alpha * std::polar(Real(1), ang);
        weights[j] = std::polar(Real(1), j == 0 ? Real(0) : rel_phases[j - 1]);
    }
    ComplexVectorT<Real> v = ComplexVectorT<Real>::Zero(cfg.dim());
    for (int j = 0; j < k; ++j) v += weights[j] * coherent_amplitudes(comps[j], cfg.dim());

    Real norm2 = 0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            norm2 += std::real(std::conj(weights[i]) * weights[j] * coherent_overlap(comps[i], comps[j]));
    if (!(norm2 > Real(1e-300)))
        throw std::invalid_argument("ideal_mfss: components cancel, state has zero norm");
    v /= std::sqrt(norm2);

    const Real lost = std::abs(Real(1) - v.squaredNorm());
    if (lost > Real(1e-6)) {
        std::ostringstream os;
        os << "ideal_mfss: cutoff discards weight " << lost;
        throw TruncationError(os.str());
    }
    v /= v.norm();
    fix_global_phase(v);
    return BasicPureFieldState<Real>(std::move(v));
}

template <typename Real = double>
BasicPureFieldState<Real> ideal_mfss(std::complex<Real> alpha, int k, const std::vector<Real>& rel_phases,
                                     const HilbertConfig& cfg) {
    return ideal_mfss<Real>(alpha, k, std::span<const Real>(rel_phases), cfg);
}

}  // namespace catres
