// relaxation.hpp: thermal damping of the cavity field
//
//   dρ/dt = κ(1+n_t) D[a]ρ + κ n_t D[a†]ρ,   κ = 1/T_c
//
// The generator only couples ρ(m,n) to ρ(m±1,n±1), so each diagonal band
// m-n = s evolves on its own. ThermalRelaxation exponentiates the (real,
// tridiagonal) band generators once and applies them as dense band products.

#pragma once

#include <catres/fock.hpp>

#include <vector>

namespace catres {

struct CavityParams {
    double T_c = 0.13;  // photon lifetime (s)
    double n_t = 0.05;  // thermal photons per mode

    CavityParams() = default;
    CavityParams(double lifetime, double thermal) : T_c(lifetime), n_t(thermal) { validate(); }

    double kappa() const { return 1.0 / T_c; }
    void validate() const {
        if (!(T_c > 0)) throw std::invalid_argument("CavityParams: T_c must be > 0");
        if (!(n_t >= 0)) throw std::invalid_argument("CavityParams: n_t must be >= 0");
    }
    bool operator==(const CavityParams&) const = default;
};

// Right-hand side of the field Lindblad equation for an arbitrary (not
// necessarily Hermitian) operator X.
ComplexMatrix thermal_dissipator(const ComplexMatrix& X, const CavityParams& cavity);

class ThermalRelaxation {
public:
    ThermalRelaxation(const HilbertConfig& cfg, const CavityParams& cavity, double duration);

    double duration() const { return duration_; }
    Eigen::Index dim() const { return dim_; }

    // Propagates any d×d operator (a density matrix or an atomic block of one).
    ComplexMatrix apply(const ComplexMatrix& X) const;
    void apply_inplace(Eigen::Ref<ComplexMatrix> X) const;

private:
    Eigen::Index dim_;
    double duration_;
    bool identity_;
    // bands_[s] propagates band s (and -s, identical coefficients), size dim-s.
    std::vector<Eigen::MatrixXd> bands_;
};

FieldState relax(const FieldState& rho, double duration, const CavityParams& cavity);

// Fixed point of the dissipator on the truncated space (geometric populations).
FieldState thermal_state(const HilbertConfig& cfg, double n_thermal);

}  // namespace catres
