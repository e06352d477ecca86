// dynamics.hpp: atom-field propagators for one atomic transit.
//
// Joint operators act on (atom) ⊗ (field) with the atom basis (|g⟩, |e⟩):
// joint index of |g,n⟩ is n, of |e,n⟩ is dim + n.

#pragma once

#include <catres/fock.hpp>
#include <catres/relaxation.hpp>

#include <optional>
#include <vector>

namespace catres {

using JointOperator = ComplexMatrix;

struct TransitProfile {
    double omega0 = 2 * std::numbers::pi * 50e3;  // peak vacuum Rabi frequency (rad/s)
    double w = 6e-3;                              // mode waist (m)
    double v = 70.0;                              // atomic velocity (m/s)
    double delta_disp = 0.0;                      // dispersive detuning Δ (rad/s)
    double t_r = 5e-6;                            // resonant window (s)
    double window_factor = 1.5;                   // half-window in waist units

    // Total interaction time 2·window_factor·w/v.
    double t_i() const { return 2.0 * window_factor * w / v; }
    // Duration of one dispersive segment.
    double t_disp() const { return 0.5 * (t_i() - t_r); }
    void validate() const;
    bool operator==(const TransitProfile&) const = default;
};

struct AtomPreparation {
    double u = 0.0;  // Bloch polar angle
    // (cos(u/2), sin(u/2)) in the (|g⟩, |e⟩) basis.
    Eigen::Vector2d amplitudes() const { return {std::cos(0.5 * u), std::sin(0.5 * u)}; }
};

enum class Segment { first, second };
enum class Backend { numeric, analytic };
enum class Integrator { dressed, rk4 };

double rabi_coupling(double t, const TransitProfile& profile);
double detuning_schedule(double t, const TransitProfile& profile);
double theta_of(const TransitProfile& profile);
double phi0_of(const TransitProfile& profile, Segment segment);

JointOperator u_resonant(double theta, const HilbertConfig& cfg);
JointOperator u_dispersive(double phi0, const HilbertConfig& cfg);
JointOperator u_composite(double theta, double phi0, const HilbertConfig& cfg);
JointOperator jc_hamiltonian(double delta, double omega, const HilbertConfig& cfg);

// 1 ⊗ F for a field operator F.
JointOperator on_field(const FieldOperator& F);

// --------------------------- Joint states -----------------------------------

class JointState {
public:
    explicit JointState(ComplexMatrix rho, bool validate = true);
    static JointState product(const FieldState& field, const AtomPreparation& atom);

    const ComplexMatrix& matrix() const { return rho_; }
    Eigen::Index field_dim() const { return rho_.rows() / 2; }
    FieldState trace_atom(bool validate = true) const;

private:
    ComplexMatrix rho_;
};

// --------------------------- Excitation-conserving unitaries ----------------

// Unitary that only mixes |e,n⟩ with |g,n+1⟩. Stored as one 2×2 block per
// pair (ordered e_n, g_{n+1}) plus the two uncoupled levels |g,0⟩ and
// |e,n_max⟩.
class BlockUnitary {
public:
    explicit BlockUnitary(Eigen::Index field_dim);
    static BlockUnitary from_dense(const JointOperator& U, double tol = 1e-12);
    // exp(-i H dt) for the JC Hamiltonian with constant (δ, Ω).
    static BlockUnitary jc_step(double delta, double omega, double dt, Eigen::Index field_dim);

    Eigen::Index field_dim() const { return dim_; }
    // this ∘ rhs (rhs acts first)
    BlockUnitary operator*(const BlockUnitary& rhs) const;
    BlockUnitary adjoint() const;
    JointOperator dense() const;

    // ρ ← U ρ U†
    void conjugate_inplace(ComplexMatrix& rho) const;

private:
    Eigen::Index dim_;
    cplx g0_{1.0}, etop_{1.0};
    std::vector<Eigen::Matrix2cd> pairs_;
};

// --------------------------- Transit propagation ----------------------------

struct TransitOptions {
    Integrator integrator = Integrator::dressed;
    // Dressed path: max(Δ, Ω0·sqrt(dim))·dt bound for the exponential substeps.
    double dressed_phase_per_step = 0.02;
    // Dressed path: loss is Strang-interleaved in this many chunks per transit.
    int loss_chunks = 48;
    // RK4 path: initial max(Δ, Ω0)·dt bound; halved until converged.
    double rk4_phase_per_step = 0.05;
    double rk4_convergence_tol = 1e-4;
    int rk4_max_halvings = 4;
    // -1 with the same (antisymmetric) schedule runs the time-reversed transit.
    double coupling_sign = 1.0;

    bool operator==(const TransitOptions&) const = default;
};

// Lossless numeric transit unitary (product of exact dressed-block steps).
BlockUnitary transit_unitary(const HilbertConfig& cfg, const TransitProfile& profile,
                             const TransitOptions& options = {});

// Reusable transit map: the chunk unitaries and relaxation propagators are
// built once. `cavity` empty means no loss during the transit.
class TransitPropagator {
public:
    TransitPropagator(const HilbertConfig& cfg, const TransitProfile& profile,
                      std::optional<CavityParams> cavity, Backend backend, const TransitOptions& options = {});

    // Applies the transit to a joint density matrix (no validation).
    ComplexMatrix apply(const ComplexMatrix& rho) const;
    JointState apply(const JointState& rho) const;

    // Lossless transits are a single unitary.
    const std::optional<BlockUnitary>& unitary() const { return unitary_; }

private:
    struct Chunk {
        BlockUnitary U;
        std::size_t relax_after;  // index into relax_
    };

    HilbertConfig cfg_;
    TransitProfile profile_;
    std::optional<CavityParams> cavity_;
    Backend backend_;
    TransitOptions options_;

    std::optional<BlockUnitary> unitary_;
    std::vector<ThermalRelaxation> relax_;
    std::size_t relax_first_ = 0;
    std::vector<Chunk> chunks_;
};

JointState transit_propagate(const JointState& rho, const TransitProfile& profile,
                             std::optional<CavityParams> cavity, Backend backend,
                             const TransitOptions& options = {});

// Fixed-step RK4 on dρ/dt = -i[H_JC(t), ρ] + L_field[ρ] with step halving.
// Throws ConvergenceError when the field n̄ or joint purity keeps moving by
// more than options.rk4_convergence_tol.
ComplexMatrix rk4_transit(const ComplexMatrix& rho, const TransitProfile& profile,
                          std::optional<CavityParams> cavity, const TransitOptions& options = {});

}  // namespace catres
