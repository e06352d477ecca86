// reservoir.hpp: the engineered reservoir: one atomic sample per period
// t_i, occupied with probability p_at, plus thermal cavity damping.

#pragma once

#include <catres/dynamics.hpp>
#include <catres/metrics.hpp>
#include <catres/relaxation.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>

namespace catres {

enum class Mixing { deterministic, monte_carlo };

// off: no cavity damping at all. lumped: instantaneous transit followed by
// relax(t_i). interleaved: damping runs during the transit (numeric only).
enum class LossMode { off, lumped, interleaved };

enum class CacheMode { automatic, on, off };

struct ReservoirConfig {
    double p_at = 0.3;
    double u = 0.0;
    int n_samples = 200;
    TransitProfile profile;
    CavityParams cavity;
    LossMode loss = LossMode::interleaved;
    Backend backend = Backend::numeric;
    TransitOptions transit;
    Mixing mixing = Mixing::deterministic;
    std::uint64_t seed = 1;
    CacheMode cache = CacheMode::automatic;

    double period() const { return profile.t_i(); }
    void validate() const;
    bool operator==(const ReservoirConfig&) const = default;
};

// The per-sample map, with its propagators built once.
class SampleChannel {
public:
    SampleChannel(const HilbertConfig& cfg, const ReservoirConfig& config);

    const HilbertConfig& hilbert() const { return cfg_; }
    const ReservoirConfig& config() const { return config_; }

    // Field after one occupied sample (atom traced out).
    ComplexMatrix atom_branch(const ComplexMatrix& rho) const;
    // Field after one empty sample.
    ComplexMatrix empty_branch(const ComplexMatrix& rho) const;
    // (1 - p_at)·empty + p_at·atom. Linear in rho.
    ComplexMatrix deterministic(const ComplexMatrix& rho) const;

    FieldState apply(const FieldState& rho) const;
    // One draw of the occupation (monte_carlo mixing).
    FieldState apply(const FieldState& rho, std::mt19937_64& rng) const;

    // Matrix of the deterministic map on column-major vec(ρ), size d²×d².
    ComplexMatrix superoperator() const;

private:
    HilbertConfig cfg_;
    ReservoirConfig config_;
    std::optional<ThermalRelaxation> relax_period_;
    std::optional<TransitPropagator> transit_;
    // Kraus operators ⟨g|U|u_at⟩, ⟨e|U|u_at⟩ when the transit is unitary.
    ComplexMatrix kraus_g_, kraus_e_;
    bool use_kraus_ = false;
    bool relax_after_atom_ = false;
};

// Uniform draw in [0, 1) that does not depend on the standard library's
// distribution implementations.
double uniform01(std::mt19937_64& rng);

FieldState sample_map(const FieldState& rho, const ReservoirConfig& config, std::mt19937_64* rng = nullptr);

struct TrajectoryResult {
    FieldState final_state;
    std::vector<MetricsRecord> records;
    double truncation_peak = 0.0;
    std::vector<FieldState> states;  // filled when TrajectoryOptions::keep_states
    std::optional<std::uint64_t> seed;
    bool used_superoperator = false;
};

using SampleObserver = std::function<void(std::size_t index, double time, const FieldState& rho)>;

struct TrajectoryOptions {
    bool keep_states = false;
    std::optional<PureFieldState> reference;
    // Full invariant check (including the eigenvalue test) every this many samples.
    int validate_every = 1;
    double truncation_limit = 1e-4;
};

TrajectoryResult run_trajectory(const FieldState& rho0, const ReservoirConfig& config,
                                const SampleObserver& observer = {}, const TrajectoryOptions& options = {});

// Continues a finished trajectory with the reservoir off (p_at = 0) for
// extra_time, on the same period grid.
TrajectoryResult switch_off_decay(const TrajectoryResult& traj, double extra_time, const ReservoirConfig& config,
                                  const TrajectoryOptions& options = {});

// Re-evaluates the fidelity column of a trajectory that kept its states.
void refresh_fidelity(TrajectoryResult& traj, const PureFieldState& reference);

}  // namespace catres
