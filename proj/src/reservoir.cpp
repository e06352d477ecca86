#include <catres/reservoir.hpp>

#include <cmath>
#include <sstream>

namespace catres {

void ReservoirConfig::validate() const {
    if (!(p_at >= 0 && p_at <= 1)) throw std::invalid_argument("ReservoirConfig: p_at must lie in [0, 1]");
    if (n_samples < 0) throw std::invalid_argument("ReservoirConfig: n_samples must be >= 0");
    profile.validate();
    cavity.validate();
}

double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

SampleChannel::SampleChannel(const HilbertConfig& cfg, const ReservoirConfig& config) : cfg_(cfg), config_(config) {
    config_.validate();
    const bool loss = config_.loss != LossMode::off;
    // The analytic transit is instantaneous; its damping is always lumped.
    const bool interleaved = loss && config_.loss == LossMode::interleaved && config_.backend == Backend::numeric;
    if (loss) relax_period_.emplace(cfg_, config_.cavity, config_.period());
    relax_after_atom_ = loss && !interleaved;

    transit_.emplace(cfg_, config_.profile, interleaved ? std::optional<CavityParams>(config_.cavity) : std::nullopt,
                     config_.backend, config_.transit);

    if (const auto& U = transit_->unitary()) {
        const Eigen::Index d = cfg_.dim();
        const JointOperator Ud = U->dense();
        const Eigen::Vector2d c = AtomPreparation{config_.u}.amplitudes();
        kraus_g_ = c(0) * Ud.topLeftCorner(d, d) + c(1) * Ud.topRightCorner(d, d);
        kraus_e_ = c(0) * Ud.bottomLeftCorner(d, d) + c(1) * Ud.bottomRightCorner(d, d);
        use_kraus_ = true;
    }
}

ComplexMatrix SampleChannel::atom_branch(const ComplexMatrix& rho) const {
    ComplexMatrix out;
    if (use_kraus_) {
        out = kraus_g_ * rho * kraus_g_.adjoint() + kraus_e_ * rho * kraus_e_.adjoint();
    } else {
        const Eigen::Index d = cfg_.dim();
        const Eigen::Vector2d c = AtomPreparation{config_.u}.amplitudes();
        ComplexMatrix joint(2 * d, 2 * d);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) joint.block(a * d, b * d, d, d) = (c(a) * c(b)) * rho;
        joint = transit_->apply(joint);
        out = joint.topLeftCorner(d, d) + joint.bottomRightCorner(d, d);
    }
    if (relax_after_atom_) relax_period_->apply_inplace(out);
    return out;
}

ComplexMatrix SampleChannel::empty_branch(const ComplexMatrix& rho) const {
    if (!relax_period_) return rho;
    return relax_period_->apply(rho);
}

ComplexMatrix SampleChannel::deterministic(const ComplexMatrix& rho) const {
    const double p = config_.p_at;
    if (p == 0.0) return empty_branch(rho);
    if (p == 1.0) return atom_branch(rho);
    return (1.0 - p) * empty_branch(rho) + p * atom_branch(rho);
}

FieldState SampleChannel::apply(const FieldState& rho) const { return FieldState(deterministic(rho.matrix()), false); }

FieldState SampleChannel::apply(const FieldState& rho, std::mt19937_64& rng) const {
    const bool occupied = uniform01(rng) < config_.p_at;
    return FieldState(occupied ? atom_branch(rho.matrix()) : empty_branch(rho.matrix()), false);
}

ComplexMatrix SampleChannel::superoperator() const {
    const Eigen::Index d = cfg_.dim();
    ComplexMatrix S(d * d, d * d);
    ComplexMatrix E = ComplexMatrix::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            E(i, j) = 1.0;
            const ComplexMatrix img = deterministic(E);
            S.col(j * d + i) = Eigen::Map<const ComplexVector>(img.data(), d * d);
            E(i, j) = 0.0;
        }
    }
    return S;
}

FieldState sample_map(const FieldState& rho, const ReservoirConfig& config, std::mt19937_64* rng) {
    const SampleChannel ch(HilbertConfig(static_cast<int>(rho.dim() - 1)), config);
    if (config.mixing == Mixing::monte_carlo) {
        if (rng) return FieldState(ch.apply(rho, *rng).matrix());
        std::mt19937_64 local(config.seed);
        return FieldState(ch.apply(rho, local).matrix());
    }
    return FieldState(ch.apply(rho).matrix());
}

// --------------------------- Trajectories -----------------------------------

namespace {

void check_sample(std::size_t index, const FieldState& rho, const HilbertConfig& cfg, bool full,
                  const TrajectoryOptions& opt, double& peak) {
    try {
        if (full) {
            check_density_matrix<double>(rho.matrix());
        } else {
            const double herm = (rho.matrix() - rho.matrix().adjoint()).cwiseAbs().maxCoeff();
            const double tr = std::abs(rho.matrix().trace() - cplx(1.0));
            if (!(herm <= 1e-10 && tr <= 1e-8)) throw InvariantError("Hermiticity or trace violated");
        }
    } catch (const InvariantError& e) {
        throw TrajectoryError(index, e.what());
    }
    const double top = top_population(rho, cfg);
    peak = std::max(peak, top);
    if (!(top <= opt.truncation_limit)) {
        std::ostringstream os;
        os << "population " << top << " above level " << cfg.guard_level() << " exceeds "
           << opt.truncation_limit << "; raise n_max";
        throw TrajectoryError(index, os.str());
    }
}

}  // namespace

TrajectoryResult run_trajectory(const FieldState& rho0, const ReservoirConfig& config, const SampleObserver& observer,
                                const TrajectoryOptions& options) {
    config.validate();
    const HilbertConfig cfg(static_cast<int>(rho0.dim() - 1));
    const double period = config.period();
    const PureFieldState* ref = options.reference ? &*options.reference : nullptr;

    TrajectoryResult res{rho0, {}, 0.0, {}, std::nullopt, false};
    if (config.mixing == Mixing::monte_carlo) res.seed = config.seed;

    check_sample(0, rho0, cfg, true, options, res.truncation_peak);
    res.records.push_back(make_record(0, 0.0, rho0, ref));
    if (options.keep_states) res.states.push_back(rho0);
    if (observer) observer(0, 0.0, rho0);
    if (config.n_samples == 0) return res;

    const SampleChannel channel(cfg, config);
    const Eigen::Index d = cfg.dim();
    const bool deterministic = config.mixing == Mixing::deterministic;
    bool cache = false;
    if (deterministic) {
        if (config.cache == CacheMode::on) cache = true;
        // Building the cache costs d² sample maps.
        if (config.cache == CacheMode::automatic) cache = config.n_samples > 2 * d * d;
    }
    ComplexMatrix S;
    if (cache) S = channel.superoperator();
    res.used_superoperator = cache;

    std::mt19937_64 rng(config.seed);
    ComplexMatrix rho = rho0.matrix();
    for (int j = 1; j <= config.n_samples; ++j) {
        const std::size_t idx = static_cast<std::size_t>(j);
        try {
            if (cache) {
                ComplexVector v = S * Eigen::Map<const ComplexVector>(rho.data(), d * d);
                rho = Eigen::Map<const ComplexMatrix>(v.data(), d, d);
            } else if (deterministic) {
                rho = channel.deterministic(rho);
            } else {
                rho = channel.apply(FieldState(std::move(rho), false), rng).matrix();
            }
        } catch (const TrajectoryError&) {
            throw;
        } catch (const std::exception& e) {
            throw TrajectoryError(idx, e.what());
        }
        // Hermitian part only: removes round-off asymmetry, leaves the map unchanged.
        rho = 0.5 * (rho + rho.adjoint()).eval();
        const FieldState state(rho, false);
        const bool full = options.validate_every <= 1 || j % options.validate_every == 0 || j == config.n_samples;
        check_sample(idx, state, cfg, full, options, res.truncation_peak);
        const double t = double(j) * period;
        res.records.push_back(make_record(idx, t, state, ref));
        if (options.keep_states) res.states.push_back(state);
        if (observer) observer(idx, t, state);
    }
    res.final_state = FieldState(rho, false);
    return res;
}

TrajectoryResult switch_off_decay(const TrajectoryResult& traj, double extra_time, const ReservoirConfig& config,
                                  const TrajectoryOptions& options) {
    if (!(extra_time >= 0)) throw std::invalid_argument("switch_off_decay: extra_time must be >= 0");
    TrajectoryResult out = traj;
    const double period = config.period();
    const int n_extra = static_cast<int>(std::ceil(extra_time / period - 1e-9));
    if (n_extra <= 0) return out;

    const HilbertConfig cfg(static_cast<int>(traj.final_state.dim() - 1));
    ReservoirConfig off = config;
    off.p_at = 0.0;
    const SampleChannel channel(cfg, off);
    const PureFieldState* ref = options.reference ? &*options.reference : nullptr;

    std::size_t idx = traj.records.empty() ? 0 : traj.records.back().sample_index;
    ComplexMatrix rho = traj.final_state.matrix();
    for (int j = 1; j <= n_extra; ++j) {
        ++idx;
        rho = channel.empty_branch(rho);
        rho = 0.5 * (rho + rho.adjoint()).eval();
        const FieldState state(rho, false);
        const bool full = options.validate_every <= 1 || j % options.validate_every == 0 || j == n_extra;
        check_sample(idx, state, cfg, full, options, out.truncation_peak);
        out.records.push_back(make_record(idx, double(idx) * period, state, ref));
        if (options.keep_states) out.states.push_back(state);
    }
    out.final_state = FieldState(rho, false);
    return out;
}

void refresh_fidelity(TrajectoryResult& traj, const PureFieldState& reference) {
    if (traj.states.size() != traj.records.size())
        throw std::invalid_argument("refresh_fidelity: trajectory did not keep its states");
    for (std::size_t i = 0; i < traj.records.size(); ++i)
        traj.records[i].fidelity = overlap_fidelity(traj.states[i], reference);
}

}  // namespace catres
