#include <catres/dynamics.hpp>

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace catres {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

// Time segments of one transit: [t0, t1] with constant detuning.
struct SegmentSpan {
    double t0, t1, delta;
};

std::vector<SegmentSpan> segments(const TransitProfile& p) {
    const double ti = p.t_i(), tr = p.t_r;
    return {{-0.5 * ti, -0.5 * tr, p.delta_disp}, {-0.5 * tr, 0.5 * tr, 0.0}, {0.5 * tr, 0.5 * ti, -p.delta_disp}};
}

// ∫ Ω(t)^power dt over [a, b], closed form through erf.
double gaussian_integral(const TransitProfile& p, double a, double b, int power) {
    const double k = p.v / p.w * std::sqrt(double(power));
    return std::pow(p.omega0, power) * 0.5 * kSqrtPi / k * (std::erf(k * b) - std::erf(k * a));
}

double field_nbar(const ComplexMatrix& joint) {
    const Eigen::Index d = joint.rows() / 2;
    double nb = 0;
    for (Eigen::Index n = 0; n < d; ++n) nb += double(n) * (joint(n, n).real() + joint(d + n, d + n).real());
    return nb;
}

double joint_purity(const ComplexMatrix& rho) { return rho.cwiseAbs2().sum(); }

}  // namespace

void TransitProfile::validate() const {
    if (!(omega0 > 0)) throw std::invalid_argument("TransitProfile: omega0 must be > 0");
    if (!(w > 0)) throw std::invalid_argument("TransitProfile: w must be > 0");
    if (!(v > 0)) throw std::invalid_argument("TransitProfile: v must be > 0");
    if (!(delta_disp >= 0)) throw std::invalid_argument("TransitProfile: delta_disp must be >= 0");
    if (!(window_factor > 0)) throw std::invalid_argument("TransitProfile: window_factor must be > 0");
    if (!(t_r > 0 && t_r < t_i())) throw std::invalid_argument("TransitProfile: need 0 < t_r < t_i");
}

double rabi_coupling(double t, const TransitProfile& p) {
    const double x = p.v * t / p.w;
    return p.omega0 * std::exp(-x * x);
}

double detuning_schedule(double t, const TransitProfile& p) {
    const double half = 0.5 * p.t_i();
    if (t < -half * (1 + 1e-12) || t > half * (1 + 1e-12)) {
        std::ostringstream os;
        os << "detuning_schedule: t = " << t << " outside the interaction window";
        throw std::out_of_range(os.str());
    }
    if (std::abs(t) <= 0.5 * p.t_r) return 0.0;
    return t < 0 ? p.delta_disp : -p.delta_disp;
}

double theta_of(const TransitProfile& p) { return gaussian_integral(p, -0.5 * p.t_r, 0.5 * p.t_r, 1); }

double phi0_of(const TransitProfile& p, Segment segment) {
    if (!(p.delta_disp > 0)) throw ZeroDetuning("phi0_of: dispersive detuning is zero");
    const double I = gaussian_integral(p, 0.5 * p.t_r, 0.5 * p.t_i(), 2);
    const double delta = segment == Segment::first ? p.delta_disp : -p.delta_disp;
    return -I / (4.0 * delta);
}

// --------------------------- Analytic operators -----------------------------

JointOperator u_resonant(double theta, const HilbertConfig& cfg) {
    const Eigen::Index d = cfg.dim();
    JointOperator U = JointOperator::Zero(2 * d, 2 * d);
    // |g⟩⟨g| cos(Θ√N/2)
    for (Eigen::Index n = 0; n < d; ++n) U(n, n) = std::cos(0.5 * theta * std::sqrt(double(n)));
    // |e⟩⟨e| cos(Θ√(aa†)/2) with the truncated aa† (zero on the top level)
    for (Eigen::Index n = 0; n < d; ++n) {
        const double aad = (n + 1 < d) ? double(n + 1) : 0.0;
        U(d + n, d + n) = std::cos(0.5 * theta * std::sqrt(aad));
    }
    for (Eigen::Index n = 0; n + 1 < d; ++n) {
        const double s = std::sin(0.5 * theta * std::sqrt(double(n + 1)));
        // -|e⟩⟨g| a sin(Θ√N/2)/√N : |g,n+1⟩ → -s |e,n⟩
        U(d + n, n + 1) = -s;
        // |g⟩⟨e| sin(Θ√N/2)/√N a† : |e,n⟩ → s |g,n+1⟩
        U(n + 1, d + n) = s;
    }
    return U;
}

JointOperator u_dispersive(double phi0, const HilbertConfig& cfg) {
    const Eigen::Index d = cfg.dim();
    JointOperator U = JointOperator::Zero(2 * d, 2 * d);
    for (Eigen::Index n = 0; n < d; ++n) {
        U(n, n) = std::polar(1.0, -phi0 * double(n));
        // truncated a a†, as in u_resonant: |e,n_max⟩ has no partner level
        U(d + n, d + n) = std::polar(1.0, n + 1 < d ? phi0 * double(n + 1) : 0.0);
    }
    return U;
}

JointOperator u_composite(double theta, double phi0, const HilbertConfig& cfg) {
    const Eigen::Index d = cfg.dim();
    JointOperator U = u_resonant(theta, cfg);
    // Off-diagonal blocks pick up e^{±2iφ0 N}; the diagonal blocks are untouched.
    for (Eigen::Index n = 0; n + 1 < d; ++n) {
        const cplx ph = std::polar(1.0, 2.0 * phi0 * double(n + 1));
        U(d + n, n + 1) *= ph;
        U(n + 1, d + n) *= std::conj(ph);
    }
    return U;
}

JointOperator jc_hamiltonian(double delta, double omega, const HilbertConfig& cfg) {
    const Eigen::Index d = cfg.dim();
    JointOperator H = JointOperator::Zero(2 * d, 2 * d);
    for (Eigen::Index n = 0; n < d; ++n) {
        H(n, n) = -0.5 * delta;
        H(d + n, d + n) = 0.5 * delta;
    }
    const cplx I(0.0, 1.0);
    for (Eigen::Index n = 0; n + 1 < d; ++n) {
        const double c = 0.5 * omega * std::sqrt(double(n + 1));
        H(n + 1, d + n) = I * c;   // i(Ω/2)|g⟩⟨e| a†
        H(d + n, n + 1) = -I * c;  // -i(Ω/2)|e⟩⟨g| a
    }
    return H;
}

JointOperator on_field(const FieldOperator& F) {
    const Eigen::Index d = F.rows();
    JointOperator J = JointOperator::Zero(2 * d, 2 * d);
    J.topLeftCorner(d, d) = F;
    J.bottomRightCorner(d, d) = F;
    return J;
}

// --------------------------- JointState -------------------------------------

JointState::JointState(ComplexMatrix rho, bool validate) : rho_(std::move(rho)) {
    if (rho_.rows() % 2 != 0) throw std::invalid_argument("JointState: odd dimension");
    if (validate) check_density_matrix<double>(rho_);
}

JointState JointState::product(const FieldState& field, const AtomPreparation& atom) {
    const Eigen::Index d = field.dim();
    const Eigen::Vector2d c = atom.amplitudes();
    ComplexMatrix rho(2 * d, 2 * d);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) rho.block(a * d, b * d, d, d) = (c(a) * c(b)) * field.matrix();
    return JointState(std::move(rho), false);
}

FieldState JointState::trace_atom(bool validate) const {
    const Eigen::Index d = field_dim();
    return FieldState(rho_.topLeftCorner(d, d) + rho_.bottomRightCorner(d, d), validate);
}

// --------------------------- BlockUnitary -----------------------------------

BlockUnitary::BlockUnitary(Eigen::Index field_dim)
    : dim_(field_dim), pairs_(static_cast<std::size_t>(field_dim - 1), Eigen::Matrix2cd::Identity()) {
    if (field_dim < 2) throw std::invalid_argument("BlockUnitary: field dimension must be >= 2");
}

BlockUnitary BlockUnitary::from_dense(const JointOperator& U, double tol) {
    const Eigen::Index d = U.rows() / 2;
    BlockUnitary B(d);
    JointOperator rest = U;
    B.g0_ = U(0, 0);
    B.etop_ = U(2 * d - 1, 2 * d - 1);
    rest(0, 0) = 0;
    rest(2 * d - 1, 2 * d - 1) = 0;
    for (Eigen::Index n = 0; n + 1 < d; ++n) {
        const Eigen::Index e = d + n, g = n + 1;
        Eigen::Matrix2cd& M = B.pairs_[static_cast<std::size_t>(n)];
        M << U(e, e), U(e, g), U(g, e), U(g, g);
        rest(e, e) = rest(e, g) = rest(g, e) = rest(g, g) = 0;
    }
    if (rest.cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("BlockUnitary::from_dense: operator does not conserve excitations");
    return B;
}

BlockUnitary BlockUnitary::jc_step(double delta, double omega, double dt, Eigen::Index field_dim) {
    BlockUnitary B(field_dim);
    B.g0_ = std::polar(1.0, 0.5 * delta * dt);
    B.etop_ = std::polar(1.0, -0.5 * delta * dt);
    const cplx I(0.0, 1.0);
    for (Eigen::Index n = 0; n + 1 < field_dim; ++n) {
        const double c = 0.5 * omega * std::sqrt(double(n + 1));
        const double h = 0.5 * delta;
        const double wr = std::sqrt(h * h + c * c);
        Eigen::Matrix2cd H;
        H << h, -I * c, I * c, -h;
        const double sinc = wr > 0 ? std::sin(wr * dt) / wr : dt;
        B.pairs_[static_cast<std::size_t>(n)] = std::cos(wr * dt) * Eigen::Matrix2cd::Identity() - I * sinc * H;
    }
    return B;
}

BlockUnitary BlockUnitary::operator*(const BlockUnitary& rhs) const {
    if (dim_ != rhs.dim_) throw std::invalid_argument("BlockUnitary: dimension mismatch");
    BlockUnitary out(dim_);
    out.g0_ = g0_ * rhs.g0_;
    out.etop_ = etop_ * rhs.etop_;
    for (std::size_t i = 0; i < pairs_.size(); ++i) out.pairs_[i] = pairs_[i] * rhs.pairs_[i];
    return out;
}

BlockUnitary BlockUnitary::adjoint() const {
    BlockUnitary out(dim_);
    out.g0_ = std::conj(g0_);
    out.etop_ = std::conj(etop_);
    for (std::size_t i = 0; i < pairs_.size(); ++i) out.pairs_[i] = pairs_[i].adjoint();
    return out;
}

JointOperator BlockUnitary::dense() const {
    const Eigen::Index d = dim_;
    JointOperator U = JointOperator::Zero(2 * d, 2 * d);
    U(0, 0) = g0_;
    U(2 * d - 1, 2 * d - 1) = etop_;
    for (Eigen::Index n = 0; n + 1 < d; ++n) {
        const Eigen::Index e = d + n, g = n + 1;
        const Eigen::Matrix2cd& M = pairs_[static_cast<std::size_t>(n)];
        U(e, e) = M(0, 0);
        U(e, g) = M(0, 1);
        U(g, e) = M(1, 0);
        U(g, g) = M(1, 1);
    }
    return U;
}

void BlockUnitary::conjugate_inplace(ComplexMatrix& rho) const {
    const Eigen::Index d = dim_;
    // rows: ρ ← U ρ
    rho.row(0) *= g0_;
    rho.row(2 * d - 1) *= etop_;
    for (Eigen::Index n = 0; n + 1 < d; ++n) {
        const Eigen::Index e = d + n, g = n + 1;
        const Eigen::Matrix2cd& M = pairs_[static_cast<std::size_t>(n)];
        for (Eigen::Index c = 0; c < 2 * d; ++c) {
            const cplx re = rho(e, c), rg = rho(g, c);
            rho(e, c) = M(0, 0) * re + M(0, 1) * rg;
            rho(g, c) = M(1, 0) * re + M(1, 1) * rg;
        }
    }
    // columns: ρ ← ρ U†
    rho.col(0) *= std::conj(g0_);
    rho.col(2 * d - 1) *= std::conj(etop_);
    for (Eigen::Index n = 0; n + 1 < d; ++n) {
        const Eigen::Index e = d + n, g = n + 1;
        const Eigen::Matrix2cd& M = pairs_[static_cast<std::size_t>(n)];
        const cplx m00 = std::conj(M(0, 0)), m01 = std::conj(M(0, 1));
        const cplx m10 = std::conj(M(1, 0)), m11 = std::conj(M(1, 1));
        for (Eigen::Index r = 0; r < 2 * d; ++r) {
            const cplx ce = rho(r, e), cg = rho(r, g);
            rho(r, e) = ce * m00 + cg * m01;
            rho(r, g) = ce * m10 + cg * m11;
        }
    }
}

// --------------------------- Numeric transit --------------------------------

namespace {

// Exact dressed steps with midpoint coupling over [t0, t1] at constant δ.
BlockUnitary dressed_span(const HilbertConfig& cfg, const TransitProfile& p, double t0, double t1, double delta,
                          const TransitOptions& opt) {
    const double rate = std::max(p.delta_disp, p.omega0 * std::sqrt(double(cfg.dim())));
    const double span = t1 - t0;
    const int steps = std::max(1, static_cast<int>(std::ceil(span * rate / opt.dressed_phase_per_step)));
    const double dt = span / steps;
    BlockUnitary U(cfg.dim());
    for (int k = 0; k < steps; ++k) {
        const double tm = t0 + (k + 0.5) * dt;
        U = BlockUnitary::jc_step(delta, opt.coupling_sign * rabi_coupling(tm, p), dt, cfg.dim()) * U;
    }
    return U;
}

}  // namespace

BlockUnitary transit_unitary(const HilbertConfig& cfg, const TransitProfile& profile, const TransitOptions& options) {
    profile.validate();
    BlockUnitary U(cfg.dim());
    for (const SegmentSpan& s : segments(profile)) U = dressed_span(cfg, profile, s.t0, s.t1, s.delta, options) * U;
    return U;
}

TransitPropagator::TransitPropagator(const HilbertConfig& cfg, const TransitProfile& profile,
                                     std::optional<CavityParams> cavity, Backend backend,
                                     const TransitOptions& options)
    : cfg_(cfg), profile_(profile), cavity_(cavity), backend_(backend), options_(options) {
    profile_.validate();
    if (backend_ == Backend::analytic) {
        if (cavity_) throw std::invalid_argument("analytic transit requires cavity loss disabled during the transit");
        const double phi0 = profile_.delta_disp > 0 ? std::abs(phi0_of(profile_, Segment::first)) : 0.0;
        unitary_ = BlockUnitary::from_dense(u_composite(theta_of(profile_), phi0, cfg_));
        return;
    }
    if (options_.integrator == Integrator::rk4) return;
    if (!cavity_) {
        unitary_ = transit_unitary(cfg_, profile_, options_);
        return;
    }

    // Strang splitting: R(τ1/2) U1 R((τ1+τ2)/2) U2 ... UK R(τK/2).
    auto relax_index = [&](double duration) {
        for (std::size_t i = 0; i < relax_.size(); ++i)
            if (std::abs(relax_[i].duration() - duration) <= 1e-15 * std::max(1.0, duration)) return i;
        relax_.emplace_back(cfg_, *cavity_, duration);
        return relax_.size() - 1;
    };
    const double max_chunk = profile_.t_i() / std::max(1, options_.loss_chunks);
    std::vector<std::pair<double, double>> spans;
    std::vector<double> deltas;
    for (const SegmentSpan& s : segments(profile_)) {
        const int n = std::max(1, static_cast<int>(std::ceil((s.t1 - s.t0) / max_chunk - 1e-9)));
        const double tau = (s.t1 - s.t0) / n;
        for (int k = 0; k < n; ++k) {
            spans.emplace_back(s.t0 + k * tau, k + 1 == n ? s.t1 : s.t0 + (k + 1) * tau);
            deltas.push_back(s.delta);
        }
    }
    relax_first_ = relax_index(0.5 * (spans.front().second - spans.front().first));
    for (std::size_t k = 0; k < spans.size(); ++k) {
        const double tau = spans[k].second - spans[k].first;
        const double next = k + 1 < spans.size() ? spans[k + 1].second - spans[k + 1].first : 0.0;
        chunks_.push_back(Chunk{dressed_span(cfg_, profile_, spans[k].first, spans[k].second, deltas[k], options_),
                                relax_index(0.5 * (tau + next))});
    }
}

ComplexMatrix TransitPropagator::apply(const ComplexMatrix& rho) const {
    if (rho.rows() != 2 * cfg_.dim()) throw std::invalid_argument("TransitPropagator: dimension mismatch");
    if (backend_ == Backend::numeric && options_.integrator == Integrator::rk4)
        return rk4_transit(rho, profile_, cavity_, options_);
    ComplexMatrix out = rho;
    if (unitary_) {
        unitary_->conjugate_inplace(out);
        return out;
    }
    const Eigen::Index d = cfg_.dim();
    auto relax_joint = [&](const ThermalRelaxation& R) {
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) R.apply_inplace(out.block(a * d, b * d, d, d));
    };
    relax_joint(relax_[relax_first_]);
    for (const Chunk& c : chunks_) {
        c.U.conjugate_inplace(out);
        relax_joint(relax_[c.relax_after]);
    }
    return out;
}

JointState TransitPropagator::apply(const JointState& rho) const { return JointState(apply(rho.matrix())); }

JointState transit_propagate(const JointState& rho, const TransitProfile& profile, std::optional<CavityParams> cavity,
                             Backend backend, const TransitOptions& options) {
    const HilbertConfig cfg(static_cast<int>(rho.field_dim() - 1));
    return TransitPropagator(cfg, profile, cavity, backend, options).apply(rho);
}

// --------------------------- RK4 reference ----------------------------------

namespace {

class Rk4Transit {
public:
    Rk4Transit(Eigen::Index d, const TransitProfile& p, std::optional<CavityParams> cavity, double sign)
        : d_(d), p_(p), cavity_(cavity), sign_(sign), C_(2 * d, 2 * d) {
        // C = (i/2)(|g⟩⟨e| a† - |e⟩⟨g| a); H = (δ/2)σ_z + Ω C
        std::vector<Eigen::Triplet<cplx>> trip;
        for (Eigen::Index n = 0; n + 1 < d; ++n) {
            const double c = 0.5 * std::sqrt(double(n + 1));
            trip.emplace_back(n + 1, d + n, cplx(0, c));
            trip.emplace_back(d + n, n + 1, cplx(0, -c));
        }
        C_.setFromTriplets(trip.begin(), trip.end());
    }

    ComplexMatrix rhs(const ComplexMatrix& rho, double t, double delta) const {
        const double omega = sign_ * rabi_coupling(t, p_);
        ComplexMatrix X = omega * (C_ * rho);
        X.topRows(d_) -= 0.5 * delta * rho.topRows(d_);
        X.bottomRows(d_) += 0.5 * delta * rho.bottomRows(d_);
        // ρ Hermitian ⇒ ρH = (Hρ)†
        ComplexMatrix out = cplx(0, -1) * (X - X.adjoint());
        if (cavity_) {
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    out.block(a * d_, b * d_, d_, d_) +=
                        thermal_dissipator(rho.block(a * d_, b * d_, d_, d_), *cavity_);
        }
        return out;
    }

    ComplexMatrix run(const ComplexMatrix& rho0, double phase_per_step) const {
        ComplexMatrix rho = rho0;
        const double rate = std::max(p_.delta_disp, p_.omega0);
        for (const SegmentSpan& s : segments(p_)) {
            const int n = std::max(1, static_cast<int>(std::ceil((s.t1 - s.t0) * rate / phase_per_step)));
            const double h = (s.t1 - s.t0) / n;
            for (int k = 0; k < n; ++k) {
                const double t = s.t0 + k * h;
                const ComplexMatrix k1 = rhs(rho, t, s.delta);
                const ComplexMatrix k2 = rhs(rho + 0.5 * h * k1, t + 0.5 * h, s.delta);
                const ComplexMatrix k3 = rhs(rho + 0.5 * h * k2, t + 0.5 * h, s.delta);
                const ComplexMatrix k4 = rhs(rho + h * k3, t + h, s.delta);
                rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
        }
        return rho;
    }

private:
    Eigen::Index d_;
    TransitProfile p_;
    std::optional<CavityParams> cavity_;
    double sign_;
    Eigen::SparseMatrix<cplx> C_;
};

}  // namespace

ComplexMatrix rk4_transit(const ComplexMatrix& rho, const TransitProfile& profile, std::optional<CavityParams> cavity,
                          const TransitOptions& options) {
    profile.validate();
    const Rk4Transit rk(rho.rows() / 2, profile, cavity, options.coupling_sign);
    double step = options.rk4_phase_per_step;
    ComplexMatrix coarse = rk.run(rho, step);
    for (int h = 0; h <= options.rk4_max_halvings; ++h) {
        step *= 0.5;
        ComplexMatrix fine = rk.run(rho, step);
        const double dn = std::abs(field_nbar(fine) - field_nbar(coarse));
        const double dp = std::abs(joint_purity(fine) - joint_purity(coarse));
        if (dn <= options.rk4_convergence_tol && dp <= options.rk4_convergence_tol) return fine;
        coarse = std::move(fine);
    }
    throw ConvergenceError("rk4_transit: step halving did not converge");
}

}  // namespace catres
