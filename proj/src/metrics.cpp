#include <catres/metrics.hpp>
#include <catres/nelder_mead.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace catres {

namespace {

constexpr double kPi = std::numbers::pi;

// Tr(ρ a^p) with the truncated ladder.
cplx moment_a(const ComplexMatrix& rho, int p) {
    const Eigen::Index d = rho.rows();
    cplx s = 0;
    for (Eigen::Index n = p; n < d; ++n) {
        double c = 1;
        for (int j = 0; j < p; ++j) c *= std::sqrt(double(n - j));
        s += c * rho(n, n - p);
    }
    return s;
}

}  // namespace

double mean_photon(const FieldState& rho) {
    const ComplexMatrix& r = rho.matrix();
    double s = 0;
    for (Eigen::Index n = 0; n < r.rows(); ++n) s += double(n) * r(n, n).real();
    return s;
}

double purity(const FieldState& rho) { return rho.matrix().cwiseAbs2().sum(); }

cplx expect_a(const FieldState& rho) { return moment_a(rho.matrix(), 1); }

double overlap_fidelity(const FieldState& rho, const PureFieldState& reference) {
    const ComplexVector& v = reference.amplitudes();
    if (v.size() != rho.dim()) throw std::invalid_argument("overlap_fidelity: dimension mismatch");
    return std::real(v.dot(rho.matrix() * v));
}

double top_population(const FieldState& rho, const HilbertConfig& cfg) {
    double s = 0;
    for (Eigen::Index n = cfg.guard_level(); n < rho.dim(); ++n) s += rho.matrix()(n, n).real();
    return s;
}

// --------------------------- Wigner -----------------------------------------

std::vector<double> GridSpec::points() const {
    if (!(step > 0) || !(max >= min)) throw std::invalid_argument("GridSpec: need step > 0 and max >= min");
    const auto n = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = min + double(i) * step;
    return out;
}

GridSpec GridSpec::parse(const std::string& text) {
    GridSpec g;
    std::istringstream is(text);
    char c1 = 0, c2 = 0;
    if (!(is >> g.min >> c1 >> g.max >> c2 >> g.step) || c1 != ':' || c2 != ':')
        throw std::invalid_argument("grid must be XMIN:XMAX:STEP, got '" + text + "'");
    g.points();
    return g;
}

double WignerGrid::integral() const {
    if (xs.size() < 2 || ys.size() < 2) return 0.0;
    const double dx = xs[1] - xs[0], dy = ys[1] - ys[0];
    return values.sum() * dx * dy;
}

ComplexMatrix displacement_elements(cplx beta, Eigen::Index dim) {
    ComplexMatrix E(dim, dim);
    const cplx mbc = -std::conj(beta);
    // E(0, m) = e^{-|β|²/2} (-β*)^m / sqrt(m!)
    E(0, 0) = std::exp(-0.5 * std::norm(beta));
    for (Eigen::Index m = 1; m < dim; ++m) E(0, m) = E(0, m - 1) * mbc / std::sqrt(double(m));
    // a D = D (a + β):  E(n+1, m) = (sqrt(m) E(n, m-1) + β E(n, m)) / sqrt(n+1)
    for (Eigen::Index n = 0; n + 1 < dim; ++n) {
        const double inv = 1.0 / std::sqrt(double(n + 1));
        E(n + 1, 0) = beta * E(n, 0) * inv;
        for (Eigen::Index m = 1; m < dim; ++m)
            E(n + 1, m) = (std::sqrt(double(m)) * E(n, m - 1) + beta * E(n, m)) * inv;
    }
    return E;
}

namespace {

// W(ξ) = (2/π) Σ_{m,n} ρ(m,n) (-1)^m ⟨n|D(2ξ)|m⟩
double wigner_from_weights(const ComplexMatrix& weighted, cplx xi) {
    const ComplexMatrix E = displacement_elements(2.0 * xi, weighted.rows());
    // Σ_{m,n} weighted(m,n) E(n,m) = Σ (weighted ∘ Eᵀ)
    const cplx s = (weighted.cwiseProduct(E.transpose())).sum();
    return 2.0 / kPi * s.real();
}

ComplexMatrix parity_weighted(const FieldState& rho) {
    ComplexMatrix w = rho.matrix();
    for (Eigen::Index m = 1; m < w.rows(); m += 2) w.row(m) *= -1.0;
    return w;
}

}  // namespace

double wigner_at(const FieldState& rho, cplx xi) { return wigner_from_weights(parity_weighted(rho), xi); }

double wigner_trust_radius(const FieldState& rho) { return std::sqrt(double(rho.dim() - 1)); }

WignerGrid wigner(const FieldState& rho, const GridSpec& x, const GridSpec& y) {
    WignerGrid g;
    g.xs = x.points();
    g.ys = y.points();
    g.values.resize(static_cast<Eigen::Index>(g.ys.size()), static_cast<Eigen::Index>(g.xs.size()));
    const ComplexMatrix w = parity_weighted(rho);
    for (std::size_t i = 0; i < g.ys.size(); ++i)
        for (std::size_t j = 0; j < g.xs.size(); ++j)
            g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                wigner_from_weights(w, cplx(g.xs[j], g.ys[i]));
    return g;
}

WignerGrid wigner(const FieldState& rho, const GridSpec& grid) { return wigner(rho, grid, grid); }

void write_wigner(std::ostream& os, const WignerGrid& grid) {
    os << std::setprecision(9);
    auto header = [&](const char* name, const std::vector<double>& v) {
        os << "# " << name << ":";
        for (double x : v) os << ' ' << x;
        os << '\n';
    };
    header("xs", grid.xs);
    header("ys", grid.ys);
    for (Eigen::Index i = 0; i < grid.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < grid.values.cols(); ++j) {
            if (j) os << ' ';
            os << grid.values(i, j);
        }
        os << '\n';
    }
}

// --------------------------- Cat fitting ------------------------------------

namespace {

struct CatObjective {
    const FieldState& rho;
    int k;
    HilbertConfig cfg;

    cplx alpha(const Eigen::VectorXd& x) const { return {x(0), x(1)}; }
    std::vector<double> phases(const Eigen::VectorXd& x) const {
        return std::vector<double>(x.data() + 2, x.data() + x.size());
    }
    // Fidelity, or 0 where the reference is not representable.
    double fidelity(const Eigen::VectorXd& x) const {
        try {
            return overlap_fidelity(rho, ideal_mfss<double>(alpha(x), k, phases(x), cfg));
        } catch (const TruncationError&) {
            return 0.0;
        } catch (const std::invalid_argument&) {
            return 0.0;
        }
    }
    Eigen::VectorXd pack(const CatFitResult& r) const {
        Eigen::VectorXd x(k + 1);
        x(0) = r.alpha.real();
        x(1) = r.alpha.imag();
        for (int j = 0; j + 1 < k; ++j) x(2 + j) = j < static_cast<int>(r.rel_phases.size()) ? r.rel_phases[j] : 0.0;
        return x;
    }
};

double wrap_angle(double a) {
    a = std::fmod(a, 2 * kPi);
    return a < 0 ? a + 2 * kPi : a;
}

}  // namespace

CatFitResult kerr_guess(const FieldState& rho, int k) {
    CatFitResult g;
    const double nb = mean_photon(rho);
    const cplx ak = moment_a(rho.matrix(), k);
    const double arg = std::abs(ak) > 1e-12 ? std::arg(ak) / k : 0.0;
    g.alpha = std::polar(std::sqrt(std::max(nb, 0.0)), arg);
    g.rel_phases.assign(static_cast<std::size_t>(std::max(k - 1, 0)), 0.0);
    return g;
}

CatFitResult fit_cat(const FieldState& rho, int k, const CatFitResult& init, const CatFitOptions& options) {
    if (k < 2) throw std::invalid_argument("fit_cat: k must be >= 2");
    const CatObjective obj{rho, k, HilbertConfig(static_cast<int>(rho.dim() - 1))};
    auto neg = [&](const Eigen::VectorXd& x) { return -obj.fidelity(x); };

    Eigen::VectorXd step(k + 1);
    step(0) = step(1) = 0.2;
    for (int j = 2; j <= k; ++j) step(j) = 0.5;
    NelderMeadOptions nm;
    nm.f_tol = 1e-13;
    nm.x_tol = 1e-8;
    nm.max_evaluations = 4000;

    const Eigen::VectorXd x_init = obj.pack(init);
    Eigen::VectorXd best_x = x_init;
    double best_f = obj.fidelity(x_init);
    bool converged = false;

    auto polish = [&](const Eigen::VectorXd& start) {
        const NelderMeadResult r = nelder_mead(neg, start, step, nm);
        if (-r.value > best_f) {
            best_f = -r.value;
            best_x = r.x;
            converged = r.converged;
        }
    };
    polish(x_init);

    std::string note;
    if (!(converged && best_f >= options.accept_without_grid)) {
        // Coarse grid over |α|, arg α ∈ [0, 2π/k) and the relative phases.
        const double r0 = std::sqrt(std::max(mean_photon(rho), 0.05));
        int per_phase = options.grid_phases;
        while (k > 2 && std::pow(double(per_phase), k - 1) > 4096 && per_phase > 2) --per_phase;
        const int n_phase_pts = static_cast<int>(std::pow(double(per_phase), k - 1));
        double grid_f = -1;
        Eigen::VectorXd grid_x = x_init;
        Eigen::VectorXd x(k + 1);
        for (int ia = 0; ia < options.grid_amplitudes; ++ia) {
            const double r = r0 * (0.6 + 0.8 * ia / std::max(1, options.grid_amplitudes - 1));
            for (int ib = 0; ib < options.grid_angles; ++ib) {
                const double ang = 2 * kPi / k * ib / options.grid_angles;
                x(0) = r * std::cos(ang);
                x(1) = r * std::sin(ang);
                for (int ip = 0; ip < n_phase_pts; ++ip) {
                    int rem = ip;
                    for (int j = 0; j + 1 < k; ++j) {
                        x(2 + j) = 2 * kPi * (rem % per_phase) / per_phase;
                        rem /= per_phase;
                    }
                    const double f = obj.fidelity(x);
                    if (f > grid_f) {
                        grid_f = f;
                        grid_x = x;
                    }
                }
            }
        }
        polish(grid_x);
        note = "coarse grid used";
    }

    CatFitResult out;
    out.alpha = obj.alpha(best_x);
    out.rel_phases = obj.phases(best_x);
    for (double& p : out.rel_phases) p = wrap_angle(p);
    out.reference = ideal_mfss<double>(out.alpha, k, out.rel_phases, obj.cfg);
    out.fidelity = overlap_fidelity(rho, out.reference);
    out.converged = converged;
    out.note = converged ? note : (note.empty() ? "simplex did not converge" : note + "; simplex did not converge");
    return out;
}

CatFitResult fit_cat(const FieldState& rho, int k) { return fit_cat(rho, k, kerr_guess(rho, k)); }

// --------------------------- Squeezing --------------------------------------

double quadrature_variance(const FieldState& rho, double theta) {
    const ComplexMatrix& r = rho.matrix();
    const cplx a1 = moment_a(r, 1), a2 = moment_a(r, 2);
    const double n = mean_photon(rho);
    const cplx e = std::polar(1.0, -theta);
    const double x = (a1 * e).real();
    // ⟨X²⟩ = (⟨a²⟩e^{-2iθ} + c.c. + 2⟨a†a⟩ + 1) / 4
    const double x2 = 0.25 * (2.0 * (a2 * e * e).real() + 2.0 * n + 1.0);
    return x2 - x * x;
}

Squeezing squeezing_db(const FieldState& rho) {
    const ComplexMatrix& r = rho.matrix();
    const cplx a1 = moment_a(r, 1), a2 = moment_a(r, 2);
    const cplx M = a2 - a1 * a1;
    const double Nc = mean_photon(rho) - std::norm(a1);
    Squeezing s;
    s.min_variance = 0.25 * (1.0 + 2.0 * Nc - 2.0 * std::abs(M));
    double th = 0.5 * (std::arg(M) + kPi);
    th = std::fmod(th, kPi);
    if (th < 0) th += kPi;
    s.theta_min = th;
    s.db = 10.0 * std::log10(0.25 / s.min_variance);
    return s;
}

// --------------------------- Records ----------------------------------------

MetricsRecord make_record(std::size_t index, double time, const FieldState& rho, const PureFieldState* reference) {
    MetricsRecord m;
    m.sample_index = index;
    m.time = time;
    m.n_bar = mean_photon(rho);
    m.purity = purity(rho);
    m.fidelity = reference ? overlap_fidelity(rho, *reference) : std::numeric_limits<double>::quiet_NaN();
    m.trace_error = std::abs(rho.matrix().trace() - cplx(1.0));
    return m;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRecord>& records) {
    os << "sample,time_s,nbar,purity,fidelity,trace_err\n";
    os << std::setprecision(10);
    for (const MetricsRecord& m : records)
        os << m.sample_index << ',' << m.time << ',' << m.n_bar << ',' << m.purity << ',' << m.fidelity << ','
           << m.trace_error << '\n';
}

}  // namespace catres
