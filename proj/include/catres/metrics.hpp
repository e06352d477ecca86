// metrics.hpp: observables of a cavity field state: photon number,
// purity, overlap fidelity, Wigner function, cat fitting, squeezing.

#pragma once

#include <catres/fock.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace catres {

double mean_photon(const FieldState& rho);
double purity(const FieldState& rho);
cplx expect_a(const FieldState& rho);

// ⟨ref|ρ|ref⟩ (overlap with a pure reference, not the Uhlmann fidelity).
double overlap_fidelity(const FieldState& rho, const PureFieldState& reference);

// Population on the levels counted by the truncation guard.
double top_population(const FieldState& rho, const HilbertConfig& cfg);

// --------------------------- Wigner function --------------------------------

struct GridSpec {
    double min = -3.5, max = 3.5, step = 0.07;
    std::vector<double> points() const;
    static GridSpec parse(const std::string& text);  // "XMIN:XMAX:STEP"
};

// values(i, j) = W(xs[j] + i ys[i]).
struct WignerGrid {
    std::vector<double> xs, ys;
    Eigen::MatrixXd values;

    // Riemann sum of W over the grid cells.
    double integral() const;
};

// ⟨n|D(β)|m⟩ for n, m < dim, exact for the infinite-dimensional operator.
ComplexMatrix displacement_elements(cplx beta, Eigen::Index dim);

// W(ξ) = (2/π) Tr[D(-ξ) ρ D(ξ) Π], normalized to unit area.
double wigner_at(const FieldState& rho, cplx xi);
WignerGrid wigner(const FieldState& rho, const GridSpec& x, const GridSpec& y);
WignerGrid wigner(const FieldState& rho, const GridSpec& grid);

// Radius beyond which the truncated state's W should not be trusted.
double wigner_trust_radius(const FieldState& rho);

void write_wigner(std::ostream& os, const WignerGrid& grid);

// --------------------------- Cat fitting ------------------------------------

struct CatFitResult {
    cplx alpha{0.0, 0.0};
    std::vector<double> rel_phases;
    double fidelity = 0.0;
    PureFieldState reference{ComplexVector::Unit(2, 0)};
    bool converged = true;
    std::string note;
};

struct CatFitOptions {
    int grid_amplitudes = 16;
    int grid_angles = 16;
    int grid_phases = 8;
    // Skip the coarse grid when the simplex from `init` already reaches this.
    double accept_without_grid = 1.0 - 1e-6;
};

// Kerr-motivated starting point: |α| = sqrt(n̄), arg α from ⟨a^k⟩, zero phases.
CatFitResult kerr_guess(const FieldState& rho, int k);

CatFitResult fit_cat(const FieldState& rho, int k, const CatFitResult& init, const CatFitOptions& options = {});
CatFitResult fit_cat(const FieldState& rho, int k);

// --------------------------- Squeezing --------------------------------------

struct Squeezing {
    double db = 0.0;         // 10 log10((1/4) / min Var X_θ)
    double theta_min = 0.0;  // minimizing quadrature angle in [0, π)
    double min_variance = 0.25;
};

// X_θ = (a e^{-iθ} + a† e^{iθ}) / 2, vacuum variance 1/4.
double quadrature_variance(const FieldState& rho, double theta);
Squeezing squeezing_db(const FieldState& rho);

// --------------------------- Trajectory records -----------------------------

struct MetricsRecord {
    std::size_t sample_index = 0;
    double time = 0.0;
    double n_bar = 0.0;
    double purity = 1.0;
    double fidelity = 0.0;  // NaN when no reference was supplied
    double trace_error = 0.0;
};

MetricsRecord make_record(std::size_t index, double time, const FieldState& rho, const PureFieldState* reference);

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRecord>& records);

}  // namespace catres
