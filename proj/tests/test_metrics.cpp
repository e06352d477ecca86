#include "support.hpp"

#include <catres/metrics.hpp>
#include <catres/relaxation.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <doctest.h>

#include <sstream>

using namespace catres;
using catres::testing::max_abs;

namespace {

constexpr double kPi = std::numbers::pi;

// Eigenfunctions of X = (a + a†)/2 (vacuum variance 1/4) from the Hermite recurrence.
std::vector<double> quadrature_functions(double x, Eigen::Index dim) {
    const double u = std::sqrt(2.0) * x;
    std::vector<double> h(static_cast<std::size_t>(dim));
    h[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * u * u);
    if (dim > 1) h[1] = std::sqrt(2.0) * u * h[0];
    for (std::size_t n = 1; n + 1 < h.size(); ++n)
        h[n + 1] = std::sqrt(2.0 / double(n + 1)) * u * h[n] - std::sqrt(double(n) / double(n + 1)) * h[n - 1];
    for (double& v : h) v *= std::pow(2.0, 0.25);
    return h;
}

double quadrature_density(const FieldState& rho, double x) {
    const auto h = quadrature_functions(x, rho.dim());
    double s = 0;
    for (Eigen::Index m = 0; m < rho.dim(); ++m)
        for (Eigen::Index n = 0; n < rho.dim(); ++n)
            s += rho.matrix()(m, n).real() * h[static_cast<std::size_t>(m)] * h[static_cast<std::size_t>(n)];
    return s;
}

}  // namespace

TEST_CASE("photon number and purity") {
    const HilbertConfig cfg(30);
    const FieldState vac = FieldState::vacuum(cfg);
    CHECK(mean_photon(vac) == 0.0);
    CHECK(purity(vac) == 1.0);
    const FieldState mixed(ComplexMatrix::Identity(cfg.dim(), cfg.dim()) / double(cfg.dim()));
    CHECK(purity(mixed) == doctest::Approx(1.0 / 31));
    const FieldState coh(coherent_state(cplx(2, 0), cfg));
    CHECK(mean_photon(coh) == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(purity(coh) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("overlap fidelity") {
    const HilbertConfig cfg(10);
    const PureFieldState ref = coherent_state(cplx(0.7, 0.2), cfg);
    CHECK(overlap_fidelity(FieldState(ref), ref) == doctest::Approx(1.0).epsilon(1e-12));
    ComplexVector one = ComplexVector::Zero(cfg.dim());
    one(1) = 1;
    CHECK(overlap_fidelity(FieldState::vacuum(cfg), PureFieldState(one)) == 0.0);

    // Mixture with an orthogonal state.
    ComplexVector orth = ComplexVector::Zero(cfg.dim());
    orth(0) = -std::conj(ref.amplitudes()(1));
    orth(1) = std::conj(ref.amplitudes()(0));
    orth -= ref.amplitudes() * ref.amplitudes().dot(orth);
    orth /= orth.norm();
    const FieldState half(0.5 * (ref.projector() + orth * orth.adjoint()));
    CHECK(overlap_fidelity(half, ref) == doctest::Approx(0.5).epsilon(1e-12));

    std::mt19937_64 rng(9);
    const FieldState rho(catres::testing::random_density(cfg.dim(), rng));
    const double f = overlap_fidelity(rho, ref);
    for (double ph : {0.3, 2.0, -1.1})
        CHECK(overlap_fidelity(rho, PureFieldState(ref.amplitudes() * std::polar(1.0, ph))) ==
              doctest::Approx(f).epsilon(1e-13));
}

TEST_CASE("wigner closed forms") {
    const HilbertConfig cfg(20);
    const FieldState vac = FieldState::vacuum(cfg);
    CHECK(wigner_at(vac, 0.0) == doctest::Approx(2 / kPi).epsilon(1e-13));
    for (const cplx xi : {cplx(0.5, 0.0), cplx(-0.3, 1.1), cplx(1.5, -1.5)})
        CHECK(wigner_at(vac, xi) == doctest::Approx(2 / kPi * std::exp(-2 * std::norm(xi))).epsilon(1e-12));
    CHECK(wigner_at(FieldState::fock(cfg, 1), 0.0) == doctest::Approx(-2 / kPi).epsilon(1e-13));

    // Coherent state: vacuum shape displaced to α.
    const cplx alpha(1.0, -0.5);
    const FieldState coh(coherent_state(alpha, cfg));
    const cplx xi(0.6, 0.1);
    CHECK(wigner_at(coh, xi) == doctest::Approx(2 / kPi * std::exp(-2 * std::norm(xi - alpha))).epsilon(1e-9));

    const WignerGrid g = wigner(coh, GridSpec{-4, 4, 0.05});
    CHECK(g.integral() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(g.values.rows() == 161);
}

TEST_CASE("wigner is linear in the state") {
    const HilbertConfig cfg(15);
    std::mt19937_64 rng(4);
    const ComplexMatrix a = catres::testing::random_density(cfg.dim(), rng, 0.2);
    const ComplexMatrix b = catres::testing::random_density(cfg.dim(), rng, 0.2);
    const double w = 0.35;
    const GridSpec grid{-2, 2, 0.25};
    const WignerGrid ga = wigner(FieldState(a), grid), gb = wigner(FieldState(b), grid);
    const WignerGrid gm = wigner(FieldState(w * a + (1 - w) * b), grid);
    CHECK((gm.values - (w * ga.values + (1 - w) * gb.values)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("wigner marginal reproduces the quadrature distribution") {
    const HilbertConfig cfg(40);
    std::mt19937_64 rng(8);
    std::vector<FieldState> states;
    states.emplace_back(ideal_mfss(cplx(2.0, 0.5), 2, std::vector<double>{0.4}, cfg));
    states.emplace_back(catres::testing::random_density(cfg.dim(), rng, 0.35));
    states.emplace_back(FieldState::fock(cfg, 3));
    for (const FieldState& rho : states) {
        CHECK(mean_photon(rho) <= 10.0);
        const GridSpec ys{-7, 7, 0.02};
        const WignerGrid g = wigner(rho, GridSpec{-2.5, 2.5, 0.5}, ys);
        double worst = 0;
        for (std::size_t j = 0; j < g.xs.size(); ++j) {
            const double marginal = g.values.col(static_cast<Eigen::Index>(j)).sum() * ys.step;
            worst = std::max(worst, std::abs(marginal - quadrature_density(rho, g.xs[j])));
        }
        CHECK(worst < 1e-3);
    }
}

TEST_CASE("wigner file format") {
    const WignerGrid g = wigner(FieldState::vacuum(HilbertConfig(3)), GridSpec{-1, 1, 1});
    std::ostringstream os;
    write_wigner(os, g);
    const std::string s = os.str();
    CHECK(s.rfind("# xs: -1 0 1\n# ys: -1 0 1\n", 0) == 0);
    CHECK_THROWS_AS(GridSpec::parse("1:2"), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec::parse("1:0:0.1"), std::invalid_argument);
}

TEST_CASE("cat fit recovers ideal superpositions") {
    const HilbertConfig cfg(59);
    const PureFieldState target = ideal_mfss(cplx(2.0, 0.0), 2, std::vector<double>{kPi / 2}, cfg);
    const CatFitResult fit = fit_cat(FieldState(target), 2);
    CHECK(fit.fidelity == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(std::abs(fit.alpha) - 2.0) < 1e-3);

    // Kerr φ0 = π/3 makes a three-component state.
    const PureFieldState k3 = catres::apply(kerr_propagator(KerrParams{kPi / 3}, cfg), coherent_state(cplx(1.65, 0), cfg));
    const CatFitResult fit3 = fit_cat(FieldState(k3), 3);
    CHECK(fit3.fidelity >= 1 - 1e-4);
    CHECK(std::abs(std::abs(fit3.alpha) - 1.65) < 1e-3);
}

TEST_CASE("cat fit never ends below its starting point") {
    const HilbertConfig cfg(30);
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 3; ++trial) {
        const FieldState rho(catres::testing::random_density(cfg.dim(), rng, 0.4));
        CatFitResult init = kerr_guess(rho, 2);
        init.alpha = cplx(1.0 + 0.3 * trial, 0.2);
        init.rel_phases = {0.5};
        init.reference = ideal_mfss(init.alpha, 2, init.rel_phases, cfg);
        init.fidelity = overlap_fidelity(rho, init.reference);
        const CatFitResult fit = fit_cat(rho, 2, init);
        CHECK(fit.fidelity >= init.fidelity);
        CHECK(overlap_fidelity(rho, fit.reference) == doctest::Approx(fit.fidelity).epsilon(1e-12));
    }
}

TEST_CASE("squeezing") {
    const HilbertConfig cfg(40);
    const Squeezing coh = squeezing_db(FieldState(coherent_state(cplx(1.2, -0.4), cfg)));
    CHECK(std::abs(coh.db) < 1e-6);

    const double nt = 0.05;
    const Squeezing th = squeezing_db(thermal_state(cfg, nt));
    CHECK(th.db < 0);
    CHECK(th.min_variance == doctest::Approx((1 + 2 * nt) / 4).epsilon(1e-9));

    // Squeezed vacuum S(r)|0⟩: min variance e^{-2r}/4 along θ = 0.
    const auto L = make_ladder(cfg);
    const double r = 0.4;
    const ComplexMatrix S = (0.5 * r * (L.a * L.a - L.a_dagger * L.a_dagger)).exp();
    const ComplexVector psi = S.col(0);
    const Squeezing sq = squeezing_db(FieldState(PureFieldState(psi / psi.norm())));
    CHECK(sq.min_variance == doctest::Approx(std::exp(-2 * r) / 4).epsilon(1e-6));
    CHECK(sq.db == doctest::Approx(20 * r / std::log(10.0)).epsilon(1e-5));
    CHECK(std::min(sq.theta_min, kPi - sq.theta_min) < 1e-6);

    // Closed form against a scan over θ.
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 4; ++trial) {
        const FieldState rho(catres::testing::random_density(cfg.dim(), rng, 0.5));
        const Squeezing s = squeezing_db(rho);
        double best = 1e300;
        for (int i = 0; i < 3142; ++i) best = std::min(best, quadrature_variance(rho, i * 1e-3));
        CHECK(std::abs(10 * std::log10(0.25 / best) - s.db) < 1e-6);
        CHECK(quadrature_variance(rho, s.theta_min) == doctest::Approx(s.min_variance).epsilon(1e-12));
    }
}

TEST_CASE("metrics records and csv") {
    const HilbertConfig cfg(5);
    const MetricsRecord r = make_record(3, 0.25, FieldState::vacuum(cfg), nullptr);
    CHECK(std::isnan(r.fidelity));
    CHECK(r.trace_error == 0.0);
    std::ostringstream os;
    write_metrics_csv(os, {r});
    CHECK(os.str().rfind("sample,time_s,nbar,purity,fidelity,trace_err\n3,", 0) == 0);
}
