#include "support.hpp"

#include <catres/fock.hpp>

#include <doctest.h>

using namespace catres;
using catres::testing::max_abs;

TEST_CASE("ladder operators") {
    const auto L2 = make_ladder(HilbertConfig(1));
    ComplexMatrix a(2, 2);
    a << 0, 1, 0, 0;
    CHECK(max_abs(L2.a - a) == 0.0);
    CHECK(max_abs(L2.N - ComplexMatrix(Eigen::Vector2cd(0, 1).asDiagonal())) == 0.0);

    const auto L = make_ladder(HilbertConfig(60));
    CHECK(L.N(4, 4).real() == 4.0);
    CHECK(L.a.rows() == 61);

    // [a†, a] = -1 except in the last row/column.
    const ComplexMatrix c = L.a_dagger * L.a - L.a * L.a_dagger;
    CHECK(max_abs(c.topLeftCorner(60, 60) + ComplexMatrix::Identity(60, 60)) < 1e-12);
    CHECK(std::abs(c(60, 60) - cplx(60.0)) < 1e-12);
}

TEST_CASE("a f(N) = f(N+1) a for random polynomials") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    const HilbertConfig cfg(30);
    const auto L = make_ladder(cfg);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<cplx> coef(4);
        for (auto& c : coef) c = cplx(g(rng), g(rng));
        auto f = [&](double n) {
            cplx s = 0, p = 1;
            for (const auto& c : coef) {
                s += c * p;
                p *= n;
            }
            return s;
        };
        ComplexVector fN(cfg.dim()), fN1(cfg.dim());
        for (Eigen::Index n = 0; n < cfg.dim(); ++n) {
            fN(n) = f(double(n));
            fN1(n) = f(double(n + 1));
        }
        const ComplexMatrix lhs = L.a * fN.asDiagonal();
        const ComplexMatrix rhs = fN1.asDiagonal() * L.a;
        CHECK(max_abs(lhs - rhs) <= 1e-12 * std::max(1.0, max_abs(lhs)));
    }
}

TEST_CASE("coherent states") {
    const HilbertConfig cfg(59);
    const auto vac = coherent_state(cplx(0, 0), cfg);
    CHECK(vac.amplitudes()(0) == cplx(1, 0));
    CHECK(vac.amplitudes().tail(cfg.dim() - 1).norm() == 0.0);

    const auto psi = coherent_state(cplx(2, 0), cfg);
    const auto L = make_ladder(cfg);
    const cplx nbar = psi.amplitudes().dot(L.N * psi.amplitudes());
    CHECK(std::abs(nbar - 4.0) < 1e-6);

    // Poisson law from the closed form e^{-4} 4^n / n!.
    double fact = 1;
    for (int n = 0; n < 30; ++n) {
        if (n > 0) fact *= n;
        const double poisson = std::exp(-4.0) * std::pow(4.0, n) / fact;
        CHECK(std::abs(std::norm(psi.amplitudes()(n)) - poisson) < 1e-8);
    }

    const cplx alpha(1.3, -0.7);
    const auto phi = coherent_state(alpha, cfg);
    const cplx ea = phi.amplitudes().dot(L.a * phi.amplitudes());
    CHECK(std::abs(ea - alpha) < 1e-6);
    // Global phase convention.
    CHECK(phi.amplitudes()(0).imag() == 0.0);
    CHECK(phi.amplitudes()(0).real() > 0.0);
}

TEST_CASE("coherent state beyond the cutoff is refused") {
    CHECK_THROWS_AS(coherent_state(cplx(6, 0), HilbertConfig(40)), TruncationError);
    CHECK_THROWS_AS(coherent_state(cplx(3, 0), HilbertConfig(12)), TruncationError);
}

TEST_CASE("kerr propagator") {
    const HilbertConfig cfg(40);
    const ComplexMatrix I = ComplexMatrix::Identity(cfg.dim(), cfg.dim());
    CHECK(max_abs(kerr_propagator(KerrParams{0.0}, cfg) - I) == 0.0);
    CHECK(max_abs(kerr_propagator(KerrParams{std::numbers::pi}, cfg) - I) < 1e-12);
    const ComplexMatrix U = kerr_propagator(KerrParams{0.37}, cfg);
    CHECK(max_abs(U.adjoint() * U - I) < 1e-12);

    // φ0 = π/2 turns |α⟩ into (|-iα⟩ + i|iα⟩)/√2.
    for (const cplx alpha : {cplx(2.0, 0.0), cplx(1.65, 0.0), cplx(0.8, 1.1)}) {
        const auto psi = catres::apply(kerr_propagator(KerrParams{std::numbers::pi / 2}, cfg), coherent_state(alpha, cfg));
        const ComplexVector target = (coherent_amplitudes(cplx(0, -1) * alpha, cfg.dim()) +
                                      cplx(0, 1) * coherent_amplitudes(cplx(0, 1) * alpha, cfg.dim())) /
                                     std::sqrt(2.0);
        CHECK(std::abs(target.dot(psi.amplitudes())) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("multi-component superpositions") {
    const HilbertConfig cfg(59);
    const cplx alpha(1.2, 0.4);
    const std::vector<double> none;
    const auto one = ideal_mfss(alpha, 1, none, cfg);
    CHECK((one.amplitudes() - coherent_state(alpha, cfg).amplitudes()).norm() < 1e-12);

    // Rotated 2-cat equals the Kerr π/2 image.
    const double a = 1.65;
    const auto cat = ideal_mfss(cplx(0, -a), 2, std::vector<double>{std::numbers::pi / 2}, cfg);
    const auto kerr = catres::apply(kerr_propagator(KerrParams{std::numbers::pi / 2}, cfg), coherent_state(cplx(a, 0), cfg));
    CHECK(std::abs(cat.amplitudes().dot(kerr.amplitudes())) == doctest::Approx(1.0).epsilon(1e-10));

    // α = 5: overlap e^{-50} leaves the even cat at normalization 1/√2.
    const auto big = ideal_mfss(cplx(5, 0), 2, std::vector<double>{0.0}, cfg);
    const ComplexVector raw = coherent_amplitudes(cplx(5, 0), cfg.dim()) + coherent_amplitudes(cplx(-5, 0), cfg.dim());
    CHECK((big.amplitudes() - raw / std::sqrt(2.0)).norm() < 1e-7);

    // Odd 2-cat with α → 0 keeps its norm through the Gram normalization.
    const auto odd = ideal_mfss(cplx(0.3, 0), 2, std::vector<double>{std::numbers::pi}, cfg);
    CHECK(std::norm(odd.amplitudes()(1)) > 0.99);

    CHECK_THROWS(ideal_mfss(alpha, 3, std::vector<double>{0.0}, cfg));
}

TEST_CASE("density matrix invariants") {
    const HilbertConfig cfg(5);
    ComplexMatrix r = ComplexMatrix::Zero(6, 6);
    r(0, 0) = 0.5;
    CHECK_THROWS_AS(FieldState{r}, InvariantError);
    r(1, 1) = 0.5;
    CHECK_NOTHROW(FieldState{r});
    r(0, 1) = 0.1;
    CHECK_THROWS_AS(FieldState{r}, InvariantError);
    r(1, 0) = 0.1;
    CHECK_NOTHROW(FieldState{r});
    r(0, 1) = r(1, 0) = 0.9;
    CHECK_THROWS_AS(FieldState{r}, InvariantError);
    CHECK_THROWS_AS(PureFieldState(ComplexVector::Ones(3)), InvariantError);
    CHECK(FieldState::vacuum(cfg).matrix()(0, 0) == cplx(1, 0));
}
