#include "support.hpp"

#include <catres/reservoir.hpp>

#include <doctest.h>

using namespace catres;
using catres::testing::max_abs;

namespace {

constexpr double kPi = std::numbers::pi;

ReservoirConfig cat2_config() {
    ReservoirConfig c;
    c.profile.v = 70;
    c.profile.t_r = 5e-6;
    c.profile.delta_disp = 2.2 * c.profile.omega0;
    c.u = 0.45 * kPi;
    return c;
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a - b, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace

TEST_CASE("empty samples only relax") {
    const HilbertConfig cfg(12);
    ReservoirConfig c = cat2_config();
    c.p_at = 0.0;
    const FieldState rho(coherent_state(cplx(1.5, 0.2), cfg));
    CHECK(max_abs(sample_map(rho, c).matrix() - relax(rho, c.period(), c.cavity).matrix()) < 1e-15);
}

TEST_CASE("ground-state atoms leave the vacuum alone") {
    const HilbertConfig cfg(10);
    ReservoirConfig c = cat2_config();
    c.u = 0.0;
    c.p_at = 1.0;
    c.profile.delta_disp = 0.0;
    c.backend = Backend::analytic;
    c.loss = LossMode::off;
    const FieldState vac = FieldState::vacuum(cfg);
    CHECK(max_abs(sample_map(vac, c).matrix() - vac.matrix()) < 1e-15);
}

TEST_CASE("monte carlo draws average to the deterministic map") {
    const HilbertConfig cfg(15);
    ReservoirConfig c = cat2_config();
    const FieldState rho(coherent_state(cplx(1.0, 0.5), cfg));
    const SampleChannel ch(cfg, c);
    const double expected = mean_photon(ch.apply(rho));

    const double n_empty = mean_photon(FieldState(ch.empty_branch(rho.matrix()), false));
    const double n_atom = mean_photon(FieldState(ch.atom_branch(rho.matrix()), false));
    std::mt19937_64 rng(99);
    const int draws = 10000;
    double s = 0, s2 = 0;
    for (int i = 0; i < draws; ++i) {
        const double n = uniform01(rng) < c.p_at ? n_atom : n_empty;
        s += n;
        s2 += n * n;
    }
    const double mean = s / draws, var = s2 / draws - mean * mean;
    CHECK(std::abs(mean - expected) < 3 * std::sqrt(var / draws));

    // The channel's own draw uses the same occupation rule.
    std::mt19937_64 a(5), b(5);
    for (int i = 0; i < 20; ++i) {
        const bool occupied = uniform01(b) < c.p_at;
        const FieldState out = ch.apply(rho, a);
        CHECK(mean_photon(out) == doctest::Approx(occupied ? n_atom : n_empty).epsilon(1e-14));
    }
}

TEST_CASE("sample map keeps density matrices valid and is affine") {
    const HilbertConfig cfg(14);
    std::mt19937_64 rng(17);
    for (LossMode loss : {LossMode::interleaved, LossMode::lumped, LossMode::off}) {
        ReservoirConfig c = cat2_config();
        c.loss = loss;
        const SampleChannel ch(cfg, c);
        const ComplexMatrix a = catres::testing::random_density(cfg.dim(), rng, 0.4);
        const ComplexMatrix b = catres::testing::random_density(cfg.dim(), rng, 0.4);
        CHECK_NOTHROW(FieldState(ch.deterministic(a)));
        const double w = 0.3;
        CHECK(max_abs(ch.deterministic(w * a + (1 - w) * b) -
                      (w * ch.deterministic(a) + (1 - w) * ch.deterministic(b))) < 1e-10);
    }
}

TEST_CASE("superoperator cache matches direct iteration") {
    const HilbertConfig cfg(8);
    ReservoirConfig c = cat2_config();
    c.n_samples = 30;
    c.cache = CacheMode::off;
    const FieldState vac = FieldState::vacuum(cfg);
    TrajectoryOptions opt;
    opt.truncation_limit = 1.0;
    const TrajectoryResult direct = run_trajectory(vac, c, {}, opt);
    c.cache = CacheMode::on;
    const TrajectoryResult cached = run_trajectory(vac, c, {}, opt);
    CHECK(cached.used_superoperator);
    CHECK_FALSE(direct.used_superoperator);
    CHECK(max_abs(cached.final_state.matrix() - direct.final_state.matrix()) < 1e-8);
}

TEST_CASE("the reservoir forgets its initial state") {
    const HilbertConfig cfg(30);
    ReservoirConfig c = cat2_config();
    c.n_samples = 300;
    std::mt19937_64 rng(23);
    const FieldState mixed(catres::testing::random_density(cfg.dim(), rng, 0.5));
    const TrajectoryResult a = run_trajectory(FieldState::vacuum(cfg), c);
    const TrajectoryResult b = run_trajectory(mixed, c);
    CHECK(trace_distance(a.final_state.matrix(), b.final_state.matrix()) < 0.02);
    CHECK(purity(a.final_state) < 1.0);
}

TEST_CASE("trajectory bookkeeping") {
    const HilbertConfig cfg(12);
    ReservoirConfig c = cat2_config();
    c.n_samples = 0;
    const TrajectoryResult empty = run_trajectory(FieldState::vacuum(cfg), c);
    REQUIRE(empty.records.size() == 1);
    CHECK(empty.records[0].n_bar == 0.0);
    CHECK(empty.records[0].time == 0.0);

    c.n_samples = 5;
    std::vector<std::size_t> seen;
    const TrajectoryResult r = run_trajectory(
        FieldState::vacuum(cfg), c, [&](std::size_t i, double, const FieldState&) { seen.push_back(i); });
    CHECK(r.records.size() == 6);
    CHECK(seen == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
    CHECK(r.records[5].time == doctest::Approx(5 * c.period()));
    CHECK_FALSE(r.seed.has_value());

    c.mixing = Mixing::monte_carlo;
    c.seed = 42;
    const TrajectoryResult m1 = run_trajectory(FieldState::vacuum(cfg), c);
    const TrajectoryResult m2 = run_trajectory(FieldState::vacuum(cfg), c);
    CHECK(m1.seed == std::optional<std::uint64_t>(42));
    CHECK(max_abs(m1.final_state.matrix() - m2.final_state.matrix()) == 0.0);
}

TEST_CASE("truncation guard stops an undersized basis") {
    const HilbertConfig cfg(6);
    ReservoirConfig c = cat2_config();
    c.n_samples = 200;
    try {
        run_trajectory(FieldState::vacuum(cfg), c);
        FAIL("expected a TrajectoryError");
    } catch (const TrajectoryError& e) {
        CHECK(e.sample() >= 1);
        CHECK(std::string(e.what()).find("n_max") != std::string::npos);
    }
}

TEST_CASE("switching the reservoir off") {
    const HilbertConfig cfg(20);
    ReservoirConfig c = cat2_config();
    c.n_samples = 40;
    const TrajectoryResult r = run_trajectory(FieldState::vacuum(cfg), c);
    const TrajectoryResult same = switch_off_decay(r, 0.0, c);
    CHECK(same.records.size() == r.records.size());
    CHECK(max_abs(same.final_state.matrix() - r.final_state.matrix()) == 0.0);

    ReservoirConfig cold = c;
    cold.cavity.n_t = 0.0;
    TrajectoryOptions opt;
    opt.reference = PureFieldState(ComplexVector::Unit(cfg.dim(), 0));
    const TrajectoryResult off = switch_off_decay(r, 3.0, cold, opt);
    CHECK(off.records.size() == r.records.size() + static_cast<std::size_t>(std::ceil(3.0 / c.period() - 1e-9)));
    CHECK(off.records.back().fidelity > 1 - 1e-6);
    CHECK(off.records[r.records.size()].time == doctest::Approx(41 * c.period()));
}
