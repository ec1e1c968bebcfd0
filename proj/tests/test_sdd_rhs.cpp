#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "oracles.hpp"
#include "sddpde/errors.hpp"
#include "sddpde/sdd_rhs.hpp"

using namespace sddpde;

namespace {

constexpr double kPi = 3.14159265358979323846;

KernelSpec default_kernel(int n_grid) {
    KernelSpec spec;
    spec.f = {KernelProfile::Kind::Gaussian, 0.6, 1.0};
    spec.ell = {kPi / 2.0, 1.2, 2};
    spec.quad_points = 4 * n_grid;
    return spec;
}

SddRightHandSide make_rhs(int m, int n_grid, PointwiseNonlinearity b, DelayFunctional eta,
                          double d = 0.0) {
    ModelSpec ms;
    ms.domain = DomainSpec{kPi, n_grid};
    ms.m = m;
    ms.kernel = default_kernel(n_grid);
    ms.b = b;
    ms.eta = eta;
    ms.d = d;
    return assemble_model(ms);
}

}  // namespace

TEST_SUITE_BEGIN("sdd_rhs");

TEST_CASE("zero kernel profile gives the zero operator") {
    SpectralBasis basis(DomainSpec{kPi, 32}, 4);
    KernelSpec spec = default_kernel(32);
    spec.f = {KernelProfile::Kind::Constant, 0.0, 0.0};
    const NonlocalOperator op = assemble_B(spec, basis);
    for (double v : op.matrix) CHECK(std::abs(v) < 1e-15);
    CHECK(op.L_B < 1e-12);
}

TEST_CASE("constant profile yields a rank-one operator") {
    SpectralBasis basis(DomainSpec{kPi, 32}, 6);
    KernelSpec spec = default_kernel(32);
    spec.f = {KernelProfile::Kind::Constant, 0.0, 1.0};
    const NonlocalOperator op = assemble_B(spec, basis);
    // every column is proportional to the column of largest norm
    int ref = 0;
    double best = 0.0;
    auto col_dot = [&](int a, int b) {
        double acc = 0.0;
        for (int j = 0; j < 6; ++j) acc += op.matrix[static_cast<size_t>(j) * 6 + a] *
                                           op.matrix[static_cast<size_t>(j) * 6 + b];
        return acc;
    };
    for (int k = 0; k < 6; ++k)
        if (col_dot(k, k) > best) {
            best = col_dot(k, k);
            ref = k;
        }
    REQUIRE(best > 0.0);
    for (int k = 0; k < 6; ++k) {
        const double proj = col_dot(k, ref) / best;
        for (int j = 0; j < 6; ++j) {
            const double resid = op.matrix[static_cast<size_t>(j) * 6 + k] -
                                 proj * op.matrix[static_cast<size_t>(j) * 6 + ref];
            CHECK(std::abs(resid) < 1e-10);
        }
    }
}

TEST_CASE("assembly matches a brute-force fine tensor quadrature") {
    SpectralBasis basis(DomainSpec{kPi, 32}, 8);
    KernelSpec spec = default_kernel(32);
    const NonlocalOperator op = assemble_B(spec, basis);

    // independent oracle: Simpson tensor quadrature on a 4x finer grid
    const int n = 2048;
    const double ya = spec.ell.center - spec.ell.width;
    const double yb = spec.ell.center + spec.ell.width;
    for (int j = 0; j < 8; j += 3) {
        for (int k = 0; k < 8; k += 2) {
            auto outer = [&](double x) {
                auto inner = [&](double y) {
                    return spec.f(x - y) * spec.ell(y) * basis.eigenfunction(k, y);
                };
                return basis.eigenfunction(j, x) * testing::simpson(inner, ya, yb, n / 2);
            };
            const double want = testing::simpson(outer, 0.0, kPi, n);
            CHECK(op.matrix[static_cast<size_t>(j) * 8 + k] ==
                  doctest::Approx(want).epsilon(1e-8));
        }
    }
}

TEST_CASE("assembly validates support, resolution, and profile parameters") {
    SpectralBasis basis(DomainSpec{kPi, 32}, 4);
    KernelSpec bad_support = default_kernel(32);
    bad_support.ell.width = 2.0;  // support sticks out of (0, pi)
    CHECK_THROWS_AS(assemble_B(bad_support, basis), ConfigError);

    KernelSpec coarse = default_kernel(32);
    coarse.quad_points = 64;
    CHECK_THROWS_AS(assemble_B(coarse, basis), ConfigError);

    KernelSpec bad_sigma = default_kernel(32);
    bad_sigma.f.sigma = 0.0;
    CHECK_THROWS_AS(assemble_B(bad_sigma, basis), ConfigError);
}

TEST_CASE("bump weight vanishes with its derivative at the support edge") {
    const BumpWeight ell{kPi / 2.0, 1.2, 2};
    CHECK(ell(kPi / 2.0 - 1.2) == 0.0);
    CHECK(ell(kPi / 2.0 + 1.2) == 0.0);
    CHECK(std::abs(ell.derivative(kPi / 2.0 - 1.2 + 1e-9)) < 1e-7);
    CHECK(std::abs(ell.derivative(kPi / 2.0 + 1.2 - 1e-9)) < 1e-7);
    CHECK(ell(kPi / 2.0) == doctest::Approx(1.0));
}

TEST_CASE("nonlinearity families carry their constants") {
    const PointwiseNonlinearity nich = PointwiseNonlinearity::nicholson(2.0);
    CHECK(nich.M_b == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-15));
    CHECK(nich.L_b == 2.0);
    CHECK(nich(1.0) == doctest::Approx(nich.M_b).epsilon(1e-15));
    CHECK(nich(-1.0) == doctest::Approx(-nich.M_b).epsilon(1e-15));
    // sampled bound and Lipschitz checks
    double worst_ratio = 0.0;
    for (int i = 0; i < 400; ++i) {
        const double w = -10.0 + 20.0 * i / 399.0;
        CHECK(std::abs(nich(w)) <= nich.M_b + 1e-15);
        const double w2 = w + 1e-4;
        worst_ratio = std::max(worst_ratio, std::abs(nich(w2) - nich(w)) / 1e-4);
    }
    CHECK(worst_ratio <= nich.L_b * (1.0 + 1e-6));

    const PointwiseNonlinearity sat = PointwiseNonlinearity::saturating_linear(1.5, 3.0);
    CHECK(sat.M_b == 3.0);
    CHECK(sat.L_b == 1.5);
    CHECK(std::abs(sat(100.0)) <= 3.0 + 1e-12);

    const PointwiseNonlinearity cst = PointwiseNonlinearity::constant(-0.7);
    CHECK(cst.M_b == doctest::Approx(0.7));
    CHECK(cst.L_b == 0.0);
    CHECK(cst(42.0) == -0.7);
}

TEST_CASE("delay functional evaluation") {
    SpectralBasis basis(DomainSpec{kPi, 16}, 1);
    HistoryBuffer unit = render_history(InitialFunction::constant({1.0}, 1.0), 0.0, 8);
    HistoryBuffer zero = render_history(InitialFunction::constant({0.0}, 1.0), 0.0, 8);

    const DelayFunctional fixed = DelayFunctional::constant(0.3, 1.0);
    CHECK(eval_eta(fixed, basis, unit) == 0.3);
    CHECK(eval_eta(fixed, basis, zero) == 0.3);

    const DelayFunctional energy = DelayFunctional::history_energy(1.0, 1.0);
    CHECK(eval_eta(energy, basis, zero) == 0.0);
    // constant e_1 history on (0, pi): integral = r / lambda_1 = 1, s(1) = 1/2
    CHECK(eval_eta(energy, basis, unit) == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(DelayFunctional::constant(2.0, 1.0), ConfigError);
    CHECK_THROWS_AS(DelayFunctional::history_energy(-1.0, 1.0), ConfigError);
}

TEST_CASE("delay range stays inside [0, r] on random histories") {
    const int m = 4;
    SpectralBasis basis(DomainSpec{kPi, 16}, m);
    const DelayFunctional energy = DelayFunctional::history_energy(2.5, 0.8);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uni(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        InitialFunction f;
        f.kind = InitialFunction::Kind::Trig;
        f.r = 0.8;
        f.m = m;
        for (int k = 1; k <= m; ++k)
            f.trig_modes.push_back({k, uni(rng), std::abs(uni(rng)), uni(rng)});
        const double tau = eval_eta(energy, basis, render_history(f, 0.0, 8));
        CHECK(tau >= 0.0);
        CHECK(tau <= 0.8);
    }
}

TEST_CASE("constant b makes F1 history-independent") {
    auto rhs = make_rhs(6, 32, PointwiseNonlinearity::constant(0.9),
                        DelayFunctional::constant(0.4, 1.0));
    const SpectralBasis& basis = *rhs.basis;
    HistoryBuffer h1 = render_history(InitialFunction::constant({1., 0., 0., 0., 0., 0.}, 1.0));
    HistoryBuffer h2 = render_history(InitialFunction::constant({0., 2., 0., -1., 0., 3.}, 1.0));
    const CoeffVec f1 = eval_F1(rhs, h1);
    const CoeffVec f2 = eval_F1(rhs, h2);
    GridVec ones(static_cast<size_t>(basis.n_grid()), 1.0);
    const CoeffVec want = basis.from_grid(ones);
    for (int k = 0; k < 6; ++k) {
        CHECK(f1[static_cast<size_t>(k)] ==
              doctest::Approx(0.9 * want[static_cast<size_t>(k)]).epsilon(1e-13));
        CHECK(f1[static_cast<size_t>(k)] == doctest::Approx(f2[static_cast<size_t>(k)]));
    }
}

TEST_CASE("zero history is a fixed point of the nicholson term") {
    auto rhs = make_rhs(4, 16, PointwiseNonlinearity::nicholson(2.0),
                        DelayFunctional::history_energy(1.0, 1.0));
    HistoryBuffer zero = render_history(InitialFunction::constant({0., 0., 0., 0.}, 1.0));
    for (double v : eval_F1(rhs, zero)) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("F1 matches the dense-grid oracle") {
    const int m = 6, n_grid = 256;
    auto rhs = make_rhs(m, n_grid, PointwiseNonlinearity::nicholson(2.0),
                        DelayFunctional::history_energy(1.0, 1.0), 0.1);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    InitialFunction f;
    f.kind = InitialFunction::Kind::Trig;
    f.r = 1.0;
    f.m = m;
    for (int k = 1; k <= m; ++k)
        f.trig_modes.push_back({k, uni(rng) / k, 1.0 + std::abs(uni(rng)), uni(rng)});
    HistoryBuffer h = render_history(f, 0.0, 32);

    const CoeffVec got = eval_F1(rhs, h);
    const CoeffVec want = testing::f1_fine_grid_oracle(rhs, default_kernel(n_grid), h, 4096);
    for (int k = 0; k < m; ++k)
        CHECK(std::abs(got[static_cast<size_t>(k)] - want[static_cast<size_t>(k)]) < 1e-7);
}

TEST_CASE("closed-form Lipschitz constants") {
    auto rhs = make_rhs(2, 16, PointwiseNonlinearity::nicholson(1.0),
                        DelayFunctional::constant(0.5, 1.0));
    // L_eta = 0 collapses the delay factor
    rhs.b.L_b = 1.0;
    rhs.B.L_B = 1.0;
    CHECK(lipschitz_F1(rhs, 123.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    rhs.b.L_b = 2.0;
    rhs.B.L_B = 3.0;
    rhs.eta.L_eta = 1.0;
    rhs.eta.r = 4.0;
    CHECK(lipschitz_F1(rhs, 5.0) == doctest::Approx(60.0 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(lipschitz_F1(rhs, -1.0), ConfigError);
}

TEST_CASE("boundedness of the assembled term") {
    auto rhs = make_rhs(8, 64, PointwiseNonlinearity::nicholson(2.0),
                        DelayFunctional::history_energy(1.0, 1.0));
    const SpectralBasis& basis = *rhs.basis;
    const double bound = rhs.b.M_b * std::sqrt(kPi);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uni(-4.0, 4.0);
    for (int trial = 0; trial < 25; ++trial) {
        InitialFunction f;
        f.kind = InitialFunction::Kind::Trig;
        f.r = 1.0;
        f.m = 8;
        for (int k = 1; k <= 8; ++k)
            f.trig_modes.push_back({k, uni(rng), std::abs(uni(rng)), uni(rng)});
        const double norm = basis.norm_alpha(eval_F1(rhs, render_history(f)), 0.0);
        CHECK(norm <= bound);
    }
}

TEST_SUITE_END();
