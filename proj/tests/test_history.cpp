#include <doctest.h>

#include <cmath>

#include "sddpde/errors.hpp"
#include "sddpde/history.hpp"
#include "sddpde/spectral.hpp"

using namespace sddpde;

namespace {
constexpr double kPi = 3.14159265358979323846;

InitialFunction cubic_shape(double r) {
    // phi(theta) = theta^3 on a single mode
    InitialFunction f;
    f.kind = InitialFunction::Kind::Polynomial;
    f.r = r;
    f.m = 1;
    f.poly_coeffs = {{0.0}, {0.0}, {0.0}, {1.0}};
    return f;
}

}  // namespace

TEST_SUITE_BEGIN("history");

TEST_CASE("constant shape evaluates constantly") {
    const CoeffVec c = {0.7, -0.2, 1.5};
    HistoryBuffer buf = render_history(InitialFunction::constant(c, 1.0), 0.0, 8);
    for (double s : {-1.0, -0.61, -0.25, 0.0}) {
        const CoeffVec v = buf.eval(s);
        for (size_t k = 0; k < c.size(); ++k) CHECK(v[k] == doctest::Approx(c[k]).epsilon(1e-15));
        const CoeffVec d = buf.eval_deriv(s);
        for (size_t k = 0; k < c.size(); ++k) CHECK(std::abs(d[k]) < 1e-15);
    }
}

TEST_CASE("linear shape has exact derivative") {
    InitialFunction f;
    f.kind = InitialFunction::Kind::Polynomial;
    f.r = 2.0;
    f.m = 2;
    f.poly_coeffs = {{0.0, 0.0}, {0.4, -1.1}};  // phi(theta) = theta * v
    HistoryBuffer buf = render_history(f, 0.0, 8);
    for (double s : {-2.0, -1.3, -0.5, 0.0}) {
        const CoeffVec d = buf.eval_deriv(s);
        CHECK(d[0] == doctest::Approx(0.4).epsilon(1e-14));
        CHECK(d[1] == doctest::Approx(-1.1).epsilon(1e-14));
    }
}

TEST_CASE("cubic Hermite reproduces cubics and converges at fourth order") {
    // theta^3 is reproduced exactly from value-derivative samples
    HistoryBuffer buf = render_history(cubic_shape(1.0), 0.0, 10);
    for (int i = 0; i <= 100; ++i) {
        const double s = -1.0 + i / 100.0;
        CHECK(std::abs(buf.eval(s)[0] - s * s * s) < 1e-14);
    }

    // sin(2 theta): interpolation error obeys the h^4/384 |f''''| envelope
    auto build = [&](int n_segments) {
        InitialFunction f;
        f.kind = InitialFunction::Kind::Trig;
        f.r = 1.0;
        f.m = 1;
        f.trig_modes = {{1, 1.0, 2.0, kPi / 2.0}};  // cos(2 theta + pi/2) = -sin(2 theta)
        return render_history(f, 0.0, n_segments);
    };
    auto max_err = [&](const HistoryBuffer& b, int n_segments) {
        double worst = 0.0;
        for (int i = 0; i <= 1000; ++i) {
            const double s = -1.0 + i / 1000.0;
            worst = std::max(worst, std::abs(b.eval(s)[0] + std::sin(2.0 * s)));
        }
        (void)n_segments;
        return worst;
    };
    const double err10 = max_err(build(10), 10);
    const double err20 = max_err(build(20), 20);
    const double h = 0.1;
    CHECK(err10 <= std::pow(h, 4) / 384.0 * 16.0 * 1.05);
    CHECK(err10 / err20 > 8.0);  // fourth-order decay
}

TEST_CASE("norms of a constant first-mode segment") {
    SpectralBasis basis(DomainSpec{kPi, 16}, 1);
    HistoryBuffer buf = render_history(InitialFunction::constant({1.0}, 1.0), 0.0, 8);
    CHECK(norm_c_minus_half(basis, buf) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(norm_h(basis, buf) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(lipschitz_seminorm(basis, buf, -1.0, 0.0) < 1e-13);
    CHECK(norm_l(basis, buf) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(norm_x(basis, buf) == doctest::Approx(2.0).epsilon(1e-13));

    // zero segment: every norm vanishes
    HistoryBuffer zero = render_history(InitialFunction::constant({0.0}, 1.0), 0.0, 8);
    CHECK(norm_h(basis, zero) == 0.0);
    CHECK(norm_l(basis, zero) == 0.0);
}

TEST_CASE("seminorm definition consistency") {
    SpectralBasis basis(DomainSpec{kPi, 16}, 2);
    InitialFunction f;
    f.kind = InitialFunction::Kind::Trig;
    f.r = 1.5;
    f.m = 2;
    f.trig_modes = {{1, 0.8, 2.2, 0.3}, {2, -0.4, 1.1, 1.9}};
    HistoryBuffer buf = render_history(f, 0.0, 24);
    const double lhs = lipschitz_seminorm(basis, buf, -1.5, 0.0);
    const double rhs = norm_l(basis, buf) - norm_c_minus_half(basis, buf) -
                       basis.norm_alpha(buf.eval(0.0), 0.5);
    CHECK(std::abs(lhs - rhs) < 1e-10);
}

TEST_CASE("shifted ramp reproduces the h + 1 Lipschitz distance") {
    SpectralBasis basis(DomainSpec{kPi, 4}, 1);  // lambda_1 = 1, weights drop out
    const double h = 0.01;
    std::vector<HermiteSegment> segs;
    segs.push_back(HermiteSegment{-1.0, -h, {0.0}, {0.0}, {0.0}, {0.0}});
    segs.push_back(HermiteSegment{-h, 0.0, {0.0}, {1.0}, {h}, {1.0}});
    HistoryBuffer buf(1.0, 0.0, std::move(segs));
    const double lip_norm = norm_c_minus_half(basis, buf) + lipschitz_seminorm(basis, buf, -1.0, 0.0);
    CHECK(lip_norm == doctest::Approx(1.0 + h).epsilon(1e-6));
}

TEST_CASE("window lookups reject out-of-range times") {
    HistoryBuffer buf = render_history(InitialFunction::constant({1.0}, 1.0), 0.0, 4);
    CHECK_THROWS_AS(buf.eval(-1.5), WindowError);
    CHECK_THROWS_AS(buf.eval(0.5), WindowError);
    CHECK_THROWS_AS(lipschitz_seminorm(SpectralBasis(DomainSpec{kPi, 4}, 1), buf, -2.0, 0.0),
                    WindowError);
}

TEST_CASE("buffer validation rejects gaps and value jumps") {
    std::vector<HermiteSegment> gap;
    gap.push_back(HermiteSegment{-1.0, -0.6, {0.0}, {0.0}, {0.0}, {0.0}});
    gap.push_back(HermiteSegment{-0.5, 0.0, {0.0}, {0.0}, {0.0}, {0.0}});
    CHECK_THROWS_AS(HistoryBuffer(1.0, 0.0, std::move(gap)), ConfigError);

    std::vector<HermiteSegment> jump;
    jump.push_back(HermiteSegment{-1.0, -0.5, {0.0}, {0.0}, {0.0}, {0.0}});
    jump.push_back(HermiteSegment{-0.5, 0.0, {0.3}, {0.0}, {0.3}, {0.0}});
    CHECK_THROWS_AS(HistoryBuffer(1.0, 0.0, std::move(jump)), ConfigError);
}

TEST_CASE("sub-windows restrict exactly") {
    HistoryBuffer buf = render_history(cubic_shape(1.0), 0.0, 10);
    HistoryBuffer sub = buf.window(-0.77, -0.13);
    for (int i = 0; i <= 50; ++i) {
        const double s = -0.77 + (0.77 - 0.13) * i / 50.0;
        CHECK(std::abs(sub.eval(s)[0] - buf.eval(s)[0]) < 1e-15);
    }
}

TEST_CASE("tabulated shapes render through their own breakpoints") {
    InitialFunction f;
    f.kind = InitialFunction::Kind::Tabulated;
    f.r = 1.0;
    f.m = 1;
    f.tab_times = {-1.0, -0.35, 0.0};
    f.tab_values = {{0.2}, {-0.4}, {1.0}};
    f.tab_derivs = {{0.0}, {2.0}, {-1.0}};
    HistoryBuffer buf = render_history(f, 0.0, 4);
    CHECK(buf.eval(-1.0)[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(buf.eval(-0.35)[0] == doctest::Approx(-0.4).epsilon(1e-15));
    CHECK(buf.eval_deriv(-0.35)[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(buf.eval(0.0)[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_SUITE_END();
