#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include <doctest.h>

#include "trfc/tire_model.hpp"

using trfc::TireParams;

namespace {

// Golden values evaluated once with 50-digit arithmetic and frozen here.
constexpr double kForceAtSlip002 = 0.32298725122428425;   // B=10 C=2 D=0.85, kappa 0.02
constexpr double kForceAtSlip005 = 0.64874154564274419;
constexpr double kForceAtSlip010 = 0.82578881815104269;
constexpr double kForceAtSlip025 = 0.83726462658524845;
constexpr double kCsrB10C19 = 0.18998671348827874;
constexpr double kCsrB10C20 = 0.15574077246549022;
constexpr double kCsrB10C21 = 0.13349156050690964;
constexpr double kCsrB10C22 = 0.11769538855648480;
constexpr double kCsrB10C23 = 0.10579723144257542;
constexpr double kCsrRelativeSpread = 0.79576261966174087;  // (max-min)/min over C grid
constexpr double kMinShapeInterior = 1.5647176773666988;    // pi / (2 atan(pi/2))

TireParams default_params() { return TireParams{10.0, 2.0, 0.85, 1.0}; }

// Argmax of f over [lo, hi] on a uniform grid with the given step.
template <typename F>
std::pair<double, double> grid_peak(F f, double lo, double hi, double step) {
    double best_x = lo;
    double best_v = f(lo);
    for (double x = lo + step; x <= hi + step / 2.0; x += step) {
        const double v = f(x);
        if (v > best_v) {
            best_v = v;
            best_x = x;
        }
    }
    return {best_x, best_v};
}

}  // namespace

TEST_CASE("tire parameter validation rejects out-of-range fields") {
    CHECK_NOTHROW(trfc::validate(default_params()));

    TireParams bad = default_params();
    bad.stiffness_b = 0.0;
    CHECK_THROWS_AS(trfc::validate(bad), std::invalid_argument);

    bad = default_params();
    bad.shape_c = -1.0;
    CHECK_THROWS_AS(trfc::validate(bad), std::invalid_argument);

    bad = default_params();
    bad.peak_d = -0.1;
    CHECK_THROWS_AS(trfc::validate(bad), std::invalid_argument);

    bad = default_params();
    bad.curvature_e = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(trfc::validate(bad), std::invalid_argument);
}

TEST_CASE("slip ratio matches the guarded-denominator definition") {
    // Matched speeds give zero slip.
    CHECK(trfc::slip_ratio(20.0, 1.0, 20.0) == 0.0);
    // 2 m/s of circumferential excess over 20 m/s of travel.
    CHECK(trfc::slip_ratio(22.0, 1.0, 20.0, 0.1) == doctest::Approx(0.1).epsilon(1e-15));
    // At standstill the epsilon floor takes over the denominator.
    CHECK(trfc::slip_ratio(1.0, 1.0, 0.0, 0.1) == doctest::Approx(10.0).epsilon(1e-15));
    // Braking yields negative slip.
    CHECK(trfc::slip_ratio(0.0, 0.3, 15.0) == doctest::Approx(-1.0).epsilon(1e-15));

    CHECK_THROWS_AS(trfc::slip_ratio(10.0, 0.0, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(trfc::slip_ratio(10.0, -0.3, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(trfc::slip_ratio(10.0, 0.3, 5.0, 0.0), std::invalid_argument);
}

TEST_CASE("full formula is odd and vanishes at zero slip") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> b_draw(2.0, 20.0);
    std::uniform_real_distribution<double> c_draw(1.5, 3.0);
    std::uniform_real_distribution<double> d_draw(0.1, 1.3);
    std::uniform_real_distribution<double> e_draw(0.0, 1.0);
    std::uniform_real_distribution<double> k_draw(-1.0, 1.0);

    for (int i = 0; i < 500; ++i) {
        const TireParams p{b_draw(rng), c_draw(rng), d_draw(rng), e_draw(rng)};
        CHECK(trfc::force_full(p, 0.0) == 0.0);
        const double kappa = k_draw(rng);
        CHECK(trfc::force_full(p, kappa) ==
              doctest::Approx(-trfc::force_full(p, -kappa)).epsilon(1e-14));
        CHECK(trfc::force_simplified(p, kappa) ==
              doctest::Approx(-trfc::force_simplified(p, -kappa)).epsilon(1e-14));
    }
}

TEST_CASE("full formula with unit curvature factor reduces to the simplified form") {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> b_draw(2.0, 20.0);
    std::uniform_real_distribution<double> c_draw(1.5, 3.0);
    std::uniform_real_distribution<double> d_draw(0.1, 1.3);
    std::uniform_real_distribution<double> k_draw(-1.0, 1.0);

    for (int i = 0; i < 2000; ++i) {
        const TireParams p{b_draw(rng), c_draw(rng), d_draw(rng), 1.0};
        const double kappa = k_draw(rng);
        CHECK(std::abs(trfc::force_full(p, kappa) - trfc::force_simplified(p, kappa)) <
              1e-12);
    }
}

TEST_CASE("simplified force matches frozen golden values") {
    const TireParams p = default_params();
    CHECK(std::abs(trfc::force_simplified(p, 0.02) - kForceAtSlip002) < 5e-15);
    CHECK(std::abs(trfc::force_simplified(p, 0.05) - kForceAtSlip005) < 5e-15);
    CHECK(std::abs(trfc::force_simplified(p, 0.10) - kForceAtSlip010) < 5e-15);
    CHECK(std::abs(trfc::force_simplified(p, 0.25) - kForceAtSlip025) < 5e-15);
    // At the critical slip ratio the sine reaches 1 and the force equals D.
    CHECK(std::abs(trfc::force_simplified(p, kCsrB10C20) - 0.85) < 1e-12);

    TireParams zero_peak = p;
    zero_peak.peak_d = 0.0;
    CHECK(trfc::force_simplified(zero_peak, 0.1) == 0.0);
}

TEST_CASE("force derivative matches the closed form and finite differences") {
    const TireParams p = default_params();
    // All arctan terms vanish at zero slip, leaving D*C*B.
    CHECK(trfc::force_derivative(p, 0.0) ==
          doctest::Approx(p.peak_d * p.shape_c * p.stiffness_b).epsilon(1e-13));
    // The derivative crosses zero at the critical slip ratio.
    CHECK(std::abs(trfc::force_derivative(p, trfc::critical_slip_ratio(10.0, 2.0))) < 1e-9);

    // Central finite differences across the braking and driving range.
    const double h = 1e-7;
    for (int i = 0; i <= 1000; ++i) {
        const double kappa = -0.5 + i * 0.001;
        const double fd =
            (trfc::force_simplified(p, kappa + h) - trfc::force_simplified(p, kappa - h)) /
            (2.0 * h);
        const double analytic = trfc::force_derivative(p, kappa);
        CHECK(std::abs(analytic - fd) / std::max(1.0, std::abs(analytic)) < 1e-5);
    }
}

TEST_CASE("derivative is positive on the rising branch below the critical slip") {
    const TireParams p = default_params();
    const double csr = trfc::critical_slip_ratio(p.stiffness_b, p.shape_c);
    double previous = trfc::force_simplified(p, 0.0);
    for (int i = 1; i <= 1000; ++i) {
        const double kappa = csr * i / 1001.0;
        const double value = trfc::force_simplified(p, kappa);
        CHECK(value > previous);
        previous = value;
    }
}

TEST_CASE("interior-peak shape threshold matches its closed form") {
    CHECK(std::abs(trfc::min_shape_for_interior_peak() - kMinShapeInterior) < 5e-15);
    // Just above the threshold an interior peak exists, just below it does not.
    CHECK_NOTHROW(trfc::critical_slip_ratio(10.0, kMinShapeInterior + 1e-6));
    CHECK_THROWS_AS(trfc::critical_slip_ratio(10.0, kMinShapeInterior - 1e-6),
                    trfc::BranchDomainError);
}

TEST_CASE("critical slip ratio matches frozen golden values") {
    CHECK(std::abs(trfc::critical_slip_ratio(10.0, 1.9) - kCsrB10C19) < 1e-14);
    CHECK(std::abs(trfc::critical_slip_ratio(10.0, 2.0) - kCsrB10C20) < 1e-14);
    CHECK(std::abs(trfc::critical_slip_ratio(10.0, 2.1) - kCsrB10C21) < 1e-14);
    CHECK(std::abs(trfc::critical_slip_ratio(10.0, 2.2) - kCsrB10C22) < 1e-14);
    CHECK(std::abs(trfc::critical_slip_ratio(10.0, 2.3) - kCsrB10C23) < 1e-14);

    // The braking-side branch mirrors the driving-side peak.
    CHECK(trfc::critical_slip_ratio(10.0, 2.0, -1) ==
          doctest::Approx(-kCsrB10C20).epsilon(1e-14));

    // Doubling B halves the critical slip (B only scales the slip axis).
    CHECK(trfc::critical_slip_ratio(20.0, 2.0) ==
          doctest::Approx(kCsrB10C20 / 2.0).epsilon(1e-14));
}

TEST_CASE("critical slip ratio rejects wrapped branches") {
    // Inner angle pi/4 + pi/2 leaves the principal branch.
    CHECK_THROWS_AS(trfc::critical_slip_ratio(10.0, 2.0, 1), trfc::BranchDomainError);
    // Inner angle pi/1.8 already exceeds pi/2.
    CHECK_THROWS_AS(trfc::critical_slip_ratio(10.0, 0.9, 0), trfc::BranchDomainError);
    // Inner angle is fine but its tangent leaves (-pi/2, pi/2): the outer guard.
    CHECK_THROWS_AS(trfc::critical_slip_ratio(10.0, 1.2, -1), trfc::BranchDomainError);
    CHECK_THROWS_AS(trfc::critical_slip_ratio(0.0, 2.0, 0), std::invalid_argument);
}

TEST_CASE("critical slip ratio agrees with a dense grid argmax") {
    const TireParams p = default_params();
    const auto [argmax, peak] = grid_peak(
        [&](double k) { return trfc::force_simplified(p, k); }, 1e-6, 1.0, 1e-6);
    CHECK(std::abs(trfc::critical_slip_ratio(10.0, 2.0) - argmax) < 1e-5);
    CHECK(peak <= 0.85 + 1e-12);
}

TEST_CASE("critical slip ratio decreases with the shape factor") {
    double previous = trfc::critical_slip_ratio(10.0, 1.9);
    for (double c = 1.95; c <= 2.3 + 1e-9; c += 0.05) {
        const double value = trfc::critical_slip_ratio(10.0, c);
        CHECK(value < previous);
        previous = value;
    }
    const double spread = (kCsrB10C19 - kCsrB10C23) / kCsrB10C23;
    CHECK(std::abs(spread - kCsrRelativeSpread) < 1e-12);
    CHECK(std::abs((trfc::critical_slip_ratio(10.0, 1.9) - trfc::critical_slip_ratio(10.0, 2.3)) /
                       trfc::critical_slip_ratio(10.0, 2.3) -
                   kCsrRelativeSpread) < 1e-12);
}

TEST_CASE("peak friction coefficient is exactly D for interior peaks") {
    const trfc::PeakResult peak = trfc::peak_trfc(default_params());
    CHECK(peak.interior);
    CHECK(peak.value == 0.85);
    CHECK(peak.slip_at_peak == trfc::critical_slip_ratio(10.0, 2.0));

    TireParams doubled = default_params();
    doubled.peak_d = 2.0 * 0.85;
    CHECK(trfc::peak_trfc(doubled).value == 2.0 * peak.value);

    TireParams zero = default_params();
    zero.peak_d = 0.0;
    CHECK(trfc::peak_trfc(zero).value == 0.0);
}

TEST_CASE("peak friction coefficient falls back to the domain edge") {
    // Shape factor below the threshold: the sine never reaches 1.
    TireParams low_shape = default_params();
    low_shape.shape_c = 1.4;
    const trfc::PeakResult edge = trfc::peak_trfc(low_shape);
    CHECK_FALSE(edge.interior);
    CHECK(edge.slip_at_peak == 1.0);
    CHECK(edge.value == trfc::force_simplified(low_shape, 1.0));
    CHECK(edge.value < low_shape.peak_d);

    // Soft tire: the critical slip ratio exists but lies beyond full lock.
    TireParams soft = default_params();
    soft.stiffness_b = 0.5;
    const trfc::PeakResult soft_edge = trfc::peak_trfc(soft);
    CHECK_FALSE(soft_edge.interior);
    CHECK(soft_edge.slip_at_peak == 1.0);
    CHECK(soft_edge.value == trfc::force_simplified(soft, 1.0));
}

TEST_CASE("peak value is insensitive to the curvature factor") {
    // For each E the grid peak of the full model should sit at D: the sine
    // argument still reaches pi/2 inside the slip domain.
    for (double e : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        TireParams p = default_params();
        p.curvature_e = e;
        const auto [argmax, peak] = grid_peak(
            [&](double k) { return trfc::force_full(p, k); }, 0.0, 1.0, 5e-6);
        (void)argmax;
        CHECK(std::abs(peak - 0.85) < 1e-8);
    }
}
