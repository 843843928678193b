#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "halmba/devices.hpp"
#include "halmba/engine.hpp"

using halmba::ba_primary_fundamental;
using halmba::ba_secondary_fundamental;
using halmba::ca_fundamental;
using halmba::ConductionCoefficients;
using halmba::ConfigError;
using halmba::dc_current;
using halmba::DeviceProfile;
using halmba::DeviceRole;
using halmba::NumericError;
using halmba::Phasor;
using halmba::Region;
using halmba::region_of;
using halmba::RegionBoundaries;
using halmba::truncated_cosine_fourier;

namespace {

const double kPi = std::numbers::pi;

DeviceProfile control_profile() {
    return {DeviceRole::Control, 1.0, 0.0, 0.5, 2.0 / kPi, 0.25};
}
DeviceProfile primary_profile() {
    return {DeviceRole::PeakingPrimary, 1.0, 0.5, 0.4, 2.0 / kPi, 0.85};
}
DeviceProfile secondary_profile() {
    return {DeviceRole::PeakingSecondary, 1.0, 0.75, 0.3, 2.0 / kPi, 0.75};
}

/// Trapezoid-rule Fourier coefficients of the unit-peak truncated cosine,
/// used as an independent oracle for the closed forms.
ConductionCoefficients numeric_conduction(double alpha, int samples) {
    const double norm = 1.0 - std::cos(alpha);
    double dc = 0.0;
    double fund = 0.0;
    const double h = 2.0 * alpha / samples;
    for (int k = 0; k <= samples; ++k) {
        const double theta = -alpha + k * h;
        const double w = (k == 0 || k == samples) ? 0.5 : 1.0;
        const double current = (std::cos(theta) - std::cos(alpha)) / norm;
        dc += w * current;
        fund += w * current * std::cos(theta);
    }
    dc *= h / (2.0 * kPi);
    fund *= h / kPi;
    return {dc, fund};
}

} // namespace

TEST_CASE("profile validation reports every violation at once") {
    DeviceProfile bad = primary_profile();
    bad.i_max = -1.0;
    bad.v_dd = 0.0;
    bad.scale = 0.9;
    try {
        bad.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("i_max") != std::string::npos);
        CHECK(msg.find("v_dd") != std::string::npos);
        CHECK(msg.find("scale") != std::string::npos);
    }
    // scale is ignored for the control device
    DeviceProfile ctrl = control_profile();
    ctrl.scale = 0.9;
    CHECK_NOTHROW(ctrl.validate());
}

TEST_CASE("region boundaries ordering") {
    CHECK_NOTHROW(RegionBoundaries{0.5, 0.75}.validate());
    CHECK_THROWS_AS((RegionBoundaries{0.75, 0.5}.validate()), ConfigError);
    CHECK_THROWS_AS((RegionBoundaries{0.0, 0.75}.validate()), ConfigError);
    CHECK_THROWS_AS((RegionBoundaries{0.5, 1.0}.validate()), ConfigError);
}

TEST_CASE("region classification with boundaries in the upper region") {
    const RegionBoundaries rb{};
    CHECK(region_of(0.0, rb) == Region::LowPower);
    CHECK(region_of(0.499, rb) == Region::LowPower);
    CHECK(region_of(0.5, rb) == Region::Doherty);
    CHECK(region_of(0.7499, rb) == Region::Doherty);
    CHECK(region_of(0.75, rb) == Region::Almba);
    CHECK(region_of(1.0, rb) == Region::Almba);
    CHECK_THROWS_AS(region_of(-0.01, rb), ConfigError);
    CHECK_THROWS_AS(region_of(1.01, rb), ConfigError);
}

TEST_CASE("control fundamental: linear ramp then supply-pinned form") {
    const RegionBoundaries rb{};
    const DeviceProfile ca = control_profile();
    CHECK(ca_fundamental(0.3, ca, rb) == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(ca_fundamental(0.0, ca, rb) == 0.0);
    // top region requires the modulated impedance
    CHECK_THROWS_AS(ca_fundamental(0.8, ca, rb), ConfigError);
    CHECK_THROWS_AS(ca_fundamental(0.8, ca, rb, Phasor(1e-13, 0.0)), NumericError);
    CHECK(ca_fundamental(0.8, ca, rb, Phasor(0.5, 0.0)) == doctest::Approx(0.5).epsilon(1e-15));
    // continuity at beta_hbo: the ramp value equals v_dd/|z_ca| at the
    // boundary impedance the matched design produces (2/3 for defaults)
    const double ramp_side = 0.75 * ca.i_max / 2.0;
    const double pinned_side = ca_fundamental(0.75, ca, rb, Phasor(2.0 / 3.0, 0.0));
    CHECK(std::abs(ramp_side - pinned_side) < 1e-12);
}

TEST_CASE("primary peaking law anchors") {
    const RegionBoundaries rb{};
    const DeviceProfile ba = primary_profile();
    CHECK(ba_primary_fundamental(0.2, ba, rb, 1.0) == 0.0);
    CHECK(ba_primary_fundamental(0.5, ba, rb, 1.0) == 0.0);
    CHECK(ba_primary_fundamental(0.6, ba, rb, 1.0) ==
          doctest::Approx(std::numbers::sqrt2 * 0.1 / 4.0).epsilon(1e-14));
    CHECK(ba_primary_fundamental(0.75, ba, rb, 1.0) ==
          doctest::Approx(std::numbers::sqrt2 * 0.25 / 4.0).epsilon(1e-14));
    CHECK(ba_primary_fundamental(0.8, ba, rb, 1.0) ==
          doctest::Approx(0.2 * 0.4 + std::numbers::sqrt2 / 16.0 * 0.8).epsilon(1e-14));
    CHECK(ba_primary_fundamental(1.0, ba, rb, 1.0) == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("secondary peaking law anchors") {
    const RegionBoundaries rb{};
    const DeviceProfile ba = secondary_profile();
    CHECK(ba_secondary_fundamental(0.6, ba, rb) == 0.0);
    CHECK(ba_secondary_fundamental(0.75, ba, rb) == 0.0);
    CHECK(ba_secondary_fundamental(0.8, ba, rb) == doctest::Approx(0.06).epsilon(1e-14));
    CHECK(ba_secondary_fundamental(0.875, ba, rb) == doctest::Approx(0.15).epsilon(1e-14));
    CHECK(ba_secondary_fundamental(1.0, ba, rb) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("current laws are continuous at both boundaries") {
    unsigned long long state = 0x2545f4914f6cdd1dull;
    auto next_uniform = [&state](double lo, double hi) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        const double u = static_cast<double>(state >> 11) / 9007199254740992.0;
        return lo + (hi - lo) * u;
    };
    for (int trial = 0; trial < 100; ++trial) {
        const double lbo = next_uniform(0.2, 0.6);
        const double hbo = next_uniform(lbo + 0.05, 0.95);
        const RegionBoundaries rb{lbo, hbo};
        DeviceProfile prim = primary_profile();
        prim.turn_on = lbo;
        prim.scale = next_uniform(0.1, 0.5);
        DeviceProfile sec = secondary_profile();
        sec.turn_on = hbo;
        sec.scale = next_uniform(0.1, 0.5);
        const double i_max_c = next_uniform(0.5, 2.0);
        const double eps = 1e-9;

        auto jump = [&](auto&& f, double at) {
            return std::abs(f(at) - f(at - eps));
        };
        auto prim_law = [&](double b) { return ba_primary_fundamental(b, prim, rb, i_max_c); };
        auto sec_law = [&](double b) { return ba_secondary_fundamental(b, sec, rb); };
        CHECK(jump(prim_law, lbo) < 1e-8);
        CHECK(jump(prim_law, hbo) < 1e-8);
        CHECK(jump(sec_law, hbo) < 1e-8);
    }
}

TEST_CASE("dc current is the class ratio times the fundamental") {
    const DeviceProfile ca = control_profile();
    CHECK(dc_current(0.25, ca) == doctest::Approx(0.25 * 2.0 / kPi).epsilon(1e-15));
    CHECK(dc_current(0.25, ca) == doctest::Approx(0.15915494309).epsilon(1e-9));
    CHECK(dc_current(0.0, ca) == 0.0);
    CHECK(dc_current(0.39142135623730956, ca) == doctest::Approx(0.24918).epsilon(1e-4));
    CHECK_THROWS_AS(dc_current(-0.1, ca), ConfigError);
}

TEST_CASE("truncated cosine coefficients match numeric integration") {
    const ConductionCoefficients class_b = truncated_cosine_fourier(kPi / 2.0);
    CHECK(class_b.dc == doctest::Approx(1.0 / kPi).epsilon(1e-14));
    CHECK(class_b.fundamental == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(class_b.fundamental / class_b.dc == doctest::Approx(kPi / 2.0).epsilon(1e-14));

    for (const double alpha : {kPi, 0.9 * kPi / 2.0, 0.3, 2.5}) {
        const ConductionCoefficients closed = truncated_cosine_fourier(alpha);
        const ConductionCoefficients numeric = numeric_conduction(alpha, 1000000);
        CHECK(std::abs(closed.dc - numeric.dc) < 1e-10);
        CHECK(std::abs(closed.fundamental - numeric.fundamental) < 1e-10);
    }
    // full conduction limit of the formula
    const ConductionCoefficients full = truncated_cosine_fourier(kPi);
    CHECK(full.dc == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(full.fundamental == doctest::Approx(0.5).epsilon(1e-14));

    CHECK_THROWS_AS(truncated_cosine_fourier(0.0), ConfigError);
    CHECK_THROWS_AS(truncated_cosine_fourier(kPi + 0.01), ConfigError);
}
