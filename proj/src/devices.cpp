#include "halmba/devices.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace halmba {

void DeviceProfile::validate() const {
    std::ostringstream bad;
    if (!(i_max > 0.0)) bad << "i_max must be > 0; ";
    if (!(turn_on >= 0.0 && turn_on < 1.0)) bad << "turn_on must be in [0, 1); ";
    if (role != DeviceRole::Control && !(scale > 0.0 && scale <= 0.5)) {
        bad << "scale must be in (0, 0.5]; ";
    }
    if (!(dc_ratio > 0.0 && dc_ratio <= 1.0)) bad << "dc_ratio must be in (0, 1]; ";
    if (!(v_dd > 0.0)) bad << "v_dd must be > 0; ";
    const std::string msg = bad.str();
    if (!msg.empty()) throw ConfigError("device profile: " + msg);
}

void RegionBoundaries::validate() const {
    if (!(0.0 < beta_lbo && beta_lbo < beta_hbo && beta_hbo < 1.0)) {
        throw ConfigError("region boundaries: require 0 < beta_lbo < beta_hbo < 1 "
                          "(beta_lbo, beta_hbo violate the ordering)");
    }
}

Region region_of(double beta, const RegionBoundaries& rb) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw ConfigError("drive level beta must lie in [0, 1]");
    }
    if (beta < rb.beta_lbo) return Region::LowPower;
    if (beta < rb.beta_hbo) return Region::Doherty;
    return Region::Almba;
}

double ca_fundamental(double beta, const DeviceProfile& p, const RegionBoundaries& rb,
                      std::optional<Phasor> z_ca) {
    const Region region = region_of(beta, rb);
    if (region != Region::Almba) {
        return beta * p.i_max / 2.0;
    }
    if (!z_ca.has_value()) {
        throw ConfigError("control fundamental in the top region requires the modulated z_ca");
    }
    const double mag = std::abs(*z_ca);
    if (mag < 1e-12) {
        throw NumericError("control impedance magnitude below 1e-12; current undefined");
    }
    return p.v_dd / mag;
}

namespace {
double doherty_ramp(double beta, double beta_lbo, double i_max_c) {
    return std::numbers::sqrt2 * (beta - beta_lbo) / 4.0 * i_max_c;
}
} // namespace

double ba_primary_fundamental(double beta, const DeviceProfile& p, const RegionBoundaries& rb,
                              double i_max_c) {
    const Region region = region_of(beta, rb);
    if (region == Region::LowPower) return 0.0;
    if (region == Region::Doherty) return doherty_ramp(beta, rb.beta_lbo, i_max_c);
    const double t = (beta - rb.beta_hbo) / (1.0 - rb.beta_hbo);
    return t * p.scale * p.i_max +
           doherty_ramp(rb.beta_hbo, rb.beta_lbo, i_max_c) * (1.0 - beta) / (1.0 - rb.beta_hbo);
}

double ba_secondary_fundamental(double beta, const DeviceProfile& p, const RegionBoundaries& rb) {
    const Region region = region_of(beta, rb);
    if (region != Region::Almba) return 0.0;
    return (beta - rb.beta_hbo) / (1.0 - rb.beta_hbo) * p.scale * p.i_max;
}

double dc_current(double fund, const DeviceProfile& p) {
    if (!(fund >= 0.0)) throw ConfigError("fundamental magnitude must be >= 0");
    return p.dc_ratio * fund;
}

ConductionCoefficients truncated_cosine_fourier(double alpha) {
    if (!(alpha > 0.0 && alpha <= std::numbers::pi)) {
        throw ConfigError("conduction half-angle must lie in (0, pi]");
    }
    const double denom = std::numbers::pi * (1.0 - std::cos(alpha));
    return {(std::sin(alpha) - alpha * std::cos(alpha)) / denom,
            (alpha - std::sin(alpha) * std::cos(alpha)) / denom};
}

} // namespace halmba
