#pragma once

#include <optional>

#include "halmba/errors.hpp"
#include "halmba/network.hpp"

namespace halmba {

/// Which piecewise current law a device follows.
enum class DeviceRole { Control, PeakingPrimary, PeakingSecondary };

/// One sub-amplifier's parameters.
struct DeviceProfile {
    DeviceRole role = DeviceRole::Control;
    double i_max = 1.0;    ///< max channel current (normalized A)
    double turn_on = 0.0;  ///< drive threshold (beta) where the device activates
    double scale = 0.5;    ///< peaking fundamental scale factor (unused for Control)
    double dc_ratio = 2.0 / 3.141592653589793238462643383279502884;
    double v_dd = 0.25;    ///< supply / max fundamental voltage (normalized V)

    /// Throws ConfigError listing every violated constraint.
    void validate() const;
};

/// Drive thresholds separating the three power regions.
struct RegionBoundaries {
    double beta_lbo = 0.5;
    double beta_hbo = 0.75;

    /// Throws ConfigError unless 0 < beta_lbo < beta_hbo < 1.
    void validate() const;
};

/// Power regions in ascending drive order.
enum class Region { LowPower, Doherty, Almba };

/// Region containing `beta`; boundaries belong to the upper region.
/// Throws ConfigError for beta outside [0, 1].
Region region_of(double beta, const RegionBoundaries& rb);

/// Control-device fundamental current magnitude.
/// LowPower/Doherty: beta*i_max/2. Almba: the voltage-source form
/// v_dd/|z_ca| (requires z_ca; continuous at beta_hbo by construction).
/// Throws ConfigError when z_ca is missing, NumericError when |z_ca| < 1e-12.
double ca_fundamental(double beta, const DeviceProfile& p, const RegionBoundaries& rb,
                      std::optional<Phasor> z_ca = std::nullopt);

/// Primary peaking fundamental: 0 below beta_lbo; sqrt2*(beta-beta_lbo)/4*i_max_c
/// through the Doherty region; above beta_hbo the two-term blend
/// t*scale*i_max + doherty(beta_hbo)*(1-beta)/(1-beta_hbo), t = (beta-beta_hbo)/(1-beta_hbo).
double ba_primary_fundamental(double beta, const DeviceProfile& p, const RegionBoundaries& rb,
                              double i_max_c);

/// Secondary peaking fundamental: 0 below beta_hbo; linear ramp to scale*i_max at beta = 1.
double ba_secondary_fundamental(double beta, const DeviceProfile& p, const RegionBoundaries& rb);

/// DC current drawn for a given fundamental magnitude: dc_ratio * fund.
double dc_current(double fund, const DeviceProfile& p);

/// DC and fundamental Fourier coefficients of a unit-peak truncated cosine.
struct ConductionCoefficients {
    double dc = 0.0;
    double fundamental = 0.0;
};

/// Coefficients for conduction half-angle alpha in (0, pi]:
///   dc   = (sin a - a cos a) / (pi (1 - cos a))
///   fund = (a - sin a cos a) / (pi (1 - cos a))
/// At pi/2 the ratio fund/dc is pi/2 (class-B).
ConductionCoefficients truncated_cosine_fourier(double alpha);

} // namespace halmba
