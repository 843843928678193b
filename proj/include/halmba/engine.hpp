#pragma once

#include <array>
#include <optional>
#include <vector>

#include "halmba/devices.hpp"
#include "halmba/network.hpp"

namespace halmba {

/// Architecture family being swept.
enum class Mode { Halmba, Pdlmba };

/// Full static description of one simulated amplifier configuration.
struct ArchitectureConfig {
    CouplerNetwork net = build_ideal_coupler(1.0);
    DeviceProfile ca;   ///< control device (coupler port 3)
    DeviceProfile ba1;  ///< balanced device at coupler port 2 (scale = primary-law factor)
    DeviceProfile ba2;  ///< balanced device at coupler port 4 (scale = secondary-law factor)
    RegionBoundaries rb;
    double phi = 0.0;   ///< control-vs-peaking phase offset (radians)
    Mode mode = Mode::Halmba;
    /// Coupler port (2 or 4) hosting the primary (early turn-on) peaking law.
    int primary_port = 2;
    /// Role exchange carries the scale factors along with the thresholds.
    bool swap_scales = true;
    double pd_scale = 1.0;  ///< two-way comparison mode ramp scale
    std::vector<double> beta_grid;

    /// Throws ConfigError listing every violated constraint.
    void validate() const;
};

/// Uniform n-point drive grid on [0, 1].
std::vector<double> uniform_beta_grid(int n = 201);

/// Default configuration: ideal coupler at z0, unit max currents, thresholds
/// 0.5/0.75, scales 0.4/0.3, class-B dc ratio, control supply
/// beta_lbo*i_max_c*z0/2, 201-point grid, with the peaking supplies
/// auto-calibrated (see calibrate_supplies).
ArchitectureConfig default_config(Mode mode = Mode::Halmba, double z0 = 1.0);

/// Sets ba1.v_dd / ba2.v_dd to the port-voltage magnitudes of the matched
/// full-drive solve (beta = 1, phi = 0, nominal role map), so both peaking
/// devices reach exact voltage saturation at peak drive. Supplies already
/// set (> 0) are left untouched.
void calibrate_supplies(ArchitectureConfig& cfg);

/// Per-drive-level record extracted from one network solve.
struct SweepPoint {
    double beta = 0.0;
    Region region = Region::LowPower;
    double i_c = 0.0, i_b1 = 0.0, i_b2 = 0.0;  ///< fundamental magnitudes
    std::optional<Phasor> z_ca, z_ba1, z_ba2;  ///< empty = device off (open)
    Phasor v_ca{}, v_ba1{}, v_ba2{}, v_out{};
    double p_out = 0.0;
    double p_dc = 0.0;
    double efficiency = 0.0;
    std::optional<double> gain;  ///< |v_out|/beta, undefined at beta = 0
    double out_phase = 0.0;      ///< radians, arg(v_out) (0 when output is zero)
    std::array<bool, 3> clipping{};  ///< {control, port-2 device, port-4 device}
    bool ca_voltage_saturated = false;
    double balance_residual = 0.0;   ///< worst power-balance residual of the solves
    bool failed = false;             ///< solver failure at this point (annotated, not fatal)
};

struct SweepResult {
    std::vector<SweepPoint> points;
    ArchitectureConfig config;
    Phasor load{1.0, 0.0};
};

/// Full drive sweep at the given load.
///
/// Per point: assemble the peaking-port current sources from the role-mapped
/// piecewise laws and the control port as a current source j*I_c(beta);
/// if the resulting control voltage exceeds v_dd (1 + 1e-9), re-solve with
/// the control port as a voltage source of magnitude v_dd at the phase the
/// current-source candidate had (current-source/voltage-source duality).
/// A nonzero phi then rigidly rotates the resolved control source current.
/// Solver failures annotate the point; a sweep with no valid point throws
/// NumericError.
SweepResult sweep(const ArchitectureConfig& cfg, Phasor load);

/// Closed-form matched-load impedances from the current laws alone
/// (cross-check oracle for sweep-extracted impedances; nominal role map).
struct MatchedImpedances {
    std::optional<Phasor> z_ca, z_ba1, z_ba2;
};
MatchedImpedances closed_form_impedances(double beta, const ArchitectureConfig& cfg);

/// Relative gain/phase linearity profile, aligned index-for-index with the
/// sweep points; entries are empty where gain is undefined (beta == 0, zero
/// output, or a failed point).
struct LinearityProfile {
    std::vector<std::optional<double>> gain_db;    ///< 20log10 relative to the lowest-drive gain
    std::vector<std::optional<double>> phase_deg;  ///< degrees relative to the lowest-drive phase, wrapped to [-180, 180)
    double amam_span_db = 0.0;   ///< max - min over the defined entries
    double ampm_span_deg = 0.0;  ///< max - min over the defined entries
};

/// Throws NumericError when no beta > 0 point has nonzero output.
LinearityProfile amam_ampm(const SweepResult& result);

/// Per-point clipping flags {control, port-2, port-4}: |v| > v_dd (1 + 1e-6).
std::vector<std::array<bool, 3>> detect_clipping(const SweepResult& result);

/// Total number of set clipping flags across the sweep.
int clipping_count(const SweepResult& result);

/// Indices of local efficiency maxima (three-point comparison with tolerance
/// 1e-12, plateau runs deduped to their first index, index 0 excluded).
std::vector<int> efficiency_maxima_indices(const SweepResult& result);

/// 10*log10(p_out at the last grid point / p_out at the lowest-drive local
/// efficiency maximum); empty when no maximum exists below peak drive.
std::optional<double> first_peak_obo_db(const SweepResult& result);

/// Efficiency at the grid point whose back-off from peak power is closest to
/// `target_db` (points with p_out > 0 only).
double efficiency_at_obo(const SweepResult& result, double target_db = 10.0);

/// Efficiency at the last grid point.
double peak_efficiency(const SweepResult& result);

} // namespace halmba
