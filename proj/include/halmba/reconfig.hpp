#pragma once

#include <optional>
#include <vector>

#include "halmba/engine.hpp"

namespace halmba {

/// One mismatched load, stored both as normalized impedance and reflection
/// coefficient (z = (1+g)/(1-g)).
struct LoadCondition {
    Phasor z{1.0, 0.0};
    Phasor gamma{0.0, 0.0};

    /// Throws ConfigError unless Re(z) > 0.
    static LoadCondition from_impedance(Phasor z);
    /// Throws ConfigError unless |gamma| < 1.
    static LoadCondition from_gamma(Phasor gamma);
};

/// Loads with |gamma| = (vswr-1)/(vswr+1) at phases 0, step, ..., 360-step
/// degrees. step must divide 360 within 1e-9. vswr = 1 returns the single
/// matched load. Throws ConfigError on vswr < 1 or a non-dividing step.
std::vector<LoadCondition> vswr_circle(double vswr, double step_deg);

/// Which balanced device takes the primary (early turn-on) peaking role.
enum class BaRole { Ba1, Ba2 };

/// Ba1 when |z| <= 1 (ties keep the matched default), Ba2 when |z| > 1.
BaRole select_primary_ba(const LoadCondition& load);

/// Rescaled control supply v0*sqrt(1/Re(z)). Throws ConfigError when Re(z) <= 0.
double scale_vdd(const LoadCondition& load, double v0);

/// Control-device saturation power v_dd^2/(2 z0) * Re(z_ca)/|z_ca|^2.
/// Throws ConfigError when |z_ca| = 0.
double ca_saturation_power(Phasor z_ca, double v_dd, double z0);

/// Phase-offset search objective.
enum class Objective { AmpmSpan, AmamSpan, EfficiencyAtObo, Weighted };

struct PhaseOptOptions {
    double weight = 1.0;      ///< Weighted objective: ampm_span_deg + weight*amam_span_db
    double eff_floor = 0.05;  ///< span objectives keep phi with eff@10dB-OBO >= best - floor
};

struct PhaseOptResult {
    double phi_star_deg = 0.0;
    double objective_value = 0.0;
};

/// Exhaustive grid search over phi in [-180, 180) at grid_deg spacing.
/// Span objectives minimize subject to the efficiency floor;
/// EfficiencyAtObo maximizes. Ties break toward smaller |phi|, then the
/// positive candidate. Sweep failures at a phi are skipped; all failing
/// throws NumericError.
PhaseOptResult optimize_phase(const ArchitectureConfig& cfg, const LoadCondition& load,
                              Objective objective, double grid_deg,
                              const PhaseOptOptions& opt = {});

/// Mismatch countermeasure: primary-role selection, control-supply rescale,
/// phase offset.
struct ReconfigPlan {
    BaRole primary_ba = BaRole::Ba1;
    double v_dd_ca = 0.25;
    double phi = 0.0;  ///< radians
};

/// Composes select_primary_ba + scale_vdd + optimize_phase. A forced role
/// overrides the |z| rule (supply rescale and phase search still run).
ReconfigPlan plan(const LoadCondition& load, const ArchitectureConfig& cfg,
                  Objective objective, double grid_deg = 1.0,
                  const PhaseOptOptions& opt = {},
                  std::optional<BaRole> force_primary = std::nullopt);

/// Base config with a plan applied (role map, control supply, phi).
/// Peaking supplies are never rescaled by a plan.
ArchitectureConfig apply_plan(const ReconfigPlan& p, const ArchitectureConfig& base);

struct PlanMetrics {
    std::optional<double> first_peak_obo_db;  ///< empty when no back-off peak exists
    double efficiency_at_10db_obo = 0.0;
    double peak_efficiency = 0.0;
    double amam_span_db = 0.0;
    double ampm_span_deg = 0.0;
    int clipping_count = 0;
};

/// Applies the plan, sweeps, extracts metrics.
PlanMetrics evaluate_plan(const ReconfigPlan& p, const LoadCondition& load,
                          const ArchitectureConfig& base);

/// Source description for the printed mismatch impedance forms.
struct MismatchSources {
    std::optional<double> v_ca;  ///< control voltage amplitude (voltage-source forms)
    std::optional<double> i_c;   ///< control current amplitude (current-source forms)
    double i_b1 = 0.0;
    double i_b2 = 0.0;
};

struct MismatchImpedances {
    std::optional<Phasor> z_ba1, z_ba2, z_ca;
};

/// Closed-form load-modulation impedances under mismatch; secondary oracle
/// against network solves (magnitudes and proportionality structure). All
/// impedances and z_L are normalized by z0; source amplitudes are absolute,
/// so z0 keeps the v_ca and current terms commensurate.
///
/// LowPower: z_ca = 1/z_L (impedance inversion through the coupler).
/// Doherty:  voltage-source forms z_ba1 = sqrt2 v_ca z_L/(z0 i_b1) + 2 z_L and
///           z_ca = v_ca/(v_ca z_L + sqrt2 z0 z_L i_b1); current-source form
///           z_ba2 = (sqrt2 i_c/i_b2 + 2)/z_L; z_ca current-source companion
///           v_ca/(v_ca z_L - sqrt2 z0 i_b2) when only the port-4 device is on.
/// Almba:    z_ba1 = sqrt2 v_ca z_L/(z0 i_b1) + 2 z_L - i_b2/i_b1,
///           z_ba2 = (sqrt2 i_c/i_b2 + 2)/z_L - i_b1/i_b2,
///           z_ca  = v_ca/(v_ca z_L - sqrt2 z0 (i_b2 - z_L i_b1)).
/// Missing sources or zero denominators leave the corresponding impedance
/// empty (off signal).
MismatchImpedances mismatch_closed_forms(const LoadCondition& load, double z0,
                                         const MismatchSources& src, Region region);

/// Piecewise transmission-line fit of a phase-offset-vs-frequency curve.
struct TlFitPoint {
    double freq = 0.0;
    double phi_deg = 0.0;
};

struct TlSegment {
    double freq_lo = 0.0, freq_hi = 0.0;
    double electrical_length_deg = 0.0;  ///< theta at the reference frequency
    double max_abs_error_deg = 0.0;
};

struct PhaseFitResult {
    std::vector<TlSegment> segments;       ///< contiguous, covering the input range
    std::vector<int> segment_start_index;  ///< first data index of each segment
    double max_abs_error_deg = 0.0;
};

/// Partitions the points into k contiguous groups and fits phi(f) =
/// -theta*(f/ref_freq) per group, minimizing the global maximum absolute
/// error (exact single-parameter Chebyshev fits combined by dynamic
/// programming). Segment boundaries are reported midway between adjacent
/// data frequencies. Throws ConfigError on k < 1, fewer than k+1 points,
/// non-positive or non-increasing frequencies, or ref_freq <= 0.
PhaseFitResult tl_phase_fit(const std::vector<TlFitPoint>& points, int k_segments,
                            double ref_freq);

} // namespace halmba
