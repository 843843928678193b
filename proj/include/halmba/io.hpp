#pragma once

#include <optional>
#include <string>
#include <vector>

#include "halmba/reconfig.hpp"

namespace halmba {

/// How the planner chooses the primary peaking device.
enum class RolePolicy { Auto, ForceBa1, ForceBa2 };

/// Parsed scenario document: architecture parameters, load specification,
/// plan options, fit inputs, output location.
struct ScenarioConfig {
    // architecture
    double z0 = 1.0;
    double z0_ohms = 50.0;  ///< echoed in file comments only, never computed with
    double i_max_c = 1.0;
    double i_max_b = 1.0;
    double beta_lbo = 0.5;
    double beta_hbo = 0.75;
    double lambda = 0.4;
    double gamma = 0.3;
    std::optional<double> vdd_ca0;  ///< default beta_lbo*i_max_c*z0/2
    double dc_ratio = 2.0 / 3.141592653589793238462643383279502884;
    /// Conduction half-angle in degrees, (0, 180] (class B = 90); when set it
    /// overrides dc_ratio via the truncated-cosine coefficients.
    std::optional<double> conduction_angle_deg;
    double phi_deg = 0.0;
    Mode mode = Mode::Halmba;
    int beta_points = 201;
    bool swap_scales = true;
    double pd_scale = 1.0;
    std::optional<double> vdd_ba1;  ///< explicit supply override (else auto-calibrated)
    std::optional<double> vdd_ba2;
    // load specification
    std::optional<Phasor> load;
    std::optional<double> vswr;
    double step_deg = 30.0;
    std::optional<std::vector<double>> phases_deg;
    // plan options
    Objective objective = Objective::AmpmSpan;
    double objective_weight = 1.0;
    double eff_floor = 0.05;
    double phi_grid_deg = 1.0;
    RolePolicy role_policy = RolePolicy::Auto;
    // transmission-line fit inputs
    std::vector<TlFitPoint> tl_points;
    int tl_segments = 3;
    double tl_ref_freq = 1.0;
    // misc
    std::string out_dir = ".";
    std::optional<long long> seed;  ///< accepted, unused (deterministic paths)
};

/// Parses "a+bj" style complex literals ("1.5-0.25j", "2", "0.3j", "-j");
/// throws ConfigError on malformed input.
Phasor parse_complex(const std::string& text);

/// Token maps shared by the config schema and the command line
/// ("halmba"/"pdlmba"; "ampm"/"amam"/"eff"/"weighted"; "auto"/"ba1"/"ba2").
/// Throw ConfigError on unknown tokens.
Mode parse_mode_token(const std::string& token);
Objective parse_objective_token(const std::string& token);
RolePolicy parse_role_policy_token(const std::string& token);

/// Parses a JSON scenario document. Omitted keys take the documented
/// defaults; unknown keys are an error listing every offender; validation
/// reports every violated constraint with its key. Complex values accept
/// "a+bj" strings or {"re":..,"im":..} objects.
ScenarioConfig parse_config(const std::string& text);

/// Deterministic JSON serialization; parse_config(serialize_config(c))
/// round-trips exactly.
std::string serialize_config(const ScenarioConfig& cfg);

/// Builds the architecture (validated, supplies calibrated).
ArchitectureConfig to_architecture(const ScenarioConfig& cfg);

/// Fixed nine-decimal rendering with "-0" normalized to "0".
std::string fmt9(double v);

/// Sweep table. Header:
/// beta,region,i_c,i_b1,i_b2,z_ca_re,z_ca_im,z_ba1_re,z_ba1_im,z_ba2_re,
/// z_ba2_im,v_out_re,v_out_im,p_out,p_dc,efficiency,gain_db,phase_deg,
/// clip_ca,clip_ba1,clip_ba2.
/// Off impedances and undefined gain/phase serialize as empty fields;
/// clip columns are 0/1. A "# z0_ohms=..." comment line precedes the header.
void export_sweep_csv(const SweepResult& result, const std::string& path, double z0_ohms);

/// Long-format device reflection-coefficient trajectories
/// (beta,device,gamma_re,gamma_im), gamma = (z - z0)/(z + z0); off devices
/// emit gamma = 1+0j (open circuit).
void export_smith_csv(const SweepResult& result, const std::string& path, double z0_ohms);

struct PlanReportRow {
    LoadCondition load;
    ReconfigPlan plan;
    PlanMetrics metrics;
};

/// Plan report. Header:
/// gamma_phase_deg,vswr,z_re,z_im,primary_ba,vdd_ca,phi_deg,
/// first_peak_obo_db,eff_at_10db_obo,peak_eff,amam_span_db,ampm_span_deg,
/// clipping_count.
void export_plan_report(const std::vector<PlanReportRow>& rows, const std::string& path,
                        double z0_ohms);

/// Requested pipeline.
enum class Subcommand { Sweep, MismatchGrid, PhaseOpt, TlFit, Compare };

/// Executes one subcommand pipeline, writing its artifacts under
/// cfg.out_dir. All outputs are byte-deterministic for identical inputs.
/// Artifacts: sweep -> sweep.csv + smith.csv; mismatch-grid ->
/// plan_report.csv + sweep_phase###.csv per load; phase-opt ->
/// phase_opt.csv; tlfit -> tlfit_segments.csv; compare ->
/// halmba_sweep.csv + pdlmba_sweep.csv.
void run_scenario(const ScenarioConfig& cfg, Subcommand sub);

} // namespace halmba
