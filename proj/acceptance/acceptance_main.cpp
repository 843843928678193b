// Acceptance gate: twelve behavioral criteria, one PASS/FAIL line each.
// Exit code = number of failed criteria.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "halmba/io.hpp"

using namespace halmba;
namespace fs = std::filesystem;

namespace {

const double kPi = std::numbers::pi;

struct Lcg {
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    double next() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state >> 11) / 9007199254740992.0;
    }
};

// every sweep the suite runs feeds the global power-balance registry
double g_max_residual = 0.0;
int g_sweeps = 0;

SweepResult tracked_sweep(const ArchitectureConfig& cfg, Phasor load_abs) {
    SweepResult res = sweep(cfg, load_abs);
    for (const SweepPoint& pt : res.points) {
        if (!pt.failed) g_max_residual = std::max(g_max_residual, pt.balance_residual);
    }
    ++g_sweeps;
    return res;
}

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(12);
    ss << v;
    return ss.str();
}

struct Criterion {
    bool pass = false;
    std::string detail;
};

double rel_dev(Phasor got, Phasor want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

std::vector<TlFitPoint> three_slope_curve(double noise) {
    std::vector<TlFitPoint> pts;
    for (int i = 0; i < 13; ++i) {
        const double f = 0.4 + 0.1 * i;
        const double theta = i < 5 ? 50.0 : (i < 9 ? 80.0 : 110.0);
        const double wiggle = noise * (i % 2 == 0 ? 1.0 : -1.0);
        pts.push_back({f, -(theta * f + wiggle)});
    }
    return pts;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main() {
    std::array<Criterion, 12> crit;
    const ArchitectureConfig base = default_config();
    const Phasor matched(1.0, 0.0);

    // ------------------------------------------------------------------
    // 1. sweep impedances reproduce the closed-form trajectories (<= 1e-9
    //    relative) in both modes, in under one second
    {
        const auto t0 = std::chrono::steady_clock::now();
        double worst = 0.0;
        bool shape_ok = true;
        for (const Mode mode : {Mode::Halmba, Mode::Pdlmba}) {
            const ArchitectureConfig cfg = default_config(mode);
            const SweepResult res = tracked_sweep(cfg, matched);
            for (const SweepPoint& pt : res.points) {
                const MatchedImpedances ref = closed_form_impedances(pt.beta, cfg);
                const std::array<std::pair<const std::optional<Phasor>*,
                                           const std::optional<Phasor>*>, 3>
                    pairs = {{{&pt.z_ca, &ref.z_ca},
                              {&pt.z_ba1, &ref.z_ba1},
                              {&pt.z_ba2, &ref.z_ba2}}};
                for (const auto& [got, want] : pairs) {
                    if (got->has_value() != want->has_value()) {
                        shape_ok = false;
                    } else if (want->has_value()) {
                        worst = std::max(worst, rel_dev(**got, **want));
                    }
                }
            }
        }
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0).count();
        crit[0].pass = shape_ok && worst <= 1e-9 && ms < 1000.0;
        crit[0].detail = "max relative deviation " + num(worst) + " over 402 points, " +
                         num(ms) + " ms" + (shape_ok ? "" : "; on/off shape mismatch");
    }

    // shared matched sweep for criteria 3-5
    const SweepResult matched_res = tracked_sweep(base, matched);
    const std::optional<double> matched_obo = first_peak_obo_db(matched_res);

    // ------------------------------------------------------------------
    // 3. first-peak back-off near 10.27 dB and quarter-pi efficiency at
    //    both ends of the modulation range
    {
        const double e_lbo = matched_res.points[100].efficiency;
        const double e_top = matched_res.points[200].efficiency;
        const bool obo_ok = matched_obo && std::abs(*matched_obo - 10.27) <= 0.05;
        const bool eff_ok =
            std::abs(e_lbo - kPi / 4.0) <= 1e-9 && std::abs(e_top - kPi / 4.0) <= 1e-9;
        crit[2].pass = obo_ok && eff_ok;
        crit[2].detail = "first-peak back-off " +
                         (matched_obo ? num(*matched_obo) : std::string("n/a")) +
                         " dB, efficiency " + num(e_lbo) + " / " + num(e_top) +
                         " vs pi/4 = " + num(kPi / 4.0);
    }

    // ------------------------------------------------------------------
    // 4. exactly three efficiency maxima, at the handover points and full
    //    drive
    {
        const std::vector<int> maxima = efficiency_maxima_indices(matched_res);
        crit[3].pass = maxima == std::vector<int>{100, 150, 200};
        std::string got = "{";
        for (std::size_t i = 0; i < maxima.size(); ++i) {
            got += (i ? "," : "") + std::to_string(maxima[i]);
        }
        got += "}";
        crit[3].detail = "maxima at grid indices " + got + ", expected {100,150,200}";
    }

    // ------------------------------------------------------------------
    // 5. matched linearity: flat phase, flat gain below the top region,
    //    gain expansion peaking 4.25 +- 0.01 dB at full drive
    {
        const LinearityProfile prof = amam_ampm(matched_res);
        double flat = 0.0;
        for (std::size_t k = 0; k < matched_res.points.size(); ++k) {
            if (matched_res.points[k].beta < base.rb.beta_hbo && prof.gain_db[k]) {
                flat = std::max(flat, std::abs(*prof.gain_db[k]));
            }
        }
        const bool peak_at_top =
            prof.gain_db.back().has_value() &&
            std::abs(*prof.gain_db.back() - prof.amam_span_db) <= 1e-12;
        crit[4].pass = prof.ampm_span_deg <= 1e-9 && flat <= 1e-12 &&
                       std::abs(prof.amam_span_db - 4.25) <= 0.01 && peak_at_top;
        crit[4].detail = "phase span " + num(prof.ampm_span_deg) + " deg, low-region gain span " +
                         num(flat) + " dB, expansion " + num(prof.amam_span_db) +
                         " dB peaking at full drive";
    }

    // ------------------------------------------------------------------
    // 2. power balance across every sweep this suite runs (finalized last,
    //    computed after all criteria); placeholder filled after the loop.

    // ------------------------------------------------------------------
    // 6. the low-power control impedance inverts 1000 random loads
    {
        ArchitectureConfig cfg = base;
        cfg.beta_grid = {0.3};
        Lcg rng;
        double worst = 0.0;
        for (int n = 0; n < 1000; ++n) {
            const Phasor zl(0.2 + 2.0 * rng.next(), -1.0 + 2.0 * rng.next());
            const SweepResult res = tracked_sweep(cfg, zl);
            const Phasor want = Phasor(1.0, 0.0) / zl;
            if (!res.points[0].z_ca) {
                worst = std::numeric_limits<double>::infinity();
                break;
            }
            worst = std::max(worst, std::abs(*res.points[0].z_ca - want) / std::abs(want));
        }
        crit[5].pass = worst <= 1e-10;
        crit[5].detail = "max relative inversion error " + num(worst) + " over 1000 loads";
    }

    // ------------------------------------------------------------------
    // 7. the supply rescale keeps the control saturation power invariant
    //    over 1000 random loads
    {
        const double v0 = base.ca.v_dd;
        const double p_ref = ca_saturation_power(Phasor(1.0, 0.0), v0, base.net.z0);
        Lcg rng;
        double worst = 0.0;
        for (int n = 0; n < 1000; ++n) {
            const Phasor z(0.2 + 2.0 * rng.next(), -1.0 + 2.0 * rng.next());
            const LoadCondition load = LoadCondition::from_impedance(z);
            const double p = ca_saturation_power(Phasor(1.0, 0.0) / z,
                                                 scale_vdd(load, v0), base.net.z0);
            worst = std::max(worst, std::abs(p - p_ref) / p_ref);
        }
        crit[6].pass = worst <= 1e-12;
        crit[6].detail = "max relative saturation-power drift " + num(worst) +
                         " over 1000 loads (reference " + num(p_ref) + ")";
    }

    // ------------------------------------------------------------------
    // 8. full 2:1 mismatch circle: the planner must remove all clipping,
    //    hold the first-peak back-off within +-1.5 dB of matched, pick the
    //    better primary role, beat the unreconfigured amplifier, and finish
    //    in under 30 s
    {
        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<LoadCondition> ring = vswr_circle(2.0, 30.0);
        int clipping_loads = 0;
        int obo_misses = 0;
        int role_misses = 0;
        int unplanned_flagged = 0;
        const ReconfigPlan identity{BaRole::Ba1, base.ca.v_dd, 0.0};
        for (const LoadCondition& load : ring) {
            const Phasor load_abs = load.z * base.net.z0;
            const ReconfigPlan p = plan(load, base, Objective::AmpmSpan, 1.0);
            const SweepResult planned = tracked_sweep(apply_plan(p, base), load_abs);
            if (clipping_count(planned) > 0) ++clipping_loads;
            const std::optional<double> obo = first_peak_obo_db(planned);
            if (!obo || !matched_obo || std::abs(*obo - *matched_obo) > 1.5) ++obo_misses;

            // brute force both roles: fewer clips wins, then back-off closeness
            auto role_cost = [&](BaRole role) {
                const ReconfigPlan f = plan(load, base, Objective::AmpmSpan, 1.0, {}, role);
                const SweepResult res = tracked_sweep(apply_plan(f, base), load_abs);
                const std::optional<double> o = first_peak_obo_db(res);
                const double d = (o && matched_obo) ? std::abs(*o - *matched_obo)
                                                    : std::numeric_limits<double>::infinity();
                return std::make_pair(clipping_count(res), d);
            };
            const auto c1 = role_cost(BaRole::Ba1);
            const auto c2 = role_cost(BaRole::Ba2);
            const BaRole best = c2 < c1 ? BaRole::Ba2 : BaRole::Ba1;
            if (best != p.primary_ba) ++role_misses;

            const SweepResult raw = tracked_sweep(apply_plan(identity, base), load_abs);
            if (clipping_count(raw) > 0) ++unplanned_flagged;
        }
        const double sec = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - t0).count();
        const bool a = clipping_loads == 0;
        const bool b = obo_misses == 0;
        const bool c = role_misses == 0;
        const bool d = unplanned_flagged > 0;
        const bool e = sec < 30.0;
        crit[7].pass = a && b && c && d && e;
        crit[7].detail = "planned clipping on " + std::to_string(clipping_loads) +
                         "/12 loads; back-off beyond +-1.5 dB on " + std::to_string(obo_misses) +
                         "/12; role differs from brute force on " + std::to_string(role_misses) +
                         "/12; unreconfigured clipping on " + std::to_string(unplanned_flagged) +
                         "/12; " + num(sec) + " s";
    }

    // ------------------------------------------------------------------
    // 9. mid-region closed forms scale exactly with the load: the
    //    voltage-pinned branch linearly, the current-pinned branch inversely
    {
        MismatchSources src;
        src.v_ca = 0.25;
        src.i_c = 0.3;
        src.i_b1 = 0.1;
        src.i_b2 = 0.1;
        const MismatchImpedances ref = mismatch_closed_forms(
            LoadCondition::from_impedance(matched), 1.0, src, Region::Doherty);
        double worst = std::numeric_limits<double>::infinity();
        if (ref.z_ba1 && ref.z_ba2) {
            worst = 0.0;
            for (const double c : {0.5, 2.0}) {
                const MismatchImpedances f = mismatch_closed_forms(
                    LoadCondition::from_impedance(Phasor(c, 0.0)), 1.0, src, Region::Doherty);
                if (!f.z_ba1 || !f.z_ba2) {
                    worst = std::numeric_limits<double>::infinity();
                    break;
                }
                worst = std::max(worst, rel_dev(*f.z_ba1, *ref.z_ba1 * c));
                worst = std::max(worst, rel_dev(*f.z_ba2, *ref.z_ba2 / c));
            }
        }
        crit[8].pass = worst <= 1e-10;
        crit[8].detail = "max proportionality deviation " + num(worst) +
                         " across load scales {0.5, 2}";
    }

    // ------------------------------------------------------------------
    // 10. the coarse phase search lands within one grid step of a fine
    //     search, and the matched search stays at zero
    {
        const LoadCondition l60 = vswr_circle(2.0, 30.0)[2];
        ReconfigPlan staged;
        staged.primary_ba = select_primary_ba(l60);
        staged.v_dd_ca = scale_vdd(l60, base.ca.v_dd);
        staged.phi = 0.0;
        const ArchitectureConfig cfg = apply_plan(staged, base);
        const PhaseOptResult coarse = optimize_phase(cfg, l60, Objective::AmpmSpan, 5.0);
        const PhaseOptResult fine = optimize_phase(cfg, l60, Objective::AmpmSpan, 0.1);
        const PhaseOptResult still = optimize_phase(
            base, LoadCondition::from_impedance(matched), Objective::AmpmSpan, 1.0);
        crit[9].pass = std::abs(coarse.phi_star_deg - fine.phi_star_deg) <= 5.0 + 1e-9 &&
                       still.phi_star_deg == 0.0;
        crit[9].detail = "coarse " + num(coarse.phi_star_deg) + " deg vs fine " +
                         num(fine.phi_star_deg) + " deg (step 5), matched optimum " +
                         num(still.phi_star_deg) + " deg";
    }

    // ------------------------------------------------------------------
    // 11. the piecewise line-length fit recovers a three-slope curve under
    //     unit noise and never worsens with more segments
    {
        const PhaseFitResult noisy = tl_phase_fit(three_slope_curve(1.0), 3, 1.0);
        const bool breaks_ok = noisy.segment_start_index == std::vector<int>{0, 5, 9};
        const bool err_ok = noisy.max_abs_error_deg <= 1.01;
        bool monotone = true;
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= 5; ++k) {
            const double e = tl_phase_fit(three_slope_curve(1.0), k, 1.0).max_abs_error_deg;
            if (e > prev + 1e-12) monotone = false;
            prev = e;
        }
        crit[10].pass = breaks_ok && err_ok && monotone;
        crit[10].detail = std::string("breakpoints ") + (breaks_ok ? "{0,5,9}" : "wrong") +
                          ", max error " + num(noisy.max_abs_error_deg) +
                          " deg, segment-count monotonicity " + (monotone ? "holds" : "violated");
    }

    // ------------------------------------------------------------------
    // 12. a full reconfiguration pipeline run is byte-deterministic
    {
        const fs::path root = fs::path("acceptance_artifacts");
        const fs::path a = root / "run_a";
        const fs::path b = root / "run_b";
        fs::remove_all(a);
        fs::remove_all(b);
        ScenarioConfig cfg = parse_config(
            R"({"vswr": 2.0, "phases_deg": [0.0, 90.0], "phi_grid_deg": 30.0})");
        bool same = true;
        std::string why = "all artifacts identical";
        int files = 0;
        try {
            cfg.out_dir = a.string();
            run_scenario(cfg, Subcommand::MismatchGrid);
            cfg.out_dir = b.string();
            run_scenario(cfg, Subcommand::MismatchGrid);
            std::vector<fs::path> names;
            for (const auto& entry : fs::directory_iterator(a)) {
                names.push_back(entry.path().filename());
            }
            std::sort(names.begin(), names.end());
            files = static_cast<int>(names.size());
            for (const fs::path& name : names) {
                if (!fs::exists(b / name) || read_bytes(a / name) != read_bytes(b / name)) {
                    same = false;
                    why = "mismatch in " + name.string();
                    break;
                }
            }
            if (files == 0) {
                same = false;
                why = "no artifacts produced";
            }
        } catch (const std::exception& ex) {
            same = false;
            why = std::string("exception: ") + ex.what();
        }
        crit[11].pass = same;
        crit[11].detail = std::to_string(files) + " files compared across two runs; " + why;
    }

    // ------------------------------------------------------------------
    // 2. finalized power-balance registry
    crit[1].pass = g_max_residual <= 1e-9;
    crit[1].detail = "max power-balance residual " + num(g_max_residual) + " across " +
                     std::to_string(g_sweeps) + " sweeps";

    int failures = 0;
    for (std::size_t k = 0; k < crit.size(); ++k) {
        if (!crit[k].pass) ++failures;
        std::printf("criterion %zu: %s — %s\n", k + 1, crit[k].pass ? "PASS" : "FAIL",
                    crit[k].detail.c_str());
    }
    return failures;
}
