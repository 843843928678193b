#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "halmba/io.hpp"

namespace {

halmba::Subcommand subcommand_of(const std::string& name) {
    if (name == "sweep") return halmba::Subcommand::Sweep;
    if (name == "mismatch-grid") return halmba::Subcommand::MismatchGrid;
    if (name == "phase-opt") return halmba::Subcommand::PhaseOpt;
    if (name == "tlfit") return halmba::Subcommand::TlFit;
    return halmba::Subcommand::Compare;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Behavioral simulator and reconfiguration planner for three-way "
                 "load-modulated balanced amplifiers"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string load_str;
    std::string mode_str;
    std::string objective_str;
    double vswr = 0.0;
    double step_deg = 0.0;
    double phi_grid_deg = 0.0;
    int segments = 0;
    long long seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON scenario file");
        sub->add_option("--out", out_dir, "output directory (overrides the out_dir key)");
        sub->add_option("--load", load_str, "normalized load impedance, e.g. \"1.2-0.4j\"");
        sub->add_option("--vswr", vswr, "mismatch circle VSWR");
        sub->add_option("--step-deg", step_deg, "mismatch circle phase step in degrees");
        sub->add_option("--mode", mode_str, "architecture: halmba|pdlmba");
        sub->add_option("--objective", objective_str, "phase search goal: ampm|amam|eff|weighted");
        sub->add_option("--phi-grid-deg", phi_grid_deg, "phase search grid spacing in degrees");
        sub->add_option("--segments", segments, "piecewise fit segment count");
        sub->add_option("--seed", seed, "accepted for interface stability; unused");
    };

    CLI::App* subs[] = {
        app.add_subcommand("sweep", "Drive sweep at one load; writes sweep.csv and smith.csv"),
        app.add_subcommand("mismatch-grid", "Plan and evaluate every load on a VSWR circle; "
                                            "writes plan_report.csv and per-load sweeps"),
        app.add_subcommand("phase-opt", "Exhaustive phase-offset search at one load; "
                                        "writes phase_opt.csv"),
        app.add_subcommand("tlfit", "Piecewise transmission-line fit of a phase-offset curve; "
                                    "writes tlfit_segments.csv"),
        app.add_subcommand("compare", "Sweeps the three-way and two-way architectures; "
                                      "writes halmba_sweep.csv and pdlmba_sweep.csv"),
    };
    for (CLI::App* sub : subs) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();

        halmba::ScenarioConfig cfg;
        if (sub->count("--config") > 0) {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) throw halmba::IoError("cannot read config file " + config_path);
            std::ostringstream text;
            text << in.rdbuf();
            cfg = halmba::parse_config(text.str());
        }
        if (sub->count("--out") > 0) cfg.out_dir = out_dir;
        if (sub->count("--load") > 0) {
            const halmba::Phasor z = halmba::parse_complex(load_str);
            if (!(z.real() > 0.0)) throw halmba::ConfigError("--load must have Re(z) > 0");
            cfg.load = z;
        }
        if (sub->count("--vswr") > 0) {
            if (!(vswr >= 1.0)) throw halmba::ConfigError("--vswr must be >= 1");
            cfg.vswr = vswr;
        }
        if (sub->count("--step-deg") > 0) {
            const double ratio = 360.0 / step_deg;
            if (!(step_deg > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
                throw halmba::ConfigError("--step-deg must be > 0 and divide 360");
            }
            cfg.step_deg = step_deg;
        }
        if (sub->count("--mode") > 0) cfg.mode = halmba::parse_mode_token(mode_str);
        if (sub->count("--objective") > 0) {
            cfg.objective = halmba::parse_objective_token(objective_str);
        }
        if (sub->count("--phi-grid-deg") > 0) {
            if (!(phi_grid_deg > 0.0 && phi_grid_deg <= 360.0)) {
                throw halmba::ConfigError("--phi-grid-deg must lie in (0, 360]");
            }
            cfg.phi_grid_deg = phi_grid_deg;
        }
        if (sub->count("--segments") > 0) {
            if (segments < 1) throw halmba::ConfigError("--segments must be >= 1");
            cfg.tl_segments = segments;
        }
        if (sub->count("--seed") > 0) cfg.seed = seed;

        halmba::run_scenario(cfg, subcommand_of(sub->get_name()));
        return 0;
    } catch (const halmba::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const halmba::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const halmba::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    }
}
