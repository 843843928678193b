#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "halmba/devices.hpp"
#include "halmba/io.hpp"

using namespace halmba;
namespace fs = std::filesystem;

namespace {

const double kPi = std::numbers::pi;

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "halmba_io_tests";
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::string read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

int run_cli(const std::string& args) {
    const std::string bin = fs::exists("halmba_cli") ? "./halmba_cli" : "build/halmba_cli";
    const int status = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

const char* kSweepHeader =
    "beta,region,i_c,i_b1,i_b2,z_ca_re,z_ca_im,z_ba1_re,z_ba1_im,z_ba2_re,z_ba2_im,"
    "v_out_re,v_out_im,p_out,p_dc,efficiency,gain_db,phase_deg,clip_ca,clip_ba1,clip_ba2";

} // namespace

TEST_CASE("complex literal parsing") {
    CHECK(parse_complex("1.5-0.25j") == Phasor(1.5, -0.25));
    CHECK(parse_complex("2") == Phasor(2.0, 0.0));
    CHECK(parse_complex("0.3j") == Phasor(0.0, 0.3));
    CHECK(parse_complex("-j") == Phasor(0.0, -1.0));
    CHECK(parse_complex("+j") == Phasor(0.0, 1.0));
    CHECK(parse_complex("3+j") == Phasor(3.0, 1.0));
    CHECK(parse_complex(" 1 + 2j ") == Phasor(1.0, 2.0));
    CHECK(parse_complex("1e-3+2.5e2j") == Phasor(0.001, 250.0));
    CHECK(parse_complex("-1.5e-2-3e-1j") == Phasor(-0.015, -0.3));

    for (const char* bad : {"", "j5", "1+2i", "1++2j", "abc", "1.2.3", "2j+1", "1+", "--1"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_complex(bad), ConfigError);
    }
}

TEST_CASE("token parsing") {
    CHECK(parse_mode_token("halmba") == Mode::Halmba);
    CHECK(parse_mode_token("pdlmba") == Mode::Pdlmba);
    CHECK_THROWS_AS(parse_mode_token("other"), ConfigError);
    CHECK(parse_objective_token("ampm") == Objective::AmpmSpan);
    CHECK(parse_objective_token("amam") == Objective::AmamSpan);
    CHECK(parse_objective_token("eff") == Objective::EfficiencyAtObo);
    CHECK(parse_objective_token("weighted") == Objective::Weighted);
    CHECK_THROWS_AS(parse_objective_token("best"), ConfigError);
    CHECK(parse_role_policy_token("auto") == RolePolicy::Auto);
    CHECK(parse_role_policy_token("ba1") == RolePolicy::ForceBa1);
    CHECK(parse_role_policy_token("ba2") == RolePolicy::ForceBa2);
    CHECK_THROWS_AS(parse_role_policy_token("ba3"), ConfigError);
}

TEST_CASE("empty document takes every default") {
    const ScenarioConfig cfg = parse_config("{}");
    CHECK(cfg.z0 == 1.0);
    CHECK(cfg.z0_ohms == 50.0);
    CHECK(cfg.i_max_c == 1.0);
    CHECK(cfg.beta_lbo == 0.5);
    CHECK(cfg.beta_hbo == 0.75);
    CHECK(cfg.lambda == 0.4);
    CHECK(cfg.gamma == 0.3);
    CHECK(!cfg.vdd_ca0.has_value());
    CHECK(cfg.dc_ratio == doctest::Approx(2.0 / kPi).epsilon(1e-15));
    CHECK(!cfg.conduction_angle_deg.has_value());
    CHECK(cfg.phi_deg == 0.0);
    CHECK(cfg.mode == Mode::Halmba);
    CHECK(cfg.beta_points == 201);
    CHECK(cfg.swap_scales);
    CHECK(cfg.pd_scale == 1.0);
    CHECK(!cfg.vdd_ba1.has_value());
    CHECK(!cfg.load.has_value());
    CHECK(!cfg.vswr.has_value());
    CHECK(cfg.step_deg == 30.0);
    CHECK(!cfg.phases_deg.has_value());
    CHECK(cfg.objective == Objective::AmpmSpan);
    CHECK(cfg.objective_weight == 1.0);
    CHECK(cfg.eff_floor == 0.05);
    CHECK(cfg.phi_grid_deg == 1.0);
    CHECK(cfg.role_policy == RolePolicy::Auto);
    CHECK(cfg.tl_points.empty());
    CHECK(cfg.tl_segments == 3);
    CHECK(cfg.tl_ref_freq == 1.0);
    CHECK(cfg.out_dir == ".");
    CHECK(!cfg.seed.has_value());
}

TEST_CASE("config rejects malformed documents and unknown keys") {
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1,2]"), ConfigError);
    try {
        parse_config(R"({"zz": 1, "foo": 2, "z0": 1.0})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("unknown config keys") != std::string::npos);
        CHECK(msg.find("foo") != std::string::npos);
        CHECK(msg.find("zz") != std::string::npos);
    }
}

TEST_CASE("config reports every violated constraint") {
    try {
        parse_config(
            R"({"beta_lbo": 0.9, "beta_hbo": 0.2, "lambda": 0.9, "conduction_angle_deg": 200})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("invalid config") != std::string::npos);
        CHECK(msg.find("beta_lbo") != std::string::npos);
        CHECK(msg.find("lambda") != std::string::npos);
        CHECK(msg.find("conduction_angle_deg") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config(R"({"step_deg": 7.0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"beta_points": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"out_dir": ""})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"phases_deg": []})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"tl_points": [{"freq": -1.0, "phi_deg": 3.0}]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seed": 1.5})"), ConfigError);
}

TEST_CASE("complex config values accept strings and objects") {
    const ScenarioConfig a = parse_config(R"({"load": "2+0.5j"})");
    const ScenarioConfig b = parse_config(R"({"load": {"re": 2.0, "im": 0.5}})");
    REQUIRE(a.load.has_value());
    REQUIRE(b.load.has_value());
    CHECK(*a.load == *b.load);
    CHECK(a.load->real() == 2.0);
    CHECK(a.load->imag() == 0.5);
    CHECK_THROWS_AS(parse_config(R"({"load": {"re": 2.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"load": true})"), ConfigError);
}

TEST_CASE("serialization round-trips byte for byte") {
    const std::string doc = R"({
        "load": "1.2-0.4j",
        "vswr": 2.0,
        "phases_deg": [0.0, 90.0, 245.5],
        "conduction_angle_deg": 75.0,
        "vdd_ba1": 0.9,
        "mode": "pdlmba",
        "objective": "weighted",
        "role_policy": "ba2",
        "tl_points": [{"freq": 1.0, "phi_deg": -50.0}, {"freq": 2.0, "phi_deg": -100.0}],
        "seed": 42,
        "out_dir": "artifacts"
    })";
    const std::string once = serialize_config(parse_config(doc));
    const std::string twice = serialize_config(parse_config(once));
    CHECK(once == twice);
    CHECK(once.find("\"load\"") != std::string::npos);
    CHECK(once.find("\"re\"") != std::string::npos);

    // optional keys stay absent across the round trip
    const std::string bare = serialize_config(parse_config("{}"));
    CHECK(bare == serialize_config(parse_config(bare)));
    CHECK(bare.find("vswr") == std::string::npos);
    CHECK(bare.find("tl_points") == std::string::npos);
}

TEST_CASE("architecture construction from a scenario") {
    const ArchitectureConfig arch = to_architecture(parse_config("{}"));
    CHECK(arch.net.z0 == 1.0);
    CHECK(arch.rb.beta_lbo == 0.5);
    CHECK(arch.rb.beta_hbo == 0.75);
    CHECK(arch.ca.v_dd == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(arch.ba1.v_dd == doctest::Approx(0.8535533905932740).epsilon(1e-12));
    CHECK(arch.ba2.v_dd == doctest::Approx(0.7535533905932739).epsilon(1e-12));
    CHECK(arch.ba1.scale == 0.4);
    CHECK(arch.ba2.scale == 0.3);
    CHECK(arch.beta_grid.size() == 201);
    CHECK(arch.mode == Mode::Halmba);

    // class-B conduction angle reproduces the default ratio
    const ArchitectureConfig classb =
        to_architecture(parse_config(R"({"conduction_angle_deg": 90.0})"));
    CHECK(classb.ca.dc_ratio == doctest::Approx(2.0 / kPi).epsilon(1e-12));

    // other conduction angles follow the truncated-cosine coefficients
    const ArchitectureConfig deep =
        to_architecture(parse_config(R"({"conduction_angle_deg": 60.0})"));
    const ConductionCoefficients cc = truncated_cosine_fourier(60.0 * kPi / 180.0);
    CHECK(deep.ca.dc_ratio == doctest::Approx(cc.dc / cc.fundamental).epsilon(1e-12));
    CHECK(deep.ca.dc_ratio != doctest::Approx(2.0 / kPi).epsilon(1e-6));

    // explicit supplies are respected, the rest auto-calibrate
    const ArchitectureConfig manual = to_architecture(parse_config(R"({"vdd_ba1": 0.9})"));
    CHECK(manual.ba1.v_dd == 0.9);
    CHECK(manual.ba2.v_dd == doctest::Approx(0.7535533905932739).epsilon(1e-12));

    // explicit control supply wins over the derived default
    const ArchitectureConfig vc = to_architecture(parse_config(R"({"vdd_ca0": 0.3})"));
    CHECK(vc.ca.v_dd == 0.3);

    const ArchitectureConfig pd = to_architecture(parse_config(R"({"mode": "pdlmba"})"));
    CHECK(pd.mode == Mode::Pdlmba);
    CHECK(pd.ba1.v_dd == doctest::Approx(0.8535533905932737).epsilon(1e-12));

    const ArchitectureConfig rot = to_architecture(parse_config(R"({"phi_deg": 30.0})"));
    CHECK(rot.phi == doctest::Approx(30.0 * kPi / 180.0).epsilon(1e-15));
}

TEST_CASE("nine-decimal cell formatting") {
    CHECK(fmt9(0.5) == "0.500000000");
    CHECK(fmt9(-0.0) == "0.000000000");
    CHECK(fmt9(1.0 / 3.0) == "0.333333333");
    CHECK(fmt9(-1.25) == "-1.250000000");
    CHECK(fmt9(2e-10) == "0.000000000");
    CHECK(fmt9(-2e-10) == "0.000000000");
    CHECK(fmt9(12.3456789994) == "12.345678999");
}

TEST_CASE("sweep table layout") {
    const fs::path dir = scratch_dir();
    const fs::path path = dir / "sweep_table.csv";
    const ArchitectureConfig cfg = default_config();
    const SweepResult res = sweep(cfg, Phasor(1.0, 0.0));
    export_sweep_csv(res, path.string(), 50.0);

    const std::vector<std::string> lines = read_lines(path);
    REQUIRE(lines.size() == 203);
    CHECK(lines[0] == "# z0_ohms=50.000000000");
    CHECK(lines[1] == kSweepHeader);

    const std::vector<std::string> zero = split_csv(lines[2]);
    REQUIRE(zero.size() == 21);
    CHECK(zero[0] == "0.000000000");
    CHECK(zero[1] == "low_power");
    for (int k = 5; k <= 10; ++k) CHECK(zero[k].empty());  // devices off
    CHECK(zero[16].empty());                               // no gain at zero drive
    CHECK(zero[17].empty());
    CHECK(zero[18] == "0");
    CHECK(zero[19] == "0");
    CHECK(zero[20] == "0");

    const std::vector<std::string> full = split_csv(lines[202]);
    REQUIRE(full.size() == 21);
    CHECK(full[0] == "1.000000000");
    CHECK(full[1] == "almba");
    CHECK(full[5] == fmt9(0.6386979044864146));
    CHECK(full[15] == fmt9(kPi / 4.0));
    CHECK(full[16] == fmt9(4.251053957248753));

    const std::vector<std::string> mid = split_csv(lines[102]);  // beta = 0.5
    CHECK(mid[1] == "doherty");
}

TEST_CASE("reflection trajectory table layout") {
    const fs::path dir = scratch_dir();
    const fs::path path = dir / "smith_table.csv";
    const ArchitectureConfig cfg = default_config();
    const SweepResult res = sweep(cfg, Phasor(1.0, 0.0));
    export_smith_csv(res, path.string(), 50.0);

    const std::vector<std::string> lines = read_lines(path);
    REQUIRE(lines.size() == 2 + 3 * 201);
    CHECK(lines[0] == "# z0_ohms=50.000000000");
    CHECK(lines[1] == "beta,device,gamma_re,gamma_im");
    // all devices off at zero drive: open-circuit reflection
    CHECK(lines[2] == "0.000000000,ca,1.000000000,0.000000000");
    CHECK(lines[3] == "0.000000000,ba1,1.000000000,0.000000000");
    CHECK(lines[4] == "0.000000000,ba2,1.000000000,0.000000000");
    // full drive, first peaking device
    const std::vector<std::string> last_ba1 = split_csv(lines[2 + 3 * 200 + 1]);
    REQUIRE(last_ba1.size() == 4);
    CHECK(last_ba1[0] == "1.000000000");
    CHECK(last_ba1[1] == "ba1");
    CHECK(last_ba1[2] == fmt9(0.36181417879506433));
}

TEST_CASE("plan report row for the matched load") {
    const fs::path dir = scratch_dir();
    const fs::path path = dir / "plan_report.csv";
    const ArchitectureConfig base = default_config();
    const LoadCondition load = LoadCondition::from_impedance(Phasor(1.0, 0.0));
    const ReconfigPlan p = plan(load, base, Objective::AmpmSpan, 30.0);
    const PlanMetrics m = evaluate_plan(p, load, base);
    export_plan_report({{load, p, m}}, path.string(), 50.0);

    const std::vector<std::string> lines = read_lines(path);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "# z0_ohms=50.000000000");
    CHECK(lines[1] ==
          "gamma_phase_deg,vswr,z_re,z_im,primary_ba,vdd_ca,phi_deg,first_peak_obo_db,"
          "eff_at_10db_obo,peak_eff,amam_span_db,ampm_span_deg,clipping_count");
    const std::vector<std::string> row = split_csv(lines[2]);
    REQUIRE(row.size() == 13);
    CHECK(row[0] == "0.000000000");
    CHECK(row[1] == "1.000000000");
    CHECK(row[2] == "1.000000000");
    CHECK(row[3] == "0.000000000");
    CHECK(row[4] == "BA1");
    CHECK(row[5] == "0.250000000");
    CHECK(row[6] == "0.000000000");
    CHECK(std::stod(row[7]) == doctest::Approx(10.271653870528377).epsilon(1e-8));
    CHECK(std::stod(row[9]) == doctest::Approx(kPi / 4.0).epsilon(1e-8));
    CHECK(row[12] == "0");
}

TEST_CASE("sweep scenario writes both tables") {
    const fs::path dir = scratch_dir() / "sweep_run";
    fs::remove_all(dir);
    ScenarioConfig cfg = parse_config("{}");
    cfg.out_dir = dir.string();
    run_scenario(cfg, Subcommand::Sweep);
    CHECK(read_lines(dir / "sweep.csv").size() == 203);
    CHECK(read_lines(dir / "smith.csv").size() == 2 + 3 * 201);
}

TEST_CASE("phase-opt scenario reports the winner and the whole grid") {
    const fs::path dir = scratch_dir() / "phase_opt_run";
    fs::remove_all(dir);
    ScenarioConfig cfg = parse_config(R"({"load": "2", "phi_grid_deg": 30.0})");
    cfg.out_dir = dir.string();
    run_scenario(cfg, Subcommand::PhaseOpt);
    const std::vector<std::string> lines = read_lines(dir / "phase_opt.csv");
    REQUIRE(lines.size() >= 4);
    CHECK(lines[0] == "# z0_ohms=50.000000000");
    CHECK(lines[1].rfind("# phi_star_deg=", 0) == 0);
    CHECK(lines[2].rfind("# objective_value=", 0) == 0);
    CHECK(lines[3] == "phi_deg,amam_span_db,ampm_span_deg,eff_at_10db_obo,peak_eff,"
                      "clipping_count");
    CHECK(lines.size() == 4 + 12);  // 30-degree grid over the full circle
    CHECK(split_csv(lines[4])[0] == "-180.000000000");
}

TEST_CASE("fit scenario writes the segment table") {
    const fs::path dir = scratch_dir() / "tlfit_run";
    fs::remove_all(dir);
    ScenarioConfig cfg = parse_config(
        R"({"tl_points": [
            {"freq": 0.5, "phi_deg": -50.0}, {"freq": 1.0, "phi_deg": -100.0},
            {"freq": 1.5, "phi_deg": -150.0}, {"freq": 2.0, "phi_deg": -200.0}],
            "tl_segments": 2})");
    cfg.out_dir = dir.string();
    run_scenario(cfg, Subcommand::TlFit);
    const std::vector<std::string> lines = read_lines(dir / "tlfit_segments.csv");
    REQUIRE(lines.size() == 5);
    CHECK(lines[1] == "# max_abs_error_deg=0.000000000");
    CHECK(lines[2] ==
          "segment,start_index,freq_lo,freq_hi,electrical_length_deg,max_abs_error_deg");
    const std::vector<std::string> first = split_csv(lines[3]);
    REQUIRE(first.size() == 6);
    CHECK(first[0] == "0");
    CHECK(first[1] == "0");
    CHECK(first[4] == "100.000000000");

    ScenarioConfig missing = parse_config("{}");
    missing.out_dir = (scratch_dir() / "tlfit_missing").string();
    CHECK_THROWS_AS(run_scenario(missing, Subcommand::TlFit), ConfigError);
}

TEST_CASE("comparison scenario writes one table per mode") {
    const fs::path dir = scratch_dir() / "compare_run";
    fs::remove_all(dir);
    ScenarioConfig cfg = parse_config("{}");
    cfg.out_dir = dir.string();
    run_scenario(cfg, Subcommand::Compare);
    const std::vector<std::string> h = read_lines(dir / "halmba_sweep.csv");
    const std::vector<std::string> p = read_lines(dir / "pdlmba_sweep.csv");
    REQUIRE(h.size() == 203);
    REQUIRE(p.size() == 203);
    CHECK(h != p);
    // mid-band the three-way mode keeps the second peaking device dark while
    // the two-way mode ramps both together
    CHECK(split_csv(h[122])[4] == "0.000000000");  // i_b2 at beta = 0.6
    CHECK(std::stod(split_csv(p[122])[4]) > 0.0);
}

TEST_CASE("mismatch scenario artifacts are byte deterministic") {
    const fs::path dir_a = scratch_dir() / "grid_a";
    const fs::path dir_b = scratch_dir() / "grid_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    ScenarioConfig cfg =
        parse_config(R"({"vswr": 2.0, "phases_deg": [0.0, 90.0], "phi_grid_deg": 30.0})");
    cfg.out_dir = dir_a.string();
    run_scenario(cfg, Subcommand::MismatchGrid);
    cfg.out_dir = dir_b.string();
    run_scenario(cfg, Subcommand::MismatchGrid);

    for (const char* name : {"plan_report.csv", "sweep_phase000.csv", "sweep_phase090.csv"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(dir_a / name));
        REQUIRE(fs::exists(dir_b / name));
        CHECK(read_all(dir_a / name) == read_all(dir_b / name));
    }
    CHECK(read_lines(dir_a / "plan_report.csv").size() == 4);  // comment + header + 2 loads

    ScenarioConfig no_grid = parse_config("{}");
    no_grid.out_dir = (scratch_dir() / "grid_missing").string();
    CHECK_THROWS_AS(run_scenario(no_grid, Subcommand::MismatchGrid), ConfigError);
}

TEST_CASE("command line exit codes and artifacts") {
    const fs::path dir = scratch_dir() / "cli";
    fs::remove_all(dir);
    fs::create_directories(dir);

    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == 2);                 // a subcommand is required
    CHECK(run_cli("sweep --config " + (dir / "absent.json").string()) == 4);

    {
        std::ofstream bad(dir / "bad.json");
        bad << "{\"z0\": ";
    }
    CHECK(run_cli("sweep --config " + (dir / "bad.json").string()) == 2);
    {
        std::ofstream unknown(dir / "unknown.json");
        unknown << R"({"zz": 1})";
    }
    CHECK(run_cli("sweep --config " + (dir / "unknown.json").string()) == 2);

    const fs::path out = dir / "run";
    {
        std::ofstream good(dir / "good.json");
        good << R"({"out_dir": ")" << out.generic_string() << R"("})";
    }
    CHECK(run_cli("sweep --config " + (dir / "good.json").string()) == 0);
    CHECK(fs::exists(out / "sweep.csv"));
    CHECK(fs::exists(out / "smith.csv"));

    // command-line overrides win over the document
    const fs::path out2 = dir / "run_override";
    CHECK(run_cli("sweep --config " + (dir / "good.json").string() + " --out " +
                  out2.generic_string()) == 0);
    CHECK(fs::exists(out2 / "sweep.csv"));
    CHECK(run_cli("sweep --config " + (dir / "good.json").string() + " --mode nonsense") == 2);
}
