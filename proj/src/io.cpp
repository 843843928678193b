#include "halmba/io.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace halmba {

namespace {

using nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

const char* region_token(Region r) {
    switch (r) {
        case Region::LowPower: return "low_power";
        case Region::Doherty: return "doherty";
        case Region::Almba: return "almba";
    }
    return "low_power";
}

const char* mode_token(Mode m) { return m == Mode::Halmba ? "halmba" : "pdlmba"; }

const char* objective_token(Objective o) {
    switch (o) {
        case Objective::AmpmSpan: return "ampm";
        case Objective::AmamSpan: return "amam";
        case Objective::EfficiencyAtObo: return "eff";
        case Objective::Weighted: return "weighted";
    }
    return "ampm";
}

const char* role_policy_token(RolePolicy p) {
    switch (p) {
        case RolePolicy::Auto: return "auto";
        case RolePolicy::ForceBa1: return "ba1";
        case RolePolicy::ForceBa2: return "ba2";
    }
    return "auto";
}

/// Accumulates per-key validation failures so one error reports them all.
class KeyErrors {
  public:
    void add(const std::string& key, const std::string& msg) {
        if (!text_.empty()) text_ += "; ";
        text_ += key + ": " + msg;
    }
    bool any() const { return !text_.empty(); }
    const std::string& text() const { return text_; }

  private:
    std::string text_;
};

bool parse_double_literal(const std::string& t, double& out) {
    if (t.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && errno == 0 && std::isfinite(out);
}

std::optional<Phasor> json_complex(const json& v) {
    if (v.is_number()) return Phasor(v.get<double>(), 0.0);
    if (v.is_string()) {
        try {
            return parse_complex(v.get<std::string>());
        } catch (const ConfigError&) {
            return std::nullopt;
        }
    }
    if (v.is_object()) {
        if (v.size() != 2 || !v.contains("re") || !v.contains("im")) return std::nullopt;
        if (!v.at("re").is_number() || !v.at("im").is_number()) return std::nullopt;
        return Phasor(v.at("re").get<double>(), v.at("im").get<double>());
    }
    return std::nullopt;
}

json complex_to_json(Phasor z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

std::string normalized_gamma_phase_label(Phasor gamma) {
    double deg = std::arg(gamma) * kRadToDeg;
    long rounded = std::lround(deg);
    rounded %= 360;
    if (rounded < 0) rounded += 360;
    char buf[8];
    std::snprintf(buf, sizeof buf, "%03ld", rounded);
    return buf;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file " + path);
    return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out.good()) throw IoError("write failed for " + path);
}

void write_cell(std::ostream& out, const std::optional<double>& v) {
    if (v) out << fmt9(*v);
}

} // namespace

std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    std::string s(buf);
    if (s == "-0.000000000") s.erase(s.begin());
    return s;
}

Phasor parse_complex(const std::string& text) {
    std::string s;
    s.reserve(text.size());
    for (const char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    }
    if (s.empty()) throw ConfigError("empty complex literal");

    auto imag_value = [](std::string t, double& out) -> bool {
        if (t.empty() || t.back() != 'j') return false;
        t.pop_back();
        if (t.empty() || t == "+") {
            out = 1.0;
            return true;
        }
        if (t == "-") {
            out = -1.0;
            return true;
        }
        return parse_double_literal(t, out);
    };

    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }

    double re = 0.0;
    double im = 0.0;
    bool ok = false;
    if (split != std::string::npos) {
        ok = parse_double_literal(s.substr(0, split), re) && imag_value(s.substr(split), im);
    } else if (s.back() == 'j') {
        ok = imag_value(s, im);
    } else {
        ok = parse_double_literal(s, re);
    }
    if (!ok) throw ConfigError("malformed complex literal: " + text);
    return {re, im};
}

Mode parse_mode_token(const std::string& token) {
    if (token == "halmba") return Mode::Halmba;
    if (token == "pdlmba") return Mode::Pdlmba;
    throw ConfigError("mode must be \"halmba\" or \"pdlmba\"");
}

Objective parse_objective_token(const std::string& token) {
    if (token == "ampm") return Objective::AmpmSpan;
    if (token == "amam") return Objective::AmamSpan;
    if (token == "eff") return Objective::EfficiencyAtObo;
    if (token == "weighted") return Objective::Weighted;
    throw ConfigError("objective must be \"ampm\", \"amam\", \"eff\" or \"weighted\"");
}

RolePolicy parse_role_policy_token(const std::string& token) {
    if (token == "auto") return RolePolicy::Auto;
    if (token == "ba1") return RolePolicy::ForceBa1;
    if (token == "ba2") return RolePolicy::ForceBa2;
    throw ConfigError("role_policy must be \"auto\", \"ba1\" or \"ba2\"");
}

ScenarioConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");

    static const std::set<std::string> known = {
        "z0",          "z0_ohms",        "i_max_c",
        "i_max_b",     "beta_lbo",       "beta_hbo",
        "lambda",      "gamma",          "vdd_ca0",
        "dc_ratio",    "conduction_angle_deg", "phi_deg",
        "mode",        "beta_points",    "swap_scales",
        "pd_scale",    "vdd_ba1",        "vdd_ba2",
        "load",        "vswr",           "step_deg",
        "phases_deg",  "objective",      "objective_weight",
        "eff_floor",   "phi_grid_deg",   "role_policy",
        "tl_points",   "tl_segments",    "tl_ref_freq",
        "out_dir",     "seed",
    };
    std::string unknown;
    for (const auto& item : doc.items()) {
        if (known.count(item.key()) == 0) {
            if (!unknown.empty()) unknown += ", ";
            unknown += item.key();
        }
    }
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);

    ScenarioConfig cfg;
    KeyErrors errs;

    auto get_double = [&](const char* key, double& dst, auto&& check, const char* constraint) {
        if (!doc.contains(key)) return;
        const json& v = doc.at(key);
        if (!v.is_number()) {
            errs.add(key, "must be a number");
            return;
        }
        const double d = v.get<double>();
        if (!check(d)) {
            errs.add(key, constraint);
            return;
        }
        dst = d;
    };
    auto get_opt_double = [&](const char* key, std::optional<double>& dst, auto&& check,
                              const char* constraint) {
        double tmp = 0.0;
        bool set = false;
        if (doc.contains(key)) {
            const json& v = doc.at(key);
            if (!v.is_number()) {
                errs.add(key, "must be a number");
                return;
            }
            tmp = v.get<double>();
            if (!check(tmp)) {
                errs.add(key, constraint);
                return;
            }
            set = true;
        }
        if (set) dst = tmp;
    };
    auto get_int = [&](const char* key, int& dst, auto&& check, const char* constraint) {
        if (!doc.contains(key)) return;
        const json& v = doc.at(key);
        if (!v.is_number_integer()) {
            errs.add(key, "must be an integer");
            return;
        }
        const long long d = v.get<long long>();
        if (!check(d)) {
            errs.add(key, constraint);
            return;
        }
        dst = static_cast<int>(d);
    };
    auto get_token = [&](const char* key, auto&& apply) {
        if (!doc.contains(key)) return;
        const json& v = doc.at(key);
        if (!v.is_string()) {
            errs.add(key, "must be a string token");
            return;
        }
        try {
            apply(v.get<std::string>());
        } catch (const ConfigError& e) {
            errs.add(key, e.what());
        }
    };

    auto positive = [](double d) { return d > 0.0 && std::isfinite(d); };
    auto finite = [](double d) { return std::isfinite(d); };

    get_double("z0", cfg.z0, positive, "must be > 0");
    get_double("z0_ohms", cfg.z0_ohms, positive, "must be > 0");
    get_double("i_max_c", cfg.i_max_c, positive, "must be > 0");
    get_double("i_max_b", cfg.i_max_b, positive, "must be > 0");
    get_double("beta_lbo", cfg.beta_lbo,
               [](double d) { return d > 0.0 && d < 1.0; }, "must lie in (0, 1)");
    get_double("beta_hbo", cfg.beta_hbo,
               [](double d) { return d > 0.0 && d < 1.0; }, "must lie in (0, 1)");
    get_double("lambda", cfg.lambda,
               [](double d) { return d > 0.0 && d <= 0.5; }, "must lie in (0, 0.5]");
    get_double("gamma", cfg.gamma,
               [](double d) { return d > 0.0 && d <= 0.5; }, "must lie in (0, 0.5]");
    get_opt_double("vdd_ca0", cfg.vdd_ca0, positive, "must be > 0");
    get_double("dc_ratio", cfg.dc_ratio,
               [](double d) { return d > 0.0 && d <= 1.0; }, "must lie in (0, 1]");
    get_opt_double("conduction_angle_deg", cfg.conduction_angle_deg,
                   [](double d) { return d > 0.0 && d <= 180.0; }, "must lie in (0, 180]");
    get_double("phi_deg", cfg.phi_deg, finite, "must be finite");
    get_token("mode", [&](const std::string& t) { cfg.mode = parse_mode_token(t); });
    get_int("beta_points", cfg.beta_points, [](long long d) { return d >= 2; }, "must be >= 2");
    if (doc.contains("swap_scales")) {
        const json& v = doc.at("swap_scales");
        if (v.is_boolean()) {
            cfg.swap_scales = v.get<bool>();
        } else {
            errs.add("swap_scales", "must be a boolean");
        }
    }
    get_double("pd_scale", cfg.pd_scale, positive, "must be > 0");
    get_opt_double("vdd_ba1", cfg.vdd_ba1, positive, "must be > 0");
    get_opt_double("vdd_ba2", cfg.vdd_ba2, positive, "must be > 0");
    if (doc.contains("load")) {
        const std::optional<Phasor> z = json_complex(doc.at("load"));
        if (!z) {
            errs.add("load", "must be a complex value (\"a+bj\" or {\"re\":..,\"im\":..})");
        } else if (!(z->real() > 0.0)) {
            errs.add("load", "must have Re(z) > 0");
        } else {
            cfg.load = *z;
        }
    }
    get_opt_double("vswr", cfg.vswr,
                   [](double d) { return d >= 1.0 && std::isfinite(d); }, "must be >= 1");
    get_double("step_deg", cfg.step_deg,
               [](double d) {
                   if (!(d > 0.0) || !std::isfinite(d)) return false;
                   const double ratio = 360.0 / d;
                   return std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio;
               },
               "must be > 0 and divide 360");
    if (doc.contains("phases_deg")) {
        const json& v = doc.at("phases_deg");
        bool ok = v.is_array();
        std::vector<double> phases;
        if (ok) {
            for (const json& e : v) {
                if (!e.is_number() || !std::isfinite(e.get<double>())) {
                    ok = false;
                    break;
                }
                phases.push_back(e.get<double>());
            }
        }
        if (ok && !phases.empty()) {
            cfg.phases_deg = std::move(phases);
        } else {
            errs.add("phases_deg", "must be a nonempty array of finite numbers");
        }
    }
    get_token("objective", [&](const std::string& t) { cfg.objective = parse_objective_token(t); });
    get_double("objective_weight", cfg.objective_weight,
               [](double d) { return d >= 0.0 && std::isfinite(d); }, "must be >= 0");
    get_double("eff_floor", cfg.eff_floor,
               [](double d) { return d >= 0.0 && std::isfinite(d); }, "must be >= 0");
    get_double("phi_grid_deg", cfg.phi_grid_deg,
               [](double d) { return d > 0.0 && d <= 360.0; }, "must lie in (0, 360]");
    get_token("role_policy",
              [&](const std::string& t) { cfg.role_policy = parse_role_policy_token(t); });
    if (doc.contains("tl_points")) {
        const json& v = doc.at("tl_points");
        bool ok = v.is_array();
        std::vector<TlFitPoint> pts;
        if (ok) {
            for (const json& e : v) {
                if (!e.is_object() || e.size() != 2 || !e.contains("freq") ||
                    !e.contains("phi_deg") || !e.at("freq").is_number() ||
                    !e.at("phi_deg").is_number() || !(e.at("freq").get<double>() > 0.0)) {
                    ok = false;
                    break;
                }
                pts.push_back({e.at("freq").get<double>(), e.at("phi_deg").get<double>()});
            }
        }
        if (ok) {
            cfg.tl_points = std::move(pts);
        } else {
            errs.add("tl_points",
                     "must be an array of {\"freq\": > 0, \"phi_deg\": number} objects");
        }
    }
    get_int("tl_segments", cfg.tl_segments, [](long long d) { return d >= 1; }, "must be >= 1");
    get_double("tl_ref_freq", cfg.tl_ref_freq, positive, "must be > 0");
    if (doc.contains("out_dir")) {
        const json& v = doc.at("out_dir");
        if (v.is_string() && !v.get<std::string>().empty()) {
            cfg.out_dir = v.get<std::string>();
        } else {
            errs.add("out_dir", "must be a nonempty string");
        }
    }
    if (doc.contains("seed")) {
        const json& v = doc.at("seed");
        if (v.is_number_integer()) {
            cfg.seed = v.get<long long>();
        } else {
            errs.add("seed", "must be an integer");
        }
    }

    if (doc.contains("beta_lbo") || doc.contains("beta_hbo")) {
        if (!(cfg.beta_lbo < cfg.beta_hbo)) {
            errs.add("beta_lbo/beta_hbo", "must satisfy beta_lbo < beta_hbo");
        }
    }

    if (errs.any()) throw ConfigError("invalid config: " + errs.text());
    return cfg;
}

std::string serialize_config(const ScenarioConfig& cfg) {
    json j;
    j["z0"] = cfg.z0;
    j["z0_ohms"] = cfg.z0_ohms;
    j["i_max_c"] = cfg.i_max_c;
    j["i_max_b"] = cfg.i_max_b;
    j["beta_lbo"] = cfg.beta_lbo;
    j["beta_hbo"] = cfg.beta_hbo;
    j["lambda"] = cfg.lambda;
    j["gamma"] = cfg.gamma;
    if (cfg.vdd_ca0) j["vdd_ca0"] = *cfg.vdd_ca0;
    j["dc_ratio"] = cfg.dc_ratio;
    if (cfg.conduction_angle_deg) j["conduction_angle_deg"] = *cfg.conduction_angle_deg;
    j["phi_deg"] = cfg.phi_deg;
    j["mode"] = mode_token(cfg.mode);
    j["beta_points"] = cfg.beta_points;
    j["swap_scales"] = cfg.swap_scales;
    j["pd_scale"] = cfg.pd_scale;
    if (cfg.vdd_ba1) j["vdd_ba1"] = *cfg.vdd_ba1;
    if (cfg.vdd_ba2) j["vdd_ba2"] = *cfg.vdd_ba2;
    if (cfg.load) j["load"] = complex_to_json(*cfg.load);
    if (cfg.vswr) j["vswr"] = *cfg.vswr;
    j["step_deg"] = cfg.step_deg;
    if (cfg.phases_deg) j["phases_deg"] = *cfg.phases_deg;
    j["objective"] = objective_token(cfg.objective);
    j["objective_weight"] = cfg.objective_weight;
    j["eff_floor"] = cfg.eff_floor;
    j["phi_grid_deg"] = cfg.phi_grid_deg;
    j["role_policy"] = role_policy_token(cfg.role_policy);
    if (!cfg.tl_points.empty()) {
        json pts = json::array();
        for (const TlFitPoint& p : cfg.tl_points) {
            pts.push_back(json{{"freq", p.freq}, {"phi_deg", p.phi_deg}});
        }
        j["tl_points"] = std::move(pts);
    }
    j["tl_segments"] = cfg.tl_segments;
    j["tl_ref_freq"] = cfg.tl_ref_freq;
    j["out_dir"] = cfg.out_dir;
    if (cfg.seed) j["seed"] = *cfg.seed;
    return j.dump(2) + "\n";
}

ArchitectureConfig to_architecture(const ScenarioConfig& cfg) {
    ArchitectureConfig a;
    a.net = build_ideal_coupler(cfg.z0);
    double dc_ratio = cfg.dc_ratio;
    if (cfg.conduction_angle_deg) {
        const ConductionCoefficients cc =
            truncated_cosine_fourier(*cfg.conduction_angle_deg * kDegToRad);
        dc_ratio = cc.dc / cc.fundamental;
    }
    const double vdd_ca = cfg.vdd_ca0 ? *cfg.vdd_ca0 : cfg.beta_lbo * cfg.i_max_c * cfg.z0 / 2.0;
    a.ca = DeviceProfile{DeviceRole::Control, cfg.i_max_c, 0.0, 0.5, dc_ratio, vdd_ca};
    a.ba1 = DeviceProfile{DeviceRole::PeakingPrimary, cfg.i_max_b, cfg.beta_lbo,
                          cfg.lambda,               dc_ratio,    cfg.vdd_ba1.value_or(0.0)};
    a.ba2 = DeviceProfile{DeviceRole::PeakingSecondary, cfg.i_max_b, cfg.beta_hbo,
                          cfg.gamma,                 dc_ratio,    cfg.vdd_ba2.value_or(0.0)};
    a.rb = RegionBoundaries{cfg.beta_lbo, cfg.beta_hbo};
    a.phi = cfg.phi_deg * kDegToRad;
    a.mode = cfg.mode;
    a.swap_scales = cfg.swap_scales;
    a.pd_scale = cfg.pd_scale;
    a.beta_grid = uniform_beta_grid(cfg.beta_points);
    calibrate_supplies(a);
    a.validate();
    return a;
}

void export_sweep_csv(const SweepResult& result, const std::string& path, double z0_ohms) {
    std::ofstream out = open_output(path);
    out << "# z0_ohms=" << fmt9(z0_ohms) << "\n";
    out << "beta,region,i_c,i_b1,i_b2,z_ca_re,z_ca_im,z_ba1_re,z_ba1_im,z_ba2_re,z_ba2_im,"
           "v_out_re,v_out_im,p_out,p_dc,efficiency,gain_db,phase_deg,clip_ca,clip_ba1,"
           "clip_ba2\n";

    LinearityProfile prof;
    bool have_profile = true;
    try {
        prof = amam_ampm(result);
    } catch (const NumericError&) {
        have_profile = false;
    }

    auto impedance_cells = [&](std::ostream& row, const std::optional<Phasor>& z) {
        row << ",";
        if (z) row << fmt9(z->real());
        row << ",";
        if (z) row << fmt9(z->imag());
    };

    for (std::size_t k = 0; k < result.points.size(); ++k) {
        const SweepPoint& pt = result.points[k];
        out << fmt9(pt.beta) << "," << region_token(pt.region) << "," << fmt9(pt.i_c) << ","
            << fmt9(pt.i_b1) << "," << fmt9(pt.i_b2);
        impedance_cells(out, pt.z_ca);
        impedance_cells(out, pt.z_ba1);
        impedance_cells(out, pt.z_ba2);
        out << "," << fmt9(pt.v_out.real()) << "," << fmt9(pt.v_out.imag()) << ","
            << fmt9(pt.p_out) << "," << fmt9(pt.p_dc) << "," << fmt9(pt.efficiency) << ",";
        if (have_profile) write_cell(out, prof.gain_db[k]);
        out << ",";
        if (have_profile) write_cell(out, prof.phase_deg[k]);
        out << "," << (pt.clipping[0] ? 1 : 0) << "," << (pt.clipping[1] ? 1 : 0) << ","
            << (pt.clipping[2] ? 1 : 0) << "\n";
    }
    finish_output(out, path);
}

void export_smith_csv(const SweepResult& result, const std::string& path, double z0_ohms) {
    std::ofstream out = open_output(path);
    out << "# z0_ohms=" << fmt9(z0_ohms) << "\n";
    out << "beta,device,gamma_re,gamma_im\n";
    const double z0 = result.config.net.z0;
    auto gamma_of = [&](const std::optional<Phasor>& z) {
        if (!z) return Phasor(1.0, 0.0);  // open circuit
        return (*z - z0) / (*z + z0);
    };
    for (const SweepPoint& pt : result.points) {
        const std::array<std::pair<const char*, std::optional<Phasor>>, 3> rows = {
            std::pair<const char*, std::optional<Phasor>>{"ca", pt.z_ca},
            {"ba1", pt.z_ba1},
            {"ba2", pt.z_ba2},
        };
        for (const auto& [device, z] : rows) {
            const Phasor g = gamma_of(z);
            out << fmt9(pt.beta) << "," << device << "," << fmt9(g.real()) << ","
                << fmt9(g.imag()) << "\n";
        }
    }
    finish_output(out, path);
}

void export_plan_report(const std::vector<PlanReportRow>& rows, const std::string& path,
                        double z0_ohms) {
    std::ofstream out = open_output(path);
    out << "# z0_ohms=" << fmt9(z0_ohms) << "\n";
    out << "gamma_phase_deg,vswr,z_re,z_im,primary_ba,vdd_ca,phi_deg,first_peak_obo_db,"
           "eff_at_10db_obo,peak_eff,amam_span_db,ampm_span_deg,clipping_count\n";
    for (const PlanReportRow& row : rows) {
        const double g = std::abs(row.load.gamma);
        double phase_deg = std::arg(row.load.gamma) * kRadToDeg;
        phase_deg = std::fmod(phase_deg, 360.0);
        if (phase_deg < 0.0) phase_deg += 360.0;
        out << fmt9(phase_deg) << "," << fmt9((1.0 + g) / (1.0 - g)) << ","
            << fmt9(row.load.z.real()) << "," << fmt9(row.load.z.imag()) << ","
            << (row.plan.primary_ba == BaRole::Ba1 ? "BA1" : "BA2") << ","
            << fmt9(row.plan.v_dd_ca) << "," << fmt9(row.plan.phi * kRadToDeg) << ",";
        write_cell(out, row.metrics.first_peak_obo_db);
        out << "," << fmt9(row.metrics.efficiency_at_10db_obo) << ","
            << fmt9(row.metrics.peak_efficiency) << "," << fmt9(row.metrics.amam_span_db) << ","
            << fmt9(row.metrics.ampm_span_deg) << "," << row.metrics.clipping_count << "\n";
    }
    finish_output(out, path);
}

namespace {

std::vector<LoadCondition> grid_loads(const ScenarioConfig& cfg) {
    if (!cfg.vswr) throw ConfigError("mismatch grid requires the vswr key");
    if (cfg.phases_deg) {
        const double mag = (*cfg.vswr - 1.0) / (*cfg.vswr + 1.0);
        std::vector<LoadCondition> loads;
        loads.reserve(cfg.phases_deg->size());
        for (const double ph : *cfg.phases_deg) {
            loads.push_back(LoadCondition::from_gamma(std::polar(mag, ph * kDegToRad)));
        }
        return loads;
    }
    return vswr_circle(*cfg.vswr, cfg.step_deg);
}

std::optional<BaRole> forced_role(RolePolicy policy) {
    switch (policy) {
        case RolePolicy::Auto: return std::nullopt;
        case RolePolicy::ForceBa1: return BaRole::Ba1;
        case RolePolicy::ForceBa2: return BaRole::Ba2;
    }
    return std::nullopt;
}

} // namespace

void run_scenario(const ScenarioConfig& cfg, Subcommand sub) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.out_dir);
    auto out_path = [&](const std::string& name) {
        return (fs::path(cfg.out_dir) / name).string();
    };
    const PhaseOptOptions opt{cfg.objective_weight, cfg.eff_floor};

    switch (sub) {
        case Subcommand::Sweep: {
            const ArchitectureConfig arch = to_architecture(cfg);
            const Phasor load_abs = cfg.load.value_or(Phasor(1.0, 0.0)) * cfg.z0;
            const SweepResult res = sweep(arch, load_abs);
            export_sweep_csv(res, out_path("sweep.csv"), cfg.z0_ohms);
            export_smith_csv(res, out_path("smith.csv"), cfg.z0_ohms);
            break;
        }
        case Subcommand::MismatchGrid: {
            const ArchitectureConfig arch = to_architecture(cfg);
            const std::vector<LoadCondition> loads = grid_loads(cfg);
            std::vector<PlanReportRow> rows;
            rows.reserve(loads.size());
            for (const LoadCondition& load : loads) {
                const ReconfigPlan p = plan(load, arch, cfg.objective, cfg.phi_grid_deg, opt,
                                            forced_role(cfg.role_policy));
                const PlanMetrics m = evaluate_plan(p, load, arch);
                rows.push_back({load, p, m});
                const SweepResult res = sweep(apply_plan(p, arch), load.z * arch.net.z0);
                export_sweep_csv(
                    res, out_path("sweep_phase" + normalized_gamma_phase_label(load.gamma) + ".csv"),
                    cfg.z0_ohms);
            }
            export_plan_report(rows, out_path("plan_report.csv"), cfg.z0_ohms);
            break;
        }
        case Subcommand::PhaseOpt: {
            const ArchitectureConfig arch = to_architecture(cfg);
            const LoadCondition load =
                LoadCondition::from_impedance(cfg.load.value_or(Phasor(1.0, 0.0)));
            const PhaseOptResult best =
                optimize_phase(arch, load, cfg.objective, cfg.phi_grid_deg, opt);

            const std::string path = out_path("phase_opt.csv");
            std::ofstream out = open_output(path);
            out << "# z0_ohms=" << fmt9(cfg.z0_ohms) << "\n";
            out << "# phi_star_deg=" << fmt9(best.phi_star_deg) << "\n";
            out << "# objective_value=" << fmt9(best.objective_value) << "\n";
            out << "phi_deg,amam_span_db,ampm_span_deg,eff_at_10db_obo,peak_eff,"
                   "clipping_count\n";
            const Phasor load_abs = load.z * arch.net.z0;
            const int n_steps = static_cast<int>(std::ceil(360.0 / cfg.phi_grid_deg - 1e-9));
            for (int step = 0; step < n_steps; ++step) {
                const double phi_deg = -180.0 + step * cfg.phi_grid_deg;
                ArchitectureConfig trial = arch;
                trial.phi = phi_deg * kDegToRad;
                try {
                    const SweepResult res = sweep(trial, load_abs);
                    const LinearityProfile prof = amam_ampm(res);
                    out << fmt9(phi_deg) << "," << fmt9(prof.amam_span_db) << ","
                        << fmt9(prof.ampm_span_deg) << "," << fmt9(efficiency_at_obo(res, 10.0))
                        << "," << fmt9(peak_efficiency(res)) << "," << clipping_count(res)
                        << "\n";
                } catch (const NumericError&) {
                    // unusable phase offset; omitted from the table
                }
            }
            finish_output(out, path);
            break;
        }
        case Subcommand::TlFit: {
            if (cfg.tl_points.empty()) {
                throw ConfigError("tl fit requires the tl_points key");
            }
            const PhaseFitResult fit =
                tl_phase_fit(cfg.tl_points, cfg.tl_segments, cfg.tl_ref_freq);
            const std::string path = out_path("tlfit_segments.csv");
            std::ofstream out = open_output(path);
            out << "# z0_ohms=" << fmt9(cfg.z0_ohms) << "\n";
            out << "# max_abs_error_deg=" << fmt9(fit.max_abs_error_deg) << "\n";
            out << "segment,start_index,freq_lo,freq_hi,electrical_length_deg,"
                   "max_abs_error_deg\n";
            for (std::size_t s = 0; s < fit.segments.size(); ++s) {
                const TlSegment& seg = fit.segments[s];
                out << s << "," << fit.segment_start_index[s] << "," << fmt9(seg.freq_lo) << ","
                    << fmt9(seg.freq_hi) << "," << fmt9(seg.electrical_length_deg) << ","
                    << fmt9(seg.max_abs_error_deg) << "\n";
            }
            finish_output(out, path);
            break;
        }
        case Subcommand::Compare: {
            ScenarioConfig h = cfg;
            h.mode = Mode::Halmba;
            ScenarioConfig p = cfg;
            p.mode = Mode::Pdlmba;
            const Phasor load_abs = cfg.load.value_or(Phasor(1.0, 0.0)) * cfg.z0;
            export_sweep_csv(sweep(to_architecture(h), load_abs), out_path("halmba_sweep.csv"),
                             cfg.z0_ohms);
            export_sweep_csv(sweep(to_architecture(p), load_abs), out_path("pdlmba_sweep.csv"),
                             cfg.z0_ohms);
            break;
        }
    }
}

} // namespace halmba
