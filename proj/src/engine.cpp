#include "halmba/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace halmba {

namespace {

/// Relative headroom above v_dd before the control port switches from a
/// current source to a saturated voltage source.
constexpr double kSaturationTol = 1e-9;
/// Relative headroom above v_dd before a port voltage counts as clipping.
constexpr double kClipTol = 1e-6;

struct PeakingCurrents {
    double i2 = 0.0;  ///< port-2 fundamental magnitude
    double i4 = 0.0;  ///< port-4 fundamental magnitude
};

/// Role-mapped peaking fundamentals. The primary (early turn-on) law runs on
/// `primary_port`; i_max always belongs to the port's own device, while the
/// scale factor follows the law when swap_scales is set and stays with the
/// port otherwise. In two-way comparison mode both ports share one ramp.
PeakingCurrents peaking_port_currents(double beta, const ArchitectureConfig& cfg) {
    if (cfg.mode == Mode::Pdlmba) {
        auto ramp = [&](const DeviceProfile& p) {
            if (beta < cfg.rb.beta_lbo) return 0.0;
            return 0.5 * p.i_max * (beta - cfg.rb.beta_lbo) / (1.0 - cfg.rb.beta_lbo) *
                   cfg.pd_scale;
        };
        return {ramp(cfg.ba1), ramp(cfg.ba2)};
    }
    const bool exchanged = cfg.primary_port == 4;
    DeviceProfile primary = exchanged ? cfg.ba2 : cfg.ba1;
    DeviceProfile secondary = exchanged ? cfg.ba1 : cfg.ba2;
    if (!exchanged || cfg.swap_scales) {
        primary.scale = cfg.ba1.scale;
        secondary.scale = cfg.ba2.scale;
    } else {
        primary.scale = cfg.ba2.scale;
        secondary.scale = cfg.ba1.scale;
    }
    const double ip = ba_primary_fundamental(beta, primary, cfg.rb, cfg.ca.i_max);
    const double is = ba_secondary_fundamental(beta, secondary, cfg.rb);
    if (exchanged) return {is, ip};
    return {ip, is};
}

/// Control-port current-source candidate magnitude (before the saturation
/// check). Two-way mode freezes the control drive at its beta_lbo value.
double control_cs_current(double beta, const ArchitectureConfig& cfg) {
    if (cfg.mode == Mode::Pdlmba) {
        return std::min(beta, cfg.rb.beta_lbo) * cfg.ca.i_max / 2.0;
    }
    return beta * cfg.ca.i_max / 2.0;
}

struct PointSolve {
    NetworkSolution sol;
    bool saturated = false;
    double residual = 0.0;
};

/// One drive level: solve with the control port as a current source; if its
/// voltage exceeds the supply re-solve it as a voltage source pinned at v_dd
/// with the candidate's phase; a nonzero phi finally rotates the resolved
/// control current rigidly.
PointSolve solve_point(const ArchitectureConfig& cfg, Phasor load, double beta) {
    const Phasor j{0.0, 1.0};
    const PeakingCurrents pk = peaking_port_currents(beta, cfg);
    const double i_cs = control_cs_current(beta, cfg);

    std::array<PortExcitation, 4> ports{
        PortExcitation::passive_load(load),
        PortExcitation::current_source(Phasor(pk.i2, 0.0)),
        PortExcitation::current_source(j * i_cs),
        PortExcitation::current_source(-j * pk.i4),
    };

    PointSolve out;
    out.sol = solve(cfg.net, ports);
    out.residual = power_balance(out.sol);

    out.saturated = std::abs(out.sol.v[2]) > cfg.ca.v_dd * (1.0 + kSaturationTol);
    if (out.saturated) {
        const double mag = std::abs(out.sol.v[2]);
        const double psi = mag > 0.0 ? std::arg(out.sol.v[2]) : std::numbers::pi / 2.0;
        ports[2] = PortExcitation::voltage_source(std::polar(cfg.ca.v_dd, psi));
        out.sol = solve(cfg.net, ports);
        out.residual = std::max(out.residual, power_balance(out.sol));
    }
    if (cfg.phi != 0.0) {
        ports[2] = PortExcitation::current_source(out.sol.i[2] * std::polar(1.0, cfg.phi));
        out.sol = solve(cfg.net, ports);
        out.residual = std::max(out.residual, power_balance(out.sol));
    }
    return out;
}

/// Shortest signed angular difference, wrapped to [-pi, pi).
double wrap_angle(double d) {
    const double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(d + std::numbers::pi, two_pi);
    if (r < 0.0) r += two_pi;
    return r - std::numbers::pi;
}

} // namespace

void ArchitectureConfig::validate() const {
    std::ostringstream bad;
    auto sub = [&bad](const char* name, const auto& part) {
        try {
            part.validate();
        } catch (const ConfigError& e) {
            bad << name << ": " << e.what() << "; ";
        }
    };
    sub("ca", ca);
    sub("ba1", ba1);
    sub("ba2", ba2);
    sub("boundaries", rb);
    if (ca.role != DeviceRole::Control) bad << "ca must use the control law; ";
    if (ba1.role == DeviceRole::Control) bad << "ba1 must use a peaking law; ";
    if (ba2.role == DeviceRole::Control) bad << "ba2 must use a peaking law; ";
    if (!std::isfinite(phi)) bad << "phi must be finite; ";
    if (primary_port != 2 && primary_port != 4) bad << "primary_port must be 2 or 4; ";
    if (!(pd_scale > 0.0) || !std::isfinite(pd_scale)) bad << "pd_scale must be > 0; ";
    if (beta_grid.empty()) {
        bad << "beta_grid must be nonempty; ";
    } else {
        bool ordered = true;
        bool in_range = true;
        for (std::size_t k = 0; k < beta_grid.size(); ++k) {
            if (!(beta_grid[k] >= 0.0 && beta_grid[k] <= 1.0)) in_range = false;
            if (k > 0 && !(beta_grid[k] > beta_grid[k - 1])) ordered = false;
        }
        if (!in_range) bad << "beta_grid values must lie in [0, 1]; ";
        if (!ordered) bad << "beta_grid must be strictly increasing; ";
    }
    const std::string msg = bad.str();
    if (!msg.empty()) throw ConfigError("architecture config: " + msg);
}

std::vector<double> uniform_beta_grid(int n) {
    if (n < 2) throw ConfigError("beta grid needs at least 2 points");
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        grid[static_cast<std::size_t>(k)] = static_cast<double>(k) / (n - 1);
    }
    return grid;
}

ArchitectureConfig default_config(Mode mode, double z0) {
    constexpr double class_b = 2.0 / std::numbers::pi;
    ArchitectureConfig cfg;
    cfg.net = build_ideal_coupler(z0);
    cfg.rb = RegionBoundaries{};
    cfg.ca = DeviceProfile{DeviceRole::Control, 1.0, 0.0, 0.5, class_b,
                           cfg.rb.beta_lbo * 1.0 * z0 / 2.0};
    cfg.ba1 = DeviceProfile{DeviceRole::PeakingPrimary, 1.0, cfg.rb.beta_lbo, 0.4, class_b, 0.0};
    cfg.ba2 = DeviceProfile{DeviceRole::PeakingSecondary, 1.0, cfg.rb.beta_hbo, 0.3, class_b, 0.0};
    cfg.mode = mode;
    cfg.beta_grid = uniform_beta_grid();
    calibrate_supplies(cfg);
    return cfg;
}

void calibrate_supplies(ArchitectureConfig& cfg) {
    const bool need_ba1 = !(cfg.ba1.v_dd > 0.0);
    const bool need_ba2 = !(cfg.ba2.v_dd > 0.0);
    if (!need_ba1 && !need_ba2) return;
    ArchitectureConfig nominal = cfg;
    nominal.phi = 0.0;
    nominal.primary_port = 2;
    const PointSolve ps = solve_point(nominal, Phasor(cfg.net.z0, 0.0), 1.0);
    if (need_ba1) cfg.ba1.v_dd = std::abs(ps.sol.v[1]);
    if (need_ba2) cfg.ba2.v_dd = std::abs(ps.sol.v[3]);
}

SweepResult sweep(const ArchitectureConfig& cfg, Phasor load) {
    cfg.validate();
    SweepResult out;
    out.config = cfg;
    out.load = load;
    out.points.reserve(cfg.beta_grid.size());
    int solved = 0;
    for (const double beta : cfg.beta_grid) {
        SweepPoint pt;
        pt.beta = beta;
        pt.region = region_of(beta, cfg.rb);
        try {
            const PointSolve ps = solve_point(cfg, load, beta);
            const NetworkSolution& s = ps.sol;
            pt.i_c = std::abs(s.i[2]);
            pt.i_b1 = std::abs(s.i[1]);
            pt.i_b2 = std::abs(s.i[3]);
            pt.z_ca = port_impedance(s, 2);
            pt.z_ba1 = port_impedance(s, 1);
            pt.z_ba2 = port_impedance(s, 3);
            pt.v_ca = s.v[2];
            pt.v_ba1 = s.v[1];
            pt.v_ba2 = s.v[3];
            pt.v_out = s.v[0];
            pt.p_out = s.load_power;
            pt.p_dc = dc_current(pt.i_c, cfg.ca) * cfg.ca.v_dd +
                      dc_current(pt.i_b1, cfg.ba1) * cfg.ba1.v_dd +
                      dc_current(pt.i_b2, cfg.ba2) * cfg.ba2.v_dd;
            pt.efficiency = pt.p_dc > 0.0 ? pt.p_out / pt.p_dc : 0.0;
            if (beta > 0.0) pt.gain = std::abs(pt.v_out) / beta;
            pt.out_phase = std::abs(pt.v_out) > 0.0 ? std::arg(pt.v_out) : 0.0;
            pt.clipping = {std::abs(s.v[2]) > cfg.ca.v_dd * (1.0 + kClipTol),
                           std::abs(s.v[1]) > cfg.ba1.v_dd * (1.0 + kClipTol),
                           std::abs(s.v[3]) > cfg.ba2.v_dd * (1.0 + kClipTol)};
            pt.ca_voltage_saturated = ps.saturated;
            pt.balance_residual = ps.residual;
            ++solved;
        } catch (const NumericError&) {
            pt.failed = true;
        }
        out.points.push_back(pt);
    }
    if (solved == 0) throw NumericError("sweep failed at every drive level");
    return out;
}

MatchedImpedances closed_form_impedances(double beta, const ArchitectureConfig& cfg) {
    const double z0 = cfg.net.z0;
    const double s2 = std::numbers::sqrt2;
    double ib1 = 0.0;
    double ib2 = 0.0;
    double ic = 0.0;
    if (cfg.mode == Mode::Pdlmba) {
        const PeakingCurrents pk = peaking_port_currents(beta, cfg);
        ib1 = pk.i2;
        ib2 = pk.i4;
        ic = control_cs_current(beta, cfg);
    } else {
        ib1 = ba_primary_fundamental(beta, cfg.ba1, cfg.rb, cfg.ca.i_max);
        ib2 = ba_secondary_fundamental(beta, cfg.ba2, cfg.rb);
        ic = region_of(beta, cfg.rb) == Region::Almba
                 ? cfg.ca.v_dd / z0 + s2 * (ib1 - ib2)
                 : beta * cfg.ca.i_max / 2.0;
    }
    MatchedImpedances out;
    if (ic > 1e-12) out.z_ca = Phasor(z0 * (ic + s2 * (ib2 - ib1)) / ic, 0.0);
    if (ib1 > 1e-12) out.z_ba1 = Phasor(z0 * (s2 * ic + ib2) / ib1, 0.0);
    if (ib2 > 1e-12) out.z_ba2 = Phasor(z0 * (s2 * ic + 2.0 * ib2 - ib1) / ib2, 0.0);
    return out;
}

LinearityProfile amam_ampm(const SweepResult& result) {
    const SweepPoint* ref = nullptr;
    for (const SweepPoint& pt : result.points) {
        if (pt.beta > 0.0 && !pt.failed && std::abs(pt.v_out) > 0.0) {
            ref = &pt;
            break;
        }
    }
    if (ref == nullptr) {
        throw NumericError("linearity profile undefined: no nonzero output above zero drive");
    }
    const double g0 = std::abs(ref->v_out) / ref->beta;
    const double ph0 = std::arg(ref->v_out);

    LinearityProfile prof;
    prof.gain_db.resize(result.points.size());
    prof.phase_deg.resize(result.points.size());
    double gmin = std::numeric_limits<double>::infinity();
    double gmax = -gmin;
    double pmin = gmin;
    double pmax = -gmin;
    for (std::size_t k = 0; k < result.points.size(); ++k) {
        const SweepPoint& pt = result.points[k];
        if (pt.beta <= 0.0 || pt.failed || !(std::abs(pt.v_out) > 0.0)) continue;
        const double gain_db = 20.0 * std::log10(std::abs(pt.v_out) / pt.beta / g0);
        const double phase_deg =
            wrap_angle(std::arg(pt.v_out) - ph0) * 180.0 / std::numbers::pi;
        prof.gain_db[k] = gain_db;
        prof.phase_deg[k] = phase_deg;
        gmin = std::min(gmin, gain_db);
        gmax = std::max(gmax, gain_db);
        pmin = std::min(pmin, phase_deg);
        pmax = std::max(pmax, phase_deg);
    }
    prof.amam_span_db = gmax - gmin;
    prof.ampm_span_deg = pmax - pmin;
    return prof;
}

std::vector<std::array<bool, 3>> detect_clipping(const SweepResult& result) {
    std::vector<std::array<bool, 3>> flags;
    flags.reserve(result.points.size());
    for (const SweepPoint& pt : result.points) flags.push_back(pt.clipping);
    return flags;
}

int clipping_count(const SweepResult& result) {
    int n = 0;
    for (const SweepPoint& pt : result.points) {
        n += static_cast<int>(pt.clipping[0]) + static_cast<int>(pt.clipping[1]) +
             static_cast<int>(pt.clipping[2]);
    }
    return n;
}

std::vector<int> efficiency_maxima_indices(const SweepResult& result) {
    constexpr double tol = 1e-12;
    constexpr double edge = -1e18;
    const int n = static_cast<int>(result.points.size());
    auto eff = [&](int k) { return result.points[static_cast<std::size_t>(k)].efficiency; };

    std::vector<int> out;
    int i = 0;
    while (i < n) {
        int j = i;  // plateau run [i, j] of values equal within tol
        while (j + 1 < n && std::abs(eff(j + 1) - eff(i)) <= tol) ++j;
        const double left = i > 0 ? eff(i - 1) : edge;
        const double right = j + 1 < n ? eff(j + 1) : edge;
        if (i > 0 && eff(i) > left + tol && eff(i) > right + tol) out.push_back(i);
        i = j + 1;
    }
    return out;
}

std::optional<double> first_peak_obo_db(const SweepResult& result) {
    const std::vector<int> maxima = efficiency_maxima_indices(result);
    if (maxima.empty()) return std::nullopt;
    const int first = maxima.front();
    const int last = static_cast<int>(result.points.size()) - 1;
    if (first == last) return std::nullopt;
    const double p_first = result.points[static_cast<std::size_t>(first)].p_out;
    const double p_last = result.points.back().p_out;
    if (!(p_first > 0.0) || !(p_last > 0.0)) return std::nullopt;
    return 10.0 * std::log10(p_last / p_first);
}

double efficiency_at_obo(const SweepResult& result, double target_db) {
    if (result.points.empty()) throw NumericError("empty sweep");
    const double p_ref = result.points.back().p_out;
    if (!(p_ref > 0.0)) throw NumericError("peak output power is zero; back-off undefined");
    double best_dist = std::numeric_limits<double>::infinity();
    double best_eff = 0.0;
    for (const SweepPoint& pt : result.points) {
        if (pt.failed || !(pt.p_out > 0.0)) continue;
        const double obo = 10.0 * std::log10(p_ref / pt.p_out);
        const double dist = std::abs(obo - target_db);
        if (dist < best_dist) {
            best_dist = dist;
            best_eff = pt.efficiency;
        }
    }
    if (!std::isfinite(best_dist)) {
        throw NumericError("no positive-output point; back-off undefined");
    }
    return best_eff;
}

double peak_efficiency(const SweepResult& result) {
    if (result.points.empty()) throw NumericError("empty sweep");
    return result.points.back().efficiency;
}

} // namespace halmba
