#include "halmba/reconfig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace halmba {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
/// Denominator magnitude below which a closed-form impedance is reported off.
constexpr double kDenomEps = 1e-15;

} // namespace

LoadCondition LoadCondition::from_impedance(Phasor z) {
    if (!(z.real() > 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw ConfigError("load impedance must have Re(z) > 0");
    }
    LoadCondition out;
    out.z = z;
    out.gamma = (z - 1.0) / (z + 1.0);
    return out;
}

LoadCondition LoadCondition::from_gamma(Phasor gamma) {
    if (!(std::abs(gamma) < 1.0)) {
        throw ConfigError("reflection coefficient must satisfy |gamma| < 1");
    }
    LoadCondition out;
    out.gamma = gamma;
    out.z = (1.0 + gamma) / (1.0 - gamma);
    return out;
}

std::vector<LoadCondition> vswr_circle(double vswr, double step_deg) {
    if (!std::isfinite(vswr) || !(vswr >= 1.0)) {
        throw ConfigError("vswr must be >= 1");
    }
    if (vswr == 1.0) {
        return {LoadCondition::from_impedance(Phasor(1.0, 0.0))};
    }
    if (!(step_deg > 0.0) || !std::isfinite(step_deg)) {
        throw ConfigError("phase step must be > 0 degrees");
    }
    const double ratio = 360.0 / step_deg;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * ratio) {
        throw ConfigError("phase step must divide 360 degrees");
    }
    const int n = static_cast<int>(rounded);
    const double mag = (vswr - 1.0) / (vswr + 1.0);
    std::vector<LoadCondition> loads;
    loads.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        loads.push_back(LoadCondition::from_gamma(std::polar(mag, k * step_deg * kDegToRad)));
    }
    return loads;
}

BaRole select_primary_ba(const LoadCondition& load) {
    return std::abs(load.z) <= 1.0 ? BaRole::Ba1 : BaRole::Ba2;
}

double scale_vdd(const LoadCondition& load, double v0) {
    if (!(load.z.real() > 0.0)) throw ConfigError("load impedance must have Re(z) > 0");
    return v0 * std::sqrt(1.0 / load.z.real());
}

double ca_saturation_power(Phasor z_ca, double v_dd, double z0) {
    if (!(z0 > 0.0)) throw ConfigError("z0 must be > 0");
    const double mag = std::abs(z_ca);
    if (!(mag > 0.0)) throw ConfigError("control impedance magnitude must be > 0");
    return v_dd * v_dd / (2.0 * z0) * z_ca.real() / (mag * mag);
}

namespace {

struct PhaseCandidate {
    double phi_deg = 0.0;
    double ampm = 0.0;
    double amam = 0.0;
    double eff = 0.0;
};

/// Deterministic tie-break shared by all objectives: smaller |phi| first,
/// then the positive candidate.
bool phi_preferred(double a, double b) {
    const double aa = std::abs(a);
    const double ab = std::abs(b);
    if (aa != ab) return aa < ab;
    return a > b;
}

} // namespace

PhaseOptResult optimize_phase(const ArchitectureConfig& cfg, const LoadCondition& load,
                              Objective objective, double grid_deg,
                              const PhaseOptOptions& opt) {
    if (!(grid_deg > 0.0) || !(grid_deg <= 360.0)) {
        throw ConfigError("phase grid spacing must lie in (0, 360] degrees");
    }
    if (!(opt.eff_floor >= 0.0) || !(opt.weight >= 0.0)) {
        throw ConfigError("phase search options must be >= 0");
    }
    const Phasor load_abs = load.z * cfg.net.z0;
    const int n_steps = static_cast<int>(std::ceil(360.0 / grid_deg - 1e-9));
    std::vector<PhaseCandidate> cands;
    cands.reserve(static_cast<std::size_t>(n_steps));
    for (int step = 0; step < n_steps; ++step) {
        const double phi_deg = -180.0 + step * grid_deg;
        ArchitectureConfig trial = cfg;
        trial.phi = phi_deg * kDegToRad;
        try {
            const SweepResult res = sweep(trial, load_abs);
            const LinearityProfile prof = amam_ampm(res);
            PhaseCandidate c;
            c.phi_deg = phi_deg;
            c.ampm = prof.ampm_span_deg;
            c.amam = prof.amam_span_db;
            c.eff = efficiency_at_obo(res, 10.0);
            cands.push_back(c);
        } catch (const NumericError&) {
            // unusable phase offset; leave it out of the search
        }
    }
    if (cands.empty()) {
        throw NumericError("phase search failed at every grid point");
    }

    auto value_of = [&](const PhaseCandidate& c) {
        switch (objective) {
            case Objective::AmpmSpan: return c.ampm;
            case Objective::AmamSpan: return c.amam;
            case Objective::EfficiencyAtObo: return c.eff;
            case Objective::Weighted: return c.ampm + opt.weight * c.amam;
        }
        return c.ampm;
    };

    const bool maximize = objective == Objective::EfficiencyAtObo;
    const bool floored = objective == Objective::AmpmSpan || objective == Objective::AmamSpan;
    double eff_best = -std::numeric_limits<double>::infinity();
    if (floored) {
        for (const PhaseCandidate& c : cands) eff_best = std::max(eff_best, c.eff);
    }

    const PhaseCandidate* best = nullptr;
    for (const PhaseCandidate& c : cands) {
        if (floored && c.eff < eff_best - opt.eff_floor) continue;
        if (best == nullptr) {
            best = &c;
            continue;
        }
        const double va = value_of(c);
        const double vb = value_of(*best);
        const bool improves = maximize ? va > vb : va < vb;
        if (improves || (va == vb && phi_preferred(c.phi_deg, best->phi_deg))) {
            best = &c;
        }
    }
    return {best->phi_deg, value_of(*best)};
}

ReconfigPlan plan(const LoadCondition& load, const ArchitectureConfig& cfg,
                  Objective objective, double grid_deg, const PhaseOptOptions& opt,
                  std::optional<BaRole> force_primary) {
    ReconfigPlan p;
    p.primary_ba = force_primary.value_or(select_primary_ba(load));
    p.v_dd_ca = scale_vdd(load, cfg.ca.v_dd);
    ArchitectureConfig staged = cfg;
    staged.primary_port = p.primary_ba == BaRole::Ba1 ? 2 : 4;
    staged.ca.v_dd = p.v_dd_ca;
    const PhaseOptResult r = optimize_phase(staged, load, objective, grid_deg, opt);
    p.phi = r.phi_star_deg * kDegToRad;
    return p;
}

ArchitectureConfig apply_plan(const ReconfigPlan& p, const ArchitectureConfig& base) {
    ArchitectureConfig cfg = base;
    cfg.primary_port = p.primary_ba == BaRole::Ba1 ? 2 : 4;
    cfg.ca.v_dd = p.v_dd_ca;
    cfg.phi = p.phi;
    return cfg;
}

PlanMetrics evaluate_plan(const ReconfigPlan& p, const LoadCondition& load,
                          const ArchitectureConfig& base) {
    const ArchitectureConfig cfg = apply_plan(p, base);
    const SweepResult res = sweep(cfg, load.z * cfg.net.z0);
    const LinearityProfile prof = amam_ampm(res);
    PlanMetrics m;
    m.first_peak_obo_db = first_peak_obo_db(res);
    m.efficiency_at_10db_obo = efficiency_at_obo(res, 10.0);
    m.peak_efficiency = peak_efficiency(res);
    m.amam_span_db = prof.amam_span_db;
    m.ampm_span_deg = prof.ampm_span_deg;
    m.clipping_count = clipping_count(res);
    return m;
}

MismatchImpedances mismatch_closed_forms(const LoadCondition& load, double z0,
                                         const MismatchSources& src, Region region) {
    if (!(z0 > 0.0)) throw ConfigError("z0 must be > 0");
    const Phasor zl = load.z;
    const double s2 = std::numbers::sqrt2;
    MismatchImpedances out;
    auto guarded_div = [](Phasor num, Phasor den) -> std::optional<Phasor> {
        if (std::abs(den) < kDenomEps) return std::nullopt;
        return num / den;
    };

    switch (region) {
        case Region::LowPower:
            out.z_ca = guarded_div(Phasor(1.0, 0.0), zl);
            break;
        case Region::Doherty:
            if (src.v_ca && src.i_b1 > 0.0) {
                const double v = *src.v_ca;
                out.z_ba1 = s2 * v * zl / (z0 * src.i_b1) + 2.0 * zl;
                out.z_ca = guarded_div(Phasor(v, 0.0), v * zl + s2 * z0 * zl * src.i_b1);
            }
            if (src.i_c && src.i_b2 > 0.0) {
                out.z_ba2 = guarded_div(Phasor(s2 * *src.i_c / src.i_b2 + 2.0, 0.0), zl);
            }
            if (!out.z_ca && src.v_ca && src.i_b2 > 0.0) {
                const double v = *src.v_ca;
                out.z_ca =
                    guarded_div(Phasor(v, 0.0), v * zl - Phasor(s2 * z0 * src.i_b2, 0.0));
            }
            break;
        case Region::Almba:
            if (src.v_ca && src.i_b1 > 0.0) {
                const double v = *src.v_ca;
                out.z_ba1 =
                    s2 * v * zl / (z0 * src.i_b1) + 2.0 * zl - Phasor(src.i_b2 / src.i_b1, 0.0);
            }
            if (src.i_c && src.i_b2 > 0.0) {
                const auto inv = guarded_div(Phasor(s2 * *src.i_c / src.i_b2 + 2.0, 0.0), zl);
                if (inv) out.z_ba2 = *inv - Phasor(src.i_b1 / src.i_b2, 0.0);
            }
            if (src.v_ca) {
                const double v = *src.v_ca;
                out.z_ca = guarded_div(
                    Phasor(v, 0.0), v * zl - s2 * z0 * (Phasor(src.i_b2, 0.0) - zl * src.i_b1));
            }
            break;
    }
    return out;
}

namespace {

/// Exact Chebyshev fit of y_i ~ theta*x_i over indices [lo, hi]: the optimal
/// theta equalizes the extreme residuals of some index pair, so scanning the
/// pairwise candidates (y_i + y_j)/(x_i + x_j) is exhaustive.
struct SegmentFit {
    double theta = 0.0;
    double err = 0.0;
};

SegmentFit fit_segment(const std::vector<double>& x, const std::vector<double>& y, int lo,
                       int hi) {
    SegmentFit best;
    best.err = std::numeric_limits<double>::infinity();
    for (int a = lo; a <= hi; ++a) {
        for (int b = a; b <= hi; ++b) {
            const double theta = (y[static_cast<std::size_t>(a)] + y[static_cast<std::size_t>(b)]) /
                                 (x[static_cast<std::size_t>(a)] + x[static_cast<std::size_t>(b)]);
            double err = 0.0;
            for (int k = lo; k <= hi; ++k) {
                err = std::max(err, std::abs(theta * x[static_cast<std::size_t>(k)] -
                                             y[static_cast<std::size_t>(k)]));
            }
            if (err < best.err) {
                best.theta = theta;
                best.err = err;
            }
        }
    }
    return best;
}

} // namespace

PhaseFitResult tl_phase_fit(const std::vector<TlFitPoint>& points, int k_segments,
                            double ref_freq) {
    const int n = static_cast<int>(points.size());
    if (k_segments < 1) throw ConfigError("segment count must be >= 1");
    if (n < k_segments + 1) {
        throw ConfigError("piecewise fit needs at least k_segments + 1 points");
    }
    if (!(ref_freq > 0.0)) throw ConfigError("reference frequency must be > 0");
    for (int k = 0; k < n; ++k) {
        if (!(points[static_cast<std::size_t>(k)].freq > 0.0)) {
            throw ConfigError("frequencies must be positive");
        }
        if (k > 0 && !(points[static_cast<std::size_t>(k)].freq >
                       points[static_cast<std::size_t>(k - 1)].freq)) {
            throw ConfigError("frequencies must be strictly increasing");
        }
    }

    // A line of electrical length theta contributes phase -theta*(f/ref), so
    // fit y = -phi against x = f/ref.
    std::vector<double> x(static_cast<std::size_t>(n));
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        x[static_cast<std::size_t>(k)] = points[static_cast<std::size_t>(k)].freq / ref_freq;
        y[static_cast<std::size_t>(k)] = -points[static_cast<std::size_t>(k)].phi_deg;
    }

    // seg[i][j]: exact minimax error/slope for the contiguous group [i, j].
    std::vector<std::vector<SegmentFit>> seg(static_cast<std::size_t>(n),
                                             std::vector<SegmentFit>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            seg[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                fit_segment(x, y, i, j);
        }
    }

    // dp[s][j]: best global max error using s+1 segments over points [0, j];
    // the first minimizing split is kept, so results are deterministic.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dp(static_cast<std::size_t>(k_segments),
                                        std::vector<double>(static_cast<std::size_t>(n), inf));
    std::vector<std::vector<int>> start(static_cast<std::size_t>(k_segments),
                                        std::vector<int>(static_cast<std::size_t>(n), 0));
    for (int j = 0; j < n; ++j) {
        dp[0][static_cast<std::size_t>(j)] = seg[0][static_cast<std::size_t>(j)].err;
    }
    for (int s = 1; s < k_segments; ++s) {
        for (int j = s; j < n; ++j) {
            for (int t = s; t <= j; ++t) {
                const double cost =
                    std::max(dp[static_cast<std::size_t>(s - 1)][static_cast<std::size_t>(t - 1)],
                             seg[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)].err);
                if (cost < dp[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)]) {
                    dp[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] = cost;
                    start[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] = t;
                }
            }
        }
    }

    std::vector<int> starts(static_cast<std::size_t>(k_segments), 0);
    int j = n - 1;
    for (int s = k_segments - 1; s >= 1; --s) {
        starts[static_cast<std::size_t>(s)] = start[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)];
        j = starts[static_cast<std::size_t>(s)] - 1;
    }

    PhaseFitResult out;
    out.segment_start_index = starts;
    out.max_abs_error_deg = 0.0;
    for (int s = 0; s < k_segments; ++s) {
        const int lo = starts[static_cast<std::size_t>(s)];
        const int hi = s + 1 < k_segments ? starts[static_cast<std::size_t>(s + 1)] - 1 : n - 1;
        const SegmentFit& fit = seg[static_cast<std::size_t>(lo)][static_cast<std::size_t>(hi)];
        TlSegment ts;
        ts.freq_lo = lo == 0 ? points.front().freq
                             : 0.5 * (points[static_cast<std::size_t>(lo - 1)].freq +
                                      points[static_cast<std::size_t>(lo)].freq);
        ts.freq_hi = hi == n - 1 ? points.back().freq
                                 : 0.5 * (points[static_cast<std::size_t>(hi)].freq +
                                          points[static_cast<std::size_t>(hi + 1)].freq);
        ts.electrical_length_deg = fit.theta;
        ts.max_abs_error_deg = fit.err;
        out.segments.push_back(ts);
        out.max_abs_error_deg = std::max(out.max_abs_error_deg, fit.err);
    }
    return out;
}

} // namespace halmba
