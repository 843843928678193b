#include "halmba/network.hpp"

#include <cmath>
#include <numbers>

namespace halmba {

namespace {
constexpr double kPivotThreshold = 1e-12;
}

PortExcitation PortExcitation::current_source(Phasor i) {
    return {ExcitationKind::CurrentSource, i};
}

PortExcitation PortExcitation::voltage_source(Phasor v) {
    return {ExcitationKind::VoltageSource, v};
}

PortExcitation PortExcitation::passive_load(Phasor z) {
    if (!(z.real() > 0.0)) {
        throw ConfigError("passive load impedance must have a strictly positive real part");
    }
    return {ExcitationKind::PassiveLoad, z};
}

CouplerNetwork build_ideal_coupler(double z0) {
    if (!(z0 > 0.0) || !std::isfinite(z0)) {
        throw ConfigError("coupler reference impedance z0 must be positive and finite");
    }
    const Phasor j{0.0, 1.0};
    const Phasor js2 = j * std::numbers::sqrt2;
    CouplerNetwork net;
    net.z0 = z0;
    net.z = {{{Phasor{}, Phasor{}, j, -js2},
              {Phasor{}, Phasor{}, -js2, j},
              {j, -js2, Phasor{}, Phasor{}},
              {-js2, j, Phasor{}, Phasor{}}}};
    for (auto& row : net.z) {
        for (auto& e : row) e *= z0;
    }
    return net;
}

NetworkSolution solve(const CouplerNetwork& net, const std::array<PortExcitation, 4>& ports) {
    bool any_source = false;
    for (const auto& p : ports) {
        if (p.kind != ExcitationKind::PassiveLoad) any_source = true;
    }
    if (!any_source) {
        throw ConfigError("no source: every port is a passive load");
    }

    // Row k encodes port k's boundary condition over the unknown port currents:
    //   CurrentSource: I_k = value
    //   VoltageSource: sum_m Z[k][m] I_m = value
    //   PassiveLoad:   sum_m Z[k][m] I_m + z I_k = 0   (V = -z I)
    std::array<std::array<Phasor, 5>, 4> a{};
    for (int k = 0; k < 4; ++k) {
        switch (ports[k].kind) {
            case ExcitationKind::CurrentSource:
                a[k][k] = 1.0;
                a[k][4] = ports[k].value;
                break;
            case ExcitationKind::VoltageSource:
                for (int m = 0; m < 4; ++m) a[k][m] = net.z[k][m];
                a[k][4] = ports[k].value;
                break;
            case ExcitationKind::PassiveLoad:
                for (int m = 0; m < 4; ++m) a[k][m] = net.z[k][m];
                a[k][k] += ports[k].value;
                a[k][4] = Phasor{};
                break;
        }
    }

    // Gaussian elimination with partial pivoting.
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        double best = std::abs(a[col][col]);
        for (int r = col + 1; r < 4; ++r) {
            const double mag = std::abs(a[r][col]);
            if (mag > best) {
                best = mag;
                pivot = r;
            }
        }
        if (best < kPivotThreshold) {
            throw NumericError("degenerate boundary conditions: singular port system");
        }
        if (pivot != col) std::swap(a[pivot], a[col]);
        for (int r = col + 1; r < 4; ++r) {
            const Phasor f = a[r][col] / a[col][col];
            if (f == Phasor{}) continue;
            for (int m = col; m < 5; ++m) a[r][m] -= f * a[col][m];
        }
    }

    NetworkSolution sol;
    for (int k = 3; k >= 0; --k) {
        Phasor acc = a[k][4];
        for (int m = k + 1; m < 4; ++m) acc -= a[k][m] * sol.i[m];
        sol.i[k] = acc / a[k][k];
    }
    for (int k = 0; k < 4; ++k) {
        Phasor v{};
        for (int m = 0; m < 4; ++m) v += net.z[k][m] * sol.i[m];
        sol.v[k] = v;
        sol.port_power[k] = 0.5 * (sol.v[k] * std::conj(sol.i[k])).real();
        sol.passive[k] = ports[k].kind == ExcitationKind::PassiveLoad;
        if (sol.passive[k]) {
            sol.load_power += 0.5 * std::norm(sol.i[k]) * ports[k].value.real();
        }
    }
    return sol;
}

std::optional<Phasor> port_impedance(const NetworkSolution& sol, int port, double i_eps) {
    if (port < 0 || port > 3) {
        throw ConfigError("port index out of range [0, 3]");
    }
    if (std::abs(sol.i[port]) <= i_eps) return std::nullopt;
    return sol.v[port] / sol.i[port];
}

double power_balance(const NetworkSolution& sol) {
    double source_power = 0.0;
    for (int k = 0; k < 4; ++k) {
        if (!sol.passive[k]) source_power += sol.port_power[k];
    }
    return std::abs(source_power - sol.load_power) / std::max(sol.load_power, 1e-15);
}

} // namespace halmba
