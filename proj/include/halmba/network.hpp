#pragma once

#include <array>
#include <complex>
#include <optional>

#include "halmba/errors.hpp"

namespace halmba {

/// Complex amplitude (normalized volts or amperes).
using Phasor = std::complex<double>;

/// Boundary-condition kind at one coupler port.
enum class ExcitationKind { CurrentSource, VoltageSource, PassiveLoad };

/// One port's boundary condition. `value` holds the source current, the
/// source voltage, or the passive load impedance depending on `kind`.
struct PortExcitation {
    ExcitationKind kind = ExcitationKind::CurrentSource;
    Phasor value{0.0, 0.0};

    static PortExcitation current_source(Phasor i);
    static PortExcitation voltage_source(Phasor v);
    /// Passive termination; requires Re(z) > 0.
    static PortExcitation passive_load(Phasor z);
};

/// Ideal output quadrature coupler as a 4-port impedance matrix.
/// Port order: 1 = load, 2 = first balanced device, 3 = control device,
/// 4 = second balanced device (indices 0..3 internally).
struct CouplerNetwork {
    double z0 = 1.0;
    std::array<std::array<Phasor, 4>, 4> z{};
};

/// Builds the ideal quadrature-coupler matrix
///   z0 * [[0,0,+j,-j*sqrt2],[0,0,-j*sqrt2,+j],[+j,-j*sqrt2,0,0],[-j*sqrt2,+j,0,0]].
/// Throws ConfigError for z0 <= 0.
CouplerNetwork build_ideal_coupler(double z0);

/// Port voltages/currents satisfying V = Z*I plus each port's boundary
/// condition. Currents flow into the network; a passive load obeys V = -z*I.
struct NetworkSolution {
    std::array<Phasor, 4> v{};
    std::array<Phasor, 4> i{};
    /// 0.5*Re(V*conj(I)) per port: power delivered into the network by the
    /// port's source (negative at absorbing ports).
    std::array<double, 4> port_power{};
    /// Power absorbed by the passive-load ports.
    double load_power = 0.0;
    std::array<bool, 4> passive{};
};

/// Solves the mixed boundary-condition problem by dense 4x4 complex Gaussian
/// elimination with partial pivoting (pivot threshold 1e-12).
/// Throws ConfigError when every port is a passive load ("no source");
/// NumericError on a degenerate system.
NetworkSolution solve(const CouplerNetwork& net, const std::array<PortExcitation, 4>& ports);

/// V/I at `port` (0-based); empty when |I| <= i_eps (device off, open circuit).
std::optional<Phasor> port_impedance(const NetworkSolution& sol, int port, double i_eps = 1e-12);

/// |sum of source-delivered powers - load power| / max(load_power, 1e-15).
double power_balance(const NetworkSolution& sol);

} // namespace halmba
