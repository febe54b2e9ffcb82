#ifndef OTTO_ANALYSIS_HPP
#define OTTO_ANALYSIS_HPP

#include <functional>
#include <vector>

#include "otto/cycle.hpp"

namespace otto {

/// A spectral density on the real line with the hints the quadratures need:
/// peak locations and the scale over which the peaks vary.
struct SpectralDensity {
    std::function<double(double)> value;
    std::vector<double> peaks;
    double width = 1.0;
};

SpectralDensity lorentzian(const DephasingBath& b);
SpectralDensity thermalized(const DephasingBath& b);
SpectralDensity alt_lorentzian(const DephasingBath& b);
SpectralDensity alt_thermalized(const DephasingBath& b);

struct Quadrature {
    double value;
    double error;
};

/// -(4/pi) int J(w) (1 - cos w t) / w^2 dw over the real line.
Quadrature decoherence_function(const SpectralDensity& j, double t);

/// Least-squares slope of the decoherence function sampled on [t0, t1].
double decoherence_slope(const SpectralDensity& j, double t0, double t1, int samples = 11);

/// (2/pi) PV int J(w) / w dw.
Quadrature decoupling_energy(const SpectralDensity& j);
double decoupling_energy(const DephasingBath& b); // closed form for the Lorentzian

/// |(2/pi) PV int J(w) cos(w tau) / w dw|.
Quadrature recoupling_bound(const SpectralDensity& j, double tau);

/// Stationary qubit (x) mode state under the Hamiltonian, mode damping and
/// thermal bath of a thermal stroke (qubit-major, cutoff n_max).
CMatrix thermal_stroke_steady_state(const EngineConfig& cfg, Stroke s, Index n_max);

/// Decouples the mode from the steady coupled state of a thermal stroke,
/// evolves for tau, and returns the interaction energy with the coupling
/// restored. At tau = 0 this is the steady interaction energy.
double recoupling_energy_measured(const EngineConfig& cfg, Stroke s, double tau);

/// Mode displacement of the ground branch from the steady state of the
/// branch Lindbladian, solved numerically on a Fock cutoff.
cplx steady_displacement_numeric(const DephasingBath& b, Index n_max);

struct ConditionalMode {
    double p_e = 0.0, p_g = 0.0;
    cplx alpha_e, alpha_g;
    double fidelity_e = 0.0, fidelity_g = 0.0; // <alpha_x| rho_x |alpha_x>
};

/// Mode states conditioned on the instantaneous qubit eigenstates of a
/// qubit (x) mode density matrix. Throws NumericsError if a branch is empty.
ConditionalMode conditional_oscillator_analysis(const CMatrix& rho, Index mode_dim, const Eigensystem& e);

/// p_e |e><e| (x) |-alpha><-alpha| + p_g |g><g| (x) |alpha><alpha|.
CMatrix ansatz_state(double p_e, cplx alpha, const Eigensystem& e, Index n_max);

struct HeatBounds {
    double lower;
    double upper;
};

/// Bounds on the heat passed from the bath of a thermal stroke to the
/// dephasing environment during that stroke.
HeatBounds dissipated_heat_bounds(const EngineConfig& cfg, Stroke s);

struct DifferentialFlows {
    double system;
    double interaction;
};

DifferentialFlows differential_flows(double p_e, cplx alpha, double eps, const ThermalBath& bath, double coupling);

struct QuasistaticCycle {
    double w_com, w_exp, q_h, q_c, w_ext, eta;
};

/// Ideal Otto cycle from tanh arguments x = eps / (2T) of the two baths.
QuasistaticCycle quasistatic(double eps_c, double eps_h, double x_c, double x_h);
double polarization_argument(double n); // artanh(1 / (2n + 1))
double implied_temperature(double n, double eps);
double carnot_efficiency(double temperature_ratio);
double curzon_ahlborn_efficiency(double temperature_ratio);

struct ConstantPowerPoint {
    double frequency;
    double critical_width;
};

/// Mode frequency that keeps the effective dephasing rate of (width_bar,
/// frequency_bar) at fixed coupling when the width changes to @p width.
ConstantPowerPoint scaling_constant_power(double width_bar, double frequency_bar, double width);

/// Speeds the engine up by lambda at fixed efficiency.
EngineConfig scaling_constant_efficiency(const EngineConfig& base, double lambda);

} // namespace otto

#endif
