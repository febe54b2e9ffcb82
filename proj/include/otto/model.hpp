#ifndef OTTO_MODEL_HPP
#define OTTO_MODEL_HPP

#include <array>
#include <limits>
#include <string>

#include "otto/linalg.hpp"

namespace otto {

enum class Stroke { Compression = 0, Hot = 1, Expansion = 2, Cold = 3 };

inline constexpr std::array<Stroke, 4> kCycleOrder{Stroke::Compression, Stroke::Hot, Stroke::Expansion, Stroke::Cold};

const char* stroke_name(Stroke s);
inline bool is_ramp(Stroke s) { return s == Stroke::Compression || s == Stroke::Expansion; }

struct StrokeDurations {
    double compression = 0.0;
    double hot = 0.0;
    double expansion = 0.0;
    double cold = 0.0;

    double operator[](Stroke s) const;
    double& operator[](Stroke s);
    double cycle() const { return compression + hot + expansion + cold; }
    friend bool operator==(const StrokeDurations&, const StrokeDurations&) = default;
};

/// Bare splitting omega, drive amplitude rising linearly 0 -> rabi_max during
/// compression and back during expansion.
struct DriveProfile {
    double omega = 1.0;
    double rabi_max = 0.5;
    StrokeDurations durations;
};

struct ThermalBath {
    double n = 0.0;     // mean occupation at the qubit frequency of the stroke
    double gamma = 0.0; // coupling rate
};

/// Lorentzian dephasing environment. beta = +inf means zero temperature.
struct DephasingBath {
    double coupling = 0.0;  // qubit-mode coupling
    double width = 0.0;     // Lorentzian full width, also the mode damping rate
    double frequency = 0.0; // mode frequency
    double beta = std::numeric_limits<double>::infinity();
};

struct Numerics {
    double dt = 0.0;          // 0: derived from the parameters
    Index n_max = -1;         // -1: derived from the steady displacement
    double cycle_tol = 1e-6;
    int max_cycles = 20;
    double stability_bound = 0.05;
    int sample_stride = 0;    // 0: derived (about 400 samples per cycle)
};

struct ChainSettings {
    double support = 16.0;    // half-width a of the discretized support
    int sites = 16;
    int local_dim = 3;
    int max_excitations = 2;  // 0: full product basis
    double horizon = 2.0;
};

struct EngineConfig {
    DriveProfile drive;
    ThermalBath hot{0.4857, 0.5};
    ThermalBath cold{0.0524, 0.5};
    DephasingBath dephasing;
    Numerics numerics;
    ChainSettings chain;
};

double rabi(const DriveProfile& drive, double t);
double rabi_in_stroke(const DriveProfile& drive, Stroke s, double local_t);
double stroke_rabi(const DriveProfile& drive, Stroke s); // thermal strokes only

/// Energy splitting and eigenvectors of (omega sz + rabi sx) / 2. The ground
/// vector has a real non-negative amplitude on |0>.
struct Eigensystem {
    double epsilon;
    Eigen::Vector2cd ground;
    Eigen::Vector2cd excited;

    /// Unitary with columns (excited, ground); maps sz to the instantaneous sz.
    Eigen::Matrix2cd frame() const;
    Eigen::Matrix2cd sigma_z() const;
    Eigen::Matrix2cd sigma_plus() const;
    Eigen::Matrix2cd hamiltonian() const { return 0.5 * epsilon * sigma_z(); }
};

Eigensystem instantaneous_eigensystem(double omega, double rabi);

double lorentzian_sd(const DephasingBath& b, double w);
double thermalized_sd(const DephasingBath& b, double w);
double alt_sd(const DephasingBath& b, double w);
double alt_thermalized_sd(const DephasingBath& b, double w);

double mode_occupation(const DephasingBath& b);
double excited_fraction(double n); // n / (2n + 1)

/// Steady displacement of the mode conditioned on the ground branch.
cplx steady_displacement(const DephasingBath& b);
double effective_dephasing_rate(const DephasingBath& b);

/// Smallest cutoff whose coherent top level falls below 1e-8, plus 4. Zero for
/// a decoupled mode.
Index default_cutoff(const DephasingBath& b);

double max_splitting(const DriveProfile& drive);
double default_dt(const EngineConfig& cfg);
/// Power-of-two step not above default_dt, so 1/32-grid durations divide.
double grid_dt(const EngineConfig& cfg);
void check_stability(const EngineConfig& cfg, double dt);

enum class Channel { Hot, Cold, Oscillator };

/// Generator of one dissipative channel on its own tensor factor.
struct LocalGenerator {
    Channel channel;
    std::size_t factor; // 0: qubit, 1: mode
    CMatrix generator;
};

/// Thermal channels are built in the eigenbasis of their stroke and throw
/// ConfigError for ramps or the wrong bath.
LocalGenerator build_liouvillian(Channel c, const EngineConfig& cfg, Stroke s, Index n_max);

/// Dense qubit-mode Hamiltonian at cycle time t.
Operator dampf_hamiltonian(const EngineConfig& cfg, double t, Index n_max);

} // namespace otto

#endif
