#ifndef OTTO_CYCLE_HPP
#define OTTO_CYCLE_HPP

#include <array>
#include <string>
#include <vector>

#include "otto/propagate.hpp"

namespace otto {

/// Work and heat of one cycle. Sign convention: energy flowing into the
/// working medium is positive; extracted work is -(w_com + w_exp).
struct CycleRecord {
    double w_com_sys = 0.0, w_com_tot = 0.0;
    double w_exp_sys = 0.0, w_exp_tot = 0.0;
    double q_h_sys = 0.0, q_h_tot = 0.0;
    double q_c_sys = 0.0, q_c_tot = 0.0;
    double w_ext_sys = 0.0, w_ext_tot = 0.0;
    double p_sys = 0.0, p_tot = 0.0;
    double eta_sys = 0.0, eta_tot = 0.0;
    double q_h_diss = 0.0, q_c_diss = 0.0;
    double cycle_time = 0.0;
    double dephasing_gain = 0.0; // energy left in the dephasing environment
    double energy_drift = 0.0;   // dressed energy change over the cycle
    int cycles_to_steady = 0;
};

enum class Target { Sys, Tot };
Target parse_target(const std::string& s);
const char* target_name(Target t);
double power(const CycleRecord& r, Target t);
double efficiency(const CycleRecord& r, Target t);

struct SteadyCycle {
    CycleRecord record;
    SimulationState state;        // state at the start of the returned cycle
    std::vector<double> distances; // trace distance between successive cycle starts
    bool monotone = true;
};

/// Dense-mode DAMPF engine: owns the propagator for one parameter set.
class Engine {
public:
    explicit Engine(EngineConfig cfg);
    Engine(EngineConfig cfg, Environment env, double dt);

    const EngineConfig& config() const { return prop_.config(); }
    const Propagator& propagator() const { return prop_; }
    Index cutoff() const { return prop_.env_dim() - 1; }

    void set_durations(const StrokeDurations& d) { prop_.set_durations(d); }
    SimulationState initial_state() const { return prop_.initial_state(); }

    CycleRecord run_cycle(SimulationState& st, EnergyLedger* ledger = nullptr, const StrokeOptions& opt = {}) const;

    /// Cycles until successive start states agree within numerics.cycle_tol.
    /// Throws NumericsError with the distance history when max_cycles is hit.
    SteadyCycle run_to_steady_cycle(const SimulationState* warm = nullptr) const;

private:
    Propagator prop_;
};

/// Ledger of d<H_int> + d<H_env> - dE_env over a thermal stroke, read off the record.
double dissipated_heat_measured(const CycleRecord& r, Stroke s);

std::vector<std::string> cycle_csv_header();
std::vector<double> cycle_csv_row(const CycleRecord& r);
void write_cycle_csv(const std::string& path, const std::vector<CycleRecord>& rows);

} // namespace otto

#endif
