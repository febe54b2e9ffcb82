#include "otto/cycle.hpp"

#include <sstream>

#include "otto/io.hpp"

namespace otto {

Target parse_target(const std::string& s)
{
    if (s == "sys")
        return Target::Sys;
    if (s == "tot")
        return Target::Tot;
    throw ConfigError("target must be 'sys' or 'tot', got '" + s + "'");
}

const char* target_name(Target t)
{
    return t == Target::Sys ? "sys" : "tot";
}

double power(const CycleRecord& r, Target t)
{
    return t == Target::Sys ? r.p_sys : r.p_tot;
}

double efficiency(const CycleRecord& r, Target t)
{
    return t == Target::Sys ? r.eta_sys : r.eta_tot;
}

namespace {

Propagator make_propagator(EngineConfig cfg)
{
    Index n_max = cfg.numerics.n_max >= 0 ? cfg.numerics.n_max : default_cutoff(cfg.dephasing);
    if (cfg.dephasing.coupling == 0.0)
        n_max = 0;
    const double dt = grid_dt(cfg);
    check_stability(cfg, dt);
    Environment env = dampf_environment(cfg, n_max);
    return Propagator(std::move(cfg), std::move(env), dt);
}

} // namespace

Engine::Engine(EngineConfig cfg) : prop_(make_propagator(std::move(cfg))) {}

Engine::Engine(EngineConfig cfg, Environment env, double dt) : prop_(std::move(cfg), std::move(env), dt) {}

CycleRecord Engine::run_cycle(SimulationState& st, EnergyLedger* ledger, const StrokeOptions& opt) const
{
    EnergyLedger local;
    EnergyLedger& led = ledger ? *ledger : local;
    const auto& drive = prop_.config().drive;
    const Eigensystem cold = instantaneous_eigensystem(drive.omega, 0.0);
    const Eigensystem hot = instantaneous_eigensystem(drive.omega, drive.rabi_max);

    // Energies at the five cycle boundaries, with the Hamiltonian valid there.
    std::array<Energies, 5> e;
    std::array<double, 4> env_x{};
    e[0] = prop_.energies(st.rho, cold);
    for (int k = 0; k < 4; ++k) {
        const Stroke s = kCycleOrder[k];
        env_x[k] = evolve_stroke(prop_, st, s, led, opt).env;
        const bool hot_side = s == Stroke::Compression || s == Stroke::Hot;
        e[k + 1] = prop_.energies(st.rho, hot_side ? hot : cold);
    }

    CycleRecord r;
    r.w_com_sys = e[1].system - e[0].system;
    r.q_h_sys = e[2].system - e[1].system;
    r.w_exp_sys = e[3].system - e[2].system;
    r.q_c_sys = e[4].system - e[3].system;
    r.w_com_tot = e[1].total() - e[0].total() - env_x[0];
    r.q_h_tot = e[2].total() - e[1].total() - env_x[1];
    r.w_exp_tot = e[3].total() - e[2].total() - env_x[2];
    r.q_c_tot = e[4].total() - e[3].total() - env_x[3];
    r.cycle_time = drive.durations.cycle();
    r.w_ext_sys = -(r.w_com_sys + r.w_exp_sys);
    r.w_ext_tot = -(r.w_com_tot + r.w_exp_tot);
    r.p_sys = r.w_ext_sys / r.cycle_time;
    r.p_tot = r.w_ext_tot / r.cycle_time;
    r.eta_sys = r.w_ext_sys / r.q_h_sys;
    r.eta_tot = r.w_ext_tot / r.q_h_tot;
    r.q_h_diss = r.q_h_tot - r.q_h_sys;
    r.q_c_diss = r.q_c_tot - r.q_c_sys;
    r.energy_drift = e[4].total() - e[0].total();
    r.dephasing_gain = e[4].environment - e[0].environment - (env_x[0] + env_x[1] + env_x[2] + env_x[3]);
    return r;
}

SteadyCycle Engine::run_to_steady_cycle(const SimulationState* warm) const
{
    const auto& num = prop_.config().numerics;
    SteadyCycle out;
    SimulationState st = warm ? *warm : initial_state();
    st.t = 0.0;
    for (int k = 1; k <= num.max_cycles; ++k) {
        SimulationState start = st;
        CycleRecord r = run_cycle(st);
        const double dist = trace_distance(start.rho, st.rho);
        if (!out.distances.empty() && dist > out.distances.back() * (1.0 + 1e-9) + 1e-12)
            out.monotone = false;
        out.distances.push_back(dist);
        if (dist < num.cycle_tol) {
            r.cycles_to_steady = k;
            out.record = r;
            out.state = start;
            return out;
        }
        st.t = 0.0;
    }
    std::ostringstream os;
    os << "no steady cycle within " << num.max_cycles << " cycles; trace distances:";
    for (double d : out.distances)
        os << ' ' << d;
    throw NumericsError(os.str());
}

double dissipated_heat_measured(const CycleRecord& r, Stroke s)
{
    if (s == Stroke::Hot)
        return r.q_h_diss;
    if (s == Stroke::Cold)
        return r.q_c_diss;
    throw ConfigError("dissipated heat is defined for thermal strokes only");
}

std::vector<std::string> cycle_csv_header()
{
    return {"w_com_sys", "w_com_tot", "w_exp_sys", "w_exp_tot", "q_h_sys", "q_h_tot", "q_c_sys", "q_c_tot",
            "w_ext_sys", "w_ext_tot", "p_sys", "p_tot", "eta_sys", "eta_tot", "q_h_diss", "q_c_diss",
            "cycles_to_steady"};
}

std::vector<double> cycle_csv_row(const CycleRecord& r)
{
    return {r.w_com_sys, r.w_com_tot, r.w_exp_sys, r.w_exp_tot, r.q_h_sys, r.q_h_tot, r.q_c_sys, r.q_c_tot,
            r.w_ext_sys, r.w_ext_tot, r.p_sys, r.p_tot, r.eta_sys, r.eta_tot, r.q_h_diss, r.q_c_diss,
            static_cast<double>(r.cycles_to_steady)};
}

void write_cycle_csv(const std::string& path, const std::vector<CycleRecord>& rows)
{
    CsvWriter csv(path, cycle_csv_header());
    for (const auto& r : rows)
        csv.row(cycle_csv_row(r));
}

} // namespace otto
