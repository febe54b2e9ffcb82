#ifndef OTTO_PROPAGATE_HPP
#define OTTO_PROPAGATE_HPP

#include <functional>
#include <optional>
#include <vector>

#include "otto/model.hpp"

namespace otto {

/// Everything attached to the qubit: a bosonic register with its own
/// Hamiltonian, a coupling operator entering as coupling * sz(t) (x) X, and an
/// optional Markovian generator acting on the register alone.
struct Environment {
    SparseC hamiltonian;
    SparseC coupling_op;
    double coupling = 0.0;
    std::optional<CMatrix> generator;
    /// Basis states on the truncation edge and the population allowed there.
    Eigen::VectorXd edge_mask;
    double edge_threshold = 1e-6;
    std::vector<Index> site_dims;

    Index dim() const { return hamiltonian.rows(); }
};

Environment dampf_environment(const EngineConfig& cfg, Index n_max);

struct SimulationState {
    CMatrix rho; // qubit-major: 2 x env blocks
    double t = 0.0;
};

struct Energies {
    double system = 0.0;
    double interaction = 0.0;
    double environment = 0.0;
    double total() const { return system + interaction + environment; }
};

struct StepExchange {
    double work = 0.0;
    double hot = 0.0;
    double cold = 0.0;
    double env = 0.0;
};

struct LedgerSample {
    double t;
    double system;
    double interaction;
    double environment;
    double dephasing; // environment energy minus cumulative register exchange
    double hot_cum;
    double cold_cum;
    double env_cum;
    double work_cum;
    double excited_population;
};

struct EnergyLedger {
    double work = 0.0;
    double hot = 0.0;
    double cold = 0.0;
    double env = 0.0;
    long steps = 0;
    int stride = 0; // 0 disables sampling
    std::vector<LedgerSample> samples;

    void add(const StepExchange& x);
};

using Observer = std::function<void(const SimulationState&, const Eigensystem&)>;

/// Symmetric split step: half unitary, register dissipator, thermal channel,
/// half unitary. Unitaries use the midpoint Hamiltonian and are exact for it.
class Propagator {
public:
    Propagator(EngineConfig cfg, Environment env, double dt);

    double dt() const { return dt_; }
    const EngineConfig& config() const { return cfg_; }
    const Environment& environment() const { return env_; }
    Index env_dim() const { return d_; }

    /// Replaces the stroke durations; the step caches do not depend on them.
    void set_durations(const StrokeDurations& d);
    long steps_in(Stroke s) const;

    Eigensystem eigensystem(Stroke s, double local_t) const;
    void step(SimulationState& st, Stroke s, double local_t, StepExchange& out) const;

    Energies energies(const CMatrix& rho, const Eigensystem& e) const;
    double excited_population(const CMatrix& rho, const Eigensystem& e) const;
    Eigen::Matrix2cd reduced_qubit(const CMatrix& rho) const;
    CMatrix reduced_environment(const CMatrix& rho) const;
    double edge_population(const CMatrix& rho) const;

    /// Throws NumericsError on positivity or truncation failure.
    void check_state(const CMatrix& rho) const;

    SimulationState initial_state() const; // thermal qubit (cold bath) times register ground

private:
    struct Traces {
        Eigen::Matrix2cd id;
        Eigen::Matrix2cd x;
        double env = 0.0;
    };

    Traces traces(const CMatrix& rho) const;
    Energies energies(const Traces& t, const Eigen::Matrix2cd& sz, double eps) const;
    void rotate(CMatrix& rho, const Eigen::Matrix2cd& a) const; // (a x 1) rho (a x 1)^dagger
    void half_unitary(CMatrix& rho, double eps) const;
    void apply_env_map(CMatrix& rho) const;
    void apply_qubit_map(CMatrix& rho, const Eigen::Matrix4cd& g) const;

    EngineConfig cfg_;
    Environment env_;
    double dt_;
    Index d_;
    CMatrix w_plus_, w_minus_;
    SparseC env_map_;
    bool has_env_map_ = false;
    Eigen::Matrix4cd hot_map_, cold_map_;
    mutable CMatrix scratch_, scratch2_;
};

struct StrokeOptions {
    Observer observer;
    bool check_each_sample = false;
    long max_steps = -1; // stop early inside the stroke; -1 runs it to the end
};

/// Integrates one stroke; the state's clock advances by its duration.
StepExchange evolve_stroke(const Propagator& p, SimulationState& st, Stroke s, EnergyLedger& ledger,
                           const StrokeOptions& opt = {});

/// Environment energy minus the cumulative exchange with its Markovian part.
double e_deph(const LedgerSample& s);

void write_trajectory_csv(const std::string& path, const EnergyLedger& ledger);

} // namespace otto

#endif
