#include "otto/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "otto/io.hpp"

namespace otto {

Environment dampf_environment(const EngineConfig& cfg, Index n_max)
{
    const auto& d = cfg.dephasing;
    const Index dim = n_max + 1;
    HilbertLayout({2, dim}); // enforces the dimension cap
    Environment env;
    CMatrix b = annihilation(dim);
    env.hamiltonian = (d.frequency * number_operator(dim)).sparseView();
    env.coupling_op = CMatrix(b + b.adjoint()).sparseView();
    env.coupling = d.coupling;
    if (dim > 1)
        env.generator = build_liouvillian(Channel::Oscillator, cfg, Stroke::Hot, n_max).generator;
    env.edge_mask = Eigen::VectorXd::Zero(dim);
    if (dim > 1)
        env.edge_mask(dim - 1) = 1.0;
    env.edge_threshold = 1e-6;
    env.site_dims = {dim};
    return env;
}

void EnergyLedger::add(const StepExchange& x)
{
    work += x.work;
    hot += x.hot;
    cold += x.cold;
    env += x.env;
}

namespace {

Eigen::Matrix4cd qubit_map(const ThermalBath& bath, double dt)
{
    // Frame basis: |0> excited, |1> ground.
    CMatrix sm = CMatrix::Zero(2, 2);
    sm(1, 0) = 1.0;
    std::vector<JumpOperator> jumps{{bath.gamma * (bath.n + 1.0), sm}, {bath.gamma * bath.n, sm.adjoint()}};
    CMatrix gen = lindblad_generator(CMatrix::Zero(2, 2), jumps);
    return Eigen::Matrix4cd((gen * dt).exp());
}

} // namespace

Propagator::Propagator(EngineConfig cfg, Environment env, double dt)
    : cfg_(std::move(cfg)), env_(std::move(env)), dt_(dt), d_(env_.dim())
{
    HilbertLayout({2, d_});
    const double h2 = 0.5 * dt_;
    CMatrix hb = CMatrix(env_.hamiltonian);
    CMatrix x = CMatrix(env_.coupling_op);
    w_plus_ = unitary(hb + env_.coupling * x, h2);
    w_minus_ = unitary(hb - env_.coupling * x, h2);
    if (env_.generator) {
        env_map_ = propagator_map(*env_.generator, dt_);
        has_env_map_ = true;
    }
    hot_map_ = qubit_map(cfg_.hot, dt_);
    cold_map_ = qubit_map(cfg_.cold, dt_);
    set_durations(cfg_.drive.durations);
}

void Propagator::set_durations(const StrokeDurations& d)
{
    cfg_.drive.durations = d;
    for (Stroke s : kCycleOrder)
        steps_in(s);
}

long Propagator::steps_in(Stroke s) const
{
    const double tau = cfg_.drive.durations[s];
    if (tau < 0.0)
        throw ConfigError(std::string("negative duration for the ") + stroke_name(s) + " stroke");
    const double n = std::round(tau / dt_);
    if (std::abs(n * dt_ - tau) > 1e-9 * std::max(1.0, tau)) {
        std::ostringstream os;
        os << "time step " << dt_ << " does not divide the " << stroke_name(s) << " duration " << tau;
        throw ConfigError(os.str());
    }
    return static_cast<long>(n);
}

Eigensystem Propagator::eigensystem(Stroke s, double local_t) const
{
    return instantaneous_eigensystem(cfg_.drive.omega, rabi_in_stroke(cfg_.drive, s, local_t));
}

Propagator::Traces Propagator::traces(const CMatrix& rho) const
{
    Traces t;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            auto blk = rho.block(a * d_, b * d_, d_, d_);
            t.id(a, b) = blk.trace();
            cplx acc = 0.0;
            for (Index k = 0; k < env_.coupling_op.outerSize(); ++k)
                for (SparseC::InnerIterator it(env_.coupling_op, k); it; ++it)
                    acc += it.value() * blk(it.col(), it.row());
            t.x(a, b) = acc;
        }
    cplx e = 0.0;
    for (Index k = 0; k < env_.hamiltonian.outerSize(); ++k)
        for (SparseC::InnerIterator it(env_.hamiltonian, k); it; ++it)
            e += it.value() * (rho(it.col(), it.row()) + rho(d_ + it.col(), d_ + it.row()));
    t.env = e.real();
    return t;
}

Energies Propagator::energies(const Traces& t, const Eigen::Matrix2cd& sz, double eps) const
{
    Energies e;
    e.system = 0.5 * eps * (sz * t.id).trace().real();
    e.interaction = env_.coupling * (sz * t.x).trace().real();
    e.environment = t.env;
    return e;
}

Energies Propagator::energies(const CMatrix& rho, const Eigensystem& e) const
{
    return energies(traces(rho), e.sigma_z(), e.epsilon);
}

double Propagator::excited_population(const CMatrix& rho, const Eigensystem& e) const
{
    return (e.excited.adjoint() * reduced_qubit(rho) * e.excited)(0, 0).real();
}

Eigen::Matrix2cd Propagator::reduced_qubit(const CMatrix& rho) const
{
    Eigen::Matrix2cd r;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            r(a, b) = rho.block(a * d_, b * d_, d_, d_).trace();
    return r;
}

CMatrix Propagator::reduced_environment(const CMatrix& rho) const
{
    return rho.topLeftCorner(d_, d_) + rho.bottomRightCorner(d_, d_);
}

double Propagator::edge_population(const CMatrix& rho) const
{
    Eigen::VectorXd pop = (rho.topLeftCorner(d_, d_).diagonal() + rho.bottomRightCorner(d_, d_).diagonal()).real();
    return pop.dot(env_.edge_mask);
}

void Propagator::check_state(const CMatrix& rho) const
{
    CMatrix h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff();
    if (lo < -1e-6) {
        std::ostringstream os;
        os << "positivity lost: minimum eigenvalue " << lo;
        throw NumericsError(os.str());
    }
    double edge = edge_population(rho);
    if (edge > env_.edge_threshold) {
        std::ostringstream os;
        os << "truncation exceeded: population " << edge << " on the register cutoff (threshold "
           << env_.edge_threshold << ")";
        throw NumericsError(os.str());
    }
}

SimulationState Propagator::initial_state() const
{
    Eigensystem e = instantaneous_eigensystem(cfg_.drive.omega, 0.0);
    const double pe = excited_fraction(cfg_.cold.n);
    Eigen::Matrix2cd q = pe * e.excited * e.excited.adjoint() + (1.0 - pe) * e.ground * e.ground.adjoint();
    CMatrix vac = CMatrix::Zero(d_, d_);
    vac(0, 0) = 1.0;
    return {tensor(CMatrix(q), vac), 0.0};
}

void Propagator::rotate(CMatrix& rho, const Eigen::Matrix2cd& a) const
{
    const Index n = 2 * d_;
    CMatrix t(n, n);
    t.topRows(d_) = a(0, 0) * rho.topRows(d_) + a(0, 1) * rho.bottomRows(d_);
    t.bottomRows(d_) = a(1, 0) * rho.topRows(d_) + a(1, 1) * rho.bottomRows(d_);
    rho.leftCols(d_) = std::conj(a(0, 0)) * t.leftCols(d_) + std::conj(a(0, 1)) * t.rightCols(d_);
    rho.rightCols(d_) = std::conj(a(1, 0)) * t.leftCols(d_) + std::conj(a(1, 1)) * t.rightCols(d_);
}

void Propagator::half_unitary(CMatrix& rho, double eps) const
{
    const cplx ph = std::exp(-I_unit * eps * 0.5 * dt_);
    CMatrix top(d_, 2 * d_), bot(d_, 2 * d_);
    top.noalias() = w_plus_ * rho.topRows(d_);
    bot.noalias() = w_minus_ * rho.bottomRows(d_);
    rho.block(0, 0, d_, d_).noalias() = top.leftCols(d_) * w_plus_.adjoint();
    rho.block(0, d_, d_, d_).noalias() = ph * (top.rightCols(d_) * w_minus_.adjoint());
    rho.block(d_, 0, d_, d_).noalias() = std::conj(ph) * (bot.leftCols(d_) * w_plus_.adjoint());
    rho.block(d_, d_, d_, d_).noalias() = bot.rightCols(d_) * w_minus_.adjoint();
}

void Propagator::apply_env_map(CMatrix& rho) const
{
    CMatrix blk(d_, d_);
    CVector out(d_ * d_);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            blk = rho.block(a * d_, b * d_, d_, d_);
            out.noalias() = env_map_ * Eigen::Map<const CVector>(blk.data(), blk.size());
            rho.block(a * d_, b * d_, d_, d_) = Eigen::Map<const CMatrix>(out.data(), d_, d_);
        }
}

void Propagator::apply_qubit_map(CMatrix& rho, const Eigen::Matrix4cd& g) const
{
    // vec index of block (a, b) is a + 2 b.
    const CMatrix b00 = rho.block(0, 0, d_, d_), b10 = rho.block(d_, 0, d_, d_);
    const CMatrix b01 = rho.block(0, d_, d_, d_), b11 = rho.block(d_, d_, d_, d_);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const int r = a + 2 * b;
            rho.block(a * d_, b * d_, d_, d_) = g(r, 0) * b00 + g(r, 1) * b10 + g(r, 2) * b01 + g(r, 3) * b11;
        }
}

void Propagator::step(SimulationState& st, Stroke s, double local_t, StepExchange& out) const
{
    static const Eigen::Matrix2cd sz0 = (Eigen::Matrix2cd() << 1.0, 0.0, 0.0, -1.0).finished();
    const Eigensystem ea = eigensystem(s, local_t);
    const Eigensystem em = eigensystem(s, local_t + 0.5 * dt_);
    const Eigensystem eb = eigensystem(s, local_t + dt_);
    const Eigen::Matrix2cd sza = ea.sigma_z(), szm = em.sigma_z(), szb = eb.sigma_z();

    Traces t = traces(st.rho);
    out = {};
    out.work = energies(t, szm, em.epsilon).total() - energies(t, sza, ea.epsilon).total();

    const Eigen::Matrix2cd r = em.frame();
    rotate(st.rho, r.adjoint());
    half_unitary(st.rho, em.epsilon);
    const bool thermal = s == Stroke::Hot || s == Stroke::Cold;
    const Eigen::Matrix4cd& qubit_map = s == Stroke::Hot ? hot_map_ : cold_map_;
    const double e0 = energies(traces(st.rho), sz0, em.epsilon).total();
    if (has_env_map_ && thermal) {
        // The two maps act on different factors and commute. Each channel is
        // credited with the mean of its increments in both orders, which keeps
        // the split between them second order.
        scratch2_ = st.rho;
        apply_qubit_map(scratch2_, qubit_map);
        const double e_qubit_first = energies(traces(scratch2_), sz0, em.epsilon).total();
        apply_env_map(st.rho);
        const double e_env_first = energies(traces(st.rho), sz0, em.epsilon).total();
        apply_qubit_map(st.rho, qubit_map);
        const double e_both = energies(traces(st.rho), sz0, em.epsilon).total();
        out.env = 0.5 * ((e_env_first - e0) + (e_both - e_qubit_first));
        (s == Stroke::Hot ? out.hot : out.cold) = (e_both - e0) - out.env;
    } else if (has_env_map_) {
        apply_env_map(st.rho);
        out.env = energies(traces(st.rho), sz0, em.epsilon).total() - e0;
    } else if (thermal) {
        apply_qubit_map(st.rho, qubit_map);
        (s == Stroke::Hot ? out.hot : out.cold) = energies(traces(st.rho), sz0, em.epsilon).total() - e0;
    }
    half_unitary(st.rho, em.epsilon);
    rotate(st.rho, r);

    t = traces(st.rho);
    out.work += energies(t, szb, eb.epsilon).total() - energies(t, szm, em.epsilon).total();
    st.t += dt_;
}

namespace {

void record_sample(const Propagator& p, const SimulationState& st, const Eigensystem& e, EnergyLedger& ledger)
{
    Energies en = p.energies(st.rho, e);
    LedgerSample s{};
    s.t = st.t;
    s.system = en.system;
    s.interaction = en.interaction;
    s.environment = en.environment;
    s.dephasing = en.environment - ledger.env;
    s.hot_cum = ledger.hot;
    s.cold_cum = ledger.cold;
    s.env_cum = ledger.env;
    s.work_cum = ledger.work;
    s.excited_population = p.excited_population(st.rho, e);
    ledger.samples.push_back(s);
}

} // namespace

StepExchange evolve_stroke(const Propagator& p, SimulationState& st, Stroke s, EnergyLedger& ledger,
                           const StrokeOptions& opt)
{
    const long n = opt.max_steps >= 0 ? std::min(opt.max_steps, p.steps_in(s)) : p.steps_in(s);
    const double t0 = st.t;
    const double dt = p.dt();
    if (ledger.stride > 0 && ledger.samples.empty()) {
        Eigensystem e = p.eigensystem(s, 0.0);
        record_sample(p, st, e, ledger);
        if (opt.observer)
            opt.observer(st, e);
    }
    StepExchange total;
    StepExchange x;
    for (long k = 0; k < n; ++k) {
        p.step(st, s, k * dt, x);
        ledger.add(x);
        total.work += x.work;
        total.hot += x.hot;
        total.cold += x.cold;
        total.env += x.env;
        ++ledger.steps;
        if (ledger.stride > 0 && ledger.steps % ledger.stride == 0) {
            st.t = t0 + (k + 1) * dt;
            Eigensystem e = p.eigensystem(s, (k + 1) * dt);
            record_sample(p, st, e, ledger);
            if (opt.observer)
                opt.observer(st, e);
            if (opt.check_each_sample)
                p.check_state(st.rho);
        }
    }
    st.t = t0 + n * dt;
    p.check_state(st.rho);
    return total;
}

double e_deph(const LedgerSample& s)
{
    return s.environment - s.env_cum;
}

void write_trajectory_csv(const std::string& path, const EnergyLedger& ledger)
{
    CsvWriter csv(path, {"t", "H_S", "H_int", "H_osc", "E_deph", "dE_hot_cum", "dE_cold_cum", "dE_osc_cum", "p_e_inst"});
    for (const auto& s : ledger.samples)
        csv.row({s.t, s.system, s.interaction, s.environment, s.dephasing, s.hot_cum, s.cold_cum, s.env_cum,
                 s.excited_population});
}

} // namespace otto
