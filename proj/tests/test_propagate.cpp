#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "otto/config.hpp"
#include "otto/cycle.hpp"
#include "otto/propagate.hpp"

using namespace otto;

namespace {

Propagator make(const EngineConfig& cfg, double dt, Index n_max = -1)
{
    const Index n = n_max >= 0 ? n_max : (cfg.dephasing.coupling == 0.0 ? 0 : default_cutoff(cfg.dephasing));
    return Propagator(cfg, dampf_environment(cfg, n), dt);
}

double total_energy(const Propagator& p, const CMatrix& rho, const Eigensystem& e)
{
    return p.energies(rho, e).total();
}

double purity(const CMatrix& rho)
{
    return (rho * rho).trace().real();
}

} // namespace

TEST_CASE("mode damping shrinks the displacement by exp(-width dt / 2)")
{
    EngineConfig cfg = preset("fig2");
    const Index n = 14;
    const double dt = 0.01;
    LocalGenerator g = build_liouvillian(Channel::Oscillator, cfg, Stroke::Hot, n);
    SparseC map = propagator_map(g.generator, dt);
    const cplx alpha(0.4, -0.3);
    CMatrix rho = coherent_state(alpha, n).matrix();
    CMatrix out = unvec(map * vec(rho), n + 1);
    CMatrix b = annihilation(n + 1);
    const cplx before = (b * rho).trace(), after = (b * out).trace();
    CHECK(std::abs(after - before * std::exp(-0.5 * cfg.dephasing.width * dt)) < 1e-8);
}

TEST_CASE("a zero-rate thermal channel leaves the state and the ledger untouched")
{
    EngineConfig cfg = preset("paper-4.1");
    cfg.hot.gamma = 0.0;
    cfg.drive.durations.hot = 1.0;
    Propagator p = make(cfg, 1.0 / 64.0);
    SimulationState st = p.initial_state();
    const CMatrix rho0 = st.rho;
    EnergyLedger ledger;
    StepExchange x = evolve_stroke(p, st, Stroke::Hot, ledger);
    CHECK(x.hot == 0.0);
    // The state is diagonal in the cold basis, so the hot Hamiltonian rotates it.
    CHECK(std::abs(st.rho.trace() - 1.0) < 1e-12);
    CHECK(std::abs(purity(st.rho) - purity(rho0)) < 1e-12);
}

TEST_CASE("the hot channel exchanges no energy with its own fixed point")
{
    EngineConfig cfg = preset("paper-4.1");
    cfg.drive.durations.hot = 1.0;
    Propagator p = make(cfg, 1.0 / 64.0);
    const Eigensystem e = p.eigensystem(Stroke::Hot, 0.0);
    const double pe = excited_fraction(cfg.hot.n);
    SimulationState st;
    st.rho = pe * e.excited * e.excited.adjoint() + (1.0 - pe) * e.ground * e.ground.adjoint();
    StepExchange x;
    p.step(st, Stroke::Hot, 0.0, x);
    CHECK(std::abs(x.hot) < 1e-10);
    CHECK(std::abs(x.work) < 1e-14);
}

TEST_CASE("constant Hamiltonian without dissipation is exactly unitary")
{
    EngineConfig cfg = preset("fig2");
    cfg.hot.gamma = 0.0;
    cfg.dephasing.width = 0.0; // no mode damping
    Propagator p = make(cfg, 1.0 / 512.0, 6);
    SimulationState st = p.initial_state();
    const Eigensystem e = p.eigensystem(Stroke::Hot, 0.0);
    const double e0 = total_energy(p, st.rho, e), p0 = purity(st.rho);
    StepExchange x;
    for (int k = 0; k < 200; ++k) {
        const double before = total_energy(p, st.rho, e);
        p.step(st, Stroke::Hot, k / 512.0, x);
        CHECK(std::abs(total_energy(p, st.rho, e) - before) < 1e-12);
    }
    CHECK(std::abs(total_energy(p, st.rho, e) - e0) < 1e-10);
    CHECK(std::abs(purity(st.rho) - p0) < 1e-10);
}

TEST_CASE("ledger closes at every sample of a compression stroke")
{
    EngineConfig cfg = preset("fig2");
    Engine engine(cfg);
    const Propagator& p = engine.propagator();
    SimulationState st = p.initial_state();
    EnergyLedger ledger;
    ledger.stride = 1;
    evolve_stroke(p, st, Stroke::Compression, ledger);
    REQUIRE(ledger.samples.size() == static_cast<std::size_t>(p.steps_in(Stroke::Compression) + 1));
    const auto& s0 = ledger.samples.front();
    const double e0 = s0.system + s0.interaction + s0.environment;
    double scale = 0.0, worst = 0.0;
    for (const auto& s : ledger.samples) {
        const double de = s.system + s.interaction + s.environment - e0;
        const double exchanged = s.work_cum + s.hot_cum + s.cold_cum + s.env_cum;
        scale = std::max({scale, std::abs(de), std::abs(s.work_cum)});
        worst = std::max(worst, std::abs(de - exchanged));
    }
    CHECK(scale > 0.01);
    CHECK(worst < 1e-10 * scale);
}

TEST_CASE("dephasing energy starts at zero and vanishes without coupling")
{
    EngineConfig cfg = preset("fig2");
    cfg.dephasing.coupling = 0.0;
    Engine engine(cfg);
    SimulationState st = engine.initial_state();
    EnergyLedger ledger;
    ledger.stride = 8;
    engine.run_cycle(st, &ledger);
    CHECK(e_deph(ledger.samples.front()) == 0.0);
    for (const auto& s : ledger.samples)
        CHECK(e_deph(s) == 0.0);
}

TEST_CASE("dephasing energy grows during the thermal strokes of the first cycle")
{
    EngineConfig cfg = preset("fig2");
    Engine engine(cfg);
    SimulationState st = engine.initial_state();
    EnergyLedger ledger;
    ledger.stride = 16;
    engine.run_cycle(st, &ledger);
    CHECK(std::abs(e_deph(ledger.samples.front())) < 1e-15);
    auto monotone_in = [&](double t0, double t1) {
        double prev = -INFINITY;
        int count = 0;
        for (const auto& s : ledger.samples) {
            if (s.t < t0 || s.t > t1)
                continue;
            if (e_deph(s) < prev - 1e-12)
                return false;
            prev = e_deph(s);
            ++count;
        }
        return count > 10;
    };
    CHECK(monotone_in(2.0, 4.0));
    CHECK(monotone_in(6.0, 8.0));
    CHECK(e_deph(ledger.samples.back()) > 0.0);
}

TEST_CASE("cold stroke from the cold fixed point changes nothing without coupling")
{
    EngineConfig cfg = preset("paper-4.1");
    Propagator p = make(cfg, 1.0 / 64.0);
    SimulationState st = p.initial_state();
    const CMatrix rho0 = st.rho;
    EnergyLedger ledger;
    StepExchange x = evolve_stroke(p, st, Stroke::Cold, ledger);
    CHECK((st.rho - rho0).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(x.cold) < 1e-12);
    CHECK(st.t == doctest::Approx(cfg.drive.durations.cold));
}

TEST_CASE("a long hot stroke thermalizes the qubit")
{
    EngineConfig cfg = preset("paper-4.1");
    cfg.drive.durations.hot = 100.0;
    Propagator p = make(cfg, 1.0 / 64.0);
    SimulationState st = p.initial_state();
    EnergyLedger ledger;
    evolve_stroke(p, st, Stroke::Hot, ledger);
    const double pe = p.excited_population(st.rho, p.eigensystem(Stroke::Hot, 0.0));
    CHECK(std::abs(pe - 0.4857 / (2.0 * 0.4857 + 1.0)) < 1e-6);
}

TEST_CASE("a slow compression keeps the instantaneous populations")
{
    EngineConfig cfg = preset("paper-4.1");
    cfg.drive.durations.compression = 200.0;
    Propagator p = make(cfg, 1.0 / 64.0);
    SimulationState st = p.initial_state();
    const double before = p.excited_population(st.rho, p.eigensystem(Stroke::Compression, 0.0));
    EnergyLedger ledger;
    evolve_stroke(p, st, Stroke::Compression, ledger);
    const double after = p.excited_population(st.rho, p.eigensystem(Stroke::Compression, 200.0));
    CHECK(std::abs(after - before) < 1e-4);
}

TEST_CASE("the split step converges at second order")
{
    EngineConfig cfg = preset("fig2");
    cfg.drive.durations = {2.0, 2.0, 2.0, 2.0};
    auto run = [&](double dt) {
        Propagator p = make(cfg, dt);
        SimulationState st = p.initial_state();
        EnergyLedger ledger;
        evolve_stroke(p, st, Stroke::Compression, ledger);
        evolve_stroke(p, st, Stroke::Hot, ledger);
        return st.rho;
    };
    const CMatrix ref = run(std::ldexp(1.0, -12));
    const double e1 = trace_distance(run(std::ldexp(1.0, -8)), ref);
    const double e2 = trace_distance(run(std::ldexp(1.0, -9)), ref);
    CHECK(e1 / e2 > 3.5);
    CHECK(e1 / e2 < 4.5);
}

TEST_CASE("the split between thermal and mode exchange converges at second order")
{
    EngineConfig cfg = preset("fig2");
    cfg.drive.durations = {1.0, 1.0, 1.0, 1.0};
    auto run = [&](double dt) {
        Propagator p = make(cfg, dt);
        SimulationState st = p.initial_state();
        EnergyLedger ledger;
        for (Stroke s : {Stroke::Compression, Stroke::Hot})
            evolve_stroke(p, st, s, ledger);
        return std::array<double, 2>{ledger.hot, ledger.env};
    };
    const auto a = run(std::ldexp(1.0, -7)), b = run(std::ldexp(1.0, -8)), c = run(std::ldexp(1.0, -9));
    for (int k = 0; k < 2; ++k) {
        const double ratio = (a[k] - b[k]) / (b[k] - c[k]);
        CHECK(ratio > 3.5);
        CHECK(ratio < 4.5);
    }
}

TEST_CASE("trace is conserved over a million steps")
{
    EngineConfig cfg = preset("paper-4.1");
    cfg.drive.durations = {3906.25, 3906.25, 3906.25, 3906.25};
    Engine engine(cfg);
    const Propagator& p = engine.propagator();
    REQUIRE(p.steps_in(Stroke::Hot) * 4 >= 1000000);
    SimulationState st = p.initial_state();
    EnergyLedger ledger;
    for (Stroke s : kCycleOrder)
        evolve_stroke(p, st, s, ledger);
    CHECK(ledger.steps >= 1000000);
    CHECK(std::abs(st.rho.trace() - 1.0) < 1e-9);
}

TEST_CASE("a cutoff that is too small is reported as a truncation failure")
{
    EngineConfig cfg = preset("fig2");
    cfg.dephasing.coupling = 2.0;
    cfg.numerics.n_max = 1;
    Engine engine(cfg);
    SimulationState st = engine.initial_state();
    CHECK_THROWS_AS(engine.run_cycle(st), NumericsError);
}

TEST_CASE("durations that are not step multiples are rejected")
{
    EngineConfig cfg = preset("fig2");
    cfg.numerics.dt = 0.3;
    cfg.dephasing.coupling = 0.0;
    CHECK_THROWS_AS(Engine{cfg}, ConfigError);
}

TEST_CASE("trajectory CSV columns")
{
    EngineConfig cfg = preset("fig2");
    Engine engine(cfg);
    SimulationState st = engine.initial_state();
    EnergyLedger ledger;
    ledger.stride = 64;
    evolve_stroke(engine.propagator(), st, Stroke::Compression, ledger);
    const std::string path = "test_trajectory.csv";
    write_trajectory_csv(path, ledger);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,H_S,H_int,H_osc,E_deph,dE_hot_cum,dE_cold_cum,dE_osc_cum,p_e_inst");
    std::remove(path.c_str());
}
