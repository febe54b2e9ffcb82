#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "otto/analysis.hpp"
#include "otto/config.hpp"
#include "otto/optimizer.hpp"

using namespace otto;

namespace {

double steady_power(EngineConfig cfg, const StrokeDurations& d, Target t)
{
    cfg.drive.durations = d;
    return power(Engine(cfg).run_to_steady_cycle().record, t);
}

SearchSpec baseline_spec()
{
    SearchSpec s;
    s.target = Target::Sys;
    s.max_evaluations = 1000;
    return s;
}

} // namespace

TEST_CASE("uncoupled baseline has a positive grid-local power maximum")
{
    const EngineConfig cfg = preset("paper-4.1");
    const SearchSpec spec = baseline_spec();
    SearchResult r = maximize_power(cfg, spec);
    CHECK_FALSE(r.budget_exhausted);
    CHECK(r.power > 0.0);
    CHECK(std::isfinite(r.durations.cycle()));
    CHECK(r.power == r.record.p_sys);
    CHECK(r.trace.front().durations == spec.initial);
    for (std::size_t k = 1; k < r.trace.size(); ++k)
        CHECK(r.trace[k].power > r.trace[k - 1].power);

    // Re-verify the halting condition on all eight neighbours.
    for (Stroke s : kCycleOrder)
        for (double sgn : {-1.0, 1.0}) {
            StrokeDurations d = r.durations;
            d[s] += sgn * spec.grid;
            if (d[s] < spec.grid)
                continue;
            CHECK(steady_power(cfg, d, Target::Sys) <= r.power);
        }
    // Every duration sits on the 1/32 grid.
    for (Stroke s : kCycleOrder)
        CHECK(r.durations[s] * 32.0 == std::round(r.durations[s] * 32.0));
}

TEST_CASE("the search is deterministic")
{
    const EngineConfig cfg = preset("paper-4.1");
    SearchSpec spec = baseline_spec();
    spec.max_evaluations = 60;
    SearchResult a = maximize_power(cfg, spec), b = maximize_power(cfg, spec);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
        CHECK(a.trace[k].durations == b.trace[k].durations);
        CHECK(a.trace[k].power == b.trace[k].power);
    }
    CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("an exhausted budget returns the best point so far with a flag")
{
    const EngineConfig cfg = preset("paper-4.1");
    SearchSpec spec = baseline_spec();
    spec.max_evaluations = 5;
    SearchResult r = maximize_power(cfg, spec);
    CHECK(r.budget_exhausted);
    CHECK(r.evaluations <= 5);
    CHECK(r.power >= r.trace.front().power);
    CHECK(r.power == r.trace.back().power);
}

TEST_CASE("search specification errors")
{
    const EngineConfig cfg = preset("paper-4.1");
    SearchSpec spec = baseline_spec();
    spec.grid = 0.0;
    CHECK_THROWS_AS(maximize_power(cfg, spec), ConfigError);
    spec = baseline_spec();
    spec.lower.hot = 2.0;
    spec.upper.hot = 1.0;
    CHECK_THROWS_AS(maximize_power(cfg, spec), ConfigError);
}

TEST_CASE("continuous polish does not lose power")
{
    const EngineConfig cfg = preset("paper-4.1");
    SearchSpec spec = baseline_spec();
    spec.refine = true;
    spec.refine_evaluations = 30;
    SearchResult r = maximize_power(cfg, spec);
    SearchSpec plain = baseline_spec();
    SearchResult g = maximize_power(cfg, plain);
    CHECK(r.refined);
    CHECK(r.power >= g.power);
}

TEST_CASE("dephasing sweep records failures and sorts by effective rate")
{
    EngineConfig cfg = preset("fig2");
    cfg.numerics.n_max = 6;
    SearchSpec spec;
    spec.initial = {2.0, 2.0, 2.0, 2.0};
    spec.initial_step = 1;
    spec.max_evaluations = 12;
    // The strongest coupling overflows the fixed cutoff.
    const auto rows = sweep_dephasing(cfg, {6.0, 0.5, 0.0}, spec);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].coupling == 0.0);
    CHECK(rows[1].coupling == 0.5);
    CHECK(rows[2].coupling == 6.0);
    CHECK(rows[0].status == "ok");
    CHECK(rows[1].status == "ok");
    CHECK(rows[2].status != "ok");
    CHECK(rows[1].gamma_eff == doctest::Approx(4.0 / 404.0));
    CHECK(rows[1].sys.power == rows[1].sys.record.p_sys);
    CHECK(rows[1].tot.power == rows[1].tot.record.p_tot);

    const std::string path = "test_sweep.csv";
    write_sweep_csv(path, rows);
    std::ifstream in(path);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "Gamma,Gamma_eff,P_max_sys,P_max_tot,eta_sys,eta_tot,tau_cycle_sys,tau_cycle_tot,W_ext_sys,"
                    "W_ext_tot,status");
    int n = 0;
    while (std::getline(in, line))
        ++n;
    CHECK(n == 3);
    std::remove(path.c_str());
}

TEST_CASE("width sweep keeps the effective rate and lowers the dissipated heat")
{
    EngineConfig base = preset("fig2");
    const double critical = (4.0 * 100.0 + 4.0) / 2.0;
    const auto rows = sweep_gamma_to_gamma0(base, {2.0, 40.0, critical - 1.0});
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.status == "ok");
        CHECK(r.gamma_eff == doctest::Approx(4.0 / 404.0).epsilon(1e-12));
        CHECK(r.bound_lower <= r.bound_upper);
    }
    CHECK(rows[0].frequency == doctest::Approx(10.0));
    CHECK(rows[1].record.q_h_diss < rows[0].record.q_h_diss);
    CHECK(rows[2].record.q_h_diss < rows[1].record.q_h_diss);
    CHECK_THROWS_AS(sweep_gamma_to_gamma0(base, {critical + 1.0}), ConfigError);
}
