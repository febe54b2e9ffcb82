#include "otto/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "otto/analysis.hpp"
#include "otto/io.hpp"

namespace otto {

namespace {

using GridPoint = std::array<long, 4>;

StrokeDurations to_durations(const GridPoint& k, double grid)
{
    return {k[0] * grid, k[1] * grid, k[2] * grid, k[3] * grid};
}

struct Evaluation {
    double power = -std::numeric_limits<double>::infinity();
    CycleRecord record;
    SimulationState state;
    bool ok = false;
};

class Evaluator {
public:
    Evaluator(const EngineConfig& cfg, Target target) : engine_(cfg), target_(target) {}

    Evaluation operator()(const StrokeDurations& d)
    {
        ++count;
        Evaluation ev;
        engine_.set_durations(d);
        try {
            SteadyCycle sc = engine_.run_to_steady_cycle(warm_ ? &*warm_ : nullptr);
            ev.record = sc.record;
            ev.power = power(sc.record, target_);
            ev.state = sc.state;
            ev.ok = std::isfinite(ev.power);
        } catch (const NumericsError&) {
            ++failures;
        }
        return ev;
    }

    void warm(const SimulationState& s) { warm_ = s; }
    double dt() const { return engine_.propagator().dt(); }

    int count = 0;
    int failures = 0;

private:
    Engine engine_;
    Target target_;
    std::optional<SimulationState> warm_;
};

void nelder_mead(Evaluator& eval, SearchResult& res, const SearchSpec& spec)
{
    const double dt = eval.dt();
    auto snap = [&](const Eigen::Vector4d& x) {
        StrokeDurations d;
        for (int i = 0; i < 4; ++i) {
            double lo = spec.lower[kCycleOrder[i]], hi = spec.upper[kCycleOrder[i]];
            double v = std::clamp(x(i), lo, hi);
            d[kCycleOrder[i]] = std::max(dt, std::round(v / dt) * dt);
        }
        return d;
    };
    int budget = spec.refine_evaluations;
    auto f = [&](const Eigen::Vector4d& x, Evaluation* keep = nullptr) {
        --budget;
        Evaluation ev = eval(snap(x));
        if (ev.ok && ev.power > res.power) {
            res.power = ev.power;
            res.record = ev.record;
            res.durations = snap(x);
            res.trace.push_back({res.durations, res.power});
            eval.warm(ev.state);
        }
        if (keep)
            *keep = ev;
        return ev.ok ? -ev.power : std::numeric_limits<double>::infinity();
    };

    std::array<Eigen::Vector4d, 5> simplex;
    std::array<double, 5> value;
    Eigen::Vector4d x0(res.durations.compression, res.durations.hot, res.durations.expansion, res.durations.cold);
    for (int i = 0; i < 5; ++i) {
        simplex[i] = x0;
        if (i > 0)
            simplex[i](i - 1) += spec.grid;
        value[i] = i == 0 ? -res.power : f(simplex[i]);
    }
    while (budget > 0) {
        std::array<int, 5> order;
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return value[a] < value[b]; });
        const int worst = order[4], second = order[3], best = order[0];
        Eigen::Vector4d centroid = Eigen::Vector4d::Zero();
        for (int i = 0; i < 4; ++i)
            centroid += simplex[order[i]] / 4.0;
        Eigen::Vector4d xr = centroid + (centroid - simplex[worst]);
        double fr = f(xr);
        if (fr < value[best]) {
            Eigen::Vector4d xe = centroid + 2.0 * (centroid - simplex[worst]);
            double fe = budget > 0 ? f(xe) : fr;
            if (fe < fr) {
                simplex[worst] = xe;
                value[worst] = fe;
            } else {
                simplex[worst] = xr;
                value[worst] = fr;
            }
        } else if (fr < value[second]) {
            simplex[worst] = xr;
            value[worst] = fr;
        } else {
            Eigen::Vector4d xc = centroid + 0.5 * (simplex[worst] - centroid);
            double fc = budget > 0 ? f(xc) : value[worst];
            if (fc < value[worst]) {
                simplex[worst] = xc;
                value[worst] = fc;
            } else {
                for (int i = 0; i < 5 && budget > 0; ++i) {
                    if (i == best)
                        continue;
                    simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
                    value[i] = f(simplex[i]);
                }
            }
        }
        // Converged once the simplex collapses below the step size.
        double spread = 0.0;
        for (int i = 0; i < 5; ++i)
            spread = std::max(spread, (simplex[i] - simplex[best]).cwiseAbs().maxCoeff());
        if (spread < dt)
            break;
    }
}

} // namespace

SearchResult maximize_power(const EngineConfig& cfg, const SearchSpec& spec)
{
    if (!(spec.grid > 0.0))
        throw ConfigError("search grid must be positive");
    GridPoint lo, hi, cur;
    for (int i = 0; i < 4; ++i) {
        const Stroke s = kCycleOrder[i];
        lo[i] = std::max(1L, static_cast<long>(std::ceil(spec.lower[s] / spec.grid - 1e-9)));
        hi[i] = static_cast<long>(std::floor(spec.upper[s] / spec.grid + 1e-9));
        cur[i] = std::clamp(static_cast<long>(std::llround(spec.initial[s] / spec.grid)), lo[i], hi[i]);
        if (lo[i] > hi[i])
            throw ConfigError(std::string("empty search range for the ") + stroke_name(s) + " stroke");
    }

    EngineConfig base = cfg;
    base.drive.durations = to_durations(cur, spec.grid);
    Evaluator eval(base, spec.target);

    std::map<GridPoint, Evaluation> memo;
    auto visit = [&](const GridPoint& k) -> const Evaluation& {
        auto it = memo.find(k);
        if (it == memo.end())
            it = memo.emplace(k, eval(to_durations(k, spec.grid))).first;
        return it->second;
    };

    std::vector<std::pair<int, int>> moves;
    for (int i = 0; i < 4; ++i)
        for (int sgn : {+1, -1})
            moves.emplace_back(i, sgn);
    std::mt19937_64 rng(spec.seed);
    if (spec.seed != 0)
        std::shuffle(moves.begin(), moves.end(), rng);

    SearchResult res;
    Evaluation here = visit(cur);
    if (!here.ok)
        throw NumericsError("power search: the starting point has no steady cycle");
    eval.warm(here.state);
    res.trace.push_back({to_durations(cur, spec.grid), here.power});

    long step = std::max(1, spec.initial_step);
    while (true) {
        if (eval.count >= spec.max_evaluations) {
            res.budget_exhausted = true;
            break;
        }
        GridPoint best_k = cur;
        double best_p = here.power;
        for (auto [i, sgn] : moves) {
            GridPoint k = cur;
            k[i] = std::clamp(k[i] + sgn * step, lo[i], hi[i]);
            if (k == cur)
                continue;
            if (eval.count >= spec.max_evaluations && !memo.count(k)) {
                res.budget_exhausted = true;
                break;
            }
            const Evaluation& ev = visit(k);
            if (ev.ok && ev.power > best_p) {
                best_p = ev.power;
                best_k = k;
            }
        }
        if (res.budget_exhausted)
            break;
        if (best_k == cur) {
            if (step == 1)
                break;
            step /= 2;
            continue;
        }
        cur = best_k;
        here = memo.at(cur);
        eval.warm(here.state);
        res.trace.push_back({to_durations(cur, spec.grid), here.power});
    }

    res.durations = to_durations(cur, spec.grid);
    res.record = here.record;
    res.power = here.power;
    if (spec.refine && !res.budget_exhausted) {
        nelder_mead(eval, res, spec);
        res.refined = true;
    }
    res.evaluations = eval.count;
    res.failures = eval.failures;
    return res;
}

std::vector<DephasingSweepRow> sweep_dephasing(const EngineConfig& cfg, const std::vector<double>& couplings,
                                               const SearchSpec& spec)
{
    std::vector<DephasingSweepRow> rows;
    for (double c : couplings) {
        EngineConfig point = cfg;
        point.dephasing.coupling = c;
        DephasingSweepRow row{c, effective_dephasing_rate(point.dephasing), {}, {}, "ok"};
        try {
            SearchSpec s = spec;
            s.target = Target::Sys;
            row.sys = maximize_power(point, s);
            s.target = Target::Tot;
            row.tot = maximize_power(point, s);
        } catch (const NumericsError& e) {
            row.status = e.what();
        }
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.gamma_eff < b.gamma_eff; });
    return rows;
}

std::vector<WidthSweepRow> sweep_gamma_to_gamma0(const EngineConfig& base, const std::vector<double>& widths)
{
    std::vector<WidthSweepRow> rows;
    for (double w : widths) {
        EngineConfig point = base;
        ConstantPowerPoint cp = scaling_constant_power(base.dephasing.width, base.dephasing.frequency, w);
        point.dephasing.width = w;
        point.dephasing.frequency = cp.frequency;
        point.numerics.n_max = -1;
        WidthSweepRow row{w, cp.frequency, effective_dephasing_rate(point.dephasing), {}, 0.0, 0.0, "ok"};
        HeatBounds hb = dissipated_heat_bounds(point, Stroke::Hot);
        row.bound_lower = hb.lower;
        row.bound_upper = hb.upper;
        try {
            Engine eng(point);
            row.record = eng.run_to_steady_cycle().record;
        } catch (const NumericsError& e) {
            row.status = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<LambdaRow> lambda_scan(const EngineConfig& base, const std::vector<double>& lambdas)
{
    std::vector<LambdaRow> rows;
    for (double lam : lambdas) {
        EngineConfig point = scaling_constant_efficiency(base, lam);
        LambdaRow row{lam, {}, 0.0, "ok"};
        try {
            Engine eng(point);
            SteadyCycle sc = eng.run_to_steady_cycle();
            row.record = sc.record;
            const cplx alpha = steady_displacement(point.dephasing);
            const Index n_max = eng.cutoff();
            const Propagator& p = eng.propagator();
            double worst = 0.0;
            StrokeOptions opt;
            opt.observer = [&](const SimulationState& st, const Eigensystem& e) {
                CMatrix ref = ansatz_state(p.excited_population(st.rho, e), alpha, e, n_max);
                worst = std::max(worst, trace_distance(st.rho, ref));
            };
            SimulationState st = sc.state;
            EnergyLedger led;
            const long steps = p.steps_in(Stroke::Compression) + p.steps_in(Stroke::Hot) +
                               p.steps_in(Stroke::Expansion) + p.steps_in(Stroke::Cold);
            led.stride = static_cast<int>(std::max(1L, steps / 400));
            eng.run_cycle(st, &led, opt);
            row.ansatz_distance = worst;
        } catch (const NumericsError& e) {
            row.status = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<DephasingSweepRow>& rows)
{
    CsvWriter csv(path, {"Gamma", "Gamma_eff", "P_max_sys", "P_max_tot", "eta_sys", "eta_tot", "tau_cycle_sys",
                         "tau_cycle_tot", "W_ext_sys", "W_ext_tot", "status"});
    for (const auto& r : rows)
        csv.row_text({format_number(r.coupling), format_number(r.gamma_eff), format_number(r.sys.power),
                      format_number(r.tot.power), format_number(r.sys.record.eta_sys),
                      format_number(r.tot.record.eta_tot), format_number(r.sys.durations.cycle()),
                      format_number(r.tot.durations.cycle()), format_number(r.sys.record.w_ext_sys),
                      format_number(r.tot.record.w_ext_tot), r.status == "ok" ? "ok" : "failed"});
}

void write_width_csv(const std::string& path, const std::vector<WidthSweepRow>& rows)
{
    CsvWriter csv(path, {"gamma", "omega0", "Gamma_eff", "P_tot", "P_sys", "eta_tot", "eta_sys", "W_ext_tot",
                         "q_h_diss", "bound_lower", "bound_upper", "status"});
    for (const auto& r : rows)
        csv.row_text({format_number(r.width), format_number(r.frequency), format_number(r.gamma_eff),
                      format_number(r.record.p_tot), format_number(r.record.p_sys), format_number(r.record.eta_tot),
                      format_number(r.record.eta_sys), format_number(r.record.w_ext_tot),
                      format_number(r.record.q_h_diss), format_number(r.bound_lower), format_number(r.bound_upper),
                      r.status == "ok" ? "ok" : "failed"});
}

void write_lambda_csv(const std::string& path, const std::vector<LambdaRow>& rows)
{
    CsvWriter csv(path, {"lambda", "P_tot", "W_ext_tot", "eta_tot", "eta_sys", "q_h_diss", "ansatz_distance",
                         "status"});
    for (const auto& r : rows)
        csv.row_text({format_number(r.lambda), format_number(r.record.p_tot), format_number(r.record.w_ext_tot),
                      format_number(r.record.eta_tot), format_number(r.record.eta_sys),
                      format_number(r.record.q_h_diss), format_number(r.ansatz_distance),
                      r.status == "ok" ? "ok" : "failed"});
}

} // namespace otto
