// Command-line front end: presets, experiment commands, CSV tables and run manifests.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "otto/analysis.hpp"
#include "otto/config.hpp"
#include "otto/io.hpp"
#include "otto/optimizer.hpp"
#include "otto/tedopa.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace otto;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Common {
    std::string preset_name;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = "out";
    bool verify = false;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--preset", c.preset_name, "Built-in parameter set");
    cmd->add_option("--config", c.config_path, "Key-value configuration file");
    cmd->add_option("--set", c.overrides, "Override as key=value (repeatable)");
    cmd->add_option("--out", c.out_dir, "Output directory");
    cmd->add_flag("--verify", c.verify, "Compare the new outputs with the manifest already in --out");
}

EngineConfig resolve(const Common& c)
{
    if (!c.preset_name.empty() && !c.config_path.empty())
        throw ConfigError("give either --preset or --config, not both");
    EngineConfig cfg;
    if (!c.config_path.empty()) {
        std::ifstream in(c.config_path);
        if (!in)
            throw ConfigError("cannot read config file " + c.config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        cfg = parse_config(ss.str());
    } else if (!c.preset_name.empty()) {
        cfg = preset(c.preset_name);
    } else {
        throw ConfigError("no configuration: pass --preset or --config");
    }
    return apply_overrides(cfg, c.overrides);
}

json config_json(const EngineConfig& cfg)
{
    json j = json::object();
    std::istringstream in(render_config(cfg));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        j[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return j;
}

// Collects output files and writes manifest.json; with --verify the hashes
// are compared against the previous manifest first.
class Run {
public:
    Run(std::string command, const Common& c, const EngineConfig* cfg)
        : command_(std::move(command)), dir_(c.out_dir), verify_(c.verify), start_(std::chrono::steady_clock::now())
    {
        fs::create_directories(dir_);
        if (verify_) {
            std::ifstream in(dir_ / "manifest.json");
            if (!in)
                throw ConfigError("--verify: no manifest.json in " + dir_.string());
            previous_ = json::parse(in);
        }
        if (cfg) {
            manifest_["config"] = config_json(*cfg);
            manifest_["config_hash"] = config_hash(*cfg);
        }
    }

    std::string path(const std::string& name)
    {
        files_.push_back(name);
        return (dir_ / name).string();
    }

    json& extra() { return manifest_; }

    int finish()
    {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json outputs = json::array();
        for (const auto& f : files_)
            outputs.push_back({{"file", f}, {"sha256", file_hash((dir_ / f).string())}});
        manifest_["tool"] = "otto";
        manifest_["version"] = kVersion;
        manifest_["command"] = command_;
        manifest_["wall_time_s"] = wall;
        manifest_["outputs"] = outputs;
        int status = 0;
        if (verify_) {
            if (previous_.value("config_hash", "") != manifest_.value("config_hash", "")) {
                std::cerr << "verify: config hash differs from the recorded run\n";
                status = 1;
            }
            std::map<std::string, std::string> old;
            for (const auto& o : previous_["outputs"])
                old[o["file"]] = o["sha256"];
            for (const auto& o : outputs) {
                const std::string f = o["file"];
                if (!old.count(f) || old[f] != o["sha256"]) {
                    std::cerr << "verify: " << f << " does not match the recorded hash\n";
                    status = 1;
                }
            }
            if (status == 0)
                std::cout << "verify: all " << outputs.size() << " outputs match\n";
        }
        std::ofstream(dir_ / "manifest.json") << manifest_.dump(2) << '\n';
        return status;
    }

private:
    std::string command_;
    fs::path dir_;
    bool verify_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> files_;
    json manifest_ = json::object();
    json previous_;
};

std::vector<double> parse_list(const std::string& text, const char* what)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(std::string(what) + ": cannot parse '" + item + "'");
        }
    }
    if (out.empty())
        throw ConfigError(std::string(what) + ": empty list");
    return out;
}

void write_search(Run& run, const SearchResult& r, Target t)
{
    {
        std::vector<std::string> header{"target", "tau_com", "tau_h", "tau_exp", "tau_c", "power"};
        for (const auto& h : cycle_csv_header())
            header.push_back(h);
        header.insert(header.end(), {"evaluations", "budget_exhausted", "refined"});
        CsvWriter csv(run.path("optimum.csv"), header);
        std::vector<std::string> cells{target_name(t)};
        for (Stroke s : kCycleOrder)
            cells.push_back(format_number(r.durations[s]));
        cells.push_back(format_number(r.power));
        for (double v : cycle_csv_row(r.record))
            cells.push_back(format_number(v));
        cells.push_back(std::to_string(r.evaluations));
        cells.push_back(r.budget_exhausted ? "1" : "0");
        cells.push_back(r.refined ? "1" : "0");
        csv.row_text(cells);
    }
    CsvWriter trace(run.path("trace.csv"), {"step", "tau_com", "tau_h", "tau_exp", "tau_c", "power"});
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const auto& s = r.trace[i];
        trace.row({static_cast<double>(i), s.durations.compression, s.durations.hot, s.durations.expansion,
                   s.durations.cold, s.power});
    }
}

int cmd_run_cycle(const Common& c)
{
    EngineConfig cfg = resolve(c);
    Run run("run-cycle", c, &cfg);
    Engine engine(cfg);
    SteadyCycle sc = engine.run_to_steady_cycle();
    write_cycle_csv(run.path("cycle.csv"), {sc.record});
    // Replay the steady cycle with sampling for the trajectory table.
    EnergyLedger ledger;
    const Propagator& p = engine.propagator();
    long steps = 0;
    for (Stroke s : kCycleOrder)
        steps += p.steps_in(s);
    ledger.stride = cfg.numerics.sample_stride > 0 ? cfg.numerics.sample_stride
                                                    : static_cast<int>(std::max(1L, steps / 400));
    SimulationState st = sc.state;
    engine.run_cycle(st, &ledger);
    write_trajectory_csv(run.path("trajectory.csv"), ledger);
    run.extra()["dt"] = p.dt();
    run.extra()["n_max"] = engine.cutoff();
    run.extra()["cycles_to_steady"] = sc.record.cycles_to_steady;
    std::cout << "eta_sys " << format_number(sc.record.eta_sys) << "  eta_tot " << format_number(sc.record.eta_tot)
              << "  P_sys " << format_number(sc.record.p_sys) << "  P_tot " << format_number(sc.record.p_tot) << '\n';
    return run.finish();
}

struct SearchArgs {
    std::string target = "tot";
    int budget = 400;
    std::uint64_t seed = 0;
    bool refine = false;
    int initial_step = 8;
};

void add_search(CLI::App* cmd, SearchArgs& a)
{
    cmd->add_option("--target", a.target, "Power definition: sys or tot")->check(CLI::IsMember({"sys", "tot"}));
    cmd->add_option("--budget", a.budget, "Maximum steady-cycle evaluations");
    cmd->add_option("--seed", a.seed, "Permutes the neighbour order");
    cmd->add_option("--initial-step", a.initial_step, "First pattern step in grid units");
    cmd->add_flag("--refine", a.refine, "Continuous simplex polish after the grid search");
}

SearchSpec search_spec(const EngineConfig& cfg, const SearchArgs& a)
{
    SearchSpec s;
    s.target = parse_target(a.target);
    s.initial = cfg.drive.durations;
    s.max_evaluations = a.budget;
    s.seed = a.seed;
    s.refine = a.refine;
    s.initial_step = a.initial_step;
    return s;
}

int cmd_optimize(const Common& c, const SearchArgs& a)
{
    EngineConfig cfg = resolve(c);
    Run run("optimize", c, &cfg);
    const SearchSpec spec = search_spec(cfg, a);
    SearchResult r = maximize_power(cfg, spec);
    write_search(run, r, spec.target);
    run.extra()["grid"] = spec.grid;
    run.extra()["budget"] = spec.max_evaluations;
    run.extra()["budget_exhausted"] = r.budget_exhausted;
    std::cout << "P_max(" << a.target << ") " << format_number(r.power) << " at tau_cycle "
              << format_number(r.durations.cycle()) << (r.budget_exhausted ? " (budget exhausted)" : "") << '\n';
    return run.finish();
}

int cmd_sweep(const Common& c, const SearchArgs& a, const std::string& couplings)
{
    EngineConfig cfg = resolve(c);
    Run run("sweep", c, &cfg);
    auto rows = sweep_dephasing(cfg, parse_list(couplings, "--Gamma"), search_spec(cfg, a));
    write_sweep_csv(run.path("sweep.csv"), rows);
    int failed = 0;
    for (const auto& r : rows)
        failed += r.status != "ok";
    run.extra()["failed_points"] = failed;
    return run.finish();
}

int cmd_validate_tedopa(const Common& c, const std::string& supports)
{
    EngineConfig cfg = resolve(c);
    Run run("validate-tedopa", c, &cfg);
    std::vector<double> list = parse_list(supports, "--supports");
    for (double a : list) {
        ChainCoefficients cc = chain_coefficients(cfg.dephasing, a, cfg.chain.sites);
        write_chain_csv(run.path("chain_a" + format_number(a) + ".csv"), cc);
    }
    auto rows = compare_dampf_tedopa(cfg, list);
    write_discrepancy_csv(run.path("discrepancy.csv"), rows);
    for (const auto& r : rows) {
        if (r.status != "ok") {
            std::cout << "a " << format_number(r.support) << "  failed: " << r.status << '\n';
            continue;
        }
        std::cout << "a " << format_number(r.support) << "  max|dH_int| " << format_number(r.interaction_max)
                  << "  max|dH_B| " << format_number(r.bath_energy_max) << "  plateau " << format_number(r.plateau)
                  << (r.reflection_flag ? "  (reflection before horizon)" : "") << '\n';
    }
    return run.finish();
}

int cmd_scaling(const Common& c, const std::string& lambdas, const std::string& widths)
{
    EngineConfig cfg = resolve(c);
    Run run("scaling", c, &cfg);
    if (!lambdas.empty())
        write_lambda_csv(run.path("lambda.csv"), lambda_scan(cfg, parse_list(lambdas, "--lambda")));
    if (!widths.empty())
        write_width_csv(run.path("width.csv"), sweep_gamma_to_gamma0(cfg, parse_list(widths, "--widths")));
    if (lambdas.empty() && widths.empty())
        throw ConfigError("scaling needs --lambda and/or --widths");
    return run.finish();
}

struct BoundsArgs {
    double coupling = 256, width = 128, frequency = 1024, beta = std::numeric_limits<double>::infinity();
    double gamma_th = 0.5, tau_th = 1.84375, n_h = 0.4857, n_c = 0.0524;
    double omega = 1.0, rabi_max = 0.5, tau = 0.0;
    // Reference mode of the constant-rate curve; NaN means the mode itself.
    double width_bar = std::numeric_limits<double>::quiet_NaN();
    double frequency_bar = std::numeric_limits<double>::quiet_NaN();
    std::string out;
};

int cmd_bounds(const BoundsArgs& a)
{
    EngineConfig cfg;
    cfg.drive.omega = a.omega;
    cfg.drive.rabi_max = a.rabi_max;
    cfg.hot = {a.n_h, a.gamma_th};
    cfg.cold = {a.n_c, a.gamma_th};
    cfg.drive.durations.hot = a.tau_th;
    cfg.dephasing = {a.coupling, a.width, a.frequency, a.beta};
    if (a.coupling < 0 || a.width <= 0 || a.frequency < 0 || !(a.beta > 0))
        throw ConfigError("bounds: need Gamma >= 0, gamma > 0, omega0 >= 0, beta > 0");

    const DephasingBath& b = cfg.dephasing;
    json j;
    j["gamma_eff"] = effective_dephasing_rate(b);
    DephasingBath cold_mode = b;
    cold_mode.beta = std::numeric_limits<double>::infinity();
    j["gamma_eff_zero_temperature"] = effective_dephasing_rate(cold_mode);
    const cplx alpha = steady_displacement(b);
    j["alpha"] = {{"re", alpha.real()}, {"im", alpha.imag()}};
    j["decoupling_energy"] = decoupling_energy(b);
    j["recoupling_bound"] = b.coupling == 0.0 ? 0.0 : recoupling_bound(thermalized(b), a.tau).value;
    const HeatBounds hb = dissipated_heat_bounds(cfg, Stroke::Hot);
    j["heat_bounds_hot"] = {{"lower", hb.lower}, {"upper", hb.upper}};
    const ConstantPowerPoint cp = scaling_constant_power(std::isnan(a.width_bar) ? b.width : a.width_bar,
                                                         std::isnan(a.frequency_bar) ? b.frequency : a.frequency_bar,
                                                         b.width);
    j["gamma0"] = cp.critical_width;
    j["omega0_of_gamma"] = cp.frequency;
    const double eps_c = max_splitting({a.omega, 0.0, {}});
    const double eps_h = max_splitting(cfg.drive);
    const QuasistaticCycle q =
        quasistatic(eps_c, eps_h, polarization_argument(a.n_c), polarization_argument(a.n_h));
    j["quasistatic"] = {{"w_com", q.w_com}, {"w_exp", q.w_exp}, {"q_h", q.q_h},
                        {"q_c", q.q_c},     {"w_ext", q.w_ext}, {"eta", q.eta}};
    const std::string text = j.dump(2);
    std::cout << text << '\n';
    if (!a.out.empty())
        std::ofstream(a.out) << text << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dephasing-assisted quantum Otto engine simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common common;
    SearchArgs search;
    std::string couplings, supports = "4,8,16", lambdas, widths;
    BoundsArgs bounds;

    auto* run_cycle = app.add_subcommand("run-cycle", "Run to the steady cycle and report it");
    add_common(run_cycle, common);
    auto* optimize = app.add_subcommand("optimize", "Maximize power over the stroke durations");
    add_common(optimize, common);
    add_search(optimize, search);
    auto* sweep = app.add_subcommand("sweep", "Optimize both power targets over a list of couplings");
    add_common(sweep, common);
    add_search(sweep, search);
    sweep->add_option("--Gamma", couplings, "Comma-separated couplings")->required();
    auto* tedopa = app.add_subcommand("validate-tedopa", "Compare chain and damped-mode environments");
    add_common(tedopa, common);
    tedopa->add_option("--supports", supports, "Comma-separated support half-widths");
    auto* scaling = app.add_subcommand("scaling", "Speed-up and width-scaling scans");
    add_common(scaling, common);
    scaling->add_option("--lambda", lambdas, "Comma-separated speed-up factors");
    scaling->add_option("--widths", widths, "Comma-separated mode widths towards the critical width");
    auto* bnd = app.add_subcommand("bounds", "Closed-form quantities as JSON");
    bnd->add_option("--Gamma", bounds.coupling);
    bnd->add_option("--gamma", bounds.width);
    bnd->add_option("--omega0", bounds.frequency);
    bnd->add_option("--beta", bounds.beta);
    bnd->add_option("--gamma-th", bounds.gamma_th);
    bnd->add_option("--tau-th", bounds.tau_th);
    bnd->add_option("--n-h", bounds.n_h);
    bnd->add_option("--n-c", bounds.n_c);
    bnd->add_option("--omega", bounds.omega);
    bnd->add_option("--omega-rabi-max", bounds.rabi_max);
    bnd->add_option("--tau", bounds.tau, "Recoupling time");
    bnd->add_option("--gamma-bar", bounds.width_bar, "Reference width of the constant-rate curve (default --gamma)");
    bnd->add_option("--omega0-bar", bounds.frequency_bar,
                    "Reference frequency of the constant-rate curve (default --omega0)");
    bnd->add_option("--out", bounds.out, "Also write the JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run_cycle)
            return cmd_run_cycle(common);
        if (*optimize)
            return cmd_optimize(common, search);
        if (*sweep)
            return cmd_sweep(common, search, couplings);
        if (*tedopa)
            return cmd_validate_tedopa(common, supports);
        if (*scaling)
            return cmd_scaling(common, lambdas, widths);
        if (*bnd)
            return cmd_bounds(bounds);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NumericsError& e) {
        std::cerr << "numerics failure: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
