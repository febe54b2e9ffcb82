#include "otto/tedopa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "otto/io.hpp"

namespace otto {

ChainCoefficients chain_coefficients(const std::function<double(double)>& j, double center, double support,
                                     int sites, double panel_width)
{
    if (!(support > 0.0) || sites < 1 || !(panel_width > 0.0))
        throw ConfigError("chain coefficients need a positive support, at least one site and a positive panel width");

    // Discretized measure J(w)/pi on [center - support, center + support].
    using Rule = boost::math::quadrature::gauss<double, 20>;
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    const int panels = static_cast<int>(std::ceil(2.0 * support / panel_width));
    const double h = 2.0 * support / panels;
    std::vector<double> nodes, masses;
    for (int p = 0; p < panels; ++p) {
        const double mid = center - support + (p + 0.5) * h;
        for (std::size_t k = 0; k < x.size(); ++k) {
            for (double sgn : {-1.0, 1.0}) {
                if (x[k] == 0.0 && sgn < 0.0)
                    continue;
                const double node = mid + sgn * 0.5 * h * x[k];
                const double m = 0.5 * h * w[k] * j(node) / std::numbers::pi;
                if (m < 0.0)
                    throw NumericsError("chain coefficients: spectral density is negative on the support");
                nodes.push_back(node);
                masses.push_back(m);
            }
        }
    }
    const Index m = static_cast<Index>(nodes.size());
    if (sites > m)
        throw ConfigError("chain longer than the discretized measure");
    const Eigen::Map<const Eigen::VectorXd> omega(nodes.data(), m);
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(masses.data(), m).cwiseSqrt();

    ChainCoefficients out;
    out.support = support;
    out.center = center;
    out.head_coupling = v.norm();
    if (!(out.head_coupling > 0.0))
        throw NumericsError("chain coefficients: measure has no weight on the support");

    // Lanczos on diag(omega) with full reorthogonalization.
    Eigen::MatrixXd basis(m, sites);
    basis.col(0) = v / out.head_coupling;
    const double scale = std::abs(center) + support;
    for (int n = 0; n < sites; ++n) {
        Eigen::VectorXd u = omega.cwiseProduct(basis.col(n));
        out.frequencies.push_back(basis.col(n).dot(u));
        if (n + 1 == sites)
            break;
        for (int pass = 0; pass < 2; ++pass)
            u -= basis.leftCols(n + 1) * (basis.leftCols(n + 1).transpose() * u);
        const double beta = u.norm();
        if (!(beta > 1e-12 * scale)) {
            std::ostringstream os;
            os << "chain coefficients: recurrence broke down at index " << n + 1;
            throw NumericsError(os.str());
        }
        out.hoppings.push_back(beta);
        basis.col(n + 1) = u / beta;
    }
    return out;
}

ChainCoefficients chain_coefficients(const DephasingBath& b, double support, int sites)
{
    const double width = b.width > 0.0 ? b.width : 1.0;
    // The recurrence depends only on the shape of J; a decoupled bath keeps
    // the chain of a unit coupling with a zero head coupling.
    DephasingBath shape = b;
    if (shape.coupling == 0.0)
        shape.coupling = 1.0;
    ChainCoefficients c = chain_coefficients([shape](double w) { return lorentzian_sd(shape, w); }, b.frequency,
                                             support, sites, std::min(0.25, width / 8.0));
    if (b.coupling == 0.0)
        c.head_coupling = 0.0;
    return c;
}

Eigen::VectorXd jacobi_spectrum(const ChainCoefficients& c)
{
    const Index n = c.sites();
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        t(i, i) = c.frequencies[i];
    for (Index i = 0; i + 1 < n; ++i)
        t(i, i + 1) = t(i + 1, i) = c.hoppings[i];
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t, Eigen::EigenvaluesOnly).eigenvalues();
}

ChainBasis::ChainBasis(int sites, int local_dim, int max_excitations)
    : sites_(sites), local_dim_(local_dim), max_excitations_(max_excitations)
{
    if (sites < 1 || local_dim < 2 || max_excitations < 0)
        throw ConfigError("chain basis needs at least one site, local dimension >= 2 and a non-negative cap");
    // Odometer over occupations, site 0 fastest; capped branches are skipped.
    const int cap = max_excitations > 0 ? max_excitations : sites * (local_dim - 1);
    std::vector<int> occ(sites, 0);
    int total = 0;
    while (true) {
        if (static_cast<Index>(states_.size()) > 4096)
            throw DimensionError("chain basis exceeds the dimension cap");
        lookup_.emplace(occ, static_cast<Index>(states_.size()));
        states_.push_back(occ);
        int i = 0;
        for (; i < sites; ++i) {
            if (occ[i] + 1 < local_dim && total + 1 <= cap) {
                ++occ[i];
                ++total;
                break;
            }
            total -= occ[i];
            occ[i] = 0;
        }
        if (i == sites)
            break;
    }
    HilbertLayout({2, size()}); // enforces the dimension cap
}

Index ChainBasis::index_of(const std::vector<int>& occ) const
{
    const auto it = lookup_.find(occ);
    return it == lookup_.end() ? -1 : it->second;
}

SparseC ChainBasis::annihilation(int site) const
{
    std::vector<Eigen::Triplet<cplx>> entries;
    for (Index i = 0; i < size(); ++i) {
        std::vector<int> occ = states_[i];
        const int n = occ[site];
        if (n == 0)
            continue;
        occ[site] = n - 1;
        entries.emplace_back(index_of(occ), i, std::sqrt(static_cast<double>(n)));
    }
    SparseC a(size(), size());
    a.setFromTriplets(entries.begin(), entries.end());
    return a;
}

SparseC ChainBasis::number(int site) const
{
    SparseC n(size(), size());
    for (Index i = 0; i < size(); ++i)
        if (states_[i][site] > 0)
            n.insert(i, i) = static_cast<double>(states_[i][site]);
    return n;
}

Environment chain_environment(const ChainCoefficients& c, const ChainBasis& basis, double edge_threshold)
{
    if (basis.sites() != c.sites())
        throw DimensionError("chain basis and coefficients disagree on the number of sites");
    const Index dim = basis.size();
    Environment env;
    env.hamiltonian = SparseC(dim, dim);
    std::vector<SparseC> a;
    for (int i = 0; i < basis.sites(); ++i)
        a.push_back(basis.annihilation(i));
    for (int i = 0; i < basis.sites(); ++i) {
        env.hamiltonian += c.frequencies[i] * basis.number(i);
        if (i + 1 < basis.sites()) {
            SparseC hop = SparseC(a[i].adjoint()) * a[i + 1];
            env.hamiltonian += c.hoppings[i] * (hop + SparseC(hop.adjoint()));
        }
    }
    env.coupling_op = a[0] + SparseC(a[0].adjoint());
    env.coupling = c.head_coupling;
    env.edge_mask = Eigen::VectorXd::Zero(dim);
    for (Index k = 0; k < dim; ++k) {
        const auto& occ = basis.occupations(k);
        const int total = std::accumulate(occ.begin(), occ.end(), 0);
        if (std::find(occ.begin(), occ.end(), basis.local_dim() - 1) != occ.end() ||
            (basis.max_excitations() > 0 && total == basis.max_excitations()))
            env.edge_mask(k) = 1.0;
    }
    env.edge_threshold = edge_threshold;
    env.site_dims.assign(basis.sites(), basis.local_dim());
    return env;
}

namespace {

EnergyLedger run_schedule(const Propagator& p, SimulationState& st, double duration, int stride)
{
    EnergyLedger ledger;
    ledger.stride = stride;
    long left = std::lround(duration / p.dt());
    while (left > 0) {
        for (Stroke s : kCycleOrder) {
            if (left <= 0)
                break;
            StrokeOptions opt;
            opt.max_steps = left;
            left -= std::min(left, p.steps_in(s));
            evolve_stroke(p, st, s, ledger, opt);
        }
    }
    return ledger;
}

std::vector<double> top_levels(const Propagator& p, const ChainBasis& basis, const CMatrix& rho)
{
    const CMatrix env = p.reduced_environment(rho);
    std::vector<double> out(basis.sites(), 0.0);
    for (Index k = 0; k < basis.size(); ++k)
        for (int i = 0; i < basis.sites(); ++i)
            if (basis.occupations(k)[i] == basis.local_dim() - 1)
                out[i] += env(k, k).real();
    return out;
}

} // namespace

ChainRun evolve_chain(const EngineConfig& cfg, double support, int sites, int local_dim, int max_excitations,
                      double duration, double dt, int stride)
{
    ChainRun run;
    run.coefficients = chain_coefficients(cfg.dephasing, support, sites);
    ChainBasis basis(sites, local_dim, max_excitations);
    Environment env = chain_environment(run.coefficients, basis);
    const double threshold = env.edge_threshold;
    Propagator p(cfg, std::move(env), dt);
    SimulationState st = p.initial_state();
    try {
        run.ledger = run_schedule(p, st, duration, stride);
    } catch (const NumericsError&) {
        // The propagator only sees the pooled edge; name the offending site.
        std::vector<double> top = top_levels(p, basis, st.rho);
        const auto worst = std::max_element(top.begin(), top.end());
        if (*worst > threshold) {
            std::ostringstream os;
            os << "chain truncation exceeded at site " << (worst - top.begin()) << ": top-level population " << *worst
               << " (threshold " << threshold << ")";
            throw NumericsError(os.str());
        }
        throw;
    }
    run.top_level_population = top_levels(p, basis, st.rho);
    return run;
}

EnergyLedger evolve_dampf(const EngineConfig& cfg, double duration, double dt, int stride)
{
    const Index n_max = cfg.numerics.n_max >= 0 ? cfg.numerics.n_max : default_cutoff(cfg.dephasing);
    Propagator p(cfg, dampf_environment(cfg, n_max), dt);
    SimulationState st = p.initial_state();
    return run_schedule(p, st, duration, stride);
}

std::vector<DiscrepancyRow> compare_dampf_tedopa(const EngineConfig& cfg, std::vector<double> supports)
{
    std::sort(supports.begin(), supports.end());
    const auto& ch = cfg.chain;
    const double dt = grid_dt(cfg);
    const long steps = std::lround(ch.horizon / dt);
    const int stride = static_cast<int>(std::max(1L, steps / 256));
    const EnergyLedger ref = evolve_dampf(cfg, ch.horizon, dt, stride);

    std::vector<DiscrepancyRow> rows;
    std::vector<EnergyLedger> runs;
    double window = ch.horizon;
    for (double a : supports) {
        DiscrepancyRow row{a, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, false, "ok"};
        EnergyLedger ledger;
        try {
            ChainRun run = evolve_chain(cfg, a, ch.sites, ch.local_dim, ch.max_excitations, ch.horizon, dt, stride);
            row.head_coupling = run.coefficients.head_coupling;
            if (run.ledger.samples.size() != ref.samples.size())
                throw NumericsError("chain and mode runs sampled at different times");
            double mean_hop = 0.0;
            for (double t : run.coefficients.hoppings)
                mean_hop += t;
            mean_hop /= std::max<std::size_t>(1, run.coefficients.hoppings.size());
            row.reflection_time = mean_hop > 0.0 ? ch.sites / (2.0 * mean_hop) : std::numeric_limits<double>::infinity();
            row.reflection_flag = ch.horizon > row.reflection_time;
            window = std::min(window, row.reflection_time);
            ledger = std::move(run.ledger);
        } catch (const Error& e) {
            row.status = e.what();
        }
        rows.push_back(row);
        runs.push_back(std::move(ledger));
    }

    for (std::size_t k = 0; k < rows.size(); ++k) {
        DiscrepancyRow& row = rows[k];
        if (row.status != "ok")
            continue;
        row.window = window;
        const auto& s = runs[k].samples;
        int tail = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double d_int = std::abs(s[i].interaction - ref.samples[i].interaction);
            const double d_bath = std::abs(e_deph(s[i]) - e_deph(ref.samples[i]));
            row.interaction_max_horizon = std::max(row.interaction_max_horizon, d_int);
            row.bath_energy_max_horizon = std::max(row.bath_energy_max_horizon, d_bath);
            if (s[i].t <= window + 1e-12) {
                row.interaction_max = std::max(row.interaction_max, d_int);
                row.bath_energy_max = std::max(row.bath_energy_max, d_bath);
            }
            if (s[i].t >= 0.75 * ch.horizon) {
                row.plateau += s[i].interaction;
                ++tail;
            }
        }
        row.plateau /= std::max(1, tail);
    }
    return rows;
}

void write_chain_csv(const std::string& path, const ChainCoefficients& c)
{
    std::vector<std::string> comments{"a=" + format_number(c.support), "N=" + std::to_string(c.sites()),
                                      "c0=" + format_number(c.head_coupling)};
    CsvWriter csv(path, {"n", "omega_n", "t_n"}, comments);
    for (int n = 0; n < c.sites(); ++n)
        csv.row_text({std::to_string(n), format_number(c.frequencies[n]),
                      n + 1 < c.sites() ? format_number(c.hoppings[n]) : ""});
}

void write_discrepancy_csv(const std::string& path, const std::vector<DiscrepancyRow>& rows)
{
    CsvWriter csv(path, {"a", "c0", "window", "max_dH_int", "max_dH_B", "max_dH_int_horizon", "max_dH_B_horizon",
                         "H_int_plateau", "reflection_time", "reflection_flag", "status"});
    for (const auto& r : rows)
        csv.row_text({format_number(r.support), format_number(r.head_coupling), format_number(r.window),
                      format_number(r.interaction_max), format_number(r.bath_energy_max),
                      format_number(r.interaction_max_horizon), format_number(r.bath_energy_max_horizon),
                      format_number(r.plateau), format_number(r.reflection_time), r.reflection_flag ? "1" : "0",
                      r.status == "ok" ? "ok" : "failed"});
}

} // namespace otto
