#include "otto/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace otto {

namespace {

constexpr double kPi = std::numbers::pi;

struct Accumulator {
    double value = 0.0;
    double error = 0.0;
};

// Fixed-order Kronrod panels with local adaptivity.
template <class F>
void integrate_panels(const F& f, const std::vector<double>& cuts, Accumulator& acc)
{
    using boost::math::quadrature::gauss_kronrod;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (!(cuts[i + 1] > cuts[i]))
            continue;
        double err = 0.0;
        acc.value += gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 6, 1e-11, &err);
        acc.error += err;
    }
}

// Breakpoints on [0, upper]: the peaks mirrored to the positive axis, a
// geometric grid around each, and a uniform subdivision no coarser than h.
std::vector<double> panel_cuts(const SpectralDensity& j, double upper, double h)
{
    std::vector<double> cuts{0.0, upper};
    for (double p : j.peaks) {
        const double c = std::abs(p);
        for (double k : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
            for (double sgn : {-1.0, 1.0}) {
                const double x = c + sgn * k * j.width;
                if (x > 0.0 && x < upper)
                    cuts.push_back(x);
            }
        }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> out{cuts.front()};
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        const double a = out.back(), b = cuts[i];
        if (b - a <= 0.0)
            continue;
        const int n = static_cast<int>(std::ceil((b - a) / h));
        for (int k = 1; k <= n; ++k)
            out.push_back(a + (b - a) * k / n);
    }
    return out;
}

double quadrature_upper(const SpectralDensity& j)
{
    double far = 0.0;
    for (double p : j.peaks)
        far = std::max(far, std::abs(p));
    return far + 200.0 * j.width;
}

template <class F>
double tail_integral(const F& f, double from)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(f, from, std::numeric_limits<double>::infinity());
}

void check_converged(const Accumulator& acc, const char* what)
{
    if (!std::isfinite(acc.value) || acc.error > 1e-6 * std::abs(acc.value) + 1e-12) {
        std::ostringstream os;
        os << what << ": quadrature did not converge (estimate " << acc.value << ", error bound " << acc.error << ")";
        throw NumericsError(os.str());
    }
}

SpectralDensity make_sd(double (*fn)(const DephasingBath&, double), const DephasingBath& b, std::vector<double> peaks)
{
    return {[fn, b](double w) { return fn(b, w); }, std::move(peaks), b.width > 0.0 ? b.width : 1.0};
}

CMatrix qubit_mode_generator(const EngineConfig& cfg, Stroke s, Index n_max, double coupling)
{
    const Index dim = n_max + 1;
    const Eigensystem e = instantaneous_eigensystem(cfg.drive.omega, stroke_rabi(cfg.drive, s));
    const auto& d = cfg.dephasing;
    const CMatrix id_m = CMatrix::Identity(dim, dim);
    const CMatrix id_q = CMatrix::Identity(2, 2);
    const CMatrix b = annihilation(dim);
    CMatrix h = tensor(CMatrix(e.hamiltonian()), id_m) + coupling * tensor(CMatrix(e.sigma_z()), CMatrix(b + b.adjoint())) +
                d.frequency * tensor(id_q, number_operator(dim));
    const ThermalBath& bath = s == Stroke::Hot ? cfg.hot : cfg.cold;
    const CMatrix sp = e.sigma_plus();
    const double n_osc = mode_occupation(d);
    std::vector<JumpOperator> jumps{{bath.gamma * (bath.n + 1.0), tensor(CMatrix(sp.adjoint()), id_m)},
                                    {bath.gamma * bath.n, tensor(sp, id_m)},
                                    {d.width * (1.0 + n_osc), tensor(id_q, b)}};
    if (n_osc > 0.0)
        jumps.push_back({d.width * n_osc, tensor(id_q, CMatrix(b.adjoint()))});
    return lindblad_generator(h, jumps);
}

// Null vector of a generator, normalized to unit trace.
CMatrix stationary_state(const CMatrix& gen, Index dim)
{
    CMatrix a = gen;
    CVector rhs = CVector::Zero(a.rows());
    a.row(0).setZero();
    for (Index k = 0; k < dim; ++k)
        a(0, k * (dim + 1)) = 1.0;
    rhs(0) = 1.0;
    CMatrix rho = unvec(a.partialPivLu().solve(rhs), dim);
    return 0.5 * (rho + rho.adjoint());
}

} // namespace

SpectralDensity lorentzian(const DephasingBath& b)
{
    return make_sd(lorentzian_sd, b, {b.frequency});
}

SpectralDensity thermalized(const DephasingBath& b)
{
    return make_sd(thermalized_sd, b, {b.frequency, -b.frequency});
}

SpectralDensity alt_lorentzian(const DephasingBath& b)
{
    return make_sd(alt_sd, b, {b.frequency});
}

SpectralDensity alt_thermalized(const DephasingBath& b)
{
    return make_sd(alt_thermalized_sd, b, {b.frequency, -b.frequency});
}

Quadrature decoherence_function(const SpectralDensity& j, double t)
{
    if (t < 0.0)
        throw ConfigError("decoherence function needs t >= 0");
    if (t == 0.0)
        return {0.0, 0.0};
    // Fold the negative axis: integrand (J(w) + J(-w)) * 2 sin^2(wt/2) / w^2 on w > 0.
    auto g = [&](double w) { return j.value(w) + j.value(-w); };
    auto f = [&](double w) {
        if (w == 0.0)
            return 0.5 * g(0.0) * t * t;
        const double s = std::sin(0.5 * w * t);
        return g(w) * 2.0 * s * s / (w * w);
    };
    const double upper = quadrature_upper(j);
    Accumulator acc;
    integrate_panels(f, panel_cuts(j, upper, std::min(j.width, kPi / t)), acc);
    // Beyond the cut the cosine part is bounded by its first integration by parts.
    acc.value += tail_integral([&](double w) { return g(w) / (w * w); }, upper);
    acc.error += 2.0 * std::abs(g(upper)) / (upper * upper * t);
    check_converged(acc, "decoherence function");
    const double scale = -4.0 / kPi;
    return {scale * acc.value, std::abs(scale) * acc.error};
}

double decoherence_slope(const SpectralDensity& j, double t0, double t1, int samples)
{
    if (samples < 2 || !(t1 > t0))
        throw ConfigError("decoherence slope needs t1 > t0 and at least two samples");
    double st = 0, sv = 0, stt = 0, stv = 0;
    for (int i = 0; i < samples; ++i) {
        const double t = t0 + (t1 - t0) * i / (samples - 1);
        const double v = decoherence_function(j, t).value;
        st += t;
        sv += v;
        stt += t * t;
        stv += t * v;
    }
    const double n = samples;
    return (n * stv - st * sv) / (n * stt - st * st);
}

Quadrature decoupling_energy(const SpectralDensity& j)
{
    // Principal value folded onto w > 0: (J(w) - J(-w)) / w is regular at 0.
    auto f = [&](double w) {
        if (w == 0.0) {
            const double h = 1e-6 * j.width;
            return (j.value(h) - j.value(-h)) / h;
        }
        return (j.value(w) - j.value(-w)) / w;
    };
    const double upper = quadrature_upper(j);
    Accumulator acc;
    integrate_panels(f, panel_cuts(j, upper, j.width), acc);
    acc.value += tail_integral(f, upper);
    check_converged(acc, "decoupling energy");
    return {2.0 / kPi * acc.value, 2.0 / kPi * acc.error};
}

double decoupling_energy(const DephasingBath& b)
{
    const double g = b.width, w0 = b.frequency;
    return 8.0 * b.coupling * b.coupling * w0 / (4.0 * w0 * w0 + g * g);
}

Quadrature recoupling_bound(const SpectralDensity& j, double tau)
{
    if (tau < 0.0)
        throw ConfigError("recoupling bound needs tau >= 0");
    auto d = [&](double w) {
        if (w == 0.0) {
            const double h = 1e-6 * j.width;
            return (j.value(h) - j.value(-h)) / h;
        }
        return (j.value(w) - j.value(-w)) / w;
    };
    auto f = [&](double w) { return d(w) * std::cos(w * tau); };
    const double upper = quadrature_upper(j);
    Accumulator acc;
    const double h = tau > 0.0 ? std::min(j.width, kPi / tau) : j.width;
    integrate_panels(f, panel_cuts(j, upper, h), acc);
    // Beyond the cut the oscillating tail is bounded by its first integration by parts.
    if (tau == 0.0)
        acc.value += tail_integral(d, upper);
    else
        acc.error += 2.0 * std::abs(d(upper)) / tau;
    check_converged(acc, "recoupling bound");
    return {std::abs(2.0 / kPi * acc.value), 2.0 / kPi * acc.error};
}

CMatrix thermal_stroke_steady_state(const EngineConfig& cfg, Stroke s, Index n_max)
{
    if (is_ramp(s))
        throw ConfigError(std::string("no thermal bath on the ") + stroke_name(s) + " stroke");
    const Index dim = 2 * (n_max + 1);
    HilbertLayout({2, n_max + 1});
    return stationary_state(qubit_mode_generator(cfg, s, n_max, cfg.dephasing.coupling), dim);
}

double recoupling_energy_measured(const EngineConfig& cfg, Stroke s, double tau)
{
    if (tau < 0.0)
        throw ConfigError("recoupling time must be non-negative");
    const auto& d = cfg.dephasing;
    if (d.coupling == 0.0)
        return 0.0;
    const Index n_max = cfg.numerics.n_max >= 0 ? cfg.numerics.n_max : default_cutoff(d);
    const Index dim = 2 * (n_max + 1);
    CMatrix rho = thermal_stroke_steady_state(cfg, s, n_max);
    if (tau > 0.0) {
        const CMatrix free_gen = qubit_mode_generator(cfg, s, n_max, 0.0);
        rho = unvec(propagator_map(free_gen, tau) * vec(rho), dim);
    }
    const Eigensystem e = instantaneous_eigensystem(cfg.drive.omega, stroke_rabi(cfg.drive, s));
    const CMatrix b = annihilation(n_max + 1);
    const CMatrix h_int = d.coupling * tensor(CMatrix(e.sigma_z()), CMatrix(b + b.adjoint()));
    return expectation(h_int, rho);
}

cplx steady_displacement_numeric(const DephasingBath& b, Index n_max)
{
    const Index dim = n_max + 1;
    const CMatrix a = annihilation(dim);
    // Ground branch: the qubit sits in sz = -1.
    const CMatrix h = b.frequency * number_operator(dim) - b.coupling * CMatrix(a + a.adjoint());
    const double n = mode_occupation(b);
    std::vector<JumpOperator> jumps{{b.width * (1.0 + n), a}};
    if (n > 0.0)
        jumps.push_back({b.width * n, a.adjoint()});
    const CMatrix rho = stationary_state(lindblad_generator(h, jumps), dim);
    return (a * rho).trace();
}

ConditionalMode conditional_oscillator_analysis(const CMatrix& rho, Index mode_dim, const Eigensystem& e)
{
    if (rho.rows() != 2 * mode_dim || rho.cols() != 2 * mode_dim)
        throw DimensionError("conditional analysis: state is not qubit (x) mode of the given dimension");
    const CMatrix a = annihilation(mode_dim);
    auto branch = [&](const Eigen::Vector2cd& x, double& p, cplx& alpha, double& fid) {
        CMatrix m = CMatrix::Zero(mode_dim, mode_dim);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                m += std::conj(x(i)) * x(j) * rho.block(i * mode_dim, j * mode_dim, mode_dim, mode_dim);
        p = m.trace().real();
        if (p < 1e-12)
            throw NumericsError("conditional analysis: branch population below 1e-12");
        m /= p;
        alpha = (a * m).trace();
        const CVector k = coherent_ket(alpha, mode_dim - 1, 1.0);
        fid = (k.adjoint() * m * k)(0, 0).real();
    };
    ConditionalMode out;
    branch(e.excited, out.p_e, out.alpha_e, out.fidelity_e);
    branch(e.ground, out.p_g, out.alpha_g, out.fidelity_g);
    return out;
}

CMatrix ansatz_state(double p_e, cplx alpha, const Eigensystem& e, Index n_max)
{
    if (!(p_e >= 0.0 && p_e <= 1.0))
        throw ConfigError("Ansatz population outside [0, 1]");
    const CVector ke = coherent_ket(-alpha, n_max, 1.0);
    const CVector kg = coherent_ket(alpha, n_max, 1.0);
    const CMatrix pe = e.excited * e.excited.adjoint();
    const CMatrix pg = e.ground * e.ground.adjoint();
    return p_e * tensor(pe, CMatrix(ke * ke.adjoint())) + (1.0 - p_e) * tensor(pg, CMatrix(kg * kg.adjoint()));
}

HeatBounds dissipated_heat_bounds(const EngineConfig& cfg, Stroke s)
{
    if (is_ramp(s))
        throw ConfigError(std::string("no dissipated heat on the ") + stroke_name(s) + " stroke");
    const auto& d = cfg.dephasing;
    if (d.coupling == 0.0)
        return {0.0, 0.0};
    const ThermalBath& bath = s == Stroke::Hot ? cfg.hot : cfg.cold;
    const double pref = 2.0 * d.frequency * bath.gamma * cfg.drive.durations[s] / d.width;
    if (std::isinf(d.beta)) {
        const double rate = effective_dephasing_rate(d);
        return {pref * rate * (bath.n + excited_fraction(cfg.cold.n)),
                pref * rate * (bath.n + excited_fraction(cfg.hot.n))};
    }
    DephasingBath cold_mode = d;
    cold_mode.beta = std::numeric_limits<double>::infinity();
    return {0.0, pref * effective_dephasing_rate(cold_mode) * (bath.n + 1.0)};
}

DifferentialFlows differential_flows(double p_e, cplx alpha, double eps, const ThermalBath& bath, double coupling)
{
    const double p_g = 1.0 - p_e;
    return {eps * bath.gamma * (p_g * bath.n - p_e * (bath.n + 1.0)),
            4.0 * coupling * bath.gamma * alpha.real() * (bath.n + p_e)};
}

QuasistaticCycle quasistatic(double eps_c, double eps_h, double x_c, double x_h)
{
    const double pc = std::tanh(x_c), ph = std::tanh(x_h);
    QuasistaticCycle q;
    q.w_com = -0.5 * (eps_h - eps_c) * pc;
    q.q_h = -0.5 * eps_h * (ph - pc);
    q.w_exp = 0.5 * (eps_h - eps_c) * ph;
    q.q_c = -0.5 * eps_c * (pc - ph);
    q.w_ext = -(q.w_com + q.w_exp);
    q.eta = q.q_h != 0.0 ? q.w_ext / q.q_h : 0.0;
    return q;
}

double polarization_argument(double n)
{
    return std::atanh(1.0 / (2.0 * n + 1.0));
}

double implied_temperature(double n, double eps)
{
    return eps / std::log1p(1.0 / n);
}

double carnot_efficiency(double temperature_ratio)
{
    return 1.0 - temperature_ratio;
}

double curzon_ahlborn_efficiency(double temperature_ratio)
{
    return 1.0 - std::sqrt(temperature_ratio);
}

ConstantPowerPoint scaling_constant_power(double width_bar, double frequency_bar, double width)
{
    if (!(width_bar > 0.0))
        throw ConfigError("reference width must be positive");
    const double critical = (4.0 * frequency_bar * frequency_bar + width_bar * width_bar) / width_bar;
    if (!(width > 0.0) || width > critical) {
        std::ostringstream os;
        os << "width " << width << " outside (0, " << critical << "]";
        throw ConfigError(os.str());
    }
    return {0.5 * std::sqrt(std::max(0.0, width * (critical - width))), critical};
}

EngineConfig scaling_constant_efficiency(const EngineConfig& base, double lambda)
{
    if (!(lambda >= 1.0))
        throw ConfigError("speed-up factor must be at least 1");
    EngineConfig out = base;
    auto& d = out.dephasing;
    const double critical = scaling_constant_power(d.width, d.frequency, d.width).critical_width;
    const double gap = critical - d.width;
    for (Stroke s : kCycleOrder)
        out.drive.durations[s] /= lambda;
    out.hot.gamma *= lambda;
    out.cold.gamma *= lambda;
    d.coupling *= std::sqrt(lambda);
    d.width = critical - gap / (lambda * lambda);
    d.frequency = 0.5 * std::sqrt(std::max(0.0, d.width * (critical - d.width)));
    out.numerics.n_max = -1;
    return out;
}

} // namespace otto
