#include "otto/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace otto {

const char* stroke_name(Stroke s)
{
    switch (s) {
    case Stroke::Compression: return "compression";
    case Stroke::Hot: return "hot";
    case Stroke::Expansion: return "expansion";
    case Stroke::Cold: return "cold";
    }
    return "?";
}

double StrokeDurations::operator[](Stroke s) const
{
    switch (s) {
    case Stroke::Compression: return compression;
    case Stroke::Hot: return hot;
    case Stroke::Expansion: return expansion;
    case Stroke::Cold: return cold;
    }
    return 0.0;
}

double& StrokeDurations::operator[](Stroke s)
{
    switch (s) {
    case Stroke::Compression: return compression;
    case Stroke::Hot: return hot;
    case Stroke::Expansion: return expansion;
    default: return cold;
    }
}

double rabi_in_stroke(const DriveProfile& drive, Stroke s, double local_t)
{
    const double tau = drive.durations[s];
    switch (s) {
    case Stroke::Compression: return tau > 0.0 ? drive.rabi_max * std::clamp(local_t / tau, 0.0, 1.0) : drive.rabi_max;
    case Stroke::Hot: return drive.rabi_max;
    case Stroke::Expansion: return tau > 0.0 ? drive.rabi_max * (1.0 - std::clamp(local_t / tau, 0.0, 1.0)) : 0.0;
    case Stroke::Cold: return 0.0;
    }
    return 0.0;
}

double stroke_rabi(const DriveProfile& drive, Stroke s)
{
    if (is_ramp(s))
        throw ConfigError(std::string("no fixed drive on the ") + stroke_name(s) + " stroke");
    return s == Stroke::Hot ? drive.rabi_max : 0.0;
}

double rabi(const DriveProfile& drive, double t)
{
    const double period = drive.durations.cycle();
    if (period <= 0.0)
        throw ConfigError("cycle duration must be positive");
    double u = std::fmod(t, period);
    if (u < 0.0)
        u += period;
    for (Stroke s : kCycleOrder) {
        double tau = drive.durations[s];
        if (u < tau || s == Stroke::Cold)
            return rabi_in_stroke(drive, s, u);
        u -= tau;
    }
    return 0.0;
}

Eigen::Matrix2cd Eigensystem::frame() const
{
    Eigen::Matrix2cd r;
    r.col(0) = excited;
    r.col(1) = ground;
    return r;
}

Eigen::Matrix2cd Eigensystem::sigma_z() const
{
    return excited * excited.adjoint() - ground * ground.adjoint();
}

Eigen::Matrix2cd Eigensystem::sigma_plus() const
{
    return excited * ground.adjoint();
}

Eigensystem instantaneous_eigensystem(double omega, double rabi)
{
    if (omega == 0.0 && rabi == 0.0)
        throw ConfigError("degenerate qubit: omega and drive both vanish");
    Eigensystem e;
    e.epsilon = std::hypot(omega, rabi);
    const double theta = std::atan2(rabi, omega);
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    e.excited << c, s;
    e.ground << s, -c;
    if (s < 0.0 || (s == 0.0 && c < 0.0))
        e.ground = -e.ground;
    if (e.excited(0).real() < 0.0 || (e.excited(0).real() == 0.0 && e.excited(1).real() < 0.0))
        e.excited = -e.excited;
    return e;
}

namespace {

double coth_half(double beta, double w)
{
    if (std::isinf(beta))
        return w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
    return 1.0 / std::tanh(0.5 * beta * w);
}

} // namespace

double lorentzian_sd(const DephasingBath& b, double w)
{
    const double d = w - b.frequency;
    return 2.0 * b.coupling * b.coupling * b.width / (b.width * b.width + 4.0 * d * d);
}

double thermalized_sd(const DephasingBath& b, double w)
{
    const double c = coth_half(b.beta, b.frequency);
    DephasingBath m = b;
    return 0.5 * lorentzian_sd(m, w) * (c + 1.0) + 0.5 * lorentzian_sd(m, -w) * (c - 1.0);
}

double alt_sd(const DephasingBath& b, double w)
{
    const double g = b.width, w0 = b.frequency;
    const double q = w * w - w0 * w0;
    return 2.0 * b.coupling * b.coupling * g * w0 * w / (g * g * w * w + q * q);
}

double alt_thermalized_sd(const DephasingBath& b, double w)
{
    if (w == 0.0)
        return 0.0;
    const double sgn = w > 0.0 ? 1.0 : -1.0;
    return sgn * alt_sd(b, std::abs(w)) * 0.5 * (coth_half(b.beta, w) + 1.0);
}

double mode_occupation(const DephasingBath& b)
{
    if (std::isinf(b.beta))
        return 0.0;
    return 1.0 / std::expm1(b.beta * b.frequency);
}

double excited_fraction(double n)
{
    return n / (2.0 * n + 1.0);
}

cplx steady_displacement(const DephasingBath& b)
{
    const double g = b.width, w0 = b.frequency;
    return 2.0 * b.coupling * cplx(2.0 * w0, g) / (4.0 * w0 * w0 + g * g);
}

double effective_dephasing_rate(const DephasingBath& b)
{
    const double g = b.width, w0 = b.frequency;
    return 8.0 * b.coupling * b.coupling * g / (g * g + 4.0 * w0 * w0) * coth_half(b.beta, w0);
}

Index default_cutoff(const DephasingBath& b)
{
    if (b.coupling == 0.0)
        return 0;
    const double a = std::abs(steady_displacement(b));
    Index m = 1;
    while (coherent_level_population(a, m) >= 1e-8)
        ++m;
    // A warm mode carries thermal excitations on top of the displacement.
    const double n_th = mode_occupation(b);
    if (n_th > 0.0) {
        Index k = 1;
        while (std::pow(n_th / (1.0 + n_th), static_cast<double>(k)) >= 1e-8)
            ++k;
        m = std::max(m, k);
    }
    return m + 4;
}

double max_splitting(const DriveProfile& drive)
{
    return std::hypot(drive.omega, drive.rabi_max);
}

namespace {

double fastest_rate(const EngineConfig& cfg)
{
    double r = max_splitting(cfg.drive);
    const auto& d = cfg.dephasing;
    if (d.coupling != 0.0)
        r = std::max({r, std::abs(d.frequency), std::abs(d.coupling), d.width});
    return r;
}

} // namespace

double default_dt(const EngineConfig& cfg)
{
    return 0.02 / fastest_rate(cfg);
}

double grid_dt(const EngineConfig& cfg)
{
    if (cfg.numerics.dt > 0.0)
        return cfg.numerics.dt;
    return std::exp2(std::floor(std::log2(default_dt(cfg))));
}

void check_stability(const EngineConfig& cfg, double dt)
{
    if (!(dt > 0.0))
        throw ConfigError("time step must be positive");
    const double r = fastest_rate(cfg);
    if (dt * r > cfg.numerics.stability_bound) {
        std::ostringstream os;
        os << "time step " << dt << " violates stability bound: dt * " << r << " = " << dt * r << " > "
           << cfg.numerics.stability_bound;
        throw ConfigError(os.str());
    }
}

LocalGenerator build_liouvillian(Channel c, const EngineConfig& cfg, Stroke s, Index n_max)
{
    if (c == Channel::Oscillator) {
        const auto& d = cfg.dephasing;
        const Index dim = n_max + 1;
        const double n = mode_occupation(d);
        CMatrix b = annihilation(dim);
        std::vector<JumpOperator> jumps{{d.width * (1.0 + n), b}};
        if (n > 0.0)
            jumps.push_back({d.width * n, b.adjoint()});
        return {c, 1, lindblad_generator(CMatrix::Zero(dim, dim), jumps)};
    }
    const Stroke want = c == Channel::Hot ? Stroke::Hot : Stroke::Cold;
    if (s != want) {
        std::ostringstream os;
        os << (c == Channel::Hot ? "hot" : "cold") << " channel requested on the " << stroke_name(s) << " stroke";
        throw ConfigError(os.str());
    }
    const ThermalBath& bath = c == Channel::Hot ? cfg.hot : cfg.cold;
    Eigensystem e = instantaneous_eigensystem(cfg.drive.omega, stroke_rabi(cfg.drive, s));
    CMatrix sp = e.sigma_plus();
    std::vector<JumpOperator> jumps{{bath.gamma * (bath.n + 1.0), sp.adjoint()}, {bath.gamma * bath.n, sp}};
    return {c, 0, lindblad_generator(CMatrix::Zero(2, 2), jumps)};
}

Operator dampf_hamiltonian(const EngineConfig& cfg, double t, Index n_max)
{
    const auto& d = cfg.dephasing;
    const Index dim = n_max + 1;
    Eigensystem e = instantaneous_eigensystem(cfg.drive.omega, rabi(cfg.drive, t));
    CMatrix b = annihilation(dim);
    CMatrix x = b + b.adjoint();
    CMatrix id_q = CMatrix::Identity(2, 2), id_m = CMatrix::Identity(dim, dim);
    CMatrix sz = e.sigma_z();
    CMatrix h = tensor(CMatrix(e.hamiltonian()), id_m) + d.coupling * tensor(sz, x) + d.frequency * tensor(id_q, number_operator(dim));
    return {HilbertLayout({2, dim}), h};
}

} // namespace otto
