#include "otto/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "otto/io.hpp"

namespace otto {

namespace {

struct Field {
    std::string key;
    std::function<double(const EngineConfig&)> get;
    std::function<void(EngineConfig&, double)> set;
    bool integer = false;
    bool required = true;
};

#define OTTO_FIELD(name, member, ...)                                                                                  \
    Field                                                                                                              \
    {                                                                                                                  \
        name, [](const EngineConfig& c) { return static_cast<double>(c.member); },                                     \
            [](EngineConfig& c, double v) { c.member = static_cast<decltype(c.member)>(v); }, __VA_ARGS__              \
    }

const std::vector<Field>& fields()
{
    static const std::vector<Field> table{
        OTTO_FIELD("engine.omega", drive.omega, false, true),
        OTTO_FIELD("engine.omega_rabi_max", drive.rabi_max, false, true),
        OTTO_FIELD("bath.hot.n", hot.n, false, true),
        OTTO_FIELD("bath.hot.gamma", hot.gamma, false, true),
        OTTO_FIELD("bath.cold.n", cold.n, false, true),
        OTTO_FIELD("bath.cold.gamma", cold.gamma, false, true),
        OTTO_FIELD("dephasing.Gamma", dephasing.coupling, false, true),
        OTTO_FIELD("dephasing.gamma", dephasing.width, false, true),
        OTTO_FIELD("dephasing.omega0", dephasing.frequency, false, true),
        OTTO_FIELD("dephasing.beta", dephasing.beta, false, true),
        OTTO_FIELD("strokes.tau_com", drive.durations.compression, false, true),
        OTTO_FIELD("strokes.tau_h", drive.durations.hot, false, true),
        OTTO_FIELD("strokes.tau_exp", drive.durations.expansion, false, true),
        OTTO_FIELD("strokes.tau_c", drive.durations.cold, false, true),
        OTTO_FIELD("numerics.dt", numerics.dt, false, false),
        OTTO_FIELD("numerics.n_max", numerics.n_max, true, false),
        OTTO_FIELD("numerics.cycle_tol", numerics.cycle_tol, false, false),
        OTTO_FIELD("numerics.max_cycles", numerics.max_cycles, true, false),
        OTTO_FIELD("tedopa.a", chain.support, false, false),
        OTTO_FIELD("tedopa.N", chain.sites, true, false),
        OTTO_FIELD("tedopa.local_dim", chain.local_dim, true, false),
        OTTO_FIELD("tedopa.max_excitations", chain.max_excitations, true, false),
        OTTO_FIELD("tedopa.horizon", chain.horizon, false, false),
    };
    return table;
}

#undef OTTO_FIELD

const Field* find_field(const std::string& key)
{
    for (const auto& f : fields())
        if (f.key == key)
            return &f;
    return nullptr;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_value(const std::string& text, bool integer, double& out)
{
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (integer) {
        long v = 0;
        auto [p, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || p != last)
            return false;
        out = static_cast<double>(v);
        return true;
    }
    auto [p, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && p == last && !std::isnan(out);
}

// Assigns parsed "key = value" pairs; problems go to errors.
void assign(EngineConfig& cfg, const std::vector<std::pair<std::string, std::string>>& pairs,
            std::vector<std::string>& errors, std::set<std::string>* seen)
{
    for (const auto& [key, value] : pairs) {
        const Field* f = find_field(key);
        if (!f) {
            errors.push_back("unknown key '" + key + "'");
            continue;
        }
        if (seen && !seen->insert(key).second) {
            errors.push_back("duplicate key '" + key + "'");
            continue;
        }
        double v = 0.0;
        if (!parse_value(value, f->integer, v)) {
            errors.push_back("key '" + key + "': cannot parse '" + value + "' as " +
                             (f->integer ? "an integer" : "a number"));
            continue;
        }
        f->set(cfg, v);
    }
}

[[noreturn]] void fail(const std::vector<std::string>& errors)
{
    std::ostringstream os;
    os << "invalid configuration (" << errors.size() << " problem" << (errors.size() == 1 ? "" : "s") << "):";
    for (const auto& e : errors)
        os << "\n  " << e;
    throw ConfigError(os.str());
}

// Coupling of a reduced mode (width, frequency) with the same effective
// dephasing rate as the reference mode.
double matched_coupling(const DephasingBath& reference, double width, double frequency)
{
    const double rate = effective_dephasing_rate(reference);
    return std::sqrt(rate * (width * width + 4.0 * frequency * frequency) / (8.0 * width));
}

EngineConfig base_engine()
{
    EngineConfig c;
    c.drive.omega = 1.0;
    c.drive.rabi_max = 0.5;
    c.drive.durations = {0.78125, 1.84375, 0.6875, 2.625};
    c.hot = {0.4857, 0.5};
    c.cold = {0.0524, 0.5};
    return c;
}

DephasingBath strong_mode()
{
    return {256.0, 128.0, 1024.0, std::numeric_limits<double>::infinity()};
}

DephasingBath strong_mode_lite()
{
    DephasingBath b{0.0, 128.0, 64.0, std::numeric_limits<double>::infinity()};
    b.coupling = matched_coupling(strong_mode(), b.width, b.frequency);
    return b;
}

// The strong mode with coupling^2, width and frequency all scaled by 1/16.
// Keeps Gamma_eff, the decoupling energy and frequency/width.
DephasingBath constant_power_lite()
{
    return {64.0, 8.0, 64.0, std::numeric_limits<double>::infinity()};
}

// Width just below the critical value of (width_bar, frequency_bar), with the
// frequency on the constant-rate curve.
void near_critical(DephasingBath& b, double gap)
{
    const double critical = (4.0 * b.frequency * b.frequency + b.width * b.width) / b.width;
    b.width = critical - gap;
    b.frequency = 0.5 * std::sqrt(b.width * gap);
}

} // namespace

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : fields())
            k.push_back(f.key);
        return k;
    }();
    return keys;
}

const std::vector<std::string>& required_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : fields())
            if (f.required)
                k.push_back(f.key);
        return k;
    }();
    return keys;
}

const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names{"paper-4.1",  "paper-4.1-lite", "paper-4.3",     "paper-4.3-lite",
                                                "fig2",       "fig2-lite",      "appendixD",     "appendixD-lite",
                                                "quasistatic-check"};
    return names;
}

EngineConfig preset(const std::string& name)
{
    EngineConfig c = base_engine();
    if (name == "paper-4.1" || name == "paper-4.1-lite")
        return c;
    if (name == "paper-4.3") {
        c.dephasing = strong_mode();
        return c;
    }
    if (name == "paper-4.3-lite") {
        c.dephasing = strong_mode_lite();
        c.numerics.dt = std::ldexp(1.0, -12);
        return c;
    }
    if (name == "fig2" || name == "fig2-lite") {
        c.dephasing = {0.5, 2.0, 10.0, std::numeric_limits<double>::infinity()};
        c.drive.durations = {2.0, 2.0, 2.0, 2.0};
        return c;
    }
    if (name == "appendixD") {
        c.dephasing = strong_mode();
        near_critical(c.dephasing, std::ldexp(1.0, -8));
        return c;
    }
    if (name == "appendixD-lite") {
        c.dephasing = constant_power_lite();
        near_critical(c.dephasing, std::ldexp(1.0, -8));
        return c;
    }
    if (name == "quasistatic-check") {
        c.drive.durations = {100.0, 100.0, 100.0, 100.0};
        return c;
    }
    std::string known;
    for (const auto& n : preset_names())
        known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

EngineConfig parse_config(const std::string& text)
{
    std::vector<std::string> errors;
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string preset_name;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
            continue;
        }
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key == "preset")
            preset_name = value;
        else
            pairs.emplace_back(key, value);
    }

    EngineConfig cfg;
    if (!preset_name.empty()) {
        try {
            cfg = preset(preset_name);
        } catch (const ConfigError& e) {
            errors.push_back(e.what());
        }
    }
    std::set<std::string> seen;
    assign(cfg, pairs, errors, &seen);
    if (preset_name.empty())
        for (const auto& k : required_keys())
            if (!seen.count(k))
                errors.push_back("missing key '" + k + "'");
    if (errors.empty())
        errors = validate(cfg);
    if (!errors.empty())
        fail(errors);
    return cfg;
}

EngineConfig apply_overrides(const EngineConfig& cfg, const std::vector<std::string>& assignments)
{
    std::vector<std::string> errors;
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos) {
            errors.push_back("override '" + a + "' is not key=value");
            continue;
        }
        pairs.emplace_back(trim(a.substr(0, eq)), trim(a.substr(eq + 1)));
    }
    EngineConfig out = cfg;
    assign(out, pairs, errors, nullptr);
    if (errors.empty())
        errors = validate(out);
    if (!errors.empty())
        fail(errors);
    return out;
}

std::vector<std::string> validate(const EngineConfig& c)
{
    std::vector<std::string> e;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok)
            e.push_back(msg);
    };
    need(c.drive.omega >= 0.0, "engine.omega must be >= 0");
    need(c.drive.rabi_max >= 0.0, "engine.omega_rabi_max must be >= 0");
    need(c.drive.omega > 0.0 || c.drive.rabi_max > 0.0, "engine.omega and engine.omega_rabi_max are both zero");
    need(c.hot.n >= 0.0, "bath.hot.n must be >= 0");
    need(c.cold.n >= 0.0, "bath.cold.n must be >= 0");
    need(c.hot.gamma >= 0.0, "bath.hot.gamma must be >= 0");
    need(c.cold.gamma >= 0.0, "bath.cold.gamma must be >= 0");
    need(c.dephasing.coupling >= 0.0, "dephasing.Gamma must be >= 0");
    need(c.dephasing.width > 0.0 || c.dephasing.coupling == 0.0, "dephasing.gamma must be > 0 when dephasing.Gamma > 0");
    need(c.dephasing.width >= 0.0, "dephasing.gamma must be >= 0");
    need(c.dephasing.frequency >= 0.0, "dephasing.omega0 must be >= 0");
    need(c.dephasing.beta > 0.0, "dephasing.beta must be > 0 (inf for zero temperature)");
    for (Stroke s : kCycleOrder)
        need(c.drive.durations[s] > 0.0 && std::isfinite(c.drive.durations[s]),
             std::string("strokes: the ") + stroke_name(s) + " duration must be positive and finite");
    need(c.numerics.dt >= 0.0, "numerics.dt must be >= 0 (0 selects it automatically)");
    need(c.numerics.n_max >= -1, "numerics.n_max must be >= -1 (-1 selects it automatically)");
    need(c.numerics.cycle_tol > 0.0, "numerics.cycle_tol must be > 0");
    need(c.numerics.max_cycles >= 1, "numerics.max_cycles must be >= 1");
    need(c.chain.support > 0.0, "tedopa.a must be > 0");
    need(c.chain.sites >= 1, "tedopa.N must be >= 1");
    need(c.chain.local_dim >= 2, "tedopa.local_dim must be >= 2");
    need(c.chain.max_excitations >= 0, "tedopa.max_excitations must be >= 0");
    need(c.chain.horizon > 0.0, "tedopa.horizon must be > 0");
    return e;
}

std::string render_config(const EngineConfig& cfg)
{
    std::string out;
    for (const auto& f : fields())
        out += f.key + " = " + format_number(f.get(cfg)) + "\n";
    return out;
}

std::string config_hash(const EngineConfig& cfg)
{
    return content_hash(render_config(cfg));
}

} // namespace otto
