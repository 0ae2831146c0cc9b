#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vmemflow/errors.hpp"
#include "vmemflow/io.hpp"

namespace vmemflow {

enum class ExperimentKind { kernel_check, run_transient, solve_steady, decay_study,
                            convergence_study };

inline const char* kind_name(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::kernel_check: return "kernel-check";
    case ExperimentKind::run_transient: return "run-transient";
    case ExperimentKind::solve_steady: return "solve-steady";
    case ExperimentKind::decay_study: return "decay-study";
    case ExperimentKind::convergence_study: return "convergence-study";
    }
    return "?";
}

// Section values mirror the config file; every field has a documented default
// and is echoed back by render_config.
struct KernelSection {
    double beta  = 0.5;
    double delta = 1.0;
    double rho   = 0.5;
    double dt    = 0.05; // kernel-check weight table
    long n       = 200;
    int trials   = 1000;
    bool operator==(const KernelSection&) const = default;
};

struct GridSection {
    double lx = 1.0, ly = 1.0;
    int nx = 64, ny = 64;
    bool operator==(const GridSection&) const = default;
};

struct FluidSection {
    double mu    = 1.0;
    double dt    = 0.02;
    double t_end = 20.0;
    std::string history_mode = "direct"; // direct | soe
    double soe_tol           = 1e-8;
    std::string initial      = "zero"; // zero | vortex | steady
    double initial_amplitude = 1.0;
    bool advection           = true;
    bool operator==(const FluidSection&) const = default;
};

struct ForcingSection {
    std::string variant = "zero"; // zero | steady | decaying | manufactured
    std::string fbar_profile = "zero"; // zero | vortex | uniform_x | uniform_y | mixed
    double fbar_amplitude = 0.0;
    std::string g_profile = "zero";
    double g_amplitude    = 0.0;
    double alpha0         = 0.0;
    std::string manufactured_choice = "taylor"; // taylor | constant_force
    double manufactured_alpha       = 0.25;
    double manufactured_amplitude   = 1.0;
    bool operator==(const ForcingSection&) const = default;
};

struct SteadySection {
    double mu = 1.0;
    std::string method = "stokes_iteration"; // stokes_iteration | newton
    double tol     = 1e-11;
    int max_iters  = 200;
    int mu0_trials = 32;
    int nh_samples = 64;
    bool operator==(const SteadySection&) const = default;
};

struct AnalysisSection {
    std::string study = "steady_space"; // steady_space | transient_space | transient_time
    int levels        = 3;
    double expected_order = 2.0;
    double order_tolerance = 0.2;
    bool operator==(const AnalysisSection&) const = default;
};

struct OutputSection {
    int cadence = 5;
    std::string snapshots = "none"; // none | final | every:<k>
    bool operator==(const OutputSection&) const = default;
};

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::kernel_check;
    KernelSection kernel;
    GridSection grid;
    FluidSection fluid;
    ForcingSection forcing;
    SteadySection steady;
    AnalysisSection analysis;
    OutputSection output;
    bool operator==(const ExperimentSpec&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> sections_for(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::kernel_check: return {"kernel"};
    case ExperimentKind::run_transient: return {"kernel", "grid", "fluid", "forcing", "output"};
    case ExperimentKind::solve_steady: return {"kernel", "grid", "steady", "forcing"};
    case ExperimentKind::decay_study:
        return {"kernel", "grid", "fluid", "forcing", "steady", "output"};
    case ExperimentKind::convergence_study: return {"kernel", "fluid", "steady", "analysis"};
    }
    return {};
}

struct KeyBinding {
    enum class Type { real, integer, longint, text, boolean } type;
    void* target;
};

inline std::map<std::string, std::map<std::string, KeyBinding>> bind_spec(ExperimentSpec& s) {
    using T = KeyBinding::Type;
    std::map<std::string, std::map<std::string, KeyBinding>> m;
    m["kernel"] = {{"beta", {T::real, &s.kernel.beta}},
                   {"delta", {T::real, &s.kernel.delta}},
                   {"rho", {T::real, &s.kernel.rho}},
                   {"dt", {T::real, &s.kernel.dt}},
                   {"n", {T::longint, &s.kernel.n}},
                   {"trials", {T::integer, &s.kernel.trials}}};
    m["grid"]   = {{"lx", {T::real, &s.grid.lx}},
                   {"ly", {T::real, &s.grid.ly}},
                   {"nx", {T::integer, &s.grid.nx}},
                   {"ny", {T::integer, &s.grid.ny}}};
    m["fluid"]  = {{"mu", {T::real, &s.fluid.mu}},
                   {"dt", {T::real, &s.fluid.dt}},
                   {"t_end", {T::real, &s.fluid.t_end}},
                   {"history_mode", {T::text, &s.fluid.history_mode}},
                   {"soe_tol", {T::real, &s.fluid.soe_tol}},
                   {"initial", {T::text, &s.fluid.initial}},
                   {"initial_amplitude", {T::real, &s.fluid.initial_amplitude}},
                   {"advection", {T::boolean, &s.fluid.advection}}};
    m["forcing"] = {{"variant", {T::text, &s.forcing.variant}},
                    {"fbar_profile", {T::text, &s.forcing.fbar_profile}},
                    {"fbar_amplitude", {T::real, &s.forcing.fbar_amplitude}},
                    {"g_profile", {T::text, &s.forcing.g_profile}},
                    {"g_amplitude", {T::real, &s.forcing.g_amplitude}},
                    {"alpha0", {T::real, &s.forcing.alpha0}},
                    {"manufactured_choice", {T::text, &s.forcing.manufactured_choice}},
                    {"manufactured_alpha", {T::real, &s.forcing.manufactured_alpha}},
                    {"manufactured_amplitude", {T::real, &s.forcing.manufactured_amplitude}}};
    m["steady"] = {{"mu", {T::real, &s.steady.mu}},
                   {"method", {T::text, &s.steady.method}},
                   {"tol", {T::real, &s.steady.tol}},
                   {"max_iters", {T::integer, &s.steady.max_iters}},
                   {"mu0_trials", {T::integer, &s.steady.mu0_trials}},
                   {"nh_samples", {T::integer, &s.steady.nh_samples}}};
    m["analysis"] = {{"study", {T::text, &s.analysis.study}},
                     {"levels", {T::integer, &s.analysis.levels}},
                     {"expected_order", {T::real, &s.analysis.expected_order}},
                     {"order_tolerance", {T::real, &s.analysis.order_tolerance}}};
    m["output"] = {{"cadence", {T::integer, &s.output.cadence}},
                   {"snapshots", {T::text, &s.output.snapshots}}};
    return m;
}

inline void assign(const KeyBinding& b, const std::string& value, int line,
                   const std::string& key) {
    std::istringstream in(value);
    switch (b.type) {
    case KeyBinding::Type::real: {
        double v;
        in >> v;
        if (in.fail() || !in.eof())
            throw ConfigError("invalid real value for key '" + key + "'", line, key);
        *static_cast<double*>(b.target) = v;
        break;
    }
    case KeyBinding::Type::integer: {
        int v;
        in >> v;
        if (in.fail() || !in.eof())
            throw ConfigError("invalid integer value for key '" + key + "'", line, key);
        *static_cast<int*>(b.target) = v;
        break;
    }
    case KeyBinding::Type::longint: {
        long v;
        in >> v;
        if (in.fail() || !in.eof())
            throw ConfigError("invalid integer value for key '" + key + "'", line, key);
        *static_cast<long*>(b.target) = v;
        break;
    }
    case KeyBinding::Type::text:
        *static_cast<std::string*>(b.target) = value;
        break;
    case KeyBinding::Type::boolean:
        if (value == "true")
            *static_cast<bool*>(b.target) = true;
        else if (value == "false")
            *static_cast<bool*>(b.target) = false;
        else
            throw ConfigError("invalid boolean for key '" + key + "' (use true/false)", line, key);
        break;
    }
}

inline void require(bool ok, const std::string& key, const std::string& invariant) {
    if (!ok) throw ConfigError(key + " " + invariant, 0, key);
}

inline void check_choice(const std::string& value, const std::string& key,
                         const std::vector<std::string>& allowed) {
    if (std::find(allowed.begin(), allowed.end(), value) != allowed.end()) return;
    std::string msg = key + " must be one of {";
    for (std::size_t i = 0; i < allowed.size(); ++i)
        msg += (i ? ", " : "") + allowed[i];
    msg += "}";
    throw ConfigError(msg, 0, key);
}

} // namespace detail

/// Validate every numeric parameter against its domain invariants; runs before
/// any computation starts.
inline void validate_spec(const ExperimentSpec& s) {
    using detail::require;
    using detail::check_choice;
    const auto active = detail::sections_for(s.kind);
    auto uses = [&](const char* sec) {
        return std::find(active.begin(), active.end(), sec) != active.end();
    };

    if (uses("kernel")) {
        require(s.kernel.beta >= 0.0 && s.kernel.beta < 1.0, "beta", "must lie in [0,1)");
        require(s.kernel.delta > 0.0, "delta", "must be > 0");
        require(s.kernel.rho >= 0.0, "rho", "must be >= 0");
        if (s.kind == ExperimentKind::kernel_check) {
            require(s.kernel.dt > 0.0, "dt", "must be > 0");
            require(s.kernel.n >= 1, "n", "must be >= 1");
            require(s.kernel.trials >= 1, "trials", "must be >= 1");
        }
    }
    if (uses("grid")) {
        require(s.grid.lx > 0.0, "lx", "must be > 0");
        require(s.grid.ly > 0.0, "ly", "must be > 0");
        require(s.grid.nx >= 4, "nx", "must be >= 4");
        require(s.grid.ny >= 4, "ny", "must be >= 4");
    }
    if (uses("fluid")) {
        require(s.fluid.mu > 0.0, "mu", "must be > 0");
        require(s.fluid.dt > 0.0, "dt", "must be > 0");
        require(s.fluid.t_end >= s.fluid.dt, "t_end", "must be at least dt");
        check_choice(s.fluid.history_mode, "history_mode", {"direct", "soe"});
        require(s.fluid.soe_tol > 1e-12 && s.fluid.soe_tol < 1e-2, "soe_tol",
                "must lie in (1e-12, 1e-2)");
        check_choice(s.fluid.initial, "initial", {"zero", "vortex", "steady"});
    }
    if (uses("forcing")) {
        check_choice(s.forcing.variant, "variant", {"zero", "steady", "decaying", "manufactured"});
        check_choice(s.forcing.fbar_profile, "fbar_profile",
                     {"zero", "vortex", "uniform_x", "uniform_y", "mixed"});
        check_choice(s.forcing.g_profile, "g_profile",
                     {"zero", "vortex", "uniform_x", "uniform_y", "mixed"});
        if (s.forcing.variant == "decaying")
            require(s.forcing.alpha0 > 0.0, "alpha0", "must be > 0 for decaying forcing");
        check_choice(s.forcing.manufactured_choice, "manufactured_choice",
                     {"taylor", "constant_force"});
        if (s.forcing.variant == "manufactured")
            require(s.forcing.manufactured_alpha < s.kernel.delta, "manufactured_alpha",
                    "must be < delta");
    }
    if (uses("steady")) {
        require(s.steady.mu > 0.0, "mu", "must be > 0");
        check_choice(s.steady.method, "method", {"stokes_iteration", "newton"});
        require(s.steady.tol > 0.0, "tol", "must be > 0");
        require(s.steady.max_iters >= 1, "max_iters", "must be >= 1");
        require(s.steady.mu0_trials >= 1, "mu0_trials", "must be >= 1");
        require(s.steady.nh_samples >= 1, "nh_samples", "must be >= 1");
    }
    if (uses("analysis")) {
        check_choice(s.analysis.study, "study",
                     {"steady_space", "transient_space", "transient_time"});
        require(s.analysis.levels >= 2, "levels", "must be >= 2");
        require(s.analysis.order_tolerance > 0.0, "order_tolerance", "must be > 0");
    }
    if (uses("output")) {
        require(s.output.cadence >= 1, "cadence", "must be >= 1");
        const std::string& sn = s.output.snapshots;
        const bool every = sn.rfind("every:", 0) == 0;
        if (every) {
            std::istringstream in(sn.substr(6));
            int k;
            in >> k;
            require(!in.fail() && in.eof() && k >= 1, "snapshots",
                    "every:<k> requires an integer k >= 1");
        } else {
            check_choice(sn, "snapshots", {"none", "final"});
        }
    }
}

/// Parse the line-oriented "key = value" format with bracketed sections.
/// Unknown sections and keys are hard errors; so are duplicate keys.
inline ExperimentSpec parse_config(const std::string& text, ExperimentKind kind) {
    ExperimentSpec spec;
    spec.kind     = kind;
    auto bindings = detail::bind_spec(spec);
    const auto active = detail::sections_for(kind);

    std::istringstream in(text);
    std::string line, section;
    std::set<std::string> seen_sections;
    std::set<std::string> seen_keys;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header", lineno);
            section = detail::trim(line.substr(1, line.size() - 2));
            if (bindings.find(section) == bindings.end())
                throw ConfigError("unknown section [" + section + "]", lineno, section);
            if (std::find(active.begin(), active.end(), section) == active.end())
                throw ConfigError("section [" + section + "] is not used by " +
                                      kind_name(kind),
                                  lineno, section);
            if (!seen_sections.insert(section).second)
                throw ConfigError("duplicate section [" + section + "]", lineno, section);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", lineno);
        if (section.empty())
            throw ConfigError("key outside of any section", lineno);
        const std::string key   = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const auto& secmap = bindings.at(section);
        const auto it      = secmap.find(key);
        if (it == secmap.end())
            throw ConfigError("unknown key '" + key + "' in section [" + section + "]", lineno,
                              key);
        if (!seen_keys.insert(section + "." + key).second)
            throw ConfigError("duplicate key '" + key + "' in section [" + section + "]", lineno,
                              key);
        detail::assign(it->second, value, lineno, key);
    }
    validate_spec(spec);
    return spec;
}

/// Canonical rendering: the active sections in fixed order, every key echoed
/// (including defaults).  parse(render(spec)) == spec.
inline std::string render_config(const ExperimentSpec& s) {
    std::ostringstream os;
    auto spec_copy = s; // bind_spec needs mutable access; values are identical
    auto bindings  = detail::bind_spec(spec_copy);
    os << "# effective " << kind_name(s.kind) << " configuration\n";
    const std::vector<std::pair<std::string, std::vector<std::string>>> order = {
        {"kernel", {"beta", "delta", "rho", "dt", "n", "trials"}},
        {"grid", {"lx", "ly", "nx", "ny"}},
        {"fluid", {"mu", "dt", "t_end", "history_mode", "soe_tol", "initial",
                   "initial_amplitude", "advection"}},
        {"forcing", {"variant", "fbar_profile", "fbar_amplitude", "g_profile", "g_amplitude",
                     "alpha0", "manufactured_choice", "manufactured_alpha",
                     "manufactured_amplitude"}},
        {"steady", {"mu", "method", "tol", "max_iters", "mu0_trials", "nh_samples"}},
        {"analysis", {"study", "levels", "expected_order", "order_tolerance"}},
        {"output", {"cadence", "snapshots"}}};
    const auto active = detail::sections_for(s.kind);
    for (const auto& [sec, keys] : order) {
        if (std::find(active.begin(), active.end(), sec) == active.end()) continue;
        os << '[' << sec << "]\n";
        for (const auto& key : keys) {
            const auto& b = bindings.at(sec).at(key);
            os << key << " = ";
            switch (b.type) {
            case detail::KeyBinding::Type::real:
                os << fp17(*static_cast<double*>(b.target));
                break;
            case detail::KeyBinding::Type::integer:
                os << *static_cast<int*>(b.target);
                break;
            case detail::KeyBinding::Type::longint:
                os << *static_cast<long*>(b.target);
                break;
            case detail::KeyBinding::Type::text:
                os << *static_cast<std::string*>(b.target);
                break;
            case detail::KeyBinding::Type::boolean:
                os << (*static_cast<bool*>(b.target) ? "true" : "false");
                break;
            }
            os << '\n';
        }
        os << '\n';
    }
    return os.str();
}

} // namespace vmemflow
