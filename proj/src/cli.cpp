#include "matmech/cli.hpp"

#include "matmech/errors.hpp"
#include "matmech/format.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <ostream>
#include <sstream>

namespace matmech::cli {

namespace {

const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"ritz-fit", "balmer",   "overtone", "orbit",
                                                "fourier",  "quantize", "ccr",      "correspondence"};
    return names;
}

// Flags read by each command, in render order.
const std::vector<std::string>& flags_for(const std::string& command) {
    static const std::map<std::string, std::vector<std::string>> table{
        {"ritz-fit", {"input", "out"}},
        {"balmer", {"levels", "rydberg", "c", "out"}},
        {"overtone", {"m", "k", "rydberg", "c", "out"}},
        {"orbit", {"potential", "energy", "dt", "samples", "out", "meta"}},
        {"fourier", {"potential", "energy", "action", "observable", "nmin", "nmax", "dt", "samples", "out"}},
        {"quantize", {"potential", "hbar", "levels", "band", "convention", "observable", "dt", "samples", "out"}},
        {"ccr", {"potential", "hbar", "levels", "band", "convention", "dt", "samples", "out"}},
        {"correspondence", {"potential", "hbar", "levels", "band", "convention", "a", "b", "ell", "m",
                            "harmonics", "dt", "samples", "out"}},
    };
    return table.at(command);
}

struct Bindings {
    double energy = 0.0;
    double action = 0.0;
    std::string convention = "upper";
    std::map<std::string, CLI::Option*> options;  // flag -> option, active subcommand only
};

void add_flag(CLI::App* sub, Bindings& bind, ExperimentConfig& cfg, const std::string& flag) {
    const std::string name = "--" + flag;
    CLI::Option* opt = nullptr;
    if (flag == "potential")
        opt = sub->add_option(name, cfg.potential,
                              "Potential spec family:key=value[,key=value]*. Families: "
                              "harmonic{M,omega0} V=M omega0^2 q^2/2; quartic{lambda,M} V=lambda q^4/4; "
                              "pendulum{g,L,M} V=(g/L)(1-cos q); polynomial{c0..c16,M} V=sum ck q^k. "
                              "Omitted keys default to 1 (polynomial coefficients to 0).");
    else if (flag == "hbar")
        opt = sub->add_option(name, cfg.hbar, "Action quantum; levels sit at I_m = m hbar");
    else if (flag == "levels")
        opt = sub->add_option(name, cfg.levels, "Number of levels N");
    else if (flag == "band")
        opt = sub->add_option(name, cfg.band,
                              "Band W: entries with |m-n| > W are zero; checks use rows W..N-1-W");
    else if (flag == "convention")
        opt = sub->add_option(name, bind.convention,
                              "Action at which A(m,n) samples a_{m-n}: upper = max(m,n) hbar (exact "
                              "oscillator ladder), row = m hbar, midpoint = (m+n) hbar/2")
                  ->check(CLI::IsMember({"upper", "row", "midpoint"}));
    else if (flag == "observable")
        opt = sub->add_option(name, cfg.observable,
                              "Observable: q, p, q2, p2, H or poly:q<i>p<j>=c[,...]");
    else if (flag == "a")
        opt = sub->add_option(name, cfg.a, "First observable of the commutator");
    else if (flag == "b")
        opt = sub->add_option(name, cfg.b, "Second observable of the commutator");
    else if (flag == "ell")
        opt = sub->add_option(name, cfg.ell, "Harmonic l; compares entry (m, m-l)");
    else if (flag == "m")
        opt = sub->add_option(name, cfg.m, "Level m");
    else if (flag == "k")
        opt = sub->add_option(name, cfg.k, "Jump k (negative for upward jumps)");
    else if (flag == "energy")
        opt = sub->add_option(name, bind.energy, "Orbit energy E");
    else if (flag == "action")
        opt = sub->add_option(name, bind.action, "Orbit action I (alternative to --energy)");
    else if (flag == "nmin")
        opt = sub->add_option(name, cfg.n_min, "Lowest harmonic index");
    else if (flag == "nmax")
        opt = sub->add_option(name, cfg.n_max, "Highest harmonic index");
    else if (flag == "rydberg")
        opt = sub->add_option(name, cfg.rydberg, "Rydberg constant R, 1/m");
    else if (flag == "c")
        opt = sub->add_option(name, cfg.light_speed, "Speed of light c, m/s");
    else if (flag == "harmonics")
        opt = sub->add_option(name, cfg.harmonics, "Harmonic cutoff |j| for the convolution route");
    else if (flag == "dt")
        opt = sub->add_option(name, cfg.dt,
                              "Kick-drift-kick step bound; quartered (up to 3 times) while energy "
                              "drift > 1e-8 or loop closure > 1e-6, then shrunk once more if the "
                              "estimated action bias exceeds 5e-9");
    else if (flag == "samples")
        opt = sub->add_option(name, cfg.samples, "Uniform samples per period (trapezoid quadrature)");
    else if (flag == "input")
        opt = sub->add_option(name, cfg.input, "Line-list CSV with header m,n,omega")->required();
    else if (flag == "out")
        opt = sub->add_option(name, cfg.out, "Output path (omit to skip writing)");
    else if (flag == "meta")
        opt = sub->add_option(name, cfg.meta, "JSON sidecar path (default: --out with .json extension)");
    opt->capture_default_str();
    bind.options[flag] = opt;
}

const char* description(const std::string& command) {
    if (command == "ritz-fit")
        return "Fit term values C_m (gauge C_0 = 0, unit-weight least squares) to observed lines";
    if (command == "balmer") return "Hydrogen frequency table; matrix index i is level i+1";
    if (command == "overtone")
        return "Ratio of the m -> m-k line to k times the classical frequency 4 pi R c / m^3";
    if (command == "orbit") return "Integrate one closed orbit launched from the right turning point";
    if (command == "fourier") return "Fourier coefficients of an observable along one orbit";
    if (command == "quantize") return "Build the Heisenberg matrix of an observable on I_m = m hbar";
    if (command == "ccr") return "Interior residual of [P,Q] against hbar/i";
    if (command == "correspondence")
        return "Compare (AB-BA)(m,m-l) with (hbar/i){a,b}(l) computed two ways";
    return "";
}

struct Parsed {
    ExperimentConfig cfg;
    std::string help;  // nonempty when help was requested
};

Parsed parse_impl(const std::vector<std::string>& args) {
    Parsed result;
    ExperimentConfig& cfg = result.cfg;
    CLI::App app{"Matrix-mechanics laboratory: Ritz spectra, action-angle orbits and quantized "
                 "commutators",
                 "matmech"};
    app.require_subcommand(1, 1);
    std::map<std::string, Bindings> bindings;
    std::map<std::string, CLI::App*> subs;
    for (const auto& name : commands()) {
        CLI::App* sub = app.add_subcommand(name, description(name));
        subs[name] = sub;
        auto& bind = bindings[name];
        for (const auto& flag : flags_for(name)) add_flag(sub, bind, cfg, flag);
    }

    std::vector<const char*> argv{"matmech"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (const auto& [name, sub] : subs)
            if (sub->parsed()) target = sub;
        result.help = target->help();
        return result;
    } catch (const CLI::CallForAllHelp&) {
        result.help = app.help("", CLI::AppFormatMode::All);
        return result;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    for (const auto& [name, sub] : subs) {
        if (!sub->parsed()) continue;
        cfg.command = name;
        auto& bind = bindings[name];
        if (bind.options.count("convention")) {
            try {
                cfg.convention = parse_convention(bind.convention);
            } catch (const InvalidArgumentError& e) {
                throw UsageError(std::string("--convention: ") + e.what());
            }
        }
        if (bind.options.count("energy") && bind.options["energy"]->count()) cfg.energy = bind.energy;
        if (bind.options.count("action") && bind.options["action"]->count()) cfg.action = bind.action;
    }

    if (cfg.command == "orbit" && !cfg.energy) throw UsageError("orbit requires --energy");
    if (cfg.command == "fourier" && cfg.energy.has_value() == cfg.action.has_value())
        throw UsageError("fourier requires exactly one of --energy, --action");
    const auto& flags = flags_for(cfg.command);
    if (std::find(flags.begin(), flags.end(), "potential") != flags.end())
        cfg.potential = HamiltonianSystem::parse(cfg.potential).spec();
    return result;
}

std::string value_of(const ExperimentConfig& cfg, const std::string& flag) {
    if (flag == "potential") return cfg.potential;
    if (flag == "hbar") return format_double(cfg.hbar);
    if (flag == "levels") return std::to_string(cfg.levels);
    if (flag == "band") return std::to_string(cfg.band);
    if (flag == "convention") return to_string(cfg.convention);
    if (flag == "observable") return cfg.observable;
    if (flag == "a") return cfg.a;
    if (flag == "b") return cfg.b;
    if (flag == "ell") return std::to_string(cfg.ell);
    if (flag == "m") return std::to_string(cfg.m);
    if (flag == "k") return std::to_string(cfg.k);
    if (flag == "energy") return cfg.energy ? format_double(*cfg.energy) : "";
    if (flag == "action") return cfg.action ? format_double(*cfg.action) : "";
    if (flag == "nmin") return std::to_string(cfg.n_min);
    if (flag == "nmax") return std::to_string(cfg.n_max);
    if (flag == "rydberg") return format_double(cfg.rydberg);
    if (flag == "c") return format_double(cfg.light_speed);
    if (flag == "harmonics") return std::to_string(cfg.harmonics);
    if (flag == "dt") return format_double(cfg.dt);
    if (flag == "samples") return std::to_string(cfg.samples);
    if (flag == "input") return cfg.input;
    if (flag == "out") return cfg.out;
    if (flag == "meta") return cfg.meta;
    return "";
}

OrbitOptions orbit_options(const ExperimentConfig& cfg) {
    OrbitOptions opts;
    opts.dt = cfg.dt;
    opts.samples = cfg.samples;
    return opts;
}

void maybe_write(const std::string& path, const std::string& text) {
    if (!path.empty()) write_text_file(path, text);
}

int execute(const ExperimentConfig& cfg, std::ostream& out) {
    const RydbergModel rydberg{cfg.rydberg, cfg.light_speed};

    if (cfg.command == "ritz-fit") {
        const LineList lines = parse_line_list_csv(read_text_file(cfg.input));
        const TermFit fit = fit_term_values(lines.table, lines.mask);
        maybe_write(cfg.out, term_values_to_json(fit));
        out << "levels " << lines.levels << "\nresidual " << format_double(fit.residual) << "\n";
        return 0;
    }
    if (cfg.command == "balmer") {
        if (cfg.levels < 1) throw SizeError("--levels must be >= 1");
        const FrequencyTable table = balmer_table(rydberg, cfg.levels);
        const RitzCheck check = check_ritz(table, default_ritz_tolerance(table));
        maybe_write(cfg.out, balmer_table_to_json(rydberg, table));
        out << "levels " << table.size() << "\nritz_ok " << (check.ok ? "true" : "false")
            << "\nworst_violation " << format_double(check.worst_violation) << "\n";
        return 0;
    }
    if (cfg.command == "overtone") {
        const double ratio = overtone_ratio(rydberg, cfg.m, cfg.k);
        const std::string row = std::to_string(cfg.m) + "," + std::to_string(cfg.k) + "," +
                                format_double(ratio) + "\n";
        maybe_write(cfg.out, "m,k,ratio\n" + row);
        out << "ratio " << format_double(ratio) << "\n";
        return 0;
    }

    const HamiltonianSystem sys = HamiltonianSystem::parse(cfg.potential);
    const OrbitOptions opts = orbit_options(cfg);

    if (cfg.command == "orbit") {
        const Orbit orbit = find_orbit(sys, *cfg.energy, opts);
        if (!cfg.out.empty()) {
            write_text_file(cfg.out, orbit_to_csv(orbit));
            const std::string meta =
                cfg.meta.empty() ? std::filesystem::path(cfg.out).replace_extension(".json").string()
                                 : cfg.meta;
            write_text_file(meta, orbit_sidecar_json(orbit));
        } else if (!cfg.meta.empty()) {
            write_text_file(cfg.meta, orbit_sidecar_json(orbit));
        }
        out << "T " << format_double(orbit.period()) << "\nE " << format_double(orbit.energy())
            << "\nI " << format_double(orbit.action()) << "\nomega " << format_double(orbit.omega())
            << "\nenergy_drift " << format_double(orbit.energy_drift(sys)) << "\n";
        return 0;
    }
    if (cfg.command == "fourier") {
        const Orbit orbit = cfg.energy ? find_orbit(sys, *cfg.energy, opts)
                                       : solve_action(sys, *cfg.action, opts).orbit;
        const Observable obs = make_observable(cfg.observable, &sys);
        const FourierSeries series = orbit_fourier_coefficients(orbit, obs, cfg.n_min, cfg.n_max);
        maybe_write(cfg.out, to_json(series));
        out << "omega " << format_double(series.omega()) << "\nreal "
            << (series.is_real() ? "true" : "false") << "\n";
        for (const auto& [n, c] : series.coeffs())
            out << n << " " << format_double(c.real()) << " " << format_double(c.imag()) << "\n";
        return 0;
    }

    const ActionGrid grid = ActionGrid::build(sys, cfg.hbar, cfg.levels, opts);
    if (cfg.command == "quantize") {
        const HeisenbergMatrix mx = quantize(sys, grid, cfg.observable, cfg.convention, cfg.band);
        maybe_write(cfg.out, matrix_to_json(mx));
        out << "N " << mx.size() << "\nhermitian " << (mx.is_hermitian() ? "true" : "false") << "\n";
        return 0;
    }
    if (cfg.command == "ccr") {
        const CcrReport report = ccr_residual(sys, grid, cfg.band, cfg.convention);
        maybe_write(cfg.out, ccr_report_to_csv(report));
        out << "interior " << report.interior_begin << " " << report.interior_end - 1
            << "\nmax_diag_dev " << format_double(report.max_diag_dev) << "\nmax_offdiag "
            << format_double(report.max_offdiag) << "\n";
        return 0;
    }
    if (cfg.command == "correspondence") {
        CorrespondenceOptions copts;
        copts.convention = cfg.convention;
        copts.harmonics = cfg.harmonics;
        const auto rep = correspondence_check(sys, grid, make_observable(cfg.a, &sys),
                                              make_observable(cfg.b, &sys), cfg.ell,
                                              static_cast<int>(cfg.m), cfg.band, copts);
        const auto cx = [](complex z) {
            return "[" + format_double(z.real()) + ", " + format_double(z.imag()) + "]";
        };
        std::ostringstream json;
        json << "{\"m\": " << cfg.m << ", \"ell\": " << cfg.ell << ", \"matrix_value\": "
             << cx(rep.matrix_value) << ", \"bracket_value\": " << cx(rep.bracket_value)
             << ", \"bracket_convolution\": " << cx(rep.bracket_convolution)
             << ", \"scale\": " << format_double(rep.scale)
             << ", \"rel_error\": " << format_double(rep.rel_error)
             << ", \"route_discrepancy\": " << format_double(rep.route_discrepancy) << "}\n";
        maybe_write(cfg.out, json.str());
        out << json.str();
        return 0;
    }
    throw UsageError("unknown command '" + cfg.command + "'");
}

}  // namespace

ExperimentConfig parse(const std::vector<std::string>& args) {
    Parsed parsed = parse_impl(args);
    if (!parsed.help.empty()) throw UsageError("help requested");
    return parsed.cfg;
}

std::string render(const ExperimentConfig& cfg) {
    std::string line = cfg.command;
    for (const auto& flag : flags_for(cfg.command)) {
        const std::string value = value_of(cfg, flag);
        if (value.empty()) continue;  // unset optional values
        line += " --" + flag + " " + value;
    }
    return line;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Parsed parsed;
    try {
        parsed = parse_impl(args);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.name() << ": " << e.what() << "\n";
        return 1;
    }
    if (!parsed.help.empty()) {
        out << parsed.help;
        return 0;
    }
    try {
        return execute(parsed.cfg, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.name() << ": " << e.what() << "\n";
        return 1;
    }
}

}  // namespace matmech::cli
