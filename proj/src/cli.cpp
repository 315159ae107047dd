#include "levy/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "levy/errors.hpp"
#include "levy/kernels.hpp"
#include "levy/models.hpp"
#include "levy/montecarlo.hpp"
#include "levy/quasipotential.hpp"
#include "levy/spectral.hpp"
#include "levy/wiener.hpp"

namespace levy::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double parse_number(const std::string& s, const std::string& what) {
    const char* b = s.c_str();
    char* end = nullptr;
    double v = std::strtod(b, &end);
    if (s.empty() || end != b + s.size() || !std::isfinite(v)) throw ParseError("bad " + what + " '" + s + "'");
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json parse_json_file(const std::string& path) {
    std::string s = read_file(path);
    if (s.find_first_not_of(" \t\r\n") == std::string::npos) throw ParseError("'" + path + "' is empty");
    try {
        return json::parse(s);
    } catch (const json::exception& e) {
        throw ParseError("'" + path + "' is not valid JSON: " + e.what());
    }
}

LevyModel load_model(const std::string& path, json& descriptor) {
    descriptor = parse_json_file(path);
    try {
        return model_from_json(descriptor);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model descriptor: ") + e.what());
    }
}

Domain make_domain(const std::vector<double>& v) {
    if (v.empty() || v.size() % 2 != 0) throw ParseError("--domain takes one or more pairs 'lo hi'");
    Domain d;
    for (std::size_t i = 0; i < v.size(); i += 2) d.intervals.push_back(Interval{v[i], v[i + 1]});
    d.validate();
    return d;
}

json domain_json(const Domain& d) {
    json a = json::array();
    for (const auto& I : d.intervals) a.push_back({I.lo, I.hi});
    return a;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Curve {
    std::vector<double> t, p, err;
    std::string method;
};

std::string curve_csv(const Curve& c) {
    std::ostringstream os;
    os << "t,p,method,err\n";
    for (std::size_t i = 0; i < c.t.size(); ++i)
        os << fmt17(c.t[i]) << ',' << fmt17(c.p[i]) << ',' << c.method << ',' << fmt17(c.err[i]) << '\n';
    return os.str();
}

Curve read_curve(const std::string& path) {
    std::istringstream is(read_file(path));
    std::string line;
    if (!std::getline(is, line) || line.rfind("t,p,method", 0) != 0) throw ParseError("'" + path + "' is not a survival curve");
    Curve c;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
        if (f.size() < 3) throw ParseError("short row in '" + path + "'");
        c.t.push_back(parse_number(f[0], "time"));
        c.p.push_back(parse_number(f[1], "probability"));
        c.method = f[2];
        double e = 0.0;
        if (f.size() > 3) {
            e = std::strtod(f[3].c_str(), nullptr);
            if (!std::isfinite(e)) e = 0.0;
        }
        c.err.push_back(e);
    }
    return c;
}

json report_json(const ValidationReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"id", c.id},
                          {"description", c.description},
                          {"applicable", c.applicable},
                          {"passed", c.passed},
                          {"detail", c.detail}});
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf"); };
    return {{"ok", r.ok()},
            {"checks", checks},
            {"small_exponent", num(r.small_exponent)},
            {"tail_exponent", num(r.tail_exponent)},
            {"mass", num(r.mass)}};
}

class Session {
public:
    Session(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

    json manifest;
    std::string manifest_path;

    void emit(const std::string& path, const std::string& content) {
        if (path.empty()) {
            out_ << content;
            return;
        }
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ParseError("cannot write '" + path + "'");
        f << content;
        outputs_.push_back(fs::absolute(path).string());
    }

    void finish(int code, const std::string& error, double wall) {
        manifest["schema"] = kManifestSchema;
        manifest["version"] = kVersion;
        manifest["outputs"] = outputs_;
        manifest["exit_code"] = code;
        manifest["wall_time_s"] = wall;
        if (!error.empty()) manifest["error"] = error;
        std::string text = manifest.dump(2) + "\n";
        if (manifest_path.empty()) {
            err_ << "manifest: " << manifest.dump() << "\n";
            return;
        }
        std::ofstream f(manifest_path, std::ios::binary);
        if (f) f << text;
        else err_ << "cannot write manifest '" << manifest_path << "'\n";
    }

    std::ostream& out() { return out_; }
    std::ostream& err() { return err_; }

private:
    std::ostream& out_;
    std::ostream& err_;
    std::vector<std::string> outputs_;
};

struct Options {
    std::string model_path, out, manifest;
    std::vector<double> domain;
    int n = 0, k = 10, construction_n = 256, terms = 0;
    bool general = false, staggered = false, convolution = false;
    std::string times, method = "series";
    std::int64_t paths = 100000;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    bool antithetic = false, no_bridge = false;
    int threads = 0;
    std::vector<std::string> inputs;
    double tol = 1e-4, sigma = 3.0;
};

QuasiPotentialKernel kernel_for(const LevyModel& model, const Domain& d, const Options& o) {
    ConstructionOptions copt;
    copt.n = o.construction_n;
    return quasi_potential_for_model(model, d, o.general, copt);
}

int cmd_validate(Session& s, const Options& o) {
    json desc;
    LevyModel m;
    try {
        m = load_model(o.model_path, desc);
    } catch (const DomainError& e) {
        json r = {{"ok", false}, {"error", e.what()}};
        s.emit(o.out, r.dump(2) + "\n");
        return kValidationFailed;
    }
    s.manifest["model"] = desc;
    ValidationReport r = validate_model(m);
    s.emit(o.out, report_json(r).dump(2) + "\n");
    return r.ok() ? kOk : kValidationFailed;
}

int cmd_kernel(Session& s, const Options& o) {
    json desc;
    LevyModel m = load_model(o.model_path, desc);
    Domain d = make_domain(o.domain);
    s.manifest["model"] = desc;
    s.manifest["domain"] = domain_json(d);
    int n = o.n > 0 ? o.n : 64;
    std::ostringstream os;
    if (o.convolution) {
        ConvolutionKernel k = build_kernel(m);
        double L = d.length();
        std::vector<double> ys;
        for (int i = 0; i < n; ++i) ys.push_back(-L + 2.0 * L * (i + 0.5) / n);
        k.dump(os, ys);
    } else {
        QuasiPotentialKernel k = kernel_for(m, d, o);
        export_grid(k, os, n, !o.staggered);
    }
    s.emit(o.out, os.str());
    return kOk;
}

int cmd_spectrum(Session& s, const Options& o) {
    json desc;
    LevyModel m = load_model(o.model_path, desc);
    Domain d = make_domain(o.domain);
    s.manifest["model"] = desc;
    s.manifest["domain"] = domain_json(d);
    int n = o.n > 0 ? o.n : 256;
    if (o.k < 1 || o.k > n) throw UnsupportedError("--k must lie in [1, n]");
    QuasiPotentialKernel k = kernel_for(m, d, o);
    NystromSystem sys = assemble(k, n);
    SpectralDecomposition dec = eigensystem(sys, o.k);
    json j = spectrum_json(dec, o.k);
    j["domain"] = domain_json(d);
    j["symmetric"] = dec.symmetric;
    j["eigvec_rcond"] = dec.eigvec_rcond;
    if (!k.warning.empty()) j["warning"] = k.warning;
    s.emit(o.out, j.dump(2) + "\n");
    return kOk;
}

int cmd_survive(Session& s, const Options& o) {
    json desc;
    LevyModel m = load_model(o.model_path, desc);
    Domain d = make_domain(o.domain);
    s.manifest["model"] = desc;
    s.manifest["domain"] = domain_json(d);
    std::vector<double> times = parse_time_grid(o.times);
    if (!d.contains(0.0)) throw DomainError("the domain must contain the starting point 0");
    Curve c;
    c.method = o.method;
    c.t = times;
    if (o.method == "series" || o.method == "asymptotic") {
        QuasiPotentialKernel k = kernel_for(m, d, o);
        NystromSystem sys = assemble(k, o.n > 0 ? o.n : 256);
        SpectralDecomposition dec = eigensystem(sys);
        SurvivalEstimate est = o.method == "series" ? survival_series(dec, times, o.terms) : asymptotic_survival(dec, times);
        c.p = est.values;
        c.err = est.remainder_bounds;
        for (auto& e : c.err)
            if (!std::isfinite(e)) e = 0.0;
        for (const auto& w : est.warnings) s.err() << "warning: " << w << "\n";
    } else if (o.method == "mc") {
        mc::SimConfig cfg;
        cfg.n_paths = o.paths;
        cfg.dt = o.dt;
        cfg.seed = o.seed;
        cfg.antithetic = o.antithetic;
        cfg.bridge_correction = !o.no_bridge;
        cfg.threads = o.threads;
        auto est = mc::estimate_survival_curve(m, d, times, cfg);
        for (const auto& e : est) {
            c.p.push_back(e.p_hat);
            c.err.push_back(e.stderr_);
        }
        s.manifest["mc"] = {{"dt", est.front().dt}, {"n_paths", est.front().n_paths}, {"bridge", est.front().bridge}};
    } else if (o.method == "oracle") {
        if (!std::holds_alternative<Gaussian>(m.spec) || m.gamma != 0.0 || !d.is_single())
            throw UnsupportedError("the oracle covers driftless Brownian motion on a single interval");
        double a = d.intervals[0].hi, b = -d.intervals[0].lo;
        for (double t : times) {
            double tau = m.A * t;
            c.p.push_back(wiener::p2(a, b, tau));
            c.err.push_back(tau / ((a + b) * (a + b)) >= 0.2 ? wiener::p2_series_ex(a, b, tau).remainder_bound : 0.0);
        }
    } else {
        throw UnsupportedError("unknown method '" + o.method + "' (series, asymptotic, mc, oracle)");
    }
    s.emit(o.out, curve_csv(c));
    return kOk;
}

int cmd_compare(Session& s, const Options& o) {
    if (o.inputs.size() < 2) throw ParseError("compare needs at least two run manifests");
    std::vector<Curve> curves;
    std::vector<std::string> names;
    for (const auto& p : o.inputs) {
        json man = parse_json_file(p);
        if (!man.contains("outputs") || !man["outputs"].is_array() || man["outputs"].empty())
            throw ParseError("manifest '" + p + "' lists no outputs");
        curves.push_back(read_curve(man["outputs"][0].get<std::string>()));
        names.push_back(p);
    }
    const Curve& ref = curves.front();
    json pairs = json::array();
    bool all = true;
    std::ostringstream table;
    table << "reference " << names[0] << " (" << ref.method << ")\n";
    for (std::size_t c = 1; c < curves.size(); ++c) {
        const Curve& other = curves[c];
        if (other.t.size() != ref.t.size()) throw UnsupportedError("time grids differ in length");
        double worst = 0.0, worst_t = 0.0, worst_allowed = 0.0;
        bool pass = true;
        for (std::size_t i = 0; i < ref.t.size(); ++i) {
            if (std::abs(other.t[i] - ref.t[i]) > 1e-12 * std::max(1.0, std::abs(ref.t[i])))
                throw UnsupportedError("time grids differ at index " + std::to_string(i));
            double dev = std::abs(other.p[i] - ref.p[i]);
            double allowed = o.tol + o.sigma * std::hypot(ref.err[i], other.err[i]);
            if (dev > allowed) pass = false;
            if (dev >= worst) {
                worst = dev;
                worst_t = ref.t[i];
                worst_allowed = allowed;
            }
        }
        all = all && pass;
        pairs.push_back({{"reference", names[0]},
                         {"other", names[c]},
                         {"method", other.method},
                         {"max_deviation", worst},
                         {"at_t", worst_t},
                         {"allowed", worst_allowed},
                         {"pass", pass}});
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-12s max|dp| %.3e at t=%g (allowed %.3e)  %s\n", other.method.c_str(), worst,
                      worst_t, worst_allowed, pass ? "PASS" : "FAIL");
        table << buf;
    }
    s.out() << table.str();
    json j = {{"pairs", pairs}, {"tol", o.tol}, {"sigma", o.sigma}, {"pass", all}};
    if (!o.out.empty()) s.emit(o.out, j.dump(2) + "\n");
    return all ? kOk : kValidationFailed;
}

}  // namespace

std::vector<double> parse_time_grid(const std::string& spec) {
    std::vector<double> t;
    auto dots = spec.find("..");
    if (dots != std::string::npos) {
        double t1 = parse_number(spec.substr(0, dots), "start time");
        std::vector<std::string> f;
        std::stringstream ss(spec.substr(dots + 2));
        for (std::string x; std::getline(ss, x, ':');) f.push_back(x);
        if (f.size() < 2 || f.size() > 3) throw ParseError("time grid must read t1..t2:steps[:geom]");
        double t2 = parse_number(f[0], "end time");
        double steps_d = parse_number(f[1], "step count");
        if (steps_d < 1 || steps_d != std::floor(steps_d) || steps_d > 1e6) throw ParseError("step count must be a positive integer");
        int steps = static_cast<int>(steps_d);
        bool geom = false;
        if (f.size() == 3) {
            if (f[2] == "geom") geom = true;
            else if (f[2] != "lin") throw ParseError("time grid spacing must be 'geom' or 'lin'");
        }
        if (!(t1 > 0.0) || !(t2 >= t1)) throw ParseError("time grid needs 0 < t1 <= t2");
        if (steps == 1 || t1 == t2) {
            t.push_back(t1);
            if (t2 != t1) t.push_back(t2);
            return t;
        }
        for (int i = 0; i < steps; ++i) {
            double u = static_cast<double>(i) / (steps - 1);
            t.push_back(geom ? t1 * std::pow(t2 / t1, u) : t1 + (t2 - t1) * u);
        }
        t.back() = t2;
        return t;
    }
    std::stringstream ss(spec);
    for (std::string x; std::getline(ss, x, ',');) t.push_back(parse_number(x, "time"));
    if (t.empty()) throw ParseError("empty time grid");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > 0.0)) throw ParseError("times must be positive");
        if (i > 0 && !(t[i] > t[i - 1])) throw ParseError("times must increase");
    }
    return t;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Confinement probabilities of Lévy processes on intervals", "levy_cli"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c) {
        c->add_option("model", o.model_path, "JSON model descriptor")->required();
        c->add_option("--out", o.out, "output file (stdout when absent)");
        c->add_option("--manifest", o.manifest, "run manifest path (default <out>.manifest.json)");
    };
    auto domain = [&](CLI::App* c) {
        c->add_option("--domain", o.domain, "interval end points: -b a [lo hi ...]")->required()->allow_extra_args();
        c->add_option("--n", o.n, "grid size / Nystrom nodes");
        c->add_flag("--general", o.general, "allow the numerical factorization when no closed form exists");
        c->add_option("--construction-n", o.construction_n, "cells of the numerical factorization");
    };

    auto* validate = app.add_subcommand("validate", "check a model descriptor");
    common(validate);
    auto* kernel = app.add_subcommand("kernel", "dump the quasi-potential (or convolution kernel) as CSV");
    common(kernel);
    domain(kernel);
    kernel->add_flag("--convolution", o.convolution, "dump k(y) of the factorization instead");
    kernel->add_flag("--staggered", o.staggered, "offset y nodes so the diagonal is skipped");
    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of the quasi-potential operator");
    common(spectrum);
    domain(spectrum);
    spectrum->add_option("--k", o.k, "eigenvalues to report");
    auto* survive = app.add_subcommand("survive", "survival curve p(t) on the domain");
    common(survive);
    domain(survive);
    survive->add_option("--times", o.times, "t1..t2:steps[:geom] or a comma list")->required();
    survive->add_option("--method", o.method, "series, asymptotic, mc or oracle");
    survive->add_option("--terms", o.terms, "series terms (0: automatic)");
    survive->add_option("--paths", o.paths, "Monte Carlo paths");
    survive->add_option("--dt", o.dt, "Monte Carlo step");
    survive->add_option("--seed", o.seed, "Monte Carlo seed");
    survive->add_flag("--antithetic", o.antithetic, "antithetic pairs (symmetric models)");
    survive->add_flag("--no-bridge", o.no_bridge, "disable the Brownian bridge correction");
    survive->add_option("--threads", o.threads, "worker threads (0: all cores)");
    auto* compare = app.add_subcommand("compare", "compare survival curves of several runs");
    compare->add_option("manifests", o.inputs, "run manifests; the first is the reference");
    compare->add_option("--tol", o.tol, "absolute tolerance");
    compare->add_option("--sigma", o.sigma, "multiples of the combined error column added to the tolerance");
    compare->add_option("--out", o.out, "JSON summary");
    compare->add_option("--manifest", o.manifest, "run manifest path");
    auto* rerun = app.add_subcommand("rerun", "repeat the command recorded in a run manifest");
    std::string rerun_path;
    rerun->add_option("manifest", rerun_path, "run manifest")->required();

    std::vector<const char*> argv{"levy_cli"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kMalformedInput;
    }

    if (rerun->parsed()) {
        try {
            json man = parse_json_file(rerun_path);
            if (man.value("schema", "") != kManifestSchema) throw ParseError("unknown manifest schema");
            return run(man.at("argv").get<std::vector<std::string>>(), out, err);
        } catch (const LevyError& e) {
            err << "error: " << e.what() << "\n";
            return kMalformedInput;
        } catch (const json::exception& e) {
            err << "error: bad manifest: " << e.what() << "\n";
            return kMalformedInput;
        }
    }

    CLI::App* sub = app.get_subcommands().front();
    Session s(out, err);
    s.manifest["command"] = sub->get_name();
    s.manifest["argv"] = args;
    json params = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_name().empty() || opt->get_name() == "--help") continue;
        std::string key = opt->get_name();
        if (opt->count() > 0) params[key] = opt->results();
        else if (!opt->get_default_str().empty()) params[key] = opt->get_default_str();
    }
    s.manifest["parameters"] = params;
    if (!o.manifest.empty()) s.manifest_path = o.manifest;
    else if (!o.out.empty()) s.manifest_path = o.out + ".manifest.json";

    const auto t0 = std::chrono::steady_clock::now();
    int code = kOk;
    std::string error;
    try {
        const std::string name = sub->get_name();
        if (name == "validate") code = cmd_validate(s, o);
        else if (name == "kernel") code = cmd_kernel(s, o);
        else if (name == "spectrum") code = cmd_spectrum(s, o);
        else if (name == "survive") code = cmd_survive(s, o);
        else if (name == "compare") code = cmd_compare(s, o);
    } catch (const ParseError& e) {
        code = kMalformedInput;
        error = e.what();
    } catch (const ValidationError& e) {
        code = kValidationFailed;
        error = e.what();
    } catch (const UnsupportedError& e) {
        code = kUnsupported;
        error = e.what();
    } catch (const DomainError& e) {
        code = kUnsupported;
        error = e.what();
    } catch (const mc::BudgetExceeded& e) {
        code = kNumericalFailure;
        error = std::string(e.what()) + " (n_effective " + std::to_string(e.partial().n_effective) + ")";
    } catch (const NumericalError& e) {
        code = kNumericalFailure;
        error = e.what();
    } catch (const json::exception& e) {
        code = kMalformedInput;
        error = e.what();
    } catch (const std::exception& e) {
        code = kNumericalFailure;
        error = e.what();
    }
    if (!error.empty()) err << "error: " << error << "\n";
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    s.finish(code, error, wall);
    return code;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace levy::cli
