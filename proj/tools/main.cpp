// Command-line front end: catalog inspection, residual evaluation, pulse
// design, and scaling sweeps. Exit codes: 0 success, 1 usage error,
// 2 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "pulsekit/corrections.hpp"
#include "pulsekit/designer.hpp"
#include "pulsekit/pulse.hpp"
#include "pulsekit/pulse_io.hpp"
#include "pulsekit/qsim.hpp"

namespace {

using nlohmann::json;
using namespace pulsekit;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

double parse_theta(const std::string& s) {
    if (s == "pi") return std::numbers::pi;
    if (s == "pi2" || s == "pi/2") return std::numbers::pi / 2.0;
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw CLI::ValidationError("--theta", "expected pi, pi/2, or a number in radians");
}

std::string theta_label(double theta) {
    if (std::abs(theta - std::numbers::pi) < 1e-9) return "pi";
    if (std::abs(theta - std::numbers::pi / 2) < 1e-9) return "pi/2";
    return fmt(theta);
}

// Relative output paths land in PULSEKIT_OUT_DIR when it is set.
std::string resolve_out_path(const std::string& path) {
    const char* dir = std::getenv("PULSEKIT_OUT_DIR");
    if (!dir || !*dir) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(dir) / p).string();
}

struct PulseSource {
    std::string name;
    std::string file;

    PulseShape load(bool refine_catalog) const {
        if (!name.empty()) {
            if (const CatalogEntry* e = find_catalog_entry(name)) {
                if (refine_catalog) return refine_catalog_entry(*e).pulse;
                return e->shape;
            }
            return resolve_pulse_name(name);  // CONST-* or throws
        }
        return load_pulse_file(file);
    }
    std::string label() const { return !name.empty() ? name : file; }
};

void add_pulse_source(CLI::App* cmd, PulseSource& src) {
    auto* n = cmd->add_option("--name", src.name, "catalog pulse name (or CONST-Pi, CONST-Pi2)");
    auto* f = cmd->add_option("--file", src.file, "pulse definition file (JSON)");
    n->excludes(f);
    f->excludes(n);
    cmd->callback([&src, cmd]() {
        if (src.name.empty() && src.file.empty())
            throw CLI::RequiredError(cmd->get_name() + ": one of --name/--file");
    });
}

json entry_json(const CatalogEntry& e) {
    json j;
    j["name"] = e.name;
    j["theta"] = e.shape.theta;
    j["order"] = e.order == CorrectionOrder::First ? "first" : "second";
    j["symmetry"] = e.symmetry == Symmetry::Symmetric ? "symmetric" : "asymmetric";
    j["family"] = e.family;
    j["params"] = e.params;
    j["pulse"] = json::parse(pulse_to_json(e.shape));
    return j;
}

// ---------------------------------------------------------------------------
// catalog

int cmd_catalog(const std::string& theta_filter, const std::string& order_filter,
                const std::string& name_filter, const std::string& format) {
    std::vector<const CatalogEntry*> rows;
    for (const CatalogEntry& e : catalog()) {
        if (!theta_filter.empty() && theta_label(e.shape.theta) !=
                                         theta_label(parse_theta(theta_filter)))
            continue;
        if (!order_filter.empty()) {
            const std::string o = e.order == CorrectionOrder::First ? "first" : "second";
            if (o != order_filter) continue;
        }
        if (!name_filter.empty() && find_catalog_entry(name_filter) != &e) continue;
        rows.push_back(&e);
    }
    if (format == "json") {
        json out = json::array();
        for (const CatalogEntry* e : rows) out.push_back(entry_json(*e));
        std::cout << out.dump(2) << "\n";
        return kExitOk;
    }
    std::printf("%-16s %-6s %-7s %-10s %-15s %s\n", "name", "theta", "order", "symmetry",
                "family", "params");
    for (const CatalogEntry* e : rows) {
        std::string params;
        for (std::size_t i = 0; i < e->params.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%s%.6f", i ? "," : "", e->params[i]);
            params += buf;
        }
        std::printf("%-16s %-6s %-7s %-10s %-15s %s\n", e->name.c_str(),
                    theta_label(e->shape.theta).c_str(),
                    e->order == CorrectionOrder::First ? "first" : "second",
                    e->symmetry == Symmetry::Symmetric ? "symmetric" : "asymmetric",
                    e->family.c_str(), params.c_str());
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// residuals

int cmd_residuals(const PulseSource& src, const std::string& format) {
    const PulseShape pulse = src.load(false);
    const CorrectionVector e = eta_specific(pulse);
    const double psi1 = accumulated_angle(pulse, 1.0);
    if (format == "json") {
        json j;
        j["pulse"] = src.label();
        j["eta11"] = e.eta11;
        j["eta12"] = e.eta12;
        j["eta21"] = e.eta21;
        j["eta22"] = e.eta22;
        j["eta23"] = e.eta23;
        j["psi1"] = psi1;
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }
    std::printf("pulse   %s\n", src.label().c_str());
    std::printf("psi(1)  %s\n", fmt(psi1).c_str());
    std::printf("eta11   %s\n", fmt(e.eta11).c_str());
    std::printf("eta12   %s\n", fmt(e.eta12).c_str());
    std::printf("eta21   %s\n", fmt(e.eta21).c_str());
    std::printf("eta22   %s\n", fmt(e.eta22).c_str());
    std::printf("eta23   %s\n", fmt(e.eta23).c_str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// design

std::vector<TargetResidual> parse_targets(const std::string& csv) {
    std::vector<TargetResidual> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "eta11") out.push_back(TargetResidual::Eta11);
        else if (item == "eta12") out.push_back(TargetResidual::Eta12);
        else if (item == "eta21") out.push_back(TargetResidual::Eta21);
        else if (item == "eta22") out.push_back(TargetResidual::Eta22);
        else if (item == "eta23") out.push_back(TargetResidual::Eta23);
        else throw CLI::ValidationError("--targets", "unknown residual \"" + item + "\"");
    }
    return out;
}

// A guess is either a comma list of numbers or a catalog name (optionally
// the short alias of one, resolved against theta: "corpse" -> CORPSE-Pi2
// for theta = pi/2).
Eigen::VectorXd parse_guess(const std::string& text, Family family, double theta) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    bool numeric = true;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            vals.push_back(std::stod(item, &pos));
            if (pos != item.size()) numeric = false;
        } catch (const std::exception&) {
            numeric = false;
        }
        if (!numeric) break;
    }
    if (numeric && !vals.empty())
        return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));

    std::string name = text;
    const CatalogEntry* e = find_catalog_entry(name);
    if (!e) {
        const std::string suffix = theta_label(theta) == "pi/2" ? "-Pi2" : "-Pi";
        e = find_catalog_entry(name + suffix);
    }
    if (!e || e->family != family_name(family))
        throw CLI::ValidationError("--guess",
                                   "expected a comma list of numbers or the name of a catalog "
                                   "entry of the same family");
    return Eigen::Map<const Eigen::VectorXd>(e->params.data(),
                                             static_cast<Eigen::Index>(e->params.size()));
}

int cmd_design(const std::string& family_str, const std::string& theta_str,
               const std::string& guess_str, const std::string& targets_str,
               const std::string& out_path, double tol, int max_iter,
               const std::string& format) {
    const Family family = family_from_name(family_str);
    const double theta = parse_theta(theta_str);

    DesignProblem prob;
    prob.family = family;
    prob.theta = theta;
    prob.guess = parse_guess(guess_str, family, theta);
    if (!targets_str.empty()) prob.targets = parse_targets(targets_str);
    prob.tol = tol;
    prob.max_iterations = max_iter;

    const std::string path = resolve_out_path(out_path);
    auto report = [&](const DesignResult& res, bool converged, const std::string& note) {
        json j;
        j["family"] = family_str;
        j["theta"] = theta;
        j["converged"] = converged;
        j["iterations"] = res.report.iterations;
        j["residual_norm"] = res.report.residual_norm;
        j["params"] = std::vector<double>(res.params.data(),
                                          res.params.data() + res.params.size());
        j["pulse_file"] = path;
        if (!note.empty()) j["warning"] = note;

        json pulse_doc = json::parse(pulse_to_json(res.pulse));
        if (!converged) pulse_doc["warning"] = note;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << pulse_doc.dump(2) << "\n";

        if (format == "json") {
            std::cout << j.dump(2) << "\n";
        } else {
            std::printf("family     %s  theta=%s\n", family_str.c_str(),
                        theta_label(theta).c_str());
            std::printf("converged  %s in %d iterations (residual norm %.3e)\n",
                        converged ? "yes" : "NO", res.report.iterations,
                        res.report.residual_norm);
            std::string params;
            for (Eigen::Index i = 0; i < res.params.size(); ++i)
                params += (i ? ", " : "") + fmt(res.params(i));
            std::printf("params     %s\n", params.c_str());
            std::printf("pulse file %s\n", path.c_str());
            if (!note.empty()) std::printf("warning    %s\n", note.c_str());
        }
    };

    try {
        const DesignResult res = solve(prob);
        report(res, true, "");
        return kExitOk;
    } catch (const NonConvergenceError& e) {
        report(e.best, false, e.what());
        return kExitNumerical;
    }
}

// ---------------------------------------------------------------------------
// scaling

int cmd_scaling(const PulseSource& src, const std::string& bath_kind, int nb, double omega_b,
                double lambda_z, std::uint64_t seed, double grid_min, double grid_max,
                int grid_points, int threads, bool no_refine, const std::string& out_path,
                const std::string& format) {
    const PulseShape pulse = src.load(!no_refine);

    RandomBathConfig cfg;
    cfg.seed = seed;
    cfg.n_spins = nb;
    if (bath_kind == "z-dyn") {
        cfg.omega_b = omega_b;
        cfg.lambda = Eigen::Vector3d(0, 0, lambda_z);
        cfg.structure = CouplingStructure::ZOnly;
    } else if (bath_kind == "z-static") {
        cfg.omega_b = 0.0;
        cfg.lambda = Eigen::Vector3d(0, 0, lambda_z);
        cfg.structure = CouplingStructure::ZOnly;
    } else if (bath_kind == "general") {
        cfg.omega_b = omega_b;
        cfg.lambda = Eigen::Vector3d(lambda_z, lambda_z, lambda_z);
        cfg.structure = CouplingStructure::General;
    } else {
        throw CLI::ValidationError("--bath", "expected z-dyn, z-static, or general");
    }
    const BathSpec bath = random_bath(cfg);

    ScalingOptions opts;
    opts.threads = threads > 0 ? threads
                               : static_cast<int>(std::thread::hardware_concurrency());
    const std::vector<double> grid = log_grid(grid_min, grid_max, grid_points);

    ScalingReport rep;
    bool floored = false;
    std::string floor_msg;
    try {
        rep = scaling_exponent(pulse, bath, grid, opts);
    } catch (const FloorContaminationError& e) {
        rep = e.partial;
        floored = true;
        floor_msg = e.what();
    }

    const std::string path = resolve_out_path(out_path);
    int usable = 0;
    for (const ScalingPoint& p : rep.points) usable += p.usable;

    if (format == "json") {
        json j;
        j["pulse"] = src.label();
        j["bath"] = {{"kind", bath_kind}, {"n_spins", nb},   {"omega_b", cfg.omega_b},
                     {"lambda_z", lambda_z}, {"seed", seed}};
        json pts = json::array();
        for (const ScalingPoint& p : rep.points)
            pts.push_back({{"tau_p", p.tau_p},
                           {"distance", p.dist},
                           {"tolerance", p.tolerance},
                           {"steps", p.steps},
                           {"usable", p.usable}});
        j["points"] = std::move(pts);
        j["warnings"] = rep.warnings;
        j["usable_points"] = usable;
        if (!floored) {
            j["slope"] = rep.slope;
            j["intercept"] = rep.intercept;
            j["fit_rms"] = rep.fit_rms;
        } else {
            j["error"] = floor_msg;
        }
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << j.dump(2) << "\n";
        std::cout << j.dump(2) << "\n";
    } else {
        std::ostringstream csv;
        csv << "# pulsekit scaling report\n";
        csv << "# pulse = " << src.label() << (no_refine ? "" : " (refined)") << "\n";
        csv << "# bath = " << bath_kind << " nb=" << nb << " omega_b=" << cfg.omega_b
            << " lambda_z=" << lambda_z << " seed=" << seed << "\n";
        csv << "tau_p,distance\n";
        for (const ScalingPoint& p : rep.points)
            csv << fmt(p.tau_p) << "," << fmt(p.dist) << "\n";
        for (const std::string& w : rep.warnings) csv << "# warning: " << w << "\n";
        csv << "# usable_points = " << usable << "/" << rep.points.size() << "\n";
        if (!floored) {
            csv << "# slope = " << fmt(rep.slope) << "\n";
            csv << "# intercept = " << fmt(rep.intercept) << "\n";
            csv << "# fit_rms = " << fmt(rep.fit_rms) << "\n";
        } else {
            csv << "# error: " << floor_msg << "\n";
        }
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << csv.str();
        std::cout << csv.str();
    }
    return floored ? kExitNumerical : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decoupling pulse toolkit: catalog, residuals, design, scaling"};
    app.require_subcommand(1);

    // catalog
    auto* cat = app.add_subcommand("catalog", "list the named pulses");
    std::string cat_theta, cat_order, cat_name, cat_format = "table";
    cat->add_option("--theta", cat_theta, "filter by target angle (pi, pi/2)");
    cat->add_option("--order", cat_order, "filter by correction order (first, second)")
        ->check(CLI::IsMember({"first", "second"}));
    cat->add_option("--name", cat_name, "filter by name");
    cat->add_option("--format", cat_format)->check(CLI::IsMember({"table", "json"}));

    // residuals
    auto* res = app.add_subcommand("residuals", "evaluate the correction residuals of a pulse");
    PulseSource res_src;
    std::string res_format = "table";
    add_pulse_source(res, res_src);
    res->add_option("--format", res_format)->check(CLI::IsMember({"table", "json"}));

    // design
    auto* des = app.add_subcommand("design", "solve for pulse parameters zeroing residuals");
    std::string des_family, des_theta, des_guess, des_targets, des_out = "designed-pulse.json";
    std::string des_format = "table";
    double des_tol = 1e-11;
    int des_maxiter = 200;
    des->add_option("--family", des_family, "pulse family")
        ->required()
        ->check(CLI::IsMember({"composite3-asym", "composite3-sym", "composite5-sym",
                               "composite6-asym", "harmonic38", "harmonic39", "harmonic40"}));
    des->add_option("--theta", des_theta, "target angle (pi, pi/2, or radians)")->required();
    des->add_option("--guess", des_guess, "initial parameters (comma list or catalog name)")
        ->required();
    des->add_option("--targets", des_targets, "residuals to zero (default per family)");
    des->add_option("--out", des_out, "output pulse file");
    des->add_option("--tol", des_tol, "residual tolerance");
    des->add_option("--max-iter", des_maxiter, "iteration budget");
    des->add_option("--format", des_format)->check(CLI::IsMember({"table", "json"}));

    // scaling
    auto* sca = app.add_subcommand("scaling", "pulse-error scaling over a tau_p grid");
    PulseSource sca_src;
    std::string sca_bath = "z-dyn", sca_out = "scaling.csv", sca_format = "csv";
    int sca_nb = 2, sca_points = 8, sca_threads = 0;
    double sca_omega = 1.0, sca_lambda = 1.0, sca_min = 1e-3, sca_max = 1e-1;
    std::uint64_t sca_seed = 0;
    bool sca_norefine = false;
    add_pulse_source(sca, sca_src);
    sca->add_option("--bath", sca_bath, "bath preset: z-dyn, z-static, general");
    sca->add_option("--nb", sca_nb, "bath spin count (1-4)");
    sca->add_option("--omega-b", sca_omega, "bath energy scale");
    sca->add_option("--lambda", sca_lambda, "coupling strength");
    sca->add_option("--seed", sca_seed, "bath realization seed");
    sca->add_option("--grid-min", sca_min, "smallest tau_p");
    sca->add_option("--grid-max", sca_max, "largest tau_p");
    sca->add_option("--grid-points", sca_points, "grid size");
    sca->add_option("--threads", sca_threads, "worker threads (0 = hardware)");
    sca->add_flag("--no-refine", sca_norefine,
                  "use printed catalog parameters instead of the exact root");
    sca->add_option("--out", sca_out, "output report file");
    sca->add_option("--format", sca_format)->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (cat->parsed()) return cmd_catalog(cat_theta, cat_order, cat_name, cat_format);
        if (res->parsed()) return cmd_residuals(res_src, res_format);
        if (des->parsed())
            return cmd_design(des_family, des_theta, des_guess, des_targets, des_out, des_tol,
                              des_maxiter, des_format);
        if (sca->parsed())
            return cmd_scaling(sca_src, sca_bath, sca_nb, sca_omega, sca_lambda, sca_seed,
                               sca_min, sca_max, sca_points, sca_threads, sca_norefine, sca_out,
                               sca_format);
    } catch (const PulseParseError& e) {
        std::cerr << "error: " << e.what() << " (line " << e.line << ")\n";
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.get_name() << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
