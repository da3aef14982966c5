// Command-line front end: theta, count, surface, omega.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "twistcount/asymptotics.hpp"
#include "twistcount/quartic.hpp"
#include "twistcount/twists.hpp"

using namespace twistcount;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 2, kResource = 3, kInvariant = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Summary key/values plus one table; emitted as table, csv or json.
struct Output {
    std::string command;
    std::vector<std::pair<std::string, json>> summary;
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;
    std::vector<std::string> notes;  // free text, table format only

    void add(const std::string& k, json v) { summary.emplace_back(k, std::move(v)); }
};

std::string cell(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) {
        std::ostringstream os;
        os << std::setprecision(10) << v.get<double>();
        return os.str();
    }
    return v.dump();
}

void emit(std::ostream& os, const Output& o, const std::string& format) {
    if (format == "json") {
        json j;
        j["command"] = o.command;
        j["summary"] = json::object();
        for (const auto& [k, v] : o.summary) j["summary"][k] = v;
        j["columns"] = o.columns;
        j["rows"] = json::array();
        for (const auto& r : o.rows) j["rows"].push_back(r);
        os << j.dump(2) << "\n";
    } else if (format == "csv") {
        for (const auto& [k, v] : o.summary) os << "# " << k << "=" << cell(v) << "\n";
        for (std::size_t i = 0; i < o.columns.size(); ++i) os << (i ? "," : "") << o.columns[i];
        if (!o.columns.empty()) os << "\n";
        for (const auto& r : o.rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << cell(r[i]);
            os << "\n";
        }
    } else {
        for (const auto& [k, v] : o.summary) os << k << ": " << cell(v) << "\n";
        for (const auto& n : o.notes) os << n << "\n";
        if (o.columns.empty()) return;
        std::vector<std::size_t> w(o.columns.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = o.columns[i].size();
        for (const auto& r : o.rows)
            for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], cell(r[i]).size());
        for (std::size_t i = 0; i < w.size(); ++i) os << std::setw(static_cast<int>(w[i]) + 2) << o.columns[i];
        os << "\n";
        for (const auto& r : o.rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << std::setw(static_cast<int>(w[i]) + 2) << cell(r[i]);
            os << "\n";
        }
    }
}

/// start:stop:x<factor>, or a comma-separated list
std::vector<std::int64_t> parse_grid(const std::string& s) {
    try {
        auto c1 = s.find(':');
        if (c1 == std::string::npos) {
            std::vector<std::int64_t> g;
            std::stringstream ss(s);
            std::string tok;
            while (std::getline(ss, tok, ',')) g.push_back(static_cast<std::int64_t>(std::stold(tok)));
            return g;
        }
        auto c2 = s.find(':', c1 + 1);
        if (c2 == std::string::npos || s[c2 + 1] != 'x') throw UsageError("grid must be start:stop:x<factor>");
        return geometric_grid(std::stold(s.substr(0, c1)), std::stold(s.substr(c1 + 1, c2 - c1 - 1)),
                              std::stold(s.substr(c2 + 2)));
    } catch (const PreconditionError& e) {
        throw UsageError(e.what());
    } catch (const std::invalid_argument&) {
        throw UsageError("cannot parse grid '" + s + "'");
    }
}

struct Common {
    std::int64_t A = 0, B = 0;
    std::string format = "table";
    std::string output;
    unsigned workers = 1;
    std::uint64_t seed = 1;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--A", c.A, "coefficient A of x^3 + A x + B")->required();
    sub->add_option("--B", c.B, "coefficient B")->required();
    sub->add_option("--format", c.format, "table | csv | json")->check(CLI::IsMember({"table", "csv", "json"}));
    sub->add_option("--output", c.output, "write to this file instead of stdout");
    sub->add_option("--workers", c.workers, "worker threads (default $TWISTCOUNT_WORKERS or 1)");
    sub->add_option("--seed", c.seed, "seed for stochastic commands");
}

void write_out(const Common& cfg, const Output& o) {
    if (cfg.output.empty()) {
        emit(std::cout, o, cfg.format);
        return;
    }
    std::ofstream f(cfg.output);
    if (!f) throw UsageError("cannot open output file " + cfg.output);
    emit(f, o, cfg.format);
}

// ---------------------------------------------------------------------------

struct ThetaArgs {
    int a = 1;
    std::string grid = "1e4:1e6:x10";
    std::uint32_t pmax = 1'000'000;
};

int cmd_theta(const Common& cfg, const ThetaArgs& args) {
    auto c = build_curve(cfg.A, cfg.B);
    auto grid = parse_grid(args.grid);
    SieveOptions so;
    so.workers = cfg.workers;
    auto fit = summatory_theta(c, args.a, grid, so);
    auto er = euler_residue(c, args.a, args.pmax);
    Output o;
    o.command = "theta";
    o.add("curve", c.label());
    o.add("lambda", c.lambda);
    o.add("a", args.a);
    if (er.l_chi) {
        o.add("chi_modulus", static_cast<std::int64_t>(std::llabs(er.chi_discriminant)));
        o.add("chi_discriminant", er.chi_discriminant);
        o.add("L_chi_1", static_cast<double>(*er.l_chi));
    }
    o.add("fitted_constant", static_cast<double>(fit.leading_coeff));
    o.add("euler_constant", static_cast<double>(er.c1));
    o.add("euler_tail", static_cast<double>(er.tail));
    o.add("euler_tail_is_bound", er.tail_is_bound);
    o.add("agreement_ratio", static_cast<double>(fit.leading_coeff / er.c1));
    o.add("residual", static_cast<double>(fit.residual));
    o.add("model_residual", static_cast<double>(fit.model_residual));
    o.columns = {"X", "Theta", "Theta_over_XlogX", "model"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        long double X = grid[i];
        o.rows.push_back({grid[i], static_cast<double>(fit.values[i]),
                          static_cast<double>(fit.values[i] / (X * std::pow(std::log(X), c.lambda - 1))),
                          static_cast<double>(fit_model(fit, X))});
    }
    write_out(cfg, o);
    return kOk;
}

// ---------------------------------------------------------------------------

struct CountArgs {
    std::int64_t X = 0;
    double alpha = 0.1;
    bool oracle = false;
    std::string grid;
    std::string report;
    std::uint64_t budget = 0;
    double tol = 1e-6;
};

int cmd_count(const Common& cfg, const CountArgs& args) {
    if (args.X < 1) throw UsageError("--X must be >= 1");
    if (!(args.alpha > 0)) throw UsageError("--alpha must be positive");
    auto c = build_curve(cfg.A, cfg.B);
    auto gap = explicit_gap(c);
    EnumerationOptions eo;
    eo.workers = cfg.workers;
    eo.height_tol = args.tol;
    if (args.budget) eo.candidate_budget = args.budget;
    CountReport rep;
    try {
        rep = enumerate_small_points(c, args.X, args.alpha, gap, eo);
    } catch (const BudgetError& e) {
        // flush what was reached before exiting
        std::cout << "partial: " << e.partial() << "\n";
        std::cout.flush();
        throw;
    }
    Output o;
    o.command = "count";
    o.add("curve", c.label());
    o.add("X", args.X);
    o.add("alpha", args.alpha);
    o.add("gap_h1", static_cast<double>(gap.h1));
    o.add("gap_h2", static_cast<double>(gap.h2));
    o.add("N", rep.N);
    o.add("N_star", rep.N_star);
    o.add("N_dagger", rep.N_dagger);
    o.add("ratio", rep.N ? static_cast<double>(rep.N_star) / (2.0 * c.T2 * rep.N) : 0.0);
    o.add("seconds", rep.seconds);
    if (!args.grid.empty()) {
        auto grid = parse_grid(args.grid);
        if (grid.back() > args.X) throw UsageError("--grid must not exceed --X");
        auto g = growth_from_report(c, rep, grid);
        o.add("slope", static_cast<double>(g.slope));
        o.add("fit_constant", static_cast<double>(g.fit.leading_coeff));
        json arr = json::array();
        for (std::size_t i = 0; i < grid.size(); ++i)
            arr.push_back({{"X", grid[i]}, {"N_star", g.N_star[i]}, {"N_dagger", g.N_dagger[i]}, {"N", g.N[i]},
                           {"ratio", static_cast<double>(g.ratio[i])}});
        if (cfg.format != "table") o.add("growth", arr);
        o.notes.push_back("growth grid:");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            std::ostringstream os;
            os << "  X=" << grid[i] << " N*=" << g.N_star[i] << " N=" << g.N[i] << " ratio=" << static_cast<double>(g.ratio[i]);
            o.notes.push_back(os.str());
        }
    }
    std::string violation = check_report(c, rep);
    if (args.oracle) {
        if (args.X > 10'000) throw UsageError("--oracle needs X <= 10^4");
        auto bf = brute_force_count(c, args.X, args.alpha, gap, args.tol);
        bool match = reports_equal(rep, bf);
        o.add("oracle", match ? "oracle match" : "oracle MISMATCH");
        if (!match) violation += " oracle mismatch;";
    }
    o.columns = {"d", "d0", "d1", "y", "z", "x", "x0", "y0", "z0", "hhat", "torsion"};
    for (const auto& [d, v] : rep.per_d)
        for (const auto& p : v) {
            std::vector<json> row{d};
            if (p.has_twist_point)
                for (auto q : {p.tp.d0, p.tp.d1, p.tp.y, p.tp.z, p.tp.x}) row.push_back(q);
            else
                for (int k = 0; k < 5; ++k) row.push_back("-");
            for (const auto* q : {&p.P.x, &p.P.y, &p.P.z}) row.push_back(q->get_str());
            row.push_back(static_cast<double>(p.hhat));
            row.push_back(p.torsion ? 1 : 0);
            o.rows.push_back(std::move(row));
        }
    if (!args.report.empty()) {
        std::ofstream f(args.report);
        write_report(f, rep);
    }
    write_out(cfg, o);
    if (!violation.empty()) throw InvariantViolation(violation);
    return kOk;
}

// ---------------------------------------------------------------------------

struct SurfaceArgs {
    std::int64_t y1 = 1, y2 = 1, z1 = 1, z2 = 1, H = 100;
};

int cmd_surface(const Common& cfg, const SurfaceArgs& args) {
    auto c = build_curve(cfg.A, cfg.B);
    if (args.H > 1000) throw ResourceError("census: H > 10^3 exceeds the cost guard");
    QuarticSurface S;
    try {
        S = make_surface(c, args.y1, args.y2, args.z1, args.z2);
    } catch (const PreconditionError& e) {
        throw UsageError(e.what());
    }
    auto L = lines(S);
    int rational = 0, mismatch = 0, off_surface = 0;
    Output o;
    o.command = "surface";
    o.columns = {"kind", "data", "root_index", "c", "rational", "integer_scaling"};
    for (const auto& l : L) {
        bool r = classify_rational(S, l);
        bool scal = rational_by_integer_scaling(S, l);
        rational += r;
        mismatch += r != scal;
        off_surface += !line_on_surface(S, l);
        std::ostringstream data, cs;
        if (l.kind == SurfaceLine::Kind::Product) {
            data << "(" << l.r1 << "," << l.r2 << ")";
        } else {
            data << "perm=" << l.perm[0] << l.perm[1] << l.perm[2] << l.perm[3];
        }
        cs << std::setprecision(8);
        if (l.c_exact)
            cs << l.c_exact->get_str();
        else if (l.kind == SurfaceLine::Kind::Graph)
            cs << static_cast<double>(l.c.real()) << (l.c.imag() < 0 ? "" : "+") << static_cast<double>(l.c.imag()) << "i";
        else
            cs << "-";
        o.rows.push_back({l.kind == SurfaceLine::Kind::Product ? "product" : "graph", data.str(),
                          l.kind == SurfaceLine::Kind::Graph ? json(l.root_index) : json("-"), cs.str(), r, scal});
    }
    auto cen = census(S, args.H, cfg.workers);
    o.add("curve", c.label());
    o.add("surface", "y1=" + std::to_string(args.y1) + " y2=" + std::to_string(args.y2) + " z1=" + std::to_string(args.z1) +
                         " z2=" + std::to_string(args.z2));
    o.add("lines", static_cast<std::int64_t>(L.size()));
    o.add("rational lines", rational);
    o.add("classifier mismatches", mismatch);
    o.add("H", args.H);
    o.add("on_rational_line_points", cen.on_line_points);
    o.add("irrational_line_points", cen.irrational_line_points);
    o.add("off_line_points", cen.off_line_points);
    o.add("qlines", cen.qlines_points);
    write_out(cfg, o);
    std::string v;
    if (cen.qlines_points) v += " qlines != 0;";
    if (mismatch) v += " rationality classifiers disagree;";
    if (off_surface) v += " a line fails to lie on the surface;";
    if (!v.empty()) throw InvariantViolation(v);
    return kOk;
}

// ---------------------------------------------------------------------------

struct OmegaArgs {
    double alpha = 0;
    double target = 0.05;
    double vcut = 0;
    double vmax = 1e9;
    std::uint64_t samples = 1 << 18;
    bool oracle = false;
    double lattice_X = 1e10;
};

void region_rows(Output& o, const RegionSample& r) {
    o.add("alpha", static_cast<double>(r.alpha));
    o.add("C0", static_cast<double>(r.C0));
    o.add("estimate", static_cast<double>(r.estimate));
    o.add("std_error", static_cast<double>(r.std_error));
    o.add("samples", r.samples);
    o.add("v_cutoff", static_cast<double>(r.v_cutoff));
    o.add("tail_bound", std::isfinite(static_cast<double>(r.tail_bound)) ? json(static_cast<double>(r.tail_bound)) : json("inf"));
    o.add("decay_exponent", static_cast<double>(r.decay_exponent));
    o.columns = {"v_lo", "v_hi", "mass", "std_error", "hits", "samples"};
    for (const auto& s : r.slices)
        o.rows.push_back({static_cast<double>(s.v_lo), static_cast<double>(s.v_hi), static_cast<double>(s.mass),
                          static_cast<double>(s.std_error), s.hits, s.samples});
}

int cmd_omega(const Common& cfg, const OmegaArgs& args) {
    if (!(args.alpha > 0 && args.alpha < 0.125)) throw UsageError("--alpha must satisfy 0 < alpha < 1/8");
    auto c = build_curve(cfg.A, cfg.B);
    OmegaOptions oo;
    oo.seed = cfg.seed;
    oo.workers = cfg.workers;
    oo.samples_per_slice = args.samples;
    oo.v_max = args.vmax;
    Output o;
    o.command = "omega";
    o.add("curve", c.label());
    o.add("seed", cfg.seed);
    RegionSample r;
    bool budget = false;
    std::string budget_msg;
    if (args.vcut > 0) {
        r = omega_truncated(c, args.alpha, args.vcut, oo);
        o.add("mode", "truncated");
    } else {
        try {
            r = omega(c, args.alpha, args.target, oo, &r);
            o.add("mode", "adaptive");
        } catch (const BudgetError& e) {
            budget = true;
            budget_msg = e.what();
            o.add("mode", "adaptive (partial)");
        }
    }
    region_rows(o, r);
    if (args.oracle) {
        auto lc = lattice_region_count(c, args.alpha, args.lattice_X);
        long double lat = lc.normalized();
        long double sigma = r.std_error;
        o.add("lattice_X", args.lattice_X);
        o.add("lattice_count", lc.count);
        o.add("lattice_normalized", static_cast<double>(lat));
        o.add("oracle_deviation_sigmas", static_cast<double>(std::fabs(lat - r.estimate) / sigma));
        o.add("oracle", std::fabs(lat - r.estimate) <= 3 * sigma ? "agree" : "disagree");
    }
    if (budget) o.add("budget", budget_msg);
    write_out(cfg, o);
    if (budget) return kResource;
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"twistcount: small points on quadratic twists, and the surrounding experiments"};
    app.require_subcommand(1);
    Common cfg;
    if (const char* w = std::getenv("TWISTCOUNT_WORKERS")) cfg.workers = static_cast<unsigned>(std::max(1, std::atoi(w)));

    ThetaArgs ta;
    auto* theta = app.add_subcommand("theta", "summatory theta(n^a) against its Euler-product constant");
    add_common(theta, cfg);
    theta->add_option("--a", ta.a, "exponent a")->check(CLI::PositiveNumber);
    theta->add_option("--grid", ta.grid, "start:stop:x<factor>");
    theta->add_option("--pmax", ta.pmax, "Euler product truncation");

    CountArgs ca;
    auto* count = app.add_subcommand("count", "enumerate points of small canonical height on twists d <= X");
    add_common(count, cfg);
    count->add_option("--X", ca.X, "bound on d")->required();
    count->add_option("--alpha", ca.alpha, "height exponent");
    count->add_flag("--oracle", ca.oracle, "compare against the brute-force count (X <= 10^4)");
    count->add_option("--grid", ca.grid, "growth grid start:stop:x<factor> (<= X)");
    count->add_option("--report", ca.report, "also write the line-oriented report to this file");
    count->add_option("--budget", ca.budget, "candidate budget");
    count->add_option("--tol", ca.tol, "height tolerance");

    SurfaceArgs sa;
    auto* surface = app.add_subcommand("surface", "lines and point census on the quartic surface");
    add_common(surface, cfg);
    surface->add_option("--y1", sa.y1);
    surface->add_option("--y2", sa.y2);
    surface->add_option("--z1", sa.z1);
    surface->add_option("--z2", sa.z2);
    surface->add_option("--H", sa.H, "census height bound (<= 1000)");

    OmegaArgs oa;
    auto* om = app.add_subcommand("omega", "Monte Carlo volume of the region 0 < G <= 1");
    add_common(om, cfg);
    om->add_option("--alpha", oa.alpha)->required();
    om->add_option("--target", oa.target, "target relative error");
    om->add_option("--vcut", oa.vcut, "fixed v cutoff (truncated volume) instead of the adaptive run");
    om->add_option("--vmax", oa.vmax, "largest v for the adaptive run");
    om->add_option("--samples", oa.samples, "samples per slice");
    om->add_flag("--oracle", oa.oracle, "compare with the lattice count");
    om->add_option("--lattice-X", oa.lattice_X, "synthetic X for the lattice count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    try {
        if (*theta) return cmd_theta(cfg, ta);
        if (*count) return cmd_count(cfg, ca);
        if (*surface) return cmd_surface(cfg, sa);
        if (*om) return cmd_omega(cfg, oa);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const SingularCurveError& e) {
        std::cerr << "invalid curve: " << e.what() << "\n";
        return kUsage;
    } catch (const PreconditionError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return kResource;
    } catch (const ResourceError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return kResource;
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation:" << e.what() << "\n";
        return kInvariant;
    }
    return kUsage;
}
