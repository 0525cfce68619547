#include "lmm/io.hpp"
#include "lmm/zoo.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>

using namespace lmm;
using io::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

struct StudyConfig {
    std::string command;
    int level = 3;
    int dim = 1;
    double beta = 2.5;
    std::optional<std::uint64_t> seed;
    std::string out;  // report JSON; empty = stdout
    std::string op;
    std::string config;

    // decompose
    std::string stencil;
    double delta_floor = 0;
    double tol = -1;  // < 0: per-command default

    // minmax
    int probes = 64;
    int samples = 48;
    int segment = 8;
    double box = 2.0;

    // converge
    std::string study;
    std::vector<int> levels;

    // dtn
    double H = 10;
    int nx = 256, ny = 128;
    std::vector<double> xi{1, 2, 4};
    std::string csv, kernel_csv;
};

json echo(const StudyConfig& c) {
    json j{{"command", c.command}, {"level", c.level}, {"dim", c.dim}, {"beta", c.beta}, {"out", c.out}};
    if (c.seed) j["seed"] = *c.seed;
    if (!c.op.empty()) j["operator"] = c.op;
    if (!c.config.empty()) j["config"] = c.config;
    if (c.command == "decompose") {
        j["stencil"] = c.stencil;
        j["delta_floor"] = c.delta_floor;
    } else if (c.command == "minmax") {
        j["probes"] = c.probes;
        j["samples"] = c.samples;
        j["segment"] = c.segment;
        j["box"] = c.box;
    } else if (c.command == "converge") {
        j["study"] = c.study;
        j["levels"] = c.levels;
    } else if (c.command == "dtn") {
        j["H"] = c.H;
        j["nx"] = c.nx;
        j["ny"] = c.ny;
        j["xi"] = c.xi;
        j["csv"] = c.csv;
        j["kernel_csv"] = c.kernel_csv;
    }
    j["tol"] = c.tol;
    return j;
}

// keys in the config file take precedence over flags
void apply_config(StudyConfig& c) {
    if (c.config.empty()) return;
    json j;
    try {
        j = json::parse(io::read_file(c.config));
    } catch (const json::parse_error& e) {
        throw Error(c.config + ": " + e.what());
    }
    if (!j.is_object()) throw Error(c.config + ": top level must be an object");
    auto get = [&](const char* k, auto& dst) {
        if (j.contains(k)) dst = j[k].get<std::decay_t<decltype(dst)>>();
    };
    get("level", c.level);
    get("dim", c.dim);
    get("beta", c.beta);
    get("out", c.out);
    get("operator", c.op);
    get("stencil", c.stencil);
    get("delta_floor", c.delta_floor);
    get("tol", c.tol);
    get("probes", c.probes);
    get("samples", c.samples);
    get("segment", c.segment);
    get("box", c.box);
    get("study", c.study);
    get("levels", c.levels);
    get("H", c.H);
    get("nx", c.nx);
    get("ny", c.ny);
    get("xi", c.xi);
    get("csv", c.csv);
    get("kernel_csv", c.kernel_csv);
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
}

std::string resolve_out(const std::string& p) {
    if (p.empty()) return p;
    fs::path a = fs::absolute(p);
    if (!a.parent_path().empty() && !fs::is_directory(a.parent_path()))
        throw Error("output directory does not exist: " + a.parent_path().string());
    return a.string();
}

void resolve_paths(StudyConfig& c) {
    if (!c.config.empty()) c.config = fs::absolute(c.config).string();
    apply_config(c);
    if (!c.stencil.empty()) {
        c.stencil = fs::absolute(c.stencil).string();
        if (!fs::exists(c.stencil)) throw Error("stencil file not found: " + c.stencil);
    }
    c.out = resolve_out(c.out);
    c.csv = resolve_out(c.csv);
    c.kernel_csv = resolve_out(c.kernel_csv);
}

std::string timestamp() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct Checks {
    json list = json::array();
    bool ok = true;
    void add(const std::string& name, double value, const std::string& rule, bool pass) {
        list.push_back({{"name", name}, {"value", value}, {"rule", rule}, {"pass", pass}});
        ok = ok && pass;
    }
};

int finish(const StudyConfig& c, json results, const Checks& ch) {
    json rep{{"tool", "lmm"},
             {"version", kVersion},
             {"config", echo(c)},
             {"timestamp", timestamp()},
             {"results", std::move(results)},
             {"checks", ch.list},
             {"pass", ch.ok}};
    std::string s = rep.dump(2) + "\n";
    if (c.out.empty()) std::cout << s;
    else io::write_file(c.out, s);
    for (const auto& k : ch.list)
        if (!k["pass"].get<bool>())
            std::cerr << "FAIL " << k["name"].get<std::string>() << ": " << io::num(k["value"].get<double>()) << " ("
                      << k["rule"].get<std::string>() << ")\n";
    return ch.ok ? 0 : 1;
}

std::uint64_t need_seed(const StudyConfig& c) {
    if (!c.seed) throw Error(c.command + ": --seed is required for sampled studies");
    return *c.seed;
}

// ---------- commands ----------

int cmd_decompose(const StudyConfig& c) {
    require(!c.stencil.empty(), "decompose: --stencil is required");
    PointFunctional l = io::parse_stencil(io::read_file(c.stencil), c.stencil);
    DecomposeOptions opt;
    opt.delta_floor = c.delta_floor;
    CourregeDecomposition dec = decompose(l, opt);
    double tol = c.tol > 0 ? c.tol : 1e-10;
    json r = io::to_json(dec);
    r["support_size"] = l.kernel.size();
    r["atoms"] = dec.mu.size();
    Checks ch;
    ch.add("residual", dec.residual, "<= " + io::num(tol), dec.residual <= tol);
    return finish(c, r, ch);
}

int cmd_minmax(const StudyConfig& c) {
    std::uint64_t seed = need_seed(c);
    std::string name = c.op.empty() ? "bellman2" : c.op;
    OperatorOracle I = zoo::oracle(name, c.dim);
    DyadicGrid g(c.level, c.dim, c.box);
    RegularityClass beta(c.beta);
    MinMaxStudy st = minmax_study(I, g, beta, c.samples, c.probes, seed, c.segment);
    double tol = c.tol > 0 ? c.tol : (name == "isaacs22" ? 1e-6 : 1e-8);

    double mean = 0, lo = 0;
    json nodes = json::array();
    for (long L = 0; L < g.size(); ++L) {
        const auto& v = st.values[L];
        mean += std::abs(v.gap);
        lo = std::min(lo, v.gap);
        Idx xi = g.node(L);
        nodes.push_back({{"node", std::vector<long>(xi.data(), xi.data() + xi.size())},
                         {"gap", v.gap},
                         {"probe", v.argmin_probe}});
    }
    mean /= double(g.size());

    json manifest = json::array();
    double supA = 0, supB = 0, supC = 0, mass = 0;
    RadialCutoff phi = RadialCutoff::phi_d(0.125), eta = RadialCutoff::eta_d(0.125);
    for (const auto& S : st.clarke.samples) {
        manifest.push_back({{"seed", S.seed}, {"step", S.step}, {"defect", S.defect}, {"noise", S.noise}});
        for (const auto& nc : coefficient_fields(S, phi, eta)) {
            supA = std::max(supA, nc.A.cwiseAbs().maxCoeff());
            supB = std::max(supB, nc.B.cwiseAbs().maxCoeff());
            supC = std::max(supC, std::abs(nc.C));
            double m = 0;
            for (const auto& a : nc.mu.atoms) m += std::abs(a.mass) * std::min(1.0, a.y.squaredNorm());
            mass = std::max(mass, m);
        }
    }
    double lip = st.lipschitz > 0 ? st.lipschitz : 1.0;
    json r{{"operator", name},
           {"grid", io::grid_json(g)},
           {"gap", {{"max_abs", st.max_gap}, {"mean_abs", mean}, {"min", lo}}},
           {"nodes", nodes},
           {"clarke", {{"size", st.clarke.size()},
                       {"discarded", st.clarke.discarded},
                       {"merged", st.clarke.merged},
                       {"samples", manifest}}},
           {"coefficients",
            {{"lipschitz", st.lipschitz},
             {"cutoff_delta", 0.125},
             {"sup_A", supA},
             {"sup_B", supB},
             {"sup_C", supC},
             {"sup_levy_mass", mass},
             {"ratio_A", supA / lip},
             {"ratio_B", supB / lip},
             {"ratio_C", supC / lip},
             {"ratio_levy_mass", mass / lip}}}};
    Checks ch;
    ch.add("max_abs_gap", st.max_gap, "<= " + io::num(tol), st.max_gap <= tol);
    return finish(c, r, ch);
}

struct Series {
    std::vector<int> levels;
    std::vector<double> h, value;
    LogLogFit fit;
};

int cmd_converge(const StudyConfig& c) {
    std::vector<int> levels = c.levels;
    const std::string& s = c.study;
    if (levels.empty()) levels = s == "In" ? std::vector<int>{3, 4, 5, 6} : std::vector<int>{2, 3, 4, 5, 6};
    if (levels.size() < 3) throw Error("converge: need at least three levels, got " + std::to_string(levels.size()));
    RegularityClass beta(c.beta);
    Series out;
    Checks ch;
    json extra;
    if (s == "dgrad" || s == "dhess") {
        require(c.dim == 1, "converge: derivative studies run in d = 1");
        bool grad = s == "dgrad";
        auto st = grad ? convergence_order(zoo::sine(), DerivativeKind::Grad, levels, zoo::vec1(0.5))
                       : convergence_order(zoo::mollified_power(), DerivativeKind::Hess, levels, zoo::vec1(0));
        out = {st.levels, st.h, st.error, st.fit};
        double want = grad ? 2.0 : 0.5, tol = grad ? 0.1 : 0.2;
        extra["function"] = grad ? "sin" : "mollified |x|^2.5";
        ch.add("order", st.fit.slope, io::num(want) + " +- " + io::num(tol), std::abs(st.fit.slope - want) <= tol);
    } else if (s == "projection") {
        require(c.dim == 1, "converge: projection study runs in d = 1");
        auto st = projection_study(zoo::holder_bump(), beta, levels, 1.5, 3.0, 2000, need_seed(c));
        out = {st.levels, st.h, st.value, st.fit};
        extra["function"] = "(1 - x^2)_+^2.5";
        ch.add("gamma", st.fit.slope, "> 0", st.fit.slope > 0);
    } else if (s == "In") {
        std::string name = c.op.empty() ? "linear" : c.op;
        Rng rng(need_seed(c));
        SmoothFn u = random_test_function(c.dim, rng);
        auto st = convergence_study(zoo::oracle(name, c.dim), u, levels, 1.0, beta, 2.0);
        out = {st.levels, st.h, st.error, st.fit};
        extra["operator"] = name;
        ch.add("gamma", st.fit.slope, "> 0", st.fit.exact || st.fit.slope > 0);
    } else if (s == "defect") {
        require(c.dim == 1, "converge: defect study runs in d = 1");
        auto st = order_preservation_defect(zoo::defect_family(), Vec::Zero(1), beta, levels);
        out = {st.levels, st.h, st.defect, st.fit};
        extra["function"] = "asymmetric C^2.5 bump";
        if (beta.beta < 1) {
            double worst = *std::max_element(st.defect.begin(), st.defect.end());
            ch.add("max_defect", worst, "<= 1e-12", worst <= 1e-12);
        } else {
            ch.add("gamma", st.fit.slope, "> 0", st.fit.exact || st.fit.slope > 0);
        }
    } else {
        throw Error("converge: unknown study '" + s + "'; known: dgrad dhess projection In defect");
    }
    io::Csv csv{{"level", "h", "value"}, {}};
    for (std::size_t i = 0; i < out.levels.size(); ++i) csv.rows.push_back({double(out.levels[i]), out.h[i], out.value[i]});
    if (!c.csv.empty()) io::write_file(c.csv, csv.str());
    else if (!c.out.empty()) std::cout << csv.str();
    json r{{"study", s},
           {"levels", out.levels},
           {"h", out.h},
           {"value", out.value},
           {"fit", {{"slope", out.fit.slope}, {"intercept", out.fit.intercept}, {"exact", out.fit.exact}}}};
    r.update(extra);
    return finish(c, r, ch);
}

int cmd_dtn(const StudyConfig& c) {
    StripProblem p;
    p.H = c.H;
    p.nx = c.nx;
    p.ny = c.ny;
    DtnSolver s(p);
    Checks ch;
    io::Csv csv{{"xi", "measured", "oracle", "rel_error"}, {}};
    json rows = json::array();
    std::vector<double> xis{0.0};
    for (double x : c.xi) {
        require(x > 0, "dtn: xi values must be positive (the constant row is always included)");
        xis.push_back(x);
    }
    double worst_res = 0;
    for (double xi : xis) {
        double res = 0;
        double got = dtn_eigenvalue(s, xi, &res);
        worst_res = std::max(worst_res, res);
        double want = xi == 0 ? -1 / p.H : -xi / std::tanh(xi * p.H);
        double rel = std::abs(got - want) / std::abs(want);
        csv.rows.push_back({xi, got, want, rel});
        rows.push_back({{"xi", xi}, {"measured", got}, {"oracle", want}, {"rel_error", rel}});
        if (xi == 0)
            ch.add("constant", std::abs(got - want), "<= 1e-8", std::abs(got - want) <= 1e-8);
        else
            ch.add("xi=" + io::num(xi), rel, "<= 0.02", rel <= 0.02);
    }
    DtnKernel K = dtn_kernel(s);
    io::Csv kc{{"y", "mass"}, {{0.0, K.center}}};
    double most_neg = 0;
    for (const auto& a : K.mu.atoms) {
        kc.rows.push_back({a.y[0], a.mass});
        most_neg = std::min(most_neg, a.mass);
    }
    LogLogFit slope = dtn_kernel_slope(K, 0.1, 1.0);
    ch.add("kernel_min", most_neg, ">= -1e-8", most_neg >= -1e-8);
    ch.add("kernel_slope", slope.slope, "-2 +- 0.3", std::abs(slope.slope + 2) <= 0.3);
    if (!c.csv.empty()) io::write_file(c.csv, csv.str());
    if (!c.kernel_csv.empty()) io::write_file(c.kernel_csv, kc.str());
    json r{{"eigenvalues", rows},
           {"solver", s.direct() ? "direct" : "cg"},
           {"m_matrix", s.m_matrix()},
           {"max_relative_residual", worst_res},
           {"kernel", {{"center", K.center}, {"min_mass", most_neg}, {"slope", slope.slope}, {"window", {0.1, 1.0}}}}};
    return finish(c, r, ch);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Levy-type min-max representations: decomposition, sampling and convergence studies"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    StudyConfig c;
    std::uint64_t seed = 0;

    auto common = [&](CLI::App* s) {
        s->add_option("--level", c.level, "grid level n (h = 2^-n)");
        s->add_option("--dim", c.dim, "dimension")->check(CLI::Range(1, 3));
        s->add_option("--beta", c.beta, "regularity class beta");
        s->add_option("--seed", seed, "RNG seed");
        s->add_option("--out", c.out, "report JSON path (default stdout)");
        s->add_option("--operator", c.op, "zoo operator name");
        s->add_option("--config", c.config, "JSON file whose keys override flags");
        s->add_option("--tol", c.tol, "override the asserted tolerance");
    };

    auto* dec = app.add_subcommand("decompose", "Courrege decomposition of a stencil file");
    common(dec);
    dec->add_option("--stencil", c.stencil, "stencil JSON");
    dec->add_option("--delta-floor", c.delta_floor, "smallest delta in the A schedule");

    auto* mm = app.add_subcommand("minmax", "Clarke sampling and min-max envelope of a zoo operator");
    common(mm);
    mm->add_option("--probes", c.probes, "probe count, u included");
    mm->add_option("--samples", c.samples, "Clarke base points");
    mm->add_option("--segment", c.segment, "Clarke points per probe segment [v, u]");
    mm->add_option("--box", c.box, "box radius");

    auto* cv = app.add_subcommand("converge", "rate study over levels; CSV of (level, h, value)");
    common(cv);
    cv->add_option("--study", c.study, "dgrad | dhess | projection | In | defect")->required();
    cv->add_option("--levels", c.levels, "comma separated levels")->delimiter(',');
    cv->add_option("--csv", c.csv, "CSV path (default stdout when --out is set)");

    auto* dt = app.add_subcommand("dtn", "Dirichlet-to-Neumann eigenvalues and kernel on a strip");
    common(dt);
    dt->add_option("--H", c.H, "strip height");
    dt->add_option("--nx", c.nx, "horizontal nodes");
    dt->add_option("--ny", c.ny, "vertical cells");
    dt->add_option("--xi", c.xi, "comma separated frequencies")->delimiter(',');
    dt->add_option("--csv", c.csv, "eigenvalue CSV path");
    dt->add_option("--kernel-csv", c.kernel_csv, "kernel CSV path");

    CLI11_PARSE(app, argc, argv);
    try {
        CLI::App* sub = app.get_subcommands().front();
        c.command = sub->get_name();
        if (sub->count("--seed")) c.seed = seed;
        resolve_paths(c);
        if (c.command == "decompose") return cmd_decompose(c);
        if (c.command == "minmax") return cmd_minmax(c);
        if (c.command == "converge") return cmd_converge(c);
        return cmd_dtn(c);
    } catch (const std::exception& e) {
        std::cerr << "lmm " << c.command << ": " << e.what() << "\n";
        return 2;
    }
}
