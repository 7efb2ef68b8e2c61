#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "aubrykit/aubry_mather.hpp"
#include "aubrykit/flow.hpp"
#include "aubrykit/ghost_circle.hpp"
#include "aubrykit/io.hpp"
#include "aubrykit/minimizers.hpp"
#include "aubrykit/standard_map.hpp"

namespace fs = std::filesystem;
using namespace aubrykit;
using nlohmann::json;

namespace {

void write_artifact(const Scenario& sc, const std::string& name, json body) {
    fs::create_directories(sc.out);
    body["scenario_hash"] = sc.hash();
    body["version"] = kVersion;
    write_text_file((fs::path(sc.out) / name).string(), dump_json(body));
}

PotentialPtr build_potential(const Scenario& sc, const LatticePtr& lattice) {
    if (sc.potential != "frenkel_kontorova" && sc.potential != "fk" && sc.potential != "custom")
        throw ScenarioError("unknown potential kind '" + sc.potential + "'");
    PotentialPtr base = fk_potential(FKSpec{sc.d, sc.onsite()});
    if (sc.morse_n > 0) {
        MorseApproxSpec spec{sc.morse_n, sc.morse_epsilon, sc.morse_seed, sc.morse_degree};
        CriticalSearchOptions search;
        search.grid_per_dof = sc.grid_per_dof;
        return morse_approximation(base, lattice, spec, 8, search);
    }
    return base;
}

int cmd_minimize(const Scenario& sc) {
    auto lattice = sc.lattice();
    auto pot = build_potential(sc, lattice);
    CriticalPoint min = minimize_action(pot, lattice, sc.multistart, sc.seed);
    auto birkhoff = is_birkhoff(min.config, 3);
    json j;
    j["critical_point"] = critical_point_to_json(min);
    j["birkhoff"] = birkhoff.birkhoff;
    j["lattice"] = lattice->describe();
    write_artifact(sc, "minimize.json", j);
    std::cout << "minimize: W = " << min.action << " x0 = " << min.x0()
              << " index = " << min.index << (min.degenerate ? " (degenerate)" : "") << "\n";
    return 0;
}

int cmd_critical_points(const Scenario& sc) {
    auto lattice = sc.lattice();
    auto pot = build_potential(sc, lattice);
    CriticalSearchOptions opts;
    opts.grid_per_dof = sc.grid_per_dof;
    opts.seed = sc.seed;
    auto cps = find_critical_points(pot, lattice, opts);
    json j;
    j["catalog"] = catalog_to_json(cps);
    write_artifact(sc, "catalog.json", j);
    std::cout << "critical-points: " << cps.size() << " classes\n";
    for (const auto& cp : cps)
        std::cout << "  x0 = " << cp.x0() << "  W = " << cp.action << "  index = " << cp.index
                  << (cp.degenerate ? " (degenerate)" : "") << "\n";
    return 0;
}

int cmd_flow(const Scenario& sc) {
    auto lattice = sc.lattice();
    auto pot = build_potential(sc, lattice);
    std::mt19937_64 rng(sc.seed);
    std::uniform_real_distribution<double> unif(-0.25, 0.25);
    Configuration start = Configuration::linear(lattice, 0.25);
    for (Eigen::Index i = 0; i < start.values().size(); ++i) start.values()[i] += unif(rng);
    FlowParams params;
    params.abs_tol = params.rel_tol = sc.tol;
    FlowResult r = flow(pot, start, sc.t, params);

    std::string csv = "t,W,grad_norm_sq";
    for (Eigen::Index i = 0; i < start.values().size(); ++i) csv += ",x" + std::to_string(i);
    csv += "\n";
    for (size_t s = 0; s < r.trace.size(); ++s) {
        std::vector<double> row{r.trace[s].t, r.trace[s].action, r.trace[s].grad_sq};
        for (Eigen::Index i = 0; i < r.states[s].size(); ++i) row.push_back(r.states[s][i]);
        csv += csv_row(row);
    }
    fs::create_directories(sc.out);
    write_text_file((fs::path(sc.out) / "trace.csv").string(), csv);

    json j;
    j["endpoint"] = config_to_json(r.endpoint);
    j["elapsed"] = r.elapsed;
    j["converged"] = r.converged;
    j["final_action"] = r.trace.back().action;
    write_artifact(sc, "flow.json", j);
    std::cout << "flow: t = " << sc.t << " final W = " << r.trace.back().action << "\n";
    return 0;
}

json heteroclinic_to_json(const Heteroclinic& h, size_t max_samples = 200) {
    json j;
    j["direction"] = h.direction;
    j["epsilon"] = h.epsilon;
    j["lambda_max"] = h.lambda_max;
    j["target_rate"] = h.target_rate;
    const size_t stride = std::max<size_t>(1, h.samples.size() / max_samples);
    json samples = json::array();
    for (size_t i = 0; i < h.samples.size(); i += stride) {
        json s;
        s["t"] = h.times[i];
        std::vector<double> vals(h.samples[i].data(), h.samples[i].data() + h.samples[i].size());
        s["values"] = vals;
        samples.push_back(std::move(s));
    }
    j["samples"] = std::move(samples);
    return j;
}

int cmd_ghost_circle(const Scenario& sc) {
    auto lattice = sc.lattice();
    auto pot = build_potential(sc, lattice);
    AssembleOptions opts;
    opts.search.grid_per_dof = sc.grid_per_dof;
    GhostCircle circle = assemble_ghost_circle(pot, lattice, opts);

    json j;
    json skeleton = json::array();
    for (const auto& e : circle.entries()) {
        json entry = critical_point_to_json(e.point);
        entry["is_saddle"] = e.is_saddle;
        skeleton.push_back(std::move(entry));
    }
    j["skeleton"] = std::move(skeleton);
    json hets = json::array();
    for (const auto& [down, up] : circle.heteroclinics()) {
        hets.push_back(heteroclinic_to_json(down));
        hets.push_back(heteroclinic_to_json(up));
    }
    j["heteroclinics"] = std::move(hets);

    const double base = circle.entries().front().point.x0();
    json grid = json::array();
    std::string csv = "xi,T0\n";
    Index zero(static_cast<size_t>(lattice->dim()), 0);
    for (int i = 0; i < 64; ++i) {
        const double xi = base + i / 64.0;
        const double tv = circle.t_map(xi, zero);
        grid.push_back(xi);
        csv += csv_row({xi, tv});
    }
    j["parametrization_grid"] = std::move(grid);
    fs::create_directories(sc.out);
    write_text_file((fs::path(sc.out) / "tmap.csv").string(), csv);
    write_artifact(sc, "ghost_circle.json", j);
    std::cout << "ghost-circle: " << circle.entries().size()
              << " skeleton entries, minimizer W = " << circle.minimizer().action << "\n";
    return 0;
}

json gap_to_json(const LatticePtr& lattice, const Gap& g) {
    json j;
    j["y_minus"] = config_to_json(g.y_minus);
    j["y_plus"] = config_to_json(g.y_plus);
    j["width"] = g.width;
    j["l1_sum"] = gap_summability_check(g, lattice).sum;
    return j;
}

int cmd_aubry_mather(const Scenario& sc) {
    auto lattice = sc.lattice();
    auto pot = build_potential(sc, lattice);
    CriticalPoint min = minimize_action(pot, lattice, sc.multistart, sc.seed);
    AubryMatherSet am = orbit_closure(pot, min, lattice);
    auto gaps = detect_gaps(am);

    json j;
    json elements = json::array();
    for (const auto& e : am.elements) elements.push_back(config_to_json(e));
    j["elements"] = std::move(elements);
    json gj = json::array();
    for (const auto& g : gaps) gj.push_back(gap_to_json(lattice, g));
    j["gaps"] = std::move(gj);
    write_artifact(sc, "am_set.json", j);
    std::cout << "aubry-mather: " << am.elements.size() << " elements, " << gaps.size()
              << " gaps\n";
    return 0;
}

int cmd_gap_solution(const Scenario& sc) {
    auto lattice = sc.lattice();
    auto pot = build_potential(sc, lattice);
    CriticalPoint min = minimize_action(pot, lattice, sc.multistart, sc.seed);
    AubryMatherSet am = orbit_closure(pot, min, lattice);
    auto gaps = detect_gaps(am);
    AssembleOptions opts;
    opts.search.grid_per_dof = sc.grid_per_dof;
    json report = json::array();
    if (!gaps.empty()) {
        GhostCircle circle = assemble_ghost_circle(pot, lattice, opts);
        for (const auto& g : gaps) {
            json j = gap_to_json(lattice, g);
            auto res = gap_solution(pot, circle, g);
            if (res.foliated) {
                j["foliation_verdict"] = true;
            } else {
                json sol = critical_point_to_json(*res.solution);
                sol["W_gap"] = res.renormalized;
                j["solution"] = std::move(sol);
                j["foliation_verdict"] = false;
            }
            report.push_back(std::move(j));
        }
    }
    json top;
    top["gaps"] = std::move(report);
    write_artifact(sc, "gap_report.json", top);
    std::cout << "gap-solution: " << gaps.size() << " gaps processed\n";
    return 0;
}

int cmd_standard_map(const Scenario& sc, int steps) {
    auto lattice = sc.lattice();
    if (lattice->dim() != 1) throw ScenarioError("standard-map requires d = 1");
    auto pot = build_potential(sc, lattice);
    CriticalPoint min = minimize_action(pot, lattice, sc.multistart, sc.seed);
    const TrigSeries v = sc.onsite();
    TwistOrbit orbit = orbit_from_configuration(min.config, v, steps);

    std::string csv = "i,x_lift,x_mod1,y\n";
    for (size_t i = 0; i < orbit.x.size(); ++i) {
        const double xm = orbit.x[i] - std::floor(orbit.x[i]);
        csv += csv_row({static_cast<double>(i), orbit.x[i], xm, orbit.y[i]});
    }
    fs::create_directories(sc.out);
    write_text_file((fs::path(sc.out) / "orbit.csv").string(), csv);

    auto verdict = invariant_curve_verdict(v);
    json j;
    j["max_residual"] = orbit.max_residual;
    j["osc_v"] = verdict.osc_v;
    j["no_rotational_invariant_curves"] = verdict.none_exist;
    j["k_threshold"] = verdict.k_threshold;
    j["percival_bound"] = verdict.percival_bound;
    write_artifact(sc, "verdict.json", j);
    std::cout << "standard-map: " << orbit.x.size() << " points, max residual "
              << orbit.max_residual << "\n";
    return 0;
}

int cmd_ghost_limit(const Scenario& sc) {
    if (sc.convergents.empty()) throw ScenarioError("ghost-limit requires convergents");
    auto base_pot = fk_potential(FKSpec{1, sc.onsite()});
    std::vector<LatticePtr> lattices;
    for (auto [num, den] : sc.convergents)
        lattices.push_back(PeriodLattice::make(1, {den}, {-num}));
    std::vector<double> grid;
    for (int i = 0; i < 32; ++i) grid.push_back(i / 32.0);
    MorseApproxSpec spec{sc.morse_n > 0 ? sc.morse_n : 100, sc.morse_epsilon, sc.morse_seed,
                         sc.morse_degree};
    AssembleOptions opts;
    opts.search.grid_per_dof = sc.grid_per_dof;
    opts.search.max_seeds = 400;
    auto rep = ghost_circle_limit(base_pot, lattices, grid, {Index{0}}, spec, opts);

    json j;
    json stages = json::array();
    std::string csv = "xi";
    for (const auto& st : rep.stages) csv += "," + st.lattice_desc;
    csv += "\n";
    for (size_t g = 0; g < grid.size(); ++g) {
        std::vector<double> row{grid[g]};
        for (const auto& st : rep.stages)
            row.push_back(st.ok ? st.t_values[g] : std::numeric_limits<double>::quiet_NaN());
        csv += csv_row(row);
    }
    for (const auto& st : rep.stages) {
        json s;
        s["lattice"] = st.lattice_desc;
        s["ok"] = st.ok;
        if (!st.ok)
            s["error"] = st.error;
        else
            s["t_values"] = st.t_values;
        stages.push_back(std::move(s));
    }
    j["stages"] = std::move(stages);
    j["deltas"] = rep.deltas;
    j["achieved_delta"] = rep.achieved_delta;
    fs::create_directories(sc.out);
    write_text_file((fs::path(sc.out) / "tmap_stages.csv").string(), csv);
    write_artifact(sc, "ghost_limit.json", j);
    std::cout << "ghost-limit: deltas =";
    for (double d : rep.deltas) std::cout << " " << d;
    std::cout << " (achieved " << rep.achieved_delta << ")\n";
    return 0;
}

int cmd_verify(const Scenario& sc) {
    const bool quick = sc.quick;
    int passed = 0, failed = 0;
    auto check = [&](const std::string& name, bool ok) {
        (ok ? ++passed : ++failed);
        std::cout << (ok ? "  [pass] " : "  [FAIL] ") << name << "\n";
    };

    std::cout << "lattice suite\n";
    {
        auto lat = PeriodLattice::make(1, {3}, {-1});
        check("domain size = |det p|", lat->domain_size() == 3);
        check("rotation vector exact", lat->omega()[0] == Rational(1, 3));
        Configuration lin = Configuration::linear(lat, 0.4);
        check("linear configurations are Birkhoff", is_birkhoff(lin, 3).birkhoff);
        check("shift classes enumerate levels", enumerate_shift_classes(*lat).size() == 3);
    }

    std::cout << "potential suite\n";
    {
        auto lat = PeriodLattice::make(1, {2}, {-1});
        auto pot = fk_potential(FKSpec{1, TrigSeries::standard(1.0)});
        auto rep = verify_conditions(*pot, quick ? 400 : 4000, 3.0);
        check("conditions A-E on FK", rep.all_pass());
        check("uniform twist bound 1/(4d)", std::abs(rep.lambda_emp - 0.25) < 1e-12);
        ActionEvaluator ev(pot, lat);
        std::mt19937_64 rng(1);
        bool fd_ok = true, shift_ok = true;
        for (int trial = 0; trial < (quick ? 3 : 10); ++trial) {
            Configuration x = Configuration::linear(lat, 0.1 * trial);
            std::uniform_real_distribution<double> unif(-0.3, 0.3);
            for (Eigen::Index i = 0; i < x.values().size(); ++i) x.values()[i] += unif(rng);
            Eigen::VectorXd g;
            ev.gradient(x.values(), g);
            Eigen::VectorXd gfd(g.size());
            Eigen::VectorXd t = x.values();
            for (Eigen::Index i = 0; i < g.size(); ++i) {
                t[i] += 1e-5;
                const double fp = ev.value(t);
                t[i] -= 2e-5;
                const double fm = ev.value(t);
                t[i] = x.values()[i];
                gfd[i] = (fp - fm) / 2e-5;
            }
            if ((g - gfd).norm() > 1e-6 * std::max(1.0, gfd.norm())) fd_ok = false;
            if (std::abs(ev.value(x.shifted({1}, 2).values()) - ev.value(x.values())) > 1e-12)
                shift_ok = false;
        }
        check("analytic gradient matches finite differences", fd_ok);
        check("action is shift-invariant", shift_ok);
    }

    std::cout << "flow suite\n";
    {
        auto lat = PeriodLattice::make(1, {2}, {-1});
        auto pot = fk_potential(FKSpec{1, TrigSeries::standard(0.5)});
        std::mt19937_64 rng(2);
        const int pairs = quick ? 5 : 25;
        bool cmp_ok = true, harnack_ok = true, energy_ok = true;
        for (int trial = 0; trial < pairs; ++trial) {
            std::uniform_real_distribution<double> unif(0.05, 0.6);
            Configuration x = Configuration::linear(lat, 0.1 + 0.02 * trial);
            Configuration y = x.plus(unif(rng));
            if (!comparison_check(pot, x, y, 1.0).ordered) cmp_ok = false;
            auto h = parabolic_harnack_check(pot, x, y, 1.0, Index{1}, Index{0});
            if (!h.verdict) harnack_ok = false;
            if (lyapunov_check(pot, x, 1.0) > 1e-6) energy_ok = false;
        }
        check("comparison principle", cmp_ok);
        check("parabolic Harnack with empirical constants", harnack_ok);
        check("energy identity <= 1e-6", energy_ok);
    }

    std::cout << "minimizer suite\n";
    {
        auto one = PeriodLattice::make(1, {1}, {0});
        auto pot = fk_potential(FKSpec{1, TrigSeries::standard(1.0)});
        CriticalPoint min = minimize_action(pot, one, quick ? 4 : 8, 1);
        check("scalar minimizer at 1/2", std::abs(min.config.values()[0] - 0.5) < 1e-9);
        check("scalar minimum W = -1/(8 pi^2)",
              std::abs(min.action + 1.0 / (8 * M_PI * M_PI)) < 1e-12);
        check("minimizer verified global",
              verify_global_minimizer(pot, min, 2, quick ? 6 : 16, 3).verdict);
    }

    std::cout << "ghost-circle suite\n";
    {
        auto one = PeriodLattice::make(1, {1}, {0});
        auto pot = fk_potential(FKSpec{1, TrigSeries::standard(1.0)});
        GhostCircle circle = assemble_ghost_circle(pot, one, {});
        check("skeleton alternates minimizer/saddle", circle.entries().size() == 2);
        bool ordered = true;
        for (double a = 0.55; a < 1.4; a += 0.1)
            if (compare(circle.evaluate(a), circle.evaluate(a + 0.05)) != Order::LessLess)
                ordered = false;
        check("circle strictly ordered", ordered);
        check("circle contains the minimizer",
              std::abs(circle.minimizer().config.values()[0] - 0.5) < 1e-9);
    }

    std::cout << "aubry-mather suite\n";
    {
        auto one = PeriodLattice::make(1, {1}, {0});
        auto pot = fk_potential(FKSpec{1, TrigSeries::standard(1.0)});
        AubryMatherSet am = orbit_closure(pot, minimize_action(pot, one, 4, 1), one);
        auto gaps = detect_gaps(am);
        check("scalar chain has one gap per period", gaps.size() == 1);
        if (!gaps.empty()) {
            check("gap l1 sum <= 1", gap_summability_check(gaps[0], one).verdict);
            GhostCircle circle = assemble_ghost_circle(pot, one, {});
            auto sol = gap_solution(pot, circle, gaps[0]);
            check("gap carries a non-minimizing stationary point",
                  !sol.foliated && sol.solution.has_value() && !sol.minimality.verdict);
        }
    }

    std::cout << "twist-map suite\n";
    {
        TrigSeries v = TrigSeries::standard(0.9);
        auto lat3 = PeriodLattice::make(1, {3}, {-1});
        auto pot = fk_potential(FKSpec{1, v});
        CriticalPoint min = minimize_action(pot, lat3, quick ? 4 : 10, 7);
        TwistOrbit orbit = orbit_from_configuration(min.config, v, 3);
        check("stationary configuration converts with residual <= 1e-9",
              orbit.max_residual <= 1e-9);
        Eigen::Matrix2d J = standard_map_fd_jacobian(v, 0.3, 0.2);
        check("area preservation", std::abs(J.determinant() - 1.0) <= 1e-12);
        check("oscillation threshold metadata",
              std::abs(invariant_curve_verdict(v).k_threshold - 8 * M_PI * M_PI) < 1e-9);
    }

    std::cout << "verify: " << passed << " passed, " << failed << " failed\n";
    return failed == 0 ? 0 : 1;
}

std::vector<long long> split_ints(const std::string& v) {
    std::vector<long long> out;
    std::string tok;
    for (char c : v + ",") {
        if (c == ',' || c == ';') {
            if (!tok.empty()) out.push_back(std::stoll(tok));
            tok.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            tok += c;
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("AUBRYKIT_THREADS")) {
        const int n = std::atoi(threads);
        if (n > 0) omp_set_num_threads(n);
    }

    CLI::App app{"aubrykit: minimizers, ghost circles and gap solutions of variational monotone "
                 "lattice recurrence relations"};
    app.require_subcommand(1);

    std::string scenario_path, p_text, q_text, conv_text;
    int steps = 100;
    Scenario sc;
    sc.out = "aubrykit_out";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", scenario_path, "scenario file (key = value lines)");
        cmd->add_option("--potential", sc.potential, "potential kind");
        cmd->add_option("--d", sc.d, "lattice dimension");
        cmd->add_option("--k", sc.k, "standard onsite strength V = (k/8pi^2) cos(2 pi x)");
        cmd->add_option("--p", p_text, "period matrix, comma/semicolon separated");
        cmd->add_option("--q", q_text, "period integers q, comma separated");
        cmd->add_option("--omega", sc.omega, "target rotation vector (metadata)");
        cmd->add_option("--convergents", conv_text, "rational convergents num/den, comma separated");
        cmd->add_option("--seed", sc.seed, "random seed");
        cmd->add_option("--out", sc.out, "output directory");
        cmd->add_option("--t", sc.t, "flow time");
        cmd->add_option("--tol", sc.tol, "tolerance");
        cmd->add_flag("--quick", sc.quick, "reduced budgets");
        cmd->add_option("--multistart", sc.multistart, "minimization starts");
        cmd->add_option("--grid-per-dof", sc.grid_per_dof, "critical-point seed grid");
        cmd->add_option("--morse-n", sc.morse_n, "Morse monotonization strength (0 = off)");
        cmd->add_option("--morse-epsilon", sc.morse_epsilon, "Morse onsite amplitude");
        cmd->add_option("--morse-seed", sc.morse_seed, "Morse perturbation seed");
        return cmd;
    };

    auto* c_min = add_common(app.add_subcommand("minimize", "find the p,q-minimizer"));
    auto* c_cp = add_common(app.add_subcommand("critical-points", "catalog critical points"));
    auto* c_flow = add_common(app.add_subcommand("flow", "integrate the negative gradient flow"));
    auto* c_gc = add_common(app.add_subcommand("ghost-circle", "assemble a periodic ghost circle"));
    auto* c_am = add_common(app.add_subcommand("aubry-mather", "Aubry-Mather set and gaps"));
    auto* c_gap = add_common(app.add_subcommand("gap-solution", "non-minimizing gap solutions"));
    auto* c_map = add_common(app.add_subcommand("standard-map", "twist-map correspondence"));
    c_map->add_option("--steps", steps, "orbit length");
    auto* c_ver = add_common(app.add_subcommand("verify", "run the built-in invariant suites"));
    auto* c_lim =
        add_common(app.add_subcommand("ghost-limit", "convergent ghost-circle diagnostic"));

    CLI11_PARSE(app, argc, argv);

    try {
        if (!scenario_path.empty()) {
            Scenario from_file = Scenario::load(scenario_path);
            if (from_file.out.empty()) from_file.out = sc.out;
            if (sc.out != "aubrykit_out") from_file.out = sc.out;
            if (!p_text.empty()) from_file.p = split_ints(p_text);
            if (!q_text.empty()) from_file.q = split_ints(q_text);
            if (sc.k != 0.0) from_file.k = sc.k;
            if (sc.seed != 1) from_file.seed = sc.seed;
            if (sc.morse_n != 0) from_file.morse_n = sc.morse_n;
            if (sc.quick) from_file.quick = true;
            sc = from_file;
        } else {
            if (!p_text.empty()) sc.p = split_ints(p_text);
            if (!q_text.empty()) sc.q = split_ints(q_text);
            if (!conv_text.empty()) {
                std::istringstream ss(conv_text);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    long long num = 0, den = 1;
                    if (std::sscanf(tok.c_str(), "%lld/%lld", &num, &den) == 2 && den != 0)
                        sc.convergents.emplace_back(num, den);
                }
            }
            std::ostringstream canon;
            canon << "potential=" << sc.potential << "\nd=" << sc.d << "\nk=" << sc.k << "\n";
            for (auto v : sc.p) canon << "p=" << v << "\n";
            for (auto v : sc.q) canon << "q=" << v << "\n";
            canon << "seed=" << sc.seed << "\n";
            sc.canonical_text = canon.str();
        }

        if (c_min->parsed()) return cmd_minimize(sc);
        if (c_cp->parsed()) return cmd_critical_points(sc);
        if (c_flow->parsed()) return cmd_flow(sc);
        if (c_gc->parsed()) return cmd_ghost_circle(sc);
        if (c_am->parsed()) return cmd_aubry_mather(sc);
        if (c_gap->parsed()) return cmd_gap_solution(sc);
        if (c_map->parsed()) return cmd_standard_map(sc, steps);
        if (c_ver->parsed()) return cmd_verify(sc);
        if (c_lim->parsed()) return cmd_ghost_limit(sc);
        return 2;
    } catch (const ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        try {
            fs::create_directories(sc.out);
            write_text_file((fs::path(sc.out) / "error.txt").string(),
                            std::string("numerical failure: ") + e.what() + "\n");
        } catch (...) {
        }
        return 3;
    }
}
