#include "deltahjb/experiment.hpp"

#include "deltahjb/csv.hpp"
#include "deltahjb/errors.hpp"
#include "deltahjb/oracle.hpp"
#include "deltahjb/stopping.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

namespace deltahjb {

using nlohmann::json;

std::string to_string(Problem p) {
    switch (p) {
    case Problem::HestonInvestment: return "heston_investment";
    case Problem::ReinsuranceHeston: return "reinsurance_heston";
    case Problem::ReinsuranceRough: return "reinsurance_rough";
    case Problem::SlvStopping: return "slv_stopping";
    }
    return "unknown";
}

Problem parse_problem(const std::string& name) {
    for (auto p : {Problem::HestonInvestment, Problem::ReinsuranceHeston, Problem::ReinsuranceRough,
                   Problem::SlvStopping})
        if (to_string(p) == name) return p;
    throw InputError("config: unknown problem '" + name + "'");
}

std::vector<std::pair<double, double>> ExperimentConfig::report_window() const {
    if (!window.empty()) return window;
    std::vector<std::pair<double, double>> out;
    for (const auto& m : solver.box.maps()) out.emplace_back(m.lo(), m.hi());
    return out;
}

namespace {

const json& require(const json& j, const std::string& block, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw InputError("config: missing required field '" + (block.empty() ? "" : block + ".") + key + "'");
    return j.at(key);
}

double req_num(const json& j, const std::string& block, const char* key) {
    const auto& v = require(j, block, key);
    if (!v.is_number()) throw InputError("config: field '" + block + "." + key + "' must be a number");
    return v.get<double>();
}

template <class T>
T opt(const json& j, const char* key, T def) {
    return j.is_object() && j.contains(key) ? j.at(key).get<T>() : def;
}

std::vector<std::pair<double, double>> parse_intervals(const json& j, const std::string& name) {
    std::vector<std::pair<double, double>> out;
    if (!j.is_array()) throw InputError("config: '" + name + "' must be a list of [lo, hi] pairs");
    for (const auto& iv : j) {
        if (!iv.is_array() || iv.size() != 2) throw InputError("config: '" + name + "' entries must be [lo, hi]");
        out.emplace_back(iv[0].get<double>(), iv[1].get<double>());
    }
    return out;
}

json intervals_json(const std::vector<std::pair<double, double>>& v) {
    json a = json::array();
    for (const auto& [lo, hi] : v) a.push_back({lo, hi});
    return a;
}

HestonParams parse_heston(const json& j) {
    const json& h = require(j, "", "heston");
    HestonParams p;
    p.r = opt(h, "r", p.r);
    p.lambda = req_num(h, "heston", "lambda");
    p.kappa = req_num(h, "heston", "kappa");
    p.theta = req_num(h, "heston", "theta");
    p.sigma = req_num(h, "heston", "sigma");
    p.rho = req_num(h, "heston", "rho");
    p.v0 = req_num(h, "heston", "v0");
    p.validate();
    return p;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig c;
    c.problem = parse_problem(require(j, "", "problem").get<std::string>());

    const json& u = require(j, "", "utility");
    c.utility.p = req_num(u, "utility", "p");
    c.utility.L = opt(u, "L", 0.0);
    if (!(c.utility.p > 0 && c.utility.p < 1)) throw InputError("config: utility.p must lie in (0, 1)");

    if (c.problem != Problem::SlvStopping) c.heston = parse_heston(j);
    if (c.problem == Problem::ReinsuranceHeston || c.problem == Problem::ReinsuranceRough) {
        const json& r = require(j, "", "reinsurance");
        ReinsuranceParams q;
        q.c = req_num(r, "reinsurance", "c");
        q.b = req_num(r, "reinsurance", "b");
        q.eta = req_num(r, "reinsurance", "eta");
        q.vartheta = req_num(r, "reinsurance", "vartheta");
        q.r = req_num(r, "reinsurance", "r");
        q.L = opt(r, "L", 0.0);
        q.validate();
        c.reinsurance = q;
    }
    if (c.problem == Problem::ReinsuranceRough) {
        const json& r = require(j, "", "rough");
        RoughSpec s;
        s.alpha = req_num(r, "rough", "alpha");
        s.weights = opt(r, "weights", std::vector<double>{});
        s.rates = opt(r, "rates", std::vector<double>{});
        if (s.weights.empty()) {
            s.factors = static_cast<int>(req_num(r, "rough", "factors"));
            s.gamma_max = req_num(r, "rough", "gamma_max");
        } else {
            s.factors = static_cast<int>(s.weights.size());
        }
        c.rough = s;
    }
    if (c.problem == Problem::SlvStopping) {
        const json& s = require(j, "", "slv");
        SlvSpec spec;
        spec.preset = require(s, "slv", "preset").get<std::string>();
        auto& p = spec.params;
        p.gamma = req_num(s, "slv", "gamma");
        p.L = req_num(s, "slv", "L");
        p.rho = req_num(s, "slv", "rho");
        p.r = req_num(s, "slv", "r");
        if (spec.preset == "sabr") {
            p.beta_exp = req_num(s, "slv", "beta_exp");
            p.sigma_v = req_num(s, "slv", "sigma_v");
        } else {
            p.lambda = req_num(s, "slv", "lambda");
            p.kappa = req_num(s, "slv", "kappa");
            p.theta = req_num(s, "slv", "theta");
            p.sigma = req_num(s, "slv", "sigma");
            if (spec.preset == "four_two" || spec.preset == "alpha_hyper") p.a = req_num(s, "slv", "a");
            if (spec.preset == "four_two") p.b = req_num(s, "slv", "b");
        }
        p.lambda = opt(s, "lambda", p.lambda);
        p.kappa = opt(s, "kappa", p.kappa);
        p.theta = opt(s, "theta", p.theta);
        p.sigma = opt(s, "sigma", p.sigma);
        p.a = opt(s, "a", p.a);
        p.b = opt(s, "b", p.b);
        p.beta_exp = opt(s, "beta_exp", p.beta_exp);
        p.sigma_v = opt(s, "sigma_v", p.sigma_v);
        spec.s_ref = opt(s, "s_ref", spec.s_ref);
        slv_preset(spec.preset, p);  // rejects unknown presets early
        if (c.utility.L != p.L) throw InputError("config: utility.L must equal slv.L");
        c.slv = spec;
    }

    const json& s = require(j, "", "solver");
    c.solver.N = static_cast<int>(req_num(s, "solver", "N"));
    c.solver.T = req_num(s, "solver", "T");
    c.solver.orders = require(s, "solver", "orders").get<std::vector<int>>();
    c.solver.quad_nodes = opt(s, "quad_nodes", 40);
    c.solver.denom_floor = opt(s, "denom_floor", 1e-10);
    if (s.contains("window")) c.window = parse_intervals(s.at("window"), "solver.window");
    if (s.contains("box")) {
        c.box = parse_intervals(s.at("box"), "solver.box");
    } else if (!c.window.empty()) {
        for (const auto& [a, b] : c.window) c.box.push_back(extend_window(a, b));
    } else {
        throw InputError("config: missing required field 'solver.box' (or 'solver.window')");
    }
    std::vector<AffineMap> maps;
    for (const auto& [lo, hi] : c.box) maps.emplace_back(lo, hi);
    c.solver.box = DomainBox(std::move(maps));
    const bool box_given = s.contains("box");
    if (!box_given) c.box.clear();

    if (j.contains("table1")) c.table1_orders = opt(j.at("table1"), "orders", c.table1_orders);
    if (j.contains("report")) c.surface_points = opt(j.at("report"), "surface_points", c.surface_points);
    if (j.contains("stopping")) {
        const json& st = j.at("stopping");
        c.retain_every = opt(st, "retain_every", c.retain_every);
        c.psi_without_h = opt(st, "psi_without_h", c.psi_without_h);
        c.stop_fraction = opt(st, "stop_fraction", c.stop_fraction);
        c.boundary_points = opt(st, "boundary_points", c.boundary_points);
    }
    if (j.contains("simulate")) {
        const json& sm = j.at("simulate");
        c.initial_wealth = opt(sm, "initial_wealth", c.initial_wealth);
        c.initial_factors = opt(sm, "initial_factors", c.initial_factors);
        c.sim_steps = opt(sm, "steps", c.sim_steps);
        c.sim_paths = opt(sm, "paths", c.sim_paths);
        c.mc_paths = opt(sm, "mc_paths", c.mc_paths);
        c.mc_steps = opt(sm, "mc_steps", c.mc_steps);
    }
    if (j.contains("oracle")) c.closed_form_oracle = opt(j.at("oracle"), "closed_form", c.closed_form_oracle);
    c.output = opt(j, "output", c.output);
    c.seed = opt(j, "seed", c.seed);

    if (c.surface_points < 2 || c.boundary_points < 1) throw InputError("config: report grids need at least 2 points");
    const auto gen = build_generator(c);
    c.solver.validate(gen.dim);
    if (!c.window.empty() && static_cast<int>(c.window.size()) != gen.dim)
        throw InputError("config: solver.window needs one interval per dimension");
    if (c.problem == Problem::ReinsuranceRough && !c.initial_factors.empty() &&
        static_cast<int>(c.initial_factors.size()) != gen.dim - 1)
        throw InputError("config: simulate.initial_factors needs one entry per factor");
    return c;
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["problem"] = to_string(c.problem);
    j["utility"] = {{"p", c.utility.p}, {"L", c.utility.L}};
    if (c.problem != Problem::SlvStopping) {
        const auto& h = c.heston;
        j["heston"] = {{"r", h.r},         {"lambda", h.lambda}, {"kappa", h.kappa}, {"theta", h.theta},
                       {"sigma", h.sigma}, {"rho", h.rho},       {"v0", h.v0}};
    }
    if (c.reinsurance) {
        const auto& q = *c.reinsurance;
        j["reinsurance"] = {{"c", q.c}, {"b", q.b}, {"eta", q.eta}, {"vartheta", q.vartheta}, {"r", q.r}, {"L", q.L}};
    }
    if (c.rough) {
        const auto& r = *c.rough;
        j["rough"] = {{"alpha", r.alpha}};
        if (r.weights.empty()) {
            j["rough"]["factors"] = r.factors;
            j["rough"]["gamma_max"] = r.gamma_max;
        } else {
            j["rough"]["weights"] = r.weights;
            j["rough"]["rates"] = r.rates;
        }
    }
    if (c.slv) {
        const auto& p = c.slv->params;
        j["slv"] = {{"preset", c.slv->preset}, {"r", p.r},         {"lambda", p.lambda},     {"kappa", p.kappa},
                    {"theta", p.theta},        {"sigma", p.sigma}, {"rho", p.rho},           {"a", p.a},
                    {"b", p.b},                {"beta_exp", p.beta_exp}, {"sigma_v", p.sigma_v}, {"gamma", p.gamma},
                    {"L", p.L},                {"s_ref", c.slv->s_ref}};
    }
    json s = {{"N", c.solver.N},
              {"T", c.solver.T},
              {"orders", c.solver.orders},
              {"quad_nodes", c.solver.quad_nodes},
              {"denom_floor", c.solver.denom_floor}};
    if (!c.box.empty()) s["box"] = intervals_json(c.box);
    if (!c.window.empty()) s["window"] = intervals_json(c.window);
    j["solver"] = s;
    j["table1"] = {{"orders", c.table1_orders}};
    j["report"] = {{"surface_points", c.surface_points}};
    j["stopping"] = {{"retain_every", c.retain_every},
                     {"psi_without_h", c.psi_without_h},
                     {"stop_fraction", c.stop_fraction},
                     {"boundary_points", c.boundary_points}};
    j["simulate"] = {{"initial_wealth", c.initial_wealth}, {"initial_factors", c.initial_factors},
                     {"steps", c.sim_steps},               {"paths", c.sim_paths},
                     {"mc_paths", c.mc_paths},             {"mc_steps", c.mc_steps}};
    j["oracle"] = {{"closed_form", c.closed_form_oracle}};
    j["output"] = c.output;
    j["seed"] = c.seed;
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw InputError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

RoughKernelApprox build_kernel(const ExperimentConfig& cfg) {
    if (!cfg.rough) throw InputError("config has no rough block");
    const auto& r = *cfg.rough;
    if (r.weights.empty()) return kernel_nodes(r.alpha, r.factors, r.gamma_max, cfg.heston);
    RoughKernelApprox k;
    k.alpha = r.alpha;
    k.weights = r.weights;
    k.rates = r.rates;
    k.heston = cfg.heston;
    k.validate();
    return k;
}

ControlledGenerator build_generator(const ExperimentConfig& cfg) {
    switch (cfg.problem) {
    case Problem::HestonInvestment: return heston_investment_generator(cfg.heston);
    case Problem::ReinsuranceHeston: return reinsurance_heston_generator(cfg.heston, *cfg.reinsurance);
    case Problem::ReinsuranceRough: return rough_multifactor_generator(build_kernel(cfg), cfg.reinsurance);
    case Problem::SlvStopping: return slv_generator(slv_preset(cfg.slv->preset, cfg.slv->params));
    }
    throw InputError("unsupported problem");
}

double converted_initial_wealth(const ExperimentConfig& cfg) {
    if (!cfg.reinsurance) return cfg.initial_wealth;
    return cfg.initial_wealth + wealth_shift(*cfg.reinsurance, cfg.solver.T, 0.0);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

// Index of the second surface axis: v for the SLV state (x, s, v), else coordinate 1.
int surface_axis(const ExperimentConfig& cfg) { return cfg.problem == Problem::SlvStopping ? 2 : 1; }

std::vector<double> probe_state(const ExperimentConfig& cfg, double x, double second) {
    const int d = cfg.solver.box.dim();
    std::vector<double> st(d, 0.0);
    for (int j = 1; j < d; ++j) {
        if (cfg.problem == Problem::SlvStopping && j == 1) st[j] = cfg.slv->s_ref;
        else if (j - 1 < static_cast<int>(cfg.initial_factors.size())) st[j] = cfg.initial_factors[j - 1];
    }
    st[0] = x;
    st[surface_axis(cfg)] = second;
    cfg.solver.box.clamp(st);
    return st;
}

StateFunction terminal_of(const ExperimentConfig& cfg) {
    const PowerUtility u = cfg.utility;
    return [u](std::span<const double> s) { return u(s[0]); };
}

void write_manifest(const std::filesystem::path& out, const json& body) {
    std::ofstream f(out / "manifest.json");
    f << body.dump(2) << '\n';
    if (!f) throw std::runtime_error("failed to write manifest.json");
}

json base_manifest(const ExperimentConfig& cfg, const std::string& command) {
    json m;
    m["command"] = command;
    m["config"] = to_json(cfg);
    json box = json::array();
    for (const auto& mp : cfg.solver.box.maps()) box.push_back({mp.lo(), mp.hi()});
    m["box"] = box;
    return m;
}

void write_surfaces(const ExperimentConfig& cfg, const ValueSolution& sol, const std::filesystem::path& out) {
    const auto win = cfg.report_window();
    const int ax = surface_axis(cfg);
    const auto xs = linspace(win[0].first, win[0].second, cfg.surface_points);
    const auto vs = linspace(win[ax].first, win[ax].second, cfg.surface_points);
    std::ofstream vf(out / "value_surface.csv"), sf(out / "strategy.csv");
    vf << "x,v,value\n";
    sf << "x,v,pi,q\n";
    for (double x : xs)
        for (double v : vs) {
            const auto st = probe_state(cfg, x, v);
            const Controls u = strategy_at(sol, 0, st);
            vf << csv::num(x) << ',' << csv::num(v) << ',' << csv::num(value_at(sol, 0, st)) << '\n';
            sf << csv::num(x) << ',' << csv::num(v) << ',' << csv::num(u[kPi]) << ',' << csv::num(u[kQ]) << '\n';
        }
}

PathModel path_model(const ExperimentConfig& cfg) {
    PathModel m;
    m.heston = cfg.heston;
    m.utility = cfg.utility;
    switch (cfg.problem) {
    case Problem::HestonInvestment: m.kind = PathModelKind::HestonInvestment; break;
    case Problem::ReinsuranceHeston:
        m.kind = PathModelKind::ReinsuranceHeston;
        m.reinsurance = *cfg.reinsurance;
        break;
    case Problem::ReinsuranceRough:
        m.kind = PathModelKind::ReinsuranceRough;
        m.reinsurance = *cfg.reinsurance;
        m.rough = build_kernel(cfg);
        break;
    case Problem::SlvStopping: throw InputError("path simulation is not available for the stopping problem");
    }
    return m;
}

std::vector<double> initial_state(const ExperimentConfig& cfg, const PathModel& m) {
    std::vector<double> init{converted_initial_wealth(cfg)};
    if (m.kind == PathModelKind::ReinsuranceRough) {
        for (int i = 0; i < m.rough.factors(); ++i)
            init.push_back(i < static_cast<int>(cfg.initial_factors.size()) ? cfg.initial_factors[i] : 0.0);
    } else {
        init.push_back(cfg.heston.v0);
    }
    return init;
}

}  // namespace

std::pair<double, double> oracle_errors(const ValueSolution& sol, double p, const HestonParams& params,
                                        const std::vector<std::pair<double, double>>& window, int points) {
    const RiccatiSolution oracle(p, params, sol.config.T);
    const auto xs = linspace(window[0].first, window[0].second, points);
    const auto vs = linspace(window[1].first, window[1].second, points);
    const double pi_star = oracle.strategy(0.0);
    double ve = 0.0, se = 0.0;
    for (double x : xs)
        for (double v : vs) {
            const double st[2] = {x, v};
            ve = std::max(ve, std::abs(value_at(sol, 0, st) - oracle.value(0.0, x, v)));
            se = std::max(se, std::abs(strategy_at(sol, 0, st)[kPi] - pi_star));
        }
    return {ve, se};
}

std::vector<Table1Row> table1(const ExperimentConfig& cfg) {
    if (cfg.problem != Problem::HestonInvestment || !cfg.closed_form_oracle || cfg.utility.L != 0.0)
        throw InputError("table1 needs the heston_investment problem with the closed-form oracle and L = 0");
    const auto gen = build_generator(cfg);
    std::vector<Table1Row> rows;
    for (int M : cfg.table1_orders) {
        SolverConfig sc = cfg.solver;
        sc.orders.assign(gen.dim, M);
        const auto t0 = Clock::now();
        Table1Row row{M, true, 0.0, 0.0, 0.0};
        try {
            const auto sol = solve(gen, terminal_of(cfg), sc);
            std::tie(row.value_err, row.strategy_err) =
                oracle_errors(sol, cfg.utility.p, cfg.heston, cfg.report_window(), cfg.surface_points);
        } catch (const OracleUnavailable& e) {
            spdlog::warn("M={}: oracle unavailable ({}; blow-up at t={})", M, e.what(), e.blowup_time());
            row.available = false;
        }
        row.seconds = seconds_since(t0);
        spdlog::info("M={} value_err={:.3e} strategy_err={:.3e} ({:.1f}s)", M, row.value_err, row.strategy_err,
                     row.seconds);
        rows.push_back(row);
    }
    return rows;
}

int run_solve(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    const auto t0 = Clock::now();
    const auto sol = solve(build_generator(cfg), terminal_of(cfg), cfg.solver);
    write_surfaces(cfg, sol, out);
    {
        std::ofstream tf(out / "tensor_t0.csv");
        write_tensor_csv(tf, sol.tensors[0]);
    }
    json m = base_manifest(cfg, "solve");
    m["wall_seconds"] = seconds_since(t0);
    m["diagnostics"] = {{"endpoint_fallbacks", sol.diagnostics.fallback}, {"flat_objectives", sol.diagnostics.flat}};
    if (cfg.reinsurance) m["converted_initial_wealth"] = converted_initial_wealth(cfg);
    if (cfg.problem == Problem::HestonInvestment && cfg.closed_form_oracle && cfg.utility.L == 0.0) {
        try {
            const auto [ve, se] = oracle_errors(sol, cfg.utility.p, cfg.heston, cfg.report_window(), cfg.surface_points);
            m["oracle"] = {{"max_value_error", ve}, {"max_strategy_error", se}};
        } catch (const OracleUnavailable& e) {
            m["oracle"] = {{"unavailable", e.what()}, {"blowup_time", e.blowup_time()}};
        }
    }
    write_manifest(out, m);
    return 0;
}

int run_table1(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    const auto t0 = Clock::now();
    const auto rows = table1(cfg);
    std::ofstream f(out / "table1.csv");
    // Timings go to the manifest only, so the CSV stays reproducible across runs.
    f << "M,value_err,strategy_err\n";
    json timings = json::object();
    for (const auto& r : rows) {
        f << r.M << ',';
        if (r.available) f << csv::num(r.value_err) << ',' << csv::num(r.strategy_err);
        else f << "unavailable,unavailable";
        f << '\n';
        timings[std::to_string(r.M)] = r.seconds;
    }
    json m = base_manifest(cfg, "table1");
    m["seconds_per_order"] = timings;
    m["wall_seconds"] = seconds_since(t0);
    write_manifest(out, m);
    return 0;
}

int run_stopping(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    if (cfg.problem != Problem::SlvStopping) throw InputError("stopping needs the slv_stopping problem");
    std::filesystem::create_directories(out);
    const auto t0 = Clock::now();
    StoppingConfig sc;
    sc.solver = cfg.solver;
    sc.retain_every = cfg.retain_every;
    sc.psi_without_h = cfg.psi_without_h;
    sc.stop_fraction = cfg.stop_fraction;
    const auto model = slv_preset(cfg.slv->preset, cfg.slv->params);
    const auto sol = solve_stopping(model, cfg.utility, sc);

    const auto& s0 = sol.state_at(0);
    const auto& box = cfg.solver.box;
    const auto sg = linspace(box[1].lo(), box[1].hi(), cfg.boundary_points);
    const auto vg = linspace(box[2].lo(), box[2].hi(), cfg.boundary_points);
    const auto boundary = exercise_boundary(s0.psi, 0, sg, vg, sol.stop_threshold(s0));
    {
        std::ofstream bf(out / "boundary.csv");
        write_boundary_csv(bf, boundary);
    }
    {
        const auto win = cfg.report_window();
        const auto xs = linspace(win[0].first, win[0].second, cfg.surface_points);
        const auto vs = linspace(win[2].first, win[2].second, cfg.surface_points);
        std::ofstream vf(out / "value_surface.csv");
        vf << "x,s,v,value,psi\n";
        for (double x : xs)
            for (double v : vs) {
                const auto st = probe_state(cfg, x, v);
                vf << csv::num(st[0]) << ',' << csv::num(st[1]) << ',' << csv::num(st[2]) << ','
                   << csv::num(reconstruct(s0.V, st)) << ',' << csv::num(reconstruct(s0.psi, st)) << '\n';
            }
    }
    long long present = 0;
    for (const auto& b : boundary) present += b.present;
    json m = base_manifest(cfg, "stopping");
    m["wall_seconds"] = seconds_since(t0);
    m["complementarity"] = {{"min_psi", sol.worst.min_psi},
                            {"max_gap_shortfall", sol.worst.max_gap_shortfall},
                            {"max_product", sol.worst.max_product}};
    m["boundary_points_present"] = present;
    m["boundary_points_total"] = boundary.size();
    m["diagnostics"] = {{"endpoint_fallbacks", sol.diagnostics.fallback}, {"flat_objectives", sol.diagnostics.flat}};
    write_manifest(out, m);
    return 0;
}

int run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    const auto t0 = Clock::now();
    const auto model = path_model(cfg);
    const auto sol = solve(build_generator(cfg), terminal_of(cfg), cfg.solver);
    const auto field = strategy_field(sol);
    const auto init = initial_state(cfg, model);
    const auto paths = simulate_paths(model, field, init, cfg.solver.T, cfg.sim_steps, cfg.seed, cfg.sim_paths);
    {
        std::ofstream pf(out / "paths.csv");
        write_paths_csv(pf, paths);
    }
    json m = base_manifest(cfg, "simulate");
    m["converted_initial_wealth"] = init[0];
    m["initial_state"] = init;
    if (cfg.mc_paths > 0) {
        const auto est = mc_policy_eval(model, field, init, cfg.solver.T, cfg.mc_steps, cfg.mc_paths, cfg.seed);
        std::vector<double> probe = init;
        cfg.solver.box.clamp(probe);
        m["monte_carlo"] = {{"mean", est.mean},         {"std_error", est.std_error},
                            {"paths", est.paths},       {"seed", est.seed},
                            {"clamped_evaluations", est.clamped},
                            {"solver_value", value_at(sol, 0, probe)}};
    }
    m["wall_seconds"] = seconds_since(t0);
    write_manifest(out, m);
    return 0;
}

}  // namespace deltahjb
