#include "rwlt/commands.hpp"

#include "rwlt/analysis.hpp"
#include "rwlt/error.hpp"
#include "rwlt/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace rwlt {
namespace {

struct RunConfig {
    std::string command;

    std::optional<double> q;
    std::optional<int> L;
    std::vector<double> p;
    std::string params_file;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::string out = "-";
    std::string format = "csv";

    // verify / simulate excursions
    std::uint64_t excursions = 100'000;
    std::uint64_t cap = kDefaultExcursionCap;
    std::optional<std::uint64_t> offspring_draws;
    bool keep_paths = false;
    std::uint64_t dump_excursions = 10;

    // converge / compare
    std::vector<double> xs;
    std::vector<double> lambdas;
    std::vector<std::uint64_t> Ns;
    double threshold = 1e-2;
    std::uint64_t N = 1000;
    std::uint64_t runs = 10'000;
    std::uint64_t limit_samples = 10'000;
    double alpha = 0.01;
    std::vector<std::string> queries;

    // moments
    std::vector<std::uint64_t> schedule;
    std::uint64_t replicates = 4'000'000;
    std::uint64_t population_cap = kDefaultPopulationCap;
    double tolerance = 0.1;

    // simulate
    std::string what = "excursions";
    std::uint64_t paths = 10;
    std::vector<double> grid;
    std::uint64_t generation = 2;
    int start = 1;
    double mass_target = kDefaultMassTarget;
};

std::string join(const std::vector<std::string>& parts) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
    return s;
}

template <class T>
std::string join_values(const std::vector<T>& v) {
    std::vector<std::string> parts;
    for (const auto& x : v) parts.push_back(format_cell(Cell{x}));
    return join(parts);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open params file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::InvalidArgument, path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

bool is_param_key(const std::string& key) {
    if (key == "q" || key == "L" || key == "p") return true;
    return key.size() > 1 && key[0] == 'p' &&
           std::all_of(key.begin() + 1, key.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool has_flag(const std::vector<std::string>& args, const std::string& name) {
    const std::string flag = "--" + name;
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

std::optional<std::string> find_flag_value(const std::vector<std::string>& args, const std::string& name) {
    const std::string flag = "--" + name;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == flag && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind(flag + "=", 0) == 0) return args[i].substr(flag.size() + 1);
    }
    return std::nullopt;
}

// Flags from a params file become command-line flags unless given explicitly.
// Model keys are handled separately so that a --q on the command line
// replaces the whole parameter set from the file.
void merge_params_file(std::vector<std::string>& args, std::map<std::string, std::string>& file_params) {
    auto path = find_flag_value(args, "params-file");
    if (!path || args.empty()) return;
    std::vector<std::string> extra;
    for (const auto& [key, value] : read_key_values(*path)) {
        if (is_param_key(key)) {
            file_params[key] = value;
        } else if (!has_flag(args, key)) {
            extra.push_back("--" + key);
            if (value != "true") extra.push_back(value);
        }
    }
    args.insert(args.begin() + 1, extra.begin(), extra.end());
}

ModelParams resolve_params(const RunConfig& cfg, const std::map<std::string, std::string>& file_params) {
    std::map<std::string, std::string> kv;
    if (cfg.q || cfg.L || !cfg.p.empty()) {
        if (!cfg.q) throw Error(ErrorKind::InvalidArgument, "--q is required together with --L/--p");
        kv["q"] = format_double(*cfg.q);
        if (cfg.L) kv["L"] = std::to_string(*cfg.L);
        if (!cfg.p.empty() && !cfg.L) kv["L"] = std::to_string(cfg.p.size());
        for (std::size_t i = 0; i < cfg.p.size(); ++i) kv["p" + std::to_string(i + 1)] = format_double(cfg.p[i]);
        if (cfg.L && cfg.p.empty()) throw Error(ErrorKind::InvalidArgument, "--L needs --p");
    } else {
        kv = file_params;
        if (auto it = kv.find("p"); it != kv.end()) {
            std::stringstream ss(it->second);
            std::string item;
            int l = 0;
            while (std::getline(ss, item, ',')) kv["p" + std::to_string(++l)] = trim(item);
            kv.erase(it);
        }
        if (kv.empty()) throw Error(ErrorKind::InvalidArgument, "model parameters missing: pass --q or --params-file");
    }
    return params_from_key_values(kv);
}

std::uint64_t require_seed(const RunConfig& cfg) {
    if (!cfg.seed) throw Error(ErrorKind::InvalidArgument, "--seed is required for " + cfg.command);
    return *cfg.seed;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ExcursionTooLong:
        case ErrorKind::PopulationCapExceeded:
        case ErrorKind::TruncationBudgetExceeded:
            return kExitResource;
        default:
            return kExitConfig;
    }
}

void add_metadata(Report& r, const RunConfig& cfg, const ModelParams& params,
                  const std::vector<std::pair<std::string, std::string>>& knobs) {
    r.metadata.emplace_back("tool", kToolName);
    r.metadata.emplace_back("version", kToolVersion);
    r.metadata.emplace_back("command", cfg.command);
    const auto kv = params.to_key_values();
    r.metadata.emplace_back("L", kv.at("L"));
    for (int l = 1; l <= params.max_jump(); ++l) {
        const std::string key = "p" + std::to_string(l);
        r.metadata.emplace_back(key, kv.at(key));
    }
    r.metadata.emplace_back("q", kv.at("q"));
    r.metadata.emplace_back("seed", cfg.seed ? std::to_string(*cfg.seed) : std::string("none"));
    r.metadata.emplace_back("workers", std::to_string(cfg.workers));
    r.metadata.emplace_back("format", cfg.format);
    for (const auto& kv2 : knobs) r.metadata.push_back(kv2);
}

// ---------------------------------------------------------------------------

int cmd_verify(const RunConfig& cfg, const ModelParams& params, Report& r, std::ostream& err) {
    const std::uint64_t seed = require_seed(cfg);
    if (cfg.excursions == 0) throw Error(ErrorKind::InvalidArgument, "--excursions must be at least 1");
    const std::uint64_t draws = cfg.offspring_draws.value_or(cfg.excursions);
    add_metadata(r, cfg, params,
                 {{"excursions", std::to_string(cfg.excursions)},
                  {"cap", std::to_string(cfg.cap)},
                  {"offspring_draws", std::to_string(draws)}});

    const auto law = OffspringLaw::from(params);
    const auto id = identity_suite(params, cfg.excursions, seed, cfg.workers, cfg.cap);

    Table identity{"identity",
                   {"excursions", "discarded", "checks", "failures", "longest", "highest", "steps"},
                   {}};
    identity.add_row({id.excursions, id.discarded, id.checks, id.failures, id.longest,
                      static_cast<std::int64_t>(id.highest), id.steps});

    const auto sampled = sample_offspring_histogram(law, draws, seed, cfg.workers, id.first_generation.max_total);
    const auto path_check = check_offspring_histogram(id.first_generation, law);
    const auto sampler_check = check_offspring_histogram(sampled, law);

    // TV on a truncated support is only resolvable below 0.005 with about 10^6 draws
    constexpr double kTvLimit = 0.005;
    constexpr std::uint64_t kTvMinSamples = 1'000'000;
    constexpr double kMinP = 1e-3;

    Table checks{"offspring_law",
                 {"source", "samples", "chi2", "dof", "p_value", "tv", "tv_gated", "pass"},
                 {}};
    bool stats_ok = true;
    auto add_check = [&](const char* source, const OffspringHistogram& h, const OffspringCheck& c) {
        const bool gated = h.total >= kTvMinSamples;
        const bool pass = c.chi2.p_value > kMinP && (!gated || c.tv < kTvLimit);
        stats_ok = stats_ok && pass;
        checks.add_row({std::string(source), h.total, c.chi2.statistic, static_cast<std::int64_t>(c.chi2.dof),
                        c.chi2.p_value, c.tv, gated, pass});
    };
    add_check("path", id.first_generation, path_check);
    add_check("sampler", sampled, sampler_check);

    Table cells{"offspring_cells", {"u1", "u2", "pmf", "path_count", "sampler_count"}, {}};
    const auto cell_list = offspring_cells(id.first_generation.max_total);
    for (std::size_t i = 0; i < cell_list.size(); ++i) {
        const auto [u1, u2] = cell_list[i];
        cells.add_row({u1, u2, offspring_pmf(ParticleType::first, u1, u2, law), id.first_generation.counts[i],
                       sampled.counts[i]});
    }
    r.tables = {identity, checks, cells};

    int code = kExitOk;
    if (id.failures > 0) {
        err << "verify: " << id.failures << " identity failures\n";
        code = kExitIdentity;
    } else if (!stats_ok) {
        err << "verify: offspring-law check failed\n";
        code = kExitStatistical;
    }
    r.summary = {{"identity_failures", id.failures}, {"statistical_pass", stats_ok}, {"exit_code", std::int64_t{code}}};
    return code;
}

int cmd_converge(const RunConfig& cfg, const ModelParams& params, Report& r, std::ostream& err) {
    if (cfg.Ns.empty() || cfg.xs.empty() || cfg.lambdas.empty())
        throw Error(ErrorKind::InvalidArgument, "--N, --x and --lambda must be non-empty");
    if (!std::is_sorted(cfg.Ns.begin(), cfg.Ns.end()) || cfg.Ns.front() == 0)
        throw Error(ErrorKind::InvalidArgument, "--N must be positive and increasing");
    add_metadata(r, cfg, params,
                 {{"N", join_values(cfg.Ns)},
                  {"x", join_values(cfg.xs)},
                  {"lambda", join_values(cfg.lambdas)},
                  {"threshold", format_double(cfg.threshold)}});

    const auto k = derive_constants(params);
    const auto law = LimitLaw::from(params);
    Table t{"convergence",
            {"N", "x", "lambda", "level", "F1", "F2", "Phi", "gap1", "gap2", "gap12", "lt_exact", "A_N", "B_N",
             "N_B_minus_A", "lambda_x_c", "lambda_c"},
            {}};
    bool ok = true;
    for (double x : cfg.xs) {
        for (double lambda : cfg.lambdas) {
            // a type-2 ancestor carries twice the reproductive value of a type-1
            // ancestor, so N type-2 copies approach Phi^2
            double prev_gap1 = INFINITY, prev_gap2 = INFINITY;
            double gap1 = 0.0, gap2 = 0.0;
            for (std::uint64_t N : cfg.Ns) {
                const auto f1 = analytic_FN(ParticleType::first, N, x, lambda, k);
                const auto f2 = analytic_FN(ParticleType::second, N, x, lambda, k);
                const double ph = phi(x, lambda, law);
                gap1 = std::abs(f1.value - ph);
                gap2 = std::abs(f2.value - ph * ph);
                if (gap1 > prev_gap1 + 1e-15 || gap2 > prev_gap2 + 1e-15) ok = false;
                prev_gap1 = gap1;
                prev_gap2 = gap2;
                Cell A, B, S;
                if (f1.diagnostics) {
                    A = f1.diagnostics->A;
                    B = f1.diagnostics->B;
                    S = f1.diagnostics->scaled_gap;
                }
                t.add_row({N, x, lambda, grid_level(N, x), f1.value, f2.value, ph, gap1, gap2,
                           std::abs(f1.value - f2.value), local_time_lt(N, x, lambda, k), A, B, S, lambda * x * k.c, lambda * k.c});
            }
            if (!(gap1 < cfg.threshold) || !(gap2 < cfg.threshold)) ok = false;
        }
    }
    r.tables = {t};
    const int code = ok ? kExitOk : kExitStatistical;
    if (!ok) err << "converge: gaps do not shrink or final gap above threshold\n";
    r.summary = {{"converged", ok}, {"exit_code", std::int64_t{code}}};
    return code;
}

struct Query {
    std::vector<double> xs;
    std::vector<double> lambdas;
    std::string text;
};

Query parse_query(const std::string& text) {
    Query q;
    q.text = text;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw Error(ErrorKind::InvalidArgument, "query terms look like x:lambda, got '" + item + "'");
        try {
            q.xs.push_back(std::stod(item.substr(0, colon)));
            q.lambdas.push_back(std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidArgument, "bad query term '" + item + "'");
        }
    }
    if (q.xs.empty() || q.xs.size() > 3)
        throw Error(ErrorKind::InvalidArgument, "queries take 1 to 3 x:lambda terms");
    if (!std::is_sorted(q.xs.begin(), q.xs.end()))
        throw Error(ErrorKind::InvalidArgument, "query levels must be increasing");
    return q;
}

int cmd_compare(const RunConfig& cfg, const ModelParams& params, Report& r, std::ostream& err) {
    const std::uint64_t seed = require_seed(cfg);
    if (cfg.runs < 2 || cfg.limit_samples < 2)
        throw Error(ErrorKind::InvalidArgument, "--runs and --limit-samples must be at least 2");
    if (cfg.xs.empty()) throw Error(ErrorKind::InvalidArgument, "--x must be non-empty");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error(ErrorKind::InvalidArgument, "--alpha must be in (0,1)");
    std::vector<Query> queries;
    for (const auto& s : cfg.queries) queries.push_back(parse_query(s));

    std::set<double> levels(cfg.xs.begin(), cfg.xs.end());
    for (const auto& q : queries) levels.insert(q.xs.begin(), q.xs.end());
    if (*levels.begin() < 0.0) throw Error(ErrorKind::InvalidArgument, "levels must be non-negative");
    const std::vector<double> grid(levels.begin(), levels.end());
    auto column = [&](double x) {
        return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), x) - grid.begin());
    };

    add_metadata(r, cfg, params,
                 {{"N", std::to_string(cfg.N)},
                  {"x", join_values(cfg.xs)},
                  {"lambda", join_values(cfg.lambdas)},
                  {"runs", std::to_string(cfg.runs)},
                  {"limit_samples", std::to_string(cfg.limit_samples)},
                  {"alpha", format_double(cfg.alpha)},
                  {"cap", std::to_string(cfg.cap)},
                  {"query", join(cfg.queries)}});

    const auto law = LimitLaw::from(params);
    std::optional<ModelConstants> k;
    if (params.max_jump() == 2) k = derive_constants(params);

    const auto walk = sample_scaled_local_times(params, cfg.N, grid, cfg.runs, seed, cfg.workers, cfg.cap);
    const auto limit = sample_limit_paths(law, grid, cfg.limit_samples, seed, cfg.workers);

    // equal sample sizes: both sides are i.i.d., so the leading draws are a fair subsample
    const std::size_t m = std::min(cfg.runs, cfg.limit_samples);
    const double crit = ks_critical_value(m, m, cfg.alpha);
    Table ks{"ks", {"x", "level", "n_walk", "n_limit", "ks", "critical", "pass"}, {}};
    bool ok = true;
    for (double x : cfg.xs) {
        const auto& a = walk.values[column(x)];
        const auto& b = limit[column(x)];
        const double d = ks_distance(std::span(a).first(m), std::span(b).first(m));
        const bool pass = d <= crit;
        ok = ok && pass;
        ks.add_row({x, grid_level(cfg.N, x), std::uint64_t{m}, std::uint64_t{m}, d, crit, pass});
    }

    Table lt{"laplace",
             {"x", "lambda", "walk_lt", "walk_se", "analytic_FN", "local_time_lt", "limit_lt", "limit_se", "phi",
              "finite_dim_k1"},
             {}};
    for (double x : cfg.xs) {
        for (double lambda : cfg.lambdas) {
            const auto w = empirical_lt(walk.values[column(x)], lambda);
            const auto h = empirical_lt(limit[column(x)], lambda);
            Cell fn, lte;
            if (k) {
                fn = analytic_FN(ParticleType::first, cfg.N, x, lambda, *k).value;
                lte = local_time_lt(cfg.N, x, lambda, *k);
            }
            const double one_x[] = {x};
            const double one_l[] = {lambda};
            lt.add_row({x, lambda, w.value, w.se, fn, lte, h.value, h.se, phi(x, lambda, law),
                        finite_dim_lt(one_x, one_l, law)});
        }
    }

    Table fd{"finite_dim", {"query", "k", "walk_lt", "walk_se", "limit_lt", "limit_se", "analytic"}, {}};
    for (const auto& q : queries) {
        std::vector<std::size_t> cols;
        for (double x : q.xs) cols.push_back(column(x));
        const auto w = empirical_joint_lt(walk.values, cols, q.lambdas);
        const auto h = empirical_joint_lt(limit, cols, q.lambdas);
        fd.add_row({q.text, std::uint64_t{q.xs.size()}, w.value, w.se, h.value, h.se,
                    finite_dim_lt(q.xs, q.lambdas, law)});
    }
    r.tables = {ks, lt, fd};
    const int code = ok ? kExitOk : kExitStatistical;
    if (!ok) err << "compare: KS statistic above critical value\n";
    r.summary = {{"ks_pass", ok},
                 {"discarded_excursions", walk.discarded},
                 {"walk_steps", walk.steps},
                 {"exit_code", std::int64_t{code}}};
    return code;
}

int cmd_moments(const RunConfig& cfg, const ModelParams& params, Report& r, std::ostream& err) {
    const std::uint64_t seed = require_seed(cfg);
    if (cfg.replicates == 0) throw Error(ErrorKind::InvalidArgument, "--replicates must be positive");
    add_metadata(r, cfg, params,
                 {{"n_schedule", join_values(cfg.schedule)},
                  {"replicates", std::to_string(cfg.replicates)},
                  {"population_cap", std::to_string(cfg.population_cap)},
                  {"tolerance", format_double(cfg.tolerance)}});

    const auto m = second_moment_check(params, cfg.schedule, cfg.replicates, seed, cfg.workers, cfg.population_cap);
    Table rows{"moments", {"n", "second_moment", "se", "exact", "in_fit"}, {}};
    for (const auto& row : m.rows) {
        const bool in_fit = std::find(m.fit_ns.begin(), m.fit_ns.end(), row.n) != m.fit_ns.end();
        rows.add_row({row.n, row.second_moment.value, row.second_moment.se, row.exact, in_fit});
    }
    Table fit{"fit",
              {"slope", "slope_se", "exact_slope", "target", "ratio", "replicates", "capped", "increasing"},
              {}};
    fit.add_row({m.slope.value, m.slope.se, m.exact_slope, m.target, m.ratio, m.replicates, m.capped, m.increasing});
    r.tables = {rows, fit};

    int code = kExitOk;
    const double cap_rate = static_cast<double>(m.capped) / static_cast<double>(m.replicates + m.capped);
    if (cap_rate > 1e-3) {
        err << "moments: population cap hit in " << m.capped << " replicates\n";
        code = kExitResource;
    } else if (!(std::abs(m.ratio - 1.0) <= cfg.tolerance)) {
        err << "moments: slope/target ratio " << m.ratio << " outside tolerance\n";
        code = kExitStatistical;
    }
    r.summary = {{"ratio", m.ratio}, {"exit_code", std::int64_t{code}}};
    return code;
}

int cmd_simulate(const RunConfig& cfg, const ModelParams& params, Report& r, std::ostream&) {
    if (cfg.what == "excursions") {
        const std::uint64_t seed = require_seed(cfg);
        add_metadata(r, cfg, params,
                     {{"what", cfg.what},
                      {"excursions", std::to_string(cfg.dump_excursions)},
                      {"cap", std::to_string(cfg.cap)},
                      {"keep_paths", cfg.keep_paths ? "true" : "false"}});
        const StepSampler sampler(params);
        Table t{"excursions", {"excursion_id", "length", "max_height", "complete"}, {}};
        Table paths{"paths", {"excursion_id", "step", "position"}, {}};
        for (std::uint64_t i = 0; i < cfg.dump_excursions; ++i) {
            RandomStream g(seed, StreamTag::excursion_dump, i);
            std::vector<std::int64_t> path{0};
            const auto outcome = run_excursion(sampler, g, cfg.cap, [&](std::int64_t, std::int64_t to) {
                if (cfg.keep_paths) path.push_back(to);
            });
            t.add_row({i, outcome.length, static_cast<std::int64_t>(outcome.max_height), outcome.complete});
            if (cfg.keep_paths)
                for (std::size_t s = 0; s < path.size(); ++s) paths.add_row({i, std::uint64_t{s}, path[s]});
        }
        r.tables = {t};
        if (cfg.keep_paths) r.tables.push_back(std::move(paths));
        return kExitOk;
    }
    if (cfg.what == "limit") {
        const std::uint64_t seed = require_seed(cfg);
        add_metadata(r, cfg, params,
                     {{"what", cfg.what}, {"paths", std::to_string(cfg.paths)}, {"grid", join_values(cfg.grid)}});
        if (!std::is_sorted(cfg.grid.begin(), cfg.grid.end()))
            throw Error(ErrorKind::InvalidArgument, "--grid must be non-decreasing");
        const auto law = LimitLaw::from(params);
        const auto values = sample_limit_paths(law, cfg.grid, cfg.paths, seed, cfg.workers);
        Table t{"limit_paths", {"replicate", "x", "H"}, {}};
        for (std::uint64_t rep = 0; rep < cfg.paths; ++rep)
            for (std::size_t i = 0; i < cfg.grid.size(); ++i) t.add_row({rep, cfg.grid[i], values[i][rep]});
        r.tables = {t};
        return kExitOk;
    }
    if (cfg.what == "pmf") {
        add_metadata(r, cfg, params,
                     {{"what", cfg.what},
                      {"generation", std::to_string(cfg.generation)},
                      {"start", std::to_string(cfg.start)},
                      {"mass_target", format_double(cfg.mass_target)}});
        const auto law = OffspringLaw::from(params);
        const auto type = cfg.start == 1 ? ParticleType::first : ParticleType::second;
        const auto pmf = enumerate_pmf(type, cfg.generation, law, cfg.mass_target);
        Table t{"pmf", {"u1", "u2", "prob"}, {}};
        for (std::uint64_t u1 = 0; u1 < pmf.side; ++u1)
            for (std::uint64_t u2 = 0; u2 < pmf.side; ++u2)
                if (pmf.at(u1, u2) > 0.0) t.add_row({u1, u2, pmf.at(u1, u2)});
        r.tables = {t};
        r.summary = {{"side", std::uint64_t{pmf.side}},
                     {"captured_mass", pmf.captured_mass},
                     {"truncation_bound", pmf.truncation_bound}};
        return kExitOk;
    }
    throw Error(ErrorKind::InvalidArgument, "--what must be excursions, limit or pmf");
}

// ---------------------------------------------------------------------------

void add_common(CLI::App* sub, RunConfig& cfg, bool stochastic) {
    auto* q = sub->add_option("--q", cfg.q, "down-step probability; alone it selects the L=2 family");
    sub->add_option("--L", cfg.L, "maximal up-jump (with --p and --q)")->needs(q);
    sub->add_option("--p", cfg.p, "up-step probabilities p1,...,pL")->delimiter(',')->needs(q);
    sub->add_option("--params-file", cfg.params_file,
                    "flat key=value file; keys q, L, p1..pL and any flag name");
    sub->add_option("--seed", cfg.seed, stochastic ? "64-bit seed (required)" : "64-bit seed (unused)");
    sub->add_option("--workers", cfg.workers, "worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out, "output path, - for stdout");
    sub->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    std::map<std::string, std::string> file_params;

    CLI::App app{"Reflected (1,L) random walk: local times, branching structure and the Feller limit", kToolName};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    auto* verify = app.add_subcommand("verify", "local-time identity on simulated excursions and offspring-law tests");
    add_common(verify, cfg, true);
    verify->add_option("--excursions", cfg.excursions, "number of excursions")->capture_default_str();
    verify->add_option("--cap", cfg.cap, "step budget per excursion; longer ones are discarded")
        ->capture_default_str();
    verify->add_option("--offspring-draws", cfg.offspring_draws, "direct offspring draws (default: --excursions)");
    verify->footer(
        "Tables:\n"
        "  identity: excursions,discarded,checks,failures,longest,highest,steps\n"
        "  offspring_law: source,samples,chi2,dof,p_value,tv,tv_gated,pass\n"
        "  offspring_cells: u1,u2,pmf,path_count,sampler_count\n"
        "TV < 0.005 is enforced only with at least 1e6 samples; chi-square p > 0.001 always.\n"
        "Exit: 0 ok, 1 config, 2 identity failure, 3 statistical failure, 4 resource.");

    auto* converge = app.add_subcommand("converge", "generating-function Laplace transforms against the limit");
    add_common(converge, cfg, false);
    cfg.xs = {1.0};
    cfg.lambdas = {1.0};
    cfg.Ns = {10, 100, 1000, 10000};
    converge->add_option("--x", cfg.xs, "levels")->delimiter(',')->capture_default_str();
    converge->add_option("--lambda", cfg.lambdas, "Laplace arguments")->delimiter(',')->capture_default_str();
    converge->add_option("--N", cfg.Ns, "increasing N schedule")->delimiter(',')->capture_default_str();
    converge->add_option("--threshold", cfg.threshold, "bound on the final gaps")->capture_default_str();
    converge->footer(
        "Table convergence: N,x,lambda,level,F1,F2,Phi,gap1,gap2,gap12,lt_exact,A_N,B_N,N_B_minus_A,"
        "lambda_x_c,lambda_c\n"
        "gap1 = |F1 - Phi|, gap2 = |F2 - Phi^2|, gap12 = |F1 - F2| (reported only).\n"
        "Passes when gap1 and gap2 never grow along N and both final gaps are below the threshold.\nExit: 0 ok, 1 config, 3 convergence failure.");

    auto* compare = app.add_subcommand("compare", "scaled local times of the walk against exact Feller samples");
    add_common(compare, cfg, true);
    std::vector<double> compare_xs{0.25, 0.5, 1.0};
    std::vector<double> compare_lambdas{0.5, 1.0, 2.0};
    cfg.queries = {"0.5:1;1:1", "0.25:1;0.5:1;1:1"};
    compare->add_option("--N", cfg.N, "walk scale")->capture_default_str();
    compare->add_option("--x", compare_xs, "levels for KS and Laplace tables")->delimiter(',')->capture_default_str();
    compare->add_option("--lambda", compare_lambdas, "Laplace arguments")->delimiter(',')->capture_default_str();
    compare->add_option("--runs", cfg.runs, "walk replicates (N excursions each)")->capture_default_str();
    compare->add_option("--limit-samples", cfg.limit_samples, "exact limit paths")->capture_default_str();
    compare->add_option("--alpha", cfg.alpha, "KS level")->capture_default_str();
    compare->add_option("--cap", cfg.cap, "step budget per excursion")->capture_default_str();
    compare->add_option("--query", cfg.queries, "joint Laplace query x1:l1;x2:l2;... (repeatable)")
        ->capture_default_str();
    compare->footer(
        "Tables:\n"
        "  ks: x,level,n_walk,n_limit,ks,critical,pass\n"
        "  laplace: x,lambda,walk_lt,walk_se,analytic_FN,local_time_lt,limit_lt,limit_se,phi,finite_dim_k1\n"
        "  finite_dim: query,k,walk_lt,walk_se,limit_lt,limit_se,analytic\n"
        "Exit: 0 ok, 1 config, 3 KS failure, 4 resource.");

    auto* moments = app.add_subcommand("moments", "second-moment growth of the branching process");
    add_common(moments, cfg, true);
    cfg.schedule = {25, 50, 100, 200};
    moments->add_option("--n-schedule", cfg.schedule, "increasing generations")->delimiter(',')->capture_default_str();
    moments->add_option("--replicates", cfg.replicates, "replicates per generation")->capture_default_str();
    moments->add_option("--population-cap", cfg.population_cap, "particle budget per generation")
        ->capture_default_str();
    moments->add_option("--tolerance", cfg.tolerance, "allowed |slope/target - 1|")->capture_default_str();
    moments->footer(
        "Tables:\n"
        "  moments: n,second_moment,se,exact,in_fit\n"
        "  fit: slope,slope_se,exact_slope,target,ratio,replicates,capped,increasing\n"
        "Exit: 0 ok, 1 config, 3 slope outside tolerance, 4 population cap hit in > 0.1% of replicates.");

    auto* simulate = app.add_subcommand("simulate", "raw dumps: excursions, limit paths or an exact pmf");
    add_common(simulate, cfg, true);
    cfg.grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    simulate->add_option("--what", cfg.what, "excursions, limit or pmf")
        ->check(CLI::IsMember({"excursions", "limit", "pmf"}))
        ->capture_default_str();
    simulate->add_option("--excursions", cfg.dump_excursions, "excursions to dump")->capture_default_str();
    simulate->add_option("--cap", cfg.cap, "step budget per excursion")->capture_default_str();
    simulate->add_flag("--keep-paths", cfg.keep_paths,
                       "also dump every position; memory grows with total excursion length");
    simulate->add_option("--paths", cfg.paths, "limit paths")->capture_default_str();
    simulate->add_option("--grid", cfg.grid, "levels for limit paths")->delimiter(',')->capture_default_str();
    simulate->add_option("--n", cfg.generation, "generation for the pmf")->capture_default_str();
    simulate->add_option("--start", cfg.start, "pmf start type 1 or 2")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    simulate->add_option("--mass-target", cfg.mass_target, "pmf mass to capture")->capture_default_str();
    simulate->footer(
        "Tables:\n"
        "  excursions: excursion_id,length,max_height,complete\n"
        "  paths (--keep-paths): excursion_id,step,position\n"
        "  limit_paths: replicate,x,H\n"
        "  pmf: u1,u2,prob\n");

    try {
        merge_params_file(args, file_params);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            // --help / --version
            app.exit(e, out, err);
            return kExitOk;
        }
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    CLI::App* chosen = app.get_subcommands().front();
    cfg.command = chosen->get_name();
    if (chosen == compare) {
        cfg.xs = compare_xs;
        cfg.lambdas = compare_lambdas;
    }

    Report report;
    int code = kExitOk;
    try {
        const ModelParams params = resolve_params(cfg, file_params);
        std::function<int(const RunConfig&, const ModelParams&, Report&, std::ostream&)> run;
        if (chosen == verify) run = cmd_verify;
        else if (chosen == converge) run = cmd_converge;
        else if (chosen == compare) run = cmd_compare;
        else if (chosen == moments) run = cmd_moments;
        else run = cmd_simulate;
        code = run(cfg, params, report, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    }

    std::ofstream file;
    std::ostream* os = &out;
    if (cfg.out != "-") {
        file.open(cfg.out, std::ios::binary);
        if (!file) {
            err << "error: cannot open " << cfg.out << " for writing\n";
            return kExitConfig;
        }
        os = &file;
    }
    if (cfg.format == "json") write_json(report, *os);
    else write_csv(report, *os);
    os->flush();
    if (!*os) {
        err << "error: failed writing report\n";
        return kExitConfig;
    }
    return code;
}

}  // namespace rwlt
