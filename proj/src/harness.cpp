#include "semidl/harness.hpp"

#include "semidl/error.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace semidl {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Runs f and maps engine exceptions to exit codes.
template <class F>
int guarded(std::ostream& err, F&& f) {
    try {
        return f();
    } catch (const std::ios_base::failure& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return exit_code::parse;
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << '\n';
        return exit_code::parse;
    } catch (const TypeMismatch& e) {
        err << "invalid input: " << e.what() << '\n';
        return exit_code::parse;
    } catch (const CapabilityError& e) {
        err << "not applicable: " << e.what() << '\n';
        return exit_code::capability;
    } catch (const StrategyNotApplicable& e) {
        err << "not applicable: " << e.what() << '\n';
        return exit_code::capability;
    } catch (const CyclicRule& e) {
        err << "not applicable: " << e.what() << '\n';
        return exit_code::capability;
    } catch (const CapExceeded& e) {
        err << "cap exceeded: " << e.what() << '\n';
        return exit_code::cap_exceeded;
    } catch (const NonConvergence& e) {
        err << "no convergence: " << e.what() << '\n';
        return exit_code::non_convergence;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage;
    }
}

struct Inputs {
    Program program;
    Instance instance;
};

Semiring semiring_from(const std::string& token) {
    try {
        return Semiring::from_token(token);
    } catch (const Error& e) {
        throw std::ios_base::failure(e.what());
    }
}

Inputs load(const RunConfig& config) {
    Semiring s = semiring_from(config.semiring);
    std::string program_text = read_file(config.program_path);
    std::string facts_text = config.facts_path.empty() ? std::string() : read_file(config.facts_path);
    Program p = parse_program(program_text);
    Instance i = parse_facts(facts_text, s);
    check_instance(p, i);
    return {std::move(p), std::move(i)};
}

std::string join(const std::vector<std::string>& items, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string tuple_text(const std::string& predicate, const Tuple& t, const Instance& inst) {
    std::string out = predicate + "(";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) out += ',';
        out += inst.constants[t[i]];
    }
    return out + ")";
}

} // namespace

Evaluation evaluate(const Program& program, const Instance& instance, const RunConfig& config) {
    auto start = std::chrono::steady_clock::now();
    GroundOptions go{parse_strategy(config.strategy), config.cap, config.prune_unreachable};
    SolverChoice choice = parse_solver(config.solver);
    Grounding g = ground_program(program, instance, go);
    TwoCanonicalSystem sys = to_two_canonical(g);
    Solution sol = solve(sys, choice, SolveOptions{64, config.max_iters});
    if (!sol.converged) {
        throw NonConvergence("Kleene iteration did not converge within " +
                             std::to_string(sol.stats.iterations) + " rounds");
    }
    RelationValues target = relation_values(g, sol.h, program.target);
    StatsReport st;
    st.m = instance.m();
    st.n = instance.n();
    st.grounding_size = g.size();
    st.canonical_size = sys.size();
    for (const auto& r : g.report) st.strategies.push_back(r.strategy);
    st.solver_path = std::string(solver_path_token(sol.path));
    st.popped = sol.stats.popped;
    st.equation_visits = sol.stats.equation_visits;
    st.semiring_ops = sol.stats.semiring_ops;
    st.pq_ops = sol.stats.pq_ops;
    st.iterations = sol.stats.iterations;
    if (config.timing) {
        st.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return Evaluation{std::move(g), std::move(sys), std::move(sol), std::move(target), std::move(st)};
}

std::string format_relation(const std::string& predicate, const RelationValues& rel,
                            const Instance& instance) {
    std::ostringstream out;
    for (const auto& [t, v] : rel) {
        out << tuple_text(predicate, t, instance) << '\t' << instance.semiring.format(v) << '\n';
    }
    return out.str();
}

std::string format_stats(const StatsReport& s) {
    std::ostringstream out;
    out << "m: " << s.m << '\n'
        << "n: " << s.n << '\n'
        << "grounding_size: " << s.grounding_size << '\n'
        << "canonical_size: " << s.canonical_size << '\n'
        << "strategies: " << join(s.strategies, ",") << '\n'
        << "solver: " << s.solver_path << '\n'
        << "popped: " << s.popped << '\n'
        << "equation_visits: " << s.equation_visits << '\n'
        << "semiring_ops: " << s.semiring_ops << '\n'
        << "pq_ops: " << s.pq_ops << '\n'
        << "iterations: " << s.iterations << '\n';
    if (s.wall_ms) out << "wall_ms: " << std::fixed << std::setprecision(3) << *s.wall_ms << '\n';
    return out.str();
}

std::string stats_json(const StatsReport& s) {
    nlohmann::json j{{"m", s.m},
                     {"n", s.n},
                     {"grounding_size", s.grounding_size},
                     {"canonical_size", s.canonical_size},
                     {"strategies", s.strategies},
                     {"solver", s.solver_path},
                     {"popped", s.popped},
                     {"equation_visits", s.equation_visits},
                     {"semiring_ops", s.semiring_ops},
                     {"pq_ops", s.pq_ops},
                     {"iterations", s.iterations}};
    if (s.wall_ms) j["wall_ms"] = *s.wall_ms;
    return j.dump();
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Inputs in = load(config);
        Evaluation ev = evaluate(in.program, in.instance, config);
        if (config.output == "structured") {
            nlohmann::json rel = nlohmann::json::array();
            for (const auto& [t, v] : ev.target) {
                rel.push_back({{"atom", tuple_text(in.program.target, t, in.instance)},
                               {"value", in.instance.semiring.format(v)}});
            }
            nlohmann::json doc{{"target", in.program.target},
                               {"relation", rel},
                               {"stats", nlohmann::json::parse(stats_json(ev.stats))}};
            out << doc.dump(2) << '\n';
        } else {
            out << format_relation(in.program.target, ev.target, in.instance);
            err << format_stats(ev.stats);
        }
        for (const auto& w : in.instance.warnings) err << "warning: " << w << '\n';
        return exit_code::ok;
    });
}

int cmd_ground(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Inputs in = load(config);
        GroundOptions go{parse_strategy(config.strategy), config.cap, config.prune_unreachable};
        Grounding g = ground_program(in.program, in.instance, go);
        if (config.output == "structured") {
            out << dump_json(g);
            return exit_code::ok;
        }
        if (config.explain) {
            for (const auto& r : g.report) {
                out << "% body " << r.body_id << " of " << r.head << ": " << r.strategy << '\n';
                std::istringstream tree(r.join_tree);
                for (std::string line; std::getline(tree, line);) out << "%   " << line << '\n';
            }
            out << "% size " << g.size() << '\n';
        }
        out << dump_text(g);
        return exit_code::ok;
    });
}

int cmd_classify(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Program p = parse_program(read_file(config.program_path));
        Classification c = classify(p);
        auto flag = [](bool b) { return b ? "true" : "false"; };
        out << "monadic: " << flag(c.monadic) << '\n'
            << "linear: " << flag(c.linear) << '\n'
            << "chain: " << flag(c.chain) << '\n'
            << "rulewise_acyclic: " << flag(c.rulewise_acyclic) << '\n'
            << "rulewise_free_connex: " << flag(c.rulewise_free_connex) << '\n'
            << "arity_bound: " << p.arity_bound << '\n';
        return exit_code::ok;
    });
}

// ---------------------------------------------------------------------------
// check

bool CheckReport::all_agree() const {
    if (!reference_converged) return false;
    for (const auto& c : cells) {
        if (c.status != "agree" && c.status != "n/a") return false;
    }
    return true;
}

std::string CheckReport::first_difference() const {
    if (!reference_converged) return "reference evaluation did not converge";
    for (const auto& c : cells) {
        if (c.status != "agree" && c.status != "n/a") {
            return c.strategy + " x " + c.solver + ": " + c.detail;
        }
    }
    return {};
}

std::string CheckReport::matrix() const {
    std::vector<std::string> strategies;
    std::vector<std::string> solvers;
    for (const auto& c : cells) {
        if (std::find(strategies.begin(), strategies.end(), c.strategy) == strategies.end()) {
            strategies.push_back(c.strategy);
        }
        if (std::find(solvers.begin(), solvers.end(), c.solver) == solvers.end()) {
            solvers.push_back(c.solver);
        }
    }
    std::ostringstream out;
    out << std::left << std::setw(13) << "strategy";
    for (const auto& s : solvers) out << std::setw(12) << s;
    out << '\n';
    for (const auto& st : strategies) {
        out << std::setw(13) << st;
        for (const auto& so : solvers) {
            for (const auto& c : cells) {
                if (c.strategy == st && c.solver == so) out << std::setw(12) << c.status;
            }
        }
        out << '\n';
    }
    return out.str();
}

CheckReport check(const Program& program, const Instance& instance, const CheckOptions& options) {
    CheckReport report;
    ProgramSolution ref = kleene_program(program, instance, options.max_iters);
    report.reference_converged = ref.converged;
    if (!ref.converged) return report;
    const RelationValues& expected = ref.relations[program.target];
    const Semiring& s = instance.semiring;

    auto describe = [&](const RelationValues& got) -> std::string {
        std::set<Tuple> keys;
        for (const auto& kv : expected) keys.insert(kv.first);
        for (const auto& kv : got) keys.insert(kv.first);
        for (const auto& t : keys) {
            auto e = expected.find(t);
            auto g = got.find(t);
            Value ev = e == expected.end() ? s.zero() : e->second;
            Value gv = g == got.end() ? s.zero() : g->second;
            if (ev != gv) {
                return tuple_text(program.target, t, instance) + ": expected " + s.format(ev) +
                       ", got " + s.format(gv);
            }
        }
        return {};
    };

    const Strategy strategies[] = {Strategy::naive, Strategy::acyclic, Strategy::free_connex,
                                   Strategy::linear, Strategy::automatic};
    const char* solvers[] = {"rank", "absorptive", "kleene", "kleene-g"};
    for (Strategy st : strategies) {
        std::string st_name(strategy_token(st));
        std::optional<Grounding> g;
        std::string why;
        try {
            g = ground_program(program, instance, GroundOptions{st, Grounding::default_cap, false});
        } catch (const StrategyNotApplicable& e) {
            why = e.what();
        } catch (const CyclicRule& e) {
            why = e.what();
        }
        if (!g) {
            for (const char* so : solvers) report.cells.push_back({st_name, so, "n/a", why});
            continue;
        }
        if (options.corrupt) options.corrupt(*g);
        TwoCanonicalSystem sys = to_two_canonical(*g);
        for (const char* so : solvers) {
            CheckCell cell{st_name, so, {}, {}};
            try {
                Solution sol;
                std::string name = so;
                if (name == "rank") sol = solve_rank(sys);
                else if (name == "absorptive") sol = solve_absorptive(sys);
                else if (name == "kleene") sol = kleene(sys, options.max_iters);
                else sol = kleene(*g, options.max_iters);
                if (!sol.converged) {
                    cell.status = "no-conv";
                    cell.detail = "did not converge";
                } else {
                    std::string diff = describe(relation_values(*g, sol.h, program.target));
                    cell.status = diff.empty() ? "agree" : "DIFF";
                    cell.detail = diff;
                }
            } catch (const CapabilityError& e) {
                cell.status = "n/a";
                cell.detail = e.what();
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err,
              const CheckOptions& options) {
    return guarded(err, [&] {
        Inputs in = load(config);
        if (in.instance.n() > options.max_n) {
            err << "error: check needs an active domain of at most " << options.max_n
                << " constants (got " << in.instance.n() << ")\n";
            return exit_code::usage;
        }
        CheckOptions opts = options;
        if (config.max_iters) opts.max_iters = config.max_iters;
        CheckReport r = check(in.program, in.instance, opts);
        if (!r.reference_converged) {
            err << "no convergence: reference evaluation did not converge\n";
            return exit_code::non_convergence;
        }
        out << r.matrix();
        if (!r.all_agree()) {
            err << "disagreement: " << r.first_difference() << '\n';
            return exit_code::disagreement;
        }
        return exit_code::ok;
    });
}

// ---------------------------------------------------------------------------
// generators and bench

Family parse_family(std::string_view token) {
    if (token == "path") return Family::path;
    if (token == "random-graph") return Family::random_graph;
    if (token == "grid") return Family::grid;
    throw ValidationError("unknown generator family '" + std::string(token) +
                          "' (expected path|random-graph|grid)");
}

Value random_value(const Semiring& s, std::mt19937_64& rng) {
    switch (s.kind()) {
    case SemiringKind::boolean: return Value::boolean(true);
    case SemiringKind::tropical:
        return Value::tropical(static_cast<double>(std::uniform_int_distribution<int>(1, 10)(rng)));
    case SemiringKind::naturals: return Value::natural(std::uniform_int_distribution<std::uint64_t>(1, 3)(rng));
    case SemiringKind::set: {
        std::size_t k = s.universe().size();
        if (k == 0) return s.one();
        std::uint64_t full = k >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
        return Value::set(std::uniform_int_distribution<std::uint64_t>(1, full)(rng));
    }
    case SemiringKind::access:
        return Value::access(static_cast<Access>(std::uniform_int_distribution<int>(0, 3)(rng)));
    }
    return s.one();
}

std::vector<std::tuple<std::size_t, std::size_t, std::uint64_t>>
random_digraph(std::size_t n, double density, std::mt19937_64& rng) {
    std::vector<std::tuple<std::size_t, std::size_t, std::uint64_t>> edges;
    std::bernoulli_distribution keep(density);
    std::uniform_int_distribution<std::uint64_t> weight(1, 10);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (u == v) continue;
            if (keep(rng)) edges.emplace_back(u, v, weight(rng));
        }
    }
    return edges;
}

Instance generate_instance(const Program& program, const Semiring& semiring, Family family,
                           std::size_t size, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::size_t nodes = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    switch (family) {
    case Family::path:
        nodes = size;
        for (std::size_t i = 0; i + 1 < size; ++i) edges.emplace_back(i, i + 1);
        break;
    case Family::random_graph: {
        if (size == 0) break;
        nodes = std::max<std::size_t>(size / 4, 2);
        while (nodes * (nodes - 1) < size) ++nodes;
        std::uniform_int_distribution<std::size_t> pick(0, nodes - 1);
        std::set<std::pair<std::size_t, std::size_t>> seen;
        while (edges.size() < size) {
            std::size_t u = pick(rng);
            std::size_t v = pick(rng);
            if (u != v && seen.emplace(u, v).second) edges.emplace_back(u, v);
        }
        break;
    }
    case Family::grid:
        nodes = size * size;
        for (std::size_t r = 0; r < size; ++r) {
            for (std::size_t c = 0; c < size; ++c) {
                std::size_t id = r * size + c;
                if (c + 1 < size) edges.emplace_back(id, id + 1);
                if (r + 1 < size) edges.emplace_back(id, id + size);
            }
        }
        break;
    }
    auto name = [](std::size_t i) { return "n" + std::to_string(i); };
    InstanceBuilder b(semiring);
    if (nodes > 0) {
        std::uniform_int_distribution<std::size_t> pick(0, nodes - 1);
        for (const auto& [sym, arity] : program.edb_schema) {
            if (arity == 0) {
                b.add(sym, {}, random_value(semiring, rng));
            } else if (arity == 1) {
                b.add(sym, {name(0)}, semiring.one());
            } else {
                for (const auto& [u, v] : edges) {
                    std::vector<std::string> t{name(u), name(v)};
                    while (t.size() < arity) t.push_back(name(pick(rng)));
                    b.add(sym, std::move(t), random_value(semiring, rng));
                }
            }
        }
    }
    return std::move(b).build();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (x[i] <= 0 || y[i] <= 0) continue;
        double lx = std::log(x[i]);
        double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++k;
    }
    double den = static_cast<double>(k) * sxx - sx * sx;
    if (k < 2 || den == 0) return std::nan("");
    return (static_cast<double>(k) * sxy - sx * sy) / den;
}

std::vector<BenchRow> bench(const Program& program, const BenchConfig& config) {
    Semiring s = Semiring::from_token(config.run.semiring);
    std::vector<BenchRow> rows;
    for (std::size_t i = 0; i < config.sizes.size(); ++i) {
        BenchRow row;
        row.index = i;
        row.size = config.sizes[i];
        Instance inst = generate_instance(program, s, config.family, row.size, config.run.seed + i);
        row.stats.m = inst.m();
        row.stats.n = inst.n();
        try {
            Evaluation ev = evaluate(program, inst, config.run);
            row.stats = ev.stats;
            row.status = "ok";
        } catch (const CapExceeded&) {
            row.status = "cap-exceeded";
        } catch (const Error& e) {
            std::string msg = e.what();
            std::replace(msg.begin(), msg.end(), ',', ';');
            row.status = "error: " + msg;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows, bool timing) {
    std::ostringstream out;
    out << "index,size,m,n,grounding_size,canonical_size,strategies,solver,popped,equation_visits,"
           "semiring_ops,pq_ops,status";
    if (timing) out << ",wall_ms";
    out << '\n';
    for (const auto& r : rows) {
        const auto& s = r.stats;
        out << r.index << ',' << r.size << ',' << s.m << ',' << s.n << ',' << s.grounding_size << ','
            << s.canonical_size << ',' << join(s.strategies, ";") << ',' << s.solver_path << ','
            << s.popped << ',' << s.equation_visits << ',' << s.semiring_ops << ',' << s.pq_ops << ','
            << r.status;
        if (timing) out << ',' << std::fixed << std::setprecision(3) << s.wall_ms.value_or(0.0);
        out << '\n';
    }
    return out.str();
}

int cmd_bench(const BenchConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        semiring_from(config.run.semiring);
        Program p = parse_program(read_file(config.run.program_path));
        std::vector<BenchRow> rows = bench(p, config);
        out << bench_csv(rows, config.run.timing);
        std::vector<double> m, n, g;
        for (const auto& r : rows) {
            if (r.status != "ok") continue;
            m.push_back(static_cast<double>(r.stats.m));
            n.push_back(static_cast<double>(r.stats.n));
            g.push_back(static_cast<double>(r.stats.grounding_size));
        }
        if (g.size() >= 2) {
            std::vector<double> mn;
            for (std::size_t i = 0; i < m.size(); ++i) mn.push_back(m[i] * n[i]);
            out << std::fixed << std::setprecision(4) << "# slope_G_vs_m," << loglog_slope(m, g) << '\n'
                << "# slope_G_vs_n," << loglog_slope(n, g) << '\n'
                << "# slope_G_vs_mn," << loglog_slope(mn, g) << '\n';
        }
        return exit_code::ok;
    });
}

} // namespace semidl
