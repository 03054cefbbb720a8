#include "semidl/harness.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace semidl;

namespace {

struct Loaded {
    Program program;
    Instance instance;
};

Loaded load(const std::string& program, const std::string& facts, const std::string& semiring) {
    Semiring s = Semiring::from_token(semiring);
    Program p = parse_program(program);
    Instance i = parse_facts(facts, s);
    check_instance(p, i);
    return {std::move(p), std::move(i)};
}

py::dict stats_dict(const StatsReport& s) {
    py::dict d;
    d["m"] = s.m;
    d["n"] = s.n;
    d["grounding_size"] = s.grounding_size;
    d["canonical_size"] = s.canonical_size;
    d["strategies"] = s.strategies;
    d["solver"] = s.solver_path;
    d["popped"] = s.popped;
    d["equation_visits"] = s.equation_visits;
    d["semiring_ops"] = s.semiring_ops;
    d["pq_ops"] = s.pq_ops;
    d["iterations"] = s.iterations;
    return d;
}

py::tuple run(const std::string& program, const std::string& facts, const std::string& semiring,
              const std::string& strategy, const std::string& solver, std::optional<std::size_t> max_iters,
              std::size_t cap, bool prune) {
    Loaded in = load(program, facts, semiring);
    RunConfig cfg;
    cfg.strategy = strategy;
    cfg.solver = solver;
    cfg.max_iters = max_iters;
    cfg.cap = cap;
    cfg.prune_unreachable = prune;
    Evaluation ev = [&] {
        py::gil_scoped_release release;
        return evaluate(in.program, in.instance, cfg);
    }();
    py::dict rel;
    for (const auto& [t, v] : ev.target) {
        py::tuple key(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) key[i] = in.instance.constants[t[i]];
        rel[key] = in.instance.semiring.format(v);
    }
    return py::make_tuple(rel, stats_dict(ev.stats));
}

std::string ground(const std::string& program, const std::string& facts, const std::string& semiring,
                   const std::string& strategy, std::size_t cap, bool prune, bool structured) {
    Loaded in = load(program, facts, semiring);
    Grounding g = ground_program(in.program, in.instance, {parse_strategy(strategy), cap, prune});
    return structured ? dump_json(g) : dump_text(g);
}

py::dict classify_program(const std::string& program) {
    Classification c = classify(parse_program(program));
    py::dict d;
    d["monadic"] = c.monadic;
    d["linear"] = c.linear;
    d["chain"] = c.chain;
    d["rulewise_acyclic"] = c.rulewise_acyclic;
    d["rulewise_free_connex"] = c.rulewise_free_connex;
    return d;
}

py::tuple check_program(const std::string& program, const std::string& facts, const std::string& semiring,
                        std::optional<std::size_t> max_iters) {
    Loaded in = load(program, facts, semiring);
    CheckOptions opts;
    opts.max_iters = max_iters;
    CheckReport r = check(in.program, in.instance, opts);
    py::list cells;
    for (const auto& c : r.cells) cells.append(py::make_tuple(c.strategy, c.solver, c.status, c.detail));
    return py::make_tuple(r.all_agree(), cells);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Semiring Datalog evaluation engine";

    auto error = py::register_exception<Error>(m, "Error");
    py::register_exception<ParseError>(m, "ParseError", error);
    py::register_exception<ValidationError>(m, "ValidationError", error);
    py::register_exception<TypeMismatch>(m, "TypeMismatch", error);
    py::register_exception<CapabilityError>(m, "CapabilityError", error);
    py::register_exception<StrategyNotApplicable>(m, "StrategyNotApplicable", error);
    py::register_exception<CyclicRule>(m, "CyclicRule", error);
    py::register_exception<CapExceeded>(m, "CapExceeded", error);
    py::register_exception<NonConvergence>(m, "NonConvergence", error);

    m.attr("DEFAULT_CAP") = Grounding::default_cap;

    m.def("run", &run, py::arg("program"), py::arg("facts") = "", py::arg("semiring") = "tropical",
          py::arg("strategy") = "auto", py::arg("solver") = "auto", py::arg("max_iters") = py::none(),
          py::arg("cap") = Grounding::default_cap, py::arg("prune_unreachable") = false,
          "Evaluate the target relation; returns (relation, stats).");
    m.def("ground", &ground, py::arg("program"), py::arg("facts") = "", py::arg("semiring") = "tropical",
          py::arg("strategy") = "auto", py::arg("cap") = Grounding::default_cap,
          py::arg("prune_unreachable") = false, py::arg("structured") = false,
          "Grounded equation system as text or JSON.");
    m.def("classify", &classify_program, py::arg("program"));
    m.def("check", &check_program, py::arg("program"), py::arg("facts") = "", py::arg("semiring") = "tropical",
          py::arg("max_iters") = py::none(),
          "Compare every strategy and solver against naive iteration; returns (all_agree, cells).");
    m.def("pretty_print", [](const std::string& program) { return pretty_print(parse_program(program)); },
          py::arg("program"));
}
