#include "semidl/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

const char* kFooter =
    "Exit codes:\n"
    "  0  success\n"
    "  1  usage error or unreadable file\n"
    "  2  parse or validation error in program or facts\n"
    "  3  solver or grounding strategy not applicable\n"
    "  4  grounding exceeded --cap-size\n"
    "  5  Kleene iteration did not converge\n"
    "  6  check found a disagreement";

void add_inputs(CLI::App* cmd, semidl::RunConfig& c, bool facts) {
    cmd->add_option("--program", c.program_path, "Datalog program file")->required();
    if (facts) cmd->add_option("--facts", c.facts_path, "annotated facts file");
    cmd->add_option("--semiring", c.semiring, "boolean | tropical | naturals | set:a,b,... | access")
        ->capture_default_str();
}

void add_strategy(CLI::App* cmd, semidl::RunConfig& c) {
    cmd->add_option("--strategy", c.strategy, "naive | acyclic | free-connex | linear | auto")
        ->capture_default_str();
    cmd->add_option("--cap-size", c.cap, "maximum grounding size")->capture_default_str();
    cmd->add_flag("--prune-unreachable", c.prune_unreachable,
                  "drop equations the target does not depend on");
}

void add_solver(CLI::App* cmd, semidl::RunConfig& c) {
    cmd->add_option("--solver", c.solver, "rank | absorptive | kleene | auto")->capture_default_str();
    cmd->add_option("--max-iters", c.max_iters, "Kleene round limit");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semiring Datalog evaluation via grounding and equation solving"};
    app.footer(kFooter);
    app.require_subcommand(1);

    semidl::RunConfig run;
    CLI::App* run_cmd = app.add_subcommand("run", "evaluate the target relation");
    add_inputs(run_cmd, run, true);
    add_strategy(run_cmd, run);
    add_solver(run_cmd, run);
    run_cmd->add_option("--output", run.output, "tsv | structured")
        ->check(CLI::IsMember({"tsv", "structured"}))
        ->capture_default_str();
    run_cmd->add_flag("--timing", run.timing, "report wall-clock time");

    semidl::RunConfig ground;
    CLI::App* ground_cmd = app.add_subcommand("ground", "print the grounded equation system");
    add_inputs(ground_cmd, ground, true);
    add_strategy(ground_cmd, ground);
    ground_cmd->add_option("--output", ground.output, "tsv | structured")
        ->check(CLI::IsMember({"tsv", "structured"}))
        ->capture_default_str();
    ground_cmd->add_flag("--explain", ground.explain, "show the per-body strategy and join tree");

    semidl::RunConfig check;
    semidl::CheckOptions check_opts;
    CLI::App* check_cmd = app.add_subcommand("check", "compare all strategies and solvers");
    add_inputs(check_cmd, check, true);
    check_cmd->add_option("--max-iters", check.max_iters, "Kleene round limit");
    check_cmd->add_option("--max-n", check_opts.max_n, "largest active domain accepted")
        ->capture_default_str();

    semidl::BenchConfig bench;
    std::string family = "random-graph";
    CLI::App* bench_cmd = app.add_subcommand("bench", "measure grounding and solving on generated inputs");
    add_inputs(bench_cmd, bench.run, false);
    add_strategy(bench_cmd, bench.run);
    add_solver(bench_cmd, bench.run);
    bench_cmd->add_option("--family", family, "path | random-graph | grid")
        ->check(CLI::IsMember({"path", "random-graph", "grid"}))
        ->capture_default_str();
    bench_cmd->add_option("--sizes", bench.sizes, "instance sizes")->delimiter(',');
    bench_cmd->add_option("--seed", bench.run.seed, "generator seed")->capture_default_str();
    bench_cmd->add_flag("--timing", bench.run.timing, "add a wall_ms column");

    semidl::RunConfig cls;
    CLI::App* classify_cmd = app.add_subcommand("classify", "report syntactic program classes");
    classify_cmd->add_option("--program", cls.program_path, "Datalog program file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : semidl::exit_code::usage;
    }

    if (*run_cmd) return semidl::cmd_run(run, std::cout, std::cerr);
    if (*ground_cmd) return semidl::cmd_ground(ground, std::cout, std::cerr);
    if (*check_cmd) return semidl::cmd_check(check, std::cout, std::cerr, check_opts);
    if (*bench_cmd) {
        bench.family = semidl::parse_family(family);
        return semidl::cmd_bench(bench, std::cout, std::cerr);
    }
    if (*classify_cmd) return semidl::cmd_classify(cls, std::cout, std::cerr);
    return semidl::exit_code::usage;
}
