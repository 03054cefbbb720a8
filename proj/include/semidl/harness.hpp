#pragma once

#include "semidl/error.hpp"
#include "semidl/grounding.hpp"
#include "semidl/instance.hpp"
#include "semidl/program.hpp"
#include "semidl/solver.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace semidl {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;          // bad flags, unreadable files
inline constexpr int parse = 2;          // syntax or validation error in inputs
inline constexpr int capability = 3;     // solver or strategy not applicable
inline constexpr int cap_exceeded = 4;   // grounding larger than --cap-size
inline constexpr int non_convergence = 5;
inline constexpr int disagreement = 6;   // check found differing results
} // namespace exit_code

struct RunConfig {
    std::string program_path;
    std::string facts_path;
    std::string semiring = "tropical";
    std::string strategy = "auto";
    std::string solver = "auto";
    std::optional<std::size_t> max_iters;
    std::string output = "tsv"; // tsv | structured
    std::size_t cap = Grounding::default_cap;
    bool prune_unreachable = false;
    bool explain = false;
    bool timing = false;
    std::uint64_t seed = 1;
};

struct StatsReport {
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t grounding_size = 0;
    std::size_t canonical_size = 0;
    std::vector<std::string> strategies; // one per body
    std::string solver_path;
    std::size_t popped = 0;
    std::size_t equation_visits = 0;
    std::size_t semiring_ops = 0;
    std::size_t pq_ops = 0;
    std::size_t iterations = 0;
    std::optional<double> wall_ms;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

struct Evaluation {
    Grounding grounding;
    TwoCanonicalSystem canonical;
    Solution solution;
    RelationValues target;
    StatsReport stats;
};

/// parse -> ground -> canonicalize -> solve. Throws on any failure; a
/// non-converging Kleene run throws NonConvergence.
Evaluation evaluate(const Program& program, const Instance& instance, const RunConfig& config);

/// `T(a,b)<TAB>value` lines, sorted by tuple.
std::string format_relation(const std::string& predicate, const RelationValues& rel,
                            const Instance& instance);
std::string format_stats(const StatsReport& stats);
std::string stats_json(const StatsReport& stats);

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_ground(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_classify(const RunConfig& config, std::ostream& out, std::ostream& err);

struct CheckCell {
    std::string strategy;
    std::string solver;
    std::string status; // agree | DIFF | n/a | no-conv
    std::string detail;
};

struct CheckReport {
    std::vector<CheckCell> cells;
    bool reference_converged = true;
    bool all_agree() const;
    std::string first_difference() const;
    std::string matrix() const;
};

struct CheckOptions {
    std::optional<std::size_t> max_iters;
    std::size_t max_n = 16;
    /// Test hook applied to every grounding before it is solved.
    std::function<void(Grounding&)> corrupt;
};

/// Every strategy x solver pair against kleene_program on the target.
CheckReport check(const Program& program, const Instance& instance, const CheckOptions& options = {});

int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err,
              const CheckOptions& options = {});

enum class Family { path, random_graph, grid };

Family parse_family(std::string_view token);

/// Synthetic instance for a program: binary EDBs receive the family's edges,
/// unary EDBs the first node, other arities tuples derived from the edges.
/// `size` is the node count (path), edge count (random-graph) or side (grid).
Instance generate_instance(const Program& program, const Semiring& semiring, Family family,
                           std::size_t size, std::uint64_t seed);

/// Directed graph where each ordered pair u != v is an edge with
/// probability `density`; integer weights in [1, 10].
std::vector<std::tuple<std::size_t, std::size_t, std::uint64_t>>
random_digraph(std::size_t n, double density, std::mt19937_64& rng);

/// A random annotation that is never zero.
Value random_value(const Semiring& semiring, std::mt19937_64& rng);

struct BenchRow {
    std::size_t index = 0;
    std::size_t size = 0;
    std::string status; // ok | cap-exceeded | error: ...
    StatsReport stats;
};

struct BenchConfig {
    Family family = Family::random_graph;
    std::vector<std::size_t> sizes;
    RunConfig run;
};

std::vector<BenchRow> bench(const Program& program, const BenchConfig& config);
std::string bench_csv(const std::vector<BenchRow>& rows, bool timing);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

int cmd_bench(const BenchConfig& config, std::ostream& out, std::ostream& err);

} // namespace semidl
