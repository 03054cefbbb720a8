#pragma once

#include "semidl/grounding.hpp"
#include "semidl/instance.hpp"
#include "semidl/program.hpp"
#include "semidl/semiring.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace semidl {

using Node = std::uint32_t;

enum class Op : std::uint8_t { plus, times };

/// y = a ⊕ b or y = a ⊗ b.
struct CanonicalEquation {
    Node lhs = 0;
    Op op = Op::plus;
    Node a = 0;
    Node b = 0;
};

/// Equations with exactly two operands each. Nodes 0 and 1 are the constant
/// coefficients zero and one; then come the grounding's atoms in id order,
/// then auxiliaries.
class TwoCanonicalSystem {
public:
    static constexpr Node zero_node = 0;
    static constexpr Node one_node = 1;

    struct NodeInfo {
        bool coefficient = false;
        Value value;                 // coefficients only
        std::optional<AtomId> atom;  // set for nodes that stand for a grounding atom
    };

    const Semiring& semiring() const { return semiring_; }
    const std::vector<NodeInfo>& nodes() const { return nodes_; }
    const std::vector<CanonicalEquation>& equations() const { return equations_; }
    /// Equations whose right-hand side mentions the node, once per occurrence.
    const std::vector<std::vector<std::uint32_t>>& dependents() const { return deps_; }
    /// Index of the defining equation; nullopt for coefficients.
    std::optional<std::uint32_t> definition(Node n) const;
    Node node_of(AtomId a) const { return atom_node_[a]; }
    std::size_t atom_count() const { return atom_node_.size(); }
    std::size_t variable_count() const { return equations_.size(); }
    /// Three symbols per equation.
    std::size_t size() const { return 3 * equations_.size(); }

    std::string dump(const Grounding& g) const;

private:
    friend TwoCanonicalSystem to_two_canonical(const Grounding& g);
    friend TwoCanonicalSystem make_canonical(const Semiring& semiring,
                                             std::vector<NodeInfo> nodes,
                                             std::vector<CanonicalEquation> equations);

    explicit TwoCanonicalSystem(Semiring s) : semiring_(std::move(s)) {}
    void index();

    Semiring semiring_;
    std::vector<NodeInfo> nodes_;
    std::vector<CanonicalEquation> equations_;
    std::vector<std::int64_t> def_;
    std::vector<std::vector<std::uint32_t>> deps_;
    std::vector<Node> atom_node_;
};

/// Length-1 monomials are used directly inside sums (or become m ⊗ 1 when
/// alone); longer products and sums nest to the right through fresh
/// auxiliaries; an empty sum becomes 0 ⊕ 0.
TwoCanonicalSystem to_two_canonical(const Grounding& g);

/// Builds a system directly; `nodes` must start with the zero and one
/// constants and every non-coefficient node needs exactly one equation.
TwoCanonicalSystem make_canonical(const Semiring& semiring,
                                  std::vector<TwoCanonicalSystem::NodeInfo> nodes,
                                  std::vector<CanonicalEquation> equations);

enum class SolverPath { rank, absorptive, kleene };

std::string_view solver_path_token(SolverPath p);

struct SolverStats {
    std::size_t popped = 0;
    std::size_t equation_visits = 0;
    std::size_t semiring_ops = 0;
    std::size_t pq_ops = 0;
    std::size_t iterations = 0;
    std::size_t updates = 0;
    std::vector<std::uint32_t> visits; // per canonical equation
};

struct Solution {
    std::vector<Value> h;     // per grounding atom
    std::vector<Value> nodes; // per canonical node (canonical solvers only)
    SolverStats stats;
    SolverPath path = SolverPath::kleene;
    bool converged = true;
    std::vector<std::pair<Node, Value>> pops; // absorptive: pop sequence
};

/// Instrumentation hooks used by the property tests.
struct SolveObserver {
    /// After each change of h(node); h is the full current state.
    std::function<void(Node node, const std::vector<Value>& h)> on_update;
    /// After each Kleene round t (1-based) with the new state.
    std::function<void(std::size_t t, const std::vector<Value>& h)> on_round;
};

/// Worklist propagation for semirings of finite rank.
Solution solve_rank(const TwoCanonicalSystem& sys, const SolveObserver* observer = nullptr);

/// Dijkstra-style propagation for absorptive semirings with a total order.
Solution solve_absorptive(const TwoCanonicalSystem& sys, const SolveObserver* observer = nullptr);

std::size_t default_max_iters(std::size_t variables);

/// Simultaneous iteration on the canonical system from bottom.
Solution kleene(const TwoCanonicalSystem& sys, std::optional<std::size_t> max_iters = std::nullopt,
                const SolveObserver* observer = nullptr);

/// Simultaneous iteration directly on the polynomial equations.
Solution kleene(const Grounding& g, std::optional<std::size_t> max_iters = std::nullopt);

struct SolveOptions {
    unsigned rank_threshold = 64;
    std::optional<std::size_t> max_iters;
};

Solution solve_auto(const TwoCanonicalSystem& sys, const SolveOptions& options = {});

enum class SolverChoice { automatic, rank, absorptive, kleene };

SolverChoice parse_solver(std::string_view token);

/// Dispatches to one solver; `kleene` runs on the canonical system.
Solution solve(const TwoCanonicalSystem& sys, SolverChoice choice, const SolveOptions& options = {});

using RelationValues = std::map<Tuple, Value>;

/// Nonzero tuples of one predicate in a solution.
RelationValues relation_values(const Grounding& g, const std::vector<Value>& h,
                               std::string_view predicate);

struct ProgramSolution {
    bool converged = true;
    std::size_t iterations = 0;
    std::map<std::string, RelationValues> relations; // nonzero tuples per IDB
};

/// Grounding-free reference: applies every rule to the current IDB relations
/// until nothing changes.
ProgramSolution kleene_program(const Program& program, const Instance& instance,
                               std::optional<std::size_t> max_iters = std::nullopt);

} // namespace semidl
