#pragma once

#include "semidl/decomposition.hpp"
#include "semidl/instance.hpp"
#include "semidl/program.hpp"
#include "semidl/semiring.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace semidl {

using AtomId = std::uint32_t;
using PredId = std::uint32_t;

enum class GroundKind { coefficient, variable };

struct GroundAtom {
    PredId predicate = 0;
    Tuple tuple;
    GroundKind kind = GroundKind::variable;
    Value value; // coefficient annotation; unused for variables
};

using Monomial = std::vector<AtomId>;

struct Equation {
    AtomId lhs = 0;
    std::vector<Monomial> rhs; // empty sum means zero
};

struct TupleHash {
    std::size_t operator()(const Tuple& t) const noexcept {
        std::size_t h = t.size();
        for (ConstId c : t) h ^= c + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

/// Which construction grounded one rule body.
struct BodyReport {
    std::size_t body_id = 0; // global body index
    std::string head;
    std::string strategy;
    std::string join_tree; // rendered tree, empty for naive
};

/// System of polynomial equations over interned ground atoms. Equations are
/// kept in creation order; |G| is tracked incrementally.
class Grounding {
public:
    static constexpr std::size_t default_cap = 20'000'000;

    Grounding(Semiring semiring, std::vector<std::string> constants,
              std::size_t cap = default_cap);

    const Semiring& semiring() const { return semiring_; }
    const std::vector<std::string>& constants() const { return constants_; }

    PredId predicate(std::string_view name);
    std::optional<PredId> find_predicate(std::string_view name) const;
    const std::string& predicate_name(PredId p) const { return predicates_[p]; }

    AtomId coefficient(PredId p, const Tuple& t, Value v);
    AtomId variable(PredId p, const Tuple& t);
    std::optional<AtomId> find(PredId p, const Tuple& t) const;
    /// Interned atoms of one predicate, ascending ids.
    std::vector<AtomId> atoms_of(PredId p) const;

    /// Makes sure `lhs` has an equation (empty if new); returns its index.
    std::size_t define(AtomId lhs);
    void add_monomial(AtomId lhs, Monomial m);
    std::optional<std::size_t> equation_of(AtomId a) const;

    /// Adds empty equations for variables that occur only on right-hand sides.
    void close();

    const std::vector<GroundAtom>& atoms() const { return atoms_; }
    const GroundAtom& atom(AtomId a) const { return atoms_[a]; }
    const std::vector<Equation>& equations() const { return equations_; }
    std::size_t size() const { return size_; }
    std::size_t recompute_size() const;
    std::size_t cap() const { return cap_; }

    /// `x_T_a_b` for variables, `e_R_a_b` for coefficients.
    std::string name(AtomId a) const;
    /// `T(a,b)`.
    std::string display(AtomId a) const;

    std::vector<BodyReport> report;

    /// Test hook: changes one coefficient's value in place.
    void corrupt_coefficient(AtomId a, Value v) { atoms_[a].value = v; }

private:
    AtomId intern(PredId p, const Tuple& t, GroundKind kind, Value v);
    void grow(std::size_t by);

    Semiring semiring_;
    std::vector<std::string> constants_;
    std::size_t cap_;
    std::vector<std::string> predicates_;
    std::unordered_map<std::string, PredId> predicate_ids_;
    std::vector<std::unordered_map<Tuple, AtomId, TupleHash>> index_;
    std::vector<GroundAtom> atoms_;
    std::vector<std::int64_t> equation_index_;
    std::vector<Equation> equations_;
    std::size_t size_ = 0;
};

enum class Strategy { naive, acyclic, free_connex, linear, automatic };

Strategy parse_strategy(std::string_view token);
std::string_view strategy_token(Strategy s);

struct GroundOptions {
    Strategy strategy = Strategy::automatic;
    std::size_t cap = Grounding::default_cap;
    bool prune_unreachable = false;
};

/// All assignments of active-domain constants; equations for every ground
/// IDB head over the domain.
Grounding ground_naive(const Program& program, const Instance& instance,
                       std::size_t cap = Grounding::default_cap);

/// Join-tree grounding of one body rooted at `root`. Fresh symbols are named
/// `__u_r<body_id>_e<parent>_<child>`.
void ground_acyclic_body(const Program& program, const SumProdQuery& body,
                         const std::string& head, std::size_t body_id, const Instance& instance,
                         const JoinTree& tree, NodeId root, Grounding& sink);

/// Path-to-chain construction for a linear acyclic body with IDB arity at
/// most 2. Throws StrategyNotApplicable when the body does not qualify.
void ground_linear_body(const Program& program, const SumProdQuery& body,
                        const std::string& head, std::size_t body_id, const Instance& instance,
                        Grounding& sink);

/// Throws CyclicRule for a cyclic body under `acyclic` and
/// StrategyNotApplicable when `free_connex` or `linear` cannot handle a body.
Grounding ground_program(const Program& program, const Instance& instance,
                         const GroundOptions& options = {});

/// Drops variables that are zero for structural reasons (no monomial made
/// only of coefficients and live variables) and every monomial using them.
Grounding prune_unreachable(const Grounding& g);

std::string dump_text(const Grounding& g);
std::string dump_json(const Grounding& g);

} // namespace semidl
