#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace semidl {

/// Index of a variable inside one sum-product query. Head variables come
/// first, in head order; body-only variables follow in order of appearance.
using VarId = std::uint32_t;

struct Atom {
    std::string predicate;
    std::vector<VarId> args; // repeated variables are allowed
    bool idb = false;

    /// Distinct variables of the atom, sorted.
    std::vector<VarId> vars() const;

    bool operator==(const Atom&) const = default;
};

/// ⊕ over the non-head variables of a ⊗-product of atoms.
struct SumProdQuery {
    std::vector<VarId> head;             // always 0 .. arity-1
    std::vector<Atom> atoms;             // non-empty, source order kept
    std::vector<std::string> var_names;  // one per variable id
    std::size_t source_line = 0;

    std::size_t num_vars() const { return var_names.size(); }
    std::size_t idb_atom_count() const;

    /// Structural equality; source_line is ignored.
    bool operator==(const SumProdQuery& o) const {
        return head == o.head && atoms == o.atoms && var_names == o.var_names;
    }
};

/// All bodies of one IDB head symbol, summed.
struct Rule {
    std::string head;
    std::size_t arity = 0;
    std::vector<SumProdQuery> bodies;

    bool operator==(const Rule&) const = default;
};

struct Program {
    std::vector<Rule> rules; // one per IDB symbol, in order of first definition
    std::string target;
    std::map<std::string, std::size_t> edb_schema;
    std::map<std::string, std::size_t> idb_schema;
    std::size_t arity_bound = 0;

    const Rule* rule_for(std::string_view idb) const;
    bool is_idb(std::string_view symbol) const { return idb_schema.contains(std::string(symbol)); }
    /// Total number of bodies; bodies are numbered globally in rule order.
    std::size_t body_count() const;

    bool operator==(const Program&) const = default;
};

/// Parses and validates a program. Rules with the same head symbol are
/// merged into one Rule with several bodies.
Program parse_program(std::string_view text);

/// Concrete syntax that parses back to the same Program.
std::string pretty_print(const Program& program);

struct Classification {
    bool monadic = false;
    bool linear = false;
    bool chain = false;
    bool rulewise_acyclic = false;
    bool rulewise_free_connex = false;
};

Classification classify(const Program& program);

/// True when the body is a chain query T1(x1,x2), T2(x2,x3), ..., Tk(xk,xk+1)
/// (in some atom order) with head (x1, xk+1).
bool is_chain_query(const SumProdQuery& query);

} // namespace semidl
