#pragma once

#include "semidl/program.hpp"
#include "semidl/semiring.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semidl {

/// Index into Instance::constants (the sorted active domain).
using ConstId = std::uint32_t;
using Tuple = std::vector<ConstId>;

struct Relation {
    std::size_t arity = 0;
    std::map<Tuple, Value> facts; // never holds zero
};

/// EDB σ-relations. Tuples that are not stored are implicitly zero.
struct Instance {
    Semiring semiring = Semiring::boolean();
    std::vector<std::string> constants; // sorted, distinct, exactly those in stored facts
    std::map<std::string, Relation> relations;
    std::vector<std::string> warnings;

    /// Total number of stored facts.
    std::size_t m() const;
    /// Active domain size.
    std::size_t n() const { return constants.size(); }

    const Relation* relation(std::string_view predicate) const;
    std::optional<ConstId> constant_id(std::string_view name) const;
    /// Annotation of a ground EDB atom; zero when absent.
    Value lookup(std::string_view predicate, const Tuple& tuple) const;
};

/// Collects facts by constant name and interns them into an Instance.
/// Duplicate tuples are combined with ⊕ (and a warning); zero facts are dropped.
class InstanceBuilder {
public:
    explicit InstanceBuilder(Semiring semiring) : semiring_(std::move(semiring)) {}

    void add(const std::string& predicate, std::vector<std::string> tuple, Value value);
    Instance build() &&;

private:
    Semiring semiring_;
    std::map<std::string, std::size_t> arity_;
    std::map<std::string, std::map<std::vector<std::string>, Value>> facts_;
    std::vector<std::string> warnings_;
};

/// Reads `R(c1,...,ck) = literal.` facts. The literal may be omitted for the
/// boolean semiring (defaults to true). Comments start with `%`.
Instance parse_facts(std::string_view text, const Semiring& semiring);

/// Rejects facts for IDB symbols and arity clashes with the program's EDB schema.
void check_instance(const Program& program, const Instance& instance);

/// Sorted distinct constants of the instance.
std::vector<std::string> active_domain(const Instance& instance);

} // namespace semidl
