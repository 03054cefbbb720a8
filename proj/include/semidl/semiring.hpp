#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semidl {

enum class SemiringKind : std::uint8_t { boolean, tropical, naturals, set, access };

/// Clearance levels of the access-control semiring. Enumerator order is the
/// clearance chain P < C < S < T < 0 used by min (plus) and max (times).
enum class Access : std::uint8_t { P = 0, C = 1, S = 2, T = 3, Zero = 4 };

/// A scalar annotation from one of the shipped semirings.
///
/// The payload is a single 64-bit word: a bool, the bit pattern of a
/// non-negative double (tropical, +inf allowed), an unsigned count, a bit mask
/// over the set universe, or an Access level. Two values are equal iff kind
/// and payload match; tropical values are normalized so that bitwise equality
/// coincides with numeric equality.
class Value {
public:
    Value() = default;

    static Value boolean(bool b) { return {SemiringKind::boolean, b ? 1u : 0u}; }
    static Value tropical(double d);
    static Value natural(std::uint64_t n) { return {SemiringKind::naturals, n}; }
    static Value set(std::uint64_t mask) { return {SemiringKind::set, mask}; }
    static Value access(Access a) { return {SemiringKind::access, static_cast<std::uint64_t>(a)}; }

    SemiringKind kind() const noexcept { return kind_; }
    bool as_bool() const noexcept { return word_ != 0; }
    double as_tropical() const noexcept { return std::bit_cast<double>(word_); }
    std::uint64_t as_natural() const noexcept { return word_; }
    std::uint64_t as_set() const noexcept { return word_; }
    Access as_access() const noexcept { return static_cast<Access>(word_); }
    std::uint64_t raw() const noexcept { return word_; }

    friend bool operator==(const Value&, const Value&) = default;

private:
    Value(SemiringKind k, std::uint64_t w) : kind_(k), word_(w) {}

    SemiringKind kind_ = SemiringKind::boolean;
    std::uint64_t word_ = 0;
};

struct Capabilities {
    bool is_dioid = false;
    bool is_absorptive = false;
    bool is_total_order = false;
    std::optional<unsigned> finite_rank;
};

/// Descriptor of a commutative, naturally ordered semiring.
///
/// Shipped instances:
///   boolean   ({false,true}, or, and, false, true)       dioid, absorptive, total, rank 1
///   tropical  (R+ u {inf}, min, +, inf, 0)                dioid, absorptive, total
///   naturals  (N, +, *, 0, 1)                             no rank; Kleene iteration only
///   set:K     (2^K, union, intersection, {}, K)           dioid, absorptive, rank |K|
///   access    ({P,C,S,T,0}, min, max, 0, P)               dioid, absorptive, total, rank 4
///
/// All instances are assumed omega-continuous; that assumption is documented
/// here, not checked.
class Semiring {
public:
    static Semiring boolean();
    static Semiring tropical();
    static Semiring naturals();
    static Semiring set(std::vector<std::string> universe);
    static Semiring access();

    /// Parses `boolean | tropical | naturals | set:k1,k2,... | access`.
    static Semiring from_token(std::string_view token);

    SemiringKind kind() const noexcept { return kind_; }
    std::string token() const;
    const Capabilities& capabilities() const noexcept { return caps_; }
    const std::vector<std::string>& universe() const noexcept { return universe_; }

    /// Same operations, different declared capabilities. Used to probe the
    /// axiom suite with wrong declarations.
    Semiring with_capabilities(Capabilities caps) const;

    Value zero() const;
    Value one() const;
    bool is_zero(const Value& v) const { return v == zero(); }

    Value plus(const Value& a, const Value& b) const;
    Value times(const Value& a, const Value& b) const;
    /// Natural order: a ⊑ b iff a ⊕ z = b for some z.
    bool leq(const Value& a, const Value& b) const;

    /// Reads an annotation literal (`true`, `3`, `inf`, `{a,b}`, `S`, ...).
    Value parse_literal(std::string_view text) const;
    std::string format(const Value& v) const;

    /// Throws TypeMismatch unless v belongs to this instance.
    void check(const Value& v) const;

private:
    Semiring(SemiringKind kind, Capabilities caps) : kind_(kind), caps_(caps) {}

    SemiringKind kind_;
    Capabilities caps_;
    std::vector<std::string> universe_;
};

struct LawResult {
    std::string law;
    bool passed = true;
    std::string witness;
};

struct AxiomReport {
    std::vector<LawResult> laws;

    bool all_passed() const;
    const LawResult* find(std::string_view law) const;
};

/// Checks the semiring laws (and every declared capability) exhaustively
/// over all sampled pairs and triples. Samples must contain zero and one.
AxiomReport axiom_suite(const Semiring& semiring, std::span<const Value> samples);

/// A small exhaustive sample (at most six values) for each shipped instance.
std::vector<Value> default_samples(const Semiring& semiring);

} // namespace semidl
