#include "semidl/semiring.hpp"

#include "semidl/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace semidl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kClosureLimit = 4096;

const char* kind_name(SemiringKind k) {
    switch (k) {
    case SemiringKind::boolean: return "boolean";
    case SemiringKind::tropical: return "tropical";
    case SemiringKind::naturals: return "naturals";
    case SemiringKind::set: return "set";
    case SemiringKind::access: return "access";
    }
    return "?";
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    while (!s.empty()) {
        auto comma = s.find(',');
        auto item = trim(s.substr(0, comma));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

char access_char(Access a) {
    switch (a) {
    case Access::P: return 'P';
    case Access::C: return 'C';
    case Access::S: return 'S';
    case Access::T: return 'T';
    case Access::Zero: return '0';
    }
    return '?';
}

} // namespace

Value Value::tropical(double d) {
    if (std::isnan(d) || d < 0.0) {
        throw Error("tropical values must be >= 0 or inf");
    }
    if (d == 0.0) d = 0.0; // drop the sign of -0.0
    return {SemiringKind::tropical, std::bit_cast<std::uint64_t>(d)};
}

Semiring Semiring::boolean() {
    return {SemiringKind::boolean, {true, true, true, 1u}};
}

Semiring Semiring::tropical() {
    return {SemiringKind::tropical, {true, true, true, std::nullopt}};
}

Semiring Semiring::naturals() {
    return {SemiringKind::naturals, {false, false, true, std::nullopt}};
}

Semiring Semiring::set(std::vector<std::string> universe) {
    if (universe.empty() || universe.size() > 64) {
        throw Error("set semiring universe must hold between 1 and 64 elements");
    }
    std::set<std::string> seen(universe.begin(), universe.end());
    if (seen.size() != universe.size()) throw Error("set semiring universe has duplicates");
    Semiring s{SemiringKind::set,
               {true, true, universe.size() == 1, static_cast<unsigned>(universe.size())}};
    s.universe_ = std::move(universe);
    return s;
}

Semiring Semiring::access() {
    return {SemiringKind::access, {true, true, true, 4u}};
}

Semiring Semiring::from_token(std::string_view token) {
    token = trim(token);
    if (token == "boolean") return boolean();
    if (token == "tropical") return tropical();
    if (token == "naturals") return naturals();
    if (token == "access") return access();
    if (token.starts_with("set:")) {
        auto body = token.substr(4);
        if (!body.empty() && (body.front() == '{' || body.front() == '<')) body.remove_prefix(1);
        if (!body.empty() && (body.back() == '}' || body.back() == '>')) body.remove_suffix(1);
        return set(split_list(body));
    }
    throw Error("unknown semiring '" + std::string(token) +
                "' (expected boolean | tropical | naturals | set:<k1,...> | access)");
}

std::string Semiring::token() const {
    if (kind_ != SemiringKind::set) return kind_name(kind_);
    std::string out = "set:";
    for (std::size_t i = 0; i < universe_.size(); ++i) {
        if (i) out += ',';
        out += universe_[i];
    }
    return out;
}

Semiring Semiring::with_capabilities(Capabilities caps) const {
    Semiring copy = *this;
    copy.caps_ = caps;
    return copy;
}

Value Semiring::zero() const {
    switch (kind_) {
    case SemiringKind::boolean: return Value::boolean(false);
    case SemiringKind::tropical: return Value::tropical(kInf);
    case SemiringKind::naturals: return Value::natural(0);
    case SemiringKind::set: return Value::set(0);
    case SemiringKind::access: return Value::access(Access::Zero);
    }
    return {};
}

Value Semiring::one() const {
    switch (kind_) {
    case SemiringKind::boolean: return Value::boolean(true);
    case SemiringKind::tropical: return Value::tropical(0.0);
    case SemiringKind::naturals: return Value::natural(1);
    case SemiringKind::set:
        return Value::set(universe_.size() == 64 ? ~std::uint64_t{0}
                                                 : (std::uint64_t{1} << universe_.size()) - 1);
    case SemiringKind::access: return Value::access(Access::P);
    }
    return {};
}

void Semiring::check(const Value& v) const {
    if (v.kind() != kind_) {
        throw TypeMismatch(std::string("value of semiring '") + kind_name(v.kind()) +
                           "' used with semiring '" + kind_name(kind_) + "'");
    }
    if (kind_ == SemiringKind::set && universe_.size() < 64 &&
        (v.as_set() >> universe_.size()) != 0) {
        throw TypeMismatch("set value has elements outside the universe of " + token());
    }
}

Value Semiring::plus(const Value& a, const Value& b) const {
    check(a);
    check(b);
    switch (kind_) {
    case SemiringKind::boolean: return Value::boolean(a.as_bool() || b.as_bool());
    case SemiringKind::tropical: return Value::tropical(std::min(a.as_tropical(), b.as_tropical()));
    case SemiringKind::naturals: {
        std::uint64_t r = 0;
        if (__builtin_add_overflow(a.as_natural(), b.as_natural(), &r)) {
            throw Error("naturals overflow in plus");
        }
        return Value::natural(r);
    }
    case SemiringKind::set: return Value::set(a.as_set() | b.as_set());
    case SemiringKind::access: return Value::access(std::min(a.as_access(), b.as_access()));
    }
    return {};
}

Value Semiring::times(const Value& a, const Value& b) const {
    check(a);
    check(b);
    switch (kind_) {
    case SemiringKind::boolean: return Value::boolean(a.as_bool() && b.as_bool());
    case SemiringKind::tropical: return Value::tropical(a.as_tropical() + b.as_tropical());
    case SemiringKind::naturals: {
        std::uint64_t r = 0;
        if (__builtin_mul_overflow(a.as_natural(), b.as_natural(), &r)) {
            throw Error("naturals overflow in times");
        }
        return Value::natural(r);
    }
    case SemiringKind::set: return Value::set(a.as_set() & b.as_set());
    case SemiringKind::access: return Value::access(std::max(a.as_access(), b.as_access()));
    }
    return {};
}

bool Semiring::leq(const Value& a, const Value& b) const {
    check(a);
    check(b);
    switch (kind_) {
    case SemiringKind::boolean: return !a.as_bool() || b.as_bool();
    case SemiringKind::tropical: return b.as_tropical() <= a.as_tropical();
    case SemiringKind::naturals: return a.as_natural() <= b.as_natural();
    case SemiringKind::set: return (a.as_set() & ~b.as_set()) == 0;
    case SemiringKind::access: return b.as_access() <= a.as_access();
    }
    return false;
}

Value Semiring::parse_literal(std::string_view text) const {
    text = trim(text);
    auto bad = [&]() -> Error {
        return Error("annotation '" + std::string(text) + "' is not a " + token() + " literal");
    };
    switch (kind_) {
    case SemiringKind::boolean:
        if (text == "true") return Value::boolean(true);
        if (text == "false") return Value::boolean(false);
        throw bad();
    case SemiringKind::tropical: {
        if (text == "inf") return zero();
        double d = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(d) || d < 0) {
            throw bad();
        }
        return Value::tropical(d);
    }
    case SemiringKind::naturals: {
        std::uint64_t n = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
        if (ec != std::errc{} || ptr != text.data() + text.size()) throw bad();
        return Value::natural(n);
    }
    case SemiringKind::set: {
        if (text.size() < 2 || text.front() != '{' || text.back() != '}') throw bad();
        std::uint64_t mask = 0;
        for (const auto& item : split_list(text.substr(1, text.size() - 2))) {
            auto it = std::find(universe_.begin(), universe_.end(), item);
            if (it == universe_.end()) {
                throw Error("element '" + item + "' is not in the set universe");
            }
            mask |= std::uint64_t{1} << (it - universe_.begin());
        }
        return Value::set(mask);
    }
    case SemiringKind::access:
        if (text == "P") return Value::access(Access::P);
        if (text == "C") return Value::access(Access::C);
        if (text == "S") return Value::access(Access::S);
        if (text == "T") return Value::access(Access::T);
        if (text == "0") return Value::access(Access::Zero);
        throw bad();
    }
    throw bad();
}

std::string Semiring::format(const Value& v) const {
    check(v);
    switch (kind_) {
    case SemiringKind::boolean: return v.as_bool() ? "true" : "false";
    case SemiringKind::tropical: {
        double d = v.as_tropical();
        if (std::isinf(d)) return "inf";
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
        return std::string(buf, ptr);
    }
    case SemiringKind::naturals: return std::to_string(v.as_natural());
    case SemiringKind::set: {
        std::string out = "{";
        bool first = true;
        for (std::size_t i = 0; i < universe_.size(); ++i) {
            if (v.as_set() >> i & 1u) {
                if (!first) out += ',';
                out += universe_[i];
                first = false;
            }
        }
        return out + "}";
    }
    case SemiringKind::access: return std::string(1, access_char(v.as_access()));
    }
    return "?";
}

bool AxiomReport::all_passed() const {
    return std::all_of(laws.begin(), laws.end(), [](const LawResult& l) { return l.passed; });
}

const LawResult* AxiomReport::find(std::string_view law) const {
    for (const auto& l : laws) {
        if (l.law == law) return &l;
    }
    return nullptr;
}

namespace {

class LawChecker {
public:
    LawChecker(const Semiring& s, std::span<const Value> samples) : s_(s), xs_(samples) {}

    void unary(const std::string& name, const std::function<bool(const Value&)>& law) {
        LawResult r{name, true, {}};
        for (const auto& a : xs_) {
            if (!law(a)) {
                r.passed = false;
                r.witness = "a=" + s_.format(a);
                break;
            }
        }
        report_.laws.push_back(std::move(r));
    }

    void binary(const std::string& name,
                const std::function<bool(const Value&, const Value&)>& law) {
        LawResult r{name, true, {}};
        for (const auto& a : xs_) {
            for (const auto& b : xs_) {
                if (!law(a, b)) {
                    r.passed = false;
                    r.witness = "a=" + s_.format(a) + ", b=" + s_.format(b);
                    goto done;
                }
            }
        }
    done:
        report_.laws.push_back(std::move(r));
    }

    void ternary(const std::string& name,
                 const std::function<bool(const Value&, const Value&, const Value&)>& law) {
        LawResult r{name, true, {}};
        for (const auto& a : xs_) {
            for (const auto& b : xs_) {
                for (const auto& c : xs_) {
                    if (!law(a, b, c)) {
                        r.passed = false;
                        r.witness = "a=" + s_.format(a) + ", b=" + s_.format(b) +
                                    ", c=" + s_.format(c);
                        goto done;
                    }
                }
            }
        }
    done:
        report_.laws.push_back(std::move(r));
    }

    void push(LawResult r) { report_.laws.push_back(std::move(r)); }
    AxiomReport take() { return std::move(report_); }

private:
    const Semiring& s_;
    std::span<const Value> xs_;
    AxiomReport report_;
};

// Definitional natural order: a ⊑ b iff a ⊕ z = b for some z drawn from the
// sample, the two operands, and (for naturals) the difference b - a.
bool definitional_leq(const Semiring& s, std::span<const Value> samples, const Value& a,
                      const Value& b) {
    std::vector<Value> candidates(samples.begin(), samples.end());
    candidates.push_back(a);
    candidates.push_back(b);
    if (s.kind() == SemiringKind::naturals && a.as_natural() <= b.as_natural()) {
        candidates.push_back(Value::natural(b.as_natural() - a.as_natural()));
    }
    return std::any_of(candidates.begin(), candidates.end(),
                       [&](const Value& z) { return s.plus(a, z) == b; });
}

LawResult rank_law(const Semiring& s, std::span<const Value> samples, unsigned rank) {
    LawResult r{"finite_rank", true, {}};
    // Close the sample under ⊕, then measure the longest strictly increasing chain.
    std::vector<Value> closure(samples.begin(), samples.end());
    closure.push_back(s.zero());
    std::map<std::pair<SemiringKind, std::uint64_t>, std::size_t> index;
    std::vector<Value> uniq;
    for (const auto& v : closure) {
        if (index.emplace(std::pair{v.kind(), v.raw()}, uniq.size()).second) uniq.push_back(v);
    }
    for (std::size_t i = 0; i < uniq.size(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            Value w = s.plus(uniq[i], uniq[j]);
            if (index.emplace(std::pair{w.kind(), w.raw()}, uniq.size()).second) {
                uniq.push_back(w);
                if (uniq.size() > kClosureLimit) {
                    r.passed = false;
                    r.witness = "plus-closure of the sample exceeds " +
                                std::to_string(kClosureLimit) + " values";
                    return r;
                }
            }
        }
    }
    const std::size_t n = uniq.size();
    std::vector<int> longest(n, -1);
    std::function<int(std::size_t)> depth = [&](std::size_t v) -> int {
        if (longest[v] >= 0) return longest[v];
        int best = 0;
        for (std::size_t u = 0; u < n; ++u) {
            if (u != v && s.leq(uniq[v], uniq[u]) && !(uniq[u] == uniq[v])) {
                best = std::max(best, 1 + depth(u));
            }
        }
        return longest[v] = best;
    };
    int worst = 0;
    std::size_t worst_from = 0;
    for (std::size_t v = 0; v < n; ++v) {
        if (depth(v) > worst) {
            worst = depth(v);
            worst_from = v;
        }
    }
    if (worst > static_cast<int>(rank)) {
        r.passed = false;
        r.witness = "strict chain of length " + std::to_string(worst) + " from " +
                    s.format(uniq[worst_from]);
    }
    return r;
}

} // namespace

AxiomReport axiom_suite(const Semiring& s, std::span<const Value> samples) {
    for (const auto& v : samples) s.check(v);
    const Value zero = s.zero();
    const Value one = s.one();
    const auto contains = [&](const Value& v) {
        return std::find(samples.begin(), samples.end(), v) != samples.end();
    };
    if (!contains(zero) || !contains(one)) {
        throw Error("axiom suite samples must include zero and one");
    }

    LawChecker c(s, samples);
    c.ternary("plus_associative", [&](auto& a, auto& b, auto& x) {
        return s.plus(s.plus(a, b), x) == s.plus(a, s.plus(b, x));
    });
    c.binary("plus_commutative", [&](auto& a, auto& b) { return s.plus(a, b) == s.plus(b, a); });
    c.unary("plus_identity", [&](auto& a) { return s.plus(zero, a) == a && s.plus(a, zero) == a; });
    c.ternary("times_associative", [&](auto& a, auto& b, auto& x) {
        return s.times(s.times(a, b), x) == s.times(a, s.times(b, x));
    });
    c.binary("times_commutative",
             [&](auto& a, auto& b) { return s.times(a, b) == s.times(b, a); });
    c.unary("times_identity",
            [&](auto& a) { return s.times(one, a) == a && s.times(a, one) == a; });
    c.ternary("distributive", [&](auto& a, auto& b, auto& x) {
        return s.times(a, s.plus(b, x)) == s.plus(s.times(a, b), s.times(a, x)) &&
               s.times(s.plus(b, x), a) == s.plus(s.times(b, a), s.times(x, a));
    });
    c.unary("annihilation",
            [&](auto& a) { return s.times(a, zero) == zero && s.times(zero, a) == zero; });
    c.unary("order_reflexive", [&](auto& a) { return s.leq(a, a); });
    c.binary("order_antisymmetric",
             [&](auto& a, auto& b) { return !(s.leq(a, b) && s.leq(b, a)) || a == b; });
    c.ternary("order_transitive", [&](auto& a, auto& b, auto& x) {
        return !(s.leq(a, b) && s.leq(b, x)) || s.leq(a, x);
    });
    c.binary("order_matches_definition", [&](auto& a, auto& b) {
        return s.leq(a, b) == definitional_leq(s, samples, a, b);
    });
    c.binary("order_compatible_with_plus", [&](auto& a, auto& b) { return s.leq(a, s.plus(a, b)); });
    c.unary("zero_is_minimum", [&](auto& a) { return s.leq(zero, a); });

    const auto& caps = s.capabilities();
    if (caps.is_dioid) {
        c.unary("plus_idempotent", [&](auto& a) { return s.plus(a, a) == a; });
    }
    if (caps.is_absorptive) {
        c.unary("one_absorbs", [&](auto& a) { return s.plus(one, a) == one; });
        c.binary("times_decreasing", [&](auto& a, auto& b) { return s.leq(s.times(a, b), a); });
        // Over a naturally ordered dioid: 1 ⊕ a = 1 for all a iff a ⊗ b ⊑ a for all a, b.
        bool absorbs = true;
        bool decreasing = true;
        for (const auto& a : samples) {
            absorbs = absorbs && s.plus(one, a) == one;
            for (const auto& b : samples) decreasing = decreasing && s.leq(s.times(a, b), a);
        }
        c.push({"absorptive_iff_times_decreasing", absorbs == decreasing,
                absorbs == decreasing ? "" : "the two characterizations disagree on the sample"});
    }
    if (caps.is_total_order) {
        c.binary("order_total", [&](auto& a, auto& b) { return s.leq(a, b) || s.leq(b, a); });
    }
    if (caps.finite_rank) c.push(rank_law(s, samples, *caps.finite_rank));
    return c.take();
}

std::vector<Value> default_samples(const Semiring& s) {
    switch (s.kind()) {
    case SemiringKind::boolean: return {Value::boolean(false), Value::boolean(true)};
    case SemiringKind::tropical:
        return {s.zero(), Value::tropical(0), Value::tropical(1), Value::tropical(2),
                Value::tropical(3), Value::tropical(5)};
    case SemiringKind::naturals:
        return {Value::natural(0), Value::natural(1), Value::natural(2), Value::natural(3),
                Value::natural(5), Value::natural(7)};
    case SemiringKind::set: {
        std::vector<Value> out{s.zero(), s.one()};
        const std::size_t k = s.universe().size();
        for (std::uint64_t mask = 1; out.size() < 6 && mask < (k >= 6 ? 64u : (1u << k)); ++mask) {
            Value v = Value::set(mask);
            if (!(v == s.one())) out.push_back(v);
        }
        return out;
    }
    case SemiringKind::access:
        return {Value::access(Access::Zero), Value::access(Access::P), Value::access(Access::C),
                Value::access(Access::S), Value::access(Access::T)};
    }
    return {};
}

} // namespace semidl
