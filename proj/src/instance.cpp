#include "semidl/instance.hpp"

#include "lexer.hpp"
#include "semidl/error.hpp"

#include <algorithm>

namespace semidl {

using detail::Lexer;
using detail::Tok;
using detail::Token;

std::size_t Instance::m() const {
    std::size_t total = 0;
    for (const auto& [sym, rel] : relations) total += rel.facts.size();
    return total;
}

const Relation* Instance::relation(std::string_view predicate) const {
    auto it = relations.find(std::string(predicate));
    return it == relations.end() ? nullptr : &it->second;
}

std::optional<ConstId> Instance::constant_id(std::string_view name) const {
    auto it = std::lower_bound(constants.begin(), constants.end(), name);
    if (it == constants.end() || *it != name) return std::nullopt;
    return static_cast<ConstId>(it - constants.begin());
}

Value Instance::lookup(std::string_view predicate, const Tuple& tuple) const {
    if (const Relation* r = relation(predicate)) {
        auto it = r->facts.find(tuple);
        if (it != r->facts.end()) return it->second;
    }
    return semiring.zero();
}

void InstanceBuilder::add(const std::string& predicate, std::vector<std::string> tuple,
                          Value value) {
    semiring_.check(value);
    auto [ar, fresh] = arity_.emplace(predicate, tuple.size());
    if (!fresh && ar->second != tuple.size()) {
        throw ValidationError("arity mismatch for '" + predicate + "': " +
                              std::to_string(ar->second) + " vs " + std::to_string(tuple.size()));
    }
    auto& rel = facts_[predicate];
    auto it = rel.find(tuple);
    if (it == rel.end()) {
        rel.emplace(std::move(tuple), value);
        return;
    }
    std::string shown = predicate + "(";
    for (std::size_t i = 0; i < it->first.size(); ++i) {
        if (i) shown += ",";
        shown += it->first[i];
    }
    warnings_.push_back("duplicate fact " + shown + ") combined with plus");
    it->second = semiring_.plus(it->second, value);
}

Instance InstanceBuilder::build() && {
    Instance inst;
    inst.semiring = semiring_;
    inst.warnings = std::move(warnings_);
    for (auto& [sym, rel] : facts_) {
        std::erase_if(rel, [&](const auto& kv) { return semiring_.is_zero(kv.second); });
        for (const auto& [tuple, v] : rel) {
            inst.constants.insert(inst.constants.end(), tuple.begin(), tuple.end());
        }
    }
    std::sort(inst.constants.begin(), inst.constants.end());
    inst.constants.erase(std::unique(inst.constants.begin(), inst.constants.end()),
                         inst.constants.end());
    for (auto& [sym, rel] : facts_) {
        Relation& out = inst.relations[sym];
        out.arity = arity_.at(sym);
        for (const auto& [tuple, v] : rel) {
            Tuple ids;
            ids.reserve(tuple.size());
            for (const auto& c : tuple) ids.push_back(*inst.constant_id(c));
            out.facts.emplace(std::move(ids), v);
        }
    }
    return inst;
}

Instance parse_facts(std::string_view text, const Semiring& semiring) {
    Lexer lex(text);
    InstanceBuilder builder(semiring);
    while (lex.peek().kind != Tok::end) {
        Token name = lex.expect(Tok::ident, "predicate name");
        lex.expect(Tok::lparen, "'('");
        std::vector<std::string> tuple;
        if (lex.peek().kind != Tok::rparen) {
            for (;;) {
                if (lex.peek().kind != Tok::ident && lex.peek().kind != Tok::string) {
                    lex.fail("expected constant");
                }
                tuple.push_back(lex.next().text);
                if (lex.peek().kind != Tok::comma) break;
                lex.next();
            }
        }
        lex.expect(Tok::rparen, "')' or ','");
        Value value = semiring.one();
        if (lex.peek().kind == Tok::equals) {
            lex.next();
            if (lex.peek().kind == Tok::end) lex.fail("expected annotation literal");
            Token lit = lex.raw_literal();
            try {
                value = semiring.parse_literal(lit.text);
            } catch (const ParseError&) {
                throw;
            } catch (const Error& e) {
                throw ParseError(e.what(), lit.line, lit.column);
            }
        } else {
            if (semiring.kind() != SemiringKind::boolean) {
                lex.fail("expected '=' and an annotation literal");
            }
            lex.expect(Tok::dot, "'.'");
        }
        try {
            builder.add(name.text, std::move(tuple), value);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), name.line, name.column);
        }
    }
    return std::move(builder).build();
}

void check_instance(const Program& program, const Instance& instance) {
    for (const auto& [sym, rel] : instance.relations) {
        if (program.is_idb(sym)) {
            throw ValidationError("symbol '" + sym + "' is an IDB in the program but has facts");
        }
        auto it = program.edb_schema.find(sym);
        if (it != program.edb_schema.end() && it->second != rel.arity) {
            throw ValidationError("arity mismatch for '" + sym + "': program uses " +
                                  std::to_string(it->second) + ", facts use " +
                                  std::to_string(rel.arity));
        }
    }
}

std::vector<std::string> active_domain(const Instance& instance) { return instance.constants; }

} // namespace semidl
