#include "semidl/program.hpp"

#include "lexer.hpp"
#include "semidl/error.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace semidl {

using detail::Lexer;
using detail::Tok;
using detail::Token;

std::vector<VarId> Atom::vars() const {
    std::vector<VarId> v = args;
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::size_t SumProdQuery::idb_atom_count() const {
    return static_cast<std::size_t>(
        std::count_if(atoms.begin(), atoms.end(), [](const Atom& a) { return a.idb; }));
}

const Rule* Program::rule_for(std::string_view idb) const {
    for (const auto& r : rules) {
        if (r.head == idb) return &r;
    }
    return nullptr;
}

std::size_t Program::body_count() const {
    std::size_t n = 0;
    for (const auto& r : rules) n += r.bodies.size();
    return n;
}

namespace {

struct RawAtom {
    std::string predicate;
    std::vector<std::string> args;
    std::size_t line = 0;
    std::size_t column = 0;
};

struct RawRule {
    RawAtom head;
    std::vector<RawAtom> body;
};

RawAtom parse_atom(Lexer& lex) {
    Token name = lex.expect(Tok::ident, "predicate name");
    RawAtom atom{name.text, {}, name.line, name.column};
    lex.expect(Tok::lparen, "'('");
    if (lex.peek().kind != Tok::rparen) {
        for (;;) {
            if (lex.peek().kind == Tok::string) {
                lex.fail("constants are not allowed in rules (use an identity EDB)");
            }
            atom.args.push_back(lex.expect(Tok::ident, "variable").text);
            if (lex.peek().kind != Tok::comma) break;
            lex.next();
        }
    }
    lex.expect(Tok::rparen, "')' or ','");
    return atom;
}

void note_arity(std::map<std::string, std::size_t>& arity, const RawAtom& a) {
    auto [it, fresh] = arity.emplace(a.predicate, a.args.size());
    if (!fresh && it->second != a.args.size()) {
        throw ValidationError("line " + std::to_string(a.line) + ": arity mismatch for '" +
                              a.predicate + "': used with " + std::to_string(it->second) +
                              " and " + std::to_string(a.args.size()) + " arguments");
    }
}

SumProdQuery canonicalize(const RawRule& raw, const Program& program) {
    SumProdQuery q;
    q.source_line = raw.head.line;
    std::map<std::string, VarId> ids;
    for (const auto& v : raw.head.args) {
        if (!ids.emplace(v, static_cast<VarId>(q.var_names.size())).second) {
            throw ValidationError("line " + std::to_string(raw.head.line) + ": head variable '" +
                                  v + "' repeated in " + raw.head.predicate);
        }
        q.var_names.push_back(v);
        q.head.push_back(static_cast<VarId>(q.head.size()));
    }
    std::set<std::string> in_body;
    for (const auto& ra : raw.body) {
        Atom atom{ra.predicate, {}, program.is_idb(ra.predicate)};
        for (const auto& v : ra.args) {
            auto [it, fresh] = ids.emplace(v, static_cast<VarId>(q.var_names.size()));
            if (fresh) q.var_names.push_back(v);
            atom.args.push_back(it->second);
            in_body.insert(v);
        }
        q.atoms.push_back(std::move(atom));
    }
    for (const auto& v : raw.head.args) {
        if (!in_body.contains(v)) {
            throw ValidationError("line " + std::to_string(raw.head.line) +
                                  ": unsafe rule, head variable '" + v +
                                  "' does not occur in the body");
        }
    }
    return q;
}

} // namespace

Program parse_program(std::string_view text) {
    Lexer lex(text);
    std::vector<RawRule> raw;
    std::optional<Token> target;
    while (lex.peek().kind != Tok::end) {
        if (lex.peek().kind == Tok::directive) {
            Token d = lex.next();
            if (d.text != "@target") {
                throw ParseError("unknown directive '" + d.text + "'", d.line, d.column);
            }
            Token sym = lex.expect(Tok::ident, "target predicate");
            lex.expect(Tok::dot, "'.'");
            if (target) {
                throw ParseError("duplicate @target declaration", d.line, d.column);
            }
            target = sym;
            continue;
        }
        RawRule r;
        r.head = parse_atom(lex);
        lex.expect(Tok::turnstile, "':-'");
        r.body.push_back(parse_atom(lex));
        while (lex.peek().kind == Tok::comma) {
            lex.next();
            r.body.push_back(parse_atom(lex));
        }
        lex.expect(Tok::dot, "'.' at end of rule");
        raw.push_back(std::move(r));
    }

    Program p;
    std::map<std::string, std::size_t> arity;
    for (const auto& r : raw) {
        note_arity(arity, r.head);
        p.idb_schema[r.head.predicate] = r.head.args.size();
    }
    for (const auto& r : raw) {
        for (const auto& a : r.body) {
            note_arity(arity, a);
            if (!p.idb_schema.contains(a.predicate)) p.edb_schema[a.predicate] = a.args.size();
        }
    }
    for (const auto& [sym, k] : p.idb_schema) p.arity_bound = std::max(p.arity_bound, k);

    if (!target) throw ValidationError("missing @target declaration");
    if (!p.idb_schema.contains(target->text)) {
        throw ValidationError("line " + std::to_string(target->line) + ": @target '" +
                              target->text + "' is not an IDB predicate");
    }
    p.target = target->text;

    for (const auto& r : raw) {
        SumProdQuery q = canonicalize(r, p);
        auto it = std::find_if(p.rules.begin(), p.rules.end(),
                               [&](const Rule& x) { return x.head == r.head.predicate; });
        if (it == p.rules.end()) {
            p.rules.push_back(Rule{r.head.predicate, r.head.args.size(), {}});
            it = std::prev(p.rules.end());
        }
        it->bodies.push_back(std::move(q));
    }
    return p;
}

std::string pretty_print(const Program& program) {
    std::ostringstream out;
    auto atom = [&](const std::string& pred, const std::vector<VarId>& args,
                    const SumProdQuery& q) {
        out << pred << '(';
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i) out << ", ";
            out << q.var_names[args[i]];
        }
        out << ')';
    };
    for (const auto& rule : program.rules) {
        for (const auto& body : rule.bodies) {
            atom(rule.head, body.head, body);
            out << " :- ";
            for (std::size_t i = 0; i < body.atoms.size(); ++i) {
                if (i) out << ", ";
                atom(body.atoms[i].predicate, body.atoms[i].args, body);
            }
            out << ".\n";
        }
    }
    out << "@target " << program.target << ".\n";
    return out.str();
}

bool is_chain_query(const SumProdQuery& q) {
    if (q.head.size() != 2 || q.atoms.empty()) return false;
    for (const auto& a : q.atoms) {
        if (a.args.size() != 2) return false;
    }
    // Search for an atom order forming a path head[0] -> ... -> head[1] that
    // visits pairwise distinct variables.
    const std::size_t k = q.atoms.size();
    std::vector<bool> used(k, false);
    std::vector<bool> seen(q.num_vars(), false);
    auto walk = [&](auto&& self, VarId at, std::size_t placed) -> bool {
        if (placed == k) return at == q.head[1];
        for (std::size_t i = 0; i < k; ++i) {
            const auto& a = q.atoms[i];
            if (used[i] || a.args[0] != at || seen[a.args[1]]) continue;
            used[i] = true;
            seen[a.args[1]] = true;
            if (self(self, a.args[1], placed + 1)) return true;
            used[i] = false;
            seen[a.args[1]] = false;
        }
        return false;
    };
    seen[q.head[0]] = true;
    return walk(walk, q.head[0], 0);
}

} // namespace semidl
