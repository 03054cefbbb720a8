#include "semidl/solver.hpp"

#include "semidl/error.hpp"

#include <deque>
#include <limits>
#include <queue>
#include <sstream>

namespace semidl {

// ---------------------------------------------------------------------------
// 2-canonical form

std::optional<std::uint32_t> TwoCanonicalSystem::definition(Node n) const {
    if (def_[n] < 0) return std::nullopt;
    return static_cast<std::uint32_t>(def_[n]);
}

void TwoCanonicalSystem::index() {
    def_.assign(nodes_.size(), -1);
    deps_.assign(nodes_.size(), {});
    for (std::uint32_t e = 0; e < equations_.size(); ++e) {
        const auto& eq = equations_[e];
        if (nodes_[eq.lhs].coefficient || def_[eq.lhs] >= 0) {
            throw ValidationError("canonical system: node " + std::to_string(eq.lhs) +
                                  " defined twice or is a coefficient");
        }
        def_[eq.lhs] = e;
        deps_[eq.a].push_back(e);
        deps_[eq.b].push_back(e);
    }
    for (Node n = 0; n < nodes_.size(); ++n) {
        if (!nodes_[n].coefficient && def_[n] < 0) {
            throw ValidationError("canonical system: node " + std::to_string(n) + " has no equation");
        }
    }
}

TwoCanonicalSystem make_canonical(const Semiring& semiring,
                                  std::vector<TwoCanonicalSystem::NodeInfo> nodes,
                                  std::vector<CanonicalEquation> equations) {
    TwoCanonicalSystem sys(semiring);
    sys.nodes_ = std::move(nodes);
    sys.equations_ = std::move(equations);
    sys.index();
    return sys;
}

TwoCanonicalSystem to_two_canonical(const Grounding& g) {
    const Semiring& s = g.semiring();
    TwoCanonicalSystem sys(s);
    auto& nodes = sys.nodes_;
    auto& eqs = sys.equations_;
    nodes.push_back({true, s.zero(), std::nullopt});
    nodes.push_back({true, s.one(), std::nullopt});
    sys.atom_node_.resize(g.atoms().size());
    for (AtomId a = 0; a < g.atoms().size(); ++a) {
        const GroundAtom& ga = g.atom(a);
        sys.atom_node_[a] = static_cast<Node>(nodes.size());
        bool coeff = ga.kind == GroundKind::coefficient;
        nodes.push_back({coeff, coeff ? ga.value : s.zero(), a});
    }
    auto fresh = [&] {
        nodes.push_back({false, s.zero(), std::nullopt});
        return static_cast<Node>(nodes.size() - 1);
    };
    auto product = [&](Node y, const Monomial& m) {
        if (m.size() == 1) {
            eqs.push_back({y, Op::times, sys.atom_node_[m[0]], TwoCanonicalSystem::one_node});
            return;
        }
        Node cur = y;
        for (std::size_t i = 0; i + 1 < m.size(); ++i) {
            Node left = sys.atom_node_[m[i]];
            Node right = i + 2 == m.size() ? sys.atom_node_[m[i + 1]] : fresh();
            eqs.push_back({cur, Op::times, left, right});
            cur = right;
        }
    };
    std::vector<bool> defined(g.atoms().size(), false);
    for (const auto& eq : g.equations()) {
        defined[eq.lhs] = true;
        Node x = sys.atom_node_[eq.lhs];
        const auto& rhs = eq.rhs;
        if (rhs.empty()) {
            eqs.push_back({x, Op::plus, TwoCanonicalSystem::zero_node, TwoCanonicalSystem::zero_node});
            continue;
        }
        if (rhs.size() == 1) {
            product(x, rhs[0]);
            continue;
        }
        // Sum chain first; products of the summands follow.
        std::vector<std::pair<Node, const Monomial*>> pending;
        auto operand = [&](const Monomial& m) {
            if (m.size() == 1) return sys.atom_node_[m[0]];
            Node y = fresh();
            pending.emplace_back(y, &m);
            return y;
        };
        Node cur = x;
        for (std::size_t j = 0; j + 1 < rhs.size(); ++j) {
            Node left = operand(rhs[j]);
            Node right = j + 2 == rhs.size() ? operand(rhs[j + 1]) : fresh();
            eqs.push_back({cur, Op::plus, left, right});
            cur = right;
        }
        for (const auto& [y, m] : pending) product(y, *m);
    }
    for (AtomId a = 0; a < g.atoms().size(); ++a) {
        if (!defined[a] && g.atom(a).kind == GroundKind::variable) {
            eqs.push_back({sys.atom_node_[a], Op::plus, TwoCanonicalSystem::zero_node,
                           TwoCanonicalSystem::zero_node});
        }
    }
    sys.index();
    return sys;
}

std::string TwoCanonicalSystem::dump(const Grounding& g) const {
    auto label = [&](Node n) -> std::string {
        if (n == zero_node) return "0";
        if (n == one_node) return "1";
        if (nodes_[n].atom) return g.name(*nodes_[n].atom);
        return "y" + std::to_string(n);
    };
    std::ostringstream out;
    for (const auto& eq : equations_) {
        out << label(eq.lhs) << " = " << label(eq.a) << (eq.op == Op::plus ? " + " : " * ")
            << label(eq.b) << " ;\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Solvers

std::string_view solver_path_token(SolverPath p) {
    switch (p) {
    case SolverPath::rank: return "rank";
    case SolverPath::absorptive: return "absorptive";
    case SolverPath::kleene: return "kleene";
    }
    return "kleene";
}

namespace {

std::vector<Value> initial_state(const TwoCanonicalSystem& sys) {
    std::vector<Value> h;
    h.reserve(sys.nodes().size());
    for (const auto& n : sys.nodes()) h.push_back(n.coefficient ? n.value : sys.semiring().zero());
    return h;
}

Value apply(const Semiring& s, Op op, const Value& a, const Value& b) {
    return op == Op::plus ? s.plus(a, b) : s.times(a, b);
}

void project(const TwoCanonicalSystem& sys, Solution& sol) {
    sol.h.resize(sys.atom_count());
    for (AtomId a = 0; a < sys.atom_count(); ++a) sol.h[a] = sol.nodes[sys.node_of(a)];
}

} // namespace

Solution solve_rank(const TwoCanonicalSystem& sys, const SolveObserver* observer) {
    const Semiring& s = sys.semiring();
    if (!s.capabilities().finite_rank) {
        throw CapabilityError("rank solver needs a semiring of finite rank; " + s.token() + " has none");
    }
    Solution sol;
    sol.path = SolverPath::rank;
    sol.stats.visits.assign(sys.equations().size(), 0);
    std::vector<Value> h = initial_state(sys);
    std::deque<Node> queue;
    for (Node n = 0; n < sys.nodes().size(); ++n) {
        if (sys.nodes()[n].coefficient) {
            queue.push_back(n);
            ++sol.stats.pq_ops;
        }
    }
    while (!queue.empty()) {
        Node x = queue.front();
        queue.pop_front();
        ++sol.stats.pq_ops;
        ++sol.stats.popped;
        for (std::uint32_t e : sys.dependents()[x]) {
            const auto& eq = sys.equations()[e];
            ++sol.stats.visits[e];
            ++sol.stats.equation_visits;
            Value v = apply(s, eq.op, h[eq.a], h[eq.b]);
            ++sol.stats.semiring_ops;
            if (v != h[eq.lhs]) {
                h[eq.lhs] = v;
                ++sol.stats.updates;
                if (observer && observer->on_update) observer->on_update(eq.lhs, h);
                queue.push_back(eq.lhs);
                ++sol.stats.pq_ops;
            }
        }
    }
    sol.nodes = std::move(h);
    project(sys, sol);
    return sol;
}

Solution solve_absorptive(const TwoCanonicalSystem& sys, const SolveObserver* observer) {
    const Semiring& s = sys.semiring();
    const auto& caps = s.capabilities();
    if (!caps.is_absorptive || !caps.is_total_order) {
        throw CapabilityError("absorptive solver needs an absorptive, totally ordered semiring; " +
                              s.token() + " is not");
    }
    Solution sol;
    sol.path = SolverPath::absorptive;
    sol.stats.visits.assign(sys.equations().size(), 0);
    std::vector<Value> h = initial_state(sys);
    std::vector<char> frozen(sys.nodes().size(), 0);

    using Entry = std::pair<Value, Node>;
    // Lower priority: smaller in the natural order, or equal with larger id.
    auto lower = [&s](const Entry& x, const Entry& y) {
        if (x.first == y.first) return x.second > y.second;
        return s.leq(x.first, y.first);
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(lower)> pq(lower);

    for (const auto& eq : sys.equations()) {
        Value v = apply(s, eq.op, h[eq.a], h[eq.b]);
        ++sol.stats.semiring_ops;
        if (v != h[eq.lhs]) {
            h[eq.lhs] = v;
            ++sol.stats.updates;
            if (observer && observer->on_update) observer->on_update(eq.lhs, h);
        }
        pq.emplace(h[eq.lhs], eq.lhs);
        ++sol.stats.pq_ops;
    }
    while (!pq.empty()) {
        Node x = pq.top().second;
        pq.pop();
        ++sol.stats.pq_ops;
        if (frozen[x]) continue;
        frozen[x] = 1;
        ++sol.stats.popped;
        sol.pops.emplace_back(x, h[x]);
        for (std::uint32_t e : sys.dependents()[x]) {
            const auto& eq = sys.equations()[e];
            if (frozen[eq.lhs]) continue;
            ++sol.stats.visits[e];
            ++sol.stats.equation_visits;
            Value v = apply(s, eq.op, h[eq.a], h[eq.b]);
            ++sol.stats.semiring_ops;
            if (v != h[eq.lhs]) {
                h[eq.lhs] = v;
                ++sol.stats.updates;
                if (observer && observer->on_update) observer->on_update(eq.lhs, h);
                pq.emplace(v, eq.lhs);
                ++sol.stats.pq_ops;
            }
        }
    }
    sol.nodes = std::move(h);
    project(sys, sol);
    return sol;
}

std::size_t default_max_iters(std::size_t variables) { return 10 * variables + 10; }

Solution kleene(const TwoCanonicalSystem& sys, std::optional<std::size_t> max_iters,
                const SolveObserver* observer) {
    const Semiring& s = sys.semiring();
    const std::size_t limit = max_iters.value_or(default_max_iters(sys.variable_count()));
    Solution sol;
    sol.path = SolverPath::kleene;
    sol.converged = false;
    std::vector<Value> h = initial_state(sys);
    std::vector<Value> next = h;
    while (sol.stats.iterations < limit) {
        bool changed = false;
        for (const auto& eq : sys.equations()) {
            next[eq.lhs] = apply(s, eq.op, h[eq.a], h[eq.b]);
            ++sol.stats.semiring_ops;
            changed = changed || next[eq.lhs] != h[eq.lhs];
        }
        ++sol.stats.iterations;
        if (observer && observer->on_round) observer->on_round(sol.stats.iterations, next);
        h.swap(next);
        if (!changed) {
            sol.converged = true;
            break;
        }
        next = h;
    }
    sol.nodes = std::move(h);
    project(sys, sol);
    return sol;
}

Solution kleene(const Grounding& g, std::optional<std::size_t> max_iters) {
    const Semiring& s = g.semiring();
    std::size_t vars = 0;
    for (const auto& a : g.atoms()) vars += a.kind == GroundKind::variable ? 1 : 0;
    const std::size_t limit = max_iters.value_or(default_max_iters(vars));
    Solution sol;
    sol.path = SolverPath::kleene;
    sol.converged = false;
    std::vector<Value> h;
    h.reserve(g.atoms().size());
    for (const auto& a : g.atoms()) h.push_back(a.kind == GroundKind::coefficient ? a.value : s.zero());
    std::vector<Value> next = h;
    while (sol.stats.iterations < limit) {
        bool changed = false;
        for (const auto& eq : g.equations()) {
            Value acc = s.zero();
            for (const auto& m : eq.rhs) {
                Value prod = s.one();
                for (AtomId a : m) {
                    prod = s.times(prod, h[a]);
                    ++sol.stats.semiring_ops;
                }
                acc = s.plus(acc, prod);
                ++sol.stats.semiring_ops;
            }
            next[eq.lhs] = acc;
            changed = changed || acc != h[eq.lhs];
        }
        ++sol.stats.iterations;
        h.swap(next);
        if (!changed) {
            sol.converged = true;
            break;
        }
        next = h;
    }
    sol.h = std::move(h);
    return sol;
}

Solution solve_auto(const TwoCanonicalSystem& sys, const SolveOptions& options) {
    const auto& caps = sys.semiring().capabilities();
    if (caps.finite_rank && *caps.finite_rank <= options.rank_threshold) return solve_rank(sys);
    if (caps.is_absorptive && caps.is_total_order) return solve_absorptive(sys);
    return kleene(sys, options.max_iters);
}

SolverChoice parse_solver(std::string_view token) {
    if (token == "auto") return SolverChoice::automatic;
    if (token == "rank") return SolverChoice::rank;
    if (token == "absorptive") return SolverChoice::absorptive;
    if (token == "kleene") return SolverChoice::kleene;
    throw ValidationError("unknown solver '" + std::string(token) +
                          "' (expected auto|rank|absorptive|kleene)");
}

Solution solve(const TwoCanonicalSystem& sys, SolverChoice choice, const SolveOptions& options) {
    switch (choice) {
    case SolverChoice::rank: return solve_rank(sys);
    case SolverChoice::absorptive: return solve_absorptive(sys);
    case SolverChoice::kleene: return kleene(sys, options.max_iters);
    case SolverChoice::automatic: break;
    }
    return solve_auto(sys, options);
}

RelationValues relation_values(const Grounding& g, const std::vector<Value>& h,
                               std::string_view predicate) {
    RelationValues out;
    auto p = g.find_predicate(predicate);
    if (!p) return out;
    const Semiring& s = g.semiring();
    for (AtomId a : g.atoms_of(*p)) {
        const GroundAtom& ga = g.atom(a);
        if (ga.kind == GroundKind::variable && !s.is_zero(h[a])) out.emplace(ga.tuple, h[a]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Grounding-free reference evaluation

namespace {

struct BodyEval {
    const SumProdQuery& q;
    const Instance& inst;
    const std::map<std::string, RelationValues>& idb;
    const Semiring& s;
    std::size_t n;
    std::vector<std::vector<std::size_t>> ready; // atoms fully bound once var i is set; [0] = nullary
    std::vector<ConstId> asg;
    std::vector<Value> atom_value;

    BodyEval(const SumProdQuery& query, const Instance& instance,
             const std::map<std::string, RelationValues>& rels)
        : q(query), inst(instance), idb(rels), s(instance.semiring), n(instance.n()),
          ready(query.num_vars() + 1), asg(query.num_vars(), 0),
          atom_value(query.atoms.size(), instance.semiring.zero()) {
        for (std::size_t i = 0; i < q.atoms.size(); ++i) {
            std::size_t slot = 0;
            for (VarId v : q.atoms[i].args) slot = std::max<std::size_t>(slot, v + 1);
            ready[slot].push_back(i);
        }
    }

    Value lookup(const Atom& a) const {
        Tuple t;
        for (VarId v : a.args) t.push_back(asg[v]);
        if (!a.idb) return inst.lookup(a.predicate, t);
        auto r = idb.find(a.predicate);
        if (r == idb.end()) return s.zero();
        auto it = r->second.find(t);
        return it == r->second.end() ? s.zero() : it->second;
    }

    bool settle(std::size_t slot) {
        for (std::size_t i : ready[slot]) {
            atom_value[i] = lookup(q.atoms[i]);
            if (s.is_zero(atom_value[i])) return false;
        }
        return true;
    }

    void run(RelationValues& out) {
        if (!settle(0)) return;
        assign(0, out);
    }

    void assign(std::size_t var, RelationValues& out) {
        if (var == q.num_vars()) {
            Value prod = s.one();
            for (const auto& v : atom_value) prod = s.times(prod, v);
            if (s.is_zero(prod)) return;
            Tuple head;
            for (VarId v : q.head) head.push_back(asg[v]);
            auto [it, fresh] = out.emplace(head, prod);
            if (!fresh) it->second = s.plus(it->second, prod);
            return;
        }
        for (ConstId c = 0; c < n; ++c) {
            asg[var] = c;
            if (settle(var + 1)) assign(var + 1, out);
        }
    }
};

} // namespace

ProgramSolution kleene_program(const Program& program, const Instance& instance,
                               std::optional<std::size_t> max_iters) {
    const Semiring& s = instance.semiring;
    std::size_t limit = 0;
    if (max_iters) {
        limit = *max_iters;
    } else {
        // 10 * (number of ground IDB atoms) + 10, saturating.
        std::size_t ground = 0;
        for (const auto& rule : program.rules) {
            std::size_t c = 1;
            for (std::size_t i = 0; i < rule.arity; ++i) {
                c = c > std::numeric_limits<std::size_t>::max() / std::max<std::size_t>(instance.n(), 1)
                        ? std::numeric_limits<std::size_t>::max() / 20
                        : c * instance.n();
            }
            ground = std::min(ground + c, std::numeric_limits<std::size_t>::max() / 20);
        }
        limit = default_max_iters(ground);
    }
    ProgramSolution sol;
    sol.converged = false;
    for (const auto& rule : program.rules) sol.relations[rule.head];
    while (sol.iterations < limit) {
        std::map<std::string, RelationValues> next;
        for (const auto& rule : program.rules) {
            RelationValues& out = next[rule.head];
            for (const auto& body : rule.bodies) {
                BodyEval eval(body, instance, sol.relations);
                eval.run(out);
            }
            std::erase_if(out, [&](const auto& kv) { return s.is_zero(kv.second); });
        }
        ++sol.iterations;
        bool same = next == sol.relations;
        sol.relations = std::move(next);
        if (same) {
            sol.converged = true;
            break;
        }
    }
    return sol;
}

} // namespace semidl
