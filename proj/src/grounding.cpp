#include "semidl/grounding.hpp"

#include "semidl/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <functional>
#include <sstream>

namespace semidl {

// ---------------------------------------------------------------------------
// Grounding container

Grounding::Grounding(Semiring semiring, std::vector<std::string> constants, std::size_t cap)
    : semiring_(std::move(semiring)), constants_(std::move(constants)), cap_(cap) {}

PredId Grounding::predicate(std::string_view name) {
    auto [it, fresh] = predicate_ids_.emplace(std::string(name), static_cast<PredId>(predicates_.size()));
    if (fresh) {
        predicates_.emplace_back(name);
        index_.emplace_back();
    }
    return it->second;
}

std::optional<PredId> Grounding::find_predicate(std::string_view name) const {
    auto it = predicate_ids_.find(std::string(name));
    if (it == predicate_ids_.end()) return std::nullopt;
    return it->second;
}

AtomId Grounding::intern(PredId p, const Tuple& t, GroundKind kind, Value v) {
    auto [it, fresh] = index_[p].emplace(t, static_cast<AtomId>(atoms_.size()));
    if (fresh) {
        atoms_.push_back(GroundAtom{p, t, kind, v});
        equation_index_.push_back(-1);
    } else if (atoms_[it->second].kind != kind) {
        throw ValidationError("ground atom " + display(it->second) +
                              " used both as coefficient and variable");
    }
    return it->second;
}

AtomId Grounding::coefficient(PredId p, const Tuple& t, Value v) {
    return intern(p, t, GroundKind::coefficient, v);
}

AtomId Grounding::variable(PredId p, const Tuple& t) {
    return intern(p, t, GroundKind::variable, semiring_.zero());
}

std::optional<AtomId> Grounding::find(PredId p, const Tuple& t) const {
    if (p >= index_.size()) return std::nullopt;
    auto it = index_[p].find(t);
    if (it == index_[p].end()) return std::nullopt;
    return it->second;
}

std::vector<AtomId> Grounding::atoms_of(PredId p) const {
    std::vector<AtomId> out;
    if (p >= index_.size()) return out;
    out.reserve(index_[p].size());
    for (const auto& [t, id] : index_[p]) out.push_back(id);
    std::sort(out.begin(), out.end());
    return out;
}

void Grounding::grow(std::size_t by) {
    size_ += by;
    if (size_ > cap_) {
        throw CapExceeded("grounding size exceeds cap of " + std::to_string(cap_));
    }
}

std::size_t Grounding::define(AtomId lhs) {
    if (equation_index_[lhs] >= 0) return static_cast<std::size_t>(equation_index_[lhs]);
    grow(1);
    equation_index_[lhs] = static_cast<std::int64_t>(equations_.size());
    equations_.push_back(Equation{lhs, {}});
    return equations_.size() - 1;
}

void Grounding::add_monomial(AtomId lhs, Monomial m) {
    std::size_t e = define(lhs);
    grow(m.size());
    equations_[e].rhs.push_back(std::move(m));
}

std::optional<std::size_t> Grounding::equation_of(AtomId a) const {
    if (equation_index_[a] < 0) return std::nullopt;
    return static_cast<std::size_t>(equation_index_[a]);
}

void Grounding::close() {
    std::vector<bool> used(atoms_.size(), false);
    for (const auto& eq : equations_) {
        for (const auto& m : eq.rhs) {
            for (AtomId a : m) used[a] = true;
        }
    }
    for (AtomId a = 0; a < atoms_.size(); ++a) {
        if (used[a] && atoms_[a].kind == GroundKind::variable) define(a);
    }
}

std::size_t Grounding::recompute_size() const {
    std::size_t n = 0;
    for (const auto& eq : equations_) {
        n += 1;
        for (const auto& m : eq.rhs) n += m.size();
    }
    return n;
}

std::string Grounding::name(AtomId a) const {
    const GroundAtom& g = atoms_[a];
    std::string out = g.kind == GroundKind::variable ? "x_" : "e_";
    out += predicates_[g.predicate];
    for (ConstId c : g.tuple) {
        out += '_';
        out += constants_[c];
    }
    return out;
}

std::string Grounding::display(AtomId a) const {
    const GroundAtom& g = atoms_[a];
    std::string out = predicates_[g.predicate] + "(";
    for (std::size_t i = 0; i < g.tuple.size(); ++i) {
        if (i) out += ',';
        out += constants_[g.tuple[i]];
    }
    return out + ")";
}

Strategy parse_strategy(std::string_view token) {
    if (token == "naive") return Strategy::naive;
    if (token == "acyclic") return Strategy::acyclic;
    if (token == "free-connex") return Strategy::free_connex;
    if (token == "linear") return Strategy::linear;
    if (token == "auto") return Strategy::automatic;
    throw ValidationError("unknown strategy '" + std::string(token) +
                          "' (expected naive|acyclic|free-connex|linear|auto)");
}

std::string_view strategy_token(Strategy s) {
    switch (s) {
    case Strategy::naive: return "naive";
    case Strategy::acyclic: return "acyclic";
    case Strategy::free_connex: return "free-connex";
    case Strategy::linear: return "linear";
    case Strategy::automatic: return "auto";
    }
    return "auto";
}

// ---------------------------------------------------------------------------
// Constructions

namespace {

enum class Source { edb, idb, support };

// An atom of a (possibly rewritten) rule body.
struct Local {
    PredId pred = 0;
    std::vector<VarId> args;
    std::vector<VarId> vars; // sorted distinct
    Source source = Source::edb;
    const Relation* relation = nullptr;
    std::vector<Tuple> support; // tuples that may be nonzero, for Source::support
};

struct LocalQuery {
    std::vector<Local> atoms;
    std::vector<VarId> head; // sorted distinct
    std::size_t num_vars = 0;
};

std::vector<VarId> set_union(const std::vector<VarId>& a, const std::vector<VarId>& b) {
    std::vector<VarId> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<VarId> set_inter(const std::vector<VarId>& a, const std::vector<VarId>& b) {
    std::vector<VarId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<VarId> set_minus(const std::vector<VarId>& a, const std::vector<VarId>& b) {
    std::vector<VarId> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

struct Ctx {
    Grounding& g;
    const Instance& inst;
    std::size_t n;
};

// Partial assignment of query variables to constants.
struct Assignment {
    std::vector<ConstId> value;
    std::vector<char> bound;

    explicit Assignment(std::size_t vars) : value(vars, 0), bound(vars, 0) {}

    Tuple project(const std::vector<VarId>& vars) const {
        Tuple t;
        t.reserve(vars.size());
        for (VarId v : vars) t.push_back(value[v]);
        return t;
    }
};

// Calls f() for every assignment of the unbound `vars` over the domain.
void for_each_domain(const std::vector<VarId>& vars, Assignment& a, std::size_t n,
                     const std::function<void()>& f) {
    std::vector<VarId> free;
    for (VarId v : vars) {
        if (!a.bound[v]) free.push_back(v);
    }
    if (free.empty()) {
        f();
        return;
    }
    if (n == 0) return;
    for (VarId v : free) {
        a.value[v] = 0;
        a.bound[v] = 1;
    }
    for (;;) {
        f();
        std::size_t i = free.size();
        while (i > 0) {
            --i;
            if (++a.value[free[i]] < n) break;
            a.value[free[i]] = 0;
            if (i == 0) {
                for (VarId v : free) a.bound[v] = 0;
                return;
            }
        }
    }
}

// Binds the variables of `t` against the atom's argument list; returns the
// newly bound variables, or nullopt on a clash with existing bindings or a
// repeated variable mismatch.
std::optional<std::vector<VarId>> bind(const Local& atom, const Tuple& t, Assignment& a) {
    std::vector<VarId> fresh;
    for (std::size_t j = 0; j < atom.args.size(); ++j) {
        VarId v = atom.args[j];
        if (a.bound[v]) {
            if (a.value[v] != t[j]) {
                for (VarId u : fresh) a.bound[u] = 0;
                return std::nullopt;
            }
        } else {
            a.value[v] = t[j];
            a.bound[v] = 1;
            fresh.push_back(v);
        }
    }
    return fresh;
}

// Calls f(value) for every way the atom can be matched given the current
// bindings: stored facts (EDB), support tuples, or the whole domain (IDB).
// `value` is the fact annotation for EDB atoms.
void for_each_match(const Local& atom, Assignment& a, std::size_t n,
                    const std::function<void(const Value*)>& f) {
    auto over = [&](const Tuple& t, const Value* v) {
        if (auto fresh = bind(atom, t, a)) {
            f(v);
            for (VarId u : *fresh) a.bound[u] = 0;
        }
    };
    switch (atom.source) {
    case Source::edb: {
        if (!atom.relation) return;
        bool all_bound = std::all_of(atom.vars.begin(), atom.vars.end(),
                                     [&](VarId v) { return a.bound[v] != 0; });
        if (all_bound) {
            auto it = atom.relation->facts.find(a.project(atom.args));
            if (it != atom.relation->facts.end()) f(&it->second);
            return;
        }
        for (const auto& [t, v] : atom.relation->facts) over(t, &v);
        return;
    }
    case Source::support:
        for (const auto& t : atom.support) over(t, nullptr);
        return;
    case Source::idb:
        for_each_domain(atom.vars, a, n, [&] { f(nullptr); });
        return;
    }
}

AtomId ground_id(Ctx& c, const Local& atom, const Assignment& a, const Value* v) {
    Tuple t = a.project(atom.args);
    if (atom.source == Source::edb) {
        return c.g.coefficient(atom.pred, t, v ? *v : c.inst.lookup(c.g.predicate_name(atom.pred), t));
    }
    return c.g.variable(atom.pred, t);
}

// True when the atom's ground instance has a non-empty equation.
bool supported(const Grounding& g, PredId p, const Tuple& t) {
    auto id = g.find(p, t);
    if (!id) return false;
    auto e = g.equation_of(*id);
    return e && !g.equations()[*e].rhs.empty();
}

std::vector<Tuple> support_of(const Grounding& g, PredId p) {
    std::vector<Tuple> out;
    for (AtomId a : g.atoms_of(p)) {
        if (supported(g, p, g.atom(a).tuple)) out.push_back(g.atom(a).tuple);
    }
    std::sort(out.begin(), out.end());
    return out;
}

LocalQuery lift(Ctx& c, const SumProdQuery& body) {
    LocalQuery q;
    q.num_vars = body.num_vars();
    q.head = body.head;
    for (const auto& atom : body.atoms) {
        Local l;
        l.pred = c.g.predicate(atom.predicate);
        l.args = atom.args;
        l.vars = atom.vars();
        l.source = atom.idb ? Source::idb : Source::edb;
        if (!atom.idb) l.relation = c.inst.relation(atom.predicate);
        q.atoms.push_back(std::move(l));
    }
    return q;
}

// Join-tree grounding: one fresh IDB per tree edge carrying the separator
// plus the head variables below it.
void ground_tree(Ctx& c, const LocalQuery& q, const JoinTree& tree, NodeId root, PredId head_pred,
                 const std::string& ns) {
    RootedTree rt = root_tree(tree, root);
    const std::size_t k = tree.size();
    std::vector<std::vector<VarId>> below(k);
    for (auto it = rt.preorder.rbegin(); it != rt.preorder.rend(); ++it) {
        NodeId t = *it;
        below[t] = set_inter(q.head, tree.bags[t]);
        for (NodeId ch : rt.children[t]) below[t] = set_union(below[t], below[ch]);
    }
    std::vector<PredId> in_pred(k);
    std::vector<std::vector<VarId>> in_vars(k);
    in_pred[root] = head_pred;
    in_vars[root] = q.head;
    for (NodeId t : rt.preorder) {
        for (NodeId ch : rt.children[t]) {
            in_vars[ch] = set_union(set_inter(tree.bags[t], tree.bags[ch]), below[ch]);
            in_pred[ch] = c.g.predicate("__u_" + ns + "_e" + std::to_string(t) + "_" + std::to_string(ch));
        }
    }
    for (NodeId s : rt.preorder) {
        const Local& atom = q.atoms[tree.atoms[s]];
        std::vector<VarId> scope = tree.bags[s];
        for (NodeId ch : rt.children[s]) scope = set_union(scope, in_vars[ch]);
        std::vector<VarId> extra = set_minus(scope, tree.bags[s]);
        Assignment a(q.num_vars);
        for_each_match(atom, a, c.n, [&](const Value* v) {
            AtomId self = ground_id(c, atom, a, v);
            for_each_domain(extra, a, c.n, [&] {
                Monomial m{self};
                for (NodeId ch : rt.children[s]) m.push_back(c.g.variable(in_pred[ch], a.project(in_vars[ch])));
                c.g.add_monomial(c.g.variable(in_pred[s], a.project(in_vars[s])), std::move(m));
            });
        });
    }
}

// Every assignment that matches all atoms, one monomial each in body order.
void ground_naive_query(Ctx& c, const LocalQuery& q, PredId head_pred) {
    Assignment a(q.num_vars);
    std::vector<const Value*> values(q.atoms.size(), nullptr);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == q.atoms.size()) {
            Monomial m;
            m.reserve(q.atoms.size());
            for (std::size_t j = 0; j < q.atoms.size(); ++j) m.push_back(ground_id(c, q.atoms[j], a, values[j]));
            c.g.add_monomial(c.g.variable(head_pred, a.project(q.head)), std::move(m));
            return;
        }
        for_each_match(q.atoms[i], a, c.n, [&](const Value* v) {
            values[i] = v;
            rec(i + 1);
        });
    };
    rec(0);
}

// The subtree of `rt` under `top` as a query of its own: node i of the
// result is nodes[i], nodes[0] is the root.
std::pair<LocalQuery, JoinTree> restrict_to(const LocalQuery& q, const JoinTree& tree,
                                            const RootedTree& rt, NodeId top,
                                            std::vector<VarId> head) {
    std::vector<NodeId> nodes = rt.subtree(top);
    LocalQuery sub;
    sub.num_vars = q.num_vars;
    sub.head = std::move(head);
    JoinTree st;
    std::vector<std::size_t> pos(tree.size(), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        pos[nodes[i]] = i;
        sub.atoms.push_back(q.atoms[tree.atoms[nodes[i]]]);
        st.bags.push_back(tree.bags[nodes[i]]);
        st.atoms.push_back(i);
    }
    st.adjacency.assign(nodes.size(), {});
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        std::size_t p = pos[*rt.parent[nodes[i]]];
        st.edges.emplace_back(i, p);
        st.adjacency[i].push_back(p);
        st.adjacency[p].push_back(i);
    }
    for (auto& adj : st.adjacency) std::sort(adj.begin(), adj.end());
    return {std::move(sub), std::move(st)};
}

// Replaces the subtree under `top` by a single leaf atom.
std::pair<LocalQuery, JoinTree> replace_subtree(const LocalQuery& q, const JoinTree& tree,
                                                const RootedTree& rt, NodeId top, Local leaf,
                                                NodeId& new_root) {
    std::vector<NodeId> drop = rt.subtree(top);
    std::vector<bool> gone(tree.size(), false);
    for (NodeId t : drop) gone[t] = true;
    LocalQuery out;
    out.num_vars = q.num_vars;
    out.head = q.head;
    JoinTree nt;
    std::vector<std::size_t> pos(tree.size(), 0);
    for (NodeId t = 0; t < tree.size(); ++t) {
        if (gone[t]) continue;
        pos[t] = out.atoms.size();
        out.atoms.push_back(q.atoms[tree.atoms[t]]);
        nt.bags.push_back(tree.bags[t]);
        nt.atoms.push_back(pos[t]);
    }
    std::size_t leaf_pos = out.atoms.size();
    nt.bags.push_back(leaf.vars);
    nt.atoms.push_back(leaf_pos);
    out.atoms.push_back(std::move(leaf));
    nt.adjacency.assign(out.atoms.size(), {});
    auto link = [&](std::size_t a, std::size_t b) {
        nt.edges.emplace_back(a, b);
        nt.adjacency[a].push_back(b);
        nt.adjacency[b].push_back(a);
    };
    for (NodeId t = 0; t < tree.size(); ++t) {
        if (gone[t] || !rt.parent[t]) continue;
        link(pos[t], pos[*rt.parent[t]]);
    }
    link(leaf_pos, pos[*rt.parent[top]]);
    for (auto& adj : nt.adjacency) std::sort(adj.begin(), adj.end());
    new_root = pos[rt.root];
    return {std::move(out), std::move(nt)};
}

std::vector<VarId> subtree_vars(const JoinTree& tree, const RootedTree& rt, NodeId top) {
    std::vector<VarId> out;
    for (NodeId t : rt.subtree(top)) out = set_union(out, tree.bags[t]);
    return out;
}

// Plan for the path-to-chain construction of one linear body.
struct LinearPlan {
    NodeId root = 0;
    std::optional<NodeId> idb;        // the single IDB node
    bool leaf_case = true;            // IDB absent, at the root, or a leaf
    bool collapse_case = false;       // head variables below the IDB all in its bag
    std::vector<NodeId> path;         // IDB node ... TOP(y)
    std::vector<VarId> target;        // I = separator with parent plus head vars below
    std::vector<std::vector<VarId>> carry;
};

LinearPlan plan_linear(const Program& program, const LocalQuery& q, const JoinTree& tree) {
    if (program.arity_bound > 2) {
        throw StrategyNotApplicable("linear construction needs IDB arity at most 2");
    }
    LinearPlan plan;
    std::vector<NodeId> idb_nodes;
    for (NodeId t = 0; t < tree.size(); ++t) {
        if (q.atoms[tree.atoms[t]].source == Source::idb) idb_nodes.push_back(t);
    }
    if (idb_nodes.size() > 1) throw StrategyNotApplicable("body has more than one IDB atom");
    plan.root = choose_root(tree, q.head);
    if (idb_nodes.empty()) return plan;
    NodeId t = idb_nodes.front();
    plan.idb = t;
    if (plan.root == t) {
        // Prefer an EDB node holding a head variable.
        std::size_t best = 0;
        for (NodeId s = 0; s < tree.size(); ++s) {
            if (s == t) continue;
            std::size_t cnt = set_inter(tree.bags[s], q.head).size();
            if (cnt > best) {
                best = cnt;
                plan.root = s;
            }
        }
        if (plan.root == t) return plan;
    }
    RootedTree rt = root_tree(tree, plan.root);
    if (rt.children[t].empty()) return plan;
    plan.leaf_case = false;
    std::vector<VarId> head_below = set_inter(q.head, subtree_vars(tree, rt, t));
    std::vector<VarId> outside = set_minus(head_below, tree.bags[t]);
    if (outside.empty()) {
        plan.collapse_case = true;
        return plan;
    }
    if (outside.size() > 1) throw StrategyNotApplicable("more than one head variable below the IDB");
    VarId y = outside.front();
    plan.target = set_union(set_inter(tree.bags[*rt.parent[t]], tree.bags[t]), head_below);
    NodeId ty = *top_node(tree, rt, y);
    for (NodeId u = ty;; u = *rt.parent[u]) {
        plan.path.push_back(u);
        if (u == t) break;
    }
    std::reverse(plan.path.begin(), plan.path.end());
    std::vector<bool> on_path(tree.size(), false);
    for (NodeId u : plan.path) on_path[u] = true;
    // Collapsed subtrees must keep every head variable they hold.
    for (std::size_t i = 0; i + 1 < plan.path.size(); ++i) {
        NodeId p = plan.path[i];
        for (NodeId ch : rt.children[p]) {
            if (on_path[ch]) continue;
            if (!set_minus(set_inter(q.head, subtree_vars(tree, rt, ch)), tree.bags[p]).empty()) {
                throw StrategyNotApplicable("head variable inside an off-path subtree");
            }
        }
    }
    if (!set_minus(set_inter(q.head, subtree_vars(tree, rt, ty)), tree.bags[ty]).empty()) {
        throw StrategyNotApplicable("head variable below TOP(y)");
    }
    const std::size_t k = plan.path.size() - 1;
    plan.carry.push_back(tree.bags[t]);
    for (std::size_t i = 1; i <= k; ++i) {
        const auto& bag = tree.bags[plan.path[i]];
        std::vector<VarId> seen = set_union(plan.carry[i - 1], bag);
        if (i == k) {
            if (!set_minus(plan.target, seen).empty()) {
                throw StrategyNotApplicable("chain does not reach every target variable");
            }
            plan.carry.push_back(plan.target);
        } else {
            std::vector<VarId> sep = set_inter(bag, tree.bags[plan.path[i + 1]]);
            plan.carry.push_back(set_union(set_inter(plan.target, seen), sep));
        }
    }
    return plan;
}

struct Collapsed {
    PredId pred;
    std::vector<VarId> vars;
};

void ground_linear(Ctx& c, const LocalQuery& q, const JoinTree& tree, const LinearPlan& plan,
                   PredId head_pred, const std::string& ns) {
    if (plan.leaf_case) {
        ground_tree(c, q, tree, plan.root, head_pred, ns);
        return;
    }
    RootedTree rt = root_tree(tree, plan.root);
    const NodeId t = *plan.idb;
    const std::string tag = "_n" + std::to_string(t);

    Local leaf;
    leaf.source = Source::idb;
    if (plan.collapse_case) {
        leaf.pred = c.g.predicate("__t_" + ns + tag);
        leaf.vars = leaf.args = tree.bags[t];
        auto [sub, st] = restrict_to(q, tree, rt, t, tree.bags[t]);
        ground_tree(c, sub, st, 0, leaf.pred, ns + "_t" + std::to_string(t));
    } else {
        const auto& path = plan.path;
        const std::size_t k = path.size() - 1;
        std::vector<bool> on_path(tree.size(), false);
        for (NodeId u : path) on_path[u] = true;

        // Off-path subtrees hanging from the path (except below TOP(y)).
        std::vector<std::vector<Collapsed>> side(path.size());
        for (std::size_t i = 0; i < k; ++i) {
            NodeId p = path[i];
            for (NodeId ch : rt.children[p]) {
                if (on_path[ch]) continue;
                Collapsed m{c.g.predicate("__m_" + ns + "_n" + std::to_string(ch)),
                            set_inter(tree.bags[p], tree.bags[ch])};
                auto [sub, st] = restrict_to(q, tree, rt, ch, m.vars);
                ground_tree(c, sub, st, 0, m.pred, ns + "_m" + std::to_string(ch));
                side[i].push_back(std::move(m));
            }
        }
        // The end of the path, with its subtree folded in.
        NodeId ty = path[k];
        Local last = q.atoms[tree.atoms[ty]];
        if (!rt.children[ty].empty()) {
            PredId rp = c.g.predicate("__r_" + ns + "_n" + std::to_string(ty));
            auto [sub, st] = restrict_to(q, tree, rt, ty, tree.bags[ty]);
            ground_tree(c, sub, st, 0, rp, ns + "_r" + std::to_string(ty));
            last = Local{};
            last.pred = rp;
            last.vars = last.args = tree.bags[ty];
            last.source = Source::support;
            last.support = support_of(c.g, rp);
        }

        const Local& idb_atom = q.atoms[tree.atoms[t]];
        PredId prev = 0;
        for (std::size_t i = 1; i <= k; ++i) {
            const Local& step = i == k ? last : q.atoms[tree.atoms[path[i]]];
            PredId out = i == k ? c.g.predicate("__t_" + ns + tag)
                                : c.g.predicate("__j_" + ns + "_" + std::to_string(i));
            std::vector<VarId> extra = set_minus(plan.carry[i - 1], tree.bags[path[i]]);
            Assignment a(q.num_vars);
            for_each_match(step, a, c.n, [&](const Value* v) {
                AtomId self = ground_id(c, step, a, v);
                for_each_domain(extra, a, c.n, [&] {
                    Monomial m;
                    if (i == 1) {
                        m.push_back(c.g.variable(idb_atom.pred, a.project(idb_atom.args)));
                        for (const auto& s : side[0]) {
                            Tuple st = a.project(s.vars);
                            if (!supported(c.g, s.pred, st)) return;
                            m.push_back(c.g.variable(s.pred, st));
                        }
                    } else {
                        Tuple pt = a.project(plan.carry[i - 1]);
                        if (!supported(c.g, prev, pt)) return;
                        m.push_back(c.g.variable(prev, pt));
                    }
                    m.push_back(self);
                    if (i < k) {
                        for (const auto& s : side[i]) {
                            Tuple st = a.project(s.vars);
                            if (!supported(c.g, s.pred, st)) return;
                            m.push_back(c.g.variable(s.pred, st));
                        }
                    }
                    c.g.add_monomial(c.g.variable(out, a.project(plan.carry[i])), std::move(m));
                });
            });
            prev = out;
        }
        leaf.pred = c.g.predicate("__t_" + ns + tag);
        leaf.vars = leaf.args = plan.target;
    }
    NodeId new_root = 0;
    auto [outer, ot] = replace_subtree(q, tree, rt, t, std::move(leaf), new_root);
    ground_tree(c, outer, ot, new_root, head_pred, ns);
}

const JoinTree* tree_or_null(const std::variant<JoinTree, CyclicVerdict>& v) {
    return std::get_if<JoinTree>(&v);
}

} // namespace

// ---------------------------------------------------------------------------
// Entry points

Grounding ground_naive(const Program& program, const Instance& instance, std::size_t cap) {
    Grounding g(instance.semiring, instance.constants, cap);
    Ctx c{g, instance, instance.n()};
    for (const auto& rule : program.rules) {
        PredId p = g.predicate(rule.head);
        std::vector<VarId> vars(rule.arity);
        for (VarId v = 0; v < rule.arity; ++v) vars[v] = v;
        Assignment a(rule.arity);
        for_each_domain(vars, a, c.n, [&] { g.define(g.variable(p, a.project(vars))); });
    }
    std::size_t body_id = 0;
    for (const auto& rule : program.rules) {
        PredId p = g.predicate(rule.head);
        for (const auto& body : rule.bodies) {
            ground_naive_query(c, lift(c, body), p);
            g.report.push_back(BodyReport{body_id++, rule.head, "naive", {}});
        }
    }
    g.close();
    return g;
}

void ground_acyclic_body(const Program&, const SumProdQuery& body, const std::string& head,
                         std::size_t body_id, const Instance& instance, const JoinTree& tree,
                         NodeId root, Grounding& sink) {
    Ctx c{sink, instance, instance.n()};
    ground_tree(c, lift(c, body), tree, root, sink.predicate(head), "r" + std::to_string(body_id));
}

void ground_linear_body(const Program& program, const SumProdQuery& body, const std::string& head,
                        std::size_t body_id, const Instance& instance, Grounding& sink) {
    auto gyo = gyo_join_tree(build_hypergraph(body));
    const JoinTree* tree = tree_or_null(gyo);
    if (!tree) throw StrategyNotApplicable("body is cyclic");
    Ctx c{sink, instance, instance.n()};
    LocalQuery q = lift(c, body);
    LinearPlan plan = plan_linear(program, q, *tree);
    ground_linear(c, q, *tree, plan, sink.predicate(head), "r" + std::to_string(body_id));
}

Grounding ground_program(const Program& program, const Instance& instance,
                         const GroundOptions& options) {
    if (options.strategy == Strategy::naive) {
        Grounding g = ground_naive(program, instance, options.cap);
        return options.prune_unreachable ? prune_unreachable(g) : g;
    }
    Grounding g(instance.semiring, instance.constants, options.cap);
    Ctx c{g, instance, instance.n()};
    std::size_t body_id = 0;
    for (const auto& rule : program.rules) {
        PredId head = g.predicate(rule.head);
        for (const auto& body : rule.bodies) {
            const std::string ns = "r" + std::to_string(body_id);
            LocalQuery q = lift(c, body);
            auto gyo = gyo_join_tree(build_hypergraph(body));
            const JoinTree* tree = tree_or_null(gyo);
            BodyReport rep{body_id, rule.head, {}, {}};
            auto run_tree = [&](NodeId root, const char* label) {
                ground_tree(c, q, *tree, root, head, ns);
                rep.strategy = label;
                rep.join_tree = dump_join_tree(*tree, body, root);
            };
            auto run_linear = [&](const LinearPlan& plan) {
                ground_linear(c, q, *tree, plan, head, ns);
                rep.strategy = "linear";
                rep.join_tree = dump_join_tree(*tree, body, plan.root);
            };
            switch (options.strategy) {
            case Strategy::acyclic:
                if (!tree) {
                    throw CyclicRule("body " + std::to_string(body_id) + " of " + rule.head +
                                     " (line " + std::to_string(body.source_line) + ") is cyclic");
                }
                run_tree(choose_root(*tree, body.head), "acyclic");
                break;
            case Strategy::free_connex: {
                if (!tree) throw StrategyNotApplicable("body is cyclic");
                auto r = free_connex_root(*tree, body.head, body.num_vars());
                if (!r) throw StrategyNotApplicable("no free-connex rooting of the join tree");
                run_tree(*r, "free-connex");
                break;
            }
            case Strategy::linear:
                if (!tree) throw StrategyNotApplicable("body is cyclic");
                run_linear(plan_linear(program, q, *tree));
                break;
            case Strategy::automatic:
            case Strategy::naive:
                if (!tree) {
                    ground_naive_query(c, q, head);
                    rep.strategy = "naive";
                    break;
                }
                if (auto r = free_connex_root(*tree, body.head, body.num_vars())) {
                    run_tree(*r, "free-connex");
                    break;
                }
                try {
                    LinearPlan plan = plan_linear(program, q, *tree);
                    run_linear(plan);
                } catch (const StrategyNotApplicable&) {
                    run_tree(choose_root(*tree, body.head), "acyclic");
                }
                break;
            }
            g.report.push_back(std::move(rep));
            ++body_id;
        }
    }
    g.close();
    return options.prune_unreachable ? prune_unreachable(g) : g;
}

Grounding prune_unreachable(const Grounding& g) {
    const auto& eqs = g.equations();
    std::vector<char> live(g.atoms().size(), 0);
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> occurs(g.atoms().size());
    std::vector<std::vector<std::size_t>> pending(eqs.size());
    std::vector<AtomId> work;
    auto mark = [&](AtomId a) {
        if (!live[a]) {
            live[a] = 1;
            work.push_back(a);
        }
    };
    for (std::size_t e = 0; e < eqs.size(); ++e) {
        pending[e].assign(eqs[e].rhs.size(), 0);
        for (std::size_t j = 0; j < eqs[e].rhs.size(); ++j) {
            for (AtomId a : eqs[e].rhs[j]) {
                if (g.atom(a).kind == GroundKind::variable) {
                    occurs[a].emplace_back(e, j);
                    ++pending[e][j];
                }
            }
            if (pending[e][j] == 0) mark(eqs[e].lhs);
        }
    }
    while (!work.empty()) {
        AtomId a = work.back();
        work.pop_back();
        for (auto [e, j] : occurs[a]) {
            if (--pending[e][j] == 0) mark(eqs[e].lhs);
        }
    }
    Grounding out(g.semiring(), g.constants(), g.cap());
    auto copy = [&](AtomId a) {
        const GroundAtom& src = g.atom(a);
        PredId p = out.predicate(g.predicate_name(src.predicate));
        return src.kind == GroundKind::coefficient ? out.coefficient(p, src.tuple, src.value)
                                                   : out.variable(p, src.tuple);
    };
    for (const auto& eq : eqs) {
        if (!live[eq.lhs]) continue;
        AtomId lhs = copy(eq.lhs);
        out.define(lhs);
        for (const auto& m : eq.rhs) {
            bool ok = std::all_of(m.begin(), m.end(), [&](AtomId a) {
                return g.atom(a).kind == GroundKind::coefficient || live[a];
            });
            if (!ok) continue;
            Monomial nm;
            for (AtomId a : m) nm.push_back(copy(a));
            out.add_monomial(lhs, std::move(nm));
        }
    }
    out.report = g.report;
    return out;
}

std::string dump_text(const Grounding& g) {
    std::ostringstream out;
    for (const auto& eq : g.equations()) {
        out << g.name(eq.lhs) << " = ";
        if (eq.rhs.empty()) out << '0';
        for (std::size_t j = 0; j < eq.rhs.size(); ++j) {
            if (j) out << " + ";
            for (std::size_t i = 0; i < eq.rhs[j].size(); ++i) {
                if (i) out << " * ";
                out << g.name(eq.rhs[j][i]);
            }
        }
        out << " ;\n";
    }
    return out.str();
}

std::string dump_json(const Grounding& g) {
    using nlohmann::json;
    json atoms = json::array();
    for (AtomId a = 0; a < g.atoms().size(); ++a) {
        const GroundAtom& ga = g.atom(a);
        json tuple = json::array();
        for (ConstId c : ga.tuple) tuple.push_back(g.constants()[c]);
        json item{{"id", a},
                  {"name", g.name(a)},
                  {"predicate", g.predicate_name(ga.predicate)},
                  {"tuple", tuple},
                  {"kind", ga.kind == GroundKind::coefficient ? "coefficient" : "variable"}};
        if (ga.kind == GroundKind::coefficient) item["value"] = g.semiring().format(ga.value);
        atoms.push_back(std::move(item));
    }
    json equations = json::array();
    for (const auto& eq : g.equations()) equations.push_back(json{{"lhs", eq.lhs}, {"rhs", eq.rhs}});
    json report = json::array();
    for (const auto& r : g.report) {
        report.push_back(json{{"body", r.body_id}, {"head", r.head}, {"strategy", r.strategy}});
    }
    json doc{{"semiring", g.semiring().token()},
             {"size", g.size()},
             {"atoms", atoms},
             {"equations", equations},
             {"strategies", report}};
    return doc.dump(2) + "\n";
}

} // namespace semidl
