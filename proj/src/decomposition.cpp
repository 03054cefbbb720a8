#include "semidl/decomposition.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace semidl {

namespace {

bool subset(const std::vector<VarId>& a, const std::vector<VarId>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::size_t overlap(const std::vector<VarId>& a, const std::vector<VarId>& b) {
    std::size_t n = 0;
    for (VarId v : a) n += std::binary_search(b.begin(), b.end(), v) ? 1 : 0;
    return n;
}

// Among active edges f != e whose vertex set contains `need`, the one sharing
// the most vertices with e; ties go to the highest id.
std::optional<std::size_t> pick_witness(const Hypergraph& h, const std::vector<bool>& active,
                                        std::size_t e, const std::vector<VarId>& need) {
    std::optional<std::size_t> best;
    std::size_t best_overlap = 0;
    for (std::size_t f = 0; f < h.edges.size(); ++f) {
        if (f == e || !active[f] || !subset(need, h.edges[f].vertices)) continue;
        std::size_t o = overlap(h.edges[e].vertices, h.edges[f].vertices);
        if (!best || o >= best_overlap) {
            best = f;
            best_overlap = o;
        }
    }
    return best;
}

} // namespace

bool RootedTree::is_ancestor(NodeId a, NodeId b) const {
    for (auto p = parent[b]; p; p = parent[*p]) {
        if (*p == a) return true;
    }
    return false;
}

std::vector<NodeId> RootedTree::subtree(NodeId t) const {
    std::vector<NodeId> out;
    std::vector<NodeId> stack{t};
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        out.push_back(u);
        for (auto it = children[u].rbegin(); it != children[u].rend(); ++it) stack.push_back(*it);
    }
    return out;
}

Hypergraph build_hypergraph(const SumProdQuery& query) {
    Hypergraph h;
    h.num_vertices = query.num_vars();
    for (std::size_t i = 0; i < query.atoms.size(); ++i) {
        h.edges.push_back(Hyperedge{i, query.atoms[i].vars(), i});
    }
    return h;
}

std::variant<JoinTree, CyclicVerdict> gyo_join_tree(const Hypergraph& h) {
    const std::size_t k = h.edges.size();
    JoinTree tree;
    for (const auto& e : h.edges) {
        tree.bags.push_back(e.vertices);
        tree.atoms.push_back(e.atom);
    }
    tree.adjacency.assign(k, {});
    std::vector<bool> active(k, true);
    std::size_t remaining = k;
    auto link = [&](std::size_t ear, std::size_t witness) {
        tree.edges.emplace_back(ear, witness);
        tree.adjacency[ear].push_back(witness);
        tree.adjacency[witness].push_back(ear);
        active[ear] = false;
        --remaining;
    };

    for (std::size_t e = 0; e < k && remaining > 1; ++e) {
        if (!active[e]) continue;
        if (auto w = pick_witness(h, active, e, h.edges[e].vertices)) link(e, *w);
    }

    while (remaining > 1) {
        bool removed = false;
        for (std::size_t e = 0; e < k && !removed; ++e) {
            if (!active[e]) continue;
            std::vector<VarId> shared;
            for (VarId v : h.edges[e].vertices) {
                for (std::size_t f = 0; f < k; ++f) {
                    if (f != e && active[f] &&
                        std::binary_search(h.edges[f].vertices.begin(), h.edges[f].vertices.end(), v)) {
                        shared.push_back(v);
                        break;
                    }
                }
            }
            if (auto w = pick_witness(h, active, e, shared)) {
                link(e, *w);
                removed = true;
            }
        }
        if (!removed) {
            CyclicVerdict verdict;
            for (std::size_t e = 0; e < k; ++e) {
                if (active[e]) verdict.residue.push_back(h.edges[e].id);
            }
            return verdict;
        }
    }
    for (auto& adj : tree.adjacency) std::sort(adj.begin(), adj.end());
    return tree;
}

RootedTree root_tree(const JoinTree& tree, NodeId root) {
    RootedTree r;
    r.root = root;
    const std::size_t k = tree.size();
    r.parent.assign(k, std::nullopt);
    r.children.assign(k, {});
    r.depth.assign(k, 0);
    std::vector<bool> seen(k, false);
    std::deque<NodeId> queue{root};
    seen[root] = true;
    while (!queue.empty()) {
        NodeId u = queue.front();
        queue.pop_front();
        for (NodeId v : tree.adjacency[u]) {
            if (seen[v]) continue;
            seen[v] = true;
            r.parent[v] = u;
            r.depth[v] = r.depth[u] + 1;
            r.children[u].push_back(v);
            queue.push_back(v);
        }
    }
    r.preorder = r.subtree(root);
    return r;
}

NodeId choose_root(const JoinTree& tree, const std::vector<VarId>& head) {
    std::vector<VarId> h = head;
    std::sort(h.begin(), h.end());
    NodeId best = 0;
    std::size_t best_count = 0;
    for (NodeId t = 0; t < tree.size(); ++t) {
        std::size_t c = overlap(h, tree.bags[t]);
        if (c > best_count) {
            best = t;
            best_count = c;
        }
    }
    return best;
}

std::optional<NodeId> top_node(const JoinTree& tree, const RootedTree& rooted, VarId v) {
    std::optional<NodeId> best;
    for (NodeId t : rooted.preorder) {
        const auto& bag = tree.bags[t];
        if (!std::binary_search(bag.begin(), bag.end(), v)) continue;
        if (!best || rooted.depth[t] < rooted.depth[*best]) best = t;
    }
    return best;
}

bool is_free_connex_rooting(const JoinTree& tree, NodeId root, const std::vector<VarId>& head,
                            std::size_t num_vars) {
    RootedTree rooted = root_tree(tree, root);
    std::vector<bool> in_head(num_vars, false);
    for (VarId x : head) in_head[x] = true;
    std::vector<std::optional<NodeId>> top(num_vars);
    for (VarId v = 0; v < num_vars; ++v) top[v] = top_node(tree, rooted, v);
    for (VarId x = 0; x < num_vars; ++x) {
        if (!in_head[x] || !top[x]) continue;
        for (VarId y = 0; y < num_vars; ++y) {
            if (in_head[y] || !top[y]) continue;
            if (rooted.is_ancestor(*top[y], *top[x])) return false;
        }
    }
    return true;
}

std::optional<NodeId> free_connex_root(const JoinTree& tree, const std::vector<VarId>& head,
                                       std::size_t num_vars) {
    for (NodeId r = 0; r < tree.size(); ++r) {
        if (is_free_connex_rooting(tree, r, head, num_vars)) return r;
    }
    return std::nullopt;
}

bool satisfies_running_intersection(const JoinTree& tree, std::size_t num_vars) {
    const std::size_t k = tree.size();
    if (k == 0) return true;
    if (tree.edges.size() != k - 1) return false;
    auto connected = [&](const std::vector<bool>& member) {
        NodeId start = k;
        std::size_t count = 0;
        for (NodeId t = 0; t < k; ++t) {
            if (member[t]) {
                ++count;
                if (start == k) start = t;
            }
        }
        if (count == 0) return true;
        std::vector<bool> seen(k, false);
        std::vector<NodeId> stack{start};
        seen[start] = true;
        std::size_t reached = 0;
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            ++reached;
            for (NodeId v : tree.adjacency[u]) {
                if (member[v] && !seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
            }
        }
        return reached == count;
    };
    if (!connected(std::vector<bool>(k, true))) return false;
    for (VarId v = 0; v < num_vars; ++v) {
        std::vector<bool> member(k, false);
        for (NodeId t = 0; t < k; ++t) {
            member[t] = std::binary_search(tree.bags[t].begin(), tree.bags[t].end(), v);
        }
        if (!connected(member)) return false;
    }
    return true;
}

std::string dump_join_tree(const JoinTree& tree, const SumProdQuery& query, NodeId root) {
    RootedTree rooted = root_tree(tree, root);
    std::ostringstream out;
    for (NodeId t : rooted.preorder) {
        const Atom& a = query.atoms[tree.atoms[t]];
        out << std::string(2 * rooted.depth[t], ' ') << '[' << t << "] " << a.predicate << '(';
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            if (i) out << ", ";
            out << query.var_names[a.args[i]];
        }
        out << ")\n";
    }
    return out.str();
}

} // namespace semidl
