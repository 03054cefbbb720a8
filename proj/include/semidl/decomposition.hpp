#pragma once

#include "semidl/program.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace semidl {

using NodeId = std::size_t;

struct Hyperedge {
    std::size_t id = 0;
    std::vector<VarId> vertices; // sorted, distinct
    std::size_t atom = 0;        // index into the query's atoms
};

struct Hypergraph {
    std::size_t num_vertices = 0;
    std::vector<Hyperedge> edges;
};

/// One node per hyperedge; node i carries edges[i].
struct JoinTree {
    std::vector<std::vector<VarId>> bags;
    std::vector<std::size_t> atoms;
    std::vector<std::pair<NodeId, NodeId>> edges; // (ear, witness) in removal order
    std::vector<std::vector<NodeId>> adjacency;   // sorted neighbour lists

    std::size_t size() const { return bags.size(); }
};

struct CyclicVerdict {
    std::vector<std::size_t> residue; // edge ids left when no ear remains
};

struct RootedTree {
    NodeId root = 0;
    std::vector<std::optional<NodeId>> parent;
    std::vector<std::vector<NodeId>> children; // ascending ids
    std::vector<std::size_t> depth;
    std::vector<NodeId> preorder;

    bool is_ancestor(NodeId a, NodeId b) const; // proper ancestor
    std::vector<NodeId> subtree(NodeId t) const; // preorder, t first
};

Hypergraph build_hypergraph(const SumProdQuery& query);

std::variant<JoinTree, CyclicVerdict> gyo_join_tree(const Hypergraph& h);

RootedTree root_tree(const JoinTree& tree, NodeId root);

/// Node whose bag holds the most head variables; ties go to the smallest id.
NodeId choose_root(const JoinTree& tree, const std::vector<VarId>& head);

/// Topmost node whose bag contains v, or none when v is in no bag.
std::optional<NodeId> top_node(const JoinTree& tree, const RootedTree& rooted, VarId v);

/// Direct check of the free-connex condition for one rooting.
bool is_free_connex_rooting(const JoinTree& tree, NodeId root, const std::vector<VarId>& head,
                            std::size_t num_vars);

/// First root (by id) under which the tree is free-connex.
std::optional<NodeId> free_connex_root(const JoinTree& tree, const std::vector<VarId>& head,
                                       std::size_t num_vars);

/// Independent verifier: every hyperedge is a bag, and the nodes holding
/// each variable induce a connected subtree.
bool satisfies_running_intersection(const JoinTree& tree, std::size_t num_vars);

/// Indented text rendering of a rooted join tree.
std::string dump_join_tree(const JoinTree& tree, const SumProdQuery& query, NodeId root);

} // namespace semidl
