#include "semidl/decomposition.hpp"
#include "semidl/program.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace semidl;

namespace {

SumProdQuery body(const std::string& text) {
    return parse_program(text).rules[0].bodies[0];
}

const char* kStar = "T(x1) :- T2(x2), T3(x3), R24(x2,x4), R34(x3,x4), R14(x1,x4). @target T.";

std::set<std::pair<NodeId, NodeId>> undirected(const JoinTree& t) {
    std::set<std::pair<NodeId, NodeId>> out;
    for (auto [a, b] : t.edges) out.emplace(std::min(a, b), std::max(a, b));
    return out;
}

// Brute-force free-connex check for one rooting, written against the definition.
bool brute_free_connex(const JoinTree& t, NodeId root, const std::vector<VarId>& head, std::size_t vars) {
    RootedTree r = root_tree(t, root);
    auto top = [&](VarId v) {
        std::optional<NodeId> best;
        for (NodeId x = 0; x < t.size(); ++x) {
            if (std::find(t.bags[x].begin(), t.bags[x].end(), v) == t.bags[x].end()) continue;
            if (!best || r.depth[x] < r.depth[*best]) best = x;
        }
        return best;
    };
    auto proper_ancestor = [&](NodeId a, NodeId b) {
        for (auto p = r.parent[b]; p; p = r.parent[*p])
            if (*p == a) return true;
        return false;
    };
    for (VarId x : head) {
        for (VarId y = 0; y < vars; ++y) {
            if (std::find(head.begin(), head.end(), y) != head.end()) continue;
            auto tx = top(x);
            auto ty = top(y);
            if (tx && ty && proper_ancestor(*ty, *tx)) return false;
        }
    }
    return true;
}

} // namespace

TEST(Hypergraph, StarEdges) {
    Hypergraph h = build_hypergraph(body(kStar));
    EXPECT_EQ(h.num_vertices, 4u);
    ASSERT_EQ(h.edges.size(), 5u);
    // x1..x4 are ids 0..3 (head first)
    EXPECT_EQ(h.edges[0].vertices, (std::vector<VarId>{1}));
    EXPECT_EQ(h.edges[1].vertices, (std::vector<VarId>{2}));
    EXPECT_EQ(h.edges[2].vertices, (std::vector<VarId>{1, 3}));
    EXPECT_EQ(h.edges[3].vertices, (std::vector<VarId>{2, 3}));
    EXPECT_EQ(h.edges[4].vertices, (std::vector<VarId>{0, 3}));
}

TEST(Hypergraph, DuplicateAtomsKeepDistinctEdges) {
    Hypergraph h = build_hypergraph(body("T(x) :- R(x,y), R(x,y). @target T."));
    ASSERT_EQ(h.edges.size(), 2u);
    EXPECT_NE(h.edges[0].id, h.edges[1].id);
}

TEST(Gyo, StarMatchesExpectedTree) {
    auto res = gyo_join_tree(build_hypergraph(body(kStar)));
    ASSERT_TRUE(std::holds_alternative<JoinTree>(res));
    const JoinTree& t = std::get<JoinTree>(res);
    // R14-R24, R24-T2, R14-R34, R34-T3
    std::set<std::pair<NodeId, NodeId>> expected{{2, 4}, {0, 2}, {3, 4}, {1, 3}};
    EXPECT_EQ(undirected(t), expected);
    EXPECT_TRUE(satisfies_running_intersection(t, 4));
}

TEST(Gyo, TriangleIsCyclic) {
    auto res = gyo_join_tree(build_hypergraph(body("Q(x1) :- R(x1,x2), S(x2,x3), W(x3,x1). @target Q.")));
    ASSERT_TRUE(std::holds_alternative<CyclicVerdict>(res));
    auto residue = std::get<CyclicVerdict>(res).residue;
    std::sort(residue.begin(), residue.end());
    EXPECT_EQ(residue, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Gyo, TwoAtomChainIsPath) {
    auto res = gyo_join_tree(build_hypergraph(body("Q(x1,x3) :- R(x1,x2), S(x2,x3). @target Q.")));
    ASSERT_TRUE(std::holds_alternative<JoinTree>(res));
    EXPECT_EQ(undirected(std::get<JoinTree>(res)), (std::set<std::pair<NodeId, NodeId>>{{0, 1}}));
}

TEST(Gyo, VerdictInvariantUnderShuffle) {
    const char* programs[] = {
        kStar,
        "Q(x1) :- R(x1,x2), S(x2,x3), W(x3,x1). @target Q.",
        "Q(a) :- R(a,b), S(b,c), W(c,d), V(d,a), X(a,c). @target Q.",
        "Q(a) :- R(a,b,c), S(b,c,d), W(c,d,e), V(a,e). @target Q.",
        "Q(a) :- R(a,b,c), S(b,c), W(c,d), V(d,e), X(a). @target Q.",
    };
    std::mt19937_64 rng(7);
    for (const char* text : programs) {
        SumProdQuery q = body(text);
        bool acyclic = std::holds_alternative<JoinTree>(gyo_join_tree(build_hypergraph(q)));
        for (int trial = 0; trial < 20; ++trial) {
            SumProdQuery shuffled = q;
            std::shuffle(shuffled.atoms.begin(), shuffled.atoms.end(), rng);
            auto res = gyo_join_tree(build_hypergraph(shuffled));
            EXPECT_EQ(std::holds_alternative<JoinTree>(res), acyclic) << text;
            if (auto* t = std::get_if<JoinTree>(&res)) {
                EXPECT_TRUE(satisfies_running_intersection(*t, q.num_vars()));
            }
        }
    }
}

TEST(Gyo, RandomAcyclicBodiesSatisfyRunningIntersection) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        // grow a random tree of binary atoms: always acyclic
        std::size_t vars = 2 + rng() % 5;
        std::string text = "Q(v0) :- ";
        for (std::size_t v = 1; v < vars; ++v) {
            std::size_t parent = rng() % v;
            if (v > 1) text += ", ";
            text += "E" + std::to_string(v) + "(v" + std::to_string(parent) + ",v" + std::to_string(v) + ")";
        }
        text += ". @target Q.";
        SumProdQuery q = body(text);
        auto res = gyo_join_tree(build_hypergraph(q));
        ASSERT_TRUE(std::holds_alternative<JoinTree>(res)) << text;
        const JoinTree& t = std::get<JoinTree>(res);
        EXPECT_TRUE(satisfies_running_intersection(t, q.num_vars())) << text;
        EXPECT_EQ(t.edges.size() + 1, t.size());
    }
}

TEST(RunningIntersection, DetectsBrokenTree) {
    JoinTree t;
    t.bags = {{0, 1}, {2}, {1, 3}};
    t.atoms = {0, 1, 2};
    t.edges = {{0, 1}, {1, 2}};
    t.adjacency = {{1}, {0, 2}, {1}};
    EXPECT_FALSE(satisfies_running_intersection(t, 4));
    t.bags = {{0, 1}, {1, 2}, {1, 3}};
    EXPECT_TRUE(satisfies_running_intersection(t, 4));
}

TEST(ChooseRoot, StarPicksR14) {
    const JoinTree t = std::get<JoinTree>(gyo_join_tree(build_hypergraph(body(kStar))));
    EXPECT_EQ(choose_root(t, {0}), 4u);
    EXPECT_EQ(choose_root(t, {}), 0u);
}

TEST(ChooseRoot, TieGoesToSmallestId) {
    const JoinTree t = std::get<JoinTree>(
        gyo_join_tree(build_hypergraph(body("Q(a,b) :- R(a,c), S(c,b). @target Q."))));
    EXPECT_EQ(choose_root(t, {0, 1}), 0u);
}

TEST(FreeConnex, StarRootQualifies) {
    const JoinTree t = std::get<JoinTree>(gyo_join_tree(build_hypergraph(body(kStar))));
    EXPECT_TRUE(is_free_connex_rooting(t, 4, {0}, 4));
    for (NodeId r = 0; r < t.size(); ++r) {
        EXPECT_EQ(is_free_connex_rooting(t, r, {0}, 4), brute_free_connex(t, r, {0}, 4)) << r;
    }
    auto root = free_connex_root(t, {0}, 4);
    ASSERT_TRUE(root.has_value());
    EXPECT_EQ(*root, 4u);
}

TEST(FreeConnex, AllHeadVariablesAnyRoot) {
    const JoinTree t = std::get<JoinTree>(
        gyo_join_tree(build_hypergraph(body("Q(x,y) :- A(x), R(x,y), B(y). @target Q."))));
    for (NodeId r = 0; r < t.size(); ++r) EXPECT_TRUE(is_free_connex_rooting(t, r, {0, 1}, 2));
    EXPECT_EQ(free_connex_root(t, {0, 1}, 2), std::optional<NodeId>(0));
}

TEST(FreeConnex, TransitiveClosureBodyIsNot) {
    const JoinTree t = std::get<JoinTree>(
        gyo_join_tree(build_hypergraph(body("T(x1,x2) :- T(x1,x3), R(x3,x2). @target T."))));
    EXPECT_FALSE(free_connex_root(t, {0, 1}, 3).has_value());
}

TEST(FreeConnex, AgreesWithBruteForceOnRandomTrees) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t vars = 2 + rng() % 5;
        std::size_t head = 1 + rng() % 2;
        std::string h = "v0";
        if (head == 2) h += ",v1";
        std::string text = "Q(" + h + ") :- ";
        for (std::size_t v = 1; v < vars; ++v) {
            if (v > 1) text += ", ";
            text += "E" + std::to_string(v) + "(v" + std::to_string(rng() % v) + ",v" + std::to_string(v) + ")";
        }
        text += ". @target Q.";
        SumProdQuery q = body(text);
        const JoinTree t = std::get<JoinTree>(gyo_join_tree(build_hypergraph(q)));
        auto r = free_connex_root(t, q.head, q.num_vars());
        std::optional<NodeId> expected;
        for (NodeId c = 0; c < t.size() && !expected; ++c)
            if (brute_free_connex(t, c, q.head, q.num_vars())) expected = c;
        EXPECT_EQ(r, expected) << text;
    }
}

TEST(JoinTreeDump, IndentedLines) {
    SumProdQuery q = body(kStar);
    const JoinTree t = std::get<JoinTree>(gyo_join_tree(build_hypergraph(q)));
    std::string dump = dump_join_tree(t, q, 4);
    EXPECT_EQ(dump.substr(0, dump.find('\n')), "[4] R14(x1, x4)");
    EXPECT_NE(dump.find("  [2] R24(x2, x4)"), std::string::npos);
    EXPECT_NE(dump.find("    [0] T2(x2)"), std::string::npos);
}
