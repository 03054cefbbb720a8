#include "oracles.hpp"
#include "random_system.hpp"
#include "semidl/error.hpp"
#include "semidl/grounding.hpp"
#include "semidl/solver.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace semidl;

namespace {

Program corpus(const std::string& name) {
    return parse_program(oracle::read_file(std::string(SEMIDL_CORPUS_DIR) + "/" + name + ".dl"));
}

struct Graph {
    std::size_t n = 0;
    std::vector<oracle::Edge> edges;
};

Graph random_graph(std::size_t n, double density, std::mt19937_64& rng) {
    Graph g{n, {}};
    std::bernoulli_distribution keep(density);
    std::uniform_int_distribution<std::uint64_t> w(1, 10);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
            if (u != v && keep(rng)) g.edges.emplace_back(u, v, w(rng));
    return g;
}

std::string node(std::size_t i) { return "v" + std::to_string(1000 + i); }

Instance edges_instance(const Graph& g, const Semiring& s) {
    InstanceBuilder b(s);
    for (const auto& [u, v, w] : g.edges) {
        Value val = s.kind() == SemiringKind::tropical ? Value::tropical(static_cast<double>(w)) : s.one();
        b.add("R", {node(u), node(v)}, val);
    }
    return std::move(b).build();
}

// Builds x_ab = e_ab + x_aa * f_a * e_ab with x_aa defined as zero.
Grounding small_system() {
    Grounding g(Semiring::tropical(), {"a", "b"});
    PredId T = g.predicate("T");
    PredId R = g.predicate("R");
    PredId U = g.predicate("U");
    AtomId x_ab = g.variable(T, {0, 1});
    AtomId x_aa = g.variable(T, {0, 0});
    AtomId e_ab = g.coefficient(R, {0, 1}, Value::tropical(1));
    AtomId f_a = g.coefficient(U, {0}, Value::tropical(1));
    g.define(x_ab);
    g.define(x_aa);
    g.add_monomial(x_ab, {e_ab});
    g.add_monomial(x_ab, {x_aa, f_a, e_ab});
    g.close();
    return g;
}

} // namespace

TEST(Canonical, SmallSystemShape) {
    Grounding g = small_system();
    TwoCanonicalSystem sys = to_two_canonical(g);
    Node x_ab = sys.node_of(*g.find(*g.find_predicate("T"), {0, 1}));
    Node x_aa = sys.node_of(*g.find(*g.find_predicate("T"), {0, 0}));
    Node e_ab = sys.node_of(*g.find(*g.find_predicate("R"), {0, 1}));
    Node f_a = sys.node_of(*g.find(*g.find_predicate("U"), {0}));
    const auto& top = sys.equations()[*sys.definition(x_ab)];
    EXPECT_EQ(top.op, Op::plus);
    EXPECT_EQ(top.a, e_ab);
    Node y1 = top.b;
    const auto& e1 = sys.equations()[*sys.definition(y1)];
    EXPECT_EQ(e1.op, Op::times);
    EXPECT_EQ(e1.a, x_aa);
    Node y2 = e1.b;
    const auto& e2 = sys.equations()[*sys.definition(y2)];
    EXPECT_EQ(e2.op, Op::times);
    EXPECT_EQ(e2.a, f_a);
    EXPECT_EQ(e2.b, e_ab);
    const auto& zero = sys.equations()[*sys.definition(x_aa)];
    EXPECT_EQ(zero.op, Op::plus);
    EXPECT_EQ(zero.a, TwoCanonicalSystem::zero_node);
    EXPECT_EQ(zero.b, TwoCanonicalSystem::zero_node);
    EXPECT_EQ(sys.variable_count(), 4u);
    EXPECT_LE(sys.size(), 4 * g.size());
}

TEST(Canonical, LoneCoefficientTimesOne) {
    Grounding g(Semiring::boolean(), {"a"});
    PredId T = g.predicate("T");
    AtomId x = g.variable(T, {0});
    AtomId e = g.coefficient(g.predicate("R"), {0}, Value::boolean(true));
    g.define(x);
    g.add_monomial(x, {e});
    g.close();
    TwoCanonicalSystem sys = to_two_canonical(g);
    ASSERT_EQ(sys.equations().size(), 1u);
    const auto& eq = sys.equations()[0];
    EXPECT_EQ(eq.op, Op::times);
    EXPECT_EQ(eq.a, sys.node_of(e));
    EXPECT_EQ(eq.b, TwoCanonicalSystem::one_node);
}

TEST(Canonical, FiveFactorMonomial) {
    Grounding g(Semiring::naturals(), {"a", "b", "c", "d", "e"});
    PredId T = g.predicate("T");
    PredId R = g.predicate("R");
    AtomId x = g.variable(T, {0});
    Monomial m;
    for (ConstId c = 0; c < 5; ++c) m.push_back(g.coefficient(R, {c}, Value::natural(2)));
    g.define(x);
    g.add_monomial(x, m);
    g.close();
    TwoCanonicalSystem sys = to_two_canonical(g);
    std::size_t times = 0;
    for (const auto& eq : sys.equations()) times += eq.op == Op::times;
    EXPECT_EQ(times, 4u);
    EXPECT_EQ(sys.equations().size(), 4u);
    // |G| = 1 + 5; canonical = 3 * 4
    EXPECT_EQ(g.size(), 6u);
    EXPECT_EQ(sys.size(), 12u);
    EXPECT_LE(sys.size(), 4 * g.size());
    Solution s = kleene(sys);
    EXPECT_EQ(s.h[x], Value::natural(32));
}

TEST(Canonical, DependencyIndexCountsOccurrences) {
    Grounding g(Semiring::boolean(), {"a"});
    PredId T = g.predicate("T");
    AtomId x = g.variable(T, {0});
    AtomId e = g.coefficient(g.predicate("R"), {0}, Value::boolean(true));
    g.define(x);
    g.add_monomial(x, {x, x});
    g.add_monomial(x, {e});
    g.close();
    TwoCanonicalSystem sys = to_two_canonical(g);
    std::size_t listed = 0;
    const auto& deps = sys.dependents()[sys.node_of(x)];
    for (auto e_id : std::set<std::uint32_t>(deps.begin(), deps.end())) {
        const auto& eq = sys.equations()[e_id];
        listed += (eq.a == sys.node_of(x)) + (eq.b == sys.node_of(x));
    }
    EXPECT_EQ(listed, sys.dependents()[sys.node_of(x)].size());
    EXPECT_GE(listed, 2u);
}

TEST(Canonical, PreservesFixpoint) {
    std::mt19937_64 rng(12);
    for (const char* name : {"tc", "tc_guarded", "samegen", "andersen", "ternary", "chain4"}) {
        Program p = corpus(name);
        for (int t = 0; t < 5; ++t) {
            Graph gr = random_graph(5, 0.3, rng);
            InstanceBuilder b(Semiring::tropical());
            for (const auto& [sym, arity] : p.edb_schema) {
                for (const auto& [u, v, w] : gr.edges) {
                    std::vector<std::string> tup{node(u), node(v)};
                    tup.resize(arity, node((u + v) % 5));
                    b.add(sym, tup, Value::tropical(static_cast<double>(w)));
                }
            }
            Instance i = std::move(b).build();
            Grounding g = ground_program(p, i);
            TwoCanonicalSystem sys = to_two_canonical(g);
            EXPECT_LE(sys.size(), 4 * g.size());
            Solution direct = kleene(g);
            Solution canon = kleene(sys);
            ASSERT_TRUE(direct.converged && canon.converged);
            EXPECT_EQ(direct.h, canon.h) << name;
        }
    }
}

TEST(Rank, BooleanTransitiveClosure) {
    Program p = corpus("tc");
    Instance i = parse_facts("R(a,b). R(b,c).", Semiring::boolean());
    Grounding g = ground_program(p, i);
    Solution s = solve_rank(to_two_canonical(g));
    RelationValues t = relation_values(g, s.h, "T");
    auto a = *i.constant_id("a"), b = *i.constant_id("b"), c = *i.constant_id("c");
    RelationValues expected{{{a, b}, Value::boolean(true)}, {{a, c}, Value::boolean(true)}, {{b, c}, Value::boolean(true)}};
    EXPECT_EQ(t, expected);
}

TEST(Rank, MatchesWarshallOnRandomGraphs) {
    std::mt19937_64 rng(31);
    Program p = corpus("tc");
    for (int trial = 0; trial < 20; ++trial) {
        Graph gr = random_graph(8, 0.2, rng);
        Instance i = edges_instance(gr, Semiring::boolean());
        Grounding g = ground_program(p, i);
        Solution s = solve_rank(to_two_canonical(g));
        RelationValues t = relation_values(g, s.h, "T");
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (const auto& [u, v, w] : gr.edges) pairs.emplace_back(u, v);
        auto reach = oracle::warshall(gr.n, pairs);
        std::size_t expected = 0;
        for (std::size_t u = 0; u < gr.n; ++u) {
            for (std::size_t v = 0; v < gr.n; ++v) {
                if (!reach[u][v]) continue;
                ++expected;
                auto cu = i.constant_id(node(u));
                auto cv = i.constant_id(node(v));
                ASSERT_TRUE(cu && cv);
                EXPECT_TRUE(t.contains({*cu, *cv}));
            }
        }
        EXPECT_EQ(t.size(), expected);
    }
}

TEST(Rank, EmptySystemNoOps) {
    Grounding g(Semiring::boolean(), {});
    g.close();
    Solution s = solve_rank(to_two_canonical(g));
    EXPECT_EQ(s.stats.semiring_ops, 0u);
    EXPECT_EQ(s.stats.equation_visits, 0u);
    EXPECT_TRUE(s.h.empty());
}

TEST(Rank, RejectsInfiniteRank) {
    Grounding g(Semiring::tropical(), {});
    g.close();
    EXPECT_THROW(solve_rank(to_two_canonical(g)), CapabilityError);
    Grounding n(Semiring::naturals(), {});
    n.close();
    EXPECT_THROW(solve_rank(to_two_canonical(n)), CapabilityError);
    EXPECT_THROW(solve_absorptive(to_two_canonical(n)), CapabilityError);
}

TEST(Rank, AccessMatchesKleeneAndVisitBound) {
    std::mt19937_64 rng(41);
    Program p = corpus("andersen");
    Semiring s = Semiring::access();
    auto samples = default_samples(s);
    for (int trial = 0; trial < 10; ++trial) {
        InstanceBuilder b(s);
        for (const auto& [sym, arity] : p.edb_schema) {
            for (int k = 0; k < 6; ++k) {
                b.add(sym, {node(rng() % 5), node(rng() % 5)}, samples[1 + rng() % (samples.size() - 1)]);
            }
        }
        Instance i = std::move(b).build();
        Grounding g = ground_program(p, i);
        TwoCanonicalSystem sys = to_two_canonical(g);
        Solution r = solve_rank(sys);
        Solution k = kleene(sys);
        Solution a = solve_absorptive(sys);
        ASSERT_TRUE(k.converged);
        EXPECT_EQ(r.h, k.h);
        EXPECT_EQ(a.h, k.h);
        for (auto v : r.stats.visits) EXPECT_LE(v, 2u * 4u);
    }
}

TEST(Absorptive, PathDistance) {
    Program p = corpus("tc");
    Instance i = parse_facts("R(a,b) = 1. R(b,c) = 2.", Semiring::tropical());
    Grounding g = ground_program(p, i);
    Solution s = solve_absorptive(to_two_canonical(g));
    RelationValues t = relation_values(g, s.h, "T");
    EXPECT_EQ(t.at({*i.constant_id("a"), *i.constant_id("c")}), Value::tropical(3));
}

TEST(Absorptive, AllZeroCoefficients) {
    Grounding g(Semiring::tropical(), {"a"});
    PredId T = g.predicate("T");
    AtomId x = g.variable(T, {0});
    AtomId y = g.variable(g.predicate("S"), {0});
    g.define(x);
    g.define(y);
    g.add_monomial(x, {y});
    g.add_monomial(y, {x, x});
    g.close();
    Solution s = solve_absorptive(to_two_canonical(g));
    EXPECT_EQ(s.h[x], Semiring::tropical().zero());
    EXPECT_EQ(s.h[y], Semiring::tropical().zero());
}

TEST(Absorptive, MatchesFloydWarshallAndPopDiscipline) {
    std::mt19937_64 rng(51);
    Program p = corpus("apsp");
    const Semiring s = Semiring::tropical();
    for (int trial = 0; trial < 10; ++trial) {
        Graph gr = random_graph(12, 0.2, rng);
        Instance i = edges_instance(gr, s);
        Grounding g = ground_program(p, i);
        TwoCanonicalSystem sys = to_two_canonical(g);
        Solution sol = solve_absorptive(sys);
        auto d = oracle::floyd_warshall(gr.n, gr.edges);
        RelationValues t = relation_values(g, sol.h, "T");
        std::size_t finite = 0;
        for (std::size_t u = 0; u < gr.n; ++u) {
            for (std::size_t v = 0; v < gr.n; ++v) {
                if (d[u][v] == oracle::kInf) continue;
                ++finite;
                Tuple key{*i.constant_id(node(u)), *i.constant_id(node(v))};
                EXPECT_EQ(t.at(key), Value::tropical(static_cast<double>(d[u][v])));
            }
        }
        EXPECT_EQ(t.size(), finite);
        std::vector<int> popped(sys.nodes().size(), 0);
        for (std::size_t k = 0; k < sol.pops.size(); ++k) {
            EXPECT_LE(++popped[sol.pops[k].first], 1);
            if (k > 0) EXPECT_TRUE(s.leq(sol.pops[k].second, sol.pops[k - 1].second));
        }
    }
}

TEST(Absorptive, SsspMatchesDijkstra) {
    std::mt19937_64 rng(61);
    Program p = corpus("sssp");
    const Semiring s = Semiring::tropical();
    Graph gr = random_graph(5, 0.4, rng);
    InstanceBuilder b(s);
    for (const auto& [u, v, w] : gr.edges) b.add("R", {node(u), node(v)}, Value::tropical(static_cast<double>(w)));
    b.add("U", {node(0)}, s.one());
    Instance i = std::move(b).build();
    Grounding g = ground_program(p, i);
    Solution sol = solve_absorptive(to_two_canonical(g));
    RelationValues t = relation_values(g, sol.h, "T");
    auto d = oracle::dijkstra(gr.n, gr.edges, 0);
    for (std::size_t v = 0; v < gr.n; ++v) {
        auto c = i.constant_id(node(v));
        if (d[v] == oracle::kInf) {
            if (c) EXPECT_FALSE(t.contains({*c}));
            continue;
        }
        ASSERT_TRUE(c);
        EXPECT_EQ(t.at({*c}), Value::tropical(static_cast<double>(d[v])));
    }
}

TEST(Kleene, GuardedClosureValues) {
    Grounding g(Semiring::tropical(), {"a", "b", "c"});
    PredId T = g.predicate("T");
    PredId R = g.predicate("R");
    PredId U = g.predicate("U");
    AtomId x_ab = g.variable(T, {0, 1}), x_aa = g.variable(T, {0, 0});
    AtomId x_ac = g.variable(T, {0, 2}), x_bc = g.variable(T, {1, 2});
    AtomId e_ab = g.coefficient(R, {0, 1}, Value::tropical(1));
    AtomId e_bc = g.coefficient(R, {1, 2}, Value::tropical(2));
    AtomId f_a = g.coefficient(U, {0}, Value::tropical(1));
    AtomId f_b = g.coefficient(U, {1}, Value::tropical(1));
    for (AtomId x : {x_ab, x_aa, x_ac, x_bc}) g.define(x);
    g.add_monomial(x_ab, {e_ab});
    g.add_monomial(x_ab, {x_aa, f_a, e_ab});
    g.add_monomial(x_ac, {x_ab, f_b, e_bc});
    g.add_monomial(x_bc, {e_bc});
    g.close();
    Solution s = kleene(g);
    ASSERT_TRUE(s.converged);
    EXPECT_LE(s.stats.iterations, 4u);
    EXPECT_EQ(s.h[x_ab], Value::tropical(1));
    EXPECT_EQ(s.h[x_ac], Value::tropical(4));
    EXPECT_EQ(s.h[x_bc], Value::tropical(2));
    EXPECT_EQ(s.h[x_aa], Semiring::tropical().zero());
}

TEST(Kleene, NaturalsDiverge) {
    Grounding g(Semiring::naturals(), {"a"});
    AtomId x = g.variable(g.predicate("T"), {0});
    AtomId one = g.coefficient(g.predicate("E"), {0}, Value::natural(1));
    g.define(x);
    g.add_monomial(x, {x});
    g.add_monomial(x, {one});
    g.close();
    EXPECT_FALSE(kleene(g, 50).converged);
    EXPECT_FALSE(kleene(to_two_canonical(g), 50).converged);
    EXPECT_EQ(solve_auto(to_two_canonical(g), {64, 50}).path, SolverPath::kleene);
}

TEST(Kleene, RankOneAgreesWithRank) {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 30; ++trial) {
        TwoCanonicalSystem sys = oracle::random_system(Semiring::boolean(), 3, 15, rng);
        Solution k = kleene(sys);
        ASSERT_TRUE(k.converged);
        EXPECT_EQ(solve_rank(sys).nodes, k.nodes);
        EXPECT_EQ(solve_absorptive(sys).nodes, k.nodes);
    }
}

TEST(Kleene, AsynchronousStaysBelowSynchronous) {
    std::mt19937_64 rng(81);
    for (auto s : {Semiring::boolean(), Semiring::access()}) {
        for (int trial = 0; trial < 10; ++trial) {
            TwoCanonicalSystem sys = oracle::random_system(s, 4, 20, rng);
            std::vector<std::vector<Value>> rounds;
            SolveObserver sync;
            sync.on_round = [&](std::size_t, const std::vector<Value>& h) { rounds.push_back(h); };
            ASSERT_TRUE(kleene(sys, std::nullopt, &sync).converged);
            std::size_t u = 0;
            bool ok = true;
            SolveObserver async;
            async.on_update = [&](Node, const std::vector<Value>& h) {
                ++u;
                const auto& ref = rounds[std::min(u, rounds.size()) - 1];
                for (std::size_t n = 0; n < h.size(); ++n) ok = ok && s.leq(h[n], ref[n]);
            };
            solve_rank(sys, &async);
            EXPECT_TRUE(ok) << s.token();
        }
    }
}

TEST(Auto, Dispatch) {
    auto empty = [](Semiring s) {
        Grounding g(std::move(s), {});
        g.close();
        return to_two_canonical(g);
    };
    EXPECT_EQ(solve_auto(empty(Semiring::boolean())).path, SolverPath::rank);
    EXPECT_EQ(solve_auto(empty(Semiring::access())).path, SolverPath::rank);
    EXPECT_EQ(solve_auto(empty(Semiring::tropical())).path, SolverPath::absorptive);
    EXPECT_EQ(solve_auto(empty(Semiring::naturals())).path, SolverPath::kleene);
    EXPECT_EQ(solve_auto(empty(Semiring::access()), {2, std::nullopt}).path, SolverPath::absorptive);
    EXPECT_EQ(parse_solver("rank"), SolverChoice::rank);
    EXPECT_THROW(parse_solver("magic"), Error);
}

TEST(ProgramOracle, BooleanTransitiveClosure) {
    Program p = corpus("tc");
    Instance i = parse_facts("R(a,b). R(b,c).", Semiring::boolean());
    ProgramSolution s = kleene_program(p, i);
    ASSERT_TRUE(s.converged);
    auto a = *i.constant_id("a"), b = *i.constant_id("b"), c = *i.constant_id("c");
    RelationValues expected{{{a, b}, Value::boolean(true)}, {{a, c}, Value::boolean(true)}, {{b, c}, Value::boolean(true)}};
    EXPECT_EQ(s.relations.at("T"), expected);
}

TEST(ProgramOracle, EmptyInstance) {
    ProgramSolution s = kleene_program(corpus("andersen"), parse_facts("", Semiring::boolean()));
    ASSERT_TRUE(s.converged);
    EXPECT_TRUE(s.relations["T"].empty());
}

TEST(ProgramOracle, ApspMatchesFloydWarshall) {
    std::mt19937_64 rng(91);
    Graph gr = random_graph(6, 0.35, rng);
    Instance i = edges_instance(gr, Semiring::tropical());
    ProgramSolution s = kleene_program(corpus("apsp"), i);
    ASSERT_TRUE(s.converged);
    auto d = oracle::floyd_warshall(gr.n, gr.edges);
    const RelationValues& t = s.relations.at("T");
    std::size_t finite = 0;
    for (std::size_t u = 0; u < gr.n; ++u)
        for (std::size_t v = 0; v < gr.n; ++v)
            if (d[u][v] != oracle::kInf) {
                ++finite;
                EXPECT_EQ(t.at({*i.constant_id(node(u)), *i.constant_id(node(v))}),
                          Value::tropical(static_cast<double>(d[u][v])));
            }
    EXPECT_EQ(t.size(), finite);
}

TEST(ProgramOracle, AnbncnCountsOnDag) {
    // a-path x->y, b-path y->z, c-path z->w, each of length one: one match for p = 1
    Program p = corpus("anbncn");
    Instance i = parse_facts("A(x,y) = 1. B(y,z) = 1. C(z,w) = 1. I(x,x) = 1. I(y,y) = 1. I(z,z) = 1. I(w,w) = 1.",
                             Semiring::naturals());
    ProgramSolution s = kleene_program(p, i);
    ASSERT_TRUE(s.converged);
    const RelationValues& q = s.relations.at("Q");
    ASSERT_EQ(q.size(), 1u);
    EXPECT_EQ(q.begin()->first, (Tuple{*i.constant_id("x"), *i.constant_id("w")}));
    EXPECT_EQ(q.begin()->second, Value::natural(1));
    Grounding g = ground_program(p, i);
    Solution k = kleene(g);
    ASSERT_TRUE(k.converged);
    EXPECT_EQ(relation_values(g, k.h, "Q"), q);
}
