#include "doctest.h"

#include <algorithm>
#include <bit>
#include <map>
#include <queue>
#include <set>
#include <vector>

#include "helpers.hpp"
#include "semcom/kg.hpp"
#include "semcom/rng.hpp"

using namespace semcom;
using testutil::raises;

namespace {

KnowledgeGraph make_graph(std::size_t n,
                          const std::vector<std::pair<EntityId, EntityId>>& edges,
                          GraphKind kind = GraphKind::personal) {
    KnowledgeGraph g(kind);
    for (EntityId id = 0; id < n; ++id)
        g.add_entity({id, "e" + std::to_string(id), "thing", {}});
    for (auto [a, b] : edges) g.add_triple({a, "r", b});
    return g;
}

// Reference BFS distance; -1 when unreachable.
int bfs_distance(const KnowledgeGraph& g, EntityId a, EntityId b) {
    std::map<EntityId, int> dist{{a, 0}};
    std::queue<EntityId> q;
    q.push(a);
    while (!q.empty()) {
        EntityId cur = q.front();
        q.pop();
        if (cur == b) return dist[cur];
        for (EntityId nb : g.adjacent(cur))
            if (dist.emplace(nb, dist[cur] + 1).second) q.push(nb);
    }
    return -1;
}

// All paths from a to b of exactly `len` edges, as id vectors.
void enumerate_paths(const KnowledgeGraph& g, EntityId cur, EntityId b, std::size_t len,
                     std::vector<EntityId>& prefix, std::set<EntityId>& used,
                     std::vector<std::vector<EntityId>>& out) {
    if (prefix.size() == len + 1) {
        if (cur == b) out.push_back(prefix);
        return;
    }
    for (EntityId nb : g.adjacent(cur)) {
        if (used.count(nb)) continue;
        used.insert(nb);
        prefix.push_back(nb);
        enumerate_paths(g, nb, b, len, prefix, used, out);
        prefix.pop_back();
        used.erase(nb);
    }
}

std::set<std::pair<EntityId, EntityId>> distinct_pairs(const KnowledgeGraph& g) {
    std::set<std::pair<EntityId, EntityId>> pairs;
    for (const Triple& t : g.triples())
        pairs.insert({std::min(t.head, t.tail), std::max(t.head, t.tail)});
    return pairs;
}

// Minimum edge count of a connected subgraph containing all terminals, by
// enumerating node subsets; -1 when the terminals are not co-connected.
int brute_force_steiner_edges(const KnowledgeGraph& g,
                              const std::set<EntityId>& terminals) {
    std::vector<EntityId> nodes = g.entity_ids();
    std::size_t n = nodes.size();
    std::uint32_t tmask = 0;
    std::map<EntityId, std::size_t> pos;
    for (std::size_t i = 0; i < n; ++i) pos[nodes[i]] = i;
    for (EntityId t : terminals) tmask |= 1u << pos[t];

    int best = -1;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if ((mask & tmask) != tmask || mask == 0) continue;
        // connectivity of the induced subgraph
        std::uint32_t seen = mask & (~mask + 1); // lowest set bit
        bool grew = true;
        while (grew) {
            grew = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (!(mask & (1u << i)) || (seen & (1u << i))) continue;
                for (EntityId nb : g.adjacent(nodes[i])) {
                    if (seen & (1u << pos[nb])) {
                        seen |= 1u << i;
                        grew = true;
                        break;
                    }
                }
            }
        }
        if (seen != mask) continue;
        int edges = static_cast<int>(std::popcount(mask)) - 1;
        if (best < 0 || edges < best) best = edges;
    }
    return best;
}

KnowledgeGraph random_graph(Rng& rng, std::size_t n, double edge_prob) {
    std::vector<std::pair<EntityId, EntityId>> edges;
    for (EntityId a = 0; a < n; ++a)
        for (EntityId b = a + 1; b < n; ++b)
            if (rng.bernoulli(edge_prob)) edges.push_back({a, b});
    return make_graph(n, edges);
}

std::vector<std::set<EntityId>> components(const KnowledgeGraph& g) {
    std::vector<std::set<EntityId>> comps;
    std::set<EntityId> left;
    for (EntityId id : g.entity_ids()) left.insert(id);
    while (!left.empty()) {
        std::set<EntityId> comp;
        std::queue<EntityId> q;
        q.push(*left.begin());
        comp.insert(*left.begin());
        while (!q.empty()) {
            EntityId cur = q.front();
            q.pop();
            for (EntityId nb : g.adjacent(cur))
                if (comp.insert(nb).second) q.push(nb);
        }
        for (EntityId id : comp) left.erase(id);
        comps.push_back(std::move(comp));
    }
    return comps;
}

} // namespace

TEST_SUITE("kg") {

TEST_CASE("entity and triple bookkeeping enforces the contracts") {
    KnowledgeGraph g(GraphKind::personal);
    g.add_entity({0, "alice", "person", {}});
    g.add_entity({1, "report", "document", {{"pages", "3"}}});
    CHECK(raises(Errc::duplicate_id, [&] { g.add_entity({0, "dup", "x", {}}); }));
    CHECK(raises(Errc::dangling_endpoint, [&] { g.add_triple({0, "wrote", 9}); }));
    g.add_triple({0, "wrote", 1});
    CHECK(raises(Errc::duplicate_triple, [&] { g.add_triple({0, "wrote", 1}); }));
    CHECK(raises(Errc::unknown_entity, [&] { g.entity(5); }));
    CHECK(raises(Errc::unknown_entity, [&] { g.adjacent(5); }));
    CHECK(g.entity(1).attrs.at("pages") == "3");
    CHECK(g.has_triple({0, "wrote", 1}));
    g.remove_triple({0, "wrote", 1});
    CHECK_FALSE(g.has_triple({0, "wrote", 1}));
    g.remove_triple({0, "wrote", 1}); // absent: no-op
    CHECK(g.triple_count() == 0);
    CHECK(g.entity_count() == 2);
}

TEST_CASE("name lookup matches exact and folded forms") {
    KnowledgeGraph g(GraphKind::personal);
    g.add_entity({0, "Apple", "company", {}});
    g.add_entity({1, "apple", "fruit", {}});
    CHECK(g.find_by_name("Apple") == std::vector<EntityId>{0});
    CHECK(g.find_by_folded_name("apple") == std::vector<EntityId>{0, 1});
    CHECK(g.find_by_name("pear").empty());
}

TEST_CASE("neighbors expands hop by hop and excludes the center") {
    KnowledgeGraph g = make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    CHECK(neighbors(g, 2, 1) == std::set<EntityId>{1, 3});
    CHECK(neighbors(g, 2, 2) == std::set<EntityId>{0, 1, 3, 4});
    CHECK(neighbors(g, 0, 10) == std::set<EntityId>{1, 2, 3, 4});
    CHECK(raises(Errc::validation_error, [&] { neighbors(g, 0, 0); }));
}

TEST_CASE("is_connected") {
    CHECK(KnowledgeGraph(GraphKind::personal).is_connected());
    CHECK(make_graph(3, {{0, 1}, {1, 2}}).is_connected());
    CHECK_FALSE(make_graph(3, {{0, 1}}).is_connected());
}

TEST_CASE("shortest_path length agrees with a reference bfs") {
    Rng rng(2024);
    int disconnected_seen = 0;
    for (int iter = 0; iter < 200; ++iter) {
        std::size_t n = 2 + rng.next_below(10);
        KnowledgeGraph g = random_graph(rng, n, 0.25);
        EntityId a = rng.next_below(n);
        EntityId b = rng.next_below(n);
        auto path = shortest_path(g, a, b);
        int want = bfs_distance(g, a, b);
        if (want < 0) {
            CHECK_FALSE(path.has_value());
            ++disconnected_seen;
            continue;
        }
        REQUIRE(path.has_value());
        CHECK(path->size() == static_cast<std::size_t>(want) + 1);
        CHECK(path->front() == a);
        CHECK(path->back() == b);
        for (std::size_t i = 0; i + 1 < path->size(); ++i)
            CHECK(g.adjacent((*path)[i]).count((*path)[i + 1]) == 1);
    }
    CHECK(disconnected_seen > 0); // the sample exercised the nullopt branch
}

TEST_CASE("shortest_path picks the lexicographically smallest tie") {
    Rng rng(77);
    for (int iter = 0; iter < 60; ++iter) {
        std::size_t n = 2 + rng.next_below(6);
        KnowledgeGraph g = random_graph(rng, n, 0.4);
        EntityId a = rng.next_below(n);
        EntityId b = rng.next_below(n);
        auto path = shortest_path(g, a, b);
        int want = bfs_distance(g, a, b);
        if (want < 0) continue;
        std::vector<std::vector<EntityId>> all;
        std::vector<EntityId> prefix{a};
        std::set<EntityId> used{a};
        enumerate_paths(g, a, b, static_cast<std::size_t>(want), prefix, used, all);
        REQUIRE_FALSE(all.empty());
        CHECK(*path == *std::min_element(all.begin(), all.end()));
    }
}

TEST_CASE("random_walk_collect is deterministic and honors its parameters") {
    Rng rng(5);
    KnowledgeGraph g = random_graph(rng, 12, 0.3);
    std::set<EntityId> seeds{0, 5};
    WalkParams params{16, 4, 2};
    auto first = random_walk_collect(g, seeds, params, 99);
    auto again = random_walk_collect(g, seeds, params, 99);
    CHECK(first == again);
    for (EntityId s : seeds) CHECK(first.count(s) == 1);

    // stricter visit threshold can only shrink the collected set
    WalkParams strict{16, 4, 5};
    auto smaller = random_walk_collect(g, seeds, strict, 99);
    CHECK(std::includes(first.begin(), first.end(), smaller.begin(), smaller.end()));

    bool seed_matters = false;
    for (std::uint64_t s = 0; s < 20 && !seed_matters; ++s)
        seed_matters = random_walk_collect(g, seeds, params, s) != first;
    CHECK(seed_matters);
}

TEST_CASE("steiner_subgraph output is valid on random instances") {
    Rng rng(31);
    int checked = 0;
    for (int iter = 0; iter < 120; ++iter) {
        std::size_t n = 3 + rng.next_below(8); // <= 10 nodes
        KnowledgeGraph g = random_graph(rng, n, 0.3);
        auto comps = components(g);
        const auto& comp =
            *std::max_element(comps.begin(), comps.end(),
                              [](const auto& a, const auto& b) { return a.size() < b.size(); });
        std::vector<EntityId> pool(comp.begin(), comp.end());
        std::set<EntityId> terminals;
        std::size_t want = 1 + rng.next_below(std::min<std::size_t>(4, pool.size()));
        while (terminals.size() < want) terminals.insert(pool[rng.next_below(pool.size())]);

        KnowledgeGraph sub = steiner_subgraph(g, terminals);
        CHECK(sub.kind() == GraphKind::private_knowledge);
        CHECK(sub.is_connected());
        for (EntityId t : terminals) CHECK(sub.has_entity(t));
        for (const Triple& t : sub.triples()) CHECK(g.has_triple(t));

        auto pairs = distinct_pairs(sub);
        std::map<EntityId, int> degree;
        for (auto [a, b] : pairs) {
            ++degree[a];
            ++degree[b];
        }
        for (EntityId id : sub.entity_ids())
            if (degree[id] <= 1 && terminals.size() > 1)
                CHECK(terminals.count(id) == 1); // every leaf is a terminal

        int optimum = brute_force_steiner_edges(g, terminals);
        REQUIRE(optimum >= 0);
        CHECK(static_cast<int>(pairs.size()) <= 2 * optimum);
        ++checked;
    }
    CHECK(checked == 120);
}

TEST_CASE("steiner_subgraph rejects terminals split across components") {
    KnowledgeGraph g = make_graph(4, {{0, 1}, {2, 3}});
    CHECK(raises(Errc::disconnected_terminals,
                 [&] { steiner_subgraph(g, {0, 3}); }));
    CHECK(raises(Errc::unknown_entity, [&] { steiner_subgraph(g, {0, 9}); }));
}

TEST_CASE("context signatures count directed relation/category pairs") {
    KnowledgeGraph g(GraphKind::personal);
    g.add_entity({0, "apple", "fruit", {}});
    g.add_entity({1, "tree", "plant", {}});
    g.add_entity({2, "pie", "dish", {}});
    g.add_triple({0, "grows_on", 1});
    g.add_triple({2, "made_from", 0});
    ContextSignature sig = context_signature(g, 0);
    CHECK(sig.total() == 2);
    CHECK(sig.counts.at({SignatureItem::Direction::out, "grows_on", "plant"}) == 1);
    CHECK(sig.counts.at({SignatureItem::Direction::in, "made_from", "dish"}) == 1);

    CHECK(jaccard(sig, sig) == doctest::Approx(1.0));
    CHECK(jaccard(ContextSignature{}, ContextSignature{}) == doctest::Approx(1.0));
    CHECK(jaccard(sig, ContextSignature{}) == doctest::Approx(0.0));

    ContextSignature other;
    other.counts[{SignatureItem::Direction::out, "grows_on", "plant"}] = 1;
    other.counts[{SignatureItem::Direction::out, "eaten_by", "person"}] = 1;
    CHECK(jaccard(sig, other) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("flat file round trip is canonical") {
    KnowledgeGraph g(GraphKind::personal);
    g.add_entity({3, "laptop", "device", {{"os", "linux"}, {"age", "2"}}});
    g.add_entity({1, "alice", "person", {}});
    g.add_triple({1, "uses", 3});

    std::string ents = serialize_entities(g);
    std::string trips = serialize_triples(g);
    CHECK(ents == "1\talice\tperson\n3\tlaptop\tdevice\tage=2;os=linux\n");
    CHECK(trips == "1\tuses\t3\n");

    KnowledgeGraph back = parse_graph(ents, trips, GraphKind::personal);
    CHECK(back == g);
    CHECK(serialize_entities(back) == ents);
    CHECK(serialize_triples(back) == trips);
}

TEST_CASE("flat file parser reports malformed input") {
    CHECK(raises(Errc::parse_error,
                 [] { parse_graph("0\tonly-name", "", GraphKind::personal); }));
    CHECK(raises(Errc::parse_error,
                 [] { parse_graph("x\ta\tb", "", GraphKind::personal); }));
    CHECK(raises(Errc::duplicate_id, [] {
        parse_graph("0\ta\tb\n0\tc\td", "", GraphKind::personal);
    }));
    CHECK(raises(Errc::dangling_endpoint, [] {
        parse_graph("0\ta\tb", "0\tr\t7", GraphKind::personal);
    }));
    KnowledgeGraph ok =
        parse_graph("# comment\n\n0\ta\tb\n", "# comment\n\n", GraphKind::global);
    CHECK(ok.entity_count() == 1);
    CHECK(ok.kind() == GraphKind::global);
}

} // TEST_SUITE
