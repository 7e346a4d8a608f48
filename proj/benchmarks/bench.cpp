#include <benchmark/benchmark.h>

#include <set>
#include <string>

#include "semcom/channel.hpp"
#include "semcom/knowledge.hpp"
#include "semcom/rng.hpp"

using namespace semcom;

namespace {

KnowledgeGraph random_graph(std::uint64_t seed, std::size_t n, double edge_prob) {
    Rng rng(seed);
    KnowledgeGraph g(GraphKind::fused);
    for (EntityId id = 0; id < n; ++id)
        g.add_entity({id, "entity " + std::to_string(id), "thing", {}});
    for (EntityId a = 0; a < n; ++a)
        for (EntityId b = a + 1; b < n; ++b)
            if (rng.bernoulli(edge_prob)) g.add_triple({a, "related_to", b});
    // stitch everything into one component so terminal draws never throw
    for (EntityId id = 1; id < n; ++id)
        if (!g.has_triple({id - 1, "next", id})) g.add_triple({id - 1, "next", id});
    return g;
}

void BM_SteinerSubgraph(benchmark::State& state) {
    std::size_t n = static_cast<std::size_t>(state.range(0));
    KnowledgeGraph g = random_graph(7, n, 4.0 / static_cast<double>(n));
    std::set<EntityId> terminals{0, n / 3, n / 2, n - 1};
    for (auto _ : state) {
        benchmark::DoNotOptimize(steiner_subgraph(g, terminals));
    }
}
BENCHMARK(BM_SteinerSubgraph)->Arg(16)->Arg(64)->Arg(256);

void BM_RandomWalkCollect(benchmark::State& state) {
    KnowledgeGraph g = random_graph(11, 128, 0.05);
    std::set<EntityId> seeds{0, 40, 80, 120};
    WalkParams params{16, 4, 2};
    for (auto _ : state) {
        benchmark::DoNotOptimize(random_walk_collect(g, seeds, params, 99));
    }
}
BENCHMARK(BM_RandomWalkCollect);

void BM_PsiIntersect(benchmark::State& state) {
    std::set<std::string> a, b;
    for (int i = 0; i < 200; ++i) a.insert("left " + std::to_string(i));
    for (int i = 100; i < 300; ++i) b.insert("left " + std::to_string(i));
    Bytes salt = to_bytes("bench-salt");
    for (auto _ : state) {
        benchmark::DoNotOptimize(psi_intersect(a, b, salt));
    }
}
BENCHMARK(BM_PsiIntersect);

struct CodecFixture {
    KnowledgeGraph global{GraphKind::global};
    KnowledgeGraph priv{GraphKind::private_knowledge};
    Codebook global_cb;
    Codebook private_cb;
    TokenStream stream;

    CodecFixture() {
        for (EntityId id = 0; id < 512; ++id)
            global.add_entity({id, "word" + std::to_string(id), "thing", {}});
        for (EntityId id = 0; id < 24; ++id)
            priv.add_entity({id, "secret" + std::to_string(id), "credential", {}});
        for (EntityId id = 1; id < 24; ++id)
            priv.add_triple({id - 1, "chain", id});
        SharedSecret key = SharedSecret::derive(5);
        global_cb = build_global_codebook(global, 16);
        private_cb = build_private_codebook(priv, key, 16);
        Rng rng(3);
        for (int i = 0; i < 64; ++i) {
            if (rng.bernoulli(0.2))
                stream.tokens.push_back(
                    Token::priv(static_cast<std::uint32_t>(rng.next_below(24))));
            else
                stream.tokens.push_back(Token::global(
                    static_cast<std::uint32_t>(2 + rng.next_below(512))));
        }
    }
};

void BM_EncodeTokens(benchmark::State& state) {
    CodecFixture fx;
    for (auto _ : state) {
        benchmark::DoNotOptimize(encode_tokens(fx.stream, fx.global_cb, fx.private_cb));
    }
}
BENCHMARK(BM_EncodeTokens);

void BM_DecodeTokens(benchmark::State& state) {
    CodecFixture fx;
    BitFrame frame = encode_tokens(fx.stream, fx.global_cb, fx.private_cb);
    for (auto _ : state) {
        benchmark::DoNotOptimize(decode_tokens(frame, fx.global_cb, fx.private_cb));
    }
}
BENCHMARK(BM_DecodeTokens);

void BM_Transmit(benchmark::State& state) {
    BitFrame frame;
    frame.bits.assign(4096, 0);
    for (std::size_t i = 0; i < frame.bits.size(); i += 2) frame.bits[i] = 1;
    ChannelConfig cfg{0.05, 1234, true};
    std::uint64_t frame_id = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(transmit(frame, cfg, frame_id++));
    }
}
BENCHMARK(BM_Transmit);

} // namespace

BENCHMARK_MAIN();
