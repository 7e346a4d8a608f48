#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semcom/crypto.hpp"
#include "semcom/kg.hpp"

namespace semcom {

// The exchanged digest sets of one salted-hash PSI run. This is the protocol
// transcript an eavesdropper could record: digests only, sorted, no counts
// tied to plaintext order.
struct PsiTranscript {
    std::vector<std::string> digests_a; // hex, sorted
    std::vector<std::string> digests_b;

    std::string serialize() const;
};

// SHA-256(salt || name), hex.
std::string psi_digest(std::span<const std::uint8_t> salt, std::string_view name);

// Exact-string intersection computed over salted digests; non-intersecting
// names never appear in the transcript. EmptySalt when salt is empty.
std::set<std::string> psi_intersect(const std::set<std::string>& names_a,
                                    const std::set<std::string>& names_b,
                                    std::span<const std::uint8_t> salt,
                                    PsiTranscript* transcript = nullptr);

enum class MergeDecision { merge, keep_separate };

// Same-name entities merge iff the best cross-pair Jaccard of their context
// signatures reaches theta.
MergeDecision disambiguate(const KnowledgeGraph& g_a, const KnowledgeGraph& g_b,
                           std::string_view shared_name, double theta);

// Merge two personal graphs: PSI over names, per-pair disambiguation,
// transmitter ids keep precedence, receiver entities remapped deterministically
// in ascending id order. No triple is lost or duplicated.
KnowledgeGraph fuse(const KnowledgeGraph& personal_tx, const KnowledgeGraph& personal_rx,
                    std::span<const std::uint8_t> salt, double theta,
                    PsiTranscript* transcript = nullptr);

// Longest-match lookup of message words/phrases against fused entity names
// (case-folded). Empty set when nothing matches.
std::set<EntityId> analyze_message(std::string_view msg, const KnowledgeGraph& fused);

// analyze_message -> random_walk_collect(seeds=terminals) -> steiner_subgraph.
// NoEntitiesMatched / DisconnectedTerminals propagate.
KnowledgeGraph construct_private_knowledge(const KnowledgeGraph& fused,
                                           std::string_view msg,
                                           const WalkParams& walk_params,
                                           std::uint64_t rng_seed);

enum class Permission : unsigned { query_general = 1u, query_private = 2u };

inline unsigned operator|(Permission a, Permission b) {
    return static_cast<unsigned>(a) | static_cast<unsigned>(b);
}

struct AccessCredential {
    std::string principal;
    Bytes nonce;
    Digest tag{};          // HMAC-SHA-256(key, principal || nonce)
    unsigned permissions = 0;

    bool has_permission(Permission p) const {
        return (permissions & static_cast<unsigned>(p)) != 0;
    }

    // principal_id:hex(nonce):hex(mac) -- permissions are issuance state, not
    // part of the authenticated wire form.
    std::string serialize() const;
    static AccessCredential deserialize(std::string_view text, unsigned permissions);
};

AccessCredential issue_credential(const SharedSecret& key, std::string principal,
                                  unsigned permissions, Bytes nonce);

enum class DenyReason { none, bad_tag, insufficient_permission };

const char* to_string(DenyReason reason);

// Either the full graph or a denial carrying zero entities and triples.
struct DistributeResult {
    bool granted = false;
    DenyReason reason = DenyReason::none;
    KnowledgeGraph graph{GraphKind::private_knowledge};
};

DistributeResult distribute(const KnowledgeGraph& private_kg, const AccessCredential& cred,
                            const SharedSecret& key);

struct UpdateDelta {
    std::vector<Entity> added_entities;
    std::vector<Triple> added_triples;
    std::vector<Triple> removed_triples;
    std::uint64_t sequence = 0;
};

// Applies adds then removes atomically; SequenceGap when delta.sequence
// differs from expected_seq, and the input graph is left untouched on any error.
KnowledgeGraph apply_update(const KnowledgeGraph& g, const UpdateDelta& delta,
                            std::uint64_t expected_seq);

// Delta file: `SEQ <n>` header, then record lines in the kg_core TSV dialect
// with a leading type column: E (entity), T (added triple), R (removed triple).
UpdateDelta parse_delta(std::string_view text);
std::string serialize_delta(const UpdateDelta& delta);

} // namespace semcom
