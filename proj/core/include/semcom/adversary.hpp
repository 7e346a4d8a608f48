#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semcom/channel.hpp"
#include "semcom/codec.hpp"
#include "semcom/knowledge.hpp"

namespace semcom {

enum class AttackerClass { a_bits, b_global, c_personal };

const char* to_string(AttackerClass cls);

// Which knowledge a wiretapper holds. Class A: nothing. Class B: the global
// graph. Class C: the personal graphs of both ends plus the global graph; the
// bound case additionally holds the shared secret and so can rebuild the
// private codebook.
struct EavesdropperProfile {
    AttackerClass cls = AttackerClass::a_bits;
    std::optional<KnowledgeGraph> global_kg;
    std::optional<KnowledgeGraph> personal_tx;
    std::optional<KnowledgeGraph> personal_rx;
    std::optional<SharedSecret> shared_secret;
    unsigned width = 16;
    double theta = 0.5;
    WalkParams walk;
    std::size_t inference_depth = 2;
    bool mirror_repair = true;

    bool holds_shared_secret() const { return shared_secret.has_value(); }

    static EavesdropperProfile bits_only(unsigned width);
    static EavesdropperProfile with_global(KnowledgeGraph global_kg, unsigned width);
    static EavesdropperProfile with_personal(KnowledgeGraph global_kg,
                                             KnowledgeGraph personal_tx,
                                             KnowledgeGraph personal_rx, unsigned width,
                                             double theta, const WalkParams& walk,
                                             std::size_t inference_depth);
};

struct LeakageReport {
    double public_entity_recovery_rate = 0.0;
    double sensitive_entity_recovery_rate = 0.0;
    double inferred_triple_precision = 0.0;
    double inferred_triple_recall = 0.0;
    double inferred_triple_f1 = 0.0;
    std::size_t frames_observed = 0;
    double undecoded_chunk_fraction = 0.0;

    friend bool operator==(const LeakageReport&, const LeakageReport&) = default;
};

// What one trial actually conveyed, in codebook-independent terms (names, so
// reports from parties with different entity id spaces stay comparable).
struct GroundTruth {
    std::set<std::string> public_names;
    std::set<std::string> sensitive_names;
    std::set<InferredFact> facts;
};

GroundTruth ground_truth(const TokenStream& sent, const KnowledgeGraph& fused,
                         const KnowledgeGraph& private_kg, const Codebook& global_cb,
                         std::size_t inference_depth);

struct RecoveredArtifacts {
    std::set<std::string> public_names;
    std::set<std::string> sensitive_names;
    std::set<InferredFact> facts;
    std::size_t undecoded_chunks = 0;
    std::size_t total_chunks = 0;
    std::size_t frames_observed = 0;
};

LeakageReport score_leakage(const GroundTruth& truth, const RecoveredArtifacts& recovered);

LeakageReport attack_bits(const std::vector<BitFrame>& tapped,
                          const EavesdropperProfile& profile);

struct AttackOutcome {
    RecoveredArtifacts artifacts;
    TokenStream decoded;
    LeakageReport report;
};

AttackOutcome attack_global(const BitFrame& tapped, const EavesdropperProfile& profile,
                            const GroundTruth& truth);

// msg and walk_seed model the strongest faithful class-C attacker: it watches
// the same public message stream and mirrors the receiver's collection pass.
AttackOutcome attack_personal(const BitFrame& tapped, const EavesdropperProfile& profile,
                              std::string_view msg, std::uint64_t walk_seed,
                              const GroundTruth& truth);

} // namespace semcom
