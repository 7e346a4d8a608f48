#include "semcom/adversary.hpp"

#include <algorithm>

namespace semcom {

const char* to_string(AttackerClass cls) {
    switch (cls) {
        case AttackerClass::a_bits: return "A_bits";
        case AttackerClass::b_global: return "B_global";
        case AttackerClass::c_personal: return "C_personal";
    }
    return "?";
}

EavesdropperProfile EavesdropperProfile::bits_only(unsigned width) {
    EavesdropperProfile p;
    p.cls = AttackerClass::a_bits;
    p.width = width;
    return p;
}

EavesdropperProfile EavesdropperProfile::with_global(KnowledgeGraph global_kg,
                                                     unsigned width) {
    EavesdropperProfile p;
    p.cls = AttackerClass::b_global;
    p.global_kg = std::move(global_kg);
    p.width = width;
    return p;
}

EavesdropperProfile EavesdropperProfile::with_personal(KnowledgeGraph global_kg,
                                                       KnowledgeGraph personal_tx,
                                                       KnowledgeGraph personal_rx,
                                                       unsigned width, double theta,
                                                       const WalkParams& walk,
                                                       std::size_t inference_depth) {
    EavesdropperProfile p;
    p.cls = AttackerClass::c_personal;
    p.global_kg = std::move(global_kg);
    p.personal_tx = std::move(personal_tx);
    p.personal_rx = std::move(personal_rx);
    p.width = width;
    p.theta = theta;
    p.walk = walk;
    p.inference_depth = inference_depth;
    return p;
}

GroundTruth ground_truth(const TokenStream& sent, const KnowledgeGraph& fused,
                         const KnowledgeGraph& private_kg, const Codebook& global_cb,
                         std::size_t inference_depth) {
    GroundTruth truth;
    std::vector<std::string> priv_vocab = private_vocabulary(private_kg);
    std::set<EntityId> sensitive_ids;
    for (const Token& tok : sent.tokens) {
        if (tok.provenance == Provenance::global_scope) {
            if (tok.id == kUnknownTokenId || tok.id == kEraseTokenId) continue;
            if (tok.id >= global_cb.size()) continue;
            const std::string& sym = global_cb.symbol(tok.id);
            if (resolve_entity_by_symbol(fused, sym)) truth.public_names.insert(sym);
        } else if (tok.provenance == Provenance::private_scope) {
            if (tok.id >= priv_vocab.size()) continue;
            if (auto id = resolve_entity_by_symbol(private_kg, priv_vocab[tok.id])) {
                sensitive_ids.insert(*id);
                truth.sensitive_names.insert(priv_vocab[tok.id]);
            }
        }
    }
    truth.facts = infer_semantics(sensitive_ids, private_kg, inference_depth);
    return truth;
}

namespace {

double rate(std::size_t hits, std::size_t total) {
    // Empty ground truth means there was nothing to leak or to miss.
    if (total == 0) return 1.0;
    return static_cast<double>(hits) / static_cast<double>(total);
}

template <typename T>
std::size_t intersection_size(const std::set<T>& a, const std::set<T>& b) {
    std::size_t n = 0;
    for (const T& x : a)
        if (b.count(x)) ++n;
    return n;
}

} // namespace

LeakageReport score_leakage(const GroundTruth& truth, const RecoveredArtifacts& recovered) {
    LeakageReport report;
    report.public_entity_recovery_rate =
        rate(intersection_size(recovered.public_names, truth.public_names),
             truth.public_names.size());
    report.sensitive_entity_recovery_rate =
        rate(intersection_size(recovered.sensitive_names, truth.sensitive_names),
             truth.sensitive_names.size());
    std::size_t fact_hits = intersection_size(recovered.facts, truth.facts);
    report.inferred_triple_precision = rate(fact_hits, recovered.facts.size());
    report.inferred_triple_recall = rate(fact_hits, truth.facts.size());
    double pr = report.inferred_triple_precision + report.inferred_triple_recall;
    report.inferred_triple_f1 =
        pr == 0.0 ? 0.0
                  : 2.0 * report.inferred_triple_precision * report.inferred_triple_recall / pr;
    report.frames_observed = recovered.frames_observed;
    report.undecoded_chunk_fraction =
        recovered.total_chunks == 0
            ? 0.0
            : static_cast<double>(recovered.undecoded_chunks) /
                  static_cast<double>(recovered.total_chunks);
    return report;
}

LeakageReport attack_bits(const std::vector<BitFrame>& tapped,
                          const EavesdropperProfile& profile) {
    if (profile.cls != AttackerClass::a_bits)
        raise(Errc::validation_error, "attack_bits requires a class-A profile");
    LeakageReport report;
    report.frames_observed = tapped.size();
    // Bits alone carry no decodable semantics for this observer.
    report.undecoded_chunk_fraction = tapped.empty() ? 0.0 : 1.0;
    return report;
}

AttackOutcome attack_global(const BitFrame& tapped, const EavesdropperProfile& profile,
                            const GroundTruth& truth) {
    if (profile.cls != AttackerClass::b_global || !profile.global_kg)
        raise(Errc::validation_error, "attack_global requires a class-B profile");
    Codebook global_cb = build_global_codebook(*profile.global_kg, profile.width);

    AttackOutcome out;
    Codebook no_private_book;
    out.decoded = decode_tokens(tapped, global_cb, no_private_book);
    for (const Token& tok : out.decoded.tokens) {
        switch (tok.provenance) {
            case Provenance::global_scope: {
                if (tok.id == kUnknownTokenId || tok.id == kEraseTokenId) break;
                const std::string& sym = global_cb.symbol(tok.id);
                if (resolve_entity_by_symbol(*profile.global_kg, sym))
                    out.artifacts.public_names.insert(sym);
                break;
            }
            case Provenance::private_scope:
                break; // unreachable against an empty private book
            case Provenance::erasure:
                ++out.artifacts.undecoded_chunks;
                break;
        }
    }
    out.artifacts.total_chunks = out.decoded.tokens.size();
    out.artifacts.frames_observed = 1;
    out.report = score_leakage(truth, out.artifacts);
    return out;
}

AttackOutcome attack_personal(const BitFrame& tapped, const EavesdropperProfile& profile,
                              std::string_view msg, std::uint64_t walk_seed,
                              const GroundTruth& truth) {
    if (profile.cls != AttackerClass::c_personal || !profile.global_kg ||
        (!profile.personal_tx && !profile.personal_rx))
        raise(Errc::validation_error, "attack_personal requires a class-C profile");

    // The attacker re-runs the legitimate pipeline over the knowledge it
    // holds. Fusion output does not depend on the salt, so any local salt
    // works.
    const KnowledgeGraph& tx = profile.personal_tx ? *profile.personal_tx
                                                   : *profile.personal_rx;
    const KnowledgeGraph& rx = profile.personal_rx ? *profile.personal_rx
                                                   : *profile.personal_tx;
    Bytes salt = to_bytes("wiretap");
    KnowledgeGraph fused = fuse(tx, rx, salt, profile.theta);

    std::optional<KnowledgeGraph> private_kg;
    try {
        private_kg = construct_private_knowledge(fused, msg, profile.walk, walk_seed);
    } catch (const Error&) {
        // Held knowledge does not cover the message; fall back to global-only.
    }

    Codebook global_cb = build_global_codebook(*profile.global_kg, profile.width);
    std::optional<Codebook> private_cb;
    if (private_kg && profile.holds_shared_secret())
        private_cb = build_private_codebook(*private_kg, *profile.shared_secret,
                                            profile.width);

    AttackOutcome out;
    Codebook no_private_book;
    out.decoded = decode_tokens(tapped, global_cb,
                                private_cb ? *private_cb : no_private_book);
    // Wire-level misses are counted before repair, matching the receiver's
    // accounting; repair then fills what held knowledge can bridge.
    for (const Token& tok : out.decoded.tokens)
        if (tok.provenance == Provenance::erasure) ++out.artifacts.undecoded_chunks;
    out.artifacts.total_chunks = out.decoded.tokens.size();
    if (private_kg && profile.mirror_repair)
        out.decoded = repair_missing(out.decoded, *private_kg, global_cb);

    std::vector<std::string> priv_vocab;
    if (private_kg) priv_vocab = private_vocabulary(*private_kg);

    std::set<EntityId> sensitive_ids;
    for (const Token& tok : out.decoded.tokens) {
        switch (tok.provenance) {
            case Provenance::global_scope: {
                if (tok.id == kUnknownTokenId || tok.id == kEraseTokenId) break;
                const std::string& sym = global_cb.symbol(tok.id);
                if (resolve_entity_by_symbol(*profile.global_kg, sym) ||
                    resolve_entity_by_symbol(fused, sym))
                    out.artifacts.public_names.insert(sym);
                break;
            }
            case Provenance::private_scope:
                if (private_kg && tok.id < priv_vocab.size()) {
                    if (auto id =
                            resolve_entity_by_symbol(*private_kg, priv_vocab[tok.id])) {
                        sensitive_ids.insert(*id);
                        out.artifacts.sensitive_names.insert(priv_vocab[tok.id]);
                    }
                }
                break;
            case Provenance::erasure:
                break;
        }
    }
    out.artifacts.frames_observed = 1;
    if (private_kg && !sensitive_ids.empty())
        out.artifacts.facts =
            infer_semantics(sensitive_ids, *private_kg, profile.inference_depth);
    out.report = score_leakage(truth, out.artifacts);
    return out;
}

} // namespace semcom
