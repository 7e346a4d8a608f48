#include "semcom/knowledge.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <tuple>

#include "semcom/text.hpp"

namespace semcom {

SharedSecret SharedSecret::derive(std::uint64_t seed) {
    Bytes material = to_bytes("semcom-shared-secret");
    for (int i = 0; i < 8; ++i)
        material.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
    SharedSecret s;
    s.key = sha256(material);
    return s;
}

std::string PsiTranscript::serialize() const {
    std::string out = "psi-transcript\n";
    for (const std::string& d : digests_a) {
        out += "A ";
        out += d;
        out += '\n';
    }
    for (const std::string& d : digests_b) {
        out += "B ";
        out += d;
        out += '\n';
    }
    return out;
}

std::string psi_digest(std::span<const std::uint8_t> salt, std::string_view name) {
    Bytes material(salt.begin(), salt.end());
    material.insert(material.end(), name.begin(), name.end());
    return to_hex(sha256(material));
}

std::set<std::string> psi_intersect(const std::set<std::string>& names_a,
                                    const std::set<std::string>& names_b,
                                    std::span<const std::uint8_t> salt,
                                    PsiTranscript* transcript) {
    if (salt.empty()) raise(Errc::empty_salt, "psi salt must be nonempty");

    std::map<std::string, std::string> digest_to_a;
    for (const std::string& n : names_a) digest_to_a.emplace(psi_digest(salt, n), n);
    std::set<std::string> digests_b;
    for (const std::string& n : names_b) digests_b.insert(psi_digest(salt, n));

    if (transcript) {
        transcript->digests_a.clear();
        transcript->digests_b.clear();
        for (const auto& [d, n] : digest_to_a) transcript->digests_a.push_back(d);
        transcript->digests_b.assign(digests_b.begin(), digests_b.end());
    }

    std::set<std::string> shared;
    for (const auto& [digest, name] : digest_to_a)
        if (digests_b.count(digest)) shared.insert(name);
    return shared;
}

namespace {

// All cross pairs of same-name entities ordered best-first:
// (jaccard desc, a-id asc, b-id asc).
std::vector<std::tuple<double, EntityId, EntityId>>
ranked_pairs(const KnowledgeGraph& g_a, const KnowledgeGraph& g_b,
             std::string_view shared_name) {
    std::vector<std::tuple<double, EntityId, EntityId>> pairs;
    for (EntityId ida : g_a.find_by_name(shared_name)) {
        ContextSignature sig_a = context_signature(g_a, ida);
        for (EntityId idb : g_b.find_by_name(shared_name)) {
            pairs.emplace_back(jaccard(sig_a, context_signature(g_b, idb)), ida, idb);
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
        if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
        return std::tie(std::get<1>(x), std::get<2>(x)) <
               std::tie(std::get<1>(y), std::get<2>(y));
    });
    return pairs;
}

} // namespace

MergeDecision disambiguate(const KnowledgeGraph& g_a, const KnowledgeGraph& g_b,
                           std::string_view shared_name, double theta) {
    auto pairs = ranked_pairs(g_a, g_b, shared_name);
    if (pairs.empty())
        raise(Errc::unknown_entity, "name '" + std::string(shared_name) +
                                        "' not present in both graphs");
    return std::get<0>(pairs.front()) >= theta ? MergeDecision::merge
                                               : MergeDecision::keep_separate;
}

KnowledgeGraph fuse(const KnowledgeGraph& personal_tx, const KnowledgeGraph& personal_rx,
                    std::span<const std::uint8_t> salt, double theta,
                    PsiTranscript* transcript) {
    if (personal_tx.kind() != GraphKind::personal ||
        personal_rx.kind() != GraphKind::personal)
        raise(Errc::validation_error, "fuse expects two personal graphs");

    std::set<std::string> names_tx;
    for (const auto& [id, e] : personal_tx.entities()) names_tx.insert(e.name);
    std::set<std::string> names_rx;
    for (const auto& [id, e] : personal_rx.entities()) names_rx.insert(e.name);

    std::set<std::string> shared = psi_intersect(names_tx, names_rx, salt, transcript);

    // Greedy best-match pairing per shared name; only pairs meeting theta merge.
    std::map<EntityId, EntityId> rx_to_tx;
    for (const std::string& name : shared) {
        std::set<EntityId> used_a;
        std::set<EntityId> used_b;
        for (const auto& [score, ida, idb] : ranked_pairs(personal_tx, personal_rx, name)) {
            if (score < theta) break;
            if (used_a.count(ida) || used_b.count(idb)) continue;
            used_a.insert(ida);
            used_b.insert(idb);
            rx_to_tx[idb] = ida;
        }
    }

    std::map<EntityId, EntityId> tx_to_rx;
    for (const auto& [rx_id, tx_id] : rx_to_tx) tx_to_rx[tx_id] = rx_id;

    // Merged receiver entities adopt the transmitter id; transmitter fields
    // win, receiver-only attrs are kept.
    KnowledgeGraph fused(GraphKind::fused);
    for (const auto& [id, e] : personal_tx.entities()) {
        Entity copy = e;
        auto partner = tx_to_rx.find(id);
        if (partner != tx_to_rx.end())
            for (const auto& [k, v] : personal_rx.entity(partner->second).attrs)
                copy.attrs.emplace(k, v);
        fused.add_entity(std::move(copy));
    }

    std::map<EntityId, EntityId> rx_remap = rx_to_tx;
    std::set<EntityId> used_ids;
    for (EntityId id : fused.entity_ids()) used_ids.insert(id);
    EntityId next_free = used_ids.empty() ? 0 : *used_ids.rbegin() + 1;

    for (const auto& [id, e] : personal_rx.entities()) {
        if (rx_to_tx.count(id)) continue;
        EntityId target = id;
        if (used_ids.count(target)) target = next_free++;
        used_ids.insert(target);
        rx_remap[id] = target;
        Entity copy = e;
        copy.id = target;
        fused.add_entity(std::move(copy));
    }

    for (const Triple& t : personal_tx.triples()) fused.add_triple(t);
    for (const Triple& t : personal_rx.triples()) {
        Triple mapped{rx_remap.at(t.head), t.relation, rx_remap.at(t.tail)};
        if (!fused.has_triple(mapped)) fused.add_triple(mapped);
    }
    return fused;
}

std::set<EntityId> analyze_message(std::string_view msg, const KnowledgeGraph& fused) {
    if (fused.kind() != GraphKind::fused)
        raise(Errc::validation_error, "analyze_message expects a fused graph");

    // Phrase key: entity name reduced to its case-folded word sequence.
    std::map<std::string, EntityId> phrase_to_id;
    std::size_t max_words = 1;
    for (const auto& [id, e] : fused.entities()) {
        auto words = split_words(e.name);
        if (words.empty()) continue;
        max_words = std::max(max_words, words.size());
        std::string key;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i) key += ' ';
            key += words[i];
        }
        auto it = phrase_to_id.find(key);
        if (it == phrase_to_id.end() || id < it->second) phrase_to_id[key] = id;
    }

    std::vector<std::string> words = split_words(msg);
    std::set<EntityId> matched;
    std::size_t i = 0;
    while (i < words.size()) {
        std::size_t longest = std::min(max_words, words.size() - i);
        bool hit = false;
        for (std::size_t len = longest; len >= 1; --len) {
            std::string key;
            for (std::size_t k = 0; k < len; ++k) {
                if (k) key += ' ';
                key += words[i + k];
            }
            auto it = phrase_to_id.find(key);
            if (it != phrase_to_id.end()) {
                matched.insert(it->second);
                i += len;
                hit = true;
                break;
            }
        }
        if (!hit) ++i;
    }
    return matched;
}

KnowledgeGraph construct_private_knowledge(const KnowledgeGraph& fused,
                                           std::string_view msg,
                                           const WalkParams& walk_params,
                                           std::uint64_t rng_seed) {
    std::set<EntityId> terminals = analyze_message(msg, fused);
    if (terminals.empty())
        raise(Errc::no_entities_matched, "message matches no fused entity");
    std::set<EntityId> collected =
        random_walk_collect(fused, terminals, walk_params, rng_seed);
    return steiner_subgraph(fused, collected);
}

const char* to_string(DenyReason reason) {
    switch (reason) {
        case DenyReason::none: return "none";
        case DenyReason::bad_tag: return "BadTag";
        case DenyReason::insufficient_permission: return "InsufficientPermission";
    }
    return "?";
}

namespace {

Digest credential_tag(const SharedSecret& key, std::string_view principal,
                      std::span<const std::uint8_t> nonce) {
    Bytes msg = to_bytes(principal);
    msg.insert(msg.end(), nonce.begin(), nonce.end());
    return hmac_sha256(key.key, msg);
}

} // namespace

AccessCredential issue_credential(const SharedSecret& key, std::string principal,
                                  unsigned permissions, Bytes nonce) {
    if (principal.find(':') != std::string::npos)
        raise(Errc::validation_error, "principal id must not contain ':'");
    AccessCredential cred;
    cred.tag = credential_tag(key, principal, nonce);
    cred.principal = std::move(principal);
    cred.nonce = std::move(nonce);
    cred.permissions = permissions;
    return cred;
}

std::string AccessCredential::serialize() const {
    return principal + ":" + to_hex(nonce) + ":" + to_hex(tag);
}

AccessCredential AccessCredential::deserialize(std::string_view text, unsigned permissions) {
    auto parts = split(text, ':');
    if (parts.size() != 3)
        raise(Errc::parse_error, "credential must be principal:nonce:mac");
    AccessCredential cred;
    cred.principal = parts[0];
    cred.nonce = from_hex(parts[1]);
    Bytes mac = from_hex(parts[2]);
    if (mac.size() != cred.tag.size())
        raise(Errc::parse_error, "credential mac must be 32 bytes");
    std::copy(mac.begin(), mac.end(), cred.tag.begin());
    cred.permissions = permissions;
    return cred;
}

DistributeResult distribute(const KnowledgeGraph& private_kg, const AccessCredential& cred,
                            const SharedSecret& key) {
    DistributeResult result;
    Digest expected = credential_tag(key, cred.principal, cred.nonce);
    if (!constant_time_equal(expected, cred.tag)) {
        result.reason = DenyReason::bad_tag;
        return result;
    }
    if (!cred.has_permission(Permission::query_private)) {
        result.reason = DenyReason::insufficient_permission;
        return result;
    }
    result.granted = true;
    result.reason = DenyReason::none;
    result.graph = private_kg;
    return result;
}

KnowledgeGraph apply_update(const KnowledgeGraph& g, const UpdateDelta& delta,
                            std::uint64_t expected_seq) {
    if (delta.sequence != expected_seq)
        raise(Errc::sequence_gap, "expected sequence " + std::to_string(expected_seq) +
                                      ", delta carries " + std::to_string(delta.sequence));
    KnowledgeGraph updated = g;
    for (const Entity& e : delta.added_entities) updated.add_entity(e);
    for (const Triple& t : delta.added_triples) updated.add_triple(t);
    for (const Triple& t : delta.removed_triples) updated.remove_triple(t);
    return updated;
}

namespace {

EntityId parse_delta_id(const std::string& field, int line) {
    EntityId value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        raise(Errc::parse_error,
              "delta line " + std::to_string(line) + ": bad id '" + field + "'");
    return value;
}

Triple parse_delta_triple(const std::vector<std::string>& fields, int line) {
    if (fields.size() != 4)
        raise(Errc::parse_error,
              "delta line " + std::to_string(line) + ": triple record needs 3 fields");
    if (fields[2].empty())
        raise(Errc::parse_error, "delta line " + std::to_string(line) + ": empty relation");
    return {parse_delta_id(fields[1], line), fields[2], parse_delta_id(fields[3], line)};
}

} // namespace

UpdateDelta parse_delta(std::string_view text) {
    UpdateDelta delta;
    bool seq_seen = false;
    int line_no = 0;
    for (const std::string& line : split(text, '\n')) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!seq_seen) {
            if (line.rfind("SEQ ", 0) != 0)
                raise(Errc::parse_error,
                      "delta line " + std::to_string(line_no) + ": expected 'SEQ <n>'");
            delta.sequence = parse_delta_id(line.substr(4), line_no);
            seq_seen = true;
            continue;
        }
        auto fields = split(line, '\t');
        if (fields[0] == "E") {
            if (fields.size() < 4 || fields.size() > 5)
                raise(Errc::parse_error, "delta line " + std::to_string(line_no) +
                                             ": entity record needs 3 or 4 fields");
            Entity e;
            e.id = parse_delta_id(fields[1], line_no);
            e.name = fields[2];
            e.category = fields[3];
            if (fields.size() == 5 && !fields[4].empty()) {
                for (const std::string& kv : split(fields[4], ';')) {
                    if (kv.empty()) continue;
                    auto eq = kv.find('=');
                    if (eq == std::string::npos)
                        raise(Errc::parse_error, "delta line " + std::to_string(line_no) +
                                                     ": attr '" + kv + "' lacks '='");
                    e.attrs[kv.substr(0, eq)] = kv.substr(eq + 1);
                }
            }
            delta.added_entities.push_back(std::move(e));
        } else if (fields[0] == "T") {
            delta.added_triples.push_back(parse_delta_triple(fields, line_no));
        } else if (fields[0] == "R") {
            delta.removed_triples.push_back(parse_delta_triple(fields, line_no));
        } else {
            raise(Errc::parse_error, "delta line " + std::to_string(line_no) +
                                         ": unknown record type '" + fields[0] + "'");
        }
    }
    if (!seq_seen) raise(Errc::parse_error, "delta lacks SEQ header");
    return delta;
}

std::string serialize_delta(const UpdateDelta& delta) {
    std::string out = "SEQ " + std::to_string(delta.sequence) + "\n";
    for (const Entity& e : delta.added_entities) {
        out += "E\t" + std::to_string(e.id) + "\t" + e.name + "\t" + e.category;
        if (!e.attrs.empty()) {
            out += '\t';
            bool first = true;
            for (const auto& [k, v] : e.attrs) {
                if (!first) out += ';';
                first = false;
                out += k + "=" + v;
            }
        }
        out += '\n';
    }
    for (const Triple& t : delta.added_triples)
        out += "T\t" + std::to_string(t.head) + "\t" + t.relation + "\t" +
               std::to_string(t.tail) + "\n";
    for (const Triple& t : delta.removed_triples)
        out += "R\t" + std::to_string(t.head) + "\t" + t.relation + "\t" +
               std::to_string(t.tail) + "\n";
    return out;
}

} // namespace semcom
