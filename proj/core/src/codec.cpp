#include "semcom/codec.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "semcom/rng.hpp"
#include "semcom/text.hpp"

namespace semcom {

std::string format_stream(const TokenStream& stream) {
    std::string out;
    for (const Token& t : stream.tokens) {
        if (!out.empty()) out += ' ';
        switch (t.provenance) {
            case Provenance::global_scope: out += "g:" + std::to_string(t.id); break;
            case Provenance::private_scope: out += "p:" + std::to_string(t.id); break;
            case Provenance::erasure: out += "e"; break;
        }
    }
    return out;
}

TokenStream parse_stream(std::string_view text, std::string message_id) {
    TokenStream stream;
    stream.message_id = std::move(message_id);
    for (const std::string& item : split(text, ' ')) {
        if (item.empty()) continue;
        if (item == "e") {
            stream.tokens.push_back(Token::erasure());
            continue;
        }
        if (item.size() < 3 || item[1] != ':' || (item[0] != 'g' && item[0] != 'p'))
            raise(Errc::parse_error, "bad stream token '" + item + "'");
        std::uint32_t id = 0;
        for (std::size_t i = 2; i < item.size(); ++i) {
            if (item[i] < '0' || item[i] > '9')
                raise(Errc::parse_error, "bad stream token '" + item + "'");
            id = id * 10 + static_cast<std::uint32_t>(item[i] - '0');
        }
        stream.tokens.push_back(item[0] == 'g' ? Token::global(id) : Token::priv(id));
    }
    return stream;
}

std::string BitFrame::to_ascii() const {
    std::string out(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) out[i] = '1';
    return out;
}

BitFrame BitFrame::from_ascii(std::string_view text) {
    BitFrame frame;
    frame.bits.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1')
            raise(Errc::parse_error, "bit frame may contain only '0'/'1'");
        frame.bits.push_back(c == '1');
    }
    return frame;
}

Bytes BitFrame::to_packed() const {
    Bytes out;
    std::uint64_t n = bits.size();
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
    out.resize(8 + (bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) out[8 + i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    return out;
}

BitFrame BitFrame::from_packed(const Bytes& data) {
    if (data.size() < 8) raise(Errc::parse_error, "packed frame lacks length header");
    std::uint64_t n = 0;
    for (int i = 0; i < 8; ++i) n |= static_cast<std::uint64_t>(data[i]) << (8 * i);
    if (data.size() != 8 + (n + 7) / 8)
        raise(Errc::parse_error, "packed frame length mismatch");
    BitFrame frame;
    frame.bits.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i)
        frame.bits.push_back((data[8 + i / 8] >> (7 - i % 8)) & 1u);
    return frame;
}

const std::string& Codebook::symbol(std::uint32_t id) const {
    if (id >= symbols_.size())
        raise(Errc::unknown_token, "token id " + std::to_string(id) + " outside codebook");
    return symbols_[id];
}

std::optional<std::uint32_t> Codebook::id_of(std::string_view symbol) const {
    auto it = symbol_index_.find(symbol);
    if (it == symbol_index_.end()) return std::nullopt;
    return it->second;
}

std::uint64_t Codebook::codeword_value(std::uint32_t id) const {
    if (id >= value_index_.size())
        raise(Errc::unknown_token, "token id " + std::to_string(id) + " outside codebook");
    return offset_ + value_index_[id];
}

std::optional<std::uint32_t> Codebook::id_of_value(std::uint64_t value) const {
    auto it = value_to_id_.find(value);
    if (it == value_to_id_.end()) return std::nullopt;
    return it->second;
}

std::string Codebook::codeword_bits(std::uint32_t id) const {
    std::uint64_t value = codeword_value(id);
    std::string out(width_, '0');
    for (unsigned i = 0; i < width_; ++i)
        if ((value >> (width_ - 1 - i)) & 1u) out[i] = '1';
    return out;
}

std::string Codebook::export_tsv() const {
    std::string out;
    for (std::uint32_t id = 0; id < symbols_.size(); ++id) {
        out += std::to_string(id) + "\t" + symbols_[id] + "\t" + codeword_bits(id) +
               "\t" + (scope_ == Scope::global_scope ? "global" : "private") + "\n";
    }
    return out;
}

namespace {

void check_width(unsigned width) {
    if (width < 1 || width > 32)
        raise(Errc::validation_error, "codeword width must be in [1, 32]");
}

// Content symbols of a graph's vocabulary: entity names plus relations,
// deduplicated, lexicographic order.
std::vector<std::string> graph_vocabulary(const KnowledgeGraph& g) {
    std::set<std::string> vocab;
    for (const auto& [id, e] : g.entities()) vocab.insert(e.name);
    for (const Triple& t : g.triples()) vocab.insert(t.relation);
    return {vocab.begin(), vocab.end()};
}

} // namespace

std::vector<std::string> private_vocabulary(const KnowledgeGraph& private_kg) {
    return graph_vocabulary(private_kg);
}

std::string phrase_key(std::string_view symbol) {
    std::string key;
    for (const std::string& w : split_words(symbol)) {
        if (!key.empty()) key += ' ';
        key += w;
    }
    return key;
}

std::optional<EntityId> resolve_entity_by_symbol(const KnowledgeGraph& g,
                                                 std::string_view symbol) {
    auto ids = g.find_by_name(symbol);
    if (ids.empty()) return std::nullopt;
    return ids.front();
}

Codebook build_global_codebook(const KnowledgeGraph& global_kg, unsigned width) {
    check_width(width);
    Codebook cb;
    cb.scope_ = Codebook::Scope::global_scope;
    cb.width_ = width;
    cb.offset_ = 0;
    cb.symbols_ = {kUnknownSymbol, kEraseSymbol};
    for (std::string& s : graph_vocabulary(global_kg)) {
        if (s == kUnknownSymbol || s == kEraseSymbol)
            raise(Errc::validation_error, "vocabulary collides with reserved symbol " + s);
        cb.symbols_.push_back(std::move(s));
    }
    if (cb.symbols_.size() > (1ull << width))
        raise(Errc::width_too_small, "vocabulary " + std::to_string(cb.symbols_.size()) +
                                         " exceeds 2^" + std::to_string(width));
    cb.value_index_.resize(cb.symbols_.size());
    for (std::uint32_t id = 0; id < cb.symbols_.size(); ++id) {
        cb.value_index_[id] = id;
        cb.symbol_index_[cb.symbols_[id]] = id;
        cb.value_to_id_[id] = id;
    }
    return cb;
}

Codebook build_private_codebook(const KnowledgeGraph& private_kg, const SharedSecret& key,
                                unsigned width) {
    check_width(width);
    Codebook cb;
    cb.scope_ = Codebook::Scope::private_scope;
    cb.width_ = width;
    cb.symbols_ = graph_vocabulary(private_kg);
    std::size_t m = cb.symbols_.size();
    if (m > (1ull << width))
        raise(Errc::width_too_small, "vocabulary " + std::to_string(m) + " exceeds 2^" +
                                         std::to_string(width));
    cb.offset_ = (1ull << width) - m;

    // Keyed Fisher-Yates over the id space; ids stay the lexicographic ranks,
    // the permutation decides which codeword each rank receives.
    std::vector<std::uint32_t> perm(m);
    for (std::size_t i = 0; i < m; ++i) perm[i] = static_cast<std::uint32_t>(i);
    Digest tag = hmac_sha256(key.key, to_bytes("private-codebook"));
    std::uint64_t seed = 0;
    for (int i = 0; i < 8; ++i) seed |= static_cast<std::uint64_t>(tag[i]) << (8 * i);
    Rng rng(seed);
    for (std::size_t i = m; i > 1; --i)
        std::swap(perm[i - 1], perm[rng.next_below(i)]);

    cb.value_index_ = perm;
    for (std::uint32_t id = 0; id < m; ++id) {
        cb.symbol_index_[cb.symbols_[id]] = id;
        cb.value_to_id_[cb.offset_ + perm[id]] = id;
    }
    return cb;
}

SensitivityReport recognize_sensitive(const KnowledgeGraph& private_kg,
                                      const std::set<std::string>& sensitive_categories,
                                      std::size_t hops) {
    if (hops < 1) raise(Errc::validation_error, "sensitivity hops must be >= 1");
    SensitivityReport report;
    report.hops = hops;

    std::deque<EntityId> frontier;
    std::map<EntityId, std::size_t> dist;
    for (const auto& [id, e] : private_kg.entities()) {
        if (sensitive_categories.count(e.category)) {
            report.flagged[id] = {SensitiveReason::keyword_category, 0};
            dist[id] = 0;
            frontier.push_back(id);
        }
    }
    while (!frontier.empty()) {
        EntityId cur = frontier.front();
        frontier.pop_front();
        std::size_t d = dist[cur];
        if (d == hops) continue;
        for (EntityId next : private_kg.adjacent(cur)) {
            if (dist.count(next)) continue;
            dist[next] = d + 1;
            report.flagged.emplace(next,
                                   SensitivityEntry{SensitiveReason::graph_proximity, d + 1});
            frontier.push_back(next);
        }
    }
    return report;
}

namespace {

struct SpanCandidate {
    bool is_private = false;
    std::string symbol; // raw vocabulary symbol
};

std::string join_words(const std::vector<std::string>& words, std::size_t begin,
                       std::size_t len) {
    std::string key;
    for (std::size_t i = 0; i < len; ++i) {
        if (i) key += ' ';
        key += words[begin + i];
    }
    return key;
}

std::uint32_t rank_of(const std::vector<std::string>& sorted_vocab,
                      const std::string& symbol) {
    auto it = std::lower_bound(sorted_vocab.begin(), sorted_vocab.end(), symbol);
    return static_cast<std::uint32_t>(it - sorted_vocab.begin());
}

} // namespace

TokenStream tokenize(std::string_view msg, const KnowledgeGraph& global_kg,
                     const KnowledgeGraph& private_kg, const SensitivityReport& sensitivity,
                     std::string message_id) {
    std::vector<std::string> global_vocab = graph_vocabulary(global_kg);
    std::vector<std::string> priv_vocab = private_vocabulary(private_kg);

    // Candidate spans: sensitive private entity names shadow global symbols
    // with the same surface form.
    std::map<std::string, SpanCandidate> candidates;
    std::size_t max_words = 1;
    auto note_key = [&max_words](const std::string& key) {
        std::size_t words = 1 + static_cast<std::size_t>(
                                    std::count(key.begin(), key.end(), ' '));
        max_words = std::max(max_words, words);
    };
    for (const std::string& sym : global_vocab) {
        std::string key = phrase_key(sym);
        if (key.empty()) continue;
        auto it = candidates.find(key);
        if (it == candidates.end() || sym < it->second.symbol)
            candidates[key] = {false, sym};
        note_key(key);
    }
    for (const auto& [id, entry] : sensitivity.flagged) {
        const std::string& name = private_kg.entity(id).name;
        std::string key = phrase_key(name);
        if (key.empty()) continue;
        auto it = candidates.find(key);
        if (it == candidates.end() || !it->second.is_private || name < it->second.symbol)
            candidates[key] = {true, name};
        note_key(key);
    }

    TokenStream stream;
    stream.message_id = std::move(message_id);
    std::vector<std::string> words = split_words(msg);
    std::size_t i = 0;
    while (i < words.size()) {
        bool matched = false;
        for (std::size_t len = std::min(max_words, words.size() - i); len >= 1; --len) {
            auto it = candidates.find(join_words(words, i, len));
            if (it == candidates.end()) continue;
            const SpanCandidate& c = it->second;
            if (c.is_private) {
                stream.tokens.push_back(Token::priv(rank_of(priv_vocab, c.symbol)));
            } else {
                stream.tokens.push_back(
                    Token::global(2 + rank_of(global_vocab, c.symbol)));
            }
            i += len;
            matched = true;
            break;
        }
        if (!matched) {
            stream.tokens.push_back(Token::global(kUnknownTokenId));
            ++i;
        }
    }
    return stream;
}

namespace {

// Undirected (relation, neighbor category) counts; the similarity space for
// overlay alignment.
std::map<std::pair<std::string, std::string>, std::uint64_t>
overlay_vector(const KnowledgeGraph& g, EntityId id) {
    std::map<std::pair<std::string, std::string>, std::uint64_t> v;
    for (const Triple& t : g.triples()) {
        if (t.head == id && g.has_entity(t.tail))
            ++v[{t.relation, g.entity(t.tail).category}];
        if (t.tail == id && g.has_entity(t.head))
            ++v[{t.relation, g.entity(t.head).category}];
    }
    return v;
}

// cosine(a, b) >= tau, computed exactly on integer count vectors:
// dot^2 >= tau^2 * |a|^2 * |b|^2 with dot >= 0.
bool cosine_at_least(const std::map<std::pair<std::string, std::string>, std::uint64_t>& a,
                     const std::map<std::pair<std::string, std::string>, std::uint64_t>& b,
                     double tau) {
    if (a.empty() || b.empty()) return false;
    std::uint64_t dot = 0, na = 0, nb = 0;
    for (const auto& [k, c] : a) {
        na += c * c;
        auto it = b.find(k);
        if (it != b.end()) dot += c * it->second;
    }
    for (const auto& [k, c] : b) nb += c * c;
    return static_cast<double>(dot) * static_cast<double>(dot) >=
           tau * tau * static_cast<double>(na) * static_cast<double>(nb);
}

} // namespace

TokenStream align_and_overlay(const TokenStream& stream, const KnowledgeGraph& fused,
                              const KnowledgeGraph& private_kg,
                              const SensitivityReport& sensitivity,
                              const Codebook& global_cb, double tau) {
    std::vector<std::string> priv_vocab = private_vocabulary(private_kg);

    std::vector<std::pair<EntityId,
                          std::map<std::pair<std::string, std::string>, std::uint64_t>>>
        flagged_vectors;
    for (const auto& [id, entry] : sensitivity.flagged)
        flagged_vectors.emplace_back(id, overlay_vector(private_kg, id));

    TokenStream out = stream;
    for (Token& tok : out.tokens) {
        if (tok.provenance != Provenance::global_scope) continue;
        if (tok.id == kUnknownTokenId || tok.id == kEraseTokenId) continue;
        auto fused_id = resolve_entity_by_symbol(fused, global_cb.symbol(tok.id));
        if (!fused_id) continue;
        auto vec = overlay_vector(fused, *fused_id);

        // flagged ids iterate ascending, so the first hit wins ties
        for (const auto& [priv_id, priv_vec] : flagged_vectors) {
            if (!cosine_at_least(vec, priv_vec, tau)) continue;
            tok = Token::priv(rank_of(priv_vocab, private_kg.entity(priv_id).name));
            break;
        }
    }
    return out;
}

namespace {

void append_value_bits(BitFrame& frame, std::uint64_t value, unsigned width) {
    for (unsigned i = 0; i < width; ++i)
        frame.bits.push_back((value >> (width - 1 - i)) & 1u);
}

void check_disjoint(const Codebook& global_cb, const Codebook& private_cb) {
    if (private_cb.size() == 0) return; // an empty book constrains nothing
    if (global_cb.width() != private_cb.width())
        raise(Errc::validation_error, "codebook widths differ");
    if (global_cb.size() > private_cb.first_value())
        raise(Errc::width_too_small,
              "combined vocabulary exceeds the codeword space; raise the width");
}

} // namespace

BitFrame encode_tokens(const TokenStream& stream, const Codebook& global_cb,
                       const Codebook& private_cb) {
    check_disjoint(global_cb, private_cb);
    unsigned w = global_cb.width();
    BitFrame frame;
    frame.bits.reserve(stream.tokens.size() * w);
    for (const Token& tok : stream.tokens) {
        switch (tok.provenance) {
            case Provenance::global_scope:
                append_value_bits(frame, global_cb.codeword_value(tok.id), w);
                break;
            case Provenance::private_scope:
                append_value_bits(frame, private_cb.codeword_value(tok.id), w);
                break;
            case Provenance::erasure:
                append_value_bits(frame, kEraseTokenId, w);
                break;
        }
    }
    return frame;
}

TokenStream decode_tokens(const BitFrame& frame, const Codebook& global_cb,
                          const Codebook& private_cb, std::string message_id) {
    check_disjoint(global_cb, private_cb);
    unsigned w = global_cb.width();
    if (frame.bits.size() % w != 0)
        raise(Errc::misaligned_frame, "frame length " + std::to_string(frame.bits.size()) +
                                          " not divisible by width " + std::to_string(w));
    TokenStream stream;
    stream.message_id = std::move(message_id);
    for (std::size_t pos = 0; pos < frame.bits.size(); pos += w) {
        std::uint64_t value = 0;
        for (unsigned i = 0; i < w; ++i)
            value = (value << 1) | (frame.bits[pos + i] ? 1u : 0u);
        if (auto priv_id = private_cb.id_of_value(value)) {
            stream.tokens.push_back(Token::priv(*priv_id));
        } else if (value == kEraseTokenId) {
            stream.tokens.push_back(Token::erasure());
        } else if (auto glob_id = global_cb.id_of_value(value)) {
            stream.tokens.push_back(Token::global(*glob_id));
        } else {
            stream.tokens.push_back(Token::erasure());
        }
    }
    return stream;
}

DisaggregateResult disaggregate(const TokenStream& stream, const KnowledgeGraph& private_kg) {
    std::vector<std::string> priv_vocab = private_vocabulary(private_kg);
    DisaggregateResult result;
    for (std::size_t i = 0; i < stream.tokens.size(); ++i) {
        const Token& tok = stream.tokens[i];
        switch (tok.provenance) {
            case Provenance::global_scope:
                result.public_tokens.push_back(tok);
                break;
            case Provenance::private_scope:
                if (tok.id < priv_vocab.size())
                    if (auto id = resolve_entity_by_symbol(private_kg, priv_vocab[tok.id]))
                        result.sensitive_entities.insert(*id);
                break;
            case Provenance::erasure:
                result.erasure_positions.push_back(i);
                break;
        }
    }
    return result;
}

std::set<InferredFact> infer_semantics(const std::set<EntityId>& entities,
                                       const KnowledgeGraph& private_kg, std::size_t depth) {
    if (depth < 1) raise(Errc::validation_error, "inference depth must be >= 1");

    std::map<EntityId, std::size_t> dist;
    std::deque<EntityId> frontier;
    for (EntityId id : entities) {
        if (!private_kg.has_entity(id)) continue;
        dist[id] = 0;
        frontier.push_back(id);
    }
    while (!frontier.empty()) {
        EntityId cur = frontier.front();
        frontier.pop_front();
        std::size_t d = dist[cur];
        if (d == depth) continue;
        for (EntityId next : private_kg.adjacent(cur)) {
            if (dist.count(next)) continue;
            dist[next] = d + 1;
            frontier.push_back(next);
        }
    }

    std::set<InferredFact> facts;
    for (const Triple& t : private_kg.triples()) {
        auto ith = dist.find(t.head);
        auto itt = dist.find(t.tail);
        if (ith == dist.end() || itt == dist.end()) continue;
        std::size_t reach = std::min(ith->second, itt->second);
        if (reach > depth - 1) continue;
        const Entity& object = private_kg.entity(t.tail);
        InferredFact fact;
        fact.subject = private_kg.entity(t.head).name;
        fact.relation = t.relation;
        fact.object = object.name;
        auto val = object.attrs.find("value");
        if (val != object.attrs.end()) fact.object_value = val->second;
        fact.depth = reach + 1;
        facts.insert(std::move(fact));
    }
    return facts;
}

namespace {

std::optional<EntityId> resolve_flank(const Token& tok, const KnowledgeGraph& private_kg,
                                      const std::vector<std::string>& priv_vocab,
                                      const Codebook& global_cb) {
    if (tok.provenance == Provenance::erasure) return std::nullopt;
    if (tok.provenance == Provenance::private_scope) {
        if (tok.id >= priv_vocab.size()) return std::nullopt;
        return resolve_entity_by_symbol(private_kg, priv_vocab[tok.id]);
    }
    if (tok.id >= global_cb.size()) return std::nullopt;
    return resolve_entity_by_symbol(private_kg, global_cb.symbol(tok.id));
}

} // namespace

TokenStream repair_missing(const TokenStream& stream, const KnowledgeGraph& private_kg,
                           const Codebook& global_cb) {
    std::vector<std::string> priv_vocab = private_vocabulary(private_kg);
    TokenStream out = stream;
    for (std::size_t i = 0; i < out.tokens.size(); ++i) {
        if (out.tokens[i].provenance != Provenance::erasure) continue;
        if (i == 0 || i + 1 == out.tokens.size()) continue;
        auto left = resolve_flank(out.tokens[i - 1], private_kg, priv_vocab, global_cb);
        auto right = resolve_flank(out.tokens[i + 1], private_kg, priv_vocab, global_cb);
        if (!left || !right || *left == *right) continue;

        // Direct edge: the missing token is read as the connecting relation.
        std::set<std::string> relations;
        for (const Triple& t : private_kg.triples()) {
            if ((t.head == *left && t.tail == *right) ||
                (t.head == *right && t.tail == *left))
                relations.insert(t.relation);
        }
        bool repaired = false;
        for (const std::string& rel : relations) {
            if (auto id = global_cb.id_of(rel)) {
                out.tokens[i] = Token::global(*id);
                repaired = true;
                break;
            }
        }
        if (repaired) continue;

        // Two-triple path: substitute the intermediate entity.
        const auto& left_adj = private_kg.adjacent(*left);
        const auto& right_adj = private_kg.adjacent(*right);
        for (EntityId mid : left_adj) {
            if (!right_adj.count(mid) || mid == *left || mid == *right) continue;
            if (auto id = global_cb.id_of(private_kg.entity(mid).name)) {
                out.tokens[i] = Token::global(*id);
                break;
            }
        }
    }
    return out;
}

} // namespace semcom
