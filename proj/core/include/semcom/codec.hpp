#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "semcom/crypto.hpp"
#include "semcom/kg.hpp"

namespace semcom {

// Reserved slots at the bottom of every global codebook.
inline constexpr std::uint32_t kUnknownTokenId = 0;
inline constexpr std::uint32_t kEraseTokenId = 1;
inline constexpr const char* kUnknownSymbol = "<unk>";
inline constexpr const char* kEraseSymbol = "<erase>";

enum class Provenance { global_scope, private_scope, erasure };

struct Token {
    std::uint32_t id = 0; // meaningless for erasure tokens
    Provenance provenance = Provenance::global_scope;

    static Token global(std::uint32_t id) { return {id, Provenance::global_scope}; }
    static Token priv(std::uint32_t id) { return {id, Provenance::private_scope}; }
    static Token erasure() { return {0, Provenance::erasure}; }

    friend bool operator==(const Token&, const Token&) = default;
};

struct TokenStream {
    std::vector<Token> tokens;
    std::string message_id;

    friend bool operator==(const TokenStream&, const TokenStream&) = default;
};

// Compact transcript form: "g:3 p:1 e".
std::string format_stream(const TokenStream& stream);
TokenStream parse_stream(std::string_view text, std::string message_id = "");

struct BitFrame {
    std::vector<std::uint8_t> bits; // one bit per element, 0 or 1

    std::size_t size() const { return bits.size(); }
    std::string to_ascii() const;
    static BitFrame from_ascii(std::string_view text);
    // Wire form: 8-byte little-endian bit count, then MSB-first packed bytes.
    Bytes to_packed() const;
    static BitFrame from_packed(const Bytes& data);

    friend bool operator==(const BitFrame&, const BitFrame&) = default;
};

// Fixed-width token<->codeword table. Token ids are the lexicographic rank of
// the symbol. Global books place codeword value = id at the bottom of the
// w-bit space; private books permute ids under a secret-derived seed and sit
// at the top of the space, so the two value ranges never collide while
// combined vocabulary fits in 2^w.
class Codebook {
  public:
    enum class Scope { global_scope, private_scope };

    Scope scope() const { return scope_; }
    unsigned width() const { return width_; }
    std::size_t size() const { return symbols_.size(); }

    const std::vector<std::string>& symbols() const { return symbols_; }
    const std::string& symbol(std::uint32_t id) const;
    std::optional<std::uint32_t> id_of(std::string_view symbol) const;

    std::uint64_t codeword_value(std::uint32_t id) const;
    std::optional<std::uint32_t> id_of_value(std::uint64_t value) const;
    std::string codeword_bits(std::uint32_t id) const;

    // Smallest codeword value the book occupies; [first_value, first_value+size).
    std::uint64_t first_value() const { return offset_; }

    // Lines "id<TAB>symbol<TAB>codeword_bits<TAB>scope", ascending id.
    std::string export_tsv() const;

    friend Codebook build_global_codebook(const KnowledgeGraph& g, unsigned width);
    friend Codebook build_private_codebook(const KnowledgeGraph& g,
                                           const SharedSecret& key, unsigned width);

  private:
    Scope scope_ = Scope::global_scope;
    unsigned width_ = 0;
    std::uint64_t offset_ = 0;
    std::vector<std::string> symbols_;          // by id (lexicographic rank)
    std::vector<std::uint32_t> value_index_;    // id -> codeword value - offset
    std::map<std::string, std::uint32_t, std::less<>> symbol_index_;
    std::map<std::uint64_t, std::uint32_t> value_to_id_;
};

Codebook build_global_codebook(const KnowledgeGraph& global_kg, unsigned width);
Codebook build_private_codebook(const KnowledgeGraph& private_kg, const SharedSecret& key,
                                unsigned width);

enum class SensitiveReason { keyword_category, graph_proximity };

struct SensitivityEntry {
    SensitiveReason reason = SensitiveReason::keyword_category;
    std::size_t hop_distance = 0; // 0 for keyword_category
};

struct SensitivityReport {
    std::map<EntityId, SensitivityEntry> flagged;
    std::size_t hops = 1;

    bool is_flagged(EntityId id) const { return flagged.count(id) != 0; }
};

SensitivityReport recognize_sensitive(const KnowledgeGraph& private_kg,
                                      const std::set<std::string>& sensitive_categories,
                                      std::size_t hops);

TokenStream tokenize(std::string_view msg, const KnowledgeGraph& global_kg,
                     const KnowledgeGraph& private_kg, const SensitivityReport& sensitivity,
                     std::string message_id = "");

TokenStream align_and_overlay(const TokenStream& stream, const KnowledgeGraph& fused,
                              const KnowledgeGraph& private_kg,
                              const SensitivityReport& sensitivity,
                              const Codebook& global_cb, double tau);

BitFrame encode_tokens(const TokenStream& stream, const Codebook& global_cb,
                       const Codebook& private_cb);

TokenStream decode_tokens(const BitFrame& frame, const Codebook& global_cb,
                          const Codebook& private_cb, std::string message_id = "");

struct DisaggregateResult {
    std::vector<Token> public_tokens;
    std::set<EntityId> sensitive_entities;    // resolved in the private graph
    std::vector<std::size_t> erasure_positions;
};

DisaggregateResult disaggregate(const TokenStream& stream, const KnowledgeGraph& private_kg);

struct InferredFact {
    std::string subject;
    std::string relation;
    std::string object;
    std::string object_value; // "value" attr of the object entity, if any
    std::size_t depth = 0;

    auto operator<=>(const InferredFact&) const = default;
};

std::set<InferredFact> infer_semantics(const std::set<EntityId>& entities,
                                       const KnowledgeGraph& private_kg, std::size_t depth);

TokenStream repair_missing(const TokenStream& stream, const KnowledgeGraph& private_kg,
                           const Codebook& global_cb);

// Shared helpers for span matching and entity resolution; the adversary and
// harness reuse these, so they live here rather than as codec-private details.
std::string phrase_key(std::string_view symbol);
std::vector<std::string> private_vocabulary(const KnowledgeGraph& private_kg);
std::optional<EntityId> resolve_entity_by_symbol(const KnowledgeGraph& g,
                                                 std::string_view symbol);

} // namespace semcom
