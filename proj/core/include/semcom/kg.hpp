#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "semcom/errors.hpp"

namespace semcom {

using EntityId = std::uint64_t;

// Basic semantic element: person, credential, place, organization, ...
// The category vocabulary is open (configuration, not an enum).
struct Entity {
    EntityId id = 0;
    std::string name;
    std::string category;
    std::map<std::string, std::string> attrs;

    bool operator==(const Entity&) const = default;
};

struct Triple {
    EntityId head = 0;
    std::string relation;
    EntityId tail = 0;

    auto operator<=>(const Triple&) const = default;
};

enum class GraphKind { global, personal, fused, private_knowledge };

const char* to_string(GraphKind kind);

// Directed labeled multigraph over entities. Mutation is a construction-phase
// concern (single writer); all query operations are const and safe to share
// across threads afterwards.
class KnowledgeGraph {
public:
    explicit KnowledgeGraph(GraphKind kind = GraphKind::personal) : kind_(kind) {}

    GraphKind kind() const { return kind_; }
    void set_kind(GraphKind kind) { kind_ = kind; }

    void add_entity(Entity e);       // DuplicateId
    void add_triple(Triple t);       // DanglingEndpoint, DuplicateTriple
    void remove_triple(const Triple& t); // no-op if absent

    bool has_entity(EntityId id) const { return entities_.count(id) != 0; }
    const Entity& entity(EntityId id) const; // UnknownEntity
    bool has_triple(const Triple& t) const { return triples_.count(t) != 0; }

    std::size_t entity_count() const { return entities_.size(); }
    std::size_t triple_count() const { return triples_.size(); }

    const std::map<EntityId, Entity>& entities() const { return entities_; }
    const std::set<Triple>& triples() const { return triples_; }

    // Ascending ids; deterministic iteration everywhere.
    std::vector<EntityId> entity_ids() const;

    // Distinct undirected neighbors (direction lives only in the triples).
    const std::set<EntityId>& adjacent(EntityId id) const; // UnknownEntity

    // Exact-name and case-folded lookups; ascending id order.
    std::vector<EntityId> find_by_name(std::string_view name) const;
    std::vector<EntityId> find_by_folded_name(std::string_view folded) const;

    // Undirected degree counted over distinct neighbors.
    std::size_t degree(EntityId id) const;

    bool is_connected() const; // vacuously true when empty

    bool operator==(const KnowledgeGraph& other) const {
        return kind_ == other.kind_ && entities_ == other.entities_ &&
               triples_ == other.triples_;
    }

private:
    GraphKind kind_;
    std::map<EntityId, Entity> entities_;
    std::set<Triple> triples_;
    std::map<EntityId, std::set<EntityId>> adjacency_;
    std::map<std::string, std::set<EntityId>> folded_name_index_;
};

struct SignatureItem {
    enum class Direction { out, in };

    Direction direction = Direction::out;
    std::string relation;
    std::string neighbor_category;

    auto operator<=>(const SignatureItem&) const = default;
};

// Multiset of (direction, relation, neighbor category); purely derived from
// the graph, so recomputation is idempotent.
struct ContextSignature {
    std::map<SignatureItem, int> counts;

    bool empty() const { return counts.empty(); }
    int total() const;

    bool operator==(const ContextSignature&) const = default;
};

// Multiset Jaccard; both empty is defined as 1 (documented degenerate case).
double jaccard(const ContextSignature& a, const ContextSignature& b);

// --- graph algorithms -------------------------------------------------

// Entities reachable within `hops` undirected steps, excluding id itself.
std::set<EntityId> neighbors(const KnowledgeGraph& g, EntityId id, int hops);

// Minimum-hop undirected path, endpoints inclusive; among equal-length paths
// the id-lexicographically smallest (ties broken by smallest next entity id).
// nullopt when disconnected.
std::optional<std::vector<EntityId>> shortest_path(const KnowledgeGraph& g,
                                                   EntityId a, EntityId b);

struct WalkParams {
    int walks_per_seed = 16;
    int walk_length = 4;
    int min_visits = 2;
};

// Every entity visited >= min_visits times across walks_per_seed uniform
// random walks of walk_length steps from each seed; the seeds themselves are
// always included. Pure function of (graph, seeds, params, rng_seed).
std::set<EntityId> random_walk_collect(const KnowledgeGraph& g,
                                       const std::set<EntityId>& seeds,
                                       const WalkParams& params,
                                       std::uint64_t rng_seed);

// Metric-closure 2-approximation: closure over terminals via shortest_path,
// MST of the closure, path expansion, prune non-terminal leaves. The result
// (kind=private_knowledge) contains every triple of g between adjacent node
// pairs of the expansion skeleton; distinct-pair edge count is <= 2x the
// optimum Steiner tree edge count. DisconnectedTerminals when the terminals
// span several components (message lists the partition).
KnowledgeGraph steiner_subgraph(const KnowledgeGraph& g,
                                const std::set<EntityId>& terminals);

ContextSignature context_signature(const KnowledgeGraph& g, EntityId id);

// --- flat-file format --------------------------------------------------
//
// Entities: id<TAB>name<TAB>category[<TAB>key=value;...]   one per line
// Triples:  head_id<TAB>relation<TAB>tail_id
// Lines beginning '#' are comments. Export is canonical (ascending ids /
// ordered triples), so export(import(export(g))) is byte-identical.

KnowledgeGraph parse_graph(std::string_view entities_text,
                           std::string_view triples_text, GraphKind kind);

std::string serialize_entities(const KnowledgeGraph& g);
std::string serialize_triples(const KnowledgeGraph& g);

KnowledgeGraph load_graph(const std::filesystem::path& entities_file,
                          const std::filesystem::path& triples_file,
                          GraphKind kind);

void save_graph(const KnowledgeGraph& g,
                const std::filesystem::path& entities_file,
                const std::filesystem::path& triples_file);

} // namespace semcom
