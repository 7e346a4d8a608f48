#include "semcom/kg.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <sstream>

#include "semcom/rng.hpp"
#include "semcom/text.hpp"

namespace semcom {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::duplicate_id: return "DuplicateId";
        case Errc::dangling_endpoint: return "DanglingEndpoint";
        case Errc::duplicate_triple: return "DuplicateTriple";
        case Errc::unknown_entity: return "UnknownEntity";
        case Errc::disconnected_terminals: return "DisconnectedTerminals";
        case Errc::empty_salt: return "EmptySalt";
        case Errc::sequence_gap: return "SequenceGap";
        case Errc::no_entities_matched: return "NoEntitiesMatched";
        case Errc::width_too_small: return "WidthTooSmall";
        case Errc::unknown_token: return "UnknownToken";
        case Errc::misaligned_frame: return "MisalignedFrame";
        case Errc::parse_error: return "ParseError";
        case Errc::validation_error: return "ValidationError";
    }
    return "Error";
}

const char* to_string(GraphKind kind) {
    switch (kind) {
        case GraphKind::global: return "global";
        case GraphKind::personal: return "personal";
        case GraphKind::fused: return "fused";
        case GraphKind::private_knowledge: return "private";
    }
    return "?";
}

void KnowledgeGraph::add_entity(Entity e) {
    if (e.name.empty())
        raise(Errc::validation_error, "entity " + std::to_string(e.id) + " has empty name");
    if (entities_.count(e.id))
        raise(Errc::duplicate_id, "entity id " + std::to_string(e.id) + " already present");
    folded_name_index_[fold_case(e.name)].insert(e.id);
    adjacency_[e.id]; // ensure an (empty) adjacency row exists
    entities_.emplace(e.id, std::move(e));
}

void KnowledgeGraph::add_triple(Triple t) {
    if (!has_entity(t.head))
        raise(Errc::dangling_endpoint, "head " + std::to_string(t.head) + " not in graph");
    if (!has_entity(t.tail))
        raise(Errc::dangling_endpoint, "tail " + std::to_string(t.tail) + " not in graph");
    if (triples_.count(t))
        raise(Errc::duplicate_triple, std::to_string(t.head) + " -" + t.relation + "-> " +
                                          std::to_string(t.tail));
    adjacency_[t.head].insert(t.tail);
    adjacency_[t.tail].insert(t.head);
    triples_.insert(std::move(t));
}

void KnowledgeGraph::remove_triple(const Triple& t) {
    auto it = triples_.find(t);
    if (it == triples_.end()) return;
    triples_.erase(it);
    // Drop adjacency only when no parallel triple keeps the pair connected.
    bool still_adjacent = false;
    for (const Triple& other : triples_) {
        if ((other.head == t.head && other.tail == t.tail) ||
            (other.head == t.tail && other.tail == t.head)) {
            still_adjacent = true;
            break;
        }
    }
    if (!still_adjacent) {
        adjacency_[t.head].erase(t.tail);
        adjacency_[t.tail].erase(t.head);
    }
}

const Entity& KnowledgeGraph::entity(EntityId id) const {
    auto it = entities_.find(id);
    if (it == entities_.end())
        raise(Errc::unknown_entity, "entity " + std::to_string(id));
    return it->second;
}

std::vector<EntityId> KnowledgeGraph::entity_ids() const {
    std::vector<EntityId> ids;
    ids.reserve(entities_.size());
    for (const auto& [id, e] : entities_) ids.push_back(id);
    return ids;
}

const std::set<EntityId>& KnowledgeGraph::adjacent(EntityId id) const {
    auto it = adjacency_.find(id);
    if (it == adjacency_.end())
        raise(Errc::unknown_entity, "entity " + std::to_string(id));
    return it->second;
}

std::vector<EntityId> KnowledgeGraph::find_by_name(std::string_view name) const {
    std::vector<EntityId> out;
    for (EntityId id : find_by_folded_name(fold_case(name)))
        if (entities_.at(id).name == name) out.push_back(id);
    return out;
}

std::vector<EntityId> KnowledgeGraph::find_by_folded_name(std::string_view folded) const {
    auto it = folded_name_index_.find(std::string(folded));
    if (it == folded_name_index_.end()) return {};
    return {it->second.begin(), it->second.end()};
}

std::size_t KnowledgeGraph::degree(EntityId id) const {
    const auto& adj = adjacent(id);
    return adj.size() - (adj.count(id) ? 1 : 0);
}

bool KnowledgeGraph::is_connected() const {
    if (entities_.empty()) return true;
    std::set<EntityId> seen;
    std::deque<EntityId> queue{entities_.begin()->first};
    seen.insert(entities_.begin()->first);
    while (!queue.empty()) {
        EntityId u = queue.front();
        queue.pop_front();
        for (EntityId v : adjacency_.at(u)) {
            if (seen.insert(v).second) queue.push_back(v);
        }
    }
    return seen.size() == entities_.size();
}

int ContextSignature::total() const {
    int n = 0;
    for (const auto& [item, count] : counts) n += count;
    return n;
}

double jaccard(const ContextSignature& a, const ContextSignature& b) {
    if (a.counts.empty() && b.counts.empty()) return 1.0;
    long long inter = 0;
    long long uni = 0;
    auto ia = a.counts.begin();
    auto ib = b.counts.begin();
    while (ia != a.counts.end() || ib != b.counts.end()) {
        if (ib == b.counts.end() || (ia != a.counts.end() && ia->first < ib->first)) {
            uni += ia->second;
            ++ia;
        } else if (ia == a.counts.end() || ib->first < ia->first) {
            uni += ib->second;
            ++ib;
        } else {
            inter += std::min(ia->second, ib->second);
            uni += std::max(ia->second, ib->second);
            ++ia;
            ++ib;
        }
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::set<EntityId> neighbors(const KnowledgeGraph& g, EntityId id, int hops) {
    if (hops < 1) raise(Errc::validation_error, "hops must be >= 1");
    g.entity(id);
    std::set<EntityId> seen{id};
    std::vector<EntityId> frontier{id};
    for (int step = 0; step < hops && !frontier.empty(); ++step) {
        std::vector<EntityId> next;
        for (EntityId u : frontier) {
            for (EntityId v : g.adjacent(u)) {
                if (seen.insert(v).second) next.push_back(v);
            }
        }
        frontier = std::move(next);
    }
    seen.erase(id);
    return seen;
}

namespace {

std::map<EntityId, int> bfs_distances(const KnowledgeGraph& g, EntityId from) {
    std::map<EntityId, int> dist{{from, 0}};
    std::deque<EntityId> queue{from};
    while (!queue.empty()) {
        EntityId u = queue.front();
        queue.pop_front();
        for (EntityId v : g.adjacent(u)) {
            if (!dist.count(v)) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

} // namespace

std::optional<std::vector<EntityId>> shortest_path(const KnowledgeGraph& g,
                                                   EntityId a, EntityId b) {
    g.entity(a);
    g.entity(b);
    if (a == b) return std::vector<EntityId>{a};
    auto dist = bfs_distances(g, b);
    auto it = dist.find(a);
    if (it == dist.end()) return std::nullopt;
    // Walk from a towards b, always taking the smallest next id that stays on
    // some shortest path; yields the id-lexicographically smallest path.
    std::vector<EntityId> path{a};
    EntityId cur = a;
    int remaining = it->second;
    while (cur != b) {
        for (EntityId v : g.adjacent(cur)) { // ascending
            auto dv = dist.find(v);
            if (dv != dist.end() && dv->second == remaining - 1) {
                cur = v;
                break;
            }
        }
        --remaining;
        path.push_back(cur);
    }
    return path;
}

std::set<EntityId> random_walk_collect(const KnowledgeGraph& g,
                                       const std::set<EntityId>& seeds,
                                       const WalkParams& params,
                                       std::uint64_t rng_seed) {
    if (seeds.empty()) raise(Errc::validation_error, "seeds must be nonempty");
    if (params.walks_per_seed < 1 || params.walk_length < 1)
        raise(Errc::validation_error, "walk params must be >= 1");
    for (EntityId s : seeds) g.entity(s);

    // Adjacency snapshot as vectors for indexed uniform draws.
    std::map<EntityId, std::vector<EntityId>> adj;
    auto row = [&](EntityId id) -> const std::vector<EntityId>& {
        auto it = adj.find(id);
        if (it == adj.end()) {
            const auto& s = g.adjacent(id);
            it = adj.emplace(id, std::vector<EntityId>(s.begin(), s.end())).first;
        }
        return it->second;
    };

    Rng rng(rng_seed);
    std::map<EntityId, int> visits;
    for (EntityId seed : seeds) {
        for (int w = 0; w < params.walks_per_seed; ++w) {
            EntityId cur = seed;
            ++visits[cur];
            for (int step = 0; step < params.walk_length; ++step) {
                const auto& nb = row(cur);
                if (nb.empty()) break;
                cur = nb[rng.next_below(nb.size())];
                ++visits[cur];
            }
        }
    }

    std::set<EntityId> collected(seeds.begin(), seeds.end());
    for (const auto& [id, n] : visits)
        if (n >= params.min_visits) collected.insert(id);
    return collected;
}

namespace {

struct DisjointSet {
    std::map<EntityId, EntityId> parent;

    EntityId find(EntityId x) {
        auto it = parent.find(x);
        if (it == parent.end()) {
            parent[x] = x;
            return x;
        }
        while (it->second != x) {
            x = it->second;
            it = parent.find(x);
        }
        return x;
    }

    bool unite(EntityId a, EntityId b) {
        EntityId ra = find(a);
        EntityId rb = find(b);
        if (ra == rb) return false;
        parent[ra] = rb;
        return true;
    }
};

} // namespace

KnowledgeGraph steiner_subgraph(const KnowledgeGraph& g,
                                const std::set<EntityId>& terminals) {
    if (terminals.empty()) raise(Errc::validation_error, "terminals must be nonempty");
    for (EntityId t : terminals) g.entity(t);

    std::vector<EntityId> terms(terminals.begin(), terminals.end());
    using Pair = std::pair<EntityId, EntityId>;

    // Metric closure over terminals.
    std::map<Pair, std::vector<EntityId>> closure_paths;
    std::vector<std::tuple<int, EntityId, EntityId>> closure_edges;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        for (std::size_t j = i + 1; j < terms.size(); ++j) {
            auto path = shortest_path(g, terms[i], terms[j]);
            if (path) {
                closure_edges.emplace_back(static_cast<int>(path->size()) - 1,
                                           terms[i], terms[j]);
                closure_paths.emplace(Pair{terms[i], terms[j]}, std::move(*path));
            }
        }
    }

    // Kruskal over the closure; (weight, head, tail) order keeps it deterministic.
    std::sort(closure_edges.begin(), closure_edges.end());
    DisjointSet dsu;
    std::set<EntityId> chosen{terminals.begin(), terminals.end()};
    std::map<EntityId, std::set<EntityId>> skeleton;
    std::size_t joined = 1;
    for (const auto& [w, u, v] : closure_edges) {
        if (!dsu.unite(u, v)) continue;
        ++joined;
        const auto& path = closure_paths.at({u, v});
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
            chosen.insert(path[k]);
            chosen.insert(path[k + 1]);
            skeleton[path[k]].insert(path[k + 1]);
            skeleton[path[k + 1]].insert(path[k]);
        }
    }
    if (joined < terms.size()) {
        // Report the partition of terminals across components.
        std::map<EntityId, std::vector<EntityId>> groups;
        for (EntityId t : terms) groups[dsu.find(t)].push_back(t);
        std::string msg = "terminals split across components:";
        for (const auto& [root, members] : groups) {
            msg += " [";
            for (std::size_t k = 0; k < members.size(); ++k) {
                if (k) msg += ' ';
                msg += std::to_string(members[k]);
            }
            msg += ']';
        }
        raise(Errc::disconnected_terminals, msg);
    }

    // Prune non-terminal leaves of the skeleton until stable.
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = chosen.begin(); it != chosen.end();) {
            EntityId u = *it;
            std::size_t deg = skeleton.count(u) ? skeleton[u].size() : 0;
            if (!terminals.count(u) && deg <= 1) {
                for (EntityId v : skeleton[u]) skeleton[v].erase(u);
                skeleton.erase(u);
                it = chosen.erase(it);
                changed = true;
            } else {
                ++it;
            }
        }
    }

    KnowledgeGraph result(GraphKind::private_knowledge);
    for (EntityId id : chosen) result.add_entity(g.entity(id));
    for (const Triple& t : g.triples()) {
        if (t.head == t.tail) continue;
        auto it = skeleton.find(t.head);
        if (it != skeleton.end() && it->second.count(t.tail)) result.add_triple(t);
    }
    return result;
}

ContextSignature context_signature(const KnowledgeGraph& g, EntityId id) {
    g.entity(id);
    ContextSignature sig;
    for (const Triple& t : g.triples()) {
        if (t.head == id)
            ++sig.counts[{SignatureItem::Direction::out, t.relation,
                          g.entity(t.tail).category}];
        if (t.tail == id)
            ++sig.counts[{SignatureItem::Direction::in, t.relation,
                          g.entity(t.head).category}];
    }
    return sig;
}

// --- flat-file format ----------------------------------------------------

namespace {

EntityId parse_id(std::string_view field, const char* what, int line) {
    EntityId value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        raise(Errc::parse_error,
              std::string(what) + " line " + std::to_string(line) + ": bad id '" +
                  std::string(field) + "'");
    return value;
}

} // namespace

KnowledgeGraph parse_graph(std::string_view entities_text,
                           std::string_view triples_text, GraphKind kind) {
    KnowledgeGraph g(kind);

    int line_no = 0;
    for (const std::string& line : split(entities_text, '\n')) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split(line, '\t');
        if (fields.size() < 3 || fields.size() > 4)
            raise(Errc::parse_error, "entities line " + std::to_string(line_no) +
                                         ": expected 3 or 4 tab-separated fields");
        Entity e;
        e.id = parse_id(fields[0], "entities", line_no);
        e.name = fields[1];
        e.category = fields[2];
        if (e.name.empty())
            raise(Errc::parse_error,
                  "entities line " + std::to_string(line_no) + ": empty name");
        if (fields.size() == 4 && !fields[3].empty()) {
            for (const std::string& kv : split(fields[3], ';')) {
                if (kv.empty()) continue;
                auto eq = kv.find('=');
                if (eq == std::string::npos)
                    raise(Errc::parse_error, "entities line " + std::to_string(line_no) +
                                                 ": attr '" + kv + "' lacks '='");
                e.attrs[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
        }
        g.add_entity(std::move(e));
    }

    line_no = 0;
    for (const std::string& line : split(triples_text, '\n')) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split(line, '\t');
        if (fields.size() != 3)
            raise(Errc::parse_error, "triples line " + std::to_string(line_no) +
                                         ": expected 3 tab-separated fields");
        if (fields[1].empty())
            raise(Errc::parse_error,
                  "triples line " + std::to_string(line_no) + ": empty relation");
        g.add_triple({parse_id(fields[0], "triples", line_no), fields[1],
                      parse_id(fields[2], "triples", line_no)});
    }
    return g;
}

std::string serialize_entities(const KnowledgeGraph& g) {
    std::string out;
    for (const auto& [id, e] : g.entities()) {
        out += std::to_string(id);
        out += '\t';
        out += e.name;
        out += '\t';
        out += e.category;
        if (!e.attrs.empty()) {
            out += '\t';
            bool first = true;
            for (const auto& [k, v] : e.attrs) {
                if (!first) out += ';';
                first = false;
                out += k;
                out += '=';
                out += v;
            }
        }
        out += '\n';
    }
    return out;
}

std::string serialize_triples(const KnowledgeGraph& g) {
    std::string out;
    for (const Triple& t : g.triples()) {
        out += std::to_string(t.head);
        out += '\t';
        out += t.relation;
        out += '\t';
        out += std::to_string(t.tail);
        out += '\n';
    }
    return out;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::parse_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

KnowledgeGraph load_graph(const std::filesystem::path& entities_file,
                          const std::filesystem::path& triples_file, GraphKind kind) {
    return parse_graph(read_file(entities_file), read_file(triples_file), kind);
}

void save_graph(const KnowledgeGraph& g, const std::filesystem::path& entities_file,
                const std::filesystem::path& triples_file) {
    std::ofstream ents(entities_file, std::ios::binary);
    ents << serialize_entities(g);
    std::ofstream trips(triples_file, std::ios::binary);
    trips << serialize_triples(g);
    if (!ents || !trips)
        raise(Errc::validation_error, "failed writing graph files");
}

} // namespace semcom
