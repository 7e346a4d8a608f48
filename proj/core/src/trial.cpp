#include "semcom/trial.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "semcom/channel.hpp"
#include "semcom/rng.hpp"
#include "semcom/text.hpp"

namespace semcom {

namespace {

constexpr std::uint64_t kSecretTag = 0x7365637265742d31ull;
constexpr std::uint64_t kWalkTag = 0x77616c6b2d736565ull;
constexpr std::uint64_t kChannelTag = 0x6368616e2d736565ull;

std::string fixed6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string pad3(std::size_t idx) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%03zu", idx);
    return buf;
}

Bytes seed_bytes(std::string_view tag, std::uint64_t seed) {
    Bytes material = to_bytes(tag);
    for (int i = 0; i < 8; ++i)
        material.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
    return material;
}

std::string read_text_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::parse_error, std::string("cannot open ") + what + " " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string attacker_label(const std::string& key) {
    if (key == "A") return "A_bits";
    if (key == "B") return "B_global";
    if (key == "C") return "C_personal";
    return "C_personal_secret";
}

std::string fact_text(const InferredFact& f) {
    return "(" + f.subject + "|" + f.relation + "|" + f.object + "|" + f.object_value +
           "|" + std::to_string(f.depth) + ")";
}

std::string report_line(const std::string& who, const LeakageReport& r) {
    return "report " + who + " public=" + fixed6(r.public_entity_recovery_rate) +
           " sensitive=" + fixed6(r.sensitive_entity_recovery_rate) +
           " precision=" + fixed6(r.inferred_triple_precision) +
           " recall=" + fixed6(r.inferred_triple_recall) +
           " f1=" + fixed6(r.inferred_triple_f1) +
           " undecoded=" + fixed6(r.undecoded_chunk_fraction) +
           " frames=" + std::to_string(r.frames_observed) + "\n";
}

} // namespace

PreparedScenario prepare_scenario(const ScenarioConfig& cfg) {
    PreparedScenario ps;
    ps.cfg = cfg;
    ps.global_kg = load_graph(cfg.resolve_path(cfg.global_entities),
                              cfg.resolve_path(cfg.global_triples), GraphKind::global);
    ps.personal_tx =
        load_graph(cfg.resolve_path(cfg.personal_tx_entities),
                   cfg.resolve_path(cfg.personal_tx_triples), GraphKind::personal);
    ps.personal_rx =
        load_graph(cfg.resolve_path(cfg.personal_rx_entities),
                   cfg.resolve_path(cfg.personal_rx_triples), GraphKind::personal);

    std::string corpus_text = read_text_file(cfg.resolve_path(cfg.corpus_path), "corpus");
    for (std::string line : split(corpus_text, '\n')) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        ps.corpus.push_back(std::move(line));
    }

    reseed(ps, cfg.seed);
    ps.fused =
        fuse(ps.personal_tx, ps.personal_rx, ps.psi_salt, cfg.theta, &ps.psi_transcript);
    ps.global_cb = build_global_codebook(ps.global_kg, cfg.width);
    return ps;
}

void reseed(PreparedScenario& ps, std::uint64_t seed) {
    ps.cfg.seed = seed;
    ps.secret = SharedSecret::derive(mix_seed(seed, kSecretTag));

    Digest salt_digest = sha256(seed_bytes("psi-salt", seed));
    ps.psi_salt.assign(salt_digest.begin(), salt_digest.begin() + 16);

    Digest nonce_digest = sha256(seed_bytes("credential-nonce", seed));
    Bytes nonce(nonce_digest.begin(), nonce_digest.begin() + 16);
    ps.credential =
        issue_credential(ps.secret, "receiver",
                         Permission::query_general | Permission::query_private,
                         std::move(nonce));
}

TrialRecord run_trial(const PreparedScenario& ps, std::size_t message_index, double p) {
    const ScenarioConfig& cfg = ps.cfg;
    TrialRecord rec;
    rec.message_index = message_index;
    rec.message_id = pad3(message_index);
    rec.message = ps.corpus.at(message_index);
    rec.p = p;
    rec.master_seed = cfg.seed;
    rec.walk_seed = mix_seed(mix_seed(cfg.seed, kWalkTag), message_index);
    rec.channel_seed =
        cfg.channel_seed ? *cfg.channel_seed : mix_seed(cfg.seed, kChannelTag);

    try {
        rec.terminals = analyze_message(rec.message, ps.fused);
        KnowledgeGraph sender_private =
            construct_private_knowledge(ps.fused, rec.message, cfg.walk, rec.walk_seed);
        rec.private_snapshot = to_hex(sha256(
            to_bytes(serialize_entities(sender_private) + serialize_triples(sender_private))));

        DistributeResult dist = distribute(sender_private, ps.credential, ps.secret);
        rec.distribute_granted = dist.granted;
        rec.deny_reason = dist.reason;

        rec.sensitivity =
            recognize_sensitive(sender_private, cfg.sensitive_categories, cfg.sensitivity_hops);
        rec.stream_pre = tokenize(rec.message, ps.global_kg, sender_private,
                                  rec.sensitivity, rec.message_id);
        rec.stream_sent = align_and_overlay(rec.stream_pre, ps.fused, sender_private,
                                            rec.sensitivity, ps.global_cb, cfg.tau);
        Codebook sender_private_cb =
            build_private_codebook(sender_private, ps.secret, cfg.width);
        rec.frame_sent = encode_tokens(rec.stream_sent, ps.global_cb, sender_private_cb);

        ChannelConfig ch{p, rec.channel_seed, cfg.channel_tap};
        TransmitResult tx = transmit(rec.frame_sent, ch, message_index);
        rec.frame_received = tx.received;
        if (tx.tapped) rec.frame_tapped = *tx.tapped;

        KnowledgeGraph receiver_private(GraphKind::private_knowledge);
        Codebook receiver_private_cb;
        if (dist.granted) {
            receiver_private = dist.graph;
            receiver_private_cb =
                build_private_codebook(receiver_private, ps.secret, cfg.width);
        }
        rec.stream_received = decode_tokens(rec.frame_received, ps.global_cb,
                                            receiver_private_cb, rec.message_id);
        rec.stream_repaired =
            cfg.repair_enabled && dist.granted
                ? repair_missing(rec.stream_received, receiver_private, ps.global_cb)
                : rec.stream_received;

        rec.truth = ground_truth(rec.stream_sent, ps.fused, sender_private, ps.global_cb,
                                 cfg.inference_depth);

        RecoveredArtifacts ra;
        for (const Token& tok : rec.stream_received.tokens)
            if (tok.provenance == Provenance::erasure) ++ra.undecoded_chunks;
        ra.total_chunks = rec.stream_received.tokens.size();
        ra.frames_observed = 1;
        DisaggregateResult disagg = disaggregate(rec.stream_repaired, receiver_private);
        for (const Token& tok : disagg.public_tokens) {
            if (tok.id == kUnknownTokenId || tok.id == kEraseTokenId) continue;
            if (tok.id >= ps.global_cb.size()) continue;
            const std::string& sym = ps.global_cb.symbol(tok.id);
            if (resolve_entity_by_symbol(ps.fused, sym)) ra.public_names.insert(sym);
        }
        for (EntityId id : disagg.sensitive_entities)
            ra.sensitive_names.insert(receiver_private.entity(id).name);
        ra.facts = infer_semantics(disagg.sensitive_entities, receiver_private,
                                   cfg.inference_depth);
        rec.receiver_public_names = ra.public_names;
        rec.receiver_sensitive_names = ra.sensitive_names;
        rec.receiver_facts = ra.facts;
        rec.receiver_report = score_leakage(rec.truth, ra);

        if (tx.tapped) {
            for (const std::string& a : cfg.attackers) {
                if (a == "A") {
                    rec.attacker_reports.emplace_back(
                        a, attack_bits({*tx.tapped},
                                       EavesdropperProfile::bits_only(cfg.width)));
                } else if (a == "B") {
                    rec.attacker_reports.emplace_back(
                        a, attack_global(*tx.tapped,
                                         EavesdropperProfile::with_global(ps.global_kg,
                                                                          cfg.width),
                                         rec.truth)
                               .report);
                } else {
                    EavesdropperProfile prof = EavesdropperProfile::with_personal(
                        ps.global_kg, ps.personal_tx, ps.personal_rx, cfg.width,
                        cfg.theta, cfg.walk, cfg.inference_depth);
                    prof.mirror_repair = cfg.repair_enabled;
                    if (a == "C_secret") prof.shared_secret = ps.secret;
                    rec.attacker_reports.emplace_back(
                        a, attack_personal(*tx.tapped, prof, rec.message, rec.walk_seed,
                                           rec.truth)
                               .report);
                }
            }
        }
        rec.ok = true;
    } catch (const Error& e) {
        rec.ok = false;
        rec.error = e.what(); // already prefixed with the error name
    }
    return rec;
}

std::string format_transcript(const TrialRecord& rec) {
    std::string out;
    out += "trial " + rec.message_id + "\n";
    out += "message " + rec.message + "\n";
    out += "seed " + std::to_string(rec.master_seed) + "\n";
    out += "p " + fixed6(rec.p) + "\n";
    out += "walk-seed " + std::to_string(rec.walk_seed) + "\n";
    out += "channel-seed " + std::to_string(rec.channel_seed) + "\n";
    if (!rec.ok) {
        out += "status error " + rec.error + "\n";
        return out;
    }
    out += "status ok\n";

    out += "terminals";
    for (EntityId id : rec.terminals) out += " " + std::to_string(id);
    out += "\n";
    out += "private-snapshot " + rec.private_snapshot + "\n";
    out += std::string("distribute ") +
           (rec.distribute_granted ? "granted"
                                   : std::string("denied ") + to_string(rec.deny_reason)) +
           "\n";
    out += "sensitivity";
    for (const auto& [id, entry] : rec.sensitivity.flagged) {
        out += " " + std::to_string(id) + ":" +
               (entry.reason == SensitiveReason::keyword_category ? "keyword" : "proximity") +
               ":" + std::to_string(entry.hop_distance);
    }
    out += "\n";
    out += "stream-pre " + format_stream(rec.stream_pre) + "\n";
    out += "stream-sent " + format_stream(rec.stream_sent) + "\n";
    out += "frame-sent " + rec.frame_sent.to_ascii() + "\n";
    out += "frame-received " + rec.frame_received.to_ascii() + "\n";
    out += "frame-tapped " + rec.frame_tapped.to_ascii() + "\n";
    out += "stream-received " + format_stream(rec.stream_received) + "\n";
    out += "stream-repaired " + format_stream(rec.stream_repaired) + "\n";

    auto name_list = [](const std::set<std::string>& names) {
        std::string s;
        for (const std::string& n : names) s += " " + n;
        return s;
    };
    auto fact_list = [](const std::set<InferredFact>& facts) {
        std::string s;
        for (const InferredFact& f : facts) s += " " + fact_text(f);
        return s;
    };
    out += "truth-public" + name_list(rec.truth.public_names) + "\n";
    out += "truth-sensitive" + name_list(rec.truth.sensitive_names) + "\n";
    out += "truth-facts" + fact_list(rec.truth.facts) + "\n";
    out += "receiver-public" + name_list(rec.receiver_public_names) + "\n";
    out += "receiver-sensitive" + name_list(rec.receiver_sensitive_names) + "\n";
    out += "receiver-facts" + fact_list(rec.receiver_facts) + "\n";
    out += report_line("receiver", rec.receiver_report);
    for (const auto& [key, report] : rec.attacker_reports)
        out += report_line(attacker_label(key), report);
    return out;
}

std::string leakage_csv_header() {
    return "trial_id,attacker_class,p,public_rate,sensitive_rate,f1,undecoded_fraction,"
           "seed\n";
}

std::string leakage_csv_rows(const TrialRecord& rec) {
    if (!rec.ok) return {};
    std::string out;
    for (const auto& [key, r] : rec.attacker_reports) {
        out += rec.message_id + "," + attacker_label(key) + "," + fixed6(rec.p) + "," +
               fixed6(r.public_entity_recovery_rate) + "," +
               fixed6(r.sensitive_entity_recovery_rate) + "," +
               fixed6(r.inferred_triple_f1) + "," + fixed6(r.undecoded_chunk_fraction) +
               "," + std::to_string(rec.master_seed) + "\n";
    }
    return out;
}

namespace {

struct Aggregate {
    std::size_t trials = 0;
    double public_rate = 0, sensitive_rate = 0, f1 = 0, undecoded = 0;

    void add(const LeakageReport& r) {
        ++trials;
        public_rate += r.public_entity_recovery_rate;
        sensitive_rate += r.sensitive_entity_recovery_rate;
        f1 += r.inferred_triple_f1;
        undecoded += r.undecoded_chunk_fraction;
    }
};

} // namespace

BatchResult run_batch(const PreparedScenario& ps, const std::string& out_dir,
                      const std::vector<double>& p_values) {
    namespace fs = std::filesystem;
    std::vector<double> plist = p_values.empty()
                                    ? std::vector<double>{ps.cfg.channel_p}
                                    : p_values;
    bool sweeping = plist.size() > 1;

    fs::create_directories(fs::path(out_dir) / "transcripts");

    BatchResult result;
    std::string leakage = leakage_csv_header();
    // (p, class) -> aggregate; class "receiver" plus attacker labels
    std::map<std::pair<double, std::string>, Aggregate> agg;
    std::vector<std::string> class_order = {"receiver"};
    for (const std::string& a : ps.cfg.attackers) class_order.push_back(attacker_label(a));

    for (double p : plist) {
        for (std::size_t idx = 0; idx < ps.corpus.size(); ++idx) {
            TrialRecord rec = run_trial(ps, idx, p);
            std::string name = rec.message_id;
            if (sweeping) name += "_p" + fixed6(p);
            fs::path file = fs::path(out_dir) / "transcripts" / (name + ".txt");
            std::ofstream out(file, std::ios::binary);
            out << format_transcript(rec);
            result.transcript_files.push_back(file.string());

            if (rec.ok) {
                ++result.trials_ok;
                leakage += leakage_csv_rows(rec);
                agg[{p, "receiver"}].add(rec.receiver_report);
                for (const auto& [key, report] : rec.attacker_reports)
                    agg[{p, attacker_label(key)}].add(report);
            } else {
                ++result.trials_failed;
            }
        }
    }

    std::string summary = "p,class,trials,public_rate,sensitive_rate,f1,undecoded_fraction\n";
    for (double p : plist) {
        for (const std::string& cls : class_order) {
            auto it = agg.find({p, cls});
            if (it == agg.end()) continue;
            const Aggregate& a = it->second;
            double n = static_cast<double>(a.trials);
            summary += fixed6(p) + "," + cls + "," + std::to_string(a.trials) + "," +
                       fixed6(a.public_rate / n) + "," + fixed6(a.sensitive_rate / n) +
                       "," + fixed6(a.f1 / n) + "," + fixed6(a.undecoded / n) + "\n";
        }
    }

    std::ofstream lout(fs::path(out_dir) / "leakage.csv", std::ios::binary);
    lout << leakage;
    std::ofstream sout(fs::path(out_dir) / "summary.csv", std::ios::binary);
    sout << summary;
    result.leakage_csv = (fs::path(out_dir) / "leakage.csv").string();
    result.summary_csv = (fs::path(out_dir) / "summary.csv").string();
    return result;
}

} // namespace semcom
