// Command line front end: each pipeline stage independently invokable.
//
//   semcom fuse   --scenario office.scenario --out dump/
//   semcom encode --scenario office.scenario --message 3 --out frame.bin
//   semcom decode --scenario office.scenario --message 3 --in frame.bin
//   semcom run    --scenario office.scenario --out results/ --sweep channel.p=0,0.05
//   semcom attack --scenario office.scenario --message 3 -p 0.1
//   semcom report results/

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semcom/channel.hpp"
#include "semcom/trial.hpp"

using namespace semcom;
namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string scenario;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--scenario", args.scenario, "scenario file")->required();
    cmd->add_option("--seed", args.seed, "override the scenario master seed");
}

PreparedScenario prepare(const CommonArgs& args) {
    ScenarioConfig cfg = load_scenario(args.scenario);
    if (args.seed) cfg.seed = *args.seed;
    return prepare_scenario(cfg);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::vector<double> parse_sweep(const std::string& arg) {
    const std::string prefix = "channel.p=";
    if (arg.rfind(prefix, 0) != 0)
        throw CLI::ValidationError("--sweep", "expected channel.p=<comma list>");
    std::vector<double> values;
    std::stringstream ss(arg.substr(prefix.size()));
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = std::stod(item, &used);
        if (used != item.size() || v < 0.0 || v > 1.0)
            throw CLI::ValidationError("--sweep", "bad probability '" + item + "'");
        values.push_back(v);
    }
    if (values.empty())
        throw CLI::ValidationError("--sweep", "empty probability list");
    return values;
}

std::string names_line(const std::set<std::string>& names) {
    std::string out;
    for (const std::string& n : names) out += (out.empty() ? "" : ", ") + n;
    return out.empty() ? "(none)" : out;
}

void print_report(const std::string& who, const LeakageReport& r) {
    std::printf("%-18s public=%.6f sensitive=%.6f precision=%.6f recall=%.6f "
                "f1=%.6f undecoded=%.6f\n",
                who.c_str(), r.public_entity_recovery_rate,
                r.sensitive_entity_recovery_rate, r.inferred_triple_precision,
                r.inferred_triple_recall, r.inferred_triple_f1,
                r.undecoded_chunk_fraction);
}

// Rebuild the receiver-side stack for one message the way a trial does; the
// walk seed comes from a dry trial run so stage commands stay bit-identical
// with batch runs.
struct ReceiverStack {
    KnowledgeGraph graph{GraphKind::private_knowledge};
    Codebook codebook;
    bool granted = false;
};

ReceiverStack receiver_stack(const PreparedScenario& ps, const TrialRecord& rec) {
    ReceiverStack rs;
    KnowledgeGraph sender_private = construct_private_knowledge(
        ps.fused, rec.message, ps.cfg.walk, rec.walk_seed);
    DistributeResult dist = distribute(sender_private, ps.credential, ps.secret);
    rs.granted = dist.granted;
    if (dist.granted) {
        rs.graph = dist.graph;
        rs.codebook = build_private_codebook(rs.graph, ps.secret, ps.cfg.width);
    }
    return rs;
}

int cmd_fuse(const CommonArgs& args, const std::string& out_dir) {
    PreparedScenario ps = prepare(args);
    std::printf("tx personal:  %zu entities, %zu triples\n",
                ps.personal_tx.entity_count(), ps.personal_tx.triple_count());
    std::printf("rx personal:  %zu entities, %zu triples\n",
                ps.personal_rx.entity_count(), ps.personal_rx.triple_count());
    std::printf("fused:        %zu entities, %zu triples\n", ps.fused.entity_count(),
                ps.fused.triple_count());
    std::printf("psi digests:  %zu + %zu exchanged\n", ps.psi_transcript.digests_a.size(),
                ps.psi_transcript.digests_b.size());
    std::printf("global book:  %zu symbols, width %u\n", ps.global_cb.size(),
                ps.cfg.width);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        spit(fs::path(out_dir) / "fused.entities.tsv", serialize_entities(ps.fused));
        spit(fs::path(out_dir) / "fused.triples.tsv", serialize_triples(ps.fused));
        spit(fs::path(out_dir) / "psi_transcript.txt", ps.psi_transcript.serialize());
        spit(fs::path(out_dir) / "global_codebook.tsv", ps.global_cb.export_tsv());
        std::printf("wrote 4 files under %s\n", out_dir.c_str());
    }
    return 0;
}

int cmd_encode(const CommonArgs& args, std::size_t message, const std::string& out_file) {
    PreparedScenario ps = prepare(args);
    TrialRecord rec = run_trial(ps, message, 0.0);
    if (!rec.ok) {
        std::fprintf(stderr, "trial error: %s\n", rec.error.c_str());
        return 1;
    }
    std::printf("message %s: %s\n", rec.message_id.c_str(), rec.message.c_str());
    std::string terms;
    for (EntityId id : rec.terminals)
        terms += (terms.empty() ? "" : ", ") + ps.fused.entity(id).name;
    std::printf("terminals:    %s\n", terms.c_str());
    std::printf("sensitive:    %zu entities flagged\n", rec.sensitivity.flagged.size());
    std::printf("tokens:       %s\n", format_stream(rec.stream_pre).c_str());
    std::printf("overlaid:     %s\n", format_stream(rec.stream_sent).c_str());
    std::printf("frame:        %zu bits\n", rec.frame_sent.size());
    std::printf("%s\n", rec.frame_sent.to_ascii().c_str());
    if (!out_file.empty()) {
        Bytes packed = rec.frame_sent.to_packed();
        std::ofstream out(out_file, std::ios::binary);
        out.write(reinterpret_cast<const char*>(packed.data()),
                  static_cast<std::streamsize>(packed.size()));
        std::printf("wrote packed frame to %s\n", out_file.c_str());
    }
    return 0;
}

BitFrame read_frame(const std::string& path) {
    std::string raw = slurp(path);
    bool ascii = !raw.empty() && raw.find_first_not_of("01\r\n") == std::string::npos;
    if (ascii) {
        std::string bits;
        for (char c : raw)
            if (c == '0' || c == '1') bits.push_back(c);
        return BitFrame::from_ascii(bits);
    }
    return BitFrame::from_packed(Bytes(raw.begin(), raw.end()));
}

int cmd_decode(const CommonArgs& args, std::size_t message, const std::string& in_file,
               std::optional<double> p_override) {
    PreparedScenario ps = prepare(args);
    double p = p_override.value_or(ps.cfg.channel_p);
    TrialRecord rec = run_trial(ps, message, p);
    if (!rec.ok) {
        std::fprintf(stderr, "trial error: %s\n", rec.error.c_str());
        return 1;
    }

    TokenStream received = rec.stream_received;
    TokenStream repaired = rec.stream_repaired;
    ReceiverStack rs = receiver_stack(ps, rec);
    if (!in_file.empty()) {
        BitFrame frame = read_frame(in_file);
        received = decode_tokens(frame, ps.global_cb, rs.codebook, rec.message_id);
        repaired = ps.cfg.repair_enabled && rs.granted
                       ? repair_missing(received, rs.graph, ps.global_cb)
                       : received;
    }

    std::printf("message %s at p=%.6f\n", rec.message_id.c_str(), p);
    std::printf("received:     %s\n", format_stream(received).c_str());
    std::printf("repaired:     %s\n", format_stream(repaired).c_str());

    DisaggregateResult disagg = disaggregate(repaired, rs.graph);
    std::set<std::string> public_names, sensitive_names;
    for (const Token& tok : disagg.public_tokens) {
        if (tok.id == kUnknownTokenId || tok.id == kEraseTokenId) continue;
        if (tok.id >= ps.global_cb.size()) continue;
        const std::string& sym = ps.global_cb.symbol(tok.id);
        if (resolve_entity_by_symbol(ps.fused, sym)) public_names.insert(sym);
    }
    for (EntityId id : disagg.sensitive_entities)
        sensitive_names.insert(rs.graph.entity(id).name);
    std::printf("public:       %s\n", names_line(public_names).c_str());
    std::printf("sensitive:    %s\n", names_line(sensitive_names).c_str());
    for (const InferredFact& f : infer_semantics(disagg.sensitive_entities, rs.graph,
                                                 ps.cfg.inference_depth)) {
        std::printf("fact:         %s %s %s%s%s (depth %zu)\n", f.subject.c_str(),
                    f.relation.c_str(), f.object.c_str(),
                    f.object_value.empty() ? "" : " = ",
                    f.object_value.c_str(), f.depth);
    }
    return 0;
}

int cmd_run(const CommonArgs& args, const std::string& out_dir,
            const std::string& sweep) {
    PreparedScenario ps = prepare(args);
    std::vector<double> p_values;
    if (!sweep.empty()) p_values = parse_sweep(sweep);
    BatchResult result = run_batch(ps, out_dir, p_values);
    std::printf("trials:       %zu ok, %zu failed\n", result.trials_ok,
                result.trials_failed);
    std::printf("transcripts:  %zu under %s/transcripts\n",
                result.transcript_files.size(), out_dir.c_str());
    std::printf("leakage:      %s\n", result.leakage_csv.c_str());
    std::printf("summary:      %s\n", result.summary_csv.c_str());
    return 0; // per-trial errors are recorded in transcripts, not fatal
}

int cmd_attack(const CommonArgs& args, std::size_t message,
               std::optional<double> p_override) {
    PreparedScenario ps = prepare(args);
    double p = p_override.value_or(ps.cfg.channel_p);
    TrialRecord rec = run_trial(ps, message, p);
    if (!rec.ok) {
        std::fprintf(stderr, "trial error: %s\n", rec.error.c_str());
        return 1;
    }
    std::printf("message %s at p=%.6f (tap %s)\n", rec.message_id.c_str(), p,
                ps.cfg.channel_tap ? "on" : "off");
    std::printf("truth public:    %s\n", names_line(rec.truth.public_names).c_str());
    std::printf("truth sensitive: %s\n", names_line(rec.truth.sensitive_names).c_str());
    print_report("receiver", rec.receiver_report);
    for (const auto& [who, report] : rec.attacker_reports) print_report(who, report);
    if (rec.attacker_reports.empty())
        std::printf("(tap disabled: no attacker reports)\n");
    return 0;
}

int cmd_report(const std::string& dir) {
    std::string csv = slurp((fs::path(dir) / "leakage.csv").string());
    std::stringstream lines(csv);
    std::string line;
    std::getline(lines, line); // header

    struct Agg {
        std::size_t n = 0;
        double pub = 0, sens = 0, f1 = 0, undec = 0;
    };
    std::map<std::pair<std::string, std::string>, Agg> agg;
    std::vector<std::pair<std::string, std::string>> order;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream row(line);
        std::string col;
        while (std::getline(row, col, ',')) cols.push_back(col);
        if (cols.size() != 8) throw std::runtime_error("malformed row: " + line);
        auto key = std::pair{cols[2], cols[1]};
        if (!agg.count(key)) order.push_back(key);
        Agg& a = agg[key];
        ++a.n;
        a.pub += std::stod(cols[3]);
        a.sens += std::stod(cols[4]);
        a.f1 += std::stod(cols[5]);
        a.undec += std::stod(cols[6]);
    }
    std::printf("p,class,trials,public_rate,sensitive_rate,f1,undecoded_fraction\n");
    for (const auto& key : order) {
        const Agg& a = agg.at(key);
        double n = static_cast<double>(a.n);
        std::printf("%s,%s,%zu,%.6f,%.6f,%.6f,%.6f\n", key.first.c_str(),
                    key.second.c_str(), a.n, a.pub / n, a.sens / n, a.f1 / n,
                    a.undec / n);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"knowledge-assisted semantic communication pipeline"};
    app.require_subcommand(1);

    CommonArgs fuse_args, encode_args, decode_args, run_args, attack_args;
    std::string fuse_out, encode_out, decode_in, run_out, run_sweep, report_dir;
    std::size_t encode_msg = 0, decode_msg = 0, attack_msg = 0;
    std::optional<double> decode_p, attack_p;

    CLI::App* fuse_cmd = app.add_subcommand("fuse", "fuse the personal graphs");
    add_common(fuse_cmd, fuse_args);
    fuse_cmd->add_option("--out", fuse_out, "dump fused graph and codebook here");

    CLI::App* encode_cmd = app.add_subcommand("encode", "sender side of one message");
    add_common(encode_cmd, encode_args);
    encode_cmd->add_option("--message", encode_msg, "corpus message index");
    encode_cmd->add_option("--out", encode_out, "write the packed frame here");

    CLI::App* decode_cmd = app.add_subcommand("decode", "receiver side of one message");
    add_common(decode_cmd, decode_args);
    decode_cmd->add_option("--message", decode_msg, "corpus message index");
    decode_cmd->add_option("--in", decode_in, "frame file (packed or 0/1 text)");
    decode_cmd->add_option("-p", decode_p, "loopback flip probability");

    CLI::App* run_cmd = app.add_subcommand("run", "full batch over the corpus");
    add_common(run_cmd, run_args);
    run_cmd->add_option("--out", run_out, "output directory")->required();
    run_cmd->add_option("--sweep", run_sweep, "channel.p=<comma list>");

    CLI::App* attack_cmd = app.add_subcommand("attack", "attacker reports for one message");
    add_common(attack_cmd, attack_args);
    attack_cmd->add_option("--message", attack_msg, "corpus message index");
    attack_cmd->add_option("-p", attack_p, "flip probability override");

    CLI::App* report_cmd = app.add_subcommand("report", "aggregate a leakage.csv");
    report_cmd->add_option("dir", report_dir, "directory with leakage.csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (fuse_cmd->parsed()) return cmd_fuse(fuse_args, fuse_out);
        if (encode_cmd->parsed()) return cmd_encode(encode_args, encode_msg, encode_out);
        if (decode_cmd->parsed())
            return cmd_decode(decode_args, decode_msg, decode_in, decode_p);
        if (run_cmd->parsed()) return cmd_run(run_args, run_out, run_sweep);
        if (attack_cmd->parsed()) return cmd_attack(attack_args, attack_msg, attack_p);
        if (report_cmd->parsed()) return cmd_report(report_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
