#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "semcom/trial.hpp"

using namespace semcom;
using testutil::raises;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// A minimal self-contained scenario written under a fresh temp directory.
struct MiniScenario {
    fs::path dir;

    explicit MiniScenario(const std::string& tag,
                          const std::string& corpus =
                              "alice waits at the park with the pin\n"
                              "the door code opens the park\n"
                              "alice shares the pin near the cafe\n") {
        dir = fs::temp_directory_path() / ("semcom-test-" + tag);
        fs::remove_all(dir);
        fs::create_directories(dir);
        spit(dir / "g.e.tsv",
             "0\tpark\tplace\n1\tcafe\tplace\n2\tmuseum\tplace\n");
        spit(dir / "g.t.tsv", "0\tnear\t1\n1\tnear\t2\n");
        spit(dir / "tx.e.tsv",
             "0\talice\tperson\n1\tpark\tplace\n2\tpin\tcredential\tvalue=1234\n");
        spit(dir / "tx.t.tsv", "0\tvisits\t1\n0\tuses\t2\n");
        spit(dir / "rx.e.tsv",
             "0\talice\tperson\n1\tpark\tplace\n2\tdoor code\tcredential\tvalue=77\n");
        spit(dir / "rx.t.tsv", "0\tvisits\t1\n0\tuses\t2\n");
        spit(dir / "corpus.txt", corpus);
        spit(dir / "mini.scenario", scenario_text());
    }

    ~MiniScenario() { fs::remove_all(dir); }

    static std::string scenario_text() {
        return "knowledge.global_entities = g.e.tsv\n"
               "knowledge.global_triples = g.t.tsv\n"
               "knowledge.personal_tx_entities = tx.e.tsv\n"
               "knowledge.personal_tx_triples = tx.t.tsv\n"
               "knowledge.personal_rx_entities = rx.e.tsv\n"
               "knowledge.personal_rx_triples = rx.t.tsv\n"
               "corpus.path = corpus.txt\n"
               "seed = 9\n";
    }

    ScenarioConfig config() const {
        return load_scenario((dir / "mini.scenario").string());
    }
};

const std::string kOfficeScenario = std::string(SEMCOM_FIXTURES) + "/office.scenario";

} // namespace

TEST_SUITE("harness") {

TEST_CASE("scenario defaults cover every tunable") {
    MiniScenario mini("defaults");
    ScenarioConfig cfg = mini.config();
    CHECK(cfg.channel_p == doctest::Approx(0.0));
    CHECK_FALSE(cfg.channel_seed.has_value());
    CHECK(cfg.channel_tap);
    CHECK(cfg.walk.walks_per_seed == 16);
    CHECK(cfg.walk.walk_length == 4);
    CHECK(cfg.walk.min_visits == 2);
    CHECK(cfg.theta == doctest::Approx(0.5));
    CHECK(cfg.tau == doctest::Approx(0.8));
    CHECK(cfg.sensitive_categories == std::set<std::string>{"credential"});
    CHECK(cfg.sensitivity_hops == 1);
    CHECK(cfg.inference_depth == 2);
    CHECK(cfg.width == 16);
    CHECK(cfg.seed == 9);
    CHECK(cfg.repair_enabled);
    CHECK(cfg.attackers == std::vector<std::string>{"A", "B", "C", "C_secret"});
    CHECK(cfg.resolve_path("corpus.txt") == (mini.dir / "corpus.txt").string());
    CHECK(cfg.resolve_path("/abs/path") == "/abs/path");
}

TEST_CASE("scenario rejects unknown keys, bad values, bad ranges") {
    std::string base = MiniScenario::scenario_text();
    CHECK(raises(Errc::validation_error,
                 [&] { parse_scenario(base + "channel.pp = 0.1\n"); }));
    CHECK(raises(Errc::parse_error,
                 [&] { parse_scenario(base + "channel.p = maybe\n"); }));
    CHECK(raises(Errc::validation_error,
                 [&] { parse_scenario(base + "channel.p = 1.5\n"); }));
    CHECK(raises(Errc::validation_error,
                 [&] { parse_scenario(base + "overlay.tau = -0.2\n"); }));
    CHECK(raises(Errc::validation_error,
                 [&] { parse_scenario(base + "codec.width = 40\n"); }));
    CHECK(raises(Errc::validation_error,
                 [&] { parse_scenario(base + "sensitivity.hops = 0\n"); }));
    CHECK(raises(Errc::validation_error,
                 [&] { parse_scenario(base + "attackers = A,Q\n"); }));
    CHECK(raises(Errc::parse_error, [&] { parse_scenario(base + "stray line\n"); }));
    CHECK(raises(Errc::validation_error, [] { parse_scenario("seed = 1\n"); }));

    // error text names the key and the line
    try {
        parse_scenario(base + "channel.pp = 0.1\n");
        FAIL("expected a validation error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("channel.pp") != std::string::npos);
        CHECK(std::string(e.what()).find("line 9") != std::string::npos);
    }
}

TEST_CASE("scenario accepts comments, overrides, both bool spellings") {
    std::string text = MiniScenario::scenario_text() +
                       "# a comment\n"
                       "\n"
                       "channel.p = 0.25\n"
                       "channel.seed = 77\n"
                       "channel.tap = off\n"
                       "decoder.repair = false\n"
                       "sensitivity.categories = credential, badge\n"
                       "attackers = A,B\n";
    ScenarioConfig cfg = parse_scenario(text);
    CHECK(cfg.channel_p == doctest::Approx(0.25));
    CHECK(cfg.channel_seed == 77);
    CHECK_FALSE(cfg.channel_tap);
    CHECK_FALSE(cfg.repair_enabled);
    CHECK(cfg.sensitive_categories == std::set<std::string>{"badge", "credential"});
    CHECK(cfg.attackers == std::vector<std::string>{"A", "B"});
}

TEST_CASE("prepare_scenario loads graphs, fuses, and issues the credential") {
    MiniScenario mini("prepare");
    PreparedScenario ps = prepare_scenario(mini.config());
    CHECK(ps.corpus.size() == 3);
    CHECK(ps.global_kg.kind() == GraphKind::global);
    CHECK(ps.fused.kind() == GraphKind::fused);
    CHECK(ps.fused.entity_count() == 4); // alice/park/pin merged + door code
    CHECK_FALSE(ps.fused.find_by_folded_name("door code").empty());
    CHECK(ps.global_cb.size() == 2 + 4); // park cafe museum near
    CHECK(ps.psi_salt.size() == 16);
    CHECK(ps.credential.principal == "receiver");
    CHECK(ps.credential.has_permission(Permission::query_private));
    CHECK_FALSE(ps.psi_transcript.digests_a.empty());
}

TEST_CASE("reseed swaps seed-derived material in place") {
    MiniScenario mini("reseed");
    PreparedScenario ps = prepare_scenario(mini.config());
    SharedSecret old_secret = ps.secret;
    Bytes old_salt = ps.psi_salt;
    KnowledgeGraph fused_before = ps.fused;

    reseed(ps, 1234);
    CHECK(ps.cfg.seed == 1234);
    CHECK_FALSE(ps.secret == old_secret);
    CHECK(ps.psi_salt != old_salt);
    CHECK(ps.fused == fused_before);
    CHECK(run_trial(ps, 0, 0.0).ok);

    reseed(ps, 9);
    CHECK(ps.secret == old_secret);
    CHECK(ps.psi_salt == old_salt);
}

TEST_CASE("run_trial at p=0 recovers everything and mirrors its inputs") {
    MiniScenario mini("trial");
    PreparedScenario ps = prepare_scenario(mini.config());
    TrialRecord rec = run_trial(ps, 0, 0.0);
    REQUIRE(rec.ok);
    CHECK(rec.message_id == "000");
    CHECK(rec.message == "alice waits at the park with the pin");
    CHECK(rec.distribute_granted);
    CHECK(rec.stream_received.tokens == rec.stream_sent.tokens);
    CHECK(rec.frame_tapped == rec.frame_sent);
    CHECK(rec.receiver_report.public_entity_recovery_rate == doctest::Approx(1.0));
    CHECK(rec.receiver_report.sensitive_entity_recovery_rate == doctest::Approx(1.0));
    CHECK(rec.receiver_report.inferred_triple_f1 == doctest::Approx(1.0));
    CHECK(rec.receiver_report.undecoded_chunk_fraction == doctest::Approx(0.0));
    CHECK(rec.truth.public_names == std::set<std::string>{"park"});
    CHECK(rec.truth.sensitive_names == std::set<std::string>{"alice", "pin"});
    REQUIRE(rec.attacker_reports.size() == 4);
    CHECK(rec.attacker_reports[0].first == "A");
    CHECK(rec.attacker_reports[3].first == "C_secret");

    // transcripts are byte-stable across repeated runs
    TrialRecord again = run_trial(ps, 0, 0.0);
    CHECK(format_transcript(rec) == format_transcript(again));
    std::string text = format_transcript(rec);
    CHECK(text.find("trial 000\nmessage alice waits at the park with the pin\n") == 0);
    CHECK(text.find("status ok\n") != std::string::npos);
    CHECK(text.find("report receiver ") != std::string::npos);
    CHECK(text.find("report C_personal_secret ") != std::string::npos);
}

TEST_CASE("pipeline errors are recorded per trial, not thrown") {
    MiniScenario mini("trial-err",
                      "alice waits at the park with the pin\n"
                      "zzz qqq www\n"
                      "the door code opens the park\n");
    PreparedScenario ps = prepare_scenario(mini.config());
    TrialRecord bad = run_trial(ps, 1, 0.0);
    CHECK_FALSE(bad.ok);
    CHECK(bad.error.find("NoEntitiesMatched") == 0);
    std::string text = format_transcript(bad);
    CHECK(text.find("status error NoEntitiesMatched") != std::string::npos);
    CHECK(leakage_csv_rows(bad).empty());

    BatchResult br = run_batch(ps, (mini.dir / "out").string());
    CHECK(br.trials_ok == 2);
    CHECK(br.trials_failed == 1);
    CHECK(br.transcript_files.size() == 3);
}

TEST_CASE("run_batch writes transcripts and the two csv files") {
    MiniScenario mini("batch");
    PreparedScenario ps = prepare_scenario(mini.config());
    fs::path out = mini.dir / "out";
    BatchResult br = run_batch(ps, out.string());
    CHECK(br.trials_ok == 3);
    CHECK(br.trials_failed == 0);
    REQUIRE(br.transcript_files.size() == 3);
    CHECK(fs::exists(out / "transcripts" / "000.txt"));
    CHECK(fs::exists(out / "transcripts" / "002.txt"));

    std::string leakage = slurp(out / "leakage.csv");
    CHECK(leakage.find("trial_id,attacker_class,p,public_rate,sensitive_rate,f1,"
                       "undecoded_fraction,seed\n") == 0);
    // 3 ok trials x 4 attacker classes
    CHECK(std::count(leakage.begin(), leakage.end(), '\n') == 1 + 3 * 4);
    CHECK(leakage.find("000,A_bits,0.000000,") != std::string::npos);
    CHECK(leakage.find(",9\n") != std::string::npos); // master seed column

    std::string summary = slurp(out / "summary.csv");
    CHECK(summary.find("p,class,trials,public_rate,sensitive_rate,f1,"
                       "undecoded_fraction\n") == 0);
    CHECK(summary.find("0.000000,receiver,3,") != std::string::npos);
    CHECK(summary.find("0.000000,C_personal_secret,3,") != std::string::npos);

    // a batch rerun into a second directory is byte-identical
    fs::path out2 = mini.dir / "out2";
    run_batch(ps, out2.string());
    CHECK(slurp(out / "transcripts" / "001.txt") == slurp(out2 / "transcripts" / "001.txt"));
    CHECK(slurp(out / "leakage.csv") == slurp(out2 / "leakage.csv"));
    CHECK(slurp(out / "summary.csv") == slurp(out2 / "summary.csv"));
}

TEST_CASE("sweeps run the corpus once per p and suffix the transcripts") {
    MiniScenario mini("sweep");
    PreparedScenario ps = prepare_scenario(mini.config());
    fs::path out = mini.dir / "out";
    std::vector<double> ps_list{0.0, 0.05, 0.1, 0.2};
    BatchResult br = run_batch(ps, out.string(), ps_list);
    CHECK(br.trials_ok + br.trials_failed == 12);
    CHECK(br.transcript_files.size() == 12);
    CHECK(fs::exists(out / "transcripts" / "000_p0.050000.txt"));
    CHECK(fs::exists(out / "transcripts" / "002_p0.200000.txt"));

    std::string summary = slurp(out / "summary.csv");
    for (const char* p : {"0.000000", "0.050000", "0.100000", "0.200000"})
        CHECK(summary.find(std::string(p) + ",receiver,") != std::string::npos);
}

TEST_CASE("empty corpus produces header-only outputs") {
    MiniScenario mini("empty", "\n\n");
    PreparedScenario ps = prepare_scenario(mini.config());
    CHECK(ps.corpus.empty());
    fs::path out = mini.dir / "out";
    BatchResult br = run_batch(ps, out.string());
    CHECK(br.trials_ok == 0);
    CHECK(slurp(out / "leakage.csv") == leakage_csv_header());
    CHECK(slurp(out / "summary.csv") ==
          "p,class,trials,public_rate,sensitive_rate,f1,undecoded_fraction\n");
}

TEST_CASE("the office fixture scenario loads and runs head to tail") {
    ScenarioConfig cfg = load_scenario(kOfficeScenario);
    PreparedScenario ps = prepare_scenario(cfg);
    CHECK(ps.corpus.size() == 22);
    CHECK(ps.fused.entity_count() >= 50);
    CHECK(ps.global_cb.size() == 63);
    TrialRecord rec = run_trial(ps, 5, 0.0);
    REQUIRE(rec.ok);
    CHECK(rec.truth.public_names ==
          std::set<std::string>{"annex", "boiler", "skylight"});
    CHECK(rec.truth.sensitive_names == std::set<std::string>{"door pin"});
    CHECK(rec.receiver_report.sensitive_entity_recovery_rate == doctest::Approx(1.0));
}

} // TEST_SUITE
