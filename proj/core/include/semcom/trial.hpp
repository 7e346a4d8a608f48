#pragma once

#include <map>
#include <string>
#include <vector>

#include "semcom/adversary.hpp"
#include "semcom/scenario.hpp"

namespace semcom {

// Everything derived once per scenario: loaded graphs, fusion, credentials.
struct PreparedScenario {
    ScenarioConfig cfg;
    KnowledgeGraph global_kg;
    KnowledgeGraph personal_tx;
    KnowledgeGraph personal_rx;
    std::vector<std::string> corpus;
    Bytes psi_salt;
    PsiTranscript psi_transcript;
    KnowledgeGraph fused;
    Codebook global_cb;
    SharedSecret secret;
    AccessCredential credential;
};

PreparedScenario prepare_scenario(const ScenarioConfig& cfg);

// Swap in a new master seed: re-derives the shared secret, PSI salt and the
// receiver credential in place. The fused graph is reused — fusion matches on
// names, so its output does not depend on the salt.
void reseed(PreparedScenario& ps, std::uint64_t seed);

struct TrialRecord {
    std::size_t message_index = 0;
    std::string message_id; // zero-padded index
    std::string message;
    double p = 0.0;
    std::uint64_t master_seed = 0;
    std::uint64_t walk_seed = 0;
    std::uint64_t channel_seed = 0;

    bool ok = false;
    std::string error; // ErrcName: detail when !ok

    std::set<EntityId> terminals;
    std::string private_snapshot; // content hash of the private graph
    bool distribute_granted = false;
    DenyReason deny_reason = DenyReason::none;
    SensitivityReport sensitivity;
    TokenStream stream_pre;
    TokenStream stream_sent;
    BitFrame frame_sent;
    BitFrame frame_received;
    BitFrame frame_tapped; // empty when the tap is off
    TokenStream stream_received;
    TokenStream stream_repaired;
    GroundTruth truth;
    std::set<std::string> receiver_public_names;
    std::set<std::string> receiver_sensitive_names;
    std::set<InferredFact> receiver_facts;
    LeakageReport receiver_report;
    std::vector<std::pair<std::string, LeakageReport>> attacker_reports;
};

TrialRecord run_trial(const PreparedScenario& ps, std::size_t message_index, double p);

// Byte-stable rendering; replay tests compare these strings exactly.
std::string format_transcript(const TrialRecord& record);

std::string leakage_csv_header();
std::string leakage_csv_rows(const TrialRecord& record);

struct BatchResult {
    std::size_t trials_ok = 0;
    std::size_t trials_failed = 0;
    std::vector<std::string> transcript_files;
    std::string leakage_csv;
    std::string summary_csv;
};

// One trial per (message, p); writes transcripts/, leakage.csv, summary.csv
// under out_dir. Per-trial pipeline errors are recorded, not fatal.
BatchResult run_batch(const PreparedScenario& ps, const std::string& out_dir,
                      const std::vector<double>& p_values = {});

} // namespace semcom
