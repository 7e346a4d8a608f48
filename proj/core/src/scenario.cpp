#include "semcom/scenario.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "semcom/text.hpp"

namespace semcom {

namespace {

[[noreturn]] void bad_value(const std::string& key, int line) {
    raise(Errc::parse_error,
          "line " + std::to_string(line) + ": malformed value for '" + key + "'");
}

double parse_double(const std::string& key, const std::string& value, int line) {
    try {
        std::size_t used = 0;
        double d = std::stod(value, &used);
        if (used != value.size()) bad_value(key, line);
        return d;
    } catch (const Error&) {
        throw;
    } catch (...) {
        bad_value(key, line);
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value, int line) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, line);
    return v;
}

bool parse_bool(const std::string& key, const std::string& value, int line) {
    if (value == "true" || value == "on" || value == "1") return true;
    if (value == "false" || value == "off" || value == "0") return false;
    bad_value(key, line);
}

void require_range(bool ok, const std::string& key) {
    if (!ok) raise(Errc::validation_error, key);
}

} // namespace

std::string ScenarioConfig::resolve_path(const std::string& p) const {
    std::filesystem::path fp(p);
    if (fp.is_absolute()) return p;
    return (std::filesystem::path(base_dir) / fp).string();
}

ScenarioConfig parse_scenario(std::string_view text, std::string base_dir) {
    ScenarioConfig cfg;
    cfg.base_dir = std::move(base_dir);

    bool categories_set = false;
    int line_no = 0;
    for (const std::string& raw : split(text, '\n')) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            raise(Errc::parse_error,
                  "line " + std::to_string(line_no) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            raise(Errc::parse_error, "line " + std::to_string(line_no) + ": empty key");

        if (key == "knowledge.global_entities") cfg.global_entities = value;
        else if (key == "knowledge.global_triples") cfg.global_triples = value;
        else if (key == "knowledge.personal_tx_entities") cfg.personal_tx_entities = value;
        else if (key == "knowledge.personal_tx_triples") cfg.personal_tx_triples = value;
        else if (key == "knowledge.personal_rx_entities") cfg.personal_rx_entities = value;
        else if (key == "knowledge.personal_rx_triples") cfg.personal_rx_triples = value;
        else if (key == "corpus.path") cfg.corpus_path = value;
        else if (key == "channel.p") cfg.channel_p = parse_double(key, value, line_no);
        else if (key == "channel.seed") cfg.channel_seed = parse_u64(key, value, line_no);
        else if (key == "channel.tap") cfg.channel_tap = parse_bool(key, value, line_no);
        else if (key == "walk.restarts")
            cfg.walk.walks_per_seed = static_cast<int>(parse_u64(key, value, line_no));
        else if (key == "walk.length")
            cfg.walk.walk_length = static_cast<int>(parse_u64(key, value, line_no));
        else if (key == "walk.visits")
            cfg.walk.min_visits = static_cast<int>(parse_u64(key, value, line_no));
        else if (key == "fuse.theta") cfg.theta = parse_double(key, value, line_no);
        else if (key == "overlay.tau") cfg.tau = parse_double(key, value, line_no);
        else if (key == "sensitivity.categories") {
            cfg.sensitive_categories.clear();
            for (const std::string& c : split(value, ',')) {
                std::string t = trim(c);
                if (!t.empty()) cfg.sensitive_categories.insert(t);
            }
            categories_set = true;
        } else if (key == "sensitivity.hops")
            cfg.sensitivity_hops = parse_u64(key, value, line_no);
        else if (key == "inference.depth")
            cfg.inference_depth = parse_u64(key, value, line_no);
        else if (key == "codec.width")
            cfg.width = static_cast<unsigned>(parse_u64(key, value, line_no));
        else if (key == "seed") cfg.seed = parse_u64(key, value, line_no);
        else if (key == "decoder.repair") cfg.repair_enabled = parse_bool(key, value, line_no);
        else if (key == "attackers") {
            cfg.attackers.clear();
            for (const std::string& a : split(value, ',')) {
                std::string t = trim(a);
                if (!t.empty()) cfg.attackers.push_back(t);
            }
        } else
            raise(Errc::validation_error, "unknown key '" + key + "' (line " +
                                              std::to_string(line_no) + ")");
    }

    require_range(!cfg.global_entities.empty(), "knowledge.global_entities");
    require_range(!cfg.global_triples.empty(), "knowledge.global_triples");
    require_range(!cfg.personal_tx_entities.empty(), "knowledge.personal_tx_entities");
    require_range(!cfg.personal_tx_triples.empty(), "knowledge.personal_tx_triples");
    require_range(!cfg.personal_rx_entities.empty(), "knowledge.personal_rx_entities");
    require_range(!cfg.personal_rx_triples.empty(), "knowledge.personal_rx_triples");
    require_range(!cfg.corpus_path.empty(), "corpus.path");
    require_range(cfg.channel_p >= 0.0 && cfg.channel_p <= 1.0, "channel.p");
    require_range(cfg.theta >= 0.0 && cfg.theta <= 1.0, "fuse.theta");
    require_range(cfg.tau >= 0.0 && cfg.tau <= 1.0, "overlay.tau");
    require_range(cfg.walk.walks_per_seed >= 1, "walk.restarts");
    require_range(cfg.walk.walk_length >= 1, "walk.length");
    require_range(cfg.walk.min_visits >= 1, "walk.visits");
    require_range(cfg.sensitivity_hops >= 1, "sensitivity.hops");
    require_range(cfg.inference_depth >= 1, "inference.depth");
    require_range(cfg.width >= 1 && cfg.width <= 32, "codec.width");
    if (!categories_set) cfg.sensitive_categories = {"credential"};
    for (const std::string& a : cfg.attackers)
        require_range(a == "A" || a == "B" || a == "C" || a == "C_secret", "attackers");
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::parse_error, "cannot open scenario file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string dir = std::filesystem::path(path).parent_path().string();
    if (dir.empty()) dir = ".";
    return parse_scenario(buf.str(), dir);
}

} // namespace semcom
