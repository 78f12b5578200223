#pragma once

#include "royalty/ledger.hpp"
#include "royalty/strategy.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace royalty {

// A scripted move: scripts force specific (possibly irrational or illegal)
// moves at a given tick, overriding what the agents would do. Illegal moves
// are logged as rejected, never fatal.
struct TransferIntent {
    Address from;
    Address to;
    Money cost;
};
struct DiscloseIntent {
    double x = 0.0;
};
struct DeclineIntent {};
struct TakeBackIntent {
    Address claimant;
};
struct AutoBuyIntent {
    Address buyer;
    Money payment;
};

using IntentBody =
    std::variant<TransferIntent, DiscloseIntent, DeclineIntent, TakeBackIntent, AutoBuyIntent>;

struct ScriptIntent {
    Tick time = 0;
    IntentBody body;
};

struct PlayerConfig {
    PlayerSpec spec;
    Strategy strategy;
};

struct TokenConfig {
    std::string creator;
    Address initial_owner;
    FeeSpec fee = FeeSpec::linear(0.05);
    PriceSpec price = PriceSpec::identity();
};

struct ScenarioConfig {
    std::vector<PlayerConfig> players;
    TokenConfig token;
    MechanismParams mechanism;
    std::vector<ScriptIntent> script;
    Tick horizon = 100;
    std::uint64_t seed = 0;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& config);
ScenarioConfig load_scenario(const std::string& path);

// Spec fragments as they appear inside scenario JSON, e.g.
// {"kind":"linear","rho":0.05} or {"kind":"monotone-table","points":[[1,10],[2,30]]}.
FeeSpec fee_spec_from_json(const nlohmann::json& j);
PriceSpec price_spec_from_json(const nlohmann::json& j);

// One line of the run log: either an applied ledger event or a rejected
// intent with the error that stopped it.
struct Rejection {
    ScriptIntent intent;
    ErrKind error = ErrKind::Config;
    Address owner_at_rejection;
};

struct LogRecord {
    std::int64_t seq = 0;
    Tick time = 0;
    std::variant<Event, Rejection> entry;
};

nlohmann::json record_to_json(const LogRecord& record);
std::string to_jsonl(const std::vector<LogRecord>& log);
std::vector<nlohmann::json> parse_jsonl(const std::string& text);

struct SimulationSummary {
    Address final_owner;
    PlayerId final_player;
    Money creator_royalties;
    Money escrow_outstanding;
    std::map<PlayerId, Money> balance_delta;
    std::map<std::string, int> event_counts;
    int applied = 0;
    int rejected = 0;
    Tick horizon = 0;
    std::uint64_t seed = 0;
};

nlohmann::json summary_to_json(const SimulationSummary& summary);
std::string summary_to_csv(const SimulationSummary& summary);

struct RunResult {
    std::vector<LogRecord> log;
    SimulationSummary summary;
};

// Executes a scenario tick by tick. Within a tick: scripted intents, the
// owner's first move, take-back polls over H in address order, auto-buy
// polls over players in id order, then expiries. Identical (config, seed)
// produces a bytewise-identical JSONL log.
RunResult run(const ScenarioConfig& config,
              std::optional<std::uint64_t> seed_override = std::nullopt);

struct Deviation {
    std::int64_t seq = 0;
    PlayerId player;
    double disclosed_x = 0.0;
    double oracle_x = 0.0;
    double grid_step = 0.0;
};

struct DeviationReport {
    std::vector<Deviation> entries;
    bool empty() const { return entries.empty(); }
};

// Re-checks every disclosure in a run of `config` against the brute-force
// grid oracle and flags any disclosure more than one grid step from the
// oracle argmax. Requires an all-BestResponse scenario unless allow_mixed.
DeviationReport verify_equilibrium(const ScenarioConfig& config, int grid_steps = 10000,
                                   bool allow_mixed = false);

nlohmann::json deviations_to_json(const DeviationReport& report);

struct ReplayResult {
    bool ok = true;
    std::int64_t first_mismatch_seq = 0;
    std::string detail;
    SimulationSummary summary;
};

// Re-drives the logged intents through a fresh ledger and byte-compares
// each regenerated record against the log. Any divergence (tampered
// amounts, different mechanism parameters, reordered events) is reported
// at the first differing seq.
ReplayResult replay(const std::string& jsonl, const ScenarioConfig& config);

} // namespace royalty
