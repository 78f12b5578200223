#include "royalty/cli_app.hpp"

#include "royalty/analysis.hpp"
#include "royalty/error.hpp"
#include "royalty/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace royalty {

namespace {

using nlohmann::json;

std::optional<std::uint64_t> env_seed() {
    const char* env = std::getenv("ROYALTY_SIM_SEED");
    if (!env || !*env)
        return std::nullopt;
    try {
        return std::stoull(env);
    } catch (const std::exception&) {
        throw Error(ErrKind::Config, "ROYALTY_SIM_SEED is not an unsigned integer");
    }
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrKind::Config, "cannot write to '" + path + "'");
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrKind::Parse, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void print_summary(std::ostream& out, const SimulationSummary& summary, bool as_json) {
    if (as_json) {
        out << summary_to_json(summary).dump() << "\n";
        return;
    }
    out << "final owner:       " << summary.final_owner << " (player " << summary.final_player
        << ")\n";
    out << "creator royalties: " << summary.creator_royalties.str() << "\n";
    out << "escrow open:       " << summary.escrow_outstanding.str() << "\n";
    for (const auto& [id, d] : summary.balance_delta)
        out << "balance delta " << id << ": " << d.str() << "\n";
    for (const auto& [kind, n] : summary.event_counts)
        out << "events " << kind << ": " << n << "\n";
    out << "applied: " << summary.applied << "  rejected: " << summary.rejected << "\n";
}

struct RunOptions {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::string summary_path;
    std::string csv_path;
    bool as_json = false;
};

int cmd_run(const RunOptions& opt, std::ostream& out) {
    ScenarioConfig config = load_scenario(opt.scenario);
    std::optional<std::uint64_t> seed = opt.seed;
    if (!seed)
        seed = env_seed();
    RunResult result = run(config, seed);
    if (!opt.out_path.empty())
        write_file(opt.out_path, to_jsonl(result.log));
    if (!opt.summary_path.empty())
        write_file(opt.summary_path, summary_to_json(result.summary).dump(2) + "\n");
    if (!opt.csv_path.empty())
        write_file(opt.csv_path, summary_to_csv(result.summary));
    print_summary(out, result.summary, opt.as_json);
    return kExitOk;
}

struct VerifyOptions {
    std::string scenario;
    int grid_steps = 10000;
    bool allow_mixed = false;
    bool as_json = false;
};

int cmd_verify_eq(const VerifyOptions& opt, std::ostream& out) {
    ScenarioConfig config = load_scenario(opt.scenario);
    DeviationReport report = verify_equilibrium(config, opt.grid_steps, opt.allow_mixed);
    if (opt.as_json) {
        json j;
        j["deviations"] = deviations_to_json(report);
        j["ok"] = report.empty();
        out << j.dump() << "\n";
    } else if (report.empty()) {
        out << "equilibrium verified: every disclosure matches the oracle\n";
    } else {
        for (const auto& d : report.entries)
            out << "deviation at seq " << d.seq << ": player " << d.player << " disclosed "
                << d.disclosed_x << ", oracle argmax " << d.oracle_x << " (grid step "
                << d.grid_step << ")\n";
    }
    return report.empty() ? kExitOk : kExitVerificationFailed;
}

struct CollusionOptions {
    std::string fee;
    std::string hodl;
    double rate = 0.0;
    double lockup = 0.0;
    int n = 1;
    bool as_json = false;
};

int cmd_collusion(const CollusionOptions& opt, std::ostream& out) {
    double fee = Money::parse(opt.fee).value();
    double hodl = Money::parse(opt.hodl).value();
    if (!(fee > 0.0) || !(hodl > 0.0) || !(opt.rate > 0.0) || !(opt.lockup > 0.0) || opt.n < 1)
        throw Error(ErrKind::Config, "fee, hodl, rate, lockup, and n must be positive");

    double lambda = lockup_discount(opt.rate, opt.lockup);
    double tn_bound = collusion_tn_bound(fee, hodl, opt.rate);
    double exact_ratio = collusion_exact_ratio(fee, hodl, opt.rate, opt.lockup, opt.n);
    auto witness = find_feasible_collusion(fee, hodl, opt.rate, opt.lockup, opt.n);

    if (opt.as_json) {
        json j;
        j["lambda"] = lambda;
        j["tn_bound_years"] = tn_bound;
        j["tn_requested"] = opt.lockup * opt.n;
        j["exact_ratio"] = exact_ratio;
        j["exact_condition_met"] = exact_ratio > 1.0;
        j["feasible"] = witness.has_value();
        if (witness) {
            j["witness"] = {{"bribe", witness->bribe}, {"collateral", witness->collateral}};
        }
        out << j.dump() << "\n";
    } else {
        out << std::setprecision(10);
        out << "lambda (1 - e^-RT):        " << lambda << "\n";
        out << "approx bound T*N <:        " << tn_bound << " person-years\n";
        out << "requested T*N:             " << opt.lockup * opt.n << " person-years\n";
        out << "exact ratio fee/(l*N*v):   " << exact_ratio
            << (exact_ratio > 1.0 ? "  (necessary condition met)" : "  (necessary condition fails)")
            << "\n";
        if (witness)
            out << "symmetric contract:        feasible, e.g. bribe " << witness->bribe
                << ", collateral " << witness->collateral << "\n";
        else
            out << "symmetric contract:        infeasible\n";
    }
    return kExitOk;
}

struct BoundsOptions {
    std::string price;
    std::string fee_spec;
    std::string price_spec = "{\"kind\":\"identity\"}";
    std::optional<double> disclosed;
    bool as_json = false;
};

int cmd_bounds(const BoundsOptions& opt, std::ostream& out) {
    double c = Money::parse(opt.price).value();
    json fee_json, price_json;
    try {
        fee_json = json::parse(opt.fee_spec);
        price_json = json::parse(opt.price_spec);
    } catch (const json::parse_error& e) {
        throw Error(ErrKind::Parse, std::string("spec JSON: ") + e.what());
    }
    FeeSpec fee = fee_spec_from_json(fee_json);
    PriceSpec price = price_spec_from_json(price_json);

    BoundsReport report = compute_bounds(c, fee, price, opt.disclosed);
    if (opt.as_json) {
        json j;
        j["sale_price"] = c;
        j["fmv_lower_bound"] = report.fmv_lower;
        j["avoidance_cap"] = report.avoidance_cap;
        if (report.arbitrage_profit) {
            j["arbitrage_profit"] = *report.arbitrage_profit;
            j["verdict"] = *report.arbitrage_profit > 0.0 ? "exploitable" : "honest";
        }
        out << j.dump() << "\n";
    } else {
        out << std::setprecision(10);
        out << "fmv lower bound:  " << report.fmv_lower << "\n";
        out << "avoidance cap:    " << report.avoidance_cap << "\n";
        if (report.arbitrage_profit)
            out << "arbitrage profit: " << *report.arbitrage_profit
                << (*report.arbitrage_profit > 0.0 ? "  (exploitable)" : "  (honest)") << "\n";
    }
    return kExitOk;
}

struct ReplayOptions {
    std::string log;
    std::string scenario;
    bool as_json = false;
};

int cmd_replay(const ReplayOptions& opt, std::ostream& out) {
    ScenarioConfig config = load_scenario(opt.scenario);
    std::string jsonl = read_file(opt.log);
    ReplayResult result = replay(jsonl, config);
    if (opt.as_json) {
        json j;
        j["ok"] = result.ok;
        if (!result.ok) {
            j["first_mismatch_seq"] = result.first_mismatch_seq;
            j["detail"] = result.detail;
        } else {
            j["summary"] = summary_to_json(result.summary);
        }
        out << j.dump() << "\n";
    } else if (result.ok) {
        out << "replay matches the log\n";
    } else {
        out << "replay mismatch at seq " << result.first_mismatch_seq << ": " << result.detail
            << "\n";
    }
    return result.ok ? kExitOk : kExitVerificationFailed;
}

struct BatchOptions {
    std::vector<std::string> scenarios;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool as_json = false;
};

std::string basename_of(const std::string& path) {
    auto slash = path.find_last_of('/');
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = name.find_last_of('.');
    return dot == std::string::npos ? name : name.substr(0, dot);
}

int cmd_batch(const BatchOptions& opt, std::ostream& out) {
    struct Item {
        std::string path;
        std::future<RunResult> future;
    };
    std::optional<std::uint64_t> seed = opt.seed;
    if (!seed)
        seed = env_seed();

    std::vector<ScenarioConfig> configs;
    for (const auto& path : opt.scenarios)
        configs.push_back(load_scenario(path)); // fail fast on any bad config

    std::vector<Item> items;
    for (size_t i = 0; i < configs.size(); ++i)
        items.push_back({opt.scenarios[i], std::async(std::launch::async,
                                                      [cfg = configs[i], seed] {
                                                          return run(cfg, seed);
                                                      })});

    json lines = json::array();
    for (auto& item : items) {
        RunResult result = item.future.get();
        if (!opt.out_dir.empty()) {
            std::string stem = opt.out_dir + "/" + basename_of(item.path);
            write_file(stem + ".jsonl", to_jsonl(result.log));
            write_file(stem + ".summary.json", summary_to_json(result.summary).dump(2) + "\n");
        }
        if (opt.as_json) {
            json j;
            j["scenario"] = item.path;
            j["summary"] = summary_to_json(result.summary);
            lines.push_back(j);
        } else {
            out << item.path << ": owner " << result.summary.final_owner << ", royalties "
                << result.summary.creator_royalties.str() << ", events "
                << result.summary.applied << "\n";
        }
    }
    if (opt.as_json)
        out << lines.dump() << "\n";
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Deterministic simulator and analysis tool for an NFT royalty mechanism"};
    app.require_subcommand(1);

    RunOptions run_opt;
    std::uint64_t seed_raw = 0;
    auto* run_cmd = app.add_subcommand("run", "Execute a scenario and emit its event log");
    run_cmd->add_option("--scenario", run_opt.scenario, "Scenario JSON file")->required();
    auto* seed_opt = run_cmd->add_option("--seed", seed_raw, "Seed recorded in the summary");
    run_cmd->add_option("--out", run_opt.out_path, "Write the JSONL event log here");
    run_cmd->add_option("--summary", run_opt.summary_path, "Write the JSON summary here");
    run_cmd->add_option("--csv", run_opt.csv_path, "Write the CSV summary here");
    run_cmd->add_flag("--json", run_opt.as_json, "Machine-readable stdout");

    VerifyOptions verify_opt;
    auto* verify_cmd =
        app.add_subcommand("verify-eq", "Check disclosures against the brute-force oracle");
    verify_cmd->add_option("--scenario", verify_opt.scenario, "Scenario JSON file")->required();
    verify_cmd->add_option("--grid-steps", verify_opt.grid_steps, "Oracle grid resolution")
        ->check(CLI::Range(1000, 10000000));
    verify_cmd->add_flag("--allow-mixed", verify_opt.allow_mixed,
                         "Permit non-best-response strategies");
    verify_cmd->add_flag("--json", verify_opt.as_json, "Machine-readable stdout");

    CollusionOptions coll_opt;
    auto* coll_cmd = app.add_subcommand("collusion", "Evaluate collusion feasibility and limits");
    coll_cmd->add_option("--fee", coll_opt.fee, "Avoided fee (currency)")->required();
    coll_cmd->add_option("--hodl", coll_opt.hodl, "Owner's hodl valuation (currency)")->required();
    coll_cmd->add_option("--rate", coll_opt.rate, "Yearly rate R")->required();
    coll_cmd->add_option("--lockup", coll_opt.lockup, "Lockup T in years")->required();
    coll_cmd->add_option("--n", coll_opt.n, "Number of colluders")->required();
    coll_cmd->add_flag("--json", coll_opt.as_json, "Machine-readable stdout");

    BoundsOptions bounds_opt;
    double disclosed_raw = 0.0;
    auto* bounds_cmd =
        app.add_subcommand("bounds", "Report the fmv lower bound and avoidance cap");
    bounds_cmd->add_option("--price", bounds_opt.price, "Sale price c (currency)")->required();
    bounds_cmd->add_option("--fee-spec", bounds_opt.fee_spec, "Fee spec JSON")->required();
    bounds_cmd->add_option("--price-spec", bounds_opt.price_spec, "Price spec JSON");
    auto* disclosed_flag =
        bounds_cmd->add_option("--disclosed", disclosed_raw, "Disclosed x to test for arbitrage");
    bounds_cmd->add_flag("--json", bounds_opt.as_json, "Machine-readable stdout");

    ReplayOptions replay_opt;
    auto* replay_cmd = app.add_subcommand("replay", "Re-drive a log and compare byte for byte");
    replay_cmd->add_option("--log", replay_opt.log, "JSONL event log")->required();
    replay_cmd->add_option("--scenario", replay_opt.scenario, "Scenario JSON file")->required();
    replay_cmd->add_flag("--json", replay_opt.as_json, "Machine-readable stdout");

    BatchOptions batch_opt;
    std::uint64_t batch_seed_raw = 0;
    auto* batch_cmd = app.add_subcommand("batch", "Run several scenarios");
    batch_cmd->add_option("--scenario", batch_opt.scenarios, "Scenario JSON files")
        ->required()
        ->expected(-1);
    batch_cmd->add_option("--out-dir", batch_opt.out_dir, "Directory for logs and summaries");
    auto* batch_seed_opt =
        batch_cmd->add_option("--seed", batch_seed_raw, "Seed recorded in each summary");
    batch_cmd->add_flag("--json", batch_opt.as_json, "Machine-readable stdout");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*run_cmd) {
            if (*seed_opt)
                run_opt.seed = seed_raw;
            return cmd_run(run_opt, out);
        }
        if (*verify_cmd)
            return cmd_verify_eq(verify_opt, out);
        if (*coll_cmd)
            return cmd_collusion(coll_opt, out);
        if (*bounds_cmd) {
            if (*disclosed_flag)
                bounds_opt.disclosed = disclosed_raw;
            return cmd_bounds(bounds_opt, out);
        }
        if (*replay_cmd)
            return cmd_replay(replay_opt, out);
        if (*batch_cmd) {
            if (*batch_seed_opt)
                batch_opt.seed = batch_seed_raw;
            return cmd_batch(batch_opt, out);
        }
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return e.kind() == ErrKind::ReplayMismatch ? kExitVerificationFailed : kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

} // namespace royalty
