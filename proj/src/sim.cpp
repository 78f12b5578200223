#include "royalty/sim.hpp"

#include "royalty/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

namespace royalty {

namespace {

using nlohmann::json;

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

const json& require(const json& j, const char* key, const char* ctx) {
    auto it = j.find(key);
    if (it == j.end())
        throw Error(ErrKind::Parse, std::string(ctx) + " is missing required field '" + key + "'");
    return *it;
}

Money money_from_json(const json& j, const std::string& field) {
    if (j.is_string())
        return Money::parse(j.get<std::string>());
    if (j.is_number())
        return Money::from_value(j.get<double>());
    throw Error(ErrKind::Parse, "field '" + field + "' must be a decimal string or number");
}

FeeSpec fee_from_json(const json& j) {
    std::string kind = require(j, "kind", "fee spec").get<std::string>();
    if (kind == "linear")
        return FeeSpec::linear(require(j, "rho", "linear fee").get<double>());
    if (kind == "monotone-table") {
        std::vector<TablePoint> points;
        for (const auto& p : require(j, "points", "fee table"))
            points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        std::optional<double> declared;
        if (j.contains("lipschitz"))
            declared = j["lipschitz"].get<double>();
        return FeeSpec::table(std::move(points), declared);
    }
    throw Error(ErrKind::Parse, "unknown fee kind '" + kind + "'");
}

json fee_to_json(const FeeSpec& spec) {
    json j;
    if (spec.kind() == FeeKind::Linear) {
        j["kind"] = "linear";
        j["rho"] = spec.rho();
    } else {
        j["kind"] = "monotone-table";
        json pts = json::array();
        for (const auto& p : spec.points())
            pts.push_back({p.x, p.y});
        j["points"] = pts;
        j["lipschitz"] = spec.lipschitz();
    }
    return j;
}

PriceSpec price_from_json(const json& j) {
    std::string kind = require(j, "kind", "price spec").get<std::string>();
    if (kind == "identity")
        return PriceSpec::identity();
    if (kind == "linear")
        return PriceSpec::linear(require(j, "scale", "linear price").get<double>());
    if (kind == "monotone-table") {
        std::vector<TablePoint> points;
        for (const auto& p : require(j, "points", "price table"))
            points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        return PriceSpec::table(std::move(points));
    }
    throw Error(ErrKind::Parse, "unknown price kind '" + kind + "'");
}

json price_to_json(const PriceSpec& spec) {
    json j;
    switch (spec.kind()) {
    case PriceKind::Identity:
        j["kind"] = "identity";
        break;
    case PriceKind::Linear:
        j["kind"] = "linear";
        j["scale"] = spec.scale();
        break;
    case PriceKind::MonotoneTable: {
        j["kind"] = "monotone-table";
        json pts = json::array();
        for (const auto& p : spec.points())
            pts.push_back({p.x, p.y});
        j["points"] = pts;
        break;
    }
    }
    return j;
}

Strategy strategy_from_json(const json& j) {
    std::string kind = require(j, "kind", "strategy").get<std::string>();
    if (kind == "best-response")
        return Strategy::best_response();
    if (kind == "underreport")
        return Strategy::underreport(require(j, "factor", "underreport strategy").get<double>());
    if (kind == "overreport")
        return Strategy::overreport(require(j, "factor", "overreport strategy").get<double>());
    if (kind == "never-disclose")
        return Strategy::never_disclose();
    if (kind == "self-transferer")
        return Strategy::self_transferer();
    if (kind == "arbitrage-bot")
        return Strategy::arbitrage_bot(
            money_from_json(require(j, "floor", "arbitrage-bot strategy"), "floor"));
    throw Error(ErrKind::Parse, "unknown strategy kind '" + kind + "'");
}

json strategy_to_json(const Strategy& s) {
    json j;
    j["kind"] = to_string(s.kind);
    if (s.kind == StrategyKind::Underreport || s.kind == StrategyKind::Overreport)
        j["factor"] = s.factor;
    if (s.kind == StrategyKind::ArbitrageBot)
        j["floor"] = s.floor.str();
    return j;
}

const char* intent_kind_name(const IntentBody& body) {
    return std::visit(overloaded{
                          [](const TransferIntent&) { return "Transfer"; },
                          [](const DiscloseIntent&) { return "Disclose"; },
                          [](const DeclineIntent&) { return "Decline"; },
                          [](const TakeBackIntent&) { return "TakeBack"; },
                          [](const AutoBuyIntent&) { return "AutoBuy"; },
                      },
                      body);
}

IntentBody intent_from_json(const json& j, const std::string& kind, const char* ctx) {
    if (kind == "Transfer")
        return TransferIntent{require(j, "from", ctx).get<std::string>(),
                              require(j, "to", ctx).get<std::string>(),
                              money_from_json(require(j, "cost", ctx), "cost")};
    if (kind == "Disclose")
        return DiscloseIntent{require(j, "x", ctx).get<double>()};
    if (kind == "Decline")
        return DeclineIntent{};
    if (kind == "TakeBack")
        return TakeBackIntent{require(j, "claimant", ctx).get<std::string>()};
    if (kind == "AutoBuy")
        return AutoBuyIntent{require(j, "buyer", ctx).get<std::string>(),
                             money_from_json(require(j, "payment", ctx), "payment")};
    throw Error(ErrKind::Parse, std::string(ctx) + " has unknown intent kind '" + kind + "'");
}

void intent_fields_to_json(json& j, const IntentBody& body) {
    std::visit(overloaded{
                   [&](const TransferIntent& i) {
                       j["from"] = i.from;
                       j["to"] = i.to;
                       j["cost"] = i.cost.value();
                   },
                   [&](const DiscloseIntent& i) { j["x"] = i.x; },
                   [&](const DeclineIntent&) {},
                   [&](const TakeBackIntent& i) { j["claimant"] = i.claimant; },
                   [&](const AutoBuyIntent& i) {
                       j["buyer"] = i.buyer;
                       j["payment"] = i.payment.value();
                   },
               },
               body);
}

std::vector<PlayerSpec> player_specs(const ScenarioConfig& config) {
    std::vector<PlayerSpec> specs;
    specs.reserve(config.players.size());
    for (const auto& pc : config.players)
        specs.push_back(pc.spec);
    return specs;
}

const Event& apply_intent_to_ledger(Ledger& ledger, const IntentBody& body, Tick now) {
    return std::visit(
        overloaded{
            [&](const TransferIntent& i) -> const Event& {
                return ledger.transfer(i.from, i.to, i.cost, now);
            },
            [&](const DiscloseIntent& i) -> const Event& { return ledger.disclose(i.x, now); },
            [&](const DeclineIntent&) -> const Event& { return ledger.decline(now); },
            [&](const TakeBackIntent& i) -> const Event& {
                return ledger.take_back(i.claimant, now);
            },
            [&](const AutoBuyIntent& i) -> const Event& {
                return ledger.auto_buy(i.buyer, i.payment, now);
            },
        },
        body);
}

SimulationSummary make_summary(const Ledger& ledger, const std::vector<LogRecord>& log,
                               Tick horizon, std::uint64_t seed,
                               const std::map<PlayerId, Money>& initial) {
    SimulationSummary s;
    s.final_owner = ledger.token().owner;
    s.final_player = ledger.player_of(s.final_owner)->id;
    s.creator_royalties = ledger.token().creator_royalties;
    s.escrow_outstanding = ledger.escrow();
    s.horizon = horizon;
    s.seed = seed;
    for (const auto& [id, p] : ledger.players())
        s.balance_delta[id] = p.balance - initial.at(id);
    for (const auto& rec : log) {
        if (std::holds_alternative<Event>(rec.entry)) {
            ++s.applied;
            ++s.event_counts[to_string(kind_of(std::get<Event>(rec.entry).body))];
        } else {
            ++s.rejected;
        }
    }
    return s;
}

// Scenario engine. One instance per run; all state is private to the run.
class Engine {
public:
    Engine(const ScenarioConfig& config, std::uint64_t seed)
        : config_(config), seed_(seed),
          ledger_(player_specs(config), config.token.initial_owner, config.token.fee,
                  config.token.price, config.mechanism) {
        for (const auto& pc : config.players) {
            strategies_.emplace(pc.spec.id, pc.strategy);
            initial_.emplace(pc.spec.id, pc.spec.balance);
        }
        script_ = config.script;
        std::stable_sort(script_.begin(), script_.end(),
                         [](const ScriptIntent& a, const ScriptIntent& b) { return a.time < b.time; });
    }

    RunResult execute() {
        size_t next_script = 0;
        for (Tick t = 0; t < config_.horizon; ++t) {
            while (next_script < script_.size() && script_[next_script].time <= t) {
                apply_script(script_[next_script], t);
                ++next_script;
            }
            poll_first_move(t);
            poll_take_backs(t);
            poll_auto_buys(t);
            if (const Event* ev = ledger_.expire_turn(t))
                record(*ev);
            if (const Event* ev = ledger_.expire_listing(t))
                record(*ev);
        }
        RunResult result;
        result.summary = make_summary(ledger_, log_, config_.horizon, seed_, initial_);
        result.log = std::move(log_);
        return result;
    }

private:
    void record(const Event& ev) {
        log_.push_back({++seq_, ev.time, ev});
    }

    void apply_script(const ScriptIntent& intent, Tick now) {
        Address owner_before = ledger_.token().owner;
        try {
            record(apply_intent_to_ledger(ledger_, intent.body, now));
        } catch (const Error& e) {
            log_.push_back(
                {++seq_, now, Rejection{{now, intent.body}, e.kind(), owner_before}});
        }
    }

    // Owner's first move: resolve a pending turn; otherwise a self-transferer
    // shuffles the token to its next controlled address.
    void poll_first_move(Tick t) {
        const TokenState& tok = ledger_.token();
        const PlayerSpec& owner = *ledger_.player_of(tok.owner);
        const Strategy& strat = strategies_.at(owner.id);

        if (tok.first_move_deadline && t <= *tok.first_move_deadline) {
            if (auto x = pick_disclosure(strat, owner, tok)) {
                try {
                    record(ledger_.disclose(*x, t));
                    return;
                } catch (const Error&) {
                    // fee unaffordable or x outside a table's range
                }
            }
            record(ledger_.decline(t));
            return;
        }

        if (strat.kind == StrategyKind::SelfTransferer && !tok.first_move_deadline &&
            !tok.listing && owner.addresses.size() >= 2) {
            auto it = owner.addresses.find(tok.owner);
            ++it;
            if (it == owner.addresses.end())
                it = owner.addresses.begin();
            record(ledger_.transfer(tok.owner, *it, Money{}, t));
        }
    }

    std::optional<double> pick_disclosure(const Strategy& strat, const PlayerSpec& owner,
                                          const TokenState& tok) const {
        bool threatened = false;
        for (const auto& addr : tok.history)
            if (!owner.addresses.count(addr))
                threatened = true;
        if (!threatened)
            return std::nullopt; // every H member is the owner's own pseudonym

        try {
            switch (strat.kind) {
            case StrategyKind::BestResponse:
            case StrategyKind::ArbitrageBot:
                return best_response_disclosure(owner.fmv, ledger_.price());
            case StrategyKind::Underreport:
            case StrategyKind::Overreport:
                return strat.factor * ledger_.price().invert(owner.fmv.value());
            case StrategyKind::NeverDisclose:
            case StrategyKind::SelfTransferer:
                return std::nullopt;
            }
        } catch (const Error&) {
            return std::nullopt; // fmv outside the price image
        }
        return std::nullopt;
    }

    void poll_take_backs(Tick t) {
        const TokenState& tok = ledger_.token();
        if (tok.history.empty())
            return;
        const PlayerId owner_id = ledger_.player_of(tok.owner)->id;
        for (const auto& addr : tok.history) {
            const PlayerSpec* claimant = ledger_.player_of(addr);
            if (claimant->id == owner_id)
                continue;
            if (!should_take_back(*claimant, tok))
                continue;
            record(ledger_.take_back(addr, t));
            return; // the mechanism restarted; the new owner moves first
        }
    }

    void poll_auto_buys(Tick t) {
        const TokenState& tok = ledger_.token();
        if (!tok.listing || t >= tok.listing->expires_at)
            return;
        const PlayerId owner_id = ledger_.player_of(tok.owner)->id;
        const Money list_price = tok.listing->price;
        for (const auto& [id, p] : ledger_.players()) {
            if (id == owner_id)
                continue;
            const Strategy& strat = strategies_.at(id);
            bool wants = false;
            switch (strat.kind) {
            case StrategyKind::ArbitrageBot:
                wants = list_price < strat.floor;
                break;
            case StrategyKind::NeverDisclose:
            case StrategyKind::SelfTransferer:
                break;
            default:
                wants = should_auto_buy(p, list_price);
                break;
            }
            if (!wants || p.balance < list_price)
                continue;
            record(ledger_.auto_buy(*p.addresses.begin(), list_price, t));
            return;
        }
    }

    ScenarioConfig config_;
    std::uint64_t seed_;
    Ledger ledger_;
    std::vector<ScriptIntent> script_;
    std::map<PlayerId, Strategy> strategies_;
    std::map<PlayerId, Money> initial_;
    std::vector<LogRecord> log_;
    std::int64_t seq_ = 0;
};

} // namespace

FeeSpec fee_spec_from_json(const json& j) {
    return fee_from_json(j);
}

PriceSpec price_spec_from_json(const json& j) {
    return price_from_json(j);
}

ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig config;

    const json& players = require(j, "players", "scenario");
    if (!players.is_array() || players.empty())
        throw Error(ErrKind::Parse, "scenario needs a non-empty 'players' array");
    std::set<Address> seen;
    for (const auto& pj : players) {
        PlayerConfig pc;
        pc.spec.id = require(pj, "id", "player").get<std::string>();
        for (const auto& aj : require(pj, "addresses", "player"))
            pc.spec.addresses.insert(aj.get<std::string>());
        if (pc.spec.addresses.empty())
            throw Error(ErrKind::Config, "player '" + pc.spec.id + "' has no addresses");
        for (const auto& a : pc.spec.addresses)
            if (!seen.insert(a).second)
                throw Error(ErrKind::Config,
                            "disjoint address sets violated: '" + a + "' is shared");
        pc.spec.fmv = money_from_json(require(pj, "fmv", "player"), "fmv");
        pc.spec.hodl = money_from_json(require(pj, "hodl", "player"), "hodl");
        pc.spec.balance = money_from_json(require(pj, "balance", "player"), "balance");
        if (pc.spec.fmv < Money{} || pc.spec.hodl < Money{})
            throw Error(ErrKind::Config, "player '" + pc.spec.id + "' has negative valuation");
        if (pj.contains("strategy"))
            pc.strategy = strategy_from_json(pj["strategy"]);
        config.players.push_back(std::move(pc));
    }

    const json& tj = require(j, "token", "scenario");
    config.token.creator = tj.value("creator", std::string("creator"));
    config.token.initial_owner = require(tj, "initial_owner", "token").get<std::string>();
    config.token.fee = fee_from_json(require(tj, "fee", "token"));
    config.token.price = price_from_json(require(tj, "price", "token"));
    if (!seen.count(config.token.initial_owner))
        throw Error(ErrKind::Config, "initial owner '" + config.token.initial_owner +
                                         "' does not belong to any player");

    if (j.contains("mechanism")) {
        const json& mj = j["mechanism"];
        config.mechanism.d_turn = mj.value("d_turn", config.mechanism.d_turn);
        config.mechanism.w_window = mj.value("w_window", config.mechanism.w_window);
    }
    if (config.mechanism.d_turn < 1 || config.mechanism.w_window < 1)
        throw Error(ErrKind::Config, "d_turn and w_window must be at least one tick");

    if (j.contains("script")) {
        for (const auto& sj : j["script"]) {
            ScriptIntent intent;
            intent.time = require(sj, "time", "script entry").get<Tick>();
            std::string kind = require(sj, "kind", "script entry").get<std::string>();
            intent.body = intent_from_json(sj, kind, "script entry");
            config.script.push_back(std::move(intent));
        }
    }

    config.horizon = require(j, "horizon", "scenario").get<Tick>();
    if (config.horizon <= 0)
        throw Error(ErrKind::Config, "horizon must be positive");
    for (const auto& intent : config.script)
        if (intent.time < 0 || intent.time >= config.horizon)
            throw Error(ErrKind::Config, "script entry at tick " + std::to_string(intent.time) +
                                             " falls outside [0, horizon)");
    config.seed = j.value("seed", std::uint64_t{0});
    return config;
}

json scenario_to_json(const ScenarioConfig& config) {
    json j;
    json players = json::array();
    for (const auto& pc : config.players) {
        json pj;
        pj["id"] = pc.spec.id;
        pj["addresses"] = pc.spec.addresses;
        pj["fmv"] = pc.spec.fmv.str();
        pj["hodl"] = pc.spec.hodl.str();
        pj["balance"] = pc.spec.balance.str();
        pj["strategy"] = strategy_to_json(pc.strategy);
        players.push_back(pj);
    }
    j["players"] = players;
    j["token"] = {{"creator", config.token.creator},
                  {"initial_owner", config.token.initial_owner},
                  {"fee", fee_to_json(config.token.fee)},
                  {"price", price_to_json(config.token.price)}};
    j["mechanism"] = {{"d_turn", config.mechanism.d_turn},
                      {"w_window", config.mechanism.w_window}};
    if (!config.script.empty()) {
        json script = json::array();
        for (const auto& intent : config.script) {
            json sj;
            sj["time"] = intent.time;
            sj["kind"] = intent_kind_name(intent.body);
            intent_fields_to_json(sj, intent.body);
            script.push_back(sj);
        }
        j["script"] = script;
    }
    j["horizon"] = config.horizon;
    j["seed"] = config.seed;
    return j;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrKind::Parse, "cannot open scenario file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrKind::Parse, "scenario '" + path + "': " + e.what());
    }
    return scenario_from_json(j);
}

json record_to_json(const LogRecord& record) {
    json j;
    j["seq"] = record.seq;
    j["time"] = record.time;

    if (const Event* ev = std::get_if<Event>(&record.entry)) {
        j["kind"] = to_string(kind_of(ev->body));
        json deltas = json::object();
        for (const auto& [addr, d] : ev->deltas)
            deltas[addr] = d.value();
        j["deltas"] = deltas;
        std::visit(overloaded{
                       [&](const TransferEv& e) {
                           j["from"] = e.from;
                           j["to"] = e.to;
                           j["cost"] = e.cost.value();
                           j["deadline"] = e.deadline;
                           if (!e.forfeited.is_zero())
                               j["royalty"] = e.forfeited.value();
                       },
                       [&](const DiscloseEv& e) {
                           j["owner"] = e.owner;
                           j["x"] = e.x;
                           j["fee"] = e.fee.value();
                           j["price"] = e.price.value();
                           j["expires"] = e.expires;
                       },
                       [&](const DeclineEv& e) { j["owner"] = e.owner; },
                       [&](const TakeBackEv& e) {
                           j["claimant"] = e.claimant;
                           j["from"] = e.from;
                           j["deadline"] = e.deadline;
                       },
                       [&](const AutoBuyEv& e) {
                           j["buyer"] = e.buyer;
                           j["seller"] = e.seller;
                           j["payment"] = e.payment.value();
                           j["refund"] = e.refund.value();
                           j["deadline"] = e.deadline;
                       },
                       [&](const AutoSaleExpiredEv& e) { j["royalty"] = e.royalty.value(); },
                       [&](const TurnExpiredEv& e) { j["owner"] = e.owner; },
                   },
                   ev->body);
        return j;
    }

    const Rejection& rej = std::get<Rejection>(record.entry);
    j["kind"] = intent_kind_name(rej.intent.body);
    j["error"] = to_string(rej.error);
    intent_fields_to_json(j, rej.intent.body);
    if (std::holds_alternative<DiscloseIntent>(rej.intent.body) ||
        std::holds_alternative<DeclineIntent>(rej.intent.body))
        j["owner"] = rej.owner_at_rejection;
    return j;
}

std::string to_jsonl(const std::vector<LogRecord>& log) {
    std::string out;
    for (const auto& rec : log) {
        out += record_to_json(rec).dump();
        out += '\n';
    }
    return out;
}

std::vector<json> parse_jsonl(const std::string& text) {
    std::vector<json> lines;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        try {
            lines.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw Error(ErrKind::Parse,
                        "log line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return lines;
}

json summary_to_json(const SimulationSummary& summary) {
    json j;
    j["final_owner"] = summary.final_owner;
    j["final_player"] = summary.final_player;
    j["creator_royalties"] = summary.creator_royalties.value();
    j["escrow_outstanding"] = summary.escrow_outstanding.value();
    json deltas = json::object();
    for (const auto& [id, d] : summary.balance_delta)
        deltas[id] = d.value();
    j["balance_delta"] = deltas;
    j["event_counts"] = summary.event_counts;
    j["applied"] = summary.applied;
    j["rejected"] = summary.rejected;
    j["horizon"] = summary.horizon;
    j["seed"] = summary.seed;
    return j;
}

std::string summary_to_csv(const SimulationSummary& summary) {
    std::string out = "metric,value\n";
    out += "final_owner," + summary.final_owner + "\n";
    out += "final_player," + summary.final_player + "\n";
    out += "creator_royalties," + summary.creator_royalties.str() + "\n";
    out += "escrow_outstanding," + summary.escrow_outstanding.str() + "\n";
    for (const auto& [id, d] : summary.balance_delta)
        out += "balance_delta." + id + "," + d.str() + "\n";
    for (const auto& [kind, n] : summary.event_counts)
        out += "events." + kind + "," + std::to_string(n) + "\n";
    out += "applied," + std::to_string(summary.applied) + "\n";
    out += "rejected," + std::to_string(summary.rejected) + "\n";
    out += "horizon," + std::to_string(summary.horizon) + "\n";
    out += "seed," + std::to_string(summary.seed) + "\n";
    return out;
}

RunResult run(const ScenarioConfig& config, std::optional<std::uint64_t> seed_override) {
    Engine engine(config, seed_override.value_or(config.seed));
    return engine.execute();
}

DeviationReport verify_equilibrium(const ScenarioConfig& config, int grid_steps,
                                   bool allow_mixed) {
    if (!allow_mixed)
        for (const auto& pc : config.players)
            if (pc.strategy.kind != StrategyKind::BestResponse)
                throw Error(ErrKind::Config, "player '" + pc.spec.id +
                                                 "' is not best-response; pass allow_mixed to "
                                                 "verify anyway");

    RunResult result = run(config);
    std::map<Address, PlayerId> by_address;
    std::map<PlayerId, const PlayerSpec*> specs;
    for (const auto& pc : config.players) {
        specs[pc.spec.id] = &pc.spec;
        for (const auto& a : pc.spec.addresses)
            by_address[a] = pc.spec.id;
    }

    const FeeSpec& fee = config.token.fee;
    const PriceSpec& price = config.token.price;
    DeviationReport report;
    for (const auto& rec : result.log) {
        const Event* ev = std::get_if<Event>(&rec.entry);
        if (!ev)
            continue;
        const DiscloseEv* d = std::get_if<DiscloseEv>(&ev->body);
        if (!d)
            continue;
        const PlayerSpec& discloser = *specs.at(by_address.at(d->owner));

        double xp = price.invert(discloser.fmv.value());
        double lo = std::max(xp - 25.0, xp * 0.01);
        double hi = xp + 25.0;
        if (price.kind() == PriceKind::MonotoneTable) {
            auto [dlo, dhi] = price.domain();
            lo = std::max(lo, dlo);
            hi = std::min(hi, dhi);
            if (!(lo < xp && xp < hi))
                throw Error(ErrKind::Config,
                            "fmv of '" + discloser.id + "' sits on the price table edge");
        }
        GridResult oracle = brute_force_best_x(discloser.fmv, discloser.hodl, fee, price,
                                               Money{}, lo, hi, grid_steps);
        double step = (hi - lo) / (grid_steps - 1);
        // Disclosures are quantised to minor units, so allow that on top of
        // the one-grid-step tolerance.
        double tol = step + 0.5 / kMoneyScale + 1e-12;
        if (std::fabs(d->x - oracle.x) > tol)
            report.entries.push_back({rec.seq, discloser.id, d->x, oracle.x, step});
    }
    return report;
}

json deviations_to_json(const DeviationReport& report) {
    json arr = json::array();
    for (const auto& d : report.entries) {
        json j;
        j["seq"] = d.seq;
        j["player"] = d.player;
        j["disclosed_x"] = d.disclosed_x;
        j["oracle_x"] = d.oracle_x;
        j["grid_step"] = d.grid_step;
        arr.push_back(j);
    }
    return arr;
}

ReplayResult replay(const std::string& jsonl, const ScenarioConfig& config) {
    std::vector<json> lines = parse_jsonl(jsonl);
    Ledger ledger(player_specs(config), config.token.initial_owner, config.token.fee,
                  config.token.price, config.mechanism);
    std::map<PlayerId, Money> initial;
    for (const auto& pc : config.players)
        initial.emplace(pc.spec.id, pc.spec.balance);

    std::vector<LogRecord> out;
    std::int64_t seq = 0;
    for (const json& jl : lines) {
        ++seq;
        ReplayResult mismatch;
        mismatch.ok = false;
        mismatch.first_mismatch_seq = jl.value("seq", seq);

        Tick t = require(jl, "time", "log line").get<Tick>();
        std::string kind = require(jl, "kind", "log line").get<std::string>();
        bool logged_rejected = jl.contains("error");

        LogRecord rec;
        rec.seq = seq;
        rec.time = t;

        if (kind == "AutoSaleExpired" || kind == "TurnExpired") {
            if (logged_rejected) {
                mismatch.detail = "automatic events cannot be rejected";
                return mismatch;
            }
            const Event* ev =
                kind == "AutoSaleExpired" ? ledger.expire_listing(t) : ledger.expire_turn(t);
            if (!ev) {
                mismatch.detail = "nothing to expire at seq " +
                                  std::to_string(mismatch.first_mismatch_seq);
                return mismatch;
            }
            rec.entry = *ev;
        } else {
            ScriptIntent intent{t, intent_from_json(jl, kind, "log line")};
            Address owner_before = ledger.token().owner;
            if (logged_rejected) {
                try {
                    apply_intent_to_ledger(ledger, intent.body, t);
                    mismatch.detail = "move applied on replay but the log says rejected";
                    return mismatch;
                } catch (const Error& e) {
                    rec.entry = Rejection{intent, e.kind(), owner_before};
                }
            } else {
                try {
                    rec.entry = apply_intent_to_ledger(ledger, intent.body, t);
                } catch (const Error& e) {
                    mismatch.detail =
                        std::string("move rejected on replay but the log says applied: ") +
                        e.what();
                    return mismatch;
                }
            }
        }

        std::string regenerated = record_to_json(rec).dump();
        if (regenerated != jl.dump()) {
            mismatch.detail = "regenerated record differs: " + regenerated;
            return mismatch;
        }
        out.push_back(std::move(rec));
    }

    ReplayResult ok;
    ok.summary = make_summary(ledger, out, config.horizon, config.seed, initial);
    return ok;
}

} // namespace royalty
