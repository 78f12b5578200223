#include "royalty/error.hpp"
#include "royalty/sim.hpp"

#include <doctest.h>

#include "scenario_gen.hpp"

#include <algorithm>
#include <random>

using namespace royalty;
using namespace royalty::testgen;
using nlohmann::json;

namespace {

Money money(const char* s) { return Money::parse(s); }

// A sells to B for 100 at t=0; B's strategy is the knob. A's own estimate
// must stay below any listing B produces, or A rationally auto-buys it.
ScenarioConfig two_player_sale(Strategy b_strategy, double b_fmv = 100.0, double b_hodl = 120.0,
                               double a_fmv = 90.0) {
    ScenarioConfig config;
    config.players.push_back(
        make_player("A", {"a1", "a2"}, a_fmv, 50.0, 1000.0, Strategy::best_response()));
    config.players.push_back(make_player("B", {"b1"}, b_fmv, b_hodl, 1000.0, b_strategy));
    config.token.creator = "artist";
    config.token.initial_owner = "a1";
    config.token.fee = FeeSpec::linear(0.05);
    config.token.price = PriceSpec::identity();
    config.mechanism = {5, 20};
    config.script.push_back({0, TransferIntent{"a1", "b1", money("100")}});
    config.horizon = 40;
    return config;
}

int count_kind(const std::vector<LogRecord>& log, EventKind kind) {
    int n = 0;
    for (const auto& rec : log)
        if (const Event* ev = std::get_if<Event>(&rec.entry))
            if (kind_of(ev->body) == kind)
                ++n;
    return n;
}

// Player balance changes must net out to whatever left the circuit: the
// creator's royalties plus any escrow still open at the horizon.
void check_summary_conservation(const SimulationSummary& summary) {
    Money sum;
    for (const auto& [id, d] : summary.balance_delta)
        sum += d;
    CHECK(sum == -(summary.creator_royalties + summary.escrow_outstanding));
}

// Re-drives the logged events through a shadow ledger and checks that at
// every quiescent point (no pending turn) each H member belongs to the
// owning player.
void check_quiescent_h_ownership(const ScenarioConfig& config,
                                 const std::vector<LogRecord>& log) {
    std::vector<PlayerSpec> specs;
    for (const auto& pc : config.players)
        specs.push_back(pc.spec);
    Ledger shadow(specs, config.token.initial_owner, config.token.fee, config.token.price,
                  config.mechanism);
    for (const auto& rec : log) {
        const Event* ev = std::get_if<Event>(&rec.entry);
        REQUIRE(ev);
        Tick t = rec.time;
        std::visit(
            [&](const auto& body) {
                using T = std::decay_t<decltype(body)>;
                if constexpr (std::is_same_v<T, TransferEv>)
                    shadow.transfer(body.from, body.to, body.cost, t);
                else if constexpr (std::is_same_v<T, DiscloseEv>)
                    shadow.disclose(body.x, t);
                else if constexpr (std::is_same_v<T, DeclineEv>)
                    shadow.decline(t);
                else if constexpr (std::is_same_v<T, TakeBackEv>)
                    shadow.take_back(body.claimant, t);
                else if constexpr (std::is_same_v<T, AutoBuyEv>)
                    shadow.auto_buy(body.buyer, body.payment, t);
                else if constexpr (std::is_same_v<T, AutoSaleExpiredEv>)
                    shadow.expire_listing(t);
                else
                    shadow.expire_turn(t);
            },
            ev->body);
        if (!shadow.token().first_move_deadline) {
            const PlayerSpec* owner = shadow.player_of(shadow.token().owner);
            for (const auto& addr : shadow.token().history)
                CHECK(owner->addresses.count(addr));
        }
    }
}

} // namespace

TEST_CASE("canonical sale: truthful disclosure, no take-back, royalty settles") {
    RunResult result = run(two_player_sale(Strategy::best_response()));

    REQUIRE(count_kind(result.log, EventKind::Disclose) == 1);
    const Event* disclose = nullptr;
    for (const auto& rec : result.log)
        if (const Event* ev = std::get_if<Event>(&rec.entry))
            if (kind_of(ev->body) == EventKind::Disclose)
                disclose = ev;
    const auto& d = std::get<DiscloseEv>(disclose->body);
    CHECK(d.x == doctest::Approx(100.0)); // pi^{-1}(m_B)
    CHECK(d.fee == money("5"));

    CHECK(count_kind(result.log, EventKind::TakeBack) == 0);
    CHECK(count_kind(result.log, EventKind::AutoSaleExpired) == 1);
    CHECK(result.summary.creator_royalties == money("5"));
    CHECK(result.summary.final_player == "B");
    CHECK(result.summary.rejected == 0);

    // keep-dominant buyer: realized utility is v - phi(x_P) - c, i.e. the
    // hodl value less exactly the fee and the price paid
    CHECK(result.summary.balance_delta.at("B") == money("-105"));
    double realized_keep = 120.0 + result.summary.balance_delta.at("B").value();
    CHECK(realized_keep == doctest::Approx(120.0 - 5.0 - 100.0));
}

TEST_CASE("self-transfers disclose nothing and pay nothing") {
    // scripted hop between one player's own addresses
    ScenarioConfig scripted = two_player_sale(Strategy::best_response());
    scripted.script = {{0, TransferIntent{"a1", "a2", Money{}}}};
    RunResult result = run(scripted);
    CHECK(count_kind(result.log, EventKind::Disclose) == 0);
    CHECK(count_kind(result.log, EventKind::TakeBack) == 0);
    CHECK(count_kind(result.log, EventKind::Decline) == 1);
    CHECK(result.summary.creator_royalties == Money{});

    // an autonomous self-transferer shuffles forever at zero cost
    ScenarioConfig shuffling;
    shuffling.players.push_back(
        make_player("S", {"s1", "s2", "s3"}, 100.0, 200.0, 1000.0, Strategy::self_transferer()));
    shuffling.players.push_back(
        make_player("B", {"b1"}, 500.0, 0.0, 1000.0, Strategy::best_response()));
    shuffling.token.creator = "artist";
    shuffling.token.initial_owner = "s1";
    shuffling.token.fee = FeeSpec::linear(0.05);
    shuffling.token.price = PriceSpec::identity();
    shuffling.mechanism = {5, 20};
    shuffling.horizon = 60;
    RunResult shuffled = run(shuffling);
    CHECK(count_kind(shuffled.log, EventKind::Transfer) > 5);
    CHECK(count_kind(shuffled.log, EventKind::Disclose) == 0);
    CHECK(count_kind(shuffled.log, EventKind::TakeBack) == 0);
    CHECK(shuffled.summary.creator_royalties == Money{});
    CHECK(shuffled.summary.final_player == "S");
    for (const auto& [id, delta] : shuffled.summary.balance_delta)
        CHECK(delta == Money{});
}

TEST_CASE("a buyer that never pays loses the token and its money") {
    RunResult result = run(two_player_sale(Strategy::never_disclose()));
    CHECK(count_kind(result.log, EventKind::TakeBack) == 1);
    CHECK(result.summary.final_player == "A");
    CHECK(result.summary.balance_delta.at("B") == money("-100")); // c is not refunded

    // the take-back itself moved no funds: the claimant's utility change is
    // the regained token, worth max(m_A, v_A) = 90, at zero balance cost
    for (const auto& rec : result.log)
        if (const Event* ev = std::get_if<Event>(&rec.entry))
            if (kind_of(ev->body) == EventKind::TakeBack)
                CHECK(ev->deltas.empty());
    check_summary_conservation(result.summary);

    // A then protects the reclaimed token with its own honest disclosure
    CHECK(count_kind(result.log, EventKind::Disclose) == 1);
    CHECK(result.summary.creator_royalties == money("4.50")); // 0.05 * pi^{-1}(90)
}

TEST_CASE("identical configs replay bytewise and differing ones diverge") {
    ScenarioConfig config = two_player_sale(Strategy::best_response());
    RunResult a = run(config);
    RunResult b = run(config);
    std::string log_a = to_jsonl(a.log);
    CHECK(log_a == to_jsonl(b.log));

    ReplayResult ok = replay(log_a, config);
    CHECK(ok.ok);
    CHECK(summary_to_json(ok.summary).dump() == summary_to_json(a.summary).dump());

    // tamper with one amount
    auto lines = parse_jsonl(log_a);
    std::string tampered;
    for (auto& jl : lines) {
        if (jl["kind"] == "Disclose")
            jl["fee"] = 4.0;
        tampered += jl.dump() + "\n";
    }
    ReplayResult bad = replay(tampered, config);
    CHECK(!bad.ok);
    CHECK(bad.first_mismatch_seq == 2);

    // a different auto-sale window shifts the disclosure's expiry
    ScenarioConfig other = config;
    other.mechanism.w_window = 21;
    ReplayResult drift = replay(log_a, other);
    CHECK(!drift.ok);
    CHECK(drift.first_mismatch_seq == 2);
}

TEST_CASE("log records carry a stable field set per kind") {
    RunResult result = run(two_player_sale(Strategy::best_response()));
    auto lines = parse_jsonl(to_jsonl(result.log));
    auto keys = [](const json& j) {
        std::vector<std::string> out;
        for (auto it = j.begin(); it != j.end(); ++it)
            out.push_back(it.key());
        return out;
    };
    for (const auto& jl : lines) {
        std::string kind = jl["kind"];
        if (kind == "Transfer")
            CHECK(keys(jl) == std::vector<std::string>{"cost", "deadline", "deltas", "from",
                                                       "kind", "seq", "time", "to"});
        else if (kind == "Disclose")
            CHECK(keys(jl) == std::vector<std::string>{"deltas", "expires", "fee", "kind",
                                                       "owner", "price", "seq", "time", "x"});
        else if (kind == "AutoSaleExpired")
            CHECK(keys(jl) ==
                  std::vector<std::string>{"deltas", "kind", "royalty", "seq", "time"});
    }
}

TEST_CASE("scripted illegal moves are logged as rejections, not crashes") {
    ScenarioConfig config = two_player_sale(Strategy::best_response());
    config.script.push_back({1, TakeBackIntent{"a2"}});              // a2 never owned it
    config.script.push_back({2, TransferIntent{"a1", "b1", money("1")}}); // a1 no longer owner
    config.script.push_back({3, AutoBuyIntent{"a1", money("55")}});  // wrong price
    RunResult result = run(config);
    CHECK(result.summary.rejected == 3);

    int seen = 0;
    for (const auto& rec : result.log) {
        if (const Rejection* rej = std::get_if<Rejection>(&rec.entry)) {
            ++seen;
            if (std::holds_alternative<TakeBackIntent>(rej->intent.body))
                CHECK(rej->error == ErrKind::NotEntitled);
            if (std::holds_alternative<TransferIntent>(rej->intent.body))
                CHECK(rej->error == ErrKind::NotOwner);
            if (std::holds_alternative<AutoBuyIntent>(rej->intent.body))
                CHECK(rej->error == ErrKind::PriceMismatch);
        }
    }
    CHECK(seen == 3);

    // rejected records replay cleanly too
    ReplayResult rep = replay(to_jsonl(result.log), config);
    CHECK(rep.ok);
}

TEST_CASE("equilibrium verification accepts honest runs and flags deviators") {
    ScenarioConfig honest = two_player_sale(Strategy::best_response());
    CHECK(verify_equilibrium(honest).empty());

    ScenarioConfig deviant = two_player_sale(Strategy::underreport(0.5), 100.0, 120.0, 40.0);
    CHECK_THROWS_AS(verify_equilibrium(deviant), Error); // guard without allow_mixed
    DeviationReport report = verify_equilibrium(deviant, 10000, true);
    REQUIRE(report.entries.size() == 1);
    CHECK(report.entries[0].player == "B");
    CHECK(report.entries[0].disclosed_x == doctest::Approx(50.0));
    CHECK(report.entries[0].oracle_x == doctest::Approx(100.0).epsilon(0.001));

    // keep-dominant valuations still disclose pi^{-1}(m), not pi^{-1}(v)
    ScenarioConfig keeper = two_player_sale(Strategy::best_response(), 100.0, 900.0);
    CHECK(verify_equilibrium(keeper).empty());

    ScenarioConfig over = two_player_sale(Strategy::overreport(1.4));
    CHECK(verify_equilibrium(over, 10000, true).entries.size() == 1);
}

TEST_CASE("sale cascades stay in equilibrium: pay iff the player changed") {
    std::mt19937_64 rng(42);
    int cascades_seen = 0;
    for (int trial = 0; trial < 25; ++trial) {
        ScenarioConfig config = sale_cascade_scenario(rng, true);
        RunResult result = run(config);
        CHECK(result.summary.rejected == 0);
        CHECK(count_kind(result.log, EventKind::TakeBack) == 0);
        CHECK(verify_equilibrium(config).empty());
        cascades_seen += count_kind(result.log, EventKind::AutoBuy);

        std::map<Address, PlayerId> owner_of;
        for (const auto& pc : config.players)
            for (const auto& a : pc.spec.addresses)
                owner_of[a] = pc.spec.id;

        // walk the tenures: a fee-paying disclosure must follow a transfer
        // or purchase exactly when the owning player changed
        PlayerId holder = owner_of.at(config.token.initial_owner);
        std::optional<bool> changed;
        int fees_seen = 0, changes_seen = 0;
        for (const auto& rec : result.log) {
            const Event* ev = std::get_if<Event>(&rec.entry);
            REQUIRE(ev);
            if (const TransferEv* tr = std::get_if<TransferEv>(&ev->body)) {
                PlayerId next = owner_of.at(tr->to);
                changed = next != holder;
                if (*changed)
                    ++changes_seen;
                holder = next;
            } else if (const AutoBuyEv* ab = std::get_if<AutoBuyEv>(&ev->body)) {
                PlayerId next = owner_of.at(ab->buyer);
                CHECK(next != holder); // agents never buy their own listing
                changed = true;
                ++changes_seen;
                holder = next;
            } else if (std::get_if<DiscloseEv>(&ev->body)) {
                REQUIRE(changed.has_value());
                CHECK(*changed); // fee paid => the player changed
                ++fees_seen;
                changed.reset();
            } else if (std::get_if<DeclineEv>(&ev->body)) {
                if (changed.has_value())
                    CHECK(!*changed); // declined => it was a self-transfer
                changed.reset();
            }
        }
        CHECK(fees_seen == changes_seen); // the player changed => a fee was paid

        check_summary_conservation(result.summary);
        check_quiescent_h_ownership(config, result.log);

        ReplayResult rep = replay(to_jsonl(result.log), config);
        REQUIRE(rep.ok);
    }
    CHECK(cascades_seen > 5); // the walk must actually exercise auto-buys
}

TEST_CASE("never-disclose buyers always lose the token") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        ScenarioConfig config = never_disclose_scenario(rng);
        RunResult result = run(config);
        CHECK(count_kind(result.log, EventKind::TakeBack) >= 1);
        CHECK(result.summary.final_player == "S");
    }
}

TEST_CASE("underreporting into an arbitrage bot forfeits the token") {
    ScenarioConfig config;
    double c = 100.0;
    double floor = c - 0.05 * c; // c - phi(pi^{-1}(c)) for the identity price
    config.players.push_back(
        make_player("O", {"o1"}, c, 0.0, 10000.0, Strategy::arbitrage_bot(money("95"))));
    config.players.push_back(
        make_player("U", {"u1"}, c, 200.0, 10000.0, Strategy::underreport(0.5)));
    config.token.creator = "artist";
    config.token.initial_owner = "o1";
    config.token.fee = FeeSpec::linear(0.05);
    config.token.price = PriceSpec::identity();
    config.mechanism = {5, 20};
    config.script.push_back({0, TransferIntent{"o1", "u1", Money::from_value(c)}});
    config.horizon = 60;
    CHECK(floor == doctest::Approx(95.0));

    RunResult result = run(config);
    CHECK(count_kind(result.log, EventKind::AutoBuy) == 1);
    CHECK(result.summary.final_player == "O");
    // bot: +100 (sale) - 50 (buy-back at the underreported price) - 5 (honest re-protection)
    CHECK(result.summary.balance_delta.at("O") == money("45"));
    CHECK(result.summary.balance_delta.at("O") > Money{});
    // the creator still collects the full honest fee
    CHECK(result.summary.creator_royalties == money("5"));

    // a mild underreport above the floor survives, and the shortfall stays
    // under the quadratic cap
    ScenarioConfig mild = config;
    mild.players[1].strategy = Strategy::underreport(0.97);
    RunResult mild_result = run(mild);
    CHECK(count_kind(mild_result.log, EventKind::AutoBuy) == 0);
    CHECK(mild_result.summary.final_player == "U");
    double shortfall = 5.0 - mild_result.summary.creator_royalties.value();
    CHECK(shortfall >= 0.0);
    CHECK(shortfall <= 0.05 * 0.05 * c + 0.01);
}

TEST_CASE("scenario json round trip and validation") {
    ScenarioConfig config = two_player_sale(Strategy::underreport(0.5));
    json j = scenario_to_json(config);
    ScenarioConfig back = scenario_from_json(j);
    CHECK(scenario_to_json(back).dump() == j.dump());
    CHECK(to_jsonl(run(back).log) == to_jsonl(run(config).log));

    json shared = j;
    shared["players"][1]["addresses"] = {"a1"}; // collides with player A
    CHECK_THROWS_WITH_AS(scenario_from_json(shared), doctest::Contains("disjoint address sets"),
                         Error);

    json no_fee = j;
    no_fee["token"].erase("fee");
    CHECK_THROWS_AS(scenario_from_json(no_fee), Error);

    json bad_horizon = j;
    bad_horizon["horizon"] = 0;
    CHECK_THROWS_AS(scenario_from_json(bad_horizon), Error);

    json stranger = j;
    stranger["token"]["initial_owner"] = "nobody";
    CHECK_THROWS_AS(scenario_from_json(stranger), Error);

    json late_script = j;
    late_script["script"][0]["time"] = 99999;
    CHECK_THROWS_AS(scenario_from_json(late_script), Error);
}

TEST_CASE("table schedules run through the whole pipeline") {
    ScenarioConfig config;
    config.players.push_back(
        make_player("A", {"a1"}, 20.0, 10.0, 1000.0, Strategy::best_response()));
    config.players.push_back(
        make_player("B", {"b1"}, 80.0, 120.0, 1000.0, Strategy::best_response()));
    config.token.creator = "artist";
    config.token.initial_owner = "a1";
    config.token.fee = FeeSpec::table({{1.0, 0.2}, {10.0, 2.0}, {40.0, 8.0}});
    config.token.price = PriceSpec::table({{1.0, 4.0}, {10.0, 90.0}, {40.0, 220.0}});
    config.mechanism = {5, 20};
    config.script.push_back({0, TransferIntent{"a1", "b1", money("60")}});
    config.horizon = 40;

    RunResult result = run(config);
    REQUIRE(count_kind(result.log, EventKind::Disclose) == 1);
    for (const auto& rec : result.log) {
        const Event* ev = std::get_if<Event>(&rec.entry);
        if (!ev)
            continue;
        if (const DiscloseEv* d = std::get_if<DiscloseEv>(&ev->body)) {
            // forward check: the listed price recovers the buyer's estimate
            CHECK(d->price.value() == doctest::Approx(80.0).epsilon(0.001));
            CHECK(d->fee.value() ==
                  doctest::Approx(config.token.fee.eval(d->x)).epsilon(0.01));
        }
    }
    CHECK(verify_equilibrium(config).empty());
    CHECK(replay(to_jsonl(result.log), config).ok);

    // the scenario JSON round-trips table points and the declared slope cap
    ScenarioConfig back = scenario_from_json(scenario_to_json(config));
    CHECK(to_jsonl(run(back).log) == to_jsonl(result.log));
}

TEST_CASE("replay drives externally produced logs, turn expiry included") {
    // The engine's agents always resolve their turn the tick it starts, so
    // TurnExpired only shows up in logs from direct ledger drivers. Replay
    // must still accept those.
    ScenarioConfig config = two_player_sale(Strategy::best_response());
    config.script.clear();

    std::vector<PlayerSpec> specs;
    for (const auto& pc : config.players)
        specs.push_back(pc.spec);
    Ledger ledger(specs, config.token.initial_owner, config.token.fee, config.token.price,
                  config.mechanism);
    std::vector<LogRecord> log;
    log.push_back({1, 0, ledger.transfer("a1", "b1", money("10"), 0)});
    log.push_back({2, 6, *ledger.expire_turn(6)}); // d_turn is 5
    log.push_back({3, 7, ledger.take_back("a1", 7)});
    ReplayResult rep = replay(to_jsonl(log), config);
    CHECK(rep.ok);

    // an expiry line with nothing to expire is a divergence
    std::string bogus = to_jsonl(log) + R"({"deltas":{},"kind":"AutoSaleExpired",)"
                                        R"("royalty":1.0,"seq":4,"time":8})" + "\n";
    ReplayResult bad = replay(bogus, config);
    CHECK(!bad.ok);
    CHECK(bad.first_mismatch_seq == 4);
}

TEST_CASE("ledger rejects time running backwards") {
    ScenarioConfig config = two_player_sale(Strategy::best_response());
    std::vector<PlayerSpec> specs;
    for (const auto& pc : config.players)
        specs.push_back(pc.spec);
    Ledger ledger(specs, "a1", config.token.fee, config.token.price, config.mechanism);
    ledger.transfer("a1", "b1", Money{}, 5);
    CHECK_THROWS_AS(ledger.decline(4), Error);
    CHECK_NOTHROW(ledger.decline(5)); // same tick is fine; order comes from seq
}

TEST_CASE("sloppy scripted runs replay bytewise") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        ScenarioConfig config = sloppy_scenario(rng);
        RunResult result = run(config);
        CHECK(result.summary.rejected > 0); // the walk must hit illegal moves
        ReplayResult rep = replay(to_jsonl(result.log), config);
        REQUIRE_MESSAGE(rep.ok, rep.detail);

        // events in two runs agree line for line
        CHECK(to_jsonl(run(config).log) == to_jsonl(result.log));
    }
}
