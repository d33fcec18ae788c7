#pragma once

// Synthetic traces with planted MEV instances and adversarial near-misses. Every planted
// instance lives on its own freshly created markets, assets and accounts, so instances
// never interact; filler traffic runs on a handful of long-lived noise markets.

#include <algorithm>
#include <numeric>

#include "bevscan/core/rng.hpp"
#include "bevscan/detect/arbitrage.hpp"
#include "bevscan/detect/clogging.hpp"
#include "bevscan/detect/liquidation.hpp"
#include "bevscan/detect/sandwich.hpp"
#include "bevscan/io/mempool.hpp"
#include "bevscan/replay/replay.hpp"

namespace bev {

struct FixtureSpec {
    std::uint64_t seed = 0;
    std::uint64_t n_blocks = 100;
    std::uint64_t first_block = 10'000'000;
    std::uint64_t gas_limit = 30'000'000;

    struct Planted {
        std::size_t sandwiches = 0;
        std::size_t arbitrages_block_state = 0;
        std::size_t arbitrages_network_state = 0;
        std::size_t liquidations_front = 0;
        std::size_t liquidations_back = 0;
        std::size_t liquidations_unclassifiable = 0;
        std::size_t clogging_periods = 0;
        std::size_t replayables = 0;
        std::size_t private_txs = 0;
    } planted;

    unsigned max_victims = 3;
    unsigned max_intermediates = 3;
    unsigned max_cycle_markets = 7;
    std::uint64_t min_clogging_blocks = kMinCloggingBlocks;
    std::uint64_t max_clogging_blocks = 12;
    double private_share = 0.2; // planted sandwiches / arbitrages relayed privately

    double noise = 0.0;     // filler transactions per block
    std::size_t decoys = 0; // near-misses per decoy family
};

struct PlantedSandwich {
    std::uint64_t block_number = 0;
    std::uint32_t front = 0, victim = 0, back = 0;
    std::vector<std::uint32_t> additional_victims;
    MarketId market_id;
    SignedAmount profit;
    bool privately_relayed = false;
    std::uint32_t intermediate_tx_count = 0;
};

struct PlantedArbitrage {
    std::uint64_t block_number = 0;
    std::uint32_t tx_index = 0;
    std::size_t n_markets = 0;
    std::size_t n_platforms = 0;
    Amount revenue;
    ArbitrageState state = ArbitrageState::Unknown;
};

struct PlantedLiquidation {
    std::uint64_t block_number = 0;
    std::uint32_t tx_index = 0;
    PlatformId platform;
    Address borrower;
    LiquidationStrategy strategy = LiquidationStrategy::Unclassifiable;
    bool internal_backrun = false;
    Amount profit_native;
};

struct PlantedClogging {
    Address address;
    std::uint64_t start_block = 0;
    std::uint64_t end_block = 0;
};

struct PlantedReplay {
    std::uint64_t block_number = 0;
    std::uint32_t tx_index = 0;
    Address contract;
    ContractPattern pattern = ContractPattern::TransferRevenueToSender;
    ReplayPattern expected = ReplayPattern::NotReplayable;
    Amount expected_profit; // may be negative
    bool miner_only = false;
};

struct GroundTruth {
    std::vector<PlantedSandwich> sandwiches;
    std::vector<PlantedArbitrage> arbitrages;
    std::vector<PlantedLiquidation> liquidations;
    std::vector<PlantedClogging> clogging;
    std::vector<PlantedReplay> replays;
    std::set<TxHash> not_broadcast;
    std::set<TxHash> zero_gas_price;
    Address adversary;
};

struct Fixture {
    Trace trace;
    GroundTruth truth;
    MempoolLog mempool;
};

/// Address the replay scan plays by default; fixture expectations are computed for it.
inline Address default_adversary() { return Address::from_counter(0xAD5E, 0xAD); }

namespace fixture {

inline const std::array<PlatformId, 5> kDexes = {"uniswap", "sushiswap", "balancer", "curve", "bancor"};
inline const std::array<PlatformId, 3> kLenders = {"aave", "compound", "dydx"};
inline constexpr std::size_t kNoiseMarkets = 8;
inline constexpr std::size_t kLiquidators = 12;
inline constexpr std::uint64_t kBlockTimeMs = 13'000;
inline constexpr std::size_t kReplaysPerBlock = 5;
inline constexpr unsigned kMaxAttempts = 16;

enum class Kind {
    Sandwich,
    ArbBlockState,
    ArbNetworkState,
    LiqFront,
    LiqBack,
    LiqBackBoundary, // previous health exactly 1: not yet liquidatable
    LiqUnclassifiable,
    PrivateTx,
    DecoyH5High,
    DecoyH5Low,
    DecoyNoVictim,
    DecoyOtherActor,
    DecoyBrokenChain,
    DecoyUnprofitableCycle,
    DecoyOpenPath,
};

/// Upper bound on the gas an item adds to its block.
inline std::uint64_t gas_estimate(Kind k, const FixtureSpec& spec) {
    switch (k) {
    case Kind::Sandwich:
    case Kind::DecoyH5High:
    case Kind::DecoyH5Low:
    case Kind::DecoyNoVictim:
    case Kind::DecoyOtherActor: return 200'000 * (2 + spec.max_victims) + 120'000 * (spec.max_intermediates + spec.max_victims);
    case Kind::ArbBlockState:
    case Kind::ArbNetworkState:
    case Kind::DecoyBrokenChain:
    case Kind::DecoyUnprofitableCycle:
    case Kind::DecoyOpenPath: return 200'000 + 100'000 + 60'000 * spec.max_cycle_markets + 120'000 * 2;
    case Kind::PrivateTx: return 120'000;
    default: return 700'000; // oracle update, filler, liquidation
    }
}

inline TxHash make_hash(std::uint64_t seed, std::uint64_t block, std::uint64_t local) {
    std::array<std::uint8_t, 32> raw{};
    std::uint64_t x = splitmix64(seed ^ splitmix64(block * 0x10001 + local));
    for (std::size_t w = 0; w < 4; ++w) {
        x = splitmix64(x + w);
        for (std::size_t i = 0; i < 8; ++i) raw[w * 8 + i] = static_cast<std::uint8_t>(x >> (8 * i));
    }
    return TxHash(raw);
}

/// Uniform-ish integer in [lo, hi].
inline Amount random_amount(Stream& s, const Amount& lo, const Amount& hi) {
    if (hi <= lo) return lo;
    const Amount span = hi - lo + 1;
    return lo + ((span * Amount(s.next())) >> 64);
}

inline Amount eth(std::uint64_t whole) { return native_unit() * whole; }
inline Amount gwei(std::uint64_t g) { return Amount(kGwei) * g; }

inline Amount percent_of(const Amount& a, std::uint64_t num, std::uint64_t den) { return a * num / den; }

struct Noise {
    std::vector<PoolState> markets;
    std::vector<Address> pairs;
};

inline Noise initial_noise() {
    Noise n;
    for (std::size_t k = 0; k < kNoiseMarkets; ++k) {
        n.markets.push_back({"noise-" + std::to_string(k), kNativeAsset, "NZ" + std::to_string(k), eth(10'000),
                             eth(10'000) * (k + 1), kDefaultFeeBps});
        n.pairs.push_back(Address::from_counter(k, 0x0C));
    }
    return n;
}

struct Deferred {
    std::vector<BorrowPosition> prev_positions;
    PriceMap prev_prices;
};

/// One block under construction.
class BlockDraft {
public:
    BlockDraft(const FixtureSpec& spec, std::uint64_t number, std::uint64_t clog_gas, Stream& rng, Noise noise)
        : spec_(spec), rng_(rng), noise_(std::move(noise)) {
        block.number = number;
        block.gas_limit = spec.gas_limit;
        budget_ = spec.gas_limit - clog_gas;
    }

    Block block;
    GroundTruth truth;
    Deferred deferred;
    std::vector<bool> broadcast;

    Stream& rng() { return rng_; }
    const FixtureSpec& spec() const { return spec_; }
    Noise& noise() { return noise_; }

    Address fresh(std::uint8_t tag) { return Address::from_counter((block.number << 20) | ++counter_, tag); }
    std::string fresh_name(std::string_view prefix) {
        return std::string(prefix) + std::to_string(block.number) + "-" + std::to_string(++counter_);
    }

    std::uint32_t append(Transaction tx, bool broadcast_it = true) {
        tx.index = static_cast<std::uint32_t>(block.transactions.size());
        tx.hash = make_hash(spec_.seed, block.number, tx.index);
        if (tx.gas_used > budget_) throw InvariantViolation("fixture block " + std::to_string(block.number) + " ran out of gas");
        budget_ -= tx.gas_used;
        if (tx.gas_price == 0) broadcast_it = false;
        if (!broadcast_it) truth.not_broadcast.insert(tx.hash);
        if (tx.gas_price == 0) truth.zero_gas_price.insert(tx.hash);
        broadcast.push_back(broadcast_it);
        block.transactions.push_back(std::move(tx));
        return block.transactions.back().index;
    }

    /// Returns gas set aside at construction, right before the reserved transaction.
    void release(std::uint64_t gas) { budget_ += gas; }

    PoolState& add_market(PoolState p) {
        block.pool_states.push_back(p);
        auto [it, inserted] = pools_.emplace(p.market_id, std::move(p));
        if (!inserted) throw InvariantViolation("duplicate fixture market");
        return it->second;
    }

    SwapEvent swap(const MarketId& market, const PlatformId& platform, const AssetId& asset_in, const Amount& amount) {
        PoolState& p = pools_.at(market);
        auto r = amm_swap_out(p, {asset_in, amount});
        SwapEvent ev{platform, market, {asset_in, amount, r.output.asset, r.output.amount}};
        p = std::move(r.after);
        return ev;
    }

    const PoolState& pool(const MarketId& m) const { return pools_.at(m); }

    Amount gas_price() { return gwei(rng_.below_inclusive(10, 200)); }

    /// A plain transfer or a swap on a noise market, each from a fresh account.
    std::uint32_t filler(bool broadcast_it = true, bool zero_gas = false) {
        Transaction tx;
        tx.sender = fresh(0x0A);
        tx.gas_price = zero_gas ? Amount(0) : gas_price();
        if (rng_.bernoulli(0.6)) {
            const std::size_t k = rng_.below_inclusive(0, kNoiseMarkets - 1);
            const MarketId& id = noise_.markets[k].market_id;
            if (!touched_noise_.count(k)) {
                touched_noise_.insert(k);
                block.pool_states.push_back(noise_.markets[k]);
                pools_.emplace(id, noise_.markets[k]);
            }
            const bool sell_native = rng_.bernoulli(0.5);
            const PoolState& p = pools_.at(id);
            const AssetId in = sell_native ? p.asset_x : p.asset_y;
            const Amount amount = percent_of(p.reserve_of(in), rng_.below_inclusive(1, 50), 10'000) + 1;
            tx.to = noise_.pairs[k];
            tx.gas_used = rng_.below_inclusive(60'000, 120'000);
            tx.events.push_back(swap(id, "uniswap", in, amount));
            noise_.markets[k] = pools_.at(id);
        } else {
            tx.to = fresh(0x0A);
            tx.value = random_amount(rng_, native_unit() / 100, eth(5));
            tx.gas_used = 21'000;
        }
        return append(std::move(tx), broadcast_it);
    }

    /// Up to n fillers, fewer when the block runs short of gas.
    void fillers(std::size_t n) {
        for (std::size_t i = 0; i < n && budget_ >= 120'000; ++i) filler();
    }

private:
    const FixtureSpec& spec_;
    Stream& rng_;
    Noise noise_;
    std::uint64_t budget_ = 0;
    std::uint64_t counter_ = 0;
    std::map<MarketId, PoolState> pools_;
    std::set<std::size_t> touched_noise_;
};

// ---- sandwiches ---------------------------------------------------------------

inline void plant_sandwich(BlockDraft& d, Kind kind) {
    Stream& r = d.rng();
    const PlatformId& platform = kDexes[r.below_inclusive(0, 1)];
    const AssetId token = d.fresh_name("SW");
    const Amount rx = random_amount(r, eth(1'000), eth(100'000));
    const Amount ry = random_amount(r, eth(1'000), eth(1'000'000));
    const MarketId market = d.fresh_name("sw-");
    d.add_market({market, kNativeAsset, token, rx, ry, kDefaultFeeBps});

    const Address attacker = d.fresh(0x01);
    const Address attacker_contract = d.fresh(0x02);
    const Address router = Address::from_counter(1, 0x04);
    const bool is_private = kind == Kind::Sandwich && r.bernoulli(d.spec().private_share);
    const Amount victim_gp = d.gas_price();

    Transaction front;
    front.sender = attacker;
    front.to = attacker_contract;
    front.gas_used = r.below_inclusive(100'000, 200'000);
    front.gas_price = is_private ? Amount(0) : victim_gp * r.below_inclusive(90, 200) / 100;
    const Amount front_in = percent_of(rx, r.below_inclusive(50, 300), 10'000);
    auto front_ev = d.swap(market, platform, kNativeAsset, front_in);
    const Amount front_out = front_ev.action.amount_out;
    front.events.push_back(front_ev);
    const std::uint32_t fi = d.append(std::move(front));

    std::vector<std::uint32_t> victims;
    const unsigned n_victims = kind == Kind::DecoyNoVictim ? 0 : static_cast<unsigned>(r.below_inclusive(1, d.spec().max_victims));
    for (unsigned v = 0; v < n_victims; ++v) {
        if (v > 0 && r.bernoulli(0.3)) d.filler();
        Transaction tx;
        tx.sender = d.fresh(0x03);
        tx.to = router;
        tx.gas_used = r.below_inclusive(100'000, 200'000);
        tx.gas_price = v == 0 ? victim_gp : d.gas_price();
        tx.events.push_back(d.swap(market, platform, kNativeAsset, percent_of(rx, r.below_inclusive(20, 200), 10'000)));
        victims.push_back(d.append(std::move(tx)));
    }
    d.fillers(r.below_inclusive(0, d.spec().max_intermediates));

    Amount back_in = front_out;
    switch (kind) {
    case Kind::DecoyH5High: back_in = front_out * 111 / 100 + 1; break;
    case Kind::DecoyH5Low: back_in = front_out * 89 / 100; break;
    default: {
        const auto mode = r.below_inclusive(0, 9);
        if (mode == 0) back_in = (front_out * 9 + 9) / 10;        // lower edge
        else if (mode == 1) back_in = front_out * 11 / 10;        // upper edge
        else if (mode <= 4) back_in = front_out * r.below_inclusive(90, 110) / 100;
    }
    }
    if (back_in <= 0) back_in = 1;
    Transaction back;
    if (kind == Kind::DecoyOtherActor) {
        back.sender = d.fresh(0x01);
        back.to = d.fresh(0x02);
    } else {
        back.sender = attacker;
        back.to = r.bernoulli(0.5) ? attacker_contract : d.fresh(0x02); // same sender is enough
        if (back.to != attacker_contract && r.bernoulli(0.5)) {
            back.sender = d.fresh(0x01); // same contract, different EOA
            back.to = attacker_contract;
        }
    }
    back.gas_used = r.below_inclusive(100'000, 200'000);
    if (is_private) {
        back.gas_price = 0;
    } else {
        const Amount lowered = victim_gp - gwei(r.below_inclusive(0, 150)) + gwei(10);
        back.gas_price = lowered > 0 ? lowered : gwei(1);
    }
    auto back_ev = d.swap(market, platform, token, back_in);
    const Amount back_out = back_ev.action.amount_out;
    back.events.push_back(back_ev);
    const std::uint32_t bi = d.append(std::move(back));

    if (kind != Kind::Sandwich) return;
    PlantedSandwich s;
    s.block_number = d.block.number;
    s.front = fi;
    s.victim = victims.front();
    s.additional_victims.assign(victims.begin() + 1, victims.end());
    s.back = bi;
    s.market_id = market;
    s.profit = {kNativeAsset, back_out - front_in};
    s.privately_relayed = is_private;
    s.intermediate_tx_count = bi - fi - 1 - static_cast<std::uint32_t>(victims.size());
    d.truth.sandwiches.push_back(std::move(s));
}

// ---- arbitrage -----------------------------------------------------------------

struct CyclePlan {
    std::vector<MarketId> markets;
    std::vector<PlatformId> platforms;
    std::vector<AssetId> assets; // assets[0] = loop asset, cycle assets[0] -> assets[1] -> ... -> assets[0]
};

inline CyclePlan plan_cycle(BlockDraft& d, std::size_t k, std::size_t p, std::uint64_t skew_leg, std::uint64_t skew_pct) {
    Stream& r = d.rng();
    CyclePlan c;
    c.assets.push_back(kNativeAsset);
    for (std::size_t i = 1; i < k; ++i) c.assets.push_back(d.fresh_name("AR"));
    std::vector<std::size_t> order(kDexes.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[r.below_inclusive(0, i - 1)]);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t slot = i < p ? i : r.below_inclusive(0, p - 1);
        c.platforms.push_back(kDexes[order[slot]]);
    }
    for (std::size_t i = 0; i < p && i < k; ++i) std::swap(c.platforms[i], c.platforms[r.below_inclusive(i, k - 1)]);
    for (std::size_t i = 0; i < k; ++i) {
        const AssetId& in = c.assets[i];
        const AssetId& out = c.assets[(i + 1) % k];
        const Amount reserve = random_amount(r, eth(5'000), eth(50'000));
        const Amount out_reserve = i == skew_leg ? reserve * (100 + skew_pct) / 100 : reserve;
        const MarketId id = d.fresh_name("ar-");
        // Half the markets list the pair in reverse order.
        if (r.bernoulli(0.5))
            d.add_market({id, in, out, reserve, out_reserve, kDefaultFeeBps});
        else
            d.add_market({id, out, in, out_reserve, reserve, kDefaultFeeBps});
        c.markets.push_back(id);
    }
    return c;
}

inline void plant_arbitrage(BlockDraft& d, Kind kind) {
    Stream& r = d.rng();
    const std::size_t k = r.below_inclusive(2, std::max(2u, d.spec().max_cycle_markets));
    const std::size_t p = r.below_inclusive(1, std::min<std::size_t>(k, kDexes.size()));
    const bool block_state = kind == Kind::ArbBlockState;
    const std::uint64_t skew_leg = block_state ? r.below_inclusive(0, k - 1) : k;
    CyclePlan c = plan_cycle(d, k, p, skew_leg, r.below_inclusive(20, 60));
    const bool is_private = (kind == Kind::ArbBlockState || kind == Kind::ArbNetworkState) && r.bernoulli(d.spec().private_share);

    if (kind == Kind::ArbNetworkState) {
        // A large trade into the first market cheapens assets[1]; the cycle back-runs it.
        Transaction trigger;
        trigger.sender = d.fresh(0x03);
        trigger.to = Address::from_counter(1, 0x04);
        trigger.gas_used = r.below_inclusive(100'000, 200'000);
        trigger.gas_price = d.gas_price();
        const Amount big = percent_of(d.pool(c.markets[0]).reserve_of(c.assets[1]), r.below_inclusive(2'000, 4'000), 10'000);
        trigger.events.push_back(d.swap(c.markets[0], c.platforms[0], c.assets[1], big));
        d.append(std::move(trigger));
        d.fillers(r.below_inclusive(0, 2));
    }

    Transaction tx;
    tx.sender = d.fresh(0x05);
    tx.to = d.fresh(0x06);
    tx.gas_used = 100'000 + 60'000 * k;
    tx.gas_price = is_private ? Amount(0) : d.gas_price();
    Amount carry = percent_of(d.pool(c.markets[0]).reserve_of(kNativeAsset), r.below_inclusive(20, 100), 10'000);
    const Amount first_in = carry;
    const std::size_t legs = kind == Kind::DecoyOpenPath ? k - 1 : k;
    for (std::size_t i = 0; i < legs; ++i) {
        AssetId in = c.assets[i];
        Amount amount = carry;
        if (kind == Kind::DecoyBrokenChain && i == 1) {
            amount = carry + 1; // spends more than the previous leg produced
        }
        auto ev = d.swap(c.markets[i], c.platforms[i], in, amount);
        carry = ev.action.amount_out;
        tx.events.push_back(std::move(ev));
    }
    const std::uint32_t idx = d.append(std::move(tx));
    if (kind != Kind::ArbBlockState && kind != Kind::ArbNetworkState) return;

    PlantedArbitrage a;
    a.block_number = d.block.number;
    a.tx_index = idx;
    a.n_markets = k;
    a.n_platforms = p;
    a.revenue = carry - first_in;
    a.state = block_state ? ArbitrageState::BlockState : ArbitrageState::NetworkState;
    d.truth.arbitrages.push_back(a);
}

// ---- liquidations --------------------------------------------------------------

inline void plant_liquidation(BlockDraft& d, Kind kind) {
    Stream& r = d.rng();
    const PlatformId& platform = kLenders[r.below_inclusive(0, kLenders.size() - 1)];
    const AssetId collateral = d.fresh_name("LQ");
    const Rational threshold(r.below_inclusive(60, 90), 100);
    const Rational price(r.below_inclusive(50, 2'000), 1'000);
    const Amount c = eth(r.below_inclusive(10, 1'000));
    const Rational backing = Rational(c) * price * threshold;

    Rational health;
    switch (kind) {
    case Kind::LiqFront: health = Rational(r.below_inclusive(70, 99), 100); break;
    case Kind::LiqBackBoundary: health = 1; break;
    default: health = Rational(r.below_inclusive(101, 150), 100);
    }
    const Amount debt = kind == Kind::LiqBackBoundary ? floor(backing) : floor(backing / health);
    if (kind == Kind::LiqBackBoundary && Rational(debt) != backing) throw InvariantViolation("boundary position not exact");

    BorrowPosition pos{platform, d.fresh(0x07), {collateral, c}, {kNativeAsset, debt}, threshold};
    if (kind != Kind::LiqUnclassifiable) {
        d.deferred.prev_positions.push_back(pos);
        d.deferred.prev_prices[collateral] = price;
    }

    const bool back = kind == Kind::LiqBack || kind == Kind::LiqBackBoundary || (kind == Kind::LiqUnclassifiable && r.bernoulli(0.5));
    Rational now = price;
    if (back) now = price * Rational(r.below_inclusive(60, 95), 100);
    d.block.prices[collateral] = now;

    const Address liquidator = Address::from_counter(r.below_inclusive(0, kLiquidators - 1), 0x08);
    const Address lender = Address::from_counter(r.below_inclusive(0, kLenders.size() - 1) + 1, 0x09);
    const bool internal = back && r.bernoulli(0.5);
    const Address oracle = Address::from_counter(1, 0x0B);
    if (back && !internal) {
        Transaction update;
        update.sender = oracle;
        update.to = oracle;
        update.gas_used = 60'000;
        update.gas_price = d.gas_price();
        update.events.push_back(OracleUpdateEvent{collateral, now});
        d.append(std::move(update));
        d.fillers(d.rng().below_inclusive(0, 1));
    }

    Transaction tx;
    tx.sender = liquidator;
    tx.to = lender;
    tx.gas_used = r.below_inclusive(250'000, 500'000);
    tx.gas_price = d.gas_price();
    if (internal) tx.events.push_back(OracleUpdateEvent{collateral, now});
    const Amount repaid = debt / 2;
    const Rational spread(r.below_inclusive(105, 110), 100);
    Amount seized = floor(Rational(repaid) * spread / now);
    if (seized > c) seized = c;
    tx.events.push_back(LiquidationEvent{platform, pos.borrower, liquidator, {collateral, seized}, {kNativeAsset, repaid}});
    const Amount gas = tx.gas_price * tx.gas_used;
    const std::uint32_t idx = d.append(std::move(tx));

    BorrowPosition after = pos;
    after.collateral.amount -= seized;
    after.debt.amount -= repaid;
    d.block.positions.push_back(after);

    PlantedLiquidation l;
    l.block_number = d.block.number;
    l.tx_index = idx;
    l.platform = platform;
    l.borrower = pos.borrower;
    l.strategy = kind == Kind::LiqFront          ? LiquidationStrategy::FrontRun
                 : kind == Kind::LiqUnclassifiable ? LiquidationStrategy::Unclassifiable
                                                   : LiquidationStrategy::BackRun;
    l.internal_backrun = internal;
    l.profit_native = floor(Rational(seized) * now) - repaid - gas;
    d.truth.liquidations.push_back(std::move(l));
}

inline void plant(BlockDraft& d, Kind k) {
    switch (k) {
    case Kind::Sandwich:
    case Kind::DecoyH5High:
    case Kind::DecoyH5Low:
    case Kind::DecoyNoVictim:
    case Kind::DecoyOtherActor: plant_sandwich(d, k); break;
    case Kind::ArbBlockState:
    case Kind::ArbNetworkState:
    case Kind::DecoyBrokenChain:
    case Kind::DecoyUnprofitableCycle:
    case Kind::DecoyOpenPath: plant_arbitrage(d, k); break;
    case Kind::LiqFront:
    case Kind::LiqBack:
    case Kind::LiqBackBoundary:
    case Kind::LiqUnclassifiable: plant_liquidation(d, k); break;
    case Kind::PrivateTx: d.filler(false, d.rng().bernoulli(0.5)); break;
    }
}

// ---- replay corpus -------------------------------------------------------------

struct ReplayBlockResult {
    Block block;
    GroundTruth truth;
    std::vector<bool> broadcast;
};

inline Bytes address_word(const Address& a) {
    Bytes w(kAbiWordBytes, 0);
    std::copy(a.raw().begin(), a.raw().end(), w.end() - 20);
    return w;
}

/// A block of contract calls with a world-state snapshot. Contracts cycle through the
/// four beneficiary patterns; expected replay profits are computed in closed form.
inline ReplayBlockResult replay_block(const FixtureSpec& spec, std::uint64_t number, std::size_t first, std::size_t count,
                                      Stream& r) {
    ReplayBlockResult out;
    out.block.number = number;
    out.block.gas_limit = spec.gas_limit;
    WorldState w;
    std::uint64_t counter = 0;
    auto fresh = [&](std::uint8_t tag) { return Address::from_counter((number << 20) | ++counter, tag); };

    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t serial = first + i;
        const auto pattern = static_cast<ContractPattern>(serial % 4);
        const Address victim = fresh(0x0D);
        const Address contract = fresh(0x0E);
        ContractSpec cs;
        cs.pattern = pattern;
        cs.gas_used = r.below_inclusive(50'000, 250'000);

        Transaction tx;
        tx.sender = victim;
        tx.to = contract;
        tx.gas_used = cs.gas_used;
        tx.gas_price = r.bernoulli(0.2) ? Amount(0) : gwei(r.below_inclusive(10, 200));
        static const std::uint64_t kCapital[] = {0, 3, 50, 500};
        tx.value = eth(kCapital[r.below_inclusive(0, 3)]);
        tx.input = {0xa9, 0x05, 0x9c, static_cast<std::uint8_t>(serial)};

        const Amount stash = random_amount(r, eth(1) / 2, eth(5));
        const auto payout_kind = r.below_inclusive(0, 2); // 0 native, 1 token, 2 swap then pay
        std::optional<MarketId> market;
        AssetId token;
        if (payout_kind != 0) {
            token = "RT" + std::to_string(number) + "-" + std::to_string(i);
            market = "rp-" + std::to_string(number) + "-" + std::to_string(i);
            const Amount reserve = eth(r.below_inclusive(1'000, 10'000));
            w.pools[*market] = {*market, kNativeAsset, token, reserve, reserve * 2, kDefaultFeeBps};
            w.tokens[{token, contract}] = stash * 2;
        }
        switch (payout_kind) {
        case 0:
            w.native[contract] = stash;
            cs.payout.push_back({PayoutStep::Kind::Pay, kNativeAsset, std::nullopt, {}});
            break;
        case 1:
            cs.payout.push_back({PayoutStep::Kind::Pay, token, std::nullopt, {}});
            cs.payout.push_back({PayoutStep::Kind::Pay, kNativeAsset, std::nullopt, {}});
            break;
        default:
            w.native[contract] = stash / 4;
            cs.payout.push_back({PayoutStep::Kind::Swap, token, std::nullopt, *market});
            cs.payout.push_back({PayoutStep::Kind::Pay, kNativeAsset, std::nullopt, {}});
        }

        switch (pattern) {
        case ContractPattern::TransferRevenueToSender:
            if (r.bernoulli(0.5)) { // victim address echoed in the calldata, not used for payment
                auto word = address_word(victim);
                tx.input.insert(tx.input.end(), word.begin(), word.end());
            }
            break;
        case ContractPattern::SpecifyBeneficiary: {
            cs.beneficiary_word_index = static_cast<std::uint32_t>(r.below_inclusive(0, 2));
            for (std::uint32_t k = 0; k < 3; ++k) {
                Bytes word = k == cs.beneficiary_word_index ? address_word(victim) : Bytes(kAbiWordBytes, 0);
                if (k != cs.beneficiary_word_index) word.back() = static_cast<std::uint8_t>(k + 1);
                tx.input.insert(tx.input.end(), word.begin(), word.end());
            }
            break;
        }
        case ContractPattern::Authentication: cs.owner = victim; break;
        case ContractPattern::MoveBeneficiary: cs.stored_beneficiary = victim; break;
        }

        w.native[victim] = tx.value + tx.gas_price * tx.gas_used + eth(1);
        w.contracts[contract] = cs;

        // Closed-form profit of the replay at gas price + 1.
        const Amount fee = (tx.gas_price + 1) * cs.gas_used;
        Amount expected = -fee;
        if (pattern == ContractPattern::TransferRevenueToSender || pattern == ContractPattern::SpecifyBeneficiary) {
            switch (payout_kind) {
            case 0: expected = stash - fee; break;
            case 1: {
                const auto sold = amm_swap_out(w.pools.at(*market), {token, stash * 2});
                expected = sold.output.amount - fee - (tx.gas_price + 1) * kConversionGas;
                break;
            }
            default: {
                const auto sold = amm_swap_out(w.pools.at(*market), {token, stash * 2});
                expected = stash / 4 + sold.output.amount - fee;
            }
            }
        } else if (pattern == ContractPattern::MoveBeneficiary) {
            expected = -fee - tx.value;
        }

        const std::uint32_t idx = static_cast<std::uint32_t>(out.block.transactions.size());
        tx.index = idx;
        tx.hash = make_hash(spec.seed, number, idx);
        PlantedReplay p;
        p.block_number = number;
        p.tx_index = idx;
        p.contract = contract;
        p.pattern = pattern;
        p.expected = pattern == ContractPattern::TransferRevenueToSender ? ReplayPattern::SenderBenefits
                     : pattern == ContractPattern::SpecifyBeneficiary    ? ReplayPattern::ControllableInput
                                                                         : ReplayPattern::NotReplayable;
        p.expected_profit = expected;
        p.miner_only = tx.gas_price == 0;
        out.truth.replays.push_back(p);
        if (tx.gas_price == 0) {
            out.truth.zero_gas_price.insert(tx.hash);
            out.truth.not_broadcast.insert(tx.hash);
        }
        out.broadcast.push_back(tx.gas_price != 0);
        out.block.transactions.push_back(std::move(tx));
    }
    out.block.world_state = std::move(w);
    return out;
}

// ---- verification --------------------------------------------------------------

inline bool same_sandwiches(const Block& b, const std::vector<PlantedSandwich>& truth) {
    const auto found = detect_sandwiches(b);
    if (found.size() != truth.size()) return false;
    for (std::size_t i = 0; i < found.size(); ++i) {
        const auto& f = found[i];
        const auto& t = truth[i];
        if (f.front != t.front || f.victim != t.victim || f.back != t.back || f.additional_victims != t.additional_victims ||
            f.market_id != t.market_id || f.profit != t.profit || f.privately_relayed != t.privately_relayed ||
            f.intermediate_tx_count != t.intermediate_tx_count)
            return false;
    }
    return true;
}

inline bool same_arbitrages(const Block& b, const std::vector<PlantedArbitrage>& truth) {
    const auto found = detect_arbitrages(b);
    if (found.size() != truth.size()) return false;
    for (std::size_t i = 0; i < found.size(); ++i) {
        const auto& f = found[i];
        const auto& t = truth[i];
        if (f.tx_index != t.tx_index || f.n_markets != t.n_markets || f.n_platforms != t.n_platforms || f.revenue != t.revenue)
            return false;
        if (classify_arbitrage_state(f, b.pool_states) != t.state) return false;
    }
    return true;
}

inline void check_spec(const FixtureSpec& s) {
    if (s.n_blocks == 0) throw SpecError("n_blocks must be positive");
    if (s.gas_limit < 1'000'000) throw SpecError("gas_limit below 1M cannot host planted transactions");
    if (s.min_clogging_blocks < kMinCloggingBlocks) throw SpecError("planted clogging periods need at least 5 blocks");
    if (s.max_clogging_blocks < s.min_clogging_blocks) throw SpecError("max_clogging_blocks below min_clogging_blocks");
    if (s.max_victims < 1) throw SpecError("max_victims must be at least 1");
    if (s.max_cycle_markets < 2) throw SpecError("cycles need at least two markets");
    if (s.noise < 0) throw SpecError("noise must be non-negative");
    if (s.private_share < 0 || s.private_share > 1) throw SpecError("private_share must lie in [0, 1]");
    if (s.n_blocks < 2 && s.planted.liquidations_front + s.planted.liquidations_back + s.decoys > 0)
        throw SpecError("classified liquidations need a preceding block");
}

} // namespace fixture

/// Deterministic trace with planted instances, decoys, ground truth and a mempool log.
/// Throws SpecError when the spec cannot be realised.
inline Fixture generate_fixture(const FixtureSpec& spec) {
    using namespace fixture;
    check_spec(spec);
    Stream plan(spec.seed, 1);
    const std::uint64_t n = spec.n_blocks;
    const auto& pl = spec.planted;

    // Clogging windows: planted periods plus 4-block and exactly-80% decoys, disjoint.
    struct Window {
        std::uint64_t length;
        std::uint64_t numerator; // share of gas_limit, per 1000
        bool planted;
        std::uint64_t start = 0;
    };
    std::vector<Window> windows;
    for (std::size_t i = 0; i < pl.clogging_periods; ++i)
        windows.push_back({plan.below_inclusive(spec.min_clogging_blocks, spec.max_clogging_blocks), 0, true});
    for (std::size_t i = 0; i < spec.decoys; ++i) {
        windows.push_back({kMinCloggingBlocks - 1, 0, false});
        windows.push_back({kMinCloggingBlocks, 800, false});
    }
    for (auto& w : windows)
        if (!w.numerator) w.numerator = plan.below_inclusive(801, 900);

    const std::size_t replay_blocks = (pl.replayables + kReplaysPerBlock - 1) / kReplaysPerBlock;
    std::uint64_t demand = replay_blocks;
    for (const auto& w : windows) demand += w.length;
    if (demand > n) throw SpecError("clogging periods and replay blocks need " + std::to_string(demand) + " blocks, spec has " + std::to_string(n));

    // Spread the windows and replay blocks over the free blocks (stars and bars).
    std::vector<std::size_t> order(windows.size() + replay_blocks);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[plan.below_inclusive(0, i - 1)]);
    std::vector<std::uint64_t> gaps(order.size() + 1, 0);
    for (std::uint64_t f = 0; f < n - demand; ++f) ++gaps[plan.below_inclusive(0, gaps.size() - 1)];
    std::vector<std::uint64_t> clog_gas(n, 0);
    std::vector<std::int64_t> clog_window(n, -1);
    std::vector<bool> is_replay(n, false);
    {
        std::uint64_t at = 0;
        for (std::size_t slot = 0; slot < order.size(); ++slot) {
            at += gaps[slot];
            const std::size_t id = order[slot];
            if (id < windows.size()) {
                windows[id].start = at;
                for (std::uint64_t b = at; b < at + windows[id].length; ++b) {
                    clog_window[b] = static_cast<std::int64_t>(id);
                    clog_gas[b] = spec.gas_limit * windows[id].numerator / 1000;
                }
                at += windows[id].length;
            } else {
                is_replay[at] = true;
                at += 1;
            }
        }
    }

    // Items, each placed in a random non-replay block with gas to spare.
    std::vector<Kind> items;
    auto add = [&](Kind k, std::size_t count) { items.insert(items.end(), count, k); };
    add(Kind::Sandwich, pl.sandwiches);
    add(Kind::ArbBlockState, pl.arbitrages_block_state);
    add(Kind::ArbNetworkState, pl.arbitrages_network_state);
    add(Kind::LiqFront, pl.liquidations_front);
    add(Kind::LiqBack, pl.liquidations_back);
    add(Kind::LiqUnclassifiable, pl.liquidations_unclassifiable);
    add(Kind::PrivateTx, pl.private_txs);
    for (Kind k : {Kind::DecoyH5High, Kind::DecoyH5Low, Kind::DecoyNoVictim, Kind::DecoyOtherActor, Kind::DecoyBrokenChain,
                   Kind::DecoyUnprofitableCycle, Kind::DecoyOpenPath, Kind::LiqBackBoundary})
        add(k, spec.decoys);

    const std::uint64_t filler_reserve = static_cast<std::uint64_t>(std::ceil(spec.noise * 3 + 3)) * 120'000;
    std::vector<std::uint64_t> room(n);
    for (std::uint64_t b = 0; b < n; ++b) {
        const std::uint64_t used = clog_gas[b] + filler_reserve;
        room[b] = used >= spec.gas_limit ? 0 : spec.gas_limit - used;
    }
    std::vector<std::vector<Kind>> per_block(n);
    for (Kind k : items) {
        const std::uint64_t need = gas_estimate(k, spec);
        const bool liquidation = k == Kind::LiqFront || k == Kind::LiqBack || k == Kind::LiqBackBoundary;
        const std::uint64_t start = plan.below_inclusive(0, n - 1);
        bool placed = false;
        for (std::uint64_t step = 0; step < n && !placed; ++step) {
            const std::uint64_t b = (start + step) % n;
            if (is_replay[b] || room[b] < need || (liquidation && b == 0)) continue;
            room[b] -= need;
            per_block[b].push_back(k);
            placed = true;
        }
        if (!placed) throw SpecError("not enough block gas to plant every instance; raise n_blocks");
    }

    Fixture fx;
    fx.trace.metadata.source = "fixture";
    fx.trace.metadata.generator_seed = spec.seed;
    fx.truth.adversary = default_adversary();
    fx.trace.blocks.reserve(n);
    Noise noise = initial_noise();
    std::vector<std::vector<bool>> broadcast(n);
    std::vector<Address> clog_sender(windows.size()), clog_contract(windows.size());
    for (std::size_t w = 0; w < windows.size(); ++w) {
        clog_sender[w] = Address::from_counter(w, 0x10);
        clog_contract[w] = Address::from_counter(w, 0x11);
    }
    std::size_t replay_serial = 0;

    for (std::uint64_t b = 0; b < n; ++b) {
        const std::uint64_t number = spec.first_block + b;
        if (is_replay[b]) {
            Stream r(spec.seed, 0x40000000ULL + b);
            const std::size_t count = std::min(kReplaysPerBlock, pl.replayables - replay_serial);
            auto rb = replay_block(spec, number, replay_serial, count, r);
            replay_serial += count;
            Amount fees;
            for (const auto& tx : rb.block.transactions) fees += gas_cost(tx);
            rb.block.block_reward_plus_fees = eth(2) + fees;
            for (auto& p : rb.truth.replays) fx.truth.replays.push_back(p);
            fx.truth.not_broadcast.insert(rb.truth.not_broadcast.begin(), rb.truth.not_broadcast.end());
            fx.truth.zero_gas_price.insert(rb.truth.zero_gas_price.begin(), rb.truth.zero_gas_price.end());
            broadcast[b] = std::move(rb.broadcast);
            fx.trace.blocks.push_back(std::move(rb.block));
            continue;
        }

        bool done = false;
        for (unsigned attempt = 0; attempt < kMaxAttempts && !done; ++attempt) {
            Stream r(spec.seed, 0x100000000ULL + b * kMaxAttempts + attempt);
            BlockDraft d(spec, number, clog_gas[b], r, noise);

            auto kinds = per_block[b];
            for (std::size_t i = kinds.size(); i > 1; --i) std::swap(kinds[i - 1], kinds[r.below_inclusive(0, i - 1)]);
            const std::size_t n_fill = static_cast<std::size_t>(spec.noise) + (r.bernoulli(spec.noise - std::floor(spec.noise)) ? 1 : 0);
            // Slot s in [0, kinds.size()] for each filler; the clogging tx takes a slot too.
            std::vector<std::size_t> fill_at(kinds.size() + 1, 0);
            for (std::size_t f = 0; f < n_fill; ++f) ++fill_at[r.below_inclusive(0, kinds.size())];
            const std::size_t clog_slot = r.below_inclusive(0, kinds.size());

            for (std::size_t s = 0; s <= kinds.size(); ++s) {
                d.fillers(fill_at[s]);
                if (s == clog_slot && clog_window[b] >= 0) {
                    const auto w = static_cast<std::size_t>(clog_window[b]);
                    Transaction tx;
                    tx.sender = clog_sender[w];
                    tx.to = clog_contract[w];
                    tx.gas_used = clog_gas[b];
                    tx.gas_price = gwei(r.below_inclusive(1, 50));
                    d.release(clog_gas[b]);
                    d.append(std::move(tx));
                }
                if (s < kinds.size()) plant(d, kinds[s]);
            }
            if (!same_sandwiches(d.block, d.truth.sandwiches) || !same_arbitrages(d.block, d.truth.arbitrages)) continue;

            Amount fees;
            for (const auto& tx : d.block.transactions) fees += gas_cost(tx);
            d.block.block_reward_plus_fees = eth(2) + fees;
            if (!fx.trace.blocks.empty()) {
                Block& prev = fx.trace.blocks.back();
                for (auto& p : d.deferred.prev_positions) prev.positions.push_back(std::move(p));
                for (auto& [a, price] : d.deferred.prev_prices) prev.prices[a] = price;
            }
            auto& t = d.truth;
            fx.truth.sandwiches.insert(fx.truth.sandwiches.end(), t.sandwiches.begin(), t.sandwiches.end());
            fx.truth.arbitrages.insert(fx.truth.arbitrages.end(), t.arbitrages.begin(), t.arbitrages.end());
            fx.truth.liquidations.insert(fx.truth.liquidations.end(), t.liquidations.begin(), t.liquidations.end());
            fx.truth.not_broadcast.insert(t.not_broadcast.begin(), t.not_broadcast.end());
            fx.truth.zero_gas_price.insert(t.zero_gas_price.begin(), t.zero_gas_price.end());
            noise = d.noise();
            broadcast[b] = std::move(d.broadcast);
            fx.trace.blocks.push_back(std::move(d.block));
            done = true;
        }
        if (!done) throw InvariantViolation("could not build block " + std::to_string(number) + " free of accidental matches");
    }

    for (std::size_t w = 0; w < windows.size(); ++w) {
        if (!windows[w].planted) continue;
        const std::uint64_t s = spec.first_block + windows[w].start;
        const std::uint64_t e = s + windows[w].length - 1;
        fx.truth.clogging.push_back({clog_sender[w], s, e});
        fx.truth.clogging.push_back({clog_contract[w], s, e});
    }
    std::sort(fx.truth.clogging.begin(), fx.truth.clogging.end(), [](const PlantedClogging& a, const PlantedClogging& b) {
        return std::tie(a.start_block, a.address) < std::tie(b.start_block, b.address);
    });

    for (std::uint64_t b = 0; b < n; ++b) {
        const Block& blk = fx.trace.blocks[b];
        const std::uint64_t mined_at = (b + 1) * kBlockTimeMs;
        for (std::size_t i = 0; i < blk.transactions.size(); ++i) {
            if (!broadcast[b][i]) continue;
            const std::uint64_t lag = 200 + splitmix64(spec.seed ^ (blk.number << 16) ^ i) % 20'000;
            fx.mempool.observe(blk.transactions[i].hash, mined_at > lag ? mined_at - lag : 0);
        }
    }
    validate_trace(fx.trace);
    return fx;
}

// ---- serialization ----------------------------------------------------------------

namespace codec {

inline FixtureSpec decode_fixture_spec(const json& j) {
    FixtureSpec s;
    auto u64 = [&](const char* key, std::uint64_t& dst) {
        if (j.contains(key)) dst = get_u64(j, key);
    };
    auto size = [&](const json& o, const char* key, std::size_t& dst) {
        if (o.contains(key)) dst = static_cast<std::size_t>(get_u64(o, key));
    };
    auto real = [&](const char* key, double& dst) {
        if (!j.contains(key)) return;
        const auto& v = j.at(key);
        dst = v.is_number() ? v.get<double>() : std::stod(v.get<std::string>());
    };
    u64("seed", s.seed);
    u64("n_blocks", s.n_blocks);
    u64("first_block", s.first_block);
    u64("gas_limit", s.gas_limit);
    u64("min_clogging_blocks", s.min_clogging_blocks);
    u64("max_clogging_blocks", s.max_clogging_blocks);
    std::uint64_t tmp = s.max_victims;
    u64("max_victims", tmp);
    s.max_victims = static_cast<unsigned>(tmp);
    tmp = s.max_intermediates;
    u64("max_intermediates", tmp);
    s.max_intermediates = static_cast<unsigned>(tmp);
    tmp = s.max_cycle_markets;
    u64("max_cycle_markets", tmp);
    s.max_cycle_markets = static_cast<unsigned>(tmp);
    real("noise", s.noise);
    real("private_share", s.private_share);
    size(j, "decoys", s.decoys);
    if (j.contains("planted")) {
        const auto& p = j.at("planted");
        size(p, "sandwiches", s.planted.sandwiches);
        size(p, "arbitrages_block_state", s.planted.arbitrages_block_state);
        size(p, "arbitrages_network_state", s.planted.arbitrages_network_state);
        size(p, "liquidations_front", s.planted.liquidations_front);
        size(p, "liquidations_back", s.planted.liquidations_back);
        size(p, "liquidations_unclassifiable", s.planted.liquidations_unclassifiable);
        size(p, "clogging_periods", s.planted.clogging_periods);
        size(p, "replayables", s.planted.replayables);
        size(p, "private_txs", s.planted.private_txs);
    }
    return s;
}

inline std::string signed_str(const Amount& a) { return a.str(); }

inline void write_ground_truth(std::ostream& out, const GroundTruth& t) {
    auto line = [&](const json& j) { out << j.dump() << '\n'; };
    line({{"adversary", t.adversary.hex()}});
    for (const auto& s : t.sandwiches) {
        json v = json::array();
        for (auto i : s.additional_victims) v.push_back(std::to_string(i));
        line({{"kind", "sandwich"},        {"block", std::to_string(s.block_number)}, {"front", std::to_string(s.front)},
              {"victim", std::to_string(s.victim)}, {"back", std::to_string(s.back)}, {"additional_victims", v},
              {"market_id", s.market_id}, {"profit", {{"asset", s.profit.asset}, {"amount", signed_str(s.profit.amount)}}},
              {"privately_relayed", s.privately_relayed}, {"intermediate_tx_count", std::to_string(s.intermediate_tx_count)}});
    }
    for (const auto& a : t.arbitrages)
        line({{"kind", "arbitrage"}, {"block", std::to_string(a.block_number)}, {"tx_index", std::to_string(a.tx_index)},
              {"n_markets", std::to_string(a.n_markets)}, {"n_platforms", std::to_string(a.n_platforms)},
              {"revenue", a.revenue.str()}, {"state", std::string(to_string(a.state))}});
    for (const auto& l : t.liquidations)
        line({{"kind", "liquidation"}, {"block", std::to_string(l.block_number)}, {"tx_index", std::to_string(l.tx_index)},
              {"platform", l.platform}, {"borrower", l.borrower.hex()}, {"strategy", std::string(to_string(l.strategy))},
              {"internal_backrun", l.internal_backrun}, {"profit", signed_str(l.profit_native)}});
    for (const auto& c : t.clogging)
        line({{"kind", "clogging"}, {"address", c.address.hex()}, {"start_block", std::to_string(c.start_block)},
              {"end_block", std::to_string(c.end_block)}});
    for (const auto& r : t.replays)
        line({{"kind", "replay"}, {"block", std::to_string(r.block_number)}, {"tx_index", std::to_string(r.tx_index)},
              {"contract", r.contract.hex()}, {"pattern", std::string(to_string(r.pattern))},
              {"expected", std::string(to_string(r.expected))}, {"expected_profit", signed_str(r.expected_profit)},
              {"miner_only", r.miner_only}});
    for (const auto& h : t.not_broadcast) line({{"kind", "not_broadcast"}, {"hash", h.hex()}});
    for (const auto& h : t.zero_gas_price) line({{"kind", "zero_gas_price"}, {"hash", h.hex()}});
}

} // namespace codec

} // namespace bev
