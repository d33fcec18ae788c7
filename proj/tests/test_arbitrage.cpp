#include <gtest/gtest.h>

#include "builders.hpp"

using namespace bev;
using namespace testing_util;

namespace {

Transaction multi_swap(std::uint32_t index, std::vector<SwapEvent> legs, Amount gas_price = Amount(kGwei)) {
    Transaction tx = plain_tx(index, addr(50 + index), 250'000, std::move(gas_price));
    for (auto& l : legs) tx.events.push_back(std::move(l));
    return tx;
}

SwapEvent leg(const char* platform, const char* market, const char* in, Amount a_in, const char* out, Amount a_out) {
    return {platform, market, {in, std::move(a_in), out, std::move(a_out)}};
}

PoolState pool(const char* id, const char* x, const char* y, Amount rx, Amount ry) {
    return {id, x, y, std::move(rx), std::move(ry), kDefaultFeeBps};
}

// Two-market cycle NATIVE -> T -> NATIVE executed on `pools`; returns the legs.
std::vector<SwapEvent> execute(std::vector<PoolState> pools, const Amount& in) {
    auto r1 = amm_swap_out(pools[0], {"NATIVE", in});
    auto r2 = amm_swap_out(pools[1], {"T", r1.output.amount});
    return {leg("uni", pools[0].market_id.c_str(), "NATIVE", in, "T", r1.output.amount),
            leg("sushi", pools[1].market_id.c_str(), "T", r1.output.amount, "NATIVE", r2.output.amount)};
}

} // namespace

TEST(Arbitrage, ExtractsProfitableCycle) {
    Block b = block(3, {multi_swap(0, {leg("uni", "m1", "A", 100, "B", 50), leg("sushi", "m2", "B", 50, "C", 30),
                                       leg("uni", "m3", "C", 30, "A", 120)})});
    auto found = detect_arbitrages(b);
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found[0].revenue, Amount(20));
    EXPECT_EQ(found[0].loop_asset, "A");
    EXPECT_EQ(found[0].n_markets, 3u);
    EXPECT_EQ(found[0].n_platforms, 2u);
    EXPECT_TRUE(verify_arbitrage(b, found[0]));
}

TEST(Arbitrage, RejectsBrokenOrLosingChains) {
    // amount forwarded exceeds what the previous leg produced
    Block over = block(1, {multi_swap(0, {leg("u", "m1", "A", 100, "B", 50), leg("u", "m2", "B", 51, "A", 120)})});
    EXPECT_TRUE(detect_arbitrages(over).empty());
    Block open = block(1, {multi_swap(0, {leg("u", "m1", "A", 100, "B", 50), leg("u", "m2", "B", 50, "C", 120)})});
    EXPECT_TRUE(detect_arbitrages(open).empty());
    Block losing = block(1, {multi_swap(0, {leg("u", "m1", "A", 100, "B", 50), leg("u", "m2", "B", 50, "A", 100)})});
    EXPECT_TRUE(detect_arbitrages(losing).empty());
    Block single = block(1, {multi_swap(0, {leg("u", "m1", "A", 100, "A", 150)})});
    EXPECT_TRUE(detect_arbitrages(single).empty());
}

TEST(Arbitrage, SmallerForwardAmountIsAllowed) {
    Block b = block(1, {multi_swap(0, {leg("u", "m1", "A", 100, "B", 50), leg("u", "m2", "B", 40, "A", 101)})});
    auto found = detect_arbitrages(b);
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found[0].revenue, Amount(1));
}

TEST(Arbitrage, LongestClosingRunWins) {
    Block b = block(1, {multi_swap(0, {leg("u", "m0", "Z", 1, "Q", 1), leg("u", "m1", "A", 100, "B", 50),
                                       leg("u", "m2", "B", 50, "A", 101), leg("u", "m3", "A", 101, "C", 10),
                                       leg("u", "m4", "C", 10, "A", 130)})});
    auto found = detect_arbitrages(b);
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found[0].swaps.size(), 4u);
    EXPECT_EQ(found[0].revenue, Amount(30));
    EXPECT_TRUE(verify_arbitrage(b, found[0]));
}

TEST(Arbitrage, StateClassification) {
    const Amount e18 = native_unit();
    const Amount in = e18;
    // Mispriced at the top of the block: T is cheap on m1 and dear on m2.
    std::vector<PoolState> skewed{pool("m1", "NATIVE", "T", e18 * 1000, e18 * 2'200'000),
                                  pool("m2", "NATIVE", "T", e18 * 1000, e18 * 1'800'000)};
    Block b1 = block(1, {multi_swap(0, execute(skewed, in))});
    b1.pool_states = skewed;
    auto c1 = detect_arbitrages(b1).at(0);
    c1.state_class = classify_arbitrage_state(c1, b1.pool_states);
    EXPECT_EQ(c1.state_class, ArbitrageState::BlockState);
    EXPECT_EQ(c1.strategy(), OrderingStrategy::DestructiveFrontRun);

    // Balanced at the top; a large trade on m2 opened the gap inside the block.
    std::vector<PoolState> flat{pool("m1", "NATIVE", "T", e18 * 1000, e18 * 2'000'000),
                                pool("m2", "NATIVE", "T", e18 * 1000, e18 * 2'000'000)};
    auto moved = flat;
    const Amount push = e18 * 200'000;
    auto victim = amm_swap_out(flat[1], {"T", push});
    moved[1] = victim.after;
    Transaction vt = swap_tx(0, addr(3), std::nullopt, "m2", "T", push, "NATIVE", victim.output.amount);
    // T is now cheap on m2: buy there, sell on m1
    Block b2 = block(2, {vt, multi_swap(1, execute({moved[1], moved[0]}, in))});
    b2.pool_states = flat;
    auto c2 = detect_arbitrages(b2).at(0);
    EXPECT_GT(c2.revenue, 0);
    c2.state_class = classify_arbitrage_state(c2, b2.pool_states);
    EXPECT_EQ(c2.state_class, ArbitrageState::NetworkState);
    EXPECT_EQ(c2.strategy(), OrderingStrategy::BackRun);

    EXPECT_EQ(classify_arbitrage_state(c2, {}), ArbitrageState::Unknown);
    EXPECT_FALSE(ArbitrageCycle{}.strategy());
}

TEST(Arbitrage, ScopeTable) {
    std::vector<ArbitrageCycle> cycles(5);
    cycles[0].n_markets = 2, cycles[0].n_platforms = 1;
    cycles[1].n_markets = 2, cycles[1].n_platforms = 2;
    cycles[2].n_markets = 7, cycles[2].n_platforms = 5;
    cycles[3].n_markets = 6, cycles[3].n_platforms = 4;
    cycles[4].n_markets = 3, cycles[4].n_platforms = 1;
    auto t = arbitrage_scope_table(cycles);
    EXPECT_EQ(t.at(2, 1), 1u);
    EXPECT_EQ(t.at(2, 2), 1u);
    EXPECT_EQ(t.at(6, 4), 2u);
    EXPECT_EQ(t.at(3, 1), 1u);
    EXPECT_EQ(t.total(), 5u);
    EXPECT_TRUE(ScopeTable::impossible(ScopeTable::row_of(2), ScopeTable::col_of(3)));
    EXPECT_FALSE(ScopeTable::impossible(ScopeTable::row_of(6), ScopeTable::col_of(9)));
    cycles[0].n_platforms = 3;
    EXPECT_THROW(arbitrage_scope_table(cycles), InvariantViolation);
}
