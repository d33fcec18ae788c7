#include <gtest/gtest.h>

#include <sstream>

#include "builders.hpp"

using namespace bev;
using namespace testing_util;

namespace {

Trace sample() {
    Trace t;
    t.metadata.source = "unit";
    t.metadata.generator_seed = 5;
    Block b = block(10, {swap_tx(0, addr(1), addr(2), "m", "NATIVE", native_unit(), "T", Amount("123456789012345678901234567890"))});
    b.pool_states.push_back({"m", "NATIVE", "T", native_unit() * 10, native_unit() * 20, 30});
    b.prices = {{"T", Rational(1, 3)}};
    b.positions.push_back({"aave", addr(4), {"T", 10}, {"NATIVE", 3}, Rational(4, 5)});
    b.transactions[0].events.push_back(OracleUpdateEvent{"T", Rational(7, 2)});
    b.transactions[0].events.push_back(LiquidationEvent{"aave", addr(4), addr(5), {"T", 9}, {"NATIVE", 2}});
    b.transactions[0].events.push_back(TransferEvent{"T", addr(1), addr(2), 77});
    b.transactions[0].input = {0xab, 0xcd};
    t.blocks.push_back(b);
    Block c = block(11, {plain_tx(0, addr(3), 21000, Amount(0))});
    c.world_state.emplace();
    c.world_state->native[addr(3)] = 5;
    ContractSpec spec;
    spec.pattern = ContractPattern::SpecifyBeneficiary;
    spec.beneficiary_word_index = 1;
    spec.gas_used = 60000;
    spec.payout = {{PayoutStep::Kind::Swap, "T", Amount(4), "m"}, {PayoutStep::Kind::Pay, "NATIVE", std::nullopt, ""}};
    c.world_state->contracts[addr(8)] = spec;
    c.world_state->pools["m"] = b.pool_states[0];
    c.world_state->tokens[{"T", addr(8)}] = 9;
    t.blocks.push_back(c);
    return t;
}

Trace parse(const std::string& s) {
    std::istringstream in(s);
    return parse_trace(in);
}

} // namespace

TEST(TraceIo, RoundTripsExactly) {
    const Trace t = sample();
    const std::string text = serialize_trace(t);
    const Trace back = parse(text);
    EXPECT_EQ(back, t);
    EXPECT_EQ(serialize_trace(back), text);
    EXPECT_EQ(checksum(text), checksum(serialize_trace(back)));
}

TEST(TraceIo, IntegersAreDecimalStrings) {
    const std::string text = serialize_trace(sample());
    EXPECT_NE(text.find("\"123456789012345678901234567890\""), std::string::npos);
}

TEST(TraceIo, ReportsLineOfParseErrors) {
    std::string text = serialize_trace(sample());
    text += "{not json\n";
    try {
        parse(text);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
    EXPECT_THROW(parse("{\"number\": \"1\"}\n"), ParseError);
}

TEST(TraceIo, ValidationFailures) {
    Trace t = sample();
    t.blocks[1].number = 10;
    EXPECT_THROW(validate_trace(t), ValidationError);

    t = sample();
    t.blocks[0].transactions[0].index = 3;
    EXPECT_THROW(validate_trace(t), ValidationError);

    t = sample();
    t.blocks[0].transactions[0].gas_used = t.blocks[0].gas_limit + 1;
    EXPECT_THROW(validate_trace(t), ValidationError);

    t = sample();
    t.blocks[0].pool_states.clear();
    EXPECT_THROW(validate_trace(t), ValidationError);

    t = sample();
    t.blocks[0].positions[0].liquidation_threshold = Rational(3, 2);
    EXPECT_THROW(validate_trace(t), ValidationError);

    t = sample();
    t.blocks[0].prices["T"] = Rational(0);
    EXPECT_THROW(validate_trace(t), ValidationError);
}

TEST(TraceIo, PredecessorNeedsConsecutiveNumbers) {
    Trace t = sample();
    EXPECT_EQ(t.predecessor(1), &t.blocks[0]);
    EXPECT_EQ(t.predecessor(0), nullptr);
    t.blocks[1].number = 12;
    EXPECT_EQ(t.predecessor(1), nullptr);
}

TEST(Mempool, KeepsEarliestSighting) {
    std::istringstream in("{\"hash\":\"0x" + std::string(64, 'a') + "\",\"first_seen_ms\":\"50\"}\n"
                          "{\"hash\":\"0x" + std::string(64, 'a') + "\",\"first_seen_ms\":\"20\"}\n"
                          "\n"
                          "{\"hash\":\"0x" + std::string(64, 'b') + "\",\"first_seen_ms\":\"70\"}\n");
    auto log = parse_mempool_log(in);
    EXPECT_EQ(log.size(), 2u);
    EXPECT_EQ(log.first_seen(TxHash::from_hex(std::string(64, 'a'))), 20u);
    std::ostringstream out;
    write_mempool_log(out, log);
    std::istringstream again(out.str());
    EXPECT_EQ(parse_mempool_log(again).entries().size(), 2u);

    std::istringstream bad("{\"hash\":\"0x12\",\"first_seen_ms\":\"1\"}\n");
    EXPECT_THROW(parse_mempool_log(bad), ParseError);
}

TEST(Mempool, PrivateDiffUnionsBothSignals) {
    Trace t = sample();
    auto b = t.blocks[0];
    b.number = 12;
    b.transactions.push_back(plain_tx(1, addr(6), 21000));
    t.blocks.push_back(b);
    MempoolLog log;
    log.observe(t.blocks[0].transactions[0].hash, 1);
    log.observe(t.blocks[1].transactions[0].hash, 1); // broadcast, but pays zero gas
    auto r = diff_private_transactions(t, log);
    EXPECT_EQ(r.total_transactions, 4u);
    EXPECT_EQ(r.zero_gas_price.size(), 1u);
    EXPECT_EQ(r.not_broadcast.size(), 1u); // block 12 repeats block 10's hash
    EXPECT_EQ(r.all.size(), 2u);
}
