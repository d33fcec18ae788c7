#include <gtest/gtest.h>

#include "builders.hpp"

using namespace bev;
using namespace testing_util;

namespace {

// `n` consecutive blocks from 100 where addr(1) burns `gas` of a 1,000,000 limit,
// surrounded by quiet blocks.
std::vector<Block> window(unsigned n, std::uint64_t gas) {
    std::vector<Block> out;
    out.push_back(block(99, {plain_tx(0, addr(2), 21000)}, 1'000'000));
    for (unsigned i = 0; i < n; ++i)
        out.push_back(block(100 + i, {plain_tx(0, addr(1), gas), plain_tx(0, addr(2), 21000)}, 1'000'000));
    out.push_back(block(100 + n, {plain_tx(0, addr(2), 21000)}, 1'000'000));
    return out;
}

} // namespace

TEST(Clogging, MinimumLengthIsFiveBlocks) {
    EXPECT_TRUE(detect_clogging_periods(window(4, 900'000)).empty());
    auto five = window(5, 900'000);
    auto p = detect_clogging_periods(five);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0].address, addr(1));
    EXPECT_EQ(p[0].start_block, 100u);
    EXPECT_EQ(p[0].end_block, 104u);
    EXPECT_EQ(p[0].length_blocks, 5u);
    EXPECT_EQ(p[0].avg_gas_share, Rational(9, 10));
    EXPECT_EQ(p[0].total_gas_used, 4'500'000u);
    EXPECT_EQ(p[0].total_cost_native, Amount(4'500'000) * kGwei);
    EXPECT_TRUE(verify_clogging(five, p[0]));
}

TEST(Clogging, ShareMustExceedEightyPercent) {
    EXPECT_TRUE(detect_clogging_periods(window(6, 800'000)).empty());
    EXPECT_EQ(detect_clogging_periods(window(6, 800'001)).size(), 1u);
}

TEST(Clogging, GapBreaksRun) {
    auto blocks = window(10, 900'000);
    blocks.erase(blocks.begin() + 5); // block 104 missing
    auto p = detect_clogging_periods(blocks);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0].start_block, 105u);
    EXPECT_EQ(p[0].length_blocks, 5u);
}

TEST(Clogging, ContractAttributedAlongsideSender) {
    auto blocks = window(5, 0);
    for (auto& b : blocks) {
        if (b.number < 100 || b.number > 104) continue;
        for (int k = 0; k < 3; ++k) {
            auto tx = plain_tx(0, addr(10 + k), 300'000);
            tx.to = addr(60);
            b.transactions.push_back(tx);
        }
    }
    auto p = detect_clogging_periods(blocks);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0].address, addr(60));
    EXPECT_TRUE(verify_clogging(blocks, p[0]));
}

TEST(Clogging, VerifierRejectsNonMaximalRun) {
    auto blocks = window(7, 900'000);
    auto p = detect_clogging_periods(blocks).at(0);
    p.start_block = 101;
    p.length_blocks = 6;
    EXPECT_FALSE(verify_clogging(blocks, p));
}

TEST(Clogging, TableBuckets) {
    std::vector<CloggingPeriod> ps(3);
    ps[0].length_blocks = 5, ps[0].total_gas_used = 10, ps[0].total_cost_native = 4;
    ps[1].length_blocks = 9, ps[1].total_gas_used = 20, ps[1].total_cost_native = 6;
    ps[2].length_blocks = 12, ps[2].total_gas_used = 7, ps[2].total_cost_native = 1;
    auto rows = clogging_table(ps);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].min_blocks, 5u);
    EXPECT_EQ(rows[0].count, 2u);
    EXPECT_EQ(rows[0].avg_gas_used, Rational(15));
    EXPECT_EQ(rows[1].min_blocks, 10u);
    EXPECT_EQ(rows[1].avg_cost_native, Rational(1));
}
