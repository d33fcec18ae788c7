#include <gtest/gtest.h>

#include "bevscan/bevscan.hpp"

using namespace bev;
using namespace bev::auction;

TEST(Auction, NashBid) {
    EXPECT_DOUBLE_EQ(nash_bid(2, 10), 5.0);
    EXPECT_DOUBLE_EQ(nash_bid(1, 10), 0.0);
    EXPECT_DOUBLE_EQ(nash_bid(10, 100), 90.0);
    EXPECT_THROW(nash_bid(0, 1), PreconditionError);
    for (unsigned n = 1; n < 20; ++n) {
        EXPECT_LT(nash_bid(n, 7), nash_bid(n + 1, 7));
        EXPECT_LT(expected_max_bid_analytic(n, 1), expected_max_bid_analytic(n + 1, 1));
    }
}

TEST(Auction, Payoffs) {
    EXPECT_DOUBLE_EQ(relay_payoff(10, 10, true), 0.0);
    EXPECT_DOUBLE_EQ(relay_payoff(10, 3, false), 0.0);
    EXPECT_DOUBLE_EQ(p2p_expected_payoff(0.5, 0.5, 8, 1), 1.0);
    Stream s(3, 0);
    for (int i = 0; i < 10'000; ++i) {
        const double r = s.uniform(0, 100);
        const double b = s.uniform(0, r);
        ASSERT_GE(relay_payoff(r, b, s.bernoulli(0.5)), 0.0);
    }
}

TEST(Auction, MaxBidMonteCarloMatchesClosedForm) {
    EXPECT_DOUBLE_EQ(expected_max_bid_analytic(2, 1), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(expected_max_bid_analytic(1, 1), 0.0);
    auto cmp = expected_max_bid({0, 5, 1.0, 17}, 200'000, 2);
    EXPECT_NEAR(cmp.monte_carlo.mean, 4.0 / 6.0, 3 * cmp.monte_carlo.stderr_);
    EXPECT_GT(cmp.monte_carlo.stderr_, 0);
}

TEST(Auction, MonteCarloIndependentOfThreadCount) {
    const Scenario sc{0, 3, 2.0, 99};
    auto a = expected_max_bid(sc, 300'000, 1);
    auto b = expected_max_bid(sc, 300'000, 4);
    EXPECT_EQ(a.monte_carlo.mean, b.monte_carlo.mean);
    EXPECT_EQ(a.monte_carlo.stderr_, b.monte_carlo.stderr_);
}

TEST(Auction, PropagationExamples) {
    auto v = is_propagation_prevented(0.5, 0.5, 3, 1);
    EXPECT_TRUE(v.protogenetic);
    EXPECT_TRUE(v.prevented);
    v = is_propagation_prevented(0.0, 0.5, 3, 1);
    EXPECT_TRUE(v.protogenetic);
    EXPECT_FALSE(v.prevented);
    v = is_propagation_prevented(0.5, 0.5, 1.5, 1);
    EXPECT_FALSE(v.protogenetic);
    EXPECT_FALSE(v.prevented);
    // upper bound 1/(0.7 * 0.5) ~ 2.857 < 3
    EXPECT_FALSE(is_propagation_prevented(0.3, 0.5, 3, 1).prevented);
    EXPECT_TRUE(is_propagation_prevented(1.0, 0.5, 1e9, 1).prevented);
    EXPECT_THROW(is_propagation_prevented(0.5, 0.5, 3, 0), PreconditionError);
    EXPECT_THROW(is_propagation_prevented(0.5, 0.0, 3, 1), PreconditionError);
    EXPECT_THROW(is_propagation_prevented(1.5, 0.5, 3, 1), PreconditionError);
}

TEST(Auction, IntervalMatchesPayoffDefinition) {
    Stream s(2024, 1);
    std::size_t disagreements = 0;
    for (int i = 0; i < 100'000; ++i) {
        const double alpha = s.uniform();
        const double pr = 1.0 - s.uniform();
        const double fee = s.uniform(0.01, 10);
        const double revenue = fee * s.uniform(0, 3.0 / pr);
        auto a = is_propagation_prevented(alpha, pr, revenue, fee);
        auto b = propagation_from_payoffs(alpha, pr, revenue, fee);
        if (a.protogenetic != b.protogenetic || a.prevented != b.prevented) ++disagreements;
    }
    EXPECT_EQ(disagreements, 0u);
}

TEST(Auction, NetworkImpactShape) {
    auto txs = synthetic_revenue_fees(20'000, 5);
    std::vector<double> alphas;
    for (int k = 0; k < 20; ++k) alphas.push_back(k / 20.0);
    auto pts = simulate_network_impact(txs, alphas, 5);
    ASSERT_EQ(pts.size(), 20u);
    EXPECT_EQ(pts[0].prevented, 0u);
    for (std::size_t k = 1; k < pts.size(); ++k) EXPECT_GE(pts[k].prevented, pts[k - 1].prevented);
    EXPECT_GT(pts.back().fraction_prevented, 0.0);
    EXPECT_LT(pts.back().fraction_prevented, 1.0);
    EXPECT_EQ(simulate_network_impact(txs, alphas, 5)[7].prevented, pts[7].prevented);
    std::vector<RevenueFee> bad{{1, 0}};
    EXPECT_THROW(simulate_network_impact(bad, alphas, 1), PreconditionError);
}
