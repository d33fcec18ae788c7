#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "bevscan/core/error.hpp"
#include "bevscan/core/parallel.hpp"
#include "bevscan/core/rng.hpp"

namespace bev::auction {

struct Scenario {
    double alpha = 0.0; // relay miners' share of hash rate
    unsigned n = 2;     // bidders
    double r_max = 1.0; // revenues ~ U(0, r_max)
    std::uint64_t rng_seed = 0;
};

/// Expected payoff of broadcasting a bid in the P2P (all-pay) auction:
/// (1 - alpha) * pr * R - b. The fee is owed whether or not the bid wins.
inline double p2p_expected_payoff(double alpha, double pr, double revenue, double bid) {
    return (1.0 - alpha) * pr * revenue - bid;
}

/// Payoff in the sealed-bid relay auction: R - b for the winner, nothing otherwise.
inline double relay_payoff(double revenue, double bid, bool won) { return won ? revenue - bid : 0.0; }

/// Bayesian Nash bid with n bidders whose revenues are iid uniform.
inline double nash_bid(unsigned n, double revenue) {
    if (n < 1) throw PreconditionError("nash_bid needs at least one bidder");
    return static_cast<double>(n - 1) / static_cast<double>(n) * revenue;
}

/// Miner's expected revenue, E[max bid] = (n - 1) / (n + 1) * R_max.
inline double expected_max_bid_analytic(unsigned n, double r_max) {
    if (n < 1) throw PreconditionError("need at least one bidder");
    return static_cast<double>(n - 1) / static_cast<double>(n + 1) * r_max;
}

struct MonteCarloEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::uint64_t trials = 0;
};

struct MaxBidComparison {
    double analytic = 0.0;
    MonteCarloEstimate monte_carlo;
};

/// Draws a revenue for one bidder. Defaults to U(0, r_max).
using RevenueSampler = std::function<double(Stream&, double r_max)>;

inline double uniform_revenue(Stream& s, double r_max) { return s.uniform(0.0, r_max); }

inline constexpr std::uint64_t kTrialsPerChunk = 1 << 16;

/// Monte Carlo of E[max_i nash_bid(n, R_i)]. Trials are split into fixed-size chunks,
/// chunk k drawing from stream (seed, k), and chunk sums are reduced in chunk order, so
/// the estimate does not depend on the worker count.
inline MaxBidComparison expected_max_bid(const Scenario& sc, std::uint64_t trials, unsigned threads = default_thread_count(),
                                         const RevenueSampler& sampler = uniform_revenue) {
    if (sc.n < 1) throw PreconditionError("need at least one bidder");
    if (!(sc.r_max > 0)) throw PreconditionError("r_max must be positive");
    MaxBidComparison out;
    out.analytic = expected_max_bid_analytic(sc.n, sc.r_max);
    if (trials == 0) return out;
    const std::uint64_t chunks = (trials + kTrialsPerChunk - 1) / kTrialsPerChunk;
    struct Sums {
        double sum = 0.0;
        double sum_sq = 0.0;
    };
    auto partial = parallel_map<Sums>(chunks, threads, [&](std::size_t k) {
        Stream stream(sc.rng_seed, k);
        const std::uint64_t begin = k * kTrialsPerChunk;
        const std::uint64_t end = std::min<std::uint64_t>(trials, begin + kTrialsPerChunk);
        Sums s;
        for (std::uint64_t t = begin; t < end; ++t) {
            double best = 0.0;
            for (unsigned i = 0; i < sc.n; ++i) best = std::max(best, nash_bid(sc.n, sampler(stream, sc.r_max)));
            s.sum += best;
            s.sum_sq += best * best;
        }
        return s;
    });
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& p : partial) {
        sum += p.sum;
        sum_sq += p.sum_sq;
    }
    const double n = static_cast<double>(trials);
    const double mean = sum / n;
    const double var = trials > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) : 0.0;
    out.monte_carlo = {mean, std::sqrt(var / n), trials};
    return out;
}

struct PropagationVerdict {
    bool protogenetic = false; // broadcast-worthy with no relay miners
    bool prevented = false;    // protogenetic, but no longer worth broadcasting at alpha
};

/// Revenue-fee interval test: prevented iff 1/pr < R/fee < 1/((1 - alpha) pr).
/// At alpha = 1 the upper bound is unbounded and prevented equals protogenetic.
inline PropagationVerdict is_propagation_prevented(double alpha, double pr, double revenue, double fee) {
    if (!(fee > 0)) throw PreconditionError("fee must be positive");
    if (!(pr > 0 && pr <= 1)) throw PreconditionError("pr must lie in (0, 1]");
    if (!(alpha >= 0 && alpha <= 1)) throw PreconditionError("alpha must lie in [0, 1]");
    const double ratio = revenue / fee;
    PropagationVerdict v;
    v.protogenetic = 1.0 / pr < ratio;
    if (alpha == 1.0)
        v.prevented = v.protogenetic;
    else
        v.prevented = v.protogenetic && ratio < 1.0 / ((1.0 - alpha) * pr);
    return v;
}

/// Same verdict derived from payoffs: protogenetic iff E[u | 0] > 0, prevented iff also
/// E[u | alpha] <= 0.
inline PropagationVerdict propagation_from_payoffs(double alpha, double pr, double revenue, double fee) {
    PropagationVerdict v;
    v.protogenetic = p2p_expected_payoff(0.0, pr, revenue, fee) > 0;
    v.prevented = v.protogenetic && p2p_expected_payoff(alpha, pr, revenue, fee) <= 0;
    return v;
}

struct RevenueFee {
    double revenue = 0.0;
    double fee = 0.0;
};

inline constexpr double kWinProbabilityLow = 0.1;
inline constexpr double kWinProbabilityHigh = 0.9;

struct NetworkImpactPoint {
    double alpha = 0.0;
    double fraction_prevented = 0.0;
    std::size_t prevented = 0;
};

/// For each transaction draws pr ~ U(0.1, 0.9) once (stream (seed, i)) and reuses it
/// across all alphas; returns the prevented fraction per alpha.
inline std::vector<NetworkImpactPoint> simulate_network_impact(std::span<const RevenueFee> txs, std::span<const double> alphas,
                                                               std::uint64_t seed) {
    std::vector<double> pr(txs.size());
    for (std::size_t i = 0; i < txs.size(); ++i) {
        if (!(txs[i].fee > 0)) throw PreconditionError("transaction fees must be positive");
        Stream s(seed, i);
        pr[i] = s.uniform(kWinProbabilityLow, kWinProbabilityHigh);
    }
    std::vector<NetworkImpactPoint> out;
    out.reserve(alphas.size());
    for (double alpha : alphas) {
        NetworkImpactPoint p{alpha, 0.0, 0};
        for (std::size_t i = 0; i < txs.size(); ++i)
            if (is_propagation_prevented(alpha, pr[i], txs[i].revenue, txs[i].fee).prevented) ++p.prevented;
        p.fraction_prevented = txs.empty() ? 0.0 : static_cast<double>(p.prevented) / static_cast<double>(txs.size());
        out.push_back(p);
    }
    return out;
}

/// Heavy-tailed synthetic revenue-fee pairs: fee ~ U(1, 2), R/fee Pareto with minimum
/// `ratio_min` and shape `tail`.
inline std::vector<RevenueFee> synthetic_revenue_fees(std::size_t count, std::uint64_t seed, double ratio_min = 0.5,
                                                      double tail = 0.8) {
    std::vector<RevenueFee> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        Stream s(seed, 0x10000000ULL + i);
        const double fee = s.uniform(1.0, 2.0);
        const double u = 1.0 - s.uniform(); // (0, 1]
        const double ratio = ratio_min / std::pow(u, 1.0 / tail);
        out[i] = {ratio * fee, fee};
    }
    return out;
}

} // namespace bev::auction
