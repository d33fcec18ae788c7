#pragma once

// Depth-bounded fork race. The attacker forks one block back, so it starts one block
// behind (lead -1). Each step it finds the next block with probability alpha (lead +1,
// one more private block), otherwise the honest chain grows (lead -1). Reaching lead >= 1
// wins the prize v on top of the block rewards the private chain would have earned by
// honest mining anyway. At any point it may give up, forfeiting the private blocks mined
// so far; at step d it must give up.

#include <cmath>
#include <iostream>
#include <vector>

#include "bevscan/core/error.hpp"
#include "bevscan/core/numeric.hpp"
#include "bevscan/core/parallel.hpp"
#include "bevscan/core/rng.hpp"
#include "bevscan/io/trace.hpp"

namespace bev {

struct BevMultiplier {
    std::uint64_t block_number = 0;
    Amount bev_native;
    Amount denominator;
    Rational v;

    friend bool operator==(const BevMultiplier&, const BevMultiplier&) = default;
};

struct MultiplierHistogram {
    std::vector<BevMultiplier> blocks;
    std::vector<std::pair<Rational, std::size_t>> at_least; // (k, #blocks with v >= k)
    std::vector<std::uint64_t> skipped;                     // zero denominator
};

/// bev_per_block[i] belongs to trace.blocks[i]. Blocks with a zero reward-plus-fees are
/// skipped with a warning on `warn`.
inline MultiplierHistogram bev_multiplier_histogram(const Trace& trace, std::span<const Amount> bev_per_block,
                                                    std::span<const Rational> thresholds, std::ostream* warn = &std::cerr) {
    if (bev_per_block.size() != trace.blocks.size()) throw PreconditionError("one BEV value per block is required");
    MultiplierHistogram h;
    for (std::size_t i = 0; i < trace.blocks.size(); ++i) {
        const Block& b = trace.blocks[i];
        if (b.block_reward_plus_fees <= 0) {
            h.skipped.push_back(b.number);
            if (warn) *warn << "warning: block " << b.number << " has zero reward plus fees, skipped\n";
            continue;
        }
        h.blocks.push_back({b.number, bev_per_block[i], b.block_reward_plus_fees,
                            Rational(bev_per_block[i], b.block_reward_plus_fees)});
    }
    for (const auto& k : thresholds) {
        std::size_t n = 0;
        for (const auto& m : h.blocks)
            if (m.v >= k) ++n;
        h.at_least.emplace_back(k, n);
    }
    return h;
}

struct ForkRaceModel {
    unsigned max_depth = 10;
    double v = 0.0;
};

namespace fork {

inline constexpr double kPayoffEpsilon = 1e-12;
inline constexpr double kAlphaTolerance = 1e-4;

/// States (lead, private blocks, step). Lead ranges over [-1 - d, d - 1]; private blocks
/// over [0, d].
class Table {
public:
    explicit Table(unsigned d) : d_(d), lead_span_(2 * d + 1), data_((d + 1) * (d + 1) * lead_span_, 0.0) {}
    double& at(int lead, unsigned a, unsigned t) { return data_[index(lead, a, t)]; }
    double at(int lead, unsigned a, unsigned t) const { return data_[index(lead, a, t)]; }

private:
    std::size_t index(int lead, unsigned a, unsigned t) const {
        const std::size_t l = static_cast<std::size_t>(lead + static_cast<int>(d_) + 1);
        return (static_cast<std::size_t>(t) * (d_ + 1) + a) * lead_span_ + l;
    }
    unsigned d_;
    std::size_t lead_span_;
    std::vector<double> data_;
};

struct Solution {
    double value = 0.0; // attacker payoff relative to honest mining, in block rewards
    Table cont;         // continuation value for non-terminal states
    Table best;         // max(give up, continue)
};

inline void check(const ForkRaceModel& m, double alpha) {
    if (m.max_depth < 1) throw PreconditionError("max_depth must be at least 1");
    if (!(m.v >= 0)) throw PreconditionError("v must be non-negative");
    if (!(alpha >= 0 && alpha <= 1)) throw PreconditionError("alpha must lie in [0, 1]");
}

/// Backward induction over the race chain with optimal stopping.
inline Solution solve(const ForkRaceModel& m, double alpha) {
    check(m, alpha);
    const unsigned d = m.max_depth;
    Solution s{0.0, Table(d), Table(d)};
    for (int t = static_cast<int>(d); t >= 0; --t) {
        const unsigned tu = static_cast<unsigned>(t);
        for (unsigned a = 0; a <= tu; ++a) {
            // lead = -1 + a - (t - a)
            const int lead = -1 + 2 * static_cast<int>(a) - t;
            if (lead >= 1) {
                s.best.at(lead, a, tu) = m.v;
                continue;
            }
            const double give_up = -static_cast<double>(a);
            if (tu == d) {
                s.best.at(lead, a, tu) = give_up;
                continue;
            }
            const double cont = alpha * s.best.at(lead + 1, a + 1, tu + 1) + (1 - alpha) * s.best.at(lead - 1, a, tu + 1);
            s.cont.at(lead, a, tu) = cont;
            s.best.at(lead, a, tu) = std::max(give_up, cont);
        }
    }
    s.value = s.best.at(-1, 0, 0);
    return s;
}

inline double race_value(const ForkRaceModel& m, double alpha) { return solve(m, alpha).value; }

inline bool keeps_racing(const Solution& s, int lead, unsigned a, unsigned t) {
    return s.cont.at(lead, a, t) > -static_cast<double>(a);
}

/// Probability that the optimal policy wins, by forward propagation of state mass.
inline double win_probability_dp(const ForkRaceModel& m, double alpha) {
    const Solution s = solve(m, alpha);
    const unsigned d = m.max_depth;
    Table mass(d);
    mass.at(-1, 0, 0) = 1.0;
    double win = 0.0;
    for (unsigned t = 0; t < d; ++t) {
        for (unsigned a = 0; a <= t; ++a) {
            const int lead = -1 + 2 * static_cast<int>(a) - static_cast<int>(t);
            const double p = mass.at(lead, a, t);
            if (p == 0.0 || lead >= 1 || !keeps_racing(s, lead, a, t)) continue;
            if (lead + 1 >= 1)
                win += p * alpha;
            else
                mass.at(lead + 1, a + 1, t + 1) += p * alpha;
            mass.at(lead - 1, a, t + 1) += p * (1 - alpha);
        }
    }
    return win;
}

struct WinEstimate {
    double p = 0.0;
    double stderr_ = 0.0;
    std::uint64_t trials = 0;
};

/// Simulates the same optimal policy step by step.
inline WinEstimate win_probability_mc(const ForkRaceModel& m, double alpha, std::uint64_t trials, std::uint64_t seed) {
    const Solution s = solve(m, alpha);
    Stream rng(seed, 0xF0);
    std::uint64_t wins = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        int lead = -1;
        unsigned a = 0;
        for (unsigned t = 0; t < m.max_depth; ++t) {
            if (!keeps_racing(s, lead, a, t)) break;
            if (rng.bernoulli(alpha)) {
                ++lead;
                ++a;
            } else {
                --lead;
            }
            if (lead >= 1) {
                ++wins;
                break;
            }
        }
    }
    WinEstimate e;
    e.trials = trials;
    if (trials == 0) return e;
    e.p = static_cast<double>(wins) / static_cast<double>(trials);
    e.stderr_ = std::sqrt(e.p * (1 - e.p) / static_cast<double>(trials));
    return e;
}

} // namespace fork

/// Smallest alpha (to 1e-4) at which racing beats honest mining. 1 when no alpha < 1 does.
inline double forking_threshold(const ForkRaceModel& m) {
    fork::check(m, 0.0);
    auto profitable = [&](double alpha) { return fork::race_value(m, alpha) > fork::kPayoffEpsilon; };
    if (!profitable(1.0 - fork::kAlphaTolerance)) return 1.0;
    double lo = 0.0, hi = 1.0 - fork::kAlphaTolerance;
    while (hi - lo > fork::kAlphaTolerance / 2) {
        const double mid = (lo + hi) / 2;
        (profitable(mid) ? hi : lo) = mid;
    }
    return hi;
}

struct ThresholdPoint {
    double v = 0.0;
    double alpha_star = 0.0;
};

inline std::vector<ThresholdPoint> forking_threshold_curve(std::span<const double> vs, unsigned max_depth = 10,
                                                           unsigned threads = default_thread_count()) {
    return parallel_map<ThresholdPoint>(vs.size(), threads, [&](std::size_t i) {
        return ThresholdPoint{vs[i], forking_threshold({max_depth, vs[i]})};
    });
}

} // namespace bev
