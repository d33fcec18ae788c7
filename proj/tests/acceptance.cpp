// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <sstream>

#include "truth_match.hpp"

using namespace bev;
using namespace testing_util;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::printf("[%s] criterion %2d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void equilibrium() {
    const auto t0 = Clock::now();
    bool ok = auction::nash_bid(2, 10) == 5.0;
    std::string detail;
    for (unsigned n : {2u, 5u, 10u}) {
        auto c = auction::expected_max_bid({0, n, 1.0, 1000 + n}, 1'000'000);
        const double z = std::abs(c.monte_carlo.mean - c.analytic) / c.monte_carlo.stderr_;
        ok = ok && z < 3;
        detail += fmt("n=%u mc=%.5f analytic=%.5f z=%.2f; ", n, c.monte_carlo.mean, c.analytic, z);
    }
    const double dt = seconds_since(t0);
    ok = ok && dt < 10;
    report(1, ok, detail + fmt("nash_bid(2,10)=%g; %.2fs", auction::nash_bid(2, 10), dt));
}

void interval_equivalence() {
    Stream s(6, 6);
    std::size_t disagree = 0, prevented = 0;
    for (int i = 0; i < 100'000; ++i) {
        const double alpha = s.uniform();
        const double pr = 1.0 - s.uniform();
        const double fee = s.uniform(0.001, 10);
        const double revenue = fee * s.uniform(0, 4.0 / pr);
        auto a = auction::is_propagation_prevented(alpha, pr, revenue, fee);
        auto b = auction::propagation_from_payoffs(alpha, pr, revenue, fee);
        disagree += a.protogenetic != b.protogenetic || a.prevented != b.prevented;
        prevented += a.prevented;
    }
    report(2, disagree == 0, fmt("100000 draws, %zu disagreements (%zu prevented)", disagree, prevented));
}

void network_impact() {
    auto txs = auction::synthetic_revenue_fees(100'000, 8);
    std::vector<double> alphas;
    for (int k = 0; k < 20; ++k) alphas.push_back(0.95 * k / 19.0);
    auto pts = auction::simulate_network_impact(txs, alphas, 8);
    bool ok = pts.size() == 20 && pts[0].prevented == 0;
    for (std::size_t k = 1; k < pts.size(); ++k) ok = ok && pts[k].prevented >= pts[k - 1].prevented;
    report(3, ok, fmt("20 alphas, f(0)=%.4f f(0.5)=%.4f f(0.95)=%.4f, non-decreasing", pts[0].fraction_prevented,
                      pts[10].fraction_prevented, pts.back().fraction_prevented));
}

// ---- boundary blocks for criterion 4 ------------------------------------------------

Transaction swap(Address sender, const char* in, Amount a_in, const char* out, Amount a_out) {
    Transaction tx;
    tx.sender = sender;
    tx.gas_used = 100'000;
    tx.gas_price = kGwei;
    tx.events.push_back(SwapEvent{"uni", "m", {in, std::move(a_in), out, std::move(a_out)}});
    return tx;
}

bool sandwich_at(const Amount& front_out, const Amount& back_in) {
    Block b;
    b.number = 1;
    b.gas_limit = 30'000'000;
    b.transactions = {swap(Address::from_counter(1), "X", 1000, "Y", front_out), swap(Address::from_counter(2), "X", 5, "Y", 4),
                      swap(Address::from_counter(1), "Y", back_in, "X", 1100)};
    for (std::uint32_t i = 0; i < 3; ++i) b.transactions[i].index = i;
    return detect_sandwiches(b).size() == 1;
}

bool clogging_at(unsigned blocks, std::uint64_t gas) {
    std::vector<Block> chain;
    for (unsigned i = 0; i < blocks; ++i) {
        Block b;
        b.number = 100 + i;
        b.gas_limit = 1'000'000;
        Transaction tx;
        tx.sender = Address::from_counter(9);
        tx.gas_used = gas;
        b.transactions.push_back(tx);
        chain.push_back(b);
    }
    return detect_clogging_periods(chain).size() == 1;
}

void detector_truth() {
    const auto t0 = Clock::now();
    const Fixture fx = generate_fixture(acceptance_spec(2024));
    const auto scan = scan_trace(fx.trace, {}, default_thread_count());
    const auto s = score_scan(scan, fx.truth);
    bool ok = true;
    std::string detail;
    auto add = [&](const char* name, const Score& sc) {
        ok = ok && sc.perfect() && sc.truth >= 100;
        detail += fmt("%s P=%.3f R=%.3f (%zu planted); ", name, sc.precision(), sc.recall(), sc.truth);
    };
    add("sandwich", s.sandwich);
    add("arbitrage", s.arbitrage);
    add("liquidation", s.liquidation);
    add("clogging", s.clogging);

    // 10000 * 0.9 = 9000 and 10000 * 1.1 = 11000 inside; 8999 = 89.99%, 11001 = 110.01% outside.
    const bool h5 = sandwich_at(10000, 9000) && sandwich_at(10000, 11000) && !sandwich_at(10000, 8999) && !sandwich_at(10000, 11001);
    const bool clog = !clogging_at(4, 900'000) && clogging_at(5, 900'000) && !clogging_at(6, 800'000) && clogging_at(6, 800'001);
    ok = ok && h5 && clog;
    report(4, ok, detail + fmt("volume bounds %s, clogging bounds %s; %zu blocks, %.1fs", h5 ? "ok" : "BAD", clog ? "ok" : "BAD",
                               fx.trace.blocks.size(), seconds_since(t0)));
}

void bid_rounds() {
    const auto r105 = estimate_bid_rounds(Amount(105), Amount(100));
    // 1.1^2 * (1 + 1e-9) = 1.21000000121
    const auto r121 = estimate_bid_rounds(Amount("121000000121"), Amount("100000000000"));
    const auto r_hi = estimate_bid_rounds(Amount(14642), Amount(10000)); // just above 1.1^4 = 1.4641
    const auto r_at = estimate_bid_rounds(Amount(14641), Amount(10000));
    const bool ok = r105->estimated_bids == 1 && r121->estimated_bids == 3 && r_hi->estimated_bids >= 5 && r_at->estimated_bids == 4;
    report(5, ok, fmt("1.05->%d, 1.1^2(1+1e-9)->%d, 1.1^4->%d, 1.4642->%d", r105->estimated_bids, r121->estimated_bids,
                      r_at->estimated_bids, r_hi->estimated_bids));
}

std::string serialize(const ReplayScan& s) {
    std::ostringstream out;
    for (const auto& c : s.all)
        out << c.block_number << ' ' << c.victim_index << ' ' << to_string(c.pattern_class) << ' ' << c.profit_native << ' '
            << c.miner_only << ' ' << c.replay.input.size() << '\n';
    out << s.total_profit << ' ' << s.evaluated << '\n';
    return out.str();
}

void replay_corpus() {
    FixtureSpec spec;
    spec.seed = 31;
    spec.n_blocks = 20;
    spec.planted.replayables = 40;
    const Fixture fx = generate_fixture(spec);
    const auto scan = scan_replayable(fx.trace, fx.truth.adversary, true);
    std::map<std::pair<std::uint64_t, std::uint32_t>, const PlantedReplay*> truth;
    std::set<ContractPattern> patterns;
    std::set<Address> contracts;
    for (const auto& p : fx.truth.replays) {
        truth[{p.block_number, p.tx_index}] = &p;
        patterns.insert(p.pattern);
        contracts.insert(p.contract);
    }
    std::size_t bad = 0, miner_only = 0;
    for (const auto& c : scan.all) {
        auto it = truth.find({c.block_number, c.victim_index});
        if (it == truth.end()) {
            ++bad;
            continue;
        }
        const PlantedReplay& p = *it->second;
        bool good = c.miner_only == p.miner_only;
        switch (p.pattern) {
        case ContractPattern::TransferRevenueToSender: good = good && c.pattern_class == ReplayPattern::SenderBenefits; break;
        case ContractPattern::SpecifyBeneficiary: good = good && c.pattern_class == ReplayPattern::ControllableInput; break;
        default: good = good && c.profit_native <= 0;
        }
        bad += !good;
        miner_only += c.miner_only;
    }
    const bool deterministic = serialize(scan) == serialize(scan_replayable(fx.trace, fx.truth.adversary, true));
    const bool ok = bad == 0 && scan.all.size() == fx.truth.replays.size() && contracts.size() >= 25 && patterns.size() == 4 &&
                    miner_only > 0 && deterministic;
    report(6, ok, fmt("%zu contracts, %zu patterns, %zu misclassified, %zu miner-only, %zu profitable, repeat scan %s",
                      contracts.size(), patterns.size(), bad, miner_only, scan.candidates.size(),
                      deterministic ? "identical" : "DIFFERENT"));
}

void arbitrage_state() {
    const Fixture fx = generate_fixture(acceptance_spec(77));
    const auto scan = scan_trace(fx.trace, DetectorSet::parse("arbitrage"), default_thread_count());
    std::map<std::pair<std::uint64_t, std::uint32_t>, ArbitrageState> found;
    for (const auto& c : scan.arbitrages) found[{c.block_number, c.tx_index}] = c.state_class;
    std::size_t agree = 0, block_state = 0;
    for (const auto& a : fx.truth.arbitrages) {
        auto it = found.find({a.block_number, a.tx_index});
        agree += it != found.end() && it->second == a.state;
        block_state += a.state == ArbitrageState::BlockState;
    }
    const std::size_t n = fx.truth.arbitrages.size();
    report(7, n > 0 && agree == n,
           fmt("%zu/%zu planted cycles agree (%zu block-state, %zu network-state)", agree, n, block_state, n - block_state));
}

void amm_fuzz() {
    Stream s(88, 0);
    std::size_t product_drops = 0, round_trip_gains = 0;
    const Amount e18 = native_unit();
    for (int i = 0; i < 1'000'000; ++i) {
        PoolState p{"m", "A", "B", Amount(s.below_inclusive(1, 1ULL << 62)) * s.below_inclusive(1, 1'000'000) + 1,
                    Amount(s.below_inclusive(1, 1ULL << 62)) * s.below_inclusive(1, 1'000'000) + 1,
                    static_cast<std::uint32_t>(s.below_inclusive(0, 100))};
        const Amount in = (s.bernoulli(0.5) ? e18 : Amount(1)) * s.below_inclusive(1, 1ULL << 40);
        const Amount k = p.reserve_x * p.reserve_y;
        auto r = amm_swap_out(p, {"A", in});
        product_drops += r.after.reserve_x * r.after.reserve_y < k;
        if (r.output.amount > 0) round_trip_gains += amm_swap_out(r.after, {"B", r.output.amount}).output.amount > in;
    }
    report(8, product_drops == 0 && round_trip_gains == 0,
           fmt("1000000 swaps, %zu product decreases, %zu profitable round trips", product_drops, round_trip_gains));
}

void fork_threshold() {
    std::vector<double> vs{0, 1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 616.6, 700};
    auto curve = forking_threshold_curve(vs);
    bool monotone = true;
    for (std::size_t i = 1; i < curve.size(); ++i) monotone = monotone && curve[i].alpha_star <= curve[i - 1].alpha_star;
    double worst_z = 0;
    for (double alpha : {0.05, 0.15, 0.25, 0.35}) {
        const ForkRaceModel m{10, 4.0};
        const double p = fork::win_probability_dp(m, alpha);
        auto mc = fork::win_probability_mc(m, alpha, 1'000'000, 4);
        worst_z = std::max(worst_z, mc.stderr_ > 0 ? std::abs(mc.p - p) / mc.stderr_ : (mc.p == p ? 0.0 : 1e9));
    }
    const double a4 = curve[3].alpha_star;
    const bool soft = a4 >= 0.05 && a4 <= 0.20;
    report(9, monotone && worst_z < 3 && soft,
           fmt("alpha*(v) non-increasing over %zu points: %s; DP vs MC worst z=%.2f; alpha*(4)=%.4f %s [0.05, 0.20]; "
               "alpha*(616.6)=%.4f",
               vs.size(), monotone ? "yes" : "no", worst_z, a4, soft ? "in" : "outside", curve[11].alpha_star));
}

void throughput() {
    FixtureSpec spec;
    spec.seed = 100'000;
    spec.n_blocks = 100'000;
    spec.planted.sandwiches = 20'000;
    spec.planted.arbitrages_block_state = 5'000;
    spec.planted.arbitrages_network_state = 5'000;
    spec.planted.liquidations_front = 3'000;
    spec.planted.liquidations_back = 3'000;
    spec.planted.clogging_periods = 300;
    spec.planted.private_txs = 2'000;
    spec.noise = 8.5;
    spec.decoys = 500;
    auto t0 = Clock::now();
    const Fixture fx = generate_fixture(spec);
    const double gen = seconds_since(t0);
    std::size_t txs = 0;
    for (const auto& b : fx.trace.blocks) txs += b.transactions.size();
    t0 = Clock::now();
    const auto scan = scan_trace(fx.trace, {}, default_thread_count());
    const double dt = seconds_since(t0);
    const auto s = score_scan(scan, fx.truth);
    const bool exact = s.sandwich.perfect() && s.arbitrage.perfect() && s.liquidation.perfect() && s.clogging.perfect();
    report(10, dt < 60 && exact,
           fmt("%zu blocks, %zu txs, detectors %.1fs on %u thread(s) (fixture build %.1fs), ground truth %s", fx.trace.blocks.size(),
               txs, dt, default_thread_count(), gen, exact ? "exact" : "MISMATCH"));
}

template <class Fn>
void guarded(int id, Fn fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(id, false, std::string("exception: ") + e.what());
    }
}

} // namespace

int main() {
    guarded(1, equilibrium);
    guarded(2, interval_equivalence);
    guarded(3, network_impact);
    guarded(4, detector_truth);
    guarded(5, bid_rounds);
    guarded(6, replay_corpus);
    guarded(7, arbitrage_state);
    guarded(8, amm_fuzz);
    guarded(9, fork_threshold);
    guarded(10, throughput);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
