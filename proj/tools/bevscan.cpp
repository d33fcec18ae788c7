// bevscan: detectors, replay scan, auction and fork analyses over trace files.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bevscan/bevscan.hpp"

namespace {

using bev::codec::json;

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kInvariant = 3 };

struct Common {
    std::string out;
    bool emit_plots = false;
    std::uint64_t seed = 0;
    unsigned threads = bev::default_thread_count();
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out", c.out, "Report path (stdout when omitted)");
    sub->add_flag("--emit-plots", c.emit_plots, "Write plot-ready CSV sidecars next to --out");
    sub->add_option("--seed", c.seed, "Seed for every random draw");
    sub->add_option("--threads", c.threads, std::string("Worker threads (default from ") + bev::kThreadsEnv + ")");
}

/// Writes `body` to --out, or stdout. The file is written in one go so a failed run
/// leaves no partial report behind.
void emit(const Common& c, const std::string& body) {
    if (c.out.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw bev::Error("cannot write '" + c.out + "'");
    f << body;
}

void sidecar(const Common& c, const std::string& name, const std::string& csv) {
    if (!c.emit_plots) return;
    if (c.out.empty()) throw bev::PreconditionError("--emit-plots needs --out");
    std::ofstream f(c.out + "." + name + ".csv", std::ios::binary);
    if (!f) throw bev::Error("cannot write plot sidecar for '" + c.out + "'");
    f << csv;
}

std::string metadata_line(std::uint32_t checksum, std::uint64_t seed, std::vector<std::pair<std::string, std::string>> flags) {
    bev::ReportMetadata m;
    m.trace_checksum = checksum;
    m.seed = seed;
    m.flags = std::move(flags);
    return bev::codec::encode_metadata(m).dump() + "\n";
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw bev::Error("cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bev::Trace load(const std::string& path, std::uint32_t& checksum) {
    const std::string bytes = read_file(path);
    checksum = bev::checksum(bytes);
    std::istringstream in(bytes);
    return bev::parse_trace(in);
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream s(csv);
    std::string item;
    while (std::getline(s, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw bev::PreconditionError("not a number: '" + item + "'");
        }
    }
    return out;
}

// ---- detect ---------------------------------------------------------------------------

struct DetectArgs {
    Common c;
    std::string trace, only, mempool;
};

int run_detect(const DetectArgs& a) {
    const bev::DetectorSet which = a.only.empty() ? bev::DetectorSet{} : bev::DetectorSet::parse(a.only);
    std::uint32_t crc = 0;
    const bev::Trace trace = load(a.trace, crc);
    std::optional<bev::MempoolLog> mempool;
    if (!a.mempool.empty()) mempool = bev::load_mempool_log(a.mempool);

    bev::ReportMetadata meta;
    meta.trace_checksum = crc;
    meta.seed = a.c.seed;
    meta.flags = {{"command", "detect"}, {"only", which.str()}, {"mempool", mempool ? "yes" : "no"}};
    auto scan = bev::scan_trace(trace, which, a.c.threads);
    const auto report = bev::build_report(trace, std::move(scan), which, meta, mempool ? &*mempool : nullptr);

    std::ostringstream out;
    bev::write_report(out, report);
    emit(a.c, out.str());

    if (a.c.emit_plots) {
        std::ostringstream pos, bids, mult, scope, clog;
        pos << "intermediate_txs,public,private\n";
        std::set<std::uint32_t> keys;
        for (const auto& [k, v] : report.positions.public_counts) keys.insert(k);
        for (const auto& [k, v] : report.positions.private_counts) keys.insert(k);
        auto get = [](const std::map<std::uint32_t, std::size_t>& m, std::uint32_t k) {
            auto it = m.find(k);
            return it == m.end() ? std::size_t{0} : it->second;
        };
        for (auto k : keys) pos << k << ',' << get(report.positions.public_counts, k) << ',' << get(report.positions.private_counts, k) << '\n';
        bids << "bucket,count\n";
        for (const auto& [b, n] : report.bid_rounds) bids << bev::to_string(b) << ',' << n << '\n';
        mult << "block,bev,reward_plus_fees,v\n";
        for (const auto& m : report.multipliers.blocks)
            mult << m.block_number << ',' << m.bev_native << ',' << m.denominator << ',' << fmt(bev::to_double(m.v)) << '\n';
        scope << "markets,platforms_1,platforms_2,platforms_3,platforms_4plus\n";
        static const char* kRows[] = {"2", "3", "4", "5", ">=6"};
        for (std::size_t r = 0; r < 5; ++r) {
            scope << kRows[r];
            for (std::size_t col = 0; col < 4; ++col)
                scope << ',' << (bev::ScopeTable::impossible(r, col) ? std::string("-") : std::to_string(report.scope.counts[r][col]));
            scope << '\n';
        }
        clog << "min_blocks,max_blocks,count,avg_gas_used,avg_cost\n";
        for (const auto& row : report.clogging_table)
            clog << row.min_blocks << ',' << row.max_blocks << ',' << row.count << ',' << fmt(bev::to_double(row.avg_gas_used))
                 << ',' << fmt(bev::to_double(row.avg_cost_native)) << '\n';
        sidecar(a.c, "positions", pos.str());
        sidecar(a.c, "bid_rounds", bids.str());
        sidecar(a.c, "multipliers", mult.str());
        sidecar(a.c, "scope", scope.str());
        sidecar(a.c, "clogging", clog.str());
    }
    return kOk;
}

// ---- replay-scan ----------------------------------------------------------------------

struct ReplayArgs {
    Common c;
    std::string trace, adversary;
};

int run_replay(const ReplayArgs& a) {
    std::uint32_t crc = 0;
    const bev::Trace trace = load(a.trace, crc);
    const bev::Address adversary = a.adversary.empty() ? bev::default_adversary() : bev::Address::from_hex(a.adversary);
    const auto scan = bev::scan_replayable(trace, adversary);

    std::ostringstream out;
    out << metadata_line(crc, a.c.seed, {{"command", "replay-scan"}, {"adversary", adversary.hex()}});
    for (const auto& c : scan.candidates) {
        json gains = json::array();
        for (const auto& g : c.token_gains) gains.push_back(bev::codec::encode(g));
        json left = json::array();
        for (const auto& g : c.unconverted_tokens) left.push_back(bev::codec::encode(g));
        out << json{{"type", "replay"},
                    {"block", std::to_string(c.block_number)},
                    {"victim_index", std::to_string(c.victim_index)},
                    {"victim_hash", c.victim_hash.hex()},
                    {"victim_sender", c.victim_sender.hex()},
                    {"substitutions", std::to_string(c.substitution_count)},
                    {"gas_price", c.gas_price_used.str()},
                    {"outcome", c.replay_outcome == bev::TxStatus::Success ? "success" : "reverted"},
                    {"profit", c.profit_native.str()},
                    {"pattern", std::string(bev::to_string(c.pattern_class))},
                    {"token_gains", gains},
                    {"unconverted_tokens", left},
                    {"required_capital", c.required_capital.str()},
                    {"capital_bucket", std::string(bev::to_string(bev::capital_bucket(c.required_capital)))},
                    {"miner_only", c.miner_only}}
                   .dump()
            << '\n';
    }
    json capital = json::object();
    for (const auto& [b, row] : scan.capital)
        capital[std::string(bev::to_string(b))] = {{"count", std::to_string(row.count)}, {"total_profit", row.total_profit.str()}};
    out << json{{"type", "aggregate"},
                {"evaluated", std::to_string(scan.evaluated)},
                {"profitable", std::to_string(scan.candidates.size())},
                {"skipped_blocks", std::to_string(scan.skipped_blocks)},
                {"unexecutable", std::to_string(scan.unexecutable)},
                {"miner_only", std::to_string(scan.miner_only)},
                {"total_profit", scan.total_profit.str()},
                {"capital", capital}}
               .dump()
        << '\n';
    emit(a.c, out.str());

    std::ostringstream csv;
    csv << "bucket,count,total_profit\n";
    for (const auto& [b, row] : scan.capital) csv << bev::to_string(b) << ',' << row.count << ',' << row.total_profit << '\n';
    sidecar(a.c, "capital", csv.str());
    return kOk;
}

// ---- auction-sim ----------------------------------------------------------------------

struct AuctionArgs {
    Common c;
    std::string scenario;
    std::vector<unsigned> n{2};
    double r_max = 1.0;
    std::uint64_t trials = 1'000'000;
    std::string alphas;
    std::size_t alpha_points = 20;
    std::size_t impact_txs = 100'000;
};

int run_auction(AuctionArgs a) {
    if (!a.scenario.empty()) {
        const json s = json::parse(read_file(a.scenario));
        if (s.contains("n")) {
            a.n.clear();
            const json& n = s.at("n");
            if (n.is_array())
                for (const auto& v : n) a.n.push_back(v.get<unsigned>());
            else
                a.n.push_back(n.get<unsigned>());
        }
        if (s.contains("r_max")) a.r_max = s.at("r_max").get<double>();
        if (s.contains("trials")) a.trials = s.at("trials").get<std::uint64_t>();
        if (s.contains("seed")) a.c.seed = s.at("seed").get<std::uint64_t>();
        if (s.contains("alphas")) {
            a.alphas.clear();
            for (const auto& v : s.at("alphas")) a.alphas += (a.alphas.empty() ? "" : ",") + fmt(v.get<double>());
        }
    }
    std::vector<double> alphas;
    if (!a.alphas.empty()) {
        alphas = parse_list(a.alphas);
    } else {
        if (a.alpha_points < 2) throw bev::PreconditionError("--alpha-points must be at least 2");
        for (std::size_t i = 0; i < a.alpha_points; ++i) alphas.push_back(0.95 * static_cast<double>(i) / static_cast<double>(a.alpha_points - 1));
    }
    for (double x : alphas)
        if (!(x >= 0 && x <= 1)) throw bev::PreconditionError("alphas must lie in [0, 1]");

    std::ostringstream out, max_csv, impact_csv;
    out << metadata_line(0, a.c.seed,
                         {{"command", "auction-sim"}, {"r_max", fmt(a.r_max)}, {"trials", std::to_string(a.trials)},
                          {"impact_txs", std::to_string(a.impact_txs)}});
    max_csv << "n,analytic,monte_carlo,stderr\n";
    for (unsigned n : a.n) {
        bev::auction::Scenario sc{0.0, n, a.r_max, bev::splitmix64(a.c.seed + n)};
        const auto cmp = bev::auction::expected_max_bid(sc, a.trials, a.c.threads);
        const double z = cmp.monte_carlo.stderr_ > 0 ? (cmp.monte_carlo.mean - cmp.analytic) / cmp.monte_carlo.stderr_ : 0.0;
        out << json{{"type", "max_bid"},
                    {"n", n},
                    {"r_max", a.r_max},
                    {"nash_bid_at_r_max", bev::auction::nash_bid(n, a.r_max)},
                    {"analytic", cmp.analytic},
                    {"monte_carlo", cmp.monte_carlo.mean},
                    {"stderr", cmp.monte_carlo.stderr_},
                    {"trials", std::to_string(cmp.monte_carlo.trials)},
                    {"within_3_stderr", std::abs(z) <= 3.0}}
                   .dump()
            << '\n';
        max_csv << n << ',' << fmt(cmp.analytic) << ',' << fmt(cmp.monte_carlo.mean) << ',' << fmt(cmp.monte_carlo.stderr_) << '\n';
    }
    const auto txs = bev::auction::synthetic_revenue_fees(a.impact_txs, a.c.seed);
    const auto impact = bev::auction::simulate_network_impact(txs, alphas, a.c.seed);
    impact_csv << "alpha,fraction_prevented\n";
    for (const auto& p : impact) {
        out << json{{"type", "network_impact"}, {"alpha", p.alpha}, {"fraction_prevented", p.fraction_prevented},
                    {"prevented", std::to_string(p.prevented)}}
                   .dump()
            << '\n';
        impact_csv << fmt(p.alpha) << ',' << fmt(p.fraction_prevented) << '\n';
    }
    emit(a.c, out.str());
    sidecar(a.c, "max_bid", max_csv.str());
    sidecar(a.c, "network_impact", impact_csv.str());
    return kOk;
}

// ---- fork-threshold -------------------------------------------------------------------

struct ForkArgs {
    Common c;
    std::string vs = "0,1,2,4,8,16,32,64,128,256,616.6,700";
    unsigned depth = 10;
    std::string trace;
    std::uint64_t mc_trials = 200'000;
};

int run_fork(const ForkArgs& a) {
    const auto vs = parse_list(a.vs);
    for (double v : vs)
        if (!(v >= 0)) throw bev::PreconditionError("v must be non-negative");
    if (a.depth < 1) throw bev::PreconditionError("--depth must be at least 1");
    std::uint32_t crc = 0;
    std::optional<bev::Trace> trace;
    if (!a.trace.empty()) trace = load(a.trace, crc);

    std::ostringstream out, curve;
    out << metadata_line(crc, a.c.seed, {{"command", "fork-threshold"}, {"v", a.vs}, {"depth", std::to_string(a.depth)}});
    curve << "v,alpha_star\n";
    const auto points = bev::forking_threshold_curve(vs, a.depth, a.c.threads);
    for (const auto& p : points) {
        out << json{{"type", "threshold"}, {"v", p.v}, {"alpha_star", p.alpha_star}}.dump() << '\n';
        curve << fmt(p.v) << ',' << fmt(p.alpha_star) << '\n';
    }
    const bev::ForkRaceModel probe{a.depth, 4.0};
    const double a4 = bev::forking_threshold(probe);
    const double dp = bev::fork::win_probability_dp(probe, 0.3);
    const auto mc = bev::fork::win_probability_mc(probe, 0.3, a.mc_trials, a.c.seed);
    out << json{{"type", "diagnostic"},
                {"alpha_star_v4", a4},
                {"alpha_star_v4_in_0.05_0.20", a4 >= 0.05 && a4 <= 0.20},
                {"win_probability_dp", dp},
                {"win_probability_mc", mc.p},
                {"win_probability_mc_stderr", mc.stderr_},
                {"at_alpha", 0.3},
                {"at_v", 4.0}}
               .dump()
        << '\n';

    if (trace) {
        auto scan = bev::scan_trace(*trace, bev::DetectorSet{}, a.c.threads);
        const auto hist = bev::bev_multiplier_histogram(*trace, scan.bev_per_block, bev::default_multiplier_thresholds());
        json at_least = json::object();
        for (const auto& [k, n] : hist.at_least) at_least[">=" + bev::to_string(k)] = std::to_string(n);
        out << json{{"type", "multipliers"}, {"blocks", std::to_string(hist.blocks.size())}, {"at_least", at_least},
                    {"skipped_blocks", std::to_string(hist.skipped.size())}}
                   .dump()
            << '\n';
    }
    emit(a.c, out.str());
    sidecar(a.c, "fork_threshold", curve.str());
    return kOk;
}

// ---- fixture-gen ----------------------------------------------------------------------

struct FixtureArgs {
    Common c;
    std::string spec;
    bool seed_given = false;
};

int run_fixture(const FixtureArgs& a) {
    bev::FixtureSpec spec;
    if (!a.spec.empty()) spec = bev::codec::decode_fixture_spec(json::parse(read_file(a.spec)));
    if (a.seed_given) spec.seed = a.c.seed;
    if (a.c.out.empty()) throw bev::PreconditionError("fixture-gen needs --out");
    const auto fx = bev::generate_fixture(spec);
    emit(a.c, bev::serialize_trace(fx.trace));
    std::ofstream truth(a.c.out + ".truth.jsonl", std::ios::binary);
    std::ofstream mem(a.c.out + ".mempool.jsonl", std::ios::binary);
    if (!truth || !mem) throw bev::Error("cannot write fixture side files next to '" + a.c.out + "'");
    bev::codec::write_ground_truth(truth, fx.truth);
    bev::write_mempool_log(mem, fx.mempool);
    return kOk;
}

// ---- private-diff ---------------------------------------------------------------------

struct PrivateArgs {
    Common c;
    std::string trace, mempool;
};

int run_private(const PrivateArgs& a) {
    std::uint32_t crc = 0;
    const bev::Trace trace = load(a.trace, crc);
    const auto log = bev::load_mempool_log(a.mempool);
    const auto r = bev::diff_private_transactions(trace, log);
    std::ostringstream out;
    out << metadata_line(crc, a.c.seed, {{"command", "private-diff"}});
    for (const auto& h : r.all)
        out << json{{"type", "private_tx"}, {"hash", h.hex()}, {"not_broadcast", r.not_broadcast.count(h) == 1},
                    {"zero_gas_price", r.zero_gas_price.count(h) == 1}}
                   .dump()
            << '\n';
    out << json{{"type", "aggregate"},
                {"transactions", std::to_string(r.total_transactions)},
                {"not_broadcast", std::to_string(r.not_broadcast.size())},
                {"zero_gas_price", std::to_string(r.zero_gas_price.size())},
                {"union", std::to_string(r.all.size())},
                {"contract_calls", std::to_string(r.contract_calls)}}
               .dump()
        << '\n';
    emit(a.c, out.str());
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MEV / BEV detection and analysis toolkit"};
    app.require_subcommand(1);

    DetectArgs detect;
    auto* d = app.add_subcommand("detect", "Run the sandwich, arbitrage, liquidation and clogging detectors");
    d->add_option("--trace", detect.trace, "Trace file")->required();
    d->add_option("--only", detect.only, "Comma-separated subset: sandwich,arbitrage,liquidation,clogging");
    d->add_option("--mempool", detect.mempool, "Mempool log for private-transaction counts");
    add_common(d, detect.c);

    ReplayArgs replay;
    auto* r = app.add_subcommand("replay-scan", "Find transactions an observer could replay for profit");
    r->add_option("--trace", replay.trace, "Trace file with world-state snapshots")->required();
    r->add_option("--adversary", replay.adversary, "Replaying address (0x-hex)");
    add_common(r, replay.c);

    AuctionArgs auction;
    auto* au = app.add_subcommand("auction-sim", "Relay-auction equilibrium and P2P network impact");
    au->add_option("--scenario", auction.scenario, "JSON scenario {alphas, n, r_max, trials, seed}");
    au->add_option("--n", auction.n, "Bidder counts")->delimiter(',');
    au->add_option("--rmax", auction.r_max, "Upper end of the revenue distribution");
    au->add_option("--trials", auction.trials, "Monte Carlo trials per bidder count");
    au->add_option("--alphas", auction.alphas, "Comma-separated relay hash-rate shares");
    au->add_option("--alpha-points", auction.alpha_points, "Evenly spaced alphas in [0, 0.95] when --alphas is absent");
    au->add_option("--impact-txs", auction.impact_txs, "Synthetic transactions for the network-impact sweep");
    add_common(au, auction.c);

    ForkArgs fork;
    auto* f = app.add_subcommand("fork-threshold", "Forking threshold curve and per-block BEV multipliers");
    f->add_option("--v", fork.vs, "Comma-separated BEV multiples");
    f->add_option("--depth", fork.depth, "Race cutoff in blocks");
    f->add_option("--trace", fork.trace, "Trace for per-block multipliers");
    f->add_option("--mc-trials", fork.mc_trials, "Monte Carlo trials for the win-probability check");
    add_common(f, fork.c);

    FixtureArgs fixture;
    auto* g = app.add_subcommand("fixture-gen", "Generate a synthetic trace with ground truth");
    g->add_option("--spec", fixture.spec, "JSON fixture spec");
    add_common(g, fixture.c);

    PrivateArgs priv;
    auto* p = app.add_subcommand("private-diff", "Transactions mined without being broadcast");
    p->add_option("--trace", priv.trace, "Trace file")->required();
    p->add_option("--mempool", priv.mempool, "Mempool log")->required();
    add_common(p, priv.c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }
    fixture.seed_given = g->count("--seed") > 0;

    try {
        if (*d) return run_detect(detect);
        if (*r) return run_replay(replay);
        if (*au) return run_auction(auction);
        if (*f) return run_fork(fork);
        if (*g) return run_fixture(fixture);
        if (*p) return run_private(priv);
    } catch (const bev::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kInvariant;
    } catch (const bev::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    }
    return kUsage;
}
