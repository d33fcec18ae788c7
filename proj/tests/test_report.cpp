#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "truth_match.hpp"

using namespace bev;
using namespace testing_util;

namespace {

const Fixture& report_fixture() {
    static const Fixture fx = [] {
        FixtureSpec s;
        s.seed = 7;
        s.n_blocks = 120;
        s.planted.sandwiches = 12;
        s.planted.arbitrages_block_state = 6;
        s.planted.arbitrages_network_state = 6;
        s.planted.liquidations_front = 6;
        s.planted.liquidations_back = 6;
        s.planted.clogging_periods = 3;
        s.planted.private_txs = 4;
        s.noise = 2;
        s.decoys = 2;
        return generate_fixture(s);
    }();
    return fx;
}

std::string render(unsigned threads, const DetectorSet& which = {}) {
    const auto& fx = report_fixture();
    ReportMetadata meta;
    meta.trace_checksum = checksum(serialize_trace(fx.trace));
    meta.seed = 7;
    auto r = build_report(fx.trace, scan_trace(fx.trace, which, threads), which, meta, &fx.mempool, nullptr);
    std::ostringstream out;
    write_report(out, r);
    return out.str();
}

} // namespace

TEST(Report, ByteIdenticalAcrossThreadCounts) {
    const std::string one = render(1);
    EXPECT_EQ(one, render(3));
    EXPECT_EQ(one, render(8));
}

TEST(Report, EveryLineIsJson) {
    std::istringstream in(render(2));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        EXPECT_TRUE(codec::json::accept(line));
        ++n;
    }
    EXPECT_GT(n, 2u);
}

TEST(Report, TotalsEqualInstanceSums) {
    const auto& fx = report_fixture();
    auto scan = scan_trace(fx.trace, {}, 2);
    auto r = build_report(fx.trace, scan, {}, {}, nullptr, nullptr);
    Amount sw, arb, liq;
    for (std::size_t i = 0; i < fx.trace.blocks.size(); ++i) {
        const auto& b = fx.trace.blocks[i];
        for (const auto& s : r.scan.sandwiches)
            if (s.block_number == b.number) sw += report::gross(s, b);
        for (const auto& c : r.scan.arbitrages)
            if (c.block_number == b.number) arb += report::gross(c, b);
    }
    for (const auto& l : r.scan.liquidations)
        if (l.profit_native) liq += *l.profit_native;
    EXPECT_EQ(r.totals.sandwich, sw);
    EXPECT_EQ(r.totals.arbitrage, arb);
    EXPECT_EQ(r.totals.liquidation, liq);
    EXPECT_EQ(r.totals.all(), sw + arb + liq);
    EXPECT_EQ(r.scan.bev_per_block.size(), fx.trace.blocks.size());
    EXPECT_EQ(r.scope.total(), r.scan.arbitrages.size());
}

TEST(Report, DetectorSubset) {
    EXPECT_EQ(DetectorSet::parse("sandwich,clogging").str(), "sandwich,clogging");
    EXPECT_THROW(DetectorSet::parse("sandwich,bogus"), PreconditionError);
    auto scan = scan_trace(report_fixture().trace, DetectorSet::parse("sandwich"), 2);
    EXPECT_FALSE(scan.sandwiches.empty());
    EXPECT_TRUE(scan.arbitrages.empty());
    EXPECT_TRUE(scan.clogging.empty());
}

TEST(Report, TamperedTraceTripsInvariant) {
    // A verify predicate that disagrees with its detector must surface as InvariantViolation.
    Trace t = report_fixture().trace;
    auto scan = scan_trace(t, {}, 1);
    ASSERT_FALSE(scan.clogging.empty());
    auto p = scan.clogging.front();
    p.length_blocks += 1;
    p.end_block += 1;
    EXPECT_FALSE(verify_clogging(t.blocks, p));
}

// ---- command line ---------------------------------------------------------------

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
    const std::string cmd = std::string(BEVSCAN_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("bevscan_cli_" + std::to_string(::getpid()))) { fs::create_directories(path); }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST(Cli, ExitCodes) {
    TempDir dir;
    const auto spec = dir.path / "spec.json";
    std::ofstream(spec) << R"({"seed": 3, "n_blocks": 40, "noise": 1,
        "planted": {"sandwiches": 3, "arbitrages_block_state": 2, "liquidations_front": 2, "clogging_periods": 1, "replayables": 5}})";
    const auto t1 = dir.path / "t1.jsonl", t2 = dir.path / "t2.jsonl";
    EXPECT_EQ(run("fixture-gen --seed 7 --spec " + spec.string() + " --out " + t1.string()), 0);
    EXPECT_EQ(run("fixture-gen --seed 7 --spec " + spec.string() + " --out " + t2.string()), 0);
    EXPECT_EQ(slurp(t1), slurp(t2));
    EXPECT_FALSE(slurp(t1).empty());

    const auto r1 = dir.path / "r1.jsonl", r2 = dir.path / "r2.jsonl";
    EXPECT_EQ(run("detect --trace " + t1.string() + " --out " + r1.string() + " --threads 1"), 0);
    EXPECT_EQ(run("detect --trace " + t1.string() + " --out " + r2.string() + " --threads 4 --emit-plots"), 0);
    EXPECT_EQ(slurp(r1), slurp(r2));
    EXPECT_EQ(run("detect --trace " + t1.string() + " --only sandwich --out " + r1.string()), 0);
    EXPECT_EQ(run("replay-scan --trace " + t1.string() + " --out " + r1.string()), 0);
    EXPECT_EQ(run("private-diff --trace " + t1.string() + " --mempool " + t1.string() + ".mempool.jsonl --out " + r1.string()), 0);
    EXPECT_EQ(run("fork-threshold --v 1,4,16 --out " + r1.string()), 0);
    EXPECT_EQ(run("auction-sim --n 2 --rmax 1 --trials 10000 --seed 1 --impact-txs 1000 --out " + r1.string()), 0);

    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("detect --bogus"), 1);
    EXPECT_EQ(run("detect --trace " + (dir.path / "missing").string() + " --out " + r1.string()), 2);
    const auto broken = dir.path / "broken.jsonl";
    std::ofstream(broken) << "{\"number\": \"x\"}\n";
    EXPECT_EQ(run("detect --trace " + broken.string() + " --out " + r1.string()), 2);
    EXPECT_EQ(run("detect --trace " + t1.string() + " --only nonsense --out " + r1.string()), 2);
}
