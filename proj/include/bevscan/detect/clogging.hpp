#pragma once

#include <map>
#include <unordered_map>

#include "bevscan/chain/valuation.hpp"

namespace bev {

inline constexpr std::uint64_t kMinCloggingBlocks = 5;

struct CloggingPeriod {
    Address address;
    std::uint64_t start_block = 0;
    std::uint64_t end_block = 0;
    std::uint64_t length_blocks = 0;
    Rational avg_gas_share;
    Amount total_cost_native;
    std::uint64_t total_gas_used = 0;

    OrderingStrategy strategy() const { return OrderingStrategy::Clogging; }

    friend bool operator==(const CloggingPeriod&, const CloggingPeriod&) = default;
};

namespace clogging {

struct Usage {
    std::uint64_t gas = 0;
    Amount cost;
};

/// Gas attributed to every address in a block. A transaction counts toward its sender
/// and toward its `to` contract (once when both coincide).
inline std::unordered_map<Address, Usage> attribute_gas(const Block& block) {
    std::unordered_map<Address, Usage> usage;
    for (const auto& tx : block.transactions) {
        const Amount cost = gas_cost(tx);
        auto& s = usage[tx.sender];
        s.gas += tx.gas_used;
        s.cost += cost;
        if (tx.to && *tx.to != tx.sender) {
            auto& c = usage[*tx.to];
            c.gas += tx.gas_used;
            c.cost += cost;
        }
    }
    return usage;
}

/// Strictly more than 80% of the block's gas limit.
inline bool saturates(std::uint64_t gas, std::uint64_t gas_limit) {
    return static_cast<unsigned __int128>(gas) * 10 > static_cast<unsigned __int128>(gas_limit) * 8;
}

} // namespace clogging

/// Maximal runs of consecutive block numbers in which one address consumes more than
/// 80% of each block's gas limit, kept when at least five blocks long. Output is sorted
/// by (start_block, address).
inline std::vector<CloggingPeriod> detect_clogging_periods(std::span<const Block> blocks) {
    struct Run {
        std::uint64_t start = 0;
        std::uint64_t last = 0;
        std::uint64_t length = 0;
        Rational share_sum;
        Amount cost;
        std::uint64_t gas = 0;
    };
    std::map<Address, Run> open;
    std::vector<CloggingPeriod> out;

    auto close = [&](const Address& addr, const Run& r) {
        if (r.length < kMinCloggingBlocks) return;
        out.push_back({addr, r.start, r.last, r.length, r.share_sum / Rational(r.length), r.cost, r.gas});
    };

    for (const Block& b : blocks) {
        std::map<Address, Run> next;
        if (b.gas_limit > 0) {
            for (auto& [addr, u] : clogging::attribute_gas(b)) {
                if (!clogging::saturates(u.gas, b.gas_limit)) continue;
                Run r;
                auto it = open.find(addr);
                if (it != open.end() && it->second.last + 1 == b.number) {
                    r = std::move(it->second);
                    open.erase(it);
                } else {
                    r.start = b.number;
                }
                r.last = b.number;
                ++r.length;
                r.share_sum += Rational(u.gas, b.gas_limit);
                r.cost += u.cost;
                r.gas += u.gas;
                next.emplace(addr, std::move(r));
            }
        }
        for (const auto& [addr, r] : open) close(addr, r);
        open = std::move(next);
    }
    for (const auto& [addr, r] : open) close(addr, r);
    std::sort(out.begin(), out.end(), [](const CloggingPeriod& a, const CloggingPeriod& b) {
        return std::tie(a.start_block, a.address) < std::tie(b.start_block, b.address);
    });
    return out;
}

/// One row per five-block duration bucket (5-9, 10-14, ...), averages per period.
struct CloggingRow {
    std::uint64_t min_blocks = 0;
    std::uint64_t max_blocks = 0;
    std::size_t count = 0;
    Rational avg_gas_used;
    Rational avg_cost_native;
};

inline std::vector<CloggingRow> clogging_table(std::span<const CloggingPeriod> periods) {
    struct Acc {
        std::size_t n = 0;
        Amount gas;
        Amount cost;
    };
    std::map<std::uint64_t, Acc> acc;
    for (const auto& p : periods) {
        auto& a = acc[p.length_blocks / 5];
        a.n++;
        a.gas += p.total_gas_used;
        a.cost += p.total_cost_native;
    }
    std::vector<CloggingRow> rows;
    for (const auto& [k, a] : acc)
        rows.push_back({k * 5, k * 5 + 4, a.n, Rational(a.gas, Amount(a.n)), Rational(a.cost, Amount(a.n))});
    return rows;
}

/// Independent re-check: recomputes the run block by block from the raw transactions.
inline bool verify_clogging(std::span<const Block> blocks, const CloggingPeriod& p) {
    auto share_above = [&](const Block& b) {
        std::uint64_t gas = 0;
        for (const auto& tx : b.transactions)
            if (tx.sender == p.address || (tx.to && *tx.to == p.address)) gas += tx.gas_used;
        return b.gas_limit > 0 && Rational(gas, b.gas_limit) > Rational(8, 10);
    };
    if (p.length_blocks < kMinCloggingBlocks || p.end_block - p.start_block + 1 != p.length_blocks) return false;
    const Block* before = nullptr;
    const Block* after = nullptr;
    std::uint64_t covered = 0;
    for (const auto& b : blocks) {
        if (b.number + 1 == p.start_block) before = &b;
        if (b.number == p.end_block + 1) after = &b;
        if (b.number >= p.start_block && b.number <= p.end_block) {
            if (!share_above(b)) return false;
            ++covered;
        }
    }
    if (covered != p.length_blocks) return false;
    if (before && share_above(*before)) return false; // not maximal
    if (after && share_above(*after)) return false;
    return true;
}

} // namespace bev
