#pragma once

#include <fstream>
#include <map>
#include <set>

#include "bevscan/io/trace.hpp"

namespace bev {

struct MempoolEntry {
    TxHash hash;
    std::uint64_t first_seen_ms = 0;
};

/// Transactions observed on the P2P network. Hashes are unique; when a raw log repeats a
/// hash the earliest sighting wins.
class MempoolLog {
public:
    void observe(const TxHash& hash, std::uint64_t first_seen_ms) {
        auto [it, inserted] = first_seen_.emplace(hash, first_seen_ms);
        if (!inserted && first_seen_ms < it->second) it->second = first_seen_ms;
    }

    bool contains(const TxHash& hash) const { return first_seen_.count(hash) != 0; }

    std::optional<std::uint64_t> first_seen(const TxHash& hash) const {
        auto it = first_seen_.find(hash);
        if (it == first_seen_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<MempoolEntry> entries() const {
        std::vector<MempoolEntry> out;
        out.reserve(first_seen_.size());
        for (const auto& [h, t] : first_seen_) out.push_back({h, t});
        return out;
    }

    std::size_t size() const { return first_seen_.size(); }

private:
    std::map<TxHash, std::uint64_t> first_seen_;
};

inline MempoolLog parse_mempool_log(std::istream& in) {
    MempoolLog log;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = codec::json::parse(line);
            log.observe(TxHash::from_hex(codec::get_string(j, "hash")), codec::get_u64(j, "first_seen_ms"));
        } catch (const codec::json::exception& e) {
            throw ParseError(line_no, e.what());
        } catch (const PreconditionError& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return log;
}

inline MempoolLog load_mempool_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open mempool log '" + path + "'");
    return parse_mempool_log(in);
}

inline void write_mempool_log(std::ostream& out, const MempoolLog& log) {
    for (const auto& e : log.entries())
        out << codec::json{{"hash", e.hash.hex()}, {"first_seen_ms", std::to_string(e.first_seen_ms)}}.dump() << '\n';
}

struct PrivateTxReport {
    std::set<TxHash> not_broadcast; // mined but never seen on the network
    std::set<TxHash> zero_gas_price;
    std::set<TxHash> all;           // union
    std::size_t total_transactions = 0;
    std::size_t contract_calls = 0; // private ones consuming more than a plain transfer
};

inline constexpr std::uint64_t kPlainTransferGas = 21'000;

inline PrivateTxReport diff_private_transactions(const Trace& trace, const MempoolLog& mempool) {
    PrivateTxReport r;
    for (const auto& b : trace.blocks) {
        for (const auto& tx : b.transactions) {
            ++r.total_transactions;
            bool is_private = false;
            if (!mempool.contains(tx.hash)) {
                r.not_broadcast.insert(tx.hash);
                is_private = true;
            }
            if (tx.gas_price == 0) {
                r.zero_gas_price.insert(tx.hash);
                is_private = true;
            }
            if (is_private) {
                r.all.insert(tx.hash);
                if (tx.gas_used != kPlainTransferGas) ++r.contract_calls;
            }
        }
    }
    return r;
}

} // namespace bev
