#pragma once

#include <algorithm>
#include <set>

#include "bevscan/io/trace.hpp"
#include "bevscan/replay/toy_vm.hpp"

namespace bev {

/// Gas of the follow-up trade that sells a gained token for the native asset.
inline constexpr std::uint64_t kConversionGas = 100'000;

enum class ReplayPattern { SenderBenefits, ControllableInput, NotReplayable };

inline std::string_view to_string(ReplayPattern p) {
    switch (p) {
    case ReplayPattern::SenderBenefits: return "sender_benefits";
    case ReplayPattern::ControllableInput: return "controllable_input";
    case ReplayPattern::NotReplayable: return "not_replayable";
    }
    return "?";
}

/// Replaces every non-overlapping occurrence of `from` in `bytes` (left to right) with
/// `to`. Length is preserved. Returns the number of replacements.
inline std::size_t substitute_address(Bytes& bytes, const Address& from, const Address& to) {
    const auto& needle = from.raw();
    std::size_t count = 0;
    auto it = bytes.begin();
    while (true) {
        it = std::search(it, bytes.end(), needle.begin(), needle.end());
        if (it == bytes.end()) break;
        std::copy(to.raw().begin(), to.raw().end(), it);
        it += static_cast<std::ptrdiff_t>(needle.size());
        ++count;
    }
    return count;
}

struct ReplayTransaction {
    Transaction tx;
    std::size_t substitutions = 0;
};

/// Clone of `victim` sent by `adversary`, with the victim's address bytes in the input
/// swapped for the adversary's.
inline ReplayTransaction construct_replay(const Transaction& victim, const Address& adversary) {
    if (adversary == victim.sender) throw PreconditionError("adversary must differ from the victim sender");
    ReplayTransaction r{victim, 0};
    r.tx.sender = adversary;
    r.tx.value = victim.value;
    r.substitutions = substitute_address(r.tx.input, victim.sender, adversary);
    r.tx.events.clear();
    return r;
}

struct ReplayCandidate {
    std::uint64_t block_number = 0;
    std::uint32_t victim_index = 0;
    TxHash victim_hash;
    Address victim_sender;
    Transaction replay;
    std::size_t substitution_count = 0;
    Amount gas_price_used;
    TxStatus replay_outcome = TxStatus::Success;
    Amount profit_native; // adversary's native balance change, net of all gas
    ReplayPattern pattern_class = ReplayPattern::NotReplayable;
    std::vector<AssetAmount> token_gains;
    std::vector<AssetAmount> unconverted_tokens; // gained, but no native market to sell into
    Amount required_capital;                     // victim.value
    bool miner_only = false;                     // victim paid no gas, so only a miner can front-run

    friend bool operator==(const ReplayCandidate&, const ReplayCandidate&) = default;
};

namespace replay {

struct Attempt {
    TxStatus outcome = TxStatus::Success;
    Amount profit;
    std::vector<AssetAmount> token_gains;
    std::vector<AssetAmount> unconverted;
    WorldState final_state;
};

/// First market pairing `token` with the native asset.
inline std::map<MarketId, PoolState>::iterator native_market(WorldState& s, const AssetId& token) {
    for (auto it = s.pools.begin(); it != s.pools.end(); ++it)
        if (it->second.holds(token) && it->second.holds(kNativeAsset)) return it;
    return s.pools.end();
}

/// Executes `tx` on `state` for `adversary`, then sells every gained token into its
/// native market at the same gas price. The adversary is funded up front with whatever
/// it lacks to cover value plus all gas, so profit is measured independently of its
/// starting balance.
inline Attempt run(const WorldState& state, const Transaction& tx, const Address& adversary) {
    WorldState funded = state;
    const Amount fee_budget = tx.gas_price * toy_gas(state, tx);
    std::set<AssetId> tradable;
    for (const auto& [id, pool] : state.pools) {
        tradable.insert(pool.asset_x);
        tradable.insert(pool.asset_y);
    }
    const Amount needed = tx.value + fee_budget + tx.gas_price * kConversionGas * tradable.size();
    Amount& bal = funded.native[adversary];
    if (bal < needed) bal = needed;

    Attempt a;
    const Amount start = funded.native[adversary];
    ExecutionResult exec = execute_transaction(funded, tx);
    a.outcome = exec.outcome;
    WorldState s = std::move(exec.state);

    std::vector<AssetAmount> gains;
    for (const auto& [key, delta] : exec.deltas.tokens)
        if (key.second == adversary && delta > 0) gains.push_back({key.first, delta});

    for (const auto& g : gains) {
        a.token_gains.push_back(g);
        auto market = native_market(s, g.asset);
        if (market == s.pools.end()) {
            a.unconverted.push_back(g);
            continue;
        }
        const Amount fee = tx.gas_price * kConversionGas;
        Amount& native = s.native[adversary];
        if (native < fee) {
            a.unconverted.push_back(g);
            continue;
        }
        native -= fee;
        try {
            auto r = amm_swap_out(market->second, g);
            market->second = r.after;
            s.tokens[{g.asset, adversary}] -= g.amount;
            s.native[adversary] += r.output.amount;
        } catch (const Error&) {
            // The conversion reverts; its gas is still spent.
            a.unconverted.push_back(g);
        }
    }
    a.profit = s.native[adversary] - start;
    a.final_state = std::move(s);
    return a;
}

} // namespace replay

/// Algorithm: construct the replay, execute it in front of the victim at victim gas
/// price + 1, convert token gains to native, keep the net native delta.
///
/// The pattern class compares the substituted replay with a copy whose input is left
/// untouched: if the untouched copy already profits the revenue follows the sender;
/// if only the substituted one does the beneficiary is input-borne.
inline ReplayCandidate evaluate_replay(const WorldState& state, const Transaction& victim, const Address& adversary) {
    ReplayTransaction r = construct_replay(victim, adversary);
    r.tx.gas_price = victim.gas_price + 1;

    ReplayCandidate c;
    c.victim_index = victim.index;
    c.victim_hash = victim.hash;
    c.victim_sender = victim.sender;
    c.substitution_count = r.substitutions;
    c.gas_price_used = r.tx.gas_price;
    c.required_capital = victim.value;
    c.miner_only = victim.gas_price == 0;

    replay::Attempt substituted = replay::run(state, r.tx, adversary);
    c.replay_outcome = substituted.outcome;
    c.profit_native = substituted.profit;
    c.token_gains = substituted.token_gains;
    c.unconverted_tokens = substituted.unconverted;

    bool plain_profitable = substituted.profit > 0;
    if (r.substitutions > 0) {
        Transaction plain = r.tx;
        plain.input = victim.input;
        plain_profitable = replay::run(state, plain, adversary).profit > 0;
    }
    if (plain_profitable && substituted.profit > 0)
        c.pattern_class = ReplayPattern::SenderBenefits;
    else if (substituted.profit > 0)
        c.pattern_class = ReplayPattern::ControllableInput;
    else
        c.pattern_class = ReplayPattern::NotReplayable;
    c.replay = std::move(r.tx);
    return c;
}

/// Upfront capital (victim value, whole native units): r = 0, 0 < r <= 10, 10 < r <= 100, r > 100.
enum class CapitalBucket { Zero, UpTo10, UpTo100, Above100 };

inline std::string_view to_string(CapitalBucket b) {
    switch (b) {
    case CapitalBucket::Zero: return "r=0";
    case CapitalBucket::UpTo10: return "0<r<=10";
    case CapitalBucket::UpTo100: return "10<r<=100";
    case CapitalBucket::Above100: return "r>100";
    }
    return "?";
}

inline CapitalBucket capital_bucket(const Amount& value) {
    if (value <= 0) return CapitalBucket::Zero;
    if (value <= native_unit() * 10) return CapitalBucket::UpTo10;
    if (value <= native_unit() * 100) return CapitalBucket::UpTo100;
    return CapitalBucket::Above100;
}

struct CapitalRow {
    std::size_t count = 0;
    Amount total_profit;
};

struct ReplayScan {
    std::vector<ReplayCandidate> candidates; // profit > 0 only
    std::vector<ReplayCandidate> all;        // every evaluated call, when requested
    std::size_t evaluated = 0;
    std::size_t skipped_blocks = 0;      // blocks with transactions but no state snapshot
    std::size_t unexecutable = 0;        // original transactions the toy VM could not apply
    Amount total_profit;
    std::size_t miner_only = 0;
    std::map<CapitalBucket, CapitalRow> capital;
};

/// Evaluates every contract call in blocks that carry a state snapshot, each at its exact
/// position: the snapshot is advanced by the block's earlier transactions first.
inline ReplayScan scan_replayable(const Trace& trace, const Address& adversary, bool keep_all = false) {
    ReplayScan scan;
    for (auto b : {CapitalBucket::Zero, CapitalBucket::UpTo10, CapitalBucket::UpTo100, CapitalBucket::Above100})
        scan.capital[b] = {};
    for (const auto& block : trace.blocks) {
        if (!block.world_state) {
            if (!block.transactions.empty()) ++scan.skipped_blocks;
            continue;
        }
        WorldState state = *block.world_state;
        for (const auto& tx : block.transactions) {
            const bool is_call = tx.to && state.contracts.count(*tx.to) && tx.sender != adversary;
            if (is_call) {
                ++scan.evaluated;
                ReplayCandidate c = evaluate_replay(state, tx, adversary);
                c.block_number = block.number;
                if (keep_all) scan.all.push_back(c);
                if (c.profit_native > 0) {
                    scan.total_profit += c.profit_native;
                    if (c.miner_only) ++scan.miner_only;
                    auto& row = scan.capital[capital_bucket(c.required_capital)];
                    ++row.count;
                    row.total_profit += c.profit_native;
                    scan.candidates.push_back(std::move(c));
                }
            }
            try {
                state = execute_transaction(state, tx).state;
            } catch (const Error&) {
                ++scan.unexecutable;
            }
        }
    }
    return scan;
}

} // namespace bev
