#pragma once

// Deterministic stand-in for contract execution. Contracts are declarative: a
// beneficiary rule (one of four patterns) plus a payout program over the contract's
// own balances.

#include "bevscan/chain/amm.hpp"
#include "bevscan/chain/valuation.hpp"

namespace bev {

class InsufficientFunds : public Error {
public:
    using Error::Error;
};

inline constexpr std::uint64_t kAbiSelectorBytes = 4;
inline constexpr std::uint64_t kAbiWordBytes = 32;

struct BalanceDeltas {
    std::map<Address, Amount> native;
    std::map<std::pair<AssetId, Address>, Amount> tokens;
};

struct ExecutionResult {
    WorldState state;
    TxStatus outcome = TxStatus::Success;
    Amount gas_fee;
    BalanceDeltas deltas;
    std::string revert_reason;
};

namespace vm {

class Revert : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Amount& native_of(WorldState& s, const Address& a) { return s.native[a]; }

inline Amount balance(const WorldState& s, const AssetId& asset, const Address& owner) {
    if (asset == kNativeAsset) {
        auto it = s.native.find(owner);
        return it == s.native.end() ? Amount(0) : it->second;
    }
    auto it = s.tokens.find({asset, owner});
    return it == s.tokens.end() ? Amount(0) : it->second;
}

inline void credit(WorldState& s, const AssetId& asset, const Address& owner, const Amount& amount) {
    if (asset == kNativeAsset)
        s.native[owner] += amount;
    else
        s.tokens[{asset, owner}] += amount;
}

inline void debit(WorldState& s, const AssetId& asset, const Address& owner, const Amount& amount) {
    Amount& slot = asset == kNativeAsset ? s.native[owner] : s.tokens[{asset, owner}];
    if (slot < amount) throw Revert("insufficient " + asset + " balance");
    slot -= amount;
}

/// Address stored in the low 20 bytes of ABI word `word` after the 4-byte selector.
inline std::optional<Address> read_address_word(std::span<const std::uint8_t> input, std::uint32_t word) {
    const std::size_t end = kAbiSelectorBytes + kAbiWordBytes * (static_cast<std::size_t>(word) + 1);
    if (input.size() < end) return std::nullopt;
    std::array<std::uint8_t, 20> raw{};
    std::copy(input.begin() + static_cast<std::ptrdiff_t>(end - 20), input.begin() + static_cast<std::ptrdiff_t>(end),
              raw.begin());
    return Address(raw);
}

inline Address beneficiary_of(const ContractSpec& c, const Transaction& tx) {
    switch (c.pattern) {
    case ContractPattern::TransferRevenueToSender: return tx.sender;
    case ContractPattern::SpecifyBeneficiary: {
        auto a = read_address_word(tx.input, c.beneficiary_word_index);
        if (!a) throw Revert("input too short for beneficiary word");
        return *a;
    }
    case ContractPattern::Authentication:
        if (tx.sender != c.owner) throw Revert("caller is not the owner");
        return tx.sender;
    case ContractPattern::MoveBeneficiary: return c.stored_beneficiary;
    }
    throw Revert("unknown pattern");
}

inline void run_payout(WorldState& s, const Address& contract, const ContractSpec& spec, const Address& beneficiary) {
    for (const auto& step : spec.payout) {
        const Amount amount = step.amount ? *step.amount : balance(s, step.asset, contract);
        if (step.kind == PayoutStep::Kind::Pay) {
            debit(s, step.asset, contract, amount);
            credit(s, step.asset, beneficiary, amount);
            continue;
        }
        auto pool_it = s.pools.find(step.market_id);
        if (pool_it == s.pools.end()) throw Revert("unknown market " + step.market_id);
        if (amount <= 0) throw Revert("nothing to swap");
        debit(s, step.asset, contract, amount);
        SwapResult r;
        try {
            r = amm_swap_out(pool_it->second, {step.asset, amount});
        } catch (const Error& e) {
            throw Revert(e.what());
        }
        pool_it->second = r.after;
        credit(s, r.output.asset, contract, r.output.amount);
    }
}

inline BalanceDeltas diff(const WorldState& before, const WorldState& after) {
    BalanceDeltas d;
    auto native_keys = [&](const auto& m) {
        for (const auto& [k, v] : m) {
            Amount delta = balance(after, kNativeAsset, k) - balance(before, kNativeAsset, k);
            if (delta != 0) d.native[k] = delta;
        }
    };
    native_keys(before.native);
    native_keys(after.native);
    auto token_keys = [&](const auto& m) {
        for (const auto& [k, v] : m) {
            Amount delta = balance(after, k.first, k.second) - balance(before, k.first, k.second);
            if (delta != 0) d.tokens[k] = delta;
        }
    };
    token_keys(before.tokens);
    token_keys(after.tokens);
    return d;
}

} // namespace vm

/// Gas charged for a transaction: the callee's declared constant, or a plain transfer.
inline std::uint64_t toy_gas(const WorldState& state, const Transaction& tx) {
    if (tx.to) {
        auto it = state.contracts.find(*tx.to);
        if (it != state.contracts.end()) return it->second.gas_used;
    }
    return 21'000;
}

/// Applies `tx` to `state`. The sender pays value + gas up front; a reverted call keeps
/// only the gas payment. Throws InsufficientFunds (and leaves no trace) when the sender
/// cannot cover value + gas.
inline ExecutionResult execute_transaction(const WorldState& state, const Transaction& tx) {
    if (!tx.to) throw PreconditionError("contract creation is not supported by the toy VM");
    const std::uint64_t gas = toy_gas(state, tx);
    const Amount fee = tx.gas_price * gas;
    if (vm::balance(state, kNativeAsset, tx.sender) < tx.value + fee)
        throw InsufficientFunds("sender " + tx.sender.hex() + " cannot cover value + gas");

    ExecutionResult result;
    result.gas_fee = fee;
    WorldState charged = state;
    vm::native_of(charged, tx.sender) -= fee;

    WorldState working = charged;
    try {
        vm::debit(working, kNativeAsset, tx.sender, tx.value);
        vm::credit(working, kNativeAsset, *tx.to, tx.value);
        if (auto it = working.contracts.find(*tx.to); it != working.contracts.end()) {
            const ContractSpec spec = it->second;
            const Address beneficiary = vm::beneficiary_of(spec, tx);
            vm::run_payout(working, *tx.to, spec, beneficiary);
        }
        result.state = std::move(working);
        result.outcome = TxStatus::Success;
    } catch (const vm::Revert& r) {
        result.state = std::move(charged);
        result.outcome = TxStatus::Reverted;
        result.revert_reason = r.what();
    }
    result.deltas = vm::diff(state, result.state);
    return result;
}

} // namespace bev
