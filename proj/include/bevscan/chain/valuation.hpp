#pragma once

#include "bevscan/chain/types.hpp"

namespace bev {

struct NativeValue {
    Amount value;
    bool unpriced = false;
};

/// floor(amount * price). The native asset is its own unit; assets missing from the
/// price map are worth zero and flagged.
inline NativeValue value_in_native(const AssetAmount& amount, const PriceMap& prices) {
    if (amount.asset == kNativeAsset) return {amount.amount, false};
    auto it = prices.find(amount.asset);
    if (it == prices.end()) return {Amount(0), true};
    return {floor(Rational(amount.amount) * it->second), false};
}

inline Amount gas_cost(const Transaction& tx) { return tx.gas_price * tx.gas_used; }

} // namespace bev
