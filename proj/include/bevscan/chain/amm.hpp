#pragma once

#include "bevscan/chain/types.hpp"

namespace bev {

struct SwapResult {
    AssetAmount output;
    PoolState after;
};

/// Constant-product swap with the fee retained in the pool.
///
///     out = floor(reserve_out * in * (10000 - fee) / (reserve_in * 10000 + in * (10000 - fee)))
///
/// The full input is added to reserve_in, so reserve_x * reserve_y never decreases.
inline SwapResult amm_swap_out(const PoolState& pool, const AssetAmount& input) {
    if (!pool.holds(input.asset))
        throw InputAssetNotInPool("asset " + input.asset + " not in market " + pool.market_id);
    if (input.amount <= 0) throw PreconditionError("swap input must be positive");
    if (pool.fee_bps >= kBpsDenominator) throw PreconditionError("fee_bps out of range");
    if (pool.reserve_x <= 0 || pool.reserve_y <= 0) throw EmptyPool("market " + pool.market_id + " has no liquidity");

    const bool x_in = input.asset == pool.asset_x;
    const Amount& reserve_in = x_in ? pool.reserve_x : pool.reserve_y;
    const Amount& reserve_out = x_in ? pool.reserve_y : pool.reserve_x;

    const Amount in_with_fee = input.amount * (kBpsDenominator - pool.fee_bps);
    const Amount out = (reserve_out * in_with_fee) / (reserve_in * kBpsDenominator + in_with_fee);

    SwapResult result{{pool.other(input.asset), out}, pool};
    if (x_in) {
        result.after.reserve_x += input.amount;
        result.after.reserve_y -= out;
    } else {
        result.after.reserve_y += input.amount;
        result.after.reserve_x -= out;
    }
    return result;
}

/// Smallest input that yields at least `wanted` output, or nullopt if the pool cannot
/// deliver it. Used by fixtures to plant exact amounts.
inline std::optional<Amount> amm_input_for_output(const PoolState& pool, const AssetId& asset_in, const Amount& wanted) {
    if (!pool.holds(asset_in) || wanted <= 0) return std::nullopt;
    const Amount& reserve_out = pool.reserve_of(pool.other(asset_in));
    if (wanted >= reserve_out) return std::nullopt;
    const Amount& reserve_in = pool.reserve_of(asset_in);
    const Amount fee_mul = kBpsDenominator - pool.fee_bps;
    // ceil(reserve_in * wanted * 10000 / ((reserve_out - wanted) * fee_mul)), then nudge.
    const Amount num = reserve_in * wanted * kBpsDenominator;
    const Amount den = (reserve_out - wanted) * fee_mul;
    Amount in = (num + den - 1) / den;
    if (in <= 0) in = 1;
    while (amm_swap_out(pool, {asset_in, in}).output.amount < wanted) ++in;
    while (in > 1 && amm_swap_out(pool, {asset_in, in - 1}).output.amount >= wanted) --in;
    return in;
}

} // namespace bev
