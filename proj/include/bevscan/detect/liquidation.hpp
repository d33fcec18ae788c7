#pragma once

#include <map>

#include "bevscan/chain/valuation.hpp"

namespace bev {

class CannotEvaluate : public Error {
public:
    using Error::Error;
};

enum class LiquidationStrategy { FrontRun, BackRun, Unclassifiable };

inline std::string_view to_string(LiquidationStrategy s) {
    switch (s) {
    case LiquidationStrategy::FrontRun: return "front_run";
    case LiquidationStrategy::BackRun: return "back_run";
    case LiquidationStrategy::Unclassifiable: return "unclassifiable";
    }
    return "?";
}

struct LiquidationRecord {
    std::uint64_t block_number = 0;
    std::uint32_t tx_index = 0;
    TxHash tx_hash;
    PlatformId platform;
    Address borrower;
    Address liquidator;
    AssetAmount debt_repaid;
    AssetAmount collateral_received;
    std::optional<Amount> profit_native; // nullopt when an asset is unpriced
    LiquidationStrategy strategy = LiquidationStrategy::Unclassifiable;
    bool internal_backrun = false;
    bool privately_relayed = false;
    Amount gas_price;
    Amount gas_cost_native;

    std::optional<OrderingStrategy> ordering() const {
        switch (strategy) {
        case LiquidationStrategy::FrontRun: return OrderingStrategy::DestructiveFrontRun;
        case LiquidationStrategy::BackRun: return OrderingStrategy::BackRun;
        default: return std::nullopt;
        }
    }

    friend bool operator==(const LiquidationRecord&, const LiquidationRecord&) = default;
};

inline Rational price_of(const AssetId& asset, const PriceMap& prices) {
    if (asset == kNativeAsset) return Rational(1);
    auto it = prices.find(asset);
    if (it == prices.end()) throw CannotEvaluate("asset " + asset + " is unpriced");
    return it->second;
}

/// (collateral value * liquidation threshold) / debt value, exact. Liquidatable iff < 1.
inline Rational health_factor(const BorrowPosition& position, const PriceMap& prices) {
    if (position.debt.amount <= 0) throw PreconditionError("position carries no debt");
    const Rational collateral_value = Rational(position.collateral.amount) * price_of(position.collateral.asset, prices);
    const Rational debt_value = Rational(position.debt.amount) * price_of(position.debt.asset, prices);
    return collateral_value * position.liquidation_threshold / debt_value;
}

inline bool is_liquidatable(const BorrowPosition& position, const PriceMap& prices) {
    return health_factor(position, prices) < 1;
}

/// Front-running iff the position was already liquidatable at the previous block.
/// A missing previous position or previous prices makes the record unclassifiable.
inline LiquidationStrategy classify_liquidation(const BorrowPosition* position_at_prev, const PriceMap* prev_prices) {
    if (!position_at_prev || !prev_prices) return LiquidationStrategy::Unclassifiable;
    try {
        return is_liquidatable(*position_at_prev, *prev_prices) ? LiquidationStrategy::FrontRun
                                                                : LiquidationStrategy::BackRun;
    } catch (const CannotEvaluate&) {
        return LiquidationStrategy::Unclassifiable;
    }
}

/// True iff an oracle update precedes a liquidation inside the same transaction.
inline bool detect_internal_backrun(const Transaction& tx) {
    bool oracle_seen = false;
    for (const auto& ev : tx.events) {
        if (std::holds_alternative<OracleUpdateEvent>(ev)) oracle_seen = true;
        else if (std::holds_alternative<LiquidationEvent>(ev) && oracle_seen) return true;
    }
    return false;
}

/// value(collateral) - value(debt) - gas. Throws CannotEvaluate on unpriced assets.
inline Amount liquidation_profit(const AssetAmount& collateral_received, const AssetAmount& debt_repaid,
                                 const Amount& gas, const PriceMap& prices) {
    auto value = [&](const AssetAmount& a) { return floor(Rational(a.amount) * price_of(a.asset, prices)); };
    return value(collateral_received) - value(debt_repaid) - gas;
}

inline Amount liquidation_profit(const LiquidationRecord& r, const PriceMap& prices) {
    return liquidation_profit(r.collateral_received, r.debt_repaid, r.gas_cost_native, prices);
}

/// All fixed-spread liquidations of `block`, classified against `prev` (the block
/// numbered one lower, when the trace has it).
inline std::vector<LiquidationRecord> analyze_liquidations(const Block& block, const Block* prev) {
    std::vector<LiquidationRecord> out;
    for (const auto& tx : block.transactions) {
        if (!tx.succeeded()) continue;
        const bool internal = detect_internal_backrun(tx);
        for (const auto& ev : tx.events) {
            const auto* liq = std::get_if<LiquidationEvent>(&ev);
            if (!liq) continue;
            LiquidationRecord r;
            r.block_number = block.number;
            r.tx_index = tx.index;
            r.tx_hash = tx.hash;
            r.platform = liq->platform;
            r.borrower = liq->borrower;
            r.liquidator = liq->liquidator;
            r.debt_repaid = liq->debt_repaid;
            r.collateral_received = liq->collateral;
            r.internal_backrun = internal;
            r.privately_relayed = tx.gas_price == 0;
            r.gas_price = tx.gas_price;
            r.gas_cost_native = gas_cost(tx);
            try {
                r.profit_native = liquidation_profit(r, block.prices);
            } catch (const CannotEvaluate&) {
            }
            const BorrowPosition* before = prev ? prev->position(liq->platform, liq->borrower) : nullptr;
            r.strategy = classify_liquidation(before, prev ? &prev->prices : nullptr);
            out.push_back(std::move(r));
        }
    }
    return out;
}

/// Independent re-check of the previous-block test: recomputes both sides of
/// collateral * price * threshold < debt * price on integers scaled by the price
/// denominators.
inline bool verify_liquidation_class(const LiquidationRecord& r, const Block* prev) {
    if (r.strategy == LiquidationStrategy::Unclassifiable) return true;
    if (!prev) return false;
    const BorrowPosition* p = prev->position(r.platform, r.borrower);
    if (!p) return false;
    auto lookup = [&](const AssetId& a) -> std::optional<Rational> {
        if (a == kNativeAsset) return Rational(1);
        auto it = prev->prices.find(a);
        if (it == prev->prices.end()) return std::nullopt;
        return it->second;
    };
    auto pc = lookup(p->collateral.asset);
    auto pd = lookup(p->debt.asset);
    if (!pc || !pd) return false;
    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    // c * (nc/dc) * (nt/dt) < d * (nd/dd)  <=>  c*nc*nt*dd < d*nd*dc*dt
    const Amount lhs = p->collateral.amount * numerator(*pc) * numerator(p->liquidation_threshold) * denominator(*pd);
    const Amount rhs = p->debt.amount * numerator(*pd) * denominator(*pc) * denominator(p->liquidation_threshold);
    const bool front = lhs < rhs;
    return front == (r.strategy == LiquidationStrategy::FrontRun);
}

enum class LiquidatorProfile { FrontOnly, BackOnly, Mixed };

inline std::string_view to_string(LiquidatorProfile p) {
    switch (p) {
    case LiquidatorProfile::FrontOnly: return "front_only";
    case LiquidatorProfile::BackOnly: return "back_only";
    case LiquidatorProfile::Mixed: return "mixed";
    }
    return "?";
}

inline std::map<Address, LiquidatorProfile> liquidator_profile(std::span<const LiquidationRecord> records) {
    std::map<Address, std::pair<bool, bool>> seen; // (front, back)
    for (const auto& r : records) {
        if (r.strategy == LiquidationStrategy::Unclassifiable) continue;
        auto& s = seen[r.liquidator];
        (r.strategy == LiquidationStrategy::FrontRun ? s.first : s.second) = true;
    }
    std::map<Address, LiquidatorProfile> out;
    for (const auto& [addr, s] : seen)
        out[addr] = s.first && s.second ? LiquidatorProfile::Mixed
                    : s.first           ? LiquidatorProfile::FrontOnly
                                        : LiquidatorProfile::BackOnly;
    return out;
}

/// Front / back / total counts per platform.
struct StrategyCounts {
    std::size_t front = 0;
    std::size_t back = 0;
    std::size_t unclassifiable = 0;
    std::size_t total() const { return front + back + unclassifiable; }
};

inline std::map<PlatformId, StrategyCounts> liquidation_strategy_table(std::span<const LiquidationRecord> records) {
    std::map<PlatformId, StrategyCounts> t;
    for (const auto& r : records) {
        auto& c = t[r.platform];
        switch (r.strategy) {
        case LiquidationStrategy::FrontRun: ++c.front; break;
        case LiquidationStrategy::BackRun: ++c.back; break;
        case LiquidationStrategy::Unclassifiable: ++c.unclassifiable; break;
        }
    }
    return t;
}

} // namespace bev
