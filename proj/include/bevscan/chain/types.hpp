#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bevscan/core/error.hpp"
#include "bevscan/core/numeric.hpp"

namespace bev {

using AssetId = std::string;
using MarketId = std::string;
using PlatformId = std::string;

/// Asset id of the chain's native currency. Always priced at 1.
inline const AssetId kNativeAsset = "NATIVE";

inline constexpr std::uint32_t kDefaultFeeBps = 30;
inline constexpr std::uint32_t kBpsDenominator = 10'000;

namespace detail {

inline int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

inline std::string_view strip_0x(std::string_view s) {
    if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
    return s;
}

} // namespace detail

using Bytes = std::vector<std::uint8_t>;

inline Bytes bytes_from_hex(std::string_view text) {
    auto s = detail::strip_0x(text);
    if (s.size() % 2 != 0) throw PreconditionError("odd-length hex string");
    Bytes out(s.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = detail::hex_digit(s[2 * i]);
        int lo = detail::hex_digit(s[2 * i + 1]);
        if (hi < 0 || lo < 0) throw PreconditionError("invalid hex digit");
        out[i] = static_cast<std::uint8_t>(hi * 16 + lo);
    }
    return out;
}

inline std::string bytes_to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out = "0x";
    out.reserve(2 + bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xF]);
    }
    return out;
}

/// Fixed-width byte string with lowercase 0x-hex text form.
template <std::size_t N, class Tag>
class FixedBytes {
public:
    static constexpr std::size_t size = N;

    constexpr FixedBytes() = default;
    explicit FixedBytes(const std::array<std::uint8_t, N>& raw) : raw_(raw) {}

    static FixedBytes from_hex(std::string_view text) {
        auto s = detail::strip_0x(text);
        if (s.size() != 2 * N)
            throw PreconditionError("expected " + std::to_string(N) + " bytes of hex, got '" + std::string(text) + "'");
        auto bytes = bytes_from_hex(s);
        FixedBytes out;
        std::copy(bytes.begin(), bytes.end(), out.raw_.begin());
        return out;
    }

    /// Deterministic filler used by fixtures: big-endian counter in the low bytes,
    /// `tag` in the first byte.
    static FixedBytes from_counter(std::uint64_t counter, std::uint8_t tag = 0) {
        FixedBytes out;
        out.raw_[0] = tag;
        for (std::size_t i = 0; i < 8 && i < N - 1; ++i)
            out.raw_[N - 1 - i] = static_cast<std::uint8_t>(counter >> (8 * i));
        return out;
    }

    std::string hex() const { return bytes_to_hex(raw_); }
    const std::array<std::uint8_t, N>& raw() const { return raw_; }
    std::span<const std::uint8_t, N> bytes() const { return raw_; }

    friend auto operator<=>(const FixedBytes&, const FixedBytes&) = default;

private:
    std::array<std::uint8_t, N> raw_{};
};

struct AddressTag {};
struct TxHashTag {};

using Address = FixedBytes<20, AddressTag>;
using TxHash = FixedBytes<32, TxHashTag>;

struct AssetAmount {
    AssetId asset;
    Amount amount;

    friend bool operator==(const AssetAmount&, const AssetAmount&) = default;
};

struct SwapAction {
    AssetId asset_in;
    Amount amount_in;
    AssetId asset_out;
    Amount amount_out;

    friend bool operator==(const SwapAction&, const SwapAction&) = default;
};

struct SwapEvent {
    PlatformId platform;
    MarketId market_id;
    SwapAction action;

    friend bool operator==(const SwapEvent&, const SwapEvent&) = default;
};

struct LiquidationEvent {
    PlatformId platform;
    Address borrower;
    Address liquidator;
    AssetAmount collateral;
    AssetAmount debt_repaid;

    friend bool operator==(const LiquidationEvent&, const LiquidationEvent&) = default;
};

struct OracleUpdateEvent {
    AssetId asset;
    Rational price_native;

    friend bool operator==(const OracleUpdateEvent&, const OracleUpdateEvent&) = default;
};

struct TransferEvent {
    AssetId token;
    Address from;
    Address to;
    Amount amount;

    friend bool operator==(const TransferEvent&, const TransferEvent&) = default;
};

using DecodedEvent = std::variant<SwapEvent, LiquidationEvent, OracleUpdateEvent, TransferEvent>;

enum class TxStatus { Success, Reverted };

struct Transaction {
    TxHash hash;
    std::uint32_t index = 0;
    Address sender;
    std::optional<Address> to;
    Amount value;
    Amount gas_price;
    std::uint64_t gas_used = 0;
    Bytes input;
    TxStatus status = TxStatus::Success;
    std::vector<DecodedEvent> events;

    bool succeeded() const { return status == TxStatus::Success; }

    friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct PoolState {
    MarketId market_id;
    AssetId asset_x;
    AssetId asset_y;
    Amount reserve_x;
    Amount reserve_y;
    std::uint32_t fee_bps = kDefaultFeeBps;

    bool holds(const AssetId& asset) const { return asset == asset_x || asset == asset_y; }
    const AssetId& other(const AssetId& asset) const { return asset == asset_x ? asset_y : asset_x; }
    const Amount& reserve_of(const AssetId& asset) const { return asset == asset_x ? reserve_x : reserve_y; }

    friend bool operator==(const PoolState&, const PoolState&) = default;
};

/// Single-collateral, single-debt lending position.
struct BorrowPosition {
    PlatformId platform;
    Address borrower;
    AssetAmount collateral;
    AssetAmount debt;
    Rational liquidation_threshold{1};

    friend bool operator==(const BorrowPosition&, const BorrowPosition&) = default;
};

using PriceMap = std::map<AssetId, Rational>;

// ---- toy-VM world state, carried by fixture traces -------------------------------

enum class ContractPattern { TransferRevenueToSender, SpecifyBeneficiary, Authentication, MoveBeneficiary };

/// One step of a contract's payout program, run with the contract's own balances.
struct PayoutStep {
    enum class Kind { Pay, Swap };
    Kind kind = Kind::Pay;
    AssetId asset;               // Pay: asset paid; Swap: asset sold
    std::optional<Amount> amount; // nullopt = entire contract balance of `asset`
    MarketId market_id;          // Swap only

    friend bool operator==(const PayoutStep&, const PayoutStep&) = default;
};

struct ContractSpec {
    ContractPattern pattern = ContractPattern::TransferRevenueToSender;
    std::uint32_t beneficiary_word_index = 0; // SpecifyBeneficiary
    Address owner;                            // Authentication
    Address stored_beneficiary;               // MoveBeneficiary
    std::uint64_t gas_used = 0;
    std::vector<PayoutStep> payout;

    friend bool operator==(const ContractSpec&, const ContractSpec&) = default;
};

struct WorldState {
    std::map<Address, Amount> native;
    std::map<std::pair<AssetId, Address>, Amount> tokens;
    std::map<MarketId, PoolState> pools;
    std::map<Address, ContractSpec> contracts;

    friend bool operator==(const WorldState&, const WorldState&) = default;
};

// ---------------------------------------------------------------------------------

struct Block {
    std::uint64_t number = 0;
    std::uint64_t gas_limit = 0;
    std::vector<Transaction> transactions;
    std::vector<PoolState> pool_states; // snapshot at block start
    PriceMap prices;                    // prices in effect once the block is applied
    Amount block_reward_plus_fees;
    std::vector<BorrowPosition> positions; // lending positions once the block is applied
    std::optional<WorldState> world_state;  // toy-VM state at block start

    const PoolState* pool(const MarketId& id) const {
        for (const auto& p : pool_states)
            if (p.market_id == id) return &p;
        return nullptr;
    }

    const BorrowPosition* position(const PlatformId& platform, const Address& borrower) const {
        for (const auto& p : positions)
            if (p.platform == platform && p.borrower == borrower) return &p;
        return nullptr;
    }

    friend bool operator==(const Block&, const Block&) = default;
};

enum class OrderingStrategy { DestructiveFrontRun, ToleratingFrontRun, BackRun, Clogging };

inline std::string_view to_string(OrderingStrategy s) {
    switch (s) {
    case OrderingStrategy::DestructiveFrontRun: return "destructive_front_run";
    case OrderingStrategy::ToleratingFrontRun: return "tolerating_front_run";
    case OrderingStrategy::BackRun: return "back_run";
    case OrderingStrategy::Clogging: return "clogging";
    }
    return "?";
}

/// Ordered swap events of a transaction (success only; reverted transactions emit nothing).
inline std::vector<const SwapEvent*> swaps_of(const Transaction& tx) {
    std::vector<const SwapEvent*> out;
    if (!tx.succeeded()) return out;
    for (const auto& ev : tx.events)
        if (auto* s = std::get_if<SwapEvent>(&ev)) out.push_back(s);
    return out;
}

} // namespace bev

template <std::size_t N, class Tag>
struct std::hash<bev::FixedBytes<N, Tag>> {
    std::size_t operator()(const bev::FixedBytes<N, Tag>& v) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        for (auto b : v.raw()) h = (h ^ b) * 1099511628211ULL;
        return h;
    }
};
