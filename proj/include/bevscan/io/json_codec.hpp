#pragma once

// JSON encoding of chain types. Integers travel as decimal strings, rationals as
// "p" or "p/q", byte strings as 0x-hex.

#include <json.hpp>

#include "bevscan/chain/types.hpp"

namespace bev::codec {

using json = nlohmann::json;

inline const json& field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw PreconditionError(std::string("missing field '") + key + "'");
    return *it;
}

inline std::string get_string(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_string()) throw PreconditionError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

inline Amount as_amount(const json& v, const char* key) {
    if (v.is_string()) return parse_amount(v.get_ref<const std::string&>());
    if (v.is_number_unsigned()) return Amount(v.get<std::uint64_t>());
    throw PreconditionError(std::string("field '") + key + "' must be a decimal string");
}

inline Amount get_amount(const json& j, const char* key) { return as_amount(field(j, key), key); }

inline std::uint64_t get_u64(const json& j, const char* key) {
    Amount a = get_amount(j, key);
    if (a > std::numeric_limits<std::uint64_t>::max())
        throw PreconditionError(std::string("field '") + key + "' exceeds 64 bits");
    return a.convert_to<std::uint64_t>();
}

inline Rational as_rational(const json& v, const char* key) {
    if (v.is_string()) return parse_rational(v.get_ref<const std::string&>());
    if (v.is_number_unsigned()) return Rational(Amount(v.get<std::uint64_t>()));
    throw PreconditionError(std::string("field '") + key + "' must be a rational string");
}

inline Rational get_rational(const json& j, const char* key) { return as_rational(field(j, key), key); }

inline Address get_address(const json& j, const char* key) { return Address::from_hex(get_string(j, key)); }

// ---- encoders ---------------------------------------------------------------------

inline json encode(const AssetAmount& a) { return {{"asset", a.asset}, {"amount", a.amount.str()}}; }

inline AssetAmount decode_asset_amount(const json& j) { return {get_string(j, "asset"), get_amount(j, "amount")}; }

inline json encode(const PoolState& p) {
    return {{"market_id", p.market_id},     {"asset_x", p.asset_x},
            {"asset_y", p.asset_y},         {"reserve_x", p.reserve_x.str()},
            {"reserve_y", p.reserve_y.str()}, {"fee_bps", std::to_string(p.fee_bps)}};
}

inline PoolState decode_pool(const json& j) {
    PoolState p;
    p.market_id = get_string(j, "market_id");
    p.asset_x = get_string(j, "asset_x");
    p.asset_y = get_string(j, "asset_y");
    p.reserve_x = get_amount(j, "reserve_x");
    p.reserve_y = get_amount(j, "reserve_y");
    p.fee_bps = j.contains("fee_bps") ? static_cast<std::uint32_t>(get_u64(j, "fee_bps")) : kDefaultFeeBps;
    return p;
}

inline json encode(const DecodedEvent& ev) {
    return std::visit(
        [](const auto& e) -> json {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, SwapEvent>) {
                return {{"kind", "swap"},
                        {"platform", e.platform},
                        {"market_id", e.market_id},
                        {"asset_in", e.action.asset_in},
                        {"amount_in", e.action.amount_in.str()},
                        {"asset_out", e.action.asset_out},
                        {"amount_out", e.action.amount_out.str()}};
            } else if constexpr (std::is_same_v<T, LiquidationEvent>) {
                return {{"kind", "liquidation"},       {"platform", e.platform},
                        {"borrower", e.borrower.hex()}, {"liquidator", e.liquidator.hex()},
                        {"collateral", encode(e.collateral)}, {"debt_repaid", encode(e.debt_repaid)}};
            } else if constexpr (std::is_same_v<T, OracleUpdateEvent>) {
                return {{"kind", "oracle_update"}, {"asset", e.asset}, {"price", bev::to_string(e.price_native)}};
            } else {
                return {{"kind", "transfer"}, {"token", e.token}, {"from", e.from.hex()},
                        {"to", e.to.hex()},   {"amount", e.amount.str()}};
            }
        },
        ev);
}

inline DecodedEvent decode_event(const json& j) {
    const auto kind = get_string(j, "kind");
    if (kind == "swap") {
        return SwapEvent{get_string(j, "platform"), get_string(j, "market_id"),
                         SwapAction{get_string(j, "asset_in"), get_amount(j, "amount_in"), get_string(j, "asset_out"),
                                    get_amount(j, "amount_out")}};
    }
    if (kind == "liquidation") {
        return LiquidationEvent{get_string(j, "platform"), get_address(j, "borrower"), get_address(j, "liquidator"),
                                decode_asset_amount(field(j, "collateral")),
                                decode_asset_amount(field(j, "debt_repaid"))};
    }
    if (kind == "oracle_update") return OracleUpdateEvent{get_string(j, "asset"), get_rational(j, "price")};
    if (kind == "transfer") {
        return TransferEvent{get_string(j, "token"), get_address(j, "from"), get_address(j, "to"),
                             get_amount(j, "amount")};
    }
    throw PreconditionError("unknown event kind '" + kind + "'");
}

inline json encode(const Transaction& tx) {
    json events = json::array();
    for (const auto& ev : tx.events) events.push_back(encode(ev));
    return {{"hash", tx.hash.hex()},
            {"index", std::to_string(tx.index)},
            {"from", tx.sender.hex()},
            {"to", tx.to ? json(tx.to->hex()) : json(nullptr)},
            {"value", tx.value.str()},
            {"gas_price", tx.gas_price.str()},
            {"gas_used", std::to_string(tx.gas_used)},
            {"input", bytes_to_hex(tx.input)},
            {"status", tx.succeeded() ? "success" : "reverted"},
            {"events", std::move(events)}};
}

inline Transaction decode_transaction(const json& j) {
    Transaction tx;
    tx.hash = TxHash::from_hex(get_string(j, "hash"));
    tx.index = static_cast<std::uint32_t>(get_u64(j, "index"));
    tx.sender = get_address(j, "from");
    if (auto it = j.find("to"); it != j.end() && !it->is_null()) tx.to = Address::from_hex(get_string(j, "to"));
    tx.value = get_amount(j, "value");
    tx.gas_price = get_amount(j, "gas_price");
    tx.gas_used = get_u64(j, "gas_used");
    tx.input = bytes_from_hex(get_string(j, "input"));
    const auto status = get_string(j, "status");
    if (status == "success")
        tx.status = TxStatus::Success;
    else if (status == "reverted")
        tx.status = TxStatus::Reverted;
    else
        throw PreconditionError("unknown status '" + status + "'");
    for (const auto& ev : field(j, "events")) tx.events.push_back(decode_event(ev));
    return tx;
}

inline std::string_view to_string(ContractPattern p) {
    switch (p) {
    case ContractPattern::TransferRevenueToSender: return "transfer_revenue_to_sender";
    case ContractPattern::SpecifyBeneficiary: return "specify_beneficiary";
    case ContractPattern::Authentication: return "authentication";
    case ContractPattern::MoveBeneficiary: return "move_beneficiary";
    }
    return "?";
}

inline ContractPattern parse_pattern(const std::string& s) {
    if (s == "transfer_revenue_to_sender") return ContractPattern::TransferRevenueToSender;
    if (s == "specify_beneficiary") return ContractPattern::SpecifyBeneficiary;
    if (s == "authentication") return ContractPattern::Authentication;
    if (s == "move_beneficiary") return ContractPattern::MoveBeneficiary;
    throw PreconditionError("unknown contract pattern '" + s + "'");
}

inline json encode(const ContractSpec& c) {
    json steps = json::array();
    for (const auto& s : c.payout) {
        json step = {{"op", s.kind == PayoutStep::Kind::Pay ? "pay" : "swap"},
                     {"asset", s.asset},
                     {"amount", s.amount ? json(s.amount->str()) : json("all")}};
        if (s.kind == PayoutStep::Kind::Swap) step["market_id"] = s.market_id;
        steps.push_back(std::move(step));
    }
    json j = {{"pattern", to_string(c.pattern)}, {"gas_used", std::to_string(c.gas_used)}, {"payout", std::move(steps)}};
    switch (c.pattern) {
    case ContractPattern::SpecifyBeneficiary: j["beneficiary_word_index"] = std::to_string(c.beneficiary_word_index); break;
    case ContractPattern::Authentication: j["owner"] = c.owner.hex(); break;
    case ContractPattern::MoveBeneficiary: j["stored_beneficiary"] = c.stored_beneficiary.hex(); break;
    default: break;
    }
    return j;
}

inline ContractSpec decode_contract(const json& j) {
    ContractSpec c;
    c.pattern = parse_pattern(get_string(j, "pattern"));
    c.gas_used = get_u64(j, "gas_used");
    switch (c.pattern) {
    case ContractPattern::SpecifyBeneficiary:
        c.beneficiary_word_index = static_cast<std::uint32_t>(get_u64(j, "beneficiary_word_index"));
        break;
    case ContractPattern::Authentication: c.owner = get_address(j, "owner"); break;
    case ContractPattern::MoveBeneficiary: c.stored_beneficiary = get_address(j, "stored_beneficiary"); break;
    default: break;
    }
    for (const auto& s : field(j, "payout")) {
        PayoutStep step;
        const auto op = get_string(s, "op");
        if (op == "pay")
            step.kind = PayoutStep::Kind::Pay;
        else if (op == "swap")
            step.kind = PayoutStep::Kind::Swap;
        else
            throw PreconditionError("unknown payout op '" + op + "'");
        step.asset = get_string(s, "asset");
        const auto& amt = field(s, "amount");
        if (!(amt.is_string() && amt.get_ref<const std::string&>() == "all")) step.amount = as_amount(amt, "amount");
        if (step.kind == PayoutStep::Kind::Swap) step.market_id = get_string(s, "market_id");
        c.payout.push_back(std::move(step));
    }
    return c;
}

inline json encode(const WorldState& w) {
    json native = json::object();
    for (const auto& [addr, amt] : w.native) native[addr.hex()] = amt.str();
    json tokens = json::array();
    for (const auto& [key, amt] : w.tokens)
        tokens.push_back({{"asset", key.first}, {"owner", key.second.hex()}, {"amount", amt.str()}});
    json pools = json::array();
    for (const auto& [id, p] : w.pools) pools.push_back(encode(p));
    json contracts = json::object();
    for (const auto& [addr, c] : w.contracts) contracts[addr.hex()] = encode(c);
    return {{"native", std::move(native)}, {"tokens", std::move(tokens)}, {"pools", std::move(pools)},
            {"contracts", std::move(contracts)}};
}

inline WorldState decode_world(const json& j) {
    WorldState w;
    for (const auto& [addr, amt] : field(j, "native").items()) w.native[Address::from_hex(addr)] = as_amount(amt, "native");
    for (const auto& t : field(j, "tokens"))
        w.tokens[{get_string(t, "asset"), get_address(t, "owner")}] = get_amount(t, "amount");
    for (const auto& p : field(j, "pools")) {
        auto pool = decode_pool(p);
        w.pools[pool.market_id] = pool;
    }
    for (const auto& [addr, c] : field(j, "contracts").items()) w.contracts[Address::from_hex(addr)] = decode_contract(c);
    return w;
}

inline json encode(const BorrowPosition& p) {
    return {{"platform", p.platform},
            {"borrower", p.borrower.hex()},
            {"collateral", encode(p.collateral)},
            {"debt", encode(p.debt)},
            {"liquidation_threshold", bev::to_string(p.liquidation_threshold)}};
}

inline BorrowPosition decode_position(const json& j) {
    return {get_string(j, "platform"), get_address(j, "borrower"), decode_asset_amount(field(j, "collateral")),
            decode_asset_amount(field(j, "debt")), get_rational(j, "liquidation_threshold")};
}

inline json encode(const Block& b) {
    json prices = json::object();
    for (const auto& [asset, price] : b.prices) prices[asset] = bev::to_string(price);
    json pools = json::array();
    for (const auto& p : b.pool_states) pools.push_back(encode(p));
    json txs = json::array();
    for (const auto& tx : b.transactions) txs.push_back(encode(tx));
    json j = {{"number", std::to_string(b.number)},
              {"gas_limit", std::to_string(b.gas_limit)},
              {"block_reward_plus_fees", b.block_reward_plus_fees.str()},
              {"prices", std::move(prices)},
              {"pool_states", std::move(pools)},
              {"transactions", std::move(txs)}};
    if (!b.positions.empty()) {
        json positions = json::array();
        for (const auto& p : b.positions) positions.push_back(encode(p));
        j["positions"] = std::move(positions);
    }
    if (b.world_state) j["world_state"] = encode(*b.world_state);
    return j;
}

inline Block decode_block(const json& j) {
    Block b;
    b.number = get_u64(j, "number");
    b.gas_limit = get_u64(j, "gas_limit");
    b.block_reward_plus_fees = get_amount(j, "block_reward_plus_fees");
    for (const auto& [asset, price] : field(j, "prices").items()) b.prices[asset] = as_rational(price, "prices");
    for (const auto& p : field(j, "pool_states")) b.pool_states.push_back(decode_pool(p));
    for (const auto& t : field(j, "transactions")) b.transactions.push_back(decode_transaction(t));
    if (auto it = j.find("positions"); it != j.end())
        for (const auto& p : *it) b.positions.push_back(decode_position(p));
    if (auto it = j.find("world_state"); it != j.end() && !it->is_null()) b.world_state = decode_world(*it);
    return b;
}

} // namespace bev::codec
