#pragma once

#include "bevscan/bevscan.hpp"

namespace testing_util {

using namespace bev;

inline Address addr(std::uint64_t n) { return Address::from_counter(n, 0x11); }

inline Transaction swap_tx(std::uint32_t index, Address sender, std::optional<Address> to, const MarketId& market,
                           const AssetId& in, Amount amount_in, const AssetId& out, Amount amount_out,
                           Amount gas_price = Amount(10) * kGwei) {
    Transaction tx;
    tx.hash = TxHash::from_counter(index + 1000, 0x22);
    tx.index = index;
    tx.sender = sender;
    tx.to = to;
    tx.gas_price = std::move(gas_price);
    tx.gas_used = 100'000;
    tx.events.push_back(SwapEvent{"uni", market, {in, std::move(amount_in), out, std::move(amount_out)}});
    return tx;
}

inline Transaction plain_tx(std::uint32_t index, Address sender, std::uint64_t gas, Amount gas_price = Amount(kGwei)) {
    Transaction tx;
    tx.hash = TxHash::from_counter(index + 5000, 0x33);
    tx.index = index;
    tx.sender = sender;
    tx.gas_used = gas;
    tx.gas_price = std::move(gas_price);
    return tx;
}

inline Block block(std::uint64_t number, std::vector<Transaction> txs, std::uint64_t gas_limit = 30'000'000) {
    Block b;
    b.number = number;
    b.gas_limit = gas_limit;
    b.transactions = std::move(txs);
    for (std::uint32_t i = 0; i < b.transactions.size(); ++i) b.transactions[i].index = i;
    b.block_reward_plus_fees = Amount(2) * native_unit();
    return b;
}

} // namespace testing_util
