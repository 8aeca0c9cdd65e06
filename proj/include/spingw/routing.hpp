#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "spingw/errors.hpp"

namespace spingw {

/// A neuron address paired with the virtual-clock tick at which it fired.
struct AerEvent {
    std::uint32_t address = 0;
    std::uint64_t timestamp = 0; // ticks

    bool operator==(const AerEvent&) const = default;
};

/// Bidirectional address <-> routing-key table. The reverse side may carry
/// keys the forward side never produces (remote populations answer with
/// their own keys).
class RoutingTable {
public:
    void add_forward(std::uint32_t address, std::uint32_t key) {
        for (const auto& [a, k] : forward_)
            if (k == key && a != address)
                throw ConfigError("forward routing is not injective: key " + std::to_string(key) +
                                  " already mapped from address " + std::to_string(a));
        forward_[address] = key;
        check_consistency(address, key);
    }

    void add_reverse(std::uint32_t key, std::uint32_t address) {
        reverse_[key] = address;
        for (const auto& [a, k] : forward_)
            check_consistency(a, k);
    }

    std::optional<std::uint32_t> forward_key(std::uint32_t address) const {
        auto it = forward_.find(address);
        if (it == forward_.end())
            return std::nullopt;
        return it->second;
    }

    std::optional<std::uint32_t> reverse_address(std::uint32_t key) const {
        auto it = reverse_.find(key);
        if (it == reverse_.end())
            return std::nullopt;
        return it->second;
    }

    const std::map<std::uint32_t, std::uint32_t>& forward_entries() const { return forward_; }
    const std::map<std::uint32_t, std::uint32_t>& reverse_entries() const { return reverse_; }

    static RoutingTable identity(std::uint32_t n) {
        RoutingTable t;
        for (std::uint32_t i = 0; i < n; ++i) {
            t.add_forward(i, i);
            t.add_reverse(i, i);
        }
        return t;
    }

private:
    // Where a forward key also appears in the reverse table, the reverse
    // entry must invert it.
    void check_consistency(std::uint32_t address, std::uint32_t key) const {
        auto it = reverse_.find(key);
        if (it != reverse_.end() && it->second != address)
            throw ConfigError("reverse entry for key " + std::to_string(key) +
                              " does not invert the forward mapping");
    }

    std::map<std::uint32_t, std::uint32_t> forward_;
    std::map<std::uint32_t, std::uint32_t> reverse_;
};

inline std::uint32_t map_event_to_key(const AerEvent& event, const RoutingTable& table) {
    auto key = table.forward_key(event.address);
    if (!key)
        throw UnroutableEvent("address " + std::to_string(event.address) +
                              " has no forward routing entry");
    return *key;
}

inline AerEvent map_key_to_event(std::uint32_t key, const RoutingTable& table, std::uint64_t now) {
    auto address = table.reverse_address(key);
    if (!address)
        throw UnroutableKey("key " + std::to_string(key) + " has no reverse routing entry");
    return AerEvent{*address, now};
}

} // namespace spingw
