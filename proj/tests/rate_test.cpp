#include <catch2/catch_amalgamated.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include "spingw/rate.hpp"

using namespace spingw;
using boost::multiprecision::cpp_int;

namespace {

// Independent oracle: exact rational arithmetic over arbitrary-precision
// integers, round-half-up as floor((2n + d) / (2d)).
cpp_int oracle_round_half_up(const cpp_int& num, const cpp_int& den) {
    cpp_int n2 = 2 * num + den;
    cpp_int d2 = 2 * den;
    cpp_int q = n2 / d2;
    if (n2 % d2 != 0 && n2 < 0)
        --q;
    return q;
}

cpp_int oracle_period(std::int64_t value, const RateConfig& cfg) {
    const cpp_int span = cfg.v_max - cfg.v_min;
    const cpp_int f_num =
        cpp_int(cfg.f_min_mhz) * span + cpp_int(value - cfg.v_min) * (cfg.f_max_mhz - cfg.f_min_mhz);
    return oracle_round_half_up(cpp_int(1000) * cfg.tick_rate * span, f_num);
}

const RateConfig kEightBit{1'000'000, 1'000, 1'000'000, 0, 255};

} // namespace

TEST_CASE("value_to_period baselines") {
    RateConfig cfg;
    cfg.f_min_mhz = 1'000; // 1 Hz
    SECTION("v_min maps to f_min") {
        REQUIRE(value_to_period(cfg.v_min, cfg) == 1'000'000);
    }
    SECTION("10 Hz maps to 100000 ticks") {
        // default map: f(v) = (v + 1) Hz, so v = 9 is 10 Hz
        REQUIRE(value_to_period(9, cfg) == 100'000);
    }
    SECTION("out of range") {
        REQUIRE_THROWS_AS(value_to_period(cfg.v_max + 1, cfg), ValueOutOfRange);
        REQUIRE_THROWS_AS(value_to_period(cfg.v_min - 1, cfg), ValueOutOfRange);
    }
}

TEST_CASE("8-bit sweep matches the big-integer oracle") {
    for (std::int64_t v = 0; v <= 255; ++v) {
        const cpp_int expected = oracle_period(v, kEightBit);
        REQUIRE(cpp_int(value_to_period(v, kEightBit)) == expected);
    }
}

TEST_CASE("sweep round trip stays within one sensor unit") {
    for (std::int64_t v = 0; v <= 255; ++v) {
        const auto period = value_to_period(v, kEightBit);
        const auto back = period_to_value(period, kEightBit);
        REQUIRE(std::llabs(back - v) <= 1);
    }
}

TEST_CASE("no value produces a frequency above the cap") {
    for (std::int64_t v = 0; v <= 255; ++v) {
        const auto period = value_to_period(v, kEightBit);
        REQUIRE(period_to_freq_mhz(period, kEightBit.tick_rate) <= kFrequencyCapMhz);
    }
}

TEST_CASE("periods are non-increasing in the value") {
    std::uint64_t prev = value_to_period(0, kEightBit);
    for (std::int64_t v = 1; v <= 255; ++v) {
        const auto period = value_to_period(v, kEightBit);
        REQUIRE(period <= prev);
        prev = period;
    }
}

TEST_CASE("period_to_value endpoints") {
    REQUIRE(period_to_value(value_to_period(kEightBit.v_min, kEightBit), kEightBit) ==
            kEightBit.v_min);
    REQUIRE(period_to_value(value_to_period(kEightBit.v_max, kEightBit), kEightBit) ==
            kEightBit.v_max);
    SECTION("clamped outside the range") {
        REQUIRE(period_to_value(value_to_period(kEightBit.v_min, kEightBit) * 10, kEightBit) ==
                kEightBit.v_min);
        REQUIRE_THROWS_AS(period_to_value(0, kEightBit), ZeroPeriod);
    }
}

TEST_CASE("generate_spike_train") {
    SECTION("period 10 over 35 ticks") {
        const auto train = generate_spike_train(10, 0, 35);
        REQUIRE(train.ticks == std::vector<std::uint64_t>{10, 20, 30});
    }
    SECTION("half-open window boundary") {
        REQUIRE(generate_spike_train(1000, 0, 5000).ticks.size() == 4);
        REQUIRE(generate_spike_train(1000, 0, 5001).ticks.size() == 5);
    }
    SECTION("zero period") {
        REQUIRE_THROWS_AS(generate_spike_train(0, 0, 100), ZeroPeriod);
    }
    SECTION("count equals the number of multiples inside the window") {
        for (std::uint64_t period : {1ull, 3ull, 7ull, 100ull})
            for (std::uint64_t duration : {0ull, 1ull, 99ull, 700ull}) {
                const auto train = generate_spike_train(period, 5, duration);
                std::uint64_t expected = 0;
                for (std::uint64_t k = 1; k * period < duration; ++k)
                    ++expected;
                REQUIRE(train.ticks.size() == expected);
                REQUIRE(train.strictly_increasing());
            }
    }
}

TEST_CASE("the experiment schedule yields 54 spikes") {
    // 1 Hz with the switch tick itself still on the old pace, then 10 Hz
    const auto slow = generate_spike_train(1'000'000, 0, 5'000'001);
    const auto fast = generate_spike_train(100'000, 5'000'000, 5'000'000);
    REQUIRE(slow.ticks.size() == 5);
    REQUIRE(fast.ticks.size() == 49);
    REQUIRE(slow.ticks.back() == 5'000'000);
    REQUIRE(fast.ticks.front() == 5'100'000);
    REQUIRE(slow.ticks.size() + fast.ticks.size() == 54);
}

TEST_CASE("estimate_period") {
    SECTION("single interval") {
        REQUIRE(estimate_period(SpikeTrain{{10, 20, 30}}, 1) == 10);
    }
    SECTION("not enough spikes") {
        REQUIRE_THROWS_AS(estimate_period(SpikeTrain{{10}}, 1), NotEnoughSpikes);
    }
    SECTION("jittered intervals average out") {
        // inter-spike intervals 99, 101, 100, 100
        REQUIRE(estimate_period(SpikeTrain{{0, 99, 200, 300, 400}}, 4) == 100);
    }
    SECTION("rounding is half-up") {
        // intervals 3, 4 -> mean 3.5 -> 4
        REQUIRE(estimate_period(SpikeTrain{{0, 3, 7}}, 2) == 4);
    }
}

TEST_CASE("frequency helpers") {
    REQUIRE(period_to_freq_mhz(100'000, 1'000'000) == 10'000);
    REQUIRE(freq_to_value(1'000, RateConfig{}) == 0);
    REQUIRE(freq_to_value(10'000, RateConfig{}) == 9);
    REQUIRE(freq_to_value(1'000'000, RateConfig{}) == 999);
}

TEST_CASE("config validation") {
    RateConfig bad;
    bad.f_max_mhz = 2'000'000;
    REQUIRE_THROWS_AS(bad.validate(), ConfigError);
    bad = RateConfig{};
    bad.v_min = bad.v_max;
    REQUIRE_THROWS_AS(bad.validate(), ConfigError);
    bad = RateConfig{};
    bad.f_min_mhz = 0;
    REQUIRE_THROWS_AS(bad.validate(), ConfigError);
}
