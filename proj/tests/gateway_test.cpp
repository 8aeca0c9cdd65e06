#include <catch2/catch_amalgamated.hpp>

#include "spingw/gateway.hpp"

using namespace spingw;

namespace {

GatewayConfig experiment_gateway() {
    GatewayConfig cfg;
    cfg.routing.add_forward(0, 0);
    cfg.routing.add_reverse(6, 6);
    return cfg;
}

std::vector<std::uint64_t> spike_ticks(Gateway& gw, std::uint64_t from, std::uint64_t to) {
    std::vector<std::uint64_t> ticks;
    for (std::uint64_t t = from; t < to; ++t)
        if (!gw.tick(t).empty())
            ticks.push_back(t);
    return ticks;
}

} // namespace

TEST_CASE("ingest_sample sets the period through the rate codec") {
    Gateway gw(experiment_gateway());
    gw.ingest_sample(0); // 1 Hz
    REQUIRE(gw.current_period() == 1'000'000);
    gw.ingest_sample(9); // 10 Hz
    REQUIRE(gw.current_period() == 100'000);
}

TEST_CASE("out-of-range samples are counted and change nothing") {
    Gateway gw(experiment_gateway());
    gw.ingest_sample(9);
    gw.ingest_sample(5000);
    REQUIRE(gw.current_period() == 100'000);
    REQUIRE(gw.errors().out_of_range == 1);
}

TEST_CASE("gateway_tick emits on the spike schedule") {
    GatewayConfig cfg = experiment_gateway();
    cfg.rate = RateConfig{1'000'000, 1'000, 1'000'000, 0, 999};
    Gateway gw(cfg);

    SECTION("no sample yet means no packets ever") {
        for (std::uint64_t t = 0; t < 1000; ++t)
            REQUIRE(gw.tick(t).empty());
        REQUIRE(gw.tx_total() == 0);
    }
    SECTION("period 10 fires at 10, 20, 30") {
        // craft a config whose value 999 gives a 10-tick period
        GatewayConfig fast = experiment_gateway();
        fast.rate.tick_rate = 10'000; // 1 kHz -> 10 ticks
        Gateway g(fast);
        g.ingest_sample(999);
        REQUIRE(g.current_period() == 10);
        REQUIRE(spike_ticks(g, 0, 36) == std::vector<std::uint64_t>{10, 20, 30});
    }
    SECTION("packets carry the forward-mapped key") {
        gw.ingest_sample(999); // 1 kHz, period 1000
        const auto ticks = spike_ticks(gw, 0, 3001);
        REQUIRE(ticks == std::vector<std::uint64_t>{1000, 2000, 3000});
        REQUIRE(gw.tx_counters().at(0) == 3);
    }
}

TEST_CASE("a frequency change takes effect at the next spike") {
    GatewayConfig cfg = experiment_gateway();
    Gateway gw(cfg);
    gw.ingest_sample(0); // 1 Hz
    std::vector<std::uint64_t> ticks;
    for (std::uint64_t t = 0; t < 2'600'000; ++t) {
        if (t == 1'500'000)
            gw.ingest_sample(9); // 10 Hz, mid-interval
        if (!gw.tick(t).empty())
            ticks.push_back(t);
    }
    // spike at 2 s still on the old schedule, then 100 ms gaps
    REQUIRE(ticks == std::vector<std::uint64_t>{1'000'000, 2'000'000, 2'100'000, 2'200'000,
                                                2'300'000, 2'400'000, 2'500'000});
}

TEST_CASE("handle_rx_packet counts, measures and reports") {
    Gateway gw(experiment_gateway());

    SECTION("54 packets leave counter 54") {
        for (int i = 0; i < 54; ++i)
            gw.handle_rx_packet(build_mc_packet(6), 1000 + 100 * static_cast<std::uint64_t>(i));
        REQUIRE(gw.rx_counters().at(6) == 54);
        REQUIRE(gw.rx_total() == 54);
    }
    SECTION("first packet has no frequency estimate yet") {
        gw.handle_rx_packet(build_mc_packet(6), 777);
        REQUIRE(gw.rx_counters().at(6) == 1);
        REQUIRE_FALSE(gw.measured_period(6).has_value());
    }
    SECTION("two packets 100000 ticks apart measure 10 Hz") {
        gw.handle_rx_packet(build_mc_packet(6), 100'000);
        gw.handle_rx_packet(build_mc_packet(6), 200'000);
        REQUIRE(gw.measured_period(6) == 100'000);
        REQUIRE(gw.measured_frequencies_mhz().at(6) == 10'000);
    }
    SECTION("every accepted packet queues an event report") {
        gw.handle_rx_packet(build_mc_packet(6), 42);
        const auto out = gw.drain_pc_out();
        const auto r = decode_control_frames(out);
        REQUIRE(r.frames.size() == 1);
        REQUIRE(r.frames[0].frame_type == FrameType::EventReport);
        REQUIRE(r.frames[0].payload_u32(0) == 6);
        REQUIRE(r.frames[0].payload_u64(4) == 42);
    }
    SECTION("unroutable keys are counted and skip the detector") {
        gw.handle_rx_packet(build_mc_packet(0xDEAD), 1);
        gw.handle_rx_packet(build_mc_packet(0xDEAD), 2);
        REQUIRE(gw.rx_counters().at(0xDEAD) == 2); // parsed packets still count
        REQUIRE(gw.errors().unroutable == 2);
        REQUIRE_FALSE(gw.measured_period(0xDEAD).has_value());
        REQUIRE(gw.drain_pc_out().empty());
    }
}

TEST_CASE("handle_rx_bits drops corrupt words before the counters") {
    Gateway gw(experiment_gateway());
    auto good = serialize_packet(build_mc_packet(6));
    gw.handle_rx_bits(good, 10);
    auto corrupt = good;
    corrupt.set(13, !corrupt.get(13));
    gw.handle_rx_bits(corrupt, 20);
    REQUIRE(gw.rx_counters().at(6) == 1);
    REQUIRE(gw.errors().parity == 1);

    PacketBits wrong_type;
    wrong_type.low = 0x40; // valid parity, type bits 01
    gw.handle_rx_bits(wrong_type, 30);
    REQUIRE(gw.errors().framing == 1);
    REQUIRE(gw.rx_total() == 1);
}

TEST_CASE("pc channel controls the gateway") {
    Gateway gw(experiment_gateway());

    SECTION("SetValue frames feed the rate generator") {
        const auto frame = encode_control_frame(ControlFrame::set_value(9));
        gw.feed_pc_bytes(frame);
        REQUIRE(gw.current_period() == 100'000);
        REQUIRE(gw.last_value() == 9);
    }
    SECTION("QueryCounter answers with a CounterReport") {
        gw.handle_rx_packet(build_mc_packet(6), 5);
        gw.drain_pc_out(); // discard the event report
        gw.feed_pc_bytes(encode_control_frame(ControlFrame::query_counter(6)));
        const auto r = decode_control_frames(gw.drain_pc_out());
        REQUIRE(r.frames.size() == 1);
        REQUIRE(r.frames[0].frame_type == FrameType::CounterReport);
        REQUIRE(r.frames[0].payload_u32(0) == 6);
        REQUIRE(r.frames[0].payload_u64(4) == 1);
    }
    SECTION("SetDisplayMode switches the monitor") {
        gw.feed_pc_bytes(encode_control_frame(ControlFrame::set_display_mode(
            static_cast<std::uint8_t>(DisplayMode::Errors))));
        REQUIRE(gw.monitor().mode == DisplayMode::Errors);
    }
    SECTION("corrupt bytes are counted, valid frames still land") {
        auto broken = encode_control_frame(ControlFrame::set_value(3));
        broken.back() ^= 0x01;
        gw.feed_pc_bytes(broken);
        gw.feed_pc_bytes(encode_control_frame(ControlFrame::set_value(9)));
        gw.finish_pc_stream();
        REQUIRE(gw.errors().pc_checksum == 1);
        REQUIRE(gw.last_value() == 9);
    }
}

TEST_CASE("monitor registers follow the display mode") {
    Gateway gw(experiment_gateway());
    gw.ingest_sample(54);
    REQUIRE(gw.monitor().mode == DisplayMode::SetValue);
    REQUIRE(gw.monitor().displayed_value == 54);
    REQUIRE(gw.monitor().digits == seven_segment_render(54));

    gw.set_display_mode(DisplayMode::RxCount);
    for (int i = 0; i < 3; ++i)
        gw.handle_rx_packet(build_mc_packet(6), 100'000 * static_cast<std::uint64_t>(i + 1));
    REQUIRE(gw.monitor().displayed_value == 3);

    gw.set_display_mode(DisplayMode::MeasuredFreq);
    REQUIRE(gw.monitor().displayed_value == 10'000); // 100 ms gaps measure 10 Hz

    gw.set_display_mode(DisplayMode::Errors);
    gw.ingest_sample(123456); // out of range
    REQUIRE(gw.monitor().displayed_value == gw.errors().total());
}

TEST_CASE("event trace carries running per-key counts") {
    Gateway gw(experiment_gateway());
    gw.ingest_sample(999);
    for (std::uint64_t t = 0; t < 2001; ++t)
        gw.tick(t);
    gw.handle_rx_packet(build_mc_packet(6), 2500);
    const auto& trace = gw.trace();
    REQUIRE(trace.size() == 3);
    REQUIRE(trace[0].tx);
    REQUIRE(trace[0].counter == 1);
    REQUIRE(trace[1].counter == 2);
    REQUIRE_FALSE(trace[2].tx);
    REQUIRE(trace[2].key == 6);
    REQUIRE(trace[2].counter == 1);
}

TEST_CASE("gateway config validation") {
    GatewayConfig cfg; // empty routing table
    REQUIRE_THROWS_AS(Gateway(cfg), ConfigError);
    cfg = experiment_gateway();
    cfg.detector_window = 0;
    REQUIRE_THROWS_AS(Gateway(cfg), ConfigError);
}
