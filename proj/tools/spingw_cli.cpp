// Command-line front end: closed-loop experiment runs, packet/link codec
// probes, a loopback exerciser and the PC control channel over stdio.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spingw/spingw.hpp"

namespace {

std::uint64_t parse_number(const std::string& text) {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(text, &used, 0);
    if (used != text.size())
        throw std::invalid_argument("trailing characters in '" + text + "'");
    return v;
}

spingw::AckPolicy parse_ack_policy(const std::string& text) {
    if (text == "normal")
        return spingw::AckPolicy::normal();
    if (text == "never")
        return spingw::AckPolicy::never();
    if (text.rfind("delay:", 0) == 0)
        return spingw::AckPolicy::delay(parse_number(text.substr(6)));
    throw std::invalid_argument("ack policy must be normal, never or delay:N");
}

spingw::ExperimentConfig default_gateway_config() {
    spingw::ExperimentConfig cfg;
    cfg.schedule.push_back({0, 1000});
    cfg.routing.add_forward(0, 0);
    cfg.routing.add_reverse(6, 6);
    spingw::PopulationConfig ext;
    ext.name = "external";
    ext.model = spingw::PopulationConfig::Model::SpikeSource;
    cfg.network.populations.push_back(ext);
    return cfg;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, bool realtime) {
    spingw::ExperimentConfig cfg;
    try {
        cfg = spingw::ExperimentConfig::from_file(config_path);
    } catch (const spingw::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    if (realtime)
        cfg.realtime_pacing = true;
    const auto result = spingw::run_experiment(cfg);
    spingw::write_artifacts(result, out_dir);
    std::cout << "tx " << result.tx_count << ", rx " << result.rx_count << ", artifacts in "
              << out_dir << "\n";
    return 0;
}

int cmd_codec_encode(const std::string& key_text, const std::string& payload_text) {
    const auto key = static_cast<std::uint32_t>(parse_number(key_text));
    std::optional<std::uint32_t> payload;
    if (!payload_text.empty())
        payload = static_cast<std::uint32_t>(parse_number(payload_text));
    std::cout << spingw::serialize_packet(spingw::build_mc_packet(key, payload)).to_hex() << "\n";
    return 0;
}

int cmd_codec_decode(const std::string& hex) {
    const auto bits = spingw::PacketBits::from_hex(hex);
    try {
        const auto packet = spingw::parse_packet(bits);
        std::cout << "Multicast key=" << packet.key;
        if (packet.payload) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "0x%08x", *packet.payload);
            std::cout << " payload=" << buf;
        }
        std::cout << "\n";
    } catch (const spingw::ParityError&) {
        std::cout << "ParityError\n";
    } catch (const spingw::UnsupportedPacketType&) {
        std::cout << "UnsupportedPacketType\n";
    } catch (const spingw::FramingError&) {
        std::cout << "FramingError\n";
    }
    return 0;
}

int cmd_codec_frame(const std::string& hex) {
    const auto bits = spingw::PacketBits::from_hex(hex);
    bool first = true;
    for (const auto sym : spingw::frame_bits(bits)) {
        if (!first)
            std::cout << ' ';
        first = false;
        if (sym.is_eop())
            std::cout << "EOP";
        else
            std::cout << static_cast<unsigned>(sym.value());
    }
    std::cout << "\n";
    return 0;
}

int cmd_loopback(const std::string& policy_text, std::uint64_t packets) {
    const auto policy = parse_ack_policy(policy_text);
    std::vector<spingw::PacketBits> queue;
    for (std::uint64_t i = 0; i < packets; ++i)
        queue.push_back(
            spingw::serialize_packet(spingw::build_mc_packet(static_cast<std::uint32_t>(i))));
    const std::uint64_t ack_timeout = 1000;
    const std::uint64_t budget = packets * 19 * (policy.delay_ticks + 2) + ack_timeout + 64;
    const auto report = spingw::link_transfer(queue, policy, budget, ack_timeout);
    std::cout << "delivered " << report.delivered << ", symbols " << report.symbols_sent;
    if (report.stalled)
        std::cout << ", stalled at symbol " << report.stall_symbol_index;
    std::cout << "\n";
    return 0;
}

int cmd_pc(const std::string& config_path) {
    spingw::ExperimentConfig cfg =
        config_path.empty() ? default_gateway_config()
                            : spingw::ExperimentConfig::from_file(config_path);
    spingw::Gateway gw(spingw::GatewayConfig{cfg.rate, cfg.routing, cfg.tx_address,
                                             cfg.detector_window});
    std::vector<std::uint8_t> chunk(4096);
    while (std::cin) {
        std::cin.read(reinterpret_cast<char*>(chunk.data()),
                      static_cast<std::streamsize>(chunk.size()));
        const auto got = static_cast<std::size_t>(std::cin.gcount());
        if (got == 0)
            break;
        gw.feed_pc_bytes(std::span<const std::uint8_t>(chunk.data(), got));
        const auto out = gw.drain_pc_out();
        std::fwrite(out.data(), 1, out.size(), stdout);
    }
    gw.finish_pc_stream();
    const auto out = gw.drain_pc_out();
    std::fwrite(out.data(), 1, out.size(), stdout);
    std::fflush(stdout);
    std::cerr << spingw::monitor_json(gw.monitor()).dump() << "\n"
              << "checksum_errors " << gw.errors().pc_checksum << ", truncated "
              << gw.errors().pc_truncated << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"software model of a sensor-to-SpiNNaker link gateway"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool realtime = false;
    auto* run = app.add_subcommand("run", "run a closed-loop experiment from a config file");
    run->add_option("--config", config_path, "experiment config (INI)")->required();
    run->add_option("--out", out_dir, "artifact output directory")->required();
    run->add_flag("--realtime", realtime, "pace the virtual clock against wall time");

    auto* codec = app.add_subcommand("codec", "packet codec utilities");
    codec->require_subcommand(1);
    std::string key_text, payload_text, hex_text;
    auto* enc = codec->add_subcommand("encode", "build a multicast packet, print hex");
    enc->add_option("key", key_text, "32-bit routing key")->required();
    enc->add_option("payload", payload_text, "optional 32-bit payload");
    auto* dec = codec->add_subcommand("decode", "parse a hex packet");
    dec->add_option("hex", hex_text, "10- or 18-digit hex packet")->required();
    auto* frm = codec->add_subcommand("frame", "print a packet's link symbol sequence");
    frm->add_option("hex", hex_text, "10- or 18-digit hex packet")->required();

    std::string policy_text = "normal";
    std::uint64_t packets = 1;
    auto* loopback = app.add_subcommand("loopback", "push packets through one link direction");
    loopback->add_option("--ack-policy", policy_text, "normal, never or delay:N");
    loopback->add_option("--packets", packets, "number of packets to send");

    std::string pc_config;
    auto* pc = app.add_subcommand("pc", "PC control channel over stdin/stdout");
    pc->add_option("--config", pc_config, "experiment config for the gateway instance");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, out_dir, realtime);
        if (codec->parsed()) {
            if (enc->parsed())
                return cmd_codec_encode(key_text, payload_text);
            if (dec->parsed())
                return cmd_codec_decode(hex_text);
            return cmd_codec_frame(hex_text);
        }
        if (loopback->parsed())
            return cmd_loopback(policy_text, packets);
        if (pc->parsed())
            return cmd_pc(pc_config);
    } catch (const spingw::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const spingw::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
