#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "spingw/config.hpp"

using namespace spingw;

namespace {

// a minimal but complete experiment description
const std::string kBase = R"(
[experiment]
duration_ms = 10000

[rate]
tick_rate = 1000000
f_min_mhz = 1000
f_max_mhz = 1000000
v_min = 0
v_max = 999

[schedule]
0 = 1000
5000 = 10000

[gateway]
tx_address = 0
detector_window = 1

[routing forward]
0 = 0

[routing reverse]
6 = 6

[network]
dt_us = 1000

[population external]
model = spike_source
size = 1

[population set_value]
model = if_curr_exp
size = 1
tau_m = 3.0
tau_syn_E = 0.5
tau_syn_I = 0.5
tau_refrac = 0.0
v_rest = -65.0
v_reset = -65.0
v_thresh = -50.0
c_m = 1.0
i_offset = 0.0

[projection stimulus]
source = external
target = set_value
weight = 40.9
delay_ms = 0.0

[input_keys]
0 = external:0

[live_output set_value]
0 = 6
)";

std::string replaced(const std::string& from, const std::string& to) {
    std::string text = kBase;
    const auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    text.replace(at, from.size(), to);
    return text;
}

} // namespace

TEST_CASE("a full config parses") {
    const auto cfg = ExperimentConfig::from_ini_text(kBase);
    REQUIRE(cfg.duration_ms == 10'000);
    REQUIRE(cfg.rate.tick_rate == 1'000'000);
    REQUIRE(cfg.schedule.size() == 2);
    REQUIRE(cfg.schedule[1].start_ms == 5'000);
    REQUIRE(cfg.schedule[1].frequency_mhz == 10'000);
    REQUIRE(cfg.network.populations.size() == 2);
    REQUIRE(cfg.network.populations[1].params.tau_m_ms == 3.0);
    REQUIRE(cfg.network.projections.size() == 1);
    REQUIRE(cfg.network.projections[0].weight_na == 40.9);
    REQUIRE(cfg.network.input_keys.at(0) ==
            std::pair<std::string, std::uint32_t>{"external", 0});
    REQUIRE(cfg.routing.reverse_address(6) == 6);
    REQUIRE_FALSE(cfg.realtime_pacing);
}

TEST_CASE("frequencies above the cap are rejected with the cap in the message") {
    const auto text = replaced("5000 = 10000", "5000 = 1500000");
    try {
        ExperimentConfig::from_ini_text(text);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("1 kHz cap") != std::string::npos);
    }
}

TEST_CASE("diagnostics carry line and field") {
    const auto text = replaced("tick_rate = 1000000", "tick_rate = banana");
    try {
        ExperimentConfig::from_ini_text(text);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        REQUIRE(what.find("line") != std::string::npos);
        REQUIRE(what.find("[rate] tick_rate") != std::string::npos);
    }
}

TEST_CASE("schedule rules") {
    SECTION("must start at zero") {
        REQUIRE_THROWS_AS(ExperimentConfig::from_ini_text(replaced("0 = 1000", "1 = 1000")),
                          ConfigError);
    }
    SECTION("must be strictly increasing") {
        REQUIRE_THROWS_AS(
            ExperimentConfig::from_ini_text(replaced("5000 = 10000", "0 = 10000")),
            ConfigError);
    }
    SECTION("must stay inside the configured rate range") {
        REQUIRE_THROWS_AS(ExperimentConfig::from_ini_text(replaced("5000 = 10000", "5000 = 500")),
                          ConfigError);
    }
}

TEST_CASE("structural errors") {
    SECTION("unknown section") {
        REQUIRE_THROWS_AS(ExperimentConfig::from_ini_text(kBase + "\n[bogus]\nx = 1\n"),
                          ConfigError);
    }
    SECTION("unknown key") {
        REQUIRE_THROWS_AS(
            ExperimentConfig::from_ini_text(replaced("duration_ms = 10000",
                                                     "duration_millis = 10000")),
            ConfigError);
    }
    SECTION("entry before any section") {
        REQUIRE_THROWS_AS(ini::parse("x = 1\n"), ConfigError);
    }
    SECTION("missing equals sign") {
        REQUIRE_THROWS_AS(ini::parse("[a]\nnot an entry\n"), ConfigError);
    }
    SECTION("unterminated section header") {
        REQUIRE_THROWS_AS(ini::parse("[a\n"), ConfigError);
    }
}

TEST_CASE("comments and spacing are tolerated") {
    const auto sections = ini::parse("; leading comment\n[a b]\n  x = 1  \n# another\ny=2\n");
    REQUIRE(sections.size() == 1);
    REQUIRE(sections[0].name == "a b");
    REQUIRE(sections[0].entries.size() == 2);
    REQUIRE(sections[0].entries[0].key == "x");
    REQUIRE(sections[0].entries[0].value == "1");
    REQUIRE(sections[0].entries[1].key == "y");
}

TEST_CASE("validation catches cross-section mistakes") {
    SECTION("tx_address needs a forward route") {
        REQUIRE_THROWS_AS(
            ExperimentConfig::from_ini_text(replaced("tx_address = 0", "tx_address = 3")),
            ConfigError);
    }
    SECTION("duration must be whole steps") {
        auto text = replaced("duration_ms = 10000", "duration_ms = 10000");
        text = replaced("dt_us = 1000", "dt_us = 3000");
        REQUIRE_THROWS_AS(ExperimentConfig::from_ini_text(text), ConfigError);
    }
    SECTION("duration zero is allowed") {
        const auto cfg =
            ExperimentConfig::from_ini_text(replaced("duration_ms = 10000", "duration_ms = 0"));
        REQUIRE(cfg.duration_ms == 0);
    }
}
