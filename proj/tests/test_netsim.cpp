#include "doctest.h"

#include <cmath>
#include <numeric>

#include "pqcbench/metrics.hpp"
#include "pqcbench/netsim.hpp"
#include "pqcbench/suites.hpp"

using namespace pqcbench;

namespace {

NetworkPath lossless_path() {
    NetworkPath path = NetworkPath::default_path();
    for (auto& link : path.links) link.loss_prob = 0;
    return path;
}

NetworkPath lossy_path(double p) {
    NetworkPath path = NetworkPath::default_path();
    path.links[0].loss_prob = p;
    path.links[2].loss_prob = p;
    return path;
}

// Independent store-and-forward pipeline: per-link FIFO, serialization at
// rate_kbs * 1.024 bytes/ms, then propagation. Returns the delivery time of
// the last segment for a transfer entering an idle path at t = 0.
double pipeline_oracle(int64_t payload, const NetworkPath& path,
                       const ReliableTransportConfig& transport) {
    std::vector<int64_t> sizes = fragment(payload, path.path_mtu(), transport.segment_header_bytes);
    std::vector<double> lane_free(path.links.size(), 0.0);
    double last = 0;
    for (int64_t size : sizes) {
        double t = 0; // ready at the sender
        for (size_t i = 0; i < path.links.size(); ++i) {
            const LinkSpec& link = path.links[i];
            double wire = static_cast<double>(size + transport.segment_header_bytes);
            double begin = std::max(t, lane_free[i]);
            double end = begin + wire / (link.rate_kbs * 1.024);
            lane_free[i] = end;
            t = end + link.prop_delay_ms;
        }
        last = t;
    }
    return last;
}

} // namespace

TEST_CASE("fragment splits payloads at MTU minus header") {
    std::vector<int64_t> two = fragment(2800, 1440);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == 1400);
    CHECK(two[1] == 1400);

    // A sphincssha2128f signature: 12 full segments plus a 288-byte tail.
    std::vector<int64_t> sig = fragment(17088, 1440);
    REQUIRE(sig.size() == 13);
    CHECK(sig[12] == 17088 - 12 * 1400);

    CHECK(fragment(0, 1440).empty());
    CHECK(fragment(1, 1440).size() == 1);
    CHECK(fragment(1400, 1440).size() == 1);
    CHECK(fragment(1401, 1440).size() == 2);

    std::vector<int64_t> odd = fragment(99999, 1000, 100);
    int64_t total = std::accumulate(odd.begin(), odd.end(), int64_t{0});
    CHECK(total == 99999);
    for (int64_t s : odd) CHECK(s <= 900);

    CHECK_THROWS_AS(fragment(-1, 1440), NetsimError);
    CHECK_THROWS_AS(fragment(10, 40, 40), NetsimError);
}

TEST_CASE("lossless transmit matches the pipeline recurrence exactly") {
    NetworkPath path = lossless_path();
    ReliableTransportConfig transport;
    for (int64_t payload : {100ll, 1400ll, 2800ll, 50000ll, 80000ll}) {
        SessionTrace trace = transmit(payload, path, transport, 99);
        double expected = pipeline_oracle(payload, path, transport);
        CHECK(trace.start_ms == 0);
        CHECK(trace.end_ms == doctest::Approx(expected).epsilon(1e-12));
        CHECK(trace.totals.segments_retransmitted == 0);

        std::vector<int64_t> sizes = fragment(payload, path.path_mtu(), 40);
        int64_t wire = 0;
        for (int64_t s : sizes) wire += s + 40;
        CHECK(trace.totals.segments_sent == static_cast<int64_t>(sizes.size()));
        CHECK(trace.totals.bytes_tx == wire);
        // Delivered data at the far end plus one delivered 40-byte ack each.
        CHECK(trace.totals.bytes_rx == wire + static_cast<int64_t>(sizes.size()) * 40);
    }
}

TEST_CASE("single-segment latency is the closed-form sum of links") {
    NetworkPath path = lossless_path();
    ReliableTransportConfig transport;
    SessionTrace trace = transmit(100, path, transport, 1);
    double wire = 140.0;
    double expected = 0;
    for (const auto& link : path.links) {
        expected += wire / (link.rate_kbs * 1.024) + link.prop_delay_ms;
    }
    CHECK(trace.end_ms == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("loss adds retransmissions, and more loss adds more") {
    ReliableTransportConfig transport;
    int64_t retx_low = 0, retx_high = 0;
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        retx_low += transmit(50000, lossy_path(0.01), transport, seed)
                        .totals.segments_retransmitted;
        retx_high += transmit(50000, lossy_path(0.05), transport, seed)
                         .totals.segments_retransmitted;
    }
    CHECK(retx_low > 0);
    CHECK(retx_high > retx_low);
}

TEST_CASE("the sliding window caps unacked segments") {
    NetworkPath path = lossless_path();
    ReliableTransportConfig transport;
    transport.window_segments = 2;
    SessionTrace trace = transmit(7000, path, transport, 5); // 5 segments

    double first_ack = -1, third_send = -1;
    int sends = 0;
    for (const auto& ev : trace.events) {
        if (ev.kind == TraceEventKind::Sent && ++sends == 3 && third_send < 0) third_send = ev.t_ms;
        if (ev.kind == TraceEventKind::AckDelivered && first_ack < 0) first_ack = ev.t_ms;
    }
    REQUIRE(first_ack >= 0);
    REQUIRE(third_send >= 0);
    CHECK(third_send >= first_ack);
    CHECK(trace.totals.segments_sent == 5);
}

TEST_CASE("unrelenting loss exhausts retries and fails delivery") {
    NetworkPath path = NetworkPath::default_path();
    path.links[0].loss_prob = 0.999;
    ReliableTransportConfig transport;
    transport.max_retries = 3;

    SessionScenario scenario;
    scenario.suite = Registry::builtin().find_suite("mlkem512_mldsa44");
    scenario.path = path;
    scenario.transport = transport;
    SessionResult res = run_handshake_over_network(scenario, 4);
    CHECK(res.failed);
    CHECK(res.failure.rfind("delivery_failed:", 0) == 0);
    CHECK(res.trace.delivery_failed);
    CHECK_FALSE(res.transcript.completed);
}

TEST_CASE("a full handshake over the default path completes and derives keys") {
    SessionScenario scenario;
    scenario.suite = Registry::builtin().find_suite("mlkem768_mldsa65");
    SessionResult res = run_handshake_over_network(scenario, 1);
    REQUIRE_FALSE(res.failed);
    REQUIRE(res.transcript.completed);
    CHECK(res.transcript.session_key.size() == 32);
    CHECK(res.transcript.messages.size() == 6);

    double latency = handshake_latency_ms(res.trace);
    // Three one-way trips of 5 ms propagation each, plus serialization.
    CHECK(latency > 15.0);
    CHECK(latency < 100.0);

    // The application payload rides after the handshake: 47 segments of the
    // 65536 + 64-tag bytes plus the handshake's own segments.
    CHECK(res.trace.totals.segments_sent >= 47);
}

TEST_CASE("simulated cells replay identically for the same seed") {
    SessionScenario scenario;
    scenario.suite = Registry::builtin().find_suite("hqc128_falcon512");
    CellResult a = simulate_cell(scenario, 3, 2024);
    CellResult b = simulate_cell(scenario, 3, 2024);
    REQUIRE(a.sessions.size() == 3);
    REQUIRE(b.sessions.size() == 3);
    for (size_t i = 0; i < a.sessions.size(); ++i) {
        const SessionTrace& ta = a.sessions[i].trace;
        const SessionTrace& tb = b.sessions[i].trace;
        REQUIRE(ta.events.size() == tb.events.size());
        for (size_t j = 0; j < ta.events.size(); ++j) {
            CHECK(ta.events[j].t_ms == tb.events[j].t_ms);
            CHECK(ta.events[j].kind == tb.events[j].kind);
            CHECK(ta.events[j].segment_id == tb.events[j].segment_id);
            CHECK(ta.events[j].bytes == tb.events[j].bytes);
        }
        CHECK(ta.totals.bytes_tx == tb.totals.bytes_tx);
        CHECK(ta.totals.bytes_rx == tb.totals.bytes_rx);
        CHECK(a.sessions[i].transcript.session_key == b.sessions[i].transcript.session_key);
    }
    REQUIRE(a.server_busy.size() == b.server_busy.size());
    for (size_t i = 0; i < a.server_busy.size(); ++i) {
        CHECK(a.server_busy[i].begin_ms == b.server_busy[i].begin_ms);
        CHECK(a.server_busy[i].end_ms == b.server_busy[i].end_ms);
    }

    // Different seeds give different crypto bytes, hence different keys.
    CellResult c = simulate_cell(scenario, 3, 2025);
    CHECK(a.sessions[0].transcript.session_key != c.sessions[0].transcript.session_key);
}

TEST_CASE("queueing: ten clients make sessions slower than one") {
    SessionScenario scenario;
    scenario.suite = Registry::builtin().find_suite("mlkem512_falcon512");
    for (auto& link : scenario.path.links) link.loss_prob = 0;

    SessionResult solo = run_handshake_over_network(scenario, 77);
    CellResult crowd = simulate_cell(scenario, 10, 77);
    double worst = 0;
    for (const auto& s : crowd.sessions) {
        REQUIRE_FALSE(s.failed);
        worst = std::max(worst, handshake_latency_ms(s.trace));
    }
    CHECK(worst > handshake_latency_ms(solo.trace));
}

TEST_CASE("network path parses from config") {
    KeyValueFile kv = KeyValueFile::parse_text("link.ue1_gnb.rate_kbs = 999\n"
                                               "link.upf_ue2.loss_prob = 0.5\n");
    NetworkPath path = NetworkPath::from_config(kv);
    REQUIRE(path.links.size() == 3); // known names tweak the default path
    CHECK(path.links[0].rate_kbs == 999);
    CHECK(path.links[1].rate_kbs == 125000);
    CHECK(path.links[2].loss_prob == 0.5);

    KeyValueFile custom = KeyValueFile::parse_text("link.a.prop_delay_ms = 3\n"
                                                   "link.b.prop_delay_ms = 4\n"
                                                   "link.b.mtu = 900\n");
    NetworkPath p2 = NetworkPath::from_config(custom);
    REQUIRE(p2.links.size() == 2); // unknown names replace it
    CHECK(p2.links[0].name == "a");
    CHECK(p2.links[1].prop_delay_ms == 4);
    CHECK(p2.path_mtu() == 900);

    CHECK_THROWS_AS(NetworkPath::from_config(KeyValueFile::parse_text("link.a.nope = 1\n")),
                    ConfigError);
    CHECK_THROWS_AS(NetworkPath::from_config(KeyValueFile::parse_text("link.a = 1\n")),
                    ConfigError);
}

TEST_CASE("transport config validates its bounds") {
    KeyValueFile kv = KeyValueFile::parse_text("transport.window_segments = 16\n"
                                               "transport.rto_ms = 10\n");
    ReliableTransportConfig t = ReliableTransportConfig::from_config(kv);
    CHECK(t.window_segments == 16);
    CHECK(t.rto_ms == 10.0);
    CHECK(t.max_retries == 8);

    CHECK_THROWS_AS(
        ReliableTransportConfig::from_config(KeyValueFile::parse_text("transport.rto_ms = 0\n")),
        NetsimError);
    CHECK_THROWS_AS(ReliableTransportConfig::from_config(
                        KeyValueFile::parse_text("transport.window_segments = 0\n")),
                    NetsimError);
}

TEST_CASE("path validation rejects nonsense links") {
    SessionScenario scenario;
    scenario.suite = Registry::builtin().find_suite("mlkem512_mldsa44");
    scenario.path.links[1].rate_kbs = 0;
    CHECK_THROWS_AS(run_handshake_over_network(scenario, 1), NetsimError);

    scenario = SessionScenario{};
    scenario.suite = Registry::builtin().find_suite("mlkem512_mldsa44");
    scenario.path.links.clear();
    CHECK_THROWS_AS(run_handshake_over_network(scenario, 1), NetsimError);

    scenario = SessionScenario{};
    scenario.suite = Registry::builtin().find_suite("mlkem512_mldsa44");
    scenario.path.links[0].loss_prob = 1.0; // certain loss is rejected up front
    CHECK_THROWS_AS(run_handshake_over_network(scenario, 1), NetsimError);
}
