#include "doctest.h"

#include <cmath>

#include "pqcbench/metrics.hpp"
#include "pqcbench/prf.hpp"

using namespace pqcbench;

namespace {

SessionTrace trace_with(double start, double end, int64_t tx, int64_t rx) {
    SessionTrace trace;
    trace.start_ms = start;
    trace.end_ms = end;
    trace.totals.bytes_tx = tx;
    trace.totals.bytes_rx = rx;
    return trace;
}

} // namespace

TEST_CASE("retransmission rate matches golden reference values") {
    // (retransmissions, total sent) -> rate, to four printed decimals.
    struct { int64_t retx, sent; const char* rate; } rows[] = {
        {1, 1086, "0.0921"},  {6, 2908, "0.2063"}, {22, 7287, "0.3019"},
        {0, 985, "0.0000"},   {3, 1489, "0.2015"}, {8, 8159, "0.0981"},
        {1, 2978, "0.0336"},  {13, 7485, "0.1737"}, {0, 1386, "0.0000"},
    };
    for (const auto& row : rows) {
        TraceTotals totals;
        totals.segments_sent = row.sent;
        totals.segments_retransmitted = row.retx;
        CHECK(format_fixed(retransmission_rate_pct(totals), 4) == row.rate);
    }

    TraceTotals empty;
    CHECK_THROWS_AS(retransmission_rate_pct(empty), ZeroDurationError);
}

TEST_CASE("bandwidth divides total bytes by the trace span") {
    // 2048 bytes over 2 seconds = 1 KB/s.
    CHECK(bandwidth_kbs(trace_with(0, 2000, 1024, 1024)) == doctest::Approx(1.0));
    CHECK(bandwidth_kbs(trace_with(500, 1500, 10240, 0)) == doctest::Approx(10.0));
    CHECK_THROWS_AS(bandwidth_kbs(trace_with(5, 5, 100, 100)), ZeroDurationError);
}

TEST_CASE("handshake latency spans first hello byte to delivered finished") {
    SessionTrace trace;
    trace.events.push_back({1.5, TraceEventKind::Sent, 0, 972, Direction::ClientToServer,
                            "client_hello"});
    trace.events.push_back({3.0, TraceEventKind::Delivered, 0, 972, Direction::ClientToServer,
                            "client_hello"});
    trace.events.push_back({20.25, TraceEventKind::Delivered, 9, 76, Direction::ClientToServer,
                            "client_finished"});
    CHECK(handshake_latency_ms(trace) == doctest::Approx(18.75));

    SessionTrace incomplete;
    incomplete.events.push_back({0.0, TraceEventKind::Sent, 0, 972, Direction::ClientToServer,
                                 "client_hello"});
    CHECK_THROWS_AS(handshake_latency_ms(incomplete), IncompleteHandshakeError);
    CHECK_THROWS_AS(handshake_latency_ms(SessionTrace{}), IncompleteHandshakeError);
}

TEST_CASE("one 10000 us job inside a 100 ms window is 10 percent") {
    CpuModel model;
    model.window_ms = 100.0;
    std::vector<BusyInterval> busy = {{40.0, 50.0, "sign"}};
    CHECK(max_cpu_pct(busy, model) == doctest::Approx(10.0));
}

TEST_CASE("peak window finds the densest stretch of work") {
    CpuModel model;
    model.window_ms = 100.0;

    // Overlapping intervals merge before measuring.
    std::vector<BusyInterval> overlap = {{0, 10, "a"}, {5, 20, "b"}};
    CHECK(max_cpu_pct(overlap, model) == doctest::Approx(20.0));

    // Two distant bursts: no window of 100 covers more than 15 ms of work.
    std::vector<BusyInterval> spread = {{0, 10, "a"}, {95, 105, "b"}};
    CHECK(max_cpu_pct(spread, model) == doctest::Approx(15.0));

    // A window-filling interval saturates at 100.
    std::vector<BusyInterval> solid = {{0, 500, "a"}};
    CHECK(max_cpu_pct(solid, model) == doctest::Approx(100.0));

    // Idle trace reports the floor.
    CHECK(max_cpu_pct(std::vector<BusyInterval>{}, model) == 0.0);
    model.idle_floor_pct = 2.5;
    CHECK(max_cpu_pct(std::vector<BusyInterval>{}, model) == doctest::Approx(2.5));
}

TEST_CASE("cpu model reads window and floor from config") {
    KeyValueFile kv = KeyValueFile::parse_text("cpu.window_ms = 250\ncpu.idle_floor_pct = 1\n");
    CpuModel model = CpuModel::from_config(kv);
    CHECK(model.window_ms == 250.0);
    CHECK(model.idle_floor_pct == 1.0);
    CHECK(CpuModel::from_config(KeyValueFile::parse_text("")).window_ms == 1000.0);
    CHECK_THROWS_AS(CpuModel::from_config(KeyValueFile::parse_text("cpu.window_ms = 0\n")),
                    MetricsError);
}

TEST_CASE("min-max normalization matches a golden falcon512 CPU column") {
    // CPU column of the falcon512 table: nine KEM rows.
    std::vector<double> cpu = {0.30, 1.00, 1.20, 0.20, 0.30, 0.80, 1.20, 2.30, 4.60};
    std::vector<double> norm = minmax_normalize(cpu);
    REQUIRE(norm.size() == 9);
    CHECK(std::abs(norm[0] - 0.0227) < 0.0001); // X25519
    CHECK(norm[3] == 0.0);                      // mlkem512, the minimum
    CHECK(norm[8] == 1.0);                      // hqc256, the maximum
    for (double v : norm) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("normalization is invariant under positive affine maps") {
    RandomStream rng(12345);
    for (int series = 0; series < 100; ++series) {
        size_t n = 2 + static_cast<size_t>(rng.next_u64() % 15);
        std::vector<double> values;
        for (size_t i = 0; i < n; ++i) values.push_back(rng.uniform01() * 100.0 - 50.0);
        double scale = 0.1 + rng.uniform01() * 9.9;
        double shift = rng.uniform01() * 40.0 - 20.0;
        std::vector<double> mapped;
        for (double v : values) mapped.push_back(scale * v + shift);

        std::vector<double> a = minmax_normalize(values);
        std::vector<double> b = minmax_normalize(mapped);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(std::abs(a[i] - b[i]) < 1e-9);
        }
    }
}

TEST_CASE("constant series normalize to zeros, empty series throw") {
    std::vector<double> norm = minmax_normalize({3.0, 3.0, 3.0});
    for (double v : norm) CHECK(v == 0.0);
    CHECK_THROWS_AS(minmax_normalize({}), EmptySeriesError);
}

TEST_CASE("session CPU overload reads the per-session busy list") {
    SessionTrace trace;
    trace.server_busy.push_back({10.0, 20.0, "sign"});
    CpuModel model;
    model.window_ms = 100.0;
    CHECK(max_cpu_pct(trace, model) == doctest::Approx(10.0));
}

TEST_CASE("format_fixed is plain decimal with the asked precision") {
    CHECK(format_fixed(0.092081, 4) == "0.0921");
    CHECK(format_fixed(3.0, 2) == "3.00");
    CHECK(format_fixed(12.6, 0) == "13");
    CHECK(format_fixed(12.4, 0) == "12");
    CHECK(format_fixed(0.0, 4) == "0.0000");
}
