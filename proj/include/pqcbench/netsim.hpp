#ifndef PQCBENCH_NETSIM_HPP
#define PQCBENCH_NETSIM_HPP

// Discrete-event simulation of the three-link path (client UE, gNB, UPF,
// server UE) with per-link propagation delay, serialization rate, Bernoulli
// loss and store-and-forward queueing, plus a reliable transport: MTU-sized
// segments, a sliding window, per-segment retransmission timers, and 40-byte
// acks on the reverse path.
//
// Time is milliseconds (double) from the start of the simulation. All
// randomness comes from per-session splitmix64 streams, so a (seed, scenario)
// pair replays identically.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqcbench/config.hpp"
#include "pqcbench/handshake.hpp"
#include "pqcbench/suites.hpp"

namespace pqcbench {

class NetsimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LinkSpec {
    std::string name;
    double prop_delay_ms = 1.0;
    double rate_kbs = 12500; // kilobytes (1024 B) per second
    double loss_prob = 0.0;  // per segment, i.i.d.
    int mtu = 1440;
};

struct NetworkPath {
    std::vector<LinkSpec> links;
    bool symmetric = true; // same links serve both directions

    int path_mtu() const;

    // UE--gNB 2 ms / 12500 KB/s / 0.001 loss, gNB--UPF 1 ms / 125000 KB/s /
    // lossless, UPF--UE 2 ms / 12500 KB/s / 0.001 loss, MTU 1440 everywhere.
    static NetworkPath default_path();

    // Reads link.<name>.{prop_delay_ms,rate_kbs,loss_prob,mtu} blocks; link
    // order follows first appearance in the file.
    static NetworkPath from_config(const KeyValueFile& kv);
};

struct ReliableTransportConfig {
    int window_segments = 64;
    // A bit over 2x the worst-case segment round trip on the default path
    // (~10.3 ms alone, ~19 ms behind a full reverse-direction flight), so
    // queueing in crowded cells does not fire spurious retransmissions.
    double rto_ms = 25.0;
    int max_retries = 8;
    int ack_bytes = 40;
    int segment_header_bytes = 40;

    static ReliableTransportConfig from_config(const KeyValueFile& kv);
};

// Segment payload sizes for a message of `payload_bytes` at the given MTU;
// every segment carries `header_bytes` of header on the wire. Empty payload
// fragments to nothing.
std::vector<int64_t> fragment(int64_t payload_bytes, int mtu, int header_bytes = 40);

enum class TraceEventKind { Sent, Retransmitted, Delivered, Lost, AckSent, AckDelivered };

std::string_view trace_event_kind_name(TraceEventKind kind);

struct TraceEvent {
    double t_ms = 0;
    TraceEventKind kind = TraceEventKind::Sent;
    int64_t segment_id = 0;
    int64_t bytes = 0; // wire bytes (payload + header), or ack bytes
    Direction direction = Direction::ClientToServer;
    std::string label; // flight this segment belongs to
};

struct TraceTotals {
    int64_t segments_sent = 0;          // first transmissions + retransmissions
    int64_t segments_retransmitted = 0;
    int64_t bytes_tx = 0;               // wire bytes put on the path by endpoints
    int64_t bytes_rx = 0;               // delivered segment bytes + delivered acks
};

struct BusyInterval {
    double begin_ms = 0;
    double end_ms = 0;
    std::string op;
};

struct SessionTrace {
    std::vector<TraceEvent> events;
    TraceTotals totals;
    std::vector<BusyInterval> server_busy; // this session's server-side compute
    bool delivery_failed = false;
    double start_ms = 0; // first Sent event
    // Last payload Delivered event: the moment the receiving side holds all
    // the data. Straggler acks and their retransmissions fall outside the
    // span on purpose; they add bytes, not session lifetime.
    double end_ms = 0;
};

// Everything one simulated session needs besides its seed.
struct SessionScenario {
    SuiteDescriptor suite;
    NetworkPath path = NetworkPath::default_path();
    ReliableTransportConfig transport;
    FramingConfig framing;
    int64_t app_payload_bytes = 65536;
    int record_payload_bytes = 16384; // application payload per AEAD record
    double aead_cost_per_byte_us = 0.01;
    int server_service_units = 1;
};

struct SessionResult {
    HandshakeTranscript transcript; // server-side view (holds all six messages)
    SessionTrace trace;
    bool failed = false;    // delivery failure or handshake alert
    std::string failure;    // short reason when failed
};

struct CellResult {
    std::vector<SessionResult> sessions;
    // Server busy intervals across every session in the cell (one shared CPU).
    std::vector<BusyInterval> server_busy;
};

// One client, fresh path. Seed controls the crypto bytes and the loss draws.
SessionResult run_handshake_over_network(const SessionScenario& scenario, uint64_t seed);

// `client_count` sessions that start at t=0, share the path's links and the
// server's crypto queue, and run to completion inside one event clock.
CellResult simulate_cell(const SessionScenario& scenario, int client_count, uint64_t cell_seed);

// One-shot reliable transfer of an opaque payload (no handshake); exposes the
// transport behavior for tests. Direction is client-to-server.
SessionTrace transmit(int64_t payload_bytes, const NetworkPath& path,
                      const ReliableTransportConfig& transport, uint64_t seed);

} // namespace pqcbench

#endif
