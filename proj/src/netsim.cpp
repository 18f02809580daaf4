#include "pqcbench/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <queue>

#include "pqcbench/prf.hpp"

namespace pqcbench {

namespace {

double serialization_ms(int64_t wire_bytes, const LinkSpec& link) {
    // rate is KB/s with KB = 1024 bytes; time base is milliseconds.
    return static_cast<double>(wire_bytes) / (link.rate_kbs * 1.024);
}

void validate_path(const NetworkPath& path, int header_bytes) {
    if (path.links.empty()) throw NetsimError("path has no links");
    for (const auto& link : path.links) {
        if (link.rate_kbs <= 0) throw NetsimError("link `" + link.name + "`: rate must be > 0");
        if (link.prop_delay_ms < 0) throw NetsimError("link `" + link.name + "`: negative delay");
        if (link.loss_prob < 0 || link.loss_prob >= 1) {
            throw NetsimError("link `" + link.name + "`: loss_prob must be in [0, 1)");
        }
        if (link.mtu <= header_bytes) {
            throw NetsimError("link `" + link.name + "`: mtu must exceed the segment header");
        }
    }
}

// ---------------------------------------------------------------------------
// Event engine
// ---------------------------------------------------------------------------

struct Event {
    double t = 0;
    uint64_t seq = 0;
    std::function<void()> fn;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.t != b.t) return a.t > b.t;
        return a.seq > b.seq;
    }
};

class Simulator {
public:
    void schedule(double t, std::function<void()> fn) {
        queue_.push({std::max(t, now_), next_seq_++, std::move(fn)});
    }

    void run() {
        while (!queue_.empty()) {
            Event ev = queue_.top();
            queue_.pop();
            now_ = ev.t;
            ev.fn();
        }
    }

    double now() const { return now_; }

private:
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    double now_ = 0;
    uint64_t next_seq_ = 0;
};

struct Lane {
    double free_at = 0; // store-and-forward FIFO: next serialization start
};

struct CellSim;

struct Segment {
    int64_t id = 0;
    int64_t payload = 0;
    int retries = 0;      // retransmissions performed
    double sent_at = 0;   // begin of the most recent transmission
    bool acked = false;
    bool delivered = false;
};

struct Sess;

// One reliable message flight in one direction. Acks are cumulative: each
// ack reports the receiver's contiguous delivered prefix, so a single lost
// ack is healed by any later one instead of forcing a data retransmission.
// Loss recovery uses one retransmission timer per transfer, tracking the
// oldest unacked segment; only that segment ever retransmits on expiry, so
// a hole never triggers resends of the already-delivered segments behind it.
struct Transfer {
    CellSim* cell = nullptr;
    Sess* sess = nullptr;
    Direction dir = Direction::ClientToServer;
    std::string label;
    std::vector<Segment> segments;
    size_t next_to_send = 0;
    int in_flight = 0;
    size_t delivered_count = 0;
    size_t recv_prefix = 0;   // receiver side: segments delivered in order
    size_t acked_prefix = 0;  // sender side: highest cumulative ack seen
    uint64_t rto_gen = 0;     // invalidates superseded timer events
    std::function<void(double)> on_complete;

    void start();
    void maybe_send();
    void send_segment(Segment& seg, bool retx);
};

} // namespace

// fragment() is public API; keep it outside the anonymous namespace.
std::vector<int64_t> fragment(int64_t payload_bytes, int mtu, int header_bytes) {
    if (payload_bytes < 0) throw NetsimError("fragment: negative payload");
    if (mtu <= header_bytes) throw NetsimError("fragment: mtu must exceed the segment header");
    std::vector<int64_t> out;
    int64_t chunk = mtu - header_bytes;
    for (int64_t off = 0; off < payload_bytes; off += chunk) {
        out.push_back(std::min(chunk, payload_bytes - off));
    }
    return out;
}

std::string_view trace_event_kind_name(TraceEventKind kind) {
    switch (kind) {
    case TraceEventKind::Sent: return "sent";
    case TraceEventKind::Retransmitted: return "retransmitted";
    case TraceEventKind::Delivered: return "delivered";
    case TraceEventKind::Lost: return "lost";
    case TraceEventKind::AckSent: return "ack_sent";
    case TraceEventKind::AckDelivered: return "ack_delivered";
    }
    return "unknown";
}

int NetworkPath::path_mtu() const {
    int mtu = links.empty() ? 0 : links.front().mtu;
    for (const auto& link : links) mtu = std::min(mtu, link.mtu);
    return mtu;
}

NetworkPath NetworkPath::default_path() {
    NetworkPath path;
    path.links = {
        {"ue1_gnb", 2.0, 12500, 0.001, 1440},
        {"gnb_upf", 1.0, 125000, 0.0, 1440},
        {"upf_ue2", 2.0, 12500, 0.001, 1440},
    };
    return path;
}

NetworkPath NetworkPath::from_config(const KeyValueFile& kv) {
    NetworkPath path = default_path();
    std::vector<ConfigEntry> entries = kv.with_prefix("link.");
    if (!entries.empty()) {
        // Collect link names by first appearance; any mention creates a link.
        std::vector<std::string> order;
        for (const auto& e : entries) {
            std::string rest = e.key.substr(5);
            size_t dot = rest.find('.');
            if (dot == std::string::npos) {
                throw ConfigError(kv.origin(), e.line, "expected link.<name>.<field>");
            }
            std::string name = rest.substr(0, dot);
            if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
        }
        // Unknown names replace the default path entirely.
        bool all_default = true;
        for (const auto& name : order) {
            bool known = std::any_of(path.links.begin(), path.links.end(),
                                     [&](const LinkSpec& l) { return l.name == name; });
            if (!known) all_default = false;
        }
        if (!all_default) {
            path.links.clear();
            for (const auto& name : order) path.links.push_back({name, 1.0, 12500, 0.0, 1440});
        }
        for (const auto& e : entries) {
            std::string rest = e.key.substr(5);
            size_t dot = rest.find('.');
            std::string name = rest.substr(0, dot);
            std::string field = rest.substr(dot + 1);
            LinkSpec* link = nullptr;
            for (auto& l : path.links) {
                if (l.name == name) link = &l;
            }
            if (!link) continue; // cannot happen: names collected above
            double value = kv.require_double(e);
            if (field == "prop_delay_ms") link->prop_delay_ms = value;
            else if (field == "rate_kbs") link->rate_kbs = value;
            else if (field == "loss_prob") link->loss_prob = value;
            else if (field == "mtu") link->mtu = static_cast<int>(value);
            else throw ConfigError(kv.origin(), e.line, "unknown link field `" + field + "`");
        }
    }
    path.symmetric = kv.get_int("path.symmetric", 1) != 0;
    return path;
}

ReliableTransportConfig ReliableTransportConfig::from_config(const KeyValueFile& kv) {
    ReliableTransportConfig t;
    t.window_segments = static_cast<int>(kv.get_int("transport.window_segments", t.window_segments));
    t.rto_ms = kv.get_double("transport.rto_ms", t.rto_ms);
    t.max_retries = static_cast<int>(kv.get_int("transport.max_retries", t.max_retries));
    t.ack_bytes = static_cast<int>(kv.get_int("transport.ack_bytes", t.ack_bytes));
    t.segment_header_bytes =
        static_cast<int>(kv.get_int("transport.segment_header_bytes", t.segment_header_bytes));
    if (t.window_segments < 1 || t.max_retries < 1 || t.rto_ms <= 0) {
        throw NetsimError("transport: window >= 1, max_retries >= 1 and rto > 0 required");
    }
    return t;
}

namespace {

// ---------------------------------------------------------------------------
// Cell simulation: N sessions, shared lanes, shared server CPU
// ---------------------------------------------------------------------------

struct Sess {
    int index = 0;
    uint64_t seed = 0;
    RandomStream net_rng{0};
    std::shared_ptr<CryptoProvider> client_provider;
    std::shared_ptr<CryptoProvider> server_provider;
    std::unique_ptr<ClientSession> client;
    std::unique_ptr<ServerSession> server;
    std::vector<HandshakeMessage> server_flight;
    std::optional<HandshakeMessage> client_finished;
    SessionTrace trace;
    bool failed = false;
    std::string failure;
    double client_cpu_free = 0;
    int64_t next_segment_id = 0;
    std::vector<std::unique_ptr<Transfer>> transfers;

    void fail(const std::string& reason) {
        if (!failed) {
            failed = true;
            failure = reason;
        }
    }
};

struct CellSim {
    SessionScenario sc;
    int client_count = 1;
    uint64_t cell_seed = 0;

    Simulator sim;
    std::vector<Lane> lanes_fwd; // client -> server, link order
    std::vector<Lane> lanes_rev; // server -> client, reversed link order
    std::vector<double> server_unit_free;
    std::vector<BusyInterval> cell_busy;
    std::vector<std::unique_ptr<Sess>> sessions;

    explicit CellSim(const SessionScenario& scenario, int clients, uint64_t seed)
        : sc(scenario), client_count(clients), cell_seed(seed) {
        validate_path(sc.path, sc.transport.segment_header_bytes);
        if (client_count < 1) throw NetsimError("client_count must be >= 1");
        if (sc.server_service_units < 1) throw NetsimError("server_service_units must be >= 1");
        lanes_fwd.resize(sc.path.links.size());
        lanes_rev.resize(sc.path.links.size());
        server_unit_free.assign(static_cast<size_t>(sc.server_service_units), 0.0);
    }

    const LinkSpec& link_for(Direction dir, size_t hop) const {
        // Forward traverses links in order; reverse traverses them backwards.
        size_t n = sc.path.links.size();
        return dir == Direction::ClientToServer ? sc.path.links[hop] : sc.path.links[n - 1 - hop];
    }

    Lane& lane_for(Direction dir, size_t hop) {
        return dir == Direction::ClientToServer ? lanes_fwd[hop] : lanes_rev[hop];
    }

    // FIFO crypto queue shared by every session in the cell.
    void server_cpu_job(Sess& s, double cost_us, const std::string& op,
                        std::function<void()> done) {
        if (cost_us <= 0) {
            done();
            return;
        }
        auto unit = std::min_element(server_unit_free.begin(), server_unit_free.end());
        double begin = std::max(sim.now(), *unit);
        double end = begin + cost_us / 1000.0;
        *unit = end;
        BusyInterval interval{begin, end, op};
        cell_busy.push_back(interval);
        s.trace.server_busy.push_back(interval);
        sim.schedule(end, std::move(done));
    }

    void client_cpu_job(Sess& s, double cost_us, std::function<void()> done) {
        double begin = std::max(sim.now(), s.client_cpu_free);
        double end = begin + cost_us / 1000.0;
        s.client_cpu_free = end;
        if (cost_us <= 0) {
            done();
            return;
        }
        sim.schedule(end, std::move(done));
    }

    Transfer* start_transfer(Sess& s, Direction dir, std::string label, int64_t payload_bytes,
                             std::function<void(double)> on_complete);

    void start_session(Sess& s);
    void server_got_hello(Sess& s);
    void client_got_flight(Sess& s);
    void server_got_finished(Sess& s);
    void server_got_data(Sess& s);

    void run_handshakes();
    void finalize(Sess& s);
};

void Transfer::start() {
    if (segments.empty()) {
        on_complete(cell->sim.now());
        return;
    }
    maybe_send();
}

void Transfer::maybe_send() {
    while (next_to_send < segments.size() && in_flight < cell->sc.transport.window_segments) {
        Segment& seg = segments[next_to_send];
        ++next_to_send;
        ++in_flight;
        send_segment(seg, false);
    }
}

} // namespace

namespace {

// Out-of-line so Transfer's declaration above stays readable.
struct TransferOps {
    static void send_segment(Transfer& tr, Segment& seg, bool retx);
    static void hop(Transfer& tr, Segment& seg, size_t hop_idx);
    static void deliver(Transfer& tr, Segment& seg);
    static void send_ack(Transfer& tr, Segment& seg);
    static void ack_hop(Transfer& tr, Segment& seg, size_t hop_idx, size_t prefix);
    static void on_ack(Transfer& tr, Segment& seg, size_t prefix);
    static void schedule_rto(Transfer& tr);
    static void on_rto(Transfer& tr, uint64_t gen);
};

void TransferOps::send_segment(Transfer& tr, Segment& seg, bool retx) {
    CellSim& cell = *tr.cell;
    Sess& s = *tr.sess;
    if (s.failed) return;

    int64_t wire = seg.payload + cell.sc.transport.segment_header_bytes;
    const LinkSpec& link0 = cell.link_for(tr.dir, 0);
    Lane& lane0 = cell.lane_for(tr.dir, 0);

    // The segment leaves the sender buffer when the first link starts
    // serializing it; Sent timestamps and the retransmission timer both use
    // that moment rather than the transport enqueue time.
    double begin = std::max(cell.sim.now(), lane0.free_at);
    double end = begin + serialization_ms(wire, link0);
    lane0.free_at = end;

    s.trace.events.push_back({begin, retx ? TraceEventKind::Retransmitted : TraceEventKind::Sent,
                              seg.id, wire, tr.dir, tr.label});
    s.trace.totals.segments_sent += 1;
    if (retx) s.trace.totals.segments_retransmitted += 1;
    s.trace.totals.bytes_tx += wire;

    seg.sent_at = begin;
    schedule_rto(tr);

    bool lost = s.net_rng.uniform01() < link0.loss_prob;
    if (lost) {
        cell.sim.schedule(end, [&tr, &seg, end] {
            Sess& sess = *tr.sess;
            int64_t wire_bytes = seg.payload + tr.cell->sc.transport.segment_header_bytes;
            sess.trace.events.push_back(
                {end, TraceEventKind::Lost, seg.id, wire_bytes, tr.dir, tr.label});
        });
        return;
    }
    double arrive_next = end + link0.prop_delay_ms;
    cell.sim.schedule(arrive_next, [&tr, &seg] { TransferOps::hop(tr, seg, 1); });
}

void TransferOps::hop(Transfer& tr, Segment& seg, size_t hop_idx) {
    CellSim& cell = *tr.cell;
    Sess& s = *tr.sess;
    if (s.failed) return;
    if (hop_idx >= cell.sc.path.links.size()) {
        deliver(tr, seg);
        return;
    }
    int64_t wire = seg.payload + cell.sc.transport.segment_header_bytes;
    const LinkSpec& link = cell.link_for(tr.dir, hop_idx);
    Lane& lane = cell.lane_for(tr.dir, hop_idx);
    double begin = std::max(cell.sim.now(), lane.free_at);
    double end = begin + serialization_ms(wire, link);
    lane.free_at = end;

    bool lost = s.net_rng.uniform01() < link.loss_prob;
    if (lost) {
        cell.sim.schedule(end, [&tr, &seg, end] {
            Sess& sess = *tr.sess;
            int64_t wire_bytes = seg.payload + tr.cell->sc.transport.segment_header_bytes;
            sess.trace.events.push_back(
                {end, TraceEventKind::Lost, seg.id, wire_bytes, tr.dir, tr.label});
        });
        return;
    }
    cell.sim.schedule(end + link.prop_delay_ms,
                      [&tr, &seg, hop_idx] { TransferOps::hop(tr, seg, hop_idx + 1); });
}

void TransferOps::deliver(Transfer& tr, Segment& seg) {
    CellSim& cell = *tr.cell;
    Sess& s = *tr.sess;
    if (s.failed) return;
    int64_t wire = seg.payload + cell.sc.transport.segment_header_bytes;
    bool first = !seg.delivered;
    if (first) {
        seg.delivered = true;
        tr.delivered_count += 1;
        while (tr.recv_prefix < tr.segments.size() && tr.segments[tr.recv_prefix].delivered) {
            tr.recv_prefix += 1;
        }
        s.trace.totals.bytes_rx += wire;
        s.trace.events.push_back(
            {cell.sim.now(), TraceEventKind::Delivered, seg.id, wire, tr.dir, tr.label});
    }
    send_ack(tr, seg); // duplicates re-ack: the first ack may have been lost
    if (first && tr.delivered_count == tr.segments.size()) {
        tr.on_complete(cell.sim.now());
    }
}

void TransferOps::send_ack(Transfer& tr, Segment& seg) {
    CellSim& cell = *tr.cell;
    Sess& s = *tr.sess;
    Direction ack_dir = tr.dir == Direction::ClientToServer ? Direction::ServerToClient
                                                            : Direction::ClientToServer;
    int64_t wire = cell.sc.transport.ack_bytes;
    const LinkSpec& link0 = cell.link_for(ack_dir, 0);
    Lane& lane0 = cell.lane_for(ack_dir, 0);
    double begin = std::max(cell.sim.now(), lane0.free_at);
    double end = begin + serialization_ms(wire, link0);
    lane0.free_at = end;
    s.trace.events.push_back({begin, TraceEventKind::AckSent, seg.id, wire, ack_dir, tr.label});

    // The ack carries the contiguous delivered prefix as of this moment.
    size_t prefix = tr.recv_prefix;
    bool lost = s.net_rng.uniform01() < link0.loss_prob;
    if (lost) return;
    cell.sim.schedule(end + link0.prop_delay_ms,
                      [&tr, &seg, prefix] { TransferOps::ack_hop(tr, seg, 1, prefix); });
}

void TransferOps::ack_hop(Transfer& tr, Segment& seg, size_t hop_idx, size_t prefix) {
    CellSim& cell = *tr.cell;
    Sess& s = *tr.sess;
    Direction ack_dir = tr.dir == Direction::ClientToServer ? Direction::ServerToClient
                                                            : Direction::ClientToServer;
    if (hop_idx >= cell.sc.path.links.size()) {
        on_ack(tr, seg, prefix);
        return;
    }
    int64_t wire = cell.sc.transport.ack_bytes;
    const LinkSpec& link = cell.link_for(ack_dir, hop_idx);
    Lane& lane = cell.lane_for(ack_dir, hop_idx);
    double begin = std::max(cell.sim.now(), lane.free_at);
    double end = begin + serialization_ms(wire, link);
    lane.free_at = end;
    bool lost = s.net_rng.uniform01() < link.loss_prob;
    if (lost) return;
    cell.sim.schedule(end + link.prop_delay_ms, [&tr, &seg, hop_idx, prefix] {
        TransferOps::ack_hop(tr, seg, hop_idx + 1, prefix);
    });
}

void TransferOps::on_ack(Transfer& tr, Segment& seg, size_t prefix) {
    CellSim& cell = *tr.cell;
    Sess& s = *tr.sess;
    Direction ack_dir = tr.dir == Direction::ClientToServer ? Direction::ServerToClient
                                                            : Direction::ClientToServer;
    s.trace.totals.bytes_rx += cell.sc.transport.ack_bytes;
    s.trace.events.push_back({cell.sim.now(), TraceEventKind::AckDelivered, seg.id,
                              cell.sc.transport.ack_bytes, ack_dir, tr.label});
    if (prefix <= tr.acked_prefix) return;
    for (size_t i = tr.acked_prefix; i < prefix; ++i) {
        Segment& covered = tr.segments[i];
        if (!covered.acked) {
            covered.acked = true;
            tr.in_flight -= 1;
        }
    }
    tr.acked_prefix = prefix;
    schedule_rto(tr);
    tr.maybe_send();
}

// (Re)arms the transfer's single retransmission timer on the oldest unacked
// segment. The timer target is that segment's own send time plus the rto, so
// recovery latency matches a per-segment timeout without resending segments
// that were delivered behind a hole.
void TransferOps::schedule_rto(Transfer& tr) {
    CellSim& cell = *tr.cell;
    tr.rto_gen += 1;
    if (tr.acked_prefix >= tr.segments.size()) return; // everything acked
    if (tr.acked_prefix >= tr.next_to_send) return;    // oldest unacked not sent yet
    const Segment& oldest = tr.segments[tr.acked_prefix];
    double at = std::max(cell.sim.now(), oldest.sent_at + cell.sc.transport.rto_ms);
    uint64_t gen = tr.rto_gen;
    cell.sim.schedule(at, [&tr, gen] { TransferOps::on_rto(tr, gen); });
}

void TransferOps::on_rto(Transfer& tr, uint64_t gen) {
    Sess& s = *tr.sess;
    if (s.failed || gen != tr.rto_gen) return;
    if (tr.acked_prefix >= tr.segments.size() || tr.acked_prefix >= tr.next_to_send) return;
    Segment& seg = tr.segments[tr.acked_prefix];
    if (seg.retries >= tr.cell->sc.transport.max_retries) {
        s.fail("delivery_failed:" + tr.label);
        s.trace.delivery_failed = true;
        return;
    }
    seg.retries += 1;
    send_segment(tr, seg, true);
}

void Transfer::send_segment(Segment& seg, bool retx) {
    TransferOps::send_segment(*this, seg, retx);
}

} // namespace

namespace {

Transfer* CellSim::start_transfer(Sess& s, Direction dir, std::string label,
                                  int64_t payload_bytes,
                                  std::function<void(double)> on_complete) {
    auto tr = std::make_unique<Transfer>();
    tr->cell = this;
    tr->sess = &s;
    tr->dir = dir;
    tr->label = std::move(label);
    tr->on_complete = std::move(on_complete);
    std::vector<int64_t> sizes =
        fragment(payload_bytes, sc.path.path_mtu(), sc.transport.segment_header_bytes);
    tr->segments.reserve(sizes.size());
    for (int64_t size : sizes) {
        Segment seg;
        seg.id = s.next_segment_id++;
        seg.payload = size;
        tr->segments.push_back(seg);
    }
    Transfer* raw = tr.get();
    s.transfers.push_back(std::move(tr));
    raw->start();
    return raw;
}

void CellSim::start_session(Sess& s) {
    double keygen_us = sc.suite.kem.keygen_cost_us * s.client->key_share_groups();
    client_cpu_job(s, keygen_us, [this, &s] {
        const HandshakeMessage& hello = s.client->client_hello();
        start_transfer(s, Direction::ClientToServer, "client_hello", hello.payload_bytes(),
                       [this, &s](double) { server_got_hello(s); });
    });
}

void CellSim::server_got_hello(Sess& s) {
    ServerSession::RespondResult res = s.server->on_client_hello(s.client->client_hello());
    if (res.error != HandshakeError::None) {
        s.fail(std::string(handshake_error_name(res.error)));
        start_transfer(s, Direction::ServerToClient, "alert", res.alert->payload_bytes(),
                       [](double) {});
        return;
    }
    s.server_flight = std::move(res.flight);
    int64_t flight_bytes = 0;
    for (const auto& msg : s.server_flight) flight_bytes += msg.payload_bytes();

    server_cpu_job(s, sc.suite.kem.encaps_cost_us, "encaps", [this, &s, flight_bytes] {
        server_cpu_job(s, sc.suite.sig.sign_cost_us, "sign", [this, &s, flight_bytes] {
            start_transfer(s, Direction::ServerToClient, "server_flight", flight_bytes,
                           [this, &s](double) { client_got_flight(s); });
        });
    });
}

void CellSim::client_got_flight(Sess& s) {
    // Client verifies each certificate element plus CertificateVerify, then
    // decapsulates; Finished MAC checks are treated as free.
    double verify_us = sc.suite.sig.verify_cost_us * (sc.framing.certificate_chain_length + 1);
    double cost_us = verify_us + sc.suite.kem.decaps_cost_us;
    client_cpu_job(s, cost_us, [this, &s] {
        ClientSession::FlightResult fr = s.client->on_server_flight(s.server_flight);
        if (fr.error != HandshakeError::None) {
            s.fail(std::string(handshake_error_name(fr.error)));
            start_transfer(s, Direction::ClientToServer, "alert", fr.alert->payload_bytes(),
                           [](double) {});
            return;
        }
        s.client_finished = std::move(fr.finished);
        start_transfer(s, Direction::ClientToServer, "client_finished",
                       s.client_finished->payload_bytes(),
                       [this, &s](double) { server_got_finished(s); });

        if (sc.app_payload_bytes > 0) {
            int64_t records =
                (sc.app_payload_bytes + sc.record_payload_bytes - 1) / sc.record_payload_bytes;
            int64_t wire_payload = sc.app_payload_bytes + records * sc.framing.aead_tag_bytes;
            double encrypt_us = static_cast<double>(wire_payload) * sc.aead_cost_per_byte_us;
            client_cpu_job(s, encrypt_us, [this, &s, wire_payload] {
                start_transfer(s, Direction::ClientToServer, "app_data", wire_payload,
                               [this, &s](double) { server_got_data(s); });
            });
        }
    });
}

void CellSim::server_got_finished(Sess& s) {
    ServerSession::FinishResult fin = s.server->on_client_finished(*s.client_finished);
    if (!fin.completed) {
        s.fail(std::string(handshake_error_name(fin.error)));
        start_transfer(s, Direction::ServerToClient, "alert", fin.alert->payload_bytes(),
                       [](double) {});
    }
}

void CellSim::server_got_data(Sess& s) {
    // Decrypt record by record; jobs queue FIFO behind whatever the server is
    // already doing for other sessions.
    int64_t remaining = sc.app_payload_bytes;
    while (remaining > 0) {
        int64_t record = std::min<int64_t>(remaining, sc.record_payload_bytes);
        int64_t wire_record = record + sc.framing.aead_tag_bytes;
        double cost_us = static_cast<double>(wire_record) * sc.aead_cost_per_byte_us;
        server_cpu_job(s, cost_us, "aead", [] {});
        remaining -= record;
    }
}

void CellSim::run_handshakes() {
    for (int i = 0; i < client_count; ++i) {
        auto s = std::make_unique<Sess>();
        s->index = i;
        s->seed = mix64(cell_seed, static_cast<uint64_t>(i) + 1);
        s->net_rng = RandomStream(mix64(s->seed, fnv1a64(std::string_view("net"))));
        s->client_provider =
            std::make_shared<ModelProvider>(mix64(s->seed, fnv1a64(std::string_view("client"))));
        s->server_provider =
            std::make_shared<ModelProvider>(mix64(s->seed, fnv1a64(std::string_view("server"))));
        s->client = std::make_unique<ClientSession>(std::vector<SuiteDescriptor>{sc.suite},
                                                    sc.framing, s->client_provider);
        ServerConfig server_cfg;
        server_cfg.supported = {sc.suite};
        s->server = std::make_unique<ServerSession>(server_cfg, sc.framing, s->server_provider);
        sessions.push_back(std::move(s));
    }
    for (auto& s : sessions) {
        Sess* raw = s.get();
        sim.schedule(0.0, [this, raw] { start_session(*raw); });
    }
    sim.run();
    for (auto& s : sessions) finalize(*s);
    std::stable_sort(cell_busy.begin(), cell_busy.end(),
                     [](const BusyInterval& a, const BusyInterval& b) { return a.begin_ms < b.begin_ms; });
}

void CellSim::finalize(Sess& s) {
    std::stable_sort(s.trace.events.begin(), s.trace.events.end(),
                     [](const TraceEvent& a, const TraceEvent& b) { return a.t_ms < b.t_ms; });
    double start = 0, end = 0;
    bool have_start = false, have_end = false;
    for (const auto& ev : s.trace.events) {
        if (!have_start && ev.kind == TraceEventKind::Sent) {
            start = ev.t_ms;
            have_start = true;
        }
        if (ev.kind == TraceEventKind::Delivered) {
            end = std::max(end, ev.t_ms);
            have_end = true;
        }
    }
    if (!have_end) {
        for (const auto& ev : s.trace.events) end = std::max(end, ev.t_ms);
    }
    s.trace.start_ms = start;
    s.trace.end_ms = end;
    std::stable_sort(s.trace.server_busy.begin(), s.trace.server_busy.end(),
                     [](const BusyInterval& a, const BusyInterval& b) { return a.begin_ms < b.begin_ms; });
}

} // namespace

SessionResult run_handshake_over_network(const SessionScenario& scenario, uint64_t seed) {
    CellResult cell = simulate_cell(scenario, 1, seed);
    return std::move(cell.sessions.front());
}

CellResult simulate_cell(const SessionScenario& scenario, int client_count, uint64_t cell_seed) {
    CellSim cell(scenario, client_count, cell_seed);
    cell.run_handshakes();

    CellResult result;
    result.server_busy = std::move(cell.cell_busy);
    result.sessions.reserve(cell.sessions.size());
    for (auto& s : cell.sessions) {
        SessionResult sr;
        sr.transcript = s->server->transcript();
        if (!sr.transcript.completed && !s->failed) {
            // Should be unreachable: a session either completes or records a
            // failure; guard so metrics never see a half-finished transcript.
            s->fail("incomplete");
        }
        sr.trace = std::move(s->trace);
        sr.failed = s->failed;
        sr.failure = s->failure;
        result.sessions.push_back(std::move(sr));
    }
    return result;
}

SessionTrace transmit(int64_t payload_bytes, const NetworkPath& path,
                      const ReliableTransportConfig& transport, uint64_t seed) {
    SessionScenario scenario;
    scenario.suite = Registry::builtin().find_suite("mlkem512_mldsa44");
    scenario.path = path;
    scenario.transport = transport;

    CellSim cell(scenario, 1, seed);
    auto s = std::make_unique<Sess>();
    s->index = 0;
    s->seed = seed;
    s->net_rng = RandomStream(mix64(seed, fnv1a64(std::string_view("net"))));
    cell.sessions.push_back(std::move(s));
    Sess* raw = cell.sessions.front().get();
    cell.sim.schedule(0.0, [&cell, raw, payload_bytes] {
        cell.start_transfer(*raw, Direction::ClientToServer, "payload", payload_bytes,
                            [](double) {});
    });
    cell.sim.run();
    cell.finalize(*raw);
    return std::move(raw->trace);
}

} // namespace pqcbench
