#include "pqcbench/handshake.hpp"

#include <algorithm>

#include "pqcbench/prf.hpp"

namespace pqcbench {

namespace {

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ull;

// Deterministic padding for the fixed framing regions of each message kind.
std::vector<uint8_t> filler(MessageKind kind, size_t n) {
    return expand_bytes(fnv1a64(message_kind_name(kind)), "filler", n);
}

uint16_t group_tag(const KemDescriptor& kem) {
    return static_cast<uint16_t>(fnv1a64(kem.name) & 0xffff);
}

void append(std::vector<uint8_t>& out, std::span<const uint8_t> bytes) {
    out.insert(out.end(), bytes.begin(), bytes.end());
}

std::vector<uint8_t> u64_le(uint64_t v) {
    std::vector<uint8_t> out(8);
    for (int i = 0; i < 8; ++i) out[i] = static_cast<uint8_t>(v >> (8 * i));
    return out;
}

std::vector<uint8_t> finished_mac(std::span<const uint8_t> key, uint64_t transcript_hash,
                                  std::string_view role_label, int mac_bytes) {
    uint64_t s = mix64(fnv1a64(key), transcript_hash);
    return expand_bytes(s, role_label, static_cast<size_t>(mac_bytes));
}

HandshakeMessage make_alert(Direction direction, HandshakeError error) {
    HandshakeMessage alert;
    alert.kind = MessageKind::Alert;
    alert.direction = direction;
    alert.body = {2 /* fatal */, static_cast<uint8_t>(error)};
    return alert;
}

// Running FNV-1a over the concatenated message bodies.
struct TranscriptHash {
    uint64_t state = kFnvOffset;
    void add(std::span<const uint8_t> bytes) { state = fnv1a64_chain(state, bytes); }
};

} // namespace

std::string_view message_kind_name(MessageKind kind) {
    switch (kind) {
    case MessageKind::ClientHello: return "client_hello";
    case MessageKind::ServerHello: return "server_hello";
    case MessageKind::Certificate: return "certificate";
    case MessageKind::CertificateVerify: return "certificate_verify";
    case MessageKind::Finished: return "finished";
    case MessageKind::Alert: return "alert";
    }
    return "unknown";
}

std::string_view handshake_error_name(HandshakeError error) {
    switch (error) {
    case HandshakeError::None: return "none";
    case HandshakeError::EmptyOffer: return "empty_offer";
    case HandshakeError::NoCommonSuite: return "no_common_suite";
    case HandshakeError::BadCertificateSignature: return "bad_certificate_signature";
    case HandshakeError::BadCertVerify: return "bad_cert_verify";
    case HandshakeError::BadFinishedMac: return "bad_finished_mac";
    case HandshakeError::MalformedMessage: return "malformed_message";
    }
    return "unknown";
}

FramingConfig FramingConfig::from_config(const KeyValueFile& kv) {
    FramingConfig f;
    f.client_hello_base = static_cast<int>(kv.get_int("framing.client_hello_base", f.client_hello_base));
    f.server_hello_base = static_cast<int>(kv.get_int("framing.server_hello_base", f.server_hello_base));
    f.certificate_base = static_cast<int>(kv.get_int("framing.certificate_base", f.certificate_base));
    f.cert_verify_base = static_cast<int>(kv.get_int("framing.cert_verify_base", f.cert_verify_base));
    f.finished_base = static_cast<int>(kv.get_int("framing.finished_base", f.finished_base));
    f.key_share_header = static_cast<int>(kv.get_int("framing.key_share_header", f.key_share_header));
    f.mac_bytes = static_cast<int>(kv.get_int("framing.mac_bytes", f.mac_bytes));
    f.aead_tag_bytes = static_cast<int>(kv.get_int("framing.aead_tag_bytes", f.aead_tag_bytes));
    f.certificate_chain_length =
        static_cast<int>(kv.get_int("framing.certificate_chain_length", f.certificate_chain_length));
    return f;
}

TranscriptBytes transcript_total_bytes(const HandshakeTranscript& transcript) {
    if (!transcript.completed) {
        throw HandshakeStateError("transcript_total_bytes: handshake did not complete");
    }
    TranscriptBytes out;
    for (const auto& msg : transcript.messages) {
        if (msg.direction == Direction::ClientToServer) {
            out.client_to_server += msg.payload_bytes();
        } else {
            out.server_to_client += msg.payload_bytes();
        }
    }
    return out;
}

std::vector<uint8_t> derive_session_key(std::span<const uint8_t> shared_secret,
                                        uint64_t transcript_hash) {
    uint64_t s = mix64(fnv1a64(shared_secret), transcript_hash);
    return expand_bytes(s, "session-key", 32);
}

// ---------------------------------------------------------------------------
// ClientSession
// ---------------------------------------------------------------------------

ClientSession::ClientSession(std::vector<SuiteDescriptor> offered, FramingConfig framing,
                             std::shared_ptr<CryptoProvider> provider)
    : offered_(std::move(offered)), framing_(framing), provider_(std::move(provider)) {
    if (offered_.empty()) {
        throw HandshakeStateError("client offer must list at least one suite");
    }
}

int ClientSession::key_share_groups() const {
    std::vector<std::string> seen;
    for (const auto& s : offered_) {
        if (std::find(seen.begin(), seen.end(), s.kem.name) == seen.end()) {
            seen.push_back(s.kem.name);
        }
    }
    return static_cast<int>(seen.size());
}

const HandshakeMessage& ClientSession::client_hello() {
    if (hello_built_) return transcript_.messages.front();

    HandshakeMessage hello;
    hello.kind = MessageKind::ClientHello;
    hello.direction = Direction::ClientToServer;
    hello.body = filler(MessageKind::ClientHello, static_cast<size_t>(framing_.client_hello_base));
    for (const auto& suite : offered_) {
        hello.offered_suites.push_back(suite.id);
        bool have_share = std::any_of(key_shares_.begin(), key_shares_.end(),
                                      [&](const auto& kv) { return kv.first == suite.kem.name; });
        if (have_share) continue;
        KemKeyPair pair = provider_->kem_keygen(suite.kem);
        // Key share entry: 2-byte group tag, 2-byte length, public key.
        uint16_t tag = group_tag(suite.kem);
        uint16_t len = static_cast<uint16_t>(pair.public_key.size());
        hello.body.push_back(static_cast<uint8_t>(tag & 0xff));
        hello.body.push_back(static_cast<uint8_t>(tag >> 8));
        hello.body.push_back(static_cast<uint8_t>(len & 0xff));
        hello.body.push_back(static_cast<uint8_t>(len >> 8));
        append(hello.body, pair.public_key);
        key_shares_.emplace_back(suite.kem.name, std::move(pair));
    }
    transcript_.messages.push_back(std::move(hello));
    hello_built_ = true;
    return transcript_.messages.front();
}

ClientSession::FlightResult ClientSession::on_server_flight(
    const std::vector<HandshakeMessage>& flight) {
    FlightResult result;
    if (!hello_built_) {
        throw HandshakeStateError("on_server_flight called before client_hello");
    }

    auto fail = [&](HandshakeError err) {
        transcript_.error = err;
        HandshakeMessage alert = make_alert(Direction::ClientToServer, err);
        transcript_.messages.push_back(alert);
        result.alert = std::move(alert);
        result.error = err;
        return result;
    };

    if (flight.size() != 4 || flight[0].kind != MessageKind::ServerHello ||
        flight[1].kind != MessageKind::Certificate ||
        flight[2].kind != MessageKind::CertificateVerify ||
        flight[3].kind != MessageKind::Finished) {
        if (flight.size() == 1 && flight[0].kind == MessageKind::Alert) {
            transcript_.messages.push_back(flight[0]);
            transcript_.error = flight[0].body.size() == 2
                                    ? static_cast<HandshakeError>(flight[0].body[1])
                                    : HandshakeError::MalformedMessage;
            result.error = transcript_.error;
            return result;
        }
        return fail(HandshakeError::MalformedMessage);
    }

    const HandshakeMessage& sh = flight[0];
    const HandshakeMessage& cert = flight[1];
    const HandshakeMessage& cv = flight[2];
    const HandshakeMessage& server_fin = flight[3];
    for (const auto& msg : flight) transcript_.messages.push_back(msg);

    // Negotiated suite must be one we offered; sizes come from our own offer
    // list, never from wire bytes.
    const SuiteDescriptor* suite = nullptr;
    for (const auto& s : offered_) {
        if (s.id == sh.chosen_suite) suite = &s;
    }
    if (!suite) return fail(HandshakeError::NoCommonSuite);
    transcript_.suite = *suite;

    TranscriptHash th;
    th.add(transcript_.messages[0].body); // ClientHello as sent

    // ServerHello: base filler then the KEM ciphertext.
    size_t ct_len = static_cast<size_t>(suite->kem.ciphertext_bytes);
    if (sh.body.size() != static_cast<size_t>(framing_.server_hello_base) + ct_len) {
        return fail(HandshakeError::MalformedMessage);
    }
    std::span<const uint8_t> ct(sh.body.data() + framing_.server_hello_base, ct_len);
    th.add(sh.body);

    // Certificate: chain elements of [filler | sig public key | self signature].
    size_t pk_len = static_cast<size_t>(suite->sig.public_key_bytes);
    size_t sig_len = static_cast<size_t>(suite->sig.signature_bytes);
    size_t element = static_cast<size_t>(framing_.certificate_base) + pk_len + sig_len;
    if (cert.body.empty() || cert.body.size() % element != 0) {
        return fail(HandshakeError::MalformedMessage);
    }
    std::span<const uint8_t> leaf_pk;
    for (size_t off = 0; off < cert.body.size(); off += element) {
        std::span<const uint8_t> pk(cert.body.data() + off + framing_.certificate_base, pk_len);
        std::span<const uint8_t> sig(cert.body.data() + off + framing_.certificate_base + pk_len,
                                     sig_len);
        if (!provider_->verify(suite->sig, pk, pk, sig)) {
            return fail(HandshakeError::BadCertificateSignature);
        }
        if (off == 0) leaf_pk = pk;
    }
    th.add(cert.body);

    // CertificateVerify: signature over the transcript hash of CH..Certificate.
    if (cv.body.size() != static_cast<size_t>(framing_.cert_verify_base) + sig_len) {
        return fail(HandshakeError::MalformedMessage);
    }
    std::vector<uint8_t> th_bytes = u64_le(th.state);
    std::span<const uint8_t> cv_sig(cv.body.data() + framing_.cert_verify_base, sig_len);
    if (!provider_->verify(suite->sig, leaf_pk, th_bytes, cv_sig)) {
        return fail(HandshakeError::BadCertVerify);
    }
    th.add(cv.body);
    uint64_t th_after_cv = th.state;

    // Decapsulate with our own key share for the negotiated group.
    const KemKeyPair* own = nullptr;
    for (const auto& [name, pair] : key_shares_) {
        if (name == suite->kem.name) own = &pair;
    }
    if (!own) return fail(HandshakeError::MalformedMessage);
    std::vector<uint8_t> ss = provider_->decapsulate(suite->kem, *own, ct);
    transcript_.session_key = derive_session_key(ss, th_after_cv);

    // Server Finished MAC binds the transcript as *we* saw it.
    size_t mac_len = static_cast<size_t>(framing_.mac_bytes);
    if (server_fin.body.size() != static_cast<size_t>(framing_.finished_base) + mac_len) {
        return fail(HandshakeError::MalformedMessage);
    }
    std::vector<uint8_t> expected =
        finished_mac(transcript_.session_key, th_after_cv, "server-finished", framing_.mac_bytes);
    if (!std::equal(expected.begin(), expected.end(),
                    server_fin.body.begin() + framing_.finished_base)) {
        return fail(HandshakeError::BadFinishedMac);
    }
    th.add(server_fin.body);

    HandshakeMessage fin;
    fin.kind = MessageKind::Finished;
    fin.direction = Direction::ClientToServer;
    fin.chosen_suite = suite->id;
    fin.body = filler(MessageKind::Finished, static_cast<size_t>(framing_.finished_base));
    std::vector<uint8_t> mac =
        finished_mac(transcript_.session_key, th.state, "client-finished", framing_.mac_bytes);
    append(fin.body, mac);
    transcript_.messages.push_back(fin);
    transcript_.completed = true;
    result.finished = std::move(fin);
    return result;
}

// ---------------------------------------------------------------------------
// ServerSession
// ---------------------------------------------------------------------------

ServerSession::ServerSession(ServerConfig config, FramingConfig framing,
                             std::shared_ptr<CryptoProvider> provider)
    : config_(std::move(config)), framing_(framing), provider_(std::move(provider)) {}

ServerSession::RespondResult ServerSession::on_client_hello(const HandshakeMessage& hello) {
    RespondResult result;
    transcript_.messages.push_back(hello);

    auto fail = [&](HandshakeError err) {
        transcript_.error = err;
        HandshakeMessage alert = make_alert(Direction::ServerToClient, err);
        transcript_.messages.push_back(alert);
        result.alert = std::move(alert);
        result.error = err;
        return result;
    };

    if (hello.offered_suites.empty()) return fail(HandshakeError::EmptyOffer);

    // First suite in *our* configured order that the client offered.
    const SuiteDescriptor* chosen = nullptr;
    for (const auto& s : config_.supported) {
        if (std::find(hello.offered_suites.begin(), hello.offered_suites.end(), s.id) !=
            hello.offered_suites.end()) {
            chosen = &s;
            break;
        }
    }
    if (!chosen) return fail(HandshakeError::NoCommonSuite);
    transcript_.suite = *chosen;
    result.chosen = *chosen;

    // Locate the client's key share for the chosen group by scanning the
    // tag/length entries after the fixed header region.
    uint16_t want_tag = group_tag(chosen->kem);
    std::span<const uint8_t> client_pk;
    size_t off = static_cast<size_t>(framing_.client_hello_base);
    while (off + 4 <= hello.body.size()) {
        uint16_t tag = static_cast<uint16_t>(hello.body[off] | (hello.body[off + 1] << 8));
        uint16_t len = static_cast<uint16_t>(hello.body[off + 2] | (hello.body[off + 3] << 8));
        off += 4;
        if (off + len > hello.body.size()) return fail(HandshakeError::MalformedMessage);
        if (tag == want_tag) {
            client_pk = std::span<const uint8_t>(hello.body.data() + off, len);
            break;
        }
        off += len;
    }
    if (client_pk.empty() || client_pk.size() != static_cast<size_t>(chosen->kem.public_key_bytes)) {
        return fail(HandshakeError::MalformedMessage);
    }

    TranscriptHash th;
    th.add(hello.body);

    EncapsResult enc = provider_->encapsulate(chosen->kem, client_pk);

    HandshakeMessage sh;
    sh.kind = MessageKind::ServerHello;
    sh.direction = Direction::ServerToClient;
    sh.chosen_suite = chosen->id;
    sh.body = filler(MessageKind::ServerHello, static_cast<size_t>(framing_.server_hello_base));
    append(sh.body, enc.ciphertext);
    th.add(sh.body);

    HandshakeMessage cert;
    cert.kind = MessageKind::Certificate;
    cert.direction = Direction::ServerToClient;
    SigKeyPair leaf;
    for (int i = 0; i < framing_.certificate_chain_length; ++i) {
        SigKeyPair element_key = provider_->sig_keygen(chosen->sig);
        std::vector<uint8_t> element_sig =
            provider_->sign(chosen->sig, element_key, element_key.public_key);
        append(cert.body, filler(MessageKind::Certificate,
                                 static_cast<size_t>(framing_.certificate_base)));
        append(cert.body, element_key.public_key);
        append(cert.body, element_sig);
        if (i == 0) leaf = std::move(element_key);
    }
    th.add(cert.body);

    HandshakeMessage cv;
    cv.kind = MessageKind::CertificateVerify;
    cv.direction = Direction::ServerToClient;
    cv.body = filler(MessageKind::CertificateVerify, static_cast<size_t>(framing_.cert_verify_base));
    append(cv.body, provider_->sign(chosen->sig, leaf, u64_le(th.state)));
    th.add(cv.body);
    uint64_t th_after_cv = th.state;

    transcript_.session_key = derive_session_key(enc.shared_secret, th_after_cv);

    HandshakeMessage fin;
    fin.kind = MessageKind::Finished;
    fin.direction = Direction::ServerToClient;
    fin.body = filler(MessageKind::Finished, static_cast<size_t>(framing_.finished_base));
    append(fin.body,
           finished_mac(transcript_.session_key, th_after_cv, "server-finished", framing_.mac_bytes));
    th.add(fin.body);

    expected_client_mac_ =
        finished_mac(transcript_.session_key, th.state, "client-finished", framing_.mac_bytes);

    result.flight = {sh, cert, cv, fin};
    for (const auto& msg : result.flight) transcript_.messages.push_back(msg);
    return result;
}

ServerSession::FinishResult ServerSession::on_client_finished(const HandshakeMessage& finished) {
    FinishResult result;
    if (expected_client_mac_.empty()) {
        throw HandshakeStateError("on_client_finished called before on_client_hello");
    }
    transcript_.messages.push_back(finished);

    size_t mac_len = static_cast<size_t>(framing_.mac_bytes);
    bool ok = finished.kind == MessageKind::Finished &&
              finished.body.size() == static_cast<size_t>(framing_.finished_base) + mac_len &&
              std::equal(expected_client_mac_.begin(), expected_client_mac_.end(),
                         finished.body.begin() + framing_.finished_base);
    if (!ok) {
        transcript_.error = HandshakeError::BadFinishedMac;
        HandshakeMessage alert = make_alert(Direction::ServerToClient, transcript_.error);
        transcript_.messages.push_back(alert);
        result.alert = std::move(alert);
        result.error = transcript_.error;
        return result;
    }
    transcript_.completed = true;
    result.completed = true;
    return result;
}

// ---------------------------------------------------------------------------
// In-memory driver
// ---------------------------------------------------------------------------

InMemoryOutcome run_handshake(const std::vector<SuiteDescriptor>& offered,
                              const ServerConfig& server_config, const FramingConfig& framing,
                              uint64_t client_seed, uint64_t server_seed, const TamperFn& tamper) {
    InMemoryOutcome outcome;
    ClientSession client(offered, framing, std::make_shared<ModelProvider>(client_seed));
    ServerSession server(server_config, framing, std::make_shared<ModelProvider>(server_seed));

    auto deliver = [&](HandshakeMessage msg) {
        if (tamper) tamper(msg.kind, msg.direction, msg.body);
        return msg;
    };

    HandshakeMessage hello = deliver(client.client_hello());
    ServerSession::RespondResult respond = server.on_client_hello(hello);
    if (respond.error != HandshakeError::None) {
        if (respond.alert) client.on_server_flight({*respond.alert});
        outcome.error = respond.error;
    } else {
        std::vector<HandshakeMessage> flight;
        flight.reserve(respond.flight.size());
        for (auto& msg : respond.flight) flight.push_back(deliver(msg));
        ClientSession::FlightResult fr = client.on_server_flight(flight);
        if (fr.error != HandshakeError::None) {
            outcome.error = fr.error;
        } else {
            ServerSession::FinishResult fin = server.on_client_finished(deliver(*fr.finished));
            outcome.error = fin.error;
            outcome.completed = fin.completed;
        }
    }
    outcome.client = client.transcript();
    outcome.server = server.transcript();
    return outcome;
}

} // namespace pqcbench
