#ifndef PQCBENCH_HANDSHAKE_HPP
#define PQCBENCH_HANDSHAKE_HPP

// TLS 1.3-style handshake state machine over a pluggable crypto provider.
// Message sequence on success: ClientHello, ServerHello, Certificate,
// CertificateVerify, Finished (server), Finished (client). The server's four
// messages travel as one wire flight; that is the network layer's concern,
// the transcript here stays at message granularity.
//
// Messages carry real bodies: key shares, ciphertexts, certificate chains
// and signatures are laid out at their descriptor sizes, signatures and
// Finished MACs bind the transcript bytes, and flipping any byte in transit
// aborts the handshake with an Alert.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqcbench/config.hpp"
#include "pqcbench/suites.hpp"

namespace pqcbench {

enum class MessageKind {
    ClientHello,
    ServerHello,
    Certificate,
    CertificateVerify,
    Finished,
    Alert,
};

enum class Direction { ClientToServer, ServerToClient };

std::string_view message_kind_name(MessageKind kind);

enum class HandshakeError {
    None,
    EmptyOffer,
    NoCommonSuite,
    BadCertificateSignature,
    BadCertVerify,
    BadFinishedMac,
    MalformedMessage,
};

std::string_view handshake_error_name(HandshakeError error);

class HandshakeStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Message framing overheads in bytes. These are model calibration, not
// protocol constants, so they are configurable (`framing.*` keys).
struct FramingConfig {
    int client_hello_base = 128;
    int server_hello_base = 64;
    int certificate_base = 256;   // per chain element
    int cert_verify_base = 8;
    int finished_base = 4;
    int key_share_header = 4;     // per offered KEM group
    int mac_bytes = 32;           // Finished MAC (SHA-256-sized)
    int aead_tag_bytes = 16;      // per application record
    int certificate_chain_length = 1;

    static FramingConfig from_config(const KeyValueFile& kv);
};

struct HandshakeMessage {
    MessageKind kind = MessageKind::Alert;
    Direction direction = Direction::ClientToServer;
    std::vector<uint8_t> body;

    // Structured header contents; byte integrity is enforced through the
    // signatures and MACs over `body`, not by re-parsing these.
    std::vector<std::string> offered_suites;
    std::string chosen_suite;

    int64_t payload_bytes() const { return static_cast<int64_t>(body.size()); }
};

struct HandshakeTranscript {
    std::optional<SuiteDescriptor> suite;
    std::vector<HandshakeMessage> messages;
    std::vector<uint8_t> session_key;
    bool completed = false;
    HandshakeError error = HandshakeError::None;
};

// Sum of payload bytes by direction: {client_to_server, server_to_client}.
// Throws HandshakeStateError on an incomplete transcript.
struct TranscriptBytes {
    int64_t client_to_server = 0;
    int64_t server_to_client = 0;
    int64_t total() const { return client_to_server + server_to_client; }
};
TranscriptBytes transcript_total_bytes(const HandshakeTranscript& transcript);

// 32-byte key from the model KDF; both sides must agree byte for byte.
std::vector<uint8_t> derive_session_key(std::span<const uint8_t> shared_secret,
                                        uint64_t transcript_hash);

struct ServerConfig {
    std::vector<SuiteDescriptor> supported;
};

class ClientSession {
public:
    // Offer order matters: the server picks its first supported match.
    ClientSession(std::vector<SuiteDescriptor> offered, FramingConfig framing,
                  std::shared_ptr<CryptoProvider> provider);

    // Builds the ClientHello (idempotent). Key shares are generated for each
    // distinct offered KEM group.
    const HandshakeMessage& client_hello();

    // Number of distinct KEM groups in the offer; the caller charges one
    // keygen per group.
    int key_share_groups() const;

    struct FlightResult {
        std::optional<HandshakeMessage> finished; // present on success
        std::optional<HandshakeMessage> alert;    // present on failure
        HandshakeError error = HandshakeError::None;
    };
    // Processes the server's flight [SH, Cert..., CV, Finished] and either
    // produces the client Finished or an Alert.
    FlightResult on_server_flight(const std::vector<HandshakeMessage>& flight);

    const HandshakeTranscript& transcript() const { return transcript_; }

private:
    std::vector<SuiteDescriptor> offered_;
    FramingConfig framing_;
    std::shared_ptr<CryptoProvider> provider_;
    std::vector<std::pair<std::string, KemKeyPair>> key_shares_; // kem name -> pair
    HandshakeTranscript transcript_;
    bool hello_built_ = false;
};

class ServerSession {
public:
    ServerSession(ServerConfig config, FramingConfig framing,
                  std::shared_ptr<CryptoProvider> provider);

    struct RespondResult {
        std::vector<HandshakeMessage> flight;  // SH, Cert, CV, Finished on success
        std::optional<HandshakeMessage> alert; // set on failure
        HandshakeError error = HandshakeError::None;
        std::optional<SuiteDescriptor> chosen;
    };
    RespondResult on_client_hello(const HandshakeMessage& hello);

    struct FinishResult {
        bool completed = false;
        std::optional<HandshakeMessage> alert;
        HandshakeError error = HandshakeError::None;
    };
    FinishResult on_client_finished(const HandshakeMessage& finished);

    const HandshakeTranscript& transcript() const { return transcript_; }

private:
    ServerConfig config_;
    FramingConfig framing_;
    std::shared_ptr<CryptoProvider> provider_;
    HandshakeTranscript transcript_;
    std::vector<uint8_t> expected_client_mac_;
};

// In-memory handshake driver for tests: runs the full exchange, optionally
// mutating each message body in transit.
using TamperFn = std::function<void(MessageKind, Direction, std::vector<uint8_t>&)>;

struct InMemoryOutcome {
    HandshakeTranscript client;
    HandshakeTranscript server;
    bool completed = false;
    HandshakeError error = HandshakeError::None;
};

InMemoryOutcome run_handshake(const std::vector<SuiteDescriptor>& offered,
                              const ServerConfig& server_config, const FramingConfig& framing,
                              uint64_t client_seed, uint64_t server_seed,
                              const TamperFn& tamper = {});

} // namespace pqcbench

#endif
