#ifndef PQCBENCH_SUITES_HPP
#define PQCBENCH_SUITES_HPP

// Algorithm registry: the nine key-exchange groups and eight signature
// schemes whose cross product forms the 72 benchmark suites, plus the
// per-primitive cost table and the deterministic model crypto provider.
//
// Byte sizes are fixed by the standards (FIPS 203/204/205, the Falcon and
// HQC submissions, RFC 7748 / SEC1 for the classical groups) and live in
// code. Per-primitive costs are calibration data and live in a profile file
// (data/default_costs.profile, embedded verbatim as the built-in default).

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pqcbench/config.hpp"

namespace pqcbench {

class SuiteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a suite/algorithm id does not parse; what() lists near misses.
class UnknownSuiteError : public SuiteError {
public:
    using SuiteError::SuiteError;
};

// Raised for bad cost-profile content (unknown algorithm/field, negative or
// non-numeric values).
class ProfileError : public SuiteError {
public:
    using SuiteError::SuiteError;
};

struct KemDescriptor {
    std::string name;   // canonical lowercase id, e.g. "mlkem512"
    std::string label;  // display form used in tables, e.g. "X25519"
    int nist_level = 1; // 1, 3 or 5
    int public_key_bytes = 0;
    int ciphertext_bytes = 0;
    int shared_secret_bytes = 0;
    double keygen_cost_us = 0;
    double encaps_cost_us = 0;
    double decaps_cost_us = 0;
};

struct SigDescriptor {
    std::string name;   // canonical lowercase id, e.g. "sphincssha2128f"
    std::string label;
    int nist_level = 1;
    int public_key_bytes = 0;
    int signature_bytes = 0;
    double sign_cost_us = 0;
    double verify_cost_us = 0;
};

struct SuiteDescriptor {
    std::string id;     // "<kem>_<sig>", lowercase
    std::string label;  // display form, e.g. "X25519_mldsa44"
    KemDescriptor kem;
    SigDescriptor sig;
};

// Parsed cost/size override file. Keys are `<alg>.<operation>_cost` (µs) and
// `<alg>.<field>_bytes`; unknown algorithms or fields are errors.
struct CostProfile {
    std::vector<ConfigEntry> entries;
    std::string origin;

    static CostProfile load(const std::string& path);
    static CostProfile parse(std::string_view text, std::string origin = "<inline>");
};

class Registry {
public:
    // Built-in registry: standard sizes plus the default cost profile.
    static const Registry& builtin();

    const std::vector<KemDescriptor>& kems() const { return kems_; }
    const std::vector<SigDescriptor>& sigs() const { return sigs_; }

    // All 72 suites, signature-major, KEMs in table row order. Stable across
    // calls and processes.
    std::vector<SuiteDescriptor> suites() const;

    const KemDescriptor* find_kem(std::string_view name) const; // case-insensitive
    const SigDescriptor* find_sig(std::string_view name) const;

    // Parses "<kem>_<sig>" (any case); throws UnknownSuiteError with nearest
    // matches on failure.
    SuiteDescriptor find_suite(std::string_view id) const;

    // Copy with a profile applied on top; validates every entry.
    Registry with_profile(const CostProfile& profile) const;

private:
    std::vector<KemDescriptor> kems_;
    std::vector<SigDescriptor> sigs_;
};

// Convenience wrappers over Registry::builtin().
std::vector<SuiteDescriptor> registry_default();
SuiteDescriptor parse_suite_id(std::string_view id);

// Exact content of data/default_costs.profile; the registry's built-in costs
// come from applying this text, so file and binary cannot drift apart.
std::string_view default_cost_profile_text();

// ---------------------------------------------------------------------------
// Crypto provider
// ---------------------------------------------------------------------------

struct KemKeyPair {
    std::vector<uint8_t> public_key;
    uint64_t secret = 0; // model secret; real providers would hold key material
};

struct SigKeyPair {
    std::vector<uint8_t> public_key;
};

struct EncapsResult {
    std::vector<uint8_t> ciphertext;
    std::vector<uint8_t> shared_secret;
};

class CryptoProvider {
public:
    virtual ~CryptoProvider() = default;

    virtual KemKeyPair kem_keygen(const KemDescriptor& kem) = 0;
    virtual EncapsResult encapsulate(const KemDescriptor& kem,
                                     std::span<const uint8_t> peer_public_key) = 0;
    virtual std::vector<uint8_t> decapsulate(const KemDescriptor& kem,
                                             const KemKeyPair& own,
                                             std::span<const uint8_t> ciphertext) = 0;
    virtual SigKeyPair sig_keygen(const SigDescriptor& sig) = 0;
    virtual std::vector<uint8_t> sign(const SigDescriptor& sig, const SigKeyPair& key,
                                      std::span<const uint8_t> message) = 0;
    virtual bool verify(const SigDescriptor& sig, std::span<const uint8_t> public_key,
                        std::span<const uint8_t> message,
                        std::span<const uint8_t> signature) = 0;
};

// Keyed-hash stand-in for the real algorithms: output lengths match the
// descriptors, encapsulate/decapsulate agree on the shared secret, and
// verify(sign(m)) holds while any altered input fails. Deterministic given
// the construction seed and call order. Provides no security whatsoever.
class ModelProvider : public CryptoProvider {
public:
    explicit ModelProvider(uint64_t seed);

    KemKeyPair kem_keygen(const KemDescriptor& kem) override;
    EncapsResult encapsulate(const KemDescriptor& kem,
                             std::span<const uint8_t> peer_public_key) override;
    std::vector<uint8_t> decapsulate(const KemDescriptor& kem, const KemKeyPair& own,
                                     std::span<const uint8_t> ciphertext) override;
    SigKeyPair sig_keygen(const SigDescriptor& sig) override;
    std::vector<uint8_t> sign(const SigDescriptor& sig, const SigKeyPair& key,
                              std::span<const uint8_t> message) override;
    bool verify(const SigDescriptor& sig, std::span<const uint8_t> public_key,
                std::span<const uint8_t> message,
                std::span<const uint8_t> signature) override;

private:
    uint64_t seed_;
    uint64_t calls_ = 0;
};

} // namespace pqcbench

#endif
