#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "pqcbench/prf.hpp"
#include "pqcbench/suites.hpp"

using namespace pqcbench;

TEST_CASE("registry holds 9 KEMs x 8 signatures = 72 suites") {
    const Registry& reg = Registry::builtin();
    CHECK(reg.kems().size() == 9);
    CHECK(reg.sigs().size() == 8);
    std::vector<SuiteDescriptor> suites = reg.suites();
    REQUIRE(suites.size() == 72);

    std::set<std::string> ids;
    for (const auto& s : suites) ids.insert(s.id);
    CHECK(ids.size() == 72);

    // Signature-major, KEMs in table row order (classical, mlkem, hqc).
    CHECK(suites[0].id == "x25519_falcon512");
    CHECK(suites[0].label == "X25519_falcon512");
    CHECK(suites[8].id == "hqc256_falcon512");
    CHECK(suites[9].id == "x25519_falcon1024");
    CHECK(suites[71].id == "hqc256_sphincssha2256f");
}

TEST_CASE("byte sizes match the published parameter sets") {
    const Registry& reg = Registry::builtin();
    auto kem = [&](const char* name) { return *reg.find_kem(name); };
    auto sig = [&](const char* name) { return *reg.find_sig(name); };

    // KEM: public key / ciphertext / shared secret.
    struct { const char* name; int pk, ct, ss, level; } kems[] = {
        {"x25519", 32, 32, 32, 1},      {"secp384r1", 97, 97, 48, 3},
        {"secp521r1", 133, 133, 66, 5}, {"mlkem512", 800, 768, 32, 1},
        {"mlkem768", 1184, 1088, 32, 3}, {"mlkem1024", 1568, 1568, 32, 5},
        {"hqc128", 2249, 4481, 64, 1},  {"hqc192", 4522, 9026, 64, 3},
        {"hqc256", 7245, 14469, 64, 5},
    };
    for (const auto& k : kems) {
        KemDescriptor d = kem(k.name);
        CHECK(d.public_key_bytes == k.pk);
        CHECK(d.ciphertext_bytes == k.ct);
        CHECK(d.shared_secret_bytes == k.ss);
        CHECK(d.nist_level == k.level);
    }

    // Signature: public key / signature.
    struct { const char* name; int pk, sg, level; } sigs[] = {
        {"falcon512", 897, 666, 1},        {"falcon1024", 1793, 1280, 5},
        {"mldsa44", 1312, 2420, 2},        {"mldsa65", 1952, 3309, 3},
        {"mldsa87", 2592, 4627, 5},        {"sphincssha2128f", 32, 17088, 1},
        {"sphincssha2192f", 48, 35664, 3}, {"sphincssha2256f", 64, 49856, 5},
    };
    for (const auto& s : sigs) {
        SigDescriptor d = sig(s.name);
        CHECK(d.public_key_bytes == s.pk);
        CHECK(d.signature_bytes == s.sg);
        CHECK(d.nist_level == s.level);
    }
}

TEST_CASE("find_suite parses ids case-insensitively and rejects unknowns") {
    const Registry& reg = Registry::builtin();
    SuiteDescriptor s = reg.find_suite("X25519_MLDSA44");
    CHECK(s.id == "x25519_mldsa44");
    CHECK(s.label == "X25519_mldsa44");
    CHECK(s.kem.name == "x25519");
    CHECK(s.sig.name == "mldsa44");

    CHECK_THROWS_AS(reg.find_suite("mlkem512"), UnknownSuiteError);
    CHECK_THROWS_AS(reg.find_suite("mlkem512_nope"), UnknownSuiteError);
    CHECK_THROWS_AS(reg.find_suite(""), UnknownSuiteError);
    CHECK(reg.find_kem("nope") == nullptr);
    CHECK(reg.find_sig("nope") == nullptr);
}

TEST_CASE("the shipped profile file and the embedded default are identical") {
    std::ifstream in(std::string(PQCBENCH_SOURCE_DIR) + "/data/default_costs.profile",
                     std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == default_cost_profile_text());
}

TEST_CASE("cost profiles override costs and reject junk") {
    CostProfile profile = CostProfile::parse("mlkem512.keygen_cost = 123.5\n"
                                             "falcon512.sign_cost = 42\n");
    Registry reg = Registry::builtin().with_profile(profile);
    CHECK(reg.find_kem("mlkem512")->keygen_cost_us == 123.5);
    CHECK(reg.find_sig("falcon512")->sign_cost_us == 42.0);
    // The builtin registry is untouched.
    CHECK(Registry::builtin().find_kem("mlkem512")->keygen_cost_us != 123.5);

    CHECK_THROWS_AS(Registry::builtin().with_profile(CostProfile::parse("nope.keygen_cost = 1\n")),
                    ProfileError);
    CHECK_THROWS_AS(Registry::builtin().with_profile(CostProfile::parse("mlkem512.nope_cost = 1\n")),
                    ProfileError);
    CHECK_THROWS_AS(
        Registry::builtin().with_profile(CostProfile::parse("mlkem512.keygen_cost = -1\n")),
        ProfileError);
}

TEST_CASE("deterministic byte expansion matches frozen vectors") {
    // Golden values computed by an independent implementation.
    CHECK(fnv1a64(std::string_view("mlkem512_mldsa44")) == 0x711d1c025161ff85ull);

    auto hex = [](const std::vector<uint8_t>& bytes) {
        static const char* digits = "0123456789abcdef";
        std::string out;
        for (uint8_t b : bytes) {
            out += digits[b >> 4];
            out += digits[b & 0xf];
        }
        return out;
    };
    CHECK(hex(expand_bytes(42, "kem-pk", 12)) == "fb0f1c8494d5d07e45482394");
    CHECK(hex(expand_bytes(7, "session-key", 8)) == "8b265330742b018a");
}

TEST_CASE("model provider: encapsulate and decapsulate agree for every KEM") {
    const Registry& reg = Registry::builtin();
    for (const auto& kem : reg.kems()) {
        for (uint64_t seed : {1ull, 99ull, 31337ull}) {
            ModelProvider alice(seed);
            ModelProvider bob(seed ^ 0xdeadbeefull);
            KemKeyPair pair = alice.kem_keygen(kem);
            CHECK(pair.public_key.size() == static_cast<size_t>(kem.public_key_bytes));

            EncapsResult enc = bob.encapsulate(kem, pair.public_key);
            CHECK(enc.ciphertext.size() == static_cast<size_t>(kem.ciphertext_bytes));
            CHECK(enc.shared_secret.size() == static_cast<size_t>(kem.shared_secret_bytes));

            std::vector<uint8_t> ss = alice.decapsulate(kem, pair, enc.ciphertext);
            CHECK(ss == enc.shared_secret);
        }
    }
}

TEST_CASE("model provider: verify accepts signatures and rejects any change") {
    const Registry& reg = Registry::builtin();
    for (const auto& sig : reg.sigs()) {
        ModelProvider signer(5);
        SigKeyPair key = signer.sig_keygen(sig);
        CHECK(key.public_key.size() == static_cast<size_t>(sig.public_key_bytes));

        std::vector<uint8_t> message = {1, 2, 3, 4, 5};
        std::vector<uint8_t> signature = signer.sign(sig, key, message);
        CHECK(signature.size() == static_cast<size_t>(sig.signature_bytes));
        CHECK(signer.verify(sig, key.public_key, message, signature));

        std::vector<uint8_t> bad_message = message;
        bad_message[2] ^= 1;
        CHECK_FALSE(signer.verify(sig, key.public_key, bad_message, signature));

        std::vector<uint8_t> bad_signature = signature;
        bad_signature[signature.size() / 2] ^= 1;
        CHECK_FALSE(signer.verify(sig, key.public_key, message, bad_signature));

        std::vector<uint8_t> bad_key = key.public_key;
        bad_key[0] ^= 1;
        CHECK_FALSE(signer.verify(sig, bad_key, message, signature));
    }
}

TEST_CASE("default costs: the orderings the benchmark relies on") {
    const Registry& reg = Registry::builtin();
    auto sign = [&](const char* s) { return reg.find_sig(s)->sign_cost_us; };
    auto encaps = [&](const char* k) { return reg.find_kem(k)->encaps_cost_us; };

    // Hash-based signing dwarfs lattice signing; falcon sits between
    // sphincs and mldsa.
    double sphincs_min = std::min({sign("sphincssha2128f"), sign("sphincssha2192f"),
                                   sign("sphincssha2256f")});
    double falcon_max = std::max(sign("falcon512"), sign("falcon1024"));
    double falcon_min = std::min(sign("falcon512"), sign("falcon1024"));
    double mldsa_max = std::max({sign("mldsa44"), sign("mldsa65"), sign("mldsa87")});
    CHECK(sphincs_min > falcon_max);
    CHECK(falcon_max > falcon_min);
    CHECK(falcon_min > mldsa_max);

    // hqc256 encapsulation is the most expensive of the nine groups.
    for (const char* kem : {"x25519", "secp384r1", "secp521r1", "mlkem512", "mlkem768",
                            "mlkem1024", "hqc128", "hqc192"}) {
        CHECK(encaps("hqc256") > encaps(kem));
    }
}
