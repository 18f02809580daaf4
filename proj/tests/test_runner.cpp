#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "pqcbench/runner.hpp"

using namespace pqcbench;

TEST_CASE("mix_seed matches frozen vectors from an independent implementation") {
    CHECK(mix_seed(7, "mlkem512_mldsa44", 1, 0) == 0x63fd257270e46022ull);
    CHECK(mix_seed(7, "mlkem512_mldsa44", 1, 1) == 0xae6583bec0aab3abull);
    CHECK(mix_seed(7, "x25519_falcon512", 10, 3) == 0x5a4573f2a47c9b1aull);
    CHECK(mix_seed(0, "", 0, 0) == 0x5db1c9c93624d952ull);
}

TEST_CASE("scenario config reads the run block and nested blocks") {
    KeyValueFile kv = KeyValueFile::parse_text(
        "run.seed = 99\n"
        "run.iterations = 3\n"
        "run.client_counts = 1, 10\n"
        "run.suites = mlkem512_mldsa44, x25519_falcon512\n"
        "run.app_payload_bytes = 1000\n"
        "run.record_payload_bytes = 500\n"
        "run.server_service_units = 2\n"
        "framing.certificate_chain_length = 2\n"
        "link.ue1_gnb.loss_prob = 0\n"
        "transport.rto_ms = 30\n"
        "cpu.window_ms = 500\n");
    ScenarioConfig cfg = ScenarioConfig::from_config(kv);
    CHECK(cfg.seed == 99);
    CHECK(cfg.iterations == 3);
    REQUIRE(cfg.client_counts.size() == 2);
    CHECK(cfg.client_counts[1] == 10);
    REQUIRE(cfg.suite_ids.size() == 2);
    CHECK(cfg.suite_ids[0] == "mlkem512_mldsa44");
    CHECK(cfg.session.app_payload_bytes == 1000);
    CHECK(cfg.session.record_payload_bytes == 500);
    CHECK(cfg.session.server_service_units == 2);
    CHECK(cfg.session.framing.certificate_chain_length == 2);
    CHECK(cfg.session.path.links[0].loss_prob == 0.0);
    CHECK(cfg.session.transport.rto_ms == 30.0);
    CHECK(cfg.cpu.window_ms == 500.0);

    CHECK_THROWS_AS(ScenarioConfig::from_config(
                        KeyValueFile::parse_text("run.iterations = 0\n")),
                    RunnerError);
    CHECK_THROWS_AS(ScenarioConfig::from_config(
                        KeyValueFile::parse_text("run.client_counts = 0\n")),
                    RunnerError);
}

TEST_CASE("registry_from_config applies a cost profile file") {
    namespace fs = std::filesystem;
    fs::path profile = fs::temp_directory_path() / "pqcbench_test_costs.profile";
    {
        std::ofstream out(profile);
        out << "mlkem512.keygen_cost = 777\n";
    }
    KeyValueFile kv =
        KeyValueFile::parse_text("costs.profile = " + profile.string() + "\n");
    Registry reg = registry_from_config(kv);
    CHECK(reg.find_kem("mlkem512")->keygen_cost_us == 777.0);
    fs::remove(profile);

    Registry plain = registry_from_config(KeyValueFile::parse_text(""));
    CHECK(plain.find_kem("mlkem512")->keygen_cost_us ==
          Registry::builtin().find_kem("mlkem512")->keygen_cost_us);
}

TEST_CASE("iteration seeds depend on identity, not execution order") {
    ScenarioConfig cfg;
    cfg.iterations = 2;
    cfg.suite_ids = {"mlkem512_mldsa44", "x25519_falcon512"};

    MatrixResult forward = run_matrix(cfg, Registry::builtin());
    std::swap(cfg.suite_ids[0], cfg.suite_ids[1]);
    MatrixResult backward = run_matrix(cfg, Registry::builtin());

    REQUIRE(forward.aggregates.size() == 2);
    REQUIRE(backward.aggregates.size() == 2);
    // Aggregates are sorted by suite id, so same index = same suite.
    for (size_t i = 0; i < 2; ++i) {
        const AggregateResult& a = forward.aggregates[i];
        const AggregateResult& b = backward.aggregates[i];
        CHECK(a.suite_id == b.suite_id);
        CHECK(a.max_cpu_pct == b.max_cpu_pct);
        CHECK(a.mean_latency_ms == b.mean_latency_ms);
        CHECK(a.mean_bandwidth_kbs == b.mean_bandwidth_kbs);
        CHECK(a.retx_rate_pct == b.retx_rate_pct);
        CHECK(a.segments_sent == b.segments_sent);
    }

    for (const auto& rec : forward.records) {
        CHECK(rec.seed == mix_seed(cfg.seed, rec.suite_id, rec.client_count, rec.iteration));
    }
}

TEST_CASE("aggregates recompute exactly from the iteration records") {
    ScenarioConfig cfg;
    cfg.iterations = 4;
    cfg.suite_ids = {"hqc128_mldsa44"};
    SuiteDescriptor suite = Registry::builtin().find_suite("hqc128_mldsa44");

    MatrixResult result = run_entry(cfg, suite, 1);
    REQUIRE(result.records.size() == 4);
    REQUIRE(result.aggregates.size() == 1);

    AggregateResult redo = aggregate_records(result.records, suite, 1);
    const AggregateResult& agg = result.aggregates[0];
    CHECK(redo.max_cpu_pct == agg.max_cpu_pct);
    CHECK(redo.mean_latency_ms == agg.mean_latency_ms);
    CHECK(redo.mean_bandwidth_kbs == agg.mean_bandwidth_kbs);
    CHECK(redo.retx_rate_pct == agg.retx_rate_pct);
    CHECK(redo.segments_sent == agg.segments_sent);
    CHECK(redo.sessions == agg.sessions);

    // Pooled retransmission rate equals totals over totals.
    int64_t sent = 0, retx = 0;
    for (const auto& rec : result.records) {
        sent += rec.segments_sent;
        retx += rec.segments_retransmitted;
    }
    CHECK(agg.segments_sent == sent);
    CHECK(agg.retx_rate_pct == doctest::Approx(100.0 * retx / sent));

    CHECK(agg.label == "hqc128_mldsa44");
    CHECK(agg.kem == "hqc128");
    CHECK(agg.sig == "mldsa44");
    CHECK(agg.iterations == 4);
}

TEST_CASE("failed sessions are excluded from latency but kept in totals") {
    ScenarioConfig cfg;
    cfg.iterations = 2;
    cfg.session.path.links[0].loss_prob = 0.999; // nothing gets through
    cfg.session.transport.max_retries = 2;
    SuiteDescriptor suite = Registry::builtin().find_suite("mlkem512_mldsa44");

    MatrixResult result = run_entry(cfg, suite, 1);
    const AggregateResult& agg = result.aggregates[0];
    CHECK(agg.failed_sessions == agg.sessions);
    CHECK(agg.mean_latency_ms == 0.0);
    CHECK(agg.segments_sent > 0); // the attempts still count
    CHECK(agg.segments_retransmitted > 0);
}

TEST_CASE("matrix covers suites x client counts and respects selection") {
    ScenarioConfig cfg;
    cfg.iterations = 1;
    cfg.client_counts = {1, 2};
    cfg.suite_ids = {"x25519_mldsa44", "mlkem512_mldsa44"};

    int progress_calls = 0;
    MatrixResult result = run_matrix(cfg, Registry::builtin(),
                                     [&](const AggregateResult&) { ++progress_calls; });
    CHECK(result.aggregates.size() == 4);
    CHECK(progress_calls == 4);
    CHECK(result.records.size() == 4);

    // Sorted by (suite_id, client_count).
    CHECK(result.aggregates[0].suite_id == "mlkem512_mldsa44");
    CHECK(result.aggregates[0].client_count == 1);
    CHECK(result.aggregates[1].client_count == 2);
    CHECK(result.aggregates[2].suite_id == "x25519_mldsa44");

    CHECK_THROWS_AS(
        [] {
            ScenarioConfig bad;
            bad.suite_ids = {"nope_nope"};
            run_matrix(bad, Registry::builtin());
        }(),
        UnknownSuiteError);
}
