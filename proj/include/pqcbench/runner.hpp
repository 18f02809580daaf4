#ifndef PQCBENCH_RUNNER_HPP
#define PQCBENCH_RUNNER_HPP

// Drives the benchmark matrix: every selected suite x client count, a fixed
// number of iterations each, one simulated cell per iteration. Seeds are
// derived from (base seed, suite id, client count, iteration), never from
// execution order, so any subset of the matrix reproduces the full run's
// numbers exactly.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pqcbench/config.hpp"
#include "pqcbench/metrics.hpp"
#include "pqcbench/netsim.hpp"
#include "pqcbench/suites.hpp"

namespace pqcbench {

class RunnerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
    uint64_t seed = 7;
    int iterations = 50;
    std::vector<int> client_counts = {1};
    std::vector<std::string> suite_ids; // empty selects all suites
    SessionScenario session;            // suite field is overwritten per run
    CpuModel cpu;

    // Reads run.{seed,iterations,client_counts,suites,app_payload_bytes,
    // record_payload_bytes,aead_cost_per_byte_us,server_service_units} plus
    // the framing.*, link.*, transport.* and cpu.* blocks.
    static ScenarioConfig from_config(const KeyValueFile& kv);
};

// Registry with `costs.profile` applied on top of the builtin one, if the
// key names a profile file.
Registry registry_from_config(const KeyValueFile& kv);

// Per-cell seed. Identical inputs give identical draws on every platform.
uint64_t mix_seed(uint64_t base, std::string_view suite_id, int client_count, int iteration);

// One simulated cell (one iteration of one matrix entry).
struct IterationRecord {
    std::string suite_id;
    int client_count = 1;
    int iteration = 0;
    uint64_t seed = 0;
    int sessions = 0;
    int failed_sessions = 0;
    double max_cpu_pct = 0;       // busiest window of the shared server CPU
    double mean_latency_ms = 0;   // over completed sessions; 0 if none
    double mean_bandwidth_kbs = 0;
    double retx_rate_pct = 0;     // pooled over every session's totals
    int64_t segments_sent = 0;
    int64_t segments_retransmitted = 0;
    int64_t bytes_tx = 0;
    int64_t bytes_rx = 0;
};

struct AggregateResult {
    std::string suite_id;
    std::string label;
    std::string kem;
    std::string sig;
    int client_count = 1;
    int iterations = 0;
    int sessions = 0;
    int failed_sessions = 0;
    double max_cpu_pct = 0;       // max over iterations
    double mean_latency_ms = 0;   // mean of per-iteration means
    double mean_bandwidth_kbs = 0;
    double retx_rate_pct = 0;     // pooled: total retransmissions / total sends
    int64_t segments_sent = 0;
    int64_t segments_retransmitted = 0;
};

struct MatrixResult {
    std::vector<IterationRecord> records;     // run order
    std::vector<AggregateResult> aggregates;  // sorted by (suite_id, client_count)
};

// One matrix entry: `iterations` cells of `client_count` sessions.
MatrixResult run_entry(const ScenarioConfig& config, const SuiteDescriptor& suite,
                       int client_count);

using ProgressFn = std::function<void(const AggregateResult&)>;

// The full matrix over `registry` (filtered by config.suite_ids when set).
MatrixResult run_matrix(const ScenarioConfig& config, const Registry& registry,
                        const ProgressFn& progress = {});

// Aggregate recomputed from an entry's iteration records; run_matrix's own
// aggregates satisfy this identity by construction.
AggregateResult aggregate_records(const std::vector<IterationRecord>& records,
                                  const SuiteDescriptor& suite, int client_count);

} // namespace pqcbench

#endif
