#include "pqcbench/runner.hpp"

#include <algorithm>

#include "pqcbench/prf.hpp"

namespace pqcbench {

ScenarioConfig ScenarioConfig::from_config(const KeyValueFile& kv) {
    ScenarioConfig cfg;
    cfg.seed = static_cast<uint64_t>(kv.get_int("run.seed", static_cast<int64_t>(cfg.seed)));
    cfg.iterations = static_cast<int>(kv.get_int("run.iterations", cfg.iterations));
    if (cfg.iterations < 1) throw RunnerError("run.iterations must be >= 1");

    std::vector<std::string> counts = kv.get_list("run.client_counts");
    if (!counts.empty()) {
        cfg.client_counts.clear();
        for (const auto& c : counts) {
            size_t pos = 0;
            int v = std::stoi(c, &pos);
            if (pos != c.size() || v < 1) {
                throw RunnerError("run.client_counts: bad entry `" + c + "`");
            }
            cfg.client_counts.push_back(v);
        }
    }
    cfg.suite_ids = kv.get_list("run.suites");

    cfg.session.path = NetworkPath::from_config(kv);
    cfg.session.transport = ReliableTransportConfig::from_config(kv);
    cfg.session.framing = FramingConfig::from_config(kv);
    cfg.session.app_payload_bytes =
        kv.get_int("run.app_payload_bytes", cfg.session.app_payload_bytes);
    if (cfg.session.app_payload_bytes < 0) throw RunnerError("run.app_payload_bytes must be >= 0");
    cfg.session.record_payload_bytes = static_cast<int>(
        kv.get_int("run.record_payload_bytes", cfg.session.record_payload_bytes));
    if (cfg.session.record_payload_bytes < 1) {
        throw RunnerError("run.record_payload_bytes must be >= 1");
    }
    cfg.session.aead_cost_per_byte_us =
        kv.get_double("run.aead_cost_per_byte_us", cfg.session.aead_cost_per_byte_us);
    cfg.session.server_service_units = static_cast<int>(
        kv.get_int("run.server_service_units", cfg.session.server_service_units));
    cfg.cpu = CpuModel::from_config(kv);
    return cfg;
}

Registry registry_from_config(const KeyValueFile& kv) {
    std::string profile_path = kv.get("costs.profile", "");
    if (profile_path.empty()) return Registry::builtin();
    return Registry::builtin().with_profile(CostProfile::load(profile_path));
}

uint64_t mix_seed(uint64_t base, std::string_view suite_id, int client_count, int iteration) {
    uint64_t h = splitmix64(base ^ fnv1a64(suite_id));
    h = splitmix64(h ^ static_cast<uint64_t>(client_count));
    h = splitmix64(h ^ static_cast<uint64_t>(iteration));
    return h;
}

namespace {

IterationRecord record_iteration(const ScenarioConfig& config, const SuiteDescriptor& suite,
                                 int client_count, int iteration) {
    IterationRecord rec;
    rec.suite_id = suite.id;
    rec.client_count = client_count;
    rec.iteration = iteration;
    rec.seed = mix_seed(config.seed, suite.id, client_count, iteration);

    SessionScenario scenario = config.session;
    scenario.suite = suite;
    CellResult cell = simulate_cell(scenario, client_count, rec.seed);

    rec.sessions = static_cast<int>(cell.sessions.size());
    rec.max_cpu_pct = max_cpu_pct(cell.server_busy, config.cpu);

    double latency_sum = 0, bandwidth_sum = 0;
    int completed = 0;
    for (const auto& session : cell.sessions) {
        rec.segments_sent += session.trace.totals.segments_sent;
        rec.segments_retransmitted += session.trace.totals.segments_retransmitted;
        rec.bytes_tx += session.trace.totals.bytes_tx;
        rec.bytes_rx += session.trace.totals.bytes_rx;
        if (session.failed) {
            rec.failed_sessions += 1;
            continue;
        }
        latency_sum += handshake_latency_ms(session.trace);
        bandwidth_sum += bandwidth_kbs(session.trace);
        completed += 1;
    }
    if (completed > 0) {
        rec.mean_latency_ms = latency_sum / completed;
        rec.mean_bandwidth_kbs = bandwidth_sum / completed;
    }
    if (rec.segments_sent > 0) {
        rec.retx_rate_pct = 100.0 * static_cast<double>(rec.segments_retransmitted) /
                            static_cast<double>(rec.segments_sent);
    }
    return rec;
}

} // namespace

AggregateResult aggregate_records(const std::vector<IterationRecord>& records,
                                  const SuiteDescriptor& suite, int client_count) {
    AggregateResult agg;
    agg.suite_id = suite.id;
    agg.label = suite.label;
    agg.kem = suite.kem.name;
    agg.sig = suite.sig.name;
    agg.client_count = client_count;

    double latency_sum = 0, bandwidth_sum = 0;
    int iters_with_sessions = 0;
    for (const auto& rec : records) {
        if (rec.suite_id != suite.id || rec.client_count != client_count) continue;
        agg.iterations += 1;
        agg.sessions += rec.sessions;
        agg.failed_sessions += rec.failed_sessions;
        agg.max_cpu_pct = std::max(agg.max_cpu_pct, rec.max_cpu_pct);
        agg.segments_sent += rec.segments_sent;
        agg.segments_retransmitted += rec.segments_retransmitted;
        if (rec.sessions > rec.failed_sessions) {
            latency_sum += rec.mean_latency_ms;
            bandwidth_sum += rec.mean_bandwidth_kbs;
            iters_with_sessions += 1;
        }
    }
    if (agg.iterations == 0) throw RunnerError("no records for " + suite.id);
    if (iters_with_sessions > 0) {
        agg.mean_latency_ms = latency_sum / iters_with_sessions;
        agg.mean_bandwidth_kbs = bandwidth_sum / iters_with_sessions;
    }
    if (agg.segments_sent > 0) {
        agg.retx_rate_pct = 100.0 * static_cast<double>(agg.segments_retransmitted) /
                            static_cast<double>(agg.segments_sent);
    }
    return agg;
}

MatrixResult run_entry(const ScenarioConfig& config, const SuiteDescriptor& suite,
                       int client_count) {
    MatrixResult out;
    out.records.reserve(static_cast<size_t>(config.iterations));
    for (int iter = 0; iter < config.iterations; ++iter) {
        out.records.push_back(record_iteration(config, suite, client_count, iter));
    }
    out.aggregates.push_back(aggregate_records(out.records, suite, client_count));
    return out;
}

MatrixResult run_matrix(const ScenarioConfig& config, const Registry& registry,
                        const ProgressFn& progress) {
    std::vector<SuiteDescriptor> suites;
    if (config.suite_ids.empty()) {
        suites = registry.suites();
    } else {
        suites.reserve(config.suite_ids.size());
        for (const auto& id : config.suite_ids) suites.push_back(registry.find_suite(id));
    }

    MatrixResult out;
    for (const auto& suite : suites) {
        for (int clients : config.client_counts) {
            MatrixResult entry = run_entry(config, suite, clients);
            for (auto& rec : entry.records) out.records.push_back(std::move(rec));
            if (progress) progress(entry.aggregates.front());
            out.aggregates.push_back(std::move(entry.aggregates.front()));
        }
    }
    std::sort(out.aggregates.begin(), out.aggregates.end(),
              [](const AggregateResult& a, const AggregateResult& b) {
                  if (a.suite_id != b.suite_id) return a.suite_id < b.suite_id;
                  return a.client_count < b.client_count;
              });
    return out;
}

} // namespace pqcbench
