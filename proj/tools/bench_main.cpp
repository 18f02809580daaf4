// bench: run the handshake benchmark matrix and work with its artifacts.
//
//   bench run      --config scenario.cfg [--suites a,b] [--iterations N]
//                  [--clients 1,10,20] [--seed N] [--out dir] [--quiet]
//   bench heatmap  --fix <algorithm> [--in dir] [--clients N] [--svg]
//   bench assert   [--rules rules.json] [--in dir]
//   bench latex    [--in dir]
//   bench list-suites [--config scenario.cfg]
//
// When --config is omitted, the BENCH_CONFIG environment variable names the
// scenario file; without either, built-in defaults run the full matrix.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pqcbench/config.hpp"
#include "pqcbench/report.hpp"
#include "pqcbench/runner.hpp"
#include "pqcbench/suites.hpp"

namespace {

using namespace pqcbench;

struct LoadedScenario {
    ScenarioConfig config;
    Registry registry = Registry::builtin();
};

LoadedScenario load_scenario(const std::string& config_path) {
    std::string path = config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("BENCH_CONFIG")) path = env;
    }
    LoadedScenario out;
    if (path.empty()) return out;
    KeyValueFile kv = KeyValueFile::parse_file(path);
    out.config = ScenarioConfig::from_config(kv);
    out.registry = registry_from_config(kv);
    return out;
}

std::vector<int> parse_clients(const std::string& text) {
    std::vector<int> out;
    std::string field;
    std::stringstream ss(text);
    while (std::getline(ss, field, ',')) {
        if (field.empty()) continue;
        size_t pos = 0;
        int v = std::stoi(field, &pos);
        if (pos != field.size() || v <= 0) {
            throw CLI::ValidationError("--clients", "not a positive integer: `" + field + "`");
        }
        out.push_back(v);
    }
    if (out.empty()) throw CLI::ValidationError("--clients", "empty list");
    return out;
}

std::vector<std::string> parse_suite_list(const std::string& text) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(text);
    while (std::getline(ss, field, ',')) {
        if (!field.empty()) out.push_back(field);
    }
    return out;
}

int smallest_client_count(const std::vector<AggregateResult>& aggregates) {
    int cc = aggregates.front().client_count;
    for (const auto& agg : aggregates) cc = std::min(cc, agg.client_count);
    return cc;
}

// Heatmap JSON for every algorithm with at least two counterpart rows, at
// the smallest client count in the results.
void emit_all_heatmaps(const std::vector<AggregateResult>& aggregates, const Registry& registry,
                       const std::string& out_dir) {
    int cc = smallest_client_count(aggregates);
    std::vector<std::string> algorithms;
    for (const auto& sig : registry.sigs()) algorithms.push_back(sig.name);
    for (const auto& kem : registry.kems()) algorithms.push_back(kem.name);
    for (const auto& alg : algorithms) {
        try {
            HeatmapMatrix matrix = build_heatmap(aggregates, registry, alg, cc);
            std::ofstream out(out_dir + "/heatmap_" + alg + ".json", std::ios::binary);
            out << heatmap_json(matrix);
        } catch (const EmptyAxisError&) {
            // Not enough of this algorithm's suites were run; nothing to draw.
        }
    }
}

int cmd_run(const std::string& config_path, const std::string& suites_csv, int iterations,
            const std::string& clients_csv, std::optional<uint64_t> seed, const std::string& out_dir,
            bool quiet) {
    LoadedScenario scenario = load_scenario(config_path);
    ScenarioConfig& cfg = scenario.config;
    if (!suites_csv.empty()) cfg.suite_ids = parse_suite_list(suites_csv);
    if (iterations > 0) cfg.iterations = iterations;
    if (!clients_csv.empty()) cfg.client_counts = parse_clients(clients_csv);
    if (seed) cfg.seed = *seed;

    ProgressFn progress;
    if (!quiet) {
        progress = [](const AggregateResult& agg) {
            std::cerr << agg.suite_id << " clients=" << agg.client_count << " cpu=" << std::fixed
                      << agg.max_cpu_pct << " latency=" << agg.mean_latency_ms
                      << " bandwidth=" << agg.mean_bandwidth_kbs << " retx=" << agg.retx_rate_pct
                      << "\n";
            std::cerr.unsetf(std::ios::floatfield);
        };
    }

    MatrixResult result = run_matrix(cfg, scenario.registry, progress);
    if (result.aggregates.empty()) {
        std::cerr << "error: no matrix entries ran\n";
        return 1;
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create `" << out_dir << "`: " << ec.message() << "\n";
        return 1;
    }
    write_runs_jsonl(result.records, out_dir + "/runs.jsonl");
    write_aggregates_csv(result.aggregates, out_dir + "/aggregates.csv");
    emit_tables(result.aggregates, scenario.registry, out_dir);
    emit_all_heatmaps(result.aggregates, scenario.registry, out_dir);

    int aborted = 0;
    for (const auto& agg : result.aggregates) {
        if (agg.sessions > 0 && agg.failed_sessions == agg.sessions) ++aborted;
    }
    if (aborted > 0) {
        std::cerr << "error: " << aborted << " matrix entr" << (aborted == 1 ? "y" : "ies")
                  << " completed no session\n";
        return 1;
    }
    if (!quiet) std::cerr << "wrote " << out_dir << "/runs.jsonl and tables\n";
    return 0;
}

int cmd_heatmap(const std::string& fixed, const std::string& in_dir, int client_count, bool svg,
                const std::string& config_path) {
    LoadedScenario scenario = load_scenario(config_path);
    std::vector<AggregateResult> aggregates = parse_aggregates_csv(in_dir + "/aggregates.csv");
    if (aggregates.empty()) {
        std::cerr << "error: no aggregates in `" << in_dir << "/aggregates.csv`\n";
        return 2;
    }
    int cc = client_count > 0 ? client_count : smallest_client_count(aggregates);
    HeatmapMatrix matrix = build_heatmap(aggregates, scenario.registry, fixed, cc);

    std::string json_path = in_dir + "/heatmap_" + matrix.fixed + ".json";
    std::ofstream out(json_path, std::ios::binary);
    out << heatmap_json(matrix);
    std::cout << heatmap_json(matrix);
    if (svg) {
        std::string svg_path = in_dir + "/heatmap_" + matrix.fixed + ".svg";
        std::ofstream sout(svg_path, std::ios::binary);
        sout << heatmap_svg(matrix);
        std::cerr << "wrote " << json_path << " and " << svg_path << "\n";
    } else {
        std::cerr << "wrote " << json_path << "\n";
    }
    return 0;
}

int cmd_assert(const std::string& rules_path, const std::string& in_dir,
               const std::string& config_path) {
    LoadedScenario scenario = load_scenario(config_path);
    std::vector<AggregateResult> aggregates = parse_aggregates_csv(in_dir + "/aggregates.csv");
    Ruleset rules = rules_path.empty() ? Ruleset::default_rules(scenario.registry)
                                       : Ruleset::from_json_file(rules_path);
    AssertReport report = assert_orderings(aggregates, rules);
    int failed = 0;
    for (const auto& outcome : report.outcomes) {
        if (outcome.passed) {
            std::cout << "PASS " << outcome.name << "\n";
        } else {
            ++failed;
            std::cout << "FAIL " << outcome.name << ": " << outcome.detail << "\n";
        }
    }
    std::cout << (report.passed ? "ok" : "violated") << " (" << report.outcomes.size()
              << " checks, " << failed << " failed)\n";
    return report.passed ? 0 : 1;
}

int cmd_latex(const std::string& in_dir, const std::string& config_path) {
    LoadedScenario scenario = load_scenario(config_path);
    std::vector<AggregateResult> aggregates = parse_aggregates_csv(in_dir + "/aggregates.csv");
    std::cout << latex_rows(aggregates, scenario.registry);
    return 0;
}

int cmd_list_suites(const std::string& config_path) {
    LoadedScenario scenario = load_scenario(config_path);
    for (const auto& suite : scenario.registry.suites()) {
        std::cout << suite.id << "\t" << suite.label << "\tkem_pk=" << suite.kem.public_key_bytes
                  << "\tct=" << suite.kem.ciphertext_bytes << "\tsig_pk=" << suite.sig.public_key_bytes
                  << "\tsig=" << suite.sig.signature_bytes << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic PQC handshake benchmark over a simulated 5G-style path"};
    app.require_subcommand(1);

    std::string config_path, suites_csv, clients_csv, out_dir = "out", in_dir = "out";
    std::string fixed, rules_path;
    int iterations = 0, heatmap_clients = 0;
    std::optional<uint64_t> seed;
    bool quiet = false, svg = false;

    CLI::App* run = app.add_subcommand("run", "run the benchmark matrix and write artifacts");
    run->add_option("--config", config_path, "scenario config file (default: $BENCH_CONFIG)");
    run->add_option("--suites", suites_csv, "comma-separated suite ids (default: all 72)");
    run->add_option("--iterations", iterations, "iterations per matrix entry");
    run->add_option("--clients", clients_csv, "comma-separated client counts, e.g. 1,10,20");
    run->add_option("--seed", seed, "base seed");
    run->add_option("--out", out_dir, "output directory (default: out)");
    run->add_flag("--quiet", quiet, "suppress progress lines");

    CLI::App* heatmap = app.add_subcommand("heatmap", "normalized matrix for one fixed algorithm");
    heatmap->add_option("--fix", fixed, "algorithm to hold constant (KEM or signature)")
        ->required();
    heatmap->add_option("--in", in_dir, "directory with aggregates.csv (default: out)");
    heatmap->add_option("--clients", heatmap_clients, "client count (default: smallest present)");
    heatmap->add_flag("--svg", svg, "also render an SVG grid");
    heatmap->add_option("--config", config_path, "scenario config file (for the registry)");

    CLI::App* assert_cmd = app.add_subcommand("assert", "check ordinal rules against results");
    assert_cmd->add_option("--rules", rules_path, "rules JSON (default: built-in orderings)");
    assert_cmd->add_option("--in", in_dir, "directory with aggregates.csv (default: out)");
    assert_cmd->add_option("--config", config_path, "scenario config file (for the registry)");

    CLI::App* latex = app.add_subcommand("latex", "print table rows in LaTeX form");
    latex->add_option("--in", in_dir, "directory with aggregates.csv (default: out)");
    latex->add_option("--config", config_path, "scenario config file (for the registry)");

    CLI::App* list = app.add_subcommand("list-suites", "print every suite with its sizes");
    list->add_option("--config", config_path, "scenario config file (for the registry)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            return cmd_run(config_path, suites_csv, iterations, clients_csv, seed, out_dir, quiet);
        }
        if (*heatmap) return cmd_heatmap(fixed, in_dir, heatmap_clients, svg, config_path);
        if (*assert_cmd) return cmd_assert(rules_path, in_dir, config_path);
        if (*latex) return cmd_latex(in_dir, config_path);
        if (*list) return cmd_list_suites(config_path);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
