#ifndef PQCBENCH_REPORT_HPP
#define PQCBENCH_REPORT_HPP

// Emitters for the benchmark artifacts: per-signature CSV tables, the packet
// summary, the scalability table, a full-precision aggregate dump with a
// parser (for round-tripping), per-iteration JSON lines, normalized heatmap
// matrices (JSON, optional SVG), LaTeX rows, and the ordinal-assertion
// engine with its default ruleset.
//
// Everything here is deterministic and locale-independent: numbers go
// through std::to_chars, column and row orders are fixed by the registry,
// and rerunning an emitter on identical input produces identical bytes.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqcbench/runner.hpp"
#include "pqcbench/suites.hpp"

namespace pqcbench {

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Heatmap requested over fewer than two counterpart rows.
class EmptyAxisError : public ReportError {
public:
    using ReportError::ReportError;
};

// A rule references a suite that the results do not contain.
class UnknownSuiteInRuleError : public ReportError {
public:
    using ReportError::ReportError;
};

// One CSV per signature family (table_<sig>.csv, KEM rows in registry order,
// display formats: CPU 2 decimals, latency whole ms, bandwidth 2 decimals,
// retransmission rate 4 decimals) plus packets.csv (per-suite segment and
// retransmission totals) at the smallest client count present, and
// scalability.csv when several client counts were run.
void emit_tables(const std::vector<AggregateResult>& aggregates, const Registry& registry,
                 const std::string& out_dir);

// Full-precision dump of every aggregate column; parse_aggregates_csv reads
// it back bit for bit (doubles are written in shortest round-trip form).
void write_aggregates_csv(const std::vector<AggregateResult>& aggregates,
                          const std::string& path);
std::vector<AggregateResult> parse_aggregates_csv(const std::string& path);

// One JSON object per iteration record, in run order.
void write_runs_jsonl(const std::vector<IterationRecord>& records, const std::string& path);

struct HeatmapColumn {
    std::string metric;
    std::vector<double> values;     // raw, row order
    std::vector<double> normalized; // minmax_normalize(values)
    bool constant = false;          // all raw values equal; normalized all 0
};

struct HeatmapMatrix {
    std::string fixed;  // algorithm held constant
    std::string axis;   // what the rows enumerate: "kem" or "signature"
    int client_count = 1;
    std::vector<std::string> rows;      // counterpart algorithm names
    std::vector<HeatmapColumn> columns; // cpu, latency, bandwidth, retx
};

// Fix one algorithm (KEM or signature), normalize each metric over the
// counterpart axis. Rows follow registry order; suites missing from the
// results are skipped; fewer than two rows is an EmptyAxisError.
HeatmapMatrix build_heatmap(const std::vector<AggregateResult>& aggregates,
                            const Registry& registry, std::string_view fixed_algorithm,
                            int client_count);

std::string heatmap_json(const HeatmapMatrix& matrix);

// Self-contained grid rendering; the matrices are the contract, this is the
// convenience picture behind the --svg flag.
std::string heatmap_svg(const HeatmapMatrix& matrix);

// One ordinal claim about aggregate metrics: agg(greater) > agg(less),
// where each side is reduced with min or max over its suites' values.
// The defaults (min on the left, max on the right) make the strongest claim:
// every left suite exceeds every right suite.
struct OrdinalRule {
    std::string name;
    std::string metric; // max_cpu_pct | latency_ms | bandwidth_kbs | retx_rate_pct
    std::vector<std::string> greater;
    std::vector<std::string> less;
    std::string greater_agg = "min";
    std::string less_agg = "max";
};

struct Ruleset {
    std::vector<OrdinalRule> rules;

    static Ruleset from_json_file(const std::string& path);
    static Ruleset from_json_text(std::string_view text, const std::string& origin = "<inline>");

    // The orderings the source tables support: hqc256 maximal latency and
    // bandwidth inside every signature family, mldsa44 minimal CPU at every
    // KEM, and a sphincs variant on top of bandwidth at every KEM.
    static Ruleset default_rules(const Registry& registry);

    std::string to_json() const;
};

struct RuleOutcome {
    std::string name;
    bool passed = false;
    std::string detail; // boundary suites and values, filled on failure
};

struct AssertReport {
    bool passed = true;
    std::vector<RuleOutcome> outcomes;
};

// Evaluates every rule at every client count where all referenced suites
// are present. Unknown suites raise UnknownSuiteInRuleError; an empty
// ruleset passes vacuously.
AssertReport assert_orderings(const std::vector<AggregateResult>& aggregates,
                              const Ruleset& ruleset);

// Table rows in LaTeX form for side-by-side comparison with the source
// tables; one block per signature family.
std::string latex_rows(const std::vector<AggregateResult>& aggregates,
                       const Registry& registry);

} // namespace pqcbench

#endif
