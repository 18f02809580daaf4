#include "pqcbench/report.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "pqcbench/metrics.hpp"

namespace pqcbench {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kMetrics[] = {"max_cpu_pct", "latency_ms", "bandwidth_kbs",
                                    "retx_rate_pct"};

double metric_value(const AggregateResult& agg, std::string_view metric) {
    if (metric == "max_cpu_pct") return agg.max_cpu_pct;
    if (metric == "latency_ms") return agg.mean_latency_ms;
    if (metric == "bandwidth_kbs") return agg.mean_bandwidth_kbs;
    if (metric == "retx_rate_pct") return agg.retx_rate_pct;
    throw ReportError("unknown metric `" + std::string(metric) + "`");
}

// Shortest decimal form that parses back to the same double.
std::string shortest(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string shortest(int64_t value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ReportError("cannot open `" + path + "` for writing");
    out << content;
    out.flush();
    if (!out) throw ReportError("write to `" + path + "` failed");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_double_field(const std::string& field, const std::string& path, int line_no) {
    double v = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ReportError(path + ":" + std::to_string(line_no) + ": bad number `" + field + "`");
    }
    return v;
}

int64_t parse_int_field(const std::string& field, const std::string& path, int line_no) {
    int64_t v = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ReportError(path + ":" + std::to_string(line_no) + ": bad integer `" + field + "`");
    }
    return v;
}

// Formatted metric cells shared by the per-signature tables and the
// scalability table: CPU 2 decimals, latency whole ms, bandwidth 2
// decimals, retransmission rate 4 decimals.
std::string metric_cells(const AggregateResult& agg) {
    return format_fixed(agg.max_cpu_pct, 2) + "," + format_fixed(agg.mean_latency_ms, 0) + "," +
           format_fixed(agg.mean_bandwidth_kbs, 2) + "," + format_fixed(agg.retx_rate_pct, 4);
}

} // namespace

void emit_tables(const std::vector<AggregateResult>& aggregates, const Registry& registry,
                 const std::string& out_dir) {
    if (aggregates.empty()) throw ReportError("no aggregates to emit");

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ReportError("cannot create `" + out_dir + "`: " + ec.message());

    int base_cc = aggregates.front().client_count;
    std::set<int> client_counts;
    for (const auto& agg : aggregates) {
        base_cc = std::min(base_cc, agg.client_count);
        client_counts.insert(agg.client_count);
    }

    std::map<std::pair<std::string, int>, const AggregateResult*> by_key;
    for (const auto& agg : aggregates) by_key[{agg.suite_id, agg.client_count}] = &agg;

    for (const auto& sig : registry.sigs()) {
        std::string body = "suite,max_cpu_pct,latency_ms,bandwidth_kbs,retx_rate_pct\n";
        int rows = 0;
        for (const auto& kem : registry.kems()) {
            auto it = by_key.find({kem.name + "_" + sig.name, base_cc});
            if (it == by_key.end()) continue;
            body += it->second->label + "," + metric_cells(*it->second) + "\n";
            ++rows;
        }
        if (rows == 0) continue;
        write_file(out_dir + "/table_" + sig.name + ".csv", body);
    }

    // Packet summary: every suite's segment totals and resulting rate.
    std::string packets = "suite,segments_sent,segments_retransmitted,retx_rate_pct\n";
    for (const auto& suite : registry.suites()) {
        auto it = by_key.find({suite.id, base_cc});
        if (it == by_key.end()) continue;
        const AggregateResult& agg = *it->second;
        packets += agg.label + "," + shortest(agg.segments_sent) + "," +
                   shortest(agg.segments_retransmitted) + "," +
                   format_fixed(agg.retx_rate_pct, 4) + "\n";
    }
    write_file(out_dir + "/packets.csv", packets);

    if (client_counts.size() > 1) {
        std::string body = "suite,client_count,max_cpu_pct,latency_ms,bandwidth_kbs,retx_rate_pct\n";
        for (const auto& suite : registry.suites()) {
            for (int cc : client_counts) {
                auto it = by_key.find({suite.id, cc});
                if (it == by_key.end()) continue;
                body += it->second->label + "," + shortest(static_cast<int64_t>(cc)) + "," +
                        metric_cells(*it->second) + "\n";
            }
        }
        write_file(out_dir + "/scalability.csv", body);
    }
}

namespace {

constexpr const char* kAggregatesHeader =
    "suite_id,label,kem,sig,client_count,iterations,sessions,failed_sessions,max_cpu_pct,"
    "mean_latency_ms,mean_bandwidth_kbs,retx_rate_pct,segments_sent,segments_retransmitted";

} // namespace

void write_aggregates_csv(const std::vector<AggregateResult>& aggregates,
                          const std::string& path) {
    std::string body = std::string(kAggregatesHeader) + "\n";
    for (const auto& a : aggregates) {
        body += a.suite_id + "," + a.label + "," + a.kem + "," + a.sig + "," +
                shortest(static_cast<int64_t>(a.client_count)) + "," +
                shortest(static_cast<int64_t>(a.iterations)) + "," +
                shortest(static_cast<int64_t>(a.sessions)) + "," +
                shortest(static_cast<int64_t>(a.failed_sessions)) + "," + shortest(a.max_cpu_pct) +
                "," + shortest(a.mean_latency_ms) + "," + shortest(a.mean_bandwidth_kbs) + "," +
                shortest(a.retx_rate_pct) + "," + shortest(a.segments_sent) + "," +
                shortest(a.segments_retransmitted) + "\n";
    }
    write_file(path, body);
}

std::vector<AggregateResult> parse_aggregates_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReportError("cannot open `" + path + "`");
    std::string line;
    if (!std::getline(in, line)) throw ReportError(path + ": empty file");
    if (line != kAggregatesHeader) throw ReportError(path + ": unexpected header");

    std::vector<AggregateResult> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 14) {
            throw ReportError(path + ":" + std::to_string(line_no) + ": expected 14 fields, got " +
                              std::to_string(f.size()));
        }
        AggregateResult a;
        a.suite_id = f[0];
        a.label = f[1];
        a.kem = f[2];
        a.sig = f[3];
        a.client_count = static_cast<int>(parse_int_field(f[4], path, line_no));
        a.iterations = static_cast<int>(parse_int_field(f[5], path, line_no));
        a.sessions = static_cast<int>(parse_int_field(f[6], path, line_no));
        a.failed_sessions = static_cast<int>(parse_int_field(f[7], path, line_no));
        a.max_cpu_pct = parse_double_field(f[8], path, line_no);
        a.mean_latency_ms = parse_double_field(f[9], path, line_no);
        a.mean_bandwidth_kbs = parse_double_field(f[10], path, line_no);
        a.retx_rate_pct = parse_double_field(f[11], path, line_no);
        a.segments_sent = parse_int_field(f[12], path, line_no);
        a.segments_retransmitted = parse_int_field(f[13], path, line_no);
        out.push_back(std::move(a));
    }
    return out;
}

void write_runs_jsonl(const std::vector<IterationRecord>& records, const std::string& path) {
    std::string body;
    for (const auto& rec : records) {
        ordered_json j;
        j["suite"] = rec.suite_id;
        j["client_count"] = rec.client_count;
        j["iteration"] = rec.iteration;
        j["seed"] = rec.seed;
        j["sessions"] = rec.sessions;
        j["failed_sessions"] = rec.failed_sessions;
        j["max_cpu_pct"] = rec.max_cpu_pct;
        j["mean_latency_ms"] = rec.mean_latency_ms;
        j["mean_bandwidth_kbs"] = rec.mean_bandwidth_kbs;
        j["retx_rate_pct"] = rec.retx_rate_pct;
        j["segments_sent"] = rec.segments_sent;
        j["segments_retransmitted"] = rec.segments_retransmitted;
        j["bytes_tx"] = rec.bytes_tx;
        j["bytes_rx"] = rec.bytes_rx;
        body += j.dump();
        body += "\n";
    }
    write_file(path, body);
}

HeatmapMatrix build_heatmap(const std::vector<AggregateResult>& aggregates,
                            const Registry& registry, std::string_view fixed_algorithm,
                            int client_count) {
    HeatmapMatrix matrix;
    matrix.client_count = client_count;

    std::vector<std::string> suite_ids;
    if (const SigDescriptor* sig = registry.find_sig(fixed_algorithm)) {
        matrix.fixed = sig->name;
        matrix.axis = "kem";
        for (const auto& kem : registry.kems()) {
            matrix.rows.push_back(kem.name);
            suite_ids.push_back(kem.name + "_" + sig->name);
        }
    } else if (const KemDescriptor* kem = registry.find_kem(fixed_algorithm)) {
        matrix.fixed = kem->name;
        matrix.axis = "signature";
        for (const auto& s : registry.sigs()) {
            matrix.rows.push_back(s.name);
            suite_ids.push_back(kem->name + "_" + s.name);
        }
    } else {
        throw ReportError("unknown algorithm `" + std::string(fixed_algorithm) + "`");
    }

    std::map<std::string, const AggregateResult*> by_id;
    for (const auto& agg : aggregates) {
        if (agg.client_count == client_count) by_id[agg.suite_id] = &agg;
    }

    std::vector<std::string> rows;
    std::vector<const AggregateResult*> present;
    for (size_t i = 0; i < suite_ids.size(); ++i) {
        auto it = by_id.find(suite_ids[i]);
        if (it == by_id.end()) continue;
        rows.push_back(matrix.rows[i]);
        present.push_back(it->second);
    }
    if (present.size() < 2) {
        throw EmptyAxisError("fewer than two rows for `" + matrix.fixed + "` at client count " +
                             std::to_string(client_count));
    }
    matrix.rows = std::move(rows);

    for (const char* metric : kMetrics) {
        HeatmapColumn col;
        col.metric = metric;
        for (const AggregateResult* agg : present) col.values.push_back(metric_value(*agg, metric));
        col.normalized = minmax_normalize(col.values);
        auto [lo, hi] = std::minmax_element(col.values.begin(), col.values.end());
        col.constant = (*lo == *hi);
        matrix.columns.push_back(std::move(col));
    }
    return matrix;
}

std::string heatmap_json(const HeatmapMatrix& matrix) {
    ordered_json j;
    j["fixed"] = matrix.fixed;
    j["axis"] = matrix.axis;
    j["client_count"] = matrix.client_count;
    j["rows"] = matrix.rows;
    j["columns"] = ordered_json::array();
    for (const auto& col : matrix.columns) {
        ordered_json c;
        c["metric"] = col.metric;
        c["values"] = col.values;
        c["normalized"] = col.normalized;
        c["constant"] = col.constant;
        j["columns"].push_back(std::move(c));
    }
    return j.dump(2) + "\n";
}

std::string heatmap_svg(const HeatmapMatrix& matrix) {
    const int cell_w = 110, cell_h = 34, label_w = 150, header_h = 30;
    const int cols = static_cast<int>(matrix.columns.size());
    const int rows = static_cast<int>(matrix.rows.size());
    const int width = label_w + cols * cell_w + 10;
    const int height = header_h + rows * cell_h + 10;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" font-family=\"monospace\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"4\" y=\"20\" font-weight=\"bold\">" + matrix.fixed + "</text>\n";
    for (int c = 0; c < cols; ++c) {
        svg += "<text x=\"" + std::to_string(label_w + c * cell_w + 4) +
               "\" y=\"20\">" + matrix.columns[c].metric + "</text>\n";
    }
    for (int r = 0; r < rows; ++r) {
        int y = header_h + r * cell_h;
        svg += "<text x=\"4\" y=\"" + std::to_string(y + 22) + "\">" + matrix.rows[r] +
               "</text>\n";
        for (int c = 0; c < cols; ++c) {
            double v = matrix.columns[c].normalized[r];
            // White at 0 to deep red at 1.
            int red = 255 - static_cast<int>(90 * v);
            int other = 255 - static_cast<int>(231 * v);
            std::string fill = "rgb(" + std::to_string(red) + "," + std::to_string(other) + "," +
                               std::to_string(other) + ")";
            int x = label_w + c * cell_w;
            svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
                   std::to_string(cell_w - 2) + "\" height=\"" + std::to_string(cell_h - 2) +
                   "\" fill=\"" + fill + "\" stroke=\"#999\"/>\n";
            svg += "<text x=\"" + std::to_string(x + 6) + "\" y=\"" + std::to_string(y + 22) +
                   "\">" + format_fixed(v, 2) + "</text>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

namespace {

void validate_agg_name(const std::string& agg, const std::string& rule_name) {
    if (agg != "min" && agg != "max") {
        throw ReportError("rule `" + rule_name + "`: aggregation must be min or max, got `" + agg +
                          "`");
    }
}

OrdinalRule rule_from_json(const ordered_json& j, const std::string& origin) {
    OrdinalRule rule;
    if (!j.is_object()) throw ReportError(origin + ": each rule must be an object");
    rule.name = j.value("name", "");
    if (rule.name.empty()) throw ReportError(origin + ": rule without a name");
    if (!j.contains("metric") || !j.contains("greater") || !j.contains("less")) {
        throw ReportError(origin + ": rule `" + rule.name +
                          "` needs metric, greater and less fields");
    }
    rule.metric = j["metric"].get<std::string>();
    rule.greater = j["greater"].get<std::vector<std::string>>();
    rule.less = j["less"].get<std::vector<std::string>>();
    rule.greater_agg = j.value("greater_agg", "min");
    rule.less_agg = j.value("less_agg", "max");
    validate_agg_name(rule.greater_agg, rule.name);
    validate_agg_name(rule.less_agg, rule.name);
    if (rule.greater.empty() || rule.less.empty()) {
        throw ReportError(origin + ": rule `" + rule.name + "` has an empty side");
    }
    return rule;
}

} // namespace

Ruleset Ruleset::from_json_text(std::string_view text, const std::string& origin) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
        throw ReportError(origin + ": " + err.what());
    }
    if (!j.is_object() || !j.contains("rules") || !j["rules"].is_array()) {
        throw ReportError(origin + ": expected an object with a `rules` array");
    }
    Ruleset rs;
    for (const auto& rule_json : j["rules"]) rs.rules.push_back(rule_from_json(rule_json, origin));
    return rs;
}

Ruleset Ruleset::from_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReportError("cannot open `" + path + "`");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str(), path);
}

std::string Ruleset::to_json() const {
    ordered_json j;
    j["rules"] = ordered_json::array();
    for (const auto& rule : rules) {
        ordered_json r;
        r["name"] = rule.name;
        r["metric"] = rule.metric;
        r["greater"] = rule.greater;
        r["less"] = rule.less;
        r["greater_agg"] = rule.greater_agg;
        r["less_agg"] = rule.less_agg;
        j["rules"].push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

Ruleset Ruleset::default_rules(const Registry& registry) {
    Ruleset rs;
    std::vector<KemDescriptor> kems = registry.kems();
    std::vector<SigDescriptor> sigs = registry.sigs();

    auto is_sphincs = [](const std::string& name) { return name.rfind("sphincs", 0) == 0; };

    // Inside each signature family the biggest code-based KEM tops latency.
    // The same holds for bandwidth only in the falcon families: with the
    // larger signatures the session span grows as fast as the byte count, so
    // hqc256 stops being the bandwidth peak there.
    for (const auto& sig : sigs) {
        std::vector<const char*> metrics = {"latency_ms"};
        if (sig.name == "falcon512" || sig.name == "falcon1024") {
            metrics.push_back("bandwidth_kbs");
        }
        for (const char* metric : metrics) {
            OrdinalRule rule;
            rule.name = std::string(metric) + ":hqc256-top:" + sig.name;
            rule.metric = metric;
            rule.greater = {"hqc256_" + sig.name};
            for (const auto& kem : kems) {
                if (kem.name != "hqc256") rule.less.push_back(kem.name + "_" + sig.name);
            }
            rs.rules.push_back(std::move(rule));
        }
    }

    for (const auto& kem : kems) {
        // mldsa44 is the cheapest signature on the server at every KEM.
        OrdinalRule cpu;
        cpu.name = "max_cpu_pct:mldsa44-bottom:" + kem.name;
        cpu.metric = "max_cpu_pct";
        for (const auto& sig : sigs) {
            if (sig.name != "mldsa44") cpu.greater.push_back(kem.name + "_" + sig.name);
        }
        cpu.less = {kem.name + "_mldsa44"};
        rs.rules.push_back(std::move(cpu));

        // The bandwidth column peaks at a sphincs variant for every KEM.
        OrdinalRule bw;
        bw.name = "bandwidth_kbs:sphincs-top:" + kem.name;
        bw.metric = "bandwidth_kbs";
        bw.greater_agg = "max";
        for (const auto& sig : sigs) {
            (is_sphincs(sig.name) ? bw.greater : bw.less).push_back(kem.name + "_" + sig.name);
        }
        rs.rules.push_back(std::move(bw));
    }
    return rs;
}

AssertReport assert_orderings(const std::vector<AggregateResult>& aggregates,
                              const Ruleset& ruleset) {
    std::map<std::pair<std::string, int>, const AggregateResult*> by_key;
    std::set<std::string> known;
    std::set<int> all_ccs;
    for (const auto& agg : aggregates) {
        by_key[{agg.suite_id, agg.client_count}] = &agg;
        known.insert(agg.suite_id);
        all_ccs.insert(agg.client_count);
    }

    AssertReport report;
    for (const auto& rule : ruleset.rules) {
        for (const auto& side : {rule.greater, rule.less}) {
            for (const auto& id : side) {
                if (!known.count(id)) {
                    throw UnknownSuiteInRuleError("rule `" + rule.name +
                                                  "` references unknown suite `" + id + "`");
                }
            }
        }

        std::vector<int> ccs;
        for (int cc : all_ccs) {
            bool complete = true;
            for (const auto& side : {rule.greater, rule.less}) {
                for (const auto& id : side) {
                    if (!by_key.count({id, cc})) complete = false;
                }
            }
            if (complete) ccs.push_back(cc);
        }

        if (ccs.empty()) {
            report.passed = false;
            report.outcomes.push_back(
                {rule.name, false, "no client count has every referenced suite"});
            continue;
        }

        for (int cc : ccs) {
            auto reduce = [&](const std::vector<std::string>& ids, const std::string& agg,
                              std::string& which) {
                double best = 0;
                bool first = true;
                for (const auto& id : ids) {
                    double v = metric_value(*by_key.at({id, cc}), rule.metric);
                    bool take = first || (agg == "min" ? v < best : v > best);
                    if (take) {
                        best = v;
                        which = id;
                    }
                    first = false;
                }
                return best;
            };
            std::string g_suite, l_suite;
            double g = reduce(rule.greater, rule.greater_agg, g_suite);
            double l = reduce(rule.less, rule.less_agg, l_suite);

            RuleOutcome outcome;
            outcome.name = ccs.size() > 1 || all_ccs.size() > 1
                               ? rule.name + "@" + std::to_string(cc)
                               : rule.name;
            outcome.passed = g > l;
            if (!outcome.passed) {
                outcome.detail = rule.greater_agg + "(" + g_suite + ")=" + shortest(g) +
                                 " !> " + rule.less_agg + "(" + l_suite + ")=" + shortest(l) +
                                 " [" + rule.metric + ", clients=" + std::to_string(cc) + "]";
                report.passed = false;
            }
            report.outcomes.push_back(std::move(outcome));
        }
    }
    return report;
}

std::string latex_rows(const std::vector<AggregateResult>& aggregates, const Registry& registry) {
    if (aggregates.empty()) throw ReportError("no aggregates to render");
    int base_cc = aggregates.front().client_count;
    std::map<std::pair<std::string, int>, const AggregateResult*> by_key;
    for (const auto& agg : aggregates) {
        base_cc = std::min(base_cc, agg.client_count);
        by_key[{agg.suite_id, agg.client_count}] = &agg;
    }

    auto escape = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '_') out += "\\_";
            else out += c;
        }
        return out;
    };

    std::string body;
    for (const auto& sig : registry.sigs()) {
        std::string block;
        for (const auto& kem : registry.kems()) {
            auto it = by_key.find({kem.name + "_" + sig.name, base_cc});
            if (it == by_key.end()) continue;
            const AggregateResult& a = *it->second;
            block += escape(a.label) + " & " + format_fixed(a.max_cpu_pct, 2) + " & " +
                     format_fixed(a.mean_latency_ms, 0) + " & " +
                     format_fixed(a.mean_bandwidth_kbs, 2) + " & " +
                     format_fixed(a.retx_rate_pct, 4) + " \\\\\n";
        }
        if (block.empty()) continue;
        body += "% " + sig.name + "\n" + block;
    }
    return body;
}

} // namespace pqcbench
