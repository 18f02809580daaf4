#include "pqcbench/metrics.hpp"

#include <algorithm>
#include <charconv>

namespace pqcbench {

CpuModel CpuModel::from_config(const KeyValueFile& kv) {
    CpuModel model;
    model.window_ms = kv.get_double("cpu.window_ms", model.window_ms);
    model.idle_floor_pct = kv.get_double("cpu.idle_floor_pct", model.idle_floor_pct);
    if (model.window_ms <= 0) throw MetricsError("cpu.window_ms must be > 0");
    return model;
}

double handshake_latency_ms(const SessionTrace& trace) {
    bool have_start = false, have_end = false;
    double start = 0, end = 0;
    for (const auto& ev : trace.events) {
        if (!have_start && ev.kind == TraceEventKind::Sent && ev.label == "client_hello") {
            start = ev.t_ms;
            have_start = true;
        }
        if (ev.kind == TraceEventKind::Delivered && ev.label == "client_finished") {
            end = ev.t_ms;
            have_end = true;
        }
    }
    if (!have_start) throw IncompleteHandshakeError("trace has no client_hello send");
    if (!have_end) throw IncompleteHandshakeError("client_finished was never delivered");
    return end - start;
}

double bandwidth_kbs(const SessionTrace& trace) {
    double span_ms = trace.end_ms - trace.start_ms;
    if (span_ms <= 0) throw ZeroDurationError("trace spans no time");
    double kb = static_cast<double>(trace.totals.bytes_tx + trace.totals.bytes_rx) / 1024.0;
    return kb / (span_ms / 1000.0);
}

double retransmission_rate_pct(const TraceTotals& totals) {
    if (totals.segments_sent == 0) throw ZeroDurationError("no segments were sent");
    return 100.0 * static_cast<double>(totals.segments_retransmitted) /
           static_cast<double>(totals.segments_sent);
}

double max_cpu_pct(const std::vector<BusyInterval>& busy, const CpuModel& model) {
    if (model.window_ms <= 0) throw MetricsError("cpu window must be > 0");
    if (busy.empty()) return model.idle_floor_pct;

    std::vector<std::pair<double, double>> merged;
    {
        std::vector<std::pair<double, double>> spans;
        spans.reserve(busy.size());
        for (const auto& b : busy) {
            if (b.end_ms < b.begin_ms) throw MetricsError("busy interval ends before it begins");
            spans.emplace_back(b.begin_ms, b.end_ms);
        }
        std::sort(spans.begin(), spans.end());
        for (const auto& s : spans) {
            if (!merged.empty() && s.first <= merged.back().second) {
                merged.back().second = std::max(merged.back().second, s.second);
            } else {
                merged.push_back(s);
            }
        }
    }

    std::vector<double> prefix(merged.size() + 1, 0.0); // busy time before interval i
    for (size_t i = 0; i < merged.size(); ++i) {
        prefix[i + 1] = prefix[i] + (merged[i].second - merged[i].first);
    }
    // Total busy time in (-inf, x).
    auto busy_before = [&](double x) {
        size_t lo = 0, hi = merged.size();
        while (lo < hi) { // first interval with begin >= x
            size_t mid = (lo + hi) / 2;
            if (merged[mid].first < x) lo = mid + 1;
            else hi = mid;
        }
        double total = prefix[lo];
        if (lo > 0 && merged[lo - 1].second > x) total -= merged[lo - 1].second - x;
        return total;
    };

    // The busy-in-window function is piecewise linear in the window position;
    // maxima sit where a window edge touches an interval boundary.
    double best = 0;
    for (const auto& m : merged) {
        for (double t : {m.first, m.second - model.window_ms}) {
            best = std::max(best, busy_before(t + model.window_ms) - busy_before(t));
        }
    }
    double pct = 100.0 * best / model.window_ms;
    return std::max(pct, model.idle_floor_pct);
}

double max_cpu_pct(const SessionTrace& trace, const CpuModel& model) {
    return max_cpu_pct(trace.server_busy, model);
}

std::vector<double> minmax_normalize(const std::vector<double>& values) {
    if (values.empty()) throw EmptySeriesError("cannot normalize an empty series");
    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(values.size(), 0.0);
    if (hi == lo) return out;
    for (size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / (hi - lo);
    return out;
}

std::string format_fixed(double value, int decimals) {
    if (decimals < 0) throw MetricsError("negative decimal count");
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, decimals);
    if (res.ec != std::errc()) throw MetricsError("value does not fit fixed formatting");
    return std::string(buf, res.ptr);
}

} // namespace pqcbench
