#ifndef PQCBENCH_METRICS_HPP
#define PQCBENCH_METRICS_HPP

// Turns session traces into the four reported quantities: handshake latency
// (ms), peak server CPU utilization (%), goodput-inclusive bandwidth (KB/s)
// and retransmission rate (%). Also the min-max normalization used by the
// heatmaps and the fixed-point formatting used by every report writer.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqcbench/config.hpp"
#include "pqcbench/netsim.hpp"

namespace pqcbench {

class MetricsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The handshake never delivered its final flight, so latency is undefined.
class IncompleteHandshakeError : public MetricsError {
public:
    using MetricsError::MetricsError;
};

// The trace spans no time, so a rate over it is undefined.
class ZeroDurationError : public MetricsError {
public:
    using MetricsError::MetricsError;
};

class EmptySeriesError : public MetricsError {
public:
    using MetricsError::MetricsError;
};

// Peak utilization is measured as the busiest sliding window of this length
// anywhere in the trace. idle_floor_pct is reported when nothing ran at all.
struct CpuModel {
    double window_ms = 1000.0;
    double idle_floor_pct = 0.0;

    static CpuModel from_config(const KeyValueFile& kv);
};

// First client_hello Sent to the client_finished Delivered, in milliseconds.
// Throws IncompleteHandshakeError when either endpoint event is missing.
double handshake_latency_ms(const SessionTrace& trace);

// (bytes_tx + bytes_rx) over the trace's wall-clock span, in KB/s (KB = 1024
// bytes). Throws ZeroDurationError on an empty span.
double bandwidth_kbs(const SessionTrace& trace);

// Retransmitted sends over all sends, in percent.
double retransmission_rate_pct(const TraceTotals& totals);

// Busiest window over merged busy intervals, in percent of the window.
double max_cpu_pct(const std::vector<BusyInterval>& busy, const CpuModel& model);
double max_cpu_pct(const SessionTrace& trace, const CpuModel& model);

// (v - min) / (max - min) per element; a constant series maps to all zeros.
// Throws EmptySeriesError on an empty input.
std::vector<double> minmax_normalize(const std::vector<double>& values);

// Fixed-point decimal via std::to_chars, so output never depends on locale.
std::string format_fixed(double value, int decimals);

} // namespace pqcbench

#endif
