#pragma once

#include <string>
#include <vector>

#include "stscnn/metrics.hpp"
#include "stscnn/trainer.hpp"

namespace stscnn {

/// One line of a metrics CSV. `band` is a band index or "all" for the
/// scene-level row (mpsnr, mssim, cc_all, sam_mean). Per-band rows have no
/// SAM value and carry NaN there.
struct MetricsRow {
    std::string method;
    std::string scope;
    std::string band;
    double psnr = 0.0;
    double ssim = 0.0;
    double cc = 0.0;
    double sam = 0.0;
    int shift = 0;
    long long seed = 0;

    bool operator==(const MetricsRow&) const;
};

inline constexpr const char* kMetricsCsvHeader = "method,scope,band,psnr,ssim,cc,sam,shift,seed";

/// Per-band rows followed by the "all" row.
std::vector<MetricsRow> metrics_rows(const MetricsReport& report, const std::string& method, int shift,
                                     long long seed);
/// Only the "all" row.
MetricsRow summary_row(const MetricsReport& report, const std::string& method, int shift, long long seed);

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

void write_metrics_json(const std::string& path, const std::vector<MetricsReport>& reports,
                        const std::vector<std::string>& methods);
/// Reads back what write_metrics_json wrote; `methods` receives the labels.
std::vector<MetricsReport> read_metrics_json(const std::string& path, std::vector<std::string>* methods = nullptr);

inline constexpr const char* kLossTraceHeader = "epoch,lr,mean_loss";
void write_loss_trace(const std::string& path, const std::vector<EpochRecord>& trace);
std::vector<EpochRecord> read_loss_trace(const std::string& path);

/// Shortest decimal text that parses back to the same double; inf/nan spelled out.
std::string format_double(double v);
double parse_double(const std::string& text);

} // namespace stscnn
