#include "stscnn/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace stscnn {

using nlohmann::json;

namespace {

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

double number(const json& j) {
    if (j.is_string()) return parse_double(j.get<std::string>());
    return j.get<double>();
}

} // namespace

bool MetricsRow::operator==(const MetricsRow& o) const {
    return method == o.method && scope == o.scope && band == o.band && same(psnr, o.psnr) &&
           same(ssim, o.ssim) && same(cc, o.cc) && same(sam, o.sam) && shift == o.shift && seed == o.seed;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    if (text.empty() || text == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw FormatError("not a number: '" + text + "'");
    }
    return v;
}

std::vector<MetricsRow> metrics_rows(const MetricsReport& report, const std::string& method, int shift,
                                     long long seed) {
    std::vector<MetricsRow> rows;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t b = 0; b < report.bands.size(); ++b) {
        const auto& m = report.bands[b];
        rows.push_back({method, to_string(report.scope), std::to_string(b), m.psnr, m.ssim, m.cc, nan, shift, seed});
    }
    rows.push_back(summary_row(report, method, shift, seed));
    return rows;
}

MetricsRow summary_row(const MetricsReport& report, const std::string& method, int shift, long long seed) {
    return {method, to_string(report.scope), "all", report.mpsnr, report.mssim, report.cc_all, report.sam_mean,
            shift, seed};
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    auto out = open_out(path);
    out << kMetricsCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.method << ',' << r.scope << ',' << r.band << ',' << format_double(r.psnr) << ','
            << format_double(r.ssim) << ',' << format_double(r.cc) << ','
            << (std::isnan(r.sam) ? std::string() : format_double(r.sam)) << ',' << r.shift << ',' << r.seed
            << '\n';
    }
    if (!out) throw IoError("short write to '" + path + "'");
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != kMetricsCsvHeader) {
        throw FormatError("'" + path + "': expected header '" + kMetricsCsvHeader + "'");
    }
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 9) throw FormatError("'" + path + "': expected 9 columns in '" + line + "'");
        MetricsRow r;
        r.method = f[0];
        r.scope = f[1];
        r.band = f[2];
        r.psnr = parse_double(f[3]);
        r.ssim = parse_double(f[4]);
        r.cc = parse_double(f[5]);
        r.sam = parse_double(f[6]);
        r.shift = static_cast<int>(parse_double(f[7]));
        r.seed = static_cast<long long>(parse_double(f[8]));
        rows.push_back(r);
    }
    return rows;
}

void write_metrics_json(const std::string& path, const std::vector<MetricsReport>& reports,
                        const std::vector<std::string>& methods) {
    if (methods.size() != reports.size()) throw ArgumentError("write_metrics_json: one method label per report");
    json doc = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        json bands = json::array();
        for (const auto& b : r.bands) bands.push_back({{"psnr", number(b.psnr)}, {"ssim", number(b.ssim)}, {"cc", number(b.cc)}});
        doc.push_back({{"method", methods[i]},
                       {"scope", to_string(r.scope)},
                       {"data_range", number(r.data_range)},
                       {"bands", bands},
                       {"mpsnr", number(r.mpsnr)},
                       {"mssim", number(r.mssim)},
                       {"cc_all", number(r.cc_all)},
                       {"sam_mean", number(r.sam_mean)},
                       {"sam_skipped", r.sam_skipped}});
    }
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
}

std::vector<MetricsReport> read_metrics_json(const std::string& path, std::vector<std::string>* methods) {
    auto in = open_in(path);
    std::vector<MetricsReport> reports;
    try {
        const json doc = json::parse(in);
        for (const auto& j : doc) {
            MetricsReport r;
            r.scope = scope_from_string(j.at("scope").get<std::string>());
            r.data_range = number(j.at("data_range"));
            for (const auto& b : j.at("bands")) {
                r.bands.push_back({number(b.at("psnr")), number(b.at("ssim")), number(b.at("cc"))});
            }
            r.mpsnr = number(j.at("mpsnr"));
            r.mssim = number(j.at("mssim"));
            r.cc_all = number(j.at("cc_all"));
            r.sam_mean = number(j.at("sam_mean"));
            r.sam_skipped = j.at("sam_skipped").get<std::size_t>();
            if (methods) methods->push_back(j.at("method").get<std::string>());
            reports.push_back(r);
        }
    } catch (const json::exception& e) {
        throw FormatError("'" + path + "': " + e.what());
    }
    return reports;
}

void write_loss_trace(const std::string& path, const std::vector<EpochRecord>& trace) {
    auto out = open_out(path);
    out << kLossTraceHeader << '\n';
    for (const auto& r : trace) out << r.epoch << ',' << format_double(r.lr) << ',' << format_double(r.mean_loss) << '\n';
    if (!out) throw IoError("short write to '" + path + "'");
}

std::vector<EpochRecord> read_loss_trace(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != kLossTraceHeader) {
        throw FormatError("'" + path + "': expected header '" + kLossTraceHeader + "'");
    }
    std::vector<EpochRecord> trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 3) throw FormatError("'" + path + "': expected 3 columns in '" + line + "'");
        trace.push_back({static_cast<int>(parse_double(f[0])), parse_double(f[1]), parse_double(f[2])});
    }
    return trace;
}

} // namespace stscnn
