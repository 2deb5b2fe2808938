#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mg/price.hpp"
#include "mg/stats.hpp"

// Ingestion of short-term market trade records into 15-minute interval
// summaries: volume-weighted average price, closing price, and the two
// diagnostic histograms used to size arbitrage headroom against the cut-off
// rule (closing price minus factor times the interval average).

namespace mg {

struct IntradayTrade {
    std::int64_t minute = 0;  // minutes since epoch-like origin; parsed from timestamp
    double price = 0.0;       // EUR/MWh
    double volume = 0.0;      // MW, >= 0
};

struct IntervalSummary {
    std::int64_t interval_start = 0;  // minute of the 15-min bucket start
    double volume = 0.0;
    double vwap = 0.0;     // volume-weighted average price over the interval
    double closing = 0.0;  // price of the last trade in the interval
    int trades = 0;
};

struct IntradayReport {
    std::vector<IntervalSummary> intervals;
    Histogram vwap_hist;
    Histogram diff_hist;  // closing - factor * vwap, filtered to positive & liquid
    std::size_t rows_total = 0;
    std::size_t rows_skipped = 0;
    std::size_t intervals_filtered_in = 0;
    double factor = 1.25;
    double min_volume = 500.0;
    SeriesStats vwap_stats;
    SeriesStats diff_stats;
};

namespace detail {

/// Parse "YYYY-MM-DD HH:MM[:SS]" into a minute count on a proleptic day
/// number. Only ordering and 15-minute bucketing matter, so no timezone
/// handling is attempted.
inline bool parse_timestamp_minutes(const std::string& text, std::int64_t& out) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    const int got = std::sscanf(text.c_str(), "%d-%d-%d %d:%d:%d", &y, &mo, &d, &h, &mi, &s);
    if (got < 5) return false;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59) return false;
    // Days since 1970-01-01 (civil-from-days inverse, Howard Hinnant's method).
    const int yy = y - (mo <= 2 ? 1 : 0);
    const int era = (yy >= 0 ? yy : yy - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(yy - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    const std::int64_t days = static_cast<std::int64_t>(era) * 146097 +
                              static_cast<std::int64_t>(doe) - 719468;
    out = days * 1440 + h * 60 + mi;
    return true;
}

}  // namespace detail

/// Ingest a trade CSV with columns: timestamp,price_eur_mwh,volume_mw.
/// Malformed rows are skipped and counted; empty intervals never appear.
inline IntradayReport ingest_intraday(std::istream& in, double factor = 1.25,
                                      double min_volume = 500.0) {
    struct Bucket {
        double volume = 0.0;
        double price_volume = 0.0;
        std::int64_t last_minute = std::numeric_limits<std::int64_t>::min();
        double closing = 0.0;
        int trades = 0;
    };
    std::map<std::int64_t, Bucket> buckets;

    IntradayReport report;
    report.factor = factor;
    report.min_volume = min_volume;

    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r\n,") == std::string::npos) continue;
        ++report.rows_total;
        std::istringstream row(line);
        std::string ts, price_s, vol_s;
        if (!std::getline(row, ts, ',') || !std::getline(row, price_s, ',') ||
            !std::getline(row, vol_s, ',')) {
            ++report.rows_skipped;
            continue;
        }
        if (first) {
            first = false;
            if (ts.find("timestamp") != std::string::npos) {
                --report.rows_total;
                continue;  // header
            }
        }
        std::int64_t minute = 0;
        double price = 0.0, volume = 0.0;
        try {
            price = std::stod(price_s);
            volume = std::stod(vol_s);
        } catch (const std::exception&) {
            ++report.rows_skipped;
            continue;
        }
        if (!detail::parse_timestamp_minutes(ts, minute) || volume < 0.0) {
            ++report.rows_skipped;
            continue;
        }
        Bucket& b = buckets[minute / 15];
        b.volume += volume;
        b.price_volume += price * volume;
        b.trades += 1;
        if (minute >= b.last_minute) {
            b.last_minute = minute;
            b.closing = price;
        }
    }

    std::vector<double> vwaps, diffs;
    for (const auto& [bucket_idx, b] : buckets) {
        if (b.volume <= 0.0) continue;  // volume-less interval has no average price
        IntervalSummary s;
        s.interval_start = bucket_idx * 15;
        s.volume = b.volume;
        s.vwap = b.price_volume / b.volume;
        s.closing = b.closing;
        s.trades = b.trades;
        report.intervals.push_back(s);
        vwaps.push_back(s.vwap);
        const double diff = s.closing - factor * s.vwap;
        if (diff > 0.0 && s.volume > min_volume) diffs.push_back(diff);
    }
    report.intervals_filtered_in = diffs.size();
    if (!vwaps.empty()) {
        report.vwap_hist = make_histogram(vwaps);
        report.vwap_stats = series_stats(vwaps);
    }
    if (!diffs.empty()) {
        report.diff_hist = make_histogram(diffs);
        report.diff_stats = series_stats(diffs);
    }
    return report;
}

inline IntradayReport ingest_intraday_file(const std::string& path, double factor = 1.25,
                                           double min_volume = 500.0) {
    std::ifstream in(path);
    if (!in) throw ConfigError("intraday: cannot open " + path);
    return ingest_intraday(in, factor, min_volume);
}

}  // namespace mg
