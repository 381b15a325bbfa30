#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace fatml::cli {

namespace {

constexpr double kWidth = 860;
constexpr double kHeight = 620;
constexpr double kLeft = 90;
constexpr double kRight = 30;
constexpr double kTop = 52;
constexpr double kBottom = 64;

std::string fmt(double v, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Scale {
    double lo = 0, hi = 1, px0 = 0, px1 = 1;

    double operator()(double v) const { return px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

std::vector<double> nice_ticks(double lo, double hi, size_t target = 6) {
    double span = hi - lo;
    if (!(span > 0)) return {lo};
    double raw = span / static_cast<double>(target);
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    }
    std::vector<double> ticks;
    double first = std::ceil(lo / step) * step;
    for (double t = first; t <= hi + 1e-9 * span; t += step) {
        ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
    }
    return ticks;
}

void open_svg(std::ostringstream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
        << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"#ffffff\"/>\n";
    out << "<text x=\"" << kWidth / 2
        << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"17\" "
           "fill=\"#222222\">"
        << escape_xml(title) << "</text>\n";
}

void axes(std::ostringstream& out, const Scale& sx, const Scale& sy,
          const std::string& xlabel, const std::string& ylabel) {
    double x0 = sx.px0, x1 = sx.px1, y0 = sy.px0, y1 = sy.px1;
    for (double t : nice_ticks(sx.lo, sx.hi)) {
        double px = sx(t);
        out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(px)
            << "\" y2=\"" << fmt(y1) << "\" stroke=\"#e3e3e3\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(y0 + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#444444\">"
            << fmt_tick(t) << "</text>\n";
    }
    for (double t : nice_ticks(sy.lo, sy.hi)) {
        double py = sy(t);
        out << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(x1)
            << "\" y2=\"" << fmt(py) << "\" stroke=\"#e3e3e3\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fmt(x0 - 8) << "\" y=\"" << fmt(py + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#444444\">"
            << fmt_tick(t) << "</text>\n";
    }
    out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y1) << "\" width=\"" << fmt(x1 - x0)
        << "\" height=\"" << fmt(y0 - y1)
        << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(y0 + 44)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "fill=\"#222222\">"
        << escape_xml(xlabel) << "</text>\n";
    out << "<text x=\"" << fmt(x0 - 64) << "\" y=\"" << fmt((y0 + y1) / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "fill=\"#222222\" transform=\"rotate(-90 "
        << fmt(x0 - 64) << " " << fmt((y0 + y1) / 2) << ")\">" << escape_xml(ylabel)
        << "</text>\n";
}

// deterministic small vertical offset for beeswarm lanes
double lane_jitter(size_t row, size_t feature, double amplitude) {
    uint64_t h = row * 2654435761ull + feature * 40503ull + 1442695040888963407ull;
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    double unit = static_cast<double>(h % 10000) / 9999.0;
    return (unit * 2.0 - 1.0) * amplitude;
}

std::string value_color(double normalized) {
    double t = std::clamp(normalized, 0.0, 1.0);
    int r = static_cast<int>(std::lround(59 + t * (180 - 59)));
    int g = static_cast<int>(std::lround(76 + t * (4 - 76)));
    int b = static_cast<int>(std::lround(192 + t * (38 - 192)));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace

std::string parity_svg(const ParityTable& table, const std::string& title,
                       const std::string& unit) {
    double lo = 0, hi = 1;
    if (!table.rows.empty()) {
        lo = table.rows.front().actual;
        hi = lo;
        for (const ParityRow& r : table.rows) {
            lo = std::min({lo, r.actual, r.predicted});
            hi = std::max({hi, r.actual, r.predicted});
        }
    }
    double pad = (hi - lo) * 0.05 + 1e-9;
    lo -= pad;
    hi += pad;
    Scale sx{lo, hi, kLeft, kWidth - kRight};
    Scale sy{lo, hi, kHeight - kBottom, kTop};

    std::ostringstream out;
    open_svg(out, title);
    axes(out, sx, sy, "measured [" + unit + "]", "predicted [" + unit + "]");

    out << "<line x1=\"" << fmt(sx(lo)) << "\" y1=\"" << fmt(sy(lo)) << "\" x2=\""
        << fmt(sx(hi)) << "\" y2=\"" << fmt(sy(hi))
        << "\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
    struct BandLine {
        double offset;
        const char* cls;
        const char* color;
    };
    const BandLine bands[] = {{table.band_15, "band15", "#e08b2d"},
                              {-table.band_15, "band15", "#e08b2d"},
                              {table.band_20, "band20", "#c23b3b"},
                              {-table.band_20, "band20", "#c23b3b"}};
    for (const BandLine& b : bands) {
        // predicted = measured - residual offset, clipped to the frame
        double a0 = std::max(lo, lo + b.offset);
        double a1 = std::min(hi, hi + b.offset);
        if (a0 >= a1) continue;
        out << "<line class=\"" << b.cls << "\" x1=\"" << fmt(sx(a0)) << "\" y1=\""
            << fmt(sy(a0 - b.offset)) << "\" x2=\"" << fmt(sx(a1)) << "\" y2=\""
            << fmt(sy(a1 - b.offset)) << "\" stroke=\"" << b.color
            << "\" stroke-width=\"1.2\" stroke-dasharray=\"7 5\"/>\n";
    }
    for (const ParityRow& r : table.rows) {
        out << "<circle cx=\"" << fmt(sx(r.actual)) << "\" cy=\"" << fmt(sy(r.predicted))
            << "\" r=\"2.6\" fill=\"#1f77b4\" fill-opacity=\"0.55\"/>\n";
    }
    out << "<text x=\"" << fmt(kLeft + 10) << "\" y=\"" << fmt(kTop + 16)
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#555555\">n=" << table.rows.size()
        << ", residual sd=" << fmt(table.err_std) << ", inside 1.5sd: " << table.inside_15
        << ", inside 2sd: " << table.inside_20 << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string importance_svg(const std::vector<std::pair<std::string, double>>& items,
                           const std::string& title, const std::string& value_label) {
    size_t n = std::min<size_t>(items.size(), 20);
    double vmax = 1e-12;
    double vmin = 0;
    for (size_t i = 0; i < n; ++i) {
        vmax = std::max(vmax, items[i].second);
        vmin = std::min(vmin, items[i].second);
    }
    Scale sx{std::min(0.0, vmin), vmax * 1.05, 230, kWidth - kRight};
    double top = kTop + 8;
    double bottom = kHeight - kBottom;
    double lane = n > 0 ? (bottom - top) / static_cast<double>(n) : 1;
    double bar = std::min(26.0, lane * 0.66);

    std::ostringstream out;
    open_svg(out, title);
    for (double t : nice_ticks(sx.lo, sx.hi)) {
        out << "<line x1=\"" << fmt(sx(t)) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(sx(t))
            << "\" y2=\"" << fmt(bottom) << "\" stroke=\"#e3e3e3\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fmt(sx(t)) << "\" y=\"" << fmt(bottom + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#444444\">"
            << fmt_tick(t) << "</text>\n";
    }
    for (size_t i = 0; i < n; ++i) {
        double y = top + lane * static_cast<double>(i) + (lane - bar) / 2;
        double x0 = sx(std::min(0.0, items[i].second));
        double x1 = sx(std::max(0.0, items[i].second));
        out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y) << "\" width=\""
            << fmt(std::max(0.5, x1 - x0)) << "\" height=\"" << fmt(bar)
            << "\" fill=\"#1f77b4\"/>\n";
        out << "<text x=\"222\" y=\"" << fmt(y + bar / 2 + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#222222\">"
            << escape_xml(items[i].first) << "</text>\n";
        out << "<text x=\"" << fmt(x1 + 6) << "\" y=\"" << fmt(y + bar / 2 + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\">"
            << fmt(items[i].second, 4) << "</text>\n";
    }
    out << "<text x=\"" << fmt((230 + kWidth - kRight) / 2) << "\" y=\"" << fmt(bottom + 44)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "fill=\"#222222\">"
        << escape_xml(value_label) << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string beeswarm_svg(const ShapReports& reports,
                         const std::vector<std::string>& feature_names,
                         size_t max_features, const std::string& title) {
    size_t n = std::min(max_features, reports.importance.size());
    std::map<std::string, size_t> lane_of;
    std::vector<std::string> lanes;
    for (size_t i = 0; i < n; ++i) {
        lane_of[reports.importance[i].feature] = i;
        lanes.push_back(reports.importance[i].feature);
    }
    std::map<size_t, size_t> by_index;  // feature index -> lane
    for (size_t f = 0; f < feature_names.size(); ++f) {
        auto it = lane_of.find(feature_names[f]);
        if (it != lane_of.end()) by_index[f] = it->second;
    }

    double lo = 0, hi = 0;
    for (const BeeswarmPoint& p : reports.beeswarm) {
        if (!by_index.count(p.feature)) continue;
        lo = std::min(lo, p.shap);
        hi = std::max(hi, p.shap);
    }
    double pad = (hi - lo) * 0.05 + 1e-9;
    Scale sx{lo - pad, hi + pad, 230, kWidth - kRight};
    double top = kTop + 8;
    double bottom = kHeight - kBottom;
    double lane = n > 0 ? (bottom - top) / static_cast<double>(n) : 1;

    std::ostringstream out;
    open_svg(out, title);
    for (double t : nice_ticks(sx.lo, sx.hi)) {
        out << "<line x1=\"" << fmt(sx(t)) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(sx(t))
            << "\" y2=\"" << fmt(bottom) << "\" stroke=\"#e3e3e3\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fmt(sx(t)) << "\" y=\"" << fmt(bottom + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#444444\">"
            << fmt_tick(t) << "</text>\n";
    }
    out << "<line x1=\"" << fmt(sx(0)) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(sx(0))
        << "\" y2=\"" << fmt(bottom) << "\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
    for (size_t i = 0; i < n; ++i) {
        double y = top + lane * (static_cast<double>(i) + 0.5);
        out << "<text x=\"222\" y=\"" << fmt(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#222222\">"
            << escape_xml(lanes[i]) << "</text>\n";
    }
    for (const BeeswarmPoint& p : reports.beeswarm) {
        auto it = by_index.find(p.feature);
        if (it == by_index.end()) continue;
        double y = top + lane * (static_cast<double>(it->second) + 0.5) +
                   lane_jitter(p.row, p.feature, lane * 0.32);
        out << "<circle cx=\"" << fmt(sx(p.shap)) << "\" cy=\"" << fmt(y)
            << "\" r=\"2.4\" fill=\"" << value_color(p.normalized_value)
            << "\" fill-opacity=\"0.75\"/>\n";
    }
    out << "<text x=\"" << fmt((230 + kWidth - kRight) / 2) << "\" y=\"" << fmt(bottom + 44)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "fill=\"#222222\">attribution (transformed target units); blue low to red high "
           "feature value</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string rmse_strip_svg(const std::vector<TrialRecord>& trials, const std::string& title) {
    std::map<std::string, std::vector<double>> by_space;
    for (const TrialRecord& t : trials) {
        if (t.status == TrialStatus::completed) by_space[t.spec.space].push_back(t.mean_cv_rmse);
    }
    double lo = 0, hi = 1;
    bool first = true;
    for (const auto& [space, values] : by_space) {
        for (double v : values) {
            if (first) {
                lo = hi = v;
                first = false;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    double pad = (hi - lo) * 0.06 + 1e-9;
    Scale sx{lo - pad, hi + pad, 230, kWidth - kRight};
    double top = kTop + 8;
    double bottom = kHeight - kBottom;
    size_t n = std::max<size_t>(1, by_space.size());
    double lane = (bottom - top) / static_cast<double>(n);

    std::ostringstream out;
    open_svg(out, title);
    for (double t : nice_ticks(sx.lo, sx.hi)) {
        out << "<line x1=\"" << fmt(sx(t)) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(sx(t))
            << "\" y2=\"" << fmt(bottom) << "\" stroke=\"#e3e3e3\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fmt(sx(t)) << "\" y=\"" << fmt(bottom + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#444444\">"
            << fmt_tick(t) << "</text>\n";
    }
    size_t i = 0;
    for (const auto& [space, values] : by_space) {
        double y = top + lane * (static_cast<double>(i) + 0.5);
        out << "<text x=\"222\" y=\"" << fmt(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#222222\">"
            << escape_xml(space) << "</text>\n";
        out << "<line x1=\"" << fmt(sx.px0) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(sx.px1)
            << "\" y2=\"" << fmt(y) << "\" stroke=\"#eeeeee\" stroke-width=\"1\"/>\n";
        size_t k = 0;
        for (double v : values) {
            double jitter = lane_jitter(k++, i, lane * 0.22);
            out << "<circle cx=\"" << fmt(sx(v)) << "\" cy=\"" << fmt(y + jitter)
                << "\" r=\"4\" fill=\"#1f77b4\" fill-opacity=\"0.7\"/>\n";
        }
        ++i;
    }
    out << "<text x=\"" << fmt((230 + kWidth - kRight) / 2) << "\" y=\"" << fmt(bottom + 44)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "fill=\"#222222\">cross-validation RMSE (transformed target units)</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace fatml::cli
