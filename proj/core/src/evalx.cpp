#include "fatml/evalx.hpp"

#include <cmath>

namespace fatml {

Metrics regression_metrics(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.size() != yhat.size()) throw LengthMismatchError(y.size(), yhat.size());
    if (y.size() < 2) throw TooFewRowsError(y.size(), 2);

    const size_t n = y.size();
    double abs_sum = 0, sq_sum = 0, y_sum = 0;
    for (size_t i = 0; i < n; ++i) {
        double e = y[i] - yhat[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        y_sum += y[i];
    }
    double y_mean = y_sum / static_cast<double>(n);
    double ss_tot = 0;
    for (double v : y) ss_tot += (v - y_mean) * (v - y_mean);

    Metrics m;
    m.n = n;
    m.mae = abs_sum / static_cast<double>(n);
    m.mse = sq_sum / static_cast<double>(n);
    m.rmse = std::sqrt(m.mse);
    if (ss_tot > 0) {
        m.r2 = 1.0 - sq_sum / ss_tot;
    } else {
        m.r2 = sq_sum == 0 ? 1.0 : 0.0;
    }

    double e_sum = 0;
    for (size_t i = 0; i < n; ++i) e_sum += y[i] - yhat[i];
    double e_mean = e_sum / static_cast<double>(n);
    double e_ss = 0;
    for (size_t i = 0; i < n; ++i) {
        double d = (y[i] - yhat[i]) - e_mean;
        e_ss += d * d;
    }
    m.err_std = std::sqrt(e_ss / static_cast<double>(n - 1));
    return m;
}

Metrics banded_metrics(const std::vector<double>& y, const std::vector<double>& yhat,
                       Band band) {
    if (y.size() != yhat.size()) throw LengthMismatchError(y.size(), yhat.size());
    if (!(band.low < band.high)) throw ConfigError("band.low must be < band.high");
    std::vector<double> fy, fyhat;
    for (size_t i = 0; i < y.size(); ++i) {
        if (y[i] >= band.low && y[i] <= band.high) {
            fy.push_back(y[i]);
            fyhat.push_back(yhat[i]);
        }
    }
    if (fy.empty()) throw EmptyBandError();
    if (fy.size() < 2) throw TooFewRowsError(fy.size(), 2);
    return regression_metrics(fy, fyhat);
}

ParityTable parity_table(const std::vector<double>& y, const std::vector<double>& yhat) {
    Metrics m = regression_metrics(y, yhat);
    ParityTable t;
    t.err_std = m.err_std;
    t.band_15 = 1.5 * m.err_std;
    t.band_20 = 2.0 * m.err_std;
    for (size_t i = 0; i < y.size(); ++i) {
        double e = y[i] - yhat[i];
        t.rows.push_back({y[i], yhat[i], e});
        if (std::abs(e) <= t.band_15) ++t.inside_15;
        if (std::abs(e) <= t.band_20) ++t.inside_20;
    }
    return t;
}

}  // namespace fatml
