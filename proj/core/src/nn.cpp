#include "fatml/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fatml/errors.hpp"
#include "fatml/rng.hpp"

namespace fatml {

namespace {

struct Activations {
    std::vector<double> a1, h1, a2, h2;  // pre/post ReLU per layer
    double out = 0;
};

void forward_row(const NnModel& m, const double* x, Activations& act,
                 const std::vector<double>* mask1, const std::vector<double>* mask2) {
    act.a1.assign(m.d1, 0.0);
    act.h1.assign(m.d1, 0.0);
    for (size_t j = 0; j < m.d1; ++j) {
        double s = m.b1[j];
        const double* w = m.w1.data() + j * m.d_in;
        for (size_t i = 0; i < m.d_in; ++i) s += w[i] * x[i];
        act.a1[j] = s;
        double h = s > 0 ? s : 0.0;
        act.h1[j] = mask1 ? h * (*mask1)[j] : h;
    }
    act.a2.assign(m.d2, 0.0);
    act.h2.assign(m.d2, 0.0);
    for (size_t k = 0; k < m.d2; ++k) {
        double s = m.b2[k];
        const double* w = m.w2.data() + k * m.d1;
        for (size_t j = 0; j < m.d1; ++j) s += w[j] * act.h1[j];
        act.a2[k] = s;
        double h = s > 0 ? s : 0.0;
        act.h2[k] = mask2 ? h * (*mask2)[k] : h;
    }
    double s = m.b3[0];
    for (size_t k = 0; k < m.d2; ++k) s += m.w3[k] * act.h2[k];
    act.out = s;
}

struct Grads {
    std::vector<double> w1, b1, w2, b2, w3, b3;

    explicit Grads(const NnModel& m)
        : w1(m.w1.size(), 0.0),
          b1(m.b1.size(), 0.0),
          w2(m.w2.size(), 0.0),
          b2(m.b2.size(), 0.0),
          w3(m.w3.size(), 0.0),
          b3(m.b3.size(), 0.0) {}
};

// Accumulate gradients of 0.5*(out - y)^2 / batch_size for one row.
void backward_row(const NnModel& m, const double* x, double y, const Activations& act,
                  double inv_batch, const std::vector<double>* mask1,
                  const std::vector<double>* mask2, Grads& g) {
    double dout = (act.out - y) * inv_batch;
    g.b3[0] += dout;
    std::vector<double> da2(m.d2);
    for (size_t k = 0; k < m.d2; ++k) {
        g.w3[k] += dout * act.h2[k];
        double dh2 = dout * m.w3[k];
        if (mask2) dh2 *= (*mask2)[k];
        da2[k] = act.a2[k] > 0 ? dh2 : 0.0;
    }
    std::vector<double> dh1(m.d1, 0.0);
    for (size_t k = 0; k < m.d2; ++k) {
        if (da2[k] == 0.0) continue;
        g.b2[k] += da2[k];
        double* w2g = g.w2.data() + k * m.d1;
        const double* w2v = m.w2.data() + k * m.d1;
        for (size_t j = 0; j < m.d1; ++j) {
            w2g[j] += da2[k] * act.h1[j];
            dh1[j] += da2[k] * w2v[j];
        }
    }
    for (size_t j = 0; j < m.d1; ++j) {
        double d = dh1[j];
        if (mask1) d *= (*mask1)[j];
        if (act.a1[j] <= 0) continue;
        g.b1[j] += d;
        double* w1g = g.w1.data() + j * m.d_in;
        for (size_t i = 0; i < m.d_in; ++i) w1g[i] += d * x[i];
    }
}

double rmse_rows(const NnModel& m, const Matrix& X, const std::vector<double>& y,
                 const std::vector<size_t>& rows) {
    Activations act;
    double ss = 0;
    for (size_t r : rows) {
        forward_row(m, X.row(r), act, nullptr, nullptr);
        double e = act.out - y[r];
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(rows.size()));
}

double rmse_all(const NnModel& m, const Matrix& X, const std::vector<double>& y) {
    Activations act;
    double ss = 0;
    for (size_t r = 0; r < X.n_rows; ++r) {
        forward_row(m, X.row(r), act, nullptr, nullptr);
        double e = act.out - y[r];
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(X.n_rows));
}

struct Velocity {
    Grads v;
    explicit Velocity(const NnModel& m) : v(m) {}
};

void apply_update(NnModel& m, Grads& vel, const Grads& g, double momentum, double lr) {
    auto upd = [&](std::vector<double>& w, std::vector<double>& v,
                   const std::vector<double>& grad) {
        for (size_t i = 0; i < w.size(); ++i) {
            v[i] = momentum * v[i] - lr * grad[i];
            w[i] += v[i];
        }
    };
    upd(m.w1, vel.w1, g.w1);
    upd(m.b1, vel.b1, g.b1);
    upd(m.w2, vel.w2, g.w2);
    upd(m.b2, vel.b2, g.b2);
    upd(m.w3, vel.w3, g.w3);
    upd(m.b3, vel.b3, g.b3);
}

}  // namespace

double NnModel::predict_row(const double* x) const {
    Activations act;
    forward_row(*this, x, act, nullptr, nullptr);
    return act.out;
}

std::vector<double> NnModel::flat_params() const {
    std::vector<double> p;
    p.reserve(w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size());
    for (const auto* v : {&w1, &b1, &w2, &b2, &w3, &b3}) {
        p.insert(p.end(), v->begin(), v->end());
    }
    return p;
}

void NnModel::set_flat_params(const std::vector<double>& p) {
    size_t off = 0;
    for (auto* v : {&w1, &b1, &w2, &b2, &w3, &b3}) {
        std::copy(p.begin() + static_cast<long>(off),
                  p.begin() + static_cast<long>(off + v->size()), v->begin());
        off += v->size();
    }
    if (off != p.size()) throw LengthMismatchError(off, p.size());
}

double NnModel::loss(const Matrix& X, const std::vector<double>& y) const {
    Activations act;
    double ss = 0;
    for (size_t r = 0; r < X.n_rows; ++r) {
        forward_row(*this, X.row(r), act, nullptr, nullptr);
        double e = act.out - y[r];
        ss += e * e;
    }
    return 0.5 * ss / static_cast<double>(X.n_rows);
}

std::vector<double> NnModel::loss_gradient(const Matrix& X, const std::vector<double>& y) const {
    Grads g(*this);
    Activations act;
    double inv = 1.0 / static_cast<double>(X.n_rows);
    for (size_t r = 0; r < X.n_rows; ++r) {
        forward_row(*this, X.row(r), act, nullptr, nullptr);
        backward_row(*this, X.row(r), y[r], act, inv, nullptr, nullptr, g);
    }
    Grads* gp = &g;
    std::vector<double> flat;
    for (const auto* v : {&gp->w1, &gp->b1, &gp->w2, &gp->b2, &gp->w3, &gp->b3}) {
        flat.insert(flat.end(), v->begin(), v->end());
    }
    return flat;
}

NnModel train_nn(const Matrix& X, const std::vector<double>& y, const NnParams& params,
                 uint64_t seed, std::optional<ValidationRef> validation,
                 std::vector<TrainLogRow>* log_out) {
    if (X.n_rows != y.size()) throw LengthMismatchError(X.n_rows, y.size());
    if (X.n_rows < 2) throw TooFewRowsError(X.n_rows, 2);

    Rng base = Rng(seed).stream("nn");

    std::vector<size_t> train_rows(X.n_rows);
    std::iota(train_rows.begin(), train_rows.end(), size_t(0));
    std::vector<size_t> val_rows;
    const Matrix* vX = nullptr;
    const std::vector<double>* vy = nullptr;
    if (validation) {
        vX = validation->X;
        vy = validation->y;
    } else {
        // carve a seeded 10% holdout for the restoration criterion
        Rng rng = base.stream("valsplit");
        rng.shuffle(train_rows);
        size_t n_val = std::max<size_t>(
            1, static_cast<size_t>(std::lround(0.1 * static_cast<double>(X.n_rows))));
        if (n_val >= X.n_rows) n_val = X.n_rows - 1;
        val_rows.assign(train_rows.begin(), train_rows.begin() + static_cast<long>(n_val));
        train_rows.erase(train_rows.begin(), train_rows.begin() + static_cast<long>(n_val));
        std::sort(train_rows.begin(), train_rows.end());
        std::sort(val_rows.begin(), val_rows.end());
    }

    NnModel m;
    m.d_in = X.n_cols;
    m.d1 = params.dense1;
    m.d2 = params.dense2;
    m.w1.resize(m.d1 * m.d_in);
    m.b1.assign(m.d1, 0.0);
    m.w2.resize(m.d2 * m.d1);
    m.b2.assign(m.d2, 0.0);
    m.w3.resize(m.d2);
    m.b3.assign(1, 0.0);
    {
        Rng rng = base.stream("init");
        double s1 = std::sqrt(2.0 / static_cast<double>(m.d_in));
        for (auto& w : m.w1) w = rng.normal(0.0, s1);
        double s2 = std::sqrt(2.0 / static_cast<double>(m.d1));
        for (auto& w : m.w2) w = rng.normal(0.0, s2);
        double s3 = std::sqrt(2.0 / static_cast<double>(m.d2));
        for (auto& w : m.w3) w = rng.normal(0.0, s3);
    }

    Velocity vel(m);
    double keep = 1.0 - params.dropout;
    size_t step = 0;
    double best_valid = std::numeric_limits<double>::infinity();
    std::vector<double> best_params = m.flat_params();
    size_t best_epoch = 0;

    Activations act;
    std::vector<double> mask1(m.d1), mask2(m.d2);
    for (size_t epoch = 0; epoch < params.max_epochs; ++epoch) {
        Rng erng = base.stream("epoch").stream(epoch);
        std::vector<size_t> order = train_rows;
        erng.shuffle(order);

        for (size_t start = 0; start < order.size(); start += params.batch_size) {
            size_t stop = std::min(order.size(), start + params.batch_size);
            Grads g(m);
            double inv = 1.0 / static_cast<double>(stop - start);
            for (size_t i = start; i < stop; ++i) {
                const std::vector<double>* m1 = nullptr;
                const std::vector<double>* m2 = nullptr;
                if (params.dropout > 0) {
                    for (auto& v : mask1) v = erng.uniform() < keep ? 1.0 / keep : 0.0;
                    for (auto& v : mask2) v = erng.uniform() < keep ? 1.0 / keep : 0.0;
                    m1 = &mask1;
                    m2 = &mask2;
                }
                size_t r = order[i];
                forward_row(m, X.row(r), act, m1, m2);
                backward_row(m, X.row(r), y[r], act, inv, m1, m2, g);
            }
            double lr = params.learning_rate / (1.0 + params.decay * static_cast<double>(step));
            apply_update(m, vel.v, g, params.momentum, lr);
            ++step;
        }

        double train_rmse = rmse_rows(m, X, y, train_rows);
        double valid_rmse = vX ? rmse_all(m, *vX, *vy) : rmse_rows(m, X, y, val_rows);
        if (!std::isfinite(train_rmse) || !std::isfinite(valid_rmse)) {
            throw NonFiniteLossError("epoch " + std::to_string(epoch + 1));
        }
        if (log_out) log_out->push_back({epoch + 1, train_rmse, valid_rmse});
        if (valid_rmse < best_valid) {
            best_valid = valid_rmse;
            best_params = m.flat_params();
            best_epoch = epoch + 1;
        }
    }
    (void)best_epoch;
    m.set_flat_params(best_params);
    return m;
}

}  // namespace fatml
