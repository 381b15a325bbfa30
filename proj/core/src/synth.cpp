#include "fatml/synth.hpp"

#include <algorithm>
#include <cmath>

#include "fatml/rng.hpp"

namespace fatml {

void SynthConfig::validate() const {
    if (n_rows < 10) throw ConfigError("synth n_rows must be >= 10");
    if (noise_std_log10 < 0) throw ConfigError("synth noise_std_log10 must be >= 0");
    for (const auto& [col, rate] : missing_rates) {
        if (rate < 0 || rate >= 1) throw ConfigError("missing rate out of [0,1) for " + col);
    }
}

double SynthTruth::formula_log10(double r, double r_eh, bool tig, double h_s, double w_bp,
                                 double t_bp) const {
    double z = base_log10 + r_slope * r + yield_slope * (r_eh / 1000.0) +
               (tig ? tig_uplift : 0.0) + height_slope * (h_s / 300.0);
    if (ratio_coeff != 0.0) {
        z += ratio_coeff * (std::log10(w_bp / t_bp) - 1.0);
    }
    return z;
}

double SynthTruth::target_mpa(double r, double r_eh, bool tig, double h_s, double w_bp,
                              double t_bp) const {
    return std::pow(10.0, formula_log10(r, r_eh, tig, h_s, w_bp, t_bp));
}

FeatureSchema synthetic_schema(const SynthConfig& cfg) {
    FeatureSchema s = default_table_schema();
    auto cat = [](std::string name, std::vector<std::string> levels) {
        ColumnSpec c;
        c.name = std::move(name);
        c.kind = ColumnKind::categorical;
        c.levels = std::move(levels);
        return c;
    };
    // welding position/process are recorded by the generator even though the
    // base catalog omits them; the extended hypotheses need them
    auto weld_type_pos = s.columns.begin() + static_cast<long>(s.index_of("Weld_Type")) + 1;
    weld_type_pos = s.columns.insert(
        weld_type_pos, cat("Weld_Pos", {"flat", "horizontal", "vertical", "overhead"}));
    s.columns.insert(weld_type_pos + 1,
                     cat("Weld_Proc", {"MAG", "MMA", "TIG", "SAW"}));
    if (cfg.planted_collinear) {
        ColumnSpec c;
        c.name = collinear_column_name();
        c.kind = ColumnKind::real;
        c.unit = "mm";
        c.range = ValueRange{15.0, 1550.0};
        s.columns.insert(s.columns.begin() + static_cast<long>(s.index_of("l_S")) + 1, c);
    }
    return s;
}

namespace {

// Weighted level pick; weights need not normalize.
std::string pick_level(Rng& rng, const std::vector<std::pair<std::string, double>>& table) {
    double total = 0;
    for (const auto& [_, w] : table) total += w;
    double u = rng.uniform() * total;
    double acc = 0;
    for (const auto& [level, w] : table) {
        acc += w;
        if (u < acc) return level;
    }
    return table.back().first;
}

struct RowDraw {
    double f_t, r_eh, r_m, r_eh_f, r_m_f;
    double l_bp, w_bp, t_bp, h_s, l_s, t_s, a_w;
    double r, dsi, coll;
    std::string scale, loading, ia, pre, post, weld, pos, proc, corr;
    double n_i, target;
};

}  // namespace

SynthResult generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    FeatureSchema schema = synthetic_schema(cfg);

    SynthTruth truth;
    truth.base_log10 = cfg.base_log10;
    truth.r_slope = cfg.r_slope;
    truth.yield_slope = cfg.yield_slope;
    truth.tig_uplift = cfg.tig_uplift;
    truth.height_slope = cfg.height_slope;
    truth.ratio_coeff = cfg.planted_ratio_feature ? cfg.ratio_coeff : 0.0;
    truth.noise_std_log10 = cfg.noise_std_log10;
    truth.dominant_feature = "R";
    truth.treated_level = "TIG dressing";
    truth.collinear_column = cfg.planted_collinear ? collinear_column_name() : "";

    const std::vector<std::pair<std::string, double>> scale_tbl = {{"small", 0.8},
                                                                   {"large", 0.2}};
    const std::vector<std::pair<std::string, double>> loading_tbl = {{"axial", 0.85},
                                                                     {"bending", 0.15}};
    const std::vector<std::pair<std::string, double>> ia_tbl = {{"yes", 0.7}, {"no", 0.3}};
    const std::vector<std::pair<std::string, double>> corr_tbl = {{"no", 0.9}, {"yes", 0.1}};
    const std::vector<std::pair<std::string, double>> pre_tbl = {
        {"none", 0.8}, {"stress relieved", 0.15}, {"other", 0.05}};
    const std::vector<std::pair<std::string, double>> post_tbl = {
        {"no weld post-treatment", 0.70},
        {"TIG dressing", 0.12},
        {"grinding", 0.10},
        {"hammer peening", 0.08}};
    const std::vector<std::pair<std::string, double>> weld_tbl = {{"Fillet Weld", 0.75},
                                                                  {"Butt Weld", 0.25}};
    const std::vector<std::pair<std::string, double>> pos_tbl = {
        {"flat", 0.6}, {"horizontal", 0.2}, {"vertical", 0.15}, {"overhead", 0.05}};
    const std::vector<std::pair<std::string, double>> proc_tbl = {
        {"MAG", 0.5}, {"MMA", 0.25}, {"TIG", 0.15}, {"SAW", 0.10}};

    Rng base = Rng(cfg.seed).stream("synth");
    DatasetBuilder b(schema, cfg.n_rows);

    for (size_t i = 0; i < cfg.n_rows; ++i) {
        Rng rng = base.stream(i);
        RowDraw row;
        // redraw whole rows whose noisy target would leave (0, 500] MPa
        for (;;) {
            row.scale = pick_level(rng, scale_tbl);
            row.loading = pick_level(rng, loading_tbl);
            row.ia = pick_level(rng, ia_tbl);
            row.corr = pick_level(rng, corr_tbl);
            row.pre = pick_level(rng, pre_tbl);
            row.post = pick_level(rng, post_tbl);
            row.weld = pick_level(rng, weld_tbl);
            row.pos = pick_level(rng, pos_tbl);
            row.proc = pick_level(rng, proc_tbl);

            row.f_t = rng.uniform(1.0, 32.0);
            row.r_eh = rng.uniform(235.0, 960.0);
            row.r_m = row.r_eh + rng.uniform(40.0, 460.0);
            row.r_eh_f = rng.uniform(200.0, 800.0);
            row.r_m_f = rng.uniform(300.0, 900.0);
            row.l_bp = rng.uniform(100.0, 1200.0);
            row.w_bp = rng.uniform(40.0, 400.0);
            row.t_bp = rng.uniform(5.0, 60.0);
            row.h_s = rng.uniform(10.0, 290.0);
            row.l_s = rng.uniform(20.0, 900.0);
            row.t_s = rng.uniform(2.0, 45.0);
            row.a_w = rng.uniform(2.0, 18.0);
            row.r = rng.uniform(-1.0, 0.8);
            row.dsi = rng.uniform(60.0, 1100.0);
            row.coll = row.w_bp + row.l_s + rng.normal(0.0, 2.0);
            row.n_i = rng.uniform(0.0, 1.0);

            bool tig = row.post == truth.treated_level;
            double z = truth.formula_log10(row.r, row.r_eh, tig, row.h_s, row.w_bp, row.t_bp);
            if (cfg.noise_std_log10 > 0) z += rng.normal(0.0, cfg.noise_std_log10);
            row.target = std::pow(10.0, z);
            bool coll_ok = !cfg.planted_collinear || (row.coll >= 15.0 && row.coll <= 1550.0);
            if (row.target > 0.0 && row.target <= 500.0 && coll_ok) break;
        }

        auto set_r = [&](const char* name, double v) { b.set_real(b.column_index(name), i, v); };
        auto set_l = [&](const char* name, const std::string& v) {
            b.set_label(b.column_index(name), i, v);
        };
        set_l("Scale", row.scale);
        set_l("Loading", row.loading);
        set_l("I_A", row.ia);
        set_r("f_T", row.f_t);
        set_r("R_eH", row.r_eh);
        set_r("R_m", row.r_m);
        set_l("Pre_Treat", row.pre);
        set_l("Post_Treat", row.post);
        set_l("Weld_Type", row.weld);
        set_l("Weld_Pos", row.pos);
        set_l("Weld_Proc", row.proc);
        set_r("R_eH_filler", row.r_eh_f);
        set_r("R_m_filler", row.r_m_f);
        set_r("l_BP", row.l_bp);
        set_r("w_BP", row.w_bp);
        set_r("t_BP", row.t_bp);
        set_r("h_S", row.h_s);
        set_r("l_S", row.l_s);
        set_r("t_S", row.t_s);
        set_r("a_w", row.a_w);
        if (cfg.planted_collinear) set_r(collinear_column_name().c_str(), row.coll);
        set_l("Corrosion", row.corr);
        set_r("R", row.r);
        set_r("delta_sigma_i", row.dsi);
        set_r("N_i", row.n_i);
        set_r("delta_sigma_c50", row.target);
    }

    // missingness injection, feature columns only, after acceptance so the
    // stored targets always reflect the true (possibly hidden) values
    for (const auto& [col, rate] : cfg.missing_rates) {
        if (schema.is_target(col)) throw ConfigError("cannot inject missing target: " + col);
        size_t c = schema.index_of(col);
        Rng rng = base.stream("missing").stream(col);
        for (size_t r = 0; r < cfg.n_rows; ++r) {
            if (rng.uniform() < rate) b.set_missing(c, r);
        }
    }

    return {b.build(), truth};
}

}  // namespace fatml
