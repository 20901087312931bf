#include "singlab/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "singlab/gevrey.hpp"
#include "singlab/parallel.hpp"
#include "singlab/regularizer.hpp"

namespace singlab {

using json = nlohmann::ordered_json;

Subcommand subcommand_from_name(const std::string& name) {
    if (name == "classify") return Subcommand::Classify;
    if (name == "scaling") return Subcommand::Scaling;
    if (name == "gronwall") return Subcommand::Gronwall;
    if (name == "propagate") return Subcommand::Propagate;
    if (name == "all") return Subcommand::All;
    throw ConfigError("unknown subcommand '" + name + "'");
}

std::vector<double> build_xi_grid(const ExperimentConfig& cfg) {
    std::vector<double> grid;
    for (int k = cfg.kmin; k <= cfg.kmax; ++k) {
        for (int j = 0; j < cfg.per_dyad; ++j) {
            if (k == cfg.kmax && j > 0) break;  // keep 2^kmax as the last point
            grid.push_back(std::exp2(double(k) + double(j) / double(cfg.per_dyad)));
        }
    }
    return grid;
}

std::vector<double> build_eps_grid(const ExperimentConfig& cfg) {
    std::vector<double> grid(std::size_t(cfg.eps_points));
    const double la = std::log(cfg.eps_min);
    const double lb = std::log(cfg.eps_max);
    for (int i = 0; i < cfg.eps_points; ++i) {
        grid[std::size_t(i)] = std::exp(la + (lb - la) * double(i) / double(cfg.eps_points - 1));
    }
    return grid;
}

HypothesisReport effective_report(const CoefficientModel& model, const ExperimentConfig& cfg) {
    HypothesisReport rep = classify(model, cfg.quad_tol);
    if (cfg.regime_override) {
        rep.regime = *cfg.regime_override;
        rep.pq_sum = model.decl.pq_sum();
        rep.canonical_exponents = false;
    }
    return rep;
}

namespace {

json num_or_inf(double x) {
    if (std::isinf(x)) return "inf";
    return x;
}

double num_from(const json& j) {
    if (j.is_string()) return kInf;
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json config_echo(const ExperimentConfig& cfg, Subcommand sub) {
    json j;
    j["subcommand"] = sub == Subcommand::Classify    ? "classify"
                      : sub == Subcommand::Scaling   ? "scaling"
                      : sub == Subcommand::Gronwall  ? "gronwall"
                      : sub == Subcommand::Propagate ? "propagate"
                                                     : "all";
    j["model"] = {{"family", family_name(cfg.family)}, {"t0", cfg.t0},       {"T", cfg.T},
                  {"lambda0", cfg.lambda0},            {"c", cfg.c},         {"gamma", cfg.gamma},
                  {"m", cfg.m},                        {"phi", cfg.phi},     {"phi_random", cfg.phi_random},
                  {"theta", cfg.theta}};
    j["exponents"] = {{"p", cfg.decl.p},
                      {"q", num_or_inf(cfg.decl.q)},
                      {"r", cfg.decl.r},
                      {"s", num_or_inf(cfg.decl.s)}};
    j["plan"] = {{"z_margin", cfg.z_margin},
                 {"regime_override", cfg.regime_override ? json(regime_name(*cfg.regime_override)) : json()}};
    j["xi"] = {{"kmin", cfg.kmin}, {"kmax", cfg.kmax}, {"per_dyad", cfg.per_dyad}};
    j["eps"] = {{"min", cfg.eps_min}, {"max", cfg.eps_max}, {"points", cfg.eps_points}};
    j["data"] = {{"kind", cfg.profile.kind == GevreyProfile::Kind::Gevrey ? "gevrey" : "polynomial"},
                 {"sigma", cfg.profile.sigma},
                 {"delta", cfg.profile.delta},
                 {"M", cfg.profile.M},
                 {"zeta", cfg.profile.zeta},
                 {"v1", cfg.profile.v1_xi_scaled ? "xi_scaled" : "zero"}};
    j["tolerances"] = {{"tol", cfg.tol},
                       {"quad_tol", cfg.quad_tol},
                       {"delta_cut", cfg.delta_cut_rel},
                       {"slope_tol", cfg.slope_tol},
                       {"logslope_tol", cfg.logslope_tol},
                       {"retention_margin", cfg.retention_margin},
                       {"slack_factor", cfg.slack_factor}};
    j["seed"] = cfg.seed;
    return j;
}

json verdicts_from_doc(const json& doc) {
    json v = json::object();
    const json& cfg = doc.at("config");
    const double slope_tol = cfg.at("tolerances").at("slope_tol").get<double>();
    const double logslope_tol = cfg.at("tolerances").at("logslope_tol").get<double>();
    const double retention_margin = cfg.at("tolerances").at("retention_margin").get<double>();

    if (doc.contains("classification")) {
        v["admissible"] = doc.at("classification").at("regime").get<std::string>() != "Inadmissible";
    }
    if (doc.contains("scaling")) {
        const json& sc = doc.at("scaling");
        if (sc.at("degenerate_zero").get<bool>()) {
            v["scaling_degenerate_zero"] = true;
        } else {
            const double s1 = num_from(sc.at("i1_slope"));
            const double th1 = num_from(sc.at("i1_slope_theory"));
            const bool loglog = sc.at("i1_loglog").get<bool>();
            v["scaling_i1"] = std::abs(s1 - th1) <= (loglog ? logslope_tol : slope_tol);
            if (!loglog) {
                const double s2 = num_from(sc.at("i2_slope"));
                const double th2 = num_from(sc.at("i2_slope_theory"));
                v["scaling_i2"] = std::abs(s2 - th2) <= slope_tol;
            }
        }
    }
    if (doc.contains("modes")) {
        bool ok = true;
        for (const json& m : doc.at("modes")) {
            if (m.at("violation").get<bool>() ||
                m.at("margin").get<double>() > 1.0 + m.at("slack").get<double>()) {
                ok = false;
            }
        }
        v["gronwall_margins"] = ok;
    }
    if (doc.contains("terminal_bounds")) {
        bool ok = true;
        for (const json& t : doc.at("terminal_bounds")) {
            if (!t.at("ok").get<bool>()) ok = false;
        }
        v["terminal_bounds"] = ok;
    }
    if (doc.contains("decay")) {
        const json& d = doc.at("decay");
        if (d.at("kind").get<std::string>() == "gevrey") {
            const double sig_eff = num_from(d.at("sigma_eff"));
            const double sig_in = cfg.at("data").at("sigma").get<double>();
            v["decay_retention"] =
                std::isfinite(sig_eff) && 1.0 / sig_eff >= 1.0 / sig_in - retention_margin;
        } else {
            v["decay_loss_finite"] = std::isfinite(num_from(d.at("loss")));
        }
    }
    return v;
}

json scaling_to_json(const ScalingFit& fit) {
    json sc;
    sc["eps"] = fit.eps;
    sc["i1"] = fit.i1;
    sc["i2"] = fit.i2;
    sc["i1_err"] = fit.i1_err;
    sc["i2_err"] = fit.i2_err;
    sc["i1_slope"] = fit.i1_slope;
    sc["i1_intercept"] = fit.i1_intercept;
    sc["i1_residual"] = fit.i1_residual;
    sc["i2_slope"] = fit.i2_slope;
    sc["i2_intercept"] = fit.i2_intercept;
    sc["i2_residual"] = fit.i2_residual;
    sc["i1_slope_theory"] = fit.i1_slope_theory;
    sc["i2_slope_theory"] = fit.i2_slope_theory;
    sc["i1_loglog"] = fit.i1_loglog;
    sc["degenerate_zero"] = fit.degenerate_zero;
    sc["fitted_cprime"] = fit.fitted_cprime;
    sc["fitted_csecond"] = fit.fitted_csecond;
    sc["fitted_ctilde"] = fit.fitted_ctilde;
    if (!fit.thm3_splits.empty()) {
        json sp = json::array();
        for (const auto& s : fit.thm3_splits) {
            sp.push_back({{"far", s.far}, {"near", s.near}, {"split_distance", s.split_distance}});
        }
        sc["thm3_split"] = sp;
    }
    return sc;
}

}  // namespace

RunResult run_experiment(ExperimentConfig cfg, Subcommand sub) {
    const CoefficientModel model = resolve_model(cfg);
    const int workers = cfg.workers > 0 ? cfg.workers : default_workers();
    const double delta_cut = cfg.delta_cut_rel * model.T;

    json doc;
    doc["schema_version"] = 1;
    doc["config"] = config_echo(cfg, sub);

    HypothesisReport rep = effective_report(model, cfg);
    {
        json cl;
        cl["regime"] = regime_name(rep.regime);
        cl["h1_ok"] = rep.h1_ok;
        cl["h2_ok"] = rep.h2_ok;
        cl["suppl_ok"] = rep.suppl_ok;
        cl["l1_ok"] = rep.l1_ok;
        cl["beta_lq_norm"] = num_or_inf(rep.beta_lq_norm);
        cl["alpha_ls_norm"] = num_or_inf(rep.alpha_ls_norm);
        cl["pq_sum"] = rep.pq_sum;
        cl["rs_sum"] = rep.rs_sum;
        cl["canonical_exponents"] = rep.canonical_exponents;
        doc["classification"] = cl;
    }
    if (rep.regime != Regime::Inadmissible) {
        const ThresholdReport th = threshold(rep);
        doc["threshold"] = {{"sigma_star", th.cinf ? json("Cinf") : json(th.sigma_star)},
                            {"formula", th.formula}};
    }

    const bool want_scaling = sub == Subcommand::Scaling || sub == Subcommand::All;
    const bool want_gronwall = sub == Subcommand::Gronwall || sub == Subcommand::All;
    const bool want_propagate = sub == Subcommand::Propagate || sub == Subcommand::All;

    RunResult result;

    std::optional<RegularizationPlan> plan;
    std::optional<ScalingFit> fit;
    if ((want_scaling || want_gronwall) && rep.regime != Regime::Inadmissible) {
        if (model.t0_interior()) {
            throw ConfigError("scaling/gronwall need t0 at an endpoint (interior t0 is solve-only)");
        }
        const Side side = model.t0_at_right() ? Side::T0AtRight : Side::T0AtLeft;
        plan = make_plan(rep, cfg.z_margin, side);
        doc["plan"] = {{"regime", regime_name(plan->regime)}, {"side", side_name(plan->side)},
                       {"z", plan->z},                        {"eps_rule_e", plan->e},
                       {"pq_sum", plan->pq_sum},              {"rs_sum", plan->rs_sum},
                       {"r_eff", plan->r_eff}};
    }

    if (want_scaling && plan) {
        const std::vector<double> eps_grid = build_eps_grid(cfg);
        fit = fit_scaling(model, *plan, rep, eps_grid, cfg.quad_tol, workers);
        doc["scaling"] = scaling_to_json(*fit);
        std::string csv = "eps,I1,I2\n";
        for (std::size_t i = 0; i < fit->eps.size(); ++i) {
            csv += fmt(fit->eps[i]) + "," + fmt(fit->i1[i]) + "," + fmt(fit->i2[i]) + "\n";
        }
        result.csv_files["scaling.csv"] = csv;
    }

    if (want_gronwall && plan) {
        const std::vector<double> xi_grid = build_xi_grid(cfg);
        for (double xi : xi_grid) {
            if (plan->eps_for_xi(xi) > model.T) {
                throw ConfigError("eps rule gives eps > T for xi=" + std::to_string(xi) +
                                  "; raise xi.kmin");
            }
        }
        struct ModeRow {
            double xi = 0, eps = 0, E0 = 0, Emax = 0, margin = 0, slack = 0;
            std::int64_t steps = 0, rejected = 0;
            bool violation = false;
            double worst_t = 0;
            TerminalBoundReport tb;
            bool has_tb = false;
        };
        std::vector<ModeRow> rows(xi_grid.size());
        parallel_map(xi_grid.size(), workers, [&](std::size_t i) {
            const double xi = xi_grid[i];
            ModeRow& row = rows[i];
            row.xi = xi;
            row.eps = plan->eps_for_xi(xi);
            SolveOptions opt;
            opt.tol = cfg.tol;
            opt.delta_cut = delta_cut;
            const ModeTrajectory traj = solve_mode(model, xi, 1.0, 0.0, opt);
            row.steps = traj.steps;
            row.rejected = traj.rejected;
            EnergyCertificate cert;
            try {
                cert = energy_certificate(traj, model, *plan, row.eps, cfg.quad_tol);
            } catch (const CertificateViolation& cv) {
                row.violation = true;
                row.margin = cv.worst_ratio;
                row.worst_t = cv.worst_time;
                return;
            }
            row.E0 = cert.E0;
            row.Emax = cert.Emax;
            row.margin = cert.margin;
            row.slack = cert.slack;
            row.worst_t = cert.worst_t;
            if (fit) {
                row.tb = terminal_bound_check(traj, model, *plan, *fit, cert);
                row.has_tb = true;
            }
        });
        json modes = json::array();
        json tbs = json::array();
        json margins = json::array();
        std::string csv = "xi,eps,E0,Emax,margin\n";
        std::int64_t steps_total = 0;
        for (const auto& row : rows) {
            modes.push_back({{"xi", row.xi},
                             {"eps", row.eps},
                             {"E0", row.E0},
                             {"Emax", row.Emax},
                             {"margin", row.margin},
                             {"slack", row.slack},
                             {"worst_t", row.worst_t},
                             {"steps", row.steps},
                             {"rejected", row.rejected},
                             {"violation", row.violation}});
            margins.push_back(row.margin);
            steps_total += row.steps;
            csv += fmt(row.xi) + "," + fmt(row.eps) + "," + fmt(row.E0) + "," + fmt(row.Emax) +
                   "," + fmt(row.margin) + "\n";
            if (row.has_tb) {
                tbs.push_back({{"xi", row.tb.xi},
                               {"eps", row.tb.eps},
                               {"lhs", row.tb.lhs},
                               {"rhs", row.tb.rhs},
                               {"ratio", row.tb.ratio},
                               {"applies", row.tb.applies},
                               {"ok", row.tb.ok},
                               {"weight_exponent", row.tb.weight_exponent},
                               {"weight_exponent_display", row.tb.weight_exponent_display}});
            }
        }
        doc["modes"] = modes;
        doc["margins"] = margins;
        doc["steps_total"] = steps_total;
        if (!tbs.empty()) doc["terminal_bounds"] = tbs;
        result.csv_files["modes.csv"] = csv;
    }

    if (want_propagate) {
        const std::vector<double> xi_grid = build_xi_grid(cfg);
        const MadeData data = make_data(cfg.profile, xi_grid);
        if (data.modes.size() < 8) {
            throw ConfigError("propagate: fewer than 8 usable frequencies after the underflow guard");
        }
        struct DecayRow {
            double xi, mag0, magT;
            std::int64_t steps;
        };
        std::vector<DecayRow> rows(data.modes.size());
        parallel_map(data.modes.size(), workers, [&](std::size_t i) {
            const ModeData& md = data.modes[i];
            SolveOptions opt;
            opt.tol = cfg.tol;
            opt.delta_cut = delta_cut;
            const ModeTrajectory traj = solve_mode(model, md.xi, md.v0, md.v1, opt);
            rows[i] = {md.xi, std::abs(md.v0), traj.back().abs_v(), traj.steps};
        });
        std::vector<double> xs, m0, mT;
        for (const auto& r : rows) {
            xs.push_back(r.xi);
            m0.push_back(r.mag0);
            mT.push_back(r.magT);
        }
        const GevreyFit gfit = fit_decay(xs, mT, cfg.profile.kind);
        json d;
        d["kind"] = cfg.profile.kind == GevreyProfile::Kind::Gevrey ? "gevrey" : "polynomial";
        d["xi"] = xs;
        d["mag0"] = m0;
        d["magT"] = mT;
        d["dropped_xi"] = data.dropped_xi;
        d["sigma_eff"] = gfit.sigma_eff;
        d["delta_eff"] = gfit.delta_eff;
        d["raw_slope"] = gfit.raw_slope;
        d["residual"] = gfit.residual;
        d["monotone_warning"] = gfit.monotone_warning;
        if (cfg.profile.kind == GevreyProfile::Kind::PolynomialDecay) {
            const double order_in = 0.5 * cfg.profile.zeta;
            d["poly_order_in"] = order_in;
            d["poly_order_out"] = gfit.poly_order;
            d["loss"] = order_in - gfit.poly_order;
        }
        doc["decay"] = d;
        std::string csv = "xi,mag0,magT\n";
        for (const auto& r : rows) {
            csv += fmt(r.xi) + "," + fmt(r.mag0) + "," + fmt(r.magT) + "\n";
        }
        result.csv_files["decay.csv"] = csv;
    }

    // frozen top-level summary fields
    doc["regime"] = regime_name(rep.regime);
    doc["sigma_star"] = doc.contains("threshold") ? doc["threshold"]["sigma_star"] : json();
    doc["i1_slope"] = fit ? json(fit->i1_slope) : json();
    doc["i2_slope"] = fit ? json(fit->i2_slope) : json();
    if (!doc.contains("margins")) doc["margins"] = json::array();
    doc["sigma_eff"] = doc.contains("decay") && doc["decay"].contains("sigma_eff")
                           ? doc["decay"]["sigma_eff"]
                           : json();

    const json verdicts = verdicts_from_doc(doc);
    doc["verdicts"] = verdicts;
    bool pass = true;
    for (const auto& [k, val] : verdicts.items()) {
        if (!val.get<bool>()) pass = false;
    }
    doc["verdict_pass"] = pass;
    result.pass = pass;
    result.report_json = doc.dump(2) + "\n";
    return result;
}

void write_outputs(const RunResult& result, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir + "/report.json", std::ios::binary);
        if (!out) throw ConfigError("cannot write to output directory '" + dir + "'");
        out << result.report_json;
    }
    for (const auto& [name, content] : result.csv_files) {
        std::ofstream out(dir + "/" + name, std::ios::binary);
        out << content;
    }
}

std::map<std::string, bool> derive_verdicts(const std::string& report_json) {
    const json doc = json::parse(report_json);
    const json v = verdicts_from_doc(doc);
    std::map<std::string, bool> out;
    for (const auto& [k, val] : v.items()) out[k] = val.get<bool>();
    return out;
}

bool derive_overall(const std::string& report_json) {
    for (const auto& [k, v] : derive_verdicts(report_json)) {
        if (!v) return false;
    }
    return true;
}

}  // namespace singlab
