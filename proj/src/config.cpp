#include "singlab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "singlab/parallel.hpp"

namespace singlab {

int default_workers() {
    if (const char* env = std::getenv("SINGLAB_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? int(hc) : 1;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_num(const std::string& key, const std::string& v) {
    if (v == "inf" || v == "+inf") return kInf;
    std::size_t pos = 0;
    double x = 0;
    try {
        x = std::stod(v, &pos);
    } catch (...) {
        throw ConfigError("key '" + key + "': cannot parse number '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError("key '" + key + "': trailing junk in '" + v + "'");
    return x;
}

int parse_int(const std::string& key, const std::string& v) {
    const double x = parse_num(key, v);
    if (x != double(int(x))) throw ConfigError("key '" + key + "': expected an integer");
    return int(x);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "model" && section != "exponents" && section != "plan" &&
                section != "xi" && section != "eps" && section != "data" &&
                section != "tolerances" && section != "output") {
                throw ConfigError(where + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) throw ConfigError(where + ": empty key or value");
        const std::string skey = section + "." + key;

        if (skey == "model.family") cfg.family = family_from_name(val);
        else if (skey == "model.t0") cfg.t0 = parse_num(skey, val);
        else if (skey == "model.T") cfg.T = parse_num(skey, val);
        else if (skey == "model.lambda0") cfg.lambda0 = parse_num(skey, val);
        else if (skey == "model.c") cfg.c = parse_num(skey, val);
        else if (skey == "model.gamma") cfg.gamma = parse_num(skey, val);
        else if (skey == "model.m") cfg.m = parse_num(skey, val);
        else if (skey == "model.phi") {
            if (val == "random") cfg.phi_random = true;
            else cfg.phi = parse_num(skey, val);
        } else if (skey == "model.theta") cfg.theta = parse_num(skey, val);
        else if (skey == "exponents.p") cfg.decl.p = parse_num(skey, val);
        else if (skey == "exponents.q") cfg.decl.q = parse_num(skey, val);
        else if (skey == "exponents.r") cfg.decl.r = parse_num(skey, val);
        else if (skey == "exponents.s") cfg.decl.s = parse_num(skey, val);
        else if (skey == "plan.z_margin") cfg.z_margin = parse_num(skey, val);
        else if (skey == "plan.regime") cfg.regime_override = regime_from_name(val);
        else if (skey == "xi.kmin") cfg.kmin = parse_int(skey, val);
        else if (skey == "xi.kmax") cfg.kmax = parse_int(skey, val);
        else if (skey == "xi.per_dyad") cfg.per_dyad = parse_int(skey, val);
        else if (skey == "eps.min") cfg.eps_min = parse_num(skey, val);
        else if (skey == "eps.max") cfg.eps_max = parse_num(skey, val);
        else if (skey == "eps.points") cfg.eps_points = parse_int(skey, val);
        else if (skey == "data.kind") {
            if (val == "gevrey") cfg.profile.kind = GevreyProfile::Kind::Gevrey;
            else if (val == "polynomial") cfg.profile.kind = GevreyProfile::Kind::PolynomialDecay;
            else throw ConfigError(where + ": data.kind must be gevrey or polynomial");
        } else if (skey == "data.sigma") cfg.profile.sigma = parse_num(skey, val);
        else if (skey == "data.delta") cfg.profile.delta = parse_num(skey, val);
        else if (skey == "data.M") cfg.profile.M = parse_num(skey, val);
        else if (skey == "data.zeta") cfg.profile.zeta = parse_num(skey, val);
        else if (skey == "data.v1") {
            if (val == "zero") cfg.profile.v1_xi_scaled = false;
            else if (val == "xi_scaled") cfg.profile.v1_xi_scaled = true;
            else throw ConfigError(where + ": data.v1 must be zero or xi_scaled");
        } else if (skey == "tolerances.tol") cfg.tol = parse_num(skey, val);
        else if (skey == "tolerances.quad_tol") cfg.quad_tol = parse_num(skey, val);
        else if (skey == "tolerances.delta_cut") cfg.delta_cut_rel = parse_num(skey, val);
        else if (skey == "tolerances.slope_tol") cfg.slope_tol = parse_num(skey, val);
        else if (skey == "tolerances.logslope_tol") cfg.logslope_tol = parse_num(skey, val);
        else if (skey == "tolerances.retention_margin") cfg.retention_margin = parse_num(skey, val);
        else if (skey == "tolerances.slack_factor") cfg.slack_factor = parse_num(skey, val);
        else if (skey == "output.dir") cfg.out_dir = val;
        else if (skey == "output.workers") cfg.workers = parse_int(skey, val);
        else throw ConfigError(where + ": unknown key '" + key + "' in section [" + section + "]");
    }

    if (!(cfg.tol > 0.0) || !(cfg.quad_tol > 0.0)) throw ConfigError("tolerances must be positive");
    if (!(cfg.delta_cut_rel >= 1e-12)) throw ConfigError("delta_cut must be >= 1e-12 (relative to T)");
    if (cfg.kmax < cfg.kmin) throw ConfigError("xi.kmax must be >= xi.kmin");
    if (cfg.per_dyad < 1) throw ConfigError("xi.per_dyad must be >= 1");
    if (cfg.eps_points < 2) throw ConfigError("eps.points must be >= 2");
    if (!(cfg.eps_min > 0.0 && cfg.eps_max > cfg.eps_min)) throw ConfigError("bad eps range");
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

CoefficientModel resolve_model(ExperimentConfig& cfg) {
    if (cfg.phi_random) {
        std::mt19937_64 gen(cfg.seed);
        std::uniform_real_distribution<double> dist(0.0, 2.0 * 3.14159265358979323846);
        cfg.phi = dist(gen);
    }
    return CoefficientModel::make(cfg.family, cfg.t0, cfg.T, cfg.lambda0, cfg.c, cfg.gamma, cfg.m,
                                  cfg.phi, cfg.theta, cfg.decl);
}

std::string config_help() {
    return R"(Config file: flat key = value lines under bracketed sections.
Write 'inf' for an infinite exponent. '#' starts a comment.

[model]      family = constant | power_blowup | oscillatory | log_growth
             t0, T, lambda0        singular time, horizon, hyperbolicity floor
             c                     amplitude (> 0)
             gamma                 power_blowup exponent (>= 0)
             m, phi                oscillatory exponent and phase ('phi = random'
                                   draws from the seeded generator)
             theta                 log_growth exponent in (0,1]
[exponents]  p, q, r, s            declared hypothesis exponents (q,s in [1,inf])
[plan]       z_margin              margin above the critical z (default 0.5)
             regime                optional override: thm1|thm2|thm3|thm4
[xi]         kmin, kmax, per_dyad  dyadic frequency grid 2^kmin..2^kmax
[eps]        min, max, points      log-spaced smoothing-scale grid
[data]       kind = gevrey | polynomial
             sigma, delta, M       Gevrey profile M exp(-delta xi^(1/sigma))
             zeta                  polynomial profile M xi^(-zeta/2)
             v1 = zero | xi_scaled
[tolerances] tol                   ODE tolerance (default 1e-8)
             quad_tol              quadrature tolerance (default 1e-6)
             delta_cut             cut around t0, relative to T (default 1e-8)
             slope_tol             scaling-slope verdict margin (default 0.15)
             logslope_tol          Thm4 log-slope verdict margin (default 0.2)
             retention_margin      decay-retention verdict margin (default 0.05)
             slack_factor          certificate slack multiplier (default 100)
[output]     dir                   output directory
             workers               worker threads (0: SINGLAB_WORKERS or cores)
)";
}

}  // namespace singlab
