#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gsc/errors.hpp"

namespace gsc::cli {
namespace {

using nlohmann::json;

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(source + ": " + e.what());
    }
}

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) throw ValidationError(where + ": unknown key '" + item.key() + "'");
    }
}

template <typename T>
void get(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

double number(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
        throw ValidationError("expected a number or \"inf\", got \"" + s + "\"");
    }
    return v.get<double>();
}

eq::Vector vector_of(const json& v, const char* key) {
    if (!v.is_array()) throw ValidationError(std::string(key) + " must be an array");
    eq::Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = number(v[i]);
    return out;
}

void read_econ(const json& j, survival::EconParams& e) {
    only_keys(j, {"p", "r", "c_east", "c_south", "g", "delta", "rho", "M0", "horizon"}, "econ");
    get(j, "p", e.p);
    get(j, "r", e.r);
    get(j, "c_east", e.c_east);
    get(j, "c_south", e.c_south);
    get(j, "g", e.g);
    get(j, "delta", e.delta);
    get(j, "rho", e.rho);
    get(j, "M0", e.M0);
    get(j, "horizon", e.horizon);
}

void read_shocks(const json& j, survival::ShockProcess& s) {
    only_keys(j, {"epsilon", "zeta_bar", "zeta_lo", "zeta_hi", "ambiguity_lo", "ambiguity_hi"}, "shocks");
    get(j, "epsilon", s.epsilon);
    get(j, "zeta_bar", s.zeta_bar);
    get(j, "zeta_lo", s.zeta_lo);
    get(j, "zeta_hi", s.zeta_hi);
    get(j, "ambiguity_lo", s.ambiguity_lo);
    get(j, "ambiguity_hi", s.ambiguity_hi);
}

void read_scenario(const json& j, survival::ScenarioSpec& sc, int default_period) {
    only_keys(j, {"uncertainty", "organization", "shock", "period"}, "scenario");
    if (j.contains("uncertainty")) sc.uncertainty = survival::parse_uncertainty(j.at("uncertainty").get<std::string>());
    if (j.contains("organization")) {
        sc.organization = survival::parse_organization(j.at("organization").get<std::string>());
    }
    int period = default_period;
    get(j, "period", period);
    const std::string shock = j.value("shock", std::string("none"));
    if (shock == "none") {
        sc.realization = survival::Realization::none();
    } else if (shock == "east") {
        sc.realization = survival::Realization::east(period);
    } else if (shock == "south") {
        sc.realization = survival::Realization::south(period);
    } else {
        throw ValidationError("scenario.shock must be none, east or south");
    }
}

void read_policy(const json& j, policy::PolicyConfig& p) {
    only_keys(j,
              {"floor", "cap", "subsidy_grid", "replications", "seed", "band_levels", "horizon", "base_year",
               "growth", "grid_step", "paired"},
              "policy");
    get(j, "floor", p.floor);
    get(j, "cap", p.cap);
    if (j.contains("subsidy_grid")) {
        const auto& g = j.at("subsidy_grid");
        p.subsidy_grid.clear();
        if (g.is_array()) {
            for (const auto& v : g) p.subsidy_grid.push_back(v.get<double>());
        } else {
            only_keys(g, {"from", "to", "step"}, "policy.subsidy_grid");
            const double from = g.at("from").get<double>();
            const double to = g.at("to").get<double>();
            const double step = g.at("step").get<double>();
            if (!(step > 0.0) || to < from) throw ValidationError("policy.subsidy_grid needs step > 0 and to >= from");
            const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
            for (long k = 0; k <= n; ++k) p.subsidy_grid.push_back(from + step * static_cast<double>(k));
        }
    }
    get(j, "replications", p.replications);
    get(j, "seed", p.seed);
    if (j.contains("band_levels")) {
        const auto levels = j.at("band_levels").get<std::vector<int>>();
        if (levels.size() != p.band_levels.size()) throw ValidationError("policy.band_levels needs three levels");
        for (std::size_t i = 0; i < levels.size(); ++i) p.band_levels[i] = levels[i];
    }
    get(j, "horizon", p.horizon);
    get(j, "base_year", p.base_year);
    get(j, "growth", p.growth);
    get(j, "grid_step", p.grid_step);
    get(j, "paired", p.paired);
}

}  // namespace

SimConfig parse_sim_config(const std::string& text, const std::string& source) {
    const json j = parse_json(text, source);
    SimConfig cfg;
    try {
        only_keys(j, {"econ", "shocks", "scenario", "shock_period", "grid_step", "policy"}, source);
        get(j, "shock_period", cfg.shock_period);
        get(j, "grid_step", cfg.grid_step);
        if (j.contains("econ")) read_econ(j.at("econ"), cfg.econ);
        if (j.contains("shocks")) read_shocks(j.at("shocks"), cfg.shocks);
        if (j.contains("scenario")) read_scenario(j.at("scenario"), cfg.scenario, cfg.shock_period);
        if (j.contains("policy")) read_policy(j.at("policy"), cfg.policy);
    } catch (const json::exception& e) {
        throw ValidationError(source + ": " + e.what());
    }
    cfg.econ.validate();
    cfg.shocks.validate();
    cfg.policy.validate();
    return cfg;
}

SimConfig load_sim_config(const std::filesystem::path& path) { return parse_sim_config(slurp(path), path.string()); }

eq::WorldEconomy parse_world(const std::string& text, const std::string& source) {
    const json j = parse_json(text, source);
    eq::WorldEconomy e;
    try {
        only_keys(j, {"J", "L", "T1", "T2", "tau", "alpha2", "theta", "sigma", "gamma", "single_stage", "names"},
                  source);
        e.J = j.at("J").get<int>();
        e.L = vector_of(j.at("L"), "L");
        e.T2 = vector_of(j.at("T2"), "T2");
        e.T1 = j.contains("T1") ? vector_of(j.at("T1"), "T1") : eq::Vector::Ones(e.T2.size());
        const auto& tau = j.at("tau");
        if (!tau.is_array()) throw ValidationError("tau must be an array of rows");
        e.tau.resize(static_cast<Eigen::Index>(tau.size()), tau.empty() ? 0 : static_cast<Eigen::Index>(tau[0].size()));
        for (std::size_t r = 0; r < tau.size(); ++r) {
            if (!tau[r].is_array() || static_cast<Eigen::Index>(tau[r].size()) != e.tau.cols()) {
                throw ValidationError("tau rows must have equal length");
            }
            for (std::size_t c = 0; c < tau[r].size(); ++c) {
                e.tau(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(tau[r][c]);
            }
        }
        get(j, "alpha2", e.alpha2);
        get(j, "theta", e.theta);
        get(j, "sigma", e.sigma);
        get(j, "gamma", e.gamma);
        get(j, "single_stage", e.single_stage);
        get(j, "names", e.names);
    } catch (const json::exception& ex) {
        throw ValidationError(source + ": " + ex.what());
    }
    e.validate();
    return e;
}

eq::WorldEconomy load_world(const std::filesystem::path& path) { return parse_world(slurp(path), path.string()); }

std::string world_to_json(const eq::WorldEconomy& econ) {
    auto vec = [](const eq::Vector& v) {
        json a = json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
        return a;
    };
    json tau = json::array();
    for (Eigen::Index r = 0; r < econ.tau.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < econ.tau.cols(); ++c) {
            const double t = econ.tau(r, c);
            if (std::isinf(t)) {
                row.push_back("inf");
            } else {
                row.push_back(t);
            }
        }
        tau.push_back(row);
    }
    json j{{"J", econ.J},         {"L", vec(econ.L)},       {"T1", vec(econ.T1)},     {"T2", vec(econ.T2)},
           {"tau", tau},          {"alpha2", econ.alpha2},  {"theta", econ.theta},    {"sigma", econ.sigma},
           {"gamma", econ.gamma}, {"single_stage", econ.single_stage}};
    if (!econ.names.empty()) j["names"] = econ.names;
    return j.dump(2) + "\n";
}

}  // namespace gsc::cli
