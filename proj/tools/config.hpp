#pragma once

#include <filesystem>
#include <string>

#include "gsc/equilibrium.hpp"
#include "gsc/policy.hpp"
#include "gsc/survival.hpp"

namespace gsc::cli {

struct SimConfig {
    survival::EconParams econ;
    survival::ShockProcess shocks;
    survival::ScenarioSpec scenario;
    int shock_period = 10;
    double grid_step = 0.01;
    policy::PolicyConfig policy;
};

/// Missing keys keep their defaults; unknown keys are rejected.
SimConfig load_sim_config(const std::filesystem::path& path);
SimConfig parse_sim_config(const std::string& text, const std::string& source = "<memory>");

/// Trade costs may be written as the string "inf".
eq::WorldEconomy load_world(const std::filesystem::path& path);
eq::WorldEconomy parse_world(const std::string& text, const std::string& source = "<memory>");
std::string world_to_json(const eq::WorldEconomy& econ);

}  // namespace gsc::cli
