#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "smbm/annealer.hpp"
#include "smbm/bo.hpp"
#include "smbm/error.hpp"
#include "smbm/timetable.hpp"

namespace smbm::cli {

using nlohmann::json;

enum class Scale { desk, paper };

// Bad or inconsistent configuration; exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunContext {
  json config = json::object();  // the subcommand's block
  std::uint64_t seed = 0;
  std::filesystem::path out;
  Scale scale = Scale::desk;
  unsigned threads = 1;
};

// Reduced budgets for quick local runs; paper scale keeps 2000/3000/100.
SaaConfig default_saa(Scale scale);
std::size_t default_bo_steps(Scale scale);

// "demo" or an inline problem object:
//   {"courses": C, "teachers": T, "rooms": R, "periods": P,
//    "coefficients": [c1..c7], "load": [[N_ij]...] (C x T),
//    "coupling": "room_exclusive" | "printed",
//    "name", "course_names", "teacher_names", "room_names", "period_names"}
TimetableProblem problem_from_json(const json& spec);

// Sets one named design coordinate: gamma, xi_cb, alpha_t, t0, or t_v
// (constant temperature: t0 = t_v, alpha_t = inf).
void set_design_value(DesignPoint& point, const std::string& name, double value);
// Demo defaults: no noise, T0 = kDemoInitialTemperature, alpha_t = 3.
DesignPoint default_design();
DesignPoint design_from_json(const json& spec, DesignPoint base = default_design());

// gamma_alpha: gamma x alpha_t, gamma_tv: gamma x t_v, xi_alpha: xi_cb x alpha_t.
bo::DesignSpace named_space(const std::string& kind);

// SAA expected cost at the design point given by x over `space`. With common
// random numbers every evaluation reuses one chain seed.
bo::Objective saa_objective(const AnnealTarget& target, const bo::DesignSpace& space, const DesignPoint& base,
                            const SaaConfig& saa, std::uint64_t seed, bool common_random_numbers,
                            unsigned threads);

void cmd_device(const RunContext& ctx);
void cmd_kmc(const RunContext& ctx);
void cmd_anneal(const RunContext& ctx);
void cmd_sweep(const RunContext& ctx);
void cmd_bo(const RunContext& ctx);

// Full command line; returns the process exit code.
int run(int argc, char** argv);

}  // namespace smbm::cli
