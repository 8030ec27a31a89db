#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "commands.hpp"
#include "io.hpp"

namespace smbm::cli {

namespace {

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Stochastic memristor Boltzmann machine simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string scale_name;
  unsigned threads = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (64-bit)");
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--scale", scale_name, "Budget: desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  const std::vector<std::pair<std::string, std::string>> subcommands{
      {"device", "Sigmoid and gate-voltage temperature curves, optional sigmoid fit"},
      {"kmc", "Kinetic Monte Carlo SET-voltage histogram and probability sweep"},
      {"anneal", "Anneal a timetable instance at one design point"},
      {"sweep", "Expected cost over a grid or list of design points"},
      {"bo", "Bayesian optimization of the expected cost over a design space"}};
  for (const auto& [name, help] : subcommands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    const json file = load_config(config_path);
    RunContext ctx;
    ctx.config = file.value(sub, json::object());
    if (!ctx.config.is_object()) throw ConfigError("config block '" + sub + "' must be an object");
    if (seed_opt->count() > 0) {
      ctx.seed = seed;
    } else if (file.contains("master_seed")) {
      if (!file.at("master_seed").is_number_unsigned()) throw ConfigError("master_seed must be a non-negative integer");
      ctx.seed = file.at("master_seed").get<std::uint64_t>();
    }
    if (scale_name.empty()) scale_name = file.value("scale", std::string("desk"));
    if (scale_name != "desk" && scale_name != "paper") throw ConfigError("scale must be desk or paper");
    ctx.scale = scale_name == "paper" ? Scale::paper : Scale::desk;
    if (out_dir.empty()) out_dir = file.value("output_dir", std::string("out/") + sub);
    ctx.out = out_dir;
    ctx.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;

    if (sub == "device") cmd_device(ctx);
    else if (sub == "kmc") cmd_kmc(ctx);
    else if (sub == "anneal") cmd_anneal(ctx);
    else if (sub == "sweep") cmd_sweep(ctx);
    else cmd_bo(ctx);
    std::cout << "wrote " << ctx.out.string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidParameter& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace smbm::cli
