#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>

#include "io.hpp"
#include "smbm/device_model.hpp"
#include "smbm/kmc.hpp"
#include "smbm/random.hpp"

namespace smbm::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

// Typed lookup with a default; wrong types become config errors.
template <typename T>
T get(const json& block, const char* key, T fallback) {
  if (!block.contains(key) || block.at(key).is_null()) return fallback;
  try {
    return block.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void check_keys(const json& block, const std::set<std::string>& allowed, const std::string& where) {
  if (block.is_null()) return;
  if (!block.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& item : block.items()) {
    if (!allowed.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

// Collects output files and writes manifest.json last.
class Manifest {
 public:
  Manifest(const RunContext& ctx, std::string subcommand)
      : ctx_(ctx), subcommand_(std::move(subcommand)), start_(std::chrono::steady_clock::now()) {
    std::filesystem::create_directories(ctx.out);
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    started_ = buf;
  }

  std::filesystem::path file(const std::string& name) {
    outputs_.push_back(name);
    return ctx_.out / name;
  }

  void write(const json& resolved, const json& summary = json::object()) const {
    json m;
    m["tool"] = "smbm";
    m["version"] = kVersion;
    m["subcommand"] = subcommand_;
    m["master_seed"] = ctx_.seed;
    m["scale"] = ctx_.scale == Scale::paper ? "paper" : "desk";
    m["threads"] = ctx_.threads;
    m["config"] = resolved;
    m["outputs"] = outputs_;
    m["summary"] = summary;
    m["started_utc"] = started_;
    m["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
#if defined(__VERSION__)
    m["compiler"] = __VERSION__;
#endif
    std::ofstream out(ctx_.out / "manifest.json");
    out << m.dump(2) << '\n';
    if (!out) throw Error("cannot write manifest.json");
  }

 private:
  const RunContext& ctx_;
  std::string subcommand_;
  std::chrono::steady_clock::time_point start_;
  std::string started_;
  std::vector<std::string> outputs_;
};

void write_json(const std::filesystem::path& path, const json& value) {
  std::ofstream out(path);
  out << value.dump(2) << '\n';
  if (!out) throw Error("cannot write " + path.string());
}

// JSON numbers cannot hold inf; alpha_t = inf is spelled as a string.
json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && (v == "inf" || v == "infinity")) return std::numeric_limits<double>::infinity();
  throw ConfigError("'" + key + "' must be a number");
}

SaaConfig saa_from_json(const json& block, Scale scale) {
  check_keys(block, {"burn_in", "avg_window", "n_chains"}, "saa");
  SaaConfig saa = default_saa(scale);
  if (block.is_object()) {
    saa.burn_in = get<std::size_t>(block, "burn_in", saa.burn_in);
    saa.avg_window = get<std::size_t>(block, "avg_window", saa.avg_window);
    saa.n_chains = get<std::size_t>(block, "n_chains", saa.n_chains);
  }
  saa.validate();
  return saa;
}

json saa_to_json(const SaaConfig& saa) {
  return {{"burn_in", saa.burn_in}, {"avg_window", saa.avg_window}, {"n_chains", saa.n_chains}};
}

json design_to_json(const DesignPoint& p) {
  return {{"gamma", p.noise.gamma},
          {"xi_cb", p.noise.xi_cb},
          {"t0", p.schedule.t0},
          {"alpha_t", number_or_inf(p.schedule.alpha_t)}};
}

struct ProblemSetup {
  TimetableProblem problem;
  double gain;
  json resolved;
};

ProblemSetup problem_setup(const json& block) {
  const json spec = block.contains("problem") ? block.at("problem") : json("demo");
  TimetableProblem prob = problem_from_json(spec);
  const double gain = get<double>(block, "gain", kDemoAmplifierGain);
  if (!(gain > 0.0) || !std::isfinite(gain)) throw ConfigError("'gain' must be finite and > 0");
  return {std::move(prob), gain, spec};
}

std::string sanitize_label(const std::string& label) {
  std::string out;
  for (char c : label) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out.empty() ? "point" : out;
}

}  // namespace

SaaConfig default_saa(Scale scale) {
  if (scale == Scale::paper) return SaaConfig{2000, 3000, 100};
  return SaaConfig{500, 1000, 20};
}

std::size_t default_bo_steps(Scale scale) { return scale == Scale::paper ? 25 : 15; }

TimetableProblem problem_from_json(const json& spec) {
  if (spec.is_string()) {
    if (spec == "demo") return canonical_demo();
    throw ConfigError("unknown problem '" + spec.get<std::string>() + "' (use \"demo\" or an object)");
  }
  check_keys(spec,
             {"courses", "teachers", "rooms", "periods", "coefficients", "load", "coupling", "name", "course_names",
              "teacher_names", "room_names", "period_names"},
             "problem");
  for (const char* key : {"courses", "teachers", "rooms", "periods", "coefficients", "load"}) {
    if (!spec.contains(key)) throw ConfigError(std::string("problem is missing '") + key + "'");
  }
  const auto courses = get<std::size_t>(spec, "courses", 0);
  const auto teachers = get<std::size_t>(spec, "teachers", 0);
  const auto rooms = get<std::size_t>(spec, "rooms", 0);
  const auto periods = get<std::size_t>(spec, "periods", 0);
  const auto coeff_list = get<std::vector<double>>(spec, "coefficients", {});
  if (coeff_list.size() != 7) throw ConfigError("problem 'coefficients' needs exactly 7 values");
  std::array<double, 7> coeffs{};
  std::copy(coeff_list.begin(), coeff_list.end(), coeffs.begin());
  const auto rows = get<std::vector<std::vector<double>>>(spec, "load", {});
  if (rows.size() != courses) throw ConfigError("problem 'load' needs one row per course");
  std::vector<double> load;
  for (const auto& row : rows) {
    if (row.size() != teachers) throw ConfigError("problem 'load' rows need one entry per teacher");
    load.insert(load.end(), row.begin(), row.end());
  }
  const auto coupling = get<std::string>(spec, "coupling", "room_exclusive");
  CouplingForm form;
  if (coupling == "room_exclusive") {
    form = CouplingForm::room_exclusive;
  } else if (coupling == "printed") {
    form = CouplingForm::printed;
  } else {
    throw ConfigError("problem 'coupling' must be room_exclusive or printed");
  }
  TimetableProblem prob(courses, teachers, rooms, periods, std::move(load), coeffs, form);
  prob.name = get<std::string>(spec, "name", "custom");
  auto names = [&](const char* key, std::size_t n) {
    auto v = get<std::vector<std::string>>(spec, key, {});
    if (!v.empty() && v.size() != n) throw ConfigError(std::string("problem '") + key + "' has the wrong length");
    return v;
  };
  prob.course_names = names("course_names", courses);
  prob.teacher_names = names("teacher_names", teachers);
  prob.room_names = names("room_names", rooms);
  prob.period_names = names("period_names", periods);
  return prob;
}

void set_design_value(DesignPoint& point, const std::string& name, double value) {
  if (name == "gamma") {
    point.noise.gamma = value;
  } else if (name == "xi_cb") {
    point.noise.xi_cb = value;
  } else if (name == "alpha_t") {
    point.schedule.alpha_t = value;
  } else if (name == "t0") {
    point.schedule.t0 = value;
  } else if (name == "t_v") {
    point.schedule.t0 = value;
    point.schedule.alpha_t = std::numeric_limits<double>::infinity();
  } else {
    throw ConfigError("unknown design parameter '" + name + "'");
  }
}

DesignPoint default_design() {
  DesignPoint p;
  p.schedule.t0 = kDemoInitialTemperature;
  return p;
}

DesignPoint design_from_json(const json& spec, DesignPoint base) {
  if (spec.is_null()) return base;
  if (!spec.is_object()) throw ConfigError("design point must be a JSON object");
  for (const char* key : {"gamma", "xi_cb", "t0", "alpha_t", "t_v"}) {
    if (spec.contains(key)) set_design_value(base, key, read_number(spec.at(key), key));
  }
  return base;
}

bo::DesignSpace named_space(const std::string& kind) {
  if (kind == "gamma_alpha") return {{{"gamma", 0.0, 1.0}, {"alpha_t", 2.0, 4.0}}};
  if (kind == "gamma_tv") return {{{"gamma", 0.0, 1.0}, {"t_v", 0.01, 1.0}}};
  if (kind == "xi_alpha") return {{{"xi_cb", 0.0, 0.5}, {"alpha_t", 2.0, 4.0}}};
  throw ConfigError("unknown design space '" + kind + "' (gamma_alpha, gamma_tv, xi_alpha)");
}

bo::Objective saa_objective(const AnnealTarget& target, const bo::DesignSpace& space, const DesignPoint& base,
                            const SaaConfig& saa, std::uint64_t seed, bool common_random_numbers,
                            unsigned threads) {
  return [=](std::span<const double> x, std::size_t index) {
    DesignPoint point = base;
    for (std::size_t d = 0; d < space.dims(); ++d) set_design_value(point, space.axes[d].name, x[d]);
    const std::uint64_t chain_seed = derive_seed(seed, common_random_numbers ? 0 : index, 0x6f626a);
    const SaaEstimate e = expected_cost(target, point, saa, chain_seed, threads);
    return bo::Evaluation{e.mean, e.std_error};
  };
}

void cmd_device(const RunContext& ctx) {
  const json& cfg = ctx.config;
  check_keys(cfg, {"v_min", "v_max", "points", "curves", "fet", "gate_voltages", "v_g_min", "v_g_max", "v_g_points",
                   "fit_file", "v0"},
             "device");
  Manifest manifest(ctx, "device");

  const json fet_cfg = cfg.value("fet", json::object());
  check_keys(fet_cfg, {"t_v0", "z_prime", "v_t"}, "device.fet");
  FetModel fet;
  fet.t_v0 = get<double>(fet_cfg, "t_v0", fet.t_v0);
  fet.z_prime = get<double>(fet_cfg, "z_prime", fet.z_prime);
  fet.v_t = get<double>(fet_cfg, "v_t", fet.v_t);
  fet.validate();

  const double v_min = get<double>(cfg, "v_min", 0.0);
  const double v_max = get<double>(cfg, "v_max", 2.0);
  const auto points = get<std::size_t>(cfg, "points", 201);
  if (!(v_min < v_max) || points < 2) throw ConfigError("device needs v_min < v_max and points >= 2");
  const double v0 = get<double>(cfg, "v0", NeuronParams{}.v0_mean);

  struct Curve {
    std::string label;
    NeuronParams params;
  };
  std::vector<Curve> curves;
  json resolved_curves = json::array();
  const auto gates = get<std::vector<double>>(cfg, "gate_voltages", {-10.0, 20.0, 50.0});
  if (cfg.contains("curves")) {
    if (!cfg.at("curves").is_array()) throw ConfigError("device 'curves' must be an array");
    std::size_t idx = 0;
    for (const auto& c : cfg.at("curves")) {
      check_keys(c, {"label", "v0", "t_v", "gamma"}, "device.curves");
      NeuronParams p;
      p.v0_mean = get<double>(c, "v0", v0);
      p.t_v = get<double>(c, "t_v", p.t_v);
      p.gamma = get<double>(c, "gamma", 0.0);
      p.validate();
      curves.push_back({get<std::string>(c, "label", "curve" + std::to_string(idx++)), p});
    }
  } else {
    for (double vg : gates) {
      NeuronParams p;
      p.v0_mean = v0;
      p.t_v = effective_temperature(fet, vg);
      curves.push_back({"vg=" + format_number(vg), p});
    }
  }

  CsvWriter sig(manifest.file("sigmoid.csv"), {"curve", "v0", "t_v", "gamma", "v_bias", "probability"});
  CsvWriter widths(manifest.file("curves.csv"), {"curve", "v0", "t_v", "gamma", "width_10_90"});
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < points; ++i) {
      const double v = v_min + (v_max - v_min) * double(i) / double(points - 1);
      sig.cell(c.label).cell(c.params.v0_mean).cell(c.params.t_v).cell(c.params.gamma).cell(v);
      sig.cell(smeared_set_probability(c.params, v)).end_row();
    }
    // 10-90 % width of the noiseless sigmoid: 2 ln 9 t_v.
    widths.cell(c.label).cell(c.params.v0_mean).cell(c.params.t_v).cell(c.params.gamma);
    widths.cell(2.0 * std::log(9.0) * c.params.t_v).end_row();
    resolved_curves.push_back({{"label", c.label}, {"v0", c.params.v0_mean}, {"t_v", c.params.t_v},
                               {"gamma", c.params.gamma}});
  }

  const double g_min = get<double>(cfg, "v_g_min", -15.0);
  const double g_max = get<double>(cfg, "v_g_max", 60.0);
  const auto g_points = get<std::size_t>(cfg, "v_g_points", 151);
  if (!(g_min < g_max) || g_points < 2) throw ConfigError("device needs v_g_min < v_g_max and v_g_points >= 2");
  CsvWriter tv(manifest.file("tv_vs_vg.csv"), {"v_g", "t_v"});
  for (std::size_t i = 0; i < g_points; ++i) {
    const double vg = g_min + (g_max - g_min) * double(i) / double(g_points - 1);
    if (vg <= fet.v_t) continue;
    tv.cell(vg).cell(effective_temperature(fet, vg)).end_row();
  }

  json resolved = {{"v_min", v_min}, {"v_max", v_max}, {"points", points}, {"v0", v0},
                   {"curves", resolved_curves}, {"gate_voltages", gates},
                   {"fet", {{"t_v0", fet.t_v0}, {"z_prime", fet.z_prime}, {"v_t", fet.v_t}}},
                   {"v_g_min", g_min}, {"v_g_max", g_max}, {"v_g_points", g_points}};
  json summary = json::object();
  if (cfg.contains("fit_file") && !cfg.at("fit_file").is_null()) {
    const auto path = get<std::string>(cfg, "fit_file", "");
    resolved["fit_file"] = path;
    const auto data = read_fit_csv(path);
    const SigmoidFit fit = fit_sigmoid(data);
    summary = {{"v0", fit.v0}, {"t_v", fit.t_v}, {"residual", fit.residual},
               {"initial_residual", fit.initial_residual}, {"iterations", fit.iterations},
               {"points", data.size()}};
    write_json(manifest.file("fit.json"), summary);
  }
  manifest.write(resolved, summary);
}

void cmd_kmc(const RunContext& ctx) {
  const json& cfg = ctx.config;
  check_keys(cfg, {"lattice", "params", "series", "samples", "ramp_rate", "v_max", "hist_bins", "hist_min", "hist_max",
                   "t0", "bias_min", "bias_max", "bias_points"},
             "kmc");

  const json lat_cfg = cfg.value("lattice", json::object());
  check_keys(lat_cfg, {"nx", "ny", "nz", "spacing_nm"}, "kmc.lattice");
  kmc::LatticeDims dims;
  dims.nx = get<std::size_t>(lat_cfg, "nx", dims.nx);
  dims.ny = get<std::size_t>(lat_cfg, "ny", dims.ny);
  dims.nz = get<std::size_t>(lat_cfg, "nz", dims.nz);
  dims.spacing_nm = get<double>(lat_cfg, "spacing_nm", dims.spacing_nm);
  dims.validate();

  const json par_cfg = cfg.value("params", json::object());
  check_keys(par_cfg, {"r0", "e_b_gen", "e_b_hop", "e_b_rec", "d", "kT"}, "kmc.params");
  kmc::KmcParams params = kmc::calibrated_params();
  params.r0 = get<double>(par_cfg, "r0", params.r0);
  params.e_b_gen = get<double>(par_cfg, "e_b_gen", params.e_b_gen);
  params.e_b_hop = get<double>(par_cfg, "e_b_hop", params.e_b_hop);
  params.e_b_rec = get<double>(par_cfg, "e_b_rec", params.e_b_rec);
  params.d = get<double>(par_cfg, "d", params.d);
  params.kT = get<double>(par_cfg, "kT", params.kT);

  const json series = cfg.value("series", json::object());
  check_keys(series, {"v_g", "z_prime", "v_t"}, "kmc.series");
  if (series.contains("v_g") && !series.at("v_g").is_null()) {
    FetModel fet;
    params.divider = kmc::series_divider(get<double>(series, "z_prime", fet.z_prime), get<double>(series, "v_g", 0.0),
                                         get<double>(series, "v_t", fet.v_t));
  }
  params.validate();

  const auto samples = get<std::size_t>(cfg, "samples", 1000);
  const double ramp_rate = get<double>(cfg, "ramp_rate", kmc::RampProtocol{}.ramp_rate);
  const double v_max = get<double>(cfg, "v_max", kmc::RampProtocol{}.v_max);
  const auto bins = get<std::size_t>(cfg, "hist_bins", 40);
  const double h_min = get<double>(cfg, "hist_min", 0.0);
  const double h_max = get<double>(cfg, "hist_max", 2.0);
  const double t0 = get<double>(cfg, "t0", 1.0);
  const double b_min = get<double>(cfg, "bias_min", 0.3);
  const double b_max = get<double>(cfg, "bias_max", 1.1);
  const auto b_points = get<std::size_t>(cfg, "bias_points", 9);
  if (samples == 0 || bins == 0 || !(h_min < h_max) || !(ramp_rate > 0.0) || !(v_max > 0.0) || !(t0 > 0.0) ||
      b_points == 0 || !(b_min <= b_max)) {
    throw ConfigError("kmc sampling settings are inconsistent");
  }

  Manifest manifest(ctx, "kmc");
  const auto voltages = kmc::ramp_set_voltages(dims, params, ramp_rate, v_max, samples,
                                               derive_seed(ctx.seed, 0, 0x72616d70), ctx.threads);
  CsvWriter raw(manifest.file("vset_samples.csv"), {"sample", "set_voltage"});
  std::vector<std::size_t> counts(bins, 0);
  double sum = 0.0, sum2 = 0.0;
  std::size_t n_set = 0;
  for (std::size_t s = 0; s < voltages.size(); ++s) {
    raw.cell(s).cell(voltages[s]).end_row();
    if (std::isnan(voltages[s])) continue;
    ++n_set;
    sum += voltages[s];
    sum2 += voltages[s] * voltages[s];
    const double pos = (voltages[s] - h_min) / (h_max - h_min) * double(bins);
    if (pos >= 0.0 && pos < double(bins)) ++counts[std::size_t(pos)];
  }
  CsvWriter hist(manifest.file("vset_hist.csv"), {"set_voltage", "count"});
  for (std::size_t b = 0; b < bins; ++b) {
    hist.cell(h_min + (double(b) + 0.5) * (h_max - h_min) / double(bins)).cell(counts[b]).end_row();
  }
  const double mean = n_set ? sum / double(n_set) : std::nan("");
  const double sd = n_set > 1 ? std::sqrt(std::max(0.0, (sum2 - double(n_set) * mean * mean) / double(n_set - 1)))
                              : std::nan("");

  CsvWriter curve(manifest.file("pset_curve.csv"), {"v_bias", "p_set", "n_samples"});
  std::vector<ProbabilityPoint> pts;
  const std::uint64_t sweep_seed = derive_seed(ctx.seed, 1, 0x70736574);
  for (std::size_t i = 0; i < b_points; ++i) {
    const double v = b_points == 1 ? b_min : b_min + (b_max - b_min) * double(i) / double(b_points - 1);
    const double p = kmc::set_probability_kmc(dims, params, v, t0, samples, sweep_seed, ctx.threads);
    curve.cell(v).cell(p).cell(samples).end_row();
    pts.push_back({v, p});
  }

  json summary = {{"set_count", n_set}, {"set_voltage_mean", mean}, {"set_voltage_std", sd}};
  if (pts.size() >= 3) {
    try {
      const SigmoidFit fit = fit_sigmoid(pts);
      summary["pset_fit"] = {{"v0", fit.v0}, {"t_v", fit.t_v}, {"residual", fit.residual}};
    } catch (const FitFailure& e) {
      summary["pset_fit"] = {{"error", e.what()}};
    }
  }
  write_json(manifest.file("kmc_summary.json"), summary);

  json resolved = {
      {"lattice", {{"nx", dims.nx}, {"ny", dims.ny}, {"nz", dims.nz}, {"spacing_nm", dims.spacing_nm}}},
      {"params",
       {{"r0", params.r0}, {"e_b_gen", params.e_b_gen}, {"e_b_hop", params.e_b_hop}, {"e_b_rec", params.e_b_rec},
        {"d", params.d}, {"kT", params.kT}, {"divider", params.divider}}},
      {"samples", samples}, {"ramp_rate", ramp_rate}, {"v_max", v_max}, {"hist_bins", bins},
      {"hist_min", h_min}, {"hist_max", h_max}, {"t0", t0}, {"bias_min", b_min}, {"bias_max", b_max},
      {"bias_points", b_points}};
  manifest.write(resolved, summary);
}

void cmd_anneal(const RunContext& ctx) {
  const json& cfg = ctx.config;
  check_keys(cfg, {"problem", "gain", "gamma", "alpha_t", "t0", "t_v", "xi_cb", "generations"}, "anneal");
  ProblemSetup setup = problem_setup(cfg);
  DesignPoint point = default_design();
  point.noise.gamma = 0.15;
  point.schedule.alpha_t = 3.31;
  point = design_from_json(cfg, point);
  point.noise.validate();
  point.schedule.validate();
  const SaaConfig saa = default_saa(ctx.scale);
  const auto generations = get<std::size_t>(cfg, "generations", saa.burn_in + saa.avg_window);
  if (generations == 0) throw ConfigError("anneal needs generations >= 1");

  Manifest manifest(ctx, "anneal");
  const AnnealTarget target = make_anneal_target(setup.problem, setup.gain);
  Rng rng = derive_stream(ctx.seed, 0, 0x616e6e);
  SpinState final_state;
  const auto costs = anneal(target, point.schedule, point.noise, generations, rng, std::nullopt, &final_state);
  CsvWriter trace(manifest.file("trace.csv"), {"generation", "cost"});
  for (std::size_t g = 0; g < costs.size(); ++g) trace.cell(g + 1).cell(costs[g]).end_row();

  const Assignment result(setup.problem, final_state);
  const Schedule schedule = decode(setup.problem, result);
  {
    std::ofstream out(manifest.file("schedule.csv"), std::ios::binary);
    out << schedule_csv(setup.problem, schedule);
  }
  const auto violations = constraint_violations(setup.problem, result);
  const auto terms = penalty_terms(setup.problem, result);
  json report = {{"final_cost", penalty_energy(setup.problem, result)},
                 {"feasible", schedule.feasible},
                 {"violations",
                  {{"load", violations[0]}, {"course_room_clash", violations[1]},
                   {"teacher_room_clash", violations[2]}, {"room_double_booking", violations[3]},
                   {"course_teacher_mismatch", violations[4]}}},
                 {"penalty_terms", terms}};
  write_json(manifest.file("violations.json"), report);

  json resolved = design_to_json(point);
  resolved["problem"] = setup.resolved;
  resolved["gain"] = setup.gain;
  resolved["generations"] = generations;
  manifest.write(resolved, report);
}

void cmd_sweep(const RunContext& ctx) {
  const json& cfg = ctx.config;
  check_keys(cfg, {"problem", "gain", "base", "axes", "points", "saa"}, "sweep");
  ProblemSetup setup = problem_setup(cfg);
  const SaaConfig saa = saa_from_json(cfg.value("saa", json()), ctx.scale);
  const DesignPoint base = design_from_json(cfg.value("base", json()), default_design());

  struct Item {
    std::string label;
    DesignPoint point;
  };
  std::vector<Item> items;
  json resolved_layout;
  if (cfg.contains("axes")) {
    if (cfg.contains("points")) throw ConfigError("sweep takes either 'axes' or 'points', not both");
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    for (const auto& a : cfg.at("axes")) {
      check_keys(a, {"name", "min", "max", "points"}, "sweep.axes");
      const auto name = get<std::string>(a, "name", "");
      const double lo = get<double>(a, "min", 0.0);
      const double hi = get<double>(a, "max", lo);
      const auto n = get<std::size_t>(a, "points", 1);
      if (n == 0 || (n > 1 && !(lo < hi))) throw ConfigError("sweep axis '" + name + "' needs points >= 1, min < max");
      std::vector<double> values;
      for (std::size_t i = 0; i < n; ++i) values.push_back(n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1));
      axes.emplace_back(name, values);
    }
    if (axes.empty()) throw ConfigError("sweep 'axes' is empty");
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.second.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
      DesignPoint p = base;
      std::size_t rem = idx;
      for (const auto& [name, values] : axes) {
        set_design_value(p, name, values[rem % values.size()]);
        rem /= values.size();
      }
      items.push_back({"g" + std::to_string(idx), p});
    }
    resolved_layout = cfg.at("axes");
  } else {
    json pts = cfg.value("points", json::array({{{"label", "optimal"}, {"gamma", 0.15}, {"alpha_t", 3.31}},
                                                {{"label", "fast_quiet"}, {"gamma", 0.0}, {"alpha_t", 4.0}},
                                                {{"label", "noisy_fast"}, {"gamma", 0.8}, {"alpha_t", 2.0}}}));
    std::size_t idx = 0;
    for (const auto& p : pts) {
      check_keys(p, {"label", "gamma", "xi_cb", "t0", "alpha_t", "t_v"}, "sweep.points");
      const auto label = sanitize_label(get<std::string>(p, "label", "p" + std::to_string(idx)));
      json coords = p;
      coords.erase("label");
      items.push_back({label, design_from_json(coords, base)});
      ++idx;
    }
    resolved_layout = pts;
  }

  Manifest manifest(ctx, "sweep");
  const AnnealTarget target = make_anneal_target(setup.problem, setup.gain);
  const std::uint64_t chain_seed = derive_seed(ctx.seed, 0, 0x737765);
  CsvWriter grid(manifest.file("grid.csv"), {"label", "gamma", "alpha_t", "t0", "xi_cb", "mean_cost", "std_error"});
  json summary = json::array();
  for (const auto& item : items) {
    const SaaEstimate e = expected_cost(target, item.point, saa, chain_seed, ctx.threads);
    grid.cell(item.label).cell(item.point.noise.gamma).cell(item.point.schedule.alpha_t);
    grid.cell(item.point.schedule.t0).cell(item.point.noise.xi_cb).cell(e.mean).cell(e.std_error).end_row();
    CsvWriter dist(manifest.file("cost_dist_" + item.label + ".csv"), {"chain", "avg_cost"});
    for (std::size_t c = 0; c < e.chain_averages.size(); ++c) dist.cell(c).cell(e.chain_averages[c]).end_row();
    summary.push_back({{"label", item.label}, {"mean_cost", e.mean}, {"std_error", e.std_error}});
  }

  json resolved = {{"problem", setup.resolved}, {"gain", setup.gain}, {"base", design_to_json(base)},
                   {"saa", saa_to_json(saa)}, {cfg.contains("axes") ? "axes" : "points", resolved_layout}};
  manifest.write(resolved, summary);
}

void cmd_bo(const RunContext& ctx) {
  const json& cfg = ctx.config;
  check_keys(cfg, {"problem", "gain", "space", "bounds", "base", "n_init", "n_steps", "kernel", "acquisition",
                   "grid_points", "fit_starts", "saa", "convergence_pairs", "common_random_numbers"},
             "bo");
  ProblemSetup setup = problem_setup(cfg);
  const auto space_name = get<std::string>(cfg, "space", "gamma_alpha");
  bo::DesignSpace space = named_space(space_name);
  if (cfg.contains("bounds")) {
    for (auto& axis : space.axes) {
      if (!cfg.at("bounds").contains(axis.name)) continue;
      const auto b = get<std::vector<double>>(cfg.at("bounds"), axis.name.c_str(), {});
      if (b.size() != 2) throw ConfigError("bounds for '" + axis.name + "' need [low, high]");
      axis.low = b[0];
      axis.high = b[1];
    }
  }
  try {
    space.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  const DesignPoint base = design_from_json(cfg.value("base", json()), default_design());
  const SaaConfig saa = saa_from_json(cfg.value("saa", json()), ctx.scale);

  bo::BoConfig bc;
  bc.n_init = get<std::size_t>(cfg, "n_init", bc.n_init);
  bc.n_steps = get<std::size_t>(cfg, "n_steps", default_bo_steps(ctx.scale));
  bc.grid_points = get<std::size_t>(cfg, "grid_points", bc.grid_points);
  bc.fit_starts = get<int>(cfg, "fit_starts", bc.fit_starts);
  const auto kernel = get<std::string>(cfg, "kernel", "matern52");
  if (kernel == "matern52") {
    bc.kernel = gp::KernelKind::matern52;
  } else if (kernel == "ard_se") {
    bc.kernel = gp::KernelKind::ard_se;
  } else {
    throw ConfigError("bo 'kernel' must be matern52 or ard_se");
  }
  const json acq = cfg.value("acquisition", json::object());
  check_keys(acq, {"kind", "margin", "kappa"}, "bo.acquisition");
  const auto kind = get<std::string>(acq, "kind", "ei");
  if (kind == "ei") {
    bc.acquisition.kind = bo::AcquisitionKind::ei;
  } else if (kind == "pi") {
    bc.acquisition.kind = bo::AcquisitionKind::pi;
  } else if (kind == "ucb") {
    bc.acquisition.kind = bo::AcquisitionKind::ucb;
  } else {
    throw ConfigError("bo acquisition 'kind' must be ei, pi or ucb");
  }
  bc.acquisition.margin = get<double>(acq, "margin", 0.0);
  bc.acquisition.kappa = get<double>(acq, "kappa", 2.0);
  const bool crn = get<bool>(cfg, "common_random_numbers", true);
  const auto pairs = get<std::vector<std::vector<std::size_t>>>(
      cfg, "convergence_pairs", std::vector<std::vector<std::size_t>>{{15, 30}, {25, 50}, {25, 100}});
  for (const auto& p : pairs) {
    if (p.size() != 2 || p[0] == 0 || p[0] >= p[1]) throw ConfigError("convergence pairs need [n, m] with 0 < n < m");
  }
  if (bc.n_init < space.dims() + 3 || bc.grid_points < 2) {
    throw ConfigError("bo needs n_init >= D + 3 and grid_points >= 2");
  }

  Manifest manifest(ctx, "bo");
  const AnnealTarget target = make_anneal_target(setup.problem, setup.gain);
  const auto objective = saa_objective(target, space, base, saa, ctx.seed, crn, ctx.threads);
  const bo::BoResult result = bo::bo_loop(objective, space, bc, derive_seed(ctx.seed, 1, 0x626f));

  std::vector<std::string> header{"step"};
  for (std::size_t d = 0; d < space.dims(); ++d) header.push_back("x" + std::to_string(d + 1));
  for (const char* h : {"y", "y_se", "best_so_far", "avg_uncertainty"}) header.push_back(h);
  {
    CsvWriter steps(manifest.file("bo_steps.csv"), header);
    for (const auto& s : result.steps) {
      steps.cell(s.step);
      for (double v : s.x) steps.cell(v);
      steps.cell(s.y).cell(s.y_se).cell(s.best_so_far).cell(s.avg_uncertainty).end_row();
    }
  }
  json resolved = {{"problem", setup.resolved}, {"gain", setup.gain}, {"space", space_name},
                   {"base", design_to_json(base)}, {"saa", saa_to_json(saa)}, {"n_init", bc.n_init},
                   {"n_steps", bc.n_steps}, {"kernel", kernel}, {"grid_points", bc.grid_points},
                   {"fit_starts", bc.fit_starts}, {"common_random_numbers", crn}, {"convergence_pairs", pairs},
                   {"acquisition", {{"kind", kind}, {"margin", bc.acquisition.margin}, {"kappa", bc.acquisition.kappa}}}};
  json bounds = json::object();
  for (const auto& a : space.axes) bounds[a.name] = {a.low, a.high};
  resolved["bounds"] = bounds;

  if (result.aborted) {
    manifest.write(resolved, {{"aborted", true}, {"failed_index", result.failed_index}, {"error", result.failure}});
    const long step = long(result.failed_index) + 1 - long(bc.n_init);
    throw Error("objective failed at step " + std::to_string(step) + ": " + result.failure);
  }

  const bo::Surrogate model(result.data, space, bc.kernel, result.hp);
  {
    std::vector<std::string> map_header;
    for (std::size_t d = 0; d < space.dims(); ++d) map_header.push_back("x" + std::to_string(d + 1));
    map_header.push_back("posterior_mean");
    map_header.push_back("posterior_sd");
    CsvWriter map(manifest.file("posterior_map.csv"), map_header);
    for (const auto& row : bo::posterior_map(model, bc.grid_points)) {
      for (double v : row.x) map.cell(v);
      map.cell(row.mean).cell(row.sd).end_row();
    }
  }

  std::vector<double> values;
  for (const auto& o : result.data) values.push_back(o.y);
  CsvWriter conv(manifest.file("convergence.csv"), {"n", "m", "e_o"});
  for (const auto& p : pairs) {
    if (p[1] > bc.n_steps) continue;
    conv.cell(p[0]).cell(p[1]).cell(bo::convergence_error(values, bc.n_init + p[0], bc.n_init + p[1])).end_row();
  }

  const auto best = std::min_element(result.data.begin(), result.data.end(),
                                     [](const auto& a, const auto& b) { return a.y < b.y; });
  json hp = {{"length_scales", result.hp.length_scales}, {"amplitude", result.hp.amplitude},
             {"noise", result.hp.noise}, {"mean", result.hp.mean}};
  json summary = {{"best_x", best->x}, {"best_y", best->y}, {"hyperparameters", hp},
                  {"evaluations", result.data.size()}};
  write_json(manifest.file("bo_summary.json"), summary);
  manifest.write(resolved, summary);
}

}  // namespace smbm::cli
