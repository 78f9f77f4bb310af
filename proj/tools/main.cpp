#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qpr/msop.hpp"
#include "qpr/noise.hpp"
#include "qpr/qcnn.hpp"
#include "qpr/simulator.hpp"
#include "qpr/spinchain.hpp"
#include "qpr/threadpool.hpp"
#include "qpr/vqe.hpp"
#include "verify_checks.hpp"

namespace {

using json = nlohmann::json;
using namespace qpr;

constexpr int kSchemaVersion = 1;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fnum(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct GridSpec {
  double h1_min = 0, h1_max = 1.6;
  double h2_min = -1.6, h2_max = 1.6;
  int resolution = 10;
};

struct Config {
  std::optional<GridSpec> grid;
  double h1 = 0.2;
  std::optional<double> h2;
  int points = 10;  // linecut resolution
  std::uint64_t shots = 0;
  std::uint64_t seed = 1234;
  std::string device;  // path, "ideal", or empty (env, then ideal)
  bool mitigation = true;
  bool preselection = false;
  std::string angle_store;
  std::string output_dir = ".";
  int jobs = 1;
  int restarts = 25;
};

Config load_config(const std::string& path) {
  Config c;
  if (path.empty()) return c;
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  try {
    if (j.contains("grid")) {
      GridSpec g;
      const auto& jg = j["grid"];
      if (jg.contains("h1")) {
        g.h1_min = jg["h1"].at(0).get<double>();
        g.h1_max = jg["h1"].at(1).get<double>();
      }
      if (jg.contains("h2")) {
        g.h2_min = jg["h2"].at(0).get<double>();
        g.h2_max = jg["h2"].at(1).get<double>();
      }
      if (jg.contains("resolution")) g.resolution = jg["resolution"].get<int>();
      if (g.resolution < 2) throw ConfigError("grid resolution must be at least 2");
      c.grid = g;
    }
    if (j.contains("h1")) c.h1 = j["h1"].get<double>();
    if (j.contains("h2")) c.h2 = j["h2"].get<double>();
    if (j.contains("points")) c.points = j["points"].get<int>();
    if (c.points < 2) throw ConfigError("linecut needs at least 2 points");
    if (j.contains("shots")) {
      if (j["shots"].is_number_integer() && j["shots"].get<std::int64_t>() < 0)
        throw ConfigError("shots must be nonnegative");
      c.shots = j["shots"].get<std::uint64_t>();
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("device_model")) c.device = j["device_model"].get<std::string>();
    if (j.contains("mitigation")) c.mitigation = j["mitigation"].get<bool>();
    if (j.contains("preselection")) c.preselection = j["preselection"].get<bool>();
    if (j.contains("angle_store")) c.angle_store = j["angle_store"].get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
    if (j.contains("restarts")) c.restarts = j["restarts"].get<int>();
  } catch (const json::exception& e) {
    throw ConfigError("config field error in " + path + ": " + e.what());
  }
  return c;
}

std::string resolve_device(const Config& c) {
  if (!c.device.empty()) return c.device;
  const char* env = std::getenv("QPR_DEVICE_MODEL");
  if (env && *env) return env;
  return "ideal";
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[std::size_t(i)] = lo + (hi - lo) * double(i) / double(n - 1);
  return v;
}

// per-point sweep work shared by phase-diagram and linecut
struct PointResult {
  double h1 = 0, h2 = 0;
  double exact_s = 0, exact_e = 0, exact_qcnn = 0;
  double ideal_s = 0, ideal_e = 0, ideal_qcnn = 0;
  double noisy_s = NAN, noisy_e = NAN, noisy_qcnn = NAN;
  double fidelity = 0;
  bool accepted = false;
  std::uint64_t seed = 0;
  std::vector<double> theta;
};

struct SweepContext {
  Config cfg;
  std::optional<noise::DeviceModel> dev;
  std::optional<noise::NoisyEngine> engine;
  std::vector<vqe::AngleRecord> store;
  bool inner_jobs = false;  // parallelize VQE restarts instead of points

  explicit SweepContext(const Config& c) : cfg(c) {
    std::string d = resolve_device(c);
    if (d != "ideal") {
      dev = noise::load_device(d);
      engine.emplace(*dev);
    }
    if (!cfg.angle_store.empty() && std::filesystem::exists(cfg.angle_store))
      store = vqe::load_angle_store(cfg.angle_store);
  }

  PointResult point(double h1, double h2, bool want_qcnn) const {
    PointResult r;
    r.h1 = h1;
    r.h2 = h2;
    WeightedPauliSum ham = cluster_ising(7, h1, h2);
    WeightedPauliSum sop{7, {{1.0, string_order(7)}}};
    GroundState gs = ground_state(ham);
    r.exact_s = sop.expectation(gs.psi);
    r.exact_e = gs.energy;

    std::vector<double> theta;
    if (auto hit = vqe::lookup_angles(store, h1, h2)) {
      theta = hit->angles;
      r.fidelity = hit->fidelity;
      r.seed = hit->seed;
      r.accepted = hit->fidelity > 0.9;
    } else {
      vqe::OptimizeOptions opts;
      opts.seed = cfg.seed;
      opts.restarts = cfg.restarts;
      opts.jobs = inner_jobs ? cfg.jobs : 1;
      auto res = vqe::optimize(h1, h2, opts);
      theta = res.theta;
      r.fidelity = res.fidelity;
      r.seed = res.seed;
      r.accepted = res.accepted;
    }
    r.theta = theta;

    Circuit prep = vqe::build_ansatz_circuit(theta, 1);
    Statevector sv = prep.run();
    r.ideal_s = sop.expectation(sv.amps());
    r.ideal_e = ham.expectation(sv.amps());

    if (want_qcnn) {
      Eigen::MatrixXcd rho_gs = gs.psi * gs.psi.adjoint();
      r.exact_qcnn = 2 * qcnn::output_probability(rho_gs, qcnn::Form::equivalent) - 1;
      r.ideal_qcnn = qcnn::qcnn_output(sv).y_expect;
    }

    if (engine) {
      auto sn = noise::measure_string_order(*engine, prep, cfg.shots, cfg.seed, cfg.mitigation);
      r.noisy_s = sn.value;
      noise::DensityMatrix rho = engine->prepare(prep);
      r.noisy_e = rho.expectation(ham);
      if (want_qcnn) {
        auto qn = noise::measure_qcnn(*engine, prep, cfg.shots, cfg.seed, cfg.mitigation);
        r.noisy_qcnn = qn.value;
      }
    }
    return r;
  }
};

json summary_base(const char* command, const Config& cfg) {
  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = command;
  out["seed"] = cfg.seed;
  out["shots"] = cfg.shots;
  out["device_model"] = resolve_device(cfg);
  out["mitigation"] = cfg.mitigation;
  return out;
}

void add_preselection(json& out, const SweepContext& ctx) {
  if (ctx.cfg.preselection && ctx.dev) {
    auto ps = noise::preselect(*ctx.dev);
    out["preselection"] = {{"acceptance", ps.acceptance}, {"thermal_factor", ps.thermal_factor}};
  }
}

std::filesystem::path ensure_outdir(const Config& cfg) {
  std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int cmd_phase_diagram(const Config& cfg) {
  GridSpec grid = cfg.grid.value_or(GridSpec{});
  SweepContext ctx(cfg);
  auto h1s = linspace(grid.h1_min, grid.h1_max, grid.resolution);
  auto h2s = linspace(grid.h2_min, grid.h2_max, grid.resolution);
  std::size_t npts = h1s.size() * h2s.size();
  std::vector<PointResult> results(npts);
  parallel_for(npts, cfg.jobs, [&](std::size_t i) {
    results[i] = ctx.point(h1s[i / h2s.size()], h2s[i % h2s.size()], false);
  });

  auto dir = ensure_outdir(cfg);
  auto csv_path = dir / "phase_diagram.csv";
  std::ofstream f(csv_path);
  f << "h1,h2,exact_s,exact_energy,ideal_s,ideal_energy,noisy_s,noisy_energy,"
       "vqe_fidelity,vqe_accepted,vqe_seed\n";
  for (const auto& r : results)
    f << fnum(r.h1) << ',' << fnum(r.h2) << ',' << fnum(r.exact_s) << ',' << fnum(r.exact_e)
      << ',' << fnum(r.ideal_s) << ',' << fnum(r.ideal_e) << ',' << fnum(r.noisy_s) << ','
      << fnum(r.noisy_e) << ',' << fnum(r.fidelity) << ',' << (r.accepted ? 1 : 0) << ','
      << r.seed << '\n';
  f.close();

  json out = summary_base("phase-diagram", cfg);
  out["resolution"] = grid.resolution;
  out["output"] = csv_path.string();
  int unconverged = 0;
  double max_exact = 0, max_noisy = 0;
  for (const auto& r : results) {
    if (!r.accepted) ++unconverged;
    max_exact = std::max(max_exact, r.exact_s);
    if (!std::isnan(r.noisy_s)) max_noisy = std::max(max_noisy, r.noisy_s);
  }
  out["unconverged_points"] = unconverged;
  out["max_exact_s"] = max_exact;
  if (ctx.engine) out["max_noisy_s"] = max_noisy;
  add_preselection(out, ctx);
  std::printf("%s\n", out.dump().c_str());
  return 0;
}

int cmd_linecut(const Config& cfg) {
  SweepContext ctx(cfg);
  auto h2s = linspace(-1.6, 1.6, cfg.points);
  std::vector<PointResult> results(h2s.size());
  parallel_for(h2s.size(), cfg.jobs, [&](std::size_t i) {
    results[i] = ctx.point(cfg.h1, h2s[i], true);
  });
  auto window = find_boundaries(7, cfg.h1, -1.6, 1.6, 161);

  auto dir = ensure_outdir(cfg);
  auto csv_path = dir / "linecut.csv";
  std::ofstream f(csv_path);
  f << "h2,exact_s,ideal_s,noisy_s,exact_qcnn,ideal_qcnn,noisy_qcnn,vqe_fidelity,vqe_accepted\n";
  for (const auto& r : results)
    f << fnum(r.h2) << ',' << fnum(r.exact_s) << ',' << fnum(r.ideal_s) << ',' << fnum(r.noisy_s)
      << ',' << fnum(r.exact_qcnn) << ',' << fnum(r.ideal_qcnn) << ',' << fnum(r.noisy_qcnn)
      << ',' << fnum(r.fidelity) << ',' << (r.accepted ? 1 : 0) << '\n';
  f.close();

  json out = summary_base("linecut", cfg);
  out["h1"] = cfg.h1;
  out["points"] = cfg.points;
  out["spt_window"] = window.boundaries;
  out["output"] = csv_path.string();
  add_preselection(out, ctx);
  std::printf("%s\n", out.dump().c_str());
  return 0;
}

int cmd_vqe_prepare(const Config& cfg) {
  Config local = cfg;
  if (local.angle_store.empty())
    local.angle_store = (ensure_outdir(cfg) / "angles.jsonl").string();

  std::vector<std::pair<double, double>> pts;
  if (local.grid) {
    auto h1s = linspace(local.grid->h1_min, local.grid->h1_max, local.grid->resolution);
    auto h2s = linspace(local.grid->h2_min, local.grid->h2_max, local.grid->resolution);
    for (double a : h1s)
      for (double b : h2s) pts.emplace_back(a, b);
  } else if (local.h2) {
    pts.emplace_back(local.h1, *local.h2);
  } else {
    throw ConfigError("vqe-prepare needs either a grid or an (h1, h2) point");
  }

  std::vector<vqe::OptimizationResult> results(pts.size());
  bool single = pts.size() == 1;
  parallel_for(pts.size(), single ? 1 : cfg.jobs, [&](std::size_t i) {
    vqe::OptimizeOptions opts;
    opts.seed = cfg.seed;
    opts.restarts = cfg.restarts;
    opts.jobs = single ? cfg.jobs : 1;
    results[i] = vqe::optimize(pts[i].first, pts[i].second, opts);
  });

  int accepted = 0;
  double infid_sum = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& res = results[i];
    vqe::append_angle_record(local.angle_store,
                             {pts[i].first, pts[i].second, res.theta, res.fidelity, res.energy,
                              res.seed});
    if (res.accepted) {
      ++accepted;
      infid_sum += 1 - res.fidelity;
    }
  }

  json out = summary_base("vqe-prepare", cfg);
  out["points"] = pts.size();
  out["accepted"] = accepted;
  out["angle_store"] = local.angle_store;
  if (accepted > 0) out["mean_accepted_infidelity"] = infid_sum / accepted;
  std::printf("%s\n", out.dump().c_str());
  return 0;
}

int cmd_qcnn_run(const Config& cfg) {
  if (!cfg.h2) throw ConfigError("qcnn-run needs an (h1, h2) point");
  SweepContext ctx(cfg);
  PointResult r = ctx.point(cfg.h1, *cfg.h2, true);

  json out = summary_base("qcnn-run", cfg);
  out["h1"] = r.h1;
  out["h2"] = r.h2;
  out["vqe_fidelity"] = r.fidelity;
  out["vqe_accepted"] = r.accepted;
  out["exact_qcnn"] = r.exact_qcnn;
  out["ideal_qcnn"] = r.ideal_qcnn;
  out["exact_s"] = r.exact_s;
  out["ideal_s"] = r.ideal_s;
  if (ctx.engine) {
    out["noisy_qcnn"] = r.noisy_qcnn;
    out["noisy_s"] = r.noisy_s;
  }
  if (cfg.shots > 0) {
    Circuit prep = vqe::build_ansatz_circuit(r.theta, 1);
    auto sampled = qcnn::qcnn_output(prep.run(), cfg.shots, cfg.seed);
    out["sampled_ideal_qcnn"] = sampled.y_expect;
  }
  add_preselection(out, ctx);
  std::printf("%s\n", out.dump().c_str());
  return 0;
}

int cmd_sop_expand(int d, const std::string& part_name, const std::string& out_path,
                   std::uint64_t cap, bool truncate) {
  if (d < 1 || d > 2) throw ConfigError("expansion depth must be 1 or 2");
  msop::Part part = msop::Part::full;
  if (part_name == "sum")
    part = msop::Part::sum;
  else if (part_name == "product")
    part = msop::Part::product;
  else if (part_name != "full")
    throw ConfigError("part must be full, sum, or product");

  msop::ExpandOptions opt;
  opt.d = d;
  opt.part = part;
  if (cap) opt.memory_cap_bytes = cap;
  opt.allow_truncation = truncate;

  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = "sop-expand";
  out["d"] = d;
  out["part"] = part_name;
  try {
    msop::Expansion ex = msop::expand(opt);
    if (!out_path.empty()) {
      msop::write_csv(ex, out_path);
      out["output"] = out_path;
    }
    out["terms"] = ex.terms.size();
    out["final_level_products"] = ex.final_level_products;
    out["truncated"] = ex.truncated;
    out["coefficient_sum"] = ex.coefficient_sum().decimal();
    out["settings"] = msop::measurement_settings(ex).size();
    std::printf("%s\n", out.dump().c_str());
    return 0;
  } catch (const msop::CapExceeded& e) {
    out["error"] = "memory cap exceeded";
    out["level"] = e.level;
    out["products_emitted"] = e.products_emitted;
    out["terms_held"] = e.terms_held;
    out["products_pending"] = e.products_pending;
    std::printf("%s\n", out.dump().c_str());
    return 1;
  }
}

int cmd_verify(const std::string& data_dir, const std::string& out_path) {
  std::string dir = data_dir;
  if (dir.empty()) {
    const char* env = std::getenv("QPR_DATA_DIR");
    dir = (env && *env) ? env : "data";
  }
  auto checks = qprtool::run_verify_checks(dir);
  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = "verify";
  out["data_dir"] = dir;
  json arr = json::array();
  bool all = true;
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    all = all && c.pass;
  }
  out["checks"] = arr;
  out["all_pass"] = all;
  std::string text = out.dump(2) + "\n";
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    f << text;
  }
  std::fputs(text.c_str(), stdout);
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cluster-Ising phase recognition toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, device, angle_store;
  std::optional<double> h1_flag, h2_flag;
  std::optional<std::uint64_t> shots_flag, seed_flag;
  std::optional<int> jobs_flag, points_flag, resolution_flag, restarts_flag;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--out-dir", out_dir, "output directory");
    cmd->add_option("--device", device, "device model path or 'ideal'");
    cmd->add_option("--angle-store", angle_store, "JSON-lines angle store");
    cmd->add_option("--h1", h1_flag);
    cmd->add_option("--h2", h2_flag);
    cmd->add_option("--shots", shots_flag);
    cmd->add_option("--seed", seed_flag);
    cmd->add_option("--jobs", jobs_flag);
    cmd->add_option("--points", points_flag);
    cmd->add_option("--resolution", resolution_flag);
    cmd->add_option("--restarts", restarts_flag);
  };

  auto* pd = app.add_subcommand("phase-diagram", "exact/ideal/noisy maps over the (h1,h2) grid");
  auto* lc = app.add_subcommand("linecut", "diagnostics along an h2 sweep at fixed h1");
  auto* vp = app.add_subcommand("vqe-prepare", "optimize and store preparation angles");
  auto* qr = app.add_subcommand("qcnn-run", "phase recognition at one (h1,h2) point");
  add_common(pd);
  add_common(lc);
  add_common(vp);
  add_common(qr);

  auto* se = app.add_subcommand("sop-expand", "expand the multi-scale string order parameter");
  int se_d = 1;
  std::string se_part = "full", se_out;
  std::uint64_t se_cap = 0;
  bool se_truncate = false;
  se->add_option("--d", se_d, "depth (1 or 2)");
  se->add_option("--part", se_part, "full, sum, or product");
  se->add_option("--out", se_out, "CSV output path");
  se->add_option("--cap", se_cap, "memory cap in bytes");
  se->add_flag("--truncate", se_truncate, "return a truncated prefix instead of failing");

  auto* vf = app.add_subcommand("verify", "run the library invariant suite");
  std::string vf_data, vf_out;
  vf->add_option("--data", vf_data, "golden data directory (default env QPR_DATA_DIR, then ./data)");
  vf->add_option("--out", vf_out, "also write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    Config cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!device.empty()) cfg.device = device;
    if (!angle_store.empty()) cfg.angle_store = angle_store;
    if (h1_flag) cfg.h1 = *h1_flag;
    if (h2_flag) cfg.h2 = *h2_flag;
    if (shots_flag) cfg.shots = *shots_flag;
    if (seed_flag) cfg.seed = *seed_flag;
    if (jobs_flag) cfg.jobs = *jobs_flag;
    if (points_flag) {
      if (*points_flag < 2) throw ConfigError("linecut needs at least 2 points");
      cfg.points = *points_flag;
    }
    if (resolution_flag) {
      if (*resolution_flag < 2) throw ConfigError("grid resolution must be at least 2");
      GridSpec g = cfg.grid.value_or(GridSpec{});
      g.resolution = *resolution_flag;
      cfg.grid = g;
    }
    if (restarts_flag) cfg.restarts = *restarts_flag;

    if (pd->parsed()) return cmd_phase_diagram(cfg);
    if (lc->parsed()) return cmd_linecut(cfg);
    if (vp->parsed()) return cmd_vqe_prepare(cfg);
    if (qr->parsed()) return cmd_qcnn_run(cfg);
    if (se->parsed()) return cmd_sop_expand(se_d, se_part, se_out, se_cap, se_truncate);
    if (vf->parsed()) return cmd_verify(vf_data, vf_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const InvariantError& e) {
    std::fprintf(stderr, "invariant failure: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
