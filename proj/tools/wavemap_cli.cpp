#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavemap/config.hpp"
#include "wavemap/errors.hpp"
#include "wavemap/gauge_return.hpp"
#include "wavemap/lab.hpp"
#include "wavemap/lp.hpp"
#include "wavemap/mwm.hpp"
#include "wavemap/norms.hpp"
#include "wavemap/report.hpp"
#include "wavemap/snapshot.hpp"

using namespace wavemap;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kAssertion = 1;
constexpr int kConfig = 2;

struct Context {
  config::Config cfg;
  bool quiet = false;

  void say(const std::string& line) const {
    if (!quiet) std::cout << line << '\n';
  }
  std::string path(const std::string& name) const { return cfg.out + "/" + name; }
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Checks recorded in every JSON summary; the command fails when any is false.
struct Assertions {
  Json list = Json::array();
  bool ok = true;
  void check(const std::string& name, bool pass, double measured, double bound) {
    list.push_back({{"name", name}, {"pass", pass}, {"measured", measured}, {"bound", bound}});
    ok = ok && pass;
  }
};

Json envelope(const Context& ctx, const std::string& command, int n, int N) {
  Json j;
  j["command"] = command;
  j["config"] = Json::parse(ctx.cfg.to_json());
  j["families"] = Json::parse(report::families_json(n, N));
  return j;
}

int finish(const Context& ctx, const std::string& stem, Json j, const Assertions& a) {
  j["assertions"] = a.list;
  j["pass"] = a.ok;
  report::write_atomic(ctx.path(stem + ".json"), j.dump(2) + "\n");
  ctx.say(stem + ": " + (a.ok ? "PASS" : "FAIL"));
  for (const auto& x : a.list)
    if (!x["pass"].get<bool>())
      std::cerr << stem << ": assertion '" << x["name"].get<std::string>() << "' failed (measured "
                << num(x["measured"].get<double>()) << ", bound " << num(x["bound"].get<double>()) << ")\n";
  return a.ok ? kOk : kAssertion;
}

//----------------------------------------------------------------------------

int mwm_run(const Context& ctx) {
  const auto& c = ctx.cfg;
  auto grid = c.grid();
  auto data = mwm::random_potential_data(grid, c.seed, c.amplitude, c.radius);
  auto res = mwm::picard_solve(grid, data, c.picard());
  report::write_atomic(ctx.path("mwm_run_trace.csv"), mwm::trace_csv(res.trace));
  if (c.snapshots && !res.v.values.empty()) write_snapshot(ctx.path("mwm_run_final.gwf"), snapshot_of(res.v.values.back()));

  double max_ratio = 0.0;
  for (const auto& r : res.trace.records) max_ratio = std::max(max_ratio, r.ratio);
  Json j = envelope(ctx, "mwm run", grid.n, grid.N);
  j["converged"] = res.converged;
  j["iterations"] = res.iterations;
  j["trace_length"] = res.trace.records.size();
  j["max_difference_ratio"] = max_ratio;
  j["data_norm"] = res.data_norm;
  j["within_gate"] = res.within_gate;
  j["a_l1_linf"] = res.a_l1_linf;
  j["b_l2_l2n"] = res.b_l2_l2n;
  Assertions a;
  a.check("converged", res.converged, res.iterations, c.max_iter);
  return finish(ctx, "mwm_run", std::move(j), a);
}

int mwm_stability(const Context& ctx) {
  const auto& c = ctx.cfg;
  auto grid = c.grid();
  auto opts = c.picard();
  auto d = mwm::random_potential_data(grid, c.seed, c.amplitude, c.radius);
  auto same = mwm::stability_experiment(grid, d, d, opts);

  std::vector<mwm::StabilityReport> runs;
  for (double delta : c.deltas) runs.push_back(mwm::stability_experiment(grid, d, mwm::scaled(d, 1.0 + delta), opts));

  std::ostringstream series;
  series << "t,identical";
  for (double delta : c.deltas) series << ",delta_" << num(delta);
  series << '\n';
  for (std::size_t m = 0; m < same.times.size(); ++m) {
    series << num(same.times[m]) << ',' << num(same.energy[m]);
    for (const auto& r : runs) series << ',' << num(r.energy.at(m));
    series << '\n';
  }
  report::write_atomic(ctx.path("mwm_stability_energy.csv"), series.str());

  std::ostringstream csv;
  csv << "delta,max_energy,response\n";
  double lo = INFINITY, hi = 0.0;
  Json sweep = Json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    double resp = runs[i].max_energy / c.deltas[i];
    lo = std::min(lo, resp);
    hi = std::max(hi, resp);
    csv << num(c.deltas[i]) << ',' << num(runs[i].max_energy) << ',' << num(resp) << '\n';
    sweep.push_back({{"delta", c.deltas[i]}, {"max_energy", runs[i].max_energy}, {"response", resp}});
  }
  report::write_atomic(ctx.path("mwm_stability.csv"), csv.str());

  Json j = envelope(ctx, "mwm stability", grid.n, grid.N);
  j["identical_max_energy"] = same.max_energy;
  j["sweep"] = sweep;
  j["response_spread"] = lo > 0.0 ? hi / lo : INFINITY;
  Assertions a;
  a.check("identical data give zero energy", same.max_energy <= 1e-12, same.max_energy, 1e-12);
  a.check("linear response spread", lo > 0.0 && hi / lo <= 2.0, lo > 0.0 ? hi / lo : INFINITY, 2.0);
  return finish(ctx, "mwm_stability", std::move(j), a);
}

int mwm_regularity(const Context& ctx) {
  const auto& c = ctx.cfg;
  auto grid = c.grid();
  std::ostringstream csv;
  csv << "sample,seed,data_norm,ratio,iterations\n";
  double lo = INFINITY, hi = 0.0;
  Json ratios = Json::array();
  for (int i = 0; i < c.samples; ++i) {
    const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(i);
    auto rep = mwm::regularity_track(grid, mwm::random_potential_data(grid, seed, c.amplitude, c.radius), c.picard());
    csv << i << ',' << seed << ',' << num(rep.data_norm) << ',' << num(rep.ratio) << ',' << rep.iterations << '\n';
    ratios.push_back(rep.ratio);
    if (rep.ratio > 0.0) {
      lo = std::min(lo, rep.ratio);
      hi = std::max(hi, rep.ratio);
    }
  }
  report::write_atomic(ctx.path("mwm_regularity.csv"), csv.str());
  const double spread = hi > 0.0 ? hi / lo : 1.0;
  Json j = envelope(ctx, "mwm regularity", grid.n, grid.N);
  j["ratios"] = ratios;
  j["max_ratio"] = hi;
  j["spread"] = spread;
  Assertions a;
  a.check("ratio spread", std::isfinite(spread) && spread <= 3.0, spread, 3.0);
  return finish(ctx, "mwm_regularity", std::move(j), a);
}

int gauge_roundtrip(const Context& ctx) {
  const auto& c = ctx.cfg;
  std::ostringstream csv;
  csv << "N,M,sup_error,plaquette_plus,plaquette_minus,constraint_growth,constraint_full_growth,picard_iterations,energy_drift\n";
  std::vector<gauge::RoundTripResult> rs;
  Json levels = Json::array();
  for (int res : c.resolutions) {
    auto rc = c.roundtrip(res);
    auto r = gauge::round_trip(rc);
    csv << res << ',' << rc.grid.M << ',' << num(r.sup_error) << ',' << num(r.plaquette_plus) << ','
        << num(r.plaquette_minus) << ',' << num(r.constraint_growth) << ',' << num(r.constraint_full_growth) << ','
        << r.picard_iterations << ','
        << num(r.energy_drift) << '\n';
    levels.push_back({{"N", res},
                      {"M", rc.grid.M},
                      {"sup_error", r.sup_error},
                      {"plaquette_plus", r.plaquette_plus},
                      {"plaquette_minus", r.plaquette_minus},
                      {"constraint_growth", r.constraint_growth},
                      {"constraint_full_growth", r.constraint_full_growth},
                      {"picard_iterations", r.picard_iterations}});
    ctx.say("gauge roundtrip N=" + std::to_string(res) + " sup_error=" + num(r.sup_error));
    rs.push_back(std::move(r));
  }
  report::write_atomic(ctx.path("gauge_roundtrip.csv"), csv.str());

  double rate = INFINITY;
  Json rates = Json::array();
  for (std::size_t i = 1; i < rs.size(); ++i) {
    double step = std::log2(static_cast<double>(c.resolutions[i]) / c.resolutions[i - 1]);
    double rr = std::log2(rs[i - 1].sup_error / rs[i].sup_error) / step;
    rates.push_back(rr);
    rate = std::min(rate, rr);
  }
  double plaq = 0.0, growth = 0.0;
  for (const auto& r : rs) growth = std::max(growth, r.constraint_growth);
  plaq = std::max(rs.front().plaquette_plus, rs.front().plaquette_minus);

  Json j = envelope(ctx, "gauge roundtrip", c.n, c.resolutions.back());
  j["levels"] = levels;
  j["rates"] = rates;
  j["convergence_rate"] = rate;
  Assertions a;
  a.check("sup error convergence rate", rate >= 1.8, rate, 1.8);
  a.check("plaquette residual at reference resolution", plaq <= 1e-5, plaq, 1e-5);
  a.check("constraint growth", growth <= 10.0, growth, 10.0);
  return finish(ctx, "gauge_roundtrip", std::move(j), a);
}

int lab_command(const Context& ctx, const std::string& id) {
  const auto& c = ctx.cfg;
  std::vector<std::string> ids;
  if (id == "all") {
    ids = lab::estimate_ids();
  } else if (id == "2.13") {
    ids = {"2.13", "2.13i"};  // synthetic and in-situ distributions
  } else {
    const auto& known = lab::estimate_ids();
    if (std::find(known.begin(), known.end(), id) == known.end())
      throw ConfigError("lab: unknown estimate id '" + id + "'");
    ids = {id};
  }
  auto spec = c.ensemble();
  auto reports = lab::run_estimates(ids, spec);
  std::vector<lab::EstimateReport> shifted, refined;
  if (c.check_shift) shifted = lab::run_estimates(ids, lab::shifted(spec));
  if (c.check_refine) refined = lab::run_estimates(ids, lab::refined(spec));

  Json j = envelope(ctx, "lab " + id, spec.grid.n, spec.grid.N);
  Json list = Json::array();
  Assertions a;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const std::string stem = "lab_" + r.id;
    report::write_atomic(ctx.path(stem + ".csv"), lab::to_csv(r));
    Json e = Json::parse(lab::to_json(r, "{}"));
    e.erase("config");
    bool finite = true;
    for (double x : r.ratio) finite = finite && std::isfinite(x) && x >= 0.0;
    a.check(r.id + " ratios finite", finite, r.max_ratio, INFINITY);
    if (c.check_shift) {
      double change = r.max_ratio > 0.0 ? std::abs(shifted[i].max_ratio - r.max_ratio) / r.max_ratio : 0.0;
      e["shifted_max_ratio"] = shifted[i].max_ratio;
      e["shift_change"] = change;
      a.check(r.id + " shift invariance", change <= 0.05, change, 0.05);
    }
    if (c.check_refine) {
      double lo = std::min(r.max_ratio, refined[i].max_ratio), hi = std::max(r.max_ratio, refined[i].max_ratio);
      double factor = hi > 0.0 ? (lo > 0.0 ? hi / lo : INFINITY) : 1.0;
      e["refined_max_ratio"] = refined[i].max_ratio;
      e["refine_factor"] = factor;
      a.check(r.id + " refinement stability", factor <= 2.0, factor, 2.0);
    }
    ctx.say("lab " + r.id + " max_ratio=" + num(r.max_ratio) + " median_ratio=" + num(r.median_ratio));
    list.push_back(e);
  }
  j["reports"] = list;
  return finish(ctx, "lab_" + id, std::move(j), a);
}

int norms_report(const Context& ctx, const std::string& snapshot_path) {
  Snapshot snap;
  try {
    snap = read_snapshot(snapshot_path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("norms report: ") + e.what());
  }
  auto fields = fields_of(snap);
  if (fields.empty()) throw ConfigError("norms report: snapshot holds no fields");
  const Grid& g = fields.front().grid();
  const int n = g.n;
  norms::ShellNormAccumulator acc(g, {2.0, 4.0, norms::kInf}, false);
  acc.add_slice(fields, std::vector<LieAlgebraField>{});
  auto ladder = lp::DyadicLadder::for_grid(g);

  std::ostringstream csv;
  csv << "block,k,l2,l4,linf\n";
  Json blocks = Json::array();
  for (int b = 0; b < acc.blocks(); ++b) {
    double l2 = acc.block_mixed(b, norms::kInf, 2.0, false), l4 = acc.block_mixed(b, norms::kInf, 4.0, false),
           li = acc.block_mixed(b, norms::kInf, norms::kInf, false);
    csv << b << ',' << ladder.block_k(b) << ',' << num(l2) << ',' << num(l4) << ',' << num(li) << '\n';
    blocks.push_back({{"block", b}, {"k", ladder.block_k(b)}, {"l2", l2}, {"l4", l4}, {"linf", li}});
  }
  report::write_atomic(ctx.path("norms_report.csv"), csv.str());

  Json j = envelope(ctx, "norms report", n, g.N);
  j["snapshot"] = {{"path", snapshot_path}, {"n", snap.n}, {"N", snap.N}, {"L", snap.L}, {"fields", fields.size()}};
  j["l2"] = norms::spatial_norm(fields, 2.0);
  j["linf"] = norms::spatial_norm(fields, norms::kInf);
  j["sobolev"] = {{"s=n/2-1", norms::sobolev_norm(fields, n / 2.0 - 1.0)}, {"s=n/2", norms::sobolev_norm(fields, n / 2.0)}};
  j["blocks"] = blocks;
  Assertions a;
  bool finite = true;
  for (const auto& f : fields) finite = finite && std::isfinite(max_abs(f));
  a.check("finite values", finite, finite ? 1.0 : 0.0, 1.0);
  return finish(ctx, "norms_report", std::move(j), a);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavemap: gauged wave-map solver, gauge reconstruction and estimate lab"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool quiet = false;
  auto* seed_opt = app.add_option("--seed", seed, "Override the configured seed");
  app.add_option("--config", config_path, "Configuration file (key = value)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--quiet", quiet, "Suppress progress output");

  auto* mwm = app.add_subcommand("mwm", "Modified wave-map solver");
  mwm->require_subcommand(1);
  auto* mwm_run_cmd = mwm->add_subcommand("run", "Picard iteration on random small data");
  auto* mwm_stab_cmd = mwm->add_subcommand("stability", "Difference energy for identical and perturbed data");
  auto* mwm_reg_cmd = mwm->add_subcommand("regularity", "Higher Sobolev norm ratio over an ensemble");
  auto* gauge = app.add_subcommand("gauge", "Gauge reconstruction");
  gauge->require_subcommand(1);
  auto* roundtrip_cmd = gauge->add_subcommand("roundtrip", "Round trip against the direct integrator");
  auto* lab_cmd = app.add_subcommand("lab", "Estimate ratios over a random ensemble");
  std::string lab_id;
  lab_cmd->add_option("id", lab_id, "Estimate id or 'all'")->required();
  auto* norms_cmd = app.add_subcommand("norms", "Norm reports");
  norms_cmd->require_subcommand(1);
  auto* norms_report_cmd = norms_cmd->add_subcommand("report", "Shell norms of a snapshot");
  std::string snapshot_path;
  norms_report_cmd->add_option("snapshot", snapshot_path, "Snapshot file")->required();
  for (auto* sub : {mwm, mwm_run_cmd, mwm_stab_cmd, mwm_reg_cmd, gauge, roundtrip_cmd, lab_cmd, norms_cmd, norms_report_cmd})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  Context ctx;
  ctx.quiet = quiet;
  try {
    ctx.cfg = config_path.empty() ? config::Config{} : config::load(config_path);
    if (*seed_opt) ctx.cfg.seed = seed;
    if (!out_dir.empty()) config::set(ctx.cfg, "out", out_dir);
    config::validate(ctx.cfg);
    report::ensure_directory(ctx.cfg.out);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    if (*mwm_run_cmd) return mwm_run(ctx);
    if (*mwm_stab_cmd) return mwm_stability(ctx);
    if (*mwm_reg_cmd) return mwm_regularity(ctx);
    if (*roundtrip_cmd) return gauge_roundtrip(ctx);
    if (*lab_cmd) return lab_command(ctx, lab_id);
    if (*norms_report_cmd) return norms_report(ctx, snapshot_path);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return kAssertion;
  }
  return kConfig;
}
