#include "ifsm/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <functional>
#include <map>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ifsm/analysis.hpp"
#include "ifsm/builtin_models.hpp"
#include "ifsm/csv.hpp"
#include "ifsm/error.hpp"
#include "ifsm/hutchinson.hpp"
#include "ifsm/markov.hpp"
#include "ifsm/model_io.hpp"
#include "ifsm/process.hpp"
#include "ifsm/render.hpp"
#include "ifsm/rng.hpp"
#include "json.hpp"

namespace ifsm::cli {

namespace {

using ojson = nlohmann::ordered_json;

// Thrown by handlers to report a non-converged solver after outputs are written.
struct NotConverged {};

struct Run {
  std::vector<std::string> args;
  std::string subcommand;
  std::string prefix;
  std::string model_ref;
  std::optional<std::uint64_t> model_hash;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> resolution;
  std::vector<std::string> outputs;
  std::ostream* out = nullptr;

  void write(const std::string& suffix, const std::string& content) {
    const std::string path = prefix + suffix;
    write_file(path, content);
    outputs.push_back(path);
  }
};

IfsmModel load_ref(Run& run, const std::string& ref) {
  IfsmModel m = ref.rfind("builtin:", 0) == 0 ? models::by_name(ref.substr(8)) : load_model(ref);
  if (run.model_ref.empty()) {
    run.model_ref = ref;
    run.model_hash = model_hash(m);
  }
  return m;
}

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) throw ModelError("malformed point '" + text + "'");
    v.push_back(x);
  }
  if (v.empty()) throw ModelError("empty point");
  return v;
}

ojson constant_json(const Constant& c) {
  return {{"value", c.value}, {"provenance", to_string(c.provenance)}, {"sampled_estimate", c.sampled}};
}

ojson report_json(const HypothesisReport& r) {
  ojson conds = ojson::array();
  for (const auto& c : r.conditions) conds.push_back({{"name", c.name}, {"verdict", to_string(c.verdict)}, {"note", c.note}});
  ojson o{{"model", r.model},
          {"M", r.M},
          {"lip_one_step", constant_json(r.lip_one_step)},
          {"lip_M", constant_json(r.lip_M)},
          {"r", constant_json(r.r)},
          {"t", constant_json(r.t)},
          {"s", r.s},
          {"s_source", r.s_source},
          {"budget1", r.budget1},
          {"budget2", r.budget2},
          {"m1_estimate", r.m1_estimate}};
  o["mp1_estimate"] = r.mp1_estimate ? ojson(*r.mp1_estimate) : ojson(nullptr);
  o["h4_min_weight"] = r.h4_min_weight;
  if (r.partition_min) {
    o["partition_min"] = *r.partition_min;
    o["partition_max"] = *r.partition_max;
  }
  o["slack"] = r.slack;
  o["conditions"] = std::move(conds);
  return o;
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

void write_manifest(const Run& run, int code) {
  ojson m{{"tool", "ifsm"},
          {"version", kVersion},
          {"subcommand", run.subcommand},
          {"argv", run.args},
          {"model", run.model_ref.empty() ? ojson(nullptr) : ojson(run.model_ref)},
          {"model_hash", run.model_hash ? ojson(hex64(*run.model_hash)) : ojson(nullptr)},
          {"seed", run.seed ? ojson(*run.seed) : ojson(nullptr)},
          {"resolution", run.resolution ? ojson(*run.resolution) : ojson(nullptr)},
          {"rng", kRngName},
          {"outputs", run.outputs},
          {"exit_code", code}};
  try {
    write_file(run.prefix + ".manifest.json", dump(m));
  } catch (const Error&) {
    // the primary error, if any, has already been reported
  }
}

// Replaces or appends "--out PREFIX" in a recorded argument list.
std::vector<std::string> with_out(std::vector<std::string> args, const std::optional<std::string>& prefix) {
  if (!prefix) return args;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--out") {
      args[i + 1] = *prefix;
      return args;
    }
  args.push_back("--out");
  args.push_back(*prefix);
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args = raw_args;

  if (!args.empty() && args[0] == "--replay") {
    if (args.size() < 2) {
      err << "--replay needs a manifest path\n";
      return kUsage;
    }
    std::optional<std::string> prefix;
    for (std::size_t i = 2; i + 1 < args.size(); ++i)
      if (args[i] == "--out") prefix = args[i + 1];
    try {
      const auto m = nlohmann::json::parse(read_file(args[1]));
      return run(with_out(m.at("argv").get<std::vector<std::string>>(), prefix), out, err);
    } catch (const IoError& e) {
      err << "error: " << e.what() << "\n";
      return kIoError;
    } catch (const std::exception& e) {
      err << "error: invalid manifest: " << e.what() << "\n";
      return kModelError;
    }
  }

  CLI::App app{"Iterated function systems with place-dependent measures", "ifsm"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Run state;
  state.args = args;
  state.out = &out;

  std::string model_path, out_prefix;
  struct {
    std::size_t resolution = 729;
    double tol = 0.0;
    std::size_t max_iter = 200;
    std::size_t init_grid = 0;
  } att;
  struct {
    std::size_t resolution = 729;
    double tol = 1e-4;
    std::size_t max_iter = 500;
    std::string init;
  } inv;
  struct {
    std::size_t steps = 100000;
    std::uint64_t seed = 1;
    std::size_t burn_in = kDefaultBurnIn;
    std::string z0;
    std::size_t resolution = 729;
  } chs;
  struct {
    std::size_t samples = 2000;
    std::uint64_t seed = 0xc0ffee;
  } chk;
  struct {
    std::vector<std::string> models;
    std::string target;
    std::size_t resolution = 729;
    double tol = 1e-6;
    std::uint64_t seed = 0x57ab1e;
  } stb;
  struct {
    std::string a, b, metric = "euclidean";
    double max_pairs = 4e6;
  } dist;
  struct {
    std::string input, kind = "auto";
    std::size_t width = 256, height = 256;
  } ren;

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", model_path, "Model JSON file or builtin:<name>")->required();
  };
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", out_prefix, "Output path prefix (default: the subcommand name)");
  };

  auto* attractor_cmd = app.add_subcommand("attractor", "Iterate the fractal operator to its attractor");
  add_model(attractor_cmd);
  add_out(attractor_cmd);
  attractor_cmd->add_option("--resolution", att.resolution, "Snapping cells per axis (0: exact)")->capture_default_str();
  attractor_cmd->add_option("--tol", att.tol, "Hausdorff stopping tolerance (0: two cell diameters)")
      ->capture_default_str();
  attractor_cmd->add_option("--max-iter", att.max_iter, "Iteration cap")->capture_default_str();
  attractor_cmd->add_option("--init-grid", att.init_grid, "Start from a lattice with N points per axis (0: box corners)")
      ->capture_default_str();

  auto* invariant_cmd = app.add_subcommand("invariant", "Iterate the Markov operator to the invariant measure");
  add_model(invariant_cmd);
  add_out(invariant_cmd);
  invariant_cmd->add_option("--resolution", inv.resolution, "Binning cells per axis (0: exact atoms)")
      ->capture_default_str();
  invariant_cmd->add_option("--tol", inv.tol, "W1 stopping tolerance")->capture_default_str();
  invariant_cmd->add_option("--max-iter", inv.max_iter, "Iteration cap")->capture_default_str();
  invariant_cmd->add_option("--init", inv.init, "Initial measure CSV (default: uniform over the grid)");

  auto* chaos_cmd = app.add_subcommand("chaos", "Sample a chaos-game trajectory");
  add_model(chaos_cmd);
  add_out(chaos_cmd);
  chaos_cmd->add_option("--steps", chs.steps, "Number of steps")->capture_default_str();
  chaos_cmd->add_option("--seed", chs.seed, "Generator seed")->capture_default_str();
  chaos_cmd->add_option("--burn-in", chs.burn_in, "Points dropped from the empirical measure")->capture_default_str();
  chaos_cmd->add_option("--z0", chs.z0, "Start point, comma separated (default: domain center)");
  chaos_cmd->add_option("--resolution", chs.resolution, "Binning cells per axis for the empirical measure")
      ->capture_default_str();

  auto* check_cmd = app.add_subcommand("check", "Estimate the contraction constants and check the hypotheses");
  add_model(check_cmd);
  add_out(check_cmd);
  check_cmd->add_option("--samples", chk.samples, "Random pairs per sampled estimate")->capture_default_str();
  check_cmd->add_option("--seed", chk.seed, "Sampling seed")->capture_default_str();

  auto* stability_cmd = app.add_subcommand("stability", "Stochastic-stability experiment");
  stability_cmd->add_option("--models", stb.models, "Perturbed models (JSON or builtin:<name>)")->required();
  stability_cmd->add_option("--target", stb.target, "Limit model")->required();
  add_out(stability_cmd);
  stability_cmd->add_option("--resolution", stb.resolution, "Binning cells per axis")->capture_default_str();
  stability_cmd->add_option("--tol", stb.tol, "Invariant-measure tolerance")->capture_default_str();
  stability_cmd->add_option("--seed", stb.seed, "Seed for the random sup points")->capture_default_str();

  auto* wasserstein_cmd = app.add_subcommand("wasserstein", "W1 distance between two measure CSV files");
  wasserstein_cmd->add_option("--mu", dist.a, "First measure CSV")->required();
  wasserstein_cmd->add_option("--nu", dist.b, "Second measure CSV")->required();
  wasserstein_cmd->add_option("--metric", dist.metric, "euclidean or max_coord")->capture_default_str();
  wasserstein_cmd->add_option("--max-pairs", dist.max_pairs, "Cap on the support-size product")->capture_default_str();
  add_out(wasserstein_cmd);

  auto* hausdorff_cmd = app.add_subcommand("hausdorff", "Hausdorff distance between two cloud CSV files");
  hausdorff_cmd->add_option("--a", dist.a, "First cloud CSV")->required();
  hausdorff_cmd->add_option("--b", dist.b, "Second cloud CSV")->required();
  hausdorff_cmd->add_option("--metric", dist.metric, "euclidean or max_coord")->capture_default_str();
  add_out(hausdorff_cmd);

  auto* render_cmd = app.add_subcommand("render", "Render a 1D/2D cloud or measure CSV as plain PGM");
  render_cmd->add_option("--input", ren.input, "Cloud or measure CSV")->required();
  render_cmd->add_option("--kind", ren.kind, "cloud, measure or auto (by the weight column)")->capture_default_str();
  render_cmd->add_option("--model", model_path, "Take the image box from this model's domain");
  render_cmd->add_option("--width", ren.width, "Image width")->capture_default_str();
  render_cmd->add_option("--height", ren.height, "Image height")->capture_default_str();
  add_out(render_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  state.subcommand = sub->get_name();
  state.prefix = out_prefix.empty() ? state.subcommand : out_prefix;

  auto attractor_run = [&] {
    const IfsmModel model = load_ref(state, model_path);
    state.resolution = att.resolution;
    const PointCloud b0 = att.init_grid > 0 ? PointCloud::grid(model.domain(), att.init_grid)
                                        : PointCloud(model.domain().corners());
    const AttractorResult res = attractor(model, b0, {att.resolution, att.tol, att.max_iter});
    state.write(".cloud.csv", cloud_to_csv(res.cloud));
    ojson log{{"converged", res.log.converged},       {"iterations", res.log.iterations},
              {"tol", res.tol},                       {"snap_error", res.log.snap_error},
              {"points", res.cloud.size()},           {"deltas", res.log.deltas},
              {"ratios", res.log.ratios},             {"observed_ratio", res.log.observed_ratio}};
    state.write(".log.json", dump(log));
    out << "attractor: " << res.cloud.size() << " points, " << res.log.iterations << " iterations, "
        << (res.log.converged ? "converged" : "NOT converged") << "\n";
    if (!res.log.converged) throw NotConverged{};
  };

  auto invariant_run = [&] {
    const IfsmModel model = load_ref(state, model_path);
    state.resolution = inv.resolution;
    const HypothesisReport rep = check_hypotheses(model);
    InvariantOptions opts{inv.resolution, inv.tol, inv.max_iter, std::nullopt};
    if (rep.s_source == "C1" && rep.budget1 < 1.0) opts.contraction = rep.budget1;
    std::optional<DiscreteMeasure> mu0;
    if (!inv.init.empty()) mu0 = measure_from_csv(read_file(inv.init));
    const InvariantResult res = invariant_measure(model, mu0, opts);
    state.write(".measure.csv", measure_to_csv(res.measure));
    ojson log{{"converged", res.log.converged}, {"iterations", res.log.iterations}, {"tol", inv.tol},
              {"cell_diameter", res.log.cell_diameter}, {"atoms", res.measure.size()}};
    log["contraction"] = opts.contraction ? ojson(*opts.contraction) : ojson(nullptr);
    log["residual_bound"] = res.log.residual_bound ? ojson(*res.log.residual_bound) : ojson(nullptr);
    log["deltas"] = res.log.deltas;
    log["ratios"] = res.log.ratios;
    log["observed_ratio"] = res.log.observed_ratio;
    state.write(".log.json", dump(log));
    out << "invariant: " << res.measure.size() << " atoms, " << res.log.iterations << " iterations, "
        << (res.log.converged ? "converged" : "NOT converged") << "\n";
    if (!res.log.converged) throw NotConverged{};
  };

  auto chaos_run = [&] {
    const IfsmModel model = load_ref(state, model_path);
    state.seed = chs.seed;
    state.resolution = chs.resolution;
    std::vector<double> z0;
    if (chs.z0.empty()) {
      for (std::size_t a = 0; a < model.dim(); ++a) z0.push_back(0.5 * (model.domain().lo[a] + model.domain().hi[a]));
    } else {
      z0 = parse_point(chs.z0);
    }
    const Trajectory t = sample_trajectory(model, z0, chs.steps, chs.seed);
    std::string csv;
    for (std::size_t a = 0; a < t.dim; ++a) csv += "x" + std::to_string(a) + ",";
    csv += "next_index\n";
    for (std::size_t k = 0; k < t.size(); ++k) {
      for (double v : t.point(k)) csv += format_double(v) + ",";
      csv += (k < t.chosen.size() ? std::to_string(t.chosen[k]) : std::string("-1")) + "\n";
    }
    state.write(".trajectory.csv", csv);
    const DiscreteMeasure emp = empirical_measure(t, std::min(chs.burn_in, t.size() - 1), model.domain(), chs.resolution);
    state.write(".empirical.csv", measure_to_csv(emp));
    out << "chaos: " << chs.steps << " steps, " << emp.size() << " occupied cells\n";
  };

  auto check_run = [&] {
    const IfsmModel model = load_ref(state, model_path);
    state.seed = chk.seed;
    CheckOptions opts;
    opts.samples = chk.samples;
    opts.seed = chk.seed;
    const std::string text = dump(report_json(check_hypotheses(model, opts)));
    state.write(".check.json", text);
    out << text;
  };

  auto stability_run = [&] {
    state.seed = stb.seed;
    state.resolution = stb.resolution;
    const IfsmModel target = load_ref(state, stb.target);
    std::vector<IfsmModel> list;
    for (const auto& p : stb.models) list.push_back(load_ref(state, p));
    StabilityOptions opts;
    opts.resolution = stb.resolution;
    opts.tol = stb.tol;
    opts.seed = stb.seed;
    const StabilityReport rep = stability_experiment(list, target, opts);
    ojson rows = ojson::array();
    for (const auto& r : rep.rows)
      rows.push_back({{"model", stb.models[r.index]}, {"eps", r.eps}, {"distance", r.distance}, {"bound", r.bound},
                      {"holds", r.holds}, {"converged", r.converged}});
    const ojson o{{"s", rep.s},           {"r", rep.r},         {"t", rep.t},
                  {"coefficient", rep.coefficient},             {"slack", rep.slack},
                  {"target_converged", rep.target_converged},   {"rows", std::move(rows)},
                  {"all_hold", rep.all_hold}, {"monotone", rep.monotone}};
    const std::string text = dump(o);
    state.write(".stability.json", text);
    out << text;
    if (!rep.target_converged ||
        std::any_of(rep.rows.begin(), rep.rows.end(), [](const StabilityRow& r) { return !r.converged; }))
      throw NotConverged{};
  };

  auto wasserstein_run = [&] {
    const DiscreteMeasure mu = measure_from_csv(read_file(dist.a));
    const DiscreteMeasure nu = measure_from_csv(read_file(dist.b));
    const double w = wasserstein1(mu, nu, parse_metric(dist.metric), {dist.max_pairs});
    state.write(".result.json", dump({{"wasserstein1", w}, {"metric", dist.metric}}));
    out << format_double(w) << "\n";
  };

  auto hausdorff_run = [&] {
    const PointCloud a = cloud_from_csv(read_file(dist.a));
    const PointCloud b = cloud_from_csv(read_file(dist.b));
    const double h = hausdorff(a, b, parse_metric(dist.metric));
    state.write(".result.json", dump({{"hausdorff", h}, {"metric", dist.metric}}));
    out << format_double(h) << "\n";
  };

  auto render_run = [&] {
    const std::string text = read_file(ren.input);
    const std::string first_line = text.substr(0, text.find('\n'));
    const bool measure = ren.kind == "measure" || (ren.kind == "auto" && first_line.find("weight") != std::string::npos);
    if (ren.kind != "auto" && ren.kind != "measure" && ren.kind != "cloud") throw ModelError("render: unknown --kind '" + ren.kind + "'");
    std::string img;
    if (measure) {
      const DiscreteMeasure mu = measure_from_csv(text);
      const Box box = model_path.empty() ? mu.atoms().bounding_box() : load_ref(state, model_path).domain();
      img = render_measure(mu, box, ren.width, ren.height);
    } else {
      const PointCloud c = cloud_from_csv(text);
      const Box box = model_path.empty() ? c.bounding_box() : load_ref(state, model_path).domain();
      img = render_cloud(c, box, ren.width, ren.height);
    }
    state.write(".pgm", img);
  };

  const std::map<std::string, std::function<void()>> handlers{
      {"attractor", attractor_run}, {"invariant", invariant_run},     {"chaos", chaos_run},
      {"check", check_run},         {"stability", stability_run},     {"wasserstein", wasserstein_run},
      {"hausdorff", hausdorff_run}, {"render", render_run}};

  int code = kOk;
  try {
    handlers.at(state.subcommand)();
  } catch (const NotConverged&) {
    code = kNotConverged;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    code = kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    code = kModelError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = kModelError;
  }
  write_manifest(state, code);
  return code;
}

}  // namespace ifsm::cli
