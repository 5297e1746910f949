#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "params.hpp"
#include "symco/coalescent.hpp"
#include "symco/duality.hpp"
#include "symco/ensemble.hpp"
#include "symco/forward.hpp"
#include "symco/metric.hpp"
#include "symco/rates.hpp"
#include "symco/sde.hpp"

namespace symco::cli {

using nlohmann::json;

namespace {

std::string num(double v) { return format_number(v); }

json estimate_json(const Estimate& e) { return {{"mean", e.mean}, {"se", e.standard_error}, {"count", e.count}}; }

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

json header(const RunConfig& c) {
  return {{"command", c.command}, {"seed", c.seed}, {"replicates", c.replicates}, {"parameters", c.parameters}};
}

CommandResult finish(json results, std::string csv, FileSet extra = {}, bool passed = true) {
  CommandResult r;
  r.files = std::move(extra);
  results["passed"] = passed;
  r.files["results.json"] = results.dump(2) + "\n";
  r.files["results.csv"] = std::move(csv);
  r.passed = passed;
  return r;
}

CommandResult run_rates(const RunConfig& c) {
  const json& p = c.parameters;
  const auto f = p.contains("measure") ? measure_param(p["measure"]) : CoagulationMeasure::explicit_masses({{2, 1.0}});
  const int b = p.value("b", 3);
  const int n = p.value("n", b);
  json res = header(c);
  res["measure"] = json::parse(to_json(f));
  std::string csv = "b,signature,rate\n";
  json rates = json::array();
  for (const auto& parts : integer_partitions(b)) {
    const CollisionSignature sig(b, parts);
    if (!sig.is_merger()) continue;
    const double rate = collision_rate(f, sig);
    csv += std::to_string(b) + "," + sig.to_string() + "," + num(rate) + "\n";
    rates.push_back({{"signature", sig.to_string()}, {"parts", sig.parts()}, {"rate", rate}});
  }
  res["b"] = b;
  res["collision_rates"] = rates;

  const auto tr = total_rate(f, n, RateMethod::collision_prob_sum);
  json total = {{"n", n}, {"collision_prob_sum", tr.value}, {"error_bound", tr.error_bound}};
  if (n <= kPartitionSumMaxN) total["partition_sum"] = total_rate(f, n, RateMethod::partition_sum).value;
  res["total_rate"] = total;

  const auto q = block_counting_generator(f, n);
  std::string gen = "i,j,q\n";
  json entries = json::array();
  for (int i = 2; i <= n; ++i)
    for (int j = 1; j < i; ++j) {
      gen += std::to_string(i) + "," + std::to_string(j) + "," + num(q.rate(i, j)) + "\n";
      entries.push_back({{"i", i}, {"j", j}, {"q", q.rate(i, j)}});
    }
  res["generator"] = {{"n", n}, {"rates", entries}};
  res["cdi"] = cdi_check(f);
  return finish(std::move(res), std::move(csv), {{"generator.csv", gen}});
}

CommandResult run_simulate_coalescent(const RunConfig& c) {
  const json& p = c.parameters;
  const std::string model = p.value("model", "symmetric");
  const int n = p.value("n", 10);
  const TrackMode mode = p.value("mode", "counts") == "partitions" ? TrackMode::partitions : TrackMode::counts;
  const double eta = p.value("eta", 1.0);
  const double a = p.value("a", 1.0);
  CoagulationMeasure f = CoagulationMeasure::kingman();
  DiscreteLaw f0 = DiscreteLaw::point(2), durations = DiscreteLaw::point(1);
  PositiveLaw soft(PointMass{0.5});
  if (p.contains("measure")) f = measure_param(p["measure"]);
  if (p.contains("f0")) f0 = discrete_law_param(p["f0"]);
  if (p.contains("durations")) durations = discrete_law_param(p["durations"]);
  if (p.contains("soft_durations")) soft = positive_law_param(p["soft_durations"]);
  auto simulate = [&](Rng& rng) {
    if (model == "drastic") return simulate_drastic_bottleneck_coalescent(f0, durations, eta, a, n, rng, mode);
    if (model == "subordinated") return simulate_subordinated_kingman(soft, eta, a, n, rng, mode);
    return simulate_s_coalescent(f, n, rng, mode);
  };
  const bool keep_events = p.value("write_events", false);
  std::string events;
  const auto stats = run_replicates(c.replicates, c.workers, [&](std::size_t i) {
    Rng rng = make_stream(c.seed, i);
    auto run = simulate(rng);
    if (i == 0 && keep_events) {
      std::ostringstream out;
      write_events_jsonl(out, run);
      events = out.str();
    }
    return run.stats;
  });
  std::string csv = "replicate,tree_length,tmrca,events\n";
  RunningStats length, tmrca;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    length.add(stats[i].length);
    tmrca.add(stats[i].tmrca);
    csv += std::to_string(i) + "," + num(stats[i].length) + "," + num(stats[i].tmrca) + "," +
           std::to_string(stats[i].n_events) + "\n";
  }
  json res = header(c);
  res["model"] = model;
  res["n"] = n;
  res["tree_length"] = estimate_json(length.estimate());
  res["tmrca"] = estimate_json(tmrca.estimate());
  FileSet extra;
  if (keep_events) extra["events.jsonl"] = events;
  return finish(std::move(res), std::move(csv), std::move(extra));
}

CommandResult run_simulate_forward(const RunConfig& c) {
  const json& p = c.parameters;
  const Demography d = p.contains("demography") ? demography_param(p["demography"]) : Demography{ShortDrastic{}};
  const std::int64_t n = p.value("N", std::int64_t{100});
  const double x0 = p.value("x0", 0.5);
  const double alpha = demography_alpha(d);
  const double horizon = p.value("horizon", 1.0);
  const std::size_t generations =
      p.contains("generations") ? p["generations"].get<std::size_t>()
                                : static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), alpha) * horizon)) + 1;
  as_config("forward parameters", [&] {
    Rng probe = make_stream(c.seed, 0);
    (void)simulate_forward(d, n, x0, 1, probe);
    return 0;
  });
  struct Row {
    double final_frequency = 0.0;
    std::size_t bottleneck_generations = 0;
  };
  std::string trajectory, path;
  const auto rows = run_replicates(c.replicates, c.workers, [&](std::size_t i) {
    Rng rng = make_stream(c.seed, i);
    const auto t = simulate_forward(d, n, x0, generations, rng);
    if (i == 0) {
      std::ostringstream out;
      write_trajectory_csv(out, t);
      trajectory = out.str();
      const double span = static_cast<double>(generations - 1) / std::pow(static_cast<double>(n), alpha);
      if (span > 0.0) {
        std::ostringstream po;
        write_path_csv(po, rescale_time(t, alpha, span));
        path = po.str();
      }
    }
    Row r;
    r.final_frequency = t.frequency(t.length() - 1);
    for (auto b : t.in_bottleneck) r.bottleneck_generations += b;
    return r;
  });
  std::string csv = "replicate,final_frequency,bottleneck_generations\n";
  RunningStats freq;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    freq.add(rows[i].final_frequency);
    csv += std::to_string(i) + "," + num(rows[i].final_frequency) + "," + std::to_string(rows[i].bottleneck_generations) + "\n";
  }
  json res = header(c);
  res["N"] = n;
  res["generations"] = generations;
  res["alpha"] = alpha;
  res["final_frequency"] = estimate_json(freq.estimate());
  FileSet extra{{"trajectory.csv", trajectory}};
  if (!path.empty()) extra["rescaled_path.csv"] = path;
  return finish(std::move(res), std::move(csv), std::move(extra));
}

CommandResult run_simulate_sde(const RunConfig& c) {
  const json& p = c.parameters;
  JumpDiffusionSpec spec;
  spec.model = p.contains("model") ? sde_model_param(p["model"]) : SdeModel{Sde1{DiscreteLaw::point(2), 1.0}};
  spec.alpha = p.value("alpha", 1.0);
  spec.x0 = p.value("x0", 0.5);
  spec.horizon = p.value("horizon", 1.0);
  spec.dt = p.value("dt", 1e-3);
  const double dt_out = p.value("dt_out", 0.05);
  const auto moments = p.value("moments", std::vector<int>{1, 2, 3});
  std::vector<double> grid{0.0};
  if (dt_out > 0.0)
    for (int k = 1; k * dt_out < spec.horizon; ++k) grid.push_back(k * dt_out);
  grid.push_back(spec.horizon);
  spec.checkpoints = grid;
  as_config("sde parameters", [&] {
    JumpDiffusionSpec probe = spec;
    probe.horizon = std::min(spec.horizon, spec.dt);
    probe.checkpoints.clear();
    Rng rng = make_stream(c.seed, 0);
    (void)simulate_sde(probe, rng);
    return 0;
  });
  struct Row {
    std::vector<double> values;
    std::size_t jumps = 0;
  };
  std::string first_path;
  const auto rows = run_replicates(c.replicates, c.workers, [&](std::size_t i) {
    Rng rng = make_stream(c.seed, i);
    const auto s = simulate_sde(spec, rng);
    if (i == 0) {
      std::ostringstream out;
      write_path_csv(out, s.path);
      first_path = out.str();
    }
    Row r;
    for (double t : grid) r.values.push_back(s.path.value_at(t));
    r.jumps = s.jump_times.size();
    return r;
  });
  std::string csv = "replicate,final_value,jumps\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    csv += std::to_string(i) + "," + num(rows[i].values.back()) + "," + std::to_string(rows[i].jumps) + "\n";
  std::string mcsv = "t,n,mean,se\n";
  json table = json::array();
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (int m : moments) {
      RunningStats s;
      for (const auto& r : rows) s.add(std::pow(r.values[g], m));
      const auto e = s.estimate();
      mcsv += num(grid[g]) + "," + std::to_string(m) + "," + num(e.mean) + "," + num(e.standard_error) + "\n";
      table.push_back({{"t", grid[g]}, {"n", m}, {"mean", e.mean}, {"se", e.standard_error}});
    }
  json res = header(c);
  res["moments"] = table;
  return finish(std::move(res), std::move(csv), {{"moments.csv", mcsv}, {"path_0.csv", first_path}});
}

CommandResult run_duality(const RunConfig& c) {
  const json& p = c.parameters;
  DualityParams d;
  d.model = as_config("duality model", [&] { return duality_model_from_string(p.value("model", "short_drastic")); });
  d.alpha = p.value("alpha", 1.0);
  d.eta = p.value("eta", 1.0);
  if (p.contains("f0")) d.f0 = discrete_law_param(p["f0"]);
  if (p.contains("durations")) d.durations = discrete_law_param(p["durations"]);
  if (p.contains("soft_durations")) d.soft_durations = positive_law_param(p["soft_durations"]);
  d.dt = p.value("dt", 1e-3);
  const auto xs = p.value("xs", std::vector<double>{0.3, 0.7});
  const auto ns = p.value("ns", std::vector<int>{1, 2, 3});
  const double t = p.value("t", 0.5);
  const double threshold = p.value("threshold", 3.0);
  if (c.replicates < 2) throw ConfigError("duality: replicates must be at least 2");
  as_config("duality parameters", [&] {
    const int nmax = *std::max_element(ns.begin(), ns.end());
    (void)dual_generator(d, nmax);
    (void)dual_sde_spec(d, xs.front(), t);
    return 0;
  });
  const auto reports = duality_grid(d, xs, ns, t, c.replicates, c.seed, c.workers);
  std::string csv = "model,x,n,t,lhs,lhs_se,rhs,rhs_se,z,z_adjusted,passed\n";
  json list = json::array();
  bool all = true;
  for (const auto& r : reports) {
    const bool ok = r.passed(threshold);
    all = all && ok;
    json j = json::parse(r.to_json());
    j["passed"] = ok;
    list.push_back(j);
    csv += to_string(r.model) + "," + num(r.x) + "," + std::to_string(r.n) + "," + num(r.t) + "," + num(r.lhs) + "," +
           num(r.lhs_se) + "," + num(r.rhs) + "," + num(r.rhs_se) + "," + num(r.z) + "," + num(r.z_adjusted) + "," +
           (ok ? "true" : "false") + "\n";
  }
  json res = header(c);
  res["model"] = to_string(d.model);
  res["threshold"] = threshold;
  res["reports"] = list;
  return finish(std::move(res), std::move(csv), {}, all);
}

json dlambda_json(const DLambdaResult& r) {
  return {{"bound", r.bound},
          {"kept_mismatch", r.terms.kept_mismatch},
          {"time_deviation", r.terms.time_deviation},
          {"excluded_measure", r.terms.excluded_measure},
          {"final_gap", r.terms.final_gap}};
}

CommandResult run_metric_paths(const RunConfig& c) {
  const json& p = c.parameters;
  if (!p.contains("x") || !p.contains("y")) throw ConfigError("metric: source \"paths\" needs both x and y");
  const StepPath x = step_path_param(p["x"]);
  const StepPath y = step_path_param(p["y"]);
  if (x.horizon() != y.horizon()) throw ConfigError("metric: paths must share the horizon");
  const std::size_t budget = p.value("budget", std::size_t{10000});
  const auto dl = d_lambda_upper(x, y, budget);
  const auto j1 = j1_match(x, y, budget);
  const double uni = uniform_distance(x, y);
  const auto tests = default_test_functions(x.horizon());
  const auto stats = convergence_in_measure_stat(x, y, tests);
  std::string csv = "quantity,value\n";
  csv += "d_lambda_upper," + num(dl.bound) + "\n";
  csv += "j1," + num(j1.distance) + "\n";
  csv += "uniform," + num(uni) + "\n";
  json integrals = json::object();
  for (std::size_t i = 0; i < tests.size(); ++i) {
    csv += "integral:" + tests[i].name + "," + num(stats[i]) + "\n";
    integrals[tests[i].name] = stats[i];
  }
  csv += "final_gap," + num(stats.back()) + "\n";
  json res = header(c);
  res["d_lambda"] = dlambda_json(dl);
  res["j1"] = {{"distance", j1.distance}, {"exact", j1.exact}};
  res["uniform"] = uni;
  res["test_integrals"] = integrals;
  res["final_gap"] = stats.back();
  return finish(std::move(res), std::move(csv));
}

CommandResult run_metric_collapse(const RunConfig& c) {
  const json& p = c.parameters;
  LongDrastic d;
  d.alpha = p.value("alpha", 0.5);
  d.eta = p.value("eta", 5.0);
  d.f0 = p.contains("f0") ? discrete_law_param(p["f0"]) : DiscreteLaw::point(10);
  d.durations = p.contains("durations") ? discrete_law_param(p["durations"]) : DiscreteLaw::point(3);
  const std::int64_t n = p.value("N", std::int64_t{1000});
  const double x0 = p.value("x0", 0.5);
  const double horizon = p.value("horizon", 1.0);
  const std::size_t budget = p.value("budget", std::size_t{10000});
  const double scale = std::pow(static_cast<double>(n), d.alpha);
  const auto needed = static_cast<std::size_t>(std::floor(scale * horizon)) + 1;
  as_config("collapse parameters", [&] {
    Rng probe = make_stream(c.seed, 0);
    (void)simulate_forward(d, n, x0, 1, probe);
    return 0;
  });
  struct Row {
    double d_lambda = 0.0;
    double uniform = 0.0;
  };
  std::string raw_csv, collapsed_csv;
  const auto rows = run_replicates(c.replicates, c.workers, [&](std::size_t i) {
    Rng rng = make_stream(c.seed, i);
    const auto t = simulate_forward(d, n, x0, 2 * needed + 64, rng);
    const auto col = collapse_bottlenecks(t);
    if (col.collapsed.length() < needed)
      throw std::runtime_error("metric: bottlenecks consumed the whole simulated span; lower eta or durations");
    const StepPath raw = rescale_time(t, d.alpha, horizon);
    const StepPath collapsed = rescale_time(col.collapsed, d.alpha, horizon);
    const Srt hint = collapse_alignment(col, d.alpha, horizon);
    if (i == 0) {
      std::ostringstream a, b;
      write_path_csv(a, raw);
      write_path_csv(b, collapsed);
      raw_csv = a.str();
      collapsed_csv = b.str();
    }
    Row r;
    r.d_lambda = d_lambda_upper(raw, collapsed, budget, std::span<const Srt>(&hint, 1)).bound;
    r.uniform = uniform_distance(raw, collapsed);
    return r;
  });
  std::string csv = "replicate,d_lambda_upper,uniform\n";
  std::vector<double> dl, un;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    dl.push_back(rows[i].d_lambda);
    un.push_back(rows[i].uniform);
    csv += std::to_string(i) + "," + num(rows[i].d_lambda) + "," + num(rows[i].uniform) + "\n";
  }
  json res = header(c);
  res["N"] = n;
  res["median_d_lambda_upper"] = median(dl);
  res["median_uniform"] = median(un);
  return finish(std::move(res), std::move(csv), {{"raw_path_0.csv", raw_csv}, {"collapsed_path_0.csv", collapsed_csv}});
}

CommandResult run_asymptotics(const RunConfig& c) {
  const json& p = c.parameters;
  const auto betas = p.value("betas", std::vector<double>{0.5, 1.0});
  const auto ns = p.value("ns", std::vector<int>{100, 1000, 10000});
  TotalRateOptions opts;
  opts.crossover_factor = p.value("crossover_factor", 50.0);
  std::string csv = "beta,n,total_rate,error_bound,predicted,ratio\n";
  json series = json::array();
  for (double beta : betas) {
    json rows = json::array();
    double prev = INFINITY;
    bool monotone = true;
    const auto f = CoagulationMeasure::power_law(beta);
    for (int n : ns) {
      const auto tr = total_rate(f, n, RateMethod::collision_prob_sum, opts);
      const double pred = total_rate_asymptotic(beta, n);
      const double ratio = tr.value / pred;
      const double lr = std::abs(std::log(ratio));
      monotone = monotone && lr < prev;
      prev = lr;
      csv += num(beta) + "," + std::to_string(n) + "," + num(tr.value) + "," + num(tr.error_bound) + "," + num(pred) +
             "," + num(ratio) + "\n";
      rows.push_back({{"n", n}, {"total_rate", tr.value}, {"error_bound", tr.error_bound}, {"predicted", pred}, {"ratio", ratio}});
    }
    json s = {{"beta", beta}, {"rows", rows}, {"monotone_approach", monotone}};
    if (beta < 1.0) s["limit_constant"] = total_rate_limit_constant(beta);
    series.push_back(s);
  }
  json res = header(c);
  res["series"] = series;
  return finish(std::move(res), std::move(csv));
}

CommandResult run_mohle(const RunConfig& c) {
  const json& p = c.parameters;
  const RLaw law = p.contains("r_law") ? r_law_param(p["r_law"]) : RLaw{UniformR{}};
  std::vector<std::int64_t> sizes{100};
  if (p.contains("N")) {
    if (p["N"].is_array()) {
      sizes = p["N"].get<std::vector<std::int64_t>>();
    } else {
      sizes = {p["N"].get<std::int64_t>()};
    }
  }
  std::string csv = "N,C_N,D_N,ratio,N_C_N_over_log_N\n";
  json rows = json::array();
  for (std::int64_t n : sizes) {
    const auto m = mohle_coefficients(discretize_size_law(law, n), n);
    const double scaled = n > 1 ? n * m.c / std::log(static_cast<double>(n)) : NAN;
    csv += std::to_string(n) + "," + num(m.c) + "," + num(m.d) + "," + num(m.ratio()) + "," + num(scaled) + "\n";
    json row = {{"N", n}, {"C_N", m.c}, {"D_N", m.d}, {"ratio", m.ratio()}};
    if (n > 1) row["N_C_N_over_log_N"] = scaled;
    rows.push_back(row);
  }
  json res = header(c);
  res["rows"] = rows;
  if (rows.size() == 1) {
    res["C_N"] = rows[0]["C_N"];
    res["D_N"] = rows[0]["D_N"];
  }
  return finish(std::move(res), std::move(csv));
}

}  // namespace

CommandResult run_command(const RunConfig& c) {
  if (c.command == "rates") return run_rates(c);
  if (c.command == "simulate-coalescent") return run_simulate_coalescent(c);
  if (c.command == "simulate-forward") return run_simulate_forward(c);
  if (c.command == "simulate-sde") return run_simulate_sde(c);
  if (c.command == "duality") return run_duality(c);
  if (c.command == "metric")
    return c.parameters.value("source", "paths") == "collapse" ? run_metric_collapse(c) : run_metric_paths(c);
  if (c.command == "asymptotics") return run_asymptotics(c);
  if (c.command == "mohle") return run_mohle(c);
  throw ConfigError("unknown command " + c.command);
}

}  // namespace symco::cli
