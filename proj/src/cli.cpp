#include "qad/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "qad/oracle.hpp"

namespace qad::cli {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  return j.at(key);
}

double get_real(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> get_reals(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_array()) throw ConfigError(std::string("'") + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(std::string("'") + key + "' must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

CellSet get_cells(const json& v, const char* key) {
  if (!v.is_array()) throw ConfigError(std::string("'") + key + "' must be an array of cell indices");
  CellSet out;
  for (const auto& x : v) {
    if (!x.is_number_unsigned()) throw ConfigError(std::string("'") + key + "' must hold non-negative integers");
    out.push_back(x.get<std::size_t>());
  }
  return out;
}

PolicyKind get_policy(const std::string& name) {
  const auto kind = parse_policy(name);
  if (!kind) {
    std::string valid;
    for (PolicyKind k : all_policies()) valid += (valid.empty() ? "" : ", ") + std::string(policy_name(k));
    throw ConfigError("unknown policy '" + name + "' (valid: " + valid + ")");
  }
  return *kind;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join_cells(const std::vector<std::size_t>& cells) {
  std::string out;
  for (std::size_t c : cells) out += (out.empty() ? "" : " ") + std::to_string(c);
  return out;
}

std::string join_numbers(const std::vector<double>& values) {
  std::string out;
  for (double v : values) out += (out.empty() ? "" : " ") + format_number(v);
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << contents;
  os.flush();
  if (!os) throw IoError("failed writing " + path.string());
}

json tau1_to_json(const Tau1DecayReport& r) {
  return {{"measured", r.measured},   {"censored", r.censored},   {"conclusive", r.conclusive},
          {"gamma_hat", r.gamma_hat}, {"slope", r.slope},         {"tail_rounds", r.tail_rounds},
          {"survival", r.survival},   {"residuals", r.residuals}};
}

}  // namespace

ExperimentConfig config_for(const RunPlan& plan, PolicyKind policy) {
  ExperimentConfig cfg = plan.base;
  cfg.policy = policy;
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(policy_name(policy)) + ": " + e.what());
  }
  return cfg;
}

json model_to_json(const ObservationModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return {{"kind", "exponential"}, {"lambda_f", m.lambda_f}, {"lambda_g", m.lambda_g}};
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return {{"kind", "gaussian"}, {"mu_f", m.mu_f}, {"mu_g", m.mu_g}, {"sigma", m.sigma}};
        } else if constexpr (std::is_same_v<T, Bernoulli>) {
          return {{"kind", "bernoulli"}, {"p_f", m.p_f}, {"p_g", m.p_g}};
        } else {
          return {{"kind", "tabulated"}, {"support", m.support}, {"pmf_f", m.pmf_f}, {"pmf_g", m.pmf_g}};
        }
      },
      model.kind());
}

ObservationModel model_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("'model' must be an object");
  const json& kind = require(j, "kind");
  if (!kind.is_string()) throw ConfigError("model 'kind' must be a string");
  const auto name = kind.get<std::string>();
  try {
    if (name == "exponential") return ObservationModel::exponential(get_real(j, "lambda_f"), get_real(j, "lambda_g"));
    if (name == "gaussian") {
      return ObservationModel::gaussian(get_real(j, "mu_f"), get_real(j, "mu_g"), get_real(j, "sigma"));
    }
    if (name == "bernoulli") return ObservationModel::bernoulli(get_real(j, "p_f"), get_real(j, "p_g"));
    if (name == "tabulated") {
      return ObservationModel::tabulated(get_reals(j, "support"), get_reals(j, "pmf_f"), get_reals(j, "pmf_g"));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  throw ConfigError("unknown model kind '" + name + "' (valid: exponential, gaussian, bernoulli, tabulated)");
}

json plan_to_json(const RunPlan& plan) {
  const ExperimentConfig& c = plan.base;
  json policies = json::array();
  for (PolicyKind k : plan.policies) policies.push_back(std::string(policy_name(k)));
  json j = {
      {"M", c.num_cells},
      {"K", c.probes_per_round},
      {"L", c.num_targets},
      {"policies", policies},
      {"model", model_to_json(c.model)},
      {"neg_log_c", c.neg_log_costs},
      {"priors", c.priors},
      {"trials", c.trials},
      {"seed", c.seed},
      {"true_targets", c.true_target_count},
      {"fixed_targets", c.fixed_targets ? json(*c.fixed_targets) : json(nullptr)},
      {"max_rounds", c.max_rounds},
      {"diagnostics", c.diagnostics},
      {"threads", c.threads},
      {"out", plan.out_dir},
      {"dump_trials", plan.dump_trials},
      {"trajectory", plan.trajectory ? json(*plan.trajectory) : json(nullptr)},
  };
  return j;
}

RunPlan plan_from_json(const json& j, RunPlan base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known = {
      "M",    "K",            "L",             "policies",   "model",       "neg_log_c",   "priors",     "trials",
      "seed", "true_targets", "fixed_targets", "max_rounds", "diagnostics", "threads",     "out",        "dump_trials",
      "trajectory"};
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigError("unknown config key '" + item.key() + "'");
    }
  }
  RunPlan plan = std::move(base);
  ExperimentConfig& c = plan.base;
  if (j.contains("M")) c.num_cells = get_count(j, "M");
  if (j.contains("K")) c.probes_per_round = get_count(j, "K");
  if (j.contains("L")) c.num_targets = get_count(j, "L");
  if (j.contains("policies")) {
    const json& v = j.at("policies");
    if (!v.is_array() || v.empty()) throw ConfigError("'policies' must be a non-empty array of names");
    plan.policies.clear();
    for (const auto& p : v) {
      if (!p.is_string()) throw ConfigError("'policies' must hold strings");
      plan.policies.push_back(get_policy(p.get<std::string>()));
    }
  }
  if (j.contains("model")) c.model = model_from_json(j.at("model"));
  if (j.contains("neg_log_c")) c.neg_log_costs = get_reals(j, "neg_log_c");
  if (j.contains("priors")) c.priors = get_reals(j, "priors");
  if (j.contains("trials")) c.trials = get_count(j, "trials");
  if (j.contains("seed")) c.seed = get_count(j, "seed");
  if (j.contains("true_targets")) c.true_target_count = get_count(j, "true_targets");
  if (j.contains("fixed_targets")) {
    const json& v = j.at("fixed_targets");
    c.fixed_targets = v.is_null() ? std::nullopt : std::optional<CellSet>(get_cells(v, "fixed_targets"));
  }
  if (j.contains("max_rounds")) c.max_rounds = get_count(j, "max_rounds");
  if (j.contains("diagnostics")) {
    if (!j.at("diagnostics").is_boolean()) throw ConfigError("'diagnostics' must be a boolean");
    c.diagnostics = j.at("diagnostics").get<bool>();
  }
  if (j.contains("threads")) c.threads = static_cast<int>(get_count(j, "threads"));
  if (j.contains("out")) {
    if (!j.at("out").is_string()) throw ConfigError("'out' must be a string");
    plan.out_dir = j.at("out").get<std::string>();
  }
  if (j.contains("dump_trials")) {
    if (!j.at("dump_trials").is_boolean()) throw ConfigError("'dump_trials' must be a boolean");
    plan.dump_trials = j.at("dump_trials").get<bool>();
  }
  if (j.contains("trajectory")) {
    const json& v = j.at("trajectory");
    plan.trajectory = v.is_null() ? std::nullopt : std::optional<std::uint64_t>(get_count(j, "trajectory"));
  }
  return plan;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig2", "fig3", "fig4", "table2", "table1_example", "verify"};
  return names;
}

RunPlan preset(std::string_view name) {
  RunPlan plan;
  ExperimentConfig& c = plan.base;
  c.trials = 10000;
  c.neg_log_costs = {1.0, 2.0, 3.0, 4.0, 5.0};
  plan.policies = {PolicyKind::dgf, PolicyKind::chernoff};
  if (name == "fig2") {
    c.num_cells = 5;
    c.probes_per_round = 1;
    c.model = ObservationModel::exponential(0.5, 10.0);
  } else if (name == "fig3") {
    c.num_cells = 5;
    c.probes_per_round = 2;
    c.model = ObservationModel::exponential(2.0, 10.0);
  } else if (name == "fig4") {
    c.num_cells = 5;
    c.probes_per_round = 2;
    c.model = ObservationModel::exponential(0.5, 10.0);
  } else if (name == "table2") {
    // Decades of c: c = 10^-1, 10^-3, 10^-5.
    c.num_cells = 5;
    c.probes_per_round = 1;
    c.model = ObservationModel::exponential(0.5, 10.0);
    c.neg_log_costs = {std::log(10.0), 3.0 * std::log(10.0), 5.0 * std::log(10.0)};
  } else if (name == "table1_example") {
    c.num_cells = 3;
    c.probes_per_round = 1;
    c.num_targets = 2;
    c.true_target_count = 1;
    c.fixed_targets = CellSet{0};
    c.model = ObservationModel::exponential(1.0, 0.25);
    c.neg_log_costs = {8.0};
    plan.policies = {PolicyKind::unknown_l, PolicyKind::chernoff_generic};
  } else {
    std::string valid;
    for (const auto& n : preset_names()) {
      if (n != "verify") valid += (valid.empty() ? "" : ", ") + n;
    }
    throw ConfigError("unknown preset '" + std::string(name) + "' (valid: " + valid + ", verify)");
  }
  return plan;
}

double BoundModel::lower_bound(double cost) const {
  if (unknown_count) return bayes_lower_bound(cost, rate.d_gf) * static_cast<double>(true_targets);
  return rate.lower_bound_at(cost);
}

BoundModel bound_model(const ExperimentConfig& cfg) {
  BoundModel b;
  const KlPair& kl = cfg.model.kl();
  if (unknown_count_mode(cfg)) {
    b.unknown_count = true;
    b.true_targets = cfg.true_target_count;
    b.rate.d_gf = kl.d_gf;
    b.rate.d_fg = kl.d_fg;
    b.rate.i_star = kl.d_gf / static_cast<double>(cfg.true_target_count);
    b.rate.regime = Regime::g;
  } else if (cfg.num_targets == 1) {
    b.rate = rate_single(kl, cfg.num_cells, cfg.probes_per_round);
  } else {
    b.rate = rate_multi(kl, cfg.num_cells, cfg.probes_per_round, cfg.num_targets);
    b.true_targets = cfg.num_targets;
  }
  return b;
}

json manifest_to_json(const RunManifest& m) {
  json bounds = json::array();
  for (const auto& [policy, b] : m.bounds) {
    bounds.push_back({{"policy", std::string(policy_name(policy))},
                      {"d_gf", b.rate.d_gf},
                      {"d_fg", b.rate.d_fg},
                      {"i_star", b.rate.i_star},
                      {"regime", regime_name(b.rate.regime)},
                      {"unknown_count", b.unknown_count},
                      {"true_targets", b.true_targets}});
  }
  return {{"config", plan_to_json(m.plan)},
          {"rates", bounds},
          {"version", m.version},
          {"timestamp", m.timestamp},
          {"outputs", m.outputs}};
}

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string csv_header() {
  return "policy,M,K,L,neg_log_c,c,trials,p_e,mean_tau,mean_tau_d,bayes_risk,lower_bound,relative_loss,sigma,"
         "ci_low,ci_high,truncations\n";
}

std::string csv_row(const ResultRow& r) {
  const AggregateMetrics& m = r.point.metrics;
  std::ostringstream os;
  os << policy_name(r.policy) << ',' << r.num_cells << ',' << r.probes_per_round << ',' << r.num_targets << ','
     << format_number(r.point.neg_log_cost) << ',' << format_number(r.point.cost) << ',' << m.trial_count << ','
     << format_number(m.p_e) << ',' << format_number(m.mean_tau) << ',' << format_number(m.mean_tau_d) << ','
     << format_number(m.bayes_risk) << ',' << format_number(r.lower_bound) << ',' << format_number(r.relative_loss)
     << ',' << format_number(m.sigma) << ',' << format_number(m.ci_low) << ',' << format_number(m.ci_high) << ','
     << m.truncations << '\n';
  return os.str();
}

RunOutput execute(const RunPlan& plan, std::ostream& progress) {
  RunOutput out;
  out.manifest.plan = plan;
  out.manifest.timestamp = utc_timestamp();

  std::vector<ExperimentConfig> configs;
  for (PolicyKind p : plan.policies) configs.push_back(config_for(plan, p));
  if (plan.trajectory && *plan.trajectory >= plan.base.trials) {
    throw ConfigError("trajectory index must be below trials");
  }

  const std::filesystem::path dir(plan.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  std::string trials_csv = "policy,neg_log_c,trial,true_hypothesis,truth,decision,correct,tau,tau_d,tau1,truncated\n";
  std::string trajectory_csv = "policy,neg_log_c,n,probes,observations,s\n";

  for (const ExperimentConfig& cfg : configs) {
    const BoundModel bounds = bound_model(cfg);
    out.manifest.bounds.emplace_back(cfg.policy, bounds);
    if (bounds.unknown_count && !cells_suffice_for_targets(cfg.model, cfg.num_cells, cfg.num_targets)) {
      progress << "warning: M >= L(D(g||f)+D(f||g))/D(g||f) does not hold; the unknown-count lower bound "
                  "may not be attained\n";
    }
    const Simulator sim(cfg);
    const std::string name(policy_name(cfg.policy));
    for (double t : cfg.neg_log_costs) {
      const double cost = std::exp(-t);
      const auto results = sim.run_trials_parallel(cost);
      ResultRow row;
      row.policy = cfg.policy;
      row.num_cells = cfg.num_cells;
      row.probes_per_round = cfg.probes_per_round;
      row.num_targets = cfg.num_targets;
      row.point = {t, cost, aggregate(results, cost)};
      row.lower_bound = bounds.lower_bound(cost);
      row.relative_loss = relative_loss(row.point.metrics.bayes_risk, row.lower_bound);
      out.rows.push_back(row);

      const auto& m = row.point.metrics;
      progress << name << " -log c=" << t << " trials=" << m.trial_count << " p_e=" << m.p_e
               << " mean_tau=" << m.mean_tau << " mean_tau_d=" << m.mean_tau_d << " risk=" << m.bayes_risk
               << " loss=" << row.relative_loss << '\n';

      if (plan.dump_trials) {
        for (std::size_t i = 0; i < results.size(); ++i) {
          const auto& r = results[i];
          trials_csv += name + ',' + format_number(t) + ',' + std::to_string(i) + ',' + std::to_string(r.true_hypothesis) +
                        ',' + join_cells(r.truth) + ',' + join_cells(r.decision) + ',' + (r.correct ? "1" : "0") + ',' +
                        std::to_string(r.tau) + ',' + std::to_string(r.tau_d) + ',' +
                        (r.tau1 ? std::to_string(*r.tau1) : std::string()) + ',' + (r.truncated ? "1" : "0") + '\n';
        }
      }
      if (plan.trajectory) {
        sim.run_trial(cost, *plan.trajectory,
                      [&](const SearchState& s, const std::vector<std::size_t>& probes, const std::vector<double>& obs) {
                        trajectory_csv += name + ',' + format_number(t) + ',' + std::to_string(s.round()) + ',' +
                                          join_cells(probes) + ',' + join_numbers(obs) + ',' +
                                          join_numbers(s.sums()) + '\n';
                      });
      }
      if (cfg.diagnostics && !unknown_count_mode(cfg) && cfg.num_targets == 1) {
        out.diagnostics[name][format_number(t)] = tau1_to_json(tau1_decay(results));
      }
    }
  }

  std::string csv = csv_header();
  for (const auto& row : out.rows) csv += csv_row(row);

  out.manifest.outputs = {(dir / "results.csv").string(), (dir / "summary.json").string()};
  if (plan.dump_trials) out.manifest.outputs.push_back((dir / "trials.csv").string());
  if (plan.trajectory) out.manifest.outputs.push_back((dir / "trajectory.csv").string());

  json summary = manifest_to_json(out.manifest);
  json rows = json::array();
  for (const auto& r : out.rows) {
    const auto& m = r.point.metrics;
    rows.push_back({{"policy", std::string(policy_name(r.policy))},
                    {"neg_log_c", r.point.neg_log_cost},
                    {"c", r.point.cost},
                    {"p_e", m.p_e},
                    {"mean_tau", m.mean_tau},
                    {"mean_tau_d", m.mean_tau_d},
                    {"bayes_risk", m.bayes_risk},
                    {"risk_ci", {m.risk_ci_low, m.risk_ci_high}},
                    {"lower_bound", r.lower_bound},
                    {"relative_loss", r.relative_loss},
                    {"sigma", m.sigma},
                    {"ci95", {m.ci_low, m.ci_high}},
                    {"r_empirical", m.r_empirical},
                    {"truncations", m.truncations},
                    {"trials", m.trial_count}});
  }
  summary["results"] = rows;
  if (!out.diagnostics.empty()) summary["tau1"] = out.diagnostics;

  write_file(dir / "results.csv", csv);
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  if (plan.dump_trials) write_file(dir / "trials.csv", trials_csv);
  if (plan.trajectory) write_file(dir / "trajectory.csv", trajectory_csv);
  return out;
}

bool run_verify(std::ostream& out) {
  bool all = true;
  const auto row = [&](const std::string& check, double expected, double got, double tol) {
    const double diff = std::abs(expected - got);
    const bool ok = diff <= tol;
    all = all && ok;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-48s %14.8g %14.8g %10.2e  %s\n", check.c_str(), expected, got, diff,
                  ok ? "PASS" : "FAIL");
    out << buf;
  };
  char head[256];
  std::snprintf(head, sizeof head, "%-48s %14s %14s %10s  %s\n", "check", "closed form", "oracle", "diff", "result");
  out << head;

  const std::vector<std::pair<std::string, ObservationModel>> models = {
      {"exponential(0.5,10)", ObservationModel::exponential(0.5, 10.0)},
      {"exponential(2,10)", ObservationModel::exponential(2.0, 10.0)},
      {"exponential(1,0.25)", ObservationModel::exponential(1.0, 0.25)},
      {"gaussian(0,1,1)", ObservationModel::gaussian(0.0, 1.0, 1.0)},
      {"bernoulli(0.2,0.8)", ObservationModel::bernoulli(0.2, 0.8)},
  };
  for (const auto& [label, model] : models) {
    const KlPair q = kl_quadrature(model);
    row("D(g||f) " + label, model.kl().d_gf, q.d_gf, 1e-6);
    row("D(f||g) " + label, model.kl().d_fg, q.d_fg, 1e-6);
  }

  for (const auto& [label, model] : models) {
    for (std::size_t m = 3; m <= 5; ++m) {
      for (std::size_t k = 1; k < m; ++k) {
        const auto actions = subsets_of_size(m, k);
        const auto hyps = subsets_of_size(m, 1);
        const auto table = HypothesisActionKL::anomaly(model.kl(), m, hyps, actions);
        const auto sol = maximin_action_distribution(table, 0);
        row("I*(M=" + std::to_string(m) + ",K=" + std::to_string(k) + ") " + label,
            rate_single(model.kl(), m, k).i_star, sol.value, 1e-6);
      }
    }
  }

  const ObservationModel t1 = ObservationModel::exponential(1.0, 0.25);
  const auto hyps = generic_hypotheses(3, 2);
  const auto actions = subsets_of_size(3, 1);
  const auto table = HypothesisActionKL::anomaly(t1.kl(), 3, hyps, actions);
  const auto sol = maximin_action_distribution(table, 0);
  row("unknown-count M=3 L=2 value D(f||g)/2", t1.kl().d_fg / 2.0, sol.value, 1e-6);
  row("unknown-count M=3 L=2 q(cell 1)", 0.0, sol.q[0], 1e-6);
  row("unknown-count M=3 L=2 q(cell 2)", 0.5, sol.q[1], 1e-6);
  row("unknown-count M=3 L=2 q(cell 3)", 0.5, sol.q[2], 1e-6);

  const auto grid = maximin_grid_search(table, 0, 200);
  row("unknown-count M=3 L=2 LP vs grid", grid.value, sol.value, 1e-4);

  out << (all ? "verify: all checks passed\n" : "verify: FAILED\n");
  return all;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quickest anomaly detection simulator", "qad"};
  app.set_version_flag("--version", std::string(kVersion));

  auto* verify = app.add_subcommand("verify", "Cross-check closed forms against the numerical oracles");

  std::optional<std::string> config_path, preset_name, model_kind, out_dir;
  std::optional<std::size_t> m, k, l, true_targets;
  std::optional<std::uint64_t> trials, seed, max_rounds, trajectory;
  std::optional<double> lambda_f, lambda_g, mu_f, mu_g, sigma, p_f, p_g;
  std::optional<int> threads;
  std::vector<std::string> policies;
  std::vector<double> neg_log_c;
  std::vector<std::size_t> targets;
  bool diagnostics = false;
  bool dump_trials = false;

  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--preset", preset_name, "fig2, fig3, fig4, table2, table1_example or verify");
  app.add_option("--M", m, "Number of cells");
  app.add_option("--K", k, "Cells probed per round");
  app.add_option("--L", l, "Number of targets (upper bound for unknown_l)");
  app.add_option("--policy", policies, "Comma-separated policies")->delimiter(',');
  app.add_option("--model", model_kind, "exponential, gaussian or bernoulli");
  app.add_option("--lambda-f", lambda_f, "Exponential rate of f");
  app.add_option("--lambda-g", lambda_g, "Exponential rate of g");
  app.add_option("--mu-f", mu_f, "Gaussian mean of f");
  app.add_option("--mu-g", mu_g, "Gaussian mean of g");
  app.add_option("--sigma", sigma, "Gaussian standard deviation");
  app.add_option("--p-f", p_f, "Bernoulli parameter of f");
  app.add_option("--p-g", p_g, "Bernoulli parameter of g");
  app.add_option("--neg-log-c", neg_log_c, "Comma-separated -log c grid")->delimiter(',');
  app.add_option("--trials", trials, "Trials per grid point");
  app.add_option("--seed", seed, "Base seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--diagnostics", diagnostics, "Fit the tau1 tail for single-target policies");
  app.add_option("--threads", threads, "OpenMP threads (0: runtime default)");
  app.add_option("--true-targets", true_targets, "Targets present for unknown-count scenarios");
  app.add_option("--targets", targets, "Fix the true target cells (comma-separated)")->delimiter(',');
  app.add_option("--max-rounds", max_rounds, "Round limit per trial");
  app.add_flag("--dump-trials", dump_trials, "Write per-trial outcomes to trials.csv");
  app.add_option("--trajectory", trajectory, "Write the trajectory of this trial index to trajectory.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  if (verify->parsed() || preset_name == "verify") return run_verify(out) ? kSuccess : kFailure;

  RunPlan plan;
  try {
    if (preset_name) plan = preset(*preset_name);
    if (config_path) {
      std::ifstream is(*config_path);
      if (!is) throw ConfigError("cannot read config " + *config_path);
      json j;
      try {
        j = json::parse(is);
      } catch (const json::parse_error& e) {
        throw ConfigError("config " + *config_path + ": " + e.what());
      }
      plan = plan_from_json(j, plan);
    }

    ExperimentConfig& c = plan.base;
    if (m) c.num_cells = *m;
    if (k) c.probes_per_round = *k;
    if (l) c.num_targets = *l;
    if (!policies.empty()) {
      plan.policies.clear();
      for (const auto& p : policies) plan.policies.push_back(get_policy(p));
    }
    if (model_kind || lambda_f || lambda_g || mu_f || mu_g || sigma || p_f || p_g) {
      json mj = model_to_json(c.model);
      if (model_kind && *model_kind != mj.at("kind").get<std::string>()) mj = json{{"kind", *model_kind}};
      const auto set = [&](const char* key, const std::optional<double>& v) {
        if (v) mj[key] = *v;
      };
      set("lambda_f", lambda_f);
      set("lambda_g", lambda_g);
      set("mu_f", mu_f);
      set("mu_g", mu_g);
      set("sigma", sigma);
      set("p_f", p_f);
      set("p_g", p_g);
      c.model = model_from_json(mj);
    }
    if (!neg_log_c.empty()) c.neg_log_costs = neg_log_c;
    if (trials) c.trials = *trials;
    if (seed) c.seed = *seed;
    if (true_targets) c.true_target_count = *true_targets;
    if (!targets.empty()) c.fixed_targets = targets;
    if (max_rounds) c.max_rounds = *max_rounds;
    if (diagnostics) c.diagnostics = true;
    if (threads) {
      if (*threads < 0) throw ConfigError("threads >= 0 violated");
      c.threads = *threads;
    }
    if (out_dir) plan.out_dir = *out_dir;
    if (dump_trials) plan.dump_trials = true;
    if (trajectory) plan.trajectory = *trajectory;

    execute(plan, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  }
  return kSuccess;
}

}  // namespace qad::cli
