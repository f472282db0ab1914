#pragma once

// Config-driven experiments with reproducible reports.
//
// Config document:
//   {"experiment": "bandit" | "mdp" | "lqr" | "lqg" | "mpc" | "search",
//    "seed": uint, "replications": int >= 1,
//    "output": {"dir": string, "format": "csv" | "jsonl"},
//    "params": {...experiment specific...}}
//
// Replication r runs on replication_rng(seed, r). Reports carry the config
// hash, library version and RNG algorithm; aggregates are recomputed from the
// per-replication rows.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sdm/bandits.hpp"
#include "sdm/error.hpp"
#include "sdm/instances.hpp"
#include "sdm/io.hpp"
#include "sdm/linear_control.hpp"
#include "sdm/mdp.hpp"
#include "sdm/mdp_learning.hpp"
#include "sdm/mpc.hpp"
#include "sdm/policy_search.hpp"
#include "sdm/rng.hpp"
#include "sdm/stats.hpp"

namespace sdm {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "SDM_OUTPUT_DIR";

enum class OutputFormat { csv, jsonl };

struct ExperimentConfig {
  std::string experiment;
  Json params = Json::object();
  std::uint64_t seed = 0;
  int replications = 1;
  std::string output_dir = "sdm_out";
  OutputFormat format = OutputFormat::csv;

  /// Hash of the fields that determine results (not the output location).
  std::string hash() const {
    const Json key{{"experiment", experiment}, {"params", params}, {"seed", seed}, {"replications", replications}};
    return io::hex64(io::fnv1a(key.dump()));
  }

  static ExperimentConfig from_json(const Json& j) {
    using namespace io;
    if (!j.is_object()) throw ValidationError("<root>", "config must be a JSON object");
    for (const auto& [key, _] : j.items())
      if (key != "experiment" && key != "seed" && key != "replications" && key != "output" && key != "params")
        throw ValidationError(key, "unknown field");
    ExperimentConfig c;
    c.experiment = as_string(require(j, "experiment", ""), "experiment");
    if (j.contains("seed")) {
      const Json& s = j["seed"];
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
        throw ValidationError("seed", "expected a nonnegative integer");
      c.seed = s.get<std::uint64_t>();
    }
    const long long reps = integer_or(j, "replications", 1, "");
    require_range(reps >= 1 && reps <= 100000, "replications", "must lie in [1, 100000]");
    c.replications = static_cast<int>(reps);
    if (j.contains("output")) {
      const Json& o = j["output"];
      if (!o.is_object()) throw ValidationError("output", "expected an object");
      c.output_dir = string_or(o, "dir", c.output_dir, "output");
      c.format = parse_format(string_or(o, "format", "csv", "output"), "output.format");
    }
    if (j.contains("params")) {
      if (!j["params"].is_object()) throw ValidationError("params", "expected an object");
      c.params = j["params"];
    }
    return c;
  }

  static ExperimentConfig load(const std::string& path) { return from_json(io::read_file(path)); }

  static OutputFormat parse_format(const std::string& name, const std::string& path) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "jsonl" || name == "json-lines") return OutputFormat::jsonl;
    throw ValidationError(path, "unknown format '" + name + "' (expected csv or jsonl)");
  }
};

using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string>;

/// Plot-ready table with a stable column order.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct ReplicationRow {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
};

struct Report {
  std::string experiment;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::vector<ReplicationRow> rows;
  std::map<std::string, Summary> aggregates;
  Json details = Json::object();
  std::vector<Table> tables;

  void recompute_aggregates() {
    aggregates.clear();
    std::map<std::string, std::vector<double>> cols;
    for (const auto& r : rows)
      for (const auto& [k, v] : r.metrics) cols[k].push_back(v);
    for (const auto& [k, xs] : cols) aggregates[k] = summarize(xs);
  }

  Json to_json() const {
    Json reps = Json::array();
    for (const auto& r : rows) {
      Json row{{"index", r.index}, {"seed", r.seed}};
      for (const auto& [k, v] : r.metrics) row[k] = v;
      reps.push_back(std::move(row));
    }
    Json agg = Json::object();
    for (const auto& [k, s] : aggregates)
      agg[k] = Json{{"n", s.n}, {"mean", s.mean}, {"std_error", s.std_error}, {"half_width", s.half_width}};
    Json outputs = Json::array();
    for (const auto& t : tables) outputs.push_back(t.name);
    return Json{{"experiment", experiment},
                {"version", std::string(kVersion)},
                {"config_hash", config_hash},
                {"rng_algorithm", std::string(kRngAlgorithm)},
                {"master_seed", master_seed},
                {"replications", reps},
                {"aggregate", agg},
                {"details", details},
                {"tables", outputs}};
  }

  /// One-line human summary.
  std::string headline() const {
    std::string s = experiment + ": " + std::to_string(rows.size()) + " replication(s)";
    for (const auto& [k, a] : aggregates) {
      s += ", " + k + " mean=" + io::format_number(a.mean);
      if (a.n > 1) s += " +/- " + io::format_number(a.half_width);
    }
    return s;
  }
};

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return io::format_number(v);
        else if constexpr (std::is_same_v<T, std::string>) return v;
        else return std::to_string(v);
      },
      c);
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
  return std::visit([](const auto& v) { return nlohmann::ordered_json(v); }, c);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace detail

inline std::string table_text(const Table& t, OutputFormat format) {
  std::string out;
  if (format == OutputFormat::csv) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += detail::cell_text(row[i]);
      }
      out += '\n';
    }
  } else {
    for (const auto& row : t.rows) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = detail::cell_json(row[i]);
      out += obj.dump() + '\n';
    }
  }
  return out;
}

/// Writes every table plus summary.json into dir; returns the written paths.
inline std::vector<std::filesystem::path> write_report(const Report& report, const std::filesystem::path& dir,
                                                       OutputFormat format) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& t : report.tables) {
    const auto path = dir / (t.name + (format == OutputFormat::csv ? ".csv" : ".jsonl"));
    detail::write_text(path, table_text(t, format));
    written.push_back(path);
  }
  const auto summary = dir / "summary.json";
  detail::write_text(summary, report.to_json().dump(2) + "\n");
  written.push_back(summary);
  return written;
}

/// Explicit override, then $SDM_OUTPUT_DIR, then the config's output.dir.
inline std::string resolve_output_dir(const ExperimentConfig& config, const std::optional<std::string>& override_dir = {}) {
  if (override_dir && !override_dir->empty()) return *override_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return config.output_dir;
}

// ---------------------------------------------------------------------------
// Experiments

namespace detail {

inline Report start_report(const ExperimentConfig& c) {
  Report r;
  r.experiment = c.experiment;
  r.config_hash = c.hash();
  r.master_seed = c.seed;
  return r;
}

template <class Fn>
auto replicate(const ExperimentConfig& c, Fn&& fn) {
  return parallel_map(static_cast<std::size_t>(c.replications), [&](std::size_t i) {
    Rng rng = replication_rng(c.seed, i);
    return fn(i, rng);
  });
}

inline Json nullable(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Table gain_table(const std::string& name, const Eigen::MatrixXd& m) {
  Table t{name, {"row", "col", "value"}, {}};
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      t.rows.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(j), m(i, j)});
  return t;
}

// --- bandit -----------------------------------------------------------------

inline Report run_bandit(const ExperimentConfig& c) {
  using namespace io;
  const Json& p = c.params;
  const std::string algo = as_string(require(p, "algorithm", "params"), "params.algorithm");
  if (algo != "etc" && algo != "successive_elimination" && algo != "ucb")
    throw ValidationError("params.algorithm", "unknown algorithm '" + algo + "'");
  const Eigen::VectorXd mu = as_vector(require(p, "means", "params"), "params.means");
  const long long T = integer(p, "T", "params");
  require_range(T >= 1, "params.T", "must be >= 1");
  const std::string family = string_or(p, "family", "bernoulli", "params");
  RewardFamily fam;
  if (family == "bernoulli") fam = RewardFamily::bernoulli;
  else if (family == "truncated_gaussian") fam = RewardFamily::truncated_gaussian;
  else throw ValidationError("params.family", "unknown family '" + family + "'");
  const double sd = number_or(p, "sd", 0.1, "params");
  std::vector<double> means(mu.data(), mu.data() + mu.size());
  std::optional<BanditInstance> built;
  try {
    built.emplace(means, fam, sd);
  } catch (const Error& e) {
    throw ValidationError("params.means", e.what());
  }
  const BanditInstance& inst = *built;
  const int K = inst.num_arms();

  Report report = start_report(c);
  Json details{{"algorithm", algo}, {"K", K}, {"T", T}, {"gaps", inst.gaps()}, {"best_arm", inst.best_arm()}};

  long long m = 0;
  double delta = 1.0 / static_cast<double>(T);
  EliminationMeans mode = EliminationMeans::per_round;
  if (algo == "etc") {
    const Json mj = p.contains("m") ? p["m"] : Json("m_star");
    if (mj.is_string()) {
      const std::string rule = mj.get<std::string>();
      double gap = 0.0;
      for (double g : inst.gaps())
        if (g > 0.0 && (gap == 0.0 || g < gap)) gap = g;
      if (rule == "m_star") {
        if (gap == 0.0) {
          m = 0;
          details["m_fallback"] = true;
        } else {
          const auto e = m_star(gap, T);
          m = e.m;
          details["m_fallback"] = e.fallback;
        }
      } else if (rule == "t23") {
        m = static_cast<long long>(std::floor(std::pow(static_cast<double>(T), 2.0 / 3.0)));
      } else {
        throw ValidationError("params.m", "expected an integer, \"m_star\" or \"t23\"");
      }
      if (m * K > T) m = T / K;
    } else {
      m = as_integer(mj, "params.m");
      require_range(m >= 0 && m * K <= T, "params.m", "need 0 <= m and m*K <= T");
    }
    details["m"] = m;
    if (K == 2 && inst.max_gap() > 0.0) {
      const double g = inst.max_gap();
      details["bounds"] = Json{{"gap_dependent", g + 4.0 / g * (std::log(T * g * g / 4.0) + 1.0)},
                               {"gap_independent", g + 2.5 * std::sqrt(static_cast<double>(T))},
                               {"t23", 2.0 * std::pow(static_cast<double>(T), 2.0 / 3.0)}};
    }
  } else if (algo == "ucb") {
    delta = number_or(p, "delta", delta, "params");
    require_range(delta > 0.0 && delta < 1.0, "params.delta", "must lie in (0, 1)");
    details["delta"] = delta;
  } else {
    const std::string mm = string_or(p, "means_mode", "per_round", "params");
    if (mm == "cumulative") mode = EliminationMeans::cumulative;
    else if (mm != "per_round") throw ValidationError("params.means_mode", "expected per_round or cumulative");
    const auto sched = se_schedule(T);
    details["schedule"] = Json{{"B", sched.rounds}, {"m", sched.pulls}};
    details["means_mode"] = mm;
  }

  struct Out {
    RegretCurve curve;
    std::map<std::string, double> metrics;
  };
  const auto outs = replicate(c, [&](std::size_t, Rng& rng) {
    Out o;
    if (algo == "etc") {
      o.curve = run_etc(inst, m, T, rng);
    } else if (algo == "ucb") {
      o.curve = run_ucb(inst, T, rng, delta);
    } else {
      auto se = successive_elimination(inst, T, rng, mode);
      bool survived = true;
      for (const auto& a : se.active_history)
        survived = survived && std::find(a.begin(), a.end(), inst.best_arm()) != a.end();
      o.metrics["rounds_completed"] = se.rounds_completed;
      o.metrics["best_arm_survived"] = survived ? 1.0 : 0.0;
      o.curve = std::move(se.curve);
    }
    o.metrics["final_regret"] = o.curve.final_regret();
    return o;
  });

  Table regret{"regret", {"seed", "t", "arm", "instantaneous_gap", "cumulative_regret"}, {}};
  regret.rows.reserve(static_cast<std::size_t>(T) * outs.size());
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const std::uint64_t seed = replication_seed(c.seed, i);
    report.rows.push_back({i, seed, outs[i].metrics});
    const auto& cv = outs[i].curve;
    for (std::size_t t = 0; t < cv.size(); ++t)
      regret.rows.push_back({seed, static_cast<std::int64_t>(t + 1), static_cast<std::int64_t>(cv.arms[t]),
                             cv.instantaneous[t], cv.cumulative[t]});
  }
  report.tables.push_back(std::move(regret));
  report.details = std::move(details);
  return report;
}

// --- mdp ----------------------------------------------------------------------

inline TabularMdp mdp_instance(const Json& j, const std::string& path, std::uint64_t seed) {
  using namespace io;
  if (!j.is_object()) throw ValidationError(path, "expected an object");
  if (j.contains("file")) {
    const std::string file = as_string(j["file"], join(path, "file"));
    return mdp_from_json(read_file(file), file);
  }
  if (j.contains("mdp")) return mdp_from_json(j["mdp"], join(path, "mdp"));
  const std::string name = as_string(require(j, "name", path), join(path, "name"));
  if (name == "machine_repair") {
    MachineRepairParams mp;
    const std::string decay = string_or(j, "decay", "geometric", path);
    if (decay == "uniform") mp.decay = uniform_decay_profile();
    else if (decay == "geometric") mp.decay = geometric_decay_profile(number_or(j, "ratio", 0.3, path));
    else throw ValidationError(join(path, "decay"), "expected geometric or uniform");
    mp.discount = number_or(j, "gamma", mp.discount, path);
    return machine_repair_instance(mp);
  }
  if (name == "two_state") return two_state_instance(number_or(j, "gamma", 0.5, path));
  if (name == "inventory") {
    InventoryParams ip;
    ip.max_stock = static_cast<int>(integer_or(j, "max_stock", ip.max_stock, path));
    ip.max_order = static_cast<int>(integer_or(j, "max_order", ip.max_order, path));
    if (j.contains("demand")) {
      const Eigen::VectorXd d = as_vector(j["demand"], join(path, "demand"));
      ip.demand.assign(d.data(), d.data() + d.size());
    }
    ip.price = number_or(j, "price", ip.price, path);
    ip.order_cost = number_or(j, "order_cost", ip.order_cost, path);
    ip.holding_cost = number_or(j, "holding_cost", ip.holding_cost, path);
    ip.discount = number_or(j, "gamma", ip.discount, path);
    try {
      return inventory_instance(ip);
    } catch (const InvalidArgument& e) {
      throw ValidationError(path, e.what());
    }
  }
  if (name == "random") {
    const long long S = integer(j, "S", path), A = integer(j, "A", path);
    require_range(S >= 1 && S <= 1000, join(path, "S"), "must lie in [1, 1000]");
    require_range(A >= 1 && A <= 100, join(path, "A"), "must lie in [1, 100]");
    Rng rng(seed, 0xD1CEULL);
    return random_mdp(static_cast<int>(S), static_cast<int>(A), number_or(j, "gamma", 0.9, path), rng);
  }
  throw ValidationError(join(path, "name"), "unknown instance '" + name + "'");
}

inline Report run_mdp(const ExperimentConfig& c) {
  using namespace io;
  const Json& p = c.params;
  const TabularMdp mdp = mdp_instance(require(p, "instance", "params"), "params.instance", c.seed);
  const std::string method = string_or(p, "method", "value_iteration", "params");
  const long long x0 = integer_or(p, "initial_state", 0, "params");
  require_range(x0 >= 0 && x0 < mdp.num_states(), "params.initial_state", "out of range");
  const double tol = number_or(p, "tol", kDefaultTolerance, "params");
  require_range(tol > 0.0, "params.tol", "must be > 0");
  const int S = mdp.num_states(), A = mdp.num_actions();

  Report report = start_report(c);
  const ExactSolution star = solve_exact(mdp);
  report.details = Json{{"method", method}, {"S", S}, {"A", A}, {"gamma", mdp.discount()},
                        {"optimal_value", to_json(star.v.values)}, {"optimal_policy", star.policy.action_of}};

  auto value_rows = [&](Table& t, std::optional<std::uint64_t> seed, const Eigen::VectorXd& v, const TabularPolicy& pi) {
    for (int s = 0; s < S; ++s) {
      std::vector<Cell> row;
      if (seed) row.push_back(*seed);
      row.insert(row.end(), {static_cast<std::int64_t>(s), v(s), static_cast<std::int64_t>(pi(s))});
      t.rows.push_back(std::move(row));
    }
  };

  if (method == "value_iteration" || method == "policy_iteration" || method == "exact") {
    Table values{"values", {"state", "value", "action"}, {}};
    std::map<std::string, double> metrics;
    if (method == "value_iteration") {
      const auto vi = value_iteration(mdp, tol);
      const auto pi = greedy_policy(vi.q);
      value_rows(values, std::nullopt, vi.q.state_values(), pi);
      metrics = {{"iterations", vi.iterations}, {"residual", vi.residual}, {"converged", vi.converged ? 1.0 : 0.0},
                 {"value_at_initial", vi.q.state_values()(x0)}, {"pac_error", pac_error(pi, mdp, static_cast<int>(x0))}};
    } else if (method == "policy_iteration") {
      const auto pi = policy_iteration(mdp, tol);
      value_rows(values, std::nullopt, pi.q.state_values(), pi.policy);
      metrics = {{"iterations", pi.iterations}, {"converged", pi.converged ? 1.0 : 0.0},
                 {"value_at_initial", pi.q.state_values()(x0)}, {"pac_error", pac_error(pi.policy, mdp, static_cast<int>(x0))}};
    } else {
      value_rows(values, std::nullopt, star.v.values, star.policy);
      metrics = {{"value_at_initial", star.v.values(x0)}};
    }
    report.rows.push_back({0, c.seed, metrics});
    report.tables.push_back(std::move(values));
    return report;
  }

  const auto sampler = sampler_from_mdp(mdp);
  if (method == "q_learning") {
    QLearningOptions opt;
    opt.discount = mdp.discount();
    opt.steps = integer_or(p, "steps", 100000, "params");
    require_range(opt.steps >= 1, "params.steps", "must be >= 1");
    opt.epsilon = number_or(p, "epsilon", opt.epsilon, "params");
    require_range(opt.epsilon >= 0.0 && opt.epsilon <= 1.0, "params.epsilon", "must lie in [0, 1]");
    try {
      opt.schedule = StepSchedule::parse(string_or(p, "schedule", "1/visits", "params"), number_or(p, "eta", 0.1, "params"));
    } catch (const InvalidArgument& e) {
      throw ValidationError("params.schedule", e.what());
    }
    opt.initial_state = static_cast<int>(x0);
    const auto outs = replicate(c, [&](std::size_t, Rng& rng) { return q_learning(sampler, S, A, opt, rng); });
    Table values{"values", {"seed", "state", "value", "action"}, {}};
    for (std::size_t i = 0; i < outs.size(); ++i) {
      const std::uint64_t seed = replication_seed(c.seed, i);
      const auto pi = greedy_policy(outs[i].q);
      const double q_err = sup_norm(outs[i].q.values() - star.q.values());
      report.rows.push_back({i, seed, {{"pac_error", pac_error(pi, mdp, static_cast<int>(x0))}, {"q_error", q_err}}});
      value_rows(values, seed, outs[i].q.state_values(), pi);
    }
    report.tables.push_back(std::move(values));
    return report;
  }
  if (method == "certainty_equivalence") {
    const long long n = integer_or(p, "samples_per_pair", 100, "params");
    require_range(n >= 1, "params.samples_per_pair", "must be >= 1");
    const double delta = number_or(p, "delta", 0.1, "params");
    require_range(delta > 0.0 && delta < 1.0, "params.delta", "must lie in (0, 1)");
    const bool known_reward = bool_or(p, "known_reward", true, "params");
    const double envelope = sample_complexity_envelope(S, A, mdp.discount(), delta, n * S * A);
    report.details["envelope"] = envelope;
    const auto outs = replicate(c, [&](std::size_t, Rng& rng) {
      std::optional<Eigen::MatrixXd> r;
      if (known_reward) r = mdp.reward();
      const auto hat = estimate_mdp(sampler, static_cast<int>(n), S, A, mdp.discount(), rng, r);
      return model_error_bound(mdp, hat);
    });
    Table values{"values", {"seed", "state", "value", "action"}, {}};
    for (std::size_t i = 0; i < outs.size(); ++i) {
      const std::uint64_t seed = replication_seed(c.seed, i);
      const auto& b = outs[i];
      report.rows.push_back({i, seed,
                             {{"pac_error", pac_error(b.hat_policy, mdp, static_cast<int>(x0))},
                              {"suboptimality", b.lhs},
                              {"within_envelope", b.lhs <= envelope ? 1.0 : 0.0}}});
      value_rows(values, seed, evaluate_policy_exact(mdp, b.hat_policy).values, b.hat_policy);
    }
    report.tables.push_back(std::move(values));
    return report;
  }
  throw ValidationError("params.method", "unknown method '" + method + "'");
}

// --- linear systems -----------------------------------------------------------

inline std::pair<LinearSystem, QuadraticCost> linear_instance(const Json& j, const std::string& path) {
  using namespace io;
  if (!j.is_object()) throw ValidationError(path, "expected an object");
  std::optional<std::pair<LinearSystem, QuadraticCost>> out;
  if (j.contains("instance")) {
    const std::string name = as_string(j["instance"], join(path, "instance"));
    if (name == "newton") {
      out = newton_instance();
    } else if (name == "shift_register") {
      out = shift_register_instance(number_or(j, "psi", 0.0, path));
    } else if (name == "double_integrator") {
      try {
        auto sys = double_integrator_instance(number_or(j, "dt", 1.0, path), number_or(j, "mass", 1.0, path),
                                              number_or(j, "wind_var", 0.0, path));
        out.emplace(sys, QuadraticCost{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(1, 1)});
      } catch (const InvalidArgument& e) {
        throw ValidationError(path, e.what());
      }
    } else if (name == "lqg_fragility") {
      auto sys = lqg_fragility_system(number_or(j, "sigma2", 1e-4, path));
      out.emplace(sys, newton_instance().second);
    } else {
      throw ValidationError(join(path, "instance"), "unknown instance '" + name + "'");
    }
    auto& [sys, cost] = *out;
    try {
      if (j.contains("C")) sys.C = as_matrix(j["C"], join(path, "C"));
      if (j.contains("Sw")) sys.Sw = as_matrix(j["Sw"], join(path, "Sw"));
      if (j.contains("Sv")) sys.Sv = as_matrix(j["Sv"], join(path, "Sv"));
      sys.validate();
    } catch (const ValidationError&) {
      throw;
    } catch (const Error& e) {
      throw ValidationError(path, e.what());
    }
    if (j.contains("Phi") || j.contains("Psi")) {
      Json cj = Json::object();
      cj["Phi"] = j.contains("Phi") ? j["Phi"] : to_json(cost.Phi);
      cj["Psi"] = j.contains("Psi") ? j["Psi"] : to_json(cost.Psi);
      cost = cost_from_json(cj, sys, path);
    }
    return *out;
  }
  auto sys = system_from_json(j, path);
  return {sys, cost_from_json(j, sys, path)};
}

inline Report run_lqr(const ExperimentConfig& c) {
  using namespace io;
  const Json& p = c.params;
  const auto [sys, cost] = linear_instance(require(p, "system", "params"), "params.system");
  const long long horizon = integer_or(p, "horizon", 0, "params");
  require_range(horizon >= 0, "params.horizon", "must be >= 0 (0 solves the algebraic equation)");
  const long long steps = integer_or(p, "simulate", 0, "params");
  require_range(steps >= 0, "params.simulate", "must be >= 0");
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(sys.state_dim());
  if (p.contains("x0")) {
    x0 = as_vector(p["x0"], "params.x0");
    require_range(x0.size() == sys.state_dim(), "params.x0", "dimension mismatch");
  }

  Report report = start_report(c);
  Eigen::MatrixXd K, M;
  Json details{{"system", system_to_json(sys, cost)}};
  if (horizon > 0) {
    const auto steps_out = riccati_recursion(sys, cost, static_cast<int>(horizon));
    K = steps_out.front().K;
    M = steps_out.front().M;
    details["method"] = "riccati_recursion";
    details["horizon"] = horizon;
  } else {
    const auto sol = solve_dare(sys, cost);
    K = sol.K;
    M = sol.M;
    details["method"] = "dare";
    details["converged"] = sol.converged;
    details["residual"] = sol.residual;
    details["iterations"] = sol.iterations;
  }
  const double rho = spectral_radius(closed_loop(sys, K));
  details["K"] = to_json(K);
  details["M"] = to_json(M);
  details["spectral_radius"] = rho;
  details["stability"] = to_string(classify_stability(rho));
  details["steady_state_cost"] = nullable(lqr_cost(sys, cost, K));
  report.tables.push_back(gain_table("gain", K));

  if (steps > 0) {
    const auto outs = replicate(c, [&](std::size_t, Rng& rng) {
      return simulate_linear(sys, cost, K, x0, static_cast<int>(steps), rng);
    });
    Table traj{"trajectory", {"seed", "t", "state_norm", "input_norm", "stage_cost"}, {}};
    for (std::size_t i = 0; i < outs.size(); ++i) {
      const std::uint64_t seed = replication_seed(c.seed, i);
      report.rows.push_back({i, seed, {{"average_cost", outs[i].average_cost}}});
      for (std::size_t t = 0; t < outs[i].inputs.size(); ++t) {
        const auto& x = outs[i].states[t];
        const auto& u = outs[i].inputs[t];
        traj.rows.push_back({seed, static_cast<std::int64_t>(t), x.norm(), u.norm(),
                             x.dot(cost.Phi * x) + u.dot(cost.Psi * u)});
      }
    }
    report.tables.push_back(std::move(traj));
  } else {
    report.rows.push_back({0, c.seed, {{"spectral_radius", rho}}});
  }
  report.details = std::move(details);
  return report;
}

inline Report run_lqg(const ExperimentConfig& c) {
  using namespace io;
  const Json& p = c.params;
  const auto [sys, cost] = linear_instance(require(p, "system", "params"), "params.system");
  std::vector<double> ts{1.0};
  if (p.contains("t_values")) {
    const Eigen::VectorXd v = as_vector(p["t_values"], "params.t_values");
    ts.assign(v.data(), v.data() + v.size());
  }
  const long long horizon = integer_or(p, "horizon", 0, "params");
  require_range(horizon >= 0, "params.horizon", "must be >= 0");

  Report report = start_report(c);
  const Eigen::MatrixXd K = horizon > 0 ? riccati_recursion(sys, cost, static_cast<int>(horizon)).front().K
                                        : solve_dare(sys, cost).K;
  const FilterGain f = kalman_gain(sys);
  Table frag{"fragility", {"t", "spectral_radius", "stability"}, {}};
  Json radii = Json::array();
  for (double t : ts) {
    const double rho = spectral_radius(lqg_closed_loop(sys, K, f.L, Eigen::MatrixXd(t * sys.B)));
    frag.rows.push_back({t, rho, std::string(to_string(classify_stability(rho)))});
    radii.push_back(Json{{"t", t}, {"spectral_radius", rho}});
  }
  report.details = Json{{"system", system_to_json(sys, cost)}, {"K", to_json(K)}, {"L", to_json(f.L)},
                        {"P", to_json(f.P)}, {"filter_converged", f.converged},
                        {"filter_regularization", f.regularization}, {"closed_loop", radii}};
  report.rows.push_back({0, c.seed, {{"spectral_radius", spectral_radius(lqg_closed_loop(sys, K, f.L))}}});
  report.tables.push_back(gain_table("gain", K));
  report.tables.push_back(gain_table("filter_gain", f.L));
  report.tables.push_back(std::move(frag));
  return report;
}

// --- mpc ----------------------------------------------------------------------

inline Report run_mpc_experiment(const ExperimentConfig& c) {
  using namespace io;
  const Json& p = c.params;
  const TabularMdp mdp = mdp_instance(require(p, "instance", "params"), "params.instance", c.seed);
  const long long H = integer(p, "horizon", "params");
  require_range(H >= 1, "params.horizon", "must be >= 1");
  const long long T = integer(p, "T", "params");
  require_range(T >= 1, "params.T", "must be >= 1");
  const long long x0 = integer_or(p, "initial_state", 0, "params");
  require_range(x0 >= 0 && x0 < mdp.num_states(), "params.initial_state", "out of range");
  TabularMpcSpec spec{mdp, static_cast<int>(H), std::nullopt, 1, std::nullopt};
  spec.replan_every = static_cast<int>(integer_or(p, "replan_every", 1, "params"));
  require_range(spec.replan_every >= 1 && spec.replan_every <= H + 1, "params.replan_every", "must lie in [1, H+1]");
  if (p.contains("terminal")) {
    const Eigen::VectorXd t = as_vector(p["terminal"], "params.terminal");
    require_range(t.size() == 2, "params.terminal", "expected [state, action]");
    const int s = static_cast<int>(t(0)), a = static_cast<int>(t(1));
    require_range(s >= 0 && s < mdp.num_states() && a >= 0 && a < mdp.num_actions(), "params.terminal",
                  "pair out of range");
    spec.terminal = std::pair{s, a};
  }
  if (p.contains("reward_max")) spec.reward_max = as_number(p["reward_max"], "params.reward_max");

  Report report = start_report(c);
  const auto env = sampler_from_mdp(mdp);
  const auto outs = replicate(c, [&](std::size_t, Rng& rng) {
    return run_mpc(spec, env, static_cast<int>(x0), static_cast<int>(T), rng);
  });
  Table traj{"trajectory", {"seed", "t", "state", "action", "reward", "infeasible"}, {}};
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const std::uint64_t seed = replication_seed(c.seed, i);
    report.rows.push_back({i, seed, {{"average_reward", outs[i].average}, {"infeasible_events", outs[i].infeasible_events}}});
    for (const auto& s : outs[i].steps)
      traj.rows.push_back({seed, static_cast<std::int64_t>(s.t), static_cast<std::int64_t>(s.state),
                           static_cast<std::int64_t>(s.action), s.reward, static_cast<std::int64_t>(s.infeasible)});
  }
  report.tables.push_back(std::move(traj));
  report.details = Json{{"horizon", H}, {"T", T}, {"initial_state", x0}};
  if (spec.terminal && spec.reward_max) {
    const auto b = mpc_bound_check(spec, env, static_cast<int>(x0), static_cast<int>(T), c.replications, c.seed);
    report.details["bound"] = Json{{"lower_bound", b.lower_bound}, {"burn_in", b.burn_in},
                                   {"steady_term", b.steady_term}, {"q0", b.q0},
                                   {"empirical_average", b.empirical_avg}, {"half_width", b.half_width},
                                   {"holds", b.holds}};
  }
  return report;
}

// --- search -------------------------------------------------------------------

inline Report run_search(const ExperimentConfig& c) {
  using namespace io;
  const Json& p = c.params;
  const std::string method = as_string(require(p, "method", "params"), "params.method");
  if (method != "reinforce" && method != "random_search")
    throw ValidationError("params.method", "unknown method '" + method + "'");
  const Eigen::VectorXd target = as_vector(require(p, "target", "params"), "params.target");
  const auto d = target.size();
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(d);
  if (p.contains("theta0")) {
    theta0 = as_vector(p["theta0"], "params.theta0");
    require_range(theta0.size() == d, "params.theta0", "dimension must match target");
  }
  const long long steps = integer(p, "steps", "params");
  require_range(steps >= 0, "params.steps", "must be >= 0");
  const double step = number(p, "step", "params");
  require_range(step >= 0.0, "params.step", "must be >= 0");
  const RewardFn reward = [target](const Eigen::VectorXd& t) { return -(t - target).squaredNorm(); };

  std::function<SearchTrace(Rng&)> run;
  Json details{{"method", method}, {"objective", "negative squared distance to target"}, {"target", to_json(target)}};
  if (method == "reinforce") {
    const double var = number_or(p, "variance", 0.1, "params");
    require_range(var > 0.0, "params.variance", "must be > 0");
    const long long batch = integer_or(p, "batch", 1, "params");
    require_range(batch >= 1, "params.batch", "must be >= 1");
    details["variance"] = var;
    details["batch"] = batch;
    run = [=](Rng& rng) {
      const auto density = GaussianDensity::isotropic(static_cast<int>(d), var);
      return reinforce(density, reward, theta0, steps, constant_step(step), rng, batch);
    };
  } else {
    RandomSearchOptions opt;
    opt.sigma = number_or(p, "sigma", opt.sigma, "params");
    require_range(opt.sigma > 0.0, "params.sigma", "must be > 0");
    opt.directions = integer_or(p, "directions", opt.directions, "params");
    require_range(opt.directions >= 1, "params.directions", "must be >= 1");
    opt.step = step;
    opt.steps = steps;
    const std::string law = string_or(p, "direction_law", "gaussian", "params");
    if (law == "sphere") opt.kind = DirectionKind::sphere;
    else if (law != "gaussian") throw ValidationError("params.direction_law", "expected gaussian or sphere");
    details["sigma"] = opt.sigma;
    details["directions"] = opt.directions;
    details["direction_law"] = law;
    run = [=](Rng& rng) { return random_search(reward, theta0, opt, rng); };
  }

  Report report = start_report(c);
  const auto outs = replicate(c, [&](std::size_t, Rng& rng) { return run(rng); });
  Table trace{"trace", {"seed", "step", "reward", "theta_norm", "step_size"}, {}};
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const std::uint64_t seed = replication_seed(c.seed, i);
    const auto& tr = outs[i];
    report.rows.push_back({i, seed,
                           {{"final_distance", (tr.final_iterate() - target).norm()},
                            {"final_reward", reward(tr.final_iterate())},
                            {"diverged", tr.diverged ? 1.0 : 0.0}}});
    for (std::size_t k = 0; k < tr.steps(); ++k)
      trace.rows.push_back({seed, static_cast<std::int64_t>(k), tr.rewards[k], tr.iterates[k].norm(), tr.step_sizes[k]});
  }
  report.tables.push_back(std::move(trace));
  report.details = std::move(details);
  return report;
}

}  // namespace detail

inline const std::map<std::string, std::function<Report(const ExperimentConfig&)>>& experiment_registry() {
  static const std::map<std::string, std::function<Report(const ExperimentConfig&)>> registry{
      {"bandit", detail::run_bandit}, {"mdp", detail::run_mdp},
      {"lqr", detail::run_lqr},       {"lqg", detail::run_lqg},
      {"mpc", detail::run_mpc_experiment}, {"search", detail::run_search}};
  return registry;
}

/// Validates and runs the named experiment. ValidationError for schema
/// problems; other sdm::Error subclasses for failures during the run.
inline Report run_experiment(const ExperimentConfig& config) {
  const auto& reg = experiment_registry();
  const auto it = reg.find(config.experiment);
  if (it == reg.end()) throw ValidationError("experiment", "unknown experiment '" + config.experiment + "'");
  Report report = it->second(config);
  report.recompute_aggregates();
  return report;
}

}  // namespace sdm
