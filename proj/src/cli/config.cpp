#include "zdq/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace zdq::cli {

namespace {

constexpr std::pair<Task, std::string_view> kTasks[] = {
    {Task::design, "design"},
    {Task::rollout, "rollout"},
    {Task::oracle_check, "oracle-check"},
    {Task::discounted_vi, "discounted-vi"},
    {Task::schedule, "schedule"},
    {Task::occupancy, "occupancy"},
};

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string type_name(const json& j) { return j.type_name(); }

// Typed access to one JSON object; finish() rejects keys that were never read.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object())
      throw ConfigError(path_.empty() ? "<root>" : path_,
                        "expected an object, got " + type_name(obj_));
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) throw ConfigError(field(key), "required field is missing");
    return obj_.at(key);
  }

  std::string field(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key) { return as_number(raw(key), field(key)); }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t unsigned_int(const std::string& key) {
    return as_unsigned(raw(key), field(key));
  }
  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
    return has(key) ? unsigned_int(key) : fallback;
  }

  std::string string(const std::string& key) {
    const json& j = raw(key);
    if (!j.is_string()) throw ConfigError(field(key), "expected a string, got " + type_name(j));
    return j.get<std::string>();
  }

  std::vector<double> vector(const std::string& key) { return as_vector(raw(key), field(key)); }

  std::vector<std::vector<double>> matrix(const std::string& key) {
    const json& j = raw(key);
    if (!j.is_array() || j.empty())
      throw ConfigError(field(key), "expected a non-empty array of arrays");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(as_vector(j[i], field(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError(join(path_, key), "unknown key");
    }
  }

  static double as_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number, got " + type_name(j));
    return j.get<double>();
  }

  static std::uint64_t as_unsigned(const json& j, const std::string& field) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) throw ConfigError(field, "must be non-negative");
    throw ConfigError(field, "expected a non-negative integer, got " + type_name(j));
  }

  static std::vector<double> as_vector(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a non-empty array");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(as_number(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

GridConfig parse_grid(const json& j, const std::string& path) {
  Reader r(j, path);
  GridConfig g;
  if (r.has("lo")) g.lo = r.number("lo");
  if (r.has("hi")) g.hi = r.number("hi");
  require(g.lo.has_value() == g.hi.has_value(), path, "give both lo and hi or neither");
  if (g.lo) require(*g.lo < *g.hi, r.field("hi"), "must exceed lo");
  g.points = r.unsigned_int("points", g.points);
  require(g.points >= 16, r.field("points"), "need at least 16 grid points");
  g.width = r.number("width", g.width);
  require(g.width > 0.0, r.field("width"), "must be positive");
  r.finish();
  return g;
}

ModelConfig parse_model(const json& j, const std::string& path) {
  Reader r(j, path);
  ModelConfig m;
  const std::string kind = r.string("kind");
  if (kind == "finite_chain") {
    m.kind = ModelConfig::Kind::finite_chain;
    m.transition = r.matrix("transition");
    const std::size_t n = m.transition.size();
    require(n >= 2, r.field("transition"), "need at least 2 states");
    for (std::size_t i = 0; i < n; ++i) {
      const std::string row = r.field("transition") + "[" + std::to_string(i) + "]";
      require(m.transition[i].size() == n, row, "transition matrix must be square");
      double s = 0.0;
      for (double p : m.transition[i]) {
        require(p >= 0.0, row, "probabilities must be non-negative");
        s += p;
      }
      require(std::abs(s - 1.0) <= 1e-12, row, "row must sum to 1");
    }
    if (r.has("initial")) {
      const json& init = r.raw("initial");
      if (init.is_string()) {
        require(init.get<std::string>() == "stationary", r.field("initial"),
                "expected a probability vector or \"stationary\"");
      } else {
        m.initial = Reader::as_vector(init, r.field("initial"));
        require(m.initial->size() == n, r.field("initial"), "length must match the chain");
        double s = 0.0;
        for (double p : *m.initial) {
          require(p >= 0.0, r.field("initial"), "probabilities must be non-negative");
          s += p;
        }
        require(std::abs(s - 1.0) <= 1e-12, r.field("initial"), "must sum to 1");
      }
    }
    if (r.has("state_values")) {
      m.state_values = r.vector("state_values");
      require(m.state_values.size() == n, r.field("state_values"), "length must match the chain");
    }
  } else if (kind == "linear_gaussian") {
    m.kind = ModelConfig::Kind::linear_gaussian;
    m.a = r.number("a");
    m.sigma = r.number("sigma");
    require(m.sigma > 0.0, r.field("sigma"), "must be positive");
    if (r.has("initial")) {
      const json& init = r.raw("initial");
      if (init.is_string()) {
        require(init.get<std::string>() == "stationary", r.field("initial"),
                "expected an object or \"stationary\"");
      } else {
        Reader ir(init, r.field("initial"));
        InitialLaw law;
        law.mean = ir.number("mean", 0.0);
        law.stddev = ir.number("std", 1.0);
        require(law.stddev >= 0.0, ir.field("std"), "must be non-negative");
        ir.finish();
        m.initial_law = law;
      }
    }
    if (!m.initial_law)
      require(std::abs(m.a) < 1.0, r.field("a"),
              "a stationary start needs |a| < 1 (give an explicit initial law otherwise)");
    if (r.has("grid")) m.grid = parse_grid(r.raw("grid"), r.field("grid"));
  } else {
    throw ConfigError(r.field("kind"), "expected \"finite_chain\" or \"linear_gaussian\"");
  }
  r.finish();
  return m;
}

CostConfig parse_cost(const json& j, const std::string& path) {
  Reader r(j, path);
  CostConfig c;
  const std::string kind = r.string("kind");
  if (kind == "quadratic") {
    c.quadratic = true;
  } else if (kind == "tabular") {
    c.quadratic = false;
    c.table = r.matrix("table");
    const std::size_t cols = c.table.front().size();
    for (std::size_t i = 0; i < c.table.size(); ++i) {
      const std::string row = r.field("table") + "[" + std::to_string(i) + "]";
      require(c.table[i].size() == cols, row, "rows must have equal length");
      for (double v : c.table[i]) require(v >= 0.0 && std::isfinite(v), row, "must be finite and >= 0");
    }
    if (r.has("reconstructions")) {
      c.reconstructions = r.vector("reconstructions");
      require(c.reconstructions.size() == cols, r.field("reconstructions"),
              "one value per table column");
    }
  } else {
    throw ConfigError(r.field("kind"), "expected \"quadratic\" or \"tabular\"");
  }
  r.finish();
  return c;
}

QuantizerConfig parse_quantizers(const json& j, const std::string& path) {
  Reader r(j, path);
  QuantizerConfig q;
  q.levels = r.unsigned_int("levels", q.levels);
  require(q.levels >= 1, r.field("levels"), "must be at least 1");
  q.lo = r.number("lo", q.lo);
  q.hi = r.number("hi", q.hi);
  require(q.lo <= q.hi, r.field("hi"), "must not be below lo");
  q.steps = r.unsigned_int("steps", q.steps);
  require(q.steps >= 1, r.field("steps"), "must be at least 1");
  r.finish();
  return q;
}

BinningConfig parse_binning(const json& j, const std::string& path) {
  Reader r(j, path);
  BinningConfig b;
  b.bins = r.unsigned_int("bins", b.bins);
  b.std_bins = r.unsigned_int("std_bins", b.std_bins);
  b.mean_lo = r.number("mean_lo", b.mean_lo);
  b.mean_hi = r.number("mean_hi", b.mean_hi);
  b.std_lo = r.number("std_lo", b.std_lo);
  b.std_hi = r.number("std_hi", b.std_hi);
  require(b.bins >= 1, r.field("bins"), "must be at least 1");
  require(b.std_bins >= 1, r.field("std_bins"), "must be at least 1");
  require(b.mean_lo < b.mean_hi, r.field("mean_hi"), "must exceed mean_lo");
  require(b.std_lo < b.std_hi, r.field("std_hi"), "must exceed std_lo");
  r.finish();
  return b;
}

PolicyConfig parse_policy(const json& j, const std::string& path) {
  Reader r(j, path);
  PolicyConfig p;
  const std::string kind = r.string("kind");
  if (kind == "dp") {
    p.kind = PolicyConfig::Kind::dp;
  } else if (kind == "greedy") {
    p.kind = PolicyConfig::Kind::greedy;
  } else if (kind == "pieced") {
    p.kind = PolicyConfig::Kind::pieced;
  } else if (kind == "randomized") {
    p.kind = PolicyConfig::Kind::randomized;
    require(r.has("table") != r.has("row"), path, "randomized policy needs exactly one of table, row");
    if (r.has("table")) p.table = r.matrix("table");
    if (r.has("row")) p.row = r.vector("row");
  } else {
    throw ConfigError(r.field("kind"), "expected \"dp\", \"greedy\", \"pieced\" or \"randomized\"");
  }
  if (r.has("binning")) p.binning = parse_binning(r.raw("binning"), r.field("binning"));
  r.finish();
  return p;
}

RolloutConfig parse_rollout(const json& j, const std::string& path) {
  Reader r(j, path);
  RolloutConfig c;
  if (r.has("steps")) {
    c.steps = r.unsigned_int("steps");
    require(*c.steps >= 1, r.field("steps"), "must be at least 1");
  }
  c.paths = r.unsigned_int("paths", c.paths);
  require(c.paths >= 1, r.field("paths"), "must be at least 1");
  r.finish();
  return c;
}

ScheduleConfig parse_schedule(const json& j, const std::string& path) {
  Reader r(j, path);
  ScheduleConfig s;
  const json& h = r.raw("horizons");
  require(h.is_array() && h.size() >= 2, r.field("horizons"), "need at least two horizons");
  for (std::size_t i = 0; i < h.size(); ++i) {
    const std::string f = r.field("horizons") + "[" + std::to_string(i) + "]";
    s.horizons.push_back(Reader::as_unsigned(h[i], f));
    require(s.horizons.back() >= 1, f, "must be at least 1");
    if (i > 0) require(s.horizons[i] > s.horizons[i - 1], f, "horizons must strictly increase");
  }
  s.k_max = r.unsigned_int("k_max", s.horizons.size() - 1);
  require(s.k_max >= 1 && s.k_max + 1 <= s.horizons.size(), r.field("k_max"),
          "need 1 <= k_max <= len(horizons) - 1");
  r.finish();
  return s;
}

ViConfig parse_vi(const json& j, const std::string& path) {
  Reader r(j, path);
  ViConfig v;
  v.discount = r.number("discount", v.discount);
  require(v.discount >= 0.0 && v.discount < 1.0, r.field("discount"), "must lie in [0, 1)");
  v.resolution = r.unsigned_int("resolution", v.resolution);
  require(v.resolution >= 1, r.field("resolution"), "must be at least 1");
  v.tol = r.number("tol", v.tol);
  require(v.tol > 0.0, r.field("tol"), "must be positive");
  v.max_iter = r.unsigned_int("max_iter", v.max_iter);
  require(v.max_iter >= 1, r.field("max_iter"), "must be at least 1");
  v.mean_lo = r.number("mean_lo", v.mean_lo);
  v.mean_hi = r.number("mean_hi", v.mean_hi);
  v.mean_count = r.unsigned_int("mean_count", v.mean_count);
  v.std_lo = r.number("std_lo", v.std_lo);
  v.std_hi = r.number("std_hi", v.std_hi);
  v.std_count = r.unsigned_int("std_count", v.std_count);
  require(v.mean_count >= 1, r.field("mean_count"), "must be at least 1");
  require(v.std_count >= 1, r.field("std_count"), "must be at least 1");
  require(v.mean_lo <= v.mean_hi, r.field("mean_hi"), "must not be below mean_lo");
  require(v.std_lo > 0.0 && v.std_lo <= v.std_hi, r.field("std_lo"),
          "need 0 < std_lo <= std_hi");
  r.finish();
  return v;
}

OccupancyConfig parse_occupancy(const json& j, const std::string& path) {
  Reader r(j, path);
  OccupancyConfig o;
  o.steps = r.unsigned_int("steps", o.steps);
  require(o.steps >= 1, r.field("steps"), "must be at least 1");
  if (r.has("compare_seed")) o.compare_seed = r.unsigned_int("compare_seed");
  r.finish();
  return o;
}

}  // namespace

std::optional<Task> parse_task(std::string_view name) {
  for (const auto& [task, text] : kTasks)
    if (text == name) return task;
  return std::nullopt;
}

std::string_view task_name(Task task) {
  for (const auto& [t, text] : kTasks)
    if (t == task) return text;
  return "?";
}

ExperimentConfig parse_config(const json& doc) {
  Reader r(doc, "");
  ExperimentConfig c;
  if (r.has("task")) {
    const std::string name = r.string("task");
    c.task = parse_task(name);
    require(c.task.has_value(), "task", "unknown task \"" + name + "\"");
  }
  if (r.has("seed")) c.seed = r.unsigned_int("seed");
  if (r.has("model")) c.model = parse_model(r.raw("model"), "model");
  if (r.has("cost")) c.cost = parse_cost(r.raw("cost"), "cost");
  if (r.has("quantizers")) c.quantizers = parse_quantizers(r.raw("quantizers"), "quantizers");
  if (r.has("horizon")) {
    c.horizon = r.unsigned_int("horizon");
    require(*c.horizon >= 1, "horizon", "must be at least 1");
  }
  c.budget = r.unsigned_int("budget", c.budget);
  require(c.budget >= 1, "budget", "must be at least 1");
  c.prune_mass = r.number("prune_mass", c.prune_mass);
  require(c.prune_mass >= 0.0 && c.prune_mass < 1.0, "prune_mass", "must lie in [0, 1)");
  if (r.has("policy")) c.policy = parse_policy(r.raw("policy"), "policy");
  if (r.has("rollout")) c.rollout = parse_rollout(r.raw("rollout"), "rollout");
  if (r.has("schedule")) c.schedule = parse_schedule(r.raw("schedule"), "schedule");
  if (r.has("vi")) c.vi = parse_vi(r.raw("vi"), "vi");
  if (r.has("occupancy")) c.occupancy = parse_occupancy(r.raw("occupancy"), "occupancy");
  if (r.has("output_dir")) c.output_dir = r.string("output_dir");
  r.finish();

  if (c.model && c.model->kind == ModelConfig::Kind::finite_chain && !c.cost.quadratic) {
    require(c.cost.table.size() == c.model->transition.size(), "cost.table",
            "needs one row per chain state");
  }
  if (c.model && c.model->kind == ModelConfig::Kind::linear_gaussian) {
    require(c.cost.quadratic, "cost.kind", "linear_gaussian models support the quadratic cost only");
  }
  return c;
}

json read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open config file");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(column),
                      "syntax error: " + std::string(e.what()));
  }
}

void validate_for_task(const ExperimentConfig& c, Task task) {
  if (c.task && *c.task != task)
    throw ConfigError("task", "config is for \"" + std::string(task_name(*c.task)) +
                                  "\" but the command line asked for \"" +
                                  std::string(task_name(task)) + "\"");
  const bool finite = c.model && c.model->kind == ModelConfig::Kind::finite_chain;
  auto need_model = [&] { require(c.model.has_value(), "model", "required field is missing"); };
  auto need_quantizers = [&] {
    require(c.quantizers.has_value(), "quantizers", "required field is missing");
  };
  auto need_horizon = [&] { require(c.horizon.has_value(), "horizon", "required field is missing"); };

  switch (task) {
    case Task::design:
      need_model();
      need_quantizers();
      need_horizon();
      break;
    case Task::oracle_check:
      need_model();
      need_quantizers();
      need_horizon();
      require(finite, "model.kind", "oracle-check needs a finite_chain model");
      break;
    case Task::rollout: {
      require(c.seed.has_value(), "seed", "required for stochastic tasks");
      need_model();
      need_quantizers();
      require(c.policy.has_value(), "policy", "required field is missing");
      const auto kind = c.policy->kind;
      if (kind == PolicyConfig::Kind::dp) need_horizon();
      if (kind == PolicyConfig::Kind::pieced)
        require(c.schedule.has_value(), "schedule", "required for a pieced policy");
      if (kind == PolicyConfig::Kind::greedy || kind == PolicyConfig::Kind::randomized)
        require(c.rollout.steps.has_value(), "rollout.steps", "required for this policy");
      break;
    }
    case Task::occupancy:
      require(c.seed.has_value(), "seed", "required for stochastic tasks");
      need_model();
      need_quantizers();
      require(c.policy.has_value() && c.policy->kind == PolicyConfig::Kind::randomized, "policy",
              "occupancy needs a randomized stationary policy");
      break;
    case Task::discounted_vi:
      need_model();
      need_quantizers();
      break;
    case Task::schedule:
      require(c.schedule.has_value(), "schedule", "required field is missing");
      break;
  }
}

json echo(const ExperimentConfig& c) {
  json j = json::object();
  if (c.task) j["task"] = std::string(task_name(*c.task));
  if (c.seed) j["seed"] = *c.seed;
  if (c.model) {
    const ModelConfig& m = *c.model;
    json mj;
    if (m.kind == ModelConfig::Kind::finite_chain) {
      mj["kind"] = "finite_chain";
      mj["transition"] = m.transition;
      if (m.initial)
        mj["initial"] = *m.initial;
      else
        mj["initial"] = "stationary";
      if (!m.state_values.empty()) mj["state_values"] = m.state_values;
    } else {
      mj["kind"] = "linear_gaussian";
      mj["a"] = m.a;
      mj["sigma"] = m.sigma;
      if (m.initial_law)
        mj["initial"] = {{"mean", m.initial_law->mean}, {"std", m.initial_law->stddev}};
      else
        mj["initial"] = "stationary";
      json g = {{"points", m.grid.points}, {"width", m.grid.width}};
      if (m.grid.lo) {
        g["lo"] = *m.grid.lo;
        g["hi"] = *m.grid.hi;
      }
      mj["grid"] = g;
    }
    j["model"] = mj;
  }
  if (c.cost.quadratic) {
    j["cost"] = {{"kind", "quadratic"}};
  } else {
    j["cost"] = {{"kind", "tabular"}, {"table", c.cost.table}};
    if (!c.cost.reconstructions.empty()) j["cost"]["reconstructions"] = c.cost.reconstructions;
  }
  if (c.quantizers)
    j["quantizers"] = {{"levels", c.quantizers->levels},
                       {"lo", c.quantizers->lo},
                       {"hi", c.quantizers->hi},
                       {"steps", c.quantizers->steps}};
  if (c.horizon) j["horizon"] = *c.horizon;
  j["budget"] = c.budget;
  j["prune_mass"] = c.prune_mass;
  if (c.policy) {
    static constexpr const char* kinds[] = {"dp", "greedy", "pieced", "randomized"};
    json p = {{"kind", kinds[static_cast<int>(c.policy->kind)]}};
    if (!c.policy->table.empty()) p["table"] = c.policy->table;
    if (!c.policy->row.empty()) p["row"] = c.policy->row;
    const BinningConfig& b = c.policy->binning;
    p["binning"] = {{"bins", b.bins},       {"std_bins", b.std_bins}, {"mean_lo", b.mean_lo},
                    {"mean_hi", b.mean_hi}, {"std_lo", b.std_lo},     {"std_hi", b.std_hi}};
    j["policy"] = p;
  }
  j["rollout"] = {{"paths", c.rollout.paths}};
  if (c.rollout.steps) j["rollout"]["steps"] = *c.rollout.steps;
  if (c.schedule) j["schedule"] = {{"horizons", c.schedule->horizons}, {"k_max", c.schedule->k_max}};
  j["vi"] = {{"discount", c.vi.discount},   {"resolution", c.vi.resolution},
             {"tol", c.vi.tol},             {"max_iter", c.vi.max_iter},
             {"mean_lo", c.vi.mean_lo},     {"mean_hi", c.vi.mean_hi},
             {"mean_count", c.vi.mean_count}, {"std_lo", c.vi.std_lo},
             {"std_hi", c.vi.std_hi},       {"std_count", c.vi.std_count}};
  j["occupancy"] = {{"steps", c.occupancy.steps}};
  if (c.occupancy.compare_seed) j["occupancy"]["compare_seed"] = *c.occupancy.compare_seed;
  return j;
}

}  // namespace zdq::cli
