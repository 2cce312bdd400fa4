#include "harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "conbandit/error.hpp"

namespace conbandit::harness {

using nlohmann::json;

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

double BudgetSpec::resolve(std::size_t horizon) const {
  if (!exponent) return value;
  return std::floor(std::pow(static_cast<double>(horizon), *exponent) + 1e-9);
}

EnvConfig EnvSpec::materialize(std::size_t horizon, const BudgetSpec& target) const {
  EnvConfig cfg;
  cfg.horizon = horizon;
  cfg.arms = arms;
  cfg.constraints = constraints;
  cfg.pattern = pattern;
  cfg.loss_base = loss_base;
  cfg.loss_amplitude = loss_amplitude;
  cfg.loss_period = loss_period;
  cfg.rotating_arms = rotating_arms;
  cfg.corruption.base_constraint_means = constraint_base;
  cfg.corruption.perturbations = perturbations;
  cfg.corruption.preset = corruption.preset;
  cfg.corruption.target_budget = target.resolve(horizon);
  cfg.corruption.amplitude = corruption.amplitude;
  cfg.corruption.direction = corruption.direction;
  cfg.rho_min = rho_min;
  return cfg;
}

namespace {

// Input iterator that counts the newlines nlohmann's lexer has consumed, so
// SAX events can be tagged with a source line.
class LineCountingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  LineCountingIterator(const char* p, std::size_t* line) : p_(p), line_(line) {}
  reference operator*() const { return *p_; }
  LineCountingIterator& operator++() {
    if (*p_ == '\n') ++*line_;
    ++p_;
    return *this;
  }
  LineCountingIterator operator++(int) {
    auto copy = *this;
    ++*this;
    return copy;
  }
  friend bool operator==(const LineCountingIterator& a, const LineCountingIterator& b) {
    return a.p_ == b.p_;
  }

 private:
  const char* p_;
  std::size_t* line_;
};

// Records the line of every object key as a JSON pointer.
class KeyLineRecorder : public nlohmann::json_sax<json> {
 public:
  explicit KeyLineRecorder(const std::size_t* line) : line_(line) {}

  std::map<std::string, std::size_t> lines;

  bool null() override { return value(); }
  bool boolean(bool) override { return value(); }
  bool number_integer(number_integer_t) override { return value(); }
  bool number_unsigned(number_unsigned_t) override { return value(); }
  bool number_float(number_float_t, const string_t&) override { return value(); }
  bool string(string_t&) override { return value(); }
  bool binary(binary_t&) override { return value(); }
  bool start_object(std::size_t) override {
    value();
    stack_.push_back({false, 0, path()});
    return true;
  }
  bool key(string_t& k) override {
    stack_.back().current = stack_.back().base + "/" + k;
    lines.emplace(stack_.back().current, *line_);
    return true;
  }
  bool end_object() override {
    stack_.pop_back();
    return true;
  }
  bool start_array(std::size_t) override {
    value();
    stack_.push_back({true, 0, path()});
    return true;
  }
  bool end_array() override {
    stack_.pop_back();
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override {
    return false;
  }

 private:
  struct Frame {
    bool array;
    std::size_t index;
    std::string base;
    std::string current = {};
  };

  std::string path() const { return stack_.empty() ? std::string() : stack_.back().current; }
  bool value() {
    if (!stack_.empty() && stack_.back().array) {
      auto& f = stack_.back();
      f.current = f.base + "/" + std::to_string(f.index++);
    }
    return true;
  }

  const std::size_t* line_;
  std::vector<Frame> stack_;
};

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

class Reader {
 public:
  explicit Reader(std::map<std::string, std::size_t> lines) : lines_(std::move(lines)) {}

  // Line of the key at `ptr` or of its nearest keyed ancestor.
  std::size_t line(std::string ptr) const {
    while (!ptr.empty()) {
      if (auto it = lines_.find(ptr); it != lines_.end()) return it->second;
      ptr.erase(ptr.rfind('/'));
    }
    return 1;
  }

  [[noreturn]] void fail(const std::string& ptr, const std::string& message) const {
    throw ConfigError(line(ptr), (ptr.empty() ? std::string("config") : display(ptr)) + ": " + message);
  }

  static std::string display(const std::string& ptr) {
    std::string out;
    std::size_t pos = 1;
    while (pos <= ptr.size()) {
      const auto next = ptr.find('/', pos);
      const auto part = ptr.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
      const bool index = !part.empty() && std::all_of(part.begin(), part.end(), ::isdigit);
      if (index) {
        out += "[" + part + "]";
      } else {
        if (!out.empty()) out += ".";
        out += part;
      }
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    return out;
  }

  void expect_object(const json& j, const std::string& ptr, std::initializer_list<const char*> allowed,
                     std::initializer_list<const char*> required = {}) const {
    if (!j.is_object()) fail(ptr, "expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
      if (!keys.contains(k)) fail(ptr + "/" + k, "unknown key");
    }
    for (const char* k : required) {
      if (!j.contains(k)) fail(ptr, std::string("missing required key '") + k + "'");
    }
  }

  double number(const json& j, const std::string& ptr) const {
    if (!j.is_number()) fail(ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(ptr, "expected a finite number");
    return v;
  }

  std::uint64_t unsigned_int(const json& j, const std::string& ptr) const {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) fail(ptr, "expected a non-negative integer");
    if (j.is_number_float()) {
      const double v = j.get<double>();
      if (v >= 0 && v == std::floor(v) && v < 9.0e15) return static_cast<std::uint64_t>(v);
    }
    fail(ptr, "expected a non-negative integer");
  }

  std::string string(const json& j, const std::string& ptr) const {
    if (!j.is_string()) fail(ptr, "expected a string");
    return j.get<std::string>();
  }

  bool boolean(const json& j, const std::string& ptr) const {
    if (!j.is_boolean()) fail(ptr, "expected true or false");
    return j.get<bool>();
  }

  std::vector<double> numbers(const json& j, const std::string& ptr) const {
    if (!j.is_array()) fail(ptr, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], ptr + "/" + std::to_string(i)));
    return out;
  }

  BudgetSpec budget(const json& j, const std::string& ptr) const {
    BudgetSpec b;
    if (j.is_number()) {
      b.value = number(j, ptr);
      if (b.value < 0) fail(ptr, "budget must be non-negative");
      std::ostringstream os;
      os << b.value;
      b.label = os.str();
      return b;
    }
    if (!j.is_string()) fail(ptr, "expected a number or \"T^p\"");
    const auto s = j.get<std::string>();
    double p = 0.0;
    std::size_t used = 0;
    if (s.size() < 3 || s.compare(0, 2, "T^") != 0) fail(ptr, "expected a number or \"T^p\"");
    try {
      p = std::stod(s.substr(2), &used);
    } catch (const std::exception&) {
      fail(ptr, "expected a number or \"T^p\"");
    }
    if (used != s.size() - 2 || !(p >= 0.0 && p <= 1.0)) fail(ptr, "exponent in \"T^p\" must lie in [0, 1]");
    b.exponent = p;
    b.label = s;
    return b;
  }

 private:
  std::map<std::string, std::size_t> lines_;
};

template <class F>
auto enum_value(const Reader& r, const json& j, const std::string& ptr, F parse) {
  const auto name = r.string(j, ptr);
  try {
    return parse(name);
  } catch (const Error&) {
    r.fail(ptr, "unrecognized value '" + name + "'");
  }
}

void parse_env(const Reader& r, const json& j, EnvSpec& env) {
  const std::string at = "/env";
  r.expect_object(j, at,
                  {"K", "m", "pattern", "loss_base", "loss_amplitude", "loss_period", "rotating_arms",
                   "constraint_base", "perturbations", "corruption", "rho_min", "instance_seed"},
                  {"K", "m"});
  env.arms = r.unsigned_int(j["K"], at + "/K");
  env.constraints = r.unsigned_int(j["m"], at + "/m");
  if (env.arms < 1) r.fail(at + "/K", "need at least one arm");
  if (env.constraints < 1) r.fail(at + "/m", "need at least one constraint");
  if (j.contains("pattern")) env.pattern = enum_value(r, j["pattern"], at + "/pattern", parse_loss_pattern);
  if (j.contains("loss_base")) {
    env.loss_base = r.numbers(j["loss_base"], at + "/loss_base");
    if (env.loss_base.size() != env.arms) r.fail(at + "/loss_base", "needs K entries");
    for (double v : env.loss_base) {
      if (v < 0.0 || v > 1.0) r.fail(at + "/loss_base", "entries must lie in [0, 1]");
    }
  }
  if (j.contains("loss_amplitude")) env.loss_amplitude = r.number(j["loss_amplitude"], at + "/loss_amplitude");
  if (j.contains("loss_period")) env.loss_period = r.unsigned_int(j["loss_period"], at + "/loss_period");
  if (j.contains("rotating_arms")) {
    const auto& a = j["rotating_arms"];
    if (!a.is_array()) r.fail(at + "/rotating_arms", "expected an array of arm indices");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto p = at + "/rotating_arms/" + std::to_string(i);
      const auto arm = r.unsigned_int(a[i], p);
      if (arm >= env.arms) r.fail(p, "arm index out of range");
      env.rotating_arms.push_back(arm);
    }
  }
  if (j.contains("constraint_base")) {
    const auto& rows = j["constraint_base"];
    const auto p = at + "/constraint_base";
    if (!rows.is_array() || rows.size() != env.constraints) r.fail(p, "needs m rows");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto row = r.numbers(rows[i], p + "/" + std::to_string(i));
      if (row.size() != env.arms) r.fail(p + "/" + std::to_string(i), "needs K entries");
      for (double v : row) {
        if (v < -1.0 || v > 1.0) r.fail(p + "/" + std::to_string(i), "entries must lie in [-1, 1]");
      }
      env.constraint_base.push_back(std::move(row));
    }
  }
  if (j.contains("perturbations")) {
    const auto& list = j["perturbations"];
    const auto p = at + "/perturbations";
    if (!list.is_array()) r.fail(p, "expected an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const auto q = p + "/" + std::to_string(k);
      r.expect_object(list[k], q, {"round", "constraint", "delta"}, {"round", "constraint", "delta"});
      Perturbation pert;
      pert.round = r.unsigned_int(list[k]["round"], q + "/round");
      pert.constraint = r.unsigned_int(list[k]["constraint"], q + "/constraint");
      pert.delta = r.numbers(list[k]["delta"], q + "/delta");
      if (pert.constraint >= env.constraints) r.fail(q + "/constraint", "constraint index out of range");
      if (pert.delta.size() != env.arms) r.fail(q + "/delta", "needs K entries");
      env.perturbations.push_back(std::move(pert));
    }
  }
  if (j.contains("corruption")) {
    const auto& c = j["corruption"];
    const auto p = at + "/corruption";
    r.expect_object(c, p, {"preset", "target", "amplitude", "direction"});
    if (c.contains("preset")) env.corruption.preset = enum_value(r, c["preset"], p + "/preset", parse_corruption_preset);
    if (c.contains("target")) env.corruption.target = r.budget(c["target"], p + "/target");
    if (c.contains("amplitude")) {
      env.corruption.amplitude = r.number(c["amplitude"], p + "/amplitude");
      if (!(env.corruption.amplitude > 0.0 && env.corruption.amplitude <= 2.0)) {
        r.fail(p + "/amplitude", "must lie in (0, 2]");
      }
    }
    if (c.contains("direction")) {
      env.corruption.direction = enum_value(r, c["direction"], p + "/direction", parse_corruption_direction);
    }
  }
  if (j.contains("rho_min")) {
    env.rho_min = r.number(j["rho_min"], at + "/rho_min");
    if (env.rho_min <= 0.0) r.fail(at + "/rho_min", "must be positive");
  }
  if (j.contains("instance_seed")) env.instance_seed = r.unsigned_int(j["instance_seed"], at + "/instance_seed");
}

void parse_algorithm(const Reader& r, const json& j, AlgorithmSpec& algo) {
  const std::string at = "/algorithm";
  r.expect_object(j, at, {"name", "delta", "beta", "eta", "gamma", "known_c"}, {"name"});
  algo.id = enum_value(r, j["name"], at + "/name", conbandit::parse_algorithm);
  auto& p = algo.params;
  if (j.contains("delta")) {
    p.delta = r.number(j["delta"], at + "/delta");
    if (!(p.delta > 0.0 && p.delta < 1.0)) r.fail(at + "/delta", "must lie in (0, 1)");
  }
  if (j.contains("beta")) {
    p.beta = r.number(j["beta"], at + "/beta");
    if (!(p.beta >= 0.0 && p.beta < 1.0)) r.fail(at + "/beta", "must lie in [0, 1)");
  }
  if (j.contains("eta")) {
    p.eta = r.number(j["eta"], at + "/eta");
    if (*p.eta < 0.0) r.fail(at + "/eta", "must be non-negative");
  }
  if (j.contains("gamma")) {
    p.gamma = r.number(j["gamma"], at + "/gamma");
    if (*p.gamma < 0.0) r.fail(at + "/gamma", "must be non-negative");
  }
  if (j.contains("known_c")) {
    p.known_c = r.number(j["known_c"], at + "/known_c");
    if (*p.known_c < 0.0) r.fail(at + "/known_c", "must be non-negative");
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  std::size_t line = 1;
  KeyLineRecorder recorder(&line);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw ConfigError(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), what);
  }
  json::sax_parse(LineCountingIterator(text.data(), &line),
                  LineCountingIterator(text.data() + text.size(), &line), &recorder);
  const Reader r(std::move(recorder.lines));

  ExperimentConfig cfg;
  r.expect_object(doc, "",
                  {"schema_version", "env", "algorithm", "horizons", "seeds", "output_dir", "sweep",
                   "diagnostics"},
                  {"schema_version", "env", "algorithm", "horizons", "seeds", "output_dir"});
  const auto version = r.unsigned_int(doc["schema_version"], "/schema_version");
  if (version != static_cast<std::uint64_t>(kSchemaVersion)) {
    r.fail("/schema_version", "unsupported schema version " + std::to_string(version) + " (expected " +
                                  std::to_string(kSchemaVersion) + ")");
  }
  parse_env(r, doc["env"], cfg.env);
  parse_algorithm(r, doc["algorithm"], cfg.algorithm);

  const auto& horizons = doc["horizons"];
  if (!horizons.is_array()) r.fail("/horizons", "expected an array of horizons");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const auto p = "/horizons/" + std::to_string(i);
    const auto T = r.unsigned_int(horizons[i], p);
    if (T < 1) r.fail(p, "horizon must be at least 1");
    cfg.horizons.push_back(T);
  }
  if (cfg.horizons.empty()) r.fail("/horizons", "empty grid: no horizons");

  const auto& seeds = doc["seeds"];
  if (seeds.is_array()) {
    for (std::size_t i = 0; i < seeds.size(); ++i) cfg.seeds.push_back(r.unsigned_int(seeds[i], "/seeds/" + std::to_string(i)));
  } else if (seeds.is_number()) {
    const auto n = r.unsigned_int(seeds, "/seeds");
    for (std::uint64_t s = 1; s <= n; ++s) cfg.seeds.push_back(s);
  } else {
    r.fail("/seeds", "expected a seed list or a count");
  }
  if (cfg.seeds.empty()) r.fail("/seeds", "empty grid: no seeds");
  {
    auto sorted = cfg.seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) r.fail("/seeds", "duplicate seed");
  }

  cfg.output_dir = r.string(doc["output_dir"], "/output_dir");
  if (cfg.output_dir.empty()) r.fail("/output_dir", "must not be empty");

  if (doc.contains("diagnostics")) cfg.diagnostics = r.boolean(doc["diagnostics"], "/diagnostics");

  if (doc.contains("sweep")) {
    const auto& s = doc["sweep"];
    r.expect_object(s, "/sweep", {"algorithms", "C_target", "beta"});
    SweepSpec sweep;
    if (s.contains("algorithms")) {
      const auto& a = s["algorithms"];
      if (!a.is_array()) r.fail("/sweep/algorithms", "expected an array of algorithm names");
      for (std::size_t i = 0; i < a.size(); ++i) {
        sweep.algorithms.push_back(
            enum_value(r, a[i], "/sweep/algorithms/" + std::to_string(i), conbandit::parse_algorithm));
      }
    } else {
      sweep.algorithms.push_back(cfg.algorithm.id);
    }
    if (s.contains("C_target")) {
      const auto& a = s["C_target"];
      if (!a.is_array()) r.fail("/sweep/C_target", "expected an array of budgets");
      for (std::size_t i = 0; i < a.size(); ++i) sweep.targets.push_back(r.budget(a[i], "/sweep/C_target/" + std::to_string(i)));
    } else {
      sweep.targets.push_back(cfg.env.corruption.target);
    }
    if (s.contains("beta")) {
      const auto p = "/sweep/beta";
      sweep.betas = r.numbers(s["beta"], p);
      for (double b : sweep.betas) {
        if (!(b >= 0.0 && b < 1.0)) r.fail(p, "every beta must lie in [0, 1)");
      }
    } else {
      sweep.betas.push_back(cfg.algorithm.params.beta);
    }
    if (sweep.algorithms.empty()) r.fail("/sweep/algorithms", "empty grid: no algorithms");
    if (sweep.targets.empty()) r.fail("/sweep/C_target", "empty grid: no budgets");
    if (sweep.betas.empty()) r.fail("/sweep/beta", "empty grid: no beta values");
    cfg.sweep = std::move(sweep);
  }

  // Forced exploration must fit in the horizon.
  std::vector<std::pair<AlgorithmId, double>> plans;
  if (cfg.sweep) {
    for (auto id : cfg.sweep->algorithms) {
      for (double b : cfg.sweep->betas) plans.emplace_back(id, b);
    }
  } else {
    plans.emplace_back(cfg.algorithm.id, cfg.algorithm.params.beta);
  }
  for (const auto& [id, beta] : plans) {
    if (id != AlgorithmId::expopt) continue;
    for (auto T : cfg.horizons) {
      const auto pulls = exploration_pulls(T, beta);
      if (cfg.env.arms * pulls > T) {
        const bool swept = cfg.sweep && doc["sweep"].contains("beta");
        r.fail(swept ? "/sweep/beta" : doc["algorithm"].contains("beta") ? "/algorithm/beta" : "/horizons",
               "expopt needs K*ceil(T^beta) <= T, got " + std::to_string(cfg.env.arms * pulls) + " > " +
                   std::to_string(T));
      }
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace conbandit::harness
