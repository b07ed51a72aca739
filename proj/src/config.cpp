#include "distlab/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace distlab {
namespace {

// A parsed right-hand side. Numbers and list items keep their source text so
// each field can apply its own type rules.
struct Value {
  enum class Kind { kString, kBool, kNumber, kList } kind = Kind::kNumber;
  std::string text;
  bool boolean = false;
  std::vector<std::string> items;
  std::size_t line = 0;
};

std::string describe(const Value& v) {
  switch (v.kind) {
    case Value::Kind::kString: return "string \"" + v.text + "\"";
    case Value::Kind::kBool: return v.boolean ? "true" : "false";
    case Value::Kind::kNumber: return "number " + v.text;
    case Value::Kind::kList: return "list";
  }
  return "value";
}

[[noreturn]] void type_error(const std::string& key, const char* expected, const Value& v) {
  throw ConfigError(key + ": expected " + expected + ", got " + describe(v) + " (line " +
                    std::to_string(v.line) + ")");
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw ConfigError("internal: cannot format number");
  return std::string(buf, ptr);
}

double to_double(const std::string& key, const std::string& text, const Value& v) {
  double x = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x)) type_error(key, "finite number", v);
  return x;
}

template <class T>
T to_integer(const std::string& key, const std::string& text, const Value& v) {
  long long x = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc() || ptr != end) type_error(key, "integer", v);
  if (x < static_cast<long long>(std::numeric_limits<T>::min()) ||
      (x > 0 && static_cast<unsigned long long>(x) > std::numeric_limits<T>::max())) {
    throw ConfigError(key + ": value " + text + " out of range");
  }
  return static_cast<T>(x);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

struct Field {
  const char* type;
  const char* doc;
  std::function<void(ExperimentConfig&, const Value&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
using Accessor = T& (*)(ExperimentConfig&);

template <class T>
T& access(Accessor<T> a, const ExperimentConfig& c) {
  return a(const_cast<ExperimentConfig&>(c));
}

template <class T>
Field int_field(const char* doc, Accessor<T> a) {
  return {"integer", doc,
          [a](ExperimentConfig& c, const Value& v, const std::string& key) {
            if (v.kind != Value::Kind::kNumber) type_error(key, "integer", v);
            a(c) = to_integer<T>(key, v.text, v);
          },
          [a](const ExperimentConfig& c) { return std::to_string(access(a, c)); }};
}

Field float_field(const char* doc, Accessor<double> a) {
  return {"float", doc,
          [a](ExperimentConfig& c, const Value& v, const std::string& key) {
            if (v.kind != Value::Kind::kNumber) type_error(key, "number", v);
            a(c) = to_double(key, v.text, v);
          },
          [a](const ExperimentConfig& c) { return format_double(access(a, c)); }};
}

Field bool_field(const char* doc, Accessor<bool> a) {
  return {"bool", doc,
          [a](ExperimentConfig& c, const Value& v, const std::string& key) {
            if (v.kind != Value::Kind::kBool) type_error(key, "true or false", v);
            a(c) = v.boolean;
          },
          [a](const ExperimentConfig& c) { return std::string(access(a, c) ? "true" : "false"); }};
}

Field string_field(const char* doc, Accessor<std::string> a) {
  return {"string", doc,
          [a](ExperimentConfig& c, const Value& v, const std::string& key) {
            if (v.kind != Value::Kind::kString) type_error(key, "string", v);
            a(c) = v.text;
          },
          [a](const ExperimentConfig& c) { return quote(access(a, c)); }};
}

Field list_field(const char* doc, Accessor<std::vector<std::size_t>> a) {
  return {"integer list", doc,
          [a](ExperimentConfig& c, const Value& v, const std::string& key) {
            if (v.kind != Value::Kind::kList) type_error(key, "list of integers", v);
            std::vector<std::size_t> out;
            for (const auto& item : v.items) out.push_back(to_integer<std::size_t>(key, item, v));
            a(c) = std::move(out);
          },
          [a](const ExperimentConfig& c) {
            std::string s = "[";
            const auto& xs = access(a, c);
            for (std::size_t i = 0; i < xs.size(); ++i) {
              if (i > 0) s += ", ";
              s += std::to_string(xs[i]);
            }
            return s + "]";
          }};
}

const std::map<std::string, Field>& registry() {
  static const std::map<std::string, Field> fields = [] {
    std::map<std::string, Field> f;
    // dataset
    f.emplace("dataset.source",
              Field{"string", "\"synthetic\" (Gaussian mixture) or \"csv\"",
                    [](ExperimentConfig& c, const Value& v, const std::string& key) {
                      if (v.kind != Value::Kind::kString) type_error(key, "string", v);
                      if (v.text == "synthetic") c.dataset.source = DataSource::kSynthetic;
                      else if (v.text == "csv") c.dataset.source = DataSource::kCsv;
                      else throw ConfigError(key + ": unknown source \"" + v.text + "\"");
                    },
                    [](const ExperimentConfig& c) {
                      return quote(c.dataset.source == DataSource::kCsv ? "csv" : "synthetic");
                    }});
    f.emplace("dataset.k", int_field<std::size_t>("number of classes (synthetic)",
                                                  [](ExperimentConfig& c) -> std::size_t& { return c.dataset.k; }));
    f.emplace("dataset.d", int_field<std::size_t>("feature dimension (synthetic)",
                                                  [](ExperimentConfig& c) -> std::size_t& { return c.dataset.d; }));
    f.emplace("dataset.n_train", int_field<std::size_t>("training samples before the validation split",
                                                        [](ExperimentConfig& c) -> std::size_t& { return c.dataset.n_train; }));
    f.emplace("dataset.n_test", int_field<std::size_t>("test samples (synthetic)",
                                                       [](ExperimentConfig& c) -> std::size_t& { return c.dataset.n_test; }));
    f.emplace("dataset.cluster_spread", float_field("noise std around each class mean",
                                                    [](ExperimentConfig& c) -> double& { return c.dataset.cluster_spread; }));
    f.emplace("dataset.overlap", float_field("in [0,1); shrinks class means toward each other",
                                             [](ExperimentConfig& c) -> double& { return c.dataset.overlap; }));
    f.emplace("dataset.seed", int_field<std::uint64_t>("data generation / csv test split seed",
                                                       [](ExperimentConfig& c) -> std::uint64_t& { return c.dataset.seed; }));
    f.emplace("dataset.path", string_field("csv file path",
                                           [](ExperimentConfig& c) -> std::string& { return c.dataset.path; }));
    f.emplace("dataset.label_column", string_field("csv label column name",
                                                   [](ExperimentConfig& c) -> std::string& { return c.dataset.label_column; }));
    f.emplace("dataset.test_fraction", float_field("csv rows held out for testing",
                                                   [](ExperimentConfig& c) -> double& { return c.dataset.test_fraction; }));
    // model
    f.emplace("model.hidden", list_field("hidden layer widths; [] is softmax regression",
                                         [](ExperimentConfig& c) -> std::vector<std::size_t>& { return c.hidden; }));
    f.emplace("model.hidden_b", list_field("second architecture for cross-distillation",
                                           [](ExperimentConfig& c) -> std::vector<std::size_t>& { return c.hidden_b; }));
    // train
    f.emplace("train.epochs", int_field<int>("training epochs per run",
                                             [](ExperimentConfig& c) -> int& { return c.train.epochs; }));
    f.emplace("train.batch_size", int_field<std::size_t>("minibatch size",
                                                         [](ExperimentConfig& c) -> std::size_t& { return c.train.batch_size; }));
    f.emplace("train.learning_rate", float_field("initial SGD step size (x0.1 at 50%, x0.01 at 75% of epochs)",
                                                 [](ExperimentConfig& c) -> double& { return c.train.learning_rate; }));
    f.emplace("train.momentum", float_field("SGD momentum in [0,1)",
                                            [](ExperimentConfig& c) -> double& { return c.train.momentum; }));
    f.emplace("train.weight_decay", float_field("L2 weight decay on weights (not biases)",
                                                [](ExperimentConfig& c) -> double& { return c.train.weight_decay; }));
    f.emplace("train.validation_fraction", float_field("share of training data held out for validation",
                                                       [](ExperimentConfig& c) -> double& { return c.train.validation_fraction; }));
    f.emplace("train.early_stopping", bool_field("keep the epoch with the best validation NLL",
                                                 [](ExperimentConfig& c) -> bool& { return c.train.early_stopping; }));
    f.emplace("train.ema_decay", float_field("EMA decay for the mean-teacher shadow model",
                                             [](ExperimentConfig& c) -> double& { return c.train.ema_decay; }));
    // targets
    f.emplace("targets.scheme",
              Field{"string",
                    "one of: ce, ls, ls_map, pu, distill, beta, ema_self, pruned, weighted_sd, dirichlet_map",
                    [](ExperimentConfig& c, const Value& v, const std::string& key) {
                      if (v.kind != Value::Kind::kString) type_error(key, "string", v);
                      try {
                        c.targets.scheme = parse_scheme(v.text);
                      } catch (const std::invalid_argument&) {
                        throw ConfigError(key + ": unknown scheme \"" + v.text + "\"");
                      }
                    },
                    [](const ExperimentConfig& c) { return quote(scheme_name(c.targets.scheme)); }});
    f.emplace("targets.alpha", float_field("weight of the one-hot term when mixing with soft targets",
                                           [](ExperimentConfig& c) -> double& { return c.targets.alpha; }));
    f.emplace("targets.temperature", float_field("teacher temperature T",
                                                 [](ExperimentConfig& c) -> double& { return c.targets.temperature; }));
    f.emplace("targets.beta", float_field("regularizer / prior strength",
                                          [](ExperimentConfig& c) -> double& { return c.targets.beta; }));
    f.emplace("targets.gamma", float_field("additive prior offset for dirichlet_map",
                                           [](ExperimentConfig& c) -> double& { return c.targets.gamma; }));
    f.emplace("targets.epsilon", float_field("label smoothing amount",
                                             [](ExperimentConfig& c) -> double& { return c.targets.epsilon; }));
    f.emplace("targets.keep_fraction", float_field("share of teacher classes kept by pruned targets",
                                                   [](ExperimentConfig& c) -> double& { return c.targets.keep_fraction; }));
    f.emplace("targets.g", float_field("mean effective ground-truth label to match",
                                       [](ExperimentConfig& c) -> double& { return c.targets.g; }));
    f.emplace("targets.beta_a", float_field("Beta(a,1) shape; 0 solves a from g and alpha",
                                            [](ExperimentConfig& c) -> double& { return c.targets.beta_a; }));
    f.emplace("targets.use_ema_ranking", bool_field("rank Beta draws by EMA confidence (false = random pairing)",
                                                    [](ExperimentConfig& c) -> bool& { return c.targets.use_ema_ranking; }));
    f.emplace("targets.student_scaling", bool_field("also temper the student during distillation",
                                                    [](ExperimentConfig& c) -> bool& { return c.targets.student_scaling; }));
    // experiment
    f.emplace("experiment.generations", int_field<int>("generations in a BAN sequence",
                                                       [](ExperimentConfig& c) -> int& { return c.generations; }));
    f.emplace("experiment.repeats", int_field<int>("independent seeds per experiment",
                                                   [](ExperimentConfig& c) -> int& { return c.repeats; }));
    f.emplace("experiment.seed", int_field<std::uint64_t>("base seed; repeat r uses seed + 1000 r",
                                                          [](ExperimentConfig& c) -> std::uint64_t& { return c.seed; }));
    f.emplace("experiment.knn_k", int_field<std::size_t>("neighbour rank for the entropy estimator",
                                                         [](ExperimentConfig& c) -> std::size_t& { return c.knn_k; }));
    f.emplace("experiment.ece_bins", int_field<std::size_t>("equal-width calibration bins",
                                                            [](ExperimentConfig& c) -> std::size_t& { return c.ece_bins; }));
    f.emplace("experiment.sd_alpha", float_field("alpha of the self-distillation arm in `compare`",
                                                 [](ExperimentConfig& c) -> double& { return c.sd_alpha; }));
    f.emplace("experiment.beta_alpha", float_field("alpha of the Beta-smoothing arm in `compare`",
                                                   [](ExperimentConfig& c) -> double& { return c.beta_alpha; }));
    f.emplace("experiment.record_wall_time", bool_field("store wall-clock seconds (makes outputs nondeterministic)",
                                                        [](ExperimentConfig& c) -> bool& { return c.record_wall_time; }));
    return f;
  }();
  return fields;
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && in_string) {
      ++i;
    } else if (line[i] == '"') {
      in_string = !in_string;
    } else if (line[i] == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Value parse_value(const std::string& raw, const std::string& key, std::size_t line) {
  Value v;
  v.line = line;
  const std::string s = trim(raw);
  const auto fail = [&](const char* why) -> ConfigError {
    return ConfigError(key + ": " + why + " (line " + std::to_string(line) + ")");
  };
  if (s.empty()) throw fail("missing value");
  if (s.front() == '"') {
    v.kind = Value::Kind::kString;
    std::size_t i = 1;
    for (; i < s.size() && s[i] != '"'; ++i) {
      if (s[i] == '\\' && i + 1 < s.size()) ++i;
      v.text += s[i];
    }
    if (i != s.size() - 1) throw fail("malformed string");
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = Value::Kind::kBool;
    v.boolean = s == "true";
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') throw fail("unterminated list");
    v.kind = Value::Kind::kList;
    std::stringstream body(s.substr(1, s.size() - 2));
    std::string item;
    while (std::getline(body, item, ',')) {
      item = trim(item);
      if (item.empty()) {
        if (body.eof() && v.items.empty()) break;
        throw fail("empty list item");
      }
      v.items.push_back(item);
    }
    return v;
  }
  v.kind = Value::Kind::kNumber;
  v.text = s;
  return v;
}

template <class F>
void guard(F&& check) {
  try {
    check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void require(bool ok, const std::string& key, const char* what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

}  // namespace

const char* scheme_name(TargetScheme s) {
  switch (s) {
    case TargetScheme::kCe: return "ce";
    case TargetScheme::kLabelSmoothing: return "ls";
    case TargetScheme::kLsMap: return "ls_map";
    case TargetScheme::kPredUncertainty: return "pu";
    case TargetScheme::kDistill: return "distill";
    case TargetScheme::kBeta: return "beta";
    case TargetScheme::kEmaSelf: return "ema_self";
    case TargetScheme::kPruned: return "pruned";
    case TargetScheme::kWeightedSd: return "weighted_sd";
    case TargetScheme::kDirichletMap: return "dirichlet_map";
  }
  return "?";
}

TargetScheme parse_scheme(const std::string& name) {
  for (auto s : {TargetScheme::kCe, TargetScheme::kLabelSmoothing, TargetScheme::kLsMap,
                 TargetScheme::kPredUncertainty, TargetScheme::kDistill, TargetScheme::kBeta,
                 TargetScheme::kEmaSelf, TargetScheme::kPruned, TargetScheme::kWeightedSd,
                 TargetScheme::kDirichletMap}) {
    if (name == scheme_name(s)) return s;
  }
  throw std::invalid_argument("unknown target scheme '" + name + "'");
}

bool needs_teacher(TargetScheme s) {
  return s == TargetScheme::kDistill || s == TargetScheme::kPruned ||
         s == TargetScheme::kWeightedSd || s == TargetScheme::kDirichletMap;
}

void validate_config(const ExperimentConfig& c) {
  guard([&] { validate_dataset_spec(c.dataset); });
  for (auto h : c.hidden) require(h >= 1, "model.hidden", "widths must be >= 1");
  for (auto h : c.hidden_b) require(h >= 1, "model.hidden_b", "widths must be >= 1");
  const auto& t = c.train;
  require(t.epochs >= 1, "train.epochs", "must be >= 1");
  require(t.batch_size >= 1, "train.batch_size", "must be >= 1");
  require(t.learning_rate > 0.0, "train.learning_rate", "must be > 0");
  require(t.momentum >= 0.0 && t.momentum < 1.0, "train.momentum", "must be in [0,1)");
  require(t.weight_decay >= 0.0, "train.weight_decay", "must be >= 0");
  require(t.validation_fraction >= 0.0 && t.validation_fraction < 1.0,
          "train.validation_fraction", "must be in [0,1)");
  require(!t.early_stopping || t.validation_fraction > 0.0, "train.early_stopping",
          "requires train.validation_fraction > 0");
  require(t.ema_decay >= 0.0 && t.ema_decay < 1.0, "train.ema_decay", "must be in [0,1)");
  const auto& g = c.targets;
  require(g.alpha >= 0.0 && g.alpha <= 1.0, "targets.alpha", "must be in [0,1]");
  require(g.temperature > 0.0, "targets.temperature", "must be > 0");
  require(g.beta >= 0.0, "targets.beta", "must be >= 0");
  require(g.epsilon >= 0.0 && g.epsilon < 1.0, "targets.epsilon", "must be in [0,1)");
  require(g.keep_fraction > 0.0 && g.keep_fraction <= 1.0, "targets.keep_fraction",
          "must be in (0,1]");
  require(g.g > 0.0 && g.g < 1.0, "targets.g", "must be in (0,1)");
  require(g.beta_a >= 0.0, "targets.beta_a", "must be >= 0");
  if (g.scheme == TargetScheme::kBeta && g.beta_a == 0.0) {
    require(g.g > g.alpha, "targets.g", "must exceed targets.alpha for Beta smoothing");
  }
  if (g.scheme == TargetScheme::kWeightedSd || g.scheme == TargetScheme::kDirichletMap) {
    require(g.beta > 0.0, "targets.beta", "must be > 0 for this scheme");
  }
  require(c.generations >= 1, "experiment.generations", "must be >= 1");
  require(c.repeats >= 1, "experiment.repeats", "must be >= 1");
  require(c.knn_k >= 1, "experiment.knn_k", "must be >= 1");
  require(c.ece_bins >= 1, "experiment.ece_bins", "must be >= 1");
  require(c.sd_alpha >= 0.0 && c.sd_alpha < 1.0, "experiment.sd_alpha", "must be in [0,1)");
  require(c.beta_alpha >= 0.0 && c.beta_alpha < 1.0, "experiment.beta_alpha",
          "must be in [0,1)");
}

ExperimentConfig parse_config_text(const std::string& text) {
  const auto& fields = registry();
  ExperimentConfig config;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string name = trim(line.substr(0, eq));
    const std::string key = section.empty() ? name : section + "." + name;
    const auto it = fields.find(key);
    if (it == fields.end()) {
      throw ConfigError(key + ": unknown key (line " + std::to_string(line_no) + ")");
    }
    if (!seen.insert(key).second) {
      throw ConfigError(key + ": duplicate key (line " + std::to_string(line_no) + ")");
    }
    it->second.set(config, parse_value(line.substr(eq + 1), key, line_no), key);
  }
  validate_config(config);
  return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const auto& [key, field] : registry()) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += '\n';
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + field.get(config) + "\n";
  }
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_config(config)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_reference() {
  const ExperimentConfig defaults;
  std::string out =
      "# Configuration reference\n\n"
      "Config files are `key = value` lines grouped under `[section]` headers; `#` starts a\n"
      "comment. Unknown keys are rejected. Every key is optional.\n\n"
      "| key | type | default | meaning |\n|---|---|---|---|\n";
  for (const auto& [key, field] : registry()) {
    out += "| `" + key + "` | " + field.type + " | `" + field.get(defaults) + "` | " + field.doc +
           " |\n";
  }
  return out;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace distlab
