#include "tdsafe/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tdsafe {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_double(const std::string& where, const std::string& text) {
  try {
    size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + where + ": not a number: '" + text + "'");
  }
}

std::vector<double> parse_vector(const std::string& where, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(where, item));
  }
  return out;
}

std::string format_vector(const Eigen::VectorXd& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v(i));
  }
  return out;
}

class Reader {
 public:
  Reader(const ConfigDoc& doc, std::string section) : doc_(doc), section_(std::move(section)) {}

  double number(const std::string& key, double fallback) const {
    const auto v = doc_.get(section_, key);
    return v ? parse_double(section_ + "." + key, *v) : fallback;
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return doc_.get(section_, key).value_or(fallback);
  }
  std::optional<std::vector<double>> vector(const std::string& key) const {
    const auto v = doc_.get(section_, key);
    if (!v) return std::nullopt;
    return parse_vector(section_ + "." + key, *v);
  }

 private:
  const ConfigDoc& doc_;
  std::string section_;
};

GainSpec read_gain(const ConfigDoc& doc) {
  Reader gain(doc, "gain");
  const std::string variant = gain.text("variant", "sign");
  if (variant == "sign") return GainSpec::sign(gain.number("k", 5.0));
  if (variant == "sigmoid") return GainSpec::sigmoid(gain.number("k", 5.0), gain.number("epsilon", 0.01));
  if (variant == "krasovskii") return GainSpec::krasovskii(gain.number("k1", 0.025));
  if (variant == "razumikhin") {
    const double k1 = gain.number("k1", 2.2);
    const double c = gain.number("alpha_coeff", 2.0);
    if (!(c > 0.0) || !(c < k1)) {
      throw std::invalid_argument("config: gain.alpha_coeff must satisfy 0 < alpha_coeff < k1");
    }
    return GainSpec::razumikhin(k1, ComparisonFunction::linear(c));
  }
  throw std::invalid_argument("config: gain.variant: unknown variant '" + variant + "'");
}

void write_gain(ConfigDoc& doc, const GainSpec& gain) {
  switch (gain.variant()) {
    case GainSpec::Variant::kSign:
      doc.set("gain", "variant", "sign");
      doc.set("gain", "k", format_double(gain.k()));
      break;
    case GainSpec::Variant::kSigmoid:
      doc.set("gain", "variant", "sigmoid");
      doc.set("gain", "k", format_double(gain.k()));
      doc.set("gain", "epsilon", format_double(gain.eps()));
      break;
    case GainSpec::Variant::kRazumikhin:
      doc.set("gain", "variant", "razumikhin");
      doc.set("gain", "k1", format_double(gain.k()));
      // The configurable alpha is linear; recover its slope.
      doc.set("gain", "alpha_coeff", format_double(gain.alpha(1.0)));
      break;
    case GainSpec::Variant::kKrasovskii:
      doc.set("gain", "variant", "krasovskii");
      doc.set("gain", "k1", format_double(gain.k()));
      break;
  }
}

void check_numerics(double dt, double tf, const std::vector<std::pair<std::string, double>>& delays) {
  if (dt <= 0.0) throw std::invalid_argument("config: numerics.dt must be > 0");
  if (tf < dt) throw std::invalid_argument("config: numerics.tf must be >= dt");
  for (const auto& [name, delay] : delays) {
    const long k = std::lround(delay / dt);
    if (k < 1 || std::abs(k * dt - delay) > 1e-9) {
      throw std::invalid_argument("config: numerics.dt must divide " + name);
    }
  }
}

}  // namespace

void ConfigDoc::set(const std::string& section_name, const std::string& key,
                    const std::string& value) {
  auto& sec = section(section_name);
  for (auto& [k, v] : sec.entries) {
    if (k == key) {
      v = value;
      return;
    }
  }
  sec.entries.emplace_back(key, value);
}

std::optional<std::string> ConfigDoc::get(const std::string& section, const std::string& key) const {
  for (const auto& sec : sections_) {
    if (sec.name != section) continue;
    for (const auto& [k, v] : sec.entries) {
      if (k == key) return v;
    }
  }
  return std::nullopt;
}

bool ConfigDoc::has_section(const std::string& section) const {
  for (const auto& sec : sections_) {
    if (sec.name == section) return true;
  }
  return false;
}

std::vector<std::tuple<std::string, std::string, std::string>> ConfigDoc::flatten() const {
  std::vector<std::tuple<std::string, std::string, std::string>> out;
  for (const auto& sec : sections_) {
    for (const auto& [k, v] : sec.entries) out.emplace_back(sec.name, k, v);
  }
  return out;
}

ConfigDoc::Section& ConfigDoc::section(const std::string& name) {
  for (auto& sec : sections_) {
    if (sec.name == name) return sec;
  }
  sections_.push_back({name, {}});
  return sections_.back();
}

ConfigDoc ConfigDoc::parse(const std::string& text) {
  ConfigDoc doc;
  std::istringstream in(text);
  std::string line;
  std::string current;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                    ": unterminated section header");
      }
      current = trim(line.substr(1, line.size() - 2));
      doc.section(current);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) + ": empty key");
    }
    doc.set(current, key, trim(line.substr(eq + 1)));
  }
  return doc;
}

ConfigDoc ConfigDoc::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ConfigDoc::serialize() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& sec : sections_) {
    if (!first) out << "\n";
    first = false;
    if (!sec.name.empty()) out << "[" << sec.name << "]\n";
    for (const auto& [k, v] : sec.entries) out << k << " = " << v << "\n";
  }
  return out.str();
}

ScenarioConfig resolve_config(const ConfigDoc& doc) {
  ScenarioConfig config;
  config.scenario = doc.get("", "scenario").value_or("ccc");
  Reader numerics(doc, "numerics");
  Reader output(doc, "output");
  config.output_directory = output.text("directory", "out");
  config.metrics_config.band_lo = output.number("band_lo", config.metrics_config.band_lo);
  config.metrics_config.band_hi = output.number("band_hi", config.metrics_config.band_hi);
  config.metrics_config.residence = output.number("residence", config.metrics_config.residence);
  config.metrics_config.chatter_window =
      output.number("chatter_window", config.metrics_config.chatter_window);
  if (config.metrics_config.band_hi < config.metrics_config.band_lo) {
    throw std::invalid_argument("config: output.band_hi must be >= output.band_lo");
  }

  if (config.scenario == "ccc") {
    CccParams params;
    Reader r(doc, "ccc");
    params.mass = r.number("mass", params.mass);
    params.a0 = r.number("a0", params.a0);
    params.a1 = r.number("a1", params.a1);
    params.a2 = r.number("a2", params.a2);
    params.v_desired = r.number("v_desired", params.v_desired);
    params.headway = r.number("headway", params.headway);
    params.barrier_weight = r.number("barrier_weight", params.barrier_weight);
    params.tau = r.number("tau", params.tau);
    params.leader_accel.period = r.number("leader_accel_period", params.leader_accel.period);
    params.leader_accel.bound = r.number("leader_accel_bound", params.leader_accel.bound);
    if (auto levels = r.vector("leader_accel_levels")) params.leader_accel.levels = *levels;
    if (auto xi = r.vector("xi")) {
      if (xi->size() != 3) throw std::invalid_argument("config: ccc.xi needs 3 components");
      params.xi = Eigen::Vector3d((*xi)[0], (*xi)[1], (*xi)[2]);
    }
    params.gain = read_gain(doc);
    params.dt = numerics.number("dt", params.dt);
    params.tf = numerics.number("tf", params.tf);
    params.grid_refinement = static_cast<int>(numerics.number("grid_refinement", params.grid_refinement));
    params.transversality_floor =
        numerics.number("transversality_floor", params.transversality_floor);
    check_numerics(params.dt, params.tf, {{"ccc.tau", params.tau}});
    config.params = params;
  } else if (config.scenario == "master_slave") {
    MasterSlaveParams params;
    Reader r(doc, "master_slave");
    params.delta_m = r.number("delta_m", params.delta_m);
    params.delta_s = r.number("delta_s", params.delta_s);
    params.eps_m = r.number("epsilon_m", params.eps_m);
    params.eps_s = r.number("epsilon_s", params.eps_s);
    const std::string law = r.text("delay_law", "constant");
    if (law == "constant") {
      params.delay_law = DelayLaw::kConstant;
    } else if (law == "sinusoidal") {
      params.delay_law = DelayLaw::kSinusoidal;
    } else {
      throw std::invalid_argument("config: master_slave.delay_law: unknown law '" + law + "'");
    }
    params.delay_omega = r.number("delay_omega", params.delay_omega);
    const std::string gate = r.text("warning_gate", "inside");
    if (gate == "inside") {
      params.warning_gate = WarningGate::kInsideWarning;
    } else if (gate == "literal") {
      params.warning_gate = WarningGate::kLiteral;
    } else {
      throw std::invalid_argument("config: master_slave.warning_gate: unknown gate '" + gate + "'");
    }
    if (auto xi = r.vector("xi")) {
      if (xi->size() != 4) throw std::invalid_argument("config: master_slave.xi needs 4 components");
      params.xi = Eigen::Vector4d((*xi)[0], (*xi)[1], (*xi)[2], (*xi)[3]);
    }
    params.gain = read_gain(doc);
    params.dt = numerics.number("dt", params.dt);
    params.tf = numerics.number("tf", params.tf);
    params.grid_refinement = static_cast<int>(numerics.number("grid_refinement", params.grid_refinement));
    params.transversality_floor =
        numerics.number("transversality_floor", params.transversality_floor);
    check_numerics(params.dt, params.tf,
                   {{"master_slave.delta_m", params.delta_m},
                    {"master_slave.delta_s", params.delta_s}});
    config.params = params;
  } else if (config.scenario == "custom") {
    ScenarioConfig::CustomBenchmark bench;
    Reader r(doc, "custom");
    bench.a = r.number("a", bench.a);
    bench.b = r.number("b", bench.b);
    bench.tau = r.number("tau", bench.tau);
    bench.gamma = r.number("gamma", bench.gamma);
    bench.eta = r.number("eta", bench.eta);
    bench.lambda = r.number("lambda", bench.lambda);
    bench.xi = r.number("xi", bench.xi);
    bench.dt = numerics.number("dt", bench.dt);
    bench.tf = numerics.number("tf", bench.tf);
    check_numerics(bench.dt, bench.tf, {{"custom.tau", bench.tau}});
    if (!(bench.eta < bench.gamma)) {
      throw std::invalid_argument("config: custom.eta must be smaller than custom.gamma");
    }
    config.custom = bench;
    config.params = CccParams{};  // unused
  } else {
    throw std::invalid_argument("config: scenario: unknown scenario '" + config.scenario + "'");
  }
  return config;
}

ConfigDoc to_config(const ScenarioConfig& config) {
  ConfigDoc doc;
  doc.set("", "scenario", config.scenario);
  auto write_numerics = [&doc](double dt, double tf, int refinement, double floor) {
    doc.set("numerics", "dt", format_double(dt));
    doc.set("numerics", "tf", format_double(tf));
    doc.set("numerics", "grid_refinement", std::to_string(refinement));
    doc.set("numerics", "transversality_floor", format_double(floor));
  };

  if (config.scenario == "ccc") {
    const auto& p = std::get<CccParams>(config.params);
    doc.set("ccc", "mass", format_double(p.mass));
    doc.set("ccc", "a0", format_double(p.a0));
    doc.set("ccc", "a1", format_double(p.a1));
    doc.set("ccc", "a2", format_double(p.a2));
    doc.set("ccc", "v_desired", format_double(p.v_desired));
    doc.set("ccc", "headway", format_double(p.headway));
    doc.set("ccc", "barrier_weight", format_double(p.barrier_weight));
    doc.set("ccc", "tau", format_double(p.tau));
    std::string levels;
    for (size_t i = 0; i < p.leader_accel.levels.size(); ++i) {
      if (i) levels += ", ";
      levels += format_double(p.leader_accel.levels[i]);
    }
    doc.set("ccc", "leader_accel_levels", levels);
    doc.set("ccc", "leader_accel_period", format_double(p.leader_accel.period));
    doc.set("ccc", "leader_accel_bound", format_double(p.leader_accel.bound));
    doc.set("ccc", "xi", format_vector(p.xi));
    write_gain(doc, p.gain);
    write_numerics(p.dt, p.tf, p.grid_refinement, p.transversality_floor);
  } else if (config.scenario == "master_slave") {
    const auto& p = std::get<MasterSlaveParams>(config.params);
    doc.set("master_slave", "delta_m", format_double(p.delta_m));
    doc.set("master_slave", "delta_s", format_double(p.delta_s));
    doc.set("master_slave", "epsilon_m", format_double(p.eps_m));
    doc.set("master_slave", "epsilon_s", format_double(p.eps_s));
    doc.set("master_slave", "delay_law",
            p.delay_law == DelayLaw::kConstant ? "constant" : "sinusoidal");
    doc.set("master_slave", "delay_omega", format_double(p.delay_omega));
    doc.set("master_slave", "warning_gate",
            p.warning_gate == WarningGate::kInsideWarning ? "inside" : "literal");
    doc.set("master_slave", "xi", format_vector(p.xi));
    write_gain(doc, p.gain);
    write_numerics(p.dt, p.tf, p.grid_refinement, p.transversality_floor);
  } else if (config.scenario == "custom") {
    const auto& b = *config.custom;
    doc.set("custom", "a", format_double(b.a));
    doc.set("custom", "b", format_double(b.b));
    doc.set("custom", "tau", format_double(b.tau));
    doc.set("custom", "gamma", format_double(b.gamma));
    doc.set("custom", "eta", format_double(b.eta));
    doc.set("custom", "lambda", format_double(b.lambda));
    doc.set("custom", "xi", format_double(b.xi));
    doc.set("numerics", "dt", format_double(b.dt));
    doc.set("numerics", "tf", format_double(b.tf));
  }
  doc.set("output", "directory", config.output_directory);
  doc.set("output", "band_lo", format_double(config.metrics_config.band_lo));
  doc.set("output", "band_hi", format_double(config.metrics_config.band_hi));
  doc.set("output", "residence", format_double(config.metrics_config.residence));
  doc.set("output", "chatter_window", format_double(config.metrics_config.chatter_window));
  return doc;
}

ConfigDoc figure_preset(const std::string& fig) {
  ConfigDoc doc;
  if (fig == "1a" || fig == "1b") {
    doc.set("", "scenario", "ccc");
    doc.set("gain", "variant", "sign");
    doc.set("gain", "k", "5");
    doc.set("ccc", "tau", "0.2");
    doc.set("numerics", "tf", "60");
  } else if (fig == "1c" || fig == "1d") {
    doc.set("", "scenario", "ccc");
    doc.set("gain", "variant", "razumikhin");
    doc.set("gain", "k1", "2.2");
    doc.set("gain", "alpha_coeff", "2");
    doc.set("ccc", "tau", "0.2");
    doc.set("numerics", "tf", "60");
  } else if (fig == "2a" || fig == "2b") {
    doc.set("", "scenario", "ccc");
    doc.set("gain", "variant", "sign");
    doc.set("gain", "k", "10");
    doc.set("ccc", "tau", "0.5");
    doc.set("ccc", "leader_accel_levels", "-0.2, 0");
    doc.set("ccc", "leader_accel_period", "1");
    doc.set("ccc", "xi", "18, 22, 50");
    doc.set("numerics", "tf", "100");
    doc.set("output", "band_lo", "21");
    doc.set("output", "band_hi", "22");
  } else if (fig == "2c" || fig == "2d") {
    doc.set("", "scenario", "ccc");
    doc.set("gain", "variant", "razumikhin");
    doc.set("gain", "k1", "2.2");
    doc.set("gain", "alpha_coeff", "2");
    doc.set("ccc", "tau", "0.5");
    doc.set("ccc", "leader_accel_levels", "-0.2, 0");
    doc.set("ccc", "leader_accel_period", "1");
    doc.set("ccc", "xi", "18, 22, 50");
    doc.set("numerics", "tf", "100");
    doc.set("output", "band_lo", "21.6");
    doc.set("output", "band_hi", "22");
  } else if (fig == "3") {
    doc.set("", "scenario", "master_slave");
    doc.set("gain", "variant", "krasovskii");
    doc.set("gain", "k1", "0.025");
  } else {
    throw std::invalid_argument("unknown figure preset '" + fig + "'");
  }
  return doc;
}

void apply_override(ConfigDoc& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("override '" + assignment + "': expected section.key=value");
  }
  const std::string path = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto dot = path.find('.');
  if (dot == std::string::npos) {
    doc.set("", path, value);
  } else {
    doc.set(path.substr(0, dot), path.substr(dot + 1), value);
  }
}

}  // namespace tdsafe
