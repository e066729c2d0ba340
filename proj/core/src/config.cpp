#include "snls/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "snls/error.hpp"

namespace snls {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Drops a trailing comment that is not inside a string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error(Errc::parse_error, "line " + std::to_string(line) + ": " + msg);
}

struct Value {
  std::string raw;
  int line = 0;

  double as_double() const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(raw, &pos);
      if (pos != raw.size()) fail(line, "trailing characters in number '" + raw + "'");
      return v;
    } catch (const std::logic_error&) {
      fail(line, "expected a number, got '" + raw + "'");
    }
  }
  long long as_int() const {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(raw, &pos);
      if (pos != raw.size()) fail(line, "expected an integer, got '" + raw + "'");
      return v;
    } catch (const std::logic_error&) {
      fail(line, "expected an integer, got '" + raw + "'");
    }
  }
  std::uint64_t as_uint() const {
    if (!raw.empty() && raw[0] == '-') fail(line, "expected a non-negative integer");
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(raw, &pos);
      if (pos != raw.size()) fail(line, "expected an integer, got '" + raw + "'");
      return v;
    } catch (const std::logic_error&) {
      fail(line, "expected an integer, got '" + raw + "'");
    }
  }
  bool as_bool() const {
    if (raw == "true") return true;
    if (raw == "false") return false;
    fail(line, "expected true or false, got '" + raw + "'");
  }
  std::string as_string() const {
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
      fail(line, "expected a quoted string, got '" + raw + "'");
    }
    return raw.substr(1, raw.size() - 2);
  }
  std::vector<double> as_array() const {
    if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') {
      fail(line, "expected an array, got '" + raw + "'");
    }
    std::vector<double> out;
    std::stringstream ss(raw.substr(1, raw.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(Value{item, line}.as_double());
    }
    return out;
  }
};

InitialPreset parse_preset(const Value& v) {
  const std::string s = v.as_string();
  if (s == "ansatz") return InitialPreset::ansatz;
  if (s == "soliton-oracle") return InitialPreset::soliton_oracle;
  if (s == "pseudo-conformal-oracle") return InitialPreset::pseudo_conformal_oracle;
  if (s == "zero") return InitialPreset::zero;
  fail(v.line, "unknown preset '" + s + "'");
}

EpsRecipe parse_recipe(const Value& v) {
  const std::string s = v.as_string();
  if (s == "zero") return EpsRecipe::zero;
  if (s == "q-multiple") return EpsRecipe::q_multiple;
  if (s == "gaussian") return EpsRecipe::gaussian;
  fail(v.line, "unknown eps recipe '" + s + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_array(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s + "]";
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(Errc::validation_error, msg); }

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

PhiFamily NoiseConfig::family(int dim) const {
  PhiFamily f;
  f.dim = dim;
  for (Bump b : bumps) {
    b.amplitude *= amplitude;
    f.bumps.push_back(b);
  }
  return f;
}

Grid SimConfig::make_grid() const { return snls::make_grid(grid.dim, grid.half_width, grid.n); }

std::string to_string(InitialPreset p) {
  switch (p) {
    case InitialPreset::ansatz: return "ansatz";
    case InitialPreset::soliton_oracle: return "soliton-oracle";
    case InitialPreset::pseudo_conformal_oracle: return "pseudo-conformal-oracle";
    case InitialPreset::zero: return "zero";
  }
  return "unknown";
}

std::string to_string(EpsRecipe r) {
  switch (r) {
    case EpsRecipe::zero: return "zero";
    case EpsRecipe::q_multiple: return "q-multiple";
    case EpsRecipe::gaussian: return "gaussian";
  }
  return "unknown";
}

void validate(const SimConfig& c) {
  if (c.grid.dim != 1 && c.grid.dim != 2) invalid("grid.dim must be 1 or 2");
  if (c.grid.n < 16 || !is_pow2(c.grid.n)) invalid("grid.n must be a power of two >= 16");
  if (!(c.grid.half_width > 0.0)) invalid("grid.half_width must be positive");
  if (!(c.time.dt0 > 0.0)) invalid("time.dt0 must be positive");
  if (!(c.time.horizon > 0.0)) invalid("time.horizon must be positive");
  if (c.time.sample_every < 1) invalid("time.sample_every must be at least 1");
  if (!(c.time.base_dt > 0.0)) invalid("time.base_dt must be positive");
  if (!(c.noise.amplitude >= 0.0)) invalid("noise.amplitude must be non-negative");
  if (!(c.noise.path_bound >= 0.0)) invalid("noise.path_bound must be non-negative");
  for (const auto& b : c.noise.bumps) {
    if (!(b.sigma > 0.0)) invalid("noise.sigmas must be positive");
  }
  const auto& ini = c.initial;
  if (ini.preset == InitialPreset::ansatz) {
    if (!(ini.lambda0 > 0.0)) invalid("initial.lambda0 must be positive");
    if (!(ini.b0 > 0.0)) invalid("initial.b0 must be positive");
  }
  if (ini.preset == InitialPreset::pseudo_conformal_oracle && !(c.time.t_start < 0.0)) {
    invalid("time.t_start must be negative for the pseudo-conformal preset");
  }
  const auto& th = c.thresholds;
  if (!(th.alpha > 0.0)) invalid("thresholds.alpha must be positive");
  if (!(th.h1_blowup > 0.0)) invalid("thresholds.h1_blowup must be positive");
  if (!(th.lambda_floor > 0.0 && th.lambda_floor <= 1.0)) {
    invalid("thresholds.lambda_floor must lie in (0, 1]");
  }
  if (th.max_refinements < 0) invalid("thresholds.max_refinements must be non-negative");
  if (!(th.margin > 0.0)) invalid("thresholds.margin must be positive");
  if (c.ensemble.n_paths < 0) invalid("ensemble.n_paths must be non-negative");
  if (c.ensemble.workers < 1) invalid("ensemble.workers must be at least 1");
  if (!(c.fit.lambda_lo > 0.0 && c.fit.lambda_lo < c.fit.lambda_hi)) {
    invalid("fit window needs 0 < lambda_lo < lambda_hi");
  }
}

SimConfig parse_config_text(const std::string& text) {
  SimConfig c;
  std::vector<double> amplitudes, centers, sigmas, x0;
  bool have_amp = false, have_centers = false, have_sigmas = false, have_x0 = false;

  using Setter = std::function<void(const Value&)>;
  const std::map<std::string, Setter> keys = {
      {"grid.dim", [&](const Value& v) { c.grid.dim = static_cast<int>(v.as_int()); }},
      {"grid.half_width", [&](const Value& v) { c.grid.half_width = v.as_double(); }},
      {"grid.n", [&](const Value& v) { c.grid.n = static_cast<int>(v.as_int()); }},
      {"time.dt0", [&](const Value& v) { c.time.dt0 = v.as_double(); }},
      {"time.horizon", [&](const Value& v) { c.time.horizon = v.as_double(); }},
      {"time.t_start", [&](const Value& v) { c.time.t_start = v.as_double(); }},
      {"time.sample_every", [&](const Value& v) { c.time.sample_every = static_cast<int>(v.as_int()); }},
      {"time.base_dt", [&](const Value& v) { c.time.base_dt = v.as_double(); }},
      {"noise.amplitude", [&](const Value& v) { c.noise.amplitude = v.as_double(); }},
      {"noise.path_bound", [&](const Value& v) { c.noise.path_bound = v.as_double(); }},
      {"noise.amplitudes", [&](const Value& v) { amplitudes = v.as_array(); have_amp = true; }},
      {"noise.centers", [&](const Value& v) { centers = v.as_array(); have_centers = true; }},
      {"noise.sigmas", [&](const Value& v) { sigmas = v.as_array(); have_sigmas = true; }},
      {"initial.preset", [&](const Value& v) { c.initial.preset = parse_preset(v); }},
      {"initial.lambda0", [&](const Value& v) { c.initial.lambda0 = v.as_double(); }},
      {"initial.b0", [&](const Value& v) { c.initial.b0 = v.as_double(); }},
      {"initial.eps", [&](const Value& v) { c.initial.eps = parse_recipe(v); }},
      {"initial.eps_amplitude", [&](const Value& v) { c.initial.eps_amplitude = v.as_double(); }},
      {"initial.x0", [&](const Value& v) { x0 = v.as_array(); have_x0 = true; }},
      {"initial.gamma0", [&](const Value& v) { c.initial.gamma0 = v.as_double(); }},
      {"initial.mass_scale", [&](const Value& v) { c.initial.mass_scale = v.as_double(); }},
      {"thresholds.alpha", [&](const Value& v) { c.thresholds.alpha = v.as_double(); }},
      {"thresholds.h1_blowup", [&](const Value& v) { c.thresholds.h1_blowup = v.as_double(); }},
      {"thresholds.lambda_floor", [&](const Value& v) { c.thresholds.lambda_floor = v.as_double(); }},
      {"thresholds.max_refinements",
       [&](const Value& v) { c.thresholds.max_refinements = static_cast<int>(v.as_int()); }},
      {"thresholds.margin", [&](const Value& v) { c.thresholds.margin = v.as_double(); }},
      {"ensemble.n_paths", [&](const Value& v) { c.ensemble.n_paths = static_cast<int>(v.as_int()); }},
      {"ensemble.base_seed", [&](const Value& v) { c.ensemble.base_seed = v.as_uint(); }},
      {"ensemble.workers", [&](const Value& v) { c.ensemble.workers = static_cast<int>(v.as_int()); }},
      {"output.directory", [&](const Value& v) { c.output.directory = v.as_string(); }},
      {"output.trajectories", [&](const Value& v) { c.output.trajectories = v.as_bool(); }},
      {"output.brownian", [&](const Value& v) { c.output.brownian = v.as_bool(); }},
      {"fit.lambda_hi", [&](const Value& v) { c.fit.lambda_hi = v.as_double(); }},
      {"fit.lambda_lo", [&](const Value& v) { c.fit.lambda_lo = v.as_double(); }},
  };

  std::istringstream in(text);
  std::string line;
  std::string section;
  std::map<std::string, int> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      static const char* known[] = {"grid", "time", "noise", "initial",
                                    "thresholds", "ensemble", "output", "fit"};
      if (std::find(std::begin(known), std::end(known), section) == std::end(known)) {
        fail(lineno, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected key = value");
    if (section.empty()) fail(lineno, "key outside of a section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const auto it = keys.find(key);
    if (it == keys.end()) fail(lineno, "unknown key '" + key + "'");
    if (seen.count(key)) fail(lineno, "duplicate key '" + key + "'");
    seen[key] = lineno;
    it->second(Value{trim(line.substr(eq + 1)), lineno});
  }

  const int dim = c.grid.dim;
  if (have_amp || have_centers || have_sigmas) {
    if (!(have_amp && have_centers && have_sigmas)) {
      invalid("noise.amplitudes, noise.centers and noise.sigmas must be given together");
    }
    if (dim != 1 && dim != 2) invalid("grid.dim must be 1 or 2");
    const std::size_t k = amplitudes.size();
    if (sigmas.size() != k || centers.size() != k * static_cast<std::size_t>(dim)) {
      invalid("noise arrays disagree: need K amplitudes, K sigmas and d*K centers");
    }
    for (std::size_t i = 0; i < k; ++i) {
      Bump b;
      b.amplitude = amplitudes[i];
      b.sigma = sigmas[i];
      for (int a = 0; a < dim; ++a) b.center[a] = centers[i * static_cast<std::size_t>(dim) + a];
      c.noise.bumps.push_back(b);
    }
  }
  if (have_x0) {
    if (x0.size() != static_cast<std::size_t>(dim)) invalid("initial.x0 needs d entries");
    for (int a = 0; a < dim; ++a) c.initial.x0[a] = x0[static_cast<std::size_t>(a)];
  }
  validate(c);
  return c;
}

SimConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const SimConfig& c) {
  std::ostringstream o;
  const int dim = c.grid.dim;
  o << "[grid]\n"
    << "dim = " << dim << "\n"
    << "half_width = " << fmt(c.grid.half_width) << "\n"
    << "n = " << c.grid.n << "\n\n";
  o << "[time]\n"
    << "dt0 = " << fmt(c.time.dt0) << "\n"
    << "horizon = " << fmt(c.time.horizon) << "\n"
    << "t_start = " << fmt(c.time.t_start) << "\n"
    << "sample_every = " << c.time.sample_every << "\n"
    << "base_dt = " << fmt(c.time.base_dt) << "\n\n";
  o << "[noise]\n"
    << "amplitude = " << fmt(c.noise.amplitude) << "\n"
    << "path_bound = " << fmt(c.noise.path_bound) << "\n";
  if (!c.noise.bumps.empty()) {
    std::vector<double> a, ce, s;
    for (const auto& b : c.noise.bumps) {
      a.push_back(b.amplitude);
      s.push_back(b.sigma);
      for (int k = 0; k < dim; ++k) ce.push_back(b.center[k]);
    }
    o << "amplitudes = " << fmt_array(a) << "\n"
      << "centers = " << fmt_array(ce) << "\n"
      << "sigmas = " << fmt_array(s) << "\n";
  }
  o << "\n[initial]\n"
    << "preset = \"" << to_string(c.initial.preset) << "\"\n"
    << "lambda0 = " << fmt(c.initial.lambda0) << "\n"
    << "b0 = " << fmt(c.initial.b0) << "\n"
    << "eps = \"" << to_string(c.initial.eps) << "\"\n"
    << "eps_amplitude = " << fmt(c.initial.eps_amplitude) << "\n"
    << "x0 = "
    << fmt_array(dim == 1 ? std::vector<double>{c.initial.x0[0]}
                          : std::vector<double>{c.initial.x0[0], c.initial.x0[1]})
    << "\n"
    << "gamma0 = " << fmt(c.initial.gamma0) << "\n"
    << "mass_scale = " << fmt(c.initial.mass_scale) << "\n\n";
  o << "[thresholds]\n"
    << "alpha = " << fmt(c.thresholds.alpha) << "\n"
    << "h1_blowup = " << fmt(c.thresholds.h1_blowup) << "\n"
    << "lambda_floor = " << fmt(c.thresholds.lambda_floor) << "\n"
    << "max_refinements = " << c.thresholds.max_refinements << "\n"
    << "margin = " << fmt(c.thresholds.margin) << "\n\n";
  o << "[ensemble]\n"
    << "n_paths = " << c.ensemble.n_paths << "\n"
    << "base_seed = " << c.ensemble.base_seed << "\n"
    << "workers = " << c.ensemble.workers << "\n\n";
  o << "[output]\n"
    << "directory = \"" << c.output.directory << "\"\n"
    << "trajectories = " << (c.output.trajectories ? "true" : "false") << "\n"
    << "brownian = " << (c.output.brownian ? "true" : "false") << "\n\n";
  o << "[fit]\n"
    << "lambda_hi = " << fmt(c.fit.lambda_hi) << "\n"
    << "lambda_lo = " << fmt(c.fit.lambda_lo) << "\n";
  return o.str();
}

}  // namespace snls
