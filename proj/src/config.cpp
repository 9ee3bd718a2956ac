#include "wavemap/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "wavemap/errors.hpp"

namespace wavemap::config {

namespace {

using Json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw ConfigError("config: " + key + " = '" + value + "': " + why);
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  auto s = trim(v);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) bad(key, v, "not an integer");
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  auto s = trim(v);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) bad(key, v, "not an unsigned integer");
  return x;
}

double to_double(const std::string& key, const std::string& v) {
  auto s = trim(v);
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    bad(key, v, "not a number");
  }
  if (used != s.size() || !std::isfinite(x)) bad(key, v, "not a finite number");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  auto s = trim(v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad(key, v, "not a boolean");
}

struct Range {
  double lo, hi;
};

int int_in(const std::string& key, const std::string& v, Range r) {
  auto x = to_int(key, v);
  if (x < r.lo || x > r.hi) bad(key, v, "out of range");
  return static_cast<int>(x);
}

double double_in(const std::string& key, const std::string& v, Range r, bool open_lo = false) {
  double x = to_double(key, v);
  if (x < r.lo || x > r.hi || (open_lo && x == r.lo)) bad(key, v, "out of range");
  return x;
}

std::string one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
  auto s = trim(v);
  for (const char* a : allowed)
    if (s == a) return s;
  bad(key, v, "not an allowed value");
}

constexpr double kBig = 1e300;

struct Entry {
  const char* key;
  std::function<void(Config&, const std::string&)> set;
  std::function<Json(const Config&)> get;
};

template <class T>
Json list_json(const std::vector<T>& v) {
  Json j = Json::array();
  for (const auto& x : v) j.push_back(x);
  return j;
}

std::vector<int> int_list(const std::string& key, const std::string& v, Range r) {
  std::vector<int> out;
  for (const auto& s : split_list(v)) out.push_back(int_in(key, s, r));
  return out;
}

const std::vector<Entry>& table() {
  static const std::vector<Entry> t = {
      {"n", [](Config& c, const std::string& v) { c.n = int_in("n", v, {2, 5}); }, [](const Config& c) { return Json(c.n); }},
      {"N", [](Config& c, const std::string& v) {
         c.N = int_in("N", v, {4, 256});
         if (!is_power_of_two(c.N)) bad("N", v, "not a power of two");
       }, [](const Config& c) { return Json(c.N); }},
      {"L", [](Config& c, const std::string& v) { c.L = double_in("L", v, {0, kBig}, true); }, [](const Config& c) { return Json(c.L); }},
      {"M", [](Config& c, const std::string& v) { c.M = int_in("M", v, {1, 1 << 20}); }, [](const Config& c) { return Json(c.M); }},
      {"T", [](Config& c, const std::string& v) { c.T = double_in("T", v, {0, kBig}, true); }, [](const Config& c) { return Json(c.T); }},
      {"seed", [](Config& c, const std::string& v) { c.seed = to_u64("seed", v); }, [](const Config& c) { return Json(c.seed); }},
      {"amplitude", [](Config& c, const std::string& v) { c.amplitude = double_in("amplitude", v, {0, 1}); },
       [](const Config& c) { return Json(c.amplitude); }},
      {"radius", [](Config& c, const std::string& v) { c.radius = double_in("radius", v, {0, kBig}, true); },
       [](const Config& c) { return Json(c.radius); }},
      {"tol", [](Config& c, const std::string& v) { c.tol = double_in("tol", v, {0, 1}, true); }, [](const Config& c) { return Json(c.tol); }},
      {"max_iter", [](Config& c, const std::string& v) { c.max_iter = int_in("max_iter", v, {1, 10000}); },
       [](const Config& c) { return Json(c.max_iter); }},
      {"preset", [](Config& c, const std::string& v) { c.preset = one_of("preset", v, {"mwm"}); },
       [](const Config& c) { return Json(c.preset); }},
      {"s_index", [](Config& c, const std::string& v) { c.s_index = int_in("s_index", v, {0, 1}); },
       [](const Config& c) { return Json(c.s_index); }},
      {"connection_tol", [](Config& c, const std::string& v) { c.connection_tol = double_in("connection_tol", v, {0, 1}, true); },
       [](const Config& c) { return Json(c.connection_tol); }},
      {"connection_max_iter", [](Config& c, const std::string& v) { c.connection_max_iter = int_in("connection_max_iter", v, {1, 10000}); },
       [](const Config& c) { return Json(c.connection_max_iter); }},
      {"connection_gate", [](Config& c, const std::string& v) { c.connection_gate = double_in("connection_gate", v, {-kBig, kBig}); },
       [](const Config& c) { return Json(c.connection_gate); }},
      {"deltas", [](Config& c, const std::string& v) {
         c.deltas.clear();
         for (const auto& s : split_list(v)) c.deltas.push_back(double_in("deltas", s, {0, 1}, true));
         if (c.deltas.empty()) bad("deltas", v, "empty list");
       }, [](const Config& c) { return list_json(c.deltas); }},
      {"samples", [](Config& c, const std::string& v) { c.samples = int_in("samples", v, {1, 100000}); },
       [](const Config& c) { return Json(c.samples); }},
      {"snapshots", [](Config& c, const std::string& v) { c.snapshots = to_bool("snapshots", v); },
       [](const Config& c) { return Json(c.snapshots); }},
      {"resolutions", [](Config& c, const std::string& v) {
         c.resolutions = int_list("resolutions", v, {4, 256});
         if (c.resolutions.size() < 2) bad("resolutions", v, "needs at least two resolutions");
         for (int r : c.resolutions)
           if (!is_power_of_two(r)) bad("resolutions", v, "entries must be powers of two");
         if (!std::is_sorted(c.resolutions.begin(), c.resolutions.end())) bad("resolutions", v, "must be increasing");
       }, [](const Config& c) { return list_json(c.resolutions); }},
      {"roundtrip_T", [](Config& c, const std::string& v) { c.roundtrip_T = double_in("roundtrip_T", v, {0, kBig}, true); },
       [](const Config& c) { return Json(c.roundtrip_T); }},
      {"roundtrip_amplitude", [](Config& c, const std::string& v) { c.roundtrip_amplitude = double_in("roundtrip_amplitude", v, {0, 1}); },
       [](const Config& c) { return Json(c.roundtrip_amplitude); }},
      {"estimates", [](Config& c, const std::string& v) {
         c.estimates.clear();
         for (const auto& s : split_list(v)) {
           const auto& ids = lab::estimate_ids();
           if (s != "all" && std::find(ids.begin(), ids.end(), s) == ids.end()) bad("estimates", v, "unknown estimate id");
           c.estimates.push_back(s);
         }
       }, [](const Config& c) { return list_json(c.estimates); }},
      {"lab_samples", [](Config& c, const std::string& v) { c.lab_samples = int_in("lab_samples", v, {1, 100000}); },
       [](const Config& c) { return Json(c.lab_samples); }},
      {"lab_N", [](Config& c, const std::string& v) {
         c.lab_N = int_in("lab_N", v, {4, 256});
         if (!is_power_of_two(c.lab_N)) bad("lab_N", v, "not a power of two");
       }, [](const Config& c) { return Json(c.lab_N); }},
      {"lab_M", [](Config& c, const std::string& v) { c.lab_M = int_in("lab_M", v, {1, 1 << 20}); },
       [](const Config& c) { return Json(c.lab_M); }},
      {"lab_T", [](Config& c, const std::string& v) { c.lab_T = double_in("lab_T", v, {0, kBig}, true); },
       [](const Config& c) { return Json(c.lab_T); }},
      {"shells", [](Config& c, const std::string& v) {
         c.shells = int_list("shells", v, {0, 16});
         if (c.shells.empty()) bad("shells", v, "empty list");
       }, [](const Config& c) { return list_json(c.shells); }},
      {"a_shells", [](Config& c, const std::string& v) { c.a_shells = int_list("a_shells", v, {0, 16}); },
       [](const Config& c) { return list_json(c.a_shells); }},
      {"amplitude_law", [](Config& c, const std::string& v) { c.amplitude_law = one_of("amplitude_law", v, {"critical", "flat"}); },
       [](const Config& c) { return Json(c.amplitude_law); }},
      {"lab_amplitude", [](Config& c, const std::string& v) { c.lab_amplitude = double_in("lab_amplitude", v, {0, kBig}); },
       [](const Config& c) { return Json(c.lab_amplitude); }},
      {"product", [](Config& c, const std::string& v) { c.product = one_of("product", v, {"bracket", "scalar"}); },
       [](const Config& c) { return Json(c.product); }},
      {"shift", [](Config& c, const std::string& v) { c.shift = int_in("shift", v, {0, 16}); },
       [](const Config& c) { return Json(c.shift); }},
      {"case_split", [](Config& c, const std::string& v) { c.case_split = to_bool("case_split", v); },
       [](const Config& c) { return Json(c.case_split); }},
      {"besov_p", [](Config& c, const std::string& v) { c.besov_p = double_in("besov_p", v, {2, kBig}); },
       [](const Config& c) { return Json(c.besov_p); }},
      {"strichartz_j", [](Config& c, const std::string& v) { c.strichartz_j = int_in("strichartz_j", v, {0, 4}); },
       [](const Config& c) { return Json(c.strichartz_j); }},
      {"forcing", [](Config& c, const std::string& v) { c.forcing = double_in("forcing", v, {0, kBig}); },
       [](const Config& c) { return Json(c.forcing); }},
      {"insitu_proxy", [](Config& c, const std::string& v) { c.insitu_proxy = double_in("insitu_proxy", v, {0, 1}, true); },
       [](const Config& c) { return Json(c.insitu_proxy); }},
      {"abelian", [](Config& c, const std::string& v) { c.abelian = to_bool("abelian", v); },
       [](const Config& c) { return Json(c.abelian); }},
      {"check_shift", [](Config& c, const std::string& v) { c.check_shift = to_bool("check_shift", v); },
       [](const Config& c) { return Json(c.check_shift); }},
      {"check_refine", [](Config& c, const std::string& v) { c.check_refine = to_bool("check_refine", v); },
       [](const Config& c) { return Json(c.check_refine); }},
      {"out", [](Config& c, const std::string& v) {
         c.out = trim(v);
         if (c.out.empty()) bad("out", v, "empty path");
       }, [](const Config& c) { return Json(c.out); }},
  };
  return t;
}

const Entry* find(const std::string& key) {
  for (const auto& e : table())
    if (key == e.key) return &e;
  return nullptr;
}

std::string text_value(const Json& j) {
  if (j.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < j.size(); ++i) s += (i ? "," : "") + text_value(j[i]);
    return s;
  }
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_float()) {
    std::ostringstream os;
    os << std::setprecision(17) << j.get<double>();
    return os.str();
  }
  return j.dump();
}

}  // namespace

const std::vector<std::string>& keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& e : table()) out.emplace_back(e.key);
    return out;
  }();
  return k;
}

void set(Config& c, const std::string& key, const std::string& value) {
  const Entry* e = find(trim(key));
  if (!e) throw ConfigError("config: unknown key '" + trim(key) + "'");
  e->set(c, value);
}

Config parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + ": expected 'key = value'");
    auto key = trim(line.substr(0, eq));
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw ConfigError("config: line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    seen.push_back(key);
    set(c, key, line.substr(eq + 1));
  }
  validate(c);
  return c;
}

Config load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

void validate(const Config& c) {
  c.grid().validate();
  c.lab_grid().validate();
  const int kmax = c.lab_grid().k_max();
  for (const auto* list : {&c.shells, &c.a_shells})
    for (int k : *list)
      if (k + c.shift > kmax) throw ConfigError("config: shell " + std::to_string(k) + " (shifted) lies above the lab grid's top shell");
  if (c.besov_p >= 2.0 * c.n) throw ConfigError("config: besov_p must be below 2n");
}

Grid Config::grid() const { return Grid{n, N, L, M, T}; }

Grid Config::lab_grid() const { return Grid{n, lab_N, L, lab_M, lab_T}; }

mwm::PicardOptions Config::picard() const {
  mwm::PicardOptions o;
  o.tol = tol;
  o.max_iter = max_iter;
  o.preset = preset;
  o.s_index = s_index;
  o.connection.tol = connection_tol;
  o.connection.max_iter = connection_max_iter;
  o.connection.gate = connection_gate;
  return o;
}

lab::EnsembleSpec Config::ensemble() const {
  lab::EnsembleSpec s;
  s.seed = seed;
  s.samples = lab_samples;
  s.shells = shells;
  s.a_shells = a_shells;
  s.amplitude_law = amplitude_law;
  s.amplitude = lab_amplitude;
  s.grid = lab_grid();
  s.product = product;
  s.shift = shift;
  s.case_split = case_split;
  s.forcing = forcing;
  s.strichartz_j = strichartz_j;
  s.besov_p = besov_p;
  s.insitu_proxy = insitu_proxy;
  s.abelian = abelian;
  s.connection.tol = connection_tol;
  s.connection.max_iter = connection_max_iter;
  s.connection.gate = connection_gate;
  return s;
}

gauge::RoundTripConfig Config::roundtrip(int resolution) const {
  gauge::RoundTripConfig r;
  // dt = dx / 2
  const int steps = static_cast<int>(std::ceil(2.0 * roundtrip_T * resolution / L - 1e-9));
  r.grid = Grid{n, resolution, L, std::max(1, steps), roundtrip_T};
  r.amplitude = roundtrip_amplitude;
  r.seed = seed;
  r.picard = picard();
  return r;
}

std::string Config::to_json() const {
  Json j = Json::object();
  for (const auto& e : table()) j[e.key] = e.get(*this);
  return j.dump(2);
}

std::string Config::to_text() const {
  std::ostringstream os;
  for (const auto& e : table()) os << e.key << " = " << text_value(e.get(*this)) << '\n';
  return os.str();
}

}  // namespace wavemap::config
