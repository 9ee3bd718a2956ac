#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavemap/fields.hpp"
#include "wavemap/gauge_return.hpp"
#include "wavemap/lab.hpp"
#include "wavemap/mwm.hpp"

namespace wavemap::config {

// Flat `key = value` configuration. Lines may carry `#` comments; lists are
// comma separated. Unknown keys and out-of-range values raise ConfigError at
// parse time.
struct Config {
  // grid
  int n = 4;
  int N = 16;
  double L = 1.0;
  int M = 32;
  double T = 1.0;

  std::uint64_t seed = 7;
  double amplitude = 1e-2;
  double radius = 2.0;

  // Picard iteration
  double tol = 1e-9;
  int max_iter = 30;
  std::string preset = "mwm";
  int s_index = 0;
  double connection_tol = 1e-12;
  int connection_max_iter = 60;
  double connection_gate = 0.1;

  // mwm stability / regularity
  std::vector<double> deltas{1e-3, 1e-4, 1e-5};
  int samples = 10;
  bool snapshots = false;

  // gauge round trip: spatial resolutions, time step dx / 2
  std::vector<int> resolutions{8, 16};
  double roundtrip_T = 0.5;
  double roundtrip_amplitude = 0.02;

  // lab
  std::vector<std::string> estimates{};
  int lab_samples = 100;
  int lab_N = 16;
  int lab_M = 2;
  double lab_T = 0.25;
  std::vector<int> shells{0};
  std::vector<int> a_shells{};
  std::string amplitude_law = "critical";
  double lab_amplitude = 1.0;
  std::string product = "bracket";
  int shift = 0;
  bool case_split = false;
  double besov_p = 4.0;
  int strichartz_j = 1;
  double forcing = 1.0;
  double insitu_proxy = 0.05;
  bool abelian = false;
  bool check_shift = false;
  bool check_refine = false;

  std::string out = "out";

  Grid grid() const;
  Grid lab_grid() const;
  mwm::PicardOptions picard() const;
  lab::EnsembleSpec ensemble() const;
  gauge::RoundTripConfig roundtrip(int resolution) const;

  // Resolved configuration as a JSON object (every key, parsed values).
  std::string to_json() const;
  // Same content in `key = value` form, parseable by parse().
  std::string to_text() const;
};

Config parse(const std::string& text);
Config load(const std::string& path);
// Applies one `key = value` assignment with the same checks as parse().
void set(Config& c, const std::string& key, const std::string& value);
// Cross-key checks (grid validity, shells within the ladder).
void validate(const Config& c);

const std::vector<std::string>& keys();

}  // namespace wavemap::config
