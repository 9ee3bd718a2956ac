#include "wavemap/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "wavemap/errors.hpp"
#include "wavemap/lp.hpp"
#include "wavemap/norms.hpp"

namespace wavemap::report {

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("report: cannot create directory '" + dir + "': " + ec.message());
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("report: cannot open '" + tmp + "' for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) throw ConfigError("report: write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw ConfigError("report: cannot rename into '" + path + "': " + ec.message());
  }
}

std::string families_json(int n, int N) {
  using nlohmann::ordered_json;
  Grid g{n, N, 1.0, 1, 1.0};
  auto ladder = lp::DyadicLadder::for_grid(g);
  ordered_json j;
  j["ladder"] = {{"k_min", ladder.k_min}, {"k_max", ladder.k_max}, {"blocks", ladder.blocks()}};
  ordered_json fams = ordered_json::object();
  for (auto v : {norms::PairVariant::admissible, norms::PairVariant::good_product, norms::PairVariant::good_product_time}) {
    ordered_json pairs = ordered_json::array();
    for (const auto& p : norms::enumerate_pairs(n, v).pairs) {
      // infinity is written as the string "inf"
      auto enc = [](double x) { return std::isinf(x) ? ordered_json("inf") : ordered_json(x); };
      pairs.push_back({enc(p.q), enc(p.r)});
    }
    fams[norms::variant_name(v)] = pairs;
  }
  j["pair_families"] = fams;
  return j.dump(2);
}

}  // namespace wavemap::report
