#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "thermolux/cli.hpp"

using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = thermolux::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json run_json(std::vector<std::string> args) {
  const Run r = run(std::move(args));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  return json::parse(r.out);
}

double value(const json& doc, const std::string& key) { return doc.at("results").at(key).at("value").get<double>(); }

// RFC 4180 reader for the two-row CSV output.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows(1);
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      rows.back().push_back(cell);
      cell.clear();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      rows.back().push_back(cell);
      cell.clear();
      rows.emplace_back();
      ++i;
    } else {
      cell += c;
    }
  }
  if (rows.back().empty()) rows.pop_back();
  return rows;
}

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run({"capacity", "--xm", "0.5"}).code == 0);
  CHECK(run({"capacity", "--xm", "0"}).code == 2);
  CHECK(run({"capacity", "--xm", "1"}).code == 2);
  CHECK(run({"capacity", "--xm", "-0.2"}).code == 2);
  CHECK(run({"capacity", "--xm", "abc"}).code == 64);
  CHECK(run({"capacity"}).code == 64);
  CHECK(run({"capacity", "--xm", "0.5", "--bogus"}).code == 64);
  CHECK(run({"capacity", "--xm", "0.5", "--format", "xml"}).code == 64);
  CHECK(run({}).code == 64);
  CHECK(run({"frobnicate"}).code == 64);
  CHECK(run({"simulate", "--xm", "0.5", "--samples", "0"}).code == 64);
  CHECK(run({"radiometry", "--area", "-1"}).code == 2);
  CHECK(run({"radiometry", "--model", "laser:5"}).code == 2);
  CHECK(run({"radiometry", "--model", "flat:1e-19"}).code == 2);  // unbounded band
  CHECK(run({"radiometry", "--nu-hi", "many"}).code == 2);

  const Run bracket = run({"threshold", "--lo", "0.5", "--hi", "0.6"});
  CHECK(bracket.code == 2);
  CHECK(bracket.err.find("bracket") != std::string::npos);
}

TEST_CASE("help lists defaults") {
  const Run top = run({"--help"});
  CHECK(top.code == 0);
  CHECK(top.out.find("capacity") != std::string::npos);
  const Run sub = run({"capacity", "--help"});
  CHECK(sub.code == 0);
  CHECK(sub.out.find("--grid") != std::string::npos);
  CHECK(sub.out.find("2001") != std::string::npos);
  CHECK(sub.out.find("1e-09") != std::string::npos);
}

TEST_CASE("capacity envelope") {
  const Run r = run({"capacity", "--xm", "0.5"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);

  CHECK(doc["command"] == "capacity");
  CHECK(doc["inputs"]["xm"] == 0.5);
  CHECK(doc["inputs"]["grid"] == 2001);
  CHECK(doc["inputs"]["tol"] == 1e-9);
  CHECK(value(doc, "closed_form_nats") == doctest::Approx(std::log(1.25)).epsilon(1e-14));
  CHECK(std::abs(value(doc, "solver_nats") - value(doc, "closed_form_nats")) <= 1e-6);
  CHECK(doc["results"]["two_point_kkt_optimal"]["value"] == true);
  CHECK(doc["results"]["support_levels"]["value"].size() == 2);
  CHECK(doc["provenance"]["library_version"] == THERMOLUX_VERSION);
  for (const auto& [key, entry] : doc["results"].items()) {
    CAPTURE(key);
    CHECK(entry.at("unit").get<std::string>().size() > 0);
  }

  // Sorted keys, two-space indent, LF only; parse then serialize is the identity.
  CHECK(r.out.find('\r') == std::string::npos);
  CHECK(doc.dump(2) + "\n" == r.out);

  const json at09 = run_json({"capacity", "--xm", "0.9"});
  CHECK(value(at09, "closed_form_nats") == doctest::Approx(0.5287661150761673).epsilon(1e-14));
  CHECK(at09["results"]["two_point_kkt_optimal"]["value"] == false);
  CHECK(!at09["warnings"].empty());
}

TEST_CASE("csv output") {
  const Run r = run({"capacity", "--xm", "0.5", "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.size() >= 2);
  CHECK(r.out.substr(r.out.size() - 2) == "\r\n");
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].size() == rows[1].size());

  // Every numeric cell equals the JSON value at full precision.
  const json doc = run_json({"capacity", "--xm", "0.5"});
  std::size_t compared = 0;
  for (std::size_t i = 0; i < rows[0].size(); ++i) {
    const std::string& head = rows[0][i];
    const auto bracket = head.find('[');
    REQUIRE(bracket != std::string::npos);
    CHECK(head.back() == ']');
    std::string name = head.substr(0, bracket);
    json v;
    if (doc["results"].contains(name)) {
      v = doc["results"][name]["value"];
    } else {
      const auto cut = name.rfind('_');
      v = doc["results"][name.substr(0, cut)]["value"][std::stoul(name.substr(cut + 1))];
    }
    if (v.is_number()) {
      CHECK(std::stod(rows[1][i]) == v.get<double>());
      ++compared;
    }
  }
  CHECK(compared >= 10);

  // Quoting of embedded commas.
  const Run sim = run({"simulate", "--xm", "0.5", "--samples", "1000", "--format", "csv"});
  REQUIRE(sim.code == 0);
  CHECK(parse_csv(sim.out).size() == 2);
}

TEST_CASE("constants") {
  const Run a = run({"constants"});
  const Run b = run({"constants"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const json doc = json::parse(a.out);
  CHECK(std::abs(value(doc, "sigma") - 0.772) <= 0.002);
  CHECK(std::abs(value(doc, "eta") - 0.909) <= 0.002);
  CHECK(std::abs(value(doc, "nats_per_photon") - 0.849) <= 0.002);
  CHECK(std::abs(value(doc, "bits_per_photon") - 1.225) <= 0.003);
  CHECK(doc["provenance"]["notes"].contains("integrand_forms"));

  const json fresh = run_json({"constants", "--recompute"});
  CHECK(value(fresh, "sigma") == value(doc, "sigma"));
  CHECK(fresh["inputs"]["recompute"] == true);
}

TEST_CASE("radiometry") {
  const json full = run_json({"radiometry", "--model", "planck:6000"});
  CHECK(std::abs(value(full, "info_per_photon") - 0.849) <= 0.002);
  CHECK(full["results"].contains("max_rate"));
  CHECK(value(full, "max_rate") == doctest::Approx(value(full, "max_rate_from_flux")).epsilon(1e-10));
  CHECK(value(full, "total_info") == doctest::Approx(value(full, "total_info_closed_form")).epsilon(1e-8));

  const json twice = run_json({"radiometry", "--model", "planck:6000", "--tau", "2"});
  CHECK(value(twice, "total_info") == doctest::Approx(2.0 * value(full, "total_info")).epsilon(1e-15));

  const json half_sky = run_json({"radiometry", "--model", "planck:6000", "--solid-angle", "1"});
  CHECK_FALSE(half_sky["results"].contains("max_rate"));

  // h nu at 5e14 Hz is 3.3e-19 J; 1e-17 J puts r P / h nu near 30.
  const json bright =
      run_json({"radiometry", "--model", "flat:1e-17", "--nu-lo", "4e14", "--nu-hi", "6e14", "--solid-angle", "0.1"});
  bool regime = false;
  for (const auto& w : bright["warnings"]) regime = regime || w.get<std::string>().find("> 9") != std::string::npos;
  CHECK(regime);
  CHECK(bright["results"].contains("modes_total"));

  const json dim =
      run_json({"radiometry", "--model", "flat:1e-20", "--nu-lo", "4e14", "--nu-hi", "6e14", "--solid-angle", "0.1"});
  CHECK(dim["warnings"].empty());
}

TEST_CASE("threshold") {
  const json t = run_json({"threshold"});
  const double x = value(t, "crossover_level");
  CHECK(x >= 0.88);
  CHECK(x <= 0.92);
  CHECK(value(t, "crossover_mean_occupation") == doctest::Approx(x / (1.0 - x)).epsilon(1e-12));

  const json fine = run_json({"threshold", "--resolution", "1e-5"});
  CHECK(value(fine, "bracket_lo") >= value(t, "bracket_lo"));
  CHECK(value(fine, "bracket_hi") <= value(t, "bracket_hi"));
}

TEST_CASE("simulate") {
  const Run a = run({"simulate", "--xm", "0.9", "--samples", "1000000", "--seed", "17"});
  const Run b = run({"simulate", "--xm", "0.9", "--samples", "1000000", "--seed", "17"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const json doc = json::parse(a.out);
  CHECK(std::abs(value(doc, "empirical_mi") - value(doc, "analytic_mi")) <= 3.0 * value(doc, "mi_standard_error"));
  std::uint64_t total = 0;
  for (const auto& cell : doc["results"]["count_histogram"]["value"]) total += cell["count"].get<std::uint64_t>();
  CHECK(total == 1000000);

  const json pp = run_json({"simulate", "--xm", "0.5", "--samples", "10", "--oscillators", "20000"});
  CHECK(std::abs(value(pp, "per_photon_empirical") - value(pp, "per_photon_analytic")) <=
        4.0 * value(pp, "per_photon_standard_error"));

  // Worker cap does not change the output.
  ::setenv("THERMOLUX_THREADS", "1", 1);
  const Run single = run({"simulate", "--xm", "0.9", "--samples", "1000000", "--seed", "17"});
  ::unsetenv("THERMOLUX_THREADS");
  CHECK(single.out == a.out);
}

TEST_CASE("config files") {
  const auto cfg = write_temp("thermolux_test.cfg", "# capacity run\nxm = 0.5\ngrid=1001   # coarse\n\nformat=json\n");
  const json doc = run_json({"capacity", "--config", cfg.string()});
  CHECK(doc["inputs"]["xm"] == 0.5);
  CHECK(doc["inputs"]["grid"] == 1001);

  const json overridden = run_json({"capacity", "--config=" + cfg.string(), "--grid", "501"});
  CHECK(overridden["inputs"]["grid"] == 501);

  CHECK(run({"capacity", "--config", "/nonexistent/thermolux.cfg"}).code == 64);
  const auto bad = write_temp("thermolux_bad.cfg", "xm 0.5\n");
  CHECK(run({"capacity", "--config", bad.string()}).code == 64);
  const auto unknown = write_temp("thermolux_unknown.cfg", "xm=0.5\nwidth=3\n");
  CHECK(run({"capacity", "--config", unknown.string()}).code == 64);
  std::filesystem::remove(cfg);
  std::filesystem::remove(bad);
  std::filesystem::remove(unknown);
}
