// Command-line front end: one subcommand per experiment, a flat key=value
// config file with flag overrides, CSV + plot-script output, deterministic
// at fixed config and seed for any worker count.
//
// Exit codes: 0 all checks passed, 1 tolerance failure, 2 configuration error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ballavg/experiments.hpp"

namespace {

using ballavg::experiments::ExperimentReport;
using OptMap = std::map<std::string, std::string>;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kSubcommands = {
    "kernel-check", "l2-identity", "norm-sweep", "sharpness",
    "second-order", "lp-decay",    "reverse-probe"};

OptMap defaults_for(const std::string& sub) {
  OptMap m{{"workers", "1"}, {"out_dir", "."}, {"seed", "20250601"}};
  if (sub == "kernel-check") {
    m["dim"] = "1";
  } else if (sub == "l2-identity") {
    m["dim"] = "1";
    m["alpha"] = "0.5";
    m["grid_N"] = "65536";
    m["grid_L"] = "32";
    m["nodes_per_octave"] = "8";
    m["t_max"] = "2048";
    m["tol"] = "0.01";
  } else if (sub == "norm-sweep") {
    m["dim"] = "1";
    m["family"] = "fractional";
    m["alpha"] = "0.5";
    m["p"] = "2";
    m["lambda"] = "2";
    m["grid_N"] = "16384";
    m["grid_L"] = "32";
    m["nodes_per_octave"] = "8";
    m["band_factor"] = "10";
  } else if (sub == "sharpness") {
    m["dim"] = "1";
    m["family"] = "fractional";
    m["alpha"] = "0.25";
    m["grid_N"] = "1048576";
    m["grid_L"] = "32";
    m["j_list"] = "auto";
    m["p_list"] = "1.05,1.2,1.4,1.6,1.9";
    m["t_min"] = "1";
    m["t_max"] = "auto";
    m["nodes_per_octave"] = "8";
    m["steepness"] = "1";
  } else if (sub == "second-order") {
    m["dim"] = "1";
    m["grid_N"] = "8192";
    m["grid_L"] = "8";
    m["width"] = "1";
    m["t_max"] = "2";
    m["tmin_sweep"] = "6";
    m["c_bad"] = "1";
    m["nodes_per_octave"] = "8";
  } else if (sub == "lp-decay") {
    m["dim"] = "1";
    m["family"] = "fractional";
    m["alpha"] = "0.5";
    m["p"] = "2";
    m["grid_N"] = "262144";
    m["grid_L"] = "32";
    m["j_list"] = "-6..6";
    m["trials"] = "10";
    m["band_lo"] = "8";
    m["band_hi"] = "16";
    m["nodes_per_octave"] = "8";
    m["slope_tol"] = "0.2";
  } else if (sub == "reverse-probe") {
    m["dim"] = "1";
    m["alpha"] = "0.5";
    m["p"] = "2";
    m["grid_N"] = "16384";
    m["grid_L"] = "32";
    m["nodes_per_octave"] = "8";
  }
  return m;
}

void load_config_file(OptMap& opts, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == '\t'))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " is not key=value");
    std::string key = line.substr(0, eq);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    std::string val = line.substr(eq + 1);
    std::size_t vs = val.find_first_not_of(" \t");
    val = vs == std::string::npos ? "" : val.substr(vs);
    if (!opts.count(key)) throw ConfigError("config: unknown key '" + key + "'");
    opts[key] = val;
  }
}

double num(const OptMap& o, const std::string& key) {
  const std::string& s = o.at(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (...) {
    throw ConfigError("config: key '" + key + "' has non-numeric value '" + s + "'");
  }
}

long integer(const OptMap& o, const std::string& key) {
  const double v = num(o, key);
  const long l = static_cast<long>(v);
  if (static_cast<double>(l) != v)
    throw ConfigError("config: key '" + key + "' must be an integer");
  return l;
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw ConfigError("config: key '" + key + "' has a non-numeric entry '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("config: key '" + key + "' is empty");
  return out;
}

// "a..b" inclusive integer range, or comma list
std::vector<int> parse_j_list(const std::string& s) {
  std::vector<int> out;
  if (auto dots = s.find(".."); dots != std::string::npos) {
    const int a = std::stoi(s.substr(0, dots));
    const int b = std::stoi(s.substr(dots + 2));
    for (int j = a; j <= b; ++j) out.push_back(j);
  } else {
    for (double v : parse_list(s, "j_list")) out.push_back(static_cast<int>(v));
  }
  return out;
}

// The worker count is deliberately not echoed: outputs are byte-identical at
// any worker count, so it is not part of the experiment configuration.
int report_and_write(ExperimentReport rep, const OptMap& opts) {
  namespace fs = std::filesystem;
  const fs::path dir(opts.at("out_dir"));
  std::error_code ec;
  fs::create_directories(dir, ec);
  const std::string csv = (dir / (rep.name + ".csv")).string();
  ballavg::experiments::write_report(rep, csv);
  for (const auto& c : rep.checks) {
    std::printf("[%s] %s: measured=%.6g expected=%.6g tol=%.3g\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.measured, c.expected, c.tolerance);
  }
  for (const auto& w : rep.warnings) std::printf("[warn] %s\n", w.c_str());
  std::printf("report: %s\n", csv.c_str());
  return rep.all_passed() ? 0 : 1;
}

int run_subcommand(const std::string& sub, const OptMap& opts) {
  using namespace ballavg::experiments;
  const int workers = static_cast<int>(integer(opts, "workers"));
  if (sub == "kernel-check") {
    return report_and_write(kernel_check(static_cast<int>(integer(opts, "dim"))), opts);
  }
  if (sub == "l2-identity") {
    L2IdentityConfig c;
    c.dim = static_cast<int>(integer(opts, "dim"));
    c.alpha = num(opts, "alpha");
    c.grid_n = static_cast<int>(integer(opts, "grid_N"));
    c.grid_l = num(opts, "grid_L");
    c.nodes_per_octave = static_cast<int>(integer(opts, "nodes_per_octave"));
    c.wide_t_max = num(opts, "t_max");
    c.tolerance = num(opts, "tol");
    c.workers = workers;
    return report_and_write(l2_identity(c), opts);
  }
  if (sub == "norm-sweep") {
    EquivalenceConfig c;
    c.dim = static_cast<int>(integer(opts, "dim"));
    c.second_order = opts.at("family") == "second";
    c.alpha = num(opts, "alpha");
    c.p = num(opts, "p");
    c.lambda = num(opts, "lambda");
    c.grid_n = static_cast<int>(integer(opts, "grid_N"));
    c.grid_l = num(opts, "grid_L");
    c.nodes_per_octave = static_cast<int>(integer(opts, "nodes_per_octave"));
    c.band_factor = num(opts, "band_factor");
    c.workers = workers;
    return report_and_write(equivalence_sweep(c), opts);
  }
  if (sub == "sharpness") {
    SharpnessConfig c;
    c.dim = static_cast<int>(integer(opts, "dim"));
    c.second_order = opts.at("family") == "second";
    c.alpha = num(opts, "alpha");
    c.grid_n = static_cast<int>(integer(opts, "grid_N"));
    c.grid_l = num(opts, "grid_L");
    if (opts.at("j_list") != "auto") c.j_values = parse_j_list(opts.at("j_list"));
    c.p_values = parse_list(opts.at("p_list"), "p_list");
    c.t_min = num(opts, "t_min");
    c.t_max = opts.at("t_max") == "auto" ? 0.0 : num(opts, "t_max");
    c.nodes_per_octave = static_cast<int>(integer(opts, "nodes_per_octave"));
    c.window_steepness = num(opts, "steepness");
    c.workers = workers;
    return report_and_write(sharpness_sweep(c), opts);
  }
  if (sub == "second-order") {
    RecoveryConfig c;
    c.dim = static_cast<int>(integer(opts, "dim"));
    c.grid_n = static_cast<int>(integer(opts, "grid_N"));
    c.grid_l = num(opts, "grid_L");
    c.gauss_width = num(opts, "width");
    c.t_max = num(opts, "t_max");
    c.tmin_sweep = static_cast<int>(integer(opts, "tmin_sweep"));
    c.c_bad = num(opts, "c_bad");
    c.nodes_per_octave = static_cast<int>(integer(opts, "nodes_per_octave"));
    c.workers = workers;
    return report_and_write(second_order_recovery(c), opts);
  }
  if (sub == "lp-decay") {
    DecayExperimentConfig c;
    c.dim = static_cast<int>(integer(opts, "dim"));
    c.second_order = opts.at("family") == "second";
    c.alpha = num(opts, "alpha");
    c.p = num(opts, "p");
    c.grid_n = static_cast<int>(integer(opts, "grid_N"));
    c.grid_l = num(opts, "grid_L");
    std::vector<int> js = parse_j_list(opts.at("j_list"));
    c.j_lo = js.front();
    c.j_hi = js.back();
    c.trials = static_cast<int>(integer(opts, "trials"));
    c.seed = static_cast<std::uint64_t>(integer(opts, "seed"));
    c.band_lo = num(opts, "band_lo");
    c.band_hi = num(opts, "band_hi");
    c.nodes_per_octave = static_cast<int>(integer(opts, "nodes_per_octave"));
    c.slope_tol = num(opts, "slope_tol");
    c.workers = workers;
    return report_and_write(lp_decay(c), opts);
  }
  if (sub == "reverse-probe") {
    ReverseProbeConfig c;
    c.dim = static_cast<int>(integer(opts, "dim"));
    c.alpha = num(opts, "alpha");
    c.p = num(opts, "p");
    c.grid_n = static_cast<int>(integer(opts, "grid_N"));
    c.grid_l = num(opts, "grid_L");
    c.nodes_per_octave = static_cast<int>(integer(opts, "nodes_per_octave"));
    c.workers = workers;
    return report_and_write(reverse_probe(c), opts);
  }
  throw ConfigError("unknown subcommand '" + sub + "'");
}

void print_usage() {
  std::printf("usage: ballavg <subcommand> [--config FILE] [--key value ...]\n");
  std::printf("       ballavg default-config <subcommand>\n");
  std::printf("subcommands:");
  for (const auto& s : kSubcommands) std::printf(" %s", s.c_str());
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (args.empty()) {
      print_usage();
      return 2;
    }
    const std::string sub = args[0];
    if (sub == "--help" || sub == "-h" || sub == "help") {
      print_usage();
      return 0;
    }
    if (sub == "default-config") {
      if (args.size() != 2) throw ConfigError("default-config: expects a subcommand name");
      const std::string target = args[1];
      if (std::find(kSubcommands.begin(), kSubcommands.end(), target) == kSubcommands.end())
        throw ConfigError("default-config: unknown subcommand '" + target + "'");
      std::printf("# ballavg default config v1: %s\n", target.c_str());
      for (const auto& [k, v] : defaults_for(target)) std::printf("%s=%s\n", k.c_str(), v.c_str());
      return 0;
    }
    if (std::find(kSubcommands.begin(), kSubcommands.end(), sub) == kSubcommands.end())
      throw ConfigError("unknown subcommand '" + sub + "'");

    OptMap opts = defaults_for(sub);
    // config file first, then flag overrides
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) load_config_file(opts, args[i + 1]);
      else if (args[i].rfind("--config=", 0) == 0) load_config_file(opts, args[i].substr(9));
    }
    std::size_t i = 1;
    while (i < args.size()) {
      std::string key = args[i];
      if (key.rfind("--", 0) != 0) throw ConfigError("expected --key, got '" + key + "'");
      key = key.substr(2);
      std::string val;
      if (auto eq = key.find('='); eq != std::string::npos) {
        val = key.substr(eq + 1);
        key = key.substr(0, eq);
        i += 1;
      } else {
        if (i + 1 >= args.size()) throw ConfigError("flag --" + key + " is missing a value");
        val = args[i + 1];
        i += 2;
      }
      if (key == "config") continue;
      for (char& c : key)
        if (c == '-') c = '_';
      if (key == "j") key = "j_list";
      if (key == "p" && opts.count("p_list") && !opts.count("p")) key = "p_list";
      if (!opts.count(key)) throw ConfigError("unknown flag '--" + key + "'");
      opts[key] = val;
    }
    return run_subcommand(sub, opts);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
