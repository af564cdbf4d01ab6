// Copyright 2026 The ECTPI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ectpi/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "ectpi/curves.hpp"
#include "ectpi/grid_io.hpp"
#include "ectpi/response_grid.hpp"
#include "ectpi/synth_harness.hpp"
#include "json.hpp"

namespace ectpi::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kCsvHeader = "id,f_hz,dz_re_ohm,dz_im_ohm,group";

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& what, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("line " + std::to_string(line) + ": cannot parse " + what +
                      " '" + s + "'");
  }
  return v;
}

void require_file(const std::string& path, const char* what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw ConfigError(std::string(what) + " '" + path + "' does not exist");
  }
}

// Output files must be creatable before any work starts.
void require_writable_parent(const std::string& path) {
  const fs::path parent = fs::absolute(fs::path(path)).parent_path();
  std::error_code ec;
  if (!fs::is_directory(parent, ec)) {
    throw IoError("output directory '" + parent.string() + "' does not exist");
  }
}

void apply_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("ECTPI_THREADS"); env && *env) {
      const std::string s = env;
      int v = 0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v <= 0) {
        throw ConfigError("ECTPI_THREADS must be a positive integer");
      }
      threads = v;
    }
  }
  if (threads > 0) omp_set_num_threads(threads);
}

AxisSpec parse_axis(const std::vector<double>& v, AxisSpec base, const char* name) {
  if (v.empty()) return base;
  if (v.size() != 3 || !(v[2] >= 2.0) || v[2] != std::floor(v[2])) {
    throw ConfigError(std::string("--") + name + " expects lo,hi,n with n >= 2");
  }
  base.lo = v[0];
  base.hi = v[1];
  base.n = static_cast<std::size_t>(v[2]);
  return base;
}

template <class T>
std::vector<T> broadcast(const std::vector<T>& v, std::size_t n, const char* name) {
  if (v.size() == n) return v;
  if (v.size() == 1) return std::vector<T>(n, v.front());
  throw ConfigError(std::string("--") + name + " needs 1 or " + std::to_string(n) +
                    " values");
}

std::ofstream open_output(const std::string& path) {
  require_writable_parent(path);
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path + "'");
  return f;
}

struct BuildArgs {
  std::string probe, out;
  std::vector<double> pi2, pi3, pi4;
  double reference_sigma_ms = 35.0;
  double rel_tol = 1e-8;
  int threads = 0;
};

int cmd_build_db(const BuildArgs& a, std::ostream& out) {
  ProbeGeometry probe = reference_probe();
  if (!a.probe.empty()) probe = load_probe(a.probe);
  require_writable_parent(a.out);
  GridSpec spec;
  spec.pi2 = parse_axis(a.pi2, spec.pi2, "pi2");
  spec.pi3 = parse_axis(a.pi3, spec.pi3, "pi3");
  spec.pi4 = parse_axis(a.pi4, spec.pi4, "pi4");
  spec.reference_sigma = a.reference_sigma_ms * 1e6;
  apply_threads(a.threads);

  ForwardOptions fwd;
  fwd.rel_tol = a.rel_tol;
  const auto t0 = std::chrono::steady_clock::now();
  const ImpedanceModel model(probe, fwd);
  BuildOptions opt;
  opt.forward = fwd;
  const ResponseGrid grid = build_grid(model, spec, opt);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_grid(grid, a.out);

  const auto sweep = physical_sweep(probe, spec);
  out << "database     " << a.out << "\n"
      << "nodes        " << grid.node_count() << " (" << grid.size(0) << " x "
      << grid.size(1) << " x " << grid.size(2) << ")\n"
      << "wall time    " << std::fixed << std::setprecision(2) << wall << " s\n"
      << std::defaultfloat << std::setprecision(6)
      << "forward tol  " << fwd.rel_tol << "\n"
      << "frequency    " << sweep.f_min_hz << " .. " << sweep.f_max_hz
      << " Hz at " << a.reference_sigma_ms << " MS/m\n"
      << "thickness    " << sweep.thickness_min * 1e3 << " .. "
      << sweep.thickness_max * 1e3 << " mm\n"
      << "lift-off     " << sweep.lift_off_min * 1e3 << " .. "
      << sweep.lift_off_max * 1e3 << " mm\n";
  return kExitOk;
}

struct EstimateArgs {
  std::string db, measurements, mode, out, level = "re-im";
  std::string thickness_mode = "auto";
  double tol = 1e-3;
  double noise_rel = 0.0;
  int pi = 3;
  int threads = 0;
};

EstimatorOptions estimator_options(double tol, double noise_rel,
                                   const std::string& level) {
  EstimatorOptions o;
  if (!(tol > 0.0)) throw ConfigError("--tol must be positive");
  if (!(noise_rel >= 0.0)) throw ConfigError("--noise-rel must be non-negative");
  o.tol = tol;
  o.noise_rel = noise_rel;
  o.level = level_functions_from_string(level);
  return o;
}

void report_ambiguity(const AmbiguityError& e, std::ostream& err) {
  err << "ambiguous: " << e.what() << "\n";
  if (!e.candidates().empty()) {
    err << "candidates (plane coordinates):\n";
    for (const auto& c : e.candidates()) {
      err << "  " << std::setprecision(10) << c.x << ", " << c.y << "\n";
    }
  }
  err << "increase the number of compatibility curves by adding a measurement "
         "at a further frequency\n";
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  require_file(a.db, "database");
  const auto ms = read_measurements(a.measurements);
  const auto opt = estimator_options(a.tol, a.noise_rel, a.level);
  std::unique_ptr<std::ofstream> file;
  if (!a.out.empty()) file = std::make_unique<std::ofstream>(open_output(a.out));
  apply_threads(a.threads);
  const ResponseGrid grid = load_grid(a.db);

  // Rows sharing a group value form one estimation problem.
  std::vector<std::string> order;
  std::map<std::string, std::vector<Measurement>> groups;
  for (const auto& m : ms) {
    if (!groups.count(m.group)) order.push_back(m.group);
    groups[m.group].push_back(m);
  }
  json results = json::array();
  for (const auto& g : order) {
    const auto& set = groups[g];
    EstimationResult r;
    if (a.mode == "liftoff-inv") {
      r = estimate_conductivity_thickness(set, grid, opt);
    } else if (a.mode == "sigma-inv") {
      r = estimate_thickness_liftoff(set, grid, opt);
    } else if (a.mode == "thickness-inv") {
      ThicknessInvariantMode mode = ThicknessInvariantMode::kThreeFrequency;
      if (a.thickness_mode == "varied") {
        mode = ThicknessInvariantMode::kThicknessVaried;
      } else if (a.thickness_mode == "auto") {
        const bool same = std::all_of(set.begin(), set.end(), [&](const auto& m) {
          return m.frequency_hz == set.front().frequency_hz;
        });
        if (same) mode = ThicknessInvariantMode::kThicknessVaried;
      }
      r = estimate_conductivity_liftoff(set, grid, mode, opt);
    } else {
      r = estimate_single(set, grid, a.pi, opt);
    }
    json j = json::parse(to_json(r));
    j["group"] = g;
    results.push_back(j);
  }
  std::ostream& dst = file ? static_cast<std::ostream&>(*file) : out;
  dst << json{{"results", results}}.dump(2) << "\n";
  if (!dst) throw IoError("failed writing estimation results");
  return kExitOk;
}

struct TraceArgs {
  std::string db, measurements, id, out, level = "re-im";
  double f_hz = 0.0, dz_re = 0.0, dz_im = 0.0;
  bool have_direct = false;
  int threads = 0;
};

int cmd_trace(const TraceArgs& a, std::ostream& out) {
  require_file(a.db, "database");
  Measurement m;
  if (!a.measurements.empty()) {
    const auto ms = read_measurements(a.measurements);
    if (a.id.empty() && ms.size() != 1) {
      throw ConfigError("--id is required when the file holds several measurements");
    }
    const auto it = std::find_if(ms.begin(), ms.end(), [&](const auto& x) {
      return a.id.empty() || x.id == a.id;
    });
    if (it == ms.end()) throw ConfigError("no measurement with id '" + a.id + "'");
    m = *it;
  } else if (a.have_direct) {
    m = {"cli", a.f_hz, {a.dz_re, a.dz_im}, {}};
  } else {
    throw ConfigError("give --measurements or --f-hz with --dz-re and --dz-im");
  }
  m.validate();
  EstimatorOptions opt;
  opt.level = level_functions_from_string(a.level);
  std::unique_ptr<std::ofstream> file;
  if (!a.out.empty()) file = std::make_unique<std::ofstream>(open_output(a.out));
  apply_threads(a.threads);
  const ResponseGrid grid = load_grid(a.db);
  const auto t = trace_measurement(m, grid, opt);
  std::ostream& dst = file ? static_cast<std::ostream&>(*file) : out;
  write_curve_csv(dst, grid, t.curves, t.pi1, opt.level);
  if (!dst) throw IoError("failed writing curve CSV");
  return kExitOk;
}

struct ExperimentArgs {
  std::string config, db, out, probe;
  long long seed = -1;
  int repeats = 0;
  double noise_rel = -1.0;
  int threads = 0;
  bool serial = false;
};

int cmd_experiment(const ExperimentArgs& a, std::ostream& out) {
  ExperimentConfig cfg;
  if (!a.config.empty()) cfg = load_experiment_config(a.config);
  require_file(a.db, "database");
  if (!a.probe.empty()) cfg.probe = load_probe(a.probe);
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  if (a.repeats > 0) cfg.repeats = a.repeats;
  if (a.noise_rel >= 0.0) cfg.noise_rel = a.noise_rel;
  cfg.validate();
  fs::path dir = fs::absolute(a.out);
  if (!dir.has_filename()) dir = dir.parent_path();
  require_writable_parent(dir.string());
  apply_threads(a.threads);
  const ResponseGrid grid = load_grid(a.db);
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = a.serial ? run_campaign_serial(cfg, grid) : run_campaign(cfg, grid);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_campaign(res, cfg, a.out);

  out << "cells " << res.cells.size() << ", " << std::fixed << std::setprecision(1)
      << wall << " s\n" << std::defaultfloat;
  for (std::size_t e = 0; e < kCampaignEstimators.size(); ++e) {
    std::size_t counts[4] = {0, 0, 0, 0};
    for (const auto& c : res.cells) ++counts[static_cast<int>(c.outcomes[e].status)];
    out << std::left << std::setw(20) << kCampaignEstimators[e] << std::right
        << " ok " << counts[0] << "  ambiguous " << counts[1] << "  incompatible "
        << counts[2] << "  failed " << counts[3] << "\n";
  }
  std::map<std::string, double> worst;
  for (const auto& r : res.rows) {
    auto& w = worst[r.estimator + " " + r.quantity];
    if (r.stats.n > 0) w = std::max(w, r.stats.mean);
  }
  for (const auto& [k, v] : worst) {
    out << "worst cell mean error  " << std::left << std::setw(30) << k << std::right
        << std::setprecision(3) << v << " %\n";
  }
  out << "tables written to " << a.out << "\n";
  return kExitOk;
}

struct SynthArgs {
  std::string probe, out, group, id_prefix = "m";
  std::vector<double> sigma_ms, thickness_mm, lift_off_mm, f_hz;
  double noise_rel = 0.0;
  long long seed = 1;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  ProbeGeometry probe = reference_probe();
  if (!a.probe.empty()) probe = load_probe(a.probe);
  if (a.f_hz.empty()) throw ConfigError("--f-hz needs at least one frequency");
  const std::size_t n = std::max({a.f_hz.size(), a.sigma_ms.size(),
                                  a.thickness_mm.size(), a.lift_off_mm.size()});
  const auto f = broadcast(a.f_hz, n, "f-hz");
  const auto s = broadcast(a.sigma_ms, n, "sigma-ms");
  const auto h = broadcast(a.thickness_mm, n, "thickness-mm");
  const auto l = broadcast(a.lift_off_mm, n, "lift-off-mm");
  if (!(a.noise_rel >= 0.0)) throw ConfigError("--noise-rel must be non-negative");
  std::unique_ptr<std::ofstream> file;
  if (!a.out.empty()) file = std::make_unique<std::ofstream>(open_output(a.out));

  const ImpedanceModel model(probe);
  std::mt19937_64 rng(static_cast<std::uint64_t>(a.seed));
  std::vector<Measurement> ms;
  for (std::size_t k = 0; k < n; ++k) {
    if (!(s[k] > 0.0) || !(h[k] > 0.0) || !(l[k] > 0.0) || !(f[k] > 0.0)) {
      throw ConfigError("plate, lift-off and frequency values must be positive");
    }
    PlateSpec plate{a.group, s[k] * 1e6, h[k] * 1e-3};
    auto m = synth_measurement(model, plate, l[k] * 1e-3, f[k], a.noise_rel, rng,
                               a.id_prefix + std::to_string(k + 1));
    m.group = a.group;
    ms.push_back(m);
  }
  std::ostream& dst = file ? static_cast<std::ostream&>(*file) : out;
  write_measurements(dst, ms);
  if (!dst) throw IoError("failed writing measurements");
  return kExitOk;
}

}  // namespace

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kDomain:
    case ErrorCategory::kConfig: return kExitConfig;
    case ErrorCategory::kData:
    case ErrorCategory::kAmbiguity:
    case ErrorCategory::kFormat: return kExitData;
    case ErrorCategory::kModel: return kExitModel;
    case ErrorCategory::kIo: return kExitIo;
  }
  return kExitModel;
}

std::vector<Measurement> parse_measurements(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::vector<Measurement> ms;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (!header) {
      std::string compact;
      for (char c : line) {
        if (c != ' ' && c != '\t') compact += c;
      }
      if (compact != kCsvHeader) {
        throw ConfigError(std::string("measurement CSV header must be '") +
                          kCsvHeader + "'");
      }
      header = true;
      continue;
    }
    auto cells = split(line);
    if (cells.size() == 4) cells.emplace_back();
    if (cells.size() != 5) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 5 fields");
    }
    Measurement m{cells[0],
                  parse_double(cells[1], "f_hz", lineno),
                  {parse_double(cells[2], "dz_re_ohm", lineno),
                   parse_double(cells[3], "dz_im_ohm", lineno)},
                  cells[4]};
    if (m.id.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty id");
    for (const auto& other : ms) {
      if (other.id == m.id) throw ConfigError("duplicate measurement id '" + m.id + "'");
    }
    m.validate();
    ms.push_back(std::move(m));
  }
  if (!header) throw ConfigError("measurement file is empty");
  if (ms.empty()) throw ConfigError("measurement file has no rows");
  return ms;
}

std::vector<Measurement> read_measurements(const std::string& path) {
  require_file(path, "measurement file");
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open measurement file '" + path + "'");
  return parse_measurements(f);
}

void write_measurements(std::ostream& out, const std::vector<Measurement>& ms) {
  out << kCsvHeader << "\n";
  const auto old = out.precision(17);
  for (const auto& m : ms) {
    out << m.id << ',' << m.frequency_hz << ',' << m.delta_z.real() << ','
        << m.delta_z.imag() << ',' << m.group << "\n";
  }
  out.precision(old);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plate conductivity, thickness and lift-off from eddy-current "
               "impedance via compatibility curves"};
  app.require_subcommand(1);
  app.name("ectpi");

  BuildArgs b;
  auto* build = app.add_subcommand("build-db", "tabulate the dimensionless response");
  build->add_option("--probe", b.probe, "probe JSON (SI units); default reference coil");
  build->add_option("--out", b.out, "database path")->required();
  build->add_option("--pi2", b.pi2, "pi2 axis lo,hi,n")->delimiter(',');
  build->add_option("--pi3", b.pi3, "pi3 axis lo,hi,n")->delimiter(',');
  build->add_option("--pi4", b.pi4, "pi4 axis lo,hi,n")->delimiter(',');
  build->add_option("--reference-sigma", b.reference_sigma_ms,
                    "conductivity realising the nodes, MS/m");
  build->add_option("--rel-tol", b.rel_tol, "forward-model relative tolerance");
  build->add_option("--threads", b.threads, "OpenMP threads (or ECTPI_THREADS)");

  EstimateArgs e;
  auto* est = app.add_subcommand("estimate", "estimate plate parameters");
  est->add_option("--db", e.db, "database path")->required();
  est->add_option("-m,--measurements", e.measurements, "measurement CSV")->required();
  est->add_option("--mode", e.mode, "estimator")
      ->required()
      ->check(CLI::IsMember({"liftoff-inv", "sigma-inv", "thickness-inv", "single"}));
  est->add_option("--tol", e.tol, "intersection tolerance, normalised units");
  est->add_option("--noise-rel", e.noise_rel, "relative measurement noise");
  est->add_option("--level", e.level, "level functions")
      ->check(CLI::IsMember({"re-im", "mag-phase"}));
  est->add_option("--thickness-mode", e.thickness_mode, "thickness-inv variant")
      ->check(CLI::IsMember({"auto", "varied", "three-frequency"}));
  est->add_option("--pi", e.pi, "single mode: pi index")->check(CLI::Range(2, 4));
  est->add_option("--out", e.out, "JSON output path; default stdout");
  est->add_option("--threads", e.threads, "OpenMP threads (or ECTPI_THREADS)");

  TraceArgs t;
  auto* trace = app.add_subcommand("trace", "write the compatibility curves of a measurement");
  trace->add_option("--db", t.db, "database path")->required();
  trace->add_option("-m,--measurements", t.measurements, "measurement CSV");
  trace->add_option("--id", t.id, "measurement id in the CSV");
  auto* f_opt = trace->add_option("--f-hz", t.f_hz, "frequency, Hz");
  auto* re_opt = trace->add_option("--dz-re", t.dz_re, "impedance change, real part, ohm");
  auto* im_opt = trace->add_option("--dz-im", t.dz_im, "impedance change, imaginary part, ohm");
  f_opt->needs(re_opt)->needs(im_opt);
  trace->add_option("--level", t.level, "level functions")
      ->check(CLI::IsMember({"re-im", "mag-phase"}));
  trace->add_option("--out", t.out, "CSV output path; default stdout");
  trace->add_option("--threads", t.threads, "OpenMP threads (or ECTPI_THREADS)");

  ExperimentArgs x;
  auto* exp = app.add_subcommand("experiment", "run the synthetic measurement campaign");
  exp->add_option("--config", x.config, "experiment JSON; default built-in campaign");
  exp->add_option("--db", x.db, "database path")->required();
  exp->add_option("--out", x.out, "output directory")->required();
  exp->add_option("--probe", x.probe, "probe JSON overriding the config");
  exp->add_option("--seed", x.seed, "master seed override");
  exp->add_option("--repeats", x.repeats, "repeats per cell override");
  exp->add_option("--noise-rel", x.noise_rel, "relative noise override");
  exp->add_option("--threads", x.threads, "OpenMP threads (or ECTPI_THREADS)");
  exp->add_flag("--serial", x.serial, "run the serial reference campaign");

  SynthArgs s;
  auto* syn = app.add_subcommand("synth", "write forward-model measurements as CSV");
  syn->add_option("--probe", s.probe, "probe JSON; default reference coil");
  syn->add_option("--sigma", s.sigma_ms, "conductivity, MS/m")->required()->delimiter(',');
  syn->add_option("--thickness", s.thickness_mm, "thickness, mm")->required()->delimiter(',');
  syn->add_option("--lift-off", s.lift_off_mm, "lift-off, mm")->required()->delimiter(',');
  syn->add_option("--f-hz", s.f_hz, "frequencies, Hz")->required()->delimiter(',');
  syn->add_option("--noise-rel", s.noise_rel, "relative noise per component");
  syn->add_option("--seed", s.seed, "RNG seed");
  syn->add_option("--group", s.group, "group column value");
  syn->add_option("--id-prefix", s.id_prefix, "measurement id prefix");
  syn->add_option("--out", s.out, "CSV output path; default stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*build) return cmd_build_db(b, out);
    if (*est) return cmd_estimate(e, out);
    if (*trace) {
      t.have_direct = f_opt->count() > 0;
      return cmd_trace(t, out);
    }
    if (*exp) return cmd_experiment(x, out);
    if (*syn) return cmd_synth(s, out);
  } catch (const AmbiguityError& ae) {
    report_ambiguity(ae, err);
    return kExitData;
  } catch (const Error& ee) {
    err << "error (" << to_string(ee.category()) << "): " << ee.what() << "\n";
    return exit_code(ee.category());
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitModel;
  }
  return kExitConfig;
}

}  // namespace ectpi::cli
