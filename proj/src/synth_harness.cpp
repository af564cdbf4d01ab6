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

#include "ectpi/synth_harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "ectpi/error.hpp"
#include "json.hpp"

namespace ectpi {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream f(path);
  if (!f) throw ConfigError(std::string("cannot open ") + what + " '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const char* where) {
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) {
      throw ConfigError(std::string("unknown key '") + k + "' in " + where);
    }
  }
}

ProbeGeometry probe_from(const json& j) {
  if (!j.is_object()) throw ConfigError("probe must be a JSON object");
  reject_unknown(j, {"inner_radius_m", "outer_radius_m", "height_m", "turns", "tilt_rad"},
                 "probe");
  ProbeGeometry p;
  p.inner_radius = j.at("inner_radius_m").get<double>();
  p.outer_radius = j.at("outer_radius_m").get<double>();
  p.height = j.at("height_m").get<double>();
  p.turns = j.at("turns").get<double>();
  p.tilt = j.value("tilt_rad", 0.0);
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid probe: ") + e.what());
  }
  return p;
}

json probe_json(const ProbeGeometry& p) {
  return {{"inner_radius_m", p.inner_radius},
          {"outer_radius_m", p.outer_radius},
          {"height_m", p.height},
          {"turns", p.turns},
          {"tilt_rad", p.tilt}};
}

EstimatorOutcome run_estimator(int which, const std::vector<TracedMeasurement>& t,
                               const ResponseGrid& grid,
                               const EstimatorOptions& opt, const PlateSpec& plate,
                               double lift_off) {
  EstimatorOutcome out;
  try {
    EstimationResult r;
    std::vector<std::pair<const char*, double>> truth;
    if (which == 0) {
      r = estimate_conductivity_thickness({t[0], t[1]}, grid, opt);
      truth = {{"sigma", plate.sigma}, {"thickness", plate.thickness}};
    } else if (which == 1) {
      r = estimate_thickness_liftoff({t[0], t[1]}, grid, opt);
      truth = {{"thickness", plate.thickness}, {"lift_off", lift_off}};
    } else {
      r = estimate_conductivity_liftoff({t[0], t[2], t[1]}, grid,
                                        ThicknessInvariantMode::kThreeFrequency, opt);
      truth = {{"sigma", plate.sigma}, {"lift_off", lift_off}};
    }
    for (const auto& [name, value] : truth) {
      const double est = r.value(name);
      out.estimate.push_back({name, est, name == std::string("sigma") ? "S/m" : "m"});
      out.errors_pct.push_back(relative_error_pct(est, value));
    }
    // Triplets also report the mean of the individual pairwise results.
    for (const auto& q : r.pairwise_mean) {
      for (const auto& [name, value] : truth) {
        if (q.name != name) continue;
        out.estimate.push_back({q.name + "_pairwise_mean", q.value, q.unit});
        out.errors_pct.push_back(relative_error_pct(q.value, value));
      }
    }
  } catch (const AmbiguityError& e) {
    out.status = CellStatus::kAmbiguous;
    out.message = e.what();
  } catch (const DataError& e) {
    out.status = CellStatus::kIncompatible;
    out.message = e.what();
  } catch (const Error& e) {
    out.status = CellStatus::kFailed;
    out.message = e.what();
  }
  return out;
}

CellRecord run_cell(const ExperimentConfig& cfg, const ImpedanceModel& model,
                    const ResponseGrid& grid, std::size_t ip, std::size_t il,
                    std::size_t ifs, std::size_t rep) {
  CellRecord rec{ip, il, ifs, rep, {}};
  const auto& plate = cfg.plates[ip];
  const double lo = cfg.lift_offs[il];
  const auto& pair = cfg.frequency_pairs[ifs];
  const double freqs[3] = {pair[0], pair[1], cfg.intermediate_frequency};
  std::mt19937_64 rng(cell_seed(cfg.seed, ip, il, ifs, rep));

  EstimatorOptions opt = cfg.estimator;
  opt.noise_rel = cfg.noise_rel;

  std::vector<TracedMeasurement> traced;
  std::string failure;
  CellStatus failure_status = CellStatus::kOk;
  for (int k = 0; k < 3; ++k) {
    std::ostringstream id;
    id << plate.name << "/lo" << il << "/f" << freqs[k] << "/r" << rep;
    const Measurement m =
        synth_measurement(model, plate, lo, freqs[k], cfg.noise_rel, rng, id.str());
    if (failure_status != CellStatus::kOk) continue;  // keep the RNG stream fixed
    try {
      traced.push_back(trace_measurement(m, grid, opt));
    } catch (const DataError& e) {
      failure_status = CellStatus::kIncompatible;
      failure = e.what();
    } catch (const Error& e) {
      failure_status = CellStatus::kFailed;
      failure = e.what();
    }
  }
  for (int e = 0; e < 3; ++e) {
    const bool needs_third = e == 2;
    if (traced.size() < 2 || (needs_third && traced.size() < 3)) {
      rec.outcomes[e].status = failure_status;
      rec.outcomes[e].message = failure;
      continue;
    }
    rec.outcomes[e] = run_estimator(e, traced, grid, opt, plate, lo);
  }
  return rec;
}

std::vector<TableRow> tabulate(const ExperimentConfig& cfg,
                               const std::vector<CellRecord>& cells) {
  static const std::array<std::array<const char*, 2>, 3> quantities{
      {{"sigma", "thickness"}, {"thickness", "lift_off"}, {"sigma", "lift_off"}}};
  std::vector<TableRow> rows;
  const std::size_t np = cfg.plates.size();
  const std::size_t nl = cfg.lift_offs.size();
  const std::size_t nf = cfg.frequency_pairs.size();
  const std::size_t nr = static_cast<std::size_t>(cfg.repeats);
  for (int e = 0; e < 3; ++e) {
    for (int q = 0; q < 2; ++q) {
      for (std::size_t ip = 0; ip < np; ++ip) {
        for (std::size_t il = 0; il < nl; ++il) {
          for (std::size_t ifs = 0; ifs < nf; ++ifs) {
            TableRow row;
            row.estimator = kCampaignEstimators[e];
            row.plate = cfg.plates[ip].name;
            row.lift_off_mm = cfg.lift_offs[il] * 1e3;
            row.freq_set = freq_set_label(cfg, ifs);
            row.quantity = quantities[e][q];
            std::vector<double> errs;
            for (std::size_t r = 0; r < nr; ++r) {
              const auto& c = cells[((ip * nl + il) * nf + ifs) * nr + r];
              const auto& o = c.outcomes[e];
              if (o.status == CellStatus::kOk) {
                errs.push_back(o.errors_pct[q]);
                ++row.n_ok;
              } else if (o.status == CellStatus::kAmbiguous) {
                ++row.n_ambiguous;
              }
            }
            row.stats = error_stats(errs);
            rows.push_back(row);
          }
        }
      }
    }
  }
  return rows;
}

CampaignResult campaign_impl(const ExperimentConfig& cfg, const ResponseGrid& grid,
                             bool parallel) {
  cfg.validate();
  if (!(cfg.probe == grid.probe())) {
    throw ConfigError("experiment probe differs from the probe the database was built for");
  }
  const ImpedanceModel model(cfg.probe);
  const std::size_t np = cfg.plates.size();
  const std::size_t nl = cfg.lift_offs.size();
  const std::size_t nf = cfg.frequency_pairs.size();
  const std::size_t nr = static_cast<std::size_t>(cfg.repeats);
  const std::size_t total = np * nl * nf * nr;
  CampaignResult res;
  res.cells.resize(total);
  auto body = [&](std::size_t k) {
    const std::size_t r = k % nr;
    const std::size_t ifs = (k / nr) % nf;
    const std::size_t il = (k / (nr * nf)) % nl;
    const std::size_t ip = k / (nr * nf * nl);
    res.cells[k] = run_cell(cfg, model, grid, ip, il, ifs, r);
  };
  if (parallel) {
    const auto n = static_cast<long long>(total);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long k = 0; k < n; ++k) body(static_cast<std::size_t>(k));
  } else {
    for (std::size_t k = 0; k < total; ++k) body(k);
  }
  res.rows = tabulate(cfg, res.cells);
  return res;
}

}  // namespace

void ExperimentConfig::validate() const {
  probe.validate();
  if (plates.empty()) throw ConfigError("experiment needs at least one plate");
  for (const auto& p : plates) {
    if (!(p.sigma > 0.0) || !(p.thickness > 0.0)) {
      throw ConfigError("plate '" + p.name + "' needs positive sigma and thickness");
    }
  }
  if (lift_offs.empty()) throw ConfigError("experiment needs at least one lift-off");
  for (double l : lift_offs) {
    if (!(l > 0.0)) throw ConfigError("lift-offs must be positive");
  }
  if (frequency_pairs.empty()) throw ConfigError("experiment needs a frequency pair");
  for (const auto& fp : frequency_pairs) {
    if (!(fp[0] > 0.0) || !(fp[1] > 0.0) || fp[0] == fp[1]) {
      throw ConfigError("frequency pairs need two distinct positive frequencies");
    }
    if (intermediate_frequency == fp[0] || intermediate_frequency == fp[1]) {
      throw ConfigError("the intermediate frequency must differ from each pair");
    }
  }
  if (!(intermediate_frequency > 0.0)) {
    throw ConfigError("intermediate frequency must be positive");
  }
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  if (!(noise_rel >= 0.0) || !std::isfinite(noise_rel)) {
    throw ConfigError("noise_rel must be a finite non-negative number");
  }
  if (!(estimator.tol > 0.0)) throw ConfigError("tolerance must be positive");
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  ExperimentConfig cfg;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    reject_unknown(j,
                   {"probe", "plates", "lift_offs_mm", "frequency_pairs_hz",
                    "intermediate_frequency_hz", "repeats", "noise_rel", "seed",
                    "tol", "noise_tol_gain", "level_functions"},
                   "experiment config");
    if (j.contains("probe")) cfg.probe = probe_from(j["probe"]);
    if (j.contains("plates")) {
      cfg.plates.clear();
      for (const auto& p : j["plates"]) {
        reject_unknown(p, {"name", "sigma_ms_per_m", "thickness_mm"}, "plate");
        cfg.plates.push_back({p.at("name").get<std::string>(),
                              p.at("sigma_ms_per_m").get<double>() * 1e6,
                              p.at("thickness_mm").get<double>() * 1e-3});
      }
    }
    if (j.contains("lift_offs_mm")) {
      cfg.lift_offs.clear();
      for (double v : j["lift_offs_mm"].get<std::vector<double>>()) {
        cfg.lift_offs.push_back(v * 1e-3);
      }
    }
    if (j.contains("frequency_pairs_hz")) {
      cfg.frequency_pairs = j["frequency_pairs_hz"].get<std::vector<std::array<double, 2>>>();
    }
    cfg.intermediate_frequency =
        j.value("intermediate_frequency_hz", cfg.intermediate_frequency);
    cfg.repeats = j.value("repeats", cfg.repeats);
    cfg.noise_rel = j.value("noise_rel", cfg.noise_rel);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.estimator.tol = j.value("tol", cfg.estimator.tol);
    cfg.estimator.noise_tol_gain = j.value("noise_tol_gain", cfg.estimator.noise_tol_gain);
    if (j.contains("level_functions")) {
      cfg.estimator.level =
          level_functions_from_string(j["level_functions"].get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_json(read_file(path, "experiment config"));
}

std::string to_json(const ExperimentConfig& cfg) {
  json plates = json::array();
  for (const auto& p : cfg.plates) {
    plates.push_back({{"name", p.name},
                      {"sigma_ms_per_m", p.sigma * 1e-6},
                      {"thickness_mm", p.thickness * 1e3}});
  }
  std::vector<double> lo;
  for (double v : cfg.lift_offs) lo.push_back(v * 1e3);
  return json{{"probe", probe_json(cfg.probe)},
              {"plates", plates},
              {"lift_offs_mm", lo},
              {"frequency_pairs_hz", cfg.frequency_pairs},
              {"intermediate_frequency_hz", cfg.intermediate_frequency},
              {"repeats", cfg.repeats},
              {"noise_rel", cfg.noise_rel},
              {"seed", cfg.seed},
              {"tol", cfg.estimator.tol},
              {"noise_tol_gain", cfg.estimator.noise_tol_gain},
              {"level_functions", to_string(cfg.estimator.level)}}
      .dump(2);
}

ProbeGeometry probe_from_json(const std::string& text) {
  try {
    return probe_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed probe file: ") + e.what());
  }
}

ProbeGeometry load_probe(const std::string& path) {
  return probe_from_json(read_file(path, "probe file"));
}

Measurement synth_measurement(const ImpedanceModel& model, const PlateSpec& plate,
                              double lift_off, double frequency_hz,
                              double noise_rel, std::mt19937_64& rng,
                              std::string id) {
  if (!(noise_rel >= 0.0)) throw DomainError("noise level must be non-negative");
  const auto dz = model.delta_impedance(
      {plate.sigma, plate.thickness}, {angular_frequency(frequency_hz), lift_off});
  Measurement m{std::move(id), frequency_hz, dz, plate.name};
  if (noise_rel > 0.0) {
    std::normal_distribution<double> n(0.0, noise_rel * std::abs(dz));
    const double re = n(rng);
    const double im = n(rng);
    m.delta_z += std::complex<double>(re, im);
  }
  return m;
}

std::uint64_t cell_seed(std::uint64_t master, std::size_t plate,
                        std::size_t lift_off, std::size_t freq_set,
                        std::size_t repeat) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t v : {plate, lift_off, freq_set, repeat}) h = splitmix64(h ^ v);
  return h;
}

double relative_error_pct(double estimate, double truth) {
  if (!(truth != 0.0)) throw DomainError("relative error needs a nonzero truth");
  return 100.0 * std::abs(estimate - truth) / std::abs(truth);
}

ErrorStats error_stats(const std::vector<double>& e) {
  ErrorStats s;
  s.n = e.size();
  if (e.empty()) return s;
  double sum = 0.0;
  for (double v : e) sum += v;
  s.mean = sum / static_cast<double>(e.size());
  if (e.size() >= 2) {
    double ss = 0.0;
    for (double v : e) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(e.size() - 1));
  }
  return s;
}

const char* to_string(CellStatus s) {
  switch (s) {
    case CellStatus::kOk: return "ok";
    case CellStatus::kAmbiguous: return "ambiguous";
    case CellStatus::kIncompatible: return "incompatible";
    case CellStatus::kFailed: return "failed";
  }
  return "unknown";
}

std::string freq_set_label(const ExperimentConfig& cfg, std::size_t k) {
  std::ostringstream s;
  s << cfg.frequency_pairs[k][0] << "/" << cfg.intermediate_frequency << "/"
    << cfg.frequency_pairs[k][1];
  return s.str();
}

CampaignResult run_campaign(const ExperimentConfig& cfg, const ResponseGrid& grid) {
  return campaign_impl(cfg, grid, true);
}

CampaignResult run_campaign_serial(const ExperimentConfig& cfg,
                                   const ResponseGrid& grid) {
  return campaign_impl(cfg, grid, false);
}

void write_campaign(const CampaignResult& result, const ExperimentConfig& cfg,
                    const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "'");
  auto open = [&](const std::string& name) {
    const std::string path = (std::filesystem::path(out_dir) / name).string();
    std::ofstream f(path);
    if (!f) throw IoError("cannot write '" + path + "'");
    return f;
  };

  std::map<std::string, std::vector<const TableRow*>> tables;
  for (const auto& r : result.rows) tables[r.estimator + "_" + r.quantity].push_back(&r);
  for (const auto& [name, rows] : tables) {
    auto f = open(name + ".csv");
    f << "plate,lift_off_mm,freq_set,quantity,mean_rel_err_pct,std_rel_err_pct,"
         "n_ok,n_ambiguous\n";
    f.precision(10);
    for (const auto* r : rows) {
      f << r->plate << ',' << r->lift_off_mm << ',' << r->freq_set << ','
        << r->quantity << ',' << r->stats.mean << ',' << r->stats.std << ','
        << r->n_ok << ',' << r->n_ambiguous << '\n';
    }
    if (!f) throw IoError("failed writing table " + name);
  }

  json raw = json::array();
  for (const auto& c : result.cells) {
    json est = json::object();
    for (int e = 0; e < 3; ++e) {
      const auto& o = c.outcomes[e];
      json values = json::object();
      json errors = json::object();
      for (std::size_t q = 0; q < o.estimate.size(); ++q) {
        values[o.estimate[q].name] = o.estimate[q].value;
        errors[o.estimate[q].name] = o.errors_pct[q];
      }
      est[kCampaignEstimators[e]] = {{"status", to_string(o.status)},
                                     {"message", o.message},
                                     {"estimate", values},
                                     {"rel_err_pct", errors}};
    }
    raw.push_back({{"plate", cfg.plates[c.plate].name},
                   {"lift_off_mm", cfg.lift_offs[c.lift_off] * 1e3},
                   {"freq_set", freq_set_label(cfg, c.freq_set)},
                   {"repeat", c.repeat},
                   {"estimators", est}});
  }
  auto fr = open("raw.json");
  fr << raw.dump(1) << '\n';

  json meta = json::parse(to_json(cfg));
  meta["noise_model"] =
      "independent Gaussian on real and imaginary parts, standard deviation "
      "noise_rel times |dZ|";
  meta["noise_level_is_assumed"] = true;
  meta["cells"] = result.cells.size();
  auto fm = open("metadata.json");
  fm << meta.dump(2) << '\n';
}

}  // namespace ectpi
