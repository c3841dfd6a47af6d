// Copyright 2026 The ethsim Authors
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

#include "ethsim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "ethsim/config.hpp"
#include "ethsim/error.hpp"
#include "ethsim/histories.hpp"
#include "ethsim/mesoscopic.hpp"
#include "ethsim/serialize.hpp"

namespace ethsim::cli {

namespace {

// Residuals above this make `lsw --check-consistency` exit with
// kInvariantFailure.
constexpr double kConsistencyLimit = 1e-10;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::string> protocol;
  bool check_consistency = false;
};

struct Result {
  std::string primary;
  /// Written next to the primary output file (mesoscopic CSV summary).
  std::optional<std::string> summary;
  int code = kSuccess;
};

class UsageError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

std::string num(double x) { return std::isfinite(x) ? format_label(x) : std::string(); }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string join(const std::vector<std::string>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += v[i];
  }
  return s;
}

std::vector<std::string> split_protocol(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

const FrameModel& frame_model(const ExperimentConfig& cfg, const char* command) {
  if (const auto* f = std::get_if<FrameModel>(&cfg.model)) return *f;
  throw UsageError(std::string(command) + " needs a model of kind \"frame\"");
}

const DeFinettiModel& definetti_model(const ExperimentConfig& cfg, const char* command) {
  if (const auto* m = std::get_if<DeFinettiModel>(&cfg.model)) return *m;
  throw UsageError(std::string(command) + " needs a model of kind \"definetti\"");
}

Json step_ref(const HeisenbergFrame& frame, const std::optional<std::size_t>& k) {
  if (!k) return nullptr;
  Json j;
  j["step"] = *k;
  j["time"] = frame.time(*k);
  return j;
}

Result cmd_detect(const ExperimentConfig& cfg, const std::string& format) {
  const FrameModel& fm = frame_model(cfg, "detect");
  const EarliestEvent ev = earliest_event(fm.frame, fm.initial, cfg.run.safety);
  Result r;
  r.code = ev.t_min ? kSuccess : kNoEvent;
  if (format == "csv") {
    std::ostringstream s;
    s << "step,time,family,labels,happened,admissible,distance,threshold,gap,selected\n";
    for (const auto& scan : ev.scans) {
      for (const auto& v : scan.candidates) {
        s << v.step << ',' << num(v.time) << ',' << v.family << ',' << join(v.partition.labels(), ';')
          << ',' << v.happened << ',' << v.admissible << ',' << num(v.distance) << ','
          << num(v.threshold) << ',' << num(v.gap) << ','
          << (scan.selected && *scan.selected == v.family) << '\n';
      }
    }
    r.primary = s.str();
    return r;
  }
  Json j;
  j["command"] = "detect";
  j["safety"] = cfg.run.safety;
  j["event"] = ev.t_min.has_value();
  j["t_min"] = step_ref(fm.frame, ev.t_min);
  j["t_star"] = step_ref(fm.frame, ev.t_star);
  j["run_end"] = step_ref(fm.frame, ev.run_end);
  if (ev.t_min) {
    const StepScan& s = ev.scans[*ev.t_min];
    j["verdict"] = to_json(s.candidates[*s.selected]);
  } else {
    j["verdict"] = nullptr;
  }
  Json scans = Json::array();
  for (const auto& s : ev.scans) scans.push_back(to_json(s));
  j["scans"] = std::move(scans);
  r.primary = dump(j);
  return r;
}

Result cmd_trajectory(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& format) {
  const FrameModel& fm = frame_model(cfg, "trajectory");
  TrajectoryOptions opt;
  opt.safety = cfg.run.safety;
  opt.mode = cfg.run.detection;
  opt.record = cfg.run.record;
  opt.seed = seed;
  const std::size_t count = cfg.run.trajectories;
  const bool keep = cfg.run.keep_trajectories.value_or(count <= 100);

  std::map<std::vector<std::string>, std::uint64_t> histogram;
  std::ostringstream csv;
  csv << "trajectory,step,time,family,outcome,probability,recorded\n";
  Json runs = Json::array();
  for (std::size_t i = 0; i < count; ++i) {
    opt.stream = i;
    const Trajectory t = run_trajectory(fm.frame, fm.initial, opt);
    std::vector<std::string> outcomes;
    for (const auto& e : t.history) outcomes.push_back(e.outcome);
    ++histogram[outcomes];
    if (!keep) continue;
    if (format == "csv") {
      for (const auto& b : t.branch_log) {
        csv << i << ',' << b.step << ',' << num(b.event.time) << ',' << b.family << ','
            << b.event.outcome << ',' << num(b.event.probability) << ',' << b.event.recorded << '\n';
      }
    } else {
      Json tj = to_json(t);
      Json entry;
      entry["index"] = i;
      for (auto& [k, v] : tj.items()) entry[k] = v;
      runs.push_back(std::move(entry));
    }
  }
  Result r;
  if (format == "csv") {
    if (!keep) {
      csv.str("");
      csv << "history,count,fraction\n";
      for (const auto& [h, c] : histogram) {
        csv << '"' << join(h, ',') << '"' << ',' << c << ',' << num(double(c) / double(count)) << '\n';
      }
    }
    r.primary = csv.str();
    return r;
  }
  Json j;
  j["command"] = "trajectory";
  j["seed"] = seed;
  j["trajectories"] = count;
  j["detection"] = cfg.run.detection == DetectionMode::kCriterion ? "criterion" : "forced";
  Json hist = Json::array();
  for (const auto& [h, c] : histogram) {
    Json e;
    e["history"] = h;
    e["count"] = c;
    e["fraction"] = double(c) / double(count);
    hist.push_back(std::move(e));
  }
  j["histogram"] = std::move(hist);
  if (keep) j["runs"] = std::move(runs);
  r.primary = dump(j);
  return r;
}

std::size_t default_consistency_length(const HeisenbergFrame& frame) {
  std::size_t n = 0;
  const std::size_t obs = frame.observable_steps().size();
  while (n < obs && protocol_count(frame, n + 1) <= 1000000) ++n;
  return n;
}

Result cmd_lsw(const ExperimentConfig& cfg, const Options& o, const std::string& format) {
  const FrameModel& fm = frame_model(cfg, "lsw");
  std::vector<std::string> labels;
  if (o.protocol) {
    labels = split_protocol(*o.protocol);
  } else if (cfg.run.protocol) {
    labels = *cfg.run.protocol;
  } else {
    throw UsageError("lsw: no protocol given (use --protocol or run.protocol)");
  }
  const MeasurementProtocol protocol = MeasurementProtocol::from_labels(fm.frame, labels);
  const LswValue v = lsw_evaluate(fm.frame, fm.initial, protocol);
  Result r;
  std::optional<ConsistencyReport> rep;
  if (o.check_consistency) {
    const std::size_t n = cfg.run.consistency_length.value_or(default_consistency_length(fm.frame));
    rep = consistency_check(fm.frame, fm.initial, n);
    if (rep->max_prefix_residual > kConsistencyLimit || rep->normalization_residual > kConsistencyLimit) {
      r.code = kInvariantFailure;
    }
  }
  if (format == "csv") {
    std::ostringstream s;
    s << "protocol,probability,raw,clamped_by\n";
    s << '"' << join(labels, ',') << '"' << ',' << num(v.probability) << ',' << num(v.raw) << ','
      << num(v.clamped_by) << '\n';
    if (rep) {
      s << "\nlength,leaves,max_prefix_residual,normalization_residual,max_clamp\n";
      s << rep->length << ',' << rep->leaves << ',' << num(rep->max_prefix_residual) << ','
        << num(rep->normalization_residual) << ',' << num(rep->max_clamp) << '\n';
    }
    r.primary = s.str();
    return r;
  }
  Json j;
  j["command"] = "lsw";
  j["protocol"] = labels;
  j["probability"] = v.probability;
  j["raw"] = v.raw;
  j["clamped_by"] = v.clamped_by;
  if (rep) {
    Json c;
    c["length"] = rep->length;
    c["leaves"] = rep->leaves;
    c["max_prefix_residual"] = rep->max_prefix_residual;
    c["normalization_residual"] = rep->normalization_residual;
    c["max_clamp"] = rep->max_clamp;
    c["passed"] = r.code == kSuccess;
    j["consistency"] = std::move(c);
  }
  r.primary = dump(j);
  return r;
}

struct MesoRow {
  std::size_t n;
  BornRuleRow born;
  double epsilon;
  double exact_coverage;
  double coverage;
  std::optional<double> cross_mass;
  std::optional<double> reference_exponent;
  std::optional<double> mean_entropy;
};

Result cmd_mesoscopic(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& format) {
  const DeFinettiModel& model = definetti_model(cfg, "mesoscopic");
  const RunSection& run = cfg.run;
  const std::size_t m = model.size();
  const bool sampled = run.count > 0;

  std::vector<MesoRow> rows;
  for (std::size_t n : run.n_values) {
    const BornRuleResult br = born_rule_experiment(model, run.classification, n, run.count, seed);
    // Same streams as the experiment, so these are the classified protocols.
    std::vector<double> entropy_sum(m, 0.0);
    std::vector<std::size_t> per_nu(m, 0);
    for (std::size_t i = 0; i < run.count; ++i) {
      const SampledProtocol sp = sample_protocol(model, n, seed, i);
      entropy_sum[sp.nu] += posterior(model, sp.clicks).entropy_bits;
      ++per_nu[sp.nu];
    }
    for (std::size_t nu = 0; nu < m; ++nu) {
      MesoRow row{n, br.rows[nu], br.epsilon, br.exact_coverage, br.coverage, {}, {}, {}};
      for (std::size_t other = 0; other < m; ++other) {
        if (other == nu) continue;
        const double mass = band_mass(model, nu, other, n, br.epsilon);
        const double ref = relative_entropy(model, nu, other) * std::log(2.0);
        row.cross_mass = std::max(row.cross_mass.value_or(0.0), mass);
        row.reference_exponent = std::min(row.reference_exponent.value_or(ref), ref);
      }
      if (per_nu[nu] > 0) row.mean_entropy = entropy_sum[nu] / double(per_nu[nu]);
      rows.push_back(row);
    }
  }

  Json summary;
  summary["command"] = "mesoscopic";
  summary["seed"] = seed;
  Json mj;
  mj["weights"] = model.weights();
  mj["p_plus"] = model.p_plus();
  mj["tau"] = model.tau();
  mj["kappa"] = model.kappa();
  summary["model"] = std::move(mj);
  if (m >= 2) {
    const DetectionTime dt = detection_time(model, run.sanov);
    Json d;
    d["sigma_min_bits"] = dt.sigma_min_bits;
    d["T"] = dt.time;
    d["n_star"] = dt.n_star ? Json(*dt.n_star) : Json(nullptr);
    d["calibration"] = dt.calibration;
    Json pairs = Json::array();
    for (const auto& p : dt.pairs) {
      pairs.push_back(Json{{"nu1", p.nu1}, {"nu2", p.nu2}, {"sigma_bits", p.sigma_bits}});
    }
    d["pairs"] = std::move(pairs);
    summary["detection_time"] = std::move(d);

    Json sanov = Json::array();
    for (const auto& p : dt.pairs) {
      const SanovReport rep = sanov_check(model, p.nu1, p.nu2, run.sanov, run.sanov_n_values);
      Json s;
      s["nu1"] = rep.nu1;
      s["nu2"] = rep.nu2;
      s["reference_exponent"] = rep.reference_exponent;
      s["prefactor"] = rep.prefactor;
      s["holds"] = rep.holds;
      Json srows = Json::array();
      for (const auto& row : rep.rows) {
        srows.push_back(Json{{"n", row.n},
                             {"epsilon", row.epsilon},
                             {"band_mass", row.band_mass},
                             {"empirical_exponent", row.empirical_exponent},
                             {"band_kl_exponent", row.band_kl_exponent},
                             {"bound", row.bound}});
      }
      s["rows"] = std::move(srows);
      sanov.push_back(std::move(s));
    }
    summary["sanov"] = std::move(sanov);
  }
  if (run.purification_count > 0) {
    double total = 0.0;
    for (std::size_t i = 0; i < run.purification_count; ++i) {
      const SampledProtocol sp = sample_protocol(model, run.purification_length, seed, i);
      total += posterior(model, sp.clicks).entropy_bits;
    }
    Json p;
    p["length"] = run.purification_length;
    p["count"] = run.purification_count;
    p["mean_entropy_bits"] = total / double(run.purification_count);
    summary["purification"] = std::move(p);
  }

  std::ostringstream csv;
  csv << "n,nu,pi,epsilon,exact_mass,exact_coverage,max_cross_band_mass,empirical_exponent,"
         "reference_exponent";
  if (sampled) csv << ",count,empirical_mass,empirical_coverage,mean_posterior_entropy_bits";
  csv << '\n';
  Json jrows = Json::array();
  for (const auto& row : rows) {
    std::optional<double> emp_exp;
    if (row.cross_mass.value_or(0.0) > 0.0) emp_exp = -std::log(*row.cross_mass) / double(row.n);
    auto opt = [](const std::optional<double>& x) { return x ? num(*x) : std::string(); };
    csv << row.n << ',' << row.born.nu << ',' << num(row.born.weight) << ',' << num(row.epsilon)
        << ',' << num(row.born.exact) << ',' << num(row.exact_coverage) << ','
        << opt(row.cross_mass) << ',' << opt(emp_exp) << ',' << opt(row.reference_exponent);
    if (sampled) {
      csv << ',' << run.count << ',' << num(row.born.empirical) << ',' << num(row.coverage) << ','
          << opt(row.mean_entropy);
    }
    csv << '\n';
    auto jopt = [](const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); };
    Json jr{{"n", row.n},
            {"nu", row.born.nu},
            {"pi", row.born.weight},
            {"epsilon", row.epsilon},
            {"exact_mass", row.born.exact},
            {"exact_coverage", row.exact_coverage},
            {"max_cross_band_mass", jopt(row.cross_mass)},
            {"empirical_exponent", jopt(emp_exp)},
            {"reference_exponent", jopt(row.reference_exponent)}};
    if (sampled) {
      jr["count"] = run.count;
      jr["empirical_mass"] = row.born.empirical;
      jr["empirical_coverage"] = row.coverage;
      jr["mean_posterior_entropy_bits"] = jopt(row.mean_entropy);
    }
    jrows.push_back(std::move(jr));
  }

  Result r;
  if (format == "csv") {
    r.primary = csv.str();
    r.summary = dump(summary);
  } else {
    summary["rows"] = std::move(jrows);
    r.primary = dump(summary);
  }
  return r;
}

std::string summary_path(const std::string& out) {
  const std::string ext = ".csv";
  if (out.size() > ext.size() && out.compare(out.size() - ext.size(), ext.size(), ext) == 0) {
    return out.substr(0, out.size() - ext.size()) + ".summary.json";
  }
  return out + ".summary.json";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw UsageError("cannot open output file '" + path + "'");
  f << content;
  if (!f) throw UsageError("failed writing output file '" + path + "'");
}

int execute(const std::string& command, const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load_config(o.config);
  const std::uint64_t seed = o.seed.value_or(cfg.run.seed);
  const std::string format = o.format.value_or(cfg.output.format);
  const std::optional<std::string> path = o.out ? o.out : cfg.output.path;

  Result r;
  if (command == "detect") {
    r = cmd_detect(cfg, format);
  } else if (command == "trajectory") {
    r = cmd_trajectory(cfg, seed, format);
  } else if (command == "lsw") {
    r = cmd_lsw(cfg, o, format);
  } else {
    r = cmd_mesoscopic(cfg, seed, format);
  }
  if (path) {
    write_file(*path, r.primary);
    if (r.summary) write_file(summary_path(*path), *r.summary);
  } else {
    out << r.primary;
  }
  return r.code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event detection, history measures and indirect-measurement statistics", "ethsim"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"detect", "Scan a frame for the earliest event"},
      {"trajectory", "Sample event histories"},
      {"lsw", "Evaluate the history measure of a protocol"},
      {"mesoscopic", "Indirect-measurement statistics of a mixture model"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", o.seed, "Override run.seed");
    sub->add_option("--out", o.out, "Output file (default: stdout)");
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    if (name == "lsw") {
      sub->add_option("--protocol", o.protocol, "Comma-separated outcome labels");
      sub->add_flag("--check-consistency", o.check_consistency,
                    "Also verify the prefix-marginal identity exhaustively");
    }
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "ethsim: " << e.what() << "\n";
    return kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return execute(command, o, out);
  } catch (const SchemaError& e) {
    err << "ethsim: config error at " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidArgument& e) {
    err << "ethsim: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "ethsim: numerical failure: " << e.what() << "\n";
    return kInvariantFailure;
  }
}

}  // namespace ethsim::cli
