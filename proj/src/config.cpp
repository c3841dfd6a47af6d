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

#include "ethsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "ethsim/algebra.hpp"
#include "ethsim/error.hpp"

namespace ethsim {

namespace {

// A JSON value together with its pointer, so every error names its location.
struct Node {
  const Json& j;
  std::string path;

  Node operator[](const std::string& key) const { return Node{j.at(key), path + "/" + key}; }
  Node operator[](std::size_t i) const { return Node{j.at(i), path + "/" + std::to_string(i)}; }
  bool has(const std::string& key) const { return j.contains(key); }

  [[noreturn]] void fail(const std::string& message) const { throw SchemaError(path, message); }

  void require_object(std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail("expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
      if (!ok.count(key)) throw SchemaError(path + "/" + key, "unknown key");
    }
  }
  Node required(const std::string& key) const {
    if (!has(key)) throw SchemaError(path + "/" + key, "missing required key");
    return (*this)[key];
  }
  const Json& array() const {
    if (!j.is_array()) fail("expected an array");
    return j;
  }
  double number() const {
    if (!j.is_number()) fail("expected a number");
    return j.get<double>();
  }
  std::uint64_t unsigned_int() const {
    if (!j.is_number_unsigned()) fail("expected a non-negative integer");
    return j.get<std::uint64_t>();
  }
  std::size_t positive() const {
    const auto v = unsigned_int();
    if (v == 0) fail("expected a positive integer");
    return static_cast<std::size_t>(v);
  }
  std::string string() const {
    if (!j.is_string()) fail("expected a string");
    return j.get<std::string>();
  }
  bool boolean() const {
    if (!j.is_boolean()) fail("expected true or false");
    return j.get<bool>();
  }
  std::vector<double> numbers() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < array().size(); ++i) out.push_back((*this)[i].number());
    return out;
  }
  std::vector<std::size_t> positives() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < array().size(); ++i) out.push_back((*this)[i].positive());
    return out;
  }
  std::vector<std::string> strings() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < array().size(); ++i) out.push_back((*this)[i].string());
    return out;
  }
  Operator op() const { return operator_from_json(j, path); }
};

// Re-raises library validation errors as schema errors at `node`.
template <typename F>
auto at(const Node& node, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const InvalidArgument& e) {
    node.fail(e.what());
  }
}

DensityState parse_state(const Node& n, std::size_t dim) {
  n.require_object({"diagonal", "pure", "density"});
  if (n.j.size() != 1) n.fail("expected exactly one of diagonal, pure, density");
  if (n.has("diagonal")) {
    const Node d = n["diagonal"];
    const auto w = d.numbers();
    if (w.size() != dim) d.fail("expected " + std::to_string(dim) + " weights");
    std::vector<Complex> c(w.begin(), w.end());
    return at(d, [&] { return DensityState(Operator::diagonal(std::span<const Complex>(c))); });
  }
  if (n.has("pure")) {
    const Node p = n["pure"];
    p.require_object({"re", "im"});
    const auto re = p.required("re").numbers();
    const auto im = p.has("im") ? p["im"].numbers() : std::vector<double>(re.size(), 0.0);
    if (re.size() != dim || im.size() != dim) p.fail("expected " + std::to_string(dim) + " amplitudes");
    Vector psi(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) psi(static_cast<Eigen::Index>(i)) = Complex(re[i], im[i]);
    return at(p, [&] { return DensityState::pure(psi); });
  }
  const Node d = n["density"];
  Operator rho = d.op();
  if (rho.dim() != dim) d.fail("dimension does not match the model");
  return at(d, [&] { return DensityState(std::move(rho)); });
}

PartitionOfUnity parse_partition(const Node& n, std::size_t dim) {
  n.require_object({"labels", "projections", "basis", "observable"});
  if (n.has("observable")) {
    if (n.has("projections") || n.has("basis")) n.fail("observable excludes projections and basis");
    const Node o = n["observable"];
    const Operator x = o.op();
    if (x.dim() != dim) o.fail("dimension does not match the model");
    PartitionOfUnity p = at(o, [&] { return PartitionOfUnity::from_spectral(spectral_decompose(x)); });
    if (n.has("labels")) {
      const Node l = n["labels"];
      auto labels = l.strings();
      if (labels.size() != p.size()) {
        l.fail("observable has " + std::to_string(p.size()) + " distinct eigenvalues");
      }
      return at(l, [&] { return PartitionOfUnity(std::move(labels), p.projections()); });
    }
    return p;
  }
  const Node l = n.required("labels");
  auto labels = l.strings();
  if (n.has("basis")) {
    const Node b = n["basis"];
    if (n.has("projections")) n.fail("basis excludes projections");
    if (b.string() != "computational") b.fail("only \"computational\" is supported");
    if (labels.size() != dim) l.fail("computational basis needs " + std::to_string(dim) + " labels");
    return at(n, [&] { return PartitionOfUnity::computational(std::move(labels)); });
  }
  const Node ps = n.required("projections");
  std::vector<Operator> ops;
  for (std::size_t i = 0; i < ps.array().size(); ++i) {
    ops.push_back(ps[i].op());
    if (ops.back().dim() != dim) ps[i].fail("dimension does not match the model");
  }
  return at(n, [&] { return PartitionOfUnity(std::move(labels), std::move(ops)); });
}

FiniteAlgebra parse_restriction(const Node& n, std::size_t dim) {
  n.require_object({"generators"});
  const Node g = n.required("generators");
  std::vector<Operator> gens;
  for (std::size_t i = 0; i < g.array().size(); ++i) {
    gens.push_back(g[i].op());
    if (gens.back().dim() != dim) g[i].fail("dimension does not match the model");
  }
  if (gens.empty()) g.fail("expected at least one generator");
  return at(g, [&] { return generate_algebra(gens); });
}

FrameModel parse_frame(const Node& m) {
  m.require_object({"kind", "dim", "initial_state", "step_propagator", "times"});
  const std::size_t dim = m.required("dim").positive();
  DensityState initial = parse_state(m.required("initial_state"), dim);
  std::optional<Operator> step;
  if (m.has("step_propagator")) {
    const Node s = m["step_propagator"];
    step = s.op();
    if (step->dim() != dim) s.fail("dimension does not match the model");
    if (!step->is_unitary()) s.fail("step propagator is not unitary");
  }
  const Node times = m.required("times");
  if (times.array().empty()) times.fail("expected at least one time");
  std::vector<FrameStep> steps;
  Operator power = Operator::identity(dim);
  for (std::size_t k = 0; k < times.j.size(); ++k) {
    const Node t = times[k];
    t.require_object({"t", "propagator", "partitions", "restriction"});
    FrameStep fs;
    fs.time = t.required("t").number();
    if (t.has("propagator")) {
      fs.propagator = t["propagator"].op();
      if (fs.propagator.dim() != dim) t["propagator"].fail("dimension does not match the model");
    } else {
      fs.propagator = power;
    }
    if (step) power = *step * power;
    if (t.has("partitions")) {
      const Node ps = t["partitions"];
      for (std::size_t i = 0; i < ps.array().size(); ++i) fs.partitions.push_back(parse_partition(ps[i], dim));
    }
    if (t.has("restriction")) fs.restriction = parse_restriction(t["restriction"], dim);
    steps.push_back(std::move(fs));
  }
  HeisenbergFrame frame = at(times, [&] { return HeisenbergFrame(dim, std::move(steps)); });
  return FrameModel{std::move(frame), std::move(initial)};
}

DeFinettiModel parse_definetti(const Node& m) {
  m.require_object({"kind", "weights", "p_plus", "tau"});
  const Node wn = m.required("weights");
  const Node pn = m.required("p_plus");
  auto w = wn.numbers();
  auto p = pn.numbers();
  if (w.empty()) wn.fail("expected at least one weight");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0)) wn[i].fail("weight must be non-negative");
  }
  if (p.size() != w.size()) pn.fail("expected " + std::to_string(w.size()) + " entries, one per weight");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) pn[i].fail("probability must lie in [0, 1]");
  }
  const double tau = m.has("tau") ? m["tau"].number() : 1.0;
  if (!(tau > 0.0)) m["tau"].fail("tau must be positive");
  return at(m, [&] { return DeFinettiModel(std::move(w), std::move(p), tau); });
}

BandSchedule schedule(const Node& n, double prefactor) {
  BandSchedule s{n.number(), prefactor};
  if (!(s.exponent > 0.0 && s.exponent < 0.5)) n.fail("band exponent must lie in (0, 1/2)");
  return s;
}

RunSection parse_run(const Node& r) {
  r.require_object({"safety", "seed", "trajectories", "record", "detection", "keep_trajectories",
                    "protocol", "consistency_length", "n_values", "count",
                    "classification_exponent", "sanov_exponent", "sanov_n_values",
                    "purification_length", "purification_count"});
  RunSection run;
  if (r.has("safety")) {
    run.safety = r["safety"].number();
    if (!(run.safety > 0.0 && run.safety < 1.0)) r["safety"].fail("safety must lie in (0, 1)");
  }
  if (r.has("seed")) run.seed = r["seed"].unsigned_int();
  if (r.has("trajectories")) run.trajectories = r["trajectories"].positive();
  if (r.has("record")) {
    const Node rec = r["record"];
    if (rec.j.is_array()) {
      std::set<std::size_t> s;
      for (std::size_t i = 0; i < rec.j.size(); ++i) s.insert(std::size_t(rec[i].unsigned_int()));
      run.record = RecordPolicy::at_steps(std::move(s));
    } else {
      const std::string v = rec.string();
      if (v == "always") {
        run.record = RecordPolicy::always();
      } else if (v == "never") {
        run.record = RecordPolicy::never();
      } else {
        rec.fail("expected \"always\", \"never\" or a list of step indices");
      }
    }
  }
  if (r.has("detection")) {
    const std::string v = r["detection"].string();
    if (v == "criterion") {
      run.detection = DetectionMode::kCriterion;
    } else if (v == "forced") {
      run.detection = DetectionMode::kForced;
    } else {
      r["detection"].fail("expected \"criterion\" or \"forced\"");
    }
  }
  if (r.has("keep_trajectories")) run.keep_trajectories = r["keep_trajectories"].boolean();
  if (r.has("protocol")) run.protocol = r["protocol"].strings();
  if (r.has("consistency_length")) run.consistency_length = std::size_t(r["consistency_length"].unsigned_int());
  if (r.has("n_values")) run.n_values = r["n_values"].positives();
  if (r.has("count")) run.count = std::size_t(r["count"].unsigned_int());
  if (r.has("classification_exponent")) run.classification = schedule(r["classification_exponent"], 1.0);
  if (r.has("sanov_exponent")) run.sanov = schedule(r["sanov_exponent"], 1.0);
  if (r.has("sanov_n_values")) run.sanov_n_values = r["sanov_n_values"].positives();
  if (r.has("purification_length")) run.purification_length = r["purification_length"].positive();
  if (r.has("purification_count")) run.purification_count = std::size_t(r["purification_count"].unsigned_int());
  return run;
}

OutputSection parse_output(const Node& o) {
  o.require_object({"path", "format"});
  OutputSection out;
  if (o.has("path")) out.path = o["path"].string();
  if (o.has("format")) {
    out.format = o["format"].string();
    if (out.format != "json" && out.format != "csv") o["format"].fail("expected \"json\" or \"csv\"");
  }
  return out;
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    // e.byte is one past the offending character.
    throw SchemaError("", "syntax error at " + line_column(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  const Node root{doc, ""};
  root.require_object({"schema", "model", "run", "output"});
  const Node schema = root.required("schema");
  if (schema.unsigned_int() != std::uint64_t(kConfigSchema)) {
    schema.fail("unsupported schema version; expected " + std::to_string(kConfigSchema));
  }
  const Node m = root.required("model");
  if (!m.j.is_object()) m.fail("expected an object");
  const std::string kind = m.required("kind").string();
  RunSection run = root.has("run") ? parse_run(root["run"]) : RunSection{};
  OutputSection out = root.has("output") ? parse_output(root["output"]) : OutputSection{};
  if (kind == "frame") {
    return ExperimentConfig{kConfigSchema, parse_frame(m), std::move(run), std::move(out)};
  }
  if (kind == "definetti") {
    return ExperimentConfig{kConfigSchema, parse_definetti(m), std::move(run), std::move(out)};
  }
  m["kind"].fail("expected \"frame\" or \"definetti\"");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("", "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace ethsim
