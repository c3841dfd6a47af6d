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

#include "ethsim/serialize.hpp"

namespace ethsim {

namespace {

Json real_rows(const Matrix& m, bool imag) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = imag ? m(r, c).imag() : m(r, c).real();
      row.push_back(v == 0.0 ? 0.0 : v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void read_part(const Json& j, const std::string& path, std::size_t dim, Matrix& m, bool imag) {
  if (!j.is_array() || j.size() != dim) {
    throw SchemaError(path, "expected an array of " + std::to_string(dim) + " rows");
  }
  for (std::size_t r = 0; r < dim; ++r) {
    const Json& row = j[r];
    const std::string rp = path + "/" + std::to_string(r);
    if (!row.is_array() || row.size() != dim) {
      throw SchemaError(rp, "expected a row of " + std::to_string(dim) + " numbers");
    }
    for (std::size_t c = 0; c < dim; ++c) {
      if (!row[c].is_number()) throw SchemaError(rp + "/" + std::to_string(c), "expected a number");
      const double v = row[c].get<double>();
      auto& z = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      z = imag ? Complex(z.real(), v) : Complex(v, z.imag());
    }
  }
}

Json operator_list(const std::vector<Operator>& ops) {
  Json a = Json::array();
  for (const auto& o : ops) a.push_back(to_json(o));
  return a;
}

}  // namespace

SchemaError::SchemaError(const std::string& path, const std::string& message)
    : InvalidArgument((path.empty() ? std::string("/") : path) + ": " + message), path_(path) {}

Json to_json(const Operator& a) {
  Json j;
  j["dim"] = a.dim();
  j["re"] = real_rows(a.matrix(), false);
  j["im"] = real_rows(a.matrix(), true);
  return j;
}

Operator operator_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an operator object {dim, re, im}");
  if (!j.contains("dim") || !j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0) {
    throw SchemaError(path + "/dim", "expected a positive integer");
  }
  const auto dim = j["dim"].get<std::size_t>();
  if (!j.contains("re")) throw SchemaError(path + "/re", "missing real part");
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix m = Matrix::Zero(n, n);
  read_part(j["re"], path + "/re", dim, m, false);
  if (j.contains("im")) read_part(j["im"], path + "/im", dim, m, true);
  return Operator(std::move(m));
}

Json to_json(const FiniteAlgebra& a) {
  Json j;
  j["dim"] = a.dim();
  j["basis"] = operator_list(a.basis());
  return j;
}

Json to_json(const SpectralDecomposition& sd) {
  Json j;
  j["eigenvalues"] = sd.eigenvalues;
  j["projections"] = operator_list(sd.projections);
  return j;
}

Json to_json(const CentralizerReport& r) {
  Json j;
  j["centralizer"] = to_json(r.centralizer);
  j["center"] = to_json(r.center);
  j["state_spectral"] = to_json(r.state_spectral);
  j["reduced_density"] = to_json(r.reduced_density);
  j["center_projections"] = operator_list(r.center_projections);
  return j;
}

Json to_json(const PartitionOfUnity& p) {
  Json j;
  j["labels"] = p.labels();
  j["projections"] = operator_list(p.projections());
  return j;
}

Json to_json(const DetectionVerdict& v) {
  Json j;
  j["time"] = v.time;
  j["step"] = v.step;
  j["family"] = v.family;
  j["happened"] = v.happened;
  j["admissible"] = v.admissible;
  j["distance"] = v.distance;
  j["threshold"] = v.threshold;
  j["gap"] = v.gap;
  j["labels"] = v.partition.labels();
  return j;
}

Json to_json(const StepScan& s) {
  Json j;
  j["time"] = s.time;
  j["step"] = s.step;
  Json c = Json::array();
  for (const auto& v : s.candidates) c.push_back(to_json(v));
  j["candidates"] = std::move(c);
  j["selected"] = s.selected ? Json(*s.selected) : Json(nullptr);
  j["ambiguous"] = s.ambiguous;
  j["margin"] = s.margin;
  return j;
}

Json to_json(const EventRecord& e) {
  Json j;
  j["time"] = e.time;
  j["outcome"] = e.outcome;
  j["probability"] = e.probability;
  j["recorded"] = e.recorded;
  return j;
}

Json to_json(const Trajectory& t) {
  Json j;
  Json h = Json::array();
  for (const auto& e : t.history) h.push_back(to_json(e));
  j["history"] = std::move(h);
  Json log = Json::array();
  for (const auto& b : t.branch_log) {
    Json e = to_json(b.event);
    e["step"] = b.step;
    e["family"] = b.family;
    e["distance"] = b.distance;
    e["threshold"] = b.threshold;
    e["ambiguous"] = b.ambiguous;
    log.push_back(std::move(e));
  }
  j["branch_log"] = std::move(log);
  j["final_state"] = to_json(t.final_state.matrix());
  return j;
}

}  // namespace ethsim
