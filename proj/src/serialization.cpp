// Copyright 2026 The liespline Authors
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

#include "liespline/serialization.hpp"

#include <sstream>

namespace liespline {

namespace {

Json vec_to_json(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vec_from_json(const Json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

Eigen::Vector3d vec3_from_json(const Json& j) {
  if (j.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <class S>
void spline_header_from_json(const Json& j, S* s) {
  s->order = j.at("k").get<int>();
  s->t0 = j.at("t0").get<double>();
  s->dt = j.at("dt").get<double>();
}

const char* kind_name(ResidualKind k) {
  switch (k) {
    case ResidualKind::kValue:
      return "value";
    case ResidualKind::kVelocity:
      return "velocity";
    case ResidualKind::kAcceleration:
      return "acceleration";
    case ResidualKind::kProjection:
      return "projection";
    case ResidualKind::kGyro:
      return "gyro";
    case ResidualKind::kAccel:
      return "accel";
  }
  return "?";
}

ResidualKind kind_from_name(const std::string& name) {
  if (name == "value") return ResidualKind::kValue;
  if (name == "velocity") return ResidualKind::kVelocity;
  if (name == "acceleration") return ResidualKind::kAcceleration;
  if (name == "projection") return ResidualKind::kProjection;
  if (name == "gyro") return ResidualKind::kGyro;
  if (name == "accel") return ResidualKind::kAccel;
  throw std::invalid_argument("unknown residual kind '" + name + "'");
}

}  // namespace

Json to_json(const Rotation3& r) {
  Json arr = Json::array();
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) arr.push_back(r(row, col));
  return arr;
}

Json to_json(const RigidTransformd& x) {
  return Json{{"R", to_json(x.R)}, {"t", Json::array({x.t.x(), x.t.y(), x.t.z()})}};
}

Rotation3 rotation_from_json(const Json& j) {
  if (j.size() != 9) throw std::invalid_argument("rotation must be a row-major 9-array");
  Rotation3 r;
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) r(row, col) = j[3 * row + col].get<double>();
  return r;
}

RigidTransformd rigid_from_json(const Json& j) {
  return {rotation_from_json(j.at("R")), vec3_from_json(j.at("t"))};
}

Json to_json(const Spline<So3d>& s) {
  Json knots = Json::array();
  for (const auto& k : s.knots) knots.push_back(to_json(k));
  return Json{{"group", "SO3"}, {"k", s.order}, {"t0", s.t0}, {"dt", s.dt}, {"knots", knots}};
}

Json to_json(const Spline<Se3d>& s) {
  Json knots = Json::array();
  for (const auto& k : s.knots) knots.push_back(to_json(k));
  return Json{{"group", "SE3"}, {"k", s.order}, {"t0", s.t0}, {"dt", s.dt}, {"knots", knots}};
}

Json to_json(const Spline<Rdd<3>>& s) {
  Json knots = Json::array();
  for (const auto& k : s.knots) knots.push_back(Json::array({k.x(), k.y(), k.z()}));
  return Json{{"group", "Rd"}, {"d", 3},      {"k", s.order},
              {"t0", s.t0},    {"dt", s.dt},  {"knots", knots}};
}

Spline<So3d> so3_spline_from_json(const Json& j) {
  if (j.at("group") != "SO3") throw std::invalid_argument("expected an SO3 spline");
  Spline<So3d> s;
  spline_header_from_json(j, &s);
  for (const auto& k : j.at("knots")) s.knots.push_back(rotation_from_json(k));
  return s;
}

Spline<Se3d> se3_spline_from_json(const Json& j) {
  if (j.at("group") != "SE3") throw std::invalid_argument("expected an SE3 spline");
  Spline<Se3d> s;
  spline_header_from_json(j, &s);
  for (const auto& k : j.at("knots")) s.knots.push_back(rigid_from_json(k));
  return s;
}

Spline<Rdd<3>> r3_spline_from_json(const Json& j) {
  if (j.at("group") != "Rd") throw std::invalid_argument("expected an Rd spline");
  if (j.contains("d") && j.at("d").get<int>() != 3) {
    throw std::invalid_argument("only d = 3 Euclidean splines are supported in problems");
  }
  Spline<Rdd<3>> s;
  spline_header_from_json(j, &s);
  for (const auto& k : j.at("knots")) s.knots.push_back(vec3_from_json(k));
  return s;
}

Json to_json(const Problem& p) {
  Json splines = Json::object();
  if (p.so3) splines["so3"] = to_json(*p.so3);
  if (p.r3) splines["r3"] = to_json(*p.r3);
  if (p.se3) splines["se3"] = to_json(*p.se3);

  Json residuals = Json::array();
  for (const auto& rb : p.residuals) {
    Json r{{"kind", kind_name(rb.kind)}, {"t", rb.t}, {"measurement", vec_to_json(rb.measurement)}};
    if (rb.weight.size() > 0) {
      if (rb.weight.isApprox(rb.weight(0, 0) * Eigen::MatrixXd::Identity(rb.weight.rows(),
                                                                         rb.weight.cols()))) {
        r["weight"] = rb.weight(0, 0);
      } else {
        Json w = Json::array();
        for (int row = 0; row < rb.weight.rows(); ++row) {
          Json wr = Json::array();
          for (int col = 0; col < rb.weight.cols(); ++col) wr.push_back(rb.weight(row, col));
          w.push_back(wr);
        }
        r["weight"] = w;
      }
    }
    if (rb.kind == ResidualKind::kProjection) {
      r["camera"] = rb.camera_id;
      r["point"] = Json::array({rb.point.x(), rb.point.y(), rb.point.z()});
    }
    residuals.push_back(std::move(r));
  }

  Json out{{"splines", splines}, {"residuals", residuals}};
  if (p.calib) {
    Json tic = Json::array();
    for (const auto& x : p.calib->T_ic) tic.push_back(to_json(x));
    out["calibration"] = Json{{"b_g", vec_to_json(p.calib->b_g)},
                              {"b_a", vec_to_json(p.calib->b_a)},
                              {"g", vec_to_json(p.calib->g)},
                              {"T_ic", tic}};
    out["camera"] = Json{{"fx", p.camera.fx}, {"fy", p.camera.fy}, {"cx", p.camera.cx},
                         {"cy", p.camera.cy}, {"width", p.camera.width},
                         {"height", p.camera.height}};
  }
  return out;
}

Problem problem_from_json(const Json& j) {
  Problem p;
  const Json& splines = j.at("splines");
  if (splines.contains("so3")) p.so3 = so3_spline_from_json(splines.at("so3"));
  if (splines.contains("r3")) p.r3 = r3_spline_from_json(splines.at("r3"));
  if (splines.contains("se3")) p.se3 = se3_spline_from_json(splines.at("se3"));

  for (const auto& r : j.at("residuals")) {
    ResidualBlock rb;
    rb.kind = kind_from_name(r.at("kind").get<std::string>());
    rb.t = r.at("t").get<double>();
    rb.measurement = vec_from_json(r.at("measurement"));
    if (r.contains("weight")) {
      const int dim = static_cast<int>(rb.measurement.size());
      const int wdim = rb.kind == ResidualKind::kValue
                           ? (p.se3 ? 6 : 3)  // tangent-space error dimension
                           : dim;
      if (r.at("weight").is_number()) {
        rb.weight = r.at("weight").get<double>() * Eigen::MatrixXd::Identity(wdim, wdim);
      } else {
        const Json& w = r.at("weight");
        rb.weight.resize(w.size(), w.at(0).size());
        for (size_t row = 0; row < w.size(); ++row)
          for (size_t col = 0; col < w.at(row).size(); ++col)
            rb.weight(row, col) = w[row][col].get<double>();
      }
    }
    if (r.contains("camera")) rb.camera_id = r.at("camera").get<int>();
    if (r.contains("point")) rb.point = vec3_from_json(r.at("point"));
    p.residuals.push_back(std::move(rb));
  }

  if (j.contains("calibration")) {
    CalibrationParams c;
    const Json& jc = j.at("calibration");
    c.b_g = vec3_from_json(jc.at("b_g"));
    c.b_a = vec3_from_json(jc.at("b_a"));
    c.g = vec3_from_json(jc.at("g"));
    for (const auto& x : jc.at("T_ic")) c.T_ic.push_back(rigid_from_json(x));
    p.calib = std::move(c);
  }
  if (j.contains("camera")) {
    const Json& jc = j.at("camera");
    p.camera.fx = jc.at("fx").get<double>();
    p.camera.fy = jc.at("fy").get<double>();
    p.camera.cx = jc.at("cx").get<double>();
    p.camera.cy = jc.at("cy").get<double>();
    p.camera.width = jc.at("width").get<int>();
    p.camera.height = jc.at("height").get<int>();
  }
  return p;
}

Json to_json(const SolveReport& r) {
  return Json{{"iterations", r.iterations},
              {"initial_cost", r.initial_cost},
              {"final_cost", r.final_cost},
              {"iteration_seconds", r.iteration_seconds},
              {"total_seconds", r.total_seconds},
              {"formulation", to_string(r.formulation)},
              {"jacobian_mode", to_string(r.jacobian_mode)},
              {"converged", r.converged},
              {"message", r.message}};
}

std::string report_csv_row(const std::string& group, int order, const std::string& config,
                           const SolveReport& r, bool with_timing) {
  std::ostringstream os;
  os << group << ',' << order << ',' << config << ',' << to_string(r.formulation) << ',';
  if (with_timing) os << r.total_seconds;
  os << ',' << r.iterations;
  return os.str();
}

}  // namespace liespline
