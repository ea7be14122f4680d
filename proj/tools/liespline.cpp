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

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "liespline/experiments.hpp"
#include "liespline/sampling.hpp"
#include "liespline/serialization.hpp"
#include "liespline/so3_jacobians.hpp"

namespace liespline {
namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("LIE_SPLINE_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 1;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw CLI::ValidationError("--out", "cannot open '" + path + "' for writing");
  out << content;
}

// ---- matrices -----------------------------------------------------------------

std::string format_matrices(int k) {
  const BlendingMatrices& bm = blending_matrices(k);
  std::ostringstream os;
  const auto print = [&](const char* name, const auto& exact, const Eigen::MatrixXd& m) {
    os << name << " (order " << k << "), exact:\n";
    for (int s = 0; s < k; ++s) {
      for (int n = 0; n < k; ++n) os << std::setw(12) << exact[s][n].str();
      os << '\n';
    }
    os << name << " decimal:\n" << m << "\n";
  };
  print("M", bm.m_exact, bm.m);
  print("M_cum", bm.m_cum_exact, bm.m_cum);
  return os.str();
}

// ---- bench ----------------------------------------------------------------------

std::string bench_csv(const std::vector<SimConfig>& configs, bool with_timing) {
  std::ostringstream os;
  os << "group,k,config,formulation,seconds,iterations,speedup\n";
  os << std::setprecision(17);
  for (const SimConfig& cfg : configs) {
    const SimResult res = run_sim(cfg);
    const auto row = [&](const SolveReport& rep, double seconds) {
      os << to_string(cfg.group) << ',' << cfg.order << ',' << to_string(cfg.deriv) << ','
         << to_string(rep.formulation) << ',';
      if (with_timing) os << seconds;
      os << ',' << rep.iterations << ',';
      if (with_timing) os << res.speedup;
      os << '\n';
    };
    row(res.recursive, res.recursive_seconds);
    row(res.baseline, res.baseline_seconds);
  }
  return os.str();
}

// ---- calib-sim -------------------------------------------------------------------

Json calib_sim_report(std::uint64_t seed, double noise_scale, double duration,
                      bool single_run, Representation rep, Formulation form,
                      bool with_timing) {
  const CalibScene scene = make_calib_scene(seed, duration);
  CalibNoise sigma;  // defaults; weights always from these
  const bool add_noise = noise_scale > 0.0;
  sigma.gyro *= add_noise ? noise_scale : 1.0;
  sigma.accel *= add_noise ? noise_scale : 1.0;
  sigma.pixel *= add_noise ? noise_scale : 1.0;
  const auto measurements = synthesize_measurements(scene, sigma, add_noise, seed);
  const CalibrationParams gt = scene_ground_truth(scene);

  const auto dev_json = [](const CalibDeviation& d) {
    return Json{{"g", d.g},         {"b_a", d.b_a},     {"b_g", d.b_g},
                {"t_ic0", d.t_ic0}, {"t_ic1", d.t_ic1}, {"R_ic0", d.r_ic0},
                {"R_ic1", d.r_ic1}, {"max", d.max()}};
  };

  Json out;
  out["seed"] = seed;
  out["noise_scale"] = noise_scale;
  out["duration"] = duration;
  out["measurements"] = measurements.size();

  if (single_run) {
    const CalibEstimate est = run_calib(scene, measurements, rep, form, seed);
    out["representation"] = to_string(rep);
    out["formulation"] = to_string(form);
    Json rj = to_json(est.report);
    if (!with_timing) {
      rj.erase("iteration_seconds");
      rj.erase("total_seconds");
    }
    out["report"] = rj;
    out["deviation_from_truth"] = dev_json(compare_estimates(est.params, gt));
    return out;
  }

  struct Method {
    Representation rep;
    Formulation form;
    const char* name;
  };
  const Method methods[] = {
      {Representation::kSplit, Formulation::kRecursive, "split_recursive"},
      {Representation::kSplit, Formulation::kBaseline, "split_baseline"},
      {Representation::kSe3, Formulation::kRecursive, "se3_recursive"},
      {Representation::kSe3, Formulation::kBaseline, "se3_baseline"},
  };
  std::vector<CalibEstimate> estimates;
  Json per_method = Json::object();
  for (const Method& m : methods) {
    CalibEstimate est = run_calib(scene, measurements, m.rep, m.form, seed);
    Json mj;
    mj["iterations"] = est.report.iterations;
    mj["converged"] = est.report.converged;
    mj["final_cost"] = est.report.final_cost;
    if (with_timing) mj["seconds"] = est.report.total_seconds;
    mj["deviation_from_truth"] = dev_json(compare_estimates(est.params, gt));
    per_method[m.name] = mj;
    estimates.push_back(std::move(est));
  }

  // Maximum deviation of each method from the mean estimate, per parameter,
  // plus the direct split-vs-SE(3) comparison of the recursive runs.
  CalibrationParams mean = estimates[0].params;
  for (size_t i = 1; i < std::size(methods); ++i) {
    mean.b_g += estimates[i].params.b_g;
    mean.b_a += estimates[i].params.b_a;
    mean.g += estimates[i].params.g;
  }
  mean.b_g /= 4.0;
  mean.b_a /= 4.0;
  mean.g /= 4.0;
  // rotation/translation means: chordal average, projected back
  for (int c = 0; c < 2; ++c) {
    Eigen::Matrix3d racc = Eigen::Matrix3d::Zero();
    Eigen::Vector3d tacc = Eigen::Vector3d::Zero();
    for (const auto& est : estimates) {
      racc += est.params.T_ic[c].R;
      tacc += est.params.T_ic[c].t;
    }
    mean.T_ic[c].R = so3_project(racc / 4.0);
    mean.T_ic[c].t = tacc / 4.0;
  }
  CalibDeviation worst;
  for (const auto& est : estimates) {
    const CalibDeviation d = compare_estimates(est.params, mean);
    worst.g = std::max(worst.g, d.g);
    worst.b_a = std::max(worst.b_a, d.b_a);
    worst.b_g = std::max(worst.b_g, d.b_g);
    worst.t_ic0 = std::max(worst.t_ic0, d.t_ic0);
    worst.t_ic1 = std::max(worst.t_ic1, d.t_ic1);
    worst.r_ic0 = std::max(worst.r_ic0, d.r_ic0);
    worst.r_ic1 = std::max(worst.r_ic1, d.r_ic1);
  }
  out["methods"] = per_method;
  out["max_deviation_from_mean"] = dev_json(worst);
  out["split_vs_se3_recursive"] =
      dev_json(compare_estimates(estimates[0].params, estimates[2].params));
  if (with_timing) {
    out["se3_recursive_seconds"] = estimates[2].report.total_seconds;
    out["se3_baseline_seconds"] = estimates[3].report.total_seconds;
  }
  return out;
}

// ---- check -----------------------------------------------------------------------

struct CheckScope {
  bool failed = false;
  void item(const std::string& name, double err, double tol) {
    const bool ok = err <= tol;
    failed |= !ok;
    std::cout << (ok ? "PASS " : "FAIL ") << name << "  (max err " << std::scientific
              << std::setprecision(3) << err << ", tol " << tol << ")\n";
  }
  void item_bool(const std::string& name, bool ok) {
    failed |= !ok;
    std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
  }
};

void check_lie(std::uint64_t seed, CheckScope* sc) {
  RngStream rng(seed, "check/lie");
  double round_trip = 0, adj_ident = 0, jr_pair = 0, comm = 0;
  for (int n = 0; n < 1000; ++n) {
    const Eigen::Vector3d v = rng.ball<3>(M_PI - 1e-3);
    const Rotation3 r = so3_exp(v);
    round_trip = std::max(round_trip, (so3_exp<double>(so3_log(r)) - r).norm());

    const Rotation3 x = random_rotation(rng);
    const Eigen::Vector3d w = rng.ball<3>(1.5);
    adj_ident = std::max(
        adj_ident, (x * so3_exp(w) - so3_exp<double>((x * w).eval()) * x).norm());

    const Eigen::Vector3d a = rng.ball<3>(2.5);
    jr_pair = std::max(jr_pair, (so3_right_jacobian(a) * so3_right_jacobian_inv(a) -
                                 Eigen::Matrix3d::Identity())
                                    .norm());

    const Eigen::Vector3d b = rng.ball<3>(2.5);
    comm = std::max(comm, (so3_vee_unchecked<double>(commutator(so3_hat(a), so3_hat(b))) -
                           a.cross(b))
                              .norm());
  }
  sc->item("lie/exp-log-round-trip", round_trip, 1e-12);
  sc->item("lie/adjoint-identity", adj_ident, 1e-12);
  sc->item("lie/jr-inverse-pair", jr_pair, 1e-10);
  sc->item("lie/commutator-cross", comm, 1e-12);
}

void check_blending(std::uint64_t seed, CheckScope* sc) {
  double first_row = 0, lambda0 = 0, db = 0;
  for (int k = kMinOrder; k <= kMaxOrder; ++k) {
    const auto& bm = blending_matrices(k);
    first_row = std::max(first_row, std::abs(bm.m_cum(0, 0) - 1.0));
    for (int n = 1; n < k; ++n) first_row = std::max(first_row, std::abs(bm.m_cum(0, n)));
    for (int g = 0; g < 1000; ++g) {
      lambda0 = std::max(lambda0, std::abs(lambda_bundle(k, g / 1000.0).lambda[0] - 1.0));
    }
  }
  RngStream rng(seed, "check/blending");
  for (int k = 2; k <= 6; ++k) {
    std::vector<double> p(12);
    for (auto& x : p) x = rng.uniform(-3, 3);
    for (int n = 0; n < 50; ++n) {
      const double s = rng.uniform(0.0, 12 - k + 1 - 1e-9);
      const int i = static_cast<int>(s);
      const double u = s - i;
      const LambdaBundle lb = lambda_bundle(k, u);
      double cum = p[i];
      for (int j = 1; j < k; ++j) cum += lb.lambda[j] * (p[i + j] - p[i + j - 1]);
      double sum = 0.0;
      for (int m = 0; m < 12; ++m) sum += deboor_cox(m - k + 1, k - 1, i + u, 0.0, 1.0) * p[m];
      db = std::max(db, std::abs(cum - sum));
    }
  }
  sc->item("blending/cumulative-first-row", first_row, 1e-12);
  sc->item("blending/lambda0-equals-one", lambda0, 1e-12);
  sc->item("blending/matrix-vs-deboor", db, 1e-10);
}

void check_spline(std::uint64_t seed, CheckScope* sc) {
  RngStream rng(seed, "check/spline");
  double equiv = 0, ladder = 0;
  bool counts_ok = true;
  for (int k = 2; k <= 6; ++k) {
    for (int n = 0; n < 100; ++n) {
      auto s = random_walk_spline<So3d>(rng, k, k + 4);
      const double t = rng.uniform(s.time_min(), s.time_max() - 1e-9);
      auto ctx = locate(s, t);
      equiv = std::max(equiv, (velocity_recursive(ctx) - velocity_baseline(ctx)).norm());
      equiv = std::max(equiv,
                       (acceleration_recursive(ctx) - acceleration_baseline(ctx)).norm());
    }
    for (int n = 0; n < 30; ++n) {
      auto s = random_walk_spline<Se3d>(rng, k, k + 4);
      const int i = static_cast<int>(rng.uniform(0, s.segment_count() - 1e-9));
      const double u = rng.uniform(0.05, 0.95), h = 1e-6;
      auto at = [&](double uu) { return make_context<Se3d>(s.knots.data() + i, k, i, uu); };
      const Vec6<double> fd =
          (velocity_recursive(at(u + h)) - velocity_recursive(at(u - h))) / (2 * h);
      ladder = std::max(ladder, (fd - acceleration_recursive(at(u))).norm());
    }
    auto s = random_walk_spline<So3d>(rng, k, k + 3);
    auto se = random_walk_spline<Se3d>(rng, k, k + 3);
    auto ctx = locate(s, 0.5 * (s.time_min() + s.time_max()));
    auto ctxe = locate(se, 0.5 * (se.time_min() + se.time_max()));
    OpCounter c;
    (void)velocity_baseline(ctx, &c);
    counts_ok &= c.mm_mults == (k - 1) * (k - 1) + 1 && c.adds == k - 2;
    c.reset();
    (void)velocity_recursive(ctx, &c);
    counts_ok &= c.mm_mults == 1 && c.mv_mults == k - 1 && c.adds == k - 1;
    c.reset();
    (void)acceleration_baseline(ctx, &c);
    counts_ok &= c.mm_mults == k * k * (k - 1) / 2 && c.adds == k * k * (k - 1) / 2;
    c.reset();
    (void)acceleration_recursive(ctxe, &c);
    counts_ok &= c.mm_mults == 2 * k && c.mv_mults == k - 1 && c.adds == 3 * k - 2;
    c.reset();
    (void)acceleration_recursive(ctx, &c);
    counts_ok &= c.mm_mults == 2 && c.mv_mults == 2 * (k - 1) && c.adds == 2 * k - 1;
  }
  sc->item("spline/formulation-equivalence", equiv, 1e-11);
  sc->item("spline/fd-ladder", ladder, 1e-5);
  sc->item_bool("spline/op-count-table", counts_ok);
}

void check_jacobians(std::uint64_t seed, CheckScope* sc) {
  RngStream rng(seed, "check/jacobians");
  const double h = 1e-6;
  for (int k = 3; k <= 6; ++k) {
    std::array<double, 3> worst{};  // rho, omega, omegadot over all j
    for (int n = 0; n < 50; ++n) {
      auto s = random_walk_spline<So3d>(rng, k, k + 2, 0.0, 1.0, 0.5);
      auto ctx = locate(s, rng.uniform(s.time_min(), s.time_max() - 1e-9));
      const auto inter = so3_intermediates(ctx);
      const auto local = local_jacobians(ctx, inter);
      if (local.rho_near_branch) continue;
      const auto kj = knot_jacobians(ctx, local);
      for (int j = 0; j < k; ++j) {
        Eigen::Matrix3d fd_rho, fd_w, fd_wd;
        for (int axis = 0; axis < 3; ++axis) {
          Eigen::Vector3d step = Eigen::Vector3d::Zero();
          step[axis] = h;
          auto poke = [&](const Eigen::Vector3d& d) {
            std::array<Rotation3, kMaxOrder> a{};
            for (int m = 0; m < k; ++m) a[m] = ctx.knot[m];
            a[j] = so3_exp(d) * a[j];
            return make_context<So3d>(a.data(), k, ctx.i, ctx.lam.u);
          };
          auto hi = poke(step), lo = poke((-step).eval());
          fd_rho.col(axis) = (so3_log<double>(evaluate(hi)) - so3_log<double>(evaluate(lo))) / (2 * h);
          fd_w.col(axis) = (velocity_recursive(hi) - velocity_recursive(lo)) / (2 * h);
          fd_wd.col(axis) =
              (acceleration_recursive(hi) - acceleration_recursive(lo)) / (2 * h);
        }
        const auto rel = [](const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
          return (a - b).norm() / std::max(1.0, b.norm());
        };
        worst[0] = std::max(worst[0], rel(kj.d_rho[j], fd_rho));
        worst[1] = std::max(worst[1], rel(kj.d_omega[j], fd_w));
        worst[2] = std::max(worst[2], rel(kj.d_omegadot[j], fd_wd));
      }
    }
    sc->item("jacobians/rho-vs-fd k=" + std::to_string(k), worst[0], 1e-5);
    sc->item("jacobians/omega-vs-fd k=" + std::to_string(k), worst[1], 1e-5);
    sc->item("jacobians/omegadot-vs-fd k=" + std::to_string(k), worst[2], 1e-5);
  }
}

}  // namespace
}  // namespace liespline

int main(int argc, char** argv) {
  using namespace liespline;
  CLI::App app{"Cumulative B-splines on Lie groups: derivatives, Jacobians and experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = default_seed();
  app.add_option("--seed", seed, "root seed for all randomized pipelines");

  // matrices
  auto* cmd_matrices = app.add_subcommand("matrices", "print blending matrices for one order");
  int mat_k = 4;
  std::string mat_out;
  cmd_matrices->add_option("--k", mat_k, "spline order (2..12)")->required();
  cmd_matrices->add_option("--out", mat_out, "output file (default stdout)");

  // bench
  auto* cmd_bench = app.add_subcommand("bench", "simulated-fit timing benchmark");
  std::string bench_group = "so3", bench_config = "acc", bench_out;
  int bench_k = 4, bench_runs = 5;
  bool bench_all = false, bench_no_timing = false;
  cmd_bench->add_option("--group", bench_group, "so3 | se3")
      ->check(CLI::IsMember({"so3", "se3"}));
  cmd_bench->add_option("--k", bench_k, "spline order (4, 5 or 6)");
  cmd_bench->add_option("--config", bench_config, "vel | acc")
      ->check(CLI::IsMember({"vel", "acc"}));
  cmd_bench->add_flag("--all", bench_all, "run the full 12-configuration grid");
  cmd_bench->add_option("--runs", bench_runs, "timing runs per solve (median reported)");
  cmd_bench->add_flag("--no-timing", bench_no_timing,
                      "omit wall-time fields for byte-stable output");
  cmd_bench->add_option("--out", bench_out, "output file (default stdout)");

  // fit
  auto* cmd_fit = app.add_subcommand("fit", "solve a problem file");
  std::string fit_problem, fit_out, fit_form = "recursive", fit_jac = "forward";
  bool fit_csv = false, fit_no_timing = false;
  cmd_fit->add_option("--problem", fit_problem, "problem JSON file")->required();
  cmd_fit->add_option("--formulation", fit_form, "recursive | baseline")
      ->check(CLI::IsMember({"recursive", "baseline"}));
  cmd_fit->add_option("--jacobians", fit_jac, "forward | analytic")
      ->check(CLI::IsMember({"forward", "analytic"}));
  cmd_fit->add_flag("--csv", fit_csv, "emit a CSV row instead of JSON");
  cmd_fit->add_flag("--no-timing", fit_no_timing, "omit wall-time fields");
  cmd_fit->add_option("--out", fit_out, "output file (default stdout)");

  // calib-sim
  auto* cmd_calib = app.add_subcommand("calib-sim", "synthetic camera-IMU calibration");
  double calib_noise = 1.0, calib_duration = 20.0;
  std::string calib_out, calib_rep, calib_form = "recursive";
  bool calib_no_timing = false;
  cmd_calib->add_option("--noise", calib_noise,
                        "noise scale on the default sigmas (0 = noiseless)");
  cmd_calib->add_option("--duration", calib_duration, "sequence length in seconds");
  cmd_calib->add_option("--representation", calib_rep,
                        "run a single representation: split | se3")
      ->check(CLI::IsMember({"split", "se3"}));
  cmd_calib->add_option("--formulation", calib_form, "recursive | baseline")
      ->check(CLI::IsMember({"recursive", "baseline"}));
  cmd_calib->add_flag("--no-timing", calib_no_timing, "omit wall-time fields");
  cmd_calib->add_option("--out", calib_out, "output file (default stdout)");

  // check
  auto* cmd_check = app.add_subcommand("check", "run numerical property suites");
  bool check_all = false, check_lie_f = false, check_blend_f = false, check_spline_f = false,
       check_jac = false;
  cmd_check->add_flag("--all", check_all, "run every suite");
  cmd_check->add_flag("--lie", check_lie_f, "group-operation properties");
  cmd_check->add_flag("--blending", check_blend_f, "basis and matrix properties");
  cmd_check->add_flag("--spline", check_spline_f, "derivative cross-checks and op counts");
  cmd_check->add_flag("--jacobians", check_jac, "analytic-vs-FD Jacobian suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_matrices->parsed()) {
      write_output(mat_out, format_matrices(mat_k));
      return 0;
    }
    if (cmd_bench->parsed()) {
      std::vector<SimConfig> configs;
      const auto make_cfg = [&](GroupTag g, int k, DerivKind d) {
        SimConfig cfg;
        cfg.group = g;
        cfg.order = k;
        cfg.deriv = d;
        cfg.seed = seed;
        cfg.timing_runs = bench_runs;
        return cfg;
      };
      if (bench_all) {
        for (const GroupTag g : {GroupTag::kSo3, GroupTag::kSe3})
          for (const int k : {4, 5, 6})
            for (const DerivKind d : {DerivKind::kAcceleration, DerivKind::kVelocity})
              configs.push_back(make_cfg(g, k, d));
      } else {
        configs.push_back(make_cfg(bench_group == "so3" ? GroupTag::kSo3 : GroupTag::kSe3,
                                   bench_k,
                                   bench_config == "acc" ? DerivKind::kAcceleration
                                                         : DerivKind::kVelocity));
      }
      write_output(bench_out, bench_csv(configs, !bench_no_timing));
      return 0;
    }
    if (cmd_fit->parsed()) {
      std::ifstream in(fit_problem);
      if (!in) throw std::runtime_error("cannot open problem file '" + fit_problem + "'");
      Json j;
      in >> j;
      Problem p = problem_from_json(j);
      if (fit_jac == "analytic" && p.se3.has_value()) {
        std::cerr << "error: --jacobians analytic requires the split (or single SO(3)/R^3) "
                     "representation\n";
        return 1;
      }
      SolveOptions opt;
      opt.formulation =
          fit_form == "recursive" ? Formulation::kRecursive : Formulation::kBaseline;
      opt.jacobian_mode =
          fit_jac == "forward" ? JacobianMode::kForward : JacobianMode::kAnalytic;
      const SolveReport rep = solve(p, opt);
      std::string body;
      if (fit_csv) {
        std::string group = p.se3 ? "se3" : (p.so3 ? "so3" : "r3");
        const int order = p.se3 ? p.se3->order : (p.so3 ? p.so3->order : p.r3->order);
        body = report_csv_row(group, order, "custom", rep, !fit_no_timing) + "\n";
      } else {
        Json rj = to_json(rep);
        if (fit_no_timing) {
          rj.erase("iteration_seconds");
          rj.erase("total_seconds");
        }
        body = rj.dump(2) + "\n";
      }
      write_output(fit_out, body);
      return rep.converged ? 0 : 2;
    }
    if (cmd_calib->parsed()) {
      const bool single = !calib_rep.empty();
      const Json report = calib_sim_report(
          seed, calib_noise, calib_duration, single,
          calib_rep == "se3" ? Representation::kSe3 : Representation::kSplit,
          calib_form == "recursive" ? Formulation::kRecursive : Formulation::kBaseline,
          !calib_no_timing);
      write_output(calib_out, report.dump(2) + "\n");
      return 0;
    }
    if (cmd_check->parsed()) {
      CheckScope sc;
      const bool any = check_lie_f || check_blend_f || check_spline_f || check_jac;
      if (check_all || !any || check_lie_f) check_lie(seed, &sc);
      if (check_all || !any || check_blend_f) check_blending(seed, &sc);
      if (check_all || !any || check_spline_f) check_spline(seed, &sc);
      if (check_all || !any || check_jac) check_jacobians(seed, &sc);
      return sc.failed ? 2 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
