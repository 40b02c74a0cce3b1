#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pudq/pudq.hpp"
#include "pudq/oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pudq;

namespace {

enum Exit { kOk = 0, kIo = 1, kUsage = 2, kNotConverged = 3, kCheckFailed = 4 };

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::usage:
    case ErrorKind::missing_parameter:
      return kUsage;
    default:
      return kIo;
  }
}

struct Manifest {
  json j;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  Manifest(const std::string& command, const std::vector<std::string>& argv) {
    j["command"] = command;
    j["argv"] = argv;
    j["versions"] = {{"schema", kSchemaVersion}, {"library", kLibraryVersion}};
    j["inputs"] = json::object();
    j["outputs"] = json::object();
    j["metrics"] = json::object();
  }

  void write(const fs::path& dir, int status) {
    j["exit_status"] = status;
    j["timing_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file_atomic((dir / "manifest.json").string(), j.dump(2) + "\n");
  }
};

std::vector<std::string> args_of(int argc, char** argv) { return std::vector<std::string>(argv + 1, argv + argc); }

json estimate_json(const ProductPoint& X, int anchor) {
  json j;
  j["format"] = "pudq_estimate";
  j["versions"] = {{"schema", kSchemaVersion}, {"library", kLibraryVersion}};
  j["anchor"] = anchor;
  json v = json::array();
  for (Eigen::Index i = 0; i < num_poses(X); ++i) {
    const Pudq x = block(X, i);
    v.push_back({x[0], x[1], x[2], x[3]});
  }
  j["vertices"] = v;
  return j;
}

// poses from an estimate, or from a graph file's ground_truth/vertices
ProductPoint load_poses(const std::string& path, const std::string& field = "vertices") {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, "'" + path + "': " + e.what());
  }
  if (!j.contains(field)) throw Error(ErrorKind::parse, "'" + path + "' has no '" + field + "' array");
  std::vector<Pudq> xs;
  try {
    for (const auto& v : j[field]) {
      if (!v.is_array() || v.size() != 4) throw Error(ErrorKind::parse, "'" + path + "': poses must be 4-vectors");
      xs.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, "'" + path + "': " + e.what());
  }
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!is_unit(xs[i], 1e-6)) throw Error(ErrorKind::validation, "'" + path + "': pose " + std::to_string(i) + " is not unit");
  return stack(xs);
}

LoadedGraph load_any(const std::string& path, const std::string& format, const std::string& info_frame) {
  const GraphFormat fmt = format == "auto" ? format_from_path(path) : format_from_string(format);
  return load_graph(path, fmt, frame_from_string(info_frame));
}

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------- synth

struct SynthArgs {
  SynthConfig cfg;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  bool g2o = false;
  std::string g2o_frame = "euclidean";
};

int cmd_synth(const SynthArgs& a, const std::vector<std::string>& argv) {
  SynthConfig cfg = a.cfg;
  if (a.seed) {
    cfg.rng_seed = *a.seed;
  } else {
    std::random_device rd;
    cfg.rng_seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  Manifest m("synth", argv);
  const fs::path dir(a.out);
  const TrialDataset t = synthesize_trial(cfg);
  json prov = {{"generator", "grid"},
               {"n_vertices", cfg.n_vertices},
               {"grid_step", cfg.grid_step},
               {"loop_closure_prob", cfg.loop_closure_prob},
               {"loop_closure_radius", cfg.loop_closure_radius},
               {"sigma_w", cfg.sigma_w},
               {"wishart_dof", cfg.wishart_dof},
               {"straight_prob", cfg.straight_prob},
               {"seed", cfg.rng_seed}};
  const std::string graph_path = (dir / "graph.json").string();
  save_graph(t.graph, graph_path, GraphFormat::extended_json, &t.ground_truth, prov);
  m.j["config"] = prov;
  m.j["seed"] = cfg.rng_seed;
  m.j["seed_drawn"] = !a.seed.has_value();
  m.j["outputs"]["graph"] = graph_path;
  if (a.g2o) {
    const std::string g2o_path = (dir / "graph.g2o").string();
    save_graph(t.graph, g2o_path, GraphFormat::g2o_se2, nullptr, {}, frame_from_string(a.g2o_frame));
    m.j["outputs"]["g2o"] = g2o_path;
    m.j["config"]["g2o_info_frame"] = a.g2o_frame;
  }
  m.j["metrics"] = {{"vertices", t.graph.num_vertices()}, {"edges", t.graph.num_edges()}};
  m.write(dir, kOk);
  std::cout << "wrote " << graph_path << " (" << t.graph.num_vertices() << " vertices, " << t.graph.num_edges()
            << " edges, seed " << cfg.rng_seed << ")\n";
  return kOk;
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string graph;
  std::string format = "auto";
  std::string info_frame = "euclidean";
  std::string init = "chordal";
  std::string init_file;
  std::string hessian = "rgn";
  std::string preconditioner = "gauss_newton";
  std::string out = ".";
  SolverConfig cfg;
  bool quiet = false;
};

int cmd_solve(const SolveArgs& a, const std::vector<std::string>& argv) {
  Manifest m("solve", argv);
  const fs::path dir(a.out);
  const LoadedGraph lg = load_any(a.graph, a.format, a.info_frame);
  const PoseGraph& g = lg.graph;
  SolverConfig cfg = a.cfg;
  if (a.hessian == "exact")
    cfg.hessian = HessianMode::exact;
  else if (a.hessian != "rgn")
    throw Error(ErrorKind::usage, "--hessian must be rgn or exact");
  cfg.preconditioner = a.preconditioner == "none" ? Preconditioner::none : Preconditioner::gauss_newton;

  ProductPoint X0;
  ChordalInfo ci;
  if (a.init == "chordal") {
    X0 = init_chordal(g, &ci);
    if (ci.fell_back) std::cerr << "warning: " << ci.warning << "\n";
  } else if (a.init == "odometry") {
    X0 = init_odometry(g);
  } else if (a.init == "file") {
    if (a.init_file.empty()) throw Error(ErrorKind::usage, "--init file needs --init-file");
    X0 = load_poses(a.init_file);
  } else if (a.init == "ground_truth") {
    if (!lg.ground_truth) throw Error(ErrorKind::validation, "graph has no ground_truth block");
    X0 = stack(*lg.ground_truth);
  } else if (a.init == "graph") {
    X0 = stack(g.vertices);
  } else {
    throw Error(ErrorKind::usage, "unknown initializer '" + a.init + "'");
  }
  if (X0.size() != 4 * g.num_vertices()) throw Error(ErrorKind::validation, "initial estimate has the wrong vertex count");
  X0 = regauge(X0, g.anchor);

  const SolveResult res = solve(g, cfg, X0, [&](const TraceRow& r) {
    if (!a.quiet)
      std::cerr << "k=" << r.k << " cost=" << r.cost << " |grad|=" << r.grad_norm << " delta=" << r.delta << " rho=" << r.rho
                << (r.accepted ? " accepted" : " rejected") << "\n";
  });

  std::ostringstream csv;
  csv << "k,cost,grad_norm,delta,rho,accepted\n";
  for (const TraceRow& r : res.trace)
    csv << r.k << ',' << fmt(r.cost) << ',' << fmt(r.grad_norm) << ',' << fmt(r.delta) << ',' << fmt(r.rho) << ','
        << (r.accepted ? 1 : 0) << '\n';
  const std::string est_path = (dir / "estimate.json").string(), trace_path = (dir / "trace.csv").string();
  write_file_atomic(est_path, estimate_json(res.X, g.anchor).dump(2) + "\n");
  write_file_atomic(trace_path, csv.str());

  const int status = res.status == SolveStatus::converged ? kOk : kNotConverged;
  m.j["inputs"] = {{"graph", a.graph}, {"format", a.format}, {"info_frame", a.info_frame}, {"init_file", a.init_file}};
  m.j["config"] = {{"init", a.init},
                   {"hessian", a.hessian},
                   {"preconditioner", a.preconditioner},
                   {"eps_g", cfg.eps_g},
                   {"delta0", cfg.delta0},
                   {"delta_max", cfg.delta_max},
                   {"rho_prime", cfg.rho_prime},
                   {"tcg_kappa", cfg.tcg_kappa},
                   {"tcg_theta", cfg.tcg_theta},
                   {"max_outer_iters", cfg.max_outer_iters},
                   {"max_inner_iters", cfg.max_inner_iters}};
  m.j["outputs"] = {{"estimate", est_path}, {"trace", trace_path}};
  m.j["metrics"] = {{"status", to_string(res.status)},
                    {"iterations", res.iterations},
                    {"initial_cost", cost(g, X0)},
                    {"final_cost", res.cost},
                    {"final_grad_norm", res.grad_norm},
                    {"chordal_fallback", ci.fell_back}};
  if (lg.ground_truth) {
    const RpeReport r = rpe_report(res.X, stack(*lg.ground_truth), g.edges);
    m.j["metrics"]["rpe_l"] = r.rpe_l;
    m.j["metrics"]["rpe_e"] = r.rpe_e;
  }
  m.write(dir, status);
  std::cout << to_string(res.status) << " after " << res.iterations << " iterations: cost " << fmt(res.cost)
            << ", |grad| " << fmt(res.grad_norm) << "\n";
  return status;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string graph;
  std::string format = "auto";
  std::string info_frame = "euclidean";
  std::string estimate;
  std::string ground_truth;
  std::string baseline;
  std::string out = ".";
};

int cmd_eval(const EvalArgs& a, const std::vector<std::string>& argv) {
  Manifest m("eval", argv);
  const fs::path dir(a.out);
  const LoadedGraph lg = load_any(a.graph, a.format, a.info_frame);
  ProductPoint gt;
  if (!a.ground_truth.empty()) {
    const json j = json::parse(read_file(a.ground_truth), nullptr, false);
    gt = load_poses(a.ground_truth, !j.is_discarded() && j.contains("ground_truth") ? "ground_truth" : "vertices");
  } else if (lg.ground_truth) {
    gt = stack(*lg.ground_truth);
  } else {
    throw Error(ErrorKind::validation, "no ground truth: pass --ground-truth or a graph with a ground_truth block");
  }
  const ProductPoint est = load_poses(a.estimate);
  if (est.size() != gt.size() || gt.size() != 4 * lg.graph.num_vertices())
    throw Error(ErrorKind::validation, "vertex count mismatch between estimate, ground truth and graph");
  const RpeReport r = rpe_report(est, gt, lg.graph.edges);

  std::ostringstream summary, edges;
  summary << "label,rpe_l,rpe_e\n" << "estimate," << fmt(r.rpe_l) << ',' << fmt(r.rpe_e) << '\n';
  json metrics = {{"rpe_l", r.rpe_l}, {"rpe_e", r.rpe_e}};
  std::cout << "RPE-L " << fmt(r.rpe_l) << "\nRPE-E " << fmt(r.rpe_e) << "\n";
  if (!a.baseline.empty()) {
    const ProductPoint base = load_poses(a.baseline);
    if (base.size() != gt.size()) throw Error(ErrorKind::validation, "baseline vertex count mismatch");
    const RpeReport b = rpe_report(base, gt, lg.graph.edges);
    summary << "baseline," << fmt(b.rpe_l) << ',' << fmt(b.rpe_e) << '\n';
    const double red_l = percent_reduction(b.rpe_l, r.rpe_l), red_e = percent_reduction(b.rpe_e, r.rpe_e);
    summary << "percent_reduction," << fmt(red_l) << ',' << fmt(red_e) << '\n';
    metrics["baseline_rpe_l"] = b.rpe_l;
    metrics["baseline_rpe_e"] = b.rpe_e;
    metrics["percent_reduction_rpe_l"] = red_l;
    metrics["percent_reduction_rpe_e"] = red_e;
    std::cout << "percent reduction RPE-L " << fmt(red_l) << "%\npercent reduction RPE-E " << fmt(red_e) << "%\n";
  }
  edges << "i,j,lie,translation,angle\n";
  for (const EdgeError& e : r.per_edge)
    edges << e.i << ',' << e.j << ',' << fmt(e.lie) << ',' << fmt(e.translation) << ',' << fmt(e.angle) << '\n';
  const std::string sp = (dir / "rpe_summary.csv").string(), ep = (dir / "rpe_edges.csv").string();
  write_file_atomic(sp, summary.str());
  write_file_atomic(ep, edges.str());
  m.j["inputs"] = {{"graph", a.graph}, {"estimate", a.estimate}, {"ground_truth", a.ground_truth}, {"baseline", a.baseline}};
  m.j["outputs"] = {{"summary", sp}, {"edges", ep}};
  m.j["metrics"] = metrics;
  m.write(dir, kOk);
  return kOk;
}

// ---------------------------------------------------------------- check

struct CheckArgs {
  std::string graph;
  std::string format = "auto";
  std::string info_frame = "euclidean";
  int n = 6;
  double sigma_w = 1e-2;
  std::uint64_t seed = 1;
  bool bounds = false;
  double radius = 0.0;
  int bound_points = 20;
  int bound_tangents = 100;
  std::string out;
  std::string fault;
};

// random poses, odometry chain plus a few random edges, Wishart information
PoseGraph random_check_graph(int n, double sigma_w, std::uint64_t seed) {
  Rng rng(seed, Stream::test, 1);
  std::vector<Pudq> gt;
  for (int i = 0; i < n; ++i)
    gt.push_back(i == 0 ? identity() : from_euclidean({3.0 * rng.normal(), 3.0 * rng.normal(), kPi * (2.0 * rng.uniform() - 1.0)}));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  for (int k = 0; k < n; ++k) {
    const int i = static_cast<int>(rng.raw() % static_cast<std::uint64_t>(n));
    const int j = static_cast<int>(rng.raw() % static_cast<std::uint64_t>(n));
    if (std::abs(i - j) > 1) edges.emplace_back(i, j);
  }
  std::vector<Mat3> cov;
  for (std::size_t k = 0; k < edges.size(); ++k) cov.push_back(sample_wishart_covariance(sigma_w, rng).sigma);
  PoseGraph g = corrupt_edges(gt, edges, cov, seed);
  // evaluate away from the optimum so that residual terms are exercised
  for (int i = 1; i < n; ++i) {
    const Vec3 v(0.3 * rng.normal(), 0.5 * rng.normal(), 0.5 * rng.normal());
    g.vertices[static_cast<std::size_t>(i)] = compose(g.vertices[static_cast<std::size_t>(i)], exp_identity(v));
  }
  return g;
}

int cmd_check(const CheckArgs& a, const std::vector<std::string>& argv) {
  Manifest m("check", argv);
  PoseGraph g;
  if (!a.graph.empty()) {
    g = load_any(a.graph, a.format, a.info_frame).graph;
  } else {
    if (a.n < 2) throw Error(ErrorKind::usage, "--n must be at least 2");
    g = random_check_graph(a.n, a.sigma_w, a.seed);
  }
  const ProductPoint X = regauge(stack(g.vertices), g.anchor);
  FactorFn factor = default_factor;
#ifdef PUDQ_FAULT_INJECTION
  if (!a.fault.empty()) {
    const char mat = a.fault[0];
    if (a.fault.size() != 3 || (mat != 'A' && mat != 'B')) throw Error(ErrorKind::usage, "--inject-fault expects A11..B34");
    const int r = a.fault[1] - '1', c = a.fault[2] - '1';
    if (r < 0 || r > 2 || c < 0 || c > 3) throw Error(ErrorKind::usage, "--inject-fault entry out of range");
    factor = [mat, r, c](const Edge& e, const ProductPoint& Y) {
      EdgeFactor f = edge_factor(e, Y);
      (mat == 'A' ? f.A : f.B)(r, c) *= -1.0;
      return f;
    };
  }
#endif
  std::vector<CheckResult> results = run_derivative_checks(g, X, a.seed, factor);

  if (a.bounds) {
    const double R = a.radius > 0.0 ? a.radius : std::sqrt(X.squaredNorm() + 1.0);
    const BoundConstants b = compute_bounds(g, R);
    std::cout << std::setprecision(6) << "bound constants (T_bar = " << R << ")\n";
    const std::vector<std::pair<std::string, double>> rows = {
        {"T_bar", b.T_bar}, {"z_bar", b.z_bar}, {"t_x", b.t_x},   {"t_r", b.t_r},     {"z2", b.z2},
        {"z3", b.z3},       {"z23", b.z23},     {"e_bar", b.e_bar}, {"rho", b.rho},   {"J_bar", b.J_bar},
        {"g_bar", b.g_bar}, {"tau1", b.tau1},   {"tau2", b.tau2}, {"tau3", b.tau3},   {"tau4", b.tau4},
        {"h_ii", b.h_ii},   {"h_ij", b.h_ij},   {"Omega_bar", b.Omega_bar}, {"L_g", b.L_g}, {"beta", b.beta}};
    json bj = json::object();
    for (const auto& [k, v] : rows) {
      std::cout << "  " << std::left << std::setw(10) << k << ' ' << v << '\n';
      bj[k] = v;
    }
    m.j["metrics"]["bounds"] = bj;
    const BoundSample s = sample_bounds(g, R, a.bound_points, a.bound_tangents, a.seed);
    results.push_back({"bound_e_bar", s.max_e, b.e_bar, s.max_e <= b.e_bar, ""});
    results.push_back({"bound_J_bar", s.max_jac, b.J_bar, s.max_jac <= b.J_bar, ""});
    results.push_back({"bound_g_bar", s.max_g01, b.g_bar, s.max_g01 <= b.g_bar, ""});
    results.push_back({"bound_L_g", s.max_hess, b.L_g, s.max_hess <= b.L_g, ""});
    results.push_back({"bound_beta", s.max_rgn, b.beta, s.max_rgn <= b.beta, ""});
  }

  bool ok = true;
  json rj = json::array();
  for (const CheckResult& r : results) {
    ok = ok && r.pass;
    std::cout << (r.pass ? "PASS " : "FAIL ") << std::left << std::setw(34) << r.name << " value " << std::setprecision(3)
              << std::scientific << r.value << " tol " << r.tolerance << std::defaultfloat;
    if (!r.detail.empty()) std::cout << "  [" << r.detail << "]";
    std::cout << '\n';
    rj.push_back({{"name", r.name}, {"value", r.value}, {"tolerance", r.tolerance}, {"pass", r.pass}, {"detail", r.detail}});
  }
  const int status = ok ? kOk : kCheckFailed;
  if (!a.out.empty()) {
    m.j["inputs"] = {{"graph", a.graph}};
    m.j["config"] = {{"n", a.n}, {"sigma_w", a.sigma_w}, {"bounds", a.bounds}, {"radius", a.radius}};
    m.j["seed"] = a.seed;
    m.j["metrics"]["checks"] = rj;
    m.write(fs::path(a.out), status);
  }
  if (!ok) {
    std::cerr << "failing checks:";
    for (const CheckResult& r : results)
      if (!r.pass) std::cerr << ' ' << r.name << (r.detail.empty() ? "" : " (" + r.detail + ")");
    std::cerr << '\n';
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose graph optimization with planar unit dual quaternions"};
  app.require_subcommand(1);
  const std::vector<std::string> argv_list = args_of(argc, argv);

  SynthArgs sa;
  std::uint64_t seed_value = 0;
  auto* synth = app.add_subcommand("synth", "generate a synthetic grid trial");
  synth->add_option("--n", sa.cfg.n_vertices, "vertex count")->check(CLI::Range(2, 100000000));
  synth->add_option("--sigma-w", sa.cfg.sigma_w, "Wishart scale")->check(CLI::PositiveNumber);
  auto* seed_opt = synth->add_option("--seed", seed_value, "RNG seed (drawn and recorded when omitted)");
  synth->add_option("--grid-step", sa.cfg.grid_step, "grid step in meters")->check(CLI::PositiveNumber);
  synth->add_option("--lc-prob", sa.cfg.loop_closure_prob, "loop closure probability")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--lc-radius", sa.cfg.loop_closure_radius, "loop closure radius in meters")->check(CLI::NonNegativeNumber);
  synth->add_option("--straight-prob", sa.cfg.straight_prob, "probability of not turning")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--wishart-dof", sa.cfg.wishart_dof, "Wishart degrees of freedom")->check(CLI::Range(3, 1000));
  synth->add_option("--out", sa.out, "output directory");
  synth->add_flag("--g2o", sa.g2o, "also write graph.g2o");
  synth->add_option("--g2o-info-frame", sa.g2o_frame, "frame of g2o information matrices")
      ->check(CLI::IsMember({"euclidean", "se2_algebra", "pudq_tangent"}));

  SolveArgs so;
  auto* solve_cmd = app.add_subcommand("solve", "run the Riemannian trust-region solver");
  solve_cmd->add_option("--graph", so.graph, "input graph (.json or .g2o)")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--format", so.format, "auto, json or g2o")->check(CLI::IsMember({"auto", "json", "extended_json", "g2o", "g2o_se2"}));
  solve_cmd->add_option("--info-frame", so.info_frame, "frame of g2o information matrices")
      ->check(CLI::IsMember({"euclidean", "se2_algebra", "pudq_tangent"}));
  solve_cmd->add_option("--init", so.init, "chordal, odometry, file, graph or ground_truth")
      ->check(CLI::IsMember({"chordal", "odometry", "file", "graph", "ground_truth"}));
  solve_cmd->add_option("--init-file", so.init_file, "initial estimate for --init file")->check(CLI::ExistingFile);
  solve_cmd->add_option("--eps-g", so.cfg.eps_g, "gradient norm tolerance")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--delta0", so.cfg.delta0, "initial trust radius")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--delta-max", so.cfg.delta_max, "maximum trust radius")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--rho-prime", so.cfg.rho_prime, "acceptance threshold");
  solve_cmd->add_option("--kappa", so.cfg.tcg_kappa, "tCG linear convergence factor");
  solve_cmd->add_option("--theta", so.cfg.tcg_theta, "tCG superlinear exponent");
  solve_cmd->add_option("--max-iters", so.cfg.max_outer_iters, "outer iteration cap")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--max-inner", so.cfg.max_inner_iters, "tCG iteration cap (0 = 3N)")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--hessian", so.hessian, "rgn or exact")->check(CLI::IsMember({"rgn", "exact"}));
  solve_cmd->add_option("--preconditioner", so.preconditioner, "tCG preconditioner: gauss_newton or none")
      ->check(CLI::IsMember({"gauss_newton", "none"}));
  solve_cmd->add_option("--out", so.out, "output directory");
  solve_cmd->add_flag("--quiet", so.quiet, "no per-iteration log");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "relative pose errors against ground truth");
  eval->add_option("--graph", ea.graph, "graph providing the edge set")->required()->check(CLI::ExistingFile);
  eval->add_option("--format", ea.format, "auto, json or g2o");
  eval->add_option("--info-frame", ea.info_frame, "frame of g2o information matrices");
  eval->add_option("--estimate", ea.estimate, "estimate to score")->required()->check(CLI::ExistingFile);
  eval->add_option("--ground-truth", ea.ground_truth, "ground truth poses (defaults to the graph's)")->check(CLI::ExistingFile);
  eval->add_option("--baseline", ea.baseline, "second estimate for percent reduction")->check(CLI::ExistingFile);
  eval->add_option("--out", ea.out, "output directory");

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "finite-difference and bound checks");
  check->add_option("--graph", ca.graph, "graph to check (random when omitted)")->check(CLI::ExistingFile);
  check->add_option("--format", ca.format, "auto, json or g2o");
  check->add_option("--info-frame", ca.info_frame, "frame of g2o information matrices");
  check->add_option("--n", ca.n, "vertex count of the random graph");
  check->add_option("--sigma-w", ca.sigma_w, "Wishart scale of the random graph")->check(CLI::PositiveNumber);
  check->add_option("--seed", ca.seed, "seed");
  check->add_flag("--bounds", ca.bounds, "print and validate the bound constants");
  check->add_option("--radius", ca.radius, "T_bar for --bounds (default ||X|| + margin)");
  check->add_option("--bound-points", ca.bound_points, "sampled points for --bounds");
  check->add_option("--bound-tangents", ca.bound_tangents, "sampled tangents per point for --bounds");
  check->add_option("--out", ca.out, "directory for a manifest");
#ifdef PUDQ_FAULT_INJECTION
  check->add_option("--inject-fault", ca.fault)->group("");
#endif

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*synth) {
      if (*seed_opt) sa.seed = seed_value;
      return cmd_synth(sa, argv_list);
    }
    if (*solve_cmd) return cmd_solve(so, argv_list);
    if (*eval) return cmd_eval(ea, argv_list);
    if (*check) return cmd_check(ca, argv_list);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}
