#include "gdl/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gdl/approx.hpp"
#include "gdl/carleson.hpp"
#include "gdl/error.hpp"
#include "gdl/flatness.hpp"
#include "gdl/io.hpp"
#include "gdl/parallel.hpp"
#include "gdl/potential.hpp"
#include "gdl/verify.hpp"

namespace gdl::cli {

namespace {

namespace fs = std::filesystem;
using io::json;

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::validation:
      return 2;
    case ErrorClass::numerical:
      return 3;
    case ErrorClass::io:
      return 4;
  }
  return 3;
}

void error_record(std::ostream& err, const std::string& code, const std::string& message, const std::string& field,
                  int exit) {
  json j = {{"error", code}, {"message", message}, {"exit_code", exit}};
  if (!field.empty()) j["field"] = field;
  err << j.dump() << "\n";
}

Point parse_point(const std::string& s, const std::string& field) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw Error(Errc::validation, "cannot parse coordinate '" + tok + "'", field);
    }
  }
  if (v.empty()) throw Error(Errc::validation, "empty point", field);
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Plain CSV of points: optional header, then n numbers per line.
Eigen::MatrixXd read_points(const fs::path& path) {
  std::stringstream in(io::read_file(path));
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> r;
    std::stringstream ls(line);
    std::string tok;
    bool numeric = true;
    while (std::getline(ls, tok, ',')) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str()) {
        numeric = false;
        break;
      }
      r.push_back(v);
    }
    if (!numeric) {
      if (rows.empty()) continue;
      throw Error(Errc::validation, "non-numeric row in " + path.string(), "points");
    }
    if (!rows.empty() && r.size() != rows.front().size())
      throw Error(Errc::validation, "ragged rows in " + path.string(), "points");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(Errc::validation, "no points in " + path.string(), "points");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < rows[j].size(); ++i)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
  return m;
}

json read_json(const fs::path& path) {
  const std::string text = io::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::validation, std::string("malformed JSON: ") + e.what(), "config");
  }
}

json stamp(const json& canonical, const std::string& verb) {
  return {{"config_hash", config_hash(canonical)}, {"version", kVersion}, {"command", verb}};
}

struct Common {
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  std::string log_level = "info";
  unsigned threads = 0;
};

struct GenArgs {
  std::string kind = "plane";
  int count = 1000;
  std::string config;
  int ambient_dim = 2;
  int plane_dim = 1;
  double half_width = 1.0;
  double lipschitz = 0.1;
  double ratio = 0.25;
  int branches = 0;
  int iterations = 0;
  double side = 1.0;
  int copies = 1;
  std::string name = "cloud.csv";
};

int run_gen(const GenArgs& a, const Common& c, std::ostream& out) {
  SetParams sp;
  SetKind kind = parse_set_kind(a.kind);
  int count = a.count;
  if (!a.config.empty()) {
    const ExperimentConfig cfg = parse_experiment_config(read_json(a.config));
    sp = cfg.set;
    kind = cfg.set_kind;
    count = cfg.count;
  } else {
    sp.ambient_dim = a.ambient_dim;
    sp.plane_dim = a.plane_dim;
    sp.half_width = a.half_width;
    sp.lipschitz = a.lipschitz;
    sp.ratio = a.ratio;
    sp.branches = a.branches;
    sp.iterations = a.iterations;
    sp.side = a.side;
    sp.copies = a.copies;
  }
  const DiscreteMeasure mu = generate_set(kind, sp, count, c.seed);
  const json canonical = {{"kind", to_string(kind)},           {"count", count},         {"seed", c.seed},
                          {"ambient_dim", sp.ambient_dim},     {"plane_dim", sp.plane_dim},
                          {"half_width", sp.half_width},       {"lipschitz", sp.lipschitz},
                          {"ratio", sp.ratio},                 {"branches", sp.branches},
                          {"iterations", sp.iterations},       {"side", sp.side},
                          {"copies", sp.copies}};
  const fs::path path = fs::path(c.output_dir) / a.name;
  json extra = stamp(canonical, "gen");
  extra["kind"] = to_string(kind);
  io::write_measure(path, mu, extra);
  out << "gen: " << mu.size() << " points, d = " << io::fmt(mu.dim_d())
      << ", AR constant = " << (mu.ar_constant() ? io::fmt(*mu.ar_constant()) : "n/a") << " -> " << path.string()
      << "\n";
  return 0;
}

struct PotentialArgs {
  std::string cloud, points;
  double alpha = 1.0;
  std::string name = "potential.csv";
};

int run_potential(const PotentialArgs& a, const Common& c, std::ostream& out) {
  if (!(a.alpha > 0)) throw Error(Errc::validation, "alpha must be positive", "alpha");
  PotentialParams p;
  p.measure = io::read_measure(a.cloud);
  p.alpha = a.alpha;
  const Eigen::MatrixXd pts = read_points(a.points);
  const int n = p.measure.ambient_dim();
  if (pts.rows() != n) throw Error(Errc::validation, "points must have the cloud's dimension", "points");
  std::vector<std::string> lines(static_cast<std::size_t>(pts.cols()));
  parallel_for(lines.size(), [&](std::size_t j) {
    const Eigen::VectorXd x = pts.col(static_cast<Eigen::Index>(j));
    const double R = riesz_potential(p, x);
    const DistanceAndGradient dg = smooth_distance_with_gradient(p, x);
    std::string s;
    for (int i = 0; i < n; ++i) s += io::fmt(x[i]) + ",";
    s += io::fmt(R) + "," + io::fmt(dg.value);
    for (int i = 0; i < n; ++i) s += "," + io::fmt(dg.gradient[i]);
    lines[j] = s + "\n";
  });
  const json canonical = {{"cloud", a.cloud}, {"points", a.points}, {"alpha", a.alpha}};
  const json st = stamp(canonical, "potential");
  std::string text = "# config_hash " + st["config_hash"].get<std::string>() + " version " + kVersion + "\n";
  for (int i = 0; i < n; ++i) text += "x" + std::to_string(i + 1) + ",";
  text += "R,D";
  for (int i = 0; i < n; ++i) text += ",dD" + std::to_string(i + 1);
  text += "\n";
  for (const auto& l : lines) text += l;
  const fs::path path = fs::path(c.output_dir) / a.name;
  io::atomic_write(path, text);
  out << "potential: " << lines.size() << " points, alpha = " << io::fmt(a.alpha) << " -> " << path.string() << "\n";
  return 0;
}

struct BallArgs {
  std::string cloud, center;
  double radius = 1.0;
  int d_int = 1;
};

Ball parse_ball(const BallArgs& a) {
  if (!(a.radius > 0)) throw Error(Errc::validation, "radius must be positive", "radius");
  return Ball{parse_point(a.center, "center"), a.radius};
}

int run_alpha(const BallArgs& a, const Common& c, std::ostream& out) {
  const DiscreteMeasure mu = io::read_measure(a.cloud);
  const Ball b = parse_ball(a);
  if (b.center.size() != mu.ambient_dim()) throw Error(Errc::validation, "center has the wrong dimension", "center");
  AlphaOptions opts;
  opts.search.seed = c.seed;
  const AlphaNumber r = alpha_number(mu, b, a.d_int, opts);
  const json canonical = {{"cloud", a.cloud}, {"ball", io::to_json(b)}, {"d_int", a.d_int}, {"seed", c.seed}};
  json j = stamp(canonical, "alpha");
  j["alpha"] = r.value;
  j["coarse_value"] = r.coarse_value;
  j["ball"] = io::to_json(b);
  j["plane"] = io::to_json(r.best_fit.plane);
  j["density"] = r.best_fit.density;
  j["lp_solves"] = r.lp_solves;
  const fs::path path = fs::path(c.output_dir) / "alpha.json";
  io::atomic_write(path, j.dump(2) + "\n");
  out << "alpha: " << io::fmt(r.value) << " -> " << path.string() << "\n";
  return 0;
}

struct AuditArgs {
  BallArgs ball;
  int levels = 4;
  double eps = 0.1;
  int windows = 16;
  int samples = 16;
};

int run_audit(const AuditArgs& a, const Common& c, std::ostream& out) {
  const DiscreteMeasure mu = io::read_measure(a.ball.cloud);
  const Ball root = parse_ball(a.ball);
  PrevalenceOptions po;
  po.windows = a.windows;
  po.samples_per_level = a.samples;
  po.seed = c.seed;
  const int d = a.ball.d_int;
  const double eps = a.eps;
  const auto good = [&](const ScalePair& p) {
    try {
      return good_ur(mu, Ball{p.center, p.radius}, eps, d).good;
    } catch (const Error& e) {
      if (e.code() == Errc::under_resolved) return false;
      throw;
    }
  };
  const PrevalenceReport r = prevalence_audit(mu, root, a.levels, good, po);
  const json canonical = {{"cloud", a.ball.cloud}, {"root", io::to_json(root)}, {"levels", a.levels},
                          {"eps", eps},            {"windows", a.windows},      {"samples", a.samples},
                          {"seed", c.seed}};
  json j = stamp(canonical, "audit");
  j["verdict"] = r.verdict;
  j["max_deep_bad_fraction"] = r.max_deep_bad_fraction;
  j["packing_constant_per_level"] = r.packing_constant_per_level;
  json w = json::array();
  for (const auto& wa : r.windows)
    w.push_back({{"window", io::to_json(wa.window)},
                 {"per_level", wa.per_level},
                 {"good_fraction", wa.good_fraction},
                 {"deep_bad_fraction", wa.deep_bad_fraction}});
  j["windows"] = w;
  const fs::path path = fs::path(c.output_dir) / "audit.json";
  io::atomic_write(path, j.dump(2) + "\n");
  out << "audit: " << r.verdict << " (max deep bad fraction " << io::fmt(r.max_deep_bad_fraction) << ") -> "
      << path.string() << "\n";
  return 0;
}

int run_solve(const std::string& config, const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = parse_experiment_config(read_json(config));
  const json canonical = to_json(cfg);
  const std::string hash = config_hash(canonical);
  const fs::path path = fs::path(c.output_dir) / "green.bin";
  const char* cache = std::getenv("GDL_CACHE_DIR");
  if (cache && *cache) {
    const fs::path cached = fs::path(cache) / (hash + ".bin");
    if (fs::exists(cached)) {
      const ScalarGrid g = io::read_grid_binary(cached);
      io::write_grid_binary(path, g, stamp(canonical, "solve"));
      out << "solve: cached " << hash << " -> " << path.string() << "\n";
      return 0;
    }
  }
  const DiscreteMeasure mu = build_measure(cfg);
  const Domain dom = forward_domain(cfg, mu);
  const GreenField g = forward_green(cfg, mu, dom);
  json extra = stamp(canonical, "solve");
  extra["method"] = g.solve.method;
  extra["relative_residual"] = g.solve.relative_residual;
  io::write_grid_binary(path, g.values, extra);
  if (cache && *cache) io::write_grid_binary(fs::path(cache) / (hash + ".bin"), g.values, extra);
  out << "solve: " << g.values.size() << " nodes, " << g.solve.method << ", residual "
      << io::fmt(g.solve.relative_residual) << " -> " << path.string() << "\n";
  return 0;
}

int run_experiment_verb(const std::string& config, const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = parse_experiment_config(read_json(config));
  const ExperimentReport rep = run_experiment(cfg);
  write_report(c.output_dir, rep, cfg, kVersion);
  out << "experiment " << rep.experiment << ": " << rep.tables.size() << " tables -> "
      << (fs::path(c.output_dir) / "report.json").string() << "\n";
  return 0;
}

int run_verify(const std::string& suite, bool quick, std::ostream& out) {
  const std::vector<CheckResult> res = run_suite(suite, quick);
  int failed = 0;
  for (const auto& r : res) {
    out << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    if (!r.pass) ++failed;
  }
  out << "verify " << suite << ": " << (res.size() - failed) << "/" << res.size() << " passed\n";
  return failed == 0 ? 0 : 3;
}

}  // namespace

int dispatch(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Green functions, smoothed distances and flatness numbers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Common common;
  app.add_option("-o,--output-dir", common.output_dir, "Directory for output files");
  app.add_option("--seed", common.seed, "Random seed");
  app.add_option("--log-level", common.log_level, "error, warn, info or debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
  app.add_option("--threads", common.threads, "Worker threads (0 = logical cores)");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a point cloud");
  g->add_option("--kind", gen.kind, "plane, lipschitz_graph, koch_snowflake or cantor_dust");
  g->add_option("--count", gen.count, "Target number of points");
  g->add_option("--config", gen.config, "Experiment config whose set block is used");
  g->add_option("--ambient-dim", gen.ambient_dim);
  g->add_option("--plane-dim", gen.plane_dim);
  g->add_option("--half-width", gen.half_width);
  g->add_option("--lipschitz", gen.lipschitz);
  g->add_option("--ratio", gen.ratio);
  g->add_option("--branches", gen.branches);
  g->add_option("--iterations", gen.iterations);
  g->add_option("--side", gen.side);
  g->add_option("--copies", gen.copies);
  g->add_option("--name", gen.name, "Output file name");

  PotentialArgs pot;
  auto* p = app.add_subcommand("potential", "Evaluate R_alpha, D_alpha and grad D_alpha at points");
  p->add_option("--cloud", pot.cloud)->required();
  p->add_option("--points", pot.points, "CSV of query points")->required();
  p->add_option("--alpha", pot.alpha);
  p->add_option("--name", pot.name);

  BallArgs al;
  auto* a = app.add_subcommand("alpha", "Alpha number of a cloud in a ball");
  a->add_option("--cloud", al.cloud)->required();
  a->add_option("--center", al.center, "Comma-separated coordinates")->required();
  a->add_option("--radius", al.radius);
  a->add_option("--d-int", al.d_int);

  AuditArgs au;
  auto* u = app.add_subcommand("audit", "Prevalence audit of UR-flat pairs");
  u->add_option("--cloud", au.ball.cloud)->required();
  u->add_option("--center", au.ball.center)->required();
  u->add_option("--radius", au.ball.radius);
  u->add_option("--d-int", au.ball.d_int);
  u->add_option("--levels", au.levels);
  u->add_option("--eps", au.eps);
  u->add_option("--windows", au.windows);
  u->add_option("--samples", au.samples);

  std::string solve_config;
  auto* s = app.add_subcommand("solve", "Solve for the far-field Green function of a config");
  s->add_option("--config", solve_config)->required();

  std::string exp_config;
  auto* e = app.add_subcommand("experiment", "Run a named experiment");
  e->add_option("--config", exp_config)->required();

  std::string suite;
  bool quick = false;
  auto* v = app.add_subcommand("verify", "Run module invariant suites");
  v->add_option("suite", suite, "potentials, flatness, carleson, pde or all")->required();
  v->add_flag("--quick", quick, "Smaller samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& ex) {
    error_record(err, "validation", ex.what(), "", 2);
    return 2;
  }

  try {
    set_thread_count(common.threads);
    if (*g) return run_gen(gen, common, out);
    if (*p) return run_potential(pot, common, out);
    if (*a) return run_alpha(al, common, out);
    if (*u) return run_audit(au, common, out);
    if (*s) return run_solve(solve_config, common, out);
    if (*e) return run_experiment_verb(exp_config, common, out);
    if (*v) return run_verify(suite, quick, out);
  } catch (const Error& ex) {
    const int code = exit_code(ex.error_class());
    error_record(err, to_string(ex.code()), ex.what(), ex.field(), code);
    return code;
  } catch (const std::exception& ex) {
    error_record(err, "internal", ex.what(), "", 3);
    return 3;
  }
  return 2;
}

}  // namespace gdl::cli
