// gravinv command-line driver: synth | forward | invert | svd | compare.

#include "gravinv/gravinv.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace gravinv;

namespace {

struct Common {
  std::string config;
  std::string case_name;
  std::string out_dir = ".";
  std::optional<std::string> solver;
  std::optional<Index> q, t;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon, beta, alpha1_factor;
  std::optional<std::string> stabilizer;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value configuration file")->check(CLI::ExistingFile);
  app->add_option("--case", c.case_name, "preset: two-cube, multibody, multibody-half");
  app->add_option("--out-dir", c.out_dir, "output directory");
  app->add_option("--solver", c.solver, "rsvd | fsvd | lsqr")->check(CLI::IsMember({"rsvd", "fsvd", "lsqr"}));
  app->add_option("--q", c.q, "RSVD target rank");
  app->add_option("--t", c.t, "GKB subspace size");
  app->add_option("--seed", c.seed, "RSVD sketch seed");
  app->add_option("--epsilon", c.epsilon, "focusing parameter");
  app->add_option("--beta", c.beta, "depth weighting exponent");
  app->add_option("--alpha1-factor", c.alpha1_factor, "alpha at iteration 1 = factor * sigma_1");
  app->add_option("--stabilizer", c.stabilizer, "l1 | ms")->check(CLI::IsMember({"l1", "ms"}));
}

// Config file first, then the case preset for anything it leaves unset, then flags.
io::RunConfig resolve(const Common& c) {
  io::RunConfig cfg;
  if (!c.case_name.empty()) cfg = io::config_for_case(make_case(c.case_name));
  if (!c.config.empty()) {
    if (!c.case_name.empty())
      throw Error("give either --config or --case, not both");
    cfg = io::load_config(c.config);
  }
  InversionConfig& inv = cfg.inversion;
  if (c.solver) inv.solver = io::parse_solver(*c.solver);
  if (c.q) inv.q = *c.q;
  if (c.t) inv.t = *c.t;
  if (c.seed) inv.seed = *c.seed;
  if (c.epsilon) inv.epsilon = *c.epsilon;
  if (c.beta) cfg.depth_beta = *c.beta;
  if (c.alpha1_factor) {
    inv.alpha1_factor = *c.alpha1_factor;
    inv.alpha1_rule = Alpha1Rule::ScaledSigma1;
  }
  if (c.stabilizer) inv.stabilizer = io::parse_stabilizer(*c.stabilizer);
  inv.validate();
  return cfg;
}

fs::path out_path(const Common& c, const char* name) {
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / name;
}

ExperimentCase case_from_config(const Common& c, const io::RunConfig& cfg) {
  ExperimentCase ec;
  if (!c.case_name.empty()) {
    ec = make_case(c.case_name);
  } else {
    ec.name = "custom";
    ec.mesh = cfg.mesh();
    ec.stations = StationSet::above_cells(ec.mesh);
    ec.model = cfg.synthetic_model == "multibody" ? make_multibody_model(ec.mesh) : make_two_cube_model(ec.mesh);
  }
  ec.noise = cfg.noise;
  ec.depth_beta = cfg.depth_beta;
  ec.depth_z0 = cfg.z0();
  ec.inversion = cfg.inversion;
  return ec;
}

// Observed data plus everything needed to invert it.
struct Loaded {
  io::RunConfig cfg;
  Mesh mesh;
  io::DataSet data;
  Matrix G;
  std::optional<Vector> truth;

  InversionProblem problem() const {
    InversionProblem p;
    p.G = &G;
    p.d_obs = data.gz;
    detail::require((data.std.array() > 0.0).all(), "data.csv: std_mgal must be positive for inversion");
    p.wd = data.std.cwiseInverse();
    p.m_apr = Vector::Zero(mesh.size());
    p.wh = Vector::Ones(mesh.size());
    p.wz = depth_weighting(mesh, cfg.depth_beta, cfg.z0());
    p.m_exact = truth;
    return p;
  }
};

struct Inputs {
  std::string data, truth;
};

void add_inputs(CLI::App* app, Inputs& in) {
  app->add_option("--data", in.data, "data.csv with observed gz and std")->check(CLI::ExistingFile);
  app->add_option("--truth", in.truth, "true model.csv for relative errors")->check(CLI::ExistingFile);
}

Loaded load_inputs(const Common& c, const Inputs& in) {
  Loaded l;
  l.cfg = resolve(c);
  l.mesh = l.cfg.mesh();
  if (!in.data.empty()) {
    l.data = io::load(in.data, io::read_data);
    if (!in.truth.empty()) l.truth = io::load(in.truth, [&](std::istream& s) { return io::read_model(s, l.mesh); });
  } else {
    if (c.case_name.empty()) throw Error("--data is required unless --case generates the problem");
    const ExperimentCase ec = case_from_config(c, l.cfg);
    const Matrix G = assemble_kernel(ec.mesh, ec.stations, l.cfg.memory());
    const NoisyData nd = add_noise(forward(G, ec.model), ec.noise);
    l.data = {ec.stations, nd.d_obs, nd.eta};
    l.truth = ec.model;
  }
  l.G = assemble_kernel(l.mesh, l.data.stations, l.cfg.memory());
  return l;
}

void print_result(const char* label, const InversionResult& r, double seconds) {
  std::cout << label << ": " << r.iterations_run() << " iterations, termination " << to_string(r.termination)
            << ", alpha " << r.final_alpha();
  if (!r.iterations.empty() && std::isfinite(r.iterations.back().relative_error))
    std::cout << ", RE " << r.iterations.back().relative_error;
  std::cout << ", " << seconds << " s\n";
}

int cmd_synth(const Common& c) {
  if (c.case_name.empty() && c.config.empty()) throw Error("synth needs --case or --config");
  const io::RunConfig cfg = resolve(c);
  const ExperimentCase ec = case_from_config(c, cfg);
  const Matrix G = assemble_kernel(ec.mesh, ec.stations, cfg.memory());
  const NoisyData nd = add_noise(forward(G, ec.model), ec.noise);
  io::save(out_path(c, "config.cfg"), [&](std::ostream& o) { io::write_config(o, cfg); });
  io::save(out_path(c, "stations.csv"), [&](std::ostream& o) { io::write_stations(o, ec.stations); });
  io::save(out_path(c, "model.csv"), [&](std::ostream& o) { io::write_model(o, ec.mesh, ec.model); });
  io::save(out_path(c, "data.csv"), [&](std::ostream& o) { io::write_data(o, {ec.stations, nd.d_obs, nd.eta}); });
  std::cout << "synth " << ec.name << ": " << ec.stations.size() << " stations, " << ec.mesh.size()
            << " cells -> " << c.out_dir << '\n';
  return 0;
}

int cmd_forward(const Common& c, const std::string& model, const std::string& stations) {
  const io::RunConfig cfg = resolve(c);
  const Mesh mesh = cfg.mesh();
  const Vector rho = io::load(model, [&](std::istream& s) { return io::read_model(s, mesh); });
  const StationSet st = stations.empty() ? StationSet::above_cells(mesh) : io::load(stations, io::read_stations);
  const Matrix G = assemble_kernel(mesh, st, cfg.memory());
  io::save(out_path(c, "data.csv"),
           [&](std::ostream& o) { io::write_data(o, {st, forward(G, rho), Vector::Zero(st.size())}); });
  std::cout << "forward: " << st.size() << " stations -> " << c.out_dir << '\n';
  return 0;
}

int cmd_invert(const Common& c, const Inputs& in) {
  const Loaded l = load_inputs(c, in);
  const auto t0 = std::chrono::steady_clock::now();
  const InversionResult r = solve(l.problem(), l.cfg.inversion, l.cfg.memory());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::save(out_path(c, "model.csv"), [&](std::ostream& o) { io::write_model(o, l.mesh, r.model); });
  io::save(out_path(c, "log.csv"), [&](std::ostream& o) { io::write_log(o, r); });
  print_result(to_string(l.cfg.inversion.solver), r, secs);
  return 0;
}

int cmd_svd(const Common& c, const Inputs& in, bool dense) {
  const Loaded l = load_inputs(c, in);
  const InversionProblem p = l.problem();
  WeightedSystem A(l.G, p.wd, p.wz.cwiseProduct(p.wh).cwiseInverse());
  const InversionConfig& inv = l.cfg.inversion;
  const SvdTriple r = rsvd(A, RsvdConfig{inv.q, inv.p, inv.seed, inv.basis, inv.route});
  io::save(out_path(c, "spectrum.csv"), [&](std::ostream& o) { io::write_spectrum(o, r.sigma); });
  std::cout << "svd: rsvd q=" << inv.q << " sigma_1 " << r.sigma(0);
  if (dense) {
    const SvdTriple d = dense_svd_underdetermined(A.dense());
    io::save(out_path(c, "spectrum_dense.csv"), [&](std::ostream& o) { io::write_spectrum(o, d.sigma); });
    std::cout << ", dense sigma_1 " << d.sigma(0);
  }
  std::cout << '\n';
  return 0;
}

int cmd_compare(const Common& c, const Inputs& in) {
  const Loaded l = load_inputs(c, in);
  const InversionProblem p = l.problem();
  std::vector<io::CompareRow> rows;
  for (Solver s : {Solver::Rsvd, Solver::Lsqr}) {
    InversionConfig inv = l.cfg.inversion;
    inv.solver = s;
    const auto t0 = std::chrono::steady_clock::now();
    const InversionResult r = solve(p, inv, l.cfg.memory());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double re = r.iterations.empty() ? std::nan("") : r.iterations.back().relative_error;
    rows.push_back({to_string(s), s == Solver::Lsqr ? inv.t : inv.q, re, r.iterations_run(), secs});
    print_result(to_string(s), r, secs);
  }
  io::save(out_path(c, "compare.csv"), [&](std::ostream& o) { io::write_compare(o, rows); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3-D gravity inversion with randomized SVD and focusing regularization"};
  app.require_subcommand(1);

  Common synth_c, fwd_c, inv_c, svd_c, cmp_c;
  Inputs inv_in, svd_in, cmp_in;
  std::string model_file, stations_file;
  bool dense = false;

  auto* synth = app.add_subcommand("synth", "generate a synthetic case: config, stations, model, data");
  add_common(synth, synth_c);
  auto* fwd = app.add_subcommand("forward", "forward-model a density file");
  add_common(fwd, fwd_c);
  fwd->add_option("--model", model_file, "model.csv")->required()->check(CLI::ExistingFile);
  fwd->add_option("--stations", stations_file, "stations.csv (default: above cell centers)")
      ->check(CLI::ExistingFile);
  auto* inv = app.add_subcommand("invert", "invert data, writing model.csv and log.csv");
  add_common(inv, inv_c);
  add_inputs(inv, inv_in);
  auto* svd = app.add_subcommand("svd", "spectrum of the iteration-1 system");
  add_common(svd, svd_c);
  add_inputs(svd, svd_in);
  svd->add_flag("--dense", dense, "also write the dense spectrum");
  auto* cmp = app.add_subcommand("compare", "run rsvd and lsqr on one problem");
  add_common(cmp, cmp_c);
  add_inputs(cmp, cmp_in);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*synth) return cmd_synth(synth_c);
    if (*fwd) return cmd_forward(fwd_c, model_file, stations_file);
    if (*inv) return cmd_invert(inv_c, inv_in);
    if (*svd) return cmd_svd(svd_c, svd_in, dense);
    if (*cmp) return cmd_compare(cmp_c, cmp_in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
