#pragma once

// CSV formats and the flat key = value configuration file.
//
// Headers are normative:
//   stations.csv  x_m,y_m,z_m
//   data.csv      x_m,y_m,z_m,gz_mgal,std_mgal
//   model.csv     i,j,k,x_m,y_m,z_m,rho_gcc
//   log.csv       iter,alpha,chi2,re,seconds
//   spectrum.csv  index,sigma
//   compare.csv   solver,subspace,re,k,seconds
//   upre_<k>.csv  alpha,upre
// Floating-point values are written with 17 significant digits.

#include "gravinv/forward.hpp"
#include "gravinv/irls.hpp"
#include "gravinv/mesh.hpp"
#include "gravinv/synthetics.hpp"
#include "gravinv/types.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gravinv::io {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Shortest text that reads back to the same double.
inline std::string fmt_shortest(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw Error(where + ": cannot parse '" + s + "' as a number");
  return v;
}

inline long long parse_int(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw Error(where + ": cannot parse '" + s + "' as an integer");
  return v;
}

inline std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot open '" + p.string() + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error("cannot open '" + p.string() + "' for writing");
  return out;
}

/// Reads a CSV with an exact header; returns rows of raw fields.
inline std::vector<std::vector<std::string>> read_table(std::istream& in, const std::string& header,
                                                        const std::string& what) {
  std::string line;
  if (!std::getline(in, line)) throw Error(what + ": empty file");
  if (trim(line) != header)
    throw Error(what + ": header '" + trim(line) + "' does not match '" + header + "'");
  const std::size_t cols = split(header).size();
  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto f = split(trim(line));
    if (f.size() != cols)
      throw Error(what + ": line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                  " fields, expected " + std::to_string(cols));
    rows.push_back(std::move(f));
  }
  return rows;
}

}  // namespace detail

inline constexpr const char* kStationsHeader = "x_m,y_m,z_m";
inline constexpr const char* kDataHeader = "x_m,y_m,z_m,gz_mgal,std_mgal";
inline constexpr const char* kModelHeader = "i,j,k,x_m,y_m,z_m,rho_gcc";
inline constexpr const char* kLogHeader = "iter,alpha,chi2,re,seconds";
inline constexpr const char* kSpectrumHeader = "index,sigma";
inline constexpr const char* kCompareHeader = "solver,subspace,re,k,seconds";
inline constexpr const char* kUpreHeader = "alpha,upre";

// --- stations -------------------------------------------------------------

inline void write_stations(std::ostream& out, const StationSet& st) {
  out << kStationsHeader << '\n';
  for (const auto& p : st.points())
    out << fmt_double(p.x) << ',' << fmt_double(p.y) << ',' << fmt_double(p.z) << '\n';
}

inline StationSet read_stations(std::istream& in) {
  std::vector<Point3> pts;
  for (const auto& r : detail::read_table(in, kStationsHeader, "stations.csv"))
    pts.push_back({detail::parse_double(r[0], "stations.csv"), detail::parse_double(r[1], "stations.csv"),
                   detail::parse_double(r[2], "stations.csv")});
  return StationSet(std::move(pts));
}

// --- data -----------------------------------------------------------------

struct DataSet {
  StationSet stations;
  Vector gz;   // mGal
  Vector std;  // mGal; zero for noise-free predictions
};

inline void write_data(std::ostream& out, const DataSet& d) {
  gravinv::detail::require(d.gz.size() == d.stations.size() && d.std.size() == d.stations.size(),
                  "write_data: length mismatch");
  out << kDataHeader << '\n';
  for (Index i = 0; i < d.stations.size(); ++i) {
    const auto& p = d.stations[i];
    out << fmt_double(p.x) << ',' << fmt_double(p.y) << ',' << fmt_double(p.z) << ','
        << fmt_double(d.gz(i)) << ',' << fmt_double(d.std(i)) << '\n';
  }
}

inline DataSet read_data(std::istream& in) {
  const auto rows = detail::read_table(in, kDataHeader, "data.csv");
  std::vector<Point3> pts;
  DataSet d;
  d.gz.resize(static_cast<Index>(rows.size()));
  d.std.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    pts.push_back({detail::parse_double(r[0], "data.csv"), detail::parse_double(r[1], "data.csv"),
                   detail::parse_double(r[2], "data.csv")});
    d.gz(static_cast<Index>(i)) = detail::parse_double(r[3], "data.csv");
    d.std(static_cast<Index>(i)) = detail::parse_double(r[4], "data.csv");
  }
  d.stations = StationSet(std::move(pts));
  return d;
}

// --- model ----------------------------------------------------------------

inline void write_model(std::ostream& out, const Mesh& mesh, const Vector& rho) {
  gravinv::detail::require(rho.size() == mesh.size(), "write_model: model length does not match mesh");
  out << kModelHeader << '\n';
  for (Index c = 0; c < mesh.size(); ++c) {
    const CellIndex ijk = mesh.cell(c);
    const Point3 p = mesh.center(ijk);
    out << ijk.i << ',' << ijk.j << ',' << ijk.k << ',' << fmt_double(p.x) << ',' << fmt_double(p.y)
        << ',' << fmt_double(p.z) << ',' << fmt_double(rho(c)) << '\n';
  }
}

/// Reads densities in mesh order; rows may come in any order but must cover
/// every cell exactly once.
inline Vector read_model(std::istream& in, const Mesh& mesh) {
  const auto rows = detail::read_table(in, kModelHeader, "model.csv");
  if (static_cast<Index>(rows.size()) != mesh.size())
    throw Error("model.csv: " + std::to_string(rows.size()) + " rows for a mesh of " +
                std::to_string(mesh.size()) + " cells");
  Vector rho = Vector::Constant(mesh.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : rows) {
    const CellIndex c{detail::parse_int(r[0], "model.csv"), detail::parse_int(r[1], "model.csv"),
                      detail::parse_int(r[2], "model.csv")};
    if (c.i < 0 || c.i >= mesh.nx() || c.j < 0 || c.j >= mesh.ny() || c.k < 0 || c.k >= mesh.nz())
      throw Error("model.csv: cell index out of range");
    rho(mesh.linear(c)) = detail::parse_double(r[6], "model.csv");
  }
  if (!rho.allFinite()) throw Error("model.csv: missing or non-finite cells");
  return rho;
}

// --- log / spectrum / compare / upre --------------------------------------

inline void write_log(std::ostream& out, const InversionResult& res) {
  out << kLogHeader << '\n';
  for (const auto& r : res.iterations)
    out << r.k << ',' << fmt_double(r.alpha) << ',' << fmt_double(r.chi2) << ','
        << fmt_double(r.relative_error) << ',' << fmt_double(r.seconds) << '\n';
}

struct LogRow {
  Index iter;
  double alpha, chi2, re, seconds;
};

inline std::vector<LogRow> read_log(std::istream& in) {
  std::vector<LogRow> out;
  for (const auto& r : detail::read_table(in, kLogHeader, "log.csv"))
    out.push_back({detail::parse_int(r[0], "log.csv"), detail::parse_double(r[1], "log.csv"),
                   detail::parse_double(r[2], "log.csv"), detail::parse_double(r[3], "log.csv"),
                   detail::parse_double(r[4], "log.csv")});
  return out;
}

inline void write_spectrum(std::ostream& out, const Vector& sigma) {
  out << kSpectrumHeader << '\n';
  for (Index i = 0; i < sigma.size(); ++i) out << (i + 1) << ',' << fmt_double(sigma(i)) << '\n';
}

inline Vector read_spectrum(std::istream& in) {
  const auto rows = detail::read_table(in, kSpectrumHeader, "spectrum.csv");
  Vector s(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) s(static_cast<Index>(i)) = detail::parse_double(rows[i][1], "spectrum.csv");
  return s;
}

struct CompareRow {
  std::string solver;
  Index subspace = 0;
  double re = 0.0;
  Index k = 0;
  double seconds = 0.0;
};

inline void write_compare(std::ostream& out, const std::vector<CompareRow>& rows) {
  out << kCompareHeader << '\n';
  for (const auto& r : rows)
    out << r.solver << ',' << r.subspace << ',' << fmt_double(r.re) << ',' << r.k << ','
        << fmt_double(r.seconds) << '\n';
}

inline std::vector<CompareRow> read_compare(std::istream& in) {
  std::vector<CompareRow> out;
  for (const auto& r : detail::read_table(in, kCompareHeader, "compare.csv"))
    out.push_back({r[0], detail::parse_int(r[1], "compare.csv"), detail::parse_double(r[2], "compare.csv"),
                   detail::parse_int(r[3], "compare.csv"), detail::parse_double(r[4], "compare.csv")});
  return out;
}

inline void write_upre_curve(std::ostream& out, const UpreMinimum& u) {
  out << kUpreHeader << '\n';
  for (std::size_t i = 0; i < u.grid_alpha.size(); ++i)
    out << fmt_double(u.grid_alpha[i]) << ',' << fmt_double(u.grid_value[i]) << '\n';
}

// --- configuration --------------------------------------------------------

/// Run configuration. Every key and default is listed in `config_keys()`.
struct RunConfig {
  std::array<double, 3> extent{1500.0, 1000.0, 500.0};
  std::array<double, 3> cell{50.0, 50.0, 50.0};
  Point3 origin{};
  double depth_beta = 0.8;
  std::optional<double> depth_z0;  // default: half the vertical cell size
  InversionConfig inversion{};
  NoiseSpec noise{};
  double memory_cap_gib = 8.0;
  bool allow_large_kernel = false;
  std::string synthetic_model = "two-cube";  // bodies used by `synth`

  Mesh mesh() const { return build_mesh(extent, cell, origin); }
  double z0() const { return depth_z0 ? *depth_z0 : 0.5 * cell[2]; }
  MemoryPolicy memory() const {
    return {static_cast<std::size_t>(memory_cap_gib * static_cast<double>(std::size_t{1} << 30)),
            allow_large_kernel};
  }
};

struct ConfigKey {
  const char* name;
  const char* default_value;
  const char* meaning;
};

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"mesh_extent_x_m", "1500", "mesh length along x"},
      {"mesh_extent_y_m", "1000", "mesh length along y"},
      {"mesh_extent_z_m", "500", "mesh depth extent"},
      {"mesh_cell_x_m", "50", "cell edge along x"},
      {"mesh_cell_y_m", "50", "cell edge along y"},
      {"mesh_cell_z_m", "50", "cell edge along z"},
      {"mesh_origin_x_m", "0", "south-west corner x"},
      {"mesh_origin_y_m", "0", "south-west corner y"},
      {"mesh_origin_z_m", "0", "depth of the mesh top"},
      {"depth_beta", "0.8", "depth weighting exponent"},
      {"depth_z0_m", "cell_z/2", "depth weighting offset"},
      {"solver", "rsvd", "rsvd | fsvd | lsqr"},
      {"q", "100", "RSVD target rank"},
      {"p", "10", "RSVD oversampling"},
      {"t", "100", "GKB subspace size"},
      {"seed", "0", "RSVD sketch seed"},
      {"epsilon", "1e-4", "focusing parameter (g/cm^3)"},
      {"rho_min", "0", "lower density bound (g/cm^3)"},
      {"rho_max", "1", "upper density bound (g/cm^3)"},
      {"k_max", "50", "maximum iterations"},
      {"stabilizer", "l1", "l1 | ms"},
      {"alpha1_rule", "sigma1", "sigma1 | spectral rule for alpha at iteration 1"},
      {"alpha1_factor", "50", "sigma1 rule: alpha = factor * sigma_1"},
      {"alpha1_exponent", "3.5", "spectral rule: alpha = (n/m)^exponent * sigma_1 / mean(sigma)"},
      {"alpha_grid_size", "100", "UPRE grid points"},
      {"alpha_refine_tol", "1e-3", "golden-section tolerance (0 disables)"},
      {"tupre_rule", "ritz", "ritz | threshold truncation of the LSQR spectrum"},
      {"tupre_ritz_tol", "1e-2", "ritz rule: keep leading values with relative residual <= tol"},
      {"tupre_threshold", "1e-3", "threshold rule: keep sigma_i >= threshold * sigma_1"},
      {"stagnation_tol", "1e-6", "relative model change that ends the iteration"},
      {"basis", "factored", "factored | explicit application of the RSVD basis"},
      {"small_svd", "eig", "eig | svd route for the projected matrix"},
      {"reorthogonalize", "true", "full reorthogonalization in GKB"},
      {"reweight_reference", "previous", "previous | apriori model in the focusing weight"},
      {"noise_a", "0.02", "relative noise factor"},
      {"noise_b", "0.002", "noise factor on ||d||"},
      {"noise_seed", "1", "noise seed"},
      {"noise_absolute", "false", "use |d_i| in the noise model"},
      {"memory_cap_gib", "8", "cap on the dense kernel size"},
      {"allow_large_kernel", "false", "permit kernels above the cap"},
      {"synthetic_model", "two-cube", "two-cube | multibody bodies for synth"},
  };
  return keys;
}

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config: key '" + key + "' expects true/false, got '" + v + "'");
}

}  // namespace detail

inline Solver parse_solver(const std::string& v) {
  if (v == "rsvd") return Solver::Rsvd;
  if (v == "fsvd") return Solver::Fsvd;
  if (v == "lsqr") return Solver::Lsqr;
  throw Error("unknown solver '" + v + "' (expected rsvd, fsvd, lsqr)");
}

inline Alpha1Rule parse_alpha1_rule(const std::string& v) {
  if (v == "sigma1") return Alpha1Rule::ScaledSigma1;
  if (v == "spectral") return Alpha1Rule::Spectral;
  throw Error("unknown alpha1 rule '" + v + "' (expected sigma1, spectral)");
}

inline Stabilizer parse_stabilizer(const std::string& v) {
  if (v == "l1") return Stabilizer::L1;
  if (v == "ms") return Stabilizer::MinimumSupport;
  throw Error("unknown stabilizer '" + v + "' (expected l1, ms)");
}

/// Applies one key = value pair. Unknown keys are rejected.
inline void apply_config_value(RunConfig& c, const std::string& key, const std::string& v) {
  const std::string where = "config key '" + key + "'";
  auto num = [&] { return detail::parse_double(v, where); };
  auto integer = [&] { return static_cast<Index>(detail::parse_int(v, where)); };
  InversionConfig& inv = c.inversion;

  if (key == "mesh_extent_x_m") c.extent[0] = num();
  else if (key == "mesh_extent_y_m") c.extent[1] = num();
  else if (key == "mesh_extent_z_m") c.extent[2] = num();
  else if (key == "mesh_cell_x_m") c.cell[0] = num();
  else if (key == "mesh_cell_y_m") c.cell[1] = num();
  else if (key == "mesh_cell_z_m") c.cell[2] = num();
  else if (key == "mesh_origin_x_m") c.origin.x = num();
  else if (key == "mesh_origin_y_m") c.origin.y = num();
  else if (key == "mesh_origin_z_m") c.origin.z = num();
  else if (key == "depth_beta") c.depth_beta = num();
  else if (key == "depth_z0_m") c.depth_z0 = num();
  else if (key == "solver") inv.solver = parse_solver(v);
  else if (key == "q") inv.q = integer();
  else if (key == "p") inv.p = integer();
  else if (key == "t") inv.t = integer();
  else if (key == "seed") inv.seed = static_cast<std::uint64_t>(detail::parse_int(v, where));
  else if (key == "epsilon") inv.epsilon = num();
  else if (key == "rho_min") inv.rho_min = num();
  else if (key == "rho_max") inv.rho_max = num();
  else if (key == "k_max") inv.k_max = integer();
  else if (key == "stabilizer") inv.stabilizer = parse_stabilizer(v);
  else if (key == "alpha1_rule") inv.alpha1_rule = parse_alpha1_rule(v);
  else if (key == "alpha1_factor") inv.alpha1_factor = num();
  else if (key == "alpha1_exponent") inv.alpha1_exponent = num();
  else if (key == "alpha_grid_size") inv.search.grid_size = integer();
  else if (key == "alpha_refine_tol") inv.search.refine_tolerance = num();
  else if (key == "tupre_rule") {
    if (v == "ritz") inv.tupre_rule = TupreRule::RitzConverged;
    else if (v == "threshold") inv.tupre_rule = TupreRule::Threshold;
    else throw Error(where + ": expected ritz or threshold, got '" + v + "'");
  } else if (key == "tupre_ritz_tol") inv.tupre_ritz_tolerance = num();
  else if (key == "tupre_threshold") inv.tupre_threshold = num();
  else if (key == "stagnation_tol") inv.stagnation_tolerance = num();
  else if (key == "basis") {
    if (v == "factored") inv.basis = BasisApplication::Factored;
    else if (v == "explicit") inv.basis = BasisApplication::Explicit;
    else throw Error(where + ": expected factored or explicit, got '" + v + "'");
  } else if (key == "small_svd") {
    if (v == "eig") inv.route = SmallSvdRoute::EigenBtB;
    else if (v == "svd") inv.route = SmallSvdRoute::DirectSvd;
    else throw Error(where + ": expected eig or svd, got '" + v + "'");
  } else if (key == "reorthogonalize") inv.reorthogonalize = detail::parse_bool(v, key);
  else if (key == "reweight_reference") {
    if (v == "previous") inv.reweight = ReweightReference::PreviousIterate;
    else if (v == "apriori") inv.reweight = ReweightReference::APriori;
    else throw Error(where + ": expected previous or apriori, got '" + v + "'");
  } else if (key == "noise_a") c.noise.a = num();
  else if (key == "noise_b") c.noise.b = num();
  else if (key == "noise_seed") c.noise.seed = static_cast<std::uint64_t>(detail::parse_int(v, where));
  else if (key == "noise_absolute") c.noise.absolute = detail::parse_bool(v, key);
  else if (key == "memory_cap_gib") c.memory_cap_gib = num();
  else if (key == "allow_large_kernel") c.allow_large_kernel = detail::parse_bool(v, key);
  else if (key == "synthetic_model") {
    if (v != "two-cube" && v != "multibody")
      throw Error(where + ": expected two-cube or multibody, got '" + v + "'");
    c.synthetic_model = v;
  }
  else throw Error("config: unknown key '" + key + "'");
}

inline RunConfig parse_config(std::istream& in) {
  RunConfig c;
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (auto it = seen.find(key); it != seen.end())
      throw Error("config line " + std::to_string(lineno) + ": key '" + key +
                  "' already set on line " + std::to_string(it->second));
    seen[key] = lineno;
    apply_config_value(c, key, value);
  }
  c.inversion.validate();
  c.mesh();
  return c;
}

inline void write_config(std::ostream& out, const RunConfig& c) {
  const InversionConfig& inv = c.inversion;
  out << "# mesh\n"
      << "mesh_extent_x_m = " << fmt_shortest(c.extent[0]) << '\n'
      << "mesh_extent_y_m = " << fmt_shortest(c.extent[1]) << '\n'
      << "mesh_extent_z_m = " << fmt_shortest(c.extent[2]) << '\n'
      << "mesh_cell_x_m = " << fmt_shortest(c.cell[0]) << '\n'
      << "mesh_cell_y_m = " << fmt_shortest(c.cell[1]) << '\n'
      << "mesh_cell_z_m = " << fmt_shortest(c.cell[2]) << '\n'
      << "mesh_origin_x_m = " << fmt_shortest(c.origin.x) << '\n'
      << "mesh_origin_y_m = " << fmt_shortest(c.origin.y) << '\n'
      << "mesh_origin_z_m = " << fmt_shortest(c.origin.z) << '\n'
      << "# depth weighting\n"
      << "depth_beta = " << fmt_shortest(c.depth_beta) << '\n'
      << "depth_z0_m = " << fmt_shortest(c.z0()) << '\n'
      << "# inversion\n"
      << "solver = " << to_string(inv.solver) << '\n'
      << "q = " << inv.q << '\n'
      << "p = " << inv.p << '\n'
      << "t = " << inv.t << '\n'
      << "seed = " << inv.seed << '\n'
      << "epsilon = " << fmt_shortest(inv.epsilon) << '\n'
      << "rho_min = " << fmt_shortest(inv.rho_min) << '\n'
      << "rho_max = " << fmt_shortest(inv.rho_max) << '\n'
      << "k_max = " << inv.k_max << '\n'
      << "stabilizer = " << to_string(inv.stabilizer) << '\n'
      << "alpha1_rule = " << to_string(inv.alpha1_rule) << '\n'
      << "alpha1_factor = " << fmt_shortest(inv.alpha1_factor) << '\n'
      << "alpha1_exponent = " << fmt_shortest(inv.alpha1_exponent) << '\n'
      << "alpha_grid_size = " << inv.search.grid_size << '\n'
      << "alpha_refine_tol = " << fmt_shortest(inv.search.refine_tolerance) << '\n'
      << "tupre_rule = " << to_string(inv.tupre_rule) << '\n'
      << "tupre_ritz_tol = " << fmt_shortest(inv.tupre_ritz_tolerance) << '\n'
      << "tupre_threshold = " << fmt_shortest(inv.tupre_threshold) << '\n'
      << "stagnation_tol = " << fmt_shortest(inv.stagnation_tolerance) << '\n'
      << "basis = " << (inv.basis == BasisApplication::Factored ? "factored" : "explicit") << '\n'
      << "small_svd = " << (inv.route == SmallSvdRoute::EigenBtB ? "eig" : "svd") << '\n'
      << "reorthogonalize = " << (inv.reorthogonalize ? "true" : "false") << '\n'
      << "reweight_reference = "
      << (inv.reweight == ReweightReference::PreviousIterate ? "previous" : "apriori") << '\n'
      << "# noise\n"
      << "noise_a = " << fmt_shortest(c.noise.a) << '\n'
      << "noise_b = " << fmt_shortest(c.noise.b) << '\n'
      << "noise_seed = " << c.noise.seed << '\n'
      << "noise_absolute = " << (c.noise.absolute ? "true" : "false") << '\n'
      << "# memory\n"
      << "memory_cap_gib = " << fmt_shortest(c.memory_cap_gib) << '\n'
      << "allow_large_kernel = " << (c.allow_large_kernel ? "true" : "false") << '\n'
      << "# synthetic model\n"
      << "synthetic_model = " << c.synthetic_model << '\n';
}

inline RunConfig config_for_case(const ExperimentCase& ec) {
  RunConfig c;
  c.extent = ec.mesh.extent();
  c.cell = {ec.mesh.dx(), ec.mesh.dy(), ec.mesh.dz()};
  c.origin = ec.mesh.origin();
  c.synthetic_model = ec.name.rfind("multibody", 0) == 0 ? "multibody" : "two-cube";
  c.allow_large_kernel = ec.name == "multibody";
  c.depth_beta = ec.depth_beta;
  c.depth_z0 = ec.depth_z0;
  c.inversion = ec.inversion;
  c.noise = ec.noise;
  return c;
}

// --- file helpers -----------------------------------------------------------

inline RunConfig load_config(const std::filesystem::path& p) {
  auto in = detail::open_in(p);
  return parse_config(in);
}

template <class Writer>
void save(const std::filesystem::path& p, Writer&& w) {
  auto out = detail::open_out(p);
  w(out);
  if (!out) throw Error("write to '" + p.string() + "' failed");
}

template <class Reader>
auto load(const std::filesystem::path& p, Reader&& r) {
  auto in = detail::open_in(p);
  return r(in);
}

}  // namespace gravinv::io
