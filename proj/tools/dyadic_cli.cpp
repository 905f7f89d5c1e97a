// dyadic: batch front-end for the grid / wavelet / bilinear library.
//
// Subcommands: tops, basis, expand, verify, bilinear. Inputs are JSON
// documents (schema 1), outputs are JSON reports plus CSV plot series.
// Exit codes: 0 all requested checks pass, 1 a tolerance check failed,
// 2 schema or precondition errors.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dyadic/bilinear.hpp"
#include "dyadic/json_io.hpp"

using namespace dyadic;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << content;
  std::cout << "wrote " << path.string() << "\n";
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// "-3:5" -> {-3, 5}, fine end first.
std::pair<std::int64_t, std::int64_t> parse_window(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw SchemaError("window must look like mmin:mmax");
  try {
    std::size_t a = 0, b = 0;
    const std::int64_t lo = std::stoll(text.substr(0, colon), &a);
    const std::int64_t hi = std::stoll(text.substr(colon + 1), &b);
    if (a != colon || b != text.size() - colon - 1)
      throw SchemaError("window must look like mmin:mmax");
    if (lo >= hi) throw SchemaError("window must be fine:coarse with fine < coarse");
    if (lo < kMinScale || hi > kMaxScale) throw SchemaError("window outside the scale range");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw SchemaError("window must look like mmin:mmax");
  }
}

int env_threads() {
  const char* s = std::getenv("DYADIC_THREADS");
  if (!s) return 1;
  const long v = std::strtol(s, nullptr, 10);
  return v < 1 ? 1 : (v > 64 ? 64 : static_cast<int>(v));
}

// --- built-in registries -------------------------------------------------
//
// Custom moment systems and kernels carry callbacks, which have no JSON
// form; documents name them by id and the ids resolve here.

SystemFn make_const_one() {
  SystemFn f;
  f.eval = [](const Point&) { return 1.0; };
  f.derivative = [](const MultiIndex& a, const Point&) {
    return total_degree(a) == 0 ? 1.0 : 0.0;
  };
  return f;
}

SystemFn make_coordinate(std::size_t axis) {
  SystemFn f;
  f.eval = [axis](const Point& x) { return x[axis]; };
  f.derivative = [axis](const MultiIndex& a, const Point& x) {
    const int d = total_degree(a);
    if (d == 0) return x[axis];
    if (d == 1 && a[axis] == 1) return 1.0;
    return 0.0;
  };
  return f;
}

MomentSystem lookup_system(const std::string& id) {
  if (id == "exp1d") {
    SystemFn e;
    e.eval = [](const Point& x) { return std::exp(x[0]); };
    e.derivative = [](const MultiIndex&, const Point& x) { return std::exp(x[0]); };
    return MomentSystem::custom({make_const_one(), std::move(e)}, 2);
  }
  // affine systems = monomial callbacks in graded order, as Custom
  if (id == "affine1d")
    return MomentSystem::custom({make_const_one(), make_coordinate(0)}, 2);
  if (id == "affine2d")
    return MomentSystem::custom({make_const_one(), make_coordinate(1), make_coordinate(0)}, 2);
  throw SchemaError("unknown system id: " + id);
}

std::function<double(const Point&, const Point&)> lookup_kernel(const std::string& id) {
  if (id == "gauss")
    return [](const Point& x, const Point& y) {
      double r2 = 0;
      for (std::size_t k = 0; k < x.size(); ++k) r2 += (x[k] - y[k]) * (x[k] - y[k]);
      return std::exp(-r2);
    };
  if (id == "inv_sq")
    return [](const Point& x, const Point& y) {
      double r2 = 0;
      for (std::size_t k = 0; k < x.size(); ++k) r2 += (x[k] - y[k]) * (x[k] - y[k]);
      return 1.0 / (1.0 + r2);
    };
  throw SchemaError("unknown kernel id: " + id);
}

struct SystemChoice {
  MomentSystem sys = MomentSystem::monomials(1);
  ordered_json desc;  // for reports
};

SystemChoice resolve_system(int kappa, const std::string& system_path) {
  SystemChoice out;
  if (!system_path.empty()) {
    const ordered_json j = [&] {
      try {
        return ordered_json::parse(read_file(system_path));
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
      }
    }();
    if (!j.contains("schema") || j["schema"] != kSchemaVersion)
      throw SchemaError("unsupported schema version");
    if (!j.contains("id") || !j["id"].is_string())
      throw SchemaError("system file needs a string id");
    const std::string id = j["id"].get<std::string>();
    out.sys = lookup_system(id);
    out.desc = ordered_json{{"kind", "custom"}, {"id", id}};
    return out;
  }
  if (kappa < 1) throw SchemaError("kappa must be >= 1 (or pass --system)");
  out.sys = MomentSystem::monomials(kappa);
  out.desc = ordered_json{{"kind", "monomials"}, {"kappa", kappa}};
  return out;
}

KernelSpec resolve_kernel(const std::string& path) {
  KernelSpec k = parse_kernel(read_file(path));
  if (k.kind == KernelSpec::Kind::Custom) k.callback = lookup_kernel(k.id);
  return k;
}

ordered_json kernel_desc(const KernelSpec& k) {
  switch (k.kind) {
    case KernelSpec::Kind::Hilbert: return ordered_json{{"kind", "hilbert"}};
    case KernelSpec::Kind::RieszComponent:
      return ordered_json{{"kind", "riesz"}, {"component", k.component}};
    case KernelSpec::Kind::Custom: return ordered_json{{"kind", "custom"}, {"id", k.id}};
  }
  return {};
}

// --- shared report helpers ------------------------------------------------

ordered_json factor_to_json(const SuperCube::AxisFactor& f) {
  using Kind = SuperCube::AxisFactor::Kind;
  switch (f.kind) {
    case Kind::Finite:
      return ordered_json{{"kind", "finite"}, {"lo", f.lo.to_string()}, {"hi", f.hi.to_string()}};
    case Kind::LeftRay: return ordered_json{{"kind", "left_ray"}, {"hi", f.hi.to_string()}};
    case Kind::RightRay: return ordered_json{{"kind", "right_ray"}, {"lo", f.lo.to_string()}};
    case Kind::FullLine: return ordered_json{{"kind", "full_line"}};
  }
  return {};
}

ordered_json signature_to_json(const TopSignature& sig) {
  ordered_json arr = ordered_json::array();
  for (auto s : sig.entries) {
    switch (s) {
      case TopSignature::AxisSign::MinusInf: arr.push_back("-inf"); break;
      case TopSignature::AxisSign::PlusInf: arr.push_back("+inf"); break;
      case TopSignature::AxisSign::Both: arr.push_back("both"); break;
    }
  }
  return arr;
}

std::vector<WeightedNode> support_nodes(const Measure& mu) {
  return integration_nodes(mu, SuperCube::from_cube(mu.support_box()));
}

double sup_at_nodes(const PiecewisePolyFn& f, const std::vector<WeightedNode>& nodes) {
  double s = 0;
  for (const auto& node : nodes) s = std::max(s, std::abs(f(node.x)));
  return s;
}

double sup_diff_at_nodes(const PiecewisePolyFn& f, const PiecewisePolyFn& g,
                         const std::vector<WeightedNode>& nodes) {
  double s = 0;
  for (const auto& node : nodes) s = std::max(s, std::abs(f(node.x) - g(node.x)));
  return s;
}

// Deterministic piecewise probes over the coarse positive-mass cubes.
std::vector<PiecewisePolyFn> make_probes(const GridSpec& grid, const Measure& mu,
                                         const MomentSystem& sys, std::int64_t m_max,
                                         int count, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto cubes = positive_mass_cubes_at(grid, mu, m_max);
  if (cubes.size() > 16) cubes.resize(16);
  const int d = sys.dimension(grid.dimension());
  std::vector<PiecewisePolyFn> probes;
  for (int p = 0; p < count; ++p) {
    std::vector<PolyPiece> pieces;
    for (const auto& q : cubes) {
      std::vector<double> coeffs(static_cast<std::size_t>(d));
      for (auto& c : coeffs) c = U(rng);
      pieces.push_back({q, std::move(coeffs)});
    }
    probes.emplace_back(sys, grid.dimension(), std::move(pieces));
  }
  return probes;
}

// --- tops -----------------------------------------------------------------

struct TopsArgs {
  std::string grid_path, out_dir = ".";
  std::int64_t points = 10000;
};

int run_tops(const TopsArgs& a) {
  const GridSpec grid = parse_grid(read_file(a.grid_path));
  const int n = grid.dimension();
  const auto tops_sig = tops_with_signatures(grid);
  const std::int64_t bound = std::int64_t{1} << n;

  // fixed sample box [-128, 128)^n for the membership check
  DyadicCube sample;
  sample.scale = 8;
  sample.lower_corner.assign(static_cast<std::size_t>(n), DyadicRational(-128));
  const TilingReport tiling = verify_top_tiling(grid, sample, a.points);

  ordered_json report;
  report["schema"] = kSchemaVersion;
  report["dimension"] = n;
  report["top_count"] = static_cast<std::int64_t>(tops_sig.size());
  report["bound"] = bound;
  const auto translate = is_translate_of_standard(grid);
  if (translate) {
    ordered_json shift = ordered_json::array();
    for (const auto& c : *translate) shift.push_back(c.to_string());
    report["translate_of_standard"] = std::move(shift);
  } else {
    report["translate_of_standard"] = nullptr;
  }
  ordered_json tops_json = ordered_json::array();
  for (const auto& [sig, top] : tops_sig) {
    ordered_json tj;
    tj["signature"] = signature_to_json(sig);
    ordered_json factors = ordered_json::array();
    for (const auto& f : top.factors) factors.push_back(factor_to_json(f));
    tj["factors"] = std::move(factors);
    tops_json.push_back(std::move(tj));
  }
  report["tops"] = std::move(tops_json);
  ordered_json tj;
  tj["points"] = tiling.total_points;
  tj["hits_per_top"] = tiling.hits_per_top;
  tj["violations"] = static_cast<std::int64_t>(tiling.violations.size());
  report["tiling"] = std::move(tj);

  const bool pass = !tops_sig.empty() &&
                    static_cast<std::int64_t>(tops_sig.size()) <= bound && tiling.ok();
  report["pass"] = pass;
  write_file(std::filesystem::path(a.out_dir) / "tops.json", dump_deterministic(report));
  std::cout << "tops: " << tops_sig.size() << " of at most " << bound << ", tiling "
            << (tiling.ok() ? "clean" : "violated") << "\n";
  if (!pass) std::cerr << "FAIL top tiling: violations in the sample box\n";
  return pass ? 0 : 1;
}

// --- basis ------------------------------------------------------------------

struct BasisArgs {
  std::string grid_path, measure_path, system_path, window, out_dir = ".";
  int kappa = 0;
  double tol = 1e-10;
};

int run_basis(const BasisArgs& a) {
  const GridSpec grid = parse_grid(read_file(a.grid_path));
  const Measure mu = parse_measure(read_file(a.measure_path));
  if (mu.dimension() != grid.dimension()) throw SchemaError("measure/grid dimension mismatch");
  const SystemChoice sc = resolve_system(a.kappa, a.system_path);
  const auto [m_min, m_max] = parse_window(a.window);

  ordered_json cubes_json = ordered_json::array();
  double max_ortho = 0, max_mom = 0;
  int total_delta = 0;
  std::string worst;
  // wavelet cubes live at scales m_min < m <= m_max (children at >= m_min)
  for (std::int64_t m = m_max; m > m_min; --m) {
    for (const auto& q : positive_mass_cubes_at(grid, mu, m)) {
      const AlpertBasis basis = build_alpert_basis(grid, q, mu, sc.sys);
      double ortho = 0;
      for (int i = 0; i < basis.dim(); ++i)
        for (int j = i; j < basis.dim(); ++j) {
          const double ip = inner_product(basis.functions[static_cast<std::size_t>(i)],
                                          basis.functions[static_cast<std::size_t>(j)], mu);
          ortho = std::max(ortho, std::abs(ip - (i == j ? 1.0 : 0.0)));
        }
      const double mom =
          check_moment_vanishing(basis, mu, sc.sys) / std::max(1.0, std::sqrt(mass(mu, q)));
      if (std::max(ortho, mom) > std::max(max_ortho, max_mom)) worst = q.to_string();
      max_ortho = std::max(max_ortho, ortho);
      max_mom = std::max(max_mom, mom);
      total_delta += basis.dim();

      ordered_json cj;
      cj["cube"] = cube_to_json(q);
      cj["dim"] = basis.dim();
      cj["orthonormality"] = ortho;
      cj["moment_vanishing"] = mom;
      ordered_json fns = ordered_json::array();
      for (const auto& h : basis.functions) fns.push_back(function_to_json(h)["pieces"]);
      cj["functions"] = std::move(fns);
      cubes_json.push_back(std::move(cj));
    }
  }

  ordered_json tops_json = ordered_json::array();
  int total_top = 0;
  for (const auto& [sig, top] : tops_with_signatures(grid)) {
    const int dim = e_span_dimension(top, mu, sc.sys);
    total_top += dim;
    tops_json.push_back(ordered_json{{"signature", signature_to_json(sig)}, {"dim", dim}});
  }

  ordered_json report;
  report["schema"] = kSchemaVersion;
  report["system"] = sc.desc;
  report["window"] = ordered_json{{"m_min", m_min}, {"m_max", m_max}};
  report["cubes"] = std::move(cubes_json);
  report["tops"] = std::move(tops_json);
  report["total_delta_dim"] = total_delta;
  report["total_top_dim"] = total_top;
  report["total_dim"] = total_delta + total_top;
  report["max_orthonormality"] = max_ortho;
  report["max_moment_vanishing"] = max_mom;
  report["tolerance"] = a.tol;
  const bool pass = max_ortho <= a.tol && max_mom <= a.tol;
  report["pass"] = pass;
  write_file(std::filesystem::path(a.out_dir) / "basis.json", dump_deterministic(report));
  std::cout << "basis: total dim " << total_delta + total_top << " (delta " << total_delta
            << " + tops " << total_top << "), residuals " << fmt17(max_ortho) << " / "
            << fmt17(max_mom) << "\n";
  if (!pass)
    std::cerr << "FAIL basis residual above " << fmt17(a.tol) << " at cube " << worst << "\n";
  return pass ? 0 : 1;
}

// --- expand -----------------------------------------------------------------

struct ExpandArgs {
  std::string grid_path, measure_path, function_path, system_path, window, out_dir = ".";
  int kappa = 0;
  double tol = 1e-8;
};

int run_expand(const ExpandArgs& a) {
  const GridSpec grid = parse_grid(read_file(a.grid_path));
  const Measure mu = parse_measure(read_file(a.measure_path));
  if (mu.dimension() != grid.dimension()) throw SchemaError("measure/grid dimension mismatch");
  const SystemChoice sc = resolve_system(a.kappa, a.system_path);
  const auto [m_min, m_max] = parse_window(a.window);
  const PiecewisePolyFn f =
      parse_function(read_file(a.function_path), sc.sys, grid.dimension());

  ExpandOptions opt;
  opt.m_min = m_min;
  opt.m_max = m_max;
  opt.threads = env_threads();
  const CoefficientTree tree = expand(f, grid, mu, sc.sys, opt);
  const double gap = parseval_gap(f, tree, mu);

  const std::string tree_text = dump_deterministic(tree_to_json(tree));
  write_file(std::filesystem::path(a.out_dir) / "tree.json", tree_text);

  // round trip: the emitted tree must reconstruct to the same function
  const CoefficientTree reloaded = parse_tree(tree_text, grid, sc.sys);
  const auto nodes = support_nodes(mu);
  const PiecewisePolyFn rec = reconstruct(tree, grid, mu, sc.sys);
  const PiecewisePolyFn rec2 = reconstruct(reloaded, grid, mu, sc.sys);
  const double round_trip = sup_diff_at_nodes(rec, rec2, nodes);
  const double sup_f = sup_at_nodes(f, nodes);
  const double recon = sup_diff_at_nodes(rec, f, nodes) / std::max(1.0, sup_f);

  // plot series: |coefficient| against the cube scale
  std::string csv = "scale,magnitude\n";
  std::size_t coeff_count = 0;
  for (const auto& cp : tree.cube_parts)
    for (const double c : cp.coeffs) {
      csv += std::to_string(cp.cube.scale) + "," + fmt17(std::abs(c)) + "\n";
      ++coeff_count;
    }
  write_file(std::filesystem::path(a.out_dir) / "coefficients.csv", csv);

  ordered_json report;
  report["schema"] = kSchemaVersion;
  report["system"] = sc.desc;
  report["window"] = ordered_json{{"m_min", m_min}, {"m_max", m_max}};
  report["threads"] = opt.threads;
  report["top_parts"] = static_cast<std::int64_t>(tree.top_parts.size());
  report["cube_parts"] = static_cast<std::int64_t>(tree.cube_parts.size());
  report["coefficients"] = static_cast<std::int64_t>(coeff_count);
  report["parseval_gap"] = gap;
  report["reconstruction_error"] = recon;
  report["round_trip_error"] = round_trip;
  report["tolerance"] = a.tol;

  std::string fail;
  if (gap > a.tol) fail = "parseval gap " + fmt17(gap);
  if (recon > a.tol) fail = "reconstruction error " + fmt17(recon);
  if (round_trip > 1e-12) fail = "round-trip error " + fmt17(round_trip);
  report["pass"] = fail.empty();
  write_file(std::filesystem::path(a.out_dir) / "expand.json", dump_deterministic(report));
  std::cout << "expand: " << tree.cube_parts.size() << " cubes, " << coeff_count
            << " coefficients, parseval gap " << fmt17(gap) << "\n";
  if (!fail.empty()) std::cerr << "FAIL expand: " << fail << " above tolerance\n";
  return fail.empty() ? 0 : 1;
}

// --- verify -----------------------------------------------------------------

struct VerifyArgs {
  std::string grid_path, measure_path, function_path, system_path, window, out_dir = ".";
  int kappa = 0;
  int probes = 5;
  double tol = 1e-10;
};

struct PropertyRow {
  std::string name;
  double residual = 0;
  double tolerance = 0;
  bool pass = true;
  std::string detail;
};

PropertyRow prop(std::string name, double tolerance) {
  PropertyRow r;
  r.name = std::move(name);
  r.tolerance = tolerance;
  return r;
}

int binom(int a, int b) {
  if (b < 0 || b > a) return 0;
  int r = 1;
  for (int i = 0; i < b; ++i) r = r * (a - i) / (i + 1);
  return r;
}

int run_verify(const VerifyArgs& a) {
  const GridSpec grid = parse_grid(read_file(a.grid_path));
  const Measure mu = parse_measure(read_file(a.measure_path));
  if (mu.dimension() != grid.dimension()) throw SchemaError("measure/grid dimension mismatch");
  const SystemChoice sc = resolve_system(a.kappa, a.system_path);
  const auto [m_min, m_max] = parse_window(a.window);
  const int n = grid.dimension();

  std::vector<PiecewisePolyFn> probes = make_probes(grid, mu, sc.sys, m_max, a.probes, 20240915u);
  if (!a.function_path.empty())
    probes.insert(probes.begin(),
                  parse_function(read_file(a.function_path), sc.sys, n));

  const auto nodes = support_nodes(mu);
  std::vector<PropertyRow> rows;
  auto add = [&rows](PropertyRow r) {
    r.pass = r.residual <= r.tolerance;
    rows.push_back(std::move(r));
  };

  // 1. tops count within [1, 2^n]
  const auto tops_sig = tops_with_signatures(grid);
  {
    PropertyRow r = prop("tops_bound", 0);
    const std::int64_t bound = std::int64_t{1} << n;
    const auto count = static_cast<std::int64_t>(tops_sig.size());
    r.residual = (count >= 1 && count <= bound) ? 0 : 1;
    r.detail = std::to_string(count) + " tops, bound " + std::to_string(bound);
    add(std::move(r));
  }

  // 2. sampled points land in exactly one top
  {
    DyadicCube sample;
    sample.scale = 8;
    sample.lower_corner.assign(static_cast<std::size_t>(n), DyadicRational(-128));
    const TilingReport tiling = verify_top_tiling(grid, sample, 10000);
    PropertyRow r = prop("top_tiling", 0);
    r.residual = static_cast<double>(tiling.violations.size());
    r.detail = std::to_string(tiling.total_points) + " points";
    add(std::move(r));
  }

  // cube sample for the measure / basis properties
  std::vector<DyadicCube> window_cubes;
  for (std::int64_t m = m_max; m > m_min; --m) {
    auto at = positive_mass_cubes_at(grid, mu, m);
    if (at.size() > 64) at.resize(64);
    window_cubes.insert(window_cubes.end(), at.begin(), at.end());
  }

  // 3. mass adds over children
  {
    PropertyRow r = prop("measure_additivity", 1e-12);
    for (const auto& q : window_cubes) {
      const double whole = mass(mu, q);
      if (whole <= 0) continue;
      double parts = 0;
      for (const auto& child : children(grid, q)) parts += mass(mu, child);
      const double rel = std::abs(whole - parts) / whole;
      if (rel > r.residual) {
        r.residual = rel;
        r.detail = q.to_string();
      }
    }
    add(std::move(r));
  }

  // 4. binomial covariance of moments under a center shift (monomials only)
  if (sc.sys.kind() == MomentSystem::Kind::Monomials) {
    PropertyRow r = prop("moment_translation", 1e-10);
    const int kappa = sc.sys.kappa();
    const auto index = multi_indices_below(n, kappa);
    for (std::size_t qi = 0; qi < window_cubes.size() && qi < 16; ++qi) {
      const DyadicCube& q = window_cubes[qi];
      const double s = q.side_length().to_double();
      const Point c = q.center();
      Point cp = c;
      for (int k = 0; k < n; ++k) cp[static_cast<std::size_t>(k)] += (k % 2 ? -0.21 : 0.37) * s;
      const auto mc = moments(mu, SuperCube::from_cube(q), kappa, c, s);
      const auto mcp = moments(mu, SuperCube::from_cube(q), kappa, cp, s);
      double norm = 1;
      for (const double v : mc.values) norm = std::max(norm, std::abs(v));
      for (std::size_t bi = 0; bi < index.size(); ++bi) {
        const MultiIndex& beta = index[bi];
        double predicted = 0;
        for (std::size_t gi = 0; gi < index.size(); ++gi) {
          const MultiIndex& gamma = index[gi];
          double coef = 1;
          bool ok = true;
          for (int k = 0; k < n && ok; ++k) {
            const int b = beta[static_cast<std::size_t>(k)], g = gamma[static_cast<std::size_t>(k)];
            if (g > b) { ok = false; break; }
            coef *= binom(b, g) *
                    std::pow((c[static_cast<std::size_t>(k)] - cp[static_cast<std::size_t>(k)]) / s,
                             b - g);
          }
          if (ok) predicted += coef * mc.values[gi];
        }
        const double rel = std::abs(predicted - mcp.values[bi]) / norm;
        if (rel > r.residual) {
          r.residual = rel;
          r.detail = q.to_string();
        }
      }
    }
    add(std::move(r));
  } else {
    PropertyRow r = prop("moment_translation", 0);
    r.detail = "monomial systems only, skipped";
    rows.push_back(std::move(r));
  }

  // 5./6. basis orthonormality and vanishing moments over the window
  {
    PropertyRow ro = prop("orthonormality", a.tol);
    PropertyRow rm = prop("moment_vanishing", a.tol);
    for (const auto& q : window_cubes) {
      const AlpertBasis basis = build_alpert_basis(grid, q, mu, sc.sys);
      for (int i = 0; i < basis.dim(); ++i)
        for (int j = i; j < basis.dim(); ++j) {
          const double ip = inner_product(basis.functions[static_cast<std::size_t>(i)],
                                          basis.functions[static_cast<std::size_t>(j)], mu);
          const double res = std::abs(ip - (i == j ? 1.0 : 0.0));
          if (res > ro.residual) {
            ro.residual = res;
            ro.detail = q.to_string();
          }
        }
      const double mom =
          check_moment_vanishing(basis, mu, sc.sys) / std::max(1.0, std::sqrt(mass(mu, q)));
      if (mom > rm.residual) {
        rm.residual = mom;
        rm.detail = q.to_string();
      }
    }
    add(std::move(ro));
    add(std::move(rm));
  }

  // 7. telescoping against the E-difference, finest-to-coarsest chains
  {
    PropertyRow r = prop("telescoping", a.tol);
    double probe_sup = 1;
    for (const auto& p : probes) probe_sup = std::max(probe_sup, sup_at_nodes(p, nodes));
    auto fine = positive_mass_cubes_at(grid, mu, m_min + 1);
    if (fine.size() > 4) fine.resize(4);
    for (const auto& q : fine) {
      DyadicCube p = q;
      while (p.scale < m_max) p = parent(grid, p);
      const double res = check_telescoping(grid, mu, sc.sys, p, q, probes) / probe_sup;
      if (res > r.residual) {
        r.residual = res;
        r.detail = q.to_string();
      }
    }
    add(std::move(r));
  }

  // 8. expansion identities per probe
  {
    PropertyRow rp = prop("parseval", a.tol);
    PropertyRow rr = prop("reconstruction", a.tol);
    PropertyRow rt = prop("round_trip", 1e-12);
    ExpandOptions opt;
    opt.m_min = m_min;
    opt.m_max = m_max;
    opt.threads = env_threads();
    for (std::size_t pi = 0; pi < probes.size(); ++pi) {
      const auto& f = probes[pi];
      const CoefficientTree tree = expand(f, grid, mu, sc.sys, opt);
      const double gap = parseval_gap(f, tree, mu);
      if (gap > rp.residual) {
        rp.residual = gap;
        rp.detail = "probe " + std::to_string(pi);
      }
      const PiecewisePolyFn rec = reconstruct(tree, grid, mu, sc.sys);
      const double recon =
          sup_diff_at_nodes(rec, f, nodes) / std::max(1.0, sup_at_nodes(f, nodes));
      if (recon > rr.residual) {
        rr.residual = recon;
        rr.detail = "probe " + std::to_string(pi);
      }
      const CoefficientTree reloaded =
          parse_tree(dump_deterministic(tree_to_json(tree)), grid, sc.sys);
      const double rtv =
          sup_diff_at_nodes(rec, reconstruct(reloaded, grid, mu, sc.sys), nodes);
      if (rtv > rt.residual) {
        rt.residual = rtv;
        rt.detail = "probe " + std::to_string(pi);
      }
    }
    add(std::move(rp));
    add(std::move(rr));
    add(std::move(rt));
  }

  // 9. Cauchy-Schwarz leg: mean |f| never beats the L2 mean
  {
    PropertyRow r = prop("e_bound_r2", 1e-12);
    for (const auto& q : window_cubes)
      for (const auto& f : probes) {
        try {
          const EBoundReport rep = e_bound_report(f, q, mu, sc.sys);
          const double res = std::max(0.0, rep.r2 - 1.0);
          if (res > r.residual) {
            r.residual = res;
            r.detail = q.to_string();
          }
        } catch (const std::domain_error&) {
          // zero mass or probe vanishes there; nothing to measure
        }
      }
    add(std::move(r));
  }

  // 10. atomic dimension count: expansion dimensions add up to #atoms
  if (mu.kind() == Measure::Kind::Atomic) {
    PropertyRow r = prop("dimension_count", 0);
    int total = 0;
    for (const auto& [sig, top] : tops_sig) total += e_span_dimension(top, mu, sc.sys);
    for (const auto& q : window_cubes) total += build_alpert_basis(grid, q, mu, sc.sys).dim();
    const int k = static_cast<int>(mu.atoms().size());
    r.residual = std::abs(total - k);
    r.detail = std::to_string(total) + " vs " + std::to_string(k) + " atoms";
    add(std::move(r));
  } else {
    PropertyRow r = prop("dimension_count", 0);
    r.detail = "atomic measures only, skipped";
    rows.push_back(std::move(r));
  }

  // 11. E-normalizers fall monotonically along towers
  const ReverseDoublingReport rd = reverse_doubling_report(mu, grid, m_min, m_max);
  {
    PropertyRow r = prop("reverse_doubling_monotone", 0);
    r.residual = rd.normalizers_nonincreasing ? 0 : 1;
    r.detail = std::to_string(rd.base_points.size()) + " towers";
    add(std::move(r));
  }

  // doubling ratio plot series along the same towers
  std::string csv = "base_index,scale,ratio\n";
  for (std::size_t bi = 0; bi < rd.base_points.size(); ++bi)
    for (std::int64_t m = m_min; m <= m_max; ++m) {
      const auto ratio = doubling_ratio(mu, cube_at(grid, rd.base_points[bi], m));
      if (ratio)
        csv += std::to_string(bi) + "," + std::to_string(m) + "," + fmt17(*ratio) + "\n";
    }
  write_file(std::filesystem::path(a.out_dir) / "doubling.csv", csv);

  bool all_pass = true;
  ordered_json props = ordered_json::array();
  for (const auto& r : rows) {
    all_pass = all_pass && r.pass;
    props.push_back(ordered_json{{"name", r.name},
                                 {"residual", r.residual},
                                 {"tolerance", r.tolerance},
                                 {"pass", r.pass},
                                 {"detail", r.detail}});
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  residual " << fmt17(r.residual)
              << (r.detail.empty() ? "" : "  (" + r.detail + ")") << "\n";
    if (!r.pass)
      std::cerr << "FAIL " << r.name << ": residual " << fmt17(r.residual) << " above "
                << fmt17(r.tolerance) << " at " << r.detail << "\n";
  }

  ordered_json report;
  report["schema"] = kSchemaVersion;
  report["system"] = sc.desc;
  report["window"] = ordered_json{{"m_min", m_min}, {"m_max", m_max}};
  report["probes"] = static_cast<std::int64_t>(probes.size());
  report["properties"] = std::move(props);
  report["all_pass"] = all_pass;
  write_file(std::filesystem::path(a.out_dir) / "verify.json", dump_deterministic(report));
  return all_pass ? 0 : 1;
}

// --- bilinear ----------------------------------------------------------------

struct BilinearArgs {
  std::string grid_path, sigma_path, omega_path, f_path, g_path, kernel_path;
  std::string system_path, window, out_dir = ".";
  int kappa = 0;
  double tol = 1e-8;
};

int run_bilinear(const BilinearArgs& a) {
  const GridSpec grid = parse_grid(read_file(a.grid_path));
  const Measure sigma = parse_measure(read_file(a.sigma_path));
  const Measure omega = parse_measure(read_file(a.omega_path));
  if (sigma.dimension() != grid.dimension() || omega.dimension() != grid.dimension())
    throw SchemaError("measure/grid dimension mismatch");
  const SystemChoice sc = resolve_system(a.kappa, a.system_path);
  const auto [m_min, N] = parse_window(a.window);
  const KernelSpec kernel = resolve_kernel(a.kernel_path);
  const PiecewisePolyFn f = parse_function(read_file(a.f_path), sc.sys, grid.dimension());
  const PiecewisePolyFn g = parse_function(read_file(a.g_path), sc.sys, grid.dimension());

  const TruncationWindow window{N, m_min};
  const double direct = form_direct(f, g, sigma, omega, kernel);
  const FourTermResult four = form_four_term(grid, sc.sys, f, g, sigma, omega, kernel, window);
  const TopsFormResult topsf = form_tops(grid, sc.sys, f, g, sigma, omega, kernel, window);

  const double denom =
      std::max({std::abs(direct), std::abs(four.total), std::abs(topsf.total), 1e-12});
  const double err_four = std::abs(direct - four.total) / denom;
  const double err_tops = std::abs(direct - topsf.total) / denom;
  const int bound = 1 << grid.dimension();

  ordered_json report;
  report["schema"] = kSchemaVersion;
  report["system"] = sc.desc;
  report["kernel"] = kernel_desc(kernel);
  report["window"] = ordered_json{{"m_min", m_min}, {"N", N}};
  report["direct"] = direct;
  report["four_term"] = ordered_json{{"dd", four.dd}, {"ee", four.ee},  {"de", four.de},
                                     {"ed", four.ed}, {"total", four.total}};
  report["tops_form"] = ordered_json{{"dd", topsf.dd},   {"td", topsf.td},
                                     {"dt", topsf.dt},   {"tt", topsf.tt},
                                     {"total", topsf.total},
                                     {"e_summands_f", topsf.e_summands_f},
                                     {"e_summands_g", topsf.e_summands_g}};
  report["four_term_error"] = err_four;
  report["tops_form_error"] = err_tops;
  report["tolerance"] = a.tol;

  std::string fail;
  if (err_four > a.tol) fail = "four-term split off by " + fmt17(err_four);
  if (err_tops > a.tol) fail = "tops form off by " + fmt17(err_tops);
  if (topsf.e_summands_f > bound || topsf.e_summands_g > bound)
    fail = "tops E-layer exceeds the 2^n bound";
  report["pass"] = fail.empty();
  write_file(std::filesystem::path(a.out_dir) / "bilinear.json", dump_deterministic(report));
  std::cout << "bilinear: direct " << fmt17(direct) << ", four-term " << fmt17(four.total)
            << ", tops " << fmt17(topsf.total) << "\n";
  if (!fail.empty()) std::cerr << "FAIL bilinear: " << fail << "\n";
  return fail.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyadic grids, weighted wavelet expansions, and bilinear form splits"};
  app.require_subcommand(1);

  TopsArgs tops_args;
  auto* tops_cmd = app.add_subcommand("tops", "list the grid's tops and check the tiling");
  tops_cmd->add_option("--grid", tops_args.grid_path, "grid JSON")->required();
  tops_cmd->add_option("--points", tops_args.points, "tiling sample size")
      ->check(CLI::PositiveNumber);
  tops_cmd->add_option("--out", tops_args.out_dir, "output directory");

  BasisArgs basis_args;
  auto* basis_cmd = app.add_subcommand("basis", "build wavelet bases over a scale window");
  basis_cmd->add_option("--grid", basis_args.grid_path, "grid JSON")->required();
  basis_cmd->add_option("--measure", basis_args.measure_path, "measure JSON")->required();
  basis_cmd->add_option("--kappa", basis_args.kappa, "monomial degree bound");
  basis_cmd->add_option("--system", basis_args.system_path, "custom system JSON");
  basis_cmd->add_option("--window", basis_args.window, "scale window mmin:mmax")->required();
  basis_cmd->add_option("--tol", basis_args.tol, "residual tolerance")->check(CLI::PositiveNumber);
  basis_cmd->add_option("--out", basis_args.out_dir, "output directory");

  ExpandArgs expand_args;
  auto* expand_cmd = app.add_subcommand("expand", "expand a function into the wavelet tree");
  expand_cmd->add_option("--grid", expand_args.grid_path, "grid JSON")->required();
  expand_cmd->add_option("--measure", expand_args.measure_path, "measure JSON")->required();
  expand_cmd->add_option("--function", expand_args.function_path, "function JSON")->required();
  expand_cmd->add_option("--kappa", expand_args.kappa, "monomial degree bound");
  expand_cmd->add_option("--system", expand_args.system_path, "custom system JSON");
  expand_cmd->add_option("--window", expand_args.window, "scale window mmin:mmax")->required();
  expand_cmd->add_option("--tol", expand_args.tol, "parseval/reconstruction tolerance")
      ->check(CLI::PositiveNumber);
  expand_cmd->add_option("--out", expand_args.out_dir, "output directory");

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand("verify", "run the invariant suite");
  verify_cmd->add_option("--grid", verify_args.grid_path, "grid JSON")->required();
  verify_cmd->add_option("--measure", verify_args.measure_path, "measure JSON")->required();
  verify_cmd->add_option("--function", verify_args.function_path, "extra probe function JSON");
  verify_cmd->add_option("--kappa", verify_args.kappa, "monomial degree bound");
  verify_cmd->add_option("--system", verify_args.system_path, "custom system JSON");
  verify_cmd->add_option("--window", verify_args.window, "scale window mmin:mmax")->required();
  verify_cmd->add_option("--probes", verify_args.probes, "number of random probes")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--tol", verify_args.tol, "residual tolerance")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--out", verify_args.out_dir, "output directory");

  BilinearArgs bi_args;
  auto* bi_cmd = app.add_subcommand("bilinear", "split a two-weight bilinear form");
  bi_cmd->add_option("--grid", bi_args.grid_path, "grid JSON")->required();
  bi_cmd->add_option("--measure", bi_args.sigma_path, "sigma measure JSON")->required();
  bi_cmd->add_option("--measure2", bi_args.omega_path, "omega measure JSON")->required();
  bi_cmd->add_option("--function", bi_args.f_path, "f JSON")->required();
  bi_cmd->add_option("--function2", bi_args.g_path, "g JSON")->required();
  bi_cmd->add_option("--kernel", bi_args.kernel_path, "kernel JSON")->required();
  bi_cmd->add_option("--kappa", bi_args.kappa, "monomial degree bound");
  bi_cmd->add_option("--system", bi_args.system_path, "custom system JSON");
  bi_cmd->add_option("--window", bi_args.window, "truncation window mmin:N")->required();
  bi_cmd->add_option("--tol", bi_args.tol, "agreement tolerance")->check(CLI::PositiveNumber);
  bi_cmd->add_option("--out", bi_args.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is a config error
  }

  try {
    std::filesystem::path out = ".";
    if (tops_cmd->parsed()) out = tops_args.out_dir;
    if (basis_cmd->parsed()) out = basis_args.out_dir;
    if (expand_cmd->parsed()) out = expand_args.out_dir;
    if (verify_cmd->parsed()) out = verify_args.out_dir;
    if (bi_cmd->parsed()) out = bi_args.out_dir;
    std::filesystem::create_directories(out);

    if (tops_cmd->parsed()) return run_tops(tops_args);
    if (basis_cmd->parsed()) return run_basis(basis_args);
    if (expand_cmd->parsed()) return run_expand(expand_args);
    if (verify_cmd->parsed()) return run_verify(verify_args);
    if (bi_cmd->parsed()) return run_bilinear(bi_args);
  } catch (const SchemaError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const WindowError& e) {
    std::cerr << "window: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
