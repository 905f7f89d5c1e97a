#include "dyadic/json_io.hpp"

#include <cinttypes>
#include <cstdio>

namespace dyadic {

namespace {

void dump_value(const ordered_json& v, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
  switch (v.type()) {
    case ordered_json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        out += ordered_json(it.key()).dump();
        out += ": ";
        dump_value(it.value(), out, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case ordered_json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        dump_value(item, out, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case ordered_json::value_t::number_float: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
      out += buf;
      return;
    }
    default:
      out += v.dump();  // ints, bools, strings, null
      return;
  }
}

const ordered_json& require(const ordered_json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'");
  return *it;
}

void check_version(const ordered_json& j) {
  if (!require(j, "schema").is_number_integer() || j["schema"].get<int>() != kSchemaVersion)
    throw SchemaError("unsupported schema version");
}

ordered_json parse_text(const std::string& text) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
}

DyadicRational rational_from_json(const ordered_json& j) {
  if (j.is_number_integer()) return DyadicRational(j.get<long long>());
  if (!j.is_string()) throw SchemaError("expected a dyadic rational string");
  try {
    return DyadicRational::parse(j.get<std::string>());
  } catch (const std::exception& e) {
    throw SchemaError(e.what());
  }
}

std::vector<std::uint8_t> bits_from_json(const ordered_json& j, const char* what) {
  if (!j.is_array()) throw SchemaError(std::string(what) + " must be an array of bits");
  std::vector<std::uint8_t> bits;
  for (const auto& b : j) {
    if (!b.is_number_integer() || (b.get<int>() != 0 && b.get<int>() != 1))
      throw SchemaError(std::string(what) + " entries must be 0 or 1");
    bits.push_back(static_cast<std::uint8_t>(b.get<int>()));
  }
  return bits;
}

std::vector<PolyPiece> pieces_from_json(const ordered_json& arr) {
  if (!arr.is_array()) throw SchemaError("pieces must be an array");
  std::vector<PolyPiece> pieces;
  for (const auto& pj : arr) {
    PolyPiece piece;
    piece.cell = cube_from_json(require(pj, "cell"));
    const auto& cj = require(pj, "coeffs");
    if (!cj.is_array()) throw SchemaError("coeffs must be an array");
    for (const auto& c : cj) {
      if (!c.is_number()) throw SchemaError("coeffs entries must be numbers");
      piece.coeffs.push_back(c.get<double>());
    }
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

ordered_json pieces_to_json(const std::vector<PolyPiece>& pieces) {
  ordered_json arr = ordered_json::array();
  for (const auto& piece : pieces) {
    ordered_json pj;
    pj["cell"] = cube_to_json(piece.cell);
    pj["coeffs"] = piece.coeffs;
    arr.push_back(std::move(pj));
  }
  return arr;
}

}  // namespace

std::string dump_deterministic(const ordered_json& j) {
  std::string out;
  dump_value(j, out, 0);
  out += "\n";
  return out;
}

// --- cubes ---------------------------------------------------------------------

ordered_json cube_to_json(const DyadicCube& q) {
  ordered_json j;
  j["scale"] = q.scale;
  ordered_json corner = ordered_json::array();
  for (const auto& c : q.lower_corner) corner.push_back(c.to_string());
  j["corner"] = std::move(corner);
  return j;
}

DyadicCube cube_from_json(const ordered_json& j) {
  if (!j.is_object()) throw SchemaError("cube must be an object");
  DyadicCube q;
  if (!require(j, "scale").is_number_integer()) throw SchemaError("cube scale must be an integer");
  q.scale = j["scale"].get<std::int64_t>();
  const auto& corner = require(j, "corner");
  if (!corner.is_array() || corner.empty()) throw SchemaError("cube corner must be a nonempty array");
  for (const auto& c : corner) q.lower_corner.push_back(rational_from_json(c));
  return q;
}

// --- grid ----------------------------------------------------------------------

ordered_json grid_to_json(const GridSpec& grid) {
  ordered_json j;
  j["schema"] = kSchemaVersion;
  j["dimension"] = grid.dimension();
  ordered_json axes = ordered_json::array();
  for (const auto& axis : grid.axes) {
    ordered_json aj;
    aj["offset"] = axis.base_offset.to_string();
    aj["prefix"] = axis.prefix_bits;
    if (axis.tail.kind == BitTail::Kind::AllZero)
      aj["tail"] = "zero";
    else if (axis.tail.kind == BitTail::Kind::AllOne)
      aj["tail"] = "one";
    else
      aj["tail"] = ordered_json{{"periodic", axis.tail.pattern}};
    axes.push_back(std::move(aj));
  }
  j["axes"] = std::move(axes);
  return j;
}

GridSpec parse_grid(const std::string& text) {
  const ordered_json j = parse_text(text);
  check_version(j);
  if (!require(j, "dimension").is_number_integer())
    throw SchemaError("dimension must be an integer");
  const int n = j["dimension"].get<int>();
  const auto& axes_json = require(j, "axes");
  if (!axes_json.is_array() || static_cast<int>(axes_json.size()) != n)
    throw SchemaError("axes must be an array of length 'dimension'");

  std::vector<GridAxis> axes;
  for (const auto& aj : axes_json) {
    const DyadicRational offset = rational_from_json(require(aj, "offset"));
    std::vector<std::uint8_t> prefix;
    if (aj.contains("prefix")) prefix = bits_from_json(aj["prefix"], "prefix");
    BitTail tail = BitTail::zero();
    const auto& tj = require(aj, "tail");
    if (tj.is_string()) {
      const std::string s = tj.get<std::string>();
      if (s == "zero")
        tail = BitTail::zero();
      else if (s == "one")
        tail = BitTail::one();
      else
        throw SchemaError("tail must be \"zero\", \"one\", or {\"periodic\": [...]}");
    } else if (tj.is_object() && tj.contains("periodic")) {
      tail = BitTail::periodic(bits_from_json(tj["periodic"], "periodic"));
    } else {
      throw SchemaError("tail must be \"zero\", \"one\", or {\"periodic\": [...]}");
    }
    try {
      axes.emplace_back(offset, std::move(prefix), std::move(tail));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
  }
  try {
    return GridSpec(std::move(axes));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
}

// --- measure ---------------------------------------------------------------------

ordered_json measure_to_json(const Measure& mu) {
  ordered_json j;
  j["schema"] = kSchemaVersion;
  j["type"] = mu.kind() == Measure::Kind::Atomic ? "atoms" : "cells";
  j["support_box"] = cube_to_json(mu.support_box());
  ordered_json items = ordered_json::array();
  if (mu.kind() == Measure::Kind::Atomic) {
    for (const auto& atom : mu.atoms()) {
      ordered_json ij;
      ordered_json point = ordered_json::array();
      for (const auto& c : atom.point) point.push_back(c.to_string());
      ij["point"] = std::move(point);
      ij["mass"] = atom.mass;
      items.push_back(std::move(ij));
    }
  } else {
    for (const auto& cell : mu.cells()) {
      ordered_json ij;
      ij["cell"] = cube_to_json(cell.cube);
      ij["density"] = cell.density;
      items.push_back(std::move(ij));
    }
  }
  j["items"] = std::move(items);
  return j;
}

Measure parse_measure(const std::string& text) {
  const ordered_json j = parse_text(text);
  check_version(j);
  const std::string type = require(j, "type").is_string() ? j["type"].get<std::string>() : "";
  const DyadicCube support = cube_from_json(require(j, "support_box"));
  const auto& items = require(j, "items");
  if (!items.is_array()) throw SchemaError("items must be an array");

  try {
    if (type == "atoms") {
      std::vector<Atom> atoms;
      for (const auto& ij : items) {
        Atom atom;
        const auto& pj = require(ij, "point");
        if (!pj.is_array()) throw SchemaError("atom point must be an array");
        for (const auto& c : pj) atom.point.push_back(rational_from_json(c));
        if (!require(ij, "mass").is_number()) throw SchemaError("atom mass must be a number");
        atom.mass = ij["mass"].get<double>();
        atoms.push_back(std::move(atom));
      }
      return Measure::atomic(std::move(atoms), support);
    }
    if (type == "cells") {
      std::vector<Cell> cells;
      for (const auto& ij : items) {
        Cell cell;
        cell.cube = cube_from_json(require(ij, "cell"));
        if (!require(ij, "density").is_number()) throw SchemaError("cell density must be a number");
        cell.density = ij["density"].get<double>();
        cells.push_back(std::move(cell));
      }
      return Measure::cell_density(std::move(cells), support);
    }
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  throw SchemaError("type must be \"atoms\" or \"cells\"");
}

// --- functions --------------------------------------------------------------------

ordered_json function_to_json(const PiecewisePolyFn& f) {
  ordered_json j;
  j["schema"] = kSchemaVersion;
  j["pieces"] = pieces_to_json(f.pieces());
  return j;
}

PiecewisePolyFn parse_function(const std::string& text, const MomentSystem& sys, int space_dim) {
  const ordered_json j = parse_text(text);
  check_version(j);
  auto pieces = pieces_from_json(require(j, "pieces"));
  if (pieces.empty()) return {};
  try {
    return PiecewisePolyFn(sys, space_dim, std::move(pieces));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
}

// --- kernels ---------------------------------------------------------------------

KernelSpec parse_kernel(const std::string& text) {
  const ordered_json j = parse_text(text);
  check_version(j);
  const std::string kind = require(j, "kind").is_string() ? j["kind"].get<std::string>() : "";
  if (kind == "hilbert") return KernelSpec::hilbert();
  if (kind == "riesz") {
    if (!require(j, "component").is_number_integer())
      throw SchemaError("riesz kernel needs an integer component");
    try {
      return KernelSpec::riesz(j["component"].get<int>());
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
  }
  if (kind == "custom") {
    if (!require(j, "id").is_string()) throw SchemaError("custom kernel needs a string id");
    KernelSpec k;
    k.kind = KernelSpec::Kind::Custom;
    k.id = j["id"].get<std::string>();
    return k;  // caller resolves the callback by id
  }
  throw SchemaError("kind must be \"hilbert\", \"riesz\", or \"custom\"");
}

// --- coefficient trees --------------------------------------------------------------

namespace {

std::string sign_to_string(TopSignature::AxisSign s) {
  switch (s) {
    case TopSignature::AxisSign::MinusInf: return "-inf";
    case TopSignature::AxisSign::PlusInf: return "+inf";
    case TopSignature::AxisSign::Both: return "both";
  }
  return "both";
}

TopSignature::AxisSign sign_from_string(const std::string& s) {
  if (s == "-inf") return TopSignature::AxisSign::MinusInf;
  if (s == "+inf") return TopSignature::AxisSign::PlusInf;
  if (s == "both") return TopSignature::AxisSign::Both;
  throw SchemaError("top signature entries must be \"-inf\", \"+inf\", or \"both\"");
}

}  // namespace

ordered_json tree_to_json(const CoefficientTree& tree) {
  ordered_json j;
  j["schema"] = kSchemaVersion;
  j["window"] = ordered_json{{"m_min", tree.m_min}, {"m_max", tree.m_max}};
  ordered_json tops = ordered_json::array();
  for (const auto& tp : tree.top_parts) {
    ordered_json tj;
    ordered_json sig = ordered_json::array();
    for (auto s : tp.signature.entries) sig.push_back(sign_to_string(s));
    tj["signature"] = std::move(sig);
    tj["pieces"] = pieces_to_json(tp.fn.pieces());
    tops.push_back(std::move(tj));
  }
  j["tops"] = std::move(tops);
  ordered_json cubes = ordered_json::array();
  for (const auto& cp : tree.cube_parts) {
    ordered_json cj;
    cj["cube"] = cube_to_json(cp.cube);
    cj["coeffs"] = cp.coeffs;
    cubes.push_back(std::move(cj));
  }
  j["cubes"] = std::move(cubes);
  return j;
}

CoefficientTree parse_tree(const std::string& text, const GridSpec& grid,
                           const MomentSystem& sys) {
  const ordered_json j = parse_text(text);
  check_version(j);
  CoefficientTree tree;
  const auto& wj = require(j, "window");
  if (!require(wj, "m_min").is_number_integer() || !require(wj, "m_max").is_number_integer())
    throw SchemaError("window bounds must be integers");
  tree.m_min = wj["m_min"].get<std::int64_t>();
  tree.m_max = wj["m_max"].get<std::int64_t>();

  const auto all_tops = tops_with_signatures(grid);
  const auto& tops_json = require(j, "tops");
  if (!tops_json.is_array()) throw SchemaError("tops must be an array");
  for (const auto& tj : tops_json) {
    TopSignature sig;
    const auto& sj = require(tj, "signature");
    if (!sj.is_array() || static_cast<int>(sj.size()) != grid.dimension())
      throw SchemaError("top signature length must match the dimension");
    for (const auto& s : sj) {
      if (!s.is_string()) throw SchemaError("top signature entries must be strings");
      sig.entries.push_back(sign_from_string(s.get<std::string>()));
    }
    const SuperCube* top = nullptr;
    for (const auto& [known_sig, sc] : all_tops)
      if (known_sig.entries == sig.entries) top = &sc;
    if (!top) throw SchemaError("top signature does not match the grid: " + sig.to_string());

    auto pieces = pieces_from_json(require(tj, "pieces"));
    PiecewisePolyFn fn;
    if (!pieces.empty()) {
      try {
        fn = PiecewisePolyFn(sys, grid.dimension(), std::move(pieces));
      } catch (const std::invalid_argument& e) {
        throw SchemaError(e.what());
      }
    }
    tree.top_parts.push_back({std::move(sig), *top, std::move(fn)});
  }

  const auto& cubes_json = require(j, "cubes");
  if (!cubes_json.is_array()) throw SchemaError("cubes must be an array");
  for (const auto& cj : cubes_json) {
    CoefficientTree::CubePart cp;
    cp.cube = cube_from_json(require(cj, "cube"));
    const auto& coeffs = require(cj, "coeffs");
    if (!coeffs.is_array()) throw SchemaError("coeffs must be an array");
    for (const auto& c : coeffs) {
      if (!c.is_number()) throw SchemaError("coeffs entries must be numbers");
      cp.coeffs.push_back(c.get<double>());
    }
    tree.cube_parts.push_back(std::move(cp));
  }
  return tree;
}

}  // namespace dyadic
