#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dyadic/bilinear.hpp"

namespace dyadic {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Malformed or mis-versioned input documents.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& msg) : std::runtime_error("schema: " + msg) {}
};

// Deterministic serialization: insertion-ordered keys, doubles at 17
// significant digits, 2-space indent. Identical values give identical bytes.
std::string dump_deterministic(const ordered_json& j);

// --- document parsers (throw SchemaError) ------------------------------------

GridSpec parse_grid(const std::string& text);
Measure parse_measure(const std::string& text);
PiecewisePolyFn parse_function(const std::string& text, const MomentSystem& sys, int space_dim);
// Custom kernels come back with only their id; the caller resolves callbacks.
KernelSpec parse_kernel(const std::string& text);
CoefficientTree parse_tree(const std::string& text, const GridSpec& grid,
                           const MomentSystem& sys);

// --- emitters ------------------------------------------------------------------

ordered_json cube_to_json(const DyadicCube& q);
DyadicCube cube_from_json(const ordered_json& j);

ordered_json grid_to_json(const GridSpec& grid);
ordered_json measure_to_json(const Measure& mu);
ordered_json function_to_json(const PiecewisePolyFn& f);
ordered_json tree_to_json(const CoefficientTree& tree);

}  // namespace dyadic
