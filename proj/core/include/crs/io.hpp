#pragma once

// File formats: fractional-matching instances (JSON), doubly stochastic
// matrices (CSV) and allocation instances (JSON). Parse errors are InputError
// with the source name and a JSON pointer or line/column position.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "crs/allocation.hpp"
#include "crs/graph.hpp"

namespace crs {

std::uint64_t fnv1a64(std::string_view bytes);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

/// {"bipartite": bool, "vertices": N | {"left": [...], "right": [...]},
///  "edges": [{"u": int, "v": int, "x": float}, ...]}.
/// With "bipartite": true and a plain vertex count the sides come from a
/// 2-colouring.
FractionalMatching parse_instance(const nlohmann::json& doc, const std::string& source = "instance");
FractionalMatching read_instance(std::istream& in, const std::string& source = "instance");
FractionalMatching load_instance(const std::filesystem::path& path);

nlohmann::json instance_to_json(const FractionalMatching& fm);

/// Hash of the canonical JSON form, so formatting and key order do not matter.
std::string instance_hash(const FractionalMatching& fm);

/// n rows of n comma-separated floats; blank lines are ignored.
DoublyStochasticMatrix read_matrix_csv(std::istream& in, const std::string& source = "matrix");
DoublyStochasticMatrix load_matrix_csv(const std::filesystem::path& path);

/// {"m": int, "n": int, "items": [names],
///  "valuations": [{"s": int, "t": int, "clauses": [{item: weight}]}]}.
/// Cells without an entry have the zero valuation.
AllocationInstance parse_allocation(const nlohmann::json& doc, const std::string& source = "allocation");
AllocationInstance load_allocation(const std::filesystem::path& path);

nlohmann::json allocation_to_json(const AllocationInstance& inst);
std::string allocation_hash(const AllocationInstance& inst);

/// Reads a whole JSON file; syntax errors carry line and column.
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace crs
