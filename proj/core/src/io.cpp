#include "crs/io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "crs/error.hpp"

namespace crs {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& source, const std::string& pointer, const std::string& what) {
  throw InputError(source + ": " + (pointer.empty() ? "/" : pointer) + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& source, const std::string& at) {
  if (!obj.is_object()) fail(source, at, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(source, at, std::string("missing field \"") + key + "\"");
  return *it;
}

std::uint64_t as_index(const json& v, const std::string& source, const std::string& at) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    fail(source, at, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double as_number(const json& v, const std::string& source, const std::string& at) {
  if (!v.is_number()) fail(source, at, "expected a number");
  return v.get<double>();
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  return in;
}

json parse_json(std::istream& in, const std::string& source) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(source + ": " + e.what());
  }
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, value >>= 4) out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
  return out;
}

json load_json(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_json(in, path.string());
}

FractionalMatching parse_instance(const json& doc, const std::string& source) {
  if (!doc.is_object()) fail(source, "", "expected an object");
  bool bipartite = false;
  if (doc.contains("bipartite")) {
    if (!doc["bipartite"].is_boolean()) fail(source, "/bipartite", "expected a boolean");
    bipartite = doc["bipartite"].get<bool>();
  }

  const json& vertices = field(doc, "vertices", source, "");
  std::size_t n = 0;
  std::optional<std::vector<Side>> sides;
  if (vertices.is_object()) {
    std::vector<std::pair<std::uint64_t, Side>> listed;
    for (const auto& [key, side] : {std::pair{"left", Side::left}, std::pair{"right", Side::right}}) {
      const std::string at = std::string("/vertices/") + key;
      const json& list = field(vertices, key, source, "/vertices");
      if (!list.is_array()) fail(source, at, "expected an array of vertex ids");
      for (std::size_t i = 0; i < list.size(); ++i) {
        listed.emplace_back(as_index(list[i], source, at + "/" + std::to_string(i)), side);
      }
    }
    n = listed.size();
    sides.emplace(n, Side::left);
    std::vector<std::uint8_t> seen(n, 0);
    for (const auto& [id, side] : listed) {
      if (id >= n) fail(source, "/vertices", "vertex id " + std::to_string(id) + " is not in [0, " + std::to_string(n) + ")");
      if (seen[id]++) fail(source, "/vertices", "vertex " + std::to_string(id) + " is listed twice");
      (*sides)[id] = side;
    }
  } else {
    n = as_index(vertices, source, "/vertices");
  }

  const json& list = field(doc, "edges", source, "");
  if (!list.is_array()) fail(source, "/edges", "expected an array");
  std::vector<Edge> edges;
  std::vector<double> x;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string at = "/edges/" + std::to_string(i);
    const auto u = as_index(field(list[i], "u", source, at), source, at + "/u");
    const auto v = as_index(field(list[i], "v", source, at), source, at + "/v");
    const double w = as_number(field(list[i], "x", source, at), source, at + "/x");
    if (u >= n || v >= n) fail(source, at, "endpoint outside [0, " + std::to_string(n) + ")");
    edges.push_back({static_cast<VertexId>(u), static_cast<VertexId>(v)});
    x.push_back(w);
  }

  try {
    if (bipartite && !sides) {
      sides = two_coloring(Graph(n, edges));
      if (!sides) fail(source, "/edges", "graph is marked bipartite but has an odd cycle");
    }
    return FractionalMatching(Graph(n, std::move(edges), std::move(sides)), std::move(x));
  } catch (const InputError& e) {
    const std::string what = e.what();
    if (what.rfind(source + ": ", 0) == 0) throw;
    fail(source, "/edges", what);
  }
}

FractionalMatching read_instance(std::istream& in, const std::string& source) {
  return parse_instance(parse_json(in, source), source);
}

FractionalMatching load_instance(const std::filesystem::path& path) {
  auto in = open(path);
  return read_instance(in, path.string());
}

json instance_to_json(const FractionalMatching& fm) {
  const Graph& g = fm.graph();
  json doc;
  doc["bipartite"] = g.has_bipartition();
  if (g.has_bipartition()) {
    json left = json::array(), right = json::array();
    for (VertexId v = 0; v < g.vertex_count(); ++v) (g.side(v) == Side::left ? left : right).push_back(v);
    doc["vertices"] = {{"left", left}, {"right", right}};
  } else {
    doc["vertices"] = g.vertex_count();
  }
  json edges = json::array();
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    edges.push_back({{"u", g.edge(e).u}, {"v", g.edge(e).v}, {"x", fm.x(e)}});
  }
  doc["edges"] = std::move(edges);
  return doc;
}

std::string instance_hash(const FractionalMatching& fm) { return hex64(fnv1a64(instance_to_json(fm).dump())); }

DoublyStochasticMatrix read_matrix_csv(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t start = 0;
    for (std::size_t col = 1;; ++col) {
      const std::size_t end = line.find(',', start);
      const std::string cell = line.substr(start, end == std::string::npos ? std::string::npos : end - start);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || cell.find_first_not_of(" \t\r", used) != std::string::npos) {
        throw InputError(source + ": line " + std::to_string(line_no) + ", column " + std::to_string(col) +
                         ": expected a number, got \"" + cell + "\"");
      }
      row.push_back(v);
      if (end == std::string::npos) break;
      start = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError(source + ": line " + std::to_string(line_no) + ": row has " + std::to_string(row.size()) +
                       " entries, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(source + ": empty matrix");
  if (rows.size() != rows.front().size()) {
    throw InputError(source + ": matrix has " + std::to_string(rows.size()) + " rows and " +
                     std::to_string(rows.front().size()) + " columns");
  }
  std::vector<double> entries;
  for (const auto& r : rows) entries.insert(entries.end(), r.begin(), r.end());
  try {
    return DoublyStochasticMatrix(rows.size(), std::move(entries));
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
}

DoublyStochasticMatrix load_matrix_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return read_matrix_csv(in, path.string());
}

AllocationInstance parse_allocation(const json& doc, const std::string& source) {
  AllocationInstance inst;
  inst.m = as_index(field(doc, "m", source, ""), source, "/m");
  inst.n = as_index(field(doc, "n", source, ""), source, "/n");
  const json& items = field(doc, "items", source, "");
  if (!items.is_array()) fail(source, "/items", "expected an array of names");
  if (items.size() > kMaxItems) fail(source, "/items", "at most " + std::to_string(kMaxItems) + " items are supported");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string at = "/items/" + std::to_string(i);
    if (!items[i].is_string()) fail(source, at, "expected a string");
    const auto name = items[i].get<std::string>();
    if (!index.emplace(name, i).second) fail(source, at, "duplicate item \"" + name + "\"");
    inst.items.push_back(name);
  }
  inst.valuations.assign(inst.cells(), {});
  std::vector<std::uint8_t> seen(inst.cells(), 0);
  const json& vals = field(doc, "valuations", source, "");
  if (!vals.is_array()) fail(source, "/valuations", "expected an array");
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const std::string at = "/valuations/" + std::to_string(i);
    const auto s = as_index(field(vals[i], "s", source, at), source, at + "/s");
    const auto t = as_index(field(vals[i], "t", source, at), source, at + "/t");
    if (s >= inst.m || t >= inst.n) fail(source, at, "cell outside the " + std::to_string(inst.m) + "x" + std::to_string(inst.n) + " grid");
    if (seen[s * inst.n + t]++) fail(source, at, "cell appears twice");
    const json& clauses = field(vals[i], "clauses", source, at);
    if (!clauses.is_array()) fail(source, at + "/clauses", "expected an array");
    auto& val = inst.valuations[s * inst.n + t];
    for (std::size_t c = 0; c < clauses.size(); ++c) {
      const std::string cat = at + "/clauses/" + std::to_string(c);
      if (!clauses[c].is_object()) fail(source, cat, "expected an object of item weights");
      std::vector<double> weights(inst.items.size(), 0.0);
      for (const auto& [name, w] : clauses[c].items()) {
        const auto it = index.find(name);
        if (it == index.end()) fail(source, cat + "/" + name, "unknown item");
        const double v = as_number(w, source, cat + "/" + name);
        if (!(v >= 0.0) || !std::isfinite(v)) fail(source, cat + "/" + name, "weight must be finite and non-negative");
        weights[it->second] = v;
      }
      val.clauses.push_back(std::move(weights));
    }
  }
  return inst;
}

AllocationInstance load_allocation(const std::filesystem::path& path) {
  return parse_allocation(load_json(path), path.string());
}

json allocation_to_json(const AllocationInstance& inst) {
  json vals = json::array();
  for (std::size_t c = 0; c < inst.cells(); ++c) {
    if (inst.valuations[c].clauses.empty()) continue;
    json clauses = json::array();
    for (const auto& clause : inst.valuations[c].clauses) {
      json obj = json::object();
      for (std::size_t a = 0; a < clause.size(); ++a) {
        if (clause[a] != 0.0) obj[inst.items[a]] = clause[a];
      }
      clauses.push_back(std::move(obj));
    }
    vals.push_back({{"s", c / inst.n}, {"t", c % inst.n}, {"clauses", std::move(clauses)}});
  }
  return {{"m", inst.m}, {"n", inst.n}, {"items", inst.items}, {"valuations", std::move(vals)}};
}

std::string allocation_hash(const AllocationInstance& inst) { return hex64(fnv1a64(allocation_to_json(inst).dump())); }

}  // namespace crs
