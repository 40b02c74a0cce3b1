#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pudq/core.hpp"
#include "pudq/graph.hpp"

namespace pudq {

inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

enum class GraphFormat { g2o_se2, extended_json };

inline GraphFormat format_from_string(const std::string& s) {
  if (s == "g2o" || s == "g2o_se2") return GraphFormat::g2o_se2;
  if (s == "json" || s == "extended_json") return GraphFormat::extended_json;
  throw Error(ErrorKind::usage, "unknown graph format '" + s + "'");
}

inline GraphFormat format_from_path(const std::string& path) {
  return std::filesystem::path(path).extension() == ".g2o" ? GraphFormat::g2o_se2 : GraphFormat::extended_json;
}

struct LoadedGraph {
  PoseGraph graph;
  std::optional<std::vector<Pudq>> ground_truth;
  nlohmann::json provenance;
  int skipped_records = 0;
};

// writes to a sibling temp file and renames it over the target
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + tmp + "' for writing");
    out << content;
    if (!out) throw Error(ErrorKind::io, "failed writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) throw Error(ErrorKind::io, "cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline nlohmann::json pudq_json(const Pudq& x) { return {x[0], x[1], x[2], x[3]}; }

inline Pudq pudq_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorKind::parse, where + ": expected an array of 4 numbers");
  Pudq x;
  for (int k = 0; k < 4; ++k) x[k] = j.at(static_cast<std::size_t>(k)).get<double>();
  if (!is_unit(x, 1e-6)) throw Error(ErrorKind::validation, where + ": PUDQ violates the unit constraint");
  return x;
}

inline nlohmann::json poses_json(const std::vector<Pudq>& xs) {
  nlohmann::json a = nlohmann::json::array();
  for (const Pudq& x : xs) a.push_back(pudq_json(x));
  return a;
}

inline std::vector<Pudq> poses_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorKind::parse, what + " must be an array");
  std::vector<Pudq> xs;
  for (std::size_t k = 0; k < j.size(); ++k) xs.push_back(pudq_from_json(j[k], what + "[" + std::to_string(k) + "]"));
  return xs;
}

}  // namespace detail

inline nlohmann::json graph_to_json(const PoseGraph& g, const std::vector<Pudq>* ground_truth = nullptr,
                                    const nlohmann::json& provenance = nlohmann::json::object()) {
  nlohmann::json j;
  j["format"] = "pudq_pose_graph";
  j["versions"] = {{"schema", kSchemaVersion}, {"library", kLibraryVersion}};
  j["anchor"] = g.anchor;
  j["vertices"] = detail::poses_json(g.vertices);
  if (ground_truth) j["ground_truth"] = detail::poses_json(*ground_truth);
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : g.edges) {
    nlohmann::json om = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) om.push_back({e.omega(r, 0), e.omega(r, 1), e.omega(r, 2)});
    edges.push_back({{"i", e.i}, {"j", e.j}, {"z", detail::pudq_json(e.z)}, {"omega", om}});
  }
  j["edges"] = edges;
  j["info_frame"] = to_string(Frame::pudq_tangent);
  j["provenance"] = provenance;
  return j;
}

inline LoadedGraph graph_from_json(const nlohmann::json& j) {
  try {
    if (!j.contains("versions") || !j["versions"].contains("schema"))
      throw Error(ErrorKind::parse, "extended_json: missing versions.schema");
    if (j["versions"]["schema"].get<int>() != kSchemaVersion)
      throw Error(ErrorKind::parse, "extended_json: unsupported schema version " + j["versions"]["schema"].dump());
    if (j.contains("info_frame") && j["info_frame"].get<std::string>() != to_string(Frame::pudq_tangent))
      throw Error(ErrorKind::parse, "extended_json: information matrices must be stored in the pudq_tangent frame");
    LoadedGraph out;
    out.graph.anchor = j.value("anchor", 0);
    out.graph.vertices = detail::poses_from_json(j.at("vertices"), "vertices");
    if (j.contains("ground_truth")) out.ground_truth = detail::poses_from_json(j["ground_truth"], "ground_truth");
    const auto& edges = j.at("edges");
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto& je = edges[k];
      const std::string where = "edges[" + std::to_string(k) + "]";
      Edge e;
      e.i = je.at("i").get<int>();
      e.j = je.at("j").get<int>();
      e.z = detail::pudq_from_json(je.at("z"), where + ".z");
      const auto& om = je.at("omega");
      if (!om.is_array() || om.size() != 3) throw Error(ErrorKind::parse, where + ".omega must be 3x3");
      for (int r = 0; r < 3; ++r) {
        if (!om[static_cast<std::size_t>(r)].is_array() || om[static_cast<std::size_t>(r)].size() != 3)
          throw Error(ErrorKind::parse, where + ".omega must be 3x3");
        for (int c = 0; c < 3; ++c) e.omega(r, c) = om[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
      }
      validate_spd(e.omega, "information matrix of edge " + std::to_string(k));
      out.graph.edges.push_back(e);
    }
    out.provenance = j.value("provenance", nlohmann::json::object());
    validate_graph(out.graph);
    return out;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::parse, std::string("extended_json: ") + ex.what());
  }
}

inline std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return ss.str();
}

// Information matrices are written in `info_frame`, converted with the measurement angle.
inline std::string graph_to_g2o(const PoseGraph& g, Frame info_frame = Frame::euclidean) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int k = 0; k < g.num_vertices(); ++k) {
    const EuclideanPose p = to_euclidean(g.vertices[static_cast<std::size_t>(k)]);
    out << "VERTEX_SE2 " << k << ' ' << p.tx << ' ' << p.ty << ' ' << p.theta << '\n';
  }
  for (const Edge& e : g.edges) {
    const EuclideanPose p = to_euclidean(e.z);
    const Mat3 I = transform_information({e.omega, Frame::pudq_tangent}, info_frame, p.theta).m;
    out << "EDGE_SE2 " << e.i << ' ' << e.j << ' ' << p.tx << ' ' << p.ty << ' ' << p.theta << ' ' << I(0, 0) << ' '
        << I(0, 1) << ' ' << I(0, 2) << ' ' << I(1, 1) << ' ' << I(1, 2) << ' ' << I(2, 2) << '\n';
  }
  return out.str();
}

// g2o information rows are in (x, y, theta) order for both the euclidean and the se2 reading;
// the se2_algebra frame here uses the same (x, y, theta) ordering.
inline LoadedGraph graph_from_g2o(const std::string& text, Frame info_frame = Frame::euclidean) {
  LoadedGraph out;
  std::map<long, EuclideanPose> verts;
  struct RawEdge {
    long i, j;
    EuclideanPose z;
    Mat3 info;
    int line;
  };
  std::vector<RawEdge> raw;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    auto fail = [&](const std::string& why) {
      return Error(ErrorKind::parse, "g2o line " + std::to_string(lineno) + ": " + why);
    };
    auto finish = [&]() {
      std::string extra;
      if (ls >> extra) throw fail("unexpected trailing token '" + extra + "'");
    };
    if (tag == "VERTEX_SE2") {
      long id;
      EuclideanPose p;
      if (!(ls >> id >> p.tx >> p.ty >> p.theta)) throw fail("malformed VERTEX_SE2 record");
      finish();
      if (verts.count(id)) throw fail("duplicate vertex id " + std::to_string(id));
      p.theta = wrap_angle(p.theta);
      verts[id] = p;
    } else if (tag == "EDGE_SE2") {
      RawEdge e{};
      double v[6];
      if (!(ls >> e.i >> e.j >> e.z.tx >> e.z.ty >> e.z.theta >> v[0] >> v[1] >> v[2] >> v[3] >> v[4] >> v[5]))
        throw fail("malformed EDGE_SE2 record");
      finish();
      e.z.theta = wrap_angle(e.z.theta);
      e.info << v[0], v[1], v[2],
                v[1], v[3], v[4],
                v[2], v[4], v[5];
      e.line = lineno;
      raw.push_back(e);
    } else {
      ++out.skipped_records;
    }
  }
  std::map<long, int> index;
  for (const auto& [id, p] : verts) {
    index[id] = static_cast<int>(out.graph.vertices.size());
    out.graph.vertices.push_back(from_euclidean(p));
  }
  for (const RawEdge& r : raw) {
    if (!index.count(r.i) || !index.count(r.j))
      throw Error(ErrorKind::parse, "g2o line " + std::to_string(r.line) + ": edge references an unknown vertex");
    Edge e;
    e.i = index[r.i];
    e.j = index[r.j];
    e.z = from_euclidean(r.z);
    try {
      e.omega = transform_information({r.info, info_frame}, Frame::pudq_tangent, r.z.theta).m;
      validate_spd(e.omega, "information matrix");
    } catch (const Error& ex) {
      throw Error(ErrorKind::validation, "g2o line " + std::to_string(r.line) + " (edge " + std::to_string(r.i) + " -> " +
                                             std::to_string(r.j) + "): " + ex.what());
    }
    out.graph.edges.push_back(e);
  }
  out.graph.anchor = 0;
  validate_graph(out.graph);
  return out;
}

inline LoadedGraph load_graph(const std::string& path, GraphFormat fmt, Frame info_frame = Frame::euclidean) {
  const std::string text = read_file(path);
  if (fmt == GraphFormat::g2o_se2) return graph_from_g2o(text, info_frame);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw Error(ErrorKind::parse, "'" + path + "': " + ex.what());
  }
  return graph_from_json(j);
}

inline void save_graph(const PoseGraph& g, const std::string& path, GraphFormat fmt, const std::vector<Pudq>* ground_truth = nullptr,
                       const nlohmann::json& provenance = nlohmann::json::object(), Frame info_frame = Frame::euclidean) {
  if (fmt == GraphFormat::g2o_se2)
    write_file_atomic(path, graph_to_g2o(g, info_frame));
  else
    write_file_atomic(path, graph_to_json(g, ground_truth, provenance).dump(2) + "\n");
}

}  // namespace pudq
