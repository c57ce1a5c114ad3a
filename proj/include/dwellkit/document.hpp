#pragma once

// Declarative system documents.  A document is the JSON description of one
// switched system — subsystem matrices as row lists, graph edges, jump rule,
// norm, optional Jordan-basis overrides and rescale directives — plus an
// optional simulation request.  Parsing is strict: unknown keys are rejected
// with their path, and toSpec() refuses anything validate() complains about.

#include "dwellkit/sim.hpp"

#include "json.hpp"

#include <cctype>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace dwellkit {

using Json = nlohmann::ordered_json;

struct DocumentError : Error {
  explicit DocumentError(const std::string& what) : Error(what) {}
};

// ---------------------------------------------------------------------------
// Document types
// ---------------------------------------------------------------------------

/// Simulation request attached to a document.  The signal description maps
/// onto SignalGenerator; x0 and sampleStep feed simulate(); the impulse
/// policy picks the schedule when the jump rule is an impulse family.
struct SimulationRequest {
  SignalGenerator::Kind kind = SignalGenerator::Kind::periodicCycle;
  std::vector<ModeId> cycleModes;      // periodicCycle only
  std::vector<double> cycleDurations;  // periodicCycle only
  std::optional<double> dwell;         // randomAdmissible class bounds
  std::optional<double> flee;
  double horizon = 0.0;
  RealVector x0;
  std::optional<std::size_t> impulseMember;  // constant schedule from one member
  bool impulseRandom = false;                // fresh member/hull draw per switch
  double sampleStep = 0.0;                   // 0 = simulate's default
};

/// Parsed form of a system document.  Declaration order is preserved: the
/// graph's vertex order is the modes' order, and overrides apply before the
/// rescale directives (a scale of 1e-3 on a tabulated basis means 1e-3 times
/// that basis, not times the solver's).
struct SystemDocument {
  std::string name;
  std::vector<std::pair<ModeId, RealMatrix>> modes;
  std::vector<ModePair> edges;
  JumpRule jumps = ResetCollection{};
  NormSpec norm = NormSpec::spectral();
  std::vector<std::pair<ModeId, ComplexMatrix>> basisOverrides;
  std::vector<std::pair<ModeId, double>> rescales;
  std::optional<SimulationRequest> simulation;

  /// Build the spec: subsystems, graph, jumps, norm, then overrides and
  /// rescales, then validate.  Any diagnostic is fatal here — a document
  /// that parses must describe a well-formed system.
  [[nodiscard]] SwitchedSystemSpec toSpec() const {
    SwitchedSystemSpec spec;
    for (const auto& [id, A] : modes) {
      spec.subsystems.push_back(makeSubsystem(id, A));
      spec.graph.vertices.push_back(id);
    }
    for (const auto& e : edges) spec.graph.edges.insert(e);
    spec.jumps = jumps;
    spec.norm = norm;
    for (const auto& [id, P] : basisOverrides) applyBasisOverride(spec, id, P);
    for (const auto& [id, s] : rescales) applyBasisScale(spec, id, s);
    const auto diags = validate(spec);
    if (!diags.empty()) {
      std::ostringstream oss;
      oss << "document \"" << name << "\" fails validation:";
      for (const auto& d : diags) oss << "\n  - " << d.message;
      throw DocumentError(oss.str());
    }
    return spec;
  }
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

[[noreturn]] inline void docFail(const std::string& path, const std::string& what) {
  throw DocumentError(path + ": " + what);
}

/// Reject keys outside the grammar, naming the offending path.
inline void checkKeys(const Json& obj, const std::string& path,
                      std::initializer_list<const char*> known) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok |= (item.key() == k);
    if (!ok) docFail(path + "." + item.key(), "unknown key");
  }
}

inline const Json& member(const Json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) docFail(path, std::string("missing required key \"") + key + "\"");
  return *it;
}

inline std::string indexed(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

inline double asDouble(const Json& v, const std::string& path) {
  if (!v.is_number()) docFail(path, "expected a number");
  return v.get<double>();
}

inline ModeId asModeId(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) docFail(path, "expected an integer mode id");
  return v.get<ModeId>();
}

inline std::string asString(const Json& v, const std::string& path) {
  if (!v.is_string()) docFail(path, "expected a string");
  return v.get<std::string>();
}

inline RealVector asRealVector(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) docFail(path, "expected a nonempty array of numbers");
  RealVector x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    x(static_cast<Eigen::Index>(i)) = asDouble(v[i], indexed(path, i));
  return x;
}

inline RealMatrix asRealMatrix(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) docFail(path, "expected a nonempty array of rows");
  RealMatrix M;
  Eigen::Index cols = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string rowPath = indexed(path, i);
    const Json& row = v[i];
    if (!row.is_array() || row.empty()) docFail(rowPath, "expected a nonempty row of numbers");
    if (i == 0) {
      cols = static_cast<Eigen::Index>(row.size());
      M.resize(static_cast<Eigen::Index>(v.size()), cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) docFail(rowPath, "rows have unequal lengths");
    for (std::size_t j = 0; j < row.size(); ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          asDouble(row[j], indexed(rowPath, j));
  }
  return M;
}

/// Matrix entries in overrides may be complex: a plain number, or [re, im].
inline std::complex<double> asComplexEntry(const Json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  docFail(path, "expected a number or an [re, im] pair");
}

inline ComplexMatrix asComplexMatrix(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) docFail(path, "expected a nonempty array of rows");
  ComplexMatrix M;
  Eigen::Index cols = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string rowPath = indexed(path, i);
    const Json& row = v[i];
    if (!row.is_array() || row.empty()) docFail(rowPath, "expected a nonempty row");
    if (i == 0) {
      cols = static_cast<Eigen::Index>(row.size());
      M.resize(static_cast<Eigen::Index>(v.size()), cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) docFail(rowPath, "rows have unequal lengths");
    for (std::size_t j = 0; j < row.size(); ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          asComplexEntry(row[j], indexed(rowPath, j));
  }
  return M;
}

inline JumpRule parseJumps(const Json& v, const std::string& path) {
  if (!v.is_object()) docFail(path, "expected an object");
  const std::string kind = asString(member(v, path, "kind"), path + ".kind");
  if (kind == "resets") {
    checkKeys(v, path, {"kind", "resets"});
    const Json& list = member(v, path, "resets");
    if (!list.is_array()) docFail(path + ".resets", "expected an array");
    ResetCollection rc;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string entryPath = indexed(path + ".resets", i);
      const Json& entry = list[i];
      if (!entry.is_object()) docFail(entryPath, "expected an object");
      checkKeys(entry, entryPath, {"edge", "matrix"});
      const Json& edge = member(entry, entryPath, "edge");
      if (!edge.is_array() || edge.size() != 2) docFail(entryPath + ".edge", "expected [p, q]");
      const ModePair pq{asModeId(edge[0], entryPath + ".edge[0]"),
                        asModeId(edge[1], entryPath + ".edge[1]")};
      if (rc.resets.count(pq)) docFail(entryPath + ".edge", "duplicate reset for this edge");
      rc.resets[pq] = asRealMatrix(member(entry, entryPath, "matrix"), entryPath + ".matrix");
    }
    return rc;
  }
  if (kind == "impulses") {
    checkKeys(v, path, {"kind", "family", "matrices"});
    const std::string family = asString(member(v, path, "family"), path + ".family");
    ImpulseSet set;
    if (family == "finite")
      set.kind = ImpulseSet::Kind::finite;
    else if (family == "convexHull")
      set.kind = ImpulseSet::Kind::convexHull;
    else
      docFail(path + ".family", "expected \"finite\" or \"convexHull\"");
    const Json& list = member(v, path, "matrices");
    if (!list.is_array() || list.empty()) docFail(path + ".matrices", "expected a nonempty array");
    for (std::size_t i = 0; i < list.size(); ++i)
      set.matrices.push_back(asRealMatrix(list[i], indexed(path + ".matrices", i)));
    return set;
  }
  docFail(path + ".kind", "expected \"resets\" or \"impulses\"");
}

inline NormSpec parseNorm(const Json& v, const std::string& path) {
  if (!v.is_object()) docFail(path, "expected an object");
  const std::string kind = asString(member(v, path, "kind"), path + ".kind");
  if (kind == "spectral") {
    checkKeys(v, path, {"kind"});
    return NormSpec::spectral();
  }
  if (kind == "ellipsoidal") {
    checkKeys(v, path, {"kind", "weight"});
    return NormSpec::ellipsoidal(asRealMatrix(member(v, path, "weight"), path + ".weight"));
  }
  docFail(path + ".kind", "expected \"spectral\" or \"ellipsoidal\"");
}

inline SimulationRequest parseSimulation(const Json& v, const std::string& path) {
  if (!v.is_object()) docFail(path, "expected an object");
  checkKeys(v, path, {"signal", "x0", "impulse", "sampleStep"});
  SimulationRequest req;

  const Json& sig = member(v, path, "signal");
  const std::string sigPath = path + ".signal";
  if (!sig.is_object()) docFail(sigPath, "expected an object");
  const std::string kind = asString(member(sig, sigPath, "kind"), sigPath + ".kind");
  if (kind == "periodicCycle") {
    checkKeys(sig, sigPath, {"kind", "modes", "durations", "horizon"});
    req.kind = SignalGenerator::Kind::periodicCycle;
    const Json& cycleModes = member(sig, sigPath, "modes");
    if (!cycleModes.is_array() || cycleModes.empty())
      docFail(sigPath + ".modes", "expected a nonempty array of mode ids");
    for (std::size_t i = 0; i < cycleModes.size(); ++i)
      req.cycleModes.push_back(asModeId(cycleModes[i], indexed(sigPath + ".modes", i)));
    const Json& durations = member(sig, sigPath, "durations");
    if (!durations.is_array() || durations.empty())
      docFail(sigPath + ".durations", "expected a nonempty array of durations");
    for (std::size_t i = 0; i < durations.size(); ++i)
      req.cycleDurations.push_back(asDouble(durations[i], indexed(sigPath + ".durations", i)));
  } else if (kind == "randomAdmissible") {
    checkKeys(sig, sigPath, {"kind", "dwell", "flee", "horizon"});
    req.kind = SignalGenerator::Kind::randomAdmissible;
    if (sig.contains("dwell")) req.dwell = asDouble(sig["dwell"], sigPath + ".dwell");
    if (sig.contains("flee")) req.flee = asDouble(sig["flee"], sigPath + ".flee");
  } else {
    docFail(sigPath + ".kind", "expected \"periodicCycle\" or \"randomAdmissible\"");
  }
  req.horizon = asDouble(member(sig, sigPath, "horizon"), sigPath + ".horizon");

  req.x0 = asRealVector(member(v, path, "x0"), path + ".x0");

  if (v.contains("impulse")) {
    const Json& imp = v["impulse"];
    const std::string impPath = path + ".impulse";
    if (!imp.is_object()) docFail(impPath, "expected an object");
    checkKeys(imp, impPath, {"member", "policy"});
    if (imp.contains("member") == imp.contains("policy"))
      docFail(impPath, "expected exactly one of \"member\" or \"policy\"");
    if (imp.contains("member")) {
      const Json& m = imp["member"];
      if (!m.is_number_integer() || m.get<long long>() < 0)
        docFail(impPath + ".member", "expected a nonnegative member index");
      req.impulseMember = m.get<std::size_t>();
    } else {
      if (asString(imp["policy"], impPath + ".policy") != "random")
        docFail(impPath + ".policy", "expected \"random\"");
      req.impulseRandom = true;
    }
  }
  if (v.contains("sampleStep"))
    req.sampleStep = asDouble(v["sampleStep"], path + ".sampleStep");
  return req;
}

}  // namespace detail

inline SystemDocument parseSystemDocument(const Json& root) {
  if (!root.is_object()) detail::docFail("$", "document must be a JSON object");
  detail::checkKeys(root, "$",
                    {"name", "modes", "edges", "jumps", "norm", "basisOverrides", "rescale",
                     "simulation"});
  SystemDocument doc;
  doc.name = detail::asString(detail::member(root, "$", "name"), "$.name");

  const Json& modes = detail::member(root, "$", "modes");
  if (!modes.is_array() || modes.empty())
    detail::docFail("$.modes", "expected a nonempty array of modes");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string path = detail::indexed("$.modes", i);
    const Json& entry = modes[i];
    if (!entry.is_object()) detail::docFail(path, "expected an object");
    detail::checkKeys(entry, path, {"id", "A"});
    doc.modes.emplace_back(
        detail::asModeId(detail::member(entry, path, "id"), path + ".id"),
        detail::asRealMatrix(detail::member(entry, path, "A"), path + ".A"));
  }

  const Json& edges = detail::member(root, "$", "edges");
  if (!edges.is_array()) detail::docFail("$.edges", "expected an array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string path = detail::indexed("$.edges", i);
    const Json& e = edges[i];
    if (!e.is_array() || e.size() != 2) detail::docFail(path, "expected [p, q]");
    doc.edges.emplace_back(detail::asModeId(e[0], path + "[0]"),
                           detail::asModeId(e[1], path + "[1]"));
  }

  doc.jumps = detail::parseJumps(detail::member(root, "$", "jumps"), "$.jumps");
  if (root.contains("norm")) doc.norm = detail::parseNorm(root["norm"], "$.norm");

  if (root.contains("basisOverrides")) {
    const Json& list = root["basisOverrides"];
    if (!list.is_array()) detail::docFail("$.basisOverrides", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = detail::indexed("$.basisOverrides", i);
      const Json& entry = list[i];
      if (!entry.is_object()) detail::docFail(path, "expected an object");
      detail::checkKeys(entry, path, {"mode", "basis"});
      doc.basisOverrides.emplace_back(
          detail::asModeId(detail::member(entry, path, "mode"), path + ".mode"),
          detail::asComplexMatrix(detail::member(entry, path, "basis"), path + ".basis"));
    }
  }

  if (root.contains("rescale")) {
    const Json& list = root["rescale"];
    if (!list.is_array()) detail::docFail("$.rescale", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = detail::indexed("$.rescale", i);
      const Json& entry = list[i];
      if (!entry.is_object()) detail::docFail(path, "expected an object");
      detail::checkKeys(entry, path, {"mode", "scale"});
      doc.rescales.emplace_back(
          detail::asModeId(detail::member(entry, path, "mode"), path + ".mode"),
          detail::asDouble(detail::member(entry, path, "scale"), path + ".scale"));
    }
  }

  if (root.contains("simulation"))
    doc.simulation = detail::parseSimulation(root["simulation"], "$.simulation");
  return doc;
}

inline SystemDocument parseSystemDocument(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DocumentError(std::string("JSON parse error: ") + e.what());
  }
  return parseSystemDocument(root);
}

inline SystemDocument loadSystemDocument(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DocumentError("cannot open document " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseSystemDocument(buf.str());
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

inline Json matrixJson(const RealMatrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// dump(2) puts every scalar on its own line; fold arrays that hold only
/// scalars back onto one line so matrices read as row lists.  Whitespace-only
/// rewrite: the folded text parses to the same JSON value.
inline std::string foldScalarArrays(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"') j += (text[j] == '\\') ? 2 : 1;
      out.append(text, i, j - i + 1);
      i = j + 1;
      continue;
    }
    if (c == '[') {
      std::size_t j = i + 1;
      bool scalarOnly = true;
      while (j < text.size() && text[j] != ']') {
        if (text[j] == '[' || text[j] == '{' || text[j] == '"') {
          scalarOnly = false;
          break;
        }
        ++j;
      }
      if (scalarOnly && j < text.size()) {
        std::string inner;
        for (std::size_t k = i + 1; k < j; ++k)
          if (!std::isspace(static_cast<unsigned char>(text[k]))) inner.push_back(text[k]);
        out.push_back('[');
        for (const char d : inner) {
          out.push_back(d);
          if (d == ',') out.push_back(' ');
        }
        out.push_back(']');
        i = j + 1;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

inline Json matrixJson(const ComplexMatrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      const std::complex<double> z = M(i, j);
      if (z.imag() == 0.0)
        row.push_back(z.real());
      else
        row.push_back(Json::array({z.real(), z.imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Canonical JSON form.  Default sections (spectral norm, empty override and
/// rescale lists, no simulation) are omitted, so the emitted text is minimal
/// and the emit→parse round trip reproduces the document exactly: JSON
/// doubles are written shortest-round-trip, so every entry survives.
inline Json toJson(const SystemDocument& doc) {
  Json root;
  root["name"] = doc.name;
  Json modes = Json::array();
  for (const auto& [id, A] : doc.modes) {
    Json entry;
    entry["id"] = id;
    entry["A"] = detail::matrixJson(A);
    modes.push_back(std::move(entry));
  }
  root["modes"] = std::move(modes);
  Json edges = Json::array();
  for (const auto& [p, q] : doc.edges) edges.push_back(Json::array({p, q}));
  root["edges"] = std::move(edges);

  Json jumps;
  if (const auto* rc = std::get_if<ResetCollection>(&doc.jumps)) {
    jumps["kind"] = "resets";
    Json list = Json::array();
    for (const auto& [pq, R] : rc->resets) {
      Json entry;
      entry["edge"] = Json::array({pq.first, pq.second});
      entry["matrix"] = detail::matrixJson(R);
      list.push_back(std::move(entry));
    }
    jumps["resets"] = std::move(list);
  } else {
    const auto& set = std::get<ImpulseSet>(doc.jumps);
    jumps["kind"] = "impulses";
    jumps["family"] = set.kind == ImpulseSet::Kind::finite ? "finite" : "convexHull";
    Json list = Json::array();
    for (const auto& M : set.matrices) list.push_back(detail::matrixJson(M));
    jumps["matrices"] = std::move(list);
  }
  root["jumps"] = std::move(jumps);

  if (doc.norm.kind == NormKind::ellipsoidal) {
    Json norm;
    norm["kind"] = "ellipsoidal";
    norm["weight"] = detail::matrixJson(*doc.norm.weight);
    root["norm"] = std::move(norm);
  }
  if (!doc.basisOverrides.empty()) {
    Json list = Json::array();
    for (const auto& [id, P] : doc.basisOverrides) {
      Json entry;
      entry["mode"] = id;
      entry["basis"] = detail::matrixJson(P);
      list.push_back(std::move(entry));
    }
    root["basisOverrides"] = std::move(list);
  }
  if (!doc.rescales.empty()) {
    Json list = Json::array();
    for (const auto& [id, s] : doc.rescales) {
      Json entry;
      entry["mode"] = id;
      entry["scale"] = s;
      list.push_back(std::move(entry));
    }
    root["rescale"] = std::move(list);
  }
  if (doc.simulation) {
    const SimulationRequest& req = *doc.simulation;
    Json sig;
    if (req.kind == SignalGenerator::Kind::periodicCycle) {
      sig["kind"] = "periodicCycle";
      sig["modes"] = req.cycleModes;
      sig["durations"] = req.cycleDurations;
    } else {
      sig["kind"] = "randomAdmissible";
      if (req.dwell) sig["dwell"] = *req.dwell;
      if (req.flee) sig["flee"] = *req.flee;
    }
    sig["horizon"] = req.horizon;
    Json sim;
    sim["signal"] = std::move(sig);
    Json x0 = Json::array();
    for (Eigen::Index i = 0; i < req.x0.size(); ++i) x0.push_back(req.x0(i));
    sim["x0"] = std::move(x0);
    if (req.impulseMember) {
      Json imp;
      imp["member"] = *req.impulseMember;
      sim["impulse"] = std::move(imp);
    } else if (req.impulseRandom) {
      Json imp;
      imp["policy"] = "random";
      sim["impulse"] = std::move(imp);
    }
    if (req.sampleStep != 0.0) sim["sampleStep"] = req.sampleStep;
    root["simulation"] = std::move(sim);
  }
  return root;
}

inline std::string writeSystemDocument(const SystemDocument& doc) {
  return detail::foldScalarArrays(toJson(doc).dump(2)) + "\n";
}

/// FNV-1a over the canonical dump; reports cite this so a result is pinned
/// to the exact inputs that produced it.
inline std::string documentDigest(const SystemDocument& doc) {
  const std::string dump = toJson(doc).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream oss;
  oss << std::hex << std::setw(16) << std::setfill('0') << h;
  return oss.str();
}

/// Express a spec as a document.  Bases that still match a fresh
/// eigendecomposition are left implicit; anything else (tabulated overrides,
/// rescaled bases) is emitted as an explicit override so the document
/// re-parses to the same spec field for field.  Decay constants are derived
/// data and never stored.
inline SystemDocument documentFromSpec(const SwitchedSystemSpec& spec, std::string name) {
  SystemDocument doc;
  doc.name = std::move(name);
  for (const auto& sub : spec.subsystems) {
    doc.modes.emplace_back(sub.modeId, sub.A);
    const EigenStructure fresh = eigendecompose(sub.A);
    const bool untouched = fresh.basis.rows() == sub.eig.basis.rows() &&
                           fresh.basis.cols() == sub.eig.basis.cols() &&
                           fresh.basis.cwiseEqual(sub.eig.basis).all();
    if (untouched) continue;
    if (sub.eig.defective)
      throw DocumentError("documentFromSpec: mode " + std::to_string(sub.modeId) +
                          " carries a modified defective basis, which overrides cannot express");
    doc.basisOverrides.emplace_back(sub.modeId, sub.eig.basis);
  }
  doc.edges.assign(spec.graph.edges.begin(), spec.graph.edges.end());
  doc.jumps = spec.jumps;
  doc.norm = spec.norm;
  return doc;
}

}  // namespace dwellkit
