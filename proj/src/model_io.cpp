#include "ifsm/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ifsm/error.hpp"
#include "json.hpp"

namespace ifsm {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ModelError("model: '" + where + "' must be an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ModelError("model: missing field '" + where + "." + key + "'");
  return *it;
}

double as_double(const json& j, const std::string& where) {
  if (!j.is_number()) throw ModelError("model: '" + where + "' must be a number");
  return j.get<double>();
}

std::size_t as_size(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw ModelError("model: '" + where + "' must be a nonnegative integer");
  return j.get<std::size_t>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ModelError("model: '" + where + "' must be a string");
  return j.get<std::string>();
}

std::vector<double> as_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ModelError("model: '" + where + "' must be an array of numbers");
  std::vector<double> v;
  v.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_double(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

// Nested rows -> row-major D x D.
std::vector<double> as_matrix(const json& j, std::size_t d, const std::string& where) {
  if (!j.is_array() || j.size() != d) throw ModelError("model: '" + where + "' must have " + std::to_string(d) + " rows");
  std::vector<double> m;
  for (std::size_t r = 0; r < d; ++r) {
    auto row = as_vector(j[r], where + "[" + std::to_string(r) + "]");
    if (row.size() != d) throw ModelError("model: '" + where + "' must be square");
    m.insert(m.end(), row.begin(), row.end());
  }
  return m;
}

Box as_box(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ModelError("model: '" + where + "' must be a nonempty array of [lo, hi]");
  std::vector<double> lo, hi;
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto pair = as_vector(j[i], where + "[" + std::to_string(i) + "]");
    if (pair.size() != 2) throw ModelError("model: '" + where + "' entries must be [lo, hi]");
    lo.push_back(pair[0]);
    hi.push_back(pair[1]);
  }
  try {
    return Box(std::move(lo), std::move(hi));
  } catch (const Error& e) {
    throw ModelError(std::string("model: ") + where + ": " + e.what());
  }
}

Metric as_metric(const json& j, const std::string& where) {
  try {
    return parse_metric(as_string(j, where));
  } catch (const ModelError&) {
    throw;
  } catch (const Error& e) {
    throw ModelError(std::string("model: ") + where + ": " + e.what());
  }
}

Expression as_expression(const json& j, const std::string& where) { return Expression::parse(as_string(j, where)); }

std::optional<double> optional_double(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return as_double(*it, where + "." + key);
}

ParamSpace parse_params(const json& j) {
  const Metric metric = j.contains("metric") ? as_metric(j["metric"], "params.metric") : Metric::euclidean;
  const bool has_atoms = j.contains("atoms");
  const bool has_interval = j.contains("interval");
  if (has_atoms == has_interval) throw ModelError("model: params needs exactly one of 'atoms' or 'interval'");
  if (has_interval) {
    Box box = as_box(j["interval"], "params.interval");
    const std::size_t grid = as_size(field(j, "grid", "params"), "params.grid");
    return ParamSpace::from_interval(std::move(box), grid, metric);
  }
  const json& atoms = j["atoms"];
  if (!atoms.is_array() || atoms.empty()) throw ModelError("model: params.atoms must be a nonempty array");
  std::vector<Point> pts;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string where = "params.atoms[" + std::to_string(i) + "]";
    if (atoms[i].is_number()) {
      pts.emplace_back(std::vector<double>{as_double(atoms[i], where)});
    } else {
      pts.emplace_back(as_vector(atoms[i], where));
    }
  }
  try {
    return ParamSpace(PointCloud(pts), metric);
  } catch (const ModelError&) {
    throw;
  } catch (const Error& e) {
    throw ModelError(std::string("model: params.atoms: ") + e.what());
  }
}

MapFamily parse_maps(const json& j, const ParamSpace& params, std::size_t d) {
  const std::string kind = as_string(field(j, "kind", "maps"), "maps.kind");
  const std::size_t n = params.size();
  if (kind == "affine") {
    AffineMaps m;
    if (j.contains("A")) {
      const json& a = j["A"];
      const json& b = field(j, "b", "maps");
      if (!a.is_array() || a.size() != n || !b.is_array() || b.size() != n)
        throw ModelError("model: maps.A and maps.b need one entry per parameter atom");
      for (std::size_t k = 0; k < n; ++k) {
        m.matrices.push_back(as_matrix(a[k], d, "maps.A[" + std::to_string(k) + "]"));
        m.offsets.push_back(as_vector(b[k], "maps.b[" + std::to_string(k) + "]"));
      }
      return m;
    }
    // Linear parametrization A(l) = A0 + sum_k l_k A_lambda[k], same for b.
    const auto a0 = as_matrix(field(j, "A0", "maps"), d, "maps.A0");
    const auto b0 = as_vector(field(j, "b0", "maps"), "maps.b0");
    const std::size_t dl = params.dim();
    std::vector<std::vector<double>> al, bl;
    if (j.contains("A_lambda")) {
      const json& x = j["A_lambda"];
      if (!x.is_array() || x.size() != dl) throw ModelError("model: maps.A_lambda needs one matrix per parameter axis");
      for (std::size_t k = 0; k < dl; ++k) al.push_back(as_matrix(x[k], d, "maps.A_lambda[" + std::to_string(k) + "]"));
    }
    if (j.contains("b_lambda")) {
      const json& x = j["b_lambda"];
      if (!x.is_array() || x.size() != dl) throw ModelError("model: maps.b_lambda needs one vector per parameter axis");
      for (std::size_t k = 0; k < dl; ++k) bl.push_back(as_vector(x[k], "maps.b_lambda[" + std::to_string(k) + "]"));
    }
    for (std::size_t atom = 0; atom < n; ++atom) {
      const auto lam = params.atom(atom);
      auto a = a0;
      auto b = b0;
      for (std::size_t k = 0; k < al.size(); ++k)
        for (std::size_t e = 0; e < a.size(); ++e) a[e] += lam[k] * al[k][e];
      for (std::size_t k = 0; k < bl.size(); ++k) {
        if (bl[k].size() != b.size()) throw ModelError("model: maps.b_lambda entries must match b0");
        for (std::size_t e = 0; e < b.size(); ++e) b[e] += lam[k] * bl[k][e];
      }
      m.matrices.push_back(std::move(a));
      m.offsets.push_back(std::move(b));
    }
    return m;
  }
  if (kind == "gifs_skew") {
    GifsSkewMaps m;
    m.degree = as_size(field(j, "degree", "maps"), "maps.degree");
    const json& c = field(j, "coefficients", "maps");
    if (!c.is_array()) throw ModelError("model: maps.coefficients must be an array");
    for (std::size_t k = 0; k < c.size(); ++k)
      m.coefficients.push_back(as_vector(c[k], "maps.coefficients[" + std::to_string(k) + "]"));
    m.offsets = as_vector(field(j, "offsets", "maps"), "maps.offsets");
    return m;
  }
  if (kind == "custom") {
    CustomMaps m;
    const json& e = field(j, "expressions", "maps");
    if (!e.is_array()) throw ModelError("model: maps.expressions must be an array of strings");
    for (std::size_t k = 0; k < e.size(); ++k)
      m.expressions.push_back(as_expression(e[k], "maps.expressions[" + std::to_string(k) + "]"));
    return m;
  }
  throw ModelError("model: unknown maps.kind '" + kind + "'");
}

WeightFamily parse_weights(const json& j) {
  const std::string kind = as_string(field(j, "kind", "weights"), "weights.kind");
  if (kind == "constant") return ConstantWeights{as_vector(field(j, "p", "weights"), "weights.p")};
  if (kind == "thermodynamic") {
    ThermodynamicWeights w;
    w.potential = as_expression(field(j, "potential", "weights"), "weights.potential");
    w.base = as_vector(field(j, "base", "weights"), "weights.base");
    w.potential_lipschitz = optional_double(j, "potential_lipschitz", "weights");
    w.potential_sup = optional_double(j, "potential_sup", "weights");
    return w;
  }
  if (kind == "mixture") {
    MixtureWeights w;
    w.h = as_expression(field(j, "h", "weights"), "weights.h");
    w.nu1 = as_vector(field(j, "nu1", "weights"), "weights.nu1");
    w.nu2 = as_vector(field(j, "nu2", "weights"), "weights.nu2");
    w.h_lipschitz = optional_double(j, "h_lipschitz", "weights");
    return w;
  }
  if (kind == "custom") return CustomWeights{as_expression(field(j, "expression", "weights"), "weights.expression")};
  throw ModelError("model: unknown weights.kind '" + kind + "'");
}

ojson box_json(const Box& b) {
  ojson out = ojson::array();
  for (std::size_t i = 0; i < b.dim(); ++i) out.push_back({b.lo[i], b.hi[i]});
  return out;
}

ojson matrix_json(const std::vector<double>& m, std::size_t d) {
  ojson rows = ojson::array();
  for (std::size_t r = 0; r < d; ++r) rows.push_back(std::vector<double>(m.begin() + r * d, m.begin() + (r + 1) * d));
  return rows;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

IfsmModel model_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError(std::string("model: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ModelError("model: document must be a JSON object");
  const std::string name = doc.contains("name") ? as_string(doc["name"], "name") : "model";
  const json& dom = field(doc, "domain", "");
  Box box = as_box(field(dom, "box", "domain"), "domain.box");
  if (dom.contains("dim") && as_size(dom["dim"], "domain.dim") != box.dim())
    throw ModelError("model: domain.dim does not match domain.box");
  const Metric metric = dom.contains("metric") ? as_metric(dom["metric"], "domain.metric") : Metric::euclidean;
  ParamSpace params = parse_params(field(doc, "params", ""));
  MapFamily maps = parse_maps(field(doc, "maps", ""), params, box.dim());
  const json& wj = field(doc, "weights", "");
  WeightFamily weights = parse_weights(wj);
  bool full_support = true;
  if (wj.contains("full_support")) {
    if (!wj["full_support"].is_boolean()) throw ModelError("model: weights.full_support must be a boolean");
    full_support = wj["full_support"].get<bool>();
  }
  std::size_t depth = 1;
  if (doc.contains("analysis")) {
    const json& a = doc["analysis"];
    if (a.contains("depth")) depth = as_size(a["depth"], "analysis.depth");
  }
  return IfsmModel(name, std::move(box), metric, std::move(params), std::move(maps), std::move(weights), full_support,
                   depth);
}

std::string model_to_string(const IfsmModel& model) {
  ojson doc;
  doc["name"] = model.name();
  doc["domain"] = {{"dim", model.dim()}, {"box", box_json(model.domain())}, {"metric", to_string(model.metric())}};

  ojson params;
  const auto& ps = model.params();
  if (ps.interval()) {
    params["interval"] = box_json(ps.interval()->box);
    params["grid"] = ps.interval()->grid;
  } else {
    ojson atoms = ojson::array();
    for (std::size_t j = 0; j < ps.size(); ++j) {
      const auto a = ps.atom(j);
      atoms.push_back(std::vector<double>(a.begin(), a.end()));
    }
    params["atoms"] = std::move(atoms);
  }
  params["metric"] = to_string(ps.metric());
  doc["params"] = std::move(params);

  const std::size_t d = model.dim();
  doc["maps"] = std::visit(Overloaded{
                               [&](const AffineMaps& m) {
                                 ojson a = ojson::array();
                                 for (const auto& mat : m.matrices) a.push_back(matrix_json(mat, d));
                                 return ojson{{"kind", "affine"}, {"A", std::move(a)}, {"b", m.offsets}};
                               },
                               [&](const GifsSkewMaps& m) {
                                 return ojson{{"kind", "gifs_skew"},
                                              {"degree", m.degree},
                                              {"coefficients", m.coefficients},
                                              {"offsets", m.offsets}};
                               },
                               [&](const CustomMaps& m) {
                                 ojson e = ojson::array();
                                 for (const auto& x : m.expressions) e.push_back(x.source());
                                 return ojson{{"kind", "custom"}, {"expressions", std::move(e)}};
                               },
                           },
                           model.maps());

  ojson w = std::visit(Overloaded{
                           [](const ConstantWeights& c) { return ojson{{"kind", "constant"}, {"p", c.p}}; },
                           [](const ThermodynamicWeights& t) {
                             ojson o{{"kind", "thermodynamic"}, {"potential", t.potential.source()}, {"base", t.base}};
                             if (t.potential_lipschitz) o["potential_lipschitz"] = *t.potential_lipschitz;
                             if (t.potential_sup) o["potential_sup"] = *t.potential_sup;
                             return o;
                           },
                           [](const MixtureWeights& m) {
                             ojson o{{"kind", "mixture"}, {"h", m.h.source()}};
                             if (m.h_lipschitz) o["h_lipschitz"] = *m.h_lipschitz;
                             o["nu1"] = m.nu1;
                             o["nu2"] = m.nu2;
                             return o;
                           },
                           [](const CustomWeights& c) { return ojson{{"kind", "custom"}, {"expression", c.w.source()}}; },
                       },
                       model.weights());
  w["full_support"] = model.declares_full_support();
  doc["weights"] = std::move(w);
  doc["analysis"] = {{"depth", model.depth()}};
  return doc.dump(2) + "\n";
}

IfsmModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading model file '" + path + "'");
  return model_from_string(ss.str());
}

void save_model(const IfsmModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file '" + path + "'");
  out << model_to_string(model);
  if (!out) throw IoError("error writing model file '" + path + "'");
}

std::uint64_t model_hash(const IfsmModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : model_to_string(model)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace ifsm
