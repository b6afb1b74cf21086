#include "rbmo_lab/io.hpp"

#include <fstream>
#include <sstream>

#include "rbmo_lab/error.hpp"

namespace rbmo_lab::io {
namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::parse_error, what); }

const Json& field(const Json& json, const char* key) {
  if (!json.is_object() || !json.contains(key)) parse_fail(std::string("missing field '") + key + "'");
  return json.at(key);
}

double number(const Json& json, const char* what) {
  if (!json.is_number()) parse_fail(std::string(what) + " must be a number");
  return json.get<double>();
}

Json optional_array(const std::vector<std::optional<double>>& values) {
  Json out = Json::array();
  for (const auto& v : values) out.push_back(v ? Json(*v) : Json(nullptr));
  return out;
}

Json cube_json(const Cube& q) {
  Json out = Json::array();
  for (double c : q.center) out.push_back(c);
  out.push_back(q.side);
  return out;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_fail("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    parse_fail("'" + path.string() + "': " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::invalid_spec, "cannot write '" + path.string() + "'");
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

std::string dump(const Json& json) { return json.dump(2) + "\n"; }

Json to_json(const AtomicMeasure& measure) {
  Json atoms = Json::array();
  for (std::size_t i = 0; i < measure.size(); ++i) {
    Json atom = Json::array();
    for (double c : measure.point(i)) atom.push_back(c);
    atom.push_back(measure.mass(i));
    atoms.push_back(std::move(atom));
  }
  return Json{{"ambient_dim", measure.ambient_dim()},
              {"dim_param", measure.dim_param()},
              {"metric", measure.metric() == Metric::euclidean ? "euclidean" : "max"},
              {"atoms", std::move(atoms)}};
}

AtomicMeasure measure_from_json(const Json& json) {
  const Json& dim = field(json, "ambient_dim");
  if (!dim.is_number_integer() || dim.get<long long>() < 1) parse_fail("ambient_dim must be a positive integer");
  const auto m = dim.get<std::size_t>();
  const double n = number(field(json, "dim_param"), "dim_param");
  Metric metric = Metric::max_coordinate;
  if (json.contains("metric")) {
    const Json& name = json.at("metric");
    if (name == "max") {
      metric = Metric::max_coordinate;
    } else if (name == "euclidean") {
      metric = Metric::euclidean;
    } else {
      parse_fail("metric must be \"max\" or \"euclidean\"");
    }
  }
  const Json& atoms = field(json, "atoms");
  if (!atoms.is_array()) parse_fail("atoms must be an array");
  std::vector<double> coords;
  std::vector<double> masses;
  coords.reserve(atoms.size() * m);
  masses.reserve(atoms.size());
  for (const auto& atom : atoms) {
    if (!atom.is_array() || atom.size() != m + 1) parse_fail("each atom must list ambient_dim coordinates and a mass");
    for (std::size_t k = 0; k < m; ++k) coords.push_back(number(atom[k], "coordinate"));
    masses.push_back(number(atom[m], "mass"));
  }
  return AtomicMeasure(m, n, std::move(coords), std::move(masses), metric);
}

AtomicMeasure load_measure(const std::filesystem::path& path) { return measure_from_json(read_json_file(path)); }

Json to_json(const SampledFunction& f) { return Json{{"values", f.values}}; }

SampledFunction function_from_json(const Json& json) {
  const Json& values = field(json, "values");
  if (!values.is_array()) parse_fail("values must be an array");
  SampledFunction f;
  f.values.reserve(values.size());
  for (const auto& v : values) f.values.push_back(number(v, "function value"));
  return f;
}

SampledFunction load_function(const std::filesystem::path& path) { return function_from_json(read_json_file(path)); }

Json to_json(const FamilyParams& params) {
  return Json{{"side_grid", params.side_grid}, {"center_stride", params.center_stride}};
}

Json to_json(const CubeFamily& family) {
  Json cubes = Json::array();
  for (const auto& q : family.cubes) cubes.push_back(cube_json(q));
  Json doubling = Json::array();
  for (bool d : family.doubling) doubling.push_back(d);
  Json pairs = Json::array();
  for (std::size_t p = 0; p < family.nested_pairs.size(); ++p) {
    pairs.push_back(Json::array({family.nested_pairs[p].first, family.nested_pairs[p].second, family.pair_k[p]}));
  }
  return Json{{"cubes", std::move(cubes)},
              {"masses", family.masses},
              {"doubling", std::move(doubling)},
              {"nested_pairs", std::move(pairs)},
              {"alpha", family.params.alpha},
              {"beta", family.params.beta},
              {"params", to_json(family.provenance)}};
}

Json to_json(const NormEstimate& estimate) {
  return Json{{"tag", to_string(estimate.kind)},
              {"value", estimate.value},
              {"rho", estimate.rho},
              {"iterations", estimate.iterations},
              {"excluded", estimate.excluded},
              {"family", Json{{"size", estimate.family.size()},
                              {"beta", estimate.family.params.beta},
                              {"params", to_json(estimate.family.provenance)}}},
              {"witness", optional_array(estimate.witness)}};
}

Json to_json(const JnProfile& profile) {
  return Json{{"lambdas", profile.lambdas},
              {"masses", profile.masses},
              {"normalized", profile.normalized},
              {"slope", profile.slope},
              {"intercept", profile.intercept},
              {"residual", profile.residual},
              {"r_squared", profile.r_squared},
              {"fit_points", profile.fit_points}};
}

Json to_json(const KernelReport& report, const std::map<double, double>& l2_opnorm) {
  Json l2 = Json::object();
  for (auto it = l2_opnorm.rbegin(); it != l2_opnorm.rend(); ++it) l2[Json(it->first).dump()] = it->second;
  return Json{{"size_C", report.size_c},
              {"size_C_euclidean", report.size_c_euclidean},
              {"hoelder_C", report.hoelder_c},
              {"hoelder_C_euclidean", report.hoelder_c_euclidean},
              {"cancellation_sup", report.cancellation_sup},
              {"samples", Json{{"pairs", report.pairs},
                               {"triples", report.triples},
                               {"triples_euclidean", report.triples_euclidean},
                               {"annuli", report.annuli}}},
              {"l2_opnorm", std::move(l2)}};
}

Json to_json(const TheoremReport& report) {
  Json t1 = Json::array();
  for (const auto& row : report.t1) {
    t1.push_back(Json{{"eps", row.eps}, {"h1", row.h1}, {"h2", row.h2}, {"sup_t1", row.sup_t1}});
  }
  Json per_function = Json::array();
  for (const auto& row : report.per_function) {
    per_function.push_back(Json{{"function", row.function},
                                {"eps", row.eps},
                                {"norm_f", row.norm_f},
                                {"norm_Tf", row.norm_tf},
                                {"ratio", row.ratio},
                                {"lemma23", row.lemma23},
                                {"lemma23k", row.lemma23k},
                                {"witnessed_oscillation", row.witnessed_oscillation},
                                {"witnessed_pair", row.witnessed_pair},
                                {"f_q_growth", row.f_q_growth}});
  }
  Json out{{"h1", report.h1},
           {"h2", report.h2},
           {"sup_t1", report.sup_t1},
           {"headline", report.headline},
           {"t1", std::move(t1)},
           {"per_function", std::move(per_function)}};
  if (!report.per_cube.empty()) {
    Json cubes = Json::array();
    for (const auto& row : report.per_cube) {
      const auto& t = row.terms;
      cubes.push_back(Json{{"function", row.function},
                           {"eps", row.eps},
                           {"cube", row.cube},
                           {"doubling", row.doubling},
                           {"k_cap", t.k_cap},
                           {"t1_average", t.t1_average},
                           {"t1_oscillation", t.t1_oscillation},
                           {"f2q", t.f2q},
                           {"b3", t.b3},
                           {"g_q", t.g_q},
                           {"i2", t.i2 ? Json(*t.i2) : Json(nullptr)},
                           {"i3", t.i3 ? Json(*t.i3) : Json(nullptr)}});
    }
    out["per_cube"] = std::move(cubes);
  }
  std::ostringstream hash;
  hash << std::hex << report.measure_hash;
  out["provenance"] = Json{{"kernel", report.kernel},
                           {"measure_hash", hash.str()},
                           {"atoms", report.atoms},
                           {"family", to_json(report.family)},
                           {"beta", report.beta},
                           {"eps_grid", report.eps_grid},
                           {"corpus_size", report.corpus_size}};
  return out;
}

std::string theorem_csv(const Json& report) {
  static constexpr const char* kColumns[] = {"function", "eps",    "norm_f",   "norm_Tf",
                                             "ratio",    "lemma23", "lemma23k", "witnessed_oscillation",
                                             "witnessed_pair", "f_q_growth"};
  const Json& rows = field(report, "per_function");
  if (!rows.is_array()) parse_fail("per_function must be an array");
  std::string out = std::string(kCsvHeaderComment) + "\n";
  for (std::size_t c = 0; c < std::size(kColumns); ++c) out += (c ? "," : "") + std::string(kColumns[c]);
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < std::size(kColumns); ++c) {
      out += (c ? "," : "") + field(row, kColumns[c]).dump();
    }
    out += "\n";
  }
  return out;
}

}  // namespace rbmo_lab::io
