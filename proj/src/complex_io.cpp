#include "manidel/complex.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace manidel {

using nlohmann::json;

std::string complex_to_json(const AbstractComplex& c, const PLMetric* metric) {
  if (c.simplices.empty()) throw Error(ErrorKind::Io, "refusing to export an empty complex");
  json doc;
  doc["m"] = c.m;
  doc["vertices"] = c.vertices();
  json simplices = json::array();
  for (const SimplexKey& s : c.simplices)
    if (s.size() > 1) simplices.push_back(s);
  doc["simplices"] = simplices;
  json lengths = json::array();
  if (metric)
    for (const auto& [e, l] : metric->edge_lengths) lengths.push_back({e.first, e.second, l});
  doc["edge_lengths"] = lengths;
  return doc.dump();
}

std::pair<AbstractComplex, PLMetric> complex_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    SimplexSet all;
    for (Label v : doc.at("vertices")) all.insert({v});
    for (const json& s : doc.at("simplices")) all.insert(make_key(s.get<std::vector<Label>>()));
    AbstractComplex c = complex_from_simplices(doc.at("m").get<int>(), all);
    if (c.simplices.empty()) throw Error(ErrorKind::Io, "complex JSON holds no simplices");
    PLMetric metric;
    for (const json& e : doc.value("edge_lengths", json::array())) {
      const Label i = e.at(0).get<Label>(), j = e.at(1).get<Label>();
      metric.edge_lengths[{std::min(i, j), std::max(i, j)}] = e.at(2).get<double>();
    }
    return {std::move(c), std::move(metric)};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, std::string("complex JSON: ") + e.what());
  }
}

void write_complex_json(const AbstractComplex& c, const PLMetric* metric, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << complex_to_json(c, metric) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

std::pair<AbstractComplex, PLMetric> read_complex_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return complex_from_json(ss.str());
}

std::string complex_to_off(const AbstractComplex& c, const std::map<Label, Point>& coords) {
  if (c.simplices.empty()) throw Error(ErrorKind::Io, "refusing to export an empty complex");
  if (c.m > 3) throw Error(ErrorKind::Io, "OFF export needs m <= 3");
  const std::vector<Label> verts = c.vertices();
  std::map<Label, std::size_t> index;
  for (std::size_t k = 0; k < verts.size(); ++k) index[verts[k]] = k;
  // Cells of an m = 3 complex are written as their boundary triangles.
  std::vector<SimplexKey> faces;
  for (const SimplexKey& s : c.of_dim(std::min(c.m, 2))) faces.push_back(s);
  if (c.m == 1) faces.clear();

  std::ostringstream out;
  out << std::setprecision(17);
  out << "OFF\n" << verts.size() << ' ' << faces.size() << " 0\n";
  for (Label v : verts) {
    const auto it = coords.find(v);
    if (it == coords.end()) throw Error(ErrorKind::Io, "no coordinates for vertex " + std::to_string(v));
    for (int d = 0; d < 3; ++d) out << (d ? " " : "") << (d < it->second.size() ? it->second[d] : 0.0);
    out << '\n';
  }
  for (const SimplexKey& f : faces) {
    out << f.size();
    for (Label v : f) out << ' ' << index[v];
    out << '\n';
  }
  return out.str();
}

void write_complex_off(const AbstractComplex& c, const std::map<Label, Point>& coords, const std::string& path) {
  const std::string text = complex_to_off(c, coords);
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

std::map<Label, Point> export_coordinates(const Atlas& a) {
  std::map<Label, Point> out;
  for (Label l : a.labels()) out[l] = a.fixture ? Point(a.embed(l)) : a.own(l);
  return out;
}

}  // namespace manidel
