#include "manidel/atlas.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace manidel {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index d = 0; d < v.size(); ++d) out.push_back(v[d]);
  return out;
}

Point to_point(const json& j) {
  Point p(static_cast<Eigen::Index>(j.size()));
  for (std::size_t d = 0; d < j.size(); ++d) p[static_cast<Eigen::Index>(d)] = j[d].get<double>();
  return p;
}

json frame_json(const SphereFrame& f) {
  json out = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.push_back(f(r, c));
  return out;
}

SphereFrame frame_from(const json& j) {
  if (j.size() != 9) throw Error(ErrorKind::Io, "sphere frame needs 9 entries");
  SphereFrame f;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) f(r, c) = j[r * 3 + c].get<double>();
  return f;
}

json transition_json(Label i, Label j, const Transition& t) {
  json out{{"i", i}, {"j", j}, {"kind", t.fn->kind()}};
  if (auto* tr = dynamic_cast<const Translation*>(t.fn.get())) {
    out["shift"] = vec(tr->shift());
  } else if (auto* rg = dynamic_cast<const Rigid*>(t.fn.get())) {
    json rot = json::array();
    for (Eigen::Index r = 0; r < rg->rotation().rows(); ++r) rot.push_back(vec(rg->rotation().row(r).transpose()));
    out["rotation"] = rot;
    out["shift"] = vec(rg->shift());
  } else if (auto* tb = dynamic_cast<const Tabulated*>(t.fn.get())) {
    json pairs = json::array();
    for (std::size_t k = 0; k < tb->from().size(); ++k)
      pairs.push_back({vec(tb->from()[k]), vec(tb->to()[k])});
    out["pairs"] = pairs;
    out["interpolation"] = "idw2";
  } else if (auto* sp = dynamic_cast<const SphereExp*>(t.fn.get())) {
    out["from_frame"] = frame_json(sp->from());
    out["to_frame"] = frame_json(sp->to());
    out["radius"] = sp->radius();
  } else {
    throw Error(ErrorKind::Io, "cannot serialise transition kind " + t.fn->kind());
  }
  json dom = json::array();
  for (const Ball& b : t.domain) dom.push_back({{"center", vec(b.center)}, {"radius", b.radius}});
  out["domain"] = dom;
  return out;
}

std::shared_ptr<const TransitionFn> transition_from(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "translation") return std::make_shared<Translation>(to_point(j.at("shift")));
  if (kind == "rigid") {
    const json& rot = j.at("rotation");
    const Eigen::Index m = static_cast<Eigen::Index>(rot.size());
    Eigen::MatrixXd r(m, m);
    for (Eigen::Index a = 0; a < m; ++a) r.row(a) = to_point(rot[a]).transpose();
    return std::make_shared<Rigid>(r, to_point(j.at("shift")));
  }
  if (kind == "tabulated") {
    if (j.value("interpolation", std::string("idw2")) != "idw2")
      throw Error(ErrorKind::Io, "unsupported interpolation rule");
    std::vector<Point> from, to;
    for (const json& pr : j.at("pairs")) {
      from.push_back(to_point(pr.at(0)));
      to.push_back(to_point(pr.at(1)));
    }
    return std::make_shared<Tabulated>(std::move(from), std::move(to));
  }
  if (kind == "sphere_exp")
    return std::make_shared<SphereExp>(frame_from(j.at("from_frame")), frame_from(j.at("to_frame")),
                                       j.at("radius").get<double>());
  throw Error(ErrorKind::Io, "unknown transition kind " + kind);
}

}  // namespace

std::string atlas_to_json(const Atlas& a) {
  json doc;
  doc["m"] = a.m;
  doc["n"] = a.n();
  doc["mu0"] = a.mu0;
  doc["nu0"] = a.nu0;
  doc["xi0"] = a.xi0_declared;
  if (a.fixture) {
    json fx{{"kind", a.fixture->kind}, {"radius", a.fixture->radius}};
    json frames = json::array();
    for (const auto& [l, f] : a.fixture->frames) frames.push_back({{"label", l}, {"frame", frame_json(f)}});
    fx["frames"] = frames;
    doc["fixture"] = fx;
  }
  json patches = json::array();
  for (const auto& [i, p] : a.patches) {
    json pts = json::array();
    for (const auto& [l, x] : p.points) {
      json row{l};
      for (Eigen::Index d = 0; d < x.size(); ++d) row.push_back(x[d]);
      pts.push_back(row);
    }
    json rec{{"id", i}, {"eps", p.eps}, {"origin", vec(p.origin)}, {"points", pts}};
    if (std::isfinite(p.chart_radius)) rec["chart_radius"] = p.chart_radius;
    patches.push_back(rec);
  }
  doc["patches"] = patches;
  json trans = json::array();
  for (const auto& [key, t] : a.transitions) trans.push_back(transition_json(key.first, key.second, t));
  doc["transitions"] = trans;
  return doc.dump();
}

Atlas atlas_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, std::string("atlas JSON: ") + e.what());
  }
  try {
    Atlas a;
    a.m = doc.at("m").get<int>();
    a.mu0 = doc.at("mu0").get<double>();
    a.nu0 = doc.value("nu0", 0.0);
    a.xi0_declared = doc.value("xi0", 0.0);
    if (doc.contains("fixture")) {
      const json& fx = doc["fixture"];
      FixtureInfo info{fx.at("kind").get<std::string>(), fx.value("radius", 1.0), {}};
      for (const json& f : fx.value("frames", json::array()))
        info.frames[f.at("label").get<Label>()] = frame_from(f.at("frame"));
      a.fixture = std::move(info);
    }
    for (const json& rec : doc.at("patches")) {
      Patch p;
      p.id = rec.at("id").get<Label>();
      p.eps = rec.at("eps").get<double>();
      if (rec.contains("chart_radius")) p.chart_radius = rec["chart_radius"].get<double>();
      for (const json& row : rec.at("points")) {
        if (row.size() != static_cast<std::size_t>(a.m) + 1)
          throw Error(ErrorKind::Io, "point record has the wrong arity");
        Point x(a.m);
        for (int d = 0; d < a.m; ++d) x[d] = row[d + 1].get<double>();
        p.points[row[0].get<Label>()] = x;
      }
      p.origin = rec.contains("origin") ? to_point(rec["origin"]) : p.at(p.id);
      a.patches.emplace(p.id, std::move(p));
    }
    for (const json& rec : doc.at("transitions")) {
      Transition t;
      t.fn = transition_from(rec);
      for (const json& b : rec.value("domain", json::array()))
        t.domain.push_back({to_point(b.at("center")), b.at("radius").get<double>()});
      a.transitions[{rec.at("i").get<Label>(), rec.at("j").get<Label>()}] = std::move(t);
    }
    if (doc.contains("n") && doc["n"].get<int>() != a.n())
      throw Error(ErrorKind::Io, "header n disagrees with the patch count");
    return a;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, std::string("atlas JSON: ") + e.what());
  }
}

void write_atlas(const Atlas& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << atlas_to_json(a) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

Atlas read_atlas(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return atlas_from_json(ss.str());
}

}  // namespace manidel
