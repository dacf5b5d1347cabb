#include "manidel/complex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace manidel {

std::vector<Label> AbstractComplex::vertices() const {
  std::vector<Label> out;
  for (const SimplexKey& s : simplices)
    if (s.size() == 1) out.push_back(s[0]);
  return out;
}

SimplexSet AbstractComplex::of_dim(int k) const { return simplices_of_dim(simplices, k); }

long AbstractComplex::euler_characteristic() const {
  long chi = 0;
  for (const SimplexKey& s : simplices) chi += (s.size() % 2 == 1) ? 1 : -1;
  return chi;
}

StarMap build_stars(const Atlas& a, const DelaunayOptions& opts) {
  StarMap out;
  for (const auto& [i, p] : a.patches) out[i] = star(p, i, p.region_of_interest(), opts);
  return out;
}

namespace {

std::vector<SimplexKey> top_containing(const SimplexSet& s, Label j, int m) {
  std::vector<SimplexKey> out;
  for (const SimplexKey& k : s)
    if (static_cast<int>(k.size()) == m + 1 && std::binary_search(k.begin(), k.end(), j)) out.push_back(k);
  return out;
}

SimplexSet star_of(const SimplexSet& simplices, Label v, int m) {
  SimplexSet top;
  for (const SimplexKey& k : simplices)
    if (static_cast<int>(k.size()) == m + 1 && std::binary_search(k.begin(), k.end(), v)) top.insert(k);
  SimplexSet out = close_under_faces(top);
  out.insert({v});
  return out;
}

}  // namespace

ConsistencyReport check_star_consistency(const StarMap& stars, int m) {
  ConsistencyReport rep;
  std::set<std::pair<Label, Label>> seen;
  static const SimplexSet kEmpty;
  for (const auto& [i, st] : stars) {
    for (const SimplexKey& e : st) {
      if (e.size() != 2) continue;
      const Label j = e[0] == i ? e[1] : e[0];
      if (!seen.insert({std::min(i, j), std::max(i, j)}).second) continue;
      ++rep.pairs_checked;
      const auto it = stars.find(j);
      const SimplexSet& sj = it == stars.end() ? kEmpty : it->second;
      const std::vector<SimplexKey> a = top_containing(st, j, m);
      const std::vector<SimplexKey> b = top_containing(sj, i, m);
      if (a == b) continue;
      StarMismatch mm{i, j, {}, {}};
      std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(mm.only_in_i));
      std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(mm.only_in_j));
      rep.mismatches.push_back(std::move(mm));
    }
  }
  return rep;
}

AbstractComplex complex_from_simplices(int m, const SimplexSet& simplices) {
  AbstractComplex c;
  c.m = m;
  c.simplices = close_under_faces(simplices);
  for (Label v : c.vertices()) c.stars[v] = star_of(c.simplices, v, m);
  return c;
}

AbstractComplex assemble(const StarMap& stars, int m) {
  const ConsistencyReport rep = check_star_consistency(stars, m);
  if (!rep.ok()) {
    std::ostringstream msg;
    msg << rep.mismatches.size() << " inconsistent star pairs, first (" << rep.mismatches[0].i << ", "
        << rep.mismatches[0].j << ")";
    throw Error(ErrorKind::InconsistentStars, msg.str());
  }
  SimplexSet all;
  for (const auto& [i, st] : stars) all.insert(st.begin(), st.end());
  AbstractComplex c = complex_from_simplices(m, all);
  for (const SimplexKey& s : c.of_dim(m))
    for (Label v : s) {
      const auto it = stars.find(v);
      if (it == stars.end() || !it->second.count(s)) {
        std::ostringstream msg;
        msg << "simplex missing from the star of its vertex " << v;
        throw Error(ErrorKind::InconsistentStars, msg.str());
      }
    }
  return c;
}

namespace {

// Connected components of `cells` where two cells are adjacent when they share
// a (size-1)-subset.
std::size_t components(const std::vector<SimplexKey>& cells) {
  if (cells.empty()) return 0;
  std::vector<std::size_t> parent(cells.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<SimplexKey, std::size_t> owner;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (std::size_t drop = 0; drop < cells[c].size(); ++drop) {
      SimplexKey f = cells[c];
      f.erase(f.begin() + static_cast<std::ptrdiff_t>(drop));
      auto [it, fresh] = owner.emplace(f, c);
      if (!fresh) parent[find(c)] = find(it->second);
    }
  std::size_t n = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) n += find(c) == c;
  return n;
}

std::map<SimplexKey, int> facet_degrees(const std::vector<SimplexKey>& cells) {
  std::map<SimplexKey, int> deg;
  for (const SimplexKey& c : cells)
    for (std::size_t drop = 0; drop < c.size(); ++drop) {
      SimplexKey f = c;
      f.erase(f.begin() + static_cast<std::ptrdiff_t>(drop));
      ++deg[f];
    }
  return deg;
}

bool link_ok(const std::vector<SimplexKey>& link, int m) {
  if (link.empty()) return false;
  if (m == 1) return link.size() == 2;
  const auto deg = facet_degrees(link);
  for (const auto& [f, d] : deg)
    if (d != 2) return false;
  if (components(link) != 1) return false;
  if (m == 3) {
    // Closed connected surface; sphere iff chi = 2.
    std::set<Label> verts;
    for (const SimplexKey& t : link) verts.insert(t.begin(), t.end());
    const long chi = static_cast<long>(verts.size()) - static_cast<long>(deg.size()) + static_cast<long>(link.size());
    if (chi != 2) return false;
  }
  return true;
}

}  // namespace

ManifoldReport manifold_check(const AbstractComplex& c) {
  ManifoldReport rep;
  const int m = c.m;
  rep.euler_characteristic = c.euler_characteristic();
  rep.partial = m > 3;
  const SimplexSet top = c.of_dim(m);
  const SimplexSet covered = close_under_faces(top);
  rep.is_pure = !c.simplices.empty() && std::all_of(c.simplices.begin(), c.simplices.end(),
                                                    [&](const SimplexKey& s) { return covered.count(s) > 0; });

  std::map<SimplexKey, int> ridge;
  for (const SimplexKey& r : c.of_dim(m - 1)) ridge[r] = 0;
  for (const auto& [f, d] : facet_degrees({top.begin(), top.end()})) ridge[f] = d;
  for (const auto& [r, d] : ridge)
    if (d != 2) rep.bad_ridges.push_back(r);
  rep.ridge_degrees_ok = !top.empty() && rep.bad_ridges.empty();

  std::map<Label, std::vector<SimplexKey>> links;
  for (Label v : c.vertices()) links[v];
  for (const SimplexKey& s : top)
    for (Label v : s) {
      SimplexKey l;
      for (Label w : s)
        if (w != v) l.push_back(w);
      links[v].push_back(std::move(l));
    }
  for (const auto& [v, l] : links)
    if (!link_ok(l, m)) rep.bad_links.push_back(v);
  rep.links_ok = !links.empty() && rep.bad_links.empty();
  return rep;
}

double PLMetric::length(Label i, Label j) const {
  const auto it = edge_lengths.find({std::min(i, j), std::max(i, j)});
  if (it == edge_lengths.end()) throw Error(ErrorKind::UnknownLabel, "no length for the requested edge");
  return it->second;
}

void check_realizable(const AbstractComplex& c, PLMetric& metric, const Tolerances& tol) {
  std::vector<SimplexKey> bad;
  metric.min_gram_eigenvalue.clear();
  for (const SimplexKey& s : c.simplices) {
    if (s.size() < 2) continue;
    const int k = static_cast<int>(s.size()) - 1;
    EdgeLengths e(k);
    double longest = 0.0;
    for (int a = 0; a <= k; ++a)
      for (int b = a + 1; b <= k; ++b) {
        const double l = metric.length(s[a], s[b]);
        e.set(a, b, l);
        longest = std::max(longest, l);
      }
    const GramResult g = gram_from_edge_lengths(e, tol);
    metric.min_gram_eigenvalue[s] = g.min_eigenvalue / (longest * longest);
    if (!g.positive_definite) bad.push_back(s);
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << bad.size() << " simplices with indefinite Gram matrix:";
    for (std::size_t t = 0; t < std::min<std::size_t>(bad.size(), 8); ++t) {
      msg << " {";
      for (std::size_t v = 0; v < bad[t].size(); ++v) msg << (v ? "," : "") << bad[t][v];
      msg << "}";
    }
    throw Error(ErrorKind::NotRealizable, msg.str());
  }
}

PLMetric assign_pl_metric(const Atlas& a, const AbstractComplex& c, const Tolerances& tol) {
  PLMetric metric;
  auto chart_distance = [&](Label chart, Label x, Label y) -> std::optional<double> {
    const auto it = a.patches.find(chart);
    if (it == a.patches.end() || !it->second.contains(x) || !it->second.contains(y)) return std::nullopt;
    return (it->second.at(x) - it->second.at(y)).norm();
  };
  for (const SimplexKey& e : c.of_dim(1)) {
    const Label i = e[0], j = e[1];
    const auto di = chart_distance(i, i, j);
    const auto dj = chart_distance(j, i, j);
    double l = 0.0;
    if (di && dj) {
      l = 0.5 * (*di + *dj);
    } else if (di || dj) {
      l = di ? *di : *dj;
      metric.fallback_edges.emplace_back(i, j);
    } else {
      throw Error(ErrorKind::NotRealizable, "edge visible in neither endpoint chart");
    }
    metric.edge_lengths[{i, j}] = l;
  }
  check_realizable(c, metric, tol);
  return metric;
}

GeodesicCheck sphere_geodesic_check(const Atlas& a, const PLMetric& metric) {
  if (!a.fixture || a.fixture->kind != "sphere")
    throw Error(ErrorKind::InvalidInput, "geodesic check needs a sphere fixture atlas");
  const double radius = a.fixture->radius;
  double eps = 0.0;
  for (const auto& [i, p] : a.patches) eps = std::max(eps, p.eps);
  GeodesicCheck g;
  g.bound = 6.0 * std::pow(6.0 * eps / radius, 2);
  for (const auto& [e, l] : metric.edge_lengths) {
    const Eigen::VectorXd x = a.embed(e.first), y = a.embed(e.second);
    const double c = std::clamp(x.dot(y) / (radius * radius), -1.0, 1.0);
    const double gc = radius * std::acos(c);
    g.max_relative_error = std::max(g.max_relative_error, std::abs(l - gc) / l);
    ++g.edges;
  }
  return g;
}

OracleDiff oracle_compare(const AbstractComplex& c, const AbstractComplex& oracle) {
  if (c.vertices() != oracle.vertices())
    throw Error(ErrorKind::InvalidInput, "oracle and complex have different vertex sets");
  OracleDiff d;
  const SimplexSet a = c.of_dim(c.m), b = oracle.of_dim(oracle.m);
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(d.only_in_complex));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(d.only_in_oracle));
  return d;
}

ProtectionSweep protection_sweep(const Atlas& a, const StarMap& stars, const AlgorithmParams& params) {
  ProtectionSweep sweep;
  for (const auto& [i, st] : stars) {
    const Patch& p = a.patch(i);
    const double delta = params.delta(p.eps);
    for (const SimplexKey& s : st) {
      if (static_cast<int>(s.size()) != a.m + 1) continue;
      ++sweep.checked;
      ProtectionFailure f;
      f.patch = i;
      f.simplex = s;
      const Simplex sx = p.simplex(s);
      f.margin = protection_margin(p, s, a.tol);
      f.protected_ok = f.margin - a.tol.ball * p.eps > delta;
      f.good_ok = is_gamma_good(sx, params.gamma0, a.tol);
      f.thickness = thickness(sx, a.tol);
      sweep.min_margin_over_delta = std::min(sweep.min_margin_over_delta, f.margin / delta);
      if (!f.protected_ok || !f.good_ok) sweep.failures.push_back(std::move(f));
    }
  }
  return sweep;
}

}  // namespace manidel
