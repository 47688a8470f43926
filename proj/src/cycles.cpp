#include "cycles.hpp"

#include <algorithm>
#include <sstream>

#include "errors.hpp"

namespace iso {

Cycle::Cycle(std::vector<Arrow> arrows) : w_(std::move(arrows)) {
  if (w_.empty()) throw Error("empty cycle");
  for (std::size_t k = 0; k < w_.size(); ++k) {
    if (w_[k].tail == w_[k].head) throw Error("cycle contains a loop arrow");
    if (w_[k].head != w_[(k + 1) % w_.size()].tail)
      throw Error("cycle arrows are not composable");
  }
  // canonical representative: lexicographically minimal rotation
  std::vector<Arrow> best = w_;
  std::vector<Arrow> rot = w_;
  for (std::size_t k = 1; k < w_.size(); ++k) {
    std::rotate(rot.begin(), rot.begin() + 1, rot.end());
    if (rot < best) best = rot;
  }
  w_ = std::move(best);
}

bool Cycle::has_antiparallel_pair() const {
  for (std::size_t p = 0; p < w_.size(); ++p)
    for (std::size_t q = p + 1; q < w_.size(); ++q)
      if (w_[p] == w_[q].reversed()) return true;
  return false;
}

std::vector<NodeId> Cycle::nodes() const {
  std::vector<NodeId> out;
  out.reserve(w_.size());
  for (auto& a : w_) out.push_back(a.tail);
  return out;
}

std::string Cycle::str() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < w_.size(); ++k) {
    if (k) os << " ";
    os << w_[k].tail << ">" << w_[k].head;
  }
  os << ")";
  return os.str();
}

CycleClass classify_cycle(const Cycle& c) {
  std::vector<NodeId> ns = c.nodes();
  std::vector<NodeId> uniq = ns;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::size_t len = c.length(), distinct = uniq.size();
  if (len == 2) return {CycleKind::two_cycle, std::nullopt, len};
  if (len == 3) return {CycleKind::three_cycle, std::nullopt, len};
  if (len == 4 && distinct == 4) return {CycleKind::nondegenerate_four, std::nullopt, len};
  if (len == 4 && distinct == 3) {
    // centre = the node visited twice
    for (NodeId n : uniq)
      if (std::count(ns.begin(), ns.end(), n) == 2)
        return {CycleKind::degenerate_four, n, len};
  }
  return {CycleKind::other, std::nullopt, len};
}

void add_term(Potential& p, const Cycle& c, const Scalar& w) {
  if (w.is_zero()) return;
  auto [it, inserted] = p.emplace(c, w);
  if (!inserted) {
    it->second += w;
    if (it->second.is_zero()) p.erase(it);
  }
}

Potential potential_sum(const Potential& a, const Potential& b) {
  Potential out = a;
  for (auto& [c, w] : b) add_term(out, c, w);
  return out;
}

Potential potential_scale(const Potential& p, const Scalar& w) {
  Potential out;
  if (w.is_zero()) return out;
  for (auto& [c, v] : p) out.emplace(c, v * w);
  return out;
}

std::string potential_str(const Potential& p) {
  if (p.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [c, w] : p) {
    if (!first) os << " + ";
    first = false;
    os << "[" << w.str() << "] " << c.str();
  }
  return os.str();
}

Potential IMDPotential::total() const {
  return potential_sum(potential_sum(w4, w3), w2);
}

IMDPotential imd_potential(const KPartiteGraph& g, const Reading& r, NodeId i) {
  if (!r.generic() && g.num_parts() != 2)
    throw UnsupportedDegenerateReading(
        "degenerate readings are supported on bipartite graphs only");
  // 1/phi equals the reading difference a_x - a_y for generic readings and
  // the bipartite sign conventions otherwise
  auto edge_factor = [&](NodeId x, NodeId y) {
    return phi_weight(g, r, x, y).inverse();
  };

  IMDPotential out;
  PartId pi = g.part(i);
  std::vector<NodeId> others;  // I minus the part of i
  for (NodeId j = 0; j < g.num_nodes(); ++j)
    if (g.part(j) != pi) others.push_back(j);

  // 2-cycles: weight t_i - t_j for generic readings, t_j for degenerate ones
  for (NodeId j : others) {
    Scalar w = r.generic() ? g.time(i) - g.time(j) : g.time(j);
    add_term(out.w2, Cycle({Arrow{i, j}, Arrow{j, i}}), w);
  }

  // 3-cycles i -> j -> l -> i over j, l outside the part of i, in distinct parts
  for (NodeId j : others)
    for (NodeId l : others) {
      if (g.part(j) == g.part(l)) continue;
      add_term(out.w3, Cycle({Arrow{i, j}, Arrow{j, l}, Arrow{l, i}}), edge_factor(j, l));
    }

  // 4-cycles i -> l -> m -> j -> i with m elsewhere in the part of i
  for (NodeId m : g.nodes_in_part(pi)) {
    if (m == i) continue;
    Scalar dt = g.time(i) - g.time(m);
    if (dt.is_zero()) throw Error("coincident times within a part");
    for (NodeId j : others)
      for (NodeId l : others) {
        Scalar w = edge_factor(i, j) * edge_factor(i, l) / dt;
        add_term(out.w4, Cycle({Arrow{i, l}, Arrow{l, m}, Arrow{m, j}, Arrow{j, i}}), w);
      }
  }
  return out;
}

Potential necklace_bracket(const Cycle& c1, const Cycle& c2, const SymplecticData& s) {
  Potential out;
  const auto& a = c1.arrows();
  const auto& b = c2.arrows();
  std::size_t n = a.size(), m = b.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (a[i] != b[j].reversed()) continue;
      // delete the pair, then splice the two remaining open paths
      std::vector<Arrow> glued;
      glued.reserve(n + m - 2);
      for (std::size_t k = 1; k < n; ++k) glued.push_back(a[(i + k) % n]);
      for (std::size_t k = 1; k < m; ++k) glued.push_back(b[(j + k) % m]);
      add_term(out, Cycle(std::move(glued)), s.constant(a[i]));
    }
  return out;
}

Potential necklace_bracket(const Potential& p1, const Potential& p2,
                           const SymplecticData& s) {
  Potential out;
  for (auto& [c1, w1] : p1)
    for (auto& [c2, w2] : p2) {
      Potential part = necklace_bracket(c1, c2, s);
      for (auto& [c, w] : part) add_term(out, c, w * w1 * w2);
    }
  return out;
}

Potential potential_time_derivative(const Potential& w, SymbolId t) {
  Potential out;
  for (auto& [c, v] : w) add_term(out, c, scalar_partial(v, t));
  return out;
}

std::string Coord::str() const {
  std::ostringstream os;
  os << "X(" << arrow.tail << ">" << arrow.head << ")[" << row << "," << col << "]";
  return os.str();
}

TracePolynomial TracePolynomial::constant(const Scalar& c) {
  TracePolynomial p;
  if (!c.is_zero()) p.terms_.emplace(Mono{}, c);
  return p;
}

TracePolynomial TracePolynomial::coordinate(const Coord& x) {
  TracePolynomial p;
  p.terms_.emplace(Mono{{x, 1}}, Scalar(1));
  return p;
}

void TracePolynomial::add(const Mono& m, const Scalar& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

TracePolynomial operator+(const TracePolynomial& a, const TracePolynomial& b) {
  TracePolynomial out = a;
  for (auto& [m, c] : b.terms_) out.add(m, c);
  return out;
}

TracePolynomial operator-(const TracePolynomial& a, const TracePolynomial& b) {
  return a + (-b);
}

TracePolynomial TracePolynomial::operator-() const {
  TracePolynomial out;
  for (auto& [m, c] : terms_) out.terms_.emplace(m, -c);
  return out;
}

TracePolynomial TracePolynomial::scaled(const Scalar& c) const {
  TracePolynomial out;
  if (c.is_zero()) return out;
  for (auto& [m, v] : terms_) out.terms_.emplace(m, v * c);
  return out;
}

namespace {

TracePolynomial::Mono mono_mul(const TracePolynomial::Mono& a,
                               const TracePolynomial::Mono& b) {
  TracePolynomial::Mono r;
  r.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      r.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      r.push_back(b[j++]);
    } else {
      r.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return r;
}

}  // namespace

TracePolynomial operator*(const TracePolynomial& a, const TracePolynomial& b) {
  TracePolynomial out;
  for (auto& [ma, ca] : a.terms_)
    for (auto& [mb, cb] : b.terms_) out.add(mono_mul(ma, mb), ca * cb);
  return out;
}

TracePolynomial TracePolynomial::derivative(const Coord& x) const {
  TracePolynomial out;
  for (auto& [m, c] : terms_) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (!(m[k].first == x)) continue;
      Mono dm = m;
      Scalar dc = c * Scalar(static_cast<long>(m[k].second));
      if (dm[k].second == 1)
        dm.erase(dm.begin() + k);
      else
        dm[k].second -= 1;
      out.add(dm, dc);
      break;
    }
  }
  return out;
}

std::set<Coord> TracePolynomial::support() const {
  std::set<Coord> out;
  for (auto& [m, c] : terms_)
    for (auto& [x, e] : m) out.insert(x);
  return out;
}

std::string TracePolynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "[" << c.str() << "]";
    for (auto& [x, e] : m) {
      os << " " << x.str();
      if (e > 1) os << "^" << e;
    }
  }
  return os.str();
}

TracePolynomial trace(const Cycle& c, const KPartiteGraph& g) {
  const auto& w = c.arrows();
  std::size_t m = w.size();
  std::vector<std::uint32_t> dims(m);
  for (std::size_t k = 0; k < m; ++k) dims[k] = g.dim(w[k].tail);

  TracePolynomial out;
  std::vector<std::uint32_t> idx(m, 1);  // index at junction k lives on tail(w[k])
  while (true) {
    TracePolynomial::Mono mono;
    mono.reserve(m);
    std::vector<Coord> coords;
    coords.reserve(m);
    for (std::size_t k = 0; k < m; ++k)
      coords.push_back(Coord{w[k], idx[(k + 1) % m], idx[k]});
    std::sort(coords.begin(), coords.end());
    for (auto& x : coords) {
      if (!mono.empty() && mono.back().first == x)
        mono.back().second += 1;
      else
        mono.emplace_back(x, 1);
    }
    out.add(mono, Scalar(1));
    std::size_t k = 0;
    for (; k < m; ++k) {
      if (idx[k] < dims[k]) {
        ++idx[k];
        break;
      }
      idx[k] = 1;
    }
    if (k == m) break;
  }
  return out;
}

TracePolynomial trace(const Potential& p, const KPartiteGraph& g) {
  TracePolynomial out;
  for (auto& [c, v] : p) out = out + trace(c, g).scaled(v);
  return out;
}

TracePolynomial poisson_bracket_oracle(const TracePolynomial& f, const TracePolynomial& g,
                                       const SymplecticData& s) {
  TracePolynomial out;
  std::set<Coord> gs = g.support();
  for (const Coord& x : f.support()) {
    Coord partner{x.arrow.reversed(), x.col, x.row};
    if (!gs.count(partner)) continue;
    // {X^a_{kl}, X^{a*}_{lk}} = c(a)
    TracePolynomial contrib = f.derivative(x) * g.derivative(partner);
    out = out + contrib.scaled(s.constant(x.arrow));
  }
  return out;
}

// ---- intersection census ---------------------------------------------------

std::string IntersectionKey::str() const {
  auto kind_name = [](CycleKind k) {
    switch (k) {
      case CycleKind::two_cycle: return "2";
      case CycleKind::three_cycle: return "3";
      case CycleKind::degenerate_four: return "deg4";
      case CycleKind::nondegenerate_four: return "nondeg4";
      default: return "other";
    }
  };
  std::ostringstream os;
  os << "(" << kind_name(k1) << "," << kind_name(k2) << ",edges=" << shared_edges;
  if (k1 == CycleKind::degenerate_four && k2 == CycleKind::degenerate_four)
    os << (centers_equal ? ",same-centre" : ",diff-centre");
  os << ")";
  return os.str();
}

std::optional<IntersectionKey> intersection_key(const Cycle& c1, const Cycle& c2) {
  std::set<std::pair<NodeId, NodeId>> edges;
  for (const Arrow& a : c1.arrows())
    for (const Arrow& b : c2.arrows())
      if (a == b.reversed())
        edges.insert({std::min(a.tail, a.head), std::max(a.tail, a.head)});
  if (edges.empty()) return std::nullopt;
  CycleClass t1 = classify_cycle(c1), t2 = classify_cycle(c2);
  IntersectionKey key;
  key.k1 = std::min(t1.kind, t2.kind);
  key.k2 = std::max(t1.kind, t2.kind);
  key.shared_edges = static_cast<std::uint32_t>(edges.size());
  key.centers_equal = t1.kind == CycleKind::degenerate_four &&
                      t2.kind == CycleKind::degenerate_four && t1.center == t2.center;
  return key;
}

std::vector<Cycle> imd_cycles(const KPartiteGraph& g, const Reading& r) {
  std::set<Cycle> seen;
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    IMDPotential w = imd_potential(g, r, i);
    for (const Potential* p : {&w.w4, &w.w3, &w.w2})
      for (auto& [c, v] : *p) seen.insert(c);
  }
  return std::vector<Cycle>(seen.begin(), seen.end());
}

CensusReport intersection_census(const KPartiteGraph& g, const Reading& r,
                                 const SymplecticData& s) {
  std::vector<Cycle> cycles = imd_cycles(g, r);
  std::map<IntersectionKey, CensusClassInfo> classes;
  for (std::size_t u = 0; u < cycles.size(); ++u)
    for (std::size_t v = u + 1; v < cycles.size(); ++v) {
      const Cycle& c1 = cycles[u];
      const Cycle& c2 = cycles[v];
      std::optional<IntersectionKey> maybe = intersection_key(c1, c2);
      if (!maybe) continue;  // trivial intersection
      const IntersectionKey& key = *maybe;

      Potential br = necklace_bracket(c1, c2, s);
      bool nonzero = !br.empty();
      bool ap_free = nonzero;
      for (auto& [c, w] : br)
        if (c.has_antiparallel_pair()) ap_free = false;

      auto [it, inserted] = classes.emplace(key, CensusClassInfo{key, 0, nonzero, ap_free});
      if (!inserted) {
        // zero-ness and freeness must be uniform within a class
        if (it->second.bracket_nonzero != nonzero ||
            it->second.result_antiparallel_free != ap_free)
          throw Error("inconsistent intersection class " + key.str());
      }
      it->second.pair_count += 1;
    }

  CensusReport report;
  for (auto& [key, info] : classes) {
    report.classes.push_back(info);
    report.class_count += 1;
    if (info.bracket_nonzero) report.nonzero_count += 1;
    if (info.result_antiparallel_free) report.antiparallel_free_count += 1;
  }
  return report;
}

}  // namespace iso
