#include "reductions.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "errors.hpp"

namespace iso {

std::string EGen::str() const {
  std::ostringstream os;
  os << "e(" << factor << "," << row << "," << col << ")";
  return os.str();
}

// ---- enveloping-algebra elements -------------------------------------------

UEnvElement UEnvElement::constant(const Scalar& c) {
  UEnvElement out;
  out.add_normal(EWord{}, c);
  return out;
}

UEnvElement UEnvElement::generator(EGen g) {
  UEnvElement out;
  out.add_normal(EWord{g}, Scalar(1));
  return out;
}

Scalar UEnvElement::constant_part() const {
  auto it = terms_.find(EWord{});
  return it == terms_.end() ? Scalar(0) : it->second;
}

void UEnvElement::add_normal(EWord w, Scalar c) {
  if (c.is_zero()) return;
  auto [it, fresh] = terms_.try_emplace(std::move(w), c);
  if (!fresh) {
    it->second = it->second + c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

UEnvElement operator+(const UEnvElement& a, const UEnvElement& b) {
  UEnvElement out = a;
  for (auto& [w, c] : b.terms()) out.add_normal(w, c);
  return out;
}

UEnvElement operator-(const UEnvElement& a, const UEnvElement& b) {
  UEnvElement out = a;
  for (auto& [w, c] : b.terms()) out.add_normal(w, -c);
  return out;
}

UEnvElement UEnvElement::operator-() const {
  UEnvElement out;
  for (auto& [w, c] : terms_) out.terms_.emplace(w, -c);
  return out;
}

UEnvElement UEnvElement::scaled(const Scalar& c) const {
  UEnvElement out;
  if (c.is_zero()) return out;
  for (auto& [w, k] : terms_) out.terms_.emplace(w, k * c);
  return out;
}

UEnvElement UEnvElement::derivative(SymbolId s) const {
  UEnvElement out;
  for (auto& [w, c] : terms_) out.add_normal(w, scalar_partial(c, s));
  return out;
}

std::string UEnvElement::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [w, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "[" << c.str() << "]";
    for (auto& g : w) os << " " << g.str();
  }
  return os.str();
}

// rewrite into normal order one adjacent inversion at a time,
// ab = ba + [a, b]
static void uenv_normalize_into(UEnvElement& out, EWord w, Scalar c) {
  std::vector<std::pair<EWord, Scalar>> work;
  work.emplace_back(std::move(w), std::move(c));
  while (!work.empty()) {
    auto [word, coeff] = std::move(work.back());
    work.pop_back();
    std::size_t i = 0;
    while (i + 1 < word.size() && !(word[i + 1] < word[i])) ++i;
    if (i + 1 >= word.size()) {
      out.add_normal(std::move(word), std::move(coeff));
      continue;
    }
    const EGen a = word[i];
    const EGen b = word[i + 1];
    if (a.factor == b.factor) {
      auto shorter = [&](EGen mid) {
        EWord s;
        s.reserve(word.size() - 1);
        s.insert(s.end(), word.begin(), word.begin() + static_cast<std::ptrdiff_t>(i));
        s.push_back(mid);
        s.insert(s.end(), word.begin() + static_cast<std::ptrdiff_t>(i) + 2, word.end());
        return s;
      };
      if (a.col == b.row)
        work.emplace_back(shorter(EGen{a.factor, a.row, b.col}), coeff);
      if (b.col == a.row)
        work.emplace_back(shorter(EGen{a.factor, b.row, a.col}), -coeff);
    }
    std::swap(word[i], word[i + 1]);
    work.emplace_back(std::move(word), std::move(coeff));
  }
}

UEnvElement uenv_mul(const UEnvElement& x, const UEnvElement& y) {
  UEnvElement out;
  for (auto& [w1, c1] : x.terms())
    for (auto& [w2, c2] : y.terms()) {
      EWord w;
      w.reserve(w1.size() + w2.size());
      w.insert(w.end(), w1.begin(), w1.end());
      w.insert(w.end(), w2.begin(), w2.end());
      uenv_normalize_into(out, std::move(w), c1 * c2);
    }
  return out;
}

UEnvElement uenv_commutator(const UEnvElement& x, const UEnvElement& y) {
  return uenv_mul(x, y) - uenv_mul(y, x);
}

std::size_t uenv_order(const UEnvElement& x) {
  if (x.is_zero()) throw ZeroElement("order of zero");
  std::size_t n = 0;
  for (auto& [w, c] : x.terms()) n = std::max(n, w.size());
  return n;
}

std::map<std::size_t, UEnvElement> uenv_grade(const UEnvElement& x) {
  std::map<std::size_t, UEnvElement> out;
  for (auto& [w, c] : x.terms()) out[w.size()].add_normal(w, c);
  return out;
}

// ---- commutative polynomials -----------------------------------------------

SymElement SymElement::constant(const Scalar& c) {
  SymElement out;
  out.add(SMono{}, c);
  return out;
}

SymElement SymElement::generator(EGen g) {
  SymElement out;
  out.add(SMono{{g, 1}}, Scalar(1));
  return out;
}

Scalar SymElement::constant_part() const {
  auto it = terms_.find(SMono{});
  return it == terms_.end() ? Scalar(0) : it->second;
}

void SymElement::add(SMono m, const Scalar& c) {
  if (c.is_zero()) return;
  auto [it, fresh] = terms_.try_emplace(std::move(m), c);
  if (!fresh) {
    it->second = it->second + c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

SymElement operator+(const SymElement& a, const SymElement& b) {
  SymElement out = a;
  for (auto& [m, c] : b.terms()) out.add(m, c);
  return out;
}

SymElement operator-(const SymElement& a, const SymElement& b) {
  SymElement out = a;
  for (auto& [m, c] : b.terms()) out.add(m, -c);
  return out;
}

static SMono smono_mul(const SMono& a, const SMono& b) {
  SMono out;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size() || (i < a.size() && a[i].first < b[j].first))
      out.push_back(a[i++]);
    else if (i >= a.size() || b[j].first < a[i].first)
      out.push_back(b[j++]);
    else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i, ++j;
    }
  }
  return out;
}

SymElement operator*(const SymElement& a, const SymElement& b) {
  SymElement out;
  for (auto& [m1, c1] : a.terms())
    for (auto& [m2, c2] : b.terms()) out.add(smono_mul(m1, m2), c1 * c2);
  return out;
}

SymElement SymElement::operator-() const {
  SymElement out;
  for (auto& [m, c] : terms_) out.terms_.emplace(m, -c);
  return out;
}

SymElement SymElement::scaled(const Scalar& c) const {
  SymElement out;
  if (c.is_zero()) return out;
  for (auto& [m, k] : terms_) out.terms_.emplace(m, k * c);
  return out;
}

SymElement SymElement::derivative(SymbolId s) const {
  SymElement out;
  for (auto& [m, c] : terms_) out.add(m, scalar_partial(c, s));
  return out;
}

std::string SymElement::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "[" << c.str() << "]";
    for (auto& [g, e] : m) {
      os << " " << g.str();
      if (e > 1) os << "^" << e;
    }
  }
  return os.str();
}

// ---- quantisation both ways ------------------------------------------------

UEnvElement pbw_quantise(const SymElement& x) {
  UEnvElement out;
  for (auto& [m, c] : x.terms()) {
    EWord letters;
    for (auto& [g, e] : m)
      for (std::uint32_t k = 0; k < e; ++k) letters.push_back(g);
    if (letters.empty()) {
      out.add_normal(EWord{}, c);
      continue;
    }
    std::vector<EWord> arrangements;
    EWord w = letters;  // sorted already
    do arrangements.push_back(w);
    while (std::next_permutation(w.begin(), w.end()));
    const Scalar share = c / Scalar(static_cast<int>(arrangements.size()));
    for (auto& arr : arrangements) uenv_normalize_into(out, arr, share);
  }
  return out;
}

SymElement semiclassical_limit(const UEnvElement& x) {
  const std::size_t n = uenv_order(x);
  SymElement out;
  for (auto& [w, c] : x.terms()) {
    if (w.size() != n) continue;
    SMono m;
    for (auto& g : w) {
      if (!m.empty() && m.back().first == g)
        ++m.back().second;
      else
        m.emplace_back(g, 1);
    }
    out.add(std::move(m), c);
  }
  return out;
}

UEnvElement casimir_omega(std::uint32_t d, std::uint32_t factor) {
  if (d == 0) throw BadDimension("casimir needs d >= 1");
  return casimir_omega_pair(factor, factor, d);
}

UEnvElement casimir_omega_pair(std::uint32_t i, std::uint32_t n, std::uint32_t d) {
  UEnvElement out;
  for (std::uint32_t j = 1; j <= d; ++j)
    for (std::uint32_t k = 1; k <= d; ++k)
      out = out + uenv_mul(UEnvElement::generator(EGen{i, j, k}),
                           UEnvElement::generator(EGen{n, k, j}));
  return out;
}

// ---- named systems ---------------------------------------------------------

static SymElement classical_cross_trace(std::uint32_t i, std::uint32_t n, std::uint32_t d) {
  SymElement out;
  for (std::uint32_t a = 1; a <= d; ++a)
    for (std::uint32_t b = 1; b <= d; ++b)
      out = out + SymElement::generator(EGen{i, a, b}) * SymElement::generator(EGen{n, b, a});
  return out;
}

NamedHamiltonians named_hamiltonians(NamedSystem sys, std::uint32_t m, std::uint32_t d) {
  if (m == 0 || d == 0) throw BadDimension("need m >= 1 and d >= 1");
  NamedHamiltonians out;
  auto t = [](const std::string& base, std::uint32_t i) {
    return Scalar::sym(base + "_" + std::to_string(i));
  };
  switch (sys) {
    case NamedSystem::schlesinger: {
      for (std::uint32_t i = 1; i <= m; ++i) out.times.push_back(t("t", i));
      for (std::uint32_t i = 1; i <= m; ++i) {
        SymElement h;
        for (std::uint32_t j = 1; j <= m; ++j) {
          if (j == i) continue;
          h = h + classical_cross_trace(i, j, d).scaled(
                      (out.times[i - 1] - out.times[j - 1]).inverse());
        }
        out.classical.push_back(std::move(h));
      }
      break;
    }
    case NamedSystem::kz: {
      for (std::uint32_t i = 1; i <= m; ++i) out.times.push_back(t("t", i));
      for (std::uint32_t i = 1; i <= m; ++i) {
        UEnvElement h;
        for (std::uint32_t j = 1; j <= m; ++j) {
          if (j == i) continue;
          h = h + casimir_omega_pair(i, j, d).scaled(
                      (out.times[i - 1] - out.times[j - 1]).inverse());
        }
        out.quantum.push_back(std::move(h));
      }
      break;
    }
    case NamedSystem::dual_schlesinger: {
      if (d < 2) throw BadDimension("need d >= 2");
      if (m != 1) throw BadDimension("one matrix factor only");
      for (std::uint32_t i = 1; i <= d; ++i) out.times.push_back(t("t", i));
      for (std::uint32_t i = 1; i <= d; ++i) {
        SymElement h;
        for (std::uint32_t j = 1; j <= d; ++j) {
          if (j == i) continue;
          h = h + (SymElement::generator(EGen{1, i, j}) * SymElement::generator(EGen{1, j, i}))
                      .scaled((out.times[i - 1] - out.times[j - 1]).inverse());
        }
        out.classical.push_back(std::move(h));
      }
      break;
    }
    case NamedSystem::dmt: {
      if (d < 2) throw BadDimension("need d >= 2");
      if (m != 1) throw BadDimension("one matrix factor only");
      for (std::uint32_t i = 1; i <= d; ++i) out.times.push_back(t("t", i));
      const Scalar half = Scalar(1) / Scalar(2);
      for (std::uint32_t j = 1; j <= d; ++j) {
        UEnvElement h;
        for (std::uint32_t k = 1; k <= d; ++k) {
          if (k == j) continue;
          UEnvElement sym2 =
              uenv_mul(UEnvElement::generator(EGen{1, j, k}), UEnvElement::generator(EGen{1, k, j})) +
              uenv_mul(UEnvElement::generator(EGen{1, k, j}), UEnvElement::generator(EGen{1, j, k}));
          h = h + sym2.scaled(half * (out.times[j - 1] - out.times[k - 1]).inverse());
        }
        out.quantum.push_back(std::move(h));
      }
      break;
    }
    case NamedSystem::jmms: {
      if (d < 2) throw BadDimension("need d >= 2");
      std::vector<Scalar> u, v;
      for (std::uint32_t i = 1; i <= m; ++i) u.push_back(t("tinf", i));
      for (std::uint32_t j = 1; j <= d; ++j) v.push_back(t("t0", j));
      out.times = u;
      out.times.insert(out.times.end(), v.begin(), v.end());
      for (std::uint32_t i = 1; i <= m; ++i) {
        SymElement h;
        for (std::uint32_t k = 1; k <= m; ++k) {
          if (k == i) continue;
          h = h + classical_cross_trace(i, k, d).scaled((u[i - 1] - u[k - 1]).inverse());
        }
        for (std::uint32_t j = 1; j <= d; ++j)
          h = h + SymElement::generator(EGen{i, j, j}).scaled(v[j - 1]);
        out.classical.push_back(std::move(h));
      }
      for (std::uint32_t j = 1; j <= d; ++j) {
        SymElement h;
        for (std::uint32_t k = 1; k <= d; ++k) {
          if (k == j) continue;
          SymElement quad;
          for (std::uint32_t i = 1; i <= m; ++i)
            for (std::uint32_t n = 1; n <= m; ++n)
              quad = quad + SymElement::generator(EGen{i, j, k}) *
                                SymElement::generator(EGen{n, k, j});
          h = h + quad.scaled((v[j - 1] - v[k - 1]).inverse());
        }
        for (std::uint32_t i = 1; i <= m; ++i)
          h = h + SymElement::generator(EGen{i, j, j}).scaled(u[i - 1]);
        out.classical.push_back(std::move(h));
      }
      break;
    }
    case NamedSystem::fmtv: {
      if (d < 2) throw BadDimension("need d >= 2");
      std::vector<Scalar> u, v;
      for (std::uint32_t i = 1; i <= m; ++i) u.push_back(t("tinf", i));
      for (std::uint32_t j = 1; j <= d; ++j) v.push_back(t("t0", j));
      out.times = u;
      out.times.insert(out.times.end(), v.begin(), v.end());
      for (std::uint32_t i = 1; i <= m; ++i) {
        UEnvElement h;
        for (std::uint32_t k = 1; k <= m; ++k) {
          if (k == i) continue;
          h = h + casimir_omega_pair(i, k, d).scaled((u[i - 1] - u[k - 1]).inverse());
        }
        for (std::uint32_t j = 1; j <= d; ++j)
          h = h + UEnvElement::generator(EGen{i, j, j}).scaled(v[j - 1]);
        out.quantum.push_back(std::move(h));
      }
      for (std::uint32_t j = 1; j <= d; ++j) {
        UEnvElement h;
        for (std::uint32_t k = 1; k <= d; ++k) {
          if (k == j) continue;
          UEnvElement quad;
          for (std::uint32_t i = 1; i <= m; ++i)
            for (std::uint32_t n = 1; n <= m; ++n)
              quad = quad + uenv_mul(UEnvElement::generator(EGen{i, j, k}),
                                     UEnvElement::generator(EGen{n, k, j}));
          h = h + quad.scaled((v[j - 1] - v[k - 1]).inverse());
        }
        for (std::uint32_t i = 1; i <= m; ++i)
          h = h + UEnvElement::generator(EGen{i, j, j}).scaled(u[i - 1]);
        out.quantum.push_back(std::move(h));
      }
      break;
    }
  }
  return out;
}

// ---- moment-map pullbacks --------------------------------------------------

namespace {

struct TwoPartShape {
  std::vector<NodeId> first, second;
  bool hub_ok = false;
  NodeId hub = 0;
  std::vector<NodeId> legs;
};

TwoPartShape two_part_shape(const KPartiteGraph& g) {
  if (g.num_parts() != 2) throw DimensionMismatch("moment maps need a two-part graph");
  TwoPartShape s;
  s.first = g.nodes_in_part(0);
  s.second = g.nodes_in_part(1);
  if (s.first.size() == 1) {
    s.hub_ok = true;
    s.hub = s.first[0];
    s.legs = s.second;
  } else if (s.second.size() == 1) {
    s.hub_ok = true;
    s.hub = s.second[0];
    s.legs = s.first;
  }
  return s;
}

// the two coordinate factors whose contraction is the image of e(factor, row, col)
std::vector<std::pair<Coord, Coord>> moment_letter(const KPartiteGraph& g,
                                                   const TwoPartShape& s, MomentSide side,
                                                   const EGen& e) {
  std::vector<std::pair<Coord, Coord>> out;
  switch (side) {
    case MomentSide::hub: {
      if (!s.hub_ok) throw DimensionMismatch("no hub node");
      if (e.factor > s.legs.size()) throw DimensionMismatch("factor beyond the legs");
      const NodeId leg = s.legs[e.factor - 1];
      if (e.row > g.dim(s.hub) || e.col > g.dim(s.hub))
        throw DimensionMismatch("index beyond the hub dimension");
      for (std::uint32_t mm = 1; mm <= g.dim(leg); ++mm)
        out.emplace_back(Coord{Arrow{leg, s.hub}, e.row, mm},
                         Coord{Arrow{s.hub, leg}, mm, e.col});
      break;
    }
    case MomentSide::per_leg: {
      if (!s.hub_ok) throw DimensionMismatch("no hub node");
      if (e.factor > s.legs.size()) throw DimensionMismatch("factor beyond the legs");
      const NodeId leg = s.legs[e.factor - 1];
      if (e.row > g.dim(leg) || e.col > g.dim(leg))
        throw DimensionMismatch("index beyond the leg dimension");
      for (std::uint32_t n = 1; n <= g.dim(s.hub); ++n)
        out.emplace_back(Coord{Arrow{s.hub, leg}, e.row, n},
                         Coord{Arrow{leg, s.hub}, n, e.col});
      break;
    }
    case MomentSide::leg_labels: {
      if (e.factor > s.first.size()) throw DimensionMismatch("factor beyond the first part");
      if (e.row > s.second.size() || e.col > s.second.size())
        throw DimensionMismatch("label beyond the second part");
      const NodeId f = s.first[e.factor - 1];
      const NodeId rj = s.second[e.row - 1];
      const NodeId ck = s.second[e.col - 1];
      if (g.dim(rj) != 1 || g.dim(ck) != 1)
        throw DimensionMismatch("label nodes must have dimension 1");
      for (std::uint32_t a = 1; a <= g.dim(f); ++a)
        out.emplace_back(Coord{Arrow{f, rj}, 1, a}, Coord{Arrow{ck, f}, a, 1});
      break;
    }
  }
  return out;
}

}  // namespace

TracePolynomial classical_moment_pullback(const SymElement& x, const KPartiteGraph& g,
                                          MomentSide side) {
  const TwoPartShape s = two_part_shape(g);
  TracePolynomial out;
  for (auto& [m, c] : x.terms()) {
    TracePolynomial term = TracePolynomial::constant(c);
    for (auto& [e, exp] : m) {
      TracePolynomial img;
      for (auto& [q, p] : moment_letter(g, s, side, e))
        img = img + TracePolynomial::coordinate(q) * TracePolynomial::coordinate(p);
      for (std::uint32_t k = 0; k < exp; ++k) term = term * img;
    }
    out = out + term;
  }
  return out;
}

WeylElement quantum_moment_pullback(const UEnvElement& x, const WeylAlgebra& alg,
                                    MomentSide side) {
  const KPartiteGraph& g = alg.graph();
  const TwoPartShape s = two_part_shape(g);
  WeylElement out = alg.zero();
  for (auto& [w, c] : x.terms()) {
    WeylElement term = alg.constant(c);
    for (auto& e : w) {
      WeylElement img = alg.zero();
      for (auto& [q, p] : moment_letter(g, s, side, e))
        img = img + alg.product({q, p}, Scalar(1));
      term = weyl_mul(term, img);
    }
    out = out + term;
  }
  return out;
}

// ---- the commuting pair of actions -----------------------------------------

HoweReport howe_commutation_check(const WeylAlgebra& alg) {
  const KPartiteGraph& g = alg.graph();
  const TwoPartShape s = two_part_shape(g);
  if (!s.hub_ok) throw DimensionMismatch("needs a hub node");
  HoweReport rep;
  for (std::uint32_t i = 1; i <= s.legs.size(); ++i)
    for (std::uint32_t j = 1; j <= g.dim(s.hub); ++j)
      for (std::uint32_t k = 1; k <= g.dim(s.hub); ++k) {
        const UEnvElement he = UEnvElement::generator(EGen{i, j, k});
        const WeylElement hub_img = quantum_moment_pullback(he, alg, MomentSide::hub);
        const TracePolynomial hub_cl =
            classical_moment_pullback(semiclassical_limit(he), g, MomentSide::hub);
        for (std::uint32_t n = 1; n <= s.legs.size(); ++n) {
          const std::uint32_t dn = g.dim(s.legs[n - 1]);
          for (std::uint32_t a = 1; a <= dn; ++a)
            for (std::uint32_t b = 1; b <= dn; ++b) {
              const UEnvElement le = UEnvElement::generator(EGen{n, a, b});
              const WeylElement leg_img =
                  quantum_moment_pullback(le, alg, MomentSide::per_leg);
              const TracePolynomial leg_cl =
                  classical_moment_pullback(semiclassical_limit(le), g, MomentSide::per_leg);
              ++rep.pairs_checked;
              if (!weyl_commutator(hub_img, leg_img).is_zero()) {
                rep.quantum_all_zero = false;
                rep.failures.push_back("[" + EGen{i, j, k}.str() + ", " +
                                       EGen{n, a, b}.str() + "] != 0");
              }
              if (!(poisson_bracket_oracle(hub_cl, leg_cl, alg.sym()) == TracePolynomial{})) {
                rep.classical_all_zero = false;
                rep.failures.push_back("{" + EGen{i, j, k}.str() + ", " +
                                       EGen{n, a, b}.str() + "} != 0");
              }
            }
        }
      }
  return rep;
}

// ---- reduction by the leg actions ------------------------------------------

namespace {

// non-decreasing words of length len over the sorted generator list
void normal_words(const std::vector<Gen>& gens, std::size_t len, std::size_t from, Word& cur,
                  std::vector<Word>& out) {
  if (cur.size() == len) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = from; i < gens.size(); ++i) {
    cur.push_back(gens[i]);
    normal_words(gens, len, i, cur, out);
    cur.pop_back();
  }
}

// echelon basis of monic rows keyed by their smallest word.  Subtracting a
// pivot row removes its pivot word and only introduces larger words, so
// peeling the current smallest word of x each step terminates.
struct Echelon {
  std::map<Word, WeylElement> rows;

  WeylElement reduce(WeylElement x) const {
    WeylElement done;
    done.set_sym(x.sym());
    while (!x.is_zero()) {
      const Word lead = x.terms().begin()->first;
      const Scalar c = x.terms().begin()->second;
      auto it = rows.find(lead);
      if (it == rows.end()) {
        done.add_normal(lead, c);
        WeylElement single;
        single.set_sym(x.sym());
        single.add_normal(lead, c);
        x = x - single;
      } else {
        x = x - it->second.scaled(c);
      }
    }
    return done;
  }

  void insert(WeylElement x) {
    x = reduce(std::move(x));
    if (x.is_zero()) return;
    const Scalar c = x.terms().begin()->second;
    rows.emplace(x.terms().begin()->first, x.scaled(c.inverse()));
  }
};

}  // namespace

QuantumCoset quantum_reduction_project(const WeylElement& x,
                                       const std::vector<UEnvElement>& ideal_generators,
                                       const WeylAlgebra& alg, const ReductionOptions& opt) {
  const KPartiteGraph& g = alg.graph();
  const TwoPartShape s = two_part_shape(g);
  if (!s.hub_ok) throw DimensionMismatch("needs a hub node");

  for (std::uint32_t n = 1; n <= s.legs.size(); ++n) {
    const std::uint32_t dn = g.dim(s.legs[n - 1]);
    for (std::uint32_t a = 1; a <= dn; ++a)
      for (std::uint32_t b = 1; b <= dn; ++b) {
        const WeylElement img = quantum_moment_pullback(UEnvElement::generator(EGen{n, a, b}),
                                                        alg, MomentSide::per_leg);
        if (!weyl_commutator(x, img).is_zero())
          throw NotInvariant("does not commute with the leg action of " +
                             EGen{n, a, b}.str());
      }
  }

  QuantumCoset out;
  out.order_cap = opt.order_cap;
  if (x.is_zero()) {
    out.representative = x;
    out.in_ideal = true;
    return out;
  }
  if (filtration_order(x) > opt.order_cap)
    throw ResourceLimit("element deeper than the order cap");

  std::vector<Gen> gens;
  for (const Arrow& a : g.all_arrows())
    for (std::uint32_t row = 1; row <= g.dim(a.head); ++row)
      for (std::uint32_t col = 1; col <= g.dim(a.tail); ++col)
        gens.push_back(alg.gen(a, row, col));
  std::sort(gens.begin(), gens.end());

  Echelon ech;
  std::size_t rows = 0;
  for (const UEnvElement& gen0 : ideal_generators) {
    if (gen0.is_zero()) continue;
    const WeylElement img = quantum_moment_pullback(gen0, alg, MomentSide::per_leg);
    if (img.is_zero()) continue;
    const std::size_t deg = filtration_order(img);
    if (deg > opt.order_cap) throw ResourceLimit("ideal generator deeper than the order cap");
    for (std::size_t len = 0; len + deg <= opt.order_cap; ++len) {
      std::vector<Word> words;
      Word cur;
      normal_words(gens, len, 0, cur, words);
      for (auto& w : words) {
        if (++rows > opt.max_rows) throw ResourceLimit("row budget exhausted");
        WeylElement left = alg.zero();
        left.add_normal(w, Scalar(1));
        ech.insert(weyl_mul(left, img));
      }
    }
  }

  out.representative = ech.reduce(x);
  out.in_ideal = out.representative.is_zero();
  return out;
}

// ---- re-anchored connections -----------------------------------------------

static WeylElement anchored_word_trace(const std::vector<Arrow>& w, const WeylAlgebra& alg) {
  return quantum_trace(AnchoredCycle(w), alg);
}

std::vector<std::pair<NodeId, WeylElement>> corrected_connection(CorrectionCase c,
                                                                 const GraphAndReading& gr,
                                                                 const WeylAlgebra& alg) {
  const KPartiteGraph& g = gr.graph;
  if (g.num_parts() != 2) throw DimensionMismatch("needs a two-part graph");
  const auto& first = g.nodes_in_part(0);
  const auto& second = g.nodes_in_part(1);
  std::vector<std::pair<NodeId, WeylElement>> out;

  if (c == CorrectionCase::dual_star) {
    if (first.size() != 1) throw DimensionMismatch("the first part must be the hub");
    const NodeId hub = first[0];
    for (NodeId i : second) {
      WeylElement h = alg.zero();
      for (NodeId j : second) {
        if (j == i) continue;
        const Scalar w = (g.time(i) - g.time(j)).inverse();
        h = h + anchored_word_trace({Arrow{i, hub}, Arrow{hub, j}, Arrow{j, hub}, Arrow{hub, i}},
                                    alg)
                    .scaled(w);
      }
      out.emplace_back(i, std::move(h));
    }
    return out;
  }

  // bipartite: every word starts at a second-part node
  for (NodeId i : first) {
    WeylElement h = alg.zero();
    for (NodeId k : first) {
      if (k == i) continue;
      const Scalar w = (g.time(i) - g.time(k)).inverse();
      for (NodeId j : second)
        for (NodeId l : second)
          h = h + anchored_word_trace(
                      {Arrow{j, k}, Arrow{k, l}, Arrow{l, i}, Arrow{i, j}}, alg)
                      .scaled(w);
    }
    for (NodeId j : second)
      h = h + anchored_word_trace({Arrow{j, i}, Arrow{i, j}}, alg).scaled(g.time(j));
    out.emplace_back(i, std::move(h));
  }
  for (NodeId j : second) {
    WeylElement h = alg.zero();
    for (NodeId k : second) {
      if (k == j) continue;
      const Scalar w = (g.time(j) - g.time(k)).inverse();
      for (NodeId i : first)
        for (NodeId l : first)
          h = h + anchored_word_trace(
                      {Arrow{j, l}, Arrow{l, k}, Arrow{k, i}, Arrow{i, j}}, alg)
                      .scaled(w);
    }
    for (NodeId i : first)
      h = h + anchored_word_trace({Arrow{j, i}, Arrow{i, j}}, alg).scaled(g.time(i));
    out.emplace_back(j, std::move(h));
  }
  return out;
}

std::vector<WeylElement> correction_difference(CorrectionCase c, const GraphAndReading& gr,
                                               const WeylAlgebra& alg) {
  std::vector<WeylElement> out;
  for (auto& [node, primed] : corrected_connection(c, gr, alg)) {
    const WeylElement plain =
        quantum_trace(quantise_imd(imd_potential(gr.graph, gr.reading, node)).total(), alg);
    out.push_back(primed - plain);
  }
  return out;
}

// ---- differential operators ------------------------------------------------

DiffOp DiffOp::constant(const Scalar& c) {
  DiffOp out;
  out.add({}, {}, c);
  return out;
}

void DiffOp::add(QMono q, QMono d, const Scalar& c) {
  if (c.is_zero()) return;
  std::sort(q.begin(), q.end());
  std::sort(d.begin(), d.end());
  Key key{std::move(q), std::move(d)};
  auto [it, fresh] = terms_.try_emplace(std::move(key), c);
  if (!fresh) {
    it->second = it->second + c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

DiffOp operator+(const DiffOp& a, const DiffOp& b) {
  DiffOp out = a;
  for (auto& [k, c] : b.terms()) out.add(k.first, k.second, c);
  return out;
}

DiffOp operator-(const DiffOp& a, const DiffOp& b) {
  DiffOp out = a;
  for (auto& [k, c] : b.terms()) out.add(k.first, k.second, -c);
  return out;
}

DiffOp DiffOp::operator-() const {
  DiffOp out;
  for (auto& [k, c] : terms_) out.terms_.emplace(k, -c);
  return out;
}

DiffOp DiffOp::scaled(const Scalar& c) const {
  DiffOp out;
  if (c.is_zero()) return out;
  for (auto& [k, s] : terms_) out.terms_.emplace(k, s * c);
  return out;
}

std::string DiffOp::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [k, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "[" << c.str() << "]";
    for (auto& a : k.first) os << " q(" << a.tail << "," << a.head << ")";
    for (auto& a : k.second) os << " d(" << a.tail << "," << a.head << ")";
  }
  return os.str();
}

namespace {

std::map<Arrow, std::uint32_t> exponents(const DiffOp::QMono& m) {
  std::map<Arrow, std::uint32_t> out;
  for (auto& a : m) ++out[a];
  return out;
}

DiffOp::QMono from_exponents(const std::map<Arrow, std::uint32_t>& e) {
  DiffOp::QMono out;
  for (auto& [a, n] : e)
    for (std::uint32_t k = 0; k < n; ++k) out.push_back(a);
  return out;
}

long binom(std::uint32_t n, std::uint32_t k) {
  long r = 1;
  for (std::uint32_t i = 0; i < k; ++i) r = r * static_cast<long>(n - i) / static_cast<long>(i + 1);
  return r;
}

long factorial(std::uint32_t n) {
  long r = 1;
  for (std::uint32_t i = 2; i <= n; ++i) r *= static_cast<long>(i);
  return r;
}

}  // namespace

DiffOp diffop_mul(const DiffOp& a, const DiffOp& b) {
  DiffOp out;
  for (auto& [ka, ca] : a.terms())
    for (auto& [kb, cb] : b.terms()) {
      // commute the derivatives of `a` past the multiplications of `b`:
      // per variable, d^m q^n = Σ_k C(m,k) C(n,k) k! q^(n-k) d^(m-k)
      const auto da = exponents(ka.second);
      const auto qb = exponents(kb.first);
      std::vector<Arrow> common;
      for (auto& [v, n] : da)
        if (qb.count(v)) common.push_back(v);
      std::vector<std::uint32_t> pick(common.size(), 0);
      for (;;) {
        Scalar coeff = ca * cb;
        auto q = qb;
        auto d = da;
        for (std::size_t t = 0; t < common.size(); ++t) {
          const Arrow v = common[t];
          const std::uint32_t k = pick[t];
          coeff = coeff * Scalar(static_cast<int>(binom(da.at(v), k) * binom(qb.at(v), k) *
                                                  factorial(k)));
          q[v] -= k;
          d[v] -= k;
        }
        for (auto it = q.begin(); it != q.end();)
          it = it->second == 0 ? q.erase(it) : std::next(it);
        for (auto it = d.begin(); it != d.end();)
          it = it->second == 0 ? d.erase(it) : std::next(it);
        DiffOp::QMono qm = from_exponents(q);
        qm.insert(qm.end(), ka.first.begin(), ka.first.end());
        DiffOp::QMono dm = from_exponents(d);
        dm.insert(dm.end(), kb.second.begin(), kb.second.end());
        out.add(std::move(qm), std::move(dm), coeff);
        std::size_t t = 0;
        while (t < common.size()) {
          const Arrow v = common[t];
          if (pick[t] < std::min(da.at(v), qb.at(v))) {
            ++pick[t];
            break;
          }
          pick[t] = 0;
          ++t;
        }
        if (t == common.size()) break;
      }
    }
  return out;
}

std::vector<Arrow> cyclic_orientation(const KPartiteGraph& g) {
  std::vector<Arrow> out;
  const NodeId last = g.num_nodes() - 1;
  for (NodeId i = 0; i < g.num_nodes(); ++i)
    for (NodeId j = i + 1; j < g.num_nodes(); ++j) {
      if (!g.adjacent(i, j)) continue;
      if (i == 0 && j == last && g.num_nodes() > 2)
        out.push_back(Arrow{j, i});
      else
        out.push_back(Arrow{i, j});
    }
  return out;
}

DiffOp weyl_to_diffop(const WeylElement& x, const std::vector<Arrow>& positions,
                      const WeylAlgebra& alg) {
  const KPartiteGraph& g = alg.graph();
  std::map<std::pair<NodeId, NodeId>, Arrow> by_edge;
  for (const Arrow& p : positions) {
    if (!g.adjacent(p.tail, p.head)) throw OrientationMismatch("position on a non-edge");
    auto key = std::minmax(p.tail, p.head);
    if (!by_edge.emplace(std::pair<NodeId, NodeId>(key.first, key.second), p).second)
      throw OrientationMismatch("edge oriented twice");
  }
  DiffOp out;
  for (auto& [w, c] : x.terms()) {
    DiffOp term = DiffOp::constant(c);
    for (auto& gen : w) {
      const Arrow a = gen.arrow();
      if (g.dim(a.tail) != 1 || g.dim(a.head) != 1)
        throw DimensionMismatch("needs dimension-1 nodes");
      auto key = std::minmax(a.tail, a.head);
      auto it = by_edge.find(std::pair<NodeId, NodeId>(key.first, key.second));
      if (it == by_edge.end()) throw OrientationMismatch("no position chosen on an edge");
      DiffOp factor;
      if (it->second == a)
        factor.add({a}, {}, Scalar(1));
      else
        factor.add({}, {it->second}, -alg.sym().constant(it->second));
      term = diffop_mul(term, factor);
    }
    out = out + term;
  }
  return out;
}

TracePolynomial diffop_apply(const DiffOp& op, const TracePolynomial& f) {
  TracePolynomial out;
  for (auto& [k, c] : op.terms()) {
    TracePolynomial g = f;
    for (auto& a : k.second) g = g.derivative(Coord{a, 1, 1});
    for (auto& a : k.first) g = g * TracePolynomial::coordinate(Coord{a, 1, 1});
    out = out + g.scaled(c);
  }
  return out;
}

}  // namespace iso
