#include "weyl.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "errors.hpp"

namespace iso {

std::string Gen::str() const {
  std::ostringstream os;
  os << "X[" << tail << "->" << head << "](" << row << "," << col << ")";
  return os.str();
}

Scalar WeylElement::constant_part() const {
  auto it = terms_.find(Word{});
  return it == terms_.end() ? Scalar(0) : it->second;
}

void WeylElement::add_normal(Word w, Scalar c) {
  if (c.is_zero()) return;
  auto [it, fresh] = terms_.try_emplace(std::move(w), c);
  if (!fresh) {
    it->second = it->second + c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

static const SymplecticData* pick_sym(const WeylElement& a, const WeylElement& b) {
  return a.sym() ? a.sym() : b.sym();
}

WeylElement operator+(const WeylElement& a, const WeylElement& b) {
  WeylElement out = a;
  out.set_sym(pick_sym(a, b));
  for (auto& [w, c] : b.terms()) out.add_normal(w, c);
  return out;
}

WeylElement operator-(const WeylElement& a, const WeylElement& b) {
  WeylElement out = a;
  out.set_sym(pick_sym(a, b));
  for (auto& [w, c] : b.terms()) out.add_normal(w, -c);
  return out;
}

WeylElement WeylElement::operator-() const {
  WeylElement out;
  out.sym_ = sym_;
  for (auto& [w, c] : terms_) out.terms_.emplace(w, -c);
  return out;
}

WeylElement WeylElement::scaled(const Scalar& c) const {
  WeylElement out;
  out.sym_ = sym_;
  if (c.is_zero()) return out;
  for (auto& [w, k] : terms_) out.terms_.emplace(w, k * c);
  return out;
}

WeylElement WeylElement::derivative(SymbolId s) const {
  WeylElement out;
  out.sym_ = sym_;
  for (auto& [w, c] : terms_) out.add_normal(w, scalar_partial(c, s));
  return out;
}

std::string WeylElement::str() const {
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

// rewrite a word into normal order, accumulating into out: one adjacent
// inversion at a time, ab = ba + [a,b]
static void normalize_into(WeylElement& out, const SymplecticData* s, Word w, Scalar c) {
  std::vector<std::pair<Word, Scalar>> work;
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
    const Gen& a = word[i];
    const Gen& b = word[i + 1];
    if (b.arrow() == a.arrow().reversed() && a.row == b.col && a.col == b.row) {
      if (!s) throw Error("word contraction without symplectic data");
      Word shorter;
      shorter.reserve(word.size() - 2);
      shorter.insert(shorter.end(), word.begin(), word.begin() + i);
      shorter.insert(shorter.end(), word.begin() + i + 2, word.end());
      work.emplace_back(std::move(shorter), coeff * s->constant(a.arrow()));
    }
    std::swap(word[i], word[i + 1]);
    work.emplace_back(std::move(word), std::move(coeff));
  }
}

WeylElement weyl_mul(const WeylElement& x, const WeylElement& y) {
  WeylElement out;
  const SymplecticData* s = pick_sym(x, y);
  out.set_sym(s);
  for (auto& [w1, c1] : x.terms())
    for (auto& [w2, c2] : y.terms()) {
      Word w;
      w.reserve(w1.size() + w2.size());
      w.insert(w.end(), w1.begin(), w1.end());
      w.insert(w.end(), w2.begin(), w2.end());
      normalize_into(out, s, std::move(w), c1 * c2);
    }
  return out;
}

WeylElement weyl_commutator(const WeylElement& x, const WeylElement& y) {
  return weyl_mul(x, y) - weyl_mul(y, x);
}

std::size_t filtration_order(const WeylElement& x) {
  if (x.is_zero()) throw ZeroElement("filtration order of zero");
  std::size_t n = 0;
  for (auto& [w, c] : x.terms()) n = std::max(n, w.size());
  return n;
}

TracePolynomial semiclassical_limit(const WeylElement& x) {
  std::size_t n = filtration_order(x);
  TracePolynomial out;
  for (auto& [w, c] : x.terms()) {
    if (w.size() != n) continue;
    std::vector<Coord> coords;
    coords.reserve(w.size());
    for (auto& g : w) coords.push_back(g.coord());
    std::sort(coords.begin(), coords.end());
    TracePolynomial::Mono m;
    for (auto& x0 : coords) {
      if (!m.empty() && m.back().first == x0)
        ++m.back().second;
      else
        m.emplace_back(x0, 1);
    }
    out.add(m, c);
  }
  return out;
}

std::map<std::size_t, WeylElement> rees_homogenize(const WeylElement& x) {
  std::map<std::size_t, WeylElement> out;
  for (auto& [w, c] : x.terms()) {
    auto& slice = out[w.size()];
    slice.set_sym(x.sym());
    slice.add_normal(w, c);
  }
  return out;
}

WeylAlgebra::WeylAlgebra(const KPartiteGraph& g, const Reading& r, SymplecticData s)
    : g_(&g), s_(std::move(s)), part_rank_(g.num_parts()) {
  for (PartId p = 0; p < g.num_parts(); ++p) part_rank_[p] = r.rank(p);
}

Gen WeylAlgebra::gen(Arrow a, std::uint32_t row, std::uint32_t col) const {
  if (!g_->adjacent(a.tail, a.head)) throw NotAdjacent("generator on a non-edge");
  if (row > g_->dim(a.head) || col > g_->dim(a.tail) || row == 0 || col == 0)
    throw DimensionMismatch("generator index out of range");
  return Gen{part_rank_[g_->part(a.tail)], part_rank_[g_->part(a.head)],
             a.tail, a.head, row, col};
}

WeylElement WeylAlgebra::zero() const {
  WeylElement out;
  out.set_sym(&s_);
  return out;
}

WeylElement WeylAlgebra::constant(const Scalar& c) const {
  WeylElement out = zero();
  out.add_normal(Word{}, c);
  return out;
}

WeylElement WeylAlgebra::generator(Arrow a, std::uint32_t row, std::uint32_t col) const {
  WeylElement out = zero();
  out.add_normal(Word{gen(a, row, col)}, Scalar(1));
  return out;
}

WeylElement WeylAlgebra::product(const std::vector<Coord>& factors,
                                 const Scalar& coeff) const {
  WeylElement out = zero();
  Word w;
  w.reserve(factors.size());
  for (auto& f : factors) w.push_back(gen(f));
  normalize_into(out, &s_, std::move(w), coeff);
  return out;
}

WeylElement WeylAlgebra::lift(const TracePolynomial& p) const {
  WeylElement out = zero();
  for (auto& [m, c] : p.terms()) {
    Word w;
    for (auto& [x, e] : m)
      for (std::uint32_t k = 0; k < e; ++k) w.push_back(gen(x));
    std::sort(w.begin(), w.end());
    out.add_normal(std::move(w), c);
  }
  return out;
}

}  // namespace iso
