#include "scalars.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_map>

namespace iso {

namespace {

struct SymbolTable {
  std::vector<std::string> names;
  std::unordered_map<std::string, SymbolId> ids;
};

SymbolTable& table() {
  static SymbolTable t;
  return t;
}

}  // namespace

SymbolId symbol(const std::string& name) {
  auto& t = table();
  auto it = t.ids.find(name);
  if (it != t.ids.end()) return it->second;
  SymbolId id = static_cast<SymbolId>(t.names.size());
  t.names.push_back(name);
  t.ids.emplace(name, id);
  return id;
}

const std::string& symbol_name(SymbolId id) {
  return table().names.at(id);
}

std::uint64_t Monomial::degree() const {
  std::uint64_t d = 0;
  for (auto& [s, e] : exps) d += e;
  return d;
}

bool Monomial::operator<(const Monomial& o) const {
  std::uint64_t da = degree(), db = o.degree();
  if (da != db) return da < db;
  // lex with smaller symbol id more significant
  std::size_t i = 0, j = 0;
  while (i < exps.size() && j < o.exps.size()) {
    if (exps[i].first != o.exps[j].first) {
      // whichever has the smaller (more significant) variable is lex-bigger
      return exps[i].first > o.exps[j].first;
    }
    if (exps[i].second != o.exps[j].second) return exps[i].second < o.exps[j].second;
    ++i;
    ++j;
  }
  return i == exps.size() && j < o.exps.size();
}

Monomial Monomial::operator*(const Monomial& o) const {
  Monomial r;
  r.exps.reserve(exps.size() + o.exps.size());
  std::size_t i = 0, j = 0;
  while (i < exps.size() || j < o.exps.size()) {
    if (j == o.exps.size() || (i < exps.size() && exps[i].first < o.exps[j].first)) {
      r.exps.push_back(exps[i++]);
    } else if (i == exps.size() || o.exps[j].first < exps[i].first) {
      r.exps.push_back(o.exps[j++]);
    } else {
      r.exps.emplace_back(exps[i].first, exps[i].second + o.exps[j].second);
      ++i;
      ++j;
    }
  }
  return r;
}

Poly::Poly(long v) {
  if (v != 0) terms_.push_back({Monomial{}, Integer(v)});
}

Poly::Poly(const Integer& v) {
  if (v != 0) terms_.push_back({Monomial{}, v});
}

Poly Poly::var(SymbolId s) {
  Poly p;
  Monomial m;
  m.exps.emplace_back(s, 1);
  p.terms_.push_back({m, Integer(1)});
  return p;
}

bool Poly::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_[0].mono.exps.empty());
}

const Integer& Poly::constant_value() const {
  static const Integer zero(0);
  if (terms_.empty()) return zero;
  return terms_[0].coef;
}

std::uint64_t Poly::total_degree() const {
  std::uint64_t d = 0;
  for (auto& t : terms_) d = std::max(d, t.mono.degree());
  return d;
}

Poly Poly::from_sorted_terms(std::vector<Term> terms) {
  Poly p;
  p.terms_ = std::move(terms);
  return p;
}

Poly operator+(const Poly& a, const Poly& b) {
  std::vector<Poly::Term> out;
  out.reserve(a.terms_.size() + b.terms_.size());
  std::size_t i = 0, j = 0;
  while (i < a.terms_.size() || j < b.terms_.size()) {
    if (j == b.terms_.size() ||
        (i < a.terms_.size() && b.terms_[j].mono < a.terms_[i].mono)) {
      out.push_back(a.terms_[i++]);
    } else if (i == a.terms_.size() || a.terms_[i].mono < b.terms_[j].mono) {
      out.push_back(b.terms_[j++]);
    } else {
      Integer c = a.terms_[i].coef + b.terms_[j].coef;
      if (c != 0) out.push_back({a.terms_[i].mono, c});
      ++i;
      ++j;
    }
  }
  return Poly::from_sorted_terms(std::move(out));
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

Poly Poly::operator-() const {
  Poly r = *this;
  for (auto& t : r.terms_) t.coef = -t.coef;
  return r;
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly();
  std::map<Monomial, Integer> acc;
  for (auto& ta : a.terms_)
    for (auto& tb : b.terms_) {
      Monomial m = ta.mono * tb.mono;
      acc[m] += ta.coef * tb.coef;
    }
  std::vector<Poly::Term> out;
  out.reserve(acc.size());
  for (auto it = acc.rbegin(); it != acc.rend(); ++it)
    if (it->second != 0) out.push_back({it->first, it->second});
  return Poly::from_sorted_terms(std::move(out));
}

Poly Poly::pow(std::uint32_t e) const {
  Poly r(1);
  Poly base = *this;
  while (e) {
    if (e & 1) r = r * base;
    base = (e >>= 1) ? base * base : base;
  }
  return r;
}

int Poly::compare(const Poly& o) const {
  std::size_t n = std::min(terms_.size(), o.terms_.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (terms_[i].mono != o.terms_[i].mono)
      return o.terms_[i].mono < terms_[i].mono ? 1 : -1;
    int c = cmp(terms_[i].coef, o.terms_[i].coef);
    if (c != 0) return c;
  }
  if (terms_.size() != o.terms_.size())
    return terms_.size() < o.terms_.size() ? -1 : 1;
  return 0;
}

Poly Poly::derivative(SymbolId s) const {
  Poly r;
  for (auto& t : terms_) {
    for (std::size_t k = 0; k < t.mono.exps.size(); ++k) {
      if (t.mono.exps[k].first != s) continue;
      Term dt;
      dt.coef = t.coef * t.mono.exps[k].second;
      dt.mono = t.mono;
      if (dt.mono.exps[k].second == 1)
        dt.mono.exps.erase(dt.mono.exps.begin() + k);
      else
        dt.mono.exps[k].second -= 1;
      Poly one_term;
      one_term.terms_.push_back(dt);
      r = r + one_term;
    }
  }
  return r;
}

Rational Poly::eval(const std::map<SymbolId, Rational>& assignment) const {
  Rational acc(0);
  for (auto& t : terms_) {
    Rational v(t.coef);
    for (auto& [s, e] : t.mono.exps) {
      auto it = assignment.find(s);
      if (it == assignment.end())
        throw UnboundSymbol("unbound symbol " + symbol_name(s));
      Rational p(1);
      Rational base = it->second;
      for (std::uint32_t k = 0; k < e; ++k) p *= base;
      v *= p;
    }
    acc += v;
  }
  acc.canonicalize();
  return acc;
}

void Poly::collect_symbols(std::vector<SymbolId>& out) const {
  for (auto& t : terms_)
    for (auto& [s, e] : t.mono.exps) out.push_back(s);
}

const Integer& Poly::leading_coef() const {
  static const Integer zero(0);
  if (terms_.empty()) return zero;
  return terms_[0].coef;
}

std::string Poly::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& t : terms_) {
    Integer c = t.coef;
    if (first) {
      if (c < 0) {
        os << "-";
        c = -c;
      }
    } else {
      os << (c < 0 ? " - " : " + ");
      if (c < 0) c = -c;
    }
    first = false;
    bool coef_printed = false;
    if (c != 1 || t.mono.exps.empty()) {
      os << c.get_str();
      coef_printed = true;
    }
    for (std::size_t k = 0; k < t.mono.exps.size(); ++k) {
      if (coef_printed || k > 0) os << "*";
      os << symbol_name(t.mono.exps[k].first);
      if (t.mono.exps[k].second > 1) os << "^" << t.mono.exps[k].second;
    }
  }
  return os.str();
}

namespace {

// view of a poly as univariate in one main variable
using ByDegree = std::map<std::uint32_t, Poly>;

ByDegree split_by(const Poly& p, SymbolId v) {
  ByDegree out;
  for (auto& t : p.terms()) {
    std::uint32_t d = 0;
    Poly::Term rest;
    rest.coef = t.coef;
    rest.mono = t.mono;
    for (std::size_t k = 0; k < rest.mono.exps.size(); ++k) {
      if (rest.mono.exps[k].first == v) {
        d = rest.mono.exps[k].second;
        rest.mono.exps.erase(rest.mono.exps.begin() + k);
        break;
      }
    }
    std::vector<Poly::Term> one{rest};
    out[d] = out[d] + Poly::from_sorted_terms(std::move(one));
  }
  for (auto it = out.begin(); it != out.end();)
    it = it->second.is_zero() ? out.erase(it) : std::next(it);
  return out;
}

Poly join_by(const ByDegree& parts, SymbolId v) {
  Poly acc;
  for (auto& [d, coef] : parts) {
    Poly vp = d == 0 ? Poly(1) : Poly::var(v).pow(d);
    acc = acc + coef * vp;
  }
  return acc;
}

std::uint32_t degree_in(const ByDegree& p) {
  return p.empty() ? 0 : p.rbegin()->first;
}

SymbolId max_symbol(const Poly& p) {
  SymbolId m = 0;
  for (auto& t : p.terms())
    for (auto& [s, e] : t.mono.exps) m = std::max(m, s + 1);
  return m;  // returns 1 + max id, 0 if constant
}

}  // namespace

Poly Poly::divexact(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw std::logic_error("divexact by zero");
  if (a.is_zero()) return Poly();
  if (b.is_constant()) {
    const Integer& d = b.constant_value();
    std::vector<Term> out;
    out.reserve(a.terms_.size());
    for (auto& t : a.terms_) {
      Integer q, r;
      mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), t.coef.get_mpz_t(), d.get_mpz_t());
      if (r != 0) throw std::logic_error("inexact constant division");
      out.push_back({t.mono, q});
    }
    return from_sorted_terms(std::move(out));
  }
  SymbolId v = max_symbol(b) - 1;
  ByDegree A = split_by(a, v), B = split_by(b, v);
  std::uint32_t db = degree_in(B);
  const Poly& lb = B.rbegin()->second;
  Poly quotient;
  while (!A.empty()) {
    std::uint32_t da = degree_in(A);
    if (da < db) throw std::logic_error("inexact division (degree)");
    Poly qc = divexact(A.rbegin()->second, lb);
    Poly qterm = qc * (da == db ? Poly(1) : Poly::var(v).pow(da - db));
    quotient = quotient + qterm;
    Poly reduced = join_by(A, v) - qterm * b;
    A = split_by(reduced, v);
  }
  return quotient;
}

namespace {

Integer int_content(const Poly& p) {
  Integer g(0);
  for (auto& t : p.terms()) {
    Integer c;
    mpz_gcd(c.get_mpz_t(), g.get_mpz_t(), t.coef.get_mpz_t());
    g = c;
    if (g == 1) break;
  }
  return g;
}

Poly sign_normalized(const Poly& p) {
  if (!p.is_zero() && p.leading_coef() < 0) return -p;
  return p;
}

// content of p as a univariate polynomial in v (gcd of the coefficients)
Poly content_in(const ByDegree& parts) {
  Poly g;
  for (auto& [d, c] : parts) {
    g = Poly::gcd(g, c);
    if (g.is_constant() && g.constant_value() == 1) break;
  }
  return g;
}

}  // namespace

Poly Poly::gcd(const Poly& a, const Poly& b) {
  if (a.is_zero()) return sign_normalized(b);
  if (b.is_zero()) return sign_normalized(a);
  if (a.is_constant() || b.is_constant()) {
    Integer g;
    Integer ca = int_content(a), cb = int_content(b);
    mpz_gcd(g.get_mpz_t(), ca.get_mpz_t(), cb.get_mpz_t());
    return Poly(g);
  }
  {
    int c = a.compare(b);
    if (c == 0) return sign_normalized(a);
    if (a.compare(-b) == 0) return sign_normalized(a);
  }
  SymbolId v = std::max(max_symbol(a), max_symbol(b)) - 1;
  ByDegree A = split_by(a, v), B = split_by(b, v);
  Poly ca = content_in(A), cb = content_in(B);
  Poly d = gcd(ca, cb);
  Poly pa = divexact(a, ca), pb = divexact(b, cb);
  ByDegree U = split_by(pa, v), V = split_by(pb, v);
  if (degree_in(U) < degree_in(V)) {
    std::swap(pa, pb);
    std::swap(U, V);
  }
  // subresultant pseudo-remainder sequence on the primitive parts
  Poly g(1), h(1);
  while (true) {
    std::uint32_t du = degree_in(U), dv = degree_in(V);
    if (dv == 0) return sign_normalized(d);  // v-primitive parts coprime
    std::uint32_t delta = du - dv;
    // pseudo remainder prem(pa, pb) in v: reduce lv^(delta+1) * pa by pb
    Poly lv = V.rbegin()->second;
    ByDegree R = split_by(pa * lv.pow(delta + 1), v);
    while (!R.empty() && degree_in(R) >= dv) {
      std::uint32_t dr = degree_in(R);
      Poly qc = divexact(R.rbegin()->second, lv);
      Poly qterm = qc * (dr == dv ? Poly(1) : Poly::var(v).pow(dr - dv));
      R = split_by(join_by(R, v) - qterm * pb, v);
    }
    Poly rem = join_by(R, v);
    if (rem.is_zero()) {
      Poly cont = content_in(V);
      return sign_normalized(d * divexact(pb, cont));
    }
    pa = pb;
    pb = divexact(rem, g * h.pow(delta));
    U = split_by(pa, v);
    V = split_by(pb, v);
    g = U.rbegin()->second;
    if (delta > 0) h = divexact(g.pow(delta), h.pow(delta - 1));
  }
}

// ---------------------------------------------------------------------------

Scalar::Scalar(const Rational& v) {
  Rational c = v;
  c.canonicalize();
  num_ = Poly(Integer(c.get_num()));
  den_ = Poly(Integer(c.get_den()));
}

Scalar::Scalar(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw DivisionByZero();
  reduce();
}

void Scalar::reduce() {
  if (num_.is_zero()) {
    den_ = Poly(1);
    return;
  }
  Poly g = Poly::gcd(num_, den_);
  if (!(g.is_constant() && g.constant_value() == 1)) {
    num_ = Poly::divexact(num_, g);
    den_ = Poly::divexact(den_, g);
  }
  if (den_.leading_coef() < 0) {
    num_ = -num_;
    den_ = -den_;
  }
}

bool Scalar::is_one() const {
  return num_.is_constant() && num_.constant_value() == 1 && den_.is_constant() &&
         den_.constant_value() == 1;
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  return Scalar(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Scalar operator-(const Scalar& a, const Scalar& b) {
  return Scalar(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

Scalar operator*(const Scalar& a, const Scalar& b) {
  return Scalar(a.num_ * b.num_, a.den_ * b.den_);
}

Scalar operator/(const Scalar& a, const Scalar& b) {
  if (b.is_zero()) throw DivisionByZero();
  return Scalar(a.num_ * b.den_, a.den_ * b.num_);
}

Scalar Scalar::operator-() const {
  Scalar r = *this;
  r.num_ = -r.num_;
  return r;
}

Scalar Scalar::inverse() const {
  if (is_zero()) throw DivisionByZero();
  return Scalar(den_, num_);
}

bool Scalar::operator==(const Scalar& o) const {
  return num_ == o.num_ && den_ == o.den_;
}

bool Scalar::operator<(const Scalar& o) const {
  int c = num_.compare(o.num_);
  if (c != 0) return c < 0;
  return den_.compare(o.den_) < 0;
}

std::string Scalar::str() const {
  if (den_.is_constant() && den_.constant_value() == 1) return num_.str();
  std::ostringstream os;
  bool num_simple = num_.terms().size() == 1;
  if (num_simple)
    os << num_.str();
  else
    os << "(" << num_.str() << ")";
  os << "/";
  bool den_simple = den_.terms().size() == 1 &&
                    (den_.is_constant() ||
                     (den_.leading_coef() == 1 && den_.terms()[0].mono.exps.size() == 1 &&
                      den_.terms()[0].mono.exps[0].second == 1));
  if (den_simple)
    os << den_.str();
  else
    os << "(" << den_.str() << ")";
  return os.str();
}

std::vector<SymbolId> Scalar::symbols() const {
  std::vector<SymbolId> out;
  num_.collect_symbols(out);
  den_.collect_symbols(out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Scalar Scalar::subs(const std::map<SymbolId, Scalar>& repl) const {
  auto apply = [&](const Poly& p) {
    Scalar acc(0);
    for (auto& t : p.terms()) {
      Scalar v(Integer(t.coef));
      for (auto& [s, e] : t.mono.exps) {
        auto it = repl.find(s);
        Scalar base = it == repl.end() ? Scalar::sym(s) : it->second;
        for (std::uint32_t k = 0; k < e; ++k) v *= base;
      }
      acc += v;
    }
    return acc;
  };
  return apply(num_) / apply(den_);
}

// --- parser ---------------------------------------------------------------

namespace {

struct Parser {
  const std::string& s;
  std::size_t pos = 0;

  explicit Parser(const std::string& text) : s(text) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool peek(char c) {
    skip_ws();
    return pos < s.size() && s[pos] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg + " at offset " + std::to_string(pos) + " in \"" + s + "\"");
  }

  Scalar parse_expr() {
    Scalar acc = parse_term();
    while (true) {
      if (accept('+'))
        acc += parse_term();
      else if (accept('-'))
        acc -= parse_term();
      else
        return acc;
    }
  }

  Scalar parse_term() {
    Scalar acc = parse_factor();
    while (true) {
      if (accept('*'))
        acc *= parse_factor();
      else if (accept('/'))
        acc /= parse_factor();
      else
        return acc;
    }
  }

  Scalar parse_factor() {
    bool neg = false;
    while (true) {
      if (accept('-'))
        neg = !neg;
      else if (accept('+'))
        ;
      else
        break;
    }
    Scalar base = parse_atom();
    skip_ws();
    if (accept('^')) {
      skip_ws();
      std::size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (start == pos) fail("expected exponent");
      unsigned long e = std::stoul(s.substr(start, pos - start));
      Scalar acc(1);
      for (unsigned long k = 0; k < e; ++k) acc *= base;
      base = acc;
    }
    return neg ? -base : base;
  }

  Scalar parse_atom() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of input");
    char c = s[pos];
    if (c == '(') {
      ++pos;
      Scalar v = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      return Scalar(Integer(s.substr(start, pos - start)));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos;
      while (pos < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
        ++pos;
      return Scalar::sym(s.substr(start, pos - start));
    }
    fail("unexpected character");
  }
};

}  // namespace

Scalar Scalar::parse(const std::string& text) {
  Parser p(text);
  Scalar v = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return v;
}

// ---------------------------------------------------------------------------

Scalar scalar_arith(const Scalar& x, const Scalar& y, ArithOp op) {
  switch (op) {
    case ArithOp::add: return x + y;
    case ArithOp::sub: return x - y;
    case ArithOp::mul: return x * y;
    case ArithOp::div: return x / y;
  }
  throw std::logic_error("bad op");
}

Rational scalar_eval(const Scalar& x, const std::map<SymbolId, Rational>& assignment) {
  Rational d = x.den().eval(assignment);
  if (d == 0) throw PoleHit("denominator vanishes under assignment");
  Rational n = x.num().eval(assignment);
  Rational r = n / d;
  r.canonicalize();
  return r;
}

Scalar scalar_partial(const Scalar& x, SymbolId t) {
  // (n/d)' = (n' d - n d') / d^2
  Poly n = x.num(), d = x.den();
  return Scalar(n.derivative(t) * d - n * d.derivative(t), d * d);
}

}  // namespace iso
