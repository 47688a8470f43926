#include "flatness.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace iso {

namespace {

std::optional<SymbolId> time_symbol(const KPartiteGraph& g, NodeId i) {
  std::vector<SymbolId> syms = g.time(i).symbols();
  if (syms.size() == 1) return syms[0];
  return std::nullopt;  // frozen to a constant
}

void add_breakdown(PairCheck& pc, const Potential& wi, const Potential& wj) {
  for (const auto& [c1, a] : wi)
    for (const auto& [c2, b] : wj) {
      if (c1 == c2) continue;  // a cycle brackets to zero against itself
      if (auto key = intersection_key(c1, c2)) pc.intersections[*key] += 1;
    }
}

FlatnessReport classical_battery(const KPartiteGraph& g, const SymplecticData& s,
                                 const std::vector<std::pair<NodeId, Potential>>& items) {
  FlatnessReport rep;
  std::vector<TracePolynomial> traces(items.size());
  for (std::size_t u = 0; u < items.size(); ++u) traces[u] = trace(items[u].second, g);
  for (std::size_t u = 0; u < items.size(); ++u)
    for (std::size_t v = u + 1; v < items.size(); ++v) {
      const auto& [i, wi] = items[u];
      const auto& [j, wj] = items[v];
      PairCheck pc;
      pc.i = i;
      pc.j = j;

      Potential curl;  // d/dt_i of W_j minus d/dt_j of W_i
      if (auto ti = time_symbol(g, i)) curl = potential_time_derivative(wj, *ti);
      if (auto tj = time_symbol(g, j))
        curl = potential_sum(curl,
                             potential_scale(potential_time_derivative(wi, *tj), Scalar(-1)));
      TracePolynomial curl_tr = trace(curl, g);
      pc.curl_ok = curl_tr.is_zero();
      if (!pc.curl_ok) pc.curl_residue = curl_tr.str();

      TracePolynomial pb = poisson_bracket_oracle(traces[u], traces[v], s);
      pc.commute_ok = pb.is_zero();
      if (!pc.commute_ok) pc.commutator_residue = pb.str();

      add_breakdown(pc, wi, wj);
      rep.flat = rep.flat && pc.ok();
      rep.pairs.push_back(std::move(pc));
    }
  return rep;
}

WeylElement rebind(const WeylElement& x, const SymplecticData* sym) {
  WeylElement out;
  out.set_sym(sym);
  for (const auto& [w, c] : x.terms()) out.add_normal(w, c);
  return out;
}

WeylElement subs_coeffs(const WeylElement& x, const std::map<SymbolId, Scalar>& repl,
                        const SymplecticData* sym) {
  WeylElement out;
  out.set_sym(sym);
  for (const auto& [w, c] : x.terms()) out.add_normal(w, c.subs(repl));
  return out;
}

// one commutator decided by evaluating every symbol at a fresh point;
// a nonzero sampled residue certifies failure, zero is a probabilistic pass
void sampled_commutator(const KPartiteGraph& g, const SymplecticData& s,
                        const WeylElement& hi, const WeylElement& hj,
                        const FlatnessOptions& opt, PairCheck& pc) {
  std::set<SymbolId> syms;
  auto collect = [&syms](const Scalar& c) {
    for (SymbolId id : c.symbols()) syms.insert(id);
  };
  for (const auto& [w, c] : hi.terms()) collect(c);
  for (const auto& [w, c] : hj.terms()) collect(c);
  for (NodeId a = 0; a < g.num_nodes(); ++a)
    for (NodeId b = a + 1; b < g.num_nodes(); ++b)
      if (g.adjacent(a, b)) collect(s.constant(s.positive(a, b)));

  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<long> draw(1000, 1000000000L);
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::set<long> used;
    std::map<SymbolId, Scalar> repl;
    for (SymbolId id : syms) {
      long v = draw(rng);
      while (!used.insert(v).second) v = draw(rng);
      repl.emplace(id, Scalar(Rational(v)));
    }
    try {
      SymplecticData sub;
      for (NodeId a = 0; a < g.num_nodes(); ++a)
        for (NodeId b = a + 1; b < g.num_nodes(); ++b)
          if (g.adjacent(a, b)) {
            const Arrow& pos = s.positive(a, b);
            sub.add(pos, s.constant(pos).subs(repl));
          }
      WeylElement res =
          weyl_commutator(subs_coeffs(hi, repl, &sub), subs_coeffs(hj, repl, &sub));
      pc.exact = false;
      pc.commute_ok = res.is_zero();
      if (!pc.commute_ok) pc.commutator_residue = res.str();
      return;
    } catch (const DivisionByZero&) {
    } catch (const PoleHit&) {
    }
  }
  throw ResourceLimit("could not find a pole-free sample point in 16 attempts");
}

FlatnessReport quantum_battery(const KPartiteGraph& g, const SymplecticData& s,
                               const std::vector<std::pair<NodeId, WeylElement>>& items,
                               const std::vector<Potential>* shadows,
                               const FlatnessOptions& opt) {
  FlatnessReport rep;
  const SymplecticData local = s;
  std::vector<WeylElement> hams(items.size());
  for (std::size_t u = 0; u < items.size(); ++u) hams[u] = rebind(items[u].second, &local);

  for (std::size_t u = 0; u < items.size(); ++u)
    for (std::size_t v = u + 1; v < items.size(); ++v) {
      const NodeId i = items[u].first;
      const NodeId j = items[v].first;
      PairCheck pc;
      pc.i = i;
      pc.j = j;

      WeylElement curl;  // d/dt_j of H_i minus d/dt_i of H_j
      if (auto tj = time_symbol(g, j)) curl = hams[u].derivative(*tj);
      if (auto ti = time_symbol(g, i)) curl = curl - hams[v].derivative(*ti);
      pc.curl_ok = curl.is_zero();
      if (!pc.curl_ok) pc.curl_residue = curl.str();

      const std::size_t cost = hams[u].terms().size() * hams[v].terms().size();
      if (cost <= opt.max_terms) {
        WeylElement res = weyl_commutator(hams[u], hams[v]);
        pc.commute_ok = res.is_zero();
        if (!pc.commute_ok) pc.commutator_residue = res.str();
      } else if (!opt.allow_fallback) {
        throw ResourceLimit(
            "commutator of pair (" + std::to_string(i) + "," + std::to_string(j) +
            ") expands over " + std::to_string(cost) + " term pairs with budget " +
            std::to_string(opt.max_terms) +
            "; enable the fallback to sample times and readings at random rationals");
      } else {
        sampled_commutator(g, local, hams[u], hams[v], opt, pc);
      }

      if (shadows) add_breakdown(pc, (*shadows)[u], (*shadows)[v]);
      rep.flat = rep.flat && pc.ok();
      rep.all_exact = rep.all_exact && pc.exact;
      rep.pairs.push_back(std::move(pc));
    }
  return rep;
}

}  // namespace

std::string FlatnessReport::str() const {
  std::ostringstream os;
  for (const PairCheck& pc : pairs) {
    os << "pair (" << pc.i << "," << pc.j << "): curl "
       << (pc.curl_ok ? "ok" : "residue " + pc.curl_residue) << ", commutator "
       << (pc.commute_ok ? "ok" : "residue " + pc.commutator_residue)
       << (pc.exact ? "" : " [sampled]");
    if (!pc.intersections.empty()) {
      os << "; intersections:";
      for (const auto& [key, count] : pc.intersections) os << " " << key.str() << " x" << count;
    }
    os << "\n";
  }
  os << "summary: " << (flat ? "flat" : "NOT flat") << " (" << pairs.size() << " pairs"
     << (all_exact ? ", all exact" : ", sampled") << ")";
  return os.str();
}

FlatnessReport check_classical_flatness(const KPartiteGraph& g, const Reading& r,
                                        const SymplecticData& s) {
  return check_connection(g, r, s, std::vector<std::pair<NodeId, Potential>>{});
}

FlatnessReport check_quantum_flatness(const KPartiteGraph& g, const Reading& r,
                                      const SymplecticData& s, const FlatnessOptions& opt) {
  return check_connection(g, r, s, std::vector<std::pair<NodeId, WeylElement>>{}, opt);
}

// a node enters the battery when its time is a live flow parameter (the
// connection has no component along a frozen time) or when the caller
// supplies a Hamiltonian for it explicitly
template <class H>
std::map<NodeId, std::optional<H>> battery_slots(const KPartiteGraph& g,
                                                 const std::vector<std::pair<NodeId, H>>& ov) {
  std::map<NodeId, std::optional<H>> slots;
  for (NodeId i = 0; i < g.num_nodes(); ++i)
    if (time_symbol(g, i)) slots.emplace(i, std::nullopt);
  for (const auto& [n, h] : ov) {
    if (n >= g.num_nodes())
      throw Error("override for node " + std::to_string(n) + " outside the graph");
    slots[n] = h;
  }
  return slots;
}

FlatnessReport check_connection(const KPartiteGraph& g, const Reading& r,
                                const SymplecticData& s,
                                const std::vector<std::pair<NodeId, WeylElement>>& overrides,
                                const FlatnessOptions& opt) {
  WeylAlgebra alg(g, r, s);
  std::vector<std::pair<NodeId, WeylElement>> items;
  std::vector<Potential> shadows;
  for (auto& [i, slot] : battery_slots(g, overrides)) {
    if (slot) {
      items.emplace_back(i, *slot);
      shadows.emplace_back();  // no classical shadow for a hand-built operator
    } else {
      IMDPotential w = imd_potential(g, r, i);
      items.emplace_back(i, quantum_trace(quantise_imd(w).total(), alg));
      shadows.push_back(w.total());
    }
  }
  return quantum_battery(g, s, items, &shadows, opt);
}

FlatnessReport check_connection(const KPartiteGraph& g, const Reading& r,
                                const SymplecticData& s,
                                const std::vector<std::pair<NodeId, Potential>>& overrides) {
  std::vector<std::pair<NodeId, Potential>> items;
  for (auto& [i, slot] : battery_slots(g, overrides))
    items.emplace_back(i, slot ? *slot : imd_potential(g, r, i).total());
  return classical_battery(g, s, items);
}

}  // namespace iso
