#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "flatness.hpp"
#include "reductions.hpp"

using nlohmann::json;
using namespace iso;

namespace {

// ---- exit codes ------------------------------------------------------------
// 0 ok, 1 asserted residue nonzero, 2 usage/config, 3 unsupported reading or
// pair, 4 resource limit, 5 dimension/shape, 6 domain state, 7 io, 70 other

std::pair<int, std::string> classify_error(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return {2, "ParseError"};
  if (dynamic_cast<const InvalidReading*>(&e)) return {2, "InvalidReading"};
  if (dynamic_cast<const EmptyPart*>(&e)) return {2, "EmptyPart"};
  if (dynamic_cast<const UnsupportedDegenerateReading*>(&e))
    return {3, "UnsupportedDegenerateReading"};
  if (dynamic_cast<const UnsupportedPair*>(&e)) return {3, "UnsupportedPair"};
  if (dynamic_cast<const NotAnIMDCycle*>(&e)) return {3, "NotAnIMDCycle"};
  if (dynamic_cast<const ResourceLimit*>(&e)) return {4, "ResourceLimit"};
  if (dynamic_cast<const DimensionMismatch*>(&e)) return {5, "DimensionMismatch"};
  if (dynamic_cast<const BadDimension*>(&e)) return {5, "BadDimension"};
  if (dynamic_cast<const NotAdjacent*>(&e)) return {5, "NotAdjacent"};
  if (dynamic_cast<const OrientationMismatch*>(&e)) return {5, "OrientationMismatch"};
  if (dynamic_cast<const NotInvariant*>(&e)) return {6, "NotInvariant"};
  if (dynamic_cast<const ZeroElement*>(&e)) return {6, "ZeroElement"};
  if (dynamic_cast<const PoleHit*>(&e)) return {6, "PoleHit"};
  if (dynamic_cast<const DivisionByZero*>(&e)) return {6, "DivisionByZero"};
  if (dynamic_cast<const UnboundSymbol*>(&e)) return {6, "UnboundSymbol"};
  if (dynamic_cast<const json::exception*>(&e)) return {2, "ParseError"};
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return {7, "IoError"};
  if (dynamic_cast<const Error*>(&e)) return {70, "Error"};
  return {70, "InternalError"};
}

struct Globals {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 1;
  std::size_t max_terms = 400000;
  std::string format = "pretty";
};

void add_globals(CLI::App* cmd, Globals& g) {
  cmd->add_option("--config", g.config, "graph description file")->required();
  cmd->add_option("--out", g.out, "directory for JSON artifacts");
  cmd->add_option("--seed", g.seed, "seed for sampling fallbacks");
  cmd->add_option("--max-terms", g.max_terms, "term budget for symbolic commutators");
  cmd->add_option("--format", g.format, "stdout rendering")
      ->check(CLI::IsMember({"json", "pretty"}));
}

// ---- config ingestion ------------------------------------------------------

struct LoadedConfig {
  GraphAndReading gr;
  Convention conv = Convention::unit;
  json echo;
};

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::filesystem::filesystem_error(
      "cannot open config", path, std::make_error_code(std::errc::no_such_file_or_directory));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("parts") || !j["parts"].is_array() || j["parts"].empty())
    throw ParseError("config needs a non-empty \"parts\" array");

  std::vector<std::uint32_t> part_sizes;
  std::vector<std::uint32_t> dims;
  std::vector<std::optional<Scalar>> reading;
  json parts_echo = json::array();
  for (const auto& part : j["parts"]) {
    if (!part.is_object() || !part.contains("reading") || !part.contains("nodes") ||
        !part["nodes"].is_array() || part["nodes"].empty())
      throw ParseError("each part needs a \"reading\" and a non-empty \"nodes\" array");
    const std::string rd = part["reading"].get<std::string>();
    if (rd == "inf")
      reading.push_back(std::nullopt);
    else
      reading.push_back(Scalar::parse(rd));
    std::uint32_t size = 0;
    json dims_echo = json::array();
    for (const auto& node : part["nodes"]) {
      if (!node.is_object() || !node.contains("dim"))
        throw ParseError("each node needs a \"dim\"");
      const std::int64_t d = node["dim"].get<std::int64_t>();
      if (d < 1) throw ParseError("node dimensions must be positive");
      dims.push_back(static_cast<std::uint32_t>(d));
      dims_echo.push_back(d);
      ++size;
    }
    part_sizes.push_back(size);
    parts_echo.push_back({{"label", part.value("label", std::string{})},
                          {"reading", rd},
                          {"dims", dims_echo}});
  }

  LoadedConfig out{build_graph(part_sizes, dims, reading), Convention::unit, {}};
  const std::string conv = j.value("convention", std::string("unit"));
  if (conv == "unit")
    out.conv = Convention::unit;
  else if (conv == "phi_inverse")
    out.conv = Convention::phi_inverse;
  else
    throw ParseError("unknown convention \"" + conv + "\"");

  json nodes_echo = json::array();
  for (NodeId i = 0; i < out.gr.graph.num_nodes(); ++i)
    nodes_echo.push_back({{"node", i},
                          {"part", out.gr.graph.part(i)},
                          {"dim", out.gr.graph.dim(i)},
                          {"time", out.gr.graph.time(i).str()},
                          {"time_frozen", out.gr.graph.time_frozen(i)}});
  out.echo = {{"parts", parts_echo}, {"convention", conv}, {"nodes", nodes_echo}};
  return out;
}

// ---- serialization ---------------------------------------------------------

std::string arrow_id(const Arrow& a) {
  return std::to_string(a.tail) + ">" + std::to_string(a.head);
}

std::string coord_id(const Coord& c) {
  std::ostringstream os;
  os << "X[" << c.arrow.tail << "->" << c.arrow.head << "](" << c.row << "," << c.col << ")";
  return os.str();
}

json cycle_j(const Cycle& c) {
  json out = json::array();
  for (const Arrow& a : c.arrows()) out.push_back(arrow_id(a));
  return out;
}

json potential_j(const Potential& p) {
  json out = json::array();
  for (const auto& [c, w] : p) out.push_back({{"cycle", cycle_j(c)}, {"coeff", w.str()}});
  return out;
}

json anchored_j(const AnchoredCycle& c) {
  json word = json::array();
  for (const Arrow& a : c.word()) word.push_back(arrow_id(a));
  return {{"cycle", word}, {"anchor", 0}};
}

json qpotential_j(const QuantumPotential& p) {
  json terms = json::array();
  for (const auto& [c, w] : p.terms) {
    json entry = anchored_j(c);
    entry["coeff"] = w.str();
    terms.push_back(entry);
  }
  json products = json::array();
  for (const auto& [cs, w] : p.products) {
    json factors = json::array();
    for (const AnchoredCycle& c : cs) factors.push_back(anchored_j(c));
    products.push_back({{"factors", factors}, {"coeff", w.str()}});
  }
  return {{"terms", terms}, {"products", products}, {"constant", p.constant.str()}};
}

json weyl_j(const WeylElement& x) {
  json out = json::array();
  for (const auto& [w, c] : x.terms()) {
    json word = json::array();
    for (const Gen& g : w) word.push_back(g.str());
    out.push_back({{"word", word}, {"coeff", c.str()}});
  }
  return out;
}

json tracepoly_j(const TracePolynomial& p) {
  json out = json::array();
  for (const auto& [m, c] : p.terms()) {
    json word = json::array();
    for (const auto& [coord, power] : m)
      for (std::uint32_t k = 0; k < power; ++k) word.push_back(coord_id(coord));
    out.push_back({{"word", word}, {"coeff", c.str()}});
  }
  return out;
}

json uenv_j(const UEnvElement& x) {
  json out = json::array();
  for (const auto& [w, c] : x.terms()) {
    json word = json::array();
    for (const EGen& g : w) word.push_back(g.str());
    out.push_back({{"word", word}, {"coeff", c.str()}});
  }
  return out;
}

json sym_j(const SymElement& x) {
  json out = json::array();
  for (const auto& [m, c] : x.terms()) {
    json word = json::array();
    for (const auto& [g, power] : m)
      for (std::uint32_t k = 0; k < power; ++k) word.push_back(g.str());
    out.push_back({{"word", word}, {"coeff", c.str()}});
  }
  return out;
}

json diffop_j(const DiffOp& op) {
  json out = json::array();
  for (const auto& [key, c] : op.terms()) {
    json word = json::array();
    for (const Arrow& a : key.first)
      word.push_back("q(" + std::to_string(a.tail) + "," + std::to_string(a.head) + ")");
    for (const Arrow& a : key.second)
      word.push_back("d(" + std::to_string(a.tail) + "," + std::to_string(a.head) + ")");
    out.push_back({{"word", word}, {"coeff", c.str()}});
  }
  return out;
}

json flatness_j(const FlatnessReport& rep) {
  json pairs = json::array();
  for (const PairCheck& pc : rep.pairs) {
    std::string status = "ok";
    if (!pc.curl_ok && !pc.commute_ok)
      status = "curl_and_commutator_failed";
    else if (!pc.curl_ok)
      status = "curl_failed";
    else if (!pc.commute_ok)
      status = "commutator_failed";
    json inter = json::object();
    for (const auto& [key, count] : pc.intersections) inter[key.str()] = count;
    pairs.push_back({{"i", pc.i},
                     {"j", pc.j},
                     {"curl_residue", pc.curl_residue},
                     {"commutator_residue", pc.commutator_residue},
                     {"status", status},
                     {"exact", pc.exact},
                     {"intersections", inter}});
  }
  return {{"pairs", pairs},
          {"summary", {{"flat", rep.flat}, {"all_exact", rep.all_exact}}}};
}

// ---- element parsing (overrides, diffop polynomials) -----------------------

Coord parse_coord_id(const std::string& s) {
  unsigned tail = 0, head = 0, row = 0, col = 0;
  int used = 0;
  if (std::sscanf(s.c_str(), "X[%u->%u](%u,%u)%n", &tail, &head, &row, &col, &used) != 4 ||
      used != static_cast<int>(s.size()))
    throw ParseError("bad generator id \"" + s + "\" (want X[tail->head](row,col))");
  return Coord{Arrow{tail, head}, row, col};
}

WeylElement weyl_from_json(const json& arr, const WeylAlgebra& alg) {
  if (!arr.is_array()) throw ParseError("an operator must be a list of {word, coeff} terms");
  WeylElement out = alg.zero();
  for (const auto& term : arr) {
    if (!term.is_object() || !term.contains("word") || !term.contains("coeff"))
      throw ParseError("each operator term needs \"word\" and \"coeff\"");
    std::vector<Coord> coords;
    for (const auto& id : term["word"]) coords.push_back(parse_coord_id(id.get<std::string>()));
    out = out + alg.product(coords, Scalar::parse(term["coeff"].get<std::string>()));
  }
  return out;
}

std::vector<std::pair<NodeId, WeylElement>> overrides_from_file(const std::string& path,
                                                               const WeylAlgebra& alg) {
  std::ifstream in(path);
  if (!in) throw std::filesystem::filesystem_error(
      "cannot open override file", path,
      std::make_error_code(std::errc::no_such_file_or_directory));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("override file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("overrides") || !j["overrides"].is_array())
    throw ParseError("override file needs an \"overrides\" array");
  std::vector<std::pair<NodeId, WeylElement>> out;
  for (const auto& entry : j["overrides"]) {
    if (!entry.is_object() || !entry.contains("node") || !entry.contains("element"))
      throw ParseError("each override needs \"node\" and \"element\"");
    out.emplace_back(entry["node"].get<NodeId>(), weyl_from_json(entry["element"], alg));
  }
  return out;
}

// sums of '*'-separated factors; a factor is a position variable q(i,j), a
// rational number, or a bare symbol
TracePolynomial parse_poly(const std::string& text, const std::vector<Arrow>& positions) {
  std::size_t pos = 0;
  auto skip = [&] { while (pos < text.size() && std::isspace(text[pos])) ++pos; };
  auto fail = [&](const std::string& why) {
    throw ParseError("bad polynomial at offset " + std::to_string(pos) + ": " + why);
  };
  TracePolynomial total;
  skip();
  if (pos == text.size()) fail("empty input");
  while (pos < text.size()) {
    Scalar sign(1);
    while (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      if (text[pos] == '-') sign = -sign;
      ++pos;
      skip();
    }
    TracePolynomial term = TracePolynomial::constant(sign);
    bool expect_factor = true;
    while (expect_factor) {
      skip();
      if (pos + 1 < text.size() && text[pos] == 'q' && text[pos + 1] == '(') {
        unsigned i = 0, j = 0;
        int used = 0;
        if (std::sscanf(text.c_str() + pos, "q(%u,%u)%n", &i, &j, &used) != 2)
          fail("want q(i,j)");
        pos += static_cast<std::size_t>(used);
        const Arrow a{i, j};
        bool known = false;
        for (const Arrow& p : positions) known = known || p == a;
        if (!known) {
          std::string valid;
          for (const Arrow& p : positions)
            valid += " q(" + std::to_string(p.tail) + "," + std::to_string(p.head) + ")";
          fail("q(" + std::to_string(i) + "," + std::to_string(j) +
               ") is not a position variable; positions are" + valid);
        }
        term = term * TracePolynomial::coordinate(Coord{a, 1, 1});
      } else {
        std::size_t start = pos;
        while (pos < text.size() && (std::isalnum(text[pos]) || text[pos] == '_' ||
                                     text[pos] == '/'))
          ++pos;
        if (start == pos) fail("want a factor");
        term = term * TracePolynomial::constant(Scalar::parse(text.substr(start, pos - start)));
      }
      skip();
      expect_factor = pos < text.size() && text[pos] == '*';
      if (expect_factor) ++pos;
    }
    total = total + term;
    skip();
    if (pos < text.size() && text[pos] != '+' && text[pos] != '-') fail("want + or -");
  }
  return total;
}

// ---- shared command plumbing -----------------------------------------------

struct RunOutput {
  json payload;
  json checks = json::array();  // {name, ok} for every asserted-zero item
  std::string pretty;
  int exit_code = 0;
};

void add_check(RunOutput& out, const std::string& name, bool ok) {
  out.checks.push_back({{"name", name}, {"ok", ok}});
  if (!ok) out.exit_code = 1;
}

std::vector<NodeId> live_nodes(const KPartiteGraph& g) {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < g.num_nodes(); ++i)
    if (!g.time_frozen(i)) out.push_back(i);
  return out;
}

// singleton part and its complement, for the star-shaped reductions
std::pair<NodeId, std::vector<NodeId>> hub_and_legs(const KPartiteGraph& g) {
  if (g.num_parts() != 2) throw DimensionMismatch("this reduction needs a two-part graph");
  if (g.nodes_in_part(0).size() == 1) return {g.nodes_in_part(0)[0], g.nodes_in_part(1)};
  if (g.nodes_in_part(1).size() == 1) return {g.nodes_in_part(1)[0], g.nodes_in_part(0)};
  throw DimensionMismatch("this reduction needs a star-shaped graph (a singleton part)");
}

SymElement subs_sym(const SymElement& x, const std::map<SymbolId, Scalar>& m) {
  SymElement out;
  for (const auto& [mono, c] : x.terms()) out.add(mono, c.subs(m));
  return out;
}

UEnvElement subs_uenv(const UEnvElement& x, const std::map<SymbolId, Scalar>& m) {
  UEnvElement out;
  for (const auto& [w, c] : x.terms()) out.add_normal(w, c.subs(m));
  return out;
}

// ---- commands --------------------------------------------------------------

RunOutput cmd_potentials(const LoadedConfig& cfg) {
  const KPartiteGraph& g = cfg.gr.graph;
  RunOutput out;
  json nodes = json::array();
  std::ostringstream text;
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const IMDPotential w = imd_potential(g, cfg.gr.reading, i);
    const QuantumIMDPotential qw = quantise_imd(w);
    nodes.push_back({{"node", i},
                     {"time", g.time(i).str()},
                     {"time_frozen", g.time_frozen(i)},
                     {"classical",
                      {{"w4", potential_j(w.w4)},
                       {"w3", potential_j(w.w3)},
                       {"w2", potential_j(w.w2)}}},
                     {"quantum",
                      {{"w4", qpotential_j(qw.w4)},
                       {"w3", qpotential_j(qw.w3)},
                       {"w2", qpotential_j(qw.w2)}}}});
    text << "node " << i << " (time " << g.time(i).str() << ")\n"
         << "  W4: " << potential_str(w.w4) << "\n"
         << "  W3: " << potential_str(w.w3) << "\n"
         << "  W2: " << potential_str(w.w2) << "\n"
         << "  quantum total: " << qw.total().str() << "\n";
  }
  out.payload = {{"nodes", nodes}};
  out.pretty = text.str();
  return out;
}

RunOutput cmd_hamiltonians(const LoadedConfig& cfg) {
  const KPartiteGraph& g = cfg.gr.graph;
  const WeylAlgebra alg(g, cfg.gr.reading,
                        default_symplectic(g, cfg.gr.reading, cfg.conv));
  RunOutput out;
  json nodes = json::array();
  std::ostringstream text;
  for (NodeId i : live_nodes(g)) {
    const IMDPotential w = imd_potential(g, cfg.gr.reading, i);
    const TracePolynomial h = trace(w.total(), g);
    const WeylElement qh = quantum_trace(quantise_imd(w).total(), alg);
    nodes.push_back({{"node", i},
                     {"time", g.time(i).str()},
                     {"classical", tracepoly_j(h)},
                     {"quantum", weyl_j(qh)}});
    text << "node " << i << " (time " << g.time(i).str() << ")\n"
         << "  H: " << h.str() << "\n"
         << "  quantum: " << qh.str() << "\n";
  }
  out.payload = {{"nodes", nodes}};
  out.pretty = text.str();
  return out;
}

RunOutput cmd_check_flatness(const LoadedConfig& cfg, const Globals& G, bool classical,
                             bool quantum, const std::string& override_file) {
  const KPartiteGraph& g = cfg.gr.graph;
  const SymplecticData s = default_symplectic(g, cfg.gr.reading, cfg.conv);
  FlatnessOptions opt;
  opt.seed = G.seed;
  opt.max_terms = G.max_terms;
  RunOutput out;
  std::ostringstream text;
  if (!override_file.empty()) {
    const WeylAlgebra alg(g, cfg.gr.reading, s);
    const auto overrides = overrides_from_file(override_file, alg);
    const FlatnessReport rep = check_connection(g, cfg.gr.reading, s, overrides, opt);
    out.payload["quantum"] = flatness_j(rep);
    add_check(out, "quantum_flat", rep.flat);
    text << rep.str();
  } else {
    if (classical || !quantum) {
      const FlatnessReport rep = check_classical_flatness(g, cfg.gr.reading, s);
      out.payload["classical"] = flatness_j(rep);
      add_check(out, "classical_flat", rep.flat);
      text << "classical:\n" << rep.str() << "\n";
    }
    if (quantum || !classical) {
      const FlatnessReport rep = check_quantum_flatness(g, cfg.gr.reading, s, opt);
      out.payload["quantum"] = flatness_j(rep);
      add_check(out, "quantum_flat", rep.flat);
      text << "quantum:\n" << rep.str() << "\n";
    }
  }
  out.pretty = text.str();
  return out;
}

WeylElement plain_hamiltonian(const GraphAndReading& gr, NodeId i, const WeylAlgebra& alg) {
  return quantum_trace(quantise_imd(imd_potential(gr.graph, gr.reading, i)).total(), alg);
}

RunOutput cmd_reduce(const LoadedConfig& cfg, const std::string& system, bool compare) {
  const KPartiteGraph& g = cfg.gr.graph;
  RunOutput out;
  out.payload["system"] = system;
  std::ostringstream text;

  auto j_named = [&](const NamedHamiltonians& nh) {
    json times = json::array();
    for (const Scalar& t : nh.times) times.push_back(t.str());
    json o = {{"times", times}};
    if (!nh.classical.empty()) {
      json cl = json::array();
      for (const SymElement& h : nh.classical) cl.push_back(sym_j(h));
      o["classical"] = cl;
    }
    if (!nh.quantum.empty()) {
      json q = json::array();
      for (const UEnvElement& h : nh.quantum) q.push_back(uenv_j(h));
      o["quantum"] = q;
    }
    return o;
  };

  if (system == "kz" || system == "dmt") {
    const auto [hub, legs] = hub_and_legs(g);
    const WeylAlgebra alg(g, cfg.gr.reading,
                          default_symplectic(g, cfg.gr.reading, cfg.conv));
    if (system == "kz") {
      const auto m = static_cast<std::uint32_t>(legs.size());
      const NamedHamiltonians kz = named_hamiltonians(NamedSystem::kz, m, g.dim(hub));
      out.payload["hamiltonians"] = j_named(kz);
      text << "kz with " << m << " factors on gl_" << g.dim(hub) << "\n";
      if (compare) {
        std::map<SymbolId, Scalar> tmap;
        for (std::uint32_t i = 1; i <= m; ++i)
          tmap.emplace(symbol("t_" + std::to_string(i)), g.time(legs[i - 1]));
        json cmp = json::array();
        for (std::uint32_t i = 1; i <= m; ++i) {
          const WeylElement residue =
              quantum_moment_pullback(subs_uenv(kz.quantum[i - 1], tmap), alg,
                                      MomentSide::hub) -
              plain_hamiltonian(cfg.gr, legs[i - 1], alg);
          cmp.push_back({{"node", legs[i - 1]},
                         {"residue", weyl_j(residue)},
                         {"is_zero", residue.is_zero()},
                         {"asserted_zero", true}});
          add_check(out, "kz_residue_node_" + std::to_string(legs[i - 1]),
                    residue.is_zero());
          text << "  node " << legs[i - 1] << ": residue "
               << (residue.is_zero() ? "0" : residue.str()) << "\n";
        }
        out.payload["compare"] = cmp;
      }
    } else {
      const auto d = static_cast<std::uint32_t>(legs.size());
      const NamedHamiltonians dmt = named_hamiltonians(NamedSystem::dmt, 1, d);
      out.payload["hamiltonians"] = j_named(dmt);
      text << "dmt on gl_" << d << "\n";
      if (compare) {
        const auto diffs = correction_difference(CorrectionCase::dual_star, cfg.gr, alg);
        json cmp = json::array();
        for (std::size_t k = 0; k < legs.size(); ++k) {
          const WeylElement& diff = diffs[k];
          const bool vanishes = diff.is_zero() || filtration_order(diff) < 4;
          cmp.push_back({{"node", legs[k]},
                         {"raw_residue", weyl_j(diff)},
                         {"is_zero", diff.is_zero()},
                         {"asserted_zero", false},
                         {"correction", weyl_j(diff)},
                         {"vanishes_semiclassically", vanishes}});
          add_check(out, "dmt_correction_semiclassical_node_" + std::to_string(legs[k]),
                    vanishes);
          text << "  node " << legs[k] << ": correction " << diff.str()
               << (vanishes ? " (vanishes semiclassically)" : "") << "\n";
        }
        out.payload["compare"] = cmp;
      }
    }
    out.pretty = text.str();
    return out;
  }

  if (system != "jmms" && system != "fmtv")
    throw ParseError("unknown reduction system \"" + system + "\"");
  if (g.num_parts() != 2) throw DimensionMismatch("this reduction needs a two-part graph");
  if (!cfg.gr.reading.inf_part || *cfg.gr.reading.inf_part != 0)
    throw ParseError(system + " reduction expects the infinity part listed first");
  const std::vector<NodeId>& first = g.nodes_in_part(0);
  const std::vector<NodeId>& second = g.nodes_in_part(1);
  const auto m = static_cast<std::uint32_t>(first.size());
  const auto d = static_cast<std::uint32_t>(second.size());
  std::map<SymbolId, Scalar> tmap;
  for (std::uint32_t i = 1; i <= m; ++i)
    tmap.emplace(symbol("tinf_" + std::to_string(i)), g.time(first[i - 1]));
  for (std::uint32_t j = 1; j <= d; ++j)
    tmap.emplace(symbol("t0_" + std::to_string(j)), g.time(second[j - 1]));
  const NamedHamiltonians jmms = named_hamiltonians(NamedSystem::jmms, m, d);

  if (system == "jmms") {
    out.payload["hamiltonians"] = j_named(jmms);
    text << "jmms with " << m << " + " << d << " equations\n";
    if (compare) {
      json cmp = json::array();
      for (NodeId node = 0; node < g.num_nodes(); ++node) {
        const TracePolynomial residue =
            classical_moment_pullback(subs_sym(jmms.classical[node], tmap), g,
                                      MomentSide::leg_labels) -
            trace(imd_potential(g, cfg.gr.reading, node).total(), g);
        cmp.push_back({{"node", node},
                       {"residue", tracepoly_j(residue)},
                       {"is_zero", residue.is_zero()},
                       {"asserted_zero", true}});
        add_check(out, "jmms_residue_node_" + std::to_string(node), residue.is_zero());
        text << "  node " << node << ": residue "
             << (residue.is_zero() ? "0" : residue.str()) << "\n";
      }
      out.payload["compare"] = cmp;
    }
  } else {
    const NamedHamiltonians fmtv = named_hamiltonians(NamedSystem::fmtv, m, d);
    out.payload["hamiltonians"] = j_named(fmtv);
    text << "fmtv with " << m << " + " << d << " equations\n";
    if (compare) {
      json cmp = json::array();
      for (std::size_t idx = 0; idx < jmms.classical.size(); ++idx) {
        const UEnvElement diff = pbw_quantise(jmms.classical[idx]) - fmtv.quantum[idx];
        const bool first_family = idx < m;
        const bool vanishes = diff.is_zero() || uenv_order(diff) < 2;
        json entry = {{"equation", idx},
                      {"family", first_family ? "infinity" : "zero"},
                      {"difference", uenv_j(diff)},
                      {"is_zero", diff.is_zero()}};
        if (first_family) {
          entry["asserted_zero"] = true;
          add_check(out, "fmtv_first_family_eq_" + std::to_string(idx), diff.is_zero());
        } else {
          entry["asserted_zero"] = false;
          entry["vanishes_semiclassically"] = vanishes;
          add_check(out, "fmtv_offset_semiclassical_eq_" + std::to_string(idx), vanishes);
        }
        cmp.push_back(entry);
        text << "  equation " << idx << ": "
             << (diff.is_zero() ? "matches the symmetrised quantisation"
                                : "difference " + diff.str() +
                                      (vanishes ? " (vanishes semiclassically)" : ""))
             << "\n";
      }
      out.payload["compare"] = cmp;
    }
  }
  out.pretty = text.str();
  return out;
}

RunOutput cmd_diffop(const LoadedConfig& cfg, NodeId node, const std::string& poly,
                     bool has_poly) {
  const KPartiteGraph& g = cfg.gr.graph;
  if (node >= g.num_nodes()) throw ParseError("no node " + std::to_string(node));
  const WeylAlgebra alg(g, cfg.gr.reading,
                        default_symplectic(g, cfg.gr.reading, cfg.conv));
  const std::vector<Arrow> positions = cyclic_orientation(g);
  const WeylElement qh = plain_hamiltonian(cfg.gr, node, alg);
  const DiffOp op = weyl_to_diffop(qh, positions, alg);
  RunOutput out;
  json pos = json::array();
  for (const Arrow& a : positions)
    pos.push_back("q(" + std::to_string(a.tail) + "," + std::to_string(a.head) + ")");
  out.payload = {{"node", node}, {"orientation", pos}, {"operator", diffop_j(op)}};
  std::ostringstream text;
  text << "node " << node << ": " << op.str() << "\n";
  if (has_poly) {
    const TracePolynomial input = parse_poly(poly, positions);
    const TracePolynomial result = diffop_apply(op, input);
    out.payload["applied"] = {{"input", tracepoly_j(input)}, {"result", tracepoly_j(result)}};
    text << "applied to " << input.str() << ":\n  " << result.str() << "\n";
  }
  out.pretty = text.str();
  return out;
}

RunOutput cmd_intersections(const LoadedConfig& cfg) {
  const KPartiteGraph& g = cfg.gr.graph;
  const SymplecticData s = default_symplectic(g, cfg.gr.reading, cfg.conv);
  const CensusReport census = intersection_census(g, cfg.gr.reading, s);
  RunOutput out;
  json classes = json::array();
  std::ostringstream text;
  for (const CensusClassInfo& info : census.classes) {
    classes.push_back({{"key", info.key.str()},
                       {"pair_count", info.pair_count},
                       {"bracket_nonzero", info.bracket_nonzero},
                       {"result_antiparallel_free", info.result_antiparallel_free}});
    text << info.key.str() << ": pairs=" << info.pair_count
         << " bracket=" << (info.bracket_nonzero ? "nonzero" : "0")
         << (info.result_antiparallel_free ? " antiparallel-free" : "") << "\n";
  }
  out.payload = {{"classes", classes},
                 {"summary",
                  {{"class_count", census.class_count},
                   {"nonzero_count", census.nonzero_count},
                   {"antiparallel_free_count", census.antiparallel_free_count}}}};
  text << "classes=" << census.class_count << " nonzero=" << census.nonzero_count
       << " antiparallel-free=" << census.antiparallel_free_count << "\n";
  out.pretty = text.str();
  return out;
}

// ---- artifact writing ------------------------------------------------------

void write_json_file(const std::filesystem::path& path, const json& j, bool pretty) {
  std::ofstream f(path);
  if (!f) throw std::filesystem::filesystem_error(
      "cannot write artifact", path, std::make_error_code(std::errc::permission_denied));
  f << (pretty ? j.dump(2) : j.dump()) << "\n";
}

int finish(const std::string& command, const Globals& G, const LoadedConfig& cfg,
           RunOutput&& out) {
  const bool pretty_files = G.format == "pretty";
  std::filesystem::create_directories(G.out);
  json payload = std::move(out.payload);
  payload["command"] = command;
  payload["graph"] = cfg.echo;
  write_json_file(std::filesystem::path(G.out) / (command + ".json"), payload, pretty_files);
  json report = {{"command", command},
                 {"status", out.exit_code == 0 ? "ok" : "assertions_failed"},
                 {"exit_code", out.exit_code},
                 {"seed", G.seed},
                 {"max_terms", G.max_terms},
                 {"checks", out.checks}};
  write_json_file(std::filesystem::path(G.out) / "report.json", report, pretty_files);
  if (G.format == "json") {
    std::cout << payload.dump(2) << "\n";
  } else {
    if (!out.pretty.empty() && out.pretty.back() != '\n') out.pretty += '\n';
    std::cout << out.pretty << (out.exit_code == 0 ? "ok" : "FAILED") << "\n";
  }
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simply-laced isomonodromy toolkit"};
  app.require_subcommand(1);
  Globals G;

  CLI::App* potentials = app.add_subcommand("potentials", "node potentials, classical and quantised");
  add_globals(potentials, G);

  CLI::App* hamiltonians = app.add_subcommand("hamiltonians", "Hamiltonians of the live-time nodes");
  add_globals(hamiltonians, G);

  CLI::App* flatcmd = app.add_subcommand("check-flatness", "curl and commutator battery");
  add_globals(flatcmd, G);
  bool classical = false, quantum = false;
  std::string override_file;
  flatcmd->add_flag("--classical", classical, "classical battery only");
  flatcmd->add_flag("--quantum", quantum, "quantum battery only");
  flatcmd->add_option("--override", override_file,
                      "replace quantum Hamiltonians from this file");

  CLI::App* reduce = app.add_subcommand("reduce", "named reductions and comparisons");
  add_globals(reduce, G);
  std::string system;
  bool compare = false;
  reduce->add_option("system", system, "kz, dmt, fmtv or jmms")
      ->required()
      ->check(CLI::IsMember({"kz", "dmt", "fmtv", "jmms"}));
  reduce->add_flag("--compare", compare, "also compute the comparison residues");

  CLI::App* diffop = app.add_subcommand("diffop", "differential-operator form of a Hamiltonian");
  add_globals(diffop, G);
  NodeId node = 0;
  std::string poly;
  diffop->add_option("--node", node, "node whose Hamiltonian to convert")->required();
  CLI::Option* apply_opt = diffop->add_option("--apply", poly, "polynomial to act on");

  CLI::App* intersections = app.add_subcommand("intersections", "cycle intersection census");
  add_globals(intersections, G);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().at(0)->get_name();
  try {
    const LoadedConfig cfg = load_config(G.config);
    if (command == "potentials") return finish(command, G, cfg, cmd_potentials(cfg));
    if (command == "hamiltonians") return finish(command, G, cfg, cmd_hamiltonians(cfg));
    if (command == "check-flatness") {
      if (!override_file.empty() && (classical || quantum))
        throw ParseError("--override replaces the quantum battery; drop --classical/--quantum");
      return finish(command, G, cfg,
                    cmd_check_flatness(cfg, G, classical, quantum, override_file));
    }
    if (command == "reduce") return finish(command, G, cfg, cmd_reduce(cfg, system, compare));
    if (command == "diffop")
      return finish(command, G, cfg,
                    cmd_diffop(cfg, node, poly, apply_opt->count() > 0));
    return finish(command, G, cfg, cmd_intersections(cfg));
  } catch (const std::exception& e) {
    const auto [code, cls] = classify_error(e);
    const json err = {{"error", {{"class", cls}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    try {
      std::filesystem::create_directories(G.out);
      json report = {{"command", command},
                     {"status", "error"},
                     {"exit_code", code},
                     {"seed", G.seed},
                     {"error", err["error"]}};
      write_json_file(std::filesystem::path(G.out) / "report.json", report,
                      G.format == "pretty");
    } catch (...) {
    }
    return code;
  }
}
