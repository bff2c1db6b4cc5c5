#pragma once

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsmc/hsmc.hpp"

namespace hsmc::cli {

inline constexpr int kHolds = 0;
inline constexpr int kViolated = 1;
inline constexpr int kUsage = 2;

inline constexpr std::size_t kDefaultMaxTau = 1'000'000;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

// Ceiling for tau(|W|, k): the flag when given, else HSMC_MAX_TAU, else the default.
inline std::size_t max_tau_ceiling(long long flag) {
  if (flag >= 0) return static_cast<std::size_t>(flag);
  if (const char* env = std::getenv("HSMC_MAX_TAU")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw Error("HSMC_MAX_TAU is not a number: '" + std::string(env) + "'");
    return static_cast<std::size_t>(v);
  }
  return kDefaultMaxTau;
}

struct FormulaSource {
  std::string file;
  std::string text;

  Formula load() const {
    if (!file.empty() && !text.empty()) throw Error("give either --formula or --expr, not both");
    if (!file.empty()) return parse_formula(read_file(file));
    if (!text.empty()) return parse_formula(text);
    throw Error("a formula is required (--formula FILE or --expr TEXT)");
  }
};

enum class EngineChoice { Auto, Representative, Conp, Oracle };

struct CheckArgs {
  std::string model;
  FormulaSource formula;
  EngineChoice engine = EngineChoice::Auto;
  std::string method = "summary";
  std::vector<std::string> tracks;
  std::size_t depth = 0;
  long long max_tau = -1;
  unsigned jobs = 1;
  bool verify = false;
};

inline std::string engine_name(EngineChoice e) {
  switch (e) {
  case EngineChoice::Auto: return "auto";
  case EngineChoice::Representative: return "representative";
  case EngineChoice::Conp: return "conp";
  case EngineChoice::Oracle: return "oracle";
  }
  return "?";
}

inline bool representative_fragment(const Formula& g) {
  const unsigned allowed = rel_bit(Rel::A) | rel_bit(Rel::Abar) | rel_bit(Rel::B) | rel_bit(Rel::Bbar) | rel_bit(Rel::Ebar);
  return (modalities(g) & ~allowed) == 0;
}

inline EngineChoice route(EngineChoice requested, const Formula& g, bool per_track) {
  if (requested != EngineChoice::Auto) return requested;
  if (!per_track && in_forall_fragment(g)) return EngineChoice::Conp;
  if (representative_fragment(g)) return EngineChoice::Representative;
  throw FragmentError("formula is outside the A/Ai/B/Bi/Ei and universal A/Ai/B/E fragments (class " +
                      std::string(class_name(classify(g))) + "); use --engine oracle");
}

inline OracleConfig oracle_config(std::size_t depth) {
  OracleConfig cfg;
  if (depth > 0) {
    cfg.mode = OracleConfig::Mode::Bounded;
    cfg.depth_bound = depth;
  }
  return cfg;
}

inline void warn_bound(const KripkeStructure& k, const Formula& g, std::size_t depth, std::ostream& err) {
  if (depth == 0) return;
  if (modalities(g) & rel_bit(Rel::E)) {
    err << "warning: bounded oracle verdicts are exact only up to tracks of length " << depth << "\n";
    return;
  }
  BigInt t = tau(k.num_states(), nest_b(g));
  if (BigInt(depth) < t)
    err << "warning: depth bound " << depth << " is below tau = " << t.str() << "; the verdict may be inexact\n";
}

inline int run_check(const CheckArgs& a, std::ostream& out, std::ostream& err) {
  KripkeStructure k = parse_kripke(read_file(a.model));
  Formula g = desugar(a.formula.load());
  const bool per_track = !a.tracks.empty();
  EngineChoice engine = route(a.engine, g, per_track);

  CheckOptions opt;
  opt.method = a.method == "unravel" ? Method::Unravel : Method::Summary;
  opt.jobs = a.jobs;
  opt.max_tau = max_tau_ceiling(a.max_tau);
  OracleConfig ocfg = oracle_config(a.depth);

  if (engine == EngineChoice::Representative) {
    if (!representative_fragment(g))
      throw FragmentError("the representative engine handles the A, Ai, B, Bi, Ei fragment only");
    RepresentativeChecker(k, opt).guard_tau(nest_b(g));
  }
  if (engine == EngineChoice::Conp && !in_forall_fragment(g))
    throw FragmentError("the conp engine handles the universal A, Ai, B, E fragment only");
  if (engine == EngineChoice::Conp && per_track)
    throw FragmentError("the conp engine decides structures, not single tracks; use --engine oracle");
  if (engine == EngineChoice::Oracle) warn_bound(k, g, a.depth, err);

  if (per_track) {
    bool all = true;
    std::optional<SummaryChecker> summary;
    std::optional<RepresentativeChecker> literal;
    for (const auto& text : a.tracks) {
      Track t = parse_track(k, text);
      bool v;
      if (engine == EngineChoice::Oracle) {
        v = oracle_eval(k, t, g, ocfg);
      } else if (opt.method == Method::Unravel) {
        if (!literal) literal.emplace(k, opt);
        v = literal->holds(g, t);
      } else {
        if (!summary) summary.emplace(k);
        v = summary->holds(g, t);
      }
      if (a.verify && engine != EngineChoice::Oracle && oracle_eval(k, t, g) != v) {
        err << "error: oracle disagrees on track " << format_track(k, t) << "\n";
        return kUsage;
      }
      out << format_track(k, t) << ": " << (v ? "holds" : "violated") << "\n";
      all = all && v;
    }
    return all ? kHolds : kViolated;
  }

  bool holds = true;
  std::optional<Track> ce;
  std::optional<Formula> dual;
  switch (engine) {
  case EngineChoice::Conp:
    if (auto c = provide_counterex(k, g)) {
      holds = false;
      ce = c->track;
      dual = c->violated;
    }
    break;
  case EngineChoice::Representative: {
    Verdict v = mod_check(k, g, opt);
    holds = v.holds;
    ce = v.counterexample;
    break;
  }
  case EngineChoice::Oracle: {
    OracleVerdict v = oracle_mod_check(k, g, ocfg);
    holds = v.holds;
    ce = v.counterexample;
    break;
  }
  case EngineChoice::Auto: break;
  }

  if (a.verify && engine != EngineChoice::Oracle) {
    OracleVerdict o = oracle_mod_check(k, g);
    bool ce_ok = !ce || !oracle_eval(k, *ce, g);
    if (o.holds != holds || !ce_ok) {
      err << "error: oracle disagrees (" << engine_name(engine) << ": " << (holds ? "holds" : "violated")
          << ", oracle: " << (o.holds ? "holds" : "violated") << ")\n";
      return kUsage;
    }
    err << "oracle agrees\n";
  }

  out << (holds ? "holds" : "violated") << "\n";
  if (ce) out << "CE: " << format_track(k, *ce) << "\n";
  if (dual) out << "witness of: " << to_string(*dual) << "\n";
  return holds ? kHolds : kViolated;
}

inline int run_counterexample(const std::string& model, const FormulaSource& f, std::ostream& out) {
  KripkeStructure k = parse_kripke(read_file(model));
  Formula g = desugar(f.load());
  if (!in_forall_fragment(g)) throw FragmentError("counterexample search needs a universal A, Ai, B, E formula");
  auto c = provide_counterex(k, g);
  if (!c) {
    out << "holds\n";
    return kHolds;
  }
  out << "CE: " << format_track(k, c->track) << "\n";
  out << "element: " << format_element(k, c->element) << "\n";
  out << "violated: " << to_string(c->violated) << "\n";
  return kViolated;
}

inline int run_descriptors(const std::string& model, const std::string& track, unsigned depth, std::ostream& out) {
  KripkeStructure k = parse_kripke(read_file(model));
  Track t = parse_track(k, track);
  DescriptorSequence seq = descriptor_sequence(t);
  out << "sequence: " << format_sequence(k, seq) << "\n";
  auto cs = clusters(seq);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const Cluster& c = cs[i];
    out << "cluster " << i << ": positions " << c.first << ".." << c.last << ", members";
    for (const auto& m : c.members) out << ' ' << format_element(k, m);
    out << "\n";
    if (depth == 0) continue;
    for (const ScanStep& st : scan(seq, c, depth))
      out << "  " << st.position << ' ' << format_configuration(st.config) << "\n";
  }
  BkDescriptorFactory f;
  std::uint32_t id = f.build(t, depth);
  out << "B" << depth << "-descriptor:\n" << f.render(k, id);
  return kHolds;
}

inline int run_unravel(const std::string& model, const std::string& from, unsigned depth, bool backward,
                       std::size_t limit, std::size_t cap, std::ostream& out) {
  KripkeStructure k = parse_kripke(read_file(model));
  auto v = k.find_state(from.empty() ? k.state_name(k.initial()) : from);
  if (!v) throw ModelError("unknown state '" + from + "'");
  Unraveller u(k, *v, depth, backward ? Direction::Backward : Direction::Forward, cap);
  std::size_t n = 0;
  while (limit == 0 || n < limit) {
    auto t = u.next();
    if (!t) break;
    out << format_track(k, *t) << "\n";
    ++n;
  }
  return kHolds;
}

inline int run_gen(const std::string& kind, std::size_t vars, std::size_t clauses, std::uint64_t seed,
                   const std::string& input, const std::string& prefix, std::ostream& out,
                   std::ostream& err) {
  Reduction r{parse_kripke("states: s\ninit: s\nedges: s->s\n"), Formula::top()};
  if (kind == "qbf") {
    Qbf q = input.empty() ? random_qbf(vars, seed) : parse_qbf(read_file(input));
    out << format_qbf(q);
    r = qbf_to_kripke(q);
  } else {
    Cnf c = input.empty() ? random_cnf(vars, clauses, seed) : parse_dimacs(read_file(input));
    out << format_dimacs(c);
    r = sat_to_kripke(c);
  }
  write_file(prefix + ".ks", serialize(r.model));
  write_file(prefix + ".hs", to_string(r.formula) + "\n");
  err << "wrote " << prefix << ".ks " << prefix << ".hs\n";
  return kHolds;
}

inline void add_formula_options(CLI::App* cmd, FormulaSource& f) {
  cmd->add_option("-f,--formula", f.file, "Formula file");
  cmd->add_option("-e,--expr", f.text, "Formula text");
}

// Parses argv (program name excluded) and runs one subcommand. Returns the process exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model checker for Halpern-Shoham interval temporal logic fragments", "hsmc"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  CheckArgs ca;
  std::map<std::string, EngineChoice> engines{{"auto", EngineChoice::Auto},
                                              {"representative", EngineChoice::Representative},
                                              {"conp", EngineChoice::Conp},
                                              {"oracle", EngineChoice::Oracle}};
  auto* check = app.add_subcommand("check", "Decide K |= psi, or K, rho |= psi for each --track");
  check->add_option("-m,--model", ca.model, "Model file")->required();
  add_formula_options(check, ca.formula);
  check->add_option("--engine", ca.engine, "Engine: auto, representative, conp or oracle")
      ->transform(CLI::CheckedTransformer(engines, CLI::ignore_case).description(""));
  check->add_option("--method", ca.method, "Representative engine method")
      ->check(CLI::IsMember({"summary", "unravel"}));
  check->add_option("-t,--track", ca.tracks, "Track to evaluate, e.g. \"v0 v1 v0\" (repeatable)");
  check->add_option("--depth", ca.depth, "Oracle depth bound; 0 selects the exact automaton oracle");
  check->add_option("--max-tau", ca.max_tau, "Refuse representative runs when tau(|W|,k) exceeds this");
  check->add_option("-j,--jobs", ca.jobs, "Worker threads for the unravel method")->check(CLI::PositiveNumber);
  check->add_flag("--verify-with-oracle", ca.verify, "Re-run with the oracle and require agreement");

  CheckArgs oa;
  auto* oracle = app.add_subcommand("oracle", "Brute-force semantics: K |= psi, or K, rho |= psi");
  oracle->add_option("-m,--model", oa.model, "Model file")->required();
  add_formula_options(oracle, oa.formula);
  oracle->add_option("-t,--track", oa.tracks, "Track to evaluate (repeatable)");
  oracle->add_option("--depth", oa.depth, "Depth bound; 0 selects the exact automaton oracle");

  std::string ce_model;
  FormulaSource ce_formula;
  auto* counter = app.add_subcommand("counterexample", "Counterexample search for universal A, Ai, B, E formulas");
  counter->add_option("-m,--model", ce_model, "Model file")->required();
  add_formula_options(counter, ce_formula);

  std::string d_model, d_track;
  unsigned d_k = 0;
  auto* desc = app.add_subcommand("descriptors", "Descriptor sequence, clusters, configurations and B_k-descriptor");
  desc->add_option("-m,--model", d_model, "Model file")->required();
  desc->add_option("-t,--track", d_track, "Track, e.g. \"v0 v1 v0\"")->required();
  desc->add_option("-k,--k", d_k, "Depth");

  std::string u_model, u_from;
  unsigned u_k = 0;
  bool u_back = false;
  std::size_t u_limit = 0, u_cap = 0;
  auto* unr = app.add_subcommand("unravel", "Track representatives from (or, backwards, to) a state");
  unr->add_option("-m,--model", u_model, "Model file")->required();
  unr->add_option("--from", u_from, "Anchor state (default: the initial state)");
  unr->add_option("-k,--k", u_k, "B-nesting budget");
  unr->add_flag("--backward", u_back, "Enumerate tracks ending at the anchor");
  unr->add_option("--limit", u_limit, "Stop after this many tracks (0: no limit)");
  unr->add_option("--max-length", u_cap, "Length cap (0: tau(|W|,k))");

  auto* gen = app.add_subcommand("gen", "Hardness-reduction instances");
  gen->require_subcommand(1);
  std::size_t g_vars = 3, g_clauses = 5;
  std::uint64_t g_seed = 1;
  std::string g_input, g_prefix = "instance";
  std::string g_kind;
  for (const char* kind : {"qbf", "sat"}) {
    auto* sub = gen->add_subcommand(kind, std::string("Reduce a ") + (kind[0] == 'q' ? "QBF" : "CNF") +
                                              " to a model file (PREFIX.ks) and formula file (PREFIX.hs)");
    sub->add_option("--vars", g_vars, "Number of variables");
    if (kind[0] == 's') sub->add_option("--clauses", g_clauses, "Number of clauses");
    sub->add_option("--seed", g_seed, "Random seed");
    sub->add_option("--from", g_input, kind[0] == 'q' ? "QBF file instead of a random instance"
                                                      : "DIMACS file instead of a random instance");
    sub->add_option("-o,--out", g_prefix, "Output path prefix");
    sub->callback([&g_kind, kind] { g_kind = kind; });
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kHolds;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kHolds;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*check) return run_check(ca, out, err);
    if (*oracle) {
      oa.engine = EngineChoice::Oracle;
      return run_check(oa, out, err);
    }
    if (*counter) return run_counterexample(ce_model, ce_formula, out);
    if (*desc) return run_descriptors(d_model, d_track, d_k, out);
    if (*unr) return run_unravel(u_model, u_from, u_k, u_back, u_limit, u_cap, out);
    if (*gen) return run_gen(g_kind, g_vars, g_clauses, g_seed, g_input, g_prefix, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

} // namespace hsmc::cli
