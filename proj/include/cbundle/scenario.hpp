#pragma once

// JSON scenarios: a manifold, a bundle, fields written in the expression
// language, and a recipe with its parameters.
//
//   {
//     "schema": 1,
//     "name": "lutz-t3",
//     "recipe": "verify-contact",
//     "manifold": {"factors": [{"kind": "circle", "resolution": 24}, ...]},
//     "bundle": {"curvature": [{"coeff": "0.5*x0", "indices": [1, 2]}],
//                "cycles": [{"name": "T2", "map": ["s", "t"]}]},
//     "form": {"beta": [{"coeff": "cos(2*pi*x1)", "indices": [0]}], "u": "sin(2*pi*x1)"},
//     "parameters": {...},
//     "checks": ["lemma-volume"],
//     "output": "lutz-t3.report.json"
//   }

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cbundle/constructor.hpp"
#include "cbundle/dsl.hpp"
#include "cbundle/gallery.hpp"
#include "cbundle/recipes.hpp"

namespace cbundle {

inline constexpr int kScenarioSchema = 1;

/// Schema violation or unresolved reference, located by a JSON pointer.
class ScenarioError : public Error {
 public:
  ScenarioError(const std::string& pointer, const std::string& msg)
      : Error(msg + " at \"" + pointer + "\""), pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct FieldSpec {
  std::string text;
  dsl::AstPtr ast;
  std::string pointer;
};

struct TermSpec {
  FieldSpec coeff;
  std::vector<int> indices;
};

struct CycleSpec {
  std::string name;
  std::vector<FieldSpec> map;  // in the parameters s, t
  bool periodic_s = true, periodic_t = true;
  int resolution = 256;
};

struct Scenario {
  std::string name;
  std::string recipe;
  std::vector<ModelFactor> factors;
  std::vector<TermSpec> curvature;
  std::vector<CycleSpec> cycles;
  std::optional<std::vector<TermSpec>> beta;
  std::optional<FieldSpec> u;
  std::optional<std::vector<TermSpec>> ulambda;
  std::optional<FieldSpec> domain;
  bool finite_differences = false;
  ordered_json parameters = ordered_json::object();
  std::vector<std::string> checks;
  std::optional<std::string> output;

  int ambient_dim() const {
    int d = 0;
    for (const auto& f : factors) d += f.ambient_dim();
    return d;
  }
  int grid_params() const {
    int p = 0;
    for (const auto& f : factors) p += static_cast<int>(f.grid_shape().size());
    return p;
  }
  bool has_check(const std::string& c) const { return std::find(checks.begin(), checks.end(), c) != checks.end(); }
};

inline const std::vector<std::string>& recipe_names() {
  static const std::vector<std::string> r{"verify-contact", "split", "construct", "bourgeois", "contactise", "euler"};
  return r;
}

namespace detail {

inline std::string pointer_escape(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

/// Object reader that remembers which keys were consumed, so that leftovers
/// can be reported as unknown.
class Reader {
 public:
  Reader(const ordered_json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {
    if (!j_.is_object()) throw ScenarioError(where(), "expected an object");
  }
  const std::string& pointer() const { return ptr_; }
  std::string where() const { return ptr_.empty() ? "/" : ptr_; }
  std::string at(const std::string& key) const { return ptr_ + "/" + pointer_escape(key); }
  bool has(const std::string& key) const { return j_.contains(key); }

  const ordered_json& get(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ScenarioError(at(key), "missing required key");
    return j_.at(key);
  }
  const ordered_json* find(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  Reader object(const std::string& key) { return Reader(get(key), at(key)); }

  std::string str(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_string()) throw ScenarioError(at(key), "expected a string");
    return v.get<std::string>();
  }
  double num(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_number()) throw ScenarioError(at(key), "expected a number");
    return v.get<double>();
  }
  double num(const std::string& key, double dflt) { return has(key) ? num(key) : (used_.insert(key), dflt); }
  int integer(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_number_integer()) throw ScenarioError(at(key), "expected an integer");
    return v.get<int>();
  }
  int integer(const std::string& key, int dflt) { return has(key) ? integer(key) : (used_.insert(key), dflt); }
  bool boolean(const std::string& key, bool dflt) {
    const auto* v = find(key);
    if (!v) return dflt;
    if (!v->is_boolean()) throw ScenarioError(at(key), "expected a boolean");
    return v->get<bool>();
  }
  const ordered_json& array(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_array()) throw ScenarioError(at(key), "expected an array");
    return v;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ScenarioError(at(it.key()), "unknown key '" + it.key() + "'");
  }

 private:
  const ordered_json& j_;
  std::string ptr_;
  std::set<std::string> used_;
};

inline FieldSpec parse_field(const ordered_json& v, const std::string& ptr, int ambient_dim,
                             const dsl::Symbols& symbols = {}) {
  if (!v.is_string()) throw ScenarioError(ptr, "expected an expression string");
  FieldSpec f;
  f.text = v.get<std::string>();
  f.pointer = ptr;
  try {
    f.ast = dsl::parse_expression(f.text, symbols);
  } catch (const ParseError& e) {
    throw ScenarioError(ptr, e.what());
  }
  const int mv = dsl::max_var(*f.ast);
  if (symbols.empty() && mv >= ambient_dim)
    throw ScenarioError(ptr, "coordinate x" + std::to_string(mv) + " does not resolve: the ambient space has " +
                                 std::to_string(ambient_dim) + " coordinates");
  return f;
}

inline std::vector<int> parse_indices(const ordered_json& v, const std::string& ptr, int ambient_dim) {
  if (!v.is_array()) throw ScenarioError(ptr, "expected an array of coordinate indices");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = ptr + "/" + std::to_string(i);
    if (!v[i].is_number_integer()) throw ScenarioError(p, "expected an integer");
    const int k = v[i].get<int>();
    if (k < 0 || k >= ambient_dim)
      throw ScenarioError(p, "coordinate index " + std::to_string(k) + " does not resolve: the ambient space has " +
                                 std::to_string(ambient_dim) + " coordinates");
    out.push_back(k);
  }
  return out;
}

inline std::vector<TermSpec> parse_terms(const ordered_json& v, const std::string& ptr, int ambient_dim, int degree) {
  if (!v.is_array()) throw ScenarioError(ptr, "expected an array of terms");
  std::vector<TermSpec> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    Reader r(v[i], ptr + "/" + std::to_string(i));
    TermSpec t;
    t.coeff = parse_field(r.get("coeff"), r.at("coeff"), ambient_dim);
    t.indices = parse_indices(r.get("indices"), r.at("indices"), ambient_dim);
    if (static_cast<int>(t.indices.size()) != degree)
      throw ScenarioError(r.at("indices"), "expected " + std::to_string(degree) + " indices");
    r.finish();
    out.push_back(std::move(t));
  }
  return out;
}

inline ModelFactor parse_factor(Reader r) {
  const std::string kind = r.str("kind");
  ModelFactor f;
  if (kind == "circle") {
    f = ModelFactor::circle(r.integer("resolution", 12));
  } else if (kind == "interval") {
    const double lo = r.num("lo"), hi = r.num("hi");
    if (!(hi > lo)) throw ScenarioError(r.at("hi"), "interval needs lo < hi");
    f = ModelFactor::interval(lo, hi, r.integer("resolution", 12));
  } else if (kind == "sphere2") {
    f = ModelFactor::sphere2(r.integer("resolution", 16));
  } else if (kind == "sphere3") {
    f = ModelFactor::sphere3(r.integer("resolution", 8));
  } else {
    throw ScenarioError(r.at("kind"), "unknown factor kind '" + kind + "' (valid: circle, interval, sphere2, sphere3)");
  }
  if (f.resolution < 1) throw ScenarioError(r.at("resolution"), "resolution must be positive");
  r.finish();
  return f;
}

/// Keys each recipe accepts under "parameters".
inline const std::set<std::string>& parameter_keys(const std::string& recipe) {
  static const std::map<std::string, std::set<std::string>> keys{
      {"verify-contact",
       {"tolerance", "lemma_tolerance", "axis", "levels", "eps", "expected_pairings", "pairing_tolerance",
        "pairing_magnitude"}},
      {"split", {"tolerance", "axis", "levels", "eps"}},
      {"euler", {"tolerance", "expected_pairings", "pairing_tolerance", "pairing_magnitude"}},
      {"construct",
       {"tolerance", "model", "k", "levels", "plateau_height", "transition_width", "profile_eps", "bump_start",
        "exp_blend", "g_width"}},
      {"bourgeois", {"tolerance", "model", "r0", "cutoff_a", "cutoff_b"}},
      {"contactise", {"tolerance", "axis", "eps"}},
  };
  return keys.at(recipe);
}

inline const std::set<std::string>& check_names(const std::string& recipe) {
  static const std::map<std::string, std::set<std::string>> names{
      {"verify-contact", {"lemma-volume", "split", "euler"}},
      {"split", {"contact"}},
      {"euler", {"boothby-wang"}},
      {"construct", {}},
      {"bourgeois", {}},
      {"contactise", {"lemma-volume"}},
  };
  return names.at(recipe);
}

inline void require_factors(const Scenario& s, const std::vector<FactorKind>& kinds, const std::string& what) {
  bool ok = s.factors.size() == kinds.size();
  for (std::size_t i = 0; ok && i < kinds.size(); ++i) ok = s.factors[i].kind == kinds[i];
  if (!ok) throw ScenarioError("/manifold/factors", what);
}

/// Recipe-specific parameter validation (types and ranges).
inline void validate_parameters(const Scenario& s) {
  const auto& p = s.parameters;
  auto ptr = [](const std::string& k) { return "/parameters/" + pointer_escape(k); };
  for (auto it = p.begin(); it != p.end(); ++it)
    if (!parameter_keys(s.recipe).count(it.key()))
      throw ScenarioError(ptr(it.key()), "unknown parameter '" + it.key() + "' for recipe " + s.recipe);
  for (const char* k : {"tolerance", "lemma_tolerance", "eps", "pairing_tolerance", "plateau_height",
                        "transition_width", "profile_eps", "bump_start", "exp_blend", "g_width", "r0", "cutoff_a",
                        "cutoff_b"})
    if (p.contains(k) && !p[k].is_number()) throw ScenarioError(ptr(k), "expected a number");
  for (const char* k : {"axis", "k"})
    if (p.contains(k) && !p[k].is_number_integer()) throw ScenarioError(ptr(k), "expected an integer");
  if (p.contains("pairing_magnitude") && !p["pairing_magnitude"].is_boolean())
    throw ScenarioError(ptr("pairing_magnitude"), "expected a boolean");
  if (p.contains("axis")) {
    const int a = p["axis"].get<int>();
    if (a < 0 || a >= s.grid_params())
      throw ScenarioError(ptr("axis"), "sampling parameter " + std::to_string(a) + " does not resolve");
  }
  if (p.contains("levels")) {
    if (!p["levels"].is_array()) throw ScenarioError(ptr("levels"), "expected an array of numbers");
    for (std::size_t i = 0; i < p["levels"].size(); ++i)
      if (!p["levels"][i].is_number()) throw ScenarioError(ptr("levels") + "/" + std::to_string(i), "expected a number");
  }
  if (p.contains("expected_pairings")) {
    const auto& e = p["expected_pairings"];
    if (!e.is_object()) throw ScenarioError(ptr("expected_pairings"), "expected an object");
    for (auto it = e.begin(); it != e.end(); ++it) {
      const std::string q = ptr("expected_pairings") + "/" + pointer_escape(it.key());
      if (!it.value().is_number()) throw ScenarioError(q, "expected a number");
      const bool known = std::any_of(s.cycles.begin(), s.cycles.end(), [&](const CycleSpec& c) { return c.name == it.key(); });
      if (!known) throw ScenarioError(q, "cycle '" + it.key() + "' does not resolve");
    }
  }
  if (p.contains("model") && !p["model"].is_string()) throw ScenarioError(ptr("model"), "expected a string");

  if (s.recipe == "construct") {
    if (p.value("model", "t2s2") != "t2s2") throw ScenarioError(ptr("model"), "unknown model (valid: t2s2)");
    if (!p.contains("k")) throw ScenarioError(ptr("k"), "missing required key");
    require_factors(s, {FactorKind::Circle, FactorKind::Circle, FactorKind::Sphere2},
                    "the t2s2 model lives on circle x circle x sphere2");
  }
  if (s.recipe == "bourgeois") {
    if (p.value("model", "s3-standard") != "s3-standard")
      throw ScenarioError(ptr("model"), "unknown model (valid: s3-standard)");
    require_factors(s, {FactorKind::Sphere3, FactorKind::Circle}, "the s3-standard model lives on sphere3 x circle");
  }
  const bool needs_form = s.recipe == "verify-contact" || s.recipe == "split";
  if (needs_form && (!s.beta || !s.u)) throw ScenarioError("/form", "recipe " + s.recipe + " needs form.beta and form.u");
  if (s.recipe == "contactise" && (!s.u || !s.ulambda))
    throw ScenarioError("/form", "recipe contactise needs form.u and form.ulambda");
  if ((needs_form || s.recipe == "euler" || s.recipe == "contactise") && s.factors.empty())
    throw ScenarioError("/manifold/factors", "needs at least one factor");
}

}  // namespace detail

inline Scenario parse_scenario(const ordered_json& j) {
  using detail::Reader;
  Reader root(j, "");
  Scenario s;
  {
    const auto& v = root.get("schema");
    if (!v.is_number_integer() || v.get<int>() != kScenarioSchema)
      throw ScenarioError("/schema", "unsupported schema (expected " + std::to_string(kScenarioSchema) + ")");
  }
  s.name = root.str("name");
  s.recipe = root.str("recipe");
  if (std::find(recipe_names().begin(), recipe_names().end(), s.recipe) == recipe_names().end())
    throw ScenarioError("/recipe", "unknown recipe '" + s.recipe +
                                       "' (valid: verify-contact, split, construct, bourgeois, contactise, euler)");

  Reader man = root.object("manifold");
  const auto& fac = man.array("factors");
  for (std::size_t i = 0; i < fac.size(); ++i)
    s.factors.push_back(detail::parse_factor(Reader(fac[i], "/manifold/factors/" + std::to_string(i))));
  man.finish();
  const int dim = s.ambient_dim();

  if (root.has("bundle")) {
    Reader b = root.object("bundle");
    if (b.has("curvature")) s.curvature = detail::parse_terms(b.get("curvature"), b.at("curvature"), dim, 2);
    if (b.has("cycles")) {
      const auto& cs = b.array("cycles");
      for (std::size_t i = 0; i < cs.size(); ++i) {
        Reader c(cs[i], "/bundle/cycles/" + std::to_string(i));
        CycleSpec cy;
        cy.name = c.str("name");
        const auto& mp = c.array("map");
        if (static_cast<int>(mp.size()) != dim)
          throw ScenarioError(c.at("map"), "cycle map needs " + std::to_string(dim) + " components");
        const dsl::Symbols st{{"s", 0}, {"t", 1}};
        for (std::size_t k = 0; k < mp.size(); ++k) {
          const std::string p = c.at("map") + "/" + std::to_string(k);
          FieldSpec f = detail::parse_field(mp[k], p, dim, st);
          std::function<void(const dsl::Ast&)> only_st = [&](const dsl::Ast& a) {
            if (a.kind == dsl::Kind::Var && a.name != "s" && a.name != "t")
              throw ScenarioError(p, "cycle maps may only use s and t (found '" + a.name + "')");
            for (const auto& ch : a.args) only_st(*ch);
          };
          only_st(*f.ast);
          cy.map.push_back(std::move(f));
        }
        cy.periodic_s = c.boolean("periodic_s", true);
        cy.periodic_t = c.boolean("periodic_t", true);
        cy.resolution = c.integer("resolution", 256);
        if (cy.resolution < 2) throw ScenarioError(c.at("resolution"), "resolution must be at least 2");
        for (const auto& other : s.cycles)
          if (other.name == cy.name) throw ScenarioError(c.at("name"), "duplicate cycle name '" + cy.name + "'");
        c.finish();
        s.cycles.push_back(std::move(cy));
      }
    }
    b.finish();
  }

  if (root.has("form")) {
    Reader f = root.object("form");
    if (f.has("beta")) s.beta = detail::parse_terms(f.get("beta"), f.at("beta"), dim, 1);
    if (f.has("u")) s.u = detail::parse_field(f.get("u"), f.at("u"), dim);
    if (f.has("ulambda")) s.ulambda = detail::parse_terms(f.get("ulambda"), f.at("ulambda"), dim, 1);
    if (f.has("domain")) s.domain = detail::parse_field(f.get("domain"), f.at("domain"), dim);
    if (f.has("derivatives")) {
      const std::string d = f.str("derivatives");
      if (d != "symbolic" && d != "finite-difference")
        throw ScenarioError(f.at("derivatives"), "expected \"symbolic\" or \"finite-difference\"");
      s.finite_differences = d == "finite-difference";
    }
    f.finish();
  }

  if (const auto* p = root.find("parameters")) {
    if (!p->is_object()) throw ScenarioError("/parameters", "expected an object");
    s.parameters = *p;
  }
  if (root.has("checks")) {
    const auto& cs = root.array("checks");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string p = "/checks/" + std::to_string(i);
      if (!cs[i].is_string()) throw ScenarioError(p, "expected a string");
      const std::string c = cs[i].get<std::string>();
      if (!detail::check_names(s.recipe).count(c))
        throw ScenarioError(p, "unknown check '" + c + "' for recipe " + s.recipe);
      s.checks.push_back(c);
    }
  }
  if (root.has("output")) s.output = root.str("output");
  root.finish();
  detail::validate_parameters(s);
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file '" + path + "'");
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

// ---------------------------------------------------------------------------

namespace detail {

struct Built {
  ManifoldPtr m;
  BundlePtr bundle;
};

inline Expr field(const FieldSpec& f, bool fd) {
  const Expr e = dsl::to_expr(*f.ast);
  return fd ? finite_difference(e) : e;
}

inline BaseForm form_from_terms(const std::vector<TermSpec>& ts, const ManifoldPtr& m, int degree, bool fd) {
  BaseForm out = BaseForm::zero(m, degree);
  for (const auto& t : ts) out = out + BaseForm::monomial(m, field(t.coeff, fd), t.indices);
  return out;
}

/// Evaluates every field on every sample with the checked evaluator, so that
/// domain errors name the offending field.
inline void check_domains(const Scenario& s, const ModelManifold& m) {
  std::vector<const FieldSpec*> fs;
  for (const auto& t : s.curvature) fs.push_back(&t.coeff);
  if (s.beta)
    for (const auto& t : *s.beta) fs.push_back(&t.coeff);
  if (s.ulambda)
    for (const auto& t : *s.ulambda) fs.push_back(&t.coeff);
  if (s.u) fs.push_back(&*s.u);
  if (s.domain) fs.push_back(&*s.domain);
  if (fs.empty()) return;
  Sample smp;
  for (std::size_t i = 0; i < m.sample_count(); ++i) {
    m.sample(i, smp);
    for (const auto* f : fs) {
      try {
        dsl::evaluate(*f->ast, smp.point);
      } catch (const DomainError& e) {
        throw DomainError("field " + f->pointer + " (" + f->text + "): " + e.what() + " at " +
                          detail::point_string(smp.point));
      }
    }
  }
}

inline Built build(const Scenario& s, const RunOptions& ro) {
  auto f = s.factors;
  for (auto& x : f) x.resolution = ro.scaled(x.resolution);
  Built b;
  b.m = make_manifold(std::move(f));
  check_domains(s, *b.m);
  std::vector<Cycle2> gens;
  for (const auto& c : s.cycles) {
    std::vector<dsl::AstPtr> asts;
    for (const auto& fs : c.map) asts.push_back(fs.ast);
    Cycle2 cy{c.name, [asts](double ss, double tt) {
                const double st[2] = {ss, tt};
                Vec p(asts.size());
                for (std::size_t i = 0; i < asts.size(); ++i) p[i] = dsl::evaluate(*asts[i], st);
                return p;
              }};
    cy.periodic_s = c.periodic_s;
    cy.periodic_t = c.periodic_t;
    cy.resolution = c.resolution;
    gens.push_back(std::move(cy));
  }
  b.bundle = make_bundle(b.m, form_from_terms(s.curvature, b.m, 2, s.finite_differences), std::move(gens));
  return b;
}

inline std::vector<double> levels(const ordered_json& p, std::vector<double> dflt) {
  if (!p.contains("levels")) return dflt;
  return p["levels"].get<std::vector<double>>();
}

inline std::map<std::string, double> expected_pairings(const ordered_json& p) {
  std::map<std::string, double> out;
  if (p.contains("expected_pairings"))
    for (auto it = p["expected_pairings"].begin(); it != p["expected_pairings"].end(); ++it)
      out[it.key()] = it.value().get<double>();
  return out;
}

inline void run_recipe(const Scenario& s, const RunOptions& ro, Report& rep) {
  const auto& p = s.parameters;
  rep.parameters()["scenario"] = p;
  if (s.recipe == "construct") {
    recipes::ConstructT2S2 c;
    c.k = p["k"].get<int>();
    c.circle_resolution = s.factors[0].resolution;
    c.sphere_resolution = s.factors[2].resolution;
    c.levels = levels(p, c.levels);
    c.profile.plateau_height = p.value("plateau_height", c.profile.plateau_height);
    c.profile.transition_width = p.value("transition_width", c.profile.transition_width);
    c.profile.eps = p.value("profile_eps", c.profile.eps);
    c.profile.bump_start = p.value("bump_start", c.profile.bump_start);
    c.profile.exp_blend = p.value("exp_blend", c.profile.exp_blend);
    c.profile.g_width = p.value("g_width", c.profile.g_width);
    recipes::construct_t2s2(rep, c, ro);
    return;
  }
  if (s.recipe == "bourgeois") {
    recipes::BourgeoisParams b;
    b.resolution = s.factors[0].resolution;
    b.circle_resolution = s.factors[1].resolution;
    b.r0 = p.value("r0", b.r0);
    b.a = p.value("cutoff_a", b.a);
    b.b = p.value("cutoff_b", b.b);
    recipes::bourgeois(rep, b, ro);
    return;
  }

  const Built b = build(s, ro);
  const bool fd = s.finite_differences;
  std::optional<InvariantForm> alpha;
  if (s.beta && s.u)
    alpha = InvariantForm::one_form(form_from_terms(*s.beta, b.m, 1, fd), field(*s.u, fd), b.bundle);
  auto split_params = [&] {
    recipes::SplitParams sp;
    sp.axis = {p.value("axis", 0)};
    sp.levels = levels(p, sp.levels);
    sp.eps = p.value("eps", 0.0);
    return sp;
  };

  if (s.recipe == "verify-contact") {
    std::optional<recipes::LemmaCheck> lemma;
    if (s.has_check("lemma-volume")) lemma = recipes::LemmaCheck{p.value("lemma_tolerance", 1e-5)};
    recipes::verify_contact(rep, *alpha, ro, lemma);
    if (s.has_check("euler"))
      recipes::euler(rep, *b.bundle, expected_pairings(p), p.value("pairing_tolerance", 1e-3),
                     p.value("pairing_magnitude", false));
    if (s.has_check("split")) recipes::split(rep, *alpha, split_params(), ro);
  } else if (s.recipe == "split") {
    if (s.has_check("contact")) recipes::verify_contact(rep, *alpha, ro, std::nullopt);
    recipes::split(rep, *alpha, split_params(), ro);
  } else if (s.recipe == "euler") {
    recipes::euler(rep, *b.bundle, expected_pairings(p), p.value("pairing_tolerance", 1e-3),
                   p.value("pairing_magnitude", false));
    if (s.has_check("boothby-wang")) recipes::verify_contact(rep, boothby_wang(b.bundle, ro.sweep("boothby-wang")), ro);
  } else if (s.recipe == "contactise") {
    ContactiseOptions opt;
    if (p.contains("axis")) opt.axis = TransverseAxis{p["axis"].get<int>()};
    if (s.domain) opt.domain = field(*s.domain, fd);
    opt.eps = p.value("eps", opt.eps);
    recipes::contactise(rep, field(*s.u, fd), form_from_terms(*s.ulambda, b.m, 1, fd), b.bundle, opt, ro);
  }
}

}  // namespace detail

/// Executes the recipe.  Module errors become error entries of the report.
inline Report run(const Scenario& s, RunOptions ro = {}) {
  if (!ro.tol && s.parameters.contains("tolerance")) ro.tol = s.parameters["tolerance"].get<double>();
  return run_captured(Report(s.name, s.recipe), ro, [&](Report& rep) { detail::run_recipe(s, ro, rep); });
}

}  // namespace cbundle
