#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "weaktrans/errors.hpp"

namespace weaktrans::cli {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path + "." + key; }
std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::set<std::string> allowed) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ValidationError(join(path, key), "unknown field");
  }
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path, "must be finite");
  return v;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ValidationError(path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError(path, "expected a string");
  return j.get<std::string>();
}

double number_or(const json& obj, const std::string& key, const std::string& path, double def) {
  return obj.contains(key) ? as_number(obj.at(key), join(path, key)) : def;
}

double positive_or(const json& obj, const std::string& key, const std::string& path, double def) {
  const double v = number_or(obj, key, path, def);
  if (!(v > 0.0)) throw ValidationError(join(path, key), "must be positive");
  return v;
}

std::vector<double> as_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], index(path, i)));
  return out;
}

std::vector<int> as_ints(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_int(j[i], index(path, i)));
  return out;
}

Eigen::VectorXd as_vector(const json& j, const std::string& path) {
  const auto v = as_numbers(j, path);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Either a plain array or {"linspace": [lo, hi, n]}.
std::vector<double> number_grid(const json& j, const std::string& path) {
  if (j.is_object()) {
    check_keys(j, path, {"linspace"});
    const json& ls = j.at("linspace");
    if (!ls.is_array() || ls.size() != 3) {
      throw ValidationError(join(path, "linspace"), "expected [lo, hi, n]");
    }
    const double lo = as_number(ls[0], index(join(path, "linspace"), 0));
    const double hi = as_number(ls[1], index(join(path, "linspace"), 1));
    const int n = as_int(ls[2], index(join(path, "linspace"), 2));
    if (n < 1) throw ValidationError(join(path, "linspace"), "n must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return out;
  }
  return as_numbers(j, path);
}

std::pair<ModelSpec, json> parse_model(const json& j, const std::string& path,
                                       std::set<std::string> extra_keys = {}) {
  std::set<std::string> keys = {"family", "sigma0", "epsilon", "graph"};
  keys.insert(extra_keys.begin(), extra_keys.end());
  check_keys(j, path, keys);
  if (!j.contains("family")) throw ValidationError(join(path, "family"), "required");
  const std::string name = as_string(j.at("family"), join(path, "family"));
  const auto family = family_from_string(name);
  if (!family) throw ValidationError(join(path, "family"), "unknown family '" + name + "'");
  json resolved = {{"family", name}};
  auto reject = [&](const char* key) {
    if (j.contains(key)) {
      throw ValidationError(join(path, key), "not a parameter of family '" + name + "'");
    }
  };
  if (*family != Family::gaussian_location) reject("sigma0");
  if (*family != Family::lognormal_stieltjes) reject("epsilon");
  if (*family != Family::gaussian_mvn) reject("graph");
  try {
    switch (*family) {
      case Family::gaussian_location: {
        const double s0 = positive_or(j, "sigma0", path, 1.0);
        resolved["sigma0"] = s0;
        return {ModelSpec::gaussian_location(s0), resolved};
      }
      case Family::cauchy_location:
        return {ModelSpec::cauchy_location(), resolved};
      case Family::lognormal:
        return {ModelSpec::lognormal(), resolved};
      case Family::lognormal_stieltjes: {
        const double eps = number_or(j, "epsilon", path, 0.5);
        resolved["epsilon"] = eps;
        return {ModelSpec::lognormal_stieltjes(eps), resolved};
      }
      case Family::stein_gaussian_target:
        return {ModelSpec::stein_gaussian_target(), resolved};
      case Family::gaussian_mvn: {
        const std::string gpath = join(path, "graph");
        if (!j.contains("graph")) throw ValidationError(gpath, "required for gaussian_mvn");
        const json& g = j.at("graph");
        check_keys(g, gpath, {"kind", "vertices", "edges"});
        const std::string kind = g.contains("kind") ? as_string(g.at("kind"), join(gpath, "kind"))
                                                    : std::string("explicit");
        if (!g.contains("vertices")) throw ValidationError(join(gpath, "vertices"), "required");
        const int n = as_int(g.at("vertices"), join(gpath, "vertices"));
        Graph graph;
        if (kind == "cycle" || kind == "path") {
          if (g.contains("edges")) {
            throw ValidationError(join(gpath, "edges"), "implied by kind '" + kind + "'");
          }
          graph = kind == "cycle" ? Graph::cycle(n) : Graph::path(n);
        } else if (kind == "explicit") {
          graph.vertices = n;
          const std::string epath = join(gpath, "edges");
          if (!g.contains("edges") || !g.at("edges").is_array()) {
            throw ValidationError(epath, "expected an array of [i, j] pairs");
          }
          for (std::size_t e = 0; e < g.at("edges").size(); ++e) {
            const auto pair = as_ints(g.at("edges")[e], index(epath, e));
            if (pair.size() != 2) throw ValidationError(index(epath, e), "expected [i, j]");
            graph.edges.emplace_back(pair[0], pair[1]);
          }
        } else {
          throw ValidationError(join(gpath, "kind"), "unknown graph kind '" + kind + "'");
        }
        try {
          graph.validate();
        } catch (const DomainError& e) {
          throw ValidationError(gpath, e.what());
        }
        json edges = json::array();
        for (const auto& [a, b] : graph.edges) edges.push_back({a, b});
        resolved["graph"] = {{"kind", kind}, {"vertices", n}, {"edges", edges}};
        return {ModelSpec::gaussian_mvn(graph), resolved};
      }
    }
  } catch (const DomainError& e) {
    throw ValidationError(path, e.what());
  }
  throw ValidationError(join(path, "family"), "unsupported family");
}

void check_theta(const ModelSpec& model, const Eigen::VectorXd& theta, const std::string& path) {
  if (theta.size() != model.param_dim()) {
    throw ValidationError(path, "expected " + std::to_string(model.param_dim()) +
                                    " parameters for " + std::string(model.name()));
  }
  if (!model.in_domain(theta)) throw ValidationError(path, "outside the model's parameter domain");
}

std::vector<Eigen::VectorXd> parse_theta_grid(const json& doc, const ModelSpec& model, json& out) {
  std::vector<Eigen::VectorXd> grid;
  if (doc.contains("theta") && doc.contains("theta_grid")) {
    throw ValidationError("scenario.theta", "give either theta or theta_grid, not both");
  }
  if (doc.contains("theta")) {
    grid.push_back(as_vector(doc.at("theta"), "scenario.theta"));
  } else if (doc.contains("theta_grid")) {
    const std::string path = "scenario.theta_grid";
    const json& g = doc.at("theta_grid");
    check_keys(g, path, {"axes", "points"});
    if (g.contains("axes") == g.contains("points")) {
      throw ValidationError(path, "expected exactly one of 'axes' or 'points'");
    }
    if (g.contains("points")) {
      const json& pts = g.at("points");
      if (!pts.is_array() || pts.empty()) {
        throw ValidationError(join(path, "points"), "expected a non-empty array");
      }
      for (std::size_t i = 0; i < pts.size(); ++i) {
        grid.push_back(as_vector(pts[i], index(join(path, "points"), i)));
      }
    } else {
      const json& axes = g.at("axes");
      const std::string apath = join(path, "axes");
      if (!axes.is_array() || static_cast<int>(axes.size()) != model.param_dim()) {
        throw ValidationError(apath, "expected one [lo, hi, n] triple per parameter");
      }
      std::vector<std::vector<double>> values;
      for (std::size_t a = 0; a < axes.size(); ++a) {
        values.push_back(number_grid(json{{"linspace", axes[a]}}, index(apath, a)));
      }
      // First axis varies slowest.
      std::size_t total = 1;
      for (const auto& v : values) total *= v.size();
      for (std::size_t flat = 0; flat < total; ++flat) {
        Eigen::VectorXd theta(static_cast<Eigen::Index>(values.size()));
        std::size_t rem = flat;
        for (std::size_t a = values.size(); a-- > 0;) {
          theta[static_cast<Eigen::Index>(a)] = values[a][rem % values[a].size()];
          rem /= values[a].size();
        }
        grid.push_back(theta);
      }
    }
  }
  json points = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    check_theta(model, grid[i], doc.contains("theta") ? std::string("scenario.theta")
                                                      : index("scenario.theta_grid.points", i));
    points.push_back(to_json(grid[i]));
  }
  out["theta_grid"] = {{"points", points}};
  return grid;
}

KernelFamily parse_kernel(const json& doc, int dim, json& out) {
  const std::string path = "scenario.kernel";
  const json k = doc.contains("kernel") ? doc.at("kernel") : json::object();
  check_keys(k, path, {"kind", "scale", "normalized"});
  const std::string kind = k.contains("kind") ? as_string(k.at("kind"), join(path, "kind"))
                                              : std::string("gaussian");
  if (kind != "gaussian") throw ValidationError(join(path, "kind"), "unknown kernel '" + kind + "'");
  const double scale = positive_or(k, "scale", path, 1.0);
  bool normalized = false;
  if (k.contains("normalized")) {
    if (!k.at("normalized").is_boolean()) {
      throw ValidationError(join(path, "normalized"), "expected a boolean");
    }
    normalized = k.at("normalized").get<bool>();
  }
  out["kernel"] = {{"kind", kind}, {"scale", scale}, {"dim", dim}, {"normalized", normalized}};
  return KernelFamily::gaussian(scale, dim, normalized);
}

FeatureSpec parse_features(const json& f, const ModelSpec& model, json& out) {
  const std::string path = "scenario.features";
  check_keys(f, path, {"kind", "orders", "max_order", "frequencies", "exponents"});
  if (!f.contains("kind")) throw ValidationError(join(path, "kind"), "required");
  const std::string kind = as_string(f.at("kind"), join(path, "kind"));
  FeatureSpec spec;
  try {
    if (kind == "moments") {
      if (f.contains("orders") == f.contains("max_order")) {
        throw ValidationError(path, "expected exactly one of 'orders' or 'max_order'");
      }
      spec = f.contains("orders")
                 ? FeatureSpec::moments(as_ints(f.at("orders"), join(path, "orders")))
                 : FeatureSpec::moments_upto(as_int(f.at("max_order"), join(path, "max_order")));
    } else if (kind == "charfn") {
      if (!f.contains("frequencies")) throw ValidationError(join(path, "frequencies"), "required");
      spec = FeatureSpec::charfn(as_numbers(f.at("frequencies"), join(path, "frequencies")));
    } else if (kind == "monomials") {
      const std::string epath = join(path, "exponents");
      if (!f.contains("exponents") || !f.at("exponents").is_array()) {
        throw ValidationError(epath, "expected an array of multi-indices");
      }
      std::vector<std::vector<int>> exps;
      for (std::size_t i = 0; i < f.at("exponents").size(); ++i) {
        exps.push_back(as_ints(f.at("exponents")[i], index(epath, i)));
      }
      spec = FeatureSpec::monomials(exps);
    } else if (kind == "graph_statistics") {
      if (!model.multivariate()) {
        throw ValidationError(join(path, "kind"), "graph_statistics needs a gaussian_mvn model");
      }
      spec = FeatureSpec::graph_statistics(model.graph());
    } else {
      throw ValidationError(join(path, "kind"), "unknown feature kind '" + kind + "'");
    }
    spec.validate();
  } catch (const DomainError& e) {
    throw ValidationError(path, e.what());
  }
  if (model.multivariate() && spec.kind != FeatureKind::monomials) {
    throw ValidationError(join(path, "kind"), "gaussian_mvn supports monomial features only");
  }
  if (spec.kind == FeatureKind::monomials) {
    for (std::size_t i = 0; i < spec.exponents.size(); ++i) {
      if (static_cast<int>(spec.exponents[i].size()) != model.dim()) {
        throw ValidationError(index(join(path, "exponents"), i),
                              "length must equal the model dimension");
      }
      int degree = 0;
      for (int e : spec.exponents[i]) degree += e;
      if (model.multivariate() && degree > 2) {
        throw ValidationError(index(join(path, "exponents"), i),
                              "gaussian_mvn supports total degree <= 2");
      }
    }
  }
  json r = {{"kind", kind}};
  switch (spec.kind) {
    case FeatureKind::moments:
      r["orders"] = spec.orders;
      break;
    case FeatureKind::charfn:
      r["frequencies"] = spec.frequencies;
      break;
    default:
      r["exponents"] = spec.exponents;
      break;
  }
  r["labels"] = spec.labels();
  out["features"] = r;
  return spec;
}

Thresholds parse_thresholds(const json& doc, json& out) {
  const std::string path = "scenario.thresholds";
  const json t = doc.contains("thresholds") ? doc.at("thresholds") : json::object();
  check_keys(t, path, {"margin_tol", "sigma_tol", "weak_gap", "classical_gap", "rank_rtol",
                       "jet_rank_rtol"});
  Thresholds th;
  th.margin_tol = positive_or(t, "margin_tol", path, th.margin_tol);
  th.sigma_tol = positive_or(t, "sigma_tol", path, th.sigma_tol);
  th.weak_gap = positive_or(t, "weak_gap", path, th.weak_gap);
  th.classical_gap = positive_or(t, "classical_gap", path, th.classical_gap);
  th.rank_rtol = positive_or(t, "rank_rtol", path, th.rank_rtol);
  th.jet_rank_rtol = positive_or(t, "jet_rank_rtol", path, th.jet_rank_rtol);
  out["thresholds"] = {{"margin_tol", th.margin_tol},       {"sigma_tol", th.sigma_tol},
                       {"weak_gap", th.weak_gap},           {"classical_gap", th.classical_gap},
                       {"rank_rtol", th.rank_rtol},         {"jet_rank_rtol", th.jet_rank_rtol}};
  return th;
}

TransversalityTolerances parse_tolerances(const json& doc, json& out) {
  const std::string path = "scenario.tolerances";
  const json t = doc.contains("tolerances") ? doc.at("tolerances") : json::object();
  check_keys(t, path, {"rank_rtol", "on_stratum_tol", "newton_band"});
  TransversalityTolerances tol;
  tol.rank_rtol = positive_or(t, "rank_rtol", path, tol.rank_rtol);
  tol.on_stratum_tol = positive_or(t, "on_stratum_tol", path, tol.on_stratum_tol);
  tol.newton_band = positive_or(t, "newton_band", path, tol.newton_band);
  out["tolerances"] = {{"rank_rtol", tol.rank_rtol},
                       {"on_stratum_tol", tol.on_stratum_tol},
                       {"newton_band", tol.newton_band}};
  return tol;
}

QuadConfig parse_quadrature(const json& doc, json& out) {
  const std::string path = "scenario.quadrature";
  const json q = doc.contains("quadrature") ? doc.at("quadrature") : json::object();
  check_keys(q, path, {"abs_tol", "rel_tol", "max_levels", "transform"});
  QuadConfig cfg;
  cfg.abs_tol = positive_or(q, "abs_tol", path, cfg.abs_tol);
  cfg.rel_tol = positive_or(q, "rel_tol", path, cfg.rel_tol);
  if (q.contains("max_levels")) {
    cfg.max_levels = as_int(q.at("max_levels"), join(path, "max_levels"));
    if (cfg.max_levels < 1 || cfg.max_levels > 20) {
      throw ValidationError(join(path, "max_levels"), "must be in [1, 20]");
    }
  }
  if (q.contains("transform")) {
    const std::string t = as_string(q.at("transform"), join(path, "transform"));
    if (t == "none") {
      cfg.transform = Transform::none;
    } else if (t == "double_exponential") {
      cfg.transform = Transform::double_exponential;
    } else if (t == "log_substitution") {
      cfg.transform = Transform::log_substitution;
    } else {
      throw ValidationError(join(path, "transform"), "unknown transform '" + t + "'");
    }
  }
  out["quadrature"] = {{"abs_tol", cfg.abs_tol},
                       {"rel_tol", cfg.rel_tol},
                       {"max_levels", cfg.max_levels},
                       {"transform", to_string(cfg.transform)}};
  return cfg;
}

Stratum parse_stratum(const json& s, int ambient, json& out) {
  const std::string path = "scenario.stratum";
  check_keys(s, path, {"kind", "indices", "values", "n"});
  if (!s.contains("kind")) throw ValidationError(join(path, "kind"), "required");
  const std::string kind = as_string(s.at("kind"), join(path, "kind"));
  try {
    if (kind == "coordinate") {
      if (!s.contains("indices") || !s.contains("values")) {
        throw ValidationError(path, "coordinate strata need 'indices' and 'values'");
      }
      const auto idx = as_ints(s.at("indices"), join(path, "indices"));
      const auto vals = as_numbers(s.at("values"), join(path, "values"));
      Stratum st = Stratum::coordinate(ambient, idx, vals);
      out["stratum"] = {{"kind", kind}, {"indices", idx}, {"values", vals}};
      return st;
    }
    if (kind == "determinant") {
      if (!s.contains("n")) throw ValidationError(join(path, "n"), "required");
      const int n = as_int(s.at("n"), join(path, "n"));
      if (n * n != ambient) {
        throw ValidationError(join(path, "n"), "n^2 must equal the feature dimension " +
                                                   std::to_string(ambient));
      }
      out["stratum"] = {{"kind", kind}, {"n", n}};
      return Stratum::determinant(n);
    }
  } catch (const DomainError& e) {
    throw ValidationError(path, e.what());
  }
  throw ValidationError(join(path, "kind"), "unknown stratum kind '" + kind + "'");
}

SteinBlock parse_stein(const json& s, json& out) {
  const std::string path = "scenario.stein";
  check_keys(s, path, {"target", "candidate", "dictionary", "degree", "center", "scale",
                       "zero_set", "rank_rtol"});
  SteinBlock block;
  const ModelSpec target_family = ModelSpec::stein_gaussian_target();
  if (!s.contains("target")) throw ValidationError(join(path, "target"), "required");
  block.target = as_vector(s.at("target"), join(path, "target"));
  check_theta(target_family, block.target, join(path, "target"));

  json candidate_out;
  if (s.contains("candidate")) {
    const std::string cpath = join(path, "candidate");
    auto [model, resolved] = parse_model(s.at("candidate"), cpath, {"theta"});
    if (model.multivariate()) throw ValidationError(cpath, "candidate must be univariate");
    if (!s.at("candidate").contains("theta")) {
      throw ValidationError(join(cpath, "theta"), "required");
    }
    block.candidate = model;
    block.candidate_theta = as_vector(s.at("candidate").at("theta"), join(cpath, "theta"));
    check_theta(model, block.candidate_theta, join(cpath, "theta"));
    candidate_out = resolved;
  } else {
    block.candidate_theta = block.target;
    candidate_out = {{"family", "stein_gaussian_target"}};
  }
  candidate_out["theta"] = to_json(block.candidate_theta);

  if (s.contains("dictionary")) block.dictionary = as_string(s.at("dictionary"), join(path, "dictionary"));
  if (block.dictionary != "hermite" && block.dictionary != "monomials") {
    throw ValidationError(join(path, "dictionary"), "expected 'hermite' or 'monomials'");
  }
  if (s.contains("degree")) block.degree = as_int(s.at("degree"), join(path, "degree"));
  if (block.degree < 1 || block.degree > 12) {
    throw ValidationError(join(path, "degree"), "must be in [1, 12]");
  }
  block.center = number_or(s, "center", path, 0.0);
  block.scale = positive_or(s, "scale", path, 1.0);
  block.rank_rtol = positive_or(s, "rank_rtol", path, block.rank_rtol);
  const std::string zpath = join(path, "zero_set");
  if (s.contains("zero_set")) {
    const json& z = s.at("zero_set");
    if (!z.is_array() || z.empty()) throw ValidationError(zpath, "expected a non-empty array");
    for (std::size_t i = 0; i < z.size(); ++i) {
      block.zero_set.push_back(as_vector(z[i], index(zpath, i)));
      check_theta(target_family, block.zero_set.back(), index(zpath, i));
    }
  } else {
    block.zero_set.push_back(block.target);
  }
  json zs = json::array();
  for (const auto& z : block.zero_set) zs.push_back(to_json(z));
  out["stein"] = {{"target", to_json(block.target)},
                  {"candidate", candidate_out},
                  {"dictionary", block.dictionary},
                  {"degree", block.degree},
                  {"center", block.center},
                  {"scale", block.scale},
                  {"zero_set", zs},
                  {"rank_rtol", block.rank_rtol}};
  return block;
}

BFConfig parse_behrens_fisher(const json& b, json& out) {
  const std::string path = "scenario.behrens_fisher";
  check_keys(b, path, {"mu1", "mu2", "sigma1", "sigma2", "s_grid", "sigma_grid"});
  BFConfig cfg;
  cfg.mu1 = number_or(b, "mu1", path, 0.0);
  cfg.mu2 = number_or(b, "mu2", path, 1.0);
  cfg.sigma1 = positive_or(b, "sigma1", path, 1.0);
  cfg.sigma2 = positive_or(b, "sigma2", path, 1.0);
  if (!b.contains("s_grid")) throw ValidationError(join(path, "s_grid"), "required");
  if (!b.contains("sigma_grid")) throw ValidationError(join(path, "sigma_grid"), "required");
  cfg.s_grid = number_grid(b.at("s_grid"), join(path, "s_grid"));
  cfg.sigma_grid = number_grid(b.at("sigma_grid"), join(path, "sigma_grid"));
  if (cfg.mu1 == cfg.mu2) {
    throw ValidationError(join(path, "mu2"), "the power table needs mu1 != mu2");
  }
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw ValidationError(path, e.what());
  }
  out["behrens_fisher"] = {{"mu1", cfg.mu1},       {"mu2", cfg.mu2},
                           {"sigma1", cfg.sigma1}, {"sigma2", cfg.sigma2},
                           {"s_grid", cfg.s_grid}, {"sigma_grid", cfg.sigma_grid}};
  return cfg;
}

}  // namespace

JacobianMethod Scenario::jacobian_method() const {
  if (jacobian) return *jacobian;
  return model && model->has_analytic_score() ? JacobianMethod::analytic_score
                                              : JacobianMethod::finite_difference;
}

namespace {

Scenario parse_document(const json& doc) {
  const std::string root = "scenario";
  check_keys(doc, root,
             {"name", "description", "model", "theta", "theta_grid", "kernel", "features",
              "jacobian", "thresholds", "tolerances", "quadrature", "delta", "stratum",
              "kernel_grid", "sweep", "carleman", "stein", "behrens_fisher"});
  Scenario sc;
  json& out = sc.resolved;
  out = json::object();
  if (doc.contains("name")) sc.name = as_string(doc.at("name"), join(root, "name"));
  out["name"] = sc.name;
  if (doc.contains("description")) {
    out["description"] = as_string(doc.at("description"), join(root, "description"));
  }

  if (doc.contains("model")) {
    auto [model, resolved] = parse_model(doc.at("model"), join(root, "model"));
    sc.model = model;
    out["model"] = resolved;
    sc.theta_grid = parse_theta_grid(doc, *sc.model, out);
  } else {
    for (const char* key : {"theta", "theta_grid", "features", "stratum"}) {
      if (doc.contains(key)) throw ValidationError(join(root, key), "requires a model block");
    }
  }
  sc.kernel = parse_kernel(doc, sc.model ? sc.model->dim() : 1, out);
  if (doc.contains("features")) {
    sc.features = parse_features(doc.at("features"), *sc.model, out);
  }
  if (doc.contains("jacobian")) {
    const std::string m = as_string(doc.at("jacobian"), join(root, "jacobian"));
    if (m == "analytic_score") {
      sc.jacobian = JacobianMethod::analytic_score;
    } else if (m == "finite_difference") {
      sc.jacobian = JacobianMethod::finite_difference;
    } else if (m != "auto") {
      throw ValidationError(join(root, "jacobian"), "expected analytic_score, finite_difference or auto");
    }
  }
  if (sc.model && sc.jacobian == JacobianMethod::analytic_score && !sc.model->has_analytic_score()) {
    throw ValidationError(join(root, "jacobian"), "no analytic score for this family");
  }
  if (sc.model) out["jacobian"] = to_string(sc.jacobian_method());
  sc.thresholds = parse_thresholds(doc, out);
  sc.tolerances = parse_tolerances(doc, out);
  sc.quadrature = parse_quadrature(doc, out);
  if (doc.contains("delta")) {
    sc.delta = as_number(doc.at("delta"), join(root, "delta"));
    if (sc.delta < 0.0) throw ValidationError(join(root, "delta"), "must be nonnegative");
  }
  out["delta"] = sc.delta;
  if (doc.contains("stratum")) {
    if (!sc.features) throw ValidationError(join(root, "stratum"), "requires a features block");
    sc.stratum = parse_stratum(doc.at("stratum"), sc.features->size(), out);
  }
  if (doc.contains("kernel_grid")) {
    const std::string path = join(root, "kernel_grid");
    check_keys(doc.at("kernel_grid"), path, {"scales"});
    if (!doc.at("kernel_grid").contains("scales")) {
      throw ValidationError(join(path, "scales"), "required");
    }
    sc.kernel_scales = number_grid(doc.at("kernel_grid").at("scales"), join(path, "scales"));
    for (std::size_t i = 0; i < sc.kernel_scales.size(); ++i) {
      if (!(sc.kernel_scales[i] > 0.0)) {
        throw ValidationError(index(join(path, "scales"), i), "must be positive");
      }
    }
    out["kernel_grid"] = {{"scales", sc.kernel_scales}};
  }
  if (doc.contains("sweep")) {
    const std::string path = join(root, "sweep");
    check_keys(doc.at("sweep"), path, {"indicator"});
    if (doc.at("sweep").contains("indicator")) {
      const std::string ind = as_string(doc.at("sweep").at("indicator"), join(path, "indicator"));
      if (ind == "submersion_fail") {
        sc.indicator = SweepIndicatorKind::submersion_fail;
      } else if (ind == "info_singular") {
        sc.indicator = SweepIndicatorKind::info_singular;
      } else if (ind == "stratum_hit") {
        if (!sc.stratum) throw ValidationError(join(path, "indicator"), "stratum_hit needs a stratum block");
        sc.indicator = SweepIndicatorKind::stratum_hit;
      } else {
        throw ValidationError(join(path, "indicator"), "unknown indicator '" + ind + "'");
      }
    }
  }
  out["sweep"] = {{"indicator", to_string(sc.indicator)}};
  if (doc.contains("carleman")) {
    const std::string path = join(root, "carleman");
    check_keys(doc.at("carleman"), path, {"j_max"});
    if (doc.at("carleman").contains("j_max")) {
      sc.carleman_j_max = as_int(doc.at("carleman").at("j_max"), join(path, "j_max"));
      if (sc.carleman_j_max < 1 || sc.carleman_j_max > 100) {
        throw ValidationError(join(path, "j_max"), "must be in [1, 100]");
      }
    }
  }
  out["carleman"] = {{"j_max", sc.carleman_j_max}};
  if (doc.contains("stein")) sc.stein = parse_stein(doc.at("stein"), out);
  if (doc.contains("behrens_fisher")) {
    sc.behrens_fisher = parse_behrens_fisher(doc.at("behrens_fisher"), out);
  }
  return sc;
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) throw ValidationError("scenario", "expected a JSON object");
  try {
    return parse_document(doc);
  } catch (const DomainError& e) {
    throw ValidationError("scenario", e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path, "cannot open scenario file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path, std::string("malformed JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

}  // namespace weaktrans::cli
