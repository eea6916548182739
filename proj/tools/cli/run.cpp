#include "run.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include "scenario.hpp"
#include "weaktrans/errors.hpp"
#include "weaktrans/stein.hpp"

namespace weaktrans::cli {

namespace {

using nlohmann::json;

struct Report {
  json body;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string cell(int v) { return std::to_string(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "true" : "false"; }
std::string cell(std::string_view v) { return std::string(v); }

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Eigen::VectorXd(m.row(r))));
  return rows;
}

json to_json(const RankReport& r) {
  return {{"singular_values", to_json(r.singular_values)},
          {"numerical_rank", r.numerical_rank},
          {"tol_used", r.tol_used},
          {"rows", r.rows},
          {"cols", r.cols},
          {"marginal", r.marginal}};
}

void require(bool present, const std::string& field, std::string_view command) {
  if (!present) {
    throw ValidationError("scenario." + field, "required by '" + std::string(command) + "'");
  }
}

void require_grid(const Scenario& sc, std::string_view command) {
  require(sc.model.has_value(), "model", command);
  require(sc.features.has_value(), "features", command);
  require(!sc.theta_grid.empty(), "theta_grid", command);
}

std::vector<std::string> theta_header(const Scenario& sc) {
  std::vector<std::string> h;
  for (const auto& name : sc.model->parameter_names()) h.push_back("theta_" + name);
  return h;
}

void push_theta(std::vector<std::string>& row, const Eigen::VectorXd& theta) {
  for (Eigen::Index i = 0; i < theta.size(); ++i) row.push_back(cell(theta[i]));
}

Eigen::VectorXd lambda_of(const Scenario& sc) { return Eigen::VectorXd::Constant(1, sc.kernel.scale()); }

Report features_command(const Scenario& sc) {
  require_grid(sc, "features");
  Report rep;
  const auto labels = sc.features->labels();
  rep.header = theta_header(sc);
  rep.header.insert(rep.header.end(), labels.begin(), labels.end());
  json points = json::array();
  for (const auto& theta : sc.theta_grid) {
    const auto fv = feature_map(*sc.model, theta, sc.kernel, *sc.features, sc.quadrature);
    std::vector<std::string> row;
    push_theta(row, theta);
    for (Eigen::Index i = 0; i < fv.values.size(); ++i) row.push_back(cell(fv.values[i]));
    rep.rows.push_back(row);
    points.push_back({{"theta", to_json(theta)}, {"values", to_json(fv.values)}});
  }
  rep.body = {{"labels", labels}, {"points", points}};
  return rep;
}

Report jacobian_command(const Scenario& sc) {
  require_grid(sc, "jacobian");
  Report rep;
  const auto labels = sc.features->labels();
  const auto names = sc.model->parameter_names();
  rep.header = theta_header(sc);
  rep.header.push_back("feature");
  for (const auto& n : names) rep.header.push_back("d_" + n);
  rep.header.push_back("d_s");
  json points = json::array();
  const double rtol = sc.tolerances.rank_rtol;
  for (const auto& theta : sc.theta_grid) {
    const auto jd = jacobian(*sc.model, theta, sc.kernel, *sc.features, sc.jacobian_method(),
                             sc.quadrature);
    for (Eigen::Index i = 0; i < jd.features(); ++i) {
      std::vector<std::string> row;
      push_theta(row, theta);
      row.push_back(labels[static_cast<std::size_t>(i)]);
      for (Eigen::Index a = 0; a < jd.d_theta.cols(); ++a) row.push_back(cell(jd.d_theta(i, a)));
      row.push_back(cell(jd.d_lambda(i, 0)));
      rep.rows.push_back(row);
    }
    const RankVerdict sub = check_submersion(jd, rtol);
    points.push_back({{"theta", to_json(theta)},
                      {"d_theta", to_json(jd.d_theta)},
                      {"d_lambda", to_json(jd.d_lambda)},
                      {"theta_rank", numerical_rank(jd.d_theta, rtol).numerical_rank},
                      {"joint", to_json(sub.report)},
                      {"submersion", sub.holds},
                      {"enrichment_gain", enrichment_gain(jd, rtol)}});
  }
  rep.body = {{"method", to_string(sc.jacobian_method())}, {"labels", labels}, {"points", points}};
  return rep;
}

Report transversality_command(const Scenario& sc) {
  require_grid(sc, "transversality");
  require(sc.stratum.has_value(), "stratum", "transversality");
  Report rep;
  rep.header = theta_header(sc);
  for (const char* h : {"level_residual", "on_stratum", "theta_only", "lambda_only", "joint",
                        "transversal", "normal_rank", "codim", "marginal", "submersion"}) {
    rep.header.emplace_back(h);
  }
  json points = json::array();
  int hits = 0, failures = 0;
  for (const auto& theta : sc.theta_grid) {
    const Eigen::VectorXd y =
        feature_map(*sc.model, theta, sc.kernel, *sc.features, sc.quadrature).values;
    const auto jd = jacobian(*sc.model, theta, sc.kernel, *sc.features, sc.jacobian_method(),
                             sc.quadrature);
    const auto cw = check_componentwise(jd, *sc.stratum, y, sc.tolerances);
    const auto tv = check_transversal_at(jd, *sc.stratum, y, sc.tolerances);
    const RankVerdict sub = check_submersion(jd, sc.tolerances.rank_rtol);
    const double residual = sc.stratum->level(y).cwiseAbs().maxCoeff();
    if (tv.on_stratum) ++hits;
    if (!tv.transversal) ++failures;
    std::vector<std::string> row;
    push_theta(row, theta);
    row.push_back(cell(residual));
    row.push_back(cell(tv.on_stratum));
    row.push_back(cell(cw.theta_only));
    row.push_back(cell(cw.lambda_only));
    row.push_back(cell(cw.joint));
    row.push_back(cell(tv.transversal));
    row.push_back(cell(tv.report.numerical_rank));
    row.push_back(cell(sc.stratum->codim()));
    row.push_back(cell(tv.report.marginal));
    row.push_back(cell(sub.holds));
    rep.rows.push_back(row);
    points.push_back({{"theta", to_json(theta)},
                      {"features", to_json(y)},
                      {"level_residual", residual},
                      {"on_stratum", tv.on_stratum},
                      {"theta_only", cw.theta_only},
                      {"lambda_only", cw.lambda_only},
                      {"joint", cw.joint},
                      {"transversal", tv.transversal},
                      {"normal_rank", to_json(tv.report)},
                      {"submersion", sub.holds}});
  }
  rep.body = {{"codim", sc.stratum->codim()},
              {"stratum_hits", hits},
              {"non_transversal_points", failures},
              {"transversal_everywhere", failures == 0},
              {"points", points}};
  return rep;
}

json stieltjes_json(const StieltjesResult& r) {
  return {{"epsilon", r.epsilon},
          {"classical_orders", r.classical_orders},
          {"classical_gaps_relative", to_json(r.classical_gaps)},
          {"classical_gaps_absolute", to_json(r.classical_gaps_abs)},
          {"weak_orders", r.weak_orders},
          {"weak_gaps", to_json(r.weak_gaps)},
          {"classical_coincide", r.classical_coincide},
          {"weak_separate", r.weak_separate}};
}

Report classify_command(const Scenario& sc) {
  require_grid(sc, "classify");
  const DegeneracyReport d = classify(*sc.model, sc.kernel, *sc.features, sc.theta_grid,
                                      sc.thresholds, sc.quadrature, sc.delta);
  Report rep;
  rep.header = theta_header(sc);
  for (const char* h : {"det_G", "sigma_min", "theta_rank", "jet_stacked_rank",
                        "jet_second_order_rank", "features_finite"}) {
    rep.header.emplace_back(h);
  }
  const bool stieltjes = !d.type3.max_weak_gap.empty();
  if (stieltjes) {
    rep.header.emplace_back("stieltjes_classical_gap");
    rep.header.emplace_back("stieltjes_weak_gap");
  }
  for (std::size_t i = 0; i < d.grid.size(); ++i) {
    std::vector<std::string> row;
    push_theta(row, d.grid[i]);
    row.push_back(cell(d.type2.det[i]));
    row.push_back(cell(d.type2.sigma_min[i]));
    row.push_back(cell(d.type2.rank[i]));
    row.push_back(cell(d.type4.stacked_rank[i]));
    row.push_back(cell(d.type4.second_order_rank[i]));
    row.push_back(cell(static_cast<bool>(d.features[i].allFinite())));
    if (stieltjes) {
      row.push_back(cell(d.type3.max_classical_gap[i]));
      row.push_back(cell(d.type3.max_weak_gap[i]));
    }
    rep.rows.push_back(row);
  }
  json type1 = {{"margin", d.type1.margin},
                {"pairs_checked", d.type1.pairs_checked},
                {"flagged", d.type1.flagged}};
  if (d.type1.worst_pair) {
    type1["worst_pair"] = {to_json(d.grid[d.type1.worst_pair->first]),
                           to_json(d.grid[d.type1.worst_pair->second])};
  }
  json type3 = {{"status", to_string(d.type3.status)}};
  if (d.type3.evidence) {
    type3["points_separated"] = d.type3.points_separated;
    type3["points_tested"] = d.type3.max_weak_gap.size();
    type3["weakest_point"] = stieltjes_json(*d.type3.evidence);
  }
  rep.body = {
      {"type0",
       {{"classical_defined", d.type0.classical_defined},
        {"weak_finite", d.type0.weak_finite},
        {"flagged", d.type0.flagged}}},
      {"type1", type1},
      {"type2",
       {{"min_det", d.type2.min_det},
        {"min_sigma", d.type2.min_sigma},
        {"argmin", to_json(d.type2.argmin)},
        {"flagged", d.type2.flagged}}},
      {"type3", type3},
      {"type4",
       {{"min_stacked_rank", d.type4.min_stacked_rank},
        {"max_stacked_rank", d.type4.max_stacked_rank},
        {"full_rank", sc.model->param_dim()},
        {"stacked_rank", d.type4.stacked_rank},
        {"second_order_rank", d.type4.second_order_rank}}},
      {"any_flag", d.any_flag()}};
  const Family fam = sc.model->family();
  if (fam == Family::lognormal || fam == Family::lognormal_stieltjes) {
    // Tilting needs a probability kernel, whatever the scenario's normalization.
    const KernelFamily tilt = KernelFamily::gaussian(sc.kernel.scale(), 1, true);
    const CarlemanResult c =
        carleman_probe(*sc.model, sc.theta_grid.front(), tilt, sc.carleman_j_max, sc.quadrature);
    rep.body["carleman"] = {{"theta", to_json(sc.theta_grid.front())},
                            {"normaliser", c.normaliser},
                            {"j", c.j},
                            {"tilted_moments", c.tilted_moments},
                            {"terms", c.terms},
                            {"partial_sums", c.partial_sums},
                            {"overflow", c.overflow}};
  }
  return rep;
}

Report sweep_command(const Scenario& sc) {
  require_grid(sc, "sweep");
  require(!sc.kernel_scales.empty(), "kernel_grid", "sweep");
  const auto map = make_joint_map(*sc.model, sc.kernel, *sc.features, sc.jacobian_method(),
                                  sc.quadrature);
  SweepIndicator indicator;
  switch (sc.indicator) {
    case SweepIndicatorKind::submersion_fail:
      indicator = SweepIndicator::submersion_fail();
      break;
    case SweepIndicatorKind::info_singular:
      indicator = SweepIndicator::info_singular();
      break;
    case SweepIndicatorKind::stratum_hit:
      indicator = SweepIndicator::stratum_hit(*sc.stratum);
      break;
  }
  const SweepTable table =
      lambda_sweep(map, sc.kernel_scales, sc.theta_grid, indicator, sc.tolerances);
  Report rep;
  rep.header = {"s", "fired", "total", "fraction", "marginal"};
  json rows = json::array();
  for (const auto& r : table.rows) {
    rep.rows.push_back(
        {cell(r.lambda[0]), cell(r.fired), cell(r.total), cell(r.fraction), cell(r.marginal)});
    rows.push_back({{"s", r.lambda[0]},
                    {"fired", r.fired},
                    {"total", r.total},
                    {"fraction", r.fraction},
                    {"marginal", r.marginal}});
  }
  json bad = json::array();
  for (const auto& l : table.bad_lambdas) bad.push_back(l[0]);
  rep.body = {{"indicator", to_string(sc.indicator)},
              {"rows", rows},
              {"bad_scales", bad},
              {"bad_set_isolated", table.bad_set_isolated()}};
  return rep;
}

Report stein_command(const Scenario& sc) {
  require(sc.stein.has_value(), "stein", "stein");
  const SteinBlock& b = *sc.stein;
  if (sc.kernel.dim() != 1) throw ValidationError("scenario.kernel", "stein needs a 1-d kernel");
  const SteinSpec spec = b.dictionary == "hermite"
                             ? SteinSpec::hermite(b.degree, sc.kernel, b.center, b.scale)
                             : SteinSpec::monomials(b.degree, sc.kernel);
  const Eigen::VectorXd psi =
      stein_features(b.candidate, b.candidate_theta, spec, b.target, sc.quadrature);
  const double at_target = weak_stein_discrepancy(ModelSpec::stein_gaussian_target(), b.target,
                                                  spec, b.target, sc.quadrature);
  const auto checks = stein_jacobian_check(spec, b.zero_set, b.rank_rtol, sc.quadrature);
  Report rep;
  rep.header = {"theta_mu", "theta_sigma", "max_abs_psi", "rank", "dictionary_size",
                "sigma_min",  "tol_used",    "marginal",    "surjective"};
  json points = json::array();
  for (const auto& pt : checks) {
    const auto& sv = pt.report.singular_values;
    const double smin = sv.size() ? sv[sv.size() - 1] : 0.0;
    std::vector<std::string> row;
    push_theta(row, pt.theta);
    row.push_back(cell(pt.psi.cwiseAbs().maxCoeff()));
    row.push_back(cell(pt.report.numerical_rank));
    row.push_back(cell(spec.size()));
    row.push_back(cell(smin));
    row.push_back(cell(pt.report.tol_used));
    row.push_back(cell(pt.report.marginal));
    row.push_back(cell(pt.surjective));
    rep.rows.push_back(row);
    points.push_back({{"theta", to_json(pt.theta)},
                      {"psi", to_json(pt.psi)},
                      {"jacobian", to_json(pt.jacobian)},
                      {"rank", to_json(pt.report)},
                      {"surjective", pt.surjective}});
  }
  std::vector<std::string> labels;
  for (const auto& f : spec.dictionary) labels.push_back(f.label);
  rep.body = {{"labels", labels},
              {"candidate_features", to_json(psi)},
              {"candidate_discrepancy", psi.cwiseAbs().maxCoeff()},
              {"target_discrepancy", at_target},
              {"jacobian_columns", {"mu", "sigma", "s"}},
              {"zero_set", points},
              {"note",
               "Only the surjectivity condition is computed; whether the dictionary is "
               "measure-determining is not machine-checked."}};
  return rep;
}

Report behrens_fisher_command(const Scenario& sc) {
  require(sc.behrens_fisher.has_value(), "behrens_fisher", "behrens-fisher");
  const BFConfig& cfg = *sc.behrens_fisher;
  const auto power = power_proxy(cfg);
  const auto nuisance = nuisance_sensitivity(cfg);
  Report rep;
  rep.header = {"s", "sup_nuisance_gap", "signal_gap", "ratio", "w0", "w0_without_prefactor",
                "prefactor_ratio"};
  json rows = json::array();
  for (std::size_t i = 0; i < power.size(); ++i) {
    const auto& p = power[i];
    const double prefactor_ratio = p.w0_first_without_prefactor / p.w0_first;
    rep.rows.push_back({cell(p.s), cell(p.sup_nuisance_gap), cell(p.signal_gap), cell(p.ratio),
                        cell(p.w0_first), cell(p.w0_first_without_prefactor),
                        cell(prefactor_ratio)});
    rows.push_back({{"s", p.s},
                    {"sup_nuisance_gap", p.sup_nuisance_gap},
                    {"argmax_sigma", {nuisance[i].argmax_sigma1, nuisance[i].argmax_sigma2}},
                    {"signal_gap", p.signal_gap},
                    {"ratio", p.ratio},
                    {"w0", p.w0_first},
                    {"w0_without_prefactor", p.w0_first_without_prefactor},
                    {"prefactor_ratio", prefactor_ratio}});
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < nuisance.size(); ++i) {
    decreasing = decreasing && nuisance[i].sup_gap < nuisance[i - 1].sup_gap;
  }
  rep.body = {{"variance_ratio", cfg.variance_ratio()},
              {"rows", rows},
              {"sup_nuisance_gap_decreasing", decreasing},
              {"note",
               "w0 uses the normalized kernel; w0_without_prefactor drops the (2 pi)^(-1/2) "
               "constant and differs by sqrt(2 pi)."}};
  return rep;
}

using Command = std::function<Report(const Scenario&)>;

const std::map<std::string, Command, std::less<>>& command_table() {
  static const std::map<std::string, Command, std::less<>> table = {
      {"features", features_command},
      {"jacobian", jacobian_command},
      {"transversality", transversality_command},
      {"classify", classify_command},
      {"sweep", sweep_command},
      {"stein", stein_command},
      {"behrens-fisher", behrens_fisher_command},
  };
  return table;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string render_csv(const Report& rep) {
  std::string s;
  auto line = [&s](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) s += ',';
      s += fields[i];
    }
    s += '\n';
  };
  line(rep.header);
  for (const auto& r : rep.rows) line(r);
  return s;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, cmd] : command_table()) n.push_back(name);
    return n;
  }();
  return names;
}

int run(std::string_view subcommand, const std::string& scenario_path, const std::string& out_dir,
        std::ostream& err) {
  const auto& table = command_table();
  const auto it = table.find(subcommand);
  if (it == table.end()) {
    err << "unknown subcommand '" << subcommand << "'\n";
    return unknown_subcommand;
  }
  std::string json_text, csv_text;
  try {
    const Scenario sc = load_scenario(scenario_path);
    Report rep = it->second(sc);
    json doc = {{"command", it->first}, {"scenario", sc.resolved}, {"result", rep.body}};
    json_text = doc.dump(2) + "\n";
    csv_text = render_csv(rep);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return validation_error;
  } catch (const DomainError& e) {
    err << "validation error: " << e.what() << "\n";
    return validation_error;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return numerical_failure;
  }
  try {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / (it->first + ".json"), json_text);
    write_file(dir / (it->first + ".csv"), csv_text);
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << "\n";
    return validation_error;
  }
  return ok;
}

}  // namespace weaktrans::cli
