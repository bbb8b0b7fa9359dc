#include "treegibbs/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace treegibbs {
namespace {

Json num_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

std::vector<double> parse_matrix(const Json& j, int q, const char* what) {
  std::vector<double> out;
  if (!j.is_array()) throw config_error(std::string("config: ") + what + " must be an array");
  if (!j.empty() && j.front().is_array()) {
    for (const auto& row : j) {
      if (static_cast<int>(row.size()) != q)
        throw config_error(std::string("config: ragged ") + what);
      for (const auto& v : row) out.push_back(v.get<double>());
    }
  } else {
    for (const auto& v : j) out.push_back(v.get<double>());
  }
  if (static_cast<int>(out.size()) != q * q)
    throw config_error(std::string("config: ") + what + " must be q x q");
  return out;
}

}  // namespace

ModelSpec model_from_json(const Json& j) {
  if (!j.is_object()) throw config_error("config: model section must be an object");
  try {
    const int q = j.at("q").get<int>();
    const int d = j.at("d").get<int>();
    const double beta = j.at("beta").get<double>();
    std::vector<double> field;
    if (j.contains("field")) field = j.at("field").get<std::vector<double>>();

    if (j.contains("type")) {
      const std::string type = j.at("type").get<std::string>();
      if (type == "potts") return make_potts(q, d, beta, field);
      if (type == "clock")
        return make_clock(q, d, beta, j.at("profile").get<std::vector<double>>(), field);
      throw config_error("config: unknown model type '" + type + "'");
    }
    ModelSpec spec;
    spec.q = q;
    spec.d = d;
    spec.beta = beta;
    spec.pair_energy = parse_matrix(j.at("pair_energy"), q, "pair_energy");
    spec.field = field.empty() ? std::vector<double>(static_cast<size_t>(q), 0.0) : field;
    spec.clock_flag = j.value("clock_flag", false);
    validate(spec);
    return spec;
  } catch (const Json::exception& e) {
    throw config_error(std::string("config: bad model section: ") + e.what());
  }
}

Json model_to_json(const ModelSpec& spec) {
  Json pe = Json::array();
  for (int i = 0; i < spec.q; ++i) {
    Json row = Json::array();
    for (int k = 0; k < spec.q; ++k) row.push_back(spec.pe(i, k));
    pe.push_back(row);
  }
  return Json{{"q", spec.q},          {"d", spec.d},
              {"beta", spec.beta},    {"pair_energy", pe},
              {"field", spec.field},  {"clock_flag", spec.clock_flag}};
}

Json bound_to_json(const Bound& b) {
  return Json{{"value", num_or_null(b.value)}, {"vacuous", b.vacuous}, {"divergent", b.divergent}};
}

Json bounds_to_json(const BoundsReport& b) {
  return Json{{"delta0", num_or_null(b.delta0)},
              {"epsilon1", bound_to_json(b.epsilon1)},
              {"p1", num_or_null(b.p1)},
              {"lambda_p1", num_or_null(b.lambda_p1)},
              {"lambda_p1_quoted_form", num_or_null(b.lambda_p1_quoted_form)},
              {"lambda_forms_agree", b.lambda_forms_agree},
              {"epsilon2", bound_to_json(b.epsilon2)},
              {"eig_lower", num_or_null(b.eig_lower)},
              {"gap_condition", b.gap_condition},
              {"central_admissible", b.central_admissible}};
}

Json law_to_json(const BoundaryLaw& law) {
  return Json{{"x", law.x}, {"residual", law.residual}};
}

Json kernel_to_json(const ChainKernel& k) {
  Json rows = Json::array();
  for (int i = 0; i < k.q; ++i) {
    Json row = Json::array();
    for (int j = 0; j < k.q; ++j) row.push_back(k.row(i)[j]);
    rows.push_back(row);
  }
  return Json{{"q", k.q},
              {"P", rows},
              {"marginal", k.marginal},
              {"p1", k.p1},
              {"lambda2", k.lambda2},
              {"irreducible_aperiodic", k.irreducible_aperiodic},
              {"row_sum_err", k.row_sum_err},
              {"invariance_err", k.invariance_err}};
}

Json chain_info_json(const ModelSpec& spec, const BoundaryLaw& law, const ChainKernel& kernel,
                     const BoundsReport& bounds) {
  return Json{{"model", model_to_json(spec)},
              {"boundary_law", law_to_json(law)},
              {"kernel", kernel_to_json(kernel)},
              {"bounds", bounds_to_json(bounds)}};
}

Json report_to_json(const EstimatorReport& r) {
  Json extras = Json::object();
  for (const auto& [k, v] : r.extras) extras[k] = num_or_null(v);
  return Json{{"name", r.name},
              {"estimate", num_or_null(r.estimate)},
              {"se", num_or_null(r.se)},
              {"n_samples", r.n_samples},
              {"depth", r.depth},
              {"L", r.L},
              {"seed", r.seed},
              {"extras", extras}};
}

Json overlap_to_json(const OverlapSeries& s) {
  return Json{{"mode", s.mode},
              {"depth", s.depth},
              {"n_values", s.n_values},
              {"vertex_counts", s.vertex_counts},
              {"mean", s.mean},
              {"se", s.se},
              {"n_samples", s.n_samples},
              {"seed", s.seed}};
}

Json overlap_gap_to_json(const OverlapGap& g) {
  return Json{{"matched", overlap_to_json(g.matched)},
              {"mismatched", overlap_to_json(g.mismatched)},
              {"gap", num_or_null(g.gap)},
              {"gap_se", num_or_null(g.gap_se)}};
}

Json cov_decay_to_json(const CovDecay& c) {
  return Json{{"distances", c.distances},
              {"cov", c.cov},
              {"se", c.se},
              {"mean_at_u", num_or_null(c.mean_at_u)},
              {"mean_at_v", c.mean_at_v},
              {"fitted_rate", num_or_null(c.fitted_rate)},
              {"L", c.L},
              {"n_samples", c.n_samples},
              {"seed", c.seed}};
}

Json depth_sweep_to_json(const DepthSweep& s) {
  Json reports = Json::array();
  for (const auto& r : s.reports) reports.push_back(report_to_json(r));
  return Json{{"depths", s.depths},
              {"reports", reports},
              {"deltas", s.deltas},
              {"delta_se", s.delta_se},
              {"converged", s.converged}};
}

Json make_record(const std::string& kind, const Json& config_echo, Json payload) {
  return Json{{"schema_version", kSchemaVersion},
              {"build", kBuildId},
              {"kind", kind},
              {"config", config_echo},
              {"payload", std::move(payload)}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open output file: " + path);
  out << text;
  if (!out) throw config_error("write failed: " + path);
}

std::string to_jsonl(const std::vector<Json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::string overlap_csv(const OverlapSeries& s) {
  std::ostringstream os;
  os << "n,vertices,mode,mean,se\n";
  for (size_t i = 0; i < s.mean.size(); ++i)
    os << s.n_values[i] << ',' << s.vertex_counts[i] << ',' << s.mode << ','
       << Json(s.mean[i]).dump() << ',' << Json(s.se[i]).dump() << '\n';
  return os.str();
}

std::string overlap_gap_csv(const OverlapGap& g) {
  std::ostringstream os;
  os << "n,vertices,matched_mean,matched_se,mismatched_mean,mismatched_se\n";
  for (size_t i = 0; i < g.matched.mean.size(); ++i)
    os << g.matched.n_values[i] << ',' << g.matched.vertex_counts[i] << ','
       << Json(g.matched.mean[i]).dump() << ',' << Json(g.matched.se[i]).dump() << ','
       << Json(g.mismatched.mean[i]).dump() << ',' << Json(g.mismatched.se[i]).dump() << '\n';
  return os.str();
}

std::string cov_decay_csv(const CovDecay& c) {
  std::ostringstream os;
  os << "distance,cov,se,mean_at_v\n";
  for (size_t i = 0; i < c.cov.size(); ++i)
    os << c.distances[i] << ',' << Json(c.cov[i]).dump() << ',' << Json(c.se[i]).dump() << ','
       << Json(c.mean_at_v[i]).dump() << '\n';
  return os.str();
}

RunConfig parse_run_config(const Json& j) {
  if (!j.is_object() || !j.contains("model"))
    throw config_error("config: missing model section");
  RunConfig cfg;
  cfg.echo = j;
  cfg.model = model_from_json(j.at("model"));
  const Json run = j.value("run", Json::object());
  try {
    cfg.command = run.value("command", std::string{});
    cfg.estimator = run.value("estimator", std::string{});
    if (run.contains("depths")) cfg.depths = run.at("depths").get<std::vector<int>>();
    if (run.contains("depth")) cfg.depths = {run.at("depth").get<int>()};
    if (run.contains("n_samples")) cfg.n_samples = run.at("n_samples").get<std::int64_t>();
    if (run.contains("seed")) {
      cfg.seed = run.at("seed").get<std::uint64_t>();
      cfg.seed_set = true;
    }
    if (run.contains("Ls")) cfg.Ls = run.at("Ls").get<std::vector<int>>();
    if (run.contains("L")) cfg.L = run.at("L").get<int>();
    if (run.contains("spacings")) cfg.spacings = run.at("spacings").get<std::vector<int>>();
    if (run.contains("distances")) cfg.distances = run.at("distances").get<std::vector<int>>();
    cfg.plan_n = run.value("plan_n", 0);
    cfg.vertex_depth = run.value("vertex_depth", 8);
    cfg.workers = run.value("workers", 1);
    cfg.a = run.value("a", 0);
    cfg.mode = run.value("mode", std::string{"both"});
    cfg.output = run.value("output", std::string{});
    cfg.quick = run.value("quick", false);
  } catch (const Json::exception& e) {
    throw config_error(std::string("config: bad run section: ") + e.what());
  }
  for (int n : cfg.depths)
    if (n < 0) throw config_error("config: negative depth");
  if (cfg.depths.empty()) throw config_error("config: empty depth list");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw config_error(std::string("config: parse failure: ") + e.what());
  }
  return parse_run_config(j);
}

}  // namespace treegibbs
