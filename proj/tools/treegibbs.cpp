// treegibbs: chain solvers, tree-indexed estimators and self-checks behind one
// config-driven front end. Subcommands: chain-info, bounds, estimate, verify.
#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "treegibbs/boundary_law.hpp"
#include "treegibbs/common.hpp"
#include "treegibbs/estimators.hpp"
#include "treegibbs/model.hpp"
#include "treegibbs/report.hpp"
#include "treegibbs/tree.hpp"
#include "treegibbs/verify.hpp"

namespace tg = treegibbs;
using tg::Json;

namespace {

struct Flags {
  std::string config_path;
  std::string estimator;
  std::optional<std::string> model_type;
  std::optional<int> q, d;
  std::optional<double> beta;
  std::vector<double> profile;
  std::vector<double> field;
  std::vector<int> depths;
  std::optional<std::int64_t> n_samples;
  std::optional<std::uint64_t> seed;
  std::vector<int> Ls;
  std::optional<int> L;
  std::vector<int> distances;
  std::vector<int> spacings;
  std::optional<int> plan_n;
  std::optional<int> vertex_depth;
  std::optional<int> workers;
  std::optional<int> a;
  std::optional<std::string> mode;
  std::optional<std::string> output;
  bool quick = false;
};

// Flags win over config-file keys. The merged raw JSON is kept as the echo so
// records always carry the exact inputs that produced them.
tg::RunConfig merge_config(const Flags& f, const std::string& command) {
  Json j;
  if (!f.config_path.empty()) j = tg::load_run_config(f.config_path).echo;
  if (!j.contains("model")) j["model"] = Json::object();
  if (!j.contains("run")) j["run"] = Json::object();
  // verify needs no model; keep the parser happy with a placeholder.
  if (command == "verify" && j["model"].empty())
    j["model"] = Json{{"type", "potts"}, {"q", 2}, {"d", 2}, {"beta", 1.0}};
  Json& m = j["model"];
  Json& r = j["run"];
  if (f.model_type) m["type"] = *f.model_type;
  if (f.q) m["q"] = *f.q;
  if (f.d) m["d"] = *f.d;
  if (f.beta) m["beta"] = *f.beta;
  if (!f.profile.empty()) m["profile"] = f.profile;
  if (!f.field.empty()) m["field"] = f.field;
  r["command"] = command;
  if (!f.estimator.empty()) r["estimator"] = f.estimator;
  if (!f.depths.empty()) r["depths"] = f.depths;
  if (f.n_samples) r["n_samples"] = *f.n_samples;
  if (f.seed) r["seed"] = *f.seed;
  if (!f.Ls.empty()) r["Ls"] = f.Ls;
  if (f.L) r["L"] = *f.L;
  if (!f.distances.empty()) r["distances"] = f.distances;
  if (!f.spacings.empty()) r["spacings"] = f.spacings;
  if (f.plan_n) r["plan_n"] = *f.plan_n;
  if (f.vertex_depth) r["vertex_depth"] = *f.vertex_depth;
  if (f.workers) r["workers"] = *f.workers;
  if (f.a) r["a"] = *f.a;
  if (f.mode) r["mode"] = *f.mode;
  if (f.output) r["output"] = *f.output;
  if (f.quick) r["quick"] = true;
  return tg::parse_run_config(j);
}

// Execution/plumbing knobs must not enter the record identity: the same
// experiment rerun with a different worker count or output path has to be
// byte-identical.
Json record_echo(const tg::RunConfig& cfg) {
  Json j = cfg.echo;
  if (j.contains("run")) {
    j["run"].erase("workers");
    j["run"].erase("output");
  }
  return j;
}

std::string output_path(const tg::RunConfig& cfg) {
  if (cfg.output.empty()) return {};
  const char* outdir = std::getenv("TREEGIBBS_OUTDIR");
  if (outdir == nullptr || *outdir == '\0') return cfg.output;
  return std::string(outdir) + "/" + cfg.output;
}

struct Chain {
  tg::BoundaryLaw law;
  tg::ChainKernel kernel;
};

Chain resolve_chain(const tg::ModelSpec& spec) {
  Chain c;
  c.law = spec.zero_field() && spec.clock_flag ? tg::free_law(spec)
                                               : tg::solve_central(spec, spec.reference());
  c.kernel = tg::chain_from_law(spec, c.law);
  return c;
}

void emit(const tg::RunConfig& cfg, const std::vector<Json>& records, const std::string& csv) {
  const std::string jsonl = tg::to_jsonl(records);
  std::cout << jsonl;
  const std::string base = output_path(cfg);
  if (base.empty()) return;
  tg::write_text(base + ".jsonl", jsonl);
  if (!csv.empty()) tg::write_text(base + ".csv", csv);
}

int cmd_chain_info(const tg::RunConfig& cfg) {
  const Chain c = resolve_chain(cfg.model);
  const tg::BoundsReport b = tg::bounds_report(cfg.model, c.kernel.p1);
  const Json payload = tg::chain_info_json(cfg.model, c.law, c.kernel, b);
  emit(cfg, {tg::make_record("chain_info", record_echo(cfg), payload)}, {});
  return 0;
}

int cmd_bounds(const tg::RunConfig& cfg) {
  Json payload;
  payload["model"] = tg::model_to_json(cfg.model);
  if (cfg.model.zero_field() && cfg.model.clock_flag) {
    const Chain c = resolve_chain(cfg.model);
    payload["bounds"] = tg::bounds_to_json(tg::bounds_report(cfg.model, c.kernel.p1));
  } else {
    payload["bounds"] = tg::bounds_to_json(tg::constants(cfg.model));
  }
  emit(cfg, {tg::make_record("bounds", record_echo(cfg), payload)}, {});
  return 0;
}

std::string scalar_csv(const tg::DepthSweep& sweep) {
  std::string csv = "depth,estimate,se,n_samples\n";
  for (const auto& r : sweep.reports) {
    csv += std::to_string(r.depth) + "," + Json(r.estimate).dump() + "," + Json(r.se).dump() +
           "," + std::to_string(r.n_samples) + "\n";
  }
  return csv;
}

int cmd_estimate(const tg::RunConfig& cfg) {
  if (!cfg.seed_set) throw tg::config_error("estimate requires an explicit seed");
  const Chain chain = resolve_chain(cfg.model);
  const tg::RunParams rp{cfg.n_samples, cfg.seed, cfg.workers};
  const Json echo = record_echo(cfg);
  std::vector<Json> records;
  std::string csv;

  if (cfg.estimator == "reconstruction" || cfg.estimator == "qea") {
    const auto run = [&](int depth) {
      return cfg.estimator == "qea"
                 ? tg::estimate_qea(cfg.model, chain.kernel, depth, rp)
                 : tg::estimate_reconstruction(cfg.model, chain.kernel, cfg.a, depth, rp);
    };
    const tg::DepthSweep sweep = tg::depth_sweep(run, cfg.depths);
    for (const auto& r : sweep.reports)
      records.push_back(tg::make_record(cfg.estimator, echo, tg::report_to_json(r)));
    records.push_back(tg::make_record("depth_sweep", echo, tg::depth_sweep_to_json(sweep)));
    csv = scalar_csv(sweep);
  } else if (cfg.estimator == "overlap") {
    if (cfg.mode != "both" && cfg.mode != "matched" && cfg.mode != "mismatched")
      throw tg::config_error("overlap mode must be matched, mismatched or both");
    for (int depth : cfg.depths) {
      const std::vector<int> spacings =
          cfg.spacings.empty() ? tg::default_spacings(64) : cfg.spacings;
      const int n = cfg.plan_n > 0 ? cfg.plan_n : tg::max_plan_n(depth, spacings);
      if (n < 1) throw tg::config_error("overlap: no plan vertex fits the depth");
      const tg::BallGeometry geom(cfg.model.d, depth);
      const tg::BranchPlan plan = tg::branch_plan(geom, n, spacings);
      if (cfg.mode == "both") {
        const tg::OverlapGap g =
            tg::estimate_overlap_gap(cfg.model, chain.kernel, plan, depth, rp);
        records.push_back(tg::make_record("overlap_gap", echo, tg::overlap_gap_to_json(g)));
        csv = tg::overlap_gap_csv(g);
      } else {
        const tg::OverlapMode m = cfg.mode == "matched" ? tg::OverlapMode::kMatched
                                                        : tg::OverlapMode::kMismatched;
        const tg::OverlapSeries s = tg::estimate_overlap(cfg.model, chain.kernel, plan, depth, m, rp);
        records.push_back(tg::make_record("overlap", echo, tg::overlap_to_json(s)));
        csv = tg::overlap_csv(s);
      }
    }
  } else if (cfg.estimator == "bad-rate") {
    const tg::EstimatorReport r =
        tg::estimate_bad_rate(cfg.model, chain.kernel, cfg.Ls, cfg.vertex_depth, rp);
    records.push_back(tg::make_record("bad_rate", echo, tg::report_to_json(r)));
    csv = "L,m_hat\n";
    for (int l : cfg.Ls)
      csv += std::to_string(l) + "," + Json(r.extras.at("m_hat_L" + std::to_string(l))).dump() +
             "\n";
  } else if (cfg.estimator == "cov-decay") {
    const tg::CovDecay c =
        tg::estimate_cov_decay(cfg.model, chain.kernel, cfg.distances, cfg.L, rp);
    records.push_back(tg::make_record("cov_decay", echo, tg::cov_decay_to_json(c)));
    csv = tg::cov_decay_csv(c);
  } else {
    throw tg::config_error("unknown estimator: " + cfg.estimator);
  }
  emit(cfg, records, csv);
  return 0;
}

int cmd_verify(const tg::RunConfig& cfg) {
  const tg::VerifySummary s = tg::run_verify(cfg.quick, cfg.seed);
  const std::string text = tg::verify_text(s);
  std::cout << text;
  const std::string base = output_path(cfg);
  if (!base.empty()) tg::write_text(base + ".txt", text);
  return s.failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gibbs measures on regular trees: boundary laws, broadcasts, estimators"};
  app.require_subcommand(1);
  Flags f;

  const auto add_common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config_path, "JSON config file");
    sub->add_option("--type", f.model_type, "model type: potts | clock");
    sub->add_option("--q", f.q, "number of spin values");
    sub->add_option("--d", f.d, "branching number (d+1 neighbours)");
    sub->add_option("--beta", f.beta, "inverse temperature");
    sub->add_option("--profile", f.profile, "clock pair-energy profile by cyclic distance");
    sub->add_option("--field", f.field, "per-spin external field");
    sub->add_option("--output", f.output, "output base path (writes <base>.jsonl / .csv)");
  };

  CLI::App* ci = app.add_subcommand("chain-info", "boundary law, chain kernel and bounds");
  add_common(ci);
  CLI::App* bo = app.add_subcommand("bounds", "contour/decorrelation constants only");
  add_common(bo);

  CLI::App* es = app.add_subcommand("estimate", "Monte Carlo estimators over broadcasts");
  add_common(es);
  es->add_option("estimator", f.estimator,
                 "reconstruction | qea | overlap | bad-rate | cov-decay");
  es->add_option("--depths", f.depths, "interior depths for the convergence sweep");
  es->add_option("--n-samples", f.n_samples, "replica count (>= 1000)");
  es->add_option("--seed", f.seed, "master seed (mandatory, no clock default)");
  es->add_option("--Ls", f.Ls, "bad-rate truncation sizes, increasing");
  es->add_option("--L", f.L, "contour truncation for cov-decay");
  es->add_option("--distances", f.distances, "cov-decay vertex separations");
  es->add_option("--spacings", f.spacings, "plan spacing overrides");
  es->add_option("--plan-n", f.plan_n, "plan size n (n^2 vertices); 0 = largest fitting");
  es->add_option("--vertex-depth", f.vertex_depth, "bad-rate vertex depth");
  es->add_option("--workers", f.workers, "worker threads (no effect on output bytes)");
  es->add_option("--a", f.a, "conditioned root spin for reconstruction");
  es->add_option("--mode", f.mode, "overlap mode: matched | mismatched | both");

  CLI::App* ve = app.add_subcommand("verify", "self-check matrix against brute-force oracles");
  ve->add_option("--config", f.config_path, "JSON config file");
  ve->add_option("--seed", f.seed, "seed for the randomised cases");
  ve->add_option("--output", f.output, "output base path (writes <base>.txt)");
  ve->add_flag("--quick", f.quick, "reduced matrix for smoke runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    const tg::RunConfig cfg = merge_config(f, command);
    if (command == "chain-info") return cmd_chain_info(cfg);
    if (command == "bounds") return cmd_bounds(cfg);
    if (command == "estimate") return cmd_estimate(cfg);
    return cmd_verify(cfg);
  } catch (const tg::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const tg::guard_error& e) {
    std::cerr << "guard error: " << e.what() << "\n";
    return 3;
  } catch (const tg::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
