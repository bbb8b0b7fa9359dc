#pragma once
#include <json.hpp>
#include <string>
#include <vector>

#include "treegibbs/boundary_law.hpp"
#include "treegibbs/estimators.hpp"
#include "treegibbs/model.hpp"

namespace treegibbs {

using Json = nlohmann::ordered_json;

// Model section: either the explicit fields {q,d,beta,pair_energy,field,
// clock_flag} or a factory form {"type":"potts"|"clock", ...}.
ModelSpec model_from_json(const Json& j);
Json model_to_json(const ModelSpec& spec);

Json bound_to_json(const Bound& b);
Json bounds_to_json(const BoundsReport& b);
Json law_to_json(const BoundaryLaw& law);
Json kernel_to_json(const ChainKernel& k);
Json chain_info_json(const ModelSpec& spec, const BoundaryLaw& law, const ChainKernel& kernel,
                     const BoundsReport& bounds);

Json report_to_json(const EstimatorReport& r);
Json overlap_to_json(const OverlapSeries& s);
Json overlap_gap_to_json(const OverlapGap& g);
Json cov_decay_to_json(const CovDecay& c);
Json depth_sweep_to_json(const DepthSweep& s);

// Record envelope all emitted lines share: schema_version, build id, record
// kind, full config echo, payload.
Json make_record(const std::string& kind, const Json& config_echo, Json payload);

void write_text(const std::string& path, const std::string& text);
std::string to_jsonl(const std::vector<Json>& records);

std::string overlap_csv(const OverlapSeries& s);
std::string overlap_gap_csv(const OverlapGap& g);
std::string cov_decay_csv(const CovDecay& c);

// Parsed run configuration for the CLI (model + run sections).
struct RunConfig {
  ModelSpec model;
  std::string command;    // chain-info | bounds | estimate | verify
  std::string estimator;  // reconstruction | qea | overlap | bad-rate | cov-decay
  std::vector<int> depths{8};
  std::int64_t n_samples = 2000;
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::vector<int> Ls{1, 2, 4, 6};
  int L = 4;
  std::vector<int> spacings;  // empty: default rule
  std::vector<int> distances{2, 4, 8, 16};
  int plan_n = 0;  // 0: largest plan that fits the depth
  int vertex_depth = 8;
  int workers = 1;
  int a = 0;
  std::string mode = "both";  // overlap: matched | mismatched | both
  std::string output;         // base path; empty = stdout only
  bool quick = false;
  Json echo;  // the raw parsed config, echoed into records
};

RunConfig parse_run_config(const Json& j);
RunConfig load_run_config(const std::string& path);

}  // namespace treegibbs
