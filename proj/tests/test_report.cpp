#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "treegibbs/boundary_law.hpp"
#include "treegibbs/common.hpp"
#include "treegibbs/estimators.hpp"
#include "treegibbs/model.hpp"
#include "treegibbs/report.hpp"

using namespace treegibbs;

TEST_CASE("model JSON round trip") {
  Json j = {{"type", "potts"}, {"q", 3}, {"d", 2}, {"beta", 1.25}};
  ModelSpec spec = model_from_json(j);
  CHECK(spec.q == 3);
  CHECK(spec.clock_flag);
  CHECK(spec.beta == 1.25);

  ModelSpec back = model_from_json(model_to_json(spec));
  CHECK(back.q == spec.q);
  CHECK(back.d == spec.d);
  CHECK(back.beta == spec.beta);
  CHECK(back.pair_energy == spec.pair_energy);
  CHECK(back.field == spec.field);
  CHECK(back.clock_flag == spec.clock_flag);

  Json c = {{"type", "clock"}, {"q", 4}, {"d", 3}, {"beta", 0.5},
            {"profile", {0.0, 1.0, 1.7}}, {"field", {0.01, 0.0, -0.01, 0.0}}};
  ModelSpec cl = model_from_json(c);
  CHECK(cl.pe(0, 2) == 1.7);
  CHECK(cl.field[0] == 0.01);

  CHECK_THROWS_AS(model_from_json(Json{{"type", "potts"}, {"q", 2}}), config_error);
  CHECK_THROWS_AS(model_from_json(Json{{"type", "xy"}, {"q", 2}, {"d", 2}, {"beta", 1.0}}),
                  config_error);
}

TEST_CASE("explicit pair-energy matrices: nested and flat") {
  Json nested = {{"q", 2}, {"d", 2}, {"beta", 1.0},
                 {"pair_energy", {{0.0, 1.5}, {1.5, 0.0}}}};
  CHECK(model_from_json(nested).pe(0, 1) == 1.5);
  Json flat = {{"q", 2}, {"d", 2}, {"beta", 1.0}, {"pair_energy", {0.0, 1.5, 1.5, 0.0}},
               {"clock_flag", true}};
  ModelSpec m = model_from_json(flat);
  CHECK(m.pe(1, 0) == 1.5);
  CHECK(m.clock_flag);
}

TEST_CASE("records carry schema, build and config echo") {
  Json rec = make_record("chain_info", Json{{"model", {{"q", 2}}}}, Json{{"x", 1}});
  CHECK(rec.at("schema_version") == kSchemaVersion);
  CHECK(rec.at("build") == kBuildId);
  CHECK(rec.at("kind") == "chain_info");
  CHECK(rec.at("config").at("model").at("q") == 2);
  CHECK(rec.at("payload").at("x") == 1);

  std::string l = to_jsonl({rec, rec});
  CHECK(l.find('\n') != std::string::npos);
  CHECK(l == to_jsonl({rec, rec}));  // stable bytes
}

TEST_CASE("NaN-valued fields serialize as null") {
  EstimatorReport r;
  r.name = "x";
  Json j = report_to_json(r);
  CHECK(j.at("estimate").is_null());
}

TEST_CASE("run config parsing, defaults and overrides") {
  Json j = {{"model", {{"type", "potts"}, {"q", 2}, {"d", 2}, {"beta", 2.0}}},
            {"run", {{"command", "estimate"}, {"estimator", "qea"}, {"depths", {2, 4}},
                     {"n_samples", 1500}, {"seed", 99}, {"workers", 3}}}};
  RunConfig cfg = parse_run_config(j);
  CHECK(cfg.model.q == 2);
  CHECK(cfg.command == "estimate");
  CHECK(cfg.estimator == "qea");
  CHECK(cfg.depths == std::vector<int>{2, 4});
  CHECK(cfg.n_samples == 1500);
  CHECK(cfg.seed == 99);
  CHECK(cfg.seed_set);
  CHECK(cfg.workers == 3);
  CHECK(cfg.L == 4);                                  // default
  CHECK(cfg.Ls == std::vector<int>{1, 2, 4, 6});      // default
  CHECK(cfg.distances == std::vector<int>{2, 4, 8, 16});

  Json noseed = {{"model", {{"type", "potts"}, {"q", 2}, {"d", 2}, {"beta", 2.0}}},
                 {"run", {{"command", "estimate"}}}};
  CHECK(!parse_run_config(noseed).seed_set);

  Json single = {{"model", {{"type", "potts"}, {"q", 2}, {"d", 2}, {"beta", 2.0}}},
                 {"run", {{"depth", 6}}}};
  CHECK(parse_run_config(single).depths == std::vector<int>{6});

  CHECK_THROWS_AS(parse_run_config(Json{{"run", Json::object()}}), config_error);
  Json badq = {{"model", {{"type", "potts"}, {"q", 1}, {"d", 2}, {"beta", 2.0}}}};
  CHECK_THROWS_AS(parse_run_config(badq), config_error);
  CHECK_THROWS_AS(load_run_config("/nonexistent/path.json"), config_error);
}

TEST_CASE("CSV emitters quote nothing and keep full precision") {
  OverlapSeries s;
  s.mode = "matched";
  s.depth = 6;
  s.n_values = {1, 2};
  s.vertex_counts = {1, 4};
  s.mean = {0.9007849641908469, 0.875};
  s.se = {0.001, 0.002};
  s.n_samples = 1000;
  std::string csv = overlap_csv(s);
  CHECK(csv.find("0.9007849641908469") != std::string::npos);
  CHECK(csv.rfind("n,vertices,", 0) == 0);

  CovDecay c;
  c.distances = {2, 4};
  c.cov = {0.125, 0.0};
  c.se = {0.01, 0.01};
  c.mean_at_v = {0.5, 0.5};
  c.mean_at_u = 0.5;
  c.L = 2;
  c.n_samples = 1000;
  std::string cs = cov_decay_csv(c);
  CHECK(cs.find("0.125") != std::string::npos);
}
