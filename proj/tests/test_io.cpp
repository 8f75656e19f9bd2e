#include "doctest.h"

#include <filesystem>

#include "json.hpp"
#include "support.hpp"
#include "wpmec/io.hpp"

using namespace wpmec;
using nlohmann::json;

namespace {

std::string parse_message(const std::string& text) {
  try {
    instance_from_json(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("instance survives a round trip bit for bit") {
  const Instance inst = wpmec::test::random_instance(3, 2, 4, 17);
  const std::string text = instance_to_json(inst);
  const Instance back = instance_from_json(text);
  CHECK(back.tasks.bits == inst.tasks.bits);
  CHECK(back.channels.uplink_gain == inst.channels.uplink_gain);
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 4; ++i) CHECK(back.channels.downlink[k][i] == inst.channels.downlink[k][i]);
  CHECK(back.params.capacitance == inst.params.capacitance);
  CHECK(back.params.slot_duration == inst.params.slot_duration);
  CHECK(instance_to_json(back) == text);
}

TEST_CASE("syntax errors carry line and column") {
  const std::string msg = parse_message("{\n  \"params\": {,\n}");
  CHECK(msg.find("line 2") != std::string::npos);
  CHECK(msg.find("column") != std::string::npos);
}

TEST_CASE("bad values name their key path") {
  json doc = json::parse(instance_to_json(wpmec::test::random_instance(1, 2, 2, 1)));
  json bad = doc;
  bad["params"].erase("tau");
  CHECK(parse_message(bad.dump()).find("/params/tau") != std::string::npos);
  bad = doc;
  bad["tasks"]["A"][1][0] = "many";
  CHECK(parse_message(bad.dump()).find("/tasks/A/1/0") != std::string::npos);
  bad = doc;
  bad["tasks"]["A"][1] = json::array({1.0});
  CHECK(parse_message(bad.dump()).find("ragged") != std::string::npos);
  bad = doc;
  bad["channels"]["h"][0][1][0] = json::array({1.0});
  CHECK(parse_message(bad.dump()).find("/channels/h/0/1/0") != std::string::npos);
}

TEST_CASE("a scalar per-user entry applies to every user") {
  json doc = json::parse(instance_to_json(wpmec::test::random_instance(1, 3, 2, 1)));
  doc["params"]["eta_k"] = 0.5;
  const Instance inst = instance_from_json(doc.dump());
  CHECK(inst.params.harvest_efficiency == std::vector<double>(3, 0.5));
}

TEST_CASE("real numbers are accepted as channel coefficients") {
  json doc = json::parse(instance_to_json(wpmec::test::random_instance(1, 1, 2, 1)));
  doc["channels"]["h"][0][0][0] = 0.25;
  CHECK(instance_from_json(doc.dump()).channels.downlink[0][0](0) == Complex(0.25, 0.0));
}

TEST_CASE("config defaults, round trip and typos") {
  const ExperimentConfig d = config_from_json("{}");
  CHECK(d.M == ExperimentConfig{}.M);
  CHECK(d.schemes.size() == 5);

  ExperimentConfig c;
  c.K = 3;
  c.axis = "A_max";
  c.values = {2e5, 4e5};
  c.schemes = {Scheme::kMyopic};
  c.seed = 99;
  c.solver.gap_tol = 1e-5;
  const std::string text = config_to_json(c);
  CHECK(config_to_json(config_from_json(text)) == text);

  try {
    config_from_json("{\"trails\": 5}");
    FAIL("unknown key accepted");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("/trails") != std::string::npos);
  }
  CHECK_THROWS_AS(config_from_json("{\"solver\": {\"gap\": 1}}"), ParseError);
  CHECK_THROWS_AS(config_from_json("{\"schemes\": [\"greedy\"]}"), ParseError);
  CHECK_THROWS_AS(config_from_json("{\"seed\": -1}"), ParseError);
  CHECK_THROWS_AS(config_from_json("[1]"), ParseError);
}

TEST_CASE("report json") {
  const Instance inst = wpmec::test::random_instance(2, 2, 3, 4);
  const SolveReport r = solve(inst);
  const KktReport k = verify_kkt(inst, r);
  const json doc = json::parse(report_to_json(r, &k));
  CHECK(doc["scheme"] == "joint");
  CHECK(doc["primal_objective"].get<double>() == r.primal_objective);
  CHECK(doc["allocation"]["L"].size() == 2);
  CHECK(doc["allocation"]["Q"].size() == 3);
  CHECK(doc["kkt"]["worst"].get<double>() == k.worst());
  CHECK(doc.contains("dual"));
  CHECK_FALSE(json::parse(report_to_json(r)).contains("kkt"));
}

TEST_CASE("validation json") {
  Instance inst = wpmec::test::random_instance(1, 1, 2, 1);
  inst.tasks.bits(0, 0) = -1.0;
  const json doc = json::parse(validation_to_json(validate_instance(inst)));
  CHECK(doc["ok"] == false);
  CHECK_FALSE(doc["violations"].empty());
}

TEST_CASE("files") {
  const auto path = (std::filesystem::temp_directory_path() / "wpmec_io_test.json").string();
  write_file(path, "{\"K\": 2}");
  CHECK(config_from_json(read_file(path)).K == 2);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_file(path), IoError);
  CHECK_THROWS_AS(write_file("/nonexistent-dir/x.json", "{}"), IoError);
}
