#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include "marlids/commands.hpp"
#include "marlids/dataset_io.hpp"
#include "marlids/errors.hpp"
#include "marlids/model_io.hpp"
#include "marlids/synthetic.hpp"
#include "temp_dir.hpp"

namespace marlids {
namespace {

using testing_support::slurp;
using testing_support::TempDir;

// BENIGN 12 (one NaN), A 6, B 3 (one Infinity).
std::string fixture_csv() {
  std::ostringstream os;
  os << "Flow ID, Duration, Packets, Label\n";
  int id = 0;
  auto row = [&](const std::string& a, const std::string& b, const std::string& label) {
    os << "f" << id++ << "," << a << "," << b << "," << label << "\n";
  };
  for (int i = 0; i < 11; ++i) row(std::to_string(i), std::to_string(2 * i), "BENIGN");
  row("NaN", "1", "BENIGN");
  for (int i = 0; i < 6; ++i) row(std::to_string(100 + i), "-3", "A");
  for (int i = 0; i < 2; ++i) row(std::to_string(-50 - i), "9", "B");
  row("Infinity", "9", "B");
  return os.str();
}

RunConfig fixture_config() {
  RunConfig cfg;
  cfg.data.drop_columns = {"Flow ID"};
  cfg.data.benign_downsample_target = 8;
  cfg.training.seed = 5;
  return cfg;
}

RunConfig toy_training_config(std::size_t episodes) {
  RunConfig cfg;
  cfg.training.episodes = episodes;
  cfg.training.hidden_layers = {32, 32};
  cfg.training.agent.minibatch_size = 16;
  cfg.training.agent.replay_capacity = 10000;
  cfg.training.seed = 21;
  return cfg;
}

// Writes a separable two-attack toy set and preprocesses it into dir/pre.
void make_toy(const TempDir& dir, const std::vector<ClassSpec>& classes, std::uint64_t seed = 3) {
  write_flows_csv(make_gaussian_flows(classes, {4, 6.0, 0.7, seed}), dir / "toy.csv");
  RunConfig cfg;
  std::ostringstream log;
  cmd_preprocess({dir / "toy.csv"}, cfg, dir / "pre", log);
}

TEST(Preprocess, SummaryMatchesHandCount) {
  TempDir dir;
  const auto csv = dir.write("flows.csv", fixture_csv());
  const auto result = preprocess({csv}, fixture_config());
  std::map<std::string, std::vector<std::size_t>> got;
  for (const auto& c : result.summary.at("classes")) {
    got[c.at("label")] = {c.at("total"), c.at("preprocessed"), c.at("training"), c.at("testing")};
  }
  // 16 records after cleaning and downsampling, 12 to training by largest
  // remainder: BENIGN 6.0, A 4.5, B 1.5; the tie goes to A (label order).
  EXPECT_EQ(got.at("BENIGN"), (std::vector<std::size_t>{12, 11, 6, 2}));
  EXPECT_EQ(got.at("A"), (std::vector<std::size_t>{6, 6, 5, 1}));
  EXPECT_EQ(got.at("B"), (std::vector<std::size_t>{3, 2, 1, 1}));
  EXPECT_EQ(result.train.data.feature_names, (std::vector<std::string>{"Duration", "Packets"}));
  EXPECT_EQ(result.summary.at("config"), fixture_config().to_json());
}

TEST(Preprocess, RerunIsByteIdentical) {
  TempDir dir;
  const auto csv = dir.write("flows.csv", fixture_csv());
  std::ostringstream log;
  cmd_preprocess({csv}, fixture_config(), dir / "a", log);
  cmd_preprocess({csv}, fixture_config(), dir / "b", log);
  for (const char* f : {"train.mids", "test.mids", "summary.json", "config.json"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  const auto train = read_dataset(dir / "a" / "train.mids");
  EXPECT_FALSE(train.normalization.empty());
  EXPECT_GE(train.data.provenance.size(), 3U);
}

TEST(Preprocess, ExclusionWritesSeparateContainer) {
  TempDir dir;
  const auto csv = dir.write("flows.csv", fixture_csv());
  auto cfg = fixture_config();
  cfg.data.exclude_labels = {"A"};
  std::ostringstream log;
  cmd_preprocess({csv}, cfg, dir / "out", log);
  const auto excluded = read_dataset(dir / "out" / "excluded.mids");
  EXPECT_EQ(excluded.data.size(), 6U);
  EXPECT_EQ(read_dataset(dir / "out" / "train.mids").data.label_counts().count("A"), 0U);
}

TEST(Preprocess, MissingInputIsIoError) {
  TempDir dir;
  std::ostringstream log;
  EXPECT_THROW(cmd_preprocess({dir / "absent.csv"}, RunConfig{}, dir / "out", log), IoError);
}

TEST(Train, LogHasRowsPerAgentAndEpisode) {
  TempDir dir;
  make_toy(dir, {{"A", 60}, {"BENIGN", 60}});
  std::ostringstream log;
  cmd_train(dir / "pre" / "train.mids", toy_training_config(5), dir / "m.model", dir / "m.log", log);
  EXPECT_TRUE(std::filesystem::exists(dir / "m.model"));
  const auto rows = read_json_lines(dir / "m.log");
  ASSERT_EQ(rows.size(), 10U);
  std::map<std::string, int> per_agent;
  for (const auto& r : rows) {
    ++per_agent[r.at("agent").get<std::string>()];
    for (const char* key : {"episode", "mean_loss", "mean_reward", "epsilon"}) EXPECT_TRUE(r.contains(key));
  }
  EXPECT_EQ(per_agent.at("A"), 5);
  EXPECT_EQ(per_agent.at("decider"), 5);
  EXPECT_EQ(load_model(dir / "m.model").config().episodes, 5U);
}

TEST(Train, ZeroEpisodesWarns) {
  TempDir dir;
  make_toy(dir, {{"A", 20}, {"BENIGN", 20}});
  std::ostringstream log;
  cmd_train(dir / "pre" / "train.mids", toy_training_config(0), dir / "m.model", dir / "m.log", log);
  EXPECT_NE(log.str().find("warning"), std::string::npos);
  const auto ens = load_model(dir / "m.model");
  const auto fresh = build_ensemble(read_dataset(dir / "pre" / "train.mids"), toy_training_config(0));
  EXPECT_EQ(ens.agent_digests(), fresh.agent_digests());
}

TEST(Train, FixedSeedIsReproducible) {
  TempDir dir;
  make_toy(dir, {{"A", 40}, {"B", 20}, {"BENIGN", 40}});
  std::ostringstream log;
  cmd_train(dir / "pre" / "train.mids", toy_training_config(3), dir / "a.model", dir / "a.log", log);
  cmd_train(dir / "pre" / "train.mids", toy_training_config(3), dir / "b.model", dir / "b.log", log);
  EXPECT_EQ(model_digest(load_model(dir / "a.model")), model_digest(load_model(dir / "b.model")));
  EXPECT_EQ(slurp(dir / "a.model"), slurp(dir / "b.model"));
  EXPECT_EQ(slurp(dir / "a.log"), slurp(dir / "b.log"));
}

TEST(Evaluate, ToyRunIsNearPerfectAndAccuracyIsTrace) {
  TempDir dir;
  make_toy(dir, {{"A", 80}, {"B", 80}, {"BENIGN", 80}});
  std::ostringstream log;
  cmd_train(dir / "pre" / "train.mids", toy_training_config(15), dir / "m.model", dir / "m.log", log);
  cmd_evaluate(dir / "m.model", dir / "pre" / "train.mids", dir / "rep", false, log);
  const auto report = nlohmann::json::parse(slurp(dir / "rep" / "report.json"));
  EXPECT_GE(report.at("accuracy").get<double>(), 0.95);
  EXPECT_EQ(report.at("config"), training_config_to_json(toy_training_config(15).training));

  // Recount accuracy from confusion.csv.
  std::istringstream cm(slurp(dir / "rep" / "confusion.csv"));
  std::string line;
  std::getline(cm, line);
  std::uint64_t trace = 0, total = 0;
  for (std::size_t i = 0; std::getline(cm, line); ++i) {
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    for (std::size_t j = 0; std::getline(cells, cell, ','); ++j) {
      const auto v = std::stoull(cell);
      total += v;
      if (i == j) trace += v;
    }
  }
  EXPECT_DOUBLE_EQ(report.at("accuracy").get<double>(), static_cast<double>(trace) / total);
  for (const char* f : {"report.txt", "roc.csv"}) EXPECT_TRUE(std::filesystem::exists(dir / "rep" / f));
}

TEST(Evaluate, RegistryMismatchIsIncompatible) {
  TempDir dir;
  make_toy(dir, {{"A", 30}, {"BENIGN", 30}});
  std::ostringstream log;
  cmd_train(dir / "pre" / "train.mids", toy_training_config(1), dir / "m.model", dir / "m.log", log);
  TempDir other;
  make_toy(other, {{"Z", 30}, {"BENIGN", 30}});
  const auto model = load_model(dir / "m.model");
  const auto unknown = read_dataset(other / "pre" / "test.mids").data;
  EXPECT_THROW(evaluate_model(model, unknown), IncompatibleError);
  const auto widened = evaluate_model(model, unknown, true);
  EXPECT_EQ(widened.labels, (std::vector<std::string>{"A", "BENIGN", "Z"}));
  // The other container also carries its own normalisation.
  EXPECT_THROW(cmd_evaluate(dir / "m.model", other / "pre" / "test.mids", dir / "rep", true, log), IncompatibleError);
  TempDir wide;
  write_flows_csv(make_gaussian_flows({{"A", 20}, {"BENIGN", 20}}, {6, 6.0, 1.0, 1}), wide / "w.csv");
  cmd_preprocess({wide / "w.csv"}, RunConfig{}, wide / "pre", log);
  EXPECT_THROW(cmd_evaluate(dir / "m.model", wide / "pre" / "test.mids", dir / "rep", false, log), IncompatibleError);
}

TEST(Predict, RowsInOrderWithRowLevelErrors) {
  TempDir dir;
  const auto ds = make_gaussian_flows({{"A", 80}, {"BENIGN", 80}}, {4, 8.0, 0.5, 9});
  write_flows_csv(ds, dir / "toy.csv");
  std::ostringstream log;
  cmd_preprocess({dir / "toy.csv"}, RunConfig{}, dir / "pre", log);
  cmd_train(dir / "pre" / "train.mids", toy_training_config(10), dir / "m.model", dir / "m.log", log);

  // Raw rows, including one with a non-numeric feature.
  std::ostringstream csv;
  csv << "f0,f1,f2,f3,Label\n";
  std::vector<std::string> expected;
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& r = ds.records[i];
    csv << r.features[0] << ',' << r.features[1] << ',' << r.features[2] << ',' << r.features[3] << ",?\n";
    expected.push_back(r.label);
  }
  csv << "1,abc,3,4,?\n";
  dir.write("rows.csv", csv.str());
  std::ostringstream out, errors;
  const auto failures = cmd_predict(dir / "m.model", {dir / "rows.csv", std::nullopt}, DataConfig{}, out, errors);
  EXPECT_EQ(failures, 1U);
  EXPECT_NE(errors.str().find("row 6"), std::string::npos);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "row,label,q_A,q_BENIGN");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    ASSERT_TRUE(std::getline(lines, line));
    EXPECT_EQ(line.substr(0, line.find(',', line.find(',') + 1)), std::to_string(i) + "," + expected[i]);
  }
  EXPECT_FALSE(std::getline(lines, line));

  std::ostringstream one, none;
  const auto& r = ds.records[0];
  std::ostringstream rec;
  rec << r.features[0] << ',' << r.features[1] << ',' << r.features[2] << ',' << r.features[3];
  EXPECT_EQ(cmd_predict(dir / "m.model", {std::nullopt, rec.str()}, DataConfig{}, one, none), 0U);
  EXPECT_NE(one.str().find("0," + r.label), std::string::npos);
  std::ostringstream bad;
  EXPECT_EQ(cmd_predict(dir / "m.model", {std::nullopt, std::string("1,2")}, DataConfig{}, one, bad), 1U);
}

TEST(Adapt, DigestDiffAndDefaults) {
  TempDir dir;
  make_toy(dir, {{"A", 40}, {"B", 40}, {"BENIGN", 40}});
  std::ostringstream log;
  cmd_train(dir / "pre" / "train.mids", toy_training_config(2), dir / "m.model", dir / "m.log", log);
  write_flows_csv(make_gaussian_flows({{"NewAttack", 30}}, {4, 6.0, 0.7, 44}), dir / "new.csv");
  // The new flows go through the same normalisation as the training data.
  const auto raw = clean(load_flows({dir / "new.csv"}));
  const auto norm = read_dataset(dir / "pre" / "train.mids").normalization;
  write_dataset(dir / "new.mids", {apply_zscore(raw, norm), norm});

  AdaptRequest req;
  req.model = dir / "m.model";
  req.new_data = dir / "new.mids";
  req.previous_train = dir / "pre" / "train.mids";
  req.affected = {"NewAttack"};
  req.allow_new_labels = true;
  req.model_out = dir / "adapted.model";
  req.held_out_out = dir / "held.mids";
  req.log_out = dir / "adapt.log";
  const auto diff = cmd_adapt(req, {}, log);
  EXPECT_EQ(diff.at("A").at("status"), "unchanged");
  EXPECT_EQ(diff.at("B").at("status"), "unchanged");
  EXPECT_EQ(diff.at("NewAttack").at("status"), "added");
  EXPECT_EQ(diff.at("decider").at("status"), "changed");
  const auto adapted = load_model(dir / "adapted.model");
  EXPECT_EQ(adapted.registry().size(), 4U);
  // Default adaptation length is 20 episodes: 20 rows for the new agent.
  std::size_t rows = 0;
  for (const auto& r : read_json_lines(dir / "adapt.log")) rows += r.at("agent") == "NewAttack" ? 1 : 0;
  EXPECT_EQ(rows, 20U);
  EXPECT_EQ(read_dataset(dir / "held.mids").data.size(), 6U);

  req.allow_new_labels = false;
  req.affected = {"Other"};
  EXPECT_THROW(cmd_adapt(req, {}, log), ValidationError);
}

TEST(Config, OverridesAndValidation) {
  RunConfig cfg;
  cfg.apply_override("hyperparameters.episodes=12");
  cfg.apply_override("reward.k=7.5");
  cfg.apply_override("data.benign_label=Normal");
  EXPECT_EQ(cfg.training.episodes, 12U);
  EXPECT_EQ(cfg.training.reward.k, 7.5);
  EXPECT_EQ(cfg.data.benign_label, "Normal");
  EXPECT_THROW(cfg.apply_override("hyperparameters.nope=1"), ConfigError);
  EXPECT_THROW(cfg.apply_override("episodes"), ConfigError);
  EXPECT_THROW(cfg.apply_override("hyperparameters.gamma=1"), ConfigError);
  EXPECT_THROW(cfg.apply_override("hyperparameters.epsilon_decay=0"), ConfigError);
  EXPECT_THROW(cfg.apply_override("reward.k=1"), ConfigError);
  EXPECT_EQ(RunConfig::from_json(cfg.to_json()).to_json(), cfg.to_json());
}

TEST(Config, DefaultsFollowPublishedHyperparameters) {
  const RunConfig cfg;
  const auto& t = cfg.training;
  EXPECT_EQ(t.agent.replay_capacity, 10'000'000U);
  EXPECT_EQ(t.agent.minibatch_size, 1'000'000U);
  EXPECT_EQ(t.hidden_layers, (std::vector<std::size_t>{128, 128}));
  EXPECT_EQ(t.agent.adam.learning_rate, 0.01);
  EXPECT_EQ(t.agent.gamma, 0.01);
  EXPECT_EQ(t.agent.epsilon.decay_per_episode, 0.01);
  EXPECT_EQ(t.episodes, 300U);
  EXPECT_EQ(cfg.adapt.episodes, 20U);
  EXPECT_EQ(cfg.adapt.new_data_train_fraction, 0.8);
  EXPECT_EQ(cfg.data.train_fraction, 0.8);
}

TEST(Config, FileLoadingRejectsUnknownKeys) {
  TempDir dir;
  dir.write("ok.json", R"({"hyperparameters": {"episodes": 4}, "seed": 9})");
  const auto cfg = RunConfig::load(dir / "ok.json");
  EXPECT_EQ(cfg.training.episodes, 4U);
  EXPECT_EQ(cfg.training.seed, 9U);
  EXPECT_EQ(cfg.training.hidden_layers, (std::vector<std::size_t>{128, 128}));
  dir.write("bad.json", R"({"hyperparameters": {"epsiodes": 4}})");
  EXPECT_THROW(RunConfig::load(dir / "bad.json"), ConfigError);
  EXPECT_THROW(RunConfig::load(dir / "absent.json"), IoError);
}

#ifdef MARLIDS_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(MARLIDS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const auto p = dir.path().string();
  EXPECT_EQ(run_cli("preprocess " + p + "/absent.csv --out " + p + "/pre"), 2);
  ASSERT_EQ(run_cli("synth --class A:40 --class BENIGN:40 --features 4 --out " + p + "/toy.csv"), 0);
  EXPECT_EQ(run_cli("preprocess " + p + "/toy.csv --out " + p + "/pre --set hyperparameters.gamma=2"), 1);
  EXPECT_EQ(run_cli("preprocess " + p + "/toy.csv --out " + p + "/pre --set nope.key=1"), 1);
  ASSERT_EQ(run_cli("preprocess " + p + "/toy.csv --out " + p + "/pre --seed 4"), 0);
  ASSERT_EQ(run_cli("train " + p + "/pre/train.mids --out " + p + "/m.model --set hyperparameters.episodes=1"
                    " --set hyperparameters.neurons=[8] --set hyperparameters.minibatch_size=8"), 0);
  EXPECT_EQ(run_cli("evaluate " + p + "/m.model " + p + "/pre/test.mids --out " + p + "/rep"), 0);
  ASSERT_EQ(run_cli("synth --class Z:40 --class BENIGN:40 --features 4 --out " + p + "/other.csv"), 0);
  ASSERT_EQ(run_cli("preprocess " + p + "/other.csv --out " + p + "/other"), 0);
  EXPECT_EQ(run_cli("evaluate " + p + "/m.model " + p + "/other/test.mids --out " + p + "/rep2"), 3);
  dir.write("rows.csv", "f0,f1,f2,f3,Label\n1,2,3,4,x\n1,oops,3,4,x\n");
  EXPECT_EQ(run_cli("predict " + p + "/m.model --csv " + p + "/rows.csv --out " + p + "/pred.csv"), 1);
  EXPECT_TRUE(std::filesystem::exists(dir / "pred.csv"));
  EXPECT_EQ(run_cli("adapt " + p + "/m.model " + p + "/other/train.mids --agents Q --out " + p + "/x.model"), 1);
}

TEST(Cli, ConfigFromEnvironment) {
  TempDir dir;
  const auto p = dir.path().string();
  dir.write("cfg.json", R"({"hyperparameters": {"episodes": 2, "neurons": [8], "minibatch_size": 8}})");
  ASSERT_EQ(run_cli("synth --class A:30 --class BENIGN:30 --features 3 --out " + p + "/toy.csv"), 0);
  ASSERT_EQ(run_cli("preprocess " + p + "/toy.csv --out " + p + "/pre"), 0);
  const std::string env = "env " + std::string(kConfigEnvVar) + "=" + p + "/cfg.json ";
  const std::string cmd = env + MARLIDS_CLI_PATH + " train " + p + "/pre/train.mids --out " + p + "/m.model >/dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  const auto ens = load_model(dir / "m.model");
  EXPECT_EQ(ens.config().episodes, 2U);
  EXPECT_EQ(ens.config().hidden_layers, (std::vector<std::size_t>{8}));
  EXPECT_EQ(read_json_lines(dir / "m.model.log.jsonl").size(), 4U);
}
#endif

}  // namespace
}  // namespace marlids
