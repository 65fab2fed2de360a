#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "lgr/cli.hpp"
#include "lgr/data.hpp"
#include "lgr/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliFixture {
  fs::path dir;
  std::ostringstream out;
  std::ostringstream err;

  CliFixture() {
    dir = fs::temp_directory_path() / ("lgr_cli_" + std::to_string(::getpid()) + "_" +
                                       std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~CliFixture() { fs::remove_all(dir); }

  static int& counter() {
    static int value = 0;
    return value;
  }

  std::string file(const std::string& name) const { return (dir / name).string(); }

  int run(std::vector<std::string> args) {
    out.str("");
    err.str("");
    return lgr::cli::run(args, out, err);
  }

  static std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

}  // namespace

TEST_CASE("gen-data writes the requested CSV and is seed-deterministic") {
  CliFixture fx;
  const std::string a = fx.file("a.csv");
  const std::string b = fx.file("b.csv");
  CHECK(fx.run({"gen-data", "--generator", "cross2d", "--n", "50", "--noise", "0.2",
                "--seed", "1", "--out", a}) == lgr::cli::kOk);
  CHECK(fx.run({"gen-data", "--generator", "cross2d", "--n", "50", "--noise", "0.2",
                "--seed", "1", "--out", b}) == lgr::cli::kOk);
  CHECK(CliFixture::slurp(a) == CliFixture::slurp(b));

  std::ifstream in(a);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x1,x2,y,y_clean");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 50);
}

TEST_CASE("gen-data rejects bad arguments with a usage exit code") {
  CliFixture fx;
  CHECK(fx.run({"gen-data", "--generator", "sine", "--n", "0", "--out", fx.file("x.csv")}) ==
        lgr::cli::kUsageError);
  CHECK(fx.err.str().find("n") != std::string::npos);
  CHECK(fx.run({"gen-data", "--generator", "nope", "--out", fx.file("x.csv")}) ==
        lgr::cli::kUsageError);
  CHECK(fx.run({"gen-data"}) == lgr::cli::kUsageError);  // --generator is required
}

TEST_CASE("train then predict round-trips through model files") {
  CliFixture fx;
  const std::string data = fx.file("train.csv");
  REQUIRE(fx.run({"gen-data", "--generator", "sine", "--n", "80", "--noise", "0.05",
                  "--seed", "2", "--out", data}) == lgr::cli::kOk);

  const std::string model = fx.file("model.json");
  const std::string report = fx.file("report.json");
  CHECK(fx.run({"train", "--method", "lgr", "--dataset", data, "--select-columns", "x*",
                "--iters", "50", "--out", model, "--report", report}) == lgr::cli::kOk);

  const json rep = json::parse(CliFixture::slurp(report));
  CHECK(rep.at("command") == "train");
  CHECK(rep.at("metrics").contains("nmse"));
  CHECK(rep.at("metrics").at("model_count").get<int>() >= 1);
  CHECK(rep.at("config").at("method") == "lgr");
  CHECK(rep.at("config").at("iters") == 50);
  CHECK(rep.at("elbo").at("sweeps").get<int>() >= 80);

  const std::string preds = fx.file("preds.csv");
  CHECK(fx.run({"predict", "--model", model, "--dataset", data, "--select-columns", "x*",
                "--out", preds}) == lgr::cli::kOk);
  std::ifstream in(preds);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x1,mean,variance");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 80);

  // batch predictions in the file equal predict_batch on the loaded model
  const auto loaded = lgr::load_lgr_model(model);
  const auto d = lgr::load_csv(data, "y", {"x*"});
  const auto [means, vars] = loaded.predict_batch(d.inputs);
  std::ifstream again(preds);
  std::getline(again, header);
  for (int i = 0; i < 3; ++i) {
    std::getline(again, line);
    const auto last_comma = line.rfind(',');
    const auto mid_comma = line.rfind(',', last_comma - 1);
    const double mean = std::stod(line.substr(mid_comma + 1, last_comma - mid_comma - 1));
    CHECK(mean == doctest::Approx(means(i)).epsilon(1e-15));
  }
}

TEST_CASE("train lwr with one effective center fits a line almost exactly") {
  CliFixture fx;
  const std::string data = fx.file("line.csv");
  {
    lgr::Dataset d;
    d.inputs.resize(40, 1);
    d.targets.resize(40);
    for (int i = 0; i < 40; ++i) {
      d.inputs(i, 0) = i / 40.0;
      d.targets(i) = 2.0 * d.inputs(i, 0);
    }
    lgr::save_csv(data, d);
  }
  const std::string report = fx.file("lwr_report.json");
  CHECK(fx.run({"train", "--method", "lwr", "--dataset", data, "--w-gen", "0.1",
                "--lambda-init", "5.0", "--out", fx.file("lwr.json"), "--report",
                report}) == lgr::cli::kOk);
  const json rep = json::parse(CliFixture::slurp(report));
  CHECK(rep.at("metrics").at("model_count") == 1);
  CHECK(rep.at("metrics").at("mse").get<double>() < 1e-6);
}

TEST_CASE("deterministic training reports are byte-identical") {
  CliFixture fx;
  const std::string data = fx.file("train.csv");
  REQUIRE(fx.run({"gen-data", "--generator", "sine", "--n", "60", "--noise", "0.1",
                  "--seed", "3", "--out", data}) == lgr::cli::kOk);
  const std::string report = fx.file("r.json");
  std::vector<std::string> bytes;
  for (int round = 0; round < 2; ++round) {
    CHECK(fx.run({"train", "--dataset", data, "--select-columns", "x*", "--iters", "30",
                  "--deterministic", "--seed", "7", "--out", fx.file("m.json"),
                  "--report", report}) == lgr::cli::kOk);
    bytes.push_back(CliFixture::slurp(report));
  }
  const std::string& b1 = bytes[0];
  CHECK(b1 == bytes[1]);
  CHECK(b1.find("\"fit_seconds\": 0.0") != std::string::npos);
}

TEST_CASE("config validation enumerates every violated key") {
  CliFixture fx;
  const std::string data = fx.file("train.csv");
  REQUIRE(fx.run({"gen-data", "--generator", "sine", "--n", "20", "--noise", "0.1",
                  "--seed", "4", "--out", data}) == lgr::cli::kOk);
  CHECK(fx.run({"train", "--dataset", data, "--w-gen", "1.5", "--iters", "-2",
                "--learning-rate", "0", "--report", fx.file("r.json")}) ==
        lgr::cli::kUsageError);
  const std::string msg = fx.err.str();
  CHECK(msg.find("w_gen") != std::string::npos);
  CHECK(msg.find("iters") != std::string::npos);
  CHECK(msg.find("learning_rate") != std::string::npos);
}

TEST_CASE("a config file mirrors flags and flags override it") {
  CliFixture fx;
  const std::string data = fx.file("train.csv");
  REQUIRE(fx.run({"gen-data", "--generator", "sine", "--n", "40", "--noise", "0.1",
                  "--seed", "5", "--out", data}) == lgr::cli::kOk);

  const std::string conf = fx.file("run.conf");
  {
    std::ofstream c(conf);
    c << "dataset=" << data << "\n";
    c << "select-columns=x*\n";
    c << "iters=25\n";
    c << "w-gen=0.4\n";
  }
  const std::string report = fx.file("r.json");
  CHECK(fx.run({"train", "--config", conf, "--report", report,
                "--out", fx.file("m.json"), "--w-gen", "0.6"}) == lgr::cli::kOk);
  const json rep = json::parse(CliFixture::slurp(report));
  CHECK(rep.at("config").at("iters") == 25);          // from file
  CHECK(rep.at("config").at("w_gen") == 0.6);          // flag wins

  // unknown keys in the config file are rejected
  {
    std::ofstream c(conf, std::ios::app);
    c << "mystery-knob=1\n";
  }
  CHECK(fx.run({"train", "--config", conf, "--report", report}) == lgr::cli::kUsageError);
}

TEST_CASE("predict fails cleanly on a missing model file or dimension mismatch") {
  CliFixture fx;
  const std::string data = fx.file("in.csv");
  REQUIRE(fx.run({"gen-data", "--generator", "sine", "--n", "10", "--noise", "0",
                  "--seed", "6", "--out", data}) == lgr::cli::kOk);
  CHECK(fx.run({"predict", "--model", fx.file("absent.json"), "--dataset", data,
                "--out", fx.file("p.csv")}) == lgr::cli::kDataError);

  // train a 1-D model, then feed 2-D inputs
  REQUIRE(fx.run({"train", "--dataset", data, "--select-columns", "x*", "--iters", "5",
                  "--out", fx.file("m.json"), "--report", fx.file("r.json")}) ==
          lgr::cli::kOk);
  const std::string wide = fx.file("wide.csv");
  REQUIRE(fx.run({"gen-data", "--generator", "cross2d", "--n", "10", "--noise", "0",
                  "--seed", "6", "--out", wide}) == lgr::cli::kOk);
  CHECK(fx.run({"predict", "--model", fx.file("m.json"), "--dataset", wide,
                "--out", fx.file("p.csv")}) == lgr::cli::kUsageError);
}

TEST_CASE("train sweep mode writes one report per value plus a table") {
  CliFixture fx;
  const std::string data = fx.file("train.csv");
  REQUIRE(fx.run({"gen-data", "--generator", "sine", "--n", "60", "--noise", "0.1",
                  "--seed", "8", "--out", data}) == lgr::cli::kOk);
  const std::string report = fx.file("sweep.json");
  CHECK(fx.run({"train", "--dataset", data, "--select-columns", "x*", "--iters", "10",
                "--w-gen-sweep", "0.3,0.6", "--workers", "2",
                "--out", fx.file("m.json"), "--report", report}) == lgr::cli::kOk);
  CHECK(fs::exists(fx.file("sweep.w_gen_0.3.json")));
  CHECK(fs::exists(fx.file("sweep.w_gen_0.6.json")));
  CHECK(fs::exists(fx.file("m.w_gen_0.3.json")));
  const std::string table = CliFixture::slurp(fx.file("sweep.sweep.csv"));
  CHECK(table.find("w_gen,mse,nmse,model_count") == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);
}

TEST_CASE("benchmark emits a table row per method and per-w_gen aggregates") {
  CliFixture fx;
  const std::string table = fx.file("bench.csv");
  const std::string report = fx.file("bench.json");
  CHECK(fx.run({"benchmark", "--methods", "lgr,lwr", "--seeds", "1", "--w-gen-sweep",
                "0.5", "--n", "120", "--noise", "0.2", "--edge", "11", "--iters", "20",
                "--workers", "2", "--out-table", table, "--report", report}) ==
        lgr::cli::kOk);
  const json rep = json::parse(CliFixture::slurp(report));
  CHECK(rep.at("cells").size() == 2);
  CHECK(rep.at("aggregates").contains("lgr"));
  CHECK(rep.at("aggregates").contains("lwr"));
  CHECK(rep.at("aggregates").at("lgr").at("per_w_gen").size() == 1);
  CHECK(rep.at("aggregates").at("lgr").at("best").at("w_gen") == 0.5);

  const std::string tbl = CliFixture::slurp(table);
  CHECK(tbl.find("method,best_nmse_mean,best_nmse_std,opt_w_gen,mean_model_count") == 0);
  CHECK(tbl.find("lgr,") != std::string::npos);
  CHECK(tbl.find("lwr,") != std::string::npos);
}

TEST_CASE("help exits zero and unknown subcommands exit with usage") {
  CliFixture fx;
  CHECK(fx.run({"--help"}) == lgr::cli::kOk);
  CHECK(fx.out.str().find("gen-data") != std::string::npos);
  CHECK(fx.run({"frobnicate"}) == lgr::cli::kUsageError);
  CHECK(fx.run({}) == lgr::cli::kUsageError);
}
