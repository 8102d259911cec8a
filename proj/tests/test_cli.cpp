#include <doctest.h>

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "support/tempdir.hpp"
#include "varest/cli.hpp"
#include "varest/io.hpp"
#include "varest/selection.hpp"

using namespace varest;
using testing_support::read_text;
using testing_support::TempDir;
using testing_support::write_text;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::initializer_list<std::string> args) {
    std::vector<std::string> store{"varest"};
    store.insert(store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : store) argv.push_back(s.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string field(const std::string& csv, int row, int col) {
    std::istringstream in(csv);
    std::string line;
    for (int r = 0; r <= row; ++r) std::getline(in, line);
    std::istringstream ls(line);
    std::string cell;
    for (int c = 0; c <= col; ++c) std::getline(ls, cell, ',');
    return cell;
}

const char* const kToyModel = R"({"p": 1, "covariance": "identity", "gaussian": true})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("estimate on the toy file") {
    TempDir dir;
    write_text(dir.file("toy.csv"), "y,x1\n1,1\n1,2\n");
    write_text(dir.file("model.json"), kToyModel);
    auto r = cli({"estimate", "--data", dir.file("toy.csv"), "--model", dir.file("model.json"),
                  "--estimators", "naive"});
    CHECK(r.code == 0);
    CHECK(field(r.out, 1, 0) == "naive");
    CHECK(std::stod(field(r.out, 1, 2)) == doctest::Approx(2.0));
    r = cli({"estimate", "--data", dir.file("toy.csv"), "--model", dir.file("model.json"), "--estimators",
             "dicker"});
    CHECK(std::stod(field(r.out, 1, 2)) == doctest::Approx(7.0 / 6.0));

    r = cli({"estimate", "--data", dir.file("toy.csv"), "--model", dir.file("model.json"), "--estimators",
             "naive", "--clamp"});
    CHECK(std::stod(field(r.out, 1, 3)) == 0.0);  // σ̂² = 0 - 2 clamped
}

TEST_CASE("degenerate single estimator becomes a warning row") {
    TempDir dir;
    write_text(dir.file("toy.csv"), "y,x1\n1,1\n1,2\n0,3\n");
    write_text(dir.file("model.json"), kToyModel);
    const auto r = cli({"estimate", "--data", dir.file("toy.csv"), "--model", dir.file("model.json"),
                        "--estimators", "naive,single"});
    CHECK(r.code == 0);
    CHECK(field(r.out, 2, 0) == "single");
    CHECK(field(r.out, 2, 1) == "warning");
    CHECK(r.err.find("warning") != std::string::npos);
}

TEST_CASE("estimate input errors exit with status 2") {
    TempDir dir;
    write_text(dir.file("bad.csv"), "y,x1\n1,1\n1,oops\n");
    write_text(dir.file("model.json"), kToyModel);
    auto r = cli({"estimate", "--data", dir.file("bad.csv"), "--model", dir.file("model.json")});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
    write_text(dir.file("ok.csv"), "y,x1\n1,1\n1,2\n0,3\n");
    r = cli({"estimate", "--data", dir.file("ok.csv"), "--model", dir.file("model.json"), "--estimators",
             "oracle"});
    CHECK(r.code == 2);
    r = cli({"estimate", "--data", dir.file("ok.csv")});
    CHECK(r.code == 2);
    CHECK(r.err.find("--model") != std::string::npos);
    write_text(dir.file("wide.json"), R"({"p": 2})");
    r = cli({"estimate", "--data", dir.file("ok.csv"), "--model", dir.file("wide.json")});
    CHECK(r.code == 2);
}

TEST_CASE("selection with splitting lists the selected columns") {
    TempDir dir;
    ScenarioConfig cfg;
    cfg.n = 200;
    cfg.p = 30;
    cfg.tau2 = 2.0;
    cfg.tau2_b = 1.8;
    cfg.seed = 91;
    const auto ds = generate_dataset(cfg, build_beta(cfg), 0);
    {
        std::ofstream out(dir.file("data.csv"));
        write_dataset_csv(out, ds.x(), ds.y());
        std::ofstream model(dir.file("model.json"));
        write_model_json(model, scenario_model(cfg));
    }
    const auto r = cli({"estimate", "--data", dir.file("data.csv"), "--model", dir.file("model.json"),
                        "--estimators", "selection", "--select-split", "--variance", "tilde"});
    CHECK(r.code == 0);
    const auto expected = t_gamma(ds, scenario_model(cfg), {true, 0.5, std::size_t{50}});
    const std::string aux = field(r.out, 1, 5);
    CHECK(aux.find("selected=" + expected.aux.at("selected")) != std::string::npos);
    CHECK(aux.find("split=1") != std::string::npos);
    CHECK(std::stod(field(r.out, 1, 2)) == doctest::Approx(expected.tau2).epsilon(1e-9));
    CHECK(!field(r.out, 1, 4).empty());
}

TEST_CASE("empirical estimator through the command line") {
    TempDir dir;
    ScenarioConfig cfg;
    cfg.n = 80;
    cfg.p = 40;
    cfg.seed = 92;
    const auto ds = generate_dataset(cfg, build_beta(cfg), 0);
    {
        std::ofstream out(dir.file("data.csv"));
        write_dataset_csv(out, ds.x(), ds.y());
        std::ofstream model(dir.file("model.json"));
        write_model_json(model, scenario_model(cfg));
    }
    const auto a = cli({"estimate", "--data", dir.file("data.csv"), "--model", dir.file("model.json"),
                        "--empirical", "--initial", "dicker", "--boot", "30", "--seed", "5"});
    const auto b = cli({"estimate", "--data", dir.file("data.csv"), "--model", dir.file("model.json"),
                        "--empirical", "--initial", "dicker", "--boot", "30", "--seed", "5"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(field(a.out, 2, 0) == "empirical");
    CHECK(field(a.out, 2, 5).find("initial=dicker") != std::string::npos);
    const auto bad = cli({"estimate", "--data", dir.file("data.csv"), "--model", dir.file("model.json"),
                          "--empirical", "--initial", "oracle"});
    CHECK(bad.code == 2);
}

TEST_CASE("simulate writes byte-stable outputs and summarize reproduces them") {
    TempDir dir;
    auto run = [&](const std::string& tag) {
        return cli({"simulate", "--n", "60", "--p", "40", "--tau2", "1", "--tau2b", "0.333", "--reps", "8",
                    "--seed", "7", "--estimators", "naive,single,selection,oracle", "--no-timing",
                    "--records", dir.file("records" + tag + ".csv"), "--summary",
                    dir.file("summary" + tag + ".csv")});
    };
    const auto first = run("1");
    CHECK(first.code == 0);
    CHECK(first.out.find("selection") != std::string::npos);
    CHECK(run("2").code == 0);
    CHECK(read_text(dir.file("records1.csv")) == read_text(dir.file("records2.csv")));
    CHECK(read_text(dir.file("summary1.csv")) == read_text(dir.file("summary2.csv")));

    const std::string summary = read_text(dir.file("summary1.csv"));
    std::istringstream lines(summary);
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 5);

    const auto again = cli({"summarize", "--records", dir.file("records1.csv"), "--true-tau2", "1",
                            "--summary", dir.file("resummary.csv")});
    CHECK(again.code == 0);
    CHECK(read_text(dir.file("resummary.csv")) == summary);
}

TEST_CASE("simulate from a scenario file with flag overrides") {
    TempDir dir;
    write_text(dir.file("scenario.json"),
               R"({"n": 50, "p": 30, "tau2": 1, "tau2_b": 0.5, "reps": 4, "seed": 3})");
    auto r = cli({"simulate", "--scenario", dir.file("scenario.json"), "--estimators", "naive", "--reps", "3",
                  "--records", dir.file("r.csv")});
    CHECK(r.code == 0);
    std::ifstream in(dir.file("r.csv"));
    CHECK(read_records_csv(in).size() == 3);
    write_text(dir.file("noseed.json"), R"({"n": 50, "p": 30, "tau2": 1, "tau2_b": 0.5, "reps": 4})");
    r = cli({"simulate", "--scenario", dir.file("noseed.json")});
    CHECK(r.code == 2);
    CHECK(r.err.find("--seed") != std::string::npos);
}

TEST_CASE("simulate configuration errors") {
    auto r = cli({"simulate", "--n", "50", "--p", "30", "--tau2b", "0.3", "--reps", "2", "--seed", "1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--tau2") != std::string::npos);
    r = cli({"simulate", "--n", "50", "--p", "30", "--tau2", "1", "--tau2b", "0.3", "--reps", "2"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--seed") != std::string::npos);
    r = cli({"simulate", "--n", "50", "--p", "30", "--tau2", "1", "--tau2b", "2", "--reps", "2", "--seed", "1"});
    CHECK(r.code == 2);
    r = cli({"simulate", "--n", "50", "--p", "30", "--tau2", "1", "--tau2b", "0.3", "--reps", "2", "--seed",
             "1", "--estimators", "ridge"});
    CHECK(r.code == 2);
    r = cli({"simulate", "--bogus"});
    CHECK(r.code == 2);
    r = cli({});
    CHECK(r.code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("summarize inputs") {
    TempDir dir;
    write_text(dir.file("empty.csv"), "");
    CHECK(cli({"summarize", "--records", dir.file("empty.csv"), "--true-tau2", "1"}).code == 2);
    write_text(dir.file("header.csv"), "rep,estimator,tau2_hat,sigma2_hat,var_hat,wall_ms\n");
    CHECK(cli({"summarize", "--records", dir.file("header.csv"), "--true-tau2", "1"}).code == 2);
    CHECK(cli({"summarize", "--records", dir.file("missing.csv"), "--true-tau2", "1"}).code == 2);
    CHECK(cli({"summarize", "--records", dir.file("header.csv")}).code == 2);

    write_text(dir.file("three.csv"),
               "rep,estimator,tau2_hat,sigma2_hat,var_hat,wall_ms\n"
               "0,naive,1.1,0,,0\n1,naive,0.9,0,,0\n2,naive,1.2,0,,0\n");
    const auto r = cli({"summarize", "--records", dir.file("three.csv"), "--true-tau2", "1"});
    CHECK(r.code == 0);
    CHECK(r.out == "estimator,mean,bias,se,rmse,rmse_sd\nnaive,1.06667,-0.0666667,0.152753,0.141421,0.0353553\n");
}

}
