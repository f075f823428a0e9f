#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include <magging/io.hpp>
#include <magging/magging.hpp>

using namespace magging;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() / ("magging_cli_" + std::to_string(::getpid()) + "_"
                                            + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    /// Runs the CLI with `args`; stdout goes to `out`, stderr to err.txt.
    int run(const std::string& args, const std::string& out = "stdout.txt") const
    {
        const std::string cmd = std::string("cd '") + dir_.string() + "' && '" + MAGGING_CLI_PATH + "' " + args + " > '"
                                + path(out) + "' 2> '" + path("err.txt") + "'";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string read(const std::string& name) const
    {
        std::ifstream in(path(name), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write(const std::string& name, const std::string& content) const { std::ofstream(path(name)) << content; }

    json read_json(const std::string& name) const { return json::parse(read(name)); }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, HomogeneousGroupsGiveCommonFit)
{
    write("toy.csv", "y,x1,x2,group\n1,1,0,0\n2,0,1,0\n3,1,1,0\n1,1,0,1\n2,0,1,1\n3,1,1,1\n");
    ASSERT_EQ(run("fit toy.csv --estimator ols --scheme mean --scheme magging"), 0) << read("err.txt");
    const json doc = read_json("stdout.txt");
    const auto& res = doc.at("results");
    ASSERT_EQ(res.size(), 2u);
    const Vector mean_theta = io::vector_from_json(res[0].at("theta"), "theta");
    const Vector mag_theta = io::vector_from_json(res[1].at("theta"), "theta");
    EXPECT_LE((mean_theta - mag_theta).norm(), 1e-8);
    EXPECT_NEAR(res[1].at("weights")[0].get<double>(), 0.5, 1e-6);
    EXPECT_NEAR(res[1].at("weights")[1].get<double>(), 0.5, 1e-6);
}

TEST_F(Cli, FitErrors)
{
    write("nogroup.csv", "y,x1\n1,2\n2,3\n");
    EXPECT_EQ(run("fit nogroup.csv --groups known"), 2);
    EXPECT_NE(read("err.txt").find("group"), std::string::npos);

    write("bad.csv", "y,x1\n1,2\n2,oops\n");
    EXPECT_EQ(run("fit bad.csv --groups blocks:1"), 2);
    EXPECT_NE(read("err.txt").find("line 3"), std::string::npos);

    write("singular.csv", "y,x1,x2\n1,1,2\n2,2,4\n3,3,6\n");
    EXPECT_EQ(run("fit singular.csv --groups blocks:1 --estimator ols"), 3);

    EXPECT_EQ(run("fit nogroup.csv --groups blocks:1 --scheme bogus"), 2);
    EXPECT_EQ(run("fit nogroup.csv --groups blocks:1 --estimator ridge"), 2);
    EXPECT_EQ(run("fit missing.csv"), 2);
    EXPECT_EQ(run("fit"), 2);
    EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, AllSchemesCsvOutput)
{
    ASSERT_EQ(run("simulate --out d --n 120 --p 3 -G 3 --seed 4"), 0);
    ASSERT_EQ(run("fit d.csv --estimator ridge:0.01 --scheme mean --scheme magging --scheme pooled --scheme stack:convex "
                  "--scheme stack:sign/oob --scheme stack:ridge:2 --format csv",
                  "out.csv"),
              0)
        << read("err.txt");
    const std::string csv = read("out.csv");
    for (const char* s : {"mean,", "magging,", "pooled,", "stack:convex/loo,", "stack:sign/oob,", "stack:ridge:"})
        EXPECT_NE(csv.find(s), std::string::npos) << s;
}

TEST_F(Cli, SimulateDeterministicAndValidated)
{
    ASSERT_EQ(run("simulate --out a --seed 7 --n 300"), 0);
    ASSERT_EQ(run("simulate --out b --seed 7 --n 300"), 0);
    EXPECT_EQ(read("a.csv"), read("b.csv"));
    EXPECT_EQ(read("a.json"), read("b.json"));
    EXPECT_EQ(run("simulate --out c --scenario outlier_contamination --contamination 0.99"), 2);
    EXPECT_EQ(run("simulate --out c --scenario sideways"), 2);
}

TEST_F(Cli, PeriodicMetadataAndComparison)
{
    ASSERT_EQ(run("simulate --scenario periodic --out per --seed 1"), 0) << read("err.txt");
    const json meta = read_json("per.json");
    EXPECT_EQ(meta.at("config").at("G").get<int>(), 50);
    EXPECT_EQ(meta.at("config").at("dict_size").get<int>(), 100);
    EXPECT_EQ(meta.at("rng").get<std::string>(), Rng::kAlgorithm);

    ASSERT_EQ(run("fit per.csv --estimator ols --scheme pooled --scheme mean --scheme magging --meta per.json"), 0)
        << read("err.txt");
    const json doc = read_json("stdout.txt");
    double mse[3];
    for (int k = 0; k < 3; ++k) mse[k] = doc.at("results")[k].at("diagnostics").at("mse_common_signal").get<double>();
    EXPECT_LT(mse[2], mse[0]);
    EXPECT_LT(mse[2], mse[1]);
}

TEST_F(Cli, SimulateFitRoundTripMatchesInProcess)
{
    ASSERT_EQ(run("simulate --scenario outlier_contamination --contamination 0.2 --n 600 -G 12 --seed 3 --out o"), 0);
    ASSERT_EQ(run("fit o.csv --groups meta --meta o.json --estimator lasso --scheme magging --scheme mean"), 0)
        << read("err.txt");
    const json doc = read_json("stdout.txt");

    MixtureSimConfig c;
    c.scenario = Scenario::OutlierContamination;
    c.contamination_fraction = 0.2;
    c.n = 600;
    c.num_groups = 12;
    c.seed = 3;
    const SimOutput sim = simulate_mixture(c);
    const Ensemble ens = fit_ensemble(sim.x, sim.y, sim.grouping, EstimatorSpec::lasso());
    EXPECT_EQ(io::vector_from_json(doc.at("results")[0].at("theta"), "theta"), magging_aggregate(ens).theta);
    EXPECT_EQ(io::vector_from_json(doc.at("results")[0].at("weights"), "weights"), magging_aggregate(ens).weights);
    EXPECT_EQ(io::vector_from_json(doc.at("results")[1].at("theta"), "theta"), mean_aggregate(ens).theta);
}

TEST_F(Cli, OracleExamples)
{
    write("zero.csv", "0,0\n1,2\n-1,3\n");
    ASSERT_EQ(run("oracle --support zero.csv"), 0);
    EXPECT_LE(io::vector_from_json(read_json("stdout.txt").at("maximin").at("point"), "p").norm(), 1e-9);

    write("pair.csv", "1,1\n1,-1\n");
    ASSERT_EQ(run("oracle --support pair.csv --grid"), 0);
    const json doc = read_json("stdout.txt");
    const Vector m = io::vector_from_json(doc.at("maximin").at("point"), "p");
    EXPECT_NEAR(m(0), 1.0, 1e-9);
    EXPECT_NEAR(m(1), 0.0, 1e-9);
    EXPECT_LE(doc.at("grid").at("max_abs_difference").get<double>(), 0.01);

    write("one.csv", "0.5,-2,3\n");
    write("sigma.csv", "2,0,0\n0,1,0\n0,0,1\n");
    ASSERT_EQ(run("oracle --support one.csv --sigma sigma.csv"), 0);
    EXPECT_EQ(io::vector_from_json(read_json("stdout.txt").at("maximin").at("point"), "p"),
              (Vector(3) << 0.5, -2, 3).finished());

    write("broken.csv", "1,2\nx,y\n");
    EXPECT_EQ(run("oracle --support broken.csv"), 2);
}

TEST_F(Cli, CertifyNoiselessAndMissingTruth)
{
    ASSERT_EQ(run("simulate --out z --n 300 --p 5 -G 3 --noise-sd 0 --orthogonal-design"), 0) << read("err.txt");
    ASSERT_EQ(run("certify z.csv --meta z.json"), 0) << read("err.txt");
    const json cert = read_json("stdout.txt");
    EXPECT_LE(cert.at("eta1").get<double>(), 1e-10);
    EXPECT_LE(cert.at("eta2").get<double>(), 1e-10);
    EXPECT_LE(cert.at("lhs").get<double>(), 1e-10);
    EXPECT_TRUE(cert.at("holds").get<bool>());

    write("bare.json", R"({"n": 300, "p": 5})");
    EXPECT_EQ(run("certify z.csv --meta bare.json"), 2);
    EXPECT_EQ(run("certify z.csv"), 2);
}

TEST_F(Cli, Figures)
{
    ASSERT_EQ(run("figure fig3 --length 201 --seed 2", "f1.csv"), 0) << read("err.txt");
    ASSERT_EQ(run("figure fig3 --length 201 --seed 2", "f2.csv"), 0);
    const std::string csv = read("f1.csv");
    EXPECT_EQ(csv, read("f2.csv"));
    EXPECT_EQ(csv.rfind("panel,series,time,value\n", 0), 0u);
    for (const char* s : {"common,common_signal,", "spectrum,common,", "recordings,group_1,", "recordings,group_11,",
                          "estimates,group_11,", "aggregates,pooled,", "aggregates,mean,", "aggregates,magging,"})
        EXPECT_NE(csv.find(s), std::string::npos) << s;
    EXPECT_EQ(csv.find("recordings,group_12,"), std::string::npos);

    ASSERT_EQ(run("figure robustness --seed 1", "r.csv"), 0);
    const std::string r = read("r.csv");
    for (const char* s : {"halfspace,support,", "halfspace,maximin_before,", "shift,added,", "shift,maximin_after,"})
        EXPECT_NE(r.find(s), std::string::npos) << s;

    EXPECT_EQ(run("figure fig9"), 2);
}
