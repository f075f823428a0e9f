#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <sstream>

#include <magging/io.hpp>
#include <magging/magging.hpp>

#include "support.hpp"

using namespace magging;
using magging::testing::random_matrix;
using magging::testing::random_vector;

namespace {

std::string error_of(const std::string& csv)
{
    std::istringstream in(csv);
    try {
        io::read_dataset(in);
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(FormatDouble, RoundTripsBitExactly)
{
    Rng rng(101);
    for (int rep = 0; rep < 10000; ++rep) {
        std::uint64_t bits = rng.next_u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        if (!std::isfinite(v)) continue;
        const double back = std::strtod(io::format_double(v).c_str(), nullptr);
        ASSERT_EQ(std::memcmp(&v, &back, sizeof v), 0) << io::format_double(v);
    }
}

TEST(Dataset, RoundTrip)
{
    Rng rng(102);
    const Matrix x = random_matrix(rng, 25, 3) * 1e-3;
    const Vector y = random_vector(rng, 25) * 1e7;
    std::vector<std::int64_t> labels;
    for (int i = 0; i < 25; ++i) labels.push_back(i % 4 - 1);
    std::stringstream buf;
    io::write_dataset(buf, x, y, &labels);
    const io::Dataset d = io::read_dataset(buf);
    EXPECT_EQ(d.x, x);
    EXPECT_EQ(d.y, y);
    ASSERT_TRUE(d.groups.has_value());
    EXPECT_EQ(*d.groups, labels);
}

TEST(Dataset, ColumnOrderAndWhitespace)
{
    std::istringstream in("group, x2 ,y,x1\r\n3,2.5,1,-1\n\n3,0,+2,1e2\n");
    const io::Dataset d = io::read_dataset(in);
    ASSERT_EQ(d.x.rows(), 2);
    EXPECT_EQ(d.x(0, 0), -1.0);
    EXPECT_EQ(d.x(0, 1), 2.5);
    EXPECT_EQ(d.x(1, 0), 100.0);
    EXPECT_EQ(d.y(1), 2.0);
    EXPECT_EQ((*d.groups)[1], 3);
}

TEST(Dataset, ErrorsAreLineNumbered)
{
    EXPECT_NE(error_of("y,x1\n1,2\n3,abc\n").find("line 3"), std::string::npos);
    EXPECT_NE(error_of("y,x1\n1,2,3\n").find("line 2"), std::string::npos);
    EXPECT_NE(error_of("x1,x2\n1,2\n").find("missing column 'y'"), std::string::npos);
    EXPECT_NE(error_of("y,x2\n1,2\n").find("x1"), std::string::npos);
    EXPECT_NE(error_of("y,x1,z\n1,2,3\n").find("unexpected column"), std::string::npos);
    EXPECT_NE(error_of("y,x1,group\n1,2,a\n").find("line 2"), std::string::npos);
    EXPECT_NE(error_of("y,x1\n1,inf\n").find("non-finite"), std::string::npos);
    EXPECT_FALSE(error_of("").empty());
    EXPECT_FALSE(error_of("y,x1\n").empty());
}

TEST(Json, GroupingRoundTrip)
{
    const Grouping g = random_subsample(40, 5, 7, 13);
    EXPECT_EQ(io::grouping_from_json(io::to_json(g)), g);
    const Grouping b = consecutive_blocks(10, 3);
    EXPECT_EQ(io::grouping_from_json(nlohmann::json::parse(io::to_json(b).dump())), b);
    EXPECT_THROW(io::grouping_from_json(nlohmann::json::parse(R"({"strategy":"known","n":2,"groups":[[5]],"seed":null})")),
                 InputError);
}

TEST(Json, AggregationRoundTrip)
{
    Rng rng(103);
    const Matrix x = random_matrix(rng, 30, 3);
    const Ensemble ens = make_ensemble(x, {random_vector(rng, 3), random_vector(rng, 3), random_vector(rng, 3)});
    const AggregationResult r = magging_aggregate(ens);
    const AggregationResult back = io::aggregation_from_json(nlohmann::json::parse(io::to_json(r).dump()));
    EXPECT_EQ(back.scheme, "magging");
    EXPECT_EQ(back.theta, r.theta);
    EXPECT_EQ(back.weights, r.weights);
    EXPECT_EQ(back.diagnostics, r.diagnostics);
}

TEST(Json, CertificateFields)
{
    BoundCertificate c;
    c.eta1 = 0.5;
    c.b_maximin = Vector::Ones(2);
    const auto j = io::to_json(c);
    for (const char* key : {"eta1", "eta2", "kappa", "bound", "lhs", "holds"}) EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Metadata, TruthRoundTrip)
{
    MixtureSimConfig c;
    c.n = 200;
    c.num_groups = 4;
    c.scenario = Scenario::OutlierContamination;
    c.contamination_fraction = 0.1;
    c.seed = 5;
    const SimOutput sim = simulate_mixture(c);
    const auto meta = nlohmann::json::parse(io::sim_metadata(sim).dump());
    EXPECT_EQ(meta.at("rng").get<std::string>(), Rng::kAlgorithm);
    const io::SimTruth t = io::truth_from_metadata(meta);
    EXPECT_EQ(t.true_b, sim.true_b);
    EXPECT_EQ(t.sigma, sim.sigma);
    EXPECT_EQ(*t.majority_b, *sim.majority_b);
    EXPECT_EQ(*t.grouping, sim.grouping);
    const auto a = t.group_optimal(sim.grouping, nullptr);
    const auto b = sim.group_optimal(sim.grouping);
    for (std::size_t g = 0; g < a.size(); ++g) EXPECT_EQ(a[g], b[g]);
}

TEST(Metadata, PerGroupTruthNeedsLabels)
{
    MixtureSimConfig c;
    c.n = 60;
    c.num_groups = 3;
    const SimOutput sim = simulate_mixture(c);
    const io::SimTruth t = io::truth_from_metadata(io::sim_metadata(sim));
    EXPECT_THROW(t.group_optimal(sim.grouping, nullptr), InputError);
    const auto got = t.group_optimal(sim.grouping, &sim.labels);
    for (Index g = 0; g < 3; ++g) EXPECT_EQ(got[static_cast<std::size_t>(g)], sim.group_b.col(g));
}

TEST(MatrixCsv, HeaderAndErrors)
{
    std::istringstream ok("b1,b2\n1,2\n3,4\n");
    const Matrix m = io::read_matrix_csv(ok, "support");
    EXPECT_EQ(m, (Matrix(2, 2) << 1, 2, 3, 4).finished());
    std::istringstream ragged("1,2\n3\n");
    EXPECT_THROW(io::read_matrix_csv(ragged, "support"), InputError);
    std::istringstream empty("a,b\n");
    EXPECT_THROW(io::read_matrix_csv(empty, "support"), InputError);
}
