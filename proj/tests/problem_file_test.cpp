#include "wishful/problem_file.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <string>

using namespace wishful;

namespace {

std::string minimal(const std::string& extra = "") {
    return R"({"schema_version": 1, "utilities": [[1, 0], [0.5, 0.5]], "prior": [0.3, 0.7])" + extra + "}";
}

std::string error_of(const std::string& text) {
    try {
        parse_problem_file(text);
    } catch (const input_error& e) {
        return e.what();
    }
    return "";
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

} // namespace

TEST(ParseProblemFile, AppliesDefaults) {
    const auto f = parse_problem_file(minimal());
    EXPECT_EQ(f.problem.action_labels, (std::vector<std::string>{"a1", "a2"}));
    EXPECT_EQ(f.problem.state_labels, (std::vector<std::string>{"w1", "w2"}));
    EXPECT_EQ(f.problem.delta, 1.0);
    EXPECT_EQ(f.divergence, "kl");
    EXPECT_EQ(f.problem.divergence.name, "kl");
    EXPECT_EQ(f.tol, kDefaultTolerance);
    EXPECT_FALSE(f.sweep);
    EXPECT_FALSE(f.verify);
    EXPECT_FALSE(f.output);
}

TEST(ParseProblemFile, ReadsSections) {
    const auto f = parse_problem_file(minimal(R"(, "divergence": "burg", "delta": 2.5,
        "sweep": {"state": 1, "grid_points": 10, "divergences": ["kl", "burg"], "csv": "s.csv"},
        "verify": {"resolution": 100}, "output": {"format": "json", "directory": "out"})"));
    EXPECT_EQ(f.problem.divergence.name, "burg");
    EXPECT_EQ(f.problem.delta, 2.5);
    ASSERT_TRUE(f.sweep);
    EXPECT_EQ(f.sweep->state, 1u);
    EXPECT_EQ(f.sweep->grid_points, 10);
    EXPECT_EQ(f.sweep->divergences.size(), 2u);
    EXPECT_EQ(f.sweep->csv, "s.csv");
    EXPECT_EQ(f.verify->resolution, 100);
    EXPECT_EQ(f.verify->refine_iterations, 50);
    EXPECT_EQ(f.output->format, "json");
    EXPECT_EQ(f.output->directory, "out");
}

TEST(ParseProblemFile, ReportsErrorLocations) {
    const std::string msg = error_of("{\n  \"schema_version\": 1,\n  \"prior\": [0.5,, 0.5]\n}");
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column"), std::string::npos) << msg;

    EXPECT_NE(error_of(R"({"schema_version": 2, "utilities": [[1]], "prior": [1]})").find("schema_version"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"utilities": [[1]], "prior": [1]})").find("schema_version"), std::string::npos);
    EXPECT_NE(error_of(R"({"schema_version": 1, "prior": [1]})").find("field 'utilities'"), std::string::npos);
    EXPECT_NE(error_of(minimal(R"(, "delta": "big")")).find("field 'delta'"), std::string::npos);
    EXPECT_NE(error_of(minimal(R"(, "divergence": "tsallis")")).find("tsallis"), std::string::npos);
    EXPECT_NE(error_of(minimal(R"(, "sweep": {"grid_points": "x"})")).find("sweep.grid_points"), std::string::npos);
    EXPECT_NE(error_of(minimal(R"(, "output": {"format": "xml"})")).find("output.format"), std::string::npos);
    EXPECT_NE(error_of(R"({"schema_version": 1, "utilities": [[1, 0]], "prior": [0.5, 0.4]})").find("prior"),
              std::string::npos);
    EXPECT_NE(error_of("[1, 2]").find("object"), std::string::npos);
}

TEST(ParseProblemFile, LoadReportsMissingFile) {
    EXPECT_THROW(load_problem_file("/nonexistent/problem.json"), input_error);
}

TEST(SerializeProblemFile, RoundTripIsLossless) {
    std::mt19937_64 rng(103);
    for (int k = 0; k < 200; ++k) {
        const auto inst = testgen::random_instance(rng, 2, 6);
        ProblemFile f;
        f.problem.prior = inst.q;
        f.problem.delta = inst.delta;
        for (std::size_t i = 0; i < inst.q.size(); ++i) f.problem.state_labels.push_back("s" + std::to_string(i));
        for (int a = 0; a < 3; ++a) {
            f.problem.utilities.push_back(testgen::random_utilities(rng, inst.q.size(), -1e6, 1e6));
            f.problem.action_labels.push_back("act " + std::to_string(a));
        }
        f.divergence = to_string(kAllDivergences[k % 4]);
        f.tol = 1e-11;
        if (k % 2) {
            f.sweep = SweepSettings{1, 2, 37, {"kl", "hellinger"}, "x.csv"};
            f.verify = VerifySettings{90, 7};
            f.output = OutputSettings{"json", std::nullopt};
        }
        const auto back = parse_problem_file(serialize_problem_file(f));
        ASSERT_EQ(back.problem.utilities.size(), f.problem.utilities.size());
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t i = 0; i < inst.q.size(); ++i)
                EXPECT_TRUE(same_bits(back.problem.utilities[a][i], f.problem.utilities[a][i]));
        for (std::size_t i = 0; i < inst.q.size(); ++i) EXPECT_TRUE(same_bits(back.problem.prior[i], f.problem.prior[i]));
        EXPECT_TRUE(same_bits(back.problem.delta, f.problem.delta));
        EXPECT_EQ(back.problem.action_labels, f.problem.action_labels);
        EXPECT_EQ(back.divergence, f.divergence);
        EXPECT_EQ(back.tol, f.tol);
        EXPECT_EQ(serialize_problem_file(back), serialize_problem_file(f));
    }
}
