#include <leeisd/io.hpp>
#include <leeisd/weight.hpp>

#include <gtest/gtest.h>

using namespace leeisd;

TEST(WeightFunction, LeeAndHammingTables) {
    const auto lee = WeightFunction::lee(7);
    const std::vector<std::int64_t> expect{0, 1, 2, 3, 3, 2, 1};
    EXPECT_EQ(lee.unit_table(), expect);
    EXPECT_EQ(lee.max_weight(), 3.0);
    const auto ham = WeightFunction::hamming(7);
    for (Symbol x = 1; x < 7; ++x) EXPECT_EQ(ham.units(x), 1);
    EXPECT_EQ(ham.units(0), 0);
}

TEST(WeightFunction, RejectsBadTables) {
    EXPECT_THROW(WeightFunction::custom(3, {Rational(1), Rational(1), Rational(1)}), InfeasibleParameters);
    EXPECT_THROW(WeightFunction::custom(3, {Rational(0), Rational(-1), Rational(1)}), InfeasibleParameters);
    EXPECT_THROW(WeightFunction::custom(3, {Rational(0), Rational(1)}), InfeasibleParameters);
    EXPECT_THROW(WeightFunction::custom(4, {Rational(0), Rational(1), Rational(1), Rational(1)}), InfeasibleParameters);
}

TEST(WeightFunction, RationalTableUsesCommonDenominator) {
    const auto wf = WeightFunction::custom(5, {Rational(0), Rational(1, 2), Rational(2, 3), Rational(2, 3), Rational(1, 2)});
    EXPECT_EQ(wf.denominator(), 6);
    EXPECT_EQ(wf.units(1), 3);
    EXPECT_EQ(wf.units(2), 4);
    EXPECT_EQ(wf.granularity(), 1);
    EXPECT_EQ(wf.to_units(Rational(7, 6)), std::optional<std::int64_t>(7));
    EXPECT_FALSE(wf.to_units(Rational(1, 7)).has_value());
}

TEST(VectorWeight, Examples) {
    const FqVector zero(5, 3);
    EXPECT_EQ(vector_weight(zero, WeightFunction::lee(5)), Rational(0));
    const FqVector v(5, {1, 4, 2});
    EXPECT_EQ(vector_weight(v, WeightFunction::lee(5)), Rational(4));
    EXPECT_EQ(vector_weight(v, WeightFunction::hamming(5)), Rational(3));
    EXPECT_THROW(vector_weight(v, WeightFunction::lee(7)), DimensionError);
}

TEST(NormalizedWeight, Examples) {
    EXPECT_DOUBLE_EQ(normalized_weight(WeightFunction::hamming(5), 0.3), 0.3);
    EXPECT_DOUBLE_EQ(normalized_weight(WeightFunction::lee(13), 6.0), 1.0);
    EXPECT_NEAR(normalized_weight(WeightFunction::lee(13), 5.742), 0.957, 5e-4);
}

TEST(WeightJson, CustomTableRoundTrip) {
    const Json j = Json::parse(R"({"q": 7, "table": [0, 1, 2, 3, 3, 2, 1]})");
    const WeightFunction wf = weight_from_json(j);
    EXPECT_EQ(wf, WeightFunction::lee(7));
    const auto odd = WeightFunction::custom(5, {Rational(0), Rational(1, 2), Rational(3), Rational(3), Rational(1, 2)});
    EXPECT_EQ(weight_from_json(weight_to_json(odd)), odd);
    EXPECT_EQ(weight_to_json(WeightFunction::hamming(3)), Json("hamming"));
}

TEST(WeightJson, CorruptTableIsRejected) {
    EXPECT_THROW(weight_from_json(Json::parse(R"({"q": 3, "table": [1, 1, 1]})")), InfeasibleParameters);
    EXPECT_THROW(weight_from_json(Json::parse(R"({"q": 3})")), FormatError);
    EXPECT_THROW(weight_from_json(Json::parse(R"({"q": 3, "table": [0, "x", 1]})")), FormatError);
}
