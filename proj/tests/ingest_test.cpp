#include "qlink/ingest.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace qlink;

namespace {

constexpr const char* kStooqThreeRows =
    "Date,Open,High,Low,Close,Volume\n"
    "2020-01-02,99,101,98,100.0,1000\n"
    "2020-01-03,100,102,99,101.0,1100\n"
    "2020-01-06,101,101,99,99.5,900\n";

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected qlink::Error";
    return ErrorCode::IoError;
}

} // namespace

TEST(ParsePriceCsv, ReadsStooqLayout) {
    auto p = parse_price_csv(kStooqThreeRows);
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(format_iso_date(p.dates()[0]), "2020-01-02");
    EXPECT_DOUBLE_EQ(p.closes()[0], 100.0);
    EXPECT_DOUBLE_EQ(p.closes()[1], 101.0);
    EXPECT_DOUBLE_EQ(p.closes()[2], 99.5);
}

TEST(ParsePriceCsv, SortsDescendingInput) {
    auto p = parse_price_csv("Date,Open,High,Low,Close,Volume\n"
                             "2020-01-06,101,101,99,99.5,900\n"
                             "2020-01-03,100,102,99,101.0,1100\n"
                             "2020-01-02,99,101,98,100.0,1000\n");
    EXPECT_EQ(p, parse_price_csv(kStooqThreeRows));
}

TEST(ParsePriceCsv, ZeroCloseNamesTheRow) {
    try {
        (void)parse_price_csv("Date,Close\n2020-01-02,1\n2020-01-03,0\n2020-01-06,2\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnparseableRow);
        EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
    }
}

TEST(ParsePriceCsv, ErrorPaths) {
    EXPECT_EQ(code_of([] { (void)parse_price_csv("Date,Open\n2020-01-02,1\n"); }), ErrorCode::MalformedHeader);
    EXPECT_EQ(code_of([] { (void)parse_price_csv(""); }), ErrorCode::MalformedHeader);
    EXPECT_EQ(code_of([] { (void)parse_price_csv("Date,Close\n2020-13-02,1\n"); }), ErrorCode::UnparseableRow);
    EXPECT_EQ(code_of([] { (void)parse_price_csv("Date,Close\n2020-01-02,abc\n"); }), ErrorCode::UnparseableRow);
    EXPECT_EQ(code_of([] { (void)parse_price_csv("Date,Close\n2020-01-02,\n"); }), ErrorCode::UnparseableRow);
    EXPECT_EQ(code_of([] { (void)parse_price_csv("Date,Close\n2020-01-02,-3\n"); }), ErrorCode::UnparseableRow);
    EXPECT_EQ(code_of([] { (void)parse_price_csv("Date,Close\n2020-01-02,1\n2020-01-03,2\n"); }), ErrorCode::EmptySeries);
    EXPECT_EQ(code_of([] { (void)parse_price_csv("Date,Close\n2020-01-02,1\n2020-01-02,2\n2020-01-03,2\n"); }),
              ErrorCode::DuplicateDate);
}

TEST(ParsePriceCsv, ToleratesCrlfBomAndExtraColumns) {
    auto p = parse_price_csv("\xEF\xBB\xBF" "date,close,extra\r\n2020-01-02,1.5,x\r\n2020-01-03,2,y\r\n\r\n2020-01-04,3,z\r\n");
    ASSERT_EQ(p.size(), 3u);
    EXPECT_DOUBLE_EQ(p.closes()[2], 3.0);
}

TEST(ParsePriceCsv, IdempotentOnOwnSerialization) {
    auto once = parse_price_csv(fixtures::prices_csv_from_returns(fixtures::iid_normal(500, 0.02, 7)));
    auto text = serialize_price_csv(once);
    auto twice = parse_price_csv(text);
    EXPECT_EQ(once, twice);
    EXPECT_EQ(serialize_price_csv(twice), text);
}

TEST(ToLogReturns, HandValues) {
    auto d = [](int day) { return Date{std::chrono::year{2020}, std::chrono::month{1}, std::chrono::day{static_cast<unsigned>(day)}}; };
    auto r = to_log_returns(PriceSeries({d(1), d(2), d(3)}, {1.0, std::numbers::e, std::numbers::e}));
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(r[0], 1.0, 1e-15);
    EXPECT_EQ(r[1], 0.0);
    auto r2 = to_log_returns(PriceSeries({d(1), d(2), d(3)}, {100.0, 110.0, 110.0}));
    EXPECT_NEAR(r2[0], 0.0953102, 1e-6);
    EXPECT_EQ(format_iso_date(r2.dates()[0]), "2020-01-02");
}

TEST(ToLogReturns, CumulativeExponentiationReconstructsCloses) {
    auto prices = parse_price_csv(fixtures::prices_csv_from_returns(fixtures::iid_normal(2000, 0.03, 11)));
    auto r = to_log_returns(prices);
    double level = prices.closes()[0];
    for (std::size_t t = 0; t < r.size(); ++t) {
        level *= std::exp(r[t]);
        EXPECT_NEAR(level / prices.closes()[t + 1], 1.0, 1e-9);
    }
}

TEST(Split, FloorConventionAndWindows) {
    auto r10 = ReturnSeries::from_values(std::vector<double>(10, 0.01));
    auto s = split(r10, 0.8);
    EXPECT_EQ(s.in_sample.size(), 8u);
    EXPECT_EQ(s.out_sample.size(), 2u);

    auto r5 = ReturnSeries::from_values({1, 2, 3, 4, 5});
    auto s5 = split(r5, 0.5);
    EXPECT_EQ(s5.in_sample.size(), 2u);
    EXPECT_EQ(s5.out_sample.size(), 3u);

    EXPECT_EQ(code_of([] { (void)split(ReturnSeries::from_values({1, 2, 3}), 0.9); }), ErrorCode::DegenerateSplit);
    EXPECT_EQ(code_of([] { (void)split(ReturnSeries::from_values({1, 2, 3, 4}), 1.5); }), ErrorCode::DegenerateSplit);
}

TEST(Split, ConcatenationRestoresInput) {
    Rng rng(3);
    std::uniform_real_distribution<double> frac(0.05, 0.95);
    for (int trial = 0; trial < 50; ++trial) {
        auto values = fixtures::iid_normal(20 + static_cast<std::size_t>(trial) * 7, 1.0, static_cast<std::uint64_t>(trial));
        auto r = ReturnSeries::from_values(values);
        const double f = frac(rng);
        SplitReturns s;
        try {
            s = split(r, f);
        } catch (const Error&) {
            continue;
        }
        EXPECT_EQ(s.in_sample.size(), static_cast<std::size_t>(std::floor(f * static_cast<double>(r.size()))));
        std::vector<double> joined(s.in_sample.values().begin(), s.in_sample.values().end());
        joined.insert(joined.end(), s.out_sample.values().begin(), s.out_sample.values().end());
        EXPECT_EQ(joined, values);
        EXPECT_EQ(s.in_sample.dates().back() < s.out_sample.dates().front(), true);
    }
}

TEST(Demean, RemovesInSampleMean) {
    auto s = demean(split(ReturnSeries::from_values({1, 3, 5, 7, 10, 20}), 0.5));
    EXPECT_DOUBLE_EQ(s.in_sample[0], -2.0);
    EXPECT_DOUBLE_EQ(s.out_sample[0], 4.0);
}

TEST(BundledFixture, ParsesRealPrices) {
    auto p = parse_price_csv(read_file(std::string(QLINK_DATA_DIR) + "/goog_daily.csv"));
    EXPECT_EQ(p.size(), 1047u);
    EXPECT_EQ(format_iso_date(p.dates()[0]), "2004-08-19");
}
