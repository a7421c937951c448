#include <gtest/gtest.h>

#include "tero/date.hpp"

using tero::Date;
using tero::parse_date;

TEST(Date, ParsesFullDate) {
  auto d = parse_date("2014-01-02");
  ASSERT_TRUE(d);
  EXPECT_EQ(*d, (Date{2014, 1, 2}));
}

TEST(Date, ParsesYearOnlyAndPlaceholders) {
  EXPECT_EQ(*parse_date("2003-##-##"), (Date{2003, 0, 0}));
  EXPECT_EQ(*parse_date("2003"), (Date{2003, 0, 0}));
  EXPECT_EQ(*parse_date("1996-05-##"), (Date{1996, 5, 0}));
  EXPECT_EQ(*parse_date("-453-##-##"), (Date{-453, 0, 0}));
}

TEST(Date, UnknownYearMeansUnknownDate) {
  EXPECT_FALSE(parse_date("####-##-##"));
  EXPECT_FALSE(parse_date("####"));
  EXPECT_FALSE(parse_date("19##-##-##"));
}

TEST(Date, RejectsMalformed) {
  for (const char* bad : {"", "abc", "2014-13-01", "2014-02-30", "2014-##-05", "2014-01-02-03", "2014--01",
                          "####-01-##", "20x4-01-01", "2014-1a-01"}) {
    EXPECT_THROW(parse_date(bad), tero::DataError) << bad;
  }
}

TEST(Date, CalendarOrderPutsNegativeYearsFirst) {
  EXPECT_LT(*parse_date("-453"), *parse_date("100"));
  EXPECT_LT(*parse_date("2003-##-##"), *parse_date("2003-01-01"));
}

TEST(Date, FormatIsCanonical) {
  EXPECT_EQ(tero::format_date(Date{2014, 1, 2}), "2014-01-02");
  EXPECT_EQ(tero::format_date(Date{-453, 0, 0}), "-453-##-##");
  EXPECT_EQ(tero::format_date(Date{100, 0, 0}), "0100-##-##");
  for (Date d : {Date{2014, 12, 31}, Date{-431, 0, 0}, Date{1996, 5, 0}, Date{7, 2, 28}}) {
    EXPECT_EQ(*parse_date(tero::format_date(d)), d);
  }
}

TEST(Date, DayNumbers) {
  EXPECT_EQ(tero::day_number(Date{1970, 1, 1}), 0);
  EXPECT_EQ(tero::day_number(Date{2014, 12, 31}) - tero::day_number(Date{2014, 1, 1}), 364);
  EXPECT_EQ(tero::date_from_day_number(tero::day_number(Date{2016, 2, 29})), (Date{2016, 2, 29}));
  EXPECT_THROW(tero::day_number(Date{2014, 0, 0}), tero::DataError);
}
