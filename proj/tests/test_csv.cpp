#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "rcdetect/csv.hpp"

using namespace rcdetect;

TEST_CASE("comment and blank lines are skipped, header is first real row") {
  std::istringstream in(
      "# cfg_hash=deadbeef seed=42\n"
      "\n"
      "a,b,c\n"
      "1,2,3\n"
      "# trailing comment\n"
      "4,,6\r\n");
  CsvTable t = read_csv(in);
  REQUIRE(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0] == std::vector<std::string>{"1", "2", "3"});
  CHECK(t.rows[1] == std::vector<std::string>{"4", "", "6"});
  CHECK(t.column("b") == 1);
  CHECK(t.column("missing") == -1);
}

TEST_CASE("input without a header row is rejected") {
  std::istringstream empty("");
  CHECK_THROWS_AS(read_csv(empty), EmptyInputError);
  std::istringstream comments("# one\n# two\n");
  CHECK_THROWS_AS(read_csv(comments), EmptyInputError);
}

TEST_CASE("split and join are inverses for quote-free fields") {
  std::vector<std::string> fields{"x", "", "3.5", "tail"};
  CHECK(split_csv_line(join_csv(fields)) == fields);
  CHECK(join_csv({}) == "");
  CHECK(split_csv_line("") == std::vector<std::string>{""});
}

TEST_CASE("integer fields parse strictly") {
  CHECK(parse_u64_field("0", "x") == 0u);
  CHECK(parse_u64_field("18446744073709551615", "x") == 18446744073709551615ull);
  CHECK_THROWS_AS(parse_u64_field("", "x"), ParseError);
  CHECK_THROWS_AS(parse_u64_field("-1", "x"), ParseError);
  CHECK_THROWS_AS(parse_u64_field("1.5", "x"), ParseError);
  CHECK_THROWS_AS(parse_u64_field("12a", "x"), ParseError);
}

TEST_CASE("floating fields parse strictly") {
  CHECK(parse_double_field("2.5", "x") == 2.5);
  CHECK(parse_double_field("-1e3", "x") == -1000.0);
  CHECK_THROWS_AS(parse_double_field("abc", "x"), ParseError);
  CHECK_THROWS_AS(parse_double_field("1.5junk", "x"), ParseError);
  CHECK_THROWS_AS(parse_double_field("", "x"), ParseError);
}
