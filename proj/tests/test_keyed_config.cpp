#include <doctest.h>

#include "bootrl/error.hpp"
#include "bootrl/keyed_config.hpp"

using namespace bootrl;

TEST_CASE("tables, arrays of tables and value types") {
  const auto doc = parse_keyed_config(R"(
# header comment
top = 1
[study]
id = "s1"   # trailing comment
ratio = -1.5e-1
on = true
list = [1, 2,
        3]
names = ['a', "b\tc"]

[[item]]
k = 1
[[item]]
k = 2
[a.b]
x = "nested"
)");
  CHECK(doc["top"] == 1);
  CHECK(doc["study"]["id"] == "s1");
  CHECK(doc["study"]["ratio"].get<double>() == doctest::Approx(-0.15));
  CHECK(doc["study"]["on"] == true);
  CHECK(doc["study"]["list"] == nlohmann::json({1, 2, 3}));
  CHECK(doc["study"]["names"][1] == "b\tc");
  REQUIRE(doc["item"].size() == 2);
  CHECK(doc["item"][1]["k"] == 2);
  CHECK(doc["a"]["b"]["x"] == "nested");
  CHECK(doc["study"]["__line"] == 4);
  CHECK(config_location(doc["item"][1], "f.toml") == "f.toml:14");
}

TEST_CASE("errors carry the line") {
  try {
    parse_keyed_config("a = 1\nb = \n", "cfg");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
    CHECK(std::string(e.what()).find("cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_keyed_config("x = {a = 1}\n"), Error);
  CHECK_THROWS_AS(parse_keyed_config("x = 1\nx = 2\n"), Error);
  CHECK_THROWS_AS(parse_keyed_config("[t\n"), Error);
  CHECK_THROWS_AS(parse_keyed_config("s = \"unterminated\n"), Error);
}
