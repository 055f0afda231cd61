#include "rkde/errors.hpp"
#include "rkde/io.hpp"

#include <doctest.h>

#include <string>

using namespace rkde;

namespace {

std::size_t
error_line(std::string_view text)
{
  try {
    parse_csv(text);
  } catch (const InputError& e) {
    return e.line();
  }
  return 0;
}

} // namespace

TEST_CASE("git blob hash")
{
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello world\n") == "3b18e512dba79e4c8300dd08aeb37f8e728b8dad");
}

TEST_CASE("csv parsing")
{
  SUBCASE("quotes, CRLF and BOM")
  {
    const auto t = parse_csv("\xEF\xBB\xBFx,\"label, with comma\"\r\n1.5,\"a \"\"q\"\"\"\r\n,b\r\n");
    REQUIRE(t.header.size() == 2);
    CHECK(t.header[0] == "x");
    CHECK(t.header[1] == "label, with comma");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "a \"q\"");
    CHECK(t.rows[1][0].empty());
    CHECK(t.lines[0] == 2);
    CHECK(t.lines[1] == 3);
    CHECK(t.column("x") == 0);
    CHECK_THROWS_AS(t.column("y"), InputError);
  }
  SUBCASE("embedded newline keeps line numbers")
  {
    const auto t = parse_csv("a,b\n\"two\nlines\",1\n3,4\n");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "two\nlines");
    CHECK(t.lines[1] == 4);
  }
  SUBCASE("errors carry the line")
  {
    CHECK(error_line("a,b\n1,2\n3\n") == 3);
    CHECK(error_line("a,b\n1,2\n\"open,3\n") == 3);
    CHECK_THROWS_AS(parse_csv(""), InputError);
  }
}

TEST_CASE("observations from columns")
{
  const auto t = parse_csv("x,obs,z\n1.0,1,0.1\n,0,0.2\nNA,0,0.3\n2.5,1,0.4\n");
  SUBCASE("empty cells and sentinel")
  {
    ColumnSelection c;
    c.value = "x";
    c.sentinel = "NA";
    const auto d = load_observations(t, c);
    REQUIRE(d.size() == 4);
    CHECK(d[0].delta == 1);
    CHECK(d[0].x == 1.0);
    CHECK(d[1].delta == 0);
    CHECK(d[2].delta == 0);
    CHECK(d[3].x == 2.5);
  }
  SUBCASE("flag column and auxiliary")
  {
    ColumnSelection c;
    c.value = "x";
    c.flag = "obs";
    c.aux = "z";
    const auto d = load_observations(t, c);
    CHECK(d[2].delta == 0);
    CHECK(*d[3].aux == 0.4);
  }
  SUBCASE("unparseable number without a sentinel")
  {
    ColumnSelection c;
    c.value = "x";
    try {
      load_observations(t, c);
      CHECK(false);
    } catch (const InputError& e) {
      CHECK(e.line() == 4);
    }
  }
  SUBCASE("bad and all-zero flags")
  {
    const auto bad = parse_csv("x,f\n1,1\n2,yes\n");
    ColumnSelection c;
    c.value = "x";
    c.flag = "f";
    try {
      load_observations(bad, c);
      CHECK(false);
    } catch (const InputError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(load_observations(parse_csv("x,f\n1,0\n2,0\n"), c), InputError);
  }
}

TEST_CASE("manifest hash")
{
  RunManifest m;
  m.command = "reproduce";
  m.config = { { "table", 1 } };
  m.seed = 42;
  const auto h = m.hash();
  CHECK(h.size() == 40);
  m.outputs.push_back("table1.csv");
  CHECK(m.hash() == h);
  m.seed = 43;
  CHECK(m.hash() != h);
  CHECK(m.to_json()["hash"] == m.hash());
}
