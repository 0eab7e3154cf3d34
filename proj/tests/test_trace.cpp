#include <doctest.h>

#include <random>

#include "slp/error.hpp"
#include "slp/trace.hpp"

using namespace slp;

TEST_CASE("digest of the empty trace is the hash of the empty string") {
  CHECK(trace_digest(ExecutionTrace{}) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("event kinds have stable names") {
  for (int i = 0; i <= static_cast<int>(EventKind::Timeout); ++i) {
    const auto kind = static_cast<EventKind>(i);
    CAPTURE(i);
    CHECK(event_kind_from_string(to_string(kind)) == kind);
  }
  CHECK(to_string(EventKind::RuleFlagged) == "RuleFlagged");
  CHECK_FALSE(event_kind_from_string("Exploded"));
}

TEST_CASE("canonical lines sort keys and carry no whitespace") {
  ExecutionTrace t;
  t.append(3, {EventKind::Warning, {{"zeta", 1}, {"alpha", "x y"}}});
  const std::string line = canonical_line(t.events()[0]);
  CHECK(line.find(' ') == line.find("x y") + 1);
  CHECK(line.find("\"alpha\"") < line.find("\"zeta\""));
  CHECK(line.find('\n') == std::string::npos);
}

TEST_CASE("sequence numbers count up across ticks") {
  ExecutionTrace t;
  t.append(0, {EventKind::SnapshotPublished});
  t.append(0, {EventKind::RuleFlagged});
  t.append(2, {EventKind::ActionStarted});
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.events()[i].seq == static_cast<std::int64_t>(i + 1));
  CHECK(t.count(EventKind::RuleFlagged) == 1);
  CHECK(t.of_kind(EventKind::ActionStarted).front()->tick == 2);
}

TEST_CASE("traces round-trip through their serialization") {
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> kind(0, static_cast<int>(EventKind::Timeout));
  for (int round = 0; round < 50; ++round) {
    ExecutionTrace t;
    const int n = std::uniform_int_distribution<int>(0, 40)(rng);
    for (int i = 0; i < n; ++i) {
      Json payload = {{"n", i}, {"text", "r" + std::to_string(round)}, {"xs", {1.5, -2, true}}};
      t.append(i / 3, {static_cast<EventKind>(kind(rng)), payload});
    }
    const auto text = t.serialize();
    const auto back = ExecutionTrace::parse(text);
    CHECK(back == t);
    CHECK(back.serialize() == text);
    CHECK(trace_digest(back) == trace_digest(t));
  }
}

TEST_CASE("the digest changes with any event") {
  ExecutionTrace a, b;
  a.append(0, {EventKind::Warning, {{"code", "x"}}});
  b.append(0, {EventKind::Warning, {{"code", "y"}}});
  CHECK(trace_digest(a) != trace_digest(b));
  CHECK(trace_digest(a) == sha256_hex(a.serialize()));
}

TEST_CASE("malformed trace lines are located") {
  try {
    ExecutionTrace::parse("{\"kind\":\"Warning\",\"payload\":{},\"seq\":1,\"tick\":0}\nnot json\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.where() == "line 2");
  }
  CHECK_THROWS_AS(parse_trace_line(R"({"kind":"Bogus","payload":{},"seq":1,"tick":0})"), ParseError);
}
