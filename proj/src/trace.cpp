#include "slp/trace.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <memory>

#include "slp/error.hpp"

namespace slp {

namespace {

constexpr std::array<std::string_view, 28> kKindNames = {
    "SnapshotPublished", "ZoneCreated", "ZoneUpdated", "ZoneDeleted",
    "RuleCreated", "RuleDeleted", "RuleDisabled", "ButtonCreated",
    "ButtonPressed", "ButtonConsumed", "RuleFlagged", "ConflictRaised",
    "ConflictResolved", "ConflictCancelled", "ActionStarted", "ActionCompleted",
    "ActionAborted", "PrimitiveStarted", "PrimitiveCompleted", "HumanActionApplied",
    "Paused", "Resumed", "ProgramLoaded", "ProgramSaved",
    "WorkspaceReset", "Warning", "Error", "Timeout",
};

}  // namespace

std::string_view to_string(EventKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<EventKind> event_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

Json trace_event_json(const TraceEvent& event) {
  return {{"tick", event.tick},
          {"seq", event.seq},
          {"kind", std::string(to_string(event.kind))},
          {"payload", event.payload}};
}

std::string canonical_line(const TraceEvent& event) { return trace_event_json(event).dump(); }

TraceEvent parse_trace_line(std::string_view line) {
  const Json j = json_util::parse_document(line);
  TraceEvent e;
  e.tick = json_util::get_int(j, "tick", "");
  e.seq = json_util::get_int(j, "seq", "");
  const auto name = json_util::get_string(j, "kind", "");
  const auto kind = event_kind_from_string(name);
  if (!kind) throw ParseError("/kind", "unknown event kind '" + name + "'");
  e.kind = *kind;
  e.payload = json_util::field(j, "payload", "");
  return e;
}

const TraceEvent& ExecutionTrace::append(std::int64_t tick, Event event) {
  const std::int64_t seq = events_.empty() ? 1 : events_.back().seq + 1;
  events_.push_back(TraceEvent{tick, seq, event.kind, std::move(event.payload)});
  return events_.back();
}

std::vector<const TraceEvent*> ExecutionTrace::of_kind(EventKind kind) const {
  std::vector<const TraceEvent*> out;
  for (const auto& e : events_) {
    if (e.kind == kind) out.push_back(&e);
  }
  return out;
}

std::size_t ExecutionTrace::count(EventKind kind) const {
  std::size_t n = 0;
  for (const auto& e : events_) n += e.kind == kind ? 1 : 0;
  return n;
}

std::string ExecutionTrace::serialize() const {
  std::string out;
  for (const auto& e : events_) {
    out += canonical_line(e);
    out += '\n';
  }
  return out;
}

ExecutionTrace ExecutionTrace::parse(std::string_view text) {
  ExecutionTrace trace;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      trace.events_.push_back(parse_trace_line(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no), e.what());
    }
  }
  return trace;
}

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw Error("sha256 failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string trace_digest(const ExecutionTrace& trace) { return sha256_hex(trace.serialize()); }

}  // namespace slp
