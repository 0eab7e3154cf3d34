#include "slp/conflict.hpp"

#include <algorithm>

#include "slp/error.hpp"

namespace slp {

namespace {

std::vector<std::string> ids_of(const std::vector<Binding>& flags) {
  std::vector<std::string> ids;
  ids.reserve(flags.size());
  for (const auto& f : flags) ids.push_back(f.source);
  return ids;
}

}  // namespace

ConflictOutcome detect_conflict(std::vector<Binding> flags, const PreferenceStore& preferences) {
  if (flags.empty()) return NoFlags{};
  if (flags.size() == 1) return SingleFlag{std::move(flags.front())};
  auto candidates = ids_of(flags);
  if (auto preferred = preferences.lookup(candidates)) {
    for (auto& f : flags) {
      if (f.source == *preferred) return AutoResolved{std::move(f), std::move(candidates)};
    }
  }
  return NeedsPrompt{std::move(candidates)};
}

ConflictArbiter::Step ConflictArbiter::evaluate(std::vector<Binding> flags,
                                                const PreferenceStore& preferences,
                                                std::int64_t tick) {
  Step step;
  if (open_) {
    const auto flagged = ids_of(flags);
    const bool still_together =
        std::all_of(open_->candidates.begin(), open_->candidates.end(), [&](const auto& id) {
          return std::find(flagged.begin(), flagged.end(), id) != flagged.end();
        });
    if (still_together) return step;
    step.events.push_back(*cancel("candidates no longer flag together"));
  }

  auto outcome = detect_conflict(std::move(flags), preferences);
  if (auto* single = std::get_if<SingleFlag>(&outcome)) {
    step.dispatch = std::move(single->binding);
  } else if (auto* autoresolved = std::get_if<AutoResolved>(&outcome)) {
    step.events.push_back({EventKind::ConflictResolved,
                           {{"conflict", nullptr},
                            {"candidates", autoresolved->candidates},
                            {"chosen", autoresolved->binding.source},
                            {"remember", true},
                            {"auto", true}}});
    step.dispatch = std::move(autoresolved->binding);
  } else if (auto* prompt = std::get_if<NeedsPrompt>(&outcome)) {
    ConflictRecord record{"C" + std::to_string(++counter_), tick, prompt->candidates, {}};
    step.events.push_back({EventKind::ConflictRaised,
                           {{"conflict", record.id}, {"candidates", record.candidates}}});
    open_ = std::move(record);
  }
  return step;
}

Event ConflictArbiter::resolve(const std::optional<std::string>& conflict_id,
                               const std::string& chosen, bool remember,
                               PreferenceStore& preferences) {
  if (!open_ || (conflict_id && *conflict_id != open_->id)) {
    throw StateError("conflict " + conflict_id.value_or("(none)") + " is not open");
  }
  const auto& cands = open_->candidates;
  if (std::find(cands.begin(), cands.end(), chosen) == cands.end()) {
    throw StateError("'" + chosen + "' is not a candidate of conflict " + open_->id);
  }
  if (remember) preferences.remember(cands, chosen);
  open_->resolution = ConflictResolution{chosen, remember};
  Event event{EventKind::ConflictResolved,
              {{"conflict", open_->id},
               {"candidates", cands},
               {"chosen", chosen},
               {"remember", remember},
               {"auto", false}}};
  history_.push_back(std::move(*open_));
  open_.reset();
  pending_choice_ = chosen;
  return event;
}

std::optional<std::string> ConflictArbiter::take_pending_choice() {
  auto choice = std::move(pending_choice_);
  pending_choice_.reset();
  return choice;
}

std::optional<Event> ConflictArbiter::cancel(const std::string& reason) {
  if (!open_) return std::nullopt;
  Event event{EventKind::ConflictCancelled, {{"conflict", open_->id}, {"reason", reason}}};
  history_.push_back(std::move(*open_));
  open_.reset();
  return event;
}

}  // namespace slp
