#pragma once

// TraceStore: a parsed trace as an immutable, indexed event database.
// Loading a full trace validates id ordering and exit/call references;
// restricting to an interval keeps ids and skips the exit validation, since a
// window may cut a call/exit pair in half.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "jel/model.hpp"

namespace jel {

class StoreError : public std::runtime_error {
public:
  enum class Kind { DuplicateId, NonMonotonicId, DanglingExit, ExitMismatch, NotFound };

  StoreError(Kind kind, EventId id)
      : std::runtime_error(describe(kind, id)), kind_(kind), id_(id) {}

  Kind kind() const { return kind_; }
  EventId id() const { return id_; }

private:
  static std::string describe(Kind kind, EventId id) {
    switch (kind) {
    case Kind::DuplicateId: return "duplicate event id " + std::to_string(id);
    case Kind::NonMonotonicId:
      return "event id " + std::to_string(id) + " is not increasing";
    case Kind::DanglingExit:
      return "methodexit references missing call id " + std::to_string(id);
    case Kind::ExitMismatch:
      return "methodexit disagrees with call id " + std::to_string(id) +
             " on subject or name";
    case Kind::NotFound: return "no event with id " + std::to_string(id);
    }
    return "store error";
  }

  Kind kind_;
  EventId id_;
};

// Inclusive event-id window.
struct HistoryInterval {
  EventId lo = 0;
  EventId hi = 0;
  bool operator==(const HistoryInterval&) const = default;
};

namespace detail {
inline std::string subject_key(const Subject& s) {
  return std::visit(overloaded{
                        [](const ClassRef& c) { return "c\x1f" + c.class_name; },
                        [](const ObjectRef& o) {
                          return "o\x1f" + o.class_name + "\x1f" +
                                 std::to_string(o.object_id);
                        },
                    },
                    s);
}
} // namespace detail

class TraceStore {
public:
  TraceStore() = default;

  // Builds the store with full validation: strictly increasing ids and, for
  // every methodexit, an earlier methodcall with the same id/subject/name.
  // A call without any exit is legal (the thread may have died first).
  static TraceStore load(std::vector<TraceEvent> events) {
    return TraceStore(std::move(events), /*validate_exits=*/true);
  }

  // Events with lo <= id <= hi, original ids kept, indexes rebuilt.
  TraceStore restrict(const HistoryInterval& iv) const {
    if (iv.lo > iv.hi) throw std::invalid_argument("interval lo > hi");
    auto first = std::lower_bound(events_.begin(), events_.end(), iv.lo,
                                  [](const TraceEvent& e, EventId id) { return e.id < id; });
    auto last = std::upper_bound(events_.begin(), events_.end(), iv.hi,
                                 [](EventId id, const TraceEvent& e) { return id < e.id; });
    return TraceStore(std::vector<TraceEvent>(first, last), /*validate_exits=*/false);
  }

  bool empty() const { return events_.empty(); }
  std::size_t size() const { return events_.size(); }
  const std::vector<TraceEvent>& events() const { return events_; }

  const TraceEvent* find(EventId id) const {
    auto it = std::lower_bound(events_.begin(), events_.end(), id,
                               [](const TraceEvent& e, EventId i) { return e.id < i; });
    if (it == events_.end() || it->id != id) return nullptr;
    return &*it;
  }

  const TraceEvent& get(EventId id) const {
    const TraceEvent* e = find(id);
    if (!e) throw StoreError(StoreError::Kind::NotFound, id);
    return *e;
  }

  // All matching events in ascending id order. Indexed constraints (name,
  // subject, kind, thread, id range) narrow the candidate set before the
  // final matches() filter.
  std::vector<TraceEvent> scan(const EventPattern& p) const {
    std::vector<TraceEvent> out;
    auto emit = [&](std::size_t idx) {
      if (matches(p, events_[idx])) out.push_back(events_[idx]);
    };
    if (const auto* idxs = candidate_index(p)) {
      for (std::size_t i : *idxs) emit(i);
      return out;
    }
    std::size_t lo = 0, hi = events_.size();
    if (p.min_id) lo = position_of_lower(*p.min_id);
    if (p.max_id) hi = position_of_upper(*p.max_id);
    for (std::size_t i = lo; i < hi; ++i) emit(i);
    return out;
  }

  // --- index accessors used by the query engine ---------------------------

  // Positions (into events()) of one thread's events, ascending.
  const std::vector<std::size_t>* thread_positions(const std::string& thread) const {
    auto it = by_thread_.find(thread);
    return it == by_thread_.end() ? nullptr : &it->second;
  }

  const std::vector<std::size_t>& kind_positions(EventKind k) const {
    return by_kind_[static_cast<std::size_t>(k)];
  }

  // The first methodexit referencing call_id, or nullptr.
  const TraceEvent* exit_of(EventId call_id) const {
    auto it = exit_by_call_.find(call_id);
    return it == exit_by_call_.end() ? nullptr : &events_[it->second];
  }

  // The thread's first uncaught exception event id, if any.
  std::optional<EventId> uncaught_of(const std::string& thread) const {
    auto it = uncaught_by_thread_.find(thread);
    if (it == uncaught_by_thread_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<std::string> threads() const {
    std::vector<std::string> out;
    out.reserve(by_thread_.size());
    for (const auto& [name, _] : by_thread_) out.push_back(name);
    std::sort(out.begin(), out.end());
    return out;
  }

  EventId min_id() const { return events_.empty() ? 0 : events_.front().id; }
  EventId max_id() const { return events_.empty() ? 0 : events_.back().id; }

private:
  TraceStore(std::vector<TraceEvent> events, bool validate_exits)
      : events_(std::move(events)) {
    validate_ids();
    build_indexes();
    if (validate_exits) validate_exit_references();
  }

  void validate_ids() const {
    for (std::size_t i = 1; i < events_.size(); ++i) {
      if (events_[i].id == events_[i - 1].id)
        throw StoreError(StoreError::Kind::DuplicateId, events_[i].id);
      if (events_[i].id < events_[i - 1].id)
        throw StoreError(StoreError::Kind::NonMonotonicId, events_[i].id);
    }
  }

  void build_indexes() {
    for (std::size_t i = 0; i < events_.size(); ++i) {
      const TraceEvent& e = events_[i];
      by_thread_[e.thread].push_back(i);
      by_kind_[static_cast<std::size_t>(kind_of(e))].push_back(i);
      if (const std::string* n = event_name(e.event)) by_name_[*n].push_back(i);
      if (auto s = event_subject(e.event))
        by_subject_[detail::subject_key(*s)].push_back(i);
      if (const auto* x = std::get_if<MethodExit>(&e.event))
        exit_by_call_.emplace(x->call_id, i); // first exit wins
      if (const auto* exc = std::get_if<Exception>(&e.event))
        if (exc->uncaught()) uncaught_by_thread_.emplace(e.thread, e.id);
    }
  }

  void validate_exit_references() const {
    for (const TraceEvent& e : events_) {
      const auto* x = std::get_if<MethodExit>(&e.event);
      if (!x) continue;
      const TraceEvent* c = x->call_id < e.id ? find(x->call_id) : nullptr;
      const auto* call = c ? std::get_if<MethodCall>(&c->event) : nullptr;
      if (!call) throw StoreError(StoreError::Kind::DanglingExit, x->call_id);
      if (call->subject != x->subject || call->name != x->name)
        throw StoreError(StoreError::Kind::ExitMismatch, x->call_id);
    }
  }

  const std::vector<std::size_t>* candidate_index(const EventPattern& p) const {
    if (p.name) {
      auto it = by_name_.find(*p.name);
      return it == by_name_.end() ? &kEmpty : &it->second;
    }
    if (p.subject) {
      auto it = by_subject_.find(detail::subject_key(*p.subject));
      return it == by_subject_.end() ? &kEmpty : &it->second;
    }
    if (p.kind) return &by_kind_[static_cast<std::size_t>(*p.kind)];
    if (p.thread) {
      auto it = by_thread_.find(*p.thread);
      return it == by_thread_.end() ? &kEmpty : &it->second;
    }
    return nullptr;
  }

  std::size_t position_of_lower(EventId id) const {
    return std::lower_bound(events_.begin(), events_.end(), id,
                            [](const TraceEvent& e, EventId i) { return e.id < i; }) -
           events_.begin();
  }
  std::size_t position_of_upper(EventId id) const {
    return std::upper_bound(events_.begin(), events_.end(), id,
                            [](EventId i, const TraceEvent& e) { return i < e.id; }) -
           events_.begin();
  }

  static inline const std::vector<std::size_t> kEmpty{};

  std::vector<TraceEvent> events_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_thread_;
  std::array<std::vector<std::size_t>, kEventKindCount> by_kind_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_name_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_subject_;
  std::unordered_map<EventId, std::size_t> exit_by_call_;
  std::unordered_map<std::string, EventId> uncaught_by_thread_;
};

} // namespace jel
