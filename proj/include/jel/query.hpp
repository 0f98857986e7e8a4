#pragma once

// The predefined query catalog over a TraceStore. Enclosure follows the
// trace's own structure: an event is inside a method activation when it lies
// strictly between the call and its exit, or — for a call that never exits —
// at or before the thread's uncaught exception. Activations that neither exit
// nor get killed bound nothing; they only show up in call trees, as
// Unterminated nodes.

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "jel/model.hpp"
#include "jel/store.hpp"

namespace jel {

class QueryError : public std::runtime_error {
public:
  enum class Kind {
    NoMatch,
    NoEnclosingEnvironment,
    NoInstantiation,
    NoMemberFields,
    NotAMethodCall,
    UnassignedField,
  };

  QueryError(Kind kind, std::string detail)
      : std::runtime_error(describe(kind, detail)), kind_(kind) {}

  Kind kind() const { return kind_; }

private:
  static std::string describe(Kind kind, const std::string& detail) {
    switch (kind) {
    case Kind::NoMatch: return "no event matches " + detail;
    case Kind::NoEnclosingEnvironment:
      return "event " + detail + " has no enclosing method";
    case Kind::NoInstantiation: return "no instantiation of " + detail;
    case Kind::NoMemberFields: return "no member fields recorded for " + detail;
    case Kind::NotAMethodCall: return "event " + detail + " is not a method call";
    case Kind::UnassignedField: return "field " + detail + " was never assigned";
    }
    return "query error";
  }

  Kind kind_;
};

struct ExitedAt {
  EventId id = 0;
  bool operator==(const ExitedAt&) const = default;
};
struct KilledByUncaught {
  EventId id = 0;
  bool operator==(const KilledByUncaught&) const = default;
};
struct Unterminated {
  bool operator==(const Unterminated&) const = default;
};
using Terminator = std::variant<ExitedAt, KilledByUncaught, Unterminated>;

inline std::optional<EventId> terminator_id(const Terminator& t) {
  if (const auto* x = std::get_if<ExitedAt>(&t)) return x->id;
  if (const auto* k = std::get_if<KilledByUncaught>(&t)) return k->id;
  return std::nullopt;
}

// A bounded method activation enclosing some event.
struct CallSpan {
  EventId call_id = 0;
  Terminator terminator; // never Unterminated in an enclosing span
  bool operator==(const CallSpan&) const = default;
};

struct FieldSample {
  EventId event_id = 0;
  std::string field_name;
  std::optional<Value> value; // nullopt = never assigned in range
  bool operator==(const FieldSample&) const = default;
};

struct ObjectState {
  ObjectRef object;
  EventId at = 0;
  std::vector<FieldSample> fields; // declaration order
  bool member_fields_missing = false;
  bool operator==(const ObjectState&) const = default;
};

struct CallTree {
  TraceEvent root; // a MethodCall event
  Terminator terminator;
  std::vector<CallTree> children; // direct callees, ascending call id
  bool operator==(const CallTree&) const = default;
};

enum class ThreadStatus { Running, Exited };

enum class StateMode {
  Lenient, // unwritten fields reported as unassigned
  Strict,  // unwritten fields make the query fail
};

struct ArgSample {
  EventId call_id = 0;
  std::vector<Value> args;
  bool operator==(const ArgSample&) const = default;
};
struct ReturnSample {
  EventId exit_id = 0;
  Value value;
  bool operator==(const ReturnSample&) const = default;
};
struct ContentsSample {
  EventId event_id = 0;
  std::vector<Value> contents;
  bool operator==(const ContentsSample&) const = default;
};

namespace detail {

// The exit event for call_id, restricted to the call's own thread.
inline const TraceEvent* exit_in_thread(const TraceStore& s, EventId call_id,
                                        const std::string& thread) {
  const TraceEvent* x = s.exit_of(call_id);
  return x && x->thread == thread ? x : nullptr;
}

} // namespace detail

// All bounded activations in the event's thread that enclose it, outermost
// first: either call < id < exit, or the call never exits and the thread's
// uncaught exception lies at or after id.
inline std::vector<CallSpan> any_enclosing_method(const TraceStore& s, EventId id) {
  const TraceEvent& ev = s.get(id);
  std::vector<CallSpan> out;
  const auto* positions = s.thread_positions(ev.thread);
  if (!positions) return out;
  auto exp = s.uncaught_of(ev.thread);
  for (std::size_t pos : *positions) {
    const TraceEvent& e = s.events()[pos];
    if (e.id >= id) break;
    if (!std::holds_alternative<MethodCall>(e.event)) continue;
    if (const TraceEvent* x = detail::exit_in_thread(s, e.id, ev.thread)) {
      if (id < x->id) out.push_back({e.id, ExitedAt{x->id}});
    } else if (exp && id <= *exp) {
      out.push_back({e.id, KilledByUncaught{*exp}});
    }
  }
  return out;
}

// Call ids of the enclosing activations, outermost first.
inline std::vector<EventId> call_chain(const TraceStore& s, EventId id) {
  std::vector<EventId> out;
  for (const CallSpan& span : any_enclosing_method(s, id))
    out.push_back(span.call_id);
  return out;
}

// The enclosing method-call events, most recent first.
inline std::vector<TraceEvent> full_detail_call_chain(const TraceStore& s, EventId id) {
  auto chain = call_chain(s, id);
  std::vector<TraceEvent> out;
  out.reserve(chain.size());
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    out.push_back(s.get(*it));
  return out;
}

// The enclosing environment (most recent enclosing call) of the first event
// in `thread` matching the pattern.
inline TraceEvent where(const TraceStore& s, const std::string& thread,
                        EventPattern pattern) {
  pattern.thread = thread;
  auto hits = s.scan(pattern);
  if (hits.empty())
    throw QueryError(QueryError::Kind::NoMatch, "pattern in thread " + thread);
  auto chain = full_detail_call_chain(s, hits.front().id);
  if (chain.empty())
    throw QueryError(QueryError::Kind::NoEnclosingEnvironment,
                     std::to_string(hits.front().id));
  return chain.front();
}

inline TraceEvent where_exception_is_thrown(const TraceStore& s,
                                            const std::string& thread) {
  EventPattern p;
  p.kind = EventKind::Exception;
  p.uncaught = true;
  return where(s, thread, p);
}

inline std::vector<FieldSample> instance_field_history(const TraceStore& s,
                                                       EventId start, EventId end,
                                                       const ObjectRef& obj,
                                                       const std::string& field) {
  if (start > end) throw std::invalid_argument("history start > end");
  EventPattern p;
  p.kind = EventKind::SetField;
  p.subject = Subject{obj};
  p.name = field;
  p.min_id = start;
  p.max_id = end;
  std::vector<FieldSample> out;
  for (const TraceEvent& e : s.scan(p))
    out.push_back({e.id, field, std::get<SetField>(e.event).value});
  return out;
}

inline std::vector<FieldSample> class_field_history(const TraceStore& s,
                                                    EventId start, EventId end,
                                                    const std::string& class_name,
                                                    const std::string& field) {
  if (start > end) throw std::invalid_argument("history start > end");
  EventPattern p;
  p.kind = EventKind::SetField;
  p.subject = Subject{ClassRef{class_name}};
  p.name = field;
  p.min_id = start;
  p.max_id = end;
  std::vector<FieldSample> out;
  for (const TraceEvent& e : s.scan(p))
    out.push_back({e.id, field, std::get<SetField>(e.event).value});
  return out;
}

// Reconstructs the object's fields at `end` from the last write to each
// declared field between instantiation and `end`. In Lenient mode a field
// with no write in range is reported with an empty value and the
// instantiation id; Strict mode fails instead.
inline ObjectState object_state(const TraceStore& s, EventId end, const ObjectRef& obj,
                                StateMode mode = StateMode::Lenient) {
  EventPattern init;
  init.kind = EventKind::MethodCall;
  init.subject = Subject{obj};
  init.name = "<init>";
  init.max_id = end;
  auto inits = s.scan(init);
  if (inits.empty())
    throw QueryError(QueryError::Kind::NoInstantiation,
                     obj.class_name + "#" + std::to_string(obj.object_id));
  EventId born = inits.front().id;

  EventPattern decl;
  decl.kind = EventKind::MemberFields;
  decl.subject = Subject{ClassRef{obj.class_name}};
  auto decls = s.scan(decl);
  if (decls.empty())
    throw QueryError(QueryError::Kind::NoMemberFields, obj.class_name);
  const auto& fields = std::get<MemberFields>(decls.front().event).fields;

  ObjectState state{obj, end, {}, false};
  for (const FieldDecl& f : fields) {
    auto hist = f.kind == FieldKind::Class
                    ? class_field_history(s, born, end, obj.class_name, f.name)
                    : instance_field_history(s, born, end, obj, f.name);
    if (hist.empty()) {
      if (mode == StateMode::Strict)
        throw QueryError(QueryError::Kind::UnassignedField, f.name);
      state.fields.push_back({born, f.name, std::nullopt});
    } else {
      state.fields.push_back(hist.back());
    }
  }
  return state;
}

namespace detail {

inline bool chain_contains(const TraceStore& s, EventId id, EventId call_id) {
  for (const CallSpan& span : any_enclosing_method(s, id))
    if (span.call_id == call_id) return true;
  return false;
}

// Completed (call, exit) pairs transitively enclosed by the innermost
// enclosing activation of `id`, on the given side of `id`.
inline std::vector<std::pair<TraceEvent, TraceEvent>>
event_called_methods(const TraceStore& s, EventId id, bool before) {
  auto spans = any_enclosing_method(s, id); // throws NotFound for unknown id
  if (spans.empty())
    throw QueryError(QueryError::Kind::NoEnclosingEnvironment, std::to_string(id));
  EventId enclosing = spans.back().call_id;
  const std::string& thread = s.get(id).thread;

  std::vector<std::pair<TraceEvent, TraceEvent>> out;
  for (std::size_t pos : *s.thread_positions(thread)) {
    const TraceEvent& x = s.events()[pos];
    const auto* exit = std::get_if<MethodExit>(&x.event);
    if (!exit) continue;
    if (before ? x.id >= id : x.id <= id) continue;
    const TraceEvent* c = s.find(exit->call_id);
    if (!c || c->thread != thread || !std::holds_alternative<MethodCall>(c->event))
      continue;
    if (!before && c->id <= id) continue; // both sides of the pair must follow id
    if (!chain_contains(s, c->id, enclosing)) continue;
    if (!chain_contains(s, x.id, enclosing)) continue;
    out.emplace_back(*c, x);
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first.id < b.first.id; });
  return out;
}

} // namespace detail

inline std::vector<std::pair<TraceEvent, TraceEvent>>
pre_event_called_methods(const TraceStore& s, EventId id) {
  return detail::event_called_methods(s, id, /*before=*/true);
}

inline std::vector<std::pair<TraceEvent, TraceEvent>>
post_event_called_methods(const TraceStore& s, EventId id) {
  return detail::event_called_methods(s, id, /*before=*/false);
}

namespace detail {

// Innermost activation an event sits in, counting still-open frames (no exit,
// no uncaught exception in the thread). This is the structural notion used by
// call trees; plain enclosure queries use any_enclosing_method instead.
inline std::optional<EventId> innermost_activation(const TraceStore& s,
                                                   const TraceEvent& ev) {
  std::optional<EventId> best;
  auto spans = any_enclosing_method(s, ev.id);
  if (!spans.empty()) best = spans.back().call_id;
  if (!s.uncaught_of(ev.thread)) {
    const auto* positions = s.thread_positions(ev.thread);
    for (std::size_t pos : *positions) {
      const TraceEvent& e = s.events()[pos];
      if (e.id >= ev.id) break;
      if (!std::holds_alternative<MethodCall>(e.event)) continue;
      if (exit_in_thread(s, e.id, ev.thread)) continue;
      if (!best || e.id > *best) best = e.id;
    }
  }
  return best;
}

} // namespace detail

inline Terminator activation_terminator(const TraceStore& s, const TraceEvent& call) {
  if (const TraceEvent* x = detail::exit_in_thread(s, call.id, call.thread))
    return ExitedAt{x->id};
  auto exp = s.uncaught_of(call.thread);
  if (exp && *exp > call.id) return KilledByUncaught{*exp};
  return Unterminated{};
}

// The direct-call nesting rooted at call_id.
inline CallTree call_tree(const TraceStore& s, EventId call_id) {
  const TraceEvent& root = s.get(call_id);
  if (!std::holds_alternative<MethodCall>(root.event))
    throw QueryError(QueryError::Kind::NotAMethodCall, std::to_string(call_id));

  CallTree tree{root, activation_terminator(s, root), {}};
  auto bound = terminator_id(tree.terminator);
  for (std::size_t pos : *s.thread_positions(root.thread)) {
    const TraceEvent& e = s.events()[pos];
    if (e.id <= call_id) continue;
    if (bound && e.id >= *bound) break;
    if (!std::holds_alternative<MethodCall>(e.event)) continue;
    if (detail::innermost_activation(s, e) == std::optional<EventId>(call_id))
      tree.children.push_back(call_tree(s, e.id));
  }
  return tree;
}

// Locals of the nearest step at or before `id` within the same innermost
// enclosing activation; empty when no such step exists.
inline std::vector<LocalVar> local_variables_at(const TraceStore& s, EventId id) {
  const TraceEvent& ev = s.get(id);
  auto spans = any_enclosing_method(s, id);
  std::optional<EventId> target;
  if (!spans.empty()) target = spans.back().call_id;

  const auto* positions = s.thread_positions(ev.thread);
  auto begin = positions->begin();
  auto it = std::upper_bound(begin, positions->end(), id,
                             [&](EventId i, std::size_t pos) { return i < s.events()[pos].id; });
  while (it != begin) {
    --it;
    const TraceEvent& e = s.events()[*it];
    if (target && e.id < *target) break; // left the activation
    const auto* st = std::get_if<Step>(&e.event);
    if (!st) continue;
    auto st_spans = any_enclosing_method(s, e.id);
    std::optional<EventId> st_target;
    if (!st_spans.empty()) st_target = st_spans.back().call_id;
    if (st_target == target) return st->locals;
  }
  return {};
}

// One sample per step event in range carrying the named local.
inline std::vector<FieldSample> local_variable_history(const TraceStore& s,
                                                       EventId start, EventId end,
                                                       const std::string& thread,
                                                       const std::string& name) {
  if (start > end) throw std::invalid_argument("history start > end");
  EventPattern p;
  p.kind = EventKind::Step;
  p.thread = thread;
  p.min_id = start;
  p.max_id = end;
  std::vector<FieldSample> out;
  for (const TraceEvent& e : s.scan(p))
    for (const LocalVar& lv : std::get<Step>(e.event).locals)
      if (lv.name == name) {
        out.push_back({e.id, name, lv.value});
        break;
      }
  return out;
}

inline std::vector<ArgSample> argument_history(const TraceStore& s,
                                               const std::string& method,
                                               const std::optional<Subject>& subject = {}) {
  EventPattern p;
  p.kind = EventKind::MethodCall;
  p.name = method;
  if (subject) p.subject = subject;
  std::vector<ArgSample> out;
  for (const TraceEvent& e : s.scan(p))
    out.push_back({e.id, std::get<MethodCall>(e.event).args});
  return out;
}

inline std::vector<ReturnSample> return_value_history(const TraceStore& s,
                                                      const std::string& method,
                                                      const std::optional<Subject>& subject = {}) {
  EventPattern p;
  p.kind = EventKind::MethodExit;
  p.name = method;
  if (subject) p.subject = subject;
  std::vector<ReturnSample> out;
  for (const TraceEvent& e : s.scan(p))
    out.push_back({e.id, std::get<MethodExit>(e.event).return_value});
  return out;
}

inline std::vector<ContentsSample>
data_structure_history(const TraceStore& s, EventId start, EventId end,
                       const std::optional<Location>& at = {}) {
  if (start > end) throw std::invalid_argument("history start > end");
  EventPattern p;
  p.kind = EventKind::DataStructure;
  p.min_id = start;
  p.max_id = end;
  if (at) p.location = at;
  std::vector<ContentsSample> out;
  for (const TraceEvent& e : s.scan(p))
    out.push_back({e.id, std::get<DataStructure>(e.event).contents});
  return out;
}

// One state per object of the class instantiated at or before `at`. Objects
// whose class has no memberfields record are flagged instead of failing the
// whole query.
inline std::vector<ObjectState> all_instances(const TraceStore& s,
                                              const std::string& class_name,
                                              EventId at) {
  s.get(at); // NotFound for unknown anchors
  EventPattern p;
  p.kind = EventKind::MethodCall;
  p.name = "<init>";
  p.max_id = at;
  std::vector<ObjectState> out;
  std::vector<std::uint64_t> seen;
  for (const TraceEvent& e : s.scan(p)) {
    const auto* obj = std::get_if<ObjectRef>(&std::get<MethodCall>(e.event).subject);
    if (!obj || obj->class_name != class_name) continue;
    if (std::find(seen.begin(), seen.end(), obj->object_id) != seen.end()) continue;
    seen.push_back(obj->object_id);
    try {
      out.push_back(object_state(s, at, *obj));
    } catch (const QueryError& err) {
      if (err.kind() != QueryError::Kind::NoMemberFields) throw;
      out.push_back(ObjectState{*obj, at, {}, true});
    }
  }
  return out;
}

// Exited iff a threaddeath event exists for the thread; otherwise Running.
inline std::map<std::string, ThreadStatus> thread_status(const TraceStore& s) {
  std::map<std::string, ThreadStatus> out;
  for (const TraceEvent& e : s.events()) {
    auto [it, _] = out.emplace(e.thread, ThreadStatus::Running);
    if (std::holds_alternative<ThreadDeath>(e.event)) it->second = ThreadStatus::Exited;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Yes/no questions about the trace.

struct LineExecuted {
  Location location;
};
struct MethodCalled {
  std::string name;
  std::optional<Subject> subject;
};
struct FieldAssigned {
  std::optional<std::string> field;
  std::optional<Value> value;
  std::optional<Subject> subject;
};
struct InstanceExists {
  std::string class_name;
};
struct ExceptionCaught {
  std::string class_name;
};
struct ThreadRunning {
  std::string thread;
};
struct ThreadExited {
  std::string thread;
};

using ExistenceQuery =
    std::variant<LineExecuted, MethodCalled, FieldAssigned, InstanceExists,
                 ExceptionCaught, ThreadRunning, ThreadExited>;

inline bool exists(const TraceStore& s, const ExistenceQuery& q) {
  return std::visit(
      detail::overloaded{
          [&](const LineExecuted& v) {
            EventPattern p;
            p.location = v.location;
            return !s.scan(p).empty();
          },
          [&](const MethodCalled& v) {
            EventPattern p;
            p.kind = EventKind::MethodCall;
            p.name = v.name;
            p.subject = v.subject;
            return !s.scan(p).empty();
          },
          [&](const FieldAssigned& v) {
            EventPattern p;
            p.kind = EventKind::SetField;
            p.name = v.field;
            p.value = v.value;
            p.subject = v.subject;
            return !s.scan(p).empty();
          },
          [&](const InstanceExists& v) {
            EventPattern p;
            p.kind = EventKind::MethodCall;
            p.name = "<init>";
            for (const TraceEvent& e : s.scan(p)) {
              const auto* obj =
                  std::get_if<ObjectRef>(&std::get<MethodCall>(e.event).subject);
              if (obj && obj->class_name == v.class_name) return true;
            }
            return false;
          },
          [&](const ExceptionCaught& v) {
            EventPattern p;
            p.kind = EventKind::Exception;
            p.uncaught = false;
            for (const TraceEvent& e : s.scan(p))
              if (std::get<Exception>(e.event).instance.class_name == v.class_name)
                return true;
            return false;
          },
          [&](const ThreadRunning& v) {
            auto st = thread_status(s);
            auto it = st.find(v.thread);
            return it != st.end() && it->second == ThreadStatus::Running;
          },
          [&](const ThreadExited& v) {
            auto st = thread_status(s);
            auto it = st.find(v.thread);
            return it != st.end() && it->second == ThreadStatus::Exited;
          },
      },
      q);
}

} // namespace jel
