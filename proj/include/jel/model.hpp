#pragma once

// Domain types for JEL (Java Events Log) traces: one immutable TraceEvent per
// recorded execution event, with a nine-variant payload. Everything here is a
// plain value type; equality is structural.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace jel {

using EventId = std::uint64_t;

namespace detail {
template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;
} // namespace detail

struct Location {
  std::string file;
  std::uint32_t line = 1;
  bool operator==(const Location&) const = default;
};

struct ClassRef {
  std::string class_name;
  bool operator==(const ClassRef&) const = default;
};

struct ObjectRef {
  std::string class_name;
  std::uint64_t object_id = 0;
  bool operator==(const ObjectRef&) const = default;
};

// c('Name') or o('Name', Id): the class or instance an event acts on.
using Subject = std::variant<ClassRef, ObjectRef>;

struct Null {
  bool operator==(const Null&) const = default;
};
struct Void {
  bool operator==(const Void&) const = default;
};

// Any other atom or integer token, kept verbatim so traces re-serialize
// without loss. No numeric interpretation is ever applied.
struct Scalar {
  std::string text;
  bool operator==(const Scalar&) const = default;
};

using Value = std::variant<Null, Void, Scalar, ObjectRef>;

enum class FieldKind { Class, Instance };

struct FieldDecl {
  FieldKind kind = FieldKind::Instance;
  std::string name;
  bool operator==(const FieldDecl&) const = default;
};

struct LocalVar {
  std::string name;
  Value value;
  bool operator==(const LocalVar&) const = default;
};

// ---------------------------------------------------------------------------
// The nine payload variants of Table-2 JEL.

struct MethodCall {
  Location location;
  Subject subject;
  std::string name; // constructors are ordinary calls named "<init>"
  std::vector<Value> args;
  bool operator==(const MethodCall&) const = default;
};

struct MethodExit {
  EventId call_id = 0; // id of the matching MethodCall
  Location location;
  Subject subject;
  std::string name;
  Value return_value;
  bool operator==(const MethodExit&) const = default;
};

struct SetField {
  Location location;
  Subject subject;
  std::string field_name;
  Value value;
  bool operator==(const SetField&) const = default;
};

struct DataStructure {
  Location location;
  std::vector<Value> contents;
  bool operator==(const DataStructure&) const = default;
};

struct Step {
  Location location;
  std::vector<LocalVar> locals;
  bool operator==(const Step&) const = default;
};

struct Exception {
  Location location;
  ObjectRef instance;
  Value message;
  std::optional<Location> catch_site; // nullopt = uncaught
  bool operator==(const Exception&) const = default;

  bool uncaught() const { return !catch_site.has_value(); }
};

struct ThreadStart {
  std::string group;
  bool operator==(const ThreadStart&) const = default;
};

struct ThreadDeath {
  std::string group;
  bool operator==(const ThreadDeath&) const = default;
};

struct MemberFields {
  std::string class_name;
  std::vector<FieldDecl> fields;
  bool operator==(const MemberFields&) const = default;
};

using ExecutionEvent =
    std::variant<MethodCall, MethodExit, SetField, DataStructure, Step,
                 Exception, ThreadStart, ThreadDeath, MemberFields>;

struct TraceEvent {
  EventId id = 0;
  std::string thread;
  ExecutionEvent event;
  bool operator==(const TraceEvent&) const = default;
};

// Kept in variant order so kind_of() is just the index.
enum class EventKind {
  MethodCall,
  MethodExit,
  SetField,
  DataStructure,
  Step,
  Exception,
  ThreadStart,
  ThreadDeath,
  MemberFields,
};

inline constexpr std::size_t kEventKindCount = 9;

inline EventKind kind_of(const ExecutionEvent& e) {
  return static_cast<EventKind>(e.index());
}
inline EventKind kind_of(const TraceEvent& e) { return kind_of(e.event); }

inline const char* kind_name(EventKind k) {
  switch (k) {
  case EventKind::MethodCall: return "methodcall";
  case EventKind::MethodExit: return "methodexit";
  case EventKind::SetField: return "setfield";
  case EventKind::DataStructure: return "datastructure";
  case EventKind::Step: return "step";
  case EventKind::Exception: return "exception";
  case EventKind::ThreadStart: return "threadstart";
  case EventKind::ThreadDeath: return "threaddeath";
  case EventKind::MemberFields: return "memberfields";
  }
  return "?";
}

// The source location an event carries, or nullptr for thread/memberfields
// events which have none.
inline const Location* event_location(const ExecutionEvent& e) {
  return std::visit(
      detail::overloaded{
          [](const MethodCall& v) { return &v.location; },
          [](const MethodExit& v) { return &v.location; },
          [](const SetField& v) { return &v.location; },
          [](const DataStructure& v) { return &v.location; },
          [](const Step& v) { return &v.location; },
          [](const Exception& v) { return &v.location; },
          [](const ThreadStart&) -> const Location* { return nullptr; },
          [](const ThreadDeath&) -> const Location* { return nullptr; },
          [](const MemberFields&) -> const Location* { return nullptr; },
      },
      e);
}

// The class or instance an event acts on. Exception events yield their
// exception instance, memberfields events the declaring class.
inline std::optional<Subject> event_subject(const ExecutionEvent& e) {
  return std::visit(
      detail::overloaded{
          [](const MethodCall& v) -> std::optional<Subject> { return v.subject; },
          [](const MethodExit& v) -> std::optional<Subject> { return v.subject; },
          [](const SetField& v) -> std::optional<Subject> { return v.subject; },
          [](const Exception& v) -> std::optional<Subject> { return Subject{v.instance}; },
          [](const MemberFields& v) -> std::optional<Subject> {
            return Subject{ClassRef{v.class_name}};
          },
          [](const auto&) -> std::optional<Subject> { return std::nullopt; },
      },
      e);
}

// Method name for calls/exits, field name for setfield.
inline const std::string* event_name(const ExecutionEvent& e) {
  return std::visit(
      detail::overloaded{
          [](const MethodCall& v) { return &v.name; },
          [](const MethodExit& v) { return &v.name; },
          [](const SetField& v) { return &v.field_name; },
          [](const auto&) -> const std::string* { return nullptr; },
      },
      e);
}

// True when the event carries `v` in any of its value slots: an argument, a
// return value, an assigned field value, a data-structure element, a local
// variable value, or an exception message.
inline bool event_carries_value(const ExecutionEvent& e, const Value& v) {
  return std::visit(
      detail::overloaded{
          [&](const MethodCall& c) {
            for (const auto& a : c.args)
              if (a == v) return true;
            return false;
          },
          [&](const MethodExit& x) { return x.return_value == v; },
          [&](const SetField& s) { return s.value == v; },
          [&](const DataStructure& d) {
            for (const auto& c : d.contents)
              if (c == v) return true;
            return false;
          },
          [&](const Step& s) {
            for (const auto& lv : s.locals)
              if (lv.value == v) return true;
            return false;
          },
          [&](const Exception& x) { return x.message == v; },
          [&](const auto&) { return false; },
      },
      e);
}

// ---------------------------------------------------------------------------
// EventPattern: a conjunction of optional constraints; an absent field is a
// wildcard. A constraint that does not apply to the event's kind (e.g. a name
// constraint against a step event) fails.

struct EventPattern {
  std::optional<EventKind> kind;
  std::optional<std::string> thread;
  std::optional<Subject> subject;
  std::optional<std::string> name; // method or field name
  std::optional<std::size_t> arg_count;
  std::optional<Value> value;
  std::optional<Location> location;
  std::optional<EventId> min_id;
  std::optional<EventId> max_id;
  std::optional<bool> uncaught; // exception catch status
};

inline bool matches(const EventPattern& p, const TraceEvent& e) {
  if (p.kind && *p.kind != kind_of(e)) return false;
  if (p.thread && *p.thread != e.thread) return false;
  if (p.min_id && e.id < *p.min_id) return false;
  if (p.max_id && e.id > *p.max_id) return false;
  if (p.subject) {
    auto s = event_subject(e.event);
    if (!s || *s != *p.subject) return false;
  }
  if (p.name) {
    const std::string* n = event_name(e.event);
    if (!n || *n != *p.name) return false;
  }
  if (p.arg_count) {
    const auto* c = std::get_if<MethodCall>(&e.event);
    if (!c || c->args.size() != *p.arg_count) return false;
  }
  if (p.value && !event_carries_value(e.event, *p.value)) return false;
  if (p.location) {
    const Location* l = event_location(e.event);
    if (!l || *l != *p.location) return false;
  }
  if (p.uncaught) {
    const auto* x = std::get_if<Exception>(&e.event);
    if (!x || x->uncaught() != *p.uncaught) return false;
  }
  return true;
}

} // namespace jel
