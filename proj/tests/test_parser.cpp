#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "jel/parser.hpp"

using namespace jel;

TEST(Parser, SingleThreadStartFact) {
  auto events = parse_trace("event(0, 'main', threadstart('main')).");
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].id, 0u);
  EXPECT_EQ(events[0].thread, "main");
  EXPECT_EQ(events[0].event, ExecutionEvent(ThreadStart{"main"}));
}

TEST(Parser, EmptyInputYieldsNoEvents) {
  EXPECT_TRUE(parse_trace("").empty());
  EXPECT_TRUE(parse_trace("   \n\t\n").empty());
  EXPECT_TRUE(parse_trace("% just a comment\n").empty());
}

TEST(Parser, NpeTraceHasSeventeenEventsInFigureOrder) {
  auto events = jeltest::npe_trace();
  ASSERT_EQ(events.size(), 17u);
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(events[i].id, i);
    EXPECT_EQ(events[i].thread, "main");
  }
  const EventKind expected[] = {
      EventKind::ThreadStart, EventKind::MethodCall, EventKind::MethodCall,
      EventKind::Step,        EventKind::MethodCall, EventKind::MethodCall,
      EventKind::MethodExit,  EventKind::Step,       EventKind::Step,
      EventKind::MethodCall,  EventKind::MethodExit, EventKind::Step,
      EventKind::Step,        EventKind::MethodCall, EventKind::MethodCall,
      EventKind::Exception,   EventKind::ThreadDeath};
  for (std::size_t i = 0; i < events.size(); ++i)
    EXPECT_EQ(kind_of(events[i]), expected[i]) << "event " << i;
}

TEST(Parser, NpeTracePayloadDetails) {
  auto events = jeltest::npe_trace();

  const auto& main_call = std::get<MethodCall>(events[1].event);
  EXPECT_EQ(main_call.location, (Location{"Example.java", 20}));
  EXPECT_EQ(main_call.subject, Subject(ClassRef{"Example"}));
  EXPECT_EQ(main_call.name, "main");
  ASSERT_EQ(main_call.args.size(), 1u);
  EXPECT_EQ(main_call.args[0], Value(ObjectRef{"java.lang.String[]", 641}));

  const auto& ctor = std::get<MethodCall>(events[2].event);
  EXPECT_EQ(ctor.name, "<init>");
  EXPECT_TRUE(ctor.args.empty());

  const auto& exit10 = std::get<MethodExit>(events[10].event);
  EXPECT_EQ(exit10.call_id, 9u);
  EXPECT_EQ(exit10.name, "doSomeThing");
  EXPECT_EQ(exit10.return_value, Value(Null{}));

  const auto& step12 = std::get<Step>(events[12].event);
  ASSERT_EQ(step12.locals.size(), 2u);
  EXPECT_EQ(step12.locals[0], (LocalVar{"o", ObjectRef{"FarAWayClass", 645}}));
  EXPECT_EQ(step12.locals[1], (LocalVar{"result", Null{}}));

  const auto& exc = std::get<Exception>(events[15].event);
  EXPECT_EQ(exc.instance, (ObjectRef{"java.lang.NullPointerException", 666}));
  EXPECT_EQ(exc.message, Value(Null{}));
  EXPECT_TRUE(exc.uncaught());

  const auto& exit6 = std::get<MethodExit>(events[6].event);
  EXPECT_EQ(exit6.return_value, Value(Void{}));
}

TEST(Parser, WhitespaceAndNewlinesInsideFactsAreInsignificant) {
  auto events = parse_trace("event(7,\n  'main'\t, step( l('A.java', 1) ,\n [] )) .");
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].event, ExecutionEvent(Step{{"A.java", 1}, {}}));
}

TEST(Parser, QuotedAndBareAtomsAreEquivalent) {
  auto a = parse_trace("event(0, main, threadstart(main)).");
  auto b = parse_trace("event(0, 'main', threadstart('main')).");
  EXPECT_EQ(a, b);

  auto c = parse_trace("event(1, t, methodexit(0, l(f, 1), c(k), m, 'void')).");
  auto d = parse_trace("event(1, t, methodexit(0, l(f, 1), c(k), m, void)).");
  EXPECT_EQ(c, d);
  EXPECT_EQ(std::get<MethodExit>(c[0].event).return_value, Value(Void{}));
}

TEST(Parser, ReservedValueTokens) {
  auto events =
      parse_trace("event(1, t, methodcall(l(f, 1), c(k), m, [null, 'null', void, x, 42, '42'])).");
  const auto& args = std::get<MethodCall>(events[0].event).args;
  ASSERT_EQ(args.size(), 6u);
  EXPECT_EQ(args[0], Value(Null{}));
  EXPECT_EQ(args[1], Value(Null{}));
  EXPECT_EQ(args[2], Value(Void{}));
  EXPECT_EQ(args[3], Value(Scalar{"x"}));
  EXPECT_EQ(args[4], Value(Scalar{"42"}));
  EXPECT_EQ(args[5], Value(Scalar{"42"}));
}

TEST(Parser, EscapedQuoteInsideAtom) {
  auto events = parse_trace("event(0, 'a''b', threadstart('it''s')).");
  EXPECT_EQ(events[0].thread, "a'b");
  EXPECT_EQ(std::get<ThreadStart>(events[0].event).group, "it's");
  auto again = parse_trace(serialize_trace(events));
  EXPECT_EQ(again, events);
}

TEST(Parser, CommentLinesAreSkipped) {
  auto events = parse_trace("% header\n  % indented comment\n"
                            "event(0, t, threadstart(t)).\n% trailing\n");
  EXPECT_EQ(events.size(), 1u);
}

TEST(Parser, MalformedInputs) {
  EXPECT_THROW(parse_trace("event(0, t, threadstart(t))"), ParseError);   // no '.'
  EXPECT_THROW(parse_trace("event(0, t, threadstart(t)."), ParseError);   // unbalanced
  EXPECT_THROW(parse_trace("event(0, t, bogus(t))."), ParseError);        // unknown functor
  EXPECT_THROW(parse_trace("event(x, t, threadstart(t))."), ParseError);  // non-integer id
  EXPECT_THROW(parse_trace("event(-1, t, threadstart(t))."), ParseError); // negative id
  EXPECT_THROW(parse_trace("fact(0, t, threadstart(t))."), ParseError);   // not an event
  EXPECT_THROW(parse_trace("event(0, t, step(l(f, 1), [x]))."), ParseError); // not lv(..)
  EXPECT_THROW(parse_trace("event(0, t, threadstart('oops)."), ParseError);  // open quote
}

TEST(Parser, ErrorCarriesPosition) {
  try {
    parse_trace("event(0, t, threadstart(t)).\nevent(1, t, bogus(t)).");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_GT(e.column(), 1u);
    EXPECT_EQ(e.found(), "'bogus'");
  }
}

TEST(Parser, ClassTermInValuePositionFoldsToScalar) {
  auto events = parse_trace("event(1, t, methodcall(l(f, 1), c(k), m, [c('Widget')])).");
  const auto& args = std::get<MethodCall>(events[0].event).args;
  EXPECT_EQ(args[0], Value(Scalar{"c('Widget')"}));
  EXPECT_EQ(parse_trace(serialize_trace(events)), events);
}

TEST(Parser, NegativeIntegerScalar) {
  auto events = parse_trace("event(1, t, setfield(l(f, 1), c(k), n, -5)).");
  EXPECT_EQ(std::get<SetField>(events[0].event).value, Value(Scalar{"-5"}));
  EXPECT_EQ(parse_trace(serialize_trace(events)), events);
}

TEST(Serializer, CanonicalStepLine) {
  TraceEvent e{3, "main", Step{{"Example.java", 3}, {}}};
  EXPECT_EQ(serialize_event(e), "event(3, 'main', step(l('Example.java', 3), [])).");
}

TEST(Serializer, EmptyTraceSerializesToEmptyText) {
  EXPECT_EQ(serialize_trace({}), "");
}

TEST(Serializer, NpeTraceRoundTrips) {
  auto events = jeltest::npe_trace();
  auto again = parse_trace(serialize_trace(events));
  EXPECT_EQ(again, events);
  // Canonical text is a fixed point.
  EXPECT_EQ(serialize_trace(again), serialize_trace(events));
}

TEST(Serializer, ScalarsKeepTokenTextExactly) {
  EXPECT_EQ(render_value(Scalar{"42"}), "42");
  EXPECT_EQ(render_value(Scalar{"-7"}), "-7");
  EXPECT_EQ(render_value(Scalar{"some result"}), "'some result'");
  EXPECT_EQ(render_value(Null{}), "null");
  EXPECT_EQ(render_value(Void{}), "void");
  EXPECT_EQ(render_value(ObjectRef{"A", 1}), "o('A', 1)");
}

TEST(Parser, SingleTermHelpers) {
  EXPECT_EQ(parse_value_text("o('A', 3)"), Value(ObjectRef{"A", 3}));
  EXPECT_EQ(parse_subject_text("c('A')"), Subject(ClassRef{"A"}));
  EXPECT_EQ(parse_location_text("l('A.java', 9)"), (Location{"A.java", 9}));
  EXPECT_THROW(parse_value_text("o('A', 3) junk"), ParseError);
}
