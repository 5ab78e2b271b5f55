#include "cantor/pipeline.hpp"
#include "cantor/report.hpp"
#include "doctest.h"

using namespace cantor;

TEST_CASE("CSV rows") {
  ReportRow row;
  row.checkpoint = 100;
  row.kind = "N";
  row.k = 1;
  row.block = "0";
  row.count = 100;
  row.expected = 50;
  row.ratio = 2.0;
  ReportRow missing = row;
  missing.ratio.reset();
  const std::string csv = rows_to_csv({row, missing});
  CHECK(csv.rfind("checkpoint,kind,k,m,r,block,count,expected,ratio,err_bound\n", 0) == 0);
  CHECK(csv.find("100,N,1,1,0,0,100,50,2,0\n") != std::string::npos);
  CHECK(csv.find("100,N,1,1,0,0,100,50,,0\n") != std::string::npos);
  CHECK(rows_to_csv({row, missing}) == csv);
}

TEST_CASE("JSON output is deterministic") {
  ReportRow row;
  row.kind = "DISC";
  row.count = 0.1;
  const auto j = rows_to_json({row});
  CHECK(dump_json(j) == dump_json(rows_to_json({row})));
  CHECK(j[0]["kind"] == "DISC");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e300) == "1e+300");
}

TEST_CASE("schedule state round trip") {
  ScheduleParams p;
  p.t_rule = parse_t_rule("2i");
  p.eps = Rational(1, 10);
  p.s = parse_sset("even");
  const auto q = BasicSequence::from_spec("pow:1/4:1");
  const auto st = build_schedule(q, p, 200000);
  const auto back = state_from_json(state_to_json(st));
  CHECK(back.q_label == st.q_label);
  CHECK(back.horizon == st.horizon);
  CHECK(back.K == st.K);
  CHECK(back.kappa == st.kappa);
  CHECK(back.next_K == st.next_K);
  CHECK(back.next_kappa == st.next_kappa);
  CHECK(back.warnings == st.warnings);
  CHECK(back.params.eps == st.params.eps);
  CHECK(back.params.t_rule == st.params.t_rule);
  CHECK(back.params.s == st.params.s);
  CHECK(dump_json(state_to_json(back)) == dump_json(state_to_json(st)));
  auto broken = state_to_json(st);
  broken["format"] = "other";
  CHECK_THROWS(state_from_json(broken));
}
