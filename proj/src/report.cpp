#include "cantor/report.hpp"

#include <charconv>
#include <cmath>

#include "cantor/errors.hpp"

namespace cantor {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string rows_to_csv(const std::vector<ReportRow>& rows) {
  std::string out = "checkpoint,kind,k,m,r,block,count,expected,ratio,err_bound\n";
  for (const auto& r : rows) {
    out += std::to_string(r.checkpoint) + ',' + r.kind + ',' + std::to_string(r.k) + ',' + std::to_string(r.m) + ',' +
           std::to_string(r.r) + ',' + r.block + ',' + format_double(r.count) + ',' + format_double(r.expected) + ',' +
           (r.ratio ? format_double(*r.ratio) : std::string()) + ',' + format_double(r.err_bound) + '\n';
  }
  return out;
}

nlohmann::json rows_to_json(const std::vector<ReportRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["checkpoint"] = r.checkpoint;
    j["kind"] = r.kind;
    j["k"] = r.k;
    j["m"] = r.m;
    j["r"] = r.r;
    j["block"] = r.block;
    j["count"] = r.count;
    j["expected"] = r.expected;
    j["ratio"] = r.ratio ? nlohmann::json(*r.ratio) : nlohmann::json(nullptr);
    j["err_bound"] = r.err_bound;
    arr.push_back(std::move(j));
  }
  return arr;
}

nlohmann::json state_to_json(const ScheduleState& st) {
  nlohmann::json j;
  j["format"] = "cantor-schedule 1";
  j["q"] = st.q_label;
  j["mode"] = to_string(st.params.mode);
  j["t_rule"] = st.params.t_rule.label();
  j["eps"] = to_string(st.params.eps);
  j["s"] = st.params.s.label();
  j["search_cap"] = st.params.search_cap;
  j["horizon"] = st.horizon;
  nlohmann::json k = nlohmann::json::array(), kap = nlohmann::json::array();
  for (const auto& v : st.K) k.push_back(to_string(v));
  for (const auto& v : st.kappa) kap.push_back(to_string(v));
  j["K"] = k;
  j["kappa"] = kap;
  j["next_K"] = st.next_K ? nlohmann::json(to_string(*st.next_K)) : nlohmann::json(nullptr);
  j["next_kappa"] = st.next_kappa ? nlohmann::json(to_string(*st.next_kappa)) : nlohmann::json(nullptr);
  j["warnings"] = st.warnings;
  return j;
}

ScheduleState state_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "cantor-schedule 1") throw ValueError("not a schedule state file");
  try {
    ScheduleState st;
    st.q_label = j.at("q").get<std::string>();
    st.params.mode = parse_schedule_mode(j.at("mode").get<std::string>());
    st.params.t_rule = parse_t_rule(j.at("t_rule").get<std::string>());
    st.params.eps = parse_rational(j.at("eps").get<std::string>());
    st.params.s = parse_sset(j.at("s").get<std::string>());
    st.params.search_cap = j.at("search_cap").get<std::uint64_t>();
    st.horizon = j.at("horizon").get<std::uint64_t>();
    st.K.clear();
    for (const auto& v : j.at("K")) st.K.push_back(parse_bigint(v.get<std::string>()));
    for (const auto& v : j.at("kappa")) st.kappa.push_back(parse_bigint(v.get<std::string>()));
    if (st.K.empty() || st.K.front() != 0 || st.K.size() != st.kappa.size() + 1)
      throw ValueError("inconsistent K / kappa lists");
    if (!j.at("next_K").is_null()) st.next_K = parse_bigint(j.at("next_K").get<std::string>());
    if (!j.at("next_kappa").is_null()) st.next_kappa = parse_bigint(j.at("next_kappa").get<std::string>());
    st.warnings = j.at("warnings").get<std::vector<std::string>>();
    return st;
  } catch (const nlohmann::json::exception& e) {
    throw ValueError(std::string("malformed schedule state: ") + e.what());
  }
}

std::string dump_json(const nlohmann::json& j) { return j.dump(); }

}  // namespace cantor
