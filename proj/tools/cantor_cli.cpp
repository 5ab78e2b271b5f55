#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cantor/codec.hpp"
#include "cantor/coeffs.hpp"
#include "cantor/errors.hpp"
#include "cantor/fractal.hpp"
#include "cantor/numeric.hpp"
#include "cantor/pipeline.hpp"
#include "cantor/report.hpp"
#include "cantor/sequences.hpp"
#include "cantor/solver.hpp"
#include "cantor/stats.hpp"

using namespace cantor;
using nlohmann::json;

namespace {

// Exit status 2: the input was valid but the computation could not finish.
struct ComputationFailure : Error {
  json detail;
  ComputationFailure(const std::string& msg, json d) : Error(msg), detail(std::move(d)) {}
};

std::vector<std::uint64_t> parse_uint_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots != std::string::npos) {
      const std::uint64_t a = to_u64(parse_bigint(item.substr(0, dots)));
      const std::uint64_t b = to_u64(parse_bigint(item.substr(dots + 2)));
      if (a > b) throw ValueError("empty range '" + item + "'");
      for (std::uint64_t v = a; v <= b; ++v) out.push_back(v);
    } else {
      out.push_back(to_u64(parse_bigint(item)));
    }
  }
  if (out.empty()) throw ValueError("empty list");
  return out;
}

std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_rational(item));
  return out;
}

std::vector<std::uint64_t> default_checkpoints(std::uint64_t n) {
  std::vector<std::uint64_t> cps;
  for (std::uint64_t c = 10; c < n; c *= 10) cps.push_back(c);
  cps.push_back(n);
  return cps;
}

struct Output {
  std::string format = "json";
  std::string path;

  void write(const std::string& text) const {
    if (path.empty() || path == "-") {
      std::cout << text;
      if (!text.empty() && text.back() != '\n') std::cout << '\n';
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValueError("cannot open '" + path + "' for writing");
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
  }
  void write_json(const json& j) const { write(dump_json(j)); }
};

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValueError("cannot open '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ValueError("'" + path + "' is not valid JSON: " + e.what());
  }
}

json qvalue_json(const QValue& q) {
  if (q.shift == 0) return to_string(q.mantissa);
  return to_string(q.mantissa) + "*2^" + std::to_string(q.shift);
}

std::string csv_rows(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
    out += '\n';
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cantor series constructions and normality statistics"};
  app.set_config("--config", "", "key=value file supplying any flag; flags override it");
  app.require_subcommand(1);
  app.fallthrough();
  Output out;
  unsigned precision = 128;
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option("--format", out.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--precision", precision, "working precision in bits (>= 64)");
  app.add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t s) { seed = s, seed_given = true; }, "seed for sampling commands");
  app.add_option("--out", out.path, "output path (default stdout)");

  auto need_seed = [&] {
    if (!seed_given) throw ValueError("--seed is required for sampling commands");
  };

  // sequences
  std::string q_spec = "pow:1/4:1";
  std::uint64_t horizon = 10000, k_max = 3, show = 0;
  auto* seq = app.add_subcommand("sequences", "parse a sequence spec and classify it at a finite horizon");
  seq->add_option("--q", q_spec, "sequence spec")->required();
  seq->add_option("--horizon", horizon);
  seq->add_option("--k-max", k_max);
  seq->add_option("--values", show, "print the first N values");

  // coeffs
  std::uint64_t t = 3;
  std::string eps_text = "1/10", s_text = "even", c_override;
  auto* coeffs_cmd = app.add_subcommand("coeffs", "window coefficients and their consecutive-product sums");
  coeffs_cmd->add_option("--t", t)->required();
  coeffs_cmd->add_option("--eps", eps_text);
  coeffs_cmd->add_option("--s", s_text);
  coeffs_cmd->add_option("--k-max", k_max);
  coeffs_cmd->add_option("--c", c_override, "explicit coefficient list overriding t/eps/s");

  // solve
  std::string eps_list, c0_text;
  double tol = 1e-10;
  auto* solve = app.add_subcommand("solve", "Newton solve of the window system");
  solve->add_option("--t", t)->required();
  solve->add_option("--eps", eps_list, "comma-separated perturbations eps_1..eps_t (default 0)");
  solve->add_option("--c0", c0_text, "initial vector");
  solve->add_option("--tol", tol);

  // scan
  std::uint64_t t_min = 2, t_max = 109;
  auto* scan = app.add_subcommand("scan", "Newton runs from the automatic guess over a range of t");
  scan->add_option("--t-min", t_min);
  scan->add_option("--t-max", t_max);
  scan->add_option("--tol", tol);

  // build
  std::string mode = "toy", t_rule = "2i";
  std::uint64_t search_cap = 1'000'000'000;
  auto* build = app.add_subcommand("build", "kappa/K schedule for a basic sequence");
  build->add_option("--q", q_spec)->required();
  build->add_option("--mode", mode)->check(CLI::IsMember({"paper", "toy"}));
  build->add_option("--t-rule", t_rule);
  build->add_option("--eps", eps_text);
  build->add_option("--s", s_text);
  build->add_option("--horizon", horizon);
  build->add_option("--search-cap", search_cap);

  // generate
  std::string state_path;
  std::uint64_t n = 1000;
  bool psi = false;
  auto* gen = app.add_subcommand("generate", "seeded P-normal digits (or their psi image) to a digit file");
  gen->add_option("--state", state_path)->required();
  gen->add_option("--n", n);
  gen->add_flag("--psi", psi, "write y = psi(x) with respect to Q instead of x");

  // windows
  std::string k_text = "1..3";
  std::uint64_t min_first = 1;
  auto* windows = app.add_subcommand("windows", "per-window P and Q sums with predictions");
  windows->add_option("--state", state_path)->required();
  windows->add_option("--k", k_text);
  windows->add_option("--min-first", min_first);
  windows->add_option("--horizon", horizon, "default: the state's horizon");

  // analyze
  std::string digits_path, blocks_text, checkpoints_text, kind = "N";
  std::uint64_t k = 1, m = 2, r = 1, max_digit = 1;
  auto* analyze = app.add_subcommand("analyze", "normality statistics of a digit stream");
  analyze->add_option("--q", q_spec, "base sequence of the digit file");
  analyze->add_option("--digits", digits_path, "digit file");
  analyze->add_option("--state", state_path, "construct y from a schedule state (needs --seed)");
  analyze->add_option("--kind", kind)->check(CLI::IsMember({"N", "AP", "RN"}));
  analyze->add_option("--k", k);
  analyze->add_option("--m", m);
  analyze->add_option("--r", r);
  analyze->add_option("--max-digit", max_digit);
  analyze->add_option("--blocks", blocks_text, "comma-separated blocks such as 0,1 or 0-1");
  analyze->add_option("--n", n);
  analyze->add_option("--checkpoints", checkpoints_text);

  // markov
  std::uint64_t b = 2, order = 1, pert = 2, sample = 0;
  bool want_entropy = false, balanced = false;
  auto* markov = app.add_subcommand("markov", "perturbed Markov chain, entropy and sampled corpus");
  markov->add_option("--b", b);
  markov->add_option("--k", order);
  markov->add_option("--n", pert);
  markov->add_option("--sample", sample, "sample length");
  markov->add_flag("--entropy", want_entropy);
  markov->add_flag("--balanced", balanced, "deterministic balanced walk instead of sampling");

  // moran
  std::string moran_spec;
  std::uint64_t trunc = 100;
  auto* moran = app.add_subcommand("moran", "homogeneous Moran dimension bounds");
  moran->add_option("--spec", moran_spec)->required();
  moran->add_option("--trunc", trunc);

  // hdmain
  std::string lengths_text = "2..10", target = "vdc";
  double delta = 0.05;
  auto* hd = app.add_subcommand("hdmain", "interleaved construction, sampled y and its Moran bound");
  hd->add_option("--lengths", lengths_text, "l_2,l_3,... (ranges a..b allowed)");
  hd->add_option("--target", target)->check(CLI::IsMember({"zero", "vdc"}));
  hd->add_option("--delta", delta);
  hd->add_option("--horizon", horizon, "0 means the whole build");

  // discrepancy
  std::string points = "vdc", points_file;
  std::uint64_t count = 1000, base = 2;
  auto* disc = app.add_subcommand("discrepancy", "star discrepancy of a point set");
  disc->add_option("--points", points)->check(CLI::IsMember({"vdc", "file"}));
  disc->add_option("--file", points_file, "one point per line");
  disc->add_option("--count", count);
  disc->add_option("--base", base);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << dump_json({{"error", "usage"}, {"message", e.what()}}) << '\n';
    return 1;
  }

  try {
    set_default_precision(precision);
    const bool csv = out.format == "csv";

    if (*seq) {
      const BasicSequence q = BasicSequence::from_spec(q_spec);
      const ClassificationReport rep = classify(q, horizon, k_max);
      json j;
      j["spec"] = q.label();
      j["horizon"] = rep.horizon;
      j["monotone"] = rep.monotone;
      j["first_decrease"] = rep.first_decrease ? json(*rep.first_decrease) : json(nullptr);
      j["tail_minima_growing"] = rep.tail_minima_growing;
      j["declared"] = {{"nondecreasing", q.meta().nondecreasing},
                       {"infinite_in_limit", q.meta().infinite_in_limit},
                       {"fully_divergent", q.meta().fully_divergent}};
      json sums = json::array();
      for (const auto& row : rep.sums)
        sums.push_back({{"k", row.k}, {"value", row.value.to_double()}, {"err_bound", row.value.err_double()},
                        {"trend", row.trend}});
      j["sums"] = sums;
      j["note"] = rep.note;
      json vals = json::array();
      for (std::uint64_t i = 1; i <= show; ++i) vals.push_back(qvalue_json(q.at(i)));
      if (show) j["values"] = vals;
      out.write_json(j);
    } else if (*coeffs_cmd) {
      WindowCoefficients c;
      if (!c_override.empty()) {
        c = coefficients_from_values(parse_rational_list(c_override));
      } else {
        c = coefficients(t, parse_rational(eps_text), parse_sset(s_text));
      }
      const std::uint64_t kk = std::min<std::uint64_t>(k_max, c.t);
      json j;
      json cs = json::array(), sums = json::array();
      for (const auto& v : c.values) cs.push_back(to_string(v));
      for (std::uint64_t kk2 = 1; kk2 <= kk; ++kk2) {
        json row{{"k", kk2}, {"window_sum", to_string(window_sum(c, kk2))}};
        if (c_override.empty()) {
          const Rational cf = closed_form(c.t, kk2, c.eps, c.s);
          row["closed_form"] = to_string(cf);
          row["match"] = cf == window_sum(c, kk2);
        }
        sums.push_back(row);
      }
      j["t"] = c.t;
      j["c"] = cs;
      j["sums"] = sums;
      if (csv) {
        std::vector<std::vector<std::string>> rows{{"k", "window_sum"}};
        for (const auto& row : sums) rows.push_back({std::to_string(row["k"].get<std::uint64_t>()), row["window_sum"]});
        out.write(csv_rows(rows));
      } else {
        out.write_json(j);
      }
    } else if (*solve) {
      SystemSpec spec;
      spec.t = t;
      if (!eps_list.empty()) spec.eps = parse_rational_list(eps_list);
      std::optional<std::vector<double>> c0;
      if (!c0_text.empty()) {
        c0.emplace();
        for (const auto& v : parse_rational_list(c0_text)) c0->push_back(v.convert_to<double>());
      }
      NewtonOptions opt;
      opt.tol = tol;
      const Solution<Float> sol = solve_default(spec, c0, opt);
      json cs = json::array();
      for (Eigen::Index i = 0; i < sol.c.size(); ++i) cs.push_back(sol.c(i).convert_to<double>());
      json j{{"t", t},
             {"c", cs},
             {"residual", sol.residual.convert_to<double>()},
             {"in_region", sol.in_region},
             {"iterations", sol.iterations},
             {"status", to_string(sol.status)}};
      if (sol.status != SolveStatus::Converged) {
        j["diagnostic"] = sol.diagnostic;
        throw ComputationFailure("Newton did not converge", j);
      }
      out.write_json(j);
    } else if (*scan) {
      const auto rows = scan_region(t_min, t_max, tol);
      bool all = true;
      if (csv) {
        std::vector<std::vector<std::string>> tab{{"t", "status", "residual", "in_region", "iterations", "c1"}};
        for (const auto& row : rows) {
          all = all && row.converged && row.in_region;
          tab.push_back({std::to_string(row.t), row.status, format_double(row.residual), row.in_region ? "1" : "0",
                         std::to_string(row.iterations), format_double(row.c.front())});
        }
        out.write(csv_rows(tab));
      } else {
        json arr = json::array();
        for (const auto& row : rows) {
          all = all && row.converged && row.in_region;
          arr.push_back({{"t", row.t},
                         {"status", row.status},
                         {"residual", row.residual},
                         {"in_region", row.in_region},
                         {"iterations", row.iterations},
                         {"c", row.c}});
        }
        out.write_json({{"rows", arr}, {"all_converged_in_region", all}});
      }
    } else if (*build) {
      const BasicSequence q = BasicSequence::from_spec(q_spec);
      ScheduleParams params;
      params.mode = parse_schedule_mode(mode);
      params.t_rule = parse_t_rule(t_rule);
      params.eps = parse_rational(eps_text);
      params.s = parse_sset(s_text);
      params.search_cap = search_cap;
      try {
        out.write_json(state_to_json(build_schedule(q, params, horizon)));
      } catch (const ScheduleExhausted& e) {
        throw ComputationFailure(e.what(), {{"partial_state", state_to_json(e.partial())}, {"stage", e.stage()}});
      }
    } else if (*gen) {
      need_seed();
      const ScheduleState st = state_from_json(read_json_file(state_path));
      const BasicSequence q = BasicSequence::from_spec(st.q_label);
      const BasicSequence p = derive_p(q, st);
      const DigitStream x = generate_normal_digits(p, seed);
      if (out.path.empty()) throw ValueError("generate needs --out");
      write_digit_file(out.path, psi ? psi_map(p, q, x) : x, n);
    } else if (*windows) {
      const ScheduleState st = state_from_json(read_json_file(state_path));
      const BasicSequence q = BasicSequence::from_spec(st.q_label);
      const BasicSequence p = derive_p(q, st);
      const auto ks = parse_uint_list(k_text);
      const std::uint64_t h = windows->count("--horizon") ? horizon : st.horizon;
      const WindowReport rep = window_ratio_report(p, q, st, ks, h, min_first);
      if (csv) {
        std::vector<std::vector<std::string>> tab{
            {"i", "j", "t", "first", "alpha", "k", "constant_q", "p_sum", "q_sum", "ratio", "prediction", "err_bound"}};
        for (const auto& row : rep.rows) {
          for (const auto& term : row.terms) {
            tab.push_back({std::to_string(row.i), std::to_string(row.j), std::to_string(row.t),
                           std::to_string(row.first), to_string(row.alpha), std::to_string(term.k),
                           term.constant_q ? "1" : "0", term.p_sum.str(17), term.q_sum.str(17),
                           term.ratio ? format_double(*term.ratio) : "", term.prediction ? format_double(*term.prediction) : "",
                           format_double(term.p_sum.err_double() + term.q_sum.err_double())});
          }
        }
        out.write(csv_rows(tab));
      } else {
        json arr = json::array();
        for (const auto& row : rep.rows) {
          for (const auto& term : row.terms) {
            arr.push_back({{"i", row.i},
                           {"j", row.j},
                           {"t", row.t},
                           {"first", row.first},
                           {"alpha", to_string(row.alpha)},
                           {"k", term.k},
                           {"constant_q", term.constant_q},
                           {"p_sum", term.p_sum.to_double()},
                           {"q_sum", term.q_sum.to_double()},
                           {"ratio", term.ratio ? json(*term.ratio) : json(nullptr)},
                           {"prediction", term.prediction ? json(*term.prediction) : json(nullptr)}});
          }
        }
        out.write_json({{"windows", arr}});
      }
    } else if (*analyze) {
      std::optional<DigitStream> x;
      if (!state_path.empty()) {
        need_seed();
        const ScheduleState st = state_from_json(read_json_file(state_path));
        const BasicSequence q = BasicSequence::from_spec(st.q_label);
        const BasicSequence p = derive_p(q, st);
        x = psi_map(p, q, generate_normal_digits(p, seed));
      } else if (!digits_path.empty()) {
        if (analyze->count("--q") == 0) throw ValueError("analyze --digits needs --q");
        x = DigitStream::explicit_digits(read_digit_file(digits_path), BasicSequence::from_spec(q_spec));
        if (analyze->count("--n") == 0) n = *x->length();
      } else {
        throw ValueError("analyze needs --digits or --state");
      }
      const auto cps = checkpoints_text.empty() ? default_checkpoints(n) : parse_uint_list(checkpoints_text);
      std::vector<Block> blocks;
      if (!blocks_text.empty()) {
        std::stringstream ss(blocks_text);
        std::string item;
        while (std::getline(ss, item, ',')) blocks.push_back(parse_block(item));
      } else {
        blocks = all_blocks(k, max_digit);
      }
      std::vector<ReportRow> rows;
      if (kind == "N") {
        for (const auto& blk : blocks) {
          if (blk.size() != blocks.front().size()) throw ValueError("N rows need blocks of one length");
        }
        rows = normality_ratio_curve(*x, blocks.front().size(), blocks, cps).rows;
      } else if (kind == "AP") {
        rows = ap_ratio_curves(*x, m, r, {k}, max_digit, cps).rows;
      } else {
        rows = ratio_normality_rows(*x, blocks, cps);
      }
      out.write(csv ? rows_to_csv(rows) : dump_json(rows_to_json(rows)));
    } else if (*markov) {
      const MarkovSpec spec = markov_matrix(b, order, pert);
      json j{{"b", b}, {"k", order}, {"n", pert}};
      json mat = json::array();
      for (Eigen::Index i = 0; i < spec.P.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < spec.P.cols(); ++c) row.push_back(to_string(spec.P(i, c)));
        mat.push_back(row);
      }
      j["P"] = mat;
      j["rows_sum_to_one"] = rows_sum_to_one(spec);
      j["uniform_stationary"] = uniform_is_stationary(spec);
      if (want_entropy) {
        const EntropyResult h = entropy(spec);
        j["entropy"] = h.h.convert_to<double>();
        j["entropy_over_log_b"] = h.h_over_log_b.convert_to<double>();
        j["entropy_err_bound"] = h.err_bound;
      }
      if (sample) {
        std::vector<std::uint8_t> path;
        if (balanced) {
          path = balanced_walk(spec, sample);
        } else {
          need_seed();
          path = sample_markov(spec, seed, sample);
        }
        std::string digits;
        for (auto d : path) digits += std::to_string(d) + (b > 10 ? " " : "");
        j["sample"] = digits;
      }
      out.write_json(j);
    } else if (*moran) {
      const json spec_json = read_json_file(moran_spec);
      MoranSpec spec;
      try {
        for (const auto& v : spec_json.at("n")) spec.n.push_back(v.is_string() ? parse_bigint(v.get<std::string>()) : BigInt(v.get<std::uint64_t>()));
        for (const auto& v : spec_json.at("c")) spec.c.push_back(parse_rational(v.get<std::string>()));
        if (spec_json.contains("delta")) spec.delta = parse_rational(spec_json.at("delta").get<std::string>());
      } catch (const json::exception& e) {
        throw ValueError(std::string("malformed Moran spec: ") + e.what());
      }
      // A spec shorter than T + 1 levels repeats its last entry.
      while (spec.n.size() < trunc + 1) spec.n.push_back(spec.n.back());
      while (spec.c.size() < trunc + 1) spec.c.push_back(spec.c.back());
      const MoranBounds mb = moran_bounds(spec, trunc);
      out.write_json({{"truncation", trunc},
                      {"lower", mb.lower.back()},
                      {"upper", mb.upper.back()},
                      {"lower_liminf_estimate", mb.lower_liminf},
                      {"upper_liminf_estimate", mb.upper_liminf},
                      {"tail_window", {mb.tail_start, trunc}},
                      {"branch_hypothesis", mb.branch_hypothesis},
                      {"size_hypothesis", mb.size_hypothesis}});
    } else if (*hd) {
      need_seed();
      const HdmainBuild hb(parse_uint_list(lengths_text));
      const std::uint64_t h = hd->count("--horizon") && horizon ? std::min(horizon, hb.length()) : hb.length();
      const auto vdc = van_der_corput(h + 1);
      std::function<double(std::uint64_t)> xs = target == "zero" ? std::function<double(std::uint64_t)>([](std::uint64_t) { return 0.0; })
                                                                 : [vdc](std::uint64_t i) { return vdc.at(i); };
      const DigitStream xi = DigitStream::uniform(hb.p(), seed ^ 0x5eedULL);
      const DigitStream y = hdmain_sample_omega(hb, xi, xs, seed);
      const std::uint64_t look = dxn_lookahead(delta);
      const std::uint64_t last = h > look ? h - look : 1;
      const DxnReport dxn = dxn_density_report(y, xs, delta, {last}, 1);
      const MoranSpec ms = moran_params_from_omega(hb, h);
      const MoranBounds mb = moran_bounds(ms, h - 1);
      out.write_json({{"length", hb.length()},
                      {"horizon", h},
                      {"bound_expression", hb.bound_expression(h - 1).convert_to<double>()},
                      {"dxn_density", dxn.density.back()},
                      {"dxn_checkpoint", last},
                      {"moran_lower", mb.lower.back()},
                      {"moran_upper", mb.upper.back()},
                      {"branch_hypothesis", mb.branch_hypothesis},
                      {"note", dxn.note}});
    } else if (*disc) {
      std::vector<double> pts;
      if (points == "vdc") {
        pts = van_der_corput(count, base);
      } else {
        std::ifstream f(points_file);
        if (!f) throw ValueError("cannot open '" + points_file + "'");
        for (double v; f >> v;) pts.push_back(v);
      }
      out.write_json({{"count", pts.size()}, {"star_discrepancy", star_discrepancy(pts)}});
    }
  } catch (const ComputationFailure& e) {
    std::cerr << dump_json({{"error", "computation"}, {"message", e.what()}, {"detail", e.detail}}) << '\n';
    return 2;
  } catch (const SearchExhausted& e) {
    std::cerr << dump_json({{"error", "SearchExhausted"}, {"message", e.what()}, {"stage", e.stage()}, {"cap", e.cap()}}) << '\n';
    return 2;
  } catch (const PrecisionError& e) {
    std::cerr << dump_json({{"error", "PrecisionError"}, {"message", e.what()}}) << '\n';
    return 2;
  } catch (const OverflowPolicyError& e) {
    std::cerr << dump_json({{"error", "OverflowPolicyError"}, {"message", e.what()}}) << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << dump_json({{"error", "usage"}, {"message", e.what()}}) << '\n';
    return 1;
  }
  return 0;
}
