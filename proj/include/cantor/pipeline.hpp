#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cantor/codec.hpp"
#include "cantor/coeffs.hpp"
#include "cantor/errors.hpp"
#include "cantor/fractal.hpp"
#include "cantor/numeric.hpp"
#include "cantor/sequences.hpp"
#include "cantor/sset.hpp"

namespace cantor {

/// p_n = max(floor(q_n / c_r), 2) when r = ((n-1) mod 2t) + 1 <= t, else 2^n q_n.
QValue xi_transform(const QValue& q, std::uint64_t n, const WindowCoefficients& c);

/// Window half-lengths t_i: "fact" (i!), "Ai" (A times i, e.g. "2i" or "i") or "const:T".
struct TRule {
  enum class Kind { Factorial, Linear, Constant };
  Kind kind = Kind::Linear;
  std::uint64_t a = 2;

  std::uint64_t at(std::uint64_t i) const;  // RangeError when t_i does not fit in 64 bits
  std::string label() const;
  bool operator==(const TRule&) const = default;
};

TRule parse_t_rule(std::string_view text);

enum class ScheduleMode { Paper, Toy };
std::string to_string(ScheduleMode mode);
ScheduleMode parse_schedule_mode(std::string_view text);

struct ScheduleParams {
  ScheduleMode mode = ScheduleMode::Toy;
  TRule t_rule;  // ignored in paper mode, where t_i = i!
  Rational eps{1, 10};
  SSet s{SSet::Kind::Even};
  std::uint64_t search_cap = 1'000'000'000;

  std::uint64_t t(std::uint64_t i) const;
};

struct KappaResult {
  BigInt kappa;
  BigInt threshold_position;  // first n with q_n >= (1 + eps) t_{i+1}^2
  std::optional<BigInt> growth_position;  // paper mode: last n with q_n^{i+1} >= n
  bool growth_certified = true;           // false when the growth condition was only spot-checked
  std::string note;
};

/// Smallest j in [1, search_cap] satisfying the stage conditions; SearchExhausted otherwise.
KappaResult find_kappa(const BasicSequence& q, const ScheduleParams& params, std::uint64_t i, const BigInt& k_prev);

struct ScheduleState {
  ScheduleParams params;
  std::string q_label;
  std::uint64_t horizon = 0;
  std::vector<BigInt> K{BigInt(0)};  // K_0 = 0, ..., K_m <= horizon
  std::vector<BigInt> kappa;         // kappa_1, ..., kappa_m
  // Stage m + 1, which contains the positions (K_m, horizon].
  std::optional<BigInt> next_kappa;
  std::optional<BigInt> next_K;
  std::vector<std::string> warnings;

  std::uint64_t resolved_stages() const { return kappa.size(); }
  std::uint64_t t(std::uint64_t i) const { return params.t(i); }
  /// Largest position for which i(n) and j(n) are defined.
  BigInt defined_limit() const;
  std::uint64_t stage_of(std::uint64_t n) const;   // i(n)
  std::uint64_t window_of(std::uint64_t n) const;  // j(n)
  const BigInt& stage_start(std::uint64_t i) const;  // K_{i-1}
  /// Number of windows in stage i when known (kappa_i).
  std::optional<BigInt> stage_windows(std::uint64_t i) const;
};

/// Thrown when the search cap is hit before the horizon; carries the stages built so far.
class ScheduleExhausted : public SearchExhausted {
 public:
  ScheduleExhausted(const SearchExhausted& base, ScheduleState partial)
      : SearchExhausted(base), partial_(std::move(partial)) {}
  const ScheduleState& partial() const noexcept { return partial_; }

 private:
  ScheduleState partial_;
};

ScheduleState build_schedule(const BasicSequence& q, const ScheduleParams& params, std::uint64_t horizon);

/// p_n = Xi(Q, t_{i(n)})_n, evaluated lazily.
BasicSequence derive_p(const BasicSequence& q, const ScheduleState& state);

/// Independent uniform digits with respect to P.
DigitStream generate_normal_digits(const BasicSequence& p, std::uint64_t seed);

struct Construction {
  ScheduleState state;
  BasicSequence p;
  DigitStream x;
  DigitStream y;
};

Construction construct_y(const BasicSequence& q, const ScheduleParams& params, std::uint64_t seed,
                         std::uint64_t horizon);

struct WindowTerm {
  std::uint64_t k = 0;
  HighPrecReal p_sum;
  HighPrecReal q_sum;
  bool constant_q = false;  // q constant on the window extended by k - 1 positions
  std::optional<double> ratio;       // Q sum / P sum
  std::optional<double> prediction;  // 2 t / window_sum(c, k), for k <= t
};

struct WindowRow {
  std::uint64_t i = 0, t = 0;
  std::uint64_t j = 0;
  std::uint64_t first = 0;  // first position K_{i-1} + 2 t j + 1
  BigInt alpha;             // q at the first position
  std::vector<WindowTerm> terms;
};

struct WindowReport {
  std::vector<WindowRow> rows;
  std::uint64_t last_position = 0;
};

/// Window sums over positions K_{i-1} + 2 t_i j + v, v = 1..2t_i, for every complete window whose
/// extended range ends by `horizon` and whose first position is at least `min_first`.
WindowReport window_ratio_report(const BasicSequence& p, const BasicSequence& q, const ScheduleState& state,
                                 const std::vector<std::uint64_t>& ks, std::uint64_t horizon,
                                 std::uint64_t min_first = 1);

/// Sum of P and Q window terms of order k over rows starting at min_first or later; the ratio
/// P/Q is the expected count of a zero block per unit of Q_n^{(k)} along these windows.
struct AggregatedRatio {
  std::uint64_t k = 0;
  std::uint64_t windows = 0;
  HighPrecReal p_total;
  HighPrecReal q_total;
  std::optional<double> ratio;
};

AggregatedRatio aggregate_windows(const WindowReport& report, std::uint64_t k, std::uint64_t min_first = 1);

/// Block layout [i]^{l_i} for 6 <= i <= i_max with l_i = 3^{i!} (i+1)^{i! i}.
SequenceSpec comp_schedule(std::uint64_t i_max);
BigInt comp_block_length(std::uint64_t i);

/// Interleaved construction [2]^{l_2} [2^4 * 2]^{4 l_2} [3]^{l_3} [2^8 * 3]^{8 l_3} ...
class HdmainBuild {
 public:
  /// lengths[0] = l_2, lengths[1] = l_3, ...; every entry >= 1.
  explicit HdmainBuild(std::vector<std::uint64_t> lengths);

  struct Position {
    std::uint64_t block = 0;  // j: the pair [j]^{l_j} [2^{2^j} j]^{2^j l_j}
    bool copy = false;
    std::uint64_t offset = 0;      // n - M_{j-2}
    std::uint64_t p_position = 0;  // L_{j-2} + offset, for copy positions
  };

  std::uint64_t length() const { return m_.back(); }
  std::uint64_t blocks() const { return lengths_.size(); }
  const std::vector<std::uint64_t>& lengths() const { return lengths_; }
  std::uint64_t L(std::uint64_t i) const { return l_.at(i); }  // sum_{j=2}^{i+1} l_j
  std::uint64_t M(std::uint64_t i) const { return m_.at(i); }  // sum_{j=2}^{i+1} (2^j + 1) l_j
  /// min{j : M_j < n} as written; 0 for every n >= 1 since M_0 = 0.
  std::uint64_t alpha_literal(std::uint64_t n) const;
  Position locate(std::uint64_t n) const;

  const BasicSequence& q() const { return q_; }
  const BasicSequence& p() const { return p_; }

  /// eps_n = min(log(q_1...q_{n-1}), log q_n)^{1/2} / log q_n.
  Float eps(std::uint64_t n) const;
  /// omega_n = q_n^{1 - eps_n}.
  Float omega(std::uint64_t n) const;
  BigInt omega_floor(std::uint64_t n) const;
  /// log(q_1 ... q_n), with log_prefix(0) = 0.
  Float log_prefix(std::uint64_t n) const;
  /// 1 / (1 + eps_{n+1} log q_{n+1} / log(q_1 ... q_n)).
  Float bound_expression(std::uint64_t n) const;

 private:
  std::vector<std::uint64_t> lengths_;
  std::vector<std::uint64_t> l_, m_;
  BasicSequence q_, p_;
  std::vector<Float> log_prefix_;
};

/// The digit interval V_n at a free position n, clipped to [0, q_n - 1].
struct DigitInterval {
  BigInt center, lo, hi;
};
DigitInterval hdmain_interval(const HdmainBuild& build, std::uint64_t n, double target);

/// y in Omega: copy positions take xi's digit, free positions a seeded uniform digit of V_n
/// centred on floor(q_n x_{n-1}), so that T_{Q,n}(y) tracks x_n.
DigitStream hdmain_sample_omega(const HdmainBuild& build, const DigitStream& xi,
                                std::function<double(std::uint64_t)> xs, std::uint64_t seed);

/// n_k = 1 at copy positions and 2 floor(omega_k) + 1 elsewhere; c_k = 1 / q_k; k <= horizon.
MoranSpec moran_params_from_omega(const HdmainBuild& build, std::uint64_t horizon);

}  // namespace cantor
