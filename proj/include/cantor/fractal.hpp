#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/eigen.hpp>

#include "cantor/numeric.hpp"

namespace cantor {

using RationalMatrix = Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic>;
using RationalRow = Eigen::Matrix<Rational, 1, Eigen::Dynamic>;

/// Order-k Markov chain on base-b blocks; state index = block read as a base-b numeral.
struct MarkovSpec {
  std::uint64_t b = 2, k = 1, n = 2;
  RationalMatrix P;
  RationalRow initial;

  std::uint64_t states() const { return static_cast<std::uint64_t>(P.rows()); }
};

MarkovSpec markov_matrix(std::uint64_t b, std::uint64_t k, std::uint64_t n);

std::uint64_t block_index(const std::vector<std::uint64_t>& block, std::uint64_t b);
std::vector<std::uint64_t> index_block(std::uint64_t index, std::uint64_t b, std::uint64_t k);

/// Exact checks: row sums, stationarity of the uniform vector, overlap support.
bool rows_sum_to_one(const MarkovSpec& spec);
bool uniform_is_stationary(const MarkovSpec& spec);
bool supported_on_overlaps(const MarkovSpec& spec);

struct EntropyResult {
  Float h;           // natural-log units
  Float h_over_log_b;
  double err_bound = 0;
};

EntropyResult entropy(const MarkovSpec& spec);

/// Measure of the cylinder [block] under the image of the chain (block length >= k).
Rational cylinder_measure(const MarkovSpec& spec, const std::vector<std::uint64_t>& block);

/// Seeded path of the chain; emits the first letter of each visited state.
std::vector<std::uint8_t> sample_markov(const MarkovSpec& spec, std::uint64_t seed, std::uint64_t length);

/// Deterministic walk that at each state takes the transition furthest behind its expected count.
std::vector<std::uint8_t> balanced_walk(const MarkovSpec& spec, std::uint64_t length);

struct MoranSpec {
  std::vector<BigInt> n;    // branch counts
  std::vector<Rational> c;  // contraction ratios in (0, 1)
  Rational delta{1};
};

struct MoranBounds {
  std::vector<double> lower, upper;  // index k-1 holds the bound at level k
  std::vector<double> lower_running_min, upper_running_min;
  std::uint64_t tail_start = 0;  // liminf estimates use levels tail_start..T
  double lower_liminf = 0, upper_liminf = 0;
  bool branch_hypothesis = true;  // every n_k >= 2
  bool size_hypothesis = true;    // n_1 c_1 <= delta and n_k c_k <= 1
};

/// Level-k bounds log(n_1...n_k) / -log(c_1...c_{k+1} n_{k+1}) and log(n_1...n_k) / -log(c_1...c_k).
MoranBounds moran_bounds(const MoranSpec& spec, std::uint64_t truncation);

}  // namespace cantor
