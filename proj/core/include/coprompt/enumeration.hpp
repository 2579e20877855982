#ifndef COPROMPT_CORE_ENUMERATION_HPP_
#define COPROMPT_CORE_ENUMERATION_HPP_

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "coprompt/reward.hpp"
#include "coprompt/types.hpp"

namespace coprompt {

using BigInt = boost::multiprecision::cpp_int;

struct EnumerationResult {
  std::vector<TokenId> best_sequence;
  double best_reward = 0.0;
  uint64_t states_visited = 0;
};

// Exhaustive search over every EOS-free sequence of length 0..max_len,
// scored by the task oracle as the continuation of x. Ties break toward the
// shortest, then lexicographically smallest sequence. Refuses with a size
// report (Error("guard")) when the search space exceeds 10^7 sequences.
EnumerationResult enumerate_optimal(const OracleSpec& spec, const Prompt& x,
                                    const Vocabulary& vocab, int max_len);

// Both sides of the decomposition size comparison, exact:
//   multi  = sum_i |V|^{len_i}
//   single = |V|^{sum_i len_i}
std::pair<BigInt, BigInt> problem_size(int64_t vocab_size,
                                       std::span<const int64_t> lengths);

// Literally enumerates (and counts) every sequence of exactly `len` tokens
// over a `base`-token alphabet. Cross-checks problem_size term by term.
uint64_t count_exact_sequences(int64_t base, int64_t len);

}  // namespace coprompt

#endif  // COPROMPT_CORE_ENUMERATION_HPP_
