#include "coprompt/enumeration.hpp"

#include <string>

#include "coprompt/error.hpp"

namespace coprompt {
namespace {

// Lexicographic odometer over `alphabet` positions; returns false once the
// highest position wraps.
bool advance(std::vector<size_t>& digits, size_t alphabet) {
  for (size_t pos = digits.size(); pos-- > 0;) {
    if (++digits[pos] < alphabet) return true;
    digits[pos] = 0;
  }
  return false;
}

}  // namespace

EnumerationResult enumerate_optimal(const OracleSpec& spec, const Prompt& x,
                                    const Vocabulary& vocab, int max_len) {
  vocab.validate();
  x.validate(vocab);
  spec.validate(vocab);
  if (max_len < 0) throw Error("usage", "max_len must be >= 0");

  std::vector<TokenId> alphabet;
  for (TokenId t = 0; t < vocab.size; ++t) {
    if (t != vocab.eos_id) alphabet.push_back(t);
  }

  BigInt total = 0;
  {
    BigInt term = 1;
    for (int len = 0; len <= max_len; ++len) {
      total += term;
      term *= static_cast<int64_t>(alphabet.size());
    }
  }
  if (total > 10'000'000) {
    throw Error("guard", "enumeration space has " + total.str() +
                             " sequences (limit 10000000); lower max_len");
  }

  EnumerationResult result;
  bool have_best = false;
  std::vector<TokenId> seq;
  for (int len = 0; len <= max_len; ++len) {
    std::vector<size_t> digits(static_cast<size_t>(len), 0);
    do {
      seq.clear();
      for (size_t d : digits) seq.push_back(alphabet[d]);
      const double r = task_reward(x, seq, spec);
      ++result.states_visited;
      // Length-then-lex iteration order makes first-found win every tie.
      if (!have_best || r > result.best_reward) {
        have_best = true;
        result.best_reward = r;
        result.best_sequence = seq;
      }
    } while (advance(digits, alphabet.size()));
  }
  return result;
}

std::pair<BigInt, BigInt> problem_size(int64_t vocab_size,
                                       std::span<const int64_t> lengths) {
  if (vocab_size < 1) throw Error("usage", "vocab_size must be >= 1");
  BigInt multi = 0;
  int64_t total_len = 0;
  for (int64_t len : lengths) {
    if (len < 0) throw Error("usage", "lengths must be non-negative");
    multi += boost::multiprecision::pow(BigInt(vocab_size),
                                        static_cast<unsigned>(len));
    total_len += len;
  }
  const BigInt single = boost::multiprecision::pow(
      BigInt(vocab_size), static_cast<unsigned>(total_len));
  return {multi, single};
}

uint64_t count_exact_sequences(int64_t base, int64_t len) {
  if (base < 1 || len < 0) throw Error("usage", "invalid counting bounds");
  BigInt expected = boost::multiprecision::pow(BigInt(base),
                                               static_cast<unsigned>(len));
  if (expected > 10'000'000) {
    throw Error("guard", "counting space has " + expected.str() +
                             " sequences (limit 10000000)");
  }
  std::vector<size_t> digits(static_cast<size_t>(len), 0);
  uint64_t count = 0;
  do {
    ++count;
  } while (advance(digits, static_cast<size_t>(base)));
  return count;
}

}  // namespace coprompt
