#pragma once

#include <map>

#include "herdsim/rng.hpp"

namespace herdsim {

// Unnormalized logit score per choice label. Key set always equals the
// question's label set; values must be finite.
struct LogitVector {
  std::map<char, double> logits;

  double at(char label) const;
  bool operator==(const LogitVector&) const = default;
};

// Normalized probability vector over a question's choice labels.
struct ChoiceDistribution {
  std::map<char, double> probs;

  double at(char label) const;

  /// Highest-probability label; ties break to the lowest label.
  char argmax() const;
  double max_prob() const;

  /// Throws ValidationError unless probabilities are in [0,1] and sum to 1
  /// within 1e-9.
  void validate() const;

  bool operator==(const ChoiceDistribution&) const = default;
};

struct Response {
  char choice = 'A';
  ChoiceDistribution distribution;
  double confidence = 0.0;  // distribution[choice]
};

/// Softmax with temperature division, stabilized by subtracting the max
/// logit. Requires tau > 0 and finite logits.
ChoiceDistribution softmax_confidence(const LogitVector& logits, double tau);

/// Response at confidence temperature tau: distribution = softmax, choice =
/// argmax (lowest-label tie-break). Greedy (tau = 0) selection is the same
/// argmax, so callers model it by selecting choice rather than sampling.
Response make_response(const LogitVector& logits, double tau);

/// One categorical draw from the distribution.
char sample_choice(const ChoiceDistribution& dist, Rng& rng);

}  // namespace herdsim
