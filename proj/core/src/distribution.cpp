#include "herdsim/distribution.hpp"

#include <cmath>
#include <limits>

#include "herdsim/error.hpp"

namespace herdsim {

double LogitVector::at(char label) const {
  auto it = logits.find(label);
  if (it == logits.end())
    throw ValidationError(std::string(1, label), "label not present in logit vector");
  return it->second;
}

double ChoiceDistribution::at(char label) const {
  auto it = probs.find(label);
  if (it == probs.end())
    throw ValidationError(std::string(1, label), "label not present in distribution");
  return it->second;
}

char ChoiceDistribution::argmax() const {
  if (probs.empty()) throw ValidationError("", "empty distribution");
  char best = probs.begin()->first;
  double best_p = probs.begin()->second;
  for (const auto& [label, p] : probs) {
    if (p > best_p) {  // strict: first (lowest) label wins ties
      best = label;
      best_p = p;
    }
  }
  return best;
}

double ChoiceDistribution::max_prob() const {
  if (probs.empty()) throw ValidationError("", "empty distribution");
  double m = 0.0;
  for (const auto& [label, p] : probs) m = std::max(m, p);
  return m;
}

void ChoiceDistribution::validate() const {
  if (probs.empty()) throw ValidationError("", "empty distribution");
  double sum = 0.0;
  for (const auto& [label, p] : probs) {
    if (!(p >= 0.0 && p <= 1.0))
      throw ValidationError(std::string(1, label), "probability outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("", "probabilities do not sum to 1");
}

ChoiceDistribution softmax_confidence(const LogitVector& logits, double tau) {
  if (!(tau > 0.0)) throw ValidationError("", "temperature must be > 0");
  if (logits.logits.empty()) throw ValidationError("", "empty logit vector");

  double max_logit = -std::numeric_limits<double>::infinity();
  for (const auto& [label, z] : logits.logits) {
    if (!std::isfinite(z))
      throw ValidationError(std::string(1, label), "non-finite logit");
    max_logit = std::max(max_logit, z);
  }

  ChoiceDistribution dist;
  double sum = 0.0;
  for (const auto& [label, z] : logits.logits) {
    const double e = std::exp((z - max_logit) / tau);
    dist.probs[label] = e;
    sum += e;
  }
  for (auto& [label, p] : dist.probs) p /= sum;
  return dist;
}

Response make_response(const LogitVector& logits, double tau) {
  Response r;
  r.distribution = softmax_confidence(logits, tau);
  r.choice = r.distribution.argmax();
  r.confidence = r.distribution.at(r.choice);
  return r;
}

char sample_choice(const ChoiceDistribution& dist, Rng& rng) {
  if (dist.probs.empty()) throw ValidationError("", "empty distribution");
  const double u = rng.next_double();
  double cum = 0.0;
  char last = dist.probs.begin()->first;
  for (const auto& [label, p] : dist.probs) {
    cum += p;
    last = label;
    if (u < cum) return label;
  }
  return last;  // guard against rounding at the tail
}

}  // namespace herdsim
