#pragma once

#include <functional>

#include "factedit/corpus.hpp"

namespace factedit {

struct SariScore {
  double keep_f1 = 0.0;
  double add_f1 = 0.0;
  double del_f1 = 0.0;
  double sari = 0.0;
};

// F1 of kept/added/deleted n-grams (n = 1..4, clipped multiset counts)
// against input and reference; per-component arithmetic mean over n, then
// geometric mean of the three components. Both-empty sets score 1, exactly
// one empty scores 0.
SariScore sari(const Tokens& input, const Tokens& output, const Tokens& reference);

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Micro-averaged token-level scores over aligned hard masks; masked = positive.
PrfScore mask_prf(const std::vector<std::vector<int>>& predicted,
                  const std::vector<std::vector<int>>& gold);

// Fraction of (rewrite, claim) pairs the judge labels AGREE.
double agreement_rate(
    const std::function<Relation(const Tokens& sentence, const Tokens& claim)>& judge,
    const std::vector<std::pair<Tokens, Tokens>>& rewrites);

}  // namespace factedit
