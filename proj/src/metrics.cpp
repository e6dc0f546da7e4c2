#include "factedit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace factedit {

namespace {

using Multiset = std::map<Tokens, long>;

Multiset ngrams(const Tokens& toks, std::size_t n) {
  Multiset out;
  if (toks.size() < n) return out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    ++out[Tokens(toks.begin() + i, toks.begin() + i + n)];
  return out;
}

Multiset intersect(const Multiset& a, const Multiset& b) {
  Multiset out;
  for (const auto& [g, c] : a) {
    auto it = b.find(g);
    if (it != b.end()) out[g] = std::min(c, it->second);
  }
  return out;
}

Multiset subtract(const Multiset& a, const Multiset& b) {
  Multiset out;
  for (const auto& [g, c] : a) {
    auto it = b.find(g);
    const long d = c - (it == b.end() ? 0 : it->second);
    if (d > 0) out[g] = d;
  }
  return out;
}

long total(const Multiset& m) {
  long t = 0;
  for (const auto& [g, c] : m) t += c;
  return t;
}

double multiset_f1(const Multiset& pred, const Multiset& gold) {
  const long np = total(pred), ng = total(gold);
  if (np == 0 && ng == 0) return 1.0;
  if (np == 0 || ng == 0) return 0.0;
  const long hit = total(intersect(pred, gold));
  if (hit == 0) return 0.0;
  const double p = static_cast<double>(hit) / np;
  const double r = static_cast<double>(hit) / ng;
  return 2.0 * p * r / (p + r);
}

}  // namespace

SariScore sari(const Tokens& input, const Tokens& output, const Tokens& reference) {
  if (input.empty() || reference.empty())
    throw CorpusError("sari: input and reference must be nonempty");
  double keep = 0.0, added = 0.0, del = 0.0;
  constexpr std::size_t kMaxN = 4;
  for (std::size_t n = 1; n <= kMaxN; ++n) {
    const Multiset in = ngrams(input, n);
    const Multiset out = ngrams(output, n);
    const Multiset ref = ngrams(reference, n);
    keep += multiset_f1(intersect(in, out), intersect(in, ref));
    added += multiset_f1(subtract(out, in), subtract(ref, in));
    del += multiset_f1(subtract(in, out), subtract(in, ref));
  }
  SariScore s;
  s.keep_f1 = keep / kMaxN;
  s.add_f1 = added / kMaxN;
  s.del_f1 = del / kMaxN;
  s.sari = std::cbrt(s.keep_f1 * s.add_f1 * s.del_f1);
  return s;
}

PrfScore mask_prf(const std::vector<std::vector<int>>& predicted,
                  const std::vector<std::vector<int>>& gold) {
  if (predicted.size() != gold.size())
    throw CorpusError("mask_prf: corpus size mismatch");
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i].size() != gold[i].size())
      throw CorpusError("mask_prf: mask length mismatch at pair " + std::to_string(i));
    for (std::size_t j = 0; j < predicted[i].size(); ++j) {
      const bool p = predicted[i][j] != 0, g = gold[i][j] != 0;
      if (p && g) ++tp;
      else if (p) ++fp;
      else if (g) ++fn;
    }
  }
  PrfScore s;
  if (tp + fp + fn == 0) {
    s.precision = s.recall = s.f1 = 1.0;
    return s;
  }
  s.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

double agreement_rate(
    const std::function<Relation(const Tokens&, const Tokens&)>& judge,
    const std::vector<std::pair<Tokens, Tokens>>& rewrites) {
  if (rewrites.empty()) throw CorpusError("agreement_rate: empty rewrite list");
  long hits = 0;
  for (const auto& [sentence, claim] : rewrites)
    if (judge(sentence, claim) == Relation::AGREE) ++hits;
  return static_cast<double>(hits) / static_cast<double>(rewrites.size());
}

}  // namespace factedit
