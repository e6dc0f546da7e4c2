#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "factedit/tensor.hpp"

namespace factedit {

// Reserved vocabulary ids, fixed across the whole pipeline.
inline constexpr int kPad = 0;
inline constexpr int kUnk = 1;
inline constexpr int kMaskTok = 2;  // the deletion placeholder (rendered "<mask>")
inline constexpr int kBos = 3;
inline constexpr int kEos = 4;
inline constexpr int kNumReserved = 5;

class VocabError : public TensorError {
 public:
  using TensorError::TensorError;
};

struct EmbeddingTable {
  int vocab_size = 0;
  int dim = 0;
  TensorPtr weight;  // [vocab_size x dim]

  EmbeddingTable() = default;
  EmbeddingTable(int vocab_size, int dim, std::mt19937_64& rng, const std::string& name);

  TensorPtr embed(std::span<const int> tokens) const;
  TensorPtr mask_row() const;  // [1 x dim] view of the <mask> embedding

  // One token per line: word then `dim` reals, whitespace separated.
  // Unknown words are ignored; missing words keep their random init.
  // Returns the number of rows loaded.
  int load_pretrained(const std::string& path,
                      const std::vector<std::string>& id_to_token);
};

struct LSTMCell {
  int input_dim = 0;
  int hidden_dim = 0;
  TensorPtr w;  // [(input_dim + hidden_dim) x 4H], gate order i,f,g,o
  TensorPtr b;  // [1 x 4H]

  LSTMCell() = default;
  LSTMCell(int input_dim, int hidden_dim, std::mt19937_64& rng, const std::string& name);

  // One step; x is [1 x input_dim].
  std::pair<TensorPtr, TensorPtr> step(const TensorPtr& x, const TensorPtr& h,
                                       const TensorPtr& c) const;
};

// Single-layer bidirectional LSTM; output dim is 2H.
struct BiLSTMEncoder {
  LSTMCell fwd, bwd;

  BiLSTMEncoder() = default;
  BiLSTMEncoder(int input_dim, int hidden_dim, std::mt19937_64& rng,
                const std::string& name);

  int hidden_dim() const { return fwd.hidden_dim; }
  int output_dim() const { return 2 * fwd.hidden_dim; }

  TensorPtr run(const TensorPtr& seq) const;  // [l x d] -> [l x 2H]
  // Forward pass also reporting the two directions' final hidden states.
  TensorPtr run_with_finals(const TensorPtr& seq, TensorPtr& final_fwd,
                            TensorPtr& final_bwd) const;

  std::vector<TensorPtr> params() const { return {fwd.w, fwd.b, bwd.w, bwd.b}; }
};

// score(q, k) = q W k^T + b, rows softmax-normalized over keys.
struct BilinearAttention {
  TensorPtr w;  // [d x d]
  TensorPtr b;  // scalar

  BilinearAttention() = default;
  BilinearAttention(int dim, std::mt19937_64& rng, const std::string& name);

  // queries [l x d], keys [n x d] -> (weights [l x n], context [l x d])
  std::pair<TensorPtr, TensorPtr> attend(const TensorPtr& queries,
                                         const TensorPtr& keys) const;

  std::vector<TensorPtr> params() const { return {w, b}; }
};

struct Linear {
  TensorPtr w;  // [in x out]
  TensorPtr b;  // [1 x out]

  Linear() = default;
  Linear(int in, int out, std::mt19937_64& rng, const std::string& name);

  TensorPtr apply(const TensorPtr& x) const;  // [m x in] -> [m x out]
  std::vector<TensorPtr> params() const { return {w, b}; }
};

// Two-layer MLP with tanh hidden activation.
struct MLP {
  Linear l1, l2;

  MLP() = default;
  MLP(int in, int hidden, int out, std::mt19937_64& rng, const std::string& name);

  TensorPtr apply(const TensorPtr& x) const;
  std::vector<TensorPtr> params() const;
};

}  // namespace factedit
