#include "factedit/layers.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

namespace factedit {

namespace {

// y = x + 1·b, broadcasting a [1 x n] bias over m rows.
TensorPtr add_rowvec(const TensorPtr& x, const TensorPtr& b) {
  if (x->rows() == 1) return add(x, b);
  auto ones = full({x->rows(), 1}, 1.0);
  return add(x, matmul(ones, b));
}

}  // namespace

EmbeddingTable::EmbeddingTable(int vocab_size_, int dim_, std::mt19937_64& rng,
                               const std::string& name)
    : vocab_size(vocab_size_), dim(dim_) {
  weight = zeros({static_cast<std::size_t>(vocab_size), static_cast<std::size_t>(dim)}, true);
  weight->name = name + ".emb";
  normal_init(*weight, 0.1, rng);
  // PAD row stays zero.
  for (int j = 0; j < dim; ++j) weight->values[kPad * dim + j] = 0.0;
}

TensorPtr EmbeddingTable::embed(std::span<const int> tokens) const {
  for (int id : tokens)
    if (id < 0 || id >= vocab_size)
      throw VocabError("embed: token id " + std::to_string(id) + " outside vocabulary of size " +
                       std::to_string(vocab_size));
  return gather_rows(weight, tokens);
}

TensorPtr EmbeddingTable::mask_row() const {
  const int ids[1] = {kMaskTok};
  return gather_rows(weight, ids);
}

int EmbeddingTable::load_pretrained(const std::string& path,
                                    const std::vector<std::string>& id_to_token) {
  std::ifstream in(path);
  if (!in) throw VocabError("cannot open embedding file: " + path);
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < id_to_token.size(); ++i) index[id_to_token[i]] = static_cast<int>(i);
  std::string line;
  int loaded = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    auto it = index.find(word);
    if (it == index.end()) continue;
    std::vector<double> vec;
    double v;
    while (ls >> v) vec.push_back(v);
    if (static_cast<int>(vec.size()) != dim)
      throw VocabError("embedding file row for '" + word + "' has " +
                       std::to_string(vec.size()) + " dims, expected " + std::to_string(dim));
    for (int j = 0; j < dim; ++j) weight->values[it->second * dim + j] = vec[j];
    ++loaded;
  }
  return loaded;
}

LSTMCell::LSTMCell(int input_dim_, int hidden_dim_, std::mt19937_64& rng,
                   const std::string& name)
    : input_dim(input_dim_), hidden_dim(hidden_dim_) {
  w = zeros({static_cast<std::size_t>(input_dim + hidden_dim),
             static_cast<std::size_t>(4 * hidden_dim)},
            true);
  w->name = name + ".w";
  glorot_init(*w, rng);
  b = zeros({1, static_cast<std::size_t>(4 * hidden_dim)}, true);
  b->name = name + ".b";
  // Forget-gate bias at 1.0.
  for (int j = hidden_dim; j < 2 * hidden_dim; ++j) b->values[j] = 1.0;
}

std::pair<TensorPtr, TensorPtr> LSTMCell::step(const TensorPtr& x, const TensorPtr& h,
                                               const TensorPtr& c) const {
  const auto H = static_cast<std::size_t>(hidden_dim);
  auto z = add(matmul(concat_cols({x, h}), w), b);
  auto i = sigmoid(slice_cols(z, 0, H));
  auto f = sigmoid(slice_cols(z, H, 2 * H));
  auto g = tanh_t(slice_cols(z, 2 * H, 3 * H));
  auto o = sigmoid(slice_cols(z, 3 * H, 4 * H));
  auto c_new = add(mul(f, c), mul(i, g));
  auto h_new = mul(o, tanh_t(c_new));
  return {h_new, c_new};
}

BiLSTMEncoder::BiLSTMEncoder(int input_dim, int hidden_dim, std::mt19937_64& rng,
                             const std::string& name)
    : fwd(input_dim, hidden_dim, rng, name + ".fwd"),
      bwd(input_dim, hidden_dim, rng, name + ".bwd") {}

TensorPtr BiLSTMEncoder::run(const TensorPtr& seq) const {
  TensorPtr ff, fb;
  return run_with_finals(seq, ff, fb);
}

TensorPtr BiLSTMEncoder::run_with_finals(const TensorPtr& seq, TensorPtr& final_fwd,
                                         TensorPtr& final_bwd) const {
  const std::size_t l = seq->rows();
  if (l == 0) throw ShapeError("bilstm: empty sequence");
  if (static_cast<int>(seq->cols()) != fwd.input_dim)
    throw ShapeError("bilstm: input dim " + std::to_string(seq->cols()) + " != expected " +
                     std::to_string(fwd.input_dim));
  const auto H = static_cast<std::size_t>(fwd.hidden_dim);
  std::vector<TensorPtr> fh(l), bh(l);
  auto h = zeros({1, H});
  auto c = zeros({1, H});
  for (std::size_t i = 0; i < l; ++i) {
    std::tie(h, c) = fwd.step(row(seq, i), h, c);
    fh[i] = h;
  }
  final_fwd = h;
  h = zeros({1, H});
  c = zeros({1, H});
  for (std::size_t k = 0; k < l; ++k) {
    const std::size_t i = l - 1 - k;
    std::tie(h, c) = bwd.step(row(seq, i), h, c);
    bh[i] = h;
  }
  final_bwd = h;
  std::vector<TensorPtr> out_rows(l);
  for (std::size_t i = 0; i < l; ++i) out_rows[i] = concat_cols({fh[i], bh[i]});
  return concat_rows(out_rows);
}

BilinearAttention::BilinearAttention(int dim, std::mt19937_64& rng, const std::string& name) {
  w = zeros({static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)}, true);
  w->name = name + ".w";
  glorot_init(*w, rng);
  b = zeros({1, 1}, true);
  b->name = name + ".b";
}

std::pair<TensorPtr, TensorPtr> BilinearAttention::attend(const TensorPtr& queries,
                                                          const TensorPtr& keys) const {
  if (keys->rows() == 0) throw ShapeError("bilinear_attend: empty keys");
  if (queries->cols() != keys->cols())
    throw ShapeError("bilinear_attend: query dim " + std::to_string(queries->cols()) +
                     " != key dim " + std::to_string(keys->cols()));
  auto logits = matmul_nt(matmul(queries, w), keys);
  auto bias = matmul(full({queries->rows(), 1}, 1.0), matmul(b, full({1, keys->rows()}, 1.0)));
  auto weights = softmax_rows(add(logits, bias));
  auto context = matmul(weights, keys);
  return {weights, context};
}

Linear::Linear(int in, int out, std::mt19937_64& rng, const std::string& name) {
  w = zeros({static_cast<std::size_t>(in), static_cast<std::size_t>(out)}, true);
  w->name = name + ".w";
  glorot_init(*w, rng);
  b = zeros({1, static_cast<std::size_t>(out)}, true);
  b->name = name + ".b";
}

TensorPtr Linear::apply(const TensorPtr& x) const { return add_rowvec(matmul(x, w), b); }

MLP::MLP(int in, int hidden, int out, std::mt19937_64& rng, const std::string& name)
    : l1(in, hidden, rng, name + ".l1"), l2(hidden, out, rng, name + ".l2") {}

TensorPtr MLP::apply(const TensorPtr& x) const { return l2.apply(tanh_t(l1.apply(x))); }

std::vector<TensorPtr> MLP::params() const { return {l1.w, l1.b, l2.w, l2.b}; }

}  // namespace factedit
