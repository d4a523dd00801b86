#pragma once

// Policy-value network: a residual convolutional tower with a per-line policy
// head and a tanh value head, trained with plain minibatch SGD on
//
//   L = mean_batch[ (z - v)^2 - pi . log p ] + l2 * |theta|^2
//
// The scalar type is a template parameter so that gradients can be checked
// in double precision against finite differences.
//
// Layers, in parameter order:
//   conv_in         3x3, planes -> C, ReLU
//   block[i]        3x3 C->C, ReLU, 3x3 C->C, + skip, ReLU
//   policy          1x1 C -> 4 (one logit per direction and origin cell),
//                   gathered into the action layout, softmax
//   value.conv      1x1 C -> 1, ReLU
//   value.fc1       N*N -> H, ReLU, dropout
//   value.fc2       H -> 1, tanh

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "morpion/core.hpp"
#include "morpion/encoding.hpp"
#include "morpion/random.hpp"

namespace morpion {

struct ModelConfig {
  int epochs = 5;
  int batch_size = 64;
  double learning_rate = 0.005;
  double dropout = 0.3;
  int channels = 32;
  int blocks = 4;
  int value_hidden = 64;
  double l2 = 1e-4;
  double momentum = 0.0;

  bool valid() const {
    return epochs >= 1 && batch_size >= 1 && learning_rate >= 0.0 &&
           dropout >= 0.0 && dropout < 1.0 && channels >= 1 && blocks >= 0 &&
           value_hidden >= 1 && l2 >= 0.0 && momentum >= 0.0 && momentum < 1.0;
  }
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

template <typename T>
struct Prediction {
  std::vector<T> policy;
  T value = 0;
};

template <typename T>
class PolicyValueNet {
 public:
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  using MatMap = Eigen::Map<Mat>;
  using ConstMatMap = Eigen::Map<const Mat>;

  struct Tensor {
    std::string name;
    std::size_t offset = 0;
    int rows = 0;
    int cols = 0;
    std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
  };

  PolicyValueNet(const ModelConfig& cfg, int board, int planes = kEncodingPlanes,
                 std::uint64_t seed = 0)
      : cfg_(cfg), board_(board), planes_(planes) {
    if (board < 5) throw ShapeMismatch("board too small for a line");
    build_layout();
    params_.assign(total_, T(0));
    std::mt19937_64 rng(seed);
    initialize(rng);
    build_gather();
  }

  const ModelConfig& config() const { return cfg_; }
  int board() const { return board_; }
  int planes() const { return planes_; }
  int actions() const { return action_count(board_); }

  std::span<T> parameters() { return params_; }
  std::span<const T> parameters() const { return params_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }

  Prediction<T> predict(const StateEncoding& enc) const {
    check_shape(enc);
    // Scratch buffers are large; reusing them avoids an mmap per call.
    thread_local Cache c;
    forward<std::mt19937_64>(enc, c, nullptr);
    return {c.probs, c.v};
  }

  Evaluation evaluate(const BoardState& board) const {
    auto p = predict(encode(board));
    Evaluation e;
    e.policy.assign(p.policy.begin(), p.policy.end());
    e.value = static_cast<float>(p.value);
    return e;
  }

  // Mean loss over `batch`; adds d(loss)/d(theta) into `grad` when given.
  // Dropout is active only when `dropout_rng` is given.
  template <typename Rng = std::mt19937_64>
  T loss_and_gradient(std::span<const TrainingExample* const> batch, T dropout, T l2,
                      std::vector<T>* grad, Rng* dropout_rng = nullptr) const {
    if (batch.empty()) return T(0);
    if (grad) grad->assign(total_, T(0));
    const T scale = T(1) / static_cast<T>(batch.size());
    T loss = 0;
    Cache c;
    for (const TrainingExample* ex : batch) {
      check_shape(ex->encoding);
      forward(ex->encoding, c, dropout_rng, dropout);
      loss += scale * example_loss(*ex, c);
      if (grad) backward(*ex, c, scale, *grad);
    }
    T sq = 0;
    for (T p : params_) sq += p * p;
    loss += l2 * sq;
    if (grad)
      for (std::size_t i = 0; i < total_; ++i) (*grad)[i] += T(2) * l2 * params_[i];
    return loss;
  }

  friend bool operator==(const PolicyValueNet& a, const PolicyValueNet& b) {
    return a.cfg_ == b.cfg_ && a.board_ == b.board_ && a.planes_ == b.planes_ &&
           a.params_ == b.params_;
  }

 private:
  struct Cache {
    Mat input, col0, h0;
    std::vector<Mat> col_a, u, col_b, h;
    Mat pol;
    std::vector<T> logits, log_probs, probs;
    Mat vc;
    Vec f1, mask, f1d;
    T v = 0;
  };

  enum : int { kConvInW = 0, kConvInB = 1, kFirstBlock = 2 };
  int policy_w() const { return kFirstBlock + 4 * cfg_.blocks; }
  int policy_b() const { return policy_w() + 1; }
  int vconv_w() const { return policy_w() + 2; }
  int vconv_b() const { return policy_w() + 3; }
  int fc1_w() const { return policy_w() + 4; }
  int fc1_b() const { return policy_w() + 5; }
  int fc2_w() const { return policy_w() + 6; }
  int fc2_b() const { return policy_w() + 7; }

  void add_tensor(std::string name, int rows, int cols) {
    tensors_.push_back({std::move(name), total_, rows, cols});
    total_ += tensors_.back().size();
  }

  void build_layout() {
    const int c = cfg_.channels, hw = board_ * board_;
    add_tensor("conv_in.w", c, planes_ * 9);
    add_tensor("conv_in.b", c, 1);
    for (int b = 0; b < cfg_.blocks; ++b) {
      const std::string p = "block" + std::to_string(b);
      add_tensor(p + ".conv1.w", c, c * 9);
      add_tensor(p + ".conv1.b", c, 1);
      add_tensor(p + ".conv2.w", c, c * 9);
      add_tensor(p + ".conv2.b", c, 1);
    }
    add_tensor("policy.w", 4, c);
    add_tensor("policy.b", 4, 1);
    add_tensor("value.conv.w", 1, c);
    add_tensor("value.conv.b", 1, 1);
    add_tensor("value.fc1.w", cfg_.value_hidden, hw);
    add_tensor("value.fc1.b", cfg_.value_hidden, 1);
    add_tensor("value.fc2.w", 1, cfg_.value_hidden);
    add_tensor("value.fc2.b", 1, 1);
  }

  template <typename Rng>
  void initialize(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    auto fill = [&](int idx, double stddev) {
      const Tensor& t = tensors_[idx];
      for (std::size_t i = 0; i < t.size(); ++i)
        params_[t.offset + i] = static_cast<T>(stddev * normal(rng));
    };
    const int c = cfg_.channels;
    fill(kConvInW, std::sqrt(2.0 / (planes_ * 9)));
    for (int b = 0; b < cfg_.blocks; ++b) {
      fill(kFirstBlock + 4 * b, std::sqrt(2.0 / (c * 9)));
      fill(kFirstBlock + 4 * b + 2, 0.5 * std::sqrt(2.0 / (c * 9)));
    }
    fill(policy_w(), 1e-3);
    fill(vconv_w(), std::sqrt(2.0 / c));
    fill(fc1_w(), std::sqrt(2.0 / (board_ * board_)));
    fill(fc2_w(), 0.1 * std::sqrt(1.0 / cfg_.value_hidden));
  }

  void build_gather() {
    const int hw = board_ * board_;
    gather_.resize(actions());
    for (int a = 0; a < actions(); ++a) {
      const Line l = index_to_line(a, board_);
      gather_[a] = static_cast<int>(l.dir) * hw + l.origin.y * board_ + l.origin.x;
    }
  }

  void check_shape(const StateEncoding& enc) const {
    if (enc.size != board_ || enc.planes != planes_ ||
        enc.data.size() != static_cast<std::size_t>(planes_) * board_ * board_)
      throw ShapeMismatch("encoding " + std::to_string(enc.planes) + "x" +
                          std::to_string(enc.size) + " does not match model " +
                          std::to_string(planes_) + "x" + std::to_string(board_));
  }

  ConstMatMap W(int idx) const {
    const Tensor& t = tensors_[idx];
    return ConstMatMap(params_.data() + t.offset, t.rows, t.cols);
  }
  MatMap G(std::vector<T>& grad, int idx) const {
    const Tensor& t = tensors_[idx];
    return MatMap(grad.data() + t.offset, t.rows, t.cols);
  }

  void im2col(const Mat& in, Mat& col) const {
    const int n = board_, ch = static_cast<int>(in.rows());
    col.setZero(ch * 9, n * n);
    for (int c = 0; c < ch; ++c) {
      for (int k = 0; k < 9; ++k) {
        const int oy = k / 3 - 1, ox = k % 3 - 1;
        T* dst = col.row(c * 9 + k).data();
        const T* src = in.row(c).data();
        for (int y = std::max(0, -oy); y < std::min(n, n - oy); ++y) {
          const int x0 = std::max(0, -ox), x1 = std::min(n, n - ox);
          for (int x = x0; x < x1; ++x) dst[y * n + x] = src[(y + oy) * n + x + ox];
        }
      }
    }
  }

  void col2im(const Mat& col, Mat& out) const {
    const int n = board_, ch = static_cast<int>(col.rows() / 9);
    out.setZero(ch, n * n);
    for (int c = 0; c < ch; ++c) {
      for (int k = 0; k < 9; ++k) {
        const int oy = k / 3 - 1, ox = k % 3 - 1;
        const T* src = col.row(c * 9 + k).data();
        T* dst = out.row(c).data();
        for (int y = std::max(0, -oy); y < std::min(n, n - oy); ++y) {
          const int x0 = std::max(0, -ox), x1 = std::min(n, n - ox);
          for (int x = x0; x < x1; ++x) dst[(y + oy) * n + x + ox] += src[y * n + x];
        }
      }
    }
  }

  Mat conv(int w, int b, const Mat& col) const {
    Mat out = W(w) * col;
    out.colwise() += W(b).col(0);
    return out;
  }

  template <typename Rng = std::mt19937_64>
  void forward(const StateEncoding& enc, Cache& c, Rng* dropout_rng,
               T dropout = T(0)) const {
    const int n = board_, hw = n * n;
    c.input.resize(planes_, hw);
    for (int p = 0; p < planes_; ++p)
      for (int i = 0; i < hw; ++i)
        c.input(p, i) = static_cast<T>(enc.data[static_cast<std::size_t>(p) * hw + i]);

    im2col(c.input, c.col0);
    c.h0 = conv(kConvInW, kConvInB, c.col0).cwiseMax(T(0));

    const int nb = cfg_.blocks;
    c.col_a.resize(nb);
    c.u.resize(nb);
    c.col_b.resize(nb);
    c.h.resize(nb);
    const Mat* x = &c.h0;
    for (int b = 0; b < nb; ++b) {
      const int base = kFirstBlock + 4 * b;
      im2col(*x, c.col_a[b]);
      c.u[b] = conv(base, base + 1, c.col_a[b]).cwiseMax(T(0));
      im2col(c.u[b], c.col_b[b]);
      c.h[b] = (conv(base + 2, base + 3, c.col_b[b]) + *x).cwiseMax(T(0));
      x = &c.h[b];
    }
    const Mat& top = *x;

    c.pol = conv(policy_w(), policy_b(), top);
    const int na = actions();
    c.logits.resize(na);
    T mx = -std::numeric_limits<T>::infinity();
    for (int a = 0; a < na; ++a) {
      c.logits[a] = c.pol.data()[gather_[a]];
      mx = std::max(mx, c.logits[a]);
    }
    T sum = 0;
    for (int a = 0; a < na; ++a) sum += std::exp(c.logits[a] - mx);
    const T log_sum = std::log(sum) + mx;
    c.log_probs.resize(na);
    c.probs.resize(na);
    for (int a = 0; a < na; ++a) {
      c.log_probs[a] = c.logits[a] - log_sum;
      c.probs[a] = std::exp(c.log_probs[a]);
    }

    c.vc = conv(vconv_w(), vconv_b(), top).cwiseMax(T(0));
    c.f1 = (W(fc1_w()) * c.vc.transpose() + W(fc1_b()).col(0)).cwiseMax(T(0));
    c.mask = Vec::Ones(cfg_.value_hidden);
    if (dropout_rng && dropout > T(0)) {
      const T keep = T(1) - dropout;
      for (int i = 0; i < cfg_.value_hidden; ++i)
        c.mask[i] = uniform01(*dropout_rng) < static_cast<double>(keep) ? T(1) / keep : T(0);
    }
    c.f1d = c.f1.cwiseProduct(c.mask);
    const T out = (W(fc2_w()) * c.f1d)(0, 0) + W(fc2_b())(0, 0);
    c.v = std::tanh(out);
  }

  T example_loss(const TrainingExample& ex, const Cache& c) const {
    T ce = 0;
    for (const ActionProb& ap : ex.pi) ce -= static_cast<T>(ap.prob) * c.log_probs[ap.action];
    const T err = static_cast<T>(ex.z) - c.v;
    return err * err + ce;
  }

  void backward(const TrainingExample& ex, const Cache& c, T scale,
                std::vector<T>& grad) const {
    const int hw = board_ * board_;
    const Mat& top = cfg_.blocks > 0 ? c.h.back() : c.h0;

    // Policy: d/dlogit of -sum pi log softmax = p * sum(pi) - pi.
    T pi_mass = 0;
    for (const ActionProb& ap : ex.pi) pi_mass += static_cast<T>(ap.prob);
    Mat dpol = Mat::Zero(4, hw);
    for (int a = 0; a < actions(); ++a) dpol.data()[gather_[a]] = scale * pi_mass * c.probs[a];
    for (const ActionProb& ap : ex.pi)
      dpol.data()[gather_[ap.action]] -= scale * static_cast<T>(ap.prob);
    G(grad, policy_w()).noalias() += dpol * top.transpose();
    G(grad, policy_b()).col(0) += dpol.rowwise().sum();
    Mat dtop = W(policy_w()).transpose() * dpol;

    // Value.
    const T dout = scale * T(-2) * (static_cast<T>(ex.z) - c.v) * (T(1) - c.v * c.v);
    G(grad, fc2_w()).row(0) += dout * c.f1d.transpose();
    G(grad, fc2_b())(0, 0) += dout;
    Vec df1 = (dout * W(fc2_w()).row(0).transpose()).cwiseProduct(c.mask);
    for (int i = 0; i < cfg_.value_hidden; ++i)
      if (c.f1[i] <= T(0)) df1[i] = 0;
    G(grad, fc1_w()).noalias() += df1 * c.vc;
    G(grad, fc1_b()).col(0) += df1;
    Mat dvc = (W(fc1_w()).transpose() * df1).transpose();
    for (int i = 0; i < hw; ++i)
      if (c.vc(0, i) <= T(0)) dvc(0, i) = 0;
    G(grad, vconv_w()).noalias() += dvc * top.transpose();
    G(grad, vconv_b())(0, 0) += dvc.sum();
    dtop.noalias() += W(vconv_w()).transpose() * dvc;

    // Tower, top to bottom. dtop holds d/d(block output).
    thread_local Mat dcol;
    Mat tmp;
    for (int b = cfg_.blocks - 1; b >= 0; --b) {
      const int base = kFirstBlock + 4 * b;
      Mat ds = dtop.cwiseProduct((c.h[b].array() > T(0)).template cast<T>().matrix());
      G(grad, base + 2).noalias() += ds * c.col_b[b].transpose();
      G(grad, base + 3).col(0) += ds.rowwise().sum();
      dcol.noalias() = W(base + 2).transpose() * ds;
      col2im(dcol, tmp);
      Mat du = tmp.cwiseProduct((c.u[b].array() > T(0)).template cast<T>().matrix());
      G(grad, base).noalias() += du * c.col_a[b].transpose();
      G(grad, base + 1).col(0) += du.rowwise().sum();
      dcol.noalias() = W(base).transpose() * du;
      col2im(dcol, tmp);
      dtop = ds + tmp;
    }
    Mat dh0 = dtop.cwiseProduct((c.h0.array() > T(0)).template cast<T>().matrix());
    G(grad, kConvInW).noalias() += dh0 * c.col0.transpose();
    G(grad, kConvInB).col(0) += dh0.rowwise().sum();
  }

  ModelConfig cfg_;
  int board_;
  int planes_;
  std::vector<Tensor> tensors_;
  std::size_t total_ = 0;
  std::vector<T> params_;
  std::vector<int> gather_;
};

using PolicyValueModel = PolicyValueNet<float>;

// ---------------------------------------------------------------------------
// Training

struct TrainStats {
  double loss = 0.0;  // mean minibatch loss over the final epoch
  int batches = 0;
};

// `epochs` passes over a fresh shuffle of `examples`, ceil(|examples|/bs)
// minibatches each.
template <typename T, typename Rng>
TrainStats train(PolicyValueNet<T>& net, std::span<const TrainingExample> examples,
                 const ModelConfig& cfg, Rng& rng) {
  TrainStats stats;
  if (examples.empty()) return stats;
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<T> grad, velocity(net.parameters().size(), T(0));
  std::vector<const TrainingExample*> batch;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  const T lr = static_cast<T>(cfg.learning_rate);
  const T mom = static_cast<T>(cfg.momentum);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      batch.clear();
      for (std::size_t k = start; k < std::min(order.size(), start + bs); ++k)
        batch.push_back(&examples[order[k]]);
      const T loss = net.loss_and_gradient(std::span<const TrainingExample* const>(batch),
                                           static_cast<T>(cfg.dropout),
                                           static_cast<T>(cfg.l2), &grad, &rng);
      auto params = net.parameters();
      for (std::size_t p = 0; p < params.size(); ++p) {
        velocity[p] = mom * velocity[p] + grad[p];
        params[p] -= lr * velocity[p];
      }
      epoch_loss += static_cast<double>(loss);
      ++batches;
    }
    stats.loss = epoch_loss / batches;
    stats.batches = batches;
  }
  return stats;
}

template <typename T>
double cross_entropy(const PolicyValueNet<T>& net, const TrainingExample& ex) {
  const auto p = net.predict(ex.encoding);
  double ce = 0.0;
  for (const ActionProb& ap : ex.pi)
    ce -= ap.prob * std::log(std::max(static_cast<double>(p.policy[ap.action]), 1e-300));
  return ce;
}

// ---------------------------------------------------------------------------
// Checkpoints
//
// Layout (little-endian):
//   "MR2CKPT"  u32 version  u32 board  u32 planes
//   config: u32 epochs, batch_size, channels, blocks, value_hidden
//           f64 learning_rate, dropout, l2, momentum
//   u32 tensor count, then per tensor: u32 length, length x f32
// Tensors follow the layer order documented at the top of this file.

inline constexpr char kCheckpointMagic[] = "MR2CKPT";
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CorruptCheckpoint : public Error {
 public:
  explicit CorruptCheckpoint(const std::string& why) : Error("corrupt checkpoint: " + why) {}
};

class CheckpointWriteFailure : public Error {
 public:
  explicit CheckpointWriteFailure(const std::string& path)
      : Error("cannot write checkpoint " + path) {}
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f32(std::string& out, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(out, v);
}
inline void put_f64(std::string& out, double f) {
  std::uint64_t v;
  std::memcpy(&v, &f, 8);
  put_u64(out, v);
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}
  std::uint64_t uint(int bytes) {
    if (pos_ + bytes > data_.size()) throw CorruptCheckpoint("truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += bytes;
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  float f32() {
    const std::uint32_t v = u32();
    float f;
    std::memcpy(&f, &v, 4);
    return f;
  }
  double f64() {
    const std::uint64_t v = uint(8);
    double f;
    std::memcpy(&f, &v, 8);
    return f;
  }
  std::string_view bytes(std::size_t n) {
    if (pos_ + n > data_.size()) throw CorruptCheckpoint("truncated");
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

template <typename T>
std::string checkpoint_bytes(const PolicyValueNet<T>& net) {
  std::string out(kCheckpointMagic, 7);
  const ModelConfig& c = net.config();
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(net.board()));
  detail::put_u32(out, static_cast<std::uint32_t>(net.planes()));
  for (int v : {c.epochs, c.batch_size, c.channels, c.blocks, c.value_hidden})
    detail::put_u32(out, static_cast<std::uint32_t>(v));
  for (double v : {c.learning_rate, c.dropout, c.l2, c.momentum}) detail::put_f64(out, v);
  const auto& ts = net.tensors();
  detail::put_u32(out, static_cast<std::uint32_t>(ts.size()));
  const auto params = net.parameters();
  for (const auto& t : ts) {
    detail::put_u32(out, static_cast<std::uint32_t>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i)
      detail::put_f32(out, static_cast<float>(params[t.offset + i]));
  }
  return out;
}

template <typename T = float>
PolicyValueNet<T> checkpoint_from_bytes(std::string_view data,
                                        std::optional<int> expected_board = std::nullopt) {
  detail::ByteReader in(data);
  if (in.bytes(7) != std::string_view(kCheckpointMagic, 7)) throw CorruptCheckpoint("bad magic");
  if (in.u32() != kCheckpointVersion) throw CorruptCheckpoint("unsupported version");
  const int board = static_cast<int>(in.u32());
  const int planes = static_cast<int>(in.u32());
  ModelConfig c;
  c.epochs = static_cast<int>(in.u32());
  c.batch_size = static_cast<int>(in.u32());
  c.channels = static_cast<int>(in.u32());
  c.blocks = static_cast<int>(in.u32());
  c.value_hidden = static_cast<int>(in.u32());
  c.learning_rate = in.f64();
  c.dropout = in.f64();
  c.l2 = in.f64();
  c.momentum = in.f64();
  if (board < 5 || board > kMaxBoardSize || planes < 1 || planes > 64 || !c.valid() ||
      c.channels > 4096 || c.blocks > 256 || c.value_hidden > 1 << 16)
    throw CorruptCheckpoint("bad header");
  if (expected_board && *expected_board != board)
    throw ShapeMismatch("checkpoint is for board " + std::to_string(board) +
                        ", expected " + std::to_string(*expected_board));
  PolicyValueNet<T> net(c, board, planes);
  const auto& ts = net.tensors();
  if (in.u32() != ts.size()) throw CorruptCheckpoint("tensor count");
  auto params = net.parameters();
  for (const auto& t : ts) {
    if (in.u32() != t.size()) throw CorruptCheckpoint("tensor length for " + t.name);
    for (std::size_t i = 0; i < t.size(); ++i) params[t.offset + i] = static_cast<T>(in.f32());
  }
  if (!in.done()) throw CorruptCheckpoint("trailing bytes");
  return net;
}

template <typename T>
void save_checkpoint(const PolicyValueNet<T>& net, const std::string& path) {
  const std::string bytes = checkpoint_bytes(net);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointWriteFailure(path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CheckpointWriteFailure(path);
}

template <typename T = float>
PolicyValueNet<T> load_checkpoint(const std::string& path,
                                  std::optional<int> expected_board = std::nullopt) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CorruptCheckpoint("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return checkpoint_from_bytes<T>(bytes, expected_board);
}

}  // namespace morpion
