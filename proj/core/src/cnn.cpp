#include "spectrascreen/cnn.hpp"

#include <cmath>
#include <string>

#include "spectrascreen/errors.hpp"
#include "spectrascreen/rng.hpp"

namespace spectrascreen {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Batched maps are C x (L * B): sample b owns columns [b L, (b + 1) L).
Matrix im2col(const Matrix& a, Eigen::Index len, int kernel_len) {
  const Eigen::Index channels = a.rows();
  const Eigen::Index total = a.cols();
  const Eigen::Index k = kernel_len;
  const Eigen::Index pad = kernel_len / 2;
  Matrix col = Matrix::Zero(channels * k, total);
  for (Eigen::Index start = 0; start < total; start += len) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      for (Eigen::Index tap = 0; tap < k; ++tap) {
        for (Eigen::Index j = 0; j < len; ++j) {
          const Eigen::Index src = j + tap - pad;
          if (src < 0 || src >= len) continue;
          col(c * k + tap, start + j) = a(c, start + src);
        }
      }
    }
  }
  return col;
}

Matrix col2im(const Matrix& dcol, Eigen::Index channels, Eigen::Index len,
              int kernel_len) {
  const Eigen::Index total = dcol.cols();
  const Eigen::Index k = kernel_len;
  const Eigen::Index pad = kernel_len / 2;
  Matrix da = Matrix::Zero(channels, total);
  for (Eigen::Index start = 0; start < total; start += len) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      for (Eigen::Index tap = 0; tap < k; ++tap) {
        for (Eigen::Index j = 0; j < len; ++j) {
          const Eigen::Index src = j + tap - pad;
          if (src < 0 || src >= len) continue;
          da(c, start + src) += dcol(c * k + tap, start + j);
        }
      }
    }
  }
  return da;
}

struct ExciteTrace {
  Vector pooled;
  Vector hidden;  // W_e1 pooled, before the rectifier
  Vector gate;    // sigmoid output
};

ExciteTrace excite(const Vector& pooled, const Matrix& down, const Matrix& up) {
  ExciteTrace tr;
  tr.pooled = pooled;
  tr.hidden = down * pooled;
  const Vector rect = tr.hidden.cwiseMax(0.0);
  const Vector logits = up * rect;
  tr.gate.resize(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) tr.gate(i) = sigmoid(logits(i));
  return tr;
}

struct SampleAttention {
  ExciteTrace avg;
  ExciteTrace max;
  std::vector<Eigen::Index> argmax;
  Vector w_total;
};

struct BatchTrace {
  std::vector<Matrix> cols;    // im2col input of each conv layer
  std::vector<Matrix> outputs;  // rectified output of each conv layer
  std::vector<SampleAttention> attention;
  Matrix flat;                 // (C L) x B
  Matrix logits;               // classes x B
};

void check_input(const AttentionCnnModel& model, const Matrix& x) {
  if (x.cols() != model.arch.input_len) {
    throw ShapeError("CNN input length " + std::to_string(x.cols()) +
                     " differs from architecture input " +
                     std::to_string(model.arch.input_len));
  }
  if (!x.allFinite()) throw ValidationError("CNN input is not finite");
}

BatchTrace run_forward(const AttentionCnnModel& model, const Matrix& x) {
  check_input(model, x);
  const CnnArchitecture& arch = model.arch;
  const CnnParameters& p = model.params;
  const Eigen::Index len = arch.input_len;
  const Eigen::Index batch = x.rows();

  BatchTrace tr;
  // Single input channel: sample b lies at columns [b L, (b + 1) L).
  Matrix a(1, len * batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    a.block(0, b * len, 1, len) = x.row(b);
  }
  for (const ConvParams& layer : p.conv) {
    tr.cols.push_back(im2col(a, len, arch.kernel_len));
    Matrix z = layer.kernel * tr.cols.back();
    z.colwise() += layer.bias;
    a = z.cwiseMax(0.0);
    tr.outputs.push_back(a);
  }

  const Eigen::Index channels = a.rows();
  tr.flat.resize(channels * len, batch);
  tr.attention.resize(static_cast<std::size_t>(batch));
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto u = a.middleCols(b * len, len);
    SampleAttention& att = tr.attention[static_cast<std::size_t>(b)];
    Vector v_avg = u.rowwise().mean();
    Vector v_max(channels);
    att.argmax.resize(static_cast<std::size_t>(channels));
    for (Eigen::Index c = 0; c < channels; ++c) {
      Eigen::Index idx = 0;
      v_max(c) = u.row(c).maxCoeff(&idx);
      att.argmax[static_cast<std::size_t>(c)] = idx;
    }
    att.avg = excite(v_avg, p.excite_down, p.excite_up);
    att.max = excite(v_max, p.excite_down, p.excite_up);
    att.w_total = att.avg.gate + att.max.gate;
    for (Eigen::Index c = 0; c < channels; ++c) {
      tr.flat.block(c * len, b, len, 1) =
          (att.w_total(c) * u.row(c)).transpose();
    }
  }
  tr.logits = p.fc_weight * tr.flat;
  tr.logits.colwise() += p.fc_bias;
  return tr;
}

// log-sum-exp per column, stable for large logits.
Vector column_logsumexp(const Matrix& logits) {
  Vector out(logits.cols());
  for (Eigen::Index b = 0; b < logits.cols(); ++b) {
    const double m = logits.col(b).maxCoeff();
    out(b) = m + std::log((logits.col(b).array() - m).exp().sum());
  }
  return out;
}

void check_labels(const Matrix& x, std::span<const int> labels, int classes) {
  if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
    throw ShapeError("label count differs from batch size");
  }
  if (x.rows() < 1) throw PreconditionError("batch is empty");
  for (int l : labels) {
    if (l < 0 || l >= classes) throw ValidationError("label out of range");
  }
}

void init_uniform(Matrix& m, double bound, Rng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
  }
}

}  // namespace

void CnnArchitecture::validate() const {
  if (input_len < 1) throw ConfigError("CNN input length must be >= 1");
  if (channels.empty()) throw ConfigError("CNN needs at least one conv layer");
  for (int c : channels) {
    if (c < 1) throw ConfigError("conv channel counts must be >= 1");
  }
  if (kernel_len < 1 || kernel_len % 2 == 0) {
    throw ConfigError("kernel length must be odd for same padding");
  }
  if (reduction_ratio < 1 || attended_channels() % reduction_ratio != 0) {
    throw ConfigError("reduction ratio " + std::to_string(reduction_ratio) +
                      " does not divide " + std::to_string(attended_channels()) +
                      " channels");
  }
  if (n_classes < 2) throw ConfigError("classifier needs at least two classes");
}

CnnParameters CnnParameters::zeros_like(const CnnParameters& other) {
  CnnParameters z;
  for (const ConvParams& c : other.conv) {
    z.conv.push_back({Matrix::Zero(c.kernel.rows(), c.kernel.cols()),
                      Vector::Zero(c.bias.size())});
  }
  z.excite_down = Matrix::Zero(other.excite_down.rows(), other.excite_down.cols());
  z.excite_up = Matrix::Zero(other.excite_up.rows(), other.excite_up.cols());
  z.fc_weight = Matrix::Zero(other.fc_weight.rows(), other.fc_weight.cols());
  z.fc_bias = Vector::Zero(other.fc_bias.size());
  return z;
}

std::vector<std::span<double>> CnnParameters::tensors() {
  std::vector<std::span<double>> out;
  auto add = [&out](auto& m) {
    out.emplace_back(m.data(), static_cast<std::size_t>(m.size()));
  };
  for (ConvParams& c : conv) {
    add(c.kernel);
    add(c.bias);
  }
  add(excite_down);
  add(excite_up);
  add(fc_weight);
  add(fc_bias);
  return out;
}

std::vector<std::span<const double>> CnnParameters::tensors() const {
  std::vector<std::span<const double>> out;
  for (std::span<double> s : const_cast<CnnParameters*>(this)->tensors()) {
    out.emplace_back(s.data(), s.size());
  }
  return out;
}

std::size_t CnnParameters::count() const {
  std::size_t n = 0;
  for (auto s : tensors()) n += s.size();
  return n;
}

AttentionCnnModel model_init(const CnnArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  AttentionCnnModel model;
  model.arch = arch;
  model.seed = seed;
  int in = 1;
  for (int out : arch.channels) {
    ConvParams layer;
    layer.kernel.resize(out, in * arch.kernel_len);
    init_uniform(layer.kernel, std::sqrt(6.0 / (in * arch.kernel_len)), rng);
    layer.bias = Vector::Zero(out);
    model.params.conv.push_back(std::move(layer));
    in = out;
  }
  const int c = arch.attended_channels();
  const int s = arch.squeeze_dim();
  model.params.excite_down.resize(s, c);
  init_uniform(model.params.excite_down, 1.0 / std::sqrt(c), rng);
  model.params.excite_up.resize(c, s);
  init_uniform(model.params.excite_up, 1.0 / std::sqrt(s), rng);
  model.params.fc_weight.resize(arch.n_classes, arch.flat_features());
  init_uniform(model.params.fc_weight, 1.0 / std::sqrt(arch.flat_features()),
               rng);
  model.params.fc_bias = Vector::Zero(arch.n_classes);
  return model;
}

Matrix conv_preactivation(const Matrix& x, const ConvParams& layer,
                          int kernel_len) {
  if (layer.kernel.cols() != x.rows() * kernel_len) {
    throw ShapeError("conv kernel does not match input channels");
  }
  if (layer.bias.size() != layer.kernel.rows()) {
    throw ShapeError("conv bias does not match output channels");
  }
  Matrix z = layer.kernel * im2col(x, x.cols(), kernel_len);
  z.colwise() += layer.bias;
  return z;
}

Matrix conv_forward(const Matrix& x, const ConvParams& layer, int kernel_len) {
  return conv_preactivation(x, layer, kernel_len).cwiseMax(0.0);
}

AttentionOutput channel_attention(const Matrix& u, const Matrix& excite_down,
                                  const Matrix& excite_up) {
  if (excite_down.cols() != u.rows() || excite_up.rows() != u.rows() ||
      excite_up.cols() != excite_down.rows()) {
    throw ShapeError("excitation weights do not match the channel count");
  }
  if (!u.allFinite()) throw ValidationError("attention input is not finite");
  AttentionOutput out;
  out.v_avg = u.rowwise().mean();
  out.v_max = u.rowwise().maxCoeff();
  out.w_avg = excite(out.v_avg, excite_down, excite_up).gate;
  out.w_max = excite(out.v_max, excite_down, excite_up).gate;
  out.w_total = out.w_avg + out.w_max;
  out.scaled = out.w_total.asDiagonal() * u;
  return out;
}

Vector forward(const AttentionCnnModel& model, const Vector& scores,
               ForwardCache* cache) {
  const BatchTrace tr = run_forward(model, scores.transpose());
  if (cache != nullptr) {
    cache->conv_outputs = tr.outputs;
    const Matrix& u = tr.outputs.back();
    cache->attention =
        channel_attention(u, model.params.excite_down, model.params.excite_up);
    cache->flat = tr.flat.col(0);
  }
  return tr.logits.col(0);
}

LossAndGrad loss_and_grad(const AttentionCnnModel& model, const Matrix& x,
                          std::span<const int> labels) {
  check_labels(x, labels, model.arch.n_classes);
  const BatchTrace tr = run_forward(model, x);
  const CnnParameters& p = model.params;
  const Eigen::Index len = model.arch.input_len;
  const Eigen::Index batch = x.rows();
  const double inv_batch = 1.0 / static_cast<double>(batch);

  LossAndGrad out;
  out.grads = CnnParameters::zeros_like(p);
  CnnParameters& g = out.grads;

  // Softmax cross-entropy: d loss / d logits = (softmax - onehot) / B.
  const Vector lse = column_logsumexp(tr.logits);
  Matrix dlogits(tr.logits.rows(), batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const int label = labels[static_cast<std::size_t>(b)];
    out.loss += lse(b) - tr.logits(label, b);
    Eigen::Index best = 0;
    tr.logits.col(b).maxCoeff(&best);
    out.correct += (best == label);
    dlogits.col(b) = (tr.logits.col(b).array() - lse(b)).exp();
    dlogits(label, b) -= 1.0;
  }
  out.loss *= inv_batch;
  dlogits *= inv_batch;

  g.fc_weight = dlogits * tr.flat.transpose();
  g.fc_bias = dlogits.rowwise().sum();
  const Matrix dflat = p.fc_weight.transpose() * dlogits;

  const Matrix& u_all = tr.outputs.back();
  const Eigen::Index channels = u_all.rows();
  Matrix du_all = Matrix::Zero(channels, len * batch);

  // Gradient of one excitation branch with respect to its pooled input;
  // the shared weights accumulate both branches.
  auto excite_backward = [&](const ExciteTrace& et, const Vector& dgate) {
    const Vector dlogit =
        dgate.array() * et.gate.array() * (1.0 - et.gate.array());
    const Vector rect = et.hidden.cwiseMax(0.0);
    g.excite_up += dlogit * rect.transpose();
    Vector dhidden = p.excite_up.transpose() * dlogit;
    for (Eigen::Index i = 0; i < dhidden.size(); ++i) {
      if (!(et.hidden(i) > 0.0)) dhidden(i) = 0.0;
    }
    g.excite_down += dhidden * et.pooled.transpose();
    return Vector(p.excite_down.transpose() * dhidden);
  };

  for (Eigen::Index b = 0; b < batch; ++b) {
    const SampleAttention& att = tr.attention[static_cast<std::size_t>(b)];
    const auto u = u_all.middleCols(b * len, len);
    auto du = du_all.middleCols(b * len, len);
    Vector dw_total(channels);
    for (Eigen::Index c = 0; c < channels; ++c) {
      const auto ds = dflat.col(b).segment(c * len, len);
      du.row(c) = att.w_total(c) * ds.transpose();
      dw_total(c) = ds.dot(u.row(c).transpose());
    }
    const Vector dv_avg = excite_backward(att.avg, dw_total);
    const Vector dv_max = excite_backward(att.max, dw_total);
    for (Eigen::Index c = 0; c < channels; ++c) {
      du.row(c).array() += dv_avg(c) / static_cast<double>(len);
      du(c, att.argmax[static_cast<std::size_t>(c)]) += dv_max(c);
    }
  }

  Matrix da = std::move(du_all);
  for (std::size_t l = p.conv.size(); l-- > 0;) {
    // Rectifier mask from the stored output: out > 0 iff pre-activation > 0.
    const Matrix dz = da.cwiseProduct(
        (tr.outputs[l].array() > 0.0).cast<double>().matrix());
    g.conv[l].kernel = dz * tr.cols[l].transpose();
    g.conv[l].bias = dz.rowwise().sum();
    if (l > 0) {
      const Matrix dcol = p.conv[l].kernel.transpose() * dz;
      da = col2im(dcol, p.conv[l - 1].kernel.rows(), len,
                  model.arch.kernel_len);
    }
  }
  return out;
}

double mean_cross_entropy(const AttentionCnnModel& model, const Matrix& x,
                          std::span<const int> labels) {
  check_labels(x, labels, model.arch.n_classes);
  const BatchTrace tr = run_forward(model, x);
  const Vector lse = column_logsumexp(tr.logits);
  double loss = 0.0;
  for (Eigen::Index b = 0; b < x.rows(); ++b) {
    loss += lse(b) - tr.logits(labels[static_cast<std::size_t>(b)], b);
  }
  return loss / static_cast<double>(x.rows());
}

Matrix predict_proba(const AttentionCnnModel& model, const Matrix& x) {
  const BatchTrace tr = run_forward(model, x);
  const Vector lse = column_logsumexp(tr.logits);
  Matrix proba(x.rows(), tr.logits.rows());
  for (Eigen::Index b = 0; b < x.rows(); ++b) {
    proba.row(b) = (tr.logits.col(b).array() - lse(b)).exp().transpose();
  }
  return proba;
}

}  // namespace spectrascreen
