#include "motifrep/model/transformer.h"

#include <algorithm>
#include <cmath>

#include "motifrep/error.h"

namespace motifrep {
namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kPi = 3.14159265358979323846;

template <typename T>
T gelu(T x) {
  return static_cast<T>(0.5) * x * (static_cast<T>(1) + std::erf(x / static_cast<T>(std::sqrt(2.0))));
}

template <typename T>
T gelu_grad(T x) {
  const T cdf = static_cast<T>(0.5) * (static_cast<T>(1) + std::erf(x / static_cast<T>(std::sqrt(2.0))));
  const T pdf = std::exp(static_cast<T>(-0.5) * x * x) / static_cast<T>(std::sqrt(2.0 * kPi));
  return cdf + x * pdf;
}

template <typename T>
using ColVec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
struct NormOut {
  Mat<T> y;
  Mat<T> xhat;
  ColVec<T> inv_std;
};

template <typename T>
NormOut<T> layer_norm(const Mat<T>& x, const Mat<T>& gamma, const Mat<T>& beta) {
  NormOut<T> out;
  const auto n = x.rows();
  const auto h = x.cols();
  out.xhat.resize(n, h);
  out.inv_std.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const T mean = x.row(i).mean();
    const T var = (x.row(i).array() - mean).square().mean();
    const T inv = static_cast<T>(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
    out.inv_std(i) = inv;
    out.xhat.row(i) = (x.row(i).array() - mean) * inv;
  }
  out.y = (out.xhat.array().rowwise() * gamma.row(0).array()).rowwise() + beta.row(0).array();
  return out;
}

// Returns dx; accumulates dgamma / dbeta.
template <typename T>
Mat<T> layer_norm_backward(const Mat<T>& dy, const Mat<T>& xhat, const ColVec<T>& inv_std, const Mat<T>& gamma,
                           Mat<T>& dgamma, Mat<T>& dbeta) {
  dgamma.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
  dbeta.row(0) += dy.colwise().sum();
  const Mat<T> dxhat = dy.array().rowwise() * gamma.row(0).array();
  const T h = static_cast<T>(dy.cols());
  Mat<T> dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const T s1 = dxhat.row(i).sum();
    const T s2 = dxhat.row(i).dot(xhat.row(i));
    dx.row(i) = (inv_std(i) / h) * (h * dxhat.row(i).array() - s1 - xhat.row(i).array() * s2);
  }
  return dx;
}

// x * w + b, with rows [0, split) and [split, n) multiplied separately so the first
// block's result does not depend on how many rows follow it.
template <typename T>
Mat<T> affine(const Mat<T>& x, const Mat<T>& w, const Mat<T>& b, Eigen::Index split) {
  Mat<T> out(x.rows(), w.cols());
  split = std::min(split, x.rows());
  out.topRows(split).noalias() = x.topRows(split) * w;
  if (x.rows() > split) out.bottomRows(x.rows() - split).noalias() = x.bottomRows(x.rows() - split) * w;
  out.rowwise() += b.row(0);
  return out;
}

template <typename T>
Mat<T> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Mat<T> m(rows, cols);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform() < rate ? T(0) : keep_scale;
  return m;
}

}  // namespace

std::string_view to_string(ParamGroup g) {
  switch (g) {
    case ParamGroup::Embedding:
      return "embedding";
    case ParamGroup::Encoder:
      return "encoder";
    case ParamGroup::Label:
      return "label";
    case ParamGroup::Decoder:
      return "decoder";
  }
  return "";
}

double head_center(int attribute) { return 0.5 * (kVocabSizes[static_cast<std::size_t>(attribute)] - 1); }
double head_half_range(int attribute) { return 0.5 * (kVocabSizes[static_cast<std::size_t>(attribute)] - 1); }

template <typename T>
struct RTransformer<T>::LayerCache {
  Mat<T> input, q, k, v, ctx, mask1, xhat1, h1, u, g, mask2, xhat2;
  ColVec<T> inv_std1, inv_std2;
  std::vector<Mat<T>> probs;
};

template <typename T>
struct RTransformer<T>::Cache {
  int rows = 0;
  int valid = 0;
  Mat<T> concat;
  std::vector<LayerCache> layers;
};

template <typename T>
RTransformer<T>::RTransformer(const ModelConfig& config, uint64_t seed) : config_(config) {
  config_.check();
  build();
  initialize(seed);
}

template <typename T>
int RTransformer<T>::add(std::string name, ParamGroup group, int rows, int cols) {
  params_.push_back(Parameter<T>{std::move(name), group, Mat<T>::Zero(rows, cols), Mat<T>::Zero(rows, cols)});
  return static_cast<int>(params_.size()) - 1;
}

template <typename T>
void RTransformer<T>::build() {
  const int h = config_.hidden;
  int offset = 0;
  for (int k = 0; k < kNumAttributes; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    emb_[ks] = add("emb." + std::string(kAttributeNames[ks]), ParamGroup::Embedding, kVocabSizes[ks],
                   config_.attribute_embedding[ks]);
    params_.back().pad_row_pinned = true;
    emb_offset_[ks] = offset;
    offset += config_.attribute_embedding[ks];
  }
  in_w_ = add("emb.proj.w", ParamGroup::Embedding, config_.embedding_width(), h);
  in_b_ = add("emb.proj.b", ParamGroup::Embedding, 1, h);
  pos_ = add("enc.pos", ParamGroup::Encoder, config_.max_len, h);
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "enc.layer" + std::to_string(l) + ".";
    LayerIndex li{};
    li.wq = add(p + "attn.wq", ParamGroup::Encoder, h, h);
    li.bq = add(p + "attn.bq", ParamGroup::Encoder, 1, h);
    li.wk = add(p + "attn.wk", ParamGroup::Encoder, h, h);
    li.bk = add(p + "attn.bk", ParamGroup::Encoder, 1, h);
    li.wv = add(p + "attn.wv", ParamGroup::Encoder, h, h);
    li.bv = add(p + "attn.bv", ParamGroup::Encoder, 1, h);
    li.wo = add(p + "attn.wo", ParamGroup::Encoder, h, h);
    li.bo = add(p + "attn.bo", ParamGroup::Encoder, 1, h);
    li.ln1_g = add(p + "ln1.gamma", ParamGroup::Encoder, 1, h);
    li.ln1_b = add(p + "ln1.beta", ParamGroup::Encoder, 1, h);
    li.w1 = add(p + "ffn.w1", ParamGroup::Encoder, h, config_.feed_forward);
    li.b1 = add(p + "ffn.b1", ParamGroup::Encoder, 1, config_.feed_forward);
    li.w2 = add(p + "ffn.w2", ParamGroup::Encoder, config_.feed_forward, h);
    li.b2 = add(p + "ffn.b2", ParamGroup::Encoder, 1, h);
    li.ln2_g = add(p + "ln2.gamma", ParamGroup::Encoder, 1, h);
    li.ln2_b = add(p + "ln2.beta", ParamGroup::Encoder, 1, h);
    layers_.push_back(li);
  }
  lab_w_ = add("lab.w", ParamGroup::Label, h, kNumClasses);
  lab_b_ = add("lab.b", ParamGroup::Label, 1, kNumClasses);
  label_emb_ = add("dec.label_emb", ParamGroup::Decoder, kNumClasses, config_.label_embedding);
  const int z = h + config_.label_embedding;
  for (int k = 0; k < kNumAttributes; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const int out = config_.categorical_decoder ? kVocabSizes[ks] : 1;
    head_w_[ks] = add("dec.head." + std::string(kAttributeNames[ks]) + ".w", ParamGroup::Decoder, z, out);
    head_b_[ks] = add("dec.head." + std::string(kAttributeNames[ks]) + ".b", ParamGroup::Decoder, 1, out);
  }
}

template <typename T>
void RTransformer<T>::initialize(uint64_t seed) {
  Rng rng(seed);
  for (auto& p : params_) {
    const std::string& n = p.name;
    if (p.pad_row_pinned || n == "enc.pos" || n == "dec.label_emb") {
      for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = static_cast<T>(0.02 * rng.normal());
      if (p.pad_row_pinned) p.value.row(0).setZero();
    } else if (n.find("gamma") != std::string::npos) {
      p.value.setOnes();
    } else if (n.find("beta") != std::string::npos) {
      p.value.setZero();
    }
  }
  // Linear maps: weight and bias uniform in +-1/sqrt(fan_in).
  auto linear = [&](int w, int b) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(value(w).rows()));
    for (Eigen::Index i = 0; i < value(w).size(); ++i) value(w).data()[i] = static_cast<T>(bound * (2 * rng.uniform() - 1));
    for (Eigen::Index i = 0; i < value(b).size(); ++i) value(b).data()[i] = static_cast<T>(bound * (2 * rng.uniform() - 1));
  };
  linear(in_w_, in_b_);
  for (const auto& l : layers_) {
    linear(l.wq, l.bq);
    linear(l.wk, l.bk);
    linear(l.wv, l.bv);
    linear(l.wo, l.bo);
    linear(l.w1, l.b1);
    linear(l.w2, l.b2);
  }
  linear(lab_w_, lab_b_);
  for (int k = 0; k < kNumAttributes; ++k) linear(head_w_[static_cast<std::size_t>(k)], head_b_[static_cast<std::size_t>(k)]);
}

template <typename T>
Parameter<T>* RTransformer<T>::find(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

template <typename T>
void RTransformer<T>::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

template <typename T>
Mat<T> RTransformer<T>::forward(const TokenMatrix& x, int rows, Rng* dropout, Cache* cache) const {
  const int h = config_.hidden;
  const int valid = x.valid_len;
  if (rows < 1 || rows > config_.max_len) throw Error("forward: row count " + std::to_string(rows) + " outside [1, max_len]");
  if (valid < 1) throw Error("forward: input has no valid rows");
  if (valid > rows) throw Error("forward: row count below valid_len");

  Mat<T> concat = Mat<T>::Zero(rows, config_.embedding_width());
  for (int r = 0; r < rows; ++r) {
    for (int k = 0; k < kNumAttributes; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const int tok = x.rows[static_cast<std::size_t>(r)][ks];
      if (!in_vocabulary(k, tok)) throw VocabularyError(r, k, tok);
      concat.block(r, emb_offset_[ks], 1, config_.attribute_embedding[ks]) = value(emb_[ks]).row(tok);
    }
  }
  Mat<T> hcur = affine<T>(concat, value(in_w_), value(in_b_), valid);
  hcur += value(pos_).topRows(rows);
  if (cache) {
    cache->rows = rows;
    cache->valid = valid;
    cache->concat = concat;
    cache->layers.clear();
  }

  const int heads = config_.heads;
  const int dh = h / heads;
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
  const bool drop = dropout != nullptr && config_.dropout > 0;

  for (const auto& li : layers_) {
    LayerCache lc;
    const Mat<T> hv = hcur.topRows(valid);
    const Mat<T> q = affine<T>(hv, value(li.wq), value(li.bq), valid);
    const Mat<T> k = affine<T>(hv, value(li.wk), value(li.bk), valid);
    const Mat<T> v = affine<T>(hv, value(li.wv), value(li.bv), valid);
    Mat<T> ctx = Mat<T>::Zero(rows, h);
    if (cache) lc.probs.resize(static_cast<std::size_t>(heads));
    for (int hd = 0; hd < heads; ++hd) {
      const auto qh = q.block(0, hd * dh, valid, dh);
      const auto kh = k.block(0, hd * dh, valid, dh);
      const auto vh = v.block(0, hd * dh, valid, dh);
      Mat<T> s = (qh * kh.transpose()) * scale;
      for (int i = 0; i < valid; ++i) {
        const T mx = s.row(i).maxCoeff();
        s.row(i) = (s.row(i).array() - mx).exp();
        s.row(i) /= s.row(i).sum();
      }
      ctx.block(0, hd * dh, valid, dh) = s * vh;
      if (cache) lc.probs[static_cast<std::size_t>(hd)] = std::move(s);
    }
    Mat<T> attn = affine<T>(ctx, value(li.wo), value(li.bo), valid);
    Mat<T> mask1;
    if (drop) {
      mask1 = dropout_mask<T>(rows, h, config_.dropout, *dropout);
      attn = attn.cwiseProduct(mask1);
    }
    auto n1 = layer_norm<T>(hcur + attn, value(li.ln1_g), value(li.ln1_b));
    const Mat<T> u = affine<T>(n1.y, value(li.w1), value(li.b1), valid);
    const Mat<T> g = u.unaryExpr([](T z) { return gelu(z); });
    Mat<T> f = affine<T>(g, value(li.w2), value(li.b2), valid);
    Mat<T> mask2;
    if (drop) {
      mask2 = dropout_mask<T>(rows, h, config_.dropout, *dropout);
      f = f.cwiseProduct(mask2);
    }
    auto n2 = layer_norm<T>(n1.y + f, value(li.ln2_g), value(li.ln2_b));
    if (cache) {
      lc.input = std::move(hcur);
      lc.q = q;
      lc.k = k;
      lc.v = v;
      lc.ctx = std::move(ctx);
      lc.mask1 = std::move(mask1);
      lc.xhat1 = std::move(n1.xhat);
      lc.inv_std1 = std::move(n1.inv_std);
      lc.h1 = n1.y;
      lc.u = u;
      lc.g = g;
      lc.mask2 = std::move(mask2);
      lc.xhat2 = std::move(n2.xhat);
      lc.inv_std2 = std::move(n2.inv_std);
      cache->layers.push_back(std::move(lc));
    }
    hcur = std::move(n2.y);
  }
  return hcur;
}

template <typename T>
Mat<T> RTransformer<T>::decoder_input(const Mat<T>& features, int label) const {
  if (label < 0 || label >= kNumClasses) throw Error("decoder label out of range: " + std::to_string(label));
  Mat<T> z(features.rows(), features.cols() + config_.label_embedding);
  z.leftCols(features.cols()) = features;
  z.rightCols(config_.label_embedding).rowwise() = value(label_emb_).row(label);
  return z;
}

template <typename T>
Mat<T> RTransformer<T>::embed(const TokenMatrix& x, int rows) const {
  Mat<T> concat = Mat<T>::Zero(rows, config_.embedding_width());
  for (int r = 0; r < rows; ++r) {
    for (int k = 0; k < kNumAttributes; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const int tok = x.rows[static_cast<std::size_t>(r)][ks];
      if (!in_vocabulary(k, tok)) throw VocabularyError(r, k, tok);
      concat.block(r, emb_offset_[ks], 1, config_.attribute_embedding[ks]) = value(emb_[ks]).row(tok);
    }
  }
  return affine<T>(concat, value(in_w_), value(in_b_), x.valid_len);
}

template <typename T>
Mat<T> RTransformer<T>::encode(const TokenMatrix& x, int rows) const {
  return forward(x, rows, nullptr, nullptr);
}

template <typename T>
RowVec<T> RTransformer<T>::classify(const TokenMatrix& x) const {
  if (x.valid_len < 1) throw Error("classify: all-pad input");
  const Mat<T> f = forward(x, x.valid_len, nullptr, nullptr);
  const RowVec<T> pooled = f.topRows(x.valid_len).colwise().mean();
  const RowVec<T> logits = pooled * value(lab_w_) + value(lab_b_);
  return softmax<T>(logits);
}

template <typename T>
std::vector<Mat<T>> RTransformer<T>::decode_logits(const TokenMatrix& x, int label, int rows) const {
  if (!config_.categorical_decoder) throw Error("decode_logits: model uses the regression decoder");
  const Mat<T> z = decoder_input(forward(x, rows, nullptr, nullptr), label);
  std::vector<Mat<T>> out;
  for (int k = 0; k < kNumAttributes; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    out.push_back(affine<T>(z, value(head_w_[ks]), value(head_b_[ks]), x.valid_len));
  }
  return out;
}

template <typename T>
Mat<T> RTransformer<T>::decode(const TokenMatrix& x, int label, int rows) const {
  const Mat<T> z = decoder_input(forward(x, rows, nullptr, nullptr), label);
  Mat<T> out(rows, kNumAttributes);
  for (int k = 0; k < kNumAttributes; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Mat<T> o = affine<T>(z, value(head_w_[ks]), value(head_b_[ks]), x.valid_len);
    if (config_.categorical_decoder) {
      for (int r = 0; r < rows; ++r) {
        Eigen::Index arg;
        o.row(r).maxCoeff(&arg);
        out(r, k) = static_cast<T>(arg);
      }
    } else {
      out.col(k) = (o.col(0).array() * static_cast<T>(head_half_range(k)) + static_cast<T>(head_center(k))).matrix();
    }
  }
  return out;
}

template <typename T>
LossValue<T> RTransformer<T>::loss(const Example& ex, double lambda) const {
  return const_cast<RTransformer<T>*>(this)->run(ex, lambda, nullptr, false);
}

template <typename T>
LossValue<T> RTransformer<T>::accumulate(const Example& ex, double lambda, Rng* dropout) {
  return run(ex, lambda, dropout, true);
}

template <typename T>
LossValue<T> RTransformer<T>::run(const Example& ex, double lambda, Rng* dropout, bool backward) {
  const TokenMatrix& x = *ex.input;
  const TokenMatrix& target = *ex.target;
  const RepetitionLearningMatrix& a = *ex.weights;
  const int rows = std::max({x.valid_len, target.valid_len, 1});
  const int valid = x.valid_len;
  const int h = config_.hidden;
  const T lam = static_cast<T>(lambda);
  const T one_minus = static_cast<T>(1.0 - lambda);

  Cache cache;
  const Mat<T> feats = forward(x, rows, dropout, backward ? &cache : nullptr);

  // classification branch
  const RowVec<T> pooled = feats.topRows(valid).colwise().mean();
  const RowVec<T> probs = softmax<T>(pooled * value(lab_w_) + value(lab_b_));
  LossValue<T> lv;
  lv.classification = loss_classification<T>(probs, ex.label);

  // reconstruction branch
  const Mat<T> z = decoder_input(feats, ex.label);
  std::array<Mat<T>, kNumAttributes> dout;  // gradient wrt each head's raw output
  for (int k = 0; k < kNumAttributes; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Mat<T> o = affine<T>(z, value(head_w_[ks]), value(head_b_[ks]), valid);
    dout[ks] = Mat<T>::Zero(o.rows(), o.cols());
    for (int r = 0; r < rows; ++r) {
      const T w = static_cast<T>(a.at(r, k));
      if (w == T(0)) continue;
      const int tgt = target.rows[static_cast<std::size_t>(r)][ks];
      if (config_.categorical_decoder) {
        const RowVec<T> p = softmax<T>(o.row(r));
        lv.reconstruction += -w * std::log(p(tgt));
        dout[ks].row(r) = w * p;
        dout[ks](r, tgt) -= w;
      } else {
        const T pred = static_cast<T>(head_center(k)) + static_cast<T>(head_half_range(k)) * o(r, 0);
        const T resid = static_cast<T>(tgt) - pred;
        lv.reconstruction += (w * resid) * (w * resid);
        dout[ks](r, 0) = static_cast<T>(-2) * w * w * resid * static_cast<T>(head_half_range(k));
      }
    }
  }
  lv.total = total_loss<T>(lv.classification, lv.reconstruction, lambda);
  if (!backward) return lv;

  // --- backward ------------------------------------------------------------------
  Mat<T> dfeat = Mat<T>::Zero(rows, h);

  RowVec<T> dlogits = probs * lam;
  dlogits(ex.label) -= lam;
  grad(lab_w_) += pooled.transpose() * dlogits;
  grad(lab_b_) += dlogits;
  const RowVec<T> dpooled = dlogits * value(lab_w_).transpose();
  dfeat.topRows(valid).rowwise() += dpooled / static_cast<T>(valid);

  Mat<T> dz = Mat<T>::Zero(rows, z.cols());
  for (int k = 0; k < kNumAttributes; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Mat<T> d = dout[ks] * one_minus;
    grad(head_w_[ks]) += z.transpose() * d;
    grad(head_b_[ks]) += d.colwise().sum();
    dz += d * value(head_w_[ks]).transpose();
  }
  dfeat += dz.leftCols(h);
  grad(label_emb_).row(ex.label) += dz.rightCols(config_.label_embedding).colwise().sum();

  const int heads = config_.heads;
  const int dh = h / heads;
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
  Mat<T> dcur = std::move(dfeat);
  for (int l = config_.layers - 1; l >= 0; --l) {
    const auto& li = layers_[static_cast<std::size_t>(l)];
    const auto& lc = cache.layers[static_cast<std::size_t>(l)];

    // second sub-layer: out = LN2(h1 + drop(ffn(h1)))
    Mat<T> dr2 = layer_norm_backward<T>(dcur, lc.xhat2, lc.inv_std2, value(li.ln2_g), grad(li.ln2_g), grad(li.ln2_b));
    Mat<T> dh1 = dr2;
    Mat<T> df = lc.mask2.size() ? Mat<T>(dr2.cwiseProduct(lc.mask2)) : dr2;
    grad(li.w2) += lc.g.transpose() * df;
    grad(li.b2) += df.colwise().sum();
    const Mat<T> dg = df * value(li.w2).transpose();
    const Mat<T> du = dg.cwiseProduct(lc.u.unaryExpr([](T v) { return gelu_grad(v); }));
    grad(li.w1) += lc.h1.transpose() * du;
    grad(li.b1) += du.colwise().sum();
    dh1 += du * value(li.w1).transpose();

    // first sub-layer: h1 = LN1(in + drop(attn(in)))
    Mat<T> dr1 = layer_norm_backward<T>(dh1, lc.xhat1, lc.inv_std1, value(li.ln1_g), grad(li.ln1_g), grad(li.ln1_b));
    Mat<T> din = dr1;
    Mat<T> dattn = lc.mask1.size() ? Mat<T>(dr1.cwiseProduct(lc.mask1)) : dr1;
    grad(li.wo) += lc.ctx.transpose() * dattn;
    grad(li.bo) += dattn.colwise().sum();
    const Mat<T> dctx = dattn * value(li.wo).transpose();

    Mat<T> dq(valid, h), dk(valid, h), dv(valid, h);
    for (int hd = 0; hd < heads; ++hd) {
      const Mat<T>& p = lc.probs[static_cast<std::size_t>(hd)];
      const auto qh = lc.q.block(0, hd * dh, valid, dh);
      const auto kh = lc.k.block(0, hd * dh, valid, dh);
      const auto vh = lc.v.block(0, hd * dh, valid, dh);
      const auto dch = dctx.block(0, hd * dh, valid, dh);
      const Mat<T> dp = dch * vh.transpose();
      dv.block(0, hd * dh, valid, dh) = p.transpose() * dch;
      Mat<T> ds(valid, valid);
      for (int i = 0; i < valid; ++i) {
        const T inner = dp.row(i).dot(p.row(i));
        ds.row(i) = p.row(i).array() * (dp.row(i).array() - inner);
      }
      ds *= scale;
      dq.block(0, hd * dh, valid, dh) = ds * kh;
      dk.block(0, hd * dh, valid, dh) = ds.transpose() * qh;
    }
    const auto in_valid = lc.input.topRows(valid);
    grad(li.wq) += in_valid.transpose() * dq;
    grad(li.bq) += dq.colwise().sum();
    grad(li.wk) += in_valid.transpose() * dk;
    grad(li.bk) += dk.colwise().sum();
    grad(li.wv) += in_valid.transpose() * dv;
    grad(li.bv) += dv.colwise().sum();
    din.topRows(valid) += dq * value(li.wq).transpose() + dk * value(li.wk).transpose() + dv * value(li.wv).transpose();
    dcur = std::move(din);
  }

  grad(pos_).topRows(rows) += dcur;
  grad(in_w_) += cache.concat.transpose() * dcur;
  grad(in_b_) += dcur.colwise().sum();
  const Mat<T> dconcat = dcur * value(in_w_).transpose();
  for (int r = 0; r < rows; ++r) {
    for (int k = 0; k < kNumAttributes; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const int tok = x.rows[static_cast<std::size_t>(r)][ks];
      if (tok == kPad) continue;  // pad embedding stays pinned at zero
      grad(emb_[ks]).row(tok) += dconcat.block(r, emb_offset_[ks], 1, config_.attribute_embedding[ks]);
    }
  }
  return lv;
}

template <typename T>
template <typename U>
RTransformer<U> RTransformer<T>::cast() const {
  RTransformer<U> out;
  out.config_ = config_;
  out.build();
  for (std::size_t i = 0; i < params_.size(); ++i) out.params_[i].value = params_[i].value.template cast<U>();
  return out;
}

template class RTransformer<float>;
template class RTransformer<double>;
template RTransformer<double> RTransformer<float>::cast<double>() const;
template RTransformer<float> RTransformer<double>::cast<float>() const;
template RTransformer<float> RTransformer<float>::cast<float>() const;
template RTransformer<double> RTransformer<double>::cast<double>() const;

}  // namespace motifrep
