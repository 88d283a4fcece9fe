#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "loco/common.hpp"

// Small dense building blocks, templated on the scalar so verification can
// run in double and throughput in float through one code path. Every block
// carries an analytic backward against a forward cache.

namespace loco {

template <typename S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using Planes = std::vector<MatT<S>>;  // feature map, one matrix per channel

template <typename S>
S elu(S x) {
  return x > S(0) ? x : std::expm1(x);
}
template <typename S>
S elu_grad(S x) {
  return x > S(0) ? S(1) : std::exp(x);
}
template <typename S>
S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

template <typename S>
VecT<S> elu_vec(const VecT<S>& x) {
  return x.unaryExpr([](S v) { return elu(v); });
}
template <typename S>
VecT<S> sigmoid_vec(const VecT<S>& x) {
  return x.unaryExpr([](S v) { return sigmoid(v); });
}

// ---------------------------------------------------------------------------

template <typename S>
struct Linear {
  MatT<S> w;  // out x in
  VecT<S> b;

  void init(int out, int in) {
    w.setZero(out, in);
    b.setZero(out);
  }

  VecT<S> forward(const VecT<S>& x) const { return w * x + b; }

  // accumulates parameter grads, returns grad wrt input
  VecT<S> backward(const VecT<S>& x, const VecT<S>& gy, Linear& g) const {
    g.w.noalias() += gy * x.transpose();
    g.b += gy;
    return w.transpose() * gy;
  }

  template <class F>
  void visit(const std::string& p, F&& f) {
    f(p + ".w", w);
    f(p + ".b", b);
  }
};

// ---------------------------------------------------------------------------

template <typename S>
struct LayerNormCache {
  VecT<S> xhat;
  S inv_std = S(0);
};

template <typename S>
struct LayerNorm {
  VecT<S> gamma;
  VecT<S> beta;
  static constexpr S kEps = S(1e-5);

  void init(int dim) {
    gamma.setOnes(dim);
    beta.setZero(dim);
  }

  VecT<S> forward(const VecT<S>& x, LayerNormCache<S>& c) const {
    const S mu = x.mean();
    const S var = (x.array() - mu).square().mean();
    c.inv_std = S(1) / std::sqrt(var + kEps);
    c.xhat = (x.array() - mu).matrix() * c.inv_std;
    return (gamma.array() * c.xhat.array() + beta.array()).matrix();
  }

  VecT<S> backward(const LayerNormCache<S>& c, const VecT<S>& gy,
                   LayerNorm& g) const {
    const auto n = static_cast<S>(gy.size());
    g.gamma.array() += gy.array() * c.xhat.array();
    g.beta += gy;
    const VecT<S> gxhat = (gy.array() * gamma.array()).matrix();
    const S sum_g = gxhat.sum();
    const S sum_gx = (gxhat.array() * c.xhat.array()).sum();
    return (c.inv_std / n) *
           (n * gxhat.array() - sum_g - c.xhat.array() * sum_gx).matrix();
  }

  template <class F>
  void visit(const std::string& p, F&& f) {
    f(p + ".gamma", gamma);
    f(p + ".beta", beta);
  }
};

// ---------------------------------------------------------------------------
// 3x3 convolution, stride 2, zero padding 1. Weight layout:
// w(co, ci * 9 + ky * 3 + kx).

template <typename S>
struct Conv2dS2 {
  MatT<S> w;
  VecT<S> b;
  int in_ch = 0;
  int out_ch = 0;

  void init(int cin, int cout) {
    in_ch = cin;
    out_ch = cout;
    w.setZero(cout, cin * 9);
    b.setZero(cout);
  }

  static int out_size(int n) { return (n + 2 - 3) / 2 + 1; }

  Planes<S> forward(const Planes<S>& in) const {
    const int h = static_cast<int>(in[0].rows());
    const int wd = static_cast<int>(in[0].cols());
    const int oh = out_size(h), ow = out_size(wd);
    Planes<S> out(out_ch, MatT<S>::Zero(oh, ow));
    for (int co = 0; co < out_ch; ++co) {
      MatT<S>& o = out[co];
      for (int r = 0; r < oh; ++r) {
        for (int c = 0; c < ow; ++c) {
          S acc = b[co];
          for (int ci = 0; ci < in_ch; ++ci) {
            const MatT<S>& im = in[ci];
            for (int ky = 0; ky < 3; ++ky) {
              const int ir = 2 * r - 1 + ky;
              if (ir < 0 || ir >= h) continue;
              for (int kx = 0; kx < 3; ++kx) {
                const int ic = 2 * c - 1 + kx;
                if (ic < 0 || ic >= wd) continue;
                acc += w(co, ci * 9 + ky * 3 + kx) * im(ir, ic);
              }
            }
          }
          o(r, c) = acc;
        }
      }
    }
    return out;
  }

  Planes<S> backward(const Planes<S>& in, const Planes<S>& gout,
                     Conv2dS2& g) const {
    const int h = static_cast<int>(in[0].rows());
    const int wd = static_cast<int>(in[0].cols());
    const int oh = static_cast<int>(gout[0].rows());
    const int ow = static_cast<int>(gout[0].cols());
    Planes<S> gin(in_ch, MatT<S>::Zero(h, wd));
    for (int co = 0; co < out_ch; ++co) {
      const MatT<S>& go = gout[co];
      g.b[co] += go.sum();
      for (int r = 0; r < oh; ++r) {
        for (int c = 0; c < ow; ++c) {
          const S gv = go(r, c);
          if (gv == S(0)) continue;
          for (int ci = 0; ci < in_ch; ++ci) {
            for (int ky = 0; ky < 3; ++ky) {
              const int ir = 2 * r - 1 + ky;
              if (ir < 0 || ir >= h) continue;
              for (int kx = 0; kx < 3; ++kx) {
                const int ic = 2 * c - 1 + kx;
                if (ic < 0 || ic >= wd) continue;
                g.w(co, ci * 9 + ky * 3 + kx) += gv * in[ci](ir, ic);
                gin[ci](ir, ic) += gv * w(co, ci * 9 + ky * 3 + kx);
              }
            }
          }
        }
      }
    }
    return gin;
  }

  template <class F>
  void visit(const std::string& p, F&& f) {
    f(p + ".w", w);
    f(p + ".b", b);
  }
};

template <typename S>
Planes<S> avg_pool2(const Planes<S>& in) {
  Planes<S> out;
  out.reserve(in.size());
  for (const MatT<S>& im : in) {
    const int oh = static_cast<int>(im.rows()) / 2;
    const int ow = static_cast<int>(im.cols()) / 2;
    MatT<S> o(oh, ow);
    for (int r = 0; r < oh; ++r)
      for (int c = 0; c < ow; ++c)
        o(r, c) = (im(2 * r, 2 * c) + im(2 * r + 1, 2 * c) +
                   im(2 * r, 2 * c + 1) + im(2 * r + 1, 2 * c + 1)) / S(4);
    out.push_back(std::move(o));
  }
  return out;
}

template <typename S>
Planes<S> avg_pool2_backward(const Planes<S>& gout, int h, int w) {
  Planes<S> gin;
  gin.reserve(gout.size());
  for (const MatT<S>& go : gout) {
    MatT<S> gi = MatT<S>::Zero(h, w);
    for (int r = 0; r < go.rows(); ++r)
      for (int c = 0; c < go.cols(); ++c) {
        const S v = go(r, c) / S(4);
        gi(2 * r, 2 * c) += v;
        gi(2 * r + 1, 2 * c) += v;
        gi(2 * r, 2 * c + 1) += v;
        gi(2 * r + 1, 2 * c + 1) += v;
      }
    gin.push_back(std::move(gi));
  }
  return gin;
}

template <typename S>
void elu_planes_inplace(Planes<S>& p) {
  for (MatT<S>& m : p) m = m.unaryExpr([](S v) { return elu(v); });
}

template <typename S>
void elu_planes_backward(const Planes<S>& pre, Planes<S>& g) {
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = (g[i].array() *
            pre[i].unaryExpr([](S v) { return elu_grad(v); }).array())
               .matrix();
}

// ---------------------------------------------------------------------------

template <typename S>
struct GruCache {
  VecT<S> x, h_prev, r, z, n, rh;
};

template <typename S>
struct GruCell {
  MatT<S> wr, wz, wn;  // hidden x input
  MatT<S> ur, uz, un;  // hidden x hidden
  VecT<S> br, bz, bn;

  void init(int hidden, int input) {
    wr.setZero(hidden, input); wz.setZero(hidden, input); wn.setZero(hidden, input);
    ur.setZero(hidden, hidden); uz.setZero(hidden, hidden); un.setZero(hidden, hidden);
    br.setZero(hidden); bz.setZero(hidden); bn.setZero(hidden);
  }

  VecT<S> forward(const VecT<S>& x, const VecT<S>& h_prev,
                  GruCache<S>& c) const {
    c.x = x;
    c.h_prev = h_prev;
    c.r = sigmoid_vec<S>(wr * x + ur * h_prev + br);
    c.z = sigmoid_vec<S>(wz * x + uz * h_prev + bz);
    c.rh = (c.r.array() * h_prev.array()).matrix();
    c.n = (wn * x + un * c.rh + bn).array().tanh().matrix();
    return ((S(1) - c.z.array()) * c.n.array() + c.z.array() * h_prev.array())
        .matrix();
  }

  // returns (grad x, grad h_prev)
  std::pair<VecT<S>, VecT<S>> backward(const GruCache<S>& c, const VecT<S>& gh,
                                       GruCell& g) const {
    const VecT<S> gz_pre =
        (gh.array() * (c.h_prev - c.n).array() * c.z.array() *
         (S(1) - c.z.array()))
            .matrix();
    const VecT<S> gn_pre =
        (gh.array() * (S(1) - c.z.array()) * (S(1) - c.n.array().square()))
            .matrix();
    VecT<S> gh_prev = (gh.array() * c.z.array()).matrix();

    g.wn.noalias() += gn_pre * c.x.transpose();
    g.un.noalias() += gn_pre * c.rh.transpose();
    g.bn += gn_pre;
    const VecT<S> grh = un.transpose() * gn_pre;
    const VecT<S> gr_pre =
        (grh.array() * c.h_prev.array() * c.r.array() * (S(1) - c.r.array()))
            .matrix();
    gh_prev += (grh.array() * c.r.array()).matrix();

    g.wr.noalias() += gr_pre * c.x.transpose();
    g.ur.noalias() += gr_pre * c.h_prev.transpose();
    g.br += gr_pre;
    g.wz.noalias() += gz_pre * c.x.transpose();
    g.uz.noalias() += gz_pre * c.h_prev.transpose();
    g.bz += gz_pre;

    gh_prev += ur.transpose() * gr_pre + uz.transpose() * gz_pre;
    VecT<S> gx = wr.transpose() * gr_pre + wz.transpose() * gz_pre +
                 wn.transpose() * gn_pre;
    return {std::move(gx), std::move(gh_prev)};
  }

  template <class F>
  void visit(const std::string& p, F&& f) {
    f(p + ".wr", wr); f(p + ".wz", wz); f(p + ".wn", wn);
    f(p + ".ur", ur); f(p + ".uz", uz); f(p + ".un", un);
    f(p + ".br", br); f(p + ".bz", bz); f(p + ".bn", bn);
  }
};

// ---------------------------------------------------------------------------

template <typename S>
struct LstmCache {
  VecT<S> x, h_prev, c_prev, i, f, g, o, c_new;
};

template <typename S>
struct LstmCell {
  MatT<S> wi, wf, wg, wo;
  MatT<S> ui, uf, ug, uo;
  VecT<S> bi, bf, bg, bo;

  void init(int hidden, int input) {
    wi.setZero(hidden, input); wf.setZero(hidden, input);
    wg.setZero(hidden, input); wo.setZero(hidden, input);
    ui.setZero(hidden, hidden); uf.setZero(hidden, hidden);
    ug.setZero(hidden, hidden); uo.setZero(hidden, hidden);
    bi.setZero(hidden); bf.setZero(hidden);
    bg.setZero(hidden); bo.setZero(hidden);
  }

  // returns h_new; c_new lives in the cache
  VecT<S> forward(const VecT<S>& x, const VecT<S>& h_prev,
                  const VecT<S>& c_prev, LstmCache<S>& c) const {
    c.x = x;
    c.h_prev = h_prev;
    c.c_prev = c_prev;
    c.i = sigmoid_vec<S>(wi * x + ui * h_prev + bi);
    c.f = sigmoid_vec<S>(wf * x + uf * h_prev + bf);
    c.g = (wg * x + ug * h_prev + bg).array().tanh().matrix();
    c.o = sigmoid_vec<S>(wo * x + uo * h_prev + bo);
    c.c_new = (c.f.array() * c_prev.array() + c.i.array() * c.g.array()).matrix();
    return (c.o.array() * c.c_new.array().tanh()).matrix();
  }

  struct Grads {
    VecT<S> x, h_prev, c_prev;
  };

  Grads backward(const LstmCache<S>& c, const VecT<S>& gh, const VecT<S>& gc_in,
                 LstmCell& g) const {
    const VecT<S> tc = c.c_new.array().tanh().matrix();
    const VecT<S> go_pre =
        (gh.array() * tc.array() * c.o.array() * (S(1) - c.o.array())).matrix();
    const VecT<S> gc =
        (gc_in.array() + gh.array() * c.o.array() * (S(1) - tc.array().square()))
            .matrix();
    const VecT<S> gi_pre =
        (gc.array() * c.g.array() * c.i.array() * (S(1) - c.i.array())).matrix();
    const VecT<S> gf_pre =
        (gc.array() * c.c_prev.array() * c.f.array() * (S(1) - c.f.array()))
            .matrix();
    const VecT<S> gg_pre =
        (gc.array() * c.i.array() * (S(1) - c.g.array().square())).matrix();

    g.wi.noalias() += gi_pre * c.x.transpose();
    g.wf.noalias() += gf_pre * c.x.transpose();
    g.wg.noalias() += gg_pre * c.x.transpose();
    g.wo.noalias() += go_pre * c.x.transpose();
    g.ui.noalias() += gi_pre * c.h_prev.transpose();
    g.uf.noalias() += gf_pre * c.h_prev.transpose();
    g.ug.noalias() += gg_pre * c.h_prev.transpose();
    g.uo.noalias() += go_pre * c.h_prev.transpose();
    g.bi += gi_pre; g.bf += gf_pre; g.bg += gg_pre; g.bo += go_pre;

    Grads out;
    out.x = wi.transpose() * gi_pre + wf.transpose() * gf_pre +
            wg.transpose() * gg_pre + wo.transpose() * go_pre;
    out.h_prev = ui.transpose() * gi_pre + uf.transpose() * gf_pre +
                 ug.transpose() * gg_pre + uo.transpose() * go_pre;
    out.c_prev = (gc.array() * c.f.array()).matrix();
    return out;
  }

  template <class F>
  void visit(const std::string& p, F&& f) {
    f(p + ".wi", wi); f(p + ".wf", wf); f(p + ".wg", wg); f(p + ".wo", wo);
    f(p + ".ui", ui); f(p + ".uf", uf); f(p + ".ug", ug); f(p + ".uo", uo);
    f(p + ".bi", bi); f(p + ".bf", bf); f(p + ".bg", bg); f(p + ".bo", bo);
  }
};

// ---------------------------------------------------------------------------
// Small MLP: Linear (+ ELU) chain; the last layer is linear.

template <typename S>
struct MlpCache {
  std::vector<VecT<S>> inputs;  // input to each layer
  std::vector<VecT<S>> pre;     // pre-activation of each hidden layer
};

template <typename S>
struct Mlp {
  std::vector<Linear<S>> layers;

  void init(const std::vector<int>& dims) {
    layers.clear();
    layers.resize(dims.size() - 1);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i)
      layers[i].init(dims[i + 1], dims[i]);
  }

  VecT<S> forward(const VecT<S>& x, MlpCache<S>& c) const {
    c.inputs.clear();
    c.pre.clear();
    VecT<S> cur = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      c.inputs.push_back(cur);
      VecT<S> z = layers[i].forward(cur);
      if (i + 1 < layers.size()) {
        c.pre.push_back(z);
        cur = elu_vec<S>(z);
      } else {
        cur = std::move(z);
      }
    }
    return cur;
  }

  VecT<S> backward(const MlpCache<S>& c, const VecT<S>& gy, Mlp& g) const {
    VecT<S> grad = gy;
    for (std::size_t i = layers.size(); i-- > 0;) {
      if (i + 1 < layers.size())
        grad = (grad.array() *
                c.pre[i].unaryExpr([](S v) { return elu_grad(v); }).array())
                   .matrix();
      grad = layers[i].backward(c.inputs[i], grad, g.layers[i]);
    }
    return grad;
  }

  template <class F>
  void visit(const std::string& p, F&& f) {
    for (std::size_t i = 0; i < layers.size(); ++i)
      layers[i].visit(p + ".l" + std::to_string(i), f);
  }
};

}  // namespace loco
