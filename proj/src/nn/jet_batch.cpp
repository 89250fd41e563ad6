#include "inferno/nn/jet_batch.hpp"

#include <stdexcept>

namespace inferno::nn {

using Eigen::ArrayXXd;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

JetBatch background_input_jets(const Eigen::Ref<const synthgen::ObservationMatrix>& x,
                               const JetLayout& layout, double r0, double lambda0, double r_at,
                               double lambda_at) {
  if (lambda_at <= 0.0) throw std::domain_error("background_input_jets: lambda must be positive");
  JetBatch out = JetBatch::zeros(layout, x.rows(), 3);
  out.s[0] = x;
  out.s[0].col(0).array() += r_at - r0;
  out.s[0].col(2) *= lambda0 / lambda_at;
  for (int i = 0; i < layout.n_dirs(); ++i) {
    switch (layout.dirs[static_cast<std::size_t>(i)]) {
      case NuisanceDir::shift_r:
        out.s[static_cast<std::size_t>(layout.g_slot(i))].col(0).setOnes();
        break;
      case NuisanceDir::rate_lambda: {
        const double l2 = lambda_at * lambda_at;
        out.s[static_cast<std::size_t>(layout.g_slot(i))].col(2) = -lambda0 / l2 * x.col(2);
        out.s[static_cast<std::size_t>(layout.h_slot(i, i))].col(2) =
            2.0 * lambda0 / (l2 * lambda_at) * x.col(2);
        break;
      }
    }
  }
  return out;
}

JetBatch plain_input_jets(const Eigen::Ref<const synthgen::ObservationMatrix>& x,
                          const JetLayout& layout) {
  JetBatch out = JetBatch::zeros(layout, x.rows(), 3);
  out.s[0] = x;
  return out;
}

namespace {

JetBatch affine_jets(const MlpParams& p, std::size_t layer, const JetBatch& in) {
  JetBatch out;
  out.layout = in.layout;
  out.s.reserve(in.s.size());
  for (const MatrixXd& slot : in.s) out.s.push_back(slot * p.w[layer].transpose());
  out.s[0].rowwise() += p.b[layer].transpose();
  return out;
}

void relu_jets(JetBatch& z, Eigen::ArrayXXd& mask) {
  mask = (z.s[0].array() > 0.0).cast<double>();
  for (MatrixXd& slot : z.s) slot.array() *= mask;
}

/// rowwise dot product of two (n x b) matrices
VectorXd row_dot(const MatrixXd& a, const MatrixXd& b) {
  return (a.array() * b.array()).rowwise().sum();
}

/// scale each row i of m by v(i)
MatrixXd row_scale(const VectorXd& v, const MatrixXd& m) {
  return (m.array().colwise() * v.array()).matrix();
}

}  // namespace

JetBatch mlp_forward_jets(const MlpParams& p, const JetBatch& input, JetForwardCache* cache) {
  const int nd = input.layout.n_dirs();
  const std::size_t layers = p.w.size();
  if (cache) {
    cache->input = input;
    cache->hidden.clear();
    cache->mask.clear();
  }

  JetBatch h = input;
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    JetBatch z = affine_jets(p, l, h);
    Eigen::ArrayXXd mask;
    relu_jets(z, mask);
    if (cache) {
      cache->hidden.push_back(z);
      cache->mask.push_back(std::move(mask));
    }
    h = std::move(z);
  }
  JetBatch u = affine_jets(p, layers - 1, h);
  for (MatrixXd& slot : u.s) slot /= p.tau;
  if (cache) cache->u = u;

  // softmax on the value slot (max-subtraction; the shift is a constant with
  // no tangents, so jet slots are untouched and the ratio removes it exactly)
  MatrixXd uv = u.s[0];
  const VectorXd rowmax = uv.rowwise().maxCoeff();
  uv.colwise() -= rowmax;
  MatrixXd pmat = uv.array().exp().matrix();
  const VectorXd norm = pmat.rowwise().sum();
  pmat.array().colwise() /= norm.array();

  JetBatch out = JetBatch::zeros(input.layout, u.rows(), u.cols());
  out.s[0] = pmat;

  std::vector<MatrixXd> c(static_cast<std::size_t>(nd));
  std::vector<VectorXd> sdot(static_cast<std::size_t>(nd));
  for (int i = 0; i < nd; ++i) {
    const MatrixXd& a = u.s[static_cast<std::size_t>(u.layout.g_slot(i))];
    sdot[static_cast<std::size_t>(i)] = row_dot(pmat, a);
    MatrixXd ci = a;
    ci.colwise() -= sdot[static_cast<std::size_t>(i)];
    out.s[static_cast<std::size_t>(out.layout.g_slot(i))] = pmat.array() * ci.array();
    c[static_cast<std::size_t>(i)] = std::move(ci);
  }

  std::vector<MatrixXd> c_d;
  std::vector<VectorXd> t;
  for (int i = 0; i < nd; ++i)
    for (int j = 0; j <= i; ++j) {
      const MatrixXd& a_i = u.s[static_cast<std::size_t>(u.layout.g_slot(i))];
      const MatrixXd& a_j = u.s[static_cast<std::size_t>(u.layout.g_slot(j))];
      const MatrixXd& d = u.s[static_cast<std::size_t>(u.layout.h_slot(i, j))];
      const MatrixXd& ci = c[static_cast<std::size_t>(i)];
      const MatrixXd& cj = c[static_cast<std::size_t>(j)];
      VectorXd sd = row_dot(pmat, d);
      MatrixXd cd = d;
      cd.colwise() -= sd;
      VectorXd tij = row_dot(pmat, (a_i.array() * a_j.array()).matrix());
      tij.array() -=
          sdot[static_cast<std::size_t>(i)].array() * sdot[static_cast<std::size_t>(j)].array();
      out.s[static_cast<std::size_t>(out.layout.h_slot(i, j))] =
          (pmat.array() * ci.array() * cj.array() + pmat.array() * cd.array() -
           (pmat.array().colwise() * tij.array()))
              .matrix();
      c_d.push_back(std::move(cd));
      t.push_back(std::move(tij));
    }

  if (cache) {
    cache->p = pmat;
    cache->c = c;
    cache->s_dot = sdot;
    cache->c_d = c_d;
    cache->t = t;
  }
  return out;
}

std::vector<autodiff::Jet2d> aggregate_bins(const JetBatch& probs) {
  const int nd = probs.layout.n_dirs();
  std::vector<autodiff::Jet2d> out(static_cast<std::size_t>(probs.cols()));
  for (Eigen::Index bin = 0; bin < probs.cols(); ++bin) {
    autodiff::Jet2d j;
    j.k = nd;
    j.v = probs.s[0].col(bin).sum();
    for (int i = 0; i < nd; ++i)
      j.g[static_cast<std::size_t>(i)] =
          probs.s[static_cast<std::size_t>(probs.layout.g_slot(i))].col(bin).sum();
    for (int i = 0; i < nd; ++i)
      for (int jj = 0; jj <= i; ++jj)
        j.hess(i, jj) =
            probs.s[static_cast<std::size_t>(probs.layout.h_slot(i, jj))].col(bin).sum();
    out[static_cast<std::size_t>(bin)] = j;
  }
  return out;
}

void mlp_vjp_jets(const MlpParams& p, const JetForwardCache& cache,
                  const std::vector<Eigen::RowVectorXd>& w_slots, MlpGrads& grads) {
  const JetLayout& layout = cache.u.layout;
  const int nd = layout.n_dirs();
  const Eigen::Index n = cache.p.rows();
  const MatrixXd& pm = cache.p;

  // broadcast the per-bin adjoints to full (n x b) covectors
  auto broad = [&](int slot) { return w_slots[static_cast<std::size_t>(slot)].replicate(n, 1); };

  // adjoint accumulators for the softmax inputs
  MatrixXd wp = broad(0);
  std::vector<MatrixXd> wa(static_cast<std::size_t>(nd));
  for (int i = 0; i < nd; ++i) wa[static_cast<std::size_t>(i)] = MatrixXd::Zero(n, pm.cols());
  std::vector<MatrixXd> wd;

  // first-order slots: out.g[i] = p o c_i
  for (int i = 0; i < nd; ++i) {
    const MatrixXd wg = broad(layout.g_slot(i));
    const MatrixXd& a = cache.u.s[static_cast<std::size_t>(layout.g_slot(i))];
    const MatrixXd& ci = cache.c[static_cast<std::size_t>(i)];
    const VectorXd dot = row_dot(wg, pm);
    wp.array() += wg.array() * ci.array() - (a.array().colwise() * dot.array());
    wa[static_cast<std::size_t>(i)].array() +=
        pm.array() * wg.array() - (pm.array().colwise() * dot.array());
  }

  // second-order slots: out.h[ij] = p o c_i o c_j - t_ij p + p o c_d
  int pair = 0;
  for (int i = 0; i < nd; ++i)
    for (int j = 0; j <= i; ++j, ++pair) {
      const MatrixXd w = broad(layout.h_slot(i, j));
      const MatrixXd& a_i = cache.u.s[static_cast<std::size_t>(layout.g_slot(i))];
      const MatrixXd& a_j = cache.u.s[static_cast<std::size_t>(layout.g_slot(j))];
      const MatrixXd& d = cache.u.s[static_cast<std::size_t>(layout.h_slot(i, j))];
      const MatrixXd& ci = cache.c[static_cast<std::size_t>(i)];
      const MatrixXd& cj = cache.c[static_cast<std::size_t>(j)];
      const MatrixXd& cd = cache.c_d[static_cast<std::size_t>(pair)];
      const VectorXd& tij = cache.t[static_cast<std::size_t>(pair)];
      const VectorXd& si = cache.s_dot[static_cast<std::size_t>(i)];
      const VectorXd& sj = cache.s_dot[static_cast<std::size_t>(j)];
      const VectorXd wdotp = row_dot(w, pm);

      // term p o c_i o c_j
      wp.array() += w.array() * ci.array() * cj.array();
      const VectorXd r_j = row_dot(w, (pm.array() * cj.array()).matrix());
      const VectorXd r_i = row_dot(w, (pm.array() * ci.array()).matrix());
      wa[static_cast<std::size_t>(i)].array() +=
          w.array() * pm.array() * cj.array() - (pm.array().colwise() * r_j.array());
      wa[static_cast<std::size_t>(j)].array() +=
          w.array() * pm.array() * ci.array() - (pm.array().colwise() * r_i.array());
      wp.array() -= a_i.array().colwise() * r_j.array();
      wp.array() -= a_j.array().colwise() * r_i.array();

      // term -t_ij p;  dt/dp = a_i o a_j - s_j a_i - s_i a_j
      wp.array() -= w.array().colwise() * tij.array();
      MatrixXd dtdp = (a_i.array() * a_j.array()).matrix();
      dtdp.array() -= a_i.array().colwise() * sj.array();
      dtdp.array() -= a_j.array().colwise() * si.array();
      wp.array() -= dtdp.array().colwise() * wdotp.array();
      MatrixXd dtda_i = (pm.array() * a_j.array()).matrix();
      dtda_i.array() -= pm.array().colwise() * sj.array();
      wa[static_cast<std::size_t>(i)].array() -= dtda_i.array().colwise() * wdotp.array();
      MatrixXd dtda_j = (pm.array() * a_i.array()).matrix();
      dtda_j.array() -= pm.array().colwise() * si.array();
      wa[static_cast<std::size_t>(j)].array() -= dtda_j.array().colwise() * wdotp.array();

      // term p o c_d
      wp.array() += w.array() * cd.array() - (d.array().colwise() * wdotp.array());
      MatrixXd wdij = (pm.array() * w.array()).matrix();
      wdij.array() -= pm.array().colwise() * wdotp.array();
      wd.push_back(std::move(wdij));
    }

  // through the softmax jacobian: du0 = p o (wp - <p, wp> 1)
  JetBatch du = JetBatch::zeros(layout, n, pm.cols());
  {
    const VectorXd dot = row_dot(pm, wp);
    MatrixXd shifted = wp;
    shifted.colwise() -= dot;
    du.s[0] = pm.array() * shifted.array();
  }
  for (int i = 0; i < nd; ++i)
    du.s[static_cast<std::size_t>(layout.g_slot(i))] = wa[static_cast<std::size_t>(i)];
  pair = 0;
  for (int i = 0; i < nd; ++i)
    for (int j = 0; j <= i; ++j, ++pair)
      du.s[static_cast<std::size_t>(layout.h_slot(i, j))] = wd[static_cast<std::size_t>(pair)];

  // u = z / tau
  for (MatrixXd& slot : du.s) slot /= p.tau;

  // back through the dense layers
  const std::size_t layers = p.w.size();
  JetBatch delta = std::move(du);  // adjoint of layer-l pre-activation (logits at l = last)
  for (std::size_t l = layers; l-- > 0;) {
    const JetBatch& below = (l == 0) ? cache.input : cache.hidden[l - 1];
    for (std::size_t sl = 0; sl < delta.s.size(); ++sl)
      grads.w[l].noalias() += delta.s[sl].transpose() * below.s[sl];
    grads.b[l] += delta.s[0].colwise().sum().transpose();
    if (l > 0) {
      JetBatch next = JetBatch::zeros(layout, n, p.w[l].cols());
      for (std::size_t sl = 0; sl < delta.s.size(); ++sl)
        next.s[sl] = (delta.s[sl] * p.w[l]).array() * cache.mask[l - 1].array();
      delta = std::move(next);
    }
  }
}

}  // namespace inferno::nn
