#include "train.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lcnes::nes {

FrameIndex index_frames(const Dataset& ds) {
    FrameIndex idx;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= ds.rows.size(); ++i) {
        if (i == ds.rows.size() || ds.rows[i].frame_id != ds.rows[begin].frame_id) {
            idx.spans.emplace_back(begin, i);
            begin = i;
        }
    }
    return idx;
}

Batch make_batch(const Dataset& ds, const FrameIndex& idx, std::span<const std::size_t> frames) {
    std::size_t total = 0;
    for (std::size_t f : frames) total += idx.spans[f].second - idx.spans[f].first;
    Batch b;
    b.features.resize(Eigen::Index(total), kFeatureDim);
    b.y.resize(Eigen::Index(total));
    b.residual.resize(Eigen::Index(total));
    b.frame_offsets.push_back(0);
    Eigen::Index row = 0;
    for (std::size_t f : frames) {
        for (std::size_t i = idx.spans[f].first; i < idx.spans[f].second; ++i) {
            const CheckpointSample& s = ds.rows[i];
            for (int c = 0; c < kFeatureDim; ++c) b.features(row, c) = s.features[std::size_t(c)];
            b.y(row) = double(s.y);
            b.residual(row) = double(s.residual);
            ++row;
        }
        b.frame_offsets.push_back(int(row));
    }
    return b;
}

namespace {

Eigen::ArrayXd dropout_mask(Eigen::Index n, double rate, std::mt19937_64& rng) {
    Eigen::ArrayXd mask(n);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = double(rng() >> 11) * 0x1.0p-53;
        mask(i) = u < rate ? 0.0 : keep_scale;
    }
    return mask;
}

}  // namespace

double loss_batch(const MlpModel& model, const Batch& batch, const TrainConfig& cfg,
                  bool use_dropout, std::mt19937_64* rng, Gradients* grads, double* main_out,
                  double* mono_out) {
    if (model.empty()) throw std::invalid_argument("loss_batch: uninitialized model");
    const Eigen::Index S = batch.features.rows();
    const int F = int(batch.frame_offsets.size()) - 1;
    if (S == 0 || F == 0) throw std::invalid_argument("loss_batch: empty batch");
    if (use_dropout && !rng) throw std::invalid_argument("loss_batch: dropout needs an rng");

    // forward, caching activations per layer
    const std::size_t L = model.weights.size();
    std::vector<Eigen::MatrixXd> act(L + 1);  // act[0] = input, act[L] = logits
    std::vector<Eigen::MatrixXd> pre(L);      // pre-activation of each layer
    std::vector<Eigen::ArrayXXd> mask(L);     // dropout masks for hidden layers
    act[0] = batch.features;
    for (std::size_t l = 0; l < L; ++l) {
        pre[l] = (act[l] * model.weights[l]).rowwise() + model.biases[l].transpose();
        if (l + 1 == L) {
            act[l + 1] = pre[l];
            break;
        }
        Eigen::MatrixXd h = pre[l].cwiseMax(0.0);
        if (use_dropout) {
            mask[l].resize(h.rows(), h.cols());
            for (Eigen::Index r = 0; r < h.rows(); ++r)
                mask[l].row(r) = dropout_mask(h.cols(), model.dropout_rate, *rng).transpose();
            act[l + 1] = (h.array() * mask[l]).matrix();
        } else {
            act[l + 1] = h;
        }
    }
    const Eigen::VectorXd o = act[L].col(0);

    // per-logit loss pieces and d(loss)/d(logit)
    Eigen::VectorXd dlogit = Eigen::VectorXd::Zero(S);
    double loss_main = 0.0, loss_mono = 0.0;
    for (int f = 0; f < F; ++f) {
        const int lo = batch.frame_offsets[std::size_t(f)];
        const int hi = batch.frame_offsets[std::size_t(f) + 1];
        const int J = hi - lo;
        if (J <= 0) continue;
        double frame_main = 0.0;
        for (int i = lo; i < hi; ++i) {
            const double yv = batch.y(i);
            const double rw = batch.residual(i) / cfg.kappa;
            frame_main += cfg.alpha * yv * softplus(-o(i)) + (1.0 - yv) * rw * softplus(o(i));
            dlogit(i) += (-cfg.alpha * yv * sigmoid(-o(i)) + (1.0 - yv) * rw * sigmoid(o(i))) /
                         (double(J) * double(F));
        }
        loss_main += frame_main / double(J);
        if (J >= 2) {
            double frame_mono = 0.0;
            for (int i = lo; i + 1 < hi; ++i) {
                const double pj = sigmoid(o(i));
                const double pn = sigmoid(o(i + 1));
                if (pn > pj) {
                    frame_mono += pn - pj;
                    const double scale = cfg.beta / (double(J - 1) * double(F));
                    dlogit(i + 1) += scale * pn * (1.0 - pn);
                    dlogit(i) -= scale * pj * (1.0 - pj);
                }
            }
            loss_mono += frame_mono / double(J - 1);
        }
    }
    loss_main /= double(F);
    loss_mono /= double(F);
    if (main_out) *main_out = loss_main;
    if (mono_out) *mono_out = loss_mono;
    const double total = loss_main + cfg.beta * loss_mono;

    if (grads) {
        grads->dw.assign(L, {});
        grads->db.assign(L, {});
        Eigen::MatrixXd delta = dlogit;  // S x 1, gradient w.r.t. layer output
        for (std::size_t l = L; l-- > 0;) {
            grads->dw[l] = act[l].transpose() * delta;
            grads->db[l] = delta.colwise().sum().transpose();
            if (l == 0) break;
            Eigen::MatrixXd up = delta * model.weights[l].transpose();
            if (use_dropout) up.array() *= mask[l - 1];
            delta = ((pre[l - 1].array() > 0.0).cast<double>() * up.array()).matrix();
        }
    }
    return total;
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
    if (ds.rows.empty()) throw std::invalid_argument("train: empty dataset");
    const FrameIndex idx = index_frames(ds);
    const std::size_t F = idx.spans.size();

    std::mt19937_64 rng(cfg.seed);
    TrainResult res;
    res.model = mlp_init(rng);
    MlpModel& model = res.model;
    const std::size_t L = model.weights.size();

    std::vector<Eigen::MatrixXd> mw(L), vw(L);
    std::vector<Eigen::VectorXd> mb(L), vb(L);
    for (std::size_t l = 0; l < L; ++l) {
        mw[l] = Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
        vw[l] = mw[l];
        mb[l] = Eigen::VectorXd::Zero(model.biases[l].size());
        vb[l] = mb[l];
    }
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

    std::vector<std::size_t> order(F);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t batch_frames = std::min<std::size_t>(std::size_t(cfg.batch_frames), F);

    Gradients g;
    for (int step = 1; step <= cfg.steps; ++step) {
        // partial shuffle: batch_frames distinct frames per step
        for (std::size_t i = 0; i < batch_frames; ++i) {
            const std::size_t span = F - i;
            const std::size_t pick = i + std::size_t(rng() % span);
            std::swap(order[i], order[pick]);
        }
        const Batch batch =
            make_batch(ds, idx, std::span<const std::size_t>(order.data(), batch_frames));
        const double loss = loss_batch(model, batch, cfg, model.dropout_rate > 0.0, &rng, &g);
        res.loss_curve.push_back(loss);

        double norm_sq = 0.0;
        for (std::size_t l = 0; l < L; ++l)
            norm_sq += g.dw[l].squaredNorm() + g.db[l].squaredNorm();
        const double norm = std::sqrt(norm_sq);
        const double clip_scale = (cfg.grad_clip > 0.0 && norm > cfg.grad_clip)
                                      ? cfg.grad_clip / norm
                                      : 1.0;

        const double bc1 = 1.0 - std::pow(kBeta1, step);
        const double bc2 = 1.0 - std::pow(kBeta2, step);
        for (std::size_t l = 0; l < L; ++l) {
            const Eigen::MatrixXd gw = g.dw[l] * clip_scale;
            const Eigen::VectorXd gb = g.db[l] * clip_scale;
            mw[l] = kBeta1 * mw[l] + (1.0 - kBeta1) * gw;
            vw[l] = (kBeta2 * vw[l].array() + (1.0 - kBeta2) * gw.array().square()).matrix();
            mb[l] = kBeta1 * mb[l] + (1.0 - kBeta1) * gb;
            vb[l] = (kBeta2 * vb[l].array() + (1.0 - kBeta2) * gb.array().square()).matrix();
            model.weights[l].array() -=
                cfg.learning_rate *
                ((mw[l].array() / bc1) / ((vw[l].array() / bc2).sqrt() + kEps) +
                 cfg.weight_decay * model.weights[l].array());
            model.biases[l].array() -=
                cfg.learning_rate *
                ((mb[l].array() / bc1) / ((vb[l].array() / bc2).sqrt() + kEps) +
                 cfg.weight_decay * model.biases[l].array());
        }
    }
    return res;
}

}  // namespace lcnes::nes
