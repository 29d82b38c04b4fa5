#include "mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lcnes::nes {

MlpModel mlpinit_impl(std::mt19937_64& rng) {
    MlpModel m;
    for (std::size_t l = 0; l + 1 < m.dims.size(); ++l) {
        const int in = m.dims[l], out = m.dims[l + 1];
        Eigen::MatrixXd w(in, out);
        const double bound = 1.0 / std::sqrt(double(in));
        for (int r = 0; r < in; ++r)
            for (int c = 0; c < out; ++c) {
                const double u = double(rng() >> 11) * 0x1.0p-53;
                w(r, c) = bound * (2.0 * u - 1.0);
            }
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(out));
    }
    return m;
}

MlpModel mlp_init(std::mt19937_64& rng) { return mlpinit_impl(rng); }

MlpModel mlp_init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return mlpinit_impl(rng);
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) {
    if (x > 30.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double mlp_forward(const MlpModel& model, std::span<const double> features, bool training,
                   std::mt19937_64* rng) {
    if (model.empty()) throw std::invalid_argument("mlp_forward: uninitialized model");
    if (int(features.size()) != model.dims.front())
        throw std::invalid_argument("mlp_forward: feature dimension mismatch");
    if (training && !rng) throw std::invalid_argument("mlp_forward: training mode needs an rng");

    Eigen::VectorXd a(model.dims.front());
    for (int i = 0; i < model.dims.front(); ++i) {
        if (!std::isfinite(features[std::size_t(i)]))
            throw std::invalid_argument("mlp_forward: non-finite feature");
        a(i) = features[std::size_t(i)];
    }

    const double keep = 1.0 - model.dropout_rate;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        Eigen::VectorXd z = model.weights[l].transpose() * a + model.biases[l];
        if (l + 1 == model.weights.size()) return z(0);
        a = z.cwiseMax(0.0);
        if (training) {
            for (Eigen::Index i = 0; i < a.size(); ++i) {
                const double u = double((*rng)() >> 11) * 0x1.0p-53;
                a(i) = u < model.dropout_rate ? 0.0 : a(i) / keep;
            }
        }
    }
    throw std::logic_error("mlp_forward: model has no layers");
}

void save_model(const MlpModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
    out << "nes-mlp v1";
    for (int d : model.dims) out << ' ' << d;
    out << '\n';
    char buf[64];
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const Eigen::MatrixXd& w = model.weights[l];
        out << "W " << w.rows() << ' ' << w.cols() << '\n';
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", w(r, c));
                out << buf << (c + 1 == w.cols() ? '\n' : ' ');
            }
        }
        const Eigen::VectorXd& b = model.biases[l];
        out << "b " << b.size() << '\n';
        for (Eigen::Index i = 0; i < b.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", b(i));
            out << buf << (i + 1 == b.size() ? '\n' : ' ');
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

MlpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::string tag, ver;
    in >> tag >> ver;
    if (tag != "nes-mlp" || ver != "v1") throw std::runtime_error("model file: bad header");
    std::string header_rest;
    std::getline(in, header_rest);
    std::istringstream hs(header_rest);
    MlpModel m;
    m.dims.clear();
    int d;
    while (hs >> d) m.dims.push_back(d);
    if (m.dims.size() < 2) throw std::runtime_error("model file: bad layer dims");

    for (std::size_t l = 0; l + 1 < m.dims.size(); ++l) {
        std::string kind;
        long long rows = 0, cols = 0;
        if (!(in >> kind >> rows >> cols) || kind != "W" || rows != m.dims[l] ||
            cols != m.dims[l + 1])
            throw std::runtime_error("model file: bad weight block");
        Eigen::MatrixXd w(rows, cols);
        for (long long r = 0; r < rows; ++r)
            for (long long c = 0; c < cols; ++c)
                if (!(in >> w(r, c))) throw std::runtime_error("model file: truncated weights");
        long long blen = 0;
        if (!(in >> kind >> blen) || kind != "b" || blen != cols)
            throw std::runtime_error("model file: bad bias block");
        Eigen::VectorXd b(blen);
        for (long long i = 0; i < blen; ++i)
            if (!(in >> b(i))) throw std::runtime_error("model file: truncated biases");
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    return m;
}

}  // namespace lcnes::nes
